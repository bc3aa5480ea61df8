use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::Tolerances;

fn main() {
    let tols = Tolerances::default();
    let m = rotated_quartic_model(0.3);
    let crits = find_critical_points(&m, 2.5, 256, &tols);
    let to = ThimbleOptions { re_span: 5.0, ..Default::default() };
    let mut atlases: Vec<_> = crits.iter()
        .map(|c| build_thimble(&m, &c.location, 0.0, ThimbleSign::Plus, &to, &tols).unwrap())
        .collect();
    atlases.sort_by(|x, y| y.critical_value.im.partial_cmp(&x.critical_value.im).unwrap());
    for (name, a) in [("L0", &atlases[0]), ("L1", &atlases[1]), ("L2", &atlases[2])] {
        println!("{name}: ray0 end s {:.3}, ray1 end s {:.3}, ReW(p) {:.3}",
            a.rays[0].traj.end().t, a.rays[1].traj.end().t, a.critical_value.re);
    }
    let (l0, l2) = (&atlases[0], &atlases[2]);
    let chords = find_chords(l0, l2, 2, &PerturbationField::default(), &ChordOptions::default(), &tols).unwrap();
    for (nm, c) in [("lo", &chords[0]), ("hi", &chords[1])] {
        let m0 = l0.rotated_model();
        println!("{nm}: start chart {:?} (ray end {:.3}), end chart {:?} (ray end {:.3})",
            c.start_chart, l0.rays[c.start_chart.ray].traj.end().t,
            c.end_chart, l2.rays[c.end_chart.ray].traj.end().t);
        println!("   ReW drop at start {:.3}, at end {:.3}",
            (m0.value(c.start()).re - l0.critical_value.re).abs(),
            (m0.value(c.end()).re - l2.critical_value.re).abs());
    }
}

// debug: anatomy of the stalled Newton iterate
use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::strip::*;
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
    let (l0, l2) = (&atlases[0], &atlases[2]);
    let chords = find_chords(l0, l2, 2, &PerturbationField::default(), &ChordOptions::default(), &tols).unwrap();
    let (lo, hi) = (&chords[0], &chords[1]);
    println!("start charts: hi {:?} lo {:?}", hi.start_chart, lo.start_chart);
    println!("end   charts: hi {:?} lo {:?}", hi.end_chart, lo.end_chart);
    println!("hi start pt ({:+.3},{:+.3}) end pt ({:+.3},{:+.3})", hi.start()[0], hi.start()[1], hi.end()[0], hi.end()[1]);
    println!("lo start pt ({:+.3},{:+.3}) end pt ({:+.3},{:+.3})", lo.start()[0], lo.start()[1], lo.end()[0], lo.end()[1]);
    // run newton manually on a coarse grid and dump the stalled residual map
    let problem = StripProblem { model: m.clone(), k: 2, varpi: PerturbationField::default() };
    let opts = StripOptions { s_max: 4.0, ns: 48, nt: 8, max_newton: 60, ..Default::default() };
    match newton_solve_strip(&problem, l0, l2, hi, lo, &opts, &tols, None) {
        Ok(sol) => println!("converged?! E {:.6}", sol.energy),
        Err(e) => println!("stalled as expected: {e}"),
    }
}

// debug: scan the phase for chord folds on the quartic (L0,L2) k=2 pair
use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::Tolerances;

fn main() {
    let tols = Tolerances::default();
    for i in 0..24 {
        let theta = 0.05 + 0.06 * i as f64;
        let m = rotated_quartic_model(theta);
        let crits = find_critical_points(&m, 2.5, 256, &tols);
        if crits.len() != 3 { println!("theta {theta:.2}: {} crits", crits.len()); continue; }
        let to = ThimbleOptions { re_span: 5.0, ..Default::default() };
        let mut atlases: Vec<_> = crits.iter()
            .filter_map(|c| build_thimble(&m, &c.location, 0.0, ThimbleSign::Plus, &to, &tols).ok())
            .collect();
        if atlases.len() != 3 { println!("theta {theta:.2}: atlas failure"); continue; }
        atlases.sort_by(|x, y| y.critical_value.im.partial_cmp(&x.critical_value.im).unwrap());
        let (l0, l2) = (&atlases[0], &atlases[2]);
        match find_chords(l0, l2, 2, &PerturbationField::default(), &ChordOptions::default(), &tols) {
            Ok(ch) => {
                let info: Vec<String> = ch.iter().map(|c| format!("A{:+.4}/y{:?}/sv{:.1e}", c.action, c.grading.unwrap_or(99), c.tv_sigma_min)).collect();
                println!("theta {theta:.2}: {} chords  {}", ch.len(), info.join("  "));
            }
            Err(e) => println!("theta {theta:.2}: ERR {e}"),
        }
    }
}

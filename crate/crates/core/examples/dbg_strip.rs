// debug: constant-solution Newton log
use lgfloer_core::chords::{find_chords, rotated_cubic_model, ChordOptions, PerturbationField};
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::strip::*;
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::Tolerances;

fn main() {
    let tols = Tolerances::default();
    let m = rotated_cubic_model(std::f64::consts::PI / 6.0);
    let crits = find_critical_points(&m, 2.0, 128, &tols);
    let to = ThimbleOptions { re_span: 4.0, ..Default::default() };
    let a = build_thimble(&m, &crits[0].location, 0.0, ThimbleSign::Plus, &to, &tols).unwrap();
    let b = build_thimble(&m, &crits[1].location, 0.0, ThimbleSign::Plus, &to, &tols).unwrap();
    let (l0, l1) = if a.critical_value.im > b.critical_value.im { (a, b) } else { (b, a) };
    let chords = find_chords(&l0, &l1, 1, &PerturbationField::default(), &ChordOptions::default(), &tols).unwrap();
    println!("chords: {}", chords.len());
    for c in &chords { println!("  action {:.6} grading {:?} sigma {:.3e}", c.action, c.grading, c.tv_sigma_min); }
    let c = &chords[0];
    let problem = StripProblem { model: m.clone(), k: 1, varpi: PerturbationField::default() };
    let opts = StripOptions { s_max: 4.0, ns: 64, nt: 16, ..Default::default() };
    let sol = newton_solve_strip(&problem, &l0, &l1, c, c, &opts, &tols, None).unwrap();
    println!("converged, log:");
    for (r, h) in &sol.newton_log { println!("  res {:.3e} halvings {}", r, h); }
    println!("energy {:.3e} dual {:.3e} residual {:.3e}", sol.energy, sol.energy_dual, sol.residual_inf);
}

// debug: finite-difference check of the strip Jacobian incl. boundary rows
use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::strip::*;
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::Tolerances;
use nalgebra::DVector;

fn main() {
    let tols = Tolerances::default();
    let m = rotated_cubic_model(std::f64::consts::PI / 6.0);
    let crits = find_critical_points(&m, 2.0, 128, &tols);
    let to = ThimbleOptions { re_span: 4.0, ..Default::default() };
    let a = build_thimble(&m, &crits[0].location, 0.0, ThimbleSign::Plus, &to, &tols).unwrap();
    let b = build_thimble(&m, &crits[1].location, 0.0, ThimbleSign::Plus, &to, &tols).unwrap();
    let (l0, l1) = if a.critical_value.im > b.critical_value.im { (a, b) } else { (b, a) };
    let chords = find_chords(&l0, &l1, 1, &PerturbationField::default(), &ChordOptions::default(), &tols).unwrap();
    let c = &chords[0];
    let problem = StripProblem { model: m.clone(), k: 1, varpi: PerturbationField::default() };
    let opts = StripOptions { s_max: 3.0, ns: 12, nt: 6, ..Default::default() };
    // build a mildly perturbed ramp grid via the debug hooks
    let report = debug_jacobian_fd(&problem, &l0, &l1, c, c, &opts, &tols).unwrap();
    println!("max |J_fd - J_assembled| = {:.3e} at {:?}", report.0, report.1);
}

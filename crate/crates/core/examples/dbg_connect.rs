// debug: connecting strip on the quartic (L0, L2) k=2 pair
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
    let (lo, hi) = (&chords[0], &chords[1]); // sorted by action
    println!("l- (out) action {:.6} y {:?}; l+ (in) action {:.6} y {:?}", hi.action, hi.grading, lo.action, lo.grading);
    let problem = StripProblem { model: m.clone(), k: 2, varpi: PerturbationField::default() };
    let smax = default_s_max(l0, l2, 2);
    println!("default S = {smax:.2}");
    for (ns, nt) in [(192usize, 12usize), (384, 24)] {
        let opts = StripOptions { s_max: smax, ns, nt, ..Default::default() };
        match solve_with_continuation(&problem, l0, l2, hi, lo, &opts, &tols, None) {
            Ok(sol) => {
                let fit = decay_fit(&sol);
                let (slack, tol) = energy_identity_check(&sol, hi.action, lo.action, fit.delta_fit, &tols);
                println!("ns {ns} nt {nt}: iters {} E {:.8} dual {:.8} A-diff {:.8} slack {:.3e} (tol {:.3e}) delta {:.3} R2 {:.5}",
                    sol.newton_log.len(), sol.energy, sol.energy_dual, hi.action - lo.action, slack, tol, fit.delta_fit, fit.r_squared);
            }
            Err(e) => println!("ns {ns} nt {nt}: FAILED {e}"),
        }
    }
}

// debug: anatomy of the stalled iterate
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
    let problem = StripProblem { model: m.clone(), k: 2, varpi: PerturbationField::default() };
    let opts = StripOptions { s_max: 4.0, ns: 96, nt: 8, max_newton: 120, ..Default::default() };
    let sol = newton_iterate(&problem, l0, l2, hi, lo, &opts, &tols, None).unwrap();
    println!("converged {} log len {}", sol.converged, sol.newton_log.len());
    for (r, h) in sol.newton_log.iter().take(8) { println!("  res {:.3e} halv {}", r, h); }
    println!("  ... last: {:?}", sol.newton_log.last());
    let g = &sol.grid;
    for i in (0..=g.ns).step_by(6) {
        let mut rmax: f64 = 0.0;
        let mut at = 0usize;
        for j in 1..g.nt {
            let r = problem.residual_at(g, i, j).amax();
            if r > rmax { rmax = r; at = j; }
        }
        let dsn: f64 = (0..=g.nt).map(|j| g.ds_at(i, j).norm()).fold(0.0, f64::max);
        let u0 = g.node(i, 0);
        let u1 = g.node(i, g.nt);
        println!("col {i:3} s {:+.2}: maxres {:.2e}@j{at} |ds| {:.2e} bdy0 ({:+.3},{:+.3}) bdy1 ({:+.3},{:+.3})",
            g.s_of(i), rmax, dsn, u0[0], u0[1], u1[0], u1[1]);
    }
}

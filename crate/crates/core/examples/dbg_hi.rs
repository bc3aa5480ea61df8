// debug: hi-to-hi stall anatomy
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
    let hi = &chords[1];
    let problem = StripProblem { model: m.clone(), k: 2, varpi: PerturbationField::default() };
    let nt = 16usize;
    let opts = StripOptions { s_max: 4.0, ns: 8 * nt, nt, max_newton: 60, ..Default::default() };
    let sol = newton_iterate(&problem, l0, l2, hi, hi, &opts, &tols, None).unwrap();
    println!("conv {} res {:.3e}", sol.converged, sol.newton_log.last().unwrap().0);
    let g = &sol.grid;
    // where is the residual? per (i, j) block find the max
    let mut worst = (0.0f64, 0usize, 0usize);
    for i in 1..g.ns {
        for j in 0..=g.nt {
            let r = problem.residual_at(g, i, j).amax();
            if j == 0 || j == g.nt {
                // tangential part only
                let atlas = if j == 0 { l0 } else { l2 };
                if let Ok((c, _)) = atlas.project(g.node(i, j), 2.0) {
                    let tan = atlas.oriented_tangent_n1(c);
                    let rr = problem.residual_at(g, i, j);
                    let tr = tan.dot(&rr).abs();
                    if tr > worst.0 { worst = (tr, i, j); }
                }
            } else if r > worst.0 {
                worst = (r, i, j);
            }
        }
    }
    println!("worst constrained residual {:.3e} at col {} row {}", worst.0, worst.1, worst.2);
    // profile of boundary-row tangential residual and chart s along t=0
    for i in (0..=g.ns).step_by(8) {
        let u = g.node(i, 0);
        let (c, d) = l0.project(u, 2.0).unwrap();
        let tan = l0.oriented_tangent_n1(c);
        let tres = tan.dot(&problem.residual_at(g, i, 0));
        println!("i {i:3}: chart s {:.4} off {:.2e} tanres {:+.3e}", c.s, d, tres);
    }
}

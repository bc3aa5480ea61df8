// debug: boundary continuation toward the connecting strip
use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::strip::*;
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::Tolerances;
use nalgebra::DVector;

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
    let opts = StripOptions { s_max: 4.0, ns: 96, nt: 12, max_newton: 60, ..Default::default() };

    // fake-chord for the interpolated end data
    let blend = |lam: f64| -> Chord {
        let mut c = hi.clone();
        let samples: Vec<(f64, DVector<f64>)> = (0..=64)
            .map(|i| {
                let t = i as f64 / 64.0;
                (t, hi.at(t) * (1.0 - lam) + lo.at(t) * lam)
            })
            .collect();
        c.samples = samples;
        c
    };

    let mut lam = 0.0f64;
    let mut dstep = 0.25f64;
    let mut state: Option<StripGrid> = None;
    let mut last_good = 0.0;
    while lam < 1.0 - 1e-12 {
        let target = (lam + dstep).min(1.0);
        let lp = blend(target);
        let init = state.clone();
        match newton_iterate(&problem, l0, l2, hi, &lp, &opts, &tols, init) {
            Ok(sol) if sol.converged => {
                lam = target;
                last_good = lam;
                state = Some(sol.grid);
                println!("lam {lam:.4} converged (E {:.6})", sol.energy);
                dstep = (dstep * 1.5).min(0.25);
            }
            _ => {
                dstep *= 0.5;
                println!("lam {:.4} -> {target:.4} failed, step {dstep:.5}", lam);
                if dstep < 1e-4 { break; }
            }
        }
    }
    println!("reached lam = {last_good:.4}");
    if last_good >= 1.0 - 1e-9 {
        let sol = newton_iterate(&problem, l0, l2, hi, lo, &opts, &tols, state).unwrap();
        let fit = decay_fit(&sol);
        println!("FINAL: converged {} E {:.8} vs dA {:.8}; delta {:.3} R2 {:.5}",
            sol.converged, sol.energy, hi.action - lo.action, fit.delta_fit, fit.r_squared);
    }
}

// debug: chord-to-itself solves at k = 2 across resolutions
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
    for (name, c) in [("lo", &chords[0]), ("hi", &chords[1])] {
        for nt in [8usize, 12, 16, 24] {
            let opts = StripOptions { s_max: 4.0, ns: 8 * nt, nt, max_newton: 60, ..Default::default() };
            let problem = StripProblem { model: m.clone(), k: 2, varpi: PerturbationField::default() };
            match newton_iterate(&problem, l0, l2, c, c, &opts, &tols, None) {
                Ok(sol) => println!("{name} nt={nt}: conv {} iters {} res {:.2e} E {:.2e}",
                    sol.converged, sol.newton_log.len(),
                    sol.newton_log.last().map(|x| x.0).unwrap_or(0.0), sol.energy),
                Err(e) => println!("{name} nt={nt}: ERR {e}"),
            }
        }
    }
}

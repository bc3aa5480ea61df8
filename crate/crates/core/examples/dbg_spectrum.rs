// debug: chord spectra of the cubic and quartic test models
use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::potential::{Domain, Potential};
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::{LgModel, Tolerances};
use num_complex::Complex64 as C64;

fn scan(name: &str, m: &LgModel, span: f64) {
    let tols = Tolerances::default();
    let crits = find_critical_points(m, 2.5, 256, &tols);
    println!("== {name}: {} critical points", crits.len());
    for c in &crits {
        println!("   p = ({:.4}, {:.4})  W = {:.4}+{:.4}i  morse={}", c.location[0], c.location[1], c.value.re, c.value.im, c.morse);
    }
    let to = ThimbleOptions { re_span: span, ..Default::default() };
    let mut atlases = Vec::new();
    for c in &crits {
        atlases.push(build_thimble(m, &c.location, 0.0, ThimbleSign::Plus, &to, &tols).unwrap());
    }
    // order by decreasing Im W (L0 > L1 > ... convention)
    atlases.sort_by(|a, b| b.critical_value.im.partial_cmp(&a.critical_value.im).unwrap());
    for i in 0..atlases.len() {
        for j in 0..atlases.len() {
            if i == j { continue; }
            let (l0, l1) = (&atlases[i], &atlases[j]);
            if l0.critical_value.im <= l1.critical_value.im { continue; }
            for k in 1u32..=3 {
                match find_chords(l0, l1, k, &PerturbationField::default(), &ChordOptions::default(), &tols) {
                    Ok(chords) => {
                        for c in &chords {
                            println!("   L{i}>L{j} k={k}: action {:+.6} y={:?} sigma {:.2e} tv={} start=({:+.4},{:+.4})",
                                c.action, c.grading, c.tv_sigma_min, c.transverse, c.start()[0], c.start()[1]);
                        }
                        if chords.is_empty() { println!("   L{i}>L{j} k={k}: none"); }
                    }
                    Err(e) => println!("   L{i}>L{j} k={k}: ERR {e}"),
                }
            }
        }
    }
}

fn main() {
    let cubic = rotated_cubic_model(std::f64::consts::PI / 6.0);
    scan("rotated cubic e^{i pi/6}(z^3/3 - z)", &cubic, 4.0);
    let quartic = LgModel::flat(
        Potential::univariate(Domain::Affine, &[(4, C64::new(0.25, 0.0)), (1, C64::new(-1.0, 0.0))]).unwrap(),
    ).unwrap().rotated(0.3);
    scan("rotated quartic e^{0.3 i}(z^4/4 - z)", &quartic, 5.0);
}

// debug: low spectrum of the asymptotic-operator family along the
// chord interpolation
use lgfloer_core::chords::*;
use lgfloer_core::critical::find_critical_points;
use lgfloer_core::thimble::{build_thimble, ThimbleOptions, ThimbleSign};
use lgfloer_core::Tolerances;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

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
    println!("chords: {} gradings {:?} {:?} actions {:.4} {:.4}", chords.len(),
        chords[0].grading, chords[1].grading, chords[0].action, chords[1].action);
    let (a, b) = (&chords[0], &chords[1]);
    let nt = 96usize;
    let ht = 1.0 / nt as f64;
    let kf = 2.0f64;
    for s in 0..=20 {
        let lam = s as f64 / 20.0;
        let pts: Vec<DVector<f64>> = (0..=nt).map(|j| {
            let t = j as f64 * ht;
            a.at(t) * (1.0 - lam) + b.at(t) * lam
        }).collect();
        let (c0, d0) = l0.project(&pts[0], 5.0).unwrap();
        let tau0 = l0.oriented_tangent_n1(c0);
        let (c1, d1) = l2.project(&pts[nt], 5.0).unwrap();
        let tau1 = l2.oriented_tangent_n1(c1);
        let red = 2 * (nt - 1) + 2;
        let mut basis = DMatrix::zeros(2 * (nt + 1), red);
        basis.view_mut((0, 0), (2, 1)).copy_from(&tau0);
        for j in 1..nt {
            basis[(2 * j, 1 + 2 * (j - 1))] = 1.0;
            basis[(2 * j + 1, 2 + 2 * (j - 1))] = 1.0;
        }
        basis.view_mut((2 * nt, red - 1), (2, 1)).copy_from(&tau1);
        let mut q = DMatrix::zeros(2 * (nt + 1), 2 * (nt + 1));
        for j in 0..nt {
            for (r, c, sgn) in [(j, j, -1.0f64), (j, j + 1, 1.0), (j + 1, j, -1.0), (j + 1, j + 1, 1.0)] {
                let (br, bc) = (2 * r, 2 * c);
                q[(br, bc + 1)] += 0.5 * sgn;
                q[(br + 1, bc)] -= 0.5 * sgn;
            }
        }
        for (j, p) in pts.iter().enumerate() {
            let w = if j == 0 || j == nt { 0.5 } else { 1.0 } * ht;
            let hess = m.real_hessian_re(p) * kf;
            for r in 0..2 { for c in 0..2 { q[(2 * j + r, 2 * j + c)] += w * hess[(r, c)]; } }
        }
        let mut g = DMatrix::zeros(2 * (nt + 1), 2 * (nt + 1));
        for j in 0..=nt {
            let w = if j == 0 || j == nt { 0.5 } else { 1.0 } * ht;
            g[(2 * j, 2 * j)] = w;
            g[(2 * j + 1, 2 * j + 1)] = w;
        }
        let qr = basis.transpose() * (&q + q.transpose()) * 0.5 * &basis;
        let gr = basis.transpose() * g * &basis;
        let chol = gr.cholesky().unwrap();
        let li = chol.l().try_inverse().unwrap();
        let sym = &li * qr * li.transpose();
        let se = SymmetricEigen::new((sym.clone() + sym.transpose()) * 0.5);
        let mut ev: Vec<f64> = se.eigenvalues.iter().cloned().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let neg = ev.iter().filter(|&&e| e < 0.0).count();
        let near: Vec<String> = ev.iter().filter(|e| e.abs() < 3.0).map(|e| format!("{e:+.3}")).collect();
        println!("lam {lam:.2} d0 {d0:.1e} d1 {d1:.1e} neg {neg} near0: {}", near.join(" "));
    }
}

use qonsager::bethe::{aw_coeffs, build_psi_capped, eigenvalue_ladder};
use qonsager::functional::make_family;
use qonsager::hierarchy::*;
use qonsager::scalar::{c, QParams};
use qonsager::C64;

fn main() {
    let q = QParams::from_phi(c(0.239, 0.083)).unwrap();
    let fam: qonsager::functional::TridiagFamily<f64> = make_family(
        1,
        vec![c(0.41, 0.11), c(-0.57, 0.21), c(0.88, 0.19), c(0.67, -0.39)],
        vec![],
        q,
    )
    .unwrap();
    let cp = CouplingSet {
        kappa: c(0.9, -0.2),
        kappa_star: c(-0.55, 0.37),
        kappa_plus: c(0.44, 0.31),
        kappa_minus: c(-0.15, 0.05),
        k_plus: c(1.0, 0.0),
        k_minus: c(1.0, 0.0),
    };
    let op = I1FunctionalOp::new(fam.clone(), cp).unwrap();
    // operator identity on psi~_n: I1 psi~_n = kappa lam_n psi~_n + B_n psi~_{n+1} + A_n psi~_n + C_n psi~_{n-1}
    for n in [3usize, 10, 18] {
        let m = op.matrix(n + 2).unwrap();
        let lead = |k: usize| -> C64 {
            let mut acc = c(1.0, 0.0);
            for j in 0..k { acc /= aw_coeffs(&fam, j).unwrap().b; }
            acc
        };
        let get = |k: usize| -> Vec<C64> {
            let st = &build_psi_capped(&fam, k, n + 2).unwrap()[0];
            let l = lead(k);
            let mut v: Vec<C64> = st.x_coeffs.iter().map(|&cc| cc * l).collect();
            v.resize(n + 4, c(0.0, 0.0));
            v
        };
        let pn = get(n);
        let pp = get(n + 1);
        let pm = get(n - 1);
        // lhs: I1 matrix applied to pn (truncate to rows)
        let mut lhs = vec![c::<f64>(0.0, 0.0); n + 4];
        for i in 0..m.rows() {
            let mut s = c::<f64>(0.0, 0.0);
            for j in 0..m.cols().min(n + 3) {
                if j < n + 3 { s += m[(i, j)] * pn[j]; }
            }
            lhs[i] = s;
        }
        let (bb, ccv, aa) = coeffs_abc(&fam, &cp, n).unwrap();
        let lam = eigenvalue_ladder(&fam, n);
        let mut rhs = vec![c::<f64>(0.0, 0.0); n + 4];
        for i in 0..n + 4 {
            rhs[i] = (cp.kappa * lam + aa) * pn[i] + bb * pp[i] + ccv * pm[i];
        }
        let scale: f64 = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff: f64 = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("n={n}: relative operator-vs-blocks diff = {:.2e}", diff / scale);
    }
}

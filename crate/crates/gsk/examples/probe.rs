use gsk::asymptotics::build_model;
use gsk::cauchy::CauchyData;
use gsk::kernels::boson_kernel;
use gsk::oracle::nystrom_logdet;
use gsk::quadrature::truncated_line_rule;
use gsk::roots::{closed_form_roots, DEFAULT_ROOT_TOL};
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let kernel = Arc::new(boson_kernel(1.0, 1.0, Complex64::new(0.5, 0.0)).unwrap());
    let rule = truncated_line_rule(6.0, 16, 24).unwrap();
    let data = CauchyData::build(kernel.clone(), rule.clone(), 1e-10).unwrap();
    // N-stability: |thm2(N=3) - thm2(N=2)| vs |oracle - thm2(N=2)|
    for &x in &[4.0, 6.0, 8.0] {
        let t2: Vec<Complex64> = [2usize, 3]
            .iter()
            .map(|&n| {
                let r = closed_form_roots(&kernel, n, DEFAULT_ROOT_TOL).unwrap();
                build_model(&data, &r, x).unwrap().logdet_corrected()
            })
            .collect();
        let oracle = nystrom_logdet(&kernel, x, &rule).unwrap().value;
        println!(
            "x={x}: |t2(3)-t2(2)|={:.3e}  |oracle-t2(2)|={:.3e}",
            (t2[1] - t2[0]).norm(),
            (oracle - t2[0]).norm()
        );
    }
    // Convergence order at low order (visible refinement regime)
    for order in [6usize, 8] {
        let mut prev: Option<Complex64> = None;
        let mut deltas = Vec::new();
        for panels in [6usize, 12, 24, 48] {
            let r = truncated_line_rule(6.0, panels, order).unwrap();
            let ld = nystrom_logdet(&kernel, 6.0, &r).unwrap().value;
            if let Some(p) = prev {
                deltas.push((ld - p).norm());
            }
            prev = Some(ld);
        }
        println!("order {order}: deltas {deltas:?}");
    }
}

//! Deterministic quadrature primitives: composite Gauss–Legendre rules on a
//! truncated line, principal-value integrals by singularity subtraction, and
//! the regularized double integral `∬ ν(λ)ν(μ)/(λ−μ−i0)² dλ dμ`.
//!
//! The real axis is oriented left to right, so "slightly to the left of the
//! contour" is the upper half-plane and the double-integral kernel is
//! `(λ − μ − i0)⁻²`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{GskError, Result};

/// Poles closer than this to a quadrature node trigger the node-shifted
/// fallback of [`pv_line_integral`].
pub const NODE_COLLISION_TOL: f64 = 1e-10;

/// A composite Gauss–Legendre rule on a finite interval.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
    panels: usize,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `Σ wᵢ f(xᵢ)` for a complex-valued integrand.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// Weighted sum of precomputed samples (must match the node count).
    pub fn integrate_samples(&self, samples: &[Complex64]) -> Complex64 {
        debug_assert_eq!(samples.len(), self.nodes.len());
        samples
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| s * w)
            .sum()
    }

    pub fn integrate_real<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial `P_order`, found by Newton
/// iteration from the Chebyshev initial guess; weights are
/// `2 / ((1−x²) P'ₙ(x)²)`. The rule integrates polynomials of degree
/// `2·order − 1` exactly.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=512).contains(&order) {
        return Err(GskError::Config(format!(
            "Gauss-Legendre order {order} out of range 1..=512"
        )));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // i-th positive-side root, counted from the right end.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                // one polishing step
                let (p2, d2) = legendre_and_derivative(n, x);
                x -= p2 / d2;
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[m - 1] = 2.0 / (d * d);
    }
    nodes.reverse();
    weights.reverse();
    Ok((nodes, weights))
}

/// Value and derivative of the Legendre polynomial `P_n` by the three-term
/// recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n from P_n and P_{n-1}; the roots are interior so x² ≠ 1.
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule with `panels` equal Gauss–Legendre panels on `[lo, hi]`.
pub fn composite_rule(lo: f64, hi: f64, panels: usize, order: usize) -> Result<QuadratureRule> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(GskError::Config(format!("invalid domain [{lo}, {hi}]")));
    }
    if panels < 1 {
        return Err(GskError::Config("panels must be >= 1".into()));
    }
    let (base_nodes, base_weights) = gauss_legendre(order)?;
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let mid = a + 0.5 * width;
        let half = 0.5 * width;
        for (&t, &w) in base_nodes.iter().zip(&base_weights) {
            nodes.push(mid + half * t);
            weights.push(half * w);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        lo,
        hi,
        panels,
        order,
    })
}

/// Composite rule on the truncated line `[−cutoff, cutoff]`.
pub fn truncated_line_rule(cutoff: f64, panels: usize, order: usize) -> Result<QuadratureRule> {
    if !(cutoff > 0.0) {
        return Err(GskError::Config(format!("cutoff {cutoff} must be > 0")));
    }
    composite_rule(-cutoff, cutoff, panels, order)
}

/// Principal value `PV ∫ f(μ)/(μ − pole) dμ` over the rule's domain.
///
/// Computed by singularity subtraction,
/// `∫ (f(μ)−f(pole))/(μ−pole) dμ + f(pole)·log((hi−pole)/(pole−lo))`.
/// If the pole falls within [`NODE_COLLISION_TOL`] of a node the rule is
/// rebuilt with a shifted panel layout rather than returning garbage.
pub fn pv_line_integral<F: Fn(f64) -> Complex64>(
    f: F,
    pole: f64,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    let (lo, hi) = rule.domain();
    if !(pole > lo && pole < hi) {
        return Err(GskError::Domain(format!(
            "PV pole {pole} not strictly inside [{lo}, {hi}]"
        )));
    }
    let clearance = |r: &QuadratureRule| {
        r.nodes()
            .iter()
            .fold(f64::INFINITY, |acc, &x| acc.min((x - pole).abs()))
    };
    if clearance(rule) > NODE_COLLISION_TOL {
        return Ok(pv_subtracted(&f, pole, rule));
    }
    // Node collision: re-evaluate with shifted panel layouts.
    for (dp, dq) in [(1, 0), (0, 1), (2, 0), (1, 1), (3, 0)] {
        let alt = composite_rule(lo, hi, rule.panels() + dp, rule.order() + dq)?;
        if clearance(&alt) > NODE_COLLISION_TOL {
            return Ok(pv_subtracted(&f, pole, &alt));
        }
    }
    Err(GskError::Domain(format!(
        "PV pole {pole} collides with quadrature nodes in every fallback layout"
    )))
}

fn pv_subtracted<F: Fn(f64) -> Complex64>(f: &F, pole: f64, rule: &QuadratureRule) -> Complex64 {
    let (lo, hi) = rule.domain();
    let f0 = f(pole);
    let smooth = rule.integrate(|x| (f(x) - f0) / (x - pole));
    smooth + f0 * ((hi - pole) / (pole - lo)).ln()
}

/// Regularized double integral `∬ ν(λ)ν(μ)/(λ − μ − i0)² dλ dμ`.
///
/// Integrating by parts in `λ` (the boundary term vanishes by the tail check)
/// and splitting the boundary value,
///
/// ```text
/// ∬ ν'(λ)ν(μ)/(λ−μ−i0) dλ dμ
///   = PV ∬ ν'(λ)ν(μ)/(λ−μ) dλ dμ + iπ ∫ ν'(λ)ν(λ) dλ.
/// ```
///
/// The inner PV integral runs over a companion rule of order `order+1` on the
/// same panels; Gauss nodes of consecutive orders interlace strictly, so the
/// outer nodes never collide with inner ones.
pub fn regularized_double_integral<F, G>(
    nu: F,
    nu_prime: G,
    rule: &QuadratureRule,
    tail_tol: f64,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let (lo, hi) = rule.domain();
    for endpoint in [lo, hi] {
        let v = nu(endpoint).norm();
        if v > tail_tol {
            return Err(GskError::TailTooLarge {
                quantity: "nu",
                endpoint,
                value: v,
                tol: tail_tol,
            });
        }
    }
    let inner = composite_rule(lo, hi, rule.panels(), rule.order() + 1)?;
    let inner_np: Vec<Complex64> = inner.nodes().iter().map(|&y| nu_prime(y)).collect();

    let mut total = Complex64::new(0.0, 0.0);
    for (&mu, &w_mu) in rule.nodes().iter().zip(rule.weights()) {
        let np_mu = nu_prime(mu);
        let mut pv = Complex64::new(0.0, 0.0);
        for ((&y, &wy), &np_y) in inner.nodes().iter().zip(inner.weights()).zip(&inner_np) {
            pv += (np_y - np_mu) / (y - mu) * wy;
        }
        pv += np_mu * ((hi - mu) / (mu - lo)).ln();
        total += nu(mu) * pv * w_mu;
    }
    let diag = rule.integrate(|x| nu_prime(x) * nu(x));
    Ok(total + Complex64::new(0.0, PI) * diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn order_one_is_midpoint_rule() {
        let (n, w) = gauss_legendre(1).unwrap();
        assert_eq!(n, vec![0.0]);
        assert_eq!(w, vec![2.0]);
    }

    #[test]
    fn order_two_classical_nodes() {
        let (n, w) = gauss_legendre(2).unwrap();
        let r = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(n[0], -r, epsilon = 1e-15);
        assert_relative_eq!(n[1], r, epsilon = 1e-15);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(w[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_out_of_range_rejected() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(513).is_err());
    }

    #[test]
    fn nodes_increasing_weights_positive_sum_two() {
        for order in [3, 8, 16, 31, 64, 512] {
            let (n, w) = gauss_legendre(order).unwrap();
            assert!(n.windows(2).all(|p| p[0] < p[1]), "order {order}");
            assert!(w.iter().all(|&x| x > 0.0));
            let s: f64 = w.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn degree_fourteen_monomial_exact_at_order_sixteen() {
        let (n, w) = gauss_legendre(16).unwrap();
        let val: f64 = n.iter().zip(&w).map(|(&x, &wi)| wi * x.powi(14)).sum();
        assert_relative_eq!(val, 2.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn line_rule_gaussian_integral() {
        let rule = truncated_line_rule(6.0, 12, 20).unwrap();
        let v = rule.integrate_real(|x| (-x * x).exp());
        assert_relative_eq!(v, PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn line_rule_lorentzian_integral() {
        let rule = truncated_line_rule(8.0, 16, 24).unwrap();
        let v = rule.integrate_real(|x| 1.0 / (1.0 + x * x));
        assert_relative_eq!(v, 2.0 * 8.0_f64.atan(), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_single_node_rule() {
        let rule = truncated_line_rule(1.0, 1, 1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_eq!(rule.weights(), &[2.0]);
    }

    #[test]
    fn rule_integrates_constant_to_domain_length() {
        let rule = truncated_line_rule(7.5, 9, 13).unwrap();
        let v = rule.integrate_real(|_| 1.0);
        assert_relative_eq!(v, 15.0, epsilon = 1e-13 * 15.0);
    }

    #[test]
    fn doubling_order_is_converged_on_smooth_integrands() {
        let a = truncated_line_rule(5.0, 8, 16).unwrap();
        let b = truncated_line_rule(5.0, 8, 32).unwrap();
        let f = |x: f64| (-x * x).exp() * (3.0 * x).cos();
        assert!((a.integrate_real(f) - b.integrate_real(f)).abs() < 1e-12);
    }

    #[test]
    fn pv_of_constant_vanishes_on_symmetric_domain() {
        let rule = truncated_line_rule(4.0, 8, 16).unwrap();
        let v = pv_line_integral(|_| Complex64::new(1.0, 0.0), 0.0, &rule).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn pv_of_identity_is_domain_length() {
        let rule = truncated_line_rule(4.0, 8, 16).unwrap();
        let v = pv_line_integral(|x| Complex64::new(x, 0.0), 0.0, &rule).unwrap();
        assert_relative_eq!(v.re, 8.0, epsilon = 1e-13);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn pv_gaussian_matches_dense_reference() {
        let f = |x: f64| Complex64::new((-x * x).exp(), 0.0);
        let rule = truncated_line_rule(8.0, 16, 20).unwrap();
        let v = pv_line_integral(f, 1.0, &rule).unwrap();
        let dense = truncated_line_rule(8.0, 96, 30).unwrap();
        let reference = pv_line_integral(f, 1.0, &dense).unwrap();
        assert!((v - reference).norm() < 1e-10);
    }

    #[test]
    fn pv_pole_on_node_falls_back_to_shifted_panels() {
        // Odd order puts a node at each panel center; panels=3 on [-3,3]
        // centers a node exactly at 0.
        let rule = truncated_line_rule(3.0, 3, 5).unwrap();
        assert!(rule.nodes().iter().any(|&x| x.abs() < 1e-14));
        let f = |x: f64| Complex64::new((-x * x).exp(), 0.0);
        let v = pv_line_integral(f, 0.0, &rule).unwrap();
        // Odd integrand around an interior pole of an even function: PV = 0.
        assert!(v.norm() < 1e-10, "got {v}");
    }

    #[test]
    fn pv_antisymmetry_under_reflection() {
        // PV[f(-·)](-λ0) = -PV[f](λ0) on a symmetric domain.
        let rule = truncated_line_rule(6.0, 12, 18).unwrap();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..10 {
            let (c1, c2, c3) = (rnd(), rnd(), rnd());
            let pole = 3.0 * rnd();
            let f = move |x: f64| Complex64::new((-x * x).exp() * (c1 + c2 * x + c3 * x * x), 0.0);
            let g = move |x: f64| f(-x);
            let a = pv_line_integral(f, pole, &rule).unwrap();
            let b = pv_line_integral(g, -pole, &rule).unwrap();
            assert!((a + b).norm() < 1e-11, "pole {pole}: {a} vs {b}");
        }
    }

    #[test]
    fn regularized_double_integral_of_zero_is_zero() {
        let rule = truncated_line_rule(5.0, 8, 12).unwrap();
        let zero = |_x: f64| Complex64::new(0.0, 0.0);
        let v = regularized_double_integral(zero, zero, &rule, 1e-12).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn regularized_double_integral_real_even_density_is_real() {
        let rule = truncated_line_rule(7.0, 14, 20).unwrap();
        let nu = |x: f64| Complex64::new((-x * x).exp(), 0.0);
        let nup = |x: f64| Complex64::new(-2.0 * x * (-x * x).exp(), 0.0);
        let v = regularized_double_integral(nu, nup, &rule, 1e-10).unwrap();
        // iπ∫ν'ν = iπ·½[ν²] is a pure tail term here, so the result is the
        // (real) PV part.
        assert!(v.im.abs() < 1e-12, "imaginary part {}", v.im);
        assert!(v.re.abs() > 1e-3); // non-trivial
    }

    #[test]
    fn regularized_double_integral_tail_violation_reports_endpoint() {
        let rule = truncated_line_rule(2.0, 4, 8).unwrap();
        let nu = |x: f64| Complex64::new((-x * x).exp(), 0.0);
        let nup = |x: f64| Complex64::new(-2.0 * x * (-x * x).exp(), 0.0);
        let err = regularized_double_integral(nu, nup, &rule, 1e-12).unwrap_err();
        match err {
            GskError::TailTooLarge { endpoint, .. } => assert_eq!(endpoint.abs(), 2.0),
            other => panic!("unexpected error {other}"),
        }
    }

    /// The `(λ−μ−iε)⁻²` double integral with ε → 0 taken exactly: for ν
    /// analytic in a strip of half-width > depth, the λ line is deformed to
    /// `Im λ = −depth` (the pole at `μ + iε` sits above the axis, so nothing
    /// is crossed), after which ε can be set to zero and the integrand is
    /// smooth. Independent of the Plemelj-split production path.
    fn shifted_double_integral_oracle<F: Fn(Complex64) -> Complex64>(
        nu: &F,
        cutoff: f64,
        depth: f64,
    ) -> Complex64 {
        let outer = truncated_line_rule(cutoff, 48, 16).unwrap();
        let inner = truncated_line_rule(cutoff, 48, 17).unwrap();
        let inner_samples: Vec<Complex64> = inner
            .nodes()
            .iter()
            .map(|&s| nu(Complex64::new(s, -depth)))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (&mu, &w_mu) in outer.nodes().iter().zip(outer.weights()) {
            let mut row = Complex64::new(0.0, 0.0);
            for ((&s, &ws), &nv) in inner.nodes().iter().zip(inner.weights()).zip(&inner_samples) {
                let d = Complex64::new(s - mu, -depth);
                row += nv * ws / (d * d);
            }
            acc += nu(Complex64::new(mu, 0.0)) * row * w_mu;
        }
        acc
    }

    /// Same object by brute force at finite ε on a fine real grid, Neville-
    /// extrapolated ε → 0. Coarser than the contour-shift route but fully
    /// literal.
    fn epsilon_ladder_oracle<F: Fn(f64) -> Complex64>(
        nu: &F,
        cutoff: f64,
        epsilons: &[f64],
    ) -> Complex64 {
        let fine = truncated_line_rule(cutoff, 240, 10).unwrap();
        let samples: Vec<Complex64> = fine.nodes().iter().map(|&x| nu(x)).collect();
        let values: Vec<Complex64> = epsilons
            .iter()
            .map(|&eps| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, (&li, &wi)) in fine.nodes().iter().zip(fine.weights()).enumerate() {
                    let mut row = Complex64::new(0.0, 0.0);
                    for (j, (&mj, &wj)) in fine.nodes().iter().zip(fine.weights()).enumerate() {
                        let d = Complex64::new(li - mj, -eps);
                        row += samples[j] * wj / (d * d);
                    }
                    acc += samples[i] * row * wi;
                }
                acc
            })
            .collect();
        let mut tab = values;
        let n = tab.len();
        for level in 1..n {
            for i in 0..n - level {
                let e_i = epsilons[i];
                let e_j = epsilons[i + level];
                tab[i] = (tab[i + 1] * e_i - tab[i] * e_j) / (e_i - e_j);
            }
        }
        tab[0]
    }

    #[test]
    fn regularized_double_integral_matches_contour_shift_oracle() {
        let rule = truncated_line_rule(6.0, 12, 20).unwrap();
        let coeff = Complex64::new(0.3, 0.1);
        let nu_c = move |z: Complex64| (-z * z).exp() * coeff;
        let nu = move |x: f64| nu_c(Complex64::new(x, 0.0));
        let nup = move |x: f64| {
            let z = Complex64::new(x, 0.0);
            (-z * z).exp() * (-2.0 * z) * coeff
        };
        let v = regularized_double_integral(&nu, &nup, &rule, 1e-10).unwrap();
        let oracle = shifted_double_integral_oracle(&nu_c, 6.0, 0.5);
        assert!(
            (v - oracle).norm() < 1e-9,
            "regularized {v} vs contour-shift oracle {oracle}"
        );
    }

    #[test]
    fn regularized_double_integral_matches_epsilon_extrapolation() {
        let rule = truncated_line_rule(6.0, 12, 20).unwrap();
        let nu = |x: f64| Complex64::new((-x * x).exp(), 0.0) * Complex64::new(0.3, 0.1);
        let nup =
            |x: f64| Complex64::new(-2.0 * x * (-x * x).exp(), 0.0) * Complex64::new(0.3, 0.1);
        let v = regularized_double_integral(&nu, &nup, &rule, 1e-10).unwrap();
        let oracle = epsilon_ladder_oracle(&nu, 6.0, &[0.4, 0.3, 0.2, 0.15, 0.1, 0.075, 0.05]);
        assert!(
            (v - oracle).norm() < 1e-6,
            "regularized {v} vs epsilon-ladder oracle {oracle}"
        );
    }
}

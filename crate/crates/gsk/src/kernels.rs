//! Analytic data defining one generalized sine-kernel operator, the built-in
//! kernel families, and pointwise kernel evaluation including the diagonal
//! limit.
//!
//! A kernel is described by `φ = γF` (always stored as the product: every
//! downstream formula depends on `γF` or `γF'` jointly, so storing them
//! separately would add an unobservable degree of freedom), the phase
//! function `g`, a strip half-width `a`, and the lists of simple poles of `F`
//! in each half of the strip.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{GskError, Result};

/// Which side of the real axis, or which oscillating factor `e±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn signum(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

type AnalyticFn = Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Closed-form structure available for the built-in families: the zero
/// series of `1+φ` and, for the spin-chain kernel, the explicit boundary
/// Cauchy transform.
#[derive(Debug, Clone)]
pub enum ClosedForm {
    /// `φ(λ) = (e^β − 1)/(e^{(λ²−h)/T} + 1)`.
    Boson { h: f64, t: f64, beta: Complex64 },
    /// `φ(λ) = sinh[λ(π/2−ζ)] / sinh[λπ/2]`.
    Xxz { zeta: f64 },
}

/// Analytic data of one GSK operator. Immutable after construction; safe to
/// share across threads.
pub struct GskKernel {
    label: String,
    a: f64,
    phi: AnalyticFn,
    phi_prime: AnalyticFn,
    g: AnalyticFn,
    g_prime: AnalyticFn,
    poles_plus: Vec<Complex64>,
    poles_minus: Vec<Complex64>,
    closed_form: Option<ClosedForm>,
}

impl std::fmt::Debug for GskKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GskKernel")
            .field("label", &self.label)
            .field("a", &self.a)
            .field("poles_plus", &self.poles_plus.len())
            .field("poles_minus", &self.poles_minus.len())
            .finish()
    }
}

impl GskKernel {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Half-width of the strip within which the stored analytic data lives.
    pub fn strip_half_width(&self) -> f64 {
        self.a
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        (self.phi)(z)
    }

    pub fn phi_prime(&self, z: Complex64) -> Complex64 {
        (self.phi_prime)(z)
    }

    pub fn g(&self, z: Complex64) -> Complex64 {
        (self.g)(z)
    }

    pub fn g_prime(&self, z: Complex64) -> Complex64 {
        (self.g_prime)(z)
    }

    pub fn poles_plus(&self) -> &[Complex64] {
        &self.poles_plus
    }

    pub fn poles_minus(&self) -> &[Complex64] {
        &self.poles_minus
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    /// Cutoff at which `|φ|` has decayed below ~1e-13 for the built-ins;
    /// used as the default quadrature truncation.
    pub fn suggested_cutoff(&self) -> f64 {
        match &self.closed_form {
            Some(ClosedForm::Boson { h, t, .. }) => (h + 36.0 * t).sqrt().max(6.0),
            // |φ| ~ e^{−min(ζ, π−ζ)·|λ|} at real infinity.
            Some(ClosedForm::Xxz { zeta }) => (32.0 / zeta.min(PI - zeta)).max(12.0),
            None => 0.75 * self.a,
        }
    }

    fn check_strip(&self, z: Complex64) -> Result<()> {
        if z.im.abs() >= self.a {
            return Err(GskError::Domain(format!(
                "lambda = {z} outside the strip |Im| < {}",
                self.a
            )));
        }
        Ok(())
    }

    /// Construction-time sanity checks: admissibility `sup|φ| < 1` on a real
    /// test grid, decay of `|φ|` at the suggested cutoff, and agreement of
    /// `φ'` with central differences.
    fn validate(&self) -> Result<()> {
        let cutoff = self.suggested_cutoff();
        let mut max_abs = 0.0f64;
        let mut arg_max = 0.0f64;
        let n = 1601;
        for i in 0..n {
            let x = -cutoff + 2.0 * cutoff * (i as f64) / ((n - 1) as f64);
            let v = self.phi(Complex64::new(x, 0.0)).norm();
            if v > max_abs {
                max_abs = v;
                arg_max = x;
            }
        }
        if max_abs >= 1.0 {
            return Err(GskError::Admissibility {
                max_abs,
                at: arg_max,
            });
        }
        for endpoint in [-cutoff, cutoff] {
            let v = self.phi(Complex64::new(endpoint, 0.0)).norm();
            if v > 1e-10 {
                return Err(GskError::TailTooLarge {
                    quantity: "phi",
                    endpoint,
                    value: v,
                    tol: 1e-10,
                });
            }
        }
        // φ' against central differences on a coarse grid.
        let step = 1e-5;
        for i in 0..41 {
            let x = -0.9 * cutoff + 1.8 * cutoff * (i as f64) / 40.0;
            let z = Complex64::new(x, 0.0);
            let fd = (self.phi(z + step) - self.phi(z - step)) / (2.0 * step);
            let an = self.phi_prime(z);
            if (fd - an).norm() > 1e-6 * (1.0 + an.norm()) {
                return Err(GskError::Config(format!(
                    "phi_prime disagrees with central differences at lambda = {x}: {an} vs {fd}"
                )));
            }
        }
        for (p, expect_upper) in self
            .poles_plus
            .iter()
            .map(|p| (p, true))
            .chain(self.poles_minus.iter().map(|p| (p, false)))
        {
            if (p.im > 0.0) != expect_upper || p.im.abs() >= self.a {
                return Err(GskError::Config(format!(
                    "pole {p} on the wrong side or outside the strip |Im| < {}",
                    self.a
                )));
            }
        }
        Ok(())
    }
}

/// One evaluated kernel sample: the pair of arguments and `γV(λ,μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub value: Complex64,
}

impl KernelPoint {
    pub fn evaluate(kernel: &GskKernel, x: f64, lambda: Complex64, mu: Complex64) -> Result<Self> {
        Ok(KernelPoint {
            lambda,
            mu,
            value: kernel_value(kernel, x, lambda, mu)?,
        })
    }
}

/// `e±(λ) = exp(±ixλ/2 ± g(λ)/2)`. `e₊·e₋ = 1` identically.
pub fn e_pm(kernel: &GskKernel, x: f64, lambda: Complex64, sign: Sign) -> Result<Complex64> {
    kernel.check_strip(lambda)?;
    let exponent = (Complex64::new(0.0, x) * lambda + kernel.g(lambda)) * 0.5;
    Ok((exponent * sign.signum()).exp())
}

/// `e±²(λ) = exp(±(ixλ + g(λ)))`, the combination entering the correction
/// matrices and contour weights.
pub fn e_pm_squared(kernel: &GskKernel, x: f64, lambda: Complex64, sign: Sign) -> Result<Complex64> {
    kernel.check_strip(lambda)?;
    let exponent = Complex64::new(0.0, x) * lambda + kernel.g(lambda);
    Ok((exponent * sign.signum()).exp())
}

/// Pointwise kernel value `γV(λ,μ)`, with the analytic diagonal limit
/// `γV(λ,λ) = φ(λ)(x − i g'(λ))/(2π)`.
///
/// The bracket is evaluated as `2 sinh((ix(λ−μ) + g(λ)−g(μ))/2)`, which is
/// exact and cancellation-free near the diagonal; the square root is the
/// principal branch of each factor separately.
pub fn kernel_value(
    kernel: &GskKernel,
    x: f64,
    lambda: Complex64,
    mu: Complex64,
) -> Result<Complex64> {
    kernel.check_strip(lambda)?;
    kernel.check_strip(mu)?;
    let scale = 1.0 + lambda.norm().max(mu.norm());
    if (lambda - mu).norm() <= 1e-12 * scale {
        let mid = (lambda + mu) * 0.5;
        let phi = kernel.phi(mid);
        if !phi.is_finite() {
            return Err(GskError::Domain(format!("kernel evaluated at a pole: {mid}")));
        }
        return Ok(phi * (Complex64::new(x, 0.0) - Complex64::new(0.0, 1.0) * kernel.g_prime(mid))
            / (2.0 * PI));
    }
    let (pl, pm) = (kernel.phi(lambda), kernel.phi(mu));
    if !pl.is_finite() || !pm.is_finite() {
        return Err(GskError::Domain(format!(
            "kernel evaluated at a pole: ({lambda}, {mu})"
        )));
    }
    let half_diff = (Complex64::new(0.0, x) * (lambda - mu) + kernel.g(lambda) - kernel.g(mu)) * 0.5;
    let bracket = 2.0 * half_diff.sinh();
    Ok(pl.sqrt() * pm.sqrt() * bracket / (Complex64::new(0.0, 2.0 * PI) * (lambda - mu)))
}

/// Finite-temperature impenetrable-boson kernel:
/// `φ(λ) = (e^β − 1)/(e^{(λ²−h)/T} + 1)`, `g ≡ 0`.
///
/// Poles of `F` sit at `λ² = h + iπT(2j+1)`; six levels are retained per
/// square-root branch, which bounds the usable strip.
pub fn boson_kernel(h: f64, t: f64, beta: Complex64) -> Result<GskKernel> {
    if !(t > 0.0) {
        return Err(GskError::Config(format!("temperature T = {t} must be > 0")));
    }
    if !h.is_finite() || !beta.is_finite() {
        return Err(GskError::Config("boson parameters must be finite".into()));
    }
    let coeff = beta.exp() - 1.0;
    let phi = move |z: Complex64| boson_phi(z, h, t, coeff);
    let phi_prime = move |z: Complex64| boson_phi_prime(z, h, t, coeff);

    const POLE_LEVELS: usize = 6;
    let mut poles_plus = Vec::new();
    let mut poles_minus = Vec::new();
    for j in 0..POLE_LEVELS {
        let up = Complex64::new(h, PI * t * (2 * j + 1) as f64).sqrt();
        let dn = Complex64::new(h, -(PI * t * (2 * j + 1) as f64)).sqrt();
        poles_plus.push(up);
        poles_plus.push(-dn);
        poles_minus.push(dn);
        poles_minus.push(-up);
    }
    sort_by_height(&mut poles_plus);
    sort_by_height(&mut poles_minus);
    let a = Complex64::new(h, PI * t * (2 * POLE_LEVELS + 1) as f64).sqrt().im;

    let kernel = GskKernel {
        label: format!("boson(h={h}, T={t}, beta={beta})"),
        a,
        phi: Box::new(phi),
        phi_prime: Box::new(phi_prime),
        g: Box::new(|_| Complex64::new(0.0, 0.0)),
        g_prime: Box::new(|_| Complex64::new(0.0, 0.0)),
        poles_plus,
        poles_minus,
        closed_form: Some(ClosedForm::Boson { h, t, beta }),
    };
    kernel.validate()?;
    Ok(kernel)
}

fn boson_phi(z: Complex64, h: f64, t: f64, coeff: Complex64) -> Complex64 {
    let arg = (z * z - h) / t;
    if arg.re >= 0.0 {
        // Use e^{-arg} so the exponential never overflows.
        let w = (-arg).exp();
        coeff * w / (w + 1.0)
    } else {
        coeff / (arg.exp() + 1.0)
    }
}

fn boson_phi_prime(z: Complex64, h: f64, t: f64, coeff: Complex64) -> Complex64 {
    let arg = (z * z - h) / t;
    let scale = -coeff * 2.0 * z / t;
    if arg.re >= 0.0 {
        let w = (-arg).exp();
        let denom = w + 1.0;
        scale * w / (denom * denom)
    } else {
        let e = arg.exp();
        let denom = e + 1.0;
        scale * e / (denom * denom)
    }
}

/// Spin-chain normalization kernel: `φ(λ) = sinh[λ(π/2−ζ)] / sinh[λπ/2]`
/// (the coupling is already absorbed), `g ≡ 0`, poles at `λ = 2ik`.
pub fn xxz_kernel(zeta: f64) -> Result<GskKernel> {
    if !(zeta > 0.0 && zeta < PI) {
        return Err(GskError::Domain(format!(
            "zeta = {zeta} outside the open interval (0, pi)"
        )));
    }
    let phi = move |z: Complex64| xxz_phi(z, zeta);
    let phi_prime = move |z: Complex64| xxz_phi_prime(z, zeta);

    const POLE_COUNT: usize = 12;
    let poles_plus: Vec<Complex64> = (1..=POLE_COUNT)
        .map(|k| Complex64::new(0.0, 2.0 * k as f64))
        .collect();
    let poles_minus: Vec<Complex64> = poles_plus.iter().map(|p| p.conj()).collect();
    let a = 2.0 * (POLE_COUNT + 1) as f64;

    let kernel = GskKernel {
        label: format!("xxz(zeta={zeta})"),
        a,
        phi: Box::new(phi),
        phi_prime: Box::new(phi_prime),
        g: Box::new(|_| Complex64::new(0.0, 0.0)),
        g_prime: Box::new(|_| Complex64::new(0.0, 0.0)),
        poles_plus,
        poles_minus,
        closed_form: Some(ClosedForm::Xxz { zeta }),
    };
    kernel.validate()?;
    Ok(kernel)
}

fn xxz_phi(z: Complex64, zeta: f64) -> Complex64 {
    let s = PI / 2.0 - zeta;
    let p = PI / 2.0;
    if z.norm() < 1e-6 {
        // sinh(sz)/sinh(pz) = (s/p)(1 + (s²−p²)z²/6 + O(z⁴))
        let ratio = s / p;
        return ratio * (1.0 + (s * s - p * p) * z * z / 6.0);
    }
    (z * s).sinh() / (z * p).sinh()
}

fn xxz_phi_prime(z: Complex64, zeta: f64) -> Complex64 {
    let s = PI / 2.0 - zeta;
    let p = PI / 2.0;
    if z.norm() < 1e-4 {
        // Even function: φ'(z) ≈ 2 c₂ z with c₂ = (s/p)(s²−p²)/6.
        return (s / p) * (s * s - p * p) / 3.0 * z;
    }
    let sh_p = (z * p).sinh();
    ((z * s).cosh() * s * sh_p - (z * s).sinh() * p * (z * p).cosh()) / (sh_p * sh_p)
}

/// Pole-free control kernel `φ(λ) = γ·e^{−(λ/width)²}`. With no poles there
/// are no zeros to retain and the correction determinant is 1.
pub fn entire_test_kernel(gamma: Complex64, width: f64) -> Result<GskKernel> {
    if gamma.norm() >= 1.0 {
        return Err(GskError::Admissibility {
            max_abs: gamma.norm(),
            at: 0.0,
        });
    }
    if !(width > 0.0) {
        return Err(GskError::Config(format!("width = {width} must be > 0")));
    }
    let inv_w2 = 1.0 / (width * width);
    let phi = move |z: Complex64| gamma * (-(z * z) * inv_w2).exp();
    let phi_prime = move |z: Complex64| gamma * (-(z * z) * inv_w2).exp() * (-2.0 * z * inv_w2);
    let kernel = GskKernel {
        label: format!("entire_test(gamma={gamma}, width={width})"),
        a: 8.0 * width,
        phi: Box::new(phi),
        phi_prime: Box::new(phi_prime),
        g: Box::new(|_| Complex64::new(0.0, 0.0)),
        g_prime: Box::new(|_| Complex64::new(0.0, 0.0)),
        poles_plus: Vec::new(),
        poles_minus: Vec::new(),
        closed_form: None,
    };
    kernel.validate()?;
    Ok(kernel)
}

fn sort_by_height(points: &mut [Complex64]) {
    points.sort_by(|a, b| {
        (a.im.abs(), a.re)
            .partial_cmp(&(b.im.abs(), b.re))
            .unwrap()
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn default_boson() -> GskKernel {
        boson_kernel(1.0, 1.0, Complex64::new(0.5, 0.0)).unwrap()
    }

    #[test]
    fn e_pm_trivial_values() {
        let k = default_boson();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(e_pm(&k, 3.0, Complex64::new(0.0, 0.0), Sign::Plus).unwrap(), one);
        assert_eq!(e_pm(&k, 3.0, Complex64::new(0.0, 0.0), Sign::Minus).unwrap(), one);
        // g ≡ 0, x = 2, λ = π: e₊ = e^{iπ} = −1.
        let v = e_pm(&k, 2.0, Complex64::new(PI, 0.0), Sign::Plus).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn e_pm_product_is_one_at_random_strip_points() {
        let k = default_boson();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let z = Complex64::new(
                6.0 * (rng.gen::<f64>() - 0.5),
                0.8 * k.strip_half_width() * (rng.gen::<f64>() - 0.5),
            );
            let p = e_pm(&k, 5.0, z, Sign::Plus).unwrap();
            let m = e_pm(&k, 5.0, z, Sign::Minus).unwrap();
            assert!((p * m - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn e_pm_outside_strip_is_domain_error() {
        let k = default_boson();
        let z = Complex64::new(0.0, k.strip_half_width() + 1.0);
        assert!(matches!(e_pm(&k, 1.0, z, Sign::Plus), Err(GskError::Domain(_))));
    }

    #[test]
    fn diagonal_limit_matches_flat_phase_formula() {
        // g ≡ 0 so γV(λ,λ) = x·φ(λ)/(2π).
        let k = default_boson();
        let x = 4.0;
        for &l in &[0.0, 0.7, -1.3] {
            let z = Complex64::new(l, 0.0);
            let v = kernel_value(&k, x, z, z).unwrap();
            let expected = k.phi(z) * x / (2.0 * PI);
            assert!((v - expected).norm() < 1e-14 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn constant_phi_reduces_to_sine_kernel() {
        // A very wide entire kernel is locally constant near the origin.
        let gamma = Complex64::new(0.35, 0.0);
        let k = entire_test_kernel(gamma, 4000.0).unwrap();
        let x = 3.0;
        for &(l, m) in &[(0.4, -0.2), (1.1, 0.9), (-0.8, 0.3)] {
            let v = kernel_value(&k, x, Complex64::new(l, 0.0), Complex64::new(m, 0.0)).unwrap();
            let expected = gamma.re * (x * (l - m) / 2.0).sin() / (PI * (l - m));
            assert!(
                (v - expected).norm() < 1e-8 * (1.0 + expected.abs()),
                "({l},{m}): {v} vs {expected}"
            );
        }
    }

    #[test]
    fn kernel_point_carries_symmetric_finite_value() {
        let k = default_boson();
        let l = Complex64::new(0.8, 0.2);
        let m = Complex64::new(-0.4, -0.1);
        let p = KernelPoint::evaluate(&k, 5.0, l, m).unwrap();
        let q = KernelPoint::evaluate(&k, 5.0, m, l).unwrap();
        assert!(p.value.is_finite());
        assert!((p.value - q.value).norm() < 1e-14 * (1.0 + p.value.norm()));
        // Evaluation at a pole of the symbol is rejected.
        let pole = k.poles_plus()[0];
        assert!(KernelPoint::evaluate(&k, 5.0, pole, m).is_err());
    }

    #[test]
    fn kernel_value_symmetric_in_arguments() {
        let k = default_boson();
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let l = Complex64::new(8.0 * (rng.gen::<f64>() - 0.5), 0.4 * (rng.gen::<f64>() - 0.5));
            let m = Complex64::new(8.0 * (rng.gen::<f64>() - 0.5), 0.4 * (rng.gen::<f64>() - 0.5));
            let a = kernel_value(&k, 6.0, l, m).unwrap();
            let b = kernel_value(&k, 6.0, m, l).unwrap();
            assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn diagonal_limit_is_first_order_in_separation() {
        let k = default_boson();
        let z = Complex64::new(0.6, 0.0);
        let diag = kernel_value(&k, 5.0, z, z).unwrap();
        let mut prev_err = f64::INFINITY;
        for &eps in &[1e-3, 1e-4, 1e-5] {
            let v = kernel_value(&k, 5.0, z, z + eps).unwrap();
            let err = (v - diag).norm();
            assert!(err < prev_err);
            assert!(err < 10.0 * eps, "eps {eps}: err {err}");
            prev_err = err;
        }
    }

    #[test]
    fn boson_phi_reference_values() {
        let k = default_boson();
        // φ(√h) = (e^β − 1)/2.
        let v = k.phi(Complex64::new(1.0, 0.0));
        let expected = (0.5f64.exp() - 1.0) / 2.0;
        assert_relative_eq!(v.re, expected, epsilon = 1e-14);
        assert!(v.im.abs() < 1e-15);
        // β = 0 gives φ ≡ 0 (identity operator).
        let k0 = boson_kernel(1.0, 1.0, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(k0.phi(Complex64::new(0.3, 0.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn boson_first_pole_is_principal_sqrt() {
        let k = default_boson();
        let expected = Complex64::new(1.0, PI).sqrt();
        let closest = k
            .poles_plus()
            .iter()
            .cloned()
            .min_by(|a, b| (a - expected).norm().partial_cmp(&(b - expected).norm()).unwrap())
            .unwrap();
        assert!((closest - expected).norm() < 1e-14);
        assert!(expected.im > 0.0);
    }

    #[test]
    fn boson_phi_decays_and_never_overflows() {
        let k = default_boson();
        for &x in &[10.0, 50.0, 500.0] {
            let v = k.phi(Complex64::new(x, 0.0));
            assert!(v.is_finite());
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn boson_admissibility_violation_reports_maximizer() {
        // Large β makes sup|φ| = (e^β−1)/(e^{−h/T}+1) exceed 1 at λ = 0.
        let err = boson_kernel(1.0, 1.0, Complex64::new(1.2, 0.0)).unwrap_err();
        match err {
            GskError::Admissibility { max_abs, at } => {
                assert!(max_abs >= 1.0);
                assert!(at.abs() < 0.05, "maximizer at {at}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn xxz_value_at_zero_by_continuity() {
        for &zeta in &[0.4, 1.1, 2.0, 2.9] {
            let k = xxz_kernel(zeta).unwrap();
            let v = k.phi(Complex64::new(0.0, 0.0));
            assert_relative_eq!(v.re, 1.0 - 2.0 * zeta / PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn xxz_at_half_pi_vanishes_identically() {
        let k = xxz_kernel(PI / 2.0).unwrap();
        for &x in &[0.0, 0.5, 2.0, -3.0] {
            assert!(k.phi(Complex64::new(x, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn xxz_nearest_poles_at_two_i() {
        let k = xxz_kernel(1.1).unwrap();
        let nearest = k
            .poles_plus()
            .iter()
            .map(|p| p.im)
            .fold(f64::INFINITY, f64::min);
        // Any pole-free evaluation strip must stay below |Im λ| = 2.
        assert_relative_eq!(nearest, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn xxz_domain_endpoints_rejected() {
        assert!(xxz_kernel(0.0).is_err());
        assert!(xxz_kernel(PI).is_err());
    }

    #[test]
    fn xxz_phi_real_and_admissible_on_grid() {
        for &zeta in &[0.5, 1.0, 1.6, 2.5] {
            let k = xxz_kernel(zeta).unwrap();
            for i in 0..200 {
                let x = -20.0 + 40.0 * (i as f64) / 199.0;
                let v = k.phi(Complex64::new(x, 0.0));
                assert!(v.im.abs() < 1e-13);
                assert!(v.norm() < 1.0);
            }
        }
    }

    #[test]
    fn entire_kernel_has_no_poles_and_gaussian_tail() {
        let k = entire_test_kernel(Complex64::new(0.5, 0.0), 1.0).unwrap();
        assert!(k.poles_plus().is_empty() && k.poles_minus().is_empty());
        assert_eq!(k.phi(Complex64::new(0.0, 0.0)), Complex64::new(0.5, 0.0));
        assert!(k.phi(Complex64::new(6.0, 0.0)).norm() < 1e-15);
        assert!(entire_test_kernel(Complex64::new(1.0, 0.0), 1.0).is_err());
    }
}

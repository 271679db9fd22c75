//! Scalar Riemann–Hilbert data of the kernel: the logarithmic density
//! `ν(λ) = −log(1+φ(λ))/(2πi)` with the branch fixed by `ν(+∞) = 0`, the
//! Cauchy transform `α(z) = exp(∫ ν(μ)/(μ−z) dμ)` off the axis, its boundary
//! values `α±` on the axis (Sokhotski–Plemelj), and the first moment `α₁`.
//!
//! The boundary ratio factorizes the kernel data, `α₋/α₊ = 1 + φ` on ℝ, and
//! `α(z) = 1 + α₁/z + O(z⁻²)` at infinity with `α₁ = −∫ν`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::kernels::{GskKernel, Sign};
use crate::quadrature::{pv_line_integral, regularized_double_integral, QuadratureRule};
use crate::{GskError, Result};

/// Fraction of the strip half-width below which [`CauchyData::alpha_at`]
/// refuses to evaluate; callers must use the boundary values there.
pub const AXIS_PROXIMITY_FACTOR: f64 = 1e-3;

/// Sampled Riemann–Hilbert data on a quadrature grid. Immutable after
/// construction; all evaluators are pure.
pub struct CauchyData {
    kernel: Arc<GskKernel>,
    rule: QuadratureRule,
    nu_samples: Vec<Complex64>,
    nu_prime_samples: Vec<Complex64>,
    /// Per-node 2πi-winding corrections from unwrapping log(1+φ) right to
    /// left. All zero for admissible kernels; kept as a guard.
    winding: Vec<i32>,
    alpha1: Complex64,
    /// x-independent pieces of the exponent functional: ∫ g'ν and the
    /// regularized double integral.
    integral_gprime_nu: Complex64,
    double_integral: Complex64,
}

impl CauchyData {
    /// Sample ν and ν' on the rule, unwrap the branch from the right end,
    /// and precompute the moment `α₁` and the x-independent integrals of the
    /// exponent functional.
    pub fn build(kernel: Arc<GskKernel>, rule: QuadratureRule, tail_tol: f64) -> Result<Self> {
        let n = rule.len();
        let mut raw_log = Vec::with_capacity(n);
        for &x in rule.nodes() {
            let z = Complex64::new(x, 0.0);
            let w = Complex64::new(1.0, 0.0) + kernel.phi(z);
            if w.norm() < 1e-14 {
                return Err(GskError::LogSingularity { at: z });
            }
            raw_log.push(w.ln());
        }
        // ν(+∞) = 0: walk from the right end and add 2πi corrections when
        // the phase jumps by more than π between neighbours.
        let mut winding = vec![0i32; n];
        for i in (0..n.saturating_sub(1)).rev() {
            let prev = raw_log[i + 1].im + 2.0 * PI * winding[i + 1] as f64;
            let mut k = winding[i + 1];
            let mut cur = raw_log[i].im + 2.0 * PI * k as f64;
            while cur - prev > PI {
                k -= 1;
                cur -= 2.0 * PI;
            }
            while prev - cur > PI {
                k += 1;
                cur += 2.0 * PI;
            }
            winding[i] = k;
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let nu_samples: Vec<Complex64> = raw_log
            .iter()
            .zip(&winding)
            .map(|(l, &k)| -(l + Complex64::new(0.0, 2.0 * PI * k as f64)) / two_pi_i)
            .collect();

        let (lo, hi) = rule.domain();
        for endpoint in [lo, hi] {
            let v = nu_on_axis(&kernel, endpoint)?.norm();
            if v > tail_tol {
                return Err(GskError::TailTooLarge {
                    quantity: "nu",
                    endpoint,
                    value: v,
                    tol: tail_tol,
                });
            }
        }

        let nu_prime_samples: Vec<Complex64> = rule
            .nodes()
            .iter()
            .map(|&x| nu_prime_on_axis(&kernel, x))
            .collect::<Result<_>>()?;

        let alpha1 = -rule.integrate_samples(&nu_samples);
        let gp: Vec<Complex64> = rule
            .nodes()
            .iter()
            .zip(&nu_samples)
            .map(|(&x, &nv)| kernel.g_prime(Complex64::new(x, 0.0)) * nv)
            .collect();
        let integral_gprime_nu = rule.integrate_samples(&gp);

        let k1 = kernel.clone();
        let k2 = kernel.clone();
        let double_integral = regularized_double_integral(
            move |x| nu_on_axis(&k1, x).expect("nu finite on grid"),
            move |x| nu_prime_on_axis(&k2, x).expect("nu' finite on grid"),
            &rule,
            tail_tol,
        )?;

        Ok(CauchyData {
            kernel,
            rule,
            nu_samples,
            nu_prime_samples,
            winding,
            alpha1,
            integral_gprime_nu,
            double_integral,
        })
    }

    pub fn kernel(&self) -> &Arc<GskKernel> {
        &self.kernel
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nu_samples(&self) -> &[Complex64] {
        &self.nu_samples
    }

    pub fn nu_prime_samples(&self) -> &[Complex64] {
        &self.nu_prime_samples
    }

    /// First moment of the transform: `α₁ = −∫ ν`.
    pub fn alpha1(&self) -> Complex64 {
        self.alpha1
    }

    /// `∫ g'(λ)ν(λ) dλ` (x-independent part of the exponent functional).
    pub fn integral_gprime_nu(&self) -> Complex64 {
        self.integral_gprime_nu
    }

    /// Regularized `∬ ν(λ)ν(μ)/(λ−μ−i0)² dλ dμ`.
    pub fn double_integral(&self) -> Complex64 {
        self.double_integral
    }

    /// ν at an arbitrary point of the strip, continued from the nearest grid
    /// node (the winding correction is zero for admissible kernels).
    pub fn nu(&self, z: Complex64) -> Result<Complex64> {
        let w = Complex64::new(1.0, 0.0) + self.kernel.phi(z);
        if w.norm() < 1e-14 {
            return Err(GskError::LogSingularity { at: z });
        }
        let k = self.winding_near(z.re);
        Ok(-(w.ln() + Complex64::new(0.0, 2.0 * PI * k as f64)) / Complex64::new(0.0, 2.0 * PI))
    }

    /// `ν'(λ) = −φ'(λ) / (2πi (1+φ(λ)))`.
    pub fn nu_prime(&self, z: Complex64) -> Result<Complex64> {
        let w = Complex64::new(1.0, 0.0) + self.kernel.phi(z);
        if w.norm() < 1e-14 {
            return Err(GskError::LogSingularity { at: z });
        }
        Ok(-self.kernel.phi_prime(z) / (Complex64::new(0.0, 2.0 * PI) * w))
    }

    fn winding_near(&self, x: f64) -> i32 {
        if self.winding.is_empty() {
            return 0;
        }
        let nodes = self.rule.nodes();
        match nodes.binary_search_by(|n| n.partial_cmp(&x).unwrap()) {
            Ok(i) => self.winding[i],
            Err(i) => {
                if i == 0 {
                    self.winding[0]
                } else if i >= nodes.len() {
                    self.winding[nodes.len() - 1]
                } else if (x - nodes[i - 1]).abs() <= (nodes[i] - x).abs() {
                    self.winding[i - 1]
                } else {
                    self.winding[i]
                }
            }
        }
    }

    /// Cauchy transform `α(z) = exp(∫ ν(μ)/(μ−z) dμ)` strictly off the axis.
    ///
    /// For `Im z > 0` this is the analytic continuation of `α₊`, for
    /// `Im z < 0` of `α₋`. Points closer to the axis than
    /// `AXIS_PROXIMITY_FACTOR · a` are refused: use [`CauchyData::alpha_pm`].
    pub fn alpha_at(&self, z: Complex64) -> Result<Complex64> {
        let threshold = AXIS_PROXIMITY_FACTOR * self.kernel.strip_half_width();
        if z.im.abs() < threshold {
            return Err(GskError::Domain(format!(
                "alpha_at({z}) too close to the axis (|Im| < {threshold:.2e}); use alpha_pm"
            )));
        }
        let (lo, hi) = self.rule.domain();
        let mut acc = Complex64::new(0.0, 0.0);
        if z.re > lo && z.re < hi {
            // Subtract ν(Re z) so the integrand stays bounded when z sits
            // close to the axis; ∫ dμ/(μ−z) over [lo,hi] is a principal log
            // difference (the path never crosses the cut since Im(μ−z) has
            // one sign).
            let nu0 = self.nu(Complex64::new(z.re, 0.0))?;
            for ((&x, &w), &nv) in self
                .rule
                .nodes()
                .iter()
                .zip(self.rule.weights())
                .zip(&self.nu_samples)
            {
                acc += (nv - nu0) * w / (x - z);
            }
            acc += nu0 * ((Complex64::new(hi, 0.0) - z).ln() - (Complex64::new(lo, 0.0) - z).ln());
        } else {
            for ((&x, &w), &nv) in self
                .rule
                .nodes()
                .iter()
                .zip(self.rule.weights())
                .zip(&self.nu_samples)
            {
                acc += nv * w / (x - z);
            }
        }
        Ok(acc.exp())
    }

    /// Boundary values `α±(λ) = exp(PV∫ ν(μ)/(μ−λ) dμ ± iπ ν(λ))` for real λ.
    pub fn alpha_pm(&self, lambda: f64, side: Sign) -> Result<Complex64> {
        let (pv, nu_l) = self.boundary_exponent(lambda)?;
        Ok((pv + Complex64::new(0.0, side.signum() * PI) * nu_l).exp())
    }

    /// Both boundary values at once (they share one PV integral).
    pub fn alpha_pm_pair(&self, lambda: f64) -> Result<(Complex64, Complex64)> {
        let (pv, nu_l) = self.boundary_exponent(lambda)?;
        let rot = Complex64::new(0.0, PI) * nu_l;
        Ok(((pv + rot).exp(), (pv - rot).exp()))
    }

    fn boundary_exponent(&self, lambda: f64) -> Result<(Complex64, Complex64)> {
        let pv = pv_line_integral(
            |mu| {
                self.nu(Complex64::new(mu, 0.0))
                    .expect("nu finite inside the domain")
            },
            lambda,
            &self.rule,
        )?;
        let nu_l = self.nu(Complex64::new(lambda, 0.0))?;
        Ok((pv, nu_l))
    }

    /// `d/dλ log α±(λ) = PV∫ ν'(μ)/(μ−λ) dμ ± iπ ν'(λ)`, valid because ν
    /// vanishes at the cutoff (integration by parts drops the boundary term).
    pub fn log_alpha_pm_derivative(&self, lambda: f64, side: Sign) -> Result<Complex64> {
        let pv = pv_line_integral(
            |mu| {
                self.nu_prime(Complex64::new(mu, 0.0))
                    .expect("nu' finite inside the domain")
            },
            lambda,
            &self.rule,
        )?;
        let npl = self.nu_prime(Complex64::new(lambda, 0.0))?;
        Ok(pv + Complex64::new(0.0, side.signum() * PI) * npl)
    }
}

/// ν on the real axis straight from the kernel (principal branch; the
/// admissibility bound keeps `1+φ` in the right half-plane).
pub fn nu_on_axis(kernel: &GskKernel, x: f64) -> Result<Complex64> {
    let w = Complex64::new(1.0, 0.0) + kernel.phi(Complex64::new(x, 0.0));
    if w.norm() < 1e-14 {
        return Err(GskError::LogSingularity {
            at: Complex64::new(x, 0.0),
        });
    }
    Ok(-w.ln() / Complex64::new(0.0, 2.0 * PI))
}

/// ν' on the real axis.
pub fn nu_prime_on_axis(kernel: &GskKernel, x: f64) -> Result<Complex64> {
    let z = Complex64::new(x, 0.0);
    let w = Complex64::new(1.0, 0.0) + kernel.phi(z);
    if w.norm() < 1e-14 {
        return Err(GskError::LogSingularity { at: z });
    }
    Ok(-kernel.phi_prime(z) / (Complex64::new(0.0, 2.0 * PI) * w))
}

/// Closed-form boundary value `α₋` of the spin-chain kernel in terms of
/// gamma functions; analytic continuation off the axis is obtained by
/// evaluating at complex λ. `α₊⁻¹(λ) = α₋(−λ)`.
pub fn xxz_alpha_minus_closed_form(zeta: f64, lambda: Complex64) -> Complex64 {
    use crate::special::gamma;
    let il = Complex64::new(0.0, 1.0) * lambda;
    let prefactor = (2.0 * (PI - zeta)).sqrt();
    let p1 = Complex64::new(PI / zeta, 0.0).powc(-il * zeta / (2.0 * PI));
    let p2 = Complex64::new(PI / (PI - zeta), 0.0).powc(-il * (PI - zeta) / (2.0 * PI));
    let g_num = gamma(Complex64::new(1.0, 0.0) + il / 2.0);
    let g_d1 = gamma(Complex64::new(0.5, 0.0) + il * zeta / (2.0 * PI));
    let g_d2 = gamma(Complex64::new(1.0, 0.0) + il * (PI - zeta) / (2.0 * PI));
    prefactor * p1 * p2 * g_num / (g_d1 * g_d2)
}

//! Zeros `q±` of `1 + φ(λ)` inside the strip: closed-form series for the
//! built-in kernels, Newton polishing for generic kernels, and the remainder
//! scale `a` that governs the `O(e^{−ax})` error after truncating the
//! retained set.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::kernels::{ClosedForm, GskKernel};
use crate::{GskError, Result};

/// Default residual bound `|1+φ(q)|` for accepted roots.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

/// Roots retained per half-plane, sorted by distance from the axis, plus the
/// generating series (kept for the remainder scale).
#[derive(Debug, Clone, Default)]
pub struct RootSet {
    pub q_plus: Vec<Complex64>,
    pub q_minus: Vec<Complex64>,
    pub residual_tol: f64,
    /// Index of the nearest retained pole for each root (diagnostic; a
    /// bijection for pole-seeded Newton sets).
    pub pairing_plus: Vec<usize>,
    pub pairing_minus: Vec<usize>,
    /// Root series by family and level, available for closed-form kernels.
    pub series_plus: Vec<Vec<Complex64>>,
    pub series_minus: Vec<Vec<Complex64>>,
    pub warnings: Vec<String>,
}

impl RootSet {
    pub fn n_plus(&self) -> usize {
        self.q_plus.len()
    }

    pub fn n_minus(&self) -> usize {
        self.q_minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_plus.is_empty() && self.q_minus.is_empty()
    }

    pub fn empty() -> Self {
        RootSet {
            residual_tol: DEFAULT_ROOT_TOL,
            ..Default::default()
        }
    }

    /// Half-plane membership, strip membership, pairwise separation and
    /// residual bound.
    pub fn validate(&self, kernel: &GskKernel) -> Result<()> {
        let a = kernel.strip_half_width();
        for &q in &self.q_plus {
            if !(q.im > 0.0 && q.im < a) {
                return Err(GskError::RootFailure(format!(
                    "upper root {q} outside the open upper strip (a = {a})"
                )));
            }
        }
        for &q in &self.q_minus {
            if !(q.im < 0.0 && q.im > -a) {
                return Err(GskError::RootFailure(format!(
                    "lower root {q} outside the open lower strip (a = {a})"
                )));
            }
        }
        let all: Vec<Complex64> = self.q_plus.iter().chain(&self.q_minus).cloned().collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if (all[i] - all[j]).norm() < 1e-8 {
                    return Err(GskError::RootFailure(format!(
                        "roots {} and {} closer than 1e-8",
                        all[i], all[j]
                    )));
                }
            }
        }
        for &q in &all {
            let r = (Complex64::new(1.0, 0.0) + kernel.phi(q)).norm();
            if r > self.residual_tol {
                return Err(GskError::RootFailure(format!(
                    "residual |1+phi({q})| = {r:.3e} exceeds {:.3e}",
                    self.residual_tol
                )));
            }
        }
        Ok(())
    }
}

/// One non-converged Newton seed.
#[derive(Debug, Clone)]
pub struct RootFailure {
    pub seed: Complex64,
    pub last: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub reason: String,
}

/// Converged roots plus the per-seed failure records.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub roots: RootSet,
    pub failures: Vec<RootFailure>,
}

/// Closed-form zeros for the built-in families, truncated to `n` roots per
/// half-plane (those of smallest |Im|).
///
/// Boson: `q² = h + βT + iπT(2j+1)` — series 1 is the principal square
/// root, series 2 its negated mirror. Spin chain: `q⁺_{j,1} = 2πi(j+1)/(π−ζ)`
/// and `q⁺_{j,2} = iπ(2j+1)/ζ`, lower roots conjugate; when `π/ζ` is
/// rational, entries with `sinh(πq/2) = 0` are cancelled by a pole of `φ`
/// and are omitted, and exact collisions between the two series are kept
/// once (with a warning: such merged zeros are double and unusable for the
/// residue data).
pub fn closed_form_roots(kernel: &GskKernel, n: usize, residual_tol: f64) -> Result<RootSet> {
    let Some(cf) = kernel.closed_form() else {
        return Err(GskError::RootFailure(
            "kernel provides no closed-form root generator".into(),
        ));
    };
    let levels = n + 2;
    let mut warnings = Vec::new();
    let (series_plus, series_minus) = match *cf {
        ClosedForm::Boson { h, t, beta } => {
            if (beta.exp() - 1.0).norm() < 1e-14 {
                return Err(GskError::RootFailure(
                    "beta = 0 gives phi identically zero; 1+phi never vanishes".into(),
                ));
            }
            let shift = h + beta * t;
            let mut s1 = Vec::new();
            let mut s2 = Vec::new();
            let mut m1 = Vec::new();
            let mut m2 = Vec::new();
            for j in 0..levels {
                let odd = (2 * j + 1) as f64;
                let up = (shift + Complex64::new(0.0, PI * t * odd)).sqrt();
                let dn = (shift + Complex64::new(0.0, -PI * t * odd)).sqrt();
                s1.push(up);
                s2.push(-dn);
                m1.push(dn);
                m2.push(-up);
            }
            (vec![s1, s2], vec![m1, m2])
        }
        ClosedForm::Xxz { zeta } => {
            let gen = |sign: f64| {
                let mut s1 = Vec::new();
                let mut s2 = Vec::new();
                for j in 0..levels + 2 {
                    s1.push(Complex64::new(0.0, sign * 2.0 * PI * (j + 1) as f64 / (PI - zeta)));
                    s2.push(Complex64::new(0.0, sign * PI * (2 * j + 1) as f64 / zeta));
                }
                (s1, s2)
            };
            let (p1, p2) = gen(1.0);
            let (m1, m2) = gen(-1.0);
            let omit = |series: Vec<Complex64>, warnings: &mut Vec<String>| {
                series
                    .into_iter()
                    .filter(|&q| {
                        let keep = (q * PI / 2.0).sinh().norm() > 1e-10;
                        if !keep {
                            warnings.push(format!(
                                "omitted formula zero {q}: cancelled by a pole (sinh(pi q/2) = 0)"
                            ));
                        }
                        keep
                    })
                    .take(levels)
                    .collect::<Vec<_>>()
            };
            let sp = vec![omit(p1, &mut warnings), omit(p2, &mut warnings)];
            let sm = vec![omit(m1, &mut warnings), omit(m2, &mut warnings)];
            (sp, sm)
        }
    };

    // Pool the series, drop exact duplicates across series, retain the n
    // roots closest to the axis.
    let retain = |series: &[Vec<Complex64>], warnings: &mut Vec<String>| {
        let mut pool: Vec<Complex64> = Vec::new();
        for s in series {
            for &q in s {
                if let Some(&dup) = pool.iter().find(|&&p| (p - q).norm() < 1e-8) {
                    warnings.push(format!(
                        "series collision at {dup}: merged zero kept once (double zero; residue data degenerate)"
                    ));
                } else {
                    pool.push(q);
                }
            }
        }
        pool.sort_by(|a, b| {
            (a.im.abs(), a.re)
                .partial_cmp(&(b.im.abs(), b.re))
                .unwrap()
        });
        pool
    };
    let pool_plus = retain(&series_plus, &mut warnings);
    let pool_minus = retain(&series_minus, &mut warnings);

    let a = kernel.strip_half_width();
    let take = |pool: &[Complex64], warnings: &mut Vec<String>, side: &str| {
        let kept: Vec<Complex64> = pool
            .iter()
            .cloned()
            .filter(|q| q.im.abs() < a)
            .take(n)
            .collect();
        if kept.len() < n {
            warnings.push(format!(
                "requested {n} {side} roots but only {} lie inside the strip; truncated",
                kept.len()
            ));
        }
        kept
    };
    let q_plus = take(&pool_plus, &mut warnings, "upper");
    let q_minus = take(&pool_minus, &mut warnings, "lower");

    let pairing_plus = pair_to_poles(&q_plus, kernel.poles_plus());
    let pairing_minus = pair_to_poles(&q_minus, kernel.poles_minus());

    let set = RootSet {
        q_plus,
        q_minus,
        residual_tol: residual_tol.max(f64::MIN_POSITIVE),
        pairing_plus,
        pairing_minus,
        series_plus,
        series_minus,
        warnings,
    };
    set.validate(kernel)?;
    Ok(set)
}

fn pair_to_poles(roots: &[Complex64], poles: &[Complex64]) -> Vec<usize> {
    roots
        .iter()
        .map(|&q| {
            poles
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| (q - *a).norm().partial_cmp(&(q - *b).norm()).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(usize::MAX)
        })
        .collect()
}

/// Seeds for [`newton_roots`]: each retained pole `R` nudged into the strip
/// interior by the local residue estimate. For small coupling the zero of
/// `1+φ` solves `c/(λ−R) ≈ −1` with `c` the residue of `φ` at `R`, so
/// `R − c` lands inside its basin of attraction (plain Newton started *at*
/// a pole moves away from it).
pub fn pole_seeds(kernel: &GskKernel) -> Vec<Complex64> {
    let mut seeds = Vec::new();
    for &pole in kernel.poles_plus().iter().chain(kernel.poles_minus()) {
        let r = 1e-3 * (1.0 + pole.norm());
        let mut residue = Complex64::new(0.0, 0.0);
        for angle in [0.0, PI / 2.0, PI, 1.5 * PI] {
            let probe = pole + Complex64::from_polar(r, angle);
            let v = kernel.phi(probe);
            if v.is_finite() && v.norm() > 1.0 {
                residue = v * (probe - pole);
                break;
            }
        }
        seeds.push(pole - residue);
    }
    seeds
}

/// Newton iteration on `1+φ` from the given seeds (typically
/// [`pole_seeds`]). Non-convergent, strip-escaping and axis-landing seeds
/// become failure records rather than silent drops; slow convergence
/// (quadratic convergence lost) is recorded as a warning since it indicates
/// a near-multiple zero.
pub fn newton_roots(kernel: &GskKernel, seeds: &[Complex64], tol: f64) -> NewtonOutcome {
    let mut roots = Vec::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    let a = kernel.strip_half_width();

    'seed: for &seed in seeds {
        let mut z = seed;
        for iter in 0..100 {
            let f = Complex64::new(1.0, 0.0) + kernel.phi(z);
            let df = kernel.phi_prime(z);
            if df.norm() < 1e-300 {
                failures.push(RootFailure {
                    seed,
                    last: z,
                    residual: f.norm(),
                    iterations: iter,
                    reason: "phi' vanished during iteration".into(),
                });
                continue 'seed;
            }
            let step = f / df;
            z -= step;
            if z.im.abs() >= a {
                failures.push(RootFailure {
                    seed,
                    last: z,
                    residual: f.norm(),
                    iterations: iter,
                    reason: "escaped the strip".into(),
                });
                continue 'seed;
            }
            if step.norm() <= 1e-13 * (1.0 + z.norm()) {
                let residual = (Complex64::new(1.0, 0.0) + kernel.phi(z)).norm();
                if residual > tol {
                    failures.push(RootFailure {
                        seed,
                        last: z,
                        residual,
                        iterations: iter,
                        reason: format!("converged point has residual {residual:.3e} > {tol:.3e}"),
                    });
                } else if z.im.abs() < 1e-12 {
                    failures.push(RootFailure {
                        seed,
                        last: z,
                        residual,
                        iterations: iter,
                        reason: "converged onto the real axis".into(),
                    });
                } else {
                    if iter > 40 {
                        warnings.push(format!(
                            "seed {seed}: {iter} iterations (quadratic convergence lost; near-multiple zero?)"
                        ));
                    }
                    roots.push((seed, z));
                }
                continue 'seed;
            }
        }
        let residual = (Complex64::new(1.0, 0.0) + kernel.phi(z)).norm();
        failures.push(RootFailure {
            seed,
            last: z,
            residual,
            iterations: 100,
            reason: "no convergence after 100 iterations".into(),
        });
    }

    let mut q_plus = Vec::new();
    let mut q_minus = Vec::new();
    for &(_, z) in &roots {
        if z.im > 0.0 {
            q_plus.push(z);
        } else {
            q_minus.push(z);
        }
    }
    let sort_key = |v: &mut Vec<Complex64>| {
        v.sort_by(|a, b| {
            (a.im.abs(), a.re)
                .partial_cmp(&(b.im.abs(), b.re))
                .unwrap()
        })
    };
    sort_key(&mut q_plus);
    sort_key(&mut q_minus);
    let pairing_plus = pair_to_poles(&q_plus, kernel.poles_plus());
    let pairing_minus = pair_to_poles(&q_minus, kernel.poles_minus());

    NewtonOutcome {
        roots: RootSet {
            q_plus,
            q_minus,
            residual_tol: tol,
            pairing_plus,
            pairing_minus,
            series_plus: Vec::new(),
            series_minus: Vec::new(),
            warnings,
        },
        failures,
    }
}

/// Decay exponent of the `O(e^{−ax})` remainder after truncating to `n`
/// retained roots per half-plane:
///
/// ```text
/// a = min over series pairs (i, i') of Im( q⁺_{n+1, i} − q⁻_{0, i'} ),
/// ```
///
/// i.e. the gap between the first level beyond the retained window and the
/// series head on the other side. Requires the closed-form series.
pub fn remainder_scale(roots: &RootSet, n: usize) -> Result<f64> {
    if roots.series_plus.is_empty() || roots.series_minus.is_empty() {
        return Err(GskError::RootFailure(
            "remainder scale needs the closed-form root series".into(),
        ));
    }
    let mut best = f64::INFINITY;
    for sp in &roots.series_plus {
        let Some(&up) = sp.get(n + 1) else {
            return Err(GskError::RootFailure(format!(
                "remainder scale at n = {n} needs {} levels per series, have {}",
                n + 2,
                sp.len()
            )));
        };
        for sm in &roots.series_minus {
            let Some(&dn) = sm.first() else {
                return Err(GskError::RootFailure("empty lower root series".into()));
            };
            best = best.min(up.im - dn.im);
        }
    }
    Ok(best)
}

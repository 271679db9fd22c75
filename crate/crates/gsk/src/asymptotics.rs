//! The large-`x` asymptotic machinery: residue data `h±` at the retained
//! zeros, the coupling matrices `A±` and their products, the `C±/D±` linear
//! systems, the uniform resolvent factors `f±`, the exponent functional
//! `𝒜(x)`, the determinant expansion `𝒜 + log det(I−A)`, the equivalent
//! contour-sum expansion, and the x-derivative identity.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::cauchy::CauchyData;
use crate::kernels::{e_pm, e_pm_squared, Sign};
use crate::linalg::{logdet_lu, lu_factor, CMatrix};
use crate::roots::RootSet;
use crate::{GskError, Result};

/// Residual bound accepted for the solved `C±/D±` systems.
pub const SYSTEM_RESIDUAL_TOL: f64 = 1e-12;

/// Term-count guard for the contour-sum expansion.
pub const CONTOUR_GUARD_MIN_DIM: usize = 12;

/// Everything the asymptotic formulas need at one value of `x`.
pub struct AsymptoticModel {
    pub x: f64,
    pub roots: RootSet,
    /// `h⁺_k = −α(q⁺_k)⁻² / φ'(q⁺_k)`, `h⁻_k = −α(q⁻_k)² / φ'(q⁻_k)`,
    /// with α the off-axis Cauchy transform (the continuation of the
    /// matching boundary value).
    pub h_plus: Vec<Complex64>,
    pub h_minus: Vec<Complex64>,
    /// `e₊²(q⁺_k)` and `e₋²(q⁻_k)`; both are exponentially small in `x`.
    pub e2_plus: Vec<Complex64>,
    pub e2_minus: Vec<Complex64>,
    /// `A⁻` is N⁺×N⁻ with `A⁻_{jk} = h⁻_k e₋²(q⁻_k)/(q⁺_j − q⁻_k)`;
    /// `A⁺` is N⁻×N⁺ with `A⁺_{jk} = h⁺_k e₊²(q⁺_k)/(q⁻_j − q⁺_k)`.
    pub a_minus: CMatrix,
    pub a_plus: CMatrix,
    /// `A = A⁻A⁺` (N⁺×N⁺) and `Ã = A⁺A⁻` (N⁻×N⁻).
    pub a_mat: CMatrix,
    pub a_tilde: CMatrix,
    /// Solutions of `(I−A)C⁺ = 1`, `D⁺ = A⁺C⁺`, `(I−Ã)C⁻ = 1`, `D⁻ = A⁻C⁻`.
    pub c_plus: Vec<Complex64>,
    pub d_plus: Vec<Complex64>,
    pub c_minus: Vec<Complex64>,
    pub d_minus: Vec<Complex64>,
    /// Exponent functional `𝒜(x)` on the real line.
    pub leading: Complex64,
    /// `log det(I − A)`.
    pub logdet_correction: Complex64,
}

/// Exponent functional on the real line,
/// `𝒜(x) = −∫(ix + g'(λ))ν(λ)dλ + ∬ν(λ)ν(μ)/(λ−μ−i0)² dλdμ
///        = ixα₁ − ∫g'ν + (double integral)`.
/// The x-dependence is exactly linear with slope `iα₁`.
pub fn functional_a(data: &CauchyData, x: f64) -> Complex64 {
    Complex64::new(0.0, x) * data.alpha1() - data.integral_gprime_nu() + data.double_integral()
}

/// Residue data at the retained zeros. Fails on a zero with `φ'(q) ≈ 0`
/// (double zero: the simple-zero hypothesis is violated).
pub fn build_h(data: &CauchyData, roots: &RootSet) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let kernel = data.kernel();
    let mut h_plus = Vec::with_capacity(roots.n_plus());
    for &q in &roots.q_plus {
        let dphi = kernel.phi_prime(q);
        if dphi.norm() < 1e-8 {
            return Err(GskError::DegenerateRoot {
                root: q,
                phi_prime_abs: dphi.norm(),
            });
        }
        let alpha = data.alpha_at(q)?;
        h_plus.push(-1.0 / (alpha * alpha * dphi));
    }
    let mut h_minus = Vec::with_capacity(roots.n_minus());
    for &q in &roots.q_minus {
        let dphi = kernel.phi_prime(q);
        if dphi.norm() < 1e-8 {
            return Err(GskError::DegenerateRoot {
                root: q,
                phi_prime_abs: dphi.norm(),
            });
        }
        let alpha = data.alpha_at(q)?;
        h_minus.push(-(alpha * alpha) / dphi);
    }
    Ok((h_plus, h_minus))
}

/// The four coupling matrices from the residue data.
pub fn build_a_matrices(
    roots: &RootSet,
    h_plus: &[Complex64],
    h_minus: &[Complex64],
    e2_plus: &[Complex64],
    e2_minus: &[Complex64],
) -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let np = roots.n_plus();
    let nm = roots.n_minus();
    let a_minus = CMatrix::from_fn(np, nm, |j, k| {
        h_minus[k] * e2_minus[k] / (roots.q_plus[j] - roots.q_minus[k])
    });
    let a_plus = CMatrix::from_fn(nm, np, |j, k| {
        h_plus[k] * e2_plus[k] / (roots.q_minus[j] - roots.q_plus[k])
    });
    let a_mat = a_minus.matmul(&a_plus);
    let a_tilde = a_plus.matmul(&a_minus);
    (a_minus, a_plus, a_mat, a_tilde)
}

/// Assemble the model at one `x`: residue data, coupling matrices, solved
/// systems, exponent functional and correction determinant.
pub fn build_model(data: &CauchyData, roots: &RootSet, x: f64) -> Result<AsymptoticModel> {
    let kernel = data.kernel();
    let (h_plus, h_minus) = build_h(data, roots)?;
    let e2_plus: Vec<Complex64> = roots
        .q_plus
        .iter()
        .map(|&q| e_pm_squared(kernel, x, q, Sign::Plus))
        .collect::<Result<_>>()?;
    let e2_minus: Vec<Complex64> = roots
        .q_minus
        .iter()
        .map(|&q| e_pm_squared(kernel, x, q, Sign::Minus))
        .collect::<Result<_>>()?;
    let (a_minus, a_plus, a_mat, a_tilde) =
        build_a_matrices(roots, &h_plus, &h_minus, &e2_plus, &e2_minus);

    let (c_plus, d_plus, c_minus, d_minus) = solve_cd(&a_minus, &a_plus, &a_mat, &a_tilde, x)?;

    let leading = functional_a(data, x);
    let logdet_correction = logdet_lu(&a_mat.identity_minus())?.value;

    Ok(AsymptoticModel {
        x,
        roots: roots.clone(),
        h_plus,
        h_minus,
        e2_plus,
        e2_minus,
        a_minus,
        a_plus,
        a_mat,
        a_tilde,
        c_plus,
        d_plus,
        c_minus,
        d_minus,
        leading,
        logdet_correction,
    })
}

/// Solve `(I−A)C⁺ = 1`, `D⁺ = A⁺C⁺`, `(I−Ã)C⁻ = 1`, `D⁻ = A⁻C⁻` and check
/// the residuals.
fn solve_cd(
    a_minus: &CMatrix,
    a_plus: &CMatrix,
    a_mat: &CMatrix,
    a_tilde: &CMatrix,
    x: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
    let np = a_mat.rows();
    let nm = a_tilde.rows();
    let ones_p = vec![Complex64::new(1.0, 0.0); np];
    let ones_m = vec![Complex64::new(1.0, 0.0); nm];

    let solve_one = |m: &CMatrix, rhs: &[Complex64], label: &str| -> Result<Vec<Complex64>> {
        if m.rows() == 0 {
            return Ok(Vec::new());
        }
        let sys = m.identity_minus();
        let factors = lu_factor(sys.clone()).map_err(|e| {
            GskError::Singular(format!(
                "I−{label} singular at x = {x} ({e}); increase x or reduce the retained root count"
            ))
        })?;
        let sol = factors.solve(rhs);
        let residual = sys
            .matvec(&sol)
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = 1.0 + sol.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if residual > SYSTEM_RESIDUAL_TOL * scale {
            return Err(GskError::Singular(format!(
                "(I−{label}) solve residual {residual:.3e} exceeds tolerance at x = {x}"
            )));
        }
        Ok(sol)
    };

    let c_plus = solve_one(a_mat, &ones_p, "A")?;
    let c_minus = solve_one(a_tilde, &ones_m, "~A")?;
    let d_plus = if nm == 0 {
        Vec::new()
    } else {
        a_plus.matvec(&c_plus)
    };
    let d_minus = if np == 0 {
        Vec::new()
    } else {
        a_minus.matvec(&c_minus)
    };
    Ok((c_plus, d_plus, c_minus, d_minus))
}

impl AsymptoticModel {
    /// `log det(I + γV)` from the determinant expansion:
    /// exponent functional plus `log det(I−A)`.
    pub fn logdet_corrected(&self) -> Complex64 {
        self.leading + self.logdet_correction
    }

    /// `det(I−A)` and `det(I−Ã)` must agree (block-matrix identity).
    pub fn determinant_identity_gap(&self) -> Result<f64> {
        let d1 = logdet_lu(&self.a_mat.identity_minus())?.value.exp();
        let d2 = logdet_lu(&self.a_tilde.identity_minus())?.value.exp();
        Ok((d1 - d2).norm())
    }
}

/// Uniform asymptotic factors of the resolvent on the real axis,
///
/// ```text
/// f±(λ) = α∓^{∓1}(λ) e±(λ) [1 + Σ_j D±_j h∓_j e∓²(q∓_j)/(λ−q∓_j)]
///       + α±^{±1}(λ) e∓(λ) Σ_j C±_j h±_j e±²(q±_j)/(λ−q±_j).
/// ```
///
/// Both signs share the boundary values of α, so they are returned together.
pub fn f_pm_pair(
    model: &AsymptoticModel,
    data: &CauchyData,
    lambda: f64,
) -> Result<(Complex64, Complex64)> {
    let kernel = data.kernel();
    let (alpha_p, alpha_m) = data.alpha_pm_pair(lambda)?;
    let ep = e_pm(kernel, model.x, Complex64::new(lambda, 0.0), Sign::Plus)?;
    let em = 1.0 / ep;
    let l = Complex64::new(lambda, 0.0);

    let sum_minus = |coef: &[Complex64]| -> Complex64 {
        coef.iter()
            .enumerate()
            .map(|(j, &c)| c * model.h_minus[j] * model.e2_minus[j] / (l - model.roots.q_minus[j]))
            .sum()
    };
    let sum_plus = |coef: &[Complex64]| -> Complex64 {
        coef.iter()
            .enumerate()
            .map(|(j, &c)| c * model.h_plus[j] * model.e2_plus[j] / (l - model.roots.q_plus[j]))
            .sum()
    };

    let one = Complex64::new(1.0, 0.0);
    let f_plus =
        ep / alpha_m * (one + sum_minus(&model.d_plus)) + alpha_p * em * sum_plus(&model.c_plus);
    let f_minus =
        alpha_p * em * (one + sum_plus(&model.d_minus)) + ep / alpha_m * sum_minus(&model.c_minus);
    Ok((f_plus, f_minus))
}

/// `f±` together with their λ-derivatives (needed on the resolvent
/// diagonal). The α± derivatives come from the PV kernel applied to ν'.
pub fn f_pm_pair_with_derivatives(
    model: &AsymptoticModel,
    data: &CauchyData,
    lambda: f64,
) -> Result<((Complex64, Complex64), (Complex64, Complex64))> {
    let kernel = data.kernel();
    let (alpha_p, alpha_m) = data.alpha_pm_pair(lambda)?;
    let dlog_p = data.log_alpha_pm_derivative(lambda, Sign::Plus)?;
    let dlog_m = data.log_alpha_pm_derivative(lambda, Sign::Minus)?;
    let l = Complex64::new(lambda, 0.0);
    let ep = e_pm(kernel, model.x, l, Sign::Plus)?;
    let em = 1.0 / ep;
    // (log e±)' = ±(ix + g')/2
    let half_phase = (Complex64::new(0.0, model.x) + kernel.g_prime(l)) * 0.5;

    let one = Complex64::new(1.0, 0.0);
    let sum_and_slope = |coef: &[Complex64],
                         h: &[Complex64],
                         e2: &[Complex64],
                         q: &[Complex64]|
     -> (Complex64, Complex64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for (j, &c) in coef.iter().enumerate() {
            let term = c * h[j] * e2[j] / (l - q[j]);
            s += term;
            ds -= term / (l - q[j]);
        }
        (s, ds)
    };

    let (s1p, ds1p) = sum_and_slope(
        &model.d_plus,
        &model.h_minus,
        &model.e2_minus,
        &model.roots.q_minus,
    );
    let (s2p, ds2p) = sum_and_slope(
        &model.c_plus,
        &model.h_plus,
        &model.e2_plus,
        &model.roots.q_plus,
    );
    let (s1m, ds1m) = sum_and_slope(
        &model.d_minus,
        &model.h_plus,
        &model.e2_plus,
        &model.roots.q_plus,
    );
    let (s2m, ds2m) = sum_and_slope(
        &model.c_minus,
        &model.h_minus,
        &model.e2_minus,
        &model.roots.q_minus,
    );

    let t1p = ep / alpha_m * (one + s1p);
    let t2p = alpha_p * em * s2p;
    let f_plus = t1p + t2p;
    let df_plus = t1p * (half_phase - dlog_m) + ep / alpha_m * ds1p
        + t2p * (dlog_p - half_phase)
        + alpha_p * em * ds2p;

    let t1m = alpha_p * em * (one + s1m);
    let t2m = ep / alpha_m * s2m;
    let f_minus = t1m + t2m;
    let df_minus = t1m * (dlog_p - half_phase) + alpha_p * em * ds1m
        + t2m * (half_phase - dlog_m)
        + ep / alpha_m * ds2m;

    Ok(((f_plus, f_minus), (df_plus, df_minus)))
}

/// Asymptotic resolvent kernel
/// `γR(λ,μ) = sqrt(φ(λ)φ(μ)) [f₊(λ)f₋(μ) − f₋(λ)f₊(μ)] / (2iπ(λ−μ))`
/// for real arguments, with the analytic diagonal limit
/// `γR(λ,λ) = φ(λ)[f₊'(λ)f₋(λ) − f₋'(λ)f₊(λ)]/(2iπ)`.
pub fn resolvent_asym(
    model: &AsymptoticModel,
    data: &CauchyData,
    lambda: f64,
    mu: f64,
) -> Result<Complex64> {
    let kernel = data.kernel();
    if (lambda - mu).abs() < 1e-6 {
        let mid = 0.5 * (lambda + mu);
        let ((fp, fm), (dfp, dfm)) = f_pm_pair_with_derivatives(model, data, mid)?;
        let phi = kernel.phi(Complex64::new(mid, 0.0));
        return Ok(phi * (dfp * fm - dfm * fp) / Complex64::new(0.0, 2.0 * PI));
    }
    let (fpl, fml) = f_pm_pair(model, data, lambda)?;
    let (fpm, fmm) = f_pm_pair(model, data, mu)?;
    let sl = kernel.phi(Complex64::new(lambda, 0.0)).sqrt();
    let sm = kernel.phi(Complex64::new(mu, 0.0)).sqrt();
    Ok(sl * sm * (fpl * fmm - fml * fpm) / (Complex64::new(0.0, 2.0 * PI) * (lambda - mu)))
}

/// Finite-difference fallback for the diagonal resolvent (documented
/// alternative to the analytic route; step 1e-5).
pub fn resolvent_diag_fd(
    model: &AsymptoticModel,
    data: &CauchyData,
    lambda: f64,
) -> Result<Complex64> {
    let step = 1e-5;
    resolvent_asym(model, data, lambda - 0.5 * step, lambda + 0.5 * step)
}

/// Sup-norm residual of the resolvent integral equation for `f₊`,
/// `f₊(λ) + (1/2πi)∫ [e₊(λ)e₋(μ) − e₋(λ)e₊(μ)]/(λ−μ) φ(μ) f₊(μ) dμ = e₊(λ)`,
/// discretized on the data's rule (the λ = μ term uses the bracket limit
/// `ix + g'`).
pub fn integral_equation_residual(model: &AsymptoticModel, data: &CauchyData) -> Result<f64> {
    let kernel = data.kernel();
    let rule = data.rule();
    let n = rule.len();
    let mut ep = Vec::with_capacity(n);
    let mut f_plus = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for &xn in rule.nodes() {
        let z = Complex64::new(xn, 0.0);
        ep.push(e_pm(kernel, model.x, z, Sign::Plus)?);
        phi.push(kernel.phi(z));
        f_plus.push(f_pm_pair(model, data, xn)?.0);
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut worst = 0.0f64;
    for (i, &li) in rule.nodes().iter().enumerate() {
        let mut integral = Complex64::new(0.0, 0.0);
        for (j, &mj) in rule.nodes().iter().enumerate() {
            let w = rule.weights()[j];
            let kernel_part = if i == j {
                Complex64::new(0.0, model.x) + kernel.g_prime(Complex64::new(li, 0.0))
            } else {
                (ep[i] / ep[j] - ep[j] / ep[i]) / (li - mj)
            };
            integral += kernel_part * phi[j] * f_plus[j] * w;
        }
        let residual = (f_plus[i] + integral / two_pi_i - ep[i]).norm();
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Deformed-contour index: strictly increasing subsets `J ⊂ {0..N⁺}`,
/// `K ⊂ {0..N⁻}` of equal size. The empty pair is the undeformed axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourIndex {
    pub j: Vec<usize>,
    pub k: Vec<usize>,
}

impl ContourIndex {
    pub fn real_axis() -> Self {
        ContourIndex {
            j: Vec::new(),
            k: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.j.len()
    }

    pub fn validate(&self, n_plus: usize, n_minus: usize) -> Result<()> {
        if self.j.len() != self.k.len() {
            return Err(GskError::Config("contour index sizes differ".into()));
        }
        let increasing = |v: &[usize], bound: usize| {
            v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&i| i < bound)
        };
        if !increasing(&self.j, n_plus) || !increasing(&self.k, n_minus) {
            return Err(GskError::Config(format!(
                "contour index out of range or not strictly increasing: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `exp(𝒜_Γ − 𝒜_ℝ)` for the contour crossing the selected zeros: the squared
/// Cauchy determinant times the per-zero residue weights,
///
/// ```text
/// w(J,K) = det[1/(q⁺_{j_a} − q⁻_{k_b})]² · Π_m h⁺_{j_m} h⁻_{k_m} e₊²(q⁺_{j_m}) e₋²(q⁻_{k_m}),
/// ```
///
/// with the Cauchy determinant evaluated by its closed product formula.
pub fn contour_weight(model: &AsymptoticModel, idx: &ContourIndex) -> Result<Complex64> {
    idx.validate(model.roots.n_plus(), model.roots.n_minus())?;
    let n = idx.n();
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let qp: Vec<Complex64> = idx.j.iter().map(|&j| model.roots.q_plus[j]).collect();
    let qm: Vec<Complex64> = idx.k.iter().map(|&k| model.roots.q_minus[k]).collect();
    let mut cauchy = Complex64::new(1.0, 0.0);
    for a in 0..n {
        for b in 0..a {
            cauchy *= (qp[a] - qp[b]) * (qm[b] - qm[a]);
        }
    }
    for a in 0..n {
        for b in 0..n {
            cauchy /= qp[a] - qm[b];
        }
    }
    let mut weight = cauchy * cauchy;
    for m in 0..n {
        weight *= model.h_plus[idx.j[m]]
            * model.h_minus[idx.k[m]]
            * model.e2_plus[idx.j[m]]
            * model.e2_minus[idx.k[m]];
    }
    Ok(weight)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // Advance lexicographically: find the rightmost index that can move.
        let mut i = k;
        let mut moved = false;
        while i > 0 {
            i -= 1;
            if current[i] != i + n - k {
                current[i] += 1;
                for j in i + 1..k {
                    current[j] = current[j - 1] + 1;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            return out;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `log det(I+γV)` by summing `exp(𝒜_Γ − 𝒜_ℝ)` over every contour of the
/// family (the n = 0 term is 1), then adding `𝒜_ℝ`:
/// `𝒜_ℝ + log Σ_{n,J,K} w(J,K)`. Algebraically equal to the determinant
/// expansion.
pub fn logdet_contour_sum(model: &AsymptoticModel) -> Result<Complex64> {
    let np = model.roots.n_plus();
    let nm = model.roots.n_minus();
    let max_n = np.min(nm);
    if max_n > CONTOUR_GUARD_MIN_DIM {
        let mut terms: u128 = 0;
        for n in 0..=max_n {
            terms += binomial(np, n) * binomial(nm, n);
        }
        return Err(GskError::CombinatorialGuard { terms });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for n in 0..=max_n {
        for j in combinations(np, n) {
            for k in combinations(nm, n) {
                let idx = ContourIndex { j: j.clone(), k };
                total += contour_weight(model, &idx)?;
            }
        }
    }
    Ok(model.leading + total.ln())
}

/// `∂ₓ log det(I+γV) = (1/2π) ∫ f₊(λ) e₋(λ) φ(λ) dλ` by quadrature over the
/// data's rule.
pub fn x_derivative_asym(model: &AsymptoticModel, data: &CauchyData) -> Result<Complex64> {
    let kernel = data.kernel();
    let rule = data.rule();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&xn, &w) in rule.nodes().iter().zip(rule.weights()) {
        let z = Complex64::new(xn, 0.0);
        let (fp, _) = f_pm_pair(model, data, xn)?;
        let em = e_pm(kernel, model.x, z, Sign::Minus)?;
        acc += fp * em * kernel.phi(z) * w;
    }
    Ok(acc / (2.0 * PI))
}

/// Closed-form route for the same derivative:
/// `iα₁ − Σ_j (dA/dx)_{jj} C⁺_j` with
/// `(dA/dx)_{jj} = i Σ_m (q⁺_j − q⁻_m) A⁻_{jm} A⁺_{mj}`.
/// With no retained roots this is exactly `iα₁`.
pub fn x_derivative_closed(model: &AsymptoticModel, data: &CauchyData) -> Complex64 {
    let mut acc = Complex64::new(0.0, 1.0) * data.alpha1();
    for j in 0..model.roots.n_plus() {
        let mut da_jj = Complex64::new(0.0, 0.0);
        for m in 0..model.roots.n_minus() {
            da_jj += Complex64::new(0.0, 1.0)
                * (model.roots.q_plus[j] - model.roots.q_minus[m])
                * model.a_minus[(j, m)]
                * model.a_plus[(m, j)];
        }
        acc -= da_jj * model.c_plus[j];
    }
    acc
}

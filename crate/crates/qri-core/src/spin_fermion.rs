//! The perturbative model: a qubit (Hamiltonian σ_z) repeatedly coupled to
//! fresh infinitely extended thermal fermion baths through σ_x ⊗ (a*(g) +
//! a(g)), with small coupling λ and interaction times τ(ω) = τ0 + σ(ω)
//! fluctuating in [-ε, ε].
//!
//! The bath enters only through six reservoir integrals with sinc kernels
//! evaluated on a discretized spectral density. To second order in λ the
//! RDO leaves the populations' subspace invariant and acts there as a 2x2
//! stochastic-like block; its dual fixed vector gives the asymptotic
//! occupation probability q, for which a four-term small-fluctuation
//! expansion is also available.

use crate::dist::Law;
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// sin(x)/x with the removable singularity filled in by its Taylor series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (1 - sinc(x))/x, smooth through x = 0.
fn one_minus_sinc_over(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 6.0 - x * x2 / 120.0 + x * x2 * x2 / 5040.0
    } else {
        (1.0 - sinc(x)) / x
    }
}

/// Discretized bath spectral density: single-fermion energies `nodes` with
/// quadrature `weights` for the radial measure, and the form-factor
/// strength ‖g(r)‖² at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub g_norm_sq: Vec<f64>,
}

impl SpectralDensity {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, g_norm_sq: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() != g_norm_sq.len() {
            return Err(Error::InvalidParams("spectral density arrays must align".into()));
        }
        let ok = nodes.iter().all(|r| r.is_finite() && *r >= 0.0)
            && weights.iter().all(|w| w.is_finite() && *w >= 0.0)
            && g_norm_sq.iter().all(|g| g.is_finite() && *g >= 0.0);
        if !ok {
            return Err(Error::InvalidParams(
                "spectral density needs finite nonnegative nodes, weights and strengths".into(),
            ));
        }
        Ok(SpectralDensity { nodes, weights, g_norm_sq })
    }

    /// Radial measure dμ(r) = ½ r^{1/2} dr on [0, r_cut] (Gauss-Legendre
    /// discretized) with form factor ‖g(r)‖² = r e^{-r}.
    pub fn default_bath(r_cut: f64, n_nodes: usize) -> Self {
        let (x, w) = crate::dist::gauss_legendre(n_nodes);
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut weights = Vec::with_capacity(n_nodes);
        let mut g_norm_sq = Vec::with_capacity(n_nodes);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * r_cut * (xi + 1.0);
            nodes.push(r);
            weights.push(0.5 * r_cut * wi * 0.5 * r.sqrt());
            g_norm_sq.push(r * (-r).exp());
        }
        SpectralDensity { nodes, weights, g_norm_sq }
    }

    /// ∫ dμ ‖g‖² f(r) over the discretization.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.g_norm_sq)
            .map(|((&r, &w), &g2)| w * g2 * f(r))
            .sum()
    }

    /// The thermal coupling moment ∫ dμ ‖g‖² (1 + e^{β r}); must stay finite
    /// (always true for a finite discretization, but callers use this to
    /// reject absurd β against truncated densities).
    pub fn thermal_moment(&self, beta: f64) -> f64 {
        self.integrate(|r| 1.0 + (beta * r).exp())
    }

    /// Norm bound 3 ‖(1 + e^{β h/2}) g‖ for the doubled interaction operator.
    pub fn w_norm_bound(&self, beta: f64) -> f64 {
        let sq = self.integrate(|r| {
            let t = 1.0 + (0.5 * beta * r).exp();
            t * t
        });
        3.0 * sq.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SpinFermionParams {
    /// Coupling strength.
    pub lambda: f64,
    /// Mean interaction time.
    pub tau0: f64,
    /// Law of the fluctuation σ(ω); τ(ω) = τ0 + σ(ω).
    pub sigma_law: Law,
    /// Law of the bath inverse temperature.
    pub beta_law: Law,
    pub density: SpectralDensity,
}

impl SpinFermionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.tau0.is_finite() && self.tau0 > 0.0) {
            return Err(Error::InvalidParams("tau0 must be finite and positive".into()));
        }
        let (s_lo, s_hi) = self.sigma_law.support();
        let eps = s_lo.abs().max(s_hi.abs());
        if !eps.is_finite() || eps >= self.tau0 {
            return Err(Error::InvalidParams(format!(
                "sigma amplitude {eps} must be below tau0 {}",
                self.tau0
            )));
        }
        let (b_lo, b_hi) = self.beta_law.support();
        if !(b_lo > 0.0 && b_hi.is_finite()) {
            return Err(Error::InvalidParams(
                "beta law must be supported in (0, beta_max]".into(),
            ));
        }
        if !self.density.thermal_moment(b_hi).is_finite() {
            return Err(Error::InvalidParams(
                "thermal coupling moment diverges at beta_max".into(),
            ));
        }
        Ok(())
    }

    /// Fluctuation amplitude ε (half-width of the σ support).
    pub fn epsilon(&self) -> f64 {
        let (lo, hi) = self.sigma_law.support();
        lo.abs().max(hi.abs())
    }

    /// Deterministic β required by the fixed-order expansions.
    pub fn deterministic_beta(&self) -> Result<f64> {
        self.beta_law.point_value().ok_or_else(|| {
            Error::InvalidParams(
                "the fixed-order expansion needs a deterministic beta (point-mass law)".into(),
            )
        })
    }
}

/// The six bath integrals entering the second-order block: α± with squared
/// sinc kernels, and their first and second τ-derivative companions ξ±, η±
/// (d/dτ [τ²α±] = 2ξ±, d²/dτ² [τ²α±] = 2η± at τ = τ0).
#[derive(Debug, Clone, Copy)]
pub struct ReservoirIntegrals {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub xi_plus: f64,
    pub xi_minus: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
}

pub fn reservoir_integrals(tau0: f64, beta: f64, d: &SpectralDensity) -> ReservoirIntegrals {
    let mut out = ReservoirIntegrals {
        alpha_plus: 0.0,
        alpha_minus: 0.0,
        xi_plus: 0.0,
        xi_minus: 0.0,
        eta_plus: 0.0,
        eta_minus: 0.0,
    };
    for ((&r, &w), &g2) in d.nodes.iter().zip(&d.weights).zip(&d.g_norm_sq) {
        let boltz = (-beta * r).exp();
        let therm = w * g2 / (1.0 + boltz);
        let (dm, dp) = (r - 2.0, r + 2.0);
        out.alpha_plus +=
            therm * (boltz * sinc(dm * tau0 / 2.0).powi(2) + sinc(dp * tau0 / 2.0).powi(2));
        out.alpha_minus +=
            therm * (boltz * sinc(dp * tau0 / 2.0).powi(2) + sinc(dm * tau0 / 2.0).powi(2));
        out.xi_plus += tau0 * therm * (boltz * sinc(dm * tau0) + sinc(dp * tau0));
        out.xi_minus += tau0 * therm * (boltz * sinc(dp * tau0) + sinc(dm * tau0));
        out.eta_plus += therm * (boltz * (dm * tau0).cos() + (dp * tau0).cos());
        out.eta_minus += therm * (boltz * (dp * tau0).cos() + (dm * tau0).cos());
    }
    out
}

/// The β-independent total relaxation weight α(τ) = ∫dμ ‖g‖² (sinc²[(r-2)τ/2]
/// + sinc²[(r+2)τ/2]); equals α₊ + α₋ at τ = τ0 for any β.
pub fn total_relaxation_weight(tau: f64, d: &SpectralDensity) -> f64 {
    d.integrate(|r| sinc((r - 2.0) * tau / 2.0).powi(2) + sinc((r + 2.0) * tau / 2.0).powi(2))
}

/// Minimal gap r0(τ) = min{2|sin 2τ|, 2|sin τ|} between the unperturbed RDO
/// eigenvalues {1, e^{±2iτ}}. Perturbation theory needs |λ| < r0/4.
pub fn unperturbed_gap(tau: f64) -> f64 {
    (2.0 * (2.0 * tau).sin().abs()).min(2.0 * tau.sin().abs())
}

fn require_perturbative(lambda: f64, tau: f64) -> Result<()> {
    let quarter_gap = 0.25 * unperturbed_gap(tau);
    if lambda.abs() >= quarter_gap {
        return Err(Error::GapTooSmall { lambda: lambda.abs(), quarter_gap });
    }
    Ok(())
}

/// Second-order population block of the RDO at fluctuation coordinates
/// (ω_tau = the sampled interaction time, ω_beta = the sampled inverse
/// temperature): 1 - λ² τ(ω)² [[α₋, -α₋], [-α₊, α₊]] with the kernels
/// evaluated at τ0. Row sums are exactly one at this order.
pub fn effective_block(
    p: &SpinFermionParams,
    omega_tau: f64,
    omega_beta: f64,
) -> Result<ComplexMatrix> {
    p.validate()?;
    require_perturbative(p.lambda, p.tau0)
        .map_err(|e| Error::ThresholdViolation(e.to_string()))?;
    let ri = reservoir_integrals(p.tau0, omega_beta, &p.density);
    Ok(population_block(p.lambda, omega_tau, ri.alpha_plus, ri.alpha_minus))
}

/// 1 - λ²τ² [[α₋, -α₋], [-α₊, α₊]] on the ordered basis {|0⟩, |1⟩}.
fn population_block(lambda: f64, tau: f64, alpha_plus: f64, alpha_minus: f64) -> ComplexMatrix {
    let s = lambda * lambda * tau * tau;
    let mut b = ComplexMatrix::identity(2);
    b[(0, 0)] -= Complex64::new(s * alpha_minus, 0.0);
    b[(0, 1)] += Complex64::new(s * alpha_minus, 0.0);
    b[(1, 0)] += Complex64::new(s * alpha_plus, 0.0);
    b[(1, 1)] -= Complex64::new(s * alpha_plus, 0.0);
    b
}

/// Second-order eigenvalue expansion of the RDO at deterministic (τ, β),
/// with the rigorous remainder bound evaluated from the norm bound on the
/// doubled interaction operator.
#[derive(Debug, Clone, Copy)]
pub struct EigenvalueExpansion {
    pub e0: f64,
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    /// Bound on |ε_#| for all three expanded eigenvalues.
    pub error_bound: f64,
}

pub fn eigenvalue_expansion(
    p: &SpinFermionParams,
    tau: f64,
    beta: f64,
) -> Result<EigenvalueExpansion> {
    p.validate()?;
    require_perturbative(p.lambda, tau)?;
    let l2t2 = p.lambda * p.lambda * tau * tau;
    let alpha = total_relaxation_weight(tau, &p.density);
    let e0 = 1.0 - l2t2 * alpha;
    let drift = p.density.integrate(|r| {
        one_minus_sinc_over(tau * (2.0 - r)) + one_minus_sinc_over(tau * (2.0 + r))
    }) * tau;
    let inner = Complex64::new(1.0 - 0.5 * l2t2 * alpha, l2t2 / tau * drift);
    let e_plus = (I * 2.0 * tau).exp() * inner;
    let e_minus = (-I * 2.0 * tau).exp() * inner.conj();
    let error_bound = expansion_error_bound(p.lambda, tau, p.density.w_norm_bound(beta));
    Ok(EigenvalueExpansion { e0, e_plus, e_minus, error_bound })
}

/// 12 λ⁴τ⁴ ‖W‖⁴ cosh²(|λ|τ‖W‖) [1 + (1 + λ²τ²‖W‖² cosh(|λ|τ‖W‖)) / r0(τ)].
fn expansion_error_bound(lambda: f64, tau: f64, w_norm: f64) -> f64 {
    let lt = lambda.abs() * tau * w_norm;
    let l2t2w2 = lambda * lambda * tau * tau * w_norm * w_norm;
    12.0 * l2t2w2 * l2t2w2
        * lt.cosh().powi(2)
        * (1.0 + (1.0 + l2t2w2 * lt.cosh()) / unperturbed_gap(tau))
}

/// Strict-contraction smallness condition at coupling `lambda`:
/// 96 λ²τ²‖W‖⁴ cosh²(|λ|τ‖W‖) [1 + (1 + λ²τ²‖W‖² cosh(|λ|τ‖W‖))/r0(τ)] < α(τ).
fn contraction_condition(lambda: f64, tau: f64, w_norm: f64, alpha: f64) -> bool {
    let lt = lambda.abs() * tau * w_norm;
    let l2t2w2 = lambda * lambda * tau * tau * w_norm * w_norm;
    let lhs = 96.0 * lambda * lambda * tau * tau * w_norm.powi(4)
        * lt.cosh().powi(2)
        * (1.0 + (1.0 + l2t2w2 * lt.cosh()) / unperturbed_gap(tau));
    lhs < alpha
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdReport {
    /// Whether the condition holds at the params' own λ over the whole range.
    pub ok: bool,
    /// Largest factor by which λ can be scaled keeping the condition true
    /// over the range (so ok ⇔ lambda_margin >= 1).
    pub lambda_margin: f64,
}

/// Check the strict-contraction condition over a τ-range, excluding times
/// within `delta` of the lattice {0, π/2, π, ...} where the unperturbed gap
/// closes. The margin is found by bisection on the λ scale factor.
pub fn coupling_threshold_check(
    p: &SpinFermionParams,
    tau_range: (f64, f64),
    delta: f64,
) -> ThresholdReport {
    let (lo, hi) = tau_range;
    assert!(lo > 0.0 && hi >= lo && delta > 0.0, "need a positive tau range and margin");
    let half_pi = std::f64::consts::FRAC_PI_2;
    let n_grid = 257;
    let taus: Vec<f64> = (0..n_grid)
        .map(|i| lo + (hi - lo) * i as f64 / (n_grid - 1) as f64)
        .filter(|&t| {
            let d = (t / half_pi - (t / half_pi).round()).abs() * half_pi;
            d > delta
        })
        .collect();
    if taus.is_empty() {
        return ThresholdReport { ok: false, lambda_margin: 0.0 };
    }
    let beta_max = p.beta_law.support().1;
    let w_norm = p.density.w_norm_bound(beta_max);
    let holds_at = |lambda: f64| {
        taus.iter().all(|&t| {
            contraction_condition(lambda, t, w_norm, total_relaxation_weight(t, &p.density))
        })
    };
    if p.lambda == 0.0 {
        // condition reads 0 < alpha, strict for any nonzero form factor
        let ok = taus
            .iter()
            .all(|&t| total_relaxation_weight(t, &p.density) > 0.0);
        return ThresholdReport { ok, lambda_margin: f64::INFINITY };
    }
    let ok = holds_at(p.lambda);
    // bracket the critical scale factor
    let mut lo_s = 0.0f64;
    let mut hi_s = 1.0f64;
    if holds_at(p.lambda * hi_s) {
        while holds_at(p.lambda * hi_s) && hi_s < 1e12 {
            lo_s = hi_s;
            hi_s *= 2.0;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo_s + hi_s);
        if holds_at(p.lambda * mid) {
            lo_s = mid;
        } else {
            hi_s = mid;
        }
    }
    ThresholdReport { ok, lambda_margin: lo_s }
}

/// Asymptotic ground-state probability q with an in-range flag (the
/// expansion can leave [0,1] outside its validity regime; callers are told
/// rather than silently clamped).
#[derive(Debug, Clone, Copy)]
pub struct QEstimate {
    pub q: f64,
    pub in_unit_interval: bool,
}

/// Four-term small-fluctuation expansion of q built from exact moments of
/// the σ-law:
///   q = α₊/S + 2E[σ](α₋ξ₊-α₊ξ₋)/(τ0²S²)
///       + 4E[σ]²(ξ₊+ξ₋)(α₋ξ₊-α₊ξ₋)/(τ0⁴S³) + E[σ²](α₋η₊-α₊η₋)/(τ0²S²),
/// with S = α₊+α₋. Requires deterministic β.
pub fn q_probability(p: &SpinFermionParams) -> Result<QEstimate> {
    p.validate()?;
    let beta = p.deterministic_beta()?;
    let ri = reservoir_integrals(p.tau0, beta, &p.density);
    let s = ri.alpha_plus + ri.alpha_minus;
    if s <= 0.0 {
        return Err(Error::InvalidParams("vanishing relaxation weight: q undefined".into()));
    }
    let m1 = p.sigma_law.mean();
    let m2 = p.sigma_law.second_moment();
    let skew = ri.alpha_minus * ri.xi_plus - ri.alpha_plus * ri.xi_minus;
    let t2 = p.tau0 * p.tau0;
    let q = ri.alpha_plus / s
        + 2.0 * m1 * skew / (t2 * s * s)
        + 4.0 * m1 * m1 * (ri.xi_plus + ri.xi_minus) * skew / (t2 * t2 * s * s * s)
        + m2 * (ri.alpha_minus * ri.eta_plus - ri.alpha_plus * ri.eta_minus) / (t2 * s * s);
    Ok(QEstimate { q, in_unit_interval: (0.0..=1.0).contains(&q) })
}

/// Expected second-order dual block: E_σ[1 - λ² (τ0+σ)² [[α₋(τ), -α₊(τ)],
/// [-α₋(τ), α₊(τ)]]] with the kernels evaluated at the sampled time. Its
/// fixed vector is the direct (non-expanded) route to q.
pub fn expected_dual_block(p: &SpinFermionParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let beta = p.deterministic_beta()?;
    let (bp, bm) = expected_relaxation_pair(p, beta);
    let l2 = p.lambda * p.lambda;
    let mut block = ComplexMatrix::identity(2);
    block[(0, 0)] -= Complex64::new(l2 * bm, 0.0);
    block[(0, 1)] += Complex64::new(l2 * bp, 0.0);
    block[(1, 0)] += Complex64::new(l2 * bm, 0.0);
    block[(1, 1)] -= Complex64::new(l2 * bp, 0.0);
    Ok(block)
}

/// (E[τ²α₊(τ)], E[τ²α₋(τ)]) over the σ-law by quadrature.
fn expected_relaxation_pair(p: &SpinFermionParams, beta: f64) -> (f64, f64) {
    let rule = p.sigma_law.quadrature(128);
    let mut bp = 0.0;
    let mut bm = 0.0;
    for &(sigma, w) in &rule {
        let tau = p.tau0 + sigma;
        let ri = reservoir_integrals(tau, beta, &p.density);
        bp += w * tau * tau * ri.alpha_plus;
        bm += w * tau * tau * ri.alpha_minus;
    }
    (bp, bm)
}

/// q through the direct route: fixed vector of the expected dual block.
pub fn q_from_dual_block(p: &SpinFermionParams) -> Result<QEstimate> {
    p.validate()?;
    let beta = p.deterministic_beta()?;
    let (bp, bm) = expected_relaxation_pair(p, beta);
    let s = bp + bm;
    if s <= 0.0 {
        return Err(Error::InvalidParams("vanishing relaxation weight: q undefined".into()));
    }
    let q = bp / s;
    Ok(QEstimate { q, in_unit_interval: (0.0..=1.0).contains(&q) })
}

/// Asymptotic expectation of a 2x2 observable at expansion order:
/// q·A00 + (1-q)·A11, with the remainder budget ‖A‖(ε³ + λ²) reported
/// alongside (the suppressed constant is order one).
#[derive(Debug, Clone, Copy)]
pub struct ExpansionValue {
    pub value: f64,
    pub remainder_budget: f64,
}

pub fn asymptotic_state_expansion(
    p: &SpinFermionParams,
    a: &ComplexMatrix,
) -> Result<ExpansionValue> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch("observable must be 2x2".into()));
    }
    let q = q_probability(p)?.q;
    let value = q * a[(0, 0)].re + (1.0 - q) * a[(1, 1)].re;
    let eps = p.epsilon();
    let budget = a.op_norm() * (eps.powi(3) + p.lambda * p.lambda);
    Ok(ExpansionValue { value, remainder_budget: budget })
}

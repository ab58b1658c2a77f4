//! The random-product engine: seeded iid sequences of reduced dynamics
//! operators, left-to-right products, Cesàro (ergodic) averages against
//! instantaneous observables, remainder-decay fits and pointwise
//! convergence diagnostics.
//!
//! Randomness is ChaCha12 keyed by the run seed, with one independent
//! stream per trajectory (`set_stream(trajectory index)`), so results are
//! bitwise reproducible for a given seed and independent of scheduling.

use crate::linalg::ComplexMatrix;
use crate::rdo::{invariant_functional, RdoModel};
use crate::{CVector, Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Run geometry for trajectory ensembles.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryConfig {
    /// Steps per trajectory (the Cesàro length ν).
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Checkpoint spacing for running-average time series.
    pub cesaro_window: usize,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || self.n_trajectories == 0 || self.cesaro_window == 0 {
            return Err(Error::InvalidParams(
                "n_steps, n_trajectories and cesaro_window must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The per-trajectory RNG: ChaCha12 keyed by `seed`, stream = trajectory
/// index. Documented so results are portable across machines.
pub fn substream(seed: u64, trajectory: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng
}

/// Kahan-compensated matrix accumulator for long Cesàro sums.
struct CompensatedSum {
    sum: ComplexMatrix,
    comp: ComplexMatrix,
}

impl CompensatedSum {
    fn new(dim: usize) -> Self {
        CompensatedSum { sum: ComplexMatrix::zeros(dim), comp: ComplexMatrix::zeros(dim) }
    }

    fn add(&mut self, m: &ComplexMatrix) {
        let n = self.sum.dim();
        for i in 0..n {
            for j in 0..n {
                let y = m[(i, j)] - self.comp[(i, j)];
                let t = self.sum[(i, j)] + y;
                self.comp[(i, j)] = (t - self.sum[(i, j)]) - y;
                self.sum[(i, j)] = t;
            }
        }
    }
}

/// Product M(ω_1)···M(ω_n) with the fixed left-to-right association,
/// deterministic for a given seed.
pub fn sample_product(model: &dyn RdoModel, n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = substream(seed, 0);
    let mut product = ComplexMatrix::identity(model.dim());
    for _ in 0..n {
        let omega = model.law().sample(&mut rng);
        product = product.mul(&model.rdo(omega));
    }
    product
}

/// A time-indexed observable acting on the system plus a finite window of
/// chain elements: at step n its matrix sees (ω_{n+1}, ..., ω_{n+l+r+1}).
pub trait InstantObservable: Sync {
    /// Window shape (l, r); the slice passed to `matrix` has length l+r+1.
    fn window(&self) -> (usize, usize);
    fn matrix(&self, window: &[f64]) -> ComplexMatrix;
    /// E[N] over iid window entries distributed by `law`.
    fn expected(&self, law: &crate::dist::Law) -> ComplexMatrix;
}

/// Window-free observable N ≡ const.
pub struct ConstObservable(pub ComplexMatrix);

impl InstantObservable for ConstObservable {
    fn window(&self) -> (usize, usize) {
        (0, 0)
    }

    fn matrix(&self, _window: &[f64]) -> ComplexMatrix {
        self.0.clone()
    }

    fn expected(&self, _law: &crate::dist::Law) -> ComplexMatrix {
        self.0.clone()
    }
}

/// Running Cesàro average of M(ω_1)···M(ω_n)·N(window) along one draw.
#[derive(Debug, Clone)]
pub struct ErgodicEstimate {
    pub mean_product: ComplexMatrix,
    /// Frobenius aggregate of entrywise batch-mean standard errors.
    pub std_error: f64,
    pub nu: usize,
}

/// Single-trajectory Cesàro estimate over ν steps.
pub fn cesaro_estimate(
    model: &dyn RdoModel,
    nu: usize,
    observable: &dyn InstantObservable,
    seed: u64,
) -> Result<ErgodicEstimate> {
    cesaro_on_stream(model, nu, observable, &mut substream(seed, 0))
}

fn cesaro_on_stream(
    model: &dyn RdoModel,
    nu: usize,
    observable: &dyn InstantObservable,
    rng: &mut ChaCha12Rng,
) -> Result<ErgodicEstimate> {
    if nu == 0 {
        return Err(Error::InvalidParams("Cesàro length must be positive".into()));
    }
    let dim = model.dim();
    let (l, r) = observable.window();
    let w = l + r + 1;
    // buffer holds ω_n followed by the window ω_{n+1}..ω_{n+w}
    let mut buffer: Vec<f64> = (0..=w).map(|_| model.law().sample(rng)).collect();
    let mut product = ComplexMatrix::identity(dim);
    let mut acc = CompensatedSum::new(dim);
    let n_batches = 10.min(nu);
    let batch_len = nu.div_ceil(n_batches);
    let mut batch_means: Vec<ComplexMatrix> = Vec::with_capacity(n_batches);
    let mut batch_acc = CompensatedSum::new(dim);
    let mut batch_count = 0usize;
    for _ in 0..nu {
        let omega_n = buffer[0];
        product = product.mul(&model.rdo(omega_n));
        let term = product.mul(&observable.matrix(&buffer[1..]));
        acc.add(&term);
        batch_acc.add(&term);
        batch_count += 1;
        if batch_count == batch_len {
            batch_means.push(batch_acc.sum.scale_re(1.0 / batch_count as f64));
            batch_acc = CompensatedSum::new(dim);
            batch_count = 0;
        }
        buffer.rotate_left(1);
        let last = buffer.len() - 1;
        buffer[last] = model.law().sample(rng);
    }
    if batch_count > 0 {
        batch_means.push(batch_acc.sum.scale_re(1.0 / batch_count as f64));
    }
    let mean = acc.sum.scale_re(1.0 / nu as f64);
    Ok(ErgodicEstimate { std_error: batch_std_error(&batch_means, &mean), mean_product: mean, nu })
}

/// Running Cesàro means recorded every `every` steps (and at ν), for
/// time-series output. Same stream discipline as [`cesaro_estimate`].
pub fn cesaro_checkpoints(
    model: &dyn RdoModel,
    nu: usize,
    every: usize,
    observable: &dyn InstantObservable,
    seed: u64,
) -> Result<Vec<(usize, ComplexMatrix)>> {
    if nu == 0 || every == 0 {
        return Err(Error::InvalidParams("need positive length and spacing".into()));
    }
    let dim = model.dim();
    let (l, r) = observable.window();
    let w = l + r + 1;
    let mut rng = substream(seed, 0);
    let mut buffer: Vec<f64> = (0..=w).map(|_| model.law().sample(&mut rng)).collect();
    let mut product = ComplexMatrix::identity(dim);
    let mut acc = CompensatedSum::new(dim);
    let mut out = Vec::new();
    for n in 1..=nu {
        let omega_n = buffer[0];
        product = product.mul(&model.rdo(omega_n));
        acc.add(&product.mul(&observable.matrix(&buffer[1..])));
        buffer.rotate_left(1);
        let last = buffer.len() - 1;
        buffer[last] = model.law().sample(&mut rng);
        if n % every == 0 || n == nu {
            out.push((n, acc.sum.scale_re(1.0 / n as f64)));
        }
    }
    Ok(out)
}

fn batch_std_error(batch_means: &[ComplexMatrix], mean: &ComplexMatrix) -> f64 {
    let b = batch_means.len();
    if b < 2 {
        return f64::INFINITY;
    }
    let mut var_sum = 0.0;
    for bm in batch_means {
        var_sum += bm.sub(mean).frobenius_norm().powi(2);
    }
    (var_sum / (b as f64 * (b - 1) as f64)).sqrt()
}

/// Ensemble of independent Cesàro trajectories, reduced deterministically.
#[derive(Debug, Clone)]
pub struct EnsembleEstimate {
    pub mean_product: ComplexMatrix,
    /// Frobenius aggregate of the across-trajectory standard error.
    pub std_error: f64,
    pub per_trajectory: Vec<ErgodicEstimate>,
}

pub fn cesaro_ensemble(
    model: &dyn RdoModel,
    cfg: &TrajectoryConfig,
    observable: &dyn InstantObservable,
) -> Result<EnsembleEstimate> {
    cfg.validate()?;
    let runs: Vec<Result<ErgodicEstimate>> = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|t| {
            cesaro_on_stream(model, cfg.n_steps, observable, &mut substream(cfg.seed, t))
        })
        .collect();
    let mut per_trajectory = Vec::with_capacity(runs.len());
    for r in runs {
        per_trajectory.push(r?);
    }
    let k = per_trajectory.len();
    let dim = model.dim();
    let mut mean = ComplexMatrix::zeros(dim);
    for e in &per_trajectory {
        mean = mean.add(&e.mean_product);
    }
    mean = mean.scale_re(1.0 / k as f64);
    let std_error = if k >= 2 {
        let var: f64 = per_trajectory
            .iter()
            .map(|e| e.mean_product.sub(&mean).frobenius_norm().powi(2))
            .sum();
        (var / (k as f64 * (k - 1) as f64)).sqrt()
    } else {
        per_trajectory[0].std_error
    };
    Ok(EnsembleEstimate { mean_product: mean, std_error, per_trajectory })
}

/// θ extracted from an (approximate) rank-one limit |ψ_ref⟩⟨θ|·X: the
/// adjoint applied to the reference vector, normalized to ⟨θ, ψ_ref⟩ = 1.
pub fn theta_from_mean_product(mean: &ComplexMatrix, reference: &CVector) -> Result<CVector> {
    let theta = mean.adjoint().mul_vec(reference);
    let overlap = theta.inner(reference);
    if overlap.norm() < 1e-12 {
        return Err(Error::InvalidParams(
            "mean product has no component along the reference direction".into(),
        ));
    }
    Ok(theta.scale(ONE / overlap.conj()))
}

/// θ from the expected operator: fixed functional of E[M]* (Riesz route).
pub fn theta_target(model: &dyn RdoModel, nodes: usize) -> Result<CVector> {
    let mean = expected_operator(model, nodes);
    check_gate(&mean)?;
    invariant_functional(&mean, &model.reference_vector(), 1e-9)
}

/// θ from the resolvent route (1 - E[M_Q]*)^{-1} E[ψ]; equals the Riesz
/// route whenever the gate holds.
pub fn theta_via_resolvent(model: &dyn RdoModel, nodes: usize) -> Result<CVector> {
    let reference = model.reference_vector();
    let dim = model.dim();
    let rule = model.law().quadrature(nodes);
    let mut mean_psi = CVector::zeros(dim);
    let mut mean_mq = ComplexMatrix::zeros(dim);
    for &(omega, weight) in &rule {
        let m = model.rdo(omega);
        let psi = invariant_functional(&m, &reference, 1e-9)?;
        let mq = m.sub(&ComplexMatrix::outer(&reference, &psi));
        mean_psi = mean_psi.add(&psi.scale(Complex64::new(weight, 0.0)));
        mean_mq = mean_mq.add(&mq.scale_re(weight));
    }
    let resolvent = ComplexMatrix::identity(dim).sub(&mean_mq.adjoint()).inverse()?;
    Ok(resolvent.mul_vec(&mean_psi))
}

/// E[M] by quadrature over the model's law.
pub fn expected_operator(model: &dyn RdoModel, nodes: usize) -> ComplexMatrix {
    let rule = model.law().quadrature(nodes);
    let mut acc = ComplexMatrix::zeros(model.dim());
    for &(omega, weight) in &rule {
        acc = acc.add(&model.rdo(omega).scale_re(weight));
    }
    acc
}

fn check_gate(mean: &ComplexMatrix) -> Result<()> {
    let verdict = crate::rdo::gate_membership(mean, 1e-9);
    if verdict.member {
        Ok(())
    } else {
        Err(Error::GateViolation(format!(
            "expected operator fails the spectral gate (subdominant modulus {:.6})",
            verdict.subdominant_modulus
        )))
    }
}

/// The comparison target |ψ_ref⟩⟨θ| E[N] of the ergodic theorem.
pub fn cesaro_target(
    model: &dyn RdoModel,
    observable: &dyn InstantObservable,
    nodes: usize,
) -> Result<ComplexMatrix> {
    let theta = theta_target(model, nodes)?;
    let rank_one = ComplexMatrix::outer(&model.reference_vector(), &theta);
    Ok(rank_one.mul(&observable.expected(model.law())))
}

/// Least-squares fit of the remainder-product decay
/// ‖M_Q(ω_1)···M_Q(ω_n)‖ ≈ c e^{-α n}.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub alpha_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
}

pub fn mq_decay_rate(
    model: &dyn RdoModel,
    n_max: usize,
    n_reps: usize,
    seed: u64,
) -> Result<DecayFit> {
    if n_max < 4 || n_reps == 0 {
        return Err(Error::InvalidParams("need n_max >= 4 and n_reps >= 1".into()));
    }
    let reference = model.reference_vector();
    let n_min = n_max / 5;
    let samples: Vec<Result<Vec<(f64, f64)>>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, rep);
            let mut points = Vec::new();
            let mut product = ComplexMatrix::identity(model.dim());
            let mut log_scale = 0.0f64;
            for n in 1..=n_max {
                let omega = model.law().sample(&mut rng);
                let m = model.rdo(omega);
                // grouped functional: stays defined on gate-failing samples
                let psi = crate::rdo::unit_group_functional(&m, &reference, 1e-8)?;
                let mq = m.sub(&ComplexMatrix::outer(&reference, &psi));
                product = product.mul(&mq);
                let norm = product.op_norm();
                if norm < 1e-290 {
                    break;
                }
                // rescale to dodge underflow on long runs
                if norm < 1e-100 {
                    product = product.scale_re(1.0 / norm);
                    log_scale += norm.ln();
                }
                if n >= n_min {
                    points.push((n as f64, log_scale + norm.ln()));
                }
            }
            Ok(points)
        })
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rep in samples {
        for (x, y) in rep? {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParams("decay fit has too few points".into()));
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(DecayFit { alpha_hat: -slope, c_hat: intercept.exp(), r_squared: r2 })
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Heisenberg-picture expectation sequence ϱ(α^m(O)), m = 0..n_steps, for a
/// 2x2 initial density and a 2x2 observable, evolved through the sampled
/// product representation (dual recursion on the doubled space).
pub fn evolve_expectations(
    initial: &ComplexMatrix,
    model: &dyn RdoModel,
    observable: &ComplexMatrix,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if model.dim() != 4 {
        return Err(Error::DimensionMismatch(
            "expectation evolution works on the qubit doubled space".into(),
        ));
    }
    check_density_2x2(initial)?;
    let phi_obs = crate::linalg::observable_to_gns(observable);
    // ϱ(A) = ⟨χ_ρ, (A⊗1)ψ_ref⟩ with χ_ρ = √2 vec(ρ)
    let mut dual = crate::linalg::observable_to_gns(&initial.scale_re(2.0));
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(dual.inner(&phi_obs).re);
    for _ in 0..n_steps {
        let omega = model.law().sample(&mut rng);
        dual = model.rdo(omega).adjoint().mul_vec(&dual);
        out.push(dual.inner(&phi_obs).re);
    }
    Ok(out)
}

pub(crate) fn check_density_2x2(rho: &ComplexMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::BadDensity("initial state must be 2x2".into()));
    }
    if !rho.is_hermitian(1e-12) || (rho.trace().re - 1.0).abs() > 1e-12 {
        return Err(Error::BadDensity("initial state must be a unit-trace Hermitian".into()));
    }
    let (lo, _) = rho.hermitian_2x2_eigenvalues();
    if lo < -1e-12 {
        return Err(Error::BadDensity(format!("negative population {lo:.3e}")));
    }
    Ok(())
}

/// Pointwise (non-Cesàro) convergence diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct SharpConvergence {
    /// Whether the dual fixed vector is the same across the sampled family.
    pub deterministic_fixed_vector: bool,
    pub exponential: bool,
    pub rate: f64,
    pub r_squared: f64,
}

/// Checks whether M*(ω) shares one fixed vector over the support and, if
/// so, fits the pointwise decay of ‖M(ω_1)···M(ω_n) - |ψ_ref⟩⟨ψ*|‖.
pub fn sharp_convergence_check(
    model: &dyn RdoModel,
    n_max: usize,
    seed: u64,
) -> Result<SharpConvergence> {
    let reference = model.reference_vector();
    let probes = model.law().quadrature(9);
    let mut common: Option<CVector> = None;
    let mut deterministic = true;
    for &(omega, _) in &probes {
        let psi = invariant_functional(&model.rdo(omega), &reference, 1e-9)?;
        match &common {
            None => common = Some(psi),
            Some(c) => {
                if c.distance(&psi) > 1e-8 {
                    deterministic = false;
                    break;
                }
            }
        }
    }
    if !deterministic {
        return Ok(SharpConvergence {
            deterministic_fixed_vector: false,
            exponential: false,
            rate: 0.0,
            r_squared: 0.0,
        });
    }
    let psi_star = common.expect("probe rule is never empty");
    let limit = ComplexMatrix::outer(&reference, &psi_star);
    let mut rng = substream(seed, 0);
    let mut product = ComplexMatrix::identity(model.dim());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in 1..=n_max {
        let omega = model.law().sample(&mut rng);
        product = product.mul(&model.rdo(omega));
        let err = product.sub(&limit).op_norm();
        if err > 1e-12 {
            xs.push(n as f64);
            ys.push(err.ln());
        }
    }
    if xs.len() < 4 {
        // error hit machine precision almost immediately: call it exponential
        return Ok(SharpConvergence {
            deterministic_fixed_vector: true,
            exponential: true,
            rate: f64::INFINITY,
            r_squared: 1.0,
        });
    }
    let (slope, _, r2) = linear_fit(&xs, &ys);
    Ok(SharpConvergence {
        deterministic_fixed_vector: true,
        exponential: slope < 0.0 && r2 > 0.9,
        rate: -slope,
        r_squared: r2,
    })
}

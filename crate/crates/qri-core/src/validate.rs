//! Numbered acceptance checks: every tolerance is pinned here, and each
//! check reports what it measured so failures are diagnosable from the log
//! alone. The CLI `validate` command and the workspace acceptance test
//! suite both run these.

use crate::dist::Law;
use crate::ergodic::{
    cesaro_estimate, mq_decay_rate, sharp_convergence_check, theta_from_mean_product,
    ConstObservable,
};
use crate::linalg::{eig_decompose, gibbs_qubit, gns_to_observable, tracial_vector, ComplexMatrix};
use crate::rdo::gate_membership;
use crate::spin_fermion::{q_from_dual_block, q_probability, SpectralDensity, SpinFermionParams};
use crate::spin_spin::{
    asymptotic_beta, period, rdo_eigenvalues, rdo_map_via_partial_trace, tau_on_period_lattice,
    SpinSpinEnsemble, SpinSpinParams, Varying,
};
use crate::thermo::{production_slope, production_trajectory};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

/// Eigenvalue agreement between closed forms and the numeric route.
pub const TOL_SPECTRAL: f64 = 1e-9;
/// Periodicity of the eigenvalue moduli.
pub const TOL_PERIODICITY: f64 = 1e-10;
/// Population error for the ergodic Gibbs recovery (per seed).
pub const TOL_POPULATION: f64 = 5e-3;
/// Agreement of the random-temperature ergodic estimate with its closed form.
pub const TOL_BETA3: f64 = 5e-3;
/// Relative error of the fitted remainder decay rate.
pub const TOL_DECAY_REL: f64 = 0.10;
/// Second-law residual in closed form.
pub const TOL_SECOND_LAW: f64 = 1e-9;
/// Two-route agreement for the fermion-bath occupation probability.
pub const TOL_Q_TWO_ROUTE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub elapsed_ms: f64,
}

impl CriterionResult {
    fn finish(
        id: &'static str,
        name: &'static str,
        started: Instant,
        passed: bool,
        details: String,
    ) -> Self {
        CriterionResult {
            id,
            name,
            passed,
            details,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {:<4} {:<38} {:>9.1} ms  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_ms,
            self.details
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Linalg,
    SpinSpin,
    SpinFermion,
    Ergodic,
    Thermo,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        match name {
            "linalg" => Some(Suite::Linalg),
            "spin_spin" => Some(Suite::SpinSpin),
            "spin_fermion" => Some(Suite::SpinFermion),
            "ergodic" => Some(Suite::Ergodic),
            "thermo" => Some(Suite::Thermo),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

/// Run a suite with the given base seed (0 is the pinned CI seed).
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Linalg | Suite::All) {
        out.push(linalg_invariants(seed));
    }
    if matches!(suite, Suite::SpinSpin | Suite::All) {
        out.push(c01_spectral_oracle(seed));
        out.push(c02_periodicity(seed));
        out.push(c10_gate_boundary());
    }
    if matches!(suite, Suite::Ergodic | Suite::All) {
        out.push(c03_random_tau_gibbs(seed));
        out.push(c04_random_beta(seed));
        out.push(c05_remainder_decay(seed));
        out.push(c07_initial_state_independence(seed));
    }
    if matches!(suite, Suite::Thermo | Suite::All) {
        out.push(c06_second_law(seed));
    }
    if matches!(suite, Suite::SpinFermion | Suite::All) {
        out.push(c08_q_two_routes());
        out.push(c09_decoherence());
    }
    out
}

fn acceptance_base() -> SpinSpinParams {
    SpinSpinParams::new(1.0, 2.0, 0.5, 1.0, 1.0).expect("valid base parameters")
}

/// L0: quick structural invariants of the linear algebra layer.
pub fn linalg_invariants(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(1000));
    let mut worst: f64 = 0.0;
    let mut ok = true;
    // Riesz projection of a sampled RDO is idempotent and commutes with it
    for _ in 0..20 {
        let p = SpinSpinParams::new(
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..3.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.3..3.0),
        )
        .expect("valid random parameters");
        if tau_on_period_lattice(&p) {
            continue;
        }
        let m = crate::spin_spin::rdo_map(&p);
        let es = match eig_decompose(&m, 1e-10) {
            Ok(es) => es,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        let proj = match crate::linalg::riesz_projection(&es, Complex64::new(1.0, 0.0), 1e-8) {
            Ok(p) => p,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        worst = worst.max(proj.mul(&proj).sub(&proj).max_abs());
        worst = worst.max(proj.mul(&m).sub(&m.mul(&proj)).max_abs());
    }
    // partial trace is linear and unital; GNS round trip is exact
    let rho = gibbs_qubit(1.7, 0.9);
    let unital = crate::linalg::thermal_partial_trace(&ComplexMatrix::identity(4), &rho)
        .map(|a| a.sub(&ComplexMatrix::identity(2)).max_abs())
        .unwrap_or(f64::INFINITY);
    worst = worst.max(unital);
    let passed = ok && worst < 1e-9;
    CriterionResult::finish(
        "L0",
        "linalg structural invariants",
        t0,
        passed,
        format!("worst residual {worst:.2e}"),
    )
}

/// C1: closed-form spectrum {1, e0, e±} vs the numeric eigenvalues of the
/// partial-trace RDO, 200 random parameter sets, 1e-9 absolute.
pub fn c01_spectral_oracle(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    while count < 200 {
        let mut p = SpinSpinParams {
            e_s: rng.gen_range(0.5..3.0),
            e_e: rng.gen_range(0.5..3.0),
            lambda: rng.gen_range(-1.0..1.0),
            beta: rng.gen_range(0.1..5.0),
            tau: rng.gen_range(0.05..10.0),
        };
        // stay 1e-3 T away from the degenerate lattice
        if let Ok(t) = period(&p) {
            let r = p.tau / t;
            if (r - r.round()).abs() < 1e-3 {
                p.tau += 2e-3 * t;
            }
        }
        count += 1;
        let numeric = match rdo_map_via_partial_trace(&p).and_then(|m| eig_decompose(&m, 1e-12)) {
            Ok(es) => es,
            Err(e) => {
                return CriterionResult::finish(
                    "C1",
                    "spin-spin spectral oracle",
                    t0,
                    false,
                    format!("numeric route failed: {e}"),
                );
            }
        };
        let ev = rdo_eigenvalues(&p);
        let mut expect =
            vec![Complex64::new(1.0, 0.0), Complex64::new(ev.e0, 0.0), ev.e_minus, ev.e_plus];
        for lam in &numeric.values {
            let (idx, dist) = expect
                .iter()
                .enumerate()
                .map(|(i, e)| (i, (lam - e).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            worst = worst.max(dist);
            expect.remove(idx);
        }
    }
    CriterionResult::finish(
        "C1",
        "spin-spin spectral oracle",
        t0,
        worst < TOL_SPECTRAL,
        format!("worst |closed - numeric| = {worst:.2e} over 200 draws"),
    )
}

/// C2: |e#(tau)| = |e#(tau + T)| to 1e-10 for 100 random tau.
pub fn c02_periodicity(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(2));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = SpinSpinParams {
            e_s: rng.gen_range(0.5..3.0),
            e_e: rng.gen_range(0.5..3.0),
            lambda: rng.gen_range(-1.0..1.0),
            beta: rng.gen_range(0.1..5.0),
            tau: rng.gen_range(0.05..10.0),
        };
        let t = match period(&p) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let a = rdo_eigenvalues(&p);
        let mut shifted = p;
        shifted.tau += t;
        let b = rdo_eigenvalues(&shifted);
        worst = worst.max((a.e0 - b.e0).abs());
        worst = worst.max((a.e_minus.norm() - b.e_minus.norm()).abs());
        worst = worst.max((a.e_plus.norm() - b.e_plus.norm()).abs());
    }
    CriterionResult::finish(
        "C2",
        "eigenvalue moduli periodicity",
        t0,
        worst < TOL_PERIODICITY,
        format!("worst |..(tau)| vs |..(tau+T)| gap = {worst:.2e}"),
    )
}

/// C3: random interaction time recovers the Gibbs state at beta' = 2 with
/// population error <= 5e-3 on at least 7 of 8 seeds (nu = 1e5).
pub fn c03_random_tau_gibbs(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let ens = SpinSpinEnsemble::new(acceptance_base(), Varying::Tau, Law::uniform(0.8, 1.2))
        .expect("valid ensemble");
    let beta_prime = match asymptotic_beta(&ens) {
        Ok(b) => b,
        Err(e) => {
            return CriterionResult::finish(
                "C3",
                "random-time Gibbs recovery",
                t0,
                false,
                format!("{e}"),
            )
        }
    };
    let target = gibbs_qubit(1.0, beta_prime);
    let identity = ConstObservable(ComplexMatrix::identity(4));
    let results: Vec<f64> = (0..8)
        .map(|s| {
            let est = cesaro_estimate(&ens, 100_000, &identity, seed.wrapping_add(s))
                .expect("estimate");
            match theta_from_mean_product(&est.mean_product, &tracial_vector()) {
                Ok(theta) => {
                    let rho = gns_to_observable(&theta).adjoint().scale_re(0.5);
                    rho.sub(&target).max_abs()
                }
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    let successes = results.iter().filter(|&&e| e <= TOL_POPULATION).count();
    let worst = results.iter().cloned().fold(0.0, f64::max);
    CriterionResult::finish(
        "C3",
        "random-time Gibbs recovery",
        t0,
        successes >= 7,
        format!(
            "beta' = {beta_prime}, {successes}/8 seeds within {TOL_POPULATION:.0e} (worst {worst:.2e})"
        ),
    )
}

/// C4: random temperature: ergodic estimate of beta3 matches the closed
/// form within 5e-3, and beta3 differs from the naive average.
pub fn c04_random_beta(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let ens = SpinSpinEnsemble::new(acceptance_base(), Varying::Beta, Law::two_point(0.5, 2.0))
        .expect("valid ensemble");
    let beta3 = match asymptotic_beta(&ens) {
        Ok(b) => b,
        Err(e) => {
            return CriterionResult::finish(
                "C4",
                "random-temperature asymptotics",
                t0,
                false,
                format!("{e}"),
            )
        }
    };
    let naive = ens.law.mean() * ens.base.e_e / ens.base.e_s;
    let identity = ConstObservable(ComplexMatrix::identity(4));
    let cfg = crate::ergodic::TrajectoryConfig {
        n_steps: 300_000,
        n_trajectories: 8,
        seed,
        cesaro_window: 10_000,
    };
    let est = match crate::ergodic::cesaro_ensemble(&ens, &cfg, &identity) {
        Ok(e) => e,
        Err(e) => {
            return CriterionResult::finish(
                "C4",
                "random-temperature asymptotics",
                t0,
                false,
                format!("{e}"),
            )
        }
    };
    let estimate = theta_from_mean_product(&est.mean_product, &tracial_vector())
        .map(|theta| {
            let rho = gns_to_observable(&theta).adjoint().scale_re(0.5);
            (rho[(0, 0)].re / rho[(1, 1)].re).ln() / ens.base.e_s
        })
        .unwrap_or(f64::INFINITY);
    let err = (estimate - beta3).abs();
    let separated = (beta3 - naive).abs() > 0.1;
    CriterionResult::finish(
        "C4",
        "random-temperature asymptotics",
        t0,
        err <= TOL_BETA3 && separated,
        format!(
            "beta3 = {beta3:.6} (estimate {estimate:.6}, err {err:.2e}); naive average {naive:.4}"
        ),
    )
}

/// C5: fitted remainder decay rate within 10% of the spectral prediction
/// -log(max subdominant modulus over the time support), positive on all
/// seeds.
pub fn c05_remainder_decay(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let law = Law::uniform(0.98, 1.02);
    let ens = SpinSpinEnsemble::new(acceptance_base(), Varying::Tau, law.clone())
        .expect("valid ensemble");
    // spectral target on a fine grid over the support
    let mut rho_max: f64 = 0.0;
    for i in 0..=400 {
        let tau = 0.98 + 0.04 * i as f64 / 400.0;
        let ev = rdo_eigenvalues(&ens.params_at(tau));
        rho_max = rho_max.max(ev.e0.max(ev.e_minus.norm()));
    }
    let target = -rho_max.ln();
    let mut alphas = Vec::new();
    let mut all_positive = true;
    for s in 0..4u64 {
        match mq_decay_rate(&ens, 400, 4, seed.wrapping_add(100 + s)) {
            Ok(fit) => {
                all_positive &= fit.alpha_hat > 0.0;
                alphas.push(fit.alpha_hat);
            }
            Err(e) => {
                return CriterionResult::finish(
                    "C5",
                    "remainder product decay",
                    t0,
                    false,
                    format!("{e}"),
                )
            }
        }
    }
    let mean_alpha = alphas.iter().sum::<f64>() / alphas.len() as f64;
    let rel = (mean_alpha - target).abs() / target;
    CriterionResult::finish(
        "C5",
        "remainder product decay",
        t0,
        all_positive && rel <= TOL_DECAY_REL,
        format!("alpha {mean_alpha:.4} vs spectral {target:.4} (rel dev {:.1}%)", rel * 100.0),
    )
}

/// C6: second law at deterministic beta: closed-form residual <= 1e-9 and
/// trajectory route consistent within 3 standard errors across seeds.
pub fn c06_second_law(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let ens = SpinSpinEnsemble::new(acceptance_base(), Varying::Tau, Law::uniform(0.8, 1.2))
        .expect("valid ensemble");
    let report = match crate::thermo::flux_report(&ens, 64) {
        Ok(r) => r,
        Err(e) => {
            return CriterionResult::finish("C6", "second law", t0, false, format!("{e}"))
        }
    };
    let closed_ok = report.second_law_residual.map(|r| r <= TOL_SECOND_LAW).unwrap_or(false);
    // trajectory route: per-seed residual slopes
    let beta = ens.base.beta;
    let mixed = ComplexMatrix::identity(2).scale_re(0.5);
    let mut residuals = Vec::new();
    for s in 0..4u64 {
        match production_trajectory(&ens, &mixed, 20_000, seed.wrapping_add(200 + s)) {
            Ok(tr) => {
                let se = production_slope(&tr.delta_e, 1_000);
                let ss = production_slope(&tr.delta_s, 1_000);
                residuals.push(ss - beta * se);
            }
            Err(e) => {
                return CriterionResult::finish("C6", "second law", t0, false, format!("{e}"))
            }
        }
    }
    let mean_res = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let var = residuals.iter().map(|r| (r - mean_res) * (r - mean_res)).sum::<f64>()
        / (residuals.len() as f64 * (residuals.len() - 1) as f64);
    let se3 = 3.0 * var.sqrt().max(1e-9);
    let trajectory_ok = mean_res.abs() <= se3;
    CriterionResult::finish(
        "C6",
        "second law",
        t0,
        closed_ok && trajectory_ok,
        format!(
            "closed residual {:.2e}; trajectory residual {mean_res:.2e} (3se {se3:.2e})",
            report.second_law_residual.unwrap_or(f64::NAN)
        ),
    )
}

/// C7: ground-state and maximally-mixed initial states give the same Cesàro
/// limit of the sigma_z expectation within 2x combined standard error. Uses
/// the random-temperature chain, where convergence holds only in the
/// ergodic mean, so the limits carry genuine Monte Carlo error.
pub fn c07_initial_state_independence(seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let ens = SpinSpinEnsemble::new(acceptance_base(), Varying::Beta, Law::two_point(0.5, 2.0))
        .expect("valid ensemble");
    let sz = ComplexMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    let ground = ComplexMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let mixed = ComplexMatrix::identity(2).scale_re(0.5);
    let (n_steps, burn, n_seeds) = (30_000usize, 3_000usize, 6u64);
    let cesaro_tail = |initial: &ComplexMatrix, offset: u64| -> (f64, f64) {
        let means: Vec<f64> = (0..n_seeds)
            .map(|s| {
                let series = crate::ergodic::evolve_expectations(
                    initial,
                    &ens,
                    &sz,
                    n_steps,
                    seed.wrapping_add(offset + s),
                )
                .expect("valid evolution");
                let tail = &series[burn..];
                tail.iter().sum::<f64>() / tail.len() as f64
            })
            .collect();
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (means.len() as f64 * (means.len() - 1) as f64);
        (mean, var)
    };
    let (mean_g, var_g) = cesaro_tail(&ground, 300);
    let (mean_m, var_m) = cesaro_tail(&mixed, 400);
    let diff = (mean_g - mean_m).abs();
    let band = 2.0 * (var_g + var_m).sqrt().max(1e-9);
    CriterionResult::finish(
        "C7",
        "initial-state independence",
        t0,
        diff <= band,
        format!("limits {mean_g:.6} vs {mean_m:.6}, diff {diff:.2e} <= 2se {band:.2e}"),
    )
}

/// C8: two-route agreement for the fermion-bath occupation probability.
pub fn c08_q_two_routes() -> CriterionResult {
    let t0 = Instant::now();
    let p = acceptance_fermion_params();
    let (qa, qb) = match (q_probability(&p), q_from_dual_block(&p)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return CriterionResult::finish(
                "C8",
                "fermion-bath q, two routes",
                t0,
                false,
                format!("{e}"),
            )
        }
    };
    let diff = (qa.q - qb.q).abs();
    let eps = p.epsilon();
    let budget = eps.powi(3) + p.lambda * p.lambda;
    CriterionResult::finish(
        "C8",
        "fermion-bath q, two routes",
        t0,
        diff <= TOL_Q_TWO_ROUTE && qa.in_unit_interval && qb.in_unit_interval,
        format!(
            "q = {:.8} (expansion) vs {:.8} (block); diff {diff:.2e} <= {TOL_Q_TWO_ROUTE:.0e}, budget {budget:.2e}",
            qa.q, qb.q
        ),
    )
}

/// C9: decoherence: the asymptotic sigma_x expectation vanishes at
/// expansion order; both routes stay below lambda^2.
pub fn c09_decoherence() -> CriterionResult {
    let t0 = Instant::now();
    let p = acceptance_fermion_params();
    let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let expansion = match crate::spin_fermion::asymptotic_state_expansion(&p, &sx) {
        Ok(v) => v,
        Err(e) => {
            return CriterionResult::finish("C9", "decoherence", t0, false, format!("{e}"))
        }
    };
    // block route: the expected second-order dual block only populates the
    // diagonal sector, so the off-diagonal expectation it induces is zero
    let q = match q_from_dual_block(&p) {
        Ok(q) => q,
        Err(e) => {
            return CriterionResult::finish("C9", "decoherence", t0, false, format!("{e}"))
        }
    };
    let block_value = q.q * sx[(0, 0)].re + (1.0 - q.q) * sx[(1, 1)].re;
    let lambda_sq = p.lambda * p.lambda;
    let passed = expansion.value.abs() <= lambda_sq && block_value.abs() <= lambda_sq;
    CriterionResult::finish(
        "C9",
        "decoherence",
        t0,
        passed,
        format!(
            "sigma_x expectation {:.1e} (expansion) / {:.1e} (block) <= lambda^2 = {lambda_sq:.1e}",
            expansion.value, block_value
        ),
    )
}

/// C10 (library half): a point mass exactly on the period lattice fails the
/// spectral gate. The exit-code half lives in the CLI integration tests.
pub fn c10_gate_boundary() -> CriterionResult {
    let t0 = Instant::now();
    let base = acceptance_base();
    let t = period(&base).expect("splitting positive");
    let mut on_lattice = base;
    on_lattice.tau = t;
    let verdict = gate_membership(&crate::spin_spin::rdo_map(&on_lattice), 1e-6);
    let ens = SpinSpinEnsemble::new(base, Varying::Tau, Law::Point(t)).expect("valid ensemble");
    let hypothesis_rejected = ens.check_gate_hypothesis().is_err();
    CriterionResult::finish(
        "C10",
        "gate boundary at the period",
        t0,
        !verdict.member && hypothesis_rejected,
        format!(
            "membership {} (subdominant modulus {:.10}), hypothesis rejected: {hypothesis_rejected}",
            verdict.member, verdict.subdominant_modulus
        ),
    )
}

fn acceptance_fermion_params() -> SpinFermionParams {
    SpinFermionParams {
        lambda: 0.05,
        tau0: 1.3,
        sigma_law: Law::uniform(-0.05, 0.05),
        beta_law: Law::Point(1.0),
        density: SpectralDensity::default_bath(40.0, 256),
    }
}

/// The convergence-diagnostic counterpart of C3, used by the CLI report:
/// random-time chains converge pointwise, random-temperature ones only in
/// the ergodic mean.
pub fn convergence_mode_probe(seed: u64) -> (bool, bool) {
    let tau_ens = SpinSpinEnsemble::new(acceptance_base(), Varying::Tau, Law::uniform(0.8, 1.2))
        .expect("valid ensemble");
    let beta_ens =
        SpinSpinEnsemble::new(acceptance_base(), Varying::Beta, Law::two_point(0.5, 2.0))
            .expect("valid ensemble");
    let a = sharp_convergence_check(&tau_ens, 300, seed).map(|s| s.exponential).unwrap_or(false);
    let b = sharp_convergence_check(&beta_ens, 300, seed)
        .map(|s| s.deterministic_fixed_vector)
        .unwrap_or(true);
    (a, !b)
}

#[cfg(test)]
mod tests {
    use super::*;

    // The full acceptance run lives in the workspace acceptance test
    // target; here we only make sure the wiring returns sane shapes.
    #[test]
    fn suites_produce_results() {
        let r = run_suite(Suite::SpinFermion, 0);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|c| !c.details.is_empty()));
        assert!(Suite::parse("thermo") == Some(Suite::Thermo));
        assert!(Suite::parse("bogus").is_none());
    }

    #[test]
    fn fast_criteria_pass() {
        assert!(c01_spectral_oracle(0).passed);
        assert!(c02_periodicity(0).passed);
        assert!(c10_gate_boundary().passed);
        assert!(c08_q_two_routes().passed);
        assert!(c09_decoherence().passed);
        assert!(linalg_invariants(0).passed);
    }

    #[test]
    fn spectral_comparator_has_teeth() {
        // mutation sanity: a 1e-3 perturbation of the closed-form e0 must
        // not survive the 1e-9 matching used by the spectral oracle
        let p = SpinSpinParams::new(1.1, 2.2, 0.4, 0.9, 1.3).unwrap();
        let numeric = rdo_map_via_partial_trace(&p)
            .and_then(|m| eig_decompose(&m, 1e-12))
            .unwrap();
        let ev = rdo_eigenvalues(&p);
        let mutated = [
            Complex64::new(1.0, 0.0),
            Complex64::new(ev.e0 + 1e-3, 0.0),
            ev.e_minus,
            ev.e_plus,
        ];
        let worst = numeric
            .values
            .iter()
            .map(|lam| {
                mutated
                    .iter()
                    .map(|e| (lam - e).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert!(worst > TOL_SPECTRAL, "perturbed spectrum must be rejected, got {worst:.2e}");
    }
}

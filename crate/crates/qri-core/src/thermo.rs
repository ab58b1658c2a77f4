//! Macroscopic bookkeeping for the spin-spin chain: the total-energy jump
//! per interaction, its asymptotic rate, the entropy production rate, and
//! the second-law identity dS = β dE for deterministic chain temperature.
//!
//! All flux observables are effective 2x2 operators obtained by the
//! Gibbs-weighted partial trace over a fresh environment qubit; rates pair
//! them with the asymptotic state extracted from the expected RDO.

use crate::dist::Law;
use crate::ergodic::{theta_from_mean_product, InstantObservable};
use crate::rdo::RdoModel;
use crate::linalg::{gibbs_qubit, gns_to_observable, thermal_partial_trace, ComplexMatrix};
use crate::spin_spin::{
    interaction_matrix, propagator, rdo_map, SpinSpinEnsemble, SpinSpinParams, Varying,
};
use crate::Result;

/// λ · (Gibbs-weighted partial trace of v): the interaction energy seen by
/// the system against a fresh environment.
pub fn incoming_interaction_energy(p: &SpinSpinParams) -> Result<ComplexMatrix> {
    let v = interaction_matrix().scale_re(p.lambda);
    thermal_partial_trace(&v, &gibbs_qubit(p.e_e, p.beta))
}

/// Partial trace of α^τ(λv): the interaction energy after one full step.
pub fn outgoing_interaction_energy(p: &SpinSpinParams) -> Result<ComplexMatrix> {
    let u = propagator(p, p.tau);
    let evolved = u.mul(&interaction_matrix().scale_re(p.lambda)).mul(&u.adjoint());
    thermal_partial_trace(&evolved, &gibbs_qubit(p.e_e, p.beta))
}

/// Effective energy-jump observable: ptrace(λv - α^τ(λv)). Hermitian; its
/// expectation in the asymptotic state is the energy production rate.
pub fn energy_flux_operator(p: &SpinSpinParams) -> Result<ComplexMatrix> {
    Ok(incoming_interaction_energy(p)?.sub(&outgoing_interaction_energy(p)?))
}

/// Effective entropy-jump observable:
/// β · ptrace((h_s + λv) - α^τ(h_s + λv)). Hermitian.
pub fn entropy_flux_operator(p: &SpinSpinParams) -> Result<ComplexMatrix> {
    let mut h_s4 = ComplexMatrix::zeros(4);
    h_s4[(2, 2)] = p.e_s.into();
    h_s4[(3, 3)] = p.e_s.into();
    let x = h_s4.add(&interaction_matrix().scale_re(p.lambda));
    let u = propagator(p, p.tau);
    let evolved = u.mul(&x).mul(&u.adjoint());
    let rho_env = gibbs_qubit(p.e_e, p.beta);
    let flux = thermal_partial_trace(&x, &rho_env)?
        .sub(&thermal_partial_trace(&evolved, &rho_env)?);
    Ok(flux.scale_re(p.beta))
}

/// Asymptotic system density of a model: the rank-one limit functional of
/// the expected RDO, read back as a 2x2 density matrix.
pub fn asymptotic_density(model: &dyn RdoModel, nodes: usize) -> Result<ComplexMatrix> {
    let theta = crate::ergodic::theta_target(model, nodes)?;
    Ok(gns_to_observable(&theta).adjoint().scale_re(0.5))
}

fn expected_flux(
    ensemble: &SpinSpinEnsemble,
    nodes: usize,
    flux: impl Fn(&SpinSpinParams) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let rule = ensemble.law.quadrature(nodes);
    let mut acc = ComplexMatrix::zeros(2);
    for &(omega, weight) in &rule {
        acc = acc.add(&flux(&ensemble.params_at(omega))?.scale_re(weight));
    }
    Ok(acc)
}

/// Asymptotic energy production per interaction: ϱ₊(E[energy flux]).
pub fn de_plus(ensemble: &SpinSpinEnsemble, nodes: usize) -> Result<f64> {
    rate_against_state(ensemble, nodes, energy_flux_operator)
}

/// Asymptotic entropy production per interaction: ϱ₊(E[β(ω) entropy flux]).
pub fn ds_plus(ensemble: &SpinSpinEnsemble, nodes: usize) -> Result<f64> {
    rate_against_state(ensemble, nodes, entropy_flux_operator)
}

fn rate_against_state(
    ensemble: &SpinSpinEnsemble,
    nodes: usize,
    flux: impl Fn(&SpinSpinParams) -> Result<ComplexMatrix>,
) -> Result<f64> {
    let mean_flux = expected_flux(ensemble, nodes, flux)?;
    // zero flux gives zero rate against any state; this keeps the
    // uncoupled chain (where the gate is degenerate) well-defined
    if mean_flux.max_abs() < 1e-14 {
        return Ok(0.0);
    }
    ensemble.check_gate_hypothesis()?;
    let rho = asymptotic_density(ensemble, nodes)?;
    Ok(rho.mul(&mean_flux).trace().re)
}

/// Production-rate summary. `beta_effective` is None when the chain
/// temperature itself is random, in which case no second-law residual is
/// reported (the identity dS = β dE needs a deterministic β).
#[derive(Debug, Clone, Copy)]
pub struct FluxReport {
    pub de_plus: f64,
    pub ds_plus: f64,
    pub de_plus_per_unit_time: f64,
    pub beta_effective: Option<f64>,
    pub second_law_residual: Option<f64>,
}

pub fn flux_report(ensemble: &SpinSpinEnsemble, nodes: usize) -> Result<FluxReport> {
    let de = de_plus(ensemble, nodes)?;
    let ds = ds_plus(ensemble, nodes)?;
    let beta_effective = match ensemble.vary {
        Varying::Beta => ensemble.law.point_value(),
        _ => Some(ensemble.base.beta),
    };
    let mean_tau = match ensemble.vary {
        Varying::Tau => ensemble.law.mean(),
        _ => ensemble.base.tau,
    };
    Ok(FluxReport {
        de_plus: de,
        ds_plus: ds,
        de_plus_per_unit_time: de / mean_tau,
        beta_effective,
        second_law_residual: beta_effective.map(|b| (ds - b * de).abs()),
    })
}

/// Cumulative energy and entropy variations ΔE(m), ΔS(m) along one sampled
/// trajectory started from `initial`, m = 1..n_steps. The energy jump at
/// step k sees the pair (ω_k, ω_{k+1}): the fresh element k+1 is probed
/// before its own interaction.
#[derive(Debug, Clone)]
pub struct ProductionTrajectory {
    pub delta_e: Vec<f64>,
    pub delta_s: Vec<f64>,
}

pub fn cumulative_energy(
    ensemble: &SpinSpinEnsemble,
    initial: &ComplexMatrix,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(production_trajectory(ensemble, initial, n_steps, seed)?.delta_e)
}

pub fn production_trajectory(
    ensemble: &SpinSpinEnsemble,
    initial: &ComplexMatrix,
    n_steps: usize,
    seed: u64,
) -> Result<ProductionTrajectory> {
    crate::ergodic::check_density_2x2(initial)?;
    let mut rng = crate::ergodic::substream(seed, 0);
    let mut omega_cur = ensemble.law.sample(&mut rng);
    let mut rho = initial.clone();
    let mut delta_e = Vec::with_capacity(n_steps);
    let mut delta_s = Vec::with_capacity(n_steps);
    let (mut acc_e, mut acc_s) = (0.0f64, 0.0f64);
    for _ in 0..n_steps {
        let omega_next = ensemble.law.sample(&mut rng);
        let p_cur = ensemble.params_at(omega_cur);
        let p_next = ensemble.params_at(omega_next);
        // state after interacting with element k
        let rho_next = crate::spin_spin::apply_dual(&rdo_map(&p_cur), &rho);
        let probe_next = incoming_interaction_energy(&p_next)?;
        let jump = rho_next.mul(&probe_next).trace().re
            - rho.mul(&outgoing_interaction_energy(&p_cur)?).trace().re;
        acc_e += jump;
        delta_e.push(acc_e);
        // entropy jump: β_k (j(k) + drift of h_s + interaction bookkeeping)
        let h_s = ComplexMatrix::diag(&[0.0.into(), p_cur.e_s.into()]);
        let before = rho.mul(&h_s.add(&incoming_interaction_energy(&p_cur)?)).trace().re;
        let after = rho_next.mul(&h_s.add(&probe_next)).trace().re;
        acc_s += p_cur.beta * (jump + before - after);
        delta_s.push(acc_s);
        rho = rho_next;
        omega_cur = omega_next;
    }
    Ok(ProductionTrajectory { delta_e, delta_s })
}

/// The energy jump as an instantaneous observable for the ergodic engine:
/// at step n the matrix sees (ω_{n+1}, ω_{n+2}) and equals
/// M(ω_{n+1})·(X_in(ω_{n+2})⊗1) - (X_out(ω_{n+1})⊗1).
pub struct EnergyJumpObservable<'a> {
    pub ensemble: &'a SpinSpinEnsemble,
}

impl InstantObservable for EnergyJumpObservable<'_> {
    fn window(&self) -> (usize, usize) {
        (0, 1)
    }

    fn matrix(&self, window: &[f64]) -> ComplexMatrix {
        let p_cur = self.ensemble.params_at(window[0]);
        let p_next = self.ensemble.params_at(window[1]);
        let id2 = ComplexMatrix::identity(2);
        let x_in = incoming_interaction_energy(&p_next).expect("valid density by construction");
        let x_out = outgoing_interaction_energy(&p_cur).expect("valid density by construction");
        rdo_map(&p_cur).mul(&x_in.kron(&id2)).sub(&x_out.kron(&id2))
    }

    fn expected(&self, law: &Law) -> ComplexMatrix {
        let id2 = ComplexMatrix::identity(2);
        let rule = law.quadrature(64);
        let mut mean_rdo = ComplexMatrix::zeros(4);
        let mut mean_in = ComplexMatrix::zeros(2);
        let mut mean_out = ComplexMatrix::zeros(2);
        for &(omega, w) in &rule {
            let p = self.ensemble.params_at(omega);
            mean_rdo = mean_rdo.add(&rdo_map(&p).scale_re(w));
            mean_in = mean_in
                .add(&incoming_interaction_energy(&p).expect("valid density").scale_re(w));
            mean_out = mean_out
                .add(&outgoing_interaction_energy(&p).expect("valid density").scale_re(w));
        }
        mean_rdo.mul(&mean_in.kron(&id2)).sub(&mean_out.kron(&id2))
    }
}

/// Telescoping check: the drift of the bare system energy has vanishing
/// asymptotic expectation, ϱ₊(E[ptrace(h_s - α^τ(h_s))]) = 0.
pub fn system_energy_drift(ensemble: &SpinSpinEnsemble, nodes: usize) -> Result<f64> {
    let rho = asymptotic_density(ensemble, nodes)?;
    let drift = expected_flux(ensemble, nodes, |p| {
        let mut h_s4 = ComplexMatrix::zeros(4);
        h_s4[(2, 2)] = p.e_s.into();
        h_s4[(3, 3)] = p.e_s.into();
        let u = propagator(p, p.tau);
        let rho_env = gibbs_qubit(p.e_e, p.beta);
        Ok(thermal_partial_trace(&h_s4, &rho_env)?
            .sub(&thermal_partial_trace(&u.mul(&h_s4).mul(&u.adjoint()), &rho_env)?))
    })?;
    Ok(rho.mul(&drift).trace().re)
}

/// Convenience wrapper used by reporting code: the asymptotic density
/// estimated from a finite Cesàro mean rather than the exact expectation.
pub fn density_from_cesaro(mean_product: &ComplexMatrix) -> Result<ComplexMatrix> {
    let theta = theta_from_mean_product(mean_product, &crate::linalg::tracial_vector())?;
    Ok(gns_to_observable(&theta).adjoint().scale_re(0.5))
}

/// ϱ₊(E[N]) for an instantaneous observable: the scalar the Cesàro averages
/// of ϱ(α^m(O)) converge to.
pub fn asymptotic_observable_rate(
    ensemble: &SpinSpinEnsemble,
    observable: &dyn InstantObservable,
    nodes: usize,
) -> Result<f64> {
    let theta = crate::ergodic::theta_target(ensemble, nodes)?;
    let mean_n = observable.expected(&ensemble.law);
    let value = theta.inner(&mean_n.mul_vec(&crate::linalg::tracial_vector()));
    Ok(value.re)
}

/// Fit a straight line through (m, ΔE(m)) over the trailing window and
/// return the slope (the trajectory estimate of the production rate).
pub fn production_slope(series: &[f64], from: usize) -> f64 {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .enumerate()
        .skip(from)
        .map(|(i, &v)| ((i + 1) as f64, v))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

//! Model-agnostic layer over reduced dynamics operators: invariant
//! functionals, the rank-one + strictly-contracting decomposition, the
//! spectral gate test, the dual Markov recursion, and expectations of
//! random RDOs.

use crate::dist::{Law, DEFAULT_NODES};
use crate::linalg::{eig_decompose, riesz_projection, ComplexMatrix};
use crate::{CVector, Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A family of reduced dynamics operators indexed by one scalar random
/// parameter. Implementations must guarantee that every `rdo(omega)` fixes
/// `reference_vector()` and has spectrum inside the closed unit disk.
pub trait RdoModel: Sync {
    /// Dimension of the carrier space (4 for the qubit models' doubled space).
    fn dim(&self) -> usize;

    /// Law of the scalar parameter.
    fn law(&self) -> &Law;

    /// The operator at parameter value `omega`.
    fn rdo(&self, omega: f64) -> ComplexMatrix;

    /// The deterministic vector fixed by every member of the family.
    fn reference_vector(&self) -> CVector;

    /// Interaction time at `omega`.
    fn tau_of(&self, omega: f64) -> f64;
}

/// One sampled reduced dynamics operator, validated on construction:
/// the reference vector is fixed to 1e-10 and no eigenvalue modulus exceeds
/// 1 + 1e-9.
#[derive(Debug, Clone)]
pub struct RdoSample {
    pub m: ComplexMatrix,
    pub omega_tag: u64,
    pub tau: f64,
}

impl RdoSample {
    pub fn new(m: ComplexMatrix, omega_tag: u64, tau: f64) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "RDO samples act on the 4-dimensional doubled space, got {}",
                m.dim()
            )));
        }
        let psi = crate::linalg::tracial_vector();
        let fix = m.mul_vec(&psi).distance(&psi);
        if fix > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "reference vector not fixed: residual {fix:.3e}"
            )));
        }
        let es = eig_decompose(&m, 1e-12)?;
        if es.spectral_radius() > 1.0 + 1e-9 {
            return Err(Error::InvalidParams(format!(
                "spectral radius {} outside the closed unit disk",
                es.spectral_radius()
            )));
        }
        Ok(RdoSample { m, omega_tag, tau })
    }
}

/// The rank-one + remainder splitting m = |ψ_ref⟩⟨ψ(ω)| + QmQ.
#[derive(Debug, Clone)]
pub struct RdoDecomposition {
    /// Rank-one part |ψ_ref⟩⟨ψ(ω)|.
    pub p: ComplexMatrix,
    /// Remainder QmQ, which vanishes on the invariant direction.
    pub m_q: ComplexMatrix,
    /// Invariant functional ψ(ω), normalized so ⟨ψ(ω), ψ_ref⟩ = 1.
    pub psi: CVector,
}

/// Fixed functional of the dual operator: ψ(ω) with m*ψ(ω) = ψ(ω) and
/// ⟨ψ(ω), ψ_ref⟩ = 1. Requires the eigenvalue 1 of `m` to be simple.
pub fn invariant_functional(m: &ComplexMatrix, reference: &CVector, tol: f64) -> Result<CVector> {
    let es = eig_decompose(m, tol)?;
    let p1 = riesz_projection(&es, ONE, tol)?;
    let psi = p1.adjoint().mul_vec(reference);
    let overlap = psi.inner(reference);
    if overlap.norm() < 1e-12 {
        return Err(Error::InvalidParams(
            "invariant functional orthogonal to the reference vector".into(),
        ));
    }
    // ⟨ψ, ψ_ref⟩ = 1 after dividing by the conjugate of the overlap
    Ok(psi.scale(ONE / overlap.conj()))
}

/// Like [`invariant_functional`], but projecting onto the whole eigenvalue
/// group within `cluster_tol` of 1. Falls back to the full group when the
/// unit eigenvalue is degenerate (it is exactly on the period lattice),
/// where the rank-one + remainder splitting still holds with the grouped
/// functional.
pub fn unit_group_functional(
    m: &ComplexMatrix,
    reference: &CVector,
    cluster_tol: f64,
) -> Result<CVector> {
    let es = eig_decompose(m, cluster_tol)?;
    let hits = es.matches(ONE, cluster_tol);
    if hits.is_empty() {
        return Err(Error::EigenvalueNotFound { target: ONE });
    }
    let mut psi = CVector::zeros(m.dim());
    for &i in &hits {
        // P1* ψ_ref accumulated over the group: |u_i⟩⟨v_i| ψ_ref
        let coeff = es.right.column(i).inner(reference);
        psi = psi.add(&es.left.column(i).scale(coeff));
    }
    let overlap = psi.inner(reference);
    if overlap.norm() < 1e-12 {
        return Err(Error::InvalidParams(
            "unit eigengroup functional orthogonal to the reference vector".into(),
        ));
    }
    Ok(psi.scale(ONE / overlap.conj()))
}

/// Split a sample as rank-one plus remainder.
pub fn decompose(s: &RdoSample) -> Result<RdoDecomposition> {
    let reference = crate::linalg::tracial_vector();
    let psi = invariant_functional(&s.m, &reference, 1e-9)?;
    let p = ComplexMatrix::outer(&reference, &psi);
    let m_q = s.m.sub(&p);
    Ok(RdoDecomposition { p, m_q, psi })
}

/// Verdict of the spectral gate test: membership requires a simple
/// eigenvalue 1 and every other eigenvalue modulus at most 1 - tol.
#[derive(Debug, Clone, Copy)]
pub struct GateVerdict {
    pub member: bool,
    /// Largest modulus among non-unit eigenvalues.
    pub subdominant_modulus: f64,
    /// Numerical trouble (clustered or badly conditioned eigensystem);
    /// membership is reported false when set.
    pub ill_conditioned: bool,
}

/// Spectral gate membership with margin `tol` on the subdominant modulus.
pub fn gate_membership(m: &ComplexMatrix, tol: f64) -> GateVerdict {
    let es = match eig_decompose(m, tol) {
        Ok(es) => es,
        Err(_) => {
            return GateVerdict {
                member: false,
                subdominant_modulus: f64::NAN,
                ill_conditioned: true,
            }
        }
    };
    let ones = es.matches(ONE, 1e-8);
    let sub = es.subdominant_modulus();
    let simple_one = ones.len() == 1;
    let ill = ones.iter().any(|&i| es.condition_flags[i]);
    GateVerdict {
        member: simple_one && !ill && sub <= 1.0 - tol,
        subdominant_modulus: sub,
        ill_conditioned: ill,
    }
}

/// The dual Markov process θ_n = m*(ω_n)···m*(ω_2)ψ(ω_1), n = 1..len.
pub fn theta_sequence(samples: &[RdoSample]) -> Result<Vec<CVector>> {
    let reference = crate::linalg::tracial_vector();
    let mut out = Vec::with_capacity(samples.len());
    let mut theta = match samples.first() {
        Some(s) => invariant_functional(&s.m, &reference, 1e-9)?,
        None => return Ok(out),
    };
    out.push(theta.clone());
    for s in &samples[1..] {
        theta = s.m.adjoint().mul_vec(&theta);
        out.push(theta.clone());
    }
    Ok(out)
}

/// How to compute the expectation of a random RDO.
#[derive(Debug, Clone, Copy)]
pub enum ExpectationMode {
    /// Exact finite sum or Gauss-Legendre quadrature with the given node
    /// count (0 picks the default).
    ClosedForm { nodes: usize },
    /// Monte Carlo average of `n` samples from the given seed.
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct ExpectedRdo {
    pub mean: ComplexMatrix,
    /// Entrywise standard errors (Monte Carlo mode only).
    pub std_error: Option<Vec<f64>>,
}

/// E[M] over the model's law.
pub fn expected_rdo(model: &dyn RdoModel, mode: ExpectationMode) -> Result<ExpectedRdo> {
    let n_dim = model.dim();
    match mode {
        ExpectationMode::ClosedForm { nodes } => {
            let rule = model.law().quadrature(if nodes == 0 { DEFAULT_NODES } else { nodes });
            if rule.is_empty() {
                return Err(Error::UnsupportedDistribution("empty support".into()));
            }
            let mut acc = ComplexMatrix::zeros(n_dim);
            for &(v, w) in &rule {
                acc = acc.add(&model.rdo(v).scale_re(w));
            }
            Ok(ExpectedRdo { mean: acc, std_error: None })
        }
        ExpectationMode::MonteCarlo { n, seed } => {
            if n == 0 {
                return Err(Error::InvalidParams("Monte Carlo expectation needs n >= 1".into()));
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut sum = ComplexMatrix::zeros(n_dim);
            let mut sum_sq = vec![0.0f64; n_dim * n_dim * 2];
            for _ in 0..n {
                let omega = model.law().sample(&mut rng);
                let m = model.rdo(omega);
                for i in 0..n_dim {
                    for j in 0..n_dim {
                        let c = m[(i, j)];
                        sum[(i, j)] += c;
                        sum_sq[2 * (i * n_dim + j)] += c.re * c.re;
                        sum_sq[2 * (i * n_dim + j) + 1] += c.im * c.im;
                    }
                }
            }
            let mean = sum.scale_re(1.0 / n as f64);
            let mut se = vec![0.0f64; n_dim * n_dim];
            for i in 0..n_dim {
                for j in 0..n_dim {
                    let k = i * n_dim + j;
                    let mu = mean[(i, j)];
                    let var_re = (sum_sq[2 * k] / n as f64 - mu.re * mu.re).max(0.0);
                    let var_im = (sum_sq[2 * k + 1] / n as f64 - mu.im * mu.im).max(0.0);
                    se[k] = ((var_re + var_im) / n as f64).sqrt();
                }
            }
            Ok(ExpectedRdo { mean, std_error: Some(se) })
        }
    }
}

//! The doubled-space (GNS) representation of a qubit in its tracial state,
//! and thermal partial traces over a qubit environment.
//!
//! Conventions, asserted throughout the test suite:
//! - tensor ordering is system ⊗ environment, with |i⟩⊗|j⟩ at index 2i + j
//!   (row-major Kronecker);
//! - the reference vector is ψ = (|00⟩ + |11⟩)/√2, so the vector attached to
//!   an observable A is (A⊗1)ψ, whose coordinates are vec(A)/√2 row-major.

use super::{CVector, ComplexMatrix, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// GNS vector of the tracial qubit state: (|00⟩ + |11⟩)/√2.
pub fn tracial_vector() -> CVector {
    let mut v = CVector::zeros(4);
    v.0[0] = Complex64::new(1.0 / SQRT2, 0.0);
    v.0[3] = Complex64::new(1.0 / SQRT2, 0.0);
    v
}

/// The unique 2x2 observable A with (A⊗1)ψ = phi.
pub fn gns_to_observable(phi: &CVector) -> ComplexMatrix {
    assert_eq!(phi.dim(), 4, "GNS vectors of a qubit live in dimension 4");
    let mut a = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            a[(i, j)] = phi.0[2 * i + j] * SQRT2;
        }
    }
    a
}

/// The GNS vector (A⊗1)ψ of an observable.
pub fn observable_to_gns(a: &ComplexMatrix) -> CVector {
    assert_eq!(a.dim(), 2);
    let mut phi = CVector::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            phi.0[2 * i + j] = a[(i, j)] / SQRT2;
        }
    }
    phi
}

/// Norm |||phi||| = operator norm of the observable attached to phi.
/// Reduced dynamics operators are contractions for this norm.
pub fn contraction_norm(phi: &CVector) -> f64 {
    gns_to_observable(phi).op_norm()
}

fn check_density(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::BadDensity(format!("expected 2x2, got {}x{}", rho.dim(), rho.dim())));
    }
    if !rho.is_finite() {
        return Err(Error::BadDensity("non-finite entries".into()));
    }
    if !rho.is_hermitian(tol) {
        return Err(Error::BadDensity("not Hermitian".into()));
    }
    if (rho.trace().re - 1.0).abs() > tol || rho.trace().im.abs() > tol {
        return Err(Error::BadDensity(format!("trace {} != 1", rho.trace())));
    }
    let (lo, _) = rho.hermitian_2x2_eigenvalues();
    if lo < -tol {
        return Err(Error::BadDensity(format!("negative eigenvalue {lo:.3e}")));
    }
    Ok(())
}

/// Density-weighted partial trace over the environment factor: the unique
/// 2x2 matrix A with Tr((B⊗1)·x·(1⊗ρ)) = Tr(B·A) for every B; concretely
/// A = Tr_env[(1⊗ρ) x].
pub fn thermal_partial_trace(x: &ComplexMatrix, rho_env: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "thermal_partial_trace expects a 4x4 input, got {}x{}",
            x.dim(),
            x.dim()
        )));
    }
    check_density(rho_env, 1e-12)?;
    let mut a = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = ZERO;
            for p in 0..2 {
                for q in 0..2 {
                    // [(1⊗ρ) x]_{(i,p),(j,p)} summed over p
                    acc += rho_env[(p, q)] * x[(2 * i + q, 2 * j + p)];
                }
            }
            a[(i, j)] = acc;
        }
    }
    Ok(a)
}

/// Gibbs density of a qubit with levels {0, e_level} at inverse temperature
/// beta: diag(1, e^{-beta e_level}) / Z.
pub fn gibbs_qubit(e_level: f64, beta: f64) -> ComplexMatrix {
    let w = (-beta * e_level).exp();
    let z = 1.0 + w;
    ComplexMatrix::diag(&[Complex64::new(1.0 / z, 0.0), Complex64::new(w / z, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_vector_maps_to_identity() {
        let a = gns_to_observable(&tracial_vector());
        assert!(a.approx_eq(&ComplexMatrix::identity(2), 1e-15));
        assert!((contraction_norm(&tracial_vector()) - 1.0).abs() < 1e-12);
        assert_eq!(contraction_norm(&CVector::zeros(4)), 0.0);
    }

    #[test]
    fn pauli_z_vector() {
        // (|00⟩ - |11⟩)/√2 corresponds to sigma_z = diag(1, -1)
        let mut phi = CVector::zeros(4);
        phi.0[0] = c(1.0 / SQRT2, 0.0);
        phi.0[3] = c(-1.0 / SQRT2, 0.0);
        let a = gns_to_observable(&phi);
        assert!(a.approx_eq(&ComplexMatrix::diag(&[ONE, c(-1.0, 0.0)]), 1e-15));
    }

    #[test]
    fn round_trip_random_observables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut a = ComplexMatrix::zeros(2);
            for i in 0..2 {
                for j in 0..2 {
                    a[(i, j)] = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                }
            }
            let back = gns_to_observable(&observable_to_gns(&a));
            assert!(back.approx_eq(&a, 1e-14));
        }
    }

    #[test]
    fn partial_trace_of_product_observable() {
        // x = A⊗C -> A * Tr(ρ C)
        let a = ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(0.0, 1.0)], &[c(2.0, 0.0), c(0.0, 0.0)]]);
        let cmat =
            ComplexMatrix::from_rows(&[&[c(0.5, 0.0), c(0.1, 0.2)], &[c(0.1, -0.2), c(0.3, 0.0)]]);
        let rho = gibbs_qubit(1.5, 0.8);
        let x = a.kron(&cmat);
        let got = thermal_partial_trace(&x, &rho).unwrap();
        let want = a.scale(rho.mul(&cmat).trace());
        assert!(got.approx_eq(&want, 1e-14));
        // x = 1⊗1 -> 1 for any density
        let got = thermal_partial_trace(&ComplexMatrix::identity(4), &rho).unwrap();
        assert!(got.approx_eq(&ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn partial_trace_defining_property() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let rho = gibbs_qubit(2.0, 1.3);
        for _ in 0..50 {
            let mut x = ComplexMatrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    x[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let a = thermal_partial_trace(&x, &rho).unwrap();
            let mut b = ComplexMatrix::zeros(2);
            for i in 0..2 {
                for j in 0..2 {
                    b[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let lhs = b.kron(&ComplexMatrix::identity(2)).mul(&x).mul(
                &ComplexMatrix::identity(2).kron(&rho),
            );
            assert!((lhs.trace() - b.mul(&a).trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn bad_densities_rejected() {
        let x = ComplexMatrix::identity(4);
        // trace != 1
        let bad = ComplexMatrix::diag(&[ONE, ONE]);
        assert!(matches!(thermal_partial_trace(&x, &bad), Err(Error::BadDensity(_))));
        // negative eigenvalue
        let bad = ComplexMatrix::diag(&[c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(thermal_partial_trace(&x, &bad), Err(Error::BadDensity(_))));
        // non-Hermitian
        let bad =
            ComplexMatrix::from_rows(&[&[c(0.5, 0.0), c(0.3, 0.0)], &[c(0.0, 0.0), c(0.5, 0.0)]]);
        assert!(matches!(thermal_partial_trace(&x, &bad), Err(Error::BadDensity(_))));
    }
}

//! Eigendecomposition of small dense complex matrices, including non-normal
//! ones, via complex Hessenberg reduction and shifted QR iteration to Schur
//! form. Eigenvectors come from back-substitution on the triangular factor;
//! left eigenvectors from the inverse of the right eigenvector matrix, so the
//! two families are biorthogonal by construction.

use super::{CVector, ComplexMatrix, ONE, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;

/// Spectral data of a (possibly non-normal) matrix.
///
/// Eigenvalues are sorted by descending modulus, ties broken by ascending
/// phase. `right` holds right eigenvectors as columns, `left` holds left
/// eigenvectors u_i as columns, normalized so that ⟨u_i, v_j⟩ = δ_ij.
/// `condition_flags[i]` marks eigenvalues that are clustered within the
/// requested tolerance or whose eigenvector pair is badly conditioned;
/// residual guarantees only apply to unflagged entries.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<Complex64>,
    pub right: ComplexMatrix,
    pub left: ComplexMatrix,
    pub condition_flags: Vec<bool>,
}

impl EigenSystem {
    /// Indices of eigenvalues within `tol` of `target`.
    pub fn matches(&self, target: Complex64, tol: f64) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &l)| (l - target).norm() <= tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus among eigenvalues excluding the single one closest to 1.
    pub fn subdominant_modulus(&self) -> f64 {
        if self.values.len() < 2 {
            return 0.0;
        }
        let closest = self
            .values
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - ONE).norm().partial_cmp(&(*b - ONE).norm()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != closest)
            .map(|(_, l)| l.norm())
            .fold(0.0, f64::max)
    }
}

/// Complex Givens rotation [[c, s], [-conj(s), c]] zeroing the second entry.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let rho = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / rho;
    let s = (f / f.norm()) * g.conj() / rho;
    (c, s)
}

/// Reduce to upper Hessenberg form: returns (H, Q) with A = Q H Q*.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut x = vec![ZERO; n - k - 1];
        for i in 0..x.len() {
            x[i] = h[(k + 1 + i, k)];
        }
        let xnorm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if xnorm <= 1e-300 {
            continue;
        }
        let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let vnorm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= 1e-300 {
            continue;
        }
        for xi in &mut x {
            *xi /= vnorm;
        }
        // left: rows k+1..n
        for j in 0..n {
            let mut dot = ZERO;
            for i in 0..x.len() {
                dot += x[i].conj() * h[(k + 1 + i, j)];
            }
            for i in 0..x.len() {
                let upd = 2.0 * x[i] * dot;
                h[(k + 1 + i, j)] -= upd;
            }
        }
        // right: columns k+1..n
        for i in 0..n {
            let mut dot = ZERO;
            for j in 0..x.len() {
                dot += h[(i, k + 1 + j)] * x[j];
            }
            for j in 0..x.len() {
                let upd = 2.0 * dot * x[j].conj();
                h[(i, k + 1 + j)] -= upd;
            }
        }
        // accumulate Q <- Q (I - 2 w w*)
        for i in 0..n {
            let mut dot = ZERO;
            for j in 0..x.len() {
                dot += q[(i, k + 1 + j)] * x[j];
            }
            for j in 0..x.len() {
                let upd = 2.0 * dot * x[j].conj();
                q[(i, k + 1 + j)] -= upd;
            }
        }
        // clean exact zeros below the subdiagonal
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Eigenvalue of the trailing 2x2 block closest to its bottom-right entry.
fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr2 = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr2 * tr2 - det).sqrt();
    let r1 = tr2 + disc;
    let r2 = tr2 - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Schur decomposition A = Z T Z* (T upper triangular) by shifted QR.
fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.dim();
    let (mut h, mut z) = hessenberg(a);
    if n <= 1 {
        return Ok((h, z));
    }
    let scale = h.frobenius_norm().max(1e-300);
    let defl = |x: f64, y: f64| f64::EPSILON * (x + y) + 1e-280 * scale;

    let mut hi = n - 1;
    let mut iters_at_hi = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n * n;
    loop {
        // deflate converged trailing eigenvalues
        while hi > 0 {
            let sub = h[(hi, hi - 1)].norm();
            if sub <= defl(h[(hi - 1, hi - 1)].norm(), h[(hi, hi)].norm()) {
                h[(hi, hi - 1)] = ZERO;
                hi -= 1;
                iters_at_hi = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        // active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            if sub <= defl(h[(lo - 1, lo - 1)].norm(), h[(lo, lo)].norm()) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }

        total += 1;
        iters_at_hi += 1;
        if total > max_total {
            return Err(Error::NonConvergence { norm: a.frobenius_norm() });
        }
        let mu = if iters_at_hi % 16 == 15 {
            // exceptional shift to break rare cycles
            let s = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + Complex64::new(1.1 * s, 0.31 * s)
        } else {
            wilkinson_shift(&h, hi)
        };

        // explicit single-shift QR step on the window: H <- Q* H Q
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            rots.push((i, c, s));
            // rows i, i+1
            for j in 0..n {
                let a1 = h[(i, j)];
                let a2 = h[(i + 1, j)];
                h[(i, j)] = c * a1 + s * a2;
                h[(i + 1, j)] = -s.conj() * a1 + c * a2;
            }
        }
        for &(i, c, s) in &rots {
            // columns i, i+1 of H and Z (right-multiply by G*)
            for r in 0..n {
                let a1 = h[(r, i)];
                let a2 = h[(r, i + 1)];
                h[(r, i)] = c * a1 + s.conj() * a2;
                h[(r, i + 1)] = -s * a1 + c * a2;
                let z1 = z[(r, i)];
                let z2 = z[(r, i + 1)];
                z[(r, i)] = c * z1 + s.conj() * z2;
                z[(r, i + 1)] = -s * z1 + c * z2;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    // zero strictly-lower remnants
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

/// Full eigendecomposition. `tol` controls the eigenvalue-cluster distance
/// below which entries are marked ill-conditioned.
pub fn eig_decompose(m: &ComplexMatrix, tol: f64) -> Result<EigenSystem> {
    let n = m.dim();
    if !m.is_finite() {
        return Err(Error::InvalidParams("matrix has non-finite entries".into()));
    }
    let (t, z) = schur(m)?;
    let t_norm = t.frobenius_norm().max(1e-300);
    let small = f64::EPSILON * t_norm * n as f64;

    let mut flags = vec![false; n];
    let mut right = ComplexMatrix::zeros(n);
    for i in 0..n {
        let lam = t[(i, i)];
        let mut y = vec![ZERO; n];
        y[i] = ONE;
        for j in (0..i).rev() {
            let mut s = ZERO;
            for k in j + 1..=i {
                s += t[(j, k)] * y[k];
            }
            let mut den = t[(j, j)] - lam;
            if den.norm() < small {
                den = Complex64::new(small, 0.0);
                flags[i] = true;
            }
            y[j] = -s / den;
        }
        let mut v = CVector::zeros(n);
        for r in 0..n {
            let mut acc = ZERO;
            for k in 0..=i {
                acc += z[(r, k)] * y[k];
            }
            v.0[r] = acc;
        }
        let nv = v.norm();
        if nv > 0.0 {
            // fix the phase so results are reproducible run to run
            let lead = (0..n)
                .max_by(|&a, &b| v.0[a].norm().partial_cmp(&v.0[b].norm()).unwrap())
                .unwrap();
            let phase = if v.0[lead] == ZERO { ONE } else { v.0[lead] / v.0[lead].norm() };
            v = v.scale(phase.conj() / nv);
        }
        right.set_column(i, &v);
    }

    let mut values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    // sort: descending modulus, ties by ascending phase
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (values[a].norm(), values[b].norm());
        mb.partial_cmp(&ma)
            .unwrap()
            .then(values[a].arg().partial_cmp(&values[b].arg()).unwrap())
    });
    let mut sorted_right = ComplexMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        sorted_right.set_column(new, &right.column(old));
    }
    values = order.iter().map(|&i| values[i]).collect();
    let mut sorted_flags: Vec<bool> = order.iter().map(|&i| flags[i]).collect();

    // left eigenvectors from rows of V^{-1}
    let left = match sorted_right.inverse() {
        Ok(w) => {
            let mut l = ComplexMatrix::zeros(n);
            for i in 0..n {
                let u = CVector(w.row(i).iter().map(|c| c.conj()).collect());
                l.set_column(i, &u);
            }
            l
        }
        Err(_) => {
            // defective (or numerically so): flag everything, fall back to
            // a ridge-regularized inverse so callers still get finite data
            for f in sorted_flags.iter_mut() {
                *f = true;
            }
            let vh = sorted_right.adjoint();
            let mut gram = vh.mul(&sorted_right);
            for i in 0..n {
                gram[(i, i)] += Complex64::new(1e-12, 0.0);
            }
            let w = gram.inverse().map(|g| g.mul(&vh)).unwrap_or_else(|_| ComplexMatrix::identity(n));
            let mut l = ComplexMatrix::zeros(n);
            for i in 0..n {
                let u = CVector(w.row(i).iter().map(|c| c.conj()).collect());
                l.set_column(i, &u);
            }
            l
        }
    };

    // cluster and eigenvector-condition flags
    for i in 0..n {
        for j in 0..n {
            if i != j && (values[i] - values[j]).norm() <= tol {
                sorted_flags[i] = true;
            }
        }
        let kappa = left.column(i).norm() * sorted_right.column(i).norm();
        if kappa > 1e8 {
            sorted_flags[i] = true;
        }
    }

    Ok(EigenSystem { values, right: sorted_right, left, condition_flags: sorted_flags })
}

/// Rank-one Riesz spectral projection |v⟩⟨u| onto the eigenspace of the
/// unique eigenvalue within `tol` of `target`.
pub fn riesz_projection(es: &EigenSystem, target: Complex64, tol: f64) -> Result<ComplexMatrix> {
    let hits = es.matches(target, tol);
    match hits.len() {
        0 => Err(Error::EigenvalueNotFound { target }),
        1 => {
            let i = hits[0];
            Ok(ComplexMatrix::outer(&es.right.column(i), &es.left.column(i)))
        }
        count => Err(Error::DegenerateEigenvalue { target, count }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(m: &ComplexMatrix, es: &EigenSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..m.dim() {
            let v = es.right.column(i);
            let mv = m.mul_vec(&v);
            let lv = v.scale(es.values[i]);
            worst = worst.max(mv.distance(&lv));
        }
        worst
    }

    #[test]
    fn identity_eigensystem() {
        let m = ComplexMatrix::identity(4);
        let es = eig_decompose(&m, 1e-12).unwrap();
        for l in &es.values {
            assert!((l - ONE).norm() < 1e-14);
        }
        // eigenvalue 1 is 4-fold degenerate: all flagged
        assert!(es.condition_flags.iter().all(|&f| f));
        assert!(residual(&m, &es) < 1e-12);
    }

    #[test]
    fn diagonal_matrix_recovered() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.25, 0.0)]);
        let es = eig_decompose(&m, 1e-10).unwrap();
        // sorted by descending modulus: 1, 0.5i, -0.5, 0.25
        assert!((es.values[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((es.values[3] - c(0.25, 0.0)).norm() < 1e-12);
        let mods: Vec<f64> = es.values.iter().map(|l| l.norm()).collect();
        assert!((mods[1] - 0.5).abs() < 1e-12 && (mods[2] - 0.5).abs() < 1e-12);
        // tie between 0.5i (phase pi/2) and -0.5 (phase pi): ascending phase
        assert!(es.values[1].im > 0.0 && es.values[2].re < 0.0);
        assert!(!es.condition_flags.iter().any(|&f| f));
        assert!(residual(&m, &es) < 1e-12);
    }

    #[test]
    fn non_normal_matrix_biorthogonality() {
        let m = ComplexMatrix::from_rows(&[
            &[c(0.9, 0.1), c(0.5, 0.0), c(0.0, 0.2), c(0.1, 0.0)],
            &[c(0.0, 0.0), c(0.3, -0.4), c(0.7, 0.0), c(0.0, 0.0)],
            &[c(0.2, 0.0), c(0.0, 0.1), c(-0.5, 0.0), c(0.3, 0.0)],
            &[c(0.0, 0.3), c(0.1, 0.0), c(0.0, 0.0), c(0.6, 0.2)],
        ]);
        let es = eig_decompose(&m, 1e-10).unwrap();
        assert!(residual(&m, &es) < 1e-10 * m.frobenius_norm());
        for i in 0..4 {
            for j in 0..4 {
                let ip = es.left.column(i).inner(&es.right.column(j));
                let expect = if i == j { ONE } else { ZERO };
                assert!(
                    (ip - expect).norm() < 1e-10,
                    "biorthogonality failed at ({i},{j}): {ip}"
                );
            }
        }
        // left vectors are eigenvectors of the adjoint
        let ma = m.adjoint();
        for i in 0..4 {
            let u = es.left.column(i);
            let r = ma.mul_vec(&u).distance(&u.scale(es.values[i].conj()));
            assert!(r < 1e-9, "left residual {r}");
        }
    }

    #[test]
    fn riesz_projection_cases() {
        // degenerate: identity
        let es = eig_decompose(&ComplexMatrix::identity(2), 1e-8).unwrap();
        match riesz_projection(&es, ONE, 1e-8) {
            Err(Error::DegenerateEigenvalue { count, .. }) => assert_eq!(count, 2),
            other => panic!("expected degenerate, got {other:?}"),
        }
        // simple: diag(1, 0.3) -> projector diag(1, 0)
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.3, 0.0)]);
        let es = eig_decompose(&m, 1e-10).unwrap();
        let p = riesz_projection(&es, ONE, 1e-8).unwrap();
        assert!(p.approx_eq(&ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0)]), 1e-12));
        // idempotent and commutes with m
        assert!(p.mul(&p).approx_eq(&p, 1e-10));
        assert!(p.mul(&m).approx_eq(&m.mul(&p), 1e-10));
        // missing
        match riesz_projection(&es, c(2.0, 0.0), 1e-8) {
            Err(Error::EigenvalueNotFound { .. }) => {}
            other => panic!("expected not-found, got {other:?}"),
        }
    }

    #[test]
    fn random_matrices_small_residuals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2024);
        for trial in 0..200 {
            let n = [2usize, 3, 4, 8, 16][trial % 5];
            let mut m = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let es = eig_decompose(&m, 1e-10).unwrap();
            let r = residual(&m, &es);
            assert!(
                r < 1e-9 * m.frobenius_norm().max(1.0),
                "residual {r} too large at trial {trial} (n={n})"
            );
        }
    }
}

//! Scalar parameter laws: the iid randomness driving interaction times,
//! temperatures and energy levels. Each law exposes a seedable sampler,
//! exact first and second moments where they exist in closed form, and a
//! quadrature rule (value, weight) for computing expectations of smooth
//! functions without Monte Carlo error.

use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// Quantile function for the generic inverse-CDF law.
pub type Quantile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Law {
    /// Deterministic value.
    Point(f64),
    /// Finitely many atoms (value, weight); weights need not be normalized.
    Finite(Vec<(f64, f64)>),
    /// Uniform on [lo, hi].
    Uniform { lo: f64, hi: f64 },
    /// Push-forward of Uniform(0,1) through a quantile function.
    /// Moments and expectations use `nodes`-point quadrature in u-space.
    InverseCdf { quantile: Quantile, nodes: usize },
}

impl fmt::Debug for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Point(v) => write!(f, "Point({v})"),
            Law::Finite(atoms) => write!(f, "Finite({atoms:?})"),
            Law::Uniform { lo, hi } => write!(f, "Uniform[{lo}, {hi}]"),
            Law::InverseCdf { nodes, .. } => write!(f, "InverseCdf(nodes={nodes})"),
        }
    }
}

impl Law {
    pub fn uniform(lo: f64, hi: f64) -> Law {
        assert!(lo < hi, "uniform law needs lo < hi");
        Law::Uniform { lo, hi }
    }

    /// Two-point law with equal weights.
    pub fn two_point(a: f64, b: f64) -> Law {
        Law::Finite(vec![(a, 0.5), (b, 0.5)])
    }

    pub fn is_point(&self) -> bool {
        match self {
            Law::Point(_) => true,
            Law::Finite(atoms) => atoms.iter().filter(|(_, w)| *w > 0.0).count() <= 1,
            _ => false,
        }
    }

    /// The deterministic value, if the law is a point mass.
    pub fn point_value(&self) -> Option<f64> {
        match self {
            Law::Point(v) => Some(*v),
            Law::Finite(atoms) => {
                let live: Vec<_> = atoms.iter().filter(|(_, w)| *w > 0.0).collect();
                if live.len() == 1 {
                    Some(live[0].0)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn total_weight(atoms: &[(f64, f64)]) -> f64 {
        atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Law::Point(v) => *v,
            Law::Finite(atoms) => {
                let total = Self::total_weight(atoms);
                let mut u = rng.gen::<f64>() * total;
                for (v, w) in atoms {
                    if u < *w {
                        return *v;
                    }
                    u -= w;
                }
                atoms.last().expect("finite law has no atoms").0
            }
            Law::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            Law::InverseCdf { quantile, .. } => quantile(rng.gen::<f64>()),
        }
    }

    /// Exact mean (quadrature for the inverse-CDF case).
    pub fn mean(&self) -> f64 {
        match self {
            Law::Point(v) => *v,
            Law::Finite(atoms) => {
                atoms.iter().map(|(v, w)| v * w).sum::<f64>() / Self::total_weight(atoms)
            }
            Law::Uniform { lo, hi } => 0.5 * (lo + hi),
            Law::InverseCdf { .. } => self.expect(|x| x),
        }
    }

    /// Exact second moment E[X^2] (quadrature for the inverse-CDF case).
    pub fn second_moment(&self) -> f64 {
        match self {
            Law::Point(v) => v * v,
            Law::Finite(atoms) => {
                atoms.iter().map(|(v, w)| v * v * w).sum::<f64>() / Self::total_weight(atoms)
            }
            Law::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            Law::InverseCdf { .. } => self.expect(|x| x * x),
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0)
    }

    /// Interval hull of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Law::Point(v) => (*v, *v),
            Law::Finite(atoms) => atoms
                .iter()
                .filter(|(_, w)| *w > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| {
                    (lo.min(*v), hi.max(*v))
                }),
            Law::Uniform { lo, hi } => (*lo, *hi),
            Law::InverseCdf { quantile, .. } => (quantile(0.0), quantile(1.0)),
        }
    }

    /// Quadrature rule (value, weight) with weights summing to one.
    /// Exact for point masses and finite laws; Gauss-Legendre with `n` nodes
    /// for continuous laws, which is effectively exact for analytic
    /// integrands at n = 64.
    pub fn quadrature(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            Law::Point(v) => vec![(*v, 1.0)],
            Law::Finite(atoms) => {
                let total = Self::total_weight(atoms);
                atoms.iter().map(|(v, w)| (*v, w / total)).collect()
            }
            Law::Uniform { lo, hi } => {
                let (x, w) = gauss_legendre(n);
                x.iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| (0.5 * (lo + hi) + 0.5 * (hi - lo) * xi, 0.5 * wi))
                    .collect()
            }
            Law::InverseCdf { quantile, nodes } => {
                let (x, w) = gauss_legendre(if n > 0 { n } else { *nodes });
                x.iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| (quantile(0.5 * (xi + 1.0)), 0.5 * wi))
                    .collect()
            }
        }
    }

    /// Quadrature expectation of a scalar function with the default rule.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.quadrature(DEFAULT_NODES).iter().map(|&(v, w)| w * f(v)).sum()
    }
}

/// Default Gauss-Legendre node count for expectations over interval laws.
pub const DEFAULT_NODES: usize = 64;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial. Weights sum to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p1 = x;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n-point rule is exact up to degree 2n-1
        for n in [2usize, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let int: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(deg as i32)).sum();
            assert!(int.abs() < 1e-12, "odd power should vanish (n={n})");
            let int: f64 =
                x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi((deg - 1) as i32)).sum();
            let exact = 2.0 / (deg as f64); // ∫ x^{2n-2} = 2/(2n-1)
            assert!((int - exact).abs() < 1e-12, "n={n}: {int} vs {exact}");
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let laws = [
            Law::Point(1.7),
            Law::Finite(vec![(0.5, 1.0), (2.0, 3.0)]),
            Law::uniform(0.8, 1.2),
        ];
        for law in &laws {
            let m1: f64 = law.quadrature(64).iter().map(|&(v, w)| w * v).sum();
            let m2: f64 = law.quadrature(64).iter().map(|&(v, w)| w * v * v).sum();
            assert!((m1 - law.mean()).abs() < 1e-13, "{law:?}");
            assert!((m2 - law.second_moment()).abs() < 1e-13, "{law:?}");
        }
    }

    #[test]
    fn sampling_matches_moments() {
        let law = Law::uniform(-1.0, 3.0);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 200_000;
        let mean = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - law.mean()).abs() < 0.01);

        let law = Law::two_point(0.5, 2.0);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let mean = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.25).abs() < 0.01);
    }

    #[test]
    fn inverse_cdf_law() {
        // X = U^2 on [0,1]: mean 1/3, second moment 1/5
        let law = Law::InverseCdf { quantile: Arc::new(|u| u * u), nodes: 128 };
        assert!((law.mean() - 1.0 / 3.0).abs() < 1e-10);
        assert!((law.second_moment() - 0.2).abs() < 1e-10);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let n = 100_000;
        let mean = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn point_detection() {
        assert!(Law::Point(2.0).is_point());
        assert_eq!(Law::Point(2.0).point_value(), Some(2.0));
        assert!(Law::Finite(vec![(1.0, 1.0), (2.0, 0.0)]).is_point());
        assert!(!Law::two_point(1.0, 2.0).is_point());
        assert!(!Law::uniform(0.0, 1.0).is_point());
    }
}

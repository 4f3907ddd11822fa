//! Finite differences, sampling and small numeric helpers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Fourth-order central first derivative of `f` at 0.
pub fn d1(f: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    (f(-2.0 * h) - f(-h) * 8.0 + f(h) * 8.0 - f(2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative of `f` at 0.
pub fn d2(f: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    (-f(-2.0 * h) + f(-h) * 16.0 - f(0.0) * 30.0 + f(h) * 16.0 - f(2.0 * h)) / (12.0 * h * h)
}

/// `Σ_{ij} M_ij ∂_i∂_j f` at `z` for real symmetric `M`, through directional
/// second derivatives along the eigenvectors of `M`.
pub fn weighted_laplacian(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    z: &[Complex64],
    m: &[Vec<f64>],
    h: f64,
) -> Complex64 {
    let l = z.len();
    let mat = nalgebra::DMatrix::from_fn(l, l, |i, j| 0.5 * (m[i][j] + m[j][i]));
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..l {
        let lam = eig.eigenvalues[a];
        if lam == 0.0 {
            continue;
        }
        let u: Vec<f64> = (0..l).map(|i| eig.eigenvectors[(i, a)]).collect();
        let g = |s: f64| {
            let p: Vec<Complex64> = z.iter().zip(&u).map(|(zi, ui)| zi + ui * s).collect();
            f(&p)
        };
        acc += d2(g, h) * lam;
    }
    acc
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point `x + τ y` with `x, y` uniform in `[0,1)^l` (coroot coordinates).
pub fn random_torus_point(rng: &mut impl Rng, l: usize, tau: Complex64) -> Vec<Complex64> {
    (0..l)
        .map(|_| {
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            Complex64::new(x, 0.0) + tau * y
        })
        .collect()
}

pub fn random_torus_points(seed: u64, count: usize, l: usize, tau: Complex64) -> Vec<Vec<Complex64>> {
    let mut r = rng(seed);
    (0..count).map(|_| random_torus_point(&mut r, l, tau)).collect()
}

/// `|a − b| / max(|b|, 1)`.
pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        n if n <= 16 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_exponential() {
        let c = Complex64::new(0.3, 1.1);
        let f = |s: f64| (c * s).exp();
        assert!((d1(f, FD_STEP) - c).norm() < 1e-10);
        assert!((d2(f, FD_STEP) - c * c).norm() < 1e-7);
    }

    #[test]
    fn laplacian_of_quadratic() {
        // f = z₀² + 3 z₀ z₁, M = [[1, 2], [2, 5]] → 2·1 + 2·(2·3)
        let f = |z: &[Complex64]| z[0] * z[0] + z[0] * z[1] * 3.0;
        let m = vec![vec![1.0, 2.0], vec![2.0, 5.0]];
        let v = weighted_laplacian(&f, &[Complex64::new(0.2, 0.1), Complex64::new(-0.4, 0.3)], &m, 1e-3);
        assert!((v - Complex64::new(14.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(2, 3), 0);
    }
}

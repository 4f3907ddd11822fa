//! Gram matrices of theta bases by quadrature over the torus.
//!
//! Points are `z = o + η + Pξ` with `η, ξ ∈ [0,1)^l` on an `N^l × N^l` grid.
//! For a fixed slab `ξ` every function is a trigonometric polynomial in η,
//! so its values on the η grid come from one inverse FFT of its binned
//! Fourier coefficients. Slab sums are reduced pairwise in index order, so
//! the result does not depend on the thread count.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Serialize, Serializer};

use crate::abelian::{HeatMeasure, PolarizedTorus, ThetaEvaluator};
use crate::cst::{CharacterTable, PsiDistribution};
use crate::error::{Error, Result};
use crate::exact::rat_to_f64;
use crate::lattice::{CMatrix, GaussianSeries};
use crate::rootsys::{RootSystem, Weight};
use crate::su2::{su2_psi_basis, Su2Family};
use crate::util;

/// Largest entry change tolerated between the grid and its refinement.
pub const REFINEMENT_TOL: f64 = 1e-6;

const TERM_TOL: f64 = 1e-15;

/// Grid size per real direction and the common offset of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub n: usize,
    pub offset: f64,
}

impl QuadratureGrid {
    pub fn new(n: usize) -> Self {
        Self { n, offset: 0.5 / n as f64 }
    }

    /// Default size for `l` complex dimensions.
    pub fn default_for(l: usize) -> Self {
        Self::new(match l {
            1 => 64,
            2 => 24,
            3 => 12,
            _ => 8,
        })
    }

    /// An offset away from the midpoint lattice, so that no node sits on a
    /// wall of the Weyl alcove.
    pub fn generic(n: usize) -> Self {
        Self { n, offset: (0.5 + 0.1234567) / n as f64 }
    }

    pub fn refined(&self) -> Self {
        let n = (3 * self.n).div_ceil(4).max(2);
        Self { n, offset: self.offset }
    }
}

fn serialize_cmatrix<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    rows.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    /// Row labels: Dynkin labels, theta characteristics or `[m]` for SU(2).
    pub labels: Vec<Vec<i64>>,
    #[serde(serialize_with = "serialize_cmatrix")]
    pub matrix: DMatrix<Complex64>,
    pub max_offdiag: f64,
    pub max_diag_deviation: f64,
    pub n_used: usize,
    pub n_refined: usize,
    pub refinement_change: f64,
    /// Constant in front of the Gaussian weight in the `(η, ξ)` coordinates.
    pub measure_constant: f64,
    pub seconds: f64,
}

impl GramReport {
    /// Largest entry of `|G − I|`.
    pub fn identity_deviation(&self) -> f64 {
        self.max_offdiag.max(self.max_diag_deviation)
    }
}

/// The data of one quadrature: functions, period directions and weight.
pub(crate) struct Frame {
    pub series: Vec<GaussianSeries>,
    /// `z = o + η + Pξ`.
    pub period: CMatrix,
    /// Constant in front of the weight.
    pub constant: f64,
    /// Gaussian `Q` in `e^{−πξᵀQξ}`.
    pub quad: DMatrix<f64>,
    pub divisor: f64,
}

impl Frame {
    fn l(&self) -> usize {
        self.period.nrows()
    }

    fn point(&self, grid: &QuadratureGrid, xi: &[f64]) -> Vec<Complex64> {
        let l = self.l();
        (0..l)
            .map(|i| Complex64::new(grid.offset, 0.0) + (0..l).map(|j| self.period[(i, j)] * xi[j]).sum::<Complex64>())
            .collect()
    }

    fn log_weight(&self, xi: &[f64]) -> f64 {
        let l = self.l();
        let mut q = 0.0;
        for i in 0..l {
            for j in 0..l {
                q += xi[i] * self.quad[(i, j)] * xi[j];
            }
        }
        self.constant.ln() - PI * q
    }
}

fn grid_index(mut idx: usize, n: usize, l: usize) -> Vec<usize> {
    (0..l)
        .map(|_| {
            let r = idx % n;
            idx /= n;
            r
        })
        .collect()
}

/// Unnormalized inverse DFT along every axis of an `n^l` array.
fn ifft_nd(data: &mut [Complex64], n: usize, l: usize, fft: &dyn rustfft::Fft<f64>) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let total = data.len();
    for axis in 0..l {
        let stride = n.pow(axis as u32);
        for start in 0..total {
            if (start / stride) % n != 0 {
                continue;
            }
            for (i, c) in line.iter_mut().enumerate() {
                *c = data[start + i * stride];
            }
            fft.process(&mut line);
            for (i, c) in line.iter().enumerate() {
                data[start + i * stride] = *c;
            }
        }
    }
}

fn pairwise_matrix_sum(mut v: Vec<DMatrix<Complex64>>) -> DMatrix<Complex64> {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop().expect("at least one slab")
}

pub(crate) fn quadrature(frame: &Frame, grid: &QuadratureGrid) -> Result<DMatrix<Complex64>> {
    let l = frame.l();
    let n = grid.n;
    let d = frame.series.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("grid size must be >= 2, got {n}")));
    }
    let cells = n
        .checked_pow(l as u32)
        .filter(|c| c.saturating_mul(d) <= 1 << 26)
        .ok_or_else(|| Error::ResourceLimit(format!("grid {n}^{l} with {d} functions is too large")))?;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let slabs: Vec<DMatrix<Complex64>> = (0..cells)
        .into_par_iter()
        .map(|s| -> Result<DMatrix<Complex64>> {
            let xi: Vec<f64> = grid_index(s, n, l).into_iter().map(|i| i as f64 / n as f64 + grid.offset).collect();
            let z0 = frame.point(grid, &xi);
            let mut values = vec![Complex64::new(0.0, 0.0); d * cells];
            let mut log_scale = None;
            for (a, series) in frame.series.iter().enumerate() {
                let bins = &mut values[a * cells..(a + 1) * cells];
                let (ls, _, _) = series.visit_terms(&z0, TERM_TOL, |q, c| {
                    // nodes sit at η_j = j/n; the offset is already in z0
                    let idx = (0..l).rev().fold(0usize, |acc, i| acc * n + q[i].rem_euclid(n as i64) as usize);
                    bins[idx] += c;
                })?;
                log_scale = Some(ls);
                ifft_nd(bins, n, l, fft.as_ref());
            }
            let scale = (2.0 * log_scale.unwrap_or(0.0) + frame.log_weight(&xi)).exp() / cells as f64;
            let mut m = DMatrix::zeros(d, d);
            for a in 0..d {
                let fa = &values[a * cells..(a + 1) * cells];
                for b in a..d {
                    let fb = &values[b * cells..(b + 1) * cells];
                    let terms: Vec<Complex64> = fa.iter().zip(fb).map(|(x, y)| x.conj() * y).collect();
                    m[(a, b)] = util::pairwise_sum(&terms) * scale;
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let mut g = pairwise_matrix_sum(slabs) / Complex64::new(cells as f64 * frame.divisor, 0.0);
    for a in 0..d {
        g[(a, a)] = Complex64::new(g[(a, a)].re, 0.0);
        for b in 0..a {
            g[(a, b)] = g[(b, a)].conj();
        }
    }
    Ok(g)
}

fn report(frame: &Frame, labels: Vec<Vec<i64>>, grid: &QuadratureGrid) -> Result<GramReport> {
    let start = Instant::now();
    let g = quadrature(frame, grid)?;
    let fine = grid.refined();
    let g2 = quadrature(frame, &fine)?;
    let change = (&g - &g2).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if change > REFINEMENT_TOL {
        return Err(Error::Convergence { change, n: grid.n, refined: fine.n });
    }
    let d = g.nrows();
    let mut max_offdiag: f64 = 0.0;
    let mut max_diag: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            if a == b {
                max_diag = max_diag.max((g[(a, a)] - 1.0).norm());
            } else {
                max_offdiag = max_offdiag.max(g[(a, b)].norm());
            }
        }
    }
    Ok(GramReport {
        labels,
        matrix: g,
        max_offdiag,
        max_diag_deviation: max_diag,
        n_used: grid.n,
        n_refined: fine.n,
        refinement_change: change,
        measure_constant: frame.constant,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Gram matrix of the level-k theta basis against the heat measure at `t = 1/k`.
pub fn abelian_gram(torus: &PolarizedTorus, grid: &QuadratureGrid) -> Result<GramReport> {
    let l = torus.l;
    let labels = torus.labels();
    let series = labels
        .iter()
        .map(|m| Ok(ThetaEvaluator::new(torus.clone(), m.clone(), TERM_TOL)?.series().clone()))
        .collect::<Result<Vec<_>>>()?;
    let measure = HeatMeasure::new(torus, 1.0 / torus.k as f64)?;
    let delta = DMatrix::from_fn(l, l, |i, j| if i == j { torus.delta[i] as f64 } else { 0.0 });
    let period = CMatrix::from_fn(l, l, |i, j| torus.omega[(i, j)] * torus.delta[j] as f64);
    // e^{−2πk (δξ)ᵀ ImΩ (δξ)}
    let quad = &delta * torus.omega_imag() * &delta * (2.0 * torus.k as f64);
    let frame = Frame { series, period, constant: measure.normalization, quad, divisor: 1.0 };
    report(&frame, labels.into_iter().map(|m| m.m).collect(), grid)
}

/// Frame for `σ C_t(ψ)` with the heat measure at time `t` in the coroot
/// coordinates `v = o + η + τξ`.
fn psi_frame(rs: &RootSystem, series: Vec<GaussianSeries>, tau: Complex64, t: f64) -> Result<Frame> {
    let l = rs.l;
    let tau2 = tau.im;
    let weyl_order = rs.weyl_order as f64;
    let constant = (2.0 / (t * tau2)).powf(l as f64 / 2.0) * (rs.n as f64).sqrt() * tau2.powi(l as i32);
    let quad = DMatrix::from_fn(l, l, |i, j| 2.0 * tau2 * rs.cartan[i][j] as f64 / t);
    Ok(Frame { series, period: CMatrix::identity(l, l) * tau, constant, quad, divisor: weyl_order })
}

/// Checks shared by the Gram constructors.
fn check_tau(tau: Complex64) -> Result<()> {
    if !(tau.im > 0.0) {
        return Err(Error::InvalidInput(format!("Im τ must be positive, got {}", tau.im)));
    }
    Ok(())
}

/// Gram matrix of `C_t(ψ_γ)`, γ in the level-k alcove, for the modified heat-kernel
/// inner product with `t = 1/(k+n)`.
pub fn nonabelian_gram(rs: &RootSystem, k: i64, tau: Complex64, grid: &QuadratureGrid) -> Result<GramReport> {
    check_tau(tau)?;
    if k < 0 {
        return Err(Error::InvalidInput(format!("level must be >= 0, got {k}")));
    }
    let t = 1.0 / (k + rs.n as i64) as f64;
    let weights = rs.level_k_weights(k);
    let series = weights
        .iter()
        .map(|g| PsiDistribution::new(rs, g.clone(), k)?.orbit_series(tau, t))
        .collect::<Result<Vec<_>>>()?;
    let frame = psi_frame(rs, series, tau, t)?;
    report(&frame, weights.into_iter().map(|w| w.labels).collect(), grid)
}

/// SU(2) Gram matrix of `C(ψ_{m,k})` at `t = 2/k'`, `k' = 2k+4`.
pub fn su2_gram(k: i64, tau: Complex64, family: Su2Family, grid: &QuadratureGrid) -> Result<GramReport> {
    check_tau(tau)?;
    let basis = su2_psi_basis(k, 2 * k + 4, family)?;
    let t = 2.0 / (2 * k + 4) as f64;
    let series = basis.iter().map(|p| p.image_series(tau, t)).collect::<Result<Vec<_>>>()?;
    let frame = psi_frame(&RootSystem::new(2)?, series, tau, t)?;
    report(&frame, basis.iter().map(|p| vec![p.m]).collect(), grid)
}

/// Pointwise evaluation of the modified heat-kernel integrand through the closed
/// form of `C(ψ)` and its `σ` and `e^{−2πτ₂t‖ρ‖²}` factors, on the same grid.
/// Returns the largest entry difference from [`nonabelian_gram`].
pub fn measure_inner_product_check(rs: &RootSystem, k: i64, tau: Complex64, grid: &QuadratureGrid) -> Result<f64> {
    let fft = nonabelian_gram(rs, k, tau, grid)?;
    let big_k = k + rs.n as i64;
    let t = 1.0 / big_k as f64;
    let table = CharacterTable::new(rs)?;
    let weights = rs.level_k_weights(k);
    let series = weights
        .iter()
        .map(|g| PsiDistribution::new(rs, g.clone(), k)?.orbit_series(tau, t))
        .collect::<Result<Vec<_>>>()?;
    let frame = psi_frame(rs, Vec::new(), tau, t)?;
    let l = rs.l;
    let n = grid.n;
    let cells = n.pow(l as u32);
    let phase = crate::cst::rho_phase(rs, tau, t);
    let damp = (-2.0 * PI * tau.im * t * rat_to_f64(&rs.rho_norm2())).exp();
    let d = series.len();
    let slabs: Vec<DMatrix<Complex64>> = (0..cells)
        .into_par_iter()
        .map(|s| -> Result<DMatrix<Complex64>> {
            let xi: Vec<f64> = grid_index(s, n, l).into_iter().map(|i| i as f64 / n as f64 + grid.offset).collect();
            let z0 = frame.point(grid, &xi);
            let w = frame.log_weight(&xi).exp();
            let mut m = DMatrix::zeros(d, d);
            let mut vals = vec![Complex64::new(0.0, 0.0); d];
            for e in 0..cells {
                let eta = grid_index(e, n, l);
                let v: Vec<Complex64> = z0.iter().zip(&eta).map(|(z, j)| z + *j as f64 / n as f64).collect();
                let sigma = table.sigma(&v);
                if sigma.norm() < crate::cst::SIGMA_THRESHOLD {
                    return Err(Error::SingularLocus(sigma.norm()));
                }
                for (a, s) in series.iter().enumerate() {
                    let c_psi = phase * s.eval(&v, TERM_TOL)?.value() / sigma;
                    vals[a] = c_psi * sigma;
                }
                for a in 0..d {
                    for b in a..d {
                        m[(a, b)] += vals[a].conj() * vals[b] * damp * w;
                    }
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let g = pairwise_matrix_sum(slabs) / Complex64::new((cells * cells) as f64 * frame.divisor, 0.0);
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in a..d {
            worst = worst.max((g[(a, b)] - fft.matrix[(a, b)]).norm());
        }
    }
    Ok(worst)
}

/// Largest relative change of `|σ C_t(ψ)|² e^{−2πτ₂t‖ρ‖²} ν_t` under each
/// generator of the group whose quotient is the fundamental domain.
#[derive(Clone, Debug, Serialize)]
pub struct DomainInvariance {
    pub t: f64,
    pub lattice_residual: f64,
    pub tau_lattice_residual: f64,
    pub weyl_residual: f64,
}

impl DomainInvariance {
    pub fn max(&self) -> f64 {
        self.lattice_residual.max(self.tau_lattice_residual).max(self.weyl_residual)
    }
}

/// Log of the integrand up to a constant.
fn log_integrand(rs: &RootSystem, series: &GaussianSeries, tau: Complex64, t: f64, v: &[Complex64]) -> Result<f64> {
    let s = series.eval_scaled(v, TERM_TOL)?;
    let y: Vec<f64> = v.iter().map(|c| c.im).collect();
    let mut ycy = 0.0;
    for i in 0..rs.l {
        for j in 0..rs.l {
            ycy += y[i] * rs.cartan[i][j] as f64 * y[j];
        }
    }
    Ok(2.0 * s.mantissa.norm().ln() + 2.0 * s.log_scale - 2.0 * PI * ycy / (t * tau.im))
}

pub fn fundamental_domain_independence(
    rs: &RootSystem,
    k: i64,
    tau: Complex64,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<DomainInvariance> {
    check_tau(tau)?;
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    let weyl = rs.weyl_group()?;
    let points = util::random_torus_points(seed, samples, rs.l, tau);
    let mut res = [0.0f64; 3];
    for g in rs.level_k_weights(k) {
        let series = PsiDistribution::new(rs, g, k)?.orbit_series(tau, t)?;
        for v in &points {
            let base = log_integrand(rs, &series, tau, t, v)?;
            let rel = |other: f64| (other - base).exp_m1().abs();
            for j in 0..rs.l {
                let mut e = vec![0i64; rs.l];
                e[j] = 1;
                let shifted: Vec<Complex64> = v.iter().zip(&e).map(|(z, b)| z + *b as f64).collect();
                res[0] = res[0].max(rel(log_integrand(rs, &series, tau, t, &shifted)?));
                let shifted: Vec<Complex64> = v.iter().zip(&e).map(|(z, b)| z + tau * *b as f64).collect();
                res[1] = res[1].max(rel(log_integrand(rs, &series, tau, t, &shifted)?));
            }
            for w in &weyl {
                res[2] = res[2].max(rel(log_integrand(rs, &series, tau, t, &w.act_point(v))?));
            }
        }
    }
    Ok(DomainInvariance { t, lattice_residual: res[0], tau_lattice_residual: res[1], weyl_residual: res[2] })
}

/// Largest entry difference between Gram matrices at two moduli.
pub fn tau_independence(rs: &RootSystem, k: i64, taus: [Complex64; 2], grid: &QuadratureGrid) -> Result<f64> {
    let a = nonabelian_gram(rs, k, taus[0], grid)?;
    let b = nonabelian_gram(rs, k, taus[1], grid)?;
    Ok((&a.matrix - &b.matrix).iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Labels of the basis used by [`nonabelian_gram`].
pub fn gram_labels(rs: &RootSystem, k: i64) -> Vec<Weight> {
    rs.level_k_weights(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ifft_matches_direct_sum() {
        let n = 5;
        let mut data: Vec<Complex64> = (0..n * n).map(|i| c(i as f64 * 0.3, 1.0 - i as f64 * 0.1)).collect();
        let orig = data.clone();
        let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
        ifft_nd(&mut data, n, 2, fft.as_ref());
        for j0 in 0..n {
            for j1 in 0..n {
                let mut s = c(0.0, 0.0);
                for r0 in 0..n {
                    for r1 in 0..n {
                        let ph = 2.0 * PI * ((r0 * j0 + r1 * j1) as f64) / n as f64;
                        s += orig[r0 + n * r1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - data[j0 + n * j1]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn abelian_gram_is_identity() {
        let torus = PolarizedTorus::diagonal(1, c(0.2, 1.1), 3).unwrap();
        let r = abelian_gram(&torus, &QuadratureGrid::new(32)).unwrap();
        assert!(r.identity_deviation() < 1e-10, "{r:?}");
        let omega = CMatrix::from_row_slice(2, 2, &[c(0.1, 1.0), c(0.3, 0.2), c(0.3, 0.2), c(-0.2, 0.9)]);
        let torus = PolarizedTorus::new(omega, vec![1, 2], 1).unwrap();
        let r = abelian_gram(&torus, &QuadratureGrid::new(16)).unwrap();
        assert!(r.identity_deviation() < 1e-10, "{r:?}");
    }

    #[test]
    fn spectral_convergence_in_grid_size() {
        let torus = PolarizedTorus::diagonal(1, c(0.0, 1.0), 4).unwrap();
        let mut prev = f64::INFINITY;
        for n in [4, 8, 16] {
            let g = quadrature(
                &Frame {
                    series: torus
                        .labels()
                        .iter()
                        .map(|m| ThetaEvaluator::new(torus.clone(), m.clone(), TERM_TOL).unwrap().series().clone())
                        .collect(),
                    period: CMatrix::identity(1, 1) * c(0.0, 1.0),
                    constant: HeatMeasure::new(&torus, 0.25).unwrap().normalization,
                    quad: DMatrix::from_element(1, 1, 8.0),
                    divisor: 1.0,
                },
                &QuadratureGrid::new(n),
            )
            .unwrap();
            let dev = (g - DMatrix::identity(4, 4)).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(dev < prev / 10.0 || dev < 1e-12, "{n}: {dev} vs {prev}");
            prev = dev;
        }
    }

    #[test]
    fn su3_gram_is_identity_and_psd() {
        let rs = RootSystem::new(3).unwrap();
        let r = nonabelian_gram(&rs, 1, c(0.0, 1.0), &QuadratureGrid::new(16)).unwrap();
        assert_eq!(r.labels.len(), 3);
        assert!(r.identity_deviation() < 1e-8, "{r:?}");
        let mut g = rng(3);
        for _ in 0..10 {
            let x: Vec<Complex64> = (0..3).map(|_| c(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect();
            let mut q = c(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    q += x[a].conj() * r.matrix[(a, b)] * x[b];
                }
            }
            assert!(q.re > 0.0 && q.im.abs() < 1e-12);
        }
    }

    #[test]
    fn su2_gram_is_identity() {
        for k in 0..3 {
            let r = su2_gram(k, c(0.3, 0.8), Su2Family::Integral, &QuadratureGrid::new(48)).unwrap();
            assert!(r.identity_deviation() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn measure_routes_agree() {
        let rs = RootSystem::new(3).unwrap();
        assert!(measure_inner_product_check(&rs, 1, c(0.1, 1.0), &QuadratureGrid::generic(12)).unwrap() < 1e-8);
    }

    #[test]
    fn domain_invariance_only_at_the_shifted_level() {
        let rs = RootSystem::new(3).unwrap();
        let tau = c(0.2, 0.9);
        let good = fundamental_domain_independence(&rs, 1, tau, 0.25, 4, 1).unwrap();
        assert!(good.max() < 1e-9, "{good:?}");
        let bad = fundamental_domain_independence(&rs, 1, tau, 0.2, 4, 1).unwrap();
        assert!(bad.tau_lattice_residual > 1e-2, "{bad:?}");
    }
}

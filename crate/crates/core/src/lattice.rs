//! Shared engine for Gaussian lattice series
//!
//! ```text
//! f(z) = Σ_s c_s Σ_{p ∈ ℤ^l} (−1)^{π·p} exp(πi qᵀΩq + 2πi q·z),   q = m_s + B p
//! ```
//!
//! with integer `m_s`, integer `B` and `Im Ω` positive definite. Every theta
//! series in the crate is an instance. Values are returned as a mantissa times
//! `exp(log_scale)` where `log_scale = π yᵀ(Im Ω)⁻¹y`, `y = Im z`; this is the
//! maximum of the Gaussian envelope, so mantissas stay of order one.
//!
//! Truncation: for each shift the box `‖p − round(p_c)‖∞ ≤ R` is summed, `p_c`
//! being the envelope centre. With `g = λ_min(Bᵀ Im Ω B)` the points with
//! `‖p − round(p_c)‖∞ = r` have envelope at most `exp(−πg(r − ½)²)` and there
//! are at most `2l(2r+1)^{l−1}` of them, which gives a geometric tail bound.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{check_len, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Default cap on the truncation radius.
pub const DEFAULT_RADIUS_CAP: usize = 64;

/// One shifted copy of the base lattice with a complex weight.
#[derive(Clone, Debug)]
pub struct Shift {
    pub m: Vec<i64>,
    pub coeff: Complex64,
}

/// A value `mantissa · exp(log_scale)` with a certified bound on the
/// discarded part, in mantissa units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
    pub tail: f64,
    pub radius: usize,
}

impl Scaled {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn abs_tail(&self) -> f64 {
        self.tail * self.log_scale.exp()
    }
}

#[derive(Clone, Debug)]
pub struct GaussianSeries {
    l: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    im_inv: Vec<f64>,
    b: Vec<f64>,
    b_inv: Vec<f64>,
    g_min: f64,
    shifts: Vec<Shift>,
    parity: Option<Vec<i64>>,
    radius_cap: usize,
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect()
}

impl GaussianSeries {
    pub fn new(
        omega: &CMatrix,
        b: &[Vec<i64>],
        shifts: Vec<Shift>,
        parity: Option<Vec<i64>>,
        radius_cap: usize,
    ) -> Result<Self> {
        let l = omega.nrows();
        check_len(l, omega.ncols())?;
        check_len(l, b.len())?;
        for row in b {
            check_len(l, row.len())?;
        }
        for s in &shifts {
            check_len(l, s.m.len())?;
        }
        if let Some(p) = &parity {
            check_len(l, p.len())?;
        }
        let re = omega.map(|c| c.re);
        let im = omega.map(|c| c.im);
        if (&im - im.transpose()).abs().max() > 1e-12 * (1.0 + im.abs().max())
            || (&re - re.transpose()).abs().max() > 1e-12 * (1.0 + re.abs().max())
        {
            return Err(Error::InvalidInput("period matrix is not symmetric".into()));
        }
        let chol = im
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("imaginary part is not positive definite".into()))?;
        let im_inv = chol.inverse();
        let bm = DMatrix::from_fn(l, l, |i, j| b[i][j] as f64);
        let b_inv = bm
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("lattice matrix is singular".into()))?;
        let g = bm.transpose() * &im * &bm;
        let g = (&g + g.transpose()) * 0.5;
        let g_min = SymmetricEigen::new(g).eigenvalues.min();
        if g_min <= 0.0 {
            return Err(Error::IllConditioned("Gaussian form is not positive definite".into()));
        }
        Ok(Self {
            l,
            re: flat(&re),
            im: flat(&im),
            im_inv: flat(&im_inv),
            b: flat(&bm),
            b_inv: flat(&b_inv),
            g_min,
            shifts,
            parity,
            radius_cap,
        })
    }

    pub fn with_radius_cap(mut self, cap: usize) -> Self {
        self.radius_cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.l
    }

    pub fn shifts(&self) -> &[Shift] {
        &self.shifts
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.g_min
    }

    fn coeff_mass(&self) -> f64 {
        self.shifts.iter().map(|s| s.coeff.norm()).sum()
    }

    /// Tail bound for one shift with unit coefficient, radius `r`.
    pub fn shell_tail(&self, r: usize) -> f64 {
        let l = self.l as i32;
        let g = self.g_min;
        let rf = r as f64;
        let ratio = ((2.0 * rf + 5.0) / (2.0 * rf + 3.0)).powi(l - 1) * (-2.0 * PI * g * (rf + 1.0)).exp();
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        let first = 2.0 * l as f64 * (2.0 * rf + 3.0).powi(l - 1) * (-PI * g * (rf + 0.5).powi(2)).exp();
        first / (1.0 - ratio)
    }

    /// Smallest radius whose certified tail is below `tol / 2`.
    pub fn radius_for(&self, tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        let mass = self.coeff_mass();
        (0..=self.radius_cap).find(|&r| mass * self.shell_tail(r) < 0.5 * tol).ok_or_else(|| {
            Error::ResourceLimit(format!(
                "tolerance {tol:e} needs a truncation radius above {}",
                self.radius_cap
            ))
        })
    }

    fn quad(&self, m: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let l = self.l;
        let mut s = 0.0;
        for i in 0..l {
            let mut row = 0.0;
            for j in 0..l {
                row += m[i * l + j] * b[j];
            }
            s += a[i] * row;
        }
        s
    }

    /// Envelope centre in q-space and log scale for the point `z`.
    fn centre(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let l = self.l;
        let qc: Vec<f64> =
            (0..l).map(|i| -(0..l).map(|j| self.im_inv[i * l + j] * y[j]).sum::<f64>()).collect();
        let log_scale = PI * self.quad(&self.im_inv, y, y);
        (qc, log_scale)
    }

    /// Visit every retained term at `z`. The callback gets `q` and the scaled
    /// coefficient `a_q` such that `f(z + η) ≈ exp(log_scale) Σ a_q e^{2πi q·η}`
    /// for real `η`. Returns `(log_scale, tail, radius)`.
    pub fn visit_terms(
        &self,
        z: &[Complex64],
        tol: f64,
        f: impl FnMut(&[i64], Complex64),
    ) -> Result<(f64, f64, usize)> {
        self.visit_terms_min_radius(z, tol, 0, f)
    }

    /// As [`visit_terms`](Self::visit_terms) with the radius forced to be at
    /// least `min_radius`.
    pub fn visit_terms_min_radius(
        &self,
        z: &[Complex64],
        tol: f64,
        min_radius: usize,
        mut f: impl FnMut(&[i64], Complex64),
    ) -> Result<(f64, f64, usize)> {
        let l = self.l;
        check_len(l, z.len())?;
        let x: Vec<f64> = z.iter().map(|c| c.re).collect();
        let y: Vec<f64> = z.iter().map(|c| c.im).collect();
        let radius = self.radius_for(tol)?.max(min_radius);
        if radius > self.radius_cap {
            return Err(Error::ResourceLimit(format!("radius {radius} exceeds cap {}", self.radius_cap)));
        }
        let (qc, log_scale) = self.centre(&y);
        let side = 2 * radius + 1;
        let box_size = side.pow(l as u32) as f64;
        let prune = 0.5 * tol / (box_size * self.coeff_mass().max(1e-300) * self.shifts.len().max(1) as f64);
        let cut = -prune.ln() / PI;
        let mut tail = self.coeff_mass() * self.shell_tail(radius);

        let mut p = vec![0i64; l];
        let mut q = vec![0i64; l];
        let mut qf = vec![0.0; l];
        let mut dq = vec![0.0; l];
        let mut off = vec![0i64; l];
        for s in &self.shifts {
            let rel: Vec<f64> = (0..l).map(|i| qc[i] - s.m[i] as f64).collect();
            let centre: Vec<i64> = (0..l)
                .map(|i| (0..l).map(|j| self.b_inv[i * l + j] * rel[j]).sum::<f64>().round() as i64)
                .collect();
            off.iter_mut().for_each(|o| *o = -(radius as i64));
            let mut pruned = 0usize;
            'odometer: loop {
                for i in 0..l {
                    p[i] = centre[i] + off[i];
                }
                for i in 0..l {
                    let mut acc = s.m[i];
                    for j in 0..l {
                        acc += self.b[i * l + j] as i64 * p[j];
                    }
                    q[i] = acc;
                    qf[i] = acc as f64;
                    dq[i] = qf[i] - qc[i];
                }
                let d2 = self.quad(&self.im, &dq, &dq);
                if d2 > cut {
                    pruned += 1;
                } else {
                    let phase = PI * self.quad(&self.re, &qf, &qf)
                        + 2.0 * PI * qf.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                    let mut c = s.coeff * Complex64::from_polar((-PI * d2).exp(), phase);
                    if let Some(par) = &self.parity {
                        if par.iter().zip(&p).map(|(a, b)| a * b).sum::<i64>().rem_euclid(2) == 1 {
                            c = -c;
                        }
                    }
                    f(&q, c);
                }
                for i in 0..l {
                    if off[i] < radius as i64 {
                        off[i] += 1;
                        continue 'odometer;
                    }
                    off[i] = -(radius as i64);
                }
                break;
            }
            tail += pruned as f64 * prune * s.coeff.norm();
        }
        Ok((log_scale, tail, radius))
    }

    /// Evaluate with a tail bound below `tol` in mantissa units.
    pub fn eval_scaled(&self, z: &[Complex64], tol: f64) -> Result<Scaled> {
        self.eval_scaled_min_radius(z, tol, 0)
    }

    pub fn eval_scaled_min_radius(&self, z: &[Complex64], tol: f64, min_radius: usize) -> Result<Scaled> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        let (log_scale, tail, radius) = self.visit_terms_min_radius(z, tol, min_radius, |_, c| {
            // Kahan summation
            let y = c - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        })?;
        Ok(Scaled { mantissa: acc, log_scale, tail, radius })
    }

    /// Evaluate with an absolute tail bound below `tol`.
    pub fn eval(&self, z: &[Complex64], tol: f64) -> Result<Scaled> {
        self.eval_min_radius(z, tol, 0)
    }

    pub fn eval_min_radius(&self, z: &[Complex64], tol: f64, min_radius: usize) -> Result<Scaled> {
        let y: Vec<f64> = z.iter().map(|c| c.im).collect();
        check_len(self.l, y.len())?;
        let (_, log_scale) = self.centre(&y);
        let scaled_tol = tol * (-log_scale).exp();
        if scaled_tol < 1e-290 {
            return Err(Error::ResourceLimit(format!(
                "absolute tolerance {tol:e} is below double precision at this point"
            )));
        }
        self.eval_scaled_min_radius(z, scaled_tol, min_radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta3(tau: Complex64) -> GaussianSeries {
        let omega = CMatrix::from_element(1, 1, tau);
        GaussianSeries::new(&omega, &[vec![1]], vec![Shift { m: vec![0], coeff: Complex64::new(1.0, 0.0) }], None, 64)
            .unwrap()
    }

    #[test]
    fn classical_theta_constant() {
        let s = theta3(Complex64::new(0.0, 1.0));
        let brute: f64 = (-20i64..=20).map(|p| (-PI * (p * p) as f64).exp()).sum();
        let v = s.eval(&[Complex64::new(0.0, 0.0)], 1e-15).unwrap();
        assert!((v.value().re - brute).abs() < 1e-14);
        assert!((v.value().re - 1.086_434_811_213_308).abs() < 1e-14);
    }

    #[test]
    fn brute_force_agreement_off_axis() {
        let tau = Complex64::new(0.3, 0.7);
        let s = theta3(tau);
        let z = Complex64::new(0.2, 0.9);
        let brute: Complex64 = (-60i64..=60)
            .map(|p| {
                let q = p as f64;
                (Complex64::i() * PI * tau * q * q + Complex64::i() * 2.0 * PI * q * z).exp()
            })
            .sum();
        let v = s.eval(&[z], 1e-13).unwrap();
        assert!((v.value() - brute).norm() < 1e-12 * brute.norm().max(1.0));
    }

    #[test]
    fn tail_bound_dominates_truncation_change() {
        let s = theta3(Complex64::new(0.1, 0.4));
        let z = [Complex64::new(0.3, 1.7)];
        let loose = s.eval_scaled(&z, 1e-4).unwrap();
        let tight = s.eval_scaled(&z, 1e-15).unwrap();
        assert!(tight.radius > loose.radius);
        assert!((loose.mantissa - tight.mantissa).norm() <= loose.tail + tight.tail);
    }

    #[test]
    fn rejects_bad_period_matrix() {
        let omega = CMatrix::from_element(1, 1, Complex64::new(0.0, -1.0));
        let r = GaussianSeries::new(&omega, &[vec![1]], vec![], None, 64);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn radius_cap_is_enforced() {
        let omega = CMatrix::from_element(1, 1, Complex64::new(0.0, 1e-4));
        let s = GaussianSeries::new(&omega, &[vec![1]], vec![Shift { m: vec![0], coeff: 1.0.into() }], None, 8)
            .unwrap();
        assert!(matches!(s.radius_for(1e-12), Err(Error::ResourceLimit(_))));
    }
}

//! The SU(2) specialization: level-k' theta functions in the coordinate `z`,
//! `v = z α̌₁`, their two families and the CST basis built from them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abelian::ThetaValue;
use crate::error::{Error, Result};
use crate::lattice::{CMatrix, GaussianSeries, Scaled, Shift, DEFAULT_RADIUS_CAP};
use crate::util;

/// `θ_{m,k'}(z) = Σ_p c_p e^{πiτ(m+k'p)²/k' + 2πi(m+k'p)z}` with `c_p = 1`
/// (integral) or `c_p = (−1)^p` (half).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Su2Family {
    Integral,
    Half,
}

fn su2_series(kp: i64, tau: Complex64, t: f64, family: Su2Family, shifts: &[(i64, f64)]) -> Result<GaussianSeries> {
    if kp < 1 {
        return Err(Error::InvalidInput(format!("level must be >= 1, got {kp}")));
    }
    let omega = CMatrix::from_element(1, 1, tau * (t / 2.0));
    let shifts = shifts.iter().map(|&(m, c)| Shift { m: vec![m], coeff: c.into() }).collect();
    let parity = match family {
        Su2Family::Integral => None,
        Su2Family::Half => Some(vec![1]),
    };
    GaussianSeries::new(&omega, &[vec![kp]], shifts, parity, DEFAULT_RADIUS_CAP)
}

#[derive(Clone, Debug)]
pub struct SU2Theta {
    pub kp: i64,
    pub m: i64,
    pub family: Su2Family,
    pub tau: Complex64,
    pub tol: f64,
    series: GaussianSeries,
}

impl SU2Theta {
    pub fn new(kp: i64, m: i64, family: Su2Family, tau: Complex64, tol: f64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::InvalidInput(format!("Im τ must be positive, got {}", tau.im)));
        }
        let series = su2_series(kp, tau, 2.0 / kp as f64, family, &[(m, 1.0)])?;
        Ok(Self { kp, m, family, tau, tol, series })
    }

    pub fn series(&self) -> &GaussianSeries {
        &self.series
    }

    pub fn eval_scaled(&self, z: Complex64) -> Result<Scaled> {
        self.series.eval_scaled(&[z], self.tol)
    }

    pub fn eval(&self, z: Complex64) -> Result<ThetaValue> {
        let r = self.series.eval(&[z], self.tol)?;
        Ok(ThetaValue { value: r.value(), tail: r.abs_tail(), radius: r.radius })
    }
}

pub fn su2_theta_eval(t: &SU2Theta, z: Complex64) -> Result<ThetaValue> {
    t.eval(z)
}

/// Factor in `θ(z + τ) = f · θ(z)`; the half family carries an extra −1.
pub fn su2_automorphy_factor(kp: i64, family: Su2Family, tau: Complex64, z: Complex64) -> Complex64 {
    let kp = kp as f64;
    let f = (-Complex64::i() * PI * (2.0 * kp * z + kp * tau)).exp();
    match family {
        Su2Family::Integral => f,
        Su2Family::Half => -f,
    }
}

/// `c` with `θ^{half}_{m,k'}(z) = c · θ_{m,k'}(z + 1/(2k'))`.
pub fn su2_half_shift_factor(kp: i64, m: i64) -> Complex64 {
    Complex64::from_polar(1.0, -PI * m as f64 / kp as f64)
}

/// Sign in `θ_m(−z) = s · θ_{k'−m}(z)`.
pub fn su2_reflection_sign(family: Su2Family) -> f64 {
    match family {
        Su2Family::Integral => 1.0,
        Su2Family::Half => -1.0,
    }
}

/// Residual of `∂_τθ = (4πik')⁻¹ ∂²_zθ` by finite differences, relative to
/// the size of the left side.
pub fn su2_heat_residual(kp: i64, m: i64, family: Su2Family, tau: Complex64, z: Complex64, h: f64) -> Result<f64> {
    let nan = Complex64::new(f64::NAN, 0.0);
    let g = |dt: f64, dz: f64| {
        SU2Theta::new(kp, m, family, tau + dt, 1e-15).and_then(|t| t.eval(z + dz)).map(|v| v.value).unwrap_or(nan)
    };
    let lhs = util::d1(|s| g(s, 0.0), h);
    let rhs = util::d2(|s| g(0.0, s), h) / (Complex64::i() * 4.0 * PI * kp as f64);
    if !(lhs - rhs).norm().is_finite() {
        return Err(Error::InvalidInput("evaluation failed near the sample point".into()));
    }
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// A linear combination `Σ c_m θ_{m,k'}`.
pub type Su2Combination = Vec<(i64, f64)>;

/// Split of the level-k' integral family into Weyl-even and Weyl-odd parts.
#[derive(Clone, Debug, Serialize)]
pub struct Su2Decomposition {
    pub kp: i64,
    pub dim_plus: usize,
    pub dim_minus: usize,
    pub plus_basis: Vec<Su2Combination>,
    pub minus_basis: Vec<Su2Combination>,
}

pub fn su2_dim_decomposition(kp: i64) -> Result<Su2Decomposition> {
    if kp < 1 {
        return Err(Error::InvalidInput(format!("level must be >= 1, got {kp}")));
    }
    let mut plus_basis = vec![vec![(0, 1.0)]];
    let mut minus_basis = Vec::new();
    for j in 1..=(kp - 1) / 2 {
        plus_basis.push(vec![(j, 1.0), (kp - j, 1.0)]);
        minus_basis.push(vec![(j, 1.0), (kp - j, -1.0)]);
    }
    if kp % 2 == 0 {
        plus_basis.push(vec![(kp / 2, 1.0)]);
    }
    Ok(Su2Decomposition { kp, dim_plus: plus_basis.len(), dim_minus: minus_basis.len(), plus_basis, minus_basis })
}

/// Mantissas of the combinations at the sample points; one row per point.
fn combination_matrix(kp: i64, tau: Complex64, basis: &[Su2Combination], points: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let t = 2.0 / kp as f64;
    let series: Vec<GaussianSeries> =
        basis.iter().map(|b| su2_series(kp, tau, t, Su2Family::Integral, b)).collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(points.len(), basis.len());
    for (i, z) in points.iter().enumerate() {
        for (j, s) in series.iter().enumerate() {
            m[(i, j)] = s.eval_scaled(&[*z], 1e-15)?.mantissa;
        }
    }
    Ok(m)
}

/// Numerical ranks of the two declared bases, and the largest parity defect
/// `|f(−z) ∓ f(z)|` over the samples.
#[derive(Clone, Debug, Serialize)]
pub struct Su2BasisCheck {
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub parity_defect: f64,
}

pub fn su2_basis_check(d: &Su2Decomposition, tau: Complex64, seed: u64) -> Result<Su2BasisCheck> {
    let samples = 2 * (d.dim_plus + d.dim_minus) + 4;
    let points: Vec<Complex64> = util::random_torus_points(seed, samples, 1, tau).into_iter().map(|p| p[0]).collect();
    let neg: Vec<Complex64> = points.iter().map(|z| -z).collect();
    let rank = |m: &DMatrix<Complex64>| -> usize {
        if m.ncols() == 0 {
            return 0;
        }
        let sv = m.clone().svd(false, false).singular_values;
        let top = sv.max();
        sv.iter().filter(|s| **s > 1e-8 * top).count()
    };
    let mut defect: f64 = 0.0;
    let mut ranks = [0usize; 2];
    for (idx, (basis, sign)) in [(&d.plus_basis, 1.0), (&d.minus_basis, -1.0)].into_iter().enumerate() {
        let a = combination_matrix(d.kp, tau, basis, &points)?;
        let b = combination_matrix(d.kp, tau, basis, &neg)?;
        // the envelope is even in Im z, so mantissas obey the same parity
        let scale = a.iter().map(|c| c.norm()).fold(1e-300, f64::max);
        defect = defect.max((&b - &a * Complex64::new(sign, 0.0)).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale);
        ranks[idx] = rank(&a);
    }
    Ok(Su2BasisCheck { rank_plus: ranks[0], rank_minus: ranks[1], parity_defect: defect })
}

/// `ψ_{m,k} = σ⁻¹ Σ_w ε(w) θ⁰_{m+1,k'}(w v)` for `k' = 2k+4`, or for the
/// orbifold level `k' = 2k+3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Su2Psi {
    pub k: i64,
    pub kp: i64,
    pub m: i64,
    pub family: Su2Family,
    pub orbifold: bool,
}

pub fn su2_psi_basis(k: i64, kp: i64, family: Su2Family) -> Result<Vec<Su2Psi>> {
    if k < 0 {
        return Err(Error::InvalidInput(format!("level must be >= 0, got {k}")));
    }
    let orbifold = match kp - 2 * k {
        4 => false,
        3 => true,
        _ => return Err(Error::InvalidInput(format!("k' must be 2k+3 or 2k+4, got {kp} for k = {k}"))),
    };
    Ok((0..=k).map(|m| Su2Psi { k, kp, m, family, orbifold }).collect())
}

/// `k'` such that `t = 2/k'`, if any.
pub fn su2_admissible_t(t: f64) -> Option<i64> {
    if !(t > 0.0) {
        return None;
    }
    let kp = 2.0 / t;
    let r = kp.round();
    ((kp - r).abs() < 1e-9 * kp.max(1.0) && r >= 1.0).then_some(r as i64)
}

impl Su2Psi {
    /// Lattice series of `e^{iπτt/4} σ C_t(ψ)` (the phase removes the ρ term).
    pub fn image_series(&self, tau: Complex64, t: f64) -> Result<GaussianSeries> {
        let q = self.m + 1;
        let c = match self.family {
            Su2Family::Integral => -1.0,
            Su2Family::Half => 1.0,
        };
        // θ(−z) for the half family: −θ_{k'−q}
        su2_series(self.kp, tau, t, self.family, &[(q, 1.0), (self.kp - q, c)])
    }

    /// `σ(z) C_t(ψ)(z)` with `σ(z) = e^{2πiz} − e^{−2πiz}`.
    pub fn cst_times_sigma(&self, tau: Complex64, t: f64, z: Complex64) -> Result<Complex64> {
        let s = self.image_series(tau, t)?.eval(&[z], 1e-15)?.value();
        Ok(rho_phase(tau, t) * s)
    }

    /// `C_t(ψ)(z)` at the gate time `t = 2/k'`.
    pub fn cst_eval(&self, tau: Complex64, z: Complex64) -> Result<Complex64> {
        let s = sigma(z);
        if s.norm() < crate::cst::SIGMA_THRESHOLD {
            return Err(Error::SingularLocus(s.norm()));
        }
        Ok(self.cst_times_sigma(tau, 2.0 / self.kp as f64, z)? / s)
    }
}

/// `e^{−iπτt‖ρ‖²}` with `‖ρ‖² = 1/2`.
pub fn rho_phase(tau: Complex64, t: f64) -> Complex64 {
    (-Complex64::i() * PI * tau * t * 0.5).exp()
}

pub fn sigma(z: Complex64) -> Complex64 {
    let e = (Complex64::i() * 2.0 * PI * z).exp();
    e - 1.0 / e
}

/// Residual of the holomorphic descent `G(z + τ) = e_0(z) G(z)` for
/// `G = σ C(ψ)`, where `e_0` is the factor with zero characteristic.
pub fn su2_descent_residual(psi: &Su2Psi, tau: Complex64, z: Complex64) -> Result<f64> {
    let t = 2.0 / psi.kp as f64;
    let g0 = psi.cst_times_sigma(tau, t, z)?;
    let g1 = psi.cst_times_sigma(tau, t, z + tau)?;
    let e = su2_automorphy_factor(psi.kp, Su2Family::Integral, tau, z) * g0;
    Ok((g1 - e).norm() / e.norm().max(1e-300))
}

/// Least-squares test that products `θ⁻_{1,4} · f`, for `f` in the level-2k
/// even basis, lie in the span of the level-(2k+4) odd basis. Returns the
/// largest relative residual.
pub fn su2_product_isomorphism_check(k: i64, tau: Complex64, samples: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidInput(format!("level must be >= 1, got {k}")));
    }
    let plus = su2_dim_decomposition(2 * k)?.plus_basis;
    let minus = su2_dim_decomposition(2 * k + 4)?.minus_basis;
    if samples < 2 * minus.len() {
        return Err(Error::InvalidInput(format!("need at least {} samples", 2 * minus.len())));
    }
    let points: Vec<Complex64> =
        util::random_torus_points(0x5eed ^ k as u64, samples, 1, tau).into_iter().map(|p| p[0]).collect();
    let a = combination_matrix(2 * k + 4, tau, &minus, &points)?;
    let f = combination_matrix(2 * k, tau, &plus, &points)?;
    let g = combination_matrix(4, tau, &[vec![(1, 1.0), (3, -1.0)]], &points)?;
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() < 1e-10 * sv.max() {
        return Err(Error::IllConditioned(format!("odd basis condition number {:e}", sv.max() / sv.min())));
    }
    let mut worst: f64 = 0.0;
    for j in 0..f.ncols() {
        let b: DVector<Complex64> = DVector::from_fn(points.len(), |i, _| f[(i, j)] * g[(i, 0)]);
        let x = svd.solve(&b, 1e-14).map_err(|e| Error::IllConditioned(e.into()))?;
        let r = (&a * x - &b).norm() / b.norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

//! Theta functions on polarized abelian varieties.

use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::exact::{int_det, QMatrix};
use crate::lattice::{CMatrix, GaussianSeries, Shift, DEFAULT_RADIUS_CAP};

/// An abelian variety `ℂ^l / (ℤ^l ⊕ Ωδℤ^l)` with polarization type δ and a level.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedTorus {
    pub l: usize,
    pub omega: CMatrix,
    pub delta: Vec<i64>,
    pub k: i64,
}

/// JSON form: `{l, omega: [[[re, im], ...], ...], delta, k}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarizedTorusDescriptor {
    pub l: usize,
    pub omega: Vec<Vec<[f64; 2]>>,
    pub delta: Vec<i64>,
    pub k: i64,
}

impl PolarizedTorus {
    pub fn new(omega: CMatrix, delta: Vec<i64>, k: i64) -> Result<Self> {
        let l = omega.nrows();
        check_len(l, omega.ncols())?;
        check_len(l, delta.len())?;
        if k < 1 {
            return Err(Error::InvalidInput(format!("level must be >= 1, got {k}")));
        }
        if delta.iter().any(|&d| d < 1) || delta.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidInput(format!("{delta:?} is not a chain of elementary divisors")));
        }
        if (&omega - omega.transpose()).map(|c| c.norm()).max() > 1e-12 * (1.0 + omega.map(|c| c.norm()).max()) {
            return Err(Error::InvalidInput("Ω is not symmetric".into()));
        }
        if omega.map(|c| c.im).cholesky().is_none() {
            return Err(Error::InvalidInput("Im Ω is not positive definite".into()));
        }
        Ok(Self { l, omega, delta, k })
    }

    /// Principal polarization with `Ω = τ·I`.
    pub fn diagonal(l: usize, tau: Complex64, k: i64) -> Result<Self> {
        Self::new(CMatrix::from_diagonal_element(l, l, tau), vec![1; l], k)
    }

    pub fn from_descriptor(d: &PolarizedTorusDescriptor) -> Result<Self> {
        check_len(d.l, d.omega.len())?;
        for row in &d.omega {
            check_len(d.l, row.len())?;
        }
        let omega = CMatrix::from_fn(d.l, d.l, |i, j| Complex64::new(d.omega[i][j][0], d.omega[i][j][1]));
        Self::new(omega, d.delta.clone(), d.k)
    }

    pub fn descriptor(&self) -> PolarizedTorusDescriptor {
        PolarizedTorusDescriptor {
            l: self.l,
            omega: (0..self.l)
                .map(|i| (0..self.l).map(|j| [self.omega[(i, j)].re, self.omega[(i, j)].im]).collect())
                .collect(),
            delta: self.delta.clone(),
            k: self.k,
        }
    }

    pub fn omega_imag(&self) -> DMatrix<f64> {
        self.omega.map(|c| c.im)
    }

    pub fn det_delta(&self) -> i64 {
        self.delta.iter().product()
    }

    /// Number of level-k theta functions, `δ₁⋯δ_l k^l`.
    pub fn theta_dimension(&self) -> usize {
        (self.det_delta() * self.k.pow(self.l as u32)) as usize
    }

    /// All labels `0 ≤ m_j < kδ_j`, lexicographic.
    pub fn labels(&self) -> Vec<ThetaLabel> {
        self.delta
            .iter()
            .map(|&d| 0..self.k * d)
            .multi_cartesian_product()
            .map(|m| ThetaLabel { m })
            .collect()
    }

    /// The lattice vector `Ωδb` in z-coordinates.
    pub fn period(&self, b: &[i64]) -> Vec<Complex64> {
        (0..self.l)
            .map(|i| (0..self.l).map(|j| self.omega[(i, j)] * (self.delta[j] * b[j]) as f64).sum())
            .collect()
    }
}

/// Label of a level-k theta function, `m_j ∈ {0, …, kδ_j − 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaLabel {
    pub m: Vec<i64>,
}

impl ThetaLabel {
    pub fn new(m: Vec<i64>) -> Self {
        Self { m }
    }
}

/// A theta value with its certified truncation bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    pub tail: f64,
    pub radius: usize,
}

/// Evaluator for `θ_m(z, Ω) = Σ_p exp(πi q·(Ω/k)q + 2πi q·z)`, `q = m + kδp`.
#[derive(Clone, Debug)]
pub struct ThetaEvaluator {
    pub torus: PolarizedTorus,
    pub label: ThetaLabel,
    pub tol: f64,
    pub min_radius: usize,
    series: GaussianSeries,
}

impl ThetaEvaluator {
    pub fn new(torus: PolarizedTorus, label: ThetaLabel, tol: f64) -> Result<Self> {
        Self::with_radius_cap(torus, label, tol, DEFAULT_RADIUS_CAP)
    }

    pub fn with_radius_cap(torus: PolarizedTorus, label: ThetaLabel, tol: f64, cap: usize) -> Result<Self> {
        check_len(torus.l, label.m.len())?;
        for (m, d) in label.m.iter().zip(&torus.delta) {
            if *m < 0 || *m >= torus.k * d {
                return Err(Error::InvalidInput(format!("label {:?} out of range", label.m)));
            }
        }
        let l = torus.l;
        let omega = torus.omega.map(|c| c / torus.k as f64);
        let b: Vec<Vec<i64>> =
            (0..l).map(|i| (0..l).map(|j| if i == j { torus.k * torus.delta[i] } else { 0 }).collect()).collect();
        let series = GaussianSeries::new(
            &omega,
            &b,
            vec![Shift { m: label.m.clone(), coeff: Complex64::new(1.0, 0.0) }],
            None,
            cap,
        )?;
        Ok(Self { torus, label, tol, min_radius: 0, series })
    }

    /// Force the truncation radius to be at least `r`.
    pub fn with_min_radius(mut self, r: usize) -> Self {
        self.min_radius = r;
        self
    }

    pub fn series(&self) -> &GaussianSeries {
        &self.series
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<ThetaValue> {
        let s = self.series.eval_min_radius(z, self.tol, self.min_radius)?;
        Ok(ThetaValue { value: s.value(), tail: s.abs_tail(), radius: s.radius })
    }
}

pub fn theta_eval(ev: &ThetaEvaluator, z: &[Complex64]) -> Result<ThetaValue> {
    ev.eval(z)
}

/// `e^{−2πik(δb)·z − πik(δb)ᵀΩ(δb)}`, the factor with
/// `θ(z + Ωδb) = factor · θ(z)`.
pub fn automorphy_factor(torus: &PolarizedTorus, k: i64, b: &[i64], z: &[Complex64]) -> Result<Complex64> {
    check_len(torus.l, b.len())?;
    check_len(torus.l, z.len())?;
    let db: Vec<f64> = b.iter().zip(&torus.delta).map(|(b, d)| (b * d) as f64).collect();
    let lin: Complex64 = db.iter().zip(z).map(|(d, z)| z * *d).sum();
    let mut quad = Complex64::new(0.0, 0.0);
    for i in 0..torus.l {
        for j in 0..torus.l {
            quad += torus.omega[(i, j)] * db[i] * db[j];
        }
    }
    let kf = k as f64;
    Ok((Complex64::i() * (-2.0 * PI * kf) * lin - Complex64::i() * PI * kf * quad).exp())
}

/// Result of an integral change of basis `Ω̃ = PΩPᵀ`.
#[derive(Clone, Debug)]
pub struct ChangeOfBasis {
    pub p: Vec<Vec<i64>>,
    pub omega_tilde: CMatrix,
    /// `R = (Pᵀ)⁻¹δ`, so the new exponents are `m̃ + kRp̃`.
    pub r: Vec<Vec<i64>>,
    p_inv_t: Vec<Vec<i64>>,
    torus: PolarizedTorus,
}

impl ChangeOfBasis {
    /// New coordinates `z̃ = Pz`.
    pub fn transform_point(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.p.iter().map(|row| row.iter().zip(z).map(|(p, z)| z * *p as f64).sum()).collect()
    }

    /// New label `m̃ = (Pᵀ)⁻¹m`.
    pub fn relabel(&self, m: &ThetaLabel) -> Vec<i64> {
        self.p_inv_t.iter().map(|row| row.iter().zip(&m.m).map(|(a, b)| a * b).sum()).collect()
    }

    /// Series in the new coordinates for the image of label `m`.
    pub fn series(&self, m: &ThetaLabel) -> Result<GaussianSeries> {
        let k = self.torus.k;
        let b: Vec<Vec<i64>> = self.r.iter().map(|row| row.iter().map(|x| x * k).collect()).collect();
        GaussianSeries::new(
            &self.omega_tilde.map(|c| c / k as f64),
            &b,
            vec![Shift { m: self.relabel(m), coeff: Complex64::new(1.0, 0.0) }],
            None,
            DEFAULT_RADIUS_CAP,
        )
    }
}

pub fn change_of_basis(torus: &PolarizedTorus, p: &[Vec<i64>]) -> Result<ChangeOfBasis> {
    check_len(torus.l, p.len())?;
    for row in p {
        check_len(torus.l, row.len())?;
    }
    let det = int_det(p);
    if det.abs() != 1 {
        return Err(Error::NotUnimodular(det));
    }
    let pq = QMatrix::from_ints(p);
    let p_inv_t = pq.transpose().inverse()?.to_ints().expect("inverse of a unimodular matrix is integral");
    let l = torus.l;
    let pm = CMatrix::from_fn(l, l, |i, j| Complex64::new(p[i][j] as f64, 0.0));
    let omega_tilde = &pm * &torus.omega * pm.transpose();
    let r = (0..l).map(|i| (0..l).map(|j| p_inv_t[i][j] * torus.delta[j]).collect()).collect();
    Ok(ChangeOfBasis { p: p.to_vec(), omega_tilde, r, p_inv_t, torus: torus.clone() })
}

/// Averaged heat kernel density in the periodic coordinates `z = η + Ωδξ`.
#[derive(Clone, Debug)]
pub struct HeatMeasure {
    pub l: usize,
    pub t: f64,
    pub gram: DMatrix<f64>,
    pub delta: Vec<i64>,
    pub normalization: f64,
}

impl HeatMeasure {
    pub fn new(torus: &PolarizedTorus, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
        }
        let gram = torus.omega_imag();
        let det = gram.determinant();
        let normalization = (2.0 / t).powf(torus.l as f64 / 2.0) * det.sqrt() * torus.det_delta() as f64;
        Ok(Self { l: torus.l, t, gram, delta: torus.delta.clone(), normalization })
    }

    pub fn eval(&self, _eta: &[f64], xi: &[f64]) -> f64 {
        let dx: Vec<f64> = xi.iter().zip(&self.delta).map(|(x, d)| x * *d as f64).collect();
        let mut q = 0.0;
        for i in 0..self.l {
            for j in 0..self.l {
                q += dx[i] * self.gram[(i, j)] * dx[j];
            }
        }
        self.normalization * (-2.0 * PI / self.t * q).exp()
    }
}

pub fn heat_measure_eval(hm: &HeatMeasure, eta: &[f64], xi: &[f64]) -> f64 {
    hm.eval(eta, xi)
}

/// The distribution `θ⁰_m(x) = Σ_p e^{2πi(m + kδp)·x}` on the real torus,
/// represented by its Fourier support `m + kδℤ^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsDistribution {
    pub l: usize,
    pub k: i64,
    pub delta: Vec<i64>,
    pub m: Vec<i64>,
}

impl BsDistribution {
    pub fn contains(&self, q: &[i64]) -> bool {
        q.len() == self.l
            && q.iter().zip(&self.m).zip(&self.delta).all(|((q, m), d)| (q - m).rem_euclid(self.k * d) == 0)
    }

    /// Pairing with the trigonometric polynomial `Σ c_q e^{−2πiq·x}`.
    pub fn pair(&self, fourier: &[(Vec<i64>, Complex64)]) -> Complex64 {
        fourier.iter().filter(|(q, _)| self.contains(q)).map(|(_, c)| c).sum()
    }
}

pub fn bs_distribution_theta0(l: usize, k: i64, delta: &[i64], m: &[i64]) -> Result<BsDistribution> {
    check_len(l, delta.len())?;
    check_len(l, m.len())?;
    if m.iter().zip(delta).any(|(m, d)| *m < 0 || *m >= k * d) {
        return Err(Error::InvalidInput(format!("label {m:?} out of range")));
    }
    Ok(BsDistribution { l, k, delta: delta.to_vec(), m: m.to_vec() })
}

/// Coefficients of the point mass at `δ⁻¹m′/k` on the basis `θ⁰_m`.
pub fn delta_expansion(l: usize, k: i64, delta: &[i64], m_prime: &[i64]) -> Vec<(Vec<i64>, Complex64)> {
    debug_assert_eq!(l, delta.len());
    delta
        .iter()
        .map(|&d| 0..k * d)
        .multi_cartesian_product()
        .map(|m| {
            let phase: f64 =
                m.iter().zip(m_prime).zip(delta).map(|((a, b), d)| (a * b) as f64 / (k * d) as f64).sum();
            (m, Complex64::from_polar(1.0, -2.0 * PI * phase))
        })
        .collect()
}

/// Factor by which the heat operator at time `t` followed by analytic
/// continuation multiplies the mode `e^{2πiq·x}`: `e^{πi t qᵀΩq}`.
pub fn cst_mode_factor(omega: &CMatrix, t: f64, q: &[i64]) -> Complex64 {
    let l = q.len();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            s += omega[(i, j)] * (q[i] * q[j]) as f64;
        }
    }
    (Complex64::i() * PI * t * s).exp()
}

/// CST image of `θ⁰_m` at `t = 1/k`: the level-k theta function `θ_m(·, Ω)`.
pub fn abelian_cst(l: usize, k: i64, delta: &[i64], m: &[i64], omega: &CMatrix, t: f64, tol: f64) -> Result<ThetaEvaluator> {
    if k < 1 || (t * k as f64 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("the CST maps onto level-{k} thetas only at t = 1/{k}, got {t}")));
    }
    let dist = bs_distribution_theta0(l, k, delta, m)?;
    let torus = PolarizedTorus::new(omega.clone(), dist.delta, k)?;
    ThetaEvaluator::new(torus, ThetaLabel::new(dist.m), tol)
}

/// `d/ds θ(Ω + sΩ₀) + (i/4πk) Σ Ω₀_{jj'} ∂_j∂_{j'}θ` relative to `|θ|`,
/// by finite differences with step `h`, for a real symmetric direction `Ω₀`.
pub fn heat_residual(torus: &PolarizedTorus, label: &ThetaLabel, dir: &[Vec<f64>], z: &[Complex64], h: f64) -> Result<f64> {
    let l = torus.l;
    let tol = 1e-15;
    let at = |s: f64| -> Result<Complex64> {
        let om = CMatrix::from_fn(l, l, |i, j| torus.omega[(i, j)] + dir[i][j] * s);
        let t = PolarizedTorus::new(om, torus.delta.clone(), torus.k)?;
        Ok(ThetaEvaluator::new(t, label.clone(), tol)?.eval(z)?.value)
    };
    let vals: Vec<Complex64> = [-2.0, -1.0, 1.0, 2.0].iter().map(|&c| at(c * h)).collect::<Result<_>>()?;
    let dt = (vals[0] - vals[1] * 8.0 + vals[2] * 8.0 - vals[3]) / (12.0 * h);
    let ev = ThetaEvaluator::new(torus.clone(), label.clone(), tol)?;
    let f = |p: &[Complex64]| ev.eval(p).map(|v| v.value).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let lap = crate::util::weighted_laplacian(&f, z, dir, h);
    let rhs = -Complex64::i() / (4.0 * PI * torus.k as f64) * lap;
    let scale = ev.eval(z)?.value.norm().max(dt.norm()).max(1e-300);
    Ok((dt - rhs).norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{random_torus_points, FD_STEP};

    fn i() -> Complex64 {
        Complex64::i()
    }

    fn theta(torus: &PolarizedTorus, m: Vec<i64>) -> ThetaEvaluator {
        ThetaEvaluator::new(torus.clone(), ThetaLabel::new(m), 1e-14).unwrap()
    }

    #[test]
    fn classical_value() {
        let t = PolarizedTorus::diagonal(1, i(), 1).unwrap();
        let brute: f64 = (-20i64..=20).map(|p| (-PI * (p * p) as f64).exp()).sum();
        let v = theta(&t, vec![0]).eval(&[Complex64::new(0.0, 0.0)]).unwrap();
        assert!((v.value.re - brute).abs() < 1e-13);
        assert!(v.value.im.abs() < 1e-15);
        assert!(v.tail < 1e-14);
    }

    #[test]
    fn radius_consistency() {
        let t = PolarizedTorus::diagonal(2, Complex64::new(0.2, 0.9), 2).unwrap();
        let ev = ThetaEvaluator::new(t, ThetaLabel::new(vec![1, 0]), 1e-10).unwrap();
        let z = [Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.4)];
        let a = ev.eval(&z).unwrap();
        let b = ev.clone().with_min_radius(a.radius + 5).eval(&z).unwrap();
        assert_eq!(b.radius, a.radius + 5);
        assert!((a.value - b.value).norm() < 2e-10);
    }

    #[test]
    fn integer_periodicity() {
        let t = PolarizedTorus::diagonal(1, i(), 1).unwrap();
        let ev = theta(&t, vec![0]);
        let z = Complex64::new(0.3, 0.2);
        let a = ev.eval(&[z]).unwrap().value;
        let b = ev.eval(&[z + 1.0]).unwrap().value;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn automorphy_examples() {
        let t = PolarizedTorus::diagonal(1, i(), 2).unwrap();
        let z = [Complex64::new(0.1, 0.0)];
        assert_eq!(automorphy_factor(&t, 2, &[0], &z).unwrap(), Complex64::new(1.0, 0.0));
        let expect = (-4.0 * PI * i() * 0.1 - 2.0 * PI * i() * i()).exp();
        assert!((automorphy_factor(&t, 2, &[1], &z).unwrap() - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn quasi_periodicity_general_delta() {
        let omega = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.1, 1.2), Complex64::new(0.2, 0.3), Complex64::new(0.2, 0.3), Complex64::new(-0.3, 0.9)],
        );
        let t = PolarizedTorus::new(omega, vec![1, 2], 2).unwrap();
        for m in [vec![0, 0], vec![1, 3]] {
            let ev = theta(&t, m);
            for (idx, z) in random_torus_points(7, 5, 2, Complex64::new(0.0, 0.5)).iter().enumerate() {
                let b = if idx % 2 == 0 { vec![1, 0] } else { vec![0, -1] };
                let shifted: Vec<Complex64> = z.iter().zip(t.period(&b)).map(|(a, b)| a + b).collect();
                let lhs = ev.eval(&shifted).unwrap().value;
                let rhs = automorphy_factor(&t, t.k, &b, z).unwrap() * ev.eval(z).unwrap().value;
                assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn change_of_basis_examples() {
        let t = PolarizedTorus::diagonal(2, i(), 1).unwrap();
        let id = change_of_basis(&t, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(id.omega_tilde, t.omega);
        let cb = change_of_basis(&t, &[vec![1, 1], vec![0, 1]]).unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &[2.0 * i(), i(), i(), i()]);
        assert!((&cb.omega_tilde - expect).map(|c| c.norm()).max() < 1e-15);
        assert!(matches!(change_of_basis(&t, &[vec![2, 0], vec![0, 1]]), Err(Error::NotUnimodular(2))));
    }

    #[test]
    fn change_of_basis_preserves_values() {
        let omega = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.3, 1.1), Complex64::new(0.1, 0.2), Complex64::new(0.1, 0.2), Complex64::new(0.0, 0.8)],
        );
        let t = PolarizedTorus::new(omega, vec![1, 3], 2).unwrap();
        let cb = change_of_basis(&t, &[vec![2, 1], vec![1, 1]]).unwrap();
        for label in [vec![0, 0], vec![1, 4], vec![0, 5]] {
            let lab = ThetaLabel::new(label);
            let orig = ThetaEvaluator::new(t.clone(), lab.clone(), 1e-14).unwrap();
            let new = cb.series(&lab).unwrap();
            for z in random_torus_points(3, 4, 2, Complex64::new(0.0, 0.3)) {
                let a = orig.eval(&z).unwrap().value;
                let b = new.eval(&cb.transform_point(&z), 1e-14).unwrap().value();
                assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn heat_measure_examples() {
        let t = PolarizedTorus::diagonal(1, i(), 1).unwrap();
        let hm = HeatMeasure::new(&t, 1.0).unwrap();
        assert!((hm.eval(&[0.0], &[0.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(hm.eval(&[0.1], &[0.3]), hm.eval(&[0.7], &[0.3]));
        assert!(hm.eval(&[0.0], &[0.9]) > 0.0);
    }

    #[test]
    fn bs_distribution_pairing() {
        let d = bs_distribution_theta0(2, 2, &[1, 2], &[1, 3]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(d.pair(&[(vec![1, 3], one)]), one);
        assert_eq!(d.pair(&[(vec![3, -1], one)]), one);
        assert_eq!(d.pair(&[(vec![1, 2], one)]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn delta_expansion_reproduces_point_masses() {
        let (k, delta) = (2, vec![1, 2]);
        for m_prime in [vec![0, 0], vec![1, 3], vec![1, 2]] {
            let exp = delta_expansion(2, k, &delta, &m_prime);
            for q in [vec![0, 1], vec![5, -3], vec![2, 2]] {
                let direct = Complex64::from_polar(
                    1.0,
                    -2.0 * PI * (q[0] as f64 * m_prime[0] as f64 / 2.0 + q[1] as f64 * m_prime[1] as f64 / 4.0),
                );
                let via: Complex64 = exp
                    .iter()
                    .map(|(m, c)| bs_distribution_theta0(2, k, &delta, m).unwrap().pair(&[(q.clone(), *c)]))
                    .sum();
                assert!((direct - via).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_basis_orthonormal() {
        let (k, delta) = (3, vec![1, 2]);
        let labels: Vec<Vec<i64>> = delta.iter().map(|&d| 0..k * d).multi_cartesian_product().collect();
        let n = labels.len() as f64;
        for a in &labels {
            let ea = delta_expansion(2, k, &delta, a);
            for b in &labels {
                let eb = delta_expansion(2, k, &delta, b);
                let ip: Complex64 = ea.iter().zip(&eb).map(|(x, y)| x.1.conj() * y.1).sum::<Complex64>() / n;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cst_image_and_mode_factors() {
        let omega = CMatrix::from_element(1, 1, i());
        let ev = abelian_cst(1, 1, &[1], &[0], &omega, 1.0, 1e-14).unwrap();
        let v = ev.eval(&[Complex64::new(0.0, 0.0)]).unwrap().value;
        assert!((v.re - 1.086_434_811_213_308).abs() < 1e-13);
        assert!(abelian_cst(1, 2, &[1], &[0], &omega, 1.0, 1e-14).is_err());

        // series coefficients are the heat-flow damping factors of the modes
        let omega = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.2, 1.0), 0.3.into(), 0.3.into(), Complex64::new(0.0, 0.7)]);
        let ev = abelian_cst(2, 2, &[1, 2], &[1, 3], &omega, 0.5, 1e-14).unwrap();
        let dist = bs_distribution_theta0(2, 2, &[1, 2], &[1, 3]).unwrap();
        let mut seen = 0;
        ev.series()
            .visit_terms(&[Complex64::new(0.0, 0.0); 2], 1e-14, |q, c| {
                assert!(dist.contains(q));
                assert!((c - cst_mode_factor(&omega, 0.5, q)).norm() < 1e-13);
                seen += 1;
            })
            .unwrap();
        assert!(seen > 4);
    }

    #[test]
    fn mode_count() {
        let t = PolarizedTorus::new(CMatrix::from_diagonal_element(2, 2, i()), vec![1, 2], 3).unwrap();
        assert_eq!(t.labels().len(), 18);
        assert_eq!(t.theta_dimension(), 18);
    }

    #[test]
    fn heat_equation() {
        let omega = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.1, 0.9), Complex64::new(0.05, 0.2), Complex64::new(0.05, 0.2), Complex64::new(0.0, 0.7)]);
        let t = PolarizedTorus::new(omega, vec![1, 1], 2).unwrap();
        let dir = vec![vec![1.0, 0.3], vec![0.3, 0.5]];
        for z in random_torus_points(11, 3, 2, Complex64::new(0.0, 0.4)) {
            let r = heat_residual(&t, &ThetaLabel::new(vec![1, 0]), &dir, &z, FD_STEP).unwrap();
            assert!(r < 1e-5, "residual {r}");
        }
    }

    #[test]
    fn invalid_tori_rejected() {
        assert!(PolarizedTorus::new(CMatrix::from_element(1, 1, i()), vec![1], 0).is_err());
        assert!(PolarizedTorus::new(CMatrix::from_diagonal_element(2, 2, i()), vec![2, 3], 1).is_err());
        assert!(PolarizedTorus::new(CMatrix::from_element(1, 1, -i()), vec![1], 1).is_err());
    }
}

//! Weyl-symmetrized theta functions on `𝔥 / (Λ̌_R ⊕ τΛ̌_R)` for SU(n).
//!
//! A level-k theta function is
//! `θ_{γ,k}(v) = Σ_{α∈Λ_R} exp(πikτ⟨α+γ/k, α+γ/k⟩ + 2πik(α+γ/k)(v))`,
//! i.e. a lattice series with exponents `q = γ + kCp` and period matrix `τC⁻¹/k`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::abelian::ThetaValue;
use crate::error::{check_len, Error, Result};
use crate::lattice::{CMatrix, GaussianSeries, Scaled, Shift, DEFAULT_RADIUS_CAP};
use crate::rootsys::{RootSystem, Weight, WeylElement};
use crate::smith::invariant_factors;
use crate::util::random_torus_points;

/// Threshold below which `θ⁻_{ρ,n}` is treated as vanishing.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// A point of the upper half plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EllipticModulus {
    pub tau: Complex64,
}

impl EllipticModulus {
    pub fn new(tau: Complex64) -> Result<Self> {
        if tau.im > 0.0 && tau.re.is_finite() {
            Ok(Self { tau })
        } else {
            Err(Error::InvalidInput(format!("τ = {tau} is not in the upper half plane")))
        }
    }
}

/// Point `v = Σ z_j α̌_j` of the complexified Cartan subalgebra.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    pub coords: Vec<Complex64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }
}

impl std::ops::Deref for TorusPoint {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.coords
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Plain,
    Plus,
    Minus,
    HatPlus,
}

/// Reduce `m` modulo `k·C·ℤ^l` to a canonical representative.
pub fn reduce_mod_root_lattice(rs: &RootSystem, m: &Weight, k: i64) -> Weight {
    // p = floor(C⁻¹m / k) componentwise, then m − kCp
    let cm = rs.cartan_inv.mul_vec(&m.as_rational()).expect("length checked by caller");
    let p: Vec<i64> = cm.iter().map(|x| (x / k).floor().to_integer()).collect();
    m.sub(&rs.root_lattice_labels(&p).scale(k))
}

/// Build the lattice series of `Σ_s c_s θ_{m_s,k}` for the period matrix
/// `τ t C⁻¹`; `t = 1/k` is the holomorphic theta function itself.
pub(crate) fn weyl_family_series(
    rs: &RootSystem,
    k: i64,
    tau: Complex64,
    t: f64,
    shifts: impl IntoIterator<Item = (Weight, Complex64)>,
) -> Result<GaussianSeries> {
    let mut merged: Vec<(Weight, Complex64)> = Vec::new();
    let mut index: HashMap<Weight, usize> = HashMap::new();
    for (m, c) in shifts {
        let r = reduce_mod_root_lattice(rs, &m, k);
        match index.get(&r) {
            Some(&i) => merged[i].1 += c,
            None => {
                index.insert(r.clone(), merged.len());
                merged.push((r, c));
            }
        }
    }
    let shifts: Vec<Shift> = merged
        .into_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(m, coeff)| Shift { m: m.labels, coeff })
        .collect();
    let l = rs.l;
    let cinv = rs.cartan_inv_f64();
    let omega = CMatrix::from_fn(l, l, |i, j| tau * t * cinv[i][j]);
    let b: Vec<Vec<i64>> = rs.cartan.iter().map(|row| row.iter().map(|c| c * k).collect()).collect();
    GaussianSeries::new(&omega, &b, shifts, None, DEFAULT_RADIUS_CAP)
}

/// Weyl-orbit shifts of γ with unit or signed coefficients.
pub(crate) fn orbit_shifts(weyl: &[WeylElement], gamma: &Weight, signed: bool) -> Vec<(Weight, Complex64)> {
    weyl.iter()
        .map(|w| {
            let c = if signed { w.sign as f64 } else { 1.0 };
            (w.act(gamma), Complex64::new(c, 0.0))
        })
        .collect()
}

/// A genus-one non-abelian theta function of SU(n).
#[derive(Clone, Debug)]
pub struct NATheta {
    pub rs: RootSystem,
    pub gamma: Weight,
    pub k: i64,
    pub tau: EllipticModulus,
    pub symmetry: Symmetry,
    pub tol: f64,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Series(GaussianSeries),
    Ratio(Box<GaussianSeries>, Box<GaussianSeries>),
}

impl NATheta {
    pub fn new(
        rs: &RootSystem,
        gamma: Weight,
        k: i64,
        tau: EllipticModulus,
        symmetry: Symmetry,
        tol: f64,
    ) -> Result<Self> {
        check_len(rs.l, gamma.len())?;
        if k < 1 && symmetry != Symmetry::HatPlus {
            return Err(Error::InvalidInput(format!("level must be >= 1, got {k}")));
        }
        let kind = match symmetry {
            Symmetry::Plain => {
                Kind::Series(weyl_family_series(rs, k, tau.tau, 1.0 / k as f64, [(gamma.clone(), 1.0.into())])?)
            }
            Symmetry::Plus | Symmetry::Minus => {
                let weyl = rs.weyl_group()?;
                let shifts = orbit_shifts(&weyl, &gamma, symmetry == Symmetry::Minus);
                Kind::Series(weyl_family_series(rs, k, tau.tau, 1.0 / k as f64, shifts)?)
            }
            Symmetry::HatPlus => {
                if !gamma.is_dominant() || rs.level_of(&gamma) > k || k < 0 {
                    return Err(Error::InvalidInput(format!(
                        "{:?} is not in the level-{k} alcove",
                        gamma.labels
                    )));
                }
                let weyl = rs.weyl_group()?;
                let big_k = k + rs.n as i64;
                let n = rs.n as i64;
                let num = weyl_family_series(
                    rs,
                    big_k,
                    tau.tau,
                    1.0 / big_k as f64,
                    orbit_shifts(&weyl, &gamma.add(&rs.rho), true),
                )?;
                let den = weyl_family_series(rs, n, tau.tau, 1.0 / n as f64, orbit_shifts(&weyl, &rs.rho, true))?;
                Kind::Ratio(Box::new(num), Box::new(den))
            }
        };
        Ok(Self { rs: rs.clone(), gamma, k, tau, symmetry, tol, kind })
    }

    pub fn with_radius_cap(mut self, cap: usize) -> Self {
        self.kind = match self.kind {
            Kind::Series(s) => Kind::Series(s.with_radius_cap(cap)),
            Kind::Ratio(a, b) => Kind::Ratio(Box::new(a.with_radius_cap(cap)), Box::new(b.with_radius_cap(cap))),
        };
        self
    }

    pub fn series(&self) -> Option<&GaussianSeries> {
        match &self.kind {
            Kind::Series(s) => Some(s),
            Kind::Ratio(..) => None,
        }
    }

    pub fn eval_scaled(&self, v: &[Complex64]) -> Result<Scaled> {
        match &self.kind {
            Kind::Series(s) => s.eval_scaled(v, self.tol),
            Kind::Ratio(..) => Err(Error::InvalidInput("the hat frame is a quotient, not a series".into())),
        }
    }

    pub fn eval(&self, v: &[Complex64]) -> Result<ThetaValue> {
        check_len(self.rs.l, v.len())?;
        match &self.kind {
            Kind::Series(s) => {
                let r = s.eval(v, self.tol)?;
                Ok(ThetaValue { value: r.value(), tail: r.abs_tail(), radius: r.radius })
            }
            Kind::Ratio(num, den) => {
                let d = den.eval(v, self.tol * 1e-3)?;
                if d.value().norm() < SINGULAR_THRESHOLD {
                    return Err(Error::SingularLocus(d.value().norm()));
                }
                let nv = num.eval(v, self.tol * 1e-3)?;
                let value = nv.value() / d.value();
                let tail = (nv.abs_tail() + value.norm() * d.abs_tail()) / (d.value().norm() - d.abs_tail());
                Ok(ThetaValue { value, tail, radius: nv.radius.max(d.radius) })
            }
        }
    }
}

pub fn natheta_eval(t: &NATheta, v: &TorusPoint) -> Result<ThetaValue> {
    t.eval(v)
}

/// Alternating or symmetric sum `Σ_w c_w e^{2πi w(λ)(v)}` over a Weyl orbit.
#[derive(Clone, Debug)]
pub struct WeylSum {
    terms: Vec<(Weight, f64)>,
}

impl WeylSum {
    pub fn alternating(weyl: &[WeylElement], lam: &Weight) -> Self {
        Self { terms: weyl.iter().map(|w| (w.act(lam), w.sign as f64)).collect() }
    }

    pub fn eval(&self, v: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(w, s)| (Complex64::i() * 2.0 * PI * w.pair_point(v)).exp() * *s)
            .sum()
    }
}

/// Weyl denominator `σ(v) = Σ_w ε(w) e^{2πi w(ρ)(v)}`.
pub fn sigma_eval(rs: &RootSystem, v: &[Complex64]) -> Result<Complex64> {
    check_len(rs.l, v.len())?;
    Ok(WeylSum::alternating(&rs.weyl_group()?, &rs.rho).eval(v))
}

/// `θ⁻_{γ+ρ,k+n}(v) / θ⁻_{ρ,n}(v)`.
pub fn hat_frame_eval(rs: &RootSystem, gamma: &Weight, k: i64, tau: EllipticModulus, v: &[Complex64]) -> Result<Complex64> {
    Ok(NATheta::new(rs, gamma.clone(), k, tau, Symmetry::HatPlus, 1e-14)?.eval(v)?.value)
}

/// `e^{−2πik α(v) − πikτ⟨α,α⟩}` for the coroot-lattice shift `v → v + τβ`,
/// `β` in simple-coroot coordinates and `α` the root with the same coordinates.
pub fn na_automorphy_factor(rs: &RootSystem, k: f64, tau: Complex64, beta: &[i64], v: &[Complex64]) -> Result<Complex64> {
    check_len(rs.l, beta.len())?;
    check_len(rs.l, v.len())?;
    let alpha = rs.root_lattice_labels(beta);
    let lin = alpha.pair_point(v);
    let norm: i64 = alpha.labels.iter().zip(beta).map(|(a, b)| a * b).sum();
    Ok((-Complex64::i() * 2.0 * PI * k * lin - Complex64::i() * PI * k * tau * norm as f64).exp())
}

/// `∂_τθ + (i/4πk) Σ C⁻¹_{ij} ∂_i∂_jθ` relative to `max(|θ|, |∂_τθ|)`.
pub fn na_heat_residual(rs: &RootSystem, gamma: &Weight, k: i64, tau: Complex64, v: &[Complex64], h: f64) -> Result<f64> {
    let make = |tau: Complex64| -> Result<NATheta> {
        NATheta::new(rs, gamma.clone(), k, EllipticModulus::new(tau)?, Symmetry::Plain, 1e-15)
    };
    let vals: Vec<Complex64> =
        [-2.0, -1.0, 1.0, 2.0].iter().map(|&c| Ok(make(tau + c * h)?.eval(v)?.value)).collect::<Result<_>>()?;
    let dt = (vals[0] - vals[1] * 8.0 + vals[2] * 8.0 - vals[3]) / (12.0 * h);
    let th = make(tau)?;
    let f = |p: &[Complex64]| th.eval(p).map(|x| x.value).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let cinv: Vec<Vec<f64>> = rs.cartan_inv_f64().to_vec();
    let lap = crate::util::weighted_laplacian(&f, v, &cinv, h);
    let rhs = -Complex64::i() / (4.0 * PI * k as f64) * lap;
    let scale = th.eval(v)?.value.norm().max(dt.norm()).max(1e-300);
    Ok((dt - rhs).norm() / scale)
}

/// Dimensions of the W-invariant and anti-invariant level-k′ theta spaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlternatingDims {
    pub dim_plus: usize,
    pub dim_minus: usize,
    pub samples: usize,
    pub singular_values_plus: Vec<f64>,
    pub singular_values_minus: Vec<f64>,
}

const RANK_THRESHOLD: f64 = 1e-8;

fn singular_values(rows: &[Vec<Complex64>]) -> Vec<f64> {
    if rows.is_empty() || rows[0].is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Rank at the relative threshold, and whether a singular value sits within
/// two decades of it.
fn rank_of(sv: &[f64], scale: f64) -> (usize, bool) {
    let cut = RANK_THRESHOLD * scale;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let ambiguous = sv.iter().any(|&s| s > cut * 1e-2 && s < cut * 1e2);
    (rank, ambiguous)
}

/// Numeric ranks of the W-symmetrized and anti-symmetrized level-k′ frames.
pub fn alternating_dim_check(rs: &RootSystem, k_prime: i64, tau: Complex64, seed: u64) -> Result<AlternatingDims> {
    if k_prime < 1 {
        return Err(Error::InvalidInput(format!("level must be >= 1, got {k_prime}")));
    }
    let weyl = rs.weyl_group()?;
    let l = rs.l;
    let n = rs.n as i64;
    // representatives jλ₁ + Cb of Λ_W / k′Λ_R
    let mut reps: Vec<Weight> = Vec::new();
    let mut index: HashMap<Weight, usize> = HashMap::new();
    for j in 0..n {
        let mut b = vec![0i64; l];
        loop {
            let mut w = rs.root_lattice_labels(&b);
            w.labels[0] += j;
            let r = reduce_mod_root_lattice(rs, &w, k_prime);
            index.entry(r.clone()).or_insert_with(|| {
                reps.push(r);
                reps.len() - 1
            });
            let mut i = 0;
            while i < l {
                b[i] += 1;
                if b[i] < k_prime {
                    break;
                }
                b[i] = 0;
                i += 1;
            }
            if i == l {
                break;
            }
        }
    }
    // W-orbits on the representatives
    let mut orbit_of = vec![usize::MAX; reps.len()];
    let mut orbits: Vec<usize> = Vec::new();
    let mut images: Vec<Vec<(usize, i64)>> = Vec::with_capacity(reps.len());
    for (i, r) in reps.iter().enumerate() {
        let img: Vec<(usize, i64)> = weyl
            .iter()
            .map(|w| (index[&reduce_mod_root_lattice(rs, &w.act(r), k_prime)], w.sign))
            .collect();
        if orbit_of[i] == usize::MAX {
            for &(j, _) in &img {
                orbit_of[j] = orbits.len();
            }
            orbits.push(i);
        }
        images.push(img);
    }
    let plain: Vec<GaussianSeries> = reps
        .iter()
        .map(|r| weyl_family_series(rs, k_prime, tau, 1.0 / k_prime as f64, [(r.clone(), 1.0.into())]))
        .collect::<Result<_>>()?;
    let mut samples = 2 * orbits.len() + 8;
    for _attempt in 0..4 {
        let points = random_torus_points(seed ^ samples as u64, samples, l, tau);
        let mut plus_rows = Vec::with_capacity(samples);
        let mut minus_rows = Vec::with_capacity(samples);
        for v in &points {
            let vals: Vec<Complex64> =
                plain.iter().map(|s| s.eval_scaled(v, 1e-13).map(|x| x.mantissa)).collect::<Result<_>>()?;
            plus_rows.push(orbits.iter().map(|&o| images[o].iter().map(|&(j, _)| vals[j]).sum()).collect());
            minus_rows.push(
                orbits.iter().map(|&o| images[o].iter().map(|&(j, s)| vals[j] * s as f64).sum()).collect(),
            );
        }
        let svp = singular_values(&plus_rows);
        let svm = singular_values(&minus_rows);
        let scale = svp.first().copied().unwrap_or(1.0);
        let (rp, amb_p) = rank_of(&svp, scale);
        let (rm, amb_m) = rank_of(&svm, scale);
        if !amb_p && !amb_m {
            return Ok(AlternatingDims {
                dim_plus: rp,
                dim_minus: rm,
                samples,
                singular_values_plus: svp,
                singular_values_minus: svm,
            });
        }
        samples *= 2;
    }
    Err(Error::IllConditioned("rank determination stayed ambiguous after resampling".into()))
}

/// Exact computation of the Weyl-invariant part of the degree-zero Picard
/// group: the group of `x` (mod `Λ_W ⊕ τΛ_W`) with `⟨x, α̌_j⟩α_j` in the
/// lattice for every simple root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PicardReport {
    pub n: usize,
    pub invariant_factors: Vec<i64>,
    pub group_order: i64,
    pub trivial: bool,
}

pub fn picard_invariant_check(rs: &RootSystem) -> PicardReport {
    let l = rs.l;
    // rows c_j·C_{j,i}: the condition is M c ∈ ℤ^{l²} for c ∈ ℝ^l / ℤ^l
    let mut m = Vec::with_capacity(l * l);
    for j in 0..l {
        for i in 0..l {
            let mut row = vec![0i64; l];
            row[j] = rs.cartan[j][i];
            m.push(row);
        }
    }
    let d = invariant_factors(&m);
    let real_part: i64 = d.iter().product();
    // real and τ parts are independent copies
    let group_order = real_part * real_part;
    PicardReport { n: rs.n, invariant_factors: d, group_order, trivial: group_order == 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{rel_err, FD_STEP};

    fn tau_i() -> EllipticModulus {
        EllipticModulus::new(Complex64::i()).unwrap()
    }

    fn rs(n: usize) -> RootSystem {
        RootSystem::new(n).unwrap()
    }

    fn pts(seed: u64, count: usize, l: usize, tau: Complex64) -> Vec<Vec<Complex64>> {
        random_torus_points(seed, count, l, tau)
    }

    /// Direct sum over a box of root-lattice points, independent of the engine.
    fn brute_plain(rs: &RootSystem, gamma: &Weight, k: i64, tau: Complex64, v: &[Complex64], box_r: i64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let l = rs.l;
        let mut b = vec![-box_r; l];
        loop {
            let a = rs.root_lattice_labels(&b);
            // α + γ/k in labels, then ⟨·,·⟩ and pairing with v
            let x: Vec<f64> = (0..l).map(|i| a.labels[i] as f64 + gamma.labels[i] as f64 / k as f64).collect();
            let norm = rs.pair_f64(&x, &x);
            let lin: Complex64 = x.iter().zip(v).map(|(a, z)| z * *a).sum();
            acc += (Complex64::i() * PI * k as f64 * tau * norm + Complex64::i() * 2.0 * PI * k as f64 * lin).exp();
            let mut i = 0;
            while i < l {
                b[i] += 1;
                if b[i] <= box_r {
                    break;
                }
                b[i] = -box_r;
                i += 1;
            }
            if i == l {
                break;
            }
        }
        acc
    }

    #[test]
    fn plain_matches_direct_sum() {
        let r = rs(3);
        let tau = Complex64::new(0.2, 0.9);
        let g = Weight::new(vec![1, 2]);
        let th = NATheta::new(&r, g.clone(), 4, EllipticModulus::new(tau).unwrap(), Symmetry::Plain, 1e-14).unwrap();
        for v in pts(1, 4, 2, tau) {
            let a = th.eval(&v).unwrap().value;
            let b = brute_plain(&r, &g, 4, tau, &v, 8);
            assert!(rel_err(a, b) < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn minus_vanishes_for_singular_gamma() {
        let r = rs(3);
        let th = NATheta::new(&r, Weight::new(vec![0, 1]), 3, tau_i(), Symmetry::Minus, 1e-14).unwrap();
        for v in pts(2, 3, 2, Complex64::i()) {
            assert_eq!(th.eval(&v).unwrap().value, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn minus_is_odd_under_long_reflection() {
        let r = rs(3);
        let th = NATheta::new(&r, r.rho.clone(), 3, tau_i(), Symmetry::Minus, 1e-14).unwrap();
        for v in pts(3, 5, 2, Complex64::i()) {
            let neg: Vec<Complex64> = v.iter().map(|z| -z).collect();
            let a = th.eval(&neg).unwrap().value;
            let b = th.eval(&v).unwrap().value;
            assert!((a + b).norm() < 1e-10 * b.norm().max(1.0));
        }
    }

    #[test]
    fn symmetry_under_weyl_group() {
        let r = rs(4);
        let tau = Complex64::new(0.3, 0.8);
        let m = EllipticModulus::new(tau).unwrap();
        let g = Weight::new(vec![2, 1, 1]);
        let plus = NATheta::new(&r, g.clone(), 5, m, Symmetry::Plus, 1e-14).unwrap();
        let minus = NATheta::new(&r, g, 5, m, Symmetry::Minus, 1e-14).unwrap();
        let weyl = r.weyl_group().unwrap();
        for (i, v) in pts(4, 6, 3, tau).iter().enumerate() {
            let w = &weyl[(7 * i + 3) % weyl.len()];
            let wv = w.act_point(v);
            let (p0, p1) = (plus.eval(v).unwrap().value, plus.eval(&wv).unwrap().value);
            let (m0, m1) = (minus.eval(v).unwrap().value, minus.eval(&wv).unwrap().value);
            assert!(rel_err(p1, p0) < 1e-9);
            assert!(rel_err(m1, m0 * w.sign as f64) < 1e-9);
        }
    }

    #[test]
    fn quasi_periodicity() {
        for n in [3usize, 4] {
            let r = rs(n);
            let tau = Complex64::new(-0.2, 1.1);
            let k = n as i64 + 1;
            let th = NATheta::new(&r, r.rho.clone(), k, EllipticModulus::new(tau).unwrap(), Symmetry::Minus, 1e-15)
                .unwrap();
            for v in pts(5, 4, r.l, tau) {
                let base = th.eval(&v).unwrap().value;
                for j in 0..r.l {
                    let mut beta = vec![0i64; r.l];
                    beta[j] = 1;
                    let mut shifted = v.clone();
                    shifted[j] += tau;
                    let lhs = th.eval(&shifted).unwrap().value;
                    let rhs = na_automorphy_factor(&r, k as f64, tau, &beta, &v).unwrap() * base;
                    assert!(rel_err(lhs, rhs) < 1e-9);
                    let mut unit = v.clone();
                    unit[j] += 1.0;
                    assert!(rel_err(th.eval(&unit).unwrap().value, base) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let r2 = rs(2);
        assert_eq!(sigma_eval(&r2, &[Complex64::new(0.0, 0.0)]).unwrap(), Complex64::new(0.0, 0.0));
        let z = Complex64::new(0.17, 0.05);
        let expect = Complex64::i() * 2.0 * (2.0 * PI * z).sin();
        assert!((sigma_eval(&r2, &[z]).unwrap() - expect).norm() < 1e-13);
        let r3 = rs(3);
        assert!(sigma_eval(&r3, &[Complex64::new(0.0, 0.0); 2]).unwrap().norm() < 1e-14);
        for w in r3.weyl_group().unwrap() {
            for v in pts(6, 3, 2, Complex64::new(0.1, 0.3)) {
                let a = sigma_eval(&r3, &w.act_point(&v)).unwrap();
                let b = sigma_eval(&r3, &v).unwrap() * w.sign as f64;
                assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn hat_frame_properties() {
        let r = rs(3);
        let tau = Complex64::new(0.1, 0.9);
        let m = EllipticModulus::new(tau).unwrap();
        let weyl = r.weyl_group().unwrap();
        for v in pts(8, 5, 2, tau) {
            let one = hat_frame_eval(&r, &Weight::zero(2), 0, m, &v).unwrap();
            assert!((one - 1.0).norm() < 1e-10);
            for g in r.level_k_weights(2) {
                let h = hat_frame_eval(&r, &g, 2, m, &v).unwrap();
                for w in &weyl {
                    let hw = hat_frame_eval(&r, &g, 2, m, &w.act_point(&v)).unwrap();
                    assert!(rel_err(hw, h) < 1e-9);
                }
                let num = NATheta::new(&r, g.add(&r.rho), 5, m, Symmetry::Minus, 1e-15).unwrap().eval(&v).unwrap().value;
                let den = NATheta::new(&r, r.rho.clone(), 3, m, Symmetry::Minus, 1e-15).unwrap().eval(&v).unwrap().value;
                assert!(rel_err(h * den, num) < 1e-10);
            }
        }
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert!(matches!(hat_frame_eval(&r, &Weight::zero(2), 1, m, &zero), Err(Error::SingularLocus(_))));
    }

    #[test]
    fn heat_equation() {
        let r = rs(3);
        let tau = Complex64::new(0.1, 0.8);
        for v in pts(9, 3, 2, tau) {
            let res = na_heat_residual(&r, &Weight::new(vec![1, 0]), 2, tau, &v, FD_STEP).unwrap();
            assert!(res < 1e-5, "{res}");
        }
    }

    /// Orbit count of W ⋉ k′Λ_R on Λ_W / k′Λ_R by union–find style closure.
    fn orbit_oracle(rs: &RootSystem, k: i64) -> (usize, usize) {
        let weyl = rs.weyl_group().unwrap();
        let mut seen = std::collections::HashSet::new();
        let (mut total, mut regular) = (0, 0);
        for j in 0..rs.n as i64 {
            for b in (0..rs.l).map(|_| 0..k).multi_cartesian_product() {
                let mut w = rs.root_lattice_labels(&b);
                w.labels[0] += j;
                let r = reduce_mod_root_lattice(rs, &w, k);
                if seen.contains(&r) {
                    continue;
                }
                total += 1;
                let imgs: Vec<(Weight, i64)> =
                    weyl.iter().map(|w| (reduce_mod_root_lattice(rs, &w.act(&r), k), w.sign)).collect();
                // regular iff no element with sign −1 fixes the class
                if !imgs.iter().any(|(x, s)| *x == r && *s == -1) {
                    regular += 1;
                }
                for (x, _) in imgs {
                    seen.insert(x);
                }
            }
        }
        (total, regular)
    }

    use itertools::Itertools;

    #[test]
    fn alternating_dimensions() {
        let r3 = rs(3);
        for kp in 1..=5 {
            let d = alternating_dim_check(&r3, kp, Complex64::i(), 17).unwrap();
            let (total, regular) = orbit_oracle(&r3, kp);
            assert_eq!(d.dim_plus, total, "k' = {kp}");
            assert_eq!(d.dim_plus, r3.orbit_count(kp));
            assert_eq!(d.dim_minus, regular, "k' = {kp}");
            assert_eq!(d.dim_minus, r3.regular_orbit_count(kp));
        }
        assert_eq!(alternating_dim_check(&r3, 3, Complex64::i(), 1).unwrap().dim_minus, 1);
        assert_eq!(alternating_dim_check(&r3, 5, Complex64::i(), 1).unwrap().dim_minus, 6);
    }

    #[test]
    fn picard_examples() {
        assert_eq!(picard_invariant_check(&rs(2)).group_order, 4);
        for n in 3..=6 {
            let rep = picard_invariant_check(&rs(n));
            assert!(rep.trivial, "n = {n}: {rep:?}");
        }
    }
}

//! Class functions, characters and the coherent state transform of the
//! distributions ψ_{γ,k}.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::abelian::cst_mode_factor;
use crate::error::{check_len, Error, Result};
use crate::exact::{rat_to_f64, Rational};
use crate::lattice::{CMatrix, GaussianSeries};
use crate::nonabelian::{orbit_shifts, weyl_family_series, WeylSum};
use crate::rootsys::{coroot_to_h, labels_to_eps, RootSystem, Weight, WeylElement};

/// Below this `|σ(v)|` characters are evaluated without dividing by σ.
pub const SIGMA_THRESHOLD: f64 = 1e-12;

/// Weyl group data reused across many character evaluations.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    rs: RootSystem,
    weyl: Vec<WeylElement>,
    sigma: WeylSum,
}

impl CharacterTable {
    pub fn new(rs: &RootSystem) -> Result<Self> {
        let weyl = rs.weyl_group()?;
        let sigma = WeylSum::alternating(&weyl, &rs.rho);
        Ok(Self { rs: rs.clone(), weyl, sigma })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn weyl(&self) -> &[WeylElement] {
        &self.weyl
    }

    pub fn sigma(&self, v: &[Complex64]) -> Complex64 {
        self.sigma.eval(v)
    }

    /// `Σ_w ε(w) e^{2πi w(λ+ρ)(v)}`.
    pub fn numerator(&self, lam: &Weight, v: &[Complex64]) -> Complex64 {
        let x = lam.add(&self.rs.rho);
        self.weyl
            .iter()
            .map(|w| (Complex64::i() * 2.0 * PI * w.act(&x).pair_point(v)).exp() * w.sign as f64)
            .sum()
    }

    /// χ_λ(v), dividing by a precomputed σ(v) when it is safely nonzero.
    pub fn character_with_sigma(&self, lam: &Weight, v: &[Complex64], sigma: Complex64) -> Complex64 {
        if sigma.norm() >= SIGMA_THRESHOLD {
            self.numerator(lam, v) / sigma
        } else {
            jacobi_trudi(lam, v)
        }
    }

    pub fn character(&self, lam: &Weight, v: &[Complex64]) -> Complex64 {
        self.character_with_sigma(lam, v, self.sigma(v))
    }
}

/// Schur polynomial `det[h_{λ_i − i + j}]` at `x_i = e^{2πi h_i}`, where `λ`
/// is the partition with `λ_i = Σ_{j≥i} a_j`. Division free, so valid on the
/// singular locus.
pub fn jacobi_trudi(lam: &Weight, v: &[Complex64]) -> Complex64 {
    let n = lam.len() + 1;
    let part = labels_to_eps(&lam.labels);
    let x: Vec<Complex64> = coroot_to_h(v).iter().map(|h| (Complex64::i() * 2.0 * PI * h).exp()).collect();
    let top = (part[0] as usize) + n;
    // complete homogeneous symmetric polynomials h_0..h_top
    let mut h = vec![Complex64::new(0.0, 0.0); top + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for xi in &x {
        for m in 1..=top {
            let prev = h[m - 1];
            h[m] += xi * prev;
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        let idx = part[i] - i as i64 + j as i64;
        if idx < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            h[idx as usize]
        }
    });
    m.determinant()
}

pub fn character_eval(rs: &RootSystem, lam: &Weight, v: &[Complex64]) -> Result<Complex64> {
    check_len(rs.l, lam.len())?;
    check_len(rs.l, v.len())?;
    if !lam.is_dominant() {
        return Err(Error::NonDominant(lam.labels.clone()));
    }
    Ok(CharacterTable::new(rs)?.character(lam, v))
}

/// `Π_{α>0} ⟨λ+ρ, α⟩ / ⟨ρ, α⟩`.
pub fn weyl_dimension(rs: &RootSystem, lam: &Weight) -> Result<i64> {
    check_len(rs.l, lam.len())?;
    if !lam.is_dominant() {
        return Err(Error::NonDominant(lam.labels.clone()));
    }
    // for the root ε_i − ε_j the pairing with x is Σ_{i≤m<j} x_m
    let x = lam.add(&rs.rho);
    let mut d = Rational::from_integer(1);
    for i in 0..rs.n {
        for j in i + 1..rs.n {
            let s: i64 = x.labels[i..j].iter().sum();
            d *= Rational::new(s, (j - i) as i64);
        }
    }
    assert!(d.is_integer(), "Weyl dimension {d} is not an integer");
    Ok(d.to_integer())
}

/// Finite class function `Σ a_λ χ_λ`.
#[derive(Clone, Debug, Serialize)]
pub struct ClassFunctionSeries {
    #[serde(skip)]
    pub rs: RootSystem,
    pub terms: BTreeMap<Weight, Complex64>,
}

impl ClassFunctionSeries {
    pub fn new(rs: &RootSystem, terms: impl IntoIterator<Item = (Weight, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (w, c) in terms {
            check_len(rs.l, w.len())?;
            if !w.is_dominant() {
                return Err(Error::NonDominant(w.labels));
            }
            *map.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self { rs: rs.clone(), terms: map })
    }

    pub fn trivial(rs: &RootSystem) -> Self {
        Self::new(rs, [(Weight::zero(rs.l), Complex64::new(1.0, 0.0))]).expect("trivial weight is dominant")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            *terms.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) += a * c;
        }
        for (w, c) in &other.terms {
            *terms.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) += b * c;
        }
        Self { rs: self.rs.clone(), terms }
    }

    pub fn eval(&self, table: &CharacterTable, v: &[Complex64]) -> Complex64 {
        let s = table.sigma(v);
        self.terms.iter().map(|(w, c)| c * table.character_with_sigma(w, v, s)).sum()
    }
}

/// Image of a class function under the heat operator at complex time `τt`.
#[derive(Clone, Debug)]
pub struct CSTImage {
    pub source: ClassFunctionSeries,
    pub tau: Complex64,
    pub t: f64,
    damped: Vec<(Weight, Complex64)>,
}

impl CSTImage {
    /// Coefficients `a_λ e^{iπτt c_λ}`.
    pub fn coefficients(&self) -> &[(Weight, Complex64)] {
        &self.damped
    }

    pub fn eval(&self, table: &CharacterTable, v: &[Complex64]) -> Complex64 {
        let s = table.sigma(v);
        self.damped.iter().map(|(w, c)| c * table.character_with_sigma(w, v, s)).sum()
    }

    /// `σ(v)` times the image, computed from the numerators (no division).
    pub fn eval_times_sigma(&self, table: &CharacterTable, v: &[Complex64]) -> Complex64 {
        self.damped.iter().map(|(w, c)| c * table.numerator(w, v)).sum()
    }
}

pub fn cst_apply(f: &ClassFunctionSeries, tau: Complex64, t: f64) -> Result<CSTImage> {
    if !(t > 0.0) || !(tau.im > 0.0) {
        return Err(Error::InvalidInput(format!("need t > 0 and Im τ > 0, got t = {t}, τ = {tau}")));
    }
    let damped = f
        .terms
        .iter()
        .map(|(w, c)| {
            let cl = rat_to_f64(&f.rs.casimir(w)?);
            Ok((w.clone(), c * (Complex64::i() * PI * tau * t * cl).exp()))
        })
        .collect::<Result<_>>()?;
    Ok(CSTImage { source: f.clone(), tau, t, damped })
}

/// The distribution `ψ_{γ,k} = Σ ε_λ χ_λ` over the affine orbit of γ+ρ.
#[derive(Clone, Debug)]
pub struct PsiDistribution {
    pub rs: RootSystem,
    pub gamma: Weight,
    pub k: i64,
}

impl PsiDistribution {
    pub fn new(rs: &RootSystem, gamma: Weight, k: i64) -> Result<Self> {
        check_len(rs.l, gamma.len())?;
        if k < 0 || !gamma.is_dominant() || rs.level_of(&gamma) > k {
            return Err(Error::InvalidInput(format!("{:?} is not in the level-{k} alcove", gamma.labels)));
        }
        Ok(Self { rs: rs.clone(), gamma, k })
    }

    pub fn shifted_level(&self) -> i64 {
        self.k + self.rs.n as i64
    }

    /// Pairing with χ_μ: `ε_μ` if μ+ρ lies in the orbit of γ+ρ, else 0.
    pub fn pair_character(&self, mu: &Weight) -> Result<i64> {
        if !mu.is_dominant() {
            return Err(Error::NonDominant(mu.labels.clone()));
        }
        match self.rs.alcove_reduce(&mu.add(&self.rs.rho), self.shifted_level()) {
            Ok(w) if w.base == self.gamma.add(&self.rs.rho) => Ok(w.sign()),
            Ok(_) | Err(Error::SingularWeight(_)) => Ok(0),
            Err(e) => Err(e),
        }
    }

    /// Lattice series `Σ_μ ε_μ e^{iπτt‖μ‖² + 2πiμ(v)}` over the orbit,
    /// equal to `e^{iπτt‖ρ‖²} σ C_t(ψ)`.
    pub fn orbit_series(&self, tau: Complex64, t: f64) -> Result<GaussianSeries> {
        let weyl = self.rs.weyl_group()?;
        let big_k = self.shifted_level();
        weyl_family_series(&self.rs, big_k, tau, t, orbit_shifts(&weyl, &self.gamma.add(&self.rs.rho), true))
    }

    /// Smallest `‖λ+ρ‖²` cutoff for which the dropped part of the truncated
    /// CST image at time `t` is below `tol · e^{L(v)} / |σ(v)|` for every
    /// point with `‖Im v‖_C ≤ y_norm`, where `L` is the envelope log scale of
    /// [`orbit_series`](Self::orbit_series).
    pub fn certified_cutoff(&self, tau: Complex64, t: f64, y_norm: f64, tol: f64) -> Result<Rational> {
        let series = self.orbit_series(tau, t)?;
        let r_box = series.radius_for(tol)? as f64;
        let l = self.rs.l as f64;
        let big_k = self.shifted_level() as f64;
        let c = DMatrix::from_fn(self.rs.l, self.rs.l, |i, j| self.rs.cartan[i][j] as f64);
        let lmax = nalgebra::SymmetricEigen::new(c).eigenvalues.max();
        // ‖μ_c‖ = ‖y‖_C / (τ₂ t); a ball of radius √l (R + 1) in p covers the box
        let centre = y_norm / (tau.im * t);
        let radius = centre + big_k * lmax.sqrt() * l.sqrt() * (r_box + 1.0);
        let r2 = (radius * radius).ceil();
        Ok(Rational::from_integer(r2.to_i64().ok_or_else(|| Error::ResourceLimit("cutoff overflow".into()))?))
    }
}

/// `‖y‖_C = √(yᵀCy)` for the imaginary part of a point in coroot coordinates.
pub fn imag_norm_c(rs: &RootSystem, v: &[Complex64]) -> f64 {
    let y: Vec<f64> = v.iter().map(|z| z.im).collect();
    let mut s = 0.0;
    for i in 0..rs.l {
        for j in 0..rs.l {
            s += y[i] * rs.cartan[i][j] as f64 * y[j];
        }
    }
    s.max(0.0).sqrt()
}

/// Finite part of ψ with `‖λ+ρ‖² ≤ cutoff`.
pub fn psi_truncate(psi: &PsiDistribution, cutoff: Rational) -> Result<ClassFunctionSeries> {
    let orbit = psi.rs.affine_orbit(&psi.gamma, psi.k, cutoff)?;
    ClassFunctionSeries::new(&psi.rs, orbit.into_iter().map(|(w, s)| (w, Complex64::new(s as f64, 0.0))))
}

/// `e^{−iπτ‖ρ‖²/(k+n)} θ⁻_{γ+ρ,k+n}(v) / σ(v)`.
pub fn cst_psi_closed_form(psi: &PsiDistribution, tau: Complex64, v: &[Complex64]) -> Result<Complex64> {
    let big_k = psi.shifted_level();
    let table = CharacterTable::new(&psi.rs)?;
    let s = table.sigma(v);
    if s.norm() < SIGMA_THRESHOLD {
        return Err(Error::SingularLocus(s.norm()));
    }
    let series = psi.orbit_series(tau, 1.0 / big_k as f64)?;
    let theta = series.eval(v, 1e-15)?.value();
    Ok(rho_phase(&psi.rs, tau, 1.0 / big_k as f64) * theta / s)
}

/// `e^{−iπτt‖ρ‖²}`.
pub fn rho_phase(rs: &RootSystem, tau: Complex64, t: f64) -> Complex64 {
    (-Complex64::i() * PI * tau * t * rat_to_f64(&rs.rho_norm2())).exp()
}

/// Both sides of the commutative diagram relating the CST on class functions
/// to the abelian CST with period matrix `τC⁻¹` on the torus.
pub fn diagram_sides(f: &ClassFunctionSeries, tau: Complex64, t: f64, v: &[Complex64]) -> Result<(Complex64, Complex64)> {
    let rs = &f.rs;
    let weyl = rs.weyl_group()?;
    let sqrt_w = (weyl.len() as f64).sqrt();
    let table = CharacterTable::new(rs)?;
    // path 1: class-function CST, then multiplication by e^{iπτt‖ρ‖²}σ/√|W|
    let image = cst_apply(f, tau, t)?;
    let a = image.eval(&table, v) * table.sigma(v) / (rho_phase(rs, tau, t) * sqrt_w);
    // path 2: multiplication by σ/√|W| (Fourier modes on the torus), then the
    // abelian CST mode by mode
    let l = rs.l;
    let cinv = rs.cartan_inv_f64();
    let omega = CMatrix::from_fn(l, l, |i, j| tau * cinv[i][j]);
    let mut b = Complex64::new(0.0, 0.0);
    for (lam, c) in &f.terms {
        let x = lam.add(&rs.rho);
        for w in &weyl {
            let mu = w.act(&x);
            let mode = (Complex64::i() * 2.0 * PI * mu.pair_point(v)).exp();
            b += c * w.sign as f64 * cst_mode_factor(&omega, t, &mu.labels) * mode;
        }
    }
    Ok((a, b / sqrt_w))
}

/// Maximum relative residual `|A − B| / max(|B|, 1)` of the diagram over the
/// sample points.
pub fn diagram_check(f: &ClassFunctionSeries, tau: Complex64, t: f64, samples: &[Vec<Complex64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in samples {
        let (a, b) = diagram_sides(f, tau, t, v)?;
        worst = worst.max(crate::util::rel_err(a, b));
    }
    Ok(worst)
}

/// Exact coefficient-level form of the diagram: `c_λ + ‖ρ‖² = ‖λ+ρ‖²` for
/// every term.
pub fn diagram_coefficients_exact(f: &ClassFunctionSeries) -> Result<bool> {
    let rs = &f.rs;
    for lam in f.terms.keys() {
        if rs.casimir(lam)? + rs.rho_norm2() != rs.norm2(&lam.add(&rs.rho)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Truncated-series CST image of ψ at the points, with the cutoff certified
/// for all of them.
pub fn cst_psi_truncated(psi: &PsiDistribution, tau: Complex64, t: f64, points: &[Vec<Complex64>], tol: f64) -> Result<(Vec<Complex64>, Rational)> {
    let y_norm = points.iter().map(|v| imag_norm_c(&psi.rs, v)).fold(0.0, f64::max);
    let cutoff = psi.certified_cutoff(tau, t, y_norm, tol)?;
    let series = psi_truncate(psi, cutoff)?;
    let image = cst_apply(&series, tau, t)?;
    let table = CharacterTable::new(&psi.rs)?;
    Ok((points.iter().map(|v| image.eval(&table, v)).collect(), cutoff))
}

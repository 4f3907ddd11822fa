//! Canonical bases of `Λ_R ⊕ τΛ_R` for sl(n) and their period matrices,
//! in exact arithmetic with τ kept as a scalar factor.
//!
//! For the A series the root and coroot lattices coincide under the Killing
//! form, so the same integer data serves both.

use num_complex::Complex64;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{int_det, rat, rat_to_f64, QMatrix, Rational};
use crate::lattice::CMatrix;
use crate::rootsys::RootSystem;
use crate::smith::invariant_factors;

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalBasisData {
    pub n: usize,
    /// Columns: β_j in simple-root coordinates.
    pub a: Vec<Vec<i64>>,
    /// Columns: β̃_j / τ in simple-root coordinates.
    pub a_tilde: Vec<Vec<i64>>,
    pub delta: Vec<i64>,
    /// Columns: β̃_j / τ in fundamental-weight coordinates.
    pub beta_tilde_weights: Vec<Vec<i64>>,
    /// Ω / τ.
    pub omega_over_tau: QMatrix,
    pub note: Option<String>,
}

impl CanonicalBasisData {
    /// Ω at a concrete modulus.
    pub fn omega_at(&self, tau: Complex64) -> CMatrix {
        let l = self.delta.len();
        CMatrix::from_fn(l, l, |i, j| tau * rat_to_f64(&self.omega_over_tau[(i, j)]))
    }
}

fn cartan(n: usize) -> Result<QMatrix> {
    Ok(QMatrix::from_ints(&RootSystem::with_weyl_limit(n, 0)?.cartan))
}

fn ints(m: &QMatrix) -> Result<Vec<Vec<i64>>> {
    m.to_ints().ok_or_else(|| Error::InvalidInput("matrix is not integral".into()))
}

/// The basis `β = (α₁, …, α_{l−1}, nλ₁)` and its completion.
pub fn canonical_basis(n: usize) -> Result<CanonicalBasisData> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("sl(n) needs n >= 2, got {n}")));
    }
    let l = n - 1;
    let c = cartan(n)?;
    let mut a = QMatrix::identity(l);
    for i in 0..l {
        a[(i, l - 1)] = Rational::from_integer((l - i) as i64);
    }
    let mut delta = vec![1i64; l];
    delta[l - 1] = n as i64;
    let d = QMatrix::diag(&delta);
    let a_inv_t = a.inverse()?.transpose();
    // Ã = C⁻¹ (Aᵀ)⁻¹ Δ solves AᵀCÃ = Δ
    let a_tilde = c.inverse()?.mul(&a_inv_t)?.mul(&d)?;
    let omega = a.inverse()?.mul(&c.inverse()?)?.mul(&a_inv_t)?;
    let note = (n == 2).then(|| {
        "l = 1: (α, τα) is canonical with Δ = (2); with the form normalized to E(α̌, τα̌) = 1 this is Δ = (1)".to_string()
    });
    Ok(CanonicalBasisData {
        n,
        a: ints(&a)?,
        a_tilde: ints(&a_tilde)?,
        delta,
        beta_tilde_weights: ints(&a_inv_t.mul(&d)?)?,
        omega_over_tau: omega,
        note,
    })
}

/// The closed-form period matrix divided by τ.
pub fn closed_form_omega(n: usize) -> Result<QMatrix> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("closed form needs n >= 3, got {n}")));
    }
    let l = n - 1;
    let (ni, li) = (n as i64, l as i64);
    // 1-based indices as in the formulas
    Ok(QMatrix::from_fn(l, l, |r, s| {
        let (i, j) = ((r.min(s) + 1) as i64, (r.max(s) + 1) as i64);
        if j < li {
            Rational::from_integer((ni - i) * (li - j))
        } else if i < li {
            Rational::from_integer(i - li)
        } else {
            rat(li, ni)
        }
    }))
}

/// Exact invariants of a canonical basis.
#[derive(Clone, Debug, Serialize)]
pub struct CanonicalInvariants {
    pub unimodular: bool,
    pub condition_star: bool,
    pub divisor_chain: bool,
    pub omega_symmetric: bool,
    pub omega_positive: bool,
    pub entries_in_lattice: bool,
    pub closed_form_agrees: bool,
}

impl CanonicalInvariants {
    pub fn all(&self) -> bool {
        self.unimodular
            && self.condition_star
            && self.divisor_chain
            && self.omega_symmetric
            && self.omega_positive
            && self.entries_in_lattice
            && self.closed_form_agrees
    }
}

fn omega_ok(omega: &QMatrix, n: usize) -> (bool, bool, bool) {
    let nz = Rational::from_integer(n as i64);
    (
        omega.is_symmetric(),
        omega.is_positive_definite(),
        omega.entries().iter().all(|x| (x * nz).is_integer()),
    )
}

pub fn check_canonical(data: &CanonicalBasisData) -> Result<CanonicalInvariants> {
    let n = data.n;
    let c = cartan(n)?;
    let a = QMatrix::from_ints(&data.a);
    let at = QMatrix::from_ints(&data.a_tilde);
    let d = QMatrix::diag(&data.delta);
    let star = a.transpose().mul(&c)?.mul(&at)? == d;
    let chain = data.delta.windows(2).all(|w| w[1] % w[0] == 0) && data.delta.iter().product::<i64>() == n as i64;
    let (sym, pos, lat) = omega_ok(&data.omega_over_tau, n);
    let closed = n < 3 || closed_form_omega(n)? == data.omega_over_tau;
    Ok(CanonicalInvariants {
        unimodular: int_det(&data.a) == 1 && int_det(&data.a_tilde) == 1,
        condition_star: star,
        divisor_chain: chain,
        omega_symmetric: sym,
        omega_positive: pos,
        entries_in_lattice: lat,
        closed_form_agrees: closed,
    })
}

/// Whether `β = αA` extends to a canonical basis: `CAΔ⁻¹` must be an integer
/// unimodular matrix, with `Δ = diag(1, …, 1, n)`.
pub fn completable_check(n: usize, a: &[Vec<i64>]) -> Result<bool> {
    let l = n.checked_sub(1).filter(|l| *l >= 1).ok_or_else(|| Error::InvalidInput(format!("n must be >= 2, got {n}")))?;
    if a.len() != l || a.iter().any(|r| r.len() != l) {
        return Err(Error::DimensionMismatch { expected: l, got: a.len() });
    }
    let det = int_det(a);
    if det.abs() != 1 {
        return Err(Error::NotUnimodular(det));
    }
    let mut delta = vec![1i64; l];
    delta[l - 1] = n as i64;
    let m = cartan(n)?.mul(&QMatrix::from_ints(a))?.mul(&QMatrix::diag(&delta).inverse()?)?;
    Ok(m.is_integral() && m.det()?.abs() == Rational::from_integer(1))
}

/// Membership in `Γ_n`: determinant one and the top-right column block
/// divisible by n.
pub fn gamma_n_membership(n: usize, b: &[Vec<i64>]) -> Result<bool> {
    let l = n.checked_sub(1).filter(|l| *l >= 1).ok_or_else(|| Error::InvalidInput(format!("n must be >= 2, got {n}")))?;
    if b.len() != l || b.iter().any(|r| r.len() != l) {
        return Err(Error::DimensionMismatch { expected: l, got: b.len() });
    }
    let det = int_det(b);
    if det != 1 {
        return Err(Error::NotUnimodular(det));
    }
    Ok((0..l - 1).all(|i| b[i][l - 1] % n as i64 == 0))
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodEquivalence {
    pub omega1_over_tau: QMatrix,
    pub omega2_over_tau: QMatrix,
    /// `B̃ = Δ⁻¹(Bᵀ)⁻¹Δ`, integral with `BᵀΔB̃ = Δ`.
    pub witness: Vec<Vec<i64>>,
    pub omega2_valid: bool,
}

/// `Ω₂ = BΩ₁Bᵀ` for the basis change `A₂ = A₁B⁻¹`, with the integral witness `B̃`.
pub fn period_equivalence(n: usize, b: &[Vec<i64>]) -> Result<PeriodEquivalence> {
    if !gamma_n_membership(n, b)? {
        return Err(Error::InvalidInput(format!("{b:?} is not in Γ_{n}")));
    }
    let data = canonical_basis(n)?;
    let bm = QMatrix::from_ints(b);
    let d = QMatrix::diag(&data.delta);
    let w = d.inverse()?.mul(&bm.transpose().inverse()?)?.mul(&d)?;
    let witness = w.to_ints().ok_or_else(|| Error::InvalidInput("witness is not integral".into()))?;
    if bm.transpose().mul(&d)?.mul(&w)? != d {
        return Err(Error::InvalidInput("witness fails BᵀΔB̃ = Δ".into()));
    }
    let omega2 = bm.mul(&data.omega_over_tau)?.mul(&bm.transpose())?;
    // Ω₂ must be the period matrix of the completable basis A₁B⁻¹
    let a2 = QMatrix::from_ints(&data.a).mul(&bm.inverse()?)?;
    let c = cartan(n)?;
    let a2_inv = a2.inverse()?;
    let direct = a2_inv.mul(&c.inverse()?)?.mul(&a2_inv.transpose())?;
    let (sym, pos, lat) = omega_ok(&omega2, n);
    let valid = sym && pos && lat && direct == omega2 && completable_check(n, &ints(&a2)?)?;
    Ok(PeriodEquivalence { omega1_over_tau: data.omega_over_tau, omega2_over_tau: omega2, witness, omega2_valid: valid })
}

/// Invariant factors of `E` on `Λ_R ⊕ τΛ_R` in the basis `(α, τα)`.
pub fn form_elementary_divisors(n: usize) -> Result<Vec<i64>> {
    let rs = RootSystem::with_weyl_limit(n, 0)?;
    let l = rs.l;
    let mut e = vec![vec![0i64; 2 * l]; 2 * l];
    for i in 0..l {
        for j in 0..l {
            e[i][l + j] = rs.cartan[i][j];
            e[l + j][i] = -rs.cartan[i][j];
        }
    }
    Ok(invariant_factors(&e))
}

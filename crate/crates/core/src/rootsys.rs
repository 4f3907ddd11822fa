//! The A_{n-1} root system: Cartan data, weights, Weyl group and affine alcoves.
//!
//! Weights are integer vectors of Dynkin labels. Points of the Cartan subalgebra
//! are given by their coordinates on the simple coroots, so that a weight with
//! labels `a` pairs with `z` as `Σ a_j z_j`.

use itertools::Itertools;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::exact::{QMatrix, Rational};

/// Default bound on `n` for enumerating the Weyl group (8! elements).
pub const DEFAULT_MAX_WEYL_N: usize = 8;
const ALCOVE_STEP_LIMIT: usize = 1_000_000;

/// Integer weight in the fundamental-weight basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight {
    pub labels: Vec<i64>,
}

impl Weight {
    pub fn new(labels: Vec<i64>) -> Self {
        Self { labels }
    }

    pub fn zero(l: usize) -> Self {
        Self { labels: vec![0; l] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_dominant(&self) -> bool {
        self.labels.iter().all(|&a| a >= 0)
    }

    /// No zero pairing with any coroot, positive or not.
    pub fn is_regular(&self) -> bool {
        // pairing with ε_i − ε_j is e_i − e_j in ε-coordinates
        let e = labels_to_eps(&self.labels);
        e.iter().tuple_combinations().all(|(a, b)| a != b)
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight::new(self.labels.iter().zip(&other.labels).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight::new(self.labels.iter().zip(&other.labels).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: i64) -> Weight {
        Weight::new(self.labels.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Weight {
        self.scale(-1)
    }

    pub fn as_rational(&self) -> Vec<Rational> {
        self.labels.iter().map(|&a| Rational::from_integer(a)).collect()
    }

    /// Value of the weight at a torus point given in coroot coordinates.
    pub fn pair_point(&self, z: &[Complex64]) -> Complex64 {
        self.labels.iter().zip(z).map(|(&a, &zj)| zj * a as f64).sum()
    }
}

impl From<Vec<i64>> for Weight {
    fn from(v: Vec<i64>) -> Self {
        Weight::new(v)
    }
}

/// ε-coordinates (length n, last entry 0) of a weight given by labels.
pub fn labels_to_eps(a: &[i64]) -> Vec<i64> {
    let n = a.len() + 1;
    let mut e = vec![0; n];
    for i in (0..n - 1).rev() {
        e[i] = e[i + 1] + a[i];
    }
    e
}

pub fn eps_to_labels(e: &[i64]) -> Vec<i64> {
    e.windows(2).map(|w| w[0] - w[1]).collect()
}

/// Coordinates on the standard basis of the diagonal Cartan (sum zero) of a
/// point given in coroot coordinates.
pub fn coroot_to_h<T: Copy + Zero + std::ops::Sub<Output = T>>(z: &[T]) -> Vec<T> {
    let l = z.len();
    let mut h = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let hi = if i < l { z[i] } else { T::zero() };
        let lo = if i > 0 { z[i - 1] } else { T::zero() };
        h.push(hi - lo);
    }
    h
}

pub fn h_to_coroot<T: Copy + Zero + std::ops::Add<Output = T>>(h: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    h[..h.len() - 1]
        .iter()
        .map(|&x| {
            acc = acc + x;
            acc
        })
        .collect()
}

/// Element of the Weyl group S_n acting on ε-coordinates by `ε_i ↦ ε_{perm[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub sign: i64,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), sign: 1 }
    }

    pub fn from_perm(perm: Vec<usize>) -> Self {
        let sign = permutation_sign(&perm);
        Self { perm, sign }
    }

    /// Transposition of ε_i and ε_j.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, j);
        Self::from_perm(perm)
    }

    /// Simple reflection s_j (0-based) for the simple root ε_j − ε_{j+1}.
    pub fn simple(n: usize, j: usize) -> Self {
        Self::transposition(n, j, j + 1)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        WeylElement {
            perm: other.perm.iter().map(|&p| self.perm[p]).collect(),
            sign: self.sign * other.sign,
        }
    }

    pub fn inverse(&self) -> WeylElement {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        WeylElement { perm: inv, sign: self.sign }
    }

    fn permute<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        out
    }

    pub fn act(&self, lam: &Weight) -> Weight {
        Weight::new(eps_to_labels(&self.permute(&labels_to_eps(&lam.labels))))
    }

    /// Action on a torus point in coroot coordinates, compatible with
    /// `w(λ)(w(v)) = λ(v)`.
    pub fn act_point(&self, z: &[Complex64]) -> Vec<Complex64> {
        h_to_coroot(&self.permute(&coroot_to_h(z)))
    }

    pub fn act_real(&self, z: &[f64]) -> Vec<f64> {
        h_to_coroot(&self.permute(&coroot_to_h(z)))
    }

    /// Image of the root ε_a − ε_b in simple-root coordinates.
    fn root_coords(n: usize, a: usize, b: usize) -> Vec<i64> {
        let mut c = vec![0; n - 1];
        let (lo, hi, s) = if a < b { (a, b, 1) } else { (b, a, -1) };
        for x in c.iter_mut().take(hi).skip(lo) {
            *x = s;
        }
        c
    }
}

pub fn permutation_sign(perm: &[usize]) -> i64 {
    let inv = perm.iter().tuple_combinations().filter(|(a, b)| a > b).count();
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Witness that `base` reduces `w(base) + level_shifted·β` into the open alcove.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineOrbitWitness {
    pub base: Weight,
    pub level_shifted: i64,
    pub weyl: WeylElement,
    /// β in simple-root coordinates.
    pub translation: Vec<i64>,
}

impl AffineOrbitWitness {
    pub fn sign(&self) -> i64 {
        self.weyl.sign
    }
}

/// Combinatorial data of A_{n−1}.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub n: usize,
    pub l: usize,
    pub cartan: Vec<Vec<i64>>,
    pub cartan_inv: QMatrix,
    pub rho: Weight,
    pub weyl_order: u64,
    pub highest_root: Weight,
    cinv_f64: Vec<Vec<f64>>,
    max_weyl_n: usize,
}

impl RootSystem {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_weyl_limit(n, DEFAULT_MAX_WEYL_N)
    }

    pub fn with_weyl_limit(n: usize, max_weyl_n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("SU(n) needs n >= 2, got {n}")));
        }
        if n > 20 {
            return Err(Error::ResourceLimit(format!("n = {n} exceeds the supported rank")));
        }
        let l = n - 1;
        let cartan: Vec<Vec<i64>> = (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| match i.abs_diff(j) {
                        0 => 2,
                        1 => -1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        let cartan_inv = QMatrix::from_ints(&cartan).inverse()?;
        let cinv_f64 = cartan_inv.to_f64();
        let mut highest = vec![0; l];
        highest[0] += 1;
        highest[l - 1] += 1;
        Ok(Self {
            n,
            l,
            cartan,
            cartan_inv,
            rho: Weight::new(vec![1; l]),
            weyl_order: (1..=n as u64).product(),
            highest_root: Weight::new(highest),
            cinv_f64,
            max_weyl_n,
        })
    }

    pub fn cartan_inv_f64(&self) -> &[Vec<f64>] {
        &self.cinv_f64
    }

    /// Labels of the simple root α_j (row j of C).
    pub fn simple_root(&self, j: usize) -> Weight {
        Weight::new(self.cartan[j].clone())
    }

    /// Labels of the root lattice element with simple-root coordinates `beta`.
    pub fn root_lattice_labels(&self, beta: &[i64]) -> Weight {
        Weight::new(
            (0..self.l).map(|i| (0..self.l).map(|j| self.cartan[i][j] * beta[j]).sum()).collect(),
        )
    }

    /// ⟨a, b⟩ = aᵀ C⁻¹ b, exact.
    pub fn inner_product(&self, a: &[Rational], b: &[Rational]) -> Result<Rational> {
        check_len(self.l, a.len())?;
        check_len(self.l, b.len())?;
        let cb = self.cartan_inv.mul_vec(b)?;
        Ok(a.iter().zip(&cb).map(|(x, y)| x * y).sum())
    }

    pub fn pair(&self, a: &Weight, b: &Weight) -> Result<Rational> {
        self.inner_product(&a.as_rational(), &b.as_rational())
    }

    pub fn norm2(&self, a: &Weight) -> Rational {
        self.pair(a, a).expect("weight of the right length")
    }

    pub fn pair_f64(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.l {
            for j in 0..self.l {
                s += a[i] * self.cinv_f64[i][j] * b[j];
            }
        }
        s
    }

    pub fn rho_norm2(&self) -> Rational {
        self.norm2(&self.rho)
    }

    /// c_λ = ⟨λ+ρ, λ+ρ⟩ − ⟨ρ, ρ⟩.
    pub fn casimir(&self, lam: &Weight) -> Result<Rational> {
        check_len(self.l, lam.len())?;
        if !lam.is_dominant() {
            return Err(Error::NonDominant(lam.labels.clone()));
        }
        Ok(self.norm2(&lam.add(&self.rho)) - self.rho_norm2())
    }

    pub fn weyl_group(&self) -> Result<Vec<WeylElement>> {
        if self.n > self.max_weyl_n {
            return Err(Error::ResourceLimit(format!(
                "Weyl group of SU({}) has {} elements; limit is n <= {}",
                self.n, self.weyl_order, self.max_weyl_n
            )));
        }
        Ok((0..self.n).permutations(self.n).map(WeylElement::from_perm).collect())
    }

    pub fn weyl_act(&self, w: &WeylElement, lam: &Weight) -> Weight {
        w.act(lam)
    }

    /// All dominant weights with label sum at most `k`, lexicographic.
    pub fn level_k_weights(&self, k: i64) -> Vec<Weight> {
        fn rec(l: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Weight>) {
            if cur.len() == l {
                out.push(Weight::new(cur.clone()));
                return;
            }
            for a in 0..=budget {
                cur.push(a);
                rec(l, budget - a, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if k >= 0 {
            rec(self.l, k, &mut Vec::new(), &mut out);
        }
        out
    }

    /// ⟨λ, θ⟩ for the highest root θ, i.e. the label sum.
    pub fn level_of(&self, lam: &Weight) -> i64 {
        lam.labels.iter().sum()
    }

    /// Reduce a regular weight into the open alcove of `level_shifted`.
    pub fn alcove_reduce(&self, mu: &Weight, level_shifted: i64) -> Result<AffineOrbitWitness> {
        check_len(self.l, mu.len())?;
        if level_shifted < self.n as i64 {
            return Err(Error::InvalidInput(format!(
                "shifted level {level_shifted} is below n = {}",
                self.n
            )));
        }
        let n = self.n;
        let s_theta = WeylElement::transposition(n, 0, n - 1);
        let theta = &self.highest_root;
        let mut x = mu.clone();
        let mut w = WeylElement::identity(n);
        let mut beta = vec![0i64; self.l];
        for _ in 0..ALCOVE_STEP_LIMIT {
            if let Some(j) = x.labels.iter().position(|&a| a < 0) {
                let s = WeylElement::simple(n, j);
                x = s.act(&x);
                w = w.compose(&s);
                continue;
            }
            if x.labels.contains(&0) {
                return Err(Error::SingularWeight(mu.labels.clone()));
            }
            let lev = self.level_of(&x);
            if lev > level_shifted {
                // affine reflection across the wall ⟨x, θ⟩ = K
                let shift = WeylElement::root_coords(n, w.perm[0], w.perm[n - 1]);
                for (b, s) in beta.iter_mut().zip(&shift) {
                    *b += s;
                }
                x = s_theta.act(&x).add(&theta.scale(level_shifted));
                w = w.compose(&s_theta);
                continue;
            }
            if lev == level_shifted {
                return Err(Error::SingularWeight(mu.labels.clone()));
            }
            return Ok(AffineOrbitWitness { base: x, level_shifted, weyl: w, translation: beta });
        }
        Err(Error::ResourceLimit(format!(
            "alcove reduction of {:?} exceeded {ALCOVE_STEP_LIMIT} steps",
            mu.labels
        )))
    }

    /// Rebuild `w(base) + K·β` from a witness.
    pub fn reconstruct(&self, wit: &AffineOrbitWitness) -> Weight {
        wit.weyl
            .act(&wit.base)
            .add(&self.root_lattice_labels(&wit.translation).scale(wit.level_shifted))
    }

    /// Dominant weights λ with λ+ρ in the affine orbit of γ+ρ at level k+n and
    /// ⟨λ+ρ, λ+ρ⟩ ≤ cutoff, with their signs ε_λ. Sorted by norm, then labels.
    pub fn affine_orbit(&self, gamma: &Weight, k: i64, cutoff: Rational) -> Result<Vec<(Weight, i64)>> {
        check_len(self.l, gamma.len())?;
        if !gamma.is_dominant() || self.level_of(gamma) > k {
            return Err(Error::InvalidInput(format!("{:?} is not in the level-{k} alcove", gamma.labels)));
        }
        let big_k = k + self.n as i64;
        let target = gamma.add(&self.rho);
        let mut out = Vec::new();
        for x in self.dominant_regular_within(cutoff) {
            match self.alcove_reduce(&x, big_k) {
                Ok(wit) if wit.base == target => {
                    out.push((self.norm2(&x), x.sub(&self.rho), wit.sign()));
                }
                Ok(_) | Err(Error::SingularWeight(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        Ok(out.into_iter().map(|(_, l, s)| (l, s)).collect())
    }

    /// All weights with labels ≥ 1 and ⟨x,x⟩ ≤ cutoff.
    fn dominant_regular_within(&self, cutoff: Rational) -> Vec<Weight> {
        // partial quadratic forms are lower bounds since C⁻¹ has positive entries
        let l = self.l;
        let cinv = &self.cartan_inv;
        let mut out = Vec::new();
        let mut cur = vec![0i64; l];
        fn rec(
            pos: usize,
            l: usize,
            partial: Rational,
            cur: &mut Vec<i64>,
            cinv: &QMatrix,
            cutoff: Rational,
            out: &mut Vec<Weight>,
        ) {
            if pos == l {
                out.push(Weight::new(cur.clone()));
                return;
            }
            let mut a = 1i64;
            loop {
                cur[pos] = a;
                let mut add = cinv[(pos, pos)] * a * a;
                for j in 0..pos {
                    add += cinv[(pos, j)] * 2 * a * cur[j];
                }
                if partial + add > cutoff {
                    break;
                }
                rec(pos + 1, l, partial + add, cur, cinv, cutoff, out);
                a += 1;
            }
            cur[pos] = 0;
        }
        rec(0, l, Rational::zero(), &mut cur, cinv, cutoff, &mut out);
        out.retain(|x| self.norm2(x) <= cutoff);
        out
    }

    /// Positive roots ε_i − ε_j (i < j) in Dynkin labels.
    pub fn positive_roots(&self) -> Vec<Weight> {
        let n = self.n;
        (0..n)
            .tuple_combinations()
            .map(|(i, j)| {
                let mut e = vec![0; n];
                e[i] = 1;
                e[j] = -1;
                Weight::new(eps_to_labels(&e))
            })
            .collect()
    }

    /// Number of classes in Λ_W / (W ⋉ kΛ_R): each orbit meets the closed
    /// alcove exactly once.
    pub fn orbit_count(&self, k: i64) -> usize {
        self.level_k_weights(k).len()
    }

    /// Number of regular classes in Λ_W / (W ⋉ kΛ_R) (open alcove points).
    pub fn regular_orbit_count(&self, k: i64) -> usize {
        let shift = k - self.n as i64;
        if shift < 0 {
            0
        } else {
            self.level_k_weights(shift).len()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn rs(n: usize) -> RootSystem {
        RootSystem::new(n).unwrap()
    }

    #[test]
    fn cartan_invariants() {
        for n in 2..=8 {
            let r = rs(n);
            let c = QMatrix::from_ints(&r.cartan);
            assert_eq!(c.mul(&r.cartan_inv).unwrap(), QMatrix::identity(n - 1));
            assert_eq!(c.det().unwrap(), Rational::from_integer(n as i64));
        }
        assert_eq!(rs(2).highest_root.labels, vec![2]);
        assert_eq!(rs(4).highest_root.labels, vec![1, 0, 1]);
    }

    #[test]
    fn inner_product_examples() {
        let r2 = rs(2);
        assert_eq!(r2.pair(&r2.rho, &r2.rho).unwrap(), rat(1, 2));
        let r3 = rs(3);
        assert_eq!(r3.pair(&r3.rho, &r3.rho).unwrap(), rat(2, 1));
        assert_eq!(r3.pair(&Weight::zero(2), &r3.rho).unwrap(), rat(0, 1));
        assert!(r3.inner_product(&[rat(1, 1)], &[rat(1, 1), rat(0, 1)]).is_err());
    }

    #[test]
    fn casimir_examples() {
        let r2 = rs(2);
        assert_eq!(r2.casimir(&Weight::new(vec![0])).unwrap(), rat(0, 1));
        assert_eq!(r2.casimir(&Weight::new(vec![2])).unwrap(), rat(4, 1));
        let r3 = rs(3);
        assert_eq!(r3.casimir(&Weight::new(vec![1, 0])).unwrap(), rat(8, 3));
        assert!(matches!(r3.casimir(&Weight::new(vec![-1, 0])), Err(Error::NonDominant(_))));
    }

    #[test]
    fn weyl_group_examples() {
        let g2 = rs(2).weyl_group().unwrap();
        assert_eq!(g2.len(), 2);
        assert!(g2[0].is_identity() && g2[0].sign == 1 && g2[1].sign == -1);
        let g3 = rs(3).weyl_group().unwrap();
        assert_eq!(g3.len(), 6);
        assert_eq!(g3.iter().filter(|w| w.sign == 1).count(), 3);
        let g4 = rs(4).weyl_group().unwrap();
        assert_eq!(g4.len(), 24);
        assert_eq!(g4.iter().map(|w| w.sign).sum::<i64>(), 0);
        let limited = RootSystem::with_weyl_limit(5, 4).unwrap();
        assert!(matches!(limited.weyl_group(), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn weyl_act_examples() {
        let r2 = rs(2);
        let swap = &r2.weyl_group().unwrap()[1];
        assert_eq!(swap.act(&Weight::new(vec![5])).labels, vec![-5]);
        let s1 = WeylElement::simple(3, 0);
        assert_eq!(s1.act(&Weight::new(vec![1, 0])).labels, vec![-1, 1]);
    }

    #[test]
    fn simple_reflection_formula_agrees() {
        // s_j λ = λ − ⟨λ, α̌_j⟩ α_j
        let r = rs(5);
        let lam = Weight::new(vec![3, -1, 2, 0]);
        for j in 0..r.l {
            let expect = lam.sub(&r.simple_root(j).scale(lam.labels[j]));
            assert_eq!(WeylElement::simple(5, j).act(&lam), expect);
        }
    }

    #[test]
    fn level_k_examples() {
        let r3 = rs(3);
        let w1 = r3.level_k_weights(1);
        assert_eq!(w1.len(), 3);
        for w in [vec![0, 0], vec![1, 0], vec![0, 1]] {
            assert!(w1.contains(&Weight::new(w)));
        }
        assert_eq!(r3.level_k_weights(2).len(), 6);
        assert_eq!(rs(5).level_k_weights(0), vec![Weight::zero(4)]);
    }

    #[test]
    fn alcove_reduce_examples() {
        let r3 = rs(3);
        let wit = r3.alcove_reduce(&Weight::new(vec![1, 1]), 4).unwrap();
        assert!(wit.weyl.is_identity());
        assert_eq!(wit.translation, vec![0, 0]);

        let r2 = rs(2);
        // brute force over W ⋉ 3Λ_R: 4 = s(2) + 3·α
        let wit = r2.alcove_reduce(&Weight::new(vec![4]), 3).unwrap();
        assert_eq!(wit.base.labels, vec![2]);
        assert_eq!(wit.sign(), -1);
        assert_eq!(wit.translation, vec![1]);
        assert_eq!(r2.reconstruct(&wit).labels, vec![4]);

        let wit = r2.alcove_reduce(&Weight::new(vec![-1]), 3).unwrap();
        assert_eq!(wit.base.labels, vec![1]);
        assert_eq!(wit.sign(), -1);

        assert!(matches!(r2.alcove_reduce(&Weight::new(vec![3]), 3), Err(Error::SingularWeight(_))));
        assert!(matches!(r3.alcove_reduce(&Weight::new(vec![2, 0]), 4), Err(Error::SingularWeight(_))));
    }

    /// Oracle: for rank one, m is in the orbit of g iff m ≡ ±g (mod 2K).
    fn rank_one_orbit(g: i64, big_k: i64, bound: i64) -> Vec<(i64, i64)> {
        (1..=bound)
            .filter_map(|m| {
                if (m - g).rem_euclid(2 * big_k) == 0 {
                    Some((m - 1, 1))
                } else if (m + g).rem_euclid(2 * big_k) == 0 {
                    Some((m - 1, -1))
                } else {
                    None
                }
            })
            .collect()
    }

    #[test]
    fn affine_orbit_rank_one() {
        let r2 = rs(2);
        let orbit = r2.affine_orbit(&Weight::new(vec![0]), 1, Rational::from_integer(50)).unwrap();
        let got: Vec<(i64, i64)> = orbit.iter().map(|(w, s)| (w.labels[0], *s)).collect();
        // ⟨m, m⟩ = m²/2 ≤ 50
        assert_eq!(got, rank_one_orbit(1, 3, 10));
        assert_eq!(got, vec![(0, 1), (4, -1), (6, 1)]);
    }

    #[test]
    fn affine_orbit_minimal_cutoff() {
        let r3 = rs(3);
        let g = Weight::new(vec![1, 0]);
        let c = r3.norm2(&g.add(&r3.rho));
        assert_eq!(r3.affine_orbit(&g, 1, c).unwrap(), vec![(g, 1)]);
    }

    #[test]
    fn affine_orbit_matches_brute_force() {
        // enumerate w(γ+ρ) + Kβ over a box of β and keep dominant regular images
        let r3 = rs(3);
        let g = Weight::new(vec![0, 1]);
        let k = 2;
        let big_k = k + 3;
        let cutoff = Rational::from_integer(60);
        let mut brute: Vec<(Weight, i64)> = Vec::new();
        for w in r3.weyl_group().unwrap() {
            for b0 in -8..=8 {
                for b1 in -8..=8 {
                    let x = w
                        .act(&g.add(&r3.rho))
                        .add(&r3.root_lattice_labels(&[b0, b1]).scale(big_k));
                    if x.labels.iter().all(|&a| a > 0) && r3.norm2(&x) <= cutoff {
                        brute.push((x.sub(&r3.rho), w.sign));
                    }
                }
            }
        }
        brute.sort();
        let mut got = r3.affine_orbit(&g, k, cutoff).unwrap();
        got.sort();
        assert_eq!(got, brute);
        for (lam, s) in &got {
            let wit = r3.alcove_reduce(&lam.add(&r3.rho), big_k).unwrap();
            assert_eq!(wit.base, g.add(&r3.rho));
            assert_eq!(wit.sign(), *s);
        }
    }

    fn weight_strategy(l: usize) -> impl Strategy<Value = Weight> {
        proptest::collection::vec(-6i64..7, l).prop_map(Weight::new)
    }

    proptest! {
        #[test]
        fn sign_is_homomorphism(p in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
                                q in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
                                lam in weight_strategy(4)) {
            let w = WeylElement::from_perm(p);
            let v = WeylElement::from_perm(q);
            let wv = w.compose(&v);
            prop_assert_eq!(wv.sign, permutation_sign(&wv.perm));
            prop_assert_eq!(wv.act(&lam), w.act(&v.act(&lam)));
            prop_assert_eq!(w.inverse().act(&w.act(&lam)), lam);
        }

        #[test]
        fn inner_product_is_w_invariant(a in weight_strategy(3), b in weight_strategy(3), idx in 0usize..24) {
            let r = rs(4);
            let w = &r.weyl_group().unwrap()[idx];
            prop_assert_eq!(r.pair(&w.act(&a), &w.act(&b)).unwrap(), r.pair(&a, &b).unwrap());
        }

        #[test]
        fn point_action_is_compatible(a in weight_strategy(3), idx in 0usize..24,
                                      z in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let r = rs(4);
            let w = &r.weyl_group().unwrap()[idx];
            let zc: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.3 * x)).collect();
            let lhs = w.act(&a).pair_point(&w.act_point(&zc));
            let rhs = a.pair_point(&zc);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn verlinde_count(n in 2usize..=6, k in 0i64..=8) {
            let r = rs(n);
            let expect = binomial((n as i64) + k - 1, k);
            prop_assert_eq!(r.level_k_weights(k).len() as i64, expect);
        }

        #[test]
        fn casimir_nonnegative(a in proptest::collection::vec(0i64..6, 3)) {
            let r = rs(4);
            let lam = Weight::new(a);
            let c = r.casimir(&lam).unwrap();
            prop_assert!(c >= Rational::zero());
            prop_assert_eq!(c == Rational::zero(), lam == Weight::zero(3));
        }

        #[test]
        fn alcove_reduce_inverts_affine_action(idx in 0usize..24,
                                               beta in proptest::collection::vec(-3i64..4, 3),
                                               g in 0usize..20, k in 0i64..4) {
            let r = rs(4);
            let dk = r.level_k_weights(k);
            let base = dk[g % dk.len()].add(&r.rho);
            let big_k = k + 4;
            let w = &r.weyl_group().unwrap()[idx];
            let mu = w.act(&base).add(&r.root_lattice_labels(&beta).scale(big_k));
            let wit = r.alcove_reduce(&mu, big_k).unwrap();
            prop_assert_eq!(&wit.base, &base);
            prop_assert_eq!(&wit.weyl, w);
            prop_assert_eq!(&wit.translation, &beta);
            prop_assert_eq!(r.reconstruct(&wit), mu);
        }
    }

    fn binomial(n: i64, k: i64) -> i64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}

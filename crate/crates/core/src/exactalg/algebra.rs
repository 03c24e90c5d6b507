//! Finite, possibly noncommutative, algebras over a finite commutative ring A.
//!
//! The additive group is ⊕ℤ/p^{nᵢ}; scalars act through one matrix per A-basis
//! element, and multiplication is given by structure constants on the
//! additive basis.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::abgroup::{mat_mul, quotient, solve_linear, AbGroup, Subgroup};
use super::linalg::Mat;
use super::ring::{quotient_ring, FiniteRing, Ideal, RingData, RingElt, RingQuotient};
use crate::error::{Error, Result};
use crate::guard;

pub type AlgElt = Vec<u64>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraData {
    pub scalars: RingData,
    pub exps: Vec<u32>,
    pub scalar_action: Vec<Mat>,
    pub struct_consts: Vec<Vec<Vec<u64>>>,
    pub unit: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    pub scalars: Arc<FiniteRing>,
    pub group: AbGroup,
    pub scalar_action: Vec<Mat>,
    consts: Vec<Vec<Vec<(usize, u64)>>>,
    pub unit: AlgElt,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.scalars == other.scalars
            && self.group == other.group
            && self.scalar_action == other.scalar_action
            && self.consts == other.consts
            && self.unit == other.unit
    }
}

impl FiniteAlgebra {
    pub fn new(
        scalars: Arc<FiniteRing>,
        group: AbGroup,
        scalar_action: Vec<Mat>,
        struct_consts: &[Vec<Vec<u64>>],
        unit: AlgElt,
    ) -> Result<FiniteAlgebra> {
        let k = group.rank();
        guard::check("algebra", group.order())?;
        if scalar_action.len() != scalars.rank() || unit.len() != k {
            return Err(Error::Invalid("algebra data has the wrong shape".into()));
        }
        for m in &scalar_action {
            if !group.is_hom(&group, m) {
                return Err(Error::Invalid("scalar action is not additive".into()));
            }
        }
        if struct_consts.len() != k || struct_consts.iter().any(|r| r.len() != k || r.iter().any(|c| c.len() != k)) {
            return Err(Error::Invalid("algebra structure constants have the wrong shape".into()));
        }
        let ords = group.orders();
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    let c = struct_consts[i][j][l];
                    let m = ords[i].min(ords[j]) as u128;
                    if c >= ords[l] || (m * c as u128) % ords[l] as u128 != 0 {
                        return Err(Error::OrderMismatch(i, j, l, "algebra structure constant".into()));
                    }
                }
            }
        }
        let consts = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).filter(|&l| struct_consts[i][j][l] != 0).map(|l| (l, struct_consts[i][j][l])).collect())
                    .collect()
            })
            .collect();
        let alg = FiniteAlgebra { scalars, group, scalar_action, consts, unit };
        alg.validate()?;
        Ok(alg)
    }

    fn validate(&self) -> Result<()> {
        let k = self.rank();
        let a = &self.scalars;
        for i in 0..k {
            let e = self.basis(i);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                return Err(Error::BadUnit(i));
            }
        }
        for i in 0..k {
            for j in 0..k {
                let ij = self.mul(&self.basis(i), &self.basis(j));
                for l in 0..k {
                    let lhs = self.mul(&ij, &self.basis(l));
                    let rhs = self.mul(&self.basis(i), &self.mul(&self.basis(j), &self.basis(l)));
                    if lhs != rhs {
                        return Err(Error::NotAssociative(i, j, l));
                    }
                }
            }
        }
        for v in 0..k {
            let e = self.basis(v);
            if self.smul(&a.one(), &e) != e {
                return Err(Error::BadUnit(v));
            }
            for s in 0..a.rank() {
                for t in 0..a.rank() {
                    let lhs = self.smul(&a.basis(s), &self.smul(&a.basis(t), &e));
                    let rhs = self.smul(&a.mul(&a.basis(s), &a.basis(t)), &e);
                    if lhs != rhs {
                        return Err(Error::Invalid(format!("scalar action not multiplicative at ({s}, {t}, {v})")));
                    }
                }
            }
        }
        for s in 0..a.rank() {
            let sc = a.basis(s);
            for i in 0..k {
                for j in 0..k {
                    let prod = self.mul(&self.basis(i), &self.basis(j));
                    let x = self.smul(&sc, &prod);
                    if x != self.mul(&self.smul(&sc, &self.basis(i)), &self.basis(j))
                        || x != self.mul(&self.basis(i), &self.smul(&sc, &self.basis(j)))
                    {
                        return Err(Error::Invalid(format!("multiplication not bilinear at scalar {s}, ({i}, {j})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn data(&self) -> AlgebraData {
        let k = self.rank();
        let mut c = vec![vec![vec![0; k]; k]; k];
        for i in 0..k {
            for j in 0..k {
                for &(l, v) in &self.consts[i][j] {
                    c[i][j][l] = v;
                }
            }
        }
        AlgebraData {
            scalars: self.scalars.data().clone(),
            exps: self.group.exps.clone(),
            scalar_action: self.scalar_action.clone(),
            struct_consts: c,
            unit: self.unit.clone(),
        }
    }

    pub fn from_data(d: &AlgebraData) -> Result<FiniteAlgebra> {
        let a = Arc::new(super::ring::validate_ring(d.scalars.clone())?);
        let g = AbGroup::new(a.prime(), d.exps.clone());
        FiniteAlgebra::new(a, g, d.scalar_action.clone(), &d.struct_consts, d.unit.clone())
    }

    /// Free A-module on `n` generators u_s with u_s·u_t = Σ γ(s,t)_r u_r.
    /// Additive basis a_i·u_s sits at index s·k + i.
    pub fn free<F>(scalars: Arc<FiniteRing>, n: usize, gamma: F, unit: &[RingElt]) -> Result<FiniteAlgebra>
    where
        F: Fn(usize, usize) -> Vec<(usize, RingElt)>,
    {
        let a = scalars.clone();
        let k = a.rank();
        guard::check("algebra", guard::pow_sat(a.order(), n as u64))?;
        let group = a.group().power(n);
        let kk = n * k;
        let mut c = vec![vec![vec![0; kk]; kk]; kk];
        for s in 0..n {
            for t in 0..n {
                let g = gamma(s, t);
                for i in 0..k {
                    for j in 0..k {
                        let ab = a.mul(&a.basis(i), &a.basis(j));
                        for (r, coef) in &g {
                            let v = a.mul(&ab, coef);
                            for l in 0..k {
                                let o = a.orders()[l];
                                let slot = &mut c[s * k + i][t * k + j][r * k + l];
                                *slot = (*slot + v[l]) % o;
                            }
                        }
                    }
                }
            }
        }
        let mut action = Vec::with_capacity(k);
        for sidx in 0..k {
            let mut m = vec![vec![0; kk]; kk];
            for s in 0..n {
                for i in 0..k {
                    let v = a.mul(&a.basis(sidx), &a.basis(i));
                    for l in 0..k {
                        m[s * k + l][s * k + i] = v[l];
                    }
                }
            }
            action.push(m);
        }
        let unit: AlgElt = unit.concat();
        FiniteAlgebra::new(scalars, group, action, &c, unit)
    }

    /// M_d(A), with E_{rc} at free index r·d + c.
    pub fn matrix_algebra(scalars: Arc<FiniteRing>, d: usize) -> Result<FiniteAlgebra> {
        let one = scalars.one();
        let zero = scalars.zero();
        let unit: Vec<RingElt> = (0..d * d).map(|s| if s / d == s % d { one.clone() } else { zero.clone() }).collect();
        FiniteAlgebra::free(
            scalars.clone(),
            d * d,
            |s, t| {
                let (r1, c1) = (s / d, s % d);
                let (r2, c2) = (t / d, t % d);
                if c1 == r2 {
                    vec![(r1 * d + c2, one.clone())]
                } else {
                    Vec::new()
                }
            },
            &unit,
        )
    }

    /// A viewed as an algebra over itself.
    pub fn from_ring(a: Arc<FiniteRing>) -> FiniteAlgebra {
        FiniteAlgebra::free(a.clone(), 1, |_, _| vec![(0, a.one())], &[a.one()]).expect("ring is an algebra over itself")
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    pub fn order(&self) -> u128 {
        self.group.order()
    }

    pub fn zero(&self) -> AlgElt {
        self.group.zero()
    }

    pub fn one(&self) -> AlgElt {
        self.unit.clone()
    }

    pub fn is_zero_algebra(&self) -> bool {
        self.rank() == 0
    }

    pub fn basis(&self, i: usize) -> AlgElt {
        let mut e = self.zero();
        e[i] = 1 % self.group.order_at(i);
        e
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> AlgElt {
        self.group.add(x, y)
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> AlgElt {
        self.group.sub(x, y)
    }

    pub fn neg(&self, x: &[u64]) -> AlgElt {
        self.group.neg(x)
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        self.group.is_zero(x)
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> AlgElt {
        let ords = self.group.orders();
        let mut acc = vec![0u64; self.rank()];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj == 0 {
                    continue;
                }
                for &(l, c) in &self.consts[i][j] {
                    let o = ords[l];
                    acc[l] = (acc[l] + (xi % o) * (yj % o) % o * c) % o;
                }
            }
        }
        acc
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> AlgElt {
        let mut base = x.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Scalar multiplication a·x.
    pub fn smul(&self, a: &[u64], x: &[u64]) -> AlgElt {
        let mut acc = self.zero();
        for (s, &c) in a.iter().enumerate() {
            if c != 0 {
                let y = AbGroup::apply(&self.group, &self.scalar_action[s], x);
                acc = self.add(&acc, &self.group.scale(c, &y));
            }
        }
        acc
    }

    pub fn scalar(&self, a: &[u64]) -> AlgElt {
        self.smul(a, &self.unit)
    }

    pub fn elements(&self) -> super::abgroup::ElementIter {
        self.group.elements()
    }

    pub fn lmul_matrix(&self, x: &[u64]) -> Mat {
        let cols: Vec<AlgElt> = (0..self.rank()).map(|j| self.mul(x, &self.basis(j))).collect();
        super::abgroup::from_columns(self.rank(), &cols)
    }

    pub fn rmul_matrix(&self, x: &[u64]) -> Mat {
        let cols: Vec<AlgElt> = (0..self.rank()).map(|j| self.mul(&self.basis(j), x)).collect();
        super::abgroup::from_columns(self.rank(), &cols)
    }

    pub fn inverse(&self, x: &[u64]) -> Option<AlgElt> {
        if self.is_zero_algebra() {
            return Some(Vec::new());
        }
        let y = solve_linear(&self.group, &self.group, &self.lmul_matrix(x), &self.unit).particular?;
        if self.mul(&y, x) == self.unit {
            Some(y)
        } else {
            None
        }
    }

    pub fn is_unit(&self, x: &[u64]) -> bool {
        self.inverse(x).is_some()
    }

    /// A-submodule generated by `gens`.
    pub fn a_span(&self, gens: &[AlgElt]) -> Subgroup {
        let mut rows = Vec::new();
        for g in gens {
            for s in 0..self.scalars.rank() {
                rows.push(self.smul(&self.scalars.basis(s), g));
            }
        }
        Subgroup::span(&self.group, &rows)
    }

    /// Two-sided ideal generated by `gens`.
    pub fn two_sided_ideal(&self, gens: &[AlgElt]) -> Subgroup {
        let k = self.rank();
        let mut rows = Vec::new();
        for g in gens {
            for j in 0..k {
                let left = self.mul(&self.basis(j), g);
                for l in 0..k {
                    rows.push(self.mul(&left, &self.basis(l)));
                }
            }
        }
        Subgroup::span(&self.group, &rows)
    }

    pub fn is_two_sided(&self, sub: &Subgroup) -> bool {
        let gens = sub.generators();
        gens.iter().all(|g| {
            (0..self.rank()).all(|j| sub.contains(&self.mul(&self.basis(j), g)) && sub.contains(&self.mul(g, &self.basis(j))))
                && (0..self.scalars.rank()).all(|s| sub.contains(&self.smul(&self.scalars.basis(s), g)))
        })
    }

    /// J·E for an ideal J of the scalars.
    pub fn scalar_ideal_span(&self, j: &Ideal) -> Subgroup {
        let mut rows = Vec::new();
        for a in j.basis.generators() {
            for i in 0..self.rank() {
                rows.push(self.smul(&a, &self.basis(i)));
            }
        }
        Subgroup::span(&self.group, &rows)
    }

    /// E/I for a two-sided ideal I, over the same scalars.
    pub fn quotient(&self, ideal: &Subgroup) -> Result<AlgebraQuotient> {
        if !self.is_two_sided(ideal) {
            return Err(Error::KernelNotTwoSided("quotient by a non-ideal".into()));
        }
        let q = quotient(&self.group, ideal);
        let n = q.group.rank();
        let lifts: Vec<AlgElt> = (0..n)
            .map(|j| {
                let mut e = vec![0; n];
                e[j] = 1;
                q.lift(&self.group, &e)
            })
            .collect();
        let mut c = vec![vec![vec![0; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                c[a][b] = q.project(&self.mul(&lifts[a], &lifts[b]));
            }
        }
        let action = self
            .scalar_action
            .iter()
            .map(|m| mat_mul(&q.group, &mat_mul(&q.group, &q.proj, m), &q.section))
            .collect();
        let alg = FiniteAlgebra::new(self.scalars.clone(), q.group.clone(), action, &c, q.project(&self.unit))?;
        Ok(AlgebraQuotient { alg, proj: q.proj, section: q.section })
    }

    /// E/JE as an algebra over A/J, together with the algebra projection.
    pub fn base_change_quotient(&self, j: &Ideal) -> Result<(AlgebraQuotient, RingQuotient)> {
        self.quotient_over(&self.scalar_ideal_span(j), j)
    }

    /// E/K over A/J for a two-sided ideal K containing JE.
    pub fn quotient_over(&self, sub: &Subgroup, j: &Ideal) -> Result<(AlgebraQuotient, RingQuotient)> {
        if !self.scalar_ideal_span(j).is_subset(sub) {
            return Err(Error::KernelNotTwoSided("ideal does not contain JE".into()));
        }
        let rq = quotient_ring(&self.scalars, j);
        let aq = self.quotient(sub)?;
        let new_scalars = rq.ring.clone();
        let action: Vec<Mat> = (0..new_scalars.rank())
            .map(|s| {
                let lift = rq.lift(&new_scalars.basis(s));
                let cols: Vec<AlgElt> = (0..aq.alg.rank())
                    .map(|v| {
                        let x = AbGroup::apply(&self.group, &aq.section, &aq.alg.basis(v));
                        AbGroup::apply(&aq.alg.group, &aq.proj, &self.smul(&lift, &x))
                    })
                    .collect();
                super::abgroup::from_columns(aq.alg.rank(), &cols)
            })
            .collect();
        let data = aq.alg.data();
        let alg = FiniteAlgebra::new(new_scalars, aq.alg.group.clone(), action, &data.struct_consts, aq.alg.unit.clone())?;
        Ok((AlgebraQuotient { alg, proj: aq.proj, section: aq.section }, rq))
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraQuotient {
    pub alg: FiniteAlgebra,
    pub proj: Mat,
    pub section: Mat,
}

impl AlgebraQuotient {
    pub fn project(&self, x: &[u64]) -> AlgElt {
        AbGroup::apply(&self.alg.group, &self.proj, x)
    }

    pub fn lift(&self, parent: &FiniteAlgebra, y: &[u64]) -> AlgElt {
        AbGroup::apply(&parent.group, &self.section, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_algebra_is_noncommutative() {
        let a = Arc::new(FiniteRing::fp(3));
        let m = FiniteAlgebra::matrix_algebra(a, 2).unwrap();
        assert_eq!(m.order(), 81);
        let e12 = m.basis(1);
        let e21 = m.basis(2);
        assert_ne!(m.mul(&e12, &e21), m.mul(&e21, &e12));
        assert_eq!(m.mul(&e12, &e21), m.basis(0));
    }

    #[test]
    fn units_of_m2_f3() {
        let a = Arc::new(FiniteRing::fp(3));
        let m = FiniteAlgebra::matrix_algebra(a, 2).unwrap();
        let units = m.elements().filter(|x| m.is_unit(x)).count();
        assert_eq!(units, 48);
    }

    #[test]
    fn base_change_m2_z9_to_f3() {
        let a = Arc::new(FiniteRing::zmod(3, 2));
        let m = FiniteAlgebra::matrix_algebra(a.clone(), 2).unwrap();
        let j = Ideal::generated(&a, &[vec![3]]);
        let (q, rq) = m.base_change_quotient(&j).unwrap();
        assert_eq!(*rq.ring, FiniteRing::fp(3));
        assert_eq!(q.alg.order(), 81);
    }

    #[test]
    fn two_sided_ideal_of_simple_algebra_is_everything() {
        let a = Arc::new(FiniteRing::fp(3));
        let m = FiniteAlgebra::matrix_algebra(a, 2).unwrap();
        let i = m.two_sided_ideal(&[m.basis(1)]);
        assert!(i.is_whole());
    }
}

//! Finite commutative ℤ/pⁿ-algebras presented by structure constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::abgroup::{quotient, solve_linear, AbGroup, Subgroup};
use super::linalg::Mat;
use super::zmod::{is_prime, log_p};
use crate::error::{Error, Result};
use crate::guard;

/// Coordinates of a ring element in the additive basis.
pub type RingElt = Vec<u64>;

/// Raw serialisable presentation; `FiniteRing` is the validated form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingData {
    pub prime: u64,
    pub basis_orders: Vec<u64>,
    pub struct_consts: Vec<Vec<Vec<u64>>>,
    pub unit: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct FiniteRing {
    data: RingData,
    group: AbGroup,
    sparse: Vec<Vec<Vec<(usize, u64)>>>,
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}
impl Eq for FiniteRing {}

pub fn validate_ring(data: RingData) -> Result<FiniteRing> {
    let p = data.prime;
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let k = data.basis_orders.len();
    let mut exps = Vec::with_capacity(k);
    for (i, &o) in data.basis_orders.iter().enumerate() {
        match log_p(p, o) {
            Some(e) if e > 0 => exps.push(e),
            _ => return Err(Error::OrderMismatch(i, i, i, format!("basis order {o} is not a positive power of {p}"))),
        }
    }
    let group = AbGroup::new(p, exps);
    guard::check("ring", group.order())?;
    if data.unit.len() != k
        || data.struct_consts.len() != k
        || data.struct_consts.iter().any(|r| r.len() != k || r.iter().any(|c| c.len() != k))
    {
        return Err(Error::Invalid("structure constant tensor has the wrong shape".into()));
    }
    let ords = &data.basis_orders;
    for i in 0..k {
        if data.unit[i] >= ords[i] {
            return Err(Error::OrderMismatch(i, i, i, "unit coordinate not reduced".into()));
        }
        for j in 0..k {
            for l in 0..k {
                let c = data.struct_consts[i][j][l];
                if c >= ords[l] {
                    return Err(Error::OrderMismatch(i, j, l, format!("constant {c} not reduced mod {}", ords[l])));
                }
                let m = ords[i].min(ords[j]) as u128;
                if (m * c as u128) % ords[l] as u128 != 0 {
                    return Err(Error::OrderMismatch(i, j, l, "product exceeds additive order of factors".into()));
                }
            }
        }
    }
    let ring = FiniteRing::build(data, group);
    for i in 0..k {
        for j in 0..k {
            let a = ring.mul(&ring.basis(i), &ring.basis(j));
            let b = ring.mul(&ring.basis(j), &ring.basis(i));
            if a != b {
                return Err(Error::NotCommutative(i, j));
            }
        }
    }
    for i in 0..k {
        if ring.mul(&ring.data.unit, &ring.basis(i)) != ring.basis(i) {
            return Err(Error::BadUnit(i));
        }
    }
    for i in 0..k {
        for j in 0..k {
            let ij = ring.mul(&ring.basis(i), &ring.basis(j));
            for l in 0..k {
                let lhs = ring.mul(&ij, &ring.basis(l));
                let jl = ring.mul(&ring.basis(j), &ring.basis(l));
                if lhs != ring.mul(&ring.basis(i), &jl) {
                    return Err(Error::NotAssociative(i, j, l));
                }
            }
        }
    }
    Ok(ring)
}

impl FiniteRing {
    fn build(data: RingData, group: AbGroup) -> FiniteRing {
        let k = data.basis_orders.len();
        let sparse = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        (0..k)
                            .filter(|&l| data.struct_consts[i][j][l] != 0)
                            .map(|l| (l, data.struct_consts[i][j][l]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FiniteRing { data, group, sparse }
    }

    pub fn data(&self) -> &RingData {
        &self.data
    }

    pub fn prime(&self) -> u64 {
        self.data.prime
    }

    pub fn rank(&self) -> usize {
        self.data.basis_orders.len()
    }

    pub fn group(&self) -> &AbGroup {
        &self.group
    }

    pub fn orders(&self) -> &[u64] {
        &self.data.basis_orders
    }

    pub fn order(&self) -> u128 {
        self.group.order()
    }

    pub fn is_zero_ring(&self) -> bool {
        self.rank() == 0
    }

    pub fn zero(&self) -> RingElt {
        vec![0; self.rank()]
    }

    pub fn one(&self) -> RingElt {
        self.data.unit.clone()
    }

    pub fn basis(&self, i: usize) -> RingElt {
        let mut e = self.zero();
        e[i] = 1 % self.data.basis_orders[i];
        e
    }

    pub fn from_int(&self, n: i64) -> RingElt {
        let c = n.rem_euclid(self.char_bound() as i64) as u64;
        self.scale_int(c, &self.one())
    }

    /// Exponent of the additive group; n·x depends only on n modulo this.
    pub fn char_bound(&self) -> u64 {
        self.data.basis_orders.iter().copied().max().unwrap_or(1)
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> RingElt {
        self.group.add(x, y)
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> RingElt {
        self.group.sub(x, y)
    }

    pub fn neg(&self, x: &[u64]) -> RingElt {
        self.group.neg(x)
    }

    pub fn scale_int(&self, c: u64, x: &[u64]) -> RingElt {
        self.group.scale(c, x)
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        self.group.is_zero(x)
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> RingElt {
        let ords = &self.data.basis_orders;
        let mut acc = vec![0u64; self.rank()];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj == 0 {
                    continue;
                }
                for &(l, c) in &self.sparse[i][j] {
                    let o = ords[l];
                    acc[l] = (acc[l] + (xi % o) * (yj % o) % o * c) % o;
                }
            }
        }
        acc
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> RingElt {
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

    pub fn elements(&self) -> super::abgroup::ElementIter {
        self.group.elements()
    }

    /// Matrix of y ↦ x·y (column convention).
    pub fn lmul_matrix(&self, x: &[u64]) -> Mat {
        let k = self.rank();
        let cols: Vec<RingElt> = (0..k).map(|j| self.mul(x, &self.basis(j))).collect();
        (0..k).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
    }

    pub fn inverse(&self, x: &[u64]) -> Option<RingElt> {
        if self.is_zero_ring() {
            return Some(Vec::new());
        }
        let m = self.lmul_matrix(x);
        solve_linear(&self.group, &self.group, &m, &self.one()).particular
    }

    pub fn is_unit(&self, x: &[u64]) -> bool {
        self.inverse(x).is_some()
    }

    pub fn zmod(p: u64, n: u32) -> FiniteRing {
        let o = p.pow(n);
        validate_ring(RingData { prime: p, basis_orders: vec![o], struct_consts: vec![vec![vec![1 % o]]], unit: vec![1 % o] })
            .expect("ℤ/pⁿ is a ring")
    }

    pub fn fp(p: u64) -> FiniteRing {
        FiniteRing::zmod(p, 1)
    }

    pub fn zero_ring(p: u64) -> FiniteRing {
        validate_ring(RingData { prime: p, basis_orders: vec![], struct_consts: vec![], unit: vec![] })
            .expect("zero ring")
    }

    /// Product ring R × S.
    pub fn product(r: &FiniteRing, s: &FiniteRing) -> Result<FiniteRing> {
        let (a, b) = (r.rank(), s.rank());
        let k = a + b;
        let mut c = vec![vec![vec![0; k]; k]; k];
        for i in 0..a {
            for j in 0..a {
                for l in 0..a {
                    c[i][j][l] = r.data.struct_consts[i][j][l];
                }
            }
        }
        for i in 0..b {
            for j in 0..b {
                for l in 0..b {
                    c[a + i][a + j][a + l] = s.data.struct_consts[i][j][l];
                }
            }
        }
        let mut orders = r.data.basis_orders.clone();
        orders.extend_from_slice(&s.data.basis_orders);
        let mut unit = r.one();
        unit.extend(s.one());
        validate_ring(RingData { prime: r.prime(), basis_orders: orders, struct_consts: c, unit })
    }

    /// Human-readable label for reports.
    pub fn describe(&self) -> String {
        format!("ring(p={}, orders={:?})", self.prime(), self.data.basis_orders)
    }
}

/// An ideal, stored with its canonical additive basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ideal {
    pub generators: Vec<RingElt>,
    pub basis: Subgroup,
}

impl Ideal {
    pub fn generated(ring: &FiniteRing, gens: &[RingElt]) -> Ideal {
        let mut rows = Vec::new();
        for g in gens {
            for j in 0..ring.rank() {
                rows.push(ring.mul(g, &ring.basis(j)));
            }
        }
        Ideal { generators: gens.to_vec(), basis: Subgroup::span(ring.group(), &rows) }
    }

    pub fn zero(ring: &FiniteRing) -> Ideal {
        Ideal::generated(ring, &[])
    }

    pub fn whole(ring: &FiniteRing) -> Ideal {
        Ideal::generated(ring, &[ring.one()])
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.basis.contains(x)
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_zero()
    }

    pub fn is_whole(&self) -> bool {
        self.basis.is_whole()
    }

    /// Equality of ideals (generators are ignored).
    pub fn same(&self, other: &Ideal) -> bool {
        self.basis == other.basis
    }

    pub fn sum(&self, ring: &FiniteRing, other: &Ideal) -> Ideal {
        let mut g = self.basis.generators();
        g.extend(other.basis.generators());
        Ideal::generated(ring, &g)
    }

    pub fn product(&self, ring: &FiniteRing, other: &Ideal) -> Ideal {
        let mut g = Vec::new();
        for x in self.basis.generators() {
            for y in other.basis.generators() {
                g.push(ring.mul(&x, &y));
            }
        }
        Ideal::generated(ring, &g)
    }

    pub fn power(&self, ring: &FiniteRing, e: u32) -> Ideal {
        let mut acc = Ideal::whole(ring);
        for _ in 0..e {
            acc = acc.product(ring, self);
        }
        acc
    }

    pub fn elements(&self) -> Vec<RingElt> {
        self.basis.elements()
    }

    /// Smallest e ≥ 1 with selfᵉ = 0 (None if not nilpotent).
    pub fn nilpotency_index(&self, ring: &FiniteRing) -> Option<u32> {
        let mut acc = self.clone();
        let bound = ring.group().log_order() as u32 + 1;
        for e in 1..=bound {
            if acc.is_zero() {
                return Some(e);
            }
            acc = acc.product(ring, self);
        }
        None
    }
}

#[derive(Clone, Debug)]
pub struct RingHom {
    pub source: Arc<FiniteRing>,
    pub target: Arc<FiniteRing>,
    pub images: Vec<RingElt>,
}

impl RingHom {
    pub fn new(source: Arc<FiniteRing>, target: Arc<FiniteRing>, images: Vec<RingElt>) -> Result<RingHom> {
        let h = RingHom { source, target, images };
        h.validate()?;
        Ok(h)
    }

    pub fn identity(r: Arc<FiniteRing>) -> RingHom {
        let images = (0..r.rank()).map(|i| r.basis(i)).collect();
        RingHom { source: r.clone(), target: r, images }
    }

    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        if self.images.len() != s.rank() {
            return Err(Error::Invalid("ring map has wrong number of images".into()));
        }
        for (i, img) in self.images.iter().enumerate() {
            if !t.is_zero(&t.scale_int(s.orders()[i], img)) {
                return Err(Error::OrderMismatch(i, i, i, "ring map ignores additive order".into()));
            }
        }
        if self.apply(&s.one()) != t.one() {
            return Err(Error::BadUnit(0));
        }
        for i in 0..s.rank() {
            for j in 0..s.rank() {
                let lhs = self.apply(&s.mul(&s.basis(i), &s.basis(j)));
                let rhs = t.mul(&self.images[i], &self.images[j]);
                if lhs != rhs {
                    return Err(Error::Invalid(format!("ring map not multiplicative on ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &[u64]) -> RingElt {
        let t = &self.target;
        let mut acc = t.zero();
        for (i, &c) in x.iter().enumerate() {
            if c != 0 {
                acc = t.add(&acc, &t.scale_int(c, &self.images[i]));
            }
        }
        acc
    }

    pub fn matrix(&self) -> Mat {
        let k = self.target.rank();
        (0..k).map(|r| self.images.iter().map(|img| img[r]).collect()).collect()
    }

    pub fn compose(&self, after: &RingHom) -> RingHom {
        let images = self.images.iter().map(|x| after.apply(x)).collect();
        RingHom { source: self.source.clone(), target: after.target.clone(), images }
    }

    pub fn kernel(&self) -> Ideal {
        let sol = solve_linear(self.source.group(), self.target.group(), &self.matrix(), &self.target.zero());
        Ideal::generated(&self.source, &sol.kernel.generators())
    }

    pub fn is_surjective(&self) -> bool {
        let img = Subgroup::span(self.target.group(), &self.images);
        img.is_whole()
    }
}

/// R/I with the projection and an additive section.
/// Every ring map source → target, by search over basis images.
pub fn ring_homs(source: &Arc<FiniteRing>, target: &Arc<FiniteRing>) -> Result<Vec<RingHom>> {
    let tel: Vec<RingElt> = target.elements().collect();
    let choices: Vec<Vec<RingElt>> = source
        .orders()
        .iter()
        .map(|&o| tel.iter().filter(|y| target.is_zero(&target.scale_int(o, y))).cloned().collect())
        .collect();
    let total = choices.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    guard::check("ring map search", total)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let images = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        let h = RingHom { source: source.clone(), target: target.clone(), images };
        if h.validate().is_ok() {
            out.push(h);
        }
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Clone, Debug)]
pub struct RingQuotient {
    pub ring: Arc<FiniteRing>,
    pub proj: RingHom,
    pub section: Mat,
}

impl RingQuotient {
    pub fn lift(&self, y: &[u64]) -> RingElt {
        AbGroup::apply(self.proj.source.group(), &self.section, y)
    }
}

pub fn quotient_ring(r: &Arc<FiniteRing>, ideal: &Ideal) -> RingQuotient {
    let q = quotient(r.group(), &ideal.basis);
    let k = q.group.rank();
    let orders = q.group.orders();
    let lift = |j: usize| -> RingElt {
        let mut e = vec![0; k];
        e[j] = 1;
        q.lift(r.group(), &e)
    };
    let lifts: Vec<RingElt> = (0..k).map(lift).collect();
    let mut c = vec![vec![vec![0; k]; k]; k];
    for a in 0..k {
        for b in 0..k {
            c[a][b] = q.project(&r.mul(&lifts[a], &lifts[b]));
        }
    }
    let unit = q.project(&r.one());
    let data = RingData { prime: r.prime(), basis_orders: orders, struct_consts: c, unit };
    let ring = Arc::new(validate_ring(data).expect("quotient of a valid ring by an ideal is a ring"));
    let images = (0..r.rank()).map(|i| q.project(&r.basis(i))).collect();
    let proj = RingHom { source: r.clone(), target: ring.clone(), images };
    RingQuotient { ring, proj, section: q.section }
}

/// Which polynomial extension to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionKind {
    DualNumbers,
    TruncatedPoly(usize),
}

impl ExtensionKind {
    pub fn degree(&self) -> usize {
        match self {
            ExtensionKind::DualNumbers => 2,
            ExtensionKind::TruncatedPoly(n) => *n,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ExtensionKind::DualNumbers => "dual_numbers".into(),
            ExtensionKind::TruncatedPoly(n) => format!("truncated_poly({n})"),
        }
    }
}

/// R[t]/(tᴺ) with basis eᵢ·tʲ at index j·k + i, plus the inclusion of R.
pub fn extend_scalars(r: &Arc<FiniteRing>, kind: ExtensionKind) -> Result<(Arc<FiniteRing>, RingHom)> {
    let n = kind.degree();
    if n == 0 {
        return Err(Error::Invalid("truncated_poly needs N ≥ 1".into()));
    }
    let k = r.rank();
    let total = crate::guard::pow_sat(r.order(), n as u64);
    guard::check("extended ring", total)?;
    let kk = k * n;
    let mut c = vec![vec![vec![0; kk]; kk]; kk];
    for a in 0..n {
        for b in 0..n {
            if a + b >= n {
                continue;
            }
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        c[a * k + i][b * k + j][(a + b) * k + l] = r.data.struct_consts[i][j][l];
                    }
                }
            }
        }
    }
    let mut orders = Vec::with_capacity(kk);
    for _ in 0..n {
        orders.extend_from_slice(r.orders());
    }
    let mut unit = r.one();
    unit.extend(std::iter::repeat(0).take(k * (n - 1)));
    let ext = Arc::new(validate_ring(RingData { prime: r.prime(), basis_orders: orders, struct_consts: c, unit })?);
    let images = (0..k)
        .map(|i| {
            let mut e = vec![0; kk];
            e[i] = 1;
            e
        })
        .collect();
    let incl = RingHom { source: r.clone(), target: ext.clone(), images };
    Ok((ext, incl))
}

/// The maximal ideal when R is local.
pub fn is_local(r: &FiniteRing) -> Result<Option<Ideal>> {
    if r.is_zero_ring() {
        return Ok(None);
    }
    guard::check("ring enumerated by is_local", r.order())?;
    let len = r.group().log_order();
    let mut nil = Vec::new();
    for x in r.elements() {
        let mut y = x.clone();
        let mut e = 1u64;
        while e < len.max(1) {
            y = r.mul(&y, &y);
            e *= 2;
        }
        if r.is_zero(&y) {
            nil.push(x);
        }
    }
    let n = Ideal::generated(r, &nil);
    let rr = Arc::new(r.clone());
    let q = quotient_ring(&rr, &n);
    let s = &q.ring;
    for y in s.elements() {
        if !s.is_zero(&y) && !s.is_unit(&y) {
            return Ok(None);
        }
    }
    Ok(Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dual(p: u64) -> Arc<FiniteRing> {
        extend_scalars(&Arc::new(FiniteRing::fp(p)), ExtensionKind::DualNumbers).unwrap().0
    }

    #[test]
    fn z9_presentation_is_valid() {
        let r = FiniteRing::zmod(3, 2);
        assert_eq!(r.order(), 9);
    }

    #[test]
    fn bad_unit_is_reported() {
        let d = RingData { prime: 3, basis_orders: vec![9], struct_consts: vec![vec![vec![2]]], unit: vec![1] };
        assert_eq!(validate_ring(d), Err(Error::BadUnit(0)));
    }

    #[test]
    fn noncommutative_constants_rejected() {
        let mut c = vec![vec![vec![0; 2]; 2]; 2];
        c[0][0][0] = 1;
        c[0][1][1] = 1;
        c[1][0][1] = 1;
        c[1][1][0] = 1;
        c[0][1][0] = 1;
        let d = RingData { prime: 3, basis_orders: vec![3, 3], struct_consts: c, unit: vec![1, 0] };
        assert!(matches!(validate_ring(d), Err(Error::NotCommutative(..)) | Err(Error::BadUnit(_))));
    }

    #[test]
    fn quotient_z9_by_3_is_f3() {
        let r = Arc::new(FiniteRing::zmod(3, 2));
        let i = Ideal::generated(&r, &[vec![3]]);
        let q = quotient_ring(&r, &i);
        assert_eq!(*q.ring, FiniteRing::fp(3));
        assert_eq!(q.proj.apply(&[1]), vec![1]);
        assert!(q.proj.kernel().same(&i));
    }

    #[test]
    fn quotient_by_zero_ideal_keeps_order() {
        let r = Arc::new(FiniteRing::zmod(3, 2));
        let q = quotient_ring(&r, &Ideal::zero(&r));
        assert_eq!(q.ring.order(), 9);
    }

    #[test]
    fn dual_numbers_mod_eps() {
        let r = dual(3);
        let i = Ideal::generated(&r, &[vec![0, 1]]);
        let q = quotient_ring(&r, &i);
        assert_eq!(q.ring.order(), 3);
        assert!(q.proj.kernel().same(&i));
    }

    #[test]
    fn truncated_two_equals_dual() {
        let z9 = Arc::new(FiniteRing::zmod(3, 2));
        let a = extend_scalars(&z9, ExtensionKind::TruncatedPoly(2)).unwrap().0;
        let b = extend_scalars(&z9, ExtensionKind::DualNumbers).unwrap().0;
        assert_eq!(a, b);
        let z4 = Arc::new(FiniteRing::zmod(2, 2));
        let c = extend_scalars(&z4, ExtensionKind::TruncatedPoly(3)).unwrap().0;
        assert_eq!(c.order(), 64);
    }

    #[test]
    fn locality() {
        let z9 = FiniteRing::zmod(3, 2);
        let m = is_local(&z9).unwrap().unwrap();
        assert!(m.same(&Ideal::generated(&z9, &[vec![3]])));
        let f3 = FiniteRing::fp(3);
        let prod = FiniteRing::product(&f3, &f3).unwrap();
        assert!(is_local(&prod).unwrap().is_none());
        let d = dual(3);
        let m = is_local(&d).unwrap().unwrap();
        assert!(m.same(&Ideal::generated(&d, &[vec![0, 1]])));
    }

    #[test]
    fn zero_ring_quotient() {
        let r = Arc::new(FiniteRing::zmod(3, 2));
        let q = quotient_ring(&r, &Ideal::whole(&r));
        assert!(q.ring.is_zero_ring());
    }
}

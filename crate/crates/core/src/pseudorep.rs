//! Determinant laws: evaluation, characteristic polynomials, kernels,
//! reducibility and the dimension-2 pseudodeformation census.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactalg::abgroup::{AbGroup, Subgroup};
use crate::exactalg::algebra::{AlgElt, FiniteAlgebra};
use crate::exactalg::linalg::Mat;
use crate::exactalg::poly::{PolyRing, TruncPoly};
use crate::exactalg::ring::{is_local, quotient_ring, FiniteRing, RingElt, RingHom, RingQuotient};
use crate::grouprep::{Character, FiniteGroup};
use crate::guard;

/// d×d matrix over A.
pub type RingMat = Vec<Vec<RingElt>>;

pub fn ring_mat_mul(a: &FiniteRing, x: &RingMat, y: &RingMat) -> RingMat {
    let d = x.len();
    (0..d)
        .map(|r| {
            (0..d)
                .map(|c| (0..d).fold(a.zero(), |acc, k| a.add(&acc, &a.mul(&x[r][k], &y[k][c]))))
                .collect()
        })
        .collect()
}

pub fn ring_mat_identity(a: &FiniteRing, d: usize) -> RingMat {
    (0..d).map(|r| (0..d).map(|c| if r == c { a.one() } else { a.zero() }).collect()).collect()
}

/// Images ρ(g) for every element, from generator images; None if a relation fails.
pub fn close_matrix_rep(a: &FiniteRing, group: &FiniteGroup, gens: &[RingMat]) -> Option<Vec<RingMat>> {
    let d = gens.first().map_or(0, |m| m.len());
    let n = group.order();
    let mut img: Vec<Option<RingMat>> = vec![None; n];
    img[0] = Some(ring_mat_identity(a, d));
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (gi, &s) in group.generators.iter().enumerate() {
            let y = group.mul(x, s);
            let m = ring_mat_mul(a, img[x].as_ref().unwrap(), &gens[gi]);
            match &img[y] {
                None => {
                    img[y] = Some(m);
                    queue.push_back(y);
                }
                Some(old) if *old != m => return None,
                _ => {}
            }
        }
    }
    let img: Vec<RingMat> = img.into_iter().map(|m| m.unwrap()).collect();
    for x in 0..n {
        for (gi, &s) in group.generators.iter().enumerate() {
            if img[group.mul(x, s)] != ring_mat_mul(a, &img[x], &gens[gi]) {
                return None;
            }
        }
    }
    Some(img)
}

/// Shape data for the type-(1,1) determinant a·d − m(b⊗c).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GmaShape {
    pub a_rank: usize,
    pub b_rank: usize,
    pub c_rank: usize,
    /// m(bᵢ ⊗ cⱼ) ∈ A on additive bases.
    pub pairing: Vec<Vec<RingElt>>,
}

#[derive(Clone, Debug)]
pub enum DetLaw {
    /// D(x) = det(Σ xᵢ·Mᵢ) with one matrix per additive basis element.
    Matrix { images: Vec<RingMat> },
    Gma(GmaShape),
    /// Degree-2 law on A[G] given by trace and determinant tables.
    TraceDet { group: Arc<FiniteGroup>, t: Vec<RingElt>, dt: Vec<RingElt> },
    /// D′(x′) = π(D(lift x′)) on a quotient E/(I + JE) over A/J.
    Induced { parent: Box<PsRep>, parent_add: AbGroup, section: Mat, scalar_proj: RingHom },
}

/// A determinant law of dimension `dim` on a carrier with the given unit.
#[derive(Clone, Debug)]
pub struct PsRep {
    pub scalars: Arc<FiniteRing>,
    pub dim: usize,
    pub unit: AlgElt,
    pub law: DetLaw,
}

/// χ(x, t) = t^d − Λ₁t^{d−1} + … + (−1)^d Λ_d, stored as Λ₀..Λ_d (Λ₀ = 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub lambdas: Vec<RingElt>,
}

impl CharPoly {
    /// Ordinary coefficients c₀..c_d of t⁰..t^d.
    pub fn coefficients(&self, a: &FiniteRing) -> Vec<RingElt> {
        let d = self.lambdas.len() - 1;
        (0..=d)
            .map(|j| {
                let l = &self.lambdas[d - j];
                if (d - j) % 2 == 0 {
                    l.clone()
                } else {
                    a.neg(l)
                }
            })
            .collect()
    }
}

/// Λ₀..Λ_d of a square matrix over A.
pub fn matrix_char_poly(a: &Arc<FiniteRing>, m: &RingMat) -> Vec<RingElt> {
    let d = m.len();
    let pr = PolyRing::new(a.clone(), d + 1);
    let entries: Vec<Vec<TruncPoly>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let mut e = pr.constant(&a.neg(&m[r][c]));
                    if r == c {
                        e[1] = a.one();
                    }
                    e
                })
                .collect()
        })
        .collect();
    let c = det_poly(&pr, &entries);
    (0..=d).map(|i| if i % 2 == 0 { c[d - i].clone() } else { a.neg(&c[d - i]) }).collect()
}

fn det_poly(pr: &PolyRing, m: &[Vec<TruncPoly>]) -> TruncPoly {
    let d = m.len();
    match d {
        0 => pr.one(),
        1 => m[0][0].clone(),
        2 => pr.sub(&pr.mul(&m[0][0], &m[1][1]), &pr.mul(&m[0][1], &m[1][0])),
        _ => {
            let mut acc = pr.zero();
            for c in 0..d {
                if pr.is_zero(&m[0][c]) {
                    continue;
                }
                let minor: Vec<Vec<TruncPoly>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect()).collect();
                let term = pr.mul(&m[0][c], &det_poly(pr, &minor));
                acc = if c % 2 == 0 { pr.add(&acc, &term) } else { pr.sub(&acc, &term) };
            }
            acc
        }
    }
}

impl PsRep {
    /// ψ(ρ) on A[G] for a matrix representation given on generators.
    pub fn matrix_rep(scalars: Arc<FiniteRing>, group: &FiniteGroup, gens: &[RingMat]) -> Result<PsRep> {
        let a = &scalars;
        let all = close_matrix_rep(a, group, gens).ok_or_else(|| Error::Invalid("matrices violate a group relation".into()))?;
        let d = gens.first().map_or(0, |m| m.len());
        for (g, m) in all.iter().enumerate() {
            let unit = PsRep::matrix_law(scalars.clone(), d, vec![m.clone()], vec![1]).eval(&[1]);
            if !a.is_unit(&unit) {
                return Err(Error::Invalid(format!("ρ({g}) is not invertible")));
            }
        }
        let k = a.rank();
        let mut images = Vec::with_capacity(all.len() * k);
        for m in &all {
            for i in 0..k {
                images.push(m.iter().map(|row| row.iter().map(|x| a.mul(&a.basis(i), x)).collect()).collect());
            }
        }
        let mut unit = vec![0; all.len() * k];
        unit[..k].copy_from_slice(&a.one());
        Ok(PsRep { scalars, dim: d, unit, law: DetLaw::Matrix { images } })
    }

    pub fn matrix_law(scalars: Arc<FiniteRing>, dim: usize, images: Vec<RingMat>, unit: AlgElt) -> PsRep {
        PsRep { scalars, dim, unit, law: DetLaw::Matrix { images } }
    }

    /// det on M_d(A) in the layout of `FiniteAlgebra::matrix_algebra`.
    pub fn det_on_matrix_algebra(alg: &FiniteAlgebra, d: usize) -> PsRep {
        let a = alg.scalars.clone();
        let k = a.rank();
        let mut images = Vec::with_capacity(d * d * k);
        for s in 0..d * d {
            for i in 0..k {
                let mut m = vec![vec![a.zero(); d]; d];
                m[s / d][s % d] = a.basis(i);
                images.push(m);
            }
        }
        PsRep { scalars: a, dim: d, unit: alg.one(), law: DetLaw::Matrix { images } }
    }

    /// The identity law on A viewed as a rank-1 algebra over itself.
    pub fn identity_on_ring(a: Arc<FiniteRing>) -> PsRep {
        let images = (0..a.rank()).map(|i| vec![vec![a.basis(i)]]).collect();
        PsRep { unit: a.one(), scalars: a, dim: 1, law: DetLaw::Matrix { images } }
    }

    pub fn trace_det(scalars: Arc<FiniteRing>, group: Arc<FiniteGroup>, t: Vec<RingElt>, dt: Vec<RingElt>) -> PsRep {
        let k = scalars.rank();
        let mut unit = vec![0; group.order() * k];
        unit[..k].copy_from_slice(&scalars.one());
        PsRep { scalars, dim: 2, unit, law: DetLaw::TraceDet { group, t, dt } }
    }

    /// D over A[t]/(tᴺ) of Σ xⱼ tʲ (xⱼ in the carrier).
    pub fn eval_poly(&self, xs: &[AlgElt], n: usize) -> TruncPoly {
        let a = &self.scalars;
        let pr = PolyRing::new(a.clone(), n);
        let coeff_poly = |f: &dyn Fn(&AlgElt) -> RingElt| -> TruncPoly {
            let mut p = pr.zero();
            for (j, x) in xs.iter().enumerate().take(n) {
                p[j] = f(x);
            }
            p
        };
        match &self.law {
            DetLaw::Matrix { images } => {
                let d = self.dim;
                let mut m: Vec<Vec<TruncPoly>> = vec![vec![pr.zero(); d]; d];
                for (j, x) in xs.iter().enumerate().take(n) {
                    for (i, &c) in x.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        for r in 0..d {
                            for col in 0..d {
                                let v = a.scale_int(c, &images[i][r][col]);
                                m[r][col][j] = a.add(&m[r][col][j], &v);
                            }
                        }
                    }
                }
                det_poly(&pr, &m)
            }
            DetLaw::Gma(shape) => {
                let (ka, nb, nc) = (shape.a_rank, shape.b_rank, shape.c_rank);
                let ap = coeff_poly(&|x: &AlgElt| x[..ka].to_vec());
                let dp = coeff_poly(&|x: &AlgElt| x[ka + nb + nc..].to_vec());
                let mut mbc = pr.zero();
                for (j1, x) in xs.iter().enumerate().take(n) {
                    for (j2, y) in xs.iter().enumerate().take(n - j1) {
                        let mut acc = a.zero();
                        for bi in 0..nb {
                            let b = x[ka + bi];
                            if b == 0 {
                                continue;
                            }
                            for ci in 0..nc {
                                let c = y[ka + nb + ci];
                                if c != 0 {
                                    acc = a.add(&acc, &a.scale_int(b * c, &shape.pairing[bi][ci]));
                                }
                            }
                        }
                        mbc[j1 + j2] = a.add(&mbc[j1 + j2], &acc);
                    }
                }
                pr.sub(&pr.mul(&ap, &dp), &mbc)
            }
            DetLaw::TraceDet { group, t, dt } => {
                let k = a.rank();
                let ng = group.order();
                let polys: Vec<TruncPoly> = (0..ng).map(|g| coeff_poly(&|x: &AlgElt| x[g * k..(g + 1) * k].to_vec())).collect();
                let support: Vec<usize> = (0..ng).filter(|&g| !pr.is_zero(&polys[g])).collect();
                let mut acc = pr.zero();
                for (ii, &g) in support.iter().enumerate() {
                    let sq = pr.mul(&polys[g], &polys[g]);
                    acc = pr.add(&acc, &pr.scale(&dt[g], &sq));
                    for &h in &support[ii + 1..] {
                        let coef = a.sub(&a.mul(&t[g], &t[h]), &t[group.mul(g, h)]);
                        acc = pr.add(&acc, &pr.scale(&coef, &pr.mul(&polys[g], &polys[h])));
                    }
                }
                acc
            }
            DetLaw::Induced { parent, parent_add, section, scalar_proj } => {
                let lifted: Vec<AlgElt> = xs.iter().map(|x| AbGroup::apply(parent_add, section, x)).collect();
                parent.eval_poly(&lifted, n).iter().map(|c| scalar_proj.apply(c)).collect()
            }
        }
    }

    pub fn eval(&self, x: &[u64]) -> RingElt {
        self.eval_poly(&[x.to_vec()], 1).swap_remove(0)
    }

    /// Sum of two carrier elements, in the carrier's additive group.
    fn carrier_sub(&self, add: &AbGroup, x: &[u64], y: &[u64]) -> AlgElt {
        add.sub(x, y)
    }

    /// χ_D(x, t) = D_{A[t]}(t − x).
    pub fn char_poly(&self, add: &AbGroup, x: &[u64]) -> CharPoly {
        let d = self.dim;
        let a = &self.scalars;
        let minus_x = self.carrier_sub(add, &add.zero(), x);
        let c = self.eval_poly(&[minus_x, self.unit.clone()], d + 1);
        let lambdas = (0..=d)
            .map(|i| {
                let ci = &c[d - i];
                if i % 2 == 0 {
                    ci.clone()
                } else {
                    a.neg(ci)
                }
            })
            .collect();
        CharPoly { lambdas }
    }

    /// Λ₀..Λ_d of X = Σ xⱼ tʲ over A[t]/(tⁿ).
    ///
    /// Uses one variable u with s = u and t = u^{d+1}; D(s − X) has s-degree at most d,
    /// so monomials never collide and truncating at u^{(d+1)n} is truncating at tⁿ.
    pub fn char_poly_over(&self, add: &AbGroup, xs: &[AlgElt], n: usize) -> Vec<TruncPoly> {
        let d = self.dim;
        let a = &self.scalars;
        let stride = d + 1;
        let big = stride * n;
        let mut ys = vec![add.zero(); big.max(2)];
        for (j, x) in xs.iter().enumerate().take(n) {
            ys[stride * j] = add.neg(x);
        }
        ys[1] = add.add(&ys[1], &self.unit);
        let p = self.eval_poly(&ys, big);
        (0..=d)
            .map(|i| {
                let deg = d - i;
                (0..n)
                    .map(|b| {
                        let c = &p[deg + stride * b];
                        if i % 2 == 0 {
                            c.clone()
                        } else {
                            a.neg(c)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn trace(&self, add: &AbGroup, x: &[u64]) -> RingElt {
        let cp = self.char_poly(add, x);
        if self.dim == 0 {
            return self.scalars.zero();
        }
        cp.lambdas[1].clone()
    }

    /// (T(g), Dt(g)) for carrier elements ρ(g).
    pub fn tables(&self, add: &AbGroup, rho: &[AlgElt]) -> (Vec<RingElt>, Vec<RingElt>) {
        rho.iter().map(|x| (self.trace(add, x), self.eval(x))).unzip()
    }
}

/// First failing degree-2 identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawWitness {
    pub identity: String,
    pub g: usize,
    pub h: usize,
}

pub fn verify_dim2_law(a: &FiniteRing, group: &FiniteGroup, t: &[RingElt], dt: &[RingElt]) -> std::result::Result<(), LawWitness> {
    let w = |s: &str, g, h| Err(LawWitness { identity: s.to_string(), g, h });
    if t[0] != a.from_int(2) {
        return w("T(1) = 2", 0, 0);
    }
    if dt[0] != a.one() {
        return w("D(1) = 1", 0, 0);
    }
    let n = group.order();
    for g in 0..n {
        for h in 0..n {
            let gh = group.mul(g, h);
            if dt[gh] != a.mul(&dt[g], &dt[h]) {
                return w("D(gh) = D(g)D(h)", g, h);
            }
            if t[gh] != t[group.mul(h, g)] {
                return w("T(gh) = T(hg)", g, h);
            }
            let lhs = a.mul(&t[g], &t[h]);
            let rhs = a.add(&t[gh], &a.mul(&dt[h], &t[group.mul(g, group.inv(h))]));
            if lhs != rhs {
                return w("T(g)T(h) = T(gh) + D(h)T(gh⁻¹)", g, h);
            }
        }
    }
    Ok(())
}

/// {x : D(1 − xyt) = 1 for all y}, checked exhaustively.
pub fn kernel_of_pseudorep(e: &FiniteAlgebra, law: &PsRep) -> Result<Subgroup> {
    guard::check("kernel double loop", e.order().saturating_mul(e.order()))?;
    let n = law.dim + 1;
    let elems: Vec<AlgElt> = e.elements().collect();
    let one_poly = PolyRing::new(law.scalars.clone(), n).one();
    let members: Vec<AlgElt> = elems
        .par_iter()
        .filter(|x| {
            elems.iter().all(|y| {
                let xy = e.mul(x, y);
                let v = law.eval_poly(&[e.one(), e.neg(&xy)], n);
                v == one_poly
            })
        })
        .cloned()
        .collect();
    let sub = Subgroup::span(&e.group, &members);
    if sub.order() != members.len() as u128 {
        return Err(Error::KernelNotIdeal("kernel is not additively closed".into()));
    }
    if !e.is_two_sided(&sub) {
        return Err(Error::KernelNotIdeal("kernel is not stable under multiplication".into()));
    }
    Ok(sub)
}

/// Reduction A → A/m ≅ F_p as integers mod p.
#[derive(Clone, Debug)]
pub struct Residue {
    pub quotient: RingQuotient,
    unit_inv: u64,
    pub p: u64,
}

impl Residue {
    pub fn new(a: &Arc<FiniteRing>) -> Result<Residue> {
        let m = is_local(a)?.ok_or(Error::NotLocal)?;
        let q = quotient_ring(a, &m);
        if q.ring.order() != a.prime() as u128 {
            return Err(Error::Invalid("residue field must be F_p".into()));
        }
        let p = a.prime();
        let u = q.ring.one()[0] % p;
        let unit_inv = crate::exactalg::PrimePow::new(p, 1).inv(u).expect("unit of F_p");
        Ok(Residue { quotient: q, unit_inv, p })
    }

    pub fn to_fp(&self, x: &[u64]) -> u64 {
        self.quotient.proj.apply(x)[0] % self.p * self.unit_inv % self.p
    }

    /// Does `chi` reduce to the F_p-valued `residual`?
    pub fn lifts(&self, chi: &Character, residual: &Character) -> bool {
        chi.values.iter().zip(&residual.values).all(|(x, r)| self.to_fp(x) == r[0] % self.p)
    }
}

/// Every character G → A^× lifting an F_p-valued residual character.
pub fn character_lifts(a: &Arc<FiniteRing>, group: &FiniteGroup, residual: &Character) -> Result<Vec<Character>> {
    let res = Residue::new(a)?;
    Ok(Character::all(a.clone(), group)?.into_iter().filter(|c| res.lifts(c, residual)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducibleSplit {
    pub chi1: Character,
    pub chi2: Character,
    /// Number of ordered pairs realising the same (T, D).
    pub matches: usize,
}

/// Searches (χ₁, χ₂) lifting the residual pair with T = χ₁+χ₂, D = χ₁χ₂.
pub fn find_reducible_split(
    a: &Arc<FiniteRing>,
    group: &FiniteGroup,
    t: &[RingElt],
    dt: &[RingElt],
    residual: (&Character, &Character),
) -> Result<Option<ReducibleSplit>> {
    let l1 = character_lifts(a, group, residual.0)?;
    let l2 = character_lifts(a, group, residual.1)?;
    let mut found: Vec<(Character, Character)> = Vec::new();
    for c1 in &l1 {
        for c2 in &l2 {
            let ok = (0..group.order()).all(|g| {
                a.add(&c1.values[g], &c2.values[g]) == t[g] && a.mul(&c1.values[g], &c2.values[g]) == dt[g]
            });
            if ok {
                found.push((c1.clone(), c2.clone()));
            }
        }
    }
    let matches = found.len();
    Ok(found.into_iter().next().map(|(chi1, chi2)| ReducibleSplit { chi1, chi2, matches }))
}

/// One member of the census: trace and determinant tables on G.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dim2Law {
    pub t: Vec<RingElt>,
    pub dt: Vec<RingElt>,
}

fn check_p2(a: &FiniteRing) -> Result<()> {
    if a.prime() == 2 && !guard::allow_p2() {
        return Err(Error::Invalid("p = 2 census is refused without the allow-p2 override".into()));
    }
    Ok(())
}

fn residual_trace(a: &FiniteRing, res: &Residue, r1: &Character, r2: &Character) -> Vec<u64> {
    let _ = a;
    r1.values.iter().zip(&r2.values).map(|(x, y)| (x[0] + y[0]) % res.p).collect()
}

/// Dimension-2 pseudodeformations of χ̄₁ ⊕ χ̄₂ to A, by pruned search.
pub fn enumerate_psdef_dim2(a: &Arc<FiniteRing>, group: &FiniteGroup, residual: (&Character, &Character)) -> Result<Vec<Dim2Law>> {
    check_p2(a)?;
    let res = Residue::new(a)?;
    let n = group.order();
    let dets: Vec<Character> = character_lifts(a, group, &residual.0.mul(residual.1))?;
    let tbar = residual_trace(a, &res, residual.0, residual.1);
    let elems: Vec<RingElt> = a.elements().collect();
    let lifts: Vec<Vec<RingElt>> = (0..n).map(|g| elems.iter().filter(|x| res.to_fp(x) == tbar[g]).cloned().collect()).collect();
    let per_level = lifts.iter().map(|l| l.len() as u128).max().unwrap_or(1);
    guard::check("census branching", per_level.saturating_mul(dets.len() as u128))?;

    // identities to re-check once the largest index among their arguments is assigned
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut forcing: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for g in 0..n {
        for h in 0..n {
            let gh = group.mul(g, h);
            let hg = group.mul(h, g);
            let ghi = group.mul(g, group.inv(h));
            let top = *[g, h, gh, hg, ghi].iter().max().unwrap();
            checks[top].push((g, h));
            if g < gh && h < gh && ghi < gh {
                forcing[gh].push((g, h));
            }
        }
    }
    let mut out = BTreeSet::new();
    for det in &dets {
        let dt = &det.values;
        let mut t: Vec<RingElt> = vec![a.zero(); n];
        search(a, group, dt, &lifts, &checks, &forcing, 0, &mut t, &mut out);
    }
    Ok(out.into_iter().collect())
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &FiniteRing,
    group: &FiniteGroup,
    dt: &[RingElt],
    lifts: &[Vec<RingElt>],
    checks: &[Vec<(usize, usize)>],
    forcing: &[Vec<(usize, usize)>],
    x: usize,
    t: &mut Vec<RingElt>,
    out: &mut BTreeSet<Dim2Law>,
) {
    let n = group.order();
    if x == n {
        out.insert(Dim2Law { t: t.clone(), dt: dt.to_vec() });
        return;
    }
    let candidates: Vec<RingElt> = if x == 0 {
        vec![a.from_int(2)]
    } else if let Some(&(g, h)) = forcing[x].first() {
        // T(gh) = T(g)T(h) − D(h)T(gh⁻¹)
        let ghi = group.mul(g, group.inv(h));
        vec![a.sub(&a.mul(&t[g], &t[h]), &a.mul(&dt[h], &t[ghi]))]
    } else {
        lifts[x].clone()
    };
    for c in candidates {
        if !lifts[x].contains(&c) {
            continue;
        }
        t[x] = c;
        let ok = checks[x].iter().all(|&(g, h)| {
            let gh = group.mul(g, h);
            t[gh] == t[group.mul(h, g)]
                && a.mul(&t[g], &t[h]) == a.add(&t[gh], &a.mul(&dt[h], &t[group.mul(g, group.inv(h))]))
        });
        if ok {
            search(a, group, dt, lifts, checks, forcing, x + 1, t, out);
        }
    }
}

/// The same census by brute force over all lifts, for cross-checking.
pub fn enumerate_psdef_dim2_unpruned(a: &Arc<FiniteRing>, group: &FiniteGroup, residual: (&Character, &Character)) -> Result<Vec<Dim2Law>> {
    check_p2(a)?;
    let res = Residue::new(a)?;
    let n = group.order();
    let tbar = residual_trace(a, &res, residual.0, residual.1);
    let dbar = residual.0.mul(residual.1);
    let elems: Vec<RingElt> = a.elements().collect();
    let lifts: Vec<Vec<RingElt>> = (0..n).map(|g| elems.iter().filter(|x| res.to_fp(x) == tbar[g]).cloned().collect()).collect();
    let total = lifts.iter().fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128));
    let dfuncs: Vec<Vec<RingElt>> = {
        let dl: Vec<Vec<RingElt>> = (0..n).map(|g| elems.iter().filter(|x| res.to_fp(x) == dbar.values[g][0] % res.p).cloned().collect()).collect();
        let dtotal = dl.iter().fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128));
        guard::check("unpruned census", total.saturating_mul(dtotal))?;
        product(&dl)
    };
    let tfuncs = product(&lifts);
    let mut out = BTreeSet::new();
    for dt in &dfuncs {
        for t in &tfuncs {
            if verify_dim2_law(a, group, t, dt).is_ok() {
                out.insert(Dim2Law { t: t.clone(), dt: dt.clone() });
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn product(choices: &[Vec<RingElt>]) -> Vec<Vec<RingElt>> {
    let mut acc: Vec<Vec<RingElt>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(acc.len() * c.len());
        for prefix in &acc {
            for x in c {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{extend_scalars, ExtensionKind};
    use crate::grouprep::group_algebra;

    fn f(p: u64) -> Arc<FiniteRing> {
        Arc::new(FiniteRing::fp(p))
    }

    #[test]
    fn two_by_two_det_mod_four() {
        let z4 = Arc::new(FiniteRing::zmod(2, 2));
        let law = PsRep::matrix_law(z4, 2, vec![vec![vec![vec![1], vec![2]], vec![vec![3], vec![1]]]], vec![1]);
        assert_eq!(law.eval(&[1]), vec![3]);
    }

    #[test]
    fn char_poly_of_one_and_zero() {
        let a = f(3);
        let alg = FiniteAlgebra::matrix_algebra(a.clone(), 2).unwrap();
        let law = PsRep::det_on_matrix_algebra(&alg, 2);
        let one = law.char_poly(&alg.group, &alg.one()).coefficients(&a);
        assert_eq!(one, vec![vec![1], vec![1], vec![1]]);
        let zero = law.char_poly(&alg.group, &alg.zero()).coefficients(&a);
        assert_eq!(zero, vec![vec![0], vec![0], vec![1]]);
    }

    #[test]
    fn char_poly_over_dual_numbers_matches_pointwise() {
        let a = f(3);
        let alg = FiniteAlgebra::matrix_algebra(a.clone(), 2).unwrap();
        let law = PsRep::det_on_matrix_algebra(&alg, 2);
        let x = vec![1, 2, 0, 1];
        let y = vec![0, 1, 1, 2];
        let over = law.char_poly_over(&alg.group, &[x.clone(), y], 2);
        let at_zero = law.char_poly(&alg.group, &x);
        for i in 0..3 {
            assert_eq!(over[i][0], at_zero.lambdas[i]);
        }
        assert_eq!(matrix_char_poly(&a, &vec![vec![vec![1], vec![2]], vec![vec![0], vec![1]]]), at_zero.lambdas);
    }

    #[test]
    fn gma_with_zero_pairing_is_ad() {
        let a = f(3);
        let shape = GmaShape { a_rank: 1, b_rank: 1, c_rank: 1, pairing: vec![vec![vec![0]]] };
        let law = PsRep { scalars: a, dim: 2, unit: vec![1, 0, 0, 1], law: DetLaw::Gma(shape) };
        assert_eq!(law.eval(&[2, 1, 1, 2]), vec![1]);
    }

    #[test]
    fn diagonal_rep_gives_character_product() {
        let a = f(3);
        let g = FiniteGroup::cyclic(2);
        let rho = vec![vec![vec![vec![1], vec![0]], vec![vec![0], vec![2]]]];
        let law = PsRep::matrix_rep(a.clone(), &g, &rho).unwrap();
        let ga = group_algebra(a.clone(), &g).unwrap();
        let x = crate::grouprep::group_element(&a, &g, 1);
        assert_eq!(law.eval(&x), vec![2]);
        let (t, dt) = law.tables(&ga.group, &[crate::grouprep::group_element(&a, &g, 0), x]);
        assert_eq!(t, vec![vec![2], vec![0]]);
        assert!(verify_dim2_law(&a, &g, &t, &dt).is_ok());
    }

    #[test]
    fn trace_det_matches_matrix_law_on_group_algebra() {
        let a = f(3);
        let g = FiniteGroup::symmetric(3);
        let gens = vec![
            vec![vec![vec![0], vec![1]], vec![vec![1], vec![0]]],
            vec![vec![vec![0], vec![2]], vec![vec![1], vec![2]]],
        ];
        let m = PsRep::matrix_rep(a.clone(), &g, &gens).unwrap();
        let ga = group_algebra(a.clone(), &g).unwrap();
        let rho: Vec<AlgElt> = (0..6).map(|x| crate::grouprep::group_element(&a, &g, x)).collect();
        let (t, dt) = m.tables(&ga.group, &rho);
        assert!(verify_dim2_law(&a, &g, &t, &dt).is_ok());
        let td = PsRep::trace_det(a.clone(), Arc::new(g.clone()), t, dt);
        for x in ga.elements().step_by(37) {
            assert_eq!(m.eval(&x), td.eval(&x));
        }
    }

    #[test]
    fn perturbed_trace_fails_with_witness() {
        let a = f(5);
        let g = FiniteGroup::cyclic(3);
        let t = vec![vec![2], vec![2], vec![2]];
        let dt = vec![vec![1]; 3];
        assert!(verify_dim2_law(&a, &g, &t, &dt).is_ok());
        let mut bad = t.clone();
        bad[1] = vec![3];
        assert!(verify_dim2_law(&a, &g, &bad, &dt).is_err());
    }

    #[test]
    fn kernel_of_det_on_m2_is_zero() {
        let a = f(3);
        let alg = FiniteAlgebra::matrix_algebra(a, 2).unwrap();
        let law = PsRep::det_on_matrix_algebra(&alg, 2);
        assert!(kernel_of_pseudorep(&alg, &law).unwrap().is_zero());
    }

    #[test]
    fn census_over_field_is_a_point() {
        let a = f(3);
        let g = FiniteGroup::cyclic(2);
        let triv = Character::trivial(a.clone(), &g);
        let sign = Character::from_generators(a.clone(), &g, &[vec![2]]).unwrap();
        let c = enumerate_psdef_dim2(&a, &g, (&triv, &sign)).unwrap();
        assert_eq!(c.len(), 1);
        let split = find_reducible_split(&a, &g, &c[0].t, &c[0].dt, (&triv, &sign)).unwrap().unwrap();
        assert_eq!(split.chi1, triv);
        assert_eq!(split.chi2, sign);
    }

    #[test]
    fn pruned_census_matches_unpruned_z2_dual() {
        let f3 = f(3);
        let (a, _) = extend_scalars(&f3, ExtensionKind::DualNumbers).unwrap();
        let g = FiniteGroup::cyclic(2);
        let triv = Character::trivial(f3.clone(), &g);
        let sign = Character::from_generators(f3, &g, &[vec![2]]).unwrap();
        let pruned = enumerate_psdef_dim2(&a, &g, (&triv, &sign)).unwrap();
        let brute = enumerate_psdef_dim2_unpruned(&a, &g, (&triv, &sign)).unwrap();
        assert_eq!(pruned, brute);
    }
}

//! Type-(1,1) generalized matrix algebras [[A, B], [C, A]] built from (B, C, m).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chalg::{e_with_condition, ChAlgebra, CompatibleRep, verify_rep};
use crate::conditions::{has_c_artinian, ConditionSpec};
use crate::error::{Error, Result};
use crate::exactalg::abgroup::{from_columns, AbGroup, Subgroup};
use crate::exactalg::algebra::{AlgElt, FiniteAlgebra};
use crate::exactalg::linalg::Mat;
use crate::exactalg::ring::{quotient_ring, FiniteRing, Ideal, RingData, RingElt, RingHom};
use crate::exactalg::{solve_linear, validate_ring};
use crate::grouprep::{AModule, Character, FiniteGroup, GModule};
use crate::pseudorep::{close_matrix_rep, find_reducible_split, DetLaw, GmaShape, PsRep, Residue, RingMat};

/// A finite A-module without group action, in serializable form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AModuleData {
    pub exps: Vec<u32>,
    pub ring_action: Vec<Mat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmaSpec {
    pub ring: RingData,
    pub b: AModuleData,
    pub c: AModuleData,
    /// m(bᵢ ⊗ cⱼ) on additive bases.
    pub m: Vec<Vec<RingElt>>,
}

#[derive(Clone, Debug)]
pub struct GmaData {
    pub ring: Arc<FiniteRing>,
    pub b: AModule,
    pub c: AModule,
    pub m: Vec<Vec<RingElt>>,
}

fn module_from_data(ring: &Arc<FiniteRing>, d: &AModuleData) -> Result<AModule> {
    AModule::new(ring.clone(), AbGroup::new(ring.prime(), d.exps.clone()), d.ring_action.clone())
}

impl GmaData {
    pub fn new(ring: Arc<FiniteRing>, b: AModule, c: AModule, m: Vec<Vec<RingElt>>) -> Result<GmaData> {
        if b.ring != ring || c.ring != ring {
            return Err(Error::RingMismatch("B and C must be modules over the GMA's ring".into()));
        }
        if m.len() != b.rank() || m.iter().any(|row| row.len() != c.rank() || row.iter().any(|x| x.len() != ring.rank())) {
            return Err(Error::Invalid("pairing matrix has the wrong shape".into()));
        }
        let g = GmaData { ring, b, c, m };
        g.validate()?;
        Ok(g)
    }

    pub fn from_spec(spec: &GmaSpec) -> Result<GmaData> {
        let ring = Arc::new(validate_ring(spec.ring.clone())?);
        let b = module_from_data(&ring, &spec.b)?;
        let c = module_from_data(&ring, &spec.c)?;
        GmaData::new(ring, b, c, spec.m.clone())
    }

    pub fn spec(&self) -> GmaSpec {
        GmaSpec {
            ring: self.ring.data().clone(),
            b: AModuleData { exps: self.b.add.exps.clone(), ring_action: self.b.ring_action.clone() },
            c: AModuleData { exps: self.c.add.exps.clone(), ring_action: self.c.ring_action.clone() },
            m: self.m.clone(),
        }
    }

    /// B = C = A with m(b⊗c) = λ·bc.
    pub fn scaled_multiplication(ring: Arc<FiniteRing>, lambda: &[u64]) -> Result<GmaData> {
        let free = AModule::free(ring.clone(), 1);
        let k = ring.rank();
        let m = (0..k).map(|i| (0..k).map(|j| ring.mul(lambda, &ring.mul(&ring.basis(i), &ring.basis(j)))).collect()).collect();
        GmaData::new(ring, free.clone(), free, m)
    }

    /// B ≅ A^nb, C ≅ A^nc with zero pairing.
    pub fn split(ring: Arc<FiniteRing>, nb: usize, nc: usize) -> Result<GmaData> {
        let b = AModule::free(ring.clone(), nb);
        let c = AModule::free(ring.clone(), nc);
        let m = vec![vec![ring.zero(); c.rank()]; b.rank()];
        GmaData::new(ring, b, c, m)
    }

    pub fn pair(&self, b: &[u64], c: &[u64]) -> RingElt {
        let a = &self.ring;
        let mut acc = a.zero();
        for (i, &x) in b.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in c.iter().enumerate() {
                if y != 0 {
                    acc = a.add(&acc, &a.scale_int(x * y % a.char_bound().max(1), &self.m[i][j]));
                }
            }
        }
        acc
    }

    fn unit_vec(n: usize, i: usize) -> Vec<u64> {
        let mut v = vec![0; n];
        v[i] = 1;
        v
    }

    fn validate(&self) -> Result<()> {
        let a = &self.ring;
        let (nb, nc) = (self.b.rank(), self.c.rank());
        for i in 0..nb {
            for j in 0..nc {
                let v = &self.m[i][j];
                if !a.is_zero(&a.scale_int(self.b.add.order_at(i), v)) || !a.is_zero(&a.scale_int(self.c.add.order_at(j), v)) {
                    return Err(Error::OrderMismatch(i, j, 0, "pairing ignores additive orders".into()));
                }
                let (bi, cj) = (Self::unit_vec(nb, i), Self::unit_vec(nc, j));
                for s in 0..a.rank() {
                    let sc = a.basis(s);
                    let lhs = self.pair(&self.b.smul(&sc, &bi), &cj);
                    let mid = a.mul(&sc, v);
                    let rhs = self.pair(&bi, &self.c.smul(&sc, &cj));
                    if lhs != mid || rhs != mid {
                        return Err(Error::Invalid(format!("pairing is not A-bilinear at ({i}, {j}), scalar {s}")));
                    }
                }
            }
        }
        for i in 0..nb {
            for j in 0..nc {
                let mij = &self.m[i][j];
                let bi = Self::unit_vec(nb, i);
                for i2 in 0..nb {
                    let b2 = Self::unit_vec(nb, i2);
                    if self.b.smul(mij, &b2) != self.b.smul(&self.m[i2][j], &bi) {
                        return Err(Error::AssoComViolation(format!("m(b{i}⊗c{j})·b{i2} ≠ m(b{i2}⊗c{j})·b{i}")));
                    }
                }
                let cj = Self::unit_vec(nc, j);
                for j2 in 0..nc {
                    let c2 = Self::unit_vec(nc, j2);
                    if self.c.smul(mij, &c2) != self.c.smul(&self.m[i][j2], &cj) {
                        return Err(Error::AssoComViolation(format!("m(b{i}⊗c{j})·c{j2} ≠ m(b{i}⊗c{j2})·c{j}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let ka = self.ring.rank();
        (ka, ka + self.b.rank(), ka + self.b.rank() + self.c.rank())
    }

    /// Coordinates of (a, b, c, d).
    pub fn element(&self, a: &[u64], b: &[u64], c: &[u64], d: &[u64]) -> AlgElt {
        [a, b, c, d].concat()
    }

    pub fn parts<'x>(&self, x: &'x [u64]) -> (&'x [u64], &'x [u64], &'x [u64], &'x [u64]) {
        let (o1, o2, o3) = self.offsets();
        (&x[..o1], &x[o1..o2], &x[o2..o3], &x[o3..])
    }

    pub fn additive_group(&self) -> AbGroup {
        let a = self.ring.group();
        a.direct_sum(&self.b.add).direct_sum(&self.c.add).direct_sum(a)
    }

    /// 2×2 multiplication with c·b := m(b⊗c).
    pub fn mul(&self, x: &[u64], y: &[u64]) -> AlgElt {
        let r = &self.ring;
        let (a1, b1, c1, d1) = self.parts(x);
        let (a2, b2, c2, d2) = self.parts(y);
        let a = r.add(&r.mul(a1, a2), &self.pair(b1, c2));
        let b = self.b.add.add(&self.b.smul(a1, b2), &self.b.smul(d2, b1));
        let c = self.c.add.add(&self.c.smul(a2, c1), &self.c.smul(d1, c2));
        let d = r.add(&r.mul(d1, d2), &self.pair(b2, c1));
        self.element(&a, &b, &c, &d)
    }

    pub fn algebra(&self) -> Result<FiniteAlgebra> {
        let group = self.additive_group();
        let n = group.rank();
        let basis = |i: usize| Self::unit_vec(n, i);
        let consts: Vec<Vec<Vec<u64>>> = (0..n).map(|i| (0..n).map(|j| self.mul(&basis(i), &basis(j))).collect()).collect();
        let r = &self.ring;
        let action = (0..r.rank())
            .map(|s| {
                let sc = r.basis(s);
                let scalar = self.element(&sc, &vec![0; self.b.rank()], &vec![0; self.c.rank()], &sc);
                let cols: Vec<Vec<u64>> = (0..n).map(|i| self.mul(&scalar, &basis(i))).collect();
                from_columns(n, &cols)
            })
            .collect();
        let unit = self.element(&r.one(), &vec![0; self.b.rank()], &vec![0; self.c.rank()], &r.one());
        FiniteAlgebra::new(r.clone(), group, action, &consts, unit)
    }

    pub fn law(&self, alg: &FiniteAlgebra) -> PsRep {
        let shape = GmaShape { a_rank: self.ring.rank(), b_rank: self.b.rank(), c_rank: self.c.rank(), pairing: self.m.clone() };
        PsRep { scalars: self.ring.clone(), dim: 2, unit: alg.one(), law: DetLaw::Gma(shape) }
    }

    /// The ideal B·C of A.
    pub fn reducibility_ideal(&self) -> Ideal {
        let gens: Vec<RingElt> = self.m.iter().flatten().cloned().collect();
        Ideal::generated(&self.ring, &gens)
    }
}

/// A representation ρ: G → E^× into a GMA, with its residual characters over F_p.
#[derive(Clone, Debug)]
pub struct GmaRep {
    pub gma: Arc<GmaData>,
    pub group: Arc<FiniteGroup>,
    pub gen_images: Vec<AlgElt>,
    pub residual: (Character, Character),
}

impl GmaRep {
    /// Validates the diagonal reductions against the residual pair.
    pub fn new(gma: Arc<GmaData>, group: Arc<FiniteGroup>, gen_images: Vec<AlgElt>, residual: (Character, Character)) -> Result<GmaRep> {
        if residual.0 == residual.1 {
            return Err(Error::ResidualMismatch("residual characters must be distinct".into()));
        }
        if gen_images.len() != group.generators.len() {
            return Err(Error::Invalid(format!("{} generator images for {} generators", gen_images.len(), group.generators.len())));
        }
        let rep = GmaRep { gma, group, gen_images, residual };
        let imgs = rep.images();
        let add = rep.gma.additive_group();
        for (g, x) in imgs.iter().enumerate() {
            for (gi, &s) in rep.group.generators.iter().enumerate() {
                let lhs = add.reduce(&imgs[rep.group.mul(g, s)]);
                if lhs != add.reduce(&rep.gma.mul(x, &rep.gen_images[gi])) {
                    return Err(Error::Invalid("generator images violate a group relation".into()));
                }
            }
        }
        if !rep.gma.ring.is_zero_ring() {
            let res = Residue::new(&rep.gma.ring)?;
            for (g, x) in rep.images().iter().enumerate() {
                let (a, _, _, d) = rep.gma.parts(x);
                let p = res.p;
                if res.to_fp(a) != rep.residual.0.values[g][0] % p || res.to_fp(d) != rep.residual.1.values[g][0] % p {
                    return Err(Error::ResidualMismatch(format!("diagonal of ρ({g}) does not reduce to the residual pair")));
                }
            }
        }
        Ok(rep)
    }

    /// The Cayley-Hamilton algebra (E, ρ, D_E).
    pub fn algebra_rep(&self) -> Result<ChAlgebra> {
        gma_algebra(self)
    }

    /// ρ(g) on every element, computed in the GMA.
    pub fn images(&self) -> Vec<AlgElt> {
        let n = self.group.order();
        let mut out: Vec<Option<AlgElt>> = vec![None; n];
        let one = self.gma.element(&self.gma.ring.one(), &vec![0; self.gma.b.rank()], &vec![0; self.gma.c.rank()], &self.gma.ring.one());
        out[0] = Some(one);
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, &s) in self.group.generators.iter().enumerate() {
                let y = self.group.mul(x, s);
                if out[y].is_none() {
                    out[y] = Some(self.gma.mul(out[x].as_ref().unwrap(), &self.gen_images[gi]));
                    queue.push_back(y);
                }
            }
        }
        out.into_iter().map(|v| v.expect("generators generate")).collect()
    }

    /// Ideal generated by m(ρ₁₂(σ) ⊗ ρ₂₁(τ)) over σ, τ ∈ G.
    pub fn off_diagonal_ideal(&self) -> Ideal {
        let imgs = self.images();
        let mut gens = Vec::new();
        for x in &imgs {
            for y in &imgs {
                let (_, b, _, _) = self.gma.parts(x);
                let (_, _, c, _) = self.gma.parts(y);
                gens.push(self.gma.pair(b, c));
            }
        }
        Ideal::generated(&self.gma.ring, &gens)
    }

    /// (T, D) tables of ψ(ρ).
    pub fn tables(&self) -> (Vec<RingElt>, Vec<RingElt>) {
        let r = &self.gma.ring;
        self.images()
            .iter()
            .map(|x| {
                let (a, b, c, d) = self.gma.parts(x);
                (r.add(a, d), r.sub(&r.mul(a, d), &self.gma.pair(b, c)))
            })
            .unzip()
    }
}

pub fn gma_algebra(rep: &GmaRep) -> Result<ChAlgebra> {
    let alg = Arc::new(rep.gma.algebra()?);
    let law = rep.gma.law(&alg);
    ChAlgebra::new(alg, rep.group.clone(), &rep.gen_images, law)
}

/// A′ as an A-module through f.
fn target_as_module(f: &RingHom) -> Result<AModule> {
    let t = &f.target;
    let action = (0..f.source.rank()).map(|s| t.lmul_matrix(&f.apply(&f.source.basis(s)))).collect();
    AModule::new(f.source.clone(), t.group().clone(), action)
}

#[derive(Clone, Debug)]
pub struct AdaptedRep {
    /// f_B on the additive basis of B, then f_C on C.
    pub f_b: Vec<RingElt>,
    pub f_c: Vec<RingElt>,
    pub rep: CompatibleRep,
}

/// All pairs (f_B, f_C) with f_B(b)·f_C(c) = f(m(b⊗c)), as 2×2 representations.
pub fn adapted_reps(ch: &ChAlgebra, gma: &GmaData, f: &RingHom) -> Result<Vec<AdaptedRep>> {
    let t = f.target.clone();
    let target = target_as_module(f)?;
    let hb = gma.b.hom(&target).elements()?;
    let hc = gma.c.hom(&target).elements()?;
    let col = |m: &Mat, i: usize| -> RingElt { m.iter().map(|row| row[i]).collect() };
    let mut out = Vec::new();
    for mb in &hb {
        let fb: Vec<RingElt> = (0..gma.b.rank()).map(|i| col(mb, i)).collect();
        for mc in &hc {
            let fc: Vec<RingElt> = (0..gma.c.rank()).map(|j| col(mc, j)).collect();
            let ok = (0..gma.b.rank()).all(|i| (0..gma.c.rank()).all(|j| t.mul(&fb[i], &fc[j]) == f.apply(&gma.m[i][j])));
            if !ok {
                continue;
            }
            let rep = block_rep(gma, f, &fb, &fc);
            if !verify_rep(ch, &rep) {
                return Err(Error::TheoremViolation("adapted representation is not compatible".into()));
            }
            out.push(AdaptedRep { f_b: fb.clone(), f_c: fc, rep });
        }
    }
    Ok(out)
}

fn block_rep(gma: &GmaData, f: &RingHom, fb: &[RingElt], fc: &[RingElt]) -> CompatibleRep {
    let t = &f.target;
    let z = || t.zero();
    let mut images: Vec<RingMat> = Vec::new();
    let a = &gma.ring;
    for s in 0..a.rank() {
        images.push(vec![vec![f.apply(&a.basis(s)), z()], vec![z(), z()]]);
    }
    for x in fb {
        images.push(vec![vec![z(), x.clone()], vec![z(), z()]]);
    }
    for y in fc {
        images.push(vec![vec![z(), z()], vec![y.clone(), z()]]);
    }
    for s in 0..a.rank() {
        images.push(vec![vec![z(), z()], vec![z(), f.apply(&a.basis(s))]]);
    }
    CompatibleRep { scalar_map: f.clone(), images }
}

/// Output of reducible_quotient.
#[derive(Clone, Debug)]
pub struct ReducibleQuotient {
    pub j: Ideal,
    pub rep: GmaRep,
    pub chars: (Character, Character),
}

/// Base change to A/J for J the reducibility ideal; the diagonal becomes a pair of characters.
pub fn reducible_quotient(rep: &GmaRep) -> Result<ReducibleQuotient> {
    let g = &rep.gma;
    let j = g.reducibility_ideal();
    let rq = quotient_ring(&g.ring, &j);
    let (b2, pb, _) = g.b.base_change_quotient(&rq, &j)?;
    let (c2, pc, _) = g.c.base_change_quotient(&rq, &j)?;
    let m = vec![vec![rq.ring.zero(); c2.rank()]; b2.rank()];
    let new = Arc::new(GmaData::new(rq.ring.clone(), b2, c2, m)?);
    let push = |x: &AlgElt| {
        let (a, b, c, d) = g.parts(x);
        new.element(&rq.proj.apply(a), &AbGroup::apply(&new.b.add, &pb, b), &AbGroup::apply(&new.c.add, &pc, c), &rq.proj.apply(d))
    };
    let images: Vec<AlgElt> = rep.gen_images.iter().map(push).collect();
    let new_rep = GmaRep::new(new.clone(), rep.group.clone(), images, rep.residual.clone())?;
    let all = new_rep.images();
    let diag = |first: bool| -> Vec<RingElt> {
        all.iter()
            .map(|x| {
                let (a, _, _, d) = new.parts(x);
                if first { a.to_vec() } else { d.to_vec() }
            })
            .collect()
    };
    let chi1 = Character::new(rq.ring.clone(), &rep.group, diag(true))?;
    let chi2 = Character::new(rq.ring.clone(), &rep.group, diag(false))?;
    Ok(ReducibleQuotient { j, rep: new_rep, chars: (chi1, chi2) })
}

fn mat2_mul(a: &FiniteRing, x: &RingMat, y: &RingMat) -> RingMat {
    (0..2).map(|i| (0..2).map(|j| a.add(&a.mul(&x[i][0], &y[0][j]), &a.mul(&x[i][1], &y[1][j]))).collect()).collect()
}

/// Conjugates ρ so that diag(1, 0) is the idempotent of A[ρ(G)] cut out by
/// the χ̄₁-eigenvalue of some ρ(g) with χ̄₁(g) ≠ χ̄₂(g).
fn adapt(a: &Arc<FiniteRing>, group: &FiniteGroup, res: &Residue, all: &[RingMat], residual: &(Character, Character)) -> Result<Vec<RingMat>> {
    let p = res.p;
    let g = (0..group.order())
        .find(|&g| residual.0.values[g][0] % p != residual.1.values[g][0] % p)
        .ok_or_else(|| Error::ResidualMismatch("residual characters must be distinct".into()))?;
    let x = &all[g];
    let tr = a.add(&x[0][0], &x[1][1]);
    let det = a.sub(&a.mul(&x[0][0], &x[1][1]), &a.mul(&x[0][1], &x[1][0]));
    // the simple residual root lifts uniquely
    let l1 = a
        .elements()
        .find(|l| res.to_fp(l) == residual.0.values[g][0] % p && a.is_zero(&a.add(&a.sub(&a.mul(l, l), &a.mul(&tr, l)), &det)))
        .ok_or_else(|| Error::ResidualMismatch(format!("ρ({g}) has no eigenvalue lifting χ̄₁({g})")))?;
    let l2 = a.sub(&tr, &l1);
    let inv = a.inverse(&a.sub(&l1, &l2)).expect("residually distinct eigenvalues");
    let e: RingMat = (0..2)
        .map(|i| (0..2).map(|j| a.mul(&inv, &if i == j { a.sub(&x[i][j], &l2) } else { x[i][j].clone() })).collect())
        .collect();
    let f: RingMat = (0..2).map(|i| (0..2).map(|j| a.sub(&if i == j { a.one() } else { a.zero() }, &e[i][j])).collect()).collect();
    let unit_col = |m: &RingMat| (0..2).map(|j| vec![m[0][j].clone(), m[1][j].clone()]).find(|v| v.iter().any(|c| res.to_fp(c) != 0));
    let (v1, v2) = (unit_col(&e).expect("rank-one idempotent"), unit_col(&f).expect("rank-one idempotent"));
    let q_inv: RingMat = vec![vec![v1[0].clone(), v2[0].clone()], vec![v1[1].clone(), v2[1].clone()]];
    let d = a.sub(&a.mul(&v1[0], &v2[1]), &a.mul(&v2[0], &v1[1]));
    let di = a.inverse(&d).expect("complementary lines span");
    let q: RingMat = vec![vec![a.mul(&di, &v2[1]), a.mul(&di, &a.neg(&v2[0]))], vec![a.mul(&di, &a.neg(&v1[1])), a.mul(&di, &v1[0])]];
    Ok(all.iter().map(|m| mat2_mul(a, &mat2_mul(a, &q, m), &q_inv)).collect())
}

/// The GMA spanned by a 2×2 representation whose diagonal is residually
/// (χ̄₁, χ̄₂), after conjugating ρ into adapted form.
pub fn gma_from_rep(a: Arc<FiniteRing>, group: Arc<FiniteGroup>, gens: &[RingMat], residual: (Character, Character)) -> Result<GmaRep> {
    let all = close_matrix_rep(&a, &group, gens).ok_or_else(|| Error::Invalid("matrices violate a group relation".into()))?;
    let res = Residue::new(&a)?;
    for (g, m) in all.iter().enumerate() {
        if res.to_fp(&m[0][0]) != residual.0.values[g][0] % res.p || res.to_fp(&m[1][1]) != residual.1.values[g][0] % res.p {
            return Err(Error::ResidualMismatch(format!("diagonal of ρ({g}) does not reduce to the residual pair")));
        }
    }
    let all = adapt(&a, &group, &res, &all, &residual)?;
    let line = AModule::free(a.clone(), 1);
    let b_sub = line.span(&all.iter().map(|m| m[0][1].clone()).collect::<Vec<_>>());
    let c_sub = line.span(&all.iter().map(|m| m[1][0].clone()).collect::<Vec<_>>());
    let (b, ib) = line.submodule(&b_sub)?;
    let (c, ic) = line.submodule(&c_sub)?;
    let col = |m: &Mat, i: usize| -> RingElt { m.iter().map(|row| row[i]).collect() };
    let pairing = (0..b.rank()).map(|i| (0..c.rank()).map(|j| a.mul(&col(&ib, i), &col(&ic, j))).collect()).collect();
    let gma = Arc::new(GmaData::new(a.clone(), b.clone(), c.clone(), pairing)?);
    let coords = |sub: &AModule, incl: &Mat, v: &RingElt| -> RingElt {
        solve_linear(&sub.add, a.group(), incl, v).particular.expect("entry lies in its span")
    };
    let images = group
        .generators
        .iter()
        .map(|&s| {
            let m = &all[s];
            gma.element(&m[0][0], &coords(&b, &ib, &m[0][1]), &coords(&c, &ic, &m[1][0]), &m[1][1])
        })
        .collect();
    GmaRep::new(gma, group, images, residual)
}

/// Output of gma_with_condition.
#[derive(Clone, Debug)]
pub struct GmaCondition {
    pub rep: GmaRep,
    /// J with A^𝒞 = A/J.
    pub scalar_kernel: Ideal,
    pub reducible: ReducibleQuotient,
}

/// E^𝒞 with its inherited GMA structure.
pub fn gma_with_condition(rep: &GmaRep, c: &ConditionSpec) -> Result<GmaCondition> {
    let ch = gma_algebra(rep)?;
    let q = e_with_condition(&ch, c)?;
    let e2 = &q.ch.algebra;
    let a2 = q.scalars.ring.clone();
    let g = &rep.gma;
    let zb = vec![0; g.b.rank()];
    let zc = vec![0; g.c.rank()];
    let e1 = q.alg.project(&g.element(&g.ring.one(), &zb, &zc, &g.ring.zero()));
    let e2i = q.alg.project(&g.element(&g.ring.zero(), &zb, &zc, &g.ring.one()));
    let whole = Subgroup::whole(&e2.group);
    let block = |l: &AlgElt, r: &AlgElt| -> Subgroup {
        let cols: Vec<AlgElt> = (0..e2.rank()).map(|i| e2.mul(&e2.mul(l, &e2.basis(i)), r)).collect();
        whole.image(&e2.group, &from_columns(e2.rank(), &cols))
    };
    // a ↦ a·εᵢ must identify A^𝒞 with each diagonal block
    let diag_map = |eps: &AlgElt| -> Mat {
        let cols: Vec<AlgElt> = (0..a2.rank()).map(|s| e2.smul(&a2.basis(s), eps)).collect();
        from_columns(e2.rank(), &cols)
    };
    for (name, eps) in [("first", &e1), ("second", &e2i)] {
        let m = diag_map(eps);
        let img = Subgroup::whole(a2.group()).image(&e2.group, &m);
        let inj = solve_linear(a2.group(), &e2.group, &m, &e2.group.zero()).kernel.is_zero();
        if img != block(eps, eps) || !inj {
            return Err(Error::PeirceMismatch(format!("{name} diagonal block is not the scalar ring")));
        }
    }
    let module = AModule::new(a2.clone(), e2.group.clone(), e2.scalar_action.clone())?;
    let (b2, ib) = module.submodule(&block(&e1, &e2i))?;
    let (c2, ic) = module.submodule(&block(&e2i, &e1))?;
    let col = |m: &Mat, i: usize| -> AlgElt { m.iter().map(|row| row[i]).collect() };
    let m1 = diag_map(&e1);
    let scalar_of = |x: &AlgElt, m: &Mat| -> RingElt { solve_linear(a2.group(), &e2.group, m, x).particular.expect("diagonal block") };
    let pairing: Vec<Vec<RingElt>> =
        (0..b2.rank()).map(|i| (0..c2.rank()).map(|j| scalar_of(&e2.mul(&col(&ib, i), &col(&ic, j)), &m1)).collect()).collect();
    let gma = Arc::new(GmaData::new(a2.clone(), b2.clone(), c2.clone(), pairing)?);
    let m2 = diag_map(&e2i);
    let coords = |sub: &AModule, incl: &Mat, v: &AlgElt| -> Vec<u64> {
        solve_linear(&sub.add, &e2.group, incl, v).particular.expect("Peirce component")
    };
    let images: Vec<AlgElt> = q
        .ch
        .group
        .generators
        .iter()
        .map(|&s| {
            let x = &q.ch.rho[s];
            let a = scalar_of(&e2.mul(&e2.mul(&e1, x), &e1), &m1);
            let b = coords(&b2, &ib, &e2.mul(&e2.mul(&e1, x), &e2i));
            let cc = coords(&c2, &ic, &e2.mul(&e2.mul(&e2i, x), &e1));
            let d = scalar_of(&e2.mul(&e2.mul(&e2i, x), &e2i), &m2);
            gma.element(&a, &b, &cc, &d)
        })
        .collect();
    let new_rep = GmaRep::new(gma, rep.group.clone(), images, rep.residual.clone())?;
    let reducible = reducible_quotient(&new_rep)?;
    Ok(GmaCondition { rep: new_rep, scalar_kernel: q.j, reducible })
}

/// The split characters of a reducible ψ(ρ) when ψ(ρ) satisfies 𝒞.
pub fn split_reducible_with_c(rep: &GmaRep, c: &ConditionSpec) -> Result<Option<(Character, Character)>> {
    let a = &rep.gma.ring;
    let (t, dt) = rep.tables();
    let split = find_reducible_split(a, &rep.group, &t, &dt, (&rep.residual.0, &rep.residual.1))?.ok_or(Error::NotReducible)?;
    let cond = gma_with_condition(rep, c)?;
    if !cond.scalar_kernel.is_zero() {
        return Ok(None);
    }
    for chi in [&split.chi1, &split.chi2] {
        let v = Arc::new(GModule::from_character(chi, rep.group.clone())?);
        if !has_c_artinian(&v, c)? {
            return Err(Error::TheoremViolation("a split character of a 𝒞-pseudorepresentation lacks 𝒞".into()));
        }
    }
    Ok(Some((split.chi1, split.chi2)))
}

/// Matrix of the GMA → M₂(A) map when m is multiplication on B = C = A.
pub fn to_matrix_algebra(gma: &GmaData, x: &[u64]) -> RingMat {
    let (a, b, c, d) = gma.parts(x);
    vec![vec![a.to_vec(), b.to_vec()], vec![c.to_vec(), d.to_vec()]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{extend_scalars, ring_homs, ExtensionKind};

    fn f3() -> Arc<FiniteRing> {
        Arc::new(FiniteRing::fp(3))
    }

    fn z2_residuals(g: &FiniteGroup) -> (Character, Character) {
        let triv = Character::trivial(f3(), g);
        let sign = Character::from_generators(f3(), g, &[vec![2]]).unwrap();
        (triv, sign)
    }

    fn diag_rep(gma: Arc<GmaData>) -> GmaRep {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let r = gma.ring.clone();
        let x = gma.element(&r.one(), &vec![0; gma.b.rank()], &vec![0; gma.c.rank()], &r.from_int(-1));
        GmaRep::new(gma, g.clone(), vec![x], z2_residuals(&g)).unwrap()
    }

    #[test]
    fn zero_pairing_gives_ad() {
        let gma = Arc::new(GmaData::split(f3(), 1, 1).unwrap());
        let rep = diag_rep(gma.clone());
        let ch = gma_algebra(&rep).unwrap();
        assert_eq!(ch.law.eval(&[2, 1, 1, 2]), vec![1]);
        assert!(gma.reducibility_ideal().is_zero());
    }

    #[test]
    fn three_bc_over_z9() {
        let a = Arc::new(FiniteRing::zmod(3, 2));
        let gma = Arc::new(GmaData::scaled_multiplication(a.clone(), &[3]).unwrap());
        let rep = diag_rep(gma.clone());
        let ch = gma_algebra(&rep).unwrap();
        for (b, c) in [(1u64, 1u64), (2, 5), (4, 7)] {
            let x = gma.element(&[1], &[b], &[c], &[1]);
            assert_eq!(ch.law.eval(&x), a.sub(&[1], &[(3 * b * c) % 9]));
        }
        assert!(gma.reducibility_ideal().same(&Ideal::generated(&a, &[vec![3]])));
        let red = reducible_quotient(&rep).unwrap();
        assert_eq!(red.rep.gma.ring.order(), 3);
        assert_eq!(red.rep.gma.b.order(), 3);
        assert_eq!(red.rep.gma.c.order(), 3);
    }

    #[test]
    fn full_multiplication_is_m2() {
        let a = f3();
        let gma = Arc::new(GmaData::scaled_multiplication(a.clone(), &[1]).unwrap());
        let alg = gma.algebra().unwrap();
        let m2 = FiniteAlgebra::matrix_algebra(a.clone(), 2).unwrap();
        // (a, b, c, d) ↦ [[a, b], [c, d]] matches matrix_algebra's layout
        for x in alg.elements() {
            for y in [vec![1, 2, 0, 1], vec![0, 1, 1, 0], vec![2, 0, 1, 1]] {
                assert_eq!(alg.mul(&x, &y), m2.mul(&x, &y));
            }
        }
        assert!(gma.reducibility_ideal().is_whole());
        let rep = diag_rep(gma.clone());
        let law = gma_algebra(&rep).unwrap().law;
        let det = PsRep::det_on_matrix_algebra(&m2, 2);
        for x in alg.elements() {
            assert_eq!(law.eval(&x), det.eval(&x));
        }
        let _ = to_matrix_algebra(&gma, &alg.one());
    }

    #[test]
    fn adapted_reps_counts() {
        let a = f3();
        let gma = Arc::new(GmaData::scaled_multiplication(a.clone(), &[1]).unwrap());
        let ch = gma_algebra(&diag_rep(gma.clone())).unwrap();
        let id = RingHom::identity(a.clone());
        assert_eq!(adapted_reps(&ch, &gma, &id).unwrap().len(), 2);
        let zero = Arc::new(FiniteRing::zero_ring(3));
        let to_zero = RingHom::new(a.clone(), zero, vec![vec![]]).unwrap();
        assert_eq!(adapted_reps(&ch, &gma, &to_zero).unwrap().len(), 1);
        let split = Arc::new(GmaData::split(a.clone(), 1, 1).unwrap());
        let ch0 = gma_algebra(&diag_rep(split.clone())).unwrap();
        // f_B f_C = 0 over F₃: 3 + 3 − 1 pairs
        assert_eq!(adapted_reps(&ch0, &split, &id).unwrap().len(), 5);
    }

    #[test]
    fn surjective_pairing_kills_everything() {
        let a = f3();
        let gma = Arc::new(GmaData::scaled_multiplication(a, &[1]).unwrap());
        let g = Arc::new(FiniteGroup::cyclic(2));
        let rep = GmaRep::new(gma.clone(), g.clone(), vec![gma.element(&[1], &[0], &[0], &[2])], z2_residuals(&g)).unwrap();
        let red = reducible_quotient(&rep).unwrap();
        assert!(red.rep.gma.ring.is_zero_ring());
    }

    #[test]
    fn from_diagonal_and_triangular_reps() {
        let a = f3();
        let g = Arc::new(FiniteGroup::cyclic(2));
        let res = z2_residuals(&g);
        let diag = gma_from_rep(a.clone(), g.clone(), &[vec![vec![vec![1], vec![0]], vec![vec![0], vec![2]]]], res.clone()).unwrap();
        assert_eq!(diag.gma.b.order(), 1);
        assert_eq!(diag.gma.c.order(), 1);
        let tri = gma_from_rep(a.clone(), g.clone(), &[vec![vec![vec![1], vec![1]], vec![vec![0], vec![2]]]], res.clone()).unwrap();
        // H¹(C₂, F₃) = 0, so the triangular rep is conjugate to the diagonal one
        assert_eq!(tri.gma.b.order(), 1);
        assert_eq!(tri.gma.c.order(), 1);
        assert!(tri.gma.reducibility_ideal().is_zero());
        let swapped = gma_from_rep(a, g, &[vec![vec![vec![2], vec![0]], vec![vec![0], vec![1]]]], res);
        assert!(matches!(swapped, Err(Error::ResidualMismatch(_))));
    }

    #[test]
    fn reducible_iff_off_diagonal_ideal_vanishes() {
        let f = f3();
        let (a, _) = extend_scalars(&f, ExtensionKind::DualNumbers).unwrap();
        let g = Arc::new(FiniteGroup::cyclic(2));
        let res = z2_residuals(&g);
        let gma = Arc::new(GmaData::scaled_multiplication(a.clone(), &[0, 1]).unwrap());
        for (b, c) in [(vec![0, 0], vec![0, 0]), (vec![1, 0], vec![1, 0]), (vec![1, 0], vec![0, 0])] {
            let x = gma.element(&a.one(), &b, &c, &a.from_int(-1));
            let Ok(rep) = GmaRep::new(gma.clone(), g.clone(), vec![x], res.clone()) else { continue };
            let (t, dt) = rep.tables();
            let split = find_reducible_split(&a, &g, &t, &dt, (&res.0, &res.1)).unwrap();
            assert_eq!(split.is_some(), rep.off_diagonal_ideal().is_zero());
        }
        let _ = ring_homs(&a, &f).unwrap();
    }

    /// Nonsplit triangular S₃ rep over F₃; ρ(F₃[S₃]) is the whole triangular algebra.
    fn s3_triangular() -> GmaRep {
        let a = f3();
        let g = Arc::new(FiniteGroup::symmetric(3));
        let triv = Character::trivial(a.clone(), &g);
        let sign = Character::from_generators(a.clone(), &g, &[vec![2], vec![1]]).unwrap();
        let e = |v: u64| vec![v];
        let gens = vec![vec![vec![e(1), e(0)], vec![e(0), e(2)]], vec![vec![e(1), e(1)], vec![e(0), e(1)]]];
        gma_from_rep(a, g, &gens, (triv, sign)).unwrap()
    }

    #[test]
    fn condition_on_triangular_gma() {
        let rep = s3_triangular();
        assert_eq!(rep.gma.b.order(), 3);
        let same = gma_with_condition(&rep, &ConditionSpec::Everything).unwrap();
        assert_eq!(same.rep.gma.b.order(), 3);
        assert!(same.scalar_kernel.is_zero());
        let coinv = gma_with_condition(&rep, &ConditionSpec::trivial_on("A")).unwrap();
        assert!(coinv.scalar_kernel.is_zero());
        assert_eq!(coinv.rep.gma.b.order(), 1);
        assert_eq!(coinv.rep.gma.c.order(), 1);
        let dead = gma_with_condition(&rep, &ConditionSpec::trivial_on("G")).unwrap();
        assert!(dead.rep.gma.ring.is_zero_ring());
        assert_eq!(split_reducible_with_c(&rep, &ConditionSpec::trivial_on("G")).unwrap(), None);
        let pair = split_reducible_with_c(&rep, &ConditionSpec::trivial_on("A")).unwrap().unwrap();
        assert!(pair.0.is_trivial_on(rep.group.subgroup("A").unwrap()));
    }
}

//! Finite Cayley-Hamilton representations (E, ρ, D) and their quotients.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::conditions::{has_c_artinian, ideal_times_module, max_quotient_with_c, ConditionSpec};
use crate::error::{Error, Result};
use crate::exactalg::abgroup::{from_columns, AbGroup, Subgroup};
use crate::exactalg::algebra::{AlgElt, AlgebraQuotient, FiniteAlgebra};
use crate::exactalg::ring::{is_local, FiniteRing, Ideal, RingElt, RingHom, RingQuotient};
use crate::exactalg::{solve_linear, ExtensionKind};
use crate::grouprep::{AModule, FiniteGroup, GModule};
use crate::guard;
use crate::pseudorep::{matrix_char_poly, ring_mat_identity, ring_mat_mul, DetLaw, PsRep, RingMat};

/// Work budget for exhaustive Cayley-Hamilton sweeps.
pub const EXHAUSTIVE_CH: u128 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    /// Vanishing on basis elements and on their pairwise polarizations.
    Polarized,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChCheck {
    pub carrier: String,
    pub mode: CheckMode,
}

#[derive(Clone, Debug)]
pub struct ChAlgebra {
    pub algebra: Arc<FiniteAlgebra>,
    pub group: Arc<FiniteGroup>,
    /// ρ(g) for every group element.
    pub rho: Vec<AlgElt>,
    pub law: PsRep,
}

/// Polynomials with coefficients in E, truncated at tⁿ.
fn epoly_mul(e: &FiniteAlgebra, x: &[AlgElt], y: &[AlgElt], n: usize) -> Vec<AlgElt> {
    let mut out = vec![e.zero(); n];
    for (i, a) in x.iter().enumerate() {
        if e.is_zero(a) {
            continue;
        }
        for (j, b) in y.iter().enumerate().take(n - i) {
            out[i + j] = e.add(&out[i + j], &e.mul(a, b));
        }
    }
    out
}

fn scalar_poly_times(e: &FiniteAlgebra, lam: &[RingElt], x: &[AlgElt], n: usize) -> Vec<AlgElt> {
    let mut out = vec![e.zero(); n];
    for (i, a) in lam.iter().enumerate() {
        for (j, b) in x.iter().enumerate().take(n - i) {
            out[i + j] = e.add(&out[i + j], &e.smul(a, b));
        }
    }
    out
}

impl ChAlgebra {
    /// Validates ρ, D(1) = 1, multiplicativity and the Cayley-Hamilton identity.
    pub fn new(algebra: Arc<FiniteAlgebra>, group: Arc<FiniteGroup>, gen_images: &[AlgElt], law: PsRep) -> Result<ChAlgebra> {
        if *law.scalars != *algebra.scalars {
            return Err(Error::RingMismatch("law and algebra have different scalars".into()));
        }
        let rho = close_rho(&algebra, &group, gen_images)?;
        for (g, x) in rho.iter().enumerate() {
            if !algebra.is_unit(x) {
                return Err(Error::Invalid(format!("ρ({g}) is not a unit")));
            }
        }
        let ch = ChAlgebra { algebra, group, rho, law };
        ch.check_multiplicative()?;
        ch.verify_cayley_hamilton()?;
        Ok(ch)
    }

    /// E = M_d(A), D = det, ρ given by matrices on generators.
    pub fn matrix(a: Arc<FiniteRing>, group: Arc<FiniteGroup>, gens: &[RingMat]) -> Result<ChAlgebra> {
        let d = gens.first().map_or(1, |m| m.len());
        let alg = Arc::new(FiniteAlgebra::matrix_algebra(a.clone(), d)?);
        let law = PsRep::det_on_matrix_algebra(&alg, d);
        let images: Vec<AlgElt> = gens.iter().map(|m| matrix_to_element(&a, m)).collect();
        ChAlgebra::new(alg, group, &images, law)
    }

    pub fn scalars(&self) -> &Arc<FiniteRing> {
        &self.algebra.scalars
    }

    pub fn dim(&self) -> usize {
        self.law.dim
    }

    fn check_multiplicative(&self) -> Result<()> {
        let e = &self.algebra;
        let a = self.scalars();
        if self.law.eval(&e.one()) != a.one() && !a.is_zero_ring() {
            return Err(Error::Invalid("D(1) ≠ 1".into()));
        }
        let sample: Vec<AlgElt> = if e.order().saturating_mul(e.order()) <= EXHAUSTIVE_CH {
            e.elements().collect()
        } else {
            let mut s: Vec<AlgElt> = (0..e.rank()).map(|i| e.basis(i)).collect();
            s.extend(self.rho.iter().cloned());
            s
        };
        for x in &sample {
            let dx = self.law.eval(x);
            for y in &sample {
                if self.law.eval(&e.mul(x, y)) != a.mul(&dx, &self.law.eval(y)) {
                    return Err(Error::Invalid(format!("D not multiplicative at {x:?}, {y:?}")));
                }
            }
        }
        Ok(())
    }

    /// χ(X)(X) for X = Σ xⱼ tʲ in E⊗A[t]/(tⁿ).
    pub fn ch_residual(&self, xs: &[AlgElt], n: usize) -> Vec<AlgElt> {
        let e = &self.algebra;
        let d = self.law.dim;
        let lambdas = self.law.char_poly_over(&e.group, xs, n);
        let mut x = xs.to_vec();
        x.resize(n, e.zero());
        let mut powers = vec![{
            let mut one = vec![e.zero(); n];
            one[0] = e.one();
            one
        }];
        for k in 1..=d {
            powers.push(epoly_mul(e, &powers[k - 1], &x, n));
        }
        let mut acc = vec![e.zero(); n];
        for (i, lam) in lambdas.iter().enumerate() {
            let term = scalar_poly_times(e, lam, &powers[d - i], n);
            for j in 0..n {
                acc[j] = if i % 2 == 0 { e.add(&acc[j], &term[j]) } else { e.sub(&acc[j], &term[j]) };
            }
        }
        acc
    }

    fn residual_vanishes(&self, xs: &[AlgElt], n: usize) -> bool {
        self.ch_residual(xs, n).iter().all(|c| self.algebra.is_zero(c))
    }

    /// Cayley-Hamilton on E, E⊗(dual numbers) and E⊗A[t]/(t³).
    pub fn verify_cayley_hamilton(&self) -> Result<Vec<ChCheck>> {
        let e = &self.algebra;
        let mut report = Vec::new();
        for (label, n) in [("E".to_string(), 1usize), (ExtensionKind::DualNumbers.label(), 2), (ExtensionKind::TruncatedPoly(3).label(), 3)] {
            let work = guard::pow_sat(e.order(), n as u64);
            let mode = if work <= EXHAUSTIVE_CH {
                self.ch_exhaustive(n)?;
                CheckMode::Exhaustive
            } else if self.law.dim <= 2 {
                self.ch_polarized(n)?;
                CheckMode::Polarized
            } else {
                return Err(Error::SizeLimitExceeded { what: format!("Cayley-Hamilton check on {label}"), order: work, limit: EXHAUSTIVE_CH as u64 });
            };
            report.push(ChCheck { carrier: label, mode });
        }
        Ok(report)
    }

    fn ch_exhaustive(&self, n: usize) -> Result<()> {
        let e = &self.algebra;
        let elems: Vec<AlgElt> = e.elements().collect();
        let mut tuples: Vec<Vec<AlgElt>> = elems.iter().map(|x| vec![x.clone()]).collect();
        for _ in 1..n {
            tuples = tuples.iter().flat_map(|t| elems.iter().map(move |x| [t.clone(), vec![x.clone()]].concat())).collect();
        }
        match tuples.par_iter().find_first(|xs| !self.residual_vanishes(xs, n)) {
            Some(xs) => Err(Error::Invalid(format!("Cayley-Hamilton fails at {xs:?}"))),
            None => Ok(()),
        }
    }

    /// Degree ≤ 2 residuals vanish everywhere iff they vanish on basis elements eᵢtʲ
    /// and their pairwise polarizations.
    fn ch_polarized(&self, n: usize) -> Result<()> {
        let e = &self.algebra;
        let mono = |i: usize, j: usize| {
            let mut v = vec![e.zero(); n];
            v[j] = e.basis(i);
            v
        };
        let basis: Vec<Vec<AlgElt>> = (0..e.rank()).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| mono(i, j)).collect();
        let q: Vec<Vec<AlgElt>> = basis.par_iter().map(|x| self.ch_residual(x, n)).collect();
        if let Some(k) = q.iter().position(|r| r.iter().any(|c| !e.is_zero(c))) {
            return Err(Error::Invalid(format!("Cayley-Hamilton fails at basis element {k}")));
        }
        let pairs: Vec<(usize, usize)> = (0..basis.len()).flat_map(|a| (a + 1..basis.len()).map(move |b| (a, b))).collect();
        let bad = pairs.par_iter().find_first(|&&(a, b)| {
            let s: Vec<AlgElt> = basis[a].iter().zip(&basis[b]).map(|(x, y)| e.add(x, y)).collect();
            !self.residual_vanishes(&s, n)
        });
        match bad {
            Some((a, b)) => Err(Error::Invalid(format!("Cayley-Hamilton fails on basis pair ({a}, {b})"))),
            None => Ok(()),
        }
    }

    /// E as an A[G]-module by left multiplication through ρ.
    pub fn as_module(&self) -> Result<Arc<GModule>> {
        let e = &self.algebra;
        let base = AModule::new(e.scalars.clone(), e.group.clone(), e.scalar_action.clone())?;
        let gens = self.group.generators.iter().map(|&s| e.lmul_matrix(&self.rho[s])).collect();
        Ok(Arc::new(GModule::new(base, self.group.clone(), gens)?))
    }

    /// (T(g), Dt(g)) for all group elements.
    pub fn tables(&self) -> (Vec<RingElt>, Vec<RingElt>) {
        self.law.tables(&self.algebra.group, &self.rho)
    }
}

fn close_rho(e: &FiniteAlgebra, group: &FiniteGroup, gens: &[AlgElt]) -> Result<Vec<AlgElt>> {
    if gens.len() != group.generators.len() {
        return Err(Error::Invalid("one image per group generator required".into()));
    }
    let n = group.order();
    let mut img: Vec<Option<AlgElt>> = vec![None; n];
    img[0] = Some(e.one());
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (gi, &s) in group.generators.iter().enumerate() {
            let y = group.mul(x, s);
            let v = e.mul(img[x].as_ref().unwrap(), &gens[gi]);
            match &img[y] {
                None => {
                    img[y] = Some(v);
                    queue.push_back(y);
                }
                Some(old) if *old != v => return Err(Error::Invalid(format!("ρ violates a relation at element {y}"))),
                _ => {}
            }
        }
    }
    Ok(img.into_iter().map(|v| v.expect("generators generate")).collect())
}

/// Coordinates of a d×d matrix in the layout of `FiniteAlgebra::matrix_algebra`.
pub fn matrix_to_element(a: &FiniteRing, m: &RingMat) -> AlgElt {
    debug_assert!(m.iter().all(|row| row.iter().all(|x| x.len() == a.rank())));
    m.iter().flat_map(|row| row.iter().flat_map(|x| x.iter().copied())).collect()
}

/// Output of ch_quotient.
#[derive(Clone, Debug)]
pub struct ChQuotient {
    pub ch: ChAlgebra,
    pub j: Ideal,
    pub scalars: RingQuotient,
    pub alg: AlgebraQuotient,
    /// I + JE inside E.
    pub kernel: Subgroup,
}

/// Ideal of A generated by the non-constant coefficients of D(1 − xt) over all x ∈ I.
pub fn coefficient_ideal(ch: &ChAlgebra, ideal: &Subgroup) -> Result<Ideal> {
    guard::check("coefficient sweep", ideal.order())?;
    Ok(coefficient_ideal_from(ch, &ideal.elements()))
}

/// The same ideal computed from generators only; a lower bound in general.
pub fn coefficient_ideal_lower_bound(ch: &ChAlgebra, ideal: &Subgroup) -> Ideal {
    coefficient_ideal_from(ch, &ideal.generators())
}

fn coefficient_ideal_from(ch: &ChAlgebra, xs: &[AlgElt]) -> Ideal {
    let e = &ch.algebra;
    let a = ch.scalars();
    let d = ch.law.dim;
    let coeffs: Vec<RingElt> = xs
        .par_iter()
        .flat_map_iter(|x| {
            let p = ch.law.eval_poly(&[e.one(), e.neg(x)], d + 1);
            p.into_iter().skip(1).filter(|c| !a.is_zero(c))
        })
        .collect();
    let span = Subgroup::span(a.group(), &coeffs);
    Ideal::generated(a, &span.generators())
}

/// E/(I, J) over A/J with the induced law.
pub fn ch_quotient(ch: &ChAlgebra, ideal: &Subgroup) -> Result<ChQuotient> {
    let e = &ch.algebra;
    if !e.is_two_sided(ideal) {
        return Err(Error::KernelNotTwoSided("ch_quotient needs a two-sided ideal".into()));
    }
    let j = coefficient_ideal(ch, ideal)?;
    let kernel = ideal.sum(&e.scalar_ideal_span(&j));
    let (alg, scalars) = e.quotient_over(&kernel, &j)?;
    let law = PsRep {
        scalars: scalars.ring.clone(),
        dim: ch.law.dim,
        unit: alg.alg.one(),
        law: DetLaw::Induced { parent: Box::new(ch.law.clone()), parent_add: e.group.clone(), section: alg.section.clone(), scalar_proj: scalars.proj.clone() },
    };
    check_well_defined(ch, &alg, &scalars, &kernel)?;
    let new_alg = Arc::new(alg.alg.clone());
    let images: Vec<AlgElt> = ch.group.generators.iter().map(|&s| alg.project(&ch.rho[s])).collect();
    let quotient = ChAlgebra::new(new_alg, ch.group.clone(), &images, law)?;
    Ok(ChQuotient { ch: quotient, j, scalars, alg, kernel })
}

fn check_well_defined(ch: &ChAlgebra, alg: &AlgebraQuotient, scalars: &RingQuotient, kernel: &Subgroup) -> Result<()> {
    let e = &ch.algebra;
    let q = &alg.alg;
    let mut probes: Vec<AlgElt> = vec![q.zero(), q.one()];
    for i in 0..q.rank() {
        probes.push(q.basis(i));
        for j in i + 1..q.rank() {
            probes.push(q.add(&q.basis(i), &q.basis(j)));
        }
    }
    let shifts = if kernel.order() <= 729 { kernel.elements() } else { kernel.generators() };
    let n = ch.law.dim + 1;
    for y in &probes {
        let x = alg.lift(e, y);
        let base: Vec<RingElt> = ch.law.eval_poly(&[e.one(), x.clone()], n).iter().map(|c| scalars.proj.apply(c)).collect();
        for k in &shifts {
            let moved = e.add(&x, k);
            let v: Vec<RingElt> = ch.law.eval_poly(&[e.one(), moved], n).iter().map(|c| scalars.proj.apply(c)).collect();
            if v != base {
                return Err(Error::InducedDNotWellDefined(format!("lifts of {y:?} disagree")));
            }
        }
    }
    Ok(())
}

/// An algebra map E → M_d(B) over a scalar map A → B with det∘φ = D⊗B.
#[derive(Clone, Debug)]
pub struct CompatibleRep {
    pub scalar_map: RingHom,
    /// φ(eᵢ) for each additive basis element of E.
    pub images: Vec<RingMat>,
}

impl CompatibleRep {
    pub fn apply(&self, x: &[u64]) -> RingMat {
        let b = &self.scalar_map.target;
        let d = self.images.first().map_or(0, |m| m.len());
        let mut out = vec![vec![b.zero(); d]; d];
        for (i, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for r in 0..d {
                for col in 0..d {
                    out[r][col] = b.add(&out[r][col], &b.scale_int(c, &self.images[i][r][col]));
                }
            }
        }
        out
    }

    pub fn kills(&self, x: &[u64]) -> bool {
        let b = &self.scalar_map.target;
        self.apply(x).iter().all(|row| row.iter().all(|v| b.is_zero(v)))
    }

    pub fn kills_subgroup(&self, s: &Subgroup) -> bool {
        s.generators().iter().all(|x| self.kills(x))
    }

    /// The module B^d with G acting through φ∘ρ.
    pub fn module(&self, ch: &ChAlgebra) -> Result<GModule> {
        let mats: Vec<RingMat> = ch.group.generators.iter().map(|&s| self.apply(&ch.rho[s])).collect();
        GModule::from_matrix_rep(self.scalar_map.target.clone(), ch.group.clone(), &mats)
    }
}

fn mat_scale(b: &FiniteRing, a: &[u64], m: &RingMat) -> RingMat {
    m.iter().map(|row| row.iter().map(|x| b.mul(a, x)).collect()).collect()
}

fn mat_add(b: &FiniteRing, x: &RingMat, y: &RingMat) -> RingMat {
    x.iter().zip(y).map(|(r, s)| r.iter().zip(s).map(|(u, v)| b.add(u, v)).collect()).collect()
}

/// How E is rebuilt from a generating set: words in the generators and
/// integer coefficients expressing each basis element through a_s·word.
struct Generation {
    gens: Vec<AlgElt>,
    words: Vec<Vec<usize>>,
    /// coeffs[i] = [(word, scalar basis index, integer)].
    coeffs: Vec<Vec<(usize, usize, u64)>>,
}

fn subalgebra_span(e: &FiniteAlgebra, gens: &[AlgElt]) -> (Subgroup, Vec<Vec<usize>>, Vec<AlgElt>) {
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut values: Vec<AlgElt> = vec![e.one()];
    let mut span = e.a_span(&values);
    let mut frontier = 0;
    while frontier < words.len() {
        let (w, v) = (words[frontier].clone(), values[frontier].clone());
        frontier += 1;
        for (gi, g) in gens.iter().enumerate() {
            let nv = e.mul(&v, g);
            if !span.contains(&nv) {
                span = span.sum(&e.a_span(&[nv.clone()]));
                let mut nw = w.clone();
                nw.push(gi);
                words.push(nw);
                values.push(nv);
            }
        }
    }
    (span, words, values)
}

fn generation(e: &FiniteAlgebra) -> Generation {
    let whole = Subgroup::whole(&e.group);
    let mut gens: Vec<AlgElt> = Vec::new();
    for i in 0..e.rank() {
        if subalgebra_span(e, &gens).0 == whole {
            break;
        }
        let b = e.basis(i);
        if !subalgebra_span(e, &gens).0.contains(&b) {
            gens.push(b);
        }
    }
    let mut k = gens.len();
    while k > 0 {
        k -= 1;
        let mut fewer = gens.clone();
        fewer.remove(k);
        if subalgebra_span(e, &fewer).0 == whole {
            gens = fewer;
        }
    }
    let (_, words, values) = subalgebra_span(e, &gens);
    let ks = e.scalars.rank();
    let cols: Vec<AlgElt> = values.iter().flat_map(|v| (0..ks).map(move |s| (v, s))).map(|(v, s)| e.smul(&e.scalars.basis(s), v)).collect();
    let src = AbGroup::new(e.group.p, vec![e.group.top_exp(); cols.len()]);
    let m = from_columns(e.rank(), &cols);
    let coeffs = (0..e.rank())
        .map(|i| {
            let sol = solve_linear(&src, &e.group, &m, &e.basis(i));
            let c = sol.particular.expect("words span E");
            c.iter().enumerate().filter(|(_, &v)| v != 0).map(|(idx, &v)| (idx / ks, idx % ks, v)).collect()
        })
        .collect();
    Generation { gens, words, coeffs }
}

/// All matrices over B with the given Λ₀..Λ_d.
fn matrices_with_char_poly(b: &Arc<FiniteRing>, d: usize, lambdas: &[RingElt]) -> Result<Vec<RingMat>> {
    let elems: Vec<RingElt> = b.elements().collect();
    let nb = elems.len() as u128;
    if d == 1 {
        return Ok(vec![vec![vec![lambdas[1].clone()]]]);
    }
    if d == 2 {
        guard::check("candidate matrices", nb * nb * nb)?;
        let mut out = Vec::new();
        for x in &elems {
            let w = b.sub(&lambdas[1], x);
            let xw = b.mul(x, &w);
            for y in &elems {
                for z in &elems {
                    if b.sub(&xw, &b.mul(y, z)) == lambdas[2] {
                        out.push(vec![vec![x.clone(), y.clone()], vec![z.clone(), w.clone()]]);
                    }
                }
            }
        }
        return Ok(out);
    }
    guard::check("candidate matrices", guard::pow_sat(nb, (d * d) as u64))?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; d * d];
    loop {
        let m: RingMat = (0..d).map(|r| (0..d).map(|c| elems[idx[r * d + c]].clone()).collect()).collect();
        if matrix_char_poly(b, &m) == lambdas {
            out.push(m);
        }
        let mut pos = d * d;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Every compatible representation of (E, D) over the scalar map f: A → B.
pub fn compatible_reps(ch: &ChAlgebra, f: &RingHom) -> Result<Vec<CompatibleRep>> {
    let e = &ch.algebra;
    let b = &f.target;
    let d = ch.law.dim;
    if *f.source != **ch.scalars() {
        return Err(Error::RingMismatch("scalar map must start at the algebra's scalars".into()));
    }
    let gen = generation(e);
    let target_cp = |x: &AlgElt| -> Vec<RingElt> { ch.law.char_poly(&e.group, x).lambdas.iter().map(|l| f.apply(l)).collect() };
    let candidates: Vec<Vec<RingMat>> = gen.gens.iter().map(|g| matrices_with_char_poly(b, d, &target_cp(g))).collect::<Result<_>>()?;
    let ng = gen.gens.len();
    // char polys of gᵢgⱼ and gᵢ + gⱼ, for pruning
    let mut pair_cp = vec![vec![None; ng]; ng];
    for i in 0..ng {
        for j in 0..ng {
            let prod = target_cp(&e.mul(&gen.gens[i], &gen.gens[j]));
            let sum = target_cp(&e.add(&gen.gens[i], &gen.gens[j]));
            pair_cp[i][j] = Some((prod, sum));
        }
    }
    let first: Vec<usize> = (0..candidates.first().map_or(1, |c| c.len())).collect();
    let mut found: Vec<CompatibleRep> = first
        .par_iter()
        .flat_map_iter(|&c0| {
            let mut out = Vec::new();
            let mut chosen: Vec<RingMat> = Vec::new();
            if ng > 0 {
                chosen.push(candidates[0][c0].clone());
            }
            extend(ch, f, &gen, &candidates, &pair_cp, &mut chosen, &mut out);
            out
        })
        .collect();
    found.sort_by(|x, y| x.images.cmp(&y.images));
    found.dedup_by(|x, y| x.images == y.images);
    Ok(found)
}

type PairCp = Vec<Vec<Option<(Vec<RingElt>, Vec<RingElt>)>>>;

fn extend(ch: &ChAlgebra, f: &RingHom, gen: &Generation, cands: &[Vec<RingMat>], pair_cp: &PairCp, chosen: &mut Vec<RingMat>, out: &mut Vec<CompatibleRep>) {
    let b = &f.target;
    let k = chosen.len();
    if k == gen.gens.len() {
        if let Some(rep) = assemble(ch, f, gen, chosen) {
            out.push(rep);
        }
        return;
    }
    for m in &cands[k] {
        let ok = (0..=k).all(|i| {
            let mi = if i == k { m } else { &chosen[i] };
            let (p1, s1) = pair_cp[i][k].as_ref().unwrap();
            let (p2, _) = pair_cp[k][i].as_ref().unwrap();
            matrix_char_poly(b, &ring_mat_mul(b, mi, m)) == *p1
                && matrix_char_poly(b, &ring_mat_mul(b, m, mi)) == *p2
                && matrix_char_poly(b, &mat_add(b, mi, m)) == *s1
        });
        if ok {
            chosen.push(m.clone());
            extend(ch, f, gen, cands, pair_cp, chosen, out);
            chosen.pop();
        }
    }
}

fn assemble(ch: &ChAlgebra, f: &RingHom, gen: &Generation, chosen: &[RingMat]) -> Option<CompatibleRep> {
    let a = ch.scalars();
    let b = &f.target;
    let d = ch.law.dim;
    let word_images: Vec<RingMat> = gen.words.iter().map(|w| w.iter().fold(ring_mat_identity(b, d), |acc, &g| ring_mat_mul(b, &acc, &chosen[g]))).collect();
    let images: Vec<RingMat> = gen
        .coeffs
        .iter()
        .map(|terms| {
            terms.iter().fold(vec![vec![b.zero(); d]; d], |acc, &(w, s, c)| {
                let fs = b.scale_int(c, &f.apply(&a.basis(s)));
                mat_add(b, &acc, &mat_scale(b, &fs, &word_images[w]))
            })
        })
        .collect();
    let rep = CompatibleRep { scalar_map: f.clone(), images };
    verify_rep(ch, &rep).then_some(rep)
}

/// Full check that `rep` is an A-algebra map compatible with D.
pub fn verify_rep(ch: &ChAlgebra, rep: &CompatibleRep) -> bool {
    let e = &ch.algebra;
    let a = ch.scalars();
    let f = &rep.scalar_map;
    let b = &f.target;
    let d = ch.law.dim;
    let zero = |m: &RingMat| m.iter().all(|r| r.iter().all(|x| b.is_zero(x)));
    let eq = |x: &RingMat, y: &RingMat| x == y;
    for (i, img) in rep.images.iter().enumerate() {
        let o = e.group.order_at(i);
        if !zero(&img.iter().map(|r| r.iter().map(|x| b.scale_int(o, x)).collect()).collect()) {
            return false;
        }
        for s in 0..a.rank() {
            let lhs = rep.apply(&e.smul(&a.basis(s), &e.basis(i)));
            if !eq(&lhs, &mat_scale(b, &f.apply(&a.basis(s)), img)) {
                return false;
            }
        }
        for j in 0..e.rank() {
            if !eq(&rep.apply(&e.mul(&e.basis(i), &e.basis(j))), &ring_mat_mul(b, img, &rep.images[j])) {
                return false;
            }
        }
    }
    if rep.apply(&e.one()) != ring_mat_identity(b, d) {
        return false;
    }
    let det_ok = |x: &AlgElt| matrix_char_poly(b, &rep.apply(x))[d] == f.apply(&ch.law.eval(x));
    let mut probes: Vec<AlgElt> = Vec::new();
    if e.order() <= 5000 {
        probes.extend(e.elements());
    } else {
        for i in 0..e.rank() {
            probes.push(e.basis(i));
            for j in i + 1..e.rank() {
                probes.push(e.add(&e.basis(i), &e.basis(j)));
            }
        }
    }
    if !probes.iter().all(det_ok) {
        return false;
    }
    if d > 2 {
        // higher degree: compare D(x + yε) on basis pairs over the dual numbers
        for i in 0..e.rank() {
            for j in 0..e.rank() {
                let v = ch.law.eval_poly(&[e.basis(i), e.basis(j)], 2);
                let m0 = rep.apply(&e.basis(i));
                let m1 = rep.apply(&e.basis(j));
                let dual = dual_det(b, &m0, &m1);
                if dual != [f.apply(&v[0]), f.apply(&v[1])] {
                    return false;
                }
            }
        }
    }
    true
}

/// det(M₀ + M₁ε) as (constant, ε-coefficient).
fn dual_det(b: &Arc<FiniteRing>, m0: &RingMat, m1: &RingMat) -> [RingElt; 2] {
    let law = PsRep::matrix_law(b.clone(), m0.len(), vec![m0.clone(), m1.clone()], vec![1, 0]);
    let p = law.eval_poly(&[vec![1, 0], vec![0, 1]], 2);
    [p[0].clone(), p[1].clone()]
}

/// φ kills I iff φ factors through the Cayley-Hamilton quotient; disagreement is a `TheoremViolation`.
pub fn factors_through(ch: &ChAlgebra, q: &ChQuotient, rep: &CompatibleRep, ideal: &Subgroup) -> Result<bool> {
    let kills = rep.kills_subgroup(ideal);
    let factors = factors_via_quotient(ch, q, rep);
    if kills != factors {
        return Err(Error::TheoremViolation(format!("kills I = {kills} but factors = {factors}")));
    }
    Ok(kills)
}

/// Builds φ′ = φ∘section on E′ over f′ = f∘lift and validates it.
pub fn factors_via_quotient(ch: &ChAlgebra, q: &ChQuotient, rep: &CompatibleRep) -> bool {
    let f = &rep.scalar_map;
    if !q.j.basis.generators().iter().all(|x| f.target.is_zero(&f.apply(x))) {
        return false;
    }
    if !rep.kills_subgroup(&q.kernel) {
        return false;
    }
    let a2 = q.scalars.ring.clone();
    let images: Vec<RingElt> = (0..a2.rank()).map(|s| f.apply(&q.scalars.lift(&a2.basis(s)))).collect();
    let Ok(f2) = RingHom::new(a2, f.target.clone(), images) else { return false };
    let e2 = &q.ch.algebra;
    let images = (0..e2.rank()).map(|i| rep.apply(&q.alg.lift(&ch.algebra, &e2.basis(i)))).collect();
    verify_rep(&q.ch, &CompatibleRep { scalar_map: f2, images })
}

/// Kernel of E → lim (E/mⁱE)^𝒞, as a subgroup of E.
pub fn condition_kernel(ch: &ChAlgebra, c: &ConditionSpec) -> Result<Subgroup> {
    let a = ch.scalars();
    let m = is_local(a)?.ok_or(Error::NotLocal)?;
    let levels = m.nilpotency_index(a).expect("nilpotent maximal ideal");
    let module = ch.as_module()?;
    let mut prev: Option<(Subgroup, Subgroup)> = None;
    let mut last = Subgroup::zero(&ch.algebra.group);
    for i in 1..=levels {
        let mi_e = ideal_times_module(&module, &m.power(a, i));
        let level = module.quotient_module(&mi_e)?;
        let best = max_quotient_with_c(&level.module, c)?;
        let inner = best.map.kernel();
        let lifted: Vec<AlgElt> = inner.generators().iter().map(|y| AbGroup::apply(module.add(), &level.section, y)).collect();
        let k = Subgroup::span(module.add(), &lifted).sum(&mi_e);
        if let Some((pk, pm)) = &prev {
            // (E/mⁱ)^𝒞 reduces to (E/m^{i−1})^𝒞
            if k.sum(pm) != *pk {
                return Err(Error::TheoremViolation(format!("tower of maximal quotients is not compatible at level {i}")));
            }
        }
        prev = Some((k.clone(), mi_e));
        last = k;
    }
    Ok(last)
}

/// E^𝒞: the Cayley-Hamilton quotient by the condition kernel.
pub fn e_with_condition(ch: &ChAlgebra, c: &ConditionSpec) -> Result<ChQuotient> {
    let k = condition_kernel(ch, c)?;
    if !ch.algebra.is_two_sided(&k) {
        return Err(Error::KernelNotTwoSided("condition kernel is not a two-sided ideal".into()));
    }
    ch_quotient(ch, &k)
}

pub fn has_condition(ch: &ChAlgebra, c: &ConditionSpec) -> Result<bool> {
    has_c_artinian(&ch.as_module()?, c)
}

/// A module over E: an A-module with one endomorphism per additive basis element of E.
#[derive(Clone, Debug)]
pub struct ChModule {
    pub base: AModule,
    pub action: Vec<crate::exactalg::Mat>,
}

impl ChModule {
    pub fn new(ch: &ChAlgebra, base: AModule, action: Vec<crate::exactalg::Mat>) -> Result<ChModule> {
        let e = &ch.algebra;
        let n = ChModule { base, action };
        let add = &n.base.add;
        for i in 0..e.rank() {
            for j in 0..e.rank() {
                let lhs = n.matrix_of(&e.mul(&e.basis(i), &e.basis(j)));
                let rhs = crate::exactalg::mat_mul(add, &n.action[i], &n.action[j]);
                if !same_map(add, &lhs, &rhs) {
                    return Err(Error::Invalid(format!("action is not multiplicative on ({i}, {j})")));
                }
            }
        }
        if !same_map(add, &n.matrix_of(&e.one()), &crate::exactalg::linalg::identity(add.rank())) {
            return Err(Error::Invalid("unit does not act as identity".into()));
        }
        Ok(n)
    }

    /// E acting on itself by left multiplication.
    pub fn regular(ch: &ChAlgebra) -> Result<ChModule> {
        let e = &ch.algebra;
        let base = AModule::new(e.scalars.clone(), e.group.clone(), e.scalar_action.clone())?;
        let action = (0..e.rank()).map(|i| e.lmul_matrix(&e.basis(i))).collect();
        ChModule::new(ch, base, action)
    }

    pub fn matrix_of(&self, x: &[u64]) -> crate::exactalg::Mat {
        let add = &self.base.add;
        let mut acc = crate::exactalg::linalg::zero_mat(add.rank(), add.rank());
        for (i, &c) in x.iter().enumerate() {
            if c != 0 {
                crate::grouprep::module::mat_add_scaled(add, &mut acc, c, &self.action[i]);
            }
        }
        acc
    }

    pub fn g_module(&self, ch: &ChAlgebra) -> Result<Arc<GModule>> {
        let gens = ch.group.generators.iter().map(|&s| self.matrix_of(&ch.rho[s])).collect();
        Ok(Arc::new(GModule::new(self.base.clone(), ch.group.clone(), gens)?))
    }

    /// {x ∈ E : x acts as 0}.
    pub fn annihilator(&self, ch: &ChAlgebra) -> Subgroup {
        let e = &ch.algebra;
        let add = &self.base.add;
        let n = add.rank();
        let dst = add.power(n);
        let cols: Vec<Vec<u64>> = self.action.iter().map(|m| (0..n).flat_map(|c| (0..n).map(move |r| m[r][c])).collect()).collect();
        let m = from_columns(dst.rank(), &cols);
        solve_linear(&e.group, &dst, &m, &dst.zero()).kernel
    }
}

fn same_map(add: &AbGroup, x: &crate::exactalg::Mat, y: &crate::exactalg::Mat) -> bool {
    (0..add.rank()).all(|r| {
        let o = add.order_at(r);
        x[r].iter().zip(&y[r]).all(|(u, v)| u % o == v % o)
    })
}

/// (N has 𝒞, E has 𝒞) for a faithful module N; the two must agree.
pub fn module_condition_equiv(ch: &ChAlgebra, n: &ChModule, c: &ConditionSpec) -> Result<(bool, bool)> {
    if !n.annihilator(ch).is_zero() {
        return Err(Error::NotFaithful("annihilator of the module is nonzero".into()));
    }
    let on_module = has_c_artinian(&n.g_module(ch)?, c)?;
    let on_algebra = has_condition(ch, c)?;
    if on_module != on_algebra {
        return Err(Error::TheoremViolation(format!("module says {on_module}, algebra says {on_algebra}")));
    }
    Ok((on_module, on_algebra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ring_homs;

    fn f3() -> Arc<FiniteRing> {
        Arc::new(FiniteRing::fp(3))
    }

    fn s3_standard(a: &Arc<FiniteRing>) -> (Arc<FiniteGroup>, Vec<RingMat>) {
        let g = Arc::new(FiniteGroup::symmetric(3));
        let e = |v: u64| a.from_int(v as i64);
        let gens: Vec<RingMat> = g
            .generators
            .iter()
            .enumerate()
            .map(|(i, _)| if i == 0 { vec![vec![e(0), e(1)], vec![e(1), e(0)]] } else { vec![vec![e(0), e(2)], vec![e(1), e(2)]] })
            .collect();
        (g, gens)
    }

    #[test]
    fn m2_over_f3_is_cayley_hamilton() {
        let a = f3();
        let (g, gens) = s3_standard(&a);
        let ch = ChAlgebra::matrix(a, g, &gens).unwrap();
        let report = ch.verify_cayley_hamilton().unwrap();
        assert_eq!(report[0].mode, CheckMode::Exhaustive);
        assert_eq!(report.len(), 3);
    }

    #[test]
    fn zero_ideal_gives_identity_quotient() {
        let a = f3();
        let (g, gens) = s3_standard(&a);
        let ch = ChAlgebra::matrix(a, g, &gens).unwrap();
        let q = ch_quotient(&ch, &Subgroup::zero(&ch.algebra.group)).unwrap();
        assert!(q.j.is_zero());
        assert_eq!(q.ch.algebra.order(), 81);
    }

    #[test]
    fn whole_ideal_degenerates() {
        let a = f3();
        let (g, gens) = s3_standard(&a);
        let ch = ChAlgebra::matrix(a, g, &gens).unwrap();
        let q = ch_quotient(&ch, &Subgroup::whole(&ch.algebra.group)).unwrap();
        assert!(q.j.is_whole());
        assert!(q.ch.scalars().is_zero_ring());
        assert_eq!(q.ch.algebra.order(), 1);
    }

    #[test]
    fn scalar_ideal_quotient_of_m2_z9() {
        let a = Arc::new(FiniteRing::zmod(3, 2));
        let g = Arc::new(FiniteGroup::cyclic(2));
        let gens = vec![vec![vec![vec![0], vec![1]], vec![vec![1], vec![0]]]];
        let ch = ChAlgebra::matrix(a.clone(), g, &gens).unwrap();
        let three = Ideal::generated(&a, &[vec![3]]);
        let i = ch.algebra.scalar_ideal_span(&three);
        let q = ch_quotient(&ch, &i).unwrap();
        assert!(q.j.same(&three));
        assert_eq!(q.ch.scalars().order(), 3);
        assert_eq!(q.ch.algebra.order(), 81);
    }

    #[test]
    fn automorphisms_of_m2_f3() {
        let a = f3();
        let (g, gens) = s3_standard(&a);
        let ch = ChAlgebra::matrix(a.clone(), g, &gens).unwrap();
        let id = RingHom::identity(a.clone());
        let reps = compatible_reps(&ch, &id).unwrap();
        // inner automorphisms: PGL₂(F₃) has order 24
        assert_eq!(reps.len(), 24);
        let homs = ring_homs(&a, &a).unwrap();
        assert_eq!(homs.len(), 1);
    }

    #[test]
    fn rank_one_reps_are_ring_maps() {
        let a = Arc::new(FiniteRing::zmod(3, 2));
        let g = Arc::new(FiniteGroup::cyclic(1));
        let alg = Arc::new(FiniteAlgebra::from_ring(a.clone()));
        let law = PsRep::identity_on_ring(a.clone());
        let ch = ChAlgebra::new(alg, g, &[], law).unwrap();
        let b = Arc::new(FiniteRing::fp(3));
        let homs = ring_homs(&a, &b).unwrap();
        assert_eq!(homs.len(), 1);
        assert_eq!(compatible_reps(&ch, &homs[0]).unwrap().len(), 1);
    }

    #[test]
    fn everything_condition_is_identity() {
        let a = f3();
        let (g, gens) = s3_standard(&a);
        let ch = ChAlgebra::matrix(a, g, &gens).unwrap();
        let q = e_with_condition(&ch, &ConditionSpec::Everything).unwrap();
        assert_eq!(q.ch.algebra.order(), 81);
        assert!(has_condition(&ch, &ConditionSpec::Everything).unwrap());
        assert!(!has_condition(&ch, &ConditionSpec::trivial_on("A")).unwrap());
    }

    #[test]
    fn regular_module_agrees() {
        let a = f3();
        let (g, gens) = s3_standard(&a);
        let ch = ChAlgebra::matrix(a, g, &gens).unwrap();
        let n = ChModule::regular(&ch).unwrap();
        for c in [ConditionSpec::Everything, ConditionSpec::trivial_on("A"), ConditionSpec::ExponentAtMost { k: 1 }] {
            let (x, y) = module_condition_equiv(&ch, &n, &c).unwrap();
            assert_eq!(x, y);
        }
    }
}

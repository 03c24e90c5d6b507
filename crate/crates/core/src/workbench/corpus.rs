//! Seeded pseudo-random corpora of groups, rings, modules, GMAs and
//! representations for the theorem checks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exactalg::{extend_scalars, AlgElt, is_local, validate_ring, ExtensionKind, FiniteRing, RingData, RingElt};
use crate::extgroups::{ext1, residual_character};
use crate::gma::{gma_from_rep, GmaData, GmaRep, GmaSpec};
use crate::grouprep::{AModule, Character, FiniteGroup, GModule, GroupData, ModuleData};
use crate::guard;
use crate::pseudorep::RingMat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub prime: u64,
    pub modules: usize,
    pub gmas: usize,
    pub reps: usize,
    pub saturated: usize,
    pub max_module_order: u64,
    pub max_ring_order: u64,
}

impl CorpusSpec {
    pub fn default_for(seed: u64) -> CorpusSpec {
        CorpusSpec { seed, prime: 3, modules: 24, gmas: 56, reps: 36, saturated: 12, max_module_order: 625, max_ring_order: 81 }
    }
}

/// A 2×2 representation with diagonal residually (χ̄₁, χ̄₂).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepEntry {
    pub label: String,
    pub ring: RingData,
    pub group: GroupData,
    pub generators: Vec<RingMat>,
    /// Residual characters over F_p, on generators.
    pub residual: [Vec<RingElt>; 2],
    /// Set when ρ lives in a GMA that is not a subalgebra of M₂(A);
    /// `generators` is then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitGma>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitGma {
    pub spec: GmaSpec,
    pub images: Vec<AlgElt>,
}

/// A pair of characters with distinct residuals, for the saturated GMA.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturatedEntry {
    pub label: String,
    pub ring: RingData,
    pub group: GroupData,
    pub chi1: Vec<RingElt>,
    pub chi2: Vec<RingElt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledModule {
    pub label: String,
    pub data: ModuleData,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledGma {
    pub label: String,
    pub spec: GmaSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub spec: CorpusSpec,
    pub modules: Vec<LabelledModule>,
    pub gmas: Vec<LabelledGma>,
    pub reps: Vec<RepEntry>,
    pub saturated: Vec<SaturatedEntry>,
    /// Rejected GMA draws before acceptance.
    pub gma_rejections: usize,
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn empty(spec: CorpusSpec) -> Corpus {
        Corpus { spec, modules: vec![], gmas: vec![], reps: vec![], saturated: vec![], gma_rejections: 0, warnings: vec![] }
    }
}

/// Named group families; every group names a subgroup "H".
pub fn group_family(name: &str) -> Option<FiniteGroup> {
    let (mut g, h): (FiniteGroup, Vec<usize>) = match name {
        "C2" => (FiniteGroup::cyclic(2), vec![1]),
        "C3" => (FiniteGroup::cyclic(3), vec![1]),
        "C4" => (FiniteGroup::cyclic(4), vec![2]),
        "C2xC2" => (FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2)), vec![2]),
        "C3xC3" => (FiniteGroup::product(&FiniteGroup::cyclic(3), &FiniteGroup::cyclic(3)), vec![3]),
        "S3" => {
            let g = FiniteGroup::symmetric(3);
            let a = g.subgroup("A").ok()?.to_vec();
            (g, a)
        }
        "D4" => {
            let g = FiniteGroup::dihedral(4);
            let r = g.subgroup("R").ok()?.to_vec();
            (g, r)
        }
        "S4" => {
            let g = FiniteGroup::symmetric(4);
            let a = g.subgroup("A").ok()?.to_vec();
            (g, a)
        }
        "GD18" => {
            let g = FiniteGroup::generalized_dihedral_18();
            let n1 = g.subgroup("N1").ok()?.to_vec();
            (g, n1)
        }
        _ => return None,
    };
    let gens = g.generating_set(&h);
    g.name_generated("H", &gens);
    Some(g)
}

pub const GROUP_FAMILIES: [&str; 9] = ["C2", "C3", "C4", "C2xC2", "C3xC3", "S3", "D4", "S4", "GD18"];

/// Local rings of order at most `max`: F_p, ℤ/p², F_p[ε], F_p[t]/t³, ℤ/p²[ε].
pub fn ring_family(p: u64, max: u64) -> Vec<(String, Arc<FiniteRing>)> {
    let fp = Arc::new(FiniteRing::fp(p));
    let z2 = Arc::new(FiniteRing::zmod(p, 2));
    let mut out = vec![("F_p".to_string(), fp.clone()), ("Z/p^2".to_string(), z2.clone())];
    if let Ok((r, _)) = extend_scalars(&fp, ExtensionKind::DualNumbers) {
        out.push(("F_p[e]".into(), r));
    }
    if let Ok((r, _)) = extend_scalars(&fp, ExtensionKind::TruncatedPoly(3)) {
        out.push(("F_p[t]/t^3".into(), r));
    }
    if let Ok((r, _)) = extend_scalars(&z2, ExtensionKind::DualNumbers) {
        out.push(("Z/p^2[e]".into(), r));
    }
    out.retain(|(_, r)| r.order() <= max as u128);
    out
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty choice")
}

fn random_elt(rng: &mut ChaCha8Rng, a: &FiniteRing) -> RingElt {
    a.orders().iter().map(|&o| rng.gen_range(0..o)).collect()
}

fn random_in(rng: &mut ChaCha8Rng, elems: &[RingElt]) -> RingElt {
    pick(rng, elems).clone()
}

fn maximal_ideal_elements(a: &FiniteRing) -> Vec<RingElt> {
    match is_local(a) {
        Ok(Some(m)) => m.elements(),
        _ => vec![a.zero()],
    }
}

fn gen_values(chi: &Character, g: &FiniteGroup) -> Vec<RingElt> {
    g.generators.iter().map(|&s| chi.values[s].clone()).collect()
}

struct Generator {
    rng: ChaCha8Rng,
    spec: CorpusSpec,
}

impl Generator {
    fn module(&mut self, rings: &[(String, Arc<FiniteRing>)]) -> Result<Option<LabelledModule>> {
        let gname = *pick(&mut self.rng, &GROUP_FAMILIES[..8]);
        let g = Arc::new(group_family(gname).expect("family"));
        let small: Vec<_> = rings.iter().filter(|(_, r)| r.order() <= (self.spec.prime as u128).pow(2)).cloned().collect();
        let (rname, a) = pick(&mut self.rng, &small).clone();
        let chars = Character::all(a.clone(), &g)?;
        let max = self.spec.max_module_order as u128;
        let kind = self.rng.gen_range(0..4);
        let m = match kind {
            0 => {
                let k = self.rng.gen_range(1..=3);
                let parts: Vec<GModule> =
                    (0..k).map(|_| GModule::from_character(pick(&mut self.rng, &chars), g.clone())).collect::<Result<_>>()?;
                let refs: Vec<&GModule> = parts.iter().collect();
                ("characters", GModule::direct_sum(&refs)?)
            }
            1 => {
                let chi1 = pick(&mut self.rng, &chars).clone();
                let chi2 = pick(&mut self.rng, &chars).clone();
                let e = ext1(&chi2, Arc::new(GModule::from_character(&chi1, g.clone())?))?;
                let classes = e.cocycles.classes()?;
                let h = pick(&mut self.rng, &classes).clone();
                ("extension", e.extension_module(&e.cocycles.representative(&h))?)
            }
            2 => {
                if guard::pow_sat(a.order(), g.order() as u64) > max {
                    return Ok(None);
                }
                let reg = Arc::new(GModule::regular(a.clone(), g.clone())?);
                let subs = reg.all_submodules()?;
                let w = pick(&mut self.rng, &subs).clone();
                ("regular quotient", (*reg.quotient_module(&w)?.module).clone())
            }
            _ => {
                let k = self.rng.gen_range(1..=2);
                ("trivial", GModule::trivial(a.clone(), g.clone(), k))
            }
        };
        let (what, m) = m;
        if m.order() > max || m.order() <= 1 {
            return Ok(None);
        }
        Ok(Some(LabelledModule { label: format!("{what} over {rname} for {gname}"), data: m.data() }))
    }

    fn a_module(&mut self, a: &Arc<FiniteRing>) -> Result<AModule> {
        let free1 = AModule::free(a.clone(), 1);
        Ok(match self.rng.gen_range(0..5) {
            0 | 1 => free1,
            2 => AModule::free(a.clone(), 2),
            3 => {
                let m = maximal_ideal_elements(a);
                let (q, _, _) = free1.quotient(&free1.span(&m))?;
                q
            }
            _ => AModule::zero(a.clone()),
        })
    }

    fn gma(&mut self, rings: &[(String, Arc<FiniteRing>)]) -> Result<(LabelledGma, usize)> {
        let mut rejected = 0;
        loop {
            let (rname, a) = pick(&mut self.rng, rings).clone();
            let b = self.a_module(&a)?;
            let c = self.a_module(&a)?;
            // |E| = |A|²·|B|·|C| must stay under the size guard; redraw the shape
            if a.order() * a.order() * b.order() * c.order() > guard::max_order() as u128 {
                continue;
            }
            let lambda = random_elt(&mut self.rng, &a);
            // draws are scaled pairings on basis pairs; most are rejected unless ASSO holds
            let m: Vec<Vec<RingElt>> = (0..b.rank())
                .map(|_| (0..c.rank()).map(|_| if self.rng.gen_bool(0.5) { a.scale_int(self.rng.gen_range(0..a.char_bound()), &lambda) } else { random_elt(&mut self.rng, &a) }).collect())
                .collect();
            match GmaData::new(a.clone(), b.clone(), c.clone(), m) {
                Ok(g) => {
                    let label = format!("B rank {}, C rank {} over {rname}", b.rank(), c.rank());
                    return Ok((LabelledGma { label, spec: g.spec() }, rejected));
                }
                Err(_) => rejected += 1,
            }
            if rejected > 200 {
                let g = GmaData::split(a.clone(), 1, 1)?;
                return Ok((LabelledGma { label: format!("split fallback over {rname}"), spec: g.spec() }, rejected));
            }
        }
    }

    fn distinct_pair(&mut self, a: &Arc<FiniteRing>, g: &FiniteGroup) -> Result<Option<(Character, Character, Character, Character)>> {
        let chars = Character::all(a.clone(), g)?;
        let mut pairs = Vec::new();
        for x in &chars {
            for y in &chars {
                let (rx, ry) = (residual_character(x, g)?, residual_character(y, g)?);
                if rx != ry {
                    pairs.push((x.clone(), y.clone(), rx, ry));
                }
            }
        }
        Ok(pairs.choose(&mut self.rng).cloned())
    }

    fn rep(&mut self, rings: &[(String, Arc<FiniteRing>)]) -> Result<Option<RepEntry>> {
        let gname = *pick(&mut self.rng, &["C2", "C4", "C2xC2", "S3", "D4"]);
        let g = Arc::new(group_family(gname).expect("family"));
        let small: Vec<_> = rings.iter().filter(|(_, r)| r.order() <= (self.spec.prime as u128).pow(2)).cloned().collect();
        let (rname, a) = pick(&mut self.rng, &small).clone();
        let Some((chi1, chi2, r1, r2)) = self.distinct_pair(&a, &g)? else { return Ok(None) };
        let mels = maximal_ideal_elements(&a);
        let elems: Vec<RingElt> = a.elements().collect();
        let z = a.zero();
        let kind = if gname == "S3" && self.rng.gen_bool(0.6) { 2 } else { self.rng.gen_range(0..2) };
        let gens: Vec<RingMat> = match kind {
            0 => g.generators.iter().map(|&s| vec![vec![chi1.values[s].clone(), z.clone()], vec![z.clone(), chi2.values[s].clone()]]).collect(),
            1 => {
                let psi = chi1.mul(&chi2.inverse());
                let e = crate::extgroups::h1(Arc::new(GModule::from_character(&psi, g.clone())?))?;
                let classes = e.classes()?;
                let f = e.representative(pick(&mut self.rng, &classes));
                let k = a.rank();
                g.generators
                    .iter()
                    .map(|&s| {
                        let b = a.mul(&f[s * k..(s + 1) * k], &chi2.values[s]);
                        vec![vec![chi1.values[s].clone(), b], vec![z.clone(), chi2.values[s].clone()]]
                    })
                    .collect()
            }
            _ => {
                if gname != "S3" || mels.len() < 2 {
                    return Ok(None);
                }
                return self.searched_s3(&rname, &a, &g, (&chi1, &chi2), (&r1, &r2), &mels);
            }
        };
        // conjugate by [[1, x], [0, 1]] then [[1, 0], [y, 1]] with y ∈ m
        let x = random_in(&mut self.rng, &elems);
        let y = random_in(&mut self.rng, &mels);
        let conj = |m: &RingMat, u: &RingMat, ui: &RingMat| crate::pseudorep::ring_mat_mul(&a, &crate::pseudorep::ring_mat_mul(&a, u, m), ui);
        let one = a.one();
        let upper = vec![vec![one.clone(), x.clone()], vec![z.clone(), one.clone()]];
        let upper_inv = vec![vec![one.clone(), a.neg(&x)], vec![z.clone(), one.clone()]];
        let lower = vec![vec![one.clone(), z.clone()], vec![y.clone(), one.clone()]];
        let lower_inv = vec![vec![one.clone(), z.clone()], vec![a.neg(&y), one.clone()]];
        let gens: Vec<RingMat> = gens.iter().map(|m| conj(&conj(m, &upper, &upper_inv), &lower, &lower_inv)).collect();
        let label = format!("{} over {rname} for {gname}", ["diagonal", "triangular"][kind]);
        let entry = RepEntry {
            label,
            ring: a.data().clone(),
            group: g.data(),
            generators: gens,
            residual: [gen_values(&r1, &g), gen_values(&r2, &g)],
            explicit: None,
        };
        // reject entries the GMA extraction refuses
        if entry.build().is_err() {
            return Ok(None);
        }
        Ok(Some(entry))
    }

    /// ρ(s) = diag(χ₁, χ₂)(s) and ρ(r) searched in the GMA with m(b⊗c) = λbc,
    /// λ ∈ m nonzero, preferring a nonzero reducibility ideal.
    fn searched_s3(
        &mut self,
        rname: &str,
        a: &Arc<FiniteRing>,
        g: &Arc<FiniteGroup>,
        chi: (&Character, &Character),
        res: (&Character, &Character),
        mels: &[RingElt],
    ) -> Result<Option<RepEntry>> {
        let nonzero: Vec<RingElt> = mels.iter().filter(|x| !a.is_zero(x)).cloned().collect();
        let lambda = pick(&mut self.rng, &nonzero).clone();
        let gma = Arc::new(GmaData::scaled_multiplication(a.clone(), &lambda)?);
        let (s, r) = (g.generators[0], g.generators[1]);
        let z = a.zero();
        let img_s = gma.element(&chi.0.values[s], &z, &z, &chi.1.values[s]);
        let residue = crate::pseudorep::Residue::new(a)?;
        let elems: Vec<RingElt> = a.elements().collect();
        let on = |x: &RingElt, t: &Character| residue.to_fp(x) == t.values[r][0] % residue.p;
        let fp = Arc::new(FiniteRing::fp(a.prime()));
        let res_pair = (Character { ring: fp.clone(), values: res.0.values.clone() }, Character { ring: fp, values: res.1.values.clone() });
        let mut found = Vec::new();
        for x in elems.iter().filter(|x| on(x, res.0)) {
            for y in elems.iter().filter(|y| on(y, res.1)) {
                for b in &elems {
                    for c in &elems {
                        let img_r = gma.element(x, b, c, y);
                        if GmaRep::new(gma.clone(), g.clone(), vec![img_s.clone(), img_r.clone()], res_pair.clone()).is_ok() {
                            found.push((img_r, !a.is_zero(&a.mul(&lambda, &a.mul(b, c)))));
                        }
                    }
                }
            }
        }
        let irreducible: Vec<AlgElt> = found.iter().filter(|(_, irr)| *irr).map(|(x, _)| x.clone()).collect();
        let all: Vec<AlgElt> = found.into_iter().map(|(x, _)| x).collect();
        let pool = if irreducible.is_empty() { &all } else { &irreducible };
        if pool.is_empty() {
            return Ok(None);
        }
        let img_r = pick(&mut self.rng, pool).clone();
        Ok(Some(RepEntry {
            label: format!("searched over {rname} for S3"),
            ring: a.data().clone(),
            group: g.data(),
            generators: vec![],
            residual: [gen_values(res.0, g), gen_values(res.1, g)],
            explicit: Some(ExplicitGma { spec: gma.spec(), images: vec![img_s, img_r] }),
        }))
    }

    fn saturated(&mut self, rings: &[(String, Arc<FiniteRing>)]) -> Result<Option<SaturatedEntry>> {
        let gname = *pick(&mut self.rng, &["C2", "C4", "C2xC2", "S3", "D4", "GD18"]);
        let g = Arc::new(group_family(gname).expect("family"));
        let small: Vec<_> = rings.iter().filter(|(_, r)| r.order() <= (self.spec.prime as u128).pow(2)).cloned().collect();
        let (rname, a) = pick(&mut self.rng, &small).clone();
        let Some((chi1, chi2, _, _)) = self.distinct_pair(&a, &g)? else { return Ok(None) };
        Ok(Some(SaturatedEntry { label: format!("{gname} over {rname}"), ring: a.data().clone(), group: g.data(), chi1: gen_values(&chi1, &g), chi2: gen_values(&chi2, &g) }))
    }
}

fn rebuild_group(data: &GroupData) -> Result<Arc<FiniteGroup>> {
    Ok(Arc::new(FiniteGroup::from_table(data.clone())?))
}

impl RepEntry {
    pub fn build(&self) -> Result<GmaRep> {
        let a = Arc::new(validate_ring(self.ring.clone())?);
        let g = rebuild_group(&self.group)?;
        let fp = Arc::new(FiniteRing::fp(a.prime()));
        let ch = |v: &[RingElt]| Character::from_generators(fp.clone(), &g, v).ok_or_else(|| crate::Error::Invalid("residual is not a character".into()));
        if let Some(x) = &self.explicit {
            let gma = Arc::new(GmaData::from_spec(&x.spec)?);
            let res = (ch(&self.residual[0])?, ch(&self.residual[1])?);
            return GmaRep::new(gma, g, x.images.clone(), res);
        }
        gma_from_rep(a.clone(), g.clone(), &self.generators, (ch(&self.residual[0])?, ch(&self.residual[1])?))
    }
}

impl SaturatedEntry {
    pub fn characters(&self) -> Result<(Character, Character, Arc<FiniteGroup>)> {
        let a = Arc::new(validate_ring(self.ring.clone())?);
        let g = rebuild_group(&self.group)?;
        let ch = |v: &[RingElt]| Character::from_generators(a.clone(), &g, v).ok_or_else(|| crate::Error::Invalid("not a character".into()));
        Ok((ch(&self.chi1)?, ch(&self.chi2)?, g))
    }
}

impl LabelledModule {
    pub fn build(&self) -> Result<Arc<GModule>> {
        Ok(Arc::new(GModule::from_data(&self.data)?))
    }
}

/// Deterministic for a given spec.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    let mut spec = spec.clone();
    let mut warnings = Vec::new();
    let limit = guard::max_order();
    for (what, v) in [("max_module_order", &mut spec.max_module_order), ("max_ring_order", &mut spec.max_ring_order)] {
        if *v > limit {
            warnings.push(format!("{what} {} truncated to the size guard {limit}", *v));
            *v = limit;
        }
    }
    let mut gen = Generator { rng: ChaCha8Rng::seed_from_u64(spec.seed), spec: spec.clone() };
    let rings = ring_family(spec.prime, spec.max_ring_order);
    let mut corpus = Corpus::empty(spec.clone());
    if rings.is_empty() {
        warnings.push("no ring fits under max_ring_order".into());
        corpus.warnings = warnings;
        return Ok(corpus);
    }
    let budget = |n: usize| 20 * n + 20;
    let mut tries = 0;
    while corpus.modules.len() < spec.modules && tries < budget(spec.modules) {
        tries += 1;
        if let Some(m) = gen.module(&rings)? {
            corpus.modules.push(m);
        }
    }
    for _ in 0..spec.gmas {
        let (g, rejected) = gen.gma(&rings)?;
        corpus.gma_rejections += rejected;
        corpus.gmas.push(g);
    }
    tries = 0;
    while corpus.reps.len() < spec.reps && tries < budget(spec.reps) {
        tries += 1;
        if let Some(r) = gen.rep(&rings)? {
            corpus.reps.push(r);
        }
    }
    tries = 0;
    while corpus.saturated.len() < spec.saturated && tries < budget(spec.saturated) {
        tries += 1;
        if let Some(s) = gen.saturated(&rings)? {
            corpus.saturated.push(s);
        }
    }
    for (what, have, want) in [("modules", corpus.modules.len(), spec.modules), ("reps", corpus.reps.len(), spec.reps), ("saturated", corpus.saturated.len(), spec.saturated)] {
        if have < want {
            warnings.push(format!("only {have} of {want} {what} generated"));
        }
    }
    corpus.warnings = warnings;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> CorpusSpec {
        CorpusSpec { seed, prime: 3, modules: 6, gmas: 8, reps: 6, saturated: 3, max_module_order: 243, max_ring_order: 81 }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_corpus(&small(0)).unwrap();
        let b = generate_corpus(&small(0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.modules.len(), 6);
        assert_ne!(generate_corpus(&small(1)).unwrap(), a);
    }

    #[test]
    fn sampled_gmas_revalidate() {
        let c = generate_corpus(&small(5)).unwrap();
        for g in &c.gmas {
            GmaData::from_spec(&g.spec).unwrap();
        }
        for r in &c.reps {
            r.build().unwrap();
        }
    }

    #[test]
    fn every_family_names_h() {
        for name in GROUP_FAMILIES {
            let g = group_family(name).unwrap();
            assert!(g.subgroup("H").is_ok(), "{name}");
        }
    }
}

//! Corpus-wide checks of the structural results. A failed check is reported,
//! never raised.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chalg::{
    compatible_reps, ch_quotient, e_with_condition, factors_through, factors_via_quotient, module_condition_equiv, ChAlgebra, ChModule,
    CompatibleRep,
};
use crate::conditions::{audit_stability, evaluate, max_quotient_with_c, ConditionSpec};
use crate::error::{Error, Result};
use crate::exactalg::abgroup::Subgroup;
use crate::exactalg::algebra::AlgElt;
use crate::exactalg::linalg::{zero_mat, Mat};
use crate::exactalg::ring::{ring_homs, FiniteRing};
use crate::extgroups::{bridge_report, ext1, ext1_with_condition, h1, local_condition, saturated_gma, selmer_kernel, verify_bc_exts};
use crate::gma::{adapted_reps, gma_algebra, GmaData, GmaRep};
use crate::grouprep::{AModule, Character, FiniteGroup, GModule};
use crate::pseudorep::{enumerate_psdef_dim2, find_reducible_split};

use super::corpus::{group_family, ring_family, Corpus};

const MAX_FAILURES: usize = 20;
/// Modules above this order skip the lattice-based checks.
const LATTICE_MODULE_LIMIT: u128 = 625;
const AUDIT_MODULE_LIMIT: u128 = 81;
const SELMER_MODULE_LIMIT: u128 = 81;
const EXHAUSTIVE_GMA_LIMIT: u128 = 4096;
const GMA_SAMPLES: usize = 256;
pub const CENSUS_GROUPS: [&str; 3] = ["C3", "C3xC3", "S3"];

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: u64,
    pub passed: u64,
    pub skipped: u64,
    pub failures: Vec<String>,
    pub stats: BTreeMap<String, u64>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.checked
    }

    pub fn stat(&self, key: &str) -> u64 {
        self.stats.get(key).copied().unwrap_or(0)
    }
}

#[derive(Default)]
struct Tally {
    checked: u64,
    passed: u64,
    skipped: u64,
    failures: Vec<String>,
    stats: BTreeMap<String, u64>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.checked += 1;
        self.failures.push(what);
    }

    fn skip(&mut self, reason: &str) {
        self.skipped += 1;
        self.count(&format!("skipped_{reason}"), 1);
    }

    fn count(&mut self, key: &str, n: u64) {
        *self.stats.entry(key.to_string()).or_insert(0) += n;
    }

    /// Guard refusals become skips; any other error is a failure.
    fn outcome(&mut self, label: &str, r: Result<bool>) {
        match r {
            Ok(ok) => self.check(ok, || format!("{label}: check is false")),
            Err(e) => self.error(label, e),
        }
    }

    fn error(&mut self, label: &str, e: Error) {
        match e.root() {
            Error::SizeLimitExceeded { .. } => self.skip("guard"),
            _ => self.fail(format!("{label}: {e}")),
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.passed += other.passed;
        self.skipped += other.skipped;
        self.failures.extend(other.failures);
        for (k, v) in other.stats {
            *self.stats.entry(k).or_insert(0) += v;
        }
        self
    }

    fn report(self, name: &str) -> SuiteReport {
        let total = self.failures.len();
        let mut failures = self.failures;
        if total > MAX_FAILURES {
            failures.truncate(MAX_FAILURES);
            failures.push(format!("... {} more", total - MAX_FAILURES));
        }
        SuiteReport { name: name.into(), checked: self.checked, passed: self.passed, skipped: self.skipped, failures, stats: self.stats }
    }
}

fn fold(parts: Vec<Tally>) -> Tally {
    parts.into_iter().fold(Tally::default(), Tally::merge)
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditLine {
    pub condition: String,
    pub modules: usize,
    pub stable: bool,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub seed: u64,
    pub prime: u64,
    pub conditions: Vec<String>,
    pub audits: Vec<AuditLine>,
    pub suites: Vec<SuiteReport>,
    pub all_pass: bool,
}

impl TheoremReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn summary(&self) -> String {
        let mut out = format!("seed {} prime {}\n", self.seed, self.prime);
        for a in &self.audits {
            out += &format!("audit {}: {} on {} modules\n", a.condition, if a.stable { "stable" } else { "UNSTABLE" }, a.modules);
        }
        for s in &self.suites {
            out += &format!(
                "{:<20} {} checked {} passed {} skipped {}\n",
                s.name,
                if s.ok() { "ok  " } else { "FAIL" },
                s.checked,
                s.passed,
                s.skipped
            );
            for f in &s.failures {
                out += &format!("    {f}\n");
            }
        }
        out += if self.all_pass { "all pass\n" } else { "failures present\n" };
        out
    }
}

pub fn default_conditions() -> Vec<ConditionSpec> {
    vec![
        ConditionSpec::Everything,
        ConditionSpec::trivial_on("G"),
        ConditionSpec::trivial_on("H"),
        ConditionSpec::ExponentAtMost { k: 1 },
        ConditionSpec::FiberProduct { parts: vec![("H".into(), ConditionSpec::trivial_on("G"))] },
    ]
}

fn applies(c: &ConditionSpec, g: &FiniteGroup) -> bool {
    c.validate(g).is_ok()
}

struct Built {
    modules: Vec<(String, Arc<GModule>)>,
    reps: Vec<(String, GmaRep)>,
    algebras: Vec<(String, ChAlgebra)>,
    /// The GMA structure behind each entry of `algebras`.
    gmas: Vec<Arc<GmaData>>,
    saturated: Vec<(String, Character, Character, Arc<FiniteGroup>)>,
}

fn build(corpus: &Corpus, t: &mut Tally) -> Built {
    let mut b = Built { modules: vec![], reps: vec![], algebras: vec![], gmas: vec![], saturated: vec![] };
    for m in &corpus.modules {
        match m.build() {
            Ok(v) => b.modules.push((m.label.clone(), v)),
            Err(e) => t.error(&m.label, e),
        }
    }
    for r in &corpus.reps {
        match r.build() {
            Ok(rep) => b.reps.push((r.label.clone(), rep)),
            Err(e) => t.error(&r.label, e),
        }
    }
    let algs: Vec<_> = b.reps.par_iter().map(|(l, r)| (l.clone(), r.gma.clone(), gma_algebra(r))).collect();
    for (l, gma, a) in algs {
        match a {
            Ok(ch) => {
                b.algebras.push((l, ch));
                b.gmas.push(gma);
            }
            Err(e) => t.error(&l, e),
        }
    }
    for s in &corpus.saturated {
        match s.characters() {
            Ok((c1, c2, g)) => b.saturated.push((s.label.clone(), c1, c2, g)),
            Err(e) => t.error(&s.label, e),
        }
    }
    b
}

/// Runs every suite over the corpus. Conditions whose stability audit finds
/// a counterexample are left out of the suites that assume stability.
pub fn verify_theorems(corpus: &Corpus, conditions: &[ConditionSpec]) -> TheoremReport {
    verify_theorems_timed(corpus, conditions).0
}

/// As `verify_theorems`, with wall-clock seconds per suite kept apart from
/// the report.
pub fn verify_theorems_timed(corpus: &Corpus, conditions: &[ConditionSpec]) -> (TheoremReport, Vec<(String, f64)>) {
    let mut timings = Vec::new();
    let mut clock = std::time::Instant::now();
    let mut lap = |name: &str| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = std::time::Instant::now();
    };
    let mut build_tally = Tally::default();
    let built = build(corpus, &mut build_tally);

    let audits: Vec<(ConditionSpec, AuditLine)> = conditions
        .iter()
        .map(|c| {
            let small: Vec<Arc<GModule>> =
                built.modules.iter().map(|(_, v)| v).filter(|v| v.order() <= AUDIT_MODULE_LIMIT && applies(c, &v.group)).cloned().collect();
            let line = match audit_stability(c, &small) {
                Ok(r) => AuditLine { condition: c.label(), modules: small.len(), stable: r.stable, counterexample: r.counterexample },
                Err(e) => AuditLine { condition: c.label(), modules: small.len(), stable: false, counterexample: Some(format!("audit error: {e}")) },
            };
            (c.clone(), line)
        })
        .collect();
    let stable: Vec<ConditionSpec> = audits.iter().filter(|(_, a)| a.stable).map(|(c, _)| c.clone()).collect();
    let unstable = (conditions.len() - stable.len()) as u64;

    lap("build_and_audit");
    let pools = rep_pools(&built.algebras, &built.gmas, corpus.spec.prime);
    lap("rep_pools");
    let mut suites = vec![build_tally.report("corpus_build")];
    let mut push = |name: &str, t: Tally| {
        suites.push(t.report(name));
        lap(name);
    };
    push("gma_cayley_hamilton", suite_gma_cayley_hamilton(corpus));
    push("vc_universal", suite_vc_universal(&built.modules, &stable));
    push("ch_quotient", suite_ch_quotient(&built.algebras, &pools, corpus.spec.seed));
    push("e_with_condition", suite_e_with_condition(&built.algebras, &pools, &stable));
    push("mod_to_ch", suite_mod_to_ch(&built.algebras, &built.saturated, &stable));
    push("reducibility", suite_reducibility(&built.reps));
    push("census", suite_census(corpus.spec.prime));
    push("ext_bridge", suite_ext_bridge(&built.saturated, &stable));
    push("selmer", suite_selmer(&built.modules, &built.saturated, &stable));
    if unstable > 0 {
        for s in suites.iter_mut() {
            s.stats.insert("conditions_withheld_unstable".into(), unstable);
        }
    }
    let all_pass = suites.iter().all(SuiteReport::ok);
    let report = TheoremReport {
        seed: corpus.spec.seed,
        prime: corpus.spec.prime,
        conditions: conditions.iter().map(ConditionSpec::label).collect(),
        audits: audits.into_iter().map(|(_, a)| a).collect(),
        suites,
        all_pass,
    };
    (report, timings)
}

// --- Cayley-Hamilton on generalized matrix algebras ---

fn gma_scale(g: &GmaData, t: &[u64], x: &[u64]) -> AlgElt {
    let (a, b, c, d) = g.parts(x);
    g.element(&g.ring.mul(t, a), &g.b.smul(t, b), &g.c.smul(t, c), &g.ring.mul(t, d))
}

/// x² − (a+d)x + (ad − m(b⊗c)), computed from the block description alone.
fn gma_residual(g: &GmaData, x: &[u64]) -> AlgElt {
    let r = &g.ring;
    let (a, b, c, d) = g.parts(x);
    let tr = r.add(a, d);
    let det = r.sub(&r.mul(a, d), &g.pair(b, c));
    let zb = vec![0; g.b.rank()];
    let zc = vec![0; g.c.rank()];
    let sq = g.mul(x, x);
    let tx = gma_scale(g, &tr, x);
    let dets = g.element(&det, &zb, &zc, &det);
    sq.iter().zip(&tx).zip(&dets).map(|((u, v), w)| u.wrapping_add(*w).wrapping_sub(*v)).collect::<Vec<_>>()
}

fn is_zero_elt(g: &GmaData, x: &[u64]) -> bool {
    let add = g.additive_group();
    add.is_zero(&add.reduce(x))
}

fn suite_gma_cayley_hamilton(corpus: &Corpus) -> Tally {
    let seed = corpus.spec.seed;
    let parts: Vec<Tally> = corpus
        .gmas
        .par_iter()
        .enumerate()
        .map(|(i, entry)| {
            let mut t = Tally::default();
            let label = &entry.label;
            let data = match GmaData::from_spec(&entry.spec) {
                Ok(d) => d,
                Err(e) => {
                    t.error(label, e);
                    return t;
                }
            };
            let checked = data.algebra().and_then(|alg| {
                let alg = Arc::new(alg);
                let law = data.law(&alg);
                let trivial = Arc::new(FiniteGroup::cyclic(1));
                let ch = ChAlgebra::new(alg, trivial, &[], law)?;
                ch.verify_cayley_hamilton()
            });
            match checked {
                Ok(modes) => {
                    t.check(true, String::new);
                    for m in modes {
                        t.count(&format!("{}_{:?}", m.carrier, m.mode).to_lowercase(), 1);
                    }
                }
                Err(e) => t.error(label, e),
            }
            // independent oracle from the block multiplication
            let add = data.additive_group();
            let sample: Vec<AlgElt> = if add.order() <= EXHAUSTIVE_GMA_LIMIT {
                t.count("oracle_exhaustive", 1);
                add.elements().collect()
            } else {
                t.count("oracle_sampled", 1);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9));
                let mut xs: Vec<AlgElt> = (0..add.rank()).map(|k| {
                    let mut e = add.zero();
                    e[k] = 1;
                    e
                }).collect();
                xs.extend((0..GMA_SAMPLES).map(|_| (0..add.rank()).map(|k| rng.gen_range(0..add.order_at(k))).collect()));
                xs
            };
            let bad = sample.iter().find(|x| !is_zero_elt(&data, &gma_residual(&data, x)));
            t.check(bad.is_none(), || format!("{label}: residual nonzero at {:?}", bad.unwrap()));
            // Over F[ε] the ε-part of the residual at x + εy is R(x+y) − R(x) − R(y).
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let dual_ok = (0..64).all(|_| {
                let x: AlgElt = sample[rng.gen_range(0..sample.len())].clone();
                let y: AlgElt = sample[rng.gen_range(0..sample.len())].clone();
                let s = add.add(&x, &y);
                let r = add.sub(&add.sub(&gma_residual(&data, &s), &gma_residual(&data, &x)), &gma_residual(&data, &y));
                is_zero_elt(&data, &r)
            });
            t.check(dual_ok, || format!("{label}: dual-number residual nonzero"));
            t
        })
        .collect();
    fold(parts)
}

// --- universal property of V^C ---

fn brute_coinvariant_kernel(v: &GModule, h: &[usize]) -> Subgroup {
    let add = v.add();
    let rows: Vec<Vec<u64>> = add.elements().flat_map(|x| h.iter().map(move |&g| (g, x.clone()))).map(|(g, x)| add.sub(&v.act(g, &x), &x)).collect();
    Subgroup::span(add, &rows)
}

fn vc_checks(label: &str, v: &Arc<GModule>, c: &ConditionSpec, t: &mut Tally) -> Result<()> {
    let q = max_quotient_with_c(v, c)?;
    let k = q.map.kernel();
    t.check(evaluate(c, &q.module)?, || format!("{label} {}: V^C fails the condition", c.label()));
    let again = max_quotient_with_c(&q.module, c)?;
    t.check(again.map.kernel().is_zero(), || format!("{label} {}: V^C is not idempotent", c.label()));
    for w in v.all_submodules()? {
        let has = evaluate(c, &v.quotient_module(&w)?.module)?;
        t.check(has == k.is_subset(&w), || format!("{label} {}: quotient by a submodule of order {} disagrees", c.label(), w.order()));
    }
    if let ConditionSpec::TrivialOn { subgroup } = c {
        let h = v.group.subgroup(subgroup)?;
        t.check(k == brute_coinvariant_kernel(v, h), || format!("{label} {}: kernel is not the coinvariant kernel", c.label()));
    }
    Ok(())
}

fn suite_vc_universal(modules: &[(String, Arc<GModule>)], conds: &[ConditionSpec]) -> Tally {
    let parts: Vec<Tally> = modules
        .par_iter()
        .map(|(label, v)| {
            let mut t = Tally::default();
            if v.order() > LATTICE_MODULE_LIMIT {
                t.skip("large_module");
                return t;
            }
            for c in conds.iter().filter(|c| applies(c, &v.group)) {
                if let Err(e) = vc_checks(label, v, c, &mut t) {
                    t.error(&format!("{label} {}", c.label()), e);
                }
            }
            t
        })
        .collect();
    fold(parts)
}

// --- Cayley-Hamilton quotients and representability ---

type Pool = Result<Vec<CompatibleRep>>;

/// Representations of each algebra into local rings of order at most p³.
/// Every compatible representation sends e₁ to a rank-one idempotent, which
/// is conjugate to diag(1, 0), so the adapted ones meet every conjugacy
/// class; killing an ideal and factoring through a quotient are both
/// conjugation invariant. Over F_p the full enumeration is added as well.
fn rep_pools(algebras: &[(String, ChAlgebra)], gmas: &[Arc<GmaData>], p: u64) -> Vec<Pool> {
    let targets = ring_family(p, p * p * p);
    algebras
        .par_iter()
        .zip(gmas)
        .map(|((_, ch), gma)| {
            let mut all = Vec::new();
            for (i, (_, b)) in targets.iter().enumerate() {
                for f in ring_homs(ch.scalars(), b)? {
                    if i == 0 {
                        all.extend(compatible_reps(ch, &f)?);
                    }
                    all.extend(adapted_reps(ch, gma, &f)?.into_iter().map(|a| a.rep));
                }
            }
            Ok(all)
        })
        .collect()
}

fn distinct_ideals(ch: &ChAlgebra, seed: u64) -> Vec<Subgroup> {
    let e = &ch.algebra;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: AlgElt = (0..e.rank()).map(|k| rng.gen_range(0..e.group.order_at(k))).collect();
    let m = crate::exactalg::ring::is_local(ch.scalars()).ok().flatten();
    let mut out = vec![Subgroup::zero(&e.group), e.two_sided_ideal(&[random])];
    if let Some(m) = m {
        out.push(e.scalar_ideal_span(&m));
    }
    // the element ρ(g) − 1 for each generator
    let one = e.one();
    out.push(e.two_sided_ideal(&ch.group.generators.iter().map(|&s| e.sub(&ch.rho[s], &one)).collect::<Vec<_>>()));
    let mut uniq: Vec<Subgroup> = Vec::new();
    for i in out {
        if !uniq.contains(&i) {
            uniq.push(i);
        }
    }
    uniq
}

fn suite_ch_quotient(algebras: &[(String, ChAlgebra)], pools: &[Pool], seed: u64) -> Tally {
    let parts: Vec<Tally> = algebras
        .par_iter()
        .zip(pools)
        .enumerate()
        .map(|(i, ((label, ch), pool))| {
            let mut t = Tally::default();
            let reps = match pool {
                Ok(r) => r,
                Err(e) => {
                    t.fail(format!("{label}: {e}"));
                    return t;
                }
            };
            let ideals = distinct_ideals(ch, seed.wrapping_add(i as u64));
            t.count("ideals", ideals.len() as u64);
            t.count("algebras", 1);
            if ideals.len() >= 3 {
                t.count("algebras_with_3_ideals", 1);
            }
            t.count("reps", reps.len() as u64);
            for ideal in &ideals {
                let q = match ch_quotient(ch, ideal) {
                    Ok(q) => q,
                    Err(e) => {
                        t.error(label, e);
                        continue;
                    }
                };
                for rep in reps {
                    match factors_through(ch, &q, rep, ideal) {
                        Ok(kills) => {
                            t.check(true, String::new);
                            t.count(if kills { "factor" } else { "no_factor" }, 1);
                        }
                        Err(e) => t.error(label, e),
                    }
                }
            }
            t
        })
        .collect();
    fold(parts)
}

fn suite_e_with_condition(algebras: &[(String, ChAlgebra)], pools: &[Pool], conds: &[ConditionSpec]) -> Tally {
    let parts: Vec<Tally> = algebras
        .par_iter()
        .zip(pools)
        .map(|((label, ch), pool)| {
            let mut t = Tally::default();
            let Ok(reps) = pool else {
                t.skip("no_reps");
                return t;
            };
            for c in conds.iter().filter(|c| applies(c, &ch.group)) {
                let q = match e_with_condition(ch, c) {
                    Ok(q) => q,
                    Err(e) if matches!(e.root(), Error::KernelNotTwoSided(_)) => {
                        t.skip("kernel_not_two_sided");
                        continue;
                    }
                    Err(e) => {
                        t.error(&format!("{label} {}", c.label()), e);
                        continue;
                    }
                };
                for rep in reps {
                    let r = rep.module(ch).and_then(|m| evaluate(c, &m)).map(|has| has == factors_via_quotient(ch, &q, rep));
                    t.outcome(&format!("{label} {}", c.label()), r);
                }
            }
            t
        })
        .collect();
    fold(parts)
}

fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = zero_mat(n + m, n + m);
    for r in 0..n {
        out[r][..n].copy_from_slice(&a[r]);
    }
    for r in 0..m {
        out[n + r][n..].copy_from_slice(&b[r]);
    }
    out
}

fn double(ch: &ChAlgebra, n: &ChModule) -> Result<ChModule> {
    let base = n.base.direct_sum(&n.base)?;
    let action = n.action.iter().map(|m| block_diag(m, m)).collect();
    ChModule::new(ch, base, action)
}

/// A × A with ρ = χ₁ ⊕ χ₂, as a split generalized matrix algebra.
fn diagonal_algebra(chi1: &Character, chi2: &Character, group: &Arc<FiniteGroup>) -> Result<ChAlgebra> {
    let a = chi1.ring.clone();
    let gma = Arc::new(GmaData::split(a, 0, 0)?);
    let imgs = group.generators.iter().map(|&s| gma.element(&chi1.values[s], &[], &[], &chi2.values[s])).collect();
    let res = (crate::extgroups::residual_character(chi1, group)?, crate::extgroups::residual_character(chi2, group)?);
    gma_algebra(&GmaRep::new(gma, group.clone(), imgs, res)?)
}

fn suite_mod_to_ch(
    algebras: &[(String, ChAlgebra)],
    saturated: &[(String, Character, Character, Arc<FiniteGroup>)],
    conds: &[ConditionSpec],
) -> Tally {
    let mut all: Vec<(String, Result<ChAlgebra>)> = algebras.iter().map(|(l, ch)| (l.clone(), Ok(ch.clone()))).collect();
    all.extend(saturated.iter().map(|(l, c1, c2, g)| (format!("{l}/diagonal"), diagonal_algebra(c1, c2, g))));
    let parts: Vec<Tally> = all
        .par_iter()
        .map(|(label, ch)| {
            let mut t = Tally::default();
            let ch = match ch {
                Ok(ch) => ch,
                Err(e) => {
                    t.fail(format!("{label}: {e}"));
                    return t;
                }
            };
            let modules = ChModule::regular(ch).and_then(|n| Ok(vec![("E+E", double(ch, &n)?), ("E", n)]));
            let modules = match modules {
                Ok(m) => m,
                Err(e) => {
                    t.error(label, e);
                    return t;
                }
            };
            for (name, n) in &modules {
                let mut faithful = false;
                for c in conds.iter().filter(|c| applies(c, &ch.group)) {
                    match module_condition_equiv(ch, n, c) {
                        Ok((a, b)) => {
                            faithful = true;
                            t.check(a == b, || format!("{label} {name} {}: module says {a}, algebra says {b}", c.label()));
                        }
                        Err(e) if matches!(e.root(), Error::NotFaithful(_)) => {
                            t.skip("not_faithful");
                            break;
                        }
                        Err(e) => t.error(&format!("{label} {name} {}", c.label()), e),
                    }
                }
                if faithful {
                    t.count("faithful_modules", 1);
                    if *name == "E+E" {
                        t.count("faithful_direct_sums", 1);
                    }
                }
            }
            t
        })
        .collect();
    fold(parts)
}

// --- reducibility and the census ---

fn suite_reducibility(reps: &[(String, GmaRep)]) -> Tally {
    let parts: Vec<Tally> = reps
        .par_iter()
        .map(|(label, rep)| {
            let mut t = Tally::default();
            let (tr, det) = rep.tables();
            let r = find_reducible_split(&rep.gma.ring, &rep.group, &tr, &det, (&rep.residual.0, &rep.residual.1)).map(|split| {
                let zero = rep.off_diagonal_ideal().is_zero();
                t.count(if zero { "reducible" } else { "irreducible" }, 1);
                split.is_some() == zero
            });
            t.outcome(label, r);
            t
        })
        .collect();
    fold(parts)
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusLine {
    pub group: String,
    pub residual_pairs: usize,
    pub members: usize,
    pub reducible: usize,
    pub hom_order: u128,
}

/// Reducible members of the dual-number census for each distinct residual
/// pair, with |Hom(G, F_p)|.
pub fn census_lines(p: u64) -> Result<Vec<CensusLine>> {
    let fp = Arc::new(FiniteRing::fp(p));
    let dual = ring_family(p, p * p).into_iter().find(|(n, _)| n == "F_p[e]").map(|(_, r)| r).ok_or(Error::Invalid("no dual numbers".into()))?;
    CENSUS_GROUPS
        .iter()
        .map(|name| {
            let g = Arc::new(group_family(name).expect("census group"));
            let hom_order = h1(Arc::new(GModule::trivial(fp.clone(), g.clone(), 1)))?.order();
            let chars = Character::all(fp.clone(), &g)?;
            let mut line = CensusLine { group: name.to_string(), residual_pairs: 0, members: 0, reducible: 0, hom_order };
            for (i, r1) in chars.iter().enumerate() {
                for r2 in &chars[i + 1..] {
                    line.residual_pairs += 1;
                    let laws = enumerate_psdef_dim2(&dual, &g, (r1, r2))?;
                    line.members += laws.len();
                    for law in &laws {
                        if find_reducible_split(&dual, &g, &law.t, &law.dt, (r1, r2))?.is_some() {
                            line.reducible += 1;
                        }
                    }
                }
            }
            Ok(line)
        })
        .collect()
}

fn suite_census(p: u64) -> Tally {
    let mut t = Tally::default();
    match census_lines(p) {
        Ok(lines) => {
            for l in lines {
                if l.residual_pairs == 0 {
                    t.skip("no_distinct_residuals");
                    continue;
                }
                let expect = l.residual_pairs as u128 * l.hom_order * l.hom_order;
                t.check(l.reducible as u128 == expect, || format!("{}: {} reducible, expected {expect}", l.group, l.reducible));
                t.count("members", l.members as u64);
            }
        }
        Err(e) => t.error("census", e),
    }
    t
}

// --- extensions ---

fn constituents_have(c: &ConditionSpec, chi1: &Character, chi2: &Character, g: &Arc<FiniteGroup>) -> Result<bool> {
    Ok(evaluate(c, &GModule::from_character(chi1, g.clone())?)? && evaluate(c, &GModule::from_character(chi2, g.clone())?)?)
}

fn suite_ext_bridge(saturated: &[(String, Character, Character, Arc<FiniteGroup>)], conds: &[ConditionSpec]) -> Tally {
    let parts: Vec<Tally> = saturated
        .par_iter()
        .map(|(label, chi1, chi2, g)| {
            let mut t = Tally::default();
            let rep = match saturated_gma(chi1, chi2, g.clone()) {
                Ok(r) => r,
                Err(e) => {
                    t.error(label, e);
                    return t;
                }
            };
            let m = AModule::free(chi1.ring.clone(), 1);
            let full = match bridge_report(&rep, &m, &ConditionSpec::Everything) {
                Ok(r) => r,
                Err(e) => {
                    t.error(label, e);
                    return t;
                }
            };
            let bijective = full.bijective() && full.hom_order == full.ext_order;
            if bijective {
                t.count("bijective_instances", 1);
            }
            t.check(bijective, || {
                format!("{label}: |Hom| = {}, |Ext| = {}, |image| = {}", full.hom_order, full.ext_order, full.image_order)
            });
            let mut conditioned = false;
            for c in conds.iter().filter(|c| **c != ConditionSpec::Everything && applies(c, g)) {
                match constituents_have(c, chi1, chi2, g) {
                    Ok(true) => {}
                    Ok(false) => {
                        t.skip("constituents");
                        continue;
                    }
                    Err(e) => {
                        t.error(label, e);
                        continue;
                    }
                }
                match verify_bc_exts(&rep, &m, c) {
                    Ok(r) => {
                        t.check(true, String::new);
                        conditioned = true;
                        if r.ext_c_order < full.ext_order && r.hom_order < full.hom_order {
                            t.count("strictly_smaller", 1);
                        }
                    }
                    Err(e) => t.error(&format!("{label} {}", c.label()), e),
                }
            }
            if conditioned {
                t.count("conditioned_instances", 1);
            }
            t
        })
        .collect();
    fold(parts)
}

fn selmer_conditions(conds: &[ConditionSpec]) -> Vec<ConditionSpec> {
    let mut out: Vec<ConditionSpec> = conds.iter().filter(|c| matches!(c, ConditionSpec::FiberProduct { .. })).cloned().collect();
    for extra in [
        ConditionSpec::unramified_at(&["H"]),
        ConditionSpec::FiberProduct {
            parts: vec![("H".into(), ConditionSpec::trivial_on("G")), ("G".into(), ConditionSpec::ExponentAtMost { k: 1 })],
        },
    ] {
        if !out.contains(&extra) {
            out.push(extra);
        }
    }
    out
}

fn selmer_check(space: &crate::extgroups::ExtSpace, c: &ConditionSpec) -> Result<Option<bool>> {
    let ConditionSpec::FiberProduct { parts } = c else { return Ok(None) };
    let global = match ext1_with_condition(space, c) {
        Ok(s) => s,
        Err(e) if matches!(e.root(), Error::ConstituentNotInC(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let locals = parts.iter().map(|(h, ci)| local_condition(space, h, ci)).collect::<Result<Vec<_>>>()?;
    Ok(Some(selmer_kernel(space, &locals)? == global))
}

fn suite_selmer(
    modules: &[(String, Arc<GModule>)],
    saturated: &[(String, Character, Character, Arc<FiniteGroup>)],
    conds: &[ConditionSpec],
) -> Tally {
    let conds = selmer_conditions(conds);
    let mut instances: Vec<(String, Character, Arc<GModule>)> = Vec::new();
    for (label, v) in modules.iter().filter(|(_, v)| v.order() <= SELMER_MODULE_LIMIT) {
        if let Ok(chars) = Character::all(v.ring().clone(), &v.group) {
            for chi in chars.into_iter().take(2) {
                instances.push((label.clone(), chi, v.clone()));
            }
        }
    }
    for (label, chi1, chi2, g) in saturated {
        if let Ok(w) = GModule::from_character(chi1, g.clone()) {
            instances.push((label.clone(), chi2.clone(), Arc::new(w)));
        }
    }
    let parts: Vec<Tally> = instances
        .par_iter()
        .map(|(label, chi2, w)| {
            let mut t = Tally::default();
            let space = match ext1(chi2, w.clone()) {
                Ok(s) => s,
                Err(e) => {
                    t.error(label, e);
                    return t;
                }
            };
            for c in conds.iter().filter(|c| applies(c, &w.group)) {
                match selmer_check(&space, c) {
                    Ok(Some(ok)) => t.check(ok, || format!("{label} {}: Selmer kernel differs", c.label())),
                    Ok(None) => t.skip("constituents"),
                    Err(e) => t.error(&format!("{label} {}", c.label()), e),
                }
            }
            t
        })
        .collect();
    fold(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::corpus::{generate_corpus, CorpusSpec};

    #[test]
    fn residual_oracle_vanishes_on_split_gma() {
        let a = Arc::new(FiniteRing::zmod(3, 2));
        let g = GmaData::split(a, 1, 1).unwrap();
        for x in g.additive_group().elements().take(500) {
            assert!(is_zero_elt(&g, &gma_residual(&g, &x)));
        }
    }

    #[test]
    fn small_corpus_passes() {
        let spec = CorpusSpec { modules: 4, gmas: 3, reps: 3, saturated: 2, ..CorpusSpec::default_for(5) };
        let corpus = generate_corpus(&spec).unwrap();
        let report = verify_theorems(&corpus, &default_conditions());
        assert!(report.all_pass, "{}", report.summary());
    }

    #[test]
    fn census_matches_hom_counts() {
        let lines = census_lines(3).unwrap();
        let s3 = lines.iter().find(|l| l.group == "S3").unwrap();
        assert_eq!((s3.residual_pairs, s3.hom_order, s3.reducible), (1, 1, 1));
        assert!(lines.iter().filter(|l| l.group != "S3").all(|l| l.residual_pairs == 0));
    }
}

//! Stable conditions on finite A[G]-modules, the maximal quotient V ↦ V^𝒞,
//! stability audits and Artinian towers.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exactalg::abgroup::{AbGroup, Subgroup};
use crate::exactalg::linalg::{identity, Mat};
use crate::exactalg::ring::{is_local, Ideal};
use crate::grouprep::{FiniteGroup, GModule, GroupData, ModuleQuotient};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionSpec {
    TrivialOn { subgroup: String },
    FiberProduct { parts: Vec<(String, ConditionSpec)> },
    ExponentAtMost { k: u32 },
    Everything,
    Plugin {
        name: String,
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default)]
        declared_stable: bool,
    },
}

impl ConditionSpec {
    pub fn trivial_on(h: &str) -> ConditionSpec {
        ConditionSpec::TrivialOn { subgroup: h.to_string() }
    }

    /// Fiber product of "trivial on Hᵢ" conditions.
    pub fn unramified_at(hs: &[&str]) -> ConditionSpec {
        ConditionSpec::FiberProduct { parts: hs.iter().map(|h| (h.to_string(), ConditionSpec::trivial_on(h))).collect() }
    }

    pub fn has_plugin(&self) -> bool {
        match self {
            ConditionSpec::Plugin { .. } => true,
            ConditionSpec::FiberProduct { parts } => parts.iter().any(|(_, c)| c.has_plugin()),
            _ => false,
        }
    }

    /// Checks that every referenced subgroup exists.
    pub fn validate(&self, group: &FiniteGroup) -> Result<()> {
        match self {
            ConditionSpec::TrivialOn { subgroup } => group.subgroup(subgroup).map(|_| ()),
            ConditionSpec::FiberProduct { parts } => {
                for (h, c) in parts {
                    let (sub, _) = group.induced_subgroup(group.subgroup(h)?)?;
                    c.validate(&sub)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("condition serialises")))
    }

    pub fn label(&self) -> String {
        match self {
            ConditionSpec::TrivialOn { subgroup } => format!("TrivialOn({subgroup})"),
            ConditionSpec::FiberProduct { parts } => {
                let inner: Vec<String> = parts.iter().map(|(h, c)| format!("{h}:{}", c.label())).collect();
                format!("FiberProduct[{}]", inner.join(", "))
            }
            ConditionSpec::ExponentAtMost { k } => format!("ExponentAtMost({k})"),
            ConditionSpec::Everything => "Everything".into(),
            ConditionSpec::Plugin { name, .. } => format!("Plugin({name})"),
        }
    }
}

fn is_identity(add: &AbGroup, m: &Mat) -> bool {
    let id = identity(add.rank());
    m.iter().zip(&id).enumerate().all(|(i, (a, b))| {
        let o = add.order_at(i);
        a.iter().zip(b).all(|(x, y)| x % o == y % o)
    })
}

/// Does V satisfy 𝒞?
pub fn evaluate(c: &ConditionSpec, v: &GModule) -> Result<bool> {
    match c {
        ConditionSpec::Everything => Ok(true),
        ConditionSpec::ExponentAtMost { k } => Ok(v.add().exps.iter().all(|e| e <= k)),
        ConditionSpec::TrivialOn { subgroup } => {
            let h = v.group.subgroup(subgroup)?;
            Ok(h.iter().all(|&g| is_identity(v.add(), v.action(g))))
        }
        ConditionSpec::FiberProduct { parts } => {
            for (h, ci) in parts {
                if !evaluate(ci, &v.restrict(h)?)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ConditionSpec::Plugin { name, command, args, .. } => {
            if v.rank() == 0 {
                return Ok(true);
            }
            run_plugin(name, command, args, v)
        }
    }
}

#[derive(Serialize)]
struct PluginPayload {
    p: u64,
    exps: Vec<u32>,
    group: GroupData,
    gen_action: Vec<Mat>,
}

static PLUGIN_LOCK: Mutex<()> = Mutex::new(());
static PLUGIN_MEMO: Mutex<Option<HashMap<String, bool>>> = Mutex::new(None);
static PLUGIN_CACHE_DIR: Mutex<Option<PathBuf>> = Mutex::new(None);
static PLUGIN_RUNS: AtomicU64 = AtomicU64::new(0);
static PLUGIN_HITS: AtomicU64 = AtomicU64::new(0);

/// Directory for persistent plugin verdicts (None disables disk caching).
pub fn set_plugin_cache_dir(dir: Option<PathBuf>) {
    *PLUGIN_CACHE_DIR.lock().unwrap() = dir;
}

/// Clears the in-memory plugin memo.
pub fn clear_plugin_memo() {
    *PLUGIN_MEMO.lock().unwrap() = None;
}

/// (executions, cache hits) since start.
pub fn plugin_stats() -> (u64, u64) {
    (PLUGIN_RUNS.load(Ordering::Relaxed), PLUGIN_HITS.load(Ordering::Relaxed))
}

fn run_plugin(name: &str, command: &str, args: &[String], v: &GModule) -> Result<bool> {
    let z = v.forget_scalars();
    let payload = PluginPayload { p: z.add().p, exps: z.add().exps.clone(), group: z.group.data(), gen_action: z.gen_action.clone() };
    let body = serde_json::to_vec(&payload).expect("payload serialises");
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update([0]);
    h.update(command.as_bytes());
    for a in args {
        h.update([0]);
        h.update(a.as_bytes());
    }
    h.update([0]);
    h.update(&body);
    let key = hex::encode(h.finalize());

    // one plugin process at a time; the memo is consulted under the lock
    let _guard = PLUGIN_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(&hit) = PLUGIN_MEMO.lock().unwrap().get_or_insert_with(HashMap::new).get(&key) {
        PLUGIN_HITS.fetch_add(1, Ordering::Relaxed);
        return Ok(hit);
    }
    let dir = PLUGIN_CACHE_DIR.lock().unwrap().clone();
    if let Some(d) = &dir {
        let path = d.join(format!("plugin-{key}"));
        if let Ok(s) = std::fs::read_to_string(&path) {
            match s.as_str() {
                "true" | "false" => {
                    let b = s == "true";
                    PLUGIN_MEMO.lock().unwrap().get_or_insert_with(HashMap::new).insert(key, b);
                    PLUGIN_HITS.fetch_add(1, Ordering::Relaxed);
                    return Ok(b);
                }
                _ => {
                    let _ = std::fs::remove_file(&path);
                }
            }
        }
    }
    let fail = |reason: String| Error::PluginFailure { name: name.to_string(), reason };
    let mut file = tempfile::NamedTempFile::new().map_err(|e| fail(e.to_string()))?;
    file.write_all(&body).map_err(|e| fail(e.to_string()))?;
    file.flush().map_err(|e| fail(e.to_string()))?;
    PLUGIN_RUNS.fetch_add(1, Ordering::Relaxed);
    let out = Command::new(command).args(args).arg(file.path()).output().map_err(|e| fail(e.to_string()))?;
    if !out.status.success() {
        return Err(fail(format!("exit status {}", out.status)));
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let text = text.strip_suffix('\n').unwrap_or(&text);
    let verdict = match text {
        "true" => true,
        "false" => false,
        other => return Err(fail(format!("unexpected output {other:?}"))),
    };
    PLUGIN_MEMO.lock().unwrap().get_or_insert_with(HashMap::new).insert(key.clone(), verdict);
    if let Some(d) = dir {
        let _ = std::fs::create_dir_all(&d);
        if let Ok(mut tmp) = tempfile::NamedTempFile::new_in(&d) {
            if tmp.write_all(verdict.to_string().as_bytes()).is_ok() {
                let _ = tmp.persist(d.join(format!("plugin-{key}")));
            }
        }
    }
    Ok(verdict)
}

/// Quotients above this order use the closed forms for built-in conditions.
pub const LATTICE_LIMIT: u128 = 729;

/// V^𝒞 with its projection f_V.
pub fn max_quotient_with_c(v: &Arc<GModule>, c: &ConditionSpec) -> Result<ModuleQuotient> {
    let k = if c.has_plugin() || v.order() <= LATTICE_LIMIT { kernel_by_lattice(v, c)? } else { kernel_closed_form(v, c)? };
    v.quotient_module(&k)
}

/// K = ⋂ of the minimal W with V/W ∈ 𝒞, from the full submodule lattice.
pub fn kernel_by_lattice(v: &Arc<GModule>, c: &ConditionSpec) -> Result<Subgroup> {
    let subs = v.all_submodules()?;
    let mut valid = Vec::new();
    for w in &subs {
        if w.is_whole() || evaluate(c, &v.quotient_module(w)?.module)? {
            valid.push(w.clone());
        }
    }
    let minimal: Vec<&Subgroup> =
        valid.iter().filter(|w| !valid.iter().any(|u| u != *w && u.is_subset(w))).collect();
    let mut k = Subgroup::whole(v.add());
    for w in &minimal {
        k = k.intersect(w);
    }
    if minimal.len() > 1 && !evaluate(c, &v.quotient_module(&k)?.module)? {
        return Err(Error::NotStable(format!("{} has no largest quotient of this module", c.label())));
    }
    Ok(k)
}

/// K for built-in conditions, without enumerating submodules.
pub fn kernel_closed_form(v: &GModule, c: &ConditionSpec) -> Result<Subgroup> {
    let add = v.add();
    let basis: Vec<Vec<u64>> = (0..add.rank())
        .map(|i| {
            let mut e = add.zero();
            e[i] = 1;
            e
        })
        .collect();
    match c {
        ConditionSpec::Everything => Ok(Subgroup::zero(add)),
        ConditionSpec::ExponentAtMost { k } => {
            let pk = add.p.pow(*k.min(&add.top_exp()));
            Ok(v.span(&basis.iter().map(|e| add.scale(pk, e)).collect::<Vec<_>>()))
        }
        ConditionSpec::TrivialOn { subgroup } => {
            let h = v.group.subgroup(subgroup)?;
            let gens = v.group.generating_set(h);
            let mut rows = Vec::new();
            for &g in &gens {
                for e in &basis {
                    rows.push(add.sub(&v.act(g, e), e));
                }
            }
            Ok(v.span(&rows))
        }
        ConditionSpec::FiberProduct { parts } => {
            let mut rows = Vec::new();
            for (h, ci) in parts {
                let r = v.restrict(h)?;
                rows.extend(kernel_closed_form(&r, ci)?.generators());
            }
            Ok(v.span(&rows))
        }
        ConditionSpec::Plugin { name, .. } => {
            Err(Error::PluginFailure { name: name.clone(), reason: "plugin conditions need the lattice method".into() })
        }
    }
}

/// H-coinvariants V/⟨(h−1)v⟩ computed directly, as the kernel subgroup.
pub fn coinvariant_kernel(v: &GModule, h: &[usize]) -> Subgroup {
    let add = v.add();
    let mut rows = Vec::new();
    for &g in h {
        for x in add.elements() {
            rows.push(add.sub(&v.act(g, &x), &x));
        }
    }
    v.span(&rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_hash: String,
    pub corpus_hash: String,
    pub verdicts: Vec<bool>,
    pub stable: bool,
    pub counterexample: Option<String>,
}

/// Falsification search for stability on a corpus.
pub fn audit_stability(c: &ConditionSpec, corpus: &[Arc<GModule>]) -> Result<ConditionReport> {
    let mut h = Sha256::new();
    for v in corpus {
        h.update(serde_json::to_vec(&v.data()).expect("module serialises"));
    }
    let corpus_hash = hex::encode(h.finalize());
    let mut verdicts = Vec::with_capacity(corpus.len());
    for v in corpus {
        verdicts.push(evaluate(c, v)?);
    }
    let mut counterexample = None;
    'outer: for (i, v) in corpus.iter().enumerate() {
        if !verdicts[i] {
            continue;
        }
        let subs = v.all_submodules()?;
        for w2 in &subs {
            let (sub, incl) = v.submodule(w2)?;
            let sub = Arc::new(sub);
            for w1 in subs.iter().filter(|w1| w1.is_subset(w2)) {
                let pre = w1
                    .generators()
                    .iter()
                    .map(|x| crate::exactalg::solve_linear(sub.add(), v.add(), &incl, x).particular.expect("w1 inside w2"))
                    .collect::<Vec<_>>();
                let inner = Subgroup::span(sub.add(), &pre);
                let sq = sub.quotient_module(&inner)?;
                if !evaluate(c, &sq.module)? {
                    counterexample = Some(format!("module {i}: subquotient of orders {}/{} fails", w2.order(), w1.order()));
                    break 'outer;
                }
            }
        }
    }
    if counterexample.is_none() {
        'pairs: for (i, a) in corpus.iter().enumerate() {
            for (j, b) in corpus.iter().enumerate().skip(i) {
                if !verdicts[i] || !verdicts[j] || a.group != b.group || a.ring() != b.ring() {
                    continue;
                }
                let s = GModule::direct_sum(&[a, b])?;
                if !evaluate(c, &s)? {
                    counterexample = Some(format!("direct sum of modules {i} and {j} fails"));
                    break 'pairs;
                }
            }
        }
    }
    Ok(ConditionReport {
        condition_hash: c.hash(),
        corpus_hash,
        verdicts,
        stable: counterexample.is_none(),
        counterexample,
    })
}

/// M/mⁱM for i = 1..e, where e is the nilpotency index of the maximal ideal.
pub fn artinian_levels(m: &Arc<GModule>) -> Result<Vec<ModuleQuotient>> {
    let a = m.ring();
    let max = is_local(a)?.ok_or(Error::NotLocal)?;
    let e = max.nilpotency_index(a).expect("maximal ideal of a finite local ring is nilpotent");
    let mut out = Vec::new();
    for i in 1..=e {
        let mi = max.power(a, i);
        out.push(m.quotient_module(&ideal_times_module(m, &mi))?);
    }
    Ok(out)
}

/// I·M as a subgroup of M.
pub fn ideal_times_module(m: &GModule, i: &Ideal) -> Subgroup {
    let add = m.add();
    let mut rows = Vec::new();
    for a in i.basis.generators() {
        for j in 0..add.rank() {
            let mut e = add.zero();
            e[j] = 1;
            rows.push(m.base.smul(&a, &e));
        }
    }
    Subgroup::span(add, &rows)
}

/// Per-level verdicts of M/mⁱM ∈ 𝒞.
pub fn artinian_verdicts(m: &Arc<GModule>, c: &ConditionSpec) -> Result<Vec<bool>> {
    artinian_levels(m)?.iter().map(|q| evaluate(c, &q.module)).collect()
}

pub fn has_c_artinian(m: &Arc<GModule>, c: &ConditionSpec) -> Result<bool> {
    Ok(artinian_verdicts(m, c)?.into_iter().all(|b| b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::FiniteRing;
    use crate::grouprep::Character;

    fn f3() -> Arc<FiniteRing> {
        Arc::new(FiniteRing::fp(3))
    }

    #[test]
    fn trivial_on_whole_group_rejects_nontrivial_character() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let sign = Character::from_generators(f3(), &g, &[vec![2]]).unwrap();
        let v = GModule::from_character(&sign, g).unwrap();
        assert!(!evaluate(&ConditionSpec::trivial_on("G"), &v).unwrap());
        assert!(evaluate(&ConditionSpec::trivial_on("1"), &v).unwrap());
    }

    #[test]
    fn regular_module_not_unramified() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = GModule::regular(f3(), g).unwrap();
        let c = ConditionSpec::FiberProduct { parts: vec![("G".into(), ConditionSpec::trivial_on("G"))] };
        assert!(!evaluate(&c, &v).unwrap());
    }

    #[test]
    fn coinvariants_of_regular_module() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = Arc::new(GModule::regular(f3(), g).unwrap());
        let c = ConditionSpec::trivial_on("G");
        let q = max_quotient_with_c(&v, &c).unwrap();
        assert_eq!(q.module.order(), 3);
        assert!(evaluate(&c, &q.module).unwrap());
        assert_eq!(kernel_closed_form(&v, &c).unwrap(), kernel_by_lattice(&v, &c).unwrap());
        assert_eq!(coinvariant_kernel(&v, &[0, 1, 2]), kernel_by_lattice(&v, &c).unwrap());
    }

    #[test]
    fn everything_keeps_module() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = Arc::new(GModule::regular(f3(), g).unwrap());
        let q = max_quotient_with_c(&v, &ConditionSpec::Everything).unwrap();
        assert_eq!(q.module.order(), 27);
    }

    #[test]
    fn artinian_tower_detects_unipotent_mod_nine() {
        let z9 = Arc::new(FiniteRing::zmod(3, 2));
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = Arc::new(GModule::from_matrix_rep(z9, g, &[vec![vec![vec![4]]]]).unwrap());
        let c = ConditionSpec::trivial_on("G");
        assert_eq!(artinian_verdicts(&v, &c).unwrap(), vec![true, false]);
        assert!(!has_c_artinian(&v, &c).unwrap());
    }

    #[test]
    fn non_local_ring_is_rejected() {
        let r = Arc::new(FiniteRing::product(&FiniteRing::fp(3), &FiniteRing::fp(3)).unwrap());
        let g = Arc::new(FiniteGroup::cyclic(1));
        let v = Arc::new(GModule::trivial(r, g, 1));
        assert_eq!(has_c_artinian(&v, &ConditionSpec::Everything), Err(Error::NotLocal));
    }

    #[test]
    fn exponent_condition_on_z9() {
        let z9 = Arc::new(FiniteRing::zmod(3, 2));
        let g = Arc::new(FiniteGroup::cyclic(1));
        let v = Arc::new(GModule::trivial(z9, g, 1));
        let c = ConditionSpec::ExponentAtMost { k: 1 };
        let q = max_quotient_with_c(&v, &c).unwrap();
        assert_eq!(q.module.order(), 3);
        let rep = audit_stability(&c, &[v]).unwrap();
        assert!(rep.stable);
        assert_eq!(rep.verdicts, vec![false]);
    }

    #[test]
    fn condition_round_trips_through_json() {
        let c = ConditionSpec::unramified_at(&["N1"]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ConditionSpec>(&s).unwrap(), c);
    }
}

//! Executing sessions and writing report bundles.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::chalg::{ch_quotient, e_with_condition, ChAlgebra};
use crate::conditions::{audit_stability, has_c_artinian, max_quotient_with_c, LATTICE_LIMIT};
use crate::error::{Error, Result};
use crate::exactalg::{AbGroup, FiniteRing, Ideal, Subgroup};
use crate::extgroups::{ext1, ext1_with_condition, h1, local_condition, selmer_kernel, verify_bc_exts, ExtSubspace};
use crate::gma::{gma_with_condition, GmaRep};
use crate::grouprep::{AModule, GModule};
use crate::guard;
use crate::pseudorep::{enumerate_psdef_dim2, find_reducible_split};

use super::cache::{cache_key, canonical, sha256_hex, Cache, CacheStats, Lookup, ARTIFACT_VERSION};
use super::session::{parse_session, resolve, Command, Env, Session};

/// Overrides from the command line; `None` defers to the session's limits.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub max_order: Option<u64>,
    pub jobs: Option<usize>,
    pub allow_p2: Option<bool>,
    pub paranoid: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandResult {
    pub index: usize,
    pub op: String,
    pub output: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandProvenance {
    pub index: usize,
    pub op: String,
    pub cache: Lookup,
    pub witness_extensions: Vec<String>,
    pub guards: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub artifact_version: String,
    pub session_hash: String,
    pub limits: Value,
    pub cache: CacheStats,
    pub plugin_runs: u64,
    pub commands: Vec<CommandProvenance>,
    pub error: Option<String>,
}

/// Everything a run produces; `results` and `summary` are deterministic.
#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub results: Value,
    pub summary: String,
    pub provenance: Provenance,
    pub timings: Value,
}

impl ReportBundle {
    pub fn results_json(&self) -> String {
        pretty_canonical(&self.results)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.json"), self.results_json())?;
        std::fs::write(dir.join("summary.txt"), &self.summary)?;
        std::fs::write(dir.join("provenance.json"), pretty_canonical(&serde_json::to_value(&self.provenance).expect("provenance")))?;
        std::fs::write(dir.join("timings.json"), pretty_canonical(&self.timings))?;
        Ok(())
    }
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn pretty_canonical(v: &Value) -> String {
    let sorted: Value = serde_json::from_str(&canonical(v)).expect("canonical JSON reparses");
    let mut s = serde_json::to_string_pretty(&sorted).expect("value prints");
    s.push('\n');
    s
}

fn sub_json(s: &Subgroup) -> Value {
    json!({ "order": s.order().to_string(), "rows": s.rows })
}

fn ideal_json(i: &Ideal) -> Value {
    json!({ "order": i.basis.order().to_string(), "basis": i.basis.rows })
}

fn ring_json(r: &FiniteRing) -> Value {
    json!({ "order": r.order().to_string(), "basis_orders": r.orders() })
}

fn module_json(m: &GModule) -> Value {
    json!({
        "order": m.order().to_string(),
        "exps": m.add().exps,
        "ring_action": m.base.ring_action,
        "gen_action": m.gen_action,
    })
}

fn ext_json(sub: &ExtSubspace) -> Value {
    json!({ "order": sub.order().to_string(), "cocycles": sub_json(&sub.z) })
}

fn group_json(g: &AbGroup) -> Value {
    json!({ "order": g.order().to_string(), "exps": g.exps })
}

struct Outcome {
    output: Value,
    witness_extensions: Vec<String>,
}

impl From<Value> for Outcome {
    fn from(output: Value) -> Self {
        Outcome { output, witness_extensions: Vec::new() }
    }
}

fn ch_check_json(ch: &ChAlgebra) -> Result<Outcome> {
    let checks = ch.verify_cayley_hamilton()?;
    let witness_extensions = checks.iter().map(|c| format!("{}:{:?}", c.carrier, c.mode)).collect();
    let output = json!({
        "algebra_order": ch.algebra.order().to_string(),
        "dimension": ch.dim(),
        "checks": checks.iter().map(|c| json!({"carrier": c.carrier, "mode": format!("{:?}", c.mode)})).collect::<Vec<_>>(),
    });
    Ok(Outcome { output, witness_extensions })
}

fn reducibility_json(rep: &GmaRep) -> Result<Value> {
    let (t, dt) = rep.tables();
    let split = find_reducible_split(&rep.gma.ring, &rep.group, &t, &dt, (&rep.residual.0, &rep.residual.1))?;
    Ok(json!({
        "reducibility_ideal": ideal_json(&rep.gma.reducibility_ideal()),
        "off_diagonal_ideal": ideal_json(&rep.off_diagonal_ideal()),
        "reducible": split.is_some(),
        "split": split.map(|s| json!({"chi1": s.chi1.values, "chi2": s.chi2.values})),
    }))
}

fn execute(env: &Env, cmd: &Command) -> Result<Outcome> {
    Ok(match cmd {
        Command::Vc { module, condition } => {
            let v = env.module(module)?;
            let q = max_quotient_with_c(v, env.condition(condition)?)?;
            json!({ "quotient": module_json(&q.module), "kernel": sub_json(&q.map.kernel()), "projection": q.map.matrix }).into()
        }
        Command::HasC { module, condition } => json!({ "has_c": has_c_artinian(env.module(module)?, env.condition(condition)?)? }).into(),
        Command::Submodules { module } => {
            let subs = env.module(module)?.all_submodules()?;
            json!({ "count": subs.len(), "submodules": subs.iter().map(sub_json).collect::<Vec<_>>() }).into()
        }
        Command::Audit { condition, modules } => {
            let ms = modules.iter().map(|m| env.module(m).cloned()).collect::<Result<Vec<Arc<GModule>>>>()?;
            serde_json::to_value(audit_stability(env.condition(condition)?, &ms)?).expect("report").into()
        }
        Command::H1 { module } => {
            let cs = h1(env.module(module)?.clone())?;
            json!({ "order": cs.order().to_string(), "h1": group_json(&cs.h1.group), "cocycles": sub_json(&cs.z1), "coboundaries": sub_json(&cs.b1) }).into()
        }
        Command::Ext1 { character, module } => {
            let e = ext1(&env.character(character)?.0, env.module(module)?.clone())?;
            json!({ "order": e.order().to_string(), "ext1": group_json(&e.cocycles.h1.group) }).into()
        }
        Command::Ext1C { character, module, condition } => {
            let e = ext1(&env.character(character)?.0, env.module(module)?.clone())?;
            let sub = ext1_with_condition(&e, env.condition(condition)?)?;
            json!({ "ext1_order": e.order().to_string(), "with_condition": ext_json(&sub) }).into()
        }
        Command::Selmer { character, module, locals } => {
            let e = ext1(&env.character(character)?.0, env.module(module)?.clone())?;
            let ls = locals.iter().map(|l| local_condition(&e, &l.subgroup, env.condition(&l.condition)?)).collect::<Result<Vec<_>>>()?;
            let sub = selmer_kernel(&e, &ls)?;
            json!({ "ext1_order": e.order().to_string(), "selmer": ext_json(&sub) }).into()
        }
        Command::Census { ring, group, residual } => {
            let a = env.ring(ring)?;
            let g = env.group(group)?;
            let (r1, r2) = (&env.character(&residual[0])?.0, &env.character(&residual[1])?.0);
            let laws = enumerate_psdef_dim2(a, g, (r1, r2))?;
            let mut reducible = 0usize;
            for l in &laws {
                if find_reducible_split(a, g, &l.t, &l.dt, (r1, r2))?.is_some() {
                    reducible += 1;
                }
            }
            json!({
                "count": laws.len(),
                "reducible": reducible,
                "laws": laws.iter().map(|l| json!({"t": l.t, "dt": l.dt})).collect::<Vec<_>>(),
            })
            .into()
        }
        Command::ChCheck { algebra } => ch_check_json(env.ch_algebra(algebra)?)?,
        Command::ChQuotient { algebra, ideal } => {
            let ch = env.ch_algebra(algebra)?;
            let i = ch.algebra.two_sided_ideal(ideal);
            let q = ch_quotient(ch, &i)?;
            json!({
                "ideal": sub_json(&i),
                "j": ideal_json(&q.j),
                "scalars": ring_json(&q.scalars.ring),
                "kernel": sub_json(&q.kernel),
                "quotient_order": q.ch.algebra.order().to_string(),
            })
            .into()
        }
        Command::EWithCondition { algebra, condition } => {
            let ch = env.ch_algebra(algebra)?;
            let q = e_with_condition(ch, env.condition(condition)?)?;
            json!({
                "j": ideal_json(&q.j),
                "scalars": ring_json(&q.scalars.ring),
                "kernel": sub_json(&q.kernel),
                "quotient_order": q.ch.algebra.order().to_string(),
            })
            .into()
        }
        Command::Reducibility { gma } => reducibility_json(env.gma(gma)?)?.into(),
        Command::GmaWithCondition { gma, condition } => {
            let g = gma_with_condition(env.gma(gma)?, env.condition(condition)?)?;
            json!({
                "scalar_kernel": ideal_json(&g.scalar_kernel),
                "scalars": ring_json(&g.rep.gma.ring),
                "b_order": g.rep.gma.b.order().to_string(),
                "c_order": g.rep.gma.c.order().to_string(),
                "reducibility_ideal": ideal_json(&g.reducible.j),
            })
            .into()
        }
        Command::Bridge { gma, condition, rank } => {
            let rep = env.gma(gma)?;
            let m = AModule::free(rep.gma.ring.clone(), *rank);
            let r = verify_bc_exts(rep, &m, env.condition(condition)?)?;
            json!({
                "hom_order": r.hom_order.to_string(),
                "ext_order": r.ext_order.to_string(),
                "ext_c_order": r.ext_c_order.to_string(),
                "bijective": r.bijective(),
                "basis_images": r.basis_images,
            })
            .into()
        }
    })
}

fn apply_limits(s: &Session, opts: &RunOptions) -> Value {
    let max_order = opts.max_order.or(s.limits.max_order).unwrap_or(guard::DEFAULT_MAX_ORDER);
    let allow_p2 = opts.allow_p2.or(s.limits.allow_p2).unwrap_or(false);
    let paranoid = opts.paranoid.or(s.limits.paranoid).unwrap_or(false);
    guard::set_max_order(max_order);
    guard::set_allow_p2(allow_p2);
    guard::set_paranoid(paranoid);
    json!({ "max_order": max_order, "allow_p2": allow_p2, "paranoid": paranoid })
}

fn summary_line(r: &CommandResult, cmd: &Command) -> String {
    let key = ["order", "count", "has_c", "bijective", "reducible", "quotient_order"]
        .iter()
        .find_map(|k| r.output.get(*k).map(|v| format!("{k}={v}")))
        .or_else(|| r.output.get("quotient").and_then(|q| q.get("order")).map(|v| format!("quotient order={v}")))
        .or_else(|| r.output.get("with_condition").or(r.output.get("selmer")).and_then(|q| q.get("order")).map(|v| format!("subspace order={v}")))
        .or_else(|| r.output.get("stable").map(|v| format!("stable={v}")))
        .or_else(|| r.output.get("checks").map(|_| "cayley-hamilton ok".to_string()))
        .unwrap_or_default();
    format!("[{}] {}: {} -> {}", r.index, r.op, cmd.describe(), key)
}

/// Runs a parsed session. On an operation error the bundle still holds the
/// completed commands, and the error is returned with the command index.
pub fn run_parsed(s: &Session, opts: &RunOptions) -> (ReportBundle, Option<Error>) {
    let limits = apply_limits(s, opts);
    let session_hash = sha256_hex(canonical(s).as_bytes());
    let cache = match Cache::new(opts.cache_dir.as_deref()) {
        Ok(c) => c,
        Err(e) => return (empty_bundle(&session_hash, limits), Some(e)),
    };
    crate::conditions::set_plugin_cache_dir(opts.cache_dir.as_ref().map(|d| d.join("plugins")));
    let env = match resolve(s) {
        Ok(env) => env,
        Err(e) => return (empty_bundle(&session_hash, limits), Some(e)),
    };
    let jobs = opts.jobs.or(s.limits.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    let (plugin_before, _) = crate::conditions::plugin_stats();

    let mut declarations = serde_json::to_value(s).expect("session serialises");
    if let Value::Object(m) = &mut declarations {
        m.remove("commands");
        m.remove("limits");
    }
    let plugin_audits = audit_plugins(&env);
    let mut results = Vec::new();
    let mut prov = Vec::new();
    let mut timings = Vec::new();
    let mut error = None;
    for (index, cmd) in s.commands.iter().enumerate() {
        let start = Instant::now();
        let inputs = json!({ "declarations": declarations, "command": cmd, "allow_p2": limits["allow_p2"], "paranoid": limits["paranoid"] });
        let key = cache_key(cmd.name(), &inputs);
        let mut witness = Vec::new();
        let out = pool.install(|| {
            cache.get_or_compute(&key, || {
                let o = execute(&env, cmd)?;
                witness = o.witness_extensions.clone();
                Ok(o.output)
            })
        });
        timings.push(json!({ "index": index, "op": cmd.name(), "seconds": start.elapsed().as_secs_f64() }));
        match out {
            Ok((output, lookup)) => {
                if lookup == Lookup::Hit {
                    if let Command::ChCheck { algebra } = cmd {
                        witness = output["checks"].as_array().map_or_else(Vec::new, |cs| {
                            cs.iter().map(|c| format!("{}:{}", c["carrier"].as_str().unwrap_or(""), c["mode"].as_str().unwrap_or(""))).collect()
                        });
                        let _ = algebra;
                    }
                }
                prov.push(CommandProvenance { index, op: cmd.name().into(), cache: lookup, witness_extensions: witness, guards: Vec::new() });
                results.push(CommandResult { index, op: cmd.name().into(), output });
            }
            Err(e) => {
                let guards = match e.root() {
                    Error::SizeLimitExceeded { .. } => vec![e.root().to_string()],
                    _ => Vec::new(),
                };
                let cache_state = if cache.enabled() { Lookup::Miss } else { Lookup::Disabled };
                prov.push(CommandProvenance { index, op: cmd.name().into(), cache: cache_state, witness_extensions: witness, guards });
                error = Some(e.context(format!("command {index} ({})", cmd.name())));
                break;
            }
        }
    }
    let summary = {
        let mut lines = vec![format!("session {session_hash}"), format!("{} of {} commands completed", results.len(), s.commands.len())];
        for a in &plugin_audits {
            lines.push(match (&a["error"], a["stable"].as_bool()) {
                (Value::String(e), _) => format!("plugin condition {}: audit failed: {e}", a["condition"]),
                (_, Some(true)) => format!("plugin condition {}: stable on {} modules", a["condition"], a["modules"]),
                _ => format!("plugin condition {}: UNSTABLE, {}", a["condition"], a["counterexample"]),
            });
        }
        for r in &results {
            lines.push(summary_line(r, &s.commands[r.index]));
        }
        if let Some(e) = &error {
            lines.push(format!("error: {e}"));
        }
        lines.join("\n") + "\n"
    };
    let (plugin_after, _) = crate::conditions::plugin_stats();
    let bundle = ReportBundle {
        results: json!({
            "artifact_version": ARTIFACT_VERSION,
            "session_hash": session_hash,
            "results": results,
            "plugin_audits": plugin_audits,
            "error": error.as_ref().map(|e| e.to_string()),
        }),
        summary,
        provenance: Provenance {
            artifact_version: ARTIFACT_VERSION.into(),
            session_hash,
            limits,
            cache: cache.stats(),
            plugin_runs: plugin_after - plugin_before,
            commands: prov,
            error: error.as_ref().map(|e| e.to_string()),
        },
        timings: json!({ "commands": timings }),
    };
    (bundle, error)
}

/// Stability audit of every plugin condition on the declared modules small
/// enough for lattice enumeration; a declared-stable flag is never trusted.
fn audit_plugins(env: &Env) -> Vec<Value> {
    env.conditions
        .iter()
        .filter(|(_, c)| c.has_plugin())
        .map(|(name, c)| {
            let modules: Vec<Arc<GModule>> =
                env.modules.values().filter(|v| v.order() <= LATTICE_LIMIT && c.validate(&v.group).is_ok()).cloned().collect();
            match audit_stability(c, &modules) {
                Ok(r) => json!({ "condition": name, "modules": modules.len(), "stable": r.stable, "counterexample": r.counterexample }),
                Err(e) => json!({ "condition": name, "modules": modules.len(), "error": e.to_string() }),
            }
        })
        .collect()
}

fn empty_bundle(session_hash: &str, limits: Value) -> ReportBundle {
    ReportBundle {
        results: json!({ "artifact_version": ARTIFACT_VERSION, "session_hash": session_hash, "results": [] }),
        summary: String::new(),
        provenance: Provenance {
            artifact_version: ARTIFACT_VERSION.into(),
            session_hash: session_hash.into(),
            limits,
            cache: CacheStats::default(),
            plugin_runs: 0,
            commands: Vec::new(),
            error: None,
        },
        timings: json!({ "commands": [] }),
    }
}

/// Parses, runs and writes the bundle to `opts.out_dir` if set.
pub fn run_session(path: &Path, opts: &RunOptions) -> Result<ReportBundle> {
    let text = std::fs::read_to_string(path)?;
    let s = parse_session(&text)?;
    let (bundle, err) = run_parsed(&s, opts);
    if let Some(dir) = &opts.out_dir {
        if !bundle.summary.is_empty() {
            bundle.write(dir)?;
        }
    }
    match err {
        Some(e) => Err(e),
        None => Ok(bundle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(commands: &str) -> Session {
        let text = format!(
            r#"{{"version": 1, "prime": 3,
            "rings": {{"A": {{"kind": "zmod", "n": 1}}}},
            "groups": {{"S": {{"kind": "symmetric", "n": 3}}, "Z": {{"kind": "cyclic", "n": 3}}}},
            "characters": {{"sgn": {{"ring": "A", "group": "S", "values": [[2], [1]]}},
                            "one": {{"ring": "A", "group": "S", "values": [[1], [1]]}}}},
            "modules": {{"V": {{"kind": "regular", "ring": "A", "group": "Z"}},
                         "T": {{"kind": "character", "character": "one"}}}},
            "conditions": {{"C": {{"kind": "trivial_on", "subgroup": "G"}}, "Alt": {{"kind": "trivial_on", "subgroup": "A"}}}},
            "commands": {commands}}}"#
        );
        parse_session(&text).unwrap()
    }

    #[test]
    fn empty_command_list() {
        let (b, err) = run_parsed(&session("[]"), &RunOptions::default());
        assert!(err.is_none());
        assert_eq!(b.results["results"], json!([]));
    }

    #[test]
    fn vc_reports_coinvariants() {
        let (b, err) = run_parsed(&session(r#"[{"op": "vc", "module": "V", "condition": "C"}]"#), &RunOptions::default());
        assert!(err.is_none());
        assert_eq!(b.results["results"][0]["output"]["quotient"]["order"], json!("3"));
    }

    #[test]
    fn cache_does_not_change_results() {
        let s = session(r#"[{"op": "h1", "module": "V"}, {"op": "ext1_c", "character": "sgn", "module": "T", "condition": "Alt"}]"#);
        let dir = tempfile::tempdir().unwrap();
        let cached = RunOptions { cache_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() };
        let (plain, _) = run_parsed(&s, &RunOptions::default());
        let (first, _) = run_parsed(&s, &cached);
        let (second, _) = run_parsed(&s, &cached);
        assert_eq!(plain.results_json(), first.results_json());
        assert_eq!(first.results_json(), second.results_json());
        assert_eq!(second.provenance.cache.hits, 2);
        assert_eq!(second.results["results"][1]["output"]["with_condition"]["order"], json!("1"));
    }
}

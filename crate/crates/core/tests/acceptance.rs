//! One PASS/FAIL line per acceptance criterion on the default corpus.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use psdef::conditions::ConditionSpec;
use psdef::exactalg::{quotient_ring, FiniteRing, Ideal};
use psdef::extgroups::h1;
use psdef::gma::GmaData;
use psdef::grouprep::{FiniteGroup, GModule};
use psdef::workbench::run::pretty_canonical;
use psdef::workbench::verify::census_lines;
use psdef::workbench::{default_conditions, generate_corpus, verify_theorems, CorpusSpec, TheoremReport};

const SEED: u64 = 0;

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn suite_ok(r: &TheoremReport, name: &str) -> (bool, String) {
    match r.suite(name) {
        Some(s) => {
            let mut d = format!("{name}: {}/{} passed, {} skipped", s.passed, s.checked, s.skipped);
            if let Some(f) = s.failures.first() {
                d += &format!(", first failure: {f}");
            }
            (s.ok() && s.checked > 0, d)
        }
        None => (false, format!("{name}: missing")),
    }
}

fn stat(r: &TheoremReport, suite: &str, key: &str) -> u64 {
    r.suite(suite).map_or(0, |s| s.stat(key))
}

fn stat_prefix(r: &TheoremReport, suite: &str, prefix: &str) -> u64 {
    r.suite(suite).map_or(0, |s| s.stats.iter().filter(|(k, _)| k.starts_with(prefix)).map(|(_, v)| v).sum())
}

fn gma_cayley_hamilton(r: &TheoremReport, ring_orders: &[u128]) -> Line {
    let (ok, d) = suite_ok(r, "gma_cayley_hamilton");
    let small = ring_orders.iter().filter(|&&o| o <= 81).count();
    let on_e = stat_prefix(r, "gma_cayley_hamilton", "e_");
    let on_dual = stat_prefix(r, "gma_cayley_hamilton", "dual_numbers_");
    line(
        ok && small >= 50 && small == ring_orders.len() && on_e >= 50 && on_dual >= 50,
        format!("{d}; {small} GMAs over rings of order <= 81, checked on E: {on_e}, on E⊗dual numbers: {on_dual}"),
    )
}

fn vc_universal(r: &TheoremReport, module_orders: &[u128]) -> Line {
    let (ok, d) = suite_ok(r, "vc_universal");
    let wanted = [
        ConditionSpec::trivial_on("H").label(),
        ConditionSpec::ExponentAtMost { k: 1 }.label(),
        ConditionSpec::FiberProduct { parts: vec![("H".into(), ConditionSpec::trivial_on("G"))] }.label(),
    ];
    let stable = wanted.iter().all(|w| r.audits.iter().any(|a| &a.condition == w && a.stable));
    let in_range = module_orders.iter().filter(|&&o| o <= 625).count();
    let withheld = stat(r, "vc_universal", "conditions_withheld_unstable");
    line(
        ok && stable && withheld == 0 && in_range > 0,
        format!("{d}; {in_range} modules with |V| <= 625, required conditions audited stable: {stable}"),
    )
}

fn ch_quotient(r: &TheoremReport) -> Line {
    let (ok, d) = suite_ok(r, "ch_quotient");
    let algebras = stat(r, "ch_quotient", "algebras");
    let three = stat(r, "ch_quotient", "algebras_with_3_ideals");
    let reps = stat(r, "ch_quotient", "reps");
    line(ok && three >= 20, format!("{d}; {three} of {algebras} algebras with >= 3 ideals, {reps} representations"))
}

fn e_with_condition(r: &TheoremReport) -> Line {
    let (ok, d) = suite_ok(r, "e_with_condition");
    line(ok, d)
}

fn mod_to_ch(r: &TheoremReport) -> Line {
    let (ok, d) = suite_ok(r, "mod_to_ch");
    let faithful = stat(r, "mod_to_ch", "faithful_modules");
    let sums = stat(r, "mod_to_ch", "faithful_direct_sums");
    line(ok && faithful >= 30 && sums > 0, format!("{d}; {faithful} faithful modules, {sums} of them E⊕E"))
}

fn reducibility(r: &TheoremReport) -> Line {
    let (ok, d) = suite_ok(r, "reducibility");
    let red = stat(r, "reducibility", "reducible");
    let irr = stat(r, "reducibility", "irreducible");
    line(ok && red + irr >= 30, format!("{d}; {red} reducible, {irr} irreducible"))
}

fn census(r: &TheoremReport) -> Line {
    let (ok, d) = suite_ok(r, "census");
    let lines = match census_lines(3) {
        Ok(l) => l,
        Err(e) => return line(false, format!("census failed: {e}")),
    };
    let mut parts = Vec::new();
    let mut all = ok;
    for l in &lines {
        let hom2 = l.hom_order * l.hom_order;
        if l.residual_pairs == 0 {
            // no two distinct characters G → F₃^×, so the census is empty
            all &= l.members == 0 && l.reducible == 0;
            parts.push(format!("{}: no distinct residual pair (|Hom|^2 = {hom2})", l.group));
        } else {
            all &= l.reducible as u128 == l.residual_pairs as u128 * hom2;
            parts.push(format!("{}: {} reducible of {} members, |Hom|^2 = {hom2}", l.group, l.reducible, l.members));
        }
    }
    line(all, format!("{d}; {}", parts.join("; ")))
}

fn ext_bridges(r: &TheoremReport) -> Line {
    let (ok_a, da) = suite_ok(r, "ext_bridge");
    let (ok_b, db) = suite_ok(r, "selmer");
    let bij = stat(r, "ext_bridge", "bijective_instances");
    let cond = stat(r, "ext_bridge", "conditioned_instances");
    let smaller = stat(r, "ext_bridge", "strictly_smaller");
    line(
        ok_a && ok_b && bij >= 10 && cond >= 5 && smaller >= 1,
        format!("{da}; {db}; (a) {bij} bijective, (c) {cond} conditioned instances, {smaller} strictly smaller on both sides"),
    )
}

fn regression() -> Line {
    let fp = Arc::new(FiniteRing::fp(3));
    let c3 = Arc::new(FiniteGroup::cyclic(3));
    let subs = GModule::regular(fp.clone(), c3.clone()).and_then(|v| v.all_submodules());
    let (count, chain) = match &subs {
        Ok(s) => (s.len(), s.iter().all(|a| s.iter().all(|b| a.is_subset(b) || b.is_subset(a)))),
        Err(_) => (0, false),
    };
    let h = h1(Arc::new(GModule::trivial(fp, c3, 1))).map(|c| c.order()).unwrap_or(0);
    let z9 = Arc::new(FiniteRing::zmod(3, 2));
    let q = quotient_ring(&z9, &Ideal::generated(&z9, &[vec![3]]));
    let is_f3 = q.ring.order() == 3 && q.ring.orders() == [3] && q.ring.one() == vec![1];
    line(count == 4 && chain && h == 3 && is_f3, format!("{count} submodules, chain: {chain}; |H¹| = {h}; Z/9/(3) = F3: {is_f3}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let spec = CorpusSpec::default_for(SEED);
    let corpus = match generate_corpus(&spec) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL corpus generation: {e}");
            return ExitCode::FAILURE;
        }
    };
    let ring_orders: Vec<u128> = corpus.gmas.iter().filter_map(|g| GmaData::from_spec(&g.spec).ok()).map(|d| d.ring.order()).collect();
    let module_orders: Vec<u128> = corpus.modules.iter().filter_map(|m| GModule::from_data(&m.data).ok()).map(|v| v.order()).collect();
    let conditions = default_conditions();
    let report = verify_theorems(&corpus, &conditions);
    let first = pretty_canonical(&serde_json::to_value(&report).expect("report serialises"));
    let verify_secs = start.elapsed().as_secs_f64();

    let again = generate_corpus(&spec).map(|c| verify_theorems(&c, &conditions));
    let second = again.map(|r| pretty_canonical(&serde_json::to_value(&r).expect("report serialises")));
    let same = second.as_ref().map_or(false, |s| *s == first);

    let lines = [
        ("1 GMA Cayley-Hamilton", gma_cayley_hamilton(&report, &ring_orders)),
        ("2 V^C universal property", vc_universal(&report, &module_orders)),
        ("3 CH quotient factorization", ch_quotient(&report)),
        ("4 E^C characterization", e_with_condition(&report)),
        ("5 ModToCH", mod_to_ch(&report)),
        ("6 reducibility", reducibility(&report)),
        ("7 Artinian reducible census", census(&report)),
        ("8 Ext bridges", ext_bridges(&report)),
        ("9 exact-arithmetic regression", regression()),
        ("10 determinism", line(same, format!("results.json of {} bytes, identical across two runs: {same}", first.len()))),
    ];
    let mut failed = 0;
    for (name, l) in &lines {
        println!("{} {name}: {}", if l.ok { "PASS" } else { "FAIL" }, l.detail);
        failed += usize::from(!l.ok);
    }
    println!("verify {verify_secs:.1}s, total {:.1}s, seed {SEED}", start.elapsed().as_secs_f64());
    if failed > 0 {
        print!("{}", report.summary());
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

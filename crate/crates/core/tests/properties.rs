use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use psdef::conditions::{coinvariant_kernel, kernel_by_lattice, kernel_closed_form, max_quotient_with_c, ConditionSpec};
use psdef::exactalg::{extend_scalars, quotient_ring, solve_linear, AbGroup, ExtensionKind, FiniteAlgebra, FiniteRing, Ideal, Mat, Subgroup};
use psdef::extgroups::h1;
use psdef::grouprep::{FiniteGroup, GModule};
use psdef::pseudorep::PsRep;
use psdef::workbench::{generate_corpus, CorpusSpec};

const P: u64 = 3;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn abgroup() -> impl Strategy<Value = AbGroup> {
    prop::collection::vec(1u32..=2, 1..=3).prop_map(|exps| AbGroup::new(P, exps))
}

fn vector(g: &AbGroup, seed: &[u64]) -> Vec<u64> {
    g.reduce(&seed[..g.rank()])
}

fn rings() -> Vec<Arc<FiniteRing>> {
    let fp = Arc::new(FiniteRing::fp(P));
    let z9 = Arc::new(FiniteRing::zmod(P, 2));
    let t3 = extend_scalars(&fp, ExtensionKind::TruncatedPoly(3)).unwrap().0;
    let z9e = extend_scalars(&z9, ExtensionKind::DualNumbers).unwrap().0;
    vec![Arc::new(FiniteRing::zmod(P, 3)), t3, z9e]
}

/// A quotient of F₃[Cₙ] ⊕ F₃^t by the submodule spanned by one vector.
fn module(n: usize, trivial: usize, seed: &[u64]) -> Arc<GModule> {
    let fp = Arc::new(FiniteRing::fp(P));
    let g = Arc::new(FiniteGroup::cyclic(n));
    let reg = GModule::regular(fp.clone(), g.clone()).unwrap();
    let v = if trivial == 0 { reg } else { GModule::direct_sum(&[&reg, &GModule::trivial(fp, g, trivial)]).unwrap() };
    let v = Arc::new(v);
    let w = v.span(&[vector(v.add(), seed)]);
    v.quotient_module(&w).unwrap().module
}

fn module_strategy() -> impl Strategy<Value = Arc<GModule>> {
    (prop::sample::select(vec![(2usize, 0usize), (2, 1), (3, 0), (3, 1), (4, 0)]), prop::collection::vec(0u64..9, 8))
        .prop_map(|((n, t), seed)| module(n, t, &seed))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn howell_form_is_canonical(g in abgroup(), gens in prop::collection::vec(prop::collection::vec(0u64..27, 3), 1..4), mix in prop::collection::vec(0u64..27, 4)) {
        let gens: Vec<Vec<u64>> = gens.iter().map(|x| vector(&g, x)).collect();
        let mut other: Vec<Vec<u64>> = gens.iter().rev().cloned().collect();
        let combo = gens.iter().zip(&mix).fold(g.zero(), |acc, (x, &c)| g.add(&acc, &g.scale(c, x)));
        other.push(combo);
        other[0] = g.add(&other[0], &g.scale(mix[3], other.last().unwrap()));
        other.push(g.zero());
        // other = (reversed gens) with a multiple of a combination added to one entry, plus zero
        prop_assert_eq!(Subgroup::span(&g, &gens).rows, Subgroup::span(&g, &other).rows);
    }

    #[test]
    fn solve_linear_matches_enumeration(src in abgroup(), dst in abgroup(), raw in prop::collection::vec(0u64..9, 9), target in prop::collection::vec(0u64..9, 3)) {
        let m: Mat = (0..dst.rank())
            .map(|j| {
                (0..src.rank())
                    .map(|i| {
                        let lift = P.pow(dst.exps[j].saturating_sub(src.exps[i]));
                        raw[3 * j + i] * lift % P.pow(dst.exps[j])
                    })
                    .collect()
            })
            .collect();
        prop_assume!(src.is_hom(&dst, &m));
        let b = vector(&dst, &target);
        let hits = src.elements().filter(|x| AbGroup::apply(&dst, &m, x) == b).count() as u128;
        let sol = solve_linear(&src, &dst, &m, &b);
        match sol.particular {
            Some(x) => {
                prop_assert_eq!(AbGroup::apply(&dst, &m, &x), b);
                prop_assert_eq!(hits, sol.kernel.order());
            }
            None => prop_assert_eq!(hits, 0),
        }
        let ker = src.elements().filter(|x| dst.is_zero(&AbGroup::apply(&dst, &m, x))).count() as u128;
        prop_assert_eq!(ker, sol.kernel.order());
    }

    #[test]
    fn nested_quotients_compose(which in 0usize..3, x in prop::collection::vec(0u64..27, 4), y in prop::collection::vec(0u64..27, 4)) {
        let r = rings()[which].clone();
        let x = r.group().reduce(&x[..r.rank()]);
        let y = r.group().reduce(&y[..r.rank()]);
        let i = Ideal::generated(&r, &[x.clone()]);
        let j = Ideal::generated(&r, &[x, y]);
        let ri = quotient_ring(&r, &i);
        let j_mod_i: Vec<_> = j.basis.generators().iter().map(|g| ri.proj.apply(g)).collect();
        let jbar = Ideal::generated(&ri.ring, &j_mod_i);
        let rij = quotient_ring(&ri.ring, &jbar);
        let rj = quotient_ring(&r, &j);
        prop_assert_eq!(rij.ring.order(), rj.ring.order());
        let composite = ri.proj.compose(&rij.proj);
        prop_assert!(composite.is_surjective());
        prop_assert!(composite.kernel().same(&j));
        let kernel: BTreeSet<_> = r.elements().filter(|e| rij.ring.is_zero(&composite.apply(e))).collect();
        prop_assert_eq!(kernel.len() as u128, j.basis.order());
    }

    #[test]
    fn truncation_then_quotient_by_t_recovers_ring(which in 0usize..3, n in 2usize..4) {
        let r = rings()[which].clone();
        let (ext, incl) = extend_scalars(&r, ExtensionKind::TruncatedPoly(n)).unwrap();
        let k = r.rank();
        let mut t = vec![0; ext.rank()];
        t[k..2 * k].copy_from_slice(&r.one());
        let q = quotient_ring(&ext, &Ideal::generated(&ext, &[t]));
        prop_assert_eq!(q.ring.order(), r.order());
        let back = incl.compose(&q.proj);
        prop_assert!(back.is_surjective());
        prop_assert!(back.kernel().is_zero());
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn submodule_lattice_is_closed(v in module_strategy()) {
        let subs = v.all_submodules().unwrap();
        let set: BTreeSet<_> = subs.iter().map(|s| s.rows.clone()).collect();
        prop_assert!(set.contains(&Subgroup::zero(v.add()).rows));
        prop_assert!(set.contains(&Subgroup::whole(v.add()).rows));
        for a in &subs {
            prop_assert!(v.is_submodule(a));
            for b in &subs {
                prop_assert!(set.contains(&a.sum(b).rows));
                prop_assert!(set.contains(&a.intersect(b).rows));
            }
        }
    }

    #[test]
    fn direct_sum_lattice_contains_products(v in module_strategy(), seed in prop::collection::vec(0u64..9, 8)) {
        let w = module(v.group.order(), 0, &seed);
        prop_assume!(v.order() * w.order() <= 729);
        let s = GModule::direct_sum(&[&v, &w]).unwrap();
        let (a, b, c) = (v.all_submodules().unwrap().len(), w.all_submodules().unwrap().len(), s.all_submodules().unwrap().len());
        prop_assert!(c >= a * b, "{} < {}·{}", c, a, b);
    }

    #[test]
    fn quotient_lattice_is_the_upper_interval(v in module_strategy(), pick in 0usize..64) {
        let subs = v.all_submodules().unwrap();
        let w = &subs[pick % subs.len()];
        let q = v.quotient_module(w).unwrap();
        let above = subs.iter().filter(|x| w.is_subset(x)).count();
        let pulled: BTreeSet<_> = q
            .module
            .all_submodules()
            .unwrap()
            .iter()
            .map(|u| {
                let lifts: Vec<Vec<u64>> = u.generators().iter().map(|y| AbGroup::apply(v.add(), &q.section, y)).collect();
                v.span(&lifts).sum(w).rows
            })
            .collect();
        prop_assert_eq!(pulled.len(), above);
        prop_assert!(pulled.iter().all(|rows| subs.iter().any(|s| &s.rows == rows)));
    }

    #[test]
    fn maximal_quotient_is_idempotent_and_matches_coinvariants(v in module_strategy(), cond in 0usize..3) {
        let c = [ConditionSpec::trivial_on("G"), ConditionSpec::ExponentAtMost { k: 1 }, ConditionSpec::Everything][cond].clone();
        let q = max_quotient_with_c(&v, &c).unwrap();
        let again = max_quotient_with_c(&q.module, &c).unwrap();
        prop_assert!(again.map.kernel().is_zero());
        prop_assert_eq!(kernel_by_lattice(&v, &c).unwrap().rows, kernel_closed_form(&v, &c).unwrap().rows);
        if cond == 0 {
            let all: Vec<usize> = (0..v.group.order()).collect();
            prop_assert_eq!(q.map.kernel().rows, coinvariant_kernel(&v, &all).rows);
        }
    }

    #[test]
    fn h1_matches_cocycle_enumeration(v in module_strategy()) {
        let n = v.group.order();
        let order = v.order();
        prop_assume!(order.pow(n as u32) <= 1_000_000);
        let add = v.add();
        let elems: Vec<Vec<u64>> = add.elements().collect();
        // cocycles are determined by f(g) on a generator of the cyclic group
        let gen = 1;
        let mut cocycles = 0u128;
        for x in &elems {
            let mut f = vec![add.zero(); n];
            let mut g = 0;
            for _ in 0..n {
                let next = v.group.mul(g, gen);
                f[next] = add.add(&f[g], &v.act(g, x));
                g = next;
            }
            if add.is_zero(&f[0]) {
                cocycles += 1;
            }
        }
        let fixed = elems.iter().filter(|m| add.sub(&v.act(gen, m), m).iter().all(|&c| c == 0)).count() as u128;
        let coboundaries = order / fixed;
        prop_assert_eq!(h1(v.clone()).unwrap().order(), cocycles / coboundaries);
    }

    #[test]
    fn determinant_is_multiplicative_and_trace_central(which in 0usize..2, x in prop::collection::vec(0u64..27, 12), y in prop::collection::vec(0u64..27, 12)) {
        let r = rings()[which].clone();
        let alg = FiniteAlgebra::matrix_algebra(r.clone(), 2).unwrap();
        let law = PsRep::det_on_matrix_algebra(&alg, 2);
        let reduce = |v: &[u64]| alg.group.reduce(&v.iter().cycle().take(alg.rank()).copied().collect::<Vec<_>>());
        let (x, y) = (reduce(&x), reduce(&y));
        let xy = alg.mul(&x, &y);
        let yx = alg.mul(&y, &x);
        prop_assert_eq!(law.eval(&xy), r.mul(&law.eval(&x), &law.eval(&y)));
        prop_assert_eq!(law.trace(&alg.group, &xy), law.trace(&alg.group, &yx));
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn sampled_gmas_are_cayley_hamilton(seed in any::<u64>()) {
        let spec = CorpusSpec { modules: 0, gmas: 3, reps: 0, saturated: 0, ..CorpusSpec::default_for(seed) };
        let corpus = generate_corpus(&spec).unwrap();
        for g in &corpus.gmas {
            let data = psdef::gma::GmaData::from_spec(&g.spec).unwrap();
            let alg = data.algebra().unwrap();
            let law = data.law(&alg);
            for x in alg.elements() {
                let cp = law.char_poly(&alg.group, &x);
                let x2 = alg.mul(&x, &x);
                let tx = alg.smul(&cp.lambdas[1], &x);
                let d = alg.scalar(&cp.lambdas[2]);
                prop_assert!(alg.is_zero(&alg.add(&alg.sub(&x2, &tx), &d)), "{}", g.label);
            }
        }
    }
}

//! Finite A-modules and A[G]-modules given by additive presentations and
//! action matrices (column convention).

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group::{FiniteGroup, GroupData};
use crate::error::{Error, Result};
use crate::exactalg::abgroup::{from_columns, mat_mul, quotient, solve_linear, AbGroup, Subgroup};
use crate::exactalg::linalg::{identity, Mat};
use crate::exactalg::ring::{validate_ring, FiniteRing, RingData, RingElt, RingHom};
use crate::guard;

/// Σ c·m into `acc`, entries reduced by the row orders of `target`.
pub fn mat_add_scaled(target: &AbGroup, acc: &mut Mat, c: u64, m: &Mat) {
    if c == 0 {
        return;
    }
    for (i, row) in acc.iter_mut().enumerate() {
        let o = target.order_at(i);
        for (j, x) in row.iter_mut().enumerate() {
            *x = (*x + (m[i][j] % o) * (c % o)) % o;
        }
    }
}

fn mat_eq(g: &AbGroup, a: &Mat, b: &Mat) -> bool {
    a.iter().zip(b).enumerate().all(|(i, (ra, rb))| {
        let o = g.order_at(i);
        ra.iter().zip(rb).all(|(x, y)| x % o == y % o)
    })
}

fn block_diag(blocks: &[&Mat], sizes: &[usize]) -> Mat {
    let n: usize = sizes.iter().sum();
    let mut m = vec![vec![0; n]; n];
    let mut off = 0;
    for (b, &s) in blocks.iter().zip(sizes) {
        for i in 0..s {
            for j in 0..s {
                m[off + i][off + j] = b[i][j];
            }
        }
        off += s;
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AModule {
    pub ring: Arc<FiniteRing>,
    pub add: AbGroup,
    pub ring_action: Vec<Mat>,
}

impl AModule {
    pub fn new(ring: Arc<FiniteRing>, add: AbGroup, ring_action: Vec<Mat>) -> Result<AModule> {
        if ring_action.len() != ring.rank() {
            return Err(Error::Invalid("one action matrix per ring basis element expected".into()));
        }
        for m in &ring_action {
            if !add.is_hom(&add, m) {
                return Err(Error::OrderMismatch(0, 0, 0, "ring action matrix is not additive".into()));
            }
        }
        let v = AModule { ring, add, ring_action };
        if !mat_eq(&v.add, &v.ring_matrix(&v.ring.one()), &identity(v.add.rank())) {
            return Err(Error::BadUnit(0));
        }
        let r = &v.ring;
        for s in 0..r.rank() {
            for t in 0..r.rank() {
                let lhs = mat_mul(&v.add, &v.ring_action[s], &v.ring_action[t]);
                let rhs = v.ring_matrix(&r.mul(&r.basis(s), &r.basis(t)));
                if !mat_eq(&v.add, &lhs, &rhs) {
                    return Err(Error::Invalid(format!("ring action not multiplicative at ({s}, {t})")));
                }
            }
        }
        Ok(v)
    }

    /// A^n with coordinate r, ring basis i at index r·k + i.
    pub fn free(ring: Arc<FiniteRing>, n: usize) -> AModule {
        let k = ring.rank();
        let add = ring.group().power(n);
        let action = (0..k)
            .map(|s| {
                let l = ring.lmul_matrix(&ring.basis(s));
                let blocks: Vec<&Mat> = (0..n).map(|_| &l).collect();
                block_diag(&blocks, &vec![k; n])
            })
            .collect();
        AModule { ring, add, ring_action: action }
    }

    pub fn zero(ring: Arc<FiniteRing>) -> AModule {
        let k = ring.rank();
        AModule { ring: ring.clone(), add: AbGroup::new(ring.prime(), vec![]), ring_action: vec![vec![]; k] }
    }

    pub fn rank(&self) -> usize {
        self.add.rank()
    }

    pub fn order(&self) -> u128 {
        self.add.order()
    }

    /// Matrix of v ↦ a·v.
    pub fn ring_matrix(&self, a: &[u64]) -> Mat {
        let n = self.rank();
        let mut m = vec![vec![0; n]; n];
        for (s, &c) in a.iter().enumerate() {
            mat_add_scaled(&self.add, &mut m, c, &self.ring_action[s]);
        }
        m
    }

    pub fn smul(&self, a: &[u64], v: &[u64]) -> Vec<u64> {
        AbGroup::apply(&self.add, &self.ring_matrix(a), v)
    }

    /// Smallest subgroup containing `gens` and stable under every matrix in `ops`.
    pub fn closure_under(&self, gens: &[Vec<u64>], ops: &[&Mat]) -> Subgroup {
        let mut sub = Subgroup::span(&self.add, gens);
        loop {
            let g = sub.generators();
            let mut extra = Vec::new();
            for x in &g {
                for m in ops {
                    let y = AbGroup::apply(&self.add, m, x);
                    if !sub.contains(&y) {
                        extra.push(y);
                    }
                }
            }
            if extra.is_empty() {
                return sub;
            }
            let mut all = g;
            all.extend(extra);
            sub = Subgroup::span(&self.add, &all);
        }
    }

    /// A-submodule generated by `gens`.
    pub fn span(&self, gens: &[Vec<u64>]) -> Subgroup {
        let ops: Vec<&Mat> = self.ring_action.iter().collect();
        self.closure_under(gens, &ops)
    }

    pub fn is_submodule(&self, w: &Subgroup) -> bool {
        w.generators()
            .iter()
            .all(|g| self.ring_action.iter().all(|m| w.contains(&AbGroup::apply(&self.add, m, g))))
    }

    /// Standalone A-module on W with its inclusion matrix.
    pub fn submodule(&self, w: &Subgroup) -> Result<(AModule, Mat)> {
        if !self.is_submodule(w) {
            return Err(Error::NotStable("not an A-submodule".into()));
        }
        let (g, incl) = w.presentation();
        let action = self.ring_action.iter().map(|m| restrict_matrix(&self.add, &g, &incl, m)).collect();
        Ok((AModule { ring: self.ring.clone(), add: g, ring_action: action }, incl))
    }

    /// V/W with projection and section.
    pub fn quotient(&self, w: &Subgroup) -> Result<(AModule, Mat, Mat)> {
        if !self.is_submodule(w) {
            return Err(Error::NotStable("not an A-submodule".into()));
        }
        let q = quotient(&self.add, w);
        let action = self.ring_action.iter().map(|m| mat_mul(&q.group, &mat_mul(&q.group, &q.proj, m), &q.section)).collect();
        Ok((AModule { ring: self.ring.clone(), add: q.group.clone(), ring_action: action }, q.proj, q.section))
    }

    pub fn direct_sum(&self, other: &AModule) -> Result<AModule> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch("direct sum over different rings".into()));
        }
        let sizes = [self.rank(), other.rank()];
        let action = self.ring_action.iter().zip(&other.ring_action).map(|(a, b)| block_diag(&[a, b], &sizes)).collect();
        Ok(AModule { ring: self.ring.clone(), add: self.add.direct_sum(&other.add), ring_action: action })
    }

    /// All A-linear maps self → other.
    pub fn hom(&self, other: &AModule) -> HomSpace {
        let pairs: Vec<(&Mat, &Mat)> = self.ring_action.iter().zip(&other.ring_action).collect();
        HomSpace::solve(&self.add, &other.add, &pairs)
    }

    /// Extension of scalars along a surjection A → A/J: the module V/JV over A/J.
    pub fn base_change_quotient(&self, q: &crate::exactalg::ring::RingQuotient, j: &crate::exactalg::ring::Ideal) -> Result<(AModule, Mat, Mat)> {
        let mut rows = Vec::new();
        for a in j.basis.generators() {
            for i in 0..self.rank() {
                let mut e = vec![0; self.rank()];
                e[i] = 1;
                rows.push(self.smul(&a, &e));
            }
        }
        let jv = Subgroup::span(&self.add, &rows);
        let (m, proj, section) = self.quotient(&jv)?;
        let new_ring = q.ring.clone();
        let action = (0..new_ring.rank())
            .map(|s| {
                let lift = q.lift(&new_ring.basis(s));
                let inner = self.ring_matrix(&lift);
                mat_mul(&m.add, &mat_mul(&m.add, &proj, &inner), &section)
            })
            .collect();
        let out = AModule::new(new_ring, m.add, action)?;
        Ok((out, proj, section))
    }
}

/// Matrix of `m` restricted to a subgroup presented by `incl: G → V`.
pub fn restrict_matrix(v: &AbGroup, g: &AbGroup, incl: &Mat, m: &Mat) -> Mat {
    let cols: Vec<Vec<u64>> = (0..g.rank())
        .map(|j| {
            let col: Vec<u64> = incl.iter().map(|r| r[j]).collect();
            let img = AbGroup::apply(v, m, &col);
            solve_linear(g, v, incl, &img).particular.expect("subgroup is stable")
        })
        .collect();
    from_columns(g.rank(), &cols)
}

/// Solution space of X·S = T·X for X: src → dst.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub src: AbGroup,
    pub dst: AbGroup,
    pub unknowns: AbGroup,
    shifts: Vec<u64>,
    pub kernel: Subgroup,
}

impl HomSpace {
    pub fn solve(src: &AbGroup, dst: &AbGroup, pairs: &[(&Mat, &Mat)]) -> HomSpace {
        let (ns, nd) = (src.rank(), dst.rank());
        let p = src.p;
        let mut exps = Vec::with_capacity(ns * nd);
        let mut shifts = Vec::with_capacity(ns * nd);
        for i in 0..nd {
            for j in 0..ns {
                let (a, b) = (src.exps[j], dst.exps[i]);
                exps.push(a.min(b));
                shifts.push(p.pow(b.saturating_sub(a)));
            }
        }
        let unknowns = AbGroup::new(p, exps);
        let cons = dst.power(ns * pairs.len());
        let mut m = vec![vec![0u64; ns * nd]; cons.rank()];
        for (q, (s, t)) in pairs.iter().enumerate() {
            for c in 0..ns {
                for r in 0..nd {
                    let row = (q * ns + c) * nd + r;
                    let o = dst.order_at(r);
                    for j in 0..ns {
                        let u = r * ns + j;
                        let v = (shifts[u] % o) * (s[j][c] % o) % o;
                        m[row][u] = (m[row][u] + v) % o;
                    }
                    for i in 0..nd {
                        let u = i * ns + c;
                        let v = (shifts[u] % o) * (t[r][i] % o) % o;
                        m[row][u] = (m[row][u] + o - v) % o;
                    }
                }
            }
        }
        let kernel = if pairs.is_empty() {
            Subgroup::whole(&unknowns)
        } else {
            solve_linear(&unknowns, &cons, &m, &cons.zero()).kernel
        };
        HomSpace { src: src.clone(), dst: dst.clone(), unknowns, shifts, kernel }
    }

    pub fn to_matrix(&self, y: &[u64]) -> Mat {
        let ns = self.src.rank();
        (0..self.dst.rank())
            .map(|i| {
                let o = self.dst.order_at(i);
                (0..ns).map(|j| (y[i * ns + j] % o) * (self.shifts[i * ns + j] % o) % o).collect()
            })
            .collect()
    }

    pub fn order(&self) -> u128 {
        self.kernel.order()
    }

    pub fn basis(&self) -> Vec<Mat> {
        self.kernel.generators().iter().map(|y| self.to_matrix(y)).collect()
    }

    pub fn elements(&self) -> Result<Vec<Mat>> {
        guard::check("hom space", self.order())?;
        Ok(self.kernel.elements().iter().map(|y| self.to_matrix(y)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GModule {
    pub base: AModule,
    pub group: Arc<FiniteGroup>,
    pub gen_action: Vec<Mat>,
    action: Vec<Mat>,
}

impl GModule {
    pub fn new(base: AModule, group: Arc<FiniteGroup>, gen_action: Vec<Mat>) -> Result<GModule> {
        if gen_action.len() != group.generators.len() {
            return Err(Error::Invalid("one action matrix per group generator expected".into()));
        }
        let add = &base.add;
        for (gi, m) in gen_action.iter().enumerate() {
            if !add.is_hom(add, m) {
                return Err(Error::OrderMismatch(gi, gi, gi, "generator action is not additive".into()));
            }
            for (s, r) in base.ring_action.iter().enumerate() {
                if !mat_eq(add, &mat_mul(add, m, r), &mat_mul(add, r, m)) {
                    return Err(Error::Invalid(format!("generator {gi} does not commute with ring basis {s}")));
                }
            }
        }
        let n = group.order();
        let mut action: Vec<Option<Mat>> = vec![None; n];
        action[0] = Some(identity(add.rank()));
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, &s) in group.generators.iter().enumerate() {
                let y = group.mul(x, s);
                if action[y].is_none() {
                    action[y] = Some(mat_mul(add, action[x].as_ref().unwrap(), &gen_action[gi]));
                    queue.push_back(y);
                }
            }
        }
        let action: Vec<Mat> = action.into_iter().map(|m| m.expect("generators generate")).collect();
        for x in 0..n {
            for (gi, &s) in group.generators.iter().enumerate() {
                let lhs = &action[group.mul(x, s)];
                let rhs = mat_mul(add, &action[x], &gen_action[gi]);
                if !mat_eq(add, lhs, &rhs) {
                    return Err(Error::Invalid(format!("action violates a group relation at ({x}, generator {gi})")));
                }
            }
        }
        Ok(GModule { base, group, gen_action, action })
    }

    /// Builds the module from the action of every element (validated).
    pub fn from_element_action(base: AModule, group: Arc<FiniteGroup>, action: &[Mat]) -> Result<GModule> {
        let gens = group.generators.iter().map(|&g| action[g].clone()).collect();
        let v = GModule::new(base, group, gens)?;
        for (g, m) in action.iter().enumerate() {
            if !mat_eq(&v.base.add, m, &v.action[g]) {
                return Err(Error::Invalid(format!("element {g} acts inconsistently with the generators")));
            }
        }
        Ok(v)
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.base.ring
    }

    pub fn add(&self) -> &AbGroup {
        &self.base.add
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    pub fn order(&self) -> u128 {
        self.base.order()
    }

    pub fn action(&self, g: usize) -> &Mat {
        &self.action[g]
    }

    pub fn act(&self, g: usize, v: &[u64]) -> Vec<u64> {
        AbGroup::apply(self.add(), &self.action[g], v)
    }

    /// Trivial action on A^n.
    pub fn trivial(ring: Arc<FiniteRing>, group: Arc<FiniteGroup>, n: usize) -> GModule {
        let base = AModule::free(ring, n);
        let gens = vec![identity(base.rank()); group.generators.len()];
        GModule::new(base, group, gens).expect("trivial module")
    }

    /// Zero module.
    pub fn zero(ring: Arc<FiniteRing>, group: Arc<FiniteGroup>) -> GModule {
        GModule::trivial(ring, group, 0)
    }

    /// The regular module A[G], with a·g at index g·k + i.
    pub fn regular(ring: Arc<FiniteRing>, group: Arc<FiniteGroup>) -> Result<GModule> {
        let n = group.order();
        guard::check("regular module", guard::pow_sat(ring.order(), n as u64))?;
        let base = AModule::free(ring.clone(), n);
        let k = ring.rank();
        let gens = group
            .generators
            .iter()
            .map(|&s| {
                let mut m = vec![vec![0; n * k]; n * k];
                for g in 0..n {
                    let h = group.mul(s, g);
                    for i in 0..k {
                        m[h * k + i][g * k + i] = 1;
                    }
                }
                m
            })
            .collect();
        GModule::new(base, group, gens)
    }

    /// Module A^d with generator s acting by the d×d matrix `mats[s]` over A.
    pub fn from_matrix_rep(ring: Arc<FiniteRing>, group: Arc<FiniteGroup>, mats: &[Vec<Vec<RingElt>>]) -> Result<GModule> {
        let d = mats.first().map_or(0, |m| m.len());
        let base = AModule::free(ring.clone(), d);
        let gens = mats.iter().map(|m| block_matrix(&ring, m)).collect();
        GModule::new(base, group, gens)
    }

    pub fn from_character(chi: &Character, group: Arc<FiniteGroup>) -> Result<GModule> {
        let base = AModule::free(chi.ring.clone(), 1);
        let gens = group.generators.iter().map(|&g| chi.ring.lmul_matrix(&chi.values[g])).collect();
        GModule::new(base, group, gens)
    }

    pub fn tensor_with_character(&self, chi: &Character) -> Result<GModule> {
        if *self.ring() != chi.ring {
            return Err(Error::RingMismatch("character over a different ring".into()));
        }
        let gens = self
            .group
            .generators
            .iter()
            .map(|&g| mat_mul(self.add(), &self.action[g], &self.base.ring_matrix(&chi.values[g])))
            .collect();
        GModule::new(self.base.clone(), self.group.clone(), gens)
    }

    pub fn direct_sum(parts: &[&GModule]) -> Result<GModule> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty direct sum".into()))?;
        let mut base = first.base.clone();
        for v in &parts[1..] {
            if v.group != first.group {
                return Err(Error::Invalid("direct sum over different groups".into()));
            }
            base = base.direct_sum(&v.base)?;
        }
        let sizes: Vec<usize> = parts.iter().map(|v| v.rank()).collect();
        let gens = (0..first.group.generators.len())
            .map(|gi| {
                let blocks: Vec<&Mat> = parts.iter().map(|v| &v.gen_action[gi]).collect();
                block_diag(&blocks, &sizes)
            })
            .collect();
        GModule::new(base, first.group.clone(), gens)
    }

    fn ops(&self) -> Vec<&Mat> {
        self.gen_action.iter().chain(self.base.ring_action.iter()).collect()
    }

    /// A[G]-submodule generated by `gens`.
    pub fn span(&self, gens: &[Vec<u64>]) -> Subgroup {
        self.base.closure_under(gens, &self.ops())
    }

    pub fn is_submodule(&self, w: &Subgroup) -> bool {
        let ops = self.ops();
        w.generators().iter().all(|g| ops.iter().all(|m| w.contains(&AbGroup::apply(self.add(), m, g))))
    }

    /// Every A[G]-submodule, sorted by (order, Howell rows).
    pub fn all_submodules(&self) -> Result<Vec<Subgroup>> {
        guard::check("module for submodule enumeration", self.order())?;
        let cyc: HashSet<Subgroup> = self.add().elements().par_bridge().map(|v| self.span(&[v])).collect();
        let mut cyclics: Vec<Subgroup> = cyc.into_iter().collect();
        cyclics.sort_by(|a, b| (a.log_order(), &a.rows).cmp(&(b.log_order(), &b.rows)));
        let mut all: BTreeSet<Subgroup> = cyclics.iter().cloned().collect();
        let mut frontier: Vec<Subgroup> = cyclics.clone();
        while !frontier.is_empty() {
            let found: BTreeSet<Subgroup> = frontier
                .par_iter()
                .flat_map_iter(|w| cyclics.iter().map(move |c| w.sum(c)))
                .collect::<Vec<_>>()
                .into_iter()
                .filter(|s| !all.contains(s))
                .collect();
            frontier = found.iter().cloned().collect();
            all.extend(found);
        }
        let mut out: Vec<Subgroup> = all.into_iter().collect();
        out.sort_by(|a, b| (a.log_order(), &a.rows).cmp(&(b.log_order(), &b.rows)));
        Ok(out)
    }

    pub fn quotient_module(self: &Arc<Self>, w: &Subgroup) -> Result<ModuleQuotient> {
        if !self.is_submodule(w) {
            return Err(Error::NotStable("submodule is not stable under A[G]".into()));
        }
        let (base, proj, section) = self.base.quotient(w)?;
        let gens = self.gen_action.iter().map(|m| mat_mul(&base.add, &mat_mul(&base.add, &proj, m), &section)).collect();
        let module = Arc::new(GModule::new(base, self.group.clone(), gens)?);
        let map = ModuleMap { source: self.clone(), target: module.clone(), matrix: proj };
        Ok(ModuleQuotient { module, map, section })
    }

    /// Standalone module on a stable submodule, with its inclusion.
    pub fn submodule(&self, w: &Subgroup) -> Result<(GModule, Mat)> {
        if !self.is_submodule(w) {
            return Err(Error::NotStable("submodule is not stable under A[G]".into()));
        }
        let (base, incl) = self.base.submodule(w)?;
        let gens = self.gen_action.iter().map(|m| restrict_matrix(self.add(), &base.add, &incl, m)).collect();
        Ok((GModule::new(base, self.group.clone(), gens)?, incl))
    }

    /// Restriction to a named subgroup (re-indexed as a group of its own).
    pub fn restrict(&self, name: &str) -> Result<GModule> {
        let set = self.group.subgroup(name)?.to_vec();
        self.restrict_to(&set)
    }

    pub fn restrict_to(&self, elements: &[usize]) -> Result<GModule> {
        let (h, emb) = self.group.induced_subgroup(elements)?;
        let gens = h.generators.iter().map(|&x| self.action[emb[x]].clone()).collect();
        GModule::new(self.base.clone(), Arc::new(h), gens)
    }

    /// The same module over A[G] with A forgotten down to ℤ/pᴺ, N the top exponent.
    pub fn forget_scalars(&self) -> GModule {
        let z = Arc::new(FiniteRing::zmod(self.add().p, self.add().top_exp().max(1)));
        let base = AModule { ring: z, add: self.add().clone(), ring_action: vec![identity(self.rank())] };
        GModule { base, group: self.group.clone(), gen_action: self.gen_action.clone(), action: self.action.clone() }
    }

    /// Hom_{A[G]}(self, other).
    pub fn hom(&self, other: &GModule) -> Result<HomSpace> {
        if self.ring() != other.ring() || self.group != other.group {
            return Err(Error::RingMismatch("hom between modules over different rings or groups".into()));
        }
        let mut pairs: Vec<(&Mat, &Mat)> = self.base.ring_action.iter().zip(&other.base.ring_action).collect();
        pairs.extend(self.gen_action.iter().zip(&other.gen_action));
        Ok(HomSpace::solve(self.add(), other.add(), &pairs))
    }

    /// Brute-force search for an A[G]-isomorphism.
    pub fn isomorphism(&self, other: &GModule) -> Result<Option<Mat>> {
        if self.order() != other.order() {
            return Ok(None);
        }
        let hs = self.hom(other)?;
        for m in hs.elements()? {
            let ker = solve_linear(self.add(), other.add(), &m, &other.add().zero()).kernel;
            if ker.is_zero() {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }
}

/// Self-contained serialisable form of a module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleData {
    pub ring: RingData,
    pub exps: Vec<u32>,
    pub ring_action: Vec<Mat>,
    pub group: GroupData,
    pub gen_action: Vec<Mat>,
}

impl GModule {
    pub fn data(&self) -> ModuleData {
        ModuleData {
            ring: self.ring().data().clone(),
            exps: self.add().exps.clone(),
            ring_action: self.base.ring_action.clone(),
            group: self.group.data(),
            gen_action: self.gen_action.clone(),
        }
    }

    pub fn from_data(d: &ModuleData) -> Result<GModule> {
        let ring = Arc::new(validate_ring(d.ring.clone())?);
        let add = AbGroup::new(ring.prime(), d.exps.clone());
        let base = AModule::new(ring, add, d.ring_action.clone())?;
        let group = Arc::new(FiniteGroup::from_table(d.group.clone())?);
        GModule::new(base, group, d.gen_action.clone())
    }
}

/// Block matrix over A as a ℤ-matrix on A^d (index r·k + i).
pub fn block_matrix(ring: &FiniteRing, m: &[Vec<RingElt>]) -> Mat {
    let d = m.len();
    let k = ring.rank();
    let mut out = vec![vec![0; d * k]; d * k];
    for r in 0..d {
        for c in 0..d {
            let l = ring.lmul_matrix(&m[r][c]);
            for i in 0..k {
                for j in 0..k {
                    out[r * k + i][c * k + j] = l[i][j];
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ModuleQuotient {
    pub module: Arc<GModule>,
    pub map: ModuleMap,
    pub section: Mat,
}

#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub source: Arc<GModule>,
    pub target: Arc<GModule>,
    pub matrix: Mat,
}

impl ModuleMap {
    pub fn new(source: Arc<GModule>, target: Arc<GModule>, matrix: Mat) -> Result<ModuleMap> {
        let f = ModuleMap { source, target, matrix };
        if !f.is_equivariant() {
            return Err(Error::Invalid("matrix is not an A[G]-map".into()));
        }
        Ok(f)
    }

    pub fn is_equivariant(&self) -> bool {
        let (s, t) = (&self.source, &self.target);
        if !s.add().is_hom(t.add(), &self.matrix) {
            return false;
        }
        let ta = t.add();
        let ring_ok = s.base.ring_action.iter().zip(&t.base.ring_action).all(|(a, b)| {
            mat_eq(ta, &mat_mul(ta, &self.matrix, a), &mat_mul(ta, b, &self.matrix))
        });
        ring_ok
            && s.gen_action.iter().zip(&t.gen_action).all(|(a, b)| mat_eq(ta, &mat_mul(ta, &self.matrix, a), &mat_mul(ta, b, &self.matrix)))
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        AbGroup::apply(self.target.add(), &self.matrix, v)
    }

    pub fn kernel(&self) -> Subgroup {
        solve_linear(self.source.add(), self.target.add(), &self.matrix, &self.target.add().zero()).kernel
    }

    pub fn image(&self) -> Subgroup {
        Subgroup::whole(self.source.add()).image(self.target.add(), &self.matrix)
    }
}

/// A homomorphism G → A^×, stored on every element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub ring: Arc<FiniteRing>,
    pub values: Vec<RingElt>,
}

impl Character {
    pub fn new(ring: Arc<FiniteRing>, group: &FiniteGroup, values: Vec<RingElt>) -> Result<Character> {
        if values.len() != group.order() {
            return Err(Error::Invalid("character needs one value per group element".into()));
        }
        if values[0] != ring.one() {
            return Err(Error::Invalid("character is not 1 at the identity".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                if values[group.mul(g, h)] != ring.mul(&values[g], &values[h]) {
                    return Err(Error::Invalid(format!("character not multiplicative at ({g}, {h})")));
                }
            }
        }
        Ok(Character { ring, values })
    }

    /// Extends generator values multiplicatively; None if they violate a relation.
    pub fn from_generators(ring: Arc<FiniteRing>, group: &FiniteGroup, gen_values: &[RingElt]) -> Option<Character> {
        let n = group.order();
        let mut vals: Vec<Option<RingElt>> = vec![None; n];
        vals[0] = Some(ring.one());
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, &s) in group.generators.iter().enumerate() {
                let y = group.mul(x, s);
                let v = ring.mul(vals[x].as_ref().unwrap(), &gen_values[gi]);
                match &vals[y] {
                    None => {
                        vals[y] = Some(v);
                        queue.push_back(y);
                    }
                    Some(w) if *w != v => return None,
                    _ => {}
                }
            }
        }
        let values: Vec<RingElt> = vals.into_iter().map(|v| v.unwrap()).collect();
        Character::new(ring, group, values).ok()
    }

    pub fn trivial(ring: Arc<FiniteRing>, group: &FiniteGroup) -> Character {
        let values = vec![ring.one(); group.order()];
        Character { ring, values }
    }

    /// Every character G → A^×, ordered by generator images.
    pub fn all(ring: Arc<FiniteRing>, group: &FiniteGroup) -> Result<Vec<Character>> {
        let units: Vec<RingElt> = ring.elements().filter(|x| ring.is_unit(x)).collect();
        let ng = group.generators.len();
        guard::check("character search", guard::pow_sat(units.len() as u128, ng as u64))?;
        let mut out = Vec::new();
        let mut idx = vec![0usize; ng];
        loop {
            let gv: Vec<RingElt> = idx.iter().map(|&i| units[i].clone()).collect();
            if let Some(c) = Character::from_generators(ring.clone(), group, &gv) {
                out.push(c);
            }
            let mut pos = ng;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < units.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    pub fn mul(&self, other: &Character) -> Character {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| self.ring.mul(a, b)).collect();
        Character { ring: self.ring.clone(), values }
    }

    pub fn inverse(&self) -> Character {
        let values = self.values.iter().map(|a| self.ring.inverse(a).expect("character values are units")).collect();
        Character { ring: self.ring.clone(), values }
    }

    pub fn push(&self, f: &RingHom) -> Character {
        Character { ring: f.target.clone(), values: self.values.iter().map(|a| f.apply(a)).collect() }
    }

    pub fn is_trivial_on(&self, elements: &[usize]) -> bool {
        elements.iter().all(|&g| self.values[g] == self.ring.one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<FiniteRing> {
        Arc::new(FiniteRing::fp(3))
    }

    #[test]
    fn trivial_f3_is_simple() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = GModule::trivial(f3(), g, 1);
        assert_eq!(v.all_submodules().unwrap().len(), 2);
    }

    #[test]
    fn regular_module_of_z3_is_a_chain_of_four() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = GModule::regular(f3(), g).unwrap();
        let subs = v.all_submodules().unwrap();
        assert_eq!(subs.len(), 4);
        for w in subs.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
    }

    #[test]
    fn plane_with_trivial_action_has_six_submodules() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = GModule::trivial(f3(), g, 2);
        assert_eq!(v.all_submodules().unwrap().len(), 6);
    }

    #[test]
    fn hom_counts() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let triv = GModule::trivial(f3(), g.clone(), 1);
        assert_eq!(triv.hom(&triv).unwrap().order(), 3);
        let reg = GModule::regular(f3(), g.clone()).unwrap();
        assert_eq!(reg.hom(&triv).unwrap().order(), 3);
        let g2 = Arc::new(FiniteGroup::cyclic(2));
        let sign = Character::from_generators(f3(), &g2, &[vec![2]]).unwrap();
        let sv = GModule::from_character(&sign, g2.clone()).unwrap();
        let tv = GModule::trivial(f3(), g2, 1);
        assert_eq!(tv.hom(&sv).unwrap().order(), 1);
    }

    #[test]
    fn mixed_order_hom() {
        let z9 = Arc::new(FiniteRing::zmod(3, 2));
        let g = Arc::new(FiniteGroup::cyclic(1));
        let a = GModule::trivial(z9.clone(), g.clone(), 1);
        let f = Arc::new(FiniteRing::fp(3));
        let _ = f;
        let three = Subgroup::span(a.add(), &[vec![3]]);
        let (sub, _) = a.submodule(&three).unwrap();
        // Hom_{ℤ/9}(ℤ/3, ℤ/9) and Hom(ℤ/9, ℤ/3) both have 3 elements
        assert_eq!(sub.hom(&a).unwrap().order(), 3);
        assert_eq!(a.hom(&sub).unwrap().order(), 3);
        for m in sub.hom(&a).unwrap().elements().unwrap() {
            assert!(sub.add().is_hom(a.add(), &m));
        }
    }

    #[test]
    fn quotient_of_regular_by_augmentation_line() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let v = Arc::new(GModule::regular(f3(), g).unwrap());
        let subs = v.all_submodules().unwrap();
        let line = &subs[1];
        let q = v.quotient_module(line).unwrap();
        assert_eq!(q.module.order(), 9);
        assert!(q.map.kernel() == *line);
        assert_ne!(q.module.gen_action[0], identity(2));
    }

    #[test]
    fn restriction_of_product_regular_is_free_rank_three() {
        let g = Arc::new(FiniteGroup::product(&FiniteGroup::cyclic(3), &FiniteGroup::cyclic(3)));
        let v = GModule::regular(f3(), g).unwrap();
        let r = v.restrict("G1").unwrap();
        assert_eq!(r.group.order(), 3);
        // basis vectors are permuted freely: three orbits of size three
        let mut orbits = BTreeSet::new();
        for b in 0..9 {
            let mut e = vec![0; 9];
            e[b] = 1;
            let orbit: BTreeSet<Vec<u64>> = (0..3).map(|h| r.act(h, &e)).collect();
            assert_eq!(orbit.len(), 3);
            assert!(orbit.iter().all(|x| x.iter().filter(|&&c| c == 1).count() == 1));
            orbits.insert(orbit);
        }
        assert_eq!(orbits.len(), 3);
        let fixed = r.add().elements().filter(|x| (0..3).all(|h| r.act(h, x) == *x)).count();
        assert_eq!(fixed, 27);
    }

    #[test]
    fn character_tensor_identities() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let sign = Character::from_generators(f3(), &g, &[vec![2]]).unwrap();
        let triv = GModule::trivial(f3(), g.clone(), 1);
        assert_eq!(triv.tensor_with_character(&sign).unwrap(), GModule::from_character(&sign, g.clone()).unwrap());
        let both = GModule::from_character(&sign, g.clone()).unwrap().tensor_with_character(&sign).unwrap();
        assert_eq!(both, GModule::from_character(&sign.mul(&sign), g).unwrap());
    }
}

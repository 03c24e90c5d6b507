//! Finite abelian p-groups ⊕ℤ/p^{nᵢ}, their subgroups and quotients.
//!
//! A subgroup W is stored as the Howell form of its preimage in (ℤ/pᴺ)^k,
//! N = max nᵢ. The preimage always contains the relation rows p^{nᵢ}·eᵢ, so
//! two generator lists span the same W exactly when the stored rows agree.

use serde::{Deserialize, Serialize};

use super::linalg::{howell_contains, howell_form, pivot_info, smith, solve_mod, Mat};
use super::zmod::PrimePow;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub struct AbGroup {
    pub p: u64,
    pub exps: Vec<u32>,
}

impl AbGroup {
    pub fn new(p: u64, exps: Vec<u32>) -> Self {
        AbGroup { p, exps }
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.exps.iter().map(|&e| self.p.pow(e)).collect()
    }

    pub fn order_at(&self, i: usize) -> u64 {
        self.p.pow(self.exps[i])
    }

    pub fn top_exp(&self) -> u32 {
        self.exps.iter().copied().max().unwrap_or(0)
    }

    pub fn ambient(&self) -> PrimePow {
        PrimePow::new(self.p, self.top_exp())
    }

    /// log_p of the group order.
    pub fn log_order(&self) -> u64 {
        self.exps.iter().map(|&e| e as u64).sum()
    }

    pub fn order(&self) -> u128 {
        crate::guard::pow_sat(self.p as u128, self.log_order())
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn reduce(&self, x: &[u64]) -> Vec<u64> {
        x.iter().zip(&self.exps).map(|(&a, &e)| a % self.p.pow(e)).collect()
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(y)
            .zip(&self.exps)
            .map(|((&a, &b), &e)| (a + b) % self.p.pow(e))
            .collect()
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(y)
            .zip(&self.exps)
            .map(|((&a, &b), &e)| {
                let o = self.p.pow(e);
                (a + o - b % o) % o
            })
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        self.sub(&self.zero(), x)
    }

    pub fn scale(&self, c: u64, x: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(&self.exps)
            .map(|(&a, &e)| {
                let o = self.p.pow(e);
                (a % o) * (c % o) % o
            })
            .collect()
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        x.iter().zip(&self.exps).all(|(&a, &e)| a % self.p.pow(e) == 0)
    }

    pub fn direct_sum(&self, other: &AbGroup) -> AbGroup {
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&other.exps);
        AbGroup { p: self.p, exps }
    }

    pub fn power(&self, copies: usize) -> AbGroup {
        let mut exps = Vec::with_capacity(self.rank() * copies);
        for _ in 0..copies {
            exps.extend_from_slice(&self.exps);
        }
        AbGroup { p: self.p, exps }
    }

    /// Every element, last coordinate varying fastest.
    pub fn elements(&self) -> ElementIter {
        ElementIter { orders: self.orders(), cur: Some(self.zero()) }
    }

    /// Lifts into (ℤ/pᴺ)^k: a vector valid for any ambient N ≥ top_exp.
    pub fn relation_rows(&self) -> Vec<Vec<u64>> {
        let n = self.top_exp();
        (0..self.rank())
            .filter(|&i| self.exps[i] < n)
            .map(|i| {
                let mut r = vec![0; self.rank()];
                r[i] = self.order_at(i);
                r
            })
            .collect()
    }

    /// Applies a homomorphism matrix (column convention) into `target`.
    pub fn apply(target: &AbGroup, m: &Mat, x: &[u64]) -> Vec<u64> {
        let ords = target.orders();
        m.iter()
            .zip(&ords)
            .map(|(row, &o)| {
                let mut acc = 0u64;
                for (&a, &b) in row.iter().zip(x) {
                    if a != 0 && b != 0 {
                        acc = (acc + (a % o) * (b % o)) % o;
                    }
                }
                acc
            })
            .collect()
    }

    /// Checks that a matrix is a well-defined homomorphism self → target.
    pub fn is_hom(&self, target: &AbGroup, m: &Mat) -> bool {
        if m.len() != target.rank() || m.iter().any(|r| r.len() != self.rank()) {
            return false;
        }
        for (i, row) in m.iter().enumerate() {
            let ot = target.order_at(i);
            for (j, &a) in row.iter().enumerate() {
                let os = self.order_at(j);
                if (a as u128 * os as u128) % ot as u128 != 0 {
                    return false;
                }
            }
        }
        true
    }
}

pub struct ElementIter {
    orders: Vec<u64>,
    cur: Option<Vec<u64>>,
}

impl Iterator for ElementIter {
    type Item = Vec<u64>;
    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.cur.clone()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < self.orders[i] {
                self.cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    }
}

pub fn mat_mul(target: &AbGroup, a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let ords = target.orders();
    let mut out = vec![vec![0u64; cols]; a.len()];
    for (i, row) in a.iter().enumerate() {
        let o = ords[i];
        for k in 0..inner {
            let aik = row[k] % o;
            if aik == 0 {
                continue;
            }
            for j in 0..cols {
                let bkj = b[k][j] % o;
                if bkj != 0 {
                    out[i][j] = (out[i][j] + aik * bkj) % o;
                }
            }
        }
    }
    out
}

/// Column j of `m` as a vector.
pub fn column(m: &Mat, j: usize) -> Vec<u64> {
    m.iter().map(|r| r[j]).collect()
}

pub fn from_columns(rows: usize, cols: &[Vec<u64>]) -> Mat {
    (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    pub group: AbGroup,
    /// Howell rows of the preimage in (ℤ/pᴺ)^k.
    pub rows: Vec<Vec<u64>>,
}

impl Subgroup {
    pub fn span(group: &AbGroup, gens: &[Vec<u64>]) -> Subgroup {
        let z = group.ambient();
        let mut all: Vec<Vec<u64>> = gens.iter().map(|g| g.iter().map(|&x| z.red(x)).collect()).collect();
        all.extend(group.relation_rows());
        let rows = howell_form(&z, &all, group.rank());
        Subgroup { group: group.clone(), rows }
    }

    pub fn zero(group: &AbGroup) -> Subgroup {
        Subgroup::span(group, &[])
    }

    pub fn whole(group: &AbGroup) -> Subgroup {
        let gens: Vec<Vec<u64>> = (0..group.rank())
            .map(|i| {
                let mut e = vec![0; group.rank()];
                e[i] = 1;
                e
            })
            .collect();
        Subgroup::span(group, &gens)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let z = self.group.ambient();
        howell_contains(&z, &self.rows, v)
    }

    pub fn log_order(&self) -> u64 {
        let z = self.group.ambient();
        let n = z.n as u64;
        let pre: u64 = pivot_info(&z, &self.rows).iter().map(|&(_, v)| n - v as u64).sum();
        let rel: u64 = self.group.exps.iter().map(|&e| n - e as u64).sum();
        pre - rel
    }

    pub fn order(&self) -> u128 {
        crate::guard::pow_sat(self.group.p as u128, self.log_order())
    }

    pub fn is_zero(&self) -> bool {
        self.log_order() == 0
    }

    pub fn is_whole(&self) -> bool {
        self.log_order() == self.group.log_order()
    }

    /// Nonzero generators, reduced into the group.
    pub fn generators(&self) -> Vec<Vec<u64>> {
        self.rows
            .iter()
            .map(|r| self.group.reduce(r))
            .filter(|r| !self.group.is_zero(r))
            .collect()
    }

    pub fn sum(&self, other: &Subgroup) -> Subgroup {
        let mut g = self.generators();
        g.extend(other.generators());
        Subgroup::span(&self.group, &g)
    }

    pub fn is_subset(&self, other: &Subgroup) -> bool {
        self.generators().iter().all(|g| other.contains(g))
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        let k = self.group.rank();
        let z = self.group.ambient();
        let mut rows = Vec::new();
        for r in &self.rows {
            let mut v = r.clone();
            v.extend_from_slice(r);
            rows.push(v);
        }
        for r in &other.rows {
            let mut v = r.clone();
            v.extend(std::iter::repeat(0).take(k));
            rows.push(v);
        }
        let h = howell_form(&z, &rows, 2 * k);
        let gens: Vec<Vec<u64>> = h
            .iter()
            .filter(|r| r[..k].iter().all(|&x| x == 0))
            .map(|r| r[k..].to_vec())
            .collect();
        Subgroup::span(&self.group, &gens)
    }

    /// Image under a homomorphism into `target`.
    pub fn image(&self, target: &AbGroup, m: &Mat) -> Subgroup {
        let gens: Vec<Vec<u64>> = self.generators().iter().map(|g| AbGroup::apply(target, m, g)).collect();
        Subgroup::span(target, &gens)
    }

    /// Standalone presentation: (W as a group, inclusion matrix W → parent).
    pub fn presentation(&self) -> (AbGroup, Mat) {
        let gens = self.generators();
        let parent = &self.group;
        let r = gens.len();
        let n = parent.top_exp();
        let free = AbGroup::new(parent.p, vec![n; r]);
        let incl_free: Mat = (0..parent.rank()).map(|i| gens.iter().map(|g| g[i]).collect()).collect();
        let rel = solve_linear(&free, parent, &incl_free, &parent.zero()).kernel;
        let quo = quotient(&free, &rel);
        let incl = mat_mul(parent, &incl_free, &quo.section);
        (quo.group, incl)
    }

    /// All elements, enumerated through the standalone presentation.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let (g, incl) = self.presentation();
        g.elements().map(|c| AbGroup::apply(&self.group, &incl, &c)).collect()
    }
}

/// V/W with its projection and a set-theoretic section (both column-convention matrices).
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: AbGroup,
    pub proj: Mat,
    pub section: Mat,
}

impl Quotient {
    pub fn project(&self, x: &[u64]) -> Vec<u64> {
        AbGroup::apply(&self.group, &self.proj, x)
    }

    pub fn lift(&self, parent: &AbGroup, y: &[u64]) -> Vec<u64> {
        AbGroup::apply(parent, &self.section, y)
    }
}

pub fn quotient(group: &AbGroup, sub: &Subgroup) -> Quotient {
    let k = group.rank();
    let z = group.ambient();
    let s = smith(&z, &sub.rows, k);
    let mut exps = Vec::new();
    let mut keep = Vec::new();
    for j in 0..k {
        let e = if j < s.d.len() { s.d[j] } else { z.n };
        if e > 0 {
            exps.push(e);
            keep.push(j);
        }
    }
    let qg = AbGroup::new(group.p, exps);
    let proj: Mat = keep
        .iter()
        .enumerate()
        .map(|(jj, &j)| {
            let o = qg.order_at(jj);
            (0..k).map(|i| s.q[i][j] % o).collect()
        })
        .collect();
    let ords = group.orders();
    let section: Mat = (0..k).map(|i| keep.iter().map(|&j| s.q_inv[j][i] % ords[i]).collect()).collect();
    Quotient { group: qg, proj, section }
}

/// Solutions of M·x = b with x ∈ `src`, M·x ∈ `dst`.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub particular: Option<Vec<u64>>,
    pub kernel: Subgroup,
}

pub fn solve_linear(src: &AbGroup, dst: &AbGroup, m: &Mat, b: &[u64]) -> LinearSolution {
    let n = src.top_exp().max(dst.top_exp());
    let z = PrimePow::new(src.p, n);
    let k = src.rank();
    let mut a: Mat = Vec::with_capacity(dst.rank());
    let mut rhs = Vec::with_capacity(dst.rank());
    for (j, row) in m.iter().enumerate() {
        let shift = z.ppow(n - dst.exps[j]);
        a.push(row.iter().map(|&x| z.mul(x, shift)).collect());
        rhs.push(z.mul(b[j], shift));
    }
    // pin x_i to ℤ/p^{n_i}: p^{n_i} x_i is unconstrained, so nothing to add; kernel rows
    // reduce mod the source orders below.
    let (part, ker) = solve_mod(&z, &a, k, &rhs);
    let particular = part.map(|x| src.reduce(&x));
    let kernel = Subgroup::span(src, &ker.iter().map(|x| src.reduce(x)).collect::<Vec<_>>());
    LinearSolution { particular, kernel }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_x_zero_mod_four() {
        let g = AbGroup::new(2, vec![2]);
        let s = solve_linear(&g, &g, &vec![vec![2]], &[0]);
        assert_eq!(s.kernel.elements().len(), 2);
        assert!(s.kernel.contains(&[2]));
    }

    #[test]
    fn three_x_one_mod_nine_is_inconsistent() {
        let g = AbGroup::new(3, vec![2]);
        let s = solve_linear(&g, &g, &vec![vec![3]], &[1]);
        assert!(s.particular.is_none());
    }

    #[test]
    fn mixed_orders_quotient() {
        let g = AbGroup::new(3, vec![2, 1]);
        let w = Subgroup::span(&g, &[vec![3, 1]]);
        assert_eq!(w.order(), 3);
        let q = quotient(&g, &w);
        assert_eq!(q.group.order(), 9);
        assert!(q.group.is_zero(&q.project(&[3, 1])));
        let (wg, incl) = w.presentation();
        assert_eq!(wg.order(), 3);
        assert!(w.contains(&AbGroup::apply(&g, &incl, &[1])));
    }

    #[test]
    fn intersection_matches_enumeration() {
        let g = AbGroup::new(2, vec![2, 2]);
        let a = Subgroup::span(&g, &[vec![1, 2]]);
        let b = Subgroup::span(&g, &[vec![2, 0], vec![0, 2]]);
        let c = a.intersect(&b);
        let brute: Vec<_> = a.elements().into_iter().filter(|x| b.contains(x)).collect();
        assert_eq!(c.order(), brute.len() as u128);
    }
}

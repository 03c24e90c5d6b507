//! Finite groups stored by multiplication table, identity at index 0.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupData {
    pub mult_table: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
    #[serde(default)]
    pub named_subgroups: BTreeMap<String, Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    pub generators: Vec<usize>,
    pub named_subgroups: BTreeMap<String, Vec<usize>>,
}

impl FiniteGroup {
    pub fn from_table(data: GroupData) -> Result<FiniteGroup> {
        let n = data.mult_table.len();
        if n == 0 || data.mult_table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::Invalid("multiplication table is not square over 0..n".into()));
        }
        crate::guard::check("group", n as u128)?;
        let m = &data.mult_table;
        for g in 0..n {
            if m[0][g] != g || m[g][0] != g {
                return Err(Error::Invalid(format!("index 0 is not an identity (element {g})")));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for g in 0..n {
            match (0..n).find(|&h| m[g][h] == 0) {
                Some(h) if m[h][g] == 0 => inv[g] = h,
                _ => return Err(Error::Invalid(format!("element {g} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = m[a][b];
                for c in 0..n {
                    if m[ab][c] != m[a][m[b][c]] {
                        return Err(Error::NotAssociative(a, b, c));
                    }
                }
            }
        }
        let mut g = FiniteGroup { mult: data.mult_table, inv, generators: data.generators, named_subgroups: BTreeMap::new() };
        if g.generators.iter().any(|&x| x >= n) || g.closure(&g.generators).len() != n {
            return Err(Error::Invalid("generators do not generate the group".into()));
        }
        for (name, set) in data.named_subgroups {
            g.add_subgroup(&name, &set)?;
        }
        g.add_builtin_names();
        Ok(g)
    }

    fn add_builtin_names(&mut self) {
        self.named_subgroups.insert("G".into(), (0..self.order()).collect());
        self.named_subgroups.insert("1".into(), vec![0]);
    }

    pub fn data(&self) -> GroupData {
        let named = self.named_subgroups.iter().filter(|(k, _)| k.as_str() != "G" && k.as_str() != "1");
        GroupData {
            mult_table: self.mult.clone(),
            generators: self.generators.clone(),
            named_subgroups: named.map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Registers a named subgroup given by a subset that must be closed.
    pub fn add_subgroup(&mut self, name: &str, elements: &[usize]) -> Result<()> {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        if set.iter().any(|&x| x >= self.order()) || !set.contains(&0) {
            return Err(Error::Invalid(format!("subgroup {name} is not a subset containing 1")));
        }
        for &a in &set {
            for &b in &set {
                if !set.contains(&self.mul(a, b)) {
                    return Err(Error::Invalid(format!("subgroup {name} not closed at ({a}, {b})")));
                }
            }
        }
        self.named_subgroups.insert(name.to_string(), set.into_iter().collect());
        Ok(())
    }

    /// Registers the subgroup generated by `gens`.
    pub fn name_generated(&mut self, name: &str, gens: &[usize]) {
        let set = self.closure(gens);
        self.named_subgroups.insert(name.to_string(), set);
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        seen.insert(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn subgroup(&self, name: &str) -> Result<&[usize]> {
        self.named_subgroups
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::ReferenceError(format!("subgroup {name}")))
    }

    /// Greedy generating set of a subgroup.
    pub fn generating_set(&self, elements: &[usize]) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut cur: BTreeSet<usize> = BTreeSet::from([0]);
        for &x in elements {
            if !cur.contains(&x) {
                gens.push(x);
                cur = self.closure(&gens).into_iter().collect();
            }
        }
        gens
    }

    /// The subgroup on `elements` as a group in its own right, with the
    /// embedding (new index → old index). Named subgroups contained in it
    /// are carried over under the same names.
    pub fn induced_subgroup(&self, elements: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        let emb: Vec<usize> = elements.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if emb.first() != Some(&0) {
            return Err(Error::Invalid("subgroup must contain the identity".into()));
        }
        let pos: HashMap<usize, usize> = emb.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let mut table = Vec::with_capacity(emb.len());
        for &a in &emb {
            let mut row = Vec::with_capacity(emb.len());
            for &b in &emb {
                let c = self.mul(a, b);
                row.push(*pos.get(&c).ok_or_else(|| Error::Invalid("subset not closed".into()))?);
            }
            table.push(row);
        }
        let gens: Vec<usize> = self.generating_set(&emb).iter().map(|g| pos[g]).collect();
        let mut named = BTreeMap::new();
        for (name, set) in &self.named_subgroups {
            if name == "G" || name == "1" {
                continue;
            }
            if set.iter().all(|g| pos.contains_key(g)) {
                named.insert(name.clone(), set.iter().map(|g| pos[g]).collect());
            }
        }
        let h = FiniteGroup::from_table(GroupData { mult_table: table, generators: gens, named_subgroups: named })?;
        Ok((h, emb))
    }

    pub fn cyclic(n: usize) -> FiniteGroup {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let gens = if n > 1 { vec![1] } else { vec![] };
        FiniteGroup::from_table(GroupData { mult_table: table, generators: gens, named_subgroups: BTreeMap::new() })
            .expect("cyclic group")
    }

    /// G × H with (g, h) at index g·|H| + h. Factors are named "G1" and "G2".
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> FiniteGroup {
        let (n, m) = (g.order(), h.order());
        let mut table = vec![vec![0; n * m]; n * m];
        for a in 0..n * m {
            for b in 0..n * m {
                table[a][b] = g.mul(a / m, b / m) * m + h.mul(a % m, b % m);
            }
        }
        let mut gens: Vec<usize> = g.generators.iter().map(|&x| x * m).collect();
        gens.extend(h.generators.iter().copied());
        let mut named = BTreeMap::new();
        named.insert("G1".to_string(), (0..n).map(|x| x * m).collect());
        named.insert("G2".to_string(), (0..m).collect());
        FiniteGroup::from_table(GroupData { mult_table: table, generators: gens, named_subgroups: named }).expect("product")
    }

    /// Group generated by permutations of 0..degree, composed right to left.
    pub fn from_permutations(degree: usize, gens: &[Vec<usize>]) -> Result<(FiniteGroup, Vec<Vec<usize>>)> {
        for g in gens {
            let mut s = g.clone();
            s.sort_unstable();
            if g.len() != degree || s != (0..degree).collect::<Vec<_>>() {
                return Err(Error::Invalid("not a permutation".into()));
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let compose = |a: &Vec<usize>, b: &Vec<usize>| -> Vec<usize> { (0..degree).map(|x| a[b[x]]).collect() };
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let y = compose(&elems[i], g);
                if !index.contains_key(&y) {
                    crate::guard::check("permutation group", elems.len() as u128 + 1)?;
                    index.insert(y.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(y);
                }
            }
        }
        let n = elems.len();
        let table = (0..n).map(|a| (0..n).map(|b| index[&compose(&elems[a], &elems[b])]).collect()).collect();
        let gen_idx = gens.iter().map(|g| index[g]).collect();
        let grp = FiniteGroup::from_table(GroupData { mult_table: table, generators: gen_idx, named_subgroups: BTreeMap::new() })?;
        Ok((grp, elems))
    }

    /// Dihedral group of order 2n acting on an n-gon; rotations named "R".
    pub fn dihedral(n: usize) -> FiniteGroup {
        let r: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let s: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        let (mut g, _) = FiniteGroup::from_permutations(n, &[r, s]).expect("dihedral");
        let rot = g.generators[0];
        g.name_generated("R", &[rot]);
        g
    }

    /// Symmetric group on n points; the alternating subgroup is named "A".
    pub fn symmetric(n: usize) -> FiniteGroup {
        let mut gens = Vec::new();
        if n >= 2 {
            let mut t: Vec<usize> = (0..n).collect();
            t.swap(0, 1);
            gens.push(t);
            let c: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            gens.push(c);
        }
        let (mut g, perms) = FiniteGroup::from_permutations(n, &gens).expect("symmetric");
        let even: Vec<usize> = (0..g.order()).filter(|&i| perm_sign(&perms[i]) == 1).collect();
        g.add_subgroup("A", &even).expect("alternating subgroup");
        g
    }

    /// (ℤ/3 × ℤ/3) ⋊ ℤ/2 with the inversion action, on 6 points.
    /// "N1" is the first ℤ/3, "N" the normal ℤ/3 × ℤ/3.
    pub fn generalized_dihedral_18() -> FiniteGroup {
        let a = vec![1, 2, 0, 3, 4, 5];
        let b = vec![0, 1, 2, 4, 5, 3];
        let s = vec![0, 2, 1, 3, 5, 4];
        let (mut g, _) = FiniteGroup::from_permutations(6, &[a, b, s]).expect("group of order 18");
        let (ga, gb) = (g.generators[0], g.generators[1]);
        g.name_generated("N1", &[ga]);
        g.name_generated("N", &[ga, gb]);
        g
    }
}

pub fn perm_sign(p: &[usize]) -> i32 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_groups_have_expected_orders() {
        assert_eq!(FiniteGroup::cyclic(5).order(), 5);
        assert_eq!(FiniteGroup::symmetric(3).order(), 6);
        assert_eq!(FiniteGroup::symmetric(4).order(), 24);
        assert_eq!(FiniteGroup::dihedral(5).order(), 10);
        let g18 = FiniteGroup::generalized_dihedral_18();
        assert_eq!(g18.order(), 18);
        assert_eq!(g18.subgroup("N").unwrap().len(), 9);
        assert_eq!(FiniteGroup::symmetric(3).subgroup("A").unwrap().len(), 3);
    }

    #[test]
    fn bad_table_is_rejected() {
        let t = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroup::from_table(GroupData { mult_table: t, generators: vec![1], named_subgroups: BTreeMap::new() }).is_err());
    }

    #[test]
    fn induced_subgroup_keeps_names() {
        let g = FiniteGroup::product(&FiniteGroup::cyclic(3), &FiniteGroup::cyclic(3));
        let (h, emb) = g.induced_subgroup(g.subgroup("G1").unwrap()).unwrap();
        assert_eq!(h.order(), 3);
        assert_eq!(emb, vec![0, 3, 6]);
        assert!(h.named_subgroups.contains_key("G1"));
        assert!(!h.named_subgroups.contains_key("G2"));
    }
}

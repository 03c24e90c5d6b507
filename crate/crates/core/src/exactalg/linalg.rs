//! Howell and Smith forms over ℤ/pᴺ.
//!
//! Vectors are rows of `u64` reduced modulo pᴺ. The Howell form of a row set
//! is its canonical spanning matrix: echelon, pivots normalised to powers of
//! p, entries above a pivot reduced below it, and closed under the Howell
//! property (every span element vanishing on the first j columns is spanned by
//! the rows whose pivot lies past column j).

use super::zmod::PrimePow;

pub type Mat = Vec<Vec<u64>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            let mut r = vec![0; n];
            r[i] = 1;
            r
        })
        .collect()
}

pub fn zero_mat(rows: usize, cols: usize) -> Mat {
    vec![vec![0; cols]; rows]
}

fn axpy(z: &PrimePow, dst: &mut [u64], c: u64, src: &[u64]) {
    if c == 0 {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if *s != 0 {
            *d = z.add(*d, z.mul(c, *s));
        }
    }
}

fn scale(z: &PrimePow, row: &mut [u64], c: u64) {
    for x in row.iter_mut() {
        *x = z.mul(*x, c);
    }
}

/// Canonical Howell form of the span of `rows` in (ℤ/pᴺ)^width.
pub fn howell_form(z: &PrimePow, rows: &[Vec<u64>], width: usize) -> Mat {
    if z.n == 0 {
        return Vec::new();
    }
    let mut work: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| z.red(x)).collect::<Vec<_>>())
        .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
        .collect();
    let mut pivots: Vec<(usize, u32, Vec<u64>)> = Vec::new();
    for col in 0..width {
        let mut best: Option<(usize, u32)> = None;
        for (i, r) in work.iter().enumerate() {
            if r[col] != 0 {
                let v = z.val(r[col]);
                if best.map_or(true, |(_, bv)| v < bv) {
                    best = Some((i, v));
                    if v == 0 {
                        break;
                    }
                }
            }
        }
        let Some((bi, v)) = best else { continue };
        let mut piv = work.remove(bi);
        let (_, uinv) = z.split(piv[col]);
        scale(z, &mut piv, uinv);
        let pv = z.ppow(v);
        for r in work.iter_mut() {
            if r[col] != 0 {
                let c = r[col] / pv;
                axpy(z, r, z.neg(c), &piv);
            }
        }
        if v > 0 {
            let mut extra = piv.clone();
            scale(z, &mut extra, z.ppow(z.n - v));
            if extra.iter().any(|&x| x != 0) {
                work.push(extra);
            }
        }
        work.retain(|r| r.iter().any(|&x| x != 0));
        pivots.push((col, v, piv));
    }
    for i in 0..pivots.len() {
        let (col, v, row) = (pivots[i].0, pivots[i].1, pivots[i].2.clone());
        let pv = z.ppow(v);
        for j in 0..i {
            let e = pivots[j].2[col];
            if e >= pv {
                let c = e / pv;
                axpy(z, &mut pivots[j].2, z.neg(c), &row);
            }
        }
    }
    pivots.into_iter().map(|(_, _, r)| r).collect()
}

/// Pivot column and valuation of each Howell row.
pub fn pivot_info(z: &PrimePow, rows: &[Vec<u64>]) -> Vec<(usize, u32)> {
    rows.iter()
        .map(|r| {
            let c = r.iter().position(|&x| x != 0).expect("zero Howell row");
            (c, z.val(r[c]))
        })
        .collect()
}

/// Membership test against a Howell basis.
pub fn howell_contains(z: &PrimePow, basis: &[Vec<u64>], v: &[u64]) -> bool {
    let mut x: Vec<u64> = v.iter().map(|&a| z.red(a)).collect();
    for row in basis {
        let col = row.iter().position(|&a| a != 0).expect("zero Howell row");
        if x[..col].iter().any(|&a| a != 0) {
            return false;
        }
        if x[col] != 0 {
            let pv = row[col];
            if x[col] % pv != 0 {
                return false;
            }
            let c = x[col] / pv;
            axpy(z, &mut x, z.neg(c), row);
        }
    }
    x.iter().all(|&a| a == 0)
}

/// Smith decomposition P·A·Q = diag(p^d₀, …, p^d_{r-1}, 0, …).
#[derive(Clone, Debug)]
pub struct Smith {
    pub d: Vec<u32>,
    pub p: Mat,
    pub q: Mat,
    pub q_inv: Mat,
}

pub fn smith(z: &PrimePow, a: &Mat, cols: usize) -> Smith {
    let rows = a.len();
    let mut a: Mat = a.iter().map(|r| r.iter().map(|&x| z.red(x)).collect()).collect();
    let mut p = identity(rows);
    let mut q = identity(cols);
    let mut qi = identity(cols);
    let mut d = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize, u32)> = None;
        'scan: for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 {
                    let v = z.val(a[i][j]);
                    if best.map_or(true, |b| v < b.2) {
                        best = Some((i, j, v));
                        if v == 0 {
                            break 'scan;
                        }
                    }
                }
            }
        }
        let Some((bi, bj, v)) = best else { break };
        a.swap(t, bi);
        p.swap(t, bi);
        for r in a.iter_mut() {
            r.swap(t, bj);
        }
        for r in q.iter_mut() {
            r.swap(t, bj);
        }
        qi.swap(t, bj);
        let (_, uinv) = z.split(a[t][t]);
        scale(z, &mut a[t], uinv);
        scale(z, &mut p[t], uinv);
        let pv = z.ppow(v);
        let at = a[t].clone();
        let pt = p[t].clone();
        for i in 0..rows {
            if i != t && a[i][t] != 0 {
                let c = z.neg(a[i][t] / pv);
                axpy(z, &mut a[i], c, &at);
                axpy(z, &mut p[i], c, &pt);
            }
        }
        for j in 0..cols {
            if j != t && a[t][j] != 0 {
                let c = a[t][j] / pv;
                let nc = z.neg(c);
                for r in a.iter_mut() {
                    let s = r[t];
                    r[j] = z.add(r[j], z.mul(nc, s));
                }
                for r in q.iter_mut() {
                    let s = r[t];
                    r[j] = z.add(r[j], z.mul(nc, s));
                }
                let rowj = qi[j].clone();
                axpy(z, &mut qi[t], c, &rowj);
            }
        }
        d.push(v);
        t += 1;
    }
    Smith { d, p, q, q_inv: qi }
}

/// All solutions of A·x = b over ℤ/pᴺ (A is rows × cols, column vectors).
/// Returns a particular solution (if consistent) and kernel generators.
pub fn solve_mod(z: &PrimePow, a: &Mat, cols: usize, b: &[u64]) -> (Option<Vec<u64>>, Vec<Vec<u64>>) {
    let rows = a.len();
    let s = smith(z, a, cols);
    let rank = s.d.len();
    let c: Vec<u64> = (0..rows)
        .map(|i| {
            let mut acc = 0;
            for (k, &bk) in b.iter().enumerate() {
                acc = z.add(acc, z.mul(s.p[i][k], bk));
            }
            acc
        })
        .collect();
    let mut y = vec![0u64; cols];
    let mut ok = true;
    for i in 0..rows {
        if i < rank {
            let pv = z.ppow(s.d[i]);
            if c[i] % pv != 0 {
                ok = false;
                break;
            }
            y[i] = c[i] / pv;
        } else if c[i] != 0 {
            ok = false;
            break;
        }
    }
    let apply_q = |y: &[u64]| -> Vec<u64> {
        (0..cols)
            .map(|i| {
                let mut acc = 0;
                for (j, &yj) in y.iter().enumerate() {
                    if yj != 0 {
                        acc = z.add(acc, z.mul(s.q[i][j], yj));
                    }
                }
                acc
            })
            .collect()
    };
    let particular = if ok { Some(apply_q(&y)) } else { None };
    let mut kernel = Vec::new();
    for j in 0..cols {
        let mut e = vec![0u64; cols];
        if j < rank {
            if s.d[j] == 0 {
                continue;
            }
            e[j] = z.ppow(z.n - s.d[j]);
        } else {
            e[j] = 1;
        }
        kernel.push(apply_q(&e));
    }
    (particular, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_all(z: &PrimePow, rows: &[Vec<u64>], width: usize) -> std::collections::BTreeSet<Vec<u64>> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0; width]);
        loop {
            let cur: Vec<_> = set.iter().cloned().collect();
            let before = set.len();
            for v in &cur {
                for r in rows {
                    let w: Vec<u64> = v.iter().zip(r).map(|(a, b)| z.add(*a, *b)).collect();
                    set.insert(w);
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    #[test]
    fn howell_is_canonical_for_equal_spans() {
        let z = PrimePow::new(3, 2);
        let a = howell_form(&z, &[vec![3, 1], vec![0, 3]], 2);
        let b = howell_form(&z, &[vec![6, 2], vec![3, 4], vec![0, 0]], 2);
        assert_eq!(span_all(&z, &a, 2), span_all(&z, &b, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn howell_adds_annihilator_rows() {
        let z = PrimePow::new(2, 2);
        let h = howell_form(&z, &[vec![2, 1]], 2);
        assert_eq!(h, vec![vec![2, 1], vec![0, 2]]);
        assert!(howell_contains(&z, &h, &[0, 2]));
        assert!(!howell_contains(&z, &h, &[0, 1]));
    }

    #[test]
    fn smith_transform_is_consistent() {
        let z = PrimePow::new(3, 2);
        let a = vec![vec![3, 6, 1], vec![0, 3, 3]];
        let s = smith(&z, &a, 3);
        // P·A·Q is diagonal
        let mut pa = zero_mat(2, 3);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..2 {
                    pa[i][j] = z.add(pa[i][j], z.mul(s.p[i][k], a[k][j]));
                }
            }
        }
        for i in 0..2 {
            for j in 0..3 {
                let mut acc = 0;
                for k in 0..3 {
                    acc = z.add(acc, z.mul(pa[i][k], s.q[k][j]));
                }
                if i == j {
                    assert_eq!(acc, z.ppow(s.d[i]));
                } else {
                    assert_eq!(acc, 0);
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0;
                for k in 0..3 {
                    acc = z.add(acc, z.mul(s.q[i][k], s.q_inv[k][j]));
                }
                assert_eq!(acc, u64::from(i == j));
            }
        }
    }
}

//! Truncated polynomials A[t]/(tᴺ) as coefficient vectors.

use std::sync::Arc;

use super::ring::{FiniteRing, RingElt};

/// Coefficients c₀..c_{N-1}; always exactly N long.
pub type TruncPoly = Vec<RingElt>;

#[derive(Clone, Debug)]
pub struct PolyRing {
    pub ring: Arc<FiniteRing>,
    pub n: usize,
}

impl PolyRing {
    pub fn new(ring: Arc<FiniteRing>, n: usize) -> PolyRing {
        PolyRing { ring, n }
    }

    pub fn zero(&self) -> TruncPoly {
        vec![self.ring.zero(); self.n]
    }

    pub fn constant(&self, a: &[u64]) -> TruncPoly {
        let mut p = self.zero();
        if self.n > 0 {
            p[0] = a.to_vec();
        }
        p
    }

    pub fn one(&self) -> TruncPoly {
        self.constant(&self.ring.one())
    }

    /// a·tʲ (zero when j ≥ N).
    pub fn monomial(&self, a: &[u64], j: usize) -> TruncPoly {
        let mut p = self.zero();
        if j < self.n {
            p[j] = a.to_vec();
        }
        p
    }

    pub fn add(&self, x: &TruncPoly, y: &TruncPoly) -> TruncPoly {
        x.iter().zip(y).map(|(a, b)| self.ring.add(a, b)).collect()
    }

    pub fn sub(&self, x: &TruncPoly, y: &TruncPoly) -> TruncPoly {
        x.iter().zip(y).map(|(a, b)| self.ring.sub(a, b)).collect()
    }

    pub fn neg(&self, x: &TruncPoly) -> TruncPoly {
        x.iter().map(|a| self.ring.neg(a)).collect()
    }

    pub fn scale(&self, a: &[u64], x: &TruncPoly) -> TruncPoly {
        x.iter().map(|c| self.ring.mul(a, c)).collect()
    }

    pub fn scale_int(&self, c: u64, x: &TruncPoly) -> TruncPoly {
        x.iter().map(|a| self.ring.scale_int(c, a)).collect()
    }

    pub fn mul(&self, x: &TruncPoly, y: &TruncPoly) -> TruncPoly {
        let r = &self.ring;
        let mut out = self.zero();
        for (i, a) in x.iter().enumerate() {
            if r.is_zero(a) {
                continue;
            }
            for (j, b) in y.iter().enumerate().take(self.n - i) {
                if r.is_zero(b) {
                    continue;
                }
                out[i + j] = r.add(&out[i + j], &r.mul(a, b));
            }
        }
        out
    }

    pub fn is_zero(&self, x: &TruncPoly) -> bool {
        x.iter().all(|a| self.ring.is_zero(a))
    }

    pub fn is_one(&self, x: &TruncPoly) -> bool {
        *x == self.one()
    }

    /// Coordinates in the ring built by `extend_scalars` (index j·k + i).
    pub fn to_ext(&self, x: &TruncPoly) -> RingElt {
        x.concat()
    }

    pub fn from_ext(&self, e: &[u64]) -> TruncPoly {
        let k = self.ring.rank();
        (0..self.n).map(|j| e[j * k..(j + 1) * k].to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::ring::{extend_scalars, ExtensionKind};

    #[test]
    fn multiplication_matches_extended_ring() {
        let a = Arc::new(FiniteRing::zmod(3, 2));
        let pr = PolyRing::new(a.clone(), 3);
        let (ext, _) = extend_scalars(&a, ExtensionKind::TruncatedPoly(3)).unwrap();
        let x = vec![vec![2], vec![5], vec![7]];
        let y = vec![vec![4], vec![0], vec![8]];
        let direct = pr.mul(&x, &y);
        let via = ext.mul(&pr.to_ext(&x), &pr.to_ext(&y));
        assert_eq!(pr.from_ext(&via), direct);
    }

    #[test]
    fn t_cubed_vanishes() {
        let a = Arc::new(FiniteRing::fp(5));
        let pr = PolyRing::new(a, 3);
        let t = pr.monomial(&[1], 1);
        let t3 = pr.mul(&pr.mul(&t, &t), &t);
        assert!(pr.is_zero(&t3));
    }
}

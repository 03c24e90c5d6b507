//! Arithmetic in ℤ/pⁿ with the modulus kept below 2³² so that products fit in u64.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePow {
    pub p: u64,
    pub n: u32,
    pub q: u64,
}

impl PrimePow {
    pub fn new(p: u64, n: u32) -> Self {
        let q = p.checked_pow(n).expect("modulus overflow");
        assert!(q < (1u64 << 32), "modulus {q} too large");
        PrimePow { p, n, q }
    }

    #[inline]
    pub fn red(&self, x: u64) -> u64 {
        x % self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.q) * (b % self.q) % self.q
    }

    /// p-adic valuation of `x` as an element of ℤ/pⁿ (n for zero).
    pub fn val(&self, x: u64) -> u32 {
        let mut x = x % self.q;
        if x == 0 {
            return self.n;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn ppow(&self, e: u32) -> u64 {
        self.p.pow(e.min(self.n))
    }

    /// Inverse of a unit modulo q.
    pub fn inv(&self, u: u64) -> Option<u64> {
        let (g, x, _) = ext_gcd((u % self.q) as i128, self.q as i128);
        if g != 1 {
            return None;
        }
        Some(x.rem_euclid(self.q as i128) as u64)
    }

    /// Writes a nonzero `x` as pᵛ·u and returns (v, u⁻¹).
    pub fn split(&self, x: u64) -> (u32, u64) {
        let x = x % self.q;
        let v = self.val(x);
        let u = x / self.p.pow(v);
        (v, self.inv(u).expect("unit part"))
    }
}

pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Exponent e with p^e = order; None when `order` is not a power of p.
pub fn log_p(p: u64, order: u64) -> Option<u32> {
    if order == 0 {
        return None;
    }
    let mut o = order;
    let mut e = 0;
    while o % p == 0 {
        o /= p;
        e += 1;
    }
    if o == 1 {
        Some(e)
    } else {
        None
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_and_inverse() {
        let z = PrimePow::new(3, 3);
        let (v, ui) = z.split(18);
        assert_eq!(v, 2);
        assert_eq!(z.mul(ui, 2), 1);
        assert_eq!(z.inv(3), None);
        assert_eq!(z.val(0), 3);
    }

    #[test]
    fn log_p_detects_prime_powers() {
        assert_eq!(log_p(3, 81), Some(4));
        assert_eq!(log_p(3, 1), Some(0));
        assert_eq!(log_p(3, 12), None);
    }
}

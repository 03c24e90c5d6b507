//! Process-wide size guard. Every enumeration-based construction checks the
//! order of what it is about to build against this bound.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: u64 = 1_000_000;

static MAX_ORDER: AtomicU64 = AtomicU64::new(DEFAULT_MAX_ORDER);
static ALLOW_P2: AtomicBool = AtomicBool::new(false);
static PARANOID: AtomicBool = AtomicBool::new(false);

pub fn max_order() -> u64 {
    MAX_ORDER.load(Ordering::Relaxed)
}

pub fn set_max_order(n: u64) {
    MAX_ORDER.store(n.max(1), Ordering::Relaxed);
}

pub fn allow_p2() -> bool {
    ALLOW_P2.load(Ordering::Relaxed)
}

pub fn set_allow_p2(v: bool) {
    ALLOW_P2.store(v, Ordering::Relaxed);
}

pub fn paranoid() -> bool {
    PARANOID.load(Ordering::Relaxed)
}

pub fn set_paranoid(v: bool) {
    PARANOID.store(v, Ordering::Relaxed);
}

pub fn check(what: &str, order: u128) -> Result<()> {
    let limit = max_order();
    if order > limit as u128 {
        return Err(Error::SizeLimitExceeded { what: what.to_string(), order, limit });
    }
    Ok(())
}

/// `base^exp` saturating at `u128::MAX`.
pub fn pow_sat(base: u128, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

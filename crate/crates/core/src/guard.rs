//! Size guard for exhaustive enumerations.
//!
//! The process-wide limit defaults to 2^24 and can be raised through the
//! `NILKIT_GUARD` environment variable or [`set_global`]. A thread can
//! override it temporarily with [`with_limit`], which is what tests use.

use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_LIMIT: u64 = 1 << 24;

static GLOBAL: AtomicU64 = AtomicU64::new(0);

thread_local! {
    static LOCAL: Cell<Option<u64>> = const { Cell::new(None) };
}

fn global() -> u64 {
    let v = GLOBAL.load(Ordering::Relaxed);
    if v != 0 {
        return v;
    }
    let from_env = std::env::var("NILKIT_GUARD")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_LIMIT);
    GLOBAL.store(from_env, Ordering::Relaxed);
    from_env
}

pub fn set_global(limit: u64) {
    GLOBAL.store(limit.max(1), Ordering::Relaxed);
}

pub fn limit() -> u64 {
    LOCAL.with(|l| l.get()).unwrap_or_else(global)
}

/// Runs `f` with the guard on this thread set to `limit`.
pub fn with_limit<T>(limit: u64, f: impl FnOnce() -> T) -> T {
    let prev = LOCAL.with(|l| l.replace(Some(limit.max(1))));
    struct Restore(Option<u64>);
    impl Drop for Restore {
        fn drop(&mut self) {
            LOCAL.with(|l| l.set(self.0));
        }
    }
    let _restore = Restore(prev);
    f()
}

pub fn check(requested: u128) -> Result<()> {
    let limit = limit();
    if requested > limit as u128 {
        Err(Error::SizeGuard { requested, limit })
    } else {
        Ok(())
    }
}

/// `base^exp` as u128, saturating.
pub fn pow(base: u64, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_override_restores() {
        let outer = limit();
        with_limit(10, || {
            assert_eq!(limit(), 10);
            assert!(check(11).is_err());
            assert!(check(10).is_ok());
        });
        assert_eq!(limit(), outer);
    }

    #[test]
    fn pow_saturates() {
        assert_eq!(pow(4, 3), 64);
        assert_eq!(pow(2, 200), u128::MAX);
    }
}

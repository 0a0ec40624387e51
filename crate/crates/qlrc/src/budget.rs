//! Work budget for the enumeration oracles.
//!
//! Searches charge an estimate of the words they are about to enumerate
//! before doing the work, so a run either completes or fails fast with
//! [`Error::BudgetExceeded`]. The counter doubles as the enumeration
//! statistic recorded in certificates.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on enumerated words per run.
pub const DEFAULT_BUDGET: u64 = 1 << 28;

#[derive(Debug)]
pub struct Budget {
    max: u64,
    used: AtomicU64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

impl Budget {
    pub fn new(max: u64) -> Budget {
        Budget {
            max,
            used: AtomicU64::new(0),
        }
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub fn remaining(&self) -> u64 {
        self.max.saturating_sub(self.used())
    }

    /// True when `amount` more words would still fit.
    pub fn fits(&self, amount: u128) -> bool {
        amount <= self.remaining() as u128
    }

    /// Reserves `amount` words of work, erroring without side effects when
    /// the budget cannot cover them.
    pub fn charge(&self, amount: u128) -> Result<()> {
        if !self.fits(amount) {
            return Err(Error::BudgetExceeded {
                needed: amount,
                budget: self.max,
            });
        }
        self.used.fetch_add(amount as u64, Ordering::Relaxed);
        Ok(())
    }
}

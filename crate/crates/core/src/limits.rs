//! Process-wide resource limits for automaton constructions.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Default cap on states built by a single construction.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Environment variable overriding the default state budget.
pub const STATE_BUDGET_ENV: &str = "TRACERW_STATE_BUDGET";

static STATE_BUDGET: AtomicUsize = AtomicUsize::new(0);

/// Current state budget; reads the environment on first use.
pub fn state_budget() -> usize {
    let v = STATE_BUDGET.load(Ordering::Relaxed);
    if v != 0 {
        return v;
    }
    let v = std::env::var(STATE_BUDGET_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_STATE_BUDGET);
    STATE_BUDGET.store(v, Ordering::Relaxed);
    v
}

pub fn set_state_budget(n: usize) {
    STATE_BUDGET.store(n.max(1), Ordering::Relaxed);
}

pub(crate) fn check_states(count: usize, what: &str) -> Result<()> {
    let limit = state_budget();
    if count > limit {
        Err(Error::Resource { what: what.to_string(), limit })
    } else {
        Ok(())
    }
}

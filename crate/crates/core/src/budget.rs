//! Wall-clock budgets for long computations.
//!
//! Long-running operations take an optional [`Deadline`]; when it passes
//! they stop early and mark their result as partial instead of hanging.

use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub const fn none() -> Self {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Self {
        Deadline(Some(Instant::now() + d))
    }

    pub fn from_secs(secs: Option<f64>) -> Self {
        match secs {
            Some(s) => Self::after(Duration::from_secs_f64(s.max(0.0))),
            None => Self::none(),
        }
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

impl Default for Deadline {
    fn default() -> Self {
        Self::none()
    }
}

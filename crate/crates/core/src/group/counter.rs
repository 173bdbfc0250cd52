use std::sync::atomic::{AtomicU32, AtomicU64, AtomicU8, Ordering};

use serde::{Deserialize, Serialize};

/// Accounting bucket that group operations are charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Precompute,
    Sample,
}

impl Phase {
    fn slot(self) -> usize {
        match self {
            Phase::Precompute => 0,
            Phase::Sample => 1,
        }
    }

    fn from_slot(v: u8) -> Phase {
        if v == 0 {
            Phase::Precompute
        } else {
            Phase::Sample
        }
    }
}

/// Returned by [`OpCounter::hold_precompute`].
#[derive(Debug)]
pub struct PrecomputeGuard<'a> {
    counter: &'a OpCounter,
}

impl Drop for PrecomputeGuard<'_> {
    fn drop(&mut self) {
        self.counter.held.fetch_sub(1, Ordering::Relaxed);
    }
}

/// A snapshot of multiply/inverse totals.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub multiplies: u64,
    pub inverses: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.multiplies + self.inverses
    }

    pub fn since(&self, earlier: &OpCount) -> OpCount {
        OpCount {
            multiplies: self.multiplies - earlier.multiplies,
            inverses: self.inverses - earlier.inverses,
        }
    }
}

impl std::ops::Add for OpCount {
    type Output = OpCount;
    fn add(self, rhs: OpCount) -> OpCount {
        OpCount {
            multiplies: self.multiplies + rhs.multiplies,
            inverses: self.inverses + rhs.inverses,
        }
    }
}

/// Shared counter of oracle calls. Only multiplies and inverses are
/// charged; identity tests and comparisons are free.
///
/// Increments are atomic so one counter may be shared by many threads;
/// reads are advisory and carry no ordering guarantee.
#[derive(Debug, Default)]
pub struct OpCounter {
    multiplies: AtomicU64,
    inverses: AtomicU64,
    phase: AtomicU8,
    held: AtomicU32,
    bucket_mul: [AtomicU64; 2],
    bucket_inv: [AtomicU64; 2],
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    fn charged(&self) -> usize {
        if self.held.load(Ordering::Relaxed) > 0 {
            Phase::Precompute.slot()
        } else {
            self.phase().slot()
        }
    }

    pub(crate) fn record_multiply(&self) {
        self.multiplies.fetch_add(1, Ordering::Relaxed);
        self.bucket_mul[self.charged()].fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn record_inverse(&self) {
        self.inverses.fetch_add(1, Ordering::Relaxed);
        self.bucket_inv[self.charged()].fetch_add(1, Ordering::Relaxed);
    }

    /// Charges everything to the precompute bucket until the guard drops,
    /// whatever phase nested samplers switch to.
    pub fn hold_precompute(&self) -> PrecomputeGuard<'_> {
        self.held.fetch_add(1, Ordering::Relaxed);
        PrecomputeGuard { counter: self }
    }

    pub fn phase(&self) -> Phase {
        Phase::from_slot(self.phase.load(Ordering::Relaxed))
    }

    /// Switches the bucket that subsequent operations are charged to and
    /// returns the previous phase.
    pub fn set_phase(&self, phase: Phase) -> Phase {
        Phase::from_slot(self.phase.swap(phase.slot() as u8, Ordering::Relaxed))
    }

    pub fn snapshot(&self) -> OpCount {
        OpCount {
            multiplies: self.multiplies.load(Ordering::Relaxed),
            inverses: self.inverses.load(Ordering::Relaxed),
        }
    }

    pub fn bucket(&self, phase: Phase) -> OpCount {
        OpCount {
            multiplies: self.bucket_mul[phase.slot()].load(Ordering::Relaxed),
            inverses: self.bucket_inv[phase.slot()].load(Ordering::Relaxed),
        }
    }

    /// Clears the per-sample bucket; called at the start of each draw.
    pub fn reset_sample_bucket(&self) {
        let s = Phase::Sample.slot();
        self.bucket_mul[s].store(0, Ordering::Relaxed);
        self.bucket_inv[s].store(0, Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn buckets_follow_phase() {
        let c = OpCounter::new();
        c.record_multiply();
        c.set_phase(Phase::Sample);
        c.record_multiply();
        c.record_inverse();
        assert_eq!(c.bucket(Phase::Precompute), OpCount { multiplies: 1, inverses: 0 });
        assert_eq!(c.bucket(Phase::Sample), OpCount { multiplies: 1, inverses: 1 });
        c.reset_sample_bucket();
        assert_eq!(c.bucket(Phase::Sample).total(), 0);
        assert_eq!(c.snapshot().total(), 3);
    }

    #[test]
    fn held_precompute_overrides_phase() {
        let c = OpCounter::new();
        {
            let _outer = c.hold_precompute();
            c.set_phase(Phase::Sample);
            c.record_multiply();
            {
                let _inner = c.hold_precompute();
                c.record_inverse();
            }
            c.record_multiply();
        }
        c.record_multiply();
        assert_eq!(c.bucket(Phase::Precompute), OpCount { multiplies: 2, inverses: 1 });
        assert_eq!(c.bucket(Phase::Sample), OpCount { multiplies: 1, inverses: 0 });
    }

    #[test]
    fn concurrent_increments_are_not_lost() {
        let c = Arc::new(OpCounter::new());
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let c = Arc::clone(&c);
                std::thread::spawn(move || {
                    for _ in 0..1000 {
                        c.record_multiply();
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(c.snapshot().multiplies, 8000);
    }
}

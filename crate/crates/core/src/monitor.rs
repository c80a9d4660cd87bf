//! Performance-tracking queue and the reset rules that read it.

use alloc::collections::VecDeque;

/// Bounded FIFO of comparison bits; the oldest bit drops out once the
/// queue exceeds its capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerfQueue {
    bits: VecDeque<bool>,
    capacity: usize,
}

impl PerfQueue {
    pub fn new(capacity: usize) -> Self {
        PerfQueue { bits: VecDeque::with_capacity(capacity + 1), capacity }
    }

    /// Appends `bit`, then pops the front if the length exceeds capacity.
    pub fn push(&mut self, bit: bool) {
        self.bits.push_back(bit);
        if self.bits.len() > self.capacity {
            self.bits.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn clear(&mut self) {
        self.bits.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }
}

/// Alternating-learners registration: `false` (0) when the long learner is
/// acceptable (`err_l < tau`) or strictly better than the short one, `true`
/// (1) otherwise. Ties with an unacceptable long learner register 1.
#[inline]
pub fn register(err_l: f64, err_s: f64, tau: f64) -> bool {
    !(err_l < tau || err_l < err_s)
}

/// Registration variants for the paired-learner baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PairedRegistration {
    /// 1 iff `err_s < err_l`.
    #[default]
    ShortBetter,
    /// 1 iff `err_s < err_l` and `err_l >= tau`.
    ShortBetterUnacceptable,
}

impl PairedRegistration {
    pub fn register(self, err_l: f64, err_s: f64, tau: f64) -> bool {
        match self {
            PairedRegistration::ShortBetter => err_s < err_l,
            PairedRegistration::ShortBetterUnacceptable => err_s < err_l && err_l >= tau,
        }
    }
}

/// Which comparison/reset scheme drives the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Policy {
    /// Tolerance-aware registration, leastWait, overfit guard.
    #[default]
    Alternating,
    /// Reset when more than `delta · capacity` ones are queued; no leastWait,
    /// no overfit guard.
    Paired(PairedRegistration),
}

/// Queue plus the rule that turns it into reset decisions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monitor {
    queue: PerfQueue,
    policy: Policy,
    delta: f64,
    tau: f64,
    least_wait: usize,
}

impl Monitor {
    pub fn new(policy: Policy, capacity: usize, delta: f64, tau: f64, least_wait: usize) -> Self {
        Monitor { queue: PerfQueue::new(capacity), policy, delta, tau, least_wait }
    }

    pub fn bit_for(&self, err_l: f64, err_s: f64) -> bool {
        match self.policy {
            Policy::Alternating => register(err_l, err_s, self.tau),
            Policy::Paired(variant) => variant.register(err_l, err_s, self.tau),
        }
    }

    /// Registers the comparison outcome and returns the bit pushed.
    pub fn record(&mut self, err_l: f64, err_s: f64) -> bool {
        let bit = self.bit_for(err_l, err_s);
        self.queue.push(bit);
        bit
    }

    /// Whether the current queue asks for a reset.
    pub fn should_reset(&self) -> bool {
        let len = self.queue.len();
        let ones = self.queue.ones();
        match self.policy {
            Policy::Alternating => len > self.least_wait && (ones as f64) / (len as f64) > self.delta,
            Policy::Paired(_) => (ones as f64) > self.delta * self.queue.capacity() as f64,
        }
    }

    pub fn clear(&mut self) {
        self.queue.clear();
    }

    pub fn queue(&self) -> &PerfQueue {
        &self.queue
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registration_cases() {
        assert!(!register(0.5, 2.0, 1.0));
        assert!(register(2.0, 1.0, 1.0));
        assert!(!register(2.0, 3.0, 1.0));
        // tie with an unacceptable long learner
        assert!(register(2.0, 2.0, 1.0));
        // acceptable long learner never registers
        assert!(!register(0.9, 0.1, 1.0));
    }

    fn monitor_with(bits: &[bool], n0: usize, delta: f64) -> Monitor {
        let mut m = Monitor::new(Policy::Alternating, 20, delta, 1.0, n0);
        for &b in bits {
            // (2, 1) registers 1, (0, 1) registers 0 at tau = 1
            if b { m.record(2.0, 1.0) } else { m.record(0.0, 1.0) };
        }
        m
    }

    #[test]
    fn alternating_condition_examples() {
        assert!(monitor_with(&[true; 6], 5, 0.4).should_reset());
        assert!(!monitor_with(&[true; 4], 5, 0.4).should_reset());
        assert!(!monitor_with(&[true, false, false, false, false, true], 5, 0.4).should_reset());
    }

    #[test]
    fn queue_is_bounded() {
        let mut q = PerfQueue::new(3);
        for b in [true, false, true, true, false] {
            q.push(b);
            assert!(q.len() <= 3);
        }
        assert_eq!(q.iter().collect::<alloc::vec::Vec<_>>(), [true, true, false]);
    }

    #[test]
    fn paired_rule_counts_against_capacity() {
        let mut m = Monitor::new(Policy::Paired(PairedRegistration::ShortBetter), 20, 0.4, 1.0, 5);
        for _ in 0..8 {
            m.record(2.0, 1.0);
        }
        assert!(!m.should_reset());
        m.record(2.0, 1.0);
        assert!(m.should_reset());
        // short learner worse: registers 0 regardless of tau
        assert!(!m.bit_for(5.0, 6.0));
    }

    #[test]
    fn paired_variant_with_tolerance() {
        let v = PairedRegistration::ShortBetterUnacceptable;
        assert!(!v.register(0.5, 0.1, 1.0));
        assert!(v.register(1.5, 0.1, 1.0));
    }
}

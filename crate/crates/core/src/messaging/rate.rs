use std::collections::VecDeque;

/// Sliding-window limiter: at most `cap` admissions in any window of
/// `window` ticks.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    cap: usize,
    window: u64,
    admitted: VecDeque<u64>,
}

impl RateLimiter {
    pub fn new(cap: u32, window: u64) -> Self {
        Self {
            cap: cap as usize,
            window,
            admitted: VecDeque::with_capacity(cap as usize + 1),
        }
    }

    /// `now` must be non-decreasing across calls.
    pub fn admit(&mut self, now: u64) -> bool {
        while self
            .admitted
            .front()
            .is_some_and(|&t| t + self.window <= now)
        {
            self.admitted.pop_front();
        }
        if self.admitted.len() < self.cap {
            self.admitted.push_back(now);
            true
        } else {
            false
        }
    }
}

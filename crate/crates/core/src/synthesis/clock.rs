//! Time accounting for searches.

use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClockKind {
    Wall,
    /// Time advances by `1 / candidates_per_second` per executed candidate,
    /// which makes budgets reproducible across machines.
    Virtual {
        candidates_per_second: f64,
    },
}

#[derive(Clone, Debug)]
pub struct Clock {
    kind: ClockKind,
    start: Option<Instant>,
    ticks: u64,
}

impl Clock {
    pub fn start(kind: ClockKind) -> Self {
        let start = matches!(kind, ClockKind::Wall).then(Instant::now);
        Clock {
            kind,
            start,
            ticks: 0,
        }
    }

    /// Records one executed candidate.
    pub fn tick(&mut self) {
        self.ticks += 1;
    }

    pub fn elapsed(&self) -> f64 {
        match (self.kind, self.start) {
            (
                ClockKind::Virtual {
                    candidates_per_second,
                },
                _,
            ) => self.ticks as f64 / candidates_per_second,
            (ClockKind::Wall, Some(s)) => s.elapsed().as_secs_f64(),
            (ClockKind::Wall, None) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_time_counts_candidates() {
        let mut c = Clock::start(ClockKind::Virtual {
            candidates_per_second: 4.0,
        });
        for _ in 0..10 {
            c.tick();
        }
        assert_eq!(c.elapsed(), 2.5);
    }
}

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SimTime;

struct Entry<E> {
    time: SimTime,
    seq: u64,
    ev: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

/// Event queue ordered by `(time, sequence)`.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<E>>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Returns the sequence number assigned to the event.
    ///
    /// # Panics
    /// If `at` lies before the current time.
    pub fn schedule(&mut self, at: SimTime, ev: E) -> u64 {
        assert!(
            at >= self.now,
            "event scheduled in the past: {at} < {}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time: at, seq, ev });
        seq
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.time)
    }

    /// Pops the next event if its time is `<= t_end`, advancing the clock.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, u64, E)> {
        if self.heap.peek()?.time > t_end {
            return None;
        }
        let e = self.heap.pop()?;
        self.now = e.time;
        Some((e.time, e.seq, e.ev))
    }

    /// Drains every event with time `<= t_end`, then parks the clock at `t_end`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F)
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        while let Some((t, _, ev)) = self.pop_until(t_end) {
            handler(self, t, ev);
        }
        if t_end > self.now {
            self.now = t_end;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_by_time() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(1), "late");
        s.schedule(SimTime::from_millis(500), "early");
        let mut seen = vec![];
        s.run_until(SimTime::from_secs(2), |_, t, e| seen.push((t, e)));
        assert_eq!(
            seen,
            vec![
                (SimTime::from_millis(500), "early"),
                (SimTime::from_secs(1), "late")
            ]
        );
    }

    #[test]
    fn ties_break_by_sequence() {
        let mut s = Scheduler::new();
        for i in 0..7 {
            s.schedule(SimTime::from_secs(1), i);
        }
        let a = s.schedule(SimTime::from_secs(2), 7);
        let b = s.schedule(SimTime::from_secs(2), 8);
        assert_eq!((a, b), (7, 8));
        let mut seen = vec![];
        s.run_until(SimTime::from_secs(3), |_, _, e| seen.push(e));
        assert_eq!(seen, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn empty_run_is_noop() {
        let mut s: Scheduler<()> = Scheduler::new();
        s.run_until(SimTime::ZERO, |_, _, _| unreachable!());
        assert_eq!(s.now(), SimTime::ZERO);
    }

    #[test]
    fn handler_may_schedule_more() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::ZERO, 0u32);
        let mut count = 0;
        s.run_until(SimTime::from_secs(1), |s, t, n| {
            count += 1;
            if n < 5 {
                s.schedule(t + SimTime::from_millis(100), n + 1);
            }
        });
        assert_eq!(count, 6);
        assert_eq!(s.now(), SimTime::from_secs(1));
    }

    #[test]
    #[should_panic(expected = "in the past")]
    fn past_schedule_panics() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_secs(1), ());
        s.run_until(SimTime::from_secs(1), |_, _, _| {});
        s.schedule(SimTime::from_millis(10), ());
    }
}

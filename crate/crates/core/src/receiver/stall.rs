use std::collections::VecDeque;

use crate::engine::SimTime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamingAppConfig {
    pub playout_bps: u64,
    /// Media that must be buffered contiguously ahead of the playhead.
    pub lookahead: SimTime,
    pub data_bits: u64,
}

impl StreamingAppConfig {
    pub fn new(playout_bps: u64, data_bits: u64) -> Self {
        StreamingAppConfig {
            playout_bps,
            lookahead: SimTime::from_secs(1),
            data_bits,
        }
    }

    /// Seconds of media per segment.
    pub fn segment_duration(&self) -> f64 {
        self.data_bits as f64 / self.playout_bps as f64
    }

    /// Lookahead in segments.
    pub fn lookahead_segments(&self) -> u64 {
        let n = self.lookahead.as_secs_f64() / self.segment_duration();
        (n - 1e-9).ceil().max(1.0) as u64
    }
}

/// Total time the playout clock was not running, startup wait included.
///
/// Segment `i` starts playing once segments `i .. i+L` have all arrived and
/// segment `i-1` has finished. Returns `None` if any segment never arrived.
pub fn stall_time(arrivals: &[Option<SimTime>], cfg: &StreamingAppConfig, start: SimTime) -> Option<f64> {
    let f = arrivals.len();
    if f == 0 {
        return Some(0.0);
    }
    let times: Vec<f64> = arrivals
        .iter()
        .map(|a| a.map(SimTime::as_secs_f64))
        .collect::<Option<_>>()?;
    let l = cfg.lookahead_segments() as usize;
    let d = cfg.segment_duration();
    // sliding-window max of arrival over [i, i+l)
    let mut dq: VecDeque<usize> = VecDeque::new();
    let push = |dq: &mut VecDeque<usize>, j: usize| {
        while dq.back().is_some_and(|&k| times[k] <= times[j]) {
            dq.pop_back();
        }
        dq.push_back(j);
    };
    for j in 0..l.min(f) {
        push(&mut dq, j);
    }
    let mut clock = f64::NEG_INFINITY;
    for i in 0..f {
        while dq.front().is_some_and(|&k| k < i) {
            dq.pop_front();
        }
        let ready = times[*dq.front().expect("window non-empty")];
        clock = if i == 0 { ready } else { (clock + d).max(ready) };
        if i + l < f {
            push(&mut dq, i + l);
        }
    }
    let finish = clock + d;
    Some(finish - start.as_secs_f64() - f as f64 * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_1s_segments(lookahead_s: u64) -> StreamingAppConfig {
        StreamingAppConfig {
            playout_bps: 10_000,
            lookahead: SimTime::from_secs(lookahead_s),
            data_bits: 10_000,
        }
    }

    #[test]
    fn lookahead_at_three_mbps() {
        let c = StreamingAppConfig::new(3_000_000, 10_000);
        assert_eq!(c.lookahead_segments(), 300);
    }

    #[test]
    fn no_holes_only_startup() {
        let c = cfg_1s_segments(2);
        let mut a: Vec<_> = (0..10).map(|_| Some(SimTime::from_millis(100))).collect();
        a[1] = Some(SimTime::from_millis(1500));
        let s = stall_time(&a, &c, SimTime::ZERO).unwrap();
        assert!((s - 1.5).abs() < 1e-9, "{s}");
    }

    #[test]
    fn late_segment_pauses_exactly() {
        // hand-simulated playout clock: deadline of segment 5 is when it
        // enters the 2 s lookahead, t = 4; it lands at t = 7
        let c = cfg_1s_segments(2);
        let mut a: Vec<_> = (0..10).map(|_| Some(SimTime::ZERO)).collect();
        a[5] = Some(SimTime::from_secs(7));
        let s = stall_time(&a, &c, SimTime::ZERO).unwrap();
        assert!((s - 3.0).abs() < 1e-9, "{s}");
        // arriving before its deadline costs nothing
        a[5] = Some(SimTime::from_secs(4));
        assert!(stall_time(&a, &c, SimTime::ZERO).unwrap().abs() < 1e-9);
    }

    #[test]
    fn incomplete_trace() {
        let c = cfg_1s_segments(1);
        assert_eq!(stall_time(&[Some(SimTime::ZERO), None], &c, SimTime::ZERO), None);
    }

    #[test]
    fn brute_force_agrees() {
        // second-by-second reference simulation on a small trace
        let c = cfg_1s_segments(3);
        let arr = [0u64, 2, 1, 9, 3, 4, 12, 5, 5, 20];
        let a: Vec<_> = arr.iter().map(|s| Some(SimTime::from_secs(*s))).collect();
        let mut t = 0u64;
        let mut next = 0usize;
        let mut played = 0u64;
        while next < arr.len() {
            let hi = (next + 3).min(arr.len());
            if arr[next..hi].iter().all(|x| *x <= t) {
                next += 1;
                played += 1;
            }
            t += 1;
        }
        let reference = t as f64 - played as f64;
        let s = stall_time(&a, &c, SimTime::ZERO).unwrap();
        assert!((s - reference).abs() < 1e-9, "{s} vs {reference}");
    }
}

use num_rational::Ratio;

use crate::forwarding::NodeId;

/// Per-receiver statistics over one trigger range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AckerStats {
    pub receive_pkt_count: u64,
    pub mark_pkt_count: u64,
    pub last_receive_id: u64,
    pub range_start: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckerPolicy {
    /// Rank fraction of the target ACKer, counted from the best score.
    pub rank_target: f64,
    /// Half-width of the keep band around `rank_target`.
    pub band: f64,
}

impl Default for AckerPolicy {
    fn default() -> Self {
        AckerPolicy {
            rank_target: 0.60,
            band: 0.05,
        }
    }
}

/// Exact score; `degenerate` is set when the span is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub value: Ratio<i64>,
    pub degenerate: bool,
}

/// `(recv − 0.5·mark) / (last − start)`; an empty span scores 0.
pub fn acker_score(s: &AckerStats) -> Score {
    if s.last_receive_id <= s.range_start {
        return Score {
            value: Ratio::from_integer(0),
            degenerate: true,
        };
    }
    let num = 2 * s.receive_pkt_count as i64 - s.mark_pkt_count as i64;
    let den = 2 * (s.last_receive_id - s.range_start) as i64;
    Score {
        value: Ratio::new(num, den),
        degenerate: false,
    }
}

/// Receivers ordered best first; ties go to the lower id.
pub fn rank(scores: &[(NodeId, Ratio<i64>)]) -> Vec<NodeId> {
    let mut v: Vec<_> = scores.to_vec();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(id, _)| id).collect()
}

/// Keep `current` while its rank fraction lies in `R ± R_th`; otherwise
/// elect the receiver at rank fraction `R`.
pub fn select_acker(
    scores: &[(NodeId, Ratio<i64>)],
    policy: &AckerPolicy,
    current: Option<NodeId>,
) -> NodeId {
    assert!(!scores.is_empty(), "select_acker needs at least one score");
    let order = rank(scores);
    let n = order.len() as f64;
    if let Some(cur) = current {
        if let Some(pos) = order.iter().position(|&id| id == cur) {
            let frac = (pos + 1) as f64 / n;
            let eps = 1e-9;
            if frac >= policy.rank_target - policy.band - eps
                && frac <= policy.rank_target + policy.band + eps
            {
                return cur;
            }
        }
    }
    let idx = ((policy.rank_target * n).round() as usize).clamp(1, order.len()) - 1;
    order[idx]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(recv: u64, mark: u64, span: u64) -> AckerStats {
        AckerStats {
            receive_pkt_count: recv,
            mark_pkt_count: mark,
            last_receive_id: span,
            range_start: 0,
        }
    }

    #[test]
    fn score_examples() {
        assert_eq!(acker_score(&stats(100, 0, 100)).value, Ratio::from_integer(1));
        assert_eq!(acker_score(&stats(100, 40, 100)).value, Ratio::new(4, 5));
        assert_eq!(acker_score(&stats(60, 0, 100)).value, Ratio::new(3, 5));
        let d = acker_score(&stats(0, 0, 0));
        assert!(d.degenerate);
        assert_eq!(d.value, Ratio::from_integer(0));
    }

    fn ten() -> Vec<(NodeId, Ratio<i64>)> {
        // receiver i has score (20 - i)/20, so rank k (1-based) is receiver k-1
        (0..10).map(|i| (i, Ratio::new(20 - i as i64, 20))).collect()
    }

    #[test]
    fn inside_band_keeps_current() {
        let p = AckerPolicy::default();
        assert_eq!(select_acker(&ten(), &p, Some(5)), 5);
    }

    #[test]
    fn outside_band_elects_rank_six() {
        let p = AckerPolicy::default();
        assert_eq!(select_acker(&ten(), &p, Some(8)), 5);
        assert_eq!(select_acker(&ten(), &p, None), 5);
    }

    #[test]
    fn fewer_marks_outrank() {
        let s = vec![
            (1, acker_score(&stats(100, 40, 100)).value),
            (2, acker_score(&stats(100, 0, 100)).value),
        ];
        assert_eq!(rank(&s), vec![2, 1]);
    }

    #[test]
    fn ties_by_lower_id() {
        let s = vec![(7, Ratio::new(1, 2)), (3, Ratio::new(1, 2))];
        assert_eq!(rank(&s), vec![3, 7]);
    }
}

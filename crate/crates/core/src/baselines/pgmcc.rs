use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::forwarding::NodeId;

/// Slowest receiver by score. The current ACKer is kept unless someone is
/// strictly lower; ties otherwise go to the lower id.
pub fn pgmcc_select(scores: &[(NodeId, Ratio<i64>)], current: Option<NodeId>) -> NodeId {
    assert!(!scores.is_empty(), "pgmcc_select needs at least one score");
    let min = scores.iter().map(|(_, s)| *s).min().expect("non-empty");
    if let Some(c) = current {
        if scores.iter().any(|(id, s)| *id == c && *s == min) {
            return c;
        }
    }
    scores
        .iter()
        .filter(|(_, s)| *s == min)
        .map(|(id, _)| *id)
        .min()
        .expect("non-empty")
}

/// Sending rate when paced by the slowest receiver.
pub fn pgmcc_rate(receiver_goodputs: &BTreeMap<NodeId, f64>) -> f64 {
    assert!(!receiver_goodputs.is_empty(), "pgmcc_rate needs at least one receiver");
    receiver_goodputs.values().copied().fold(f64::INFINITY, f64::min)
}

/// Group goodput when every receiver gets the paced stream.
pub fn pgmcc_aggregate(receiver_goodputs: &BTreeMap<NodeId, f64>) -> f64 {
    pgmcc_rate(receiver_goodputs) * receiver_goodputs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_bottlenecks() {
        let g: BTreeMap<NodeId, f64> = [(1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0)].into();
        assert_eq!(pgmcc_rate(&g), 1.0);
        assert_eq!(pgmcc_aggregate(&g), 4.0);
    }

    #[test]
    fn single_receiver() {
        let g: BTreeMap<NodeId, f64> = [(9, 7.0)].into();
        assert_eq!(pgmcc_rate(&g), 7.0);
    }

    #[test]
    fn competition_leaf() {
        // five receivers of P1 limited to 1 Mbps by sharing, two of P2 behind 0.3
        let p1 = 1.0 * 5.0;
        let g: BTreeMap<NodeId, f64> = [(1, 0.3), (2, 1.5)].into();
        let total = p1 + pgmcc_aggregate(&g);
        assert!((total - 5.6).abs() < 1e-12);
    }

    #[test]
    fn switch_only_when_strictly_lower() {
        let r = |n, d| Ratio::new(n, d);
        let s = vec![(1, r(1, 2)), (2, r(1, 2)), (3, r(3, 4))];
        assert_eq!(pgmcc_select(&s, Some(2)), 2);
        assert_eq!(pgmcc_select(&s, Some(3)), 1);
        assert_eq!(pgmcc_select(&s, None), 1);
    }
}

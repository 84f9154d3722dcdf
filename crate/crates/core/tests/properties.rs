use proptest::prelude::*;

use said_sim::acceptance::lru_oracle_mismatches;
use said_sim::analysis::{self, rat, SyncParams};
use said_sim::engine::SimTime;
use said_sim::forwarding::{
    AckerTag, DataInfo, FaceInfo, InterestKind, Packet, PacketKind, Router, RouterAction, MPR_INF,
};
use said_sim::naming::{chunk_of, parse_name, parse_name_with, ContentName, NamingConfig};

fn component() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9]{0,6}"
}

proptest! {
    #[test]
    fn name_round_trip(
        comps in prop::collection::vec(component(), 1..5),
        version in prop::option::of(0u64..1000),
        seg in prop::option::of((0u64..1_000_000, 1u64..500)),
    ) {
        let mut name = ContentName::new(comps).unwrap();
        if let Some(v) = version {
            name = name.with_version(v);
        }
        let n = seg.map_or(100, |(_, n)| n);
        if let Some((s, n)) = seg {
            name = name.with_segment(s, n).unwrap();
        }
        let text = name.to_string();
        let back = parse_name_with(&text, &NamingConfig::new(n).unwrap()).unwrap();
        prop_assert_eq!(&back, &name);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn chunk_bounds(s in 0u64..1_000_000_000_000, n in 1u64..1_000_000) {
        let c = chunk_of(s, n).unwrap();
        prop_assert!(c * n <= s);
        prop_assert!(s < (c + 1) * n);
    }

    #[test]
    fn faster_slow_receiver_or_bigger_cache_stays_in_sync(
        bh in 1i64..50,
        bl_num in 1i64..100,
        more in 0i64..100,
        f in 1u64..2000,
        c_frac in 0u64..=100,
        c_more in 0u64..100,
    ) {
        let bl = rat(bl_num, 100) * rat(bh, 1);
        let c = f * c_frac / 100;
        let p = SyncParams::new(bl.clone(), rat(bh, 1), c, f).unwrap();
        if analysis::in_sync_predicate(&p) {
            let faster = (bl + rat(more, 100) * rat(bh, 1)).min(rat(bh, 1));
            let q = SyncParams::new(faster, rat(bh, 1), c, f).unwrap();
            prop_assert!(analysis::in_sync_predicate(&q));
            let r = SyncParams::new(p.b_l.clone(), rat(bh, 1), (c + c_more).min(f), f).unwrap();
            prop_assert!(analysis::in_sync_predicate(&r));
        }
    }

    #[test]
    fn predicate_matches_branch_walk(bl in 1i64..=40, bh in 1i64..=40, f in 1u64..300, c_frac in 0u64..=100) {
        prop_assume!(bl <= bh);
        let c = f * c_frac / 100;
        let p = SyncParams::new(rat(bl, 1), rat(bh, 1), c, f).unwrap();
        prop_assert_eq!(
            analysis::in_sync_predicate(&p),
            analysis::branch_oracle(&p.b_l, &p.b_h, c, f)
        );
    }

    #[test]
    fn deeper_trees_need_no_more_than_shallow(c in 0u64..100, f in 100u64..1000, k in 1u32..30) {
        let a = analysis::min_rate_ratio_tree(c, f, k).unwrap();
        let b = analysis::min_rate_ratio_tree(c, f, k + 1).unwrap();
        prop_assert!(b <= a);
    }

    #[test]
    fn lru_matches_recency_list(seed in any::<u64>(), ops in 200usize..3000) {
        prop_assert_eq!(lru_oracle_mismatches(seed, ops), 0);
    }
}

#[derive(Debug, Clone)]
enum Op {
    Anp { face: u32, delta: i64 },
    /// ANP Data from upstream; with `drop` the first debited copy is lost
    /// at egress, which refunds at once.
    Data { drop: bool },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (1u32..=2, -3i64..=6).prop_map(|(face, delta)| Op::Anp { face, delta }),
        4 => any::<bool>().prop_map(|drop| Op::Data { drop }),
    ]
}

fn flow() -> ContentName {
    parse_name("/prop/_v1").unwrap()
}

/// Face 0 upstream, faces 1 and 2 downstream hosts.
fn router() -> Router {
    let faces = vec![
        FaceInfo { peer: 100, peer_is_router: true },
        FaceInfo { peer: 101, peer_is_router: false },
        FaceInfo { peer: 102, peer_is_router: false },
    ];
    let mut r = Router::new(1, faces, 8);
    r.fib.add_static(flow(), 0, false);
    r.checks = true;
    r
}

fn anp_data(seg: u64) -> Packet {
    let info = DataInfo {
        segment: seg,
        anp_stream: true,
        mpr: MPR_INF,
        mark: false,
        acker: AckerTag::none(),
        checksum: seg,
        source: 100,
        pr_trace: Some(vec![]),
        debited: false,
    };
    Packet::data(flow().with_segment(seg, 100).unwrap(), info, 10_000, SimTime::ZERO)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// PR stays within what was asked and not yet served, served never
    /// exceeds requested, and every stamped MPR equals its hop trace.
    #[test]
    fn router_sequences_keep_balance(ops in prop::collection::vec(op(), 1..200)) {
        let mut r = router();
        let mut seg = 0u64;
        for (i, o) in ops.iter().enumerate() {
            let now = SimTime::from_millis(i as u64);
            let mut out = Vec::new();
            match *o {
                Op::Anp { face, delta } => {
                    if delta != 0 {
                        let p = Packet::interest(flow(), InterestKind::Anp { delta }, 100 + face, now);
                        r.handle(now, p, face, &mut out);
                    }
                }
                Op::Data { .. } => {
                    r.handle(now, anp_data(seg), 0, &mut out);
                    seg += 1;
                }
            }
            let mut drop = matches!(o, Op::Data { drop: true });
            let mut pending = out;
            while !pending.is_empty() {
                let mut next = Vec::new();
                for a in pending {
                    match a {
                        RouterAction::ScheduleFlush { flow } => r.flush(now, &flow, &mut next),
                        RouterAction::Send { face, pkt } => {
                            if let PacketKind::Data(d) = &pkt.kind {
                                let expect = d.pr_trace.as_ref().and_then(|t| t.iter().copied().min()).unwrap_or(MPR_INF);
                                prop_assert_eq!(d.mpr, expect);
                                if d.debited && drop {
                                    drop = false;
                                    r.refund(&flow(), face, &mut next);
                                }
                            }
                        }
                    }
                }
                pending = next;
            }
            if let Some(e) = r.pit.get(&flow()) {
                for f in &e.faces {
                    prop_assert!(f.served_total <= f.requested_total, "face {} served {} > requested {}", f.face, f.served_total, f.requested_total);
                    prop_assert!(u64::from(f.pr) <= f.requested_total - f.served_total);
                }
            }
            prop_assert!(r.violations.is_empty(), "{:?}", r.violations);
        }
    }
}

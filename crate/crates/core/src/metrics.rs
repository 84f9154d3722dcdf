//! Long-format metrics rows and their CSV form.

use std::fmt::Write as _;

use crate::world::{Outcome, ReceiverApp};

pub const CSV_HEADER: &str = "time,entity,metric,value";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub time: f64,
    pub entity: String,
    pub metric: String,
    pub value: f64,
}

fn rec(out: &mut Vec<MetricsRecord>, time: f64, entity: &str, metric: &str, value: f64) {
    out.push(MetricsRecord {
        time,
        entity: entity.to_string(),
        metric: metric.to_string(),
        value,
    });
}

fn bins_to_rows(out: &mut Vec<MetricsRecord>, o: &Outcome, entity: &str, metric: &str, bins: &[u64]) {
    let w = o.bin.as_secs_f64();
    let n = (o.scenario.duration_s / w).ceil() as usize;
    for i in 0..n {
        let bits = bins.get(i).copied().unwrap_or(0);
        rec(out, i as f64 * w, entity, metric, bits as f64 / w / 1e6);
    }
}

/// Every row for a finished run, in a fixed order: per-bin series first,
/// then sampled gauges, then end-of-run summaries.
pub fn records(o: &Outcome) -> Vec<MetricsRecord> {
    let mut out = Vec::new();
    for f in &o.flows {
        let pe = format!("{}:{}", f.provider_node, f.name);
        bins_to_rows(&mut out, o, &pe, "send_mbps", &f.provider.sent_bits_bins);
        for r in &f.receivers {
            let e = format!("{}:{}", r.node, f.name);
            bins_to_rows(&mut out, o, &e, "goodput_mbps", r.app.goodput_bins());
        }
    }
    for s in &o.samples {
        rec(&mut out, s.time, &s.entity, &s.metric, s.value);
    }
    let end = o.scenario.duration_s;
    for f in &o.flows {
        let p = &f.provider;
        let pe = format!("{}:{}", f.provider_node, f.name);
        let sent = p.anp_tx.iter().filter(|&&c| c > 0).count();
        rec(&mut out, end, &pe, "segments_sent", sent as f64);
        rec(&mut out, end, &pe, "first_pass_max", p.anp_tx.iter().copied().max().unwrap_or(0) as f64);
        rec(&mut out, end, &pe, "repair_tx", p.repair_tx.iter().map(|&c| c as f64).sum());
        rec(&mut out, end, &pe, "retransmissions_seen", p.retransmissions_seen as f64);
        rec(&mut out, end, &pe, "elections", p.elections as f64);
        // how many segments left the provider exactly k times
        let mut hist = std::collections::BTreeMap::new();
        for (a, r) in p.anp_tx.iter().zip(&p.repair_tx) {
            *hist.entry(a + r).or_insert(0u64) += 1;
        }
        for (k, n) in hist {
            rec(&mut out, end, &pe, &format!("tx_count_{k}"), n as f64);
        }
        for r in &f.receivers {
            let e = format!("{}:{}", r.node, f.name);
            let done = r.app.completion().map_or(f64::INFINITY, |c| (c - r.start).as_secs_f64());
            rec(&mut out, end, &e, "completion_s", done);
            rec(&mut out, end, &e, "received_pkts", r.app.received() as f64);
            match &r.app {
                ReceiverApp::Said(s) => {
                    let m = &s.metrics;
                    if let Some(st) = s.stall_time() {
                        rec(&mut out, end, &e, "stall_s", st);
                    } else if matches!(s.cfg.app, crate::receiver::AppKind::Streaming(_)) {
                        rec(&mut out, end, &e, "stall_s", f64::INFINITY);
                    }
                    rec(&mut out, end, &e, "anp_received", m.anp_received as f64);
                    rec(&mut out, end, &e, "marks_seen", m.marks_seen as f64);
                    rec(&mut out, end, &e, "repairs_requested", s.repair.requested as f64);
                    rec(&mut out, end, &e, "repairs_from_peers", m.repairs_from_peers as f64);
                    rec(&mut out, end, &e, "repairs_from_cache", m.repairs_from_cache as f64);
                    rec(&mut out, end, &e, "repairs_from_provider", m.repairs_from_provider as f64);
                    rec(&mut out, end, &e, "repairs_served", m.repairs_served as f64);
                    rec(&mut out, end, &e, "unrepaired", s.unrepaired() as f64);
                    rec(&mut out, end, &e, "duplicates", m.duplicates as f64);
                    rec(&mut out, end, &e, "acks_sent", m.acks_sent as f64);
                    rec(&mut out, end, &e, "window_halvings", m.halvings.len() as f64);
                }
                ReceiverApp::Icp(i) => {
                    let m = &i.metrics;
                    let got = (m.cache_served + m.provider_served).max(1);
                    rec(&mut out, end, &e, "requests", m.requests as f64);
                    rec(&mut out, end, &e, "re_requests", m.re_requests as f64);
                    rec(&mut out, end, &e, "cache_served", m.cache_served as f64);
                    rec(&mut out, end, &e, "cache_hit_ratio", m.cache_served as f64 / got as f64);
                    rec(&mut out, end, &e, "window_halvings", m.halvings as f64);
                }
            }
        }
    }
    for (name, c) in &o.routers {
        rec(&mut out, end, name, "cache_hits", c.cache_hits as f64);
        rec(&mut out, end, name, "cache_misses", c.cache_misses as f64);
        rec(&mut out, end, name, "pit_aggregations", c.pit_aggregations as f64);
        rec(&mut out, end, name, "unsolicited", c.unsolicited as f64);
        rec(&mut out, end, name, "no_route", c.no_route as f64);
        rec(&mut out, end, name, "anp_propagations", c.anp_propagations as f64);
    }
    for (name, s) in &o.links {
        let e = format!("link:{name}");
        rec(&mut out, end, &e, "bits_sent", s.bits_sent as f64);
        rec(&mut out, end, &e, "marked", s.marked as f64);
        rec(&mut out, end, &e, "dropped", s.dropped as f64);
    }
    for (g, avg, ratio) in o.fairness() {
        let e = format!("group:{g}");
        rec(&mut out, end, &e, "avg_mbps", avg);
        rec(&mut out, end, &e, "avg_over_fair", ratio);
    }
    rec(&mut out, end, "network", "load_bits", o.network_load_bits() as f64);
    rec(&mut out, end, "network", "mean_completion_s", o.mean_completion_s());
    rec(&mut out, end, "network", "violations", o.violations.len() as f64);
    rec(&mut out, end, "network", "events", o.events as f64);
    out
}

/// The effective configuration as `# ` comment lines, then the rows.
pub fn to_csv(o: &Outcome, rows: &[MetricsRecord]) -> String {
    let mut s = String::new();
    for line in o.scenario.to_toml().lines() {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.time, r.entity, r.metric, r.value);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;
    use crate::world::run_scenario;

    #[test]
    fn csv_shape() {
        let mut sc = builtin("fig1:said").unwrap();
        sc.duration_s = 2.0;
        let o = run_scenario(&sc).unwrap();
        let rows = records(&o);
        let csv = to_csv(&o, &rows);
        assert!(csv.starts_with("# "));
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], CSV_HEADER);
        assert_eq!(body.len(), rows.len() + 1);
        assert!(body[1..].iter().all(|l| l.split(',').count() == 4));
        assert!(rows.iter().any(|r| r.metric == "completion_s" && r.value.is_infinite()));
    }
}

//! Out-of-sync model: when can a cache of `C` packets keep a slow and a
//! fast receiver of an `F`-packet flow served by one upstream transmission?
//!
//! Closed forms are decided in exact rationals. The `*_oracle` functions
//! step a discrete fluid trace instead and serve as an independent check.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncParams {
    pub b_l: BigRational,
    pub b_h: BigRational,
    /// Cache packets available to the flow.
    pub c: u64,
    /// Flow size in packets.
    pub f: u64,
    /// Tree depth in levels.
    pub k: u32,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("need 0 < B_L <= B_H")]
    Rates,
    #[error("flow size must be positive")]
    EmptyFlow,
    #[error("tree depth must be at least 1")]
    Depth,
    #[error("cache {c} larger than flow {f}")]
    CacheTooLarge { c: u64, f: u64 },
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl SyncParams {
    pub fn new(b_l: BigRational, b_h: BigRational, c: u64, f: u64) -> Result<Self, AnalysisError> {
        let p = SyncParams { b_l, b_h, c, f, k: 1 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_depth(mut self, k: u32) -> Result<Self, AnalysisError> {
        self.k = k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.b_l <= BigRational::zero() || self.b_l > self.b_h {
            return Err(AnalysisError::Rates);
        }
        if self.f == 0 {
            return Err(AnalysisError::EmptyFlow);
        }
        if self.k == 0 {
            return Err(AnalysisError::Depth);
        }
        Ok(())
    }

    pub fn ratio(&self) -> BigRational {
        &self.b_l / &self.b_h
    }
}

/// `B_L / B_H >= 1 - C/F`.
pub fn in_sync_predicate(p: &SyncParams) -> bool {
    p.ratio() >= BigRational::one() - int(p.c) / int(p.f)
}

/// Largest frontier gap between the two receivers, in packets.
pub fn max_gap_exact(b_l: &BigRational, b_h: &BigRational, f: u64) -> BigRational {
    (BigRational::one() - b_l / b_h) * int(f)
}

pub fn max_gap(b_l: f64, b_h: f64, f: u64) -> f64 {
    (1.0 - b_l / b_h) * f as f64
}

/// Smallest `B_L / B_H` that keeps a `k`-level tree in sync.
pub fn min_rate_ratio_tree(c: u64, f: u64, k: u32) -> Result<BigRational, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::Depth);
    }
    if f == 0 {
        return Err(AnalysisError::EmptyFlow);
    }
    if c > f {
        return Err(AnalysisError::CacheTooLarge { c, f });
    }
    let per_level = BigRational::one() - int(c) / int(f);
    Ok(num_traits::pow(per_level, k as usize))
}

/// Same bound with a fractional cache share `c_over_f`.
pub fn min_rate_ratio_tree_frac(c_over_f: &BigRational, k: u32) -> BigRational {
    num_traits::pow(BigRational::one() - c_over_f, k as usize)
}

/// Walk the fast receiver through all `f` packets; after each one the slow
/// receiver holds `i * b_l / b_h` of the stream. False as soon as the gap
/// exceeds `c`.
pub fn branch_oracle(b_l: &BigRational, b_h: &BigRational, c: u64, f: u64) -> bool {
    let c = int(c);
    let step = b_l / b_h;
    let mut slow = BigRational::zero();
    for i in 1..=f {
        slow += &step;
        if int(i) - &slow > c {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    SingleBranch,
    Tree(u32),
}

/// Check a chain of downstream rates, fastest first; each router sees its
/// parent-side rate and the next slower child.
pub fn chain_oracle(rates: &[BigRational], c: u64, f: u64) -> bool {
    rates
        .windows(2)
        .all(|w| branch_oracle(&w[1], &w[0], c, f))
}

/// Smallest per-level ratio `j / f` that the branch oracle accepts.
fn per_level_floor(c: u64, f: u64) -> BigRational {
    let one = BigRational::one();
    let (mut lo, mut hi) = (0u64, f);
    // hi always passes: equal rates never drift apart
    while lo < hi {
        let mid = (lo + hi) / 2;
        let r = int(mid) / int(f);
        if r > BigRational::zero() && branch_oracle(&r, &one, c, f) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    int(hi) / int(f)
}

/// Discrete check of whether the flow stays in sync.
///
/// For a tree, the slow receiver's deficit is spread over the levels as
/// evenly as the per-level limit allows; the tree is in sync iff that
/// chain reaches `B_L` with every router passing the branch check.
pub fn gap_oracle(p: &SyncParams, mode: OracleMode) -> bool {
    match mode {
        OracleMode::SingleBranch => branch_oracle(&p.b_l, &p.b_h, p.c, p.f),
        OracleMode::Tree(k) => {
            let rho = per_level_floor(p.c, p.f);
            let mut chain = vec![p.b_h.clone()];
            for _ in 0..k {
                let next = chain.last().unwrap() * &rho;
                chain.push(if next > p.b_l { next } else { p.b_l.clone() });
            }
            chain.last() == Some(&p.b_l) && chain_oracle(&chain, p.c, p.f)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub ratio: BigRational,
    pub c_over_f: BigRational,
    pub f: u64,
    pub k: u32,
    pub predicted: bool,
    pub oracle: bool,
}

impl RegionRow {
    pub fn agrees(&self) -> bool {
        self.predicted == self.oracle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub ratios: Vec<BigRational>,
    pub c_over_f: Vec<BigRational>,
    pub flow_sizes: Vec<u64>,
    pub depths: Vec<u32>,
}

impl Default for Grid {
    /// Ratios 0.10..=1.00 and C/F 0..=1 in steps of 0.05, F in {100, 1000}.
    fn default() -> Self {
        Grid {
            ratios: (2..=20).map(|i| rat(i, 20)).collect(),
            c_over_f: (0..=20).map(|i| rat(i, 20)).collect(),
            flow_sizes: vec![100, 1000],
            depths: vec![1],
        }
    }
}

impl Grid {
    pub fn points(&self) -> usize {
        self.ratios.len() * self.c_over_f.len() * self.flow_sizes.len() * self.depths.len()
    }
}

/// Evaluate every grid point. Row order is fixed by the grid, not by
/// scheduling.
pub fn sweep(grid: &Grid) -> Vec<RegionRow> {
    let mut pts = Vec::with_capacity(grid.points());
    for &k in &grid.depths {
        for &f in &grid.flow_sizes {
            for cf in &grid.c_over_f {
                for r in &grid.ratios {
                    pts.push((k, f, cf.clone(), r.clone()));
                }
            }
        }
    }
    pts.into_par_iter()
        .map(|(k, f, cf, r)| {
            let c = (&cf * int(f)).floor().to_integer().to_u64().unwrap_or(0);
            let p = SyncParams {
                b_l: r.clone(),
                b_h: BigRational::one(),
                c,
                f,
                k,
            };
            let bound = min_rate_ratio_tree(c, f, k).expect("grid in range");
            let predicted = if k == 1 { in_sync_predicate(&p) } else { r >= bound };
            let mode = if k == 1 {
                OracleMode::SingleBranch
            } else {
                OracleMode::Tree(k)
            };
            RegionRow {
                ratio: r,
                c_over_f: cf,
                f,
                k,
                predicted,
                oracle: gap_oracle(&p, mode),
            }
        })
        .collect()
}

pub const REGION_HEADER: &str = "ratio,c_over_f,F,k,predicted,oracle";

pub fn region_csv(rows: &[RegionRow]) -> String {
    let mut s = String::from(REGION_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{:.4},{:.4},{},{},{},{}\n",
            to_f64(&r.ratio),
            to_f64(&r.c_over_f),
            r.f,
            r.k,
            r.predicted as u8,
            r.oracle as u8
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bl: i64, bh: i64, c: u64, f: u64) -> SyncParams {
        SyncParams::new(rat(bl, 1), rat(bh, 1), c, f).unwrap()
    }

    #[test]
    fn fig1_values_desync() {
        assert!(!in_sync_predicate(&p(1, 2, 50, 8965)));
    }

    #[test]
    fn homogeneous_always_in_sync() {
        for c in [0, 1, 10] {
            assert!(in_sync_predicate(&p(3, 3, c, 100)));
        }
    }

    #[test]
    fn boundary_is_in_sync() {
        let q = SyncParams::new(rat(99375, 100000), rat(1, 1), 1, 160).unwrap();
        assert!(in_sync_predicate(&q));
        assert!(gap_oracle(&q, OracleMode::SingleBranch));
    }

    #[test]
    fn max_gap_values() {
        assert_eq!(max_gap(1.0, 2.0, 8965), 4482.5);
        assert_eq!(max_gap(5.0, 5.0, 40), 0.0);
        assert_eq!(max_gap(1.0, 4.0, 100), 75.0);
        assert_eq!(max_gap_exact(&rat(1, 1), &rat(2, 1), 8965), rat(8965, 2));
    }

    #[test]
    fn deep_tree_bound() {
        let r = min_rate_ratio_tree(1, 160, 50).unwrap();
        let mbps = to_f64(&r) * 100.0;
        assert!(mbps > 73.0 && mbps < 73.2, "{mbps}");
        assert_eq!(min_rate_ratio_tree(0, 10, 4).unwrap(), rat(1, 1));
        assert_eq!(min_rate_ratio_tree(50, 8965, 1).unwrap(), rat(8915, 8965));
    }

    #[test]
    fn ten_packet_trace() {
        assert!(!branch_oracle(&rat(1, 1), &rat(2, 1), 4, 10));
        assert!(branch_oracle(&rat(1, 1), &rat(2, 1), 5, 10));
    }

    #[test]
    fn two_level_boundary() {
        // per-level 1 - C/F = 0.8, so 0.64 overall is the edge
        let at = SyncParams::new(rat(16, 25), rat(1, 1), 20, 100).unwrap();
        assert!(gap_oracle(&at, OracleMode::Tree(2)));
        let below = SyncParams::new(rat(639, 1000), rat(1, 1), 20, 100).unwrap();
        assert!(!gap_oracle(&below, OracleMode::Tree(2)));
    }

    #[test]
    fn bad_params() {
        assert_eq!(SyncParams::new(rat(2, 1), rat(1, 1), 0, 1), Err(AnalysisError::Rates));
        assert_eq!(SyncParams::new(rat(1, 1), rat(1, 1), 0, 0), Err(AnalysisError::EmptyFlow));
        assert!(min_rate_ratio_tree(1, 10, 0).is_err());
    }

    #[test]
    fn grid_has_no_disagreements() {
        let mut g = Grid::default();
        g.depths = vec![1, 2, 3];
        let rows = sweep(&g);
        assert_eq!(rows.len(), 19 * 21 * 2 * 3);
        let bad: Vec<_> = rows.iter().filter(|r| !r.agrees()).collect();
        assert!(bad.is_empty(), "{bad:?}");
    }
}

//! Adversarial key-stream generators: static CDF poisoning, black-box and
//! white-box insert attacks, and the real-key control stream.
//!
//! Every generator is a pure function of its inputs and seed; identical calls
//! produce identical streams.

use crate::error::{Error, Result};
use crate::learned_index::{NodeView, StructuralStats};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;

/// Gaps at most this wide are enumerated exhaustively when picking poisoning
/// candidates; wider gaps contribute their endpoints-adjacent integers, their
/// midpoint, and one seeded interior sample.
const EXHAUSTIVE_GAP_WIDTH: u64 = 64;

/// How many of the widest gaps feed candidates into each greedy step.
pub const DEFAULT_CANDIDATE_GAPS: usize = 256;

/// Adversarial insert budget: `alpha * clean_size` keys delivered in batches
/// of `batch_size` over `rounds() = ceil(alpha * N / B)` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackBudget {
    pub alpha: f64,
    pub clean_size: u64,
    pub batch_size: u64,
}

impl AttackBudget {
    pub fn new(alpha: f64, clean_size: u64, batch_size: u64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParam(format!("alpha must be > 0, got {alpha}")));
        }
        if clean_size == 0 || batch_size == 0 {
            return Err(Error::InvalidParam(
                "clean_size and batch_size must be >= 1".into(),
            ));
        }
        Ok(Self {
            alpha,
            clean_size,
            batch_size,
        })
    }

    /// `ceil(alpha * N / B)`. The quotient is nudged down by 1e-9 before the
    /// ceiling so binary representations of round decimals (0.2 * 100000 /
    /// 1000 computing as 20.000000000000004) do not add a phantom round.
    pub fn rounds(&self) -> u64 {
        let q = self.alpha * self.clean_size as f64 / self.batch_size as f64;
        (q - 1e-9).ceil().max(1.0) as u64
    }

    pub fn total_inserts(&self) -> u64 {
        self.rounds() * self.batch_size
    }

    /// Key count for the static setting: `round(alpha * N)`.
    pub fn static_budget(&self) -> u64 {
        (self.alpha * self.clean_size as f64).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackVariant {
    StaticPoison,
    BlackBoxAca,
    WhiteBoxAca,
    RealKeyControl,
}

impl fmt::Display for AttackVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttackVariant::StaticPoison => "static",
            AttackVariant::BlackBoxAca => "blackbox",
            AttackVariant::WhiteBoxAca => "whitebox",
            AttackVariant::RealKeyControl => "control",
        };
        f.write_str(s)
    }
}

impl FromStr for AttackVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(AttackVariant::StaticPoison),
            "blackbox" => Ok(AttackVariant::BlackBoxAca),
            "whitebox" => Ok(AttackVariant::WhiteBoxAca),
            "control" => Ok(AttackVariant::RealKeyControl),
            other => Err(Error::InvalidParam(format!(
                "unknown variant '{other}' (expected static|blackbox|whitebox|control)"
            ))),
        }
    }
}

/// Black-box key selection strategy over the global key range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BlackBoxStrategy {
    Uniform,
    /// Uniform around a fresh random center each round, spanning
    /// `width_fraction` of the global range.
    Clustered { width_fraction: f64 },
}

impl Default for BlackBoxStrategy {
    fn default() -> Self {
        BlackBoxStrategy::Uniform
    }
}

// ---------------------------------------------------------------------------
// Static poisoning
// ---------------------------------------------------------------------------

/// A maximal run of absent integers strictly between two working-set keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Gap {
    lo: u64,
    hi: u64,
}

impl Gap {
    fn width(&self) -> u64 {
        self.hi - self.lo - 1
    }
}

impl Ord for Gap {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // widest first; lowest key first on ties
        self.width()
            .cmp(&other.width())
            .then_with(|| other.lo.cmp(&self.lo))
    }
}

impl PartialOrd for Gap {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Running sums for the least-squares line over `(z, rank)` pairs, where `z`
/// is the key normalized to the clean hull. Rank sums have closed forms
/// because ranks are always the consecutive integers `0..n`.
struct FitStats {
    sz: f64,
    szz: f64,
    szy: f64,
}

fn mse_with_candidate(
    stats: &FitStats,
    suffix_z: &[f64],
    n: usize,
    z_c: f64,
    rank: usize,
) -> f64 {
    let m = (n + 1) as f64;
    let sz = stats.sz + z_c;
    let szz = stats.szz + z_c * z_c;
    let szy = stats.szy + z_c * rank as f64 + suffix_z[rank];
    let sy = (n as f64) * m / 2.0;
    let syy = (n as f64) * m * (2.0 * n as f64 + 1.0) / 6.0;

    let szz_c = szz - sz * sz / m;
    let szy_c = szy - sz * sy / m;
    let syy_c = syy - sy * sy / m;
    let sse = if szz_c <= 0.0 {
        syy_c
    } else {
        syy_c - szy_c * szy_c / szz_c
    };
    sse / m
}

/// Greedy CDF poisoner: repeatedly insert the integer key, drawn from gaps
/// between adjacent working-set keys, that maximizes the mean squared error
/// of a least-squares line fit to the working set's `(key, rank)` pairs.
/// Stops early once no integer gap remains. Output keys are unique, disjoint
/// from `clean_keys`, strictly inside the clean hull, and listed in selection
/// order (so a prefix of the output is the result for a smaller budget).
pub fn generate_static_poison(clean_keys: &[u64], budget: usize, seed: u64) -> Result<Vec<u64>> {
    generate_static_poison_with(clean_keys, budget, seed, DEFAULT_CANDIDATE_GAPS)
}

pub fn generate_static_poison_with(
    clean_keys: &[u64],
    budget: usize,
    seed: u64,
    candidate_gaps: usize,
) -> Result<Vec<u64>> {
    if clean_keys.len() < 2 {
        return Err(Error::InsufficientKeys(clean_keys.len()));
    }
    debug_assert!(clean_keys.windows(2).all(|w| w[0] < w[1]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let x_min = clean_keys[0] as f64;
    let span = (clean_keys[clean_keys.len() - 1] - clean_keys[0]) as f64;
    let norm = move |k: u64| (k as f64 - x_min) / span.max(1.0);

    let mut working: Vec<u64> = clean_keys.to_vec();
    let mut stats = FitStats {
        sz: working.iter().map(|&k| norm(k)).sum(),
        szz: working.iter().map(|&k| norm(k) * norm(k)).sum(),
        szy: working
            .iter()
            .enumerate()
            .map(|(i, &k)| norm(k) * i as f64)
            .sum(),
    };

    let mut gaps: BTreeMap<u64, u64> = BTreeMap::new();
    let mut heap: BinaryHeap<Gap> = BinaryHeap::new();
    for w in clean_keys.windows(2) {
        let gap = Gap { lo: w[0], hi: w[1] };
        if gap.width() >= 1 {
            gaps.insert(gap.lo, gap.hi);
            heap.push(gap);
        }
    }

    let mut chosen = Vec::with_capacity(budget);
    let mut suffix_z = Vec::new();
    while chosen.len() < budget && !gaps.is_empty() {
        // suffix sums of normalized keys, for O(1) rank-shifted cross terms
        let n = working.len();
        suffix_z.resize(n + 1, 0.0);
        suffix_z[n] = 0.0;
        for i in (0..n).rev() {
            suffix_z[i] = suffix_z[i + 1] + norm(working[i]);
        }

        // pull the widest still-valid gaps off the lazy heap
        let mut step_gaps: Vec<Gap> = Vec::with_capacity(candidate_gaps);
        while step_gaps.len() < candidate_gaps {
            let Some(gap) = heap.pop() else { break };
            if gaps.get(&gap.lo) == Some(&gap.hi) {
                step_gaps.push(gap);
            }
        }

        let mut best: Option<(f64, u64, Gap)> = None;
        let mut candidates: Vec<u64> = Vec::new();
        for &gap in &step_gaps {
            candidates.clear();
            if gap.width() <= EXHAUSTIVE_GAP_WIDTH {
                candidates.extend(gap.lo + 1..gap.hi);
            } else {
                candidates.push(gap.lo + 1);
                candidates.push(gap.lo + (gap.hi - gap.lo) / 2);
                candidates.push(gap.hi - 1);
                candidates.push(rng.gen_range(gap.lo + 1..gap.hi));
                candidates.sort_unstable();
                candidates.dedup();
            }
            let rank = working.partition_point(|&k| k < gap.hi);
            for &c in &candidates {
                let mse = mse_with_candidate(&stats, &suffix_z, n, norm(c), rank);
                let better = match best {
                    None => true,
                    Some((best_mse, best_key, _)) => {
                        mse > best_mse || (mse == best_mse && c < best_key)
                    }
                };
                if better {
                    best = Some((mse, c, gap));
                }
            }
        }

        // gaps go back on the heap; the winner's gap gets replaced below
        for gap in step_gaps {
            heap.push(gap);
        }

        let Some((_, key, gap)) = best else { break };
        let rank = working.partition_point(|&k| k < key);
        stats.szy += norm(key) * rank as f64 + suffix_z[rank];
        stats.sz += norm(key);
        stats.szz += norm(key) * norm(key);
        working.insert(rank, key);
        chosen.push(key);

        gaps.remove(&gap.lo);
        for part in [Gap { lo: gap.lo, hi: key }, Gap { lo: key, hi: gap.hi }] {
            if part.width() >= 1 {
                gaps.insert(part.lo, part.hi);
                heap.push(part);
            }
        }
    }

    Ok(chosen)
}

/// Reference evaluator for the poisoning objective: the MSE of a least-squares
/// line over the working set's `(key, rank)` pairs once `candidate` joins it.
/// Quadratic cost; used by tests and per-step diagnostics.
pub fn poison_objective(working: &[u64], candidate: u64) -> f64 {
    let mut merged: Vec<u64> = working.to_vec();
    let pos = merged.partition_point(|&k| k < candidate);
    merged.insert(pos, candidate);
    let n = merged.len() as f64;
    let x_min = merged[0] as f64;
    let span = (merged[merged.len() - 1] - merged[0]) as f64;
    let xs: Vec<f64> = merged
        .iter()
        .map(|&k| (k as f64 - x_min) / span.max(1.0))
        .collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = (n - 1.0) / 2.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (i as f64 - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let r = i as f64 - (slope * x + intercept);
        sse += r * r;
    }
    sse / n
}

// ---------------------------------------------------------------------------
// Dynamic attacks
// ---------------------------------------------------------------------------

/// `batch` keys drawn from the inclusive global key range without any view of
/// index internals. Deterministic in `(seed, round_index)`.
pub fn blackbox_batch(
    key_range: (u64, u64),
    batch: usize,
    seed: u64,
    round_index: u64,
    strategy: BlackBoxStrategy,
) -> Result<Vec<u64>> {
    let (min, max) = key_range;
    if min > max {
        return Err(Error::InvalidRange { min, max });
    }
    if batch == 0 {
        return Err(Error::InvalidParam("batch size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round_index);
    let keys = match strategy {
        BlackBoxStrategy::Uniform => (0..batch).map(|_| rng.gen_range(min..=max)).collect(),
        BlackBoxStrategy::Clustered { width_fraction } => {
            let center = rng.gen_range(min..=max);
            let half = ((max - min) as f64 * width_fraction.clamp(0.0, 1.0) / 2.0) as u64;
            let lo = center.saturating_sub(half).max(min);
            let hi = center.saturating_add(half).min(max);
            (0..batch).map(|_| rng.gen_range(lo..=hi)).collect()
        }
    };
    Ok(keys)
}

/// `batch` keys packed against the longest contiguous occupied segment of the
/// largest data node: successive free integers to the right of the segment's
/// edge, then to the left once the right side exhausts the node's key range,
/// then duplicates of the segment's median key once no free integer remains.
///
/// The rule is fully deterministic; the seed parameter is accepted for
/// interface uniformity with the other generators.
pub fn whitebox_batch(
    index_stats: &StructuralStats,
    view: &NodeView,
    batch: usize,
    _seed: u64,
) -> Result<Vec<u64>> {
    if view.keys.is_empty() || view.segment_len == 0 {
        return Err(Error::EmptyIndex);
    }
    debug_assert_eq!(
        index_stats.largest_data_node.0, view.node_id,
        "node view must describe the stats' largest node"
    );
    let seg = view.segment_keys();
    let mut out = Vec::with_capacity(batch);

    // rightward from the segment's right edge
    let mut cursor = view.segment_start + view.segment_len;
    let mut cand = seg.last().unwrap().checked_add(1);
    while out.len() < batch {
        let Some(c) = cand else { break };
        if c >= view.high {
            break;
        }
        while cursor < view.keys.len() && view.keys[cursor] < c {
            cursor += 1;
        }
        if cursor < view.keys.len() && view.keys[cursor] == c {
            cand = c.checked_add(1);
            continue;
        }
        out.push(c);
        cand = c.checked_add(1);
    }

    // leftward from the segment's left edge
    let mut cursor = view.segment_start;
    let mut cand = seg[0].checked_sub(1);
    while out.len() < batch {
        let Some(c) = cand else { break };
        if c < view.low {
            break;
        }
        while cursor > 0 && view.keys[cursor - 1] > c {
            cursor -= 1;
        }
        if cursor > 0 && view.keys[cursor - 1] == c {
            cand = c.checked_sub(1);
            continue;
        }
        out.push(c);
        cand = c.checked_sub(1);
    }

    // node range saturated: fall back to duplicates of the segment median
    if out.len() < batch {
        let median = seg[(seg.len() - 1) / 2];
        out.resize(batch, median);
    }
    Ok(out)
}

/// `batch` holdout keys sampled without replacement across rounds (a single
/// seeded permutation consumed in `round_index` order), switching to
/// with-replacement draws once the holdout is exhausted.
pub fn control_batch(
    holdout_keys: &[u64],
    batch: usize,
    seed: u64,
    round_index: u64,
) -> Result<Vec<u64>> {
    if holdout_keys.is_empty() {
        return Err(Error::EmptyHoldout);
    }
    if batch == 0 {
        return Err(Error::InvalidParam("batch size must be >= 1".into()));
    }
    let mut perm_rng = ChaCha8Rng::seed_from_u64(seed);
    perm_rng.set_stream(u64::MAX);
    let mut perm: Vec<u32> = (0..holdout_keys.len() as u32).collect();
    perm.shuffle(&mut perm_rng);

    let mut draw_rng = ChaCha8Rng::seed_from_u64(seed);
    draw_rng.set_stream(round_index);

    let start = (round_index as usize).saturating_mul(batch);
    let mut out = Vec::with_capacity(batch);
    for i in 0..batch {
        let idx = start + i;
        if idx < perm.len() {
            out.push(holdout_keys[perm[idx] as usize]);
        } else {
            out.push(holdout_keys[draw_rng.gen_range(0..holdout_keys.len())]);
        }
    }
    Ok(out)
}

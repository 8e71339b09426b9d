//! Updatable learned index: a routing model over data nodes that pair a
//! linear key-CDF model with a gapped array.
//!
//! Lookups route through the inner model to a data node, predict a slot with
//! the node model, then correct with exponential + binary search. Inserts go
//! to the model-predicted slot and shift toward the nearest gap. Maintenance
//! is density-triggered (expand when a node passes its max density, split
//! when it outgrows the node size cap) plus a shift-cost trigger: when the
//! slots moved since the last retrain exceed the node's capacity, the node is
//! rebuilt. The cost trigger is what lets the structure react to localized
//! insert pressure instead of only to global fill.

mod gapped;
mod model;

pub use gapped::GappedArray;
pub use model::LinearModel;

use crate::error::{Error, Result};
use gapped::exp_partition_point;
use serde::{Deserialize, Serialize};

/// Tuning knobs for node sizing and maintenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    /// Node density right after bulk load, expansion, or split.
    pub initial_density: f64,
    /// Lower density bound maintenance must restore.
    pub min_density: f64,
    /// Upper density bound; exceeding it on insert triggers an expansion.
    pub max_density: f64,
    /// Upper clamp on capacity growth per expansion.
    pub expansion_factor: f64,
    /// Occupancy cap per data node; exceeding it triggers a split.
    pub max_node_size: usize,
    /// Number of children produced by a split.
    pub split_fanout: usize,
    /// Target keys per data node at bulk load.
    pub target_node_keys: usize,
    /// Minimum inserts between shift-cost retrains of one node.
    pub retrain_min_inserts: u64,
    /// Shift-cost retrain fires once slots moved since the last retrain
    /// exceed `capacity * shift_budget_factor`.
    pub shift_budget_factor: f64,
    /// Optional hard cap on total stored keys.
    pub hard_key_limit: Option<u64>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            initial_density: 0.7,
            min_density: 0.6,
            max_density: 0.8,
            expansion_factor: 2.0,
            max_node_size: 16_384,
            split_fanout: 2,
            // one max-size array filled to the initial density
            target_node_keys: 11_468,
            retrain_min_inserts: 64,
            shift_budget_factor: 1.0,
            hard_key_limit: None,
        }
    }
}

/// A leaf node: linear model plus gapped array over a half-open key range.
/// The last node's `high == u64::MAX` stands for the top of the key universe.
#[derive(Debug, Clone)]
pub struct DataNode {
    model: LinearModel,
    array: GappedArray,
    low: u64,
    high: u64,
    inserts_since_retrain: u64,
    shift_since_retrain: u64,
}

impl DataNode {
    fn build(pairs: &[(u64, u64)], low: u64, high: u64, density: f64) -> Self {
        let n = pairs.len();
        let capacity = node_capacity(n, density);
        let model =
            LinearModel::fit_keys_to_slots(pairs.iter().map(|&(k, _)| k), low, n, capacity);
        let array = GappedArray::build(pairs, capacity, &model, low);
        Self {
            model,
            array,
            low,
            high,
            inserts_since_retrain: 0,
            shift_since_retrain: 0,
        }
    }

    #[inline]
    fn predict_slot(&self, key: u64) -> usize {
        self.model
            .predict_slot(key.wrapping_sub(self.low) as f64, self.array.capacity())
    }

    #[inline]
    pub fn occupied(&self) -> usize {
        self.array.occupied()
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.array.capacity()
    }

    pub fn key_range(&self) -> (u64, u64) {
        (self.low, self.high)
    }

    pub fn array(&self) -> &GappedArray {
        &self.array
    }
}

fn node_capacity(n: usize, density: f64) -> usize {
    ((n as f64 / density).ceil() as usize).max(n + 1)
}

/// Routing level: a linear model over the child boundary keys. Prediction is
/// corrected with a local search on the boundary array, so a stale model
/// after splits still routes correctly.
#[derive(Debug, Clone)]
pub struct InnerNode {
    model: LinearModel,
    base: u64,
    /// `lows[i]` is the inclusive lower bound of child `i`; `lows[0] == 0` so
    /// the children cover the whole key universe.
    lows: Vec<u64>,
}

impl InnerNode {
    fn fit(boundary_keys: &[u64]) -> Self {
        let base = boundary_keys[0];
        let model = LinearModel::fit(
            boundary_keys
                .iter()
                .enumerate()
                .map(|(i, &k)| ((k.wrapping_sub(base)) as f64, i as f64))
                .collect::<Vec<_>>()
                .into_iter(),
        );
        let mut lows = boundary_keys.to_vec();
        lows[0] = 0;
        Self { model, base, lows }
    }

    #[inline]
    fn route(&self, key: u64) -> usize {
        let hint = self
            .model
            .predict_slot(key.wrapping_sub(self.base) as f64, self.lows.len());
        // first child whose low exceeds the key, minus one
        exp_partition_point(&self.lows, hint, |low| low <= key) - 1
    }

    pub fn child_count(&self) -> usize {
        self.lows.len()
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.lows
    }
}

/// Structural counters and white-box-visible shape of the index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralStats {
    /// Data nodes plus inner nodes.
    pub node_count: usize,
    pub max_depth: usize,
    /// `(node id, occupied slots)` of the fullest data node; ties resolve to
    /// the lowest key range.
    pub largest_data_node: (usize, usize),
    /// `(node id, start slot, length)` of the longest run of consecutive
    /// occupied slots inside the largest data node; ties resolve leftmost.
    pub longest_contiguous_segment: (usize, usize, usize),
    pub split_events: u64,
    pub expand_events: u64,
}

/// Snapshot of the white-box attack target: the largest data node's occupied
/// keys and its longest contiguous occupied segment.
#[derive(Debug, Clone)]
pub struct NodeView {
    pub node_id: usize,
    pub low: u64,
    pub high: u64,
    /// All occupied keys of the node, in slot order.
    pub keys: Vec<u64>,
    /// Index into `keys` of the segment's first entry.
    pub segment_start: usize,
    pub segment_len: usize,
}

impl NodeView {
    pub fn segment_keys(&self) -> &[u64] {
        &self.keys[self.segment_start..self.segment_start + self.segment_len]
    }
}

/// What one insert did to the structure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InsertOutcome {
    /// Occupied slots moved to open the insertion point.
    pub shift_slots: u64,
    pub expanded: bool,
    pub split: bool,
}

#[derive(Debug, Clone)]
pub struct LearnedIndex {
    config: IndexConfig,
    router: InnerNode,
    nodes: Vec<DataNode>,
    key_count: u64,
    split_events: u64,
    expand_events: u64,
}

impl LearnedIndex {
    /// Build from strictly increasing keys and matching payloads.
    pub fn bulk_load(keys: &[u64], payloads: &[u64]) -> Result<Self> {
        Self::bulk_load_with(keys, payloads, IndexConfig::default())
    }

    pub fn bulk_load_with(keys: &[u64], payloads: &[u64], config: IndexConfig) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyInput);
        }
        if keys.len() != payloads.len() {
            return Err(Error::LengthMismatch {
                keys: keys.len(),
                payloads: payloads.len(),
            });
        }
        if let Some(i) = keys.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedInput(i));
        }

        let n = keys.len();
        let max_bulk_keys = ((config.max_node_size as f64 * config.initial_density) as usize).max(1);
        let target = config.target_node_keys.clamp(1, max_bulk_keys);
        let num_nodes = (n + target - 1) / target;
        let base_len = n / num_nodes;
        let remainder = n % num_nodes;

        let mut nodes = Vec::with_capacity(num_nodes);
        let mut boundary_keys = Vec::with_capacity(num_nodes);
        let mut start = 0usize;
        for i in 0..num_nodes {
            let len = base_len + usize::from(i < remainder);
            let chunk: Vec<(u64, u64)> = keys[start..start + len]
                .iter()
                .copied()
                .zip(payloads[start..start + len].iter().copied())
                .collect();
            let low = if i == 0 { 0 } else { keys[start] };
            let high = if start + len == n {
                u64::MAX
            } else {
                keys[start + len]
            };
            boundary_keys.push(keys[start]);
            nodes.push(DataNode::build(&chunk, low, high, config.initial_density));
            start += len;
        }

        let index = Self {
            config,
            router: InnerNode::fit(&boundary_keys),
            nodes,
            key_count: n as u64,
            split_events: 0,
            expand_events: 0,
        };
        #[cfg(debug_assertions)]
        index.validate();
        Ok(index)
    }

    #[inline]
    pub fn lookup(&self, key: u64) -> Option<u64> {
        let node = &self.nodes[self.router.route(key)];
        node.array.lookup(key, node.predict_slot(key))
    }

    /// Insert a key/payload pair. Duplicate keys are stored as additional
    /// entries (multiset semantics).
    pub fn insert(&mut self, key: u64, payload: u64) -> Result<InsertOutcome> {
        if let Some(limit) = self.config.hard_key_limit {
            if self.key_count + 1 > limit {
                return Err(Error::CapacityExhausted(limit));
            }
        }
        let mut outcome = InsertOutcome::default();
        loop {
            let idx = self.router.route(key);
            if self.nodes[idx].occupied() + 1 > self.config.max_node_size {
                if self.split(idx) {
                    outcome.split = true;
                    continue; // re-route into the new children
                }
                // unsplittable (all keys equal): grow past the cap instead
                self.expand(idx);
                outcome.expanded = true;
            } else if (self.nodes[idx].occupied() + 1) as f64
                > self.config.max_density * self.nodes[idx].capacity() as f64
            {
                self.expand(idx);
                outcome.expanded = true;
            }

            let node = &mut self.nodes[idx];
            let hint = node.predict_slot(key);
            let shifted = node.array.insert(key, payload, hint) as u64;
            node.inserts_since_retrain += 1;
            node.shift_since_retrain += shifted;
            outcome.shift_slots = shifted;
            self.key_count += 1;

            let budget = (node.capacity() as f64 * self.config.shift_budget_factor) as u64;
            if node.inserts_since_retrain >= self.config.retrain_min_inserts
                && node.shift_since_retrain >= budget.max(1)
            {
                self.expand(idx);
                outcome.expanded = true;
            }
            return Ok(outcome);
        }
    }

    /// Rebuild a node at the initial density: refit the model and re-place
    /// every entry. Serves both density growth and shift-cost retraining.
    fn expand(&mut self, idx: usize) {
        let node = &mut self.nodes[idx];
        let pairs: Vec<(u64, u64)> = node.array.iter_occupied().collect();
        let target = node_capacity(pairs.len(), self.config.initial_density);
        let clamp = (node.capacity() as f64 * self.config.expansion_factor) as usize;
        let capacity = target.min(clamp.max(pairs.len() + 1)).max(pairs.len() + 1);
        node.model = LinearModel::fit_keys_to_slots(
            pairs.iter().map(|&(k, _)| k),
            node.low,
            pairs.len(),
            capacity,
        );
        node.array = GappedArray::build(&pairs, capacity, &node.model, node.low);
        node.inserts_since_retrain = 0;
        node.shift_since_retrain = 0;
        self.expand_events += 1;
        #[cfg(debug_assertions)]
        self.validate_node(idx);
    }

    /// Split a node into `split_fanout` children at occupancy quantiles,
    /// nudging each cut to a point where adjacent keys differ so the children
    /// get disjoint key ranges. Returns false when no valid cut exists (all
    /// keys equal).
    fn split(&mut self, idx: usize) -> bool {
        let fanout = self.config.split_fanout.max(2);
        let pairs: Vec<(u64, u64)> = self.nodes[idx].array.iter_occupied().collect();
        let n = pairs.len();

        let mut cuts: Vec<usize> = Vec::new();
        for j in 1..fanout {
            let target = j * n / fanout;
            if let Some(cut) = nearest_cut(&pairs, target) {
                if cuts.last().map_or(cut > 0, |&prev| cut > prev) {
                    cuts.push(cut);
                }
            }
        }
        if cuts.is_empty() {
            return false;
        }

        let (low, high) = self.nodes[idx].key_range();
        let mut children = Vec::with_capacity(cuts.len() + 1);
        let mut start = 0usize;
        for (i, bound) in cuts
            .iter()
            .copied()
            .chain(std::iter::once(n))
            .enumerate()
        {
            let child_low = if i == 0 { low } else { pairs[start].0 };
            let child_high = if bound == n { high } else { pairs[bound].0 };
            children.push(DataNode::build(
                &pairs[start..bound],
                child_low,
                child_high,
                self.config.initial_density,
            ));
            start = bound;
        }

        let new_lows: Vec<u64> = children.iter().skip(1).map(|c| c.low).collect();
        self.nodes.splice(idx..=idx, children);
        for (offset, low) in new_lows.into_iter().enumerate() {
            self.router.lows.insert(idx + 1 + offset, low);
        }
        self.split_events += 1;
        #[cfg(debug_assertions)]
        self.validate();
        true
    }

    pub fn stats(&self) -> StructuralStats {
        let mut largest = 0usize;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.occupied() > self.nodes[largest].occupied() {
                largest = i;
            }
        }
        let (seg_start, seg_len) = self.nodes[largest].array.longest_run();
        StructuralStats {
            node_count: self.nodes.len() + 1,
            max_depth: 2,
            largest_data_node: (largest, self.nodes[largest].occupied()),
            longest_contiguous_segment: (largest, seg_start, seg_len),
            split_events: self.split_events,
            expand_events: self.expand_events,
        }
    }

    /// Min and max stored keys.
    pub fn range_of(&self) -> Result<(u64, u64)> {
        if self.key_count == 0 {
            return Err(Error::EmptyIndex);
        }
        let min = self.nodes.first().and_then(|n| n.array.first_key());
        let max = self.nodes.last().and_then(|n| n.array.last_key());
        match (min, max) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::EmptyIndex),
        }
    }

    /// Snapshot of the largest data node for the white-box adversary,
    /// consistent with `stats()`.
    pub fn whitebox_view(&self) -> Result<NodeView> {
        if self.key_count == 0 {
            return Err(Error::EmptyIndex);
        }
        let stats = self.stats();
        let node_id = stats.largest_data_node.0;
        let node = &self.nodes[node_id];
        let (seg_slot, seg_len) = (
            stats.longest_contiguous_segment.1,
            stats.longest_contiguous_segment.2,
        );
        let mut keys = Vec::with_capacity(node.occupied());
        let mut segment_start = 0usize;
        for slot in 0..node.capacity() {
            if node.array.is_occupied(slot) {
                if slot == seg_slot {
                    segment_start = keys.len();
                }
                keys.push(node.array.key_at(slot));
            }
        }
        Ok(NodeView {
            node_id,
            low: node.low,
            high: node.high,
            keys,
            segment_start,
            segment_len: seg_len,
        })
    }

    pub fn len(&self) -> u64 {
        self.key_count
    }

    pub fn is_empty(&self) -> bool {
        self.key_count == 0
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn data_nodes(&self) -> &[DataNode] {
        &self.nodes
    }

    pub fn router(&self) -> &InnerNode {
        &self.router
    }

    /// All stored keys in nondecreasing order.
    pub fn iter_keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.nodes
            .iter()
            .flat_map(|n| n.array.iter_occupied().map(|(k, _)| k))
    }

    fn validate_node(&self, idx: usize) {
        let node = &self.nodes[idx];
        node.array.validate();
        let granularity = 1.0 / node.capacity() as f64;
        let density = node.occupied() as f64 / node.capacity() as f64;
        assert!(
            density >= self.config.min_density - granularity - 1e-9
                && density <= self.config.max_density + granularity + 1e-9,
            "node {idx} density {density} outside bounds after maintenance"
        );
        for (k, _) in node.array.iter_occupied() {
            assert!(
                k >= node.low && (k < node.high || node.high == u64::MAX),
                "key {k} outside node range [{}, {})",
                node.low,
                node.high
            );
        }
    }

    /// Full structural check: key order, occupancy counters, per-node density
    /// after maintenance, and contiguous disjoint node ranges.
    pub fn validate(&self) {
        assert!(!self.nodes.is_empty());
        assert_eq!(self.router.lows.len(), self.nodes.len());
        assert_eq!(self.router.lows[0], 0);
        assert_eq!(self.nodes[0].low, 0);
        assert_eq!(self.nodes.last().unwrap().high, u64::MAX);
        for i in 0..self.nodes.len() {
            assert_eq!(self.router.lows[i], self.nodes[i].low);
            if i > 0 {
                assert!(self.router.lows[i - 1] < self.router.lows[i]);
                assert_eq!(self.nodes[i - 1].high, self.nodes[i].low);
            }
        }
        let total: usize = self.nodes.iter().map(|n| n.occupied()).sum();
        assert_eq!(total as u64, self.key_count);
        for idx in 0..self.nodes.len() {
            self.validate_node(idx);
        }
    }
}

/// Closest index to `target` where the sorted pairs change key value, so it
/// can serve as a range cut. Prefers the left candidate on ties.
fn nearest_cut(pairs: &[(u64, u64)], target: usize) -> Option<usize> {
    let n = pairs.len();
    let valid = |i: usize| i > 0 && i < n && pairs[i - 1].0 != pairs[i].0;
    for d in 0..n {
        if target >= d && valid(target - d) {
            return Some(target - d);
        }
        if target + d <= n && valid(target + d) {
            return Some(target + d);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keyed(keys: &[u64]) -> (Vec<u64>, Vec<u64>) {
        (keys.to_vec(), keys.iter().map(|&k| k * 10).collect())
    }

    #[test]
    fn bulk_load_trivial() {
        let (keys, payloads) = keyed(&[2, 5, 9]);
        let idx = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        assert_eq!(idx.len(), 3);
        assert_eq!(idx.lookup(5), Some(50));
        assert_eq!(idx.lookup(6), None);
        assert_eq!(idx.range_of().unwrap(), (2, 9));
    }

    #[test]
    fn bulk_load_singleton() {
        let idx = LearnedIndex::bulk_load(&[7], &[1]).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.lookup(7), Some(1));
        assert_eq!(idx.lookup(8), None);
        assert_eq!(idx.range_of().unwrap(), (7, 7));
        assert_eq!(idx.data_nodes().len(), 1);
    }

    #[test]
    fn bulk_load_rejects_bad_input() {
        assert!(matches!(
            LearnedIndex::bulk_load(&[], &[]),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            LearnedIndex::bulk_load(&[3, 3], &[1, 2]),
            Err(Error::UnsortedInput(0))
        ));
        assert!(matches!(
            LearnedIndex::bulk_load(&[5, 2], &[1, 2]),
            Err(Error::UnsortedInput(0))
        ));
        assert!(matches!(
            LearnedIndex::bulk_load(&[1, 2], &[1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn insert_basic_and_duplicates() {
        let (keys, payloads) = keyed(&[2, 9]);
        let mut idx = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        idx.insert(5, 50).unwrap();
        assert_eq!(idx.lookup(5), Some(50));
        assert_eq!(idx.len(), 3);
        idx.insert(5, 50).unwrap();
        assert_eq!(idx.len(), 4);
        assert_eq!(idx.lookup(5), Some(50));
        idx.validate();
    }

    #[test]
    fn fresh_bulk_density_is_initial() {
        // 7 keys at d_init 0.7 -> capacity 10
        let keys: Vec<u64> = (1..=7).map(|i| i * 100).collect();
        let payloads = keys.clone();
        let idx = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        assert_eq!(idx.data_nodes().len(), 1);
        assert_eq!(idx.data_nodes()[0].capacity(), 10);
        assert_eq!(idx.stats().largest_data_node, (0, 7));
    }

    #[test]
    fn hard_key_limit() {
        let cfg = IndexConfig {
            hard_key_limit: Some(3),
            ..IndexConfig::default()
        };
        let mut idx = LearnedIndex::bulk_load_with(&[1, 2, 3], &[1, 2, 3], cfg).unwrap();
        assert!(matches!(
            idx.insert(4, 4),
            Err(Error::CapacityExhausted(3))
        ));
    }

    #[test]
    fn lookup_matches_oracle_on_lognormal_load() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dist = rand_distr::LogNormal::new(0.0, 1.5).unwrap();
        let mut keys: Vec<u64> = (0..10_000)
            .map(|_| (rng.sample::<f64, _>(dist) * 1e9) as u64)
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let payloads: Vec<u64> = keys.iter().map(|&k| k ^ 0xabcd).collect();
        let idx = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        idx.validate();
        for _ in 0..5_000 {
            let probe = if rng.gen_bool(0.5) {
                keys[rng.gen_range(0..keys.len())]
            } else {
                rng.gen_range(0..u64::MAX / 2)
            };
            let want = keys
                .binary_search(&probe)
                .ok()
                .map(|i| payloads[i]);
            assert_eq!(idx.lookup(probe), want, "probe {probe}");
        }
    }

    #[test]
    fn dense_adjacent_inserts_trigger_maintenance() {
        // one node, then hammer integers adjacent to the densest run
        let keys: Vec<u64> = (0..2_000u64).map(|i| 1_000_000 + i * 1_000).collect();
        let payloads = keys.clone();
        let mut idx = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        let view = idx.whitebox_view().unwrap();
        let edge = *view.segment_keys().last().unwrap();
        for i in 1..=64u64 {
            idx.insert(edge + i, 0).unwrap();
        }
        let stats = idx.stats();
        assert!(
            stats.split_events + stats.expand_events >= 1,
            "dense adjacent inserts must cause at least one maintenance event"
        );
        idx.validate();
    }

    #[test]
    fn split_on_node_size_cap() {
        let cfg = IndexConfig {
            max_node_size: 128,
            target_node_keys: 80,
            ..IndexConfig::default()
        };
        let keys: Vec<u64> = (0..100u64).map(|i| i * 100).collect();
        let payloads = keys.clone();
        let mut idx = LearnedIndex::bulk_load_with(&keys, &payloads, cfg).unwrap();
        let before = idx.data_nodes().len();
        for i in 0..250u64 {
            idx.insert(i * 40 + 7, 1).unwrap();
        }
        let stats = idx.stats();
        assert!(stats.split_events >= 1);
        assert!(idx.data_nodes().len() > before);
        idx.validate();
        // everything still findable
        for i in 0..250u64 {
            assert_eq!(idx.lookup(i * 40 + 7), Some(1));
        }
    }

    #[test]
    fn all_duplicates_node_grows_instead_of_splitting() {
        let cfg = IndexConfig {
            max_node_size: 64,
            target_node_keys: 32,
            ..IndexConfig::default()
        };
        let mut idx = LearnedIndex::bulk_load_with(&[10], &[1], cfg).unwrap();
        for _ in 0..200 {
            idx.insert(10, 2).unwrap();
        }
        assert_eq!(idx.len(), 201);
        assert_eq!(idx.stats().split_events, 0);
        assert!(idx.stats().expand_events > 0);
        assert_eq!(idx.lookup(10).map(|_| ()), Some(()));
    }

    #[test]
    fn largest_node_matches_full_scan() {
        let keys: Vec<u64> = (0..30_000u64).map(|i| i * 37 + 5).collect();
        let payloads = keys.clone();
        let cfg = IndexConfig {
            target_node_keys: 4_000,
            ..IndexConfig::default()
        };
        let mut idx = LearnedIndex::bulk_load_with(&keys, &payloads, cfg).unwrap();
        for i in 0..3_000u64 {
            idx.insert(i * 7 + 3, 0).unwrap();
        }
        let stats = idx.stats();
        let by_scan = idx
            .data_nodes()
            .iter()
            .map(|n| n.occupied())
            .max()
            .unwrap();
        assert_eq!(stats.largest_data_node.1, by_scan);
    }

    #[test]
    fn bulk_load_is_deterministic() {
        let keys: Vec<u64> = (0..10_000u64).map(|i| i * i + 17).collect();
        let payloads = keys.clone();
        let a = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        let b = LearnedIndex::bulk_load(&keys, &payloads).unwrap();
        assert_eq!(a.stats(), b.stats());
        assert_eq!(
            a.data_nodes().iter().map(|n| n.capacity()).collect::<Vec<_>>(),
            b.data_nodes().iter().map(|n| n.capacity()).collect::<Vec<_>>(),
        );
    }

    #[test]
    fn routing_covers_universe() {
        let keys: Vec<u64> = vec![100, 200, 300, 400, 500, 600];
        let cfg = IndexConfig {
            target_node_keys: 2,
            ..IndexConfig::default()
        };
        let idx = LearnedIndex::bulk_load_with(&keys, &keys, cfg).unwrap();
        for probe in [0u64, 99, 100, 250, 599, 601, u64::MAX] {
            let node = &idx.data_nodes()[idx.router().route(probe)];
            let (lo, hi) = node.key_range();
            assert!(probe >= lo && (probe < hi || hi == u64::MAX));
        }
    }
}

//! Gapped array storage for data nodes.
//!
//! Occupied slots hold real `(key, payload)` entries; gap slots carry a copy
//! of a neighboring key so the *whole* key array stays nondecreasing and can
//! be searched without consulting the occupancy bitmap. Gaps created at build
//! time take the key of the nearest occupied slot to the left (leading gaps
//! take the first key). Inserts only ever consume gaps, so copies never need
//! a global refresh.

use super::model::LinearModel;

const WORD_BITS: usize = 64;

#[derive(Debug, Clone)]
pub struct GappedArray {
    keys: Vec<u64>,
    payloads: Vec<u64>,
    occ: Vec<u64>,
    occupied: usize,
}

#[inline]
fn words_for(capacity: usize) -> usize {
    (capacity + WORD_BITS - 1) / WORD_BITS
}

/// Exponential search outward from `hint`, then binary search: returns the
/// first index of `keys` where `f` is false. `f` must be monotone (true then
/// false) over the sorted slice.
pub(crate) fn exp_partition_point(keys: &[u64], hint: usize, f: impl Fn(u64) -> bool) -> usize {
    let cap = keys.len();
    if cap == 0 {
        return 0;
    }
    let hint = hint.min(cap - 1);
    let (win_lo, win_hi) = if !f(keys[hint]) {
        // answer is at or below the hint
        let mut off = 1usize;
        loop {
            if off > hint {
                break (0, hint);
            }
            let probe = hint - off;
            if f(keys[probe]) {
                break (probe + 1, hint);
            }
            off *= 2;
        }
    } else {
        // answer is above the hint
        let mut off = 1usize;
        loop {
            let Some(probe) = hint.checked_add(off) else {
                break (hint + 1, cap);
            };
            if probe >= cap {
                break (hint + 1, cap);
            }
            if !f(keys[probe]) {
                break (hint + 1, probe);
            }
            off *= 2;
        }
    };
    win_lo + keys[win_lo..win_hi].partition_point(|&x| f(x))
}

impl GappedArray {
    /// Model-based construction: each entry of the sorted `pairs` goes to its
    /// predicted slot, pushed right as needed to keep slots strictly
    /// increasing and leave room for the remaining entries.
    pub fn build(pairs: &[(u64, u64)], capacity: usize, model: &LinearModel, base: u64) -> Self {
        let n = pairs.len();
        assert!(n >= 1, "gapped array needs at least one entry");
        assert!(capacity > n, "capacity must exceed entry count to leave gaps");

        let mut keys = vec![0u64; capacity];
        let mut payloads = vec![0u64; capacity];
        let mut occ = vec![0u64; words_for(capacity)];

        let mut next_free = 0usize;
        for (i, &(k, p)) in pairs.iter().enumerate() {
            let room_limit = capacity - (n - i); // leave one slot per remaining entry
            let predicted = model.predict_slot(k.wrapping_sub(base) as f64, capacity);
            let pos = predicted.clamp(next_free, room_limit);
            keys[pos] = k;
            payloads[pos] = p;
            occ[pos / WORD_BITS] |= 1 << (pos % WORD_BITS);
            next_free = pos + 1;
        }

        // Fill gap slots: copy of the nearest occupied key to the left;
        // leading gaps take the first key.
        let mut fill = pairs[0].0;
        for (s, key) in keys.iter_mut().enumerate() {
            if occ[s / WORD_BITS] >> (s % WORD_BITS) & 1 == 1 {
                fill = *key;
            } else {
                *key = fill;
            }
        }

        Self {
            keys,
            payloads,
            occ,
            occupied: n,
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.keys.len()
    }

    #[inline]
    pub fn occupied(&self) -> usize {
        self.occupied
    }

    #[inline]
    pub fn is_occupied(&self, slot: usize) -> bool {
        self.occ[slot / WORD_BITS] >> (slot % WORD_BITS) & 1 == 1
    }

    #[inline]
    fn set_occupied(&mut self, slot: usize) {
        self.occ[slot / WORD_BITS] |= 1 << (slot % WORD_BITS);
    }

    #[inline]
    pub fn key_at(&self, slot: usize) -> u64 {
        self.keys[slot]
    }

    /// First slot whose key is `>= k`.
    #[inline]
    pub fn lower_bound(&self, k: u64, hint: usize) -> usize {
        exp_partition_point(&self.keys, hint, |x| x < k)
    }

    /// First slot whose key is `> k`.
    #[inline]
    pub fn upper_bound(&self, k: u64, hint: usize) -> usize {
        exp_partition_point(&self.keys, hint, |x| x <= k)
    }

    pub fn lookup(&self, k: u64, hint: usize) -> Option<u64> {
        let mut s = self.lower_bound(k, hint);
        // Skip gap copies that happen to equal the key (leading region or
        // copies stranded by an earlier gap write).
        while s < self.capacity() && self.keys[s] == k {
            if self.is_occupied(s) {
                return Some(self.payloads[s]);
            }
            s += 1;
        }
        None
    }

    /// Insert near the model hint, shifting the minimal run of occupied slots
    /// toward the nearest gap when the target slot is taken. Returns the
    /// number of slots shifted (the dominant cost of the insert).
    ///
    /// Requires at least one free slot; density maintenance must run first.
    pub fn insert(&mut self, k: u64, payload: u64, hint: usize) -> usize {
        let cap = self.capacity();
        assert!(self.occupied < cap, "insert into full gapped array");

        let lb = self.lower_bound(k, hint);
        let ub = if lb < cap && self.keys[lb] == k {
            self.upper_bound(k, lb)
        } else {
            lb
        };
        // Any slot in [lb, ub] keeps the key array nondecreasing.
        let pos = hint.clamp(lb, ub);

        if pos < cap && !self.is_occupied(pos) {
            self.keys[pos] = k;
            self.payloads[pos] = payload;
            self.set_occupied(pos);
            self.occupied += 1;
            return 0;
        }

        let right = self.next_gap(pos);
        let left = if pos == 0 { None } else { self.prev_gap(pos - 1) };
        match (left, right) {
            (Some(gl), Some(gr)) => {
                let dl = (pos - 1) - gl;
                let dr = gr - pos;
                if dr <= dl {
                    self.shift_right_into(gr, pos, k, payload)
                } else {
                    self.shift_left_into(gl, pos, k, payload)
                }
            }
            (None, Some(gr)) => self.shift_right_into(gr, pos, k, payload),
            (Some(gl), None) => self.shift_left_into(gl, pos, k, payload),
            (None, None) => unreachable!("occupancy below capacity implies a gap exists"),
        }
    }

    /// Move the occupied run `[pos, gap)` one slot right into `gap`, then
    /// write the new entry at `pos`.
    fn shift_right_into(&mut self, gap: usize, pos: usize, k: u64, payload: u64) -> usize {
        self.keys.copy_within(pos..gap, pos + 1);
        self.payloads.copy_within(pos..gap, pos + 1);
        self.set_occupied(gap);
        self.keys[pos] = k;
        self.payloads[pos] = payload;
        self.occupied += 1;
        gap - pos
    }

    /// Move the occupied run `(gap, pos)` one slot left into `gap`, then
    /// write the new entry at `pos - 1`.
    fn shift_left_into(&mut self, gap: usize, pos: usize, k: u64, payload: u64) -> usize {
        self.keys.copy_within(gap + 1..pos, gap);
        self.payloads.copy_within(gap + 1..pos, gap);
        self.set_occupied(gap);
        self.keys[pos - 1] = k;
        self.payloads[pos - 1] = payload;
        self.occupied += 1;
        (pos - 1) - gap
    }

    /// First gap at or after `from`, if any.
    pub fn next_gap(&self, from: usize) -> Option<usize> {
        let cap = self.capacity();
        if from >= cap {
            return None;
        }
        let mut w = from / WORD_BITS;
        let mut inv = !self.occ[w] & (!0u64 << (from % WORD_BITS));
        loop {
            if inv != 0 {
                let s = w * WORD_BITS + inv.trailing_zeros() as usize;
                return (s < cap).then_some(s);
            }
            w += 1;
            if w >= self.occ.len() {
                return None;
            }
            inv = !self.occ[w];
        }
    }

    /// Last gap at or before `from`, if any.
    pub fn prev_gap(&self, from: usize) -> Option<usize> {
        let cap = self.capacity();
        let from = from.min(cap - 1);
        let mut w = from / WORD_BITS;
        let shift = WORD_BITS - 1 - from % WORD_BITS;
        let mut inv = !self.occ[w] & (!0u64 >> shift);
        loop {
            if inv != 0 {
                return Some(w * WORD_BITS + (WORD_BITS - 1 - inv.leading_zeros() as usize));
            }
            if w == 0 {
                return None;
            }
            w -= 1;
            inv = !self.occ[w];
        }
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.capacity())
            .filter(|&s| self.is_occupied(s))
            .map(|s| (self.keys[s], self.payloads[s]))
    }

    pub fn first_key(&self) -> Option<u64> {
        (0..self.capacity())
            .find(|&s| self.is_occupied(s))
            .map(|s| self.keys[s])
    }

    pub fn last_key(&self) -> Option<u64> {
        (0..self.capacity())
            .rev()
            .find(|&s| self.is_occupied(s))
            .map(|s| self.keys[s])
    }

    /// Longest run of consecutive occupied slots, leftmost on ties.
    /// Returns `(start_slot, length)`.
    pub fn longest_run(&self) -> (usize, usize) {
        let cap = self.capacity();
        let mut best = (0usize, 0usize);
        let mut run_start = 0usize;
        let mut in_run = false;
        let mut s = 0usize;
        while s < cap {
            // fast-skip fully occupied words mid-run
            if in_run && s % WORD_BITS == 0 {
                while s + WORD_BITS <= cap && self.occ[s / WORD_BITS] == !0u64 {
                    s += WORD_BITS;
                }
                if s >= cap {
                    break;
                }
            }
            if self.is_occupied(s) {
                if !in_run {
                    run_start = s;
                    in_run = true;
                }
            } else if in_run {
                if s - run_start > best.1 {
                    best = (run_start, s - run_start);
                }
                in_run = false;
            }
            s += 1;
        }
        if in_run && cap - run_start > best.1 {
            best = (run_start, cap - run_start);
        }
        best
    }

    /// Internal consistency check; used by tests and after maintenance in
    /// debug builds.
    pub fn validate(&self) {
        let cap = self.capacity();
        for s in 1..cap {
            assert!(
                self.keys[s - 1] <= self.keys[s],
                "key order violated at slot {s}"
            );
        }
        let count = (0..cap).filter(|&s| self.is_occupied(s)).count();
        assert_eq!(count, self.occupied, "occupancy counter out of sync");
        // bits beyond capacity must stay clear
        if cap % WORD_BITS != 0 {
            let tail = self.occ[cap / WORD_BITS] >> (cap % WORD_BITS);
            assert_eq!(tail, 0, "occupancy bits set beyond capacity");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build_simple(keys: &[u64], capacity: usize) -> GappedArray {
        let pairs: Vec<(u64, u64)> = keys.iter().map(|&k| (k, k * 10)).collect();
        let model = LinearModel::fit_keys_to_slots(keys.iter().copied(), keys[0], keys.len(), capacity);
        GappedArray::build(&pairs, capacity, &model, keys[0])
    }

    #[test]
    fn build_and_lookup() {
        let ga = build_simple(&[2, 5, 9], 5);
        ga.validate();
        assert_eq!(ga.occupied(), 3);
        assert_eq!(ga.lookup(5, 0), Some(50));
        assert_eq!(ga.lookup(2, 4), Some(20));
        assert_eq!(ga.lookup(9, 2), Some(90));
        assert_eq!(ga.lookup(6, 2), None);
        assert_eq!(ga.lookup(1, 0), None);
        assert_eq!(ga.lookup(100, 0), None);
    }

    #[test]
    fn insert_fills_and_shifts() {
        let mut ga = build_simple(&[10, 20, 30, 40], 8);
        for k in [15u64, 25, 35, 5] {
            ga.insert(k, k * 10, 0);
            ga.validate();
        }
        assert_eq!(ga.occupied(), 8);
        for k in [5u64, 10, 15, 20, 25, 30, 35, 40] {
            assert_eq!(ga.lookup(k, 3), Some(k * 10), "key {k}");
        }
        let collected: Vec<u64> = ga.iter_occupied().map(|(k, _)| k).collect();
        assert_eq!(collected, vec![5, 10, 15, 20, 25, 30, 35, 40]);
    }

    #[test]
    fn duplicate_keys_coexist() {
        let mut ga = build_simple(&[10, 20, 30], 8);
        ga.insert(20, 777, 0);
        ga.insert(20, 778, 7);
        ga.validate();
        assert_eq!(ga.occupied(), 5);
        // lookup returns one of the stored payloads for the key
        let got = ga.lookup(20, 0).unwrap();
        assert!(got == 200 || got == 777 || got == 778);
        let keys: Vec<u64> = ga.iter_occupied().map(|(k, _)| k).collect();
        assert_eq!(keys, vec![10, 20, 20, 20, 30]);
    }

    #[test]
    fn insert_below_minimum_and_above_maximum() {
        let mut ga = build_simple(&[50, 60], 6);
        ga.insert(1, 11, 0);
        ga.insert(90, 99, 5);
        ga.validate();
        assert_eq!(ga.lookup(1, 0), Some(11));
        assert_eq!(ga.lookup(90, 0), Some(99));
        let keys: Vec<u64> = ga.iter_occupied().map(|(k, _)| k).collect();
        assert_eq!(keys, vec![1, 50, 60, 90]);
    }

    #[test]
    fn longest_run_matches_bitmap() {
        // occupancy pattern 1,1,0,1 from the structural stats contract
        let pairs = vec![(1u64, 1), (2, 2), (4, 4)];
        let model = LinearModel::new(1.0, 0.0); // predicts offsets 0,1,3
        let ga = GappedArray::build(&pairs, 4, &model, 1);
        assert!(ga.is_occupied(0) && ga.is_occupied(1) && !ga.is_occupied(2) && ga.is_occupied(3));
        assert_eq!(ga.longest_run(), (0, 2));
    }

    #[test]
    fn gap_scans() {
        let pairs = vec![(1u64, 1), (2, 2), (4, 4)];
        let model = LinearModel::new(1.0, 0.0);
        let ga = GappedArray::build(&pairs, 4, &model, 1);
        assert_eq!(ga.next_gap(0), Some(2));
        assert_eq!(ga.next_gap(3), None);
        assert_eq!(ga.prev_gap(3), Some(2));
        assert_eq!(ga.prev_gap(1), None);
    }

    #[test]
    fn exp_partition_point_agrees_with_std() {
        let keys: Vec<u64> = vec![1, 3, 3, 3, 7, 9, 9, 12, 15, 15];
        for target in 0..=16u64 {
            for hint in 0..keys.len() {
                let got = exp_partition_point(&keys, hint, |x| x < target);
                let want = keys.partition_point(|&x| x < target);
                assert_eq!(got, want, "target {target} hint {hint}");
            }
        }
    }
}

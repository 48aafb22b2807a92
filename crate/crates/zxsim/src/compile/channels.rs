//! Reducing correlated channel groups to a compact set of error mechanisms.

use std::collections::BTreeMap;

use crate::bits::BitVec;
use crate::lower::ChannelGroup;

/// Largest joint group produced by merging overlapping groups.
pub const MAX_JOINT_BITS: usize = 8;

const FACTOR_TOLERANCE: f64 = 1e-13;

/// Independent Bernoulli event flipping `signature`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMechanism {
    pub signature: BitVec,
    pub probability: f64,
    /// e-parameters that were folded into this mechanism.
    pub source_params: Vec<usize>,
}

/// Correlated group sampled from its full table.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMechanism {
    /// Distinct signatures, one per table bit.
    pub signatures: Vec<BitVec>,
    /// Probability per pattern; bit `j` of the index is `signatures[j]`.
    pub table: Vec<f64>,
    pub source_params: Vec<usize>,
}

/// Error mechanisms expressed over a fixed set of flip rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorModel {
    pub num_rows: usize,
    pub mechanisms: Vec<ErrorMechanism>,
    pub joint: Vec<JointMechanism>,
}

impl ErrorModel {
    /// Number of single mechanisms plus joint-group bits.
    #[must_use]
    pub fn num_mechanisms(&self) -> usize {
        self.mechanisms.len() + self.joint.iter().map(|j| j.signatures.len()).sum::<usize>()
    }

    /// Expected number of flipped rows per shot.
    #[must_use]
    pub fn mean_flip_weight(&self) -> f64 {
        let singles: f64 = self
            .mechanisms
            .iter()
            .map(|m| m.probability * m.signature.count_ones() as f64)
            .sum();
        let joint: f64 = self
            .joint
            .iter()
            .map(|j| {
                j.table
                    .iter()
                    .enumerate()
                    .map(|(x, p)| {
                        let w: usize = (0..j.signatures.len())
                            .filter(|&b| (x >> b) & 1 == 1)
                            .map(|b| j.signatures[b].count_ones())
                            .sum();
                        p * w as f64
                    })
                    .sum::<f64>()
            })
            .sum();
        singles + joint
    }

    /// Largest signature weight.
    #[must_use]
    pub fn max_weight(&self) -> usize {
        self.mechanisms
            .iter()
            .map(|m| m.signature.count_ones())
            .chain(
                self.joint
                    .iter()
                    .flat_map(|j| j.signatures.iter().map(BitVec::count_ones)),
            )
            .max()
            .unwrap_or(0)
    }

    /// Exact distribution of the XOR of all fired signatures; index bit `i` is row `i`.
    ///
    /// Only meant for small row counts.
    #[must_use]
    pub fn row_distribution(&self) -> Vec<f64> {
        assert!(self.num_rows <= 24, "too many rows to enumerate");
        let as_index = |s: &BitVec| s.ones().fold(0usize, |acc, i| acc | (1 << i));
        let mut dist = vec![0.0; 1 << self.num_rows];
        dist[0] = 1.0;
        for m in &self.mechanisms {
            let s = as_index(&m.signature);
            dist = (0..dist.len())
                .map(|y| dist[y] * (1.0 - m.probability) + dist[y ^ s] * m.probability)
                .collect();
        }
        for j in &self.joint {
            let sigs: Vec<usize> = j.signatures.iter().map(as_index).collect();
            let mut next = vec![0.0; dist.len()];
            for (x, &p) in j.table.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let s = (0..sigs.len())
                    .filter(|&b| (x >> b) & 1 == 1)
                    .fold(0, |acc, b| acc ^ sigs[b]);
                for y in 0..dist.len() {
                    next[y ^ s] += p * dist[y];
                }
            }
            dist = next;
        }
        dist
    }
}

/// A correlated group during reduction.
#[derive(Clone, Debug, PartialEq)]
struct Group {
    sigs: Vec<BitVec>,
    table: Vec<f64>,
    sources: Vec<usize>,
}

impl Group {
    fn width(&self) -> usize {
        self.sigs.len()
    }

    /// Sums out bit `i`.
    fn marginalize(&mut self, i: usize) {
        let n = self.table.len() / 2;
        let mut next = vec![0.0; n];
        for (x, &p) in self.table.iter().enumerate() {
            next[remove_bit(x, i)] += p;
        }
        self.table = next;
        self.sigs.remove(i);
    }

    /// Replaces bits `i < j` (equal signatures) by their XOR kept at `i`.
    fn combine(&mut self, i: usize, j: usize) {
        let n = self.table.len() / 2;
        let mut next = vec![0.0; n];
        for (x, &p) in self.table.iter().enumerate() {
            let xor = ((x >> i) ^ (x >> j)) & 1;
            let y = (x & !(1 << i)) | (xor << i);
            next[remove_bit(y, j)] += p;
        }
        self.table = next;
        self.sigs.remove(j);
    }

    /// Sorts bits by signature.
    fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.width()).collect();
        order.sort_by(|&a, &b| self.sigs[a].cmp(&self.sigs[b]));
        let mut table = vec![0.0; self.table.len()];
        for (x, &p) in self.table.iter().enumerate() {
            let y = order
                .iter()
                .enumerate()
                .fold(0usize, |acc, (new, &old)| acc | (((x >> old) & 1) << new));
            table[y] = p;
        }
        self.sigs = order.iter().map(|&o| self.sigs[o].clone()).collect();
        self.table = table;
        self.sources.sort_unstable();
        self.sources.dedup();
    }

    /// XOR-convolves `other` into `self`; every signature of `other` must already be present.
    fn absorb(&mut self, other: &Group) {
        let embed: Vec<usize> = other
            .sigs
            .iter()
            .map(|s| self.sigs.iter().position(|t| t == s).expect("signature present"))
            .collect();
        let mut next = vec![0.0; self.table.len()];
        for (x, &q) in other.table.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let shift = embed
                .iter()
                .enumerate()
                .filter(|&(b, _)| (x >> b) & 1 == 1)
                .fold(0usize, |acc, (_, &pos)| acc | (1 << pos));
            for (y, &p) in self.table.iter().enumerate() {
                next[y ^ shift] += p * q;
            }
        }
        self.table = next;
        self.sources.extend_from_slice(&other.sources);
    }

    /// Adds the signatures of `other` as new bits that never fire.
    fn extend_with(&mut self, other: &Group) {
        for s in &other.sigs {
            if !self.sigs.contains(s) {
                self.sigs.push(s.clone());
                let mut table = vec![0.0; self.table.len() * 2];
                table[..self.table.len()].copy_from_slice(&self.table);
                self.table = table;
            }
        }
    }

    fn contains_all(&self, other: &Group) -> bool {
        other.sigs.iter().all(|s| self.sigs.contains(s))
    }

    fn overlaps(&self, other: &Group) -> bool {
        other.sigs.iter().any(|s| self.sigs.contains(s))
    }

    fn union_width(&self, other: &Group) -> usize {
        self.width() + other.sigs.iter().filter(|s| !self.sigs.contains(s)).count()
    }

    /// Marginal firing probability of bit `i`.
    fn marginal(&self, i: usize) -> f64 {
        self.table
            .iter()
            .enumerate()
            .filter(|&(x, _)| (x >> i) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Splits off bit `i` if it is independent of the rest of the group.
    fn split_independent(&mut self, i: usize) -> Option<Group> {
        let p = self.marginal(i);
        let mut rest = self.clone();
        rest.marginalize(i);
        let independent = self.table.iter().enumerate().all(|(x, &v)| {
            let pb = if (x >> i) & 1 == 1 { p } else { 1.0 - p };
            (v - pb * rest.table[remove_bit(x, i)]).abs() <= FACTOR_TOLERANCE
        });
        if !independent {
            return None;
        }
        let single = Group {
            sigs: vec![self.sigs[i].clone()],
            table: vec![1.0 - p, p],
            sources: self.sources.clone(),
        };
        *self = rest;
        Some(single)
    }

    fn is_trivial(&self) -> bool {
        self.width() == 0 || (self.table[0] - 1.0).abs() <= FACTOR_TOLERANCE
    }
}

fn remove_bit(x: usize, i: usize) -> usize {
    let low = x & ((1 << i) - 1);
    let high = (x >> (i + 1)) << i;
    low | high
}

fn merge_identical(groups: Vec<Group>) -> Vec<Group> {
    let mut by_sigs: BTreeMap<Vec<BitVec>, Group> = BTreeMap::new();
    for g in groups {
        match by_sigs.get_mut(&g.sigs) {
            Some(existing) => existing.absorb(&g),
            None => {
                by_sigs.insert(g.sigs.clone(), g);
            }
        }
    }
    by_sigs.into_values().collect()
}

/// Absorbs groups into strict supersets, larger targets first.
fn absorb_subsets(mut groups: Vec<Group>) -> Vec<Group> {
    groups.sort_by(|a, b| b.width().cmp(&a.width()).then_with(|| a.sigs.cmp(&b.sigs)));
    let mut alive = vec![true; groups.len()];
    for i in 0..groups.len() {
        if !alive[i] {
            continue;
        }
        for j in (i + 1)..groups.len() {
            if alive[j] && groups[j].width() < groups[i].width() && groups[i].contains_all(&groups[j]) {
                let small = groups[j].clone();
                groups[i].absorb(&small);
                alive[j] = false;
            }
        }
    }
    groups
        .into_iter()
        .zip(alive)
        .filter_map(|(g, a)| a.then_some(g))
        .collect()
}

fn merge_overlapping(mut groups: Vec<Group>) -> Vec<Group> {
    let mut i = 0;
    while i < groups.len() {
        let mut j = i + 1;
        while j < groups.len() {
            if groups[i].overlaps(&groups[j]) && groups[i].union_width(&groups[j]) <= MAX_JOINT_BITS {
                let other = groups.remove(j);
                groups[i].extend_with(&other);
                groups[i].absorb(&other);
                j = i + 1;
            } else {
                j += 1;
            }
        }
        i += 1;
    }
    groups
}

fn factorize(groups: Vec<Group>) -> Vec<Group> {
    let mut out = Vec::new();
    for mut g in groups {
        let mut i = 0;
        while g.width() > 1 && i < g.width() {
            match g.split_independent(i) {
                Some(single) => out.push(single),
                None => i += 1,
            }
        }
        out.push(g);
    }
    out
}

fn normalize(groups: Vec<Group>) -> Vec<Group> {
    let mut out = Vec::new();
    for mut g in groups {
        let mut i = 0;
        while i < g.width() {
            if g.sigs[i].is_zero() {
                g.marginalize(i);
            } else {
                i += 1;
            }
        }
        let mut i = 0;
        while i < g.width() {
            match ((i + 1)..g.width()).find(|&j| g.sigs[j] == g.sigs[i]) {
                Some(j) => g.combine(i, j),
                None => i += 1,
            }
        }
        if !g.is_trivial() {
            g.canonicalize();
            out.push(g);
        }
    }
    out
}

/// Reduces channel groups into independent mechanisms over `num_rows` flip rows.
///
/// `signatures[j]` lists the rows flipped by e-parameter `j`. Bits that flip
/// nothing are summed out, bits with equal signatures inside a group are
/// combined, groups with equal signature sets are XOR-convolved, groups whose
/// signatures are contained in a larger group are absorbed into it, and
/// overlapping groups are merged while small. Every group whose table is a
/// product of independent bits is then split into single mechanisms.
#[must_use]
pub fn reduce_channels(channels: &[ChannelGroup], signatures: &[BitVec], num_rows: usize) -> ErrorModel {
    let groups: Vec<Group> = channels
        .iter()
        .map(|c| Group {
            sigs: c.param_indices.iter().map(|&j| signatures[j].clone()).collect(),
            table: c.table.clone(),
            sources: c.param_indices.clone(),
        })
        .collect();
    let mut groups = normalize(groups);
    for _ in 0..32 {
        let before = groups.clone();
        groups = merge_identical(groups);
        groups = absorb_subsets(groups);
        groups = merge_overlapping(groups);
        groups = normalize(factorize(groups));
        groups.sort_by(|a, b| a.sigs.cmp(&b.sigs));
        if groups == before {
            break;
        }
    }
    let mut model = ErrorModel {
        num_rows,
        ..ErrorModel::default()
    };
    for g in groups {
        if g.width() == 1 {
            if g.table[1] > 0.0 {
                model.mechanisms.push(ErrorMechanism {
                    signature: g.sigs[0].clone(),
                    probability: g.table[1],
                    source_params: g.sources,
                });
            }
        } else {
            model.joint.push(JointMechanism {
                signatures: g.sigs,
                table: g.table,
                source_params: g.sources,
            });
        }
    }
    model.mechanisms.sort_by(|a, b| a.signature.cmp(&b.signature));
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bernoulli(param: usize, p: f64) -> ChannelGroup {
        ChannelGroup {
            param_indices: vec![param],
            table: vec![1.0 - p, p],
        }
    }

    fn sig(rows: usize, ones: &[usize]) -> BitVec {
        BitVec::from_indices(rows, ones.iter().copied())
    }

    fn channel_distribution(channels: &[ChannelGroup], signatures: &[BitVec], rows: usize) -> Vec<f64> {
        let mut dist = vec![0.0; 1 << rows];
        dist[0] = 1.0;
        for c in channels {
            let mut next = vec![0.0; dist.len()];
            for (x, &p) in c.table.iter().enumerate() {
                let s = c
                    .param_indices
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| (x >> b) & 1 == 1)
                    .fold(0usize, |acc, (_, &j)| {
                        acc ^ signatures[j].ones().fold(0, |a, i| a | (1 << i))
                    });
                for y in 0..dist.len() {
                    next[y ^ s] += p * dist[y];
                }
            }
            dist = next;
        }
        dist
    }

    #[test]
    fn identical_signatures_merge_by_xor_convolution() {
        let chans = [bernoulli(0, 0.1), bernoulli(1, 0.2)];
        let sigs = [sig(1, &[0]), sig(1, &[0])];
        let m = reduce_channels(&chans, &sigs, 1);
        assert_eq!(m.mechanisms.len(), 1);
        assert!(m.joint.is_empty());
        assert!((m.mechanisms[0].probability - 0.26).abs() < 1e-15);
        assert_eq!(m.mechanisms[0].source_params, vec![0, 1]);
    }

    #[test]
    fn null_channel_is_removed() {
        let m = reduce_channels(&[bernoulli(0, 0.3)], &[sig(2, &[])], 2);
        assert_eq!(m.num_mechanisms(), 0);
    }

    #[test]
    fn subset_is_absorbed_into_joint_group() {
        let joint = ChannelGroup {
            param_indices: vec![1, 2],
            table: vec![0.7, 0.1, 0.05, 0.15],
        };
        let chans = [bernoulli(0, 0.2), joint];
        let sigs = [sig(2, &[0]), sig(2, &[0]), sig(2, &[1])];
        let m = reduce_channels(&chans, &sigs, 2);
        assert_eq!(m.mechanisms.len(), 0);
        assert_eq!(m.joint.len(), 1);
        let exact = channel_distribution(&chans, &sigs, 2);
        for (a, b) in m.row_distribution().iter().zip(&exact) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn product_table_factorizes() {
        let (p, q) = (0.1, 0.3);
        let joint = ChannelGroup {
            param_indices: vec![0, 1],
            table: vec![(1.0 - p) * (1.0 - q), p * (1.0 - q), (1.0 - p) * q, p * q],
        };
        let m = reduce_channels(&[joint], &[sig(2, &[0]), sig(2, &[0, 1])], 2);
        assert!(m.joint.is_empty());
        assert_eq!(m.mechanisms.len(), 2);
    }

    #[test]
    fn depolarizing_pair_collapses_on_shared_signature() {
        let p = 0.3;
        let dep = ChannelGroup {
            param_indices: vec![0, 1],
            table: vec![1.0 - p, p / 3.0, p / 3.0, p / 3.0],
        };
        let m = reduce_channels(&[dep], &[sig(1, &[0]), sig(1, &[0])], 1);
        assert_eq!(m.mechanisms.len(), 1);
        assert!((m.mechanisms[0].probability - 2.0 * p / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn reduction_preserves_row_distribution(
            spec in prop::collection::vec(
                (prop::collection::vec(0usize..16, 1..=2), prop::collection::vec(0.0f64..1.0, 4)),
                1..6,
            )
        ) {
            let rows = 4;
            let mut chans = Vec::new();
            let mut sigs = Vec::new();
            for (masks, weights) in spec {
                let width = masks.len();
                let base = sigs.len();
                for m in &masks {
                    sigs.push(BitVec::from_indices(rows, (0..rows).filter(|i| (m >> i) & 1 == 1)));
                }
                let w = &weights[..1 << width];
                let total: f64 = w.iter().sum::<f64>() + 1e-9;
                chans.push(ChannelGroup {
                    param_indices: (base..base + width).collect(),
                    table: w.iter().map(|x| (x + 1e-9 / w.len() as f64) / total).collect(),
                });
            }
            let exact = channel_distribution(&chans, &sigs, rows);
            let model = reduce_channels(&chans, &sigs, rows);
            for (a, b) in model.row_distribution().iter().zip(&exact) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mut seen: Vec<&BitVec> = model.mechanisms.iter().map(|m| &m.signature).collect();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), model.mechanisms.len());
        }
    }
}

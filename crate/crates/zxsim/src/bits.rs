//! Bit-packed vectors and matrices over GF(2).

use std::fmt;

/// Number of `u64` words needed to hold `bits` bits.
#[inline]
#[must_use]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Parity of the AND of two equally sized word slices.
#[inline]
#[must_use]
pub fn and_parity(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

/// Fixed-length bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    #[must_use]
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    #[must_use]
    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.toggle(i);
        }
        v
    }

    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[must_use]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bitwise AND with `other`.
    #[must_use]
    pub fn dot(&self, other: &BitVec) -> bool {
        and_parity(&self.words, &other.words)
    }

    #[must_use]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    /// Lowest set bit, if any.
    #[must_use]
    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    /// True when every set bit of `self` is also set in `other`.
    #[must_use]
    pub fn is_subset_of(&self, other: &BitVec) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Row-major bit matrix with word-padded rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    #[inline]
    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    #[must_use]
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    #[inline]
    #[must_use]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[must_use]
    pub fn row_bools(&self, r: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    #[must_use]
    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    /// Stack row blocks of equal width.
    #[must_use]
    pub fn concat_rows(parts: Vec<BitMatrix>, cols: usize) -> Self {
        let stride = words_for(cols);
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut data = Vec::with_capacity(rows * stride);
        for p in parts {
            assert_eq!(p.cols, cols);
            data.extend_from_slice(&p.data);
        }
        Self {
            rows,
            cols,
            stride,
            data,
        }
    }
}

/// Result of reducing a list of GF(2) vectors to an independent basis.
#[derive(Clone, Debug)]
pub struct RowBasis {
    /// Independent input vectors, in the order they were first found.
    pub basis: Vec<BitVec>,
    /// Echelon copy of the basis with pivot columns, used for membership queries.
    echelon: Vec<(usize, BitVec, BitVec)>,
}

impl RowBasis {
    /// Greedy basis over `vectors`, preferring earlier vectors.
    #[must_use]
    pub fn build<'a>(width: usize, vectors: impl IntoIterator<Item = &'a BitVec>) -> Self {
        let mut me = Self {
            basis: Vec::new(),
            echelon: Vec::new(),
        };
        for v in vectors {
            debug_assert_eq!(v.len(), width);
            me.try_insert(v);
        }
        me
    }

    /// Inserts `v` if independent; returns its index in `basis` when inserted.
    pub fn try_insert(&mut self, v: &BitVec) -> Option<usize> {
        let k = self.basis.len();
        let (residue, combo) = self.reduce(v);
        let pivot = residue.first_one()?;
        let mut combo = combo;
        combo = extend(&combo, k + 1);
        combo.toggle(k);
        self.basis.push(v.clone());
        for e in &mut self.echelon {
            e.2 = extend(&e.2, k + 1);
        }
        self.echelon.push((pivot, residue, combo));
        Some(k)
    }

    /// Expresses `v` as an XOR of basis vectors, or `None` if outside the span.
    #[must_use]
    pub fn express(&self, v: &BitVec) -> Option<BitVec> {
        let (residue, combo) = self.reduce(v);
        if residue.is_zero() {
            Some(extend(&combo, self.basis.len()))
        } else {
            None
        }
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    fn reduce(&self, v: &BitVec) -> (BitVec, BitVec) {
        let mut residue = v.clone();
        let mut combo = BitVec::zeros(self.basis.len());
        for (pivot, row, row_combo) in &self.echelon {
            if residue.get(*pivot) {
                residue.xor_assign(row);
                let rc = extend(row_combo, combo.len());
                combo.xor_assign(&rc);
            }
        }
        (residue, combo)
    }
}

fn extend(v: &BitVec, len: usize) -> BitVec {
    if v.len() == len {
        return v.clone();
    }
    let mut out = BitVec::zeros(len);
    for i in v.ones() {
        out.set(i, true);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_iterates_in_order() {
        let v = BitVec::from_indices(130, [3, 64, 129, 0]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 3, 64, 129]);
        assert_eq!(v.count_ones(), 4);
    }

    #[test]
    fn dot_is_and_parity() {
        let a = BitVec::from_indices(70, [1, 2, 69]);
        let b = BitVec::from_indices(70, [2, 69]);
        assert!(!a.dot(&b));
        let c = BitVec::from_indices(70, [69]);
        assert!(a.dot(&c));
    }

    #[test]
    fn basis_of_dependent_triple_has_rank_two() {
        let vs = [
            BitVec::from_indices(3, [0, 1]),
            BitVec::from_indices(3, [1, 2]),
            BitVec::from_indices(3, [0, 2]),
        ];
        let b = RowBasis::build(3, vs.iter());
        assert_eq!(b.rank(), 2);
        let combo = b.express(&vs[2]).unwrap();
        assert_eq!(combo.ones().collect::<Vec<_>>(), vec![0, 1]);
        assert!(b.express(&BitVec::from_indices(3, [0])).is_none());
    }

    #[test]
    fn matrix_rows_are_padded() {
        let mut m = BitMatrix::zeros(3, 65);
        m.set(1, 64, true);
        assert_eq!(m.stride(), 2);
        assert!(m.get(1, 64));
        assert_eq!(m.row(1), &[0, 1]);
    }
}

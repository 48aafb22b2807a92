//! Change of noise basis: `f = T·e` over GF(2).

use crate::bits::{BitVec, RowBasis};
use crate::zx::Parity;

/// Independent parities of the e-parameters that everything downstream reads.
#[derive(Clone, Debug)]
pub struct BasisTransform {
    num_e: usize,
    basis: RowBasis,
}

fn to_bits(p: &Parity, width: usize) -> BitVec {
    BitVec::from_indices(width, p.indices())
}

impl BasisTransform {
    #[must_use]
    pub fn num_e(&self) -> usize {
        self.num_e
    }

    /// Number of f-parameters.
    #[must_use]
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// Row `i` of `T`: the e-parity defining `f_i`.
    #[must_use]
    pub fn row(&self, i: usize) -> Parity {
        Parity::from_indices(self.basis.basis[i].ones())
    }

    /// Column `j` of `T`: the f-parameters flipped by `e_j`.
    #[must_use]
    pub fn column(&self, j: usize) -> BitVec {
        let mut col = BitVec::zeros(self.rank());
        for (i, row) in self.basis.basis.iter().enumerate() {
            if row.get(j) {
                col.set(i, true);
            }
        }
        col
    }

    /// `T·e`.
    #[must_use]
    pub fn apply(&self, e: &[bool]) -> Vec<bool> {
        self.basis
            .basis
            .iter()
            .map(|row| row.ones().filter(|&j| e[j]).count() % 2 == 1)
            .collect()
    }

    /// Rewrites an e-parity as an f-parity, or `None` if it is outside the span.
    #[must_use]
    pub fn express(&self, p: &Parity) -> Option<Parity> {
        if p.is_empty() {
            return Some(Parity::empty());
        }
        if p.width() > self.num_e {
            return None;
        }
        self.basis
            .express(&to_bits(p, self.num_e))
            .map(|combo| Parity::from_indices(combo.ones()))
    }
}

/// Greedy independent basis of `parities`, keeping earlier ones as basis rows.
#[must_use]
pub fn basis_reduce<'a>(num_e: usize, parities: impl IntoIterator<Item = &'a Parity>) -> BasisTransform {
    let mut basis = RowBasis::build(num_e, std::iter::empty());
    for p in parities {
        if !p.is_empty() {
            basis.try_insert(&to_bits(p, num_e));
        }
    }
    BasisTransform { num_e, basis }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependent_parity_is_not_a_new_variable() {
        let ps = [
            Parity::from_indices([0, 1]),
            Parity::from_indices([1, 2]),
            Parity::from_indices([0, 2]),
        ];
        let t = basis_reduce(3, &ps);
        assert_eq!(t.rank(), 2);
        assert_eq!(t.express(&ps[2]), Some(Parity::from_indices([0, 1])));
        assert_eq!(t.column(1), BitVec::from_indices(2, [0, 1]));
    }

    #[test]
    fn single_and_empty() {
        let t = basis_reduce(1, &[Parity::single(0)]);
        assert_eq!(t.rank(), 1);
        assert_eq!(t.apply(&[true]), vec![true]);
        let t = basis_reduce(4, std::iter::empty());
        assert_eq!(t.rank(), 0);
        assert_eq!(t.express(&Parity::single(2)), None);
    }

    #[test]
    fn express_agrees_with_direct_evaluation() {
        let ps: Vec<Parity> = (0..6).map(|i| Parity::from_indices([i % 5, (i * 3 + 1) % 5])).collect();
        let t = basis_reduce(5, &ps);
        for m in 0..32usize {
            let e: Vec<bool> = (0..5).map(|i| (m >> i) & 1 == 1).collect();
            let f = t.apply(&e);
            for p in &ps {
                assert_eq!(t.express(p).unwrap().eval(&f), p.eval(&e));
            }
        }
    }
}

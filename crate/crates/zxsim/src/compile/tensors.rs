//! Flat phase-pair tensors for fast repeated scalar evaluation.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::bits::{and_parity, words_for, BitMatrix, BitVec};
use crate::zx::{eval_scalar_term, phase_pair_value, Parity, ScalarLedger, ScalarTerm};

/// `Σ_t c_t Π_k h(α_tk + π a_tk, β_tk + π b_tk)` with `a_tk = u_tk·x`, `b_tk = v_tk·x`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseTermTensors {
    num_params: usize,
    words: usize,
    c: Vec<Complex64>,
    /// Factor range of term `t` is `offsets[t]..offsets[t + 1]`.
    offsets: Vec<usize>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `words` words per factor.
    u: Vec<u64>,
    v: Vec<u64>,
    /// `h` at `(a, b)` for index `a + 2b`.
    h: Vec<[Complex64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TensorError {
    #[error("ledger parity needs {need} parameters, tensors allow {allowed}")]
    ParityOutOfRange { need: usize, allowed: usize },
    #[error("parameter rows have {got} columns, tensors expect {expected}")]
    WidthMismatch { got: usize, expected: usize },
}

/// One factor in phase-pair form plus the constant it was divided by.
struct Embedded {
    alpha: f64,
    beta: f64,
    a: Parity,
    b: Parity,
    scale: Complex64,
}

fn embed(term: &ScalarTerm) -> Embedded {
    match term {
        ScalarTerm::Node { alpha, a } => Embedded {
            alpha: alpha.radians() + FRAC_PI_2,
            beta: FRAC_PI_2,
            a: a.clone(),
            b: Parity::empty(),
            scale: Complex64::new(0.5, -0.5),
        },
        ScalarTerm::HalfPi { positive, a } => Embedded {
            alpha: 0.0,
            beta: if *positive { FRAC_PI_2 } else { -FRAC_PI_2 },
            a: a.clone(),
            b: Parity::empty(),
            scale: Complex64::new(0.5, 0.0),
        },
        ScalarTerm::PiPair { a, b } => Embedded {
            alpha: 0.0,
            beta: 0.0,
            a: a.clone(),
            b: b.clone(),
            scale: Complex64::new(0.5, 0.0),
        },
        ScalarTerm::PhasePair { alpha, beta, a, b } => Embedded {
            alpha: alpha.radians(),
            beta: beta.radians(),
            a: a.clone(),
            b: b.clone(),
            scale: Complex64::new(1.0, 0.0),
        },
    }
}

fn h_values(alpha: f64, beta: f64) -> [Complex64; 4] {
    let pi = std::f64::consts::PI;
    [
        phase_pair_value(alpha, beta),
        phase_pair_value(alpha + pi, beta),
        phase_pair_value(alpha, beta + pi),
        phase_pair_value(alpha + pi, beta + pi),
    ]
}

impl PhaseTermTensors {
    #[must_use]
    pub fn num_params(&self) -> usize {
        self.num_params
    }

    #[must_use]
    pub fn num_terms(&self) -> usize {
        self.c.len()
    }

    /// Largest factor count over terms.
    #[must_use]
    pub fn max_factors(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    #[must_use]
    pub fn weights(&self) -> &[Complex64] {
        &self.c
    }

    /// Phase constants `(α, β)` of the factors of term `t`.
    #[must_use]
    pub fn phases(&self, t: usize) -> Vec<(f64, f64)> {
        (self.offsets[t]..self.offsets[t + 1])
            .map(|k| (self.alpha[k], self.beta[k]))
            .collect()
    }

    /// Value at one bit-packed parameter row of at least `words` words.
    #[must_use]
    pub fn eval_words(&self, x: &[u64]) -> Complex64 {
        let w = self.words;
        let mut total = Complex64::new(0.0, 0.0);
        for t in 0..self.c.len() {
            let mut acc = self.c[t];
            for k in self.offsets[t]..self.offsets[t + 1] {
                let a = and_parity(&self.u[k * w..(k + 1) * w], &x[..w]);
                let b = and_parity(&self.v[k * w..(k + 1) * w], &x[..w]);
                acc *= self.h[k][usize::from(a) | (usize::from(b) << 1)];
            }
            total += acc;
        }
        total
    }

    /// Value at a parameter assignment.
    #[must_use]
    pub fn eval(&self, assignment: &[bool]) -> Complex64 {
        let x = BitVec::from_bools(&assignment[..self.num_params.min(assignment.len())]);
        let mut words = x.words().to_vec();
        words.resize(self.words, 0);
        self.eval_words(&words)
    }

    /// Values for every row of `params` (one shot per row).
    ///
    /// # Errors
    /// When the row width differs from the tensor parameter count.
    pub fn eval_batch(&self, params: &BitMatrix) -> Result<Vec<Complex64>, TensorError> {
        if params.cols() != self.num_params {
            return Err(TensorError::WidthMismatch {
                got: params.cols(),
                expected: self.num_params,
            });
        }
        Ok((0..params.rows()).map(|r| self.eval_words(params.row(r))).collect())
    }
}

/// Flattens a sum of scalar ledgers over `num_params` parameters.
///
/// Every ledger term is rewritten as a phase-pair factor; parameter-free
/// factors are folded into the term weight.
///
/// # Errors
/// When a parity references a parameter at or beyond `num_params`.
pub fn assemble_tensors(terms: &[ScalarLedger], num_params: usize) -> Result<PhaseTermTensors, TensorError> {
    let words = words_for(num_params);
    let mut out = PhaseTermTensors {
        num_params,
        words,
        offsets: vec![0],
        ..PhaseTermTensors::default()
    };
    for ledger in terms {
        let mut c = ledger.constant;
        let mut factors = Vec::new();
        for term in &ledger.terms {
            if term.width() > num_params {
                return Err(TensorError::ParityOutOfRange {
                    need: term.width(),
                    allowed: num_params,
                });
            }
            if term.is_constant() {
                c *= eval_scalar_term(term, &[]);
            } else {
                factors.push(embed(term));
            }
        }
        for f in &factors {
            c *= f.scale;
        }
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        out.c.push(c);
        for f in factors {
            out.alpha.push(f.alpha);
            out.beta.push(f.beta);
            out.h.push(h_values(f.alpha, f.beta));
            for (p, dst) in [(&f.a, &mut out.u), (&f.b, &mut out.v)] {
                let bits = BitVec::from_indices(num_params, p.indices());
                let mut w = bits.words().to_vec();
                w.resize(words, 0);
                dst.extend_from_slice(&w);
            }
        }
        out.offsets.push(out.alpha.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zx::Angle;
    use proptest::prelude::*;

    fn ledger(terms: Vec<ScalarTerm>, c: Complex64) -> ScalarLedger {
        ScalarLedger { constant: c, terms }
    }

    #[test]
    fn phase_pair_on_one_parameter() {
        let l = ledger(
            vec![ScalarTerm::PhasePair {
                alpha: Angle::ZERO,
                beta: Angle::ZERO,
                a: Parity::single(0),
                b: Parity::empty(),
            }],
            Complex64::new(1.0, 0.0),
        );
        let t = assemble_tensors(&[l], 1).unwrap();
        assert_eq!(t.num_terms(), 1);
        assert_eq!(t.max_factors(), 1);
        assert!((t.eval(&[false]) - 2.0).norm() < 1e-15);
        assert!((t.eval(&[true]) - 2.0).norm() < 1e-15);
    }

    #[test]
    fn half_pi_embedding() {
        let l = ledger(
            vec![ScalarTerm::HalfPi {
                positive: true,
                a: Parity::single(0),
            }],
            Complex64::new(1.0, 0.0),
        );
        let t = assemble_tensors(&[l], 1).unwrap();
        assert!((t.eval(&[false]) - 1.0).norm() < 1e-15);
        assert!((t.eval(&[true]) - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn empty_ledger_is_its_constant() {
        let t = assemble_tensors(&[ledger(vec![], Complex64::new(0.5, 0.0))], 3).unwrap();
        assert_eq!(t.max_factors(), 0);
        assert_eq!(t.weights(), &[Complex64::new(0.5, 0.0)]);
        let rows = BitMatrix::zeros(4, 3);
        assert!(t.eval_batch(&rows).unwrap().iter().all(|v| (v - 0.5).norm() == 0.0));
    }

    #[test]
    fn out_of_range_parity_is_rejected() {
        let l = ledger(
            vec![ScalarTerm::Node {
                alpha: Angle::ZERO,
                a: Parity::single(4),
            }],
            Complex64::new(1.0, 0.0),
        );
        assert!(assemble_tensors(&[l], 2).is_err());
    }

    fn parity_strategy() -> impl Strategy<Value = Parity> {
        prop::collection::vec(0usize..6, 0..3).prop_map(Parity::from_indices)
    }

    fn term_strategy() -> impl Strategy<Value = ScalarTerm> {
        let angle = (0i64..8, prop::option::of(0.01f64..0.24)).prop_map(|(k, g)| {
            g.map_or(Angle::quarter_turns(k), |x| {
                Angle::quarter_turns(k) + Angle::from_pi_units(x)
            })
        });
        prop_oneof![
            (angle.clone(), parity_strategy()).prop_map(|(alpha, a)| ScalarTerm::Node { alpha, a }),
            (any::<bool>(), parity_strategy()).prop_map(|(positive, a)| ScalarTerm::HalfPi { positive, a }),
            (parity_strategy(), parity_strategy()).prop_map(|(a, b)| ScalarTerm::PiPair { a, b }),
            (angle.clone(), angle, parity_strategy(), parity_strategy())
                .prop_map(|(alpha, beta, a, b)| ScalarTerm::PhasePair { alpha, beta, a, b }),
        ]
    }

    proptest! {
        #[test]
        fn tensors_match_ledger_sum(
            ledgers in prop::collection::vec(
                (prop::collection::vec(term_strategy(), 0..5), -2.0f64..2.0, -2.0f64..2.0),
                1..4,
            ),
            mask in 0u32..64,
        ) {
            let ls: Vec<ScalarLedger> = ledgers
                .into_iter()
                .map(|(terms, re, im)| ledger(terms, Complex64::new(re, im)))
                .collect();
            let t = assemble_tensors(&ls, 6).unwrap();
            let a: Vec<bool> = (0..6).map(|i| (mask >> i) & 1 == 1).collect();
            let want: Complex64 = ls.iter().map(|l| l.eval(&a)).sum();
            prop_assert!((t.eval(&a) - want).norm() < 1e-9 * (1.0 + want.norm()));
        }
    }
}

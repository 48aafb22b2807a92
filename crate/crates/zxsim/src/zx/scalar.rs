use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

use super::phase::{Angle, Parity};

/// Parameterized scalar factor recorded by a rewrite.
#[derive(Clone, PartialEq, Debug)]
pub enum ScalarTerm {
    /// `1 + e^{i(α + aπ)}`
    Node { alpha: Angle, a: Parity },
    /// `e^{±i aπ/2}`; `positive` selects the sign.
    HalfPi { positive: bool, a: Parity },
    /// `(-1)^{ab}`
    PiPair { a: Parity, b: Parity },
    /// `1 + e^{i(α+aπ)} + e^{i(β+bπ)} - e^{i(α+β+aπ+bπ)}`
    PhasePair {
        alpha: Angle,
        beta: Angle,
        a: Parity,
        b: Parity,
    },
}

/// `h(α, β)` with the π flips already folded into the angles.
#[must_use]
pub fn phase_pair_value(alpha: f64, beta: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) + Complex64::cis(alpha) + Complex64::cis(beta) - Complex64::cis(alpha + beta)
}

#[inline]
fn flip(bit: bool) -> f64 {
    if bit {
        PI
    } else {
        0.0
    }
}

impl ScalarTerm {
    /// True when the term references no parameters.
    #[must_use]
    pub fn is_constant(&self) -> bool {
        match self {
            ScalarTerm::Node { a, .. } | ScalarTerm::HalfPi { a, .. } => a.is_empty(),
            ScalarTerm::PiPair { a, b } | ScalarTerm::PhasePair { a, b, .. } => a.is_empty() && b.is_empty(),
        }
    }

    #[must_use]
    pub fn width(&self) -> usize {
        match self {
            ScalarTerm::Node { a, .. } | ScalarTerm::HalfPi { a, .. } => a.width(),
            ScalarTerm::PiPair { a, b } | ScalarTerm::PhasePair { a, b, .. } => a.width().max(b.width()),
        }
    }

    /// Rewrites every parity through `map` (index `i` becomes `map[i]`).
    #[must_use]
    pub fn substitute(&self, map: &[Parity]) -> ScalarTerm {
        match self {
            ScalarTerm::Node { alpha, a } => ScalarTerm::Node {
                alpha: *alpha,
                a: a.substitute(map),
            },
            ScalarTerm::HalfPi { positive, a } => ScalarTerm::HalfPi {
                positive: *positive,
                a: a.substitute(map),
            },
            ScalarTerm::PiPair { a, b } => ScalarTerm::PiPair {
                a: a.substitute(map),
                b: b.substitute(map),
            },
            ScalarTerm::PhasePair { alpha, beta, a, b } => ScalarTerm::PhasePair {
                alpha: *alpha,
                beta: *beta,
                a: a.substitute(map),
                b: b.substitute(map),
            },
        }
    }
}

/// Evaluates a term with its parities resolved against `assignment`.
#[must_use]
pub fn eval_scalar_term(term: &ScalarTerm, assignment: &[bool]) -> Complex64 {
    match term {
        ScalarTerm::Node { alpha, a } => {
            Complex64::new(1.0, 0.0) + Complex64::cis(alpha.radians() + flip(a.eval(assignment)))
        }
        ScalarTerm::HalfPi { positive, a } => {
            if !a.eval(assignment) {
                Complex64::new(1.0, 0.0)
            } else if *positive {
                Complex64::i()
            } else {
                -Complex64::i()
            }
        }
        ScalarTerm::PiPair { a, b } => {
            if a.eval(assignment) && b.eval(assignment) {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        }
        ScalarTerm::PhasePair { alpha, beta, a, b } => phase_pair_value(
            alpha.radians() + flip(a.eval(assignment)),
            beta.radians() + flip(b.eval(assignment)),
        ),
    }
}

/// Multiplicative scalar attached to a diagram.
#[derive(Clone, PartialEq, Debug)]
pub struct ScalarLedger {
    pub constant: Complex64,
    pub terms: Vec<ScalarTerm>,
}

impl Default for ScalarLedger {
    fn default() -> Self {
        Self::one()
    }
}

impl ScalarLedger {
    #[must_use]
    pub fn one() -> Self {
        Self {
            constant: Complex64::new(1.0, 0.0),
            terms: Vec::new(),
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.constant *= factor;
    }

    pub fn scale_real(&mut self, factor: f64) {
        self.constant *= factor;
    }

    /// Multiplies by `√2^power`.
    pub fn scale_sqrt2(&mut self, power: i32) {
        self.constant *= std::f64::consts::SQRT_2.powi(power);
    }

    /// Appends a term; parameter-free terms are folded into the constant.
    pub fn push(&mut self, term: ScalarTerm) {
        if term.is_constant() {
            self.constant *= eval_scalar_term(&term, &[]);
        } else {
            self.terms.push(term);
        }
    }

    /// Multiplies in another ledger.
    pub fn absorb(&mut self, other: &ScalarLedger) {
        self.constant *= other.constant;
        self.terms.extend(other.terms.iter().cloned());
    }

    #[must_use]
    pub fn eval(&self, assignment: &[bool]) -> Complex64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, t| acc * eval_scalar_term(t, assignment))
    }

    #[must_use]
    pub fn width(&self) -> usize {
        self.terms.iter().map(ScalarTerm::width).max().unwrap_or(0)
    }
}

impl fmt::Display for ScalarTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarTerm::Node { alpha, a } => write!(f, "node({alpha};{a})"),
            ScalarTerm::HalfPi { positive, a } => {
                write!(f, "halfpi({};{a})", if *positive { '+' } else { '-' })
            }
            ScalarTerm::PiPair { a, b } => write!(f, "pipair({a};{b})"),
            ScalarTerm::PhasePair { alpha, beta, a, b } => {
                write!(f, "phasepair({alpha},{beta};{a};{b})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn phase_pair_at_zero_is_two() {
        let t = ScalarTerm::PhasePair {
            alpha: Angle::ZERO,
            beta: Angle::ZERO,
            a: Parity::single(0),
            b: Parity::single(1),
        };
        assert!(close(eval_scalar_term(&t, &[false, false]), Complex64::new(2.0, 0.0)));
        assert!(close(eval_scalar_term(&t, &[true, true]), Complex64::new(-2.0, 0.0)));
    }

    #[test]
    fn node_with_flip() {
        let t = ScalarTerm::Node {
            alpha: Angle::quarter_turns(1),
            a: Parity::single(0),
        };
        let want = Complex64::new(1.0, 0.0) + Complex64::cis(5.0 * PI / 4.0);
        assert!(close(eval_scalar_term(&t, &[true]), want));
    }

    #[test]
    fn half_pi_signs() {
        let p = ScalarTerm::HalfPi {
            positive: true,
            a: Parity::single(0),
        };
        let m = ScalarTerm::HalfPi {
            positive: false,
            a: Parity::single(0),
        };
        assert!(close(eval_scalar_term(&p, &[true]), Complex64::i()));
        assert!(close(eval_scalar_term(&m, &[true]), -Complex64::i()));
        assert!(close(eval_scalar_term(&m, &[false]), Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn constant_terms_fold() {
        let mut l = ScalarLedger::one();
        l.push(ScalarTerm::Node {
            alpha: Angle::quarter_turns(2),
            a: Parity::empty(),
        });
        assert!(l.terms.is_empty());
        assert!(close(l.constant, Complex64::new(1.0, 1.0)));
    }
}

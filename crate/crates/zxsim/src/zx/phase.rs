use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Neg};

/// XOR of a set of binary parameters, stored as a sorted index list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Parity(Vec<u32>);

impl Parity {
    #[must_use]
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    #[must_use]
    pub fn single(index: usize) -> Self {
        Self(vec![index as u32])
    }

    /// Builds a parity; repeated indices cancel in pairs.
    #[must_use]
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<u32> = indices.into_iter().map(|i| i as u32).collect();
        v.sort_unstable();
        let mut out = Vec::with_capacity(v.len());
        for i in v {
            if out.last() == Some(&i) {
                out.pop();
            } else {
                out.push(i);
            }
        }
        Self(out)
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    #[must_use]
    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&(index as u32)).is_ok()
    }

    /// Largest referenced index plus one.
    #[must_use]
    pub fn width(&self) -> usize {
        self.0.last().map_or(0, |&i| i as usize + 1)
    }

    /// Symmetric difference in place.
    pub fn xor_assign(&mut self, other: &Parity) {
        if other.0.is_empty() {
            return;
        }
        if self.0.is_empty() {
            self.0.clone_from(&other.0);
            return;
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.0 = out;
    }

    #[must_use]
    pub fn xor(&self, other: &Parity) -> Parity {
        let mut p = self.clone();
        p.xor_assign(other);
        p
    }

    /// Value of the parity under a bit assignment.
    #[must_use]
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.0.iter().fold(false, |acc, &i| acc ^ assignment[i as usize])
    }

    /// Replaces each index `i` by the parity `map[i]`.
    #[must_use]
    pub fn substitute(&self, map: &[Parity]) -> Parity {
        let mut out = Parity::empty();
        for i in self.indices() {
            out.xor_assign(&map[i]);
        }
        out
    }
}

impl fmt::Debug for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("^")?;
            }
            write!(f, "p{i}")?;
        }
        Ok(())
    }
}

/// Parameter-free angle: a multiple of π/4 plus an optional generic remainder.
///
/// The generic remainder is kept in units of π and normalized into the open
/// interval (0, 1/4), so the exact part always carries every multiple of π/4.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Angle {
    eighths: u8,
    generic: Option<f64>,
}

impl Angle {
    pub const ZERO: Angle = Angle {
        eighths: 0,
        generic: None,
    };
    pub const PI: Angle = Angle {
        eighths: 4,
        generic: None,
    };

    /// Exact multiple of π/4.
    #[must_use]
    pub fn quarter_turns(k: i64) -> Self {
        Self {
            eighths: k.rem_euclid(8) as u8,
            generic: None,
        }
    }

    /// Angle given in units of π.
    #[must_use]
    pub fn from_pi_units(x: f64) -> Self {
        Self::normalized(0, x)
    }

    fn normalized(eighths: i64, generic: f64) -> Self {
        let scaled = generic * 4.0;
        let whole = scaled.floor();
        let frac = scaled - whole;
        let k = (eighths + (whole.rem_euclid(8.0) as i64)).rem_euclid(8);
        Self {
            eighths: k as u8,
            generic: if frac == 0.0 { None } else { Some(frac / 4.0) },
        }
    }

    /// Exact part in units of π/4, in `0..8`.
    #[must_use]
    pub fn exact(&self) -> u8 {
        self.eighths
    }

    /// Generic remainder in units of π, in (0, 1/4).
    #[must_use]
    pub fn generic(&self) -> Option<f64> {
        self.generic
    }

    #[must_use]
    pub fn radians(&self) -> f64 {
        f64::from(self.eighths) * PI / 4.0 + self.generic.unwrap_or(0.0) * PI
    }

    /// `e^{iθ}`, exact on multiples of π/4.
    #[must_use]
    pub fn unit(&self) -> num_complex::Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let table = [
            (1.0, 0.0),
            (h, h),
            (0.0, 1.0),
            (-h, h),
            (-1.0, 0.0),
            (-h, -h),
            (0.0, -1.0),
            (h, -h),
        ];
        let (re, im) = table[usize::from(self.eighths)];
        let base = num_complex::Complex64::new(re, im);
        match self.generic {
            None => base,
            Some(g) => base * num_complex::Complex64::cis(g * PI),
        }
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.eighths == 0 && self.generic.is_none()
    }

    #[must_use]
    pub fn is_clifford(&self) -> bool {
        self.generic.is_none() && self.eighths.is_multiple_of(2)
    }

    #[must_use]
    pub fn is_pauli(&self) -> bool {
        self.generic.is_none() && self.eighths.is_multiple_of(4)
    }

    /// True for ±π/2.
    #[must_use]
    pub fn is_proper_clifford(&self) -> bool {
        self.generic.is_none() && self.eighths % 4 == 2
    }

    /// Odd multiple of π/4.
    #[must_use]
    pub fn is_t_like(&self) -> bool {
        self.generic.is_none() && self.eighths % 2 == 1
    }

    /// Parts of the angle as (multiple of π/2, remainder in [0, π/2)).
    #[must_use]
    pub fn split_half_pi(&self) -> (u8, Angle) {
        let half_turns = self.eighths / 2;
        let rest = Angle {
            eighths: self.eighths % 2,
            generic: self.generic,
        };
        (half_turns, rest)
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        let k = i64::from(self.eighths) + i64::from(rhs.eighths);
        match (self.generic, rhs.generic) {
            (None, None) => Angle::quarter_turns(k),
            (a, b) => Angle::normalized(k, a.unwrap_or(0.0) + b.unwrap_or(0.0)),
        }
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        match self.generic {
            None => Angle::quarter_turns(-i64::from(self.eighths)),
            Some(g) => Angle::normalized(-i64::from(self.eighths), -g),
        }
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.generic {
            None => write!(f, "{}/4", self.eighths),
            Some(g) => write!(f, "{}/4+{g}", self.eighths),
        }
    }
}

/// Spider phase: constant angle plus π times a parity of parameters.
#[derive(Clone, PartialEq, Default)]
pub struct Phase {
    pub angle: Angle,
    pub parity: Parity,
}

impl Phase {
    #[must_use]
    pub fn zero() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn constant(angle: Angle) -> Self {
        Self {
            angle,
            parity: Parity::empty(),
        }
    }

    #[must_use]
    pub fn quarter_turns(k: i64) -> Self {
        Self::constant(Angle::quarter_turns(k))
    }

    #[must_use]
    pub fn from_parity(parity: Parity) -> Self {
        Self {
            angle: Angle::ZERO,
            parity,
        }
    }

    #[must_use]
    pub fn new(angle: Angle, parity: Parity) -> Self {
        Self { angle, parity }
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.angle.is_zero() && self.parity.is_empty()
    }

    #[must_use]
    pub fn is_clifford(&self) -> bool {
        self.angle.is_clifford()
    }

    #[must_use]
    pub fn is_pauli(&self) -> bool {
        self.angle.is_pauli()
    }

    /// Phase of the conjugate copy: the constant is negated, the parity kept.
    #[must_use]
    pub fn conjugate(&self) -> Phase {
        Phase {
            angle: -self.angle,
            parity: self.parity.clone(),
        }
    }

    /// Total angle in radians under an assignment.
    #[must_use]
    pub fn radians(&self, assignment: &[bool]) -> f64 {
        let flip = if self.parity.eval(assignment) { PI } else { 0.0 };
        self.angle.radians() + flip
    }
}

impl Add for &Phase {
    type Output = Phase;
    fn add(self, rhs: &Phase) -> Phase {
        Phase {
            angle: self.angle + rhs.angle,
            parity: self.parity.xor(&rhs.parity),
        }
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        &self + &rhs
    }
}

impl AddAssign<&Phase> for Phase {
    fn add_assign(&mut self, rhs: &Phase) {
        self.angle = self.angle + rhs.angle;
        self.parity.xor_assign(&rhs.parity);
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parity.is_empty() {
            write!(f, "{}", self.angle)
        } else {
            write!(f, "{}+pi*({})", self.angle, self.parity)
        }
    }
}

//! Writing non-Clifford spiders as weighted sums of Clifford diagrams.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::simplify::{reduce_in_place, RewriteTrace};
use crate::zx::{to_tensor, Angle, EdgeKind, Layer, ParamZXDiagram, Phase, ScalarLedger};

/// Magic vertices sharing one non-Clifford angle class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupKind {
    /// One vertex, two terms.
    Single,
    /// Two odd multiples of π/4, two terms.
    Pair,
    /// Five equal angles, three terms, one magic vertex left in each.
    Cat5,
}

impl GroupKind {
    #[must_use]
    pub fn terms(self) -> u64 {
        match self {
            GroupKind::Single | GroupKind::Pair => 2,
            GroupKind::Cat5 => 3,
        }
    }

    /// Net number of magic vertices removed by one application.
    #[must_use]
    pub fn removes(self) -> usize {
        match self {
            GroupKind::Single => 1,
            GroupKind::Pair => 2,
            GroupKind::Cat5 => 4,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Single => "single",
            GroupKind::Pair => "pair",
            GroupKind::Cat5 => "cat5",
        })
    }
}

/// Static grouping of the magic vertices of one diagram.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecompositionPlan {
    pub groups: Vec<GroupKind>,
    pub num_magic: usize,
}

impl DecompositionPlan {
    /// Product of per-group term counts, saturating at `u64::MAX`.
    #[must_use]
    pub fn total_terms(&self) -> u64 {
        self.groups
            .iter()
            .try_fold(1u64, |acc, g| acc.checked_mul(g.terms()))
            .unwrap_or(u64::MAX)
    }

    #[must_use]
    pub fn log2_terms(&self) -> f64 {
        self.groups.iter().map(|g| (g.terms() as f64).log2()).sum()
    }

    /// `log2(χ) / N_magic`, zero without magic.
    #[must_use]
    pub fn rate(&self) -> f64 {
        if self.num_magic == 0 {
            0.0
        } else {
            self.log2_terms() / self.num_magic as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecomposeError {
    #[error("Clifford term kept {0} vertices after reduction")]
    Unreduced(usize),
    #[error("decomposition would need more than {0} terms")]
    TooManyTerms(u64),
}

/// Largest number of Clifford terms one diagram may expand into.
pub const MAX_TERMS: u64 = 1 << 22;

/// Angle class of a magic vertex: parity of its π/4 multiple and the generic remainder.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct MagicClass {
    odd: bool,
    generic: Option<f64>,
}

impl MagicClass {
    fn of(angle: Angle) -> Self {
        Self {
            odd: angle.exact() % 2 == 1,
            generic: angle.generic(),
        }
    }

    fn is_t_like(self) -> bool {
        self.odd && self.generic.is_none()
    }

    fn key(self) -> (bool, u64) {
        (self.odd, self.generic.map_or(0, f64::to_bits))
    }
}

/// Spiders whose constant angle is not a multiple of π/2, in id order.
#[must_use]
pub fn magic_vertices(g: &ParamZXDiagram) -> Vec<usize> {
    g.vertex_ids()
        .filter(|&v| !g.is_boundary(v) && !g.phase(v).angle.is_clifford())
        .collect()
}

fn classes(g: &ParamZXDiagram) -> Vec<(MagicClass, Vec<usize>)> {
    let mut by_key: BTreeMap<(bool, u64), (MagicClass, Vec<usize>)> = BTreeMap::new();
    for v in magic_vertices(g) {
        let c = MagicClass::of(g.phase(v).angle);
        by_key.entry(c.key()).or_insert_with(|| (c, Vec::new())).1.push(v);
    }
    let mut out: Vec<_> = by_key.into_values().collect();
    out.sort_by_key(|(_, vs)| vs[0]);
    out
}

/// Static plan: Cat5 groups while five or more vertices share an angle
/// class, then pairs for odd multiples of π/4 and singles for the rest.
#[must_use]
pub fn plan_decomposition(g: &ParamZXDiagram) -> DecompositionPlan {
    let mut plan = DecompositionPlan::default();
    for (class, vs) in classes(g) {
        let mut n = vs.len();
        plan.num_magic += n;
        while n >= 5 {
            plan.groups.push(GroupKind::Cat5);
            n -= 4;
        }
        while n > 0 {
            if class.is_t_like() && n >= 2 {
                plan.groups.push(GroupKind::Pair);
                n -= 2;
            } else {
                plan.groups.push(GroupKind::Single);
                n -= 1;
            }
        }
    }
    plan
}

/// Next group to split: the class holding the smallest magic id.
fn next_group(g: &ParamZXDiagram) -> Option<(GroupKind, Vec<usize>)> {
    let (class, vs) = classes(g).into_iter().next()?;
    Some(if vs.len() >= 5 {
        (GroupKind::Cat5, vs[..5].to_vec())
    } else if class.is_t_like() && vs.len() >= 2 {
        (GroupKind::Pair, vs[..2].to_vec())
    } else {
        (GroupKind::Single, vs[..1].to_vec())
    })
}

/// Moves the non-Clifford part of `v`'s angle out and returns it.
fn strip_magic(g: &mut ParamZXDiagram, v: usize) -> Angle {
    let phase = g.phase(v).clone();
    let (half_turns, magic) = phase.angle.split_half_pi();
    g.set_phase(
        v,
        Phase::new(Angle::quarter_turns(2 * i64::from(half_turns)), phase.parity),
    );
    magic
}

fn weighted(mut g: ParamZXDiagram, w: Complex64) -> ParamZXDiagram {
    g.scalar.scale(w);
    g
}

fn add_z(g: &mut ParamZXDiagram, angle: Angle) -> usize {
    g.add_z(Phase::constant(angle))
}

/// Splits one group into Clifford-or-smaller terms with weights folded into their scalars.
///
/// Debug builds also check the identity on an isolated gadget with the same angles.
#[must_use]
pub fn decompose_group(g: &ParamZXDiagram, kind: GroupKind, vertices: &[usize]) -> Vec<ParamZXDiagram> {
    if cfg!(debug_assertions) {
        let angles: Vec<Angle> = vertices.iter().map(|&v| g.phase(v).angle).collect();
        let err = gadget_identity_error(kind, &angles);
        debug_assert!(err < 1e-10, "{kind} decomposition off by {err} at {angles:?}");
    }
    expand_group(g, kind, vertices)
}

/// Largest entrywise error of the decomposition of an isolated gadget.
///
/// The gadget has one boundary per angle, joined by a Hadamard edge to a
/// spider with that angle; the check runs at the all-zero assignment.
#[must_use]
pub fn gadget_identity_error(kind: GroupKind, angles: &[Angle]) -> f64 {
    let mut d = ParamZXDiagram::new(0);
    let mut outs = Vec::new();
    let mut vs = Vec::new();
    for &a in angles {
        let b = d.add_boundary(Layer::Classical);
        let v = add_z(&mut d, a);
        d.add_edge(b, v, EdgeKind::Hadamard);
        outs.push(b);
        vs.push(v);
    }
    d.set_outputs(outs);
    let Ok(want) = to_tensor(&d, &[]) else {
        return f64::INFINITY;
    };
    let mut got = vec![Complex64::new(0.0, 0.0); want.data.len()];
    for t in expand_group(&d, kind, &vs) {
        let Ok(x) = to_tensor(&t, &[]) else {
            return f64::INFINITY;
        };
        for (a, b) in got.iter_mut().zip(&x.data) {
            *a += b;
        }
    }
    want.data
        .iter()
        .zip(&got)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

fn expand_group(g: &ParamZXDiagram, kind: GroupKind, vertices: &[usize]) -> Vec<ParamZXDiagram> {
    match kind {
        GroupKind::Single => {
            let v = vertices[0];
            let phase = g.phase(v).clone();
            let z = phase.angle.unit();
            let mut a = g.clone();
            a.set_phase(v, Phase::from_parity(phase.parity.clone()));
            let mut b = g.clone();
            b.set_phase(v, Phase::new(Angle::PI, phase.parity));
            vec![weighted(a, (1.0 + z) / 2.0), weighted(b, (1.0 - z) / 2.0)]
        }
        GroupKind::Pair => {
            let (x, y) = (vertices[0], vertices[1]);
            let mut base = g.clone();
            strip_magic(&mut base, x);
            strip_magic(&mut base, y);
            let mut a = base.clone();
            let m = add_z(&mut a, Angle::ZERO);
            a.add_edge(m, x, EdgeKind::Hadamard);
            a.add_edge(m, y, EdgeKind::Hadamard);
            a.add_to_phase(x, &Phase::quarter_turns(2));
            let mut b = base;
            let m = add_z(&mut b, Angle::PI);
            b.add_edge(m, x, EdgeKind::Hadamard);
            b.add_edge(m, y, EdgeKind::Hadamard);
            vec![a, weighted(b, Angle::quarter_turns(1).unit())]
        }
        GroupKind::Cat5 => cat5(g, vertices),
    }
}

/// Five equal rotations `e^{iθ|x|}` as three terms.
///
/// With `z = e^{iθ}`, the target is the sum of
/// `(1 - z⁴)·GHZ(1, -z)`, a hub state giving `(1+z) - (1-z)(-1)^{|x|}` and
/// a hub state with a complete Hadamard graph giving a
/// `(-1)^{|x|(|x|-1)/2}` sign, each weighted to match on every weight class.
fn cat5(g: &ParamZXDiagram, vs: &[usize]) -> Vec<ParamZXDiagram> {
    let mut base = g.clone();
    let mut theta = Angle::ZERO;
    for &v in vs {
        theta = strip_magic(&mut base, v);
    }
    let z = theta.unit();
    let z2 = z * z;
    let z4 = z2 * z2;
    let c1 = (z4 + z2) / 2.0;
    let c2 = (z4 - z2) / 2.0;

    let mut t0 = base.clone();
    let h = add_z(&mut t0, theta + Angle::PI);
    for &v in vs {
        let m = add_z(&mut t0, Angle::ZERO);
        t0.add_edge(v, m, EdgeKind::Hadamard);
        t0.add_edge(m, h, EdgeKind::Hadamard);
    }

    let hub_with_leaf = |leaf: Angle| {
        let mut t = base.clone();
        let p = add_z(&mut t, Angle::PI);
        for &v in vs {
            t.add_edge(v, p, EdgeKind::Hadamard);
        }
        let w = add_z(&mut t, leaf);
        t.add_edge(p, w, EdgeKind::Hadamard);
        t
    };
    let t1 = hub_with_leaf(theta);
    let mut t2 = hub_with_leaf(theta + Angle::PI);
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            t2.add_edge(a, b, EdgeKind::Hadamard);
        }
    }
    let e_minus = (-theta).unit();
    vec![
        weighted(t0, 1.0 - z4),
        weighted(t1, c1 * e_minus * 4.0),
        weighted(t2, c2 * (Angle::PI + -theta).unit() * 128.0),
    ]
}

/// Result of fully decomposing one diagram.
#[derive(Clone, Debug, Default)]
pub struct Decomposition {
    /// Scalar ledger of every Clifford term, weights included.
    pub terms: Vec<ScalarLedger>,
    pub plan: DecompositionPlan,
    pub trace: RewriteTrace,
}

/// Decomposes a closed graph-like diagram until every term reduces to a bare scalar.
///
/// # Errors
/// When a term keeps vertices after Clifford reduction or the static plan
/// exceeds [`MAX_TERMS`].
pub fn decompose_magic(g: &ParamZXDiagram) -> Result<Decomposition, DecomposeError> {
    let mut out = Decomposition::default();
    let mut start = g.clone();
    reduce_in_place(&mut start, &mut out.trace);
    out.plan = plan_decomposition(&start);
    let chi = out.plan.total_terms();
    if chi > MAX_TERMS {
        return Err(DecomposeError::TooManyTerms(MAX_TERMS));
    }
    let mut stack = vec![start];
    while let Some(d) = stack.pop() {
        match next_group(&d) {
            None => {
                if d.num_vertices() != 0 {
                    return Err(DecomposeError::Unreduced(d.num_vertices()));
                }
                out.terms.push(d.scalar);
            }
            Some((kind, vs)) => {
                for mut t in decompose_group(&d, kind, &vs).into_iter().rev() {
                    reduce_in_place(&mut t, &mut out.trace);
                    stack.push(t);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zx::{Parity, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Open diagram: one boundary per angle, each joined to a spider with that angle
    /// (plus parity `e_i`).
    fn rotations(angles: &[Angle]) -> (ParamZXDiagram, Vec<usize>) {
        let mut d = ParamZXDiagram::new(angles.len());
        let mut outs = Vec::new();
        let mut vs = Vec::new();
        for (i, &a) in angles.iter().enumerate() {
            let b = d.add_boundary(Layer::Classical);
            let v = d.add_z(Phase::new(a, Parity::single(i)));
            d.add_edge(b, v, EdgeKind::Hadamard);
            outs.push(b);
            vs.push(v);
        }
        d.set_outputs(outs);
        (d, vs)
    }

    fn summed(terms: &[ParamZXDiagram], assignment: &[bool]) -> Tensor {
        let mut acc = to_tensor(&terms[0], assignment).unwrap();
        for t in &terms[1..] {
            let x = to_tensor(t, assignment).unwrap();
            for (a, b) in acc.data.iter_mut().zip(&x.data) {
                *a += b;
            }
        }
        acc
    }

    fn check_identity(angles: &[Angle], kind: GroupKind) {
        let (d, vs) = rotations(angles);
        let terms = decompose_group(&d, kind, &vs);
        assert_eq!(terms.len() as u64, kind.terms());
        for flip in [false, true] {
            let a = vec![flip; angles.len()];
            let want = to_tensor(&d, &a).unwrap();
            let got = summed(&terms, &a);
            assert!(
                want.max_diff(&got) < 1e-10,
                "{kind} failed at {a:?}: {}",
                want.max_diff(&got)
            );
        }
    }

    fn random_angle(rng: &mut ChaCha8Rng) -> Angle {
        Angle::from_pi_units(rng.gen_range(0.0..2.0))
    }

    #[test]
    fn single_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            check_identity(&[random_angle(&mut rng)], GroupKind::Single);
        }
        check_identity(&[Angle::quarter_turns(1)], GroupKind::Single);
    }

    #[test]
    fn pair_identity() {
        for (a, b) in [(1, 1), (1, 3), (5, 7), (3, 1), (7, 7)] {
            check_identity(&[Angle::quarter_turns(a), Angle::quarter_turns(b)], GroupKind::Pair);
        }
    }

    #[test]
    fn cat5_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let theta = random_angle(&mut rng);
            let angles: Vec<Angle> = (0..5)
                .map(|_| theta + Angle::quarter_turns(2 * rng.gen_range(0..4)))
                .collect();
            check_identity(&angles, GroupKind::Cat5);
        }
        check_identity(&[Angle::from_pi_units(0.125); 5], GroupKind::Cat5);
    }

    #[test]
    fn plans() {
        let (d, _) = rotations(&[Angle::quarter_turns(1)]);
        assert_eq!(plan_decomposition(&d).total_terms(), 2);
        let (d, _) = rotations(&[Angle::quarter_turns(1), Angle::quarter_turns(7)]);
        let p = plan_decomposition(&d);
        assert_eq!(p.groups, vec![GroupKind::Pair]);
        assert_eq!(p.total_terms(), 2);
        assert!((p.rate() - 0.5).abs() < 1e-12);
        let (d, _) = rotations(&[]);
        assert_eq!(plan_decomposition(&d).total_terms(), 1);
        let (d, _) = rotations(&[Angle::from_pi_units(0.1); 401]);
        let p = plan_decomposition(&d);
        assert!((p.rate() - 3f64.log2() / 4.0).abs() < 0.01, "{}", p.rate());
    }

    #[test]
    fn closed_diagram_expands_to_scalars() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for round in 0..10 {
            let n = 3 + round % 5;
            let mut d = ParamZXDiagram::new(2);
            let vs: Vec<usize> = (0..n)
                .map(|i| {
                    let angle = if round % 2 == 0 {
                        Angle::quarter_turns(2 * rng.gen_range(0..4) + 1)
                    } else {
                        Angle::from_pi_units(0.3) + Angle::quarter_turns(2 * rng.gen_range(0..4))
                    };
                    d.add_z(Phase::new(angle, Parity::single(i % 2)))
                })
                .collect();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.5) {
                        d.add_edge(vs[i], vs[j], EdgeKind::Hadamard);
                    }
                }
            }
            let dec = decompose_magic(&d).unwrap();
            assert!(dec.terms.len() as u64 <= dec.plan.total_terms());
            for m in 0..4usize {
                let a = [m & 1 == 1, m & 2 == 2];
                let want = to_tensor(&d, &a).unwrap().scalar().unwrap();
                let got: Complex64 = dec.terms.iter().map(|t| t.eval(&a)).sum();
                assert!((want - got).norm() < 1e-9, "round {round}: {want} vs {got}");
            }
        }
    }
}

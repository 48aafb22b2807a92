//! Batched shot sampling and exact outcome probabilities.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::{words_for, BitMatrix, BitVec};
use crate::compile::{CompiledComponent, CompiledSampler, ErrorModel};
use crate::lower::SampleMode;

/// Default number of shots per batch.
pub const DEFAULT_BATCH_SIZE: usize = 65_536;
/// Default expected flips per shot below which the sparse path is used.
pub const DEFAULT_SPARSE_THRESHOLD: f64 = 8.0;
/// Tolerance on conditional probabilities before they count as a numeric breakdown.
pub const RATIO_TOLERANCE: f64 = 1e-6;
/// Largest f-count for exact noise marginalization in [`probability_of`].
pub const MAX_ENUMERATED_NOISE_BITS: usize = 20;

const STREAM_ERRORS: u64 = 0;
const STREAM_OUTCOMES: u64 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("sampler was compiled for {compiled:?} sampling, not {requested:?}")]
    ModeMismatch {
        compiled: SampleMode,
        requested: SampleMode,
    },
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("conditional probability {value} left [0, 1] in shot {shot}")]
    NumericBreakdown { shot: usize, value: f64 },
    #[error("conditional probability had imaginary part {0}")]
    ComplexRatio(f64),
    #[error("outcome has {got} bits, sampler produces {expected}")]
    OutcomeWidth { got: usize, expected: usize },
    #[error("noise basis has {rank} bits, exact marginalization allows {max}; pass a fixed noise assignment")]
    EnumerationGuard { rank: usize, max: usize },
    #[error("noise assignment has {got} bits, circuit has {expected}")]
    NoiseWidth { got: usize, expected: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// How to draw error mechanisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorPath {
    /// Choose by flip density and model shape.
    Auto,
    Dense,
    Sparse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    pub batch_size: usize,
    /// Worker count; `None` uses the available parallelism.
    pub threads: Option<usize>,
    pub sparse_threshold: f64,
    pub path: ErrorPath,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH_SIZE,
            threads: None,
            sparse_threshold: DEFAULT_SPARSE_THRESHOLD,
            path: ErrorPath::Auto,
        }
    }
}

/// Shot-major output bits in compiled output order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRecord {
    pub mode: SampleMode,
    pub num_detectors: usize,
    pub num_observables: usize,
    /// One row per shot.
    pub bits: BitMatrix,
}

impl SampleRecord {
    #[must_use]
    pub fn num_shots(&self) -> usize {
        self.bits.rows()
    }

    #[must_use]
    pub fn bits_per_shot(&self) -> usize {
        self.bits.cols()
    }

    #[must_use]
    pub fn shot(&self, s: usize) -> Vec<bool> {
        self.bits.row_bools(s)
    }

    /// Splits detector-mode shots into (detector bits, observable bits).
    #[must_use]
    pub fn split_observables(&self) -> (BitMatrix, BitMatrix) {
        let n = self.num_shots();
        let mut det = BitMatrix::zeros(n, self.num_detectors);
        let mut obs = BitMatrix::zeros(n, self.bits_per_shot() - self.num_detectors);
        for s in 0..n {
            for c in 0..self.bits_per_shot() {
                if self.bits.get(s, c) {
                    if c < self.num_detectors {
                        det.set(s, c, true);
                    } else {
                        obs.set(s, c - self.num_detectors, true);
                    }
                }
            }
        }
        (det, obs)
    }
}

/// Noise draws and outputs of one batch, both bit-major (one row per bit, one column per shot).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotBatch {
    pub batch_size: usize,
    /// `rank × batch_size`.
    pub f_bits: BitMatrix,
    /// `outputs × batch_size`.
    pub out_bits: BitMatrix,
}

/// Generator for one (seed, stream, batch) triple.
#[must_use]
pub fn stream_rng(seed: u64, stream: u64, batch: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&batch.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[inline]
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn bernoulli_threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

fn xor_mask_into(f: &mut BitMatrix, sig: &BitVec, mask: &[u64]) {
    for row in sig.ones() {
        for (w, m) in f.row_mut(row).iter_mut().zip(mask) {
            *w ^= m;
        }
    }
}

fn dense_mask(rng: &mut ChaCha8Rng, p: f64, n: usize) -> Vec<u64> {
    let mut mask = vec![0u64; words_for(n)];
    match bernoulli_threshold(p) {
        None => {
            for s in 0..n {
                mask[s / 64] |= 1 << (s % 64);
            }
        }
        Some(t) => {
            for s in 0..n {
                if rng.next_u64() < t {
                    mask[s / 64] |= 1 << (s % 64);
                }
            }
        }
    }
    mask
}

fn sample_joint(model: &ErrorModel, rng: &mut ChaCha8Rng, n: usize, f: &mut BitMatrix) {
    for j in &model.joint {
        let mut cdf = Vec::with_capacity(j.table.len());
        let mut acc = 0.0;
        for &p in &j.table {
            acc += p;
            cdf.push(acc);
        }
        let mut masks = vec![vec![0u64; words_for(n)]; j.signatures.len()];
        for s in 0..n {
            let u = uniform(rng) * acc;
            let x = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            for (b, mask) in masks.iter_mut().enumerate() {
                if (x >> b) & 1 == 1 {
                    mask[s / 64] |= 1 << (s % 64);
                }
            }
        }
        for (sig, mask) in j.signatures.iter().zip(&masks) {
            xor_mask_into(f, sig, mask);
        }
    }
}

/// Dense path: one Bernoulli trial per (mechanism, shot); joint groups by inverse CDF.
#[must_use]
pub fn sample_error_batch(model: &ErrorModel, rng: &mut ChaCha8Rng, n: usize) -> BitMatrix {
    let mut f = BitMatrix::zeros(model.num_rows, n);
    for m in &model.mechanisms {
        let mask = dense_mask(rng, m.probability, n);
        xor_mask_into(&mut f, &m.signature, &mask);
    }
    sample_joint(model, rng, n, &mut f);
    f
}

/// Shots in `0..n` at which a Bernoulli(`p`) trial fires, by geometric gaps.
pub fn geometric_stream(p: f64, rng: &mut ChaCha8Rng, n: usize) -> impl Iterator<Item = usize> + '_ {
    let log_q = (-p).ln_1p();
    let mut next: Option<usize> = None;
    let mut done = p <= 0.0 || n == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let start = next.map_or(0, |s| s + 1);
        let gap = if p >= 1.0 {
            0.0
        } else {
            ((1.0 - uniform(rng)).ln() / log_q).floor()
        };
        if gap >= (n - start.min(n)) as f64 {
            done = true;
            return None;
        }
        let s = start + gap as usize;
        next = Some(s);
        Some(s)
    })
}

/// Sparse path: only fired events are visited. Joint groups fall back to inverse CDF.
#[must_use]
pub fn sample_error_batch_sparse(model: &ErrorModel, rng: &mut ChaCha8Rng, n: usize) -> BitMatrix {
    let mut f = BitMatrix::zeros(model.num_rows, n);
    for m in &model.mechanisms {
        if m.probability >= 1.0 {
            let mask = dense_mask(rng, 1.0, n);
            xor_mask_into(&mut f, &m.signature, &mask);
            continue;
        }
        let rows: Vec<usize> = m.signature.ones().collect();
        for s in geometric_stream(m.probability, rng, n) {
            for &r in &rows {
                f.toggle(r, s);
            }
        }
    }
    sample_joint(model, rng, n, &mut f);
    f
}

fn use_sparse(cs: &CompiledSampler, opts: &SampleOptions) -> bool {
    match opts.path {
        ErrorPath::Dense => false,
        ErrorPath::Sparse => cs.model.joint.is_empty(),
        ErrorPath::Auto => {
            cs.is_deterministic() && cs.model.joint.is_empty() && cs.stats.mean_flips < opts.sparse_threshold
        }
    }
}

/// Conditional probability of a 0 given the running marginal, checked and clamped.
fn zero_ratio(p0: Complex64, prev: Complex64, shot: usize) -> Result<f64, SampleError> {
    if prev.norm() == 0.0 {
        return Err(SampleError::NumericBreakdown { shot, value: f64::NAN });
    }
    let r = p0 / prev;
    if r.im.abs() > RATIO_TOLERANCE {
        return Err(SampleError::ComplexRatio(r.im));
    }
    if !(-RATIO_TOLERANCE..=1.0 + RATIO_TOLERANCE).contains(&r.re) {
        return Err(SampleError::NumericBreakdown { shot, value: r.re });
    }
    Ok(r.re.clamp(0.0, 1.0))
}

fn sample_component(
    comp: &CompiledComponent,
    f: &BitMatrix,
    out: &mut BitMatrix,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Result<(), SampleError> {
    let chain = &comp.chain;
    let mut params = BitMatrix::zeros(n, chain.num_params());
    for (local, &fi) in comp.f_indices.iter().enumerate() {
        for s in 0..n {
            if f.get(fi, s) {
                params.set(s, local, true);
            }
        }
    }
    let mut prev: Vec<Complex64> = (0..n).map(|s| chain.entries[0].eval_words(params.row(s))).collect();
    for (j, &output) in comp.outputs.iter().enumerate() {
        let entry = &chain.entries[j + 1];
        for (s, prev_s) in prev.iter_mut().enumerate() {
            let p0 = entry.eval_words(params.row(s));
            let r = zero_ratio(p0, *prev_s, s)?;
            let bit = uniform(rng) >= r;
            if bit {
                params.set(s, chain.num_local + j, true);
                out.set(output, s, true);
                *prev_s -= p0;
            } else {
                *prev_s = p0;
            }
        }
    }
    Ok(())
}

/// Draws one batch: noise, direct readouts, then sequential components.
///
/// # Errors
/// On a numeric breakdown in a conditional probability.
pub fn run_batch(
    cs: &CompiledSampler,
    seed: u64,
    batch: u64,
    n: usize,
    sparse: bool,
) -> Result<ShotBatch, SampleError> {
    let mut rng = stream_rng(seed, STREAM_ERRORS, batch);
    let f = if sparse {
        sample_error_batch_sparse(&cs.model, &mut rng, n)
    } else {
        sample_error_batch(&cs.model, &mut rng, n)
    };
    let mut out = BitMatrix::zeros(cs.num_outputs(), n);
    for d in &cs.direct {
        let row = out.row_mut(d.output);
        for &i in &d.combo {
            for (w, x) in row.iter_mut().zip(f.row(i)) {
                *w ^= x;
            }
        }
        if d.flip {
            for (k, w) in row.iter_mut().enumerate() {
                let live = (n - 64 * k).min(64);
                *w ^= if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
            }
        }
    }
    let mut outcome_rng = stream_rng(seed, STREAM_OUTCOMES, batch);
    for comp in &cs.components {
        sample_component(comp, &f, &mut out, &mut outcome_rng, n)?;
    }
    Ok(ShotBatch {
        batch_size: n,
        f_bits: f,
        out_bits: out,
    })
}

fn transpose(m: &BitMatrix) -> BitMatrix {
    let mut t = BitMatrix::zeros(m.cols(), m.rows());
    for r in 0..m.rows() {
        for (k, &w) in m.row(r).iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                t.set(64 * k + b, r, true);
                bits &= bits - 1;
            }
        }
    }
    t
}

fn sample(cs: &CompiledSampler, shots: usize, seed: u64, opts: &SampleOptions) -> Result<SampleRecord, SampleError> {
    if opts.batch_size == 0 {
        return Err(SampleError::EmptyBatch);
    }
    let sparse = use_sparse(cs, opts);
    let batches = shots.div_ceil(opts.batch_size);
    let job = || {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let n = (shots - b * opts.batch_size).min(opts.batch_size);
                run_batch(cs, seed, b as u64, n, sparse).map(|sb| transpose(&sb.out_bits))
            })
            .collect::<Result<Vec<BitMatrix>, SampleError>>()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| SampleError::ThreadPool(e.to_string()))?;
    let parts = pool.install(job)?;
    Ok(SampleRecord {
        mode: cs.mode,
        num_detectors: cs.num_detectors,
        num_observables: cs.num_observables,
        bits: BitMatrix::concat_rows(parts, cs.num_outputs()),
    })
}

fn check_mode(cs: &CompiledSampler, requested: SampleMode) -> Result<(), SampleError> {
    if cs.mode == requested {
        Ok(())
    } else {
        Err(SampleError::ModeMismatch {
            compiled: cs.mode,
            requested,
        })
    }
}

/// Detector and observable bits per shot, detectors first.
///
/// # Errors
/// Mode mismatch, zero batch size, or a numeric breakdown.
pub fn sample_detectors(
    cs: &CompiledSampler,
    shots: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<SampleRecord, SampleError> {
    check_mode(cs, SampleMode::Detectors)?;
    sample(cs, shots, seed, opts)
}

/// Measurement bits per shot in record order.
///
/// # Errors
/// Mode mismatch, zero batch size, or a numeric breakdown.
pub fn sample_measurements(
    cs: &CompiledSampler,
    shots: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<SampleRecord, SampleError> {
    check_mode(cs, SampleMode::Measurements)?;
    sample(cs, shots, seed, opts)
}

/// Probability of a full outcome for fixed f-bits.
fn outcome_given_f(cs: &CompiledSampler, outcome: &[bool], f: &[bool]) -> Result<f64, SampleError> {
    for d in &cs.direct {
        let bit = d.flip ^ (d.combo.iter().filter(|&&i| f[i]).count() % 2 == 1);
        if bit != outcome[d.output] {
            return Ok(0.0);
        }
    }
    let mut p = 1.0;
    for comp in &cs.components {
        let noise: Vec<bool> = comp.f_indices.iter().map(|&i| f[i]).collect();
        let bits: Vec<bool> = comp.outputs.iter().map(|&o| outcome[o]).collect();
        let r = comp.chain.outcome_ratio(&noise, &bits);
        if r.im.abs() > RATIO_TOLERANCE {
            return Err(SampleError::ComplexRatio(r.im));
        }
        p *= r.re;
    }
    Ok(p)
}

/// Exact probability of `outcome`.
///
/// With `noise = None` the noise is marginalized exactly by enumerating the
/// f-basis, which needs at most [`MAX_ENUMERATED_NOISE_BITS`] bits. With
/// `noise = Some(e)` the probability is conditioned on that e-assignment.
///
/// # Errors
/// Width mismatches, the enumeration guard, or a complex ratio.
pub fn probability_of(cs: &CompiledSampler, outcome: &[bool], noise: Option<&[bool]>) -> Result<f64, SampleError> {
    if outcome.len() != cs.num_outputs() {
        return Err(SampleError::OutcomeWidth {
            got: outcome.len(),
            expected: cs.num_outputs(),
        });
    }
    if let Some(e) = noise {
        if e.len() != cs.basis.num_e() {
            return Err(SampleError::NoiseWidth {
                got: e.len(),
                expected: cs.basis.num_e(),
            });
        }
        return outcome_given_f(cs, outcome, &cs.basis.apply(e));
    }
    let rank = cs.basis.rank();
    if rank > MAX_ENUMERATED_NOISE_BITS {
        return Err(SampleError::EnumerationGuard {
            rank,
            max: MAX_ENUMERATED_NOISE_BITS,
        });
    }
    let dist = cs.model.row_distribution();
    let mut total = 0.0;
    for (x, &w) in dist.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let f: Vec<bool> = (0..rank).map(|i| (x >> i) & 1 == 1).collect();
        total += w * outcome_given_f(cs, outcome, &f)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{ErrorMechanism, JointMechanism};

    fn model(p: f64) -> ErrorModel {
        ErrorModel {
            num_rows: 1,
            mechanisms: vec![ErrorMechanism {
                signature: BitVec::from_indices(1, [0]),
                probability: p,
                source_params: vec![0],
            }],
            joint: vec![],
        }
    }

    fn count(f: &BitMatrix) -> usize {
        f.row(0).iter().map(|w| w.count_ones() as usize).sum()
    }

    #[test]
    fn degenerate_probabilities() {
        let mut rng = stream_rng(1, 0, 0);
        assert_eq!(count(&sample_error_batch(&model(1.0), &mut rng, 1000)), 1000);
        assert_eq!(count(&sample_error_batch(&model(0.0), &mut rng, 1000)), 0);
        assert_eq!(count(&sample_error_batch_sparse(&model(1.0), &mut rng, 1000)), 1000);
        assert_eq!(count(&sample_error_batch_sparse(&model(0.0), &mut rng, 1000)), 0);
    }

    #[test]
    fn geometric_stream_rate() {
        let n = 1_000_000;
        let mut rng = stream_rng(7, 0, 0);
        let events: Vec<usize> = geometric_stream(0.5, &mut rng, n).collect();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((events.len() as f64 - 0.5 * n as f64).abs() < 5.0 * sigma);
        assert!(events.windows(2).all(|w| w[0] < w[1]));
        assert!(events.iter().all(|&s| s < n));
    }

    #[test]
    fn dense_rate() {
        let n = 1_000_000;
        let mut rng = stream_rng(3, 0, 0);
        let c = count(&sample_error_batch(&model(0.26), &mut rng, n)) as f64;
        let sigma = (n as f64 * 0.26 * 0.74).sqrt();
        assert!((c - 0.26 * n as f64).abs() < 5.0 * sigma);
    }

    #[test]
    fn joint_group_frequencies() {
        let table = vec![0.5, 0.2, 0.2, 0.1];
        let m = ErrorModel {
            num_rows: 2,
            mechanisms: vec![],
            joint: vec![JointMechanism {
                signatures: vec![BitVec::from_indices(2, [0]), BitVec::from_indices(2, [1])],
                table: table.clone(),
                source_params: vec![0, 1],
            }],
        };
        let n = 200_000;
        let f = sample_error_batch(&m, &mut stream_rng(5, 0, 0), n);
        let mut hist = [0usize; 4];
        for s in 0..n {
            hist[usize::from(f.get(0, s)) | (usize::from(f.get(1, s)) << 1)] += 1;
        }
        for (h, p) in hist.iter().zip(&table) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*h as f64 - p * n as f64).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn transpose_round_trip() {
        let mut m = BitMatrix::zeros(3, 130);
        for (r, c) in [(0, 0), (1, 64), (2, 129), (0, 77)] {
            m.set(r, c, true);
        }
        assert_eq!(transpose(&transpose(&m)), m);
    }
}

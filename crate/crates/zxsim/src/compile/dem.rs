//! Detector-error-model text export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::CompiledSampler;
use crate::lower::OutputLabel;

/// Shortest decimal that survives a round trip through 14 significant digits.
fn format_probability(p: f64) -> String {
    let rounded: f64 = format!("{p:.14e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Sort key putting detectors before observables.
fn target_key(label: OutputLabel) -> (u8, usize) {
    match label {
        OutputLabel::Detector(i) => (0, i),
        OutputLabel::Observable(i) => (1, i),
        OutputLabel::Measurement(i) => (2, i),
    }
}

fn target_name(label: OutputLabel) -> String {
    match label {
        OutputLabel::Detector(i) => format!("D{i}"),
        OutputLabel::Observable(i) => format!("L{i}"),
        OutputLabel::Measurement(i) => format!("M{i}"),
    }
}

fn targets(cs: &CompiledSampler, outputs: &[usize]) -> Vec<(u8, usize)> {
    let mut keys: Vec<(u8, usize)> = outputs.iter().map(|&o| target_key(cs.labels[o])).collect();
    keys.sort_unstable();
    keys
}

fn key_name(key: (u8, usize)) -> String {
    target_name(match key.0 {
        0 => OutputLabel::Detector(key.1),
        1 => OutputLabel::Observable(key.1),
        _ => OutputLabel::Measurement(key.1),
    })
}

fn error_line(out: &mut String, p: f64, keys: &[(u8, usize)]) {
    let names: Vec<String> = keys.iter().map(|&k| key_name(k)).collect();
    writeln!(out, "error({}) {}", format_probability(p), names.join(" ")).expect("string write");
}

/// Renders the error model in detector-error-model syntax.
///
/// Single mechanisms with equal output signatures are XOR-merged and listed
/// in signature order. Correlated groups follow, each under a comment line;
/// the lines of one group are mutually exclusive events. Mechanisms that only
/// act on sequentially sampled outputs are omitted.
#[must_use]
pub fn export_dem(cs: &CompiledSampler) -> String {
    let mut singles: BTreeMap<Vec<(u8, usize)>, f64> = BTreeMap::new();
    for m in &cs.model.mechanisms {
        let keys = targets(cs, &cs.output_signature(&m.signature));
        if keys.is_empty() {
            continue;
        }
        let p = singles.entry(keys).or_insert(0.0);
        *p = *p * (1.0 - m.probability) + m.probability * (1.0 - *p);
    }
    let mut out = String::new();
    for (keys, p) in &singles {
        if *p > 0.0 {
            error_line(&mut out, *p, keys);
        }
    }
    for (g, j) in cs.model.joint.iter().enumerate() {
        let mut events: BTreeMap<Vec<(u8, usize)>, f64> = BTreeMap::new();
        for (x, &p) in j.table.iter().enumerate().skip(1) {
            if p == 0.0 {
                continue;
            }
            let mut sig = crate::bits::BitVec::zeros(cs.model.num_rows);
            for (b, s) in j.signatures.iter().enumerate() {
                if (x >> b) & 1 == 1 {
                    sig.xor_assign(s);
                }
            }
            let keys = targets(cs, &cs.output_signature(&sig));
            if !keys.is_empty() {
                *events.entry(keys).or_insert(0.0) += p;
            }
        }
        if events.is_empty() {
            continue;
        }
        writeln!(out, "# correlated group {g}: at most one of the following fires").expect("string write");
        for (keys, p) in &events {
            error_line(&mut out, *p, keys);
        }
    }
    for (i, c) in cs.detector_coords.iter().enumerate() {
        if !c.is_empty() {
            let coords: Vec<String> = c.iter().map(ToString::to_string).collect();
            writeln!(out, "detector({}) D{i}", coords.join(", ")).expect("string write");
        }
    }
    out
}

//! Versioned text persistence of trained output layers.
//!
//! ```text
//! sgf-model 1
//! similarity nor
//! spikes_per_frame 1000
//! unit A
//! slots A1 A2 ...
//! output 1 2 8 9 10
//! growth 1 2 2 3
//! neuron 0101... 3 0.75
//! end
//! ```
//!
//! Detector definitions are not stored; they come from the run
//! configuration and the stored slot list must match them.

use std::fmt::Write as _;

use super::{FeatureVector, GlobalFeatureNeuron, SgfModel, UnitId};
use crate::error::{Result, SgfError};

pub const MODEL_MAGIC: &str = "sgf-model";
pub const MODEL_VERSION: u32 = 1;

pub fn write_model(model: &SgfModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}");
    let _ = writeln!(out, "similarity {}", model.similarity);
    let _ = writeln!(out, "spikes_per_frame {}", model.spikes_per_frame);
    for unit in &model.units {
        let _ = writeln!(out, "unit {}", unit.id);
        let _ = writeln!(out, "slots {}", unit.slot_ids().join(" "));
        for o in unit.outputs() {
            let classes: Vec<String> = o.classes().iter().map(u8::to_string).collect();
            let _ = writeln!(out, "output {}", classes.join(" "));
            let growth: Vec<String> = o.growth().iter().map(usize::to_string).collect();
            let _ = writeln!(out, "growth {}", growth.join(" "));
            for (i, n) in o.neurons().iter().enumerate() {
                let w = o.weights().get(i).copied().unwrap_or(f64::NAN);
                let _ = writeln!(out, "neuron {} {} {:?}", n.vector, n.histogram, w);
            }
        }
        out.push_str("end\n");
    }
    out
}

type PendingOutput = (usize, Vec<GlobalFeatureNeuron>, Vec<f64>, Vec<usize>);

/// Loads trained state into `template`, whose detector banks must produce
/// the slot lists recorded in the file.
pub fn read_model(text: &str, mut template: SgfModel) -> Result<SgfModel> {
    let err = |line: usize, message: String| SgfError::Model { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));

    let (n, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty model file".into()))?;
    let mut head = header.split_whitespace();
    if head.next() != Some(MODEL_MAGIC) {
        return Err(err(n, format!("missing `{MODEL_MAGIC}` header")));
    }
    match head.next().map(str::parse::<u32>) {
        Some(Ok(MODEL_VERSION)) => {}
        other => return Err(err(n, format!("unsupported model version {other:?}"))),
    }

    let mut unit: Option<UnitId> = None;
    let mut output: Option<usize> = None;
    let mut pending: Vec<PendingOutput> = Vec::new();
    let mut seen = Vec::new();

    let flush =
        |template: &mut SgfModel, unit: Option<UnitId>, pending: &mut Vec<PendingOutput>| {
            if let Some(u) = unit {
                for (idx, neurons, weights, growth) in pending.drain(..) {
                    template.unit_mut(u).outputs_mut()[idx].restore(neurons, weights, growth);
                }
            }
        };

    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "similarity" => {
                template.similarity = rest.parse().map_err(|e| err(n, format!("{e}")))?
            }
            "spikes_per_frame" => {
                template.spikes_per_frame = rest
                    .parse()
                    .map_err(|_| err(n, format!("bad spikes_per_frame {rest:?}")))?
            }
            "unit" => {
                let id: UnitId = rest.parse().map_err(|e| err(n, format!("{e}")))?;
                if seen.contains(&id) {
                    return Err(err(n, format!("unit {id} listed twice")));
                }
                seen.push(id);
                unit = Some(id);
                output = None;
            }
            "slots" => {
                let u = unit.ok_or_else(|| err(n, "slots outside a unit".into()))?;
                let expected = template.unit(u).slot_ids();
                let got: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if got != expected {
                    return Err(err(
                        n,
                        format!(
                            "unit {u} slots do not match the configured detectors ({} stored, {} configured)",
                            got.len(),
                            expected.len()
                        ),
                    ));
                }
            }
            "output" => {
                let u = unit.ok_or_else(|| err(n, "output outside a unit".into()))?;
                let classes = rest
                    .split_whitespace()
                    .map(|c| {
                        c.parse::<u8>()
                            .map_err(|_| err(n, format!("bad class {c:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let idx = template
                    .unit(u)
                    .outputs()
                    .iter()
                    .position(|o| o.classes() == classes.as_slice())
                    .ok_or_else(|| err(n, format!("unit {u} has no output for {classes:?}")))?;
                pending.push((idx, Vec::new(), Vec::new(), Vec::new()));
                output = Some(pending.len() - 1);
            }
            "growth" => {
                let o = output.ok_or_else(|| err(n, "growth outside an output".into()))?;
                pending[o].3 = rest
                    .split_whitespace()
                    .map(|g| {
                        g.parse()
                            .map_err(|_| err(n, format!("bad growth entry {g:?}")))
                    })
                    .collect::<Result<_>>()?;
            }
            "neuron" => {
                let o = output.ok_or_else(|| err(n, "neuron outside an output".into()))?;
                let u = unit.unwrap();
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [bits, hist, weight] = parts[..] else {
                    return Err(err(n, "neuron needs <bits> <histogram> <weight>".into()));
                };
                let vector: FeatureVector = bits.parse().map_err(|e| err(n, format!("{e}")))?;
                let histogram: u64 = hist
                    .parse()
                    .ok()
                    .filter(|&h| h > 0)
                    .ok_or_else(|| err(n, format!("bad histogram {hist:?}")))?;
                let weight: f64 = weight
                    .parse()
                    .map_err(|_| err(n, format!("bad weight {weight:?}")))?;
                let expected = template.unit(u).vector_len();
                if vector.len() != expected {
                    return Err(err(
                        n,
                        format!("vector length {} != {expected}", vector.len()),
                    ));
                }
                pending[o].1.push(GlobalFeatureNeuron { vector, histogram });
                pending[o].2.push(weight);
            }
            "end" => {
                flush(&mut template, unit, &mut pending);
                unit = None;
                output = None;
            }
            _ => return Err(err(n, format!("unknown directive {key:?}"))),
        }
    }
    if unit.is_some() {
        return Err(err(text.lines().count(), "missing `end`".into()));
    }
    for u in &template.units {
        for o in u.outputs() {
            if o.weights().iter().any(|w| !w.is_finite()) {
                return Err(err(0, format!("unit {} has unfinalized weights", u.id)));
            }
        }
    }
    Ok(template)
}

impl std::str::FromStr for UnitId {
    type Err = SgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(UnitId::A),
            "B" | "b" => Ok(UnitId::B),
            "C" | "c" => Ok(UnitId::C),
            _ => Err(SgfError::InvalidParams(format!("unknown unit {s:?}"))),
        }
    }
}

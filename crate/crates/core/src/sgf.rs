//! SGF units: feature-vector extraction, single-pass histogram training,
//! weighted bitwise scoring and hierarchical routing.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SgfError};
use crate::events::{Frame, Geometry};
use crate::grid::BinaryGrid;
use crate::snn_spatial::{accumulate, SpatialBank};
use crate::snn_temporal::{FeatureAnalysis, TemporalBank};
use crate::stcore::{st_filter, StCoreParams};

pub mod model_file;

/// The ten gesture classes.
pub const GESTURE_CLASSES: [(u8, &str); 10] = [
    (1, "hand clap"),
    (2, "left hand wave"),
    (3, "right hand wave"),
    (4, "right arm clockwise"),
    (5, "right arm counter clockwise"),
    (6, "left arm clockwise"),
    (7, "left arm counter clockwise"),
    (8, "arm roll"),
    (9, "air drum"),
    (10, "air guitar"),
];

pub fn class_name(id: u8) -> Option<&'static str> {
    GESTURE_CLASSES
        .iter()
        .find(|(c, _)| *c == id)
        .map(|(_, n)| *n)
}

/// Bitwise similarity used by the scorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Similarity {
    /// Positions where both vectors are 0.
    #[default]
    Nor,
    /// Positions where both vectors agree.
    Xnor,
}

impl Similarity {
    pub fn name(self) -> &'static str {
        match self {
            Similarity::Nor => "nor",
            Similarity::Xnor => "xnor",
        }
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Similarity {
    type Err = SgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nor" => Ok(Similarity::Nor),
            "xnor" => Ok(Similarity::Xnor),
            _ => Err(SgfError::InvalidParams(format!(
                "similarity must be nor or xnor, found {s:?}"
            ))),
        }
    }
}

/// Fixed-length bit string over a unit's feature slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureVector {
    len: usize,
    words: Vec<u64>,
}

impl FeatureVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// Number of positions where `op` holds, under the given similarity.
    pub fn similarity(&self, other: &FeatureVector, op: Similarity) -> Result<u32> {
        if self.len != other.len {
            return Err(SgfError::LengthMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        let differing_or_set: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| match op {
                Similarity::Nor => (a | b).count_ones(),
                Similarity::Xnor => (a ^ b).count_ones(),
            })
            .sum();
        Ok(self.len as u32 - differing_or_set)
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for FeatureVector {
    type Err = SgfError;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(SgfError::InvalidParams(format!(
                    "bad bit {c:?} in feature vector"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

/// A stored prototype vector with its occurrence count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalFeatureNeuron {
    pub vector: FeatureVector,
    pub histogram: u64,
}

/// One output neuron: a target (one class, or a group of classes for a
/// routing unit) with its global feature neurons and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputNeuron {
    classes: Vec<u8>,
    neurons: Vec<GlobalFeatureNeuron>,
    weights: Vec<f64>,
    index: HashMap<FeatureVector, usize>,
    /// Distinct-vector count after each training sample.
    growth: Vec<usize>,
}

impl OutputNeuron {
    pub fn new(mut classes: Vec<u8>) -> Self {
        classes.sort_unstable();
        classes.dedup();
        Self {
            classes,
            neurons: Vec::new(),
            weights: Vec::new(),
            index: HashMap::new(),
            growth: Vec::new(),
        }
    }

    /// Smallest class of the target; used as its label and for tie-breaking.
    pub fn label(&self) -> u8 {
        self.classes[0]
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn neurons(&self) -> &[GlobalFeatureNeuron] {
        &self.neurons
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn growth(&self) -> &[usize] {
        &self.growth
    }

    pub fn is_trained(&self) -> bool {
        !self.neurons.is_empty()
    }

    /// Counts one occurrence of `vector`, creating its neuron if unseen.
    pub fn observe(&mut self, vector: FeatureVector) {
        match self.index.get(&vector) {
            Some(&i) => self.neurons[i].histogram += 1,
            None => {
                self.index.insert(vector.clone(), self.neurons.len());
                self.neurons.push(GlobalFeatureNeuron {
                    vector,
                    histogram: 1,
                });
            }
        }
        self.growth.push(self.neurons.len());
    }

    pub(crate) fn restore(
        &mut self,
        neurons: Vec<GlobalFeatureNeuron>,
        weights: Vec<f64>,
        growth: Vec<usize>,
    ) {
        self.index = neurons
            .iter()
            .enumerate()
            .map(|(i, n)| (n.vector.clone(), i))
            .collect();
        self.neurons = neurons;
        self.weights = weights;
        self.growth = growth;
    }

    /// Weight of a stored vector, if present.
    pub fn weight_of(&self, vector: &FeatureVector) -> Option<f64> {
        self.index
            .get(vector)
            .and_then(|&i| self.weights.get(i).copied())
    }
}

/// Normalizes histograms into weights: `w_j = h_j / sum_k h_k`.
pub fn finalize_weights(output: &mut OutputNeuron) {
    let total: u64 = output.neurons.iter().map(|n| n.histogram).sum();
    output.weights = output
        .neurons
        .iter()
        .map(|n| n.histogram as f64 / total as f64)
        .collect();
}

/// Weighted similarity score of `v` against one output neuron:
/// `sum_j sim(T_j, v) / L * w_j`.
pub fn score(v: &FeatureVector, output: &OutputNeuron, op: Similarity) -> Result<f64> {
    if output.weights.len() != output.neurons.len() {
        return Err(SgfError::InvalidParams(
            "output neuron weights are not finalized".into(),
        ));
    }
    let l = v.len() as f64;
    output
        .neurons
        .iter()
        .zip(&output.weights)
        .map(|(n, &w)| Ok(n.vector.similarity(v, op)? as f64 / l * w))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitId {
    A,
    B,
    C,
}

impl UnitId {
    pub const ALL: [UnitId; 3] = [UnitId::A, UnitId::B, UnitId::C];

    pub fn letter(self) -> char {
        match self {
            UnitId::A => 'A',
            UnitId::B => 'B',
            UnitId::C => 'C',
        }
    }

    /// Output targets of each unit, ordered by smallest member class.
    pub fn targets(self) -> Vec<Vec<u8>> {
        match self {
            UnitId::A => vec![vec![1, 2, 8, 9, 10], vec![3], vec![4, 5], vec![6, 7]],
            UnitId::B => vec![vec![4], vec![5], vec![6], vec![7]],
            UnitId::C => vec![vec![1], vec![2], vec![8], vec![9], vec![10]],
        }
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Per-unit trace of one extraction.
#[derive(Debug, Clone)]
pub struct UnitAnalysis {
    pub unit: UnitId,
    pub vector: FeatureVector,
    pub temporal: Vec<FeatureAnalysis>,
}

/// Feature extraction plus the unit's trained output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SgfUnit {
    pub id: UnitId,
    pub st: StCoreParams,
    pub spatial: SpatialBank,
    pub temporal: TemporalBank,
    outputs: Vec<OutputNeuron>,
}

impl SgfUnit {
    pub fn new(id: UnitId, st: StCoreParams, spatial: SpatialBank, temporal: TemporalBank) -> Self {
        Self::with_targets(id, st, spatial, temporal, id.targets())
    }

    pub fn with_targets(
        id: UnitId,
        st: StCoreParams,
        spatial: SpatialBank,
        temporal: TemporalBank,
        targets: Vec<Vec<u8>>,
    ) -> Self {
        let mut outputs: Vec<OutputNeuron> = targets.into_iter().map(OutputNeuron::new).collect();
        outputs.sort_by_key(|o| o.label());
        Self {
            id,
            st,
            spatial,
            temporal,
            outputs,
        }
    }

    /// Slot count `L_v`.
    pub fn vector_len(&self) -> usize {
        self.spatial.len() + self.temporal.len()
    }

    /// Canonical slot order: spatial detectors, then temporal detectors.
    pub fn slot_ids(&self) -> Vec<String> {
        self.spatial
            .feature_ids()
            .chain(self.temporal.feature_ids())
            .map(str::to_string)
            .collect()
    }

    pub fn outputs(&self) -> &[OutputNeuron] {
        &self.outputs
    }

    pub(crate) fn outputs_mut(&mut self) -> &mut [OutputNeuron] {
        &mut self.outputs
    }

    pub fn handles(&self, class: u8) -> bool {
        self.outputs.iter().any(|o| o.classes.contains(&class))
    }

    pub fn classes(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self
            .outputs
            .iter()
            .flat_map(|o| o.classes.clone())
            .collect();
        c.sort_unstable();
        c
    }

    pub fn validate(&self, geometry: Geometry) -> Result<()> {
        self.st.validate()?;
        self.spatial.validate(geometry)?;
        self.temporal.validate(geometry)
    }

    /// Runs this unit's ST core over raw frames.
    pub fn preprocess(&self, frames: &[Frame]) -> Result<Vec<BinaryGrid>> {
        st_filter(frames, &self.st)
    }

    /// Feature vector from already ST-filtered frames.
    pub fn vector_from_st(&self, st_outputs: &[BinaryGrid]) -> Result<FeatureVector> {
        self.analyze_st(st_outputs).map(|a| a.vector)
    }

    pub fn analyze_st(&self, st_outputs: &[BinaryGrid]) -> Result<UnitAnalysis> {
        if st_outputs.is_empty() {
            return Err(SgfError::NoFrames);
        }
        let mut bits = Vec::with_capacity(self.vector_len());
        if !self.spatial.is_empty() {
            let counts = accumulate(st_outputs)?;
            check_regions(&self.spatial, counts.dims())?;
            bits.extend(self.spatial.evaluate(&counts));
        }
        let temporal = if self.temporal.is_empty() {
            Vec::new()
        } else {
            check_temporal_regions(&self.temporal, st_outputs[0].dims())?;
            self.temporal.analyze(st_outputs)
        };
        bits.extend(temporal.iter().map(|a| a.fired));
        Ok(UnitAnalysis {
            unit: self.id,
            vector: FeatureVector::from_bits(&bits),
            temporal,
        })
    }

    /// Feature vector of a sample: bit `k` is set iff slot `k`'s SNN fired.
    pub fn extract_feature_vector(&self, frames: &[Frame]) -> Result<FeatureVector> {
        self.vector_from_st(&self.preprocess(frames)?)
    }

    fn output_for(&self, class: u8) -> Result<usize> {
        self.outputs
            .iter()
            .position(|o| o.classes.contains(&class))
            .ok_or(SgfError::ClassNotInUnit {
                class,
                unit: self.id.letter(),
            })
    }

    /// One histogram update; no iteration over past samples.
    pub fn train_sample(&mut self, vector: FeatureVector, class: u8) -> Result<()> {
        if vector.len() != self.vector_len() {
            return Err(SgfError::LengthMismatch {
                expected: self.vector_len(),
                got: vector.len(),
            });
        }
        let i = self.output_for(class)?;
        self.outputs[i].observe(vector);
        Ok(())
    }

    pub fn finalize(&mut self) {
        self.outputs.iter_mut().for_each(finalize_weights);
    }

    pub fn is_trained(&self) -> bool {
        self.outputs.iter().any(OutputNeuron::is_trained)
    }

    /// Scores of every trained output as `(label, score)`.
    pub fn scores(&self, v: &FeatureVector, op: Similarity) -> Result<Vec<(u8, f64)>> {
        if v.len() != self.vector_len() {
            return Err(SgfError::LengthMismatch {
                expected: self.vector_len(),
                got: v.len(),
            });
        }
        self.outputs
            .iter()
            .filter(|o| o.is_trained())
            .map(|o| Ok((o.label(), score(v, o, op)?)))
            .collect()
    }

    /// Argmax over trained outputs whose classes intersect `allowed`
    /// (all outputs when `None`); ties go to the lowest label.
    pub fn classify_among(
        &self,
        v: &FeatureVector,
        op: Similarity,
        allowed: Option<&[u8]>,
    ) -> Result<&OutputNeuron> {
        let mut best: Option<(&OutputNeuron, f64)> = None;
        for o in &self.outputs {
            if !o.is_trained() {
                continue;
            }
            if let Some(allowed) = allowed {
                if !o.classes.iter().any(|c| allowed.contains(c)) {
                    continue;
                }
            }
            let s = score(v, o, op)?;
            // Outputs are sorted by label, so strict > keeps the lowest on ties.
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((o, s));
            }
        }
        best.map(|(o, _)| o).ok_or(SgfError::UntrainedRoute {
            unit: self.id.letter(),
        })
    }

    /// Label of the best-scoring output.
    pub fn classify(&self, v: &FeatureVector, op: Similarity) -> Result<u8> {
        self.classify_among(v, op, None).map(OutputNeuron::label)
    }
}

fn check_regions(bank: &SpatialBank, dims: (usize, usize)) -> Result<()> {
    let g = Geometry::new(dims.0, dims.1);
    match bank.snns.iter().find(|s| !s.region.fits(g)) {
        Some(s) => Err(SgfError::GeometryMismatch {
            expected: (s.region.x + s.region.width, s.region.y + s.region.height),
            got: dims,
        }),
        None => Ok(()),
    }
}

fn check_temporal_regions(bank: &TemporalBank, dims: (usize, usize)) -> Result<()> {
    let g = Geometry::new(dims.0, dims.1);
    for s in &bank.snns {
        if let Some(r) = s.tracker.region {
            if !r.fits(g) {
                return Err(SgfError::GeometryMismatch {
                    expected: (r.x + r.width, r.y + r.height),
                    got: dims,
                });
            }
        }
    }
    Ok(())
}

/// Feature vectors of one sample for every unit that sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleVectors {
    pub a: FeatureVector,
    pub b: Option<FeatureVector>,
    pub c: Option<FeatureVector>,
}

/// Outcome of hierarchical routing.
#[derive(Debug, Clone, PartialEq)]
pub struct Routing {
    pub class: u8,
    /// Units visited, in order.
    pub path: Vec<UnitId>,
    /// `(label, score)` of every trained output of each visited unit.
    pub scores: Vec<(UnitId, Vec<(u8, f64)>)>,
}

/// The three-unit hierarchy plus its scoring configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SgfModel {
    pub units: [SgfUnit; 3],
    pub similarity: Similarity,
    pub spikes_per_frame: usize,
}

/// One row of the knowledge report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnowledgeRow {
    /// 1-based index of the training sample within its class.
    pub trial: usize,
    pub class: u8,
    pub distinct_vectors: usize,
}

impl SgfModel {
    pub fn new(units: [SgfUnit; 3], similarity: Similarity, spikes_per_frame: usize) -> Self {
        Self {
            units,
            similarity,
            spikes_per_frame,
        }
    }

    pub fn unit(&self, id: UnitId) -> &SgfUnit {
        &self.units[id as usize]
    }

    pub fn unit_mut(&mut self, id: UnitId) -> &mut SgfUnit {
        &mut self.units[id as usize]
    }

    /// Unit that makes the final decision for `class`.
    pub fn leaf_unit(&self, class: u8) -> UnitId {
        [UnitId::B, UnitId::C]
            .into_iter()
            .find(|&u| self.unit(u).handles(class))
            .unwrap_or(UnitId::A)
    }

    /// Extracts vectors for the units a sample of `class` passes through
    /// during training (every unit when `class` is `None`).
    pub fn sample_vectors(&self, frames: &[Frame], class: Option<u8>) -> Result<SampleVectors> {
        if frames.is_empty() {
            return Err(SgfError::NoFrames);
        }
        let mut cache: Vec<(StCoreParams, Vec<BinaryGrid>)> = Vec::new();
        let mut vector_for = |unit: &SgfUnit| -> Result<FeatureVector> {
            if let Some((_, st)) = cache.iter().find(|(p, _)| *p == unit.st) {
                return unit.vector_from_st(st);
            }
            let st = unit.preprocess(frames)?;
            let v = unit.vector_from_st(&st);
            cache.push((unit.st, st));
            v
        };
        let a = vector_for(self.unit(UnitId::A))?;
        let wants = |u: UnitId| class.is_none_or(|c| self.unit(u).handles(c));
        let b = if wants(UnitId::B) {
            Some(vector_for(self.unit(UnitId::B))?)
        } else {
            None
        };
        let c = if wants(UnitId::C) {
            Some(vector_for(self.unit(UnitId::C))?)
        } else {
            None
        };
        Ok(SampleVectors { a, b, c })
    }

    /// Trains every unit the class passes through with precomputed vectors.
    pub fn train_vectors(&mut self, vectors: &SampleVectors, class: u8) -> Result<()> {
        if !self.unit(UnitId::A).handles(class) {
            return Err(SgfError::ClassNotInUnit { class, unit: 'A' });
        }
        self.unit_mut(UnitId::A)
            .train_sample(vectors.a.clone(), class)?;
        for (id, v) in [(UnitId::B, &vectors.b), (UnitId::C, &vectors.c)] {
            if self.unit(id).handles(class) {
                let v = v.clone().ok_or(SgfError::InvalidParams(format!(
                    "missing unit {id} vector for class {class}"
                )))?;
                self.unit_mut(id).train_sample(v, class)?;
            }
        }
        Ok(())
    }

    pub fn finalize(&mut self) {
        self.units.iter_mut().for_each(SgfUnit::finalize);
    }

    /// Routes precomputed vectors through the hierarchy.
    pub fn route_vectors(&self, vectors: &SampleVectors) -> Result<Routing> {
        let op = self.similarity;
        let unit_a = self.unit(UnitId::A);
        let group = unit_a.classify_among(&vectors.a, op, None)?;
        let mut routing = Routing {
            class: group.label(),
            path: vec![UnitId::A],
            scores: vec![(UnitId::A, unit_a.scores(&vectors.a, op)?)],
        };
        if group.classes().len() == 1 {
            return Ok(routing);
        }
        let leaf = [(UnitId::B, &vectors.b), (UnitId::C, &vectors.c)]
            .into_iter()
            .find(|(id, _)| group.classes().iter().all(|&c| self.unit(*id).handles(c)));
        let Some((id, v)) = leaf else {
            return Err(SgfError::UntrainedRoute { unit: 'A' });
        };
        let v = v
            .as_ref()
            .ok_or(SgfError::InvalidParams(format!("missing unit {id} vector")))?;
        let unit = self.unit(id);
        let out = unit.classify_among(v, op, Some(group.classes()))?;
        routing.class = out.label();
        routing.path.push(id);
        routing.scores.push((id, unit.scores(v, op)?));
        Ok(routing)
    }

    /// Unit A picks a group; multi-class groups are resolved by unit B or C.
    pub fn route_hierarchy(&self, frames: &[Frame]) -> Result<Routing> {
        let vectors = self.sample_vectors(frames, None)?;
        self.route_vectors(&vectors)
    }

    /// Single pass over a labeled stream, then weight finalization.
    pub fn online_learn<'a, I>(&mut self, samples: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a [Frame], u8)>,
    {
        for (frames, class) in samples {
            let v = self.sample_vectors(frames, Some(class))?;
            self.train_vectors(&v, class)?;
        }
        self.finalize();
        Ok(())
    }

    /// Cumulative distinct-vector count per class after each of its
    /// training samples, taken from the unit that decides the class.
    pub fn knowledge_report(&self) -> Vec<KnowledgeRow> {
        let mut rows = Vec::new();
        for (class, _) in GESTURE_CLASSES {
            let unit = self.unit(self.leaf_unit(class));
            let Some(out) = unit.outputs().iter().find(|o| o.classes() == [class]) else {
                continue;
            };
            rows.extend(out.growth().iter().enumerate().map(|(i, &n)| KnowledgeRow {
                trial: i + 1,
                class,
                distinct_vectors: n,
            }));
        }
        rows.sort_by_key(|r| (r.trial, r.class));
        rows
    }
}

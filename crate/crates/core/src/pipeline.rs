//! Hardware-style inference path: events are encoded as AER packets, pass
//! through a bounded FIFO, are translated into frame addresses by the ST
//! scheduler, filtered by streaming ST cores, and classified by a decoding
//! module that matches against a flattened table of stored vectors.
//!
//! Steps are scheduler ticks, not time. The result must agree with
//! [`SgfModel::route_hierarchy`] on every input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::aer::{decode, encode, translate, AddressLut, AerFifo, AerPacket};
use crate::config::RunConfig;
use crate::error::{Result, SgfError};
use crate::events::{EventLoader, EventStream, Frame, Geometry, SpikeEvent};
use crate::grid::BinaryGrid;
use crate::sgf::{
    FeatureVector, SampleVectors, SgfModel, Similarity, UnitAnalysis, UnitId, GESTURE_CLASSES,
};
use crate::stcore::{StCore, StCoreParams};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub geometry: Geometry,
    pub spikes_per_frame: usize,
    pub fifo_capacity: usize,
    /// Packets the sensor side offers per step.
    pub send_per_step: usize,
    /// Packets the ST scheduler accepts per step.
    pub receive_per_step: usize,
    /// Overrides the model's similarity operator when set.
    pub similarity: Option<Similarity>,
}

impl PipelineConfig {
    pub fn from_run_config(c: &RunConfig) -> Self {
        Self {
            geometry: c.geometry,
            spikes_per_frame: c.spikes_per_frame,
            fifo_capacity: c.fifo_capacity,
            send_per_step: 4,
            receive_per_step: 3,
            similarity: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.spikes_per_frame == 0 {
            return Err(SgfError::InvalidParams(
                "spikes_per_frame must be positive".into(),
            ));
        }
        if self.fifo_capacity == 0 || self.send_per_step == 0 || self.receive_per_step == 0 {
            return Err(SgfError::InvalidParams(
                "FIFO capacity and per-step budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineStats {
    pub events_in: usize,
    pub packets_transferred: usize,
    /// Events that ended up in a complete frame.
    pub events_binned: usize,
    /// Events of the trailing partial frame, which is discarded.
    pub events_dropped_tail: usize,
    pub fifo_high_watermark: usize,
    /// Scheduler steps until the FIFO drained.
    pub steps: u64,
    pub frames: usize,
}

#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub class: u8,
    /// Units visited in order.
    pub path: Vec<UnitId>,
    /// `(label, score)` per trained output of each visited unit.
    pub scores: Vec<(UnitId, Vec<(u8, f64)>)>,
    /// Feature extraction detail of every unit.
    pub analyses: Vec<UnitAnalysis>,
    pub stats: PipelineStats,
}

/// Stored vectors of one unit, flattened for matching.
type WeightedVectors = Vec<(FeatureVector, f64)>;

struct DecodingTable {
    unit: UnitId,
    /// `(classes, [(vector, weight)])` per trained output, in label order.
    entries: Vec<(Vec<u8>, WeightedVectors)>,
}

impl DecodingTable {
    fn build(model: &SgfModel, unit: UnitId) -> Result<Self> {
        let entries: Vec<_> = model
            .unit(unit)
            .outputs()
            .iter()
            .filter(|o| o.is_trained())
            .map(|o| {
                if o.weights().len() != o.neurons().len() {
                    return Err(SgfError::InvalidParams(format!(
                        "unit {unit} weights are not finalized"
                    )));
                }
                Ok((
                    o.classes().to_vec(),
                    o.neurons()
                        .iter()
                        .zip(o.weights())
                        .map(|(n, &w)| (n.vector.clone(), w))
                        .collect(),
                ))
            })
            .collect::<Result<_>>()?;
        if entries.is_empty() {
            return Err(SgfError::UntrainedRoute {
                unit: unit.letter(),
            });
        }
        Ok(Self { unit, entries })
    }

    fn scores(&self, v: &FeatureVector, op: Similarity) -> Result<Vec<(u8, f64)>> {
        let l = v.len() as f64;
        self.entries
            .iter()
            .map(|(classes, stored)| {
                let s: Result<f64> = stored
                    .iter()
                    .map(|(t, w)| Ok(t.similarity(v, op)? as f64 / l * w))
                    .sum();
                Ok((classes[0], s?))
            })
            .collect()
    }

    /// Best entry among those meeting `allowed`; ties keep the first.
    fn decide(&self, v: &FeatureVector, op: Similarity, allowed: Option<&[u8]>) -> Result<&[u8]> {
        let scores = self.scores(v, op)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, ((classes, _), (_, s))) in self.entries.iter().zip(&scores).enumerate() {
            if allowed.is_some_and(|a| !classes.iter().any(|c| a.contains(c))) {
                continue;
            }
            if best.is_none_or(|(_, b)| *s > b) {
                best = Some((i, *s));
            }
        }
        best.map(|(i, _)| self.entries[i].0.as_slice())
            .ok_or(SgfError::UntrainedRoute {
                unit: self.unit.letter(),
            })
    }
}

/// Collects decoded packets into spike-count frames.
struct FrameAssembler {
    geometry: Geometry,
    per_frame: usize,
    current: Frame,
    filled: usize,
    frames: Vec<Frame>,
}

impl FrameAssembler {
    fn new(geometry: Geometry, per_frame: usize) -> Self {
        Self {
            geometry,
            per_frame,
            current: Frame::empty(0, geometry),
            filled: 0,
            frames: Vec::new(),
        }
    }

    fn add(&mut self, x: usize, y: usize, p: &AerPacket) {
        self.current
            .add_event(&SpikeEvent::new(0, x as u16, y as u16, p.polarity));
        self.filled += 1;
        if self.filled == self.per_frame {
            let next = Frame::empty(self.frames.len() + 1, self.geometry);
            self.frames.push(std::mem::replace(&mut self.current, next));
            self.filled = 0;
        }
    }
}

/// Runs one stream through the packetized path.
pub fn run_inference(
    stream: &EventStream,
    config: &PipelineConfig,
    model: &SgfModel,
) -> Result<InferenceResult> {
    config.validate()?;
    if stream.geometry() != config.geometry {
        return Err(SgfError::GeometryMismatch {
            expected: config.geometry.dims(),
            got: stream.geometry().dims(),
        });
    }
    let op = config.similarity.unwrap_or(model.similarity);
    let tables = [UnitId::A, UnitId::B, UnitId::C].map(|u| DecodingTable::build(model, u).ok());
    if tables[0].is_none() {
        return Err(SgfError::UntrainedRoute { unit: 'A' });
    }

    // Sensor side: AER encoding.
    let words: Vec<u16> = stream
        .events()
        .iter()
        .map(|e| AerPacket::from_event(e).and_then(|p| encode(&p)))
        .collect::<Result<_>>()?;

    // Transport and ST scheduler: FIFO, LUT translation, framing.
    let lut = AddressLut::row_major(config.geometry, 0)?;
    let mut fifo = AerFifo::new(config.fifo_capacity)?;
    let mut assembler = FrameAssembler::new(config.geometry, config.spikes_per_frame);
    let mut received = 0;
    let mut next = 0;
    while received < words.len() {
        for _ in 0..config.send_per_step {
            if next == words.len() || fifo.try_push(words[next]).is_err() {
                break;
            }
            next += 1;
        }
        for _ in 0..config.receive_per_step {
            let Some(w) = fifo.pop() else { break };
            let p = decode(w.into())?;
            let dest = translate(&lut, &p)?;
            let offset = dest.offset as usize;
            assembler.add(
                offset % config.geometry.width,
                offset / config.geometry.width,
                &p,
            );
            received += 1;
        }
        fifo.tick();
    }
    let frames = assembler.frames;
    if frames.is_empty() {
        return Err(SgfError::NoFrames);
    }

    // ST cores: one streaming instance per distinct parameter set.
    let mut cores: Vec<(StCoreParams, StCore, Vec<BinaryGrid>)> = Vec::new();
    for u in &model.units {
        if !cores.iter().any(|(p, _, _)| *p == u.st) {
            cores.push((u.st, StCore::new(u.st, config.geometry)?, Vec::new()));
        }
    }
    for f in &frames {
        for (_, core, out) in cores.iter_mut() {
            out.push(core.push(f)?);
        }
    }
    let st_for = |p: StCoreParams| &cores.iter().find(|(q, _, _)| *q == p).unwrap().2;

    // SGF unit processor: banks evaluated one unit at a time.
    let analyses: Vec<UnitAnalysis> = model
        .units
        .iter()
        .map(|u| u.analyze_st(st_for(u.st)))
        .collect::<Result<_>>()?;
    let vectors = SampleVectors {
        a: analyses[0].vector.clone(),
        b: Some(analyses[1].vector.clone()),
        c: Some(analyses[2].vector.clone()),
    };

    // Decoding module.
    let table_a = tables[0].as_ref().unwrap();
    let group = table_a.decide(&vectors.a, op, None)?.to_vec();
    let mut path = vec![UnitId::A];
    let mut scores = vec![(UnitId::A, table_a.scores(&vectors.a, op)?)];
    let mut class = group[0];
    if group.len() > 1 {
        let (id, v) = [(UnitId::B, &vectors.b), (UnitId::C, &vectors.c)]
            .into_iter()
            .find(|(id, _)| group.iter().all(|&c| model.unit(*id).handles(c)))
            .ok_or(SgfError::UntrainedRoute { unit: 'A' })?;
        let v = v.as_ref().expect("all unit vectors are extracted");
        let table = tables[id as usize]
            .as_ref()
            .ok_or(SgfError::UntrainedRoute { unit: id.letter() })?;
        class = table.decide(v, op, Some(&group))?[0];
        path.push(id);
        scores.push((id, table.scores(v, op)?));
    }

    let binned = frames.len() * config.spikes_per_frame;
    Ok(InferenceResult {
        class,
        path,
        scores,
        analyses,
        stats: PipelineStats {
            events_in: stream.len(),
            packets_transferred: fifo.log().len(),
            events_binned: binned,
            events_dropped_tail: received - binned,
            fifo_high_watermark: fifo.high_watermark(),
            steps: fifo.step(),
            frames: frames.len(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub total: usize,
    pub correct: usize,
    /// Labels of the matrix rows and columns.
    pub classes: Vec<u8>,
    /// `confusion[actual][predicted]`, indexed like `classes`.
    pub confusion: Vec<Vec<usize>>,
    /// `(actual, predicted)` per stream, in input order.
    pub predictions: Vec<(u8, u8)>,
}

impl BatchSummary {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "samples {}\ncorrect {}\naccuracy {:.4}\nconfusion (rows actual, columns predicted)\n",
            self.total,
            self.correct,
            self.accuracy()
        );
        let head: Vec<String> = self.classes.iter().map(|c| format!("{c:>4}")).collect();
        let _ = writeln!(out, "    {}", head.join(""));
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(|n| format!("{n:>4}")).collect();
            let _ = writeln!(out, "{c:>4}{}", cells.join(""));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("actual");
        for c in &self.classes {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{c},{}", cells.join(","));
        }
        let _ = writeln!(out, "accuracy,{:.4}", self.accuracy());
        out
    }
}

/// Runs labeled streams and aggregates accuracy and confusion.
pub fn run_batch(
    streams: &[EventStream],
    config: &PipelineConfig,
    model: &SgfModel,
) -> Result<BatchSummary> {
    let classes: Vec<u8> = GESTURE_CLASSES.iter().map(|(c, _)| *c).collect();
    let idx: BTreeMap<u8, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut confusion = vec![vec![0; classes.len()]; classes.len()];
    let mut predictions = Vec::with_capacity(streams.len());
    for (i, s) in streams.iter().enumerate() {
        let label = s
            .label
            .ok_or_else(|| SgfError::InvalidParams(format!("stream {} has no label", i + 1)))?;
        let row = *idx
            .get(&label)
            .ok_or_else(|| SgfError::InvalidParams(format!("unknown class {label}")))?;
        let r = run_inference(s, config, model)?;
        confusion[row][idx[&r.class]] += 1;
        predictions.push((label, r.class));
    }
    let correct = predictions.iter().filter(|(a, p)| a == p).count();
    Ok(BatchSummary {
        total: streams.len(),
        correct,
        classes,
        confusion,
        predictions,
    })
}

/// One `path,label` line of a batch manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub line: usize,
    pub path: PathBuf,
    pub label: u8,
}

/// Parses a manifest; relative paths are resolved against `base`.
/// Blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let rec = raw.trim();
        if rec.is_empty() || rec.starts_with('#') {
            continue;
        }
        let err = |message: String| SgfError::Parse { line, message };
        let (path, label) = rec
            .rsplit_once(',')
            .ok_or_else(|| err("expected `path,label`".into()))?;
        let label: u8 = label
            .trim()
            .parse()
            .map_err(|_| err(format!("label is not a class id: {:?}", label.trim())))?;
        if !GESTURE_CLASSES.iter().any(|(c, _)| *c == label) {
            return Err(err(format!("unknown class {label}")));
        }
        let path = path.trim();
        if path.is_empty() {
            return Err(err("empty path".into()));
        }
        out.push(ManifestEntry {
            line,
            path: base.join(path),
            label,
        });
    }
    Ok(out)
}

/// Loads every manifest entry with `loader`, attaching its label.
pub fn load_manifest_streams(
    entries: &[ManifestEntry],
    loader: &dyn EventLoader,
    geometry: Geometry,
) -> Result<Vec<EventStream>> {
    entries
        .iter()
        .map(|e| {
            let mut s = loader.load(&e.path, geometry)?;
            s.label = Some(e.label);
            Ok(s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Polarity;

    fn trained_model() -> (RunConfig, SgfModel) {
        let cfg = RunConfig::default();
        let mut model = cfg.build_model().unwrap();
        for class in [1, 3, 4] {
            let s = crate::events::synthetic::suite_sample(
                class,
                cfg.geometry,
                0.0,
                1000,
                class as u64,
            )
            .unwrap();
            let frames = crate::events::bin_frames(&s, 1000).unwrap();
            let v = model.sample_vectors(&frames, Some(class)).unwrap();
            model.train_vectors(&v, class).unwrap();
        }
        model.finalize();
        (cfg, model)
    }

    #[test]
    fn manifest_lines() {
        let m = parse_manifest("# comment\na.txt,3\n\n sub/b.txt , 10\n", Path::new("/d")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].line, 4);
        assert_eq!(m[1].path, PathBuf::from("/d/sub/b.txt"));
        assert_eq!(m[1].label, 10);
        let err = parse_manifest("a.txt,3\nb.txt,11\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, SgfError::Parse { line: 2, .. }));
        assert!(parse_manifest("a.txt\n", Path::new(".")).is_err());
        assert!(parse_manifest("", Path::new(".")).unwrap().is_empty());
    }

    #[test]
    fn empty_stream_has_no_frames() {
        let (cfg, model) = trained_model();
        let s = EventStream::new(cfg.geometry, Vec::new(), None).unwrap();
        let err = run_inference(&s, &PipelineConfig::from_run_config(&cfg), &model).unwrap_err();
        assert_eq!(err, SgfError::NoFrames);
    }

    #[test]
    fn untrained_model_is_rejected() {
        let cfg = RunConfig::default();
        let model = cfg.build_model().unwrap();
        let events = (0..1000)
            .map(|i| SpikeEvent::new(i, 1, 1, Polarity::On))
            .collect();
        let s = EventStream::new(cfg.geometry, events, None).unwrap();
        let err = run_inference(&s, &PipelineConfig::from_run_config(&cfg), &model).unwrap_err();
        assert_eq!(err, SgfError::UntrainedRoute { unit: 'A' });
    }

    #[test]
    fn geometry_must_match() {
        let (cfg, model) = trained_model();
        let s = EventStream::new(Geometry::new(64, 64), Vec::new(), None).unwrap();
        let err = run_inference(&s, &PipelineConfig::from_run_config(&cfg), &model).unwrap_err();
        assert!(matches!(err, SgfError::GeometryMismatch { .. }));
    }

    #[test]
    fn stats_conserve_packets() {
        let (cfg, model) = trained_model();
        let mut s = crate::events::synthetic::suite_sample(3, cfg.geometry, 0.0, 1000, 99).unwrap();
        let mut events = s.events().to_vec();
        let last = events.last().unwrap().t;
        events.extend((1..=250).map(|k| SpikeEvent::new(last + k, 5, 5, Polarity::Off)));
        s = EventStream::new(cfg.geometry, events, Some(3)).unwrap();
        let r = run_inference(&s, &PipelineConfig::from_run_config(&cfg), &model).unwrap();
        let st = r.stats;
        assert_eq!(st.packets_transferred, st.events_in);
        assert_eq!(
            st.events_binned + st.events_dropped_tail,
            st.packets_transferred
        );
        assert_eq!(st.events_dropped_tail, 250);
        assert!(st.fifo_high_watermark <= cfg.fifo_capacity);
        let direct = model
            .route_hierarchy(&crate::events::bin_frames(&s, 1000).unwrap())
            .unwrap();
        assert_eq!(r.class, direct.class);
        assert_eq!(r.path, direct.path);
        assert_eq!(r.scores, direct.scores);
    }
}

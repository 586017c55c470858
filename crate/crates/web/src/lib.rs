//! Browser bindings: ST filtering preview, cost tables and a small
//! train-then-classify session on synthetic gestures.
//!
//! The plain functions return `Result<_, String>` so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use std::fmt::Write as _;

use sgf_core::config::RunConfig;
use sgf_core::costmodel::{
    convnet_report, pat_report, sgf_ops_report, sgf_size_report, SgfInventory,
};
use sgf_core::events::synthetic::{suite_sample, suite_seed};
use sgf_core::events::{bin_frames, Frame};
use sgf_core::sgf::{class_name, SgfModel, GESTURE_CLASSES};
use sgf_core::snn_spatial::accumulate;
use sgf_core::stcore::st_filter;
use wasm_bindgen::prelude::*;

const TEST_OFFSET: usize = 10_000;

fn sample_frames(
    cfg: &RunConfig,
    class: u8,
    index: usize,
    noise: f64,
) -> Result<Vec<Frame>, String> {
    if class_name(class).is_none() {
        return Err(format!("class must be 1..=10, got {class}"));
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(format!("noise must be within 0..=0.5, got {noise}"));
    }
    let seed = suite_seed(cfg.suite.seed, class, index);
    let s = suite_sample(class, cfg.geometry, noise, cfg.spikes_per_frame, seed)
        .map_err(|e| e.to_string())?;
    bin_frames(&s, cfg.spikes_per_frame).map_err(|e| e.to_string())
}

/// Per-pixel counts of the raw events followed by the counts of the ST
/// core output of `unit` ("a", "b" or "c"), both `width * height` long.
pub fn preview_counts(class: u8, seed: u64, noise: f64, unit: &str) -> Result<Vec<u32>, String> {
    let mut cfg = RunConfig::default();
    cfg.suite.seed = seed;
    let params = match unit {
        "a" => cfg.st_a,
        "b" => cfg.st_b,
        "c" => cfg.st_c,
        _ => return Err(format!("unknown unit {unit:?}")),
    };
    let frames = sample_frames(&cfg, class, 0, noise)?;
    let st = st_filter(&frames, &params).map_err(|e| e.to_string())?;
    let mut out: Vec<u32> = vec![0; cfg.geometry.pixels()];
    for f in &frames {
        for (o, c) in out.iter_mut().zip(f.magnitude_grid().as_slice()) {
            *o += c;
        }
    }
    let acc = accumulate(&st).map_err(|e| e.to_string())?;
    out.extend(acc.as_slice().iter().copied());
    Ok(out)
}

/// Text table of "sgf", "convnet" or "pat".
pub fn cost_text(target: &str) -> Result<String, String> {
    Ok(match target {
        "sgf" => {
            let inv = SgfInventory::PUBLISHED;
            format!(
                "{}\n{}",
                sgf_size_report(&inv).to_text(),
                sgf_ops_report(&inv).to_text()
            )
        }
        "convnet" => convnet_report().to_text(),
        "pat" => pat_report().to_text(),
        _ => return Err(format!("unknown cost target {target:?}")),
    })
}

/// A model trained in the page on synthetic samples.
#[wasm_bindgen]
pub struct Session {
    cfg: RunConfig,
    model: SgfModel,
    trained: usize,
}

impl Session {
    pub fn create(seed: u64) -> Result<Session, String> {
        let mut cfg = RunConfig::default();
        cfg.suite.seed = seed;
        let model = cfg.build_model().map_err(|e| e.to_string())?;
        Ok(Session {
            cfg,
            model,
            trained: 0,
        })
    }

    /// Adds `per_class` more samples of every class in one pass.
    pub fn train_more(&mut self, per_class: usize, noise: f64) -> Result<String, String> {
        let start = self.trained;
        for i in start..start + per_class {
            for (class, _) in GESTURE_CLASSES {
                let frames = sample_frames(&self.cfg, class, i, noise)?;
                let v = self
                    .model
                    .sample_vectors(&frames, Some(class))
                    .map_err(|e| e.to_string())?;
                self.model
                    .train_vectors(&v, class)
                    .map_err(|e| e.to_string())?;
            }
        }
        self.model.finalize();
        self.trained += per_class;
        let mut out = format!("{} samples per class\n", self.trained);
        let mut last = [0usize; 11];
        for r in self.model.knowledge_report() {
            last[r.class as usize] = r.distinct_vectors;
        }
        for (class, name) in GESTURE_CLASSES {
            let _ = writeln!(out, "{class:>2} {name:<28} {} stored", last[class as usize]);
        }
        Ok(out)
    }

    /// Classifies a held-out sample.
    pub fn classify_sample(&self, class: u8, index: usize, noise: f64) -> Result<String, String> {
        if self.trained == 0 {
            return Err("train the model first".into());
        }
        let frames = sample_frames(&self.cfg, class, TEST_OFFSET + index, noise)?;
        let r = self
            .model
            .route_hierarchy(&frames)
            .map_err(|e| e.to_string())?;
        let mut out = format!(
            "actual {class} ({})\npredicted {} ({})\n",
            class_name(class).unwrap_or("?"),
            r.class,
            class_name(r.class).unwrap_or("?")
        );
        for (unit, scores) in &r.scores {
            let cells: Vec<String> = scores.iter().map(|(c, s)| format!("{c}:{s:.3}")).collect();
            let _ = writeln!(out, "unit {unit}: {}", cells.join(" "));
        }
        Ok(out)
    }
}

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<Session, JsError> {
        Session::create(seed.into()).map_err(|e| JsError::new(&e))
    }

    pub fn train(&mut self, per_class: usize, noise: f64) -> Result<String, JsError> {
        self.train_more(per_class, noise)
            .map_err(|e| JsError::new(&e))
    }

    pub fn classify(&self, class: u8, index: usize, noise: f64) -> Result<String, JsError> {
        self.classify_sample(class, index, noise)
            .map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen]
pub fn preview(class: u8, seed: u32, noise: f64, unit: &str) -> Result<Vec<u32>, JsError> {
    preview_counts(class, seed.into(), noise, unit).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classes() -> Vec<String> {
    GESTURE_CLASSES.iter().map(|(_, n)| n.to_string()).collect()
}

#[wasm_bindgen]
pub fn cost(target: &str) -> Result<String, JsError> {
    cost_text(target).map_err(|e| JsError::new(&e))
}

//! Shared oracles and suite helpers for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgf_core::config::RunConfig;
use sgf_core::events::synthetic::{suite_sample, suite_seed};
use sgf_core::events::{bin_frames, EventStream, Frame, Geometry, Polarity, SpikeEvent};
use sgf_core::grid::{BinaryGrid, Grid};
use sgf_core::sgf::SgfModel;
use sgf_core::snn_temporal::{Axis, Direction};
use sgf_core::stcore::{SpatialSum, StCoreParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Frames with a random number of events at random pixels.
pub fn random_frames(rng: &mut ChaCha8Rng, g: Geometry, n: usize, max_events: usize) -> Vec<Frame> {
    (0..n)
        .map(|i| {
            let mut f = Frame::empty(i, g);
            for _ in 0..rng.gen_range(0..=max_events) {
                let p = if rng.gen() {
                    Polarity::On
                } else {
                    Polarity::Off
                };
                let x = rng.gen_range(0..g.width) as u16;
                let y = rng.gen_range(0..g.height) as u16;
                f.add_event(&SpikeEvent::new(0, x, y, p));
            }
            f
        })
        .collect()
}

/// Direct evaluation of the ST core by exhaustive window summation.
pub fn st_oracle(frames: &[Frame], p: &StCoreParams) -> Vec<BinaryGrid> {
    let Some(first) = frames.first() else {
        return Vec::new();
    };
    let (w, h) = first.geometry().dims();
    let spatial: Vec<Vec<bool>> = frames
        .iter()
        .map(|f| {
            let mut out = Vec::with_capacity(w * h);
            for y in 0..h {
                for x in 0..w {
                    let mut s: i64 = 0;
                    for j in y..=y + p.delta_s {
                        for i in x..=x + p.delta_s {
                            if i < w && j < h {
                                s += match p.sum {
                                    SpatialSum::Magnitude => f.magnitude(i, j) as i64,
                                    SpatialSum::Signed => f.signed(i, j),
                                };
                            }
                        }
                    }
                    out.push(s >= p.theta_s as i64);
                }
            }
            out
        })
        .collect();
    (0..frames.len())
        .map(|t| {
            let mut g = Grid::new(w, h);
            if t + 1 >= p.delta_t {
                for y in 0..h {
                    for x in 0..w {
                        let n = (t + 1 - p.delta_t..=t)
                            .filter(|&k| spatial[k][y * w + x])
                            .count();
                        g.set(x, y, n as u32 >= p.theta_t);
                    }
                }
            }
            g
        })
        .collect()
}

/// Pairwise location comparison of every current neuron with every
/// previous one.
pub fn inputs_oracle(
    current: &[(usize, usize)],
    previous: &[(usize, usize)],
    axis: Axis,
    direction: Direction,
    theta_l: u32,
) -> Vec<u32> {
    let loc = |p: (usize, usize)| match axis {
        Axis::Vertical => p.1 as i64,
        Axis::Horizontal => p.0 as i64,
    };
    current
        .iter()
        .map(|&m| {
            let count = |sign: i64| {
                previous
                    .iter()
                    .filter(|&&i| sign * (loc(m) - loc(i)) > theta_l as i64)
                    .count() as u32
            };
            match direction {
                Direction::Increasing => count(1),
                Direction::Decreasing => count(-1),
                Direction::Both => count(1).max(count(-1)),
            }
        })
        .collect()
}

pub fn suite_stream(cfg: &RunConfig, class: u8, index: usize, noise: f64) -> EventStream {
    let seed = suite_seed(cfg.suite.seed, class, index);
    suite_sample(class, cfg.geometry, noise, cfg.spikes_per_frame, seed).unwrap()
}

pub fn suite_frames(cfg: &RunConfig, class: u8, index: usize, noise: f64) -> Vec<Frame> {
    bin_frames(
        &suite_stream(cfg, class, index, noise),
        cfg.spikes_per_frame,
    )
    .unwrap()
}

/// Single-pass training on samples `0..n` of every class, interleaved by
/// sample index.
pub fn train_suite(cfg: &RunConfig, n: usize, noise: f64) -> SgfModel {
    let mut model = cfg.build_model().unwrap();
    for i in 0..n {
        for class in 1..=10 {
            let frames = suite_frames(cfg, class, i, noise);
            let v = model.sample_vectors(&frames, Some(class)).unwrap();
            model.train_vectors(&v, class).unwrap();
        }
    }
    model.finalize();
    model
}

/// Test samples start here so they never overlap training samples.
pub const TEST_OFFSET: usize = 10_000;

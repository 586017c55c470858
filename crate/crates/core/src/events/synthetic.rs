//! Deterministic synthetic gestures.
//!
//! A gesture is a disc-shaped blob of events whose centroid follows a
//! parametric trajectory, plus uniform background noise. All randomness comes
//! from a ChaCha stream seeded by the caller.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EventStream, Geometry, Polarity, SpikeEvent};
use crate::error::{Result, SgfError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryKind {
    LinearDown,
    LinearUp,
    LinearLeft,
    LinearRight,
    CircularCw,
    CircularCcw,
    OscillateSmallArea,
    OscillateLargeArea,
}

impl TrajectoryKind {
    pub const ALL: [TrajectoryKind; 8] = [
        TrajectoryKind::LinearDown,
        TrajectoryKind::LinearUp,
        TrajectoryKind::LinearLeft,
        TrajectoryKind::LinearRight,
        TrajectoryKind::CircularCw,
        TrajectoryKind::CircularCcw,
        TrajectoryKind::OscillateSmallArea,
        TrajectoryKind::OscillateLargeArea,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrajectoryKind::LinearDown => "linear-down",
            TrajectoryKind::LinearUp => "linear-up",
            TrajectoryKind::LinearLeft => "linear-left",
            TrajectoryKind::LinearRight => "linear-right",
            TrajectoryKind::CircularCw => "circular-cw",
            TrajectoryKind::CircularCcw => "circular-ccw",
            TrajectoryKind::OscillateSmallArea => "oscillate-small-area",
            TrajectoryKind::OscillateLargeArea => "oscillate-large-area",
        }
    }
}

impl fmt::Display for TrajectoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrajectoryKind {
    type Err = SgfError;

    fn from_str(s: &str) -> Result<Self> {
        TrajectoryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SgfError::InvalidParams(format!("unknown trajectory kind {s:?}")))
    }
}

/// Everything needed to render one synthetic gesture.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGestureSpec {
    pub kind: TrajectoryKind,
    pub geometry: Geometry,
    /// Trajectory center in pixel coordinates.
    pub center: (f64, f64),
    /// Travel length for linear kinds, radius for circular kinds, peak-to-peak
    /// amplitude for oscillations.
    pub extent: f64,
    /// Revolutions (circular) or periods (oscillate); ignored by linear kinds.
    pub cycles: f64,
    /// Starting phase in radians.
    pub phase: f64,
    pub blob_radius: f64,
    /// Blob events emitted per generator frame.
    pub blob_rate: usize,
    /// Probability of a noise event per pixel per generator frame.
    pub noise_density: f64,
    pub frame_count: usize,
    /// Duration of one generator frame in microseconds.
    pub frame_us: u64,
}

impl SyntheticGestureSpec {
    pub fn new(kind: TrajectoryKind, geometry: Geometry) -> Self {
        let (w, h) = (geometry.width as f64, geometry.height as f64);
        let extent = match kind {
            TrajectoryKind::LinearDown | TrajectoryKind::LinearUp => 0.75 * h,
            TrajectoryKind::LinearLeft | TrajectoryKind::LinearRight => 0.75 * w,
            TrajectoryKind::CircularCw | TrajectoryKind::CircularCcw => 0.2 * w.min(h),
            TrajectoryKind::OscillateSmallArea => 0.1 * w,
            TrajectoryKind::OscillateLargeArea => 0.22 * w,
        };
        let cycles = match kind {
            TrajectoryKind::CircularCw | TrajectoryKind::CircularCcw => 1.5,
            TrajectoryKind::OscillateSmallArea | TrajectoryKind::OscillateLargeArea => 4.0,
            _ => 0.0,
        };
        Self {
            kind,
            geometry,
            center: (w / 2.0, h / 2.0),
            extent,
            cycles,
            phase: 0.0,
            blob_radius: 6.0,
            blob_rate: 1000,
            noise_density: 0.0,
            frame_count: 64,
            frame_us: 1000,
        }
    }

    /// Noise events emitted per generator frame.
    pub fn noise_count(&self) -> usize {
        (self.noise_density * self.geometry.pixels() as f64).round() as usize
    }

    /// Events per generator frame (blob plus noise).
    pub fn events_per_frame(&self) -> usize {
        self.blob_rate + self.noise_count()
    }

    /// Sets `blob_rate` so each generator frame holds exactly `total` events,
    /// aligning generator frames with spike-count frames of that size.
    pub fn with_total_rate(mut self, total: usize) -> Self {
        self.blob_rate = total.saturating_sub(self.noise_count()).max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let bad = |m: &str| Err(SgfError::InvalidParams(m.to_string()));
        if self.frame_count == 0 {
            return bad("frame_count must be positive");
        }
        if !(0.0..=1.0).contains(&self.noise_density) {
            return bad("noise_density must lie in [0, 1]");
        }
        if self.blob_radius.is_nan()
            || self.blob_radius <= 0.0
            || !self.extent.is_finite()
            || self.extent < 0.0
        {
            return bad("blob_radius must be positive and extent non-negative");
        }
        if self.blob_rate == 0 && self.noise_count() == 0 {
            return bad("spec emits no events");
        }
        Ok(())
    }

    /// Blob centroid at generator frame `f`, in pixel coordinates (x, y).
    pub fn centroid(&self, frame: usize) -> (f64, f64) {
        let u = if self.frame_count > 1 {
            frame as f64 / (self.frame_count - 1) as f64
        } else {
            0.0
        };
        let (cx, cy) = self.center;
        let half = self.extent / 2.0;
        let angle = self.phase + TAU * self.cycles * u;
        match self.kind {
            TrajectoryKind::LinearDown => (cx, cy - half + self.extent * u),
            TrajectoryKind::LinearUp => (cx, cy + half - self.extent * u),
            TrajectoryKind::LinearRight => (cx - half + self.extent * u, cy),
            TrajectoryKind::LinearLeft => (cx + half - self.extent * u, cy),
            // Rows grow downward, so a visually counter-clockwise path
            // subtracts the sine term.
            TrajectoryKind::CircularCcw => (
                cx + self.extent * angle.cos(),
                cy - self.extent * angle.sin(),
            ),
            TrajectoryKind::CircularCw => {
                let a = self.phase - TAU * self.cycles * u;
                (cx + self.extent * a.cos(), cy - self.extent * a.sin())
            }
            TrajectoryKind::OscillateSmallArea => (cx + half * angle.sin(), cy),
            TrajectoryKind::OscillateLargeArea => (
                cx + half * angle.sin(),
                cy + 0.5 * half * (2.0 * angle).sin(),
            ),
        }
    }
}

/// A generated stream together with its per-frame ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedGesture {
    pub stream: EventStream,
    /// Blob centroid of every generator frame.
    pub centroids: Vec<(f64, f64)>,
    /// Per event: `true` if it was drawn from the blob, `false` for noise.
    pub from_blob: Vec<bool>,
}

/// Renders a gesture; identical `(spec, seed)` pairs give identical streams.
pub fn gen_synthetic(spec: &SyntheticGestureSpec, seed: u64) -> Result<EventStream> {
    gen_synthetic_with_truth(spec, seed).map(|g| g.stream)
}

pub fn gen_synthetic_with_truth(
    spec: &SyntheticGestureSpec,
    seed: u64,
) -> Result<GeneratedGesture> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometry = spec.geometry;
    let (w, h) = (geometry.width as i64, geometry.height as i64);
    let noise = spec.noise_count();
    let per_frame = spec.blob_rate + noise;
    let r = spec.blob_radius;

    let mut events = Vec::with_capacity(per_frame * spec.frame_count);
    let mut from_blob = Vec::with_capacity(per_frame * spec.frame_count);
    let mut centroids = Vec::with_capacity(spec.frame_count);
    let mut scratch: Vec<(u16, u16, Polarity, bool)> = Vec::with_capacity(per_frame);

    for f in 0..spec.frame_count {
        let (cx, cy) = spec.centroid(f);
        centroids.push((cx, cy));
        scratch.clear();
        let mut emitted = 0;
        let mut attempts = 0usize;
        while emitted < spec.blob_rate {
            attempts += 1;
            let dx = rng.gen_range(-r..=r);
            let dy = rng.gen_range(-r..=r);
            let pol = if rng.gen::<bool>() {
                Polarity::On
            } else {
                Polarity::Off
            };
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let x = (cx + dx).round() as i64;
            let y = (cy + dy).round() as i64;
            if x < 0 || y < 0 || x >= w || y >= h {
                // A blob parked entirely off-sensor would spin forever.
                if attempts > 64 * spec.blob_rate.max(1) {
                    break;
                }
                continue;
            }
            scratch.push((x as u16, y as u16, pol, true));
            emitted += 1;
        }
        for _ in 0..noise {
            let x = rng.gen_range(0..w) as u16;
            let y = rng.gen_range(0..h) as u16;
            let pol = if rng.gen::<bool>() {
                Polarity::On
            } else {
                Polarity::Off
            };
            scratch.push((x, y, pol, false));
        }
        scratch.shuffle(&mut rng);
        let n = scratch.len().max(1) as u64;
        let base = f as u64 * spec.frame_us;
        for (k, &(x, y, pol, blob)) in scratch.iter().enumerate() {
            let t = base + (k as u64 * spec.frame_us) / n;
            events.push(SpikeEvent::new(t, x, y, pol));
            from_blob.push(blob);
        }
    }

    Ok(GeneratedGesture {
        stream: EventStream::new(geometry, events, None)?,
        centroids,
        from_blob,
    })
}

/// Trajectory template of each gesture class in the synthetic suite.
///
/// Returns `(kind, center, extent, blob radius)`, lengths as fractions of
/// the sensor size.
fn class_template(class: u8) -> Option<(TrajectoryKind, (f64, f64), f64, f64)> {
    use TrajectoryKind::*;
    Some(match class {
        1 => (OscillateLargeArea, (0.5, 0.5), 0.18, 0.07),
        2 => (OscillateSmallArea, (0.25, 0.5), 0.1, 0.045),
        3 => (OscillateSmallArea, (0.75, 0.5), 0.1, 0.045),
        4 => (CircularCw, (0.75, 0.5), 0.19, 0.045),
        5 => (CircularCcw, (0.75, 0.5), 0.19, 0.045),
        6 => (CircularCw, (0.25, 0.5), 0.19, 0.045),
        7 => (CircularCcw, (0.25, 0.5), 0.19, 0.045),
        8 => (LinearRight, (0.5, 0.5), 0.75, 0.045),
        9 => (LinearDown, (0.5, 0.5), 0.75, 0.045),
        10 => (LinearUp, (0.5, 0.5), 0.75, 0.045),
        _ => return None,
    })
}

/// Jittered gesture spec for one sample of `class`, sized so that every
/// generator frame holds exactly `spikes_per_frame` events.
pub fn class_spec(
    class: u8,
    geometry: Geometry,
    noise_density: f64,
    spikes_per_frame: usize,
    seed: u64,
) -> Result<SyntheticGestureSpec> {
    let (kind, (fx, fy), fe, fr) = class_template(class).ok_or_else(|| {
        SgfError::InvalidParams(format!("no synthetic gesture for class {class}"))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d0fc_1a55);
    let (w, h) = (geometry.width as f64, geometry.height as f64);
    let size = w.min(h);
    let mut spec = SyntheticGestureSpec::new(kind, geometry);
    spec.center = (
        fx * w + rng.gen_range(-0.02..=0.02) * size,
        fy * h + rng.gen_range(-0.02..=0.02) * size,
    );
    spec.extent = fe * size * rng.gen_range(0.92..=1.08);
    spec.phase = rng.gen_range(0.0..TAU);
    spec.cycles = match kind {
        TrajectoryKind::CircularCw | TrajectoryKind::CircularCcw => rng.gen_range(1.3..=1.6),
        TrajectoryKind::OscillateSmallArea | TrajectoryKind::OscillateLargeArea => {
            rng.gen_range(3.5..=4.5)
        }
        _ => 0.0,
    };
    spec.blob_radius = fr * size;
    spec.frame_count = rng.gen_range(50..=80);
    spec.noise_density = noise_density;
    Ok(spec.with_total_rate(spikes_per_frame))
}

/// One labeled sample of the synthetic ten-class suite.
pub fn suite_sample(
    class: u8,
    geometry: Geometry,
    noise_density: f64,
    spikes_per_frame: usize,
    seed: u64,
) -> Result<EventStream> {
    let spec = class_spec(class, geometry, noise_density, spikes_per_frame, seed)?;
    let mut stream = gen_synthetic(&spec, seed)?;
    stream.label = Some(class);
    Ok(stream)
}

/// Seed of sample `index` of `class` in a suite rooted at `base`.
pub fn suite_seed(base: u64, class: u8, index: usize) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((class as u64) << 32)
        .wrapping_add(index as u64)
}

//! Spatial SNNs: accumulate ST activity over a whole sample, gate each pixel
//! on its accumulated intensity, then gate the region on its fired area.

use crate::error::{Result, SgfError};
use crate::events::Geometry;
use crate::grid::{BinaryGrid, CountGrid, Grid};

/// Axis-aligned detection area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn full(geometry: Geometry) -> Self {
        Self::new(0, 0, geometry.width, geometry.height)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    pub fn fits(&self, geometry: Geometry) -> bool {
        self.width > 0
            && self.height > 0
            && self.x + self.width <= geometry.width
            && self.y + self.height <= geometry.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpatialArchetype {
    /// Intensive activity in a constrained area (A/D): `theta_i > theta_a`.
    ConstrainedIntensive,
    /// Mild activity over a plateau (B/C): `theta_i < theta_a`.
    PlateauMild,
    /// Intensive activity at one specific location (G).
    LocationSpecific,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialSnnParams {
    pub feature_id: String,
    pub archetype: SpatialArchetype,
    pub region: Rect,
    /// Intensity gate: accumulated count a pixel needs to fire.
    pub theta_i: u32,
    /// Area gate: fired pixels the region needs to emit a spike.
    pub theta_a: u32,
}

impl SpatialSnnParams {
    pub fn validate(&self, geometry: Geometry) -> Result<()> {
        let fail = |m: String| Err(SgfError::InvalidParams(format!("{}: {m}", self.feature_id)));
        if !self.region.fits(geometry) {
            return fail(format!(
                "region {:?} outside {:?}",
                self.region,
                geometry.dims()
            ));
        }
        if self.theta_i == 0 || self.theta_a == 0 {
            return fail("theta_i and theta_a must be at least 1".into());
        }
        match self.archetype {
            SpatialArchetype::ConstrainedIntensive if self.theta_i <= self.theta_a => {
                fail("constrained-intensive detectors need theta_i > theta_a".into())
            }
            SpatialArchetype::PlateauMild if self.theta_i >= self.theta_a => {
                fail("plateau-mild detectors need theta_i < theta_a".into())
            }
            _ => Ok(()),
        }
    }
}

/// Per-pixel sum of binary activations over all frames of a sample.
pub fn accumulate(st_outputs: &[BinaryGrid]) -> Result<CountGrid> {
    let first = st_outputs.first().ok_or(SgfError::NoFrames)?;
    let dims = first.dims();
    let mut acc: CountGrid = Grid::new(dims.0, dims.1);
    for g in st_outputs {
        if g.dims() != dims {
            return Err(SgfError::GeometryMismatch {
                expected: dims,
                got: g.dims(),
            });
        }
        for (a, &b) in acc.as_mut_slice().iter_mut().zip(g.as_slice()) {
            *a += b as u32;
        }
    }
    Ok(acc)
}

/// Single-bit response of one spatial SNN.
pub fn spatial_response(counts: &CountGrid, params: &SpatialSnnParams) -> bool {
    let r = params.region;
    let x_end = (r.x + r.width).min(counts.width());
    let y_end = (r.y + r.height).min(counts.height());
    let mut fired = 0u32;
    for y in r.y..y_end {
        let row = &counts.as_slice()[y * counts.width()..(y + 1) * counts.width()];
        fired += row[r.x.min(x_end)..x_end]
            .iter()
            .filter(|&&c| c >= params.theta_i)
            .count() as u32;
        if fired >= params.theta_a {
            return true;
        }
    }
    false
}

/// Thresholds shared by every detector of one bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateThresholds {
    pub theta_i: u32,
    pub theta_a: u32,
}

/// An ordered collection of spatial SNNs evaluated on one accumulation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpatialBank {
    pub snns: Vec<SpatialSnnParams>,
}

impl SpatialBank {
    pub fn len(&self) -> usize {
        self.snns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snns.is_empty()
    }

    pub fn feature_ids(&self) -> impl Iterator<Item = &str> {
        self.snns.iter().map(|s| s.feature_id.as_str())
    }

    pub fn validate(&self, geometry: Geometry) -> Result<()> {
        self.snns.iter().try_for_each(|s| s.validate(geometry))
    }

    pub fn evaluate(&self, counts: &CountGrid) -> Vec<bool> {
        self.snns
            .iter()
            .map(|s| spatial_response(counts, s))
            .collect()
    }

    pub fn extend(&mut self, other: SpatialBank) {
        self.snns.extend(other.snns);
    }

    /// A/D bank: 4x4 tiling; the eight left-half tiles are `A1..A8`, the
    /// eight right-half tiles `D1..D8`.
    pub fn constrained(geometry: Geometry, t: GateThresholds) -> Self {
        let (tw, th) = (geometry.width / 4, geometry.height / 4);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for row in 0..4 {
            for col in 0..4 {
                let region = Rect::new(col * tw, row * th, tw, th);
                let (bank, prefix) = if col < 2 {
                    (&mut left, 'A')
                } else {
                    (&mut right, 'D')
                };
                bank.push(SpatialSnnParams {
                    feature_id: format!("{prefix}{}", bank.len() + 1),
                    archetype: SpatialArchetype::ConstrainedIntensive,
                    region,
                    theta_i: t.theta_i,
                    theta_a: t.theta_a,
                });
            }
        }
        left.extend(right);
        Self { snns: left }
    }

    /// B/C bank: per half, nine overlapping plateaus of a quarter of the
    /// sensor width by half its height; `B1..B9` left, `C1..C9` right.
    pub fn plateau(geometry: Geometry, t: GateThresholds) -> Self {
        let (w, h) = geometry.dims();
        let (pw, ph) = (w / 4, h / 2);
        let mut snns = Vec::with_capacity(18);
        for (half, prefix) in [(0usize, 'B'), (1, 'C')] {
            let x0 = half * (w / 2);
            for (i, (dy, dx)) in [0, h / 4, h / 2]
                .into_iter()
                .flat_map(|dy| [0, w / 8, w / 4].into_iter().map(move |dx| (dy, dx)))
                .enumerate()
            {
                snns.push(SpatialSnnParams {
                    feature_id: format!("{prefix}{}", i + 1),
                    archetype: SpatialArchetype::PlateauMild,
                    region: Rect::new(x0 + dx, dy, pw, ph),
                    theta_i: t.theta_i,
                    theta_a: t.theta_a,
                });
            }
        }
        Self { snns }
    }

    /// G bank: two specific locations, the sensor center (`G1`) and the
    /// band above it (`G2`).
    pub fn location(geometry: Geometry, t: GateThresholds) -> Self {
        let (w, h) = geometry.dims();
        let (gw, gh) = (w / 4, h / 4);
        let spots = [(3 * w / 8, 3 * h / 8), (3 * w / 8, h / 8)];
        Self {
            snns: spots
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| SpatialSnnParams {
                    feature_id: format!("G{}", i + 1),
                    archetype: SpatialArchetype::LocationSpecific,
                    region: Rect::new(x, y, gw, gh),
                    theta_i: t.theta_i,
                    theta_a: t.theta_a,
                })
                .collect(),
        }
    }
}

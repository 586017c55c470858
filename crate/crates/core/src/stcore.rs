//! Spatiotemporal (ST) core: neighborhood thresholding followed by temporal
//! integration thresholding, applied frame by frame.
//!
//! A pixel passes the spatial stage when the events inside the square window
//! of side `delta_s + 1` anchored at it (extending toward larger `x` and `y`,
//! clipped at the border) reach `theta_s`. It passes the temporal stage when
//! it passed the spatial stage in at least `theta_t` of the last `delta_t`
//! frames. The first `delta_t - 1` frames have no full window and are
//! emitted all-zero.

use std::collections::VecDeque;

use crate::error::{Result, SgfError};
use crate::events::{Frame, Geometry};
use crate::grid::{BinaryGrid, Grid};

/// How events inside the spatial window are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpatialSum {
    /// Count of events regardless of polarity.
    #[default]
    Magnitude,
    /// Signed sum of polarities.
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StCoreParams {
    pub delta_s: usize,
    pub theta_s: u32,
    pub delta_t: usize,
    pub theta_t: u32,
    pub sum: SpatialSum,
}

impl StCoreParams {
    pub const fn new(delta_s: usize, theta_s: u32, delta_t: usize, theta_t: u32) -> Self {
        Self {
            delta_s,
            theta_s,
            delta_t,
            theta_t,
            sum: SpatialSum::Magnitude,
        }
    }

    /// Weak noise cancellation.
    pub const WEAK: StCoreParams = StCoreParams::new(1, 1, 2, 2);
    /// Strong noise cancellation.
    pub const STRONG: StCoreParams = StCoreParams::new(1, 1, 6, 5);

    pub fn validate(&self) -> Result<()> {
        if self.theta_s == 0 || self.theta_t == 0 {
            return Err(SgfError::InvalidParams(
                "ST thresholds theta_s and theta_t must be positive".into(),
            ));
        }
        if self.delta_t == 0 {
            return Err(SgfError::InvalidParams(
                "ST delta_t must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `theta_t > delta_t` is legal but can never fire.
    pub fn is_silent(&self) -> bool {
        self.theta_t as usize > self.delta_t
    }
}

/// Spatial stage over one frame.
pub fn st_spatial_stage(
    frame: &Frame,
    delta_s: usize,
    theta_s: u32,
    sum: SpatialSum,
) -> BinaryGrid {
    let geometry = frame.geometry();
    let (w, h) = geometry.dims();
    // Summed-area table with a zero guard row/column.
    let stride = w + 1;
    let mut sat = vec![0i64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0i64;
        for x in 0..w {
            row += match sum {
                SpatialSum::Magnitude => frame.magnitude(x, y) as i64,
                SpatialSum::Signed => frame.signed(x, y),
            };
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let theta = theta_s as i64;
    let mut out = Grid::new(w, h);
    let cells = out.as_mut_slice();
    for y in 0..h {
        let y1 = (y + delta_s + 1).min(h);
        for x in 0..w {
            let x1 = (x + delta_s + 1).min(w);
            let s = sat[y1 * stride + x1] - sat[y * stride + x1] - sat[y1 * stride + x]
                + sat[y * stride + x];
            cells[y * w + x] = s >= theta;
        }
    }
    out
}

/// Temporal stage: `window` holds the spatial-stage grids of frames
/// `(t - delta_t, t]`, oldest first. Returns the all-zero grid when the
/// window is not yet full.
pub fn st_temporal_stage(
    window: &[BinaryGrid],
    delta_t: usize,
    theta_t: u32,
) -> Result<BinaryGrid> {
    let Some(first) = window.first() else {
        return Err(SgfError::NoFrames);
    };
    let (w, h) = first.dims();
    if window.iter().any(|g| g.dims() != (w, h)) {
        return Err(SgfError::GeometryMismatch {
            expected: (w, h),
            got: window.iter().find(|g| g.dims() != (w, h)).unwrap().dims(),
        });
    }
    let mut out = Grid::new(w, h);
    if window.len() < delta_t {
        return Ok(out);
    }
    let recent = &window[window.len() - delta_t..];
    for (i, cell) in out.as_mut_slice().iter_mut().enumerate() {
        let n = recent.iter().filter(|g| g.as_slice()[i]).count() as u32;
        *cell = n >= theta_t;
    }
    Ok(out)
}

/// Streaming ST core holding the running temporal window.
#[derive(Debug, Clone)]
pub struct StCore {
    params: StCoreParams,
    geometry: Geometry,
    history: VecDeque<BinaryGrid>,
    counts: Vec<u32>,
}

impl StCore {
    pub fn new(params: StCoreParams, geometry: Geometry) -> Result<Self> {
        params.validate()?;
        geometry.validate()?;
        Ok(Self {
            params,
            geometry,
            history: VecDeque::with_capacity(params.delta_t + 1),
            counts: vec![0; geometry.pixels()],
        })
    }

    pub fn params(&self) -> &StCoreParams {
        &self.params
    }

    pub fn reset(&mut self) {
        self.history.clear();
        self.counts.iter_mut().for_each(|c| *c = 0);
    }

    /// Feeds one frame and returns the ST output for it.
    pub fn push(&mut self, frame: &Frame) -> Result<BinaryGrid> {
        if frame.geometry() != self.geometry {
            return Err(SgfError::GeometryMismatch {
                expected: self.geometry.dims(),
                got: frame.geometry().dims(),
            });
        }
        let p = self.params;
        let spatial = st_spatial_stage(frame, p.delta_s, p.theta_s, p.sum);
        for (c, &b) in self.counts.iter_mut().zip(spatial.as_slice()) {
            *c += b as u32;
        }
        self.history.push_back(spatial);
        if self.history.len() > p.delta_t {
            let old = self.history.pop_front().unwrap();
            for (c, &b) in self.counts.iter_mut().zip(old.as_slice()) {
                *c -= b as u32;
            }
        }
        let (w, h) = self.geometry.dims();
        if self.history.len() < p.delta_t {
            return Ok(Grid::new(w, h));
        }
        let data = self.counts.iter().map(|&c| c >= p.theta_t).collect();
        Ok(Grid::from_vec(w, h, data))
    }
}

/// Runs the ST core over a frame sequence; output length equals input length.
pub fn st_filter(frames: &[Frame], params: &StCoreParams) -> Result<Vec<BinaryGrid>> {
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    let mut core = StCore::new(*params, first.geometry())?;
    frames.iter().map(|f| core.push(f)).collect()
}

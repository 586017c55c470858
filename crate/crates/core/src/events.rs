//! Spike-event streams: parsing, serialization and spike-count framing.
//!
//! An event file is UTF-8 text with one `t,x,y,p` record per LF-terminated
//! line and no header. Geometry is supplied out of band. Polarity is written
//! as `-1` or `1`; `0` is accepted on input and read as `-1`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SgfError};
use crate::grid::Grid;

pub mod synthetic;

/// Default number of spikes binned into one frame.
pub const DEFAULT_SPIKES_PER_FRAME: usize = 1000;

/// Sensor geometry in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub width: usize,
    pub height: usize,
}

impl Geometry {
    pub const DVS128: Geometry = Geometry {
        width: 128,
        height: 128,
    };

    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(SgfError::DegenerateGeometry {
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Off,
    On,
}

impl Polarity {
    #[inline]
    pub fn sign(self) -> i32 {
        match self {
            Polarity::Off => -1,
            Polarity::On => 1,
        }
    }

    /// Accepts `-1`/`+1` and the `0`/`1` convention.
    pub fn from_int(v: i64) -> Option<Self> {
        match v {
            -1 | 0 => Some(Polarity::Off),
            1 => Some(Polarity::On),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpikeEvent {
    /// Microseconds.
    pub t: u64,
    pub x: u16,
    pub y: u16,
    pub polarity: Polarity,
}

impl SpikeEvent {
    pub fn new(t: u64, x: u16, y: u16, polarity: Polarity) -> Self {
        Self { t, x, y, polarity }
    }
}

/// A validated, time-ordered event recording of one gesture sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    geometry: Geometry,
    events: Vec<SpikeEvent>,
    pub label: Option<u8>,
}

impl EventStream {
    /// Builds a stream, checking geometry bounds and timestamp order.
    pub fn new(geometry: Geometry, events: Vec<SpikeEvent>, label: Option<u8>) -> Result<Self> {
        geometry.validate()?;
        let mut last = 0u64;
        for (i, e) in events.iter().enumerate() {
            if !geometry.contains(e.x as usize, e.y as usize) {
                return Err(SgfError::OutOfGeometry {
                    line: i + 1,
                    x: e.x as u32,
                    y: e.y as u32,
                    width: geometry.width,
                    height: geometry.height,
                });
            }
            if e.t < last {
                return Err(SgfError::DecreasingTimestamp {
                    line: i + 1,
                    t: e.t,
                });
            }
            last = e.t;
        }
        Ok(Self {
            geometry,
            events,
            label,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn into_events(self) -> Vec<SpikeEvent> {
        self.events
    }
}

/// Parses line-delimited `t,x,y,p` records.
///
/// Empty lines are rejected except for a final trailing newline. Errors
/// carry the 1-based line number of the offending record.
pub fn parse_event_stream(text: &str, geometry: Geometry) -> Result<EventStream> {
    geometry.validate()?;
    let mut events = Vec::new();
    let mut last_t = 0u64;
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return EventStream::new(geometry, events, None);
    }
    for (idx, raw) in body.split('\n').enumerate() {
        let line = idx + 1;
        let rec = raw.strip_suffix('\r').unwrap_or(raw);
        let fields: Vec<&str> = rec.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(SgfError::Parse {
                line,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let int = |s: &str, name: &str| -> Result<i64> {
            s.parse::<i64>().map_err(|_| SgfError::Parse {
                line,
                message: format!("field {name} is not an integer: {s:?}"),
            })
        };
        let t = int(fields[0], "t")?;
        let x = int(fields[1], "x")?;
        let y = int(fields[2], "y")?;
        let p = int(fields[3], "p")?;
        if t < 0 {
            return Err(SgfError::Parse {
                line,
                message: format!("negative timestamp {t}"),
            });
        }
        let polarity = Polarity::from_int(p).ok_or_else(|| SgfError::Parse {
            line,
            message: format!("polarity must be -1, 0, 1 or +1, found {p}"),
        })?;
        if x < 0 || y < 0 || !geometry.contains(x as usize, y as usize) {
            return Err(SgfError::OutOfGeometry {
                line,
                x: x.max(0) as u32,
                y: y.max(0) as u32,
                width: geometry.width,
                height: geometry.height,
            });
        }
        let t = t as u64;
        if t < last_t {
            return Err(SgfError::DecreasingTimestamp { line, t });
        }
        last_t = t;
        events.push(SpikeEvent::new(t, x as u16, y as u16, polarity));
    }
    EventStream::new(geometry, events, None)
}

/// Source of event streams by file path.
///
/// [`TextEventLoader`] reads the `t,x,y,p` record format. A reader for camera
/// recordings, such as the AEDAT files of the public DVS gesture dataset, can
/// implement this trait and be handed to the batch helpers in
/// [`crate::pipeline`] to train and evaluate on real data; such recordings must
/// first be cut into one file (or one stream) per gesture sample.
pub trait EventLoader {
    fn load(&self, path: &Path, geometry: Geometry) -> Result<EventStream>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TextEventLoader;

impl EventLoader for TextEventLoader {
    fn load(&self, path: &Path, geometry: Geometry) -> Result<EventStream> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| SgfError::Io {
            path: name.clone(),
            message: e.to_string(),
        })?;
        parse_event_stream(&text, geometry).map_err(|e| SgfError::Io {
            path: name,
            message: e.to_string(),
        })
    }
}

/// Canonical text form: `-1`/`1` polarity, LF after every record.
pub fn serialize_event_stream(stream: &EventStream) -> String {
    let mut out = String::with_capacity(stream.len() * 16);
    for e in stream.events() {
        let _ = writeln!(out, "{},{},{},{}", e.t, e.x, e.y, e.polarity.sign());
    }
    out
}

/// One spike-count bin rendered onto the pixel grid.
///
/// ON and OFF events are kept in separate count planes so that the signed
/// sum and the event magnitude are both available per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub index: usize,
    on: Grid<u32>,
    off: Grid<u32>,
}

impl Frame {
    pub fn empty(index: usize, geometry: Geometry) -> Self {
        Self {
            index,
            on: Grid::new(geometry.width, geometry.height),
            off: Grid::new(geometry.width, geometry.height),
        }
    }

    pub fn add_event(&mut self, e: &SpikeEvent) {
        let (x, y) = (e.x as usize, e.y as usize);
        match e.polarity {
            Polarity::On => *self.on.get_mut(x, y) += 1,
            Polarity::Off => *self.off.get_mut(x, y) += 1,
        }
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::new(self.on.width(), self.on.height())
    }

    /// Signed spike sum at a pixel.
    #[inline]
    pub fn signed(&self, x: usize, y: usize) -> i64 {
        *self.on.get(x, y) as i64 - *self.off.get(x, y) as i64
    }

    /// Number of events (of either polarity) at a pixel.
    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> u32 {
        self.on.get(x, y) + self.off.get(x, y)
    }

    pub fn signed_grid(&self) -> Grid<i64> {
        let (w, h) = self.on.dims();
        let data = self
            .on
            .as_slice()
            .iter()
            .zip(self.off.as_slice())
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        Grid::from_vec(w, h, data)
    }

    pub fn magnitude_grid(&self) -> Grid<u32> {
        let (w, h) = self.on.dims();
        let data = self
            .on
            .as_slice()
            .iter()
            .zip(self.off.as_slice())
            .map(|(&a, &b)| a + b)
            .collect();
        Grid::from_vec(w, h, data)
    }

    /// Total events binned into this frame.
    pub fn event_count(&self) -> u64 {
        self.on
            .as_slice()
            .iter()
            .chain(self.off.as_slice())
            .map(|&c| c as u64)
            .sum()
    }
}

/// Bins consecutive runs of exactly `spikes_per_frame` events into frames.
///
/// A trailing partial run is dropped, so every frame carries the same
/// spike count.
pub fn bin_frames(stream: &EventStream, spikes_per_frame: usize) -> Result<Vec<Frame>> {
    if spikes_per_frame == 0 {
        return Err(SgfError::InvalidParams(
            "spikes_per_frame must be at least 1".into(),
        ));
    }
    let geometry = stream.geometry();
    Ok(stream
        .events()
        .chunks_exact(spikes_per_frame)
        .enumerate()
        .map(|(index, chunk)| {
            let mut frame = Frame::empty(index, geometry);
            chunk.iter().for_each(|e| frame.add_event(e));
            frame
        })
        .collect())
}

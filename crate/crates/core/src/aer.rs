//! Address-event packets: a 15-bit codec, a bounded FIFO channel with
//! backpressure, and LUT-based address translation.
//!
//! Word layout: bits 14..8 column, bits 7..1 row, bit 0 polarity.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Result, SgfError};
use crate::events::{Geometry, Polarity, SpikeEvent};

pub const WORD_BITS: u32 = 15;
pub const ADDRESS_LIMIT: u8 = 1 << 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AerPacket {
    pub col: u8,
    pub row: u8,
    pub polarity: Polarity,
}

impl AerPacket {
    pub fn new(col: u8, row: u8, polarity: Polarity) -> Result<Self> {
        let p = Self { col, row, polarity };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.col >= ADDRESS_LIMIT {
            return Err(SgfError::FieldOutOfRange {
                field: "col",
                value: self.col.into(),
            });
        }
        if self.row >= ADDRESS_LIMIT {
            return Err(SgfError::FieldOutOfRange {
                field: "row",
                value: self.row.into(),
            });
        }
        Ok(())
    }

    /// Packet for an event; x is the column and y the row.
    pub fn from_event(e: &SpikeEvent) -> Result<Self> {
        let field = |name, v: u16| {
            u8::try_from(v)
                .ok()
                .filter(|&b| b < ADDRESS_LIMIT)
                .ok_or(SgfError::FieldOutOfRange {
                    field: name,
                    value: v.into(),
                })
        };
        Ok(Self {
            col: field("col", e.x)?,
            row: field("row", e.y)?,
            polarity: e.polarity,
        })
    }
}

pub fn encode(p: &AerPacket) -> Result<u16> {
    p.check()?;
    let pol = matches!(p.polarity, Polarity::On) as u16;
    Ok((p.col as u16) << 8 | (p.row as u16) << 1 | pol)
}

pub fn decode(word: u32) -> Result<AerPacket> {
    if word >= 1 << WORD_BITS {
        return Err(SgfError::WordOutOfRange(word));
    }
    Ok(AerPacket {
        col: (word >> 8 & 0x7f) as u8,
        row: (word >> 1 & 0x7f) as u8,
        polarity: if word & 1 == 1 {
            Polarity::On
        } else {
            Polarity::Off
        },
    })
}

/// One packet's passage through a FIFO, in scheduler steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    /// Position in the send order.
    pub seq: usize,
    pub word: u16,
    pub enqueued: u64,
    pub dequeued: u64,
}

/// Bounded single-producer/single-consumer queue of encoded packets.
///
/// A full queue refuses pushes; the sender is expected to retry later.
#[derive(Debug, Clone)]
pub struct AerFifo {
    capacity: usize,
    queue: VecDeque<(usize, u16, u64)>,
    step: u64,
    next_seq: usize,
    high_watermark: usize,
    log: Vec<Delivery>,
}

impl AerFifo {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(SgfError::InvalidParams(
                "FIFO capacity must be positive".into(),
            ));
        }
        Ok(Self {
            capacity,
            queue: VecDeque::with_capacity(capacity),
            step: 0,
            next_seq: 0,
            high_watermark: 0,
            log: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() == self.capacity
    }

    pub fn high_watermark(&self) -> usize {
        self.high_watermark
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Advances the scheduler clock by one step.
    pub fn tick(&mut self) {
        self.step += 1;
    }

    /// Enqueues at the current step; hands the word back when full.
    pub fn try_push(&mut self, word: u16) -> std::result::Result<(), u16> {
        if self.is_full() {
            return Err(word);
        }
        self.queue.push_back((self.next_seq, word, self.step));
        self.next_seq += 1;
        self.high_watermark = self.high_watermark.max(self.queue.len());
        Ok(())
    }

    /// Dequeues at the current step and records the delivery.
    pub fn pop(&mut self) -> Option<u16> {
        let (seq, word, enqueued) = self.queue.pop_front()?;
        self.log.push(Delivery {
            seq,
            word,
            enqueued,
            dequeued: self.step,
        });
        Some(word)
    }

    pub fn log(&self) -> &[Delivery] {
        &self.log
    }

    pub fn into_log(self) -> Vec<Delivery> {
        self.log
    }
}

/// Per-step activity of both ends of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepBudget {
    /// Packets the sender offers per step.
    pub send: usize,
    /// Packets the receiver takes per step.
    pub receive: usize,
}

/// Pushes `words` through `fifo` under a per-step schedule until all are
/// delivered. A blocked sender waits; nothing is dropped.
///
/// `schedule(step)` gives the budgets of each step and must eventually let
/// the receiver make progress.
pub fn fifo_transfer<F>(words: &[u16], fifo: &mut AerFifo, mut schedule: F) -> Vec<u16>
where
    F: FnMut(u64) -> StepBudget,
{
    let mut received = Vec::with_capacity(words.len());
    let mut next = 0;
    while received.len() < words.len() {
        let budget = schedule(fifo.step());
        for _ in 0..budget.send {
            if next == words.len() || fifo.try_push(words[next]).is_err() {
                break;
            }
            next += 1;
        }
        for _ in 0..budget.receive {
            match fifo.pop() {
                Some(w) => received.push(w),
                None => break,
            }
        }
        fifo.tick();
    }
    received
}

/// Destination core address of a translated packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoreAddress {
    pub core: u16,
    pub offset: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AddressLut {
    map: HashMap<(u8, u8), CoreAddress>,
}

impl AddressLut {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, col: u8, row: u8, dest: CoreAddress) {
        self.map.insert((col, row), dest);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Row-major mapping of every pixel of `geometry` into one core.
    pub fn row_major(geometry: Geometry, core: u16) -> Result<Self> {
        geometry.validate()?;
        if geometry.width > ADDRESS_LIMIT as usize || geometry.height > ADDRESS_LIMIT as usize {
            return Err(SgfError::InvalidParams(format!(
                "{}x{} exceeds the 7-bit address space",
                geometry.width, geometry.height
            )));
        }
        let mut lut = Self::new();
        for row in 0..geometry.height {
            for col in 0..geometry.width {
                lut.insert(
                    col as u8,
                    row as u8,
                    CoreAddress {
                        core,
                        offset: (row * geometry.width + col) as u32,
                    },
                );
            }
        }
        Ok(lut)
    }
}

pub fn translate(lut: &AddressLut, p: &AerPacket) -> Result<CoreAddress> {
    lut.map
        .get(&(p.col, p.row))
        .copied()
        .ok_or(SgfError::TranslationFault {
            col: p.col,
            row: p.row,
        })
}

/// Hex listing: one `tttttttt xxxx` line per event (timestamp, word).
pub fn hex_dump(events: &[SpikeEvent]) -> Result<String> {
    let mut out = String::with_capacity(events.len() * 16);
    for e in events {
        let w = encode(&AerPacket::from_event(e)?)?;
        let _ = writeln!(out, "{:x} {:04x}", e.t, w);
    }
    Ok(out)
}

/// Inverse of [`hex_dump`].
pub fn hex_undump(text: &str) -> Result<Vec<SpikeEvent>> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |m: &str| SgfError::Parse {
            line: i + 1,
            message: m.to_string(),
        };
        let (t, w) = line
            .split_once(' ')
            .ok_or_else(|| parse_err("expected `<time> <word>`"))?;
        let t = u64::from_str_radix(t, 16).map_err(|_| parse_err("bad hex timestamp"))?;
        let w = u32::from_str_radix(w.trim(), 16).map_err(|_| parse_err("bad hex word"))?;
        let p = decode(w).map_err(|e| parse_err(&e.to_string()))?;
        events.push(SpikeEvent::new(t, p.col.into(), p.row.into(), p.polarity));
    }
    Ok(events)
}

//! Parameter, memory and operation accounting for SGF and two reference
//! networks (ConvNet and PAT).
//!
//! Every quantity is kept as an exact count of thirds so that the PAT graph
//! attention rows, which are fractional, add up without rounding. Unit
//! conversion (KB = bytes / 1024, MOPs = ops / 2^20) happens only when a
//! report is rendered.

use std::fmt;
use std::fmt::Write as _;
use std::ops::Add;

use crate::error::{Result, SgfError};

/// A non-negative rational with denominator 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Thirds(u128);

impl Thirds {
    pub const ZERO: Thirds = Thirds(0);

    pub fn int(n: u64) -> Self {
        Thirds(n as u128 * 3)
    }

    /// `n / 3`.
    pub fn from_thirds(n: u128) -> Self {
        Thirds(n)
    }

    pub fn thirds(self) -> u128 {
        self.0
    }

    /// The value when it is an integer.
    pub fn as_int(self) -> Option<u128> {
        self.0.is_multiple_of(3).then_some(self.0 / 3)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 3.0
    }
}

impl Add for Thirds {
    type Output = Thirds;

    fn add(self, rhs: Thirds) -> Thirds {
        Thirds(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Thirds {
    fn sum<I: Iterator<Item = Thirds>>(iter: I) -> Thirds {
        iter.fold(Thirds::ZERO, Add::add)
    }
}

/// Integers print as such; fractions with one decimal.
impl fmt::Display for Thirds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_int() {
            Some(n) => write!(f, "{n}"),
            None => {
                // round half up at one decimal: (10 n / 3) rounded
                let tenths = (self.0 * 10 + 1) / 3;
                write!(f, "{}.{}", tenths / 10, tenths % 10)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub label: String,
    /// Descriptive columns, matching the report's `columns` headers.
    pub fields: Vec<String>,
    /// One value per entry of the report's `quantities`.
    pub values: Vec<Thirds>,
    /// Set when a printed table value disagrees with its own formula.
    pub note: Option<String>,
}

/// Rendering of a total in a larger unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConversion {
    pub suffix: &'static str,
    pub divisor: f64,
    pub decimals: usize,
}

pub const KB: UnitConversion = UnitConversion {
    suffix: "KB",
    divisor: 1024.0,
    decimals: 2,
};

pub const MOPS: UnitConversion = UnitConversion {
    suffix: "MOPs",
    divisor: 1_048_576.0,
    decimals: 3,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub title: String,
    pub label_header: String,
    pub columns: Vec<String>,
    pub quantities: Vec<String>,
    /// Optional per-quantity conversion shown next to the totals.
    pub conversions: Vec<Option<UnitConversion>>,
    pub rows: Vec<CostRow>,
}

impl CostReport {
    /// Column-wise sums over all rows.
    pub fn totals(&self) -> Vec<Thirds> {
        (0..self.quantities.len())
            .map(|q| self.rows.iter().map(|r| r.values[q]).sum())
            .collect()
    }

    /// Totals after unit conversion, `None` where the quantity has none.
    pub fn converted_totals(&self) -> Vec<Option<f64>> {
        self.totals()
            .iter()
            .zip(&self.conversions)
            .map(|(t, c)| c.map(|c| t.as_f64() / c.divisor))
            .collect()
    }

    fn total_cells(&self) -> Vec<String> {
        self.totals()
            .iter()
            .zip(&self.conversions)
            .map(|(t, c)| match c {
                Some(c) => format!(
                    "{t} ({:.*} {})",
                    c.decimals,
                    t.as_f64() / c.divisor,
                    c.suffix
                ),
                None => t.to_string(),
            })
            .collect()
    }

    fn has_notes(&self) -> bool {
        self.rows.iter().any(|r| r.note.is_some())
    }

    /// Aligned table; the last line carries the totals.
    pub fn to_text(&self) -> String {
        let mut header: Vec<String> = vec![self.label_header.clone()];
        header.extend(self.columns.iter().cloned());
        header.extend(self.quantities.iter().cloned());
        let notes = self.has_notes();
        if notes {
            header.push("note".into());
        }
        let mut table: Vec<Vec<String>> = vec![header];
        for r in &self.rows {
            let mut line = vec![r.label.clone()];
            line.extend(r.fields.iter().cloned());
            line.extend(r.values.iter().map(Thirds::to_string));
            if notes {
                line.push(r.note.clone().unwrap_or_default());
            }
            table.push(line);
        }
        let ncols = table[0].len();
        let widths: Vec<usize> = (0..ncols)
            .map(|c| table.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("{}\n", self.title);
        for line in &table {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c + 1 == ncols {
                        s.clone()
                    } else {
                        format!("{s:<w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        let _ = writeln!(out, "Total {}", self.total_cells().join(", "));
        out
    }

    /// Machine-readable mirror of [`CostReport::to_text`].
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = vec![csv_field(&self.label_header)];
        header.extend(self.columns.iter().map(|c| csv_field(c)));
        header.extend(self.quantities.iter().map(|c| csv_field(c)));
        header.push("note".into());
        let mut out = header.join(",") + "\n";
        for r in &self.rows {
            let mut line = vec![csv_field(&r.label)];
            line.extend(r.fields.iter().map(|f| csv_field(f)));
            line.extend(r.values.iter().map(Thirds::to_string));
            line.push(csv_field(r.note.as_deref().unwrap_or("")));
            out += &(line.join(",") + "\n");
        }
        let mut total = vec!["Total".to_string()];
        total.extend(self.columns.iter().map(|_| String::new()));
        total.extend(self.totals().iter().map(Thirds::to_string));
        let conv: Vec<String> = self
            .totals()
            .iter()
            .zip(&self.conversions)
            .filter_map(|(t, c)| {
                c.map(|c| format!("{:.*} {}", c.decimals, t.as_f64() / c.divisor, c.suffix))
            })
            .collect();
        total.push(csv_field(&conv.join(" ")));
        out += &(total.join(",") + "\n");
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvLayerSpec {
    pub ic: u64,
    pub oc: u64,
    pub k: u64,
    pub s: u64,
    pub pad: u64,
    pub h_out: u64,
    pub w_out: u64,
}

impl ConvLayerSpec {
    /// Square output layer.
    pub const fn new(ic: u64, oc: u64, k: u64, s: u64, pad: u64, out: u64) -> Self {
        Self {
            ic,
            oc,
            k,
            s,
            pad,
            h_out: out,
            w_out: out,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.ic, self.oc, self.k, self.s, self.h_out, self.w_out].contains(&0) {
            return Err(SgfError::InvalidParams(format!(
                "conv layer has a zero dimension: {self:?}"
            )));
        }
        Ok(())
    }

    /// Output size implied by an input size, if the layer fits.
    pub fn implied_out(&self, input: u64) -> Option<u64> {
        let span = (input + 2 * self.pad).checked_sub(self.k)?;
        Some(span / self.s + 1)
    }
}

/// `(params, macs)` with params = ic·oc·k² and macs = params·h_out·w_out.
pub fn conv_cost(spec: &ConvLayerSpec) -> (u64, u64) {
    let params = spec.ic * spec.oc * spec.k * spec.k;
    (params, params * spec.h_out * spec.w_out)
}

pub const CONVNET_LAYERS: [ConvLayerSpec; 16] = [
    ConvLayerSpec::new(6, 12, 3, 2, 0, 31),
    ConvLayerSpec::new(12, 252, 4, 2, 0, 14),
    ConvLayerSpec::new(252, 256, 1, 1, 0, 14),
    ConvLayerSpec::new(256, 256, 2, 2, 0, 7),
    ConvLayerSpec::new(256, 512, 3, 1, 1, 7),
    ConvLayerSpec::new(512, 512, 1, 1, 0, 7),
    ConvLayerSpec::new(512, 512, 1, 1, 0, 7),
    ConvLayerSpec::new(512, 512, 1, 1, 0, 7),
    ConvLayerSpec::new(512, 512, 2, 2, 0, 3),
    ConvLayerSpec::new(512, 1024, 3, 1, 1, 3),
    ConvLayerSpec::new(1024, 1024, 1, 1, 0, 3),
    ConvLayerSpec::new(1024, 1024, 1, 1, 0, 3),
    ConvLayerSpec::new(1024, 1024, 2, 2, 0, 1),
    ConvLayerSpec::new(1024, 1024, 1, 1, 0, 1),
    ConvLayerSpec::new(1024, 968, 1, 1, 0, 1),
    ConvLayerSpec::new(968, 2640, 1, 1, 0, 1),
];

pub fn convnet_report() -> CostReport {
    let rows = CONVNET_LAYERS
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let (p, m) = conv_cost(l);
            CostRow {
                label: format!("{}", i + 1),
                fields: [l.ic, l.oc, l.k, l.s, l.pad, l.h_out]
                    .iter()
                    .map(u64::to_string)
                    .collect(),
                values: vec![Thirds::int(p), Thirds::int(m)],
                note: None,
            }
        })
        .collect();
    CostReport {
        title: "ConvNet parameters and MACs".into(),
        label_header: "layer".into(),
        columns: ["IC", "OC", "K", "S", "Pad", "H/W(out)"]
            .map(String::from)
            .to_vec(),
        quantities: vec!["Parameters".into(), "MACs".into()],
        conversions: vec![None, None],
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatLayerKind {
    Gat,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatLayerSpec {
    pub kind: PatLayerKind,
    pub n: u64,
    pub c_in: u64,
    pub c_out: u64,
}

/// `(params, macs)` of a shared point-wise MLP: c_in·c_out and n times that.
pub fn mlp_cost(spec: &PatLayerSpec) -> (u64, u64) {
    let params = spec.c_in * spec.c_out;
    (params, spec.n * params)
}

pub const PAT_LAYERS: [PatLayerSpec; 6] = [
    PatLayerSpec {
        kind: PatLayerKind::Gat,
        n: 1024,
        c_in: 1024,
        c_out: 1024,
    },
    PatLayerSpec {
        kind: PatLayerKind::Gat,
        n: 384,
        c_in: 1024,
        c_out: 1024,
    },
    PatLayerSpec {
        kind: PatLayerKind::Gat,
        n: 128,
        c_in: 1024,
        c_out: 1024,
    },
    PatLayerSpec {
        kind: PatLayerKind::Mlp,
        n: 64,
        c_in: 1024,
        c_out: 512,
    },
    PatLayerSpec {
        kind: PatLayerKind::Mlp,
        n: 64,
        c_in: 512,
        c_out: 256,
    },
    PatLayerSpec {
        kind: PatLayerKind::Mlp,
        n: 64,
        c_in: 256,
        c_out: 10,
    },
];

/// Published GAT costs in thirds, keyed by node count. There is no formula
/// for these; they are the table's own values.
const GAT_TABLE: [(u64, u128, u128); 3] = [
    (1024, 1_048_576, 2_147_483_648),
    (384, 1_048_576, 553_648_128),
    (128, 1_048_576, 150_994_944),
];

fn gat_cost(spec: &PatLayerSpec) -> Option<(Thirds, Thirds)> {
    GAT_TABLE
        .iter()
        .find(|(n, _, _)| *n == spec.n && spec.c_in == 1024 && spec.c_out == 1024)
        .map(|&(_, p, m)| (Thirds::from_thirds(p), Thirds::from_thirds(m)))
}

pub fn pat_report() -> CostReport {
    let rows = PAT_LAYERS
        .iter()
        .map(|l| {
            let (values, label) = match l.kind {
                PatLayerKind::Gat => {
                    let (p, m) = gat_cost(l).expect("every GAT layer has a table entry");
                    (vec![p, m], "GAT")
                }
                PatLayerKind::Mlp => {
                    let (p, m) = mlp_cost(l);
                    (vec![Thirds::int(p), Thirds::int(m)], "MLP")
                }
            };
            CostRow {
                label: label.into(),
                fields: vec![l.n.to_string(), l.c_in.to_string(), l.c_out.to_string()],
                values,
                note: None,
            }
        })
        .collect();
    CostReport {
        title: "PAT parameters and MACs".into(),
        label_header: "Layer type".into(),
        columns: vec!["N".into(), "c/IC".into(), "OC".into()],
        quantities: vec!["#Parameters".into(), "#MACs".into()],
        conversions: vec![None, None],
        rows,
    }
}

/// Sub-network counts per SGF layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SgfInventory {
    pub st_core_1: u64,
    pub st_core_2: u64,
    pub ad: u64,
    pub bc: u64,
    pub g: u64,
    pub ef: u64,
    pub hijk: u64,
}

impl SgfInventory {
    /// The counts of the published system.
    pub const PUBLISHED: SgfInventory = SgfInventory {
        st_core_1: 1,
        st_core_2: 1,
        ad: 16,
        bc: 18,
        g: 2,
        ef: 160,
        hijk: 2,
    };

    fn counts(&self) -> [u64; 7] {
        [
            self.st_core_1,
            self.st_core_2,
            self.ad,
            self.bc,
            self.g,
            self.ef,
            self.hijk,
        ]
    }
}

const SGF_LAYERS: [&str; 7] = [
    "ST core 1",
    "ST core 2",
    "A/D",
    "B/C",
    "G",
    "E/F",
    "H/I/J/K",
];

/// Per-sub-network bytes: `(calculation, formula bits, value used)`.
const SGF_SIZE: [(&str, u64, u64); 7] = [
    ("42*42*2*8/8", 42 * 42 * 2 * 8, 3528),
    ("128*128*2*8/8", 128 * 128 * 2 * 8, 32768),
    ("(110+2*8)/8=19", 110 + 2 * 8, 19),
    ("(110+2*8)/8=19", 110 + 2 * 8, 19),
    ("2*8/8", 2 * 8, 2),
    ("3*8/8", 3 * 8, 3),
    ("8/8", 8, 16),
];

/// Per-sub-network ops: `(calculation, ops)`.
const SGF_OPS: [(&str, u64); 7] = [
    ("3*3*42*42*80+42*42*80", 3 * 3 * 42 * 42 * 80 + 42 * 42 * 80),
    ("1*1*128*128*80+128*128*80", 128 * 128 * 80 + 128 * 128 * 80),
    ("42*42+(42*42-1)+1", 42 * 42 + (42 * 42 - 1) + 1),
    ("42*42+(42*42-1)+1", 42 * 42 + (42 * 42 - 1) + 1),
    ("42*42+(42*42-1)+1", 42 * 42 + (42 * 42 - 1) + 1),
    ("(30*30+30)*3*10", (30 * 30 + 30) * 3 * 10),
    ("(30*30+30)*3*10", (30 * 30 + 30) * 3 * 10),
];

/// Printed per-row totals that disagree with their formula.
const SGF_OPS_PRINTED: [(usize, &str); 2] = [(2, "56.0 KOPs"), (6, "54.5 KOPs")];

/// Model size; the per-sub-network constants come from the published table.
pub fn sgf_size_report(inv: &SgfInventory) -> CostReport {
    let rows = SGF_LAYERS
        .iter()
        .zip(SGF_SIZE)
        .zip(inv.counts())
        .map(|((&label, (calc, bits, used)), n)| {
            let note = (bits != used * 8).then(|| {
                format!(
                    "formula gives {} B per sub-network, table uses {used}",
                    bits as f64 / 8.0
                )
            });
            CostRow {
                label: label.into(),
                fields: vec![calc.into(), n.to_string()],
                values: vec![Thirds::int(used * n)],
                note,
            }
        })
        .collect();
    CostReport {
        title: "SGF model size".into(),
        label_header: "Layer".into(),
        columns: vec!["Calculation".into(), "Number".into()],
        quantities: vec!["Bytes".into()],
        conversions: vec![Some(KB)],
        rows,
    }
}

/// Operation count from the published per-row formulas.
pub fn sgf_ops_report(inv: &SgfInventory) -> CostReport {
    let rows = SGF_LAYERS
        .iter()
        .zip(SGF_OPS)
        .zip(inv.counts())
        .enumerate()
        .map(|(i, ((&label, (calc, ops)), n))| {
            let total = ops * n;
            let note = SGF_OPS_PRINTED
                .iter()
                .find(|(row, _)| *row == i)
                .map(|(_, printed)| format!("printed {printed}; formula gives {total} ops"));
            CostRow {
                label: label.into(),
                fields: vec![calc.into(), n.to_string()],
                values: vec![Thirds::int(total)],
                note,
            }
        })
        .collect();
    CostReport {
        title: "SGF operation count".into(),
        label_header: "Layer".into(),
        columns: vec!["Calculation".into(), "Number".into()],
        quantities: vec!["Ops".into()],
        conversions: vec![Some(MOPS)],
        rows,
    }
}

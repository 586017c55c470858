//! Run configuration: a flat `key = value` document with `[section]`
//! headers. Every key has a default; unknown keys are rejected by name.
//!
//! Lists are comma-separated. Comments start with `#` or `;`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Result, SgfError};
use crate::events::{Geometry, DEFAULT_SPIKES_PER_FRAME};
use crate::sgf::{SgfModel, SgfUnit, Similarity, UnitId};
use crate::snn_spatial::{GateThresholds, SpatialBank};
use crate::snn_temporal::{Direction, RotationalVariants, TemporalBank, TrackerParams};
use crate::stcore::{SpatialSum, StCoreParams};

/// Spatial banks a unit may include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialBankKind {
    Constrained,
    Plateau,
    Location,
}

impl SpatialBankKind {
    fn name(self) -> &'static str {
        match self {
            SpatialBankKind::Constrained => "ad",
            SpatialBankKind::Plateau => "bc",
            SpatialBankKind::Location => "g",
        }
    }
}

impl FromStr for SpatialBankKind {
    type Err = SgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ad" => Ok(SpatialBankKind::Constrained),
            "bc" => Ok(SpatialBankKind::Plateau),
            "g" => Ok(SpatialBankKind::Location),
            _ => Err(SgfError::InvalidParams(format!(
                "unknown spatial bank {s:?}"
            ))),
        }
    }
}

/// Synthetic-suite settings used by `generate` and the acceptance runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub noise: f64,
    pub seed: u64,
    pub train_per_class: usize,
    pub test_per_class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub spikes_per_frame: usize,
    pub similarity: Similarity,
    pub st_a: StCoreParams,
    pub st_b: StCoreParams,
    pub st_c: StCoreParams,
    pub ad: GateThresholds,
    pub bc: GateThresholds,
    pub g: GateThresholds,
    pub unit_a_spatial: Vec<SpatialBankKind>,
    pub unit_c_spatial: Vec<SpatialBankKind>,
    pub hijk: TrackerParams,
    pub hijk_min_run: usize,
    pub ef: RotationalVariants,
    pub fifo_capacity: usize,
    pub suite: SuiteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::DVS128,
            spikes_per_frame: DEFAULT_SPIKES_PER_FRAME,
            similarity: Similarity::Nor,
            st_a: StCoreParams::new(1, 2, 2, 2),
            st_b: StCoreParams::new(2, 4, 3, 3),
            st_c: StCoreParams::new(2, 4, 3, 3),
            ad: GateThresholds {
                theta_i: 16,
                theta_a: 8,
            },
            bc: GateThresholds {
                theta_i: 2,
                theta_a: 300,
            },
            g: GateThresholds {
                theta_i: 16,
                theta_a: 8,
            },
            unit_a_spatial: vec![
                SpatialBankKind::Constrained,
                SpatialBankKind::Plateau,
                SpatialBankKind::Location,
            ],
            unit_c_spatial: vec![SpatialBankKind::Constrained, SpatialBankKind::Location],
            hijk: TrackerParams {
                direction: Direction::Increasing,
                delta_t: 2,
                theta_l: 0,
                theta_te: 4,
                region: None,
            },
            hijk_min_run: 12,
            ef: RotationalVariants::default(),
            fifo_capacity: 256,
            suite: SuiteConfig {
                noise: 0.0,
                seed: 1,
                train_per_class: 15,
                test_per_class: 10,
            },
        }
    }
}

/// Raw `section.key -> (value, line)` map with consumption tracking.
struct Document {
    entries: BTreeMap<String, (String, usize)>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| SgfError::Config {
                    key: line.to_string(),
                    message: format!("line {}: unterminated section header", i + 1),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| SgfError::Config {
                key: line.to_string(),
                message: format!("line {}: expected key = value", i + 1),
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            if entries
                .insert(key.clone(), (v.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(SgfError::Config {
                    key,
                    message: format!("line {}: duplicate key", i + 1),
                });
            }
        }
        Ok(Self { entries })
    }

    fn take<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()> {
        if let Some((v, line)) = self.entries.remove(key) {
            *slot = v.parse().map_err(|_| SgfError::Config {
                key: key.to_string(),
                message: format!("line {line}: cannot parse {v:?}"),
            })?;
        }
        Ok(())
    }

    fn take_list<T: FromStr>(&mut self, key: &str, slot: &mut Vec<T>) -> Result<()> {
        if let Some((v, line)) = self.entries.remove(key) {
            *slot = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| SgfError::Config {
                        key: key.to_string(),
                        message: format!("line {line}: cannot parse list item {s:?}"),
                    })
                })
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    fn take_with<T>(
        &mut self,
        key: &str,
        slot: &mut T,
        f: impl Fn(&str) -> Option<T>,
    ) -> Result<()> {
        if let Some((v, line)) = self.entries.remove(key) {
            *slot = f(&v).ok_or_else(|| SgfError::Config {
                key: key.to_string(),
                message: format!("line {line}: invalid value {v:?}"),
            })?;
        }
        Ok(())
    }
}

fn parse_sum(s: &str) -> Option<SpatialSum> {
    match s {
        "magnitude" => Some(SpatialSum::Magnitude),
        "signed" => Some(SpatialSum::Signed),
        _ => None,
    }
}

fn sum_name(s: SpatialSum) -> &'static str {
    match s {
        SpatialSum::Magnitude => "magnitude",
        SpatialSum::Signed => "signed",
    }
}

impl RunConfig {
    /// Parses a document on top of the defaults, then validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::parse(text)?;
        let mut c = RunConfig::default();
        doc.take("events.width", &mut c.geometry.width)?;
        doc.take("events.height", &mut c.geometry.height)?;
        doc.take("events.spikes_per_frame", &mut c.spikes_per_frame)?;
        doc.take("model.similarity", &mut c.similarity)?;
        for (unit, st) in [
            ("unit_a", &mut c.st_a),
            ("unit_b", &mut c.st_b),
            ("unit_c", &mut c.st_c),
        ] {
            doc.take(&format!("{unit}.st.delta_s"), &mut st.delta_s)?;
            doc.take(&format!("{unit}.st.theta_s"), &mut st.theta_s)?;
            doc.take(&format!("{unit}.st.delta_t"), &mut st.delta_t)?;
            doc.take(&format!("{unit}.st.theta_t"), &mut st.theta_t)?;
            doc.take_with(&format!("{unit}.st.sum"), &mut st.sum, parse_sum)?;
        }
        for (bank, t) in [("ad", &mut c.ad), ("bc", &mut c.bc), ("g", &mut c.g)] {
            doc.take(&format!("spatial.{bank}.theta_i"), &mut t.theta_i)?;
            doc.take(&format!("spatial.{bank}.theta_a"), &mut t.theta_a)?;
        }
        doc.take_list("unit_a.spatial", &mut c.unit_a_spatial)?;
        doc.take_list("unit_c.spatial", &mut c.unit_c_spatial)?;
        doc.take("temporal.hijk.delta_t", &mut c.hijk.delta_t)?;
        doc.take("temporal.hijk.theta_l", &mut c.hijk.theta_l)?;
        doc.take("temporal.hijk.theta_te", &mut c.hijk.theta_te)?;
        doc.take("temporal.hijk.min_run", &mut c.hijk_min_run)?;
        doc.take_list("temporal.ef.delta_t", &mut c.ef.delta_t)?;
        doc.take_list("temporal.ef.theta_l", &mut c.ef.theta_l)?;
        doc.take_list("temporal.ef.theta_te", &mut c.ef.theta_te)?;
        doc.take_list("temporal.ef.min_run", &mut c.ef.min_run)?;
        doc.take("aer.fifo_capacity", &mut c.fifo_capacity)?;
        doc.take("synthetic.noise", &mut c.suite.noise)?;
        doc.take("synthetic.seed", &mut c.suite.seed)?;
        doc.take("synthetic.train_per_class", &mut c.suite.train_per_class)?;
        doc.take("synthetic.test_per_class", &mut c.suite.test_per_class)?;
        if let Some((key, (_, line))) = doc.entries.into_iter().next() {
            return Err(SgfError::Config {
                key,
                message: format!("line {line}: unknown key"),
            });
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(SgfError::Config {
                key: key.to_string(),
                message: message.to_string(),
            })
        };
        if self.geometry.width == 0 {
            return bad("events.width", "must be positive");
        }
        if self.geometry.height == 0 {
            return bad("events.height", "must be positive");
        }
        if self.spikes_per_frame == 0 {
            return bad("events.spikes_per_frame", "must be positive");
        }
        for (unit, st) in [
            ("unit_a", &self.st_a),
            ("unit_b", &self.st_b),
            ("unit_c", &self.st_c),
        ] {
            if st.theta_s == 0 {
                return bad(&format!("{unit}.st.theta_s"), "must be positive");
            }
            if st.delta_t == 0 {
                return bad(&format!("{unit}.st.delta_t"), "must be at least 1");
            }
            if st.theta_t == 0 {
                return bad(&format!("{unit}.st.theta_t"), "must be positive");
            }
        }
        for (bank, t) in [("ad", &self.ad), ("bc", &self.bc), ("g", &self.g)] {
            if t.theta_i == 0 {
                return bad(&format!("spatial.{bank}.theta_i"), "must be positive");
            }
            if t.theta_a == 0 {
                return bad(&format!("spatial.{bank}.theta_a"), "must be positive");
            }
        }
        if self.ad.theta_i <= self.ad.theta_a {
            return bad(
                "spatial.ad.theta_i",
                "constrained bank needs theta_i > theta_a",
            );
        }
        if self.bc.theta_i >= self.bc.theta_a {
            return bad("spatial.bc.theta_a", "plateau bank needs theta_i < theta_a");
        }
        if self.hijk.delta_t == 0 {
            return bad("temporal.hijk.delta_t", "must be at least 1");
        }
        if self.hijk.theta_te == 0 {
            return bad("temporal.hijk.theta_te", "must be positive");
        }
        if self.hijk_min_run == 0 {
            return bad("temporal.hijk.min_run", "must be at least 1");
        }
        for (key, empty, zero) in [
            (
                "temporal.ef.delta_t",
                self.ef.delta_t.is_empty(),
                self.ef.delta_t.contains(&0),
            ),
            ("temporal.ef.theta_l", self.ef.theta_l.is_empty(), false),
            (
                "temporal.ef.theta_te",
                self.ef.theta_te.is_empty(),
                self.ef.theta_te.contains(&0),
            ),
            (
                "temporal.ef.min_run",
                self.ef.min_run.is_empty(),
                self.ef.min_run.contains(&0),
            ),
        ] {
            if empty {
                return bad(key, "list must not be empty");
            }
            if zero {
                return bad(key, "entries must be positive");
            }
        }
        if self.fifo_capacity == 0 {
            return bad("aer.fifo_capacity", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.suite.noise) {
            return bad("synthetic.noise", "must lie in [0, 1]");
        }
        if self.geometry.width < 8 || self.geometry.height < 8 {
            return bad("events.width", "detector banks need at least 8x8 pixels");
        }
        Ok(())
    }

    fn spatial_bank(&self, kinds: &[SpatialBankKind]) -> SpatialBank {
        let mut bank = SpatialBank::default();
        for k in kinds {
            bank.extend(match k {
                SpatialBankKind::Constrained => SpatialBank::constrained(self.geometry, self.ad),
                SpatialBankKind::Plateau => SpatialBank::plateau(self.geometry, self.bc),
                SpatialBankKind::Location => SpatialBank::location(self.geometry, self.g),
            });
        }
        bank
    }

    /// Untrained three-unit model with this configuration's detector banks.
    pub fn build_model(&self) -> Result<SgfModel> {
        let units = [
            SgfUnit::new(
                UnitId::A,
                self.st_a,
                self.spatial_bank(&self.unit_a_spatial),
                TemporalBank::default(),
            ),
            SgfUnit::new(
                UnitId::B,
                self.st_b,
                SpatialBank::default(),
                TemporalBank::rotational(self.geometry, &self.ef),
            ),
            SgfUnit::new(
                UnitId::C,
                self.st_c,
                self.spatial_bank(&self.unit_c_spatial),
                TemporalBank::directional(self.hijk, self.hijk_min_run),
            ),
        ];
        for u in &units {
            u.validate(self.geometry)?;
        }
        Ok(SgfModel::new(units, self.similarity, self.spikes_per_frame))
    }

    /// Full document listing every key with its current value.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let list32 = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        let banks =
            |v: &[SpatialBankKind]| v.iter().map(|k| k.name()).collect::<Vec<_>>().join(",");
        let _ = writeln!(o, "[events]");
        let _ = writeln!(o, "width = {}", self.geometry.width);
        let _ = writeln!(o, "height = {}", self.geometry.height);
        let _ = writeln!(o, "spikes_per_frame = {}", self.spikes_per_frame);
        let _ = writeln!(o, "\n[model]\nsimilarity = {}", self.similarity);
        for (unit, st) in [
            ("unit_a", &self.st_a),
            ("unit_b", &self.st_b),
            ("unit_c", &self.st_c),
        ] {
            let _ = writeln!(o, "\n[{unit}.st]");
            let _ = writeln!(o, "delta_s = {}", st.delta_s);
            let _ = writeln!(o, "theta_s = {}", st.theta_s);
            let _ = writeln!(o, "delta_t = {}", st.delta_t);
            let _ = writeln!(o, "theta_t = {}", st.theta_t);
            let _ = writeln!(o, "sum = {}", sum_name(st.sum));
        }
        let _ = writeln!(o, "\n[unit_a]\nspatial = {}", banks(&self.unit_a_spatial));
        let _ = writeln!(o, "\n[unit_c]\nspatial = {}", banks(&self.unit_c_spatial));
        for (bank, t) in [("ad", &self.ad), ("bc", &self.bc), ("g", &self.g)] {
            let _ = writeln!(o, "\n[spatial.{bank}]");
            let _ = writeln!(o, "theta_i = {}", t.theta_i);
            let _ = writeln!(o, "theta_a = {}", t.theta_a);
        }
        let _ = writeln!(o, "\n[temporal.hijk]");
        let _ = writeln!(o, "delta_t = {}", self.hijk.delta_t);
        let _ = writeln!(o, "theta_l = {}", self.hijk.theta_l);
        let _ = writeln!(o, "theta_te = {}", self.hijk.theta_te);
        let _ = writeln!(o, "min_run = {}", self.hijk_min_run);
        let _ = writeln!(o, "\n[temporal.ef]");
        let _ = writeln!(o, "delta_t = {}", list(&self.ef.delta_t));
        let _ = writeln!(o, "theta_l = {}", list32(&self.ef.theta_l));
        let _ = writeln!(o, "theta_te = {}", list32(&self.ef.theta_te));
        let _ = writeln!(o, "min_run = {}", list(&self.ef.min_run));
        let _ = writeln!(o, "\n[aer]\nfifo_capacity = {}", self.fifo_capacity);
        let _ = writeln!(o, "\n[synthetic]");
        let _ = writeln!(o, "noise = {}", self.suite.noise);
        let _ = writeln!(o, "seed = {}", self.suite.seed);
        let _ = writeln!(o, "train_per_class = {}", self.suite.train_per_class);
        let _ = writeln!(o, "test_per_class = {}", self.suite.test_per_class);
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn printed_defaults_parse_back() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn overrides_apply() {
        let c = RunConfig::parse(
            "# comment\n[model]\nsimilarity = xnor\n[unit_a.st]\ntheta_t = 1\nsum = signed\n[temporal.ef]\ndelta_t = 1, 3\n",
        )
        .unwrap();
        assert_eq!(c.similarity, Similarity::Xnor);
        assert_eq!(c.st_a.theta_t, 1);
        assert_eq!(c.st_a.sum, SpatialSum::Signed);
        assert_eq!(c.ef.delta_t, vec![1, 3]);
    }

    #[test]
    fn errors_name_the_key() {
        let key_of = |text: &str| match RunConfig::parse(text) {
            Err(SgfError::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(key_of("[events]\nwidth = wide\n"), "events.width");
        assert_eq!(key_of("[events]\ncolour = red\n"), "events.colour");
        assert_eq!(
            key_of("[spatial.ad]\ntheta_i = 3\ntheta_a = 5\n"),
            "spatial.ad.theta_i"
        );
        assert_eq!(key_of("[unit_b.st]\ntheta_t = 0\n"), "unit_b.st.theta_t");
        assert_eq!(key_of("[events]\nwidth = 1\nwidth = 2\n"), "events.width");
        assert_eq!(key_of("[model]\nsimilarity = and\n"), "model.similarity");
    }

    #[test]
    fn default_model_has_the_expected_vector_lengths() {
        let m = RunConfig::default().build_model().unwrap();
        assert_eq!(m.unit(UnitId::A).vector_len(), 16 + 18 + 2);
        assert_eq!(m.unit(UnitId::B).vector_len(), 160);
        assert_eq!(m.unit(UnitId::C).vector_len(), 16 + 2 + 4);
    }
}

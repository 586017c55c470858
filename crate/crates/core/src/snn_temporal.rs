//! Temporal SNNs: movement direction from frame-to-frame location comparison.
//!
//! Every active neuron at frame `t` compares its location with each active
//! neuron at frame `t - delta_t` and receives one input unit per comparison
//! whose signed difference exceeds `theta_l`. Neurons with at least
//! `theta_te` inputs fire, and the largest location index among fired
//! neurons is the object location for that frame. Location traces on both
//! axes are turned into movement tokens (top-down, bottom-up, left-right,
//! right-left) and matched against a reference token sequence.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SgfError};
use crate::events::Geometry;
use crate::grid::BinaryGrid;
use crate::snn_spatial::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Row index; grows downward.
    Vertical,
    /// Column index; grows rightward.
    Horizontal,
}

impl Axis {
    #[inline]
    fn pick(self, (x, y): (usize, usize)) -> usize {
        match self {
            Axis::Vertical => y,
            Axis::Horizontal => x,
        }
    }
}

/// Which sign of location difference counts as an input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Current location greater than the compared one.
    Increasing,
    Decreasing,
    /// Either sign; the union of an increasing and a decreasing tracker.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    TopDown,
    BottomUp,
    LeftRight,
    RightLeft,
}

impl Token {
    pub fn code(self) -> &'static str {
        match self {
            Token::TopDown => "TD",
            Token::BottomUp => "BU",
            Token::LeftRight => "LR",
            Token::RightLeft => "RL",
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Token {
    type Err = SgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TD" => Ok(Token::TopDown),
            "BU" => Ok(Token::BottomUp),
            "LR" => Ok(Token::LeftRight),
            "RL" => Ok(Token::RightLeft),
            _ => Err(SgfError::InvalidParams(format!(
                "unknown movement token {s:?}"
            ))),
        }
    }
}

/// Collapsed token sequence with the frame length of each run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemporalPattern {
    tokens: Vec<Token>,
    runs: Vec<usize>,
}

impl TemporalPattern {
    /// Builds a pattern from tokens, merging consecutive duplicates.
    pub fn from_tokens(tokens: &[Token]) -> Self {
        Self::from_runs(tokens.iter().map(|&t| (t, 1)))
    }

    pub fn from_runs(runs: impl IntoIterator<Item = (Token, usize)>) -> Self {
        let mut p = Self::default();
        for (tok, len) in runs {
            if p.tokens.last() == Some(&tok) {
                *p.runs.last_mut().unwrap() += len;
            } else {
                p.tokens.push(tok);
                p.runs.push(len);
            }
        }
        p
    }

    /// Counter-clockwise: down, right, up, left.
    pub fn counter_clockwise() -> Self {
        use Token::*;
        Self::from_tokens(&[TopDown, LeftRight, BottomUp, RightLeft])
    }

    /// Clockwise: down, left, up, right.
    pub fn clockwise() -> Self {
        use Token::*;
        Self::from_tokens(&[TopDown, RightLeft, BottomUp, LeftRight])
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn runs(&self) -> &[usize] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn longest_run(&self, tok: Token) -> usize {
        self.tokens
            .iter()
            .zip(&self.runs)
            .filter(|(&t, _)| t == tok)
            .map(|(_, &r)| r)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for TemporalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (t, r)) in self.tokens.iter().zip(&self.runs).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}x{r}")?;
        }
        f.write_str("]")
    }
}

/// Per-frame object location; `None` when no temporal neuron fired.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LocationTrace(pub Vec<Option<usize>>);

impl fmt::Display for LocationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match l {
                Some(v) => write!(f, "{v}")?,
                None => f.write_str("-")?,
            }
        }
        Ok(())
    }
}

/// Parameters of the location tracker underlying a temporal SNN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrackerParams {
    pub direction: Direction,
    /// Comparison frame window.
    pub delta_t: usize,
    /// Location difference threshold (strict).
    pub theta_l: u32,
    /// Temporal neuron spiking threshold.
    pub theta_te: u32,
    /// Restricts active neurons to this area when set.
    pub region: Option<Rect>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalSnnParams {
    pub feature_id: String,
    pub axis: Axis,
    pub tracker: TrackerParams,
    /// Shortest token run kept by the tokenizer.
    pub min_run: usize,
    pub reference: TemporalPattern,
}

impl TemporalSnnParams {
    pub fn validate(&self, geometry: Geometry) -> Result<()> {
        let fail = |m: &str| Err(SgfError::InvalidParams(format!("{}: {m}", self.feature_id)));
        if self.tracker.delta_t == 0 {
            return fail("delta_t must be at least 1");
        }
        if self.tracker.theta_te == 0 {
            return fail("theta_te must be at least 1");
        }
        if self.min_run == 0 {
            return fail("min_run must be at least 1");
        }
        if self.reference.is_empty() {
            return fail("reference pattern is empty");
        }
        if let Some(r) = self.tracker.region {
            if !r.fits(geometry) {
                return fail("region outside geometry");
            }
        }
        Ok(())
    }
}

/// Input count of every neuron in `current`, compared against `previous`.
///
/// Neuron `m` gets one unit per `i` in `previous` whose location difference
/// `l_m - l_i` (negated for [`Direction::Decreasing`]) is strictly greater
/// than `theta_l`. [`Direction::Both`] takes the larger of the two counts.
pub fn temporal_neuron_inputs(
    current: &[(usize, usize)],
    previous: &[(usize, usize)],
    axis: Axis,
    direction: Direction,
    theta_l: u32,
) -> Vec<u32> {
    if previous.is_empty() {
        return vec![0; current.len()];
    }
    let span = current
        .iter()
        .chain(previous)
        .map(|&p| axis.pick(p))
        .max()
        .unwrap_or(0)
        + 1;
    // at_most[k] = number of previous neurons with location <= k
    let mut at_most = vec![0u32; span];
    for &p in previous {
        at_most[axis.pick(p)] += 1;
    }
    for k in 1..span {
        at_most[k] += at_most[k - 1];
    }
    let total = previous.len() as u32;
    let theta = theta_l as usize;
    current
        .iter()
        .map(|&p| {
            let l = axis.pick(p);
            // l_i < l - theta
            let below = || match l.checked_sub(theta + 1) {
                Some(k) => at_most[k],
                None => 0,
            };
            // l_i > l + theta
            let above = || {
                let k = l + theta;
                if k >= span {
                    0
                } else {
                    total - at_most[k]
                }
            };
            match direction {
                Direction::Increasing => below(),
                Direction::Decreasing => above(),
                Direction::Both => below().max(above()),
            }
        })
        .collect()
}

/// Indices of neurons whose input count reaches `theta_te`.
pub fn temporal_spikes(counts: &[u32], theta_te: u32) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= theta_te)
        .map(|(i, _)| i)
        .collect()
}

fn active_in(grid: &BinaryGrid, region: Option<Rect>) -> Vec<(usize, usize)> {
    let r = region.unwrap_or(Rect::new(0, 0, grid.width(), grid.height()));
    let w = grid.width();
    let cells = grid.as_slice();
    let mut out = Vec::new();
    for y in r.y..(r.y + r.height).min(grid.height()) {
        let row = &cells[y * w..(y + 1) * w];
        let end = (r.x + r.width).min(w);
        for (x, &on) in row.iter().enumerate().take(end).skip(r.x) {
            if on {
                out.push((x, y));
            }
        }
    }
    out
}

fn trace_from_active(
    active: &[Vec<(usize, usize)>],
    axis: Axis,
    tracker: &TrackerParams,
) -> LocationTrace {
    let dt = tracker.delta_t;
    LocationTrace(
        (0..active.len())
            .map(|t| {
                if t < dt {
                    return None;
                }
                let cur = &active[t];
                let counts = temporal_neuron_inputs(
                    cur,
                    &active[t - dt],
                    axis,
                    tracker.direction,
                    tracker.theta_l,
                );
                temporal_spikes(&counts, tracker.theta_te)
                    .into_iter()
                    .map(|i| axis.pick(cur[i]))
                    .max()
            })
            .collect(),
    )
}

/// Object location per frame along `axis`; the first `delta_t` frames have
/// no comparison reference and stay empty.
pub fn location_trace(
    st_outputs: &[BinaryGrid],
    axis: Axis,
    tracker: &TrackerParams,
) -> LocationTrace {
    let active: Vec<_> = st_outputs
        .iter()
        .map(|g| active_in(g, tracker.region))
        .collect();
    trace_from_active(&active, axis, tracker)
}

/// Labels frames by their dominant location change and collapses runs.
///
/// A frame is labeled when its location on either axis moved since the
/// previous frame; vertical wins ties. Unlabeled frames are skipped without
/// breaking runs. Runs shorter than `min_run` are dropped before collapsing.
pub fn tokenize(
    vertical: &LocationTrace,
    horizontal: &LocationTrace,
    min_run: usize,
) -> TemporalPattern {
    let n = vertical.0.len().max(horizontal.0.len());
    let delta = |trace: &LocationTrace, t: usize| -> i64 {
        match (
            trace.0.get(t - 1).copied().flatten(),
            trace.0.get(t).copied().flatten(),
        ) {
            (Some(a), Some(b)) => b as i64 - a as i64,
            _ => 0,
        }
    };
    let mut runs: Vec<(Token, usize)> = Vec::new();
    for t in 1..n {
        let dv = delta(vertical, t);
        let dh = delta(horizontal, t);
        let tok = if dv == 0 && dh == 0 {
            continue;
        } else if dv.abs() >= dh.abs() {
            if dv > 0 {
                Token::TopDown
            } else {
                Token::BottomUp
            }
        } else if dh > 0 {
            Token::LeftRight
        } else {
            Token::RightLeft
        };
        match runs.last_mut() {
            Some((last, len)) if *last == tok => *len += 1,
            _ => runs.push((tok, 1)),
        }
    }
    TemporalPattern::from_runs(runs.into_iter().filter(|&(_, len)| len >= min_run))
}

/// Reference matching.
///
/// A single-token reference matches when that token's longest run is at
/// least as long as every other token's. A multi-token reference matches
/// when the observed sequence is at least one reference cycle long and
/// reads as a contiguous stretch of the reference repeated cyclically.
pub fn match_pattern(observed: &TemporalPattern, reference: &TemporalPattern) -> bool {
    let r = reference.tokens();
    let o = observed.tokens();
    match r.len() {
        0 => false,
        1 => {
            let target = observed.longest_run(r[0]);
            target > 0
                && o.iter()
                    .filter(|&&t| t != r[0])
                    .all(|&t| observed.longest_run(t) <= target)
        }
        len => {
            o.len() >= len
                && (0..len).any(|shift| {
                    o.iter()
                        .enumerate()
                        .all(|(k, &t)| r[(shift + k) % len] == t)
                })
        }
    }
}

/// Per-feature result kept for trace dumps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureAnalysis {
    pub feature_id: String,
    pub vertical: LocationTrace,
    pub horizontal: LocationTrace,
    pub pattern: TemporalPattern,
    pub fired: bool,
}

/// Ordered collection of temporal SNNs sharing one ST output sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemporalBank {
    pub snns: Vec<TemporalSnnParams>,
}

impl TemporalBank {
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

    /// H/I/J/K: one detector per movement direction over the whole sensor.
    pub fn directional(tracker: TrackerParams, min_run: usize) -> Self {
        use Token::*;
        let specs = [
            ("H", Axis::Vertical, Direction::Increasing, TopDown),
            ("I", Axis::Vertical, Direction::Decreasing, BottomUp),
            ("J", Axis::Horizontal, Direction::Increasing, LeftRight),
            ("K", Axis::Horizontal, Direction::Decreasing, RightLeft),
        ];
        Self {
            snns: specs
                .iter()
                .map(|&(id, axis, direction, tok)| TemporalSnnParams {
                    feature_id: id.to_string(),
                    axis,
                    tracker: TrackerParams {
                        direction,
                        ..tracker
                    },
                    min_run,
                    reference: TemporalPattern::from_tokens(&[tok]),
                })
                .collect(),
        }
    }

    /// E/F: clockwise (`E*`) and counter-clockwise (`F*`) detectors, one per
    /// (sensor half, tracker variant, min_run) combination.
    pub fn rotational(geometry: Geometry, variants: &RotationalVariants) -> Self {
        let (w, h) = geometry.dims();
        let halves = [Rect::new(0, 0, w / 2, h), Rect::new(w / 2, 0, w - w / 2, h)];
        let mut snns = Vec::new();
        for (prefix, reference) in [
            ('E', TemporalPattern::clockwise()),
            ('F', TemporalPattern::counter_clockwise()),
        ] {
            let mut n = 0;
            for region in halves {
                for &delta_t in &variants.delta_t {
                    for &theta_l in &variants.theta_l {
                        for &theta_te in &variants.theta_te {
                            for &min_run in &variants.min_run {
                                n += 1;
                                snns.push(TemporalSnnParams {
                                    feature_id: format!("{prefix}{n}"),
                                    axis: Axis::Vertical,
                                    tracker: TrackerParams {
                                        direction: Direction::Both,
                                        delta_t,
                                        theta_l,
                                        theta_te,
                                        region: Some(region),
                                    },
                                    min_run,
                                    reference: reference.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        Self { snns }
    }

    /// Runs every detector, sharing location traces between detectors with
    /// identical tracker settings.
    pub fn analyze(&self, st_outputs: &[BinaryGrid]) -> Vec<FeatureAnalysis> {
        let mut active_cache: HashMap<Option<Rect>, Vec<Vec<(usize, usize)>>> = HashMap::new();
        let mut trace_cache: HashMap<(Axis, TrackerParams), LocationTrace> = HashMap::new();
        let mut trace = |axis: Axis, tracker: &TrackerParams| -> LocationTrace {
            trace_cache
                .entry((axis, *tracker))
                .or_insert_with(|| {
                    let active = active_cache.entry(tracker.region).or_insert_with(|| {
                        st_outputs
                            .iter()
                            .map(|g| active_in(g, tracker.region))
                            .collect()
                    });
                    trace_from_active(active, axis, tracker)
                })
                .clone()
        };
        self.snns
            .iter()
            .map(|snn| {
                let vertical = trace(Axis::Vertical, &snn.tracker);
                let horizontal = trace(Axis::Horizontal, &snn.tracker);
                let pattern = tokenize(&vertical, &horizontal, snn.min_run);
                let fired = match_pattern(&pattern, &snn.reference);
                FeatureAnalysis {
                    feature_id: snn.feature_id.clone(),
                    vertical,
                    horizontal,
                    pattern,
                    fired,
                }
            })
            .collect()
    }

    pub fn evaluate(&self, st_outputs: &[BinaryGrid]) -> Vec<bool> {
        self.analyze(st_outputs)
            .into_iter()
            .map(|a| a.fired)
            .collect()
    }
}

/// Parameter grid spanned by the rotational bank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationalVariants {
    pub delta_t: Vec<usize>,
    pub theta_l: Vec<u32>,
    pub theta_te: Vec<u32>,
    pub min_run: Vec<usize>,
}

impl Default for RotationalVariants {
    fn default() -> Self {
        Self {
            delta_t: vec![1, 2, 3, 4, 5],
            theta_l: vec![0, 2],
            theta_te: vec![1, 16],
            min_run: vec![2, 3],
        }
    }
}

impl RotationalVariants {
    /// Detectors per (direction, half).
    pub fn count(&self) -> usize {
        self.delta_t.len() * self.theta_l.len() * self.theta_te.len() * self.min_run.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use Token::*;

    #[test]
    fn empty_previous_gives_zero_inputs() {
        let c = temporal_neuron_inputs(
            &[(1, 1), (2, 2)],
            &[],
            Axis::Vertical,
            Direction::Increasing,
            0,
        );
        assert_eq!(c, vec![0, 0]);
    }

    #[test]
    fn toy_top_down_count() {
        // Prior active rows {1, 2}; current neuron at row 4.
        let c = temporal_neuron_inputs(
            &[(2, 4)],
            &[(2, 1), (2, 2)],
            Axis::Vertical,
            Direction::Increasing,
            0,
        );
        assert_eq!(c, vec![2]);
        let c = temporal_neuron_inputs(
            &[(2, 4)],
            &[(2, 1), (2, 2)],
            Axis::Vertical,
            Direction::Decreasing,
            0,
        );
        assert_eq!(c, vec![0]);
        // Strict threshold: 4 - 2 = 2 is not > 2.
        let c = temporal_neuron_inputs(
            &[(2, 4)],
            &[(2, 1), (2, 2)],
            Axis::Vertical,
            Direction::Increasing,
            2,
        );
        assert_eq!(c, vec![1]);
    }

    #[test]
    fn spikes_threshold() {
        assert!(temporal_spikes(&[0, 0], 1).is_empty());
        assert_eq!(temporal_spikes(&[3, 1], 2), vec![0]);
    }

    #[test]
    fn first_frames_have_no_location() {
        let mut g = Grid::new(5, 5);
        g.set(1, 1, true);
        let tracker = TrackerParams {
            direction: Direction::Increasing,
            delta_t: 2,
            theta_l: 0,
            theta_te: 1,
            region: None,
        };
        let tr = location_trace(&[g.clone(), g.clone(), g], Axis::Vertical, &tracker);
        assert_eq!(tr.0[..2], [None, None]);
    }

    #[test]
    fn tokenize_single_direction_and_empty() {
        let v = LocationTrace((0..10).map(Some).collect());
        let h = LocationTrace(vec![Some(5); 10]);
        assert_eq!(tokenize(&v, &h, 3).tokens(), &[TopDown]);
        assert!(tokenize(&LocationTrace::default(), &LocationTrace::default(), 3).is_empty());
        let none = LocationTrace(vec![None; 6]);
        assert!(tokenize(&none, &none, 1).is_empty());
    }

    #[test]
    fn short_runs_are_dropped_and_neighbors_merge() {
        // Down 4, left 1, down 4: the one-frame jitter vanishes.
        let rows = [0, 1, 2, 3, 4, 4, 5, 6, 7, 8];
        let cols = [9, 9, 9, 9, 9, 7, 7, 7, 7, 7];
        let v = LocationTrace(rows.iter().map(|&r| Some(r)).collect());
        let h = LocationTrace(cols.iter().map(|&c| Some(c)).collect());
        let p = tokenize(&v, &h, 2);
        assert_eq!(p.tokens(), &[TopDown]);
        assert_eq!(p.runs(), &[8]);
    }

    #[test]
    fn single_token_reference_uses_dominant_run() {
        let h = TemporalPattern::from_tokens(&[TopDown]);
        assert!(match_pattern(&TemporalPattern::from_tokens(&[TopDown]), &h));
        let mixed = TemporalPattern::from_runs([(TopDown, 5), (LeftRight, 2)]);
        assert!(match_pattern(&mixed, &h));
        let mixed = TemporalPattern::from_runs([(TopDown, 2), (LeftRight, 5)]);
        assert!(!match_pattern(&mixed, &h));
        assert!(!match_pattern(&TemporalPattern::default(), &h));
    }

    #[test]
    fn rotational_references() {
        let cw = TemporalPattern::clockwise();
        let obs = TemporalPattern::from_tokens(&[TopDown, RightLeft, BottomUp, LeftRight]);
        assert!(match_pattern(&obs, &cw));
        let ccw_obs = TemporalPattern::from_tokens(&[TopDown, LeftRight, BottomUp, RightLeft]);
        assert!(!match_pattern(&ccw_obs, &cw));
        assert!(match_pattern(
            &ccw_obs,
            &TemporalPattern::counter_clockwise()
        ));
        // Any starting phase, more than one cycle.
        let long =
            TemporalPattern::from_tokens(&[BottomUp, LeftRight, TopDown, RightLeft, BottomUp]);
        assert!(match_pattern(&long, &cw));
        // Less than a full cycle.
        let short = TemporalPattern::from_tokens(&[TopDown, RightLeft, BottomUp]);
        assert!(!match_pattern(&short, &cw));
    }

    #[test]
    fn bank_sizes() {
        let tracker = TrackerParams {
            direction: Direction::Increasing,
            delta_t: 2,
            theta_l: 0,
            theta_te: 4,
            region: None,
        };
        let d = TemporalBank::directional(tracker, 3);
        assert_eq!(
            d.feature_ids().collect::<Vec<_>>(),
            vec!["H", "I", "J", "K"]
        );
        let r = TemporalBank::rotational(Geometry::DVS128, &RotationalVariants::default());
        assert_eq!(r.len(), 160);
        assert_eq!(r.snns[79].feature_id, "E80");
        assert_eq!(r.snns[80].feature_id, "F1");
        assert!(r.validate(Geometry::DVS128).is_ok());
    }

    #[test]
    fn token_codes_round_trip() {
        for t in [TopDown, BottomUp, LeftRight, RightLeft] {
            assert_eq!(t.code().parse::<Token>().unwrap(), t);
        }
    }
}

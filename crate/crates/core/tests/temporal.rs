mod common;

use common::{inputs_oracle, suite_frames};
use sgf_core::config::RunConfig;
use sgf_core::events::bin_frames;
use sgf_core::events::synthetic::{gen_synthetic, SyntheticGestureSpec, TrajectoryKind};
use sgf_core::grid::{BinaryGrid, Grid};
use sgf_core::sgf::UnitId;
use sgf_core::snn_temporal::{
    location_trace, match_pattern, temporal_neuron_inputs, temporal_spikes, tokenize, Axis,
    Direction, TemporalPattern, Token, TrackerParams,
};
use sgf_core::stcore::st_filter;

/// Every set of at most `k` cells of a 4x4 grid.
fn small_sets(k: usize) -> Vec<Vec<(usize, usize)>> {
    let cells: Vec<(usize, usize)> = (0..16).map(|i| (i % 4, i / 4)).collect();
    let mut out = vec![Vec::new()];
    for a in 0..16 {
        out.push(vec![cells[a]]);
        for b in a + 1..16 {
            out.push(vec![cells[a], cells[b]]);
            if k >= 3 {
                for c in b + 1..16 {
                    out.push(vec![cells[a], cells[b], cells[c]]);
                }
            }
        }
    }
    out
}

#[test]
fn inputs_match_pairwise_comparison_on_all_small_configurations() {
    let sets = small_sets(3);
    assert_eq!(sets.len(), 1 + 16 + 120 + 560);
    let mut checked = 0u64;
    for cur in &sets {
        for prev in &sets {
            for axis in [Axis::Vertical, Axis::Horizontal] {
                for dir in [
                    Direction::Increasing,
                    Direction::Decreasing,
                    Direction::Both,
                ] {
                    for theta_l in [0, 1] {
                        let got = temporal_neuron_inputs(cur, prev, axis, dir, theta_l);
                        assert_eq!(got, inputs_oracle(cur, prev, axis, dir, theta_l));
                        checked += 1;
                    }
                }
            }
        }
    }
    assert_eq!(checked, 697 * 697 * 12);
}

fn blob_grid(w: usize, h: usize, cx: usize, cy: usize) -> BinaryGrid {
    let mut g = Grid::new(w, h);
    for y in cy.saturating_sub(1)..(cy + 2).min(h) {
        for x in cx.saturating_sub(1)..(cx + 2).min(w) {
            g.set(x, y, true);
        }
    }
    g
}

#[test]
fn dense_downward_blob_fires_like_the_pairwise_oracle() {
    let grids: Vec<BinaryGrid> = (0..6).map(|t| blob_grid(8, 8, 3, 1 + t)).collect();
    let tracker = TrackerParams {
        direction: Direction::Increasing,
        delta_t: 1,
        theta_l: 0,
        theta_te: 3,
        region: None,
    };
    let trace = location_trace(&grids, Axis::Vertical, &tracker);
    for t in 1..grids.len() {
        let cur = grids[t].active();
        let prev = grids[t - 1].active();
        let counts = inputs_oracle(&cur, &prev, Axis::Vertical, Direction::Increasing, 0);
        let expect = temporal_spikes(&counts, 3)
            .into_iter()
            .map(|i| cur[i].1)
            .max();
        assert_eq!(trace.0[t], expect, "frame {t}");
    }
    assert_eq!(trace.0[0], None);
    let flat = location_trace(&grids, Axis::Horizontal, &tracker);
    assert_eq!(tokenize(&trace, &flat, 1).tokens(), &[Token::TopDown]);
}

fn directional(kind: TrajectoryKind) -> Vec<BinaryGrid> {
    let cfg = RunConfig::default();
    let mut spec =
        SyntheticGestureSpec::new(kind, cfg.geometry).with_total_rate(cfg.spikes_per_frame);
    spec.blob_radius = 5.0;
    let s = gen_synthetic(&spec, 9).unwrap();
    st_filter(&bin_frames(&s, cfg.spikes_per_frame).unwrap(), &cfg.st_c).unwrap()
}

#[test]
fn reversing_time_swaps_directions() {
    let tracker = TrackerParams {
        direction: Direction::Both,
        delta_t: 2,
        theta_l: 0,
        theta_te: 4,
        region: None,
    };
    for (kind, fwd, back) in [
        (TrajectoryKind::LinearDown, Token::TopDown, Token::BottomUp),
        (
            TrajectoryKind::LinearRight,
            Token::LeftRight,
            Token::RightLeft,
        ),
    ] {
        let st = directional(kind);
        let pattern = |grids: &[BinaryGrid]| {
            let v = location_trace(grids, Axis::Vertical, &tracker);
            let h = location_trace(grids, Axis::Horizontal, &tracker);
            tokenize(&v, &h, 3)
        };
        let forward = pattern(&st);
        let reversed: Vec<_> = st.iter().rev().cloned().collect();
        let backward = pattern(&reversed);
        assert_eq!(forward.tokens(), &[fwd], "{}", kind.name());
        assert_eq!(backward.tokens(), &[back], "{}", kind.name());
    }
}

#[test]
fn ccw_stream_tokenizes_to_the_ccw_cycle() {
    let cfg = RunConfig::default();
    let model = cfg.build_model().unwrap();
    let unit = model.unit(UnitId::B);
    let frames = suite_frames(&cfg, 5, 0, 0.0);
    let analysis = unit.analyze_st(&unit.preprocess(&frames).unwrap()).unwrap();
    let f = analysis
        .temporal
        .iter()
        .find(|a| a.feature_id.starts_with('F') && a.fired)
        .expect("some F detector fires");
    assert!(match_pattern(
        &f.pattern,
        &TemporalPattern::counter_clockwise()
    ));
    assert!(!match_pattern(&f.pattern, &TemporalPattern::clockwise()));
}

#[test]
fn cw_and_ccw_detectors_are_mutually_exclusive() {
    let cfg = RunConfig::default();
    let model = cfg.build_model().unwrap();
    let unit = model.unit(UnitId::B);
    for class in 4..=7u8 {
        for i in 0..3 {
            let frames = suite_frames(&cfg, class, i, 0.0);
            let a = unit.analyze_st(&unit.preprocess(&frames).unwrap()).unwrap();
            let e = a
                .temporal
                .iter()
                .any(|f| f.fired && f.feature_id.starts_with('E'));
            let f = a
                .temporal
                .iter()
                .any(|f| f.fired && f.feature_id.starts_with('F'));
            assert!(e != f, "class {class} sample {i}: E={e} F={f}");
        }
    }
}

#[test]
fn matching_examples() {
    use Token::*;
    let td = TemporalPattern::from_tokens(&[TopDown]);
    assert!(match_pattern(
        &td,
        &TemporalPattern::from_tokens(&[TopDown])
    ));
    let cw_obs = TemporalPattern::from_tokens(&[TopDown, RightLeft, BottomUp, LeftRight]);
    assert!(match_pattern(&cw_obs, &TemporalPattern::clockwise()));
    let ccw_obs = TemporalPattern::from_tokens(&[TopDown, LeftRight, BottomUp, RightLeft]);
    assert!(!match_pattern(&ccw_obs, &TemporalPattern::clockwise()));
    // Started mid-cycle.
    let rotated =
        TemporalPattern::from_tokens(&[BottomUp, LeftRight, TopDown, RightLeft, BottomUp]);
    assert!(match_pattern(&rotated, &TemporalPattern::clockwise()));
    assert!(!match_pattern(
        &TemporalPattern::from_tokens(&[]),
        &TemporalPattern::clockwise()
    ));
}

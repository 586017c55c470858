mod common;

use common::suite_frames;
use proptest::prelude::*;
use sgf_core::config::RunConfig;
use sgf_core::events::Geometry;
use sgf_core::grid::{CountGrid, Grid};
use sgf_core::snn_spatial::{
    accumulate, spatial_response, GateThresholds, Rect, SpatialArchetype, SpatialBank,
    SpatialSnnParams,
};
use sgf_core::stcore::st_filter;

fn detector(region: Rect, theta_i: u32, theta_a: u32) -> SpatialSnnParams {
    SpatialSnnParams {
        feature_id: "X".into(),
        archetype: SpatialArchetype::LocationSpecific,
        region,
        theta_i,
        theta_a,
    }
}

fn counts() -> impl Strategy<Value = CountGrid> {
    prop::collection::vec(0u32..6, 64).prop_map(|d| Grid::from_vec(8, 8, d))
}

fn rect() -> impl Strategy<Value = Rect> {
    (0usize..8, 0usize..8)
        .prop_flat_map(|(x, y)| (Just(x), Just(y), 1..=8 - x, 1..=8 - y))
        .prop_map(|(x, y, w, h)| Rect::new(x, y, w, h))
}

proptest! {
    #[test]
    fn more_activity_never_silences(c in counts(), r in rect(), ti in 1u32..6, ta in 1u32..10, at in 0usize..64) {
        let d = detector(r, ti, ta);
        let mut more = c.clone();
        more.as_mut_slice()[at] += 1;
        prop_assert!(!spatial_response(&c, &d) || spatial_response(&more, &d));
    }

    #[test]
    fn outside_region_is_ignored(c in counts(), r in rect(), ti in 1u32..6, ta in 1u32..10, noise in counts()) {
        let d = detector(r, ti, ta);
        let mut other = c.clone();
        for (x, y, v) in noise.iter_xy() {
            if !r.contains(x, y) {
                other.set(x, y, *v);
            }
        }
        prop_assert_eq!(spatial_response(&c, &d), spatial_response(&other, &d));
    }

    #[test]
    fn unit_area_gate_means_any_pixel(c in counts(), r in rect(), ti in 1u32..6) {
        let any = c.iter_xy().any(|(x, y, v)| r.contains(x, y) && *v >= ti);
        prop_assert_eq!(spatial_response(&c, &detector(r, ti, 1)), any);
    }
}

#[test]
fn accumulation_equals_per_pixel_sum() {
    let mut r = common::rng(6);
    let g = Geometry::new(6, 6);
    let frames = common::random_frames(&mut r, g, 5, 20);
    let grids: Vec<_> = frames
        .iter()
        .map(|f| {
            let m = f.magnitude_grid();
            Grid::from_vec(6, 6, m.as_slice().iter().map(|&v| v > 0).collect())
        })
        .collect();
    let acc = accumulate(&grids).unwrap();
    for (x, y, v) in acc.iter_xy() {
        assert_eq!(*v as usize, grids.iter().filter(|g| *g.get(x, y)).count());
    }
}

/// Per-archetype outputs over a suite sample, using unit A's ST core.
fn fired(class: u8) -> (bool, bool) {
    let cfg = RunConfig::default();
    let frames = suite_frames(&cfg, class, 0, 0.0);
    let acc = accumulate(&st_filter(&frames, &cfg.st_a).unwrap()).unwrap();
    let ad = SpatialBank::constrained(cfg.geometry, cfg.ad).evaluate(&acc);
    let bc = SpatialBank::plateau(cfg.geometry, cfg.bc).evaluate(&acc);
    (ad.iter().any(|&b| b), bc.iter().any(|&b| b))
}

#[test]
fn concentrated_wave_fires_constrained_not_plateau() {
    assert_eq!(fired(3), (true, false));
}

#[test]
fn wide_circle_fires_plateau_not_constrained() {
    assert_eq!(fired(4), (false, true));
}

#[test]
fn bank_validation_rejects_wrong_regime() {
    let g = Geometry::DVS128;
    let bad = SpatialBank::constrained(
        g,
        GateThresholds {
            theta_i: 2,
            theta_a: 5,
        },
    );
    assert!(bad.validate(g).is_err());
    let bad = SpatialBank::plateau(
        g,
        GateThresholds {
            theta_i: 9,
            theta_a: 5,
        },
    );
    assert!(bad.validate(g).is_err());
    let small = Geometry::new(16, 16);
    let t = GateThresholds {
        theta_i: 1,
        theta_a: 1,
    };
    assert!(SpatialBank::location(small, t).validate(small).is_ok());
    assert!(SpatialBank::location(g, t).validate(small).is_err());
}

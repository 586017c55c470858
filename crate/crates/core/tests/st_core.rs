mod common;

use common::{random_frames, rng, st_oracle};
use proptest::prelude::*;
use sgf_core::events::{Frame, Geometry, Polarity, SpikeEvent};
use sgf_core::stcore::{st_filter, SpatialSum, StCore, StCoreParams};

fn frames_from(g: Geometry, raw: &[Vec<(u8, u8, bool)>]) -> Vec<Frame> {
    raw.iter()
        .enumerate()
        .map(|(i, evs)| {
            let mut f = Frame::empty(i, g);
            for &(x, y, on) in evs {
                let p = if on { Polarity::On } else { Polarity::Off };
                f.add_event(&SpikeEvent::new(
                    0,
                    x as u16 % g.width as u16,
                    y as u16 % g.height as u16,
                    p,
                ));
            }
            f
        })
        .collect()
}

fn params() -> impl Strategy<Value = StCoreParams> {
    (0usize..4, 1u32..8, 1usize..5, 1u32..5).prop_map(|(a, b, c, d)| StCoreParams::new(a, b, c, d))
}

fn stack() -> impl Strategy<Value = Vec<Vec<(u8, u8, bool)>>> {
    prop::collection::vec(
        prop::collection::vec((0u8..8, 0u8..8, any::<bool>()), 0..48),
        1..=4,
    )
}

proptest! {
    #[test]
    fn matches_exhaustive_window_sums(raw in stack(), p in params(), signed in any::<bool>()) {
        let g = Geometry::new(8, 8);
        let frames = frames_from(g, &raw);
        let p = StCoreParams { sum: if signed { SpatialSum::Signed } else { SpatialSum::Magnitude }, ..p };
        prop_assert_eq!(st_filter(&frames, &p).unwrap(), st_oracle(&frames, &p));
    }

    #[test]
    fn raising_thresholds_never_adds_pixels(raw in stack(), p in params(), ds in 0u32..3, dt in 0u32..2) {
        let g = Geometry::new(8, 8);
        let frames = frames_from(g, &raw);
        let low = st_filter(&frames, &p).unwrap();
        let high = st_filter(&frames, &StCoreParams { theta_s: p.theta_s + ds, theta_t: p.theta_t + dt, ..p }).unwrap();
        for (l, h) in low.iter().zip(&high) {
            for (a, b) in l.as_slice().iter().zip(h.as_slice()) {
                prop_assert!(!*b || *a);
            }
        }
    }

    #[test]
    fn one_event_changes_outputs_only_nearby(
        raw in stack(),
        p in params(),
        (t, x, y) in (0usize..4, 0u16..8, 0u16..8),
    ) {
        let g = Geometry::new(8, 8);
        let frames = frames_from(g, &raw);
        let t = t % frames.len();
        let mut changed = frames.clone();
        changed[t].add_event(&SpikeEvent::new(0, x, y, Polarity::On));
        let a = st_filter(&frames, &p).unwrap();
        let b = st_filter(&changed, &p).unwrap();
        for (k, (ga, gb)) in a.iter().zip(&b).enumerate() {
            for (px, py, v) in ga.iter_xy() {
                if *v != *gb.get(px, py) {
                    prop_assert!(k >= t && k < t + p.delta_t);
                    prop_assert!(px <= x as usize && x as usize <= px + p.delta_s);
                    prop_assert!(py <= y as usize && y as usize <= py + p.delta_s);
                }
            }
        }
    }
}

#[test]
fn streaming_core_equals_batch_filter() {
    let mut r = rng(21);
    let g = Geometry::new(16, 12);
    let frames = random_frames(&mut r, g, 30, 60);
    let p = StCoreParams::new(2, 3, 3, 2);
    let mut core = StCore::new(p, g).unwrap();
    let streamed: Vec<_> = frames.iter().map(|f| core.push(f).unwrap()).collect();
    assert_eq!(streamed, st_filter(&frames, &p).unwrap());
    core.reset();
    assert_eq!(core.push(&frames[0]).unwrap().count_ones(), 0);
}

#[test]
fn silent_parameters_emit_nothing() {
    let mut r = rng(3);
    let g = Geometry::new(8, 8);
    let frames = random_frames(&mut r, g, 6, 64);
    let p = StCoreParams::new(1, 1, 2, 3);
    assert!(p.is_silent());
    assert!(st_filter(&frames, &p)
        .unwrap()
        .iter()
        .all(|o| o.count_ones() == 0));
}

#[test]
fn output_length_matches_input() {
    let g = Geometry::new(8, 8);
    assert!(st_filter(&[], &StCoreParams::WEAK).unwrap().is_empty());
    let frames = random_frames(&mut rng(1), g, 7, 10);
    assert_eq!(st_filter(&frames, &StCoreParams::STRONG).unwrap().len(), 7);
}

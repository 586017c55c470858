mod common;

use common::{suite_stream, train_suite, TEST_OFFSET};
use proptest::prelude::*;
use sgf_core::aer::{
    decode, encode, fifo_transfer, hex_dump, hex_undump, AerFifo, AerPacket, StepBudget,
};
use sgf_core::config::RunConfig;
use sgf_core::events::{bin_frames, serialize_event_stream, Polarity, SpikeEvent, TextEventLoader};
use sgf_core::pipeline::{
    load_manifest_streams, parse_manifest, run_batch, run_inference, PipelineConfig,
};
use sgf_core::sgf::Similarity;
use sgf_core::SgfError;

proptest! {
    #[test]
    fn packets_round_trip(col in 0u8..128, row in 0u8..128, on in any::<bool>()) {
        let p = AerPacket::new(col, row, if on { Polarity::On } else { Polarity::Off }).unwrap();
        let w = encode(&p).unwrap();
        prop_assert!(w < 1 << 15);
        prop_assert_eq!(decode(w.into()).unwrap(), p);
    }

    #[test]
    fn hex_listing_round_trips(raw in prop::collection::vec((0u64..1000, 0u16..128, 0u16..128, any::<bool>()), 0..60)) {
        let mut t = 0;
        let events: Vec<SpikeEvent> = raw
            .iter()
            .map(|&(dt, x, y, on)| {
                t += dt;
                SpikeEvent::new(t, x, y, if on { Polarity::On } else { Polarity::Off })
            })
            .collect();
        let text = hex_dump(&events).unwrap();
        prop_assert_eq!(hex_undump(&text).unwrap(), events);
    }

    #[test]
    fn fifo_never_exceeds_capacity(n in 0usize..200, cap in 1usize..8, send in 1usize..6, recv in 1usize..6) {
        let words: Vec<u16> = (0..n as u16).collect();
        let mut fifo = AerFifo::new(cap).unwrap();
        let got = fifo_transfer(&words, &mut fifo, |_| StepBudget { send, receive: recv });
        prop_assert_eq!(got, words);
        prop_assert!(fifo.high_watermark() <= cap);
    }
}

#[test]
fn pipeline_matches_library_under_both_operators() {
    let cfg = RunConfig::default();
    let mut model = train_suite(&cfg, 3, 0.0);
    for op in [Similarity::Nor, Similarity::Xnor] {
        model.similarity = op;
        let pc = PipelineConfig {
            fifo_capacity: 4,
            send_per_step: 5,
            receive_per_step: 2,
            ..PipelineConfig::from_run_config(&cfg)
        };
        for class in 1..=10 {
            let s = suite_stream(&cfg, class, TEST_OFFSET, 0.02);
            let r = run_inference(&s, &pc, &model).unwrap();
            let direct = model
                .route_hierarchy(&bin_frames(&s, cfg.spikes_per_frame).unwrap())
                .unwrap();
            assert_eq!(
                (r.class, &r.path, &r.scores),
                (direct.class, &direct.path, &direct.scores)
            );
            assert!(r.stats.fifo_high_watermark <= 4);
            assert_eq!(r.stats.packets_transferred, s.len());
        }
    }
}

#[test]
fn trace_reproduces_training_vectors() {
    let cfg = RunConfig::default();
    let model = train_suite(&cfg, 1, 0.0);
    let s = suite_stream(&cfg, 7, 0, 0.0);
    let frames = bin_frames(&s, cfg.spikes_per_frame).unwrap();
    let trained = model.sample_vectors(&frames, None).unwrap();
    let r = run_inference(&s, &PipelineConfig::from_run_config(&cfg), &model).unwrap();
    assert_eq!(r.analyses[0].vector, trained.a);
    assert_eq!(Some(&r.analyses[1].vector), trained.b.as_ref());
    assert_eq!(Some(&r.analyses[2].vector), trained.c.as_ref());
}

#[test]
fn batch_summary_from_manifest_files() {
    let cfg = RunConfig::default();
    let model = train_suite(&cfg, 3, 0.0);
    let dir = std::env::temp_dir().join(format!("sgf-batch-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut manifest = String::new();
    for class in 1..=10 {
        for i in 0..2 {
            let name = format!("c{class}_{i}.txt");
            let s = suite_stream(&cfg, class, TEST_OFFSET + i, 0.0);
            std::fs::write(dir.join(&name), serialize_event_stream(&s)).unwrap();
            manifest.push_str(&format!("{name},{class}\n"));
        }
    }
    let entries = parse_manifest(&manifest, &dir).unwrap();
    let streams = load_manifest_streams(&entries, &TextEventLoader, cfg.geometry).unwrap();
    let summary = run_batch(&streams, &PipelineConfig::from_run_config(&cfg), &model).unwrap();
    assert_eq!(summary.total, 20);
    for row in &summary.confusion {
        assert_eq!(row.iter().sum::<usize>(), 2);
    }
    assert!(summary.accuracy() >= 0.9, "{}", summary.to_text());
    let csv = summary.to_csv();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.lines().last().unwrap().starts_with("accuracy,"));

    let missing = parse_manifest("nope.txt,1\n", &dir).unwrap();
    match load_manifest_streams(&missing, &TextEventLoader, cfg.geometry) {
        Err(SgfError::Io { path, .. }) => assert!(path.ends_with("nope.txt")),
        other => panic!("{other:?}"),
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unlabeled_stream_is_rejected_by_batch() {
    let cfg = RunConfig::default();
    let model = train_suite(&cfg, 1, 0.0);
    let mut s = suite_stream(&cfg, 1, 0, 0.0);
    s.label = None;
    assert!(run_batch(&[s], &PipelineConfig::from_run_config(&cfg), &model).is_err());
}

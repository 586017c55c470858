use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sgf_core::aer::{hex_dump, hex_undump};
use sgf_core::config::RunConfig;
use sgf_core::costmodel::{
    convnet_report, pat_report, sgf_ops_report, sgf_size_report, SgfInventory,
};
use sgf_core::events::synthetic::{
    gen_synthetic, suite_sample, suite_seed, SyntheticGestureSpec, TrajectoryKind,
};
use sgf_core::events::{
    bin_frames, parse_event_stream, serialize_event_stream, EventStream, TextEventLoader,
};
use sgf_core::pipeline::{
    load_manifest_streams, parse_manifest, run_batch, run_inference, PipelineConfig,
};
use sgf_core::sgf::model_file::{read_model, write_model};
use sgf_core::sgf::{class_name, SgfModel, Similarity, UnitId, GESTURE_CLASSES};
use sgf_core::snn_spatial::accumulate;
use sgf_core::stcore::{st_filter, StCoreParams};
use sgf_core::SgfError;

use crate::{
    AerDumpArgs, Cli, Command, CostArgs, CostTarget, EvaluateArgs, FilterArgs, FilterFormat,
    Format, GenerateArgs, InferArgs, SimilarityArg, TrainArgs, UnitArg,
};

#[derive(Debug)]
pub enum Failure {
    /// Bad invocation.
    Usage(String),
    /// Unreadable, malformed or invalid data.
    Data(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

/// Tags a library error with the file it came from.
fn in_file(path: &Path) -> impl Fn(SgfError) -> Failure + '_ {
    move |e| match e {
        SgfError::Io { .. } => Failure::Data(e.to_string()),
        _ => Failure::Data(format!("{}: {e}", path.display())),
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_to(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> Outcome<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&read(path)?).map_err(in_file(path))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.suite.seed = seed;
    }
    if let Some(op) = cli.similarity {
        cfg.similarity = similarity(op);
    }
    Ok(cfg)
}

fn similarity(op: SimilarityArg) -> Similarity {
    match op {
        SimilarityArg::Nor => Similarity::Nor,
        SimilarityArg::Xnor => Similarity::Xnor,
    }
}

fn load_events(path: &Path, cfg: &RunConfig) -> Outcome<EventStream> {
    parse_event_stream(&read(path)?, cfg.geometry).map_err(in_file(path))
}

fn load_model(path: &Path, cfg: &RunConfig, cli: &Cli) -> Outcome<SgfModel> {
    let template = cfg
        .build_model()
        .map_err(|e| Failure::Data(e.to_string()))?;
    let mut model = read_model(&read(path)?, template).map_err(in_file(path))?;
    if let Some(op) = cli.similarity {
        model.similarity = similarity(op);
    }
    if model.spikes_per_frame != cfg.spikes_per_frame {
        return Err(Failure::Data(format!(
            "{}: model uses {} spikes per frame, config key `events.spikes_per_frame` is {}",
            path.display(),
            model.spikes_per_frame,
            cfg.spikes_per_frame
        )));
    }
    Ok(model)
}

fn load_manifest(path: &Path, cfg: &RunConfig) -> Outcome<Vec<EventStream>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&read(path)?, base).map_err(in_file(path))?;
    if entries.is_empty() {
        return Err(Failure::Data(format!("{}: empty manifest", path.display())));
    }
    load_manifest_streams(&entries, &TextEventLoader, cfg.geometry).map_err(in_file(path))
}

pub fn run(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Generate(a) => generate(&cfg, a),
        Command::Filter(a) => filter(&cfg, a),
        Command::Train(a) => train(&cfg, a),
        Command::Infer(a) => infer(cli, &cfg, a),
        Command::Evaluate(a) => evaluate(cli, &cfg, a),
        Command::Cost(a) => cost(a),
        Command::AerDump(a) => aer_dump(&cfg, a),
        Command::Config => write_to(None, &cfg.to_text()),
    }
}

fn generate(cfg: &RunConfig, a: &GenerateArgs) -> Outcome {
    let noise = a.noise.unwrap_or(cfg.suite.noise);
    let data = |e: SgfError| Failure::Data(e.to_string());
    if let Some(class) = a.class {
        if class_name(class).is_none() {
            return Err(Failure::Usage(format!(
                "--class must be 1..=10, got {class}"
            )));
        }
        let seed = suite_seed(cfg.suite.seed, class, a.index);
        let s =
            suite_sample(class, cfg.geometry, noise, cfg.spikes_per_frame, seed).map_err(data)?;
        return write_to(a.out.as_deref(), &serialize_event_stream(&s));
    }
    if let Some(kind) = &a.kind {
        let kind: TrajectoryKind = kind
            .parse()
            .map_err(|e: SgfError| Failure::Usage(e.to_string()))?;
        let mut spec = SyntheticGestureSpec::new(kind, cfg.geometry);
        spec.noise_density = noise;
        if let Some(f) = a.frames {
            spec.frame_count = f;
        }
        let s = gen_synthetic(&spec.with_total_rate(cfg.spikes_per_frame), cfg.suite.seed)
            .map_err(data)?;
        return write_to(a.out.as_deref(), &serialize_event_stream(&s));
    }
    let dir = a
        .out
        .as_deref()
        .ok_or_else(|| Failure::Usage("suite generation needs --out DIR".into()))?;
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e: std::io::Error| Failure::Data(format!("{}: {e}", p.display()))
    };
    for (split, count, offset) in [
        ("train", cfg.suite.train_per_class, 0),
        ("test", cfg.suite.test_per_class, 10_000),
    ] {
        let sub = dir.join(split);
        fs::create_dir_all(&sub).map_err(io(&sub))?;
        let mut manifest = String::new();
        // Interleaved by index so a single pass sees every class early.
        for i in 0..count {
            for (class, _) in GESTURE_CLASSES {
                let seed = suite_seed(cfg.suite.seed, class, offset + i);
                let s = suite_sample(class, cfg.geometry, noise, cfg.spikes_per_frame, seed)
                    .map_err(data)?;
                let name = format!("{split}/c{class:02}_{i:03}.txt");
                let path = dir.join(&name);
                fs::write(&path, serialize_event_stream(&s)).map_err(io(&path))?;
                let _ = writeln!(manifest, "{name},{class}");
            }
        }
        let path = dir.join(format!("{split}.csv"));
        fs::write(&path, manifest).map_err(io(&path))?;
    }
    Ok(())
}

fn st_params(cfg: &RunConfig, a: &FilterArgs) -> Outcome<StCoreParams> {
    let Some(text) = &a.st else {
        return Ok(match a.unit {
            UnitArg::A => cfg.st_a,
            UnitArg::B => cfg.st_b,
            UnitArg::C => cfg.st_c,
        });
    };
    let v: Vec<u32> = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--st expects four integers, got {text:?}")))?;
    let [ds, ts, dt, tt] = v[..] else {
        return Err(Failure::Usage(format!(
            "--st expects four integers, got {text:?}"
        )));
    };
    let p = StCoreParams::new(ds as usize, ts, dt as usize, tt);
    p.validate()
        .map_err(|e| Failure::Usage(format!("--st: {e}")))?;
    Ok(p)
}

fn filter(cfg: &RunConfig, a: &FilterArgs) -> Outcome {
    let p = st_params(cfg, a)?;
    let s = load_events(&a.input, cfg)?;
    let frames = bin_frames(&s, cfg.spikes_per_frame).map_err(in_file(&a.input))?;
    let out = st_filter(&frames, &p).map_err(in_file(&a.input))?;
    let mut text = String::new();
    match a.format {
        FilterFormat::Records => {
            for (t, g) in out.iter().enumerate() {
                for (x, y) in g.active() {
                    let _ = writeln!(text, "{t},{x},{y}");
                }
            }
        }
        FilterFormat::Pgm => {
            if out.is_empty() {
                return Err(Failure::Data(format!(
                    "{}: no complete frame of {} spikes",
                    a.input.display(),
                    cfg.spikes_per_frame
                )));
            }
            let acc = accumulate(&out).map_err(in_file(&a.input))?;
            let max = acc.as_slice().iter().copied().max().unwrap_or(0).max(1);
            let _ = writeln!(text, "P2\n{} {}\n{max}", acc.width(), acc.height());
            for y in 0..acc.height() {
                let row: Vec<String> = (0..acc.width())
                    .map(|x| acc.get(x, y).to_string())
                    .collect();
                let _ = writeln!(text, "{}", row.join(" "));
            }
        }
    }
    write_to(a.out.as_deref(), &text)
}

fn train(cfg: &RunConfig, a: &TrainArgs) -> Outcome {
    let streams = load_manifest(&a.manifest, cfg)?;
    let mut model = cfg
        .build_model()
        .map_err(|e| Failure::Data(e.to_string()))?;
    for s in &streams {
        let frames = bin_frames(s, cfg.spikes_per_frame).map_err(in_file(&a.manifest))?;
        let class = s.label.expect("manifest streams are labeled");
        let v = model
            .sample_vectors(&frames, Some(class))
            .map_err(in_file(&a.manifest))?;
        model
            .train_vectors(&v, class)
            .map_err(in_file(&a.manifest))?;
    }
    model.finalize();
    fs::write(&a.model, write_model(&model))
        .map_err(|e| Failure::Data(format!("{}: {e}", a.model.display())))?;
    let mut report = String::from("trial,class,distinct\n");
    for r in model.knowledge_report() {
        let _ = writeln!(report, "{},{},{}", r.trial, r.class, r.distinct_vectors);
    }
    write_to(a.out.as_deref(), &report)
}

fn infer(cli: &Cli, cfg: &RunConfig, a: &InferArgs) -> Outcome {
    let model = load_model(&a.model, cfg, cli)?;
    let s = load_events(&a.input, cfg)?;
    let r = run_inference(&s, &PipelineConfig::from_run_config(cfg), &model)
        .map_err(in_file(&a.input))?;
    let name = class_name(r.class).unwrap_or("?");
    let mut o = String::new();
    match a.format {
        Format::Text => {
            let _ = writeln!(o, "class {} ({name})", r.class);
            let path: Vec<String> = r.path.iter().map(UnitId::to_string).collect();
            let _ = writeln!(o, "path {}", path.join(" "));
            for (unit, scores) in &r.scores {
                let cells: Vec<String> =
                    scores.iter().map(|(c, s)| format!("{c}:{s:.6}")).collect();
                let _ = writeln!(o, "scores {unit} {}", cells.join(" "));
            }
            let st = r.stats;
            let _ = writeln!(
                o,
                "events {} frames {} dropped {} fifo_peak {} steps {}",
                st.events_in, st.frames, st.events_dropped_tail, st.fifo_high_watermark, st.steps
            );
            if a.trace {
                for an in &r.analyses {
                    let unit = model.unit(an.unit);
                    let _ = writeln!(o, "trace {} slots {}", an.unit, unit.slot_ids().join(" "));
                    let _ = writeln!(o, "trace {} vector {}", an.unit, an.vector);
                    for f in an.temporal.iter().filter(|f| f.fired) {
                        let _ =
                            writeln!(o, "trace {} fired {} {}", an.unit, f.feature_id, f.pattern);
                    }
                }
            }
        }
        Format::Csv => {
            o.push_str("record,unit,key,value\n");
            let _ = writeln!(o, "class,,{},{name}", r.class);
            for (unit, scores) in &r.scores {
                for (c, s) in scores {
                    let _ = writeln!(o, "score,{unit},{c},{s:.6}");
                }
            }
            if a.trace {
                for an in &r.analyses {
                    let _ = writeln!(o, "vector,{},,{}", an.unit, an.vector);
                }
            }
        }
    }
    write_to(a.out.as_deref(), &o)
}

fn evaluate(cli: &Cli, cfg: &RunConfig, a: &EvaluateArgs) -> Outcome {
    let streams = load_manifest(&a.manifest, cfg)?;
    let model = load_model(&a.model, cfg, cli)?;
    let summary = run_batch(&streams, &PipelineConfig::from_run_config(cfg), &model)
        .map_err(in_file(&a.manifest))?;
    let text = match a.format {
        Format::Text => summary.to_text(),
        Format::Csv => summary.to_csv(),
    };
    write_to(a.out.as_deref(), &text)
}

fn cost(a: &CostArgs) -> Outcome {
    let reports = match a.target {
        CostTarget::Convnet => vec![convnet_report()],
        CostTarget::Pat => vec![pat_report()],
        CostTarget::Sgf => vec![
            sgf_size_report(&SgfInventory::PUBLISHED),
            sgf_ops_report(&SgfInventory::PUBLISHED),
        ],
    };
    let parts: Vec<String> = reports
        .iter()
        .map(|r| match a.format {
            Format::Text => r.to_text(),
            Format::Csv => r.to_csv(),
        })
        .collect();
    write_to(a.out.as_deref(), &parts.join("\n"))
}

fn aer_dump(cfg: &RunConfig, a: &AerDumpArgs) -> Outcome {
    let text = if a.reverse {
        let events = hex_undump(&read(&a.input)?).map_err(in_file(&a.input))?;
        let s = EventStream::new(cfg.geometry, events, None).map_err(in_file(&a.input))?;
        serialize_event_stream(&s)
    } else {
        let s = load_events(&a.input, cfg)?;
        hex_dump(s.events()).map_err(in_file(&a.input))?
    };
    write_to(a.out.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn filter_args(extra: &[&str]) -> FilterArgs {
        let mut argv = vec!["sgf", "filter", "in.txt"];
        argv.extend_from_slice(extra);
        match Cli::parse_from(argv).command {
            Command::Filter(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn st_flag_parsing() {
        let cfg = RunConfig::default();
        assert_eq!(st_params(&cfg, &filter_args(&[])).unwrap(), cfg.st_a);
        assert_eq!(
            st_params(&cfg, &filter_args(&["--unit", "b"])).unwrap(),
            cfg.st_b
        );
        let p = st_params(&cfg, &filter_args(&["--st", "1, 2,3,2"])).unwrap();
        assert_eq!((p.delta_s, p.theta_s, p.delta_t, p.theta_t), (1, 2, 3, 2));
        for bad in ["1,2,3", "a,b,c,d", "1,2,3,4,5"] {
            assert_eq!(
                st_params(&cfg, &filter_args(&["--st", bad]))
                    .unwrap_err()
                    .code(),
                1
            );
        }
    }

    #[test]
    fn failure_codes() {
        assert_eq!(Failure::Usage("u".into()).code(), 1);
        assert_eq!(Failure::Data("d".into()).code(), 2);
        assert_eq!(Failure::Data("d".into()).message(), "d");
    }
}

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use scripta_core::dataset::{
    generate_synthetic, ingest_sheet, render_sheet, template, Corpus, NoiseSpec, SheetGrid,
};
use scripta_core::extraction::{extract_pattern, PATTERN_COLS, PATTERN_ROWS};
use scripta_core::imaging::{binarize, parse_pgm, write_pgm, GrayImage, PgmEncoding};
use scripta_core::models::{
    load_bundle, read_manifest, save_bundle, train_correlation, train_direct, train_hierarchical,
    Detail, GroupingScheme, Label, Model, ModelConfig, ModelKind, Recognizer,
};
use scripta_core::network::{TrainingConfig, TrainingTrace};
use scripta_core::reporting::{evaluate as evaluate_model, write_report_csv, write_trace_csv};
use scripta_core::Scalar;

/// Prints a line to stdout; a closed pipe is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

use crate::{
    runtime, usage, CmdResult, EvaluateArgs, Failure, GenDataArgs, IngestArgs, Precision,
    RecognizeArgs, RenderArgs, SplitChoice, TrainArgs,
};

fn read_corpus(path: &Path) -> Result<Corpus, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(runtime)?;
    Corpus::from_text(&text)
        .with_context(|| format!("parsing corpus {}", path.display()))
        .map_err(runtime)
}

fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(runtime)?;
    parse_pgm(&bytes)
        .with_context(|| format!("parsing image {}", path.display()))
        .map_err(runtime)
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CmdResult {
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)
}

pub fn gen_data(a: GenDataArgs) -> CmdResult {
    let noise = NoiseSpec {
        flip_prob: a.flip,
        jitter: a.jitter,
        seed: a.seed,
    };
    noise.validate().map_err(usage)?;
    let corpus = generate_synthetic(a.rows as usize, &noise).map_err(usage)?;
    write_file(&a.out, corpus.to_text())?;
    say!(
        "wrote {} samples ({} rows) to {}",
        corpus.len(),
        corpus.rows(),
        a.out.display()
    );
    Ok(())
}

pub fn train(a: TrainArgs) -> CmdResult {
    match a.precision {
        Precision::F64 => train_as::<f64>(&a),
        Precision::F32 => train_as::<f32>(&a),
    }
}

fn model_config<T: Scalar>(a: &TrainArgs) -> Result<ModelConfig<T>, Failure> {
    let cfg = ModelConfig {
        hidden: a.hidden,
        training: TrainingConfig {
            eta: T::lit(a.eta),
            alpha: T::lit(a.alpha),
            mse_threshold: T::lit(a.mse_threshold),
            max_epochs: a.max_epochs,
            seed: a.seed,
            init_range: T::lit(a.init_range),
            shuffle_each_epoch: !a.no_shuffle,
        },
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn train_as<T: Scalar>(a: &TrainArgs) -> CmdResult {
    let cfg = model_config::<T>(a)?;
    let kind = ModelKind::from(a.model);
    let grouping = match (&a.grouping, kind) {
        (Some(_), k) if k != ModelKind::Hierarchical => {
            return Err(usage(anyhow!(
                "--grouping only applies to --model hierarchical"
            )));
        }
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(runtime)?;
            GroupingScheme::parse(&text)
                .with_context(|| format!("grouping file {}", path.display()))
                .map_err(usage)?
        }
        (None, _) => GroupingScheme::default(),
    };

    let corpus = read_corpus(&a.corpus)?;
    let (train_set, _) = corpus
        .split(a.split.train_rows, a.split.test_rows)
        .map_err(usage)?;
    say!(
        "training {kind} ({}) on {} samples",
        T::NAME,
        train_set.len()
    );

    let samples = train_set.samples();
    let (model, traces): (Model<T>, Vec<(String, TrainingTrace)>) = match kind {
        ModelKind::Direct => {
            let (m, t) = train_direct(samples, &cfg).map_err(runtime)?;
            (Model::Direct(m), vec![("trace.csv".into(), t)])
        }
        ModelKind::Correlation => {
            let (m, ts) = train_correlation(samples, &cfg).map_err(runtime)?;
            let named = Label::all()
                .zip(ts)
                .map(|(l, t)| (format!("trace_{}.csv", l.letter()), t))
                .collect();
            (Model::Correlation(m), named)
        }
        ModelKind::Hierarchical => {
            let (m, ts) = train_hierarchical(samples, &grouping, &cfg).map_err(runtime)?;
            let mut named = vec![("trace_group.csv".to_string(), ts.group)];
            for (g, t) in ts.positions.into_iter().enumerate() {
                if let Some(t) = t {
                    named.push((format!("trace_pos_{:02}.csv", g + 1), t));
                }
            }
            (Model::Hierarchical(m), named)
        }
    };

    save_bundle(&a.out, &model, &cfg).map_err(runtime)?;
    let mut missed = Vec::new();
    for (name, trace) in &traces {
        let path = a.out.join(name);
        let file = fs::File::create(&path)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime)?;
        write_trace_csv(trace, std::io::BufWriter::new(file)).map_err(runtime)?;
        let net = name
            .trim_start_matches("trace")
            .trim_start_matches('_')
            .trim_end_matches(".csv");
        let net = if net.is_empty() { "net" } else { net };
        let mse = trace
            .final_mse()
            .map_or("n/a".to_string(), |m| format!("{m:.6}"));
        say!(
            "{net}: epochs {} final mse {mse}{}",
            trace.epochs_run,
            if trace.converged {
                ""
            } else {
                " (not converged)"
            }
        );
        if !trace.converged {
            missed.push(net.to_string());
        }
    }
    say!("saved bundle to {}", a.out.display());

    if !missed.is_empty() {
        let msg = format!(
            "{} network(s) did not reach mse < {}: {}",
            missed.len(),
            a.mse_threshold,
            missed.join(" ")
        );
        if a.require_converged {
            return Err(runtime(anyhow!(msg)));
        }
        eprintln!("warning: {msg}");
    }
    Ok(())
}

fn manifest_scalar(dir: &Path) -> Result<String, Failure> {
    let manifest = read_manifest(dir)
        .with_context(|| format!("loading model {}", dir.display()))
        .map_err(runtime)?;
    Ok(manifest.scalar)
}

fn load_model<T: Scalar>(dir: &Path) -> Result<Model<T>, Failure> {
    let (model, _) = load_bundle::<T>(dir)
        .with_context(|| format!("loading model {}", dir.display()))
        .map_err(runtime)?;
    Ok(model)
}

pub fn evaluate(a: EvaluateArgs) -> CmdResult {
    match manifest_scalar(&a.model)?.as_str() {
        "f32" => evaluate_as::<f32>(&a),
        _ => evaluate_as::<f64>(&a),
    }
}

fn evaluate_as<T: Scalar>(a: &EvaluateArgs) -> CmdResult {
    let model = load_model::<T>(&a.model)?;
    let corpus = read_corpus(&a.corpus)?;
    let corpus = match a.split {
        SplitChoice::All => corpus,
        choice => {
            let (train, test) = corpus
                .split(a.rows.train_rows, a.rows.test_rows)
                .map_err(usage)?;
            if choice == SplitChoice::Train {
                train
            } else {
                test
            }
        }
    };
    let report = evaluate_model(&model, &corpus).map_err(runtime)?;
    if let Some(path) = &a.report {
        let file = fs::File::create(path)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime)?;
        write_report_csv(&report, std::io::BufWriter::new(file)).map_err(runtime)?;
    }
    if a.json {
        say!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(runtime)?
        );
        return Ok(());
    }
    say!("{} model, {} samples", report.model_kind, report.samples);
    say!("overall accuracy {:.4}", report.overall_accuracy);
    if let Some(g) = report.group_accuracy {
        say!("group accuracy {g:.4}");
    }
    if let Some(p) = report.position_accuracy {
        say!("position accuracy {p:.4}");
    }
    Ok(())
}

pub fn recognize(a: RecognizeArgs) -> CmdResult {
    match manifest_scalar(&a.model)?.as_str() {
        "f32" => recognize_as::<f32>(&a),
        _ => recognize_as::<f64>(&a),
    }
}

fn recognize_as<T: Scalar>(a: &RecognizeArgs) -> CmdResult {
    let model = load_model::<T>(&a.model)?;
    let mut img = read_image(&a.image)?;
    if a.cell.x != 0 || a.cell.y != 0 || a.cell.width.is_some() || a.cell.height.is_some() {
        let w = a.cell.width.unwrap_or(img.width().saturating_sub(a.cell.x));
        let h = a
            .cell
            .height
            .unwrap_or(img.height().saturating_sub(a.cell.y));
        img = img.crop(a.cell.x, a.cell.y, w, h).ok_or_else(|| {
            usage(anyhow!(
                "cell {w}x{h} at ({}, {}) lies outside the {}x{} image",
                a.cell.x,
                a.cell.y,
                img.width(),
                img.height()
            ))
        })?;
    }
    if a.invert {
        img = img.inverted();
    }
    let bits = binarize(&img, a.threshold).map_err(runtime)?;
    let (block, _) = extract_pattern(&bits).map_err(runtime)?;
    let result = model.recognize(&block);

    say!("predicted {}", result.predicted);
    let scores: Vec<String> = result
        .scores
        .iter()
        .map(|s| format!("{:.6}", s.as_f64()))
        .collect();
    say!("scores {}", scores.join(" "));
    if let (Detail::Hierarchical { group, .. }, Some(grouping)) = (&result.detail, model.grouping())
    {
        let letters: String = grouping.groups()[*group]
            .iter()
            .map(|l| l.letter())
            .collect();
        say!("group {} ({letters})", group + 1);
    }
    Ok(())
}

pub fn render(a: RenderArgs) -> CmdResult {
    let img = match (a.letter, &a.corpus) {
        (Some(c), _) => {
            let label = Label::from_letter(c.to_ascii_uppercase()).map_err(usage)?;
            if a.cell_width < PATTERN_COLS || a.cell_height < PATTERN_ROWS {
                return Err(usage(anyhow!(
                    "cell must be at least {PATTERN_ROWS}x{PATTERN_COLS}"
                )));
            }
            let block = template(label);
            let mut img = GrayImage::filled(a.cell_width, a.cell_height, 255);
            let (ox, oy) = (a.cell_width - PATTERN_COLS, a.cell_height - PATTERN_ROWS);
            for r in 0..PATTERN_ROWS {
                for c in 0..PATTERN_COLS {
                    if block.get(r, c) == 1 {
                        img.set(ox + c, oy + r, 0);
                    }
                }
            }
            img
        }
        (None, Some(path)) => {
            let corpus = read_corpus(path)?;
            let grid = SheetGrid::alphabet(corpus.rows(), a.cell_width, a.cell_height);
            render_sheet(&corpus, &grid).map_err(usage)?
        }
        (None, None) => unreachable!("clap requires --letter or --corpus"),
    };
    let encoding = if a.ascii {
        PgmEncoding::Ascii
    } else {
        PgmEncoding::Raw
    };
    write_file(&a.out, write_pgm(&img, encoding))?;
    say!(
        "wrote {}x{} image to {}",
        img.width(),
        img.height(),
        a.out.display()
    );
    Ok(())
}

pub fn ingest(a: IngestArgs) -> CmdResult {
    let mut img = read_image(&a.image)?;
    if a.invert {
        img = img.inverted();
    }
    let grid = SheetGrid::alphabet(a.rows as usize, a.cell_width, a.cell_height);
    let (corpus, skipped) = ingest_sheet(&img, &grid, a.threshold).map_err(usage)?;
    for s in &skipped {
        eprintln!("skipped cell row {} col {}: {:?}", s.row, s.col, s.reason);
    }
    write_file(&a.out, corpus.to_text())?;
    say!(
        "wrote {} samples ({} skipped) to {}",
        corpus.len(),
        skipped.len(),
        a.out.display()
    );
    Ok(())
}

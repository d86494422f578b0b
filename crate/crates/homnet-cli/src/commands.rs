//! Subcommand implementations.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use homnet::dataio::{self, DatasetSplit, RawImage, TaskDescriptor};
use homnet::learn::{
    evaluate, gradcheck as gc, train as train_model, AdamParams, Mode, ModelKind, OptimizerKind,
    ProjectionSchedule, TrainConfig,
};
use homnet::models::{postprocess, predict, Model, PositivityMap};
use homnet::photonics::{
    hoeffding_budget, m_independence_study, sample_shots, study_to_csv, SamplingMode,
};
use homnet::statevec::{
    coincidence_general, density_from_mixture, density_from_superposition, FeatureVector,
};
use homnet::svgplot::{render_history_svg, HistorySeries};
use homnet::{checkpoint, history, split as splitfile};

use crate::errors::{io_error, CliError};
use crate::{
    BudgetArgs, DatasetArg, EvalArgs, GradcheckArgs, ModeArg, ModelArg, MstudyArgs, OptimizerArg,
    OracleArgs, PlotArgs, PositivityArg, PrepareArgs, SamplingArg, ScheduleArg, ShotsArgs,
    SubsetArg, TrainArgs,
};

type CliResult = Result<(), CliError>;

fn resolve_data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HOMNET_DATA_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn parse_classes(spec: &str) -> Result<(u8, u8), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--classes expects `a,b`, got `{spec}`"
        )));
    }
    let parse = |s: &str| {
        s.parse::<u8>()
            .map_err(|e| CliError::Usage(format!("bad class `{s}`: {e}")))
    };
    let (a, b) = (parse(parts[0])?, parse(parts[1])?);
    if a == b {
        return Err(CliError::Usage(format!(
            "--classes needs two distinct classes, got {a},{b}"
        )));
    }
    Ok((a, b))
}

fn load_raw_dataset(dataset: DatasetArg, dir: &Path) -> Result<Vec<(RawImage, u8)>, CliError> {
    let sub = |name: &str| dir.join(name);
    match dataset {
        DatasetArg::Mnist | DatasetArg::Fashion => {
            let base = sub(if dataset == DatasetArg::Mnist {
                "mnist"
            } else {
                "fashion"
            });
            let mut items = dataio::load_idx(
                &base.join("train-images-idx3-ubyte"),
                &base.join("train-labels-idx1-ubyte"),
            )?;
            items.extend(dataio::load_idx(
                &base.join("t10k-images-idx3-ubyte"),
                &base.join("t10k-labels-idx1-ubyte"),
            )?);
            Ok(items)
        }
        DatasetArg::Cifar10 => {
            let base = sub("cifar-10-batches-bin");
            let mut items = Vec::new();
            for batch in [
                "data_batch_1.bin",
                "data_batch_2.bin",
                "data_batch_3.bin",
                "data_batch_4.bin",
                "data_batch_5.bin",
                "test_batch.bin",
            ] {
                items.extend(dataio::load_cifar10(&base.join(batch))?);
            }
            Ok(items)
        }
    }
}

pub fn prepare(args: PrepareArgs) -> CliResult {
    let (class_a, class_b) = parse_classes(&args.classes)?;
    let dir = resolve_data_dir(args.data_dir);
    let name = match args.dataset {
        DatasetArg::Mnist => "mnist",
        DatasetArg::Fashion => "fashion",
        DatasetArg::Cifar10 => "cifar10",
    };
    let items = load_raw_dataset(args.dataset, &dir)?;
    let split = dataio::make_binary_task(&items, class_a, class_b, args.seed, name)?;
    splitfile::save_split(&args.out, &split)?;
    println!(
        "wrote {}: {} train / {} test examples ({name} classes {class_a}->0, {class_b}->1, seed {})",
        args.out.display(),
        split.train.len(),
        split.test.len(),
        args.seed
    );
    Ok(())
}

#[derive(Serialize)]
struct RunManifest<'a> {
    schema_version: u32,
    created_unix: u64,
    config: &'a TrainConfig,
    task: &'a TaskDescriptor,
    split_path: String,
    outputs: ManifestOutputs,
    sha256: ManifestHashes,
}

#[derive(Serialize)]
struct ManifestOutputs {
    checkpoint: String,
    history: String,
}

#[derive(Serialize)]
struct ManifestHashes {
    checkpoint: String,
    history: String,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn build_config(args: &TrainArgs) -> TrainConfig {
    let model_kind = match args.model {
        ModelArg::Mixture => ModelKind::Mixture,
        ModelArg::Superposition => ModelKind::Superposition,
        ModelArg::Classical => ModelKind::Classical,
    };
    let mut cfg = TrainConfig::new(model_kind, args.neurons);
    cfg.epochs = args.epochs;
    cfg.batch_size = args.batch;
    cfg.learning_rate = args.lr;
    cfg.seed = args.seed;
    cfg.adam = AdamParams {
        beta1: args.beta1,
        beta2: args.beta2,
        eps: args.eps,
    };
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            ModeArg::Projection => Mode::Projection,
            ModeArg::WeightNormalized => Mode::WeightNormalized,
        };
    }
    if let Some(opt) = args.optimizer {
        cfg.optimizer = match opt {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        };
    }
    if let Some(schedule) = args.projection {
        cfg.projection = match schedule {
            ScheduleArg::PerEpoch => ProjectionSchedule::PerEpoch,
            ScheduleArg::PerStep => ProjectionSchedule::PerStep,
        };
    }
    cfg.track_k = args.track_k;
    cfg.positivity = match args.positivity {
        PositivityArg::Abs => PositivityMap::Abs,
        PositivityArg::Sigmoid => PositivityMap::Sigmoid,
        PositivityArg::Relu => PositivityMap::Relu,
    };
    cfg.constrained = args.constrained;
    cfg
}

pub fn train(args: TrainArgs) -> CliResult {
    let cfg = build_config(&args);
    // Flag-level validation failures are usage errors.
    cfg.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let split = splitfile::load_split(&args.split)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;

    let (model, run_history) = train_model(&split, &cfg)?;
    if args.verbose {
        for r in &run_history {
            println!(
                "epoch {:>4}  train_loss {:.6}  train_acc {:.4}  test_loss {:.6}  test_acc {:.4}",
                r.epoch, r.train_loss, r.train_acc, r.test_loss, r.test_acc
            );
        }
    }

    let checkpoint_path = args.out.join("checkpoint.json");
    let history_path = args.out.join("history.csv");
    checkpoint::save(&checkpoint_path, &model)?;
    history::save(&history_path, &run_history)?;
    let manifest = RunManifest {
        schema_version: 1,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: &cfg,
        task: &split.task,
        split_path: args.split.display().to_string(),
        outputs: ManifestOutputs {
            checkpoint: "checkpoint.json".into(),
            history: "history.csv".into(),
        },
        sha256: ManifestHashes {
            checkpoint: sha256_file(&checkpoint_path)?,
            history: sha256_file(&history_path)?,
        },
    };
    let manifest_path = args.out.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )
    .map_err(|e| io_error(&manifest_path, e))?;

    if let Some(best) = run_history
        .iter()
        .max_by(|a, b| a.test_acc.total_cmp(&b.test_acc))
    {
        let last = run_history.last().expect("non-empty when best exists");
        println!(
            "best test accuracy {:.4} at epoch {}; final test accuracy {:.4}",
            best.test_acc, best.epoch, last.test_acc
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn subset<'a>(split: &'a DatasetSplit, which: SubsetArg) -> &'a [dataio::LabeledExample] {
    match which {
        SubsetArg::Test => &split.test,
        SubsetArg::Train => &split.train,
    }
}

pub fn eval(args: EvalArgs) -> CliResult {
    let model = checkpoint::load(&args.checkpoint)?;
    let split = splitfile::load_split(&args.split)?;
    let examples = subset(&split, args.subset);
    let (loss, accuracy) = evaluate(&model, examples)?;
    #[derive(Serialize)]
    struct EvalOut {
        loss: f64,
        accuracy: f64,
        n_examples: usize,
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&EvalOut {
            loss,
            accuracy,
            n_examples: examples.len(),
        })
        .expect("serializes")
    );
    Ok(())
}

pub fn shots(args: ShotsArgs) -> CliResult {
    let model = checkpoint::load(&args.checkpoint)?;
    let mixture = match model {
        Model::Mixture(m) => m,
        _ => {
            return Err(CliError::Numeric(
                "shot emulation requires a mixture checkpoint".into(),
            ))
        }
    };
    let split = splitfile::load_split(&args.split)?;
    let examples = subset(&split, args.subset);
    let example = examples.get(args.image).ok_or_else(|| {
        CliError::Data(format!(
            "image index {} out of range (subset has {} examples)",
            args.image,
            examples.len()
        ))
    })?;

    let exp = sample_shots(&mixture, &example.features, args.n, args.seed)?;
    // Analytic physical response: Σᵢ P(wᵢ)/ΣP · ⟨x, Wᵢ/‖Wᵢ‖⟩².
    let weights = mixture.physical_weights();
    let analytic_f: f64 = mixture
        .unit_products(&example.features)?
        .iter()
        .zip(weights.iter())
        .map(|(&a, &w)| w * a * a)
        .sum();
    let output = postprocess(exp.estimate_f, mixture.bias, mixture.k());
    #[derive(Serialize)]
    struct ShotsOut {
        n_shots: u64,
        coincidences: u64,
        seed: u64,
        estimate_f: f64,
        analytic_f: f64,
        half_width: f64,
        predicted_class: u8,
        label: u8,
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&ShotsOut {
            n_shots: exp.n_shots,
            coincidences: exp.coincidences,
            seed: exp.seed,
            estimate_f: exp.estimate_f,
            analytic_f,
            half_width: exp.half_width,
            predicted_class: predict(output, 0.5),
            label: example.label,
        })
        .expect("serializes")
    );
    Ok(())
}

pub fn budget(args: BudgetArgs) -> CliResult {
    let budget = hoeffding_budget(args.epsilon, args.delta)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&budget).expect("serializes")
    );
    Ok(())
}

pub fn mstudy(args: MstudyArgs) -> CliResult {
    let m_values: Vec<usize> = args
        .m_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("bad M `{s}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let mode = match args.mode {
        SamplingArg::Agnostic => SamplingMode::Agnostic,
        SamplingArg::Tracked => SamplingMode::Tracked,
    };
    let rows = m_independence_study(
        &m_values,
        args.epsilon,
        args.delta,
        args.repeats,
        args.seed,
        mode,
    )?;
    let csv = study_to_csv(&rows);
    print!("{csv}");
    if let Some(out) = args.out {
        std::fs::write(&out, csv).map_err(|e| io_error(&out, e))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

pub fn gradcheck(args: GradcheckArgs) -> CliResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let mode_of = |arg: ModeArg| match arg {
        ModeArg::Projection => Mode::Projection,
        ModeArg::WeightNormalized => Mode::WeightNormalized,
    };
    let targets: Vec<(ModelKind, Mode, bool)> = match args.model.as_str() {
        "all" => vec![
            (ModelKind::Mixture, Mode::Projection, true),
            (ModelKind::Mixture, Mode::WeightNormalized, true),
            (ModelKind::Mixture, Mode::WeightNormalized, false),
            (ModelKind::Superposition, Mode::WeightNormalized, false),
            (ModelKind::Classical, Mode::Projection, false),
        ],
        "mixture" => {
            let mode = args.mode.map(mode_of).unwrap_or(Mode::WeightNormalized);
            vec![(ModelKind::Mixture, mode, args.track_k)]
        }
        "superposition" => vec![(ModelKind::Superposition, Mode::WeightNormalized, false)],
        "classical" => vec![(ModelKind::Classical, Mode::Projection, false)],
        other => {
            return Err(CliError::Usage(format!(
                "unknown model `{other}` (expected mixture|superposition|classical|all)"
            )))
        }
    };
    let mut all_passed = true;
    for (kind, mode, track_k) in targets {
        let report = gc::run(kind, mode, track_k, args.trials, args.seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let verdict = if report.passed() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {:?}/{:?} track_k={} trials={} max_abs={:.3e} max_rel={:.3e}",
            report.kind, report.mode, report.track_k, report.trials, report.max_abs, report.max_rel
        );
        all_passed &= report.passed();
    }
    if !all_passed {
        return Err(CliError::Numeric(
            "analytic gradients deviate from finite differences".into(),
        ));
    }
    Ok(())
}

pub fn oracle(args: OracleArgs) -> CliResult {
    use ndarray::{Array1, Array2};
    use rand::{Rng, SeedableRng};

    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(args.seed);
    let mut max_dev = 0.0f64;
    for _ in 0..args.trials {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(2..=32);
        let mut rows = Array2::<f64>::zeros((m, n));
        for mut row in rows.outer_iter_mut() {
            row.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
            let norm = row.dot(&row).sqrt();
            row.mapv_inplace(|v| v / norm);
        }
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let x = FeatureVector::from_vec(x).expect("finite");

        // Mixture: probabilities on the simplex.
        let mut w = Array1::from_shape_fn(m, |_| -f64::ln(rng.gen_range(1e-9..1.0)));
        w /= w.sum();
        let mix = homnet::models::MixtureModel::new(rows.clone(), w.clone(), 0.0);
        let f = homnet::models::forward_mixture(&mix, &x).map_err(CliError::from)?;
        let u = density_from_mixture(&rows, &w).map_err(|e| CliError::Numeric(e.to_string()))?;
        let p = coincidence_general(&x, &u).map_err(|e| CliError::Numeric(e.to_string()))?;
        max_dev = max_dev.max((p - (1.0 - f) / 2.0).abs());

        // Superposition: real amplitudes scaled to unit trace.
        let mut ws = Array1::from_shape_fn(m, |_| rng.gen_range(-1.0..1.0));
        let v = rows.t().dot(&ws);
        let trace = v.dot(&v);
        if trace > 1e-9 {
            ws /= trace.sqrt();
            let sup = homnet::models::SuperpositionModel::new(rows.clone(), ws.clone(), 0.0);
            let f = homnet::models::forward_superposition(&sup, &x).map_err(CliError::from)?;
            let u = density_from_superposition(&rows, &ws)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let p = coincidence_general(&x, &u).map_err(|e| CliError::Numeric(e.to_string()))?;
            max_dev = max_dev.max((p - (1.0 - f) / 2.0).abs());
        }
    }
    let verdict = if max_dev <= 1e-12 { "PASS" } else { "FAIL" };
    println!("{verdict} oracle equivalence over {} trials: max |p - (1-f)/2| = {max_dev:.3e}", args.trials);
    if max_dev > 1e-12 {
        return Err(CliError::Numeric(format!(
            "responses deviate from the coincidence formula by {max_dev:.3e}"
        )));
    }
    Ok(())
}

fn label_sort_key(label: &str) -> Option<u64> {
    let digits: String = label.chars().filter(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        None
    } else {
        digits.parse().ok()
    }
}

pub fn plot(args: PlotArgs) -> CliResult {
    let labels: Vec<String> = match &args.labels {
        Some(spec) => {
            let labels: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).collect();
            if labels.len() != args.history.len() {
                return Err(CliError::Usage(format!(
                    "{} labels for {} history files",
                    labels.len(),
                    args.history.len()
                )));
            }
            labels
        }
        None => args
            .history
            .iter()
            .map(|p| {
                p.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string())
            })
            .collect(),
    };
    let mut series = Vec::new();
    for (path, label) in args.history.iter().zip(labels) {
        series.push(HistorySeries {
            label,
            records: history::load(path)?,
        });
    }
    // Legend ordered by the numeric part of the label (M) when present.
    if series.iter().all(|s| label_sort_key(&s.label).is_some()) {
        series.sort_by_key(|s| label_sort_key(&s.label).unwrap());
    }
    let svg = render_history_svg(&series)?;
    std::fs::write(&args.out, svg).map_err(|e| io_error(&args.out, e))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

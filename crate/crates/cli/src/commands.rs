use std::path::{Path, PathBuf};

use log::{info, warn};

use colur::bench::{self, Prepared, Seeds};
use colur::data::{self, io, noise_stats, Dataset, NoisyDataset};
use colur::eval::{self, ReportFormat, ReportMetadata};
use colur::lur::{learn_incremental, learn_initial, Colur};
use colur::nn::{checkpoint, MlpParams};

use crate::config::{DatasetKind, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub const D0: &str = "D0.csv";
pub const DU: &str = "Du.csv";
pub const DU_TRUTH: &str = "Du_truth.csv";
pub const TEST: &str = "test.csv";
pub const THETA0: &str = "theta0.ckpt";
pub const THETA_U: &str = "theta_u.ckpt";
pub const THETA_U_RL: &str = "theta_u_rl.ckpt";
pub const THETA_T_RL: &str = "theta_t_rl.ckpt";

fn check_dims(cfg: &ExperimentConfig, d: &Dataset, what: &Path) -> CliResult<()> {
    if d.dims() != cfg.net.layers[0] {
        return Err(CliError::field(
            "net.layers",
            format!("input size {} does not match the {} feature columns of {}", cfg.net.layers[0], d.dims(), what.display()),
        ));
    }
    Ok(())
}

/// Builds the initial, incremental and test sets for one seed.
pub fn prepare_data(cfg: &ExperimentConfig, seed: u64) -> CliResult<Prepared> {
    match cfg.dataset.kind {
        DatasetKind::Blobs => {
            let b = bench::BenchmarkConfig {
                blobs: bench::BlobsSpec {
                    classes: cfg.dataset.classes,
                    per_class: cfg.dataset.per_class,
                    dims: cfg.dataset.dims,
                    spread: cfg.dataset.spread,
                    test_per_class: cfg.dataset.test_per_class,
                },
                split_ratio: cfg.split.ratio,
                noise: cfg.noise.spec(),
                ..bench::BenchmarkConfig::default()
            };
            Ok(bench::prepare(&b, seed)?)
        }
        DatasetKind::Csv => {
            let k = Some(cfg.classes());
            let path = cfg.dataset.path.as_ref().expect("validated");
            let test_path = cfg.dataset.test_path.as_ref().expect("validated");
            let all = io::read_dataset(path, k)?;
            let test = io::read_dataset(test_path, k)?;
            check_dims(cfg, &all, path)?;
            check_dims(cfg, &test, test_path)?;
            let s = Seeds::from(seed);
            let (d0, du) = data::split(&all, cfg.split.ratio, s.split)?;
            let du = data::inject(&du, &cfg.noise.spec(), s.noise)?;
            Ok(Prepared { d0, du, test })
        }
    }
}

fn read_set(cfg: &ExperimentConfig, name: &str) -> CliResult<Dataset> {
    let path = cfg.file(name);
    let d = io::read_dataset(&path, Some(cfg.classes())).map_err(|e| missing_hint(e, &path))?;
    check_dims(cfg, &d, &path)?;
    Ok(d)
}

fn read_truth(cfg: &ExperimentConfig) -> CliResult<Option<NoisyDataset>> {
    let path = cfg.file(DU_TRUTH);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(io::read_noisy(&path, Some(cfg.classes()), cfg.noise.spec())?))
}

fn missing_hint(e: colur::Error, path: &Path) -> CliError {
    if !path.exists() {
        CliError::Io(format!("{} not found; run `colur prepare` with the same --out first", path.display()))
    } else {
        e.into()
    }
}

fn load_model(cfg: &ExperimentConfig, name: &str, producer: &str) -> CliResult<MlpParams> {
    let path = cfg.file(name);
    if !path.exists() {
        return Err(CliError::Io(format!(
            "{} not found; run `colur {producer}` with the same --out first",
            path.display()
        )));
    }
    load_checked(cfg, &path)
}

fn load_checked(cfg: &ExperimentConfig, path: &Path) -> CliResult<MlpParams> {
    let params = checkpoint::load(path)?;
    if params.layer_sizes() != cfg.net.layers {
        return Err(CliError::field(
            "net.layers",
            format!("{:?} does not match {} with layers {:?}", cfg.net.layers, path.display(), params.layer_sizes()),
        ));
    }
    Ok(params)
}

fn metadata(cfg: &ExperimentConfig) -> ReportMetadata {
    ReportMetadata {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        dataset: cfg.dataset_name(),
        timestamp: cfg.timestamp.clone(),
    }
}

/// Evaluates `params` on the test set and writes `<stem>.<ext>`.
fn report(cfg: &ExperimentConfig, params: &MlpParams, stem: &str, format: ReportFormat) -> CliResult<eval::MetricsReport> {
    let test = read_set(cfg, TEST)?;
    let truth = read_truth(cfg)?;
    let r = eval::evaluate(params, &test, truth.as_ref(), metadata(cfg))?;
    let path = cfg.file(&format!("{stem}.{}", format.extension()));
    eval::emit_report(&r, &path, format)?;
    match r.noisy_subset_error {
        Some(e) => println!("{stem}: test accuracy {:.4}, noisy-subset error {e:.4}", r.test_accuracy),
        None => println!("{stem}: test accuracy {:.4}", r.test_accuracy),
    }
    Ok(r)
}

pub fn prepare(cfg: &ExperimentConfig) -> CliResult<()> {
    let p = prepare_data(cfg, cfg.seed)?;
    io::write_dataset(&p.d0, cfg.file(D0))?;
    io::write_dataset(p.du.observed(), cfg.file(DU))?;
    io::write_noisy(&p.du, cfg.file(DU_TRUTH))?;
    io::write_dataset(&p.test, cfg.file(TEST))?;
    let stats = noise_stats(&p.du);
    println!(
        "D0 {} samples, Du {} samples ({} noisy), test {} samples",
        p.d0.len(),
        p.du.len(),
        p.du.noisy_count(),
        p.test.len()
    );
    println!("class  original  noisy  clean");
    for (c, s) in stats.per_class.iter().enumerate() {
        println!("{c:>5}  {:>8}  {:>5}  {:>5}", s.original, s.noisy, s.clean);
    }
    println!(
        "noisy per class: mean {:.2}, std {:.2}; clean per class: mean {:.2}",
        stats.noisy_mean, stats.noisy_std, stats.clean_mean
    );
    Ok(())
}

pub fn train(cfg: &ExperimentConfig, format: ReportFormat) -> CliResult<()> {
    let d0 = read_set(cfg, D0)?;
    let theta0 = learn_initial(&d0, &cfg.net.layers, &cfg.train, Seeds::from(cfg.seed).initial)?;
    checkpoint::save(&theta0, cfg.file(THETA0))?;
    report(cfg, &theta0, "report_original", format)?;
    Ok(())
}

pub fn degrade(cfg: &ExperimentConfig, format: ReportFormat) -> CliResult<()> {
    let theta0 = load_model(cfg, THETA0, "train")?;
    let du = read_set(cfg, DU)?;
    let theta_u = learn_incremental(&theta0, &du, &cfg.degrade, Seeds::from(cfg.seed).degrade)?;
    checkpoint::save(&theta_u, cfg.file(THETA_U))?;
    report(cfg, &theta_u, "report_degrade", format)?;
    Ok(())
}

pub fn restore(cfg: &ExperimentConfig, format: ReportFormat, save_every: Option<usize>) -> CliResult<()> {
    let theta0 = load_model(cfg, THETA0, "train")?;
    let theta_u = load_model(cfg, THETA_U, "degrade")?;
    let du = read_set(cfg, DU)?;
    let test = read_set(cfg, TEST)?;

    let before = eval::accuracy(&theta0, &test)?;
    let after = eval::accuracy(&theta_u, &test)?;
    let drop = before - after;
    if drop < cfg.restore.degradation_threshold {
        warn!(
            "degraded model is only {:.1} points below the original (threshold {:.1}); restoration may not be needed",
            100.0 * drop,
            100.0 * cfg.restore.degradation_threshold
        );
    }

    let mut lur = cfg.lur.clone();
    lur.seed = Seeds::from(cfg.seed).lur;
    info!("restoring with toggles {}", lur.toggles.label());
    let ckpt_dir = cfg.file("checkpoints");
    if save_every.is_some() {
        std::fs::create_dir_all(&ckpt_dir).map_err(|e| CliError::io(&ckpt_dir, e))?;
    }
    let hook = |it: usize, s: &MlpParams, t: &MlpParams| -> colur::Result<()> {
        if let Some(n) = save_every {
            if (it + 1) % n == 0 {
                checkpoint::save(s, ckpt_dir.join(format!("theta_u_rl_iter{:03}.ckpt", it + 1)))?;
                checkpoint::save(t, ckpt_dir.join(format!("theta_t_rl_iter{:03}.ckpt", it + 1)))?;
            }
        }
        Ok(())
    };
    let out = Colur::new(lur).with_monitor(&test).with_hook(hook).run(&theta_u, &theta0, &du)?;
    for note in &out.trace.notes {
        warn!("{note}");
    }
    checkpoint::save(&out.student, cfg.file(THETA_U_RL))?;
    checkpoint::save(&out.teacher, cfg.file(THETA_T_RL))?;
    out.trace.write_csv(cfg.file("trace.csv"))?;
    out.trace.write_json(cfg.file("trace.json"))?;
    report(cfg, &out.student, "report_restore", format)?;
    Ok(())
}

pub fn evaluate(
    cfg: &ExperimentConfig,
    format: ReportFormat,
    checkpoint_path: &Path,
    data: Option<&PathBuf>,
    activations: bool,
) -> CliResult<()> {
    let params = load_checked(cfg, checkpoint_path)?;
    let test = match data {
        Some(p) => {
            let d = io::read_dataset(p, Some(cfg.classes()))?;
            check_dims(cfg, &d, p)?;
            d
        }
        None => read_set(cfg, TEST)?,
    };
    let truth = read_truth(cfg)?;
    let stem = checkpoint_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let r = eval::evaluate(&params, &test, truth.as_ref(), metadata(cfg))?;
    eval::emit_report(&r, cfg.file(&format!("eval_{stem}.{}", format.extension())), format)?;
    eval::write_confusion_csv(&r.confusion, cfg.file(&format!("eval_{stem}_confusion.csv")))?;
    if activations {
        eval::write_activations(&params, &test, cfg.file(&format!("eval_{stem}_activations.csv")))?;
    }
    match r.noisy_subset_error {
        Some(e) => println!("{stem}: test accuracy {:.4}, noisy-subset error {e:.4}", r.test_accuracy),
        None => println!("{stem}: test accuracy {:.4}", r.test_accuracy),
    }
    Ok(())
}

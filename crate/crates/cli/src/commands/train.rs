use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use batchprop::batching::train_with;
use batchprop::persistence::save_checkpoint;
use batchprop::{RunFingerprint, Topology, TrainConfig};

use super::{dataset_for, required, write_file};
use crate::config::ConfigFile;
use crate::metrics::RunMetrics;
use crate::{CliError, TrainArgs, EXIT_OK};

const CONFIG_KEYS: &[&str] = &[
    "data",
    "topology",
    "eta",
    "epochs",
    "batch-size",
    "shards",
    "seed",
    "out",
    "metrics",
];

#[derive(Debug)]
struct Settings {
    data: PathBuf,
    config: TrainConfig,
    out: Option<PathBuf>,
    metrics: Option<PathBuf>,
}

fn resolve(mut a: TrainArgs) -> Result<Settings, CliError> {
    if let Some(path) = &a.config {
        let cfg = ConfigFile::load(path, CONFIG_KEYS)?;
        cfg.apply("data", &mut a.data)?;
        cfg.apply::<Topology>("topology", &mut a.topology)?;
        cfg.apply("eta", &mut a.eta)?;
        cfg.apply("epochs", &mut a.epochs)?;
        cfg.apply("batch-size", &mut a.batch_size)?;
        cfg.apply("shards", &mut a.shards)?;
        cfg.apply("seed", &mut a.seed)?;
        cfg.apply("out", &mut a.out)?;
        cfg.apply("metrics", &mut a.metrics)?;
    }
    let config = TrainConfig {
        eta: a.eta.unwrap_or(0.5),
        epochs: required(a.epochs, "epochs")?,
        batch_size: a.batch_size.unwrap_or(4),
        shards: a.shards.unwrap_or(1),
        seed: a.seed.unwrap_or(1),
        topology: required(a.topology, "topology")?,
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Settings {
        data: required(a.data, "data")?,
        config,
        out: a.out,
        metrics: a.metrics,
    })
}

pub fn run(args: TrainArgs, err: &mut dyn Write) -> Result<u8, CliError> {
    let wall_time = args.wall_time;
    let s = resolve(args)?;
    let ds = dataset_for(&s.data, &s.config.topology)?;

    let mut metrics = RunMetrics::new(s.config.topology.outputs());
    let mut tick = Instant::now();
    let outcome = train_with(&s.config, &ds.inputs, &ds.targets, |epoch, report| {
        let wall_ms = if wall_time {
            tick.elapsed().as_millis()
        } else {
            0
        };
        metrics.record(epoch, report, wall_ms);
        tick = Instant::now();
    })?;

    if let Some(path) = &s.out {
        let meta = RunFingerprint {
            eta: s.config.eta,
            batch_size: s.config.batch_size,
            shards: s.config.shards,
            seed: s.config.seed,
            epochs_completed: s.config.epochs,
        };
        save_checkpoint(&outcome.network, &meta, path)?;
    }
    if let Some(path) = &s.metrics {
        write_file(path, &metrics.to_csv())?;
    }
    match outcome.history.last() {
        Some(last) => {
            let _ = writeln!(
                err,
                "trained {} epochs, total_error {}",
                s.config.epochs, last.total
            );
        }
        None => {
            let _ = writeln!(err, "0 epochs requested; network left at initialization");
        }
    }
    Ok(EXIT_OK)
}

use std::io::Write;
use std::time::Instant;

use batchprop::batching::train;
use batchprop::loss::sse;
use batchprop::{Network, Topology, TrainConfig};

use super::{dataset_for, required, write_file};
use crate::config::ConfigFile;
use crate::metrics::{sweep_csv, SweepRow};
use crate::{CliError, SweepArgs, EXIT_OK};

const CONFIG_KEYS: &[&str] = &["data", "topology", "eta", "epochs", "sizes", "seed", "out"];

struct Sizes(Vec<usize>);

impl std::str::FromStr for Sizes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<_, _>>()
            .map(Sizes)
    }
}

pub fn run(mut a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    if let Some(path) = &a.config {
        let cfg = ConfigFile::load(path, CONFIG_KEYS)?;
        cfg.apply("data", &mut a.data)?;
        cfg.apply::<Topology>("topology", &mut a.topology)?;
        cfg.apply("eta", &mut a.eta)?;
        cfg.apply("epochs", &mut a.epochs)?;
        if let Some(Sizes(sizes)) = cfg.get("sizes")? {
            a.sizes = Some(sizes);
        }
        cfg.apply("seed", &mut a.seed)?;
        cfg.apply("out", &mut a.out)?;
    }
    let data = required(a.data, "data")?;
    let topology = required(a.topology, "topology")?;
    let epochs = required(a.epochs, "epochs")?;
    let sizes = required(a.sizes, "sizes")?;
    let eta = a.eta.unwrap_or(0.5);
    let seed = a.seed.unwrap_or(1);
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::Usage(
            "--sizes must list positive batch sizes".into(),
        ));
    }

    let ds = dataset_for(&data, &topology)?;
    if let Some(&too_big) = sizes.iter().find(|&&b| b > ds.len()) {
        return Err(CliError::Runtime(format!(
            "batch size {too_big} exceeds the {} rows in {}",
            ds.len(),
            data.display()
        )));
    }

    let mut rows = Vec::with_capacity(sizes.len());
    for &batch_size in &sizes {
        let config = TrainConfig {
            eta,
            epochs,
            batch_size,
            shards: 1,
            seed,
            topology: topology.clone(),
        };
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let start = Instant::now();
        let outcome = train(&config, &ds.inputs, &ds.targets)?;
        let final_error = match outcome.history.last() {
            Some(r) => r.total,
            None => {
                sse(
                    &Network::init(&topology, seed).predict(&ds.inputs)?,
                    &ds.targets,
                )?
                .total
            }
        };
        let wall_time_ms = if a.wall_time {
            start.elapsed().as_millis()
        } else {
            0
        };
        let _ = writeln!(err, "batch_size {batch_size}: final_error {final_error}");
        rows.push(SweepRow {
            batch_size,
            final_error,
            epochs,
            wall_time_ms,
        });
    }

    let csv = sweep_csv(&rows);
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Runtime(format!("writing output: {e}")))?,
    }
    Ok(EXIT_OK)
}

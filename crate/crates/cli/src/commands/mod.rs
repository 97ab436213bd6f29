pub mod eval;
pub mod gradcheck;
pub mod sweep;
pub mod train;

use std::path::Path;

use batchprop::persistence::load_dataset;
use batchprop::{Dataset, Topology};

use crate::CliError;

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Loads a dataset and checks its widths against `topology`.
pub(crate) fn dataset_for(path: &Path, topology: &Topology) -> Result<Dataset, CliError> {
    let ds = load_dataset(path)?;
    check_widths(&ds, topology, path)?;
    Ok(ds)
}

pub(crate) fn check_widths(ds: &Dataset, topology: &Topology, path: &Path) -> Result<(), CliError> {
    let (n_in, n_out) = (ds.inputs.cols(), ds.targets.cols());
    if n_in != topology.inputs() || n_out != topology.outputs() {
        return Err(CliError::Runtime(format!(
            "{}: dataset has {n_in} input and {n_out} target columns, but topology {topology} \
             expects {} inputs and {} outputs",
            path.display(),
            topology.inputs(),
            topology.outputs()
        )));
    }
    Ok(())
}

pub(crate) fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

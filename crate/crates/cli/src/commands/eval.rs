use std::io::Write;

use batchprop::loss::sse;
use batchprop::persistence::load_checkpoint;

use super::dataset_for;
use crate::{CliError, EvalArgs, EXIT_OK};

/// Writes `field,index,value` rows: `total`, then one `row_total` per item
/// and one `out_mean` per output (indices from 1).
pub fn run(args: EvalArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let (net, _) = load_checkpoint(&args.checkpoint)?;
    let ds = dataset_for(&args.data, net.topology())?;
    let report = sse(&net.predict(&ds.inputs)?, &ds.targets)?;

    let mut csv = String::from("field,index,value\n");
    csv.push_str(&format!("total,,{}\n", report.total));
    for (i, v) in report.per_row_total.iter().enumerate() {
        csv.push_str(&format!("row_total,{},{v}\n", i + 1));
    }
    for (j, v) in report.per_output_mean.iter().enumerate() {
        csv.push_str(&format!("out_mean,{},{v}\n", j + 1));
    }
    out.write_all(csv.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing output: {e}")))?;
    Ok(EXIT_OK)
}

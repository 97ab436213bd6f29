use std::io::Write;

use batchprop::GradCheckCase;

use crate::{CliError, GradcheckArgs, EXIT_FAILURE, EXIT_OK};

pub fn run(args: GradcheckArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(CliError::Usage(format!(
            "--epsilon must be positive, got {}",
            args.epsilon
        )));
    }
    if !(args.rtol >= 0.0 && args.rtol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--rtol must be non-negative, got {}",
            args.rtol
        )));
    }
    if args.batch == 0 {
        return Err(CliError::Usage("--batch must be at least 1".into()));
    }
    let case = GradCheckCase::random(&args.topology, args.batch, args.seed)?;
    let report = case.check(args.epsilon, args.rtol)?;
    writeln!(out, "{report}").map_err(|e| CliError::Runtime(format!("writing output: {e}")))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
}

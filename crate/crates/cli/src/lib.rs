pub mod error;
pub mod output;
pub mod run;
pub mod scenario;

use std::path::Path;

pub use error::{CliError, Result};
pub use output::{emit_csv, write_outputs};
pub use run::{run_scenario, ResultTable, RunOutput};
pub use scenario::{load_scenario, parse_scenario, Command, Scenario};

/// Parses, runs and writes one scenario; returns a one-line summary.
pub fn execute(
    command: Command,
    config: &Path,
    out: Option<&Path>,
    validate_only: bool,
) -> Result<String> {
    let s = load_scenario(config, Some(command))?;
    if validate_only {
        return Ok(format!(
            "ok: {} scenario {} is valid (hash {})",
            command,
            config.display(),
            s.hash()
        ));
    }
    let out = match (out, &s.output_path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => match config.parent() {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.clone(),
        },
        (None, None) => {
            return Err(CliError::validation(
                "output.path",
                "no output path (pass --out or set output.path)",
            ))
        }
    };
    let result = run_scenario(&s)?;
    write_outputs(&result, &out)?;
    Ok(format!(
        "wrote {} rows to {}",
        result.table.rows.len(),
        out.display()
    ))
}

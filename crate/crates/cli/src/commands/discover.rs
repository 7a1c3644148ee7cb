use std::io::Write;

use corona_core::dataset::Dataset;
use corona_core::evolve::{run_discovery_with, ExecutionMode};

use super::out_err;
use crate::config::RunConfigFile;
use crate::error::{parse_json, CliError};
use crate::DiscoverArgs;

/// Writes `report.json`, `leaderboard.txt` and `loss_trace.csv` under `--out`.
pub fn discover(args: &DiscoverArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file: RunConfigFile = parse_json(&args.config)?;
    let gp = file.gp_config()?;
    let data = file.select(Dataset::from_csv_path(&args.data, file.target.as_deref())?)?;
    let specs = file.monotonicity_specs(&data)?;
    let mode = if args.serial { ExecutionMode::Serial } else { ExecutionMode::Parallel };
    let report = run_discovery_with(&data, &specs, &gp, mode)?;

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::write(&args.out, e))?;
    let leaderboard = report.leaderboard();
    for (name, body) in [
        ("report.json", report.to_json()),
        ("leaderboard.txt", leaderboard.clone()),
        ("loss_trace.csv", report.loss_trace_csv()),
    ] {
        let path = args.out.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::write(&path, e))?;
    }
    out.write_all(leaderboard.as_bytes()).map_err(out_err)
}

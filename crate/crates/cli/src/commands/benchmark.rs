use std::fmt::Write as _;
use std::io::Write;

use corona_core::dataset::Dataset;
use corona_core::models::{BundleConfig, EmissionModel};

use super::{lookup, out_err};
use crate::error::CliError;
use crate::BenchmarkArgs;

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub row: usize,
    pub observed: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub model: String,
    pub rmse: f64,
    pub mre: f64,
    pub residuals: Vec<Residual>,
    /// 1-based data rows the model could not evaluate, with the reason.
    pub excluded: Vec<(usize, String)>,
}

/// Scores each model on the `E`, `n`, `d` columns. Rows sorted by RMSE.
pub fn benchmark_models(data: &Dataset, models: &[&dyn EmissionModel]) -> Result<Vec<BenchmarkRow>, CliError> {
    let col = |name: &str| {
        data.column(name)
            .ok_or_else(|| CliError::input(format!("dataset needs a `{name}` column")))
    };
    let (e, n, d) = (col("E")?, col("n")?, col("d")?);
    let y = data.target();

    let mut rows = Vec::with_capacity(models.len());
    for model in models {
        let mut residuals = Vec::new();
        let mut excluded = Vec::new();
        for i in 0..data.rows() {
            let value = BundleConfig::new(e[i], n[i], d[i]).and_then(|b| model.evaluate(&b));
            match value {
                Ok(p) => residuals.push(Residual { row: i + 1, observed: y[i], predicted: p }),
                Err(err) => excluded.push((i + 1, err.to_string())),
            }
        }
        let k = residuals.len() as f64;
        let rmse = (residuals.iter().map(|r| (r.predicted - r.observed).powi(2)).sum::<f64>() / k).sqrt();
        let mre = residuals.iter().map(|r| (r.predicted - r.observed).abs() / r.observed.abs()).sum::<f64>() / k;
        rows.push(BenchmarkRow { model: model.slug(), rmse, mre, residuals, excluded });
    }
    rows.sort_by(|a, b| a.rmse.total_cmp(&b.rmse));
    Ok(rows)
}

pub fn benchmark(args: &BenchmarkArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data = Dataset::from_csv_path(&args.data, args.target.as_deref())?;
    let models = args.models.iter().map(|m| lookup(m.trim())).collect::<Result<Vec<_>, _>>()?;
    let rows = benchmark_models(&data, &models)?;

    writeln!(out, "{:<20} {:>6} {:>8} {:>10} {:>10}", "model", "rows", "excluded", "RMSE", "MRE").map_err(out_err)?;
    for r in &rows {
        writeln!(
            out,
            "{:<20} {:>6} {:>8} {:>10.3} {:>10.4}",
            r.model,
            r.residuals.len(),
            r.excluded.len(),
            r.rmse,
            r.mre
        )
        .map_err(out_err)?;
    }
    for r in rows.iter().filter(|r| !r.excluded.is_empty()) {
        for (row, why) in &r.excluded {
            writeln!(out, "excluded: {} row {row}: {why}", r.model).map_err(out_err)?;
        }
    }

    if let Some(path) = &args.csv {
        let mut s = String::from("model,rows,excluded,rmse,mre\n");
        for r in &rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.model, r.residuals.len(), r.excluded.len(), r.rmse, r.mre);
        }
        std::fs::write(path, s).map_err(|e| CliError::write(path, e))?;
    }
    if let Some(path) = &args.residuals {
        let mut s = String::from("model,row,observed,predicted,residual\n");
        for r in &rows {
            for x in &r.residuals {
                let _ = writeln!(s, "{},{},{},{},{}", r.model, x.row, x.observed, x.predicted, x.predicted - x.observed);
            }
        }
        std::fs::write(path, s).map_err(|e| CliError::write(path, e))?;
    }
    Ok(())
}

use std::io::Write;

use corona_core::models::{BundleConfig, EmissionModel};

use super::{load_formula, lookup, out_err};
use crate::error::CliError;
use crate::EvalArgs;

pub fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bundle = BundleConfig::new(args.e, args.n, args.d)?;
    let formula;
    let model: &dyn EmissionModel = match (&args.model, &args.formula) {
        (Some(slug), None) => lookup(slug)?,
        (None, Some(path)) => {
            formula = load_formula(path, args.rank, args.kind.into())?;
            &formula
        }
        _ => return Err(CliError::input("give exactly one of --model and --formula")),
    };
    let value = model.evaluate(&bundle)?;
    writeln!(out, "{value:.3} {}", model.kind().unit()).map_err(out_err)
}

use std::io::Write;

use corona_core::propagation::{an_ground_level, ri_line_prediction, LineGeometry, PhaseCombinationRegistry};

use super::{lookup, out_err};
use crate::error::{parse_json, CliError};
use crate::{Kind, PredictArgs};

pub fn predict(args: &PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut geometry: LineGeometry = parse_json(&args.geometry)?;
    if args.f_ri.is_some() {
        geometry.f_ri = args.f_ri;
    }
    if args.rho.is_some() {
        geometry.rho = args.rho;
    }
    geometry.validate()?;
    let model = lookup(&args.model)?;

    match args.kind {
        Kind::An => {
            let p = an_ground_level(&geometry, model, args.c)?;
            if args.json {
                return writeln!(out, "{}", serde_json::to_string_pretty(&p).expect("serializable")).map_err(out_err);
            }
            writeln!(out, "{:>5}  {:>9}  {:>9}  {:>9}  {:>11}  {:>9}", "phase", "x", "h", "R", "L_AN", "L_p")
                .map_err(out_err)?;
            for (i, ph) in geometry.phases.iter().enumerate() {
                writeln!(
                    out,
                    "{:>5}  {:>9.3}  {:>9.3}  {:>9.3}  {:>11.3}  {:>9.3}",
                    i + 1,
                    ph.x,
                    ph.h,
                    p.distances[i],
                    p.generation[i],
                    p.contributions[i]
                )
                .map_err(out_err)?;
            }
            writeln!(out, "total  {:.3} dB(A)  (C = {})", p.total, p.c_coef).map_err(out_err)
        }
        Kind::Ri => {
            let registry = PhaseCombinationRegistry::builtin();
            let rule = registry.get(&args.combination).ok_or_else(|| {
                CliError::input(format!(
                    "unknown combination `{}`; known: {}",
                    args.combination,
                    registry.names().join(", ")
                ))
            })?;
            let p = ri_line_prediction(&geometry, model, rule)?;
            if args.json {
                return writeln!(out, "{}", serde_json::to_string_pretty(&p).expect("serializable")).map_err(out_err);
            }
            writeln!(out, "{:>5}  {:>9}  {:>9}  {:>11}  {:>12}", "phase", "x", "h", "Gamma", "RI").map_err(out_err)?;
            for (i, ph) in geometry.phases.iter().enumerate() {
                writeln!(
                    out,
                    "{:>5}  {:>9.3}  {:>9.3}  {:>11.3}  {:>12.3}",
                    i + 1,
                    ph.x,
                    ph.h,
                    p.phases[i].gamma_db,
                    p.phases[i].level
                )
                .map_err(out_err)?;
            }
            writeln!(out, "total  {:.3} dB(µV/m)  ({}, x = {} m)", p.level, p.combination, p.x).map_err(out_err)
        }
    }
}

//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails. The corona-cage check needs external measurements and is
//! skipped unless `CORONA_CAGE_AN_CSV` / `CORONA_CAGE_RI_CSV` point at it.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use corona_cli::commands::benchmark_models;
use corona_cli::{run, Cli, Command as CliCommand, DiscoverArgs};
use corona_core::dataset::Dataset;
use corona_core::evolve::{run_discovery_with, ExecutionMode, GPConfig};
use corona_core::expr::{Expr, ExprGraph};
use corona_core::models::{BundleConfig, ModelId, ModelRegistry};
use corona_core::objective::{fit_coefficients, hinge_penalty, monotonicity_loss, MonotonicitySpec, Sign};
use corona_core::propagation::{
    an_from_levels, build_line_model, corona_currents, gamma_linear, ground_field, modal_decompose, phase_distance,
    ri_level, Conductor, LineGeometry, MeasurementPoint, ModalDecomposition, Phase, DEFAULT_CONDUCTIVITY,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

const RECOVERY_R2: f64 = 0.999;
const RECOVERY_SECONDS: f64 = 300.0;
const ORACLE_REL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-9;
const FIT_TOL: f64 = 1e-6;
const AN_TOL: f64 = 1e-6;
const MODAL_RESIDUAL: f64 = 1e-8;
const SPECTRUM_TOL: f64 = 1e-9;
const ZERO_FIELD: f64 = 1e-15;
const LINEARITY_TOL: f64 = 1e-12;
const LEVEL_TOL: f64 = 1e-3;
const CAGE_BAND: f64 = 0.15;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

/// Collects sub-checks; the criterion passes only if all of them do.
#[derive(Default)]
struct Checks {
    notes: Vec<String>,
    failed: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failed.push(what);
        }
    }

    fn outcome(self) -> Outcome {
        if self.failed.is_empty() {
            Outcome::Pass(self.notes.join("; "))
        } else {
            Outcome::Fail(self.failed.join("; "))
        }
    }
}

/// `value` must match its exact derivation and round to the quoted 3-decimal figure.
fn quoted(checks: &mut Checks, label: &str, value: f64, derivation: f64, tol: f64, quoted: f64) {
    let rounded = (value * 1000.0).round() / 1000.0;
    checks.check(
        (value - derivation).abs() <= tol && (rounded - quoted).abs() < 1e-9,
        format!("{label} = {value:.9} (derivation {derivation:.9} ±{tol:e}, quoted {quoted:.3}, rounds to {rounded:.3})"),
    );
}

fn lg(x: f64) -> f64 {
    x.log10()
}

fn synthetic_grid() -> Dataset {
    let (mut e, mut n, mut d, mut y) = (vec![], vec![], vec![], vec![]);
    for ei in 0..10 {
        let ev = 12.0 + 2.0 * ei as f64;
        for nv in [4.0, 6.0, 8.0] {
            for dv in [2.0, 2.4, 3.0] {
                e.push(ev);
                n.push(nv);
                d.push(dv);
                y.push(1.022 * nv + 10.4 * dv + 30.839 - 933.633 / ev);
            }
        }
    }
    Dataset::new(vec![("E".into(), e), ("n".into(), n), ("d".into(), d)], "L_AN", y).unwrap()
}

fn synthetic_csv() -> String {
    let data = synthetic_grid();
    let mut s = String::from("E,n,d,L_AN\n");
    let (e, n, d) = (data.column("E").unwrap(), data.column("n").unwrap(), data.column("d").unwrap());
    for i in 0..data.rows() {
        s.push_str(&format!("{},{},{},{}\n", e[i], n[i], d[i], data.target()[i]));
    }
    s
}

fn synthetic_recovery() -> Outcome {
    let data = synthetic_grid();
    let specs: Vec<MonotonicitySpec> = ["E", "n", "d"]
        .iter()
        .map(|v| MonotonicitySpec::from_data(v, Sign::Increasing, &data).unwrap())
        .collect();
    let cfg = GPConfig { population_size: 200, generations: 100, max_terms: 4, seed: 1, ..GPConfig::default() };
    let start = Instant::now();
    let report = run_discovery_with(&data, &specs, &cfg, ExecutionMode::Serial).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let best = report.best().unwrap();
    let mut c = Checks::default();
    c.check(best.loss.r2 >= RECOVERY_R2, format!("best R² = {:.6} (≥ {RECOVERY_R2}): {}", best.loss.r2, best.equation));
    c.check(secs < RECOVERY_SECONDS, format!("{secs:.1} s on one core (< {RECOVERY_SECONDS} s)"));
    c.outcome()
}

fn formula_oracles() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(577);
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for id in ModelId::ALL {
        for _ in 0..100 {
            let (e, n, d) = oracle::point(*id, &mut rng);
            let got = id.evaluate(&BundleConfig::new(e, n, d).unwrap()).unwrap();
            let want = oracle::oracle(*id, e, n, d);
            let rel = (got - want).abs() / want.abs().max(1e-300);
            worst = worst.max(rel);
            if rel > ORACLE_REL {
                bad.push(format!("{id}@({e},{n},{d})"));
            }
        }
    }
    c.check(
        bad.is_empty(),
        format!("{} models x 100 points, worst relative error {worst:.1e} (≤ {ORACLE_REL:e}){}", ModelId::ALL.len(), if bad.is_empty() { String::new() } else { format!(", failing: {}", bad.join(" ")) }),
    );
    let b = BundleConfig::new(20.0, 8.0, 2.4).unwrap();
    let at = |id: ModelId| id.evaluate(&b).unwrap();
    let spots = [
        ("Discovered3-AN", ModelId::AnDiscovered3, 0.0878 * 160.0 + 72.3 * lg(2.4) - 648.7 / (20.0 * lg(20.0)), 16.607),
        (
            "Discovered4-RI",
            ModelId::RiDiscovered4,
            -117.2 * 8.0 / (64.0 * 2.4 - 2.4) - 133.5 * 8.0 / (20.0 + 8.0 * 2.4 * 2.4) + 98.68 - 629.7 / 20.0,
            44.832,
        ),
        ("BPA-AN", ModelId::AnBpa, 120.0 * lg(20.0) + 55.0 * lg(2.4) + 26.4 * lg(8.0) - 128.4, 72.477),
        ("CISPR-RI", ModelId::RiCispr, 70.0 - 580.0 / 20.0 + 35.0 * lg(2.4) - 10.0 * lg(8.0), 45.277),
        ("IREQ-RI", ModelId::RiIreq, -90.25 + 92.42 * lg(20.0) + 43.03 * lg(2.4) - 6.0, 40.352),
    ];
    for (label, id, derivation, q) in spots {
        quoted(&mut c, label, at(id), derivation, 1e-9, q);
    }
    c.outcome()
}

fn discovered_monotonicity() -> Outcome {
    let mut c = Checks::default();
    for id in [ModelId::AnDiscovered3, ModelId::RiDiscovered4] {
        for (var, lo, hi) in [("E", 12.0, 32.0), ("n", 4.0, 16.0), ("d", 1.5, 3.5)] {
            let ys: Vec<f64> = (0..50)
                .map(|i| {
                    let x = lo + (hi - lo) * i as f64 / 49.0;
                    let (e, n, d) = match var {
                        "E" => (x, 8.0, 2.4),
                        "n" => (20.0, x, 2.4),
                        _ => (20.0, 8.0, x),
                    };
                    id.evaluate(&BundleConfig::new(e, n, d).unwrap()).unwrap()
                })
                .collect();
            let (k, step) = ys
                .windows(2)
                .map(|w| w[1] - w[0])
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let at = lo + (hi - lo) * (k + 1) as f64 / 49.0;
            c.check(step >= -MONOTONE_TOL, format!("{id} over {var}: smallest step {step:.3e} at {var} = {at:.3}"));
        }
    }
    c.outcome()
}

fn monotonicity_penalty() -> Outcome {
    let mut c = Checks::default();
    let neg = hinge_penalty(&[-1.0, -2.0, -3.0], Sign::Increasing);
    c.check(neg == 2.0, format!("ŷ = -x on {{1,2,3}}, s = +1: {neg}"));
    let sq = hinge_penalty(&[1.0, 4.0, 9.0], Sign::Increasing);
    c.check(sq == 0.0, format!("ŷ = x² on {{1,2,3}}: {sq}"));
    let spec = MonotonicitySpec::new("x", Sign::Increasing, (1.0, 3.0), 3, BTreeMap::new()).unwrap();
    let g = ExprGraph::from_terms(&[(-1.0, Expr::var("x"))]);
    let via_graph = monotonicity_loss(&g, std::slice::from_ref(&spec)).unwrap();
    c.check(via_graph == 2.0, format!("graph -x swept on the same grid: {via_graph}"));

    let x: Vec<f64> = (1..=12).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| 20.0 - 1.5 * v).collect();
    let data = Dataset::new(vec![("x".into(), x)], "y", y).unwrap();
    let spec = MonotonicitySpec::from_data("x", Sign::Increasing, &data).unwrap();
    let cfg = GPConfig { population_size: 60, generations: 15, lambda_mono: 1e6, seed: 5, ..GPConfig::default() };
    let report = run_discovery_with(&data, std::slice::from_ref(&spec), &cfg, ExecutionMode::Parallel).unwrap();
    let best = report.best().unwrap();
    let grid: BTreeMap<String, Vec<f64>> = [("x".to_string(), spec.grid_points())].into();
    let ys = best.graph.predict(&grid).unwrap();
    let worst = ys.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    c.check(worst >= 0.0, format!("λ = 1e6 on anti-monotone data: best `{}` has smallest step {worst:.3e}", best.equation));
    c.outcome()
}

fn least_squares() -> Outcome {
    let mut c = Checks::default();
    let (a, b, k) = (3.25, -7.5, 12.0);
    let xs: Vec<f64> = (0..25).map(|i| 1.0 + 0.37 * i as f64).collect();
    let zs: Vec<f64> = (0..25).map(|i| 2.0 + ((i * 7) % 11) as f64 * 0.5).collect();
    let y: Vec<f64> = xs.iter().zip(&zs).map(|(x, z)| a * x * x + b * x / z + k).collect();
    let data = Dataset::new(vec![("x".into(), xs.clone()), ("z".into(), zs)], "y", y).unwrap();
    let g = ExprGraph::from_terms(&[
        (1.0, Expr::power_product(&[("x", 2.0)])),
        (1.0, Expr::ratio(vec![Expr::var("x")], Expr::var("z"))),
        (1.0, Expr::Const),
    ]);
    let (fitted, _) = fit_coefficients(&g, &data).unwrap();
    let err = fitted.coefficients().iter().zip([a, b, k]).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    c.check(err <= FIT_TOL, format!("generator coefficients recovered, max error {err:.2e} (≤ {FIT_TOL:e})"));

    let y: Vec<f64> = xs.iter().map(|x| 4.0 * x).collect();
    let data = Dataset::new(vec![("x".into(), xs)], "y", y).unwrap();
    let dup = ExprGraph::from_terms(&[(1.0, Expr::var("x")), (1.0, Expr::var("x"))]);
    let (fitted, _) = fit_coefficients(&dup, &data).unwrap();
    let coefs = fitted.coefficients();
    let split = (coefs[0] - 2.0).abs().max((coefs[1] - 2.0).abs());
    c.check(split <= FIT_TOL, format!("duplicate term y = 4x splits as ({:.9}, {:.9})", coefs[0], coefs[1]));
    c.outcome()
}

fn an_propagation() -> Outcome {
    let mut c = Checks::default();
    let single = an_from_levels(&[50.0], &[10.0], 11.4).total;
    quoted(&mut c, "(50 dB, R = 10, C = 11.4)", single, 50.0 - 11.4 - 5.8, AN_TOL, 32.8);
    let three = an_from_levels(&[57.2; 3], &[10.0; 3], 11.4).total;
    quoted(&mut c, "three equal 40 dB contributions", three, 40.0 + 10.0 * 3f64.log10(), AN_TOL, 44.771);
    let phase = Phase {
        x: -15.0,
        h: 20.0,
        e: 20.0,
        n: 1.0,
        d: 2.4,
        r_sub: None,
        bundle_radius: None,
        r_eq: None,
        l_an: None,
        gamma_ri: None,
    };
    let geom = LineGeometry { phases: vec![phase], mic: MeasurementPoint { x: 0.0, h: 1.5 }, f_ri: None, rho: None };
    let r = phase_distance(&geom, 0).unwrap();
    quoted(&mut c, "distance (-15, 20) to (0, 1.5)", r, (225.0f64 + 342.25).sqrt(), AN_TOL, 23.817);
    c.outcome()
}

fn random_conductors(rng: &mut ChaCha8Rng) -> Vec<Conductor> {
    loop {
        let k = rng.gen_range(1..=6);
        let cs: Vec<Conductor> = (0..k)
            .map(|_| Conductor { x: rng.gen_range(-20.0..20.0), h: rng.gen_range(8.0..40.0), radius: rng.gen_range(0.01..0.3) })
            .collect();
        let apart = cs
            .iter()
            .enumerate()
            .all(|(i, a)| cs[i + 1..].iter().all(|b| (a.x - b.x).hypot(a.h - b.h) >= 1.0));
        if apart {
            return cs;
        }
    }
}

fn ri_propagation() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(582);
    let mut worst_residual = 0.0f64;
    let mut worst_p0 = 0.0f64;
    let mut worst_linear = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let cs = random_conductors(&mut rng);
        let model = build_line_model(&cs, rng.gen_range(0.1e6..2.0e6), rng.gen_range(10.0..2000.0), DEFAULT_CONDUCTIVITY).unwrap();
        match modal_decompose(&model) {
            Ok(modes) => {
                worst_residual = worst_residual.max(modes.residual_zy).max(modes.residual_yz);
                let g: Vec<f64> = cs.iter().map(|_| gamma_linear(rng.gen_range(0.0..60.0))).collect();
                let k = rng.gen_range(0.1..10.0);
                let scaled: Vec<f64> = g.iter().map(|v| v * k).collect();
                let i1 = corona_currents(&model, &modes, &g).unwrap();
                let i2 = corona_currents(&model, &modes, &scaled).unwrap();
                let norm = i1.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for (a, b) in i1.iter().zip(&i2) {
                    worst_linear = worst_linear.max((a * k - b).norm() / (k * norm));
                }
            }
            Err(_) => failures += 1,
        }
        let currents: Vec<Complex64> = cs.iter().map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let (h, _) = ground_field(&cs, &currents, Complex64::new(0.0, 0.0), rng.gen_range(-100.0..100.0));
        worst_p0 = worst_p0.max(h.norm());
    }
    c.check(
        failures == 0 && worst_residual <= MODAL_RESIDUAL,
        format!("100 random lines: {failures} decomposition failures, worst residual {worst_residual:.1e} (≤ {MODAL_RESIDUAL:e})"),
    );
    let a = DMatrix::from_fn(3, 3, |i, j| Complex64::new(if i == j { 4.0 } else { 1.0 }, 0.0));
    let modes = ModalDecomposition::from_products(&a, &a).unwrap();
    let mut re: Vec<f64> = modes.lambda.iter().map(|l| l.re).collect();
    re.sort_by(f64::total_cmp);
    let spec_err = re
        .iter()
        .zip([3.0, 3.0, 6.0])
        .map(|(g, w)| (g - w).abs())
        .chain(modes.lambda.iter().map(|l| l.im.abs()))
        .fold(0.0, f64::max);
    c.check(spec_err <= SPECTRUM_TOL, format!("balanced 3x3 spectrum {re:?}, error {spec_err:.1e} (≤ {SPECTRUM_TOL:e})"));
    c.check(worst_p0 <= ZERO_FIELD, format!("P = 0: max |H_x| {worst_p0:.1e} (≤ {ZERO_FIELD:e})"));
    c.check(worst_linear <= LINEARITY_TOL, format!("Γ scaling: worst relative deviation {worst_linear:.1e} (≤ {LINEARITY_TOL:e})"));
    let level = ri_level(Complex64::new(1e-6 * 120.0 * PI, 0.0)).unwrap();
    c.check((level - 51.527).abs() <= LEVEL_TOL, format!("|H_x| = 1 µA/m: {level:.6} dB (51.527 ± {LEVEL_TOL:e})"));
    c.outcome()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("synthetic.csv");
    std::fs::write(&data, synthetic_csv()).unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"population_size": 80, "generations": 20, "max_terms": 4, "seed": 42,
            "monotonicity": [{"var": "E", "sign": "+1"}, {"var": "n", "sign": "+1"}, {"var": "d", "sign": "+1"}]}"#,
    )
    .unwrap();
    let mut reports = Vec::new();
    for (name, serial) in [("p1", false), ("p2", false), ("s1", true), ("s2", true)] {
        let out = dir.path().join(name);
        let args = DiscoverArgs { data: data.clone(), config: config.clone(), out: out.clone(), serial };
        if let Err(e) = run(Cli { command: CliCommand::Discover(args) }, &mut Vec::new()) {
            return Outcome::Fail(format!("discover failed: {e}"));
        }
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    let mut c = Checks::default();
    c.check(reports[0] == reports[1], "parallel runs byte-identical");
    c.check(reports[2] == reports[3], "serial runs byte-identical");
    c.check(reports[0] == reports[2], format!("serial = parallel ({} bytes)", reports[0].len()));
    c.outcome()
}

fn benchmark_rmse(csv: &str, slug: &str) -> Result<f64, String> {
    let data = Dataset::from_csv_path(csv, None).map_err(|e| e.to_string())?;
    let model = ModelRegistry::builtin().get(slug).map_err(|e| e.to_string())?;
    let rows = benchmark_models(&data, &[model]).map_err(|e| e.to_string())?;
    Ok(rows[0].rmse)
}

fn cage_reproduction() -> Outcome {
    let cases = [("CORONA_CAGE_AN_CSV", "an-discovered-3", 1.087), ("CORONA_CAGE_RI_CSV", "ri-discovered-4", 0.632)];
    let present: Vec<_> = cases.iter().filter_map(|(var, m, r)| std::env::var(var).ok().map(|p| (p, *m, *r))).collect();
    if present.is_empty() {
        return Outcome::Skip("corona-cage data not supplied (set CORONA_CAGE_AN_CSV / CORONA_CAGE_RI_CSV)".into());
    }
    let mut c = Checks::default();
    for (path, model, reference) in present {
        match benchmark_rmse(&path, model) {
            Ok(rmse) => c.check(
                (rmse - reference).abs() <= CAGE_BAND * reference,
                format!("{model}: RMSE {rmse:.3} (reference {reference} ± 15%)"),
            ),
            Err(e) => c.check(false, format!("{model}: {e}")),
        }
    }
    c.outcome()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("synthetic recovery", synthetic_recovery),
        ("formula oracles and spot values", formula_oracles),
        ("monotonicity of discovered laws", discovered_monotonicity),
        ("monotonicity penalty", monotonicity_penalty),
        ("least squares", least_squares),
        ("AN propagation", an_propagation),
        ("RI propagation", ri_propagation),
        ("determinism", determinism),
        ("corona-cage reproduction", cage_reproduction),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria failed", failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

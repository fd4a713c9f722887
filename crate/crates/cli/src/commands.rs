use std::fs;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use cubeq_core::cubic::{
    cubic_report_symbolic, cubic_residual, verify_railway_row, yang_baxter_residual, CubicOptions,
    Quadruple, RailwayMode,
};
use cubeq_core::lattice::{
    build_transfer, build_transfer_at, commutator_norm, extract_hamiltonian, partition_trace,
    placement_plan, LatticeSpec, PartitionValue, PlanKind, TransferMatrix,
};
use cubeq_core::report::Conventions;
use cubeq_core::rmatrix::RMatrixFour;
use cubeq_core::solver::{als_search, AlsConfig};
use cubeq_core::{ResidualReport, Variable};

use crate::config::{BackendChoice, Config, MatrixSpec, Named, PlaneOrder};
use crate::{CliError, Command};

pub struct RunReport {
    pub passed: bool,
    pub body: Map<String, Value>,
}

impl RunReport {
    fn new(passed: bool) -> Self {
        Self {
            passed,
            body: Map::new(),
        }
    }

    fn with(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.body.insert(
            key.to_string(),
            serde_json::to_value(value).expect("report values serialize"),
        );
        self
    }

    pub fn into_json(self, command: Command) -> Value {
        let mut out = Map::new();
        out.insert("schema".into(), json!(cubeq_core::report::REPORT_SCHEMA));
        out.insert("command".into(), json!(command.name()));
        out.insert("passed".into(), json!(self.passed));
        out.extend(self.body);
        Value::Object(out)
    }
}

/// Zero every `wall_time_ms` field.
pub fn strip_timing(body: &mut Map<String, Value>) {
    for (key, value) in body.iter_mut() {
        if key == "wall_time_ms" {
            *value = json!(0.0);
        } else {
            strip_value(value);
        }
    }
}

fn strip_value(value: &mut Value) {
    match value {
        Value::Object(map) => strip_timing(map),
        Value::Array(items) => items.iter_mut().for_each(strip_value),
        _ => {}
    }
}

pub fn execute(command: Command, config: &Config) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let report = match command {
        Command::VerifyKitaev => verify_cubic(config, Quadruple::kitaev())?,
        Command::VerifyCubic => verify_cubic(config, user_quadruple(config, false)?)?,
        Command::Railway => railway(config)?,
        Command::TransferCommute => transfer_commute(config)?,
        Command::ExtractHamiltonian => hamiltonian(config)?,
        Command::Partition => partition(config)?,
        Command::YbCheck => yb_check(config)?,
        Command::SearchIntertwiner => search(config)?,
    };
    Ok(report
        .with("backend", backend_name(config))
        .with(
            "conventions",
            Conventions::with_swap(config.swap_uv_assignment),
        )
        .with("wall_time_ms", start.elapsed().as_secs_f64() * 1e3))
}

fn backend_name(config: &Config) -> &'static str {
    match config.backend.unwrap_or_default() {
        BackendChoice::Exact => "exact",
        BackendChoice::Dense => "dense",
    }
}

fn exact(config: &Config) -> bool {
    config.backend.unwrap_or_default() == BackendChoice::Exact
}

fn options(config: &Config) -> CubicOptions {
    CubicOptions {
        swap_uv_assignment: config.swap_uv_assignment,
    }
}

fn spec_or(spec: &Option<MatrixSpec>, named: Named, param: Variable) -> MatrixSpec {
    spec.clone().unwrap_or(MatrixSpec {
        named: Some(named),
        param: Some(param),
        ..MatrixSpec::default()
    })
}

/// `r_matrices`; with `kitaev_defaults` missing entries fall back to the
/// Kitaev quadruple.
fn user_quadruple(config: &Config, kitaev_defaults: bool) -> Result<Quadruple, CliError> {
    let q = &config.r_matrices;
    let defaults = [
        (Named::KitaevA, Variable::U),
        (Named::KitaevB, Variable::V),
        (Named::KitaevB, Variable::V),
        (Named::KitaevAInv, Variable::U),
    ];
    let mut out = Vec::new();
    for (k, spec) in [&q.r1, &q.r2, &q.r3, &q.r4].into_iter().enumerate() {
        let key = format!("r_matrices.r{}", k + 1);
        let spec = match spec {
            Some(s) => s.clone(),
            None if kitaev_defaults => spec_or(&None, defaults[k].0, defaults[k].1),
            None => return Err(CliError::Config(format!("missing key `{key}`"))),
        };
        out.push(config.matrix(&key, &spec)?.as_check()?);
    }
    let [r1, r2, r3, r4]: [RMatrixFour; 4] = out
        .try_into()
        .map_err(|_| CliError::Config("r_matrices".into()))?;
    Ok(Quadruple::new(r1, r2, r3, r4)?)
}

fn verify_cubic(config: &Config, quad: Quadruple) -> Result<RunReport, CliError> {
    let tolerance = config.tolerance();
    let mut checks: Vec<ResidualReport> = Vec::new();
    if exact(config) && quad.is_pauli() {
        checks.push(cubic_report_symbolic(&quad, options(config))?);
    }
    let mut worst: f64 = 0.0;
    for (u, v) in config.grid() {
        let report = cubic_residual(&quad, u, v, options(config))?;
        worst = worst.max(report.relative);
        checks.push(report);
    }
    let passed = checks.iter().all(|r| r.passes(tolerance));
    Ok(RunReport::new(passed)
        .with("tolerance", tolerance)
        .with("exact_zero", checks.first().and_then(|r| r.exact_zero))
        .with("max_relative", worst)
        .with("checks", checks))
}

fn railway(config: &Config) -> Result<RunReport, CliError> {
    let quad = user_quadruple(config, true)?;
    let (u, v) = config.point();
    let mode = if exact(config) && quad.is_pauli() {
        RailwayMode::Exact
    } else {
        RailwayMode::Numeric { u, v }
    };
    let report = verify_railway_row(config.lattice_width(), &quad, mode, options(config))?;
    let passed = report.passes(config.tolerance());
    Ok(RunReport::new(passed)
        .with("tolerance", config.tolerance())
        .with("checks", [report]))
}

/// `T(x) = T_white(x) · T_dark(x)` (or the reverse order) for both parameters.
fn transfer_pair(config: &Config) -> Result<(TransferMatrix, TransferMatrix), CliError> {
    let spec = LatticeSpec::new(config.lattice_width(), config.d)?;
    let plan = placement_plan(&spec, config.layout);
    let white = config
        .matrix(
            "white",
            &spec_or(&config.white, Named::KitaevA, Variable::U),
        )?
        .as_check()?;
    let dark = config
        .matrix("dark", &spec_or(&config.dark, Named::KitaevB, Variable::U))?
        .as_check()?;
    let combine = |w: TransferMatrix, d: TransferMatrix| match config.plane_order {
        PlaneOrder::WhiteFirst => w.then(&d),
        PlaneOrder::DarkFirst => d.then(&w),
    };
    let build =
        |w: &RMatrixFour, d: &RMatrixFour, at: Option<C64>| -> Result<TransferMatrix, CliError> {
            let (tw, td) = match at {
                None => (
                    build_transfer(&spec, &plan, PlanKind::White, w, config.leg_order)?,
                    build_transfer(&spec, &plan, PlanKind::Dark, d, config.leg_order)?,
                ),
                Some(x) => (
                    build_transfer_at(&spec, &plan, PlanKind::White, w, x, x, config.leg_order)?,
                    build_transfer_at(&spec, &plan, PlanKind::Dark, d, x, x, config.leg_order)?,
                ),
            };
            Ok(combine(tw, td)?)
        };
    if exact(config) && white.pauli().is_some() && dark.pauli().is_some() {
        let first = build(&white, &dark, None)?;
        let second = build(&white.swap_variables(), &dark.swap_variables(), None)?;
        Ok((first, second))
    } else {
        let (u, v) = config.point();
        Ok((
            build(&white, &dark, Some(u))?,
            build(&white, &dark, Some(v))?,
        ))
    }
}

fn emit(config: &Config, t: &TransferMatrix) -> Result<(), CliError> {
    let Some(path) = &config.emit_transfer else {
        return Ok(());
    };
    let text = match (t.pauli(), t.sparse()) {
        (Some(op), _) => op.to_string(),
        (None, Some(m)) => {
            serde_json::to_string(&m.to_dense()?.to_json()).expect("dense JSON serializes")
        }
        (None, None) => unreachable!("transfer matrices have one backend"),
    };
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn transfer_commute(config: &Config) -> Result<RunReport, CliError> {
    let (first, second) = transfer_pair(config)?;
    emit(config, &first)?;
    let mut report = commutator_norm(&first, &second)?;
    let scale = match (first.sparse(), second.sparse()) {
        (Some(a), Some(b)) => a.frobenius_norm() * b.frobenius_norm(),
        _ => 1.0,
    };
    report = report.clone().numeric(report.absolute, scale);
    let passed = report.passes(config.tolerance());
    let notes = if config.leg_order.is_some() {
        vec!["leg order overridden; the mapping of R-matrix legs onto plaquette corners is a convention"]
    } else {
        vec![]
    };
    Ok(RunReport::new(passed)
        .with("tolerance", config.tolerance())
        .with("layout", config.layout)
        .with("plane_order", format!("{:?}", config.plane_order))
        .with("notes", notes)
        .with("checks", [report]))
}

fn hamiltonian(config: &Config) -> Result<RunReport, CliError> {
    let spec = LatticeSpec::new(config.lattice_width(), config.d)?;
    let (_, report) = extract_hamiltonian(&spec, config.layout)?;
    let passed =
        report.matches_plaquette_sum && report.all_terms_commute && report.identity_at_degree_zero;
    Ok(RunReport::new(passed).with("hamiltonian", report))
}

fn partition(config: &Config) -> Result<RunReport, CliError> {
    let power = config.power.unwrap_or(2);
    let (t, _) = transfer_pair(config)?;
    emit(config, &t)?;
    let (u, _) = config.point();
    let report = match partition_trace(&t, power)? {
        PartitionValue::Exact(z) => {
            let value = z.evaluate(u, u);
            RunReport::new(true)
                .with("polynomial", z.to_string())
                .with("value", [value.re, value.im])
                .with("evaluated_at", u.re)
        }
        PartitionValue::Numeric(value) => RunReport::new(true)
            .with("value", [value.re, value.im])
            .with("evaluated_at", u.re),
    };
    Ok(report
        .with("power", power)
        .with("L", config.lattice_width()))
}

fn yb_check(config: &Config) -> Result<RunReport, CliError> {
    let spec = config.r.clone().unwrap_or(MatrixSpec {
        named: Some(Named::Swap),
        ..MatrixSpec::default()
    });
    let r = config.two_site(&spec)?;
    let absolute = yang_baxter_residual(&r, config.d)?;
    let scale = r.frobenius_norm().powi(3);
    let report =
        ResidualReport::new("yang-baxter", json!({"d": config.d})).numeric(absolute, scale);
    let passed = report.passes(config.tolerance());
    Ok(RunReport::new(passed)
        .with("tolerance", config.tolerance())
        .with("checks", [report]))
}

fn search(config: &Config) -> Result<RunReport, CliError> {
    let quad = user_quadruple(config, true)?;
    let [r1, r2, _, _] = quad.matrices();
    let (u, v) = config.point();
    let seeds = config.seeds.clone().unwrap_or_else(|| vec![config.seed()]);
    let defaults = AlsConfig::default();
    let mut traces = Vec::new();
    for seed in seeds {
        let als = AlsConfig {
            seed,
            max_iterations: config.max_iterations.unwrap_or(defaults.max_iterations),
            residual_tolerance: config
                .residual_tolerance
                .unwrap_or(defaults.residual_tolerance),
            stall_tolerance: config.stall_tolerance.unwrap_or(defaults.stall_tolerance),
            ..defaults.clone()
        };
        traces.push(als_search(r1, r2, u, v, &als)?);
    }
    let passed = traces.iter().any(|t| t.converged);
    let best = traces
        .iter()
        .map(|t| t.final_residual())
        .fold(f64::INFINITY, f64::min);
    Ok(RunReport::new(passed)
        .with("best_residual", best)
        .with("point", [u.re, v.re])
        .with("traces", traces))
}

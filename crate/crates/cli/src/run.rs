use ionqrm_core::analysis::{
    ajc_rabi_experiment, dispersive_error_scan, dispersive_spectral_distance, jc_rabi_experiment,
    lamb_dicke_remainder, regime_ratios, speed_comparison, truncation_convergence,
    verify_t_transformation,
};
use ionqrm_core::checks::{run_all, CheckSettings};
use ionqrm_core::linalg::eigenvalues;
use ionqrm_core::model::{
    build_t, classify_regime, epsilons, h_qrm, rotation_diagnostic, small_rotation, SmallRotation,
};
use ionqrm_core::propagator::{propagate, propagate_with_reference, uniform_times};
use ionqrm_core::{
    ComplexMatrix, HamiltonianKind, QuantumState, SigmaYConvention, Spin, TruncationSpec, C64,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{
    BuildTarget, Command, ConfigError, Experiment, OutputFormat, RunConfig, ScanKind, SpinLabel,
    StateKind, SCHEMA_VERSION,
};
use crate::output::{evolution_csv, table_csv, Cell};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] ionqrm_core::Error),

    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(e) => e.kind(),
            Self::Core(_) => "computation",
            Self::Io(_) => "io",
        }
    }

    /// Error record written to stderr.
    pub fn to_json(&self) -> Value {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        if let Self::Config(c) = self {
            if let Some(line) = c.line() {
                err["line"] = json!(line);
            }
        }
        json!({ "schema_version": SCHEMA_VERSION, "error": err })
    }
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub body: String,
    /// False when a verification or check ran but did not pass.
    pub success: bool,
    /// Human-readable progress lines for stderr.
    pub log: Vec<String>,
}

impl RunOutput {
    fn ok(body: String) -> Self {
        Self {
            body,
            success: true,
            log: Vec::new(),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.command {
        Command::Build => build(cfg),
        Command::Verify => verify(cfg),
        Command::Evolve => evolve(cfg),
        Command::Scan => scan(cfg),
        Command::Regime => Ok(regime(cfg)),
        Command::AllChecks => Ok(all_checks(cfg)),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn matrix_entries(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    let mut entries = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            entries.push([z.re, z.im]);
        }
    }
    entries
}

fn build(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (p, trunc) = (&cfg.params, cfg.trunc);
    let m = match cfg.build.target {
        BuildTarget::Hamiltonian(HamiltonianKind::Qrm) => {
            h_qrm(p, trunc, cfg.build.include_constant)?
        }
        BuildTarget::Hamiltonian(kind) => kind.build(p, trunc)?,
        BuildTarget::Transform => build_t(p.eta, trunc),
        BuildTarget::U1 => small_rotation(SmallRotation::U1, epsilons(p)?.eps1, trunc),
        BuildTarget::U2 => small_rotation(SmallRotation::U2, epsilons(p)?.eps2, trunc),
    };
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "operator": cfg.build.target.as_str(),
        "params": p,
        "trunc": trunc,
        "dim": m.nrows(),
        "entries": matrix_entries(&m),
    });
    Ok(RunOutput::ok(format!("{v}\n")))
}

fn verify(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (p, trunc, th) = (&cfg.params, cfg.trunc, &cfg.analysis);
    let report = match cfg.verify.experiment {
        Experiment::TTransformation => verify_t_transformation(p, trunc, th)?,
        Experiment::DispersiveScan => dispersive_error_scan(p, &cfg.scan.etas, trunc, th)?,
        Experiment::JcRabi => jc_rabi_experiment(p, cfg.verify.n0, trunc, th)?,
        Experiment::AjcRabi => ajc_rabi_experiment(p, cfg.verify.n0, trunc, th)?,
        Experiment::Truncation => truncation_convergence(
            cfg.scan.hamiltonian,
            p,
            &cfg.scan.n_list,
            cfg.scan.levels,
            th,
        )?,
        Experiment::Speed => speed_comparison(p, th)?,
        Experiment::Rotation => {
            let diagnostics = [SigmaYConvention::Literal, SigmaYConvention::Standard]
                .into_iter()
                .map(|c| rotation_diagnostic(p, trunc, c))
                .collect::<Result<Vec<_>, _>>()?;
            let v = json!({ "schema_version": SCHEMA_VERSION, "rotation": diagnostics });
            return Ok(RunOutput::ok(pretty(&v)));
        }
    };
    let line = format!(
        "{} {}",
        report.name,
        if report.pass { "PASS" } else { "FAIL" }
    );
    let v = json!({ "schema_version": SCHEMA_VERSION, "report": report });
    Ok(RunOutput {
        body: pretty(&v),
        success: report.pass,
        log: vec![line],
    })
}

fn evolve(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (p, trunc, e) = (&cfg.params, cfg.trunc, &cfg.evolve);
    let spin = match e.spin {
        SpinLabel::E => Spin::Excited,
        SpinLabel::G => Spin::Ground,
    };
    let psi0 = match e.state {
        StateKind::Fock => QuantumState::fock(spin, e.fock, trunc)?,
        StateKind::Coherent => {
            QuantumState::coherent(spin, C64::new(e.alpha_re, e.alpha_im), trunc)
        }
    };
    let h = e.hamiltonian.build(p, trunc)?;
    let times = uniform_times(e.t_max, e.steps);
    let result = match e.reference {
        Some(r) => propagate_with_reference(&h, &r.build(p, trunc)?, &psi0, &times)?,
        None => propagate(&h, &psi0, &times)?,
    };
    let body = match cfg.output_format() {
        OutputFormat::Csv => evolution_csv(&result),
        OutputFormat::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "hamiltonian": e.hamiltonian.as_str(),
            "reference": e.reference.map(|r| r.as_str()),
            "params": p,
            "trunc": trunc,
            "records": result.records,
        })),
    };
    Ok(RunOutput::ok(body))
}

fn scan(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (p, trunc, s) = (&cfg.params, cfg.trunc, &cfg.scan);
    let (header, rows): (Vec<&str>, Vec<Vec<Cell>>) = match s.kind {
        ScanKind::Dispersive => {
            let d = s
                .etas
                .par_iter()
                .map(|&eta| dispersive_spectral_distance(&p.with_eta(eta), trunc, s.levels))
                .collect::<Result<Vec<_>, _>>()?;
            (
                vec!["eta", "spectral_distance"],
                s.etas
                    .iter()
                    .zip(d)
                    .map(|(&e, d)| vec![Cell::Real(e), Cell::Real(d)])
                    .collect(),
            )
        }
        ScanKind::LambDicke => {
            let d = s
                .etas
                .par_iter()
                .map(|&eta| lamb_dicke_remainder(&p.with_eta(eta), trunc))
                .collect::<Result<Vec<_>, _>>()?;
            (
                vec!["eta", "remainder_norm"],
                s.etas
                    .iter()
                    .zip(d)
                    .map(|(&e, d)| vec![Cell::Real(e), Cell::Real(d)])
                    .collect(),
            )
        }
        ScanKind::Truncation => {
            let spectra = s
                .n_list
                .par_iter()
                .map(|&n| {
                    let h = s.hamiltonian.build(p, TruncationSpec::unguarded(n)?)?;
                    Ok(eigenvalues(&h)?
                        .into_iter()
                        .take(s.levels)
                        .collect::<Vec<f64>>())
                })
                .collect::<Result<Vec<_>, ionqrm_core::Error>>()?;
            let mut rows = Vec::with_capacity(spectra.len());
            for (k, (&n, ev)) in s.n_list.iter().zip(&spectra).enumerate() {
                let diff = if k == 0 {
                    Cell::Empty
                } else {
                    Cell::Real(
                        spectra[k - 1]
                            .iter()
                            .zip(ev)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max),
                    )
                };
                rows.push(vec![Cell::Int(n), Cell::Real(ev[0]), diff]);
            }
            (vec!["n_max", "ground_energy", "max_diff"], rows)
        }
    };
    let body = match cfg.output_format() {
        OutputFormat::Csv => table_csv(&header, &rows),
        OutputFormat::Json => {
            let points: Vec<Value> = rows
                .iter()
                .map(|row| {
                    Value::Object(
                        header
                            .iter()
                            .zip(row)
                            .map(|(h, v)| (h.to_string(), v.to_json()))
                            .collect(),
                    )
                })
                .collect();
            pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "scan": s.kind.as_str(),
                "params": p,
                "trunc": trunc,
                "points": points,
            }))
        }
    };
    Ok(RunOutput::ok(body))
}

fn regime(cfg: &RunConfig) -> RunOutput {
    let label = classify_regime(&cfg.params, &cfg.regime);
    let ratios = regime_ratios(&cfg.params);
    let body = match cfg.output_format() {
        OutputFormat::Json => pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "regime": label,
            "ratios": ratios,
        })),
        OutputFormat::Csv => {
            let mut text = format!("{label}\n");
            for (k, v) in &ratios {
                text.push_str(&format!("{k} = {}\n", crate::output::fmt_f64(*v)));
            }
            text
        }
    };
    RunOutput::ok(body)
}

fn all_checks(cfg: &RunConfig) -> RunOutput {
    let settings = CheckSettings {
        seed: cfg.seed,
        analysis: cfg.analysis,
        regime: cfg.regime,
        ..CheckSettings::default()
    };
    let outcomes = run_all(&settings);
    let pass = outcomes.iter().all(|o| o.pass);
    let log = outcomes.iter().map(|o| o.summary_line()).collect();
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "pass": pass,
        "settings": settings,
        "criteria": outcomes,
    });
    RunOutput {
        body: pretty(&v),
        success: pass,
        log,
    }
}

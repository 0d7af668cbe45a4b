//! Run configuration: a line-oriented `key = value` document.
//!
//! ```text
//! # comment
//! command = verify
//! nu = 1
//! Omega = 0.7
//! eta = 0.3
//!
//! [verify]
//! experiment = t_transformation
//! ```
//!
//! Keys are flat or dotted (`scan.etas`); a `[section]` header prefixes the
//! keys that follow it. Values are bare tokens; lists are comma-separated.
//! Duplicate keys and unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ionqrm_core::analysis::AnalysisThresholds;
use ionqrm_core::model::epsilons;
use ionqrm_core::{HamiltonianKind, IonParams, RegimeThresholds, TruncationSpec};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("unknown key '{key}' on line {line}")]
    UnknownKey { line: usize, key: String },

    #[error("invalid value for '{key}' on line {line}: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },

    #[error("constraint violated: {0}")]
    Constraint(String),
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Syntax { .. } => "syntax",
            Self::UnknownKey { .. } => "unknown_key",
            Self::InvalidValue { .. } => "invalid_value",
            Self::Constraint(_) => "constraint",
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            Self::Syntax { line, .. }
            | Self::UnknownKey { line, .. }
            | Self::InvalidValue { line, .. } => Some(*line),
            Self::Constraint(_) => None,
        }
    }
}

/// Raw key/value pairs with the line each came from. Line 0 marks a
/// command-line override.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    entries: BTreeMap<String, (String, usize)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Self::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim();
                if !is_identifier(name) {
                    return Err(ConfigError::Syntax {
                        line,
                        message: format!("bad section name '{name}'"),
                    });
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "expected 'key = value'".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !key.split('.').all(is_identifier) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("bad key '{key}'"),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("missing value for '{key}'"),
                });
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if let Some((_, first)) = doc.entries.get(&full) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate key '{full}' (first set on line {first})"),
                });
            }
            doc.entries.insert(full, (value.to_string(), line));
        }
        Ok(doc)
    }

    /// Applies a `key=value` override, replacing any existing value.
    pub fn set_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax {
                line: 0,
                message: format!("override '{assignment}' is not key=value"),
            })?;
        let (key, value) = (key.trim(), value.trim());
        if !key.split('.').all(is_identifier) || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: 0,
                message: format!("bad override '{assignment}'"),
            });
        }
        self.entries.insert(key.to_string(), (value.to_string(), 0));
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Build,
    Verify,
    Evolve,
    Scan,
    Regime,
    AllChecks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Operators the `build` command can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuildTarget {
    Hamiltonian(HamiltonianKind),
    Transform,
    U1,
    U2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    TTransformation,
    DispersiveScan,
    JcRabi,
    AjcRabi,
    Truncation,
    Speed,
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanKind {
    Dispersive,
    Truncation,
    LambDicke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Fock,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinLabel {
    E,
    G,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:expr => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                $(if *self == $variant { return $name; })+
                unreachable!()
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                $(if s == $name { return Ok($variant); })+
                Err(format!("expected one of: {}", [$($name),+].join(", ")))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(Command {
    Command::Build => "build",
    Command::Verify => "verify",
    Command::Evolve => "evolve",
    Command::Scan => "scan",
    Command::Regime => "regime",
    Command::AllChecks => "all-checks",
});

keyword_enum!(OutputFormat { OutputFormat::Csv => "csv", OutputFormat::Json => "json" });

keyword_enum!(Experiment {
    Experiment::TTransformation => "t_transformation",
    Experiment::DispersiveScan => "dispersive_scan",
    Experiment::JcRabi => "jc_rabi",
    Experiment::AjcRabi => "ajc_rabi",
    Experiment::Truncation => "truncation",
    Experiment::Speed => "speed",
    Experiment::Rotation => "rotation",
});

keyword_enum!(ScanKind {
    ScanKind::Dispersive => "dispersive",
    ScanKind::Truncation => "truncation",
    ScanKind::LambDicke => "lamb_dicke",
});

keyword_enum!(StateKind { StateKind::Fock => "fock", StateKind::Coherent => "coherent" });

keyword_enum!(SpinLabel { SpinLabel::E => "e", SpinLabel::G => "g" });

impl BuildTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Hamiltonian(k) => k.as_str(),
            Self::Transform => "t",
            Self::U1 => "u1",
            Self::U2 => "u2",
        }
    }
}

impl FromStr for BuildTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "t" => Ok(Self::Transform),
            "u1" => Ok(Self::U1),
            "u2" => Ok(Self::U2),
            other => other
                .parse::<HamiltonianKind>()
                .map(Self::Hamiltonian)
                .map_err(|_| {
                    let names: Vec<&str> =
                        HamiltonianKind::ALL.iter().map(|k| k.as_str()).collect();
                    format!("expected one of: {}, t, u1, u2", names.join(", "))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildSection {
    pub target: BuildTarget,
    pub include_constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySection {
    pub experiment: Experiment,
    pub n0: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSection {
    pub hamiltonian: HamiltonianKind,
    pub reference: Option<HamiltonianKind>,
    pub state: StateKind,
    pub spin: SpinLabel,
    pub fock: usize,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSection {
    pub kind: ScanKind,
    pub etas: Vec<f64>,
    pub n_list: Vec<usize>,
    pub levels: usize,
    pub hamiltonian: HamiltonianKind,
}

/// Fully validated configuration for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: IonParams,
    pub trunc: TruncationSpec,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
    pub build: BuildSection,
    pub verify: VerifySection,
    pub evolve: EvolveSection,
    pub scan: ScanSection,
    pub analysis: AnalysisThresholds,
    pub regime: RegimeThresholds,
}

impl RunConfig {
    /// Defaults for everything except the command.
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            params: IonParams::default(),
            trunc: TruncationSpec::default(),
            seed: 20_241_016,
            out: None,
            format: None,
            build: BuildSection {
                target: BuildTarget::Hamiltonian(HamiltonianKind::Qrm),
                include_constant: true,
            },
            verify: VerifySection {
                experiment: Experiment::TTransformation,
                n0: 0,
            },
            evolve: EvolveSection {
                hamiltonian: HamiltonianKind::Jc,
                reference: None,
                state: StateKind::Fock,
                spin: SpinLabel::E,
                fock: 0,
                alpha_re: 0.0,
                alpha_im: 0.0,
                t_max: 100.0,
                steps: 200,
            },
            scan: ScanSection {
                kind: ScanKind::Dispersive,
                etas: vec![0.08, 0.04, 0.02],
                n_list: vec![16, 32, 64],
                levels: 10,
                hamiltonian: HamiltonianKind::Qrm,
            },
            analysis: AnalysisThresholds::default(),
            regime: RegimeThresholds::default(),
        }
    }

    /// Output format. Tabular commands default to CSV (plain text for
    /// `regime`), the rest to JSON.
    pub fn output_format(&self) -> OutputFormat {
        self.format.unwrap_or(match self.command {
            Command::Evolve | Command::Scan | Command::Regime => OutputFormat::Csv,
            _ => OutputFormat::Json,
        })
    }

    pub fn from_document(doc: &Document) -> Result<Self, ConfigError> {
        let (command_text, line) = doc
            .entries
            .get("command")
            .cloned()
            .ok_or_else(|| ConfigError::Constraint("missing required key 'command'".into()))?;
        let command = parse_value::<Command>("command", &command_text, line)?;
        let mut c = Self::defaults(command);
        let (mut n_max, mut guard) = (c.trunc.n_max(), c.trunc.guard());
        for (key, (value, line)) in &doc.entries {
            let (k, v, l) = (key.as_str(), value.as_str(), *line);
            match k {
                "command" => {}
                "nu" => c.params.nu = parse_value(k, v, l)?,
                "Omega" => c.params.omega = parse_value(k, v, l)?,
                "eta" => c.params.eta = parse_value(k, v, l)?,
                "phi_l" => c.params.phi_l = parse_value(k, v, l)?,
                "delta" => c.params.delta = parse_value(k, v, l)?,
                "n_max" => n_max = parse_value(k, v, l)?,
                "guard" => guard = parse_value(k, v, l)?,
                "seed" => c.seed = parse_value(k, v, l)?,
                "out" => c.out = Some(v.to_string()),
                "format" => c.format = Some(parse_value(k, v, l)?),
                "build.hamiltonian" => c.build.target = parse_value(k, v, l)?,
                "build.include_constant" => c.build.include_constant = parse_value(k, v, l)?,
                "verify.experiment" => c.verify.experiment = parse_value(k, v, l)?,
                "verify.n0" => c.verify.n0 = parse_value(k, v, l)?,
                "evolve.hamiltonian" => c.evolve.hamiltonian = parse_value(k, v, l)?,
                "evolve.reference" => c.evolve.reference = Some(parse_value(k, v, l)?),
                "evolve.state" => c.evolve.state = parse_value(k, v, l)?,
                "evolve.spin" => c.evolve.spin = parse_value(k, v, l)?,
                "evolve.fock" => c.evolve.fock = parse_value(k, v, l)?,
                "evolve.alpha_re" => c.evolve.alpha_re = parse_value(k, v, l)?,
                "evolve.alpha_im" => c.evolve.alpha_im = parse_value(k, v, l)?,
                "evolve.t_max" => c.evolve.t_max = parse_value(k, v, l)?,
                "evolve.steps" => c.evolve.steps = parse_value(k, v, l)?,
                "scan.kind" => c.scan.kind = parse_value(k, v, l)?,
                "scan.etas" => c.scan.etas = parse_list(k, v, l)?,
                "scan.n_list" => c.scan.n_list = parse_list(k, v, l)?,
                "scan.levels" => c.scan.levels = parse_value(k, v, l)?,
                "scan.hamiltonian" => c.scan.hamiltonian = parse_value(k, v, l)?,
                "thresholds.identity_tol" => c.analysis.identity_tol = parse_value(k, v, l)?,
                "thresholds.dispersive_min_slope" => {
                    c.analysis.dispersive_min_slope = parse_value(k, v, l)?
                }
                "thresholds.spectral_levels" => c.analysis.spectral_levels = parse_value(k, v, l)?,
                "thresholds.rabi_frequency_rel_tol" => {
                    c.analysis.rabi_frequency_rel_tol = parse_value(k, v, l)?
                }
                "thresholds.analytic_population_tol" => {
                    c.analysis.analytic_population_tol = parse_value(k, v, l)?
                }
                "thresholds.lamb_dicke_eta_limit" => {
                    c.analysis.lamb_dicke_eta_limit = parse_value(k, v, l)?
                }
                "thresholds.rabi_periods" => c.analysis.rabi_periods = parse_value(k, v, l)?,
                "thresholds.samples_per_period" => {
                    c.analysis.samples_per_period = parse_value(k, v, l)?
                }
                "thresholds.convergence_tol" => c.analysis.convergence_tol = parse_value(k, v, l)?,
                "thresholds.max_small_rotation" => {
                    c.analysis.max_small_rotation = parse_value(k, v, l)?
                }
                "thresholds.fast_g_ratio" => c.analysis.fast_g_ratio = parse_value(k, v, l)?,
                "thresholds.fast_omega_ratio" => {
                    c.analysis.fast_omega_ratio = parse_value(k, v, l)?
                }
                "regime.ordering_ratio" => c.regime.ordering_ratio = parse_value(k, v, l)?,
                "regime.ultrastrong_onset" => c.regime.ultrastrong_onset = parse_value(k, v, l)?,
                "regime.dispersive_factor" => c.regime.dispersive_factor = parse_value(k, v, l)?,
                "regime.resonance_tol" => c.regime.resonance_tol = parse_value(k, v, l)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: l,
                        key: key.clone(),
                    })
                }
            }
        }
        c.trunc = TruncationSpec::new(n_max, guard)
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Checks numeric sanity and the preconditions of the selected command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Constraint(m));
        self.params
            .validate()
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        let reals = [
            ("evolve.alpha_re", self.evolve.alpha_re),
            ("evolve.alpha_im", self.evolve.alpha_im),
            ("evolve.t_max", self.evolve.t_max),
            ("thresholds.identity_tol", self.analysis.identity_tol),
            (
                "thresholds.dispersive_min_slope",
                self.analysis.dispersive_min_slope,
            ),
            (
                "thresholds.rabi_frequency_rel_tol",
                self.analysis.rabi_frequency_rel_tol,
            ),
            (
                "thresholds.analytic_population_tol",
                self.analysis.analytic_population_tol,
            ),
            (
                "thresholds.lamb_dicke_eta_limit",
                self.analysis.lamb_dicke_eta_limit,
            ),
            ("thresholds.convergence_tol", self.analysis.convergence_tol),
            (
                "thresholds.max_small_rotation",
                self.analysis.max_small_rotation,
            ),
            ("thresholds.fast_g_ratio", self.analysis.fast_g_ratio),
            (
                "thresholds.fast_omega_ratio",
                self.analysis.fast_omega_ratio,
            ),
            ("regime.ordering_ratio", self.regime.ordering_ratio),
            ("regime.ultrastrong_onset", self.regime.ultrastrong_onset),
            ("regime.dispersive_factor", self.regime.dispersive_factor),
            ("regime.resonance_tol", self.regime.resonance_tol),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        if let Some(bad) = self.scan.etas.iter().find(|e| !e.is_finite()) {
            return fail(format!("scan.etas must be finite, got {bad}"));
        }
        if self.analysis.rabi_periods == 0 || self.analysis.samples_per_period < 4 {
            return fail(
                "thresholds.rabi_periods ≥ 1 and thresholds.samples_per_period ≥ 4 required".into(),
            );
        }

        let p = &self.params;
        let format = self.output_format();
        match self.command {
            Command::Build => {
                if format != OutputFormat::Json {
                    return fail("build writes json only".into());
                }
                if let BuildTarget::Hamiltonian(kind) = self.build.target {
                    self.check_hamiltonian(kind)?;
                }
            }
            Command::Verify => {
                if format != OutputFormat::Json {
                    return fail("verify writes json only".into());
                }
                self.check_experiment()?;
            }
            Command::Evolve => {
                if self.evolve.t_max <= 0.0 {
                    return fail("evolve.t_max > 0 violated".into());
                }
                if self.evolve.steps == 0 {
                    return fail("evolve.steps ≥ 1 violated".into());
                }
                if self.evolve.state == StateKind::Fock && self.evolve.fock >= self.trunc.n_max() {
                    return fail(format!(
                        "evolve.fock < n_max violated ({} ≥ {})",
                        self.evolve.fock,
                        self.trunc.n_max()
                    ));
                }
                self.check_hamiltonian(self.evolve.hamiltonian)?;
                if let Some(r) = self.evolve.reference {
                    self.check_hamiltonian(r)?;
                }
            }
            Command::Scan => match self.scan.kind {
                ScanKind::Dispersive | ScanKind::LambDicke => {
                    check_etas(&self.scan.etas)?;
                    if self.scan.kind == ScanKind::Dispersive {
                        for &eta in &self.scan.etas {
                            epsilons(&p.with_eta(eta))
                                .map_err(|e| ConfigError::Constraint(e.to_string()))?;
                        }
                    } else if p.delta != 0.0 {
                        return fail("lamb_dicke scan needs delta = 0".into());
                    }
                }
                ScanKind::Truncation => {
                    check_n_list(&self.scan.n_list, self.scan.levels)?;
                    self.check_hamiltonian(self.scan.hamiltonian)?;
                }
            },
            Command::Regime | Command::AllChecks => {}
        }
        Ok(())
    }

    fn check_hamiltonian(&self, kind: HamiltonianKind) -> Result<(), ConfigError> {
        let p = &self.params;
        match kind {
            HamiltonianKind::Resonant if p.delta != 0.0 => Err(ConfigError::Constraint(
                "resonant hamiltonian needs delta = 0".into(),
            )),
            HamiltonianKind::RabiRotated
                if !(p.phi_l == 0.0 || (p.phi_l - std::f64::consts::PI).abs() <= 1e-12) =>
            {
                Err(ConfigError::Constraint(
                    "rabi_rotated needs phi_l = 0 or pi".into(),
                ))
            }
            HamiltonianKind::Dispersive => epsilons(p)
                .map(|_| ())
                .map_err(|e| ConfigError::Constraint(e.to_string())),
            _ => Ok(()),
        }
    }

    fn check_experiment(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        let fail = |m: &str| Err(ConfigError::Constraint(m.to_string()));
        match self.verify.experiment {
            Experiment::TTransformation => {
                if p.phi_l != 0.0 || p.delta != 0.0 {
                    return fail("t_transformation needs phi_l = 0 and delta = 0");
                }
            }
            Experiment::DispersiveScan => {
                check_etas(&self.scan.etas)?;
                if self.scan.etas.len() < 2 {
                    return fail("dispersive_scan needs at least two scan.etas");
                }
            }
            Experiment::JcRabi | Experiment::AjcRabi => {
                if (p.nu - 2.0 * p.omega).abs() > 1e-9 * p.nu {
                    return fail("sideband experiments need nu = 2 Omega");
                }
                if p.eta <= 0.0 {
                    return fail("sideband experiments need eta > 0");
                }
                let phase = if self.verify.experiment == Experiment::JcRabi {
                    0.0
                } else {
                    std::f64::consts::PI
                };
                if (p.phi_l - phase).abs() > 1e-12 {
                    return fail("jc_rabi needs phi_l = 0 and ajc_rabi needs phi_l = pi");
                }
                if self.verify.n0 + 1 >= self.trunc.interior_dim() {
                    return fail("verify.n0 + 1 < n_max - guard violated");
                }
            }
            Experiment::Truncation => check_n_list(&self.scan.n_list, self.scan.levels)?,
            Experiment::Rotation => {
                if !(p.phi_l == 0.0 || (p.phi_l - std::f64::consts::PI).abs() <= 1e-12) {
                    return fail("rotation diagnostic needs phi_l = 0 or pi");
                }
            }
            Experiment::Speed => {}
        }
        Ok(())
    }

    /// Canonical document listing every key; `parse_config(&c.emit()) == c`.
    pub fn emit(&self) -> String {
        let mut lines: Vec<(String, String)> = vec![
            ("command".into(), self.command.to_string()),
            ("nu".into(), num(self.params.nu)),
            ("Omega".into(), num(self.params.omega)),
            ("eta".into(), num(self.params.eta)),
            ("phi_l".into(), num(self.params.phi_l)),
            ("delta".into(), num(self.params.delta)),
            ("n_max".into(), self.trunc.n_max().to_string()),
            ("guard".into(), self.trunc.guard().to_string()),
            ("seed".into(), self.seed.to_string()),
        ];
        if let Some(out) = &self.out {
            lines.push(("out".into(), out.clone()));
        }
        if let Some(f) = self.format {
            lines.push(("format".into(), f.to_string()));
        }
        let a = &self.analysis;
        let r = &self.regime;
        let e = &self.evolve;
        let mut sectioned: Vec<(String, String)> = vec![
            (
                "build.hamiltonian".into(),
                self.build.target.as_str().to_string(),
            ),
            (
                "build.include_constant".into(),
                self.build.include_constant.to_string(),
            ),
            (
                "verify.experiment".into(),
                self.verify.experiment.to_string(),
            ),
            ("verify.n0".into(), self.verify.n0.to_string()),
            ("evolve.hamiltonian".into(), e.hamiltonian.to_string()),
        ];
        if let Some(reference) = e.reference {
            sectioned.push(("evolve.reference".into(), reference.to_string()));
        }
        sectioned.extend([
            ("evolve.state".into(), e.state.to_string()),
            ("evolve.spin".into(), e.spin.to_string()),
            ("evolve.fock".into(), e.fock.to_string()),
            ("evolve.alpha_re".into(), num(e.alpha_re)),
            ("evolve.alpha_im".into(), num(e.alpha_im)),
            ("evolve.t_max".into(), num(e.t_max)),
            ("evolve.steps".into(), e.steps.to_string()),
            ("scan.kind".into(), self.scan.kind.to_string()),
            (
                "scan.etas".into(),
                self.scan
                    .etas
                    .iter()
                    .map(|x| num(*x))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "scan.n_list".into(),
                self.scan
                    .n_list
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("scan.levels".into(), self.scan.levels.to_string()),
            ("scan.hamiltonian".into(), self.scan.hamiltonian.to_string()),
            ("thresholds.identity_tol".into(), num(a.identity_tol)),
            (
                "thresholds.dispersive_min_slope".into(),
                num(a.dispersive_min_slope),
            ),
            (
                "thresholds.spectral_levels".into(),
                a.spectral_levels.to_string(),
            ),
            (
                "thresholds.rabi_frequency_rel_tol".into(),
                num(a.rabi_frequency_rel_tol),
            ),
            (
                "thresholds.analytic_population_tol".into(),
                num(a.analytic_population_tol),
            ),
            (
                "thresholds.lamb_dicke_eta_limit".into(),
                num(a.lamb_dicke_eta_limit),
            ),
            ("thresholds.rabi_periods".into(), a.rabi_periods.to_string()),
            (
                "thresholds.samples_per_period".into(),
                a.samples_per_period.to_string(),
            ),
            ("thresholds.convergence_tol".into(), num(a.convergence_tol)),
            (
                "thresholds.max_small_rotation".into(),
                num(a.max_small_rotation),
            ),
            ("thresholds.fast_g_ratio".into(), num(a.fast_g_ratio)),
            (
                "thresholds.fast_omega_ratio".into(),
                num(a.fast_omega_ratio),
            ),
            ("regime.ordering_ratio".into(), num(r.ordering_ratio)),
            ("regime.ultrastrong_onset".into(), num(r.ultrastrong_onset)),
            ("regime.dispersive_factor".into(), num(r.dispersive_factor)),
            ("regime.resonance_tol".into(), num(r.resonance_tol)),
        ]);
        lines.extend(sectioned);
        let mut text = String::new();
        for (k, v) in lines {
            text.push_str(&k);
            text.push_str(" = ");
            text.push_str(&v);
            text.push('\n');
        }
        text
    }
}

/// Shortest round-trip decimal form.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn check_etas(etas: &[f64]) -> Result<(), ConfigError> {
    if etas.is_empty() || etas.iter().any(|&e| e <= 0.0) || etas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ConfigError::Constraint(
            "scan.etas must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

fn check_n_list(n_list: &[usize], levels: usize) -> Result<(), ConfigError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::Constraint(
            "scan.n_list must be non-empty and increasing".into(),
        ));
    }
    if levels == 0 || 2 * n_list[0] < levels {
        return Err(ConfigError::Constraint(
            "scan.levels must be ≥ 1 and ≤ 2·min(scan.n_list)".into(),
        ));
    }
    Ok(())
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        message: format!("'{value}': {e}"),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(|item| parse_value(key, item.trim(), line))
        .collect()
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_document(&Document::parse(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config("command=verify\nnu=1\nOmega=0.7\neta=0.3\n").unwrap();
        assert_eq!(c.command, Command::Verify);
        assert_eq!(c.trunc.n_max(), 64);
        assert_eq!(c.trunc.guard(), 16);
        assert_eq!(c.params.omega, 0.7);
        assert_eq!(c.output_format(), OutputFormat::Json);
    }

    #[test]
    fn negative_eta_names_the_invariant() {
        let err = parse_config("command=verify\neta=-0.1\n").unwrap_err();
        assert_eq!(err.kind(), "constraint");
        assert!(err.to_string().contains("eta ≥ 0"), "{err}");
    }

    #[test]
    fn duplicate_key_is_a_syntax_error() {
        let err = parse_config("command=verify\nnu=1\nnu=2\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Syntax {
                line: 3,
                message: "duplicate key 'nu' (first set on line 2)".into()
            }
        );
        // same key through a section header
        let err = parse_config("command=scan\nscan.kind=dispersive\n[scan]\nkind=truncation\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 4, .. }));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = parse_config("command=verify\n\nOmgea=0.7\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 3,
                key: "Omgea".into()
            }
        );
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        assert!(matches!(
            parse_config("command=verify\nnu 1\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("[scan\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("command=verify\nnu=\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        let err = parse_config("command=verify\nnu=abc\n").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { line: 2, .. }));
        assert!(matches!(
            parse_config("nu=1\n"),
            Err(ConfigError::Constraint(_))
        ));
    }

    #[test]
    fn sections_comments_and_lists() {
        let text = "# header\ncommand = scan  # trailing\n[scan]\nkind = truncation\nn_list = 8, 16,32\nlevels=4\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.scan.kind, ScanKind::Truncation);
        assert_eq!(c.scan.n_list, vec![8, 16, 32]);
        assert_eq!(c.output_format(), OutputFormat::Csv);
    }

    #[test]
    fn command_preconditions_are_checked() {
        assert!(parse_config("command=verify\nphi_l=0.3\n").is_err());
        assert!(parse_config("command=verify\nverify.experiment=jc_rabi\nOmega=0.4\n").is_err());
        assert!(
            parse_config("command=verify\nverify.experiment=jc_rabi\nOmega=0.5\neta=0.02\n")
                .is_ok()
        );
        assert!(parse_config("command=build\nformat=csv\n").is_err());
        assert!(parse_config("command=build\nbuild.hamiltonian=dispersive\nOmega=0.5\n").is_err());
        assert!(parse_config("command=scan\nscan.etas=0.02,0.04\n").is_err());
        assert!(parse_config("command=evolve\nevolve.fock=64\n").is_err());
        assert!(parse_config("command=verify\nguard=64\n").is_err());
    }

    #[test]
    fn overrides_replace_values() {
        let mut doc = Document::parse("command=regime\nnu=1\n").unwrap();
        doc.set_override("nu=2").unwrap();
        doc.set_override("scan.levels=3").unwrap();
        let c = RunConfig::from_document(&doc).unwrap();
        assert_eq!(c.params.nu, 2.0);
        assert_eq!(c.scan.levels, 3);
        assert!(doc.set_override("nonsense").is_err());
    }

    fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
        lo..hi
    }

    prop_compose! {
        fn valid_config()(
            command in prop::sample::select(vec![Command::Build, Command::Verify, Command::Evolve, Command::Scan, Command::Regime, Command::AllChecks]),
            nu in finite(0.1, 5.0),
            omega in finite(0.0, 5.0),
            eta in finite(0.0, 1.0),
            n_max in 8usize..80,
            guard_frac in 0.0f64..0.9,
            seed in any::<u64>(),
            out in prop::option::of("[a-z]{1,8}\\.(csv|json)"),
            reference in prop::option::of(prop::sample::select(vec![HamiltonianKind::Jc, HamiltonianKind::Ajc, HamiltonianKind::Qrm])),
            t_max in finite(0.5, 500.0),
            steps in 1usize..1000,
            etas in prop::collection::vec(finite(0.001, 0.2), 1..5),
            n_start in 8usize..20,
            alpha in (finite(-1.0, 1.0), finite(-1.0, 1.0)),
            identity_tol in finite(1e-12, 1e-6),
            ordering in finite(2.0, 50.0),
        ) -> RunConfig {
            let mut c = RunConfig::defaults(command);
            c.params = IonParams::new(nu, omega, eta).unwrap();
            let guard = ((n_max as f64) * guard_frac) as usize;
            c.trunc = TruncationSpec::new(n_max, guard).unwrap();
            c.seed = seed;
            c.out = out;
            c.evolve.reference = reference;
            c.evolve.t_max = t_max;
            c.evolve.steps = steps;
            c.evolve.alpha_re = alpha.0;
            c.evolve.alpha_im = alpha.1;
            c.evolve.state = StateKind::Coherent;
            let mut etas = etas;
            etas.sort_by(|a, b| b.total_cmp(a));
            etas.dedup();
            c.scan.etas = etas;
            c.scan.kind = ScanKind::LambDicke;
            c.scan.n_list = vec![n_start, 2 * n_start, 4 * n_start];
            c.analysis.identity_tol = identity_tol;
            c.regime.ordering_ratio = ordering;
            c.build.target = BuildTarget::Hamiltonian(HamiltonianKind::Qrm);
            c.verify.experiment = Experiment::Speed;
            c
        }
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(c in valid_config()) {
            prop_assume!(c.validate().is_ok());
            let text = c.emit();
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}

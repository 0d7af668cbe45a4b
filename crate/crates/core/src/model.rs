//! Hamiltonians and unitary transformations of the single-laser scheme,
//! assembled as dense matrices on the truncated spin ⊗ oscillator space.
//!
//! Units: ħ = 1, ion mass 1, frequencies in units of a reference frequency
//! (usually the trap frequency ν). The vacuum energy ν/2 is dropped.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::expm_anti_hermitian;
use crate::operators::{
    annihilation, dagger, displacement_generator, hermiticity_defect, identity, kron, number,
    pauli, sigma_y, ComplexMatrix, SigmaYConvention, SpinIndex, TruncationSpec,
};

const I: C64 = C64::new(0.0, 1.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Physical parameters of the ion-laser system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IonParams {
    /// Trap frequency ν.
    pub nu: f64,
    /// Laser Rabi coupling Ω.
    #[serde(rename = "Omega")]
    pub omega: f64,
    /// Lamb-Dicke parameter η.
    pub eta: f64,
    /// Laser phase φ_l in radians.
    pub phi_l: f64,
    /// Detuning ω₀ − ω_l.
    pub delta: f64,
}

impl Default for IonParams {
    fn default() -> Self {
        Self {
            nu: 1.0,
            omega: 0.7,
            eta: 0.3,
            phi_l: 0.0,
            delta: 0.0,
        }
    }
}

impl IonParams {
    pub fn new(nu: f64, omega: f64, eta: f64) -> Result<Self> {
        let p = Self {
            nu,
            omega,
            eta,
            phi_l: 0.0,
            delta: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_phase(mut self, phi_l: f64) -> Self {
        self.phi_l = phi_l;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    /// Checks finiteness, `nu > 0`, `eta ≥ 0` and `Omega ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("nu", self.nu),
            ("Omega", self.omega),
            ("eta", self.eta),
            ("phi_l", self.phi_l),
            ("delta", self.delta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if self.nu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "nu > 0 violated (nu = {})",
                self.nu
            )));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eta ≥ 0 violated (eta = {})",
                self.eta
            )));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Omega ≥ 0 violated (Omega = {})",
                self.omega
            )));
        }
        Ok(())
    }

    /// Rabi-model coupling `g = ην/2`.
    pub fn g_qrm(&self) -> f64 {
        self.eta * self.nu / 2.0
    }

    fn laser_phase(&self) -> C64 {
        C64::from_polar(1.0, self.phi_l)
    }
}

/// Couplings of the Rabi model and of its dispersive reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCouplings {
    pub g_qrm: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub chi: f64,
}

/// Spin ⊗ oscillator operators shared by the builders.
struct Ops {
    n: ComplexMatrix,
    a: ComplexMatrix,
    ad: ComplexMatrix,
    id: ComplexMatrix,
}

impl Ops {
    fn new(trunc: TruncationSpec) -> Self {
        let a = annihilation(trunc);
        Self {
            n: number(trunc),
            ad: dagger(&a),
            a,
            id: identity(trunc.n_max()),
        }
    }
}

fn sp() -> ComplexMatrix {
    pauli(SpinIndex::Plus)
}

fn sm() -> ComplexMatrix {
    pauli(SpinIndex::Minus)
}

fn sz() -> ComplexMatrix {
    pauli(SpinIndex::Z)
}

fn sx() -> ComplexMatrix {
    pauli(SpinIndex::X)
}

fn trap_energy(p: &IonParams, ops: &Ops) -> ComplexMatrix {
    kron(&identity(2), &ops.n) * re(p.nu)
}

fn require_resonant(p: &IonParams) -> Result<()> {
    if p.delta != 0.0 {
        return Err(Error::Precondition(format!(
            "resonant condition delta = 0 violated (delta = {})",
            p.delta
        )));
    }
    Ok(())
}

/// Rotating-frame Hamiltonian of the resonantly driven ion,
/// `ν n̂ + Ω[e^{iφ} σ_+ D(iη) + e^{−iφ} σ_− D†(iη)]`.
pub fn h_resonant(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    require_resonant(p)?;
    let ops = Ops::new(trunc);
    let d = displacement_generator(C64::new(0.0, p.eta), trunc);
    let phase = p.laser_phase();
    let drive = kron(&sp(), &d) * phase + kron(&sm(), &dagger(&d)) * phase.conj();
    Ok(trap_energy(p, &ops) + drive * re(p.omega))
}

/// First-order Lamb-Dicke expansion of [`h_resonant`]:
/// `ν n̂ + Ω[e^{iφ}σ_+ + e^{−iφ}σ_−] + iηΩ(a† + a)[e^{iφ}σ_+ − e^{−iφ}σ_−]`.
pub fn h_lamb_dicke(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    let ops = Ops::new(trunc);
    let phase = p.laser_phase();
    let carrier = &sp() * phase + &sm() * phase.conj();
    let sideband = &sp() * phase - &sm() * phase.conj();
    let x = &ops.a + &ops.ad;
    Ok(trap_energy(p, &ops)
        + kron(&carrier, &ops.id) * re(p.omega)
        + kron(&sideband, &x) * (I * p.eta * p.omega))
}

/// Exponential of a traceless 2×2 matrix, `cosh(s) I + sinh(s)/s X` with `s² = −det X`.
fn expm_traceless_2x2(x: &ComplexMatrix) -> ComplexMatrix {
    let det = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
    let s = (-det).sqrt();
    let sinhc = if s.norm() < 1e-8 {
        C64::new(1.0, 0.0) + s * s / 6.0
    } else {
        s.sinh() / s
    };
    identity(2) * s.cosh() + x * sinhc
}

/// The spin rotation `exp(i(π/4)σ_y)` under the chosen `σ_y` convention.
pub fn y_rotation(convention: SigmaYConvention) -> ComplexMatrix {
    expm_traceless_2x2(&(sigma_y(convention) * (I * FRAC_PI_4)))
}

fn y_rotation_inverse(convention: SigmaYConvention) -> ComplexMatrix {
    expm_traceless_2x2(&(sigma_y(convention) * (-I * FRAC_PI_4)))
}

fn require_rabi_phase(p: &IonParams) -> Result<()> {
    let at = |target: f64| (p.phi_l - target).abs() <= 1e-12;
    if at(0.0) || at(PI) {
        Ok(())
    } else {
        Err(Error::UnsupportedPhase(p.phi_l))
    }
}

/// Rabi form `ν n̂ − Ω σ_z − iηΩ(a† + a)(σ_+ − σ_−)`, assembled literally.
///
/// The same expression is returned for `φ_l = 0` and `φ_l = π`; see
/// [`rotation_diagnostic`] for what conjugating [`h_lamb_dicke`] actually
/// produces at each phase.
pub fn h_rabi_rotated(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    require_rabi_phase(p)?;
    Ok(rabi_form(p, trunc, -1.0))
}

/// `ν n̂ + s·[Ω σ_z + iηΩ(a† + a)(σ_+ − σ_−)]`.
fn rabi_form(p: &IonParams, trunc: TruncationSpec, sign: f64) -> ComplexMatrix {
    let ops = Ops::new(trunc);
    let x = &ops.a + &ops.ad;
    trap_energy(p, &ops)
        + (kron(&sz(), &ops.id) * re(p.omega) + kron(&(sp() - sm()), &x) * (I * p.eta * p.omega))
            * re(sign)
}

/// `(R ⊗ I) h_lamb_dicke (R ⊗ I)^{-1}` with `R = exp(i(π/4)σ_y)`.
pub fn rotated_lamb_dicke(
    p: &IonParams,
    trunc: TruncationSpec,
    convention: SigmaYConvention,
) -> Result<ComplexMatrix> {
    let h = h_lamb_dicke(p, trunc)?;
    let id = identity(trunc.n_max());
    let r = kron(&y_rotation(convention), &id);
    let r_inv = kron(&y_rotation_inverse(convention), &id);
    Ok(r * h * r_inv)
}

/// Outcome of conjugating [`h_lamb_dicke`] by the `σ_y` rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationDiagnostic {
    pub convention: SigmaYConvention,
    pub phi_l: f64,
    /// Frobenius distance to `ν n̂ − Ω σ_z − iηΩ(a† + a)(σ_+ − σ_−)`.
    pub distance_to_rabi_form: f64,
    /// Frobenius distance to `ν n̂ + Ω σ_z + iηΩ(a† + a)(σ_+ − σ_−)`.
    pub distance_to_flipped_form: f64,
    pub hermiticity_defect: f64,
}

impl RotationDiagnostic {
    /// Whether the rotation reproduces the Rabi form within `tol`.
    pub fn matches_rabi_form(&self, tol: f64) -> bool {
        self.distance_to_rabi_form <= tol
    }
}

pub fn rotation_diagnostic(
    p: &IonParams,
    trunc: TruncationSpec,
    convention: SigmaYConvention,
) -> Result<RotationDiagnostic> {
    require_rabi_phase(p)?;
    let rotated = rotated_lamb_dicke(p, trunc, convention)?;
    Ok(RotationDiagnostic {
        convention,
        phi_l: p.phi_l,
        distance_to_rabi_form: (&rotated - rabi_form(p, trunc, -1.0)).norm(),
        distance_to_flipped_form: (&rotated - rabi_form(p, trunc, 1.0)).norm(),
        hermiticity_defect: hermiticity_defect(&rotated),
    })
}

/// Jaynes-Cummings coupling `iηΩ(a σ_+ − σ_− a†)`.
pub fn h_jc(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    let ops = Ops::new(trunc);
    Ok((kron(&sp(), &ops.a) - kron(&sm(), &ops.ad)) * (I * p.eta * p.omega))
}

/// Anti-Jaynes-Cummings coupling `−iηΩ(a σ_− − σ_+ a†)`.
pub fn h_ajc(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    p.validate()?;
    let ops = Ops::new(trunc);
    Ok((kron(&sm(), &ops.a) - kron(&sp(), &ops.ad)) * (-I * p.eta * p.omega))
}

/// The spin-dependent displacement
/// `T = (1/√2)[[D†(iη/2), D(iη/2)], [−D†(iη/2), D(iη/2)]]`.
pub fn build_t(eta: f64, trunc: TruncationSpec) -> ComplexMatrix {
    let d = displacement_generator(C64::new(0.0, eta / 2.0), trunc);
    let dd = dagger(&d);
    let n = trunc.n_max();
    let mut t = ComplexMatrix::zeros(2 * n, 2 * n);
    t.view_mut((0, 0), (n, n)).copy_from(&dd);
    t.view_mut((0, n), (n, n)).copy_from(&d);
    t.view_mut((n, 0), (n, n)).copy_from(&(-&dd));
    t.view_mut((n, n), (n, n)).copy_from(&d);
    t * re(FRAC_1_SQRT_2)
}

fn qrm_coupling(p: &IonParams, ops: &Ops) -> ComplexMatrix {
    kron(&sx(), &(&ops.a - &ops.ad)) * (I * p.g_qrm())
}

/// Quantum Rabi Hamiltonian `ν n̂ + Ω σ_z + (iην/2)(σ_+ + σ_−)(a − a†)`,
/// optionally with the constant `νη²/4`.
pub fn h_qrm(
    p: &IonParams,
    trunc: TruncationSpec,
    include_constant: bool,
) -> Result<ComplexMatrix> {
    p.validate()?;
    let ops = Ops::new(trunc);
    let mut h = trap_energy(p, &ops) + kron(&sz(), &ops.id) * re(p.omega) + qrm_coupling(p, &ops);
    if include_constant {
        h += identity(trunc.composite_dim()) * re(p.nu * p.eta * p.eta / 4.0);
    }
    Ok(h)
}

/// Block form of the transformed Hamiltonian including the detuning term:
/// `[[ν n̂ + Ω + νη²/4, (iην/2)(a − a†) + δ/2], [(iην/2)(a − a†) + δ/2, ν n̂ − Ω + νη²/4]]`.
pub fn h_qrm_with_delta(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    let ops = Ops::new(trunc);
    Ok(h_qrm(p, trunc, true)? + kron(&sx(), &ops.id) * re(p.delta / 2.0))
}

/// Small-rotation angles and the dispersive constant.
///
/// `eps1 = ην/(2(ν+2Ω))`, `eps2 = ην/(2(2Ω−ν))`, `chi = g·(eps1 + eps2)
/// = η²ν²Ω/(4Ω²−ν²)`.
pub fn epsilons(p: &IonParams) -> Result<DerivedCouplings> {
    p.validate()?;
    let nu = p.nu;
    let two_omega = 2.0 * p.omega;
    let scale = nu.max(two_omega);
    if (two_omega - nu).abs() <= 1e-12 * scale {
        return Err(Error::Pole(format!(
            "2Omega = nu (Omega = {}, nu = {nu})",
            p.omega
        )));
    }
    if (two_omega + nu).abs() <= 1e-12 * scale {
        return Err(Error::Pole(format!(
            "2Omega = -nu (Omega = {}, nu = {nu})",
            p.omega
        )));
    }
    let g = p.g_qrm();
    let eps1 = p.eta * nu / (2.0 * (nu + two_omega));
    let eps2 = p.eta * nu / (2.0 * (two_omega - nu));
    let chi = p.eta * p.eta * nu * nu * p.omega / (two_omega * two_omega - nu * nu);
    Ok(DerivedCouplings {
        g_qrm: g,
        eps1,
        eps2,
        chi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SmallRotation {
    U1,
    U2,
}

/// `U1 = exp(ε(a†σ_+ − aσ_−))` or `U2 = exp(ε(aσ_+ − a†σ_−))`.
pub fn small_rotation(kind: SmallRotation, eps: f64, trunc: TruncationSpec) -> ComplexMatrix {
    let ops = Ops::new(trunc);
    let generator = match kind {
        SmallRotation::U1 => kron(&sp(), &ops.ad) - kron(&sm(), &ops.a),
        SmallRotation::U2 => kron(&sp(), &ops.a) - kron(&sm(), &ops.ad),
    } * re(eps);
    expm_anti_hermitian(&generator).expect("square generator")
}

/// Dispersive Hamiltonian `ν n̂ + Ω σ_z − χ σ_z (n̂ + 1/2)`.
pub fn h_dispersive(p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
    let couplings = epsilons(p)?;
    let ops = Ops::new(trunc);
    let shifted = &ops.n + &ops.id * re(0.5);
    Ok(trap_energy(p, &ops) + kron(&sz(), &ops.id) * re(p.omega)
        - kron(&sz(), &shifted) * re(couplings.chi))
}

/// Named Hamiltonian constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    Resonant,
    LambDicke,
    RabiRotated,
    Jc,
    Ajc,
    Qrm,
    QrmWithDelta,
    Dispersive,
}

impl HamiltonianKind {
    pub const ALL: [HamiltonianKind; 8] = [
        Self::Resonant,
        Self::LambDicke,
        Self::RabiRotated,
        Self::Jc,
        Self::Ajc,
        Self::Qrm,
        Self::QrmWithDelta,
        Self::Dispersive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Resonant => "resonant",
            Self::LambDicke => "lamb_dicke",
            Self::RabiRotated => "rabi_rotated",
            Self::Jc => "jc",
            Self::Ajc => "ajc",
            Self::Qrm => "qrm",
            Self::QrmWithDelta => "qrm_with_delta",
            Self::Dispersive => "dispersive",
        }
    }

    /// Builds the Hamiltonian; `qrm` is built without its constant term.
    pub fn build(&self, p: &IonParams, trunc: TruncationSpec) -> Result<ComplexMatrix> {
        match self {
            Self::Resonant => h_resonant(p, trunc),
            Self::LambDicke => h_lamb_dicke(p, trunc),
            Self::RabiRotated => h_rabi_rotated(p, trunc),
            Self::Jc => h_jc(p, trunc),
            Self::Ajc => h_ajc(p, trunc),
            Self::Qrm => h_qrm(p, trunc, false),
            Self::QrmWithDelta => h_qrm_with_delta(p, trunc),
            Self::Dispersive => h_dispersive(p, trunc),
        }
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown hamiltonian '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegimeLabel {
    #[serde(rename = "JC-resonant")]
    JcResonant,
    #[serde(rename = "AJC-resonant")]
    AjcResonant,
    #[serde(rename = "dispersive")]
    Dispersive,
    #[serde(rename = "decoupling")]
    Decoupling,
    #[serde(rename = "ultrastrong")]
    Ultrastrong,
    #[serde(rename = "deep-strong")]
    DeepStrong,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::JcResonant => "JC-resonant",
            Self::AjcResonant => "AJC-resonant",
            Self::Dispersive => "dispersive",
            Self::Decoupling => "decoupling",
            Self::Ultrastrong => "ultrastrong",
            Self::DeepStrong => "deep-strong",
            Self::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numeric readings of "≪" and the coupling-strength boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// `x ≪ y` is read as `ordering_ratio · x ≤ y`.
    pub ordering_ratio: f64,
    /// Ultrastrong coupling starts at `g/ν = ultrastrong_onset`.
    pub ultrastrong_onset: f64,
    /// Dispersive when `dispersive_factor · g` is below every transition scale.
    pub dispersive_factor: f64,
    /// Relative tolerance for the resonance `ν = 2Ω`.
    pub resonance_tol: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            ordering_ratio: 10.0,
            ultrastrong_onset: 0.1,
            dispersive_factor: 10.0,
            resonance_tol: 1e-9,
        }
    }
}

/// Regime of the engineered Rabi model with coupling `g = ην/2`.
///
/// Checked in order: deep-strong, sideband resonance (JC for `cos φ_l ≥ 0`,
/// AJC otherwise), decoupling, dispersive, ultrastrong. Everything is
/// evaluated on ratios to ν so the label is invariant under a common rescaling
/// of ν and Ω.
pub fn classify_regime(p: &IonParams, th: &RegimeThresholds) -> RegimeLabel {
    // everything in units of nu
    let g = p.eta / 2.0;
    let two_omega = 2.0 * p.omega / p.nu;
    let r = th.ordering_ratio;

    if g >= 1.0 {
        return RegimeLabel::DeepStrong;
    }
    if (two_omega - 1.0).abs() <= th.resonance_tol && r * g <= 1.0 {
        return if p.phi_l.cos() >= 0.0 {
            RegimeLabel::JcResonant
        } else {
            RegimeLabel::AjcResonant
        };
    }
    if r * g <= 1.0 && g >= r * two_omega {
        return RegimeLabel::Decoupling;
    }
    let slowest = [1.0, two_omega, (two_omega - 1.0).abs(), two_omega + 1.0]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if th.dispersive_factor * g <= slowest {
        return RegimeLabel::Dispersive;
    }
    if g >= th.ultrastrong_onset {
        return RegimeLabel::Ultrastrong;
    }
    RegimeLabel::Unclassified
}

//! Exact Schrödinger evolution `ψ(t) = exp(−iHt) ψ₀` through a single
//! Hermitian eigendecomposition reused for every time point.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, HermitianEigen};
use crate::operators::{displacement_generator, hermiticity_defect, ComplexMatrix, TruncationSpec};

/// Internal level of the ion. `Excited` is spin index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Excited,
    Ground,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Excited => 0,
            Spin::Ground => 1,
        }
    }
}

/// Normalized state vector on the spin ⊗ oscillator space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<C64>,
}

impl QuantumState {
    /// Normalizes `amplitudes`; fails on an empty or zero vector.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter(
                "state must have finite nonzero norm".into(),
            ));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// Product state `|spin, n⟩`.
    pub fn fock(spin: Spin, n: usize, trunc: TruncationSpec) -> Result<Self> {
        if n >= trunc.n_max() {
            return Err(Error::InvalidParameter(format!(
                "Fock index {n} outside truncation n_max = {}",
                trunc.n_max()
            )));
        }
        let mut amps = DVector::zeros(trunc.composite_dim());
        amps[spin.index() * trunc.n_max() + n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    /// Product of `|spin⟩` with the coherent state `D(α)|0⟩`.
    pub fn coherent(spin: Spin, alpha: C64, trunc: TruncationSpec) -> Self {
        let column = displacement_generator(alpha, trunc).column(0).into_owned();
        let mut amps = DVector::zeros(trunc.composite_dim());
        amps.rows_mut(spin.index() * trunc.n_max(), trunc.n_max())
            .copy_from(&column);
        Self { amplitudes: amps }
    }

    fn from_raw(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    fn n_max(&self) -> usize {
        self.dim() / 2
    }

    /// Population of the spin-index-0 block.
    pub fn excited_population(&self) -> f64 {
        self.amplitudes.rows(0, self.n_max()).norm_squared()
    }

    /// `⟨I ⊗ n̂⟩`.
    pub fn mean_phonons(&self) -> f64 {
        let n_max = self.n_max();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| (k % n_max) as f64 * z.norm_sqr())
            .sum()
    }
}

fn check_dims(op_dim: usize, psi: &QuantumState) -> Result<()> {
    if op_dim != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {op_dim} vs state dimension {}",
            psi.dim()
        )));
    }
    Ok(())
}

/// `⟨ψ|op|ψ⟩`.
pub fn expectation(op: &ComplexMatrix, psi: &QuantumState) -> Result<C64> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator shape {:?}",
            op.shape()
        )));
    }
    check_dims(op.nrows(), psi)?;
    Ok(psi.amplitudes.dotc(&(op * &psi.amplitudes)))
}

/// `|⟨ψ|φ⟩|²`.
pub fn fidelity(psi: &QuantumState, phi: &QuantumState) -> Result<f64> {
    check_dims(psi.dim(), phi)?;
    Ok(psi.amplitudes.dotc(&phi.amplitudes).norm_sqr().min(1.0))
}

/// Evolution operator factory for a fixed Hermitian Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    /// Fails if `h` deviates from Hermiticity by more than `1e-10·max(1, max|h|)`.
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian shape {:?}",
                h.shape()
            )));
        }
        let defect = hermiticity_defect(h);
        if defect > 1e-10 * max_abs(h).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            eigen: HermitianEigen::new(h)?,
        })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    /// Components of `psi` in the eigenbasis.
    fn to_eigenbasis(&self, psi: &QuantumState) -> DVector<C64> {
        self.eigen.vectors.ad_mul(&psi.amplitudes)
    }

    fn to_state(&self, coeffs: &DVector<C64>, t: f64) -> QuantumState {
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.eigen.values)
                .map(|(c, &lam)| c * C64::new(0.0, -lam * t).exp()),
        );
        QuantumState::from_raw(&self.eigen.vectors * phased)
    }

    /// `exp(−iHt) ψ`.
    pub fn evolve(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        check_dims(self.dim(), psi)?;
        Ok(self.to_state(&self.to_eigenbasis(psi), t))
    }

    /// States at every time in `times` (must be strictly increasing).
    pub fn trajectory(&self, psi0: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
        check_dims(self.dim(), psi0)?;
        check_times(times)?;
        let coeffs = self.to_eigenbasis(psi0);
        Ok(times.iter().map(|&t| self.to_state(&coeffs, t)).collect())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotoneTimes);
    }
    Ok(())
}

/// Observables recorded at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionRecord {
    pub time: f64,
    pub p_e: f64,
    pub mean_n: f64,
    pub fidelity: Option<f64>,
    pub norm_residual: f64,
    /// `⟨H⟩` evaluated with the Hamiltonian matrix.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionResult {
    pub records: Vec<EvolutionRecord>,
}

impl EvolutionResult {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn excited_populations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_e).collect()
    }

    pub fn max_norm_residual(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.norm_residual)
            .fold(0.0, f64::max)
    }

    /// Largest `|⟨H⟩(t) − ⟨H⟩(t₀)|`.
    pub fn max_energy_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        self.records
            .iter()
            .map(|r| (r.energy - first.energy).abs())
            .fold(0.0, f64::max)
    }
}

fn record(h: &ComplexMatrix, time: f64, psi: &QuantumState, fid: Option<f64>) -> EvolutionRecord {
    EvolutionRecord {
        time,
        p_e: psi.excited_population(),
        mean_n: psi.mean_phonons(),
        fidelity: fid,
        norm_residual: (psi.norm() - 1.0).abs(),
        energy: psi.amplitudes.dotc(&(h * &psi.amplitudes)).re,
    }
}

fn require_composite(psi0: &QuantumState) -> Result<()> {
    if !psi0.dim().is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "spin ⊗ oscillator state needs even dimension, got {}",
            psi0.dim()
        )));
    }
    Ok(())
}

/// Evolves `psi0` under `h` and records observables at each time.
pub fn propagate(h: &ComplexMatrix, psi0: &QuantumState, times: &[f64]) -> Result<EvolutionResult> {
    require_composite(psi0)?;
    let prop = Propagator::new(h)?;
    let states = prop.trajectory(psi0, times)?;
    let records = times
        .iter()
        .zip(&states)
        .map(|(&t, psi)| record(h, t, psi, None))
        .collect();
    Ok(EvolutionResult { records })
}

/// As [`propagate`], also recording the fidelity against the trajectory of
/// `psi0` under `reference`.
pub fn propagate_with_reference(
    h: &ComplexMatrix,
    reference: &ComplexMatrix,
    psi0: &QuantumState,
    times: &[f64],
) -> Result<EvolutionResult> {
    require_composite(psi0)?;
    let prop = Propagator::new(h)?;
    let ref_prop = Propagator::new(reference)?;
    let states = prop.trajectory(psi0, times)?;
    let ref_states = ref_prop.trajectory(psi0, times)?;
    let mut records = Vec::with_capacity(times.len());
    for ((&t, psi), phi) in times.iter().zip(&states).zip(&ref_states) {
        records.push(record(h, t, psi, Some(fidelity(psi, phi)?)));
    }
    Ok(EvolutionResult { records })
}

/// `steps + 1` evenly spaced points on `[0, t_max]`.
pub fn uniform_times(t_max: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    (0..=steps)
        .map(|k| t_max * k as f64 / steps as f64)
        .collect()
}

// Copyright 2026 The cfpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Photoelectric interaction in the arm-II cavity.
//!
//! The photon mode couples through `κ·[a·e^{ip·r} + a†·e^{−ip·r}]` with
//! `κ = sqrt(2π/(L³ω))·(ε·p)`, and the emitted-electron mode through the same
//! form with `(a_e, p_e, ε_e)`. Spatial phases are evaluated at one point `r`.
//! Units have ħ = 1.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, BasisSpec, Operator, StateVector, C64, DEFAULT_TOL};
use crate::protocol::{DEFAULT_FOCK_DIM, ELECTRON, PHOTON};

pub type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityConfig {
    pub length: f64,
    pub omega: f64,
    pub photon_momentum: Vec3,
    pub polarization: Vec3,
    pub electron_momentum: Vec3,
    pub electron_polarization: Vec3,
    pub position: Vec3,
    pub fock_dim: usize,
}

impl Default for CavityConfig {
    fn default() -> Self {
        CavityConfig {
            length: 1.0,
            omega: 1.0,
            photon_momentum: [1.0, 0.0, 0.0],
            polarization: [1.0, 0.0, 0.0],
            electron_momentum: [1.0, 0.0, 0.0],
            electron_polarization: [1.0, 0.0, 0.0],
            position: [0.0; 3],
            fock_dim: DEFAULT_FOCK_DIM,
        }
    }
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Parameter(format!("cavity length must be positive, got {}", self.length)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Parameter(format!("omega must be positive, got {}", self.omega)));
        }
        for (name, v) in [
            ("photon_momentum", &self.photon_momentum),
            ("electron_momentum", &self.electron_momentum),
            ("position", &self.position),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("polarization", &self.polarization), ("electron_polarization", &self.electron_polarization)]
        {
            if (dot(v, v).sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::Parameter(format!("{name} must be a unit vector, got {v:?}")));
            }
        }
        if self.fock_dim < 2 {
            return Err(Error::Parameter(format!("fock_dim must be at least 2, got {}", self.fock_dim)));
        }
        Ok(())
    }

    fn prefactor(&self) -> f64 {
        (2.0 * PI / (self.length.powi(3) * self.omega)).sqrt()
    }

    /// Photon-mode coupling `κ`.
    pub fn coupling(&self) -> f64 {
        self.prefactor() * dot(&self.polarization, &self.photon_momentum)
    }

    /// Electron-mode coupling `κ_e`.
    pub fn electron_coupling(&self) -> f64 {
        self.prefactor() * dot(&self.electron_polarization, &self.electron_momentum)
    }

    /// Rate of the photon-regeneration transition, `|κ|`.
    pub fn effective_coupling(&self) -> f64 {
        self.coupling().abs()
    }

    pub fn basis(&self) -> Result<BasisSpec> {
        cavity_basis(self.fock_dim)
    }
}

/// `(photon, electron)`.
pub fn cavity_basis(fock_dim: usize) -> Result<BasisSpec> {
    if fock_dim < 2 {
        return Err(Error::Parameter(format!("fock_dim must be at least 2, got {fock_dim}")));
    }
    BasisSpec::new([(PHOTON, fock_dim), (ELECTRON, fock_dim)])
}

/// Momentum and polarization carried by the cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeLabel {
    pub momentum: Vec3,
    pub polarization: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CavityState {
    pub mode: ModeLabel,
    pub state: StateVector,
}

impl CavityState {
    /// Probability of each photon occupation number.
    pub fn photon_distribution(&self) -> Result<Vec<f64>> {
        self.state.normalize()?.marginal(PHOTON)
    }

    /// Occupation number when the photon factor is in a definite Fock state.
    pub fn photon_occupation(&self) -> Option<usize> {
        definite_level(&self.photon_distribution().ok()?)
    }

    pub fn electron_occupation(&self) -> Option<usize> {
        if !self.state.basis().contains(ELECTRON) {
            return None;
        }
        definite_level(&self.state.normalize().ok()?.marginal(ELECTRON).ok()?)
    }
}

fn definite_level(dist: &[f64]) -> Option<usize> {
    dist.iter().position(|p| (p - 1.0).abs() <= DEFAULT_TOL)
}

fn check_cavity_basis(basis: &BasisSpec) -> Result<()> {
    basis.require(PHOTON)?;
    if let Some(f) = basis.factors().iter().find(|f| f.name != PHOTON && f.name != ELECTRON) {
        return Err(Error::Structural(format!("cavity states live on photon/electron factors, found '{}'", f.name)));
    }
    Ok(())
}

/// Empty cavity mode: photon occupation 0, electron occupation 0.
pub fn build_left_state(c: &CavityConfig, basis: &BasisSpec) -> Result<CavityState> {
    c.validate()?;
    check_cavity_basis(basis)?;
    let zeros = vec![0; basis.factors().len()];
    Ok(CavityState {
        mode: ModeLabel { momentum: c.photon_momentum, polarization: c.polarization },
        state: StateVector::basis_state(basis.clone(), &zeros)?,
    })
}

fn mode_hamiltonian(basis: &BasisSpec, factor: &str, coupling: f64, phase: f64) -> Result<Operator> {
    let d =
        basis.factor_dim(factor).ok_or_else(|| Error::Structural(format!("basis {basis} has no '{factor}' factor")))?;
    let m: DMatrix<C64> = hilbert::annihilation(d) * C64::from_polar(coupling, phase)
        + hilbert::creation(d) * C64::from_polar(coupling, -phase);
    Operator::local(basis, factor, &m)
}

/// Photon-mode interaction Hamiltonian. Zero when `ε ⟂ p`.
pub fn build_h_int(c: &CavityConfig, basis: &BasisSpec) -> Result<Operator> {
    c.validate()?;
    mode_hamiltonian(basis, PHOTON, c.coupling(), dot(&c.photon_momentum, &c.position))
}

/// Electron-mode interaction Hamiltonian.
pub fn build_h_int_electron(c: &CavityConfig, basis: &BasisSpec) -> Result<Operator> {
    c.validate()?;
    mode_hamiltonian(basis, ELECTRON, c.electron_coupling(), dot(&c.electron_momentum, &c.position))
}

/// `H_int + H_int^e`, or `H_int` alone when the basis has no electron factor.
pub fn total_hamiltonian(c: &CavityConfig, basis: &BasisSpec) -> Result<Operator> {
    let h = build_h_int(c, basis)?;
    if basis.contains(ELECTRON) {
        h.add(&build_h_int_electron(c, basis)?)
    } else {
        Ok(h)
    }
}

/// `exp(−i·H_tot·dt)`.
pub fn evolution(c: &CavityConfig, basis: &BasisSpec, dt: f64) -> Result<Operator> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("interaction time must be finite and non-negative, got {dt}")));
    }
    total_hamiltonian(c, basis)?.evolution(dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum InteractionMode {
    /// `H_int` applied directly to the state; not norm-preserving.
    Literal,
    /// Evolution under `H_tot = H_int + H_int^e` for time `dt`; agrees with
    /// `1 − i·H_tot·dt` to first order.
    FirstOrderUnitary { dt: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionOutcome {
    /// Output conditioned on photon occupation 1, normalized. `None` when that
    /// component vanishes.
    pub regenerated: Option<CavityState>,
    /// Literal: `⟨1|H_int|0⟩` (raw, non-unitary). FirstOrderUnitary: amplitude
    /// of photon 1, electron 1 (photon 1 alone without an electron factor).
    pub amplitude: C64,
    /// Probability of finding the photon in level 1 (unitary mode only).
    pub transition_probability: Option<f64>,
    /// Probability of photon 1 and electron 1 together (unitary mode with an
    /// electron factor only).
    pub emission_probability: Option<f64>,
    /// Full evolved state (unitary mode only).
    pub evolved: Option<StateVector>,
}

fn photon_one_component(state: &StateVector) -> Result<StateVector> {
    let d = state.basis().factor_dim(PHOTON).unwrap_or(0);
    Operator::local(state.basis(), PHOTON, &hilbert::level_projector(d, 1)?)?.apply(state)
}

/// Maps an empty-mode state to the photon-regenerated state.
pub fn apply_interaction(s: &CavityState, c: &CavityConfig, mode: InteractionMode) -> Result<InteractionOutcome> {
    c.validate()?;
    check_cavity_basis(s.state.basis())?;
    if s.photon_occupation() != Some(0) {
        return Err(Error::Precondition("interaction expects photon occupation 0 at the left end".into()));
    }
    let basis = s.state.basis().clone();
    let mut one_digits = s.state.basis().digits(s.state.amplitudes().iter().position(|z| z.norm() > 0.0).unwrap_or(0));
    let photon_pos = basis.require(PHOTON)?;
    one_digits[photon_pos] = 1;

    match mode {
        InteractionMode::Literal => {
            let raw = build_h_int(c, &basis)?.apply(&s.state)?;
            if raw.norm() == 0.0 {
                return Err(Error::Degenerate("ε·p = 0: the interaction Hamiltonian vanishes".into()));
            }
            let target = StateVector::basis_state(basis.clone(), &one_digits)?;
            Ok(InteractionOutcome {
                regenerated: Some(CavityState { mode: s.mode, state: raw.normalize()? }),
                amplitude: target.inner(&raw)?,
                transition_probability: None,
                emission_probability: None,
                evolved: None,
            })
        }
        InteractionMode::FirstOrderUnitary { dt } => {
            let evolved = evolution(c, &basis, dt)?.apply(&s.state)?;
            let has_electron = basis.position(ELECTRON);
            if let Some(pos) = has_electron {
                one_digits[pos] = 1;
            }
            let amplitude = evolved.amplitude(&one_digits)?;
            let transition = evolved.marginal(PHOTON)?[1];
            let one = photon_one_component(&evolved)?;
            let regenerated =
                if one.norm() > 0.0 { Some(CavityState { mode: s.mode, state: one.normalize()? }) } else { None };
            Ok(InteractionOutcome {
                regenerated,
                amplitude,
                transition_probability: Some(transition),
                emission_probability: has_electron.map(|_| amplitude.norm_sqr()),
                evolved: Some(evolved),
            })
        }
    }
}

/// `|⟨photon 1, electron 1| exp(−i·H_tot·dt) |0, 0⟩|²`.
pub fn emission_probability(c: &CavityConfig, dt: f64) -> Result<f64> {
    let basis = c.basis()?;
    let left = build_left_state(c, &basis)?;
    let out = evolution(c, &basis, dt)?.apply(&left.state)?;
    Ok(out.amplitude(&[1, 1])?.norm_sqr())
}

/// Probability that the photon mode is found in level 1 after `dt`.
pub fn photon_transition_probability(c: &CavityConfig, dt: f64) -> Result<f64> {
    let basis = c.basis()?;
    let left = build_left_state(c, &basis)?;
    Ok(evolution(c, &basis, dt)?.apply(&left.state)?.marginal(PHOTON)?[1])
}

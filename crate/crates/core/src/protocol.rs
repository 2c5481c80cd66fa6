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

//! Builders for the modified Mach-Zehnder interferometer: the pre- and
//! post-selected states, arm and number projectors, the field Hamiltonian and
//! the optical elements.
//!
//! Units have ħ = ω = 1. All builders emit factors in the canonical order
//! `(path, photon, electron)`; path level 0 is arm I and level 1 is arm II.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, re, BasisSpec, Operator, StateVector, C64, ONE, ZERO};

pub const PATH: &str = "path";
pub const PHOTON: &str = "photon";
pub const ELECTRON: &str = "electron";

pub const DEFAULT_FOCK_DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    I,
    II,
}

impl Arm {
    pub fn level(self) -> usize {
        match self {
            Arm::I => 0,
            Arm::II => 1,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::I => Arm::II,
            Arm::II => Arm::I,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::I => write!(f, "I"),
            Arm::II => write!(f, "II"),
        }
    }
}

/// Sign convention for the arm-II part of the post-selected state.
///
/// `Literal` is `|0⟩|I⟩ + (|0⟩ − |1⟩)|II⟩`; with it the arm-II energy weak value
/// comes out as −1. `ClaimConsistent` flips the arm-II signs,
/// `|0⟩|I⟩ + (−|0⟩ + |1⟩)|II⟩`, which gives +1 and is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostSelectionConvention {
    Literal,
    #[default]
    ClaimConsistent,
}

impl PostSelectionConvention {
    pub const ALL: [PostSelectionConvention; 2] =
        [PostSelectionConvention::Literal, PostSelectionConvention::ClaimConsistent];

    pub fn as_str(self) -> &'static str {
        match self {
            PostSelectionConvention::Literal => "literal",
            PostSelectionConvention::ClaimConsistent => "claim-consistent",
        }
    }
}

impl fmt::Display for PostSelectionConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PostSelectionConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(PostSelectionConvention::Literal),
            "claim-consistent" => Ok(PostSelectionConvention::ClaimConsistent),
            other => Err(Error::Parameter(format!(
                "unknown post-selection convention '{other}' (expected literal or claim-consistent)"
            ))),
        }
    }
}

/// A normalized state together with the factor that recovers the
/// unnormalized textbook form: `unnormalized = state · scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedState {
    pub state: StateVector,
    pub scale: f64,
}

impl PreparedState {
    fn from_unnormalized(raw: StateVector) -> Result<Self> {
        let scale = raw.norm();
        Ok(PreparedState { state: raw.normalize()?, scale })
    }

    pub fn unnormalized(&self) -> StateVector {
        self.state.scale(re(self.scale))
    }
}

fn check_fock(fock_dim: usize) -> Result<()> {
    if fock_dim < 2 {
        return Err(Error::Parameter(format!("fock_dim must be at least 2, got {fock_dim}")));
    }
    Ok(())
}

/// `(path:2, photon:fock_dim)`.
pub fn system_basis(fock_dim: usize) -> Result<BasisSpec> {
    check_fock(fock_dim)?;
    BasisSpec::new([(PATH, 2), (PHOTON, fock_dim)])
}

/// `(path:2, photon:fock_dim, electron:fock_dim)`.
pub fn full_basis(fock_dim: usize) -> Result<BasisSpec> {
    check_fock(fock_dim)?;
    BasisSpec::new([(PATH, 2), (PHOTON, fock_dim), (ELECTRON, fock_dim)])
}

/// Path/photon state from `(arm, photon level, amplitude)` terms.
fn path_photon_state(fock_dim: usize, terms: &[(Arm, usize, f64)]) -> Result<StateVector> {
    let mut s = StateVector::zeros(system_basis(fock_dim)?);
    for &(arm, n, amp) in terms {
        let cur = s.amplitude(&[arm.level(), n])?;
        s.set_amplitude(&[arm.level(), n], cur + re(amp))?;
    }
    Ok(s)
}

/// Pre-selected state `|0⟩|I⟩ + (|0⟩ + |1⟩)|II⟩`, normalized (scale √3).
pub fn build_pre(fock_dim: usize) -> Result<PreparedState> {
    PreparedState::from_unnormalized(path_photon_state(
        fock_dim,
        &[(Arm::I, 0, 1.0), (Arm::II, 0, 1.0), (Arm::II, 1, 1.0)],
    )?)
}

/// Post-selected state for the chosen sign convention, normalized (scale √3).
pub fn build_post(conv: PostSelectionConvention, fock_dim: usize) -> Result<PreparedState> {
    let sign = match conv {
        PostSelectionConvention::Literal => 1.0,
        PostSelectionConvention::ClaimConsistent => -1.0,
    };
    PreparedState::from_unnormalized(path_photon_state(
        fock_dim,
        &[(Arm::I, 0, 1.0), (Arm::II, 0, sign), (Arm::II, 1, -sign)],
    )?)
}

/// `|arm⟩⟨arm|` on the path factor.
pub fn arm_projector(arm: Arm, basis: &BasisSpec) -> Result<Operator> {
    let d = basis.factor_dim(PATH).ok_or_else(|| Error::Structural(format!("basis {basis} has no path factor")))?;
    Operator::local(basis, PATH, &hilbert::level_projector(d, arm.level())?)
}

/// Field Hamiltonian `a†a + ½` on the photon factor.
pub fn field_hamiltonian(basis: &BasisSpec) -> Result<Operator> {
    let d = basis.factor_dim(PHOTON).ok_or_else(|| Error::Structural(format!("basis {basis} has no photon factor")))?;
    let h = hilbert::number(d) + DMatrix::identity(d, d) * re(0.5);
    Operator::local(basis, PHOTON, &h)
}

/// Energy localized in one arm, `Π_arm · H`.
pub fn arm_hamiltonian(arm: Arm, basis: &BasisSpec) -> Result<Operator> {
    arm_projector(arm, basis)?.compose(&field_hamiltonian(basis)?)
}

/// `|n⟩⟨n|` on the photon factor.
pub fn number_projector(n: usize, basis: &BasisSpec) -> Result<Operator> {
    let d = basis.factor_dim(PHOTON).ok_or_else(|| Error::Structural(format!("basis {basis} has no photon factor")))?;
    Operator::local(basis, PHOTON, &hilbert::level_projector(d, n)?)
}

/// 2x2 beam-splitter on the path factor,
/// `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]`.
pub fn beam_splitter(angle: f64, phase: f64, basis: &BasisSpec) -> Result<Operator> {
    basis.require(PATH)?;
    let (s, c) = angle.sin_cos();
    let m = DMatrix::from_row_slice(2, 2, &[re(c), -C64::from_polar(s, -phase), C64::from_polar(s, phase), re(c)]);
    Operator::local(basis, PATH, &m)
}

/// Phase `e^{iφ}` on arm II.
pub fn phase_shifter(phase: f64, basis: &BasisSpec) -> Result<Operator> {
    basis.require(PATH)?;
    let m = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::from_polar(1.0, phase)]);
    Operator::local(basis, PATH, &m)
}

/// Optical layout: source → BS1 → arms (phase shifter on arm II) → BS2 →
/// detectors D1 (path level 0) and D2 (path level 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MziConfig {
    pub bs1_angle: f64,
    pub bs2_angle: f64,
    pub phase_shift: f64,
    pub fock_dim: usize,
}

impl Default for MziConfig {
    fn default() -> Self {
        MziConfig { bs1_angle: FRAC_PI_4, bs2_angle: FRAC_PI_4, phase_shift: 0.0, fock_dim: DEFAULT_FOCK_DIM }
    }
}

impl MziConfig {
    pub fn validate(&self) -> Result<()> {
        check_fock(self.fock_dim)?;
        for (name, v) in
            [("bs1_angle", self.bs1_angle), ("bs2_angle", self.bs2_angle), ("phase_shift", self.phase_shift)]
        {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<BasisSpec> {
        system_basis(self.fock_dim)
    }

    /// State the source has to inject so that BS1 emits the (normalized)
    /// pre-selected state.
    pub fn source_state(&self) -> Result<StateVector> {
        self.validate()?;
        let bs1 = beam_splitter(self.bs1_angle, 0.0, &self.basis()?)?;
        bs1.adjoint().apply(&build_pre(self.fock_dim)?.state)
    }

    /// Source state through BS1.
    pub fn prepare(&self, source: &StateVector) -> Result<StateVector> {
        beam_splitter(self.bs1_angle, 0.0, &self.basis()?)?.apply(source)
    }

    /// Detection probabilities `[D1, D2]` for a state inside the arms.
    pub fn output_probabilities(&self, inside: &StateVector) -> Result<[f64; 2]> {
        let basis = self.basis()?;
        let out = beam_splitter(self.bs2_angle, 0.0, &basis)?
            .compose(&phase_shifter(self.phase_shift, &basis)?)?
            .apply(inside)?;
        let m = out.marginal(PATH)?;
        Ok([m[0], m[1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DEFAULT_TOL;
    use std::f64::consts::PI;

    fn amps4(s: &StateVector) -> [f64; 4] {
        // (|0,I⟩, |0,II⟩, |1,II⟩, |1,I⟩)
        let a = |arm: Arm, n| s.amplitude(&[arm.level(), n]).unwrap();
        for z in s.amplitudes().iter() {
            assert_eq!(z.im, 0.0);
        }
        [a(Arm::I, 0).re, a(Arm::II, 0).re, a(Arm::II, 1).re, a(Arm::I, 1).re]
    }

    #[test]
    fn pre_state_amplitudes() {
        let pre = build_pre(2).unwrap();
        let raw = amps4(&pre.unnormalized());
        for (got, want) in raw.iter().zip([1.0, 1.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((pre.state.norm() - 1.0).abs() < 1e-15);
        let third = 1.0 / 3f64.sqrt();
        for (got, want) in amps4(&pre.state).iter().zip([third, third, third, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn post_state_amplitudes() {
        let lit = amps4(&build_post(PostSelectionConvention::Literal, 2).unwrap().unnormalized());
        let cc = amps4(&build_post(PostSelectionConvention::ClaimConsistent, 2).unwrap().unnormalized());
        for (got, want) in lit.iter().zip([1.0, 1.0, -1.0, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in cc.iter().zip([1.0, -1.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn overlaps_of_normalized_states() {
        let pre = build_pre(2).unwrap();
        for conv in PostSelectionConvention::ALL {
            let post = build_post(conv, 2).unwrap();
            let ov = post.state.inner(&pre.state).unwrap();
            assert!((ov - re(1.0 / 3.0)).norm() < 1e-15);
            assert!((ov.norm_sqr() - 1.0 / 9.0).abs() < 1e-15);
            let raw = post.unnormalized().inner(&pre.unnormalized()).unwrap();
            assert!((raw - ONE).norm() < 1e-14);
        }
    }

    #[test]
    fn fock_dim_below_two_is_rejected() {
        assert!(matches!(build_pre(1), Err(Error::Parameter(_))));
        assert!(matches!(build_post(PostSelectionConvention::Literal, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn arm_projectors_complete_and_orthogonal() {
        let b = system_basis(3).unwrap();
        let pi = arm_projector(Arm::I, &b).unwrap();
        let pii = arm_projector(Arm::II, &b).unwrap();
        assert_eq!(pi.add(&pii).unwrap(), Operator::identity(b.clone()));
        assert_eq!(pi.compose(&pii).unwrap(), Operator::zeros(b.clone()));
        assert_eq!(pi.compose(&pi).unwrap(), pi);
        assert!(arm_projector(Arm::I, &BasisSpec::single(PHOTON, 2).unwrap()).is_err());
    }

    #[test]
    fn arm_two_component_of_pre() {
        let pre = build_pre(2).unwrap().unnormalized();
        let b = pre.basis().clone();
        let got = arm_projector(Arm::II, &b).unwrap().apply(&pre).unwrap();
        let want = path_photon_state(2, &[(Arm::II, 0, 1.0), (Arm::II, 1, 1.0)]).unwrap();
        assert!(got.approx_eq(&want, 1e-15));
    }

    #[test]
    fn field_hamiltonian_spectrum() {
        let b = system_basis(2).unwrap();
        let h = field_hamiltonian(&b).unwrap();
        for (n, e) in [(0, 0.5), (1, 1.5)] {
            let s = StateVector::basis_state(b.clone(), &[1, n]).unwrap();
            assert_eq!(h.apply(&s).unwrap(), s.scale(re(e)));
        }
        let pi = arm_projector(Arm::I, &b).unwrap();
        assert_eq!(h.compose(&pi).unwrap(), pi.compose(&h).unwrap());
        assert!(field_hamiltonian(&BasisSpec::single(PATH, 2).unwrap()).is_err());
    }

    #[test]
    fn arm_hamiltonians() {
        let b = system_basis(2).unwrap();
        let s0i = StateVector::basis_state(b.clone(), &[0, 0]).unwrap();
        let hi = arm_hamiltonian(Arm::I, &b).unwrap();
        let hii = arm_hamiltonian(Arm::II, &b).unwrap();
        assert_eq!(hi.apply(&s0i).unwrap(), s0i.scale(re(0.5)));
        assert_eq!(hii.apply(&s0i).unwrap(), StateVector::zeros(b.clone()));
        assert_eq!(hi.add(&hii).unwrap(), field_hamiltonian(&b).unwrap());
        assert!(hi.is_hermitian(0.0) && hii.is_hermitian(0.0));
    }

    #[test]
    fn number_projectors() {
        let b = system_basis(2).unwrap();
        let p0 = number_projector(0, &b).unwrap();
        let p1 = number_projector(1, &b).unwrap();
        assert_eq!(p0.add(&p1).unwrap(), Operator::identity(b.clone()));
        let zero = StateVector::basis_state(b.clone(), &[0, 0]).unwrap();
        assert_eq!(p1.apply(&zero).unwrap(), StateVector::zeros(b.clone()));
        assert!(matches!(number_projector(2, &b), Err(Error::Parameter(_))));

        let pre = build_pre(2).unwrap().unnormalized();
        let got = arm_projector(Arm::II, &b).unwrap().compose(&p0).unwrap().apply(&pre).unwrap();
        assert_eq!(got, StateVector::basis_state(b, &[1, 0]).unwrap());
    }

    #[test]
    fn optical_elements() {
        let b = system_basis(2).unwrap();
        assert!(beam_splitter(0.0, 0.0, &b).unwrap().approx_eq(&Operator::identity(b.clone()), 0.0));
        assert!(beam_splitter(FRAC_PI_4, 0.0, &b).unwrap().is_unitary(1e-12));
        assert!(beam_splitter(0.3, 1.1, &b).unwrap().is_unitary(1e-12));
        let arm2 = StateVector::basis_state(b.clone(), &[1, 1]).unwrap();
        let out = phase_shifter(PI, &b).unwrap().apply(&arm2).unwrap();
        assert!(out.approx_eq(&arm2.scale(re(-1.0)), 1e-15));
        assert!(phase_shifter(0.2, &b).unwrap().is_unitary(DEFAULT_TOL));
    }

    #[test]
    fn preset_source_reproduces_pre() {
        let mzi = MziConfig::default();
        let src = mzi.source_state().unwrap();
        let inside = mzi.prepare(&src).unwrap();
        assert!(inside.approx_eq(&build_pre(2).unwrap().state, 1e-15));
        let p = mzi.output_probabilities(&inside).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn convention_parses() {
        assert_eq!("literal".parse::<PostSelectionConvention>().unwrap(), PostSelectionConvention::Literal);
        assert!("other".parse::<PostSelectionConvention>().is_err());
        assert_eq!(PostSelectionConvention::default(), PostSelectionConvention::ClaimConsistent);
    }
}

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

//! Weak values of pre- and post-selected ensembles, the von Neumann pointer
//! and the linearized arm-I phase evolution.

mod pointer;

pub use pointer::{analytic_readout, pointer_readout, von_neumann_couple, JointState, PointerConfig, PointerReadout};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{re, Operator, StateVector, C64};
use crate::protocol::{self, Arm, PostSelectionConvention};

/// Below this overlap magnitude a weak value is reported as undefined.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Which state sits in the bra of the weak-value ratio.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeakValueOrdering {
    /// `⟨post|A|pre⟩ / ⟨post|pre⟩`.
    #[default]
    #[serde(rename = "post-a-pre")]
    PostApre,
    /// `⟨pre|A|post⟩ / ⟨pre|post⟩`; the complex conjugate of `PostApre` for
    /// Hermitian `A`.
    #[serde(rename = "pre-a-post")]
    PreApost,
}

impl WeakValueOrdering {
    pub fn as_str(self) -> &'static str {
        match self {
            WeakValueOrdering::PostApre => "post-a-pre",
            WeakValueOrdering::PreApost => "pre-a-post",
        }
    }
}

impl fmt::Display for WeakValueOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeakValueOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "post-a-pre" => Ok(WeakValueOrdering::PostApre),
            "pre-a-post" => Ok(WeakValueOrdering::PreApost),
            other => Err(Error::Parameter(format!(
                "unknown weak-value ordering '{other}' (expected post-a-pre or pre-a-post)"
            ))),
        }
    }
}

/// Normalized pre- and post-selected states on a shared basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PrePostEnsemble {
    pre: StateVector,
    post: StateVector,
    overlap: C64,
}

impl PrePostEnsemble {
    /// Normalizes both states. Orthogonal pairs are accepted here; the weak
    /// value itself reports them.
    pub fn new(pre: &StateVector, post: &StateVector) -> Result<Self> {
        if pre.basis() != post.basis() {
            return Err(Error::Structural(format!(
                "pre basis {} differs from post basis {}",
                pre.basis(),
                post.basis()
            )));
        }
        let pre = pre.normalize()?;
        let post = post.normalize()?;
        let overlap = post.inner(&pre)?;
        Ok(PrePostEnsemble { pre, post, overlap })
    }

    /// The interferometer ensemble for a post-selection convention.
    pub fn protocol(conv: PostSelectionConvention, fock_dim: usize) -> Result<Self> {
        let pre = protocol::build_pre(fock_dim)?;
        let post = protocol::build_post(conv, fock_dim)?;
        Self::new(&pre.state, &post.state)
    }

    pub fn pre(&self) -> &StateVector {
        &self.pre
    }

    pub fn post(&self) -> &StateVector {
        &self.post
    }

    /// Cached `⟨post|pre⟩`.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    pub fn postselection_probability(&self) -> f64 {
        self.overlap.norm_sqr()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakValueResult {
    pub value: C64,
    pub numerator: C64,
    pub overlap: C64,
    pub ordering: WeakValueOrdering,
}

/// Weak value of `a` on the ensemble under the chosen ordering.
pub fn weak_value(a: &Operator, e: &PrePostEnsemble, ordering: WeakValueOrdering) -> Result<WeakValueResult> {
    let (bra, ket) = match ordering {
        WeakValueOrdering::PostApre => (&e.post, &e.pre),
        WeakValueOrdering::PreApost => (&e.pre, &e.post),
    };
    let overlap = bra.inner(ket)?;
    if overlap.norm() <= ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalEnsemble { overlap: overlap.norm(), tol: ORTHOGONALITY_TOL });
    }
    let numerator = a.sandwich(bra, ket)?;
    Ok(WeakValueResult { value: numerator / overlap, numerator, overlap, ordering })
}

/// Weak values of `Π_II·Π_0` and `Π_II·Π_1`; they sum to the weak value of
/// `Π_II`.
pub fn self_canceling_pair(
    e: &PrePostEnsemble,
    ordering: WeakValueOrdering,
) -> Result<(WeakValueResult, WeakValueResult)> {
    let b = e.pre().basis();
    let pii = protocol::arm_projector(Arm::II, b)?;
    let n0 = pii.compose(&protocol::number_projector(0, b)?)?;
    let n1 = pii.compose(&protocol::number_projector(1, b)?)?;
    Ok((weak_value(&n0, e, ordering)?, weak_value(&n1, e, ordering)?))
}

/// Pre-state after the linearized arm-I coupling, with the global ½ prefactor
/// applied to `state`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseShiftedState {
    pub state: StateVector,
    /// Global prefactor applied to `state`. It is not a probability
    /// amplitude; use [`PhaseShiftedState::normalized`] for probabilities.
    pub prefactor: f64,
    /// `exp(−i·g·H_w(I))` multiplying the arm-I component.
    pub phase: C64,
    pub arm_one_energy_weak_value: C64,
}

impl PhaseShiftedState {
    pub fn normalized(&self) -> Result<StateVector> {
        self.state.normalize()
    }
}

/// Multiplies the arm-I component of the pre-state by `exp(−i·g·H_w(I))` and
/// scales the whole state by ½.
pub fn phase_shift_evolution(e: &PrePostEnsemble, g: f64) -> Result<PhaseShiftedState> {
    let b = e.pre().basis();
    let h_w = weak_value(&protocol::arm_hamiltonian(Arm::I, b)?, e, WeakValueOrdering::PostApre)?.value;
    let phase = (C64::new(0.0, -g) * h_w).exp();
    let arm_i = protocol::arm_projector(Arm::I, b)?.apply(e.pre())?;
    let arm_ii = protocol::arm_projector(Arm::II, b)?.apply(e.pre())?;
    let state = arm_i.scale(phase).add(&arm_ii)?.scale(re(0.5));
    Ok(PhaseShiftedState { state, prefactor: 0.5, phase, arm_one_energy_weak_value: h_w })
}

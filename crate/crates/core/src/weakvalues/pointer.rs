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

//! Gaussian pointer on a uniform grid, coupled through `exp(−i·g·A⊗P)`.
//!
//! The pointer starts as `φ(x) ∝ exp(−x²/4σ²)`, so `|φ|²` has standard
//! deviation σ. `P` is the grid momentum; the coupling is applied exactly in
//! the eigenbasis of `A` by translating each eigencomponent in Fourier space.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{re, BasisSpec, Operator, StateVector, C64, DEFAULT_TOL, ZERO};

/// Post-selection probabilities below this make the readout undefined.
pub const MIN_POSTSELECTION_PROBABILITY: f64 = 1e-14;

// Gaussian momentum amplitude at the Nyquist frequency must be below 1e-8.
const NYQUIST_MARGIN: f64 = 4.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointerConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub samples: usize,
    pub sigma: f64,
    pub coupling_g: f64,
}

impl Default for PointerConfig {
    fn default() -> Self {
        PointerConfig { grid_min: -8.0, grid_max: 8.0, samples: 256, sigma: 1.0, coupling_g: 0.01 }
    }
}

impl PointerConfig {
    pub fn with_coupling(self, g: f64) -> Self {
        PointerConfig { coupling_g: g, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 16 {
            return Err(Error::Parameter(format!("pointer needs at least 16 samples, got {}", self.samples)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Parameter(format!("pointer sigma must be positive, got {}", self.sigma)));
        }
        if !self.grid_min.is_finite() || !self.grid_max.is_finite() || !self.coupling_g.is_finite() {
            return Err(Error::Parameter("pointer grid and coupling must be finite".into()));
        }
        if self.grid_min > -6.0 * self.sigma || self.grid_max < 6.0 * self.sigma {
            return Err(Error::Parameter(format!(
                "pointer grid [{}, {}] must cover ±6σ = ±{}",
                self.grid_min,
                self.grid_max,
                6.0 * self.sigma
            )));
        }
        Ok(())
    }

    /// Fails when the grid cannot represent the pointer: the Gaussian is not
    /// band-limited at this spacing, or a shift of `max_shift` would push it
    /// into the periodic wrap-around.
    pub fn check_resolution(&self, max_shift: f64) -> Result<()> {
        self.validate()?;
        let k_nyquist = PI / self.spacing();
        if self.sigma * k_nyquist < NYQUIST_MARGIN {
            return Err(Error::NumericQuality(format!(
                "pointer grid too coarse: spacing {:.4} aliases a σ = {} Gaussian (need σ·π/dx ≥ {NYQUIST_MARGIN})",
                self.spacing(),
                self.sigma
            )));
        }
        let room = (-self.grid_min).min(self.grid_max) - 6.0 * self.sigma;
        if max_shift.abs() > room {
            return Err(Error::NumericQuality(format!(
                "pointer shift {max_shift} exceeds grid room {room} beyond ±6σ"
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.grid_max - self.grid_min) / self.samples as f64
    }

    /// Cell-centred sample positions. On a grid symmetric about 0 the
    /// positions come in exact ± pairs.
    pub fn positions(&self) -> Vec<f64> {
        let dx = self.spacing();
        let centre = 0.5 * (self.grid_min + self.grid_max);
        let mid = 0.5 * (self.samples as f64 - 1.0);
        (0..self.samples).map(|j| centre + (j as f64 - mid) * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.samples as i64;
        let scale = 2.0 * PI / (n as f64 * self.spacing());
        (0..n).map(|j| if j < (n + 1) / 2 { j } else { j - n }).map(|f| f as f64 * scale).collect()
    }

    /// Discretely normalized initial pointer wavefunction.
    pub fn initial_wavefunction(&self) -> Vec<C64> {
        let s2 = 4.0 * self.sigma * self.sigma;
        let raw: Vec<f64> = self.positions().iter().map(|x| (-x * x / s2).exp()).collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        raw.into_iter().map(|v| re(v / norm)).collect()
    }
}

/// System ⊗ pointer amplitudes; row `i` is the pointer wavefunction attached
/// to system basis state `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    basis: BasisSpec,
    pointer: PointerConfig,
    amps: DMatrix<C64>,
}

impl JointState {
    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn pointer(&self) -> &PointerConfig {
        &self.pointer
    }

    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Pointer wavefunction left after projecting the system onto `bra`
    /// (not renormalized).
    pub fn project_system(&self, bra: &StateVector) -> Result<Vec<C64>> {
        if bra.basis() != &self.basis {
            return Err(Error::Structural(format!(
                "post-selected state basis {} differs from joint basis {}",
                bra.basis(),
                self.basis
            )));
        }
        let b = bra.amplitudes();
        Ok((0..self.amps.ncols())
            .map(|j| (0..self.amps.nrows()).map(|i| b[i].conj() * self.amps[(i, j)]).sum())
            .collect())
    }
}

/// Applies `exp(−i·g·A⊗P)` to `s ⊗ φ`.
pub fn von_neumann_couple(s: &StateVector, a: &Operator, p: &PointerConfig) -> Result<JointState> {
    if s.basis() != a.basis() {
        return Err(Error::Structural(format!("state basis {} differs from operator basis {}", s.basis(), a.basis())));
    }
    if !a.is_hermitian(DEFAULT_TOL) {
        return Err(Error::Parameter("von Neumann coupling needs a Hermitian observable".into()));
    }
    let (vals, vecs) = a.spectral_decomposition(DEFAULT_TOL)?;
    let max_shift = vals.iter().fold(0.0f64, |m, l| m.max(l.abs())) * p.coupling_g;
    p.check_resolution(max_shift)?;

    let n = p.samples;
    let phi = p.initial_wavefunction();
    let k = p.momenta();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut phi_k = phi.clone();
    fwd.process(&mut phi_k);

    // System amplitudes in the eigenbasis of A.
    let coeffs: DVector<C64> = vecs.adjoint() * s.amplitudes();
    let dim = vals.len();
    let mut eig_rows = DMatrix::<C64>::zeros(dim, n);
    let mut buf = vec![ZERO; n];
    for (r, &lambda) in vals.iter().enumerate() {
        if coeffs[r] == ZERO {
            continue;
        }
        let shift = p.coupling_g * lambda;
        if shift == 0.0 {
            for j in 0..n {
                eig_rows[(r, j)] = coeffs[r] * phi[j];
            }
            continue;
        }
        for j in 0..n {
            buf[j] = phi_k[j] * C64::from_polar(1.0, -k[j] * shift);
        }
        inv.process(&mut buf);
        let c = coeffs[r] / n as f64;
        for j in 0..n {
            eig_rows[(r, j)] = c * buf[j];
        }
    }
    let amps = &vecs * eig_rows;
    let joint = JointState { basis: s.basis().clone(), pointer: *p, amps };

    let before = s.norm_sqr();
    if (joint.norm_sqr() - before).abs() > DEFAULT_TOL * before.max(1.0) {
        return Err(Error::NumericQuality(format!("coupling lost unitarity: norm² {before} -> {}", joint.norm_sqr())));
    }
    Ok(joint)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointerReadout {
    pub mean: f64,
    pub variance: f64,
    pub postselection_probability: f64,
}

/// Zeroth, first and second moments. Samples `j` and `n−1−j` are added
/// together first so a mirror-symmetric distribution has a first moment of
/// exactly zero.
fn moments(xs: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    let (mut w0, mut w1, mut w2) = (0.0, 0.0, 0.0);
    for j in 0..n / 2 {
        let (a, b) = (j, n - 1 - j);
        w0 += weights[a] + weights[b];
        w1 += weights[a] * xs[a] + weights[b] * xs[b];
        w2 += weights[a] * xs[a] * xs[a] + weights[b] * xs[b] * xs[b];
    }
    if n % 2 == 1 {
        let m = n / 2;
        w0 += weights[m];
        w1 += weights[m] * xs[m];
        w2 += weights[m] * xs[m] * xs[m];
    }
    (w0, w1, w2)
}

/// Post-selects the system on `post` and reads the pointer mean and variance.
pub fn pointer_readout(joint: &JointState, post: &StateVector) -> Result<PointerReadout> {
    let post = post.normalize()?;
    let chi = joint.project_system(&post)?;
    let xs = joint.pointer.positions();
    let w: Vec<f64> = chi.iter().map(|z| z.norm_sqr()).collect();
    let (p, m1, m2) = moments(&xs, &w);
    if p < MIN_POSTSELECTION_PROBABILITY {
        return Err(Error::OrthogonalEnsemble { overlap: p.sqrt(), tol: MIN_POSTSELECTION_PROBABILITY.sqrt() });
    }
    let mean = m1 / p;
    let variance = (m2 / p - mean * mean).max(0.0);
    Ok(PointerReadout { mean, variance, postselection_probability: p / joint.norm_sqr() })
}

/// Closed-form readout for a continuous Gaussian pointer: the post-selected
/// pointer is a superposition of translated Gaussians whose overlap integrals
/// are analytic.
pub fn analytic_readout(
    s: &StateVector,
    a: &Operator,
    post: &StateVector,
    p: &PointerConfig,
) -> Result<PointerReadout> {
    p.validate()?;
    let s = s.normalize()?;
    let post = post.normalize()?;
    if s.basis() != a.basis() || post.basis() != a.basis() {
        return Err(Error::Structural("analytic readout needs state, operator and post on one basis".into()));
    }
    let (vals, vecs) = a.spectral_decomposition(DEFAULT_TOL)?;
    let c: DVector<C64> = vecs.adjoint() * s.amplitudes();
    let b: DVector<C64> = vecs.adjoint() * post.amplitudes();
    let w: Vec<C64> = (0..vals.len()).map(|k| b[k].conj() * c[k]).collect();
    let shifts: Vec<f64> = vals.iter().map(|l| p.coupling_g * l).collect();
    let s2 = p.sigma * p.sigma;
    let (mut z0, mut z1, mut z2) = (0.0, 0.0, 0.0);
    for k in 0..w.len() {
        for l in 0..w.len() {
            let ov = (w[k].conj() * w[l]).re * (-(shifts[k] - shifts[l]).powi(2) / (8.0 * s2)).exp();
            let mid = 0.5 * (shifts[k] + shifts[l]);
            z0 += ov;
            z1 += ov * mid;
            z2 += ov * (s2 + mid * mid);
        }
    }
    if z0 < MIN_POSTSELECTION_PROBABILITY {
        return Err(Error::OrthogonalEnsemble {
            overlap: z0.max(0.0).sqrt(),
            tol: MIN_POSTSELECTION_PROBABILITY.sqrt(),
        });
    }
    let mean = z1 / z0;
    Ok(PointerReadout { mean, variance: (z2 / z0 - mean * mean).max(0.0), postselection_probability: z0 })
}

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

//! Photon recycling: the same photon is sent through the interferometer up
//! to N times, each pass post-selected at D1 and re-injected.
//!
//! Two models run side by side. `ProtocolFaithful` propagates the actual
//! pre-selected state through the arm-II cavity and post-selects on the
//! chosen post state. `Interrogation` is the textbook Zeno abstraction in
//! which each cycle rotates a survival qubit by π/(2N) and measures it.
//!
//! Randomness comes from ChaCha8 seeded with the run seed; run `i` uses
//! stream `i`, so every run draws from its own reproducible sequence no
//! matter which thread executes it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{self, CavityConfig};
use crate::error::{Error, Result};
use crate::hilbert::{re, BasisSpec, Operator, StateVector, Tensor, DEFAULT_TOL};
use crate::protocol::{self, Arm, PostSelectionConvention, ELECTRON};

const SURVIVAL: &str = "survival";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZenoModel {
    ProtocolFaithful,
    #[default]
    Interrogation,
}

impl ZenoModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ZenoModel::ProtocolFaithful => "protocol-faithful",
            ZenoModel::Interrogation => "interrogation",
        }
    }
}

impl fmt::Display for ZenoModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZenoModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "protocol-faithful" => Ok(ZenoModel::ProtocolFaithful),
            "interrogation" => Ok(ZenoModel::Interrogation),
            other => Err(Error::Parameter(format!(
                "unknown Zeno model '{other}' (expected protocol-faithful or interrogation)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZenoConfig {
    pub cycles: usize,
    pub model: ZenoModel,
    pub convention: PostSelectionConvention,
    /// Cavity interaction time per pass (protocol-faithful model).
    pub interaction_dt: f64,
    pub seed: u64,
    pub runs: usize,
    pub cavity: CavityConfig,
}

impl Default for ZenoConfig {
    fn default() -> Self {
        ZenoConfig {
            cycles: 100,
            model: ZenoModel::Interrogation,
            convention: PostSelectionConvention::ClaimConsistent,
            interaction_dt: 0.0,
            seed: 0,
            runs: 1000,
            cavity: CavityConfig::default(),
        }
    }
}

impl ZenoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles == 0 {
            return Err(Error::Parameter("cycles must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Parameter("runs must be at least 1".into()));
        }
        if !(self.interaction_dt >= 0.0 && self.interaction_dt.is_finite()) {
            return Err(Error::Parameter(format!(
                "interaction_dt must be finite and non-negative, got {}",
                self.interaction_dt
            )));
        }
        self.cavity.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub cycle_index: usize,
    pub postselected: bool,
    pub electron_emitted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub completed_cycles: usize,
    pub electrons_emitted: usize,
    pub survived_all: bool,
    pub per_cycle_success_estimate: f64,
    pub records: Vec<CycleRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CycleOutcome {
    /// The photon was post-selected and re-injected in this state.
    Recycled(StateVector),
    Terminated,
}

/// Exact probabilities of one cycle started from the re-prepared state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleProbabilities {
    pub postselection: f64,
    pub emission_given_postselection: f64,
}

#[derive(Clone, Debug)]
enum Model {
    Interrogation {
        rotation: Operator,
        initial: StateVector,
    },
    Protocol {
        initial: StateVector,
        coupled: Operator,
        /// `post ⊗ |e⟩` for each electron level `e`.
        post_branches: Vec<StateVector>,
    },
}

/// Precomputed per-cycle dynamics for one configuration.
#[derive(Clone, Debug)]
pub struct ZenoEngine {
    cfg: ZenoConfig,
    model: Model,
    // every cycle restarts from the same re-prepared state
    probs: CycleProbabilities,
}

/// Independent generator for run `run_index`.
pub fn rng_for_run(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

impl ZenoEngine {
    pub fn new(cfg: &ZenoConfig) -> Result<Self> {
        cfg.validate()?;
        let model = match cfg.model {
            ZenoModel::Interrogation => {
                let theta = PI / (2.0 * cfg.cycles as f64);
                let (s, c) = theta.sin_cos();
                let basis = BasisSpec::single(SURVIVAL, 2)?;
                let rotation =
                    Operator::new(basis.clone(), DMatrix::from_row_slice(2, 2, &[re(c), re(-s), re(s), re(c)]))?;
                Model::Interrogation { rotation, initial: StateVector::basis_state(basis, &[0])? }
            }
            ZenoModel::ProtocolFaithful => {
                let d = cfg.cavity.fock_dim;
                let electron = BasisSpec::single(ELECTRON, d)?;
                let vacuum = StateVector::basis_state(electron.clone(), &[0])?;
                let initial = protocol::build_pre(d)?.state.tensor(&vacuum)?;
                let full = initial.basis().clone();
                let cavity_u = cavity::evolution(&cfg.cavity, &cfg.cavity.basis()?, cfg.interaction_dt)?;
                let path = BasisSpec::single(protocol::PATH, 2)?;
                let arm_ii_u = Operator::identity(path).tensor(&cavity_u)?;
                let coupled = protocol::arm_projector(Arm::I, &full)?
                    .add(&protocol::arm_projector(Arm::II, &full)?.compose(&arm_ii_u)?)?;
                if !coupled.is_unitary(DEFAULT_TOL) {
                    return Err(Error::NumericQuality("arm-conditioned cavity evolution is not unitary".into()));
                }
                let post = protocol::build_post(cfg.convention, d)?.state;
                let post_branches = (0..d)
                    .map(|e| post.tensor(&StateVector::basis_state(electron.clone(), &[e])?))
                    .collect::<Result<Vec<_>>>()?;
                Model::Protocol { initial, coupled, post_branches }
            }
        };
        let mut engine = ZenoEngine {
            cfg: *cfg,
            model,
            probs: CycleProbabilities { postselection: 0.0, emission_given_postselection: 0.0 },
        };
        engine.probs = engine.probabilities_from(engine.initial_state())?;
        Ok(engine)
    }

    pub fn config(&self) -> &ZenoConfig {
        &self.cfg
    }

    /// State fed into the interferometer at the start of every cycle.
    pub fn initial_state(&self) -> &StateVector {
        match &self.model {
            Model::Interrogation { initial, .. } | Model::Protocol { initial, .. } => initial,
        }
    }

    /// Post-selection probability and conditional emission probability of
    /// one cycle from `state`.
    pub fn probabilities_from(&self, state: &StateVector) -> Result<CycleProbabilities> {
        if (state.norm() - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::Precondition(format!("cycle input must be normalized, norm = {}", state.norm())));
        }
        match &self.model {
            Model::Interrogation { rotation, initial } => {
                let p = initial.inner(&rotation.apply(state)?)?.norm_sqr();
                Ok(CycleProbabilities { postselection: p, emission_given_postselection: 1.0 })
            }
            Model::Protocol { coupled, post_branches, .. } => {
                let out = coupled.apply(state)?;
                let branch: Vec<f64> =
                    post_branches.iter().map(|b| b.inner(&out).map(|z| z.norm_sqr())).collect::<Result<_>>()?;
                let p: f64 = branch.iter().sum();
                let emit = if p > 0.0 { branch[1..].iter().sum::<f64>() / p } else { 0.0 };
                Ok(CycleProbabilities { postselection: p, emission_given_postselection: emit })
            }
        }
    }

    pub fn cycle_probabilities(&self) -> Result<CycleProbabilities> {
        Ok(self.probs)
    }

    /// One pass: propagate, post-select, sample emission, re-prepare.
    pub fn run_cycle<R: Rng>(
        &self,
        state: &StateVector,
        cycle_index: usize,
        rng: &mut R,
    ) -> Result<(CycleRecord, CycleOutcome)> {
        let probs = self.probabilities_from(state)?;
        Ok(self.sample_cycle(&probs, cycle_index, rng))
    }

    fn sample_cycle<R: Rng>(
        &self,
        probs: &CycleProbabilities,
        cycle_index: usize,
        rng: &mut R,
    ) -> (CycleRecord, CycleOutcome) {
        let postselected = rng.gen::<f64>() < probs.postselection;
        if !postselected {
            let rec = CycleRecord { cycle_index, postselected, electron_emitted: false };
            return (rec, CycleOutcome::Terminated);
        }
        let electron_emitted = match self.model {
            // each surviving interrogation is one counterfactual interaction
            Model::Interrogation { .. } => true,
            Model::Protocol { .. } => rng.gen::<f64>() < probs.emission_given_postselection,
        };
        let rec = CycleRecord { cycle_index, postselected, electron_emitted };
        (rec, CycleOutcome::Recycled(self.initial_state().clone()))
    }

    /// Chains cycles until the photon is lost or all cycles complete.
    pub fn run(&self, run_index: u64, keep_records: bool) -> Result<RunSummary> {
        let mut rng = rng_for_run(self.cfg.seed, run_index);
        let probs = self.probs;
        let mut records = Vec::new();
        let mut completed = 0;
        let mut electrons = 0;
        let mut attempts = 0;
        for k in 0..self.cfg.cycles {
            attempts += 1;
            let (rec, outcome) = self.sample_cycle(&probs, k, &mut rng);
            if keep_records {
                records.push(rec);
            }
            if rec.electron_emitted {
                electrons += 1;
            }
            match outcome {
                CycleOutcome::Recycled(_) => completed += 1,
                CycleOutcome::Terminated => break,
            }
        }
        Ok(RunSummary {
            completed_cycles: completed,
            electrons_emitted: electrons,
            survived_all: completed == self.cfg.cycles,
            per_cycle_success_estimate: completed as f64 / attempts as f64,
            records,
        })
    }
}

/// Single-cycle convenience wrapper that builds the engine on the fly.
pub fn run_cycle<R: Rng>(state: &StateVector, cfg: &ZenoConfig, rng: &mut R) -> Result<(CycleRecord, CycleOutcome)> {
    ZenoEngine::new(cfg)?.run_cycle(state, 0, rng)
}

/// One recycled photon, run index 0.
pub fn run_zeno(cfg: &ZenoConfig) -> Result<RunSummary> {
    ZenoEngine::new(cfg)?.run(0, true)
}

/// Exact probability of surviving all `cycles`, `p_cycle^N`.
pub fn analytic_survival(cfg: &ZenoConfig) -> Result<f64> {
    let p = ZenoEngine::new(cfg)?.cycle_probabilities()?.postselection;
    Ok(p.powi(cfg.cycles as i32))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub runs: usize,
    pub cycles: usize,
    pub mean_electrons: f64,
    pub electron_variance: f64,
    pub survival_frequency: f64,
    pub survival_std_error: f64,
    /// Normal-approximation 95% interval on the survival frequency.
    pub survival_ci95: [f64; 2],
    pub attempts: u64,
    pub successes: u64,
    /// Post-selected cycles over attempted cycles.
    pub postselection_frequency: f64,
    pub postselection_std_error: f64,
    pub analytic_survival: f64,
    pub cycle_probabilities: CycleProbabilities,
    /// `electron_histogram[k]` = runs that emitted exactly `k` electrons.
    pub electron_histogram: Vec<u64>,
}

impl MonteCarloSummary {
    pub fn ci_width(&self) -> f64 {
        self.survival_ci95[1] - self.survival_ci95[0]
    }
}

#[derive(Clone, Copy)]
struct Tally {
    completed: u64,
    electrons: u64,
    survived: bool,
}

/// Aggregates `cfg.runs` independent runs. Runs may execute on any number of
/// threads; only integer tallies are combined, so the result is bit-identical
/// for a given seed.
pub fn monte_carlo(cfg: &ZenoConfig) -> Result<MonteCarloSummary> {
    let engine = ZenoEngine::new(cfg)?;
    let probs = engine.cycle_probabilities()?;
    let tallies: Vec<Tally> = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|i| {
            engine.run(i, false).map(|r| Tally {
                completed: r.completed_cycles as u64,
                electrons: r.electrons_emitted as u64,
                survived: r.survived_all,
            })
        })
        .collect::<Result<_>>()?;

    let n = cfg.runs as u64;
    let mut survived = 0u64;
    let mut successes = 0u64;
    let mut attempts = 0u64;
    let mut e_sum = 0u64;
    let mut e_sq = 0u128;
    let mut hist = vec![0u64; cfg.cycles + 1];
    for t in &tallies {
        survived += t.survived as u64;
        successes += t.completed;
        attempts += t.completed + (!t.survived) as u64;
        e_sum += t.electrons;
        e_sq += (t.electrons as u128) * (t.electrons as u128);
        hist[t.electrons as usize] += 1;
    }
    let nf = n as f64;
    let mean = e_sum as f64 / nf;
    let variance = if n > 1 { (e_sq as f64 - nf * mean * mean) / (nf - 1.0) } else { 0.0 };
    let freq = survived as f64 / nf;
    let se = (freq * (1.0 - freq) / nf).sqrt();
    let ps = successes as f64 / attempts as f64;
    Ok(MonteCarloSummary {
        runs: cfg.runs,
        cycles: cfg.cycles,
        mean_electrons: mean,
        electron_variance: variance.max(0.0),
        survival_frequency: freq,
        survival_std_error: se,
        survival_ci95: [freq - 1.96 * se, freq + 1.96 * se],
        attempts,
        successes,
        postselection_frequency: ps,
        postselection_std_error: (ps * (1.0 - ps) / attempts as f64).sqrt(),
        analytic_survival: probs.postselection.powi(cfg.cycles as i32),
        cycle_probabilities: probs,
        electron_histogram: hist,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub cycles: usize,
    pub probability: f64,
    /// Zero for the analytic interrogation curve.
    pub std_error: f64,
    pub analytic: f64,
}

/// Survival probability against N: closed form for the interrogation model,
/// Monte Carlo (with standard error) for the protocol-faithful model.
pub fn survival_curve(cfg: &ZenoConfig, n_values: &[usize]) -> Result<Vec<SurvivalPoint>> {
    if n_values.is_empty() {
        return Err(Error::Parameter("survival curve needs at least one N".into()));
    }
    n_values
        .iter()
        .map(|&n| {
            let c = ZenoConfig { cycles: n, ..*cfg };
            let analytic = analytic_survival(&c)?;
            match cfg.model {
                ZenoModel::Interrogation => {
                    Ok(SurvivalPoint { cycles: n, probability: analytic, std_error: 0.0, analytic })
                }
                ZenoModel::ProtocolFaithful => {
                    let mc = monte_carlo(&c)?;
                    Ok(SurvivalPoint {
                        cycles: n,
                        probability: mc.survival_frequency,
                        std_error: mc.survival_std_error,
                        analytic,
                    })
                }
            }
        })
        .collect()
}

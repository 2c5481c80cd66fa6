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

//! The experiment commands. Each one turns a resolved configuration into
//! named scalars, series and notes.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde_json::Value;

use super::config::{self, CommandName, ExperimentConfig, ObservableName};
use super::output::{Cell, Series};
use super::CliError;
use crate::cavity::{self, InteractionMode};
use crate::error::Result as LibResult;
use crate::hilbert::{BasisSpec, Operator};
use crate::protocol::{self, Arm, PostSelectionConvention};
use crate::weakvalues::{
    analytic_readout, pointer_readout, self_canceling_pair, von_neumann_couple, weak_value, PrePostEnsemble,
    WeakValueOrdering,
};
use crate::zeno::{self, ZenoConfig, ZenoModel};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub scalars: BTreeMap<String, f64>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

pub fn observable(name: ObservableName, basis: &BasisSpec) -> LibResult<Operator> {
    let pn = |arm, n| protocol::arm_projector(arm, basis)?.compose(&protocol::number_projector(n, basis)?);
    match name {
        ObservableName::PiI => protocol::arm_projector(Arm::I, basis),
        ObservableName::PiIi => protocol::arm_projector(Arm::II, basis),
        ObservableName::HI => protocol::arm_hamiltonian(Arm::I, basis),
        ObservableName::HIi => protocol::arm_hamiltonian(Arm::II, basis),
        ObservableName::Identity => Ok(Operator::identity(basis.clone())),
        ObservableName::FieldH => protocol::field_hamiltonian(basis),
        ObservableName::PiIN0 => pn(Arm::I, 0),
        ObservableName::PiIN1 => pn(Arm::I, 1),
        ObservableName::PiIiN0 => pn(Arm::II, 0),
        ObservableName::PiIiN1 => pn(Arm::II, 1),
    }
}

pub fn run_command(cmd: CommandName, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cmd {
        CommandName::Weakvals => cmd_weakvals(cfg),
        CommandName::Pointer => cmd_pointer(cfg),
        CommandName::Zeno => cmd_zeno(cfg),
        CommandName::Cavity => cmd_cavity(cfg),
        CommandName::Sweep => cmd_sweep(cfg),
    }
}

/// Columns: operator, re, im, numerator_re, numerator_im, overlap_re, overlap_im.
pub fn cmd_weakvals(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let w = &cfg.weakvals;
    let e = PrePostEnsemble::protocol(w.convention, w.fock_dim)?;
    let basis = e.pre().basis().clone();
    let mut out = Outcome::default();
    let mut series = Series::new(
        "weak_values",
        &["operator", "re", "im", "numerator_re", "numerator_im", "overlap_re", "overlap_im"],
    );
    let quadruple = [
        (ObservableName::PiI, "pi_I"),
        (ObservableName::HI, "h_I"),
        (ObservableName::PiIi, "pi_II"),
        (ObservableName::HIi, "h_II"),
    ];
    let mut push = |name: &str, r: &crate::weakvalues::WeakValueResult| {
        series.push(vec![
            name.into(),
            r.value.re.into(),
            r.value.im.into(),
            r.numerator.re.into(),
            r.numerator.im.into(),
            r.overlap.re.into(),
            r.overlap.im.into(),
        ]);
    };
    let mut max_imag: f64 = 0.0;
    for (obs, key) in quadruple {
        let r = weak_value(&observable(obs, &basis)?, &e, w.ordering)?;
        push(obs.as_str(), &r);
        out.scalars.insert(key.into(), r.value.re);
        max_imag = max_imag.max(r.value.im.abs());
    }
    let (n0, n1) = self_canceling_pair(&e, w.ordering)?;
    push("pi-ii-n0", &n0);
    push("pi-ii-n1", &n1);
    out.scalars.insert("pair_n0".into(), n0.value.re);
    out.scalars.insert("pair_n1".into(), n1.value.re);
    out.scalars.insert("pair_sum".into(), (n0.value + n1.value).re);
    max_imag = max_imag.max(n0.value.im.abs()).max(n1.value.im.abs());
    for &obs in &w.operators {
        let r = weak_value(&observable(obs, &basis)?, &e, w.ordering)?;
        push(obs.as_str(), &r);
        out.scalars.insert(format!("wv.{obs}"), r.value.re);
        max_imag = max_imag.max(r.value.im.abs());
    }
    out.scalars.insert("max_imag".into(), max_imag);
    out.scalars.insert("postselection_probability".into(), e.postselection_probability());
    out.series.push(series);
    if w.convention == PostSelectionConvention::Literal {
        out.notes.push(
            "literal post-selected state |0>|I> + (|0> - |1>)|II> gives h_II = -1; \
             the claim-consistent state (arm-II signs flipped) gives h_II = +1"
                .into(),
        );
    }
    if w.ordering == WeakValueOrdering::PreApost {
        out.notes.push("weak values use <pre|A|post>/<pre|post>; conjugate of the standard ordering".into());
    }
    Ok(out)
}

/// Columns: g, mean, variance, postselection_probability, predicted_mean,
/// deviation, analytic_mean, analytic_variance.
pub fn cmd_pointer(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = &cfg.pointer;
    if p.g_values.is_empty() {
        return Err(CliError::Config("pointer.g_values must not be empty".into()));
    }
    let e = PrePostEnsemble::protocol(p.convention, p.fock_dim)?;
    let a = observable(p.operator, e.pre().basis())?;
    let aw = weak_value(&a, &e, WeakValueOrdering::PostApre)?.value;
    let mut out = Outcome::default();
    out.scalars.insert("weak_value_re".into(), aw.re);
    out.scalars.insert("weak_value_im".into(), aw.im);
    let mut series = Series::new(
        "pointer",
        &[
            "g",
            "mean",
            "variance",
            "postselection_probability",
            "predicted_mean",
            "deviation",
            "analytic_mean",
            "analytic_variance",
        ],
    );
    let mut deviations = Vec::with_capacity(p.g_values.len());
    for &g in &p.g_values {
        let pc = p.pointer(g);
        let r = pointer_readout(&von_neumann_couple(e.pre(), &a, &pc)?, e.post())?;
        let exact = analytic_readout(e.pre(), &a, e.post(), &pc)?;
        let predicted = g * aw.re;
        deviations.push((g, r.mean - predicted));
        series.push(vec![
            g.into(),
            r.mean.into(),
            r.variance.into(),
            r.postselection_probability.into(),
            predicted.into(),
            (r.mean - predicted).into(),
            exact.mean.into(),
            exact.variance.into(),
        ]);
    }
    let mut k = 0;
    for w in deviations.windows(2) {
        let ((g0, d0), (g1, d1)) = (w[0], w[1]);
        if g0 != 0.0 && (g1 / g0 - 0.5).abs() < 1e-12 {
            out.scalars.insert(format!("halving_ratio_{k}"), d0.abs() / d1.abs());
            k += 1;
        }
    }
    out.series.push(series);
    Ok(out)
}

fn zeno_config(cfg: &ExperimentConfig) -> Result<ZenoConfig, CliError> {
    let seed = cfg.seed.ok_or_else(|| {
        CliError::Config("zeno is a Monte Carlo command: a seed is required (--seed or `seed`)".into())
    })?;
    let z = &cfg.zeno;
    Ok(ZenoConfig {
        cycles: z.cycles,
        model: z.model,
        convention: z.convention,
        interaction_dt: z.interaction_dt,
        seed,
        runs: z.runs,
        cavity: cfg.cavity.cavity(),
    })
}

/// Series `survival_curve` (cycles, probability, std_error, analytic) and
/// `electron_histogram` (electrons, runs).
pub fn cmd_zeno(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let zc = zeno_config(cfg)?;
    let mc = zeno::monte_carlo(&zc)?;
    let mut out = Outcome::default();
    let s = &mut out.scalars;
    s.insert("runs".into(), mc.runs as f64);
    s.insert("cycles".into(), mc.cycles as f64);
    s.insert("mean_electrons".into(), mc.mean_electrons);
    s.insert("electron_variance".into(), mc.electron_variance);
    s.insert("survival_frequency".into(), mc.survival_frequency);
    s.insert("survival_std_error".into(), mc.survival_std_error);
    s.insert("survival_ci95_low".into(), mc.survival_ci95[0]);
    s.insert("survival_ci95_high".into(), mc.survival_ci95[1]);
    s.insert("analytic_survival".into(), mc.analytic_survival);
    s.insert("postselection_frequency".into(), mc.postselection_frequency);
    s.insert("postselection_std_error".into(), mc.postselection_std_error);
    s.insert("cycle_postselection_probability".into(), mc.cycle_probabilities.postselection);
    s.insert("cycle_emission_probability".into(), mc.cycle_probabilities.emission_given_postselection);

    if !cfg.zeno.n_values.is_empty() {
        let mut curve = Series::new("survival_curve", &["cycles", "probability", "std_error", "analytic"]);
        for p in zeno::survival_curve(&zc, &cfg.zeno.n_values)? {
            curve.push(vec![p.cycles.into(), p.probability.into(), p.std_error.into(), p.analytic.into()]);
        }
        out.series.push(curve);
    }
    let mut hist = Series::new("electron_histogram", &["electrons", "runs"]);
    for (k, n) in mc.electron_histogram.iter().enumerate() {
        hist.push(vec![k.into(), (*n).into()]);
    }
    out.series.push(hist);
    if zc.model == ZenoModel::ProtocolFaithful {
        out.notes.push(format!(
            "protocol-faithful cycles post-select with probability {:.6} each; \
             the interrogation model is the near-unity Zeno abstraction",
            mc.cycle_probabilities.postselection
        ));
    }
    Ok(out)
}

/// Series `emission`: dt, photon_transition_probability,
/// emission_probability, first_order_photon, first_order_emission, norm.
pub fn cmd_cavity(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let c = cfg.cavity.cavity();
    c.validate()?;
    let basis = c.basis()?;
    let left = cavity::build_left_state(&c, &basis)?;
    let mut out = Outcome::default();
    let k = c.coupling();
    let ke = c.electron_coupling();
    out.scalars.insert("kappa".into(), k);
    out.scalars.insert("kappa_electron".into(), ke);
    match cavity::apply_interaction(&left, &c, InteractionMode::Literal) {
        Ok(lit) => {
            out.scalars.insert("literal_amplitude_re".into(), lit.amplitude.re);
            out.scalars.insert("literal_amplitude_im".into(), lit.amplitude.im);
            out.scalars.insert("literal_amplitude_abs".into(), lit.amplitude.norm());
            if let Some(n) = lit.regenerated.and_then(|r| r.photon_occupation()) {
                out.scalars.insert("literal_photon_occupation".into(), n as f64);
            }
        }
        Err(crate::Error::Degenerate(msg)) => out.notes.push(format!("literal mode: {msg}")),
        Err(e) => return Err(e.into()),
    }
    let mut series = Series::new(
        "emission",
        &[
            "dt",
            "photon_transition_probability",
            "emission_probability",
            "first_order_photon",
            "first_order_emission",
            "norm",
        ],
    );
    for &dt in &cfg.cavity.dt_values {
        let o = cavity::apply_interaction(&left, &c, InteractionMode::FirstOrderUnitary { dt })?;
        let norm = o.evolved.as_ref().map(|s| s.norm()).unwrap_or(f64::NAN);
        series.push(vec![
            dt.into(),
            o.transition_probability.unwrap_or(f64::NAN).into(),
            o.emission_probability.unwrap_or(f64::NAN).into(),
            (k * k * dt * dt).into(),
            (k * k * ke * ke * dt.powi(4)).into(),
            norm.into(),
        ]);
    }
    out.series.push(series);
    Ok(out)
}

fn cell_of(v: &Value) -> Cell {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Cell::Int(i),
            None => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => Cell::Text(s.clone()),
        other => Cell::Text(other.to_string()),
    }
}

fn grid_points(grid: &BTreeMap<String, Vec<Value>>) -> Vec<Vec<(&str, &Value)>> {
    let mut points: Vec<Vec<(&str, &Value)>> = vec![Vec::new()];
    for (k, values) in grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((k.as_str(), v));
                    q
                })
            })
            .collect();
    }
    points
}

/// Exit code of the first failed row, if any.
pub fn sweep_failure(out: &Outcome) -> Option<i32> {
    let s = out.series.first()?;
    let col = s.column("exit_code")?;
    s.rows.iter().find_map(|r| match r[col] {
        Cell::Int(c) if c != 0 => Some(c as i32),
        _ => None,
    })
}

/// One row per grid point: the grid keys, status, exit_code, then every
/// scalar the swept command produced (sorted by name).
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    if sw.command == CommandName::Sweep {
        return Err(CliError::Config("sweep cannot sweep itself".into()));
    }
    if sw.grid.is_empty() || sw.grid.values().any(|v| v.is_empty()) {
        return Err(CliError::Config("sweep.grid needs at least one key, each with at least one value".into()));
    }
    let mut base = config::to_value(cfg);
    base.as_object_mut().expect("config is a table").remove("sweep");
    let points = grid_points(&sw.grid);

    let results: Vec<Result<Outcome, CliError>> = points
        .par_iter()
        .map(|point| {
            let mut v = base.clone();
            for (k, val) in point {
                let path = if k.contains('.') { k.to_string() } else { format!("{}.{k}", sw.command.as_str()) };
                config::set_path(&mut v, &path, (*val).clone())?;
            }
            let row_cfg = config::from_value(v)?;
            run_command(sw.command, &row_cfg)
        })
        .collect();

    let scalar_names: BTreeSet<&String> =
        results.iter().filter_map(|r| r.as_ref().ok()).flat_map(|o| o.scalars.keys()).collect();
    let mut columns: Vec<&str> = sw.grid.keys().map(String::as_str).collect();
    columns.extend(["status", "exit_code"]);
    columns.extend(scalar_names.iter().map(|s| s.as_str()));
    let mut series = Series::new("sweep", &columns);
    let mut out = Outcome::default();
    let mut failed = 0usize;
    for (point, res) in points.iter().zip(&results) {
        let mut row: Vec<Cell> = point.iter().map(|(_, v)| cell_of(v)).collect();
        match res {
            Ok(o) => {
                row.push("ok".into());
                row.push(Cell::Int(0));
                for name in &scalar_names {
                    row.push(o.scalars.get(*name).map(|v| Cell::Num(*v)).unwrap_or(Cell::Empty));
                }
            }
            Err(e) => {
                failed += 1;
                row.push(format!("error: {e}").into());
                row.push(Cell::Int(e.exit_code() as i64));
                row.extend(scalar_names.iter().map(|_| Cell::Empty));
            }
        }
        series.push(row);
    }
    out.scalars.insert("rows".into(), points.len() as f64);
    out.scalars.insert("failed_rows".into(), failed as f64);
    out.series.push(series);
    Ok(out)
}

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

//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cfpe::cavity::{self, CavityConfig, InteractionMode};
use cfpe::hilbert::{level_projector, BasisSpec, Operator, StateVector, C64};
use cfpe::protocol::{self, Arm, PostSelectionConvention};
use cfpe::weakvalues::{
    pointer_readout, self_canceling_pair, von_neumann_couple, weak_value, PointerConfig, PrePostEnsemble,
    WeakValueOrdering,
};
use cfpe::zeno::{analytic_survival, monte_carlo, ZenoConfig, ZenoModel};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn lib<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn arm_quadruple(conv: PostSelectionConvention) -> Result<[C64; 4], String> {
    let e = lib(PrePostEnsemble::protocol(conv, 2))?;
    let b = e.pre().basis().clone();
    let ops = [
        lib(protocol::arm_projector(Arm::I, &b))?,
        lib(protocol::arm_hamiltonian(Arm::I, &b))?,
        lib(protocol::arm_projector(Arm::II, &b))?,
        lib(protocol::arm_hamiltonian(Arm::II, &b))?,
    ];
    let mut out = [C64::new(0.0, 0.0); 4];
    for (slot, op) in out.iter_mut().zip(&ops) {
        *slot = lib(weak_value(op, &e, WeakValueOrdering::PostApre))?.value;
    }
    Ok(out)
}

fn criterion_1() -> Check {
    let got = arm_quadruple(PostSelectionConvention::ClaimConsistent)?;
    let want = [1.0, 0.5, 0.0, 1.0];
    let dev = got.iter().zip(want).map(|(g, w)| (g - C64::new(w, 0.0)).norm()).fold(0.0, f64::max);
    ensure(dev <= 1e-12, format!("claim-consistent quadruple {got:?}, max deviation {dev:e}"))?;

    let literal = arm_quadruple(PostSelectionConvention::Literal)?;
    let h_ii = literal[3];
    ensure((h_ii - C64::new(-1.0, 0.0)).norm() <= 1e-12, format!("literal H_II weak value {h_ii}, expected -1"))?;

    // The literal discrepancy has to surface as output, not only as a number.
    let (code, _, err) = run_cli(&["weakvals", "--convention", "literal"]);
    ensure(code == 0, format!("weakvals --convention literal exited with {code}"))?;
    ensure(err.contains("note:"), "literal convention run printed no note".into())?;
    Ok(format!("quadruple max deviation {dev:.1e}; literal H_II = {:.3}, noted", h_ii.re))
}

fn criterion_2() -> Check {
    let mut worst = 0.0f64;
    for conv in PostSelectionConvention::ALL {
        let e = lib(PrePostEnsemble::protocol(conv, 2))?;
        let (n0, n1) = lib(self_canceling_pair(&e, WeakValueOrdering::PostApre))?;
        let pii = lib(protocol::arm_projector(Arm::II, e.pre().basis()))?;
        let w = lib(weak_value(&pii, &e, WeakValueOrdering::PostApre))?.value;
        let sum = n0.value + n1.value;
        worst = worst.max(sum.norm()).max((sum - w).norm());
        ensure(
            sum.norm() <= 1e-12 && (sum - w).norm() <= 1e-12,
            format!("{}: pair ({}, {}) sums to {sum}, Π_II weak value {w}", conv.as_str(), n0.value, n1.value),
        )?;
    }
    Ok(format!("pair sums vanish under both conventions, max {worst:.1e}"))
}

fn criterion_3() -> Check {
    let e = lib(PrePostEnsemble::protocol(PostSelectionConvention::ClaimConsistent, 2))?;
    let b = e.pre().basis().clone();
    let observables = [
        ("Π_I", lib(protocol::arm_projector(Arm::I, &b))?),
        ("Π_II", lib(protocol::arm_projector(Arm::II, &b))?),
        ("H_I", lib(protocol::arm_hamiltonian(Arm::I, &b))?),
        ("H_II", lib(protocol::arm_hamiltonian(Arm::II, &b))?),
    ];
    let gs = [0.1, 0.05, 0.025];
    let mut report = Vec::new();
    let mut failures = Vec::new();
    for (name, a) in &observables {
        let w = lib(weak_value(a, &e, WeakValueOrdering::PostApre))?.value.re;
        let mut devs = Vec::new();
        for g in gs {
            let p = PointerConfig::default().with_coupling(g);
            let joint = lib(von_neumann_couple(e.pre(), a, &p))?;
            let r = lib(pointer_readout(&joint, e.post()))?;
            devs.push(r.mean - g * w);
        }
        let ratios = [devs[0] / devs[1], devs[1] / devs[2]];
        let ok = ratios.iter().all(|k| (3.5..=4.5).contains(k));
        let line = format!(
            "{name}: dev {:.2e}/{:.2e}/{:.2e} ratios {:.3}/{:.3}",
            devs[0], devs[1], devs[2], ratios[0], ratios[1]
        );
        if !ok {
            failures.push(line.clone());
        }
        report.push(line);
    }
    if failures.is_empty() {
        Ok(report.join("; "))
    } else {
        Err(format!("halving ratio outside [3.5, 4.5]: {}", report.join("; ")))
    }
}

// Scaling-and-squaring Taylor exponential of −i·H·t.
fn expm_oracle(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let n = h.nrows();
    let a = h * C64::new(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = a / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

// H_tot on (photon, electron) with two levels each, built by hand.
fn hand_hamiltonian(c: &CavityConfig) -> DMatrix<C64> {
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let pref = (2.0 * PI / (c.length.powi(3) * c.omega)).sqrt();
    let k = pref * dot(&c.polarization, &c.photon_momentum);
    let ke = pref * dot(&c.electron_polarization, &c.electron_momentum);
    let ph = dot(&c.photon_momentum, &c.position);
    let pe = dot(&c.electron_momentum, &c.position);
    let mut h = DMatrix::<C64>::zeros(4, 4);
    for e in 0..2 {
        // ⟨0|a e^{iφ}|1⟩ and ⟨1|a† e^{−iφ}|0⟩ on the photon factor.
        h[(e, 2 + e)] = C64::from_polar(k, ph);
        h[(2 + e, e)] = C64::from_polar(k, -ph);
    }
    for p in 0..2 {
        h[(2 * p, 2 * p + 1)] += C64::from_polar(ke, pe);
        h[(2 * p + 1, 2 * p)] += C64::from_polar(ke, -pe);
    }
    h
}

fn criterion_4() -> Check {
    let s = 1.0 / 3f64.sqrt();
    let configs = [
        CavityConfig::default(),
        CavityConfig {
            length: 2.0,
            omega: 3.0,
            photon_momentum: [0.3, 1.2, -0.7],
            polarization: [0.0, 0.6, 0.8],
            ..Default::default()
        },
        CavityConfig {
            length: 0.7,
            omega: 0.4,
            photon_momentum: [2.0, -1.0, 0.5],
            polarization: [s, s, s],
            position: [0.2, -0.4, 1.1],
            ..Default::default()
        },
    ];
    let mut worst_amp = 0.0f64;
    let mut worst_rel = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for c in &configs {
        let b = lib(c.basis())?;
        let left = lib(cavity::build_left_state(c, &b))?;
        let out = lib(cavity::apply_interaction(&left, c, InteractionMode::Literal))?;
        let dot = c.polarization.iter().zip(&c.photon_momentum).map(|(x, y)| x * y).sum::<f64>();
        let hand = (2.0 * PI / (c.length.powi(3) * c.omega)).sqrt() * dot;
        let d = (out.amplitude.norm() - hand.abs()).abs();
        worst_amp = worst_amp.max(d);
        ensure(d <= 1e-12, format!("literal amplitude {} against hand value {hand}", out.amplitude.norm()))?;
        ensure(
            out.regenerated.as_ref().and_then(|r| r.photon_occupation()) == Some(1),
            "literal mode did not regenerate photon occupation 1".into(),
        )?;

        let h = hand_hamiltonian(c);
        let k_eff = c.effective_coupling();
        for kdt in [1e-4, 1e-3, 4e-3, 1e-2] {
            let dt = kdt / k_eff;
            let p = lib(cavity::photon_transition_probability(c, dt))?;
            let u = expm_oracle(&h, dt);
            // photon level 1: indices 2 and 3
            let oracle = u[(2, 0)].norm_sqr() + u[(3, 0)].norm_sqr();
            let rel = (p - k_eff * k_eff * dt * dt).abs() / (k_eff * k_eff * dt * dt);
            worst_rel = worst_rel.max(rel);
            worst_oracle = worst_oracle.max((p - oracle).abs() / oracle);
            ensure(rel <= 0.01, format!("κ·dt = {kdt}: transition {p} against κ²dt² {}", k_eff * k_eff * dt * dt))?;
            ensure(
                (p - oracle).abs() <= 1e-9 * oracle,
                format!("κ·dt = {kdt}: transition {p} against oracle {oracle}"),
            )?;
        }
    }
    Ok(format!("amplitude error {worst_amp:.1e}; κ²dt² rel error {worst_rel:.1e}; oracle rel error {worst_oracle:.1e}"))
}

fn criterion_5() -> Check {
    let interrogation = |n: usize, runs: usize, seed: u64| ZenoConfig {
        cycles: n,
        model: ZenoModel::Interrogation,
        runs,
        seed,
        ..Default::default()
    };
    let closed = |n: usize| (PI / (2.0 * n as f64)).cos().powi(2).powi(n as i32);

    let mut prev = 0.0;
    for n in 1..=1000 {
        let a = lib(analytic_survival(&interrogation(n, 1, 0)))?;
        ensure((a - closed(n)).abs() <= 1e-12, format!("N = {n}: analytic {a} against {}", closed(n)))?;
        ensure(a > prev, format!("survival not increasing at N = {n}: {a} after {prev}"))?;
        prev = a;
    }

    let mut zs = Vec::new();
    for (n, seed) in [(2, 11), (10, 12), (100, 13)] {
        let m = lib(monte_carlo(&interrogation(n, 100_000, seed)))?;
        let p = closed(n);
        let se = (p * (1.0 - p) / m.runs as f64).sqrt();
        let z = (m.survival_frequency - p) / se;
        zs.push(format!("N={n} z={z:+.2}"));
        ensure(z.abs() <= 3.0, format!("N = {n}: frequency {} against {p}, {z:.2} SE", m.survival_frequency))?;
    }

    let pf = ZenoConfig {
        cycles: 1,
        model: ZenoModel::ProtocolFaithful,
        convention: PostSelectionConvention::ClaimConsistent,
        interaction_dt: 0.0,
        runs: 1_000_000,
        seed: 14,
        ..Default::default()
    };
    let m = lib(monte_carlo(&pf))?;
    let p = 1.0 / 9.0;
    let se = (p * (1.0 - p) / m.attempts as f64).sqrt();
    let z = (m.postselection_frequency - p) / se;
    ensure(z.abs() <= 3.0, format!("per-cycle frequency {} against 1/9, {z:.2} SE", m.postselection_frequency))?;
    Ok(format!("closed form and monotone for N ≤ 1000; {}; 1/9 z={z:+.2}", zs.join(", ")))
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["cfpe"];
    full.extend_from_slice(args);
    let code = cfpe::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn result_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in lib(std::fs::read_dir(dir))? {
        let path = lib(entry)?.path();
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if !name.ends_with(".meta.json") {
            files.push((name, lib(std::fs::read(&path))?));
        }
    }
    files.sort();
    Ok(files)
}

fn criterion_6() -> Check {
    let jobs: [&[&str]; 3] = [
        &["--seed", "7", "--format", "csv", "zeno", "--cycles", "20", "--runs", "20000", "--n-values", "1,5,20"],
        &[
            "--seed",
            "7",
            "--format",
            "json",
            "zeno",
            "--model",
            "protocol-faithful",
            "--cycles",
            "3",
            "--runs",
            "20000",
            "--dt",
            "0.05",
        ],
        &["--seed", "9", "--preset", "zeno-recycling", "--format", "csv", "zeno", "--runs", "20000"],
    ];
    let mut compared = 0;
    for job in jobs {
        let mut outputs = Vec::new();
        for threads in [1, 4, 4] {
            let dir = lib(tempfile::tempdir())?;
            let out = dir.path().to_string_lossy().into_owned();
            let mut args = vec!["--out", out.as_str()];
            args.extend_from_slice(job);
            let pool = lib(rayon::ThreadPoolBuilder::new().num_threads(threads).build())?;
            let (code, _, err) = pool.install(|| run_cli(&args));
            ensure(code == 0, format!("{job:?} exited with {code}: {err}"))?;
            outputs.push(result_files(dir.path())?);
        }
        ensure(!outputs[0].is_empty(), format!("{job:?} wrote no files"))?;
        for other in &outputs[1..] {
            ensure(other == &outputs[0], format!("{job:?}: outputs differ between reruns"))?;
        }
        compared += outputs[0].len();
    }
    Ok(format!("{compared} result files byte-identical across 1 and 4 threads and reruns"))
}

fn random_state(rng: &mut ChaCha8Rng, b: &BasisSpec) -> Result<StateVector, String> {
    let amps = (0..b.dim()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    lib(StateVector::new(b.clone(), amps))
}

fn random_hermitian(rng: &mut ChaCha8Rng, b: &BasisSpec) -> Result<Operator, String> {
    let n = b.dim();
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    lib(Operator::new(b.clone(), (&m + m.adjoint()) * C64::new(0.5, 0.0)))
}

fn exact_projector(name: &str, p: &Operator) -> Result<(), String> {
    let sq = lib(p.compose(p))?;
    ensure(sq.matrix() == p.matrix(), format!("{name} is not idempotent"))?;
    ensure(&p.matrix().adjoint() == p.matrix(), format!("{name} is not Hermitian"))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_261_019);
    let mut projectors = 0;
    for d in 2..=5 {
        let sys = lib(protocol::system_basis(d))?;
        let full = lib(protocol::full_basis(d))?;
        for b in [&sys, &full] {
            let mut list = Vec::new();
            for arm in [Arm::I, Arm::II] {
                list.push((format!("Π_{arm:?}"), lib(protocol::arm_projector(arm, b))?));
            }
            for n in 0..d {
                let pn = lib(protocol::number_projector(n, b))?;
                let pii = lib(protocol::arm_projector(Arm::II, b))?;
                list.push((format!("Π_II·Π_{n}"), lib(pii.compose(&pn))?));
                list.push((format!("Π_{n}"), pn));
                list.push((
                    format!("level {n}"),
                    lib(Operator::local(b, protocol::PHOTON, &lib(level_projector(d, n))?))?,
                ));
            }
            for (name, p) in &list {
                exact_projector(&format!("{name} on {b}"), p)?;
                projectors += 1;
            }
        }
    }

    let mut unitaries = 0;
    for _ in 0..200 {
        let d = rng.gen_range(2..=4);
        let b = lib(protocol::system_basis(d))?;
        let bs = lib(protocol::beam_splitter(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI), &b))?;
        let ps = lib(protocol::phase_shifter(rng.gen_range(0.0..2.0 * PI), &b))?;
        let c = CavityConfig {
            fock_dim: d,
            length: rng.gen_range(0.5..2.0),
            omega: rng.gen_range(0.5..2.0),
            ..Default::default()
        };
        let u = lib(cavity::evolution(&c, &lib(c.basis())?, rng.gen_range(0.0..3.0)))?;
        for (name, op) in [("beam splitter", &bs), ("phase shifter", &ps), ("cavity evolution", &u)] {
            ensure(op.is_unitary(1e-12), format!("{name} not unitary to 1e-12"))?;
            unitaries += 1;
        }
    }

    let mut worst_norm = 0.0f64;
    let mut worst_lin = 0.0f64;
    let mut ensembles = 0;
    while ensembles < 1000 {
        let d = rng.gen_range(2..=3);
        let b = if rng.gen_bool(0.5) { lib(protocol::system_basis(d))? } else { lib(protocol::full_basis(d))? };
        let pre = random_state(&mut rng, &b)?;
        let post = random_state(&mut rng, &b)?;
        let e = lib(PrePostEnsemble::new(&pre, &post))?;
        if e.postselection_probability() < 1e-3 {
            continue;
        }
        ensembles += 1;
        let a = random_hermitian(&mut rng, &b)?;
        let bb = random_hermitian(&mut rng, &b)?;
        let alpha = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let beta = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let c1 = C64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(0.0..2.0 * PI));
        let c2 = C64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(0.0..2.0 * PI));
        let scaled = lib(PrePostEnsemble::new(&pre.scale(c1), &post.scale(c2)))?;
        for ordering in [WeakValueOrdering::PostApre, WeakValueOrdering::PreApost] {
            let wa = lib(weak_value(&a, &e, ordering))?.value;
            let wb = lib(weak_value(&bb, &e, ordering))?.value;
            let ws = lib(weak_value(&a, &scaled, ordering))?.value;
            let scale = 1.0 + wa.norm();
            let dn = (ws - wa).norm() / scale;
            worst_norm = worst_norm.max(dn);
            ensure(dn <= 1e-12, format!("normalization changed weak value {wa} to {ws}"))?;

            let combo = lib(a.scale(alpha).add(&bb.scale(beta)))?;
            let wc = lib(weak_value(&combo, &e, ordering))?.value;
            let expect = alpha * wa + beta * wb;
            let dl = (wc - expect).norm() / (1.0 + alpha.norm() * wa.norm() + beta.norm() * wb.norm());
            worst_lin = worst_lin.max(dl);
            ensure(dl <= 1e-12, format!("linearity: {wc} against {expect}"))?;
        }
    }
    Ok(format!(
        "{projectors} projectors exact, {unitaries} optical elements unitary, {ensembles} ensembles: normalization {worst_norm:.1e}, linearity {worst_lin:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("weak-value quadruple", criterion_1),
        ("self-canceling pair", criterion_2),
        ("pointer law", criterion_3),
        ("cavity transition", criterion_4),
        ("Zeno limit", criterion_5),
        ("determinism", criterion_6),
        ("structural properties", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}, {secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}, {secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

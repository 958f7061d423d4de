//! One pipeline per subcommand.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rst_core::estimate::{
    current_correlation, density_profile, dos, esr_spectrum, estimate_trace, ldos, specific_heat, thermal_expectation,
    OperatorTraces,
};
use rst_core::fidelity::{
    average_fidelity, entanglement_fidelity, fourth_moment_check, mc_average_fidelity, KrausChannel,
};
use rst_core::io::{self, ThermalRow};
use rst_core::xeb::{sample_from_state, score, uniform_sample};
use rst_core::{Exec, Operator, RandomStateKind, SeedSpec, StateVector};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::CliError;
use crate::model::{self, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dos,
    Ldos,
    Thermal,
    SpecificHeat,
    CurrentCorr,
    DensityProfile,
    Esr,
    Xeb(XebAction),
    Fidelity,
    Trace,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XebAction {
    SelfTest,
    Score,
    Sample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dos => "dos",
            Command::Ldos => "ldos",
            Command::Thermal => "thermal",
            Command::SpecificHeat => "specific-heat",
            Command::CurrentCorr => "current-corr",
            Command::DensityProfile => "density-profile",
            Command::Esr => "esr",
            Command::Xeb(_) => "xeb",
            Command::Fidelity => "fidelity",
            Command::Trace => "trace",
            Command::Selftest => "selftest",
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Command::Xeb(XebAction::Sample) => "txt",
            Command::Xeb(_) | Command::Fidelity | Command::Trace => "json",
            _ => "csv",
        }
    }
}

/// What a pipeline produced: the artifact text and lines for stdout.
struct Artifact {
    text: String,
    summary: Vec<String>,
}

impl Artifact {
    fn quiet(text: String) -> Self {
        Artifact { text, summary: Vec::new() }
    }
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

/// Runs `cmd`, writes the artifact and its sidecar, and returns the exit status
/// of the checks it performed.
pub fn execute(cmd: Command, cfg: &Config, exec: Exec, threads: usize) -> Result<bool, CliError> {
    let start = Instant::now();
    if cmd == Command::Selftest {
        return selftest(cfg, exec);
    }
    let output = PathBuf::from(cfg.raw("output", &format!("{}.{}", cmd.name().replace('-', "_"), cmd.extension())));
    let sidecar = cfg.raw("provenance", "auto");
    let (artifact, ok) = match cmd {
        Command::Dos => (run_dos(cfg, exec)?, true),
        Command::Ldos => (run_ldos(cfg, exec)?, true),
        Command::Thermal => (run_thermal(cfg, exec)?, true),
        Command::SpecificHeat => (run_specific_heat(cfg, exec)?, true),
        Command::CurrentCorr => (run_current_corr(cfg, exec)?, true),
        Command::DensityProfile => (run_density_profile(cfg, exec)?, true),
        Command::Esr => (run_esr(cfg, exec)?, true),
        Command::Xeb(action) => run_xeb(action, cfg, exec)?,
        Command::Fidelity => (run_fidelity(cfg, exec)?, true),
        Command::Trace => (run_trace(cfg, exec)?, true),
        Command::Selftest => unreachable!(),
    };
    for k in cfg.unused() {
        warn(&format!("key `{k}` is not used by `{}`", cmd.name()));
    }
    if output == Path::new("-") {
        print!("{}", artifact.text);
    } else {
        io::write_text(&output, &artifact.text)?;
        for line in &artifact.summary {
            println!("{line}");
        }
    }
    if sidecar != "none" && output != Path::new("-") {
        let path = if sidecar == "auto" { output.with_extension("provenance.json") } else { PathBuf::from(&sidecar) };
        let record = json!({
            "command": cmd.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg.resolved(),
            "seed": cfg.resolved().get("seed"),
            "stream": cfg.resolved().get("stream"),
            "threads": threads,
            "wall_time_s": start.elapsed().as_secs_f64(),
            "output": output.display().to_string(),
        });
        io::write_text(&path, &json_text(&record))?;
    }
    Ok(ok)
}

fn run_dos(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Lattice)?;
    let params = model::spectrum(cfg, m.h.norm_bound_1())?;
    let r = dos(&m.h, &params, &model::sampling(cfg, 1)?, exec)?;
    Ok(Artifact {
        summary: vec![format!("dim={} rows={} integral={:.6}", m.h.dim(), r.values.len(), r.integral())],
        text: io::spectrum_csv(&r)?,
    })
}

fn run_ldos(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Lattice)?;
    let params = model::spectrum(cfg, m.h.norm_bound_1())?;
    let psi = StateVector::basis(m.h.dim(), cfg.get("site", 0usize)?)?;
    Ok(Artifact::quiet(io::spectrum_csv(&ldos(&m.h, &psi, &params, exec)?)?))
}

fn header_only_warning(betas: &[f64]) {
    if betas.is_empty() {
        warn("the inverse-temperature grid is empty; writing a header-only file");
    }
}

fn run_thermal(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Spin)?;
    let (name, op) = m.observable(cfg, "energy")?;
    let params = model::thermal(cfg, 10)?;
    let betas = model::beta_grid(cfg)?;
    header_only_warning(&betas);
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in &betas {
        let y: &dyn Operator = match &op {
            Some(o) => o,
            None => &m.h,
        };
        let e = thermal_expectation(&m.h, y, beta, &params, exec)?;
        let temperature = if beta > 0.0 { 1.0 / beta } else { f64::INFINITY };
        rows.push(ThermalRow { beta, temperature, observable: name.clone(), value: e.value.re, stderr: e.stderr });
    }
    Ok(Artifact::quiet(io::thermal_rows_csv(&rows)?))
}

fn run_specific_heat(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Spin)?;
    let params = model::thermal(cfg, 10)?;
    let betas = model::beta_grid(cfg)?;
    header_only_warning(&betas);
    let series = specific_heat(&m.h, &betas, m.sites, None, &params, exec)?;
    Ok(Artifact::quiet(io::thermal_csv(&series)?))
}

fn run_current_corr(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Spin)?;
    let (_, op) = m.observable(cfg, "current")?;
    let op = op.ok_or_else(|| CliError::Config("observable: the Hamiltonian is conserved".into()))?;
    let prop = model::propagation(cfg)?;
    let grid = model::time_grid(cfg, &m.h, &prop)?;
    let beta = cfg.get("beta", 0.0)?;
    let c = current_correlation(&m.h, &op, beta, grid, &model::sampling(cfg, 10)?, &prop, exec)?;
    Ok(Artifact::quiet(io::correlation_csv(&c)?))
}

fn run_density_profile(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Spin)?;
    let prop = model::propagation(cfg)?;
    let grid = model::time_grid(cfg, &m.h, &prop)?;
    let p = density_profile(&m.h, cfg.get("source", 0usize)?, grid, &model::sampling(cfg, 10)?, &prop, exec)?;
    Ok(Artifact::quiet(io::density_csv(&p)?))
}

fn run_esr(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Spin)?;
    let params = model::spectrum(cfg, 2.0 * m.h.norm_bound_1())?;
    let r = esr_spectrum(&m.h, cfg.get("beta", 0.0)?, &params, &model::sampling(cfg, 1)?, exec)?;
    Ok(Artifact { summary: vec![format!("peak={:.6}", r.omega[r.peak_index()].abs())], text: io::spectrum_csv(&r)? })
}

/// Born probabilities of the seeded reference state on `qubits` qubits.
fn reference_state(cfg: &Config, qubits: usize) -> Result<StateVector, CliError> {
    if qubits == 0 || qubits > 30 {
        return Err(CliError::Config(format!("qubits must lie in 1..=30, got {qubits}")));
    }
    let seed = SeedSpec::new(cfg.get("state_seed", 1u64)?, 0);
    Ok(RandomStateKind::GaussianNormalized.generate(1 << qubits, seed)?)
}

fn run_xeb(action: XebAction, cfg: &Config, exec: Exec) -> Result<(Artifact, bool), CliError> {
    let qubits = cfg.get("qubits", 12usize)?;
    let phi = reference_state(cfg, qubits)?;
    let probs = phi.probabilities();
    let shots = cfg.get("shots", 500_000usize)?;
    let seed = model::seed(cfg)?;
    match action {
        XebAction::Sample => {
            let s = sample_from_state(&phi, shots, seed, exec)?;
            Ok((Artifact::quiet(io::bitstrings_to_text(&s)), true))
        }
        XebAction::Score => {
            let path = cfg.raw("bitstrings", "");
            if path.is_empty() {
                return Err(CliError::Config("score needs `bitstrings = <file>`".into()));
            }
            let sample = io::parse_bitstrings(&io::read_text(Path::new(&path))?)?;
            if sample.qubits() != qubits {
                return Err(CliError::Config(format!("file has L={}, configured qubits={qubits}", sample.qubits())));
            }
            let report = score(&probs, &sample)?;
            let text = json_text(&serde_json::to_value(&report).expect("serializable report"));
            Ok((Artifact { summary: report.to_key_values().lines().map(String::from).collect(), text }, true))
        }
        XebAction::SelfTest => {
            let sim = score(&probs, &sample_from_state(&phi, shots, seed, exec)?)?;
            let uni = score(&probs, &uniform_sample(qubits, shots, seed.fork(1), exec)?)?;
            let k = cfg.get("sigmas", 3.0)?;
            let pass_sim = (sim.alpha - 1.0).abs() <= k * sim.alpha_stderr;
            let pass_uni = uni.alpha.abs() <= k * uni.alpha_stderr;
            let summary = vec![
                format!("simulated alpha={:.6} stderr={:.6} {}", sim.alpha, sim.alpha_stderr, verdict(pass_sim)),
                format!("uniform alpha={:.6} stderr={:.6} {}", uni.alpha, uni.alpha_stderr, verdict(pass_uni)),
            ];
            let text = json_text(&json!({ "simulated": sim, "uniform": uni, "pass": pass_sim && pass_uni }));
            Ok((Artifact { text, summary }, pass_sim && pass_uni))
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// A channel file, or `identity:<dim>` / `depolarizing:<p>`.
fn channel(spec: &str) -> Result<KrausChannel, CliError> {
    if let Some(d) = spec.strip_prefix("identity:") {
        let d = d.parse().map_err(|_| CliError::Config(format!("channel: bad dimension {d:?}")))?;
        return Ok(KrausChannel::identity(d)?);
    }
    if let Some(p) = spec.strip_prefix("depolarizing:") {
        let p = p.parse().map_err(|_| CliError::Config(format!("channel: bad probability {p:?}")))?;
        return Ok(KrausChannel::depolarizing_qubit(p)?);
    }
    Ok(io::parse_channel_json(&io::read_text(Path::new(spec))?)?)
}

fn run_fidelity(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let spec = cfg.raw("channel", "");
    if spec.is_empty() {
        return Err(CliError::Config("fidelity needs `channel = <file>`".into()));
    }
    let ch = channel(&spec)?;
    let f_avg = average_fidelity(&ch);
    let trials = cfg.get("trials", 0usize)?;
    let mc = if trials > 0 { Some(mc_average_fidelity(&ch, trials, model::seed(cfg)?, exec)?) } else { None };
    let report = json!({
        "dim": ch.dim(),
        "kraus_operators": ch.operators().len(),
        "trace_preserving": ch.is_trace_preserving(),
        "average_fidelity": f_avg,
        "entanglement_fidelity": entanglement_fidelity(&ch),
        "monte_carlo": mc.map(|(v, e)| json!({ "trials": trials, "value": v, "stderr": e })),
    });
    Ok(Artifact { summary: vec![format!("average_fidelity={f_avg:.12}")], text: json_text(&report) })
}

fn run_trace(cfg: &Config, exec: Exec) -> Result<Artifact, CliError> {
    let m = model::build(cfg, ModelKind::Lattice)?;
    let (name, op) = m.observable(cfg, "energy")?;
    let x: &dyn Operator = match &op {
        Some(o) => o,
        None => &m.h,
    };
    let exact_limit = cfg.get("exact_limit", 4096usize)?;
    let traces = (x.dim() <= exact_limit).then(|| OperatorTraces::by_columns(x));
    let est = estimate_trace(x, &model::sampling(cfg, 10)?, traces.as_ref(), exec)?;
    let report = json!({
        "observable": name,
        "dim": x.dim(),
        "realizations": est.realizations,
        "mode": est.mode.name(),
        "value": [est.value.re, est.value.im],
        "stderr": est.stderr,
        "exact": traces.map(|t| [t.tr_x.re, t.tr_x.im]),
        "predicted_stderr": est.predicted_variance.map(f64::sqrt),
    });
    Ok(Artifact {
        summary: vec![format!("trace={} stderr={}", io::fmt_e(est.value.re), io::fmt_e(est.stderr))],
        text: json_text(&report),
    })
}

/// Quick end-to-end checks against closed forms.
fn selftest(cfg: &Config, exec: Exec) -> Result<bool, CliError> {
    let seed = model::seed(cfg)?;
    let mut checks: Vec<(&str, bool, String)> = Vec::new();

    let d = 256;
    let id = rst_core::ObservableOperator::Diagonal(vec![1.0; d]);
    let s = rst_core::estimate::Sampling::new(RandomStateKind::GaussianNormalized, 4, Default::default(), seed);
    let t = estimate_trace(&id, &s, None, exec)?;
    checks.push(("trace-identity", (t.value.re - d as f64).abs() < 1e-9, format!("{:.12}", t.value.re)));

    let mut chain = Config::default();
    chain.set("sites", "512");
    chain.set("samples", "256");
    chain.set("geometry", "chain");
    let m = model::build(&chain, ModelKind::Lattice)?;
    let r = dos(&m.h, &model::spectrum(&chain, m.h.norm_bound_1())?, &model::sampling(&chain, 1)?, exec)?;
    checks.push(("dos-sum-rule", (r.integral() - 1.0).abs() < 0.01, format!("{:.6}", r.integral())));

    let f = average_fidelity(&KrausChannel::identity(4)?);
    checks.push(("identity-fidelity", (f - 1.0).abs() < 1e-12, format!("{f:.12}")));
    let p = 0.8;
    let f = average_fidelity(&KrausChannel::depolarizing_qubit(p)?);
    let expect = 1.0 - 2.0 * p / 3.0;
    checks.push(("depolarizing-fidelity", (f - expect).abs() < 1e-12, format!("{f:.12}")));

    let fm = fourth_moment_check(4, 4000, seed, exec)?;
    checks.push(("fourth-moments", fm.passes(5.0), format!("{} entries", fm.entries.len())));

    let phi = RandomStateKind::GaussianNormalized.generate(1 << 10, seed)?;
    let rep = score(&phi.probabilities(), &sample_from_state(&phi, 100_000, seed.fork(2), exec)?)?;
    checks.push(("xeb-alpha", (rep.alpha - 1.0).abs() <= 5.0 * rep.alpha_stderr, format!("{:.4}", rep.alpha)));

    let mut ok = true;
    for (name, pass, detail) in &checks {
        println!("selftest {name} {}: {detail}", verdict(*pass));
        ok &= pass;
    }
    Ok(ok)
}

//! Command implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use num_bigint::Sign;
use serde::de::DeserializeOwned;
use serde_json::json;
use srw_core::circuit::{parse_bits, Circuit, CircuitError};
use srw_core::compiler::{compile as compile_circuit, CompileOptions, CompiledInstance};
use srw_core::estimator::{choose_noise, estimate_instance, EstimateOptions, EstimatorError, NoiseModel};
use srw_core::hp;
use srw_core::rewriting::{delta_scaled_with, delta_with, ProblemInstance, RewriteError, Walker};
use srw_core::spectral::{self, MMode, PathSpectrum, SpectralError};
use srw_core::verifier::{self, VerifyError, VerifyOptions};

use crate::output::{decision_code, schema, Clock, CommandResult, Failure, EXIT_NEGATIVE, EXIT_POSITIVE};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let file = File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e: CircuitError| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_bits(bits: &str) -> Result<Vec<bool>, Failure> {
    parse_bits(bits).map_err(|e| Failure::usage(e.to_string()))
}

fn rewrite_failure(e: RewriteError) -> Failure {
    match e {
        RewriteError::VertexBudget(_) | RewriteError::EnumerationLimit(_) => Failure::resource(e.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

pub fn compile(circuit: &Path, input: &str, m_mode: MMode, output: &Path) -> Result<CommandResult, Failure> {
    let mut clock = Clock::new();
    let c = read_circuit(circuit)?;
    let x = read_bits(input)?;
    clock.lap("parse");
    let options = CompileOptions {
        m_mode,
        ..CompileOptions::default()
    };
    let comp = compile_circuit(&c, &x, options).map_err(|e| Failure::resource(e.to_string()))?;
    clock.lap("compile");
    let file = File::create(output).map_err(|e| Failure::resource(format!("{}: {e}", output.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &comp.instance)
        .map_err(|e| Failure::resource(e.to_string()))
        .and_then(|()| w.flush().map_err(|e| Failure::resource(e.to_string())))?;
    clock.lap("write");
    let inst = &comp.instance;
    let outputs = json!({
        "instance": output.display().to_string(),
        "ell": inst.ell,
        "m": inst.m,
        "c": inst.c,
        "epsilon": inst.epsilon,
        "length": inst.len(),
        "d_parity": u8::from(inst.d_parity),
        "block": inst.block,
        "alphabet_size": inst.system.alphabet().len(),
        "window": inst.system.window(),
        "rule_count": inst.system.rule_count(),
        "rule_stats": comp.rule_stats,
        "hadamards": comp.run.hadamards,
        "dummy_hadamards": comp.run.dummy_hadamards,
    });
    Ok(CommandResult {
        schema: schema(),
        command: "compile",
        inputs: json!({
            "circuit": circuit.display().to_string(),
            "input": input,
            "m_mode": m_mode,
        }),
        summary: format!(
            "ℓ = {}, m = {}, L = {}, {} rules",
            inst.ell,
            inst.m,
            inst.len(),
            inst.system.rule_count()
        ),
        outputs,
        timings: clock.finish(),
        passed: true,
        exit_code: EXIT_POSITIVE,
    })
}

pub fn delta(
    instance: &Path,
    steps: Option<usize>,
    scaled: bool,
    c: Option<f64>,
    budget: Option<usize>,
) -> Result<CommandResult, Failure> {
    let mut clock = Clock::new();
    let problem: ProblemInstance = read_json(instance)?;
    let (s, t, tp) = problem.strings().map_err(rewrite_failure)?;
    clock.lap("load");
    let n = steps.unwrap_or(problem.m);
    let mut walker = Walker::new(&problem.system);
    if let Some(b) = budget {
        walker = walker.with_vertex_budget(b);
    }
    let (value, sign) = if scaled {
        let scale = c
            .or(problem.c)
            .ok_or_else(|| Failure::usage("--scaled needs a scale: the instance has no c, pass --c"))?;
        let v = delta_scaled_with(&mut walker, &s, &t, &tp, n, scale).map_err(rewrite_failure)?;
        (json!({ "scaled": v, "c": scale }), (v != 0.0).then_some(v > 0.0))
    } else {
        let v = delta_with(&mut walker, &s, &t, &tp, n).map_err(rewrite_failure)?;
        let positive = match v.sign() {
            Sign::Plus => Some(true),
            Sign::Minus => Some(false),
            Sign::NoSign => None,
        };
        (json!({ "exact": v.to_string() }), positive)
    };
    clock.lap("walk");
    let sign_text = match sign {
        Some(true) => "positive",
        Some(false) => "negative",
        None => "zero",
    };
    let mut outputs = value;
    outputs["n"] = json!(n);
    outputs["sign"] = json!(sign_text);
    outputs["strings_visited"] = json!(walker.interner().len());
    Ok(CommandResult {
        schema: schema(),
        command: "delta",
        inputs: json!({
            "instance": instance.display().to_string(),
            "steps": n,
            "mode": if scaled { "scaled" } else { "exact" },
        }),
        summary: format!("Δ({n}) is {sign_text}"),
        outputs,
        timings: clock.finish(),
        passed: true,
        exit_code: decision_code(sign),
    })
}

fn verify_failure(e: VerifyError) -> Failure {
    match e {
        VerifyError::Compile(e) => Failure::resource(e.to_string()),
        VerifyError::Rewrite(e) => rewrite_failure(e),
        other => Failure::usage(other.to_string()),
    }
}

pub fn verify(
    instance: &Path,
    circuit: &Path,
    input: &str,
    max_steps: Option<usize>,
    budget: Option<usize>,
) -> Result<CommandResult, Failure> {
    let mut clock = Clock::new();
    let inst: CompiledInstance = read_json(instance)?;
    let c = read_circuit(circuit)?;
    let x = read_bits(input)?;
    clock.lap("load");
    let mut options = VerifyOptions {
        max_steps,
        ..VerifyOptions::default()
    };
    if let Some(b) = budget {
        options.vertex_budget = b;
    }
    let report = verifier::verify(&inst, &c, &x, &options).map_err(verify_failure)?;
    clock.lap("verify");
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    let summary = if failed.is_empty() {
        format!("all {} checks passed", report.checks.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok(CommandResult {
        schema: schema(),
        command: "verify",
        inputs: json!({
            "instance": instance.display().to_string(),
            "circuit": circuit.display().to_string(),
            "input": input,
            "max_steps": max_steps,
        }),
        passed: report.passed,
        exit_code: if report.passed { EXIT_POSITIVE } else { EXIT_NEGATIVE },
        outputs: serde_json::to_value(&report).expect("report serializes"),
        timings: clock.finish(),
        summary,
    })
}

fn spectral_failure(e: SpectralError) -> Failure {
    Failure::usage(e.to_string())
}

pub fn spectral(ell: usize, m: usize) -> Result<CommandResult, Failure> {
    let mut clock = Clock::new();
    let entry = spectral::corner_entry(ell, m).map_err(spectral_failure)?;
    let spectrum = PathSpectrum::new(ell).map_err(spectral_failure)?;
    clock.lap("corner");
    let deviation = entry.deviation();
    let mut passed = deviation <= 1e-6;
    let mut outputs = json!({
        "corner_exact": entry.exact.to_string(),
        "corner_spectral": entry.spectral_f64(),
        "corner_spectral_log2": hp::log2_abs(&entry.spectral),
        "deviation": deviation,
        "lambda0": spectrum.lambda0,
        "lambda1": spectrum.lambda1,
        "w0": spectrum.w0(),
    });
    if m % 2 != ell % 2 && m + 1 >= ell {
        let b = spectral::bounds(ell, m).map_err(spectral_failure)?;
        let upper = b.upper_holds(&entry.exact);
        let lower = !b.lower_valid || b.lower_holds(&entry.exact);
        passed &= upper && lower;
        outputs["bounds"] = json!({
            "upper_log2": hp::log2_abs(&b.upper),
            "lower_log2": hp::log2_abs(&b.lower),
            "lower_valid": b.lower_valid,
            "upper_holds": upper,
            "lower_holds": lower,
        });
    }
    clock.lap("bounds");
    Ok(CommandResult {
        schema: schema(),
        command: "spectral",
        inputs: json!({ "ell": ell, "m": m }),
        summary: format!("(𝒫^{m})_{{0,{}}} = {}", ell - 1, entry.exact),
        outputs,
        timings: clock.finish(),
        passed,
        exit_code: if passed { EXIT_POSITIVE } else { EXIT_NEGATIVE },
    })
}

fn estimator_failure(e: EstimatorError) -> Failure {
    match e {
        EstimatorError::TooLarge(_) | EstimatorError::Incomplete => Failure::resource(e.to_string()),
        EstimatorError::Rewrite(e) => rewrite_failure(e),
        other => Failure::usage(other.to_string()),
    }
}

pub fn estimate(
    instance: &Path,
    eta: Option<f64>,
    theta: Option<f64>,
    samples: Option<u64>,
    seed: u64,
    delta: f64,
    budget: Option<usize>,
) -> Result<CommandResult, Failure> {
    let mut clock = Clock::new();
    let inst: CompiledInstance = read_json(instance)?;
    clock.lap("load");
    let noise = if eta.is_some() || theta.is_some() {
        let chosen = choose_noise(inst.epsilon, inst.m, inst.c).map_err(estimator_failure)?;
        Some(NoiseModel::new(eta.unwrap_or(chosen.eta), theta.unwrap_or(chosen.theta)).map_err(estimator_failure)?)
    } else {
        None
    };
    let mut options = EstimateOptions {
        noise,
        samples,
        seed,
        delta,
        ..EstimateOptions::default()
    };
    if let Some(b) = budget {
        options.vertex_budget = b;
    }
    let est = estimate_instance(&inst, &options).map_err(estimator_failure)?;
    clock.lap("estimate");
    let summary = match est.decision {
        Some(true) => "estimate is positive beyond its error bound".to_string(),
        Some(false) => "estimate is negative beyond its error bound".to_string(),
        None => format!(
            "undecided: |{:.3e}| is within the error bound {:.3e}",
            est.sampled.estimate,
            est.sampled.error_bound()
        ),
    };
    Ok(CommandResult {
        schema: schema(),
        command: "estimate",
        inputs: json!({
            "instance": instance.display().to_string(),
            "eta": eta,
            "theta": theta,
            "samples": samples,
            "seed": seed,
            "delta": delta,
        }),
        passed: true,
        exit_code: decision_code(est.decision),
        outputs: serde_json::to_value(&est).expect("estimate serializes"),
        timings: clock.finish(),
        summary,
    })
}

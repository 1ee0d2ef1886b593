//! Subcommand implementations. Each command validates every input before
//! producing any output, then emits a JSON report (and CSV plot data where
//! applicable). Returned codes: 0 success, 4 non-convergence; validation and
//! numeric failures surface as errors mapped by the caller.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::{json, Value};

use srgm_core::decision::{categorize, evaluate_categories, Recommendation, TestOutcome};
use srgm_core::metrics::{feature_vector, validate_records, FeatureRanges, ModuleRecord};
use srgm_core::network::{
    forward, importance_weights, targets_from_fault_density, train_backprop, NetworkWeights,
    TrainingSample, TrainingSet,
};
use srgm_core::nhpp::{fit_model, simulate_nhpp, FitOptions, ModelKind, ModelParams};
use srgm_core::release::{
    cost_ratio, expected_cost_multiversion, optimal_release_time, optimize_release_numeric,
    PolicyCase, ReleasePolicy,
};
use srgm_core::{Error, Result};

use crate::config::ProjectConfig;
use crate::csvio;
use crate::report;

/// Points emitted on the cost curve CSV.
const CURVE_POINTS: usize = 1000;

fn load_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Accepts a fit report, a bare fit result, or bare model parameters.
fn load_model_params(path: &Path) -> Result<ModelParams> {
    let value = load_json(path)?;
    let candidate = value
        .pointer("/result/fit/params")
        .or_else(|| value.get("params"))
        .unwrap_or(&value);
    let params: ModelParams = serde_json::from_value(candidate.clone()).map_err(|e| {
        Error::Input(format!(
            "{}: could not read model parameters: {e}",
            path.display()
        ))
    })?;
    params.validate()?;
    Ok(params)
}

/// Accepts an optimize report, a `{"policy": ...}` wrapper, or a bare policy.
fn load_policy(path: &Path) -> Result<ReleasePolicy> {
    let value = load_json(path)?;
    let candidate = value
        .pointer("/result/policy")
        .or_else(|| value.get("policy"))
        .unwrap_or(&value);
    let policy: ReleasePolicy = serde_json::from_value(candidate.clone()).map_err(|e| {
        Error::Input(format!(
            "{}: could not read release policy: {e}",
            path.display()
        ))
    })?;
    if !policy.t_star.is_finite() || policy.t_star < 0.0 {
        return Err(Error::Input(format!(
            "{}: optimal time must be finite and nonnegative, got {}",
            path.display(),
            policy.t_star
        )));
    }
    if !policy.expected_cost_at_t_star.is_finite() {
        return Err(Error::Input(format!(
            "{}: expected cost must be finite, got {}",
            path.display(),
            policy.expected_cost_at_t_star
        )));
    }
    Ok(policy)
}

fn to_value<T: serde::Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Numeric(format!("serialization failed: {e}")))
}

pub fn cmd_fit(
    data: &Path,
    model: Option<ModelKind>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let config = config.map(ProjectConfig::load).transpose()?;
    let kind = model
        .or(config.as_ref().and_then(|c| c.model))
        .ok_or_else(|| {
            Error::Input("no model family: pass --model or set \"model\" in the config".to_string())
        })?;
    let dataset = csvio::read_fault_csv(data)?;
    let fit = fit_model(&dataset, kind, FitOptions::default())?;

    let inputs = report::inputs_section(&[("fault_csv", data)])?;
    let result = json!({
        "fit": to_value(&fit)?,
        "dataset": {
            "observations": dataset.len(),
            "total_faults": dataset.total_faults(),
            "last_time": dataset.last_time(),
            "time_unit": dataset.time_unit(),
        },
    });
    report::emit(out, &report::envelope("fit", inputs, result))?;
    Ok(if fit.converged { 0 } else { 4 })
}

pub fn cmd_optimize(
    fit: &Path,
    config_path: &Path,
    prev: Option<&Path>,
    curve: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let config = ProjectConfig::load(config_path)?;
    let model = load_model_params(fit)?;
    let prev_model = prev.map(load_model_params).transpose()?;
    let costs = &config.costs;

    // Carry-over faults billed at exactly the field rate cancel out of the
    // cost algebraically, so the previous version cannot move the optimum.
    let cancelled = prev_model.is_some() && costs.c4 == costs.c2;
    let effective_prev = if cancelled { None } else { prev_model.clone() };

    let (policy, method) = match (&model, &effective_prev) {
        (ModelParams::Go(go), None) => (optimal_release_time(go, costs)?, "closed_form"),
        _ => {
            let policy = optimize_release_numeric(
                |t| {
                    expected_cost_multiversion(&model, effective_prev.as_ref(), costs, t)
                        .unwrap_or(f64::NAN)
                },
                costs.lifecycle_t,
            )?;
            (policy, "grid")
        }
    };

    let curve_points: Vec<(f64, f64)> = (0..CURVE_POINTS)
        .map(|i| {
            let t = if i == CURVE_POINTS - 1 {
                costs.lifecycle_t
            } else {
                costs.lifecycle_t * i as f64 / (CURVE_POINTS - 1) as f64
            };
            let c = expected_cost_multiversion(&model, effective_prev.as_ref(), costs, t)?;
            Ok((t, c))
        })
        .collect::<Result<_>>()?;

    if let Some(curve_path) = curve {
        report::emit_text(Some(curve_path), &csvio::curve_csv(&curve_points))?;
    }

    let mut input_files: Vec<(&str, &Path)> = vec![("fit_json", fit), ("config", config_path)];
    if let Some(p) = prev {
        input_files.push(("prev_fit_json", p));
    }
    let inputs = report::inputs_section(&input_files)?;
    let result = json!({
        "policy": to_value(&policy)?,
        "cost_ratio": cost_ratio(costs)?,
        "method": method,
        "multi_version": prev_model.is_some(),
        "carry_over_cancelled": cancelled,
        "curve_csv": curve.map(|p| p.display().to_string()),
        "model": to_value(&model)?,
    });
    report::emit(out, &report::envelope("optimize", inputs, result))?;
    Ok(0)
}

pub fn cmd_prioritize(
    metrics: &Path,
    config_path: &Path,
    weights: Option<&Path>,
    save_weights: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let config = ProjectConfig::load(config_path)?;
    let rows = csvio::read_metrics_csv(metrics)?;
    let records: Vec<ModuleRecord> = rows.iter().map(|r| r.record.clone()).collect();
    validate_records(&records)?;

    let known: BTreeSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    for id in &config.tested_modules {
        if !known.contains(id.as_str()) {
            return Err(Error::Input(format!(
                "config lists unknown tested module {id:?}"
            )));
        }
    }

    let ranges = FeatureRanges::from_records(&records)?;
    let features: Vec<[f64; srgm_core::metrics::FEATURE_COUNT]> = records
        .iter()
        .map(|r| feature_vector(r, &ranges))
        .collect::<Result<_>>()?;
    let flat: Vec<f64> = features.iter().flatten().copied().collect();
    let module_count = records.len();
    let input_count = flat.len();

    let densities: Vec<Option<f64>> = rows.iter().map(|r| r.fault_density).collect();
    let with_density = densities.iter().filter(|d| d.is_some()).count();

    let (raw_outputs, network_section): (Vec<f64>, Value) = if let Some(weights_path) = weights {
        let net: NetworkWeights = serde_json::from_value(load_json(weights_path)?)
            .map_err(|e| Error::Input(format!("{}: {e}", weights_path.display())))?;
        net.validate()?;
        if net.inputs != input_count || net.outputs != module_count {
            return Err(Error::Input(format!(
                "{}: network shaped {}x{} does not match {} modules ({} inputs, {} outputs)",
                weights_path.display(),
                net.inputs,
                net.outputs,
                module_count,
                input_count,
                module_count
            )));
        }
        let (_, y) = forward(&net, &flat)?;
        if let Some(save) = save_weights {
            report::emit_exact(save, &to_value(&net)?)?;
        }
        (
            y,
            json!({
                "mode": "weights_file",
                "hidden_units": net.hidden,
                "theta": net.theta,
                "seed": net.seed,
            }),
        )
    } else if with_density == module_count {
        let target: Vec<f64> = targets_from_fault_density(
            &densities.iter().map(|d| d.unwrap()).collect::<Vec<_>>(),
        )?;
        let initial = NetworkWeights::random(
            input_count,
            config.network.hidden_units,
            module_count,
            config.network.theta,
            config.network.seed,
        )?;
        let set = TrainingSet {
            samples: vec![TrainingSample {
                input: flat.clone(),
                target,
            }],
        };
        let outcome = train_backprop(initial, &set, config.network.learning_rate, config.network.epochs)?;
        let (_, y) = forward(&outcome.weights, &flat)?;
        if let Some(save) = save_weights {
            report::emit_exact(save, &to_value(&outcome.weights)?)?;
        }
        (
            y,
            json!({
                "mode": "trained",
                "hidden_units": outcome.weights.hidden,
                "theta": outcome.weights.theta,
                "seed": outcome.weights.seed,
                "initial_loss": outcome.initial_loss,
                "final_loss": outcome.final_loss,
                "epochs": outcome.epochs_run,
            }),
        )
    } else if with_density > 0 {
        return Err(Error::Input(format!(
            "{}: fault_density must be filled for every module or for none, got {with_density} of {module_count}",
            metrics.display()
        )));
    } else {
        if save_weights.is_some() {
            return Err(Error::Input(
                "no network to save: the weight-priority bypass trains nothing".to_string(),
            ));
        }
        // No fault history and no trained network: fall back to the
        // qualitative priority score, normalized below.
        (
            records.iter().map(|r| r.weight_priority_score).collect(),
            json!({
                "mode": "bypass",
                "note": "no fault history; importance proportional to weight_priority_score",
            }),
        )
    };

    let iv = importance_weights(&raw_outputs)?;
    let assignments: Vec<(String, f64)> = records
        .iter()
        .zip(&iv.weights)
        .map(|(r, p)| (r.id.clone(), *p))
        .collect();
    let dependencies: BTreeMap<String, Vec<String>> = records
        .iter()
        .filter(|r| !r.depends_on.is_empty())
        .map(|r| (r.id.clone(), r.depends_on.clone()))
        .collect();
    let tested: BTreeSet<String> = config.tested_modules.iter().cloned().collect();
    let ranked = categorize(
        &assignments,
        &dependencies,
        &tested,
        &config.category_thresholds,
    )?;

    let feature_map: BTreeMap<&str, Vec<f64>> = records
        .iter()
        .zip(&features)
        .map(|(r, f)| (r.id.as_str(), f.to_vec()))
        .collect();

    let inputs = report::inputs_section(&[("metrics_csv", metrics), ("config", config_path)])?;
    let result = json!({
        "modules": to_value(&ranked)?,
        "uniform_fallback": iv.uniform_fallback,
        "network": network_section,
        "features": to_value(&feature_map)?,
        "saved_weights": save_weights.map(|p| p.display().to_string()),
    });
    report::emit(out, &report::envelope("prioritize", inputs, result))?;
    Ok(0)
}

pub fn cmd_decide(
    policy_path: &Path,
    actuals: &Path,
    config_path: &Path,
    out: Option<&Path>,
) -> Result<u8> {
    let config = ProjectConfig::load(config_path)?;
    let policy = load_policy(policy_path)?;
    let rows = csvio::read_actuals_csv(actuals)?;

    let inputs = report::inputs_section(&[
        ("policy_json", policy_path),
        ("actuals_csv", actuals),
        ("config", config_path),
    ])?;

    if policy.case == PolicyCase::NoTesting || policy.t_star == 0.0 {
        let result = json!({
            "no_testing_policy": true,
            "policy": to_value(&policy)?,
            "note": "optimal policy is to release without testing; deviations are undefined",
        });
        report::emit(out, &report::envelope("decide", inputs, result))?;
        return Ok(0);
    }

    let outcomes: Vec<_> = rows
        .iter()
        .map(|row| {
            (
                row.category,
                TestOutcome {
                    actual_time: row.actual_time,
                    actual_cost: row.actual_cost,
                    faults_found: row.faults_found,
                    faults_tolerated: config.tolerance_for(row.category),
                },
            )
        })
        .collect();
    let decisions = evaluate_categories(&outcomes, &policy, config.stringency, config.cost_odds)?;

    let overall = decisions
        .iter()
        .map(|d| d.recommendation)
        .max_by_key(|r| match r {
            Recommendation::Release => 0,
            Recommendation::ContinueTesting => 1,
            Recommendation::Reject => 2,
        })
        .expect("at least one decision");

    let result = json!({
        "no_testing_policy": false,
        "policy": to_value(&policy)?,
        "decisions": to_value(&decisions)?,
        "overall_recommendation": to_value(&overall)?,
        "stringency": config.stringency,
        "cost_odds": config.cost_odds,
    });
    report::emit(out, &report::envelope("decide", inputs, result))?;
    Ok(0)
}

pub fn cmd_simulate(
    params: &Path,
    horizon: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<u8> {
    let model = load_model_params(params)?;
    let events = simulate_nhpp(&model, horizon, seed)?;
    report::emit_text(out, &csvio::events_csv(&events))?;
    Ok(0)
}


//! Subcommand implementations. Every command writes its data files plus a
//! manifest into the output directory; data files are byte-reproducible for
//! fixed arguments and seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use serde_json::json;

use goggin::config::RunConfig;
use goggin::crlb::{
    batched_bound, default_tau, goggin_stationary_j, kf_stationary_j, kf_suboptimality_gap,
    unbatched_crlb,
};
use goggin::filters::{FilterMode, GainMode};
use goggin::fisher_grid::{clt_rate_experiment, GridSpec};
use goggin::harness::{
    classify_regime, mean_and_ci, rate_fit_bias, rate_fit_mse_gap, replication_table, summarize,
    MseEstimate, RateConfig, Regime, SRule, DEFAULT_REGIME_CUTOFF,
};
use goggin::noise::{NoiseModel, NoiseSpec};
use goggin::particle::mse_star_estimate;
use goggin::regimes::{build_regime_map, default_n_list, default_snr_ratios};
use goggin::seed::rng_from;
use goggin::state_space::Model;
use goggin::{Error, Result};

use crate::manifest::ManifestBuilder;
use crate::{Cli, Command};

pub fn run(cli: Cli) -> Result<ExitCode> {
    let Cli {
        config,
        seed,
        out,
        command,
        ..
    } = cli;
    let dir = out_dir(out)?;
    match command {
        Command::Simulate {
            n,
            s,
            horizon,
            x0,
            signal,
            obs,
        } => cmd_simulate(&dir, seed, n, s, horizon, x0, &signal, &obs),
        Command::Compare => cmd_compare(&dir, config, seed),
        Command::Crlb {
            n,
            s,
            tau,
            signal,
            obs,
        } => cmd_crlb(&dir, n, s, &tau, &signal, &obs),
        Command::FisherClt {
            model,
            taus,
            n,
            points,
        } => cmd_fisher_clt(&dir, &model, &taus, n, points),
        Command::Regimes {
            signal,
            obs,
            n_list,
            ratios,
        } => cmd_regimes(&dir, &signal, &obs, n_list, ratios),
        Command::Rates {
            kind,
            filter,
            s_rule,
            n_list,
            replications,
            horizon,
            burn_in,
            signal,
            obs,
            gain_mode,
        } => cmd_rates(
            &dir,
            seed,
            &kind,
            &filter,
            &s_rule,
            &n_list,
            replications,
            horizon,
            burn_in,
            &signal,
            &obs,
            &gain_mode,
        ),
    }
}

fn out_dir(out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn noise_model(shorthand: &str) -> Result<NoiseModel> {
    NoiseModel::from_spec(&NoiseSpec::parse_shorthand(shorthand)?)
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad {what} entry `{t}`")))
        })
        .collect()
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::config(format!("bad {what} entry `{t}`")))
        })
        .collect()
}

fn write_json(dir: &std::path::Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    dir: &std::path::Path,
    seed: Option<u64>,
    n: f64,
    s: f64,
    horizon: usize,
    x0: f64,
    signal: &str,
    obs: &str,
) -> Result<ExitCode> {
    let model = Model::from_specs(
        n,
        s,
        &NoiseSpec::parse_shorthand(signal)?,
        &NoiseSpec::parse_shorthand(obs)?,
    )?;
    let seed = seed.unwrap_or(0);
    let traj = model.simulate(horizon, x0, &mut rng_from(seed));
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    fs::write(dir.join("trajectory.csv"), &buf)?;
    let canonical = json!({
        "command": "simulate", "n": n, "s": s, "horizon": horizon, "x0": x0,
        "signal": signal, "obs": obs, "seed": seed,
    })
    .to_string();
    let mut manifest = ManifestBuilder::new("simulate", &canonical, seed);
    manifest.add_output("trajectory.csv");
    manifest.finish(dir)?;
    println!("wrote {} ({horizon} rows)", dir.join("trajectory.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_crlb(
    dir: &std::path::Path,
    n: f64,
    s: f64,
    tau_arg: &str,
    signal: &str,
    obs: &str,
) -> Result<ExitCode> {
    let model = Model::from_specs(
        n,
        s,
        &NoiseSpec::parse_shorthand(signal)?,
        &NoiseSpec::parse_shorthand(obs)?,
    )?;
    let tau = if tau_arg == "auto" {
        default_tau(&model)
    } else {
        tau_arg
            .parse::<u64>()
            .map_err(|_| Error::config(format!("--tau must be `auto` or an integer, got `{tau_arg}`")))?
    };
    if tau as f64 > n {
        eprintln!("warning: tau {tau} exceeds N {n}; outside the batching regime, bound still reported");
    }
    let bound = batched_bound(&model, tau)?;
    let gap = kf_suboptimality_gap(&model);
    let csv = format!(
        "N,s_N,tau,barJ_inf,lower_bound,unbatched_bound,J_gf,J_kf,rel_gap\n{},{},{},{},{},{},{},{},{}\n",
        n,
        s,
        tau,
        bound.bar_j_inf,
        bound.lower_bound,
        unbatched_crlb(&model),
        goggin_stationary_j(&model),
        kf_stationary_j(&model),
        gap.rel_gap,
    );
    fs::write(dir.join("crlb.csv"), &csv)?;
    let canonical = json!({
        "command": "crlb", "n": n, "s": s, "tau": tau, "signal": signal, "obs": obs,
    })
    .to_string();
    let mut manifest = ManifestBuilder::new("crlb", &canonical, 0);
    manifest.add_output("crlb.csv");
    manifest.finish(dir)?;
    println!(
        "tau = {tau}: lower_bound = {}, slack order = {}",
        bound.lower_bound, bound.slack_order
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_fisher_clt(
    dir: &std::path::Path,
    model: &str,
    taus: &str,
    n: f64,
    points: usize,
) -> Result<ExitCode> {
    let noise = noise_model(model)?;
    let tau_list = parse_usize_list(taus, "--taus")?;
    let report = clt_rate_experiment(
        &noise,
        n,
        &tau_list,
        GridSpec {
            half_width: None,
            n_points: points,
        },
    )?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    fs::write(dir.join("fisher_clt.csv"), &buf)?;
    let canonical = json!({
        "command": "fisher-clt", "model": model, "taus": tau_list, "n": n, "points": points,
    })
    .to_string();
    let mut manifest = ManifestBuilder::new("fisher-clt", &canonical, 0);
    manifest.add_output("fisher_clt.csv");
    manifest.finish(dir)?;
    println!(
        "{} rows, fitted slope {}",
        report.reports.len(),
        report.slope_fit
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_regimes(
    dir: &std::path::Path,
    signal: &str,
    obs: &str,
    n_list: Option<String>,
    ratios: Option<String>,
) -> Result<ExitCode> {
    let n_values = match &n_list {
        Some(text) => parse_f64_list(text, "--n-list")?,
        None => default_n_list(),
    };
    let ratio_values = match &ratios {
        Some(text) => parse_f64_list(text, "--ratios")?,
        None => default_snr_ratios(),
    };
    let rows = build_regime_map(&noise_model(signal)?, &noise_model(obs)?, &n_values, &ratio_values)?;
    let mut buf = Vec::new();
    goggin::regimes::write_csv(&rows, &mut buf)?;
    fs::write(dir.join("regimes.csv"), &buf)?;

    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut recommended: BTreeMap<String, usize> = BTreeMap::new();
    for row in &rows {
        *labels.entry(row.label.to_string()).or_default() += 1;
        *recommended.entry(row.recommended_filter.clone()).or_default() += 1;
    }
    let summary = json!({
        "rows": rows.len(),
        "labels": labels,
        "recommended": recommended,
        "manifest": "manifest.json",
    });
    write_json(dir, "regimes_summary.json", &summary)?;

    let canonical = json!({
        "command": "regimes", "signal": signal, "obs": obs,
        "n_list": n_values, "ratios": ratio_values,
    })
    .to_string();
    let mut manifest = ManifestBuilder::new("regimes", &canonical, 0);
    manifest.add_output("regimes.csv");
    manifest.add_output("regimes_summary.json");
    manifest.finish(dir)?;
    println!("{} rows", rows.len());
    Ok(ExitCode::SUCCESS)
}

fn parse_s_rule(text: &str) -> Result<SRule> {
    match text {
        "sqrt_n" => Ok(SRule::SqrtN),
        "n_quarter" => Ok(SRule::NQuarter),
        other => match other.strip_prefix("fixed:") {
            Some(c) => c
                .parse::<f64>()
                .map(SRule::Fixed)
                .map_err(|_| Error::config(format!("bad fixed s value `{c}`"))),
            None => Err(Error::config(format!(
                "--s-rule must be sqrt_n, n_quarter, or fixed:<s>, got `{other}`"
            ))),
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_rates(
    dir: &std::path::Path,
    seed: Option<u64>,
    kind: &str,
    filter: &str,
    s_rule: &str,
    n_list: &str,
    replications: usize,
    horizon: usize,
    burn_in: Option<usize>,
    signal: &str,
    obs: &str,
    gain_mode: &str,
) -> Result<ExitCode> {
    let seed = seed.unwrap_or(0);
    let rule = parse_s_rule(s_rule)?;
    let n_values = parse_f64_list(n_list, "--n-list")?;
    let cfg = RateConfig {
        signal: noise_model(signal)?,
        obs: noise_model(obs)?,
        filter: FilterMode::parse(filter, 1)?,
        replications,
        horizon,
        burn_in,
        gain_mode: GainMode::parse(gain_mode)?,
        seed,
    };
    let fit = match kind {
        "bias" => rate_fit_bias(&cfg, &n_values, rule)?,
        "gap" => rate_fit_mse_gap(&cfg, &n_values, rule)?,
        other => {
            return Err(Error::config(format!(
                "--kind must be bias or gap, got `{other}`"
            )))
        }
    };
    let mut csv = String::from("N,s_N,value,ci_half_width,lower_bound,slope,inconclusive\n");
    for p in &fit.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.n, p.s, p.value, p.ci_half_width, p.lower_bound, fit.slope, fit.inconclusive
        ));
    }
    fs::write(dir.join("rates.csv"), &csv)?;
    let canonical = json!({
        "command": "rates", "kind": kind, "filter": filter, "s_rule": s_rule,
        "n_list": n_values, "replications": replications, "horizon": horizon,
        "burn_in": burn_in, "signal": signal, "obs": obs, "gain_mode": gain_mode,
        "seed": seed,
    })
    .to_string();
    let mut manifest = ManifestBuilder::new("rates", &canonical, seed);
    manifest.add_output("rates.csv");
    manifest.finish(dir)?;
    println!(
        "{} kind: slope {}, inconclusive {}",
        kind, fit.slope, fit.inconclusive
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(
    dir: &std::path::Path,
    config: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let path = config.ok_or_else(|| Error::config("compare requires --config <file>"))?;
    let mut run_cfg = RunConfig::from_path(&path)?;
    if let Some(s) = seed {
        run_cfg.seed = s;
    }
    let canonical = run_cfg.canonical_json();
    let exp = run_cfg.to_experiment()?;
    let model = exp.model.clone();

    let table = replication_table(&exp)?;
    let ests: Vec<MseEstimate> = exp
        .filters
        .iter()
        .zip(&table)
        .map(|(mode, rows)| summarize(mode.to_string(), rows))
        .collect();
    // The oracle derives its trajectories from the same (seed, replication)
    // chain as the harness, so it runs on the identical trajectory set.
    let oracle = match run_cfg.oracle_particles {
        Some(particles) => Some(mse_star_estimate(
            &model,
            exp.horizon,
            exp.burn_in,
            particles,
            exp.replications,
            exp.seed,
        )?),
        None => None,
    };

    let tau = run_cfg.tau.unwrap_or_else(|| default_tau(&model));
    if tau as f64 > model.n() {
        eprintln!(
            "warning: tau {tau} exceeds N {}; outside the batching regime",
            model.n()
        );
    }
    let bound = batched_bound(&model, tau)?;
    let regime = classify_regime(&model, DEFAULT_REGIME_CUTOFF).regime;

    let oracle_cell = oracle
        .as_ref()
        .map(|o| o.mean_sq_error.to_string())
        .unwrap_or_default();
    let mut csv = String::from(
        "filter,N,s_N,regime,mse,mse_ci,bias,bias_ci,crlb_lb,replications,seed,mse_oracle\n",
    );
    for est in &ests {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            est.filter_mode,
            model.n(),
            model.s(),
            regime,
            est.mean_sq_error,
            est.ci_half_width,
            est.bias,
            est.bias_ci_half_width,
            bound.lower_bound,
            est.replications,
            exp.seed,
            oracle_cell,
        ));
    }
    fs::write(dir.join("compare.csv"), &csv)?;

    let find = |mode: FilterMode| exp.filters.iter().position(|&m| m == mode);
    let kf_i = find(FilterMode::Kf);
    let gf_i = find(FilterMode::Gf);
    let mut violations: Vec<String> = Vec::new();

    let mut gf_beats_kf = serde_json::Value::Null;
    let mut gf_equals_kf = serde_json::Value::Null;
    let mut kf_minus_gf = serde_json::Value::Null;
    if let (Some(ki), Some(gi)) = (kf_i, gf_i) {
        let diffs: Vec<f64> = table[ki]
            .iter()
            .zip(&table[gi])
            .map(|(kf, gf)| kf.0 - gf.0)
            .collect();
        let (mean, ci) = mean_and_ci(&diffs);
        gf_beats_kf = json!(mean > ci);
        let scale = ests[ki].mean_sq_error.abs().max(1.0);
        gf_equals_kf =
            json!((ests[ki].mean_sq_error - ests[gi].mean_sq_error).abs() <= 1e-10 * scale);
        kf_minus_gf = json!({"mean": mean, "ci_half_width": ci});
        // The score-filter guarantee only covers the balanced regime.
        if regime == Regime::Balanced
            && ests[gi].mean_sq_error
                > ests[ki].mean_sq_error + ests[gi].ci_half_width + ests[ki].ci_half_width
        {
            violations.push("mse_gf > mse_kf beyond CI in the balanced regime".into());
        }
    }

    // The batched bound holds up to a correction of order 1/(tau * bar J),
    // which at small tau is material; only a dip below the slack-adjusted
    // bound is evidence of a broken run.
    let bound_floor = bound.lower_bound - bound.slack_order;
    for est in &ests {
        if est.mean_sq_error < bound_floor - est.ci_half_width {
            violations.push(format!(
                "mse_{} = {} below the information bound {} minus slack {} beyond CI",
                est.filter_mode, est.mean_sq_error, bound.lower_bound, bound.slack_order
            ));
        }
    }
    if let Some(ki) = kf_i {
        let trivial_cap = [find(FilterMode::TrivialMean), find(FilterMode::TrivialObs)]
            .iter()
            .flatten()
            .map(|&i| ests[i].mean_sq_error + ests[i].ci_half_width)
            .fold(f64::INFINITY, f64::min);
        if trivial_cap.is_finite()
            && ests[ki].mean_sq_error > trivial_cap + ests[ki].ci_half_width
        {
            violations.push("mse_kf above a trivial filter beyond CI".into());
        }
    }
    if let Some(o) = &oracle {
        if o.mean_sq_error < bound_floor - o.ci_half_width {
            violations.push(format!(
                "mse_oracle = {} below the information bound {} minus slack {} beyond CI",
                o.mean_sq_error, bound.lower_bound, bound.slack_order
            ));
        }
        let reference = gf_i.or(kf_i);
        if let Some(i) = reference {
            if o.mean_sq_error
                > ests[i].mean_sq_error + o.ci_half_width + ests[i].ci_half_width
            {
                violations.push(format!(
                    "mse_oracle beats no filter: above mse_{} beyond CI",
                    ests[i].filter_mode
                ));
            }
        }
    }

    let verdict = json!({
        "regime": regime.to_string(),
        "tau": tau,
        "crlb_lower_bound": bound.lower_bound,
        "gf_beats_kf": gf_beats_kf,
        "gf_equals_kf": gf_equals_kf,
        "kf_minus_gf": kf_minus_gf,
        "mse_oracle": oracle.as_ref().map(|o| o.mean_sq_error),
        "oracle_ci_half_width": oracle.as_ref().map(|o| o.ci_half_width),
        "ordering_violations": violations,
        "manifest": "manifest.json",
    });
    write_json(dir, "verdict.json", &verdict)?;

    let mut manifest = ManifestBuilder::new("compare", &canonical, exp.seed);
    manifest.add_output("compare.csv");
    manifest.add_output("verdict.json");
    manifest.finish(dir)?;

    for est in &ests {
        println!(
            "{}: mse {} (ci {}), bias {}",
            est.filter_mode, est.mean_sq_error, est.ci_half_width, est.bias
        );
    }
    if violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &violations {
            eprintln!("ordering violation: {v}");
        }
        Ok(ExitCode::from(3))
    }
}

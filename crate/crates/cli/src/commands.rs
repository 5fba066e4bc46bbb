//! Subcommand implementations. Every command resolves its configuration,
//! runs deterministically for a fixed seed, and returns the process exit
//! code: 0 on success, 2 when some scenarios or samples were rejected but
//! the run completed. Configuration errors bubble up and exit 1.

use crate::config::RunConfig;
use crate::report;
use anyhow::{anyhow, bail, Context, Result};
use foresight_core::harness::{
    collision_rate_pct, eval_open_loop, mean_refinements, run_scenario, OpenLoopSample,
    RunOptions,
};
use foresight_core::metrics::{aggregate_suite, L2Convention};
use foresight_core::select::SelectorKind;
use foresight_core::world::suite::{
    default_suite, generate_openloop_dataset, generate_suite, DEFAULT_SUITE_SEED,
};
use foresight_core::world::{ClosedLoopOutcome, Mode, ScenarioSpec};
use foresight_core::Error as CoreError;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Resolve the scenario selection: a file, a directory of `*.json`, or a
/// single-`*` glob; `None` selects the bundled suite.
fn resolve_scenarios(selection: &Option<String>) -> Result<Vec<ScenarioSpec>> {
    let Some(sel) = selection else {
        return Ok(default_suite());
    };
    let path = Path::new(sel);
    let mut files: Vec<PathBuf> = if path.is_dir() {
        std::fs::read_dir(path)
            .with_context(|| format!("cannot read scenario directory {sel}"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map_or(false, |ext| ext == "json"))
            .collect()
    } else if sel.contains('*') {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
        let dir = parent.unwrap_or_else(|| Path::new("."));
        let pattern = path
            .file_name()
            .ok_or_else(|| anyhow!("bad scenario glob {sel}"))?
            .to_string_lossy()
            .to_string();
        let (prefix, suffix) = pattern
            .split_once('*')
            .ok_or_else(|| anyhow!("bad scenario glob {sel}"))?;
        std::fs::read_dir(dir)
            .with_context(|| format!("cannot read scenario directory {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name().map_or(false, |n| {
                    let name = n.to_string_lossy();
                    name.starts_with(prefix) && name.ends_with(suffix)
                })
            })
            .collect()
    } else {
        if !path.exists() {
            bail!("scenario file not found: {sel}");
        }
        vec![path.to_path_buf()]
    };
    files.sort();
    if files.is_empty() {
        bail!("no scenarios in {sel}");
    }
    files
        .iter()
        .map(|p| {
            ScenarioSpec::load(p).map_err(|e| anyhow!("scenario {}: {e}", p.display()))
        })
        .collect()
}

/// Run one mode over the scenarios, optionally in parallel; outcomes come
/// back in scenario order with rejects split out.
fn run_mode(
    scenarios: &[ScenarioSpec],
    mode: Mode,
    opts: &RunOptions,
    jobs: usize,
) -> Result<(Vec<ClosedLoopOutcome>, Vec<(String, String)>)> {
    let results: Vec<std::result::Result<ClosedLoopOutcome, CoreError>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("cannot build thread pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            scenarios
                .par_iter()
                .map(|s| run_scenario(s, mode, opts))
                .collect()
        })
    } else {
        scenarios
            .iter()
            .map(|s| run_scenario(s, mode, opts))
            .collect()
    };

    let mut outcomes = Vec::new();
    let mut rejects = Vec::new();
    for result in results {
        match result {
            Ok(outcome) => outcomes.push(outcome),
            Err(CoreError::ScenarioInvalid { id, reason }) => rejects.push((id, reason)),
            Err(other) => return Err(anyhow!(other)),
        }
    }
    Ok((outcomes, rejects))
}

pub fn cmd_closed_loop(cfg: &RunConfig) -> Result<i32> {
    let scenarios = resolve_scenarios(&cfg.scenarios)?;
    let opts = cfg.run_options();
    let mut any_rejects = false;

    for mode in cfg.mode.modes() {
        let (outcomes, rejects) = run_mode(&scenarios, mode, &opts, cfg.jobs)?;
        any_rejects |= !rejects.is_empty();
        for (id, reason) in &rejects {
            eprintln!("reject [{}] {id}: {reason}", mode.name());
        }
        if outcomes.is_empty() {
            bail!("no valid scenarios in mode {}", mode.name());
        }

        let by_id = |id: &str| scenarios.iter().find(|s| s.id == id).unwrap();
        for outcome in &outcomes {
            let scenario = by_id(&outcome.scenario_id);
            let path = cfg
                .out
                .join("outcomes")
                .join(format!("{}.{}.json", outcome.scenario_id, mode.name()));
            report::write_json(&path, &report::outcome_json(scenario, outcome))?;
            if cfg.traces {
                let path = cfg
                    .out
                    .join("traces")
                    .join(format!("{}.{}.csv", outcome.scenario_id, mode.name()));
                report::write_text(&path, &report::trace_csv(outcome))?;
            }
        }

        let summary = aggregate_suite(&outcomes).map_err(|e| anyhow!(e))?;
        let mean_pdms = outcomes
            .iter()
            .map(|o| report::pdms_surrogate(by_id(&o.scenario_id), o))
            .sum::<f64>()
            / outcomes.len() as f64;

        if cfg.csv {
            let text = report::summary_csv(&cfg.header(), &summary, &rejects);
            report::write_text(&cfg.out.join(format!("summary.{}.csv", mode.name())), &text)?;
        }
        if cfg.json {
            let value = json!({
                "config": cfg.header(),
                "mode": mode.name(),
                "rows": summary.rows,
                "rejects": rejects,
                "mean_pdms_surrogate": mean_pdms,
            });
            report::write_json(&cfg.out.join(format!("summary.{}.json", mode.name())), &value)?;
        }
        println!(
            "closed-loop [{}]: {} scenarios, {} rejects -> {}",
            mode.name(),
            outcomes.len(),
            rejects.len(),
            cfg.out.display()
        );
    }
    Ok(if any_rejects { 2 } else { 0 })
}

pub fn cmd_open_loop(cfg: &RunConfig) -> Result<i32> {
    let (samples, parse_skipped) = match &cfg.dataset {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read dataset {}", path.display()))?;
            let values: Vec<serde_json::Value> =
                serde_json::from_str(&text).context("dataset must be a JSON array")?;
            let mut samples = Vec::new();
            let mut skipped = 0usize;
            for value in values {
                match serde_json::from_value::<OpenLoopSample>(value) {
                    Ok(sample) => samples.push(sample),
                    Err(_) => skipped += 1,
                }
            }
            (samples, skipped)
        }
        None => (generate_openloop_dataset(DEFAULT_SUITE_SEED, cfg.samples), 0),
    };
    if samples.is_empty() {
        bail!("no valid open-loop samples");
    }

    let opts = cfg.run_options();
    let horizons = [1.0, 2.0, 3.0];
    let convention = if cfg.l2_at_horizon {
        L2Convention::AtHorizon
    } else {
        L2Convention::PrefixAverage
    };

    let mut total_skipped = parse_skipped;
    for mode in cfg.mode.modes() {
        let mut report_data = eval_open_loop(&samples, mode, &opts, &horizons, convention)
            .map_err(|e| anyhow!(e))?;
        report_data.skipped += parse_skipped;
        total_skipped = report_data.skipped;

        if cfg.csv {
            let text = format!("{}\n{}", cfg.header(), report_data.to_csv());
            report::write_text(&cfg.out.join(format!("openloop.{}.csv", mode.name())), &text)?;
        }
        if cfg.json {
            let value = json!({
                "config": cfg.header(),
                "mode": mode.name(),
                "report": report_data,
            });
            report::write_json(&cfg.out.join(format!("openloop.{}.json", mode.name())), &value)?;
        }
        println!(
            "open-loop [{}]: {} samples, {} skipped -> {}",
            mode.name(),
            report_data.samples,
            report_data.skipped,
            cfg.out.display()
        );
    }
    Ok(if total_skipped > 0 { 2 } else { 0 })
}

pub fn cmd_ablate(cfg: &RunConfig) -> Result<i32> {
    let scenarios = resolve_scenarios(&cfg.scenarios)?;
    let base = cfg.run_options();
    let mut any_rejects = false;

    // Early-stop / selection 2x2 grid, imagine mode.
    let mut grid_rows = Vec::new();
    for (ess, tss) in [(false, false), (true, false), (false, true), (true, true)] {
        let mut opts = base.clone();
        opts.loop_config.ess_enabled = ess;
        opts.loop_config.tss_enabled = tss;
        let (outcomes, rejects) = run_mode(&scenarios, Mode::Imagine, &opts, cfg.jobs)?;
        any_rejects |= !rejects.is_empty();
        if outcomes.is_empty() {
            bail!("no valid scenarios in the ablation grid");
        }
        grid_rows.push((ess, tss, collision_rate_pct(&outcomes), mean_refinements(&outcomes)));
    }

    // Selection-strategy comparison with early stop enabled.
    let selectors = [
        SelectorKind::SmoothSel,
        SelectorKind::SoftMin,
        SelectorKind::MaxCons,
        SelectorKind::Directional,
    ];
    let mut selector_rows = Vec::new();
    for selector in selectors {
        let mut opts = base.clone();
        opts.loop_config.ess_enabled = true;
        opts.loop_config.tss_enabled = true;
        opts.loop_config.selector = selector;
        let (outcomes, rejects) = run_mode(&scenarios, Mode::Imagine, &opts, cfg.jobs)?;
        any_rejects |= !rejects.is_empty();
        if outcomes.is_empty() {
            bail!("no valid scenarios in the selector comparison");
        }
        selector_rows.push((
            selector.name(),
            collision_rate_pct(&outcomes),
            mean_refinements(&outcomes),
        ));
    }

    if cfg.csv {
        let mut text = format!("{}\ness,tss,collision_rate_pct,mean_refinements\n", cfg.header());
        for (ess, tss, rate, refinements) in &grid_rows {
            text.push_str(&format!(
                "{},{},{:.2},{:.2}\n",
                if *ess { "on" } else { "off" },
                if *tss { "on" } else { "off" },
                rate,
                refinements
            ));
        }
        report::write_text(&cfg.out.join("ablate_ess_tss.csv"), &text)?;

        let mut text = format!(
            "{}\nselector,collision_rate_pct,mean_refinements\n",
            cfg.header()
        );
        for (name, rate, refinements) in &selector_rows {
            text.push_str(&format!("{name},{rate:.2},{refinements:.2}\n"));
        }
        report::write_text(&cfg.out.join("ablate_selectors.csv"), &text)?;
    }
    if cfg.json {
        let value = json!({
            "config": cfg.header(),
            "ess_tss_grid": grid_rows
                .iter()
                .map(|(ess, tss, rate, refinements)| json!({
                    "ess": ess,
                    "tss": tss,
                    "collision_rate_pct": rate,
                    "mean_refinements": refinements,
                }))
                .collect::<Vec<_>>(),
            "selectors": selector_rows
                .iter()
                .map(|(name, rate, refinements)| json!({
                    "selector": name,
                    "collision_rate_pct": rate,
                    "mean_refinements": refinements,
                }))
                .collect::<Vec<_>>(),
        });
        report::write_json(&cfg.out.join("ablate.json"), &value)?;
    }
    println!("ablate: {} grid rows, {} selector rows -> {}", grid_rows.len(), selector_rows.len(), cfg.out.display());
    Ok(if any_rejects { 2 } else { 0 })
}

pub fn cmd_gen_suite(out: &Path, seed: u64, per_category: usize) -> Result<i32> {
    let scenarios = generate_suite(seed, per_category);
    std::fs::create_dir_all(out)?;
    for scenario in &scenarios {
        scenario
            .save(&out.join(format!("{}.json", scenario.id)))
            .map_err(|e| anyhow!(e))?;
    }
    println!("wrote {} scenarios to {}", scenarios.len(), out.display());
    Ok(0)
}

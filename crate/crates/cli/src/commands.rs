use std::io::Write;
use std::path::Path;

use log::{info, warn};
use memcool::analysis::{budget_grid, cp_divisibility_witness, structure_sweep};
use memcool::asymptotics::{attainability_check, hierarchy_exponent, p_star, rho_star_s, rho_star_sl};
use memcool::engine::run_protocol;
use memcool::nonadaptive::iterate_chain;
use memcool::MemoryConfig;
use serde_json::{json, Value};

use crate::args::{ModeArg, Scenario};
use crate::error::CliError;
use crate::output::{fmt_g, fmt_vec, grid_csv, trace_csv};

fn config_json(c: &MemoryConfig) -> Value {
    json!({
        "ds": c.d_s(),
        "dm": c.d_m(),
        "k": c.k(),
        "l": c.ell(),
        "beta": c.beta(),
        "system_levels": c.system().levels(),
        "machine_levels": c.machine().levels(),
    })
}

fn summary_json(c: &MemoryConfig, final_s_ground: Option<f64>) -> Result<Value, CliError> {
    Ok(json!({
        "config": config_json(c),
        "p_star": p_star(c),
        "final_s_ground": final_s_ground,
        "attainable": attainability_check(c)?,
        "hierarchy_exponent": hierarchy_exponent(c),
    }))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stdout_write(contents: &str) -> Result<(), CliError> {
    std::io::stdout()
        .lock()
        .write_all(contents.as_bytes())
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
}

pub fn bound(scenario: &Scenario, json: bool) -> Result<(), CliError> {
    let c = scenario.config()?;
    if json {
        let v = summary_json(&c, None)?;
        return stdout_write(&format!("{}\n", serde_json::to_string_pretty(&v).unwrap()));
    }
    let text = format!(
        "p_star: {}\nrho_star_S: [{}]\nrho_star_SL: [{}]\nattainable: {}\nhierarchy_exponent: {}\n",
        fmt_g(p_star(&c)),
        fmt_vec(&rho_star_s(&c)),
        fmt_vec(&rho_star_sl(&c)?),
        attainability_check(&c)?,
        fmt_g(hierarchy_exponent(&c)),
    );
    stdout_write(&text)
}

pub struct SimulateOpts<'a> {
    pub mode: ModeArg,
    pub steps: usize,
    pub out: Option<&'a Path>,
    pub dump_sl: bool,
    pub json: bool,
}

pub fn simulate(scenario: &Scenario, opts: SimulateOpts) -> Result<(), CliError> {
    let c = scenario.config()?;
    if opts.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let trace = match opts.mode.engine_mode() {
        Some(mode) => run_protocol(&c, opts.steps, mode)?,
        None => iterate_chain(&c, opts.steps)?,
    };
    let csv = trace_csv(&trace, opts.dump_sl);

    let final_s = trace.final_s_ground();
    let bound = p_star(&c);
    let summary = if opts.json {
        let mut v = summary_json(&c, Some(final_s))?;
        v["gap_to_bound"] = json!(bound - final_s);
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else {
        format!(
            "final_s_ground: {}\np_star: {}\ngap_to_bound: {}\n",
            fmt_g(final_s),
            fmt_g(bound),
            fmt_g(bound - final_s)
        )
    };

    match opts.out {
        Some(path) => {
            write_file(path, &csv)?;
            stdout_write(&summary)
        }
        None => {
            stdout_write(&csv)?;
            eprint!("{summary}");
            Ok(())
        }
    }
}

pub struct CompareOpts<'a> {
    pub budget_min: usize,
    pub budget_max: usize,
    pub k_max: usize,
    pub mode: ModeArg,
    pub out: Option<&'a Path>,
}

pub fn compare(scenario: &Scenario, opts: CompareOpts) -> Result<(), CliError> {
    if opts.budget_min > opts.budget_max {
        return Err(CliError::Usage(format!(
            "--budget-min {} exceeds --budget-max {}",
            opts.budget_min, opts.budget_max
        )));
    }
    if opts.k_max == 0 {
        return Err(CliError::Usage("--k-max must be at least 1".into()));
    }
    let Some(mode) = opts.mode.engine_mode() else {
        return Err(CliError::Usage("compare supports the adaptive modes only".into()));
    };
    let base = scenario.config_with(1, 0)?;
    let configs = structure_sweep(&base, opts.k_max)?;
    let budgets: Vec<usize> = (opts.budget_min..=opts.budget_max).collect();
    for c in &configs {
        for &m in &budgets {
            if c.steps_for_budget(m).is_none() {
                info!("skipping (k={}, l={}, m={m}): not a whole number of steps", c.k(), c.ell());
            }
        }
    }
    let grid = budget_grid(&configs, &budgets, mode)?;
    for s in &grid.skipped {
        warn!("skipping (k={}, l={}): {}", s.k, s.l, s.reason);
    }
    let csv = grid_csv(&grid.rows);
    match opts.out {
        Some(path) => write_file(path, &csv),
        None => stdout_write(&csv),
    }
}

pub fn witness(scenario: &Scenario, t: usize, n: usize, json: bool) -> Result<(), CliError> {
    if !(1 <= t && t < n) {
        return Err(CliError::Usage(format!("need 1 <= t < n, got t={t}, n={n}")));
    }
    let c = scenario.config()?;
    let w = cp_divisibility_witness(&c, t, n)?;
    let text = if json {
        let v = json!({ "config": config_json(&c), "witness": w });
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else {
        format!(
            "t: {t}\nn: {n}\ns_level_deviation: {}\ns_level_markovian: {}\nsl_level_deviation: {}\nsl_level_markovian: {}\n",
            fmt_g(w.s_level.deviation),
            w.s_level.markovian,
            fmt_g(w.sl_level.deviation),
            w.sl_level.markovian,
        )
    };
    stdout_write(&text)
}

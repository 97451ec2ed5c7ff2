//! Post-processing of protocol runs: correlations between system and memory,
//! fixed-budget comparisons across `(k, ell)`, and a divisibility witness for
//! the reduced dynamics of the fixed-permutation protocol.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::initial_sl;
use crate::engine::{attach_fresh_machines, run_protocol, Mode, ProtocolTrace};
use crate::error::{invalid, Error, Result};
use crate::majorize::sorted_desc;
use crate::nonadaptive::{fixed_unitary_step, TransitionMatrix};
use crate::spectra::{kron, MemoryConfig};

/// `I(S:L)` in nats for an `SL` distribution indexed `mu * d_l + nu`,
/// computed as the relative entropy of the joint to the product of its
/// marginals so that it stays non-negative up to rounding.
pub fn mutual_information(sl: &[f64], d_s: usize, d_l: usize) -> Result<f64> {
    if d_s == 0 || d_l == 0 || sl.len() != d_s * d_l {
        return Err(invalid(format!(
            "SL vector of length {} does not match {d_s} x {d_l}",
            sl.len()
        )));
    }
    let p_s: Vec<f64> = sl.chunks_exact(d_l).map(|c| c.iter().sum()).collect();
    let mut p_l = vec![0.0; d_l];
    for row in sl.chunks_exact(d_l) {
        for (q, x) in p_l.iter_mut().zip(row) {
            *q += x;
        }
    }
    let mut total = 0.0;
    for (row, ps) in sl.chunks_exact(d_l).zip(&p_s) {
        for (&p, ql) in row.iter().zip(&p_l) {
            if p > 0.0 {
                total += p * (p / (ps * ql)).ln();
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetRow {
    pub k: usize,
    pub l: usize,
    /// Machines consumed.
    pub m: usize,
    pub s_ground: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedConfig {
    pub k: usize,
    pub l: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetGrid {
    /// Sorted by `(k, l, m)`.
    pub rows: Vec<BudgetRow>,
    pub skipped: Vec<SkippedConfig>,
}

impl BudgetGrid {
    /// Rows at budget `m`, in `(k, l)` order.
    pub fn at_budget(&self, m: usize) -> impl Iterator<Item = &BudgetRow> {
        self.rows.iter().filter(move |r| r.m == m)
    }
}

/// Final `S` ground population of every config at every budget in `budgets`
/// that it can spend exactly. Configs refused by the capacity guard are
/// listed in `skipped`; other errors are returned.
pub fn budget_grid(configs: &[MemoryConfig], budgets: &[usize], mode: Mode) -> Result<BudgetGrid> {
    let results: Vec<Result<std::result::Result<Vec<BudgetRow>, SkippedConfig>>> = configs
        .par_iter()
        .map(|c| {
            let wanted: Vec<(usize, usize)> = budgets
                .iter()
                .filter_map(|&m| c.steps_for_budget(m).map(|n| (m, n)))
                .collect();
            let Some(max_steps) = wanted.iter().map(|&(_, n)| n).max() else {
                return Ok(Ok(Vec::new()));
            };
            match run_protocol(c, max_steps, mode) {
                Ok(trace) => Ok(Ok(wanted
                    .iter()
                    .map(|&(m, n)| BudgetRow {
                        k: c.k(),
                        l: c.ell(),
                        m,
                        s_ground: trace.steps[n - 1].s_ground,
                    })
                    .collect())),
                Err(e @ Error::Capacity { .. }) => Ok(Err(SkippedConfig {
                    k: c.k(),
                    l: c.ell(),
                    reason: e.to_string(),
                })),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r? {
            Ok(mut v) => rows.append(&mut v),
            Err(s) => skipped.push(s),
        }
    }
    rows.sort_by_key(|r| (r.k, r.l, r.m));
    if rows.is_empty() {
        warn!("budget grid is empty: no config can spend any of the requested budgets");
    }
    Ok(BudgetGrid { rows, skipped })
}

/// Every `(k, ell)` with `1 <= k <= k_max` and `ell < k`, sharing the spectra
/// and temperature of `base`.
pub fn structure_sweep(base: &MemoryConfig, k_max: usize) -> Result<Vec<MemoryConfig>> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for ell in 0..k {
            out.push(base.with_structure(k, ell)?);
        }
    }
    Ok(out)
}

/// Largest entrywise gap between the direct map and its two-leg composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessLevel {
    pub deviation: f64,
    pub markovian: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub t: usize,
    pub n: usize,
    /// Maps on `S` alone, with `L` re-prepared in its actual marginal.
    pub s_level: WitnessLevel,
    /// Maps on `SL`, which always compose.
    pub sl_level: WitnessLevel,
}

/// Deviation at or below which a composition counts as exact.
pub const DIVISIBILITY_TOL: f64 = 1e-10;

/// Compares `Phi_{n:0}` with `Phi_{n:t} Phi_{t:0}` for the fixed-permutation
/// protocol, both on `S` and on `SL`.
///
/// The `S` map from time `s` feeds each `S` basis state alongside the `L`
/// marginal that the thermal run actually has at time `s`.
pub fn cp_divisibility_witness(config: &MemoryConfig, t: usize, n: usize) -> Result<WitnessReport> {
    if !(1 <= t && t < n) {
        return Err(invalid(format!("need 1 <= t < n, got t={t}, n={n}")));
    }
    let (d_s, d_l, _) = config.joint_dims()?;
    let d_sl = d_s * d_l;

    let run = |mut sl: Vec<f64>, steps: usize| -> Result<Vec<f64>> {
        for _ in 0..steps {
            sl = fixed_unitary_step(&attach_fresh_machines(&sl, config)?);
        }
        Ok(sl)
    };
    let l_marginal = |sl: &[f64]| -> Vec<f64> {
        let mut q = vec![0.0; d_l];
        for row in sl.chunks_exact(d_l) {
            for (a, b) in q.iter_mut().zip(row) {
                *a += b;
            }
        }
        q
    };
    let s_marginal = |sl: &[f64]| -> Vec<f64> { sl.chunks_exact(d_l).map(|c| c.iter().sum()).collect() };
    let basis = |d: usize, i: usize| -> Vec<f64> {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    };

    let sl0 = initial_sl(config)?;
    let sigma_0 = l_marginal(&sl0);
    let sigma_t = l_marginal(&run(sl0, t)?);

    let s_map = |sigma: &[f64], steps: usize| -> Result<TransitionMatrix> {
        let mut cols = Vec::with_capacity(d_s * d_s);
        for i in 0..d_s {
            cols.extend(s_marginal(&run(kron(&basis(d_s, i), sigma), steps)?));
        }
        TransitionMatrix::new(d_s, cols)
    };
    let s_direct = s_map(&sigma_0, n)?;
    let s_composed = s_map(&sigma_t, n - t)?.compose(&s_map(&sigma_0, t)?)?;

    let sl_map = |steps: usize| -> Result<TransitionMatrix> {
        let mut cols = Vec::with_capacity(d_sl * d_sl);
        for j in 0..d_sl {
            cols.extend(run(basis(d_sl, j), steps)?);
        }
        TransitionMatrix::new(d_sl, cols)
    };
    let sl_direct = sl_map(n)?;
    let sl_composed = sl_map(n - t)?.compose(&sl_map(t)?)?;

    let level = |a: &TransitionMatrix, b: &TransitionMatrix| {
        let d = a.dim();
        let deviation = (0..d)
            .flat_map(|c| (0..d).map(move |r| (r, c)))
            .map(|(r, c)| (a.get(r, c) - b.get(r, c)).abs())
            .fold(0.0, f64::max);
        WitnessLevel {
            deviation,
            markovian: deviation <= DIVISIBILITY_TOL,
        }
    };
    Ok(WitnessReport {
        t,
        n,
        s_level: level(&s_direct, &s_composed),
        sl_level: level(&sl_direct, &sl_composed),
    })
}

/// Spectra closer than this entrywise (after sorting) count as equivalent.
pub const SPECTRA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub m: usize,
    pub s_ground_a: f64,
    pub s_ground_b: f64,
    /// The two `SL` states are related by a relabelling.
    pub spectra_equivalent: bool,
}

/// Pairs up records of two traces that used the same number of machines.
pub fn trace_compare(a: &ProtocolTrace, b: &ProtocolTrace) -> Vec<CompareRow> {
    let rows: Vec<CompareRow> = a
        .records()
        .filter_map(|ra| {
            let rb = b.records().find(|rb| rb.m == ra.m)?;
            let spectra_equivalent = ra.sl_probs.len() == rb.sl_probs.len()
                && sorted_desc(&ra.sl_probs)
                    .iter()
                    .zip(sorted_desc(&rb.sl_probs))
                    .all(|(x, y)| (x - y).abs() <= SPECTRA_TOL);
            Some(CompareRow {
                m: ra.m,
                s_ground_a: ra.s_ground,
                s_ground_b: rb.s_ground,
                spectra_equivalent,
            })
        })
        .collect();
    if rows.is_empty() {
        warn!("traces share no machine count; nothing to compare");
    }
    rows
}

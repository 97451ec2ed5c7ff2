//! Infinite-cycle limits.
//!
//! With `x = beta (k - ell) d_M^ell E_max` the coldest reachable target state
//! is geometric with ratio `exp(-x)`. The memory carriers enter only through
//! their dimension, and the reset machines only through their largest gap.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::majorize::{is_majorized_by, sorted_desc};
use crate::spectra::{
    geometric_distribution, kron_power, thermal_distribution, MemoryConfig,
};

/// Memoryless limit with `k` fresh machines per step: the target behaves as
/// if it only saw the largest-gap two-level subspace of each machine.
pub fn markov_asymptotic_state(config: &MemoryConfig) -> Vec<f64> {
    let x = config.beta() * config.k() as f64 * config.e_max();
    geometric_distribution(config.d_s(), x)
}

/// `beta (k - ell) d_M^ell E_max`, which orders configurations by how cold
/// their limit is.
pub fn hierarchy_exponent(config: &MemoryConfig) -> f64 {
    config.beta()
        * config.fresh() as f64
        * (config.d_m() as f64).powi(config.ell() as i32)
        * config.e_max()
}

/// Upper bound on the asymptotic ground population of the target.
pub fn p_star(config: &MemoryConfig) -> f64 {
    let x = hierarchy_exponent(config);
    1.0 / (0..config.d_s())
        .map(|n| (-x * n as f64).exp())
        .sum::<f64>()
}

/// Coldest asymptotic target state.
pub fn rho_star_s(config: &MemoryConfig) -> Vec<f64> {
    geometric_distribution(config.d_s(), hierarchy_exponent(config))
}

/// Coldest asymptotic target state when the memory is an arbitrary
/// `d_l`-dimensional system and the reset part has largest gap `reset_gap`.
pub fn rho_star_s_general(d_s: usize, d_l: usize, reset_gap: f64, beta: f64) -> Result<Vec<f64>> {
    if d_s == 0 || d_l == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    if !(beta.is_finite() && beta > 0.0) || !reset_gap.is_finite() {
        return Err(invalid(format!("bad beta={beta} or gap={reset_gap}")));
    }
    Ok(geometric_distribution(d_s, beta * d_l as f64 * reset_gap))
}

/// Coldest asymptotic `SL` state, in passive order: ratio
/// `exp(-beta (k - ell) E_max)` over all `d_S d_M^ell` levels.
pub fn rho_star_sl(config: &MemoryConfig) -> Result<Vec<f64>> {
    let d_sl = config
        .d_sl()
        .ok_or_else(|| invalid("SL dimension overflows"))?;
    Ok(geometric_distribution(d_sl, reset_exponent(config)))
}

/// `beta (k - ell) E_max`, the exponent seen by `SL` from the reset machines.
pub(crate) fn reset_exponent(config: &MemoryConfig) -> f64 {
    config.beta() * config.fresh() as f64 * config.e_max()
}

/// Thermal initial `SL` distribution `tau_S ⊗ tau_M^{⊗ell}`, lexicographic.
pub fn initial_sl(config: &MemoryConfig) -> Result<Vec<f64>> {
    let s = thermal_distribution(config.system(), config.beta())?;
    let m = thermal_distribution(config.machine(), config.beta())?;
    let l = kron_power(m.probs(), config.ell());
    Ok(crate::spectra::kron(s.probs(), &l))
}

/// Whether the thermal initial `SL` state is majorized by the coldest
/// asymptotic `SL` state, which is when the limits above are attained.
pub fn attainability_check(config: &MemoryConfig) -> Result<bool> {
    let init = sorted_desc(&initial_sl(config)?);
    is_majorized_by(&init, &rho_star_sl(config)?)
}

/// Largest asymptotic population any `d`-dimensional subspace of `SL` can hold.
pub fn subspace_population_bound(config: &MemoryConfig, d: usize) -> Result<f64> {
    let rho = rho_star_sl(config)?;
    if d == 0 || d > rho.len() {
        return Err(invalid(format!(
            "subspace dimension {d} outside 1..={}",
            rho.len()
        )));
    }
    if d == rho.len() {
        return Ok(1.0);
    }
    Ok(rho[..d].iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hierarchy {
    /// The first config's limit is majorized by the second's.
    AMajorizedByB,
    BMajorizedByA,
    Equal,
}

/// Relative tolerance under which two exponents count as equal.
pub const HIERARCHY_REL_TOL: f64 = 1e-12;

/// Orders two configurations by the coldness of their asymptotic target
/// states. Only meaningful for targets of equal dimension.
pub fn hierarchy_compare(a: &MemoryConfig, b: &MemoryConfig) -> Hierarchy {
    let (xa, xb) = (hierarchy_exponent(a), hierarchy_exponent(b));
    if (xa - xb).abs() <= HIERARCHY_REL_TOL * xa.abs().max(xb.abs()) {
        return Hierarchy::Equal;
    }
    match xa.partial_cmp(&xb) {
        Some(Ordering::Less) => Hierarchy::AMajorizedByB,
        _ => Hierarchy::BMajorizedByA,
    }
}

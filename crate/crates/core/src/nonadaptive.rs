//! State-independent cooling: one fixed `SLR` permutation repeated forever.
//!
//! The permutation swaps `|r, top⟩ ↔ |r+1, 0⟩` for neighbouring `SL` levels,
//! where `0` and `top` are the reset states of lowest and highest energy
//! (gap `(k - ell) E_max`). Tracing out `R` turns it into a fixed
//! column-stochastic matrix on `SL`, so the protocol is a time-homogeneous
//! Markov chain `p' = T p` whose fixed point is the coldest asymptotic `SL`
//! state.

use std::f64::consts::PI;

use serde::Serialize;

use crate::asymptotics::{initial_sl, reset_exponent, rho_star_sl};
use crate::engine::{JointDistribution, ProtocolTrace};
use crate::error::{invalid, Result};
use crate::spectra::MemoryConfig;

/// Column-sum tolerance for transition matrices.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Square column-stochastic matrix, column-major, acting as `p' = T p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// `entries` is column-major.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(invalid(format!(
                "a {dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|x| x.is_nan() || *x < 0.0) {
            return Err(invalid("transition matrix has a negative or NaN entry"));
        }
        for (c, col) in entries.chunks_exact(dim).enumerate() {
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(invalid(format!("column {c} sums to {s}")));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[col * self.dim + row]
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.entries[col * self.dim..(col + 1) * self.dim]
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        debug_assert_eq!(p.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (col, &x) in self.entries.chunks_exact(self.dim).zip(p) {
            if x == 0.0 {
                continue;
            }
            for (o, t) in out.iter_mut().zip(col) {
                *o += t * x;
            }
        }
        out
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &TransitionMatrix) -> Result<TransitionMatrix> {
        if self.dim != other.dim {
            return Err(invalid("cannot compose matrices of different size"));
        }
        let entries = other
            .entries
            .chunks_exact(other.dim)
            .flat_map(|col| self.apply(col))
            .collect();
        Ok(TransitionMatrix {
            dim: self.dim,
            entries,
        })
    }

    /// `alpha * self + (1 - alpha) * I`.
    pub fn lazy(&self, alpha: f64) -> Result<TransitionMatrix> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("mixing weight {alpha} outside [0, 1]")));
        }
        let mut entries: Vec<f64> = self.entries.iter().map(|x| alpha * x).collect();
        for i in 0..self.dim {
            entries[i * self.dim + i] += 1.0 - alpha;
        }
        TransitionMatrix::new(self.dim, entries)
    }
}

/// Nearest-neighbour exchange matrix on a `dim`-level ladder with gap `eps`:
/// mass moves down with weight 1 and up with weight `exp(-beta eps)`.
pub fn build_v_matrix(dim: usize, eps: f64, beta: f64) -> Result<TransitionMatrix> {
    if dim < 2 {
        return Err(invalid("exchange matrix needs at least 2 levels"));
    }
    if !(eps > 0.0 && eps.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("need eps > 0 and beta > 0, got eps={eps} beta={beta}")));
    }
    let boltz = (-beta * eps).exp();
    let norm = 1.0 / (1.0 + boltz);
    let mut entries = vec![0.0; dim * dim];
    let mut set = |row: usize, col: usize, v: f64| entries[col * dim + row] = v * norm;
    set(0, 0, 1.0);
    set(dim - 1, dim - 1, boltz);
    for r in 0..dim - 1 {
        set(r, r + 1, 1.0);
        set(r + 1, r, boltz);
    }
    TransitionMatrix::new(dim, entries)
}

/// Probability that the fresh machines sit in their lowest or highest joint
/// energy state, which is the part of `R` the fixed permutation touches.
pub fn alpha_kl(config: &MemoryConfig) -> Result<f64> {
    let z_m: f64 = config
        .machine()
        .levels()
        .iter()
        .map(|e| (-config.beta() * e).exp())
        .sum();
    let z_r = z_m.powi(config.fresh() as i32);
    Ok((1.0 + (-reset_exponent(config)).exp()) / z_r)
}

/// `T = alpha V((k - ell) E_max) + (1 - alpha) I` on `SL`.
pub fn build_transition(config: &MemoryConfig) -> Result<TransitionMatrix> {
    let d_sl = config
        .d_sl()
        .ok_or_else(|| invalid("SL dimension overflows"))?;
    let v = build_v_matrix(d_sl, config.fresh() as f64 * config.e_max(), config.beta())?;
    v.lazy(alpha_kl(config)?)
}

/// Eigenvalues `lambda_q` of `T` in closed form, `q = 0..D`.
pub fn chain_spectrum(config: &MemoryConfig) -> Result<Vec<f64>> {
    let d_sl = config
        .d_sl()
        .ok_or_else(|| invalid("SL dimension overflows"))?;
    let alpha = alpha_kl(config)?;
    let x = reset_exponent(config);
    let pref = 2.0 * (-x / 2.0).exp() / (1.0 + (-x).exp());
    Ok((0..d_sl)
        .map(|q| {
            let nu = if q == 0 {
                1.0
            } else {
                pref * (q as f64 * PI / d_sl as f64).cos()
            };
            alpha * nu + (1.0 - alpha)
        })
        .collect())
}

/// `lambda_0 - lambda_1` from the closed-form spectrum.
pub fn spectral_gap(config: &MemoryConfig) -> Result<f64> {
    let spec = chain_spectrum(config)?;
    Ok(spec[0] - spec[1])
}

/// Lower bound `(1 - exp(-x/2))^2 / Z_M^(k - ell)` on the spectral gap,
/// `x = beta (k - ell) E_max`.
pub fn spectral_gap_bound(config: &MemoryConfig) -> Result<f64> {
    let x = reset_exponent(config);
    let z_m: f64 = thermal_weights_sum(config);
    Ok((1.0 - (-x / 2.0).exp()).powi(2) / z_m.powi(config.fresh() as i32))
}

fn thermal_weights_sum(config: &MemoryConfig) -> f64 {
    config
        .machine()
        .levels()
        .iter()
        .map(|e| (-config.beta() * e).exp())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingTimeBound {
    pub steps: f64,
    /// The raw bound was negative and has been replaced by 0.
    pub clamped: bool,
}

/// Upper bound on the steps needed to come within total-variation distance
/// `eta` of the fixed point, using the spectral-gap lower bound and the
/// smallest fixed-point entry `p*_0 exp(-x (D - 1))`.
pub fn mixing_time_bound(config: &MemoryConfig, eta: f64) -> Result<MixingTimeBound> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta must lie in (0, 1), got {eta}")));
    }
    let rho = rho_star_sl(config)?;
    let x = reset_exponent(config);
    let p_min = rho[0] * (-x * (rho.len() - 1) as f64).exp();
    let raw = (1.0 / (eta * p_min)).ln() / spectral_gap_bound(config)?;
    Ok(if raw < 0.0 {
        MixingTimeBound {
            steps: 0.0,
            clamped: true,
        }
    } else {
        MixingTimeBound {
            steps: raw,
            clamped: false,
        }
    })
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub probs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Successive-iterate distance at which power iteration stops.
pub const FIXED_POINT_TOL: f64 = 1e-13;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;

/// Power iteration from `start` until successive iterates are within
/// [`FIXED_POINT_TOL`] in total variation.
pub fn fixed_point(t: &TransitionMatrix, start: &[f64]) -> FixedPoint {
    let mut p = start.to_vec();
    for it in 1..=FIXED_POINT_MAX_ITER {
        let next = t.apply(&p);
        let d = total_variation(&next, &p);
        p = next;
        if d <= FIXED_POINT_TOL {
            return FixedPoint {
                probs: p,
                iterations: it,
                converged: true,
            };
        }
    }
    FixedPoint {
        probs: p,
        iterations: FIXED_POINT_MAX_ITER,
        converged: false,
    }
}

/// The fixed `SLR` permutation itself, applied to a joint state, returning
/// the `SL` marginal. Equivalent to one application of [`build_transition`].
pub fn fixed_unitary_step(joint: &JointDistribution) -> Vec<f64> {
    let [_, _, d_r] = joint.dims();
    let d_sl = joint.d_sl();
    let top = d_r - 1;
    let p = joint.probs();
    let mut out = p.to_vec();
    for r in 0..d_sl - 1 {
        let a = r * d_r + top;
        let b = (r + 1) * d_r;
        out.swap(a, b);
    }
    out.chunks_exact(d_r).map(|c| c.iter().sum()).collect()
}

/// Runs the chain from the thermal initial `SL` state. The `S` ground
/// population is read in lexicographic `(mu, nu)` labelling.
pub fn iterate_chain(config: &MemoryConfig, steps: usize) -> Result<ProtocolTrace> {
    if steps == 0 {
        return Err(invalid("a chain run needs at least one step"));
    }
    config.joint_dims()?;
    let t = build_transition(config)?;
    let mut p = initial_sl(config)?;
    let mut trace = ProtocolTrace::start(config, p.clone())?;
    for _ in 0..steps {
        p = t.apply(&p);
        trace.push(config, p.clone())?;
    }
    Ok(trace)
}

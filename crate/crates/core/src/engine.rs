//! Adaptive cooling protocols on the Markovian embedding.
//!
//! One step attaches `k - ell` fresh thermal machines `R` to the current
//! `SL` distribution, permutes the joint `SLR` entries, and traces out `R`.
//! The permutations used here all start from the same descending sort of the
//! joint entries and differ only in which `SL` label each block of `d_R`
//! consecutive sorted entries is sent to.

use serde::Serialize;

use crate::analysis::mutual_information;
use crate::error::{invalid, Result};
use crate::majorize::{block_sums, sorted_desc};
use crate::spectra::{check_normalized, kron, kron_power, sl_energy_order, thermal_distribution, MemoryConfig};
use crate::NORM_TOL;

/// Diagonal `SLR` state, flat index `mu * d_L * d_R + nu * d_R + omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    probs: Vec<f64>,
    d_s: usize,
    d_l: usize,
    d_r: usize,
}

impl JointDistribution {
    pub fn new(probs: Vec<f64>, d_s: usize, d_l: usize, d_r: usize) -> Result<Self> {
        if d_s * d_l * d_r != probs.len() {
            return Err(invalid(format!(
                "dims [{d_s}, {d_l}, {d_r}] do not match {} entries",
                probs.len()
            )));
        }
        if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(invalid("joint distribution has a negative or NaN entry"));
        }
        check_normalized(&probs, "building a joint distribution")?;
        Ok(Self { probs, d_s, d_l, d_r })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.d_s, self.d_l, self.d_r]
    }

    pub fn d_sl(&self) -> usize {
        self.d_s * self.d_l
    }

    /// Trace out `R`.
    pub fn sl_marginal(&self) -> Vec<f64> {
        block_sums(&self.probs, self.d_r)
    }
}

/// Thermal distribution of the `k - ell` fresh machines, lexicographic.
pub fn reset_distribution(config: &MemoryConfig) -> Result<Vec<f64>> {
    let m = thermal_distribution(config.machine(), config.beta())?;
    Ok(kron_power(m.probs(), config.fresh()))
}

/// `sl ⊗ tau_M^{⊗(k - ell)}`.
pub fn attach_fresh_machines(sl: &[f64], config: &MemoryConfig) -> Result<JointDistribution> {
    let (d_s, d_l, d_r) = config.joint_dims()?;
    if sl.len() != d_s * d_l {
        return Err(invalid(format!(
            "SL distribution has {} entries, config needs {}",
            sl.len(),
            d_s * d_l
        )));
    }
    JointDistribution::new(kron(sl, &reset_distribution(config)?), d_s, d_l, d_r)
}

/// Step-wise optimal update: the `r`-th largest joint entry goes to flat
/// index `r`, which cools `S` first, then `L` given `S`, then dumps what is
/// left into `R`. Returns the new `SL` distribution.
pub fn stepwise_optimal_step(joint: &JointDistribution) -> Vec<f64> {
    block_sums(&sorted_desc(&joint.probs), joint.d_r)
}

/// Global-basis update: the `xi`-th block of `d_R` sorted entries lands on
/// the `xi`-th lowest-energy `SL` state, `sl_order[xi]`.
pub fn global_basis_step(joint: &JointDistribution, sl_order: &[usize]) -> Result<Vec<f64>> {
    let blocks = stepwise_optimal_step(joint);
    scatter(&blocks, sl_order)
}

fn scatter(blocks: &[f64], order: &[usize]) -> Result<Vec<f64>> {
    if order.len() != blocks.len() {
        return Err(invalid(format!(
            "SL order has {} entries, state has {}",
            order.len(),
            blocks.len()
        )));
    }
    let mut out = vec![f64::NAN; blocks.len()];
    for (&slot, &b) in order.iter().zip(blocks) {
        if slot >= out.len() || !out[slot].is_nan() {
            return Err(invalid("SL order is not a permutation"));
        }
        out[slot] = b;
    }
    Ok(out)
}

/// Sorts an `SL` distribution descending into lexicographic `(mu, nu)` order,
/// which makes `S` as cold as `SL` allows.
pub fn final_local_sort(sl: &[f64]) -> Vec<f64> {
    sorted_desc(sl)
}

/// Applies an arbitrary `SLR` permutation (entry `i` moves to `perm[i]`)
/// and returns the `SL` marginal.
pub fn permutation_step(joint: &JointDistribution, perm: &[usize]) -> Result<Vec<f64>> {
    let moved = scatter(&joint.probs, perm)?;
    Ok(block_sums(&moved, joint.d_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Sort into the local `(mu, nu)` basis at every step.
    Stepwise,
    /// Sort into the global `SL` energy basis at every step.
    Global,
    /// As `Global`, plus a local sort after the last step.
    GlobalWithFinalSort,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    /// Step index; 0 is the thermal initial state.
    pub n: usize,
    /// Machines used so far.
    pub m: usize,
    pub s_ground: f64,
    /// `I(S:L)` in nats.
    pub mutual_info: f64,
    pub sl_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub d_s: usize,
    pub d_l: usize,
    pub initial: StepRecord,
    /// Records for steps `1..=n`.
    pub steps: Vec<StepRecord>,
}

impl ProtocolTrace {
    pub(crate) fn start(config: &MemoryConfig, sl: Vec<f64>) -> Result<Self> {
        let d_s = config.d_s();
        let d_l = sl.len() / d_s;
        let initial = make_record(0, config.machines_used(0), sl, d_s, d_l)?;
        Ok(Self {
            d_s,
            d_l,
            initial,
            steps: Vec::new(),
        })
    }

    pub(crate) fn push(&mut self, config: &MemoryConfig, sl: Vec<f64>) -> Result<()> {
        let n = self.steps.len() + 1;
        check_normalized(&sl, &format!("step {n}"))?;
        let rec = make_record(n, config.machines_used(n), sl, self.d_s, self.d_l)?;
        self.steps.push(rec);
        Ok(())
    }

    pub fn last(&self) -> &StepRecord {
        self.steps.last().unwrap_or(&self.initial)
    }

    pub fn final_s_ground(&self) -> f64 {
        self.last().s_ground
    }

    /// Initial record followed by every step.
    pub fn records(&self) -> impl Iterator<Item = &StepRecord> {
        std::iter::once(&self.initial).chain(&self.steps)
    }
}

fn make_record(n: usize, m: usize, sl: Vec<f64>, d_s: usize, d_l: usize) -> Result<StepRecord> {
    Ok(StepRecord {
        n,
        m,
        s_ground: sl[..d_l].iter().sum(),
        mutual_info: mutual_information(&sl, d_s, d_l)?,
        sl_probs: sl,
    })
}

/// Runs `steps` collisions from the thermal initial state.
pub fn run_protocol(config: &MemoryConfig, steps: usize, mode: Mode) -> Result<ProtocolTrace> {
    if steps == 0 {
        return Err(invalid("a protocol run needs at least one step"));
    }
    let (d_s, d_l, d_r) = config.joint_dims()?;
    let reset = reset_distribution(config)?;
    let order = match mode {
        Mode::Stepwise => None,
        Mode::Global | Mode::GlobalWithFinalSort => Some(sl_energy_order(config)?),
    };

    let mut sl = crate::asymptotics::initial_sl(config)?;
    let mut trace = ProtocolTrace::start(config, sl.clone())?;
    let mut joint = Vec::with_capacity(d_s * d_l * d_r);
    for n in 1..=steps {
        joint.clear();
        for &x in &sl {
            joint.extend(reset.iter().map(|&y| x * y));
        }
        joint.sort_by(|a, b| b.total_cmp(a));
        let blocks = block_sums(&joint, d_r);
        sl = match &order {
            None => blocks,
            Some(order) => {
                let placed = scatter(&blocks, order)?;
                if mode == Mode::GlobalWithFinalSort && n == steps {
                    final_local_sort(&placed)
                } else {
                    placed
                }
            }
        };
        trace.push(config, sl.clone())?;
    }
    debug_assert!(trace.steps.iter().all(|r| (r.sl_probs.iter().sum::<f64>() - 1.0).abs() <= NORM_TOL));
    Ok(trace)
}

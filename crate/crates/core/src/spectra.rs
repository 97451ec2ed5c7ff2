//! Energy spectra, thermal distributions and composite-basis bookkeeping.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::{MAX_JOINT_DIM, NORM_TOL};

/// Energy levels of one subsystem, sorted non-decreasing with ground energy 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(invalid(format!(
                "a spectrum needs at least 2 levels, got {}",
                levels.len()
            )));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(invalid("energy levels must be finite"));
        }
        if levels[0] != 0.0 {
            return Err(invalid(format!(
                "ground energy must be 0, got {}",
                levels[0]
            )));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("energy levels must be sorted non-decreasing"));
        }
        Ok(Self { levels })
    }

    /// Two-level spectrum `[0, gap]`.
    pub fn qubit(gap: f64) -> Result<Self> {
        Self::new(vec![0.0, gap])
    }

    /// Evenly spaced ladder `0, gap, 2 gap, ...` with `dim` levels.
    pub fn ladder(dim: usize, gap: f64) -> Result<Self> {
        Self::new((0..dim).map(|n| n as f64 * gap).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Top level, which is also the largest gap since the ground sits at 0.
    pub fn max_energy(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }
}

/// A collision-model scenario: spectra of target and machines, `k` machines
/// per collision of which `ell` carry memory, and inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryConfig {
    system: EnergySpectrum,
    machine: EnergySpectrum,
    k: usize,
    ell: usize,
    beta: f64,
}

impl MemoryConfig {
    pub fn new(
        system: EnergySpectrum,
        machine: EnergySpectrum,
        k: usize,
        ell: usize,
        beta: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if ell >= k {
            return Err(invalid(format!("need 0 <= l < k, got k={k} l={ell}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self {
            system,
            machine,
            k,
            ell,
            beta,
        })
    }

    /// Same spectra and temperature with a different memory structure.
    pub fn with_structure(&self, k: usize, ell: usize) -> Result<Self> {
        Self::new(self.system.clone(), self.machine.clone(), k, ell, self.beta)
    }

    pub fn system(&self) -> &EnergySpectrum {
        &self.system
    }

    pub fn machine(&self) -> &EnergySpectrum {
        &self.machine
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d_s(&self) -> usize {
        self.system.dim()
    }

    pub fn d_m(&self) -> usize {
        self.machine.dim()
    }

    /// Number of fresh machines per step, `k - ell`.
    pub fn fresh(&self) -> usize {
        self.k - self.ell
    }

    /// Largest machine gap.
    pub fn e_max(&self) -> f64 {
        self.machine.max_energy()
    }

    /// `d_M^ell`, or `None` on overflow.
    pub fn d_l(&self) -> Option<usize> {
        checked_pow(self.d_m(), self.ell)
    }

    /// `d_M^(k - ell)`, or `None` on overflow.
    pub fn d_r(&self) -> Option<usize> {
        checked_pow(self.d_m(), self.fresh())
    }

    /// `d_S * d_M^ell`, or `None` on overflow.
    pub fn d_sl(&self) -> Option<usize> {
        self.d_l().and_then(|dl| dl.checked_mul(self.d_s()))
    }

    /// Machines consumed after `n` steps: `k + (n - 1)(k - ell)`.
    ///
    /// `n = 0` gives `ell`, the carriers already folded into `SL`.
    pub fn machines_used(&self, n: usize) -> usize {
        self.ell + n * self.fresh()
    }

    /// Step count that exhausts exactly `m` machines, if there is one.
    pub fn steps_for_budget(&self, m: usize) -> Option<usize> {
        if m < self.k {
            return None;
        }
        let extra = m - self.k;
        extra.is_multiple_of(self.fresh()).then(|| extra / self.fresh() + 1)
    }

    /// Checks that the full `SLR` space fits under [`MAX_JOINT_DIM`] and
    /// returns `(d_S, d_L, d_R)`.
    pub fn joint_dims(&self) -> Result<(usize, usize, usize)> {
        let needed = (self.d_s() as u128).saturating_mul(
            (self.d_m() as u128)
                .checked_pow(self.k as u32)
                .unwrap_or(u128::MAX),
        );
        if needed > MAX_JOINT_DIM {
            return Err(Error::Capacity {
                what: "joint SLR distribution",
                needed,
                limit: MAX_JOINT_DIM,
            });
        }
        // Both fit since their product with d_S does.
        Ok((self.d_s(), self.d_l().unwrap(), self.d_r().unwrap()))
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

/// A probability vector over a labeled product basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalState {
    probs: Vec<f64>,
    dims: Vec<usize>,
}

impl DiagonalState {
    pub fn new(probs: Vec<f64>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(invalid("dims must be non-empty and positive"));
        }
        let expected = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| invalid("product of dims overflows"))?;
        if expected != probs.len() {
            return Err(invalid(format!(
                "dims {:?} describe {} entries but {} were given",
                dims,
                expected,
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(invalid(format!("probability {p} is not a non-negative number")));
        }
        check_normalized(&probs, "constructing a diagonal state")?;
        Ok(Self { probs, dims })
    }

    /// Single-factor state.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let n = probs.len();
        Self::new(probs, vec![n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Reduced distribution on one factor.
    pub fn marginal(&self, factor: usize) -> Result<Vec<f64>> {
        let d = *self
            .dims
            .get(factor)
            .ok_or_else(|| invalid(format!("no factor {factor} in dims {:?}", self.dims)))?;
        let inner: usize = self.dims[factor + 1..].iter().product();
        let mut out = vec![0.0; d];
        for (idx, p) in self.probs.iter().enumerate() {
            out[(idx / inner) % d] += p;
        }
        Ok(out)
    }
}

/// Errors if `probs` does not sum to 1 within [`NORM_TOL`].
pub fn check_normalized(probs: &[f64], context: &str) -> Result<()> {
    let drift = (probs.iter().sum::<f64>() - 1.0).abs();
    if drift > NORM_TOL || drift.is_nan() {
        return Err(Error::Normalization {
            drift,
            context: context.to_string(),
        });
    }
    Ok(())
}

/// Gibbs distribution `exp(-beta E_i) / Z` over the levels of `spectrum`.
pub fn thermal_distribution(spectrum: &EnergySpectrum, beta: f64) -> Result<DiagonalState> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid(format!("beta must be positive and finite, got {beta}")));
    }
    let weights: Vec<f64> = spectrum.levels().iter().map(|e| (-beta * e).exp()).collect();
    let z: f64 = weights.iter().sum();
    DiagonalState::from_probs(weights.into_iter().map(|w| w / z).collect())
}

/// Geometric sum `sum_{n<d} exp(-beta n gap)`, the partition function of an
/// evenly spaced ladder that only remembers one gap.
pub fn quasi_partition(d: usize, beta: f64, gap: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid("quasi-partition needs d >= 1"));
    }
    if !(beta.is_finite() && beta > 0.0) || !gap.is_finite() {
        return Err(invalid(format!("bad beta={beta} or gap={gap}")));
    }
    Ok((0..d).map(|n| (-beta * n as f64 * gap).exp()).sum())
}

/// Normalized geometric weights `exp(-x n) / sum` for `n < d`.
pub(crate) fn geometric_distribution(d: usize, x: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|n| (-x * n as f64).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// Tensor product of diagonal states in lexicographic order.
pub fn product_distribution(factors: &[DiagonalState]) -> Result<DiagonalState> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| invalid("product of an empty factor list"))?;
    let mut probs = first.probs.clone();
    let mut dims = first.dims.clone();
    for f in rest {
        probs = kron(&probs, &f.probs);
        dims.extend_from_slice(&f.dims);
    }
    DiagonalState::new(probs, dims)
}

pub(crate) fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// `times`-fold product of one distribution; the empty product is `[1.0]`.
pub(crate) fn kron_power(p: &[f64], times: usize) -> Vec<f64> {
    (0..times).fold(vec![1.0], |acc, _| kron(&acc, p))
}

/// Total energy of every `SL` product state, in lexicographic order.
pub fn sl_energies(config: &MemoryConfig) -> Result<Vec<f64>> {
    let d_sl = config
        .d_sl()
        .ok_or_else(|| invalid("SL dimension overflows"))?;
    let mut energies = config.system().levels().to_vec();
    for _ in 0..config.ell() {
        let mut next = Vec::with_capacity(energies.len() * config.d_m());
        for &e in &energies {
            next.extend(config.machine().levels().iter().map(|&m| e + m));
        }
        energies = next;
    }
    debug_assert_eq!(energies.len(), d_sl);
    Ok(energies)
}

/// `SL` product-basis indices sorted by total energy; ties keep ascending
/// index order.
pub fn sl_energy_order(config: &MemoryConfig) -> Result<Vec<usize>> {
    let energies = sl_energies(config)?;
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    Ok(order)
}

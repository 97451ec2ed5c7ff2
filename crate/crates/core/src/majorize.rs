//! Majorization: dominance checks, the coldest reduced marginal reachable by
//! reordering a bipartite distribution, and Schur-monotone coolness metrics.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectra::{DiagonalState, EnergySpectrum};

/// Slack on partial-sum comparisons. Permutation protocols only rearrange
/// entries, so this only has to absorb rounding.
pub const MAJORIZATION_TOL: f64 = 1e-12;

/// Copy of `p` sorted non-increasing.
pub fn sorted_desc(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `true` when `a` is majorized by `b` (`a ≺ b`): every descending partial
/// sum of `b` is at least the matching one of `a`.
pub fn is_majorized_by(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "cannot compare vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (a, b) = (sorted_desc(a), sorted_desc(b));
    let (mut sa, mut sb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        sa += x;
        sb += y;
        if sa > sb + MAJORIZATION_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coldest marginal on the first factor of a bipartite distribution that any
/// reordering of its entries can produce.
///
/// Entries are sorted descending and consecutive runs of `d_B` are summed,
/// so the result is non-increasing and its `i`-th partial sum is the sum of
/// the `(i + 1) d_B` largest joint entries.
pub fn optimal_marginal(joint: &DiagonalState) -> Result<Vec<f64>> {
    let &[_, d_b] = joint.dims() else {
        return Err(invalid(format!(
            "optimal marginal needs a bipartite state, got dims {:?}",
            joint.dims()
        )));
    };
    Ok(block_sums(&sorted_desc(joint.probs()), d_b))
}

pub(crate) fn block_sums(p: &[f64], block: usize) -> Vec<f64> {
    p.chunks_exact(block).map(|c| c.iter().sum()).collect()
}

/// Figures of merit for how cold a distribution is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricBundle {
    pub ground_population: f64,
    /// Nats.
    pub shannon_entropy: f64,
    pub purity: f64,
    pub mean_energy: f64,
}

pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn coolness_metrics(p: &[f64], spectrum: &EnergySpectrum) -> Result<MetricBundle> {
    if p.len() != spectrum.dim() {
        return Err(invalid(format!(
            "distribution has {} entries but spectrum has {} levels",
            p.len(),
            spectrum.dim()
        )));
    }
    Ok(MetricBundle {
        ground_population: p[0],
        shannon_entropy: shannon_entropy(p),
        purity: p.iter().map(|x| x * x).sum(),
        mean_energy: p.iter().zip(spectrum.levels()).map(|(x, e)| x * e).sum(),
    })
}

//! k-uniformity and AME verification.
//!
//! A state is k-uniform when every k-party marginal is maximally mixed,
//! equivalently when every scaled d^k × d^(N−k) reshaping A satisfies
//! A A† = I. The deviation reported per bipartition is ‖A A† − I‖_max.

use serde::{Deserialize, Serialize};

use crate::error::{MdentError, Result};
use crate::state::{reshape_bipartition, State};

/// Default tolerance when checking exact constructions.
pub const DEFAULT_EXACT_TOL: f64 = 1e-8;
/// Default tolerance when checking numerically generated states.
pub const DEFAULT_GENERATED_TOL: f64 = 1e-6;

/// All k-subsets of {0,…,n−1} in lexicographic order.
pub fn all_k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        // Advance to the next combination in lex order.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// The bipartitions checked for k-uniformity, in lexicographic order.
///
/// For k < n/2 every k-subset appears. For the balanced case k = n/2 a
/// subset and its complement give equivalent isometry conditions, so only
/// subsets containing party 0 are kept.
pub fn bipartitions(n: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || 2 * k > n {
        return Err(MdentError::InvalidParameter(format!(
            "uniformity order k must satisfy 1 ≤ k ≤ N/2, got k={} with N={}",
            k, n
        )));
    }
    let all = all_k_subsets(n, k);
    if 2 * k == n {
        Ok(all.into_iter().filter(|s| s[0] == 0).collect())
    } else {
        Ok(all)
    }
}

/// ‖A A† − I‖_max for the scaled reshaping with `subset` on the row side.
pub fn bipartition_deviation(state: &State, subset: &[usize]) -> Result<f64> {
    let a = reshape_bipartition(state, subset)?;
    let gram = a.matrix() * a.matrix().adjoint();
    let m = gram.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - crate::C64::new(target, 0.0)).norm());
        }
    }
    Ok(dev)
}

/// Deviation of a single bipartition in a uniformity report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BipartitionEntry {
    pub subset: Vec<usize>,
    pub deviation: f64,
}

/// Result of a k-uniformity check over the whole quotient set of
/// bipartitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityReport {
    pub k: usize,
    pub tol: f64,
    pub max_deviation: f64,
    pub is_uniform: bool,
    pub bipartitions: Vec<BipartitionEntry>,
}

/// Checks k-uniformity of a state at the given tolerance.
pub fn check_k_uniform(state: &State, k: usize, tol: f64) -> Result<UniformityReport> {
    let subsets = bipartitions(state.n_parties(), k)?;
    let mut entries = Vec::with_capacity(subsets.len());
    let mut max_dev: f64 = 0.0;
    for subset in subsets {
        let deviation = bipartition_deviation(state, &subset)?;
        max_dev = max_dev.max(deviation);
        entries.push(BipartitionEntry { subset, deviation });
    }
    Ok(UniformityReport {
        k,
        tol,
        max_deviation: max_dev,
        is_uniform: max_dev <= tol,
        bipartitions: entries,
    })
}

/// Largest bipartition deviation over the quotient set.
pub fn k_uniformity_deviation(state: &State, k: usize) -> Result<f64> {
    Ok(check_k_uniform(state, k, DEFAULT_EXACT_TOL)?.max_deviation)
}

/// A state of N parties is absolutely maximally entangled when it is
/// ⌊N/2⌋-uniform.
pub fn is_ame(state: &State, tol: f64) -> Result<bool> {
    let n = state.n_parties();
    if n < 2 {
        return Err(MdentError::InvalidParameter(
            "AME needs at least two parties".into(),
        ));
    }
    Ok(check_k_uniform(state, n / 2, tol)?.is_uniform)
}

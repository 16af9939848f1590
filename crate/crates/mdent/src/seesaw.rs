//! S_∞^min and the geometric measure of entanglement via the seesaw over
//! closest product states.
//!
//! λ = max |⟨Ψ|φ₁⊗…⊗φ_N⟩|² over unit factors; each party update replaces
//! one factor with the normalized partial contraction of the state against
//! the others, which is the exact per-factor maximizer, so λ never
//! decreases. S_∞^min = −ln λ and E_G = 1 − λ.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{MdentError, Result};
use crate::random::{random_unit_vector, rng_from_seed, sub_seeds, DEFAULT_SEED};
use crate::state::State;
use crate::C64;

/// Norm below which a partial contraction counts as zero and the factor is
/// re-randomized instead of normalized.
const ZERO_CONTRACTION_TOL: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct SeesawConfig {
    pub restarts: usize,
    /// Overlap² gain per cycle below which a restart terminates.
    pub gain_tol: f64,
    pub max_cycles: usize,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            restarts: 50,
            gain_tol: 1e-12,
            max_cycles: 10_000,
            seed: DEFAULT_SEED,
        }
    }
}

/// A fully separable state as a list of unit factors.
#[derive(Debug, Clone)]
pub struct ProductState {
    pub factors: Vec<DVector<C64>>,
}

impl ProductState {
    pub fn new(factors: Vec<DVector<C64>>) -> Result<ProductState> {
        for (i, f) in factors.iter().enumerate() {
            if (f.norm() - 1.0).abs() > 1e-12 {
                return Err(MdentError::InvalidState(format!(
                    "factor {} is not normalized",
                    i
                )));
            }
        }
        Ok(ProductState { factors })
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// Best overlap² found.
    pub lambda: f64,
    /// −ln λ.
    pub s_inf_min: f64,
    /// Geometric measure of entanglement 1 − λ.
    pub gme: f64,
    /// The optimizing product state.
    pub prod: ProductState,
    pub best_restart: usize,
    /// Overlap² per cycle of the best restart.
    pub trace: Vec<f64>,
    /// How often a zero partial contraction forced a re-randomized factor.
    pub zero_resets: usize,
}

fn check_shapes(state: &State, prod: &ProductState) -> Result<()> {
    if prod.factors.len() != state.n_parties() {
        return Err(MdentError::DimensionMismatch(format!(
            "expected {} factors, got {}",
            state.n_parties(),
            prod.factors.len()
        )));
    }
    for (i, f) in prod.factors.iter().enumerate() {
        if f.len() != state.local_dim() {
            return Err(MdentError::DimensionMismatch(format!(
                "factor {} has length {}, expected {}",
                i,
                f.len(),
                state.local_dim()
            )));
        }
    }
    Ok(())
}

/// ⟨Ψ|φ₁⊗…⊗φ_N⟩, conjugate-linear in the state.
pub fn product_overlap(state: &State, prod: &ProductState) -> Result<C64> {
    check_shapes(state, prod)?;
    let n = state.n_parties();
    let mut acc = C64::new(0.0, 0.0);
    for flat in 0..state.dim() {
        let mut term = state.amplitude(flat).conj();
        for (j, f) in prod.factors.iter().enumerate().take(n) {
            term *= f[state.digit(flat, j)];
        }
        acc += term;
    }
    Ok(acc)
}

/// Partial contraction ⟨φ₁…φ_{i−1}φ_{i+1}…φ_N|Ψ⟩ as a vector on party i.
fn contract_except(state: &State, prod: &ProductState, i: usize) -> DVector<C64> {
    let d = state.local_dim();
    let n = state.n_parties();
    let mut v = DVector::from_element(d, C64::new(0.0, 0.0));
    for flat in 0..state.dim() {
        let mut term = state.amplitude(flat);
        for j in 0..n {
            if j != i {
                term *= prod.factors[j][state.digit(flat, j)].conj();
            }
        }
        v[state.digit(flat, i)] += term;
    }
    v
}

/// Replaces factor i with its exact maximizer given the others.
///
/// Returns the updated product, the new overlap² (‖contraction‖²), and
/// whether a zero contraction forced a random factor instead.
pub fn seesaw_update<R: rand::Rng + ?Sized>(
    state: &State,
    prod: &ProductState,
    i: usize,
    rng: &mut R,
) -> Result<(ProductState, f64, bool)> {
    check_shapes(state, prod)?;
    if i >= state.n_parties() {
        return Err(MdentError::InvalidParameter(format!(
            "party index {} out of range",
            i
        )));
    }
    let v = contract_except(state, prod, i);
    let norm = v.norm();
    let mut next = prod.clone();
    if norm < ZERO_CONTRACTION_TOL {
        next.factors[i] = random_unit_vector(state.local_dim(), rng);
        let lam = product_overlap(state, &next)?.norm_sqr();
        return Ok((next, lam, true));
    }
    next.factors[i] = v / C64::new(norm, 0.0);
    Ok((next, norm * norm, false))
}

fn basis_product_at_peak(state: &State) -> ProductState {
    // Computational-basis product at the largest weight: guarantees the
    // feasible value λ ≥ max_j p_j deterministically.
    let probs = state.probabilities();
    let mut best = 0usize;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    let d = state.local_dim();
    let factors = (0..state.n_parties())
        .map(|j| {
            let mut f = DVector::from_element(d, C64::new(0.0, 0.0));
            f[state.digit(best, j)] = C64::new(1.0, 0.0);
            f
        })
        .collect();
    ProductState { factors }
}

fn seesaw_once(
    state: &State,
    mut prod: ProductState,
    cfg: &SeesawConfig,
    rng_seed: u64,
) -> Result<(f64, ProductState, Vec<f64>, usize)> {
    let n = state.n_parties();
    let mut rng = rng_from_seed(rng_seed);
    let mut lambda = product_overlap(state, &prod)?.norm_sqr();
    let mut trace = vec![lambda];
    let mut zero_resets = 0usize;
    for _cycle in 0..cfg.max_cycles {
        let before = lambda;
        for i in 0..n {
            let (next, lam, reset) = seesaw_update(state, &prod, i, &mut rng)?;
            prod = next;
            lambda = lam;
            if reset {
                zero_resets += 1;
            }
        }
        trace.push(lambda);
        if lambda - before < cfg.gain_tol {
            break;
        }
    }
    Ok((lambda, prod, trace, zero_resets))
}

/// Best overlap² over restarts, with S_∞^min = −ln λ and E_G = 1 − λ.
///
/// Restart 0 starts from the computational-basis product at the largest
/// weight (so λ ≥ max p holds deterministically); the rest start from
/// Haar-uniform factors.
pub fn s_infinity_min(state: &State, cfg: &SeesawConfig) -> Result<SeesawResult> {
    if cfg.restarts == 0 {
        return Err(MdentError::InvalidParameter(
            "need at least one restart".into(),
        ));
    }
    let n = state.n_parties();
    let d = state.local_dim();
    let seeds = sub_seeds(cfg.seed, cfg.restarts);

    let runs: Vec<Result<(f64, ProductState, Vec<f64>, usize)>> = seeds
        .par_iter()
        .enumerate()
        .map(|(idx, &seed)| {
            let start = if idx == 0 {
                basis_product_at_peak(state)
            } else {
                let mut rng = rng_from_seed(seed);
                ProductState {
                    factors: (0..n).map(|_| random_unit_vector(d, &mut rng)).collect(),
                }
            };
            // Offset the seed stream so in-run resets do not reuse the
            // factor draws.
            seesaw_once(state, start, cfg, seed.wrapping_add(1))
        })
        .collect();

    let mut results = Vec::with_capacity(runs.len());
    for r in runs {
        results.push(r?);
    }
    let best_restart = results
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.0.partial_cmp(&b.0).unwrap().then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    let (lambda, prod, trace, zero_resets) = results.swap_remove(best_restart);
    Ok(SeesawResult {
        lambda,
        s_inf_min: -lambda.ln(),
        gme: 1.0 - lambda,
        prod,
        best_restart,
        trace,
        zero_resets,
    })
}

//! Random k-uniform and AME state generation by alternating nearest-isometry
//! projections.
//!
//! Works on the scaled matricization A (d^k × d^{n−k}, tr(A†A) = d^k). The
//! objective f(A) = 𝒩 Σ_σ ‖A^{R_σ}‖_* with 𝒩 = 1/(d^k·C(n,k)) satisfies
//! f ≤ 1, with equality exactly when every k-party reshaping is a scaled
//! isometry, i.e. the state is k-uniform. Each iterate replaces every
//! reshaping by its closest isometry, averages, and rescales; f never
//! decreases along the run.

use nalgebra::DMatrix;

use crate::error::{MdentError, Result};
use crate::lppca::{jacobi_rotate_rows, polar_factor};
use crate::random::{ginibre, rng_from_seed, sub_seeds, DEFAULT_SEED};
use crate::state::State;
use crate::uniformity::{all_k_subsets, check_k_uniform, UniformityReport};
use crate::C64;

/// Singular values below this count as rank deficiency in Π(A).
const DEGENERATE_SV_TOL: f64 = 1e-12;
/// Per-iteration f gain below this for `STALL_STEPS` consecutive steps ends
/// a restart early: the map is deterministic, so a stalled trajectory stays
/// stalled.
const STALL_GAIN_TOL: f64 = 1e-15;
const STALL_STEPS: usize = 25;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub max_iters: usize,
    /// Convergence threshold on 1 − f(A).
    pub f_tol: f64,
    pub restarts: usize,
    /// Uniformity deviation a successful state must pass.
    pub verify_tol: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(n: usize, d: usize, k: usize) -> GenConfig {
        GenConfig {
            n,
            d,
            k,
            max_iters: 5_000,
            f_tol: 1e-10,
            restarts: 10,
            verify_tol: 1e-6,
            seed: DEFAULT_SEED,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.d < 2 {
            return Err(MdentError::InvalidParameter(format!(
                "need n >= 2 and d >= 2, got n={}, d={}",
                self.n, self.d
            )));
        }
        if self.k == 0 || 2 * self.k > self.n {
            // Row dimension d^k must not exceed the column dimension.
            return Err(MdentError::InvalidParameter(format!(
                "k must satisfy 1 <= k <= n/2, got k={} for n={}",
                self.k, self.n
            )));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(MdentError::InvalidParameter(
                "restarts and max_iters must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GenResult {
    pub state: State,
    pub f_final: f64,
    pub report: UniformityReport,
    /// True when 1 − f < f_tol and the uniformity check passed.
    pub success: bool,
    pub iters: usize,
    pub restart: usize,
    /// f per iteration of the returned restart.
    pub trace: Vec<f64>,
    /// Rank-deficient nearest-isometry projections encountered.
    pub degenerate_projections: usize,
}

fn check_shape(a: &DMatrix<C64>, n: usize, d: usize, k: usize) -> Result<()> {
    let rows = d.pow(k as u32);
    let cols = d.pow((n - k) as u32);
    if a.nrows() != rows || a.ncols() != cols {
        return Err(MdentError::DimensionMismatch(format!(
            "expected {}x{} matrix for (n={}, d={}, k={}), got {}x{}",
            rows,
            cols,
            n,
            d,
            k,
            a.nrows(),
            a.ncols()
        )));
    }
    let tr: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if (tr - rows as f64).abs() > 1e-6 {
        return Err(MdentError::InvalidState(format!(
            "tr(A\u{2020}A) = {} violates the d^k = {} scaling",
            tr, rows
        )));
    }
    Ok(())
}

fn polar_isometry(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, bool)> {
    let (pi, sigmas) = polar_factor(a)?;
    let degenerate = sigmas.iter().any(|s| *s < DEGENERATE_SV_TOL);
    Ok((pi, degenerate))
}

/// Frobenius-closest isometry Π(A) = UV† from the thin SVD A = UΣV†.
pub fn nearest_isometry(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if a.nrows() > a.ncols() {
        return Err(MdentError::InvalidParameter(format!(
            "need rows <= cols, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(MdentError::InvalidState("zero matrix".into()));
    }
    Ok(polar_isometry(a)?.0)
}

/// Sum of singular values.
pub fn nuclear_norm(a: &DMatrix<C64>) -> f64 {
    let amax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if amax == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / amax;
    let mut m = if a.nrows() <= a.ncols() {
        a.map(|z| z * inv)
    } else {
        a.adjoint().map(|z| z * inv)
    };
    jacobi_rotate_rows(&mut m, None).expect("cyclic Jacobi converges");
    amax * (0..m.nrows()).map(|i| m.row(i).norm()).sum::<f64>()
}

/// Digits of the working matrix entry (r, c): parties 0..k are the row
/// digits, parties k..n the column digits, both big-endian.
fn entry_digits(r: usize, c: usize, n: usize, d: usize, k: usize, out: &mut [usize]) {
    let mut rr = r;
    for i in (0..k).rev() {
        out[i] = rr % d;
        rr /= d;
    }
    let mut cc = c;
    for i in (k..n).rev() {
        out[i] = cc % d;
        cc /= d;
    }
}

/// Reshapes the working matrix so the parties in `subset` index the rows.
fn reshape_to(a: &DMatrix<C64>, n: usize, d: usize, k: usize, subset: &[usize]) -> DMatrix<C64> {
    let complement: Vec<usize> = (0..n).filter(|p| !subset.contains(p)).collect();
    let rows = d.pow(subset.len() as u32);
    let cols = d.pow(complement.len() as u32);
    let mut out = DMatrix::<C64>::zeros(rows, cols);
    let mut digits = vec![0usize; n];
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            entry_digits(r, c, n, d, k, &mut digits);
            let mut nr = 0usize;
            for &p in subset {
                nr = nr * d + digits[p];
            }
            let mut nc = 0usize;
            for &p in &complement {
                nc = nc * d + digits[p];
            }
            out[(nr, nc)] = a[(r, c)];
        }
    }
    out
}

/// Inverse of `reshape_to`: scatters a σ-reshaped matrix back into the
/// working layout and adds it onto `acc`.
fn add_unreshaped(
    acc: &mut DMatrix<C64>,
    m: &DMatrix<C64>,
    n: usize,
    d: usize,
    k: usize,
    subset: &[usize],
) {
    let complement: Vec<usize> = (0..n).filter(|p| !subset.contains(p)).collect();
    let mut digits = vec![0usize; n];
    for r in 0..acc.nrows() {
        for c in 0..acc.ncols() {
            entry_digits(r, c, n, d, k, &mut digits);
            let mut nr = 0usize;
            for &p in subset {
                nr = nr * d + digits[p];
            }
            let mut nc = 0usize;
            for &p in &complement {
                nc = nc * d + digits[p];
            }
            acc[(r, c)] += m[(nr, nc)];
        }
    }
}

/// f(A) = 𝒩 Σ_σ ‖A^{R_σ}‖_* over all C(n,k) size-k subsets.
pub fn objective_f(a: &DMatrix<C64>, n: usize, d: usize, k: usize) -> Result<f64> {
    check_shape(a, n, d, k)?;
    let subsets = all_k_subsets(n, k);
    let norm = 1.0 / (d.pow(k as u32) as f64 * subsets.len() as f64);
    let mut sum = 0.0;
    for s in &subsets {
        sum += nuclear_norm(&reshape_to(a, n, d, k, s));
    }
    Ok(norm * sum)
}

fn gen_iterate_tracked(
    a: &DMatrix<C64>,
    n: usize,
    d: usize,
    k: usize,
) -> Result<(DMatrix<C64>, usize)> {
    check_shape(a, n, d, k)?;
    let subsets = all_k_subsets(n, k);
    let mut acc = DMatrix::<C64>::zeros(a.nrows(), a.ncols());
    let mut degenerate = 0usize;
    for s in &subsets {
        let (pi, deg) = polar_isometry(&reshape_to(a, n, d, k, s))?;
        if deg {
            degenerate += 1;
        }
        add_unreshaped(&mut acc, &pi, n, d, k, s);
    }
    // The average can drift off tr(A†A) = d^k; rescale exactly. Nuclear
    // norms are 1-homogeneous, so the rescale preserves the ascent.
    let tr: f64 = acc.iter().map(|z| z.norm_sqr()).sum();
    if tr <= 0.0 {
        return Err(MdentError::Numerical("iterate collapsed to zero".into()));
    }
    let scale = (a.nrows() as f64 / tr).sqrt();
    Ok((acc * C64::new(scale, 0.0), degenerate))
}

/// One step of the alternating projection: average the closest isometries
/// of every reshaping, then rescale to tr(A†A) = d^k.
pub fn gen_iterate(a: &DMatrix<C64>, n: usize, d: usize, k: usize) -> Result<DMatrix<C64>> {
    Ok(gen_iterate_tracked(a, n, d, k)?.0)
}

/// Converts a working matrix to the state it encodes (rescale + normalize).
pub fn state_from_matrix(a: &DMatrix<C64>, n: usize, d: usize, k: usize) -> Result<State> {
    check_shape(a, n, d, k)?;
    let cols = a.ncols();
    let mut amps = vec![C64::new(0.0, 0.0); a.nrows() * cols];
    for r in 0..a.nrows() {
        for c in 0..cols {
            amps[r * cols + c] = a[(r, c)];
        }
    }
    State::from_amplitudes(n, d, amps)
}

struct RestartOutcome {
    a: DMatrix<C64>,
    f: f64,
    iters: usize,
    trace: Vec<f64>,
    degenerate: usize,
    verified: Option<UniformityReport>,
}

fn run_restart(cfg: &GenConfig, seed: u64) -> Result<RestartOutcome> {
    let d = cfg.d;
    let rows = d.pow(cfg.k as u32);
    let cols = d.pow((cfg.n - cfg.k) as u32);
    let mut rng = rng_from_seed(seed);
    let mut a = nearest_isometry(&ginibre(rows, cols, &mut rng))?;
    let mut f = objective_f(&a, cfg.n, cfg.d, cfg.k)?;
    let mut trace = vec![f];
    let mut degenerate = 0usize;
    let mut stalled = 0usize;
    let mut iters = 0usize;
    for it in 1..=cfg.max_iters {
        let (next, deg) = gen_iterate_tracked(&a, cfg.n, cfg.d, cfg.k)?;
        degenerate += deg;
        let f_next = objective_f(&next, cfg.n, cfg.d, cfg.k)?;
        if f_next < f - 1e-10 {
            return Err(MdentError::Numerical(format!(
                "objective decreased from {} to {}",
                f, f_next
            )));
        }
        let gain = f_next - f;
        a = next;
        f = f_next;
        trace.push(f);
        iters = it;
        if 1.0 - f < cfg.f_tol {
            let state = state_from_matrix(&a, cfg.n, cfg.d, cfg.k)?;
            let report = check_k_uniform(&state, cfg.k, cfg.verify_tol)?;
            if report.is_uniform {
                return Ok(RestartOutcome {
                    a,
                    f,
                    iters,
                    trace,
                    degenerate,
                    verified: Some(report),
                });
            }
        }
        if gain < STALL_GAIN_TOL {
            stalled += 1;
            if stalled >= STALL_STEPS {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    Ok(RestartOutcome {
        a,
        f,
        iters,
        trace,
        degenerate,
        verified: None,
    })
}

/// Runs restarts until one converges to a verified k-uniform state.
///
/// Failure is a value: after all restarts, the best-f attempt is returned
/// with `success: false` and its (failing) uniformity report.
pub fn generate_kuniform(cfg: &GenConfig) -> Result<GenResult> {
    cfg.validate()?;
    let seeds = sub_seeds(cfg.seed, cfg.restarts);
    let mut best: Option<(usize, RestartOutcome)> = None;
    for (idx, &seed) in seeds.iter().enumerate() {
        let out = run_restart(cfg, seed)?;
        let success = out.verified.is_some();
        let better = match &best {
            None => true,
            Some((_, b)) => out.f > b.f,
        };
        if better {
            best = Some((idx, out));
        }
        if success {
            break;
        }
    }
    let (restart, out) = best.expect("at least one restart");
    let state = state_from_matrix(&out.a, cfg.n, cfg.d, cfg.k)?;
    let (report, success) = match out.verified {
        Some(r) => (r, true),
        None => (check_k_uniform(&state, cfg.k, cfg.verify_tol)?, false),
    };
    Ok(GenResult {
        state,
        f_final: out.f,
        report,
        success,
        iters: out.iters,
        restart,
        trace: out.trace,
        degenerate_projections: out.degenerate,
    })
}

//! Lp-norm principal component analysis by alternating maximization.
//!
//! Maximizes F_p(W) = Σᵢⱼ |wⱼ† xᵢ|^p over isometries W (n×m, W†W = I) for
//! p ≥ 2. Each step lifts the current gradient to the closest isometry via
//! an orthogonal-Procrustes projection; for convex F (p ≥ 2) this is a
//! monotone ascent. p = 2 is solved exactly by the spectral decomposition
//! of X X†.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::entropy::kahan_sum;
use crate::error::{MdentError, Result};
use crate::random::random_unitary;
use crate::C64;

// A re-seed fires only on an exactly vanishing gradient (zero data, or every
// overlap underflowed). Any nonzero gradient still fixes the ascent direction:
// its absolute size shrinks like |u|^(p-2) and the Procrustes step is
// scale-invariant, so a small-norm threshold would misfire at large p.

#[derive(Debug, Clone)]
pub struct LppcaOptions {
    /// Absolute objective gain below which iteration stops.
    pub gain_tol: f64,
    pub max_iters: usize,
}

impl Default for LppcaOptions {
    fn default() -> Self {
        LppcaOptions {
            gain_tol: 1e-12,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LppcaResult {
    /// The n×m isometry reached.
    pub w: DMatrix<C64>,
    pub objective: f64,
    pub iters: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
    /// Whether a zero gradient forced a random re-seed.
    pub reseeded: bool,
}

/// F_p(W) = Σᵢⱼ |wⱼ† xᵢ|^p.
pub fn fp_objective(x: &DMatrix<C64>, w: &DMatrix<C64>, p: f64) -> f64 {
    let u = w.adjoint() * x;
    kahan_sum(u.iter().map(|z| z.norm().powf(p)))
}

/// Euclidean gradient of F_p: column k is (p/2)·Σᵢ |wₖ†xᵢ|^(p−2)·(xᵢ†wₖ)·xᵢ,
/// assembled as X·Bᵀ with B = (p/2)·|U|^(p−2) ∘ conj(U), U = W†X.
pub fn fp_gradient(x: &DMatrix<C64>, w: &DMatrix<C64>, p: f64) -> DMatrix<C64> {
    let u = w.adjoint() * x;
    let b = u.map(|z| {
        let a = z.norm();
        if a == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            z.conj() * C64::new(0.5 * p * a.powf(p - 2.0), 0.0)
        }
    });
    x * b.transpose()
}

/// Pairwise row inner products below this relative size count as orthogonal.
const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 64;

/// One-sided Jacobi: unitary row mixing until all rows of `m` are mutually
/// orthogonal. The same rotations are applied to `acc`, so the final `acc`
/// times the original `m` equals the rotated `m`. Row norms of the result
/// are the singular values, at high relative accuracy even when the spectrum
/// is clustered (where bidiagonal SVDs can mispair the factors).
pub(crate) fn jacobi_rotate_rows(
    m: &mut DMatrix<C64>,
    mut acc: Option<&mut DMatrix<C64>>,
) -> Result<()> {
    let n = m.nrows();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut a = 0.0;
                let mut b = 0.0;
                let mut c = C64::new(0.0, 0.0);
                for t in 0..m.ncols() {
                    let ri = m[(i, t)];
                    let rj = m[(j, t)];
                    a += ri.norm_sqr();
                    b += rj.norm_sqr();
                    c += ri.conj() * rj;
                }
                let g = c.norm();
                if g == 0.0 || g * g <= JACOBI_TOL * JACOBI_TOL * a * b {
                    continue;
                }
                rotated = true;
                // The Hermitian Gram [[a, c], [c̄, b]] with c = g·e^{iφ} is a
                // diag(1, e^{-iφ}) conjugation of the real pair [[a, g], [g, b]];
                // (x, y) is its eigenvector basis, written cancellation-free.
                let phase_conj = (c / C64::new(g, 0.0)).conj();
                let delta = 0.5 * (a - b);
                let r = delta.hypot(g);
                let (x, y) = if delta >= 0.0 {
                    let h = (delta + r).hypot(g);
                    ((delta + r) / h, g / h)
                } else {
                    let h = g.hypot(r - delta);
                    (g / h, (r - delta) / h)
                };
                for t in 0..m.ncols() {
                    let ri = m[(i, t)];
                    let rj = m[(j, t)] * phase_conj;
                    m[(i, t)] = ri * x + rj * y;
                    m[(j, t)] = rj * x - ri * y;
                }
                if let Some(acc) = acc.as_deref_mut() {
                    for t in 0..acc.ncols() {
                        let ri = acc[(i, t)];
                        let rj = acc[(j, t)] * phase_conj;
                        acc[(i, t)] = ri * x + rj * y;
                        acc[(j, t)] = rj * x - ri * y;
                    }
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(MdentError::Numerical(
        "row orthogonalization did not converge".into(),
    ))
}

/// Polar factor of a nonzero matrix: the isometry Π = UV† from the SVD
/// A = UΣV†, plus the singular values in descending order. Maximizes
/// Re tr(Π†A) = ‖A‖_* over isometries of A's shape, with the attainment
/// identity holding to roundoff by construction.
pub fn polar_factor(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, Vec<f64>)> {
    // The polar factor is scale-invariant; normalizing by the largest entry
    // keeps the Gram sums healthy even when the input sits at denormal
    // scales (e.g. gradients whose entries go like |u|^(p-2) at large p).
    let amax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if amax == 0.0 {
        return Err(MdentError::InvalidState(
            "zero matrix has no polar factor".into(),
        ));
    }
    if a.nrows() > a.ncols() {
        // Π(A†) = Π(A)†: solve the wide problem.
        let (pi, sv) = polar_factor(&a.adjoint())?;
        return Ok((pi.adjoint(), sv));
    }
    let n = a.nrows();
    let cols = a.ncols();
    let inv = 1.0 / amax;
    let mut r = a.map(|z| z * inv);
    let mut acc = DMatrix::<C64>::identity(n, n);
    jacobi_rotate_rows(&mut r, Some(&mut acc))?;
    let sigmas: Vec<f64> = (0..n).map(|i| r.row(i).norm()).collect();
    let sig_max = sigmas.iter().cloned().fold(0.0, f64::max);
    let cut = sig_max * f64::EPSILON;

    // A = acc†·R with mutually orthogonal rows in R; normalizing those rows
    // gives V†, so Π = acc†·V†. Rows with vanishing norm carry no direction
    // and are completed to an orthonormal set; any completion attains ‖A‖_*.
    let mut vdag = DMatrix::<C64>::zeros(n, cols);
    let mut fixed = vec![false; n];
    for i in 0..n {
        if sigmas[i] > cut {
            let s = 1.0 / sigmas[i];
            for t in 0..cols {
                vdag[(i, t)] = r[(i, t)] * s;
            }
            fixed[i] = true;
        }
    }
    for i in 0..n {
        if fixed[i] {
            continue;
        }
        // Seed from the coordinate axis least covered by the fixed rows.
        let mut best_t = 0;
        let mut best_res = f64::NEG_INFINITY;
        for t in 0..cols {
            let mut res = 1.0;
            for u in 0..n {
                if fixed[u] {
                    res -= vdag[(u, t)].norm_sqr();
                }
            }
            if res > best_res {
                best_res = res;
                best_t = t;
            }
        }
        let mut v = vec![C64::new(0.0, 0.0); cols];
        v[best_t] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for u in 0..n {
                if !fixed[u] {
                    continue;
                }
                let mut ip = C64::new(0.0, 0.0);
                for t in 0..cols {
                    ip += vdag[(u, t)].conj() * v[t];
                }
                for t in 0..cols {
                    v[t] -= vdag[(u, t)] * ip;
                }
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = 1.0 / nv;
        for t in 0..cols {
            vdag[(i, t)] = v[t] * s;
        }
        fixed[i] = true;
    }

    let mut sv: Vec<f64> = sigmas.iter().map(|s| s * amax).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok((acc.adjoint() * vdag, sv))
}

/// The isometry closest to G in the trace-alignment sense: W = U V† from the
/// thin SVD of G, maximizing Re tr(W†G) = ‖G‖_*.
pub fn procrustes_factor(g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    Ok(polar_factor(g)?.0)
}

/// Largest entry of the anti-Hermitian part of W†∇F; vanishes at a
/// stationary point on the isometry manifold.
pub fn stationarity_residual(x: &DMatrix<C64>, w: &DMatrix<C64>, p: f64) -> f64 {
    let h = w.adjoint() * fp_gradient(x, w, p);
    let skew = &h - h.adjoint();
    skew.iter().map(|z| 0.5 * z.norm()).fold(0.0, f64::max)
}

fn random_isometry<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> DMatrix<C64> {
    random_unitary(n, rng).columns(0, m).into_owned()
}

fn spectral_p2(x: &DMatrix<C64>, m: usize) -> LppcaResult {
    // F_2(W) = tr(W† X X† W): maximized by the top-m eigenvectors of X X†.
    let gram = x * x.adjoint();
    let eig = SymmetricEigen::new(gram);
    let n = x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut w = DMatrix::<C64>::zeros(n, m);
    for (col, &idx) in order.iter().take(m).enumerate() {
        w.set_column(col, &eig.eigenvectors.column(idx));
    }
    let objective = fp_objective(x, &w, 2.0);
    LppcaResult {
        w,
        objective,
        iters: 0,
        converged: true,
        trace: vec![objective],
        reseeded: false,
    }
}

/// Maximizes F_p over n×m isometries.
///
/// `warm` seeds the iteration (useful inside alternating optimizers); if
/// absent a random isometry is drawn from `rng`. p must be ≥ 2; p = 2 is
/// dispatched to the exact spectral solution.
pub fn lppca_maximize<R: Rng + ?Sized>(
    x: &DMatrix<C64>,
    m: usize,
    p: f64,
    opts: &LppcaOptions,
    warm: Option<&DMatrix<C64>>,
    rng: &mut R,
) -> Result<LppcaResult> {
    let n = x.nrows();
    if m == 0 || m > n {
        return Err(MdentError::InvalidParameter(format!(
            "component count {} out of range for data dimension {}",
            m, n
        )));
    }
    if p == 2.0 {
        return Ok(spectral_p2(x, m));
    }
    if !(p > 2.0) {
        return Err(MdentError::InvalidParameter(format!(
            "the alternating ascent requires p ≥ 2, got {}",
            p
        )));
    }
    if let Some(w0) = warm {
        if w0.nrows() != n || w0.ncols() != m {
            return Err(MdentError::DimensionMismatch(format!(
                "warm start has shape {}×{}, expected {}×{}",
                w0.nrows(),
                w0.ncols(),
                n,
                m
            )));
        }
    }

    let mut w = match warm {
        Some(w0) => w0.clone(),
        None => random_isometry(n, m, rng),
    };
    let mut objective = fp_objective(x, &w, p);
    let mut trace = vec![objective];
    let mut reseeded = false;
    let mut converged = false;
    let mut iters = 0;

    while iters < opts.max_iters {
        iters += 1;
        let mut g = fp_gradient(x, &w, p);
        if g.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            if reseeded {
                // Still flat after a fresh start: the objective is constant
                // (e.g. X = 0); accept the current point.
                converged = true;
                break;
            }
            w = random_isometry(n, m, rng);
            objective = fp_objective(x, &w, p);
            trace.push(objective);
            reseeded = true;
            g = fp_gradient(x, &w, p);
            if g.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                converged = true;
                break;
            }
        }
        let w_next = procrustes_factor(&g)?;
        let next = fp_objective(x, &w_next, p);
        let gain = next - objective;
        w = w_next;
        objective = next;
        trace.push(objective);
        if gain < opts.gain_tol {
            converged = true;
            break;
        }
    }

    Ok(LppcaResult {
        w,
        objective,
        iters,
        converged,
        trace,
        reseeded,
    })
}

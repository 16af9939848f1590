//! N-qudit pure states and the tensor plumbing built on them:
//!
//! - flat/multi index conversion (row-major, first party most significant)
//! - matricization and bipartition reshaping with the √(d^k) scaling
//! - reduced density matrices and linear entropy
//! - local unitary action by sequential mode contraction

use nalgebra::{DMatrix, DVector};

use crate::error::{MdentError, Result};
use crate::C64;

/// Tolerance for the unitarity check in [`apply_local_unitaries`].
const UNITARITY_TOL: f64 = 1e-8;

/// A pure state of `n_parties` qudits with local dimension `local_dim`.
///
/// Amplitudes are stored flat in row-major order with the first party most
/// significant: flat index = Σᵢ jᵢ·d^(N−i). States are normalized on
/// construction; all operations keep the 2-norm at 1 within 1e−10.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n_parties: usize,
    local_dim: usize,
    amplitudes: DVector<C64>,
}

impl State {
    /// Builds a normalized state from raw amplitudes.
    ///
    /// The input is divided by its 2-norm; a zero or non-finite input is
    /// rejected, as is a length different from d^N.
    pub fn from_amplitudes(n_parties: usize, local_dim: usize, amps: Vec<C64>) -> Result<State> {
        if n_parties == 0 {
            return Err(MdentError::InvalidParameter(
                "n_parties must be positive".into(),
            ));
        }
        if local_dim < 2 {
            return Err(MdentError::InvalidParameter(
                "local_dim must be at least 2".into(),
            ));
        }
        let dim = local_dim.checked_pow(n_parties as u32).ok_or_else(|| {
            MdentError::InvalidParameter("d^N overflows the index type".into())
        })?;
        if amps.len() != dim {
            return Err(MdentError::DimensionMismatch(format!(
                "expected {} amplitudes for {} parties of dimension {}, got {}",
                dim,
                n_parties,
                local_dim,
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MdentError::InvalidState(
                "amplitudes must be finite".into(),
            ));
        }
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if norm <= 0.0 {
            return Err(MdentError::InvalidState(
                "amplitudes must not all be zero".into(),
            ));
        }
        Ok(State {
            n_parties,
            local_dim,
            amplitudes: v / C64::new(norm, 0.0),
        })
    }

    /// Computational basis state |j₁…j_N⟩.
    pub fn basis_state(n_parties: usize, local_dim: usize, indices: &[usize]) -> Result<State> {
        let flat = flat_index(indices, local_dim)?;
        if indices.len() != n_parties {
            return Err(MdentError::DimensionMismatch(format!(
                "expected {} indices, got {}",
                n_parties,
                indices.len()
            )));
        }
        let dim = local_dim.pow(n_parties as u32);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[flat] = C64::new(1.0, 0.0);
        State::from_amplitudes(n_parties, local_dim, amps)
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Total Hilbert-space dimension d^N.
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, flat: usize) -> C64 {
        self.amplitudes[flat]
    }

    /// Probability weights p = |c|² in flat order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// The digit of `flat` belonging to `party` (0-based).
    pub fn digit(&self, flat: usize, party: usize) -> usize {
        let stride = self.local_dim.pow((self.n_parties - 1 - party) as u32);
        (flat / stride) % self.local_dim
    }
}

/// Row-major flat index Σᵢ jᵢ·d^(N−i) with the first entry most significant.
pub fn flat_index(indices: &[usize], d: usize) -> Result<usize> {
    if d < 2 {
        return Err(MdentError::InvalidParameter(
            "local dimension must be at least 2".into(),
        ));
    }
    let mut flat = 0usize;
    for &j in indices {
        if j >= d {
            return Err(MdentError::InvalidParameter(format!(
                "index {} out of range for dimension {}",
                j, d
            )));
        }
        flat = flat * d + j;
    }
    Ok(flat)
}

/// Inverse of [`flat_index`]: digits of `flat` in base `d`, most significant first.
pub fn multi_index(flat: usize, n: usize, d: usize) -> Result<Vec<usize>> {
    let dim = d.checked_pow(n as u32).ok_or_else(|| {
        MdentError::InvalidParameter("d^N overflows the index type".into())
    })?;
    if flat >= dim {
        return Err(MdentError::InvalidParameter(format!(
            "flat index {} out of range for {} parties of dimension {}",
            flat, n, d
        )));
    }
    let mut digits = vec![0usize; n];
    let mut rest = flat;
    for i in (0..n).rev() {
        digits[i] = rest % d;
        rest /= d;
    }
    Ok(digits)
}

/// A d^k × d^(N−k) matricization of a state across a bipartition.
///
/// Entries carry the √(d^k) scaling, so trace(A A†) = d^k for a normalized
/// state and the matrix is an isometry exactly when the marginal on the row
/// side is maximally mixed.
#[derive(Debug, Clone)]
pub struct BipartitionMatrix {
    subset: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl BipartitionMatrix {
    /// Party indices (0-based) forming the row side, in row-digit order.
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }
}

/// Reshapes a state into the scaled matrix whose rows are indexed by
/// `subset` (in the order given) and whose columns are indexed by the
/// remaining parties in ascending order.
pub fn reshape_bipartition(state: &State, subset: &[usize]) -> Result<BipartitionMatrix> {
    let n = state.n_parties();
    let d = state.local_dim();
    let k = subset.len();
    if k == 0 || k >= n {
        return Err(MdentError::InvalidParameter(format!(
            "subset size must be between 1 and {}, got {}",
            n - 1,
            k
        )));
    }
    let mut seen = vec![false; n];
    for &p in subset {
        if p >= n {
            return Err(MdentError::InvalidParameter(format!(
                "party index {} out of range for {} parties",
                p, n
            )));
        }
        if seen[p] {
            return Err(MdentError::InvalidParameter(format!(
                "duplicate party index {}",
                p
            )));
        }
        seen[p] = true;
    }
    let complement: Vec<usize> = (0..n).filter(|p| !seen[*p]).collect();

    let rows = d.pow(k as u32);
    let cols = d.pow((n - k) as u32);
    let scale = (rows as f64).sqrt();
    let mut matrix = DMatrix::<C64>::zeros(rows, cols);
    for flat in 0..state.dim() {
        let mut r = 0usize;
        for &p in subset {
            r = r * d + state.digit(flat, p);
        }
        let mut c = 0usize;
        for &p in &complement {
            c = c * d + state.digit(flat, p);
        }
        matrix[(r, c)] = state.amplitude(flat) * C64::new(scale, 0.0);
    }
    Ok(BipartitionMatrix {
        subset: subset.to_vec(),
        matrix,
    })
}

/// Matricization across the first k parties: entry(μ,ν) = √(d^k)·c_{μν}.
pub fn matricize(state: &State, k: usize) -> Result<BipartitionMatrix> {
    let subset: Vec<usize> = (0..k).collect();
    reshape_bipartition(state, &subset)
}

/// Reduced density matrix on `subset` via ρ_S = (1/d^k)·A A† with A the
/// scaled reshaping.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    subset: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues of the density matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }
}

pub fn reduced_density(state: &State, subset: &[usize]) -> Result<DensityMatrix> {
    let a = reshape_bipartition(state, subset)?;
    let k = subset.len();
    let dk = state.local_dim().pow(k as u32) as f64;
    let rho = (a.matrix() * a.matrix().adjoint()) / C64::new(dk, 0.0);
    Ok(DensityMatrix {
        subset: subset.to_vec(),
        matrix: rho,
    })
}

/// Linear entropy E_L = 1 − tr(ρ²); 0 for pure marginals, 1 − 1/dim for
/// maximally mixed ones.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
    let purity: f64 = rho.matrix.iter().map(|z| z.norm_sqr()).sum();
    1.0 - purity
}

/// Checks ‖u†u − I‖_max ≤ tol.
pub fn is_unitary(u: &DMatrix<C64>, tol: f64) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let gram = u.adjoint() * u;
    let n = u.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            dev = dev.max((gram[(i, j)] - target).norm());
        }
    }
    dev <= tol
}

/// Applies u₁⊗…⊗u_N by N successive mode contractions, never forming the
/// d^N × d^N product.
pub fn apply_local_unitaries(state: &State, units: &[DMatrix<C64>]) -> Result<State> {
    let n = state.n_parties();
    let d = state.local_dim();
    if units.len() != n {
        return Err(MdentError::DimensionMismatch(format!(
            "expected {} local unitaries, got {}",
            n,
            units.len()
        )));
    }
    for (i, u) in units.iter().enumerate() {
        if u.nrows() != d || u.ncols() != d {
            return Err(MdentError::DimensionMismatch(format!(
                "unitary for party {} has shape {}×{}, expected {}×{}",
                i,
                u.nrows(),
                u.ncols(),
                d,
                d
            )));
        }
        if !is_unitary(u, UNITARITY_TOL) {
            return Err(MdentError::InvalidParameter(format!(
                "matrix for party {} is not unitary within {:e}",
                i, UNITARITY_TOL
            )));
        }
    }

    let dim = state.dim();
    let mut amps: Vec<C64> = state.amplitudes().iter().copied().collect();
    let mut gathered = vec![C64::new(0.0, 0.0); d];
    for (i, u) in units.iter().enumerate() {
        let stride = d.pow((n - 1 - i) as u32);
        let block = stride * d;
        for outer in 0..dim / block {
            let base = outer * block;
            for inner in 0..stride {
                let idx0 = base + inner;
                for (a, g) in gathered.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..d {
                        acc += u[(a, b)] * amps[idx0 + b * stride];
                    }
                    *g = acc;
                }
                for (a, g) in gathered.iter().enumerate() {
                    amps[idx0 + a * stride] = *g;
                }
            }
        }
    }
    State::from_amplitudes(n, d, amps)
}

/// Inner product ⟨a|b⟩, conjugate-linear in `a`.
pub fn overlap(a: &State, b: &State) -> Result<C64> {
    if a.n_parties() != b.n_parties() || a.local_dim() != b.local_dim() {
        return Err(MdentError::DimensionMismatch(
            "states live in different spaces".into(),
        ));
    }
    Ok(a.amplitudes().dotc(b.amplitudes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ghz(n: usize, d: usize) -> State {
        let dim = d.pow(n as u32);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for j in 0..d {
            let idx: Vec<usize> = vec![j; n];
            amps[flat_index(&idx, d).unwrap()] = C64::new(1.0, 0.0);
        }
        State::from_amplitudes(n, d, amps).unwrap()
    }

    #[test]
    fn flat_index_examples() {
        assert_eq!(flat_index(&[0, 0, 0], 2).unwrap(), 0);
        assert_eq!(flat_index(&[1, 1, 1], 2).unwrap(), 7);
        assert_eq!(flat_index(&[1, 0, 1, 2], 3).unwrap(), 32);
        assert!(flat_index(&[2, 0], 2).is_err());
    }

    #[test]
    fn multi_index_round_trip() {
        for d in 2..=4usize {
            let n = 3;
            for flat in 0..d.pow(n as u32) {
                let digits = multi_index(flat, n, d).unwrap();
                assert_eq!(flat_index(&digits, d).unwrap(), flat);
            }
        }
    }

    #[test]
    fn from_amplitudes_normalizes() {
        let s = State::from_amplitudes(
            2,
            2,
            vec![
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(s.amplitude(0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn from_amplitudes_rejects_bad_input() {
        assert!(State::from_amplitudes(2, 2, vec![C64::new(0.0, 0.0); 3]).is_err());
        assert!(State::from_amplitudes(2, 2, vec![C64::new(0.0, 0.0); 4]).is_err());
        assert!(State::from_amplitudes(2, 2, vec![C64::new(f64::NAN, 0.0); 4]).is_err());
    }

    #[test]
    fn ghz_matricize_k1() {
        let g = ghz(3, 2);
        let a = matricize(&g, 1).unwrap();
        let m = a.matrix();
        assert_eq!((m.nrows(), m.ncols()), (2, 4));
        let expect = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for r in 0..2 {
            for c in 0..4 {
                assert_abs_diff_eq!(m[(r, c)].re, expect[r][c], epsilon = 1e-12);
                assert_abs_diff_eq!(m[(r, c)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matricize_trace_scaling() {
        let g = ghz(4, 3);
        for k in 1..4 {
            let a = matricize(&g, k).unwrap();
            let tr: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(tr, 3f64.powi(k as i32), epsilon = 1e-8);
        }
    }

    #[test]
    fn reshape_respects_permutation_symmetry() {
        // GHZ is symmetric under party exchange, so any single-party row side
        // gives the same matrix.
        let g = ghz(3, 2);
        let a = reshape_bipartition(&g, &[0]).unwrap();
        let b = reshape_bipartition(&g, &[1]).unwrap();
        assert_abs_diff_eq!((a.matrix() - b.matrix()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reshape_product_state_rank_one() {
        // |0⟩⊗|+⟩⊗|0⟩ reshaped on the middle party has Schmidt rank 1.
        let inv = 1.0 / 2f64.sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[flat_index(&[0, 0, 0], 2).unwrap()] = C64::new(inv, 0.0);
        amps[flat_index(&[0, 1, 0], 2).unwrap()] = C64::new(inv, 0.0);
        let s = State::from_amplitudes(3, 2, amps).unwrap();
        let a = reshape_bipartition(&s, &[1]).unwrap();
        let svd = a.matrix().clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert!(sv[0] > 1.0 - 1e-10);
        assert!(sv[1].abs() < 1e-10);
    }

    #[test]
    fn reduced_density_ghz_marginal() {
        let g = ghz(3, 2);
        let rho = reduced_density(&g, &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(rho.matrix()[(i, j)].re, expect, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(linear_entropy(&rho), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn reduced_density_product_state() {
        let s = State::basis_state(3, 2, &[0, 0, 0]).unwrap();
        let rho = reduced_density(&s, &[0, 1]).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(linear_entropy(&rho), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn complementary_marginals_share_spectrum() {
        let g = ghz(4, 2);
        let a = reduced_density(&g, &[0]).unwrap();
        let b = reduced_density(&g, &[1, 2, 3]).unwrap();
        let ea: Vec<f64> = a.eigenvalues().into_iter().filter(|v| *v > 1e-8).collect();
        let eb: Vec<f64> = b.eigenvalues().into_iter().filter(|v| *v > 1e-8).collect();
        assert_eq!(ea.len(), eb.len());
        for (x, y) in ea.iter().zip(eb.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-8);
        }
    }

    #[test]
    fn apply_identity_is_noop() {
        let g = ghz(3, 2);
        let id = DMatrix::<C64>::identity(2, 2);
        let out = apply_local_unitaries(&g, &[id.clone(), id.clone(), id]).unwrap();
        assert_abs_diff_eq!(
            (out.amplitudes() - g.amplitudes()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn apply_bit_flip_on_first_party() {
        let g = ghz(3, 2);
        let x = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        let id = DMatrix::<C64>::identity(2, 2);
        let out = apply_local_unitaries(&g, &[x, id.clone(), id]).unwrap();
        let inv = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(out.amplitude(0b100).re, inv, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitude(0b011).re, inv, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitude(0).re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn apply_rejects_non_unitary() {
        let g = ghz(3, 2);
        let bad = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        let id = DMatrix::<C64>::identity(2, 2);
        assert!(apply_local_unitaries(&g, &[bad, id.clone(), id]).is_err());
    }

    #[test]
    fn overlap_examples() {
        let g = ghz(3, 2);
        let zero = State::basis_state(3, 2, &[0, 0, 0]).unwrap();
        let ones = State::basis_state(3, 2, &[1, 1, 1]).unwrap();
        let inv = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(overlap(&g, &g).unwrap().re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap(&zero, &g).unwrap().re, inv, epsilon = 1e-12);
        assert_abs_diff_eq!(overlap(&g, &ones).unwrap().re, inv, epsilon = 1e-12);
    }
}

//! Classical combinatorial designs (Latin squares, orthogonal pairs,
//! orthogonal arrays), the states they induce, a small library of known
//! states, and a canonicalization pass that strips local phases and
//! relabels levels.
//!
//! Basis labels are 0-based throughout.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{MdentError, Result};
use crate::state::{flat_index, State};
use crate::C64;

/// d×d array with every row and column a permutation of 0..d.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatinSquare {
    pub order: usize,
    pub cells: Vec<Vec<usize>>,
}

impl LatinSquare {
    pub fn is_valid(&self) -> bool {
        let d = self.order;
        if self.cells.len() != d {
            return false;
        }
        for row in &self.cells {
            if row.len() != d {
                return false;
            }
        }
        for i in 0..d {
            let mut row_seen = vec![false; d];
            let mut col_seen = vec![false; d];
            for j in 0..d {
                let r = self.cells[i][j];
                let c = self.cells[j][i];
                if r >= d || c >= d || row_seen[r] || col_seen[c] {
                    return false;
                }
                row_seen[r] = true;
                col_seen[c] = true;
            }
        }
        true
    }
}

/// Cyclic Latin square, cells[i][j] = (i + j) mod d.
pub fn latin_square(d: usize) -> LatinSquare {
    let cells = (0..d)
        .map(|i| (0..d).map(|j| (i + j) % d).collect())
        .collect();
    LatinSquare { order: d, cells }
}

/// True when superimposing the squares yields every ordered symbol pair
/// exactly once.
pub fn are_orthogonal(l1: &LatinSquare, l2: &LatinSquare) -> bool {
    if l1.order != l2.order || !l1.is_valid() || !l2.is_valid() {
        return false;
    }
    let d = l1.order;
    let mut seen = vec![false; d * d];
    for i in 0..d {
        for j in 0..d {
            let pair = l1.cells[i][j] * d + l2.cells[i][j];
            if seen[pair] {
                return false;
            }
            seen[pair] = true;
        }
    }
    true
}

fn is_prime(d: usize) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= d {
        if d % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Orthogonal pair L₁[i][j] = (i + j) mod d, L₂[i][j] = (2i + j) mod d for
/// odd prime d.
pub fn mols_pair(d: usize) -> Result<(LatinSquare, LatinSquare)> {
    if d == 2 {
        return Err(MdentError::NoSuchDesign(
            "no orthogonal pair of order-2 Latin squares exists".into(),
        ));
    }
    if d == 6 {
        return Err(MdentError::NoSuchDesign(
            "no orthogonal pair of order-6 Latin squares exists (the 36-officers \
             problem has no solution)"
                .into(),
        ));
    }
    if !is_prime(d) || d % 2 == 0 {
        return Err(MdentError::InvalidParameter(format!(
            "only odd prime orders are supported, got {}",
            d
        )));
    }
    let l1 = latin_square(d);
    let cells = (0..d)
        .map(|i| (0..d).map(|j| (2 * i + j) % d).collect())
        .collect();
    let l2 = LatinSquare { order: d, cells };
    debug_assert!(are_orthogonal(&l1, &l2));
    Ok((l1, l2))
}

/// r×N symbol array in which every k-column subarray contains each k-tuple
/// equally often.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalArray {
    pub runs: usize,
    pub factors: usize,
    pub levels: usize,
    pub strength: usize,
    pub rows: Vec<Vec<usize>>,
}

impl OrthogonalArray {
    /// Validates the strength invariant exhaustively (integer counts).
    pub fn new(rows: Vec<Vec<usize>>, levels: usize, strength: usize) -> Result<OrthogonalArray> {
        let runs = rows.len();
        if runs == 0 {
            return Err(MdentError::NoSuchDesign("empty array".into()));
        }
        let factors = rows[0].len();
        if factors == 0 || strength == 0 || strength > factors {
            return Err(MdentError::InvalidParameter(format!(
                "need 1 <= strength <= factors, got strength={}, factors={}",
                strength, factors
            )));
        }
        for row in &rows {
            if row.len() != factors {
                return Err(MdentError::NoSuchDesign("ragged rows".into()));
            }
            if row.iter().any(|&s| s >= levels) {
                return Err(MdentError::NoSuchDesign("symbol out of range".into()));
            }
        }
        let tuples = levels.pow(strength as u32);
        if runs % tuples != 0 {
            return Err(MdentError::NoSuchDesign(format!(
                "{} runs cannot cover {} tuples uniformly",
                runs, tuples
            )));
        }
        let index = runs / tuples;
        for cols in crate::uniformity::all_k_subsets(factors, strength) {
            let mut counts = vec![0usize; tuples];
            for row in &rows {
                let mut t = 0usize;
                for &c in &cols {
                    t = t * levels + row[c];
                }
                counts[t] += 1;
            }
            if counts.iter().any(|&c| c != index) {
                return Err(MdentError::NoSuchDesign(format!(
                    "strength-{} invariant fails on columns {:?}",
                    strength, cols
                )));
            }
        }
        Ok(OrthogonalArray {
            runs,
            factors,
            levels,
            strength,
            rows,
        })
    }
}

/// OA(d², 4, d, 2) with rows (i, j, L₁[i][j], L₂[i][j]) in lexicographic
/// (i, j) order.
pub fn oa_from_mols(l1: &LatinSquare, l2: &LatinSquare) -> Result<OrthogonalArray> {
    if !are_orthogonal(l1, l2) {
        return Err(MdentError::NoSuchDesign(
            "the squares are not an orthogonal pair".into(),
        ));
    }
    let d = l1.order;
    let mut rows = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            rows.push(vec![i, j, l1.cells[i][j], l2.cells[i][j]]);
        }
    }
    OrthogonalArray::new(rows, d, 2)
}

/// Equal-weight superposition (1/√r)·Σ_rows |row⟩.
pub fn state_from_oa(oa: &OrthogonalArray) -> Result<State> {
    let dim = oa
        .levels
        .checked_pow(oa.factors as u32)
        .ok_or_else(|| MdentError::InvalidParameter("state dimension overflows".into()))?;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for row in &oa.rows {
        amps[flat_index(row, oa.levels)?] += C64::new(1.0, 0.0);
    }
    State::from_amplitudes(oa.factors, oa.levels, amps)
}

/// (1/√d)·Σ_j |j…j⟩ on n parties.
pub fn ghz(n: usize, d: usize) -> Result<State> {
    let dim = d
        .checked_pow(n as u32)
        .ok_or_else(|| MdentError::InvalidParameter("state dimension overflows".into()))?;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for j in 0..d {
        amps[flat_index(&vec![j; n], d)?] = C64::new(1.0, 0.0);
    }
    State::from_amplitudes(n, d, amps)
}

const O16_NEG: &[[usize; 4]] = &[
    [0, 0, 2, 2],
    [0, 0, 3, 3],
    [0, 1, 1, 0],
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 0, 2],
    [0, 2, 2, 0],
    [0, 2, 3, 1],
    [0, 3, 0, 3],
    [1, 0, 1, 0],
    [1, 1, 0, 0],
    [1, 1, 3, 3],
    [1, 2, 0, 3],
    [1, 2, 2, 1],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 1, 3],
    [1, 3, 3, 1],
    [2, 0, 0, 2],
    [2, 0, 1, 3],
    [2, 0, 2, 0],
    [2, 1, 2, 1],
    [2, 2, 0, 0],
    [2, 2, 1, 1],
    [2, 2, 2, 2],
    [2, 2, 3, 3],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [2, 3, 2, 3],
    [3, 0, 0, 3],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 1, 3],
    [3, 1, 2, 0],
    [3, 1, 3, 1],
    [3, 2, 2, 3],
    [3, 3, 1, 1],
    [3, 3, 3, 3],
];

const O16_POS: &[[usize; 4]] = &[
    [0, 0, 0, 0],
    [0, 0, 1, 1],
    [0, 1, 0, 1],
    [0, 2, 1, 3],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [0, 3, 3, 0],
    [1, 0, 0, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 1, 1, 1],
    [1, 1, 2, 2],
    [1, 2, 1, 2],
    [1, 3, 2, 0],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 1, 2],
    [2, 1, 3, 0],
    [2, 3, 3, 2],
    [3, 0, 3, 0],
    [3, 1, 0, 2],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
    [3, 2, 3, 2],
    [3, 3, 0, 0],
    [3, 3, 2, 2],
];

// 28-term local form of the same state: moduli 1/4 on the diagonal kets
// and 1/(4√2) elsewhere, phases in {±1, ±i}.
const O16_REF_QUARTER: &[[usize; 4]] = &[[0, 0, 0, 0], [1, 1, 1, 1], [2, 2, 2, 2], [3, 3, 3, 3]];
const O16_REF_PLUS: &[[usize; 4]] = &[
    [0, 2, 3, 1],
    [1, 0, 3, 2],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 2, 1, 0],
];
const O16_REF_MINUS: &[[usize; 4]] = &[
    [0, 1, 2, 3],
    [0, 2, 1, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
];
const O16_REF_PLUS_I: &[[usize; 4]] = &[[0, 1, 3, 2], [0, 3, 2, 1], [1, 3, 2, 0], [3, 1, 0, 2]];
const O16_REF_MINUS_I: &[[usize; 4]] = &[[0, 3, 1, 2], [1, 0, 2, 3], [1, 2, 0, 3], [2, 1, 0, 3]];

/// Hard-coded reference states: `ghz3`, `ame_4_3`, `o16`, `o16_ref`.
pub fn known_state(name: &str) -> Result<State> {
    match name {
        "ghz3" => ghz(3, 2),
        "ame_4_3" => {
            // Minimal-support AME(4,3): nine kets (i, j, i+j, 2i+j) mod 3.
            let mut amps = vec![C64::new(0.0, 0.0); 81];
            for i in 0..3usize {
                for j in 0..3usize {
                    amps[flat_index(&[i, j, (i + j) % 3, (2 * i + j) % 3], 3)?] =
                        C64::new(1.0, 0.0);
                }
            }
            State::from_amplitudes(4, 3, amps)
        }
        "o16" => {
            let mut amps = vec![C64::new(0.0, 0.0); 256];
            for t in O16_NEG {
                amps[flat_index(t, 4)?] = C64::new(-0.125, 0.0);
            }
            for t in O16_POS {
                amps[flat_index(t, 4)?] = C64::new(0.125, 0.0);
            }
            State::from_amplitudes(4, 4, amps)
        }
        "o16_ref" => {
            let r = 1.0 / (4.0 * 2.0f64.sqrt());
            let mut amps = vec![C64::new(0.0, 0.0); 256];
            for t in O16_REF_QUARTER {
                amps[flat_index(t, 4)?] = C64::new(0.25, 0.0);
            }
            for t in O16_REF_PLUS {
                amps[flat_index(t, 4)?] = C64::new(r, 0.0);
            }
            for t in O16_REF_MINUS {
                amps[flat_index(t, 4)?] = C64::new(-r, 0.0);
            }
            for t in O16_REF_PLUS_I {
                amps[flat_index(t, 4)?] = C64::new(0.0, r);
            }
            for t in O16_REF_MINUS_I {
                amps[flat_index(t, 4)?] = C64::new(0.0, -r);
            }
            State::from_amplitudes(4, 4, amps)
        }
        other => Err(MdentError::UnknownState(format!(
            "unknown state '{}'; available: ghz3, ame_4_3, o16, o16_ref",
            other
        ))),
    }
}

const PHASE_SWEEP_TOL: f64 = 1e-14;
const WEIGHT_TIE_TOL: f64 = 1e-9;
const PASS_TOL: f64 = 1e-14;
const MAX_PASSES: usize = 32;

struct Layout {
    n: usize,
    d: usize,
    strides: Vec<usize>,
}

impl Layout {
    fn of(state: &State) -> Layout {
        let n = state.n_parties();
        let d = state.local_dim();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * d;
        }
        Layout { n, d, strides }
    }

    fn digit(&self, flat: usize, party: usize) -> usize {
        flat / self.strides[party] % self.d
    }

    fn for_slice(&self, dim: usize, party: usize, level: usize, mut f: impl FnMut(usize)) {
        for flat in 0..dim {
            if self.digit(flat, party) == level {
                f(flat);
            }
        }
    }
}

fn apply_global_phase(amps: &mut [C64]) {
    let mut best = 0usize;
    for (i, a) in amps.iter().enumerate() {
        if a.norm_sqr() > amps[best].norm_sqr() {
            best = i;
        }
    }
    let a = amps[best];
    let norm = a.norm();
    if norm > 0.0 {
        let phase = a.conj() / C64::new(norm, 0.0);
        for x in amps.iter_mut() {
            *x *= phase;
        }
    }
}

fn greedy_level_phases(amps: &mut [C64], lay: &Layout, tol: f64) {
    // Anchor of (party, level): the heaviest coefficient carrying that
    // digit. Moduli are phase-invariant, so anchors are chosen once.
    let mut anchors: Vec<(f64, usize, usize, usize)> = Vec::new();
    for party in 0..lay.n {
        for level in 0..lay.d {
            let mut best: Option<usize> = None;
            lay.for_slice(amps.len(), party, level, |flat| {
                let m = amps[flat].norm();
                if m > tol && best.map_or(true, |b| m > amps[b].norm()) {
                    best = Some(flat);
                }
            });
            if let Some(flat) = best {
                anchors.push((amps[flat].norm(), party, level, flat));
            }
        }
    }
    anchors.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    for (_, party, level, flat) in anchors {
        let a = amps[flat];
        if a.norm() == 0.0 {
            continue;
        }
        let phase = Complex::from_polar(1.0, -a.arg());
        lay.for_slice(amps.len(), party, level, |x| {
            amps[x] *= phase;
        });
    }
}

fn polish_level_phases(amps: &mut [C64], lay: &Layout) {
    // Coordinate ascent on G = Σ |c|·Re(c), whose maximum over diagonal
    // phases is attained exactly when every coefficient is real positive
    // (when that is reachable at all).
    for _ in 0..1000 {
        let mut gain = 0.0;
        for party in 0..lay.n {
            for level in 0..lay.d {
                let mut s = C64::new(0.0, 0.0);
                lay.for_slice(amps.len(), party, level, |x| {
                    s += amps[x] * C64::new(amps[x].norm(), 0.0);
                });
                let step = s.norm() - s.re;
                if step <= 0.0 || s.norm() == 0.0 {
                    continue;
                }
                let phase = Complex::from_polar(1.0, -s.arg());
                lay.for_slice(amps.len(), party, level, |x| {
                    amps[x] *= phase;
                });
                gain += step;
            }
        }
        if gain < PHASE_SWEEP_TOL {
            break;
        }
    }
}

fn level_signature(amps: &[C64], lay: &Layout, party: usize, level: usize, tol: f64) -> Vec<u64> {
    let quant = tol.max(1e-12);
    let mut sig = Vec::with_capacity(amps.len() / lay.d);
    lay.for_slice(amps.len(), party, level, |x| {
        sig.push((amps[x].norm() / quant).round() as u64);
    });
    sig
}

fn permute_levels(amps: &mut Vec<C64>, lay: &Layout, tol: f64) {
    for party in 0..lay.n {
        let mut weights = vec![0.0f64; lay.d];
        for (flat, a) in amps.iter().enumerate() {
            weights[lay.digit(flat, party)] += a.norm_sqr();
        }
        let mut order: Vec<usize> = (0..lay.d).collect();
        let keys: Vec<(i64, Vec<u64>)> = (0..lay.d)
            .map(|j| {
                (
                    -((weights[j] / WEIGHT_TIE_TOL).round() as i64),
                    level_signature(amps, lay, party, j, tol),
                )
            })
            .collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        if order.iter().enumerate().all(|(p, &j)| p == j) {
            continue;
        }
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (flat, a) in amps.iter().enumerate() {
            let old = lay.digit(flat, party);
            let new_level = order.iter().position(|&j| j == old).unwrap();
            let shift = (new_level as isize - old as isize) * lay.strides[party] as isize;
            out[(flat as isize + shift) as usize] = *a;
        }
        *amps = out;
    }
}

/// Phase and relabeling normal form: a global phase makes the heaviest
/// coefficient real positive, per-level diagonal phases greedily (then by
/// coordinate ascent) push coefficients toward the positive real axis, and
/// each party's levels are sorted by marginal weight. The probability
/// multiset is untouched, so every S_q and every marginal spectrum is
/// preserved.
pub fn canonicalize(state: &State, tol: f64) -> State {
    let lay = Layout::of(state);
    let mut amps: Vec<C64> = state.amplitudes().iter().cloned().collect();
    for _ in 0..MAX_PASSES {
        let before = amps.clone();
        apply_global_phase(&mut amps);
        greedy_level_phases(&mut amps, &lay, tol);
        polish_level_phases(&mut amps, &lay);
        permute_levels(&mut amps, &lay, tol);
        let delta = amps
            .iter()
            .zip(before.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        if delta < PASS_TOL {
            break;
        }
    }
    State::from_amplitudes(state.n_parties(), state.local_dim(), amps)
        .expect("canonicalization preserves the norm")
}

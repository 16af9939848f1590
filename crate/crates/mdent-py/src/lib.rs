//! Python bindings for the mdent library.
//!
//! States cross the boundary as flat lists of Python complex numbers in
//! row-major order (party 0 most significant), matching the JSON layout
//! used by the CLI. Structured results come back as plain dicts so the
//! Python side needs no wrapper types.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mdent::amegen::{self, GenConfig};
use mdent::designs;
use mdent::entropy::{self, Order};
use mdent::minent::{minimize_entropy, MinEntropyConfig};
use mdent::random::DEFAULT_SEED;
use mdent::seesaw::{s_infinity_min, SeesawConfig};
use mdent::uniformity;
use mdent::{C64, State};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn build_state(amps: Vec<C64>, n_parties: usize, local_dim: usize) -> PyResult<State> {
    State::from_amplitudes(n_parties, local_dim, amps).map_err(value_err)
}

fn state_tuple(state: &State) -> (Vec<C64>, usize, usize) {
    (
        state.amplitudes().iter().copied().collect(),
        state.n_parties(),
        state.local_dim(),
    )
}

/// Accepts a float (finite order) or the string "inf".
fn parse_order(q: Option<&Bound<'_, PyAny>>) -> PyResult<Order> {
    let Some(q) = q else {
        return Ok(Order::Finite(2.0));
    };
    if let Ok(x) = q.extract::<f64>() {
        if !x.is_finite() || x < 0.0 {
            return Err(PyValueError::new_err(format!(
                "order must be non-negative and finite, got {}",
                x
            )));
        }
        return Ok(Order::Finite(x));
    }
    let text: String = q.extract()?;
    Order::parse(&text).map_err(value_err)
}

/// Amplitudes of a built-in state, as (amplitudes, n_parties, local_dim).
///
/// Known names: "ghz3", "ame_4_3", "o16", "o16_ref".
#[pyfunction]
fn known_state(name: &str) -> PyResult<(Vec<C64>, usize, usize)> {
    let state = designs::known_state(name).map_err(value_err)?;
    Ok(state_tuple(&state))
}

/// GHZ state of n parties with local dimension d.
#[pyfunction]
fn ghz(n_parties: usize, local_dim: usize) -> PyResult<(Vec<C64>, usize, usize)> {
    let state = designs::ghz(n_parties, local_dim).map_err(value_err)?;
    Ok(state_tuple(&state))
}

/// Decomposition entropy S_q of the amplitudes in the computational basis.
///
/// q may be a non-negative float or the string "inf".
#[pyfunction]
#[pyo3(signature = (amplitudes, n_parties, local_dim, q=None))]
fn renyi_entropy(
    amplitudes: Vec<C64>,
    n_parties: usize,
    local_dim: usize,
    q: Option<&Bound<'_, PyAny>>,
) -> PyResult<f64> {
    let state = build_state(amplitudes, n_parties, local_dim)?;
    entropy::renyi_entropy(&state, parse_order(q)?).map_err(value_err)
}

/// Number of amplitudes with |c|^2 above tol.
#[pyfunction]
#[pyo3(signature = (amplitudes, n_parties, local_dim, tol=1e-12))]
fn support(amplitudes: Vec<C64>, n_parties: usize, local_dim: usize, tol: f64) -> PyResult<usize> {
    let state = build_state(amplitudes, n_parties, local_dim)?;
    entropy::support(&state, tol).map_err(value_err)
}

/// Minimize S_q over local product bases.
///
/// Returns a dict with keys "entropy", "units" (per-party unitary rows),
/// "amplitudes" (the state rotated into the best basis), "best_restart".
#[pyfunction]
#[pyo3(signature = (amplitudes, n_parties, local_dim, q=None, restarts=20, seed=None))]
fn min_entropy<'py>(
    py: Python<'py>,
    amplitudes: Vec<C64>,
    n_parties: usize,
    local_dim: usize,
    q: Option<&Bound<'py, PyAny>>,
    restarts: usize,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let state = build_state(amplitudes, n_parties, local_dim)?;
    let order = match parse_order(q)? {
        Order::Finite(x) => x,
        Order::Infinity => {
            return Err(PyValueError::new_err(
                "use gme_seesaw for the infinite-order minimum",
            ))
        }
    };
    let mut cfg = MinEntropyConfig::new(order);
    cfg.restarts = restarts;
    cfg.seed = seed.unwrap_or(DEFAULT_SEED);
    let res = minimize_entropy(&state, &cfg).map_err(value_err)?;

    let units: Vec<Vec<Vec<C64>>> = res
        .units
        .iter()
        .map(|u| {
            (0..u.nrows())
                .map(|i| u.row(i).iter().copied().collect())
                .collect()
        })
        .collect();
    let out = PyDict::new(py);
    out.set_item("entropy", res.entropy)?;
    out.set_item("units", units)?;
    out.set_item(
        "amplitudes",
        res.optimized_state
            .amplitudes()
            .iter()
            .copied()
            .collect::<Vec<C64>>(),
    )?;
    out.set_item("best_restart", res.best_restart)?;
    Ok(out)
}

/// Seesaw for the closest product state.
///
/// Returns a dict with keys "lambda" (max overlap), "s_inf_min", "gme",
/// "factors" (one vector per party).
#[pyfunction]
#[pyo3(signature = (amplitudes, n_parties, local_dim, restarts=50, seed=None))]
fn gme_seesaw<'py>(
    py: Python<'py>,
    amplitudes: Vec<C64>,
    n_parties: usize,
    local_dim: usize,
    restarts: usize,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let state = build_state(amplitudes, n_parties, local_dim)?;
    let mut cfg = SeesawConfig::default();
    cfg.restarts = restarts;
    cfg.seed = seed.unwrap_or(DEFAULT_SEED);
    let res = s_infinity_min(&state, &cfg).map_err(value_err)?;

    let factors: Vec<Vec<C64>> = res
        .prod
        .factors
        .iter()
        .map(|f| f.iter().copied().collect())
        .collect();
    let out = PyDict::new(py);
    out.set_item("lambda", res.lambda)?;
    out.set_item("s_inf_min", res.s_inf_min)?;
    out.set_item("gme", res.gme)?;
    out.set_item("factors", factors)?;
    Ok(out)
}

/// Search for a k-uniform state of n qudits of dimension d.
///
/// Returns a dict with keys "success", "f_final", "iterations",
/// "max_deviation", "amplitudes". A failed search still returns the best
/// state found; check "success".
#[pyfunction]
#[pyo3(signature = (n_parties, local_dim, k, restarts=10, max_iters=5000, f_tol=1e-10, seed=None))]
fn generate_kuniform<'py>(
    py: Python<'py>,
    n_parties: usize,
    local_dim: usize,
    k: usize,
    restarts: usize,
    max_iters: usize,
    f_tol: f64,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = GenConfig::new(n_parties, local_dim, k);
    cfg.restarts = restarts;
    cfg.max_iters = max_iters;
    cfg.f_tol = f_tol;
    cfg.seed = seed.unwrap_or(DEFAULT_SEED);
    let res = amegen::generate_kuniform(&cfg).map_err(value_err)?;

    let out = PyDict::new(py);
    out.set_item("success", res.success)?;
    out.set_item("f_final", res.f_final)?;
    out.set_item("iterations", res.iters)?;
    out.set_item("max_deviation", res.report.max_deviation)?;
    out.set_item(
        "amplitudes",
        res.state.amplitudes().iter().copied().collect::<Vec<C64>>(),
    )?;
    Ok(out)
}

/// Check every k-party reduction for maximal mixedness.
///
/// Returns a dict with keys "is_uniform", "max_deviation", "k".
#[pyfunction]
#[pyo3(signature = (amplitudes, n_parties, local_dim, k, tol=1e-6))]
fn check_k_uniform<'py>(
    py: Python<'py>,
    amplitudes: Vec<C64>,
    n_parties: usize,
    local_dim: usize,
    k: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let state = build_state(amplitudes, n_parties, local_dim)?;
    let report = uniformity::check_k_uniform(&state, k, tol).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("is_uniform", report.is_uniform)?;
    out.set_item("max_deviation", report.max_deviation)?;
    out.set_item("k", report.k)?;
    Ok(out)
}

/// True when the state is floor(n/2)-uniform.
#[pyfunction]
#[pyo3(signature = (amplitudes, n_parties, local_dim, tol=1e-6))]
fn is_ame(amplitudes: Vec<C64>, n_parties: usize, local_dim: usize, tol: f64) -> PyResult<bool> {
    let state = build_state(amplitudes, n_parties, local_dim)?;
    uniformity::is_ame(&state, tol).map_err(value_err)
}

/// floor(n/2) * ln d, the minimum S_q of any AME state.
#[pyfunction]
fn ame_lower_bound(n_parties: usize, local_dim: usize) -> f64 {
    entropy::ame_lower_bound(n_parties, local_dim)
}

/// ln(d^n - n*d*(d-1)/2), the entropy ceiling set by the sparsest
/// representation local unitaries can always reach.
#[pyfunction]
fn support_upper_bound(n_parties: usize, local_dim: usize) -> PyResult<f64> {
    entropy::support_upper_bound(n_parties, local_dim).map_err(value_err)
}

#[pymodule]
fn mdent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(known_state, m)?)?;
    m.add_function(wrap_pyfunction!(ghz, m)?)?;
    m.add_function(wrap_pyfunction!(renyi_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(support, m)?)?;
    m.add_function(wrap_pyfunction!(min_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(gme_seesaw, m)?)?;
    m.add_function(wrap_pyfunction!(generate_kuniform, m)?)?;
    m.add_function(wrap_pyfunction!(check_k_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(is_ame, m)?)?;
    m.add_function(wrap_pyfunction!(ame_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(support_upper_bound, m)?)?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    Ok(())
}

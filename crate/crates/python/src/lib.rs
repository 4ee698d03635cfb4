//! Python module `spinbound`: states, observables and models as classes,
//! bounds and oracles as functions. Matrices cross the boundary as nested
//! lists of complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinbound::bounds as b;
use spinbound::infomeasures as im;
use spinbound::models as m;
use spinbound::oracles::{self as o, OptimizerConfig};
use spinbound::qcore::{self as q, CMatrix};

fn err(e: spinbound::Error) -> PyErr {
    match e {
        spinbound::Error::NonConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

#[pyclass(name = "DensityMatrix", module = "spinbound")]
#[derive(Clone)]
struct PyDensityMatrix(q::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self(q::DensityMatrix::new(to_matrix(rows)?).map_err(err)?))
    }

    /// Qubit state (1 + r·σ)/2.
    #[staticmethod]
    fn from_bloch(r: [f64; 3]) -> PyResult<Self> {
        Ok(Self(q::DensityMatrix::from_bloch(r).map_err(err)?))
    }

    #[staticmethod]
    fn from_pure(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self(q::DensityMatrix::pure(&amplitudes).map_err(err)?))
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> Self {
        Self(q::DensityMatrix::maximally_mixed(dim))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn purity(&self) -> f64 {
        self.0.purity()
    }

    fn expectation(&self, h: &PyObservable) -> PyResult<f64> {
        self.0.expectation(&h.0).map_err(err)
    }

    fn tensor(&self, other: &PyDensityMatrix) -> Self {
        Self(self.0.tensor(&other.0))
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.0.matrix())
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.0.dim())
    }
}

#[pyclass(name = "Observable", module = "spinbound")]
#[derive(Clone)]
struct PyObservable(q::Observable);

#[pymethods]
impl PyObservable {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self(q::Observable::new(to_matrix(rows)?).map_err(err)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.0.matrix())
    }

    fn __repr__(&self) -> String {
        format!("Observable(dim={})", self.0.dim())
    }
}

/// Spin-1/2 operators [j_x, j_y, j_z] = σ/2.
#[pyfunction]
fn spin_half() -> Vec<PyObservable> {
    q::spin_half().into_iter().map(PyObservable).collect()
}

#[pyclass(name = "ModelSpec", module = "spinbound")]
#[derive(Clone)]
struct PyModelSpec(m::ModelSpec);

#[pymethods]
impl PyModelSpec {
    /// Parses the model JSON {n, d, terms: [{j, h}], b, edges, generators?}.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(m::ModelSpec::from_json_str(text).map_err(err)?))
    }

    /// Periodic ring −J Σ j_z j_z − Σ_l B_l Σ σ_l.
    #[staticmethod]
    fn ising_ring(n: usize, j: f64, field: [f64; 3]) -> PyResult<Self> {
        Ok(Self(m::ising_ring(n, j, field).map_err(err)?))
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json_string().map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    fn ground_energy(&self) -> PyResult<f64> {
        let h = m::build_hamiltonian(&self.0).map_err(err)?;
        Ok(o::ground_state(&h).map_err(err)?.energy)
    }
}

#[pyfunction]
fn qfi(rho: &PyDensityMatrix, h: &PyObservable) -> PyResult<f64> {
    im::qfi(&rho.0, &h.0).map_err(err)
}

#[pyfunction]
fn wy_skew(rho: &PyDensityMatrix, h: &PyObservable) -> PyResult<f64> {
    im::wy_skew(&rho.0, &h.0).map_err(err)
}

#[pyfunction]
fn fidelity(rho: &PyDensityMatrix, sigma: &PyDensityMatrix) -> PyResult<f64> {
    im::fidelity(&rho.0, &sigma.0).map_err(err)
}

/// Largest Σ_l ⟨h_l⊗h_l⟩ over separable couplings of ϱ with itself, with
/// its exactness flag ("exact", "upper_bound" or "lower_bound").
#[pyfunction]
fn sep_corr_max(rho: &PyDensityMatrix, hs: Vec<PyObservable>) -> PyResult<(f64, String)> {
    let ops: Vec<q::Observable> = hs.into_iter().map(|h| h.0).collect();
    let v = im::sep_corr_max(&rho.0, &ops).map_err(err)?;
    Ok((v.value, exactness_name(v.exactness)))
}

/// Largest ⟨h⊗h⟩ over all two-qubit states with both marginals ϱ.
#[pyfunction]
fn any_state_corr_max(rho: &PyDensityMatrix, h: &PyObservable) -> PyResult<f64> {
    im::any_state_corr_max_qubit(&rho.0, &h.0).map_err(err)
}

fn exactness_name(e: im::Exactness) -> String {
    serde_json::to_value(e).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Decomposition search for the largest Σ_k p_k Σ_l ⟨h_l⟩²_{ψ_k}.
#[pyfunction]
#[pyo3(signature = (rho, hs, seed = 0, restarts = 16))]
fn roof_max(rho: &PyDensityMatrix, hs: Vec<PyObservable>, seed: u64, restarts: usize) -> PyResult<f64> {
    let ops: Vec<q::Observable> = hs.into_iter().map(|h| h.0).collect();
    let cfg = OptimizerConfig { restarts, ..OptimizerConfig::with_seed(seed) };
    Ok(o::roof_max(&rho.0, &ops, &cfg).map_err(err)?.value)
}

/// Separable-coupling maximum of Σ_l ⟨j_l⊗j_l⟩ for qubit marginals ϱ, σ,
/// as (value, feasibility residual).
#[pyfunction]
#[pyo3(signature = (rho, sigma, seed = 0))]
fn sep_heisenberg_max(rho: &PyDensityMatrix, sigma: &PyDensityMatrix, seed: u64) -> PyResult<(f64, f64)> {
    let s = q::spin_half();
    let obj = s.iter().map(|j| q::tensor(j.matrix(), j.matrix())).fold(CMatrix::zeros(4, 4), |a, b| a + b);
    let r = o::sep_couple_opt(&rho.0, &sigma.0, &q::Observable::new(obj).map_err(err)?, o::Direction::Max, &OptimizerConfig::with_seed(seed))
        .map_err(err)?;
    Ok((r.value, r.residual))
}

#[pyfunction]
fn chain_sandwich<'py>(py: Python<'py>, n: usize, j: f64, bx: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = b::chain_sandwich_point(n, j, bx).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("bx", p.bx)?;
    d.set_item("jx_expect", p.jx_expect)?;
    d.set_item("e_ground", p.e_ground)?;
    d.set_item("e_sep_qfi", p.e_sep_qfi)?;
    d.set_item("e_lower_wy", p.e_lower_wy)?;
    d.set_item("corr_ground", p.corr_ground)?;
    d.set_item("corr_sep", p.corr_sep)?;
    d.set_item("corr_wy", p.corr_wy)?;
    Ok(d)
}

#[pyfunction]
fn collective_qfi<'py>(py: Python<'py>, n: usize, j: f64, bx: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = b::collective_qfi_point(n, j, bx).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", p.n)?;
    d.set_item("bx", p.bx)?;
    d.set_item("sx_expect", p.sx_expect)?;
    d.set_item("fq_true", p.fq_true)?;
    d.set_item("fq_bound", p.fq_bound)?;
    d.set_item("delta", p.delta)?;
    d.set_item("delta_cap", p.delta_cap)?;
    Ok(d)
}

/// k-producible bounds for the N-site Ising ring (B = 0) with every
/// marginal ϱ.
#[pyfunction]
#[pyo3(signature = (rho, k, n, j = 1.0, seed = 0))]
fn kprod_bounds<'py>(py: Python<'py>, rho: &PyDensityMatrix, k: usize, n: usize, j: f64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let h = q::spin_half()[2].clone();
    let r = b::kprod_bounds(&rho.0, k, n, j, &[0.0; 3], &h, &q::pauli(), &OptimizerConfig::with_seed(seed)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("qfi", r.qfi)?;
    d.set_item("product", r.product)?;
    d.set_item("wy", r.wy)?;
    d.set_item("block_min", r.block_min)?;
    d.set_item("block_residual", r.block_residual)?;
    Ok(d)
}

#[pyfunction]
fn pfeuty_energy(j: f64, bx: f64) -> f64 {
    b::pfeuty_energy(j, bx)
}

#[pyfunction]
fn pfeuty_constrained_energy(j: f64, sx: f64) -> PyResult<f64> {
    b::pfeuty_constrained_energy(j, sx).map_err(err)
}

/// Separable lower bound Σ bonds + field for `model` at marginal ϱ over
/// "sep" or "sym_sep" states, as (value, exactness, saturated).
#[pyfunction]
#[pyo3(signature = (model, rho, set = "sep", seed = None))]
fn e_sep_lower(model: &PyModelSpec, rho: &PyDensityMatrix, set: &str, seed: Option<u64>) -> PyResult<(f64, String, bool)> {
    let set = match set {
        "sep" => im::TwoPartySet::Sep,
        "sym_sep" => im::TwoPartySet::SymSep,
        other => return Err(PyValueError::new_err(format!("unknown set {other:?}; expected \"sep\" or \"sym_sep\""))),
    };
    let cfg = seed.map(OptimizerConfig::with_seed);
    let r = b::e_sep_lower(&model.0, &rho.0, set, cfg.as_ref()).map_err(err)?;
    Ok((r.value, exactness_name(r.exactness), r.saturated))
}

/// Every bound that applies to `model`, as the report JSON string.
#[pyfunction]
#[pyo3(signature = (model, rho = None, seed = 0))]
fn bound_report(model: &PyModelSpec, rho: Option<&PyDensityMatrix>, seed: u64) -> PyResult<String> {
    let cfg = OptimizerConfig::with_seed(seed);
    let r = b::bound_report(&model.0, rho.map(|r| &r.0), Some(&cfg)).map_err(err)?;
    r.to_json_string().map_err(err)
}

/// Evaluates an entanglement criterion on a two-party state:
/// corr_qfi / sym_two_sided need `h`, sym_two_ops needs `h` and `h2`,
/// fidelity_corr needs neither. Returns (lhs, rhs, applicable, violated).
#[pyfunction]
#[pyo3(signature = (criterion, state, h = None, h2 = None))]
fn witness(criterion: &str, state: &PyDensityMatrix, h: Option<&PyObservable>, h2: Option<&PyObservable>) -> PyResult<(f64, f64, bool, bool)> {
    let c: b::Criterion =
        serde_json::from_value(serde_json::Value::String(criterion.into())).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let missing = |name: &str| PyValueError::new_err(format!("{criterion} needs {name}"));
    let (h1, h2) = (h.map(|x| &x.0), h2.map(|x| &x.0));
    let input = match c {
        b::Criterion::CorrQfi | b::Criterion::SymTwoSided => b::WitnessInput::Pair { state: &state.0, h: h1.ok_or_else(|| missing("h"))? },
        b::Criterion::SymTwoOps => b::WitnessInput::PairTwoOps {
            state: &state.0,
            h1: h1.ok_or_else(|| missing("h"))?,
            h2: h2.ok_or_else(|| missing("h2"))?,
        },
        b::Criterion::FidelityCorr => b::WitnessInput::QubitPair { state: &state.0 },
        b::Criterion::CollectiveQfi => return Err(PyValueError::new_err("collective_qfi takes collective moments, not a pair state")),
    };
    let r = b::witness(c, input).map_err(err)?;
    Ok((r.lhs, r.rhs, r.applicable, r.violated))
}

/// Runs a verification suite; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (suite, trials, seed = 0))]
fn verify<'py>(py: Python<'py>, suite: &str, trials: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let s: spinbound::verify::Suite = suite.parse().map_err(err)?;
    let r = py.allow_threads(|| spinbound::verify::run_suite(s, seed, trials));
    let d = PyDict::new(py);
    d.set_item("suite", r.suite.name())?;
    d.set_item("trials", r.trials)?;
    d.set_item("passed", r.passed)?;
    d.set_item("failed", r.failed)?;
    d.set_item("worst_abs_err", r.worst_abs_err)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "spinbound")]
fn spinbound_module(module: &Bound<'_, PyModule>) -> PyResult<()> {
    module.add_class::<PyDensityMatrix>()?;
    module.add_class::<PyObservable>()?;
    module.add_class::<PyModelSpec>()?;
    module.add_function(wrap_pyfunction!(spin_half, module)?)?;
    module.add_function(wrap_pyfunction!(qfi, module)?)?;
    module.add_function(wrap_pyfunction!(wy_skew, module)?)?;
    module.add_function(wrap_pyfunction!(fidelity, module)?)?;
    module.add_function(wrap_pyfunction!(sep_corr_max, module)?)?;
    module.add_function(wrap_pyfunction!(any_state_corr_max, module)?)?;
    module.add_function(wrap_pyfunction!(roof_max, module)?)?;
    module.add_function(wrap_pyfunction!(sep_heisenberg_max, module)?)?;
    module.add_function(wrap_pyfunction!(chain_sandwich, module)?)?;
    module.add_function(wrap_pyfunction!(collective_qfi, module)?)?;
    module.add_function(wrap_pyfunction!(kprod_bounds, module)?)?;
    module.add_function(wrap_pyfunction!(pfeuty_energy, module)?)?;
    module.add_function(wrap_pyfunction!(pfeuty_constrained_energy, module)?)?;
    module.add_function(wrap_pyfunction!(e_sep_lower, module)?)?;
    module.add_function(wrap_pyfunction!(bound_report, module)?)?;
    module.add_function(wrap_pyfunction!(witness, module)?)?;
    module.add_function(wrap_pyfunction!(verify, module)?)?;
    Ok(())
}

//! Python bindings. Reports come back as plain dicts built from the same JSON
//! the command-line tool prints.

use cantor_cusp::exponents;
use cantor_cusp::grid::{self, BoundingBox, DomainSide, GridFunction};
use cantor_cusp::integrals::{self, Side};
use cantor_cusp::verify::{self, VerifyConfig, DEFAULT_SEED};
use cantor_cusp::witness::{self, WitnessParams, WitnessSide};
use cantor_cusp::{geometry, reflection, LocateResult, PlanePoint};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(cantor_cusp_py, CantorCuspError, PyValueError);

fn err(e: cantor_cusp::Error) -> PyErr {
    CantorCuspError::new_err((e.to_string(), e.kind()))
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for cantor_cusp::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn witness_side(side: &str) -> PyResult<WitnessSide> {
    match side {
        "upper" => Ok(WitnessSide::Upper),
        "lower" => Ok(WitnessSide::Lower),
        other => Err(PyValueError::new_err(format!(
            "side must be 'upper' or 'lower', got {other:?}"
        ))),
    }
}

fn domain_side(side: &str) -> PyResult<DomainSide> {
    Ok(match witness_side(side)? {
        WitnessSide::Upper => DomainSide::Upper,
        WitnessSide::Lower => DomainSide::Lower,
    })
}

fn bbox(b: (f64, f64, f64, f64)) -> PyResult<BoundingBox> {
    BoundingBox::new(b.0, b.1, b.2, b.3).py()
}

/// The cusp profile `psi(x) = dist(x, C)^alpha`.
#[pyclass(name = "CuspProfile", module = "cantor_cusp_py", frozen)]
struct PyCuspProfile(cantor_cusp::CuspProfile);

#[pymethods]
impl PyCuspProfile {
    #[new]
    #[pyo3(signature = (alpha, depth = None))]
    fn new(alpha: f64, depth: Option<u32>) -> PyResult<Self> {
        let profile = match depth {
            Some(d) => cantor_cusp::CuspProfile::with_depth(alpha, d),
            None => cantor_cusp::CuspProfile::new(alpha),
        };
        Ok(Self(profile.py()?))
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.depth()
    }

    /// Certified enclosure `(lo, hi)` of `psi(x1)`.
    fn psi(&self, x1: f64) -> (f64, f64) {
        let v = self.0.psi(x1);
        (v.lo, v.hi)
    }

    fn psi_derivative(&self, x1: f64) -> Option<f64> {
        self.0.psi_derivative(x1)
    }

    #[pyo3(signature = (x1, x2, tol = 0.0))]
    fn classify<'py>(
        &self,
        py: Python<'py>,
        x1: f64,
        x2: f64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.classify(PlanePoint::new(x1, x2), tol))
    }

    fn zone(&self, x1: f64, x2: f64) -> PyResult<String> {
        Ok(reflection::zone(&self.0, PlanePoint::new(x1, x2))
            .py()?
            .to_string())
    }

    fn reflect(&self, x1: f64, x2: f64) -> PyResult<(f64, f64)> {
        let r = cantor_cusp::reflect(&self.0, PlanePoint::new(x1, x2)).py()?;
        Ok((r.x1, r.x2))
    }

    /// Image, differential and `|det|` of the reflection at a point.
    fn reflect_jet<'py>(&self, py: Python<'py>, x1: f64, x2: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(
            py,
            &cantor_cusp::reflect_jet(&self.0, PlanePoint::new(x1, x2)).py()?,
        )
    }

    fn __repr__(&self) -> String {
        format!(
            "CuspProfile(alpha={}, depth={})",
            self.0.alpha(),
            self.0.depth()
        )
    }
}

/// Cell-centred samples of a function on one side of the graph.
#[pyclass(name = "GridFunction", module = "cantor_cusp_py", frozen)]
struct PyGridFunction(GridFunction);

#[pymethods]
impl PyGridFunction {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.ny, self.0.nx)
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h
    }

    /// Row-major values, `None` where a cell carries no value.
    fn values(&self) -> Vec<Option<f64>> {
        self.0
            .values()
            .iter()
            .map(|v| (!v.is_nan()).then_some(*v))
            .collect()
    }

    fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.0.value(i, j)
    }

    /// Extension across the graph by reflection.
    fn extend(&self) -> PyResult<Self> {
        let profile = cantor_cusp::CuspProfile::new(self.0.alpha).py()?;
        Ok(Self(grid::extend(&profile, &self.0).py()?))
    }

    #[pyo3(signature = (p, window = None))]
    fn sobolev_norm<'py>(
        &self,
        py: Python<'py>,
        p: f64,
        window: Option<(f64, f64, f64, f64)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let window = match window {
            Some(w) => bbox(w)?,
            None => self.0.bbox,
        };
        to_py(py, &grid::sobolev_norm(&self.0, p, window).py()?)
    }

    fn __repr__(&self) -> String {
        format!(
            "GridFunction(alpha={}, h={}, nx={}, ny={})",
            self.0.alpha, self.0.h, self.0.nx, self.0.ny
        )
    }
}

/// Removed intervals of one generation as `(k, a_num, b_num)` over `3^n`.
#[pyfunction]
fn removed_intervals(generation: u32) -> PyResult<Vec<(u128, i128, i128)>> {
    geometry::removed_intervals(generation)
        .py()?
        .map(|i| {
            Ok((
                i.index(),
                i.left().numerator_at(generation).py()?,
                i.right().numerator_at(generation).py()?,
            ))
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (x, depth = geometry::DEFAULT_DEPTH))]
fn locate<'py>(py: Python<'py>, x: f64, depth: u32) -> PyResult<Bound<'py, PyAny>> {
    let result: LocateResult = cantor_cusp::locate(x, depth).py()?;
    to_py(py, &result)
}

#[pyfunction]
#[pyo3(signature = (x, depth = geometry::DEFAULT_DEPTH))]
fn dist_to_cantor(x: f64, depth: u32) -> PyResult<(f64, f64)> {
    let d = cantor_cusp::dist_to_cantor(x, depth).py()?;
    Ok((d.lo, d.hi))
}

#[pyfunction]
fn p_lower(alpha: f64) -> PyResult<f64> {
    exponents::p_lower(alpha).py()
}

/// `(q_upper, admissible)`.
#[pyfunction]
fn q_upper(alpha: f64, p: f64) -> PyResult<(f64, bool)> {
    let q = exponents::q_upper(alpha, p).py()?;
    Ok((q.value, q.admissible))
}

#[pyfunction]
fn alpha_p(alpha: f64, p: f64) -> PyResult<f64> {
    exponents::alpha_p(alpha, p).py()
}

#[pyfunction]
fn beta_default(alpha: f64, p: f64) -> PyResult<f64> {
    exponents::beta_default(alpha, p).py()
}

#[pyfunction]
fn kappa(p: f64, q: f64) -> PyResult<f64> {
    exponents::kappa(p, q).py()
}

#[pyfunction]
fn series_ratio(alpha: f64, p: f64, q: f64) -> PyResult<f64> {
    exponents::series_ratio(alpha, p, q).py()
}

/// Every threshold quantity for `(alpha, p)` and optionally `q`, as a dict.
#[pyfunction]
#[pyo3(signature = (alpha, p, q = None))]
fn derive<'py>(py: Python<'py>, alpha: f64, p: f64, q: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &exponents::derive(alpha, p, q).py()?)
}

/// Majorant series of the Jacobian-quotient integral; `side` is `"plus"` or `"minus"`.
#[pyfunction]
#[pyo3(signature = (side, alpha, p, q, generations = 200))]
fn jacobian_integral<'py>(
    py: Python<'py>,
    side: &str,
    alpha: f64,
    p: f64,
    q: f64,
    generations: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let side = match side {
        "plus" => Side::Plus,
        "minus" => Side::Minus,
        other => {
            return Err(PyValueError::new_err(format!(
                "side must be 'plus' or 'minus', got {other:?}"
            )))
        }
    };
    to_py(
        py,
        &integrals::jacobian_integral(side, alpha, p, q, generations).py()?,
    )
}

/// Witness parameters; `beta` defaults to the largest admissible value.
#[pyclass(name = "Witness", module = "cantor_cusp_py", frozen)]
struct PyWitness(WitnessParams);

#[pymethods]
impl PyWitness {
    #[new]
    #[pyo3(signature = (alpha, p, side = "upper", generations = 60, beta = None))]
    fn new(alpha: f64, p: f64, side: &str, generations: u32, beta: Option<f64>) -> PyResult<Self> {
        let params = WitnessParams::new(alpha, p, witness_side(side)?, generations).py()?;
        Ok(Self(match beta {
            Some(b) => params.with_beta(b).py()?,
            None => params,
        }))
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn __call__(&self, x1: f64, x2: f64) -> f64 {
        witness::eval_witness(&self.0, PlanePoint::new(x1, x2))
    }

    fn sobolev_norm<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &witness::witness_sobolev_norm(&self.0))
    }

    fn divergence<'py>(&self, py: Python<'py>, q: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &witness::divergence_witness(&self.0, q).py()?)
    }

    fn extension_energy<'py>(&self, py: Python<'py>, q: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &witness::extension_energy(&self.0, q).py()?)
    }

    /// Samples the witness on its own side of the graph.
    fn sample(&self, bbox_: (f64, f64, f64, f64), h: f64) -> PyResult<PyGridFunction> {
        let profile = cantor_cusp::CuspProfile::new(self.0.alpha).py()?;
        let side = match self.0.side {
            WitnessSide::Upper => DomainSide::Upper,
            WitnessSide::Lower => DomainSide::Lower,
        };
        let params = self.0;
        let g = grid::sample(
            &profile,
            move |x| witness::eval_witness(&params, x),
            bbox(bbox_)?,
            h,
            side,
        )
        .py()?;
        Ok(PyGridFunction(g))
    }

    fn __repr__(&self) -> String {
        format!(
            "Witness(alpha={}, p={}, side='{}', generations={}, beta={})",
            self.0.alpha, self.0.p, self.0.side, self.0.generations, self.0.beta
        )
    }
}

/// Samples a smooth bump centred at `center` on one side of the graph.
#[pyfunction]
#[pyo3(signature = (alpha, center, radius, bbox_, h, side = "upper"))]
fn sample_bump(
    alpha: f64,
    center: (f64, f64),
    radius: f64,
    bbox_: (f64, f64, f64, f64),
    h: f64,
    side: &str,
) -> PyResult<PyGridFunction> {
    let profile = cantor_cusp::CuspProfile::new(alpha).py()?;
    let f = grid::bump(PlanePoint::new(center.0, center.1), radius);
    let g = grid::sample(&profile, f, bbox(bbox_)?, h, domain_side(side)?).py()?;
    Ok(PyGridFunction(g))
}

/// Runs verification checks (all of them when `checks` is empty).
#[pyfunction]
#[pyo3(signature = (alpha = 0.7, seed = DEFAULT_SEED, checks = Vec::new()))]
fn verify_all<'py>(
    py: Python<'py>,
    alpha: f64,
    seed: u64,
    checks: Vec<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = VerifyConfig { alpha, seed };
    let report = py.detach(|| {
        if checks.is_empty() {
            verify::verify_all(&config)
        } else {
            let results = checks
                .iter()
                .map(|&id| verify::run_check(id, &config))
                .collect::<cantor_cusp::Result<Vec<_>>>()?;
            Ok(verify::VerifyReport {
                config,
                passed: results.iter().all(|c| c.passed),
                checks: results,
            })
        }
    });
    to_py(py, &report.py()?)
}

#[pymodule]
fn cantor_cusp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CantorCuspError", m.py().get_type::<CantorCuspError>())?;
    m.add("ALPHA_CRITICAL", exponents::alpha_critical())?;
    m.add_class::<PyCuspProfile>()?;
    m.add_class::<PyGridFunction>()?;
    m.add_class::<PyWitness>()?;
    m.add_function(wrap_pyfunction!(removed_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(locate, m)?)?;
    m.add_function(wrap_pyfunction!(dist_to_cantor, m)?)?;
    m.add_function(wrap_pyfunction!(p_lower, m)?)?;
    m.add_function(wrap_pyfunction!(q_upper, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_p, m)?)?;
    m.add_function(wrap_pyfunction!(beta_default, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(series_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian_integral, m)?)?;
    m.add_function(wrap_pyfunction!(sample_bump, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}

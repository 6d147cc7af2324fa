//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! reports come back as plain dicts and lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyLookupError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

use mra_core::audit::{audit_record, validate_record};
use mra_core::chambers::{chamber_graph, emit_dot, facet_patch_check, nef_cone};
use mra_core::exhaustion::{build_targets, check_exhaustion, extend_candidates};
use mra_core::flop::{coefficient_letters, flopped_rows, parse_flop_config, solve_pullback_coeffs, FlopConfig};
use mra_core::model::{derive_anti_k_combo, load_record_lenient, parse_record, record_to_json, AntiKDerivation, FanoRecord};
use mra_core::{canonicalize_ray, Error, Membership, Pointedness, QVec, Rat};

fn err(e: Error) -> PyErr {
    match e {
        Error::UnknownLabel(_) => PyLookupError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn rat_from_py(x: &Bound<'_, PyAny>) -> PyResult<Rat> {
    if x.is_instance_of::<pyo3::types::PyFloat>() {
        return Err(PyValueError::new_err("floats are not exact; pass int, str or Fraction"));
    }
    let s = x.str()?.to_string();
    s.parse().map_err(err)
}

fn vec_from_py(v: &Bound<'_, PyAny>) -> PyResult<QVec> {
    let items: Vec<Bound<'_, PyAny>> = v.try_iter()?.collect::<PyResult<_>>()?;
    let entries = items.iter().map(rat_from_py).collect::<PyResult<Vec<_>>>()?;
    QVec::new(entries).map_err(err)
}

fn rat_to_py<'py>(py: Python<'py>, x: &Rat) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((x.to_string(),))
}

fn vec_to_py<'py>(py: Python<'py>, v: &QVec) -> PyResult<Bound<'py, PyList>> {
    let items = v.iter().map(|x| rat_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn read(path: PathBuf) -> PyResult<Vec<u8>> {
    std::fs::read(&path).map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))
}

/// Polyhedral cone spanned by rational generators.
#[pyclass(name = "Cone", module = "mra", frozen)]
struct PyCone(mra_core::Cone);

#[pymethods]
impl PyCone {
    #[new]
    fn new(dim: usize, generators: &Bound<'_, PyAny>) -> PyResult<Self> {
        let gens: Vec<Bound<'_, PyAny>> = generators.try_iter()?.collect::<PyResult<_>>()?;
        let gens = gens.iter().map(vec_from_py).collect::<PyResult<Vec<_>>>()?;
        mra_core::Cone::new(dim, &gens).map(PyCone).map_err(err)
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    /// Dimension of the linear span.
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn generators<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyList>>> {
        self.0.generators().iter().map(|g| vec_to_py(py, g.vec())).collect()
    }

    fn is_pointed(&self) -> bool {
        matches!(self.0.is_pointed(), Pointedness::Pointed(_))
    }

    fn contains(&self, v: &Bound<'_, PyAny>) -> PyResult<bool> {
        self.0.contains(&vec_from_py(v)?).map_err(err)
    }

    /// `("inside", coefficients)` or `("outside", separating functional)`.
    fn membership<'py>(&self, py: Python<'py>, v: &Bound<'_, PyAny>) -> PyResult<(&'static str, Bound<'py, PyList>)> {
        Ok(match self.0.membership(&vec_from_py(v)?).map_err(err)? {
            Membership::Inside(l) => ("inside", vec_to_py(py, &l)?),
            Membership::Outside(n) => ("outside", vec_to_py(py, &n)?),
        })
    }

    fn extreme_rays<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyList>>> {
        let rays = self.0.extreme_rays().map_err(err)?;
        rays.iter().map(|r| vec_to_py(py, r.vec())).collect()
    }

    fn facets<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyList>>> {
        let f = self.0.facets().map_err(err)?;
        f.iter().map(|r| vec_to_py(py, r.vec())).collect()
    }

    fn dual(&self) -> PyCone {
        PyCone(self.0.dual())
    }

    fn same_as(&self, other: &PyCone) -> PyResult<bool> {
        self.0.same_as(&other.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        let gens: Vec<String> = self.0.generators().iter().map(ToString::to_string).collect();
        format!("Cone({}, [{}])", self.0.ambient_dim(), gens.join(", "))
    }
}

/// The primitive integer vector positively proportional to `v`.
#[pyfunction]
fn canonicalize<'py>(py: Python<'py>, v: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyList>> {
    let r = canonicalize_ray(&vec_from_py(v)?).map_err(err)?;
    vec_to_py(py, r.vec())
}

/// A record of extremal-ray data.
#[pyclass(name = "Record", module = "mra", frozen)]
struct PyRecord(FanoRecord);

fn load_record(bytes: &[u8], strict: bool) -> PyResult<PyRecord> {
    let r = if strict { parse_record(bytes) } else { load_record_lenient(bytes) };
    r.map(PyRecord).map_err(err)
}

#[pymethods]
impl PyRecord {
    /// Strict loading rejects any violated invariant; lenient loading checks
    /// structure only so the record can be audited.
    #[staticmethod]
    #[pyo3(signature = (text, strict = true))]
    fn from_json(text: &str, strict: bool) -> PyResult<Self> {
        load_record(text.as_bytes(), strict)
    }

    #[staticmethod]
    #[pyo3(signature = (path, strict = true))]
    fn load(path: PathBuf, strict: bool) -> PyResult<Self> {
        load_record(&read(path)?, strict)
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id.to_string()
    }

    #[getter]
    fn basis(&self) -> Vec<String> {
        self.0.basis.clone()
    }

    #[getter]
    fn rho(&self) -> usize {
        self.0.rho()
    }

    #[getter]
    fn ray_labels(&self) -> Vec<String> {
        self.0.rays.iter().map(|r| r.label.clone()).collect()
    }

    #[getter]
    fn anti_k_combo<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        vec_to_py(py, &self.0.anti_k_combo)
    }

    fn ray<'py>(&self, py: Python<'py>, label: &str) -> PyResult<Bound<'py, PyList>> {
        let i = self.0.ray_index(label).map_err(err)?;
        vec_to_py(py, &self.0.rays[i].vec)
    }

    fn to_json(&self) -> String {
        record_to_json(&self.0)
    }

    fn mori_cone(&self) -> PyResult<PyCone> {
        self.0.full_cone().map(PyCone).map_err(err)
    }

    fn nef_cone(&self) -> PyResult<PyCone> {
        nef_cone(&self.0).map(PyCone).map_err(err)
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &validate_record(&self.0).map_err(err)?)
    }

    #[pyo3(signature = (reference = None, flops = Vec::new()))]
    fn audit<'py>(
        &self,
        py: Python<'py>,
        reference: Option<PyRef<'_, PyRecord>>,
        flops: Vec<PyRef<'_, PyFlopConfig>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cfgs: Vec<&FlopConfig> = flops.iter().map(|c| &c.0).collect();
        let rep = audit_record(&self.0, reference.as_ref().map(|r| &r.0), &cfgs).map_err(err)?;
        json_to_py(py, &rep)
    }

    /// Exhaustion report for all rays except `drop`; with proposals, the
    /// extension trail instead.
    #[pyo3(signature = (drop = Vec::new(), propose = None))]
    fn check_exhaustion<'py>(
        &self,
        py: Python<'py>,
        drop: Vec<String>,
        propose: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = &self.0;
        let dropped = drop.iter().map(|l| r.ray_index(l)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let all: Vec<usize> = (0..r.rays.len()).collect();
        let cands: Vec<usize> = all.iter().copied().filter(|i| !dropped.contains(i)).collect();
        let targets = build_targets(r, &all).map_err(err)?;
        match propose {
            None => json_to_py(py, &check_exhaustion(r, &cands, &targets).map_err(err)?),
            Some(p) => {
                let ps: Vec<Bound<'_, PyAny>> = p.try_iter()?.collect::<PyResult<_>>()?;
                let ps = ps.iter().map(vec_from_py).collect::<PyResult<Vec<_>>>()?;
                json_to_py(py, &extend_candidates(r, &cands, &targets, &ps).map_err(err)?)
            }
        }
    }

    /// Findings of the nef-cone form of the exhaustion check.
    #[pyo3(signature = (drop = Vec::new()))]
    fn facet_patch(&self, drop: Vec<String>) -> PyResult<Vec<String>> {
        let r = &self.0;
        let dropped = drop.iter().map(|l| r.ray_index(l)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let all: Vec<usize> = (0..r.rays.len()).collect();
        let cands: Vec<usize> = all.iter().copied().filter(|i| !dropped.contains(i)).collect();
        let targets = build_targets(r, &all).map_err(err)?;
        let f = facet_patch_check(r, &cands, &targets).map_err(err)?;
        Ok(f.iter().map(ToString::to_string).collect())
    }

    /// λ recovered from every row, or `None` if the rows do not determine it.
    fn derive_anti_k<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyList>>> {
        let pairs: Vec<_> = self.0.anti_k_rows().into_iter().map(|x| (x.vec, x.anti_k)).collect();
        match derive_anti_k_combo(&pairs, self.0.rho()).map_err(err)? {
            AntiKDerivation::Unique(l) => Ok(Some(vec_to_py(py, &l)?)),
            _ => Ok(None),
        }
    }

    fn chamber_dot(&self) -> PyResult<String> {
        let g = chamber_graph(&self.0).map_err(err)?;
        Ok(emit_dot(&self.0.id.to_string(), &g))
    }

    fn __repr__(&self) -> String {
        format!("Record({}, rays={})", self.0.id, self.0.rays.len())
    }
}

type PyRow<'py> = (String, Bound<'py, PyList>, Bound<'py, PyAny>);

/// Input for recomputing a flopped table.
#[pyclass(name = "FlopConfig", module = "mra", frozen)]
struct PyFlopConfig(FlopConfig);

#[pymethods]
impl PyFlopConfig {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse_flop_config(text.as_bytes()).map(PyFlopConfig).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        parse_flop_config(&read(path)?).map(PyFlopConfig).map_err(err)
    }

    #[getter]
    fn ray(&self) -> String {
        self.0.ray.clone()
    }

    /// Pullback coefficients keyed `a, b, c, ...`.
    fn coefficients<'py>(&self, py: Python<'py>) -> PyResult<Vec<(String, Bound<'py, PyAny>)>> {
        let c = solve_pullback_coeffs(&self.0).map_err(err)?;
        coefficient_letters(&c)
            .into_iter()
            .map(|(k, v)| Ok((k, rat_to_py(py, &v)?)))
            .collect()
    }

    /// `(label, vec, antiK)` for each result curve.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Vec<PyRow<'py>>> {
        let c = solve_pullback_coeffs(&self.0).map_err(err)?;
        let res = flopped_rows(&self.0, &c).map_err(err)?;
        res.rows
            .iter()
            .map(|r| Ok((r.label.clone(), vec_to_py(py, &r.vec)?, rat_to_py(py, &r.anti_k)?)))
            .collect()
    }
}

#[pymodule]
fn mra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCone>()?;
    m.add_class::<PyRecord>()?;
    m.add_class::<PyFlopConfig>()?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    Ok(())
}

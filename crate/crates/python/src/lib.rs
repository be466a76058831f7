//! Python bindings. Reports come back as plain dicts and lists; exact
//! rationals are returned as `fractions.Fraction`.

use local_pir::capacity::{self, Rational};
use local_pir::graph::{Family, Graph};
use local_pir::scheme::{render_table, FixtureName, PlanExport, SchemeConfig};
use local_pir::sim;
use local_pir::verify::{self as checks, Verdict, DEFAULT_ENUMERATION_CAP};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::{json, Value};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

#[pyclass(name = "Graph", module = "local_pir", frozen)]
struct PyGraph {
    inner: Graph,
    family: Option<Family>,
}

fn family_from(kind: &str, n: Option<usize>, a: Option<usize>, b: Option<usize>, copies: Option<usize>) -> PyResult<Family> {
    let need = || n.ok_or_else(|| PyValueError::new_err("n is required for this family"));
    let base = match kind {
        "cycle" => Family::Cycle(need()?),
        "path" => Family::Path(need()?),
        "star" => Family::Star(need()?),
        "complete" => Family::Complete(need()?),
        "complete_bipartite" | "complete-bipartite" => match (a, b, n) {
            (Some(a), Some(b), _) => Family::CompleteBipartite(a, b),
            (None, None, Some(n)) if n % 2 == 0 => Family::CompleteBipartite(n / 2, n / 2),
            _ => return Err(PyValueError::new_err("complete_bipartite needs a and b, or an even n")),
        },
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    Ok(match copies {
        Some(m) if m > 1 => Family::DisjointCopies(Box::new(base), m),
        _ => base,
    })
}

#[pymethods]
impl PyGraph {
    /// Graph on servers `1..=n`; message `k` is `edges[k - 1]`.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Self {
            inner: Graph::new(n, &edges).map_err(err)?,
            family: None,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (kind, n=None, a=None, b=None, copies=None))]
    fn family(kind: &str, n: Option<usize>, a: Option<usize>, b: Option<usize>, copies: Option<usize>) -> PyResult<Self> {
        let family = family_from(kind, n, a, b, copies)?;
        Ok(Self {
            inner: family.build().map_err(err)?,
            family: Some(family),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Graph::from_json(text).map_err(err)?,
            family: None,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn num_servers(&self) -> usize {
        self.inner.num_servers()
    }

    #[getter]
    fn num_messages(&self) -> usize {
        self.inner.num_messages()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn index_set(&self, n: usize) -> PyResult<Vec<usize>> {
        self.inner.check_server(n).map_err(err)?;
        Ok(self.inner.index_set(n).to_vec())
    }

    fn degree(&self, n: usize) -> PyResult<usize> {
        self.inner.check_server(n).map_err(err)?;
        Ok(self.inner.degree(n))
    }

    /// `(V1, V2)` or `None`.
    fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        self.inner.bipartition().map(|p| (p.v1, p.v2))
    }

    fn is_edge_transitive(&self) -> PyResult<bool> {
        self.inner.is_edge_transitive().map_err(err)
    }

    fn __repr__(&self) -> String {
        match &self.family {
            Some(f) => format!("Graph({f})"),
            None => format!("Graph(n={}, edges={:?})", self.inner.num_servers(), self.inner.edges()),
        }
    }
}

fn config_for(g: &PyGraph, scheme: &str, t: Option<usize>, t_i: Option<usize>, t_j: Option<usize>) -> PyResult<SchemeConfig> {
    let ts = match (t, t_i, t_j) {
        (Some(t), None, None) => Some((t, t)),
        (None, Some(i), Some(j)) => Some((i, j)),
        (None, None, None) => None,
        _ => return Err(PyValueError::new_err("give t, or both t_i and t_j")),
    };
    let et = |(t_i, t_j): (usize, usize)| SchemeConfig::EdgeTransitive {
        t_i,
        t_j,
        role_rule: Default::default(),
    };
    let auto = || match &g.family {
        Some(f) => sim::family_auto_config(f).map_err(err),
        None => sim::auto_config(&g.inner).map_err(err),
    };
    Ok(match scheme {
        "auto" | "et" => match ts {
            Some(ts) => et(ts),
            None => auto()?,
        },
        "bipartite" => SchemeConfig::bipartite(),
        "union" => {
            let comps = g.inner.components().into_iter().filter(|c| c.graph.num_messages() > 0);
            SchemeConfig::Union(
                comps
                    .map(|c| match ts {
                        Some(ts) => Ok(et(ts)),
                        None => sim::auto_config(&c.graph).map_err(err),
                    })
                    .collect::<PyResult<Vec<_>>>()?,
            )
        }
        other => match other.strip_prefix("fixture-").map(str::parse::<FixtureName>) {
            Some(Ok(name)) => SchemeConfig::Fixture(name),
            _ => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
        },
    })
}

/// Lower/upper capacity bounds; uses the family's closed forms when known.
#[pyfunction]
fn bounds<'py>(py: Python<'py>, graph: &PyGraph) -> PyResult<Bound<'py, PyAny>> {
    let report = match &graph.family {
        Some(f) => capacity::family_bounds(f),
        None => capacity::graph_bounds(&graph.inner),
    }
    .map_err(err)?;
    to_py(py, &report.to_json())
}

/// `(rate, t_i, t_j)` maximising the t-sum rate for endpoint degrees.
#[pyfunction]
fn et_lower_bound<'py>(py: Python<'py>, deg_i: usize, deg_j: usize) -> PyResult<(Bound<'py, PyAny>, usize, usize)> {
    let opt = capacity::et_lower_bound(deg_i, deg_j).map_err(err)?;
    Ok((fraction(py, &opt.rate)?, opt.t_i, opt.t_j))
}

#[pyfunction]
fn equal_degree_bound<'py>(py: Python<'py>, d: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &capacity::equal_degree_bound(d).map_err(err)?)
}

/// Plans as `{"rows": [{"theta", "L", "servers": [...]}, ...]}`.
#[pyfunction]
#[pyo3(signature = (graph, scheme="auto", t=None, t_i=None, t_j=None))]
fn plans<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    scheme: &str,
    t: Option<usize>,
    t_i: Option<usize>,
    t_j: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = config_for(graph, scheme, t, t_i, t_j)?;
    let family = config.family(&graph.inner).map_err(err)?;
    let v = serde_json::to_value(PlanExport::new(family.plans())).map_err(err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (graph, scheme="auto", t=None, t_i=None, t_j=None))]
fn table(graph: &PyGraph, scheme: &str, t: Option<usize>, t_i: Option<usize>, t_j: Option<usize>) -> PyResult<String> {
    let config = config_for(graph, scheme, t, t_i, t_j)?;
    let family = config.family(&graph.inner).map_err(err)?;
    Ok(render_table(family.plans()))
}

#[pyfunction]
#[pyo3(signature = (graph, theta, seed=0, q=2, scheme="auto", t=None, t_i=None, t_j=None))]
#[allow(clippy::too_many_arguments)]
fn run_retrieval<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    theta: usize,
    seed: u64,
    q: u64,
    scheme: &str,
    t: Option<usize>,
    t_i: Option<usize>,
    t_j: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = config_for(graph, scheme, t, t_i, t_j)?;
    let transcript = sim::run_retrieval(&graph.inner, &config, theta, seed, q).map_err(err)?;
    to_py(py, &serde_json::to_value(&transcript).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (graph, q=2, scheme="auto", t=None, t_i=None, t_j=None))]
fn measure_rate<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    q: u64,
    scheme: &str,
    t: Option<usize>,
    t_i: Option<usize>,
    t_j: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = config_for(graph, scheme, t, t_i, t_j)?;
    let report = match &graph.family {
        Some(f) => sim::measure_family_rate(f, &config, q),
        None => sim::measure_rate(&graph.inner, &config, q),
    }
    .map_err(err)?;
    let out = to_py(py, &report.to_json())?;
    out.set_item("rate", fraction(py, &report.rate)?)?;
    Ok(out)
}

/// Privacy at every server, decoding over `seeds` seeds and the cost audit.
#[pyfunction]
#[pyo3(signature = (graph, q=2, seeds=32, cap=DEFAULT_ENUMERATION_CAP, scheme="auto", t=None, t_i=None, t_j=None))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    q: u64,
    seeds: u64,
    cap: u64,
    scheme: &str,
    t: Option<usize>,
    t_i: Option<usize>,
    t_j: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = config_for(graph, scheme, t, t_i, t_j)?;
    let g = &graph.inner;
    let family = config.family(g).map_err(err)?;
    let privacy = g
        .servers()
        .map(|n| checks::privacy_check(&family, g, n, cap))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let seeds: Vec<u64> = (0..seeds).collect();
    let decode = checks::decode_check(&family, g, q, &seeds).map_err(err)?;
    let cost = checks::cost_audit(&family, g).map_err(err)?;
    let ok = privacy.iter().all(|r| r.verdict.passed()) && decode.verdict.passed() && cost.verdict().passed();
    let v = json!({
        "scheme": config.to_string(),
        "privacy": privacy.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        "decode": decode,
        "cost": cost.to_json(),
        "verdict": Verdict::from_bool(ok),
    });
    to_py(py, &v)
}

#[pymodule]
#[pyo3(name = "local_pir")]
pub fn local_pir_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(et_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(equal_degree_bound, m)?)?;
    m.add_function(wrap_pyfunction!(plans, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(run_retrieval, m)?)?;
    m.add_function(wrap_pyfunction!(measure_rate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}

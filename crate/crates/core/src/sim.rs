//! In-memory retrieval runs and exact rate measurement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::capacity::{
    bipartite_lower_bound, equal_degree_candidates, et_lower_bound, et_rate, family_bounds, graph_bounds, to_f64,
    BoundReport, CapacityError, Rational,
};
use crate::field::Field;
use crate::graph::{Family, Graph, DEFAULT_AUTOMORPHISM_CAP};
use crate::scheme::{PlanFamily, Randomness, SchemeConfig, SchemeError, Storage, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

/// Storage first, then the user's permutations, both from one seeded stream.
pub fn sample(lens: &[usize], seed: u64, field: Field) -> (Storage, Randomness) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let storage = Storage::random(field, lens, &mut rng);
    let randomness = Randomness::sample(lens.iter().copied().enumerate().map(|(i, l)| (i + 1, l)), Some(seed), &mut rng);
    (storage, randomness)
}

/// One retrieval of message `theta` with everything drawn from `seed`.
pub fn execute(family: &PlanFamily, g: &Graph, theta: usize, seed: u64, field: Field) -> Result<Transcript, SchemeError> {
    g.check_message(theta)?;
    let (storage, randomness) = sample(&family.message_lens(), seed, field);
    Transcript::execute(family.plan(theta), g, &storage, &randomness)
}

pub fn run_retrieval(g: &Graph, config: &SchemeConfig, theta: usize, seed: u64, q: u64) -> Result<Transcript, SimError> {
    let field = Field::new(q).map_err(SchemeError::from)?;
    g.check_message(theta).map_err(SchemeError::from)?;
    let family = config.family(g)?;
    Ok(execute(&family, g, theta, seed, field)?)
}

/// t-sum config with the best `(t_i, t_j)` for an edge-transitive graph.
fn et_config(g: &Graph) -> Result<(SchemeConfig, Rational), CapacityError> {
    let (u, v) = g.endpoints(1);
    let (di, dj) = (g.degree(u).min(g.degree(v)), g.degree(u).max(g.degree(v)));
    if di == dj {
        let mut best: Option<(usize, Rational)> = None;
        for t in equal_degree_candidates(di) {
            let r = et_rate(di, di, t, t)?;
            if best.as_ref().is_none_or(|(_, b)| r > *b) {
                best = Some((t, r));
            }
        }
        let (t, rate) = best.expect("two candidates");
        Ok((SchemeConfig::edge_transitive(t), rate))
    } else {
        let opt = et_lower_bound(di, dj)?;
        let config = SchemeConfig::EdgeTransitive {
            t_i: opt.t_i,
            t_j: opt.t_j,
            role_rule: Default::default(),
        };
        Ok((config, opt.rate))
    }
}

/// The higher-rate of the t-sum and bipartite schemes for a connected graph,
/// preferring the t-sum scheme on ties; single sums when neither applies.
fn component_config(g: &Graph, edge_transitive: bool) -> Result<SchemeConfig, CapacityError> {
    let et = if edge_transitive { Some(et_config(g)?) } else { None };
    let bip = match g.bipartition() {
        Some(p) => Some(bipartite_lower_bound(g, &p)?),
        None => None,
    };
    Ok(match (et, bip) {
        (Some((config, r)), Some(b)) if r >= b => config,
        (Some((config, _)), None) => config,
        (_, Some(_)) => SchemeConfig::bipartite(),
        (None, None) => SchemeConfig::edge_transitive(1),
    })
}

/// A working scheme for any graph with at least one message.
pub fn auto_config(g: &Graph) -> Result<SchemeConfig, SimError> {
    let comps: Vec<_> = g
        .components()
        .into_iter()
        .filter(|c| c.graph.num_messages() > 0)
        .collect();
    if comps.is_empty() {
        return Err(CapacityError::EmptyInput.into());
    }
    let mut configs = Vec::with_capacity(comps.len());
    for c in &comps {
        let h = &c.graph;
        let et = h.num_servers() <= DEFAULT_AUTOMORPHISM_CAP && h.is_edge_transitive().map_err(SchemeError::from)?;
        configs.push(component_config(h, et)?);
    }
    if comps.len() == 1 && comps[0].vertices.len() == g.num_servers() {
        Ok(configs.pop().expect("one component"))
    } else {
        Ok(SchemeConfig::Union(configs))
    }
}

/// Like [`auto_config`], using what the family is known to be instead of an
/// automorphism search.
pub fn family_auto_config(family: &Family) -> Result<SchemeConfig, SimError> {
    match family {
        Family::DisjointCopies(base, m) => {
            let inner = family_auto_config(base)?;
            Ok(SchemeConfig::Union(vec![inner; *m]))
        }
        _ => {
            let g = family.build().map_err(SchemeError::from)?;
            let et = matches!(
                family,
                Family::Cycle(_) | Family::Complete(_) | Family::CompleteBipartite(..) | Family::Star(_)
            );
            Ok(component_config(&g, et)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub graph: String,
    pub config: String,
    pub message_lens: Vec<usize>,
    pub downloads: Vec<usize>,
    pub total_download: usize,
    /// `Σ_θ L_θ / Σ_θ D_θ`, which is `K·L / Σ D_θ` when all lengths agree.
    pub rate: Rational,
    pub decoded_ok: bool,
    pub bounds: BoundReport,
}

impl RateReport {
    /// For a named family the rate must sit between its lower and upper
    /// bound; for an arbitrary graph only the upper bound applies, since the
    /// lower bound may come from a different scheme.
    pub fn within_bounds(&self) -> bool {
        if self.rate > self.bounds.upper {
            return false;
        }
        match (&self.bounds.lower, self.bounds.family.as_str()) {
            (Some(lower), f) if f != "graph" => &self.rate >= lower,
            _ => true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "graph": self.graph,
            "config": self.config,
            "L": self.message_lens,
            "D_k": self.downloads,
            "total_download": self.total_download,
            "rate": self.rate.to_string(),
            "rate_approx": to_f64(&self.rate),
            "decoded_ok": self.decoded_ok,
            "lower": self.bounds.lower.as_ref().map(ToString::to_string),
            "upper": self.bounds.upper.to_string(),
            "within_bounds": self.within_bounds(),
        })
    }
}

fn measure(g: &Graph, config: &SchemeConfig, q: u64, label: String, bounds: BoundReport) -> Result<RateReport, SimError> {
    let field = Field::new(q).map_err(SchemeError::from)?;
    let family = config.family(g)?;
    let mut downloads = Vec::with_capacity(family.len());
    let mut decoded_ok = true;
    for theta in g.messages() {
        let t = execute(&family, g, theta, 0, field)?;
        decoded_ok &= t.decoded_ok;
        downloads.push(t.download);
    }
    let message_lens = family.message_lens();
    let total_download: usize = downloads.iter().sum();
    let total_len: usize = message_lens.iter().sum();
    Ok(RateReport {
        graph: label,
        config: config.to_string(),
        rate: Rational::new(total_len.into(), total_download.max(1).into()),
        message_lens,
        downloads,
        total_download,
        decoded_ok,
        bounds,
    })
}

/// Exact rate over all desired messages of `g`, with [`graph_bounds`] attached.
pub fn measure_rate(g: &Graph, config: &SchemeConfig, q: u64) -> Result<RateReport, SimError> {
    let bounds = graph_bounds(g)?;
    let label = format!("graph(N={}, K={})", g.num_servers(), g.num_messages());
    measure(g, config, q, label, bounds)
}

/// Like [`measure_rate`] but with the family's closed-form bounds.
pub fn measure_family_rate(family: &Family, config: &SchemeConfig, q: u64) -> Result<RateReport, SimError> {
    let g = family.build().map_err(SchemeError::from)?;
    let bounds = family_bounds(family)?;
    measure(&g, config, q, family.to_string(), bounds)
}

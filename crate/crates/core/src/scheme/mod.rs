//! Query plans for local PIR: the t-sum construction for edge-transitive
//! graphs, the vertex-cover download for bipartite graphs, dispatch over
//! disjoint components, and the two hand-written reference tables.
//!
//! A [`SchemePlan`] describes one retrieval (fixed desired message) in
//! *logical* symbol positions. The user's private per-message permutations
//! ([`Randomness`]) translate it into the physical [`Query`] each server sees.

mod bipartite;
mod edge_transitive;
mod exec;
mod fixtures;
mod render;
mod subsets;
mod union;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::field::FieldError;
use crate::graph::{Bipartition, Graph, GraphError};

pub use bipartite::{build_bipartite_plan, min_square_part};
pub use edge_transitive::build_et_plan;
pub use exec::{answer, decode, Answer, Message, Query, Randomness, ServerView, Storage, Transcript, ServerExchange};
pub use fixtures::{fixture_graph, FixtureName};
pub use render::{letter, render_table, PlanExport};
pub use subsets::{binomial, et_download_cost, gamma, lex_subsets, subpacketization};
pub use union::build_union_plan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("t={t} is outside [1, {deg}]")]
    TOutOfRange { t: usize, deg: usize },
    #[error("role assignment conflict: {0}")]
    RoleConflict(String),
    #[error("element {element} is not in subset {position}")]
    ElementAbsent { element: usize, position: usize },
    #[error("partition is not a valid bipartition of the graph")]
    NotBipartite,
    #[error("both or neither endpoints of message {theta} lie in the chosen part")]
    EndpointAmbiguity { theta: usize },
    #[error("graph has {components} components with messages but {configs} configs were given")]
    MissingComponentConfig { components: usize, configs: usize },
    #[error("server {server} was asked for message {message}, which it does not store")]
    UnresolvableRef { server: usize, message: usize },
    #[error("position {position} is outside message {message} of length {len}")]
    PositionOutOfRange { message: usize, position: usize, len: usize },
    #[error("answers are incomplete for server {server}")]
    IncompleteAnswers { server: usize },
    #[error("logical position {position} of message {theta} cannot be decoded")]
    Undecodable { theta: usize, position: usize },
    #[error("message lengths differ inside one component ({0} vs {1})")]
    NonUniformSubpacketization(usize, usize),
    #[error("fixture {0} requires its own graph")]
    FixtureGraphMismatch(FixtureName),
    #[error("malformed atom: {0}")]
    MalformedAtom(String),
    #[error("value too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One symbol of one message, addressed by 1-based position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymbolRef {
    pub message: usize,
    pub position: usize,
}

impl SymbolRef {
    pub fn new(message: usize, position: usize) -> Self {
        Self { message, position }
    }
}

/// Unit-coefficient sum of symbols from distinct messages.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryAtom {
    pub refs: Vec<SymbolRef>,
}

impl QueryAtom {
    pub fn new(mut refs: Vec<SymbolRef>) -> Self {
        refs.sort();
        Self { refs }
    }

    pub fn singleton(message: usize, position: usize) -> Self {
        Self {
            refs: vec![SymbolRef::new(message, position)],
        }
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Index of an atom in a server's logical query list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AtomRef {
    pub server: usize,
    pub atom: usize,
}

/// Logical symbol `position` of the desired message equals the signed sum of
/// the referenced answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeStep {
    pub position: usize,
    pub terms: Vec<(Sign, AtomRef)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PlanKind {
    EdgeTransitive {
        role_i: usize,
        role_j: usize,
        t_i: usize,
        t_j: usize,
    },
    Bipartite {
        endpoint: usize,
        part: usize,
    },
    Fixture(FixtureName),
}

/// Which endpoint of the desired message's edge plays role `i` (plain sums)
/// and which plays role `j` (sums with the desired message offset).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RoleRule {
    /// Equal degrees: lower index is role `i` and `t_i == t_j` is required.
    /// Unequal degrees: the lower-degree endpoint is role `i`.
    #[default]
    Default,
    /// Lower index is role `i`, with no constraint on `t`.
    LowerIndex,
    /// Role `i` goes to the endpoint in this set; exactly one must be.
    Fixed(BTreeSet<usize>),
}

impl RoleRule {
    pub fn resolve(&self, g: &Graph, theta: usize, t_i: usize, t_j: usize) -> Result<(usize, usize), SchemeError> {
        let (u, v) = g.endpoints(theta);
        let (lo, hi) = (u.min(v), u.max(v));
        match self {
            RoleRule::Default => {
                let (du, dv) = (g.degree(lo), g.degree(hi));
                if du == dv {
                    if t_i != t_j {
                        return Err(SchemeError::RoleConflict(format!(
                            "endpoints of message {theta} have equal degree {du}; t_i={t_i} and t_j={t_j} must agree"
                        )));
                    }
                    Ok((lo, hi))
                } else if du < dv {
                    Ok((lo, hi))
                } else {
                    Ok((hi, lo))
                }
            }
            RoleRule::LowerIndex => Ok((lo, hi)),
            RoleRule::Fixed(set) => match (set.contains(&u), set.contains(&v)) {
                (true, false) => Ok((u, v)),
                (false, true) => Ok((v, u)),
                _ => Err(SchemeError::RoleConflict(format!(
                    "message {theta}: endpoints {u} and {v} get the same role"
                ))),
            },
        }
    }
}

/// How to build a plan for every desired message of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeConfig {
    EdgeTransitive {
        t_i: usize,
        t_j: usize,
        role_rule: RoleRule,
    },
    Bipartite {
        /// `None` uses [`Graph::bipartition`].
        partition: Option<Bipartition>,
        message_len: usize,
    },
    /// One config per component that holds at least one message, in
    /// component order.
    Union(Vec<SchemeConfig>),
    Fixture(FixtureName),
}

impl SchemeConfig {
    pub fn edge_transitive(t: usize) -> Self {
        SchemeConfig::EdgeTransitive {
            t_i: t,
            t_j: t,
            role_rule: RoleRule::Default,
        }
    }

    pub fn bipartite() -> Self {
        SchemeConfig::Bipartite {
            partition: None,
            message_len: 1,
        }
    }

    pub fn plan(&self, g: &Graph, theta: usize) -> Result<SchemePlan, SchemeError> {
        g.check_message(theta)?;
        match self {
            SchemeConfig::EdgeTransitive { t_i, t_j, role_rule } => {
                build_et_plan(g, theta, *t_i, *t_j, role_rule)
            }
            SchemeConfig::Bipartite {
                partition,
                message_len,
            } => {
                let part = match partition {
                    Some(p) => p.clone(),
                    None => g.bipartition().ok_or(SchemeError::NotBipartite)?,
                };
                build_bipartite_plan(g, &part, theta, *message_len)
            }
            SchemeConfig::Union(configs) => build_union_plan(g, configs, theta),
            SchemeConfig::Fixture(name) => fixtures::fixture_plan(*name, g, theta),
        }
    }

    /// Plans for every desired message, checking that message lengths agree
    /// within each connected component.
    pub fn family(&self, g: &Graph) -> Result<PlanFamily, SchemeError> {
        let plans = g
            .messages()
            .map(|theta| self.plan(g, theta))
            .collect::<Result<Vec<_>, _>>()?;
        for comp in g.components() {
            let mut lens = comp.messages.iter().map(|&k| plans[k - 1].message_len);
            if let Some(first) = lens.next() {
                if let Some(other) = lens.find(|&l| l != first) {
                    return Err(SchemeError::NonUniformSubpacketization(first, other));
                }
            }
        }
        Ok(PlanFamily { plans })
    }
}

impl std::fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeConfig::EdgeTransitive { t_i, t_j, role_rule } => {
                write!(f, "et(t_i={t_i}, t_j={t_j}")?;
                match role_rule {
                    RoleRule::Default => {}
                    RoleRule::LowerIndex => write!(f, ", roles=lower-index")?,
                    RoleRule::Fixed(set) => write!(f, ", role_i={set:?}")?,
                }
                write!(f, ")")
            }
            SchemeConfig::Bipartite { partition, message_len } => {
                write!(f, "bipartite(L={message_len}")?;
                if let Some(p) = partition {
                    write!(f, ", V1={:?}", p.v1)?;
                }
                write!(f, ")")
            }
            SchemeConfig::Union(configs) => {
                let inner: Vec<String> = configs.iter().map(ToString::to_string).collect();
                write!(f, "union[{}]", inner.join(", "))
            }
            SchemeConfig::Fixture(name) => write!(f, "fixture({name})"),
        }
    }
}

/// Retrieval plan for one desired message, in logical positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemePlan {
    pub theta: usize,
    pub message_len: usize,
    pub kind: PlanKind,
    /// Index of the dispatching component for union plans.
    pub component: Option<usize>,
    /// `queries[n - 1]` is the ordered atom list sent to server `n`.
    pub queries: Vec<Vec<QueryAtom>>,
    pub recipe: Vec<DecodeStep>,
}

impl SchemePlan {
    pub fn server_atoms(&self, n: usize) -> &[QueryAtom] {
        &self.queries[n - 1]
    }

    /// Atoms sent to each server; `D_theta` is their sum.
    pub fn downloads(&self) -> Vec<usize> {
        self.queries.iter().map(Vec::len).collect()
    }

    pub fn download_cost(&self) -> usize {
        self.queries.iter().map(Vec::len).sum()
    }

    /// Servers that receive a non-empty query.
    pub fn contacted(&self) -> Vec<usize> {
        (1..=self.queries.len())
            .filter(|&n| !self.queries[n - 1].is_empty())
            .collect()
    }

    /// Structural checks: every atom is answerable by its server, positions are
    /// in range and the recipe covers each logical position exactly once using
    /// emitted atoms only.
    pub fn validate(&self, g: &Graph) -> Result<(), SchemeError> {
        if self.queries.len() != g.num_servers() {
            return Err(SchemeError::IncompleteAnswers {
                server: self.queries.len() + 1,
            });
        }
        for (idx, atoms) in self.queries.iter().enumerate() {
            let server = idx + 1;
            for atom in atoms {
                if atom.is_empty() {
                    return Err(SchemeError::MalformedAtom(format!("empty atom at server {server}")));
                }
                let mut seen = BTreeSet::new();
                for r in &atom.refs {
                    if !g.storage().stores(server, r.message) {
                        return Err(SchemeError::UnresolvableRef {
                            server,
                            message: r.message,
                        });
                    }
                    if r.position == 0 || r.position > self.message_len {
                        return Err(SchemeError::PositionOutOfRange {
                            message: r.message,
                            position: r.position,
                            len: self.message_len,
                        });
                    }
                    if !seen.insert(r.message) {
                        return Err(SchemeError::MalformedAtom(format!(
                            "message {} repeated in one atom at server {server}",
                            r.message
                        )));
                    }
                }
            }
        }
        let mut covered = vec![false; self.message_len];
        for step in &self.recipe {
            if step.position == 0 || step.position > self.message_len || covered[step.position - 1] {
                return Err(SchemeError::Undecodable {
                    theta: self.theta,
                    position: step.position,
                });
            }
            covered[step.position - 1] = true;
            for (_, r) in &step.terms {
                if r.server == 0 || r.server > self.queries.len() || r.atom >= self.queries[r.server - 1].len() {
                    return Err(SchemeError::IncompleteAnswers { server: r.server });
                }
            }
        }
        if let Some(p) = covered.iter().position(|c| !c) {
            return Err(SchemeError::Undecodable {
                theta: self.theta,
                position: p + 1,
            });
        }
        Ok(())
    }
}

/// One plan per desired message, indexed by message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanFamily {
    plans: Vec<SchemePlan>,
}

impl PlanFamily {
    /// Wraps hand-built or edited plans; `plans[k - 1]` must target message `k`.
    pub fn from_plans(plans: Vec<SchemePlan>) -> Self {
        for (idx, p) in plans.iter().enumerate() {
            assert_eq!(p.theta, idx + 1, "plans must be ordered by desired message");
        }
        Self { plans }
    }

    pub fn plan(&self, theta: usize) -> &SchemePlan {
        &self.plans[theta - 1]
    }

    pub fn plan_mut(&mut self, theta: usize) -> &mut SchemePlan {
        &mut self.plans[theta - 1]
    }

    pub fn plans(&self) -> &[SchemePlan] {
        &self.plans
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// Length of message `k` as fixed by the plan retrieving it.
    pub fn message_len(&self, k: usize) -> usize {
        self.plans[k - 1].message_len
    }

    pub fn message_lens(&self) -> Vec<usize> {
        self.plans.iter().map(|p| p.message_len).collect()
    }
}

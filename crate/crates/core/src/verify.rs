//! Exact checks of a plan family: local privacy by enumerating the user's
//! permutations, decodability over random storage, and download-cost audits.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::capacity::{to_f64, Rational};
use crate::field::Field;
use crate::graph::{Graph, GraphError};
use crate::scheme::{et_download_cost, min_square_part, PlanFamily, PlanKind, Query, Randomness, SchemeError};
use crate::sim;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// What server `n` observes for one retrieval.
pub type QueryFingerprint = Query;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("enumeration needs {count} permutation tuples, above the cap of {cap}")]
    EnumerationTooLarge { count: BigUint, cap: u64 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Number of tuples [`enumerate_randomness`] would produce.
pub fn randomness_count(messages: &[(usize, usize)]) -> BigUint {
    messages.iter().map(|&(_, len)| factorial(len)).product()
}

/// Every tuple of per-message permutations, each exactly once. `messages`
/// pairs each message id with its length.
pub fn enumerate_randomness(
    messages: &[(usize, usize)],
    cap: u64,
) -> Result<impl Iterator<Item = Randomness> + use<>, VerifyError> {
    let count = randomness_count(messages);
    if count > BigUint::from(cap) {
        return Err(VerifyError::EnumerationTooLarge { count, cap });
    }
    let mut by_len: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for &(_, len) in messages {
        by_len
            .entry(len)
            .or_insert_with(|| (1..=len).permutations(len).collect());
    }
    let ids: Vec<usize> = messages.iter().map(|&(k, _)| k).collect();
    let choices: Vec<Vec<Vec<usize>>> = messages.iter().map(|(_, len)| by_len[len].clone()).collect();
    // multi_cartesian_product yields nothing for an empty input; one empty tuple is right
    let tuples: Box<dyn Iterator<Item = Vec<Vec<usize>>>> = if choices.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(choices.into_iter().map(|c| c.into_iter()).multi_cartesian_product())
    };
    Ok(tuples.map(move |perms| {
        Randomness::from_permutations(ids.iter().copied().zip(perms).collect()).expect("permutations are bijections")
    }))
}

/// Exact distribution of server `n`'s fingerprint as counts over the
/// enumerated tuples.
type Counts = BTreeMap<QueryFingerprint, u64>;

fn scope(family: &PlanFamily, g: &Graph, n: usize) -> Vec<(usize, usize)> {
    g.index_set(n).iter().map(|&k| (k, family.message_len(k))).collect()
}

fn distributions(
    family: &PlanFamily,
    g: &Graph,
    n: usize,
    thetas: &[usize],
    cap: u64,
) -> Result<(Vec<Counts>, u64), VerifyError> {
    g.check_server(n)?;
    let messages = scope(family, g, n);
    let total = randomness_count(&messages).to_u64().unwrap_or(u64::MAX);
    if total > cap {
        return Err(VerifyError::EnumerationTooLarge {
            count: randomness_count(&messages),
            cap,
        });
    }
    let dists = thetas
        .par_iter()
        .map(|&theta| {
            let atoms = family.plan(theta).server_atoms(n);
            let mut counts = Counts::new();
            for rnd in enumerate_randomness(&messages, cap)? {
                let (q, _) = Query::translate(atoms, &rnd)?;
                *counts.entry(q).or_insert(0) += 1;
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    Ok((dists, total))
}

fn to_rational(counts: &Counts, total: u64) -> BTreeMap<QueryFingerprint, Rational> {
    counts
        .iter()
        .map(|(q, &c)| (q.clone(), Rational::new(c.into(), total.into())))
        .collect()
}

/// A fingerprint whose probability differs between two desired messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinguisher {
    pub fingerprint: QueryFingerprint,
    pub theta_a: usize,
    pub theta_b: usize,
    pub prob_a: Rational,
    pub prob_b: Rational,
}

fn first_difference(a: &Counts, b: &Counts) -> Option<QueryFingerprint> {
    a.keys()
        .chain(b.keys())
        .filter(|q| a.get(*q) != b.get(*q))
        .min()
        .cloned()
}

fn distinguisher(counts: &[Counts], thetas: &[usize], total: u64, a: usize, b: usize) -> Option<Distinguisher> {
    let fingerprint = first_difference(&counts[a], &counts[b])?;
    let prob = |i: usize| Rational::new(counts[i].get(&fingerprint).copied().unwrap_or(0).into(), total.into());
    Some(Distinguisher {
        theta_a: thetas[a],
        theta_b: thetas[b],
        prob_a: prob(a),
        prob_b: prob(b),
        fingerprint,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyReport {
    pub server: usize,
    pub index_set: Vec<usize>,
    /// `(θ, distribution)` for every θ in the index set.
    pub distributions: Vec<(usize, BTreeMap<QueryFingerprint, Rational>)>,
    pub verdict: Verdict,
    pub counterexample: Option<Distinguisher>,
}

impl PrivacyReport {
    pub fn support_size(&self) -> usize {
        self.distributions.iter().map(|(_, d)| d.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "server": self.server,
            "thetas": self.index_set,
            "verdict": self.verdict,
            "support_size": self.support_size(),
            "counterexample": self.counterexample.as_ref().map(|c| json!(c.fingerprint.atoms)),
        })
    }
}

/// Local privacy at server `n`: its fingerprint distribution must be the same
/// for every desired message it stores.
pub fn privacy_check(family: &PlanFamily, g: &Graph, n: usize, cap: u64) -> Result<PrivacyReport, VerifyError> {
    let thetas = g.index_set(n).to_vec();
    let (counts, total) = distributions(family, g, n, &thetas, cap)?;
    let counterexample = (1..counts.len()).find_map(|b| distinguisher(&counts, &thetas, total, 0, b));
    Ok(PrivacyReport {
        server: n,
        verdict: Verdict::from_bool(counterexample.is_none()),
        distributions: thetas
            .iter()
            .zip(&counts)
            .map(|(&t, c)| (t, to_rational(c, total)))
            .collect(),
        index_set: thetas,
        counterexample,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalProbe {
    pub server: usize,
    /// Desired messages outside the server's index set whose fingerprint
    /// distribution differs from the reference message's.
    pub distinguishable: Vec<usize>,
    pub reference: usize,
    pub local_private: bool,
    pub canonical_private: bool,
    pub example: Option<Distinguisher>,
}

impl CanonicalProbe {
    pub fn to_json(&self) -> Value {
        json!({
            "server": self.server,
            "reference_theta": self.reference,
            "distinguishable": self.distinguishable,
            "local_private": self.local_private,
            "canonical_private": self.canonical_private,
        })
    }
}

/// Compares server `n`'s fingerprint distribution across all desired
/// messages, not only the ones it stores.
pub fn canonical_privacy_probe(family: &PlanFamily, g: &Graph, n: usize, cap: u64) -> Result<CanonicalProbe, VerifyError> {
    let thetas: Vec<usize> = g.messages().collect();
    let (counts, total) = distributions(family, g, n, &thetas, cap)?;
    let local = g.index_set(n);
    let reference = local.first().copied().unwrap_or(1);
    let r = reference - 1;
    let local_private = local.iter().all(|&k| counts[k - 1] == counts[r]);
    let differs: Vec<usize> = thetas.iter().copied().filter(|&k| counts[k - 1] != counts[r]).collect();
    let distinguishable: Vec<usize> = differs.iter().copied().filter(|k| !local.contains(k)).collect();
    let example = distinguishable
        .first()
        .and_then(|&k| distinguisher(&counts, &thetas, total, r, k - 1));
    Ok(CanonicalProbe {
        server: n,
        canonical_private: differs.is_empty(),
        distinguishable,
        reference,
        local_private,
        example,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeReport {
    pub verdict: Verdict,
    pub q: u64,
    pub runs: usize,
    /// First failing `(θ, seed)` in θ-then-seed order.
    pub failure: Option<(usize, u64)>,
}

/// Full pipeline for every desired message and seed: random storage, queries,
/// answers, decoding.
pub fn decode_check(family: &PlanFamily, g: &Graph, q: u64, seeds: &[u64]) -> Result<DecodeReport, VerifyError> {
    let field = Field::new(q).map_err(SchemeError::from)?;
    let runs: Vec<(usize, u64)> = g.messages().flat_map(|t| seeds.iter().map(move |&s| (t, s))).collect();
    let outcomes = runs
        .par_iter()
        .map(|&(theta, seed)| sim::execute(family, g, theta, seed, field).map(|t| t.decoded_ok))
        .collect::<Result<Vec<bool>, SchemeError>>()?;
    let failure = runs.iter().zip(&outcomes).find(|(_, ok)| !**ok).map(|(r, _)| *r);
    Ok(DecodeReport {
        verdict: Verdict::from_bool(failure.is_none()),
        q,
        runs: runs.len(),
        failure,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaCost {
    pub theta: usize,
    pub message_len: usize,
    pub download: usize,
    pub closed_form: Option<usize>,
}

impl ThetaCost {
    pub fn matches(&self) -> bool {
        self.closed_form.is_none_or(|c| c == self.download)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostAudit {
    pub per_theta: Vec<ThetaCost>,
    pub total_download: usize,
    pub rate: Rational,
    /// `Σ_{V_m*} deg² · L` for a plain bipartite family.
    pub bipartite_total: Option<usize>,
}

impl CostAudit {
    pub fn mismatches(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.per_theta.iter().filter(|c| !c.matches()).map(|c| c.theta).collect();
        if self.bipartite_total.is_some_and(|t| t != self.total_download) {
            out.push(0);
        }
        out
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.mismatches().is_empty())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "per_theta": self.per_theta.iter().map(|c| json!({
                "theta": c.theta,
                "L": c.message_len,
                "D_k": c.download,
                "closed_form": c.closed_form,
                "matches": c.matches(),
            })).collect::<Vec<_>>(),
            "total_download": self.total_download,
            "rate": self.rate.to_string(),
            "rate_approx": to_f64(&self.rate),
            "verdict": self.verdict(),
        })
    }
}

/// Counts downloads from the emitted atoms and compares them to the closed
/// forms of the scheme that produced each plan.
pub fn cost_audit(family: &PlanFamily, g: &Graph) -> Result<CostAudit, VerifyError> {
    let mut per_theta = Vec::with_capacity(family.len());
    for plan in family.plans() {
        let closed_form = match &plan.kind {
            PlanKind::EdgeTransitive { role_i, role_j, t_i, t_j } => {
                Some(et_download_cost(g.degree(*role_i), g.degree(*role_j), *t_i, *t_j)?)
            }
            PlanKind::Bipartite { endpoint, .. } => Some(g.degree(*endpoint) * plan.message_len),
            PlanKind::Fixture(_) => {
                let (u, v) = g.endpoints(plan.theta);
                Some(et_download_cost(g.degree(u), g.degree(v), 2, 2)?)
            }
        };
        per_theta.push(ThetaCost {
            theta: plan.theta,
            message_len: plan.message_len,
            download: plan.download_cost(),
            closed_form,
        });
    }
    let total_download: usize = per_theta.iter().map(|c| c.download).sum();
    let total_len: usize = per_theta.iter().map(|c| c.message_len).sum();
    let rate = if total_download == 0 {
        Rational::one()
    } else {
        Rational::new(total_len.into(), total_download.into())
    };

    let plain_bipartite = !family.is_empty()
        && family
            .plans()
            .iter()
            .all(|p| p.component.is_none() && matches!(p.kind, PlanKind::Bipartite { .. }));
    let bipartite_total = if plain_bipartite {
        let partition = g.bipartition().ok_or(SchemeError::NotBipartite)?;
        let (_, weight) = min_square_part(g, &partition);
        Some(weight as usize * family.plans()[0].message_len)
    } else {
        None
    };
    Ok(CostAudit {
        per_theta,
        total_download,
        rate,
        bipartite_total,
    })
}

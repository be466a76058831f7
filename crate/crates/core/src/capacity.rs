//! Closed-form capacity bounds for local PIR, kept as exact rationals.
//!
//! Bounds that involve a square root are stored as `coeff / sqrt(radicand)`
//! and compared against rationals by squaring.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{Bipartition, Family, Graph, GraphError};
use crate::scheme::{binomial, et_download_cost, min_square_part, subpacketization, SchemeError};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapacityError {
    #[error("no parts given")]
    EmptyInput,
    #[error("all union parts must be positive")]
    NonPositive,
    #[error("degree must be at least 1")]
    InvalidDegree,
    #[error("graph is not bipartite under the given partition")]
    NotBipartite,
    #[error("no closed-form bounds for {0}")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `coeff / sqrt(radicand)` with positive rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvSqrt {
    pub coeff: Rational,
    pub radicand: Rational,
}

impl InvSqrt {
    /// The value squared, which is rational.
    pub fn square(&self) -> Rational {
        &self.coeff * &self.coeff / &self.radicand
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        if r.is_negative() {
            return Ordering::Greater;
        }
        self.square().cmp(&(r * r))
    }

    pub fn approx(&self) -> f64 {
        to_f64(&self.coeff) / to_f64(&self.radicand).sqrt()
    }
}

impl fmt::Display for InvSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.coeff.numer();
        let den = self.coeff.denom();
        if den.is_one() {
            write!(f, "{num}/sqrt({})", self.radicand)
        } else {
            write!(f, "{num}/({den}*sqrt({}))", self.radicand)
        }
    }
}

pub struct UnionPart {
    pub edges: u64,
    pub message_len: Rational,
    pub expected_download: Rational,
}

impl UnionPart {
    pub fn new(edges: u64, message_len: u64, expected_download: Rational) -> Self {
        Self {
            edges,
            message_len: int(message_len),
            expected_download,
        }
    }
}

/// Rate of dispatching each message to its own component's scheme:
/// `Σ |E_i| L_i / Σ |E_i| E[D_i]`.
pub fn union_capacity(parts: &[UnionPart]) -> Result<Rational, CapacityError> {
    if parts.is_empty() {
        return Err(CapacityError::EmptyInput);
    }
    let mut num = Rational::zero();
    let mut den = Rational::zero();
    for p in parts {
        if p.edges == 0 || !p.message_len.is_positive() || !p.expected_download.is_positive() {
            return Err(CapacityError::NonPositive);
        }
        num += int(p.edges) * &p.message_len;
        den += int(p.edges) * &p.expected_download;
    }
    Ok(num / den)
}

fn big_binomial(n: usize, k: usize) -> BigInt {
    BigInt::from(binomial(n as u64, k as u64))
}

fn check_ranges(deg_i: usize, deg_j: usize, t_i: usize, t_j: usize) -> Result<(), CapacityError> {
    for (t, deg) in [(t_i, deg_i), (t_j, deg_j)] {
        if t == 0 || t > deg {
            return Err(SchemeError::TOutOfRange { t, deg }.into());
        }
    }
    Ok(())
}

/// Share of the message length carried by the role-`i` side.
pub fn lambda_weight(deg_i: usize, deg_j: usize, t_i: usize, t_j: usize) -> Result<Rational, CapacityError> {
    check_ranges(deg_i, deg_j, t_i, t_j)?;
    let ci = big_binomial(deg_i - 1, t_i - 1);
    let cj = big_binomial(deg_j - 1, t_j - 1);
    Ok(Rational::new(ci.clone(), ci + cj))
}

/// `(d / t + t - 1)` for one side.
fn side_cost(deg: usize, t: usize) -> Rational {
    Rational::new(BigInt::from(deg), BigInt::from(t)) + int(t as u64 - 1)
}

/// Rate of the t-sum scheme, written as the inverse of the λ-weighted cost.
pub fn et_rate(deg_i: usize, deg_j: usize, t_i: usize, t_j: usize) -> Result<Rational, CapacityError> {
    let lambda = lambda_weight(deg_i, deg_j, t_i, t_j)?;
    let cost = &lambda * side_cost(deg_i, t_i) + (Rational::one() - &lambda) * side_cost(deg_j, t_j);
    Ok(cost.recip())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtOptimum {
    pub rate: Rational,
    pub t_i: usize,
    pub t_j: usize,
}

/// Exhaustive maximum of the t-sum rate over `t_i ∈ [deg_i]`, `t_j ∈ [deg_j]`;
/// ties keep the lexicographically smallest pair.
pub fn et_lower_bound(deg_i: usize, deg_j: usize) -> Result<EtOptimum, CapacityError> {
    if deg_i == 0 || deg_j == 0 {
        return Err(CapacityError::InvalidDegree);
    }
    let row = |d: usize| -> Vec<BigUint> { (0..d).map(|k| binomial(d as u64 - 1, k as u64)).collect() };
    let (row_i, row_j) = (row(deg_i), row(deg_j));
    // side weight X = C(d-1, t-1) * (d + t(t-1)), so the cost is X_i/t_i + X_j/t_j
    let weight = |row: &[BigUint], d: usize, t: usize| &row[t - 1] * BigUint::from(d + t * (t - 1));
    let wi: Vec<BigUint> = (1..=deg_i).map(|t| weight(&row_i, deg_i, t)).collect();
    let wj: Vec<BigUint> = (1..=deg_j).map(|t| weight(&row_j, deg_j, t)).collect();

    // rate = L * t_i * t_j / (X_i * t_j + X_j * t_i)
    let mut best: Option<(BigUint, BigUint, usize, usize)> = None;
    for t_i in 1..=deg_i {
        for t_j in 1..=deg_j {
            let len = &row_i[t_i - 1] + &row_j[t_j - 1];
            let num = len * BigUint::from(t_i * t_j);
            let den = &wi[t_i - 1] * BigUint::from(t_j) + &wj[t_j - 1] * BigUint::from(t_i);
            let better = match &best {
                None => true,
                Some((bn, bd, _, _)) => &num * bd > bn * &den,
            };
            if better {
                best = Some((num, den, t_i, t_j));
            }
        }
    }
    let (num, den, t_i, t_j) = best.expect("degrees are positive");
    Ok(EtOptimum {
        rate: Rational::new(BigInt::from(num), BigInt::from(den)),
        t_i,
        t_j,
    })
}

/// `{floor(sqrt d), ceil(sqrt d)}`.
pub fn equal_degree_candidates(d: usize) -> [usize; 2] {
    let lo = d.sqrt();
    let hi = if lo * lo == d { lo } else { lo + 1 };
    [lo, hi]
}

/// Best rate with `t_i = t_j = t` restricted to the two candidates around
/// `sqrt(d)`.
pub fn equal_degree_bound(d: usize) -> Result<Rational, CapacityError> {
    if d == 0 {
        return Err(CapacityError::InvalidDegree);
    }
    Ok(equal_degree_candidates(d)
        .into_iter()
        .map(|t| side_cost(d, t).recip())
        .max()
        .expect("two candidates"))
}

/// `K / min_m Σ_{n ∈ V_m} deg(n)²`.
pub fn bipartite_lower_bound(g: &Graph, partition: &Bipartition) -> Result<Rational, CapacityError> {
    if !partition.is_valid_for(g) {
        return Err(CapacityError::NotBipartite);
    }
    if g.num_messages() == 0 {
        return Err(CapacityError::EmptyInput);
    }
    let (_, weight) = min_square_part(g, partition);
    Ok(Rational::new(BigInt::from(g.num_messages()), BigInt::from(weight)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComparatorValue {
    Exact(Rational),
    Interval { lower: f64, upper: f64 },
    Asymptotic(String),
}

/// A published capacity value for canonical (non-local) PIR on the same graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparator {
    pub value: ComparatorValue,
    pub source: &'static str,
    pub note: Option<String>,
}

impl Comparator {
    fn exact(value: Rational, source: &'static str) -> Self {
        Self {
            value: ComparatorValue::Exact(value),
            source,
            note: None,
        }
    }

    fn interval(lower: f64, upper: f64, source: &'static str, note: &str) -> Self {
        Self {
            value: ComparatorValue::Interval { lower, upper },
            source,
            note: Some(note.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        let value = match &self.value {
            ComparatorValue::Exact(r) => json!(r.to_string()),
            ComparatorValue::Interval { lower, upper } => json!({"lower": lower, "upper": upper}),
            ComparatorValue::Asymptotic(s) => json!(s),
        };
        let mut obj = json!({"value": value, "source": self.source});
        if let Some(note) = &self.note {
            obj["note"] = json!(note);
        }
        obj
    }

    pub fn describe(&self) -> String {
        let v = match &self.value {
            ComparatorValue::Exact(r) => r.to_string(),
            ComparatorValue::Interval { lower, upper } => format!("[{lower:.4}, {upper:.4}]"),
            ComparatorValue::Asymptotic(s) => s.clone(),
        };
        match &self.note {
            Some(n) => format!("{v} [{}; {n}]", self.source),
            None => format!("{v} [{}]", self.source),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub family: String,
    pub n: usize,
    pub lower: Option<Rational>,
    pub lower_basis: String,
    /// Weaker closed form of the lower bound, when it has one.
    pub lower_closed_form: Option<InvSqrt>,
    pub upper: Rational,
    pub upper_basis: String,
    pub exact: bool,
    pub optimizer: Option<(usize, usize)>,
    pub pir_comparators: Vec<Comparator>,
}

impl BoundReport {
    fn new(family: String, n: usize, lower: Rational, lower_basis: String, upper: Rational, upper_basis: &str) -> Self {
        let exact = lower == upper;
        Self {
            family,
            n,
            lower: Some(lower),
            lower_basis,
            lower_closed_form: None,
            upper,
            upper_basis: upper_basis.to_string(),
            exact,
            optimizer: None,
            pir_comparators: Vec::new(),
        }
    }

    pub fn brackets(&self, rate: &Rational) -> bool {
        rate <= &self.upper && self.lower.as_ref().is_none_or(|l| l <= rate)
    }

    pub fn to_json(&self) -> Value {
        let lower = match &self.lower {
            Some(l) => {
                let mut obj = json!({
                    "value": l.to_string(),
                    "approx": to_f64(l),
                    "basis": self.lower_basis,
                });
                if let Some(cf) = &self.lower_closed_form {
                    obj["closed_form"] = json!(cf.to_string());
                    obj["closed_form_approx"] = json!(cf.approx());
                }
                obj
            }
            None => Value::Null,
        };
        json!({
            "family": self.family,
            "n": self.n,
            "lower": lower,
            "upper": {
                "value": self.upper.to_string(),
                "approx": to_f64(&self.upper),
                "basis": self.upper_basis,
            },
            "exact": self.exact,
            "optimizer": self.optimizer.map(|(t_i, t_j)| json!({"t_i": t_i, "t_j": t_j})),
            "pir_comparators": self.pir_comparators.iter().map(Comparator::to_json).collect::<Vec<_>>(),
        })
    }
}

impl Serialize for BoundReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

const TRIVIAL: &str = "trivial (rate never exceeds 1)";

fn et_basis(opt: &EtOptimum) -> String {
    format!("edge-transitive t-sum scheme (t_i={}, t_j={})", opt.t_i, opt.t_j)
}

/// Bounds for the named families.
pub fn family_bounds(family: &Family) -> Result<BoundReport, CapacityError> {
    let name = family.to_string();
    let n = family.num_servers();
    let bad = || CapacityError::UnsupportedFamily(name.clone());
    let report = match family {
        Family::Cycle(n) => {
            if *n < 3 {
                return Err(bad());
            }
            let opt = et_lower_bound(2, 2)?;
            let mut r = BoundReport::new(name, *n, opt.rate.clone(), et_basis(&opt), rational(1, 2), "cycle converse");
            r.optimizer = Some((opt.t_i, opt.t_j));
            r.pir_comparators
                .push(Comparator::exact(rational(2, *n as i64 + 1), "BU19"));
            r
        }
        Family::Path(n) => {
            let n = *n as i64;
            if n < 2 {
                return Err(bad());
            }
            let (lower, upper, upper_basis) = if n == 2 {
                (rational(1, 1), rational(1, 1), TRIVIAL)
            } else if n % 2 == 0 {
                (rational(n - 1, 2 * n - 3), rational(n - 1, 2 * n - 4), "path converse")
            } else {
                (rational(n - 1, 2 * n - 4), rational(n - 1, 2 * n - 4), "path converse")
            };
            let mut r = BoundReport::new(
                name,
                n as usize,
                lower,
                "bipartite vertex-cover scheme (odd vertices as V1)".into(),
                upper,
                upper_basis,
            );
            r.pir_comparators.push(Comparator::exact(rational(2, n), "our_journal2025"));
            r
        }
        Family::Star(n) => {
            if *n < 2 {
                return Err(bad());
            }
            let mut r = BoundReport::new(
                name,
                *n,
                rational(1, 1),
                "bipartite vertex-cover scheme (leaves as V1)".into(),
                rational(1, 1),
                TRIVIAL,
            );
            r.pir_comparators.push(Comparator {
                value: ComparatorValue::Asymptotic("Theta(1/sqrt(N))".into()),
                source: "SGT23",
                note: None,
            });
            r
        }
        Family::Complete(n) => {
            if *n < 2 {
                return Err(bad());
            }
            let d = n - 1;
            let opt = et_lower_bound(d, d)?;
            let (upper, basis) = if *n == 3 {
                (rational(1, 2), "cycle converse (K_3 = C_3)")
            } else {
                (rational(1, 1), TRIVIAL)
            };
            let mut r = BoundReport::new(name, *n, opt.rate.clone(), et_basis(&opt), upper, basis);
            r.optimizer = Some((opt.t_i, opt.t_j));
            r.lower_closed_form = Some(InvSqrt {
                coeff: rational(1, 2),
                radicand: int(d as u64),
            });
            let nf = *n as f64;
            if *n == 4 {
                r.pir_comparators
                    .push(Comparator::interval(0.35, 0.3529, "gePIR", "numerical bounds for K_4"));
            } else {
                r.pir_comparators.push(Comparator::interval(
                    4.0 / (3.0 * nf),
                    1.0 / (nf * (std::f64::consts::E - 2.0)),
                    "gePIR",
                    "lower bound is (4/3 - o(1))/N; o(1) dropped",
                ));
            }
            r
        }
        Family::CompleteBipartite(a, b) => {
            let g = family.build()?;
            let part = g.bipartition().expect("complete bipartite graphs are bipartite");
            let bip = bipartite_lower_bound(&g, &part)?;
            let opt = et_lower_bound(*b, *a)?;
            let (lower, basis, optimizer) = if opt.rate >= bip {
                (opt.rate.clone(), et_basis(&opt), Some((opt.t_i, opt.t_j)))
            } else {
                (bip, "bipartite vertex-cover scheme".to_string(), None)
            };
            let (upper, upper_basis) = if *a == 2 && *b == 2 {
                (rational(1, 2), "cycle converse (K_{2,2} = C_4)")
            } else {
                (rational(1, 1), TRIVIAL)
            };
            let mut r = BoundReport::new(name, a + b, lower, basis, upper, upper_basis);
            r.optimizer = optimizer;
            if a == b {
                let nf = (a + b) as f64;
                r.lower_closed_form = Some(InvSqrt {
                    coeff: rational(1, 2),
                    radicand: int(*a as u64),
                });
                r.pir_comparators.push(Comparator::interval(
                    4.0 / (3.0 * nf),
                    1.0 / (nf * (std::f64::consts::E.sqrt() - 1.0)),
                    "krishnan_graph, gePIR",
                    "lower from krishnan_graph, upper from gePIR",
                ));
            }
            r
        }
        Family::DisjointCopies(base, m) => {
            let mut r = family_bounds(base)?;
            r.family = name;
            r.n = n;
            r.lower_basis = format!("{} on each copy", r.lower_basis);
            for c in &mut r.pir_comparators {
                if let ComparatorValue::Exact(v) = &c.value {
                    *c = Comparator::exact(v / int(*m as u64), "our_journal2025");
                } else {
                    c.note = Some(format!("single copy value; union divides by {m}"));
                }
            }
            r
        }
    };
    Ok(report)
}

/// Best closed-form scheme for one connected component, as
/// `(rate, L, E[D], basis)`.
fn component_scheme(g: &Graph) -> Result<Option<(Rational, Rational, Rational, String)>, CapacityError> {
    let mut best: Option<(Rational, Rational, Rational, String)> = None;
    if let Some(part) = g.bipartition() {
        let (_, weight) = min_square_part(g, &part);
        let k = g.num_messages() as u64;
        let rate = bipartite_lower_bound(g, &part)?;
        best = Some((rate, int(1), Rational::new(BigInt::from(weight), BigInt::from(k)), "bipartite vertex-cover scheme".into()));
    }
    if g.num_servers() <= crate::graph::DEFAULT_AUTOMORPHISM_CAP && g.is_edge_transitive()? {
        let (u, v) = g.endpoints(1);
        let (di, dj) = {
            let (a, b) = (g.degree(u), g.degree(v));
            (a.min(b), a.max(b))
        };
        let opt = et_lower_bound(di, dj)?;
        let len = subpacketization(di, dj, opt.t_i, opt.t_j)? as u64;
        let cost = et_download_cost(di, dj, opt.t_i, opt.t_j)? as u64;
        if best.as_ref().is_none_or(|b| opt.rate > b.0) {
            best = Some((opt.rate.clone(), int(len), int(cost), et_basis(&opt)));
        }
    }
    Ok(best)
}

/// Bounds for an arbitrary graph: the better of the bipartite and t-sum
/// schemes per component, combined across components.
pub fn graph_bounds(g: &Graph) -> Result<BoundReport, CapacityError> {
    let comps: Vec<_> = g
        .components()
        .into_iter()
        .filter(|c| c.graph.num_messages() > 0)
        .collect();
    if comps.is_empty() {
        return Err(CapacityError::EmptyInput);
    }
    let mut parts = Vec::new();
    let mut bases = Vec::new();
    let mut complete = true;
    for c in &comps {
        match component_scheme(&c.graph)? {
            Some((_, len, cost, basis)) => {
                // all messages share one length, so scale each scheme to L = 1
                parts.push(UnionPart {
                    edges: c.graph.num_messages() as u64,
                    message_len: Rational::one(),
                    expected_download: cost / len,
                });
                bases.push(basis);
            }
            None => complete = false,
        }
    }
    let lower = if complete { Some(union_capacity(&parts)?) } else { None };
    let basis = if comps.len() == 1 {
        bases.pop().unwrap_or_default()
    } else {
        format!("per-component dispatch: {}", bases.join("; "))
    };
    let upper = rational(1, 1);
    let exact = lower.as_ref() == Some(&upper);
    Ok(BoundReport {
        family: "graph".into(),
        n: g.num_servers(),
        lower,
        lower_basis: basis,
        lower_closed_form: None,
        upper,
        upper_basis: TRIVIAL.into(),
        exact,
        optimizer: None,
        pir_comparators: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn union_examples() {
        let c4 = UnionPart::new(4, 2, int(4));
        let c4b = UnionPart::new(4, 2, int(4));
        assert_eq!(union_capacity(&[c4, c4b]).unwrap(), rational(1, 2));
        assert_eq!(union_capacity(&[UnionPart::new(3, 4, int(10))]).unwrap(), rational(2, 5));
        let mixed = [UnionPart::new(4, 2, int(4)), UnionPart::new(4, 1, int(1))];
        assert_eq!(union_capacity(&mixed).unwrap(), rational(3, 5));
        assert_eq!(union_capacity(&[]), Err(CapacityError::EmptyInput));
        assert_eq!(
            union_capacity(&[UnionPart::new(0, 1, int(1))]),
            Err(CapacityError::NonPositive)
        );
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_weight(3, 3, 2, 2).unwrap(), rational(1, 2));
        assert_eq!(lambda_weight(1, 4, 1, 1).unwrap(), rational(1, 2));
        assert_eq!(lambda_weight(3, 3, 1, 2).unwrap(), rational(1, 3));
        assert!(lambda_weight(3, 3, 4, 1).is_err());
    }

    #[test]
    fn et_bound_examples() {
        let two = et_lower_bound(2, 2).unwrap();
        assert_eq!((two.rate.clone(), two.t_i, two.t_j), (rational(1, 2), 1, 1));
        assert_eq!(et_rate(2, 2, 2, 2).unwrap(), rational(1, 2));
        assert_eq!(et_lower_bound(3, 3).unwrap().rate, rational(2, 5));
        let eight = et_lower_bound(8, 8).unwrap();
        assert_eq!(eight.rate, rational(3, 14));
        assert_eq!((eight.t_i, eight.t_j), (3, 3));
        assert_eq!(eight.rate, equal_degree_bound(8).unwrap());
        assert_eq!(et_lower_bound(0, 3), Err(CapacityError::InvalidDegree));
    }

    #[test]
    fn et_bound_matches_rate_formula_scan() {
        // slow route: evaluate the λ form for every pair with BigRational
        for di in 1..10 {
            for dj in 1..10 {
                let mut best = Rational::zero();
                for ti in 1..=di {
                    for tj in 1..=dj {
                        best = best.max(et_rate(di, dj, ti, tj).unwrap());
                    }
                }
                assert_eq!(et_lower_bound(di, dj).unwrap().rate, best, "({di},{dj})");
            }
        }
    }

    #[test]
    fn equal_degree_examples() {
        assert_eq!(equal_degree_bound(2).unwrap(), rational(1, 2));
        assert_eq!(equal_degree_bound(6).unwrap(), rational(1, 4));
        assert_eq!(equal_degree_candidates(6), [2, 3]);
        assert_eq!(equal_degree_candidates(9), [3, 3]);
        assert_eq!(equal_degree_candidates(1), [1, 1]);
        for n in 2..60usize {
            let closed = InvSqrt {
                coeff: rational(1, 2),
                radicand: int(n as u64 - 1),
            };
            let b = equal_degree_bound(n - 1).unwrap();
            assert_ne!(closed.cmp_rational(&b), Ordering::Greater, "N={n}");
            assert!(to_f64(&b) >= 1.0 / (2.0 * ((n - 1) as f64).sqrt()) - 1e-12);
        }
    }

    #[test]
    fn bipartite_examples() {
        let s = Family::Star(7).build().unwrap();
        assert_eq!(bipartite_lower_bound(&s, &s.bipartition().unwrap()).unwrap(), rational(1, 1));
        let p5 = Family::Path(5).build().unwrap();
        assert_eq!(bipartite_lower_bound(&p5, &p5.bipartition().unwrap()).unwrap(), rational(2, 3));
        let p4 = Family::Path(4).build().unwrap();
        assert_eq!(bipartite_lower_bound(&p4, &p4.bipartition().unwrap()).unwrap(), rational(3, 5));
        let bad = Bipartition {
            v1: vec![1, 2],
            v2: vec![3, 4],
        };
        assert_eq!(bipartite_lower_bound(&p4, &bad), Err(CapacityError::NotBipartite));
    }

    #[test]
    fn path_closed_form_matches_graph_route() {
        for n in 3..40 {
            let g = Family::Path(n).build().unwrap();
            let via_graph = bipartite_lower_bound(&g, &g.bipartition().unwrap()).unwrap();
            let report = family_bounds(&Family::Path(n)).unwrap();
            assert_eq!(report.lower.clone().unwrap(), via_graph, "N={n}");
            assert_eq!(report.exact, n % 2 == 1);
        }
    }

    #[test]
    fn family_examples() {
        let c9 = family_bounds(&Family::Cycle(9)).unwrap();
        assert!(c9.exact);
        assert_eq!(c9.lower, Some(rational(1, 2)));
        assert_eq!(c9.pir_comparators[0].value, ComparatorValue::Exact(rational(1, 5)));

        let p7 = family_bounds(&Family::Path(7)).unwrap();
        assert!(p7.exact);
        assert_eq!(p7.upper, rational(3, 5));

        let p6 = family_bounds(&Family::Path(6)).unwrap();
        assert!(!p6.exact);
        assert_eq!(p6.lower, Some(rational(5, 9)));
        assert_eq!(p6.upper, rational(5, 8));

        let p2 = family_bounds(&Family::Path(2)).unwrap();
        assert!(p2.exact);

        let k4 = family_bounds(&Family::Complete(4)).unwrap();
        assert_eq!(k4.lower, Some(rational(2, 5)));
        assert_eq!(k4.optimizer, Some((2, 2)));
        assert!(!k4.exact);

        let s = family_bounds(&Family::Star(5)).unwrap();
        assert!(s.exact);
        assert_eq!(s.upper, rational(1, 1));

        let kb = family_bounds(&Family::CompleteBipartite(2, 2)).unwrap();
        assert!(kb.exact);
        assert_eq!(kb.lower, Some(rational(1, 2)));

        let two = family_bounds(&Family::DisjointCopies(Box::new(Family::Cycle(4)), 2)).unwrap();
        assert_eq!(two.lower, Some(rational(1, 2)));
        assert_eq!(two.pir_comparators[0].value, ComparatorValue::Exact(rational(1, 5)));

        assert!(family_bounds(&Family::Cycle(2)).is_err());
    }

    #[test]
    fn lower_never_exceeds_upper_and_beats_comparators() {
        for n in 2..30usize {
            let mut families = vec![Family::Path(n), Family::Star(n), Family::Complete(n)];
            if n >= 3 {
                families.push(Family::Cycle(n));
            }
            if n % 2 == 0 {
                families.push(Family::CompleteBipartite(n / 2, n / 2));
            }
            for f in families {
                let r = family_bounds(&f).unwrap();
                let lower = r.lower.clone().unwrap();
                assert!(lower <= r.upper, "{f}");
                if let Some(cf) = &r.lower_closed_form {
                    assert_ne!(cf.cmp_rational(&lower), Ordering::Greater, "{f}");
                }
                for c in &r.pir_comparators {
                    if let ComparatorValue::Exact(v) = &c.value {
                        let strict = match f {
                            Family::Cycle(n) => n >= 4,
                            Family::Path(n) => n >= 3,
                            _ => false,
                        };
                        if strict {
                            assert!(&lower > v, "{f}");
                        } else {
                            assert!(&lower >= v, "{f}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn graph_bounds_for_union() {
        let mut edges = vec![(1, 2), (2, 3), (3, 4), (4, 1)];
        edges.extend((5..9).map(|v| (v, 9)));
        let g = Graph::new(9, &edges).unwrap();
        let r = graph_bounds(&g).unwrap();
        assert_eq!(r.lower, Some(rational(2, 3)));
        let k4 = graph_bounds(&Family::Complete(4).build().unwrap()).unwrap();
        assert_eq!(k4.lower, Some(rational(2, 5)));
        // triangle with a pendant: neither bipartite nor edge-transitive
        let paw = Graph::new(4, &[(1, 2), (2, 3), (3, 1), (3, 4)]).unwrap();
        assert_eq!(graph_bounds(&paw).unwrap().lower, None);
    }

    proptest! {
        #[test]
        fn weighted_cost_dominates_min_side(d in 1usize..40, ti in 1usize..40, tj in 1usize..40) {
            prop_assume!(ti <= d && tj <= d);
            let lambda = lambda_weight(d, d, ti, tj).unwrap();
            prop_assert!(lambda > Rational::zero() && lambda < Rational::one());
            let (a, b) = (side_cost(d, ti), side_cost(d, tj));
            let mixed = &lambda * &a + (Rational::one() - &lambda) * &b;
            prop_assert!(mixed >= a.clone().min(b));
            prop_assert!(et_lower_bound(d, d).unwrap().rate <= Rational::one());
        }
    }
}

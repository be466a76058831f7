//! Hand-written retrieval tables for C4 (L = 2) and K4 (L = 4), kept verbatim
//! in letter notation (`a` = message 1, subscript = logical position). They are
//! independent of the t-sum builder and serve as reference rows for it.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::render::parse_atom;
use super::{AtomRef, DecodeStep, PlanKind, QueryAtom, SchemeError, SchemePlan, Sign, SymbolRef};
use crate::graph::{Family, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FixtureName {
    C4,
    K4,
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureName::C4 => write!(f, "table-c4"),
            FixtureName::K4 => write!(f, "table-k4"),
        }
    }
}

impl std::str::FromStr for FixtureName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c4" | "table-c4" => Ok(FixtureName::C4),
            "k4" | "table-k4" => Ok(FixtureName::K4),
            other => Err(format!("unknown fixture {other}")),
        }
    }
}

const C4_ROWS: [[&str; 4]; 4] = [
    ["a1+d1", "a2+b1", "b1", "d1"],
    ["a1", "a1+b1", "b2+c1", "c1"],
    ["d1", "b1", "b1+c1", "c2+d1"],
    ["a1+d1", "a1", "c1", "c1+d2"],
];

const K4_ROWS: [[&str; 4]; 6] = [
    ["a1+b1, a2+c1, b2+c2", "a3+d1, a4+e1, d2+e2", "b1, d1", "c1, e1"],
    // c2, not c1: b2+c2 at server 1 needs c2 to cancel
    ["a1+b1, a2+c1, b2+c2", "a1, d1", "b3+d1, b4+f1, d2+f2", "c2, f1"],
    ["a1+b1, a2+c1, b2+c2", "a2, e1", "b2, f1", "c3+e1, c4+f1, e2+f2"],
    ["a1, b1", "a1+d1, a2+e1, d2+e2", "b1+d3, b2+f1, d4+f2", "e2, f2"],
    ["a2, c1", "a1+d1, a2+e1, d2+e2", "d2, f2", "c1+e3, c2+f1, e4+f2"],
    ["b2, c2", "d2, e2", "b1+d1, b2+f1, d2+f2", "c1+e1, c2+f3, e2+f4"],
];

pub fn fixture_graph(name: FixtureName) -> Graph {
    match name {
        FixtureName::C4 => Family::Cycle(4).build(),
        FixtureName::K4 => Family::Complete(4).build(),
    }
    .expect("fixture graphs are valid")
}

fn rows(name: FixtureName) -> (&'static [[&'static str; 4]], usize) {
    match name {
        FixtureName::C4 => (&C4_ROWS, 2),
        FixtureName::K4 => (&K4_ROWS, 4),
    }
}

pub(crate) fn fixture_plan(name: FixtureName, g: &Graph, theta: usize) -> Result<SchemePlan, SchemeError> {
    if *g != fixture_graph(name) {
        return Err(SchemeError::FixtureGraphMismatch(name));
    }
    g.check_message(theta)?;
    let (table, message_len) = rows(name);
    let queries = table[theta - 1]
        .iter()
        .map(|cell| {
            cell.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(parse_atom)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let recipe = peel_recipe(&queries, theta, message_len)?;
    let plan = SchemePlan {
        theta,
        message_len,
        kind: PlanKind::Fixture(name),
        component: None,
        queries,
        recipe,
    };
    plan.validate(g)?;
    Ok(plan)
}

/// Recovers each desired symbol from an atom whose other terms are all
/// available as singletons somewhere in the row.
pub(crate) fn peel_recipe(
    queries: &[Vec<QueryAtom>],
    theta: usize,
    message_len: usize,
) -> Result<Vec<DecodeStep>, SchemeError> {
    let mut singles: HashMap<SymbolRef, AtomRef> = HashMap::new();
    for (s, atoms) in queries.iter().enumerate() {
        for (a, atom) in atoms.iter().enumerate() {
            if let [r] = atom.refs.as_slice() {
                singles.entry(*r).or_insert(AtomRef { server: s + 1, atom: a });
            }
        }
    }
    (1..=message_len)
        .map(|position| {
            let target = SymbolRef::new(theta, position);
            for (s, atoms) in queries.iter().enumerate() {
                for (a, atom) in atoms.iter().enumerate() {
                    if !atom.refs.contains(&target) {
                        continue;
                    }
                    let others: Option<Vec<_>> = atom
                        .refs
                        .iter()
                        .filter(|r| **r != target)
                        .map(|r| singles.get(r).map(|&ar| (Sign::Minus, ar)))
                        .collect();
                    if let Some(mut others) = others {
                        let mut terms = vec![(Sign::Plus, AtomRef { server: s + 1, atom: a })];
                        terms.append(&mut others);
                        return Ok(DecodeStep { position, terms });
                    }
                }
            }
            Err(SchemeError::Undecodable { theta, position })
        })
        .collect()
}

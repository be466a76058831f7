//! Vertex-cover download for bipartite graphs: pick the part with the smaller
//! sum of squared degrees and fetch every message of the desired message's
//! endpoint in that part, in full.

use super::{AtomRef, DecodeStep, PlanKind, QueryAtom, SchemeError, SchemePlan, Sign};
use crate::graph::{Bipartition, Graph};

/// `(m*, Σ deg² over V_m*)`; ties go to part 1.
pub fn min_square_part(g: &Graph, partition: &Bipartition) -> (usize, u64) {
    let weight = |vs: &[usize]| vs.iter().map(|&v| (g.degree(v) as u64).pow(2)).sum::<u64>();
    let (w1, w2) = (weight(&partition.v1), weight(&partition.v2));
    if w2 < w1 {
        (2, w2)
    } else {
        (1, w1)
    }
}

pub fn build_bipartite_plan(
    g: &Graph,
    partition: &Bipartition,
    theta: usize,
    message_len: usize,
) -> Result<SchemePlan, SchemeError> {
    g.check_message(theta)?;
    if !partition.is_valid_for(g) {
        return Err(SchemeError::NotBipartite);
    }
    if message_len == 0 {
        return Err(SchemeError::PositionOutOfRange {
            message: theta,
            position: 1,
            len: 0,
        });
    }
    let (part, _) = min_square_part(g, partition);
    let (u, v) = g.endpoints(theta);
    let endpoint = match (partition.part_of(u) == Some(part), partition.part_of(v) == Some(part)) {
        (true, false) => u,
        (false, true) => v,
        _ => return Err(SchemeError::EndpointAmbiguity { theta }),
    };

    let mut queries = vec![Vec::new(); g.num_servers()];
    let mut recipe = Vec::new();
    let atoms = &mut queries[endpoint - 1];
    for &l in g.index_set(endpoint) {
        for p in 1..=message_len {
            if l == theta {
                recipe.push(DecodeStep {
                    position: p,
                    terms: vec![(
                        Sign::Plus,
                        AtomRef {
                            server: endpoint,
                            atom: atoms.len(),
                        },
                    )],
                });
            }
            atoms.push(QueryAtom::singleton(l, p));
        }
    }

    Ok(SchemePlan {
        theta,
        message_len,
        kind: PlanKind::Bipartite { endpoint, part },
        component: None,
        queries,
        recipe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn star_queries_only_the_leaf() {
        let g = Family::Star(6).build().unwrap();
        let part = g.bipartition().unwrap();
        for theta in g.messages() {
            let plan = build_bipartite_plan(&g, &part, theta, 3).unwrap();
            plan.validate(&g).unwrap();
            assert_eq!(plan.contacted(), vec![theta]);
            assert_eq!(plan.download_cost(), 3);
        }
    }

    #[test]
    fn p5_uses_odd_vertices() {
        let g = Family::Path(5).build().unwrap();
        let part = g.bipartition().unwrap();
        assert_eq!(min_square_part(&g, &part), (1, 6));
        let plan = build_bipartite_plan(&g, &part, 2, 1).unwrap();
        assert_eq!(plan.kind, PlanKind::Bipartite { endpoint: 3, part: 1 });
        assert_eq!(plan.server_atoms(3).len(), 2);
        assert_eq!(plan.download_cost(), 2);
    }

    #[test]
    fn tie_goes_to_part_one() {
        let g = Family::CompleteBipartite(2, 2).build().unwrap();
        let part = g.bipartition().unwrap();
        assert_eq!(part.v1, vec![1, 2]);
        assert_eq!(min_square_part(&g, &part), (1, 8));
        for theta in g.messages() {
            let plan = build_bipartite_plan(&g, &part, theta, 1).unwrap();
            let PlanKind::Bipartite { endpoint, part } = plan.kind else { unreachable!() };
            assert_eq!(part, 1);
            assert!(endpoint <= 2);
            assert_eq!(plan.download_cost(), 2);
        }
    }

    #[test]
    fn rejects_invalid_partitions() {
        let g = Family::Path(3).build().unwrap();
        let bad = Bipartition {
            v1: vec![1, 2],
            v2: vec![3],
        };
        assert_eq!(build_bipartite_plan(&g, &bad, 1, 1), Err(SchemeError::NotBipartite));
        let missing = Bipartition {
            v1: vec![1, 3],
            v2: vec![],
        };
        assert_eq!(build_bipartite_plan(&g, &missing, 1, 1), Err(SchemeError::NotBipartite));
    }
}

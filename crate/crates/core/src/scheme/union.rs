use super::{AtomRef, DecodeStep, PlanKind, QueryAtom, SchemeConfig, SchemeError, SchemePlan, SymbolRef};
use crate::graph::Graph;

/// Runs the plan of the component holding `theta` and relabels it into global
/// server and message indices. Servers elsewhere receive nothing.
pub fn build_union_plan(g: &Graph, configs: &[SchemeConfig], theta: usize) -> Result<SchemePlan, SchemeError> {
    g.check_message(theta)?;
    let components: Vec<_> = g
        .components()
        .into_iter()
        .filter(|c| c.graph.num_messages() > 0)
        .collect();
    if configs.len() != components.len() {
        return Err(SchemeError::MissingComponentConfig {
            components: components.len(),
            configs: configs.len(),
        });
    }
    let (idx, comp) = components
        .iter()
        .enumerate()
        .find(|(_, c)| c.messages.contains(&theta))
        .expect("every message lies in some component");
    let local_theta = comp.messages.iter().position(|&k| k == theta).unwrap() + 1;
    let local = configs[idx].plan(&comp.graph, local_theta)?;

    let server = |s: usize| comp.vertices[s - 1];
    let message = |m: usize| comp.messages[m - 1];

    let mut queries = vec![Vec::new(); g.num_servers()];
    for (s, atoms) in local.queries.iter().enumerate() {
        queries[server(s + 1) - 1] = atoms
            .iter()
            .map(|a| {
                QueryAtom::new(
                    a.refs
                        .iter()
                        .map(|r| SymbolRef::new(message(r.message), r.position))
                        .collect(),
                )
            })
            .collect();
    }
    let recipe = local
        .recipe
        .iter()
        .map(|step| DecodeStep {
            position: step.position,
            terms: step
                .terms
                .iter()
                .map(|&(sign, r)| {
                    (
                        sign,
                        AtomRef {
                            server: server(r.server),
                            atom: r.atom,
                        },
                    )
                })
                .collect(),
        })
        .collect();
    let kind = match local.kind {
        PlanKind::EdgeTransitive { role_i, role_j, t_i, t_j } => PlanKind::EdgeTransitive {
            role_i: server(role_i),
            role_j: server(role_j),
            t_i,
            t_j,
        },
        PlanKind::Bipartite { endpoint, part } => PlanKind::Bipartite {
            endpoint: server(endpoint),
            part,
        },
        PlanKind::Fixture(name) => PlanKind::Fixture(name),
    };

    Ok(SchemePlan {
        theta,
        message_len: local.message_len,
        kind,
        component: Some(idx),
        queries,
        recipe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn dispatches_to_second_copy() {
        let g = Family::DisjointCopies(Box::new(Family::Cycle(4)), 2).build().unwrap();
        let cfg = vec![SchemeConfig::edge_transitive(2); 2];
        let plan = build_union_plan(&g, &cfg, 5).unwrap();
        plan.validate(&g).unwrap();
        assert_eq!(plan.component, Some(1));
        assert!(plan.contacted().iter().all(|&n| n > 4));
        let single = SchemeConfig::edge_transitive(2)
            .plan(&Family::Cycle(4).build().unwrap(), 1)
            .unwrap();
        assert_eq!(plan.download_cost(), single.download_cost());
    }

    #[test]
    fn single_component_is_identity() {
        let g = Family::Complete(4).build().unwrap();
        let base = SchemeConfig::edge_transitive(2);
        for theta in g.messages() {
            let mut via_union = build_union_plan(&g, std::slice::from_ref(&base), theta).unwrap();
            assert_eq!(via_union.component, Some(0));
            via_union.component = None;
            assert_eq!(via_union, base.plan(&g, theta).unwrap());
        }
    }

    #[test]
    fn mixed_union_remaps_star_indices() {
        // C4 on 1..4, S5 on 5..9 with centre 9
        let mut edges = vec![(1, 2), (2, 3), (3, 4), (4, 1)];
        edges.extend((5..9).map(|v| (v, 9)));
        let g = Graph::new(9, &edges).unwrap();
        let cfg = vec![SchemeConfig::edge_transitive(2), SchemeConfig::bipartite()];
        let plan = build_union_plan(&g, &cfg, 6).unwrap();
        plan.validate(&g).unwrap();
        assert_eq!(plan.contacted(), vec![6]);
        assert_eq!(plan.server_atoms(6)[0].refs, vec![SymbolRef::new(6, 1)]);
        assert_eq!(plan.kind, PlanKind::Bipartite { endpoint: 6, part: 1 });
        assert_eq!(
            build_union_plan(&g, &cfg[..1], 1),
            Err(SchemeError::MissingComponentConfig {
                components: 2,
                configs: 1
            })
        );
    }
}

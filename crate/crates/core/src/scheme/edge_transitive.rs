//! t-sum construction.
//!
//! Server `i` receives every `t_i`-sum over its stored messages, server `j`
//! every `t_j`-sum over its own, with the desired message shifted past the
//! first `C(deg_i - 1, t_i - 1)` positions at `j`. Undesired symbols that
//! share a sum with the desired message are fetched in the clear from the
//! other server storing them and subtracted.

use super::subsets::{binomial_usize, check_t, gamma_table, lex_subsets};
use super::{AtomRef, DecodeStep, PlanKind, QueryAtom, RoleRule, SchemeError, SchemePlan, Sign, SymbolRef};
use crate::graph::Graph;

pub fn build_et_plan(
    g: &Graph,
    theta: usize,
    t_i: usize,
    t_j: usize,
    role_rule: &RoleRule,
) -> Result<SchemePlan, SchemeError> {
    g.check_message(theta)?;
    let (i, j) = role_rule.resolve(g, theta, t_i, t_j)?;
    check_t(t_i, g.degree(i))?;
    check_t(t_j, g.degree(j))?;

    let offset = binomial_usize(g.degree(i) - 1, t_i - 1)?;
    let message_len = offset + binomial_usize(g.degree(j) - 1, t_j - 1)?;

    let mut queries: Vec<Vec<QueryAtom>> = vec![Vec::new(); g.num_servers()];
    let mut recipe = Vec::new();

    for (server, t, shift) in [(i, t_i, 0), (j, t_j, offset)] {
        let subsets = lex_subsets(g.index_set(server), t)?;
        let gammas = gamma_table(&subsets);
        for (subset, counts) in subsets.iter().zip(&gammas) {
            let refs = subset
                .iter()
                .zip(counts)
                .map(|(&l, &c)| SymbolRef::new(l, if l == theta { shift + c } else { c }))
                .collect();
            let sum_idx = queries[server - 1].len();
            queries[server - 1].push(QueryAtom::new(refs));

            let Some(pos) = subset.iter().position(|&l| l == theta) else {
                continue;
            };
            let mut terms = vec![(
                Sign::Plus,
                AtomRef {
                    server,
                    atom: sum_idx,
                },
            )];
            for (&l, &c) in subset.iter().zip(counts) {
                if l == theta {
                    continue;
                }
                let holder = g.other_endpoint(l, server);
                terms.push((
                    Sign::Minus,
                    AtomRef {
                        server: holder,
                        atom: queries[holder - 1].len(),
                    },
                ));
                queries[holder - 1].push(QueryAtom::singleton(l, c));
            }
            recipe.push(DecodeStep {
                position: shift + counts[pos],
                terms,
            });
        }
    }

    let plan = SchemePlan {
        theta,
        message_len,
        kind: PlanKind::EdgeTransitive {
            role_i: i,
            role_j: j,
            t_i,
            t_j,
        },
        component: None,
        queries,
        recipe,
    };
    debug_assert!(plan.validate(g).is_ok());
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::scheme::et_download_cost;

    fn atoms_as_strings(plan: &SchemePlan, n: usize) -> Vec<String> {
        plan.server_atoms(n)
            .iter()
            .map(|a| {
                a.refs
                    .iter()
                    .map(|r| format!("{}.{}", r.message, r.position))
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect()
    }

    #[test]
    fn c4_first_row() {
        let g = Family::Cycle(4).build().unwrap();
        let plan = build_et_plan(&g, 1, 2, 2, &RoleRule::Default).unwrap();
        assert_eq!(plan.message_len, 2);
        assert_eq!(atoms_as_strings(&plan, 1), vec!["1.1+4.1"]);
        assert_eq!(atoms_as_strings(&plan, 2), vec!["1.2+2.1"]);
        assert_eq!(atoms_as_strings(&plan, 3), vec!["2.1"]);
        assert_eq!(atoms_as_strings(&plan, 4), vec!["4.1"]);
        assert_eq!(plan.download_cost(), 4);
    }

    #[test]
    fn k4_first_row_has_ten_atoms() {
        let g = Family::Complete(4).build().unwrap();
        let plan = build_et_plan(&g, 1, 2, 2, &RoleRule::Default).unwrap();
        assert_eq!(plan.downloads(), vec![3, 3, 2, 2]);
        assert_eq!(plan.message_len, 4);
        assert_eq!(atoms_as_strings(&plan, 2), vec!["1.3+4.1", "1.4+5.1", "4.2+5.2"]);
    }

    #[test]
    fn t1_has_no_interference() {
        for g in [
            Family::Cycle(6).build().unwrap(),
            Family::Complete(5).build().unwrap(),
            Family::Star(5).build().unwrap(),
        ] {
            for theta in g.messages() {
                let plan = build_et_plan(&g, theta, 1, 1, &RoleRule::Default).unwrap();
                let (i, j) = g.endpoints(theta);
                for n in g.servers() {
                    let atoms = plan.server_atoms(n);
                    if n == i || n == j {
                        assert_eq!(atoms.len(), g.degree(n));
                        assert!(atoms.iter().all(|a| a.len() == 1));
                    } else {
                        assert!(atoms.is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn atom_count_matches_cost_and_offsets_hold() {
        let g = Family::Complete(6).build().unwrap();
        for t in 1..=5 {
            for theta in g.messages() {
                let plan = build_et_plan(&g, theta, t, t, &RoleRule::Default).unwrap();
                plan.validate(&g).unwrap();
                assert_eq!(plan.download_cost(), et_download_cost(5, 5, t, t).unwrap());
                let PlanKind::EdgeTransitive { role_j, .. } = plan.kind else {
                    unreachable!()
                };
                let c = binomial_usize(4, t - 1).unwrap();
                for n in g.servers() {
                    for r in plan.server_atoms(n).iter().flat_map(|a| &a.refs) {
                        if n == role_j && r.message == theta {
                            assert!(r.position > c && r.position <= plan.message_len);
                        } else {
                            assert!(r.position >= 1 && r.position <= c);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn star_with_unequal_t() {
        let g = Family::Star(5).build().unwrap();
        let plan = build_et_plan(&g, 2, 1, 2, &RoleRule::Default).unwrap();
        // leaf 2 is role i, centre 5 role j
        assert_eq!(
            plan.kind,
            PlanKind::EdgeTransitive {
                role_i: 2,
                role_j: 5,
                t_i: 1,
                t_j: 2
            }
        );
        assert_eq!(plan.message_len, 1 + 3);
        assert!(matches!(
            build_et_plan(&g, 2, 2, 2, &RoleRule::Default),
            Err(SchemeError::TOutOfRange { t: 2, deg: 1 })
        ));
    }
}

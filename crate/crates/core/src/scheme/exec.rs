//! Running a plan: private permutations, physical queries, server answers and
//! decoding.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{QueryAtom, SchemeError, SchemePlan, Sign};
use crate::field::{Field, FieldElem};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub symbols: Vec<FieldElem>,
}

impl Message {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn values(&self) -> Vec<u64> {
        self.symbols.iter().map(FieldElem::value).collect()
    }
}

/// All messages of a system, `messages[k - 1]` being message `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storage {
    pub field: Field,
    pub messages: Vec<Message>,
}

impl Storage {
    /// Independent uniform symbols; `lens[k - 1]` is the length of message `k`.
    pub fn random<R: Rng + ?Sized>(field: Field, lens: &[usize], rng: &mut R) -> Self {
        let messages = lens
            .iter()
            .map(|&len| Message {
                symbols: (0..len).map(|_| field.random(rng)).collect(),
            })
            .collect();
        Self { field, messages }
    }

    pub fn message(&self, k: usize) -> &Message {
        &self.messages[k - 1]
    }

    /// What server `n` holds.
    pub fn view<'a>(&'a self, g: &Graph, n: usize) -> ServerView<'a> {
        ServerView {
            server: n,
            field: self.field,
            messages: g
                .index_set(n)
                .iter()
                .map(|&k| (k, &self.messages[k - 1]))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerView<'a> {
    pub server: usize,
    pub field: Field,
    pub messages: BTreeMap<usize, &'a Message>,
}

/// The user's private per-message permutations: logical position `m` of
/// message `k` is physical position `perms[k][m - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Randomness {
    seed: Option<u64>,
    perms: BTreeMap<usize, Vec<usize>>,
}

impl Randomness {
    /// Uniform independent permutations for each `(message, length)`.
    pub fn sample<R: Rng + ?Sized>(
        lens: impl IntoIterator<Item = (usize, usize)>,
        seed: Option<u64>,
        rng: &mut R,
    ) -> Self {
        let perms = lens
            .into_iter()
            .map(|(k, len)| {
                let mut p: Vec<usize> = (1..=len).collect();
                p.shuffle(rng);
                (k, p)
            })
            .collect();
        Self { seed, perms }
    }

    pub fn identity(lens: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            seed: None,
            perms: lens.into_iter().map(|(k, len)| (k, (1..=len).collect())).collect(),
        }
    }

    /// Permutations are given as 1-based images; each must be a bijection.
    pub fn from_permutations(perms: BTreeMap<usize, Vec<usize>>) -> Option<Self> {
        for p in perms.values() {
            let mut seen = vec![false; p.len()];
            for &x in p {
                if x == 0 || x > p.len() || std::mem::replace(&mut seen[x - 1], true) {
                    return None;
                }
            }
        }
        Some(Self { seed: None, perms })
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn permutation(&self, message: usize) -> Option<&[usize]> {
        self.perms.get(&message).map(Vec::as_slice)
    }

    pub fn physical(&self, message: usize, logical: usize) -> Option<usize> {
        self.perms.get(&message)?.get(logical.checked_sub(1)?).copied()
    }
}

/// What a server actually receives: physical `(message, position)` pairs per
/// atom, each atom sorted and the atom list sorted, so the order of atoms
/// carries no information.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Query {
    pub atoms: Vec<Vec<(usize, usize)>>,
}

impl Query {
    /// Translates logical atoms through the permutations. Also returns, for
    /// every logical atom, its index in the sorted physical query.
    pub fn translate(atoms: &[QueryAtom], randomness: &Randomness) -> Result<(Query, Vec<usize>), SchemeError> {
        let mut physical = atoms
            .iter()
            .enumerate()
            .map(|(idx, atom)| {
                let mut refs = atom
                    .refs
                    .iter()
                    .map(|r| {
                        randomness
                            .physical(r.message, r.position)
                            .map(|p| (r.message, p))
                            .ok_or(SchemeError::PositionOutOfRange {
                                message: r.message,
                                position: r.position,
                                len: randomness.permutation(r.message).map_or(0, <[usize]>::len),
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                refs.sort_unstable();
                Ok((refs, idx))
            })
            .collect::<Result<Vec<_>, SchemeError>>()?;
        physical.sort();
        let mut order = vec![0; atoms.len()];
        for (sorted_idx, (_, logical_idx)) in physical.iter().enumerate() {
            order[*logical_idx] = sorted_idx;
        }
        Ok((
            Query {
                atoms: physical.into_iter().map(|(refs, _)| refs).collect(),
            },
            order,
        ))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

pub type Answer = Vec<FieldElem>;

/// One field element per atom: the sum of the referenced stored symbols.
pub fn answer(query: &Query, view: &ServerView<'_>) -> Result<Answer, SchemeError> {
    query
        .atoms
        .iter()
        .map(|atom| {
            atom.iter().try_fold(view.field.zero(), |acc, &(message, position)| {
                let stored = view.messages.get(&message).ok_or(SchemeError::UnresolvableRef {
                    server: view.server,
                    message,
                })?;
                let symbol = position
                    .checked_sub(1)
                    .and_then(|p| stored.symbols.get(p))
                    .ok_or(SchemeError::PositionOutOfRange {
                        message,
                        position,
                        len: stored.len(),
                    })?;
                Ok(acc.add(symbol)?)
            })
        })
        .collect()
}

/// Recovers the desired message from the answers (indexed by server) by
/// following the plan's recipe and undoing the desired message's permutation.
pub fn decode(
    plan: &SchemePlan,
    answers: &[Answer],
    randomness: &Randomness,
    field: Field,
) -> Result<Message, SchemeError> {
    if answers.len() != plan.queries.len() {
        return Err(SchemeError::IncompleteAnswers {
            server: answers.len().min(plan.queries.len()) + 1,
        });
    }
    let mut orders = Vec::with_capacity(plan.queries.len());
    for (s, atoms) in plan.queries.iter().enumerate() {
        if answers[s].len() != atoms.len() {
            return Err(SchemeError::IncompleteAnswers { server: s + 1 });
        }
        orders.push(Query::translate(atoms, randomness)?.1);
    }

    let mut out: Vec<Option<FieldElem>> = vec![None; plan.message_len];
    for step in &plan.recipe {
        let mut value = field.zero();
        for &(sign, r) in &step.terms {
            let idx = *orders
                .get(r.server.wrapping_sub(1))
                .and_then(|o| o.get(r.atom))
                .ok_or(SchemeError::IncompleteAnswers { server: r.server })?;
            let a = answers[r.server - 1][idx];
            value = match sign {
                Sign::Plus => value.add(&a)?,
                Sign::Minus => value.sub(&a)?,
            };
        }
        let slot = randomness
            .physical(plan.theta, step.position)
            .ok_or(SchemeError::Undecodable {
                theta: plan.theta,
                position: step.position,
            })?;
        out[slot - 1] = Some(value);
    }
    let symbols = out
        .into_iter()
        .enumerate()
        .map(|(p, v)| {
            v.ok_or(SchemeError::Undecodable {
                theta: plan.theta,
                position: p + 1,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Message { symbols })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ServerExchange {
    pub server: usize,
    pub atoms: Vec<Vec<(usize, usize)>>,
    pub answers: Vec<u64>,
}

/// Record of one retrieval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub theta: usize,
    pub seed: u64,
    pub q: u64,
    pub per_server: Vec<ServerExchange>,
    pub decoded_ok: bool,
    #[serde(rename = "D_k")]
    pub download: usize,
    #[serde(skip)]
    pub decoded: Option<Message>,
}

impl Transcript {
    /// Sends the translated queries, collects answers and decodes.
    pub fn execute(
        plan: &SchemePlan,
        g: &Graph,
        storage: &Storage,
        randomness: &Randomness,
    ) -> Result<Self, SchemeError> {
        let mut per_server = Vec::with_capacity(g.num_servers());
        let mut answers = Vec::with_capacity(g.num_servers());
        for n in g.servers() {
            let (query, _) = Query::translate(plan.server_atoms(n), randomness)?;
            let ans = answer(&query, &storage.view(g, n))?;
            per_server.push(ServerExchange {
                server: n,
                atoms: query.atoms,
                answers: ans.iter().map(FieldElem::value).collect(),
            });
            answers.push(ans);
        }
        let decoded = decode(plan, &answers, randomness, storage.field).ok();
        let decoded_ok = decoded.as_ref() == Some(storage.message(plan.theta));
        Ok(Self {
            theta: plan.theta,
            seed: randomness.seed().unwrap_or(0),
            q: storage.field.modulus(),
            download: answers.iter().map(Vec::len).sum(),
            per_server,
            decoded_ok,
            decoded,
        })
    }

    pub fn downloads(&self) -> Vec<usize> {
        self.per_server.iter().map(|s| s.answers.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::scheme::SchemeConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c4_storage(field: Field) -> Storage {
        // a = (1, 2), b = (3, 4), c = (5, 6), d = (7, 8) reduced mod q
        let messages = (0..4)
            .map(|k| Message {
                symbols: vec![field.reduce(2 * k + 1), field.reduce(2 * k + 2)],
            })
            .collect();
        Storage { field, messages }
    }

    #[test]
    fn answers_sum_referenced_symbols() {
        let g = Family::Cycle(4).build().unwrap();
        let field = Field::new(11).unwrap();
        let storage = c4_storage(field);
        let q = Query {
            atoms: vec![vec![(1, 1), (4, 1)]],
        };
        let a = answer(&q, &storage.view(&g, 1)).unwrap();
        assert_eq!(a, vec![field.reduce(1 + 7)]);
        assert!(answer(&Query { atoms: vec![] }, &storage.view(&g, 1)).unwrap().is_empty());
        let bad = Query {
            atoms: vec![vec![(3, 1)]],
        };
        assert_eq!(
            answer(&bad, &storage.view(&g, 1)),
            Err(SchemeError::UnresolvableRef { server: 1, message: 3 })
        );
        let far = Query {
            atoms: vec![vec![(1, 3)]],
        };
        assert!(matches!(
            answer(&far, &storage.view(&g, 1)),
            Err(SchemeError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn identity_decode_of_first_c4_row() {
        let g = Family::Cycle(4).build().unwrap();
        let field = Field::new(11).unwrap();
        let storage = c4_storage(field);
        let plan = SchemeConfig::edge_transitive(2).plan(&g, 1).unwrap();
        let rnd = Randomness::identity((1..=4).map(|k| (k, 2)));
        let t = Transcript::execute(&plan, &g, &storage, &rnd).unwrap();
        assert!(t.decoded_ok);
        assert_eq!(t.download, 4);
        assert_eq!(t.downloads(), vec![1, 1, 1, 1]);
        // server 1 sees a1 + d1 = 1 + 7
        assert_eq!(t.per_server[0].answers, vec![8]);
    }

    #[test]
    fn incomplete_answers_are_reported() {
        let g = Family::Cycle(4).build().unwrap();
        let plan = SchemeConfig::edge_transitive(2).plan(&g, 1).unwrap();
        let field = Field::new(2).unwrap();
        let rnd = Randomness::identity((1..=4).map(|k| (k, 2)));
        let answers = vec![vec![field.zero()], vec![], vec![field.zero()], vec![field.zero()]];
        assert_eq!(
            decode(&plan, &answers, &rnd, field),
            Err(SchemeError::IncompleteAnswers { server: 2 })
        );
        assert!(decode(&plan, &answers[..2], &rnd, field).is_err());
    }

    #[test]
    fn translation_sorts_and_tracks_order() {
        let atoms = vec![QueryAtom::singleton(2, 1), QueryAtom::singleton(1, 2)];
        let perms: BTreeMap<usize, Vec<usize>> = [(1, vec![2, 1]), (2, vec![2, 1])].into_iter().collect();
        let rnd = Randomness::from_permutations(perms).unwrap();
        let (q, order) = Query::translate(&atoms, &rnd).unwrap();
        assert_eq!(q.atoms, vec![vec![(1, 1)], vec![(2, 2)]]);
        assert_eq!(order, vec![1, 0]);
        assert!(Randomness::from_permutations([(1, vec![1, 1])].into_iter().collect()).is_none());
    }

    #[test]
    fn sampled_permutations_are_bijections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rnd = Randomness::sample((1..=5).map(|k| (k, k + 2)), Some(3), &mut rng);
        for k in 1..=5 {
            let mut p = rnd.permutation(k).unwrap().to_vec();
            p.sort_unstable();
            assert_eq!(p, (1..=k + 2).collect::<Vec<_>>());
        }
        assert_eq!(rnd.seed(), Some(3));
    }
}

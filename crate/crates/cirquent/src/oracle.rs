//! Independent brute-force validity search.
//!
//! Validity of a closed cirquent (winnability under every interpretation) is
//! decided here by finite AND-OR game search: resolutions of the choice
//! clusters are explored over a bounded constant domain, and a position
//! counts as winning when its residue is a tautology and every environment
//! reply leads back to a winning position. Tautology leaves encode
//! uniformity over interpretations: the machine cannot observe the
//! interpretation, so it must win on logical shape alone.
//!
//! The search is a desk-scale referee for the decision procedure, not a
//! second decision procedure: inputs beyond the configured cluster and
//! domain limits are rejected.

use crate::semantics::{is_tautology, residue_with};
use crate::syntax::{Cirquent, ClusterKind};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// Size caps for the game search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum number of distinct clusters in the target.
    pub max_clusters: usize,
    /// Maximum domain size (occurring constants plus fresh padding).
    pub max_domain: usize,
}

impl Default for OracleLimits {
    fn default() -> OracleLimits {
        OracleLimits {
            max_clusters: 6,
            max_domain: 6,
        }
    }
}

/// Why the oracle refused to run.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    /// The target is not closed.
    #[error("the oracle requires a closed cirquent")]
    NotClosed,
    /// Too many clusters.
    #[error("target has {count} clusters, limit is {limit}")]
    TooManyClusters {
        /// Clusters in the target.
        count: usize,
        /// Configured cap.
        limit: usize,
    },
    /// The constant domain would be too large.
    #[error("search domain has {size} constants, limit is {limit}")]
    DomainTooLarge {
        /// Required domain size.
        size: usize,
        /// Configured cap.
        limit: usize,
    },
}

/// A search position: a fixed closed target, the resolutions made so far,
/// and the constant domain.
#[derive(Clone, Debug)]
pub struct GameState {
    /// The cirquent whose validity is being searched.
    pub target: Cirquent,
    /// Chosen value per cluster name: branch 0/1 for `&[c]`/`|[c]`, a domain
    /// constant for `all[c]`/`ex[c]`.
    pub resolution: BTreeMap<String, u64>,
    /// Constants in play: those occurring in the target, one fresh per
    /// `all[_]` cluster, and one extra fresh, ascending.
    pub domain: Vec<u64>,
}

/// The domain for `target`: occurring constants, one fresh constant per
/// chall cluster, and one extra fresh constant.
fn search_domain(target: &Cirquent) -> Vec<u64> {
    let occurring: BTreeSet<u64> = target.constants();
    let chall_clusters = target
        .clusters_of()
        .values()
        .filter(|(kind, _)| *kind == ClusterKind::Chall)
        .count();
    let mut domain = occurring;
    let mut candidate = 0u64;
    for _ in 0..chall_clusters + 1 {
        while domain.contains(&candidate) {
            candidate += 1;
        }
        domain.insert(candidate);
        candidate += 1;
    }
    domain.into_iter().collect()
}

impl GameState {
    /// Builds the initial (empty-resolution) state, enforcing the limits.
    pub fn new(target: Cirquent, limits: &OracleLimits) -> Result<GameState, OracleError> {
        if !target.is_closed() {
            return Err(OracleError::NotClosed);
        }
        let cluster_count = target.clusters_of().len();
        if cluster_count > limits.max_clusters {
            return Err(OracleError::TooManyClusters {
                count: cluster_count,
                limit: limits.max_clusters,
            });
        }
        let domain = search_domain(&target);
        if domain.len() > limits.max_domain {
            return Err(OracleError::DomainTooLarge {
                size: domain.len(),
                limit: limits.max_domain,
            });
        }
        Ok(GameState {
            target,
            resolution: BTreeMap::new(),
            domain,
        })
    }

    /// The choice-free cirquent this position evaluates to: resolved
    /// clusters are replaced by their resolvents; unresolved environment
    /// clusters collapse to `T`, unresolved machine clusters to `F`.
    pub fn eval_state(&self) -> Cirquent {
        residue_with(&self.target, &|_kind, name| {
            self.resolution.get(name).copied()
        })
    }
}

/// The fixed data of one query plus its memo table.
struct Search {
    target: Cirquent,
    /// Cluster name and kind, in first-occurrence order.
    clusters: Vec<(String, ClusterKind)>,
    domain: Vec<u64>,
    memo: HashMap<BTreeMap<String, u64>, bool>,
}

impl Search {
    fn new(state: &GameState) -> Search {
        let mut clusters: Vec<(String, ClusterKind)> = Vec::new();
        let by_name = state.target.clusters_of();
        // clusters_of is keyed by name; order by first occurrence for a
        // deterministic, smallest-first enumeration.
        let mut named: Vec<(&String, &(ClusterKind, Vec<crate::syntax::Path>))> =
            by_name.iter().collect();
        named.sort_by_key(|(_, (_, paths))| paths[0].clone());
        for (name, (kind, _)) in named {
            clusters.push((name.clone(), *kind));
        }
        Search {
            target: state.target.clone(),
            clusters,
            domain: state.domain.clone(),
            memo: HashMap::new(),
        }
    }

    fn values(&self, kind: ClusterKind) -> Vec<u64> {
        match kind {
            ClusterKind::Chand | ClusterKind::Chor => vec![0, 1],
            ClusterKind::Chall | ClusterKind::Chexists => self.domain.clone(),
        }
    }

    fn residue_is_tautology(&self, res: &BTreeMap<String, u64>) -> bool {
        let residue = residue_with(&self.target, &|_kind, name| res.get(name).copied());
        is_tautology(&residue)
    }

    /// Winning position: either the residue is already a tautology and every
    /// single environment move leads to a winning position, or some single
    /// machine move does.
    fn winnable(&mut self, res: &BTreeMap<String, u64>) -> bool {
        if let Some(&v) = self.memo.get(res) {
            return v;
        }
        let mut result = self.holds_and_survives(res);
        if !result {
            'machine: for (name, kind) in self.machine_unresolved(res) {
                for v in self.values(kind) {
                    let mut next = res.clone();
                    next.insert(name.clone(), v);
                    if self.winnable(&next) {
                        result = true;
                        break 'machine;
                    }
                }
            }
        }
        self.memo.insert(res.clone(), result);
        result
    }

    /// The pass-forever leaf condition: tautological residue, robust against
    /// every environment move.
    fn holds_and_survives(&mut self, res: &BTreeMap<String, u64>) -> bool {
        if !self.residue_is_tautology(res) {
            return false;
        }
        for (name, kind) in self.env_unresolved(res) {
            for v in self.values(kind) {
                let mut next = res.clone();
                next.insert(name.clone(), v);
                if !self.winnable(&next) {
                    return false;
                }
            }
        }
        true
    }

    fn machine_unresolved(&self, res: &BTreeMap<String, u64>) -> Vec<(String, ClusterKind)> {
        self.clusters
            .iter()
            .filter(|(name, kind)| kind.is_machine() && !res.contains_key(name))
            .cloned()
            .collect()
    }

    fn env_unresolved(&self, res: &BTreeMap<String, u64>) -> Vec<(String, ClusterKind)> {
        self.clusters
            .iter()
            .filter(|(name, kind)| !kind.is_machine() && !res.contains_key(name))
            .cloned()
            .collect()
    }

    /// The literal batch formulation: some machine *extension* (zero or more
    /// moves at once) reaches a tautological residue all of whose
    /// environment continuations are again winnable. Not memoized; used to
    /// cross-check [`Search::winnable`].
    fn winnable_batch(&self, res: &BTreeMap<String, u64>) -> bool {
        let machine = self.machine_unresolved(res);
        let mut extension_values: Vec<Option<u64>> = vec![None; machine.len()];
        self.batch_extensions(res, &machine, &mut extension_values, 0)
    }

    fn batch_extensions(
        &self,
        res: &BTreeMap<String, u64>,
        machine: &[(String, ClusterKind)],
        chosen: &mut Vec<Option<u64>>,
        i: usize,
    ) -> bool {
        if i == machine.len() {
            let mut extended = res.clone();
            for (slot, (name, _)) in chosen.iter().zip(machine) {
                if let Some(v) = slot {
                    extended.insert(name.clone(), *v);
                }
            }
            if !self.residue_is_tautology(&extended) {
                return false;
            }
            return self.env_unresolved(&extended).iter().all(|(name, kind)| {
                self.values(*kind).into_iter().all(|v| {
                    let mut next = extended.clone();
                    next.insert(name.clone(), v);
                    self.winnable_batch(&next)
                })
            });
        }
        // Leave cluster i unresolved ...
        chosen[i] = None;
        if self.batch_extensions(res, machine, chosen, i + 1) {
            return true;
        }
        // ... or resolve it to each possible value.
        for v in self.values(machine[i].1) {
            chosen[i] = Some(v);
            if self.batch_extensions(res, machine, chosen, i + 1) {
                return true;
            }
        }
        chosen[i] = None;
        false
    }
}

/// Validity by game search under the default limits.
pub fn oracle_valid(e: &Cirquent) -> Result<bool, OracleError> {
    oracle_valid_with(e, &OracleLimits::default())
}

/// Validity by game search under explicit limits.
pub fn oracle_valid_with(e: &Cirquent, limits: &OracleLimits) -> Result<bool, OracleError> {
    let state = GameState::new(e.clone(), limits)?;
    let mut search = Search::new(&state);
    Ok(search.winnable(&state.resolution))
}

/// Validity with `extra` additional fresh constants padded onto the domain
/// (still subject to `limits.max_domain`). Supports the saturation check:
/// enlarging the domain must not flip the verdict.
pub fn oracle_valid_padded(
    e: &Cirquent,
    limits: &OracleLimits,
    extra: usize,
) -> Result<bool, OracleError> {
    let mut state = GameState::new(e.clone(), limits)?;
    let mut candidate = 0u64;
    let mut present: BTreeSet<u64> = state.domain.iter().copied().collect();
    for _ in 0..extra {
        while present.contains(&candidate) {
            candidate += 1;
        }
        present.insert(candidate);
    }
    state.domain = present.into_iter().collect();
    if state.domain.len() > limits.max_domain {
        return Err(OracleError::DomainTooLarge {
            size: state.domain.len(),
            limit: limits.max_domain,
        });
    }
    let mut search = Search::new(&state);
    search.domain = state.domain.clone();
    Ok(search.winnable(&state.resolution))
}

/// Validity by the non-memoized batch-extension search. Exponentially slower
/// than [`oracle_valid_with`]; exists to cross-check it.
pub fn oracle_valid_batch(e: &Cirquent, limits: &OracleLimits) -> Result<bool, OracleError> {
    let state = GameState::new(e.clone(), limits)?;
    let search = Search::new(&state);
    Ok(search.winnable_batch(&state.resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::is_tautology;
    use crate::syntax::parse;

    fn c(text: &str) -> Cirquent {
        parse(text).expect("test cirquent parses")
    }

    #[test]
    fn eval_state_examples() {
        let mut s = GameState::new(c("p &[a] q"), &OracleLimits::default()).unwrap();
        assert_eq!(s.eval_state(), c("T"));
        let mut t = GameState::new(c("p |[c] q"), &OracleLimits::default()).unwrap();
        t.resolution.insert("c".to_string(), 1);
        assert_eq!(t.eval_state(), c("q"));
        s = GameState::new(c("all[a] x. p(x)"), &OracleLimits::default()).unwrap();
        s.resolution.insert("a".to_string(), 3);
        assert_eq!(s.eval_state(), c("p(3)"));
    }

    #[test]
    fn domain_is_occurring_plus_fresh() {
        let s = GameState::new(c("all[a] x. p(x, 5)"), &OracleLimits::default()).unwrap();
        // Occurring {5}, one fresh for cluster a, one extra: {0, 1, 5}.
        assert_eq!(s.domain, vec![0, 1, 5]);
        let s = GameState::new(c("p(2) |[c] q"), &OracleLimits::default()).unwrap();
        // No chall clusters: occurring {2} plus one extra fresh.
        assert_eq!(s.domain, vec![0, 2]);
    }

    #[test]
    fn limits_are_enforced() {
        let open = c("p(x)");
        assert_eq!(
            oracle_valid(&open),
            Err(OracleError::NotClosed)
        );
        let wide = c("(p &[a] q) & (p &[b] q) & (p &[c] q) & (p &[d] q)");
        let tight = OracleLimits {
            max_clusters: 3,
            max_domain: 6,
        };
        assert!(matches!(
            oracle_valid_with(&wide, &tight),
            Err(OracleError::TooManyClusters { count: 4, limit: 3 })
        ));
        let deep = c("all[a] x. all[b] y. all[c] z. p(x, y, z)");
        let narrow = OracleLimits {
            max_clusters: 6,
            max_domain: 3,
        };
        assert!(matches!(
            oracle_valid_with(&deep, &narrow),
            Err(OracleError::DomainTooLarge { size: 4, limit: 3 })
        ));
    }

    #[test]
    fn validity_examples() {
        assert!(oracle_valid(&c("~p(0) | p(0)")).unwrap());
        assert!(!oracle_valid(&c("ex[c] x. p(x)")).unwrap());
        assert!(oracle_valid(&c("T")).unwrap());
        assert!(!oracle_valid(&c("F")).unwrap());
        // A blind choice between contingent opposites is invalid: the
        // machine cannot observe the interpretation.
        assert!(!oracle_valid(&c("p |[c] ~p")).unwrap());
        assert!(!oracle_valid(&c("p &[a] ~p")).unwrap());
        // The environment resolving a choice conjunct makes both branches
        // tautological ...
        assert!(oracle_valid(&c("~p | (p &[a] p)")).unwrap());
        // ... and the machine can answer the environment's move in kind.
        assert!(
            oracle_valid(&c("(~p &[a] ~q) | (p |[c] q)")).unwrap()
        );
        // Without seeing the environment's pick it cannot.
        assert!(
            !oracle_valid(&c("(~p & ~q) | (p |[c] q)")).unwrap()
        );
    }

    #[test]
    fn merged_clusters_valid_distinct_invalid() {
        let merged = c("(all[a] x. ~p(x) & all[a] x. ~p(x)) | ex[c] x. p(x)");
        assert!(oracle_valid(&merged).unwrap());
        let distinct = c("(all[a] x. ~p(x) & all[b] x. ~p(x)) | ex[c] x. p(x)");
        assert!(!oracle_valid(&distinct).unwrap());
    }

    #[test]
    fn choice_free_matches_tautology() {
        for text in [
            "~p(0) | p(0)",
            "p | q",
            "p & ~p",
            "(p | ~p) & (q | ~q)",
            "T | F",
            "F",
            "~p(1) | (p(1) & q) | ~q",
        ] {
            let e = c(text);
            assert_eq!(
                oracle_valid(&e).unwrap(),
                is_tautology(&e),
                "mismatch on {text}"
            );
        }
    }

    #[test]
    fn batch_and_memoized_searches_agree() {
        for text in [
            "~p(0) | p(0)",
            "ex[c] x. p(x)",
            "p |[c] ~p",
            "p &[a] ~p",
            "(all[a] x. ~p(x) & all[a] x. ~p(x)) | ex[c] x. p(x)",
            "(all[a] x. ~p(x) & all[b] x. ~p(x)) | ex[c] x. p(x)",
            "(p |[c] q) & (~p |[d] ~q)",
            "all[a] x. (~p(x) | ex[c] y. p(y))",
        ] {
            let e = c(text);
            let limits = OracleLimits::default();
            assert_eq!(
                oracle_valid_with(&e, &limits).unwrap(),
                oracle_valid_batch(&e, &limits).unwrap(),
                "search disagreement on {text}"
            );
        }
    }

    #[test]
    fn saturation_padding_does_not_flip() {
        let limits = OracleLimits {
            max_clusters: 6,
            max_domain: 8,
        };
        for text in [
            "ex[c] x. p(x)",
            "all[a] x. (~p(x) | ex[c] y. p(y))",
            "(all[a] x. ~p(x) & all[a] x. ~p(x)) | ex[c] x. p(x)",
            "all[a] x. ex[c] y. (~p(x) | p(y))",
        ] {
            let e = c(text);
            let base = oracle_valid_with(&e, &limits).unwrap();
            let padded = oracle_valid_padded(&e, &limits, 1).unwrap();
            assert_eq!(base, padded, "domain padding flipped {text}");
        }
    }
}

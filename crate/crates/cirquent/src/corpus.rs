//! Instance generators and differential-testing harnesses.
//!
//! Three harnesses, shared by the test suite and the `corpus` CLI command:
//!
//! - **agreement** — the decision procedure against the game-search oracle,
//!   over an exhaustive small tier or a seeded random sample;
//! - **preservation** — constructed rule applications preserve validity
//!   premise-to-conclusion for every rule, and conclusion-to-premise for
//!   every non-choosing rule;
//! - **purity** — purification output is pure, every logged rewrite
//!   decreases the rank when both sides are computable, the recorded
//!   derivation replays back to the input, and the result's rank does not
//!   exceed the input's.
//!
//! Every generator is deterministic: random instances derive from a seed and
//! an instance index, and the parallel runners collate results by index, so
//! identical inputs produce byte-identical reports.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    apply_rule, check_step_cirquents, collapse_chexists, collapse_chor, RuleName, Witness,
};
use crate::decide::decide;
use crate::oracle::{oracle_valid_with, GameState, OracleLimits};
use crate::purify::{is_pure, purify, rank, replay_derivation, Rank};
use crate::semantics::{check_legal, GroundAtom, Interpretation, LegalRun, Move, Player};
use crate::syntax::{fresh_constant, Cirquent, ClusterKind, Path, Step, Term};

// ---------------------------------------------------------------------------
// Random generation profile
// ---------------------------------------------------------------------------

/// Shape parameters for random instance generation.
#[derive(Clone, Debug)]
pub struct CorpusSpec {
    /// Maximum tree depth; a lone leaf has depth 1.
    pub max_depth: usize,
    /// Predicate alphabet: name and arity.
    pub predicates: Vec<(String, usize)>,
    /// How many distinct cluster names each kind may draw from.
    pub clusters_per_kind: usize,
    /// Constant pool for atom arguments.
    pub constants: Vec<u64>,
}

impl Default for CorpusSpec {
    fn default() -> CorpusSpec {
        CorpusSpec {
            max_depth: 4,
            predicates: vec![("p".to_string(), 1), ("q".to_string(), 0)],
            clusters_per_kind: 2,
            constants: vec![0, 1],
        }
    }
}

/// The RNG stream for one instance of a seeded batch. Mixing the index into
/// the seed keeps parallel generation independent of evaluation order.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Cluster-name pools, one prefix letter per kind so a name can never be
/// used at two kinds.
fn pool_name(kind: ClusterKind, i: usize) -> String {
    let prefix = match kind {
        ClusterKind::Chand => "a",
        ClusterKind::Chor => "o",
        ClusterKind::Chall => "u",
        ClusterKind::Chexists => "e",
    };
    format!("{prefix}{}", i + 1)
}

fn random_pool_name(kind: ClusterKind, spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> String {
    pool_name(kind, rng.gen_range(0..spec.clusters_per_kind.max(1)))
}

fn random_leaf(spec: &CorpusSpec, rng: &mut ChaCha8Rng, scope: &[String]) -> Cirquent {
    match rng.gen_range(0..8u32) {
        0 => Cirquent::Top,
        1 => Cirquent::Bot,
        _ => {
            let (pred, arity) = spec.predicates[rng.gen_range(0..spec.predicates.len())].clone();
            let args = (0..arity)
                .map(|_| {
                    if !scope.is_empty() && rng.gen_bool(0.4) {
                        Term::Var(scope[rng.gen_range(0..scope.len())].clone())
                    } else {
                        Term::Const(spec.constants[rng.gen_range(0..spec.constants.len())])
                    }
                })
                .collect();
            Cirquent::Atom {
                pred,
                negated: rng.gen_bool(0.5),
                args,
            }
        }
    }
}

fn gen_tree(
    spec: &CorpusSpec,
    rng: &mut ChaCha8Rng,
    depth: usize,
    scope: &mut Vec<String>,
    choice_free: bool,
) -> Cirquent {
    let roll_max = if choice_free { 6 } else { 10 };
    if depth <= 1 {
        return random_leaf(spec, rng, scope);
    }
    match rng.gen_range(0..roll_max) {
        0 | 1 => random_leaf(spec, rng, scope),
        2 | 3 => Cirquent::Pand(
            Box::new(gen_tree(spec, rng, depth - 1, scope, choice_free)),
            Box::new(gen_tree(spec, rng, depth - 1, scope, choice_free)),
        ),
        4 | 5 => Cirquent::Por(
            Box::new(gen_tree(spec, rng, depth - 1, scope, choice_free)),
            Box::new(gen_tree(spec, rng, depth - 1, scope, choice_free)),
        ),
        6 => Cirquent::Chand {
            cluster: random_pool_name(ClusterKind::Chand, spec, rng),
            left: Box::new(gen_tree(spec, rng, depth - 1, scope, false)),
            right: Box::new(gen_tree(spec, rng, depth - 1, scope, false)),
        },
        7 => Cirquent::Chor {
            cluster: random_pool_name(ClusterKind::Chor, spec, rng),
            left: Box::new(gen_tree(spec, rng, depth - 1, scope, false)),
            right: Box::new(gen_tree(spec, rng, depth - 1, scope, false)),
        },
        q => {
            let var = if rng.gen_bool(0.5) { "x" } else { "y" }.to_string();
            scope.push(var.clone());
            let body = Box::new(gen_tree(spec, rng, depth - 1, scope, false));
            scope.pop();
            if q == 8 {
                Cirquent::Chall {
                    cluster: random_pool_name(ClusterKind::Chall, spec, rng),
                    var,
                    body,
                }
            } else {
                Cirquent::Chexists {
                    cluster: random_pool_name(ClusterKind::Chexists, spec, rng),
                    var,
                    body,
                }
            }
        }
    }
}

/// True when the brute-force oracle accepts the instance at these limits.
fn within_limits(c: &Cirquent, limits: &OracleLimits) -> bool {
    GameState::new(c.clone(), limits).is_ok()
}

/// One seeded random closed cirquent, resampled (boundedly) until it fits
/// the given oracle limits. Falls back to a bare leaf if resampling fails.
pub fn random_cirquent(
    spec: &CorpusSpec,
    rng: &mut ChaCha8Rng,
    limits: &OracleLimits,
) -> Cirquent {
    assert!(!spec.constants.is_empty(), "constant pool must be nonempty");
    assert!(!spec.predicates.is_empty(), "predicate alphabet must be nonempty");
    for _ in 0..64 {
        let c = gen_tree(spec, rng, spec.max_depth, &mut Vec::new(), false);
        debug_assert!(c.validate().is_ok() && c.is_closed());
        if within_limits(&c, limits) {
            return c;
        }
    }
    random_leaf(spec, rng, &[])
}

/// One seeded random closed cirquent with no choice operators (parallel
/// connectives, constants-only literals, `T`, `F`).
pub fn random_choice_free(spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> Cirquent {
    let c = gen_tree(spec, rng, spec.max_depth, &mut Vec::new(), true);
    debug_assert!(c.validate().is_ok() && c.is_closed());
    c
}

/// One seeded random cirquent whose free variables are drawn from `vars`
/// (possibly not all used). No oracle-limit resampling.
pub fn random_open_cirquent(spec: &CorpusSpec, rng: &mut ChaCha8Rng, vars: &[&str]) -> Cirquent {
    let mut scope: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let c = gen_tree(spec, rng, spec.max_depth, &mut scope, false);
    debug_assert!(c.validate().is_ok());
    c
}

// ---------------------------------------------------------------------------
// Exhaustive tier
// ---------------------------------------------------------------------------

/// The fixed alphabet of the exhaustive tier: one unary predicate `p`, one
/// nullary predicate `q`, constants 0 and 1, a single variable `x`, and one
/// cluster name per kind.
fn exhaustive_leaves(with_var: bool) -> Vec<Cirquent> {
    let atom = |pred: &str, negated: bool, args: Vec<Term>| Cirquent::Atom {
        pred: pred.to_string(),
        negated,
        args,
    };
    let mut out = vec![
        Cirquent::Top,
        Cirquent::Bot,
        atom("q", false, vec![]),
        atom("q", true, vec![]),
        atom("p", false, vec![Term::Const(0)]),
        atom("p", true, vec![Term::Const(0)]),
        atom("p", false, vec![Term::Const(1)]),
        atom("p", true, vec![Term::Const(1)]),
    ];
    if with_var {
        out.push(atom("p", false, vec![Term::Var("x".to_string())]));
        out.push(atom("p", true, vec![Term::Var("x".to_string())]));
    }
    out
}

const EXH_CHAND: &str = "a";
const EXH_CHOR: &str = "o";
const EXH_CHALL: &str = "u";
const EXH_CHEXISTS: &str = "e";

fn exhaustive_binary(op: usize, l: Cirquent, r: Cirquent) -> Cirquent {
    let (l, r) = (Box::new(l), Box::new(r));
    match op {
        0 => Cirquent::Pand(l, r),
        1 => Cirquent::Por(l, r),
        2 => Cirquent::Chand {
            cluster: EXH_CHAND.to_string(),
            left: l,
            right: r,
        },
        _ => Cirquent::Chor {
            cluster: EXH_CHOR.to_string(),
            left: l,
            right: r,
        },
    }
}

fn exhaustive_quantifier(q: usize, body: Cirquent) -> Cirquent {
    if q == 0 {
        Cirquent::Chall {
            cluster: EXH_CHALL.to_string(),
            var: "x".to_string(),
            body: Box::new(body),
        }
    } else {
        Cirquent::Chexists {
            cluster: EXH_CHEXISTS.to_string(),
            var: "x".to_string(),
            body: Box::new(body),
        }
    }
}

/// Every cirquent over the exhaustive alphabet with tree depth at most
/// `depth` (a lone leaf has depth 1). `with_var` admits the free variable
/// `x` in atom arguments; quantifier bodies always admit it.
pub fn exhaustive_up_to(depth: usize, with_var: bool) -> Vec<Cirquent> {
    let mut out = exhaustive_leaves(with_var);
    if depth <= 1 {
        return out;
    }
    let sub = exhaustive_up_to(depth - 1, with_var);
    let sub_open = if with_var {
        sub.clone()
    } else {
        exhaustive_up_to(depth - 1, true)
    };
    for op in 0..4 {
        for l in &sub {
            for r in &sub {
                out.push(exhaustive_binary(op, l.clone(), r.clone()));
            }
        }
    }
    for q in 0..2 {
        for body in &sub_open {
            out.push(exhaustive_quantifier(q, body.clone()));
        }
    }
    out
}

/// The depth-3 exhaustive tier as an indexed family, so the 323,492
/// instances can be streamed in parallel without materializing them all.
pub struct ExhaustiveTier {
    closed2: Vec<Cirquent>,
    open2: Vec<Cirquent>,
}

impl Default for ExhaustiveTier {
    fn default() -> ExhaustiveTier {
        ExhaustiveTier::new()
    }
}

impl ExhaustiveTier {
    /// Builds the depth-2 pools the depth-3 instances are assembled from.
    pub fn new() -> ExhaustiveTier {
        ExhaustiveTier {
            closed2: exhaustive_up_to(2, false),
            open2: exhaustive_up_to(2, true),
        }
    }

    /// Number of depth ≤ 3 closed instances.
    pub fn len(&self) -> usize {
        let c = self.closed2.len();
        let o = self.open2.len();
        exhaustive_leaves(false).len() + 4 * c * c + 2 * o
    }

    /// Whether the tier is empty (it never is; companion of `len`).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th instance, in the fixed enumeration order: leaves first,
    /// then the four binary connectives over all depth ≤ 2 pairs (left index
    /// major), then the two quantifiers over all depth ≤ 2 open bodies.
    pub fn get(&self, i: usize) -> Cirquent {
        let leaves = exhaustive_leaves(false);
        if i < leaves.len() {
            return leaves[i].clone();
        }
        let mut j = i - leaves.len();
        let c = self.closed2.len();
        if j < 4 * c * c {
            let op = j / (c * c);
            let rem = j % (c * c);
            return exhaustive_binary(op, self.closed2[rem / c].clone(), self.closed2[rem % c].clone());
        }
        j -= 4 * c * c;
        let o = self.open2.len();
        assert!(j < 2 * o, "index {i} out of range");
        exhaustive_quantifier(j / o, self.open2[j % o].clone())
    }
}

// ---------------------------------------------------------------------------
// Runs and interpretations
// ---------------------------------------------------------------------------

/// All legal runs over the cirquent's clusters, one per assignment of each
/// cluster to "unresolved" or a value (0/1 for binary kinds, one of
/// `quantifier_values` for quantifier kinds), with moves in cluster-name
/// order. Run order does not affect the play's outcome, so one canonical
/// order per resolution set suffices for exhaustive semantics checks.
pub fn all_resolution_runs(c: &Cirquent, quantifier_values: &[u64]) -> Vec<LegalRun> {
    let clusters: Vec<(String, ClusterKind)> = c
        .clusters_of()
        .into_iter()
        .map(|(name, (kind, _))| (name, kind))
        .collect();
    let mut runs = Vec::new();
    let mut moves: Vec<Move> = Vec::new();
    fn rec(
        clusters: &[(String, ClusterKind)],
        quantifier_values: &[u64],
        moves: &mut Vec<Move>,
        runs: &mut Vec<LegalRun>,
    ) {
        match clusters.split_first() {
            None => {
                runs.push(check_legal(moves.clone()).expect("constructed runs are legal"));
            }
            Some(((name, kind), rest)) => {
                rec(rest, quantifier_values, moves, runs);
                let values: Vec<u64> = match kind {
                    ClusterKind::Chand | ClusterKind::Chor => vec![0, 1],
                    ClusterKind::Chall | ClusterKind::Chexists => quantifier_values.to_vec(),
                };
                for v in values {
                    moves.push(Move {
                        player: Player::for_kind(*kind),
                        kind: *kind,
                        cluster: name.clone(),
                        choice: v,
                    });
                    rec(rest, quantifier_values, moves, runs);
                    moves.pop();
                }
            }
        }
    }
    rec(&clusters, quantifier_values, &mut moves, &mut runs);
    runs
}

/// A random legal run: each cluster is independently left unresolved or
/// resolved to a random value, in a shuffled order.
pub fn random_legal_run(c: &Cirquent, values: &[u64], rng: &mut ChaCha8Rng) -> LegalRun {
    let mut clusters: Vec<(String, ClusterKind)> = c
        .clusters_of()
        .into_iter()
        .map(|(name, (kind, _))| (name, kind))
        .collect();
    for i in (1..clusters.len()).rev() {
        clusters.swap(i, rng.gen_range(0..=i));
    }
    let mut moves = Vec::new();
    for (name, kind) in clusters {
        if rng.gen_bool(0.4) {
            continue;
        }
        let choice = match kind {
            ClusterKind::Chand | ClusterKind::Chor => rng.gen_range(0..2u64),
            ClusterKind::Chall | ClusterKind::Chexists => values[rng.gen_range(0..values.len())],
        };
        moves.push(Move {
            player: Player::for_kind(kind),
            kind,
            cluster: name,
            choice,
        });
    }
    check_legal(moves).expect("constructed runs are legal")
}

/// A random interpretation over the given predicate alphabet and constant
/// pool: every ground atom in the finite alphabet is independently true
/// with probability 1/2.
pub fn random_interpretation(
    predicates: &[(String, usize)],
    constants: &[u64],
    rng: &mut ChaCha8Rng,
) -> Interpretation {
    let mut atoms = Vec::new();
    for (pred, arity) in predicates {
        let mut args = vec![0usize; *arity];
        loop {
            if rng.gen_bool(0.5) {
                atoms.push(GroundAtom {
                    pred: pred.clone(),
                    args: args.iter().map(|&i| constants[i]).collect(),
                });
            }
            // Advance the mixed-radix counter over constant indices.
            let mut k = 0;
            loop {
                if k == args.len() {
                    break;
                }
                args[k] += 1;
                if args[k] < constants.len() {
                    break;
                }
                args[k] = 0;
                k += 1;
            }
            if k == args.len() {
                break;
            }
        }
    }
    Interpretation::from_atoms(atoms)
}

/// The predicate alphabet occurring in a cirquent: name and arity pairs.
pub fn predicate_alphabet(c: &Cirquent) -> Vec<(String, usize)> {
    fn walk(c: &Cirquent, out: &mut BTreeSet<(String, usize)>) {
        if let Cirquent::Atom { pred, args, .. } = c {
            out.insert((pred.clone(), args.len()));
        }
        for child in c.children() {
            walk(child, out);
        }
    }
    let mut set = BTreeSet::new();
    walk(c, &mut set);
    set.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Agreement harness
// ---------------------------------------------------------------------------

/// One decision/oracle disagreement.
#[derive(Clone, Debug, Serialize)]
pub struct AgreementMismatch {
    /// Instance index within the batch.
    pub index: usize,
    /// The instance, printed.
    pub cirquent: String,
    /// What the decision procedure said.
    pub decision: bool,
    /// What the game-search oracle said.
    pub oracle: bool,
}

/// Outcome of an agreement batch.
#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    /// Instances compared.
    pub total: usize,
    /// How many the decision procedure accepted.
    pub accepted: usize,
    /// All disagreements, by instance index.
    pub mismatches: Vec<AgreementMismatch>,
}

impl AgreementReport {
    /// True when decision and oracle agreed on every instance.
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn agreement_instance(index: usize, c: &Cirquent, limits: &OracleLimits) -> (bool, Option<AgreementMismatch>) {
    let decision = decide(c).expect("generated instances are closed").accept;
    let oracle = oracle_valid_with(c, limits).expect("generated instances fit the limits");
    let mismatch = if decision != oracle {
        Some(AgreementMismatch {
            index,
            cirquent: crate::syntax::print(c),
            decision,
            oracle,
        })
    } else {
        None
    };
    (decision, mismatch)
}

fn collate_agreement(results: Vec<(bool, Option<AgreementMismatch>)>) -> AgreementReport {
    let total = results.len();
    let accepted = results.iter().filter(|(d, _)| *d).count();
    let mismatches = results.into_iter().filter_map(|(_, m)| m).collect();
    AgreementReport {
        total,
        accepted,
        mismatches,
    }
}

/// Decision-versus-oracle agreement over an explicit instance list.
pub fn run_agreement_over(instances: &[Cirquent], limits: &OracleLimits) -> AgreementReport {
    let results: Vec<_> = instances
        .par_iter()
        .enumerate()
        .map(|(i, c)| agreement_instance(i, c, limits))
        .collect();
    collate_agreement(results)
}

/// Agreement over the full depth-3 exhaustive tier, streamed by index.
pub fn run_agreement_exhaustive(limits: &OracleLimits) -> AgreementReport {
    let tier = ExhaustiveTier::new();
    let results: Vec<_> = (0..tier.len())
        .into_par_iter()
        .map(|i| agreement_instance(i, &tier.get(i), limits))
        .collect();
    collate_agreement(results)
}

/// Agreement over `count` seeded random instances.
pub fn run_agreement_random(
    spec: &CorpusSpec,
    count: usize,
    seed: u64,
    limits: &OracleLimits,
) -> AgreementReport {
    let results: Vec<_> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let c = random_cirquent(spec, &mut rng, limits);
            agreement_instance(i, &c, limits)
        })
        .collect();
    collate_agreement(results)
}

// ---------------------------------------------------------------------------
// Preservation harness
// ---------------------------------------------------------------------------

/// A constructed, checker-verified rule application.
#[derive(Clone, Debug)]
pub struct RulePair {
    /// The rule applied.
    pub rule: RuleName,
    /// Its premises (two for ChandSplitting, one otherwise).
    pub premises: Vec<Cirquent>,
    /// Its conclusion.
    pub conclusion: Cirquent,
}

/// Reserved cluster names for constructed rule skeletons; the random piece
/// generator only draws lowercase pool names, so these never clash in kind.
const RES_CHAND_A: &str = "A";
const RES_CHAND_B: &str = "B";
const RES_CHAND_FRESH: &str = "W";
const RES_CHOR: &str = "O";
const RES_CHALL_A: &str = "U";
const RES_CHALL_B: &str = "V";
const RES_CHEXISTS: &str = "E";

/// Builds one random application of `rule` and verifies it with the step
/// checker. Pieces are depth ≤ 2 random cirquents; chotomy pieces are kept
/// choice-free so the assembled instances stay within oracle limits.
pub fn rule_pair(rule: RuleName, spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> RulePair {
    let limits = OracleLimits::default();
    loop {
        let (premises, conclusion, witness) = rule_pair_attempt(rule, spec, rng);
        for p in &premises {
            debug_assert!(p.validate().is_ok() && p.is_closed(), "bad premise for {rule}");
        }
        debug_assert!(conclusion.validate().is_ok() && conclusion.is_closed());
        let premise_refs: Vec<&Cirquent> = premises.iter().collect();
        if let Err(err) = check_step_cirquents(rule, &premise_refs, &conclusion, &witness) {
            panic!("generated {rule} application does not check: {err}");
        }
        if premises.iter().all(|p| within_limits(p, &limits)) && within_limits(&conclusion, &limits)
        {
            return RulePair {
                rule,
                premises,
                conclusion,
            };
        }
    }
}

fn rule_pair_attempt(
    rule: RuleName,
    spec: &CorpusSpec,
    rng: &mut ChaCha8Rng,
) -> (Vec<Cirquent>, Cirquent, Witness) {
    let depth = spec.max_depth.min(2);
    let piece = |rng: &mut ChaCha8Rng, scope: &[&str], choice_free: bool| {
        let mut sc: Vec<String> = scope.iter().map(|s| s.to_string()).collect();
        gen_tree(spec, rng, depth, &mut sc, choice_free)
    };
    let pand = |l: Cirquent, r: Cirquent| Cirquent::Pand(Box::new(l), Box::new(r));
    let por = |l: Cirquent, r: Cirquent| Cirquent::Por(Box::new(l), Box::new(r));
    let chand = |cl: &str, l: Cirquent, r: Cirquent| Cirquent::Chand {
        cluster: cl.to_string(),
        left: Box::new(l),
        right: Box::new(r),
    };
    let chor = |cl: &str, l: Cirquent, r: Cirquent| Cirquent::Chor {
        cluster: cl.to_string(),
        left: Box::new(l),
        right: Box::new(r),
    };
    let chall = |cl: &str, v: &str, b: Cirquent| Cirquent::Chall {
        cluster: cl.to_string(),
        var: v.to_string(),
        body: Box::new(b),
    };
    let chexists = |cl: &str, v: &str, b: Cirquent| Cirquent::Chexists {
        cluster: cl.to_string(),
        var: v.to_string(),
        body: Box::new(b),
    };
    // Forward application driver for the single-premise context rules.
    let forward = |premise: Cirquent, w: Witness| {
        let conclusion = apply_rule(rule, std::slice::from_ref(&premise), &w)
            .unwrap_or_else(|err| panic!("constructed {rule} premise does not apply: {err}"));
        (vec![premise], conclusion, w)
    };

    match rule {
        RuleName::PorCommutativity => {
            let p = por(piece(rng, &[], false), piece(rng, &[], false));
            forward(p, Witness::default())
        }
        RuleName::PandCommutativity => {
            let p = pand(piece(rng, &[], false), piece(rng, &[], false));
            forward(p, Witness::default())
        }
        RuleName::PorAssociativity => {
            let p = por(
                piece(rng, &[], false),
                por(piece(rng, &[], false), piece(rng, &[], false)),
            );
            forward(p, Witness::default())
        }
        RuleName::PandAssociativity => {
            let p = pand(
                piece(rng, &[], false),
                pand(piece(rng, &[], false), piece(rng, &[], false)),
            );
            forward(p, Witness::default())
        }
        RuleName::PorIdentity | RuleName::PandIdentity => {
            forward(piece(rng, &[], false), Witness::default())
        }
        RuleName::PorDomination => {
            let w = Witness {
                intro: Some(piece(rng, &[], false)),
                ..Witness::default()
            };
            forward(Cirquent::Top, w)
        }
        RuleName::PandDomination => {
            let w = Witness {
                intro: Some(piece(rng, &[], false)),
                ..Witness::default()
            };
            forward(Cirquent::Bot, w)
        }
        RuleName::Trivialization => {
            let (pred, arity) = spec.predicates[rng.gen_range(0..spec.predicates.len())].clone();
            let args = (0..arity)
                .map(|_| Term::Const(spec.constants[rng.gen_range(0..spec.constants.len())]))
                .collect();
            let w = Witness {
                intro: Some(Cirquent::Atom {
                    pred,
                    negated: false,
                    args,
                }),
                ..Witness::default()
            };
            forward(Cirquent::Top, w)
        }
        RuleName::LeftChorChoosing | RuleName::RightChorChoosing => {
            let branch = if rule == RuleName::LeftChorChoosing { 0 } else { 1 };
            let conclusion = chor(RES_CHOR, piece(rng, &[], false), piece(rng, &[], false));
            let premise = collapse_chor(&conclusion, RES_CHOR, branch);
            let w = Witness {
                cluster: Some(RES_CHOR.to_string()),
                branch: Some(branch),
                intro: Some(conclusion.clone()),
                ..Witness::default()
            };
            (vec![premise], conclusion, w)
        }
        RuleName::ChexistsChoosing => {
            let conclusion = chexists(RES_CHEXISTS, "x", piece(rng, &["x"], false));
            let constant = spec.constants[rng.gen_range(0..spec.constants.len())];
            let premise = collapse_chexists(&conclusion, RES_CHEXISTS, constant);
            let w = Witness {
                cluster: Some(RES_CHEXISTS.to_string()),
                constant: Some(constant),
                intro: Some(conclusion.clone()),
                ..Witness::default()
            };
            (vec![premise], conclusion, w)
        }
        RuleName::LeftChandCleansing | RuleName::RightChandCleansing => {
            let kept = piece(rng, &[], false);
            let intro = piece(rng, &[], false);
            let other = piece(rng, &[], false);
            // The cleansed component either is the kept node itself or wraps
            // it one level deep in a parallel disjunction.
            let (component, hole) = if rng.gen_bool(0.5) {
                (kept.clone(), Path::root())
            } else {
                (
                    por(kept.clone(), piece(rng, &[], false)),
                    Path::root().child(Step::Left),
                )
            };
            let premise = if rule == RuleName::LeftChandCleansing {
                chand(RES_CHAND_A, component, other)
            } else {
                chand(RES_CHAND_A, other, component)
            };
            let w = Witness {
                hole: Some(hole),
                intro: Some(intro),
                ..Witness::default()
            };
            forward(premise, w)
        }
        RuleName::ChallCleansing => {
            let kept = piece(rng, &["x"], false);
            let (body, hole) = if rng.gen_bool(0.5) {
                (kept.clone(), Path::root())
            } else {
                (
                    por(kept.clone(), piece(rng, &[], false)),
                    Path::root().child(Step::Left),
                )
            };
            let premise = chall(RES_CHALL_A, "x", body);
            // Half the time rename the inner binder; the default keeps `x`.
            let var = if rng.gen_bool(0.5) { None } else { Some("z".to_string()) };
            let w = Witness {
                hole: Some(hole),
                var,
                ..Witness::default()
            };
            forward(premise, w)
        }
        RuleName::PandDistribution => {
            let (a, b, c) = (piece(rng, &[], false), piece(rng, &[], false), piece(rng, &[], false));
            let premise = pand(por(a, c.clone()), por(b, c));
            forward(premise, Witness::default())
        }
        RuleName::ChandDistribution => {
            let (a, b, c) = (piece(rng, &[], false), piece(rng, &[], false), piece(rng, &[], false));
            let premise = chand(RES_CHAND_A, por(a, c.clone()), por(b, c));
            forward(premise, Witness::default())
        }
        RuleName::ChallDistribution => {
            let a = piece(rng, &["x"], false);
            let b = piece(rng, &[], false);
            let premise = chall(RES_CHALL_A, "x", por(a, b));
            forward(premise, Witness::default())
        }
        RuleName::Chandchotomy => {
            let a = piece(rng, &[], true);
            let b = piece(rng, &[], true);
            let c = piece(rng, &[], true);
            let d = piece(rng, &[], true);
            let l = chand(RES_CHAND_A, a.clone(), b.clone());
            let r = chand(RES_CHAND_B, c.clone(), d.clone());
            let premise = chand(
                RES_CHAND_FRESH,
                chand(RES_CHAND_A, pand(a, r.clone()), pand(b, r.clone())),
                chand(RES_CHAND_B, pand(l.clone(), c), pand(l.clone(), d)),
            );
            let conclusion = pand(l, r);
            (vec![premise], conclusion, Witness::default())
        }
        RuleName::Challchotomy => {
            let a = piece(rng, &["x"], true);
            let b = piece(rng, &["y"], true);
            let l = chall(RES_CHALL_A, "x", a.clone());
            let r = chall(RES_CHALL_B, "y", b.clone());
            let premise = chand(
                RES_CHAND_FRESH,
                chall(RES_CHALL_A, "x", pand(a, r.clone())),
                chall(RES_CHALL_B, "y", pand(l.clone(), b)),
            );
            let conclusion = pand(l, r);
            (vec![premise], conclusion, Witness::default())
        }
        RuleName::Chandallchotomy => {
            let a = piece(rng, &[], true);
            let b = piece(rng, &[], true);
            let c = piece(rng, &["x"], true);
            let l = chand(RES_CHAND_A, a.clone(), b.clone());
            let r = chall(RES_CHALL_B, "x", c.clone());
            let premise = chand(
                RES_CHAND_FRESH,
                chand(RES_CHAND_A, pand(a, r.clone()), pand(b, r.clone())),
                chall(RES_CHALL_B, "x", pand(l.clone(), c)),
            );
            let conclusion = pand(l, r);
            (vec![premise], conclusion, Witness::default())
        }
        RuleName::ChandSplitting => {
            let a = piece(rng, &[], false);
            let b = piece(rng, &[], false);
            let w = Witness {
                cluster: Some(RES_CHAND_FRESH.to_string()),
                ..Witness::default()
            };
            let conclusion = apply_rule(rule, &[a.clone(), b.clone()], &w)
                .unwrap_or_else(|err| panic!("constructed {rule} premises do not apply: {err}"));
            (vec![a, b], conclusion, w)
        }
        RuleName::ChallSplitting => {
            let body = piece(rng, &["x"], false);
            let constant = fresh_constant(&body);
            let premise = body
                .substitute("x", &Term::Const(constant))
                .expect("constants cannot be captured");
            let w = Witness {
                cluster: Some(RES_CHALL_A.to_string()),
                constant: Some(constant),
                var: Some("x".to_string()),
                ..Witness::default()
            };
            forward(premise, w)
        }
    }
}

/// One direction of preservation failing on a constructed application.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationViolation {
    /// Instance index within the batch.
    pub index: usize,
    /// Rule applied.
    pub rule: String,
    /// Which direction failed: "premise-to-conclusion" or
    /// "conclusion-to-premise".
    pub direction: String,
    /// The premises, printed.
    pub premises: Vec<String>,
    /// The conclusion, printed.
    pub conclusion: String,
}

/// Outcome of a preservation batch.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationReport {
    /// Applications constructed.
    pub total: usize,
    /// How many had all premises valid (so the forward direction bit).
    pub forward_applicable: usize,
    /// How many had a valid conclusion under a non-choosing rule (so the
    /// backward direction bit).
    pub backward_applicable: usize,
    /// All violations, by instance index.
    pub violations: Vec<PreservationViolation>,
}

impl PreservationReport {
    /// True when every constructed application preserved validity in every
    /// required direction.
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validity preservation over `count` constructed applications, cycling
/// through all 23 rules by instance index.
pub fn run_preservation(spec: &CorpusSpec, count: usize, seed: u64) -> PreservationReport {
    let limits = OracleLimits::default();
    let results: Vec<_> = (0..count)
        .into_par_iter()
        .map(|i| {
            let rule = RuleName::ALL[i % RuleName::ALL.len()];
            let mut rng = instance_rng(seed, i as u64);
            let pair = rule_pair(rule, spec, &mut rng);
            let premises_valid = pair
                .premises
                .iter()
                .all(|p| oracle_valid_with(p, &limits).expect("within limits"));
            let conclusion_valid =
                oracle_valid_with(&pair.conclusion, &limits).expect("within limits");
            let mut violations = Vec::new();
            let violation = |direction: &str| PreservationViolation {
                index: i,
                rule: rule.to_string(),
                direction: direction.to_string(),
                premises: pair.premises.iter().map(crate::syntax::print).collect(),
                conclusion: crate::syntax::print(&pair.conclusion),
            };
            let forward = premises_valid;
            if premises_valid && !conclusion_valid {
                violations.push(violation("premise-to-conclusion"));
            }
            let backward = !rule.is_choosing() && conclusion_valid;
            if backward && !premises_valid {
                violations.push(violation("conclusion-to-premise"));
            }
            (forward, backward, violations)
        })
        .collect();
    let total = results.len();
    let forward_applicable = results.iter().filter(|(f, _, _)| *f).count();
    let backward_applicable = results.iter().filter(|(_, b, _)| *b).count();
    let violations = results.into_iter().flat_map(|(_, _, v)| v).collect();
    PreservationReport {
        total,
        forward_applicable,
        backward_applicable,
        violations,
    }
}

// ---------------------------------------------------------------------------
// Purity harness
// ---------------------------------------------------------------------------

/// A purification invariant failing on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct PurityViolation {
    /// Instance index within the batch.
    pub index: usize,
    /// The instance, printed.
    pub cirquent: String,
    /// Which invariant failed.
    pub problem: String,
}

/// Outcome of a purity batch.
#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    /// Instances purified.
    pub total: usize,
    /// Rewrites logged across all instances.
    pub rewrites: usize,
    /// All violations, by instance index.
    pub violations: Vec<PurityViolation>,
}

impl PurityReport {
    /// True when every instance satisfied every purification invariant.
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the purification invariants on one closed cirquent and returns
/// the violations with the given instance index, plus the rewrite count.
pub fn check_purification(index: usize, c: &Cirquent) -> (usize, Vec<PurityViolation>) {
    let mut violations = Vec::new();
    let fail = |problem: String| PurityViolation {
        index,
        cirquent: crate::syntax::print(c),
        problem,
    };
    let result = purify(c);
    if let Err(cond) = is_pure(&result.pure) {
        violations.push(fail(format!(
            "output violates purity condition {cond}: {}",
            crate::syntax::print(&result.pure)
        )));
    }
    for (k, rw) in result.stage_trace.iter().enumerate() {
        if let (Rank::Finite(old), Rank::Finite(new)) = (rank(&rw.old), rank(&rw.new)) {
            if new >= old {
                violations.push(fail(format!(
                    "stage {} rewrite {k} does not decrease the rank: {} -> {}",
                    rw.stage,
                    crate::syntax::print(&rw.old),
                    crate::syntax::print(&rw.new)
                )));
            }
        }
    }
    match replay_derivation(&result.pure, &result.derivation) {
        Ok(rebuilt) => {
            if !rebuilt.alpha_eq(c) {
                violations.push(fail(format!(
                    "derivation replays to {}, not the input",
                    crate::syntax::print(&rebuilt)
                )));
            }
        }
        Err(err) => violations.push(fail(format!("derivation does not replay: {err}"))),
    }
    if let (Rank::Finite(rp), Rank::Finite(ri)) = (rank(&result.pure), rank(c)) {
        if rp > ri {
            violations.push(fail(format!(
                "purification raised the rank from {ri} to {rp}"
            )));
        }
    }
    (result.stage_trace.len(), violations)
}

/// Purification invariants over `count` seeded random instances.
pub fn run_purity(spec: &CorpusSpec, count: usize, seed: u64) -> PurityReport {
    let limits = OracleLimits::default();
    let results: Vec<_> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let c = random_cirquent(spec, &mut rng, &limits);
            check_purification(i, &c)
        })
        .collect();
    let total = results.len();
    let rewrites = results.iter().map(|(n, _)| n).sum();
    let violations = results.into_iter().flat_map(|(_, v)| v).collect();
    PurityReport {
        total,
        rewrites,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use std::collections::HashSet;

    fn c(s: &str) -> Cirquent {
        parse(s).unwrap()
    }

    fn depth(c: &Cirquent) -> usize {
        1 + c.children().into_iter().map(depth).max().unwrap_or(0)
    }

    #[test]
    fn exhaustive_counts_are_frozen() {
        assert_eq!(exhaustive_leaves(false).len(), 8);
        assert_eq!(exhaustive_leaves(true).len(), 10);
        assert_eq!(exhaustive_up_to(2, false).len(), 284);
        assert_eq!(exhaustive_up_to(2, true).len(), 430);
        let tier = ExhaustiveTier::new();
        assert_eq!(tier.len(), 323_492);
    }

    #[test]
    fn exhaustive_pools_have_no_duplicates() {
        for pool in [exhaustive_up_to(2, false), exhaustive_up_to(2, true)] {
            let prints: HashSet<String> = pool.iter().map(crate::syntax::print).collect();
            assert_eq!(prints.len(), pool.len());
        }
    }

    #[test]
    fn exhaustive_instances_are_wellformed() {
        let tier = ExhaustiveTier::new();
        let n = tier.len();
        let indices: HashSet<usize> = (0..n)
            .step_by(9973)
            .chain([0, 7, 8, n - 861, n - 860, n - 1])
            .collect();
        let mut seen = HashSet::new();
        for &i in &indices {
            let inst = tier.get(i);
            assert!(inst.validate().is_ok(), "instance {i} invalid");
            assert!(inst.is_closed(), "instance {i} open");
            assert!(depth(&inst) <= 3, "instance {i} too deep");
            seen.insert(crate::syntax::print(&inst));
        }
        // Sampled instances are pairwise distinct.
        assert_eq!(seen.len(), indices.len());
    }

    #[test]
    fn random_instances_are_closed_valid_and_deterministic() {
        let spec = CorpusSpec::default();
        let limits = OracleLimits::default();
        for i in 0..200u64 {
            let mut rng = instance_rng(42, i);
            let inst = random_cirquent(&spec, &mut rng, &limits);
            assert!(inst.validate().is_ok());
            assert!(inst.is_closed());
            assert!(within_limits(&inst, &limits));
            let mut rng2 = instance_rng(42, i);
            assert_eq!(inst, random_cirquent(&spec, &mut rng2, &limits));
        }
    }

    #[test]
    fn rule_pairs_check_for_every_rule() {
        let spec = CorpusSpec::default();
        for (k, &rule) in RuleName::ALL.iter().enumerate() {
            for j in 0..5u64 {
                let mut rng = instance_rng(7, (k as u64) * 100 + j);
                let pair = rule_pair(rule, &spec, &mut rng);
                assert_eq!(pair.premises.len(), rule.premise_count());
                // rule_pair already ran the step checker; re-verify the
                // parts are well-formed closed cirquents.
                for p in &pair.premises {
                    assert!(p.validate().is_ok() && p.is_closed());
                }
                assert!(pair.conclusion.validate().is_ok() && pair.conclusion.is_closed());
            }
        }
    }

    #[test]
    fn resolution_runs_enumerate_all_assignments() {
        // Two binary clusters: (1 + 2) * (1 + 2) = 9 runs.
        let runs = all_resolution_runs(&c("(p &[a1] q) | (T |[o1] F)"), &[0, 1]);
        assert_eq!(runs.len(), 9);
        // One quantifier cluster with two values: 1 + 2 = 3 runs.
        let runs = all_resolution_runs(&c("all[u1] x. p(x)"), &[0, 1]);
        assert_eq!(runs.len(), 3);
        // No clusters: only the empty run.
        let runs = all_resolution_runs(&c("p | ~p"), &[0, 1]);
        assert_eq!(runs.len(), 1);
        assert!(runs[0].moves().is_empty());
    }

    #[test]
    fn random_runs_and_interpretations_are_deterministic() {
        let inst = c("(p(0) &[a1] q) | ex[e1] x. p(x)");
        let mut r1 = instance_rng(3, 0);
        let mut r2 = instance_rng(3, 0);
        assert_eq!(
            random_legal_run(&inst, &[0, 1, 2], &mut r1),
            random_legal_run(&inst, &[0, 1, 2], &mut r2)
        );
        let preds = vec![("p".to_string(), 1), ("q".to_string(), 0)];
        let mut r1 = instance_rng(4, 1);
        let mut r2 = instance_rng(4, 1);
        assert_eq!(
            random_interpretation(&preds, &[0, 1], &mut r1),
            random_interpretation(&preds, &[0, 1], &mut r2)
        );
    }

    #[test]
    fn predicate_alphabet_collects_names_and_arities() {
        let inst = c("p(0) & (q | all[u1] x. r(x))");
        assert_eq!(
            predicate_alphabet(&inst),
            vec![
                ("p".to_string(), 1),
                ("q".to_string(), 0),
                ("r".to_string(), 1)
            ]
        );
    }

    #[test]
    fn agreement_holds_on_the_depth_two_pool() {
        let pool = exhaustive_up_to(2, false);
        let report = run_agreement_over(&pool, &OracleLimits::default());
        assert_eq!(report.total, 284);
        assert!(
            report.ok(),
            "decision/oracle mismatches: {:?}",
            &report.mismatches[..report.mismatches.len().min(5)]
        );
        // Sanity: the pool contains both accepted and rejected instances.
        assert!(report.accepted > 0 && report.accepted < report.total);
    }

    #[test]
    fn preservation_holds_on_constructed_applications() {
        let report = run_preservation(&CorpusSpec::default(), 46, 11);
        assert_eq!(report.total, 46);
        assert!(report.forward_applicable > 0);
        assert!(report.backward_applicable > 0);
        assert!(
            report.ok(),
            "preservation violations: {:?}",
            &report.violations[..report.violations.len().min(5)]
        );
    }

    #[test]
    fn purity_invariants_hold_on_random_instances() {
        let report = run_purity(&CorpusSpec::default(), 100, 13);
        assert_eq!(report.total, 100);
        assert!(report.rewrites > 0);
        assert!(
            report.ok(),
            "purity violations: {:?}",
            &report.violations[..report.violations.len().min(5)]
        );
    }

    #[test]
    fn reports_serialize_with_stable_field_names() {
        let report = run_agreement_over(&[c("T"), c("F")], &OracleLimits::default());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"total\":2"));
        assert!(json.contains("\"accepted\":1"));
        assert!(json.contains("\"mismatches\":[]"));
    }
}

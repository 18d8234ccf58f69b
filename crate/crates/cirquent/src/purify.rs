//! Rank, purity, and the eight-stage purification procedure.
//!
//! Purification rewrites a closed cirquent into a *pure* one while logging,
//! for every modification, a list of forward rule applications that derive
//! the pre-modification value from the post-modification value. Replaying
//! the whole derivation from the pure result therefore rebuilds the original
//! cirquent (up to renaming of bound variables, which some stages must
//! perform to satisfy rule side conditions).
//!
//! Rank is the termination measure: every single modification strictly
//! decreases it. Ranks grow by towers of exponentials, so [`Rank`] keeps
//! exact values only up to a guard and reports `Overflow` beyond it.

use crate::calculus::{apply_rule, RuleName, Witness};
use crate::syntax::{
    fresh_cluster_name, fresh_var, print, subst_var_avoiding, Cirquent, Path, Step,
};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

// ---------------------------------------------------------------------------
// Rank
// ---------------------------------------------------------------------------

/// Largest exponent `k` for which `5^k` is materialized.
const POW_EXPONENT_CAP: u64 = 1 << 17;

/// Tallest tower of fives that is materialized (`^3 5 = 5^3125`).
const TOWER_HEIGHT_CAP: u64 = 3;

/// A cirquent's rank: an exact natural number, or an overflow marker naming
/// the construct that exceeded the guard. Overflow compares like a NaN: it
/// is never equal to or ordered against anything.
#[derive(Clone, Debug)]
pub enum Rank {
    /// Exact value.
    Finite(BigUint),
    /// The value exceeds the materialization guard; the payload describes
    /// the height expression that overflowed.
    Overflow(String),
}

impl Rank {
    /// The exact value, if not overflowed.
    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            Rank::Finite(n) => Some(n),
            Rank::Overflow(_) => None,
        }
    }

    fn plus(self, other: Rank) -> Rank {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => Rank::Finite(a + b),
            (Rank::Overflow(d), _) | (_, Rank::Overflow(d)) => Rank::Overflow(d),
        }
    }

    fn succ(self) -> Rank {
        self.plus(Rank::Finite(BigUint::from(1u32)))
    }

    /// `5^self`, guarded.
    fn pow5(self) -> Rank {
        match self {
            Rank::Overflow(d) => Rank::Overflow(d),
            Rank::Finite(k) => match k.to_u64() {
                Some(k64) if k64 <= POW_EXPONENT_CAP => {
                    Rank::Finite(BigUint::from(5u32).pow(k64 as u32))
                }
                _ => Rank::Overflow(format!("5^{k} exceeds the exponent guard")),
            },
        }
    }

    /// Tower of fives of height `self` (tetration), guarded.
    fn tower5(self) -> Rank {
        match self {
            Rank::Overflow(d) => Rank::Overflow(d),
            Rank::Finite(k) => match k.to_u64() {
                Some(1) => Rank::Finite(BigUint::from(5u32)),
                Some(2) => Rank::Finite(BigUint::from(3125u32)),
                Some(h) if h <= TOWER_HEIGHT_CAP => {
                    Rank::Finite(BigUint::from(5u32).pow(3125u32))
                }
                _ => Rank::Overflow(format!("tower of 5s of height {k}")),
            },
        }
    }
}

impl PartialEq for Rank {
    fn eq(&self, other: &Rank) -> bool {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => a == b,
            _ => false,
        }
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Rank) -> Option<Ordering> {
        match (self, other) {
            (Rank::Finite(a), Rank::Finite(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::Overflow(d) => write!(f, "overflow ({d})"),
        }
    }
}

/// The rank of a cirquent: literals have rank 1; choice conjunction and
/// disjunction add; quantifiers add one; parallel conjunction is `5^k` and
/// parallel disjunction a tower of fives of height `k`, where `k` is the
/// children's sum.
pub fn rank(c: &Cirquent) -> Rank {
    match c {
        Cirquent::Top | Cirquent::Bot | Cirquent::Atom { .. } => {
            Rank::Finite(BigUint::from(1u32))
        }
        Cirquent::Chand { left, right, .. } | Cirquent::Chor { left, right, .. } => {
            rank(left).plus(rank(right))
        }
        Cirquent::Chall { body, .. } | Cirquent::Chexists { body, .. } => rank(body).succ(),
        Cirquent::Pand(a, b) => rank(a).plus(rank(b)).pow5(),
        Cirquent::Por(a, b) => rank(a).plus(rank(b)).tower5(),
    }
}

// ---------------------------------------------------------------------------
// Purity
// ---------------------------------------------------------------------------

/// One surface node: its path, the node itself, and whether a parallel
/// disjunction lies above it (within the surface region).
struct SurfaceNode<'a> {
    path: Path,
    node: &'a Cirquent,
    under_por: bool,
    parent_is_por: bool,
}

/// All surface nodes in pre-order. Surface means: not in the scope of any
/// choice operator. Choice nodes themselves are listed; their interiors are
/// not.
fn surface_nodes(c: &Cirquent) -> Vec<SurfaceNode<'_>> {
    let mut out = Vec::new();
    fn go<'a>(
        c: &'a Cirquent,
        path: &mut Vec<Step>,
        under_por: bool,
        parent_is_por: bool,
        out: &mut Vec<SurfaceNode<'a>>,
    ) {
        out.push(SurfaceNode {
            path: Path(path.clone()),
            node: c,
            under_por,
            parent_is_por,
        });
        match c {
            Cirquent::Pand(a, b) => {
                path.push(Step::Left);
                go(a, path, under_por, false, out);
                path.pop();
                path.push(Step::Right);
                go(b, path, under_por, false, out);
                path.pop();
            }
            Cirquent::Por(a, b) => {
                path.push(Step::Left);
                go(a, path, true, true, out);
                path.pop();
                path.push(Step::Right);
                go(b, path, true, true, out);
                path.pop();
            }
            // Choice operators end the surface region.
            _ => {}
        }
    }
    go(c, &mut Vec::new(), false, false, &mut out);
    out
}

/// The leaves of the parallel-disjunction spine rooted at `c` (non-`|`
/// frontier, left to right). A non-disjunction is its own single leaf.
fn por_leaves(c: &Cirquent) -> Vec<&Cirquent> {
    match c {
        Cirquent::Por(a, b) => {
            let mut out = por_leaves(a);
            out.extend(por_leaves(b));
            out
        }
        _ => vec![c],
    }
}

/// The leaves of the parallel-conjunction spine rooted at `c`.
fn pand_leaves(c: &Cirquent) -> Vec<&Cirquent> {
    match c {
        Cirquent::Pand(a, b) => {
            let mut out = pand_leaves(a);
            out.extend(pand_leaves(b));
            out
        }
        _ => vec![c],
    }
}

/// First complementary pair of atoms among `leaves` (same predicate and
/// argument list, opposite polarity): indices `(i, j)` with `i < j`.
fn complementary_pair(leaves: &[&Cirquent]) -> Option<(usize, usize)> {
    for i in 0..leaves.len() {
        let Cirquent::Atom { pred, negated, args } = leaves[i] else { continue };
        for (j, other) in leaves.iter().enumerate().skip(i + 1) {
            if let Cirquent::Atom { pred: p2, negated: n2, args: a2 } = other {
                if p2 == pred && *n2 != *negated && a2 == args {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

/// Checks the eight purity conditions, reporting the lowest-numbered
/// violation:
///
/// 1. no surface `F` (unless the cirquent is `F` itself);
/// 2. no surface `&` in the scope of `|`;
/// 3. no surface `&[c]` or `all[c]` in the scope of `|`;
/// 4. no surface disjunction with a complementary pair of atoms among its
///    disjuncts;
/// 5. no surface `T` (unless the cirquent is `T` itself);
/// 6. if the cirquent is a `&`-spine, some conjunct is neither `&[c]`- nor
///    `all[c]`-rooted;
/// 7. if the cirquent is `A &[c] B`, neither side contains cluster `c`;
/// 8. if the cirquent is `all[c] x. A`, the body does not contain `c`.
pub fn is_pure(c: &Cirquent) -> Result<(), u8> {
    let nodes = surface_nodes(c);
    // Condition 1.
    if *c != Cirquent::Bot && nodes.iter().any(|n| *n.node == Cirquent::Bot) {
        return Err(1);
    }
    // Condition 2.
    if nodes
        .iter()
        .any(|n| n.under_por && matches!(n.node, Cirquent::Pand(..)))
    {
        return Err(2);
    }
    // Condition 3.
    if nodes.iter().any(|n| {
        n.under_por && matches!(n.node, Cirquent::Chand { .. } | Cirquent::Chall { .. })
    }) {
        return Err(3);
    }
    // Condition 4: maximal surface disjunction spines.
    for n in &nodes {
        if matches!(n.node, Cirquent::Por(..)) && !n.parent_is_por
            && complementary_pair(&por_leaves(n.node)).is_some() {
                return Err(4);
            }
    }
    // Condition 5.
    if *c != Cirquent::Top && nodes.iter().any(|n| *n.node == Cirquent::Top) {
        return Err(5);
    }
    // Condition 6.
    if matches!(c, Cirquent::Pand(..)) {
        let all_choice_conj = pand_leaves(c).iter().all(|leaf| {
            matches!(leaf, Cirquent::Chand { .. } | Cirquent::Chall { .. })
        });
        if all_choice_conj {
            return Err(6);
        }
    }
    // Condition 7.
    if let Cirquent::Chand { cluster, left, right } = c {
        if left.has_cluster(cluster) || right.has_cluster(cluster) {
            return Err(7);
        }
    }
    // Condition 8.
    if let Cirquent::Chall { cluster, body, .. } = c {
        if body.has_cluster(cluster) {
            return Err(8);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Purification
// ---------------------------------------------------------------------------

/// One forward rule application in a derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    /// Rule applied.
    pub rule: RuleName,
    /// Its parameters.
    pub witness: Witness,
}

/// One purification modification, for the stage trace.
#[derive(Clone, Debug)]
pub struct StageRewrite {
    /// Stage number (1–8).
    pub stage: u8,
    /// Human-readable description of the rewrite.
    pub action: String,
    /// Whole cirquent before the modification.
    pub old: Cirquent,
    /// Whole cirquent after.
    pub new: Cirquent,
}

/// The outcome of purification.
#[derive(Clone, Debug)]
pub struct PurificationResult {
    /// The pure cirquent.
    pub pure: Cirquent,
    /// Forward rule applications deriving the original from `pure` (up to
    /// renaming of bound variables).
    pub derivation: Vec<DerivationStep>,
    /// Per-modification log, in the order the modifications were performed.
    pub stage_trace: Vec<StageRewrite>,
}

/// Applies `steps` in order, starting from `start`.
pub fn replay_derivation(
    start: &Cirquent,
    steps: &[DerivationStep],
) -> Result<Cirquent, crate::calculus::RuleError> {
    let mut cur = start.clone();
    for s in steps {
        cur = apply_rule(s.rule, &[cur], &s.witness)?;
    }
    Ok(cur)
}

/// Every variable name occurring anywhere (bound or in atom arguments).
fn all_var_names(c: &Cirquent, out: &mut BTreeSet<String>) {
    match c {
        Cirquent::Atom { args, .. } => {
            for t in args {
                if let crate::syntax::Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
        }
        Cirquent::Chall { var, body, .. } | Cirquent::Chexists { var, body, .. } => {
            out.insert(var.clone());
            all_var_names(body, out);
        }
        Cirquent::Top | Cirquent::Bot => {}
        _ => {
            for ch in c.children() {
                all_var_names(ch, out);
            }
        }
    }
}

/// Builds a replay step list by actually applying rules, so the recorded
/// derivation is correct by construction.
struct StepBuilder {
    cur: Cirquent,
    steps: Vec<DerivationStep>,
}

impl StepBuilder {
    fn new(start: Cirquent) -> StepBuilder {
        StepBuilder {
            cur: start,
            steps: Vec::new(),
        }
    }

    fn apply(&mut self, rule: RuleName, witness: Witness) {
        let next = apply_rule(rule, std::slice::from_ref(&self.cur), &witness).unwrap_or_else(|e| {
            panic!("internal replay step {rule} failed on `{}`: {e}", print(&self.cur))
        });
        self.steps.push(DerivationStep { rule, witness });
        self.cur = next;
    }

    fn at(&self, p: &Path) -> &Cirquent {
        self.cur.subtree(p).expect("builder paths are valid")
    }
}

fn extend(p: &Path, steps: &[Step]) -> Path {
    let mut v = p.0.clone();
    v.extend_from_slice(steps);
    Path(v)
}

/// `p` followed by `n` Right steps.
fn rights(p: &Path, n: usize) -> Path {
    let mut v = p.0.clone();
    v.extend(std::iter::repeat_n(Step::Right, n));
    Path(v)
}

struct Purifier {
    e: Cirquent,
    mods: Vec<Vec<DerivationStep>>,
    trace: Vec<StageRewrite>,
}

/// Safety valve against runaway loops; rank strictly decreases per
/// modification, so this is never reached by a correct implementation.
const MODIFICATION_CAP: usize = 100_000;

impl Purifier {
    /// Commits one modification: verifies the replay steps rebuild the old
    /// value from the new one, logs, and advances.
    fn commit(&mut self, stage: u8, action: String, new_e: Cirquent, steps: Vec<DerivationStep>) {
        let rebuilt = replay_derivation(&new_e, &steps).unwrap_or_else(|err| {
            panic!("stage {stage} replay failed ({action}): {err}")
        });
        assert!(
            rebuilt.alpha_eq(&self.e),
            "stage {stage} replay diverged ({action}):\n  old: {}\n  got: {}",
            print(&self.e),
            print(&rebuilt)
        );
        self.trace.push(StageRewrite {
            stage,
            action,
            old: self.e.clone(),
            new: new_e.clone(),
        });
        self.mods.push(steps);
        self.e = new_e;
        assert!(self.mods.len() < MODIFICATION_CAP, "purification did not converge");
    }

    fn replace(&self, path: &Path, piece: Cirquent) -> Cirquent {
        self.e.replace_at(path, piece).expect("path from a fresh scan")
    }

    fn fresh_vars_for(&self, extra: &BTreeSet<String>) -> BTreeSet<String> {
        let mut avoid = BTreeSet::new();
        all_var_names(&self.e, &mut avoid);
        avoid.extend(extra.iter().cloned());
        avoid
    }
}

/// Purifies a closed cirquent, returning the pure result, a replayable
/// derivation of the input from it, and the stage trace.
pub fn purify(c: &Cirquent) -> PurificationResult {
    assert!(c.is_closed(), "purification is defined on closed cirquents");
    let mut p = Purifier {
        e: c.clone(),
        mods: Vec::new(),
        trace: Vec::new(),
    };
    loop_stage(&mut p, 1, stage1_once);
    loop_stage(&mut p, 2, stage2_once);
    loop_stage(&mut p, 3, stage3_once);
    loop_stage(&mut p, 4, stage4_once);
    loop_stage(&mut p, 5, stage5_once);
    loop_stage(&mut p, 6, stage6_once);
    loop_stage(&mut p, 7, stage7_once);
    loop_stage(&mut p, 8, stage8_once);
    assert!(
        is_pure(&p.e).is_ok(),
        "purification left `{}` impure (condition {:?})",
        print(&p.e),
        is_pure(&p.e).unwrap_err()
    );
    let derivation = p.mods.into_iter().rev().flatten().collect();
    PurificationResult {
        pure: p.e,
        derivation,
        stage_trace: p.trace,
    }
}

fn loop_stage(p: &mut Purifier, _stage: u8, once: fn(&mut Purifier) -> bool) {
    while once(p) {}
}

/// Stage 1: eliminate surface `F` disjuncts (Por-identity) and conjuncts
/// (Pand-domination).
fn stage1_once(p: &mut Purifier) -> bool {
    // Disjunction forms first.
    for n in surface_nodes(&p.e) {
        let Cirquent::Por(a, b) = n.node else { continue };
        if **a == Cirquent::Bot {
            let new_e = p.replace(&n.path, (**b).clone());
            let mut sb = StepBuilder::new(new_e.clone());
            sb.apply(RuleName::PorIdentity, Witness::at(n.path.clone()));
            sb.apply(RuleName::PorCommutativity, Witness::at(n.path.clone()));
            p.commit(1, format!("drop F disjunct at {}", n.path), new_e, sb.steps);
            return true;
        }
        if **b == Cirquent::Bot {
            let new_e = p.replace(&n.path, (**a).clone());
            let mut sb = StepBuilder::new(new_e.clone());
            sb.apply(RuleName::PorIdentity, Witness::at(n.path.clone()));
            p.commit(1, format!("drop F disjunct at {}", n.path), new_e, sb.steps);
            return true;
        }
    }
    for n in surface_nodes(&p.e) {
        let Cirquent::Pand(a, b) = n.node else { continue };
        let (is_left, other) = if **a == Cirquent::Bot {
            (true, (**b).clone())
        } else if **b == Cirquent::Bot {
            (false, (**a).clone())
        } else {
            continue;
        };
        let new_e = p.replace(&n.path, Cirquent::Bot);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(
            RuleName::PandDomination,
            Witness {
                path: Some(n.path.clone()),
                intro: Some(other),
                ..Witness::default()
            },
        );
        if is_left {
            sb.apply(RuleName::PandCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(1, format!("collapse F conjunction at {}", n.path), new_e, sb.steps);
        return true;
    }
    false
}

/// Stage 2: distribute surface parallel conjunctions over disjunctions
/// (Pand-distribution).
fn stage2_once(p: &mut Purifier) -> bool {
    for n in surface_nodes(&p.e) {
        let Cirquent::Por(l, r) = n.node else { continue };
        let (a, b, c, flipped) = match (&**l, &**r) {
            (Cirquent::Pand(a, b), _) => (a, b, r, false),
            (_, Cirquent::Pand(a, b)) => (a, b, l, true),
            _ => continue,
        };
        let piece = Cirquent::Pand(
            Box::new(Cirquent::Por(a.clone(), c.clone())),
            Box::new(Cirquent::Por(b.clone(), c.clone())),
        );
        let new_e = p.replace(&n.path, piece);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::PandDistribution, Witness::at(n.path.clone()));
        if flipped {
            sb.apply(RuleName::PorCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(2, format!("distribute & over | at {}", n.path), new_e, sb.steps);
        return true;
    }
    false
}

/// Stage 3: (a) distribute choice conjunctions out of disjunctions, then
/// (b) choice universal quantifiers (renaming the bound variable first when
/// the other disjunct mentions it).
fn stage3_once(p: &mut Purifier) -> bool {
    // (a) Chand-distribution.
    for n in surface_nodes(&p.e) {
        let Cirquent::Por(l, r) = n.node else { continue };
        let (cluster, a, b, c, flipped) = match (&**l, &**r) {
            (Cirquent::Chand { cluster, left, right }, _) => (cluster, left, right, r, false),
            (_, Cirquent::Chand { cluster, left, right }) => (cluster, left, right, l, true),
            _ => continue,
        };
        let piece = Cirquent::Chand {
            cluster: cluster.clone(),
            left: Box::new(Cirquent::Por(a.clone(), c.clone())),
            right: Box::new(Cirquent::Por(b.clone(), c.clone())),
        };
        let new_e = p.replace(&n.path, piece);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::ChandDistribution, Witness::at(n.path.clone()));
        if flipped {
            sb.apply(RuleName::PorCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(3, format!("distribute &[_] over | at {}", n.path), new_e, sb.steps);
        return true;
    }
    // (b) Chall-distribution.
    for n in surface_nodes(&p.e) {
        let Cirquent::Por(l, r) = n.node else { continue };
        let (cluster, var, body, other, flipped) = match (&**l, &**r) {
            (Cirquent::Chall { cluster, var, body }, _) => (cluster, var, body, r, false),
            (_, Cirquent::Chall { cluster, var, body }) => (cluster, var, body, l, true),
            _ => continue,
        };
        let (var2, body2) = if other.free_vars().contains(var.as_str()) {
            let avoid = p.fresh_vars_for(&BTreeSet::new());
            let fresh = fresh_var(&avoid);
            let renamed = subst_var_avoiding(body, var, &fresh);
            (fresh, renamed)
        } else {
            (var.clone(), (**body).clone())
        };
        let piece = Cirquent::Chall {
            cluster: cluster.clone(),
            var: var2,
            body: Box::new(Cirquent::Por(Box::new(body2), other.clone())),
        };
        let new_e = p.replace(&n.path, piece);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::ChallDistribution, Witness::at(n.path.clone()));
        if flipped {
            sb.apply(RuleName::PorCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(3, format!("distribute all[_] over | at {}", n.path), new_e, sb.steps);
        return true;
    }
    false
}

/// Number of leaves of the `|`-spine rooted at `c`.
fn por_leaf_count(c: &Cirquent) -> usize {
    match c {
        Cirquent::Por(a, b) => por_leaf_count(a) + por_leaf_count(b),
        _ => 1,
    }
}

/// Rotates `(A | B) | C` at `p` into `A | (B | C)` by commutativity and
/// associativity steps.
fn right_rot(sb: &mut StepBuilder, p: &Path) {
    sb.apply(RuleName::PorCommutativity, Witness::at(p.clone()));
    sb.apply(RuleName::PorAssociativity, Witness::at(p.clone()));
    sb.apply(RuleName::PorCommutativity, Witness::at(p.clone()));
    sb.apply(RuleName::PorAssociativity, Witness::at(p.clone()));
    sb.apply(RuleName::PorCommutativity, Witness::at(p.clone()));
}

/// Reassociates the `|`-spine at `p` into a right comb.
fn to_right_comb(sb: &mut StepBuilder, p: &Path) {
    loop {
        let node = sb.at(p);
        let Cirquent::Por(l, _) = node else { return };
        if matches!(**l, Cirquent::Por(..)) {
            right_rot(sb, p);
        } else {
            break;
        }
    }
    if matches!(sb.at(p), Cirquent::Por(..)) {
        let next = extend(p, &[Step::Right]);
        to_right_comb(sb, &next);
    }
}

/// Swaps adjacent leaves `t` and `t+1` of the right comb of `n` leaves at
/// `base`.
fn comb_swap(sb: &mut StepBuilder, base: &Path, n: usize, t: usize) {
    let p = rights(base, t);
    if t == n - 2 {
        sb.apply(RuleName::PorCommutativity, Witness::at(p));
    } else {
        sb.apply(RuleName::PorAssociativity, Witness::at(p.clone()));
        sb.apply(
            RuleName::PorCommutativity,
            Witness::at(extend(&p, &[Step::Left])),
        );
        right_rot(sb, &p);
    }
}

/// Reshapes the right comb at `p` (whose leaf sequence already matches
/// `target`'s) into `target`'s exact tree shape.
fn comb_to_shape(sb: &mut StepBuilder, p: &Path, target: &Cirquent) {
    let Cirquent::Por(tl, tr) = target else {
        debug_assert_eq!(sb.at(p), target, "leaf mismatch while reshaping");
        return;
    };
    let k = por_leaf_count(tl);
    for _ in 0..k.saturating_sub(1) {
        sb.apply(RuleName::PorAssociativity, Witness::at(p.clone()));
    }
    let left = extend(p, &[Step::Left]);
    to_right_comb(sb, &left);
    comb_to_shape(sb, &left, tl);
    let right = extend(p, &[Step::Right]);
    comb_to_shape(sb, &right, tr);
}

/// Stage 4: collapse a surface disjunction containing a complementary pair
/// of atoms to `T` (Trivialization plus Por-domination, -commutativity, and
/// -associativity helpers).
fn stage4_once(p: &mut Purifier) -> bool {
    for n in surface_nodes(&p.e) {
        if !matches!(n.node, Cirquent::Por(..)) || n.parent_is_por {
            continue;
        }
        let leaves_ref = por_leaves(n.node);
        let Some((i, j)) = complementary_pair(&leaves_ref) else { continue };
        let leaves: Vec<Cirquent> = leaves_ref.into_iter().cloned().collect();
        let target = n.node.clone();
        let path = n.path.clone();
        let positive = if matches!(&leaves[i], Cirquent::Atom { negated: false, .. }) {
            leaves[i].clone()
        } else {
            leaves[j].clone()
        };
        let nn = leaves.len();
        let new_e = p.replace(&path, Cirquent::Top);
        let mut sb = StepBuilder::new(new_e.clone());
        if nn == 2 {
            sb.apply(
                RuleName::Trivialization,
                Witness {
                    path: Some(path.clone()),
                    intro: Some(positive),
                    ..Witness::default()
                },
            );
            // Trivialization yields `~A | A`; flip if the target has the
            // positive atom first.
            if matches!(&leaves[0], Cirquent::Atom { negated: false, .. }) {
                sb.apply(RuleName::PorCommutativity, Witness::at(path.clone()));
            }
        } else {
            // Grow a right comb [others..., ~A, A] from T, ...
            let others: Vec<Cirquent> = leaves
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, l)| l.clone())
                .collect();
            for (k, leaf) in others.iter().enumerate() {
                sb.apply(
                    RuleName::PorDomination,
                    Witness {
                        path: Some(rights(&path, k)),
                        intro: Some(leaf.clone()),
                        ..Witness::default()
                    },
                );
            }
            sb.apply(
                RuleName::Trivialization,
                Witness {
                    path: Some(rights(&path, others.len())),
                    intro: Some(positive.clone()),
                    ..Witness::default()
                },
            );
            // ... sort its leaves into the target order by adjacent swaps ...
            let mut cur: Vec<Cirquent> = others;
            cur.push(leaves[if matches!(&leaves[i], Cirquent::Atom { negated: true, .. }) {
                i
            } else {
                j
            }]
            .clone());
            cur.push(positive.clone());
            for (t, want) in leaves.iter().enumerate() {
                let s = (t..nn)
                    .find(|&s| cur[s] == *want)
                    .expect("comb leaves are a permutation of the target leaves");
                for u in (t..s).rev() {
                    comb_swap(&mut sb, &path, nn, u);
                    cur.swap(u, u + 1);
                }
            }
            // ... and reshape the comb into the target's exact tree.
            comb_to_shape(&mut sb, &path, &target);
        }
        p.commit(
            4,
            format!("collapse tautological disjunction at {path}"),
            new_e,
            sb.steps,
        );
        return true;
    }
    false
}

/// Stage 5: eliminate surface `T` disjuncts (Por-domination) and conjuncts
/// (Pand-identity).
fn stage5_once(p: &mut Purifier) -> bool {
    for n in surface_nodes(&p.e) {
        let Cirquent::Por(a, b) = n.node else { continue };
        let (is_left, other) = if **a == Cirquent::Top {
            (true, (**b).clone())
        } else if **b == Cirquent::Top {
            (false, (**a).clone())
        } else {
            continue;
        };
        let new_e = p.replace(&n.path, Cirquent::Top);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(
            RuleName::PorDomination,
            Witness {
                path: Some(n.path.clone()),
                intro: Some(other),
                ..Witness::default()
            },
        );
        if is_left {
            sb.apply(RuleName::PorCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(5, format!("collapse T disjunction at {}", n.path), new_e, sb.steps);
        return true;
    }
    for n in surface_nodes(&p.e) {
        let Cirquent::Pand(a, b) = n.node else { continue };
        let (is_left, kept) = if **a == Cirquent::Top {
            (true, (**b).clone())
        } else if **b == Cirquent::Top {
            (false, (**a).clone())
        } else {
            continue;
        };
        let new_e = p.replace(&n.path, kept);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::PandIdentity, Witness::at(n.path.clone()));
        if is_left {
            sb.apply(RuleName::PandCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(5, format!("drop T conjunct at {}", n.path), new_e, sb.steps);
        return true;
    }
    false
}

/// Stage 6: replace a surface parallel conjunction of two choice-rooted
/// conjuncts by a fresh choice conjunction over both resolution orders
/// (the chotomy rules), renaming bound variables where a conjunct would
/// capture them.
fn stage6_once(p: &mut Purifier) -> bool {
    // (a) Chandchotomy.
    for n in surface_nodes(&p.e) {
        let Cirquent::Pand(l, r) = n.node else { continue };
        let (Cirquent::Chand { cluster: a_cl, left: a, right: b }, Cirquent::Chand { cluster: b_cl, left: c, right: d }) =
            (&**l, &**r)
        else {
            continue;
        };
        let fresh = fresh_cluster_name(&p.e);
        let chand = |cl: &str, x: Cirquent, y: Cirquent| Cirquent::Chand {
            cluster: cl.to_string(),
            left: Box::new(x),
            right: Box::new(y),
        };
        let pand = |x: Cirquent, y: Cirquent| Cirquent::Pand(Box::new(x), Box::new(y));
        let piece = chand(
            &fresh,
            chand(
                a_cl,
                pand((**a).clone(), (**r).clone()),
                pand((**b).clone(), (**r).clone()),
            ),
            chand(
                b_cl,
                pand((**l).clone(), (**c).clone()),
                pand((**l).clone(), (**d).clone()),
            ),
        );
        let new_e = p.replace(&n.path, piece);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::Chandchotomy, Witness::at(n.path.clone()));
        p.commit(6, format!("chotomy of &[_] & &[_] at {}", n.path), new_e, sb.steps);
        return true;
    }
    // (b) Challchotomy.
    for n in surface_nodes(&p.e) {
        let Cirquent::Pand(l, r) = n.node else { continue };
        let (Cirquent::Chall { cluster: a_cl, var: x, body: a }, Cirquent::Chall { cluster: b_cl, var: y, body: b }) =
            (&**l, &**r)
        else {
            continue;
        };
        let fresh = fresh_cluster_name(&p.e);
        let mut avoid = p.fresh_vars_for(&BTreeSet::new());
        let (x2, a2) = if r.free_vars().contains(x.as_str()) {
            let v = fresh_var(&avoid);
            avoid.insert(v.clone());
            let renamed = subst_var_avoiding(a, x, &v);
            (v, renamed)
        } else {
            (x.clone(), (**a).clone())
        };
        let (y2, b2) = if l.free_vars().contains(y.as_str()) {
            let v = fresh_var(&avoid);
            let renamed = subst_var_avoiding(b, y, &v);
            (v, renamed)
        } else {
            (y.clone(), (**b).clone())
        };
        let piece = Cirquent::Chand {
            cluster: fresh,
            left: Box::new(Cirquent::Chall {
                cluster: a_cl.clone(),
                var: x2,
                body: Box::new(Cirquent::Pand(Box::new(a2), Box::new((**r).clone()))),
            }),
            right: Box::new(Cirquent::Chall {
                cluster: b_cl.clone(),
                var: y2,
                body: Box::new(Cirquent::Pand(Box::new((**l).clone()), Box::new(b2))),
            }),
        };
        let new_e = p.replace(&n.path, piece);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::Challchotomy, Witness::at(n.path.clone()));
        p.commit(6, format!("chotomy of all[_] & all[_] at {}", n.path), new_e, sb.steps);
        return true;
    }
    // (c) Chandallchotomy, either orientation.
    for n in surface_nodes(&p.e) {
        let Cirquent::Pand(l, r) = n.node else { continue };
        let (chand_part, chall_part, flipped) = match (&**l, &**r) {
            (Cirquent::Chand { .. }, Cirquent::Chall { .. }) => (&**l, &**r, false),
            (Cirquent::Chall { .. }, Cirquent::Chand { .. }) => (&**r, &**l, true),
            _ => continue,
        };
        let Cirquent::Chand { cluster: a_cl, left: a, right: b } = chand_part else {
            unreachable!()
        };
        let Cirquent::Chall { cluster: b_cl, var: x, body: c } = chall_part else {
            unreachable!()
        };
        let fresh = fresh_cluster_name(&p.e);
        let (x2, c2) = if chand_part.free_vars().contains(x.as_str()) {
            let avoid = p.fresh_vars_for(&BTreeSet::new());
            let v = fresh_var(&avoid);
            let renamed = subst_var_avoiding(c, x, &v);
            (v, renamed)
        } else {
            (x.clone(), (**c).clone())
        };
        let piece = Cirquent::Chand {
            cluster: fresh,
            left: Box::new(Cirquent::Chand {
                cluster: a_cl.clone(),
                left: Box::new(Cirquent::Pand(Box::new((**a).clone()), Box::new(chall_part.clone()))),
                right: Box::new(Cirquent::Pand(Box::new((**b).clone()), Box::new(chall_part.clone()))),
            }),
            right: Box::new(Cirquent::Chall {
                cluster: b_cl.clone(),
                var: x2,
                body: Box::new(Cirquent::Pand(Box::new(chand_part.clone()), Box::new(c2))),
            }),
        };
        let new_e = p.replace(&n.path, piece);
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(RuleName::Chandallchotomy, Witness::at(n.path.clone()));
        if flipped {
            sb.apply(RuleName::PandCommutativity, Witness::at(n.path.clone()));
        }
        p.commit(6, format!("chotomy of &[_] & all[_] at {}", n.path), new_e, sb.steps);
        return true;
    }
    false
}

/// First node (pre-order) inside `c` belonging to the named cluster.
fn find_cluster_node(c: &Cirquent, cluster: &str) -> Option<Path> {
    c.all_paths().into_iter().find(|p| {
        c.subtree(p)
            .ok()
            .and_then(|n| n.cluster_here())
            .is_some_and(|(_, name)| name == cluster)
    })
}

/// Stage 7: when the cirquent is a choice conjunction whose components still
/// contain the root cluster, cleanse those inner nodes one by one.
fn stage7_once(p: &mut Purifier) -> bool {
    let Cirquent::Chand { cluster, left, right } = &p.e else { return false };
    let cluster = cluster.clone();
    if let Some(rho) = find_cluster_node(left, &cluster) {
        let Cirquent::Chand { left: il, right: ir, .. } = left.subtree(&rho).expect("found") else {
            unreachable!("cluster kinds are consistent in valid cirquents");
        };
        let (kept, dropped) = ((**il).clone(), (**ir).clone());
        let new_left = left.replace_at(&rho, kept).expect("path from scan");
        let new_e = Cirquent::Chand {
            cluster: cluster.clone(),
            left: Box::new(new_left),
            right: right.clone(),
        };
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(
            RuleName::LeftChandCleansing,
            Witness {
                path: Some(Path::default()),
                hole: Some(rho.clone()),
                intro: Some(dropped),
                ..Witness::default()
            },
        );
        p.commit(7, format!("cleanse left component at {rho}"), new_e, sb.steps);
        return true;
    }
    if let Some(rho) = find_cluster_node(right, &cluster) {
        let Cirquent::Chand { left: il, right: ir, .. } = right.subtree(&rho).expect("found")
        else {
            unreachable!("cluster kinds are consistent in valid cirquents");
        };
        let (dropped, kept) = ((**il).clone(), (**ir).clone());
        let new_right = right.replace_at(&rho, kept).expect("path from scan");
        let new_e = Cirquent::Chand {
            cluster: cluster.clone(),
            left: left.clone(),
            right: Box::new(new_right),
        };
        let mut sb = StepBuilder::new(new_e.clone());
        sb.apply(
            RuleName::RightChandCleansing,
            Witness {
                path: Some(Path::default()),
                hole: Some(rho.clone()),
                intro: Some(dropped),
                ..Witness::default()
            },
        );
        p.commit(7, format!("cleanse right component at {rho}"), new_e, sb.steps);
        return true;
    }
    false
}

/// Stage 8: when the cirquent is a choice universal quantifier whose body
/// still contains the root cluster, cleanse those inner quantifiers,
/// renaming any intervening binders of the root variable first.
fn stage8_once(p: &mut Purifier) -> bool {
    let Cirquent::Chall { cluster, var, body } = &p.e else { return false };
    let (cluster, x) = (cluster.clone(), var.clone());
    let Some(rho) = find_cluster_node(body, &cluster) else { return false };

    // Rename intervening binders of x above the hole so that restoring the
    // inner body's variable cannot be captured.
    let mut body2 = (**body).clone();
    loop {
        let mut renamed_one = false;
        for plen in 0..rho.0.len() {
            let prefix = Path(rho.0[..plen].to_vec());
            let node = body2.subtree(&prefix).expect("prefix of a valid path");
            let is_x_binder = matches!(
                node,
                Cirquent::Chall { var: v, .. } | Cirquent::Chexists { var: v, .. } if *v == x
            );
            if !is_x_binder {
                continue;
            }
            let mut avoid = BTreeSet::new();
            all_var_names(&p.e, &mut avoid);
            all_var_names(&body2, &mut avoid);
            let w = fresh_var(&avoid);
            let renamed = match node {
                Cirquent::Chall { cluster: cl, body: inner, .. } => Cirquent::Chall {
                    cluster: cl.clone(),
                    var: w.clone(),
                    body: Box::new(subst_var_avoiding(inner, &x, &w)),
                },
                Cirquent::Chexists { cluster: cl, body: inner, .. } => Cirquent::Chexists {
                    cluster: cl.clone(),
                    var: w.clone(),
                    body: Box::new(subst_var_avoiding(inner, &x, &w)),
                },
                _ => unreachable!(),
            };
            body2 = body2.replace_at(&prefix, renamed).expect("prefix valid");
            renamed_one = true;
            break;
        }
        if !renamed_one {
            break;
        }
    }

    let Cirquent::Chall { var: y, body: inner, .. } = body2.subtree(&rho).expect("path stable")
    else {
        unreachable!("cluster kinds are consistent in valid cirquents");
    };
    let (y, inner) = (y.clone(), (**inner).clone());
    let restored = subst_var_avoiding(&inner, &y, &x);
    let new_body = body2.replace_at(&rho, restored).expect("path stable");
    let new_e = Cirquent::Chall {
        cluster: cluster.clone(),
        var: x.clone(),
        body: Box::new(new_body),
    };
    let mut sb = StepBuilder::new(new_e.clone());
    sb.apply(
        RuleName::ChallCleansing,
        Witness {
            path: Some(Path::default()),
            hole: Some(rho.clone()),
            var: Some(y),
            intro: Some(inner),
            ..Witness::default()
        },
    );
    p.commit(8, format!("cleanse quantifier body at {rho}"), new_e, sb.steps);
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn c(text: &str) -> Cirquent {
        parse(text).expect("test cirquent parses")
    }

    fn fin(n: u64) -> Rank {
        Rank::Finite(BigUint::from(n))
    }

    #[test]
    fn rank_ground_truths() {
        assert_eq!(rank(&c("p(0)")), fin(1));
        assert_eq!(rank(&c("T")), fin(1));
        assert_eq!(rank(&c("p & q")), fin(25));
        assert_eq!(rank(&c("p | q")), fin(3125));
        assert_eq!(rank(&c("p &[a] q")), fin(2));
        assert_eq!(rank(&c("p |[a] q")), fin(2));
        assert_eq!(rank(&c("all[a] x. p(x)")), fin(2));
        assert_eq!(rank(&c("ex[a] x. p(x)")), fin(2));
        // Height-3 tower: (p | q) | r has k = 3126 -> overflow; but a
        // disjunction whose children sum to 3 is materialized.
        assert!(matches!(rank(&c("(p | q) | r")), Rank::Overflow(_)));
        let tower3 = rank(&c("(p &[a] q) | r")); // k = 3 -> 5^3125
        assert_eq!(tower3, Rank::Finite(BigUint::from(5u32).pow(3125u32)));
        // Pand materializes larger exponents.
        assert_eq!(
            rank(&c("(p | q) & r")),
            Rank::Finite(BigUint::from(5u32).pow(3126u32))
        );
    }

    #[test]
    fn rank_ordering_is_partial() {
        let a = rank(&c("p & q"));
        let b = rank(&c("p | q"));
        assert!(a < b);
        let o = rank(&c("(p | q) | r"));
        assert!(o.partial_cmp(&a).is_none());
        assert!(o != o.clone(), "overflow compares like NaN");
    }

    #[test]
    fn rank_monotone_under_replacement() {
        // Replacing a subtree by a smaller-ranked one shrinks the whole.
        let big = c("(p & q) &[a] r");
        let small = c("(p &[b] q) &[a] r");
        assert!(rank(&small) < rank(&big));
    }

    #[test]
    fn purity_examples() {
        assert_eq!(is_pure(&c("F")), Ok(()));
        assert_eq!(is_pure(&c("T")), Ok(()));
        assert_eq!(is_pure(&c("p(0)")), Ok(()));
        assert_eq!(is_pure(&c("p | F")), Err(1));
        assert_eq!(is_pure(&c("(p & q) | r")), Err(2));
        assert_eq!(is_pure(&c("(p &[a] q) | r")), Err(3));
        assert_eq!(is_pure(&c("(all[a] x. p(x)) | r")), Err(3));
        assert_eq!(is_pure(&c("q | (~p(0) | p(0))")), Err(4));
        assert_eq!(is_pure(&c("T | p")), Err(5));
        assert_eq!(is_pure(&c("(p &[a] q) & (r &[b] s)")), Err(6));
        assert_eq!(is_pure(&c("(p &[a] q) & all[b] x. r(x)")), Err(6));
        assert_eq!(is_pure(&c("p &[c] (q &[c] r)")), Err(7));
        assert_eq!(is_pure(&c("all[c] x. (p(x) & all[c] y. q(y))")), Err(8));
        // Choice-rooted disjuncts are fine under | (condition 3 bans only
        // chand/chall), and deep impurities below choice nodes don't count.
        assert_eq!(is_pure(&c("(p |[a] q) | r")), Ok(()));
        assert_eq!(is_pure(&c("(ex[a] x. p(x)) | r")), Ok(()));
        assert_eq!(is_pure(&c("p &[a] (q | F)")), Ok(()));
        // A conjunction with one non-choice conjunct is fine.
        assert_eq!(is_pure(&c("(p &[a] q) & r")), Ok(()));
    }

    /// Purify and check the advertised invariants on one input.
    fn purify_checked(text: &str) -> PurificationResult {
        let input = c(text);
        let res = purify(&input);
        assert!(is_pure(&res.pure).is_ok(), "pure output for {text}");
        let rebuilt = replay_derivation(&res.pure, &res.derivation)
            .unwrap_or_else(|e| panic!("replay failed for {text}: {e}"));
        assert!(
            rebuilt.alpha_eq(&input),
            "replay of {text} produced {}",
            print(&rebuilt)
        );
        // Every modification strictly decreases rank when computable.
        for rw in &res.stage_trace {
            if let (Rank::Finite(old), Rank::Finite(new)) = (rank(&rw.old), rank(&rw.new)) {
                assert!(
                    new < old,
                    "stage {} did not decrease rank: {} -> {}",
                    rw.stage,
                    print(&rw.old),
                    print(&rw.new)
                );
            }
        }
        res
    }

    #[test]
    fn purify_identity_on_pure_inputs() {
        for text in ["T", "F", "p(0)", "p &[a] q", "all[a] x. p(x)", "p | q"] {
            let res = purify_checked(text);
            assert_eq!(res.pure, c(text));
            assert!(res.derivation.is_empty());
        }
    }

    #[test]
    fn purify_stage1_examples() {
        let res = purify_checked("F | p");
        assert_eq!(res.pure, c("p"));
        let res = purify_checked("p | F");
        assert_eq!(res.pure, c("p"));
        let res = purify_checked("q & F");
        assert_eq!(res.pure, c("F"));
        // Nested: (p & F) | q -> F | q -> q.
        let res = purify_checked("(p & F) | q");
        assert_eq!(res.pure, c("q"));
    }

    #[test]
    fn purify_stage2_distributes() {
        let res = purify_checked("(p & q) | r");
        assert_eq!(res.pure, c("(p | r) & (q | r)"));
        let res = purify_checked("r | (p & q)");
        assert_eq!(res.pure, c("(p | r) & (q | r)"));
    }

    #[test]
    fn purify_stage3_distributes_choice() {
        let res = purify_checked("(p &[a] q) | r");
        assert_eq!(res.pure, c("(p | r) &[a] (q | r)"));
        let res = purify_checked("r | (p &[a] q)");
        assert_eq!(res.pure, c("(p | r) &[a] (q | r)"));
        let res = purify_checked("all[a] x. p(x) | q");
        assert_eq!(res.pure, c("all[a] x. (p(x) | q)"));
        let res = purify_checked("q | all[a] x. p(x)");
        assert_eq!(res.pure, c("all[a] x. (p(x) | q)"));
    }

    #[test]
    fn purify_stage4_trivializes() {
        let res = purify_checked("~p(0) | p(0)");
        assert_eq!(res.pure, c("T"));
        let res = purify_checked("p(0) | ~p(0)");
        assert_eq!(res.pure, c("T"));
        // Longer spine with distractors, arbitrary association.
        let res = purify_checked("(q | ~p(0)) | (r | p(0))");
        assert_eq!(res.pure, c("T"));
        // The pair must match arguments exactly.
        let res = purify_checked("~p(0) | p(1)");
        assert_eq!(res.pure, c("~p(0) | p(1)"));
    }

    #[test]
    fn purify_stage5_absorbs_top() {
        let res = purify_checked("T | p");
        assert_eq!(res.pure, c("T"));
        let res = purify_checked("p & T");
        assert_eq!(res.pure, c("p"));
        let res = purify_checked("T & p");
        assert_eq!(res.pure, c("p"));
    }

    #[test]
    fn purify_stage6_chotomies() {
        // Challchotomy with both clusters equal.
        let res = purify_checked("all[a] x. p(x) & all[a] x. p(x)");
        let Cirquent::Chand { cluster, left, right } = &res.pure else {
            panic!("expected a chand root, got {}", print(&res.pure));
        };
        assert_eq!(cluster, "_k1");
        assert!(left.alpha_eq(&c("all[a] x. (p(x) & all[a] x. p(x))")));
        assert!(right.alpha_eq(&c("all[a] x. (all[a] x. p(x) & p(x))")));
        // Chandchotomy.
        let res = purify_checked("(p &[a] q) & (r &[b] s)");
        assert!(matches!(&res.pure, Cirquent::Chand { cluster, .. } if cluster == "_k1"));
        // Chandallchotomy, flipped orientation.
        let res = purify_checked("all[b] x. r(x) & (p &[a] q)");
        assert!(matches!(&res.pure, Cirquent::Chand { cluster, .. } if cluster == "_k1"));
    }

    #[test]
    fn purify_stage7_cleanses_root_chand() {
        let res = purify_checked("p &[c] (q &[c] r)");
        assert_eq!(res.pure, c("p &[c] r"));
        let res = purify_checked("(p &[c] q) &[c] r");
        assert_eq!(res.pure, c("p &[c] r"));
        // Multiple inner nodes, both sides.
        let res = purify_checked("(p &[c] q) &[c] (r &[c] s)");
        assert_eq!(res.pure, c("p &[c] s"));
    }

    #[test]
    fn purify_stage8_cleanses_root_chall() {
        let res = purify_checked("all[c] x. (~p(x) | all[c] y. p(y))");
        // The inner quantifier's variable is restored to the root binder.
        assert!(res.pure.alpha_eq(&c("all[c] x. (~p(x) | p(x))")));
        // An intervening binder of x forces a rename but still cleanses.
        let res = purify_checked("all[c] x. all[d] x. (~p(x) | all[c] y. q(y))");
        let expected = c("all[c] x. all[d] z. (~p(z) | q(x))");
        assert!(
            res.pure.alpha_eq(&expected),
            "got {}",
            print(&res.pure)
        );
    }

    #[test]
    fn purify_multi_stage_pipeline() {
        // Distribution exposes a tautological disjunction, which collapses
        // and feeds the T-absorption stage.
        let res = purify_checked("(~p(0) & q) | p(0)");
        assert_eq!(res.pure, c("q | p(0)"));
        // The worked expansion shape: distribute, then nothing else fires.
        let res = purify_checked("(~p(0) & ~p(0)) | ex[c] x. p(x)");
        assert_eq!(
            res.pure,
            c("(~p(0) | ex[c] x. p(x)) & (~p(0) | ex[c] x. p(x))")
        );
    }

    #[test]
    fn purify_rejects_open_input() {
        let open = c("p(x)");
        let result = std::panic::catch_unwind(|| purify(&open));
        assert!(result.is_err());
    }
}

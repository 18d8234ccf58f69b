//! Game semantics: moves, run legality, resolvents, residues,
//! interpretations, the win relation, and tautology checking over ground
//! atoms.
//!
//! A play of a cirquent is a *run*: a sequence of moves, each resolving one
//! cluster to a choice. The environment resolves `&[c]` / `all[c]` clusters,
//! the machine resolves `|[c]` / `ex[c]` clusters. Whether the machine has
//! won a finished run is decided by a direct recursion over the cirquent
//! ([`won`]); equivalently, by first reducing the cirquent to its choice-free
//! *residue* and evaluating that classically ([`residue`], [`eval_truth`]).

use crate::syntax::{Cirquent, ClusterKind, ParseError, Term};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// The two players of a cirquent game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    /// The machine (verifier); resolves `|[c]` and `ex[c]` clusters.
    Machine,
    /// The environment (falsifier); resolves `&[c]` and `all[c]` clusters.
    Environment,
}

impl Player {
    /// The player who owns moves on clusters of the given kind.
    pub fn for_kind(kind: ClusterKind) -> Player {
        if kind.is_machine() {
            Player::Machine
        } else {
            Player::Environment
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Machine => write!(f, "M"),
            Player::Environment => write!(f, "E"),
        }
    }
}

/// One move: a player resolves a cluster to a choice.
///
/// For binary clusters the choice is 0 (left) or 1 (right); for quantifier
/// clusters it is the chosen constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    /// Who moved.
    pub player: Player,
    /// Kind of the cluster moved on.
    pub kind: ClusterKind,
    /// Name of the cluster moved on.
    pub cluster: String,
    /// The choice: 0/1 for binary clusters, a constant for quantifiers.
    pub choice: u64,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}.{}", self.player, self.cluster, self.choice)
    }
}

/// A violation of one of the four legality conditions.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("move {index} violates legality condition {condition}: {detail}")]
pub struct LegalityViolation {
    /// Which of conditions 1-4 failed (the first one to fail).
    pub condition: u8,
    /// Zero-based index of the offending move.
    pub index: usize,
    /// Human-readable description.
    pub detail: String,
}

/// A run that has passed [`check_legal`]. All semantic operations take legal
/// runs; illegal runs are rejected at this boundary, never truncated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LegalRun(Vec<Move>);

impl LegalRun {
    /// The empty run.
    pub fn empty() -> LegalRun {
        LegalRun(Vec::new())
    }

    /// The moves, in order. Semantic operations depend only on the set.
    pub fn moves(&self) -> &[Move] {
        &self.0
    }

    /// The choice made on the named cluster of the given kind, if any.
    pub fn choice_for(&self, kind: ClusterKind, cluster: &str) -> Option<u64> {
        self.0
            .iter()
            .find(|m| m.kind == kind && m.cluster == cluster)
            .map(|m| m.choice)
    }
}

impl fmt::Display for LegalRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Checks the four legality conditions and wraps the run on success:
///
/// 1. binary-cluster choices are 0 or 1;
/// 2. `&[c]` / `all[c]` clusters are moved by the environment;
/// 3. `|[c]` / `ex[c]` clusters are moved by the machine;
/// 4. no two moves share a cluster name.
///
/// The report names the first failing condition and the zero-based index of
/// the offending move.
pub fn check_legal(moves: Vec<Move>) -> Result<LegalRun, LegalityViolation> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for (index, m) in moves.iter().enumerate() {
        if m.kind.is_binary() && m.choice > 1 {
            return Err(LegalityViolation {
                condition: 1,
                index,
                detail: format!("choice {} on binary cluster `{}`", m.choice, m.cluster),
            });
        }
        if !m.kind.is_machine() && m.player != Player::Environment {
            return Err(LegalityViolation {
                condition: 2,
                index,
                detail: format!("cluster `{}` belongs to the environment", m.cluster),
            });
        }
        if m.kind.is_machine() && m.player != Player::Machine {
            return Err(LegalityViolation {
                condition: 3,
                index,
                detail: format!("cluster `{}` belongs to the machine", m.cluster),
            });
        }
        if !seen.insert(&m.cluster) {
            return Err(LegalityViolation {
                condition: 4,
                index,
                detail: format!("second move on cluster `{}`", m.cluster),
            });
        }
    }
    Ok(LegalRun(moves))
}

/// Errors from semantic operations.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    /// [`resolvent`] was applied to a node that is not choice-rooted.
    #[error("resolvent requires a choice-rooted cirquent, got `{got}`")]
    NotChoiceRooted {
        /// Printed form of the offending cirquent.
        got: String,
    },
}

/// The result of resolving a choice-rooted cirquent against a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// The run moved on the root's cluster; this is the chosen component.
    Resolved(Cirquent),
    /// No move on the root's cluster.
    Unresolved,
}

/// Resolves a choice-rooted cirquent against the run: choice 0/1 picks the
/// left/right component of a binary node; a quantifier's body is
/// instantiated at the chosen constant. Errors if the root carries no
/// cluster.
pub fn resolvent(c: &Cirquent, run: &LegalRun) -> Result<Resolution, SemanticsError> {
    let Some((kind, name)) = c.cluster_here() else {
        return Err(SemanticsError::NotChoiceRooted {
            got: crate::syntax::print(c),
        });
    };
    let Some(choice) = run.choice_for(kind, name) else {
        return Ok(Resolution::Unresolved);
    };
    Ok(Resolution::Resolved(resolve_node(c, choice)))
}

/// The component a choice-rooted node resolves to under `choice`.
fn resolve_node(c: &Cirquent, choice: u64) -> Cirquent {
    match c {
        Cirquent::Chand { left, right, .. } | Cirquent::Chor { left, right, .. } => {
            if choice == 0 {
                (**left).clone()
            } else {
                (**right).clone()
            }
        }
        Cirquent::Chall { var, body, .. } | Cirquent::Chexists { var, body, .. } => body
            .substitute(var, &Term::Const(choice))
            .expect("substituting a constant never captures"),
        _ => unreachable!("resolve_node on a non-choice node"),
    }
}

/// Residue computation generic over how clusters resolve; shared between
/// run-based residues and the oracle's resolution maps.
pub(crate) fn residue_with<F>(c: &Cirquent, resolve: &F) -> Cirquent
where
    F: Fn(ClusterKind, &str) -> Option<u64>,
{
    match c {
        Cirquent::Top | Cirquent::Bot | Cirquent::Atom { .. } => c.clone(),
        Cirquent::Pand(a, b) => Cirquent::Pand(
            Box::new(residue_with(a, resolve)),
            Box::new(residue_with(b, resolve)),
        ),
        Cirquent::Por(a, b) => Cirquent::Por(
            Box::new(residue_with(a, resolve)),
            Box::new(residue_with(b, resolve)),
        ),
        _ => {
            let (kind, name) = c.cluster_here().expect("remaining cases are choice nodes");
            match resolve(kind, name) {
                Some(choice) => residue_with(&resolve_node(c, choice), resolve),
                None => {
                    if kind.is_machine() {
                        Cirquent::Bot
                    } else {
                        Cirquent::Top
                    }
                }
            }
        }
    }
}

/// The residue of a closed cirquent under a legal run: surface choice nodes
/// are repeatedly replaced by their resolvents; surface nodes left
/// unresolved collapse to `T` when environment-owned and `F` when
/// machine-owned. The result is choice-free.
pub fn residue(c: &Cirquent, run: &LegalRun) -> Cirquent {
    debug_assert!(c.is_closed(), "residue requires a closed cirquent");
    residue_with(c, &|kind, name| run.choice_for(kind, name))
}

/// A ground atom: a predicate applied to constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    /// Predicate name.
    pub pred: String,
    /// Constant arguments.
    pub args: Vec<u64>,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A finite-support interpretation: the listed ground atoms are true, every
/// other ground atom is false.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    true_atoms: BTreeSet<GroundAtom>,
}

impl Interpretation {
    /// The all-false interpretation.
    pub fn empty() -> Interpretation {
        Interpretation::default()
    }

    /// An interpretation making exactly the given atoms true.
    pub fn from_atoms<I: IntoIterator<Item = GroundAtom>>(atoms: I) -> Interpretation {
        Interpretation {
            true_atoms: atoms.into_iter().collect(),
        }
    }

    /// Whether the atom is true here.
    pub fn holds(&self, pred: &str, args: &[u64]) -> bool {
        // Borrowed lookup without building a GroundAtom.
        self.true_atoms
            .iter()
            .any(|a| a.pred == pred && a.args == args)
    }

    /// The true atoms, sorted.
    pub fn atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.true_atoms.iter()
    }

    /// Parses the CLI format: one ground atom per line, `#` comments, blank
    /// lines ignored.
    pub fn parse(text: &str) -> Result<Interpretation, ParseError> {
        let mut atoms = BTreeSet::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let c = crate::syntax::parse(line)?;
            match c {
                Cirquent::Atom { pred, negated: false, args } => {
                    let mut ground = Vec::with_capacity(args.len());
                    for t in args {
                        match t {
                            Term::Const(n) => ground.push(n),
                            Term::Var(v) => {
                                return Err(ParseError::Syntax {
                                    offset: 0,
                                    message: format!(
                                        "interpretation atom `{line}` has variable `{v}`; atoms must be ground"
                                    ),
                                })
                            }
                        }
                    }
                    atoms.insert(GroundAtom { pred, args: ground });
                }
                other => {
                    return Err(ParseError::Syntax {
                        offset: 0,
                        message: format!(
                            "interpretation line `{}` is not a positive atom",
                            crate::syntax::print(&other)
                        ),
                    })
                }
            }
        }
        Ok(Interpretation { true_atoms: atoms })
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.true_atoms {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Truth evaluation generic over an atom valuation.
fn eval_with<F>(c: &Cirquent, holds: &F) -> bool
where
    F: Fn(&str, &[u64]) -> bool,
{
    match c {
        Cirquent::Top => true,
        Cirquent::Bot => false,
        Cirquent::Atom { pred, negated, args } => {
            let ground: Vec<u64> = args
                .iter()
                .map(|t| match t {
                    Term::Const(n) => *n,
                    Term::Var(v) => panic!("eval_truth on non-ground atom with variable `{v}`"),
                })
                .collect();
            holds(pred, &ground) != *negated
        }
        Cirquent::Pand(a, b) => eval_with(a, holds) && eval_with(b, holds),
        Cirquent::Por(a, b) => eval_with(a, holds) || eval_with(b, holds),
        other => panic!(
            "eval_truth on a cirquent with choice operators: {}",
            crate::syntax::print(other)
        ),
    }
}

/// Classical truth of a choice-free closed cirquent under an interpretation.
pub fn eval_truth(c: &Cirquent, i: &Interpretation) -> bool {
    eval_with(c, &|pred, args| i.holds(pred, args))
}

/// Whether the machine has won `c` under the run and interpretation, by
/// direct recursion:
///
/// * literals evaluate classically;
/// * `&` needs both sides won, `|` at least one;
/// * a resolved choice node defers to its resolvent;
/// * an unresolved environment node (`&[c]`, `all[c]`) is won, an unresolved
///   machine node (`|[c]`, `ex[c]`) is lost.
pub fn won(c: &Cirquent, run: &LegalRun, i: &Interpretation) -> bool {
    debug_assert!(c.is_closed(), "won requires a closed cirquent");
    fn go(c: &Cirquent, run: &LegalRun, i: &Interpretation) -> bool {
        match c {
            Cirquent::Top => true,
            Cirquent::Bot => false,
            Cirquent::Atom { pred, negated, args } => {
                let ground: Vec<u64> = args
                    .iter()
                    .map(|t| match t {
                        Term::Const(n) => *n,
                        Term::Var(v) => panic!("won on non-ground atom with variable `{v}`"),
                    })
                    .collect();
                i.holds(pred, &ground) != *negated
            }
            Cirquent::Pand(a, b) => go(a, run, i) && go(b, run, i),
            Cirquent::Por(a, b) => go(a, run, i) || go(b, run, i),
            choice => {
                let (kind, _) = choice.cluster_here().expect("choice node");
                match resolvent(choice, run).expect("choice node is choice-rooted") {
                    Resolution::Resolved(r) => go(&r, run, i),
                    Resolution::Unresolved => !kind.is_machine(),
                }
            }
        }
    }
    go(c, run, i)
}

/// Distinct ground atoms of a choice-free closed cirquent, sorted.
pub fn ground_atoms(c: &Cirquent) -> BTreeSet<GroundAtom> {
    fn walk(c: &Cirquent, out: &mut BTreeSet<GroundAtom>) {
        match c {
            Cirquent::Atom { pred, args, .. } => {
                let ground: Vec<u64> = args
                    .iter()
                    .map(|t| match t {
                        Term::Const(n) => *n,
                        Term::Var(v) => {
                            panic!("ground_atoms on non-ground atom with variable `{v}`")
                        }
                    })
                    .collect();
                out.insert(GroundAtom {
                    pred: pred.clone(),
                    args: ground,
                });
            }
            _ => {
                for child in c.children() {
                    walk(child, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(c, &mut out);
    out
}

/// True iff the choice-free closed cirquent is true under every assignment
/// to its finitely many distinct ground atoms (distinct ground atoms are
/// independent).
pub fn is_tautology(c: &Cirquent) -> bool {
    let atoms: Vec<GroundAtom> = ground_atoms(c).into_iter().collect();
    assert!(
        atoms.len() < 30,
        "tautology check over {} atoms is out of desk scale",
        atoms.len()
    );
    for mask in 0u64..(1u64 << atoms.len()) {
        let holds = |pred: &str, args: &[u64]| -> bool {
            atoms
                .iter()
                .position(|a| a.pred == pred && a.args == args)
                .map(|ix| mask & (1 << ix) != 0)
                .unwrap_or(false)
        };
        if !eval_with(c, &holds) {
            return false;
        }
    }
    true
}

/// Parses the CLI run format: whitespace-separated `E:a.3` / `M:c.1` tokens,
/// `#` comments to end of line. The cluster kind is taken from `kind_of`
/// (the cirquent's cluster table); for names it does not know, the kind is
/// synthesized from the player and choice, making such moves legal and
/// irrelevant.
pub fn parse_run<F>(text: &str, kind_of: F) -> Result<Vec<Move>, String>
where
    F: Fn(&str) -> Option<ClusterKind>,
{
    let mut moves = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let (player, rest) = match tok.split_once(':') {
                Some(("E", rest)) => (Player::Environment, rest),
                Some(("M", rest)) => (Player::Machine, rest),
                _ => return Err(format!("move `{tok}` must look like `E:a.3` or `M:c.1`")),
            };
            let Some((name, choice)) = rest.rsplit_once('.') else {
                return Err(format!("move `{tok}` is missing the `.choice` part"));
            };
            if name.is_empty() {
                return Err(format!("move `{tok}` has an empty cluster name"));
            }
            let choice: u64 = choice
                .parse()
                .map_err(|_| format!("move `{tok}` has a bad choice numeral"))?;
            let kind = kind_of(name).unwrap_or(match (player, choice) {
                (Player::Environment, 0 | 1) => ClusterKind::Chand,
                (Player::Environment, _) => ClusterKind::Chall,
                (Player::Machine, 0 | 1) => ClusterKind::Chor,
                (Player::Machine, _) => ClusterKind::Chexists,
            });
            moves.push(Move {
                player,
                kind,
                cluster: name.to_string(),
                choice,
            });
        }
    }
    Ok(moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn mv(player: Player, kind: ClusterKind, cluster: &str, choice: u64) -> Move {
        Move {
            player,
            kind,
            cluster: cluster.into(),
            choice,
        }
    }

    fn run(moves: Vec<Move>) -> LegalRun {
        check_legal(moves).expect("legal")
    }

    fn env(kind: ClusterKind, cluster: &str, choice: u64) -> Move {
        mv(Player::Environment, kind, cluster, choice)
    }

    fn mach(kind: ClusterKind, cluster: &str, choice: u64) -> Move {
        mv(Player::Machine, kind, cluster, choice)
    }

    #[test]
    fn legality_conditions() {
        assert!(check_legal(vec![env(ClusterKind::Chand, "a", 1)]).is_ok());
        let v = check_legal(vec![mach(ClusterKind::Chand, "a", 0)]).unwrap_err();
        assert_eq!((v.condition, v.index), (2, 0));
        let v = check_legal(vec![
            env(ClusterKind::Chall, "c", 4),
            env(ClusterKind::Chall, "c", 7),
        ])
        .unwrap_err();
        assert_eq!((v.condition, v.index), (4, 1));
        let v = check_legal(vec![env(ClusterKind::Chand, "a", 2)]).unwrap_err();
        assert_eq!((v.condition, v.index), (1, 0));
        let v = check_legal(vec![env(ClusterKind::Chor, "c", 0)]).unwrap_err();
        assert_eq!((v.condition, v.index), (3, 0));
    }

    #[test]
    fn resolvent_examples() {
        let c = parse("p |[c] q").unwrap();
        let r = run(vec![mach(ClusterKind::Chor, "c", 1)]);
        assert_eq!(
            resolvent(&c, &r).unwrap(),
            Resolution::Resolved(parse("q").unwrap())
        );

        let c = parse("all[a] x. p(x)").unwrap();
        let r = run(vec![env(ClusterKind::Chall, "a", 3)]);
        assert_eq!(
            resolvent(&c, &r).unwrap(),
            Resolution::Resolved(parse("p(3)").unwrap())
        );

        let c = parse("p &[a] q").unwrap();
        assert_eq!(
            resolvent(&c, &LegalRun::empty()).unwrap(),
            Resolution::Unresolved
        );

        assert!(resolvent(&parse("p & q").unwrap(), &LegalRun::empty()).is_err());
    }

    #[test]
    fn residue_examples() {
        let c = parse("p |[c] q").unwrap();
        let r = run(vec![mach(ClusterKind::Chor, "c", 0)]);
        assert_eq!(residue(&c, &r), parse("p").unwrap());

        let c = parse("(p &[a] q) & r").unwrap();
        assert_eq!(residue(&c, &LegalRun::empty()), parse("T & r").unwrap());

        // Outer resolution exposes an unresolved inner machine cluster.
        let c = parse("ex[c] x. (p(x) |[d] q)").unwrap();
        let r = run(vec![mach(ClusterKind::Chexists, "c", 2)]);
        assert_eq!(residue(&c, &r), Cirquent::Bot);
    }

    #[test]
    fn residue_is_choice_free() {
        let c = parse("(s &[a] q) & (all[u] x. p(x) | ex[v] y. q)").unwrap();
        let res = residue(&c, &LegalRun::empty());
        assert!(res.clusters_of().is_empty());
    }

    #[test]
    fn eval_truth_examples() {
        let i = Interpretation::empty();
        assert!(eval_truth(&parse("T & ~p(0)").unwrap(), &i));
        let i = Interpretation::parse("p(1)").unwrap();
        assert!(eval_truth(&parse("p(1) | F").unwrap(), &i));
        assert!(!eval_truth(&Cirquent::Bot, &i));
    }

    #[test]
    fn won_examples() {
        let i = Interpretation::empty();
        assert!(won(&parse("p &[a] q").unwrap(), &LegalRun::empty(), &i));
        assert!(!won(&parse("p |[c] q").unwrap(), &LegalRun::empty(), &i));

        let c = parse("ex[c] x. p(x)").unwrap();
        let r = run(vec![mach(ClusterKind::Chexists, "c", 5)]);
        let i = Interpretation::parse("p(5)").unwrap();
        assert!(won(&c, &r, &i));
        assert_eq!(won(&c, &r, &i), eval_truth(&residue(&c, &r), &i));
    }

    #[test]
    fn tautology_examples() {
        assert!(is_tautology(&parse("~p(0) | p(0)").unwrap()));
        assert!(!is_tautology(&parse("p(0) | p(1)").unwrap()));
        assert!(is_tautology(&Cirquent::Top));
        assert!(!is_tautology(&parse("p(0) & ~p(0) | q").unwrap()));
    }

    #[test]
    fn irrelevant_move_invariance() {
        let c = parse("(s &[a] q) | ex[c] x. p(x)").unwrap();
        let base = vec![env(ClusterKind::Chand, "a", 1)];
        let mut extended = base.clone();
        extended.push(mach(ClusterKind::Chexists, "zz", 9));
        for i in [
            Interpretation::empty(),
            Interpretation::parse("q\np(9)\ns").unwrap(),
        ] {
            assert_eq!(
                won(&c, &run(base.clone()), &i),
                won(&c, &run(extended.clone()), &i)
            );
        }
    }

    #[test]
    fn move_order_is_irrelevant() {
        let c = parse("(p &[a] q) | (r |[c] s)").unwrap();
        let m1 = env(ClusterKind::Chand, "a", 0);
        let m2 = mach(ClusterKind::Chor, "c", 1);
        let i = Interpretation::parse("p\ns").unwrap();
        assert_eq!(
            won(&c, &run(vec![m1.clone(), m2.clone()]), &i),
            won(&c, &run(vec![m2, m1]), &i)
        );
    }

    #[test]
    fn residue_equivalence_hand_cases() {
        // Lemma 5.2 shape: won == eval_truth of the residue.
        let cases = [
            ("(s &[a] q) & (all[u] x. p(x) | ex[v] y. q)", vec![]),
            (
                "(s &[a] q) | ex[c] x. (p(x) |[d] q)",
                vec![env(ClusterKind::Chand, "a", 0), mach(ClusterKind::Chexists, "c", 7)],
            ),
            (
                "all[u] x. (p(x) & (q |[d] r))",
                vec![env(ClusterKind::Chall, "u", 1), mach(ClusterKind::Chor, "d", 1)],
            ),
        ];
        for (text, moves) in cases {
            let c = parse(text).unwrap();
            let r = run(moves);
            for i in [
                Interpretation::empty(),
                Interpretation::parse("s\nq\np(1)\np(7)").unwrap(),
                Interpretation::parse("r\np(0)").unwrap(),
            ] {
                assert_eq!(
                    won(&c, &r, &i),
                    eval_truth(&residue(&c, &r), &i),
                    "case `{text}` run `{r}`"
                );
            }
        }
    }

    #[test]
    fn run_parsing() {
        let c = parse("(s &[a] q) | ex[c] x. p(x)").unwrap();
        let table = c.clusters_of();
        let kind_of = |name: &str| table.get(name).map(|(k, _)| *k);
        let moves = parse_run("E:a.0 M:c.3 # comment\nM:zz.1", kind_of).unwrap();
        assert_eq!(moves.len(), 3);
        assert_eq!(moves[0].kind, ClusterKind::Chand);
        assert_eq!(moves[1].kind, ClusterKind::Chexists);
        // Foreign name: kind synthesized from player and choice.
        assert_eq!(moves[2].kind, ClusterKind::Chor);
        assert!(check_legal(moves).is_ok());

        assert!(parse_run("X:a.0", kind_of).is_err());
        assert!(parse_run("E:a", kind_of).is_err());
    }
}

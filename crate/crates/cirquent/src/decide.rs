//! The decision procedure for validity of closed cirquents.
//!
//! The procedure purifies its input, classifies the pure result into one of
//! eight mutually exclusive shape conditions, and recurses on strictly
//! rank-smaller instances obtained by resolving one cluster at a time. On
//! acceptance it assembles a full proof: the child proofs, the one joining
//! rule application, and a replay of the purification derivation, so that
//! the final line is the original input (up to renaming of bound
//! variables). Every accept is therefore independently certified by
//! [`crate::calculus::check_proof`].

use crate::calculus::{
    apply_rule, collapse_chexists, collapse_chor, Justification, Proof, ProofLine, RuleName,
    Witness,
};
use crate::purify::{is_pure, purify, DerivationStep};
use crate::syntax::{print, Cirquent, SyntaxError, Term};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Why deciding could not start.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DecideError {
    /// The input has free variables.
    #[error("deciding requires a closed cirquent")]
    NotClosed,
    /// The input is not a well-formed cirquent.
    #[error("ill-formed cirquent: {0}")]
    Invalid(#[from] SyntaxError),
}

/// How a qualifying conjunct of a pure conjunction qualifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjunctKind {
    /// A nonlogical literal: the conjunction is invalid outright.
    Literal,
    /// Rooted in a choice disjunction.
    ChorRooted {
        /// Its root cluster.
        cluster: String,
    },
    /// Rooted in a choice existential quantifier.
    ChexistsRooted {
        /// Its root cluster.
        cluster: String,
    },
    /// A disjunction shaped like [`Condition::Disjunction`].
    Disjunction {
        /// Distinct root clusters of its chor-rooted disjuncts, in order.
        chor_clusters: Vec<String>,
        /// Distinct root clusters of its chexists-rooted disjuncts.
        chexists_clusters: Vec<String>,
    },
}

/// The shape classification of a pure closed cirquent. Exactly one
/// condition matches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    /// 0: `F` or a nonlogical literal.
    FalseOrLiteral,
    /// 1: `T`.
    Top,
    /// 2: rooted in `|[c]`.
    ChorRooted {
        /// Root cluster.
        cluster: String,
    },
    /// 3: rooted in `ex[c]`.
    ChexistsRooted {
        /// Root cluster.
        cluster: String,
    },
    /// 4: rooted in `&[c]`; purity guarantees `c` occurs nowhere below.
    ChandRooted {
        /// Root cluster.
        cluster: String,
    },
    /// 5: rooted in `all[c]`; purity guarantees `c` occurs nowhere below.
    ChallRooted {
        /// Root cluster.
        cluster: String,
    },
    /// 6: a disjunction of two or more disjuncts, each a nonlogical
    /// literal, chor-rooted, or chexists-rooted, with no complementary pair
    /// of literal disjuncts.
    Disjunction {
        /// Distinct root clusters of the chor-rooted disjuncts, in order of
        /// first occurrence.
        chor_clusters: Vec<String>,
        /// Distinct root clusters of the chexists-rooted disjuncts.
        chexists_clusters: Vec<String>,
        /// Number of literal disjuncts.
        literal_count: usize,
    },
    /// 7: a conjunction of two or more conjuncts with a least qualifying
    /// conjunct.
    Conjunction {
        /// 0-based index of the least qualifying conjunct in the flattened
        /// conjunct list.
        index: usize,
        /// How that conjunct qualifies.
        kind: ConjunctKind,
    },
}

impl Condition {
    /// The condition's tag, 0 through 7.
    pub fn tag(&self) -> u8 {
        match self {
            Condition::FalseOrLiteral => 0,
            Condition::Top => 1,
            Condition::ChorRooted { .. } => 2,
            Condition::ChexistsRooted { .. } => 3,
            Condition::ChandRooted { .. } => 4,
            Condition::ChallRooted { .. } => 5,
            Condition::Disjunction { .. } => 6,
            Condition::Conjunction { .. } => 7,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::FalseOrLiteral => write!(f, "condition 0 (F or literal)"),
            Condition::Top => write!(f, "condition 1 (T)"),
            Condition::ChorRooted { cluster } => write!(f, "condition 2 (|[{cluster}] root)"),
            Condition::ChexistsRooted { cluster } => {
                write!(f, "condition 3 (ex[{cluster}] root)")
            }
            Condition::ChandRooted { cluster } => write!(f, "condition 4 (&[{cluster}] root)"),
            Condition::ChallRooted { cluster } => write!(f, "condition 5 (all[{cluster}] root)"),
            Condition::Disjunction {
                chor_clusters,
                chexists_clusters,
                literal_count,
            } => write!(
                f,
                "condition 6 (chor {chor_clusters:?}, chexists {chexists_clusters:?}, {literal_count} literal(s))"
            ),
            Condition::Conjunction { index, kind } => {
                let k = match kind {
                    ConjunctKind::Literal => "literal".to_string(),
                    ConjunctKind::ChorRooted { cluster } => format!("|[{cluster}] root"),
                    ConjunctKind::ChexistsRooted { cluster } => format!("ex[{cluster}] root"),
                    ConjunctKind::Disjunction {
                        chor_clusters,
                        chexists_clusters,
                    } => format!(
                        "disjunction, chor {chor_clusters:?}, chexists {chexists_clusters:?}"
                    ),
                };
                write!(f, "condition 7 (conjunct {index}: {k})")
            }
        }
    }
}

/// One node of the recursion trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceNode {
    /// How this instance arose from its parent (`"input"` at the root).
    pub via: String,
    /// The instance, printed.
    pub input: String,
    /// Its purification, printed.
    pub pure: String,
    /// The classification of the purification.
    pub condition: String,
    /// Whether this instance was accepted.
    pub accept: bool,
    /// True when the verdict came from the memo table (children omitted).
    pub memoized: bool,
    /// Explored children, in exploration order (short-circuited siblings
    /// are absent).
    pub children: Vec<TraceNode>,
}

impl TraceNode {
    fn render(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let verdict = if self.accept { "accept" } else { "reject" };
        let memo = if self.memoized { " [memo]" } else { "" };
        out.push_str(&format!(
            "{pad}{} := {} -> pure {} ; {} ; {verdict}{memo}\n",
            self.via, self.input, self.pure, self.condition
        ));
        for ch in &self.children {
            ch.render(out, depth + 1);
        }
    }
}

impl fmt::Display for TraceNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render(&mut out, 0);
        f.write_str(&out)
    }
}

/// The verdict, the certifying proof when accepted, and the recursion
/// trace.
#[derive(Clone, Debug)]
pub struct DecisionOutcome {
    /// True iff the input is valid.
    pub accept: bool,
    /// A checkable proof whose theorem is the input (up to renaming of
    /// bound variables); present exactly on accept.
    pub proof: Option<Proof>,
    /// The recursion tree.
    pub trace: TraceNode,
}

/// Flattens a `|`-spine left-to-right.
fn disjuncts(c: &Cirquent) -> Vec<&Cirquent> {
    match c {
        Cirquent::Por(a, b) => {
            let mut out = disjuncts(a);
            out.extend(disjuncts(b));
            out
        }
        _ => vec![c],
    }
}

/// Flattens a `&`-spine left-to-right.
fn conjuncts(c: &Cirquent) -> Vec<&Cirquent> {
    match c {
        Cirquent::Pand(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        _ => vec![c],
    }
}

/// The root-cluster partition of a qualifying disjunction: distinct chor
/// clusters, distinct chexists clusters (each in first-occurrence order),
/// and the literal count. Returns `None` if some disjunct has another shape.
fn disjunction_shape(parts: &[&Cirquent]) -> Option<(Vec<String>, Vec<String>, usize)> {
    let mut chor = Vec::new();
    let mut chexists = Vec::new();
    let mut literals = 0usize;
    for part in parts {
        match part {
            Cirquent::Atom { .. } => literals += 1,
            Cirquent::Chor { cluster, .. } => {
                if !chor.contains(cluster) {
                    chor.push(cluster.clone());
                }
            }
            Cirquent::Chexists { cluster, .. } => {
                if !chexists.contains(cluster) {
                    chexists.push(cluster.clone());
                }
            }
            _ => return None,
        }
    }
    Some((chor, chexists, literals))
}

/// Classifies a pure closed cirquent into its unique condition.
///
/// # Panics
///
/// Panics if no condition matches; purity makes that impossible, so a panic
/// here means the purity checker and the classifier disagree.
pub fn classify(f: &Cirquent) -> Result<Condition, u8> {
    is_pure(f)?;
    Ok(match f {
        Cirquent::Bot | Cirquent::Atom { .. } => Condition::FalseOrLiteral,
        Cirquent::Top => Condition::Top,
        Cirquent::Chor { cluster, .. } => Condition::ChorRooted {
            cluster: cluster.clone(),
        },
        Cirquent::Chexists { cluster, .. } => Condition::ChexistsRooted {
            cluster: cluster.clone(),
        },
        Cirquent::Chand { cluster, .. } => Condition::ChandRooted {
            cluster: cluster.clone(),
        },
        Cirquent::Chall { cluster, .. } => Condition::ChallRooted {
            cluster: cluster.clone(),
        },
        Cirquent::Por(..) => {
            let parts = disjuncts(f);
            let (chor_clusters, chexists_clusters, literal_count) = disjunction_shape(&parts)
                .unwrap_or_else(|| {
                    panic!("pure disjunction with a non-conforming disjunct: {}", print(f))
                });
            Condition::Disjunction {
                chor_clusters,
                chexists_clusters,
                literal_count,
            }
        }
        Cirquent::Pand(..) => {
            let parts = conjuncts(f);
            let qualifying = parts.iter().enumerate().find_map(|(i, part)| {
                let kind = match part {
                    Cirquent::Atom { .. } => Some(ConjunctKind::Literal),
                    Cirquent::Chor { cluster, .. } => Some(ConjunctKind::ChorRooted {
                        cluster: cluster.clone(),
                    }),
                    Cirquent::Chexists { cluster, .. } => Some(ConjunctKind::ChexistsRooted {
                        cluster: cluster.clone(),
                    }),
                    Cirquent::Por(..) => {
                        disjunction_shape(&disjuncts(part)).map(|(chor, chex, _)| {
                            ConjunctKind::Disjunction {
                                chor_clusters: chor,
                                chexists_clusters: chex,
                            }
                        })
                    }
                    _ => None,
                };
                kind.map(|k| (i, k))
            });
            let (index, kind) = qualifying.unwrap_or_else(|| {
                panic!("pure conjunction without a qualifying conjunct: {}", print(f))
            });
            Condition::Conjunction { index, kind }
        }
    })
}

/// The instantiation constants for a chexists collapse of `f`: all
/// occurring constants ascending, then one fresh (the smallest unused).
fn instantiation_constants(f: &Cirquent) -> Vec<u64> {
    let mut consts: Vec<u64> = f.constants().into_iter().collect();
    consts.push(crate::syntax::fresh_constant(f));
    consts
}

/// One candidate child: how it arose, the joining rule certifying the
/// parent from it, and the instance itself.
struct Child {
    via: String,
    rule: RuleName,
    witness: Witness,
    instance: Cirquent,
}

fn chor_child(f: &Cirquent, cluster: &str, branch: u8) -> Child {
    let rule = if branch == 0 {
        RuleName::LeftChorChoosing
    } else {
        RuleName::RightChorChoosing
    };
    Child {
        via: format!("|[{cluster}] branch {branch}"),
        rule,
        witness: Witness {
            cluster: Some(cluster.to_string()),
            ..Witness::default()
        },
        instance: collapse_chor(f, cluster, branch),
    }
}

fn chexists_child(f: &Cirquent, cluster: &str, constant: u64) -> Child {
    Child {
        via: format!("ex[{cluster}] constant {constant}"),
        rule: RuleName::ChexistsChoosing,
        witness: Witness {
            cluster: Some(cluster.to_string()),
            constant: Some(constant),
            ..Witness::default()
        },
        instance: collapse_chexists(f, cluster, constant),
    }
}

/// The chor/chexists fan-out shared by Conditions 2, 3, 6, 7(1), 7(2), and
/// 7(3): every listed chor cluster with both branches, then every listed
/// chexists cluster with every instantiation constant of `f`.
fn choosing_children(
    f: &Cirquent,
    chor_clusters: &[String],
    chexists_clusters: &[String],
) -> Vec<Child> {
    let mut out = Vec::new();
    for cluster in chor_clusters {
        for branch in [0u8, 1] {
            out.push(chor_child(f, cluster, branch));
        }
    }
    if !chexists_clusters.is_empty() {
        let constants = instantiation_constants(f);
        for cluster in chexists_clusters {
            for &a in &constants {
                out.push(chexists_child(f, cluster, a));
            }
        }
    }
    out
}

/// Appends `child`'s proof lines, re-indexed to start after the existing
/// lines; returns the new index of its final line.
fn append_shifted(lines: &mut Vec<ProofLine>, child: &Proof) -> usize {
    let offset = lines.len();
    for line in &child.lines {
        let justification = match &line.justification {
            Justification::Rule {
                rule,
                premises,
                witness,
            } => Justification::Rule {
                rule: *rule,
                premises: premises.iter().map(|p| p + offset).collect(),
                witness: witness.clone(),
            },
            other => other.clone(),
        };
        lines.push(ProofLine {
            index: line.index + offset,
            cirquent: line.cirquent.clone(),
            justification,
        });
    }
    lines.len()
}

/// Appends the purification derivation as proof lines, replaying it from
/// `from` (which must be the current final line's cirquent).
fn append_derivation(lines: &mut Vec<ProofLine>, from: &Cirquent, steps: &[DerivationStep]) {
    let mut cur = from.clone();
    for step in steps {
        cur = apply_rule(step.rule, &[cur], &step.witness)
            .expect("purification derivations replay by construction");
        let prev = lines.len();
        lines.push(ProofLine {
            index: prev + 1,
            cirquent: cur.clone(),
            justification: Justification::Rule {
                rule: step.rule,
                premises: vec![prev],
                witness: step.witness.clone(),
            },
        });
    }
}

/// Assembles the accept proof: child proofs, the joining application (or
/// the axiom when there are no children), then the purification replay.
fn assemble_proof(
    children: Vec<Proof>,
    joining: Option<(RuleName, Witness)>,
    f: &Cirquent,
    derivation: &[DerivationStep],
) -> Proof {
    let mut lines = Vec::new();
    let mut child_ends = Vec::with_capacity(children.len());
    for child in &children {
        child_ends.push(append_shifted(&mut lines, child));
    }
    match joining {
        Some((rule, witness)) => {
            lines.push(ProofLine {
                index: lines.len() + 1,
                cirquent: f.clone(),
                justification: Justification::Rule {
                    rule,
                    premises: child_ends,
                    witness,
                },
            });
        }
        None => {
            debug_assert!(children.is_empty());
            debug_assert_eq!(*f, Cirquent::Top);
            lines.push(ProofLine {
                index: lines.len() + 1,
                cirquent: Cirquent::Top,
                justification: Justification::Axiom,
            });
        }
    }
    append_derivation(&mut lines, f, derivation);
    Proof { lines }
}

type Memo = HashMap<Cirquent, (bool, Option<Proof>)>;

/// Decides validity of a closed cirquent. On accept, the outcome carries a
/// proof that passes [`crate::calculus::check_proof`] with the input (up to
/// renaming of bound variables) as its theorem.
pub fn decide(e: &Cirquent) -> Result<DecisionOutcome, DecideError> {
    e.validate()?;
    if !e.is_closed() {
        return Err(DecideError::NotClosed);
    }
    let mut memo = Memo::new();
    let (accept, proof, trace) = decide_rec(e, "input".to_string(), &mut memo);
    Ok(DecisionOutcome {
        accept,
        proof,
        trace,
    })
}

fn decide_rec(e: &Cirquent, via: String, memo: &mut Memo) -> (bool, Option<Proof>, TraceNode) {
    let key = e.canonical();
    let purification = purify(e);
    let f = purification.pure.clone();
    let condition = classify(&f).unwrap_or_else(|violated| {
        panic!(
            "purification output violates purity condition {violated}: {}",
            print(&f)
        )
    });
    if let Some((accept, proof)) = memo.get(&key) {
        let trace = TraceNode {
            via,
            input: print(e),
            pure: print(&f),
            condition: condition.to_string(),
            accept: *accept,
            memoized: true,
            children: Vec::new(),
        };
        return (*accept, proof.clone(), trace);
    }

    let mut children_traces = Vec::new();
    let (accept, proof) = match &condition {
        Condition::FalseOrLiteral => (false, None),
        Condition::Top => {
            let proof = assemble_proof(Vec::new(), None, &f, &purification.derivation);
            (true, Some(proof))
        }
        Condition::ChorRooted { cluster } => try_children(
            &f,
            choosing_children(&f, std::slice::from_ref(cluster), &[]),
            &purification.derivation,
            memo,
            &mut children_traces,
        ),
        Condition::ChexistsRooted { cluster } => try_children(
            &f,
            choosing_children(&f, &[], std::slice::from_ref(cluster)),
            &purification.derivation,
            memo,
            &mut children_traces,
        ),
        Condition::ChandRooted { cluster } => {
            let Cirquent::Chand { left, right, .. } = &f else { unreachable!() };
            let (ok0, proof0, t0) =
                decide_rec(left, format!("&[{cluster}] component 0"), memo);
            children_traces.push(t0);
            if !ok0 {
                (false, None)
            } else {
                let (ok1, proof1, t1) =
                    decide_rec(right, format!("&[{cluster}] component 1"), memo);
                children_traces.push(t1);
                if !ok1 {
                    (false, None)
                } else {
                    let proof = assemble_proof(
                        vec![proof0.expect("accept carries a proof"), proof1.expect("accept carries a proof")],
                        Some((RuleName::ChandSplitting, Witness::default())),
                        &f,
                        &purification.derivation,
                    );
                    (true, Some(proof))
                }
            }
        }
        Condition::ChallRooted { cluster } => {
            let Cirquent::Chall { var, body, .. } = &f else { unreachable!() };
            let constant = crate::syntax::fresh_constant(&f);
            let instance = body
                .substitute(var, &Term::Const(constant))
                .expect("constants cannot be captured");
            let (ok, child_proof, t) = decide_rec(
                &instance,
                format!("all[{cluster}] instance {constant}"),
                memo,
            );
            children_traces.push(t);
            if !ok {
                (false, None)
            } else {
                let witness = Witness {
                    constant: Some(constant),
                    ..Witness::default()
                };
                let proof = assemble_proof(
                    vec![child_proof.expect("accept carries a proof")],
                    Some((RuleName::ChallSplitting, witness)),
                    &f,
                    &purification.derivation,
                );
                (true, Some(proof))
            }
        }
        Condition::Disjunction {
            chor_clusters,
            chexists_clusters,
            ..
        } => try_children(
            &f,
            choosing_children(&f, chor_clusters, chexists_clusters),
            &purification.derivation,
            memo,
            &mut children_traces,
        ),
        Condition::Conjunction { kind, .. } => match kind {
            ConjunctKind::Literal => (false, None),
            ConjunctKind::ChorRooted { cluster } => try_children(
                &f,
                choosing_children(&f, std::slice::from_ref(cluster), &[]),
                &purification.derivation,
                memo,
                &mut children_traces,
            ),
            ConjunctKind::ChexistsRooted { cluster } => try_children(
                &f,
                choosing_children(&f, &[], std::slice::from_ref(cluster)),
                &purification.derivation,
                memo,
                &mut children_traces,
            ),
            ConjunctKind::Disjunction {
                chor_clusters,
                chexists_clusters,
            } => try_children(
                &f,
                choosing_children(&f, chor_clusters, chexists_clusters),
                &purification.derivation,
                memo,
                &mut children_traces,
            ),
        },
    };

    memo.insert(key, (accept, proof.clone()));
    let trace = TraceNode {
        via,
        input: print(e),
        pure: print(&f),
        condition: condition.to_string(),
        accept,
        memoized: false,
        children: children_traces,
    };
    (accept, proof, trace)
}

/// Explores the fan-out children in order; the first accepted child
/// certifies the parent, and the parent is rejected when all children are
/// (or there are none).
fn try_children(
    f: &Cirquent,
    children: Vec<Child>,
    derivation: &[DerivationStep],
    memo: &mut Memo,
    traces: &mut Vec<TraceNode>,
) -> (bool, Option<Proof>) {
    for child in children {
        debug_assert!(
            child.instance.canonical() != f.canonical(),
            "fan-out child equals its parent: {}",
            print(f)
        );
        let (ok, child_proof, t) = decide_rec(&child.instance, child.via, memo);
        traces.push(t);
        if ok {
            let proof = assemble_proof(
                vec![child_proof.expect("accept carries a proof")],
                Some((child.rule, child.witness)),
                f,
                derivation,
            );
            return (true, Some(proof));
        }
    }
    (false, None)
}

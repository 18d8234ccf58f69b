//! The proof calculus: the axiom `T` plus 23 rewrite rules, forward rule
//! application, step/proof checking, and a textual proof format.
//!
//! Every rule is a premise-to-conclusion rewrite. Most rules rewrite one
//! subtree inside an arbitrary context (addressed by a [`Path`]); the
//! *choosing* rules rewrite every occurrence of a cluster across the whole
//! cirquent at once, and the *splitting* rules apply at the root only.
//!
//! [`apply_rule`] computes a conclusion from premises plus a witness; the
//! checker ([`check_step`], [`check_proof`]) goes the other way, inverting
//! the conclusion into candidate premises and comparing alpha-equivalence
//! against the claimed ones. Witnesses are optional for checking: when
//! absent, the checker searches paths, clusters, branches, and constants
//! occurring in the premise or conclusion plus one fresh constant.

use crate::syntax::{
    print, subst_var_avoiding, Cirquent, ClusterKind, Path, Step, SyntaxError, Term,
};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The 23 rules. The axiom `T` is a zero-premise proof line, not a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[allow(missing_docs)]
pub enum RuleName {
    PorCommutativity,
    PandCommutativity,
    PorAssociativity,
    PandAssociativity,
    PorIdentity,
    PandIdentity,
    PorDomination,
    PandDomination,
    LeftChorChoosing,
    RightChorChoosing,
    ChexistsChoosing,
    LeftChandCleansing,
    RightChandCleansing,
    ChallCleansing,
    PandDistribution,
    ChandDistribution,
    ChallDistribution,
    Trivialization,
    Chandchotomy,
    Challchotomy,
    Chandallchotomy,
    ChandSplitting,
    ChallSplitting,
}

const RULE_NAMES: [(RuleName, &str); 23] = [
    (RuleName::PorCommutativity, "PorCommutativity"),
    (RuleName::PandCommutativity, "PandCommutativity"),
    (RuleName::PorAssociativity, "PorAssociativity"),
    (RuleName::PandAssociativity, "PandAssociativity"),
    (RuleName::PorIdentity, "PorIdentity"),
    (RuleName::PandIdentity, "PandIdentity"),
    (RuleName::PorDomination, "PorDomination"),
    (RuleName::PandDomination, "PandDomination"),
    (RuleName::LeftChorChoosing, "LeftChorChoosing"),
    (RuleName::RightChorChoosing, "RightChorChoosing"),
    (RuleName::ChexistsChoosing, "ChexistsChoosing"),
    (RuleName::LeftChandCleansing, "LeftChandCleansing"),
    (RuleName::RightChandCleansing, "RightChandCleansing"),
    (RuleName::ChallCleansing, "ChallCleansing"),
    (RuleName::PandDistribution, "PandDistribution"),
    (RuleName::ChandDistribution, "ChandDistribution"),
    (RuleName::ChallDistribution, "ChallDistribution"),
    (RuleName::Trivialization, "Trivialization"),
    (RuleName::Chandchotomy, "Chandchotomy"),
    (RuleName::Challchotomy, "Challchotomy"),
    (RuleName::Chandallchotomy, "Chandallchotomy"),
    (RuleName::ChandSplitting, "ChandSplitting"),
    (RuleName::ChallSplitting, "ChallSplitting"),
];

impl RuleName {
    /// Every rule, in declaration order.
    pub const ALL: [RuleName; 23] = [
        RuleName::PorCommutativity,
        RuleName::PandCommutativity,
        RuleName::PorAssociativity,
        RuleName::PandAssociativity,
        RuleName::PorIdentity,
        RuleName::PandIdentity,
        RuleName::PorDomination,
        RuleName::PandDomination,
        RuleName::LeftChorChoosing,
        RuleName::RightChorChoosing,
        RuleName::ChexistsChoosing,
        RuleName::LeftChandCleansing,
        RuleName::RightChandCleansing,
        RuleName::ChallCleansing,
        RuleName::PandDistribution,
        RuleName::ChandDistribution,
        RuleName::ChallDistribution,
        RuleName::Trivialization,
        RuleName::Chandchotomy,
        RuleName::Challchotomy,
        RuleName::Chandallchotomy,
        RuleName::ChandSplitting,
        RuleName::ChallSplitting,
    ];

    /// How many premises the rule takes (two for ChandSplitting, one
    /// otherwise).
    pub fn premise_count(self) -> usize {
        if self == RuleName::ChandSplitting {
            2
        } else {
            1
        }
    }

    /// The three rules that resolve a cluster (and therefore preserve
    /// validity only premise-to-conclusion, not backwards).
    pub fn is_choosing(self) -> bool {
        matches!(
            self,
            RuleName::LeftChorChoosing | RuleName::RightChorChoosing | RuleName::ChexistsChoosing
        )
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (_, name) = RULE_NAMES.iter().find(|(r, _)| r == self).expect("listed");
        write!(f, "{name}")
    }
}

impl FromStr for RuleName {
    type Err = String;

    fn from_str(s: &str) -> Result<RuleName, String> {
        RULE_NAMES
            .iter()
            .find(|(_, name)| *name == s)
            .map(|(r, _)| *r)
            .ok_or_else(|| format!("unknown rule name `{s}`"))
    }
}

/// Parameters of a rule application. Every field is optional; which ones a
/// rule consumes is documented per rule on [`apply_rule`]. The checker can
/// work with an empty witness by searching.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    /// Context path of the rewritten subtree.
    pub path: Option<Path>,
    /// Inner path for the cleansing rules: the hole inside the rewritten
    /// component, relative to that component.
    pub hole: Option<Path>,
    /// Cluster name (choosing, splitting, chotomy rules).
    pub cluster: Option<String>,
    /// Branch flag for binary choices.
    pub branch: Option<u8>,
    /// Constant for quantifier choices and ChallSplitting.
    pub constant: Option<u64>,
    /// Bound-variable name to introduce (ChallCleansing, ChallSplitting).
    pub var: Option<String>,
    /// Introduced subcirquent, for rules whose conclusion contains material
    /// absent from the premise (dominations, Trivialization, cleansings) and
    /// for the choosing rules, where it is the whole conclusion.
    pub intro: Option<Cirquent>,
}

impl Witness {
    /// A witness carrying only a context path.
    pub fn at(path: Path) -> Witness {
        Witness {
            path: Some(path),
            ..Witness::default()
        }
    }
}

/// Rule application failure.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    /// The rule takes a different number of premises.
    #[error("{rule} takes {want} premise(s), got {got}")]
    PremiseCount {
        /// Rule applied.
        rule: RuleName,
        /// Required count.
        want: usize,
        /// Provided count.
        got: usize,
    },
    /// A witness field the rule needs for forward application is missing.
    #[error("{rule} needs witness field `{field}`")]
    MissingWitness {
        /// Rule applied.
        rule: RuleName,
        /// Name of the missing field.
        field: &'static str,
    },
    /// The premise does not have the shape the rule rewrites.
    #[error("{rule}: premise does not match at {path}: {detail}")]
    ShapeMismatch {
        /// Rule applied.
        rule: RuleName,
        /// Context path of the mismatch.
        path: Path,
        /// What was expected.
        detail: String,
    },
    /// A side condition of the rule is violated.
    #[error("{rule}: side condition violated: {detail}")]
    SideCondition {
        /// Rule applied.
        rule: RuleName,
        /// The violated condition.
        detail: String,
    },
    /// The constructed conclusion is not a well-formed cirquent.
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Replaces every `|[cluster]`-rooted subcirquent by the collapse of its
/// chosen component, recursively, so that no node of the cluster survives.
pub fn collapse_chor(c: &Cirquent, cluster: &str, branch: u8) -> Cirquent {
    match c {
        Cirquent::Chor { cluster: cl, left, right } if cl == cluster => {
            let chosen = if branch == 0 { left } else { right };
            collapse_chor(chosen, cluster, branch)
        }
        _ => rebuild(c, |child| collapse_chor(child, cluster, branch)),
    }
}

/// Replaces every `ex[cluster]`-rooted subcirquent by the collapse of its
/// body instantiated at `constant`, recursively.
pub fn collapse_chexists(c: &Cirquent, cluster: &str, constant: u64) -> Cirquent {
    match c {
        Cirquent::Chexists { cluster: cl, var, body, .. } if cl == cluster => {
            let inst = body
                .substitute(var, &Term::Const(constant))
                .expect("substituting a constant never captures");
            collapse_chexists(&inst, cluster, constant)
        }
        _ => rebuild(c, |child| collapse_chexists(child, cluster, constant)),
    }
}

/// Applies `f` to every child, keeping the node itself.
fn rebuild<F>(c: &Cirquent, f: F) -> Cirquent
where
    F: Fn(&Cirquent) -> Cirquent,
{
    match c {
        Cirquent::Top | Cirquent::Bot | Cirquent::Atom { .. } => c.clone(),
        Cirquent::Pand(a, b) => Cirquent::Pand(Box::new(f(a)), Box::new(f(b))),
        Cirquent::Por(a, b) => Cirquent::Por(Box::new(f(a)), Box::new(f(b))),
        Cirquent::Chand { cluster, left, right } => Cirquent::Chand {
            cluster: cluster.clone(),
            left: Box::new(f(left)),
            right: Box::new(f(right)),
        },
        Cirquent::Chor { cluster, left, right } => Cirquent::Chor {
            cluster: cluster.clone(),
            left: Box::new(f(left)),
            right: Box::new(f(right)),
        },
        Cirquent::Chall { cluster, var, body } => Cirquent::Chall {
            cluster: cluster.clone(),
            var: var.clone(),
            body: Box::new(f(body)),
        },
        Cirquent::Chexists { cluster, var, body } => Cirquent::Chexists {
            cluster: cluster.clone(),
            var: var.clone(),
            body: Box::new(f(body)),
        },
    }
}

/// True if a binder of `var` occurs strictly above the position `hole`
/// inside `body` (at any proper prefix of `hole`, including `body`'s root).
fn binder_intervenes(body: &Cirquent, hole: &Path, var: &str) -> bool {
    let mut node = body;
    for step in &hole.0 {
        match node {
            Cirquent::Chall { var: v, .. } | Cirquent::Chexists { var: v, .. } if v == var => {
                return true
            }
            _ => {}
        }
        node = match (node, step) {
            (Cirquent::Pand(a, _), Step::Left) | (Cirquent::Por(a, _), Step::Left) => a,
            (Cirquent::Pand(_, b), Step::Right) | (Cirquent::Por(_, b), Step::Right) => b,
            (Cirquent::Chand { left, .. }, Step::Left)
            | (Cirquent::Chor { left, .. }, Step::Left) => left,
            (Cirquent::Chand { right, .. }, Step::Right)
            | (Cirquent::Chor { right, .. }, Step::Right) => right,
            (Cirquent::Chall { body, .. }, Step::Body)
            | (Cirquent::Chexists { body, .. }, Step::Body) => body,
            _ => return false,
        };
    }
    false
}

/// Forward rule application: computes the conclusion from the premises.
///
/// Witness fields consumed per rule (`path` defaults to the root):
///
/// * commutativity / associativity / identity / distribution rules: `path`;
/// * dominations and Trivialization: `path`, `intro` (the introduced
///   subtree; a positive nonlogical atom for Trivialization);
/// * cleansing rules: `path`, `hole`, and `intro` (the component the
///   conclusion's inner node carries on its discarded side; for
///   ChallCleansing `intro` is the inner body `A(y)` and `var` is `y`,
///   defaulting to the pattern variable);
/// * chotomy rules: `path` (the fresh cluster is read off the premise);
/// * choosing rules: `cluster`, `branch`/`constant`, and `intro` = the whole
///   conclusion, which is validated against the premise by collapse;
/// * ChandSplitting: `cluster`; ChallSplitting: `cluster`, `constant`,
///   `var`.
pub fn apply_rule(
    rule: RuleName,
    premises: &[Cirquent],
    w: &Witness,
) -> Result<Cirquent, RuleError> {
    if premises.len() != rule.premise_count() {
        return Err(RuleError::PremiseCount {
            rule,
            want: rule.premise_count(),
            got: premises.len(),
        });
    }

    let path = w.path.clone().unwrap_or_default();
    let shape = |detail: &str| RuleError::ShapeMismatch {
        rule,
        path: path.clone(),
        detail: detail.to_string(),
    };
    let side = |detail: String| RuleError::SideCondition { rule, detail };
    let need = |field: &'static str| RuleError::MissingWitness { rule, field };

    // Choosing rules: premise must equal the collapse of the conclusion.
    if rule.is_choosing() {
        let conclusion = w.intro.clone().ok_or(need("intro"))?;
        let cluster = w.cluster.clone().ok_or(need("cluster"))?;
        let collapsed = match rule {
            RuleName::LeftChorChoosing => collapse_chor(&conclusion, &cluster, 0),
            RuleName::RightChorChoosing => collapse_chor(&conclusion, &cluster, 1),
            RuleName::ChexistsChoosing => {
                let constant = w.constant.ok_or(need("const"))?;
                collapse_chexists(&conclusion, &cluster, constant)
            }
            _ => unreachable!(),
        };
        if !conclusion.has_cluster(&cluster) {
            return Err(side(format!("cluster `{cluster}` does not occur in the conclusion")));
        }
        if !premises[0].alpha_eq(&collapsed) {
            return Err(side(format!(
                "premise is not the collapse of the conclusion at cluster `{cluster}`"
            )));
        }
        conclusion.validate()?;
        return Ok(conclusion);
    }

    // Splitting rules: root only.
    match rule {
        RuleName::ChandSplitting => {
            let cluster = w.cluster.clone().ok_or(need("cluster"))?;
            let (a, b) = (&premises[0], &premises[1]);
            if a.has_cluster(&cluster) || b.has_cluster(&cluster) {
                return Err(side(format!("cluster `{cluster}` occurs in a premise")));
            }
            let conclusion = Cirquent::Chand {
                cluster,
                left: Box::new(a.clone()),
                right: Box::new(b.clone()),
            };
            conclusion.validate()?;
            return Ok(conclusion);
        }
        RuleName::ChallSplitting => {
            let cluster = w.cluster.clone().ok_or(need("cluster"))?;
            let constant = w.constant.ok_or(need("const"))?;
            let var = w.var.clone().unwrap_or_else(|| "x".to_string());
            let premise = &premises[0];
            // A(x) is A(a) with every occurrence of the constant a replaced
            // by x; no replaced occurrence may sit under a binder of x.
            fn replace_const(
                c: &Cirquent,
                constant: u64,
                var: &str,
                shadowed: bool,
            ) -> Result<Cirquent, ()> {
                match c {
                    Cirquent::Atom { pred, negated, args } => {
                        let mut out = Vec::with_capacity(args.len());
                        for t in args {
                            match t {
                                Term::Const(n) if *n == constant => {
                                    if shadowed {
                                        return Err(());
                                    }
                                    out.push(Term::Var(var.to_string()));
                                }
                                other => out.push(other.clone()),
                            }
                        }
                        Ok(Cirquent::Atom {
                            pred: pred.clone(),
                            negated: *negated,
                            args: out,
                        })
                    }
                    Cirquent::Chall { cluster, var: v, body } => Ok(Cirquent::Chall {
                        cluster: cluster.clone(),
                        var: v.clone(),
                        body: Box::new(replace_const(body, constant, var, shadowed || v == var)?),
                    }),
                    Cirquent::Chexists { cluster, var: v, body } => Ok(Cirquent::Chexists {
                        cluster: cluster.clone(),
                        var: v.clone(),
                        body: Box::new(replace_const(body, constant, var, shadowed || v == var)?),
                    }),
                    Cirquent::Top | Cirquent::Bot => Ok(c.clone()),
                    Cirquent::Pand(a, b) => Ok(Cirquent::Pand(
                        Box::new(replace_const(a, constant, var, shadowed)?),
                        Box::new(replace_const(b, constant, var, shadowed)?),
                    )),
                    Cirquent::Por(a, b) => Ok(Cirquent::Por(
                        Box::new(replace_const(a, constant, var, shadowed)?),
                        Box::new(replace_const(b, constant, var, shadowed)?),
                    )),
                    Cirquent::Chand { cluster, left, right } => Ok(Cirquent::Chand {
                        cluster: cluster.clone(),
                        left: Box::new(replace_const(left, constant, var, shadowed)?),
                        right: Box::new(replace_const(right, constant, var, shadowed)?),
                    }),
                    Cirquent::Chor { cluster, left, right } => Ok(Cirquent::Chor {
                        cluster: cluster.clone(),
                        left: Box::new(replace_const(left, constant, var, shadowed)?),
                        right: Box::new(replace_const(right, constant, var, shadowed)?),
                    }),
                }
            }
            let body = replace_const(premise, constant, &var, false).map_err(|()| {
                side(format!(
                    "constant {constant} occurs in the scope of a binder of `{var}`"
                ))
            })?;
            if body.has_cluster(&cluster) {
                return Err(side(format!("cluster `{cluster}` occurs in the body")));
            }
            if body.constants().contains(&constant) {
                return Err(side(format!("constant {constant} still occurs in the body")));
            }
            let conclusion = Cirquent::Chall {
                cluster,
                var,
                body: Box::new(body),
            };
            conclusion.validate()?;
            return Ok(conclusion);
        }
        _ => {}
    }

    // Context rules: rewrite the subtree at `path`.
    let premise = &premises[0];
    let piece = premise
        .subtree(&path)
        .map_err(RuleError::Syntax)?
        .clone();

    let new_piece = match rule {
        RuleName::PorCommutativity => match piece {
            Cirquent::Por(a, b) => Cirquent::Por(b, a),
            _ => return Err(shape("a parallel disjunction")),
        },
        RuleName::PandCommutativity => match piece {
            Cirquent::Pand(a, b) => Cirquent::Pand(b, a),
            _ => return Err(shape("a parallel conjunction")),
        },
        RuleName::PorAssociativity => match piece {
            Cirquent::Por(a, bc) => match *bc {
                Cirquent::Por(b, c) => {
                    Cirquent::Por(Box::new(Cirquent::Por(a, b)), c)
                }
                _ => return Err(shape("A | (B | C)")),
            },
            _ => return Err(shape("A | (B | C)")),
        },
        RuleName::PandAssociativity => match piece {
            Cirquent::Pand(a, bc) => match *bc {
                Cirquent::Pand(b, c) => {
                    Cirquent::Pand(Box::new(Cirquent::Pand(a, b)), c)
                }
                _ => return Err(shape("A & (B & C)")),
            },
            _ => return Err(shape("A & (B & C)")),
        },
        RuleName::PorIdentity => Cirquent::Por(Box::new(piece), Box::new(Cirquent::Bot)),
        RuleName::PandIdentity => Cirquent::Pand(Box::new(piece), Box::new(Cirquent::Top)),
        RuleName::PorDomination => {
            if piece != Cirquent::Top {
                return Err(shape("the literal T"));
            }
            let intro = w.intro.clone().ok_or(need("intro"))?;
            Cirquent::Por(Box::new(intro), Box::new(Cirquent::Top))
        }
        RuleName::PandDomination => {
            if piece != Cirquent::Bot {
                return Err(shape("the literal F"));
            }
            let intro = w.intro.clone().ok_or(need("intro"))?;
            Cirquent::Pand(Box::new(intro), Box::new(Cirquent::Bot))
        }
        RuleName::Trivialization => {
            if piece != Cirquent::Top {
                return Err(shape("the literal T"));
            }
            let intro = w.intro.clone().ok_or(need("intro"))?;
            match &intro {
                Cirquent::Atom { negated: false, .. } => {}
                _ => {
                    return Err(side(
                        "the introduced subtree must be a positive nonlogical atom".to_string(),
                    ))
                }
            }
            Cirquent::Por(Box::new(intro.negate()), Box::new(intro))
        }
        RuleName::PandDistribution => match piece {
            Cirquent::Pand(l, r) => match (*l, *r) {
                (Cirquent::Por(a, c1), Cirquent::Por(b, c2)) => {
                    if !c1.alpha_eq(&c2) {
                        return Err(shape("(A | C) & (B | C) with matching C"));
                    }
                    Cirquent::Por(Box::new(Cirquent::Pand(a, b)), c1)
                }
                _ => return Err(shape("(A | C) & (B | C)")),
            },
            _ => return Err(shape("(A | C) & (B | C)")),
        },
        RuleName::ChandDistribution => match piece {
            Cirquent::Chand { cluster, left, right } => match (*left, *right) {
                (Cirquent::Por(a, c1), Cirquent::Por(b, c2)) => {
                    if !c1.alpha_eq(&c2) {
                        return Err(shape("(A | C) &[c] (B | C) with matching C"));
                    }
                    Cirquent::Por(
                        Box::new(Cirquent::Chand {
                            cluster,
                            left: a,
                            right: b,
                        }),
                        c1,
                    )
                }
                _ => return Err(shape("(A | C) &[c] (B | C)")),
            },
            _ => return Err(shape("(A | C) &[c] (B | C)")),
        },
        RuleName::ChallDistribution => match piece {
            Cirquent::Chall { cluster, var, body } => match *body {
                Cirquent::Por(a, b) => {
                    if b.free_vars().contains(&var) {
                        return Err(side(format!("`{var}` occurs free in the moved disjunct")));
                    }
                    Cirquent::Por(
                        Box::new(Cirquent::Chall {
                            cluster,
                            var,
                            body: a,
                        }),
                        b,
                    )
                }
                _ => return Err(shape("all[c] x. (A | B)")),
            },
            _ => return Err(shape("all[c] x. (A | B)")),
        },
        RuleName::LeftChandCleansing | RuleName::RightChandCleansing => {
            let hole = w.hole.clone().ok_or(need("hole"))?;
            let intro = w.intro.clone().ok_or(need("intro"))?;
            let Cirquent::Chand { cluster, left, right } = piece else {
                return Err(shape("a choice conjunction"));
            };
            if rule == RuleName::LeftChandCleansing {
                let kept = left.subtree(&hole).map_err(RuleError::Syntax)?.clone();
                let inner = Cirquent::Chand {
                    cluster: cluster.clone(),
                    left: Box::new(kept),
                    right: Box::new(intro),
                };
                Cirquent::Chand {
                    cluster,
                    left: Box::new(left.replace_at(&hole, inner)?),
                    right,
                }
            } else {
                let kept = right.subtree(&hole).map_err(RuleError::Syntax)?.clone();
                let inner = Cirquent::Chand {
                    cluster: cluster.clone(),
                    left: Box::new(intro),
                    right: Box::new(kept),
                };
                Cirquent::Chand {
                    cluster,
                    left,
                    right: Box::new(right.replace_at(&hole, inner)?),
                }
            }
        }
        RuleName::ChallCleansing => {
            let hole = w.hole.clone().ok_or(need("hole"))?;
            let Cirquent::Chall { cluster, var, body } = piece else {
                return Err(shape("a choice universal quantifier"));
            };
            if binder_intervenes(&body, &hole, &var) {
                return Err(side(format!(
                    "a binder of `{var}` intervenes between the pattern root and the hole"
                )));
            }
            let here = body.subtree(&hole).map_err(RuleError::Syntax)?.clone();
            let y = w.var.clone().unwrap_or_else(|| var.clone());
            // The conclusion's inner body A(y): either supplied (so that
            // occurrences of x already bound by the pattern root can stay
            // x), or defaulting to renaming every free x to y.
            let inner_body = match &w.intro {
                Some(intro) => {
                    if !subst_var_avoiding(intro, &y, &var).alpha_eq(&here) {
                        return Err(side(
                            "introduced inner body does not match the premise component"
                                .to_string(),
                        ));
                    }
                    intro.clone()
                }
                None => subst_var_avoiding(&here, &var, &y),
            };
            let inner = Cirquent::Chall {
                cluster: cluster.clone(),
                var: y,
                body: Box::new(inner_body),
            };
            Cirquent::Chall {
                cluster,
                var,
                body: Box::new(body.replace_at(&hole, inner)?),
            }
        }
        RuleName::Chandchotomy | RuleName::Challchotomy | RuleName::Chandallchotomy => {
            let conclusion_piece = chotomy_conclusion_piece(rule, &piece).map_err(|detail| {
                RuleError::ShapeMismatch {
                    rule,
                    path: path.clone(),
                    detail,
                }
            })?;
            let fresh = match &piece {
                Cirquent::Chand { cluster, .. } => cluster.clone(),
                _ => unreachable!("chotomy premises are chand-rooted"),
            };
            let conclusion = premise.replace_at(&path, conclusion_piece)?;
            if conclusion.has_cluster(&fresh) {
                return Err(side(format!(
                    "eliminated cluster `{fresh}` still occurs in the conclusion"
                )));
            }
            conclusion.validate()?;
            return Ok(conclusion);
        }
        _ => unreachable!("remaining rules handled above"),
    };

    let conclusion = premise.replace_at(&path, new_piece)?;
    conclusion.validate()?;
    Ok(conclusion)
}

/// Given a chotomy PREMISE piece, extracts the corresponding conclusion
/// piece, verifying the premise's internal copies agree (alpha-aware) and
/// the implicit no-capture conditions hold. Returns a shape description on
/// mismatch.
fn chotomy_conclusion_piece(rule: RuleName, piece: &Cirquent) -> Result<Cirquent, String> {
    match rule {
        RuleName::Chandchotomy => {
            // ((A & (C &[b] D)) &[a] (B & (C &[b] D))) &[c] (((A &[a] B) & C) &[b] ((A &[a] B) & D))
            let err = || "the Chandchotomy premise shape".to_string();
            let Cirquent::Chand { left: l, right: r, .. } = piece else {
                return Err(err());
            };
            let Cirquent::Chand { cluster: a_cl, left: l0, right: l1 } = &**l else {
                return Err(err());
            };
            let Cirquent::Chand { cluster: b_cl, left: r0, right: r1 } = &**r else {
                return Err(err());
            };
            let (Cirquent::Pand(a, cbd1), Cirquent::Pand(b, cbd2)) = (&**l0, &**l1) else {
                return Err(err());
            };
            let (Cirquent::Pand(aab1, c), Cirquent::Pand(aab2, d)) = (&**r0, &**r1) else {
                return Err(err());
            };
            let chand_ab = Cirquent::Chand {
                cluster: a_cl.clone(),
                left: a.clone(),
                right: b.clone(),
            };
            let chand_cd = Cirquent::Chand {
                cluster: b_cl.clone(),
                left: c.clone(),
                right: d.clone(),
            };
            if !cbd1.alpha_eq(&chand_cd) || !cbd2.alpha_eq(&chand_cd) {
                return Err("embedded copies of C &[b] D disagree".to_string());
            }
            if !aab1.alpha_eq(&chand_ab) || !aab2.alpha_eq(&chand_ab) {
                return Err("embedded copies of A &[a] B disagree".to_string());
            }
            Ok(Cirquent::Pand(Box::new(chand_ab), Box::new(chand_cd)))
        }
        RuleName::Challchotomy => {
            // (all[a] x. (A & all[b] y. B)) &[c] (all[b] y. (all[a] x. A & B))
            let err = || "the Challchotomy premise shape".to_string();
            let Cirquent::Chand { left: l, right: r, .. } = piece else {
                return Err(err());
            };
            let Cirquent::Chall { cluster: a_cl, var: x, body: lb } = &**l else {
                return Err(err());
            };
            let Cirquent::Chall { cluster: b_cl, var: y, body: rb } = &**r else {
                return Err(err());
            };
            let Cirquent::Pand(a, qb) = &**lb else { return Err(err()) };
            let Cirquent::Pand(qa, b) = &**rb else { return Err(err()) };
            let chall_a = Cirquent::Chall {
                cluster: a_cl.clone(),
                var: x.clone(),
                body: a.clone(),
            };
            let chall_b = Cirquent::Chall {
                cluster: b_cl.clone(),
                var: y.clone(),
                body: b.clone(),
            };
            if !qb.alpha_eq(&chall_b) {
                return Err("embedded copy of all[b] y. B disagrees".to_string());
            }
            if !qa.alpha_eq(&chall_a) {
                return Err("embedded copy of all[a] x. A disagrees".to_string());
            }
            if chall_b.free_vars().contains(x.as_str()) {
                return Err(format!("`{x}` occurs free in the second conjunct"));
            }
            if chall_a.free_vars().contains(y.as_str()) {
                return Err(format!("`{y}` occurs free in the first conjunct"));
            }
            Ok(Cirquent::Pand(Box::new(chall_a), Box::new(chall_b)))
        }
        RuleName::Chandallchotomy => {
            // ((A & all[b] x. C) &[a] (B & all[b] x. C)) &[c] (all[b] x. ((A &[a] B) & C))
            let err = || "the Chandallchotomy premise shape".to_string();
            let Cirquent::Chand { left: l, right: r, .. } = piece else {
                return Err(err());
            };
            let Cirquent::Chand { cluster: a_cl, left: l0, right: l1 } = &**l else {
                return Err(err());
            };
            let Cirquent::Chall { cluster: b_cl, var: x, body: rb } = &**r else {
                return Err(err());
            };
            let (Cirquent::Pand(a, qb1), Cirquent::Pand(b, qb2)) = (&**l0, &**l1) else {
                return Err(err());
            };
            let Cirquent::Pand(qa, c) = &**rb else { return Err(err()) };
            let chand_ab = Cirquent::Chand {
                cluster: a_cl.clone(),
                left: a.clone(),
                right: b.clone(),
            };
            let chall_c = Cirquent::Chall {
                cluster: b_cl.clone(),
                var: x.clone(),
                body: c.clone(),
            };
            if !qb1.alpha_eq(&chall_c) || !qb2.alpha_eq(&chall_c) {
                return Err("embedded copies of all[b] x. C disagree".to_string());
            }
            if !qa.alpha_eq(&chand_ab) {
                return Err("embedded copy of A &[a] B disagrees".to_string());
            }
            if chand_ab.free_vars().contains(x.as_str()) {
                return Err(format!("`{x}` occurs free in the first conjunct"));
            }
            Ok(Cirquent::Pand(Box::new(chand_ab), Box::new(chall_c)))
        }
        _ => unreachable!(),
    }
}

/// Given a chotomy CONCLUSION piece and the name of the eliminated cluster,
/// builds the premise piece. Returns None if the piece does not match the
/// rule's conclusion shape.
fn chotomy_premise_piece(rule: RuleName, piece: &Cirquent, fresh: &str) -> Option<Cirquent> {
    let chand = |cluster: &str, l: Cirquent, r: Cirquent| Cirquent::Chand {
        cluster: cluster.to_string(),
        left: Box::new(l),
        right: Box::new(r),
    };
    let pand = |l: Cirquent, r: Cirquent| Cirquent::Pand(Box::new(l), Box::new(r));
    match rule {
        RuleName::Chandchotomy => {
            let Cirquent::Pand(l, r) = piece else { return None };
            let Cirquent::Chand { cluster: a_cl, left: a, right: b } = &**l else {
                return None;
            };
            let Cirquent::Chand { cluster: b_cl, left: c, right: d } = &**r else {
                return None;
            };
            Some(chand(
                fresh,
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
            ))
        }
        RuleName::Challchotomy => {
            let Cirquent::Pand(l, r) = piece else { return None };
            let Cirquent::Chall { cluster: a_cl, var: x, body: a } = &**l else {
                return None;
            };
            let Cirquent::Chall { cluster: b_cl, var: y, body: b } = &**r else {
                return None;
            };
            if r.free_vars().contains(x.as_str()) || l.free_vars().contains(y.as_str()) {
                return None;
            }
            Some(chand(
                fresh,
                Cirquent::Chall {
                    cluster: a_cl.clone(),
                    var: x.clone(),
                    body: Box::new(pand((**a).clone(), (**r).clone())),
                },
                Cirquent::Chall {
                    cluster: b_cl.clone(),
                    var: y.clone(),
                    body: Box::new(pand((**l).clone(), (**b).clone())),
                },
            ))
        }
        RuleName::Chandallchotomy => {
            let Cirquent::Pand(l, r) = piece else { return None };
            let Cirquent::Chand { cluster: a_cl, left: a, right: b } = &**l else {
                return None;
            };
            let Cirquent::Chall { cluster: b_cl, var: x, body: c } = &**r else {
                return None;
            };
            if l.free_vars().contains(x.as_str()) {
                return None;
            }
            Some(chand(
                fresh,
                chand(
                    a_cl,
                    pand((**a).clone(), (**r).clone()),
                    pand((**b).clone(), (**r).clone()),
                ),
                Cirquent::Chall {
                    cluster: b_cl.clone(),
                    var: x.clone(),
                    body: Box::new(pand((**l).clone(), (**c).clone())),
                },
            ))
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

/// Checks that `conclusion` follows from `premises` by `rule`, optionally
/// narrowed by a witness. The check inverts the conclusion into candidate
/// premises and compares alpha-equivalence against the claimed ones.
pub fn check_step_cirquents(
    rule: RuleName,
    premises: &[&Cirquent],
    conclusion: &Cirquent,
    w: &Witness,
) -> Result<(), String> {
    if premises.len() != rule.premise_count() {
        return Err(format!(
            "{rule} takes {} premise(s), got {}",
            rule.premise_count(),
            premises.len()
        ));
    }

    // Root-only and whole-cirquent rules first.
    match rule {
        RuleName::LeftChorChoosing | RuleName::RightChorChoosing => {
            let branch = match rule {
                RuleName::LeftChorChoosing => 0,
                _ => 1,
            };
            if let Some(b) = w.branch {
                if b != branch {
                    return Err(format!("{rule} resolves branch {branch}, witness says {b}"));
                }
            }
            let clusters = cluster_candidates(conclusion, ClusterKind::Chor, &w.cluster);
            if clusters.is_empty() {
                return Err("conclusion has no |[_] cluster to resolve".to_string());
            }
            for cl in &clusters {
                let cand = collapse_chor(conclusion, cl, branch);
                if premises[0].alpha_eq(&cand) {
                    return Ok(());
                }
            }
            Err(format!(
                "premise is not the branch-{branch} collapse of the conclusion (tried clusters {})",
                clusters.join(", ")
            ))
        }
        RuleName::ChexistsChoosing => {
            let clusters = cluster_candidates(conclusion, ClusterKind::Chexists, &w.cluster);
            if clusters.is_empty() {
                return Err("conclusion has no ex[_] cluster to resolve".to_string());
            }
            let constants = constant_candidates(premises[0], conclusion, &w.constant);
            for cl in &clusters {
                for &a in &constants {
                    let cand = collapse_chexists(conclusion, cl, a);
                    if premises[0].alpha_eq(&cand) {
                        return Ok(());
                    }
                }
            }
            Err(format!(
                "premise is not a constant instantiation collapse of the conclusion (tried clusters {}, constants {:?})",
                clusters.join(", "),
                constants
            ))
        }
        RuleName::ChandSplitting => {
            let Cirquent::Chand { cluster, left, right } = conclusion else {
                return Err("conclusion of ChandSplitting must be &[c]-rooted".to_string());
            };
            if let Some(wc) = &w.cluster {
                if wc != cluster {
                    return Err(format!(
                        "witness cluster `{wc}` is not the root cluster `{cluster}`"
                    ));
                }
            }
            if left.has_cluster(cluster) || right.has_cluster(cluster) {
                return Err(format!(
                    "cluster `{cluster}` occurs inside a component; it must be fresh"
                ));
            }
            if !premises[0].alpha_eq(left) {
                return Err("first premise is not the left component".to_string());
            }
            if !premises[1].alpha_eq(right) {
                return Err("second premise is not the right component".to_string());
            }
            Ok(())
        }
        RuleName::ChallSplitting => {
            let Cirquent::Chall { cluster, var, body } = conclusion else {
                return Err("conclusion of ChallSplitting must be all[c]-rooted".to_string());
            };
            if let Some(wc) = &w.cluster {
                if wc != cluster {
                    return Err(format!(
                        "witness cluster `{wc}` is not the root cluster `{cluster}`"
                    ));
                }
            }
            if body.has_cluster(cluster) {
                return Err(format!("cluster `{cluster}` occurs inside the body"));
            }
            let constants = constant_candidates(premises[0], conclusion, &w.constant);
            for &a in &constants {
                if body.constants().contains(&a) {
                    continue;
                }
                let Ok(cand) = body.substitute(var, &Term::Const(a)) else {
                    continue;
                };
                if premises[0].alpha_eq(&cand) {
                    return Ok(());
                }
            }
            Err(format!(
                "premise is not the body instantiated at a fresh constant (tried {constants:?})"
            ))
        }
        _ => {
            // Context rules: try each path (or the witnessed one).
            let paths = match &w.path {
                Some(p) => vec![p.clone()],
                None => conclusion.all_paths(),
            };
            let mut last_miss = String::new();
            for path in &paths {
                let Ok(piece) = conclusion.subtree(path) else {
                    last_miss = format!("path {path} does not address a node");
                    continue;
                };
                for premise_piece in
                    inverse_piece_candidates(rule, piece, conclusion, premises[0], path, w)
                {
                    let cand = conclusion
                        .replace_at(path, premise_piece)
                        .expect("path was just resolved");
                    if premises[0].alpha_eq(&cand) {
                        return Ok(());
                    }
                    last_miss = format!(
                        "nearest miss at {path}: premise should be `{}`",
                        print(&cand)
                    );
                }
            }
            if last_miss.is_empty() {
                last_miss = "no context position matches the rule's conclusion shape".to_string();
            }
            Err(format!("{rule} does not justify this step; {last_miss}"))
        }
    }
}

/// Cluster names of the given kind occurring in `c`, or the witnessed one.
fn cluster_candidates(c: &Cirquent, kind: ClusterKind, witness: &Option<String>) -> Vec<String> {
    let table = c.clusters_of();
    match witness {
        Some(name) => match table.get(name) {
            Some((k, _)) if *k == kind => vec![name.clone()],
            _ => Vec::new(),
        },
        None => table
            .into_iter()
            .filter(|(_, (k, _))| *k == kind)
            .map(|(name, _)| name)
            .collect(),
    }
}

/// Constants occurring in premise or conclusion, plus one fresh; or the
/// witnessed one.
fn constant_candidates(premise: &Cirquent, conclusion: &Cirquent, witness: &Option<u64>) -> Vec<u64> {
    if let Some(a) = witness {
        return vec![*a];
    }
    let mut set: BTreeSet<u64> = premise.constants();
    set.extend(conclusion.constants());
    let fresh = (0..).find(|n| !set.contains(n)).expect("naturals unbounded");
    set.insert(fresh);
    set.into_iter().collect()
}

/// Candidate premise pieces for a context rule whose conclusion piece is
/// `piece` at `path`. `premise` is the claimed premise, consulted only where
/// the inversion needs information absent from the conclusion (the chotomy
/// rules' eliminated cluster).
fn inverse_piece_candidates(
    rule: RuleName,
    piece: &Cirquent,
    _conclusion: &Cirquent,
    premise: &Cirquent,
    path: &Path,
    w: &Witness,
) -> Vec<Cirquent> {
    match rule {
        RuleName::PorCommutativity => match piece {
            Cirquent::Por(a, b) => vec![Cirquent::Por(b.clone(), a.clone())],
            _ => Vec::new(),
        },
        RuleName::PandCommutativity => match piece {
            Cirquent::Pand(a, b) => vec![Cirquent::Pand(b.clone(), a.clone())],
            _ => Vec::new(),
        },
        RuleName::PorAssociativity => match piece {
            Cirquent::Por(ab, c) => match &**ab {
                Cirquent::Por(a, b) => vec![Cirquent::Por(
                    a.clone(),
                    Box::new(Cirquent::Por(b.clone(), c.clone())),
                )],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        RuleName::PandAssociativity => match piece {
            Cirquent::Pand(ab, c) => match &**ab {
                Cirquent::Pand(a, b) => vec![Cirquent::Pand(
                    a.clone(),
                    Box::new(Cirquent::Pand(b.clone(), c.clone())),
                )],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        RuleName::PorIdentity => match piece {
            Cirquent::Por(a, b) if **b == Cirquent::Bot => vec![(**a).clone()],
            _ => Vec::new(),
        },
        RuleName::PandIdentity => match piece {
            Cirquent::Pand(a, b) if **b == Cirquent::Top => vec![(**a).clone()],
            _ => Vec::new(),
        },
        RuleName::PorDomination => match piece {
            Cirquent::Por(_, b) if **b == Cirquent::Top => vec![Cirquent::Top],
            _ => Vec::new(),
        },
        RuleName::PandDomination => match piece {
            Cirquent::Pand(_, b) if **b == Cirquent::Bot => vec![Cirquent::Bot],
            _ => Vec::new(),
        },
        RuleName::Trivialization => match piece {
            Cirquent::Por(l, r) => match (&**l, &**r) {
                (
                    Cirquent::Atom { pred: p1, negated: true, args: a1 },
                    Cirquent::Atom { pred: p2, negated: false, args: a2 },
                ) if p1 == p2 && a1 == a2 => vec![Cirquent::Top],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        RuleName::PandDistribution => match piece {
            Cirquent::Por(ab, c) => match &**ab {
                Cirquent::Pand(a, b) => vec![Cirquent::Pand(
                    Box::new(Cirquent::Por(a.clone(), c.clone())),
                    Box::new(Cirquent::Por(b.clone(), c.clone())),
                )],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        RuleName::ChandDistribution => match piece {
            Cirquent::Por(ab, c) => match &**ab {
                Cirquent::Chand { cluster, left, right } => vec![Cirquent::Chand {
                    cluster: cluster.clone(),
                    left: Box::new(Cirquent::Por(left.clone(), c.clone())),
                    right: Box::new(Cirquent::Por(right.clone(), c.clone())),
                }],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        RuleName::ChallDistribution => match piece {
            Cirquent::Por(qa, b) => match &**qa {
                Cirquent::Chall { cluster, var, body } => {
                    if b.free_vars().contains(var.as_str()) {
                        Vec::new()
                    } else {
                        vec![Cirquent::Chall {
                            cluster: cluster.clone(),
                            var: var.clone(),
                            body: Box::new(Cirquent::Por(body.clone(), b.clone())),
                        }]
                    }
                }
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        RuleName::LeftChandCleansing | RuleName::RightChandCleansing => {
            let Cirquent::Chand { cluster, left, right } = piece else {
                return Vec::new();
            };
            let component: &Cirquent = if rule == RuleName::LeftChandCleansing {
                left
            } else {
                right
            };
            let holes = match &w.hole {
                Some(h) => vec![h.clone()],
                None => component.all_paths(),
            };
            let mut out = Vec::new();
            for hole in holes {
                let Ok(node) = component.subtree(&hole) else { continue };
                let Cirquent::Chand { cluster: inner_cl, left: il, right: ir } = node else {
                    continue;
                };
                if inner_cl != cluster {
                    continue;
                }
                // The inner node's kept side matches the outer side.
                let kept = if rule == RuleName::LeftChandCleansing { il } else { ir };
                let Ok(new_component) = component.replace_at(&hole, (**kept).clone()) else {
                    continue;
                };
                out.push(if rule == RuleName::LeftChandCleansing {
                    Cirquent::Chand {
                        cluster: cluster.clone(),
                        left: Box::new(new_component),
                        right: right.clone(),
                    }
                } else {
                    Cirquent::Chand {
                        cluster: cluster.clone(),
                        left: left.clone(),
                        right: Box::new(new_component),
                    }
                });
            }
            out
        }
        RuleName::ChallCleansing => {
            let Cirquent::Chall { cluster, var, body } = piece else {
                return Vec::new();
            };
            let holes = match &w.hole {
                Some(h) => vec![h.clone()],
                None => body.all_paths(),
            };
            let mut out = Vec::new();
            for hole in holes {
                let Ok(node) = body.subtree(&hole) else { continue };
                let Cirquent::Chall { cluster: inner_cl, var: y, body: inner } = node else {
                    continue;
                };
                if inner_cl != cluster {
                    continue;
                }
                if binder_intervenes(body, &hole, var) {
                    continue;
                }
                let restored = subst_var_avoiding(inner, y, var);
                let Ok(new_body) = body.replace_at(&hole, restored) else { continue };
                out.push(Cirquent::Chall {
                    cluster: cluster.clone(),
                    var: var.clone(),
                    body: Box::new(new_body),
                });
            }
            out
        }
        RuleName::Chandchotomy | RuleName::Challchotomy | RuleName::Chandallchotomy => {
            // The eliminated cluster is read off the premise at the same
            // position (contexts agree outside the rewrite site), or off the
            // witness.
            let mut fresh_candidates: Vec<String> = Vec::new();
            if let Some(cl) = &w.cluster {
                fresh_candidates.push(cl.clone());
            } else if let Ok(Cirquent::Chand { cluster, .. }) = premise.subtree(path) {
                fresh_candidates.push(cluster.clone());
            }
            let mut out = Vec::new();
            for fresh in fresh_candidates {
                if _conclusion.has_cluster(&fresh) {
                    continue;
                }
                if let Some(p) = chotomy_premise_piece(rule, piece, &fresh) {
                    out.push(p);
                }
            }
            out
        }
        _ => unreachable!("root-only rules handled by the caller"),
    }
}

// ---------------------------------------------------------------------------
// Proof objects
// ---------------------------------------------------------------------------

/// How a proof line is justified.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)] // proofs hold few lines; boxing the witness buys nothing
pub enum Justification {
    /// The axiom: the line's cirquent must be exactly `T`.
    Axiom,
    /// An assumed starting point. Only legal as the first line of a
    /// derivation *fragment* (see [`check_fragment`]); full proofs reject it.
    Premise,
    /// A rule application.
    Rule {
        /// Rule used.
        rule: RuleName,
        /// Indices of the premise lines (1-based, strictly smaller).
        premises: Vec<usize>,
        /// Optional witness narrowing the checker's search.
        witness: Witness,
    },
}

/// One proof line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    /// 1-based index; lines are numbered consecutively from 1.
    pub index: usize,
    /// The closed cirquent derived at this line.
    pub cirquent: Cirquent,
    /// Its justification.
    pub justification: Justification,
}

/// A proof: a sequence of lines, the last of which is the theorem.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proof {
    /// The lines, in order.
    pub lines: Vec<ProofLine>,
}

/// A failed check, naming the line.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {index}: {message}")]
pub struct StepDiagnostic {
    /// 1-based index of the failing line.
    pub index: usize,
    /// What went wrong.
    pub message: String,
}

/// Shared per-line well-formedness checks: numbering, validity, closedness.
fn precheck_line(proof: &Proof, index: usize) -> Result<&ProofLine, StepDiagnostic> {
    let diag = |message: String| StepDiagnostic { index, message };
    let line = proof
        .lines
        .get(index.wrapping_sub(1))
        .ok_or_else(|| diag(format!("no line {index}")))?;
    if line.index != index {
        return Err(diag(format!(
            "line is numbered {}, expected {index}",
            line.index
        )));
    }
    if let Err(e) = line.cirquent.validate() {
        return Err(diag(format!("ill-formed cirquent: {e}")));
    }
    if !line.cirquent.is_closed() {
        return Err(diag("proof lines must be closed".to_string()));
    }
    Ok(line)
}

/// Checks a single line of a proof (1-based index), assuming earlier lines
/// are well-formed.
pub fn check_step(proof: &Proof, index: usize) -> Result<(), StepDiagnostic> {
    let diag = |message: String| StepDiagnostic { index, message };
    let line = precheck_line(proof, index)?;
    match &line.justification {
        Justification::Axiom => {
            if line.cirquent != Cirquent::Top {
                Err(diag("axiom lines must carry exactly T".to_string()))
            } else {
                Ok(())
            }
        }
        Justification::Premise => Err(diag(
            "Premise is allowed only as the first line of a derivation fragment".to_string(),
        )),
        Justification::Rule { rule, premises, witness } => {
            if premises.len() != rule.premise_count() {
                return Err(diag(format!(
                    "{rule} takes {} premise reference(s), got {}",
                    rule.premise_count(),
                    premises.len()
                )));
            }
            let mut prem_cirquents = Vec::with_capacity(premises.len());
            for &p in premises {
                if p == 0 || p >= index {
                    return Err(diag(format!(
                        "premise reference {p} must be a strictly smaller line index"
                    )));
                }
                prem_cirquents.push(&proof.lines[p - 1].cirquent);
            }
            check_step_cirquents(*rule, &prem_cirquents, &line.cirquent, witness)
                .map_err(diag)
        }
    }
}

/// Checks every line; returns the theorem (the last line's cirquent) on
/// success and the first failing line's diagnostic otherwise.
pub fn check_proof(proof: &Proof) -> Result<Cirquent, StepDiagnostic> {
    if proof.lines.is_empty() {
        return Err(StepDiagnostic {
            index: 0,
            message: "proof has no lines".to_string(),
        });
    }
    for i in 1..=proof.lines.len() {
        check_step(proof, i)?;
    }
    Ok(proof.lines.last().expect("nonempty").cirquent.clone())
}

/// Checks a derivation fragment: line 1 must be a `Premise` line; every
/// later line must follow by a rule from earlier lines. Returns the premise
/// and final cirquents, so a valid fragment certifies that its last line is
/// derivable from its first.
pub fn check_fragment(proof: &Proof) -> Result<(Cirquent, Cirquent), StepDiagnostic> {
    let first = precheck_line(proof, 1)?;
    if first.justification != Justification::Premise {
        return Err(StepDiagnostic {
            index: 1,
            message: "a fragment starts with a Premise line".to_string(),
        });
    }
    let premise = first.cirquent.clone();
    for i in 2..=proof.lines.len() {
        check_step(proof, i)?;
    }
    Ok((premise, proof.lines.last().expect("nonempty").cirquent.clone()))
}

// ---------------------------------------------------------------------------
// Proof text format
// ---------------------------------------------------------------------------

/// Error parsing a proof file.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("proof line {line_no}: {message}")]
pub struct ProofParseError {
    /// 1-based source line number.
    pub line_no: usize,
    /// What went wrong.
    pub message: String,
}

/// Parses the proof file format. One step per line:
///
/// ```text
/// <n>. <cirquent> ; <RuleName>: <premise-list> [; <witness>]
/// <n>. T ; Axiom
/// <n>. <cirquent> ; Premise        (first line of a fragment only)
/// ```
///
/// The witness is space-separated `key=value` pairs: `path=/l/r`,
/// `hole=/l`, `cluster=c`, `const=3`, `branch=0`, `var=x`. Blank lines and
/// `#` comments are ignored. Lines must be numbered consecutively from 1.
pub fn parse_proof(text: &str) -> Result<Proof, ProofParseError> {
    let mut lines = Vec::new();
    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let err = |message: String| ProofParseError { line_no, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        // <n>.
        let digits: String = content.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(err("expected a line number".to_string()));
        }
        let index: usize = digits
            .parse()
            .map_err(|_| err("line number out of range".to_string()))?;
        let rest = content[digits.len()..]
            .strip_prefix('.')
            .ok_or_else(|| err("expected `.` after the line number".to_string()))?;
        // <cirquent> ; <justification> [; <witness>]
        let mut parts = rest.splitn(3, ';');
        let cirquent_text = parts.next().unwrap_or("").trim();
        let just_text = parts
            .next()
            .ok_or_else(|| err("expected `;` and a justification".to_string()))?
            .trim();
        let witness_text = parts.next().map(str::trim);

        let cirquent = crate::syntax::parse(cirquent_text)
            .map_err(|e| err(format!("bad cirquent: {e}")))?;

        let justification = if just_text == "Axiom" {
            if witness_text.is_some_and(|w| !w.is_empty()) {
                return Err(err("axiom lines take no witness".to_string()));
            }
            Justification::Axiom
        } else if just_text == "Premise" {
            if witness_text.is_some_and(|w| !w.is_empty()) {
                return Err(err("premise lines take no witness".to_string()));
            }
            Justification::Premise
        } else {
            let (rule_name, prem_text) = just_text
                .split_once(':')
                .ok_or_else(|| err("expected `RuleName: premises`".to_string()))?;
            let rule: RuleName = rule_name
                .trim()
                .parse()
                .map_err(|e: String| err(e))?;
            let mut premises = Vec::new();
            for p in prem_text.split(',') {
                let p = p.trim();
                if p.is_empty() {
                    return Err(err("empty premise reference".to_string()));
                }
                premises.push(
                    p.parse::<usize>()
                        .map_err(|_| err(format!("bad premise reference `{p}`")))?,
                );
            }
            let witness = match witness_text {
                Some(wt) if !wt.is_empty() => parse_witness(wt).map_err(&err)?,
                _ => Witness::default(),
            };
            Justification::Rule {
                rule,
                premises,
                witness,
            }
        };

        let expected = lines.len() + 1;
        if index != expected {
            return Err(err(format!(
                "line numbered {index}, expected {expected} (lines must be consecutive from 1)"
            )));
        }
        if let Justification::Rule { premises, .. } = &justification {
            if let Some(&p) = premises.iter().find(|&&p| p == 0 || p >= index) {
                return Err(err(format!(
                    "premise reference {p} must point at an earlier line (this is line {index})"
                )));
            }
        }
        lines.push(ProofLine {
            index,
            cirquent,
            justification,
        });
    }
    Ok(Proof { lines })
}

fn parse_witness(text: &str) -> Result<Witness, String> {
    let mut w = Witness::default();
    for pair in text.split_whitespace() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("witness field `{pair}` is not key=value"))?;
        match key {
            "path" => w.path = Some(value.parse()?),
            "hole" => w.hole = Some(value.parse()?),
            "cluster" => w.cluster = Some(value.to_string()),
            "const" => {
                w.constant =
                    Some(value.parse().map_err(|_| format!("bad constant `{value}`"))?)
            }
            "branch" => match value {
                "0" => w.branch = Some(0),
                "1" => w.branch = Some(1),
                _ => return Err(format!("bad branch `{value}` (want 0 or 1)")),
            },
            "var" => w.var = Some(value.to_string()),
            other => return Err(format!("unknown witness field `{other}`")),
        }
    }
    Ok(w)
}

/// Renders a proof in the file format parsed by [`parse_proof`]. In-memory
/// `intro` witnesses are not serialized; the checker does not need them.
pub fn format_proof(proof: &Proof) -> String {
    let mut out = String::new();
    for line in &proof.lines {
        out.push_str(&format!("{}. {}", line.index, print(&line.cirquent)));
        match &line.justification {
            Justification::Axiom => out.push_str(" ; Axiom"),
            Justification::Premise => out.push_str(" ; Premise"),
            Justification::Rule { rule, premises, witness } => {
                let prems: Vec<String> = premises.iter().map(|p| p.to_string()).collect();
                out.push_str(&format!(" ; {rule}: {}", prems.join(",")));
                let mut fields = Vec::new();
                if let Some(p) = &witness.path {
                    fields.push(format!("path={p}"));
                }
                if let Some(h) = &witness.hole {
                    fields.push(format!("hole={h}"));
                }
                if let Some(c) = &witness.cluster {
                    fields.push(format!("cluster={c}"));
                }
                if let Some(a) = witness.constant {
                    fields.push(format!("const={a}"));
                }
                if let Some(b) = witness.branch {
                    fields.push(format!("branch={b}"));
                }
                if let Some(v) = &witness.var {
                    fields.push(format!("var={v}"));
                }
                if !fields.is_empty() {
                    out.push_str(&format!(" ; {}", fields.join(" ")));
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn c(text: &str) -> Cirquent {
        parse(text).expect("test cirquent parses")
    }

    fn check1(rule: RuleName, premise: &str, conclusion: &str) -> Result<(), String> {
        check_step_cirquents(rule, &[&c(premise)], &c(conclusion), &Witness::default())
    }

    #[test]
    fn rule_names_roundtrip() {
        for rule in RuleName::ALL {
            let name = rule.to_string();
            assert_eq!(name.parse::<RuleName>().unwrap(), rule);
        }
        assert!("Modus Ponens".parse::<RuleName>().is_err());
    }

    #[test]
    fn pand_identity_on_axiom() {
        let conclusion =
            apply_rule(RuleName::PandIdentity, &[c("T")], &Witness::default()).unwrap();
        assert_eq!(conclusion, c("T & T"));
        assert!(check1(RuleName::PandIdentity, "T", "T & T").is_ok());
    }

    #[test]
    fn por_identity_cannot_make_bot_from_top() {
        // F is not of the form A | F with A = T; the step must be rejected.
        let err = check1(RuleName::PorIdentity, "T", "F").unwrap_err();
        assert!(err.contains("PorIdentity"), "diagnostic names the rule: {err}");
    }

    #[test]
    fn commutativity_and_associativity() {
        let w = Witness::default();
        assert_eq!(
            apply_rule(RuleName::PorCommutativity, &[c("q | p(0)")], &w).unwrap(),
            c("p(0) | q")
        );
        assert_eq!(
            apply_rule(RuleName::PorAssociativity, &[c("p(0) | (q | r)")], &w).unwrap(),
            c("(p(0) | q) | r")
        );
        assert!(check1(RuleName::PorCommutativity, "q | p(0)", "p(0) | q").is_ok());
        assert!(check1(RuleName::PorAssociativity, "p(0) | (q | r)", "(p(0) | q) | r").is_ok());
        // Deep context position is found by the search.
        assert!(check1(
            RuleName::PandCommutativity,
            "ex[c] x. (p(x) | (q & r))",
            "ex[c] x. (p(x) | (r & q))"
        )
        .is_ok());
        assert!(check1(RuleName::PorCommutativity, "p(0) | q", "q & p(0)").is_err());
    }

    #[test]
    fn dominations_and_trivialization() {
        let w = Witness {
            intro: Some(c("p(3)")),
            ..Witness::default()
        };
        assert_eq!(
            apply_rule(RuleName::PorDomination, &[c("T")], &w).unwrap(),
            c("p(3) | T")
        );
        assert_eq!(
            apply_rule(RuleName::PandDomination, &[c("F")], &w).unwrap(),
            c("p(3) & F")
        );
        assert_eq!(
            apply_rule(RuleName::Trivialization, &[c("T")], &w).unwrap(),
            c("~p(3) | p(3)")
        );
        assert!(check1(RuleName::PorDomination, "T", "p(3) | T").is_ok());
        assert!(check1(RuleName::PandDomination, "F", "p(3) & F").is_ok());
        assert!(check1(RuleName::Trivialization, "T", "~p(3) | p(3)").is_ok());
        // The introduced atom may be non-ground under a binder.
        assert!(check1(
            RuleName::Trivialization,
            "all[a] x. (T & p(x))",
            "all[a] x. ((~q(x) | q(x)) & p(x))"
        )
        .is_ok());
        // Positive atom must be on the right.
        assert!(check1(RuleName::Trivialization, "T", "p(3) | ~p(3)").is_err());
        // T on the left of a domination conclusion is not the rule's shape.
        assert!(check1(RuleName::PorDomination, "T", "T | p(3)").is_err());
        // Introducing a non-atom via Trivialization is rejected.
        let bad = Witness {
            intro: Some(c("p(3) & q")),
            ..Witness::default()
        };
        assert!(apply_rule(RuleName::Trivialization, &[c("T")], &bad).is_err());
    }

    #[test]
    fn distributions() {
        let w = Witness::default();
        assert_eq!(
            apply_rule(RuleName::PandDistribution, &[c("(p(0) | r) & (q | r)")], &w).unwrap(),
            c("(p(0) & q) | r")
        );
        assert_eq!(
            apply_rule(
                RuleName::ChandDistribution,
                &[c("(p(0) | r) &[a] (q | r)")],
                &w
            )
            .unwrap(),
            c("(p(0) &[a] q) | r")
        );
        assert_eq!(
            apply_rule(RuleName::ChallDistribution, &[c("all[a] x. (p(x) | q)")], &w).unwrap(),
            c("all[a] x. p(x) | q")
        );
        assert!(check1(RuleName::PandDistribution, "(p(0) | r) & (q | r)", "(p(0) & q) | r").is_ok());
        assert!(check1(RuleName::ChallDistribution, "all[a] x. (p(x) | q)", "all[a] x. p(x) | q").is_ok());
        // Side condition: the moved disjunct must not capture the variable.
        assert!(apply_rule(
            RuleName::ChallDistribution,
            &[c("all[a] x. (q | p(x))")],
            &w
        )
        .is_err());
        // Mismatched copies of C.
        assert!(check1(RuleName::PandDistribution, "(p(0) | r) & (q | s)", "(p(0) & q) | r").is_err());
    }

    #[test]
    fn chand_splitting_and_freshness_diagnostic() {
        let w = Witness {
            cluster: Some("b".to_string()),
            ..Witness::default()
        };
        let a = c("p(0) |[a] q");
        let conclusion = apply_rule(RuleName::ChandSplitting, &[a.clone(), a.clone()], &w).unwrap();
        assert_eq!(conclusion, c("(p(0) |[a] q) &[b] (p(0) |[a] q)"));
        assert!(check_step_cirquents(
            RuleName::ChandSplitting,
            &[&a, &a],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // Joining under a cluster that already occurs inside is rejected.
        let stale = Witness {
            cluster: Some("a".to_string()),
            ..Witness::default()
        };
        let err = apply_rule(RuleName::ChandSplitting, &[a.clone(), a.clone()], &stale)
            .unwrap_err();
        assert!(matches!(err, RuleError::SideCondition { .. }));
        let chand_comp = c("p(0) &[a] q");
        let bad_conclusion = c("(p(0) &[a] q) &[a] (p(0) &[a] q)");
        let msg = check_step_cirquents(
            RuleName::ChandSplitting,
            &[&chand_comp, &chand_comp],
            &bad_conclusion,
            &Witness::default(),
        )
        .unwrap_err();
        assert!(msg.contains("fresh"), "freshness diagnostic: {msg}");
    }

    #[test]
    fn chall_splitting() {
        let w = Witness {
            cluster: Some("a".to_string()),
            constant: Some(0),
            var: Some("x".to_string()),
            ..Witness::default()
        };
        let premise = c("~p(0) & ~p(0)");
        let conclusion = apply_rule(RuleName::ChallSplitting, std::slice::from_ref(&premise), &w).unwrap();
        assert_eq!(conclusion, c("all[a] x. (~p(x) & ~p(x))"));
        assert!(check_step_cirquents(
            RuleName::ChallSplitting,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // A different constant may stay behind as long as the instantiation
        // constant is fresh for the body.
        let prem2 = c("~p(0) & ~p(1)");
        let conc2 = c("all[a] x. (~p(x) & ~p(1))");
        assert!(check_step_cirquents(
            RuleName::ChallSplitting,
            &[&prem2],
            &conc2,
            &Witness::default()
        )
        .is_ok());
        // But the instantiation constant occurring in the body is rejected:
        // no fresh constant maps the body onto this premise.
        let prem3 = c("~p(0) & ~p(0)");
        let conc3 = c("all[a] x. (~p(x) & ~p(0))");
        assert!(check_step_cirquents(
            RuleName::ChallSplitting,
            &[&prem3],
            &conc3,
            &Witness::default()
        )
        .is_err());
        // Replaced constant under a binder of x is a capture; rejected.
        let shadow = c("all[b] x. p(x, 0)");
        assert!(apply_rule(RuleName::ChallSplitting, &[shadow], &w).is_err());
    }

    #[test]
    fn choosing_collapses_every_occurrence_recursively() {
        // A nested same-cluster chor: collapsing must erase both layers.
        let conclusion = c("(p(0) |[c] T) |[c] r");
        let premise = collapse_chor(&conclusion, "c", 0);
        assert_eq!(premise, c("p(0)"));
        let w = Witness {
            cluster: Some("c".to_string()),
            intro: Some(conclusion.clone()),
            ..Witness::default()
        };
        assert_eq!(
            apply_rule(RuleName::LeftChorChoosing, std::slice::from_ref(&premise), &w).unwrap(),
            conclusion
        );
        assert!(check_step_cirquents(
            RuleName::LeftChorChoosing,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // A partial collapse (outer only) is not a valid premise.
        let partial = c("p(0) |[c] T");
        assert!(check_step_cirquents(
            RuleName::LeftChorChoosing,
            &[&partial],
            &conclusion,
            &Witness::default()
        )
        .is_err());
    }

    #[test]
    fn chexists_choosing() {
        let conclusion = c("(~p(0) & ~p(0)) | ex[c] x. p(x)");
        let premise = c("(~p(0) & ~p(0)) | p(0)");
        assert_eq!(collapse_chexists(&conclusion, "c", 0), premise);
        assert!(check_step_cirquents(
            RuleName::ChexistsChoosing,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // Instantiation at a fresh constant is also found by the search.
        let prem9 = c("(~p(0) & ~p(0)) | p(1)");
        assert!(check_step_cirquents(
            RuleName::ChexistsChoosing,
            &[&prem9],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // Nested same-cluster quantifier collapses recursively.
        let nested = c("ex[c] x. (p(x) & ex[c] y. q(y))");
        assert_eq!(collapse_chexists(&nested, "c", 2), c("p(2) & q(2)"));
    }

    #[test]
    fn chand_cleansing() {
        // Premise X[Y[A] &[c] C] yields conclusion X[Y[A &[c] B] &[c] C]:
        // the conclusion carries the duplicated inner choice node.
        let cleansed = c("(p(0) | r) &[c] s");
        let full = c("((p(0) &[c] q) | r) &[c] s");
        let w = Witness {
            path: Some(Path::default()),
            hole: Some("/l".parse().unwrap()),
            intro: Some(c("q")),
            ..Witness::default()
        };
        assert_eq!(
            apply_rule(RuleName::LeftChandCleansing, std::slice::from_ref(&cleansed), &w).unwrap(),
            full
        );
        assert!(check_step_cirquents(
            RuleName::LeftChandCleansing,
            &[&cleansed],
            &full,
            &Witness::default()
        )
        .is_ok());
        // Right cleansing keeps the inner right component.
        let cleansed_r = c("p(0) &[c] (q | r)");
        let full_r = c("p(0) &[c] ((s &[c] q) | r)");
        assert!(check_step_cirquents(
            RuleName::RightChandCleansing,
            &[&cleansed_r],
            &full_r,
            &Witness::default()
        )
        .is_ok());
        // The left-sided rule cannot justify a right-sided conclusion.
        assert!(check_step_cirquents(
            RuleName::LeftChandCleansing,
            &[&cleansed_r],
            &full_r,
            &Witness::default()
        )
        .is_err());
    }

    #[test]
    fn chall_cleansing_requires_unshadowed_hole() {
        // Valid: inner all[c] y directly under the pattern body.
        let premise = c("all[c] x. (~p(x) | p(x))");
        let conclusion = c("all[c] x. (~p(x) | all[c] y. p(y))");
        assert!(check_step_cirquents(
            RuleName::ChallCleansing,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // Invalid: a binder of x intervenes, so the restored occurrences
        // would be re-bound by the wrong quantifier.
        let premise2 = c("all[c] x. all[d] x. (~p(x) | p(x))");
        let conclusion2 = c("all[c] x. all[d] x. (~p(x) | all[c] y. p(y))");
        assert!(check_step_cirquents(
            RuleName::ChallCleansing,
            &[&premise2],
            &conclusion2,
            &Witness::default()
        )
        .is_err());
    }

    #[test]
    fn chall_cleansing_mixed_origin_variables() {
        // Premise all[c] x. (p(x) & p(x)): the conclusion may keep the first
        // occurrence bound by the pattern root and rebind only the second.
        let premise = c("all[c] x. (p(x) & p(x))");
        let intro = c("p(x) & p(y)");
        let w = Witness {
            path: Some(Path::default()),
            hole: Some("/".parse().unwrap()),
            var: Some("y".to_string()),
            intro: Some(intro),
            ..Witness::default()
        };
        let conclusion = apply_rule(RuleName::ChallCleansing, std::slice::from_ref(&premise), &w).unwrap();
        assert_eq!(conclusion, c("all[c] x. all[c] y. (p(x) & p(y))"));
        assert!(check_step_cirquents(
            RuleName::ChallCleansing,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
    }

    #[test]
    fn challchotomy_merges_same_cluster() {
        // With both quantifier clusters named a, the chotomy eliminates the
        // joining cluster b.
        let premise = c(
            "(all[a] x. ((~p(x) & ~p(x)) & all[a] x. (~p(x) & ~p(x))) &[b] \
             all[a] x. (all[a] x. (~p(x) & ~p(x)) & (~p(x) & ~p(x)))) | ex[c] x. p(x)",
        );
        let conclusion =
            c("(all[a] x. (~p(x) & ~p(x)) & all[a] x. (~p(x) & ~p(x))) | ex[c] x. p(x)");
        assert!(check_step_cirquents(
            RuleName::Challchotomy,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        // Forward direction reproduces the conclusion.
        let w = Witness::at("/l".parse().unwrap());
        assert!(apply_rule(RuleName::Challchotomy, &[premise], &w)
            .unwrap()
            .alpha_eq(&conclusion));
    }

    #[test]
    fn chandchotomy_roundtrip() {
        let conclusion = c("((p(0) &[a] q) & (r &[b] s)) | p(1)");
        let piece = c("(p(0) &[a] q) & (r &[b] s)");
        let premise_piece = chotomy_premise_piece(RuleName::Chandchotomy, &piece, "k").unwrap();
        let premise = conclusion
            .replace_at(&"/l".parse().unwrap(), premise_piece)
            .unwrap();
        assert!(check_step_cirquents(
            RuleName::Chandchotomy,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        assert!(apply_rule(RuleName::Chandchotomy, std::slice::from_ref(&premise), &Witness::at("/l".parse().unwrap()))
            .unwrap()
            .alpha_eq(&conclusion));
        // Reusing a cluster that occurs in the conclusion is rejected.
        let stale_piece = chotomy_premise_piece(RuleName::Chandchotomy, &piece, "a").unwrap();
        let stale = conclusion
            .replace_at(&"/l".parse().unwrap(), stale_piece)
            .unwrap();
        assert!(stale.validate().is_ok());
        assert!(check_step_cirquents(
            RuleName::Chandchotomy,
            &[&stale],
            &conclusion,
            &Witness::default()
        )
        .is_err());
        assert!(apply_rule(RuleName::Chandchotomy, &[stale], &Witness::at("/l".parse().unwrap()))
            .is_err());
    }

    #[test]
    fn chandallchotomy_roundtrip() {
        let conclusion = c("((p(0) &[a] q) & all[b] x. r(x)) | p(1)");
        let piece = c("(p(0) &[a] q) & all[b] x. r(x)");
        let premise_piece = chotomy_premise_piece(RuleName::Chandallchotomy, &piece, "k").unwrap();
        let premise = conclusion
            .replace_at(&"/l".parse().unwrap(), premise_piece)
            .unwrap();
        assert!(check_step_cirquents(
            RuleName::Chandallchotomy,
            &[&premise],
            &conclusion,
            &Witness::default()
        )
        .is_ok());
        assert!(apply_rule(
            RuleName::Chandallchotomy,
            &[premise],
            &Witness::at("/l".parse().unwrap())
        )
        .unwrap()
        .alpha_eq(&conclusion));
    }

    #[test]
    fn chotomy_freshness_is_enforced() {
        // Build a premise whose joining cluster also occurs in the
        // conclusion: the step must be rejected.
        let conclusion = c("((p(0) &[a] q) & (r &[b] s)) | (p(1) |[k] p(2))");
        let piece = c("(p(0) &[a] q) & (r &[b] s)");
        let premise_piece = chotomy_premise_piece(RuleName::Chandchotomy, &piece, "k");
        // k is a chor cluster in the conclusion, so the premise would give k
        // two kinds; construction fails at validation, and if a sneaky
        // premise reuses an occurring chand cluster the checker rejects it.
        assert!(premise_piece.is_some());
        let premise = conclusion
            .replace_at(&"/l".parse().unwrap(), premise_piece.unwrap())
            .unwrap();
        assert!(premise.validate().is_err());

        let conclusion2 = c("((p(0) &[a] q) & (r &[b] s)) | (p(1) &[k] p(2))");
        let piece2 = c("(p(0) &[a] q) & (r &[b] s)");
        let premise2 = conclusion2
            .replace_at(
                &"/l".parse().unwrap(),
                chotomy_premise_piece(RuleName::Chandchotomy, &piece2, "k").unwrap(),
            )
            .unwrap();
        assert!(premise2.validate().is_ok());
        let msg = check_step_cirquents(
            RuleName::Chandchotomy,
            &[&premise2],
            &conclusion2,
            &Witness::default(),
        )
        .unwrap_err();
        assert!(msg.contains("does not justify"), "diagnostic: {msg}");
    }

    #[test]
    fn forward_backward_coherence_smoke() {
        // For a handful of rules: apply forward, then the checker accepts.
        let cases: Vec<(RuleName, Cirquent, Witness)> = vec![
            (RuleName::PorIdentity, c("p(0) & q"), Witness::at("/l".parse().unwrap())),
            (RuleName::PandIdentity, c("p(0) | q"), Witness::default()),
            (
                RuleName::PorDomination,
                c("T | q"),
                Witness {
                    path: Some("/l".parse().unwrap()),
                    intro: Some(c("r")),
                    ..Witness::default()
                },
            ),
            (RuleName::PorAssociativity, c("p(0) | (q | r)"), Witness::default()),
            (
                RuleName::ChallDistribution,
                c("all[a] x. (p(x) | q)"),
                Witness::default(),
            ),
        ];
        for (rule, premise, w) in cases {
            let conclusion = apply_rule(rule, std::slice::from_ref(&premise), &w).unwrap();
            check_step_cirquents(rule, &[&premise], &conclusion, &Witness::default())
                .unwrap_or_else(|e| panic!("{rule} incoherent: {e}"));
        }
    }

    #[test]
    fn proof_check_and_text_roundtrip() {
        let text = "\
# A two-line proof.
1. T ; Axiom

2. T & T ; PandIdentity: 1 ; path=/
3. (~p(0) | p(0)) & T ; Trivialization: 2 ; path=/l
";
        let proof = parse_proof(text).unwrap();
        assert_eq!(proof.lines.len(), 3);
        let theorem = check_proof(&proof).unwrap();
        assert_eq!(theorem, c("(~p(0) | p(0)) & T"));
        let rendered = format_proof(&proof);
        let reparsed = parse_proof(&rendered).unwrap();
        assert_eq!(reparsed, proof);
    }

    #[test]
    fn proof_diagnostics() {
        // Non-T axiom.
        let p = parse_proof("1. p(0) ; Axiom").unwrap();
        let d = check_proof(&p).unwrap_err();
        assert_eq!(d.index, 1);
        assert!(d.message.contains("exactly T"));
        // Forward premise reference: rejected when parsing the text form,
        // and diagnosed by the checker on directly built proofs.
        assert!(parse_proof("1. T ; Axiom\n2. T & T ; PandIdentity: 2").is_err());
        let p = Proof {
            lines: vec![
                ProofLine {
                    index: 1,
                    cirquent: c("T"),
                    justification: Justification::Axiom,
                },
                ProofLine {
                    index: 2,
                    cirquent: c("T & T"),
                    justification: Justification::Rule {
                        rule: RuleName::PandIdentity,
                        premises: vec![2],
                        witness: Witness {
                            path: Some(Path::root()),
                            ..Witness::default()
                        },
                    },
                },
            ],
        };
        let d = check_proof(&p).unwrap_err();
        assert_eq!(d.index, 2);
        assert!(d.message.contains("strictly smaller"));
        // Wrong premise count for ChandSplitting.
        let p = parse_proof("1. T ; Axiom\n2. T &[b] T ; ChandSplitting: 1").unwrap();
        let d = check_proof(&p).unwrap_err();
        assert!(d.message.contains("premise reference"));
        // Open cirquent: parses, but checking rejects it.
        let p = parse_proof("1. p(x) ; Axiom").unwrap();
        let d = check_proof(&p).unwrap_err();
        assert!(d.message.contains("closed"));
        // Bad rule name.
        assert!(parse_proof("1. T ; Axiom\n2. T ; Frobnicate: 1").is_err());
        // Non-consecutive numbering.
        assert!(parse_proof("1. T ; Axiom\n3. T & T ; PandIdentity: 1").is_err());
    }

    #[test]
    fn fragments_start_from_a_premise() {
        let text = "\
# derives p | q from q | p
1. q | p ; Premise
2. p | q ; PorCommutativity: 1 ; path=/
";
        let frag = parse_proof(text).unwrap();
        let (start, end) = check_fragment(&frag).unwrap();
        assert_eq!(start, c("q | p"));
        assert_eq!(end, c("p | q"));
        // Rendering keeps the Premise line.
        let rendered = format_proof(&frag);
        assert_eq!(parse_proof(&rendered).unwrap(), frag);
        // Full proofs reject Premise lines.
        let d = check_proof(&frag).unwrap_err();
        assert_eq!(d.index, 1);
        assert!(d.message.contains("fragment"));
        // Fragments reject Premise anywhere but line 1 ...
        let bad = parse_proof("1. T ; Premise\n2. T ; Premise").unwrap();
        assert_eq!(check_fragment(&bad).unwrap_err().index, 2);
        // ... and proofs that do not start with one.
        let proof = parse_proof("1. T ; Axiom").unwrap();
        assert!(check_fragment(&proof).unwrap_err().message.contains("Premise"));
        // Premise lines take no witness.
        assert!(parse_proof("1. T ; Premise ; path=/").is_err());
    }

    #[test]
    fn witness_narrowing_and_mismatch() {
        // A correct step with a wrong witness path must fail (the witness
        // narrows the search).
        let premise = c("p(0) | (q | r)");
        let conclusion = c("(p(0) | q) | r");
        let wrong = Witness::at("/l".parse().unwrap());
        assert!(check_step_cirquents(
            RuleName::PorAssociativity,
            &[&premise],
            &conclusion,
            &wrong
        )
        .is_err());
        let right = Witness::at("/".parse().unwrap());
        assert!(check_step_cirquents(
            RuleName::PorAssociativity,
            &[&premise],
            &conclusion,
            &right
        )
        .is_ok());
    }
}

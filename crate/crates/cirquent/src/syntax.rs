//! Cirquent syntax: terms, cluster kinds, the cirquent tree, a parser and
//! printer for the concrete syntax, and the structural operations
//! (substitution, paths, cluster maps, alpha-equivalence) everything else
//! builds on.
//!
//! Concrete syntax, tightest to loosest:
//!
//! ```text
//! ~A    all[c] x. A    ex[c] x. A      (unary; quantifier body is one unit)
//! A &[c] B                             (choice conjunction, left-assoc)
//! A |[c] B                             (choice disjunction, left-assoc)
//! A & B                                (parallel conjunction, left-assoc)
//! A | B                                (parallel disjunction, left-assoc)
//! A -> B                               (sugar for ~A | B, right-assoc)
//! ```
//!
//! `T` and `F` are the logical literals. Negation and `->` are eliminated
//! during parsing: `~` is pushed to atoms by De Morgan duality (choice duals
//! keep their cluster name), so the tree only ever carries negation on atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// A first-order term: a variable or a constant (a natural number written as
/// a decimal numeral).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// A variable, referenced by name.
    Var(String),
    /// A constant. The universe of discourse is the naturals.
    Const(u64),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(n) => write!(f, "{n}"),
        }
    }
}

/// The four kinds of choice clusters. Kinds partition cluster names: a name
/// may only ever be used with a single kind inside one cirquent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClusterKind {
    /// Choice conjunction `&[c]`, resolved by the environment.
    Chand,
    /// Choice disjunction `|[c]`, resolved by the machine.
    Chor,
    /// Choice universal quantifier `all[c] x.`, resolved by the environment.
    Chall,
    /// Choice existential quantifier `ex[c] x.`, resolved by the machine.
    Chexists,
}

impl ClusterKind {
    /// True for the kinds the machine resolves (`|[c]`, `ex[c]`).
    pub fn is_machine(self) -> bool {
        matches!(self, ClusterKind::Chor | ClusterKind::Chexists)
    }

    /// True for the binary kinds (`&[c]`, `|[c]`), whose legal choices are 0
    /// and 1.
    pub fn is_binary(self) -> bool {
        matches!(self, ClusterKind::Chand | ClusterKind::Chor)
    }
}

impl fmt::Display for ClusterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClusterKind::Chand => "&[_]",
            ClusterKind::Chor => "|[_]",
            ClusterKind::Chall => "all[_]",
            ClusterKind::Chexists => "ex[_]",
        };
        write!(f, "{s}")
    }
}

/// One step into a cirquent tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// Left child of a binary node.
    Left,
    /// Right child of a binary node.
    Right,
    /// Body of a quantifier node.
    Body,
}

/// A position in a cirquent tree, as a sequence of steps from the root.
///
/// Rendered as `/` for the root and `/l/r/b`-style otherwise.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<Step>);

impl Path {
    /// The empty path (the root).
    pub fn root() -> Path {
        Path(Vec::new())
    }

    /// True if this is the root path.
    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// This path extended by one step.
    pub fn child(&self, step: Step) -> Path {
        let mut v = self.0.clone();
        v.push(step);
        Path(v)
    }

    /// This path followed by all of `rest`.
    pub fn join(&self, rest: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend(rest.0.iter().copied());
        Path(v)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "/");
        }
        for s in &self.0 {
            let c = match s {
                Step::Left => 'l',
                Step::Right => 'r',
                Step::Body => 'b',
            };
            write!(f, "/{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = String;

    fn from_str(s: &str) -> Result<Path, String> {
        if s == "/" {
            return Ok(Path::root());
        }
        let mut steps = Vec::new();
        if !s.starts_with('/') {
            return Err(format!("path `{s}` must start with `/`"));
        }
        for part in s[1..].split('/') {
            match part {
                "l" => steps.push(Step::Left),
                "r" => steps.push(Step::Right),
                "b" => steps.push(Step::Body),
                other => return Err(format!("bad path segment `{other}` in `{s}`")),
            }
        }
        Ok(Path(steps))
    }
}

/// A cirquent: a formula tree whose choice nodes carry cluster names.
///
/// Negation appears only on atoms; the parser eliminates `~` on compound
/// subtrees by De Morgan duality and `->` by `A -> B == ~A | B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cirquent {
    /// The always-won logical literal `T`.
    Top,
    /// The always-lost logical literal `F`.
    Bot,
    /// A (possibly negated) predicate applied to terms. Nullary predicates
    /// are written without parentheses.
    Atom {
        /// Predicate name.
        pred: String,
        /// Whether the literal is negated.
        negated: bool,
        /// Argument terms; the predicate's arity.
        args: Vec<Term>,
    },
    /// Parallel conjunction `A & B`.
    Pand(Box<Cirquent>, Box<Cirquent>),
    /// Parallel disjunction `A | B`.
    Por(Box<Cirquent>, Box<Cirquent>),
    /// Choice conjunction `A &[c] B`.
    Chand {
        /// Cluster name.
        cluster: String,
        /// Left option.
        left: Box<Cirquent>,
        /// Right option.
        right: Box<Cirquent>,
    },
    /// Choice disjunction `A |[c] B`.
    Chor {
        /// Cluster name.
        cluster: String,
        /// Left option.
        left: Box<Cirquent>,
        /// Right option.
        right: Box<Cirquent>,
    },
    /// Choice universal quantifier `all[c] x. A`.
    Chall {
        /// Cluster name.
        cluster: String,
        /// Bound variable.
        var: String,
        /// Body.
        body: Box<Cirquent>,
    },
    /// Choice existential quantifier `ex[c] x. A`.
    Chexists {
        /// Cluster name.
        cluster: String,
        /// Bound variable.
        var: String,
        /// Body.
        body: Box<Cirquent>,
    },
}

/// Errors from the structural operations (everything but parsing).
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    /// One cluster name used with two different kinds.
    #[error("cluster `{name}` is used both as {first} and as {second}")]
    ClusterKindClash {
        /// Offending name.
        name: String,
        /// Kind of the first use.
        first: ClusterKind,
        /// Kind of the conflicting use.
        second: ClusterKind,
    },
    /// One predicate used with two different arities.
    #[error("predicate `{name}` is used with arity {first} and with arity {second}")]
    ArityClash {
        /// Offending predicate.
        name: String,
        /// First arity seen.
        first: usize,
        /// Conflicting arity.
        second: usize,
    },
    /// A path that does not address a node.
    #[error("path {path} does not address a node of this cirquent")]
    BadPath {
        /// The invalid path.
        path: Path,
    },
    /// Substituting a variable would place it under a binder of the same
    /// name.
    #[error("substituting `{var}` here would capture it under the binder of `{binder}`")]
    Capture {
        /// Variable being substituted in.
        var: String,
        /// The capturing binder's variable.
        binder: String,
    },
    /// An operation that requires a closed cirquent was given an open one.
    #[error("cirquent is not closed; free variables: {}", vars.join(", "))]
    NotClosed {
        /// The free variables found.
        vars: Vec<String>,
    },
}

impl Cirquent {
    /// De Morgan dual. Flips literals, swaps `&`/`|` and `&[c]`/`|[c]` and
    /// the quantifiers; cluster names are preserved.
    pub fn negate(&self) -> Cirquent {
        match self {
            Cirquent::Top => Cirquent::Bot,
            Cirquent::Bot => Cirquent::Top,
            Cirquent::Atom { pred, negated, args } => Cirquent::Atom {
                pred: pred.clone(),
                negated: !negated,
                args: args.clone(),
            },
            Cirquent::Pand(a, b) => Cirquent::Por(Box::new(a.negate()), Box::new(b.negate())),
            Cirquent::Por(a, b) => Cirquent::Pand(Box::new(a.negate()), Box::new(b.negate())),
            Cirquent::Chand { cluster, left, right } => Cirquent::Chor {
                cluster: cluster.clone(),
                left: Box::new(left.negate()),
                right: Box::new(right.negate()),
            },
            Cirquent::Chor { cluster, left, right } => Cirquent::Chand {
                cluster: cluster.clone(),
                left: Box::new(left.negate()),
                right: Box::new(right.negate()),
            },
            Cirquent::Chall { cluster, var, body } => Cirquent::Chexists {
                cluster: cluster.clone(),
                var: var.clone(),
                body: Box::new(body.negate()),
            },
            Cirquent::Chexists { cluster, var, body } => Cirquent::Chall {
                cluster: cluster.clone(),
                var: var.clone(),
                body: Box::new(body.negate()),
            },
        }
    }

    /// Child subtrees in left-to-right order.
    pub fn children(&self) -> Vec<&Cirquent> {
        match self {
            Cirquent::Top | Cirquent::Bot | Cirquent::Atom { .. } => Vec::new(),
            Cirquent::Pand(a, b) | Cirquent::Por(a, b) => vec![a, b],
            Cirquent::Chand { left, right, .. } | Cirquent::Chor { left, right, .. } => {
                vec![left, right]
            }
            Cirquent::Chall { body, .. } | Cirquent::Chexists { body, .. } => vec![body],
        }
    }

    /// The subtree at `path`.
    pub fn subtree(&self, path: &Path) -> Result<&Cirquent, SyntaxError> {
        let mut node = self;
        for (i, step) in path.0.iter().enumerate() {
            node = match (node, step) {
                (Cirquent::Pand(a, _), Step::Left) | (Cirquent::Por(a, _), Step::Left) => a,
                (Cirquent::Pand(_, b), Step::Right) | (Cirquent::Por(_, b), Step::Right) => b,
                (Cirquent::Chand { left, .. }, Step::Left)
                | (Cirquent::Chor { left, .. }, Step::Left) => left,
                (Cirquent::Chand { right, .. }, Step::Right)
                | (Cirquent::Chor { right, .. }, Step::Right) => right,
                (Cirquent::Chall { body, .. }, Step::Body)
                | (Cirquent::Chexists { body, .. }, Step::Body) => body,
                _ => {
                    return Err(SyntaxError::BadPath {
                        path: Path(path.0[..=i].to_vec()),
                    })
                }
            };
        }
        Ok(node)
    }

    /// All node positions, in pre-order (a node before its children, left
    /// before right).
    pub fn all_paths(&self) -> Vec<Path> {
        fn walk(c: &Cirquent, here: &mut Vec<Step>, out: &mut Vec<Path>) {
            out.push(Path(here.clone()));
            let steps: &[Step] = match c {
                Cirquent::Top | Cirquent::Bot | Cirquent::Atom { .. } => &[],
                Cirquent::Pand(..) | Cirquent::Por(..) | Cirquent::Chand { .. } | Cirquent::Chor { .. } => {
                    &[Step::Left, Step::Right]
                }
                Cirquent::Chall { .. } | Cirquent::Chexists { .. } => &[Step::Body],
            };
            for (child, step) in c.children().into_iter().zip(steps) {
                here.push(*step);
                walk(child, here, out);
                here.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(c: &Cirquent, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match c {
                Cirquent::Atom { args, .. } => {
                    for t in args {
                        if let Term::Var(v) = t {
                            if !bound.iter().any(|b| b == v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Cirquent::Chall { var, body, .. } | Cirquent::Chexists { var, body, .. } => {
                    bound.push(var.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
                _ => {
                    for child in c.children() {
                        walk(child, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// True if the cirquent has no free variables.
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Errors unless the cirquent is closed.
    pub fn require_closed(&self) -> Result<(), SyntaxError> {
        let fv = self.free_vars();
        if fv.is_empty() {
            Ok(())
        } else {
            Err(SyntaxError::NotClosed {
                vars: fv.into_iter().collect(),
            })
        }
    }

    /// All constants occurring in the tree, sorted.
    pub fn constants(&self) -> BTreeSet<u64> {
        fn walk(c: &Cirquent, out: &mut BTreeSet<u64>) {
            if let Cirquent::Atom { args, .. } = c {
                for t in args {
                    if let Term::Const(n) = t {
                        out.insert(*n);
                    }
                }
            }
            for child in c.children() {
                walk(child, out);
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// The cluster of this node, if it is a choice node.
    pub fn cluster_here(&self) -> Option<(ClusterKind, &str)> {
        match self {
            Cirquent::Chand { cluster, .. } => Some((ClusterKind::Chand, cluster)),
            Cirquent::Chor { cluster, .. } => Some((ClusterKind::Chor, cluster)),
            Cirquent::Chall { cluster, .. } => Some((ClusterKind::Chall, cluster)),
            Cirquent::Chexists { cluster, .. } => Some((ClusterKind::Chexists, cluster)),
            _ => None,
        }
    }

    /// Map from cluster name to its kind and the positions of all nodes in
    /// that cluster, in pre-order.
    ///
    /// On a validated cirquent the kind per name is unique; if the input is
    /// inconsistent the first kind seen wins (use [`Cirquent::validate`] to
    /// reject such trees).
    pub fn clusters_of(&self) -> BTreeMap<String, (ClusterKind, Vec<Path>)> {
        let mut out: BTreeMap<String, (ClusterKind, Vec<Path>)> = BTreeMap::new();
        for path in self.all_paths() {
            let node = self.subtree(&path).expect("path from all_paths");
            if let Some((kind, name)) = node.cluster_here() {
                out.entry(name.to_string())
                    .or_insert_with(|| (kind, Vec::new()))
                    .1
                    .push(path);
            }
        }
        out
    }

    /// True if any node belongs to the named cluster.
    pub fn has_cluster(&self, name: &str) -> bool {
        if let Some((_, here)) = self.cluster_here() {
            if here == name {
                return true;
            }
        }
        self.children().into_iter().any(|c| c.has_cluster(name))
    }

    /// Checks cluster-kind consistency and predicate-arity consistency.
    pub fn validate(&self) -> Result<(), SyntaxError> {
        fn walk(
            c: &Cirquent,
            kinds: &mut BTreeMap<String, ClusterKind>,
            arities: &mut BTreeMap<String, usize>,
        ) -> Result<(), SyntaxError> {
            if let Cirquent::Atom { pred, args, .. } = c {
                match arities.get(pred) {
                    Some(&a) if a != args.len() => {
                        return Err(SyntaxError::ArityClash {
                            name: pred.clone(),
                            first: a,
                            second: args.len(),
                        })
                    }
                    Some(_) => {}
                    None => {
                        arities.insert(pred.clone(), args.len());
                    }
                }
            }
            if let Some((kind, name)) = c.cluster_here() {
                match kinds.get(name) {
                    Some(&k) if k != kind => {
                        return Err(SyntaxError::ClusterKindClash {
                            name: name.to_string(),
                            first: k,
                            second: kind,
                        })
                    }
                    Some(_) => {}
                    None => {
                        kinds.insert(name.to_string(), kind);
                    }
                }
            }
            for child in c.children() {
                walk(child, kinds, arities)?;
            }
            Ok(())
        }
        walk(self, &mut BTreeMap::new(), &mut BTreeMap::new())
    }

    /// Returns a copy with the subtree at `path` replaced by `new`.
    pub fn replace_at(&self, path: &Path, new: Cirquent) -> Result<Cirquent, SyntaxError> {
        fn go(c: &Cirquent, steps: &[Step], new: Cirquent, full: &Path, depth: usize) -> Result<Cirquent, SyntaxError> {
            let Some((step, rest)) = steps.split_first() else {
                return Ok(new);
            };
            let bad = || SyntaxError::BadPath {
                path: Path(full.0[..=depth].to_vec()),
            };
            Ok(match (c, step) {
                (Cirquent::Pand(a, b), Step::Left) => {
                    Cirquent::Pand(Box::new(go(a, rest, new, full, depth + 1)?), b.clone())
                }
                (Cirquent::Pand(a, b), Step::Right) => {
                    Cirquent::Pand(a.clone(), Box::new(go(b, rest, new, full, depth + 1)?))
                }
                (Cirquent::Por(a, b), Step::Left) => {
                    Cirquent::Por(Box::new(go(a, rest, new, full, depth + 1)?), b.clone())
                }
                (Cirquent::Por(a, b), Step::Right) => {
                    Cirquent::Por(a.clone(), Box::new(go(b, rest, new, full, depth + 1)?))
                }
                (Cirquent::Chand { cluster, left, right }, Step::Left) => Cirquent::Chand {
                    cluster: cluster.clone(),
                    left: Box::new(go(left, rest, new, full, depth + 1)?),
                    right: right.clone(),
                },
                (Cirquent::Chand { cluster, left, right }, Step::Right) => Cirquent::Chand {
                    cluster: cluster.clone(),
                    left: left.clone(),
                    right: Box::new(go(right, rest, new, full, depth + 1)?),
                },
                (Cirquent::Chor { cluster, left, right }, Step::Left) => Cirquent::Chor {
                    cluster: cluster.clone(),
                    left: Box::new(go(left, rest, new, full, depth + 1)?),
                    right: right.clone(),
                },
                (Cirquent::Chor { cluster, left, right }, Step::Right) => Cirquent::Chor {
                    cluster: cluster.clone(),
                    left: left.clone(),
                    right: Box::new(go(right, rest, new, full, depth + 1)?),
                },
                (Cirquent::Chall { cluster, var, body }, Step::Body) => Cirquent::Chall {
                    cluster: cluster.clone(),
                    var: var.clone(),
                    body: Box::new(go(body, rest, new, full, depth + 1)?),
                },
                (Cirquent::Chexists { cluster, var, body }, Step::Body) => Cirquent::Chexists {
                    cluster: cluster.clone(),
                    var: var.clone(),
                    body: Box::new(go(body, rest, new, full, depth + 1)?),
                },
                _ => return Err(bad()),
            })
        }
        go(self, &path.0, new, path, 0)
    }

    /// Replaces every free occurrence of `var` by `term`.
    ///
    /// If `term` is itself a variable and the replacement would place it in
    /// the scope of a binder of that variable, the substitution errors
    /// instead of silently capturing. (Calculus-internal renaming uses
    /// [`subst_var_avoiding`] instead, which renames binders as needed.)
    pub fn substitute(&self, var: &str, term: &Term) -> Result<Cirquent, SyntaxError> {
        match self {
            Cirquent::Top | Cirquent::Bot => Ok(self.clone()),
            Cirquent::Atom { pred, negated, args } => Ok(Cirquent::Atom {
                pred: pred.clone(),
                negated: *negated,
                args: args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) if v == var => term.clone(),
                        other => other.clone(),
                    })
                    .collect(),
            }),
            Cirquent::Pand(a, b) => Ok(Cirquent::Pand(
                Box::new(a.substitute(var, term)?),
                Box::new(b.substitute(var, term)?),
            )),
            Cirquent::Por(a, b) => Ok(Cirquent::Por(
                Box::new(a.substitute(var, term)?),
                Box::new(b.substitute(var, term)?),
            )),
            Cirquent::Chand { cluster, left, right } => Ok(Cirquent::Chand {
                cluster: cluster.clone(),
                left: Box::new(left.substitute(var, term)?),
                right: Box::new(right.substitute(var, term)?),
            }),
            Cirquent::Chor { cluster, left, right } => Ok(Cirquent::Chor {
                cluster: cluster.clone(),
                left: Box::new(left.substitute(var, term)?),
                right: Box::new(right.substitute(var, term)?),
            }),
            Cirquent::Chall { cluster, var: bv, body } | Cirquent::Chexists { cluster, var: bv, body } => {
                let rebuild = |body: Box<Cirquent>| match self {
                    Cirquent::Chall { .. } => Cirquent::Chall {
                        cluster: cluster.clone(),
                        var: bv.clone(),
                        body,
                    },
                    _ => Cirquent::Chexists {
                        cluster: cluster.clone(),
                        var: bv.clone(),
                        body,
                    },
                };
                if bv == var {
                    // Shadowed: no free occurrences below.
                    return Ok(self.clone());
                }
                if let Term::Var(v) = term {
                    if bv == v && body.free_vars().contains(var) {
                        return Err(SyntaxError::Capture {
                            var: var.to_string(),
                            binder: bv.clone(),
                        });
                    }
                }
                Ok(rebuild(Box::new(body.substitute(var, term)?)))
            }
        }
    }

    /// Alpha-equivalence: equality up to consistent renaming of bound
    /// variables. Cluster names and free variables are compared verbatim.
    pub fn alpha_eq(&self, other: &Cirquent) -> bool {
        fn term_eq(a: &Term, b: &Term, env: &[(String, String)]) -> bool {
            match (a, b) {
                (Term::Const(m), Term::Const(n)) => m == n,
                (Term::Var(x), Term::Var(y)) => {
                    // Innermost binding of either side decides.
                    for (bx, by) in env.iter().rev() {
                        let lx = bx == x;
                        let ly = by == y;
                        if lx || ly {
                            return lx && ly;
                        }
                    }
                    x == y
                }
                _ => false,
            }
        }
        fn go(a: &Cirquent, b: &Cirquent, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (Cirquent::Top, Cirquent::Top) | (Cirquent::Bot, Cirquent::Bot) => true,
                (
                    Cirquent::Atom { pred: p1, negated: n1, args: a1 },
                    Cirquent::Atom { pred: p2, negated: n2, args: a2 },
                ) => {
                    p1 == p2
                        && n1 == n2
                        && a1.len() == a2.len()
                        && a1.iter().zip(a2).all(|(s, t)| term_eq(s, t, env))
                }
                (Cirquent::Pand(a1, b1), Cirquent::Pand(a2, b2))
                | (Cirquent::Por(a1, b1), Cirquent::Por(a2, b2)) => {
                    go(a1, a2, env) && go(b1, b2, env)
                }
                (
                    Cirquent::Chand { cluster: c1, left: l1, right: r1 },
                    Cirquent::Chand { cluster: c2, left: l2, right: r2 },
                )
                | (
                    Cirquent::Chor { cluster: c1, left: l1, right: r1 },
                    Cirquent::Chor { cluster: c2, left: l2, right: r2 },
                ) => c1 == c2 && go(l1, l2, env) && go(r1, r2, env),
                (
                    Cirquent::Chall { cluster: c1, var: v1, body: b1 },
                    Cirquent::Chall { cluster: c2, var: v2, body: b2 },
                )
                | (
                    Cirquent::Chexists { cluster: c1, var: v1, body: b1 },
                    Cirquent::Chexists { cluster: c2, var: v2, body: b2 },
                ) => {
                    if c1 != c2 {
                        return false;
                    }
                    env.push((v1.clone(), v2.clone()));
                    let ok = go(b1, b2, env);
                    env.pop();
                    ok
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Canonical alpha form: bound variables renamed to `#0`, `#1`, ... by
    /// binder depth. Two cirquents are alpha-equivalent iff their canonical
    /// forms are structurally equal, so this is the right key for memo
    /// tables.
    pub fn canonical(&self) -> Cirquent {
        fn go(c: &Cirquent, env: &mut Vec<(String, String)>) -> Cirquent {
            match c {
                Cirquent::Top | Cirquent::Bot => c.clone(),
                Cirquent::Atom { pred, negated, args } => Cirquent::Atom {
                    pred: pred.clone(),
                    negated: *negated,
                    args: args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => {
                                for (old, new) in env.iter().rev() {
                                    if old == v {
                                        return Term::Var(new.clone());
                                    }
                                }
                                t.clone()
                            }
                            _ => t.clone(),
                        })
                        .collect(),
                },
                Cirquent::Pand(a, b) => {
                    Cirquent::Pand(Box::new(go(a, env)), Box::new(go(b, env)))
                }
                Cirquent::Por(a, b) => Cirquent::Por(Box::new(go(a, env)), Box::new(go(b, env))),
                Cirquent::Chand { cluster, left, right } => Cirquent::Chand {
                    cluster: cluster.clone(),
                    left: Box::new(go(left, env)),
                    right: Box::new(go(right, env)),
                },
                Cirquent::Chor { cluster, left, right } => Cirquent::Chor {
                    cluster: cluster.clone(),
                    left: Box::new(go(left, env)),
                    right: Box::new(go(right, env)),
                },
                Cirquent::Chall { cluster, var, body } => {
                    let new = format!("#{}", env.len());
                    env.push((var.clone(), new.clone()));
                    let body = go(body, env);
                    env.pop();
                    Cirquent::Chall {
                        cluster: cluster.clone(),
                        var: new,
                        body: Box::new(body),
                    }
                }
                Cirquent::Chexists { cluster, var, body } => {
                    let new = format!("#{}", env.len());
                    env.push((var.clone(), new.clone()));
                    let body = go(body, env);
                    env.pop();
                    Cirquent::Chexists {
                        cluster: cluster.clone(),
                        var: new,
                        body: Box::new(body),
                    }
                }
            }
        }
        go(self, &mut Vec::new())
    }
}

/// Renames every free occurrence of `from` to the variable `to`, renaming
/// inner binders of `to` to fresh variables where needed so that no free
/// occurrence is captured. Total, unlike [`Cirquent::substitute`].
pub fn subst_var_avoiding(c: &Cirquent, from: &str, to: &str) -> Cirquent {
    if from == to {
        return c.clone();
    }
    fn go(c: &Cirquent, from: &str, to: &str) -> Cirquent {
        match c {
            Cirquent::Chall { cluster, var, body } | Cirquent::Chexists { cluster, var, body } => {
                let make = |var: String, body: Cirquent| match c {
                    Cirquent::Chall { .. } => Cirquent::Chall {
                        cluster: cluster.clone(),
                        var,
                        body: Box::new(body),
                    },
                    _ => Cirquent::Chexists {
                        cluster: cluster.clone(),
                        var,
                        body: Box::new(body),
                    },
                };
                if var == from {
                    // Shadowed below; nothing to rename.
                    return c.clone();
                }
                if var == to && body.free_vars().contains(from) {
                    // This binder would capture the renamed occurrences;
                    // alpha-rename it out of the way first.
                    let mut avoid = body.free_vars();
                    avoid.insert(from.to_string());
                    avoid.insert(to.to_string());
                    let fresh = fresh_var(&avoid);
                    let body = go(&subst_var_avoiding(body, var, &fresh), from, to);
                    return make(fresh, body);
                }
                make(var.clone(), go(body, from, to))
            }
            Cirquent::Atom { pred, negated, args } => Cirquent::Atom {
                pred: pred.clone(),
                negated: *negated,
                args: args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) if v == from => Term::Var(to.to_string()),
                        other => other.clone(),
                    })
                    .collect(),
            },
            Cirquent::Top | Cirquent::Bot => c.clone(),
            Cirquent::Pand(a, b) => {
                Cirquent::Pand(Box::new(go(a, from, to)), Box::new(go(b, from, to)))
            }
            Cirquent::Por(a, b) => {
                Cirquent::Por(Box::new(go(a, from, to)), Box::new(go(b, from, to)))
            }
            Cirquent::Chand { cluster, left, right } => Cirquent::Chand {
                cluster: cluster.clone(),
                left: Box::new(go(left, from, to)),
                right: Box::new(go(right, from, to)),
            },
            Cirquent::Chor { cluster, left, right } => Cirquent::Chor {
                cluster: cluster.clone(),
                left: Box::new(go(left, from, to)),
                right: Box::new(go(right, from, to)),
            },
        }
    }
    go(c, from, to)
}

/// Smallest `_vN` variable name not in `avoid`.
pub fn fresh_var(avoid: &BTreeSet<String>) -> String {
    for i in 1.. {
        let cand = format!("_v{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Smallest constant not occurring in the cirquent.
pub fn fresh_constant(c: &Cirquent) -> u64 {
    let used = c.constants();
    (0..).find(|n| !used.contains(n)).expect("naturals are unbounded")
}

/// Smallest `_kN` cluster name not occurring in the cirquent.
pub fn fresh_cluster_name(c: &Cirquent) -> String {
    fn names(c: &Cirquent, out: &mut BTreeSet<String>) {
        if let Some((_, name)) = c.cluster_here() {
            out.insert(name.to_string());
        }
        for child in c.children() {
            names(child, out);
        }
    }
    let mut used = BTreeSet::new();
    names(c, &mut used);
    for i in 1.. {
        let cand = format!("_k{i}");
        if !used.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Precedence level of a node for printing: higher binds tighter.
fn level(c: &Cirquent) -> u8 {
    match c {
        Cirquent::Por(..) => 1,
        Cirquent::Pand(..) => 2,
        Cirquent::Chor { .. } => 3,
        Cirquent::Chand { .. } => 4,
        Cirquent::Chall { .. } | Cirquent::Chexists { .. } => 5,
        Cirquent::Top | Cirquent::Bot | Cirquent::Atom { .. } => 6,
    }
}

fn fmt_prec(c: &Cirquent, min: u8, out: &mut String) {
    let parens = level(c) < min;
    if parens {
        out.push('(');
    }
    match c {
        Cirquent::Top => out.push('T'),
        Cirquent::Bot => out.push('F'),
        Cirquent::Atom { pred, negated, args } => {
            if *negated {
                out.push('~');
            }
            out.push_str(pred);
            if !args.is_empty() {
                out.push('(');
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&t.to_string());
                }
                out.push(')');
            }
        }
        Cirquent::Por(a, b) => {
            fmt_prec(a, 1, out);
            out.push_str(" | ");
            fmt_prec(b, 2, out);
        }
        Cirquent::Pand(a, b) => {
            fmt_prec(a, 2, out);
            out.push_str(" & ");
            fmt_prec(b, 3, out);
        }
        Cirquent::Chor { cluster, left, right } => {
            fmt_prec(left, 3, out);
            out.push_str(" |[");
            out.push_str(cluster);
            out.push_str("] ");
            fmt_prec(right, 4, out);
        }
        Cirquent::Chand { cluster, left, right } => {
            fmt_prec(left, 4, out);
            out.push_str(" &[");
            out.push_str(cluster);
            out.push_str("] ");
            fmt_prec(right, 5, out);
        }
        Cirquent::Chall { cluster, var, body } => {
            out.push_str("all[");
            out.push_str(cluster);
            out.push_str("] ");
            out.push_str(var);
            out.push_str(". ");
            fmt_prec(body, 5, out);
        }
        Cirquent::Chexists { cluster, var, body } => {
            out.push_str("ex[");
            out.push_str(cluster);
            out.push_str("] ");
            out.push_str(var);
            out.push_str(". ");
            fmt_prec(body, 5, out);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Renders a cirquent in the concrete syntax, with minimal parentheses.
/// `parse(print(c))` returns `c` node-exactly.
pub fn print(c: &Cirquent) -> String {
    let mut out = String::new();
    fmt_prec(c, 0, &mut out);
    out
}

impl fmt::Display for Cirquent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print(self))
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse failure, with the byte offset of the offending token.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    /// Lexical or grammatical error.
    #[error("parse error at byte {offset}: {message}")]
    Syntax {
        /// Byte offset into the input.
        offset: usize,
        /// Human-readable description.
        message: String,
    },
    /// The tree parsed but failed validation (kind or arity clash).
    #[error(transparent)]
    Invalid(#[from] SyntaxError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Top,
    Bot,
    Tilde,
    LParen,
    RParen,
    Dot,
    Comma,
    And,
    Or,
    AndC(String),
    OrC(String),
    AllC(String),
    ExC(String),
    Arrow,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, pos: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b == b'#' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    /// Reads a `[name]` cluster annotation, for the token after `&` or `|`.
    fn cluster(&mut self) -> Result<String, ParseError> {
        debug_assert_eq!(self.src[self.pos], b'[');
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        if self.pos >= self.src.len() || !(self.src[self.pos].is_ascii_alphabetic() || self.src[self.pos] == b'_') {
            return Err(self.err(at, "expected a cluster name after `[`"));
        }
        let name = self.ident();
        self.skip_ws();
        if self.pos >= self.src.len() || self.src[self.pos] != b']' {
            return Err(self.err(self.pos, "expected `]` after cluster name"));
        }
        self.pos += 1;
        Ok(name)
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let at = self.pos;
        let b = self.src[self.pos];
        let tok = match b {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'.' => {
                self.pos += 1;
                Tok::Dot
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'~' => {
                self.pos += 1;
                Tok::Tilde
            }
            b'&' => {
                self.pos += 1;
                if self.pos < self.src.len() && self.src[self.pos] == b'[' {
                    Tok::AndC(self.cluster()?)
                } else {
                    Tok::And
                }
            }
            b'|' => {
                self.pos += 1;
                if self.pos < self.src.len() && self.src[self.pos] == b'[' {
                    Tok::OrC(self.cluster()?)
                } else {
                    Tok::Or
                }
            }
            b'-' => {
                if self.pos + 1 < self.src.len() && self.src[self.pos + 1] == b'>' {
                    self.pos += 2;
                    Tok::Arrow
                } else {
                    return Err(self.err(at, "expected `->`"));
                }
            }
            b'0'..=b'9' => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
                let n: u64 = text
                    .parse()
                    .map_err(|_| self.err(start, format!("numeral `{text}` is too large")))?;
                Tok::Num(n)
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let word = self.ident();
                match word.as_str() {
                    "T" => Tok::Top,
                    "F" => Tok::Bot,
                    "all" | "ex" => {
                        self.skip_ws();
                        if self.pos < self.src.len() && self.src[self.pos] == b'[' {
                            let name = self.cluster()?;
                            if word == "all" {
                                Tok::AllC(name)
                            } else {
                                Tok::ExC(name)
                            }
                        } else {
                            return Err(self.err(at, format!("expected `[cluster]` after `{word}`")));
                        }
                    }
                    _ => Tok::Ident(word),
                }
            }
            other => {
                return Err(self.err(at, format!("unexpected byte `{}`", other as char)));
            }
        };
        Ok(Some((at, tok)))
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut lexer = Lexer {
        src: input.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    while let Some(t) = lexer.next()? {
        out.push(t);
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    // Levels, loosest first: -> | & |[c] &[c] unary.

    fn imp(&mut self) -> Result<Cirquent, ParseError> {
        let lhs = self.disj()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            let rhs = self.imp()?;
            Ok(Cirquent::Por(Box::new(lhs.negate()), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self) -> Result<Cirquent, ParseError> {
        let mut acc = self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            let rhs = self.conj()?;
            acc = Cirquent::Por(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Cirquent, ParseError> {
        let mut acc = self.chor_level()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            let rhs = self.chor_level()?;
            acc = Cirquent::Pand(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn chor_level(&mut self) -> Result<Cirquent, ParseError> {
        let mut acc = self.chand_level()?;
        while let Some(Tok::OrC(name)) = self.peek() {
            let cluster = name.clone();
            self.at += 1;
            let rhs = self.chand_level()?;
            acc = Cirquent::Chor {
                cluster,
                left: Box::new(acc),
                right: Box::new(rhs),
            };
        }
        Ok(acc)
    }

    fn chand_level(&mut self) -> Result<Cirquent, ParseError> {
        let mut acc = self.unary()?;
        while let Some(Tok::AndC(name)) = self.peek() {
            let cluster = name.clone();
            self.at += 1;
            let rhs = self.unary()?;
            acc = Cirquent::Chand {
                cluster,
                left: Box::new(acc),
                right: Box::new(rhs),
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Cirquent, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Tilde) => {
                self.at += 1;
                let inner = self.unary()?;
                Ok(inner.negate())
            }
            Some(Tok::AllC(cluster)) => {
                self.at += 1;
                let var = self.bound_var()?;
                let body = self.unary()?;
                Ok(Cirquent::Chall {
                    cluster,
                    var,
                    body: Box::new(body),
                })
            }
            Some(Tok::ExC(cluster)) => {
                self.at += 1;
                let var = self.bound_var()?;
                let body = self.unary()?;
                Ok(Cirquent::Chexists {
                    cluster,
                    var,
                    body: Box::new(body),
                })
            }
            _ => self.primary(),
        }
    }

    /// The `x .` part of a quantifier prefix.
    fn bound_var(&mut self) -> Result<String, ParseError> {
        let var = match self.bump() {
            Some(Tok::Ident(v)) => v,
            _ => return Err(self.err("expected a variable after the quantifier")),
        };
        self.expect(&Tok::Dot, "`.` after the quantified variable")?;
        Ok(var)
    }

    fn primary(&mut self) -> Result<Cirquent, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Top) => {
                self.at += 1;
                Ok(Cirquent::Top)
            }
            Some(Tok::Bot) => {
                self.at += 1;
                Ok(Cirquent::Bot)
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.imp()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.at += 1;
                    loop {
                        match self.bump() {
                            Some(Tok::Ident(v)) => args.push(Term::Var(v)),
                            Some(Tok::Num(n)) => args.push(Term::Const(n)),
                            _ => return Err(self.err("expected a term (variable or numeral)")),
                        }
                        match self.bump() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RParen) => break,
                            _ => return Err(self.err("expected `,` or `)` in argument list")),
                        }
                    }
                }
                Ok(Cirquent::Atom {
                    pred: name,
                    negated: false,
                    args,
                })
            }
            _ => Err(self.err("expected a cirquent")),
        }
    }
}

/// Parses the concrete syntax into a cirquent.
///
/// `~` on compound subtrees and `->` are eliminated (see the module docs);
/// the result is validated for cluster-kind and predicate-arity consistency.
/// `#` starts a comment running to end of line.
pub fn parse(input: &str) -> Result<Cirquent, ParseError> {
    let toks = lex(input)?;
    let end = input.len();
    let mut p = Parser { toks, at: 0, end };
    let c = p.imp()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Cirquent {
        parse(s).unwrap_or_else(|e| panic!("parse `{s}`: {e}"))
    }

    fn atom(pred: &str, negated: bool, args: &[Term]) -> Cirquent {
        Cirquent::Atom {
            pred: pred.into(),
            negated,
            args: args.to_vec(),
        }
    }

    #[test]
    fn precedence_parallel() {
        // `&` binds tighter than `|`.
        assert_eq!(
            p("p & q | r"),
            Cirquent::Por(
                Box::new(Cirquent::Pand(
                    Box::new(atom("p", false, &[])),
                    Box::new(atom("q", false, &[])),
                )),
                Box::new(atom("r", false, &[])),
            )
        );
    }

    #[test]
    fn precedence_choice_tighter_than_parallel() {
        // `&[c]` binds tighter than `|`.
        let c = p("p &[c] q | r");
        assert_eq!(
            c,
            Cirquent::Por(
                Box::new(Cirquent::Chand {
                    cluster: "c".into(),
                    left: Box::new(atom("p", false, &[])),
                    right: Box::new(atom("q", false, &[])),
                }),
                Box::new(atom("r", false, &[])),
            )
        );
    }

    #[test]
    fn binaries_left_associate() {
        assert_eq!(p("p | q | r"), p("(p | q) | r"));
        assert_eq!(p("p & q & r"), p("(p & q) & r"));
        assert_ne!(p("p | q | r"), p("p | (q | r)"));
    }

    #[test]
    fn arrow_is_loosest_and_right_assoc() {
        assert_eq!(p("p -> q"), p("~p | q"));
        assert_eq!(p("p -> q -> r"), p("~p | (~q | r)"));
        assert_eq!(p("p & q -> r"), p("~(p & q) | r"));
    }

    #[test]
    fn arrow_example_expands_to_expected_tree() {
        // The implication's antecedent is the whole parallel disjunction.
        let sugar = p("ex[a] x. p(x) | ex[a] x. p(x) -> ex[c] x. p(x)");
        let expanded = p("(all[a] x. ~p(x) & all[a] x. ~p(x)) | ex[c] x. p(x)");
        assert_eq!(sugar, expanded);
    }

    #[test]
    fn negation_is_de_morgan_and_keeps_clusters() {
        assert_eq!(p("~(p & q)"), p("~p | ~q"));
        assert_eq!(p("~(p &[c] q)"), p("~p |[c] ~q"));
        assert_eq!(p("~all[a] x. p(x)"), p("ex[a] x. ~p(x)"));
        assert_eq!(p("~~p"), p("p"));
        assert_eq!(p("~T"), Cirquent::Bot);
    }

    #[test]
    fn quantifier_body_is_tight() {
        // The body of a quantifier is one unary-level unit.
        assert_eq!(p("all[a] x. p(x) & q"), p("(all[a] x. p(x)) & q"));
        assert_ne!(p("all[a] x. p(x) & q"), p("all[a] x. (p(x) & q)"));
    }

    #[test]
    fn arity_clash_rejected() {
        assert!(matches!(
            parse("p(0) & p(0,1)"),
            Err(ParseError::Invalid(SyntaxError::ArityClash { .. }))
        ));
    }

    #[test]
    fn kind_clash_rejected() {
        assert!(matches!(
            parse("(p &[c] q) & (p |[c] q)"),
            Err(ParseError::Invalid(SyntaxError::ClusterKindClash { .. }))
        ));
        // Negation flips kinds, so this pair is consistent.
        assert!(parse("(p &[c] q) & ~(p |[c] q)").is_ok());
    }

    #[test]
    fn print_roundtrip_cases() {
        let cases = [
            "T",
            "F",
            "p",
            "~p",
            "p(0,1)",
            "~p(x)",
            "p & q | r",
            "p | (q | r)",
            "(p | q) & r",
            "p &[c] q | r",
            "(p |[d] q) &[c] r",
            "p &[c] (q |[d] r)",
            "all[a] x. p(x) & q",
            "all[a] x. (p(x) & q)",
            "all[a] x. ex[b] y. p(x,y)",
            "(all[a] x. ~p(x) & all[a] x. ~p(x)) | ex[c] x. p(x)",
            "p &[c] q &[c] r",
            "~q | p(7) | F & T",
        ];
        for s in cases {
            let c = p(s);
            let text = print(&c);
            let back = p(&text);
            assert_eq!(back, c, "roundtrip of `{s}` via `{text}`");
        }
    }

    #[test]
    fn free_vars_and_closedness() {
        assert!(p("all[a] x. p(x)").is_closed());
        let open = parse("p(x) | all[a] x. q(x)").unwrap();
        assert_eq!(
            open.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["x".to_string()]
        );
        assert!(!open.is_closed());
    }

    #[test]
    fn substitute_basics_and_capture() {
        let c = parse("p(x) | all[a] x. p(x)").unwrap();
        let subst = c.substitute("x", &Term::Const(3)).unwrap();
        assert_eq!(subst, parse("p(3) | all[a] x. p(x)").unwrap());

        // Substituting y for x under a binder of y captures.
        let c = parse("all[a] y. p(x,y)").unwrap();
        assert!(matches!(
            c.substitute("x", &Term::Var("y".into())),
            Err(SyntaxError::Capture { .. })
        ));
        // No free occurrence below the binder: fine.
        let c = parse("all[a] y. p(y) | q(x)").unwrap();
        assert!(c.substitute("x", &Term::Var("y".into())).is_ok());
    }

    #[test]
    fn subst_var_avoiding_renames_binders() {
        // Renaming x -> y where a binder of y encloses a free x.
        let c = parse("all[a] y. p(x,y)").unwrap();
        let renamed = subst_var_avoiding(&c, "x", "y");
        // The binder moved out of the way; result is alpha-eq to binding a
        // fresh z with the outer y free inside.
        let expected = parse("all[a] z. p(y,z)").unwrap();
        assert!(renamed.alpha_eq(&expected), "got {renamed}");
    }

    #[test]
    fn alpha_eq_basics() {
        assert!(p("all[a] x. p(x)").alpha_eq(&p("all[a] y. p(y)")));
        assert!(!p("all[a] x. p(x)").alpha_eq(&p("all[b] x. p(x)")));
        let px = parse("p(x)").unwrap();
        let py = parse("p(y)").unwrap();
        assert!(!px.alpha_eq(&py), "free variables are compared verbatim");
        // Shadowing handled positionally.
        assert!(p("all[a] x. all[b] x. p(x)").alpha_eq(&p("all[a] y. all[b] x. p(x)")));
        assert!(!p("all[a] x. all[b] y. p(x)").alpha_eq(&p("all[a] x. all[b] y. p(y)")));
    }

    #[test]
    fn canonical_is_alpha_invariant() {
        let a = p("all[a] x. (p(x) & ex[b] y. q(x,y))");
        let b = p("all[a] u. (p(u) & ex[b] v. q(u,v))");
        assert_eq!(a.canonical(), b.canonical());
        let c = p("all[a] x. (p(x) & ex[b] y. q(y,x))");
        assert_ne!(a.canonical(), c.canonical());
    }

    #[test]
    fn paths_subtree_replace() {
        let c = p("p & q | r");
        let lr: Path = "/l/r".parse().unwrap();
        assert_eq!(*c.subtree(&lr).unwrap(), atom("q", false, &[]));
        let swapped = c.replace_at(&lr, atom("s", false, &[])).unwrap();
        assert_eq!(swapped, p("p & s | r"));
        assert!(c.subtree(&"/b".parse().unwrap()).is_err());
        assert_eq!(c.all_paths().len(), 5);
        assert_eq!("/l/r".parse::<Path>().unwrap().to_string(), "/l/r");
        assert_eq!(Path::root().to_string(), "/");
    }

    #[test]
    fn clusters_map() {
        let c = p("(r &[c] q) & all[a] x. (p(x) |[d] q)");
        let m = c.clusters_of();
        assert_eq!(m.len(), 3);
        assert_eq!(m["c"].0, ClusterKind::Chand);
        assert_eq!(m["a"].0, ClusterKind::Chall);
        assert_eq!(m["d"].0, ClusterKind::Chor);
        assert_eq!(m["c"].1, vec!["/l".parse::<Path>().unwrap()]);
        assert!(c.has_cluster("d"));
        assert!(!c.has_cluster("z"));
    }

    #[test]
    fn fresh_helpers() {
        let c = p("p(0) | p(2)");
        assert_eq!(fresh_constant(&c), 1);
        assert_eq!(fresh_cluster_name(&c), "_k1");
        let c = p("p &[_k1] q");
        assert_eq!(fresh_cluster_name(&c), "_k2");
        let mut avoid = BTreeSet::new();
        avoid.insert("_v1".to_string());
        assert_eq!(fresh_var(&avoid), "_v2");
    }

    #[test]
    fn comments_and_numerals() {
        assert_eq!(p("p(10) # trailing comment"), atom("p", false, &[Term::Const(10)]));
        assert!(parse("p(99999999999999999999999999)").is_err());
    }
}

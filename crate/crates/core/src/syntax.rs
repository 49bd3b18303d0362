//! Surface syntax and abstract syntax for linear λ-terms.
//!
//! Terms follow the ML-flavored notation `fn x=>t`, application,
//! `(s,t)` pairs and `let val (x,y)=s in t end` (the trailing `end` is
//! optional).  Declarations use `fun f x1 ... xn = t;` sugar, with
//! `fun f x = t` elaborating to `f = fn x=>t` and earlier declaration
//! names inlined into later bodies.
//!
//! The linearity discipline is the strict one: every free or bound
//! variable of a term occurs exactly once in it, and no name is bound
//! twice.  Elaboration keeps the discipline by freshening binders of
//! every inlined copy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::{Error, Result};

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

pub type Name = String;

/// Abstract syntax of linear λ-terms.
#[derive(Debug, Clone)]
pub enum TermKind {
    Var(Name),
    Lam(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    LetPair {
        left: Name,
        right: Name,
        scrutinee: Box<Term>,
        body: Box<Term>,
    },
}

/// A term node together with its optional source span.
///
/// Structural `==` is deliberately not provided; compare terms with
/// [`alpha_eq`] or through their [`canonical_key`].
#[derive(Debug, Clone)]
pub struct Term {
    pub kind: TermKind,
    pub span: Option<SourceSpan>,
}

impl Term {
    pub fn new(kind: TermKind) -> Self {
        Term { kind, span: None }
    }

    pub fn var(name: impl Into<Name>) -> Self {
        Term::new(TermKind::Var(name.into()))
    }

    pub fn lam(binder: impl Into<Name>, body: Term) -> Self {
        Term::new(TermKind::Lam(binder.into(), Box::new(body)))
    }

    pub fn app(fun: Term, arg: Term) -> Self {
        Term::new(TermKind::App(Box::new(fun), Box::new(arg)))
    }

    /// Left-associated application `head a1 a2 ... an`.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Self {
        args.into_iter().fold(head, Term::app)
    }

    pub fn pair(left: Term, right: Term) -> Self {
        Term::new(TermKind::Pair(Box::new(left), Box::new(right)))
    }

    pub fn let_pair(
        left: impl Into<Name>,
        right: impl Into<Name>,
        scrutinee: Term,
        body: Term,
    ) -> Self {
        Term::new(TermKind::LetPair {
            left: left.into(),
            right: right.into(),
            scrutinee: Box::new(scrutinee),
            body: Box::new(body),
        })
    }

    /// Multi-binder lambda `fn x1=> ... =>fn xn=>body`.
    pub fn lams(binders: &[Name], body: Term) -> Self {
        binders
            .iter()
            .rev()
            .fold(body, |acc, b| Term::lam(b.clone(), acc))
    }

    pub fn size(&self) -> usize {
        match &self.kind {
            TermKind::Var(_) => 1,
            TermKind::Lam(_, b) => 1 + b.size(),
            TermKind::App(f, a) => 1 + f.size() + a.size(),
            TermKind::Pair(l, r) => 1 + l.size() + r.size(),
            TermKind::LetPair {
                scrutinee, body, ..
            } => 1 + scrutinee.size() + body.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            TermKind::Var(_) => 1,
            TermKind::Lam(_, b) => 1 + b.depth(),
            TermKind::App(f, a) => 1 + f.depth().max(a.depth()),
            TermKind::Pair(l, r) => 1 + l.depth().max(r.depth()),
            TermKind::LetPair {
                scrutinee, body, ..
            } => 1 + scrutinee.depth().max(body.depth()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", pretty_print(self))
    }
}

// ---------------------------------------------------------------------------
// Variable sets
// ---------------------------------------------------------------------------

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    match &t.kind {
        TermKind::Var(x) => {
            if !bound.contains(x) {
                out.push(x.clone());
            }
        }
        TermKind::Lam(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        TermKind::App(f, a) => {
            collect_free(f, bound, out);
            collect_free(a, bound, out);
        }
        TermKind::Pair(l, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        TermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => {
            collect_free(scrutinee, bound, out);
            bound.push(left.clone());
            bound.push(right.clone());
            collect_free(body, bound, out);
            bound.pop();
            bound.pop();
        }
    }
}

/// Free variables in occurrence order (with repetitions).
pub fn free_var_occurrences(t: &Term) -> Vec<Name> {
    let mut out = Vec::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

/// The set FV(t).
pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    free_var_occurrences(t).into_iter().collect()
}

/// The set BV(t): all binder names, from `fn` and `let val` alike.
pub fn bound_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fn walk(t: &Term, out: &mut BTreeSet<Name>) {
        match &t.kind {
            TermKind::Var(_) => {}
            TermKind::Lam(x, b) => {
                out.insert(x.clone());
                walk(b, out);
            }
            TermKind::App(f, a) => {
                walk(f, out);
                walk(a, out);
            }
            TermKind::Pair(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                out.insert(left.clone());
                out.insert(right.clone());
                walk(scrutinee, out);
                walk(body, out);
            }
        }
    }
    walk(t, &mut out);
    out
}

/// Every name mentioned anywhere in the term, bound or free.
pub fn all_names(t: &Term) -> BTreeSet<Name> {
    let mut s = bound_vars(t);
    s.extend(free_vars(t));
    s
}

// ---------------------------------------------------------------------------
// One-hole contexts
// ---------------------------------------------------------------------------

/// One frame of a one-hole context, outermost first in [`Context`].
#[derive(Debug, Clone)]
pub enum ContextFrame {
    AppFun { arg: Term },
    AppArg { fun: Term },
    PairLeft { right: Term },
    PairRight { left: Term },
    LamBody { binder: Name },
    LetScrutinee { left: Name, right: Name, body: Term },
    LetBody { left: Name, right: Name, scrutinee: Term },
}

/// A one-hole context `C[]` over the term grammar.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub frames: Vec<ContextFrame>,
}

impl Context {
    /// CV(C[]): variables captured at the hole.
    pub fn captured_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for f in &self.frames {
            match f {
                ContextFrame::LamBody { binder } => {
                    out.insert(binder.clone());
                }
                ContextFrame::LetBody { left, right, .. } => {
                    out.insert(left.clone());
                    out.insert(right.clone());
                }
                _ => {}
            }
        }
        out
    }

    /// FV(C[]): free variables of the context itself (side terms, minus
    /// binders already introduced further out).
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut bound: BTreeSet<Name> = BTreeSet::new();
        let mut out = BTreeSet::new();
        for f in &self.frames {
            let side: Vec<&Term> = match f {
                ContextFrame::AppFun { arg } => vec![arg],
                ContextFrame::AppArg { fun } => vec![fun],
                ContextFrame::PairLeft { right } => vec![right],
                ContextFrame::PairRight { left } => vec![left],
                ContextFrame::LamBody { .. } => vec![],
                ContextFrame::LetScrutinee { body, .. } => vec![body],
                ContextFrame::LetBody { scrutinee, .. } => vec![scrutinee],
            };
            for t in side {
                // Binders of a LetScrutinee frame scope over its body.
                let mut local_bound = bound.clone();
                if let ContextFrame::LetScrutinee { left, right, .. } = f {
                    local_bound.insert(left.clone());
                    local_bound.insert(right.clone());
                }
                for v in free_vars(t) {
                    if !local_bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            match f {
                ContextFrame::LamBody { binder } => {
                    bound.insert(binder.clone());
                }
                ContextFrame::LetBody { left, right, .. } => {
                    bound.insert(left.clone());
                    bound.insert(right.clone());
                }
                _ => {}
            }
        }
        out
    }

    /// Plug a term into the hole.
    pub fn plug(&self, t: Term) -> Term {
        let mut acc = t;
        for f in self.frames.iter().rev() {
            acc = match f.clone() {
                ContextFrame::AppFun { arg } => Term::app(acc, arg),
                ContextFrame::AppArg { fun } => Term::app(fun, acc),
                ContextFrame::PairLeft { right } => Term::pair(acc, right),
                ContextFrame::PairRight { left } => Term::pair(left, acc),
                ContextFrame::LamBody { binder } => Term::lam(binder, acc),
                ContextFrame::LetScrutinee { left, right, body } => {
                    Term::let_pair(left, right, acc, body)
                }
                ContextFrame::LetBody {
                    left,
                    right,
                    scrutinee,
                } => Term::let_pair(left, right, scrutinee, acc),
            };
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Alpha equivalence and canonical keys
// ---------------------------------------------------------------------------

/// Nameless printing: binders become indices, free variables keep their
/// names.  Two terms are α-equivalent iff their keys coincide.
pub fn canonical_key(t: &Term) -> String {
    fn go(t: &Term, env: &mut Vec<Name>, out: &mut String) {
        match &t.kind {
            TermKind::Var(x) => {
                match env.iter().rev().position(|b| b == x) {
                    Some(i) => {
                        out.push('#');
                        out.push_str(&i.to_string());
                    }
                    None => {
                        out.push('!');
                        out.push_str(x);
                    }
                }
                out.push(';');
            }
            TermKind::Lam(x, b) => {
                out.push('L');
                env.push(x.clone());
                go(b, env, out);
                env.pop();
            }
            TermKind::App(f, a) => {
                out.push('A');
                go(f, env, out);
                go(a, env, out);
            }
            TermKind::Pair(l, r) => {
                out.push('P');
                go(l, env, out);
                go(r, env, out);
            }
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                out.push('D');
                go(scrutinee, env, out);
                env.push(left.clone());
                env.push(right.clone());
                go(body, env, out);
                env.pop();
                env.pop();
            }
        }
    }
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_eq(t1: &Term, t2: &Term) -> bool {
    canonical_key(t1) == canonical_key(t2)
}

// ---------------------------------------------------------------------------
// Linearity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum LinearityViolation {
    /// A binder whose variable is never used.
    Unused { name: Name, span: Option<SourceSpan> },
    /// A variable used more than once.
    MultiUse { name: Name, spans: Vec<Option<SourceSpan>> },
    /// A name bound more than once (including shadowing).
    Rebound { name: Name, span: Option<SourceSpan> },
    /// `let val (x,x)` with identical binders.
    DuplicateLetBinders { name: Name, span: Option<SourceSpan> },
}

impl fmt::Display for LinearityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearityViolation::Unused { name, .. } => write!(f, "`{name}` is never used"),
            LinearityViolation::MultiUse { name, spans } => {
                write!(f, "`{name}` is used {} times", spans.len())
            }
            LinearityViolation::Rebound { name, .. } => write!(f, "`{name}` is bound twice"),
            LinearityViolation::DuplicateLetBinders { name, .. } => {
                write!(f, "duplicate let binders `{name}`")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinearityReport {
    pub violations: Vec<LinearityViolation>,
}

impl LinearityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for LinearityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Check that every free or bound variable of `t` occurs exactly once and
/// no name is bound twice.
pub fn linearity_check(t: &Term) -> LinearityReport {
    let mut report = LinearityReport::default();
    // name -> spans of uses
    let mut uses: BTreeMap<Name, Vec<Option<SourceSpan>>> = BTreeMap::new();
    let mut binders: BTreeMap<Name, Vec<Option<SourceSpan>>> = BTreeMap::new();

    fn walk(
        t: &Term,
        uses: &mut BTreeMap<Name, Vec<Option<SourceSpan>>>,
        binders: &mut BTreeMap<Name, Vec<Option<SourceSpan>>>,
        report: &mut LinearityReport,
    ) {
        match &t.kind {
            TermKind::Var(x) => uses.entry(x.clone()).or_default().push(t.span),
            TermKind::Lam(x, b) => {
                binders.entry(x.clone()).or_default().push(t.span);
                walk(b, uses, binders, report);
            }
            TermKind::App(f, a) => {
                walk(f, uses, binders, report);
                walk(a, uses, binders, report);
            }
            TermKind::Pair(l, r) => {
                walk(l, uses, binders, report);
                walk(r, uses, binders, report);
            }
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                if left == right {
                    report.violations.push(LinearityViolation::DuplicateLetBinders {
                        name: left.clone(),
                        span: t.span,
                    });
                }
                binders.entry(left.clone()).or_default().push(t.span);
                binders.entry(right.clone()).or_default().push(t.span);
                walk(scrutinee, uses, binders, report);
                walk(body, uses, binders, report);
            }
        }
    }
    walk(t, &mut uses, &mut binders, &mut report);

    for (name, spans) in &binders {
        if spans.len() > 1 {
            report.violations.push(LinearityViolation::Rebound {
                name: name.clone(),
                span: spans[1],
            });
        }
        match uses.get(name) {
            None => report.violations.push(LinearityViolation::Unused {
                name: name.clone(),
                span: spans[0],
            }),
            Some(u) if u.len() > 1 => report.violations.push(LinearityViolation::MultiUse {
                name: name.clone(),
                spans: u.clone(),
            }),
            _ => {}
        }
    }
    for (name, spans) in &uses {
        if !binders.contains_key(name) && spans.len() > 1 {
            report.violations.push(LinearityViolation::MultiUse {
                name: name.clone(),
                spans: spans.clone(),
            });
        }
    }
    report
}

/// `Ok(())` when linear, `Err` carrying the report otherwise.
pub fn require_linear(t: &Term) -> Result<()> {
    let report = linearity_check(t);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::Linearity(report.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Fresh names and substitution
// ---------------------------------------------------------------------------

/// First name of the family `root, root_1, root_2, ...` not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let root = match base.rfind('_') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() => {
            &base[..i]
        }
        _ => base,
    };
    for k in 1.. {
        let cand = format!("{root}_{k}");
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Rename binders of `t` that clash with `avoid`; every binder name of the
/// result is recorded into `avoid` so successive calls stay disjoint.
pub fn freshen_binders(t: &Term, avoid: &mut BTreeSet<Name>) -> Term {
    fn go(t: &Term, ren: &mut BTreeMap<Name, Vec<Name>>, avoid: &mut BTreeSet<Name>) -> Term {
        let kind = match &t.kind {
            TermKind::Var(x) => {
                let new = ren
                    .get(x)
                    .and_then(|v| v.last().cloned())
                    .unwrap_or_else(|| x.clone());
                TermKind::Var(new)
            }
            TermKind::Lam(x, b) => {
                let nx = fresh_name(x, avoid);
                avoid.insert(nx.clone());
                ren.entry(x.clone()).or_default().push(nx.clone());
                let nb = go(b, ren, avoid);
                ren.get_mut(x).unwrap().pop();
                TermKind::Lam(nx, Box::new(nb))
            }
            TermKind::App(f, a) => {
                TermKind::App(Box::new(go(f, ren, avoid)), Box::new(go(a, ren, avoid)))
            }
            TermKind::Pair(l, r) => {
                TermKind::Pair(Box::new(go(l, ren, avoid)), Box::new(go(r, ren, avoid)))
            }
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                let ns = go(scrutinee, ren, avoid);
                let nl = fresh_name(left, avoid);
                avoid.insert(nl.clone());
                ren.entry(left.clone()).or_default().push(nl.clone());
                let nr = fresh_name(right, avoid);
                avoid.insert(nr.clone());
                ren.entry(right.clone()).or_default().push(nr.clone());
                let nb = go(body, ren, avoid);
                ren.get_mut(right).unwrap().pop();
                ren.get_mut(left).unwrap().pop();
                TermKind::LetPair {
                    left: nl,
                    right: nr,
                    scrutinee: Box::new(ns),
                    body: Box::new(nb),
                }
            }
        };
        Term { kind, span: t.span }
    }
    go(t, &mut BTreeMap::new(), avoid)
}

/// Rename binders so that no name is bound twice and no binder clashes
/// with a free variable.  Keeps the first occurrence of each name.
pub fn barendregt(t: &Term) -> Term {
    let mut avoid = free_vars(t);
    freshen_binders(t, &mut avoid)
}

/// Apply `head` to `args`, freshening binders so the combination of
/// independently built pieces keeps every bound name unique.
pub fn apply_terms(head: &Term, args: &[Term]) -> Term {
    barendregt(&Term::apps(head.clone(), args.iter().cloned()))
}

/// Capture-free substitution `t[s/x]`.
///
/// Requires `x` to occur free exactly once in `t`; the result is linear
/// whenever `t` and `s` are linear with disjoint names.
pub fn substitute(t: &Term, x: &str, s: &Term) -> Result<Term> {
    substitute_avoiding(t, x, s, &BTreeSet::new())
}

/// Like [`substitute`], but freshened names additionally avoid
/// `extra_avoid` (typically every name of an enclosing term).
pub fn substitute_avoiding(
    t: &Term,
    x: &str,
    s: &Term,
    extra_avoid: &BTreeSet<Name>,
) -> Result<Term> {
    let occurrences = free_var_occurrences(t)
        .into_iter()
        .filter(|v| v == x)
        .count();
    if occurrences == 0 {
        return Err(Error::NotFree(x.to_string()));
    }
    // Freshen binders of the inserted copy that clash with names already
    // visible around the substitution site; binders of t are renamed below
    // only when they would capture free variables of s.
    let mut avoid = all_names(t);
    avoid.extend(extra_avoid.iter().cloned());
    let s = freshen_binders(s, &mut avoid);
    let fv_s = free_vars(&s);

    fn go(t: &Term, x: &str, s: &Term, fv_s: &BTreeSet<Name>, avoid: &mut BTreeSet<Name>) -> Term {
        match &t.kind {
            TermKind::Var(y) if y == x => s.clone(),
            TermKind::Var(_) => t.clone(),
            TermKind::Lam(y, b) => {
                if y == x {
                    // x is shadowed here; the free occurrence is elsewhere.
                    return t.clone();
                }
                if fv_s.contains(y) {
                    let ny = fresh_name(y, avoid);
                    avoid.insert(ny.clone());
                    let renamed = rename_free(b, y, &ny);
                    Term {
                        kind: TermKind::Lam(ny, Box::new(go(&renamed, x, s, fv_s, avoid))),
                        span: t.span,
                    }
                } else {
                    Term {
                        kind: TermKind::Lam(y.clone(), Box::new(go(b, x, s, fv_s, avoid))),
                        span: t.span,
                    }
                }
            }
            TermKind::App(f, a) => Term {
                kind: TermKind::App(
                    Box::new(go(f, x, s, fv_s, avoid)),
                    Box::new(go(a, x, s, fv_s, avoid)),
                ),
                span: t.span,
            },
            TermKind::Pair(l, r) => Term {
                kind: TermKind::Pair(
                    Box::new(go(l, x, s, fv_s, avoid)),
                    Box::new(go(r, x, s, fv_s, avoid)),
                ),
                span: t.span,
            },
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                let ns = go(scrutinee, x, s, fv_s, avoid);
                if left == x || right == x {
                    return Term {
                        kind: TermKind::LetPair {
                            left: left.clone(),
                            right: right.clone(),
                            scrutinee: Box::new(ns),
                            body: body.clone(),
                        },
                        span: t.span,
                    };
                }
                let mut left = left.clone();
                let mut right = right.clone();
                let mut body = (**body).clone();
                for b in [&mut left, &mut right] {
                    if fv_s.contains(b.as_str()) {
                        let nb = fresh_name(b, avoid);
                        avoid.insert(nb.clone());
                        body = rename_free(&body, b, &nb);
                        *b = nb;
                    }
                }
                Term {
                    kind: TermKind::LetPair {
                        left,
                        right,
                        scrutinee: Box::new(ns),
                        body: Box::new(go(&body, x, s, fv_s, avoid)),
                    },
                    span: t.span,
                }
            }
        }
    }
    Ok(go(t, x, &s, &fv_s, &mut avoid))
}

/// Rename free occurrences of `from` to `to` (no capture checks; callers
/// pick `to` fresh).
pub(crate) fn rename_free(t: &Term, from: &str, to: &str) -> Term {
    match &t.kind {
        TermKind::Var(x) if x == from => Term {
            kind: TermKind::Var(to.to_string()),
            span: t.span,
        },
        TermKind::Var(_) => t.clone(),
        TermKind::Lam(x, b) => {
            if x == from {
                t.clone()
            } else {
                Term {
                    kind: TermKind::Lam(x.clone(), Box::new(rename_free(b, from, to))),
                    span: t.span,
                }
            }
        }
        TermKind::App(f, a) => Term {
            kind: TermKind::App(
                Box::new(rename_free(f, from, to)),
                Box::new(rename_free(a, from, to)),
            ),
            span: t.span,
        },
        TermKind::Pair(l, r) => Term {
            kind: TermKind::Pair(
                Box::new(rename_free(l, from, to)),
                Box::new(rename_free(r, from, to)),
            ),
            span: t.span,
        },
        TermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => {
            let ns = rename_free(scrutinee, from, to);
            let nb = if left == from || right == from {
                (**body).clone()
            } else {
                rename_free(body, from, to)
            };
            Term {
                kind: TermKind::LetPair {
                    left: left.clone(),
                    right: right.clone(),
                    scrutinee: Box::new(ns),
                    body: Box::new(nb),
                },
                span: t.span,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty printing
// ---------------------------------------------------------------------------

fn atom_string(t: &Term) -> String {
    match &t.kind {
        TermKind::Var(x) => x.clone(),
        TermKind::Pair(l, r) => format!("({},{})", pretty_print(l), pretty_print(r)),
        _ => format!("({})", pretty_print(t)),
    }
}

fn app_string(t: &Term) -> String {
    match &t.kind {
        TermKind::App(f, a) => format!("{} {}", app_string(f), atom_string(a)),
        _ => atom_string(t),
    }
}

/// Render a term in the surface grammar; `parse_term ∘ pretty_print` is the
/// identity up to α and spans.
pub fn pretty_print(t: &Term) -> String {
    match &t.kind {
        TermKind::Var(_) | TermKind::Pair(_, _) => atom_string(t),
        TermKind::App(_, _) => app_string(t),
        TermKind::Lam(x, b) => format!("fn {}=>{}", x, pretty_print(b)),
        TermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => format!(
            "let val ({},{})={} in {} end",
            left,
            right,
            pretty_print(scrutinee),
            pretty_print(body)
        ),
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    TyVar(String),
    Fn,
    Let,
    Val,
    In,
    End,
    Fun,
    ValDecl, // `val` at declaration position shares the Val token
    DArrow,  // =>
    Arrow,   // ->
    Star,
    Eq,
    Comma,
    Semi,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
pub(crate) struct SpannedTok {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn lex(text: &str) -> Result<Vec<SpannedTok>> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            ';' => {
                i += 1;
                Tok::Semi
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 2;
                    Tok::DArrow
                } else {
                    i += 1;
                    Tok::Eq
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 2;
                    Tok::Arrow
                } else {
                    return Err(Error::Parse {
                        message: "expected `->`".into(),
                        span: Some(SourceSpan::new(start, start + 1)),
                    });
                }
            }
            '\'' => {
                i += 1;
                let s = i;
                while i < bytes.len() && is_ident_char(bytes[i] as char, i > s) {
                    i += 1;
                }
                if i == s {
                    return Err(Error::Parse {
                        message: "expected type variable name after `'`".into(),
                        span: Some(SourceSpan::new(start, i)),
                    });
                }
                Tok::TyVar(text[s..i].to_string())
            }
            c if is_ident_char(c, false) => {
                while i < bytes.len() && is_ident_char(bytes[i] as char, true) {
                    i += 1;
                }
                match &text[start..i] {
                    "fn" => Tok::Fn,
                    "let" => Tok::Let,
                    "val" => Tok::Val,
                    "in" => Tok::In,
                    "end" => Tok::End,
                    "fun" => Tok::Fun,
                    w => Tok::Ident(w.to_string()),
                }
            }
            _ => {
                return Err(Error::Parse {
                    message: format!("unexpected character `{c}`"),
                    span: Some(SourceSpan::new(start, start + 1)),
                })
            }
        };
        out.push(SpannedTok {
            tok,
            span: SourceSpan::new(start, i),
        });
    }
    Ok(out)
}

fn is_ident_char(c: char, rest: bool) -> bool {
    c.is_ascii_alphabetic() || c == '_' || (rest && (c.is_ascii_digit() || c == '\''))
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

pub(crate) struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    len: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            len: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or(SourceSpan::new(self.len, self.len))
    }

    fn bump(&mut self) -> Option<SpannedTok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<SourceSpan> {
        match self.toks.get(self.pos) {
            Some(t) if t.tok == tok => {
                let s = t.span;
                self.pos += 1;
                Ok(s)
            }
            _ => Err(Error::Parse {
                message: format!("expected {what}"),
                span: Some(self.span()),
            }),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan)> {
        match self.toks.get(self.pos).cloned() {
            Some(SpannedTok {
                tok: Tok::Ident(s),
                span,
            }) => {
                self.pos += 1;
                Ok((s, span))
            }
            _ => Err(Error::Parse {
                message: format!("expected {what}"),
                span: Some(self.span()),
            }),
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term> {
        let start = self.span().start;
        match self.peek() {
            Some(Tok::Fn) => {
                self.bump();
                let (x, _) = self.ident("binder after `fn`")?;
                self.expect(Tok::DArrow, "`=>`")?;
                let body = self.term()?;
                let end = body.span.map(|s| s.end).unwrap_or(start);
                Ok(Term {
                    kind: TermKind::Lam(x, Box::new(body)),
                    span: Some(SourceSpan::new(start, end)),
                })
            }
            Some(Tok::Let) => {
                self.bump();
                self.expect(Tok::Val, "`val`")?;
                self.expect(Tok::LParen, "`(`")?;
                let (x, xs) = self.ident("first let binder")?;
                self.expect(Tok::Comma, "`,`")?;
                let (y, _) = self.ident("second let binder")?;
                if x == y {
                    return Err(Error::Parse {
                        message: format!("duplicate let binders `{x}`"),
                        span: Some(xs),
                    });
                }
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Eq, "`=`")?;
                let scrutinee = self.term()?;
                self.expect(Tok::In, "`in`")?;
                let body = self.term()?;
                let mut end = body.span.map(|s| s.end).unwrap_or(start);
                if self.peek() == Some(&Tok::End) {
                    end = self.bump().unwrap().span.end;
                }
                Ok(Term {
                    kind: TermKind::LetPair {
                        left: x,
                        right: y,
                        scrutinee: Box::new(scrutinee),
                        body: Box::new(body),
                    },
                    span: Some(SourceSpan::new(start, end)),
                })
            }
            _ => self.app_chain(),
        }
    }

    fn app_chain(&mut self) -> Result<Term> {
        let mut t = self.atom()?;
        while matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen)) {
            let arg = self.atom()?;
            let span = match (t.span, arg.span) {
                (Some(a), Some(b)) => Some(SourceSpan::new(a.start, b.end)),
                _ => None,
            };
            t = Term {
                kind: TermKind::App(Box::new(t), Box::new(arg)),
                span,
            };
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.toks.get(self.pos).cloned() {
            Some(SpannedTok {
                tok: Tok::Ident(x),
                span,
            }) => {
                self.pos += 1;
                Ok(Term {
                    kind: TermKind::Var(x),
                    span: Some(span),
                })
            }
            Some(SpannedTok {
                tok: Tok::LParen,
                span,
            }) => {
                self.pos += 1;
                let first = self.term()?;
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                        let second = self.term()?;
                        let close = self.expect(Tok::RParen, "`)`")?;
                        Ok(Term {
                            kind: TermKind::Pair(Box::new(first), Box::new(second)),
                            span: Some(SourceSpan::new(span.start, close.end)),
                        })
                    }
                    _ => {
                        let close = self.expect(Tok::RParen, "`)` or `,`")?;
                        Ok(Term {
                            kind: first.kind,
                            span: Some(SourceSpan::new(span.start, close.end)),
                        })
                    }
                }
            }
            _ => Err(Error::Parse {
                message: "expected a term".into(),
                span: Some(self.span()),
            }),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Parse a single term in the surface grammar.
pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if !p.at_end() {
        return Err(Error::Parse {
            message: "trailing input after term".into(),
            span: Some(p.span()),
        });
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

/// A single `fun`/`val` declaration before inlining.
#[derive(Debug, Clone)]
pub struct Decl {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: Term,
    pub span: Option<SourceSpan>,
}

/// An ordered list of declarations; later bodies may refer to earlier names.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn names(&self) -> Vec<&str> {
        self.decls.iter().map(|d| d.name.as_str()).collect()
    }
}

/// Parse a sequence of `fun f x1 ... xn = t;` / `val f = t;` declarations.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser::new(text)?;
    let mut decls = Vec::new();
    while !p.at_end() {
        let start = p.span().start;
        let is_fun = match p.peek() {
            Some(Tok::Fun) => true,
            Some(Tok::Val) => false,
            _ => {
                return Err(Error::Parse {
                    message: "expected `fun` or `val` declaration".into(),
                    span: Some(p.span()),
                })
            }
        };
        p.bump();
        let (name, _) = p.ident("declaration name")?;
        let mut params = Vec::new();
        if is_fun {
            while let Some(Tok::Ident(_)) = p.peek() {
                let (x, _) = p.ident("parameter")?;
                params.push(x);
            }
        }
        p.expect(Tok::Eq, "`=`")?;
        let body = p.term()?;
        let end = p.expect(Tok::Semi, "`;` after declaration")?;
        decls.push(Decl {
            name,
            params,
            body,
            span: Some(SourceSpan::new(start, end.end)),
        });
    }
    Ok(Program { decls })
}

/// A program after elaboration: each declaration is a closed linear term
/// with earlier names inlined and `fun` parameters turned into lambdas.
#[derive(Debug, Clone, Default)]
pub struct ElaboratedProgram {
    pub defs: Vec<(Name, Term)>,
}

impl ElaboratedProgram {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.defs.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Inline earlier declarations into later ones, freshening binders of each
/// inlined copy, and check that every elaborated body is a closed linear
/// term.
pub fn elaborate(program: &Program) -> Result<ElaboratedProgram> {
    let mut defs: Vec<(Name, Term)> = Vec::new();
    for decl in &program.decls {
        if defs.iter().any(|(n, _)| *n == decl.name) {
            return Err(Error::Parse {
                message: format!("redefinition of `{}`", decl.name),
                span: decl.span,
            });
        }
        let sugared = Term::lams(&decl.params, decl.body.clone());
        let inlined = inline_names(&sugared, &defs)?;
        let inlined = barendregt(&inlined);
        let report = linearity_check(&inlined);
        if !report.is_ok() {
            return Err(Error::Linearity(format!(
                "declaration `{}`: {}",
                decl.name, report
            )));
        }
        let fv = free_vars(&inlined);
        if let Some(v) = fv.iter().next() {
            return Err(Error::Parse {
                message: format!("`{v}` is not defined"),
                span: decl.span,
            });
        }
        defs.push((decl.name.clone(), inlined));
    }
    Ok(ElaboratedProgram { defs })
}

fn inline_names(t: &Term, defs: &[(Name, Term)]) -> Result<Term> {
    fn go(t: &Term, defs: &[(Name, Term)], bound: &mut Vec<Name>, avoid: &mut BTreeSet<Name>) -> Term {
        match &t.kind {
            TermKind::Var(x) => {
                if bound.contains(x) {
                    return t.clone();
                }
                match defs.iter().find(|(n, _)| n == x) {
                    Some((_, def)) => freshen_binders(def, avoid),
                    None => t.clone(),
                }
            }
            TermKind::Lam(x, b) => {
                bound.push(x.clone());
                let nb = go(b, defs, bound, avoid);
                bound.pop();
                Term {
                    kind: TermKind::Lam(x.clone(), Box::new(nb)),
                    span: t.span,
                }
            }
            TermKind::App(f, a) => Term {
                kind: TermKind::App(
                    Box::new(go(f, defs, bound, avoid)),
                    Box::new(go(a, defs, bound, avoid)),
                ),
                span: t.span,
            },
            TermKind::Pair(l, r) => Term {
                kind: TermKind::Pair(
                    Box::new(go(l, defs, bound, avoid)),
                    Box::new(go(r, defs, bound, avoid)),
                ),
                span: t.span,
            },
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                let ns = go(scrutinee, defs, bound, avoid);
                bound.push(left.clone());
                bound.push(right.clone());
                let nb = go(body, defs, bound, avoid);
                bound.pop();
                bound.pop();
                Term {
                    kind: TermKind::LetPair {
                        left: left.clone(),
                        right: right.clone(),
                        scrutinee: Box::new(ns),
                        body: Box::new(nb),
                    },
                    span: t.span,
                }
            }
        }
    }
    let mut avoid = all_names(t);
    for (_, d) in defs {
        avoid.extend(all_names(d));
    }
    Ok(go(t, defs, &mut Vec::new(), &mut avoid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn parses_identity() {
        let t = p("fn x=>x");
        match &t.kind {
            TermKind::Lam(x, b) => {
                assert_eq!(x, "x");
                assert!(matches!(&b.kind, TermKind::Var(v) if v == "x"));
            }
            _ => panic!("expected lambda"),
        }
    }

    #[test]
    fn parses_let_pair_swap() {
        let t = p("let val (x,y)=(u,v) in (y,x) end");
        match &t.kind {
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                assert_eq!(left, "x");
                assert_eq!(right, "y");
                assert!(matches!(&scrutinee.kind, TermKind::Pair(_, _)));
                assert!(matches!(&body.kind, TermKind::Pair(_, _)));
            }
            _ => panic!("expected let"),
        }
    }

    #[test]
    fn let_without_end_parses() {
        let t = p("let val (x,y) = t in (x,y)");
        assert!(matches!(&t.kind, TermKind::LetPair { .. }));
    }

    #[test]
    fn application_is_left_associative() {
        let t = p("f a b");
        match &t.kind {
            TermKind::App(fa, b) => {
                assert!(matches!(&b.kind, TermKind::Var(v) if v == "b"));
                assert!(matches!(&fa.kind, TermKind::App(_, _)));
            }
            _ => panic!("expected application"),
        }
    }

    #[test]
    fn fn_body_extends_right() {
        let t = p("fn x=>x y");
        match &t.kind {
            TermKind::Lam(_, body) => assert!(matches!(&body.kind, TermKind::App(_, _))),
            _ => panic!(),
        }
    }

    #[test]
    fn non_linear_term_parses_then_fails_check() {
        let t = p("fn x=>(x,x)");
        assert!(!linearity_check(&t).is_ok());
    }

    #[test]
    fn unused_binder_reported() {
        let r = linearity_check(&p("fn x=>fn y=>x"));
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, LinearityViolation::Unused { name, .. } if name == "y")));
    }

    #[test]
    fn linear_terms_pass() {
        assert!(linearity_check(&p("fn x=>x")).is_ok());
        assert!(linearity_check(&p("fn x=>fn y=>fn z=>z x y")).is_ok());
        assert!(linearity_check(&p("let val (x,y)=(u,v) in (y,x) end")).is_ok());
    }

    #[test]
    fn duplicate_let_binders_rejected_at_parse() {
        assert!(parse_term("let val (x,x)=p in x end").is_err());
    }

    #[test]
    fn alpha_eq_examples() {
        assert!(alpha_eq(&p("fn x=>x"), &p("fn y=>y")));
        assert!(!alpha_eq(&p("fn x=>fn y=>x y"), &p("fn x=>fn y=>y x")));
        // True vs False
        assert!(!alpha_eq(
            &p("fn x=>fn y=>fn z=>z x y"),
            &p("fn x=>fn y=>fn z=>z y x")
        ));
    }

    #[test]
    fn substitute_examples() {
        // (z x y)[s/x] with s = True-shaped term
        let t = p("z x y");
        let s = p("fn a=>fn b=>fn c=>c a b");
        let r = substitute(&t, "x", &s).unwrap();
        assert!(alpha_eq(&r, &p("z (fn a=>fn b=>fn c=>c a b) y")));

        let r2 = substitute(&p("x"), "x", &p("s")).unwrap();
        assert!(alpha_eq(&r2, &p("s")));

        assert!(substitute(&p("fn y=>y"), "x", &p("s")).is_err());
    }

    #[test]
    fn substitution_avoids_capture() {
        // (fn y=>x y)[y/x] must not capture the free y.
        let t = p("fn y=>x y");
        let r = substitute(&t, "x", &p("y")).unwrap();
        // result: fn y_1 => y y_1 (α-equal to fn w=>y w)
        let expected = p("fn w=>y w");
        assert!(alpha_eq(&r, &expected), "got {r}");
    }

    #[test]
    fn fv_bv_cv_clauses() {
        let t = p("fn x=>t x");
        assert!(bound_vars(&t).contains("x"));
        assert!(free_vars(&t).contains("t"));
        assert!(free_vars(&p("fn x=>x")).is_empty());

        let ctx = Context {
            frames: vec![ContextFrame::LetBody {
                left: "x".into(),
                right: "y".into(),
                scrutinee: p("t"),
            }],
        };
        let cv = ctx.captured_vars();
        assert!(cv.contains("x") && cv.contains("y"));
        assert!(ctx.free_vars().contains("t"));

        let ctx2 = Context {
            frames: vec![
                ContextFrame::LamBody { binder: "z".into() },
                ContextFrame::PairLeft { right: p("z") },
            ],
        };
        assert!(ctx2.free_vars().is_empty());
    }

    #[test]
    fn roundtrip_pretty_parse() {
        for src in [
            "fn x=>x",
            "fn x=>fn y=>fn z=>z x y",
            "let val (x,y)=(u,v) in (y,x) end",
            "f (fn x=>x) (a,b)",
            "let val (x,y)=p in x (fn q=>q y) end",
        ] {
            let t = p(src);
            let printed = pretty_print(&t);
            let re = parse_term(&printed).unwrap();
            assert!(alpha_eq(&t, &re), "{src} -> {printed}");
        }
    }

    #[test]
    fn program_fun_sugar() {
        let prog = parse_program("fun True x y z = z x y;").unwrap();
        let elab = elaborate(&prog).unwrap();
        let t = elab.get("True").unwrap();
        assert!(alpha_eq(t, &p("fn x=>fn y=>fn z=>z x y")));
    }

    #[test]
    fn program_inlines_earlier_names() {
        let prog = parse_program("fun I x = x; fun twice f = (f I, f I);").unwrap();
        // `twice` is non-linear (f twice), must fail.
        assert!(elaborate(&prog).is_err());

        let prog2 = parse_program("fun I x = x; fun applyI f = f I;").unwrap();
        let elab = elaborate(&prog2).unwrap();
        assert!(alpha_eq(
            elab.get("applyI").unwrap(),
            &p("fn f=>f (fn x=>x)")
        ));
    }

    #[test]
    fn program_undefined_reference_rejected() {
        let prog = parse_program("fun f x = g x;").unwrap();
        assert!(elaborate(&prog).is_err());
    }

    #[test]
    fn program_redefinition_rejected() {
        let prog = parse_program("fun I x = x; fun I y = y;").unwrap();
        assert!(elaborate(&prog).is_err());
    }

    #[test]
    fn inlined_copies_are_freshened() {
        let prog =
            parse_program("fun I x = x; fun pairI p = let val (a,b)=p in (a I, b I) end;")
                .unwrap();
        let elab = elaborate(&prog).unwrap();
        let t = elab.get("pairI").unwrap();
        assert!(linearity_check(t).is_ok(), "{t}");
    }
}

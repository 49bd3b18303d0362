//! Reduction and equality for linear λ-terms.
//!
//! Four reduction rules operate under arbitrary contexts:
//!
//! ```text
//! (β1)  (fn x=>t) s                      => t[s/x]
//! (β2)  let val (x,y)=(u,v) in w end     => w[u/x, v/y]
//! (η1)  fn x=>(t x)                      => t          (x not free in t)
//! (η2)  let val (x,y)=t in (x,y) end     => t
//! ```
//!
//! together with the commutative conversion, which relocates a let-pair
//! binding across an enclosing context:
//!
//! ```text
//! C[let val (x,y)=t in u end]  <->c  let val (x,y)=t in C[u] end
//! ```
//!
//! provided `FV(C[]) ∩ {x,y} = ∅` and `CV(C[]) ∩ FV(t) = ∅`.  A βη step may
//! fire anywhere in the `=c`-class of a term; the normalizer makes that
//! effective by floating lets outward to a fixed point between steps and by
//! matching the η rules through chains of independent let bindings.
//!
//! Equality `=βηc` is decided by comparing canonicalized normal forms; the
//! proof-net translation provides an independent cross-check.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::syntax::{
    self, alpha_eq, canonical_key, free_vars, pretty_print, Name, SourceSpan, Term, TermKind,
};
use crate::types;
use crate::{Error, Result};

/// Default cap on normalization work; the calculus is strongly
/// normalizing, so running into it signals a bug.
pub const DEFAULT_STEP_BUDGET: usize = 100_000;

/// Step budget, overridable through `LINEAR_BOHM_STEP_BUDGET`.
pub fn step_budget() -> usize {
    std::env::var("LINEAR_BOHM_STEP_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_STEP_BUDGET)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleTag {
    Beta1,
    Beta2,
    Eta1,
    Eta2,
    CommLeft,
    CommRight,
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleTag::Beta1 => "β1",
            RuleTag::Beta2 => "β2",
            RuleTag::Eta1 => "η1",
            RuleTag::Eta2 => "η2",
            RuleTag::CommLeft => "c-left",
            RuleTag::CommRight => "c-right",
        };
        write!(f, "{s}")
    }
}

/// One step down into a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSeg {
    AppFun,
    AppArg,
    PairLeft,
    PairRight,
    LamBody,
    LetScrut,
    LetBody,
}

impl fmt::Display for PathSeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PathSeg::AppFun => "fun",
            PathSeg::AppArg => "arg",
            PathSeg::PairLeft => "fst",
            PathSeg::PairRight => "snd",
            PathSeg::LamBody => "body",
            PathSeg::LetScrut => "scrut",
            PathSeg::LetBody => "in",
        };
        write!(f, "{s}")
    }
}

fn path_string(path: &[PathSeg]) -> String {
    if path.is_empty() {
        "ε".to_string()
    } else {
        path.iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// A recorded rewrite step.  Replaying the steps of a trace from the
/// source term reproduces the target term.
#[derive(Debug, Clone)]
pub struct RewriteStep {
    pub rule: RuleTag,
    pub path: Vec<PathSeg>,
    /// For commutative moves: the hole position of the one-level context
    /// the binding was lifted out of.
    pub hole: Option<PathSeg>,
    pub span: Option<SourceSpan>,
    pub before: String,
    pub after: String,
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} @ {} : {} ~> {}",
            self.rule,
            path_string(&self.path),
            self.before,
            self.after
        )
    }
}

// ---------------------------------------------------------------------------
// Path navigation
// ---------------------------------------------------------------------------

fn subterm_at<'a>(t: &'a Term, path: &[PathSeg]) -> Option<&'a Term> {
    let mut cur = t;
    for seg in path {
        cur = match (&cur.kind, seg) {
            (TermKind::App(f, _), PathSeg::AppFun) => f,
            (TermKind::App(_, a), PathSeg::AppArg) => a,
            (TermKind::Pair(l, _), PathSeg::PairLeft) => l,
            (TermKind::Pair(_, r), PathSeg::PairRight) => r,
            (TermKind::Lam(_, b), PathSeg::LamBody) => b,
            (TermKind::LetPair { scrutinee, .. }, PathSeg::LetScrut) => scrutinee,
            (TermKind::LetPair { body, .. }, PathSeg::LetBody) => body,
            _ => return None,
        };
    }
    Some(cur)
}

fn replace_at(t: &Term, path: &[PathSeg], replacement: Term) -> Result<Term> {
    if path.is_empty() {
        return Ok(replacement);
    }
    let seg = path[0];
    let rest = &path[1..];
    let kind = match (&t.kind, seg) {
        (TermKind::App(f, a), PathSeg::AppFun) => {
            TermKind::App(Box::new(replace_at(f, rest, replacement)?), a.clone())
        }
        (TermKind::App(f, a), PathSeg::AppArg) => {
            TermKind::App(f.clone(), Box::new(replace_at(a, rest, replacement)?))
        }
        (TermKind::Pair(l, r), PathSeg::PairLeft) => {
            TermKind::Pair(Box::new(replace_at(l, rest, replacement)?), r.clone())
        }
        (TermKind::Pair(l, r), PathSeg::PairRight) => {
            TermKind::Pair(l.clone(), Box::new(replace_at(r, rest, replacement)?))
        }
        (TermKind::Lam(x, b), PathSeg::LamBody) => {
            TermKind::Lam(x.clone(), Box::new(replace_at(b, rest, replacement)?))
        }
        (
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            },
            PathSeg::LetScrut,
        ) => TermKind::LetPair {
            left: left.clone(),
            right: right.clone(),
            scrutinee: Box::new(replace_at(scrutinee, rest, replacement)?),
            body: body.clone(),
        },
        (
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            },
            PathSeg::LetBody,
        ) => TermKind::LetPair {
            left: left.clone(),
            right: right.clone(),
            scrutinee: scrutinee.clone(),
            body: Box::new(replace_at(body, rest, replacement)?),
        },
        _ => return Err(Error::Other("path does not match term shape".into())),
    };
    Ok(Term { kind, span: None })
}

// ---------------------------------------------------------------------------
// Let chains
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct LetBinding {
    left: Name,
    right: Name,
    scrutinee: Term,
}

fn strip_lets(mut t: Term) -> (Vec<LetBinding>, Term) {
    let mut chain = Vec::new();
    loop {
        match t.kind {
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                chain.push(LetBinding {
                    left,
                    right,
                    scrutinee: *scrutinee,
                });
                t = *body;
            }
            _ => return (chain, t),
        }
    }
}

fn wrap_lets(chain: Vec<LetBinding>, core: Term) -> Term {
    chain.into_iter().rev().fold(core, |acc, l| {
        Term::let_pair(l.left, l.right, l.scrutinee, acc)
    })
}

// ---------------------------------------------------------------------------
// Redexes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Redex {
    pub rule: RuleTag,
    pub path: Vec<PathSeg>,
}

/// Does the η1-rule fire at `fn binder => body`, possibly through a chain
/// of independent intervening lets (legal by commuting them aside first)?
/// The plain relation requires the chain to be empty.
fn eta1_redex(binder: &str, body: &Term, fused: bool) -> bool {
    let (chain, core) = strip_lets(body.clone());
    if !fused && !chain.is_empty() {
        return false;
    }
    for l in &chain {
        if free_vars(&l.scrutinee).contains(binder) {
            return false;
        }
    }
    match &core.kind {
        TermKind::App(f, a) => {
            matches!(&a.kind, TermKind::Var(v) if v == binder) && !free_vars(f).contains(binder)
        }
        _ => false,
    }
}

fn eta2_redex(left: &str, right: &str, scrutinee: &Term, body: &Term, fused: bool) -> bool {
    let (chain, core) = strip_lets(body.clone());
    if !fused && !chain.is_empty() {
        return false;
    }
    let fv_s = free_vars(scrutinee);
    for l in &chain {
        let fv = free_vars(&l.scrutinee);
        if fv.contains(left) || fv.contains(right) {
            return false;
        }
        // The chain moves above the binding; its binders must not capture
        // free variables of the scrutinee.
        if fv_s.contains(&l.left) || fv_s.contains(&l.right) {
            return false;
        }
    }
    match &core.kind {
        TermKind::Pair(a, b) => {
            matches!(&a.kind, TermKind::Var(v) if v == left)
                && matches!(&b.kind, TermKind::Var(w) if w == right)
        }
        _ => false,
    }
}

fn find_redexes_in(t: &Term, fused: bool, path: &mut Vec<PathSeg>, out: &mut Vec<Redex>) {
    match &t.kind {
        TermKind::Var(_) => {}
        TermKind::App(f, a) => {
            if matches!(&f.kind, TermKind::Lam(_, _)) {
                out.push(Redex {
                    rule: RuleTag::Beta1,
                    path: path.clone(),
                });
            }
            path.push(PathSeg::AppFun);
            find_redexes_in(f, fused, path, out);
            path.pop();
            path.push(PathSeg::AppArg);
            find_redexes_in(a, fused, path, out);
            path.pop();
        }
        TermKind::Lam(x, b) => {
            if eta1_redex(x, b, fused) {
                out.push(Redex {
                    rule: RuleTag::Eta1,
                    path: path.clone(),
                });
            }
            path.push(PathSeg::LamBody);
            find_redexes_in(b, fused, path, out);
            path.pop();
        }
        TermKind::Pair(l, r) => {
            path.push(PathSeg::PairLeft);
            find_redexes_in(l, fused, path, out);
            path.pop();
            path.push(PathSeg::PairRight);
            find_redexes_in(r, fused, path, out);
            path.pop();
        }
        TermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => {
            if matches!(&scrutinee.kind, TermKind::Pair(_, _)) {
                out.push(Redex {
                    rule: RuleTag::Beta2,
                    path: path.clone(),
                });
            }
            if eta2_redex(left, right, scrutinee, body, fused) {
                out.push(Redex {
                    rule: RuleTag::Eta2,
                    path: path.clone(),
                });
            }
            path.push(PathSeg::LetScrut);
            find_redexes_in(scrutinee, fused, path, out);
            path.pop();
            path.push(PathSeg::LetBody);
            find_redexes_in(body, fused, path, out);
            path.pop();
        }
    }
}

fn find_redexes(t: &Term, fused: bool) -> Vec<Redex> {
    let mut out = Vec::new();
    find_redexes_in(t, fused, &mut Vec::new(), &mut out);
    out
}

fn contract(t: &Term, rule: RuleTag, fused: bool, avoid: &BTreeSet<Name>) -> Result<Term> {
    match (rule, &t.kind) {
        (RuleTag::Beta1, TermKind::App(f, a)) => match &f.kind {
            TermKind::Lam(x, b) => syntax::substitute_avoiding(b, x, a, avoid),
            _ => Err(Error::Other("β1 applied to a non-redex".into())),
        },
        (
            RuleTag::Beta2,
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            },
        ) => match &scrutinee.kind {
            TermKind::Pair(u, v) => {
                let step1 = syntax::substitute_avoiding(body, left, u, avoid)?;
                syntax::substitute_avoiding(&step1, right, v, avoid)
            }
            _ => Err(Error::Other("β2 applied to a non-redex".into())),
        },
        (RuleTag::Eta1, TermKind::Lam(x, b)) => {
            if !eta1_redex(x, b, fused) {
                return Err(Error::Other("η1 applied to a non-redex".into()));
            }
            let (chain, core) = strip_lets((**b).clone());
            match core.kind {
                TermKind::App(fun, _) => Ok(wrap_lets(chain, *fun)),
                _ => unreachable!(),
            }
        }
        (
            RuleTag::Eta2,
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            },
        ) => {
            if !eta2_redex(left, right, scrutinee, body, fused) {
                return Err(Error::Other("η2 applied to a non-redex".into()));
            }
            let (chain, _core) = strip_lets((**body).clone());
            Ok(wrap_lets(chain, (**scrutinee).clone()))
        }
        _ => Err(Error::Other("rule does not match term shape".into())),
    }
}

fn apply_redex(t: &Term, redex: &Redex, fused: bool) -> Result<(Term, RewriteStep)> {
    let node = subterm_at(t, &redex.path)
        .ok_or_else(|| Error::Other("redex path no longer valid".into()))?;
    let contracted = contract(node, redex.rule, fused, &syntax::all_names(t))?;
    let step = RewriteStep {
        rule: redex.rule,
        path: redex.path.clone(),
        hole: None,
        span: node.span,
        before: pretty_print(node),
        after: pretty_print(&contracted),
    };
    Ok((replace_at(t, &redex.path, contracted)?, step))
}

/// All one-step β/η reducts of `t` under the context grammar, tagged with
/// the step that produced each.
pub fn step(t: &Term) -> Vec<(RewriteStep, Term)> {
    find_redexes(t, false)
        .iter()
        .filter_map(|r| apply_redex(t, r, false).ok().map(|(nt, s)| (s, nt)))
        .collect()
}

// ---------------------------------------------------------------------------
// Commutative conversion
// ---------------------------------------------------------------------------

/// One-level outward float: the child at `hole` is a let binding whose
/// scope can be widened over this node.
fn float_candidate(t: &Term, hole: PathSeg) -> Option<Term> {
    let child = subterm_at(t, &[hole])?;
    let TermKind::LetPair {
        left,
        right,
        scrutinee,
        body,
    } = &child.kind
    else {
        return None;
    };
    // FV(C[]) ∩ {x,y} = ∅ — side terms must not mention the binders.
    let side_fv: BTreeSet<Name> = match (&t.kind, hole) {
        (TermKind::App(_, a), PathSeg::AppFun) => free_vars(a),
        (TermKind::App(f, _), PathSeg::AppArg) => free_vars(f),
        (TermKind::Pair(_, r), PathSeg::PairLeft) => free_vars(r),
        (TermKind::Pair(l, _), PathSeg::PairRight) => free_vars(l),
        (TermKind::Lam(_, _), PathSeg::LamBody) => BTreeSet::new(),
        (
            TermKind::LetPair {
                left, right, body, ..
            },
            PathSeg::LetScrut,
        ) => {
            let mut fv = free_vars(body);
            fv.remove(left);
            fv.remove(right);
            fv
        }
        _ => return None,
    };
    if side_fv.contains(left) || side_fv.contains(right) {
        return None;
    }
    // CV(C[]) ∩ FV(t) = ∅ — only the lambda hole captures anything.
    if let (TermKind::Lam(x, _), PathSeg::LamBody) = (&t.kind, hole) {
        if free_vars(scrutinee).contains(x) {
            return None;
        }
    }
    let widened = replace_at(t, &[hole], (**body).clone()).ok()?;
    Some(Term::let_pair(
        left.clone(),
        right.clone(),
        (**scrutinee).clone(),
        widened,
    ))
}

const FLOAT_HOLES: [PathSeg; 6] = [
    PathSeg::AppFun,
    PathSeg::AppArg,
    PathSeg::PairLeft,
    PathSeg::PairRight,
    PathSeg::LamBody,
    PathSeg::LetScrut,
];

fn find_float(t: &Term, path: &mut Vec<PathSeg>) -> Option<(Vec<PathSeg>, PathSeg)> {
    for hole in FLOAT_HOLES {
        if float_candidate(t, hole).is_some() {
            return Some((path.clone(), hole));
        }
    }
    let children: Vec<(PathSeg, &Term)> = match &t.kind {
        TermKind::Var(_) => vec![],
        TermKind::Lam(_, b) => vec![(PathSeg::LamBody, b.as_ref())],
        TermKind::App(f, a) => vec![(PathSeg::AppFun, f.as_ref()), (PathSeg::AppArg, a.as_ref())],
        TermKind::Pair(l, r) => vec![
            (PathSeg::PairLeft, l.as_ref()),
            (PathSeg::PairRight, r.as_ref()),
        ],
        TermKind::LetPair {
            scrutinee, body, ..
        } => vec![
            (PathSeg::LetScrut, scrutinee.as_ref()),
            (PathSeg::LetBody, body.as_ref()),
        ],
    };
    for (seg, child) in children {
        path.push(seg);
        if let Some(found) = find_float(child, path) {
            return Some(found);
        }
        path.pop();
    }
    None
}

/// Float every let binding outward as far as the side conditions permit,
/// recording one `c-left` step per one-level move.
pub fn float_out(t: &Term, budget: usize, trace: &mut Vec<RewriteStep>) -> Result<Term> {
    let mut cur = t.clone();
    let mut used = 0usize;
    while let Some((path, hole)) = find_float(&cur, &mut Vec::new()) {
        if used >= budget {
            return Err(Error::BudgetExceeded(budget));
        }
        let node = subterm_at(&cur, &path).unwrap();
        let rotated = float_candidate(node, hole).unwrap();
        trace.push(RewriteStep {
            rule: RuleTag::CommLeft,
            path: path.clone(),
            hole: Some(hole),
            span: node.span,
            before: pretty_print(node),
            after: pretty_print(&rotated),
        });
        cur = replace_at(&cur, &path, rotated)?;
        used += 1;
    }
    Ok(cur)
}

/// All single `<->c` moves on `t` (both directions, under any context),
/// deduplicated up to α.
pub fn comm_step(t: &Term) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    let mut seen = BTreeSet::new();

    fn collect_positions(t: &Term, path: &mut Vec<PathSeg>, out: &mut Vec<Vec<PathSeg>>) {
        out.push(path.clone());
        let children: Vec<(PathSeg, &Term)> = match &t.kind {
            TermKind::Var(_) => vec![],
            TermKind::Lam(_, b) => vec![(PathSeg::LamBody, b.as_ref())],
            TermKind::App(f, a) => {
                vec![(PathSeg::AppFun, f.as_ref()), (PathSeg::AppArg, a.as_ref())]
            }
            TermKind::Pair(l, r) => vec![
                (PathSeg::PairLeft, l.as_ref()),
                (PathSeg::PairRight, r.as_ref()),
            ],
            TermKind::LetPair {
                scrutinee, body, ..
            } => vec![
                (PathSeg::LetScrut, scrutinee.as_ref()),
                (PathSeg::LetBody, body.as_ref()),
            ],
        };
        for (seg, child) in children {
            path.push(seg);
            collect_positions(child, path, out);
            path.pop();
        }
    }
    let mut positions: Vec<Vec<PathSeg>> = Vec::new();
    collect_positions(t, &mut Vec::new(), &mut positions);

    let t_key = canonical_key(t);
    let mut push = |candidate: Term, out: &mut Vec<Term>| {
        let key = canonical_key(&candidate);
        if key != t_key && seen.insert(key) {
            out.push(candidate);
        }
    };

    for outer in &positions {
        let Some(node) = subterm_at(t, outer) else {
            continue;
        };
        // Outward: node = C[let (x,y)=s in u] with the let strictly below.
        for inner in &positions {
            if inner.len() <= outer.len() || !inner.starts_with(outer) {
                continue;
            }
            let rel = &inner[outer.len()..];
            let Some(let_node) = subterm_at(node, rel) else {
                continue;
            };
            let TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } = &let_node.kind
            else {
                continue;
            };
            let Some(ctx) = context_between(node, rel) else {
                continue;
            };
            let cv = ctx.captured_vars();
            let fv_ctx = ctx.free_vars();
            if fv_ctx.contains(left) || fv_ctx.contains(right) {
                continue;
            }
            if free_vars(scrutinee).iter().any(|v| cv.contains(v)) {
                continue;
            }
            if cv.contains(left) || cv.contains(right) {
                // A clashing binder on the path would change scoping.
                continue;
            }
            let Ok(widened) = replace_at(node, rel, (**body).clone()) else {
                continue;
            };
            let replaced =
                Term::let_pair(left.clone(), right.clone(), (**scrutinee).clone(), widened);
            if let Ok(candidate) = replace_at(t, outer, replaced) {
                push(candidate, &mut out);
            }
        }
        // Inward: node = let (x,y)=s in C[u]; sink the binding to any
        // position inside the body.
        let TermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } = &node.kind
        else {
            continue;
        };
        let mut body_positions = Vec::new();
        collect_positions(body, &mut Vec::new(), &mut body_positions);
        for rel in &body_positions {
            if rel.is_empty() {
                continue;
            }
            let Some(target) = subterm_at(body, rel) else {
                continue;
            };
            let Some(ctx) = context_between(body, rel) else {
                continue;
            };
            let cv = ctx.captured_vars();
            let fv_ctx = ctx.free_vars();
            if fv_ctx.contains(left) || fv_ctx.contains(right) {
                continue;
            }
            if free_vars(scrutinee).iter().any(|v| cv.contains(v)) {
                continue;
            }
            let rebound = Term::let_pair(
                left.clone(),
                right.clone(),
                (**scrutinee).clone(),
                target.clone(),
            );
            let Ok(new_body) = replace_at(body, rel, rebound) else {
                continue;
            };
            let moved = replace_at(t, outer, new_body);
            if let Ok(candidate) = moved {
                push(candidate, &mut out);
            }
        }
    }
    out
}

/// The one-hole context between a term and the position `path` inside it.
fn context_between(t: &Term, path: &[PathSeg]) -> Option<syntax::Context> {
    let mut frames = Vec::new();
    let mut cur = t;
    for seg in path {
        let frame = match (&cur.kind, seg) {
            (TermKind::App(f, a), PathSeg::AppFun) => {
                let fr = syntax::ContextFrame::AppFun { arg: (**a).clone() };
                cur = f;
                fr
            }
            (TermKind::App(f, a), PathSeg::AppArg) => {
                let fr = syntax::ContextFrame::AppArg { fun: (**f).clone() };
                cur = a;
                fr
            }
            (TermKind::Pair(l, r), PathSeg::PairLeft) => {
                let fr = syntax::ContextFrame::PairLeft {
                    right: (**r).clone(),
                };
                cur = l;
                fr
            }
            (TermKind::Pair(l, r), PathSeg::PairRight) => {
                let fr = syntax::ContextFrame::PairRight { left: (**l).clone() };
                cur = r;
                fr
            }
            (TermKind::Lam(x, b), PathSeg::LamBody) => {
                let fr = syntax::ContextFrame::LamBody { binder: x.clone() };
                cur = b;
                fr
            }
            (
                TermKind::LetPair {
                    left,
                    right,
                    scrutinee,
                    body,
                },
                PathSeg::LetScrut,
            ) => {
                let fr = syntax::ContextFrame::LetScrutinee {
                    left: left.clone(),
                    right: right.clone(),
                    body: (**body).clone(),
                };
                cur = scrutinee;
                fr
            }
            (
                TermKind::LetPair {
                    left,
                    right,
                    scrutinee,
                    body,
                },
                PathSeg::LetBody,
            ) => {
                let fr = syntax::ContextFrame::LetBody {
                    left: left.clone(),
                    right: right.clone(),
                    scrutinee: (**scrutinee).clone(),
                };
                cur = body;
                fr
            }
            _ => return None,
        };
        frames.push(frame);
    }
    Some(syntax::Context { frames })
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Redex selection order for a maximal reduction.
#[derive(Debug, Clone, Copy)]
pub enum Strategy {
    /// First redex in preorder: deterministic, used for traces.
    LeftmostOutermost,
    /// First redex with no redex strictly inside it.
    LeftmostInnermost,
    /// Uniformly random redex at each step.
    Seeded(u64),
}

fn pick_redex<'a>(redexes: &'a [Redex], strategy: &Strategy, rng: &mut ChaCha8Rng) -> &'a Redex {
    match strategy {
        Strategy::LeftmostOutermost => &redexes[0],
        Strategy::LeftmostInnermost => redexes
            .iter()
            .find(|r| {
                !redexes
                    .iter()
                    .any(|other| other.path.len() > r.path.len() && other.path.starts_with(&r.path))
            })
            .unwrap_or(&redexes[0]),
        Strategy::Seeded(_) => &redexes[rng.gen_range(0..redexes.len())],
    }
}

/// Normalize under `→βηc` with an explicit strategy and budget, returning
/// the normal form and the trace.
pub fn normalize_with(
    t: &Term,
    strategy: Strategy,
    budget: usize,
) -> Result<(Term, Vec<RewriteStep>)> {
    syntax::require_linear(t)?;
    types::infer_principal_type(t)
        .map_err(|e| Error::Untypable(format!("normalize requires a typable term: {e}")))?;
    let mut rng = match strategy {
        Strategy::Seeded(seed) => ChaCha8Rng::seed_from_u64(seed),
        _ => ChaCha8Rng::seed_from_u64(0),
    };
    let mut trace = Vec::new();
    let mut cur = t.clone();
    let mut used = 0usize;
    loop {
        let before = trace.len();
        cur = float_out(&cur, budget.saturating_sub(used), &mut trace)?;
        used += trace.len() - before;
        let redexes = find_redexes(&cur, true);
        if redexes.is_empty() {
            return Ok((cur, trace));
        }
        if used >= budget {
            return Err(Error::BudgetExceeded(budget));
        }
        let redex = pick_redex(&redexes, &strategy, &mut rng).clone();
        let (next, step) = apply_redex(&cur, &redex, true)?;
        trace.push(step);
        cur = next;
        used += 1;
    }
}

/// Normalize to a `→βηc`-normal form (unique up to `=c`).
pub fn normalize(t: &Term) -> Result<Term> {
    normalize_with(t, Strategy::LeftmostOutermost, step_budget()).map(|(t, _)| t)
}

/// Normalize and report the trace.
pub fn normalize_traced(t: &Term) -> Result<(Term, Vec<RewriteStep>)> {
    normalize_with(t, Strategy::LeftmostOutermost, step_budget())
}

/// Replay recorded steps from `t`.
pub fn replay(t: &Term, steps: &[RewriteStep]) -> Result<Term> {
    let mut cur = t.clone();
    for s in steps {
        match s.rule {
            RuleTag::CommLeft => {
                let node = subterm_at(&cur, &s.path)
                    .ok_or_else(|| Error::Other("stale path in trace".into()))?;
                let hole = s
                    .hole
                    .ok_or_else(|| Error::Other("c-move without hole".into()))?;
                let rotated = float_candidate(node, hole)
                    .ok_or_else(|| Error::Other("stale c-move in trace".into()))?;
                cur = replace_at(&cur, &s.path, rotated)?;
            }
            RuleTag::CommRight => {
                return Err(Error::Other(
                    "c-right steps are not produced by traces".into(),
                ))
            }
            rule => {
                let redex = Redex {
                    rule,
                    path: s.path.clone(),
                };
                cur = apply_redex(&cur, &redex, true)?.0;
            }
        }
    }
    Ok(cur)
}

/// Is the term `→βηc`-normal?
pub fn is_normal(t: &Term) -> Result<bool> {
    let floated = float_out(t, step_budget(), &mut Vec::new())?;
    Ok(find_redexes(&floated, true).is_empty())
}

// ---------------------------------------------------------------------------
// Canonical =c representative
// ---------------------------------------------------------------------------

/// Canonical representative of a term's `=c`-class: every let binding is
/// floated outward as far as the side conditions permit and maximal runs
/// of mutually independent bindings are put into a canonical order.
/// Idempotent; on `→βηc`-normal inputs two `=c`-equal terms canonicalize
/// to α-equal results (cross-checked against the proof-net oracle).
pub fn canonicalize_c(t: &Term) -> Term {
    let floated = float_out(t, step_budget(), &mut Vec::new()).unwrap_or_else(|_| t.clone());
    canon(&floated)
}

fn canon(t: &Term) -> Term {
    let (chain, core) = strip_lets(t.clone());
    if chain.is_empty() {
        return canon_node(t);
    }
    let chain: Vec<LetBinding> = chain
        .into_iter()
        .map(|l| LetBinding {
            left: l.left,
            right: l.right,
            scrutinee: canon(&l.scrutinee),
        })
        .collect();
    let core = canon_node(&core);
    // Dependency: a binding depends on an earlier one when its scrutinee
    // uses the earlier binders.
    let n = chain.len();
    let mut deps = vec![vec![false; n]; n];
    for j in 0..n {
        let fv = free_vars(&chain[j].scrutinee);
        for (i, li) in chain.iter().enumerate().take(j) {
            if fv.contains(&li.left) || fv.contains(&li.right) {
                deps[j][i] = true;
            }
        }
    }
    if n > 7 {
        // Permutation search is factorial; beyond desk scale keep the
        // floated order.
        return wrap_lets(chain, core);
    }
    fn search(
        chain: &[LetBinding],
        core: &Term,
        deps: &[Vec<bool>],
        order: &mut Vec<usize>,
        used: &mut [bool],
        best: &mut Option<(String, Term)>,
    ) {
        let n = chain.len();
        if order.len() == n {
            let candidate = wrap_lets(
                order.iter().map(|&i| chain[i].clone()).collect(),
                core.clone(),
            );
            let key = canonical_key(&candidate);
            match best {
                Some((bk, _)) if *bk <= key => {}
                _ => *best = Some((key, candidate)),
            }
            return;
        }
        for i in 0..n {
            if used[i] {
                continue;
            }
            if (0..n).any(|k| deps[i][k] && !used[k]) {
                continue;
            }
            used[i] = true;
            order.push(i);
            search(chain, core, deps, order, used, best);
            order.pop();
            used[i] = false;
        }
    }
    let mut best: Option<(String, Term)> = None;
    search(
        &chain,
        &core,
        &deps,
        &mut Vec::new(),
        &mut vec![false; n],
        &mut best,
    );
    best.map(|(_, t)| t)
        .unwrap_or_else(|| wrap_lets(chain, core))
}

fn canon_node(t: &Term) -> Term {
    let kind = match &t.kind {
        TermKind::Var(x) => TermKind::Var(x.clone()),
        TermKind::Lam(x, b) => TermKind::Lam(x.clone(), Box::new(canon(b))),
        TermKind::App(f, a) => TermKind::App(Box::new(canon(f)), Box::new(canon(a))),
        TermKind::Pair(l, r) => TermKind::Pair(Box::new(canon(l)), Box::new(canon(r))),
        TermKind::LetPair { .. } => return t.clone(), // handled by canon()
    };
    Term { kind, span: t.span }
}

// ---------------------------------------------------------------------------
// Equality
// ---------------------------------------------------------------------------

/// The canonicalized normal form used to decide `=βηc`.
pub fn canonical_normal_form(t: &Term) -> Result<Term> {
    Ok(canonicalize_c(&normalize(t)?))
}

/// Decide `t1 =βηc t2` for closed, linear terms typable at a common type.
pub fn equal_beta_eta_c(t1: &Term, t2: &Term) -> Result<bool> {
    let a = types::principal_type_closed(t1)?;
    let b = types::principal_type_closed(t2)?;
    let b_renamed = types::prefix_rename(&b, "r.");
    if types::unify(&a, &b_renamed).is_err() {
        return Err(Error::TypeMismatch {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    Ok(alpha_eq(
        &canonical_normal_form(t1)?,
        &canonical_normal_form(t2)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{elaborate, parse_program, parse_term};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn appendix_hm() -> syntax::ElaboratedProgram {
        let src = "fun True x y z = z x y;\
                   fun False x y z = z y x;\
                   fun I x = x;\
                   fun u_2 x1 x2 = x1 (x2 I);\
                   fun u_3 x1 x2 x3 = x1 (x2 (x3 I));\
                   fun proj_1 x1 x2 = x2 I I u_2 x1;\
                   fun Not_HM x = x False True proj_1;\
                   fun erase_3 p = p I I I;";
        elaborate(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn beta1_step() {
        let reducts = step(&p("(fn x=>x) y"));
        assert_eq!(reducts.len(), 1);
        assert!(alpha_eq(&reducts[0].1, &p("y")));
        assert_eq!(reducts[0].0.rule, RuleTag::Beta1);
    }

    #[test]
    fn beta2_step() {
        let reducts = step(&p("let val (x,y)=(u,v) in (y,x) end"));
        assert_eq!(reducts.len(), 1);
        assert!(alpha_eq(&reducts[0].1, &p("(v,u)")));
    }

    #[test]
    fn eta1_step() {
        let reducts = step(&p("fn x=>t x"));
        assert_eq!(reducts.len(), 1);
        assert!(alpha_eq(&reducts[0].1, &p("t")));
        assert!(step(&p("fn x=>x x")).is_empty());
    }

    #[test]
    fn eta2_step() {
        let reducts = step(&p("let val (x,y)=t in (x,y) end"));
        assert_eq!(reducts.len(), 1);
        assert!(alpha_eq(&reducts[0].1, &p("t")));
        assert!(step(&p("let val (x,y)=t in (y,x) end")).is_empty());
    }

    #[test]
    fn normal_term_has_no_steps() {
        assert!(step(&p("fn x=>fn y=>fn z=>z x y")).is_empty());
    }

    #[test]
    fn comm_step_moves_let_out_of_application() {
        let t = p("f (let val (x,y)=p in t end)");
        let neighbors = comm_step(&t);
        assert!(neighbors
            .iter()
            .any(|n| alpha_eq(n, &p("let val (x,y)=p in f t end"))));
    }

    #[test]
    fn comm_step_respects_capture_condition() {
        // Moving the let past `fn w` would free the scrutinee's w.
        let t = p("fn w=>(let val (x,y)=w in (x,y) end) z");
        for n in comm_step(&t) {
            assert!(!matches!(&n.kind, TermKind::LetPair { .. }), "bad move {n}");
        }
    }

    #[test]
    fn comm_step_is_symmetric() {
        for src in [
            "f (let val (x,y)=p in t end)",
            "let val (x,y)=p in (f t, x y) end",
            "(let val (a,b)=p in a b end, c)",
            "fn q=>let val (x,y)=q in x y end",
        ] {
            let t = p(src);
            for n in comm_step(&t) {
                let back = comm_step(&n);
                assert!(
                    back.iter().any(|m| alpha_eq(m, &t)),
                    "no way back from {n} to {t}"
                );
            }
        }
    }

    #[test]
    fn normalize_not_gate() {
        let prog = appendix_hm();
        let not_hm = prog.get("Not_HM").unwrap();
        let tru = prog.get("True").unwrap();
        let fls = prog.get("False").unwrap();
        let nf = normalize(&syntax::apply_terms(not_hm, &[tru.clone()])).unwrap();
        assert!(alpha_eq(&nf, fls), "got {nf}");
        let nf2 = normalize(&syntax::apply_terms(not_hm, &[fls.clone()])).unwrap();
        assert!(alpha_eq(&nf2, tru), "got {nf2}");
    }

    #[test]
    fn normalize_erase_gate() {
        let prog = appendix_hm();
        let erase = prog.get("erase_3").unwrap();
        let tru = prog.get("True").unwrap();
        let i = prog.get("I").unwrap();
        let nf = normalize(&syntax::apply_terms(erase, &[tru.clone()])).unwrap();
        assert!(alpha_eq(&nf, i), "got {nf}");
    }

    #[test]
    fn normalize_already_normal() {
        let t = p("fn x=>fn y=>fn z=>z x y");
        assert!(alpha_eq(&normalize(&t).unwrap(), &t));
    }

    #[test]
    fn eta_through_independent_lets() {
        let t = p(
            "fn q=>let val (x,y)=q in let val (a,b)=(fn w=>w,fn w'=>w') in (x (a b),y) end end",
        );
        let nf = normalize(&t).unwrap();
        assert!(syntax::linearity_check(&nf).is_ok());
        assert!(is_normal(&nf).unwrap());
    }

    #[test]
    fn trace_replays() {
        let prog = appendix_hm();
        let term = syntax::apply_terms(
            prog.get("Not_HM").unwrap(),
            &[prog.get("True").unwrap().clone()],
        );
        let (nf, steps) = normalize_traced(&term).unwrap();
        let replayed = replay(&term, &steps).unwrap();
        assert!(alpha_eq(&nf, &replayed));
    }

    #[test]
    fn canonicalize_is_idempotent_and_merges_placements() {
        let t = p("f (let val (x,y)=p in t end)");
        for n in comm_step(&t) {
            let a = canonicalize_c(&t);
            let b = canonicalize_c(&n);
            assert!(alpha_eq(&a, &b), "{a} vs {b}");
        }
        let c = canonicalize_c(&t);
        assert!(alpha_eq(&c, &canonicalize_c(&c)));
    }

    #[test]
    fn canonicalize_no_lets_unchanged() {
        let t = p("fn x=>fn y=>fn z=>z x y");
        assert!(alpha_eq(&canonicalize_c(&t), &t));
    }

    #[test]
    fn equality_examples() {
        let prog = appendix_hm();
        let not_hm = prog.get("Not_HM").unwrap();
        let tru = prog.get("True").unwrap();
        let fls = prog.get("False").unwrap();
        let double_not =
            syntax::apply_terms(not_hm, &[syntax::apply_terms(not_hm, &[tru.clone()])]);
        assert!(equal_beta_eta_c(&double_not, tru).unwrap());
        assert!(!equal_beta_eta_c(tru, fls).unwrap());
        assert!(equal_beta_eta_c(tru, tru).unwrap());
    }

    #[test]
    fn subject_reduction_along_trace() {
        let prog = appendix_hm();
        let term = syntax::apply_terms(
            prog.get("Not_HM").unwrap(),
            &[prog.get("True").unwrap().clone()],
        );
        let ty = types::principal_type_closed(&term).unwrap();
        let (_, steps) = normalize_traced(&term).unwrap();
        let mut cur = term.clone();
        for s in &steps {
            cur = replay(&cur, std::slice::from_ref(s)).unwrap();
            assert!(
                types::check_typing(&types::TypeContext::empty(), &cur, &ty),
                "type not preserved after {s}"
            );
        }
    }

    #[test]
    fn budget_error_reported() {
        let prog = appendix_hm();
        let term = syntax::apply_terms(
            prog.get("Not_HM").unwrap(),
            &[prog.get("True").unwrap().clone()],
        );
        assert!(matches!(
            normalize_with(&term, Strategy::LeftmostOutermost, 2),
            Err(Error::BudgetExceeded(_))
        ));
    }
}

//! Type syntax, unification, principal-type inference, the implicational
//! order, and poly-type certificates.
//!
//! Types are type variables, tensor products and linear implications.
//! Inference is syntax-directed constraint generation over the linear
//! typing rules followed by Robinson unification; principal types are
//! normalized by renaming type variables in first-occurrence order so
//! printed types are deterministic.
//!
//! A `PolyTypeCertificate` witnesses the liberalized typing judgment: a
//! closed term `t` counts as having `A1 -> ... -> An -> B` with respect to
//! closed arguments `s1..sn` when one substitution maps the principal type
//! of `t` onto `A''1 -> ... -> A''n -> B` and each `PT(si)` onto `A''i`.
//! This is strictly weaker than plain typability but still guarantees that
//! the application `t s1 ... sn` is plainly typable at `B`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::{self, Name, Term, TermKind};
use crate::{Error, Result};

/// Type syntax: variables, tensor product, linear implication.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Var(Name),
    Tensor(Box<Type>, Box<Type>),
    Lolli(Box<Type>, Box<Type>),
}

impl Type {
    pub fn var(name: impl Into<Name>) -> Self {
        Type::Var(name.into())
    }

    pub fn tensor(a: Type, b: Type) -> Self {
        Type::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: Type, b: Type) -> Self {
        Type::Lolli(Box::new(a), Box::new(b))
    }

    /// `arrows([A1,..,An], B)` builds `A1 -> ... -> An -> B`.
    pub fn arrows(args: impl IntoIterator<Item = Type>, result: Type) -> Self {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(result, |acc, a| Type::lolli(a, acc))
    }

    /// Splits `A1 -> ... -> An -> R` into (`[A1..An]`, `R`) where `R` is
    /// not an implication.
    pub fn split_arrows(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Type::Lolli(a, b) = cur {
            args.push(a.as_ref());
            cur = b;
        }
        (args, cur)
    }

    /// Splits off exactly `n` leading arrows, if present.
    pub fn split_n_arrows(&self, n: usize) -> Option<(Vec<&Type>, &Type)> {
        let mut args = Vec::new();
        let mut cur = self;
        for _ in 0..n {
            match cur {
                Type::Lolli(a, b) => {
                    args.push(a.as_ref());
                    cur = b;
                }
                _ => return None,
            }
        }
        Some((args, cur))
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fn walk(t: &Type, out: &mut BTreeSet<Name>) {
            match t {
                Type::Var(v) => {
                    out.insert(v.clone());
                }
                Type::Tensor(a, b) | Type::Lolli(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn contains_tensor(&self) -> bool {
        match self {
            Type::Var(_) => false,
            Type::Tensor(_, _) => true,
            Type::Lolli(a, b) => a.contains_tensor() || b.contains_tensor(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) => 1,
            Type::Tensor(a, b) | Type::Lolli(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `*` binds tighter than `->`; `->` is right-associative and `*`
        // left-associative.
        fn go(t: &Type, prec: u8, out: &mut String) {
            match t {
                Type::Var(v) => {
                    out.push('\'');
                    out.push_str(v);
                }
                Type::Tensor(a, b) => {
                    let parens = prec > 1;
                    if parens {
                        out.push('(');
                    }
                    go(a, 1, out);
                    out.push_str(" * ");
                    go(b, 2, out);
                    if parens {
                        out.push(')');
                    }
                }
                Type::Lolli(a, b) => {
                    let parens = prec > 0;
                    if parens {
                        out.push('(');
                    }
                    go(a, 1, out);
                    out.push_str(" -> ");
                    go(b, 0, out);
                    if parens {
                        out.push(')');
                    }
                }
            }
        }
        let mut s = String::new();
        go(self, 0, &mut s);
        write!(f, "{s}")
    }
}

/// Parse a type in the grammar `A ::= 'ident | A * A | A -> A`.
pub fn parse_type(text: &str) -> Result<Type> {
    let toks = syntax::lex(text)?;
    let mut pos = 0;
    let ty = parse_arrow(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err(Error::Parse {
            message: "trailing input after type".into(),
            span: toks.get(pos).map(|t| t.span),
        });
    }
    Ok(ty)
}

fn parse_arrow(toks: &[syntax::SpannedTok], pos: &mut usize) -> Result<Type> {
    let lhs = parse_star(toks, pos)?;
    if matches!(toks.get(*pos).map(|t| &t.tok), Some(syntax::Tok::Arrow)) {
        *pos += 1;
        let rhs = parse_arrow(toks, pos)?;
        Ok(Type::lolli(lhs, rhs))
    } else {
        Ok(lhs)
    }
}

fn parse_star(toks: &[syntax::SpannedTok], pos: &mut usize) -> Result<Type> {
    let mut lhs = parse_ty_atom(toks, pos)?;
    while matches!(toks.get(*pos).map(|t| &t.tok), Some(syntax::Tok::Star)) {
        *pos += 1;
        let rhs = parse_ty_atom(toks, pos)?;
        lhs = Type::tensor(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_ty_atom(toks: &[syntax::SpannedTok], pos: &mut usize) -> Result<Type> {
    match toks.get(*pos).map(|t| t.tok.clone()) {
        Some(syntax::Tok::TyVar(v)) => {
            *pos += 1;
            Ok(Type::var(v))
        }
        Some(syntax::Tok::LParen) => {
            *pos += 1;
            let t = parse_arrow(toks, pos)?;
            match toks.get(*pos).map(|t| &t.tok) {
                Some(syntax::Tok::RParen) => {
                    *pos += 1;
                    Ok(t)
                }
                _ => Err(Error::Parse {
                    message: "expected `)`".into(),
                    span: toks.get(*pos).map(|t| t.span),
                }),
            }
        }
        _ => Err(Error::Parse {
            message: "expected a type".into(),
            span: toks.get(*pos).map(|t| t.span),
        }),
    }
}

/// The Boolean type 'a -> 'a -> ('a -> 'a -> 'a) -> 'a.
pub fn bool_hm() -> Type {
    parse_type("'a -> 'a -> ('a -> 'a -> 'a) -> 'a").unwrap()
}

/// The Boolean type 'a -> ('a -> 'a) -> ('a -> 'a) -> 'a.
pub fn bool_seq() -> Type {
    parse_type("'a -> ('a -> 'a) -> ('a -> 'a) -> 'a").unwrap()
}

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

/// A finite map from type-variable names to types, kept idempotent: no
/// variable in the domain occurs in the range.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeSubstitution {
    map: BTreeMap<Name, Type>,
}

impl TypeSubstitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: impl Into<Name>, t: Type) -> Self {
        let mut map = BTreeMap::new();
        map.insert(v.into(), t);
        TypeSubstitution { map }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: &str) -> Option<&Type> {
        self.map.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Type)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Type) -> Type {
        match t {
            Type::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Type::Tensor(a, b) => Type::tensor(self.apply(a), self.apply(b)),
            Type::Lolli(a, b) => Type::lolli(self.apply(a), self.apply(b)),
        }
    }

    pub fn apply_ctx(&self, ctx: &TypeContext) -> TypeContext {
        TypeContext(
            ctx.0
                .iter()
                .map(|(x, t)| (x.clone(), self.apply(t)))
                .collect(),
        )
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &TypeSubstitution) -> TypeSubstitution {
        let mut map: BTreeMap<Name, Type> = other
            .map
            .iter()
            .map(|(v, t)| (v.clone(), self.apply(t)))
            .collect();
        for (v, t) in &self.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        map.retain(|v, t| !matches!(t, Type::Var(w) if w == v));
        TypeSubstitution { map }
    }
}

impl fmt::Display for TypeSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .map
            .iter()
            .map(|(v, t)| format!("'{v} := {t}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Ordered linear typing context; each variable occurs at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeContext(pub Vec<(Name, Type)>);

impl TypeContext {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.iter().find(|(n, _)| n == x).map(|(_, t)| t)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TypeContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(x, t)| format!("{x}:{t}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// Unification and matching
// ---------------------------------------------------------------------------

fn occurs(v: &str, t: &Type, map: &BTreeMap<Name, Type>) -> bool {
    match t {
        Type::Var(w) => {
            if w == v {
                return true;
            }
            match map.get(w) {
                Some(bound) => occurs(v, bound, map),
                None => false,
            }
        }
        Type::Tensor(a, b) | Type::Lolli(a, b) => occurs(v, a, map) || occurs(v, b, map),
    }
}

fn walk<'a>(t: &'a Type, map: &'a BTreeMap<Name, Type>) -> &'a Type {
    match t {
        Type::Var(v) => match map.get(v) {
            Some(bound) => walk(bound, map),
            None => t,
        },
        _ => t,
    }
}

/// Most general unifier of `a` and `b`; variables in `frozen` behave as
/// rigid constants and may only unify with themselves.
pub fn unify_frozen(a: &Type, b: &Type, frozen: &BTreeSet<Name>) -> Result<TypeSubstitution> {
    let mut map: BTreeMap<Name, Type> = BTreeMap::new();
    let mut work = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = work.pop() {
        let x = walk(&x, &map).clone();
        let y = walk(&y, &map).clone();
        match (x, y) {
            (Type::Var(v), Type::Var(w)) if v == w => {}
            (Type::Var(v), t) | (t, Type::Var(v)) if !frozen.contains(&v) => {
                if occurs(&v, &t, &map) {
                    return Err(Error::OccursCheck {
                        var: v,
                        ty: t.to_string(),
                    });
                }
                map.insert(v, t);
            }
            (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) => {
                work.push((*a1, *b1));
                work.push((*a2, *b2));
            }
            (Type::Lolli(a1, a2), Type::Lolli(b1, b2)) => {
                work.push((*a1, *b1));
                work.push((*a2, *b2));
            }
            (x, y) => {
                return Err(Error::TypeMismatch {
                    left: x.to_string(),
                    right: y.to_string(),
                })
            }
        }
    }
    // Resolve chains so the substitution is idempotent.
    let mut subst = TypeSubstitution { map };
    loop {
        let next = TypeSubstitution {
            map: subst
                .map
                .iter()
                .map(|(k, v)| (k.clone(), subst.apply(v)))
                .collect(),
        };
        if next == subst {
            break;
        }
        subst = next;
    }
    Ok(subst)
}

/// Most general unifier: `θ(a) = θ(b)`.
pub fn unify(a: &Type, b: &Type) -> Result<TypeSubstitution> {
    unify_frozen(a, b, &BTreeSet::new())
}

/// One-sided matching: `Some(θ)` with `θ(general) = specific`, else `None`.
pub fn instance_of(specific: &Type, general: &Type) -> Option<TypeSubstitution> {
    let mut map: BTreeMap<Name, Type> = BTreeMap::new();
    if match_into(general, specific, &mut map) {
        Some(TypeSubstitution { map })
    } else {
        None
    }
}

fn match_into(pattern: &Type, target: &Type, map: &mut BTreeMap<Name, Type>) -> bool {
    match (pattern, target) {
        (Type::Var(v), t) => match map.get(v) {
            Some(prev) => prev == t,
            None => {
                map.insert(v.clone(), t.clone());
                true
            }
        },
        (Type::Tensor(a1, a2), Type::Tensor(b1, b2))
        | (Type::Lolli(a1, a2), Type::Lolli(b1, b2)) => {
            match_into(a1, b1, map) && match_into(a2, b2, map)
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Principal type inference
// ---------------------------------------------------------------------------

struct Inferencer {
    supply: u32,
    subst: TypeSubstitution,
}

impl Inferencer {
    fn new() -> Self {
        Inferencer {
            supply: 0,
            subst: TypeSubstitution::new(),
        }
    }

    fn fresh(&mut self) -> Type {
        let v = Type::var(format!("?{}", self.supply));
        self.supply += 1;
        v
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<()> {
        let s = unify(&self.subst.apply(a), &self.subst.apply(b))?;
        self.subst = s.compose(&self.subst);
        Ok(())
    }

    fn infer(&mut self, t: &Term) -> Result<(Vec<(Name, Type)>, Type)> {
        match &t.kind {
            TermKind::Var(x) => {
                let v = self.fresh();
                Ok((vec![(x.clone(), v.clone())], v))
            }
            TermKind::Lam(x, body) => {
                let (mut ctx, tb) = self.infer(body)?;
                let pos = ctx.iter().position(|(n, _)| n == x).ok_or_else(|| {
                    Error::Untypable(format!("binder `{x}` unused (term is not linear)"))
                })?;
                let (_, tx) = ctx.remove(pos);
                Ok((ctx, Type::lolli(tx, tb)))
            }
            TermKind::App(f, a) => {
                let (ctx_f, tf) = self.infer(f)?;
                let (ctx_a, ta) = self.infer(a)?;
                check_disjoint(&ctx_f, &ctx_a)?;
                let r = self.fresh();
                self.unify(&tf, &Type::lolli(ta, r.clone()))?;
                let mut ctx = ctx_f;
                ctx.extend(ctx_a);
                Ok((ctx, r))
            }
            TermKind::Pair(l, r) => {
                let (ctx_l, tl) = self.infer(l)?;
                let (ctx_r, tr) = self.infer(r)?;
                check_disjoint(&ctx_l, &ctx_r)?;
                let mut ctx = ctx_l;
                ctx.extend(ctx_r);
                Ok((ctx, Type::tensor(tl, tr)))
            }
            TermKind::LetPair {
                left,
                right,
                scrutinee,
                body,
            } => {
                let (ctx_s, ts) = self.infer(scrutinee)?;
                let p = self.fresh();
                let q = self.fresh();
                self.unify(&ts, &Type::tensor(p.clone(), q.clone()))?;
                let (mut ctx_b, tb) = self.infer(body)?;
                for (binder, component) in [(left, &p), (right, &q)] {
                    let pos = ctx_b.iter().position(|(n, _)| n == binder).ok_or_else(|| {
                        Error::Untypable(format!(
                            "let binder `{binder}` unused (term is not linear)"
                        ))
                    })?;
                    let (_, tx) = ctx_b.remove(pos);
                    self.unify(&tx, component)?;
                }
                check_disjoint(&ctx_s, &ctx_b)?;
                let mut ctx = ctx_s;
                ctx.extend(ctx_b);
                Ok((ctx, tb))
            }
        }
    }
}

fn check_disjoint(a: &[(Name, Type)], b: &[(Name, Type)]) -> Result<()> {
    for (n, _) in a {
        if b.iter().any(|(m, _)| m == n) {
            return Err(Error::Untypable(format!(
                "`{n}` is used twice (term is not linear)"
            )));
        }
    }
    Ok(())
}

fn canonical_var_name(i: usize) -> Name {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("t{i}")
    }
}

/// Rename variables of the given types in first-occurrence order to
/// 'a, 'b, 'c, ...  The same map is applied to every type in the slice.
pub fn canonical_renaming(types: &[&Type]) -> TypeSubstitution {
    let mut map: BTreeMap<Name, Type> = BTreeMap::new();
    let mut count = 0usize;
    fn visit(t: &Type, map: &mut BTreeMap<Name, Type>, count: &mut usize) {
        match t {
            Type::Var(v) => {
                if !map.contains_key(v) {
                    map.insert(v.clone(), Type::var(canonical_var_name(*count)));
                    *count += 1;
                }
            }
            Type::Tensor(a, b) | Type::Lolli(a, b) => {
                visit(a, map, count);
                visit(b, map, count);
            }
        }
    }
    for t in types {
        visit(t, &mut map, &mut count);
    }
    TypeSubstitution { map }
}

/// Principal typing of a linear term: the context covers exactly the free
/// variables (in first-use order) and every derivable typing is an
/// instance of the result.
pub fn infer_principal_type(t: &Term) -> Result<(TypeContext, Type)> {
    syntax::require_linear(t)?;
    let mut inf = Inferencer::new();
    let (ctx, ty) = inf.infer(t)?;
    let ctx: Vec<(Name, Type)> = ctx
        .into_iter()
        .map(|(x, t)| (x, inf.subst.apply(&t)))
        .collect();
    let ty = inf.subst.apply(&ty);
    let mut all: Vec<&Type> = ctx.iter().map(|(_, t)| t).collect();
    all.push(&ty);
    let ren = canonical_renaming(&all);
    let ctx = TypeContext(
        ctx.iter()
            .map(|(x, t)| (x.clone(), ren.apply(t)))
            .collect(),
    );
    Ok((ctx, ren.apply(&ty)))
}

/// Principal type of a closed linear term.
pub fn principal_type_closed(t: &Term) -> Result<Type> {
    let (ctx, ty) = infer_principal_type(t)?;
    if !ctx.is_empty() {
        return Err(Error::Untypable(format!(
            "term is not closed: free variables {ctx}"
        )));
    }
    Ok(ty)
}

/// Is `ctx ⊢ t : a` derivable?  Decided as an instance check against the
/// principal typing.  Total: untypable terms simply yield `false`.
pub fn check_typing(ctx: &TypeContext, t: &Term, a: &Type) -> bool {
    let Ok((pctx, pty)) = infer_principal_type(t) else {
        return false;
    };
    if pctx.0.len() != ctx.0.len() {
        return false;
    }
    let mut map: BTreeMap<Name, Type> = BTreeMap::new();
    if !match_into(&pty, a, &mut map) {
        return false;
    }
    for (x, pt) in &pctx.0 {
        let Some(target) = ctx.lookup(x) else {
            return false;
        };
        if !match_into(pt, target, &mut map) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Typed terms (internal): every node annotated with its type
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) enum TypedTermKind {
    Var(Name),
    Lam(Name, Box<TypedTerm>),
    App(Box<TypedTerm>, Box<TypedTerm>),
    Pair(Box<TypedTerm>, Box<TypedTerm>),
    LetPair {
        left: Name,
        right: Name,
        scrutinee: Box<TypedTerm>,
        body: Box<TypedTerm>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct TypedTerm {
    pub kind: TypedTermKind,
    pub ty: Type,
}

/// Annotate every node of a closed term with its type under the principal
/// typing.
pub(crate) fn annotate(t: &Term) -> Result<TypedTerm> {
    syntax::require_linear(t)?;
    let mut inf = Inferencer::new();
    let (ctx, raw) = infer_raw_typed(&mut inf, t)?;
    if !ctx.is_empty() {
        return Err(Error::Untypable(format!(
            "term is not closed: free variable `{}`",
            ctx[0].0
        )));
    }
    let resolved = apply_typed(&inf.subst, &raw);
    let mut tys = Vec::new();
    collect_types(&resolved, &mut tys);
    let refs: Vec<&Type> = tys.iter().collect();
    let ren = canonical_renaming(&refs);
    Ok(apply_typed(&ren, &resolved))
}

fn infer_raw_typed(inf: &mut Inferencer, t: &Term) -> Result<(Vec<(Name, Type)>, TypedTerm)> {
    match &t.kind {
        TermKind::Var(x) => {
            let v = inf.fresh();
            Ok((
                vec![(x.clone(), v.clone())],
                TypedTerm {
                    kind: TypedTermKind::Var(x.clone()),
                    ty: v,
                },
            ))
        }
        TermKind::Lam(x, body) => {
            let (mut ctx, tb) = infer_raw_typed(inf, body)?;
            let pos = ctx
                .iter()
                .position(|(n, _)| n == x)
                .ok_or_else(|| Error::Untypable(format!("binder `{x}` unused")))?;
            let (_, tx) = ctx.remove(pos);
            let ty = Type::lolli(tx, tb.ty.clone());
            Ok((
                ctx,
                TypedTerm {
                    kind: TypedTermKind::Lam(x.clone(), Box::new(tb)),
                    ty,
                },
            ))
        }
        TermKind::App(f, a) => {
            let (ctx_f, tf) = infer_raw_typed(inf, f)?;
            let (ctx_a, ta) = infer_raw_typed(inf, a)?;
            check_disjoint(&ctx_f, &ctx_a)?;
            let r = inf.fresh();
            inf.unify(&tf.ty, &Type::lolli(ta.ty.clone(), r.clone()))?;
            let mut ctx = ctx_f;
            ctx.extend(ctx_a);
            Ok((
                ctx,
                TypedTerm {
                    kind: TypedTermKind::App(Box::new(tf), Box::new(ta)),
                    ty: r,
                },
            ))
        }
        TermKind::Pair(l, r) => {
            let (ctx_l, tl) = infer_raw_typed(inf, l)?;
            let (ctx_r, tr) = infer_raw_typed(inf, r)?;
            check_disjoint(&ctx_l, &ctx_r)?;
            let ty = Type::tensor(tl.ty.clone(), tr.ty.clone());
            let mut ctx = ctx_l;
            ctx.extend(ctx_r);
            Ok((
                ctx,
                TypedTerm {
                    kind: TypedTermKind::Pair(Box::new(tl), Box::new(tr)),
                    ty,
                },
            ))
        }
        TermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => {
            let (ctx_s, ts) = infer_raw_typed(inf, scrutinee)?;
            let p = inf.fresh();
            let q = inf.fresh();
            inf.unify(&ts.ty, &Type::tensor(p.clone(), q.clone()))?;
            let (mut ctx_b, tb) = infer_raw_typed(inf, body)?;
            for (binder, component) in [(left, &p), (right, &q)] {
                let pos = ctx_b
                    .iter()
                    .position(|(n, _)| n == binder)
                    .ok_or_else(|| Error::Untypable(format!("let binder `{binder}` unused")))?;
                let (_, tx) = ctx_b.remove(pos);
                inf.unify(&tx, component)?;
            }
            check_disjoint(&ctx_s, &ctx_b)?;
            let ty = tb.ty.clone();
            let mut ctx = ctx_s;
            ctx.extend(ctx_b);
            Ok((
                ctx,
                TypedTerm {
                    kind: TypedTermKind::LetPair {
                        left: left.clone(),
                        right: right.clone(),
                        scrutinee: Box::new(ts),
                        body: Box::new(tb),
                    },
                    ty,
                },
            ))
        }
    }
}

/// Annotate a closed term with node types instantiated so the whole term
/// sits at `ty` (which must be an instance of its principal type).
pub(crate) fn annotate_at(t: &Term, ty: &Type) -> Result<TypedTerm> {
    let typed = annotate(t)?;
    let theta = instance_of(ty, &typed.ty)
        .ok_or_else(|| Error::Untypable(format!("term is not typable at {ty}")))?;
    Ok(apply_typed(&theta, &typed))
}

/// Most general common instance of two types (their variables treated as
/// disjoint), canonically renamed; `None` when no common type exists.
pub fn common_instance(a: &Type, b: &Type) -> Option<Type> {
    let b2 = prefix_rename(b, "r.");
    let theta = unify(a, &b2).ok()?;
    let t = theta.apply(a);
    Some(canonical_renaming(&[&t]).apply(&t))
}

fn apply_typed(s: &TypeSubstitution, t: &TypedTerm) -> TypedTerm {
    let kind = match &t.kind {
        TypedTermKind::Var(x) => TypedTermKind::Var(x.clone()),
        TypedTermKind::Lam(x, b) => TypedTermKind::Lam(x.clone(), Box::new(apply_typed(s, b))),
        TypedTermKind::App(f, a) => {
            TypedTermKind::App(Box::new(apply_typed(s, f)), Box::new(apply_typed(s, a)))
        }
        TypedTermKind::Pair(l, r) => {
            TypedTermKind::Pair(Box::new(apply_typed(s, l)), Box::new(apply_typed(s, r)))
        }
        TypedTermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => TypedTermKind::LetPair {
            left: left.clone(),
            right: right.clone(),
            scrutinee: Box::new(apply_typed(s, scrutinee)),
            body: Box::new(apply_typed(s, body)),
        },
    };
    TypedTerm {
        kind,
        ty: s.apply(&t.ty),
    }
}

fn collect_types(t: &TypedTerm, out: &mut Vec<Type>) {
    out.push(t.ty.clone());
    match &t.kind {
        TypedTermKind::Var(_) => {}
        TypedTermKind::Lam(_, b) => collect_types(b, out),
        TypedTermKind::App(f, a) => {
            collect_types(f, out);
            collect_types(a, out);
        }
        TypedTermKind::Pair(l, r) => {
            collect_types(l, out);
            collect_types(r, out);
        }
        TypedTermKind::LetPair {
            scrutinee, body, ..
        } => {
            collect_types(scrutinee, out);
            collect_types(body, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Implicational order
// ---------------------------------------------------------------------------

/// The order of an implicational type: `order('a) = 1`,
/// `order(A1 -> ... -> An -> 'a) = max_i order(Ai) + 1`.
pub fn implicational_order(a: &Type) -> Result<u32> {
    if a.contains_tensor() {
        return Err(Error::NotImplicational(a.to_string()));
    }
    Ok(order_unchecked(a))
}

fn order_unchecked(a: &Type) -> u32 {
    match a {
        Type::Var(_) => 1,
        _ => {
            let (args, _) = a.split_arrows();
            1 + args.iter().map(|t| order_unchecked(t)).max().unwrap_or(0)
        }
    }
}

// ---------------------------------------------------------------------------
// Poly-typability
// ---------------------------------------------------------------------------

/// Evidence that `subject` is poly-typable by `claimed = A1->...->An->B`
/// with respect to `args = s1..sn`: the witness substitution maps the
/// recorded principal type of the subject onto
/// `A''1 -> ... -> A''n -> B` and each recorded `PT(si)` onto `A''i`.
#[derive(Debug, Clone)]
pub struct PolyTypeCertificate {
    pub subject: Term,
    pub claimed: Type,
    pub args: Vec<Term>,
    pub witness: TypeSubstitution,
    pub subject_pt: Type,
    pub arg_pts: Vec<Type>,
    pub instantiated_args: Vec<Type>,
}

pub(crate) fn prefix_rename(ty: &Type, prefix: &str) -> Type {
    match ty {
        Type::Var(v) => Type::var(format!("{prefix}{v}")),
        Type::Tensor(a, b) => Type::tensor(prefix_rename(a, prefix), prefix_rename(b, prefix)),
        Type::Lolli(a, b) => Type::lolli(prefix_rename(a, prefix), prefix_rename(b, prefix)),
    }
}

/// Check poly-typability of `t` by `claimed` w.r.t. `args`, returning a
/// re-checkable certificate.
pub fn check_poly_typable(t: &Term, claimed: &Type, args: &[Term]) -> Result<PolyTypeCertificate> {
    syntax::require_linear(t)?;
    let n = args.len();
    let (claim_args, claim_result) = claimed.split_n_arrows(n).ok_or_else(|| {
        Error::Premise(format!("claimed type {claimed} has fewer than {n} arrows"))
    })?;
    let subject_pt = prefix_rename(&principal_type_closed(t)?, "s.");
    let mut arg_pts = Vec::new();
    for (i, s) in args.iter().enumerate() {
        syntax::require_linear(s)?;
        let pt = principal_type_closed(s)?;
        // The argument must be plainly typable at the claimed domain.
        if instance_of(claim_args[i], &pt).is_none() {
            return Err(Error::Premise(format!(
                "argument {} has principal type {pt}, of which {} is not an instance",
                i + 1,
                claim_args[i]
            )));
        }
        arg_pts.push(prefix_rename(&pt, &format!("a{i}.")));
    }
    let target = Type::arrows(arg_pts.iter().cloned(), claim_result.clone());
    let frozen = claim_result.vars();
    let witness = unify_frozen(&subject_pt, &target, &frozen).map_err(|e| {
        Error::NoPolyWitness(format!(
            "PT(t) = {subject_pt} does not instantiate onto {target}: {e}"
        ))
    })?;
    let instantiated_args: Vec<Type> = arg_pts.iter().map(|p| witness.apply(p)).collect();
    let cert = PolyTypeCertificate {
        subject: t.clone(),
        claimed: claimed.clone(),
        args: args.to_vec(),
        witness,
        subject_pt,
        arg_pts,
        instantiated_args,
    };
    cert.validate()?;
    Ok(cert)
}

impl PolyTypeCertificate {
    /// Re-check the certificate from its fields alone.
    pub fn validate(&self) -> Result<()> {
        let n = self.args.len();
        let (claim_args, claim_result) = self.claimed.split_n_arrows(n).ok_or_else(|| {
            Error::Premise("claimed type has too few arrows for the argument list".into())
        })?;
        // Recorded principal types must be α-variants of the real ones.
        let fresh_subject = principal_type_closed(&self.subject)?;
        if !alpha_variant(&self.subject_pt, &fresh_subject) {
            return Err(Error::ConstructionFailure(
                "recorded subject principal type is stale".into(),
            ));
        }
        for (i, s) in self.args.iter().enumerate() {
            let pt = principal_type_closed(s)?;
            if !alpha_variant(&self.arg_pts[i], &pt) {
                return Err(Error::ConstructionFailure(format!(
                    "recorded principal type of argument {} is stale",
                    i + 1
                )));
            }
            if instance_of(claim_args[i], &pt).is_none() {
                return Err(Error::Premise(format!(
                    "argument {} is not typable at the claimed domain",
                    i + 1
                )));
            }
        }
        // The defining equations of the witness.
        let lhs = self.witness.apply(&self.subject_pt);
        let rhs = Type::arrows(self.instantiated_args.iter().cloned(), claim_result.clone());
        if lhs != rhs {
            return Err(Error::ConstructionFailure(format!(
                "witness does not map the subject principal type onto {rhs} (got {lhs})"
            )));
        }
        for (i, p) in self.arg_pts.iter().enumerate() {
            if self.witness.apply(p) != self.instantiated_args[i] {
                return Err(Error::ConstructionFailure(format!(
                    "witness does not map argument {} onto its recorded instance",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Are the two types renamings of each other?
pub fn alpha_variant(a: &Type, b: &Type) -> bool {
    let ra = canonical_renaming(&[a]).apply(a);
    let rb = canonical_renaming(&[b]).apply(b);
    ra == rb
}

/// Compose two unary poly-type certificates: from `t : A -> B` w.r.t. `s`
/// and `t' : B -> C` w.r.t. `t s`, build `fn x=>t' (t x)` certified at
/// `A -> C` w.r.t. `s`.
pub fn compose_poly(
    first: &PolyTypeCertificate,
    second: &PolyTypeCertificate,
) -> Result<(Term, PolyTypeCertificate)> {
    if first.args.len() != 1 || second.args.len() != 1 {
        return Err(Error::Premise(
            "poly-type composition needs unary certificates".into(),
        ));
    }
    let (a, b) = match &first.claimed {
        Type::Lolli(a, b) => (a.as_ref(), b.as_ref()),
        _ => return Err(Error::Premise("first certificate is not an arrow".into())),
    };
    let (b2, c) = match &second.claimed {
        Type::Lolli(b2, c) => (b2.as_ref(), c.as_ref()),
        _ => return Err(Error::Premise("second certificate is not an arrow".into())),
    };
    if b != b2 {
        return Err(Error::Premise(format!("middle types differ: {b} vs {b2}")));
    }
    let mut avoid = syntax::all_names(&first.subject);
    avoid.extend(syntax::all_names(&second.subject));
    let x = syntax::fresh_name("x", &avoid);
    let composed = syntax::barendregt(&Term::lam(
        x.clone(),
        Term::app(
            second.subject.clone(),
            Term::app(first.subject.clone(), Term::var(x)),
        ),
    ));
    let claimed = Type::lolli(a.clone(), c.clone());
    let cert = check_poly_typable(&composed, &claimed, &first.args)?;
    Ok((composed, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn pt(src: &str) -> Type {
        principal_type_closed(&parse_term(src).unwrap()).unwrap()
    }

    #[test]
    fn type_parse_print_roundtrip() {
        for src in [
            "'a",
            "'a -> 'a",
            "'a -> 'b -> ('a -> 'b -> 'c) -> 'c",
            "'a * 'b -> 'c",
            "('a -> 'b) * 'c",
            "'a * 'b * 'c",
            "'a * ('b * 'c)",
        ] {
            let t = parse_type(src).unwrap();
            let printed = t.to_string();
            assert_eq!(parse_type(&printed).unwrap(), t, "{src} -> {printed}");
        }
    }

    #[test]
    fn star_binds_tighter_than_arrow() {
        let t = parse_type("'a * 'b -> 'c").unwrap();
        assert!(matches!(t, Type::Lolli(_, _)));
    }

    #[test]
    fn unify_examples() {
        let s = unify(&parse_type("'a").unwrap(), &parse_type("'b -> 'b").unwrap()).unwrap();
        assert_eq!(
            s.apply(&parse_type("'a").unwrap()),
            parse_type("'b -> 'b").unwrap()
        );

        let s2 = unify(
            &parse_type("'a -> 'a").unwrap(),
            &parse_type("('b * 'c) -> 'd").unwrap(),
        )
        .unwrap();
        assert_eq!(
            s2.apply(&parse_type("'a").unwrap()),
            parse_type("'b * 'c").unwrap()
        );
        assert_eq!(
            s2.apply(&parse_type("'d").unwrap()),
            parse_type("'b * 'c").unwrap()
        );

        assert!(matches!(
            unify(&parse_type("'a").unwrap(), &parse_type("'a -> 'b").unwrap()),
            Err(Error::OccursCheck { .. })
        ));
    }

    #[test]
    fn unify_is_idempotent() {
        let s = unify(
            &parse_type("'a -> 'b").unwrap(),
            &parse_type("('c -> 'c) -> 'a").unwrap(),
        )
        .unwrap();
        let t = parse_type("'a -> 'b").unwrap();
        assert_eq!(s.apply(&s.apply(&t)), s.apply(&t));
    }

    #[test]
    fn principal_types_of_booleans() {
        assert_eq!(
            pt("fn x=>fn y=>fn z=>z x y").to_string(),
            "'a -> 'b -> ('a -> 'b -> 'c) -> 'c"
        );
        assert_eq!(
            pt("fn x=>fn y=>fn z=>z y x").to_string(),
            "'a -> 'b -> ('b -> 'a -> 'c) -> 'c"
        );
        assert_eq!(pt("fn x=>x").to_string(), "'a -> 'a");
    }

    #[test]
    fn untypable_let_of_lambda() {
        let t = parse_term("let val (x,y)=fn z=>z in (x,y)").unwrap();
        assert!(infer_principal_type(&t).is_err());
    }

    #[test]
    fn check_typing_examples() {
        let bhm = bool_hm();
        let i = parse_term("fn x=>x").unwrap();
        assert!(check_typing(
            &TypeContext::empty(),
            &i,
            &Type::lolli(bhm.clone(), bhm.clone())
        ));
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        assert!(check_typing(&TypeContext::empty(), &tru, &bhm));
        assert!(!check_typing(&TypeContext::empty(), &tru, &bool_seq()));
    }

    #[test]
    fn instance_of_examples() {
        let bhm = bool_hm();
        assert!(instance_of(&bhm, &parse_type("'a").unwrap()).is_some());
        assert!(instance_of(&parse_type("'a").unwrap(), &bhm).is_none());
        // PT(True) has B_HM as an instance
        let t = pt("fn x=>fn y=>fn z=>z x y");
        assert!(instance_of(&bhm, &t).is_some());
    }

    #[test]
    fn order_examples() {
        assert_eq!(implicational_order(&parse_type("'a").unwrap()).unwrap(), 1);
        assert_eq!(
            implicational_order(&parse_type("'a -> 'a").unwrap()).unwrap(),
            2
        );
        assert_eq!(implicational_order(&bool_hm()).unwrap(), 3);
        assert_eq!(implicational_order(&bool_seq()).unwrap(), 3);
        assert!(implicational_order(&parse_type("'a * 'a").unwrap()).is_err());
    }

    fn not_poly() -> Term {
        let src = "fun True x y z = z x y;\
                   fun False x y z = z y x;\
                   fun I x = x;\
                   fun erase_3 p = p I I I;\
                   fun Not_POLY p = p False True (fn f=>fn g=>(erase_3 g) f);";
        let prog = syntax::parse_program(src).unwrap();
        syntax::elaborate(&prog)
            .unwrap()
            .get("Not_POLY")
            .unwrap()
            .clone()
    }

    #[test]
    fn not_poly_is_not_plainly_typable_at_bool_arrow() {
        let claimed = Type::lolli(bool_hm(), bool_hm());
        assert!(!check_typing(&TypeContext::empty(), &not_poly(), &claimed));
    }

    #[test]
    fn not_poly_is_poly_typable() {
        let claimed = Type::lolli(bool_hm(), bool_hm());
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        let fls = parse_term("fn x=>fn y=>fn z=>z y x").unwrap();
        let cert = check_poly_typable(&not_poly(), &claimed, &[tru]).unwrap();
        cert.validate().unwrap();
        let cert2 = check_poly_typable(&not_poly(), &claimed, &[fls]).unwrap();
        cert2.validate().unwrap();
    }

    #[test]
    fn plain_typing_is_special_case_of_poly() {
        let claimed = Type::lolli(bool_hm(), bool_hm());
        let i = parse_term("fn x=>x").unwrap();
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        let cert = check_poly_typable(&i, &claimed, &[tru]).unwrap();
        cert.validate().unwrap();
    }

    #[test]
    fn true_is_not_poly_typable_at_arrow() {
        let claimed = Type::lolli(bool_hm(), bool_hm());
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        assert!(check_poly_typable(&tru, &claimed, &[tru.clone()]).is_err());
    }

    #[test]
    fn compose_poly_identity() {
        let claimed = Type::lolli(bool_hm(), bool_hm());
        let i = parse_term("fn x=>x").unwrap();
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        let c1 = check_poly_typable(&i, &claimed, &[tru.clone()]).unwrap();
        let c2 = check_poly_typable(&i, &claimed, &[tru]).unwrap();
        let (term, cert) = compose_poly(&c1, &c2).unwrap();
        cert.validate().unwrap();
        assert!(syntax::linearity_check(&term).is_ok());
    }

    #[test]
    fn compose_poly_mismatched_middle() {
        let i = parse_term("fn x=>x").unwrap();
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        let c1 =
            check_poly_typable(&i, &Type::lolli(bool_hm(), bool_hm()), &[tru.clone()]).unwrap();
        let c2 = check_poly_typable(
            &i,
            &Type::lolli(bool_seq(), bool_seq()),
            &[parse_term("fn x=>fn f=>fn g=>g (f x)").unwrap()],
        )
        .unwrap();
        assert!(compose_poly(&c1, &c2).is_err());
    }
}

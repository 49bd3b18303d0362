//! The second-order linear term system and its two-valued model.
//!
//! Terms are first-order variables and applications of second-order
//! variables; every variable (of either order) occurs at most once, and
//! sibling arguments have disjoint variables.  Assignments send
//! first-order variables to {0,1} and second-order variables to constant
//! or positive projection functions.  Distinct well-formed terms can
//! always be told apart by some assignment; `separate` finds one by
//! exhaustive search.
//!
//! Closed implicational λ-terms whose type has order below four are
//! identified with these terms: the λ-binders become the header of an
//! [`SltSkeleton`] and the applicative body becomes the [`SltTerm`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::{self, Name, Term, TermKind};
use crate::types::{self, Type};
use crate::{Error, Result};

/// A term of the second-order linear term system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SltTerm {
    /// First-order variable.
    Var(Name),
    /// Application of a second-order variable to argument terms; the
    /// variable's arity is the argument count.
    App(Name, Vec<SltTerm>),
}

impl SltTerm {
    pub fn var(name: impl Into<Name>) -> Self {
        SltTerm::Var(name.into())
    }

    pub fn app(name: impl Into<Name>, args: Vec<SltTerm>) -> Self {
        SltTerm::App(name.into(), args)
    }

    /// First-order variables in occurrence order.
    pub fn first_order_vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect(&mut out, &mut Vec::new());
        out
    }

    /// Second-order variables with their arities, in occurrence order.
    pub fn second_order_vars(&self) -> Vec<(Name, usize)> {
        let mut svars = Vec::new();
        self.collect(&mut Vec::new(), &mut svars);
        svars
    }

    fn collect(&self, vars: &mut Vec<Name>, svars: &mut Vec<(Name, usize)>) {
        match self {
            SltTerm::Var(x) => vars.push(x.clone()),
            SltTerm::App(g, args) => {
                svars.push((g.clone(), args.len()));
                for a in args {
                    a.collect(vars, svars);
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SltTerm::Var(_) => 1,
            SltTerm::App(_, args) => 1 + args.iter().map(SltTerm::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for SltTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SltTerm::Var(x) => write!(f, "{x}"),
            SltTerm::App(g, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{g}({})", parts.join(", "))
            }
        }
    }
}

/// Parse the textual form, e.g. `G2(x1, G1(x2))`.
pub fn parse_slt_term(text: &str) -> Result<SltTerm> {
    let toks = syntax::lex(text)?;
    let mut pos = 0usize;
    let t = parse_slt(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err(Error::Parse {
            message: "trailing input after term".into(),
            span: toks.get(pos).map(|t| t.span),
        });
    }
    Ok(t)
}

fn parse_slt(toks: &[syntax::SpannedTok], pos: &mut usize) -> Result<SltTerm> {
    let name = match toks.get(*pos).map(|t| t.tok.clone()) {
        Some(syntax::Tok::Ident(s)) => {
            *pos += 1;
            s
        }
        _ => {
            return Err(Error::Parse {
                message: "expected a variable or second-order application".into(),
                span: toks.get(*pos).map(|t| t.span),
            })
        }
    };
    if matches!(toks.get(*pos).map(|t| &t.tok), Some(syntax::Tok::LParen)) {
        *pos += 1;
        let mut args = vec![parse_slt(toks, pos)?];
        while matches!(toks.get(*pos).map(|t| &t.tok), Some(syntax::Tok::Comma)) {
            *pos += 1;
            args.push(parse_slt(toks, pos)?);
        }
        match toks.get(*pos).map(|t| &t.tok) {
            Some(syntax::Tok::RParen) => {
                *pos += 1;
                Ok(SltTerm::App(name, args))
            }
            _ => Err(Error::Parse {
                message: "expected `)`".into(),
                span: toks.get(*pos).map(|t| t.span),
            }),
        }
    } else {
        Ok(SltTerm::Var(name))
    }
}

/// Check the formation rules: arities at least one, every first- and
/// second-order variable occurring at most once.
pub fn well_formed(t: &SltTerm) -> Result<()> {
    let mut vars = Vec::new();
    let mut svars = Vec::new();
    t.collect(&mut vars, &mut svars);
    let mut seen = BTreeSet::new();
    for v in &vars {
        if !seen.insert(v.clone()) {
            return Err(Error::IllFormedSlt(format!(
                "first-order variable `{v}` occurs more than once"
            )));
        }
    }
    let mut seen_s = BTreeSet::new();
    for (g, arity) in &svars {
        if *arity == 0 {
            return Err(Error::IllFormedSlt(format!(
                "second-order variable `{g}` must have arity at least 1"
            )));
        }
        if seen.contains(g) || !seen_s.insert(g.clone()) {
            return Err(Error::IllFormedSlt(format!(
                "second-order variable `{g}` occurs more than once"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Assignments and evaluation
// ---------------------------------------------------------------------------

/// Interpretation of one second-order variable: a constant function or a
/// positive projection (1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpFn {
    Const(u8),
    Proj(usize),
}

impl fmt::Display for CpFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpFn::Const(b) => write!(f, "C{b}"),
            CpFn::Proj(i) => write!(f, "P{i}"),
        }
    }
}

/// A pair of valuations: first-order variables to bits, second-order
/// variables to constant/projection functions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub first: BTreeMap<Name, u8>,
    pub second: BTreeMap<Name, CpFn>,
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs: Vec<String> = self.first.iter().map(|(x, b)| format!("{x}={b}")).collect();
        let ss: Vec<String> = self
            .second
            .iter()
            .map(|(g, c)| format!("{g}={c}"))
            .collect();
        write!(f, "{} ; {}", fs.join(" "), ss.join(" "))
    }
}

/// Evaluate under an assignment covering all variables of the term.
pub fn eval(t: &SltTerm, a: &Assignment) -> Result<u8> {
    match t {
        SltTerm::Var(x) => a
            .first
            .get(x)
            .copied()
            .ok_or_else(|| Error::IllFormedSlt(format!("variable `{x}` not covered"))),
        SltTerm::App(g, args) => {
            let f = a
                .second
                .get(g)
                .copied()
                .ok_or_else(|| Error::IllFormedSlt(format!("variable `{g}` not covered")))?;
            match f {
                CpFn::Const(b) => {
                    // Arguments are still checked for coverage: constant
                    // functions absorb their inputs, not ill-formedness.
                    for arg in args {
                        eval(arg, a)?;
                    }
                    Ok(b)
                }
                CpFn::Proj(i) => {
                    if i == 0 || i > args.len() {
                        return Err(Error::IllFormedSlt(format!(
                            "projection index {i} out of range for `{g}`"
                        )));
                    }
                    let mut result = 0;
                    for (k, arg) in args.iter().enumerate() {
                        let v = eval(arg, a)?;
                        if k + 1 == i {
                            result = v;
                        }
                    }
                    Ok(result)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Separation
// ---------------------------------------------------------------------------

/// Rename variables of both terms jointly by leftmost occurrence (first
/// in `s1`, then `s2`): first-order to `x1, x2, ...`, second-order to
/// `G1, G2, ...`.
pub fn joint_canonical(s1: &SltTerm, s2: &SltTerm) -> (SltTerm, SltTerm) {
    let mut vmap: BTreeMap<Name, Name> = BTreeMap::new();
    let mut smap: BTreeMap<Name, Name> = BTreeMap::new();
    for t in [s1, s2] {
        for v in t.first_order_vars() {
            let next = format!("x{}", vmap.len() + 1);
            vmap.entry(v).or_insert(next);
        }
        for (g, _) in t.second_order_vars() {
            let next = format!("G{}", smap.len() + 1);
            smap.entry(g).or_insert(next);
        }
    }
    fn rename(t: &SltTerm, vmap: &BTreeMap<Name, Name>, smap: &BTreeMap<Name, Name>) -> SltTerm {
        match t {
            SltTerm::Var(x) => SltTerm::Var(vmap[x].clone()),
            SltTerm::App(g, args) => SltTerm::App(
                smap[g].clone(),
                args.iter().map(|a| rename(a, vmap, smap)).collect(),
            ),
        }
    }
    (rename(s1, &vmap, &smap), rename(s2, &vmap, &smap))
}

/// Variables of both terms in joint leftmost-occurrence order.
fn joint_variables(s1: &SltTerm, s2: &SltTerm) -> (Vec<Name>, Vec<(Name, usize)>) {
    let mut vars: Vec<Name> = Vec::new();
    let mut svars: Vec<(Name, usize)> = Vec::new();
    for t in [s1, s2] {
        for v in t.first_order_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        for (g, k) in t.second_order_vars() {
            if !svars.iter().any(|(h, _)| *h == g) {
                svars.push((g, k));
            }
        }
    }
    (vars, svars)
}

/// Find an assignment distinguishing two distinct well-formed terms.
///
/// The search is exhaustive and deterministic: second-order choices
/// iterate `C0, C1, P1..Pk` per variable (earlier variables changing
/// slowest), first-order choices count in binary with the first variable
/// as the most significant bit.  The first hit is returned and its
/// soundness re-checked by evaluation.
pub fn separate(s1: &SltTerm, s2: &SltTerm) -> Result<Assignment> {
    well_formed(s1)?;
    well_formed(s2)?;
    let (c1, c2) = joint_canonical(s1, s2);
    if c1 == c2 {
        return Err(Error::NothingToSeparate);
    }
    let (vars, svars) = joint_variables(s1, s2);
    let options: Vec<Vec<CpFn>> = svars
        .iter()
        .map(|(_, k)| {
            let mut o = vec![CpFn::Const(0), CpFn::Const(1)];
            o.extend((1..=*k).map(CpFn::Proj));
            o
        })
        .collect();
    let mut idx = vec![0usize; svars.len()];
    loop {
        let second: BTreeMap<Name, CpFn> = svars
            .iter()
            .enumerate()
            .map(|(j, (g, _))| (g.clone(), options[j][idx[j]]))
            .collect();
        for k in 0..(1u64 << vars.len()) {
            let first: BTreeMap<Name, u8> = vars
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let bit = ((k >> (vars.len() - 1 - i)) & 1) as u8;
                    (x.clone(), bit)
                })
                .collect();
            let a = Assignment {
                first,
                second: second.clone(),
            };
            if eval(s1, &a)? != eval(s2, &a)? {
                return Ok(a);
            }
        }
        if svars.is_empty() {
            // No second-order variables: the single ρ1 sweep above was
            // the whole space.
            return Err(Error::SearchExhausted(format!(
                "no distinguishing assignment for {s1} vs {s2}"
            )));
        }
        // Odometer over second-order options, last variable fastest.
        let mut pos = svars.len();
        loop {
            if pos == 0 {
                return Err(Error::SearchExhausted(format!(
                    "no distinguishing assignment for {s1} vs {s2}"
                )));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Enumerate every well-formed term over subsets of the given variable
/// pools (each symbol used at most once).
pub fn enumerate_terms(vars: &[&str], svars: &[(&str, usize)]) -> Vec<SltTerm> {
    fn terms(
        vars: &[&str],
        svars: &[(&str, usize)],
        used_v: &mut Vec<bool>,
        used_s: &mut Vec<bool>,
    ) -> Vec<SltTerm> {
        let mut out = Vec::new();
        for (i, v) in vars.iter().enumerate() {
            if !used_v[i] {
                out.push(SltTerm::var(*v));
            }
        }
        for j in 0..svars.len() {
            if used_s[j] {
                continue;
            }
            let (g, arity) = svars[j];
            used_s[j] = true;
            let arg_lists = argument_lists(arity, vars, svars, used_v, used_s);
            for args in arg_lists {
                out.push(SltTerm::app(g, args));
            }
            used_s[j] = false;
        }
        out
    }
    fn argument_lists(
        n: usize,
        vars: &[&str],
        svars: &[(&str, usize)],
        used_v: &mut Vec<bool>,
        used_s: &mut Vec<bool>,
    ) -> Vec<Vec<SltTerm>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        let candidates = terms(vars, svars, used_v, used_s);
        for first in candidates {
            let fv = first.first_order_vars();
            let fs = first.second_order_vars();
            let vi: Vec<usize> = fv
                .iter()
                .map(|x| vars.iter().position(|v| v == x).unwrap())
                .collect();
            let si: Vec<usize> = fs
                .iter()
                .map(|(g, _)| svars.iter().position(|(h, _)| h == g).unwrap())
                .collect();
            for &i in &vi {
                used_v[i] = true;
            }
            for &j in &si {
                used_s[j] = true;
            }
            for rest in argument_lists(n - 1, vars, svars, used_v, used_s) {
                let mut args = vec![first.clone()];
                args.extend(rest);
                out.push(args);
            }
            for &i in &vi {
                used_v[i] = false;
            }
            for &j in &si {
                used_s[j] = false;
            }
        }
        out
    }
    let mut used_v = vec![false; vars.len()];
    let mut used_s = vec![false; svars.len()];
    terms(vars, svars, &mut used_v, &mut used_s)
}

// ---------------------------------------------------------------------------
// Skeletons: the λ-term side of the identification
// ---------------------------------------------------------------------------

/// One header binder: arity 0 marks a first-order variable, arity ≥ 1 a
/// second-order variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SltBinder {
    pub name: Name,
    pub arity: usize,
}

/// The canonical-form view of a closed implicational term of order < 4:
/// a header of binders and an applicative body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SltSkeleton {
    pub header: Vec<SltBinder>,
    pub body: SltTerm,
}

impl fmt::Display for SltSkeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let firsts: Vec<&str> = self
            .header
            .iter()
            .filter(|b| b.arity == 0)
            .map(|b| b.name.as_str())
            .collect();
        let seconds: Vec<String> = self
            .header
            .iter()
            .filter(|b| b.arity > 0)
            .map(|b| format!("{}/{}", b.name, b.arity))
            .collect();
        write!(
            f,
            "({}; {}; {})",
            firsts.join(","),
            seconds.join(","),
            self.body
        )
    }
}

/// Read a closed normal implicational term at the given type (order < 4)
/// as a skeleton.  Binders are renamed positionally (`x1..` / `G1..`) so
/// skeletons of terms at the same type share a header.
pub fn term_to_slt(t: &Term, ty: &Type) -> Result<SltSkeleton> {
    if ty.contains_tensor() {
        return Err(Error::NotCanonicalShape(format!(
            "type {ty} is not implicational"
        )));
    }
    let order = types::implicational_order(ty)?;
    if order >= 4 {
        return Err(Error::NotCanonicalShape(format!(
            "type {ty} has order {order}, which is not below 4"
        )));
    }
    if !types::check_typing(&types::TypeContext::empty(), t, ty) {
        return Err(Error::NotCanonicalShape(format!(
            "term is not a closed term of {ty}"
        )));
    }
    let (arg_tys, _) = ty.split_arrows();
    // Under order < 4 the arguments of each argument type are atoms, so
    // the slot arity is just their count.
    let arities: Vec<usize> = arg_tys.iter().map(|a| a.split_arrows().0.len()).collect();

    // Peel existing lambdas, η-expanding missing ones.
    let mut binders: Vec<Name> = Vec::new();
    let mut cur = t.clone();
    let mut avoid = syntax::all_names(t);
    for i in 0..arities.len() {
        match cur.kind {
            TermKind::Lam(x, b) => {
                binders.push(x);
                cur = *b;
            }
            _ => {
                let fresh = syntax::fresh_name(&format!("e{}", i + 1), &avoid);
                avoid.insert(fresh.clone());
                binders.push(fresh.clone());
                cur = Term::app(cur, Term::var(fresh));
            }
        }
    }
    let mut names: BTreeMap<Name, (Name, usize)> = BTreeMap::new();
    let mut first_count = 0usize;
    let mut second_count = 0usize;
    let mut header = Vec::new();
    for (b, &arity) in binders.iter().zip(&arities) {
        let canonical = if arity == 0 {
            first_count += 1;
            format!("x{first_count}")
        } else {
            second_count += 1;
            format!("G{second_count}")
        };
        names.insert(b.clone(), (canonical.clone(), arity));
        header.push(SltBinder {
            name: canonical,
            arity,
        });
    }
    let body = body_to_slt(&cur, &names)?;
    well_formed(&body)?;
    Ok(SltSkeleton { header, body })
}

fn body_to_slt(t: &Term, names: &BTreeMap<Name, (Name, usize)>) -> Result<SltTerm> {
    match &t.kind {
        TermKind::Var(x) => {
            let (canonical, arity) = names
                .get(x)
                .ok_or_else(|| Error::NotCanonicalShape(format!("unbound variable `{x}`")))?;
            if *arity != 0 {
                return Err(Error::NotCanonicalShape(format!(
                    "`{x}` is second-order but appears unapplied"
                )));
            }
            Ok(SltTerm::Var(canonical.clone()))
        }
        TermKind::App(_, _) => {
            let mut spine = Vec::new();
            let mut head = t;
            while let TermKind::App(f, a) = &head.kind {
                spine.push(a.as_ref());
                head = f;
            }
            spine.reverse();
            let TermKind::Var(h) = &head.kind else {
                return Err(Error::NotCanonicalShape(
                    "application head is not a header variable".into(),
                ));
            };
            let (canonical, arity) = names
                .get(h)
                .ok_or_else(|| Error::NotCanonicalShape(format!("unbound head `{h}`")))?;
            if *arity != spine.len() {
                return Err(Error::NotCanonicalShape(format!(
                    "`{h}` has arity {arity} but is applied to {} arguments",
                    spine.len()
                )));
            }
            let args: Result<Vec<SltTerm>> = spine.iter().map(|a| body_to_slt(a, names)).collect();
            Ok(SltTerm::App(canonical.clone(), args?))
        }
        _ => Err(Error::NotCanonicalShape(
            "body contains a non-applicative construct".into(),
        )),
    }
}

/// The closed linear term a skeleton denotes.
pub fn slt_to_term(sk: &SltSkeleton) -> Term {
    fn body_term(t: &SltTerm) -> Term {
        match t {
            SltTerm::Var(x) => Term::var(x.clone()),
            SltTerm::App(g, args) => Term::apps(Term::var(g.clone()), args.iter().map(body_term)),
        }
    }
    let binders: Vec<Name> = sk.header.iter().map(|b| b.name.clone()).collect();
    Term::lams(&binders, body_term(&sk.body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::types::parse_type;

    fn a1(v: &[(&str, u8)], s: &[(&str, CpFn)]) -> Assignment {
        Assignment {
            first: v.iter().map(|(x, b)| (x.to_string(), *b)).collect(),
            second: s.iter().map(|(g, c)| (g.to_string(), *c)).collect(),
        }
    }

    #[test]
    fn eval_clauses() {
        let x = SltTerm::var("x");
        assert_eq!(eval(&x, &a1(&[("x", 1)], &[])).unwrap(), 1);
        let gx = SltTerm::app("G", vec![SltTerm::var("x")]);
        assert_eq!(
            eval(&gx, &a1(&[("x", 1)], &[("G", CpFn::Const(0))])).unwrap(),
            0
        );
        let gxy = SltTerm::app("G", vec![SltTerm::var("x"), SltTerm::var("y")]);
        assert_eq!(
            eval(&gxy, &a1(&[("x", 0), ("y", 1)], &[("G", CpFn::Proj(2))])).unwrap(),
            1
        );
        assert!(eval(&x, &a1(&[], &[])).is_err());
    }

    #[test]
    fn separate_var_vs_app() {
        let s1 = SltTerm::var("x");
        let s2 = SltTerm::app("G", vec![SltTerm::var("x")]);
        let a = separate(&s1, &s2).unwrap();
        assert_ne!(eval(&s1, &a).unwrap(), eval(&s2, &a).unwrap());
        // deterministic first hit: G=C0, x=1
        assert_eq!(a.second["G"], CpFn::Const(0));
        assert_eq!(a.first["x"], 1);
    }

    #[test]
    fn separate_argument_swap() {
        let s1 = SltTerm::app("G", vec![SltTerm::var("x"), SltTerm::var("y")]);
        let s2 = SltTerm::app("G", vec![SltTerm::var("y"), SltTerm::var("x")]);
        let a = separate(&s1, &s2).unwrap();
        assert_ne!(eval(&s1, &a).unwrap(), eval(&s2, &a).unwrap());
        assert_eq!(a.second["G"], CpFn::Proj(1));
        assert_eq!(a.first["x"], 0);
        assert_eq!(a.first["y"], 1);
    }

    #[test]
    fn separate_identical_terms_errors() {
        let t = SltTerm::app("G", vec![SltTerm::var("x")]);
        assert!(matches!(separate(&t, &t), Err(Error::NothingToSeparate)));
        // Shared names are significant: G(x) vs G(y) genuinely differ.
        let s2 = SltTerm::app("G", vec![SltTerm::var("y")]);
        assert!(separate(&t, &s2).is_ok());
    }

    #[test]
    fn repeated_svar_is_ill_formed() {
        // f(x) vs f(f(f(x))): the latter repeats f and is rejected.
        let fx = SltTerm::app("f", vec![SltTerm::var("x")]);
        let fffx = SltTerm::app(
            "f",
            vec![SltTerm::app(
                "f",
                vec![SltTerm::app("f", vec![SltTerm::var("x")])],
            )],
        );
        assert!(well_formed(&fx).is_ok());
        assert!(well_formed(&fffx).is_err());
        assert!(separate(&fx, &fffx).is_err());
    }

    #[test]
    fn parse_and_display() {
        let t = parse_slt_term("G2(x1, G1(x2))").unwrap();
        assert_eq!(t.to_string(), "G2(x1, G1(x2))");
        assert_eq!(parse_slt_term("x3").unwrap(), SltTerm::var("x3"));
    }

    #[test]
    fn skeleton_of_true() {
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        let sk = term_to_slt(&tru, &types::bool_hm()).unwrap();
        assert_eq!(sk.to_string(), "(x1,x2; G1/2; G1(x1, x2))");
        let back = slt_to_term(&sk);
        assert!(syntax::alpha_eq(&back, &tru));
    }

    #[test]
    fn skeleton_of_identity() {
        let i = parse_term("fn x=>x").unwrap();
        let sk = term_to_slt(&i, &parse_type("'a -> 'a").unwrap()).unwrap();
        assert_eq!(sk.to_string(), "(x1; ; x1)");
        assert!(syntax::alpha_eq(&slt_to_term(&sk), &i));
    }

    #[test]
    fn skeleton_eta_expands_at_type() {
        // The identity read at ('a->'a) -> 'a -> 'a becomes G1(x1).
        let i = parse_term("fn x=>x").unwrap();
        let sk = term_to_slt(&i, &parse_type("('a -> 'a) -> 'a -> 'a").unwrap()).unwrap();
        assert_eq!(sk.to_string(), "(x1; G1/1; G1(x1))");
    }

    #[test]
    fn skeleton_rejects_pairs_and_high_order() {
        let pair = parse_term("fn x=>fn y=>(x,y)").unwrap();
        assert!(term_to_slt(&pair, &parse_type("'a -> 'b -> 'a * 'b").unwrap()).is_err());
        let t = parse_term("fn f=>f (fn x=>x)").unwrap();
        assert!(term_to_slt(&t, &parse_type("(('a -> 'a) -> 'b) -> 'b").unwrap()).is_err());
    }

    #[test]
    fn enumerate_small_pool() {
        let ts = enumerate_terms(&["x"], &[("F", 1)]);
        // x, F(x)
        assert_eq!(ts.len(), 2);
        let ts2 = enumerate_terms(&["x", "y"], &[("F", 1), ("G", 2)]);
        for t in &ts2 {
            well_formed(t).unwrap();
        }
        assert!(ts2.iter().any(|t| t.to_string() == "G(F(x), y)"));
    }
}

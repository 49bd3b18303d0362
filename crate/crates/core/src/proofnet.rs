//! Multiplicative proof nets for the tensor/implication fragment, used as
//! an independent oracle for `=βηc`.
//!
//! A net is a set of signed formula occurrences wired by links: identity
//! links connect a negative and a positive occurrence of one formula,
//! tensor and implication links each have two premise slots and one
//! conclusion slot per polarity, and cut links connect dual occurrences.
//! Nets are built only constructively, by translating closed typed terms,
//! so no separate correctness criterion is needed.
//!
//! Reduction eliminates cuts (identity rewiring plus the multiplicative
//! step splitting a cut between dual two-premise links) and expands
//! identity links to atomic formulas, so normal nets are cut-free and
//! η-long.  The reduction is strongly normalizing and confluent; equality
//! compares normal forms by a label-preserving matching of their
//! conclusion trees and identity wirings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::syntax::{Name, Term};
use crate::types::{self, Type, TypedTerm, TypedTermKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    fn sign(self) -> &'static str {
        match self {
            Polarity::Pos => "+",
            Polarity::Neg => "-",
        }
    }
}

/// A plain formula occurrence together with its polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedFormula {
    pub formula: Type,
    pub polarity: Polarity,
}

pub type OccId = usize;

/// Links of a proof net.  Identity links produce both of their
/// occurrences; the two-premise links consume their premises and produce
/// their conclusion; cuts consume a dual pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Link {
    Id { neg: OccId, pos: OccId },
    TensorPos { left: OccId, right: OccId, out: OccId },
    TensorNeg { left: OccId, right: OccId, out: OccId },
    LolliPos { dom: OccId, cod: OccId, out: OccId },
    LolliNeg { dom: OccId, cod: OccId, out: OccId },
    Cut { pos: OccId, neg: OccId },
}

/// An IMLL proof net: occurrences, links, and designated conclusions.
#[derive(Debug, Clone, Default)]
pub struct ProofNet {
    pub occs: Vec<SignedFormula>,
    pub links: Vec<Link>,
    pub conclusions: Vec<OccId>,
}

impl ProofNet {
    fn occ(&mut self, formula: Type, polarity: Polarity) -> OccId {
        self.occs.push(SignedFormula { formula, polarity });
        self.occs.len() - 1
    }

    pub fn cut_count(&self) -> usize {
        self.links
            .iter()
            .filter(|l| matches!(l, Link::Cut { .. }))
            .count()
    }
}

// ---------------------------------------------------------------------------
// Translation of typed terms
// ---------------------------------------------------------------------------

/// Translate a closed typable term into a proof net whose single
/// conclusion is the positive occurrence of its principal type.
pub fn translate(t: &Term) -> Result<ProofNet> {
    let ty = types::principal_type_closed(t)?;
    translate_at(t, &ty)
}

/// Translate at a stated instance of the term's principal type.  Equality
/// of typed terms is relative to a common type, so oracle comparisons go
/// through this entry point.
pub fn translate_at(t: &Term, ty: &Type) -> Result<ProofNet> {
    let typed = types::annotate_at(t, ty)?;
    let mut net = ProofNet::default();
    let mut env: BTreeMap<Name, OccId> = BTreeMap::new();
    let out = build(&typed, &mut net, &mut env)?;
    debug_assert!(env.is_empty());
    net.conclusions = vec![out];
    Ok(net)
}

fn build(t: &TypedTerm, net: &mut ProofNet, env: &mut BTreeMap<Name, OccId>) -> Result<OccId> {
    match &t.kind {
        TypedTermKind::Var(x) => {
            let neg = net.occ(t.ty.clone(), Polarity::Neg);
            let pos = net.occ(t.ty.clone(), Polarity::Pos);
            net.links.push(Link::Id { neg, pos });
            env.insert(x.clone(), neg);
            Ok(pos)
        }
        TypedTermKind::Lam(x, body) => {
            let body_out = build(body, net, env)?;
            let dom = env
                .remove(x)
                .ok_or_else(|| Error::Other(format!("binder `{x}` unused in translation")))?;
            let out = net.occ(t.ty.clone(), Polarity::Pos);
            net.links.push(Link::LolliPos {
                dom,
                cod: body_out,
                out,
            });
            Ok(out)
        }
        TypedTermKind::App(f, a) => {
            let f_out = build(f, net, env)?;
            let a_out = build(a, net, env)?;
            let res_neg = net.occ(t.ty.clone(), Polarity::Neg);
            let res_pos = net.occ(t.ty.clone(), Polarity::Pos);
            net.links.push(Link::Id {
                neg: res_neg,
                pos: res_pos,
            });
            let fun_neg = net.occ(f.ty.clone(), Polarity::Neg);
            net.links.push(Link::LolliNeg {
                dom: a_out,
                cod: res_neg,
                out: fun_neg,
            });
            net.links.push(Link::Cut {
                pos: f_out,
                neg: fun_neg,
            });
            Ok(res_pos)
        }
        TypedTermKind::Pair(l, r) => {
            let l_out = build(l, net, env)?;
            let r_out = build(r, net, env)?;
            let out = net.occ(t.ty.clone(), Polarity::Pos);
            net.links.push(Link::TensorPos {
                left: l_out,
                right: r_out,
                out,
            });
            Ok(out)
        }
        TypedTermKind::LetPair {
            left,
            right,
            scrutinee,
            body,
        } => {
            let s_out = build(scrutinee, net, env)?;
            let body_out = build(body, net, env)?;
            let l_neg = env
                .remove(left)
                .ok_or_else(|| Error::Other(format!("binder `{left}` unused in translation")))?;
            let r_neg = env
                .remove(right)
                .ok_or_else(|| Error::Other(format!("binder `{right}` unused in translation")))?;
            let s_neg = net.occ(scrutinee.ty.clone(), Polarity::Neg);
            net.links.push(Link::TensorNeg {
                left: l_neg,
                right: r_neg,
                out: s_neg,
            });
            net.links.push(Link::Cut {
                pos: s_out,
                neg: s_neg,
            });
            Ok(body_out)
        }
    }
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

fn producer(net: &ProofNet, occ: OccId) -> Option<usize> {
    net.links.iter().position(|l| match l {
        Link::Id { neg, pos } => *neg == occ || *pos == occ,
        Link::TensorPos { out, .. }
        | Link::TensorNeg { out, .. }
        | Link::LolliPos { out, .. }
        | Link::LolliNeg { out, .. } => *out == occ,
        Link::Cut { .. } => false,
    })
}

/// Replace every consumption of `old` (premise slots, cut operands,
/// conclusions) with `new`.
fn repoint(net: &mut ProofNet, old: OccId, new: OccId) {
    for l in &mut net.links {
        match l {
            Link::Id { .. } => {}
            Link::TensorPos { left, right, .. } | Link::TensorNeg { left, right, .. } => {
                if *left == old {
                    *left = new;
                }
                if *right == old {
                    *right = new;
                }
            }
            Link::LolliPos { dom, cod, .. } | Link::LolliNeg { dom, cod, .. } => {
                if *dom == old {
                    *dom = new;
                }
                if *cod == old {
                    *cod = new;
                }
            }
            Link::Cut { pos, neg } => {
                if *pos == old {
                    *pos = new;
                }
                if *neg == old {
                    *neg = new;
                }
            }
        }
    }
    for c in &mut net.conclusions {
        if *c == old {
            *c = new;
        }
    }
}

fn is_atomic(t: &Type) -> bool {
    matches!(t, Type::Var(_))
}

/// One reduction step: identity cuts rewire, dual two-premise cuts split
/// componentwise, and non-atomic identity links expand.  Returns false
/// when the net is normal.
fn reduce_step(net: &mut ProofNet) -> Result<bool> {
    // Cut elimination first.
    for idx in 0..net.links.len() {
        let Link::Cut { pos, neg } = net.links[idx] else {
            continue;
        };
        let p_prod = producer(net, pos)
            .ok_or_else(|| Error::Other("cut operand has no producer".into()))?;
        let n_prod = producer(net, neg)
            .ok_or_else(|| Error::Other("cut operand has no producer".into()))?;
        // Identity rewiring.
        if let Link::Id {
            neg: ax_neg,
            pos: ax_pos,
        } = net.links[p_prod]
        {
            if ax_pos == pos {
                if ax_neg == neg {
                    return Err(Error::Other("closed identity loop in net".into()));
                }
                net.links.remove(idx.max(p_prod));
                net.links.remove(idx.min(p_prod));
                repoint(net, ax_neg, neg);
                return Ok(true);
            }
        }
        if let Link::Id {
            neg: ax_neg,
            pos: ax_pos,
        } = net.links[n_prod]
        {
            if ax_neg == neg {
                if ax_pos == pos {
                    return Err(Error::Other("closed identity loop in net".into()));
                }
                net.links.remove(idx.max(n_prod));
                net.links.remove(idx.min(n_prod));
                repoint(net, ax_pos, pos);
                return Ok(true);
            }
        }
        // Multiplicative steps between dual two-premise links.
        match (net.links[p_prod].clone(), net.links[n_prod].clone()) {
            (
                Link::TensorPos {
                    left: l1,
                    right: r1,
                    ..
                },
                Link::TensorNeg {
                    left: l2,
                    right: r2,
                    ..
                },
            ) => {
                let mut remove = [idx, p_prod, n_prod];
                remove.sort_unstable();
                for i in remove.iter().rev() {
                    net.links.remove(*i);
                }
                net.links.push(Link::Cut { pos: l1, neg: l2 });
                net.links.push(Link::Cut { pos: r1, neg: r2 });
                return Ok(true);
            }
            (
                Link::LolliPos {
                    dom: d1, cod: c1, ..
                },
                Link::LolliNeg {
                    dom: d2, cod: c2, ..
                },
            ) => {
                let mut remove = [idx, p_prod, n_prod];
                remove.sort_unstable();
                for i in remove.iter().rev() {
                    net.links.remove(*i);
                }
                net.links.push(Link::Cut { pos: d2, neg: d1 });
                net.links.push(Link::Cut { pos: c1, neg: c2 });
                return Ok(true);
            }
            _ => {
                return Err(Error::Other(
                    "cut between non-dual producers".into(),
                ))
            }
        }
    }
    // η-expansion of non-atomic identity links.
    for idx in 0..net.links.len() {
        let Link::Id { neg, pos } = net.links[idx] else {
            continue;
        };
        let formula = net.occs[pos].formula.clone();
        if is_atomic(&formula) {
            continue;
        }
        net.links.remove(idx);
        match formula {
            Type::Tensor(a, b) => {
                let a_neg = net.occ((*a).clone(), Polarity::Neg);
                let a_pos = net.occ((*a).clone(), Polarity::Pos);
                let b_neg = net.occ((*b).clone(), Polarity::Neg);
                let b_pos = net.occ((*b).clone(), Polarity::Pos);
                net.links.push(Link::Id {
                    neg: a_neg,
                    pos: a_pos,
                });
                net.links.push(Link::Id {
                    neg: b_neg,
                    pos: b_pos,
                });
                net.links.push(Link::TensorPos {
                    left: a_pos,
                    right: b_pos,
                    out: pos,
                });
                net.links.push(Link::TensorNeg {
                    left: a_neg,
                    right: b_neg,
                    out: neg,
                });
            }
            Type::Lolli(a, b) => {
                let a_neg = net.occ((*a).clone(), Polarity::Neg);
                let a_pos = net.occ((*a).clone(), Polarity::Pos);
                let b_neg = net.occ((*b).clone(), Polarity::Neg);
                let b_pos = net.occ((*b).clone(), Polarity::Pos);
                net.links.push(Link::Id {
                    neg: a_neg,
                    pos: a_pos,
                });
                net.links.push(Link::Id {
                    neg: b_neg,
                    pos: b_pos,
                });
                net.links.push(Link::LolliPos {
                    dom: a_neg,
                    cod: b_pos,
                    out: pos,
                });
                net.links.push(Link::LolliNeg {
                    dom: a_pos,
                    cod: b_neg,
                    out: neg,
                });
            }
            Type::Var(_) => unreachable!(),
        }
        return Ok(true);
    }
    Ok(false)
}

/// Reduce to the unique normal form: cut-free with atomic identity links.
pub fn reduce_net(net: &ProofNet) -> Result<ProofNet> {
    let mut cur = net.clone();
    let budget = crate::rewrite::step_budget();
    for _ in 0..budget {
        if !reduce_step(&mut cur)? {
            return Ok(cur);
        }
    }
    Err(Error::BudgetExceeded(budget))
}

// ---------------------------------------------------------------------------
// Equality
// ---------------------------------------------------------------------------

/// Canonical form of a normal net: the signed conclusion formulas plus
/// the identity wiring between leaf positions of the conclusion trees.
fn canonical_form(net: &ProofNet) -> Result<(Vec<(String, String)>, Vec<(String, String)>)> {
    let mut leaf_label: BTreeMap<OccId, String> = BTreeMap::new();
    let mut conclusions = Vec::new();
    for (ci, &c) in net.conclusions.iter().enumerate() {
        let sf = &net.occs[c];
        conclusions.push((sf.formula.to_string(), sf.polarity.sign().to_string()));
        label_tree(net, c, format!("{ci}"), &mut leaf_label)?;
    }
    let mut axioms = Vec::new();
    for l in &net.links {
        if let Link::Id { neg, pos } = l {
            let ln = leaf_label
                .get(neg)
                .ok_or_else(|| Error::Other("identity end outside conclusion trees".into()))?;
            let lp = leaf_label
                .get(pos)
                .ok_or_else(|| Error::Other("identity end outside conclusion trees".into()))?;
            axioms.push((ln.clone(), lp.clone()));
        }
    }
    axioms.sort();
    Ok((conclusions, axioms))
}

fn label_tree(
    net: &ProofNet,
    occ: OccId,
    label: String,
    leaf_label: &mut BTreeMap<OccId, String>,
) -> Result<()> {
    let prod = producer(net, occ).ok_or_else(|| Error::Other("occurrence has no producer".into()))?;
    match &net.links[prod] {
        Link::Id { .. } => {
            leaf_label.insert(occ, label);
            Ok(())
        }
        Link::TensorPos { left, right, .. }
        | Link::TensorNeg { left, right, .. } => {
            label_tree(net, *left, format!("{label}L"), leaf_label)?;
            label_tree(net, *right, format!("{label}R"), leaf_label)
        }
        Link::LolliPos { dom, cod, .. } | Link::LolliNeg { dom, cod, .. } => {
            label_tree(net, *dom, format!("{label}L"), leaf_label)?;
            label_tree(net, *cod, format!("{label}R"), leaf_label)
        }
        Link::Cut { .. } => Err(Error::Other("cut inside a normal net".into())),
    }
}

/// Are the normal forms of the two nets equal (a bijection of occurrences
/// preserving formulas, polarities, link structure and conclusions)?
pub fn net_equal(n1: &ProofNet, n2: &ProofNet) -> Result<bool> {
    let r1 = reduce_net(n1)?;
    let r2 = reduce_net(n2)?;
    Ok(canonical_form(&r1)? == canonical_form(&r2)?)
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

/// Render the net in Graphviz DOT with deterministic node ordering.
pub fn to_dot(net: &ProofNet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph proofnet {{");
    let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
    for (i, sf) in net.occs.iter().enumerate() {
        let live = net.links.iter().any(|l| match l {
            Link::Id { neg, pos } => *neg == i || *pos == i,
            Link::TensorPos { left, right, out }
            | Link::TensorNeg { left, right, out } => *left == i || *right == i || *out == i,
            Link::LolliPos { dom, cod, out } | Link::LolliNeg { dom, cod, out } => {
                *dom == i || *cod == i || *out == i
            }
            Link::Cut { pos, neg } => *pos == i || *neg == i,
        }) || net.conclusions.contains(&i);
        if live {
            let _ = writeln!(out, "  n{i} [label=\"{}^{}\"];", sf.formula, sf.polarity.sign());
        }
    }
    for l in &net.links {
        match l {
            Link::Id { neg, pos } => {
                let _ = writeln!(
                    out,
                    "  n{neg} -> n{pos} [label=\"ID\", dir=none, style=dashed];"
                );
            }
            Link::TensorPos { left, right, out: o } => {
                let _ = writeln!(out, "  n{left} -> n{o} [label=\"⊗+\"];");
                let _ = writeln!(out, "  n{right} -> n{o} [label=\"⊗+\"];");
            }
            Link::TensorNeg { left, right, out: o } => {
                let _ = writeln!(out, "  n{left} -> n{o} [label=\"⊗-\"];");
                let _ = writeln!(out, "  n{right} -> n{o} [label=\"⊗-\"];");
            }
            Link::LolliPos { dom, cod, out: o } => {
                let _ = writeln!(out, "  n{dom} -> n{o} [label=\"⊸+\"];");
                let _ = writeln!(out, "  n{cod} -> n{o} [label=\"⊸+\"];");
            }
            Link::LolliNeg { dom, cod, out: o } => {
                let _ = writeln!(out, "  n{dom} -> n{o} [label=\"⊸-\"];");
                let _ = writeln!(out, "  n{cod} -> n{o} [label=\"⊸-\"];");
            }
            Link::Cut { pos, neg } => {
                let _ = writeln!(
                    out,
                    "  n{pos} -> n{neg} [label=\"cut\", dir=none, style=bold];"
                );
            }
        }
    }
    for (i, c) in net.conclusions.iter().enumerate() {
        let _ = writeln!(out, "  c{i} [shape=plaintext, label=\"⊢\"];");
        let _ = writeln!(out, "  n{c} -> c{i} [style=dotted];");
    }
    let _ = writeln!(out, "}}");
    out
}

/// Compare two closed terms through their nets, translated at the most
/// general type both inhabit.  Terms with no common type are unequal.
pub fn terms_net_equal(t1: &Term, t2: &Term) -> Result<bool> {
    let p1 = types::principal_type_closed(t1)?;
    let p2 = types::principal_type_closed(t2)?;
    match types::common_instance(&p1, &p2) {
        None => Ok(false),
        Some(common) => net_equal(&translate_at(t1, &common)?, &translate_at(t2, &common)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite;
    use crate::syntax::{self, parse_term};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn identity_net_shape() {
        let net = translate(&p("fn x=>x")).unwrap();
        assert_eq!(net.conclusions.len(), 1);
        let concl = &net.occs[net.conclusions[0]];
        assert_eq!(concl.formula.to_string(), "'a -> 'a");
        assert_eq!(concl.polarity, Polarity::Pos);
        assert_eq!(net.links.len(), 2); // one ID, one ⊸+
        assert!(net
            .links
            .iter()
            .any(|l| matches!(l, Link::LolliPos { .. })));
    }

    #[test]
    fn beta_redex_net_equals_reduct() {
        let redex = p("(fn x=>x) (fn y=>y)");
        let reduct = p("fn y=>y");
        assert!(terms_net_equal(&redex, &reduct).unwrap());
    }

    #[test]
    fn pair_translation_uses_tensor() {
        let net = translate(&p("fn x=>fn y=>(x,y)")).unwrap();
        assert!(net
            .links
            .iter()
            .any(|l| matches!(l, Link::TensorPos { .. })));
    }

    #[test]
    fn true_false_nets_differ() {
        let tru = p("fn x=>fn y=>fn z=>z x y");
        let fls = p("fn x=>fn y=>fn z=>z y x");
        assert!(!terms_net_equal(&tru, &fls).unwrap());
        assert!(terms_net_equal(&tru, &tru).unwrap());
    }

    #[test]
    fn eta_expansion_identifies_eta_pairs() {
        // fn f => fn x => f x  vs  fn f => f
        let a = p("fn f=>fn x=>f x");
        let b = p("fn f=>f");
        assert!(terms_net_equal(&a, &b).unwrap());
    }

    #[test]
    fn commuted_lets_translate_equal() {
        let a = p("fn p=>fn f=>f (let val (x,y)=p in (x,y) end)");
        let b = p("fn p=>fn f=>let val (x,y)=p in f (x,y) end");
        assert!(terms_net_equal(&a, &b).unwrap());
    }

    #[test]
    fn normal_net_reduces_to_itself() {
        let net = translate(&p("fn x=>fn y=>fn z=>z x y")).unwrap();
        let r1 = reduce_net(&net).unwrap();
        let r2 = reduce_net(&r1).unwrap();
        assert!(net_equal(&r1, &r2).unwrap());
        assert_eq!(r1.cut_count(), 0);
    }

    #[test]
    fn preservation_along_reduction_steps() {
        let src = "fun True x y z = z x y;\
                   fun False x y z = z y x;\
                   fun I x = x;\
                   fun u_2 x1 x2 = x1 (x2 I);\
                   fun proj_1 x1 x2 = x2 I I u_2 x1;\
                   fun Not_HM x = x False True proj_1;";
        let prog = syntax::elaborate(&syntax::parse_program(src).unwrap()).unwrap();
        let term = syntax::apply_terms(
            prog.get("Not_HM").unwrap(),
            &[prog.get("True").unwrap().clone()],
        );
        let (_, steps) = rewrite::normalize_traced(&term).unwrap();
        let mut cur = term.clone();
        let mut checked = 0;
        for s in &steps {
            let next = rewrite::replay(&cur, std::slice::from_ref(s)).unwrap();
            assert!(
                terms_net_equal(&cur, &next).unwrap(),
                "net changed across {s}"
            );
            cur = next;
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn dot_export_is_deterministic() {
        let net = translate(&p("fn x=>x")).unwrap();
        assert_eq!(to_dot(&net), to_dot(&net));
        assert!(to_dot(&net).contains("'a -> 'a"));
    }
}

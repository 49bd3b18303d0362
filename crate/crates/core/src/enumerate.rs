//! Exhaustive enumeration of closed normal inhabitants of implicational
//! types.
//!
//! Generation is type-directed over η-long β-normal forms: introduce a
//! binder for every arrow, then pick a head whose codomain matches the
//! goal atom and split the remaining context among its arguments (each
//! variable consumed exactly once).  Linearity bounds the search, so for
//! small types the enumeration is complete at modest depth.  Results are
//! η-reduced and deduplicated, yielding distinct `→βηc`-normal forms.

use std::collections::BTreeSet;

use crate::rewrite;
use crate::syntax::{self, canonical_key, Name, Term};
use crate::types::Type;
use crate::{Error, Result};

struct Enumerator {
    supply: usize,
}

impl Enumerator {
    fn fresh(&mut self) -> Name {
        self.supply += 1;
        format!("n{}", self.supply)
    }

    /// All η-long normal terms of `ty` in context `ctx` (each context
    /// variable used exactly once), with at most `depth` layers of head
    /// elimination along any path.
    fn check(&mut self, ctx: &[(Name, Type)], ty: &Type, depth: usize) -> Vec<Term> {
        let (args, head) = ty.split_arrows();
        let Type::Var(atom) = head else {
            unreachable!("implicational types end in a variable");
        };
        let binders: Vec<(Name, Type)> = args
            .iter()
            .map(|a| (self.fresh(), (*a).clone()))
            .collect();
        let mut full: Vec<(Name, Type)> = ctx.to_vec();
        full.extend(binders.iter().cloned());
        let names: Vec<Name> = binders.iter().map(|(n, _)| n.clone()).collect();
        self.neutral(&full, atom, depth)
            .into_iter()
            .map(|b| Term::lams(&names, b))
            .collect()
    }

    fn neutral(&mut self, ctx: &[(Name, Type)], atom: &str, depth: usize) -> Vec<Term> {
        if depth == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..ctx.len() {
            let (head_name, head_ty) = &ctx[i];
            let (head_args, head_result) = head_ty.split_arrows();
            if !matches!(head_result, Type::Var(v) if v == atom) {
                continue;
            }
            let rest: Vec<(Name, Type)> = ctx
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| e.clone())
                .collect();
            let k = head_args.len();
            if k == 0 {
                if rest.is_empty() {
                    out.push(Term::var(head_name.clone()));
                }
                continue;
            }
            // Distribute every remaining variable to exactly one argument.
            let m = rest.len();
            let assignments = k_pow(k, m);
            for code in 0..assignments {
                let mut parts: Vec<Vec<(Name, Type)>> = vec![Vec::new(); k];
                let mut c = code;
                for item in &rest {
                    parts[(c % k as u64) as usize].push(item.clone());
                    c /= k as u64;
                }
                let arg_lists: Vec<Vec<Term>> = head_args
                    .iter()
                    .enumerate()
                    .map(|(j, aty)| self.check(&parts[j], aty, depth - 1))
                    .collect();
                if arg_lists.iter().any(|l| l.is_empty()) {
                    continue;
                }
                let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
                for list in &arg_lists {
                    let mut next = Vec::new();
                    for combo in &combos {
                        for item in list {
                            let mut c = combo.clone();
                            c.push(item.clone());
                            next.push(c);
                        }
                    }
                    combos = next;
                }
                for combo in combos {
                    out.push(Term::apps(Term::var(head_name.clone()), combo));
                }
            }
        }
        out
    }
}

fn k_pow(k: usize, m: usize) -> u64 {
    (k as u64).checked_pow(m as u32).unwrap_or(u64::MAX)
}

/// Enumerate the distinct closed `→βηc`-normal inhabitants of an
/// implicational type, up to `depth` layers of head elimination and an
/// optional size cap on the η-reduced normal form.
pub fn closed_normal_inhabitants(
    ty: &Type,
    depth: usize,
    max_size: Option<usize>,
) -> Result<Vec<Term>> {
    if ty.contains_tensor() {
        return Err(Error::NotImplicational(ty.to_string()));
    }
    let mut e = Enumerator { supply: 0 };
    let raw = e.check(&[], ty, depth);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in raw {
        let t = syntax::barendregt(&t);
        let nf = rewrite::normalize(&t)?;
        if let Some(cap) = max_size {
            if nf.size() > cap {
                continue;
            }
        }
        if seen.insert(canonical_key(&nf)) {
            out.push(nf);
        }
    }
    out.sort_by_key(|t| (t.size(), canonical_key(t)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse_term};
    use crate::types::{bool_hm, bool_seq, parse_type};

    #[test]
    fn bool_hm_has_exactly_two_inhabitants() {
        let terms = closed_normal_inhabitants(&bool_hm(), 6, None).unwrap();
        assert_eq!(terms.len(), 2);
        let tru = parse_term("fn x=>fn y=>fn z=>z x y").unwrap();
        let fls = parse_term("fn x=>fn y=>fn z=>z y x").unwrap();
        assert!(terms.iter().any(|t| alpha_eq(t, &tru)));
        assert!(terms.iter().any(|t| alpha_eq(t, &fls)));
    }

    #[test]
    fn bool_seq_has_exactly_two_inhabitants() {
        let terms = closed_normal_inhabitants(&bool_seq(), 6, None).unwrap();
        assert_eq!(terms.len(), 2);
        let tr = parse_term("fn x=>fn f=>fn g=>g (f x)").unwrap();
        let fl = parse_term("fn x=>fn f=>fn g=>f (g x)").unwrap();
        assert!(terms.iter().any(|t| alpha_eq(t, &tr)));
        assert!(terms.iter().any(|t| alpha_eq(t, &fl)));
    }

    #[test]
    fn identity_type_has_one_inhabitant() {
        let terms = closed_normal_inhabitants(&parse_type("'a -> 'a").unwrap(), 4, None).unwrap();
        assert_eq!(terms.len(), 1);
        assert!(alpha_eq(&terms[0], &parse_term("fn x=>x").unwrap()));
    }

    #[test]
    fn empty_type_has_no_inhabitants() {
        let terms = closed_normal_inhabitants(&parse_type("'a -> 'b").unwrap(), 5, None).unwrap();
        assert!(terms.is_empty());
    }

    #[test]
    fn tensor_type_rejected() {
        assert!(closed_normal_inhabitants(&parse_type("'a * 'a").unwrap(), 3, None).is_err());
    }
}

//! Random generation of linear terms, for property tests and sampling
//! suites (confluence, proof-net agreement).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Name, Term};
use crate::types;

/// Deterministic RNG for reproducible suites.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    supply: usize,
}

impl<'a, R: Rng> Gen<'a, R> {
    fn fresh(&mut self) -> Name {
        self.supply += 1;
        format!("g{}", self.supply)
    }

    /// Split a context randomly into two disjoint parts.
    fn split(&mut self, ctx: &[Name]) -> (Vec<Name>, Vec<Name>) {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for v in ctx {
            if self.rng.gen_bool(0.5) {
                l.push(v.clone());
            } else {
                r.push(v.clone());
            }
        }
        (l, r)
    }

    /// Build a linear term consuming exactly the variables of `ctx`.
    fn term(&mut self, ctx: &[Name], depth: usize) -> Term {
        if depth == 0 {
            return self.base(ctx);
        }
        if ctx.len() == 1 && self.rng.gen_bool(0.3) {
            return Term::var(ctx[0].clone());
        }
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let x = self.fresh();
                let mut inner: Vec<Name> = ctx.to_vec();
                inner.push(x.clone());
                Term::lam(x, self.term(&inner, depth - 1))
            }
            4..=5 => {
                let (l, r) = self.split(ctx);
                Term::app(self.term(&l, depth - 1), self.term(&r, depth - 1))
            }
            6..=7 => {
                let (l, r) = self.split(ctx);
                Term::pair(self.term(&l, depth - 1), self.term(&r, depth - 1))
            }
            _ => {
                // A let with a pair-shaped scrutinee stays typable far
                // more often than an arbitrary one.
                let (s, b) = self.split(ctx);
                let (sl, sr) = self.split(&s);
                let scrutinee = Term::pair(self.term(&sl, depth - 1), self.term(&sr, depth - 1));
                let x = self.fresh();
                let y = self.fresh();
                let mut inner: Vec<Name> = b.to_vec();
                inner.push(x.clone());
                inner.push(y.clone());
                Term::let_pair(x, y, scrutinee, self.term(&inner, depth - 1))
            }
        }
    }

    /// Depth exhausted: consume all of `ctx` with a fixed shape.
    fn base(&mut self, ctx: &[Name]) -> Term {
        match ctx.len() {
            0 => {
                let x = self.fresh();
                Term::lam(x.clone(), Term::var(x))
            }
            1 => Term::var(ctx[0].clone()),
            _ => {
                let rest = self.base(&ctx[1..]);
                Term::pair(Term::var(ctx[0].clone()), rest)
            }
        }
    }
}

/// A random closed linear term (not necessarily typable).
pub fn random_closed_linear(rng: &mut impl Rng, depth: usize) -> Term {
    let mut g = Gen { rng, supply: 0 };
    g.term(&[], depth)
}

/// A random closed linear *typable* term, by rejection sampling.
pub fn random_closed_typable(rng: &mut impl Rng, depth: usize) -> Term {
    loop {
        let t = random_closed_linear(rng, depth);
        if types::infer_principal_type(&t).is_ok() {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::linearity_check;

    #[test]
    fn generated_terms_are_linear() {
        let mut r = rng(7);
        for _ in 0..200 {
            let t = random_closed_linear(&mut r, 5);
            assert!(linearity_check(&t).is_ok(), "{t}");
        }
    }

    #[test]
    fn typable_sampling_terminates_and_typechecks() {
        let mut r = rng(11);
        for _ in 0..50 {
            let t = random_closed_typable(&mut r, 4);
            assert!(types::infer_principal_type(&t).is_ok());
        }
    }
}

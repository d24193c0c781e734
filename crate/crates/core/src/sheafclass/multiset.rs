//! Multisets of Dirichlet characters, the calculus behind descriptor
//! reduction and classification.
//!
//! A character is denoted by its index mod (q-1); a multiset is kept in
//! canonical sorted form so equality is structural. ρ[a] is the set of
//! characters of order dividing a (|a| of them once |a| divides q-1), and
//! ρ[1]^k the trivial character with multiplicity k.

use std::fmt;
use std::sync::Arc;

use crate::ffield::FieldContext;
use crate::{Error, Result};

/// A multiset of character indices mod (q-1).
#[derive(Clone)]
pub struct CharacterMultiset {
    ctx: Arc<FieldContext>,
    /// Sorted by index; multiplicities >= 1.
    items: Vec<(u64, u32)>,
}

impl PartialEq for CharacterMultiset {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.q() == other.ctx.q() && self.items == other.items
    }
}
impl Eq for CharacterMultiset {}

impl fmt::Debug for CharacterMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for &(j, m) in &self.items {
            for _ in 0..m {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{j}")?;
                first = false;
            }
        }
        write!(f, "}}")
    }
}

impl CharacterMultiset {
    pub fn empty(ctx: &Arc<FieldContext>) -> Self {
        CharacterMultiset {
            ctx: Arc::clone(ctx),
            items: Vec::new(),
        }
    }

    /// Builds from explicit indices (repeats allowed).
    pub fn from_indices(ctx: &Arc<FieldContext>, indices: &[u64]) -> Self {
        let ord = ctx.ord();
        let mut out = Self::empty(ctx);
        for &j in indices {
            out.insert(j % ord, 1);
        }
        out
    }

    /// `ρ[a]`: the |a| characters χ with χ^a = 1, each with multiplicity 1.
    /// Requires |a| to divide q - 1 so the set has full size.
    pub fn rho(ctx: &Arc<FieldContext>, a: i64) -> Result<Self> {
        let ord = ctx.ord();
        let n = a.unsigned_abs();
        if n == 0 || ord % n != 0 {
            return Err(Error::DivisibilityViolation { n: a, ord });
        }
        let step = ord / n;
        Ok(CharacterMultiset {
            ctx: Arc::clone(ctx),
            items: (0..n).map(|i| (i * step, 1)).collect(),
        })
    }

    /// `ρ[1]^k`: the trivial character with multiplicity k.
    pub fn trivial_power(ctx: &Arc<FieldContext>, k: u32) -> Self {
        if k == 0 {
            Self::empty(ctx)
        } else {
            CharacterMultiset {
                ctx: Arc::clone(ctx),
                items: vec![(0, k)],
            }
        }
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Total cardinality (sum of multiplicities).
    pub fn cardinality(&self) -> u32 {
        self.items.iter().map(|&(_, m)| m).sum()
    }

    pub fn multiplicity(&self, j: u64) -> u32 {
        let j = j % self.ctx.ord();
        self.items
            .binary_search_by_key(&j, |&(i, _)| i)
            .map(|p| self.items[p].1)
            .unwrap_or(0)
    }

    /// (index, multiplicity) pairs in sorted order.
    pub fn items(&self) -> &[(u64, u32)] {
        &self.items
    }

    /// Indices expanded with multiplicity.
    pub fn expanded(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.cardinality() as usize);
        for &(j, m) in &self.items {
            for _ in 0..m {
                out.push(j);
            }
        }
        out
    }

    fn insert(&mut self, j: u64, mult: u32) {
        match self.items.binary_search_by_key(&j, |&(i, _)| i) {
            Ok(p) => self.items[p].1 += mult,
            Err(p) => self.items.insert(p, (j, mult)),
        }
    }

    /// Multiset union (multiplicities add).
    pub fn union(&self, other: &Self) -> Self {
        debug_assert!(self.ctx.same_field(&other.ctx));
        let mut out = self.clone();
        for &(j, m) in &other.items {
            out.insert(j, m);
        }
        out
    }

    /// Multiset intersection (minimum of multiplicities).
    pub fn intersect(&self, other: &Self) -> Self {
        debug_assert!(self.ctx.same_field(&other.ctx));
        let mut out = Self::empty(&self.ctx);
        for &(j, m) in &self.items {
            let k = m.min(other.multiplicity(j));
            if k > 0 {
                out.insert(j, k);
            }
        }
        out
    }

    /// Multiset difference (multiplicities subtract, floored at 0).
    pub fn difference(&self, other: &Self) -> Self {
        debug_assert!(self.ctx.same_field(&other.ctx));
        let mut out = Self::empty(&self.ctx);
        for &(j, m) in &self.items {
            let k = m.saturating_sub(other.multiplicity(j));
            if k > 0 {
                out.insert(j, k);
            }
        }
        out
    }

    /// The multiset of inverse (conjugate) characters.
    pub fn inverse(&self) -> Self {
        let ord = self.ctx.ord();
        let mut out = Self::empty(&self.ctx);
        for &(j, m) in &self.items {
            out.insert((ord - j) % ord, m);
        }
        out
    }

    /// The twist η·S for a character index eta.
    pub fn twist(&self, eta: u64) -> Self {
        let ord = self.ctx.ord();
        let mut out = Self::empty(&self.ctx);
        for &(j, m) in &self.items {
            out.insert((j + eta) % ord, m);
        }
        out
    }

    /// Λ: the product of all members (index sum with multiplicity, mod q-1).
    pub fn lambda(&self) -> u64 {
        let ord = self.ctx.ord();
        self.items.iter().fold(0u64, |acc, &(j, m)| {
            (acc + j % ord * (m as u64 % ord)) % ord
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        let ctx = FieldContext::new(13).unwrap();
        // 2j ≡ 0 mod 12 has solutions {0, 6}.
        let r2 = CharacterMultiset::rho(&ctx, 2).unwrap();
        assert_eq!(r2.expanded(), vec![0, 6]);
        let r1 = CharacterMultiset::rho(&ctx, 1).unwrap();
        assert_eq!(r1.expanded(), vec![0]);
        // ρ[-a] = ρ[a].
        for a in [2i64, 3, 4, 6, 12] {
            assert_eq!(
                CharacterMultiset::rho(&ctx, a).unwrap(),
                CharacterMultiset::rho(&ctx, -a).unwrap()
            );
        }
        assert!(matches!(
            CharacterMultiset::rho(&ctx, 5),
            Err(Error::DivisibilityViolation { n: 5, ord: 12 })
        ));
    }

    #[test]
    fn multiset_algebra() {
        let ctx = FieldContext::new(13).unwrap();
        let a = CharacterMultiset::from_indices(&ctx, &[0, 0, 4, 6]);
        let b = CharacterMultiset::from_indices(&ctx, &[0, 4, 4, 8]);
        assert_eq!(a.cardinality(), 4);
        assert_eq!(a.intersect(&b).expanded(), vec![0, 4]);
        assert_eq!(a.difference(&b).expanded(), vec![0, 6]);
        assert_eq!(a.union(&b).cardinality(), 8);
        assert_eq!(a.inverse().expanded(), vec![0, 0, 6, 8]);
        assert_eq!(a.twist(6).expanded(), vec![0, 6, 6, 10]);
        assert_eq!(a.lambda(), (4 + 6) % 12);
    }
}

//! Linear permutations of `P̄₁ × P̄₁` induced by two-qubit Clifford actions.

use std::fmt;

use crate::pauli::PauliSymbol;

/// A bijection `Γ = (A, B)` on pairs of Pauli symbols.
///
/// `table[4u + v] = 4a + b` where `(a, b) = Γ(u, v)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairPermutation {
    table: [u8; 16],
}

#[inline]
fn idx(u: PauliSymbol, v: PauliSymbol) -> usize {
    u.index() * 4 + v.index()
}

#[inline]
fn split(code: u8) -> (PauliSymbol, PauliSymbol) {
    (PauliSymbol::new(code >> 2), PauliSymbol::new(code & 3))
}

impl PairPermutation {
    pub fn identity() -> Self {
        let mut table = [0u8; 16];
        for (k, t) in table.iter_mut().enumerate() {
            *t = k as u8;
        }
        PairPermutation { table }
    }

    pub fn swap() -> Self {
        Self::from_fn(|u, v| (v, u))
    }

    /// Builds a table from a function; returns `None` if the map is not a bijection.
    pub fn try_from_fn<F>(f: F) -> Option<Self>
    where
        F: Fn(PauliSymbol, PauliSymbol) -> (PauliSymbol, PauliSymbol),
    {
        let mut table = [0u8; 16];
        let mut seen = 0u16;
        for u in PauliSymbol::ALL {
            for v in PauliSymbol::ALL {
                let (a, b) = f(u, v);
                let code = (a.value() << 2) | b.value();
                seen |= 1 << code;
                table[idx(u, v)] = code;
            }
        }
        (seen == u16::MAX).then_some(PairPermutation { table })
    }

    /// Panics if `f` is not a bijection.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(PauliSymbol, PauliSymbol) -> (PauliSymbol, PauliSymbol),
    {
        Self::try_from_fn(f).expect("pair map is not a bijection")
    }

    #[inline]
    pub fn apply(&self, u: PauliSymbol, v: PauliSymbol) -> (PauliSymbol, PauliSymbol) {
        split(self.table[idx(u, v)])
    }

    /// First output component `A(u, v)`.
    #[inline]
    pub fn a(&self, u: PauliSymbol, v: PauliSymbol) -> PauliSymbol {
        PauliSymbol::new(self.table[idx(u, v)] >> 2)
    }

    /// Second output component `B(u, v)`.
    #[inline]
    pub fn b(&self, u: PauliSymbol, v: PauliSymbol) -> PauliSymbol {
        PauliSymbol::new(self.table[idx(u, v)] & 3)
    }

    /// Raw lookup on 4-bit codes `4u + v`.
    #[inline]
    pub fn apply_code(&self, code: usize) -> usize {
        self.table[code] as usize
    }

    pub fn table(&self) -> &[u8; 16] {
        &self.table
    }

    pub fn inverse(&self) -> Self {
        let mut table = [0u8; 16];
        for (k, &t) in self.table.iter().enumerate() {
            table[t as usize] = k as u8;
        }
        PairPermutation { table }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PairPermutation) -> Self {
        let mut table = [0u8; 16];
        for (k, t) in table.iter_mut().enumerate() {
            *t = self.table[other.table[k] as usize];
        }
        PairPermutation { table }
    }

    /// `Γ(x ⊕ y) = Γ(x) ⊕ Γ(y)` on all pairs, which also forces `Γ(0,0) = (0,0)`.
    pub fn is_linear(&self) -> bool {
        (0..16).all(|x| (0..16).all(|y| self.table[x ^ y] == self.table[x] ^ self.table[y]))
    }
}

impl fmt::Debug for PairPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.table.iter().map(|&c| {
                let (a, b) = split(c);
                format!("{a}{b}")
            }))
            .finish()
    }
}

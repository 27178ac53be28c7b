//! Finite matrix groups enumerated by breadth-first closure.
//!
//! Elements are interned into a flat residue arena and addressed by dense
//! [`ElementId`]s in BFS discovery order from the identity. Left
//! multiplication by each generator is tabulated during enumeration; all
//! other products go through the arena and the hash index.

use std::cmp::Ordering;
use std::fmt;
use std::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::{mul_raw, ModMatrix, Modulus};
use crate::validation::ValidationBudget;

/// Default element cap for [`generate_group`].
pub const DEFAULT_CAP: usize = 10_000_000;

/// Largest modulus whose residues fit the `u16` element arena.
pub const MAX_GROUP_MODULUS: u32 = u16::MAX as u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone)]
struct Interner {
    stride: usize,
    arena: Vec<u16>,
    table: HashTable<u32>,
    hasher: DefaultHashBuilder,
}

impl Interner {
    fn new(stride: usize) -> Self {
        Interner {
            stride,
            arena: Vec::new(),
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
        }
    }

    fn len(&self) -> usize {
        self.arena.len() / self.stride
    }

    #[inline]
    fn slice(&self, id: u32) -> &[u16] {
        let s = id as usize * self.stride;
        &self.arena[s..s + self.stride]
    }

    fn find(&self, entries: &[u16]) -> Option<u32> {
        let hash = self.hasher.hash_one(entries);
        let stride = self.stride;
        let arena = &self.arena;
        self.table
            .find(hash, |&id| {
                &arena[id as usize * stride..(id as usize + 1) * stride] == entries
            })
            .copied()
    }

    /// Returns `(id, newly_inserted)`.
    fn intern(&mut self, entries: &[u16], cap: usize) -> Result<(u32, bool)> {
        if let Some(id) = self.find(entries) {
            return Ok((id, false));
        }
        let id = self.len();
        if id >= cap {
            return Err(Error::Capacity { found: id, cap });
        }
        let id = id as u32;
        self.arena.extend_from_slice(entries);
        let hash = self.hasher.hash_one(entries);
        let (stride, arena, hasher) = (self.stride, &self.arena, &self.hasher);
        self.table.insert_unique(hash, id, |&other| {
            hasher.hash_one(&arena[other as usize * stride..(other as usize + 1) * stride])
        });
        Ok((id, true))
    }
}

/// An enumerated, immutable finite matrix group.
#[derive(Clone)]
pub struct FiniteGroup {
    dim: usize,
    modulus: Modulus,
    interner: Interner,
    /// Generators closed under inversion (the BFS move set).
    generators: Vec<ElementId>,
    generator_inverse: Vec<usize>,
    /// `left[s][x] = generators[s] * x`.
    left: Vec<Vec<ElementId>>,
    symplectic: bool,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("dim", &self.dim)
            .field("modulus", &self.modulus.value())
            .field("order", &self.order())
            .field("generators", &self.generators.len())
            .finish()
    }
}

/// Enumerate the group generated by `gens` (closed under products and
/// inverses) by BFS from the identity.
pub fn generate_group(gens: &[ModMatrix], cap: usize) -> Result<FiniteGroup> {
    let first = gens
        .first()
        .ok_or_else(|| Error::Structural("at least one generator is required".into()))?;
    let (dim, modulus) = (first.dim(), first.modulus());
    if modulus.value() > MAX_GROUP_MODULUS {
        return Err(Error::Structural(format!(
            "modulus {modulus} exceeds the supported maximum {MAX_GROUP_MODULUS}"
        )));
    }
    for g in gens {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: g.dim(),
            });
        }
        if g.modulus() != modulus {
            return Err(Error::ModulusMismatch {
                left: modulus.value(),
                right: g.modulus().value(),
            });
        }
    }

    // Symmetric move set, deduplicated in first-seen order.
    let mut moves: Vec<ModMatrix> = Vec::new();
    for g in gens {
        let inv = g.inverse().map_err(|e| match e {
            Error::Singular { det, modulus } => Error::Structural(format!(
                "generator {g} is not invertible over Z_{modulus} (det = {det})"
            )),
            other => other,
        })?;
        for candidate in [g.clone(), inv] {
            if !moves.contains(&candidate) {
                moves.push(candidate);
            }
        }
    }
    let generator_inverse: Vec<usize> = moves
        .iter()
        .map(|s| {
            let inv = s.inverse().expect("checked invertible");
            moves
                .iter()
                .position(|t| *t == inv)
                .expect("move set is symmetric")
        })
        .collect();
    let raw_moves: Vec<Vec<u16>> = moves.iter().map(to_raw).collect();
    let symplectic = moves.iter().all(ModMatrix::is_symplectic);

    let stride = dim * dim;
    let m = modulus.value();
    let mut interner = Interner::new(stride);
    let identity = ModMatrix::identity(dim, modulus)?;
    interner.intern(&to_raw(&identity), cap.max(1))?;

    let mut left: Vec<Vec<ElementId>> = vec![Vec::new(); moves.len()];
    let mut buf = vec![0u16; stride];
    let mut cur = vec![0u16; stride];
    let mut head = 0usize;
    while head < interner.len() {
        cur.copy_from_slice(interner.slice(head as u32));
        for (s, mv) in raw_moves.iter().enumerate() {
            mul_raw(mv, &cur, dim, m, &mut buf);
            let (id, _) = interner.intern(&buf, cap)?;
            left[s].push(ElementId(id));
        }
        head += 1;
    }

    let generators = (0..moves.len()).map(|s| left[s][0]).collect();
    Ok(FiniteGroup {
        dim,
        modulus,
        interner,
        generators,
        generator_inverse,
        left,
        symplectic,
    })
}

fn to_raw(m: &ModMatrix) -> Vec<u16> {
    m.entries().iter().map(|&e| e as u16).collect()
}

impl FiniteGroup {
    #[inline]
    pub fn order(&self) -> usize {
        self.interner.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// The identity is always the first discovered element.
    #[inline]
    pub fn identity(&self) -> ElementId {
        ElementId(0)
    }

    /// True when every generator (hence every element) is symplectic.
    pub fn is_symplectic(&self) -> bool {
        self.symplectic
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = ElementId> {
        (0..self.order() as u32).map(ElementId)
    }

    /// Generator set, closed under inversion.
    pub fn generators(&self) -> &[ElementId] {
        &self.generators
    }

    /// Index (into [`generators`](Self::generators)) of the inverse of generator `s`.
    pub fn generator_inverse(&self, s: usize) -> usize {
        self.generator_inverse[s]
    }

    /// `generators[s] * x` from the precomputed table.
    #[inline]
    pub fn left_mul(&self, s: usize, x: ElementId) -> ElementId {
        self.left[s][x.index()]
    }

    #[inline]
    pub fn raw(&self, id: ElementId) -> &[u16] {
        self.interner.slice(id.0)
    }

    pub fn element(&self, id: ElementId) -> ModMatrix {
        let entries = self.raw(id).iter().map(|&e| e as u32).collect();
        ModMatrix::from_raw(self.dim, self.modulus, entries)
    }

    pub fn contains(&self, id: ElementId) -> bool {
        id.index() < self.order()
    }

    pub fn index_of(&self, m: &ModMatrix) -> Option<ElementId> {
        if m.dim() != self.dim || m.modulus() != self.modulus {
            return None;
        }
        self.index_of_raw(&to_raw(m))
    }

    pub fn index_of_raw(&self, entries: &[u16]) -> Option<ElementId> {
        self.interner.find(entries).map(ElementId)
    }

    /// Resolve a canonical key to its element, if present.
    pub fn lookup_key(&self, key: &[u8]) -> Option<ElementId> {
        let m = ModMatrix::from_canonical_key(key).ok()?;
        self.index_of(&m)
    }

    pub fn canonical_key(&self, id: ElementId) -> Vec<u8> {
        self.element(id).canonical_key()
    }

    /// Byte-lexicographic comparison of canonical keys without allocating.
    pub fn key_cmp(&self, a: ElementId, b: ElementId) -> Ordering {
        let width = self.modulus.key_width();
        for (&x, &y) in self.raw(a).iter().zip(self.raw(b)) {
            let (xb, yb) = ((x as u32).to_le_bytes(), (y as u32).to_le_bytes());
            match xb[..width].cmp(&yb[..width]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// Product `a * b`.
    pub fn mul(&self, a: ElementId, b: ElementId) -> Result<ElementId> {
        let mut buf = vec![0u16; self.dim * self.dim];
        self.mul_into(a, b, &mut buf)
    }

    /// Product `a * b` using a caller-supplied scratch buffer.
    #[inline]
    pub fn mul_into(&self, a: ElementId, b: ElementId, buf: &mut [u16]) -> Result<ElementId> {
        mul_raw(
            self.raw(a),
            self.raw(b),
            self.dim,
            self.modulus.value(),
            buf,
        );
        self.index_of_raw(buf).ok_or_else(|| Error::Integrity {
            element: a,
            reason: format!("product with {b} is not in the group"),
        })
    }

    pub fn inv(&self, a: ElementId) -> Result<ElementId> {
        let inv = self.element(a).inverse()?;
        self.index_of(&inv).ok_or_else(|| Error::Integrity {
            element: a,
            reason: "inverse is not in the group".into(),
        })
    }

    /// Element id of `-I`, if the group contains it.
    pub fn negative_identity(&self) -> Option<ElementId> {
        let neg = ModMatrix::identity(self.dim, self.modulus).ok()?.scale(-1);
        self.index_of(&neg)
    }

    /// Check closure under products: every pair when the group is small,
    /// otherwise random pairs drawn from the budget's seeded stream.
    pub fn verify_closure(&self, budget: &ValidationBudget) -> Result<()> {
        let n = self.order();
        let mut buf = vec![0u16; self.dim * self.dim];
        if n <= budget.exhaustive_limit {
            for a in self.ids() {
                for b in self.ids() {
                    self.mul_into(a, b, &mut buf)?;
                }
            }
        } else {
            let mut rng = budget.rng();
            for _ in 0..budget.random_samples {
                let a = ElementId(rng.random_range(0..n as u32));
                let b = ElementId(rng.random_range(0..n as u32));
                self.mul_into(a, b, &mut buf)?;
            }
        }
        for (s, &g) in self.generators.iter().enumerate() {
            let inv = self.generators[self.generator_inverse[s]];
            if !self.mul(g, inv)?.eq(&self.identity()) {
                return Err(Error::Integrity {
                    element: g,
                    reason: "generator inverse bookkeeping is inconsistent".into(),
                });
            }
        }
        Ok(())
    }
}

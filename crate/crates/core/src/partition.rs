//! Twisted and ordinary conjugacy classes as orbits of a group action.
//!
//! The twisted classes of `phi` are the orbits of `a . x = a x phi(a)^-1`.
//! Orbits are found by BFS from each undiscovered element, moving only by
//! generators (the move set is closed under inversion). Roots are taken in
//! ascending [`ElementId`] order, so class ids are deterministic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automorphism::{Automorphism, Descriptor};
use crate::error::{Error, Result};
use crate::group::{ElementId, FiniteGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl ClassId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionKind {
    Ordinary,
    Twisted(Descriptor),
}

/// Every group element labelled by its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<ClassId>,
    representatives: Vec<ElementId>,
    class_sizes: Vec<usize>,
    kind: PartitionKind,
}

const UNSEEN: u32 = u32::MAX;

/// Orbits of `a . x = a x phi(a)^-1`.
pub fn twisted_classes(g: &FiniteGroup, phi: &Automorphism) -> Result<Partition> {
    let kind = PartitionKind::Twisted(phi.descriptor().clone());
    orbit_partition(g, phi, kind)
}

/// Ordinary conjugacy classes.
pub fn ordinary_classes(g: &FiniteGroup) -> Result<Partition> {
    orbit_partition(g, &Automorphism::identity(g), PartitionKind::Ordinary)
}

fn orbit_partition(g: &FiniteGroup, phi: &Automorphism, kind: PartitionKind) -> Result<Partition> {
    let n = g.order();
    if phi.images().len() != n {
        return Err(Error::Structural(format!(
            "automorphism table has {} entries, group has {n} elements",
            phi.images().len()
        )));
    }
    // phi(s)^-1 = phi(s^-1), and s^-1 is itself a generator.
    let right: Vec<ElementId> = (0..g.generators().len())
        .map(|s| phi.apply(g.generators()[g.generator_inverse(s)]))
        .collect();

    let mut class_of = vec![UNSEEN; n];
    let mut representatives = Vec::new();
    let mut class_sizes = Vec::new();
    let mut stack: Vec<ElementId> = Vec::new();
    let mut buf = vec![0u16; g.dim() * g.dim()];
    for root in g.ids() {
        if class_of[root.index()] != UNSEEN {
            continue;
        }
        let class = representatives.len() as u32;
        class_of[root.index()] = class;
        stack.push(root);
        let mut rep = root;
        let mut size = 0usize;
        while let Some(x) = stack.pop() {
            size += 1;
            if g.key_cmp(x, rep).is_lt() {
                rep = x;
            }
            for (s, &r) in right.iter().enumerate() {
                let sx = g.left_mul(s, x);
                let y = g.mul_into(sx, r, &mut buf).map_err(|_| Error::Integrity {
                    element: x,
                    reason: "twisted action leaves the group".into(),
                })?;
                if class_of[y.index()] == UNSEEN {
                    class_of[y.index()] = class;
                    stack.push(y);
                }
            }
        }
        representatives.push(rep);
        class_sizes.push(size);
    }
    Ok(Partition {
        class_of: class_of.into_iter().map(ClassId).collect(),
        representatives,
        class_sizes,
        kind,
    })
}

impl Partition {
    /// Build a partition from explicit labels; classes are renumbered by
    /// first appearance and representatives chosen by minimal key.
    pub fn from_labels(
        g: &FiniteGroup,
        labels: &[usize],
        kind: PartitionKind,
    ) -> Result<Partition> {
        if labels.len() != g.order() {
            return Err(Error::Structural(
                "label table does not match group order".into(),
            ));
        }
        let mut remap = std::collections::HashMap::new();
        let mut class_of = Vec::with_capacity(labels.len());
        let mut representatives: Vec<ElementId> = Vec::new();
        let mut class_sizes = Vec::new();
        for (x, &l) in labels.iter().enumerate() {
            let x = ElementId(x as u32);
            let next = remap.len() as u32;
            let c = *remap.entry(l).or_insert(next);
            if c as usize == representatives.len() {
                representatives.push(x);
                class_sizes.push(0);
            }
            class_sizes[c as usize] += 1;
            if g.key_cmp(x, representatives[c as usize]).is_lt() {
                representatives[c as usize] = x;
            }
            class_of.push(ClassId(c));
        }
        Ok(Partition {
            class_of,
            representatives,
            class_sizes,
            kind,
        })
    }

    /// Number of classes; for a twisted partition this is the Reidemeister number.
    pub fn class_count(&self) -> usize {
        self.representatives.len()
    }

    #[inline]
    pub fn class_of(&self, x: ElementId) -> ClassId {
        self.class_of[x.index()]
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.class_of
    }

    pub fn representative(&self, c: ClassId) -> ElementId {
        self.representatives[c.index()]
    }

    pub fn representatives(&self) -> &[ElementId] {
        &self.representatives
    }

    pub fn class_size(&self, c: ClassId) -> usize {
        self.class_sizes[c.index()]
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn kind(&self) -> &PartitionKind {
        &self.kind
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> {
        (0..self.class_count() as u32).map(ClassId)
    }

    /// Members of every class, each list in ascending id order.
    pub fn members(&self) -> Vec<Vec<ElementId>> {
        let mut out: Vec<Vec<ElementId>> = self
            .class_sizes
            .iter()
            .map(|&s| Vec::with_capacity(s))
            .collect();
        for (x, c) in self.class_of.iter().enumerate() {
            out[c.index()].push(ElementId(x as u32));
        }
        out
    }

    /// Class labels of `subset`, in input order.
    pub fn restrict_to(&self, subset: &[ElementId]) -> Result<Vec<(ElementId, ClassId)>> {
        subset
            .iter()
            .map(|&x| {
                self.class_of
                    .get(x.index())
                    .map(|&c| (x, c))
                    .ok_or_else(|| Error::Structural(format!("unknown element {x}")))
            })
            .collect()
    }

    /// True when the two partitions group elements identically, ignoring label names.
    pub fn same_blocks(&self, other: &Partition) -> bool {
        if self.class_of.len() != other.class_of.len() || self.class_count() != other.class_count()
        {
            return false;
        }
        let mut map = vec![UNSEEN; self.class_count()];
        for (a, b) in self.class_of.iter().zip(&other.class_of) {
            match map[a.index()] {
                UNSEEN => map[a.index()] = b.0,
                v if v != b.0 => return false,
                _ => {}
            }
        }
        true
    }
}

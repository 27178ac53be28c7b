//! Automorphisms of an enumerated group, stored as permutations of the
//! element table, and `{+1, -1}`-valued characters.
//!
//! Two automorphisms are equal when they permute the element table the same
//! way, regardless of how they were described: conjugation by
//! `diag(1, -1, 1, -1, ...)` and the entrywise sign flip compare equal.

use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{ElementId, FiniteGroup};
use crate::modring::ModMatrix;
use crate::validation::ValidationBudget;

/// Report-embeddable description of how an automorphism was built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    Identity,
    SignFlip,
    Inner {
        conjugator: Vec<u32>,
    },
    CharacterTwist {
        character: String,
        base: Box<Descriptor>,
    },
    Compose {
        outer: Box<Descriptor>,
        inner: Box<Descriptor>,
    },
}

impl Descriptor {
    /// Short human-readable form, e.g. `sign_flip` or `inner(0,1,6,0)`.
    pub fn label(&self) -> String {
        match self {
            Descriptor::Identity => "identity".into(),
            Descriptor::SignFlip => "sign_flip".into(),
            Descriptor::Inner { conjugator } => format!("inner({})", join(conjugator)),
            Descriptor::CharacterTwist { character, base } => {
                format!("twist[{character}]({})", base.label())
            }
            Descriptor::Compose { outer, inner } => {
                format!("{}*{}", outer.label(), inner.label())
            }
        }
    }
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// A validated automorphism of a specific [`FiniteGroup`].
#[derive(Debug)]
pub struct Automorphism {
    descriptor: Descriptor,
    images: Vec<ElementId>,
    order: OnceLock<u64>,
}

impl Clone for Automorphism {
    fn clone(&self) -> Self {
        let order = OnceLock::new();
        if let Some(&o) = self.order.get() {
            let _ = order.set(o);
        }
        Automorphism {
            descriptor: self.descriptor.clone(),
            images: self.images.clone(),
            order,
        }
    }
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Eq for Automorphism {}

impl Automorphism {
    pub fn identity(g: &FiniteGroup) -> Automorphism {
        Automorphism {
            descriptor: Descriptor::Identity,
            images: g.ids().collect(),
            order: OnceLock::new(),
        }
    }

    /// Entrywise `(-1)^(i+j)`, i.e. conjugation by `diag(1, -1, 1, -1, ...)`.
    pub fn sign_flip(g: &FiniteGroup, budget: &ValidationBudget) -> Result<Automorphism> {
        let images = evaluate(g, |m| m.sign_flip(), "sign flip image")?;
        Automorphism::from_images(g, Descriptor::SignFlip, images, budget)
    }

    /// Conjugation `x -> u x u^-1` by a matrix `u` normalizing the group.
    pub fn inner(
        g: &FiniteGroup,
        u: &ModMatrix,
        budget: &ValidationBudget,
    ) -> Result<Automorphism> {
        if u.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                left: g.dim(),
                right: u.dim(),
            });
        }
        if u.modulus() != g.modulus() {
            return Err(Error::ModulusMismatch {
                left: g.modulus().value(),
                right: u.modulus().value(),
            });
        }
        let u_inv = u.inverse()?;
        let conj = |m: &ModMatrix| u.mul(m).and_then(|x| x.mul(&u_inv)).expect("conforming");
        for &s in g.generators() {
            if g.index_of(&conj(&g.element(s))).is_none() {
                return Err(Error::Integrity {
                    element: s,
                    reason: format!("conjugate of generator by {u} escapes the group"),
                });
            }
        }
        let images = evaluate(g, conj, "conjugate")?;
        let descriptor = Descriptor::Inner {
            conjugator: u.entries().to_vec(),
        };
        Automorphism::from_images(g, descriptor, images, budget)
    }

    /// Conjugation by a group element. Always an automorphism, so no
    /// pair validation is run.
    pub fn inner_by(g: &FiniteGroup, theta: ElementId) -> Result<Automorphism> {
        if !g.contains(theta) {
            return Err(Error::Structural(format!("unknown element {theta}")));
        }
        let theta_inv = g.inv(theta)?;
        let mut buf = vec![0u16; g.dim() * g.dim()];
        let mut images = Vec::with_capacity(g.order());
        for x in g.ids() {
            let tx = g.mul_into(theta, x, &mut buf)?;
            images.push(g.mul_into(tx, theta_inv, &mut buf)?);
        }
        Ok(Automorphism {
            descriptor: Descriptor::Inner {
                conjugator: g.element(theta).entries().to_vec(),
            },
            images,
            order: OnceLock::new(),
        })
    }

    /// `g -> chi(g) * base(g)`, where `chi(g) = -1` multiplies by `-I`.
    pub fn character_twist(
        g: &FiniteGroup,
        chi: &Character,
        base: &Automorphism,
        budget: &ValidationBudget,
    ) -> Result<Automorphism> {
        let neg = g
            .negative_identity()
            .ok_or_else(|| Error::UnsupportedTwist("-I is not an element of the group".into()))?;
        check_len(g, chi.values.len())?;
        check_len(g, base.images.len())?;
        let mut buf = vec![0u16; g.dim() * g.dim()];
        let mut images = Vec::with_capacity(g.order());
        for x in g.ids() {
            let b = base.apply(x);
            images.push(if chi.value(x) == 1 {
                b
            } else {
                g.mul_into(neg, b, &mut buf)?
            });
        }
        let descriptor = Descriptor::CharacterTwist {
            character: chi.digest(),
            base: Box::new(base.descriptor.clone()),
        };
        Automorphism::from_images(g, descriptor, images, budget)
    }

    /// `x -> outer(inner(x))`.
    pub fn compose(outer: &Automorphism, inner: &Automorphism) -> Result<Automorphism> {
        if outer.images.len() != inner.images.len() {
            return Err(Error::Structural(
                "cannot compose automorphisms of different groups".into(),
            ));
        }
        Ok(Automorphism {
            descriptor: Descriptor::Compose {
                outer: Box::new(outer.descriptor.clone()),
                inner: Box::new(inner.descriptor.clone()),
            },
            images: inner.images.iter().map(|&x| outer.apply(x)).collect(),
            order: OnceLock::new(),
        })
    }

    /// Wrap an explicit image table after validating bijectivity and the
    /// homomorphism property within `budget`.
    pub fn from_images(
        g: &FiniteGroup,
        descriptor: Descriptor,
        images: Vec<ElementId>,
        budget: &ValidationBudget,
    ) -> Result<Automorphism> {
        check_len(g, images.len())?;
        let mut seen = vec![false; g.order()];
        for (x, &y) in images.iter().enumerate() {
            if !g.contains(y) || std::mem::replace(&mut seen[y.index()], true) {
                return Err(Error::Integrity {
                    element: ElementId(x as u32),
                    reason: "map is not a permutation of the element table".into(),
                });
            }
        }
        if images[g.identity().index()] != g.identity() {
            return Err(Error::Integrity {
                element: g.identity(),
                reason: "identity is not fixed".into(),
            });
        }
        let mut buf = vec![0u16; g.dim() * g.dim()];
        let mut check = |a: ElementId, b: ElementId| -> Result<()> {
            let ab = g.mul_into(a, b, &mut buf)?;
            let rhs = g.mul_into(images[a.index()], images[b.index()], &mut buf)?;
            if images[ab.index()] != rhs {
                return Err(Error::Integrity {
                    element: a,
                    reason: format!("homomorphism property fails against {b}"),
                });
            }
            Ok(())
        };
        for_pairs(g, budget, &mut check)?;
        Ok(Automorphism {
            descriptor,
            images,
            order: OnceLock::new(),
        })
    }

    /// The image of each element under the matrix-level map `f`, unvalidated.
    pub fn images_of(
        g: &FiniteGroup,
        f: impl Fn(&ModMatrix) -> ModMatrix,
    ) -> Result<Vec<ElementId>> {
        evaluate(g, f, "image")
    }

    #[inline]
    pub fn apply(&self, x: ElementId) -> ElementId {
        self.images[x.index()]
    }

    pub fn images(&self) -> &[ElementId] {
        &self.images
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, x)| x.index() == i)
    }

    /// Least `k >= 1` with `phi^k = id`: the lcm of the permutation's cycle lengths.
    pub fn order(&self) -> u64 {
        *self.order.get_or_init(|| {
            let n = self.images.len();
            let mut visited = vec![false; n];
            let mut acc = 1u64;
            for start in 0..n {
                if visited[start] {
                    continue;
                }
                let mut len = 0u64;
                let mut x = start;
                while !visited[x] {
                    visited[x] = true;
                    x = self.images[x].index();
                    len += 1;
                }
                acc = lcm(acc, len);
            }
            acc
        })
    }

    /// Image table of `phi^k`.
    pub fn power(&self, k: u64) -> Vec<ElementId> {
        let k = k % self.order();
        let mut out: Vec<ElementId> = (0..self.images.len() as u32).map(ElementId).collect();
        for _ in 0..k {
            for x in out.iter_mut() {
                *x = self.images[x.index()];
            }
        }
        out
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / crate::modring::gcd(a, b) * b
}

fn check_len(g: &FiniteGroup, len: usize) -> Result<()> {
    if len != g.order() {
        return Err(Error::Structural(format!(
            "table of length {len} does not match group order {}",
            g.order()
        )));
    }
    Ok(())
}

fn evaluate(
    g: &FiniteGroup,
    f: impl Fn(&ModMatrix) -> ModMatrix,
    what: &str,
) -> Result<Vec<ElementId>> {
    g.ids()
        .map(|x| {
            g.index_of(&f(&g.element(x)))
                .ok_or_else(|| Error::Integrity {
                    element: x,
                    reason: format!("{what} leaves the group"),
                })
        })
        .collect()
}

/// Run `check` on all pairs, or on generator pairs plus seeded random pairs.
fn for_pairs(
    g: &FiniteGroup,
    budget: &ValidationBudget,
    check: &mut impl FnMut(ElementId, ElementId) -> Result<()>,
) -> Result<()> {
    let n = g.order();
    if n <= budget.exhaustive_limit {
        for a in g.ids() {
            for b in g.ids() {
                check(a, b)?;
            }
        }
        return Ok(());
    }
    for &a in g.generators() {
        for &b in g.generators() {
            check(a, b)?;
        }
    }
    let mut rng = budget.rng();
    for _ in 0..budget.random_samples {
        let a = ElementId(rng.random_range(0..n as u32));
        let b = ElementId(rng.random_range(0..n as u32));
        check(a, b)?;
    }
    Ok(())
}

/// A homomorphism from the group to `{+1, -1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    values: Vec<i8>,
}

impl Character {
    pub fn trivial(g: &FiniteGroup) -> Character {
        Character {
            values: vec![1; g.order()],
        }
    }

    pub fn from_values(
        g: &FiniteGroup,
        values: Vec<i8>,
        budget: &ValidationBudget,
    ) -> Result<Character> {
        check_len(g, values.len())?;
        if let Some(x) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::Integrity {
                element: ElementId(x as u32),
                reason: "character value is not +1 or -1".into(),
            });
        }
        if values[g.identity().index()] != 1 {
            return Err(Error::Integrity {
                element: g.identity(),
                reason: "character is -1 on the identity".into(),
            });
        }
        let mut buf = vec![0u16; g.dim() * g.dim()];
        let mut check = |a: ElementId, b: ElementId| -> Result<()> {
            let ab = g.mul_into(a, b, &mut buf)?;
            if values[ab.index()] != values[a.index()] * values[b.index()] {
                return Err(Error::Integrity {
                    element: a,
                    reason: format!("character is not multiplicative against {b}"),
                });
            }
            Ok(())
        };
        for_pairs(g, budget, &mut check)?;
        Ok(Character { values })
    }

    pub fn from_fn(
        g: &FiniteGroup,
        f: impl Fn(&ModMatrix) -> i8,
        budget: &ValidationBudget,
    ) -> Result<Character> {
        let values = g.ids().map(|x| f(&g.element(x))).collect();
        Character::from_values(g, values, budget)
    }

    /// Extend values given on generators (indices into
    /// [`FiniteGroup::generators`]) to the whole group, checking
    /// `chi(s x) = chi(s) chi(x)` for every generator `s` and element `x`.
    /// That covers every product, so the result is a character or an error.
    pub fn from_generator_values(g: &FiniteGroup, gen_values: &[i8]) -> Result<Character> {
        if gen_values.len() != g.generators().len() {
            return Err(Error::Structural(format!(
                "expected {} generator values, got {}",
                g.generators().len(),
                gen_values.len()
            )));
        }
        if gen_values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::Structural(
                "character values must be +1 or -1".into(),
            ));
        }
        let mut values = vec![0i8; g.order()];
        values[g.identity().index()] = 1;
        for x in g.ids() {
            let vx = values[x.index()];
            debug_assert_ne!(vx, 0, "BFS order reaches every element from an earlier one");
            for (s, &vs) in gen_values.iter().enumerate() {
                let y = g.left_mul(s, x);
                let want = vs * vx;
                match values[y.index()] {
                    0 => values[y.index()] = want,
                    v if v != want => {
                        return Err(Error::Integrity {
                            element: y,
                            reason: "generator values do not extend to a character".into(),
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(Character { values })
    }

    /// Parse `key=+1` / `key=-1` lines, one per generator, where `key` is the
    /// hex canonical key of a generator matrix. Inverses inherit the value of
    /// the generator they invert. Blank lines and `#` comments are ignored.
    pub fn parse_generator_file(g: &FiniteGroup, text: &str) -> Result<Character> {
        let mut gen_values: Vec<i8> = vec![0; g.generators().len()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=+1 or key=-1"))?;
            let value: i8 = match value.trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                _ => return Err(err("value must be +1 or -1")),
            };
            let key = hex::decode(key.trim()).map_err(|_| err("key is not hex"))?;
            let id = g
                .lookup_key(&key)
                .ok_or_else(|| err("key is not a group element"))?;
            let s = g
                .generators()
                .iter()
                .position(|&x| x == id)
                .ok_or_else(|| err("key is not a generator"))?;
            for idx in [s, g.generator_inverse(s)] {
                if gen_values[idx] != 0 && gen_values[idx] != value {
                    return Err(err("conflicting value for generator"));
                }
                gen_values[idx] = value;
            }
        }
        if let Some(s) = gen_values.iter().position(|&v| v == 0) {
            return Err(Error::Parse(format!(
                "no value given for generator {}",
                hex::encode(g.canonical_key(g.generators()[s]))
            )));
        }
        Character::from_generator_values(g, &gen_values)
    }

    #[inline]
    pub fn value(&self, x: ElementId) -> i8 {
        self.values[x.index()]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&v| v == 1)
    }

    pub fn kernel(&self) -> Vec<ElementId> {
        (0..self.values.len() as u32)
            .map(ElementId)
            .filter(|&x| self.value(x) == 1)
            .collect()
    }

    /// First 16 hex digits of SHA-256 over the value table (`+` / `-` bytes).
    pub fn digest(&self) -> String {
        let bytes: Vec<u8> = self
            .values
            .iter()
            .map(|&v| if v == 1 { b'+' } else { b'-' })
            .collect();
        let hash = Sha256::digest(&bytes);
        hex::encode(&hash[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::{generate_group, DEFAULT_CAP};
    use crate::modring::Modulus;
    use crate::symplectic::standard_generators;

    fn sp2(p: u32) -> FiniteGroup {
        generate_group(
            &standard_generators(1, Modulus::new(p).unwrap()).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap()
    }

    #[test]
    fn sign_flip_examples() {
        let g = sp2(5);
        let b = ValidationBudget::default();
        let phi = Automorphism::sign_flip(&g, &b).unwrap();
        assert_eq!(phi.apply(g.identity()), g.identity());
        for x in g.ids() {
            let m = g.element(x);
            let e = m.entries();
            let img = g.element(phi.apply(x));
            let want = ModMatrix::from_signed(
                2,
                g.modulus(),
                &[e[0] as i64, -(e[1] as i64), -(e[2] as i64), e[3] as i64],
            )
            .unwrap();
            assert_eq!(img, want);
            assert_eq!(phi.apply(phi.apply(x)), x);
        }
        assert_eq!(phi.order(), 2);
        assert_eq!(
            Automorphism::compose(&phi, &phi).unwrap(),
            Automorphism::identity(&g)
        );
    }

    #[test]
    fn inner_by_alternating_diag_equals_sign_flip() {
        let g = sp2(7);
        let b = ValidationBudget::default();
        let d = ModMatrix::diagonal(g.modulus(), &[1, -1]).unwrap();
        let inner = Automorphism::inner(&g, &d, &b).unwrap();
        let flip = Automorphism::sign_flip(&g, &b).unwrap();
        assert_eq!(inner, flip);
        assert_ne!(inner.descriptor(), flip.descriptor());
    }

    #[test]
    fn inner_identity_is_identity() {
        let g = sp2(5);
        let id = ModMatrix::identity(2, g.modulus()).unwrap();
        let phi = Automorphism::inner(&g, &id, &ValidationBudget::default()).unwrap();
        assert!(phi.is_identity());
        assert_eq!(phi.order(), 1);
    }

    #[test]
    fn inner_composition_matches_product() {
        let g = sp2(5);
        let (u, v) = (g.generators()[0], g.generators()[1]);
        let uv = g.mul(u, v).unwrap();
        let lhs = Automorphism::compose(
            &Automorphism::inner_by(&g, u).unwrap(),
            &Automorphism::inner_by(&g, v).unwrap(),
        )
        .unwrap();
        assert_eq!(lhs, Automorphism::inner_by(&g, uv).unwrap());
    }

    #[test]
    fn non_normalizing_conjugator_rejected() {
        // The upper unitriangular subgroup is not normalized by the swap.
        let md = Modulus::new(5).unwrap();
        let g = generate_group(
            &[ModMatrix::from_signed(2, md, &[1, 1, 0, 1]).unwrap()],
            100,
        )
        .unwrap();
        let swap = ModMatrix::from_signed(2, md, &[0, 1, -1, 0]).unwrap();
        assert!(matches!(
            Automorphism::inner(&g, &swap, &ValidationBudget::default()),
            Err(Error::Integrity { .. })
        ));
    }

    #[test]
    fn non_homomorphism_rejected() {
        let g = sp2(5);
        // Swap two non-identity elements only: a permutation but not a homomorphism.
        let mut images: Vec<ElementId> = g.ids().collect();
        images.swap(1, 2);
        let err = Automorphism::from_images(
            &g,
            Descriptor::Identity,
            images,
            &ValidationBudget::default(),
        );
        assert!(matches!(err, Err(Error::Integrity { .. })));
    }

    #[test]
    fn sampled_validation_still_catches_breakage() {
        let g = sp2(5);
        let budget = ValidationBudget {
            exhaustive_limit: 10,
            random_samples: 2_000,
            seed: 3,
        };
        let mut images: Vec<ElementId> = g.ids().collect();
        images.swap(5, 9);
        assert!(Automorphism::from_images(&g, Descriptor::Identity, images, &budget).is_err());
    }

    #[test]
    fn inner_order_differs_from_element_order() {
        let g = sp2(5);
        let u = ModMatrix::from_signed(2, g.modulus(), &[0, 1, -1, 0]).unwrap();
        let uid = g.index_of(&u).unwrap();
        // u has order 4 and u^2 = -I is central.
        let u2 = g.mul(uid, uid).unwrap();
        assert_eq!(Some(u2), g.negative_identity());
        assert_ne!(u2, g.identity());
        let phi = Automorphism::inner_by(&g, uid).unwrap();
        assert!(phi.order() <= 2);
        assert_eq!(phi.order(), 2);
    }

    #[test]
    fn twist_requires_negative_identity() {
        // Unitriangular group over Z_5 has no -I.
        let md = Modulus::new(5).unwrap();
        let g = generate_group(
            &[ModMatrix::from_signed(2, md, &[1, 1, 0, 1]).unwrap()],
            100,
        )
        .unwrap();
        let chi = Character::trivial(&g);
        let id = Automorphism::identity(&g);
        assert!(matches!(
            Automorphism::character_twist(&g, &chi, &id, &ValidationBudget::default()),
            Err(Error::UnsupportedTwist(_))
        ));
    }

    #[test]
    fn twist_by_trivial_and_twice() {
        let f = fixtures::dihedral8_z3();
        let b = ValidationBudget::default();
        let base = Automorphism::sign_flip(&f.group, &b).unwrap();
        let trivial = Character::trivial(&f.group);
        let same = Automorphism::character_twist(&f.group, &trivial, &base, &b).unwrap();
        assert_eq!(same, base);
        let once = Automorphism::character_twist(&f.group, &f.character, &base, &b).unwrap();
        assert_ne!(once, base);
        let twice = Automorphism::character_twist(&f.group, &f.character, &once, &b).unwrap();
        assert_eq!(twice, base);
    }

    #[test]
    fn character_from_generators_matches_det() {
        let f = fixtures::gl2_z3();
        let gens: Vec<i8> = f
            .group
            .generators()
            .iter()
            .map(|&s| f.character.value(s))
            .collect();
        let rebuilt = Character::from_generator_values(&f.group, &gens).unwrap();
        assert_eq!(rebuilt, f.character);
        assert!(!rebuilt.is_trivial());
        assert_eq!(rebuilt.kernel().len() * 2, f.group.order());
    }

    #[test]
    fn inconsistent_generator_values_rejected() {
        // Sp(2, Z_5) is perfect: no nontrivial character exists.
        let g = sp2(5);
        let vals = vec![-1i8; g.generators().len()];
        assert!(Character::from_generator_values(&g, &vals).is_err());
        let bad = vec![1i8; g.order()];
        let mut bad2 = bad.clone();
        bad2[0] = -1;
        assert!(Character::from_values(&g, bad2, &ValidationBudget::default()).is_err());
    }

    #[test]
    fn character_file_round_trip() {
        let f = fixtures::dihedral8_z3();
        let g = &f.group;
        let mut text = String::from("# det character\n");
        for &s in g.generators() {
            let v = if f.character.value(s) == 1 {
                "+1"
            } else {
                "-1"
            };
            text.push_str(&format!("{}={v}\n", hex::encode(g.canonical_key(s))));
        }
        let chi = Character::parse_generator_file(g, &text).unwrap();
        assert_eq!(chi, f.character);
        assert!(Character::parse_generator_file(g, "zz=+1").is_err());
        assert!(Character::parse_generator_file(g, "").is_err());
    }
}

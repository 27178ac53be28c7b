//! The extension `G x| Z_m` with `t g t^-1 = phi(g)` and `t^m = 1`, where `m`
//! is the order of `phi`. Elements are pairs `(g, k)` standing for `g t^k`.
//!
//! Conjugacy classes in the coset `G t` are computed here from the pair
//! multiplication law alone, independently of the twisted orbit search in
//! [`crate::partition`].

use rand::Rng;

use crate::automorphism::Automorphism;
use crate::error::{Error, Result};
use crate::group::{ElementId, FiniteGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub g: ElementId,
    pub k: u64,
}

pub struct SemidirectGroup<'a> {
    base: &'a FiniteGroup,
    m: u64,
    /// `powers[k][x] = phi^k(x)` for `k in 0..m`.
    powers: Vec<Vec<ElementId>>,
}

impl<'a> SemidirectGroup<'a> {
    pub fn new(base: &'a FiniteGroup, phi: &Automorphism, cap: usize) -> Result<Self> {
        let m = phi.order();
        let size = (base.order() as u128) * m as u128;
        if size > cap as u128 {
            return Err(Error::Capacity {
                found: size.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let mut powers = Vec::with_capacity(m as usize);
        powers.push(base.ids().collect::<Vec<_>>());
        for k in 1..m as usize {
            let next = powers[k - 1].iter().map(|&x| phi.apply(x)).collect();
            powers.push(next);
        }
        Ok(SemidirectGroup { base, m, powers })
    }

    pub fn base(&self) -> &FiniteGroup {
        self.base
    }

    /// Order of the acting automorphism (the cyclic factor).
    pub fn cyclic_order(&self) -> u64 {
        self.m
    }

    pub fn order(&self) -> u128 {
        self.base.order() as u128 * self.m as u128
    }

    #[inline]
    fn phi_pow(&self, k: u64, x: ElementId) -> ElementId {
        self.powers[(k % self.m) as usize][x.index()]
    }

    /// `(g, k)(h, l) = (g phi^k(h), k + l mod m)`.
    pub fn mul(&self, a: Pair, b: Pair) -> Result<Pair> {
        let g = self.base.mul(a.g, self.phi_pow(a.k, b.g))?;
        Ok(Pair {
            g,
            k: (a.k + b.k) % self.m,
        })
    }

    /// `(g, k)^-1 = (phi^-k(g^-1), -k)`.
    pub fn inv(&self, a: Pair) -> Result<Pair> {
        let back = (self.m - a.k % self.m) % self.m;
        let g = self.phi_pow(back, self.base.inv(a.g)?);
        Ok(Pair { g, k: back })
    }

    pub fn identity(&self) -> Pair {
        Pair {
            g: self.base.identity(),
            k: 0,
        }
    }

    /// The twisting generator `t = (e, 1)`.
    pub fn t(&self) -> Pair {
        Pair {
            g: self.base.identity(),
            k: 1 % self.m,
        }
    }

    /// `c a c^-1`.
    pub fn conjugate(&self, c: Pair, a: Pair) -> Result<Pair> {
        self.mul(self.mul(c, a)?, self.inv(c)?)
    }

    /// Generators of the extension: `(s, 0)` for each base generator, and `t`.
    pub fn generators(&self) -> Vec<Pair> {
        let mut gens: Vec<Pair> = self
            .base
            .generators()
            .iter()
            .map(|&g| Pair { g, k: 0 })
            .collect();
        gens.push(self.t());
        gens
    }

    /// Ordinary conjugacy classes of the coset `G t`, as labels indexed by
    /// the base element `x` of `(x, 1)`. Returns `(labels, class_count)`.
    pub fn coset_classes(&self) -> Result<(Vec<usize>, usize)> {
        let n = self.base.order();
        let coset_k = 1 % self.m;
        let gens = self.generators();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for root in self.base.ids() {
            if label[root.index()] != usize::MAX {
                continue;
            }
            label[root.index()] = count;
            stack.push(root);
            while let Some(x) = stack.pop() {
                let a = Pair { g: x, k: coset_k };
                for &c in &gens {
                    let b = self.conjugate(c, a)?;
                    if b.k != coset_k {
                        return Err(Error::Integrity {
                            element: x,
                            reason: "conjugation left the coset G t".into(),
                        });
                    }
                    if label[b.g.index()] == usize::MAX {
                        label[b.g.index()] = count;
                        stack.push(b.g);
                    }
                }
            }
            count += 1;
        }
        Ok((label, count))
    }

    /// Spot-check associativity on `samples` random triples.
    pub fn check_associativity(&self, samples: usize, rng: &mut impl Rng) -> Result<bool> {
        let n = self.base.order() as u32;
        let m = self.m;
        let mut pick = || Pair {
            g: ElementId(rng.random_range(0..n)),
            k: rng.random_range(0..m),
        };
        for _ in 0..samples {
            let (a, b, c) = (pick(), pick(), pick());
            if self.mul(self.mul(a, b)?, c)? != self.mul(a, self.mul(b, c)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{generate_group, DEFAULT_CAP};
    use crate::modring::Modulus;
    use crate::symplectic::standard_generators;
    use crate::validation::ValidationBudget;

    fn sp2(p: u32) -> FiniteGroup {
        generate_group(
            &standard_generators(1, Modulus::new(p).unwrap()).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap()
    }

    #[test]
    fn law_and_inverse() {
        let g = sp2(5);
        let phi = Automorphism::sign_flip(&g, &ValidationBudget::default()).unwrap();
        let sd = SemidirectGroup::new(&g, &phi, DEFAULT_CAP).unwrap();
        assert_eq!(sd.order(), 240);
        let t = sd.t();
        assert_eq!(sd.mul(t, t).unwrap(), sd.identity());
        for x in g.ids().step_by(7) {
            let a = Pair { g: x, k: 1 };
            assert_eq!(sd.mul(a, sd.inv(a).unwrap()).unwrap(), sd.identity());
            // t x t^-1 = phi(x)
            let conj = sd.conjugate(t, Pair { g: x, k: 0 }).unwrap();
            assert_eq!(
                conj,
                Pair {
                    g: phi.apply(x),
                    k: 0
                }
            );
        }
        let mut rng = ValidationBudget::default().rng();
        assert!(sd.check_associativity(10_000, &mut rng).unwrap());
    }

    #[test]
    fn capacity_is_enforced() {
        let g = sp2(5);
        let phi = Automorphism::sign_flip(&g, &ValidationBudget::default()).unwrap();
        assert!(matches!(
            SemidirectGroup::new(&g, &phi, 200),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn identity_extension_is_direct() {
        let g = sp2(5);
        let id = Automorphism::identity(&g);
        let sd = SemidirectGroup::new(&g, &id, DEFAULT_CAP).unwrap();
        assert_eq!(sd.cyclic_order(), 1);
        let (_, count) = sd.coset_classes().unwrap();
        assert_eq!(
            count,
            crate::partition::ordinary_classes(&g)
                .unwrap()
                .class_count()
        );
    }
}

//! Baselines the orbit search is benchmarked against.

use petgraph::unionfind::UnionFind;
use reidemeister_core::{Automorphism, FiniteGroup, Result};

/// Twisted class count by union-find over the edges `x ~ s x phi(s)^-1`.
pub fn union_find_class_count(g: &FiniteGroup, phi: &Automorphism) -> Result<usize> {
    let mut uf = UnionFind::<u32>::new(g.order());
    let mut components = g.order();
    for &s in g.generators() {
        let r = g.inv(phi.apply(s))?;
        for x in g.ids() {
            let y = g.mul(g.mul(s, x)?, r)?;
            if uf.union(x.0, y.0) {
                components -= 1;
            }
        }
    }
    Ok(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reidemeister_core::{
        generate_group, standard_generators, twisted_classes, Modulus, ValidationBudget,
    };

    #[test]
    fn agrees_with_orbit_search() {
        for p in [5, 7, 11] {
            let gens = standard_generators(1, Modulus::new(p).unwrap()).unwrap();
            let g = generate_group(&gens, 10_000).unwrap();
            let phi = Automorphism::sign_flip(&g, &ValidationBudget::default()).unwrap();
            let bfs = twisted_classes(&g, &phi).unwrap().class_count();
            assert_eq!(union_find_class_count(&g, &phi).unwrap(), bfs);
        }
    }
}

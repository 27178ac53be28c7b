//! Small matrix groups over `Z_3` that carry a nontrivial `{+1, -1}`
//! character, for exercising character twists and refined splittings.
//! `Sp(2n, Z_p)` has no such character once `p >= 5`.

use crate::automorphism::Character;
use crate::group::{generate_group, FiniteGroup};
use crate::modring::{ModMatrix, Modulus};
use crate::validation::ValidationBudget;

pub struct Fixture {
    pub name: &'static str,
    pub group: FiniteGroup,
    pub character: Character,
}

fn z3() -> Modulus {
    Modulus::new(3).expect("3 >= 2")
}

fn m2(e: [i64; 4]) -> ModMatrix {
    ModMatrix::from_signed(2, z3(), &e).expect("2x2 matrix")
}

fn det_sign(m: &ModMatrix) -> i8 {
    if m.det() == 1 {
        1
    } else {
        -1
    }
}

fn build(name: &'static str, gens: &[ModMatrix], chi: impl Fn(&ModMatrix) -> i8) -> Fixture {
    let group = generate_group(gens, 1_000).expect("fixture group is small");
    let character =
        Character::from_fn(&group, chi, &ValidationBudget::default()).expect("fixture character");
    Fixture {
        name,
        group,
        character,
    }
}

/// Dihedral group of order 8 in `GL(2, Z_3)`: rotation `[[0,-1],[1,0]]`
/// and reflection `diag(1, -1)`, with the determinant as sign character.
pub fn dihedral8_z3() -> Fixture {
    build(
        "dihedral8-z3",
        &[m2([0, -1, 1, 0]), m2([1, 0, 0, -1])],
        det_sign,
    )
}

/// `GL(2, Z_3)` (order 48) with the determinant character.
pub fn gl2_z3() -> Fixture {
    build(
        "gl2-z3",
        &[m2([1, 1, 0, 1]), m2([1, 0, 1, 1]), m2([-1, 0, 0, 1])],
        det_sign,
    )
}

/// Quaternion group `Q8` inside `SL(2, Z_3)`, with the character that is
/// `+1` on `<i>` and `-1` off it.
pub fn quaternion_z3() -> Fixture {
    let i = m2([0, -1, 1, 0]);
    let j = m2([1, 1, 1, -1]);
    let powers_of_i: Vec<ModMatrix> = {
        let mut v = vec![ModMatrix::identity(2, z3()).unwrap()];
        for _ in 0..3 {
            let next = v.last().unwrap().mul(&i).unwrap();
            v.push(next);
        }
        v
    };
    build("quaternion-z3", &[i, j], move |m| {
        if powers_of_i.contains(m) {
            1
        } else {
            -1
        }
    })
}

/// All fixtures with a nontrivial character.
pub fn all() -> Vec<Fixture> {
    vec![dihedral8_z3(), gl2_z3(), quaternion_z3()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_orders_and_characters() {
        let orders: Vec<usize> = all().iter().map(|f| f.group.order()).collect();
        assert_eq!(orders, vec![8, 48, 8]);
        for f in all() {
            assert!(!f.character.is_trivial(), "{}", f.name);
            assert!(f.group.negative_identity().is_some(), "{}", f.name);
            assert!(f.group.order() <= 50);
        }
    }
}

//! Exact cross-checks and machine-readable certificates.
//!
//! Each check returns a [`Certificate`] whose verdict is `pass` only when
//! every relation it lists holds. Numbers are exact integers throughout.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::automorphism::{Automorphism, Character, Descriptor};
use crate::error::{Error, Result};
use crate::group::{generate_group, ElementId, FiniteGroup};
use crate::modring::{ModMatrix, Modulus, TorusElement};
use crate::partition::{twisted_classes, ClassId, Partition};
use crate::semidirect::SemidirectGroup;
use crate::symplectic::{sp_order, standard_generators};
use crate::validation::ValidationBudget;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inputs {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<u32>>,
    pub automorphism: Descriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Inputs {
    fn for_group(g: &FiniteGroup, automorphism: Descriptor) -> Inputs {
        let m = g.modulus();
        Inputs {
            n: g.dim() / 2,
            modulus: Some(m.value()),
            primes: None,
            automorphism,
            seed: None,
            note: ring_note(m),
        }
    }
}

/// Composite moduli are outside the setting the symplectic condition was
/// stated for; results over them are labelled.
pub fn ring_note(m: Modulus) -> Option<String> {
    (!m.is_prime()).then(|| "ring-quotient experiment".to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthRow {
    pub p: u32,
    pub group_order: u64,
    pub reidemeister_count: u64,
    pub bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torus_block_violations: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Computed {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_order: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<GrowthRow>>,
    pub values: BTreeMap<String, Value>,
    pub relations: Vec<Relation>,
}

impl Computed {
    fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    fn relation(&mut self, name: impl Into<String>, holds: bool) {
        self.relations.push(Relation {
            name: name.into(),
            holds,
        });
    }

    fn all_hold(&self) -> bool {
        self.relations.iter().all(|r| r.holds)
    }
}

/// A verdict tying exact computed quantities to a specific claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub format: u32,
    pub claim_id: String,
    pub paper_anchor: String,
    pub inputs: Inputs,
    pub computed: Computed,
    pub verdict: Verdict,
}

impl Certificate {
    fn new(claim_id: &str, anchor: &str, inputs: Inputs, computed: Computed) -> Certificate {
        let verdict = if computed.all_hold() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Certificate {
            format: FORMAT_VERSION,
            claim_id: claim_id.into(),
            paper_anchor: anchor.into(),
            inputs,
            computed,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn relation(&self, name: &str) -> Option<bool> {
        self.computed
            .relations
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.holds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn sp_group(n: usize, modulus: Modulus, cap: usize) -> Result<FiniteGroup> {
    generate_group(&standard_generators(n, modulus)?, cap)
}

fn entries_value(g: &FiniteGroup, x: ElementId) -> Value {
    json!(g.element(x).entries())
}

/// Group order of `Sp(2n, Z_m)` from closure, against the closed-form order.
pub fn order_certificate(n: usize, modulus: Modulus, cap: usize) -> Result<Certificate> {
    let g = sp_group(n, modulus, cap)?;
    let mut c = Computed {
        group_order: Some(g.order() as u64),
        ..Default::default()
    };
    let formula = sp_order(n, modulus.value());
    if let Some(f) = formula.and_then(|f| u64::try_from(f).ok()) {
        c.value("formula_order", f);
    }
    c.relation(
        "closure_matches_formula",
        formula == Some(g.order() as u128),
    );
    Ok(Certificate::new(
        "sp-order",
        "order of Sp(2n, Z_m) equals the closed-form count",
        Inputs::for_group(&g, Descriptor::Identity),
        c,
    ))
}

/// Twisted class count against ordinary conjugacy classes in the coset
/// `G t` of `G x|_phi Z_m`, computed by unrelated code paths.
pub fn semidirect_oracle(
    g: &FiniteGroup,
    phi: &Automorphism,
    cap: usize,
    budget: &ValidationBudget,
) -> Result<Certificate> {
    let sd = SemidirectGroup::new(g, phi, cap)?;
    let twisted = twisted_classes(g, phi)?;
    let (labels, coset_count) = sd.coset_classes()?;
    let coset = Partition::from_labels(g, &labels, twisted.kind().clone())?;

    let mut c = Computed {
        group_order: Some(g.order() as u64),
        class_count: Some(twisted.class_count() as u64),
        ..Default::default()
    };
    c.value("automorphism_order", sd.cyclic_order());
    c.value("extension_order", sd.order() as u64);
    c.value("coset_class_count", coset_count as u64);
    c.relation(
        "coset_count_equals_twisted_count",
        coset_count == twisted.class_count(),
    );
    c.relation(
        "coset_classes_match_twisted_classes",
        coset.same_blocks(&twisted),
    );
    let samples = budget.random_samples;
    let associative = sd.check_associativity(samples, &mut budget.rng())?;
    c.relation("associative_on_samples", associative);
    c.value("associativity_samples", samples as u64);

    let mut inputs = Inputs::for_group(g, phi.descriptor().clone());
    inputs.seed = Some(budget.seed);
    Ok(Certificate::new(
        "semidirect-coset-classes",
        "x, y are phi-conjugate iff xt, yt are conjugate in G x|_phi Z_m",
        inputs,
        c,
    ))
}

/// Right multiplication by `theta^-1` as a bijection from the classes of
/// `phi` to those of `inner(theta) . phi`.
pub fn shift_bijection_check(
    g: &FiniteGroup,
    phi: &Automorphism,
    theta: ElementId,
) -> Result<Certificate> {
    let shifted = Automorphism::compose(&Automorphism::inner_by(g, theta)?, phi)?;
    let p1 = twisted_classes(g, phi)?;
    let p2 = twisted_classes(g, &shifted)?;
    let theta_inv = g.inv(theta)?;

    let mut target: Vec<Option<ClassId>> = vec![None; p1.class_count()];
    let mut well_defined = true;
    let mut buf = vec![0u16; g.dim() * g.dim()];
    for x in g.ids() {
        let y = g.mul_into(x, theta_inv, &mut buf)?;
        let c2 = p2.class_of(y);
        match &mut target[p1.class_of(x).index()] {
            slot @ None => *slot = Some(c2),
            Some(prev) if *prev != c2 => well_defined = false,
            _ => {}
        }
    }
    let images: Vec<ClassId> = target.iter().flatten().copied().collect();
    let distinct: BTreeSet<ClassId> = images.iter().copied().collect();
    let injective = distinct.len() == images.len();
    let sizes_match = p1
        .classes()
        .zip(&target)
        .all(|(c1, c2)| c2.is_some_and(|c2| p1.class_size(c1) == p2.class_size(c2)));
    let surjective = distinct.len() == p2.class_count();

    let mut c = Computed {
        group_order: Some(g.order() as u64),
        class_count: Some(p1.class_count() as u64),
        ..Default::default()
    };
    c.value("shifted_class_count", p2.class_count() as u64);
    c.value("theta", entries_value(g, theta));
    c.relation("class_counts_equal", p1.class_count() == p2.class_count());
    c.relation("class_map_well_defined", well_defined);
    c.relation("class_map_injective", injective);
    c.relation("class_map_surjective", surjective);
    c.relation("class_sizes_preserved", sizes_match);

    let descriptor = shifted.descriptor().clone();
    Ok(Certificate::new(
        "shift-bijection",
        "right multiplication by theta^-1 maps phi-classes bijectively onto (theta o phi)-classes",
        Inputs::for_group(g, descriptor),
        c,
    ))
}

/// Generators of `ker chi` by Schreier's lemma over the transversal `{e, t}`.
fn kernel_generators(g: &FiniteGroup, chi: &Character) -> Result<Vec<ElementId>> {
    let t = g
        .ids()
        .find(|&x| chi.value(x) == -1)
        .ok_or_else(|| Error::Precondition("character is trivial".into()))?;
    let t_inv = g.inv(t)?;
    let mut out = BTreeSet::new();
    for r in [g.identity(), t] {
        for &s in g.generators() {
            let rs = g.mul(r, s)?;
            let h = if chi.value(rs) == 1 {
                rs
            } else {
                g.mul(rs, t_inv)?
            };
            if h != g.identity() {
                out.insert(h);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Orbits of `y -> a y phi(a)^-1` for `a` in the subgroup generated by `moves`.
fn restricted_orbits(
    g: &FiniteGroup,
    phi: &Automorphism,
    moves: &[ElementId],
) -> Result<Vec<usize>> {
    let pairs: Vec<(ElementId, ElementId)> = moves
        .iter()
        .map(|&a| Ok((a, g.inv(phi.apply(a))?)))
        .collect::<Result<_>>()?;
    let mut label = vec![usize::MAX; g.order()];
    let mut next = 0;
    let mut stack = Vec::new();
    let mut buf = vec![0u16; g.dim() * g.dim()];
    for root in g.ids() {
        if label[root.index()] != usize::MAX {
            continue;
        }
        label[root.index()] = next;
        stack.push(root);
        while let Some(y) = stack.pop() {
            for &(a, r) in &pairs {
                let ay = g.mul_into(a, y, &mut buf)?;
                let z = g.mul_into(ay, r, &mut buf)?;
                if label[z.index()] == usize::MAX {
                    label[z.index()] = next;
                    stack.push(z);
                }
            }
        }
        next += 1;
    }
    Ok(label)
}

/// For each block of `coarse`, the set of `fine` labels it contains;
/// `None` if some fine block straddles two coarse blocks.
fn nesting(fine: &[usize], coarse: &Partition) -> Option<Vec<BTreeSet<usize>>> {
    let mut parts: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); coarse.class_count()];
    let mut owner: BTreeMap<usize, ClassId> = BTreeMap::new();
    for (x, &f) in fine.iter().enumerate() {
        let c = coarse.class_of(ElementId(x as u32));
        if *owner.entry(f).or_insert(c) != c {
            return None;
        }
        parts[c.index()].insert(f);
    }
    Some(parts)
}

/// Refine the classes of `phi` by twisting only with `a in H = ker chi`, and
/// check each class of `phi` and of `chi . phi` is a union of refined classes,
/// at most two per class.
pub fn refined_split_check(
    g: &FiniteGroup,
    phi: &Automorphism,
    chi: &Character,
    budget: &ValidationBudget,
) -> Result<Certificate> {
    if chi.is_trivial() {
        return Err(Error::Precondition(
            "refined split needs a nontrivial character".into(),
        ));
    }
    let h_gens = kernel_generators(g, chi)?;
    let refined = restricted_orbits(g, phi, &h_gens)?;
    let refined_count = refined.iter().copied().max().map_or(0, |m| m + 1);

    let twist = Automorphism::character_twist(g, chi, phi, budget)?;
    let p_phi = twisted_classes(g, phi)?;
    let p_twist = twisted_classes(g, &twist)?;

    let mut c = Computed {
        group_order: Some(g.order() as u64),
        class_count: Some(p_phi.class_count() as u64),
        ..Default::default()
    };
    c.value("kernel_order", chi.kernel().len() as u64);
    c.value("refined_class_count", refined_count as u64);
    c.value(
        "twisted_by_character_class_count",
        p_twist.class_count() as u64,
    );
    c.value("character", chi.digest());

    let in_phi = nesting(&refined, &p_phi);
    let in_twist = nesting(&refined, &p_twist);
    c.relation("refined_classes_nest_in_phi_classes", in_phi.is_some());
    c.relation(
        "refined_classes_nest_in_twisted_classes",
        in_twist.is_some(),
    );
    if let Some(parts) = &in_phi {
        let counts: Vec<u64> = parts.iter().map(|s| s.len() as u64).collect();
        let unsplit = counts.iter().filter(|&&k| k == 1).count() as u64;
        c.relation(
            "each_phi_class_splits_into_at_most_two",
            counts.iter().all(|&k| k <= 2),
        );
        c.value("phi_class_split_counts", counts);
        c.value("unsplit_phi_classes", unsplit);
    }
    if let Some(parts) = &in_twist {
        let counts: Vec<u64> = parts.iter().map(|s| s.len() as u64).collect();
        c.relation(
            "each_twisted_class_is_at_most_two_subsets",
            counts.iter().all(|&k| k <= 2),
        );
        c.value("twisted_class_split_counts", counts);
    }

    Ok(Certificate::new(
        "refined-split",
        "ker(psi)-refined classes of phi partition both phi-classes and (psi.phi)-classes",
        Inputs::for_group(g, phi.descriptor().clone()),
        c,
    ))
}

/// Entrywise residue reduction `Z_m -> Z_m'` with `m' | m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingReduction {
    pub from: Modulus,
    pub to: Modulus,
}

impl RingReduction {
    pub fn new(from: Modulus, to: Modulus) -> Result<Self> {
        if from.value() % to.value() != 0 {
            return Err(Error::Structural(format!(
                "Z_{from} does not reduce onto Z_{to}: {to} does not divide {from}"
            )));
        }
        Ok(RingReduction { from, to })
    }

    pub fn apply(&self, m: &ModMatrix) -> Result<ModMatrix> {
        m.reduce_to(self.to)
    }
}

/// Push the classes of `phi` on `g` through the reduction onto `q` and check
/// the induced map on classes is well defined and onto.
pub fn quotient_epi_check(
    g: &FiniteGroup,
    q: &FiniteGroup,
    proj: RingReduction,
    phi: &Automorphism,
    budget: &ValidationBudget,
) -> Result<Certificate> {
    if proj.from != g.modulus() || proj.to != q.modulus() {
        return Err(Error::Structural(
            "reduction does not match the group moduli".into(),
        ));
    }
    if g.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            left: g.dim(),
            right: q.dim(),
        });
    }
    let image: Vec<ElementId> = g
        .ids()
        .map(|x| {
            q.index_of(&proj.apply(&g.element(x))?).ok_or_else(|| {
                Error::Structural(format!(
                    "reduction of element {x} is not in the quotient group"
                ))
            })
        })
        .collect::<Result<_>>()?;
    let mut hit = vec![false; q.order()];
    for y in &image {
        hit[y.index()] = true;
    }
    if let Some(missing) = hit.iter().position(|h| !h) {
        return Err(Error::Structural(format!(
            "reduction is not onto: quotient element #{missing} has no preimage"
        )));
    }

    // Induced map phi_bar(proj x) = proj(phi x); generators first.
    for &s in g.generators() {
        let lhs = q.element(image[phi.apply(s).index()]);
        let rhs = proj.apply(&g.element(phi.apply(s)))?;
        if lhs != rhs {
            return Err(Error::Structural(
                "automorphism does not commute with the reduction".into(),
            ));
        }
    }
    let mut induced: Vec<Option<ElementId>> = vec![None; q.order()];
    for x in g.ids() {
        let y = image[phi.apply(x).index()];
        match &mut induced[image[x.index()].index()] {
            slot @ None => *slot = Some(y),
            Some(prev) if *prev != y => {
                return Err(Error::Structural(
                    "automorphism does not preserve the reduction kernel".into(),
                ))
            }
            _ => {}
        }
    }
    let induced: Vec<ElementId> = induced
        .into_iter()
        .map(|y| y.expect("reduction is onto"))
        .collect();
    let phi_bar = Automorphism::from_images(q, phi.descriptor().clone(), induced, budget)?;

    let pg = twisted_classes(g, phi)?;
    let pq = twisted_classes(q, &phi_bar)?;
    let mut class_map: Vec<Option<ClassId>> = vec![None; pg.class_count()];
    let mut well_defined = true;
    for x in g.ids() {
        let cq = pq.class_of(image[x.index()]);
        match &mut class_map[pg.class_of(x).index()] {
            slot @ None => *slot = Some(cq),
            Some(prev) if *prev != cq => well_defined = false,
            _ => {}
        }
    }
    let covered: BTreeSet<ClassId> = class_map.iter().flatten().copied().collect();

    let mut c = Computed {
        group_order: Some(g.order() as u64),
        class_count: Some(pg.class_count() as u64),
        bound: Some(pq.class_count() as u64),
        ..Default::default()
    };
    c.value("quotient_modulus", q.modulus().value());
    c.value("quotient_order", q.order() as u64);
    c.value("quotient_class_count", pq.class_count() as u64);
    c.relation("class_map_well_defined", well_defined);
    c.relation("class_map_surjective", covered.len() == pq.class_count());
    c.relation(
        "count_at_least_quotient_count",
        pg.class_count() >= pq.class_count(),
    );

    let mut inputs = Inputs::for_group(g, phi.descriptor().clone());
    inputs.note = ring_note(g.modulus()).or_else(|| ring_note(q.modulus()));
    Ok(Certificate::new(
        "quotient-epimorphism",
        "Reidemeister classes map onto the classes of the induced automorphism of a quotient",
        inputs,
        c,
    ))
}

/// Units `w` of `Z_p` with `w^2 = -1`.
pub fn v1_set(p: Modulus) -> Vec<u32> {
    let minus_one = p.neg(1 % p.value());
    p.units()
        .into_iter()
        .filter(|&w| p.mul(w, w) == minus_one)
        .collect()
}

/// `R(sign_flip)` on `Sp(2, Z_p)` against `(p - 3) / 2`, plus the pairing of
/// torus elements `w_bar` and `-w_bar^-1` for `w` outside `V1`.
pub fn prop32_certificate(p: u32, cap: usize, budget: &ValidationBudget) -> Result<Certificate> {
    let modulus = Modulus::new(p)?;
    if p < 5 || !modulus.is_prime() {
        return Err(Error::Precondition(format!(
            "p must be a prime >= 5, got {p}"
        )));
    }
    let g = sp_group(1, modulus, cap)?;
    let phi = Automorphism::sign_flip(&g, budget)?;
    let part = twisted_classes(&g, &phi)?;
    let bound = (p as u64 - 3) / 2;
    let v1 = v1_set(modulus);

    let torus_id = |w: u32| -> Result<ElementId> {
        let m = TorusElement::new(w, 1, modulus)?.realize();
        g.index_of(&m)
            .ok_or_else(|| Error::Structural("torus element missing".into()))
    };
    let torus: Vec<(u32, ElementId)> = modulus
        .units()
        .into_iter()
        .map(|w| Ok((w, torus_id(w)?)))
        .collect::<Result<_>>()?;

    let mut pairing = true;
    let mut exclusive = true;
    let mut torus_labels = BTreeSet::new();
    let mut discrepancies = Vec::new();
    for &(w, id) in torus.iter().filter(|(w, _)| !v1.contains(w)) {
        // -w_bar^-1 = diag(-w^-1, -w) is the torus element of -w^-1.
        let partner_w = modulus.neg(modulus.inv(w).expect("unit"));
        let partner = torus_id(partner_w)?;
        let class = part.class_of(id);
        pairing &= part.class_of(partner) == class;
        torus_labels.insert(class);
        let mut same: Vec<u32> = torus
            .iter()
            .filter(|(_, t)| part.class_of(*t) == class)
            .map(|(v, _)| *v)
            .collect();
        same.sort_unstable();
        let mut expected = vec![w, partner_w];
        expected.sort_unstable();
        expected.dedup();
        if same != expected {
            exclusive = false;
            discrepancies.push(json!({ "w": w, "torus_in_class": same }));
        }
    }
    let v1_classes: Vec<u32> = v1
        .iter()
        .map(|&w| Ok(part.class_of(torus_id(w)?).0))
        .collect::<Result<_>>()?;

    let mut c = Computed {
        group_order: Some(g.order() as u64),
        class_count: Some(part.class_count() as u64),
        bound: Some(bound),
        v1_size: Some(v1.len() as u64),
        ..Default::default()
    };
    c.value("v1", v1.clone());
    c.value("v1_classes", v1_classes);
    c.value("torus_class_count", torus_labels.len() as u64);
    c.value("torus_pairs_exclusive", exclusive);
    c.value("torus_discrepancies", discrepancies);
    c.relation(
        "reidemeister_at_least_bound",
        part.class_count() as u64 >= bound,
    );
    c.relation("torus_pairing", pairing);

    let mut inputs = Inputs::for_group(&g, phi.descriptor().clone());
    inputs.seed = Some(budget.seed);
    Ok(Certificate::new(
        "sp2-sign-flip-lower-bound",
        "R(sign_flip) on Sp(2, Z_p) is at least (p-3)/2; w_bar and -w_bar^-1 share a class for w outside V1",
        inputs,
        c,
    ))
}

/// Rows `(p, |Sp(2n, Z_p)|, R(sign_flip), (p-3)/2)` over ascending primes;
/// passes when every row meets the bound and `R` strictly increases.
pub fn growth_scan(
    primes: &[u32],
    n: usize,
    cap: usize,
    budget: &ValidationBudget,
) -> Result<Certificate> {
    if primes.is_empty() {
        return Err(Error::Precondition("prime list is empty".into()));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "primes must be strictly ascending".into(),
        ));
    }
    if let Some(&bad) = primes
        .iter()
        .find(|&&p| p < 3 || !crate::modring::is_prime(p))
    {
        return Err(Error::Precondition(format!("{bad} is not an odd prime")));
    }
    if n == 0 {
        return Err(Error::Precondition("half-dimension must be >= 1".into()));
    }

    let results: Vec<Result<GrowthRow>> = primes
        .par_iter()
        .map(|&p| growth_row(p, n, cap, budget))
        .collect();
    let mut rows = Vec::new();
    let mut capacity_hit = None;
    for (r, &p) in results.into_iter().zip(primes) {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::Capacity { .. }) => {
                capacity_hit.get_or_insert(p);
            }
            Err(e) => return Err(e),
        }
    }

    let mut c = Computed::default();
    for row in &rows {
        c.relation(
            format!("bound_p{}", row.p),
            row.reidemeister_count >= row.bound,
        );
    }
    let increasing = rows
        .windows(2)
        .all(|w| w[0].reidemeister_count < w[1].reidemeister_count);
    c.relation("strictly_increasing", increasing);
    if let Some(p) = capacity_hit {
        c.value("capacity_exceeded_at", p);
    }
    c.rows = Some(rows);

    let inputs = Inputs {
        n,
        modulus: None,
        primes: Some(primes.to_vec()),
        automorphism: Descriptor::SignFlip,
        seed: Some(budget.seed),
        note: None,
    };
    let mut cert = Certificate::new(
        "growth-scan",
        "R(phi_i) over the quotients Sp(2n, Z_p) grows without bound",
        inputs,
        c,
    );
    if capacity_hit.is_some() {
        cert.verdict = Verdict::Inconclusive;
    }
    Ok(cert)
}

fn growth_row(p: u32, n: usize, cap: usize, budget: &ValidationBudget) -> Result<GrowthRow> {
    let modulus = Modulus::new(p)?;
    let g = sp_group(n, modulus, cap)?;
    let phi = Automorphism::sign_flip(&g, budget)?;
    let part = twisted_classes(&g, &phi)?;
    let torus_block_violations = if n >= 2 {
        Some(
            torus_block_scan(&g, &phi)?
                .iter()
                .map(|s| s.violations)
                .sum(),
        )
    } else {
        None
    };
    Ok(GrowthRow {
        p,
        group_order: g.order() as u64,
        reidemeister_count: part.class_count() as u64,
        bound: (p as u64).saturating_sub(3) / 2,
        torus_block_violations,
    })
}

/// How torus solutions are found in the block-structure check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMethod {
    /// Filter every element of the enumerated group.
    Exhaustive,
    /// Solve `M w_bar D = t D M` entrywise for each torus target `t` (the
    /// equation is diagonal in the entries of `M`) and test each supported
    /// matrix for symplecticity. Needs no group enumeration.
    Support,
}

/// Torus solutions for one `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorusBlockStats {
    pub w: u32,
    /// `w != w^-1`, so the coefficient `w - w^-1` is a unit.
    pub separates_inverse: bool,
    pub solutions: u64,
    pub violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<Vec<u32>>,
}

/// `diag(v, v^-1, 1, ..., 1)` test on raw entries.
fn torus_value(raw: &[u16], dim: usize, md: Modulus) -> Option<u32> {
    for i in 0..dim {
        for j in 0..dim {
            let e = raw[i * dim + j] as u32;
            if i != j && e != 0 {
                return None;
            }
        }
    }
    let v = raw[0] as u32;
    let vinv = md.inv(v)?;
    if raw[dim + 1] as u32 != vinv {
        return None;
    }
    (2..dim).all(|i| raw[i * dim + i] == 1).then_some(v)
}

/// True when `M` has zero blocks in rows/columns `3..2n` against `1..2`.
fn is_block_diagonal(entries: &[u32], dim: usize) -> bool {
    (0..dim).all(|i| (0..dim).all(|j| (i < 2) == (j < 2) || entries[i * dim + j] == 0))
}

fn block_candidates(md: Modulus) -> Vec<u32> {
    let v1 = v1_set(md);
    md.units().into_iter().filter(|w| !v1.contains(w)).collect()
}

fn torus_block_scan(g: &FiniteGroup, phi: &Automorphism) -> Result<Vec<TorusBlockStats>> {
    let md = g.modulus();
    let dim = g.dim();
    let mut out = Vec::new();
    let mut buf = vec![0u16; dim * dim];
    let mut buf2 = vec![0u16; dim * dim];
    // phi(M)^-1 = phi(M^-1); inverses once for all w.
    let inv_images: Vec<ElementId> = g
        .ids()
        .map(|x| Ok(phi.apply(g.inv(x)?)))
        .collect::<Result<_>>()?;
    for w in block_candidates(md) {
        let wbar = TorusElement::new(w, dim / 2, md)?.realize();
        let wbar_raw: Vec<u16> = wbar.entries().iter().map(|&e| e as u16).collect();
        let mut stats = TorusBlockStats {
            w,
            separates_inverse: md.mul(w, w) != 1 % md.value(),
            solutions: 0,
            violations: 0,
            example: None,
        };
        for x in g.ids() {
            crate::modring::mul_raw(g.raw(x), &wbar_raw, dim, md.value(), &mut buf);
            crate::modring::mul_raw(
                &buf,
                g.raw(inv_images[x.index()]),
                dim,
                md.value(),
                &mut buf2,
            );
            if torus_value(&buf2, dim, md).is_none() {
                continue;
            }
            stats.solutions += 1;
            let entries = g.element(x).entries().to_vec();
            if !is_block_diagonal(&entries, dim) {
                stats.violations += 1;
                stats.example.get_or_insert(entries);
            }
        }
        out.push(stats);
    }
    Ok(out)
}

fn torus_block_support(n: usize, md: Modulus, cap: usize) -> Result<Vec<TorusBlockStats>> {
    let dim = 2 * n;
    let p = md.value();
    let mut out = Vec::new();
    // D = diag(1, -1, 1, -1, ...)
    let d: Vec<u32> = (0..dim)
        .map(|i| if i % 2 == 0 { 1 % p } else { md.neg(1) })
        .collect();
    for w in block_candidates(md) {
        let wbar = TorusElement::new(w, n, md)?.realize();
        let col: Vec<u32> = (0..dim).map(|j| md.mul(wbar.get(j, j), d[j])).collect();
        let mut stats = TorusBlockStats {
            w,
            separates_inverse: md.mul(w, w) != 1 % p,
            solutions: 0,
            violations: 0,
            example: None,
        };
        for v in md.units() {
            let t = TorusElement::new(v, n, md)?.realize();
            let row: Vec<u32> = (0..dim).map(|i| md.mul(t.get(i, i), d[i])).collect();
            let free: Vec<usize> = (0..dim * dim)
                .filter(|&k| row[k / dim] == col[k % dim])
                .collect();
            let count = (p as u128)
                .checked_pow(free.len() as u32)
                .unwrap_or(u128::MAX);
            if count > cap as u128 {
                return Err(Error::Capacity { found: cap, cap });
            }
            let mut entries = vec![0u32; dim * dim];
            for idx in 0..count as u64 {
                let mut r = idx;
                for &k in &free {
                    entries[k] = (r % p as u64) as u32;
                    r /= p as u64;
                }
                let m = ModMatrix::new(dim, md, entries.clone())?;
                if !m.is_symplectic() {
                    continue;
                }
                stats.solutions += 1;
                if !is_block_diagonal(&entries, dim) {
                    stats.violations += 1;
                    stats.example.get_or_insert_with(|| entries.clone());
                }
            }
        }
        out.push(stats);
    }
    Ok(out)
}

/// Over `Sp(2n, Z_p)` with the sign flip: every `M` with
/// `M w_bar phi(M)^-1` in the torus has zero off-diagonal blocks between the
/// first coordinate pair and the rest, for each unit `w` outside `V1`.
pub fn torus_block_certificate(
    n: usize,
    p: u32,
    method: BlockMethod,
    cap: usize,
    budget: &ValidationBudget,
) -> Result<Certificate> {
    let md = Modulus::new(p)?;
    if !md.is_prime() {
        return Err(Error::Precondition(format!(
            "block structure is only checked over prime moduli, got {p}"
        )));
    }
    if n < 2 {
        return Err(Error::Precondition("block structure needs n >= 2".into()));
    }
    let mut c = Computed::default();
    let stats = match method {
        BlockMethod::Exhaustive => {
            let g = sp_group(n, md, cap)?;
            let phi = Automorphism::sign_flip(&g, budget)?;
            c.group_order = Some(g.order() as u64);
            torus_block_scan(&g, &phi)?
        }
        BlockMethod::Support => torus_block_support(n, md, cap)?,
    };
    c.value(
        "method",
        match method {
            BlockMethod::Exhaustive => "exhaustive",
            BlockMethod::Support => "support",
        },
    );
    let total: u64 = stats.iter().map(|s| s.violations).sum();
    c.value("violations", total);
    for s in &stats {
        c.relation(format!("blocks_vanish_w{}", s.w), s.violations == 0);
    }
    c.value(
        "per_w",
        serde_json::to_value(&stats).expect("stats serialize"),
    );
    let inputs = Inputs {
        n,
        modulus: Some(p),
        primes: None,
        automorphism: Descriptor::SignFlip,
        seed: Some(budget.seed),
        note: None,
    };
    Ok(Certificate::new(
        "torus-block-structure",
        "M with M w_bar phi(M)^-1 in the torus is block diagonal (first pair vs the rest)",
        inputs,
        c,
    ))
}

/// First element `x` whose image `phi(x)` lies in a different class, if any.
pub fn image_class_violation(part: &Partition, phi: &Automorphism) -> Option<ElementId> {
    (0..phi.images().len() as u32)
        .map(ElementId)
        .find(|&x| part.class_of(x) != part.class_of(phi.apply(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::DEFAULT_CAP;

    fn md(m: u32) -> Modulus {
        Modulus::new(m).unwrap()
    }

    fn budget() -> ValidationBudget {
        ValidationBudget {
            random_samples: 5_000,
            ..Default::default()
        }
    }

    #[test]
    fn v1_sizes() {
        assert_eq!(v1_set(md(5)), vec![2, 3]);
        assert!(v1_set(md(7)).is_empty());
        assert_eq!(v1_set(md(13)), vec![5, 8]);
    }

    #[test]
    fn semidirect_identity_passes() {
        let g = sp_group(1, md(5), DEFAULT_CAP).unwrap();
        let cert =
            semidirect_oracle(&g, &Automorphism::identity(&g), DEFAULT_CAP, &budget()).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.computed.values["automorphism_order"], json!(1));
    }

    #[test]
    fn semidirect_sign_flip_z5() {
        let g = sp_group(1, md(5), DEFAULT_CAP).unwrap();
        let phi = Automorphism::sign_flip(&g, &budget()).unwrap();
        let cert = semidirect_oracle(&g, &phi, DEFAULT_CAP, &budget()).unwrap();
        assert!(cert.passed(), "{}", cert.to_json());
        assert_eq!(cert.computed.values["extension_order"], json!(240));
    }

    #[test]
    fn shift_with_identity_theta() {
        let g = sp_group(1, md(5), DEFAULT_CAP).unwrap();
        let phi = Automorphism::sign_flip(&g, &budget()).unwrap();
        let cert = shift_bijection_check(&g, &phi, g.identity()).unwrap();
        assert!(cert.passed());
    }

    #[test]
    fn shift_on_every_theta_small_group() {
        let f = fixtures::gl2_z3();
        let phi = Automorphism::sign_flip(&f.group, &budget()).unwrap();
        for theta in f.group.ids() {
            assert!(shift_bijection_check(&f.group, &phi, theta)
                .unwrap()
                .passed());
        }
    }

    #[test]
    fn refined_split_rejects_trivial_character() {
        let f = fixtures::dihedral8_z3();
        let chi = Character::trivial(&f.group);
        let phi = Automorphism::identity(&f.group);
        assert!(matches!(
            refined_split_check(&f.group, &phi, &chi, &budget()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn kernel_generators_generate_the_kernel() {
        for f in fixtures::all() {
            let gens = kernel_generators(&f.group, &f.character).unwrap();
            let mats: Vec<ModMatrix> = gens.iter().map(|&x| f.group.element(x)).collect();
            let h = if mats.is_empty() {
                1
            } else {
                generate_group(&mats, 1000).unwrap().order()
            };
            assert_eq!(h, f.character.kernel().len(), "{}", f.name);
        }
    }

    #[test]
    fn quotient_identity_reduction() {
        let g = sp_group(1, md(5), DEFAULT_CAP).unwrap();
        let phi = Automorphism::sign_flip(&g, &budget()).unwrap();
        let proj = RingReduction::new(md(5), md(5)).unwrap();
        let cert = quotient_epi_check(&g, &g, proj, &phi, &budget()).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.computed.class_count, cert.computed.bound);
    }

    #[test]
    fn quotient_rejects_wrong_target() {
        assert!(RingReduction::new(md(9), md(5)).is_err());
        let g = sp_group(1, md(9), DEFAULT_CAP).unwrap();
        let q = sp_group(1, md(3), DEFAULT_CAP).unwrap();
        let phi = Automorphism::sign_flip(&g, &budget()).unwrap();
        // Target group too small to contain the images.
        let tiny = generate_group(&[ModMatrix::identity(2, md(3)).unwrap()], 10).unwrap();
        let proj = RingReduction::new(md(9), md(3)).unwrap();
        assert!(matches!(
            quotient_epi_check(&g, &tiny, proj, &phi, &budget()),
            Err(Error::Structural(_))
        ));
        assert!(quotient_epi_check(&g, &q, proj, &phi, &budget())
            .unwrap()
            .passed());
    }

    #[test]
    fn lower_bound_preconditions() {
        assert!(matches!(
            prop32_certificate(3, DEFAULT_CAP, &budget()),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            prop32_certificate(9, DEFAULT_CAP, &budget()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn growth_preconditions_and_single_row() {
        assert!(growth_scan(&[7, 5], 1, DEFAULT_CAP, &budget()).is_err());
        assert!(growth_scan(&[], 1, DEFAULT_CAP, &budget()).is_err());
        assert!(growth_scan(&[9], 1, DEFAULT_CAP, &budget()).is_err());
        let cert = growth_scan(&[5], 1, DEFAULT_CAP, &budget()).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.computed.rows.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn growth_capacity_is_inconclusive() {
        let cert = growth_scan(&[5, 7, 11], 1, 500, &budget()).unwrap();
        assert_eq!(cert.verdict, Verdict::Inconclusive);
        let rows = cert.computed.rows.unwrap();
        assert_eq!(rows.iter().map(|r| r.p).collect::<Vec<_>>(), vec![5, 7]);
    }

    #[test]
    fn block_support_and_exhaustive_agree_over_z3() {
        let ex =
            torus_block_certificate(2, 3, BlockMethod::Exhaustive, DEFAULT_CAP, &budget()).unwrap();
        let su =
            torus_block_certificate(2, 3, BlockMethod::Support, DEFAULT_CAP, &budget()).unwrap();
        let strip = |c: &Certificate| {
            let mut v = c.computed.values["per_w"].clone();
            for s in v.as_array_mut().unwrap() {
                s.as_object_mut().unwrap().remove("example");
            }
            v
        };
        assert_eq!(strip(&ex), strip(&su));
    }

    #[test]
    fn block_preconditions() {
        assert!(
            torus_block_certificate(1, 3, BlockMethod::Support, DEFAULT_CAP, &budget()).is_err()
        );
        assert!(
            torus_block_certificate(2, 9, BlockMethod::Support, DEFAULT_CAP, &budget()).is_err()
        );
    }

    #[test]
    fn certificate_json_field_order() {
        let cert = order_certificate(1, md(7), DEFAULT_CAP).unwrap();
        let s = serde_json::to_string(&cert).unwrap();
        let keys = [
            "\"format\"",
            "\"claim_id\"",
            "\"paper_anchor\"",
            "\"inputs\"",
            "\"computed\"",
            "\"verdict\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(cert.computed.group_order, Some(336));
        assert!(cert.passed());
    }
}

//! Exit criteria, one line each. Runs without the libtest harness so every
//! line is printed; the process fails if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reidemeister_core::certify::image_class_violation;
use reidemeister_core::fixtures;
use reidemeister_core::*;

const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn md(m: u32) -> Modulus {
    Modulus::new(m).unwrap()
}

fn sp(n: usize, m: u32) -> FiniteGroup {
    generate_group(&standard_generators(n, md(m)).unwrap(), DEFAULT_CAP).unwrap()
}

fn budget() -> ValidationBudget {
    ValidationBudget::with_seed(SEED)
}

fn sign_flip(g: &FiniteGroup) -> Automorphism {
    Automorphism::sign_flip(g, &budget()).unwrap()
}

/// `|Sp(2, Z_p)| = p(p^2 - 1)` for small p, and `|Sp(4, Z_3)| = 51840`.
fn group_orders() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [3u64, 5, 7, 11, 13] {
        let order = sp(1, p as u32).order() as u64;
        pass &= order == p * (p * p - 1);
        parts.push(format!("p={p}:{order}"));
    }
    let sp4 = sp(2, 3).order();
    pass &= sp4 == 51840 && sp_order(2, 3) == Some(51840);
    parts.push(format!("Sp(4,Z3):{sp4}"));
    Outcome {
        pass,
        detail: parts.join(" "),
    }
}

fn lower_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u32, 7, 11, 13, 17] {
        let cert = prop32_certificate(p, DEFAULT_CAP, &budget()).unwrap();
        let r = cert.computed.class_count.unwrap();
        let v1 = cert.computed.v1_size.unwrap();
        let expected_v1 = if (p - 1) % 4 == 0 { 2 } else { 0 };
        pass &= r >= (p as u64 - 3) / 2 && v1 == expected_v1 && cert.passed();
        parts.push(format!("p={p}:R={r},bound={},|V1|={v1}", (p - 3) / 2));
    }
    Outcome {
        pass,
        detail: parts.join(" "),
    }
}

fn growth() -> Outcome {
    let cert = growth_scan(&[5, 7, 11, 13, 17], 1, DEFAULT_CAP, &budget()).unwrap();
    let rs: Vec<String> = cert
        .computed
        .rows
        .as_ref()
        .unwrap()
        .iter()
        .map(|r| r.reidemeister_count.to_string())
        .collect();
    Outcome {
        pass: cert.relation("strictly_increasing") == Some(true) && cert.passed(),
        detail: format!("R column [{}], verdict {:?}", rs.join(", "), cert.verdict),
    }
}

fn semidirect() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5, 7, 11] {
        let g = sp(1, p);
        let phi = sign_flip(&g);
        let cert = semidirect_oracle(&g, &phi, DEFAULT_CAP, &budget()).unwrap();
        pass &= cert.passed() && phi.order() == 2;
        parts.push(format!("p={p}:{}", cert.computed.class_count.unwrap()));
    }
    let mut fixtures_used = 0;
    for f in fixtures::all() {
        let inner = f
            .group
            .generators()
            .iter()
            .map(|&u| Automorphism::inner_by(&f.group, u).unwrap())
            .find(|a| !a.is_identity())
            .expect("fixture is non-abelian");
        let cert = semidirect_oracle(&f.group, &inner, DEFAULT_CAP, &budget()).unwrap();
        pass &= cert.passed();
        fixtures_used += 1;
        parts.push(format!(
            "{}(m={}):{}",
            f.name,
            inner.order(),
            cert.computed.class_count.unwrap()
        ));
    }
    pass &= fixtures_used >= 3;
    Outcome {
        pass,
        detail: parts.join(" "),
    }
}

fn shift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5, 7] {
        let g = sp(1, p);
        let phi = sign_flip(&g);
        for _ in 0..5 {
            let theta = ElementId(rng.random_range(0..g.order() as u32));
            let cert = shift_bijection_check(&g, &phi, theta).unwrap();
            pass &= cert.passed();
            parts.push(format!("p={p},theta={theta}"));
        }
    }
    Outcome {
        pass,
        detail: parts.join(" "),
    }
}

/// `x` and `phi(x)` share a class: exhaustive up to 5000 elements, else
/// 10^5 sampled elements.
fn image_in_class() -> Outcome {
    let mut pairs: Vec<(String, FiniteGroup, Automorphism)> = Vec::new();
    for p in [5, 7, 11, 13, 17] {
        let g = sp(1, p);
        let phi = sign_flip(&g);
        pairs.push((format!("Sp(2,Z{p})"), g, phi));
    }
    for f in fixtures::all() {
        let u = f.group.generators()[0];
        let phi = Automorphism::inner_by(&f.group, u).unwrap();
        let tw = Automorphism::character_twist(&f.group, &f.character, &phi, &budget()).unwrap();
        pairs.push((format!("{}-inner", f.name), f.group.clone(), phi));
        pairs.push((format!("{}-twist", f.name), f.group, tw));
    }
    let g = sp(2, 3);
    let phi = sign_flip(&g);
    pairs.push(("Sp(4,Z3)".into(), g, phi));

    let mut pass = true;
    let mut checked = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, g, phi) in &pairs {
        let part = twisted_classes(g, phi).unwrap();
        if g.order() <= 5000 {
            let bad = image_class_violation(&part, phi);
            pass &= bad.is_none();
            if let Some(x) = bad {
                eprintln!("  {name}: {x} and its image differ in class");
            }
            checked += g.order() as u64;
        } else {
            for _ in 0..100_000 {
                let x = ElementId(rng.random_range(0..g.order() as u32));
                pass &= part.class_of(x) == part.class_of(phi.apply(x));
            }
            checked += 100_000;
        }
    }
    Outcome {
        pass,
        detail: format!("{} pairs, {checked} elements checked", pairs.len()),
    }
}

fn quotient() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, q) in [(9, 3), (25, 5)] {
        let g = sp(1, m);
        let gq = sp(1, q);
        let phi = sign_flip(&g);
        let proj = RingReduction::new(md(m), md(q)).unwrap();
        let cert = quotient_epi_check(&g, &gq, proj, &phi, &budget()).unwrap();
        let (r, rq) = (
            cert.computed.class_count.unwrap(),
            cert.computed.bound.unwrap(),
        );
        pass &= cert.passed() && cert.relation("class_map_surjective") == Some(true) && r >= rq;
        parts.push(format!("Z{m}->Z{q}:R={r},R_bar={rq}"));
    }
    Outcome {
        pass,
        detail: parts.join(" "),
    }
}

/// Closed form of `M w_bar phi(M^-1)` for 1000 seeded symplectic `M` over `Z_13`.
fn symbolic_product() -> Outcome {
    let p = md(13);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    let mut done = 0;
    while done < 1000 {
        let e: Vec<u32> = (0..4).map(|_| rng.random_range(0..13)).collect();
        let (a, b, c, d) = (e[0], e[1], e[2], e[3]);
        if p.sub(p.mul(a, d), p.mul(b, c)) != 1 {
            continue;
        }
        let w = rng.random_range(1..13);
        let wi = p.inv(w).unwrap();
        let s = p.add(w, wi);
        let expected = [
            p.add(p.mul(w, p.mul(a, d)), p.mul(wi, p.mul(b, c))),
            p.mul(s, p.mul(a, b)),
            p.mul(s, p.mul(c, d)),
            p.add(p.mul(w, p.mul(b, c)), p.mul(wi, p.mul(a, d))),
        ];
        let m = ModMatrix::new(2, p, e).unwrap();
        assert!(m.is_symplectic());
        let wbar = TorusElement::new(w, 1, p).unwrap().realize();
        let direct = m
            .mul(&wbar)
            .unwrap()
            .mul(&m.inverse().unwrap().sign_flip())
            .unwrap();
        mismatches += usize::from(direct.entries() != expected);
        done += 1;
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("{done} samples, {mismatches} mismatches"),
    }
}

fn block_structure() -> Outcome {
    let cert =
        torus_block_certificate(2, 3, BlockMethod::Exhaustive, DEFAULT_CAP, &budget()).unwrap();
    let per_w: Vec<String> = cert.computed.values["per_w"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            format!(
                "w={}:{}/{} off-block",
                s["w"], s["violations"], s["solutions"]
            )
        })
        .collect();
    Outcome {
        pass: cert.passed() && cert.computed.group_order == Some(51840),
        detail: format!(
            "|G|={} {}",
            cert.computed.group_order.unwrap(),
            per_w.join(" ")
        ),
    }
}

fn determinism() -> Outcome {
    let runs: Vec<Box<dyn Fn() -> Certificate>> = vec![
        Box::new(|| prop32_certificate(13, DEFAULT_CAP, &budget()).unwrap()),
        Box::new(|| growth_scan(&[5, 7, 11, 13], 1, DEFAULT_CAP, &budget()).unwrap()),
        Box::new(|| {
            let g = sp(1, 7);
            semidirect_oracle(&g, &sign_flip(&g), DEFAULT_CAP, &budget()).unwrap()
        }),
        Box::new(|| {
            let g = sp(1, 5);
            shift_bijection_check(&g, &sign_flip(&g), ElementId(42)).unwrap()
        }),
        Box::new(|| {
            let (g, q) = (sp(1, 9), sp(1, 3));
            let proj = RingReduction::new(md(9), md(3)).unwrap();
            quotient_epi_check(&g, &q, proj, &sign_flip(&g), &budget()).unwrap()
        }),
        Box::new(|| {
            let f = fixtures::gl2_z3();
            let id = Automorphism::identity(&f.group);
            refined_split_check(&f.group, &id, &f.character, &budget()).unwrap()
        }),
        Box::new(|| {
            torus_block_certificate(2, 3, BlockMethod::Support, DEFAULT_CAP, &budget()).unwrap()
        }),
    ];
    let mut identical = 0;
    for run in &runs {
        identical += usize::from(run().to_json() == run().to_json());
    }
    Outcome {
        pass: identical == runs.len(),
        detail: format!("{identical}/{} certificates byte-identical", runs.len()),
    }
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "group orders", Duration::from_secs(30), group_orders),
        (
            2,
            "lower bound (p-3)/2 and |V1|",
            Duration::from_secs(60),
            lower_bound,
        ),
        (
            3,
            "growth scan strictly increasing",
            Duration::from_secs(60),
            growth,
        ),
        (
            4,
            "semidirect coset oracle",
            Duration::from_secs(120),
            semidirect,
        ),
        (5, "shift bijection", Duration::from_secs(120), shift),
        (
            6,
            "x and phi(x) share a class",
            Duration::from_secs(120),
            image_in_class,
        ),
        (
            7,
            "quotient epimorphism",
            Duration::from_secs(120),
            quotient,
        ),
        (
            8,
            "torus product closed form",
            Duration::from_secs(60),
            symbolic_product,
        ),
        (
            9,
            "torus block structure over Sp(4, Z3)",
            Duration::from_secs(300),
            block_structure,
        ),
        (
            10,
            "certificate determinism",
            Duration::from_secs(300),
            determinism,
        ),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < limit;
        println!(
            "criterion {id:>2} {} {name}: {} ({:.2}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}

use std::fmt::Write as _;

use reidemeister_core::certify::ring_note;
use reidemeister_core::{Certificate, Descriptor, FiniteGroup, Partition, Verdict};
use serde::Serialize;

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Serialize)]
pub struct ClassRow {
    pub class: u32,
    pub size: u64,
    pub representative: Vec<u32>,
}

/// Class listing for `classes` and `twisted`.
#[derive(Debug, Serialize)]
pub struct ClassReport {
    pub format: u32,
    pub kind: &'static str,
    pub n: usize,
    pub modulus: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub automorphism: Option<Descriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub group_order: u64,
    pub class_count: u64,
    pub classes: Vec<ClassRow>,
}

pub enum Report {
    Certificate(Certificate),
    Classes(ClassReport),
}

fn csv_line(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

impl Report {
    pub fn classes(g: &FiniteGroup, part: &Partition, aut: Option<&Descriptor>) -> Report {
        let classes = part
            .classes()
            .map(|c| ClassRow {
                class: c.0,
                size: part.class_size(c) as u64,
                representative: g.element(part.representative(c)).entries().to_vec(),
            })
            .collect();
        Report::Classes(ClassReport {
            format: 1,
            kind: if aut.is_some() { "twisted" } else { "ordinary" },
            n: g.dim() / 2,
            modulus: g.modulus().value(),
            automorphism: aut.cloned(),
            note: ring_note(g.modulus()),
            group_order: g.order() as u64,
            class_count: part.class_count() as u64,
            classes,
        })
    }

    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            Report::Certificate(c) => Some(c.verdict),
            Report::Classes(_) => None,
        }
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = match (self, format) {
            (Report::Certificate(c), Format::Json) => c.to_json(),
            (Report::Classes(r), Format::Json) => {
                serde_json::to_string_pretty(r).expect("report serializes")
            }
            (Report::Certificate(c), Format::Csv) => certificate_csv(c),
            (Report::Classes(r), Format::Csv) => classes_csv(r),
            (Report::Certificate(c), Format::Text) => certificate_text(c),
            (Report::Classes(r), Format::Text) => classes_text(r),
        };
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out
    }
}

fn entries_field(e: &[u32]) -> String {
    e.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn classes_csv(r: &ClassReport) -> String {
    let mut out = String::new();
    csv_line(
        &mut out,
        &["class".into(), "representative".into(), "size".into()],
    );
    for row in &r.classes {
        csv_line(
            &mut out,
            &[
                row.class.to_string(),
                entries_field(&row.representative),
                row.size.to_string(),
            ],
        );
    }
    out
}

/// Growth scans print their table; other certificates print one row per relation.
fn certificate_csv(c: &Certificate) -> String {
    let mut out = String::new();
    if let Some(rows) = &c.computed.rows {
        csv_line(
            &mut out,
            &["p", "group_order", "reidemeister_count", "bound"].map(String::from),
        );
        for r in rows {
            csv_line(
                &mut out,
                &[
                    r.p.to_string(),
                    r.group_order.to_string(),
                    r.reidemeister_count.to_string(),
                    r.bound.to_string(),
                ],
            );
        }
    } else {
        csv_line(&mut out, &["relation".into(), "holds".into()]);
        for rel in &c.computed.relations {
            csv_line(&mut out, &[rel.name.clone(), rel.holds.to_string()]);
        }
    }
    out
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn certificate_text(c: &Certificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "claim: {}", c.claim_id);
    let _ = writeln!(out, "statement: {}", c.paper_anchor);
    let _ = writeln!(out, "automorphism: {}", c.inputs.automorphism.label());
    let comp = &c.computed;
    for (name, v) in [
        ("group order", comp.group_order),
        ("class count", comp.class_count),
        ("bound", comp.bound),
        ("|V1|", comp.v1_size),
    ] {
        if let Some(v) = v {
            let _ = writeln!(out, "{name}: {v}");
        }
    }
    if let Some(rows) = &comp.rows {
        let _ = writeln!(out, "{:>6} {:>14} {:>6} {:>6}", "p", "|G|", "R", "bound");
        for r in rows {
            let _ = writeln!(
                out,
                "{:>6} {:>14} {:>6} {:>6}",
                r.p, r.group_order, r.reidemeister_count, r.bound
            );
        }
    }
    for rel in &comp.relations {
        let _ = writeln!(
            out,
            "[{}] {}",
            if rel.holds { "ok" } else { "FAILED" },
            rel.name
        );
    }
    let _ = writeln!(out, "verdict: {}", verdict_word(c.verdict));
    out
}

fn classes_text(r: &ClassReport) -> String {
    let mut out = String::new();
    let aut = r
        .automorphism
        .as_ref()
        .map_or("conjugacy".to_string(), Descriptor::label);
    let _ = writeln!(
        out,
        "Sp({}, Z_{}) order {}, {} classes ({aut})",
        2 * r.n,
        r.modulus,
        r.group_order,
        r.class_count
    );
    if let Some(note) = &r.note {
        let _ = writeln!(out, "note: {note}");
    }
    for row in &r.classes {
        let _ = writeln!(
            out,
            "{:>5} size {:>8}  [{}]",
            row.class,
            row.size,
            entries_field(&row.representative)
        );
    }
    out
}

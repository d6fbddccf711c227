//! Text and JSON renderings of command results. Both are deterministic:
//! objects keep insertion order and nothing time-dependent is included.

use std::sync::Arc;

use qcech_core::abgroups::{FgAbGroup, Integer};
use qcech_core::cech::Cover;
use qcech_core::doc::ObjectReport;
use qcech_core::lattice::{Elem, Quantale};
use qcech_core::presheaf::{SheafFailureKind, SheafReport};
use qcech_core::theorems::{TheoremReport, Verdict};
use serde_json::{json, Value};

pub enum Report {
    Validation(Vec<ObjectReport>),
    Cohomology {
        presheaf: String,
        base: Arc<Quantale>,
        element: Elem,
        cover: Cover,
        cover_count: Option<usize>,
        groups: Vec<FgAbGroup>,
    },
    Sheaf {
        presheaf: String,
        base: Arc<Quantale>,
        report: SheafReport,
    },
    Theorems(Vec<TheoremReport>),
}

pub struct Output {
    pub text: String,
    pub json: String,
}

impl From<Report> for Output {
    fn from(r: Report) -> Self {
        let json = serde_json::to_string_pretty(&to_json(&r)).expect("values serialize") + "\n";
        Output { text: to_text(&r), json }
    }
}

pub fn error_json(message: &str, code: u8) -> String {
    serde_json::to_string_pretty(&json!({ "error": message, "exit_code": code })).expect("values serialize")
}

fn labels(q: &Quantale, c: &Cover) -> Vec<String> {
    c.members().iter().map(|&m| q.label(m).to_string()).collect()
}

fn integer(v: &Integer) -> Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

fn kind(k: SheafFailureKind) -> &'static str {
    match k {
        SheafFailureKind::NotInjective => "not-injective",
        SheafFailureKind::NotExact => "not-exact",
    }
}

fn tally(reports: &[TheoremReport]) -> [(&'static str, usize); 4] {
    let n = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    [
        ("pass", n(Verdict::Pass)),
        ("fail", n(Verdict::Fail)),
        ("skipped", n(Verdict::Skipped)),
        ("observed", n(Verdict::Observed)),
    ]
}

fn to_json(r: &Report) -> Value {
    match r {
        Report::Validation(objects) => {
            let list: Vec<Value> = objects
                .iter()
                .map(|o| {
                    let mut v = json!({ "kind": o.kind.as_str(), "name": o.name, "line": o.line });
                    match &o.result {
                        Ok(s) => {
                            v["valid"] = json!(true);
                            v["summary"] = json!(s);
                        }
                        Err(e) => {
                            v["valid"] = json!(false);
                            v["error"] = json!(e);
                        }
                    }
                    v
                })
                .collect();
            json!({ "valid": objects.iter().all(|o| o.result.is_ok()), "objects": list })
        }
        Report::Cohomology { presheaf, base, element, cover, cover_count, groups } => {
            let degrees: Vec<Value> = groups
                .iter()
                .enumerate()
                .map(|(q, g)| {
                    let g = g.canonical();
                    json!({ "degree": q, "group": g.to_string(), "factors": g.factors() })
                })
                .collect();
            let mut v = json!({
                "presheaf": presheaf,
                "element": base.label(*element),
                "cover": labels(base, cover),
            });
            if let Some(n) = cover_count {
                v["covers"] = json!(n);
            }
            v["cohomology"] = Value::Array(degrees);
            v
        }
        Report::Sheaf { presheaf, base, report } => {
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "element": base.label(f.cover.base()),
                        "cover": labels(base, &f.cover),
                        "kind": kind(f.kind),
                        "witness": f.witness.iter().map(integer).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({
                "presheaf": presheaf,
                "sheaf": report.is_sheaf(),
                "covers_checked": report.covers_checked,
                "failure_count": report.failure_count,
                "failures": failures,
            })
        }
        Report::Theorems(reports) => {
            let summary: serde_json::Map<String, Value> =
                tally(reports).iter().map(|(k, n)| (k.to_string(), json!(n))).collect();
            json!({
                "reports": reports.iter().map(TheoremReport::to_json).collect::<Vec<_>>(),
                "summary": summary,
            })
        }
    }
}

fn to_text(r: &Report) -> String {
    let mut out = String::new();
    match r {
        Report::Validation(objects) => {
            for o in objects {
                match &o.result {
                    Ok(s) => out.push_str(&format!("{} {}: ok ({s})\n", o.kind, o.name)),
                    Err(e) => out.push_str(&format!("{} {} (line {}): INVALID: {e}\n", o.kind, o.name, o.line)),
                }
            }
        }
        Report::Cohomology { presheaf, base, element, cover, cover_count, groups } => {
            out.push_str(&format!("presheaf {presheaf} at {}\n", base.label(*element)));
            match cover_count {
                Some(n) => out.push_str(&format!("terminal cover {} of {n} covers\n", cover.show(base))),
                None => out.push_str(&format!("cover {}\n", cover.show(base))),
            }
            for (q, g) in groups.iter().enumerate() {
                out.push_str(&format!("H^{q} = {}\n", g.canonical()));
            }
        }
        Report::Sheaf { presheaf, base, report } => {
            let verdict = if report.is_sheaf() { "sheaf" } else { "NOT a sheaf" };
            out.push_str(&format!(
                "presheaf {presheaf}: {verdict} ({} covers checked, {} failing)\n",
                report.covers_checked, report.failure_count
            ));
            for f in &report.failures {
                let w: Vec<String> = f.witness.iter().map(|x| x.to_string()).collect();
                out.push_str(&format!(
                    "  {} at cover {} of {}, witness [{}]\n",
                    kind(f.kind),
                    f.cover.show(base),
                    base.label(f.cover.base()),
                    w.join(", ")
                ));
            }
        }
        Report::Theorems(reports) => {
            for rep in reports {
                out.push_str(&rep.render_text());
            }
            let parts: Vec<String> = tally(reports).iter().map(|(k, n)| format!("{k} {n}")).collect();
            out.push_str(&format!("summary: {}\n", parts.join(", ")));
        }
    }
    out
}

//! Structured command reports.
//!
//! The JSON form is versioned by the `schema` field. Every numeric claim
//! carries the residual it was decided on and the tolerance in force.

use std::fmt::Write as _;

use serde::Serialize;

pub const SCHEMA: &str = "lieconf-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Declared {
    pub class: String,
    pub psi: String,
    pub gradient: bool,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRow {
    pub name: String,
    pub xi: Vec<String>,
    pub class: String,
    pub psi: String,
    pub gradient: bool,
    pub residual: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared: Option<Declared>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub coefficient: String,
    pub field: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bracket {
    pub a: String,
    pub b: String,
    pub result: Vec<Term>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Closure {
    pub closed: bool,
    pub residual: f64,
    pub tol: f64,
    pub nonzero: Vec<Bracket>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymRow {
    pub name: String,
    pub class: String,
    pub xi: Vec<String>,
    pub eta: String,
    pub admissible: bool,
    pub constraint: String,
    pub constraint_residual: f64,
    /// Prolongation check, run for admissible symmetries only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify_residual: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub xi: Vec<String>,
    pub eta: String,
    pub holds: bool,
    pub residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeText {
    pub kind: String,
    pub coordinates: Vec<String>,
    pub dependent: String,
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
    pub f: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    pub equation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub name: String,
    pub xi: Vec<String>,
    pub eta: String,
    pub holds: bool,
    pub residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GovinderRow {
    pub name: String,
    pub factor: String,
    pub inherited: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub used: String,
    pub used_xi: Vec<String>,
    pub used_eta: String,
    pub reduction_coordinate: String,
    pub ansatz: String,
    pub normalization: String,
    pub absence_residual: f64,
    pub round_trip_residual: f64,
    pub tol: f64,
    pub reduced: PdeText,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general: Option<PdeText>,
    pub inherited: Vec<CandidateRow>,
    pub type_ii: Vec<CandidateRow>,
    pub rejected: Vec<CandidateRow>,
    pub lost: Vec<String>,
    pub govinder: Vec<GovinderRow>,
    pub govinder_consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub spaces: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub source: String,
    pub settings: Settings,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifications: Option<Vec<ClassRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure_constants: Option<Closure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pde: Option<PdeText>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetries: Option<Vec<SymRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verifications: Option<Vec<VerifyRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogReport>,
    pub messages: Vec<String>,
}

impl Report {
    pub fn new(command: &str, source: String, settings: Settings) -> Report {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            source,
            settings,
            ok: true,
            classifications: None,
            structure_constants: None,
            pde: None,
            symmetries: None,
            verifications: None,
            reduction: None,
            catalog: None,
            messages: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let st = &self.settings;
        let _ = writeln!(o, "{} ({})", self.command, self.source);
        let _ = writeln!(
            o,
            "tol {:e}, trials {}, seed {}",
            st.tol, st.trials, st.seed
        );
        if let Some(rows) = &self.classifications {
            let _ = writeln!(o, "\nclassification");
            for r in rows {
                let _ = write!(
                    o,
                    "  {:<12} {:<11} psi = {:<24} gradient {:<5} residual {:.2e}",
                    r.name, r.class, r.psi, r.gradient, r.residual
                );
                if let Some(d) = &r.declared {
                    let mark = if d.matches { "ok" } else { "MISMATCH" };
                    let _ = write!(o, "  declared {} {mark}", d.class);
                }
                o.push('\n');
            }
        }
        if let Some(c) = &self.structure_constants {
            let _ = writeln!(o, "\nstructure constants (residual {:.2e})", c.residual);
            if let Some(e) = &c.error {
                let _ = writeln!(o, "  not closed: {e}");
            }
            for b in &c.nonzero {
                let terms: Vec<String> = b
                    .result
                    .iter()
                    .map(|t| format!("{} {}", t.coefficient, t.field))
                    .collect();
                let _ = writeln!(o, "  [{}, {}] = {}", b.a, b.b, terms.join(" + "));
            }
        }
        if let Some(p) = &self.pde {
            let _ = writeln!(o, "\nequation ({}): {}", p.kind, p.equation);
        }
        if let Some(rows) = &self.symmetries {
            let _ = writeln!(o, "\nsymmetries");
            for r in rows {
                let v = match (r.verified, r.verify_residual) {
                    (Some(h), Some(res)) => format!(", verified {h} ({res:.2e})"),
                    _ => String::new(),
                };
                let _ = writeln!(
                    o,
                    "  {:<12} {:<11} admissible {:<5} ({:.2e}){v}",
                    r.name, r.class, r.admissible, r.constraint_residual
                );
                let _ = writeln!(o, "    xi = ({}); eta = {}", r.xi.join(", "), r.eta);
            }
        }
        if let Some(rows) = &self.verifications {
            let _ = writeln!(o, "\nverification");
            for r in rows {
                let v = if r.holds { "holds" } else { "FAILS" };
                let _ = writeln!(o, "  {:<12} {v:<6} residual {:.3e}", r.name, r.residual);
            }
        }
        if let Some(r) = &self.reduction {
            let _ = writeln!(o, "\nreduction by {}: {}", r.used, r.ansatz);
            let _ = writeln!(
                o,
                "  normalization {}, absence residual {:.2e}, round trip residual {:.2e}",
                r.normalization, r.absence_residual, r.round_trip_residual
            );
            if let Some(g) = &r.general {
                let _ = writeln!(o, "  general form ({}): {}", g.kind, g.equation);
            }
            let _ = writeln!(o, "  reduced ({}): {}", r.reduced.kind, r.reduced.equation);
            let list = |o: &mut String, title: &str, rows: &[CandidateRow]| {
                let _ = writeln!(o, "  {title} ({})", rows.len());
                for c in rows {
                    let _ = writeln!(
                        o,
                        "    {:<16} residual {:.2e}  xi = ({}); eta = {}",
                        c.name,
                        c.residual,
                        c.xi.join(", "),
                        c.eta
                    );
                }
            };
            list(&mut o, "inherited", &r.inherited);
            list(&mut o, "type II hidden", &r.type_ii);
            list(&mut o, "rejected", &r.rejected);
            if !r.lost.is_empty() {
                let _ = writeln!(o, "  lost: {}", r.lost.join(", "));
            }
            for g in &r.govinder {
                let _ = writeln!(
                    o,
                    "  commutator [{}, {}] = {} {}: predicted inherited, {}",
                    r.used,
                    g.name,
                    g.factor,
                    r.used,
                    if g.inherited {
                        "confirmed"
                    } else {
                        "NOT confirmed"
                    }
                );
            }
        }
        if let Some(c) = &self.catalog {
            match &c.problem_text {
                Some(t) => {
                    o.push('\n');
                    o.push_str(t);
                }
                None => {
                    let _ = writeln!(o, "\nspaces");
                    for s in &c.spaces {
                        let _ = writeln!(o, "  {s}");
                    }
                }
            }
        }
        for m in &self.messages {
            let _ = writeln!(o, "note: {m}");
        }
        let _ = writeln!(o, "\nresult: {}", if self.ok { "ok" } else { "FAILED" });
        o
    }
}

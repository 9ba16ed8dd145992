use std::fmt::Write;

use super::ModelDocument;
use crate::model::VarDecl;

/// Canonical text: declaration order, equations in endogenous order, two
/// spaces of indentation, one entry per line.
pub fn print_model(doc: &ModelDocument) -> String {
    let sig = doc.model.signature();
    let mut out = String::new();
    let _ = writeln!(out, "model {} {{", doc.name);
    block(&mut out, "exogenous", sig.exogenous());
    block(&mut out, "endogenous", sig.endogenous());
    out.push_str("  equations {\n");
    for m in doc.model.mechanisms() {
        let _ = writeln!(out, "    {} = {}", sig.name(m.target), m.body.display(sig));
    }
    out.push_str("  }\n");
    if let Some(ranking) = &doc.ranking {
        out.push_str("  ranking {\n");
        for rule in ranking.rules() {
            let pattern: Vec<String> = rule
                .pattern
                .iter()
                .map(|(v, x)| format!("{}={}", sig.name(*v), x))
                .collect();
            let _ = writeln!(out, "    rule {} => {}", pattern.join(", "), rule.rank);
        }
        let _ = writeln!(out, "    default => {}", ranking.default_rank());
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn block(out: &mut String, keyword: &str, decls: &[VarDecl]) {
    if decls.is_empty() {
        let _ = writeln!(out, "  {keyword} {{}}");
        return;
    }
    let _ = writeln!(out, "  {keyword} {{");
    for d in decls {
        let _ = writeln!(out, "    {}: {}", d.name, d.range);
    }
    out.push_str("  }\n");
}

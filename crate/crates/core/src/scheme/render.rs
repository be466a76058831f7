//! Letter notation (`a3` = message 1, logical position 3) and plan exports.

use serde::Serialize;

use super::{QueryAtom, SchemeError, SchemePlan, SymbolRef};

/// `a`..`z` for the first 26 messages, `W27`, `W28`, ... after that.
pub fn letter(message: usize) -> String {
    if (1..=26).contains(&message) {
        char::from(b'a' + (message - 1) as u8).to_string()
    } else {
        format!("W{message}_")
    }
}

pub(crate) fn format_atom(atom: &QueryAtom) -> String {
    atom.refs
        .iter()
        .map(|r| format!("{}{}", letter(r.message), r.position))
        .collect::<Vec<_>>()
        .join("+")
}

pub(crate) fn parse_atom(text: &str) -> Result<QueryAtom, SchemeError> {
    let bad = || SchemeError::MalformedAtom(text.to_string());
    let refs = text
        .split('+')
        .map(|term| {
            let term = term.trim();
            let (message, digits) = if let Some(rest) = term.strip_prefix('W') {
                let (m, p) = rest.split_once('_').ok_or_else(bad)?;
                (m.parse::<usize>().map_err(|_| bad())?, p)
            } else {
                let c = term.chars().next().filter(char::is_ascii_lowercase).ok_or_else(bad)?;
                ((c as u8 - b'a') as usize + 1, &term[1..])
            };
            let position = digits.parse::<usize>().map_err(|_| bad())?;
            Ok(SymbolRef::new(message, position))
        })
        .collect::<Result<Vec<_>, SchemeError>>()?;
    Ok(QueryAtom::new(refs))
}

/// Fixed-width text table: one block of lines per desired message, one column
/// per server, one line per atom.
pub fn render_table(plans: &[SchemePlan]) -> String {
    let Some(first) = plans.first() else {
        return String::new();
    };
    let servers = first.queries.len();
    let cells: Vec<Vec<Vec<String>>> = plans
        .iter()
        .map(|p| {
            p.queries
                .iter()
                .map(|atoms| atoms.iter().map(format_atom).collect())
                .collect()
        })
        .collect();
    let mut widths = vec![0usize; servers];
    for row in &cells {
        for (s, col) in row.iter().enumerate() {
            for item in col {
                widths[s] = widths[s].max(item.len());
            }
        }
    }
    for (s, w) in widths.iter_mut().enumerate() {
        *w = (*w).max(format!("server {}", s + 1).len());
    }
    let head_width = plans
        .iter()
        .map(|p| format!("theta = {}", p.theta).len())
        .max()
        .unwrap_or(0);

    let mut out = String::new();
    let sep: String = {
        let mut line = format!("{}-+", "-".repeat(head_width));
        for w in &widths {
            line.push_str(&format!("-{}-+", "-".repeat(*w)));
        }
        line.pop();
        line
    };
    out.push_str(&format!("{:head_width$} |", ""));
    for (s, w) in widths.iter().enumerate() {
        out.push_str(&format!(" {:w$} |", format!("server {}", s + 1)));
    }
    out.pop();
    out.truncate(out.trim_end_matches(' ').len());
    out.push('\n');
    out.push_str(&sep);
    out.push('\n');
    for (plan, row) in plans.iter().zip(&cells) {
        let height = row.iter().map(Vec::len).max().unwrap_or(0).max(1);
        for line in 0..height {
            let head = if line == 0 {
                format!("theta = {}", plan.theta)
            } else {
                String::new()
            };
            out.push_str(&format!("{head:head_width$} |"));
            for (s, w) in widths.iter().enumerate() {
                let item = row[s].get(line).map(String::as_str).unwrap_or("");
                out.push_str(&format!(" {item:w$} |"));
            }
            out.pop();
            let trimmed = out.trim_end_matches(' ').len();
            out.truncate(trimmed);
            out.push('\n');
        }
        out.push_str(&sep);
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ServerAtoms {
    pub server: usize,
    /// Each atom as `[[message, logical position], ...]`.
    pub atoms: Vec<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanRow {
    pub theta: usize,
    #[serde(rename = "L")]
    pub message_len: usize,
    pub servers: Vec<ServerAtoms>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanExport {
    pub rows: Vec<PlanRow>,
}

impl PlanExport {
    pub fn new(plans: &[SchemePlan]) -> Self {
        let rows = plans
            .iter()
            .map(|p| PlanRow {
                theta: p.theta,
                message_len: p.message_len,
                servers: p
                    .queries
                    .iter()
                    .enumerate()
                    .map(|(s, atoms)| ServerAtoms {
                        server: s + 1,
                        atoms: atoms
                            .iter()
                            .map(|a| a.refs.iter().map(|r| [r.message, r.position]).collect())
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Self { rows }
    }
}

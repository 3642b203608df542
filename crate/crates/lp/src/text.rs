//! Writes programs in the CPLEX LP text format, for cross-checking with
//! external solvers.

use std::fmt::Write as _;

use crate::milp::MixedIntegerProgram;
use crate::model::{LinearProgram, Relation, Sense};

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert(0, '_');
    }
    out
}

fn term(buf: &mut String, first: bool, coef: f64, var: &str) {
    if coef < 0.0 {
        let _ = write!(buf, " - {} {}", -coef, var);
    } else if first {
        let _ = write!(buf, " {coef} {var}");
    } else {
        let _ = write!(buf, " + {coef} {var}");
    }
}

/// Renders `lp` as LP-format text.
pub fn write_lp(lp: &LinearProgram) -> String {
    write_impl(lp, &[])
}

/// Renders `mip` as LP-format text with a `Binaries` section.
pub fn write_mip(mip: &MixedIntegerProgram) -> String {
    write_impl(&mip.lp, &mip.binaries)
}

fn write_impl(lp: &LinearProgram, binaries: &[usize]) -> String {
    let vars: Vec<String> = (0..lp.num_vars()).map(|j| sanitize(&lp.var_name(j))).collect();
    let mut s = String::new();
    s.push_str(match lp.sense {
        Sense::Min => "Minimize\n",
        Sense::Max => "Maximize\n",
    });
    s.push_str(" obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut s, first, c, &vars[j]);
            first = false;
        }
    }
    if lp.objective_offset != 0.0 || first {
        let c = lp.objective_offset;
        if c < 0.0 {
            let _ = write!(s, " - {}", -c);
        } else if first {
            let _ = write!(s, " {c}");
        } else {
            let _ = write!(s, " + {c}");
        }
    }
    s.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let _ = write!(s, " {}:", sanitize(&lp.row_name(i)));
        let mut first = true;
        for &(j, a) in &row.coeffs {
            term(&mut s, first, a, &vars[j]);
            first = false;
        }
        if first {
            s.push_str(" 0 ");
            s.push_str(&vars.first().cloned().unwrap_or_else(|| "_zero".into()));
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(s, " {rel} {}", row.rhs);
    }
    s.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let v = &vars[j];
        match (l.is_finite(), u.is_finite()) {
            (false, false) => {
                let _ = writeln!(s, " {v} free");
            }
            (true, true) if l == u => {
                let _ = writeln!(s, " {v} = {l}");
            }
            (true, true) => {
                let _ = writeln!(s, " {l} <= {v} <= {u}");
            }
            (true, false) => {
                let _ = writeln!(s, " {v} >= {l}");
            }
            (false, true) => {
                let _ = writeln!(s, " -inf <= {v} <= {u}");
            }
        }
    }
    if !binaries.is_empty() {
        s.push_str("Binaries\n");
        for &j in binaries {
            let _ = writeln!(s, " {}", vars[j]);
        }
    }
    s.push_str("End\n");
    s
}

//! Plain-text dump of a problem instance for offline inspection.
//!
//! ```text
//! qcqp 1
//! vars <n> objective <index>
//! label <offset> <len> <name>
//! form <id> <dim>
//! <dim rows of dim values>
//! constraint <id> constant <c> blocks <count> linear <count>
//! block <offset> <form>
//! lin <index> <coefficient>
//! ```

use std::io::Write;

use super::problem::MaxMinQcqp;
use crate::error::Result;

pub fn write_problem(prob: &MaxMinQcqp, out: &mut impl Write) -> Result<()> {
    writeln!(out, "qcqp 1")?;
    writeln!(out, "vars {} objective {}", prob.num_vars(), prob.objective())?;
    for (off, len, name) in prob.labels() {
        writeln!(out, "label {off} {len} {name}")?;
    }
    for (i, f) in prob.forms().iter().enumerate() {
        writeln!(out, "form {i} {}", f.nrows())?;
        for r in 0..f.nrows() {
            let row: Vec<String> = f.row(r).iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    for (i, c) in prob.constraints().iter().enumerate() {
        writeln!(
            out,
            "constraint {i} constant {:e} blocks {} linear {}",
            c.constant,
            c.blocks.len(),
            c.linear.len()
        )?;
        for (off, f) in &c.blocks {
            writeln!(out, "block {off} {f}")?;
        }
        for (j, a) in &c.linear {
            writeln!(out, "lin {j} {a:e}")?;
        }
    }
    Ok(())
}

pub fn to_text(prob: &MaxMinQcqp) -> String {
    let mut buf = Vec::new();
    write_problem(prob, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("dump is ASCII")
}

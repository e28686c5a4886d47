//! Diagnostics CSV stream.

use std::io::Write;

use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};

pub const DIAG_COLUMNS: [&str; 14] = [
    "t", "mass", "u_min", "u_max", "E_dir", "E_pot", "E_curv", "E_total", "S", "R", "osc",
    "diss_x", "diss_y", "stopped",
];

/// Row text with 17 significant digits per value.
pub fn format_row(r: &DiagRecord) -> String {
    let vals = [
        r.t,
        r.mass,
        r.u_min,
        r.u_max,
        r.e_dirichlet,
        r.e_potential,
        r.e_curvature,
        r.e_total,
        r.s_entropy,
        r.r_value,
        r.osc_ratio,
        r.dissipation_x,
        r.dissipation_y,
    ];
    let mut s = String::with_capacity(320);
    for v in vals {
        s.push_str(&format!("{v:.16e},"));
    }
    s.push(if r.stopped { '1' } else { '0' });
    s
}

pub fn parse_row(line: &str) -> Result<DiagRecord> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != DIAG_COLUMNS.len() {
        return Err(Error::Parse(format!(
            "diagnostics row has {} fields, expected {}",
            f.len(),
            DIAG_COLUMNS.len()
        )));
    }
    let n = |k: usize| {
        f[k].parse::<f64>()
            .map_err(|e| Error::Parse(format!("column {}: {e}", DIAG_COLUMNS[k])))
    };
    let stopped = match f[13] {
        "0" => false,
        "1" => true,
        other => return Err(Error::Parse(format!("stopped must be 0 or 1, got {other:?}"))),
    };
    Ok(DiagRecord {
        t: n(0)?,
        mass: n(1)?,
        u_min: n(2)?,
        u_max: n(3)?,
        e_dirichlet: n(4)?,
        e_potential: n(5)?,
        e_curvature: n(6)?,
        e_total: n(7)?,
        s_entropy: n(8)?,
        r_value: n(9)?,
        osc_ratio: n(10)?,
        dissipation_x: n(11)?,
        dissipation_y: n(12)?,
        stopped,
    })
}

/// Writes the header before the first row.
pub struct DiagWriter<W: Write> {
    out: W,
    header_written: bool,
}

impl<W: Write> DiagWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            header_written: false,
        }
    }

    pub fn append(&mut self, r: &DiagRecord) -> std::io::Result<()> {
        if !self.header_written {
            writeln!(self.out, "{}", DIAG_COLUMNS.join(","))?;
            self.header_written = true;
        }
        writeln!(self.out, "{}", format_row(r))
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

//! Plain-text container for causal fermion systems.
//!
//! ```text
//! cfs-system 1
//! dim <N>
//! spin <n>
//! atoms <count>
//! atom <index>
//! weight <w>
//! rank <r>
//! nu <nu_1> ... <nu_r>
//! frame <re im> pairs, one line per row of V (N lines)
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::system::{Atom, CausalFermionSystem, DiscreteMeasure, OperatorPoint};

pub const HEADER: &str = "cfs-system 1";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_system(sys: &CausalFermionSystem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "dim {}", sys.dim());
    let _ = writeln!(s, "spin {}", sys.spin_dim());
    let _ = writeln!(s, "atoms {}", sys.measure().len());
    for (k, a) in sys.measure().atoms().iter().enumerate() {
        let _ = writeln!(s, "atom {k}");
        let _ = writeln!(s, "weight {}", fmt_f64(a.weight));
        let _ = writeln!(s, "rank {}", a.point.rank());
        let nu: Vec<String> = a.point.spectrum().iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(s, "nu {}", nu.join(" "));
        let v = a.point.frame();
        for i in 0..v.rows() {
            let row: Vec<String> = v.row(i).iter().map(|z| format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    s
}

/// Line cursor shared by the text readers in this crate.
pub(crate) struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    pub line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines { it: text.lines().enumerate(), line: 0 }
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        for (k, l) in self.it.by_ref() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.line = k + 1;
            return Ok(t);
        }
        Err(Error::Parse { line: self.line + 1, msg: "unexpected end of input".into() })
    }

    /// A line `key rest...`, returning the rest.
    pub fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next_line()?;
        let mut parts = l.splitn(2, char::is_whitespace);
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(parts.next().unwrap_or("").trim())
    }

    pub fn keyed_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.keyed(key)?;
        v.parse().map_err(|_| self.err(format!("`{key}` expects an integer, got `{v}`")))
    }

    pub fn floats(&self, s: &str, expect: usize) -> Result<Vec<f64>> {
        let v: std::result::Result<Vec<f64>, _> = s.split_whitespace().map(str::parse).collect();
        let v = v.map_err(|_| self.err("malformed number"))?;
        if v.len() != expect {
            return Err(self.err(format!("expected {expect} numbers, found {}", v.len())));
        }
        Ok(v)
    }

    pub fn complex_row(&mut self, expect: usize) -> Result<Vec<C64>> {
        let l = self.next_line()?;
        let v = self.floats(l, 2 * expect)?;
        Ok(v.chunks(2).map(|p| C64::new(p[0], p[1])).collect())
    }

    pub fn finish(&mut self) -> Result<()> {
        match self.next_line() {
            Ok(_) => Err(self.err("trailing content")),
            Err(_) => Ok(()),
        }
    }
}

pub fn read_system(text: &str) -> Result<CausalFermionSystem> {
    let mut lines = Lines::new(text);
    let head = lines.next_line()?;
    if head != HEADER {
        return Err(lines.err(format!("unsupported header `{head}`, expected `{HEADER}`")));
    }
    let dim = lines.keyed_usize("dim")?;
    let spin = lines.keyed_usize("spin")?;
    let count = lines.keyed_usize("atoms")?;
    let mut atoms = Vec::with_capacity(count);
    for k in 0..count {
        let idx = lines.keyed_usize("atom")?;
        if idx != k {
            return Err(lines.err(format!("atom index {idx} out of sequence")));
        }
        let w = lines.keyed("weight")?;
        let weight: f64 = w.parse().map_err(|_| lines.err("malformed weight"))?;
        let rank = lines.keyed_usize("rank")?;
        let nu_s = lines.keyed("nu")?;
        let nu = lines.floats(nu_s, rank)?;
        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            rows.push(lines.complex_row(rank)?);
        }
        let frame = if rank == 0 { CMat::zeros(dim, 0) } else { CMat::from_rows(&rows) };
        let point = OperatorPoint::from_raw_parts(frame, nu, spin).map_err(|e| lines.err(e.to_string()))?;
        atoms.push(Atom { point, weight });
    }
    lines.finish()?;
    CausalFermionSystem::new(dim, spin, DiscreteMeasure::new(atoms)?)
}

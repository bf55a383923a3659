//! Plain CSV emission with full double precision.

use std::fmt::Write;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    out: String,
    width: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut out = String::new();
        let cols: Vec<&str> = header.iter().map(|s| s.as_ref()).collect();
        writeln!(out, "{}", cols.join(",")).expect("write to String");
        Self {
            out,
            width: cols.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        writeln!(self.out, "{}", cells.join(",")).expect("write to String");
    }

    pub fn finish(self) -> String {
        self.out
    }
}

//! CSV output with a commented header.

use std::io::{self, Write};

/// Twelve significant digits in plain decimal notation.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // exponent after rounding, so 0.9999999999999 counts as 1
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.trim_start_matches('-').trim_start_matches(['0', '.']).is_empty() {
        "0".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Writes `# ` prefixed comment lines, then the CSV body.
    pub fn write<W: Write>(&self, out: W, comments: &str) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        for line in comments.lines() {
            if line.is_empty() {
                writeln!(out, "#")?;
            } else {
                writeln!(out, "# {line}")?;
            }
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn to_bytes(&self, comments: &str) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf, comments).expect("writing to memory");
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.0), "1.00000000000");
        assert_eq!(num(0.998476), "0.998476000000");
        assert_eq!(num(1234.5), "1234.50000000");
        assert_eq!(num(-2.5e-5), "-0.0000250000000000");
        assert_eq!(num(1e13), "10000000000000");
        assert_eq!(num(0.99999999999995), "1.00000000000");
        assert_eq!(num(9.9999999999996), "10.0000000000");
        assert_eq!(num(std::f64::consts::PI), "3.14159265359");
    }

    #[test]
    fn header_then_body() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(1.0), "x".into()]);
        let s = String::from_utf8(t.to_bytes("qst 0.1.0\n\nseed = 3")).unwrap();
        assert_eq!(s, "# qst 0.1.0\n#\n# seed = 3\na,b\n1.00000000000,x\n");
    }
}

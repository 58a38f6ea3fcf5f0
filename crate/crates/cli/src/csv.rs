//! Deterministic CSV emission. Floats use Rust's shortest round-trip
//! formatting, so repeated runs are byte-identical.

/// A CSV being built: schema comment, header, rows.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    /// `schema` names the layout, e.g. "ts-cache-sim/ber-sweep v1".
    pub fn new(schema: &str, header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str("# schema: ");
        buf.push_str(schema);
        buf.push('\n');
        buf.push_str(&header.join(","));
        buf.push('\n');
        Self {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width mismatch");
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Format a float with full round-trip precision.
pub fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_line_and_rows() {
        let mut c = Csv::new("x/y v1", &["a", "b"]);
        c.row(&["1".into(), num(0.5)]);
        let text = String::from_utf8(c.into_bytes()).unwrap();
        assert_eq!(text, "# schema: x/y v1\na,b\n1,0.5\n");
    }

    #[test]
    fn integral_floats_keep_a_decimal() {
        assert_eq!(num(2.0), "2.0");
        assert_eq!(num(0.0620250397), "0.0620250397");
    }
}

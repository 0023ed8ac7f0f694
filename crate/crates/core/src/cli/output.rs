/// Twelve significant digits.
pub fn format_row(x: f64) -> String {
    format!("{x:.11e}")
}

/// In-memory CSV table. Rows may carry a leading text label.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<String>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.header.len());
        self.rows.push(values.into_iter().map(format_row).collect::<Vec<_>>().join(","));
    }

    pub fn push_labeled(&mut self, label: &str, values: Vec<f64>) {
        debug_assert_eq!(values.len() + 1, self.header.len());
        let mut fields = vec![label.to_string()];
        fields.extend(values.into_iter().map(format_row));
        self.rows.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

use std::io::Write;
use std::path::Path;

use super::CliError;

/// A CSV document assembled in memory so it can be written atomically.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header, rows, then `# config_hash=<hash> version=<version>`.
    pub fn render(&self, hash: &str) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Resource(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let mut buf = w.into_inner().map_err(|e| CliError::Resource(format!("csv: {e}")))?;
        writeln!(buf, "# config_hash={hash} version={}", env!("CARGO_PKG_VERSION"))
            .map_err(|e| CliError::Resource(e.to_string()))?;
        Ok(buf)
    }
}

/// Writes to `path`, or stdout when absent.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| CliError::Resource(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Resource(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let mut t = Table::new(["a", "b"]);
        t.push([1.5, 2.0]);
        t.push(["RMS"]);
        let s = String::from_utf8(t.render("abc").unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[..3], ["a,b", "1.5,2", "RMS"]);
        assert!(lines[3].starts_with("# config_hash=abc version="));
        assert_eq!(lines.len(), 4);
    }
}

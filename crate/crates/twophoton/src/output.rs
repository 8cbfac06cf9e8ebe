//! Output files: CSV tables and key-value records, each opening with a
//! comment header, written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use crate::config::RunConfig;

/// One file destined for the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: &'static str,
    pub contents: String,
}

/// `# twophoton <command>` followed by the config as `#@` lines.
pub fn header(command: &str, cfg: &RunConfig) -> String {
    format!("# twophoton {command}\n{}", cfg.header())
}

/// CSV body: `# key = value` metadata, a header row, then one row per sample.
///
/// Every column must have the same length; values are written in shortest
/// round-trip scientific notation.
pub fn csv(head: &str, meta: &[(&str, String)], columns: &[(&str, &[f64])]) -> String {
    let rows = columns.first().map_or(0, |c| c.1.len());
    assert!(columns.iter().all(|c| c.1.len() == rows), "ragged columns");
    let mut out = String::with_capacity(head.len() + rows * columns.len() * 24);
    out.push_str(head);
    for (k, v) in meta {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..rows {
        for (j, (_, values)) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:e}", values[i]);
        }
        out.push('\n');
    }
    out
}

/// Plain `key = value` record after the header.
pub fn record(head: &str, fields: &[(&str, String)]) -> String {
    let mut out = head.to_string();
    for (k, v) in fields {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let written = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if written.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    written
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let text = csv(
            "# h\n",
            &[("baseline", "2e0".into())],
            &[("a", &[1.0, 0.5]), ("b", &[-3e-9, 0.0])],
        );
        assert_eq!(text, "# h\n# baseline = 2e0\na,b\n1e0,-3e-9\n5e-1,0e0\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

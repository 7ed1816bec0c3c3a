//! Whitespace-separated `i j k value` text, 1-based indices. Lines starting
//! with `#` are comments; an optional `% Q P S` line fixes the dims,
//! otherwise each dim is the largest index seen in that mode.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Entry, SparseTensor3};

pub fn parse_tns(path: impl AsRef<Path>) -> Result<SparseTensor3> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tns_str(&text, &path.display().to_string())
}

/// Parses `.tns` text; `origin` names the source in error messages.
pub fn parse_tns_str(text: &str, origin: &str) -> Result<SparseTensor3> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut header: Option<(usize, [usize; 3])> = None;
    let mut entries = Vec::new();
    let mut first_seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut lines = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('%') {
            if header.is_some() {
                return Err(err(lineno, "second dims header".into()));
            }
            if !entries.is_empty() {
                return Err(err(lineno, "dims header must precede entries".into()));
            }
            let dims: Vec<usize> = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(lineno, format!("bad dims header: {e}")))?;
            if dims.len() != 3 || dims.contains(&0) {
                return Err(err(lineno, "dims header needs three positive integers".into()));
            }
            header = Some((lineno, [dims[0], dims[1], dims[2]]));
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(lineno, format!("expected 4 columns, found {}", fields.len())));
        }
        let mut idx = [0usize; 3];
        for (slot, field) in idx.iter_mut().zip(&fields[..3]) {
            let v: usize = field
                .parse()
                .map_err(|_| err(lineno, format!("index '{field}' is not a positive integer")))?;
            if v == 0 {
                return Err(err(lineno, "indices are 1-based; found 0".into()));
            }
            *slot = v - 1;
        }
        let value: f64 = fields[3]
            .parse()
            .map_err(|_| err(lineno, format!("value '{}' is not a number", fields[3])))?;
        if !value.is_finite() {
            return Err(err(lineno, "value is not finite".into()));
        }
        let key = (idx[0], idx[1], idx[2]);
        if let Some(prev) = first_seen.insert(key, lineno) {
            return Err(err(
                lineno,
                format!("duplicate coordinate {} {} {} (first on line {prev})", idx[0] + 1, idx[1] + 1, idx[2] + 1),
            ));
        }
        entries.push(Entry::new(idx[0], idx[1], idx[2], value));
        lines.push(lineno);
    }

    let dims = match header {
        Some((hline, dims)) => {
            for (e, &lineno) in entries.iter().zip(&lines) {
                if e.q >= dims[0] || e.p >= dims[1] || e.s >= dims[2] {
                    return Err(err(
                        lineno,
                        format!("index beyond dims {:?} declared on line {hline}", dims),
                    ));
                }
            }
            dims
        }
        None => {
            if entries.is_empty() {
                return Err(err(0, "no entries and no dims header".into()));
            }
            let mut dims = [0usize; 3];
            for e in &entries {
                dims[0] = dims[0].max(e.q + 1);
                dims[1] = dims[1].max(e.p + 1);
                dims[2] = dims[2].max(e.s + 1);
            }
            dims
        }
    };
    SparseTensor3::new(dims, entries).map_err(|e| err(0, e.to_string()))
}

/// Serialises with a dims header and shortest round-trip value formatting.
pub fn write_tns_string(x: &SparseTensor3) -> String {
    let [q, p, s] = x.dims();
    let mut out = format!("% {q} {p} {s}\n");
    for e in x.entries() {
        out.push_str(&format!("{} {} {} {}\n", e.q + 1, e.p + 1, e.s + 1, e.value));
    }
    out
}

pub fn write_tns(x: &SparseTensor3, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(write_tns_string(x).as_bytes())
        .map_err(|e| Error::io(path, e))
}

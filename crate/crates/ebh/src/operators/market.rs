// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::Path;

use super::csr::SparseCsr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// A coordinate-format Matrix Market file after ingestion.
#[derive(Debug, Clone)]
pub struct MarketMatrix {
    pub csr: SparseCsr,
    pub symmetry: Symmetry,
    /// `%` comment lines following the banner, without the leading `%`.
    pub comments: Vec<String>,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MarketMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<MarketMatrix> {
    let perr = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, banner) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(perr(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::UnsupportedField(tokens[2].clone()));
    }
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(Error::UnsupportedField(other.to_string())),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };

    let mut comments = Vec::new();
    let (size_line, size) = loop {
        let (no, l) = lines.next().ok_or_else(|| perr(2, "missing size line"))?;
        let t = l.trim();
        if let Some(c) = t.strip_prefix('%') {
            comments.push(c.to_string());
        } else if !t.is_empty() {
            break (no, t);
        }
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| perr(size_line, "size line must be 'rows cols nnz'"))?;
    if dims.len() != 3 {
        return Err(perr(size_line, "size line must be 'rows cols nnz'"));
    }
    let (rows, cols, declared) = (dims[0], dims[1], dims[2]);
    if rows != cols {
        return Err(Error::BadDimension(format!("matrix must be square, got {rows}x{cols}")));
    }

    let mut triplets = Vec::with_capacity(declared * 2);
    let mut seen = 0;
    for (no, l) in lines {
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if seen == declared {
            return Err(perr(no, "more entries than declared"));
        }
        let mut it = t.split_whitespace();
        let mut index = || -> Result<usize> {
            let v: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr(no, "bad index"))?;
            if v == 0 || v > rows {
                return Err(perr(no, "index out of range"));
            }
            Ok(v - 1)
        };
        let i = index()?;
        let j = index()?;
        let v: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(no, "bad value"))?;
        if it.next().is_some() {
            return Err(perr(no, "trailing tokens"));
        }
        triplets.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            }
        }
        seen += 1;
    }
    if seen != declared {
        return Err(perr(
            text.lines().count(),
            &format!("file truncated: {seen} of {declared} entries"),
        ));
    }
    Ok(MarketMatrix {
        csr: SparseCsr::from_triplets(rows, &triplets)?,
        symmetry,
        comments,
    })
}

/// Write `a` as a general coordinate real file.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseCsr, comments: &[&str]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate real general")?;
    for c in comments {
        writeln!(f, "%{c}")?;
    }
    writeln!(f, "{} {} {}", a.n, a.n, a.nnz())?;
    for i in 0..a.n {
        for (j, v) in a.row(i) {
            writeln!(f, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Dense;

    #[test]
    fn diagonal_file() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n% a comment\n2 2 2\n1 1 1.0\n2 2 2.0\n",
        )
        .unwrap();
        assert_eq!(m.csr.to_dense(), Dense::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
        assert_eq!(m.comments, vec![" a comment".to_string()]);
    }

    #[test]
    fn symmetric_lower_triangle_is_mirrored() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 4\n2 1 -1\n3 2 -2\n3 3 5\n";
        let m = parse_matrix_market(text).unwrap();
        let mut oracle = Dense::zeros(3, 3);
        for (i, j, v) in [(0, 0, 4.0), (1, 0, -1.0), (2, 1, -2.0), (2, 2, 5.0)] {
            oracle[(i, j)] = v;
            oracle[(j, i)] = v;
        }
        assert_eq!(m.csr.to_dense(), oracle);
        assert_eq!(m.symmetry, Symmetry::Symmetric);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n";
        assert!(matches!(parse_matrix_market(text), Err(Error::Parse { .. })));
        let text = "%%MatrixMarket matrix coordinate real general\n";
        assert!(matches!(parse_matrix_market(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn unsupported_fields() {
        for field in ["complex", "pattern"] {
            let text = format!("%%MatrixMarket matrix coordinate {field} general\n1 1 1\n1 1 1\n");
            assert!(matches!(parse_matrix_market(&text), Err(Error::UnsupportedField(_))));
        }
    }

    #[test]
    fn bad_banner_and_indices() {
        assert!(matches!(parse_matrix_market("hello\n"), Err(Error::Parse { line: 1, .. })));
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(parse_matrix_market(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn write_then_read() {
        let a = SparseCsr::from_triplets(3, &[(0, 0, 1.5), (2, 1, -0.25), (1, 2, 1e-300)]).unwrap();
        let dir = std::env::temp_dir().join(format!("ebh-mtx-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.mtx");
        write_matrix_market(&path, &a, &["generated"]).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(back.csr, a);
        assert_eq!(back.comments, vec!["generated".to_string()]);
        fs::remove_dir_all(dir).ok();
    }
}

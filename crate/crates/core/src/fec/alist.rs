//! Sparse binary parity-check matrices and the alist interchange format.
//!
//! The alist layout is the usual sparse text form: dimensions, maximum
//! column/row degrees, per-column and per-row degree lists, then the
//! one-based nonzero positions per column and per row, each line padded
//! with zeros up to the maximum degree. The writer always emits this
//! canonical padded form, so write → parse → write is byte-identical.

use crate::error::{Error, Result};

/// A sparse binary matrix stored as per-row sorted column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    n_cols: usize,
    rows: Vec<Vec<u32>>,
}

impl SparseBinaryMatrix {
    /// Build from per-row column-index lists. Indices must be in range and
    /// strictly increasing within each row.
    pub fn new(n_cols: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        for (r, cols) in rows.iter().enumerate() {
            for pair in cols.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(Error::Parse(format!(
                        "row {r}: column indices must be strictly increasing"
                    )));
                }
            }
            if let Some(&last) = cols.last() {
                if last as usize >= n_cols {
                    return Err(Error::Parse(format!(
                        "row {r}: column index {last} out of range for {n_cols} columns"
                    )));
                }
            }
        }
        Ok(Self { n_cols, rows })
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Per-row sorted column indices.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Transposed view: per-column sorted row indices.
    pub fn col_lists(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c as usize].push(r as u32);
            }
        }
        cols
    }

    /// Number of stored nonzeros.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Syndrome test: does H·bits = 0 over GF(2)?
    pub fn syndrome_ok(&self, bits: &[u8]) -> Result<bool> {
        if bits.len() != self.n_cols {
            return Err(Error::SizeMismatch {
                context: "syndrome",
                expected: self.n_cols,
                actual: bits.len(),
            });
        }
        Ok(self.rows.iter().all(|row| {
            row.iter().fold(0u8, |acc, &c| acc ^ (bits[c as usize] & 1)) == 0
        }))
    }

    /// Serialize to canonical alist text.
    pub fn to_alist(&self) -> String {
        let cols = self.col_lists();
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.n_cols, self.rows.len()));
        out.push_str(&format!("{max_col} {max_row}\n"));
        push_degree_line(&mut out, cols.iter().map(Vec::len));
        push_degree_line(&mut out, self.rows.iter().map(Vec::len));
        for col in &cols {
            push_index_line(&mut out, col, max_col);
        }
        for row in &self.rows {
            push_index_line(&mut out, row, max_row);
        }
        out
    }

    /// Parse canonical (zero-padded) alist text, verifying that the column
    /// and row sections describe the same matrix.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut nums = text
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("alist: not an integer: {t:?}")))
            });
        let mut next = |what: &str| -> Result<i64> {
            nums.next()
                .unwrap_or_else(|| Err(Error::Parse(format!("alist: missing {what}"))))
        };

        let n = usize_field(next("column count")?, "column count")?;
        let m = usize_field(next("row count")?, "row count")?;
        let max_col = usize_field(next("max column degree")?, "max column degree")?;
        let max_row = usize_field(next("max row degree")?, "max row degree")?;

        let mut col_deg = Vec::with_capacity(n);
        for i in 0..n {
            let d = usize_field(next("column degree")?, "column degree")?;
            if d > max_col {
                return Err(Error::Parse(format!(
                    "alist: column {i} degree {d} exceeds stated maximum {max_col}"
                )));
            }
            col_deg.push(d);
        }
        let mut row_deg = Vec::with_capacity(m);
        for i in 0..m {
            let d = usize_field(next("row degree")?, "row degree")?;
            if d > max_row {
                return Err(Error::Parse(format!(
                    "alist: row {i} degree {d} exceeds stated maximum {max_row}"
                )));
            }
            row_deg.push(d);
        }

        // Column section: real entries are 1-based; padding zeros (if the
        // writer padded) are skipped.
        let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n);
        for (i, &deg) in col_deg.iter().enumerate() {
            cols.push(read_index_group(&mut next, deg, max_col, m, &format!("column {i}"))?);
        }
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m);
        for (i, &deg) in row_deg.iter().enumerate() {
            rows.push(read_index_group(&mut next, deg, max_row, n, &format!("row {i}"))?);
        }

        // Cross-check the two sections against each other.
        let matrix = Self::new(n, rows)?;
        let derived = matrix.col_lists();
        for (i, (got, want)) in derived.iter().zip(&cols).enumerate() {
            let mut want_sorted = want.clone();
            want_sorted.sort_unstable();
            if *got != want_sorted {
                return Err(Error::Parse(format!(
                    "alist: column {i} entries disagree with the row section"
                )));
            }
        }
        Ok(matrix)
    }
}

fn usize_field(v: i64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Parse(format!("alist: negative {what}: {v}")))
}

fn push_degree_line(out: &mut String, degrees: impl Iterator<Item = usize>) {
    let parts: Vec<String> = degrees.map(|d| d.to_string()).collect();
    out.push_str(&parts.join(" "));
    out.push('\n');
}

fn push_index_line(out: &mut String, idx: &[u32], pad_to: usize) {
    let mut parts: Vec<String> = idx.iter().map(|&v| (v + 1).to_string()).collect();
    while parts.len() < pad_to {
        parts.push("0".to_string());
    }
    out.push_str(&parts.join(" "));
    out.push('\n');
}

fn read_index_group(
    next: &mut impl FnMut(&str) -> Result<i64>,
    degree: usize,
    group_len: usize,
    index_bound: usize,
    what: &str,
) -> Result<Vec<u32>> {
    // Every group carries exactly `group_len` numbers: `degree` real
    // (one-based) entries followed by padding zeros.
    let mut entries = Vec::with_capacity(degree);
    while entries.len() < degree {
        let v = next("index entry")?;
        if v == 0 {
            return Err(Error::Parse(format!(
                "alist: {what}: padding zero before {degree} entries were read"
            )));
        }
        let v = usize_field(v, "index entry")?;
        if v > index_bound {
            return Err(Error::Parse(format!(
                "alist: {what}: index {v} out of range (max {index_bound})"
            )));
        }
        entries.push((v - 1) as u32);
    }
    for _ in degree..group_len {
        let v = next("padding entry")?;
        if v != 0 {
            return Err(Error::Parse(format!(
                "alist: {what}: expected padding zero, found {v}"
            )));
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_matrix() -> SparseBinaryMatrix {
        // 3 checks over 6 variables.
        SparseBinaryMatrix::new(
            6,
            vec![vec![0, 1, 2], vec![2, 3, 4], vec![0, 4, 5]],
        )
        .unwrap()
    }

    #[test]
    fn test_alist_round_trip_bit_exact() {
        let m = small_matrix();
        let text = m.to_alist();
        let parsed = SparseBinaryMatrix::from_alist(&text).unwrap();
        assert_eq!(m, parsed);
        assert_eq!(text, parsed.to_alist());
    }

    #[test]
    fn test_alist_header_contents() {
        let text = small_matrix().to_alist();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "6 3");
        assert_eq!(lines.next().unwrap(), "2 3");
    }

    #[test]
    fn test_syndrome() {
        let m = small_matrix();
        assert!(m.syndrome_ok(&[0, 0, 0, 0, 0, 0]).unwrap());
        // 1 at variable 0 violates checks 0 and 2.
        assert!(!m.syndrome_ok(&[1, 0, 0, 0, 0, 0]).unwrap());
        // Word in the null space: vars {0,1} flip check 0 twice... pick by
        // hand: x = [1,1,0,0,0,0] hits check0 twice, check2 once -> not ok.
        assert!(!m.syndrome_ok(&[1, 1, 0, 0, 0, 0]).unwrap());
        // x = [0,1,1,1,0,0]: check0 vars {1,2} even; check1 vars {2,3} even;
        // check2 none. Codeword.
        assert!(m.syndrome_ok(&[0, 1, 1, 1, 0, 0]).unwrap());
    }

    #[test]
    fn test_malformed_alist_rejected() {
        assert!(SparseBinaryMatrix::from_alist("not numbers").is_err());
        assert!(SparseBinaryMatrix::from_alist("2 1\n1 1\n1 1\n1\n3\n1\n").is_err());
    }
}

//! Complete discrete datasets with dense category codes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::varset::VarSet;

/// Maximum number of categories per column (codes are stored as `u16`).
pub const MAX_ARITY: usize = u16::MAX as usize;

/// An immutable, complete, category-coded dataset.
///
/// `rows` is row-major: cell `(r, c)` lives at `r * n + c` and is always a
/// valid code `< arity[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    arity: Vec<u16>,
    /// Original labels per column, indexed by category code (first-appearance order).
    labels: Vec<Vec<String>>,
    rows: Vec<u16>,
    m: usize,
}

impl Dataset {
    /// Encodes string records. Codes are assigned in first-appearance order
    /// per column; an empty (or whitespace-only) cell is a missing value.
    pub fn from_records<I, R, S>(names: Vec<String>, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[S]>,
        S: AsRef<str>,
    {
        let n = names.len();
        if n == 0 {
            return Err(Error::NoColumns);
        }
        let mut labels: Vec<Vec<String>> = (0..n).map(|_| Vec::new()).collect();
        let mut rows = Vec::new();
        let mut m = 0;
        for (r, record) in records.into_iter().enumerate() {
            let record = record.as_ref();
            if record.len() != n {
                return Err(Error::RaggedRow { row: r, expected: n, found: record.len() });
            }
            for (c, cell) in record.iter().enumerate() {
                let cell = cell.as_ref().trim();
                if cell.is_empty() {
                    return Err(Error::MissingCell { row: r, column: c });
                }
                let col = &mut labels[c];
                let code = match col.iter().position(|l| l == cell) {
                    Some(code) => code,
                    None => {
                        if col.len() >= MAX_ARITY {
                            return Err(Error::TooManyCategories { column: c, limit: MAX_ARITY });
                        }
                        col.push(cell.to_string());
                        col.len() - 1
                    }
                };
                rows.push(code as u16);
            }
            m += 1;
        }
        if m == 0 {
            return Err(Error::NoRows);
        }
        let arity: Vec<u16> = labels.iter().map(|l| l.len() as u16).collect();
        for (c, &a) in arity.iter().enumerate() {
            if a < 2 {
                return Err(Error::SingleCategory { column: c, name: names[c].clone() });
            }
        }
        Ok(Dataset { names, arity, labels, rows, m })
    }

    /// Builds a dataset from already-encoded rows with explicit arities.
    ///
    /// Zero rows are accepted here (the empty product of scores is 1), which
    /// is useful for tests of the score formulas.
    pub fn from_codes(names: Vec<String>, arity: Vec<u16>, rows: Vec<Vec<u16>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::NoColumns);
        }
        if arity.len() != n {
            return Err(Error::Shape(alloc::format!("{} names but {} arities", n, arity.len())));
        }
        for (c, &a) in arity.iter().enumerate() {
            if a < 2 {
                return Err(Error::SingleCategory { column: c, name: names[c].clone() });
            }
        }
        let m = rows.len();
        let mut flat = Vec::with_capacity(m * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRow { row: r, expected: n, found: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                if v >= arity[c] {
                    return Err(Error::CategoryOutOfRange { row: r, column: c, value: v, arity: arity[c] });
                }
                flat.push(v);
            }
        }
        let labels = arity
            .iter()
            .map(|&a| (0..a).map(|v| v.to_string()).collect())
            .collect();
        Ok(Dataset { names, arity, labels, rows: flat, m })
    }

    /// Convenience for tests: default names `X0, X1, …`.
    pub fn from_codes_unnamed(arity: Vec<u16>, rows: Vec<Vec<u16>>) -> Result<Self> {
        let names = (0..arity.len()).map(|i| alloc::format!("X{i}")).collect();
        Self::from_codes(names, arity, rows)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arity(&self) -> &[u16] {
        &self.arity
    }

    /// Category labels of column `c`, indexed by code.
    pub fn labels(&self, c: usize) -> &[String] {
        &self.labels[c]
    }

    pub fn row(&self, r: usize) -> &[u16] {
        let n = self.n();
        &self.rows[r * n..(r + 1) * n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        self.rows.chunks_exact(self.n().max(1)).take(self.m)
    }

    /// Same dataset with rows reordered by `perm` (`perm[r]` is the source row).
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.m {
            return Err(Error::Shape(alloc::format!("permutation of length {} for {} rows", perm.len(), self.m)));
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for &src in perm {
            rows.extend_from_slice(self.row(src));
        }
        Ok(Dataset { rows, ..self.clone() })
    }

    /// Contingency counts of `child` against the joint configurations of `parents`.
    pub fn family_counts(&self, child: usize, parents: VarSet) -> FamilyCounts {
        debug_assert!(!parents.contains(child));
        let n = self.n();
        let r = self.arity[child] as u64;
        let pa: Vec<usize> = parents.iter().collect();
        // radix: first parent (lowest index) is the most significant digit
        let mut keys: Vec<u64> = Vec::with_capacity(self.m);
        for row in self.rows.chunks_exact(n).take(self.m) {
            let mut config = 0u64;
            for &p in &pa {
                config = config * self.arity[p] as u64 + row[p] as u64;
            }
            keys.push(config * r + row[child] as u64);
        }
        keys.sort_unstable();
        let mut configs: Vec<ParentConfigCounts> = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let key = keys[i];
            let mut j = i;
            while j < keys.len() && keys[j] == key {
                j += 1;
            }
            let (config, state) = (key / r, (key % r) as usize);
            match configs.last_mut() {
                Some(last) if last.config == config => last.counts[state] += (j - i) as u32,
                _ => {
                    let mut counts = alloc::vec![0u32; r as usize];
                    counts[state] = (j - i) as u32;
                    configs.push(ParentConfigCounts { config, counts });
                }
            }
            i = j;
        }
        let q = pa.iter().map(|&p| self.arity[p] as f64).product();
        FamilyCounts { child_arity: self.arity[child] as usize, parent_configs: q, configs }
    }
}

/// Counts `N_ijk` for the parent configurations that occur in the data.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCounts {
    pub child_arity: usize,
    /// Total number of joint parent configurations `q` (product of parent arities).
    pub parent_configs: f64,
    /// Occurring configurations in increasing lexicographic index.
    pub configs: Vec<ParentConfigCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParentConfigCounts {
    /// Lexicographic index over the parent arities (lowest-index parent most significant).
    pub config: u64,
    /// Count per child state.
    pub counts: Vec<u32>,
}

impl FamilyCounts {
    pub fn total(&self) -> u64 {
        self.configs.iter().flat_map(|c| c.counts.iter()).map(|&x| x as u64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn encodes_first_appearance() {
        let ds = Dataset::from_records(
            vec!["A".into(), "B".into()],
            [["a", "x"], ["b", "x"], ["a", "y"]],
        )
        .unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.m(), 3);
        assert_eq!(ds.arity(), &[2, 2]);
        assert_eq!(ds.row(1), &[1, 0]);
        assert_eq!(ds.labels(1), &["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn rejects_missing_and_single_category() {
        let err = Dataset::from_records(vec!["A".into(), "B".into()], [["a", "x"], ["b", " "]]).unwrap_err();
        assert_eq!(err, Error::MissingCell { row: 1, column: 1 });
        let err = Dataset::from_records(vec!["A".into()], [["a"], ["a"]]).unwrap_err();
        assert!(matches!(err, Error::SingleCategory { column: 0, .. }));
        let err = Dataset::from_records(vec!["A".into(), "B".into()], [vec!["a", "b"], vec!["a"]]).unwrap_err();
        assert_eq!(err, Error::RaggedRow { row: 1, expected: 2, found: 1 });
    }

    #[test]
    fn reencoding_codes_is_identity() {
        let ds = Dataset::from_codes_unnamed(vec![3, 2], vec![vec![2, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let recs: Vec<Vec<String>> =
            ds.rows().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        let again = Dataset::from_records(ds.names().to_vec(), recs).unwrap();
        // first appearance order relabels 2,0,1 -> 0,1,2 on column 0
        assert_eq!(again.row(0), &[0, 0]);
        let sorted = Dataset::from_codes_unnamed(vec![2, 2], vec![vec![0, 0], vec![1, 1]]).unwrap();
        let recs: Vec<Vec<String>> =
            sorted.rows().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        let again = Dataset::from_records(sorted.names().to_vec(), recs).unwrap();
        assert_eq!(again.rows().collect::<Vec<_>>(), sorted.rows().collect::<Vec<_>>());
    }

    #[test]
    fn counts_empty_parent_set() {
        let ds = Dataset::from_codes_unnamed(vec![2], vec![vec![0], vec![1], vec![1]]).unwrap();
        let fc = ds.family_counts(0, VarSet::EMPTY);
        assert_eq!(fc.configs.len(), 1);
        assert_eq!(fc.configs[0].counts, vec![1, 2]);
    }

    #[test]
    fn counts_one_parent() {
        let ds = Dataset::from_codes_unnamed(vec![2, 2], vec![vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        let fc = ds.family_counts(0, VarSet::singleton(1));
        assert_eq!(fc.configs[0], ParentConfigCounts { config: 0, counts: vec![1, 1] });
        assert_eq!(fc.configs[1], ParentConfigCounts { config: 1, counts: vec![1, 0] });
        assert_eq!(fc.total(), 3);
        assert_eq!(fc.parent_configs, 2.0);
    }
}

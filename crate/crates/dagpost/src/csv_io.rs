//! Delimited-text ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use dagpost_core::Dataset;

use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// When false, columns are named `X0, X1, …`.
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { delimiter: b',', has_header: true }
    }
}

/// Reads categorical data; rows made only of whitespace are skipped.
pub fn read_dataset<R: Read>(reader: R, opts: CsvOptions) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .from_reader(reader);
    let names: Option<Vec<String>> = if opts.has_header {
        let h = rdr.headers().map_err(|e| CliError::Data(format!("header: {e}")))?;
        Some(h.iter().map(|s| s.trim().to_string()).collect())
    } else {
        None
    };
    let mut records: Vec<Vec<String>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("record {i}: {e}")))?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect());
    }
    let names = match names {
        Some(n) => n,
        None => {
            let width = records.first().map_or(0, Vec::len);
            (0..width).map(|i| format!("X{i}")).collect()
        }
    };
    Ok(Dataset::from_records(names, &records)?)
}

pub fn load_csv(path: &Path, opts: CsvOptions) -> Result<Dataset, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(f, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_header_and_skips_blank_rows() {
        let text = "A,B\na,x\n , \nb,y\nb,x\n";
        let ds = read_dataset(text.as_bytes(), CsvOptions::default()).unwrap();
        assert_eq!(ds.names(), ["A", "B"]);
        assert_eq!(ds.m(), 3);
        assert_eq!(ds.labels(0), ["a", "b"]);
    }

    #[test]
    fn headerless_and_semicolons() {
        let text = "1;2\n2;1\n";
        let ds = read_dataset(text.as_bytes(), CsvOptions { delimiter: b';', has_header: false }).unwrap();
        assert_eq!(ds.names(), ["X0", "X1"]);
        assert_eq!(ds.m(), 2);
    }

    #[test]
    fn data_errors_map_to_exit_four() {
        let ragged = read_dataset("A,B\n1,2\n1\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert_eq!(ragged.exit_code(), crate::error::EXIT_DATA);
        let missing = read_dataset("A,B\n1,\n2,1\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert_eq!(missing.exit_code(), crate::error::EXIT_DATA);
        let constant = read_dataset("A,B\n1,1\n1,2\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert_eq!(constant.exit_code(), crate::error::EXIT_DATA);
        let empty = read_dataset("A,B\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert_eq!(empty.exit_code(), crate::error::EXIT_DATA);
    }
}

//! Reader/writer for the LIBSVM text format, plus simple feature scaling.
//!
//! Format: one sample per line, `<label> <index>:<value> ...` with 1-based,
//! strictly increasing indices. Lines starting with `#` and blank lines are
//! skipped; a trailing `#` comment on a data line is ignored. Files whose
//! first two bytes are the gzip magic number are decompressed transparently.
//!
//! Labels are mapped onto `{-1, +1}`: inputs already in that set pass
//! through, and any other two-valued labeling (e.g. `{0, 1}` or `{1, 2}`)
//! maps the smaller value to `-1` and the larger to `+1`. More than two
//! distinct labels is an error.

use crate::objective::Dataset;
use flate2::read::GzDecoder;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use thiserror::Error;

/// Errors produced while reading LIBSVM data.
#[derive(Debug, Error)]
pub enum LibsvmError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dataset has {0} distinct labels; exactly two are required")]
    LabelCount(usize),
    #[error("dataset is empty")]
    Empty,
}

fn parse_err(line: usize, msg: impl Into<String>) -> LibsvmError {
    LibsvmError::Parse { line, msg: msg.into() }
}

/// One parsed sample: raw label plus sparse (1-based index, value) pairs.
struct SparseRow {
    label: f64,
    entries: Vec<(usize, f64)>,
}

fn parse_line(lineno: usize, line: &str) -> Result<Option<SparseRow>, LibsvmError> {
    let line = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = line.split_whitespace();
    let label_tok = match tokens.next() {
        Some(t) => t,
        None => return Ok(None), // blank or comment-only line
    };
    let label: f64 = label_tok
        .parse()
        .map_err(|_| parse_err(lineno, format!("bad label {label_tok:?}")))?;
    let mut entries = Vec::new();
    let mut last_index = 0usize;
    for tok in tokens {
        let (idx_s, val_s) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {tok:?}")))?;
        let idx: usize = idx_s
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad feature index {idx_s:?}")))?;
        if idx == 0 {
            return Err(parse_err(lineno, "feature indices are 1-based; got 0"));
        }
        if idx <= last_index {
            return Err(parse_err(
                lineno,
                format!("feature indices must be strictly increasing; {idx} after {last_index}"),
            ));
        }
        let val: f64 = val_s
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad feature value {val_s:?}")))?;
        entries.push((idx, val));
        last_index = idx;
    }
    Ok(Some(SparseRow { label, entries }))
}

/// Maps the raw label set onto `{-1, +1}`. See module docs for the rule.
fn map_labels(raw: &[f64]) -> Result<Vec<f64>, LibsvmError> {
    let mut distinct: BTreeSet<u64> = BTreeSet::new();
    for &l in raw {
        distinct.insert(l.to_bits());
        if distinct.len() > 2 {
            return Err(LibsvmError::LabelCount(distinct.len()));
        }
    }
    let values: Vec<f64> = distinct.iter().map(|b| f64::from_bits(*b)).collect();
    match values.len() {
        0 => Err(LibsvmError::Empty),
        1 => Err(LibsvmError::LabelCount(1)),
        2 => {
            let (lo, _hi) = if values[0] < values[1] {
                (values[0], values[1])
            } else {
                (values[1], values[0])
            };
            Ok(raw
                .iter()
                .map(|&l| if l == lo { -1.0 } else { 1.0 })
                .collect())
        }
        n => Err(LibsvmError::LabelCount(n)),
    }
}

/// Reads LIBSVM data from any reader (already decompressed).
pub fn read_libsvm<R: Read>(reader: R) -> Result<Dataset, LibsvmError> {
    let buf = BufReader::new(reader);
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut dim = 0usize;
    for (i, line) in buf.lines().enumerate() {
        let line = line?;
        if let Some(row) = parse_line(i + 1, &line)? {
            if let Some(&(max_idx, _)) = row.entries.last() {
                dim = dim.max(max_idx);
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(LibsvmError::Empty);
    }
    let raw_labels: Vec<f64> = rows.iter().map(|r| r.label).collect();
    let labels = map_labels(&raw_labels)?;
    let n = rows.len();
    let mut features = vec![0.0; n * dim];
    for (i, row) in rows.iter().enumerate() {
        for &(idx, val) in &row.entries {
            features[i * dim + (idx - 1)] = val;
        }
    }
    Ok(Dataset::new(features, labels, n, dim))
}

/// Reads a LIBSVM file from disk, decompressing gzip transparently
/// (detected by magic bytes, not extension).
pub fn read_libsvm_file(path: impl AsRef<Path>) -> Result<Dataset, LibsvmError> {
    let mut f = File::open(path)?;
    let mut magic = [0u8; 2];
    let got = f.read(&mut magic)?;
    let header = &magic[..got];
    let chained = header.to_vec();
    let rest = std::io::Cursor::new(chained).chain(f);
    if got == 2 && magic == [0x1f, 0x8b] {
        read_libsvm(GzDecoder::new(rest))
    } else {
        read_libsvm(rest)
    }
}

/// Writes a dataset in LIBSVM format. Zero entries are elided, so a
/// read-back reproduces the same dense matrix.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut writer: W) -> std::io::Result<()> {
    for i in 0..dataset.n_samples() {
        let label = dataset.labels()[i];
        if label >= 0.0 {
            write!(writer, "+1")?;
        } else {
            write!(writer, "-1")?;
        }
        for (j, &v) in dataset.row(i).iter().enumerate() {
            if v != 0.0 {
                write!(writer, " {}:{}", j + 1, fmt_value(v))?;
            }
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Shortest decimal string that round-trips the f64 exactly.
fn fmt_value(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("nan") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // `{}` on f64 prints the shortest representation that parses back
    // to the same bits, which is exactly what a round-tripping writer
    // needs.
    format!("{v}")
}

/// Feature normalization applied after loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalize {
    /// Leave features untouched.
    None,
    /// Affinely map each feature onto `[0, 1]`; constant features become 0.
    ScaleToUnitRange,
    /// Subtract the mean and divide by the standard deviation per feature;
    /// constant features become 0.
    Standardize,
}

/// Applies the chosen normalization column-by-column, in place.
pub fn normalize(dataset: &mut Dataset, how: Normalize) {
    if how == Normalize::None {
        return;
    }
    let n = dataset.n_samples();
    let d = dataset.dim();
    for j in 0..d {
        match how {
            Normalize::None => unreachable!(),
            Normalize::ScaleToUnitRange => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..n {
                    let v = dataset.row(i)[j];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let span = hi - lo;
                let feats = dataset.features_mut();
                for i in 0..n {
                    let v = &mut feats[i * d + j];
                    *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
                }
            }
            Normalize::Standardize => {
                let mut mean = 0.0;
                for i in 0..n {
                    mean += dataset.row(i)[j];
                }
                mean /= n as f64;
                let mut var = 0.0;
                for i in 0..n {
                    let v = dataset.row(i)[j] - mean;
                    var += v * v;
                }
                var /= n as f64;
                let sd = var.sqrt();
                let feats = dataset.features_mut();
                for i in 0..n {
                    let v = &mut feats[i * d + j];
                    *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use proptest::prelude::*;

    #[test]
    fn parses_basic_file() {
        let text = "\
# a comment line
+1 1:0.5 3:2.0
-1 2:1.5

+1 1:-1.0 2:0.25 3:0.125  # trailing comment
";
        let ds = read_libsvm(text.as_bytes()).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.dim(), 3);
        assert_eq!(ds.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(ds.row(1), &[0.0, 1.5, 0.0]);
        assert_eq!(ds.row(2), &[-1.0, 0.25, 0.125]);
        assert_eq!(ds.labels(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn maps_zero_one_labels() {
        let text = "0 1:1.0\n1 1:2.0\n";
        let ds = read_libsvm(text.as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
    }

    #[test]
    fn maps_one_two_labels() {
        let text = "2 1:1.0\n1 1:2.0\n2 1:3.0\n";
        let ds = read_libsvm(text.as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn rejects_three_labels() {
        let text = "1 1:1.0\n2 1:2.0\n3 1:3.0\n";
        let err = read_libsvm(text.as_bytes()).unwrap_err();
        assert!(matches!(err, LibsvmError::LabelCount(3)));
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(read_libsvm("+1 0:1.0\n-1 1:1.0\n".as_bytes()).is_err());
        assert!(read_libsvm("+1 2:1.0 2:2.0\n-1 1:1.0\n".as_bytes()).is_err());
        assert!(read_libsvm("+1 3:1.0 2:2.0\n-1 1:1.0\n".as_bytes()).is_err());
        assert!(read_libsvm("+1 x:1.0\n-1 1:1.0\n".as_bytes()).is_err());
        assert!(read_libsvm("+1 1:zzz\n-1 1:1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(
            read_libsvm("# nothing\n\n".as_bytes()),
            Err(LibsvmError::Empty)
        ));
    }

    #[test]
    fn gzip_detection_by_magic_bytes() {
        let text = "+1 1:0.5\n-1 2:1.25\n";
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(text.as_bytes()).unwrap();
        let gz = enc.finish().unwrap();

        let dir = tempfile::tempdir().unwrap();
        // Deliberately no .gz extension: detection must use content.
        let path = dir.path().join("data.libsvm");
        std::fs::write(&path, &gz).unwrap();
        let ds = read_libsvm_file(&path).unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.dim(), 2);

        // And a plain-text file through the same entry point.
        let plain = dir.path().join("plain.libsvm");
        std::fs::write(&plain, text).unwrap();
        let ds2 = read_libsvm_file(&plain).unwrap();
        assert_eq!(ds2.row(0), ds.row(0));
        assert_eq!(ds2.labels(), ds.labels());
    }

    #[test]
    fn write_then_read_round_trips() {
        let ds = Dataset::new(
            vec![0.5, 0.0, -2.25, 0.0, 1.0 / 3.0, 4.0],
            vec![1.0, -1.0],
            2,
            3,
        );
        let mut out = Vec::new();
        write_libsvm(&ds, &mut out).unwrap();
        let back = read_libsvm(out.as_slice()).unwrap();
        assert_eq!(back.n_samples(), 2);
        assert_eq!(back.dim(), 3);
        for i in 0..2 {
            assert_eq!(back.row(i), ds.row(i));
        }
        assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn scale_to_unit_range() {
        let mut ds = Dataset::new(
            vec![0.0, 5.0, 10.0, 5.0, 20.0, 5.0],
            vec![1.0, -1.0, 1.0],
            3,
            2,
        );
        normalize(&mut ds, Normalize::ScaleToUnitRange);
        assert_eq!(ds.row(0), &[0.0, 0.0]);
        assert_eq!(ds.row(1), &[0.5, 0.0]); // constant feature -> 0
        assert_eq!(ds.row(2), &[1.0, 0.0]);
    }

    #[test]
    fn standardize_gives_zero_mean_unit_sd() {
        let mut ds = Dataset::new(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![1.0, -1.0, 1.0, -1.0],
            4,
            1,
        );
        normalize(&mut ds, Normalize::Standardize);
        let mean: f64 = (0..4).map(|i| ds.row(i)[0]).sum::<f64>() / 4.0;
        let var: f64 = (0..4).map(|i| ds.row(i)[0].powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-15);
        assert!((var - 1.0).abs() < 1e-12);
    }

    proptest! {
        /// Any dense dataset survives a write/read round trip bit-exactly.
        #[test]
        fn round_trip_random(
            n in 1usize..6,
            d in 1usize..5,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let features: Vec<f64> = (0..n * d)
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(-100.0..100.0)
                    }
                })
                .collect();
            let labels: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            // Guarantee both classes and a nonzero in the last column so
            // the read-back dimension matches.
            let mut labels = labels;
            labels[0] = 1.0;
            if n > 1 { labels[1] = -1.0; }
            let mut features = features;
            features[(n - 1) * d + (d - 1)] = 1.5;
            let ds = Dataset::new(features, labels, n, d);
            if n == 1 {
                // single-class datasets are rejected, skip
                return Ok(());
            }
            let mut out = Vec::new();
            write_libsvm(&ds, &mut out).unwrap();
            let back = read_libsvm(out.as_slice()).unwrap();
            prop_assert_eq!(back.dim(), d);
            prop_assert_eq!(back.n_samples(), n);
            for i in 0..n {
                prop_assert_eq!(back.row(i), ds.row(i));
            }
            prop_assert_eq!(back.labels(), ds.labels());
        }

        /// The inferred dimension is the max feature index regardless of
        /// row order.
        #[test]
        fn dimension_is_permutation_invariant(perm_seed in 0u64..100) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut lines = vec![
                "+1 2:1.0".to_string(),
                "-1 5:2.0".to_string(),
                "+1 1:3.0 3:1.0".to_string(),
                "-1 4:0.5".to_string(),
            ];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
            lines.shuffle(&mut rng);
            let text = lines.join("\n");
            let ds = read_libsvm(text.as_bytes()).unwrap();
            prop_assert_eq!(ds.dim(), 5);
            prop_assert_eq!(ds.n_samples(), 4);
        }
    }
}

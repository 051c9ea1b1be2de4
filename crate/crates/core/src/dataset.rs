//! Dataset loading, normalization, synthesis, and fold splitting.
//!
//! The on-disk format is the UCR archive convention: one series per line,
//! `label<TAB>v1<TAB>...<TAB>vL`, no header. Comma-separated files are
//! accepted when the first line carries no TAB. Label tokens are mapped to
//! class indices by lexicographic order so train and test files always agree
//! on the mapping.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{EdmError, Result};
use crate::rng::SplitMix64;

/// A labeled set of equal-length univariate series.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesDataset {
    pub name: String,
    /// `n x L` values, one series per row.
    pub values: Array2<f64>,
    /// Class index per series, in `[0, n_classes)`.
    pub labels: Vec<usize>,
    /// Original label token -> class index, lexicographically assigned.
    pub label_map: BTreeMap<String, usize>,
}

impl TimeSeriesDataset {
    pub fn n_series(&self) -> usize {
        self.values.nrows()
    }

    /// Series length; equals the final monitored timestamp `max_T`.
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.n_series() == 0
    }

    pub fn n_classes(&self) -> usize {
        self.label_map.len()
    }

    pub fn series(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }
}

/// Loads a UCR-style TSV (or CSV) file.
pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<TimeSeriesDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EdmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_ucr(&text, &name, &path.display().to_string())
}

fn parse_ucr(text: &str, name: &str, origin: &str) -> Result<TimeSeriesDataset> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(EdmError::EmptyFile(origin.to_string()));
    }
    let sep = if lines[0].contains('\t') { '\t' } else { ',' };

    let mut tokens: Vec<String> = Vec::with_capacity(lines.len());
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(lines.len());
    let mut width: Option<usize> = None;
    for (lineno, line) in lines.iter().enumerate() {
        let line_1 = lineno + 1;
        let mut fields = line.split(sep);
        let label = fields.next().unwrap_or("").trim();
        if label.is_empty() {
            return Err(EdmError::Parse {
                line: line_1,
                msg: "missing label".to_string(),
            });
        }
        let mut row = Vec::new();
        for field in fields {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| EdmError::Parse {
                line: line_1,
                msg: format!("not a decimal real: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(EdmError::Parse {
                    line: line_1,
                    msg: format!("non-finite value: {field:?}"),
                });
            }
            row.push(v);
        }
        match width {
            None => {
                if row.len() < 2 {
                    return Err(EdmError::Parse {
                        line: line_1,
                        msg: format!("series must have length >= 2, got {}", row.len()),
                    });
                }
                width = Some(row.len());
            }
            Some(w) if w != row.len() => {
                return Err(EdmError::RaggedLengths {
                    line: line_1,
                    expected: w,
                    got: row.len(),
                });
            }
            _ => {}
        }
        tokens.push(label.to_string());
        rows.push(row);
    }

    let width = width.unwrap();
    let distinct: std::collections::BTreeSet<String> = tokens.iter().cloned().collect();
    let label_map: BTreeMap<String, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let labels = tokens.iter().map(|t| label_map[t]).collect();

    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((tokens.len(), width), flat).expect("rectangular rows");
    Ok(TimeSeriesDataset {
        name: name.to_string(),
        values,
        labels,
        label_map,
    })
}

/// Writes a dataset in the UCR TSV format. Values are rendered with the
/// shortest representation that round-trips, so save -> load is lossless.
pub fn save_ucr_tsv(ds: &TimeSeriesDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let token_of: BTreeMap<usize, &String> =
        ds.label_map.iter().map(|(t, &i)| (i, t)).collect();
    let mut out = String::new();
    for i in 0..ds.n_series() {
        out.push_str(token_of[&ds.labels[i]]);
        for v in ds.series(i) {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| EdmError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Z-normalizes each series independently to zero mean and unit population
/// standard deviation. Series with std below `1e-8` become all-zero.
pub fn z_normalize(ds: &TimeSeriesDataset) -> TimeSeriesDataset {
    let mut out = ds.clone();
    for mut row in out.values.rows_mut() {
        normalize_row(row.as_slice_mut().expect("contiguous row"));
    }
    out
}

/// In-place z-normalization of a single slice; shared with the k-NN distance
/// path so prefixes and full series use the same rule.
pub(crate) fn normalize_row(row: &mut [f64]) {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-8 {
        row.iter_mut().for_each(|v| *v = 0.0);
    } else {
        row.iter_mut().for_each(|v| *v = (*v - mean) / std);
    }
}

/// Generates a two-class synthetic set: pure Gaussian noise before `t_star`,
/// then class 1 shifts its mean by `gap` from `t_star` (1-based) onward.
/// Rows `0..n_per_class` are class 0, the rest class 1; values are drawn
/// row-major from a single `SplitMix64` stream, so the output is a pure
/// function of the arguments.
pub fn make_synthetic(
    n_per_class: usize,
    len: usize,
    t_star: usize,
    gap: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<TimeSeriesDataset> {
    if n_per_class == 0 || len < 2 {
        return Err(EdmError::InvalidParam(format!(
            "need n_per_class >= 1 and length >= 2, got {n_per_class} and {len}"
        )));
    }
    if t_star < 1 || t_star > len {
        return Err(EdmError::InvalidParam(format!(
            "t_star must lie in [1, {len}], got {t_star}"
        )));
    }
    if !(noise_sd > 0.0) {
        return Err(EdmError::InvalidParam(format!(
            "noise_sd must be positive, got {noise_sd}"
        )));
    }
    let n = 2 * n_per_class;
    let mut gen = SplitMix64::stream(seed, 0);
    let mut values = Array2::zeros((n, len));
    for i in 0..n {
        let class = usize::from(i >= n_per_class);
        for t in 1..=len {
            let mean = if class == 1 && t >= t_star { gap } else { 0.0 };
            values[(i, t - 1)] = mean + noise_sd * gen.next_normal();
        }
    }
    let labels = (0..n).map(|i| usize::from(i >= n_per_class)).collect();
    let label_map = BTreeMap::from([("0".to_string(), 0), ("1".to_string(), 1)]);
    Ok(TimeSeriesDataset {
        name: "synthetic".to_string(),
        values,
        labels,
        label_map,
    })
}

/// Stratified k-fold split: within each class the indices are shuffled by a
/// per-class stream of `(seed, class)` and dealt round-robin, so per-class
/// counts across folds differ by at most one. Folds are returned sorted.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(EdmError::InvalidParam(format!(
            "fold count must be >= 2, got {k}"
        )));
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(EdmError::TooFewPerClass {
                class,
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (class, members) in by_class.iter().enumerate() {
        let mut shuffled = members.clone();
        SplitMix64::stream(seed, class as u64).shuffle(&mut shuffled);
        for (pos, &idx) in shuffled.iter().enumerate() {
            folds[pos % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// `min(count, L)` equally spaced 1-based prefix lengths ending at `L`:
/// `ceil(i * L / m)` for `i = 1..=m`, deduplicated.
pub fn default_timestamps(len: usize, count: usize) -> Vec<usize> {
    let m = count.min(len).max(1);
    let mut ts: Vec<usize> = (1..=m).map(|i| (i * len).div_ceil(m)).collect();
    ts.dedup();
    ts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tab_separated_lines() {
        let ds = parse_ucr("1\t0.5\t0.3\n2\t0.1\t0.9\n", "toy", "mem").unwrap();
        assert_eq!(ds.n_series(), 2);
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels, vec![0, 1]);
        assert_eq!(ds.label_map["1"], 0);
        assert_eq!(ds.label_map["2"], 1);
        assert_eq!(ds.values[(0, 1)], 0.3);
    }

    #[test]
    fn falls_back_to_commas() {
        let ds = parse_ucr("a,1.0,2.0\nb,3.0,4.0\n", "toy", "mem").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.label_map["a"], 0);
    }

    #[test]
    fn label_tokens_sorted_lexicographically_not_by_appearance() {
        let ds = parse_ucr("2\t1\t1\n1\t2\t2\n", "toy", "mem").unwrap();
        // "1" < "2" even though "2" appears first.
        assert_eq!(ds.labels, vec![1, 0]);
    }

    #[test]
    fn ragged_lines_are_rejected_with_line_number() {
        let err = parse_ucr("1\t1\t2\n2\t1\t2\t3\n", "toy", "mem").unwrap_err();
        match err {
            EdmError::RaggedLengths {
                line,
                expected,
                got,
            } => {
                assert_eq!((line, expected, got), (2, 2, 3));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn bad_values_name_the_line() {
        let err = parse_ucr("1\t1\t2\n1\t1\tzap\n", "toy", "mem").unwrap_err();
        match err {
            EdmError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other:?}"),
        }
        assert!(matches!(
            parse_ucr("", "toy", "mem").unwrap_err(),
            EdmError::EmptyFile(_)
        ));
        assert!(parse_ucr("1\tNaN\t2\n", "toy", "mem").is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_ucr_tsv("/no/such/file.tsv").unwrap_err();
        assert!(err.to_string().contains("/no/such/file.tsv"));
    }

    #[test]
    fn z_normalize_hand_case() {
        let ds = parse_ucr("1\t1\t2\t3\nx\t5\t5\t5\n", "toy", "mem").unwrap();
        let z = z_normalize(&ds);
        let e = 1.224744871391589; // sqrt(3/2)
        assert!((z.values[(0, 0)] + e).abs() < 1e-12);
        assert!(z.values[(0, 1)].abs() < 1e-12);
        assert!((z.values[(0, 2)] - e).abs() < 1e-12);
        // Constant series collapse to zeros.
        for t in 0..3 {
            assert_eq!(z.values[(1, t)], 0.0);
        }
    }

    #[test]
    fn z_normalize_is_idempotent() {
        let ds = make_synthetic(5, 12, 4, 2.0, 1.0, 3).unwrap();
        let once = z_normalize(&ds);
        let twice = z_normalize(&once);
        for (a, b) in once.values.iter().zip(twice.values.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        for row in once.values.rows() {
            let n = row.len() as f64;
            let mean = row.sum() / n;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_shaped() {
        let a = make_synthetic(10, 20, 8, 1.5, 1.0, 42).unwrap();
        let b = make_synthetic(10, 20, 8, 1.5, 1.0, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_series(), 20);
        assert_eq!(a.len(), 20);
        assert_eq!(a.labels.iter().filter(|&&y| y == 0).count(), 10);
        assert_eq!(a.labels.iter().filter(|&&y| y == 1).count(), 10);
        let c = make_synthetic(10, 20, 8, 1.5, 1.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_gap_enters_only_after_t_star() {
        // Same seed, opposite gaps: the difference is exactly 2*gap on the
        // post-divergence block of class 1 and zero elsewhere.
        let gap = 3.0;
        let plus = make_synthetic(6, 15, 5, gap, 1.0, 11).unwrap();
        let minus = make_synthetic(6, 15, 5, -gap, 1.0, 11).unwrap();
        for i in 0..plus.n_series() {
            for t in 1..=plus.len() {
                let d = plus.values[(i, t - 1)] - minus.values[(i, t - 1)];
                let expect = if plus.labels[i] == 1 && t >= 5 { 2.0 * gap } else { 0.0 };
                assert!((d - expect).abs() < 1e-12, "i={i} t={t} d={d}");
            }
        }
    }

    #[test]
    fn synthetic_rejects_bad_params() {
        assert!(make_synthetic(0, 10, 2, 1.0, 1.0, 0).is_err());
        assert!(make_synthetic(3, 10, 0, 1.0, 1.0, 0).is_err());
        assert!(make_synthetic(3, 10, 11, 1.0, 1.0, 0).is_err());
        assert!(make_synthetic(3, 10, 2, 1.0, 0.0, 0).is_err());
    }

    #[test]
    fn kfold_stratifies_and_partitions() {
        let folds = stratified_kfold(&[0, 0, 1, 1], 2, 7).unwrap();
        for fold in &folds {
            assert_eq!(fold.len(), 2);
            let zeros = fold.iter().filter(|&&i| i < 2).count();
            assert_eq!(zeros, 1);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn kfold_is_deterministic_in_seed() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let a = stratified_kfold(&labels, 5, 9).unwrap();
        let b = stratified_kfold(&labels, 5, 9).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&labels, 5, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn kfold_rejects_small_classes() {
        let err = stratified_kfold(&[0, 0, 0, 1], 2, 0).unwrap_err();
        match err {
            EdmError::TooFewPerClass { class, count, folds } => {
                assert_eq!((class, count, folds), (1, 1, 2));
            }
            other => panic!("unexpected: {other:?}"),
        }
        assert!(stratified_kfold(&[0, 1], 1, 0).is_err());
    }

    #[test]
    fn default_timestamps_formula() {
        assert_eq!(default_timestamps(10, 5), vec![2, 4, 6, 8, 10]);
        let ts = default_timestamps(150, 20);
        assert_eq!(ts.len(), 20);
        assert_eq!(*ts.last().unwrap(), 150);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_timestamps(4, 99), vec![1, 2, 3, 4]);
    }

    #[test]
    fn tsv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.tsv");
        let ds = make_synthetic(4, 9, 3, 1.25, 0.7, 5).unwrap();
        save_ucr_tsv(&ds, &path).unwrap();
        let back = load_ucr_tsv(&path).unwrap();
        assert_eq!(ds.values, back.values);
        assert_eq!(ds.labels, back.labels);
        // And the written bytes are stable.
        let bytes = std::fs::read(&path).unwrap();
        save_ucr_tsv(&back, &path).unwrap();
        assert_eq!(bytes, std::fs::read(&path).unwrap());
    }
}

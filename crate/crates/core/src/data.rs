//! Sparse text input and the transforms that define the training space.
//!
//! Input lines follow the common `label index:value ...` layout with 1-based,
//! strictly ascending feature indices. Every example is mapped to a pattern
//!
//! ```text
//! y_k = l_k * [x_k, rho, delta * e_k]
//! ```
//!
//! i.e. augmented with a constant bias coordinate, optionally extended with
//! one private coordinate per example, and reflected by its label. Internally
//! coordinates are 0-based: features occupy `0..d`, the bias sits at `d` and
//! the extension coordinate of example `k` at `d + 1 + k`.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};

/// One labelled example as read from the input. Feature indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct RawExample {
    pub label: i8,
    pub features: Vec<(usize, f64)>,
}

impl RawExample {
    pub fn new(label: i8, features: Vec<(usize, f64)>) -> Self {
        RawExample { label, features }
    }

    /// Largest feature index, 0 for an all-zero instance.
    pub fn max_index(&self) -> usize {
        self.features.last().map_or(0, |&(i, _)| i)
    }
}

/// Augmented, reflected (and possibly extended) training vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    indices: Vec<usize>,
    values: Vec<f64>,
    sq_norm: f64,
    source_row: usize,
}

impl Pattern {
    /// Builds a pattern from 0-based `(index, value)` pairs in ascending order.
    pub fn from_pairs(pairs: &[(usize, f64)], source_row: usize) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        let indices = pairs.iter().map(|&(i, _)| i).collect();
        let values: Vec<f64> = pairs.iter().map(|&(_, v)| v).collect();
        let sq_norm = values.iter().map(|v| v * v).sum();
        Pattern {
            indices,
            values,
            sq_norm,
            source_row,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sq_norm(&self) -> f64 {
        self.sq_norm
    }

    pub fn norm(&self) -> f64 {
        self.sq_norm.sqrt()
    }

    pub fn source_row(&self) -> usize {
        self.source_row
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// `w . y` summed in pattern order. Panics if an index is outside `w`;
    /// use [`sparse_dot`] for a checked version.
    #[inline]
    pub fn dot(&self, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            acc += w[i] * v;
        }
        acc
    }

    /// `w += coef * y`.
    #[inline]
    pub fn add_to(&self, w: &mut [f64], coef: f64) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            w[i] += coef * v;
        }
    }

    /// Inner product of two sparse patterns.
    pub fn dot_pattern(&self, other: &Pattern) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Checked `w . y`: errors if the pattern reaches past the end of `w`.
pub fn sparse_dot(w: &[f64], p: &Pattern) -> Result<f64> {
    if let Some(&last) = p.indices.last() {
        if last >= w.len() {
            return Err(Error::IndexOutOfRange {
                index: last,
                len: w.len(),
            });
        }
    }
    Ok(p.dot(w))
}

/// The training set in augmented space. Immutable once built.
#[derive(Debug, Clone)]
pub struct Dataset {
    patterns: Vec<Pattern>,
    labels: Vec<i8>,
    features: usize,
    dim: usize,
    radius: f64,
    min_sq_norm: f64,
    rho: f64,
    delta: f64,
}

impl Dataset {
    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn pattern(&self, k: usize) -> &Pattern {
        &self.patterns[k]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// Number of patterns `m`.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Number of original feature coordinates `d`.
    pub fn features(&self) -> usize {
        self.features
    }

    /// Total dimensionality: `d + 1`, plus `m` when the extension is enabled.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R = max_k |y_k|`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn min_sq_norm(&self) -> f64 {
        self.min_sq_norm
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bias_index(&self) -> usize {
        self.features
    }

    /// Index of the private extension coordinate of pattern `k`, if enabled.
    pub fn extension_index(&self, k: usize) -> Option<usize> {
        (self.delta > 0.0).then(|| self.features + 1 + k)
    }

    /// `key=value` summary lines.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m={}", self.len());
        let _ = writeln!(s, "d={}", self.features);
        let _ = writeln!(s, "dim={}", self.dim);
        let _ = writeln!(s, "R={}", self.radius);
        let _ = writeln!(s, "rho={}", self.rho);
        let _ = writeln!(s, "delta={}", self.delta);
        s
    }
}

/// Dataset made of already reflected patterns, used verbatim (no bias or
/// extension coordinates are added; labels are all `+1` and `rho` reads 0).
pub fn dataset_from_patterns(rows: &[Vec<f64>]) -> Result<Dataset> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut patterns = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("row {k} has a non-finite entry")));
        }
        let pairs: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
        let p = Pattern::from_pairs(&pairs, k);
        if p.sq_norm() == 0.0 {
            return Err(Error::InvalidParams(format!("row {k} is the zero vector")));
        }
        patterns.push(p);
    }
    let max_sq = patterns.iter().map(Pattern::sq_norm).fold(0.0, f64::max);
    let min_sq = patterns.iter().map(Pattern::sq_norm).fold(f64::INFINITY, f64::min);
    Ok(Dataset {
        labels: vec![1; patterns.len()],
        patterns,
        features: dim.saturating_sub(1),
        dim,
        radius: max_sq.sqrt(),
        min_sq_norm: min_sq,
        rho: 0.0,
        delta: 0.0,
    })
}

/// Builds the training space from raw examples; `d` is the largest feature
/// index present.
pub fn build_dataset(examples: &[RawExample], rho: f64, delta: f64) -> Result<Dataset> {
    let features = examples.iter().map(RawExample::max_index).max().unwrap_or(0);
    build_dataset_with_features(examples, rho, delta, features)
}

/// Like [`build_dataset`] with an explicit feature count, so data evaluated
/// against a stored model lands in the same coordinates.
pub fn build_dataset_with_features(
    examples: &[RawExample],
    rho: f64,
    delta: f64,
    features: usize,
) -> Result<Dataset> {
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParams(format!("rho must be > 0, got {rho}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "delta must be >= 0, got {delta}"
        )));
    }
    let m = examples.len();
    let extended = delta > 0.0;
    let dim = features + 1 + if extended { m } else { 0 };

    let mut patterns = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    let mut pairs = Vec::new();
    for (k, ex) in examples.iter().enumerate() {
        if ex.max_index() > features {
            return Err(Error::DimensionMismatch {
                model: features,
                data: ex.max_index(),
            });
        }
        let l = f64::from(ex.label);
        pairs.clear();
        pairs.extend(ex.features.iter().map(|&(i, v)| (i - 1, l * v)));
        pairs.push((features, l * rho));
        if extended {
            pairs.push((features + 1 + k, l * delta));
        }
        patterns.push(Pattern::from_pairs(&pairs, k));
        labels.push(ex.label);
    }
    let max_sq = patterns.iter().map(Pattern::sq_norm).fold(0.0, f64::max);
    let min_sq = patterns
        .iter()
        .map(Pattern::sq_norm)
        .fold(f64::INFINITY, f64::min);
    Ok(Dataset {
        patterns,
        labels,
        features,
        dim,
        radius: max_sq.sqrt(),
        min_sq_norm: min_sq,
        rho,
        delta,
    })
}

/// Parses the whole stream. Blank lines and `#` comments are skipped; a `#`
/// after the features starts a trailing comment.
pub fn parse_dataset<R: BufRead>(reader: R) -> Result<Vec<RawExample>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(ex) = parse_line(&line, n + 1)? {
            out.push(ex);
        }
    }
    Ok(out)
}

pub fn parse_str(text: &str) -> Result<Vec<RawExample>> {
    parse_dataset(text.as_bytes())
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<RawExample>> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let body = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = body.split_ascii_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let label = match label_tok.parse::<f64>() {
        Ok(1.0) => 1,
        Ok(-1.0) => -1,
        _ => return Err(err(format!("label must be +1 or -1, got `{label_tok}`"))),
    };
    let mut features: Vec<(usize, f64)> = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected index:value, got `{tok}`")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| err(format!("bad index `{idx}`")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based".into()));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("bad value `{val}`")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite value `{val}`")));
        }
        if let Some(&(prev, _)) = features.last() {
            if idx <= prev {
                return Err(err(format!(
                    "indices must be strictly ascending ({idx} after {prev})"
                )));
            }
        }
        features.push((idx, val));
    }
    Ok(Some(RawExample { label, features }))
}

/// Writes an example back in the input grammar. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn format_example(ex: &RawExample) -> String {
    let mut s = if ex.label > 0 { "+1".to_string() } else { "-1".to_string() };
    for &(i, v) in &ex.features {
        let _ = write!(s, " {i}:{v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<RawExample> {
        vec![
            RawExample::new(1, vec![(1, 1.0)]),
            RawExample::new(-1, vec![(1, -1.0)]),
        ]
    }

    #[test]
    fn parses_documented_grammar() {
        let ex = parse_str("+1 1:0.5 3:-2\n").unwrap();
        assert_eq!(ex, vec![RawExample::new(1, vec![(1, 0.5), (3, -2.0)])]);
    }

    #[test]
    fn empty_feature_list_is_legal() {
        let ex = parse_str("-1").unwrap();
        assert_eq!(ex, vec![RawExample::new(-1, vec![])]);
    }

    #[test]
    fn bad_value_reports_line() {
        match parse_str("1 2:abc") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("bad value"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_labels_and_order() {
        assert!(matches!(parse_str("2 1:1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_str("0"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_str("# c\n\n+1 3:1 2:1"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_str("+1 2:1 2:1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_str("+1 0:1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_str("+1 1:inf"), Err(Error::Parse { .. })));
    }

    #[test]
    fn skips_comments_and_crlf() {
        let ex = parse_str("# header\r\n+1 1:2 # trailing\r\n\r\n-1 2:1\r\n").unwrap();
        assert_eq!(ex.len(), 2);
        assert_eq!(ex[0].features, vec![(1, 2.0)]);
    }

    #[test]
    fn toy_dataset_without_extension() {
        let ds = build_dataset(&toy(), 1.0, 0.0).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.pattern(0).to_dense(2), vec![1.0, 1.0]);
        assert_eq!(ds.pattern(1).to_dense(2), vec![1.0, -1.0]);
        assert!((ds.radius() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn toy_dataset_with_extension() {
        let ds = build_dataset(&toy(), 1.0, 2.0).unwrap();
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.pattern(0).to_dense(4), vec![1.0, 1.0, 2.0, 0.0]);
        assert_eq!(ds.pattern(1).to_dense(4), vec![1.0, -1.0, 0.0, -2.0]);
        assert!((ds.radius() - 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(ds.extension_index(1), Some(3));
    }

    #[test]
    fn zero_instance_keeps_only_bias() {
        let ds = build_dataset(&[RawExample::new(1, vec![])], 1.0, 0.0).unwrap();
        assert_eq!(ds.dim(), 1);
        assert_eq!(ds.pattern(0).to_dense(1), vec![1.0]);
        assert_eq!(ds.radius(), 1.0);

        let ds = build_dataset_with_features(&[RawExample::new(1, vec![])], 1.0, 0.0, 3).unwrap();
        assert_eq!(ds.pattern(0).to_dense(4), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_dataset(&[], 1.0, 0.0), Err(Error::EmptyDataset)));
        assert!(build_dataset(&toy(), 0.0, 0.0).is_err());
        assert!(build_dataset(&toy(), 1.0, -1.0).is_err());
    }

    #[test]
    fn sparse_dot_cases() {
        let p = Pattern::from_pairs(&[(0, 1.0), (1, -1.0)], 0);
        assert_eq!(sparse_dot(&[2.0, 0.0], &p).unwrap(), 2.0);
        assert_eq!(sparse_dot(&[0.0, 0.0], &p).unwrap(), 0.0);
        let q = Pattern::from_pairs(&[(0, 1.0), (1, 1.0)], 0);
        assert!((sparse_dot(&[0.195, -0.005], &q).unwrap() - 0.19).abs() < 1e-15);
        assert!(matches!(
            sparse_dot(&[1.0], &p),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    #[test]
    fn summary_lines() {
        let ds = build_dataset(&toy(), 1.0, 0.0).unwrap();
        let s = ds.summary();
        assert!(s.contains("m=2\n"));
        assert!(s.contains("d=1\n"));
        assert!(s.contains("delta=0\n"));
    }
}

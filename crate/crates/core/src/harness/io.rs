//! Plain-text joint distribution and contour files.
//!
//! Joint files carry a small header followed by the matrix, row-major, one
//! row per line:
//!
//! ```text
//! # fanosteer joint distribution
//! shape 2 2
//! kind counts
//! bin_width_a 0.25
//! bin_width_b 0.25
//! total_counts 1000
//! axis_a x_A
//! axis_b x_B
//! seed 7
//! data
//! 400 100
//! 100 400
//! ```
//!
//! `kind` is `counts` (nonnegative integers, normalized on load) or
//! `probabilities`. `total_counts` and `seed` are optional (`none`). Floats
//! are written in Rust's shortest round-trip form, so save then load is
//! lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::entropy::JointDistribution;
use crate::error::{Error, Result};
use crate::spdc_sim::CountMatrix;
use crate::stats::ContourGrid;

const JOINT_MAGIC: &str = "# fanosteer joint distribution";
const CONTOUR_COLUMNS: &str = "eta_x\teta_k\tviolation\tsigma";

/// A joint distribution with the metadata stored alongside it.
#[derive(Clone, Debug, PartialEq)]
pub struct JointFile {
    pub joint: JointDistribution,
    /// Raw counts, when the file stores counts.
    pub counts: Option<Vec<u64>>,
    pub axis_a: String,
    pub axis_b: String,
    pub seed: Option<u64>,
}

impl JointFile {
    pub fn from_probabilities(joint: JointDistribution, axis_a: &str, axis_b: &str) -> Self {
        Self {
            joint,
            counts: None,
            axis_a: axis_a.into(),
            axis_b: axis_b.into(),
            seed: None,
        }
    }

    /// Wraps sampled counts; bin widths come from `widths`.
    pub fn from_counts(
        counts: &CountMatrix,
        widths: (f64, f64),
        axis_a: &str,
        axis_b: &str,
    ) -> Result<Self> {
        let joint = counts.to_joint()?.with_bin_widths(widths.0, widths.1)?;
        Ok(Self {
            joint,
            counts: Some(counts.counts.clone()),
            axis_a: axis_a.into(),
            axis_b: axis_b.into(),
            seed: Some(counts.seed),
        })
    }

    pub fn to_text(&self) -> String {
        let j = &self.joint;
        let mut out = String::new();
        let opt = |v: Option<u64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        let _ = writeln!(out, "{JOINT_MAGIC}");
        let _ = writeln!(out, "shape {} {}", j.rows(), j.cols());
        let kind = if self.counts.is_some() {
            "counts"
        } else {
            "probabilities"
        };
        let _ = writeln!(out, "kind {kind}");
        let _ = writeln!(out, "bin_width_a {}", j.bin_width_a());
        let _ = writeln!(out, "bin_width_b {}", j.bin_width_b());
        let _ = writeln!(out, "total_counts {}", opt(j.total_counts()));
        let _ = writeln!(out, "axis_a {}", self.axis_a);
        let _ = writeln!(out, "axis_b {}", self.axis_b);
        let _ = writeln!(out, "seed {}", opt(self.seed));
        let _ = writeln!(out, "data");
        for i in 0..j.rows() {
            let row: Vec<String> = match &self.counts {
                Some(c) => c[i * j.cols()..(i + 1) * j.cols()]
                    .iter()
                    .map(u64::to_string)
                    .collect(),
                None => j.row(i).iter().map(f64::to_string).collect(),
            };
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        JointParser::new(path).parse(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }
}

/// Loads a joint distribution, normalizing count files.
pub fn load_joint(path: impl AsRef<Path>) -> Result<JointDistribution> {
    Ok(JointFile::load(path)?.joint)
}

pub fn save_joint(joint: &JointDistribution, path: impl AsRef<Path>) -> Result<()> {
    JointFile::from_probabilities(joint.clone(), "A", "B").save(path)
}

struct JointParser {
    path: PathBuf,
}

#[derive(Default)]
struct Header {
    shape: Option<(usize, usize)>,
    counts: Option<bool>,
    bin_width_a: Option<f64>,
    bin_width_b: Option<f64>,
    total_counts: Option<u64>,
    axis_a: Option<String>,
    axis_b: Option<String>,
    seed: Option<u64>,
}

impl JointParser {
    fn new(path: &Path) -> Self {
        Self {
            path: path.to_path_buf(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn number<T: std::str::FromStr>(&self, line: usize, key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| self.err(line, format!("{key}: cannot parse {value:?}")))
    }

    fn optional<T: std::str::FromStr>(
        &self,
        line: usize,
        key: &str,
        value: &str,
    ) -> Result<Option<T>> {
        if value == "none" {
            Ok(None)
        } else {
            self.number(line, key, value).map(Some)
        }
    }

    fn parse(&self, text: &str) -> Result<JointFile> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut h = Header::default();
        let mut data_line = None;
        for (n, line) in lines.by_ref() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "data" {
                data_line = Some(n);
                break;
            }
            let (key, value) = line
                .split_once(char::is_whitespace)
                .map(|(k, v)| (k, v.trim()))
                .ok_or_else(|| self.err(n, format!("expected `key value`, got {line:?}")))?;
            match key {
                "shape" => {
                    let dims: Vec<&str> = value.split_whitespace().collect();
                    let [r, c] = dims[..] else {
                        return Err(self.err(n, "shape needs two integers"));
                    };
                    h.shape = Some((self.number(n, key, r)?, self.number(n, key, c)?));
                }
                "kind" => {
                    h.counts = Some(match value {
                        "counts" => true,
                        "probabilities" => false,
                        other => return Err(self.err(n, format!("unknown kind {other:?}"))),
                    })
                }
                "bin_width_a" => h.bin_width_a = Some(self.number(n, key, value)?),
                "bin_width_b" => h.bin_width_b = Some(self.number(n, key, value)?),
                "total_counts" => h.total_counts = self.optional(n, key, value)?,
                "axis_a" => h.axis_a = Some(value.to_string()),
                "axis_b" => h.axis_b = Some(value.to_string()),
                "seed" => h.seed = self.optional(n, key, value)?,
                other => return Err(self.err(n, format!("unknown header key {other:?}"))),
            }
        }
        let data_line = data_line.ok_or_else(|| self.err(0, "missing `data` section"))?;
        let (rows, cols) = h
            .shape
            .ok_or_else(|| self.err(data_line, "missing shape"))?;
        let is_counts = h.counts.unwrap_or(false);

        let mut values = Vec::with_capacity(rows * cols);
        let mut counts = Vec::new();
        let mut row = 0;
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if row == rows {
                return Err(self.err(n, format!("more than the {rows} rows declared in shape")));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != cols {
                return Err(self.err(
                    n,
                    format!(
                        "row {row} has {} entries, shape declares {cols}",
                        fields.len()
                    ),
                ));
            }
            for (col, field) in fields.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    self.err(
                        n,
                        format!("row {row}, column {col}: cannot parse {field:?}"),
                    )
                })?;
                if v < 0.0 || !v.is_finite() {
                    return Err(
                        self.err(n, format!("negative entry {v} at row {row}, column {col}"))
                    );
                }
                if is_counts {
                    let c: u64 = field.parse().map_err(|_| {
                        self.err(
                            n,
                            format!("row {row}, column {col}: count {field:?} is not an integer"),
                        )
                    })?;
                    counts.push(c);
                }
                values.push(v);
            }
            row += 1;
        }
        if row != rows {
            return Err(self.err(
                data_line,
                format!("shape declares {rows} rows, found {row}"),
            ));
        }

        let mut joint = if is_counts {
            let total: u64 = counts.iter().sum();
            if let Some(declared) = h.total_counts {
                if declared != total {
                    return Err(self.err(
                        data_line,
                        format!("total_counts {declared} does not match the data sum {total}"),
                    ));
                }
            }
            JointDistribution::from_counts(rows, cols, &counts)
        } else {
            JointDistribution::new(rows, cols, values).map(|j| j.with_total_counts(h.total_counts))
        }
        .map_err(|e| self.err(data_line, e.to_string()))?;
        joint = joint
            .with_bin_widths(h.bin_width_a.unwrap_or(1.0), h.bin_width_b.unwrap_or(1.0))
            .map_err(|e| self.err(0, e.to_string()))?;

        Ok(JointFile {
            joint,
            counts: is_counts.then_some(counts),
            axis_a: h.axis_a.unwrap_or_else(|| "A".into()),
            axis_b: h.axis_b.unwrap_or_else(|| "B".into()),
            seed: h.seed,
        })
    }
}

/// Writes one tab-separated record per grid cell, `eta_x` outermost.
/// `sigma` is `NaN` when the grid carries no error bars.
pub fn save_contour(grid: &ContourGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# fanosteer contour mu_x={} mu_k={} rhs={}",
        grid.mu_x, grid.mu_k, grid.rhs
    );
    let _ = writeln!(out, "{CONTOUR_COLUMNS}");
    for (i, ex) in grid.eta_x_values.iter().enumerate() {
        for (j, ek) in grid.eta_k_values.iter().enumerate() {
            let sigma = grid.sigma.as_ref().map_or(f64::NAN, |s| s[i][j]);
            let _ = writeln!(out, "{ex}\t{ek}\t{}\t{sigma}", grid.violation[i][j]);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a file written by [`save_contour`] back into a grid.
pub fn load_contour(path: impl AsRef<Path>) -> Result<ContourGrid> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut meta = (1.0, 1.0, f64::NAN);
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if let Some(rest) = line.strip_prefix("# fanosteer contour") {
            for kv in rest.split_whitespace() {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err(n, format!("bad metadata {kv:?}")))?;
                let v: f64 = v.parse().map_err(|_| err(n, format!("bad number {v:?}")))?;
                match k {
                    "mu_x" => meta.0 = v,
                    "mu_k" => meta.1 = v,
                    "rhs" => meta.2 = v,
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() || line.starts_with('#') || line == CONTOUR_COLUMNS {
            continue;
        }
        let fields: Vec<f64> = line
            .split('\t')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(n, format!("cannot parse record {line:?}")))?;
        let [ex, ek, v, s] = fields[..] else {
            return Err(err(n, "expected 4 columns".into()));
        };
        records.push((ex, ek, v, s));
    }
    let mut eta_x_values: Vec<f64> = Vec::new();
    let mut eta_k_values: Vec<f64> = Vec::new();
    for &(ex, ek, _, _) in &records {
        if eta_x_values.last() != Some(&ex) {
            eta_x_values.push(ex);
        }
        if eta_x_values.len() == 1 {
            eta_k_values.push(ek);
        }
    }
    let (nx, nk) = (eta_x_values.len(), eta_k_values.len());
    if nx * nk != records.len() || nx < 2 || nk < 2 {
        return Err(err(
            0,
            format!("{} records do not form a grid", records.len()),
        ));
    }
    let violation = records
        .chunks(nk)
        .map(|r| r.iter().map(|c| c.2).collect())
        .collect();
    let has_sigma = records.iter().any(|c| !c.3.is_nan());
    let sigma = has_sigma.then(|| {
        records
            .chunks(nk)
            .map(|r| r.iter().map(|c| c.3).collect())
            .collect()
    });
    Ok(ContourGrid {
        eta_x_values,
        eta_k_values,
        violation,
        sigma,
        mu_x: meta.0,
        mu_k: meta.1,
        rhs: meta.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<JointFile> {
        JointFile::parse(text, Path::new("mem.joint"))
    }

    #[test]
    fn well_formed_file() {
        let f = parse(
            "# fanosteer joint distribution\nshape 2 2\nkind probabilities\nbin_width_a 0.5\nbin_width_b 0.25\ndata\n0.4 0.1\n0.1 0.4\n",
        )
        .unwrap();
        assert_eq!(f.joint.data(), &[0.4, 0.1, 0.1, 0.4]);
        assert_eq!(f.joint.bin_width_b(), 0.25);
        assert!(f.counts.is_none());
    }

    #[test]
    fn counts_are_normalized_with_total_kept() {
        let f = parse("shape 1 3\nkind counts\ntotal_counts 10\ndata\n2 3 5\n").unwrap();
        assert_eq!(f.joint.data(), &[0.2, 0.3, 0.5]);
        assert_eq!(f.joint.total_counts(), Some(10));
        assert_eq!(f.counts.as_deref(), Some(&[2, 3, 5][..]));
    }

    #[test]
    fn negative_entry_names_its_cell() {
        let e = parse("shape 2 2\ndata\n0.5 0.5\n-0.1 0.1\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("row 1, column 0"), "{msg}");
        assert!(matches!(e, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn shape_mismatches() {
        assert!(parse("shape 2 2\ndata\n0.5 0.5\n").is_err());
        assert!(parse("shape 1 2\ndata\n0.5 0.25 0.25\n").is_err());
        assert!(parse("shape 1 2\ndata\n0.5 0.5\n0.0 0.0\n").is_err());
        assert!(parse("shape 1 2\nkind counts\ntotal_counts 9\ndata\n2 3\n").is_err());
        assert!(parse("shape 1 2\nkind counts\ndata\n2.5 3\n").is_err());
        assert!(parse("shape 1 2\n0.5 0.5\n").is_err());
        assert!(parse("shape 1 2\ncolour blue\ndata\n0.5 0.5\n").is_err());
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.joint");
        let data = vec![
            0.1 / 3.0,
            2.0 / 7.0,
            1e-17,
            1.0 - 0.1 / 3.0 - 2.0 / 7.0 - 1e-17,
        ];
        let j = JointDistribution::new(2, 2, data)
            .unwrap()
            .with_bin_widths(0.1, std::f64::consts::PI)
            .unwrap();
        save_joint(&j, &path).unwrap();
        assert_eq!(load_joint(&path).unwrap(), j);
    }
}

//! Plain-text model files.
//!
//! ```text
//! algo=mpvs
//! eta=1e-1
//! b=2e0
//! n=3
//! t=57
//! rho=1e0
//! delta=0e0
//! dim=3
//! features=2
//! w 1 3.1000000000000001e0
//! w 3 -2.0000000000000000e-1
//! ```
//!
//! Header lines are `key=value`; `lambda=` is written for constant
//! shrinking and `n=` for variable shrinking. Any further `key=value` lines
//! (certificates, `powersum=`) are kept verbatim. Weight lines use 1-based
//! coordinates and list nonzero entries only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Algorithm;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub algo: Algorithm,
    pub eta: f64,
    pub b: f64,
    pub lambda: f64,
    pub n: u32,
    pub t: u64,
    pub rho: f64,
    pub delta: f64,
    pub features: usize,
    pub weights: Vec<f64>,
    /// Additional `key=value` lines in file order.
    pub extras: Vec<(String, String)>,
}

impl ModelFile {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn extra(&self, key: &str) -> Option<&str> {
        self.extras
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "algo={}", self.algo);
        let _ = writeln!(s, "eta={:.16e}", self.eta);
        let _ = writeln!(s, "b={:.16e}", self.b);
        match self.algo {
            Algorithm::Mpvs => {
                let _ = writeln!(s, "n={}", self.n);
            }
            _ => {
                let _ = writeln!(s, "lambda={:.16e}", self.lambda);
            }
        }
        let _ = writeln!(s, "t={}", self.t);
        let _ = writeln!(s, "rho={:.16e}", self.rho);
        let _ = writeln!(s, "delta={:.16e}", self.delta);
        let _ = writeln!(s, "dim={}", self.dim());
        let _ = writeln!(s, "features={}", self.features);
        for (k, v) in &self.extras {
            let _ = writeln!(s, "{k}={v}");
        }
        for (i, w) in self.weights.iter().enumerate() {
            if *w != 0.0 {
                let _ = writeln!(s, "w {} {w:.16e}", i + 1);
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<ModelFile> {
        let bad = |line: usize, msg: String| Error::ModelFormat(format!("line {line}: {msg}"));
        let mut header: Vec<(String, String)> = Vec::new();
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let no = no + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("w ") {
                let mut it = rest.split_whitespace();
                let (Some(i), Some(v), None) = (it.next(), it.next(), it.next()) else {
                    return Err(bad(no, "expected `w <index> <value>`".into()));
                };
                let i: usize = i.parse().map_err(|_| bad(no, format!("bad index {i:?}")))?;
                let v: f64 = v.parse().map_err(|_| bad(no, format!("bad value {v:?}")))?;
                if i == 0 || !v.is_finite() {
                    return Err(bad(no, "index must be >= 1 and value finite".into()));
                }
                entries.push((i, v));
            } else if let Some((k, v)) = line.split_once('=') {
                header.push((k.trim().to_string(), v.trim().to_string()));
            } else {
                return Err(bad(no, format!("unrecognized line {line:?}")));
            }
        }

        let take = |key: &str, header: &mut Vec<(String, String)>| -> Option<String> {
            let pos = header.iter().position(|(k, _)| k == key)?;
            Some(header.remove(pos).1)
        };
        let required = |key: &str, header: &mut Vec<(String, String)>| -> Result<String> {
            take(key, header).ok_or_else(|| Error::ModelFormat(format!("missing `{key}=`")))
        };
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::ModelFormat(format!("bad value for `{key}`: {v:?}")))
        }

        let algo: Algorithm = required("algo", &mut header)?
            .parse()
            .map_err(|e: Error| Error::ModelFormat(e.to_string()))?;
        let eta = num("eta", &required("eta", &mut header)?)?;
        let b = num("b", &required("b", &mut header)?)?;
        let (lambda, n) = match algo {
            Algorithm::Mpvs => (0.0, num("n", &required("n", &mut header)?)?),
            _ => (num("lambda", &required("lambda", &mut header)?)?, 0),
        };
        let t = num("t", &required("t", &mut header)?)?;
        let rho = num("rho", &required("rho", &mut header)?)?;
        let delta = num("delta", &required("delta", &mut header)?)?;
        let dim: usize = num("dim", &required("dim", &mut header)?)?;
        let features = match take("features", &mut header) {
            Some(v) => num("features", &v)?,
            None => dim.saturating_sub(1),
        };
        let mut weights = vec![0.0; dim];
        for (i, v) in entries {
            if i > dim {
                return Err(Error::ModelFormat(format!(
                    "weight index {i} exceeds dim {dim}"
                )));
            }
            weights[i - 1] = v;
        }
        Ok(ModelFile {
            algo,
            eta,
            b,
            lambda,
            n,
            t,
            rho,
            delta,
            features,
            weights,
            extras: header,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        ModelFile::parse(&fs::read_to_string(path)?)
    }
}

//! Plain-text interchange formats for the intermediate pipeline stages.
//!
//! Every format starts with a `# fhcorr <kind> v1` magic line, may carry a
//! `# manifest <digest>` line, and writes floating-point values with 17
//! significant digits so a write/read cycle is bit-exact.
//!
//! Series file:
//! ```text
//! # fhcorr series v1
//! t_span <seconds>
//! axis seconds|circle
//! session <start> <end>        (zero or more)
//! asset,t,log_price
//! <asset>,<t>,<p>
//! ```
//!
//! Matrix file:
//! ```text
//! # fhcorr matrix v1
//! kind covariance|correlation
//! n <n>
//! tau <seconds>
//! t_span <seconds>
//! harmonics <K>
//! assets <id_1> ... <id_n>
//! <re_11> <im_11> <re_12> <im_12> ...   (n rows, row-major)
//! ```
//!
//! Coefficient dump (one file per asset):
//! ```text
//! # fhcorr coefficients v1
//! # asset <id>
//! # t_span <seconds>
//! # drift <value>
//! k,a_k,b_k
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimator::{ComplexCorrelationMatrix, CovarianceMatrix, FourierCoefficients};
use crate::ingest::{Session, TickSeries, TimeAxis};
use crate::matrix::ComplexMatrix;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(kind: &str, manifest: Option<&str>) -> String {
    let mut s = format!("# fhcorr {kind} v1\n");
    if let Some(d) = manifest {
        let _ = writeln!(s, "# manifest {d}");
    }
    s
}

fn bad(what: &str, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{what} line {line}: {msg}"))
}

fn parse_num<T: std::str::FromStr>(what: &str, line: usize, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(what, line, format!("unparsable number {s:?}")))
}

/// Digest recorded in a `# manifest` line, if any.
pub fn manifest_ref(text: &str) -> Option<&str> {
    text.lines().take(4).find_map(|l| l.strip_prefix("# manifest ")).map(str::trim)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == ',') {
        return Err(Error::Format(format!("asset id {id:?} must be non-empty without whitespace or commas")));
    }
    Ok(())
}

// ---------------------------------------------------------------- series

pub fn series_to_string(series: &[TickSeries], manifest: Option<&str>) -> Result<String> {
    let mut out = header("series", manifest);
    let first = series.first().ok_or_else(|| Error::Config("no series to write".into()))?;
    let axis = match first.axis() {
        TimeAxis::Seconds => "seconds",
        TimeAxis::Circle => "circle",
    };
    let _ = writeln!(out, "t_span {}", fmt_f64(first.t_span()));
    let _ = writeln!(out, "axis {axis}");
    for s in first.sessions() {
        let _ = writeln!(out, "session {} {}", fmt_f64(s.start), fmt_f64(s.end));
    }
    out.push_str("asset,t,log_price\n");
    for s in series {
        check_id(s.asset_id())?;
        if s.t_span() != first.t_span() || s.axis() != first.axis() || s.sessions() != first.sessions() {
            return Err(Error::Config(format!("{}: series do not share one time axis", s.asset_id())));
        }
        for (t, p) in s.times().iter().zip(s.log_prices()) {
            let _ = writeln!(out, "{},{},{}", s.asset_id(), fmt_f64(*t), fmt_f64(*p));
        }
    }
    Ok(out)
}

pub fn parse_series(text: &str) -> Result<Vec<TickSeries>> {
    const WHAT: &str = "series file";
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "# fhcorr series v1")) => {}
        _ => return Err(Error::Format("not an fhcorr series file".into())),
    }
    let mut t_span = None;
    let mut axis = None;
    let mut sessions = Vec::new();
    let mut data: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut order = Vec::new();
    let mut in_body = false;
    for (no, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_body {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "t_span" => t_span = Some(parse_num::<f64>(WHAT, no, rest)?),
                "axis" => {
                    axis = Some(match rest.trim() {
                        "seconds" => TimeAxis::Seconds,
                        "circle" => TimeAxis::Circle,
                        other => return Err(bad(WHAT, no, format!("unknown axis {other}"))),
                    })
                }
                "session" => {
                    let (a, b) =
                        rest.trim().split_once(' ').ok_or_else(|| bad(WHAT, no, "session needs start and end"))?;
                    sessions.push(Session::new(parse_num(WHAT, no, a)?, parse_num(WHAT, no, b)?));
                }
                "asset,t,log_price" => in_body = true,
                _ => return Err(bad(WHAT, no, format!("unexpected {line:?}"))),
            }
            continue;
        }
        let mut f = line.split(',');
        let (Some(id), Some(t), Some(p), None) = (f.next(), f.next(), f.next(), f.next()) else {
            return Err(bad(WHAT, no, "expected asset,t,log_price"));
        };
        let entry = data.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Default::default()
        });
        entry.0.push(parse_num(WHAT, no, t)?);
        entry.1.push(parse_num(WHAT, no, p)?);
    }
    let t_span = t_span.ok_or_else(|| Error::Format("series file: missing t_span".into()))?;
    let axis = axis.ok_or_else(|| Error::Format("series file: missing axis".into()))?;
    order
        .into_iter()
        .map(|id| {
            let (t, p) = data.remove(&id).unwrap();
            TickSeries::from_parts(id, t, p, t_span, sessions.clone(), axis)
        })
        .collect()
}

// ---------------------------------------------------------------- matrix

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Covariance,
    Correlation,
}

/// Parsed contents of a matrix file.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub kind: MatrixKind,
    pub assets: Vec<String>,
    pub matrix: ComplexMatrix,
    pub tau: f64,
    pub t_span: f64,
    pub harmonics: usize,
}

impl MatrixFile {
    pub fn from_covariance(c: &CovarianceMatrix) -> Self {
        Self {
            kind: MatrixKind::Covariance,
            assets: c.assets.clone(),
            matrix: c.matrix.clone(),
            tau: c.tau,
            t_span: c.t_span,
            harmonics: c.harmonics,
        }
    }

    pub fn from_correlation(rho: &ComplexCorrelationMatrix, tau: f64, t_span: f64, harmonics: usize) -> Self {
        Self {
            kind: MatrixKind::Correlation,
            assets: rho.assets().to_vec(),
            matrix: rho.matrix().clone(),
            tau,
            t_span,
            harmonics,
        }
    }

    pub fn to_string(&self, manifest: Option<&str>) -> Result<String> {
        let n = self.matrix.n();
        let mut out = header("matrix", manifest);
        let kind = match self.kind {
            MatrixKind::Covariance => "covariance",
            MatrixKind::Correlation => "correlation",
        };
        let _ = writeln!(
            out,
            "kind {kind}\nn {n}\ntau {}\nt_span {}\nharmonics {}",
            fmt_f64(self.tau),
            fmt_f64(self.t_span),
            self.harmonics
        );
        for a in &self.assets {
            check_id(a)?;
        }
        let _ = writeln!(out, "assets {}", self.assets.join(" "));
        for i in 0..n {
            let row: Vec<String> =
                self.matrix.row(i).iter().map(|z| format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        const WHAT: &str = "matrix file";
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "# fhcorr matrix v1")) => {}
            _ => return Err(Error::Format("not an fhcorr matrix file".into())),
        }
        let mut meta: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut rows = Vec::new();
        for (no, line) in lines {
            if line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            if ["kind", "n", "tau", "t_span", "harmonics", "assets"].contains(&key) {
                meta.insert(key, (no, rest.trim()));
            } else {
                rows.push((no, line));
            }
        }
        let get = |k: &str| meta.get(k).copied().ok_or_else(|| Error::Format(format!("matrix file: missing {k}")));
        let kind = match get("kind")?.1 {
            "covariance" => MatrixKind::Covariance,
            "correlation" => MatrixKind::Correlation,
            other => return Err(Error::Format(format!("matrix file: unknown kind {other}"))),
        };
        let (no, n_str) = get("n")?;
        let n: usize = parse_num(WHAT, no, n_str)?;
        let (no, tau) = get("tau")?;
        let tau = parse_num(WHAT, no, tau)?;
        let (no, t_span) = get("t_span")?;
        let t_span = parse_num(WHAT, no, t_span)?;
        let (no, harmonics) = get("harmonics")?;
        let harmonics = parse_num(WHAT, no, harmonics)?;
        let assets: Vec<String> = get("assets")?.1.split_whitespace().map(String::from).collect();
        if assets.len() != n || rows.len() != n {
            return Err(Error::Format(format!(
                "matrix file: n = {n} but {} assets and {} rows",
                assets.len(),
                rows.len()
            )));
        }
        let mut data = Vec::with_capacity(n * n);
        for (no, row) in rows {
            let vals: Vec<f64> = row.split_whitespace().map(|v| parse_num(WHAT, no, v)).collect::<Result<_>>()?;
            if vals.len() != 2 * n {
                return Err(bad(WHAT, no, format!("expected {} numbers, found {}", 2 * n, vals.len())));
            }
            data.extend(vals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])));
        }
        let matrix = ComplexMatrix::from_row_major(n, data).expect("row count checked");
        Ok(Self { kind, assets, matrix, tau, t_span, harmonics })
    }

    pub fn into_covariance(self) -> CovarianceMatrix {
        CovarianceMatrix {
            assets: self.assets,
            matrix: self.matrix,
            tau: self.tau,
            t_span: self.t_span,
            harmonics: self.harmonics,
        }
    }
}

// ---------------------------------------------------------- coefficients

pub fn coefficients_to_string(c: &FourierCoefficients, manifest: Option<&str>) -> String {
    let mut out = header("coefficients", manifest);
    let _ = writeln!(
        out,
        "# asset {}\n# t_span {}\n# drift {}\nk,a_k,b_k",
        c.asset_id,
        fmt_f64(c.t_span),
        fmt_f64(c.drift)
    );
    for (k, (a, b)) in c.a.iter().zip(&c.b).enumerate() {
        let _ = writeln!(out, "{},{},{}", k + 1, fmt_f64(*a), fmt_f64(*b));
    }
    out
}

pub fn parse_coefficients<R: BufRead>(reader: R) -> Result<FourierCoefficients> {
    const WHAT: &str = "coefficient file";
    let mut c = FourierCoefficients { asset_id: String::new(), t_span: 0.0, a: Vec::new(), b: Vec::new(), drift: 0.0 };
    for (i, line) in reader.lines().enumerate() {
        let no = i + 1;
        let line = line.map_err(|e| bad(WHAT, no, e))?;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# asset ") {
            c.asset_id = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("# t_span ") {
            c.t_span = parse_num(WHAT, no, rest)?;
        } else if let Some(rest) = line.strip_prefix("# drift ") {
            c.drift = parse_num(WHAT, no, rest)?;
        } else if line.is_empty() || line.starts_with('#') || line == "k,a_k,b_k" {
            continue;
        } else {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad(WHAT, no, "expected k,a_k,b_k"));
            }
            let k: usize = parse_num(WHAT, no, f[0])?;
            if k != c.a.len() + 1 {
                return Err(bad(WHAT, no, format!("harmonic {k} out of order")));
            }
            c.a.push(parse_num(WHAT, no, f[1])?);
            c.b.push(parse_num(WHAT, no, f[2])?);
        }
    }
    Ok(c)
}

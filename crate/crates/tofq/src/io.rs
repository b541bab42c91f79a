//! CSV formats and atomic file output.
//!
//! Every float is written as `{:.16e}`, which carries 17 significant digits
//! and therefore round-trips exactly.

use std::io::Write;
use std::path::Path;

use tofq_core::reconstruct::{CharFnSamples, Metrics, MomentumDistribution, SampleSource, StdErr};
use tofq_core::C64;

use crate::error::CliError;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// One row of `correlate` output.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub lambda: f64,
    pub t2: f64,
    pub xx: f64,
    pub yy: f64,
    pub engine: &'static str,
}

pub fn correlate_csv(rows: &[CorrelationRow]) -> Vec<u8> {
    csv_bytes(
        &["lambda", "t2", "corr_xx", "corr_yy", "engine"],
        rows.iter().map(|r| vec![fmt(r.lambda), fmt(r.t2), fmt(r.xx), fmt(r.yy), r.engine.to_string()]),
    )
}

/// Standard-error columns stay empty for exact sources.
pub fn char_fn_csv(samples: &CharFnSamples) -> Vec<u8> {
    let source = samples.source().as_str();
    csv_bytes(
        &["lambda", "re", "im", "stderr_re", "stderr_im", "source"],
        (0..samples.len()).map(|i| {
            let v = samples.values()[i];
            let (se_re, se_im) = match samples.stderr() {
                Some(s) => (fmt(s[i].re), fmt(s[i].im)),
                None => (String::new(), String::new()),
            };
            vec![fmt(samples.lambdas()[i]), fmt(v.re), fmt(v.im), se_re, se_im, source.to_string()]
        }),
    )
}

fn parse_source(s: &str) -> Result<SampleSource, CliError> {
    match s {
        "analytic" => Ok(SampleSource::Analytic),
        "oracle" => Ok(SampleSource::Oracle),
        "shots" => Ok(SampleSource::Shots),
        other => Err(CliError::Config(format!("unknown sample source {other:?}"))),
    }
}

/// Reads a file written by [`char_fn_csv`].
pub fn read_char_fn_csv(path: &Path) -> Result<CharFnSamples, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_char_fn_csv(&text)
}

pub fn parse_char_fn_csv(text: &str) -> Result<CharFnSamples, CliError> {
    let bad = |msg: String| CliError::Config(format!("samples csv: {msg}"));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["lambda", "re", "im", "stderr_re", "stderr_im", "source"] {
        return Err(bad(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let num = |field: &str, line: usize| field.trim().parse::<f64>().map_err(|e| bad(format!("line {line}: {e}")));
    let (mut lambdas, mut values, mut errors) = (Vec::new(), Vec::new(), Vec::new());
    let mut source = None;
    for (i, record) in reader.records().enumerate() {
        let r = record.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        lambdas.push(num(&r[0], line)?);
        values.push(C64::new(num(&r[1], line)?, num(&r[2], line)?));
        let s = parse_source(&r[5])?;
        if source.is_some_and(|prev| prev != s) {
            return Err(bad(format!("line {line}: mixed sources")));
        }
        source = Some(s);
        errors.push(match (r[3].trim(), r[4].trim()) {
            ("", "") => None,
            (a, b) => Some(StdErr { re: num(a, line)?, im: num(b, line)? }),
        });
    }
    let source = source.ok_or_else(|| bad("no rows".into()))?;
    let stderr = if errors.iter().all(Option::is_some) {
        Some(errors.into_iter().flatten().collect())
    } else if errors.iter().all(Option::is_none) {
        None
    } else {
        return Err(bad("standard errors present on some rows only".into()));
    };
    Ok(CharFnSamples::new(lambdas, values, stderr, source)?)
}

/// Density table followed by `# name,value` metric lines.
pub fn density_csv(estimate: &MomentumDistribution, reference: &MomentumDistribution, metrics: &Metrics) -> Vec<u8> {
    let mut out = csv_bytes(
        &["p", "density_est", "density_ref"],
        estimate
            .p_grid
            .points()
            .zip(estimate.density.iter().zip(&reference.density))
            .map(|(p, (e, r))| vec![fmt(p), fmt(*e), fmt(*r)]),
    );
    let offsets: Vec<String> = metrics.peak_offsets.iter().map(|v| fmt(*v)).collect();
    let footer = [
        ("l1", fmt(metrics.l1)),
        ("linf", fmt(metrics.linf)),
        ("total_variation", fmt(metrics.total_variation)),
        ("mass", fmt(estimate.mass())),
        ("min_density", fmt(estimate.min_density())),
        ("truncation_bound", fmt(estimate.truncation_bound)),
        ("peak_offsets", offsets.join(";")),
    ];
    for (name, value) in footer {
        out.extend_from_slice(format!("# {name},{value}\n").as_bytes());
    }
    out
}

/// One line of the `oracle-check` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckRow {
    /// Passes when `deviation <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_deviation: deviation, tolerance, passed: deviation <= tolerance }
    }

    /// Passes when `deviation < tolerance`.
    pub fn below(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_deviation: deviation, tolerance, passed: deviation < tolerance }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

pub fn check_csv(rows: &[CheckRow]) -> Vec<u8> {
    csv_bytes(
        &["name", "max_deviation", "tolerance", "status"],
        rows.iter().map(|r| vec![r.name.clone(), fmt(r.max_deviation), fmt(r.tolerance), r.status().to_string()]),
    )
}

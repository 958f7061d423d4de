//! CSV, bitstring and channel file formats.
//!
//! Every numeric CSV field is written as C `%.12e` (`-1.234567890123e+00`).

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{CorrelationSeries, DensityProfile, SpectrumResult, ThermalSeries};
use crate::fidelity::KrausChannel;
use crate::xeb::{format_bits, BitstringSample, SampleSource};

/// `x` in C `%.12e` notation.
pub fn fmt_e(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn to_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Header and rows of a CSV text, validating the header.
pub fn parse_csv(text: &str, expected_header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(expected_header.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            expected_header.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records().map(|rec| rec.map_err(csv_error)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {i}")))?;
    raw.trim().parse().map_err(|_| Error::Parse(format!("cannot parse {raw:?}")))
}

pub const SPECTRUM_HEADER: [&str; 2] = ["omega", "value"];
pub const THERMAL_HEADER: [&str; 5] = ["beta", "T", "observable", "value", "stderr"];
pub const CORRELATION_HEADER: [&str; 3] = ["t", "re", "im"];
pub const DENSITY_HEADER: [&str; 3] = ["t", "site", "p"];

pub fn spectrum_csv(s: &SpectrumResult) -> Result<String> {
    to_csv(&SPECTRUM_HEADER, s.omega.iter().zip(&s.values).map(|(w, v)| vec![fmt_e(*w), fmt_e(*v)]))
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    parse_csv(text, &SPECTRUM_HEADER)?.iter().map(|r| Ok((field(r, 0)?, field(r, 1)?))).collect()
}

/// One row of a thermal CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalRow {
    pub beta: f64,
    pub temperature: f64,
    pub observable: String,
    pub value: f64,
    pub stderr: f64,
}

/// Flattens a series into `beta,T,observable,value,stderr` rows.
pub fn thermal_rows(series: &ThermalSeries) -> Vec<ThermalRow> {
    let mut rows = Vec::new();
    for p in &series.points {
        let mut push = |name: &str, value: f64, stderr: f64| {
            rows.push(ThermalRow {
                beta: p.beta,
                temperature: p.temperature(),
                observable: name.to_string(),
                value,
                stderr,
            })
        };
        push("energy", p.energy, p.energy_stderr);
        push("energy_sq", p.energy_sq, p.energy_sq_stderr);
        push("specific_heat", p.specific_heat, p.specific_heat_stderr);
        push("partition_ratio", p.partition_ratio.raw, p.partition_ratio.stderr);
        push("free_energy", p.free_energy, f64::NAN);
        if let Some((v, e)) = p.observable {
            push("observable", v, e);
        }
    }
    rows
}

pub fn thermal_csv(series: &ThermalSeries) -> Result<String> {
    thermal_rows_csv(&thermal_rows(series))
}

pub fn thermal_rows_csv(rows: &[ThermalRow]) -> Result<String> {
    to_csv(
        &THERMAL_HEADER,
        rows.iter()
            .map(|r| vec![fmt_e(r.beta), fmt_e(r.temperature), r.observable.clone(), fmt_e(r.value), fmt_e(r.stderr)]),
    )
}

pub fn parse_thermal_csv(text: &str) -> Result<Vec<ThermalRow>> {
    parse_csv(text, &THERMAL_HEADER)?
        .iter()
        .map(|r| {
            Ok(ThermalRow {
                beta: field(r, 0)?,
                temperature: field(r, 1)?,
                observable: field(r, 2)?,
                value: field(r, 3)?,
                stderr: field(r, 4)?,
            })
        })
        .collect()
}

pub fn correlation_csv(c: &CorrelationSeries) -> Result<String> {
    to_csv(&CORRELATION_HEADER, c.t.iter().zip(&c.values).map(|(t, v)| vec![fmt_e(*t), fmt_e(v.re), fmt_e(v.im)]))
}

pub fn parse_correlation_csv(text: &str) -> Result<Vec<(f64, Complex64)>> {
    parse_csv(text, &CORRELATION_HEADER)?
        .iter()
        .map(|r| Ok((field(r, 0)?, Complex64::new(field(r, 1)?, field(r, 2)?))))
        .collect()
}

pub fn density_csv(p: &DensityProfile) -> Result<String> {
    let rows =
        p.t.iter()
            .zip(&p.p)
            .flat_map(|(t, row)| row.iter().enumerate().map(move |(l, v)| vec![fmt_e(*t), l.to_string(), fmt_e(*v)]));
    to_csv(&DENSITY_HEADER, rows)
}

pub fn parse_density_csv(text: &str) -> Result<Vec<(f64, usize, f64)>> {
    parse_csv(text, &DENSITY_HEADER)?.iter().map(|r| Ok((field(r, 0)?, field(r, 1)?, field(r, 2)?))).collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Header `L=<int> m=<int>`, then one `q_{L−1}⋯q_0` line per sample.
pub fn bitstrings_to_text(sample: &BitstringSample) -> String {
    let mut out = format!("L={} m={}\n", sample.qubits(), sample.len());
    for &s in sample.samples() {
        out.push_str(&format_bits(s, sample.qubits()));
        out.push('\n');
    }
    out
}

pub fn parse_bitstrings(text: &str) -> Result<BitstringSample> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty bitstring file".into()))?;
    let (mut l, mut m) = (None, None);
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("L", v)) => l = v.parse::<usize>().ok(),
            Some(("m", v)) => m = v.parse::<usize>().ok(),
            _ => return Err(Error::Parse(format!("unexpected header token {tok:?}"))),
        }
    }
    let (l, m) = match (l, m) {
        (Some(l), Some(m)) => (l, m),
        _ => return Err(Error::Parse(format!("header must be `L=<int> m=<int>`, got {header:?}"))),
    };
    let mut samples = Vec::with_capacity(m);
    for (i, line) in lines.enumerate() {
        if line.len() != l || !line.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("line {}: expected {l} binary digits, got {line:?}", i + 2)));
        }
        samples.push(u64::from_str_radix(line, 2).map_err(|e| Error::Parse(e.to_string()))?);
    }
    if samples.len() != m {
        return Err(Error::Parse(format!("header announces {m} samples, file has {}", samples.len())));
    }
    BitstringSample::new(l, samples, SampleSource::ExternalFile)
}

/// Channel file: a list of operators, each a row-major list of `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub operators: Vec<Vec<[f64; 2]>>,
}

pub fn channel_to_json(ch: &KrausChannel) -> Result<String> {
    let d = ch.dim();
    let operators = ch
        .operators()
        .iter()
        .map(|e| {
            (0..d * d)
                .map(|k| {
                    let z = e[(k / d, k % d)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    serde_json::to_string_pretty(&ChannelFile { dim: d, operators }).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_channel_json(text: &str) -> Result<KrausChannel> {
    let f: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let d = f.dim;
    let ops = f
        .operators
        .iter()
        .enumerate()
        .map(|(a, op)| {
            if op.len() != d * d {
                return Err(Error::Parse(format!("operator {a} has {} entries, expected {}", op.len(), d * d)));
            }
            Ok(DMatrix::from_row_iterator(d, d, op.iter().map(|&[re, im]| Complex64::new(re, im))))
        })
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::SpectrumMeta;

    #[test]
    fn c_style_exponents() {
        assert_eq!(fmt_e(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e(-0.00123), "-1.230000000000e-03");
        assert_eq!(fmt_e(6.02e123), "6.020000000000e+123");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
    }

    #[test]
    fn spectrum_round_trip() {
        let s = SpectrumResult {
            omega: vec![-0.5, 0.0, 0.25, 0.75],
            values: vec![0.1, 1.0 / 3.0, -2e-9, 7.0],
            stderr: None,
            meta: SpectrumMeta { samples: 2, period: 1.0, tau: 0.5, sigma: 0.3, realizations: 1 },
        };
        let text = spectrum_csv(&s).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("omega,value\n"));
        for ((w, v), (a, b)) in parse_spectrum_csv(&text).unwrap().iter().zip(s.omega.iter().zip(&s.values)) {
            assert!((w - a).abs() <= 1e-12 * a.abs().max(1e-300));
            assert!((v - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn empty_thermal_series_is_header_only() {
        let series = ThermalSeries { n_sites: 1, dim: 2, realizations: 1, mode: Default::default(), points: vec![] };
        assert_eq!(thermal_csv(&series).unwrap(), "beta,T,observable,value,stderr\n");
    }

    #[test]
    fn bitstring_round_trip() {
        let s = BitstringSample::new(5, vec![0, 31, 6], SampleSource::Uniform).unwrap();
        let text = bitstrings_to_text(&s);
        assert_eq!(text, "L=5 m=3\n00000\n11111\n00110\n");
        let back = parse_bitstrings(&text).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert!(parse_bitstrings("L=2 m=2\n01\n").is_err());
        assert!(parse_bitstrings("L=2 m=1\n012\n").is_err());
    }

    #[test]
    fn channel_round_trip() {
        let ch = KrausChannel::depolarizing_qubit(0.3).unwrap();
        let back = parse_channel_json(&channel_to_json(&ch).unwrap()).unwrap();
        assert_eq!(back, ch);
    }
}

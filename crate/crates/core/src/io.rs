//! Text formats: mass vectors (CSV `mass` or JSON array), histograms
//! (`atom,count`), partitions (`atom,bin`), 2-D points (`x,y`), centroids
//! (`cx,cy`) and frontier curves (`lambda,kl_p,kl_q`).
//!
//! Floats are written in shortest round-trip form, with infinities as `inf`.

use std::fmt::Write as _;

use crate::distribution::DiscreteDistribution;
use crate::divergence::FrontierPoint;
use crate::error::{Error, Result};
use crate::quantize::{CentroidModel, Partition};

/// Shortest round-trip decimal form; `inf`, `-inf` and `nan` for non-finite
/// values. Both zeros print as `0`; magnitudes outside `[1e-4, 1e15)` use
/// exponent notation.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return format_float(x);
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    format_float(if rounded == 0.0 { 0.0 } else { rounded })
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Data rows of a CSV document with the given header, as `(line, fields)`.
/// Blank lines are skipped; the header match ignores case and spaces.
fn csv_rows<'a>(text: &'a str, header: &[&str]) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hline, htext) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let got: Vec<String> = htext.split(',').map(|h| h.trim().to_ascii_lowercase()).collect();
    if got != header {
        return Err(parse_err(hline, format!("expected header `{}`, found `{htext}`", header.join(","))));
    }
    let mut rows = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", header.len(), fields.len())));
        }
        rows.push((line, fields));
    }
    Ok(rows)
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| parse_err(line, format!("`{field}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("`{field}` is not finite")))
    }
}

fn parse_index<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| parse_err(line, format!("`{field}` is not a valid {what}")))
}

/// One-column CSV with header `mass`.
pub fn parse_masses_csv(text: &str) -> Result<DiscreteDistribution> {
    let rows = csv_rows(text, &["mass"])?;
    let masses = rows.iter().map(|(line, f)| parse_f64(*line, f[0])).collect::<Result<Vec<f64>>>()?;
    if masses.is_empty() {
        return Err(parse_err(0, "no masses"));
    }
    DiscreteDistribution::new(masses)
}

/// JSON array of masses.
pub fn parse_masses_json(text: &str) -> Result<DiscreteDistribution> {
    let masses: Vec<f64> = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    DiscreteDistribution::new(masses)
}

/// Either format, chosen by whether the text starts with `[`.
pub fn parse_masses(text: &str) -> Result<DiscreteDistribution> {
    if text.trim_start().starts_with('[') {
        parse_masses_json(text)
    } else {
        parse_masses_csv(text)
    }
}

pub fn masses_to_csv(p: &DiscreteDistribution) -> String {
    let mut out = String::from("mass\n");
    for m in p.masses() {
        let _ = writeln!(out, "{}", format_float(*m));
    }
    out
}

pub fn masses_to_json(p: &DiscreteDistribution) -> String {
    serde_json::to_string(p.masses()).expect("finite masses serialize")
}

/// Histogram CSV `atom,count` as `(atom, count)` rows. Repeated atoms are an
/// error.
pub fn parse_histogram_csv(text: &str) -> Result<Vec<(usize, u64)>> {
    let rows = csv_rows(text, &["atom", "count"])?;
    if rows.is_empty() {
        return Err(parse_err(0, "histogram has no rows"));
    }
    let mut seen = std::collections::HashSet::new();
    rows.iter()
        .map(|(line, f)| {
            let atom: usize = parse_index(*line, f[0], "atom index")?;
            let count: u64 = parse_index(*line, f[1], "count")?;
            if !seen.insert(atom) {
                return Err(parse_err(*line, format!("atom {atom} listed twice")));
            }
            Ok((atom, count))
        })
        .collect()
}

pub fn histogram_to_csv(counts: &[u64]) -> String {
    let mut out = String::from("atom,count\n");
    for (a, c) in counts.iter().enumerate() {
        let _ = writeln!(out, "{a},{c}");
    }
    out
}

/// Partition CSV `atom,bin`; every atom `0..k` must appear exactly once and
/// every bin `0..m` must be used.
pub fn parse_partition_csv(text: &str) -> Result<Partition> {
    let rows = csv_rows(text, &["atom", "bin"])?;
    let k = rows.len();
    if k == 0 {
        return Err(parse_err(0, "partition has no rows"));
    }
    let mut assignment = vec![usize::MAX; k];
    for (line, f) in &rows {
        let atom: usize = parse_index(*line, f[0], "atom index")?;
        let bin: usize = parse_index(*line, f[1], "bin index")?;
        if atom >= k {
            return Err(parse_err(*line, format!("atom {atom} out of range for {k} rows")));
        }
        if assignment[atom] != usize::MAX {
            return Err(parse_err(*line, format!("atom {atom} listed twice")));
        }
        assignment[atom] = bin;
    }
    let m = assignment.iter().max().map_or(0, |b| b + 1);
    Partition::new(assignment, m)
}

pub fn partition_to_csv(s: &Partition) -> String {
    let mut out = String::from("atom,bin\n");
    for (a, b) in s.assignment().iter().enumerate() {
        let _ = writeln!(out, "{a},{b}");
    }
    out
}

fn parse_pairs(text: &str, header: &[&str]) -> Result<Vec<[f64; 2]>> {
    csv_rows(text, header)?.iter().map(|(line, f)| Ok([parse_f64(*line, f[0])?, parse_f64(*line, f[1])?])).collect()
}

/// Points CSV `x,y`.
pub fn parse_points_csv(text: &str) -> Result<Vec<[f64; 2]>> {
    parse_pairs(text, &["x", "y"])
}

/// Centroid CSV `cx,cy`.
pub fn parse_centroids_csv(text: &str) -> Result<Vec<[f64; 2]>> {
    parse_pairs(text, &["cx", "cy"])
}

pub fn points_to_csv(points: &[[f64; 2]]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        let _ = writeln!(out, "{},{}", format_float(p[0]), format_float(p[1]));
    }
    out
}

pub fn centroids_to_csv(model: &CentroidModel) -> String {
    let mut out = String::from("cx,cy\n");
    for c in &model.centroids {
        let _ = writeln!(out, "{},{}", format_float(c[0]), format_float(c[1]));
    }
    out
}

pub fn curve_to_csv(points: &[FrontierPoint]) -> String {
    let mut out = String::from("lambda,kl_p,kl_q\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", format_float(p.lambda), format_float(p.x), format_float(p.y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formats() {
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(3.5e-10), "3.5e-10");
        assert_eq!(format_float(2e20), "2e20");
        assert_eq!(format_sig12(3.68453434429123e-10), "3.68453434429e-10");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(1.0 - 1e-15), "1");
        assert_eq!(format_sig12(-1e-30 * 0.0), "0");
        assert_eq!(format_sig12(f64::INFINITY), "inf");
    }

    #[test]
    fn masses_roundtrip() {
        let p = DiscreteDistribution::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(parse_masses(&masses_to_csv(&p)).unwrap(), p);
        assert_eq!(parse_masses(&masses_to_json(&p)).unwrap(), p);
        assert_eq!(parse_masses("mass\r\n0.5\r\n\r\n0.5\r\n").unwrap().len(), 2);
    }

    #[test]
    fn masses_errors_have_lines() {
        assert_eq!(
            parse_masses_csv("mass\n0.5\nabc\n"),
            Err(Error::Parse { line: 3, msg: "`abc` is not a number".into() })
        );
        assert!(matches!(parse_masses_csv("p\n1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_masses_csv("").is_err());
        assert!(parse_masses_csv("mass\n").is_err());
        assert!(parse_masses_csv("mass\ninf\n").is_err());
        assert!(parse_masses_json("[0.5, 0.6]").is_err());
        assert!(parse_masses_json("[0.5,").is_err());
    }

    #[test]
    fn histogram_rows() {
        let rows = parse_histogram_csv("atom,count\n2,5\n0,1\n").unwrap();
        assert_eq!(rows, vec![(2, 5), (0, 1)]);
        assert!(matches!(parse_histogram_csv("atom,count\n1,2\n1,3\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_histogram_csv("atom,count\n-1,2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_histogram_csv("atom,count\n").is_err());
    }

    #[test]
    fn partition_roundtrip() {
        let s = Partition::new(vec![1, 0, 1, 2], 3).unwrap();
        assert_eq!(parse_partition_csv(&partition_to_csv(&s)).unwrap(), s);
        assert!(parse_partition_csv("atom,bin\n0,0\n0,1\n").is_err());
        assert!(parse_partition_csv("atom,bin\n0,0\n1,2\n").is_err());
    }

    #[test]
    fn points_roundtrip() {
        let pts = vec![[0.5, -1.25], [3.0, 1e-9]];
        assert_eq!(parse_points_csv(&points_to_csv(&pts)).unwrap(), pts);
        assert!(parse_points_csv("x,y\n1\n").is_err());
        assert_eq!(parse_centroids_csv("cx,cy\n1,2\n").unwrap(), vec![[1.0, 2.0]]);
    }
}

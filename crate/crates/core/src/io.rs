//! Text formats for matrices, signals, coefficients, masks and TSV tables.
//!
//! All formats are UTF-8, line oriented, and treat everything after `#` as a
//! comment. Complex literals are written `a`, `a+bi` or `a-bi` with no
//! internal spaces. Values are written in shortest round-trip form, so
//! serialize-then-parse is exact.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::checked_pow;
use crate::compression::CurvePoint;
use crate::linalg::{ComplexMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() || s.contains(char::is_whitespace) {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, body[k..].parse::<f64>().ok()?),
        None => (0.0, body.parse::<f64>().ok()?),
    };
    (re.is_finite() && im.is_finite()).then(|| Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 && z.im.is_sign_positive() {
        format!("{:?}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, IoError> {
    let mut lines = content_lines(text);
    let (first_line, header) = lines.next().ok_or_else(|| parse_err(0, "empty matrix file"))?;
    let n: usize = header.parse().map_err(|_| parse_err(first_line, format!("expected size N, got {header:?}")))?;
    if n == 0 {
        return Err(parse_err(first_line, "matrix size must be positive"));
    }
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (line_no, line) in lines {
        let mut row = Vec::with_capacity(n);
        for tok in line.split_whitespace() {
            row.push(parse_complex(tok).ok_or_else(|| parse_err(line_no, format!("invalid complex literal {tok:?}")))?);
        }
        if row.len() != n {
            return Err(IoError::DimensionMismatch(format!("line {line_no}: expected {n} entries, got {}", row.len())));
        }
        rows += 1;
        if rows > n {
            return Err(IoError::DimensionMismatch(format!("line {line_no}: more than {n} rows")));
        }
        data.extend(row);
    }
    if rows != n {
        return Err(IoError::DimensionMismatch(format!("expected {n} rows, got {rows}")));
    }
    Ok(ComplexMatrix::new(n, n, data)?)
}

pub fn parse_matrix_file(path: &Path) -> Result<ComplexMatrix, IoError> {
    parse_matrix(&read_file(path)?)
}

pub fn serialize_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|&z| format_complex(z)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Header of a signal or coefficient file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SignalHeader {
    pub coeffs: bool,
    pub base: Option<usize>,
    pub resolution: Option<usize>,
    pub convention: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalFile {
    pub header: SignalHeader,
    pub values: Vec<Complex64>,
}

fn parse_header(line_no: usize, line: &str) -> Result<SignalHeader, IoError> {
    let mut header = SignalHeader::default();
    for (k, tok) in line.split_whitespace().enumerate() {
        if k == 0 && tok == "coeffs" {
            header.coeffs = true;
            continue;
        }
        let (key, value) = tok.split_once('=').ok_or_else(|| parse_err(line_no, format!("bad header field {tok:?}")))?;
        let number = || value.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad value in {tok:?}")));
        match key {
            "base" => header.base = Some(number()?),
            "resolution" => header.resolution = Some(number()?),
            "convention" => header.convention = Some(value.to_string()),
            _ => return Err(parse_err(line_no, format!("unknown header field {key:?}"))),
        }
    }
    Ok(header)
}

pub fn parse_signal(text: &str) -> Result<SignalFile, IoError> {
    let mut header = SignalHeader::default();
    let mut values = Vec::new();
    for (idx, (line_no, line)) in content_lines(text).enumerate() {
        if idx == 0 && (line.contains('=') || line.starts_with("coeffs")) {
            header = parse_header(line_no, line)?;
            continue;
        }
        values.push(parse_complex(line).ok_or_else(|| parse_err(line_no, format!("invalid complex literal {line:?}")))?);
    }
    if let (Some(base), Some(resolution)) = (header.base, header.resolution) {
        let expected = checked_pow(base, resolution)
            .ok_or_else(|| IoError::DimensionMismatch(format!("{base}^{resolution} overflows")))?;
        if expected != values.len() {
            return Err(IoError::DimensionMismatch(format!(
                "header says {base}^{resolution} = {expected} values, file has {}",
                values.len()
            )));
        }
    }
    Ok(SignalFile { header, values })
}

pub fn serialize_signal(header: &SignalHeader, values: &[Complex64]) -> String {
    let mut fields = Vec::new();
    if header.coeffs {
        fields.push("coeffs".to_string());
    }
    if let Some(b) = header.base {
        fields.push(format!("base={b}"));
    }
    if let Some(p) = header.resolution {
        fields.push(format!("resolution={p}"));
    }
    if let Some(c) = &header.convention {
        fields.push(format!("convention={c}"));
    }
    let mut out = String::new();
    if !fields.is_empty() {
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    for &z in values {
        out.push_str(&format_complex(z));
        out.push('\n');
    }
    out
}

/// Header used for transform coefficient files.
pub fn coeff_header(base: usize, resolution: usize) -> SignalHeader {
    SignalHeader { coeffs: true, base: Some(base), resolution: Some(resolution), convention: Some("unitary".into()) }
}

/// Observed indices, one per line.
pub fn parse_mask(text: &str) -> Result<Vec<usize>, IoError> {
    content_lines(text)
        .map(|(line_no, line)| line.parse().map_err(|_| parse_err(line_no, format!("invalid index {line:?}"))))
        .collect()
}

/// `x` rounded to 12 significant digits, in shortest form.
pub fn format_sig12(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum TsvValue {
    Int(usize),
    Float(f64),
    Text(String),
}

impl TsvValue {
    fn render(&self) -> String {
        match self {
            TsvValue::Int(v) => v.to_string(),
            TsvValue::Float(v) => format_sig12(*v),
            TsvValue::Text(s) => s.clone(),
        }
    }
}

pub fn tsv_string(header: &[&str], rows: &[Vec<TsvValue>]) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(TsvValue::render).collect();
        let _ = writeln!(out, "{}", cells.join("\t"));
    }
    out
}

pub fn emit_tsv(path: &Path, header: &[&str], rows: &[Vec<TsvValue>]) -> Result<(), IoError> {
    write_file(path, &tsv_string(header, rows))
}

/// Rows `rank  component_index  normalized_variance` with 1-based rank.
pub fn curve_rows(curve: &[CurvePoint]) -> Vec<Vec<TsvValue>> {
    curve
        .iter()
        .enumerate()
        .map(|(k, p)| vec![TsvValue::Int(k + 1), TsvValue::Int(p.index), TsvValue::Float(p.fraction)])
        .collect()
}

pub const CURVE_HEADER: [&str; 3] = ["rank", "component_index", "normalized_variance"];

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{gw3b, walsh2};

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5"), Some(Complex64::new(1.5, 0.0)));
        assert_eq!(parse_complex("-2+3i"), Some(Complex64::new(-2.0, 3.0)));
        assert_eq!(parse_complex("0.5-0.25i"), Some(Complex64::new(0.5, -0.25)));
        assert_eq!(parse_complex("1e-3+2E+2i"), Some(Complex64::new(1e-3, 200.0)));
        assert_eq!(parse_complex("-4i"), Some(Complex64::new(0.0, -4.0)));
        assert_eq!(parse_complex("1 + 2i"), None);
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("inf"), None);
        assert_eq!(parse_complex("1+i"), None);
        for z in [Complex64::new(-0.2, 0.0), Complex64::new(1.0, -1e-300), Complex64::new(0.1, 0.7)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
    }

    #[test]
    fn walsh2_round_trips_exactly() {
        let m = walsh2();
        assert_eq!(parse_matrix(&serialize_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn gw3b_decimals_parse_exactly() {
        let text = "# decimal rows\n3\n0.5773502691896258 0.5773502691896258 0.5773502691896258\n-0.2 -0.58 0.78\n-0.79 0.57 0.22 # last\n";
        let m = parse_matrix(text).unwrap();
        for (r, c, v) in [(1, 0, -0.2), (1, 1, -0.58), (1, 2, 0.78), (2, 0, -0.79), (2, 1, 0.57), (2, 2, 0.22)] {
            assert_eq!(m[(r, c)], Complex64::new(v, 0.0));
            assert_eq!(m[(r, c)], gw3b()[(r, c)]);
        }
    }

    #[test]
    fn matrix_dimension_errors() {
        assert!(matches!(parse_matrix("3\n1 0 0\n0 1 0\n"), Err(IoError::DimensionMismatch(_))));
        assert!(matches!(parse_matrix("2\n1 0\n0 1 0\n"), Err(IoError::DimensionMismatch(_))));
        assert!(matches!(parse_matrix("2\n1 0\n0 1\n1 1\n"), Err(IoError::DimensionMismatch(_))));
        match parse_matrix("2\n1 0\n0 x\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_matrix("# nothing\n"), Err(IoError::Parse { .. })));
    }

    #[test]
    fn signal_headers() {
        let s = parse_signal("base=2 resolution=2\n1\n2\n3\n4-1i\n").unwrap();
        assert_eq!(s.header.base, Some(2));
        assert_eq!(s.values[3], Complex64::new(4.0, -1.0));
        assert!(matches!(parse_signal("base=2 resolution=2\n1\n2\n"), Err(IoError::DimensionMismatch(_))));
        let bare = parse_signal("# plain\n1\n2\n").unwrap();
        assert_eq!(bare.header, SignalHeader::default());
        let header = coeff_header(3, 1);
        let text = serialize_signal(&header, &[Complex64::new(1.0, 0.0); 3]);
        assert!(text.starts_with("coeffs base=3 resolution=1 convention=unitary\n"));
        assert_eq!(parse_signal(&text).unwrap().header, header);
        assert!(parse_signal("color=red\n1\n").is_err());
    }

    #[test]
    fn mask_parsing() {
        assert_eq!(parse_mask("0\n3 # observed\n\n7\n").unwrap(), vec![0, 3, 7]);
        assert!(parse_mask("1\n-2\n").is_err());
    }

    #[test]
    fn tsv_output() {
        assert_eq!(tsv_string(&CURVE_HEADER, &[]), "rank\tcomponent_index\tnormalized_variance\n");
        let curve = [CurvePoint { index: 0, fraction: 1.0 }];
        assert_eq!(
            tsv_string(&CURVE_HEADER, &curve_rows(&curve)),
            "rank\tcomponent_index\tnormalized_variance\n1\t0\t1.0\n"
        );
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(2.0f64.sqrt() * 1e-7), "1.41421356237e-7");
    }
}

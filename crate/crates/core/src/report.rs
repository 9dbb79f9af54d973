//! CSV formatting shared by every exporter: 12 significant digits and a `#`
//! metadata header that records how the file was produced.

use std::io::Write;

use sha2::{Digest, Sha256};

pub const SIG_DIGITS: usize = 12;

/// `%.12g`-style formatting.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Hex SHA-256 of arbitrary text (used on the serialized config).
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, Default)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Metadata {
        let mut m = Metadata::default();
        m.push("generator", format!("msgate {}", env!("CARGO_PKG_VERSION")));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    /// Records the hash and the full text of a config.
    pub fn config(&mut self, toml_text: &str) -> &mut Self {
        self.push("config_sha256", content_hash(toml_text));
        for line in toml_text.lines().filter(|l| !l.trim().is_empty()) {
            self.push("config", line);
        }
        self
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// Writes metadata then a CSV table.
pub fn write_table<W: Write>(
    mut w: W,
    meta: &Metadata,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> crate::Result<()> {
    meta.write_to(&mut w)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

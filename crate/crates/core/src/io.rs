//! Input series and versioned CSV reports.
//!
//! Every CSV the crate writes starts with a schema line
//! `# dcovar-csv v<version> <kind>`; readers refuse other versions.
//!
//! Input tables have a header row whose first column is an opaque
//! timestamp. Columns named `price…` hold prices and are turned into
//! negative log returns; columns named `loss…` are taken as losses
//! unchanged.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Result, RiskError};

pub const CSV_SCHEMA_VERSION: u32 = 1;
const CSV_MAGIC: &str = "# dcovar-csv";

pub fn schema_line(kind: &str) -> String {
    format!("{CSV_MAGIC} v{CSV_SCHEMA_VERSION} {kind}")
}

/// Returns the report kind named by a schema line.
pub fn parse_schema_line(line: &str) -> Result<String> {
    let bad = |message: String| RiskError::Data { row: 1, message };
    let rest = line
        .trim_end()
        .strip_prefix(CSV_MAGIC)
        .ok_or_else(|| bad(format!("missing schema line, found '{line}'")))?;
    let mut parts = rest.split_whitespace();
    let version = parts
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| bad(format!("unreadable schema version in '{line}'")))?;
    if version != CSV_SCHEMA_VERSION {
        return Err(bad(format!(
            "unsupported schema version v{version} (this build reads v{CSV_SCHEMA_VERSION})"
        )));
    }
    Ok(parts.collect::<Vec<_>>().join(" "))
}

/// Writes a schema line, a header and string rows.
pub fn write_versioned_csv<W: Write>(
    mut out: W,
    kind: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    writeln!(out, "{}", schema_line(kind))?;
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed versioned CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionedTable {
    pub kind: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_versioned_csv<R: BufRead>(mut input: R) -> Result<VersionedTable> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let kind = parse_schema_line(&first)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| shift_row(e.into(), 1))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(VersionedTable { kind, header, rows })
}

fn shift_row(e: RiskError, by: usize) -> RiskError {
    match e {
        RiskError::Data { row, message } => RiskError::Data {
            row: row + by,
            message,
        },
        other => other,
    }
}

/// Prices with their timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps: Vec<String>,
    prices: Vec<f64>,
}

impl PriceSeries {
    /// Validates strictly positive prices and increasing timestamps.
    pub fn new(timestamps: Vec<String>, prices: Vec<f64>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(RiskError::Domain(format!(
                "{} timestamps for {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        if let Some(i) = prices.iter().position(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(RiskError::Data {
                row: i + 1,
                message: format!("price must be positive and finite, got {}", prices[i]),
            });
        }
        check_increasing(&timestamps)?;
        Ok(Self { timestamps, prices })
    }

    pub fn timestamps(&self) -> &[String] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }
}

/// Timestamps are opaque, but ISO-like dates and plain numbers can be
/// ordered; those must increase strictly.
fn check_increasing(ts: &[String]) -> Result<()> {
    let iso = |s: &str| {
        let b = s.as_bytes();
        b.len() >= 10
            && b[..4].iter().all(u8::is_ascii_digit)
            && b[4] == b'-'
            && b[5..7].iter().all(u8::is_ascii_digit)
            && b[7] == b'-'
            && b[8..10].iter().all(u8::is_ascii_digit)
    };
    let decreasing = |i: usize| RiskError::Data {
        row: i + 1,
        message: format!("timestamp '{}' does not follow '{}'", ts[i], ts[i - 1]),
    };
    if ts.iter().all(|t| iso(t)) {
        for i in 1..ts.len() {
            if ts[i] <= ts[i - 1] {
                return Err(decreasing(i));
            }
        }
    } else if let Ok(nums) = ts.iter().map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>() {
        for i in 1..nums.len() {
            if !(nums[i] > nums[i - 1]) {
                return Err(decreasing(i));
            }
        }
    }
    Ok(())
}

/// `X_t = -ln(P_t / P_{t-1})`.
pub fn to_negative_log_returns(series: &PriceSeries) -> Result<Vec<f64>> {
    negative_log_returns(&series.prices)
}

pub fn negative_log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(RiskError::Domain(format!(
            "need at least two prices, got {}",
            prices.len()
        )));
    }
    if let Some(i) = prices.iter().position(|&p| !(p.is_finite() && p > 0.0)) {
        return Err(RiskError::Data {
            row: i + 1,
            message: format!("price must be positive and finite, got {}", prices[i]),
        });
    }
    Ok(prices.windows(2).map(|w| -(w[1] / w[0]).ln()).collect())
}

/// Numeric columns keyed by header name, sharing one timestamp column.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub timestamps: Vec<String>,
    pub columns: Vec<(String, Vec<f64>)>,
}

/// Reads `date,<col>,<col>…`; lines starting with `#` are ignored. Data
/// errors report the 1-based line number in the file.
pub fn read_series_csv<R: Read>(input: R) -> Result<SeriesTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(RiskError::Data {
            row: 1,
            message: "expected a timestamp column and at least one value column".into(),
        });
    }
    let mut timestamps = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        timestamps.push(record[0].to_string());
        for (k, column) in values.iter_mut().enumerate() {
            let cell = &record[k + 1];
            let v: f64 = cell.parse().map_err(|_| RiskError::Data {
                row: line,
                message: format!("column '{}': '{cell}' is not a number", header[k + 1]),
            })?;
            if !v.is_finite() {
                return Err(RiskError::Data {
                    row: line,
                    message: format!("column '{}': value must be finite", header[k + 1]),
                });
            }
            column.push(v);
        }
    }
    Ok(SeriesTable {
        timestamps,
        columns: header.into_iter().skip(1).zip(values).collect(),
    })
}

pub fn read_series_file(path: &Path) -> Result<SeriesTable> {
    let file = std::fs::File::open(path)
        .map_err(|e| RiskError::Io(format!("{}: {e}", path.display())))?;
    read_series_csv(std::io::BufReader::new(file))
}

impl SeriesTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Loss series for every column: prices become negative log returns,
    /// `loss…` columns pass through. Price-derived series are one shorter.
    pub fn losses(&self) -> Result<Vec<(String, Vec<f64>)>> {
        self.columns
            .iter()
            .map(|(name, values)| {
                let lower = name.to_ascii_lowercase();
                if lower.starts_with("price") {
                    // line numbers: header is line 1, first price line 2
                    let series = PriceSeries::new(self.timestamps.clone(), values.clone())
                        .map_err(|e| shift_row(e, 1))?;
                    Ok((name.clone(), to_negative_log_returns(&series)?))
                } else if lower.starts_with("loss") {
                    Ok((name.clone(), values.clone()))
                } else {
                    Err(RiskError::Data {
                        row: 1,
                        message: format!(
                            "column '{name}' is neither a price nor a loss column"
                        ),
                    })
                }
            })
            .collect()
    }

    /// The first two loss series; they must have equal length.
    pub fn loss_pair(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut all = self.losses()?;
        if all.len() < 2 {
            return Err(RiskError::Data {
                row: 1,
                message: "need two series (e.g. date,price_s,price_y)".into(),
            });
        }
        let (_, y) = all.swap_remove(1);
        let (_, s) = all.swap_remove(0);
        if s.len() != y.len() {
            return Err(RiskError::Data {
                row: 1,
                message: "loss columns differ in length".into(),
            });
        }
        Ok((s, y))
    }
}

/// Formats a probability as a percentage with two decimals.
pub fn pct2(p: f64) -> String {
    format!("{:.2}", 100.0 * p)
}

/// Shortest representation that parses back to the same `f64`.
pub fn full(x: f64) -> String {
    format!("{x:?}")
}

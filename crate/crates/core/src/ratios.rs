//! Running-time ratio rows: steps/ones, ones/states and their quotient, with
//! exact arithmetic for ordinary records and log-scale arithmetic for
//! astronomically large ones.
//!
//! Values are truncated toward zero at four decimal places for display, with
//! trailing zeros stripped down to one decimal; decimal separators are
//! always dots.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::catalog::{PpEntry, PpResult};

/// Plain integers above this many digits are carried in log10 form.
pub const LOG_DIGIT_THRESHOLD: usize = 30;

/// Values at or above 10^15 display in scientific notation.
const SCI_DISPLAY_EXP: f64 = 15.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatioError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: negative value {value:?}")]
    Negative { line: usize, value: String },
    #[error("ones count must be positive")]
    ZeroOnes,
}

/// A count that is either exact or a base-10 logarithm.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigUint),
    Log10(f64),
}

impl Scalar {
    pub fn log10(&self) -> f64 {
        match self {
            Scalar::Exact(v) => big_log10(v),
            Scalar::Log10(l) => *l,
        }
    }

    fn display(&self) -> String {
        match self {
            Scalar::Exact(v) => v.to_string(),
            Scalar::Log10(l) => format_scientific(*l),
        }
    }
}

fn big_log10(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let digits = v.to_string();
    let lead: f64 = digits[..digits.len().min(17)].parse().unwrap();
    lead.log10() + (digits.len().saturating_sub(17)) as f64
}

/// A ratio kept exact (as a fraction) or in log10 form.
#[derive(Debug, Clone, PartialEq)]
pub enum Ratio {
    Exact { num: BigUint, den: BigUint },
    Log10(f64),
}

impl Ratio {
    pub fn log10(&self) -> f64 {
        match self {
            Ratio::Exact { num, den } => big_log10(num) - big_log10(den),
            Ratio::Log10(l) => *l,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ratio::Exact { num, den } => match (num.to_f64(), den.to_f64()) {
                (Some(n), Some(d)) => n / d,
                _ => 10f64.powf(self.log10()),
            },
            Ratio::Log10(l) => 10f64.powf(*l),
        }
    }

    /// Truncated 4-decimal display, scientific for very large values.
    pub fn format(&self) -> String {
        match self {
            Ratio::Exact { num, den } => {
                let int = num / den;
                if int.to_string().len() > SCI_DISPLAY_EXP as usize {
                    return format_scientific(self.log10());
                }
                let frac4 = ((num % den) * 10_000u32 / den).to_u32().unwrap();
                join_trunc4(&int.to_string(), frac4)
            }
            Ratio::Log10(l) => {
                if *l >= SCI_DISPLAY_EXP || *l <= -5.0 {
                    format_scientific(*l)
                } else {
                    let scaled = 10f64.powf(*l) * 10_000.0;
                    let nudged = scaled * (1.0 + 1e-12) + 1e-6;
                    let m = nudged.floor() as u128;
                    join_trunc4(&(m / 10_000).to_string(), (m % 10_000) as u32)
                }
            }
        }
    }
}

fn join_trunc4(int: &str, frac4: u32) -> String {
    let mut frac = format!("{frac4:04}");
    while frac.len() > 1 && frac.ends_with('0') {
        frac.pop();
    }
    format!("{int}.{frac}")
}

fn format_scientific(log10: f64) -> String {
    let exp = log10.floor() as i64;
    let mant = 10f64.powf(log10 - exp as f64);
    let nudged = mant * 10_000.0 * (1.0 + 1e-12) + 1e-6;
    let m = (nudged.floor() as u64).min(99_999);
    let mant_str = join_trunc4(&(m / 10_000).to_string(), (m % 10_000) as u32);
    if exp < 0 {
        format!("{mant_str}e-{}", -exp)
    } else {
        format!("{mant_str}e+{exp}")
    }
}

/// One table row: the three quotients plus their inputs and source label.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub ones: Scalar,
    pub steps: Scalar,
    pub states: u32,
    pub r1: Ratio,
    pub r2: Ratio,
    pub r3: Ratio,
    pub source: String,
}

/// Exact-arithmetic row: r1 = steps/ones, r2 = ones/states, r3 = r1/r2.
pub fn ratio_row(
    ones: &BigUint,
    steps: &BigUint,
    states: u32,
    source: &str,
) -> Result<RatioRow, RatioError> {
    if ones.is_zero() {
        return Err(RatioError::ZeroOnes);
    }
    assert!(states >= 1);
    Ok(RatioRow {
        ones: Scalar::Exact(ones.clone()),
        steps: Scalar::Exact(steps.clone()),
        states,
        r1: Ratio::Exact {
            num: steps.clone(),
            den: ones.clone(),
        },
        r2: Ratio::Exact {
            num: ones.clone(),
            den: BigUint::from(states),
        },
        // r3 = r1 / r2 exactly
        r3: Ratio::Exact {
            num: steps * states,
            den: ones * ones,
        },
        source: source.to_string(),
    })
}

/// Log-scale row for values beyond exact representation.
pub fn ratio_row_log(log10_ones: f64, log10_steps: f64, states: u32, source: &str) -> RatioRow {
    assert!(log10_ones.is_finite() && log10_steps.is_finite());
    assert!(states >= 1);
    let r1 = log10_steps - log10_ones;
    let r2 = log10_ones - (states as f64).log10();
    RatioRow {
        ones: Scalar::Log10(log10_ones),
        steps: Scalar::Log10(log10_steps),
        states,
        r1: Ratio::Log10(r1),
        r2: Ratio::Log10(r2),
        // exact identity in log space as well
        r3: Ratio::Log10(r1 - r2),
        source: source.to_string(),
    }
}

/// A record taken from the published record surveys; ones/steps either exact
/// or in scientific notation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRecord {
    pub label: String,
    pub ones: Scalar,
    pub steps: Scalar,
    pub states: u32,
}

impl ExternalRecord {
    pub fn to_row(&self) -> Result<RatioRow, RatioError> {
        match (&self.ones, &self.steps) {
            (Scalar::Exact(o), Scalar::Exact(s)) => {
                let mut row = ratio_row(o, s, self.states, &self.label)?;
                row.ones = self.ones.clone();
                row.steps = self.steps.clone();
                Ok(row)
            }
            (ones, steps) => {
                let mut row = ratio_row_log(ones.log10(), steps.log10(), self.states, &self.label);
                row.ones = self.ones.clone();
                row.steps = self.steps.clone();
                Ok(row)
            }
        }
    }
}

fn parse_scalar(field: &str, line: usize) -> Result<Scalar, RatioError> {
    let field = field.trim();
    if field.starts_with('-') {
        return Err(RatioError::Negative {
            line,
            value: field.to_string(),
        });
    }
    if field.contains(['e', 'E']) {
        let (mant, exp) = field
            .split_once(['e', 'E'])
            .ok_or_else(|| RatioError::Malformed {
                line,
                reason: format!("bad scientific notation {field:?}"),
            })?;
        let mant: f64 = mant.parse().map_err(|_| RatioError::Malformed {
            line,
            reason: format!("bad mantissa {mant:?}"),
        })?;
        let exp: i64 = exp
            .trim_start_matches('+')
            .parse()
            .map_err(|_| RatioError::Malformed {
                line,
                reason: format!("bad exponent {exp:?}"),
            })?;
        if mant <= 0.0 {
            return Err(RatioError::Negative {
                line,
                value: field.to_string(),
            });
        }
        Ok(Scalar::Log10(mant.log10() + exp as f64))
    } else {
        let value: BigUint = field.parse().map_err(|_| RatioError::Malformed {
            line,
            reason: format!("bad integer {field:?}"),
        })?;
        if field.len() > LOG_DIGIT_THRESHOLD {
            Ok(Scalar::Log10(big_log10(&value)))
        } else {
            Ok(Scalar::Exact(value))
        }
    }
}

/// Parses the external-records CSV (`label,ones,steps,states` with header).
/// Comment lines starting with `#` are skipped.
pub fn ingest_records(text: &str) -> Result<Vec<ExternalRecord>, RatioError> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != "label,ones,steps,states" {
                return Err(RatioError::Malformed {
                    line,
                    reason: "expected header label,ones,steps,states".to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(RatioError::Malformed {
                line,
                reason: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let states: u32 = fields[3]
            .trim()
            .parse()
            .map_err(|_| RatioError::Malformed {
                line,
                reason: format!("bad state count {:?}", fields[3]),
            })?;
        if states == 0 {
            return Err(RatioError::Malformed {
                line,
                reason: "state count must be positive".to_string(),
            });
        }
        records.push(ExternalRecord {
            label: fields[0].trim().to_string(),
            ones: parse_scalar(fields[1], line)?,
            steps: parse_scalar(fields[2], line)?,
            states,
        });
    }
    if !saw_header {
        return Err(RatioError::Malformed {
            line: 1,
            reason: "missing header".to_string(),
        });
    }
    Ok(records)
}

/// Builds the ratio table CSV from searched PP entries (max-step witnesses)
/// plus external records, sorted by ones ascending; own rows first on ties.
pub fn build_table(own: &[PpEntry], externals: &[ExternalRecord]) -> Result<String, RatioError> {
    let mut rows: Vec<(f64, usize, RatioRow)> = Vec::new();
    for entry in own {
        if let PpResult::Found { pp, max_steps, .. } = &entry.result {
            let row = ratio_row(
                &BigUint::from(entry.ones),
                &BigUint::from(*max_steps),
                *pp,
                "own programs",
            )?;
            rows.push((row.ones.log10(), 0, row));
        }
    }
    for (idx, record) in externals.iter().enumerate() {
        let row = record.to_row()?;
        rows.push((row.ones.log10(), idx + 1, row));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = String::from("ones,r1,r2,r3,source\n");
    for (_, _, row) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.ones.display(),
            row.r1.format(),
            row.r2.format(),
            row.r3.format(),
            row.source
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_row(ones: u64, steps: u64, states: u32) -> RatioRow {
        ratio_row(&BigUint::from(ones), &BigUint::from(steps), states, "t").unwrap()
    }

    #[test]
    fn paper_row_values() {
        let row = exact_row(12, 106, 4);
        assert_eq!(row.r1.format(), "8.8333");
        assert_eq!(row.r2.format(), "3.0");
        assert_eq!(row.r3.format(), "2.9444");

        let row = exact_row(1, 1, 1);
        assert_eq!(
            (row.r1.format(), row.r2.format(), row.r3.format()),
            ("1.0".into(), "1.0".into(), "1.0".into())
        );

        let row = exact_row(10, 63, 4);
        assert_eq!(
            (row.r1.format(), row.r2.format(), row.r3.format()),
            ("6.3".into(), "2.5".into(), "2.52".into())
        );
    }

    #[test]
    fn truncation_is_toward_zero() {
        // 20927/160 = 130.79375 truncates to 130.7937, not 130.7938
        let row = exact_row(160, 20927, 5);
        assert_eq!(row.r1.format(), "130.7937");
    }

    #[test]
    fn large_external_rows() {
        let row = exact_row(4097, 47176869, 5);
        assert_eq!(row.r1.format(), "11514.979");
        assert_eq!(row.r3.format(), "14.0529");

        // the raw survey shift count differs in the final decimal of r1
        let row = exact_row(4097, 47176870, 5);
        assert_eq!(row.r1.format(), "11514.9792");
        assert_eq!(row.r3.format(), "14.0529");
        assert!((row.r1.to_f64() - 11514.979).abs() < 5e-4);
    }

    #[test]
    fn log_scale_rows() {
        let ones = 865.0 + 1.2f64.log10();
        let steps = 1730.0 + 3.0f64.log10();
        let row = ratio_row_log(ones, steps, 6, "t");
        assert_eq!(row.r1.format(), "2.5e+865");
        assert_eq!(row.r3.format(), "12.5");

        let ones = 1439.0 + 4.6f64.log10();
        let steps = 2879.0 + 2.484f64.log10();
        let row = ratio_row_log(ones, steps, 6, "t");
        assert_eq!(row.r1.format(), "5.4e+1439");
        assert_eq!(row.r3.format(), "7.0434");
    }

    #[test]
    fn trivial_log_rows() {
        let row = ratio_row_log(10.0, 10.0, 5, "t");
        assert_eq!(row.r1.format(), "1.0");
        let row = ratio_row_log(3.0, 6.0, 5, "t");
        assert_eq!(row.r1.format(), "1000.0");
        assert_eq!(row.r2.format(), "200.0");
        assert_eq!(row.r3.format(), "5.0");
    }

    #[test]
    fn r3_is_exactly_r1_over_r2() {
        for (ones, steps, states) in [(12u64, 106u64, 4u32), (501, 134467, 5), (7, 21, 4)] {
            let row = exact_row(ones, steps, states);
            let (
                Ratio::Exact { num: n1, den: d1 },
                Ratio::Exact { num: n2, den: d2 },
                Ratio::Exact { num: n3, den: d3 },
            ) = (&row.r1, &row.r2, &row.r3)
            else {
                panic!("expected exact ratios");
            };
            // r1/r2 = (n1 d2)/(d1 n2) must equal n3/d3 exactly
            assert_eq!(n1 * d2 * d3, n3 * (d1 * n2));
        }
        let row = ratio_row_log(21.39794, 42.72427, 6, "t");
        let (Ratio::Log10(l1), Ratio::Log10(l2), Ratio::Log10(l3)) = (&row.r1, &row.r2, &row.r3)
        else {
            panic!()
        };
        assert_eq!(l1 - l2, *l3);
    }

    #[test]
    fn log_and_exact_paths_agree() {
        for (ones, steps, states) in
            [(117u64, 13488u64, 5u32), (4097, 47176869, 5), (1915, 2133492, 5)]
        {
            let exact = exact_row(ones, steps, states);
            let log = ratio_row_log((ones as f64).log10(), (steps as f64).log10(), states, "t");
            for (a, b) in [
                (&exact.r1, &log.r1),
                (&exact.r2, &log.r2),
                (&exact.r3, &log.r3),
            ] {
                let (x, y) = (a.to_f64(), b.to_f64());
                assert!((x - y).abs() / x < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn formatting_is_idempotent() {
        for text in ["6.3", "2.52", "8.8333", "1.0", "0.625", "130.7937"] {
            let value: f64 = text.parse().unwrap();
            let ratio = Ratio::Log10(value.log10());
            assert_eq!(ratio.format(), text, "{text}");
        }
    }

    #[test]
    fn ingest_parses_and_validates() {
        let text = "label,ones,steps,states\nSchult,501,134467,5\nMB6,4.6e+1439,2.484e+2879,6\n";
        let records = ingest_records(text).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].label, "Schult");
        let row = records[0].to_row().unwrap();
        assert_eq!(row.r1.format(), "268.3972");
        assert_eq!(row.r3.format(), "2.6786");
        let row = records[1].to_row().unwrap();
        assert_eq!(row.r3.format(), "7.0434");

        assert_eq!(ingest_records("label,ones,steps,states\n").unwrap(), vec![]);
        assert!(matches!(
            ingest_records("label,ones,steps,states\nx,-1,5,2\n"),
            Err(RatioError::Negative { line: 2, .. })
        ));
        assert!(matches!(
            ingest_records("label,ones,steps,states\nx,1,5\n"),
            Err(RatioError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            ingest_records("bogus\n"),
            Err(RatioError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn zero_ones_is_rejected() {
        assert_eq!(
            ratio_row(&BigUint::zero(), &BigUint::from(5u32), 1, "t").unwrap_err(),
            RatioError::ZeroOnes
        );
    }

    #[test]
    fn table_rows_sort_by_ones() {
        let externals = ingest_records(
            "label,ones,steps,states\nBrady,117,13488,5\nMB6,4.6e+1439,2.484e+2879,6\n",
        )
        .unwrap();
        let own = vec![
            PpEntry {
                ones: 1,
                result: PpResult::Found {
                    pp: 1,
                    min_steps: 1,
                    min_name: "(1, 0, 4)".into(),
                    max_steps: 1,
                    max_name: "(1, 0, 4)".into(),
                },
            },
            PpEntry {
                ones: 2,
                result: PpResult::Unknown,
            },
        ];
        let table = build_table(&own, &externals).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "ones,r1,r2,r3,source");
        assert_eq!(lines[1], "1,1.0,1.0,1.0,own programs");
        assert_eq!(lines[2], "117,115.282,23.4,4.9265,Brady");
        assert!(lines[3].starts_with("4.6e+1439,5.4e+1439,"));
        assert_eq!(lines.len(), 4);
    }
}

//! Check reports and their JSON / CSV serializations.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::zscore;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub mesh: f64,
    pub paths: usize,
    pub seed: u64,
    pub t: f64,
}

/// One measured comparison `lhs` vs `rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub params: Params,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub se: f64,
    pub zscore: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

fn finite(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

impl Report {
    /// `gap = |lhs − rhs|` with the standard error of that difference.
    pub fn compare(check: &str, params: Params, lhs: f64, rhs: f64, se: f64) -> Report {
        let gap = (lhs - rhs).abs();
        Report::with_gap(check, params, lhs, rhs, gap, se)
    }

    pub fn with_gap(check: &str, params: Params, lhs: f64, rhs: f64, gap: f64, se: f64) -> Report {
        Report {
            check: check.to_string(),
            params,
            lhs: finite(lhs),
            rhs: finite(rhs),
            gap: finite(gap),
            se: finite(se),
            zscore: finite(zscore(gap, se)),
            slope: None,
        }
    }

    pub fn within_se(&self, k: f64) -> bool {
        self.gap <= k * self.se
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Output document: the effective configuration, all reports and the
/// pass/fail verdicts derived from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub config: serde_json::Value,
    pub reports: Vec<Report>,
    pub verdicts: Vec<Verdict>,
}

impl Envelope {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    n: usize,
    mesh: f64,
    paths: usize,
    seed: u64,
    t: f64,
    lhs: f64,
    rhs: f64,
    gap: f64,
    se: f64,
    zscore: f64,
    slope: Option<f64>,
}

/// One CSV row per report, with a header.
pub fn write_csv<W: Write>(reports: &[Report], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(CsvRow {
            check: &r.check,
            n: r.params.n,
            mesh: r.params.mesh,
            paths: r.params.paths,
            seed: r.params.seed,
            t: r.params.t,
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            se: r.se,
            zscore: r.zscore,
            slope: r.slope,
        })?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let p = Params { n: 4, mesh: 0.01, paths: 10, seed: 3, t: 1.0 };
        Report::compare("demo", p, 1.5, 1.0, 0.25)
    }

    #[test]
    fn json_round_trip_and_optional_slope() {
        let mut r = sample();
        assert_eq!(r.zscore, 2.0);
        let text = serde_json::to_string(&r).unwrap();
        assert!(!text.contains("slope"));
        r.slope = Some(0.5);
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), r);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        write_csv(&[sample(), sample()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "check,n,mesh,paths,seed,t,lhs,rhs,gap,se,zscore,slope");
        assert!(lines[1].starts_with("demo,4,0.01,10,3,1.0,1.5,1.0,0.5,0.25,2.0,"));
    }
}

use std::io::Write;

use minlen::{RelationReport, Verdict};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::run::{StateDump, SweepParam, SweepRow};
use crate::CliError;

/// Seventeen significant digits; non-finite values become `null`.
fn num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("valid JSON number")
}

fn opt_num(x: Option<f64>) -> Box<RawValue> {
    num(x.unwrap_or(f64::NAN))
}

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn opt_cell(x: Option<f64>) -> String {
    x.map_or(String::new(), cell)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    relation_id: &'a str,
    statement: &'a str,
    state: &'a str,
    beta: Box<RawValue>,
    sigma: Box<RawValue>,
    alpha: Box<RawValue>,
    gamma: Box<RawValue>,
    delta_k: Box<RawValue>,
    delta_x: Box<RawValue>,
    inputs_digest: &'a str,
    lhs: Box<RawValue>,
    rhs: Box<RawValue>,
    margin: Box<RawValue>,
    est_error: Box<RawValue>,
    tolerance: Box<RawValue>,
    verdict: &'a str,
}

impl<'a> From<&'a RelationReport> for JsonReport<'a> {
    fn from(r: &'a RelationReport) -> Self {
        let i = &r.inputs;
        JsonReport {
            relation_id: r.relation_id.as_str(),
            statement: r.relation_id.statement(),
            state: &i.state,
            beta: num(i.beta),
            sigma: opt_num(i.sigma),
            alpha: opt_num(i.alpha),
            gamma: opt_num(i.gamma),
            delta_k: opt_num(i.delta_k),
            delta_x: opt_num(i.delta_x),
            inputs_digest: &r.inputs_digest,
            lhs: num(r.lhs),
            rhs: num(r.rhs),
            margin: num(r.margin),
            est_error: num(r.est_error),
            tolerance: num(r.tolerance),
            verdict: r.verdict.as_str(),
        }
    }
}

#[derive(Serialize)]
struct Summary {
    total: usize,
    pass: usize,
    fail: usize,
    not_applicable: usize,
}

pub fn summary_counts(reports: &[RelationReport]) -> (usize, usize, usize) {
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::NotApplicable))
}

pub fn verify_json(reports: &[RelationReport]) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Doc<'a> {
        summary: Summary,
        reports: Vec<JsonReport<'a>>,
    }
    let (pass, fail, not_applicable) = summary_counts(reports);
    let doc = Doc {
        summary: Summary { total: reports.len(), pass, fail, not_applicable },
        reports: reports.iter().map(JsonReport::from).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub const VERIFY_CSV_HEADER: [&str; 13] =
    ["relation_id", "state", "beta", "sigma", "alpha", "gamma", "delta_k", "delta_x", "lhs", "rhs", "margin", "est_error", "verdict"];

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn verify_csv(reports: &[RelationReport]) -> Result<String, CliError> {
    csv_string(|w| {
        w.write_record(VERIFY_CSV_HEADER)?;
        for r in reports {
            let i = &r.inputs;
            w.write_record([
                r.relation_id.as_str().to_string(),
                i.state.clone(),
                cell(i.beta),
                opt_cell(i.sigma),
                opt_cell(i.alpha),
                opt_cell(i.gamma),
                opt_cell(i.delta_k),
                opt_cell(i.delta_x),
                cell(r.lhs),
                cell(r.rhs),
                cell(r.margin),
                cell(r.est_error),
                r.verdict.as_str().to_string(),
            ])?;
        }
        Ok(())
    })
}

pub const SWEEP_CSV_HEADER: [&str; 10] =
    ["param", "param_value", "relation_id", "state", "margin", "verdict", "inputs_digest", "correction_term", "s_f", "s_f_bound"];

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> Result<String, CliError> {
    csv_string(|w| {
        w.write_record(SWEEP_CSV_HEADER)?;
        for row in rows {
            let r = &row.report;
            w.write_record([
                param.as_str().to_string(),
                cell(row.param_value),
                r.relation_id.as_str().to_string(),
                r.inputs.state.clone(),
                cell(r.margin),
                r.verdict.as_str().to_string(),
                r.inputs_digest.clone(),
                opt_cell(row.correction_term),
                opt_cell(row.s_f.map(|s| s.0)),
                opt_cell(row.s_f.map(|s| s.1)),
            ])?;
        }
        Ok(())
    })
}

pub fn sweep_json(param: SweepParam, rows: &[SweepRow]) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Row<'a> {
        param_value: Box<RawValue>,
        relation_id: &'a str,
        state: &'a str,
        margin: Box<RawValue>,
        verdict: &'a str,
        inputs_digest: &'a str,
        correction_term: Box<RawValue>,
        s_f: Box<RawValue>,
        s_f_bound: Box<RawValue>,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        param: &'a str,
        rows: Vec<Row<'a>>,
    }
    let doc = Doc {
        param: param.as_str(),
        rows: rows
            .iter()
            .map(|row| Row {
                param_value: num(row.param_value),
                relation_id: row.report.relation_id.as_str(),
                state: &row.report.inputs.state,
                margin: num(row.report.margin),
                verdict: row.report.verdict.as_str(),
                inputs_digest: &row.report.inputs_digest,
                correction_term: opt_num(row.correction_term),
                s_f: opt_num(row.s_f.map(|s| s.0)),
                s_f_bound: opt_num(row.s_f.map(|s| s.1)),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

fn tables(d: &StateDump) -> [(&'static str, Vec<(f64, f64)>); 3] {
    let b = &d.analysis.bundle;
    let pairs = |f: &minlen::DensityFn| f.grid().nodes().iter().copied().zip(f.values().iter().copied()).collect();
    [("v_q", pairs(&b.v_q)), ("u_k", pairs(&b.u_k)), ("w_x", pairs(&b.w_x))]
}

fn scalars(d: &StateDump) -> [(&'static str, f64); 7] {
    let a = &d.analysis;
    [
        ("h_q", a.h_q.value),
        ("h_k", a.h_k.value),
        ("h_x", a.h_x.value),
        ("correction_term", a.correction.value),
        ("mass_v_q", d.masses[0]),
        ("mass_u_k", d.masses[1]),
        ("mass_w_x", d.masses[2]),
    ]
}

pub fn state_json(d: &StateDump) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Table {
        coordinate: Vec<Box<RawValue>>,
        density: Vec<Box<RawValue>>,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        state: &'a str,
        beta: Box<RawValue>,
        scalars: serde_json::Map<String, serde_json::Value>,
        tables: Vec<(&'static str, Table)>,
    }
    let mut map = serde_json::Map::new();
    for (k, v) in scalars(d) {
        map.insert(k.to_string(), serde_json::from_str(num(v).get())?);
    }
    let doc = Doc {
        state: &d.analysis.label,
        beta: num(d.analysis.params.beta()),
        scalars: map,
        tables: tables(d)
            .into_iter()
            .map(|(name, rows)| {
                let (c, p): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
                (name, Table { coordinate: c.into_iter().map(num).collect(), density: p.into_iter().map(num).collect() })
            })
            .collect(),
    };
    let mut s = serde_json::to_string(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn state_csv(d: &StateDump) -> Result<String, CliError> {
    csv_string(|w| {
        w.write_record(["table", "coordinate", "value"])?;
        for (name, v) in scalars(d) {
            w.write_record([name, "", &cell(v)])?;
        }
        for (name, rows) in tables(d) {
            for (x, p) in rows {
                w.write_record([name, &cell(x), &cell(p)])?;
            }
        }
        Ok(())
    })
}

pub fn emit(text: &str, path: Option<&str>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{p}: {e}"))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minlen::relations::{Inputs, RelationId};

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.1).get(), "1.0000000000000001e-1");
        assert_eq!(num(f64::NAN).get(), "null");
        assert_eq!(cell(-2.5), "-2.5000000000000000e0");
        let back: f64 = serde_json::from_str(num(std::f64::consts::PI).get()).unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_header_and_empty_fields() {
        let r = RelationReport::new(RelationId::BbmCorrected, 3.0, 2.0, 0.0, Inputs::new("uniform_q", 1.0));
        let text = verify_csv(&[r]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "relation_id,state,beta,sigma,alpha,gamma,delta_k,delta_x,lhs,rhs,margin,est_error,verdict");
        assert!(lines.next().unwrap().starts_with("bbm_corrected,uniform_q,1.0000000000000000e0,,,,,,3.0"));
    }
}

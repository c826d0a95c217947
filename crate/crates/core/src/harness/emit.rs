//! CSV and JSON-lines emission of result tables.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::config::{SweepParam, SweepValue};
use super::engine::{PointOptimum, ResultRow};
use crate::error::Result;
use crate::optimizer::Selection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "jsonl" | "json-lines" => Some(Format::Jsonl),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

pub const KPI_COLUMNS: [&str; 14] = [
    "path",
    "n_links",
    "mean_loss_prob",
    "reliability_error_based",
    "reliability_delay_based",
    "availability_error_based",
    "availability_delay_aware",
    "lost_fraction",
    "mean_delay_s",
    "mean_se_bps_per_hz",
    "n_samples",
    "ci_halfwidth",
    "ci_halfwidth_drops",
    "runtime_s",
];

pub const CCDF_COLUMNS: [&str; 3] = ["path", "threshold_s", "prob"];

pub const OPTIMIZER_COLUMNS: [&str; 11] = [
    "eps_th",
    "d_th_s",
    "p_th",
    "path",
    "n_links",
    "se_mean_bps_per_hz",
    "loss_prob",
    "mean_delay_s",
    "availability",
    "feasible",
    "selected",
];

/// Float cell with ten significant digits, so that a parse-back is within
/// `5e-10` relative.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

enum Cell {
    Text(String),
    Float(f64),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Float(x) => Value::from(*x),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

fn coord_cells(coords: &[(SweepParam, SweepValue)]) -> Vec<Cell> {
    coords
        .iter()
        .map(|(_, v)| match v {
            SweepValue::Number(x) => Cell::Float(*x),
            SweepValue::Text(s) => Cell::Text(s.clone()),
        })
        .collect()
}

fn write_table<W: Write>(
    out: &mut W,
    format: Format,
    table: &str,
    params: &[SweepParam],
    columns: &[&str],
    rows: impl Iterator<Item = Vec<Cell>>,
) -> Result<()> {
    let header: Vec<&str> = params.iter().map(|p| p.column()).chain(columns.iter().copied()).collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header)?;
            for r in rows {
                w.write_record(r.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for r in rows {
                let mut m = Map::new();
                m.insert("table".into(), Value::String(table.into()));
                for (k, c) in header.iter().zip(&r) {
                    m.insert((*k).into(), c.json());
                }
                serde_json::to_writer(&mut *out, &Value::Object(m)).map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// One row per (sweep point, path).
pub fn write_kpi_table<W: Write>(out: &mut W, format: Format, params: &[SweepParam], rows: &[ResultRow]) -> Result<()> {
    let cells = rows.iter().map(|r| {
        let k = &r.kpi;
        let mut c = coord_cells(&r.coords);
        c.extend([
            Cell::Text(r.path.id().to_string()),
            Cell::Int(r.n_links as u64),
            Cell::Float(k.mean_loss_prob),
            Cell::Float(k.reliability_error_based),
            Cell::Float(k.reliability_delay_based),
            Cell::Float(k.availability_error_based),
            Cell::Float(k.availability_delay_aware),
            Cell::Float(k.lost_fraction),
            Cell::Float(k.mean_delay_s),
            Cell::Float(k.mean_se),
            Cell::Int(k.n_samples),
            Cell::Float(k.ci_halfwidth),
            Cell::Float(k.ci_halfwidth_drops),
            Cell::Float(r.runtime_s),
        ]);
        c
    });
    write_table(out, format, "kpi", params, &KPI_COLUMNS, cells)
}

/// Long-format delay CCDF: one row per (sweep point, path, threshold).
pub fn write_ccdf<W: Write>(out: &mut W, format: Format, params: &[SweepParam], rows: &[ResultRow]) -> Result<()> {
    let cells = rows.iter().flat_map(|r| {
        r.kpi.delay_ccdf.iter().map(move |&(t, p)| {
            let mut c = coord_cells(&r.coords);
            c.extend([Cell::Text(r.path.id().to_string()), Cell::Float(t), Cell::Float(p)]);
            c
        })
    });
    write_table(out, format, "ccdf", params, &CCDF_COLUMNS, cells)
}

/// Every candidate with its constraint status and the selection flag.
pub fn write_optimizer_report<W: Write>(
    out: &mut W,
    format: Format,
    params: &[SweepParam],
    points: &[PointOptimum],
) -> Result<()> {
    let cells = points.iter().flat_map(|pt| {
        let chosen = match &pt.selection {
            Selection::Selected { path, .. } => Some(path.clone()),
            Selection::Infeasible => None,
        };
        pt.candidates.iter().map(move |k| {
            let mut c = coord_cells(&pt.coords);
            c.extend([
                Cell::Float(pt.qos.eps_th),
                Cell::Float(pt.qos.d_th_s),
                Cell::Float(pt.qos.p_th),
                Cell::Text(k.path.id().to_string()),
                Cell::Int(k.n_links as u64),
                Cell::Float(k.se_mean),
                Cell::Float(k.loss),
                Cell::Float(k.mean_delay_s),
                Cell::Float(k.availability),
                Cell::Bool(k.is_feasible(&pt.qos)),
                Cell::Bool(chosen.as_ref() == Some(&k.path)),
            ]);
            c
        })
    });
    write_table(out, format, "optimizer", params, &OPTIMIZER_COLUMNS, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentSpec;
    use crate::harness::config::Sweep;
    use crate::harness::engine::run_experiment;

    fn result() -> (Vec<SweepParam>, Vec<ResultRow>) {
        let spec = ExperimentSpec {
            n_outer_drops: 4,
            n_inner_packets: 8,
            sweeps: vec![Sweep::numbers(SweepParam::DataRate, &[250e3, 1e6])],
            paths: Some(vec!["DA2G".parse().unwrap(), "DA2G+HAP".parse().unwrap()]),
            ccdf_thresholds_s: vec![1e-3, 5e-3],
            ..ExperimentSpec::default()
        };
        (vec![SweepParam::DataRate], run_experiment(&spec, None).unwrap().rows)
    }

    fn text(f: impl FnOnce(&mut Vec<u8>)) -> String {
        let mut buf = Vec::new();
        f(&mut buf);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_and_single_row() {
        let (params, rows) = result();
        let empty = text(|b| write_kpi_table(b, Format::Csv, &params, &[]).unwrap());
        assert_eq!(empty.lines().count(), 1);
        assert!(empty.starts_with("data_rate_bps,path,n_links,mean_loss_prob,"));
        let one = text(|b| write_kpi_table(b, Format::Csv, &params, &rows[..1]).unwrap());
        assert_eq!(one.lines().count(), 2);
        assert_eq!(text(|b| write_kpi_table(b, Format::Jsonl, &params, &[]).unwrap()), "");
    }

    #[test]
    fn csv_parse_back() {
        let (params, rows) = result();
        let s = text(|b| write_kpi_table(b, Format::Csv, &params, &rows).unwrap());
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let h = r.headers().unwrap().clone();
        let col = |name: &str| h.iter().position(|x| x == name).unwrap();
        for (rec, row) in r.records().zip(&rows) {
            let rec = rec.unwrap();
            let check = |name: &str, v: f64| {
                let got: f64 = rec[col(name)].parse().unwrap();
                if v == 0.0 || !v.is_finite() {
                    assert_eq!(got, v);
                } else {
                    assert!(((got - v) / v).abs() <= 1e-9, "{name}: {got} vs {v}");
                }
            };
            check("mean_loss_prob", row.kpi.mean_loss_prob);
            check("mean_delay_s", row.kpi.mean_delay_s);
            check("mean_se_bps_per_hz", row.kpi.mean_se);
            check("ci_halfwidth", row.kpi.ci_halfwidth);
            check(
                "data_rate_bps",
                match row.coords[0].1 {
                    SweepValue::Number(x) => x,
                    _ => unreachable!(),
                },
            );
            assert_eq!(&rec[col("path")], row.path.id());
        }
    }

    #[test]
    fn ccdf_is_long_format() {
        let (params, rows) = result();
        let s = text(|b| write_ccdf(b, Format::Csv, &params, &rows).unwrap());
        assert_eq!(s.lines().next().unwrap(), "data_rate_bps,path,threshold_s,prob");
        assert_eq!(s.lines().count(), 1 + rows.len() * 2);
    }

    #[test]
    fn jsonl_lines_are_objects() {
        let (params, rows) = result();
        let s = text(|b| write_kpi_table(b, Format::Jsonl, &params, &rows).unwrap());
        assert_eq!(s.lines().count(), rows.len());
        for l in s.lines() {
            let v: Value = serde_json::from_str(l).unwrap();
            assert_eq!(v["table"], "kpi");
            assert!(v["mean_loss_prob"].is_number());
        }
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(0.1), "1.000000000e-1");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!("inf".parse::<f64>().unwrap(), f64::INFINITY);
        let x = 0.123456789012345;
        let back: f64 = fmt_float(x).parse().unwrap();
        assert!(((back - x) / x).abs() < 5e-10);
    }
}

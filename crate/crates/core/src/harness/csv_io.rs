//! CSV output. Floats use 17 significant digits so values re-parse exactly.

use crate::error::{Error, Result};
use crate::harness::ConvergenceTable;
use crate::kkt::DiscreteSolution;
use crate::stability::ScanRecord;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Header `N,var,error,order`; `order` is empty on the first grid and for
/// non-doubling neighbours.
pub fn convergence_csv(table: &ConvergenceTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["N", "var", "error", "order"])
        .map_err(csv_err)?;
    for (j, n) in table.grids.iter().enumerate() {
        for (v, name) in table.variables.iter().enumerate() {
            let order = j
                .checked_sub(1)
                .and_then(|k| table.orders[v][k])
                .map(fmt_f64)
                .unwrap_or_default();
            w.write_record([
                n.to_string(),
                name.clone(),
                fmt_f64(table.errors[v][j]),
                order,
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// One parsed row of [`convergence_csv`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub var: String,
    pub error: f64,
    pub order: Option<f64>,
}

pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |msg: String| Error::InvalidArgument(format!("convergence CSV: {msg}"));
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 4 {
                return Err(bad(format!("expected 4 fields, got {}", rec.len())));
            }
            Ok(ConvergenceRow {
                n: rec[0].parse().map_err(|e| bad(format!("{e}")))?,
                var: rec[1].to_string(),
                error: rec[2].parse().map_err(|e| bad(format!("{e}")))?,
                order: if rec[3].is_empty() {
                    None
                } else {
                    Some(rec[3].parse().map_err(|e| bad(format!("{e}")))?)
                },
            })
        })
        .collect()
}

pub fn scan_csv(records: &[ScanRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "d1",
        "d3",
        "q_residual",
        "zero_stable",
        "alpha_degrees",
        "k_nonnegative",
    ])
    .map_err(csv_err)?;
    for r in records {
        w.write_record([
            fmt_f64(r.d1),
            fmt_f64(r.d3),
            fmt_f64(r.q_residual),
            r.zero_stable.to_string(),
            r.alpha_degrees.map(fmt_f64).unwrap_or_default(),
            r.k_nonnegative.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Header `n,stage,t,y1..ym,p1..pm`.
pub fn solution_csv(sol: &DiscreteSolution) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "stage".into(), "t".into()];
    header.extend((1..=sol.m).map(|k| format!("y{k}")));
    header.extend((1..=sol.m).map(|k| format!("p{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for n in 0..=sol.grid.n {
        for i in 0..sol.s {
            let mut row = vec![
                n.to_string(),
                (i + 1).to_string(),
                fmt_f64(sol.stage_time(n, i)),
            ];
            row.extend(sol.y_stage(n, i).iter().map(|&v| fmt_f64(v)));
            row.extend(sol.p_stage(n, i).iter().map(|&v| fmt_f64(v)));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn convergence_round_trip() {
        let table = ConvergenceTable {
            method: "m".into(),
            problem: "p".into(),
            grids: vec![10, 20, 30],
            variables: vec!["y1".into(), "p1".into()],
            errors: vec![vec![1e-3, 1.3e-4, 7e-5], vec![0.1, 0.026, 0.01]],
            orders: vec![vec![Some(2.94), None], vec![Some(1.94), None]],
            n_ref: 240,
            reference_agreement: vec![0.0, 0.0],
        };
        let text = convergence_csv(&table).unwrap();
        assert!(text.starts_with("N,var,error,order\n"));
        let rows = parse_convergence_csv(&text).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[2].error.to_bits(), 1.3e-4f64.to_bits());
        assert_eq!(rows[2].order, Some(2.94));
        assert_eq!(rows[0].order, None);
        assert_eq!(rows[5].order, None);
    }
}

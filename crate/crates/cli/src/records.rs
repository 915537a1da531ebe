//! Per-replicate records as CSV: `replicate,n,u,l,r,v,range`, floats with 17
//! significant digits so that a write/read round trip is exact.

use std::collections::BTreeMap;

use rwrs_core::verify::{GridRecord, ReplicateResult};

use crate::error::CliError;

pub const HEADER: [&str; 7] = ["replicate", "n", "u", "l", "r", "v", "range"];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(results: &[ReplicateResult]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for res in results {
        for rec in &res.records {
            w.write_record([
                res.replicate.to_string(),
                rec.n.to_string(),
                float(rec.u),
                float(rec.l),
                float(rec.r),
                rec.v.to_string(),
                rec.range.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

/// Parse a records file, grouping rows by replicate (ascending).
pub fn read_csv(bytes: &[u8]) -> Result<Vec<ReplicateResult>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let header = r
        .headers()
        .map_err(|e| CliError::Usage(format!("records header: {e}")))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::Usage(format!(
            "records header must be `{}`, found `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut grouped: BTreeMap<u64, Vec<GridRecord>> = BTreeMap::new();
    for (i, row) in r.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CliError::Usage(format!("records line {line}: {e}")))?;
        let field = |k: usize| -> Result<&str, CliError> {
            row.get(k).ok_or_else(|| {
                CliError::Usage(format!("records line {line}: missing `{}`", HEADER[k]))
            })
        };
        let int = |k: usize| -> Result<u64, CliError> {
            field(k)?.parse().map_err(|_| {
                CliError::Usage(format!(
                    "records line {line}: `{}` is not an integer",
                    HEADER[k]
                ))
            })
        };
        let real = |k: usize| -> Result<f64, CliError> {
            field(k)?.parse().map_err(|_| {
                CliError::Usage(format!(
                    "records line {line}: `{}` is not a number",
                    HEADER[k]
                ))
            })
        };
        let rec = GridRecord {
            n: int(1)?,
            u: real(2)?,
            l: real(3)?,
            r: real(4)?,
            v: int(5)?,
            range: int(6)?,
        };
        grouped.entry(int(0)?).or_default().push(rec);
    }
    Ok(grouped
        .into_iter()
        .map(|(replicate, mut records)| {
            records.sort_by_key(|r| r.n);
            ReplicateResult {
                replicate,
                records,
                lil: None,
            }
        })
        .collect())
}

//! CSV ingestion.
//!
//! Long format (default): header `lab,replicate,value`, one measurement per
//! row. Laboratories are ordered by first appearance and replicates within
//! a laboratory by row order.
//!
//! Wide format: header `lab,<rep1>,...,<repN>`, one laboratory per row.
//!
//! Scenario grids: header `mu,sigma_r2,ratio,k,n,m_boot,r_mc,alpha,seed`.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{DataError, Error, Result};
use crate::model::Dataset;
use crate::simulation::Scenario;

pub const LONG_HEADER: [&str; 3] = ["lab", "replicate", "value"];
pub const SCENARIO_HEADER: [&str; 9] =
    ["mu", "sigma_r2", "ratio", "k", "n", "m_boot", "r_mc", "alpha", "seed"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn records<R: Read>(input: R) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in reader(input).into_records() {
        let rec = rec.map_err(csv_error)?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io {
            path: "<input>".into(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => DataError::NonNumeric {
            line: e.position().map_or(0, |p| p.line() as usize),
            value: e.to_string(),
        }
        .into(),
    }
}

fn parse_value(line: usize, field: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| {
        DataError::NonNumeric {
            line,
            value: field.to_string(),
        }
        .into()
    })
}

fn header_matches(rec: &csv::StringRecord, expected: &[&str]) -> bool {
    rec.len() == expected.len()
        && rec
            .iter()
            .zip(expected)
            .all(|(a, b)| a.eq_ignore_ascii_case(b))
}

/// Parses long-format CSV.
pub fn read_long<R: Read>(input: R) -> Result<Dataset> {
    let recs = records(input)?;
    let Some(((_, header), body)) = recs.split_first() else {
        return Err(DataError::Empty.into());
    };
    if !header_matches(header, &LONG_HEADER) {
        return Err(DataError::MissingHeader {
            expected: LONG_HEADER.join(","),
        }
        .into());
    }
    let mut labs: Vec<(String, Vec<String>, Vec<f64>)> = Vec::new();
    for (row, (line, rec)) in body.iter().enumerate() {
        if rec.len() != 3 {
            return Err(DataError::Ragged {
                row: row + 1,
                found: rec.len(),
                expected: 3,
            }
            .into());
        }
        let value = parse_value(*line, &rec[2])?;
        let idx = match labs.iter().position(|(l, _, _)| l == &rec[0]) {
            Some(i) => i,
            None => {
                labs.push((rec[0].to_string(), Vec::new(), Vec::new()));
                labs.len() - 1
            }
        };
        let (lab, reps, values) = &mut labs[idx];
        if reps.iter().any(|r| r == &rec[1]) {
            return Err(DataError::DuplicateReplicate {
                lab: lab.clone(),
                replicate: rec[1].to_string(),
            }
            .into());
        }
        reps.push(rec[1].to_string());
        values.push(value);
    }
    assemble(labs.into_iter().map(|(lab, _, v)| (lab, v)).collect())
}

/// Parses wide-format CSV (`lab,rep1,...,repN`).
pub fn read_wide<R: Read>(input: R) -> Result<Dataset> {
    let recs = records(input)?;
    let Some(((_, header), body)) = recs.split_first() else {
        return Err(DataError::Empty.into());
    };
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("lab") {
        return Err(DataError::MissingHeader {
            expected: "lab,rep1,...,repN".into(),
        }
        .into());
    }
    let width = header.len();
    let mut labs = Vec::with_capacity(body.len());
    for (row, (line, rec)) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(DataError::Ragged {
                row: row + 1,
                found: rec.len(),
                expected: width,
            }
            .into());
        }
        let values = rec
            .iter()
            .skip(1)
            .map(|f| parse_value(*line, f))
            .collect::<Result<Vec<f64>>>()?;
        labs.push((rec[0].to_string(), values));
    }
    assemble(labs)
}

fn assemble(labs: Vec<(String, Vec<f64>)>) -> Result<Dataset> {
    let Some((_, first)) = labs.first() else {
        return Err(DataError::Empty.into());
    };
    let n = first.len();
    for (lab, values) in &labs {
        if values.len() != n {
            return Err(DataError::Unbalanced {
                lab: lab.clone(),
                found: values.len(),
                expected: n,
            }
            .into());
        }
    }
    if labs.len() < 2 {
        return Err(DataError::TooFewLabs(labs.len()).into());
    }
    if n < 2 {
        return Err(DataError::TooFewReplicates(n).into());
    }
    let rows: Vec<Vec<f64>> = labs.into_iter().map(|(_, v)| v).collect();
    Dataset::from_rows(&rows)
}

/// Reads a long-format file.
pub fn ingest(path: impl AsRef<Path>) -> Result<Dataset> {
    read_long(open(path.as_ref())?)
}

/// Reads a wide-format file.
pub fn ingest_wide(path: impl AsRef<Path>) -> Result<Dataset> {
    read_wide(open(path.as_ref())?)
}

/// Writes a dataset in long format.
pub fn write_long<W: std::io::Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io {
        path: "<output>".into(),
        source: std::io::Error::other(e.to_string()),
    };
    w.write_record(LONG_HEADER).map_err(io_err)?;
    for (i, row) in dataset.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            w.write_record([(i + 1).to_string(), (j + 1).to_string(), format!("{v:?}")])
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })
}

/// Parses a scenario grid. An empty grid is a configuration error.
pub fn read_scenarios<R: Read>(input: R) -> Result<Vec<Scenario>> {
    let recs = records(input)?;
    let Some(((_, header), body)) = recs.split_first() else {
        return Err(Error::config("scenario grid is empty"));
    };
    if !header_matches(header, &SCENARIO_HEADER) {
        return Err(Error::config(format!(
            "scenario grid header must be `{}`",
            SCENARIO_HEADER.join(",")
        )));
    }
    if body.is_empty() {
        return Err(Error::config("scenario grid has no rows"));
    }
    body.iter()
        .map(|(line, rec)| {
            if rec.len() != SCENARIO_HEADER.len() {
                return Err(Error::config(format!(
                    "scenario grid line {line} has {} fields",
                    rec.len()
                )));
            }
            let bad = |name: &str| Error::config(format!("line {line}: invalid {name}"));
            let real = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(SCENARIO_HEADER[i]));
            let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(SCENARIO_HEADER[i]));
            let s = Scenario {
                mu: real(0)?,
                sigma_r2: real(1)?,
                ratio: real(2)?,
                k: int(3)?,
                n: int(4)?,
                m_boot: int(5)?,
                r_mc: int(6)?,
                alpha: real(7)?,
                seed: rec[8].parse::<u64>().map_err(|_| bad("seed"))?,
            };
            s.validate()?;
            Ok(s)
        })
        .collect()
}

pub fn read_scenarios_file(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    read_scenarios(open(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(r: Result<Dataset>) -> u32 {
        match r {
            Err(Error::Data(e)) => e.code(),
            other => panic!("expected data error, got {other:?}"),
        }
    }

    #[test]
    fn long_format_orders_labs_by_first_appearance() {
        let text = "lab,replicate,value\nB,1,3\nA,1,1\nB,2,4\nA,2,2\n";
        let d = read_long(text.as_bytes()).unwrap();
        assert_eq!(d.row(0), &[3.0, 4.0]);
        assert_eq!(d.row(1), &[1.0, 2.0]);
    }

    #[test]
    fn long_format_errors() {
        assert_eq!(code(read_long("a,b,c\n1,1,1\n".as_bytes())), 10);
        assert_eq!(code(read_long("".as_bytes())), 18);
        let unbalanced = "lab,replicate,value\n1,1,1\n1,2,2\n2,1,3\n";
        assert_eq!(code(read_long(unbalanced.as_bytes())), 11);
        assert_eq!(code(read_long("lab,replicate,value\n1,1,x\n".as_bytes())), 13);
        let one_lab = "lab,replicate,value\n1,1,1\n1,2,2\n";
        assert_eq!(code(read_long(one_lab.as_bytes())), 16);
        let one_rep = "lab,replicate,value\n1,1,1\n2,1,2\n";
        assert_eq!(code(read_long(one_rep.as_bytes())), 17);
        let dup = "lab,replicate,value\n1,1,1\n1,1,2\n";
        assert_eq!(code(read_long(dup.as_bytes())), 15);
        let nan = "lab,replicate,value\n1,1,NaN\n1,2,1\n2,1,1\n2,2,1\n";
        assert_eq!(code(read_long(nan.as_bytes())), 14);
        assert_eq!(code(read_long("lab,replicate,value\n1,1\n".as_bytes())), 12);
    }

    #[test]
    fn wide_format() {
        let d = read_wide("lab,r1,r2,r3\n1,1,2,3\n2,4,5,6\n".as_bytes()).unwrap();
        assert_eq!((d.k(), d.n()), (2, 3));
        assert_eq!(d.get(1, 2), 6.0);
        assert_eq!(code(read_wide("lab,r1,r2\n1,1,2\n2,4\n".as_bytes())), 12);
    }

    #[test]
    fn long_round_trip() {
        let d = Dataset::from_rows(&[[0.1, 0.2], [1e-7, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_long(&d, &mut buf).unwrap();
        assert_eq!(read_long(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn scenario_grid() {
        let text = "mu,sigma_r2,ratio,k,n,m_boot,r_mc,alpha,seed\n0,1,0.5,5,5,100,10,0.05,7\n";
        let s = read_scenarios(text.as_bytes()).unwrap();
        assert_eq!(s, vec![Scenario { m_boot: 100, r_mc: 10, ..Scenario::new(5, 5, 0.5, 7) }]);
        let empty = "mu,sigma_r2,ratio,k,n,m_boot,r_mc,alpha,seed\n";
        assert!(matches!(read_scenarios(empty.as_bytes()), Err(Error::Config(_))));
        assert!(matches!(read_scenarios("".as_bytes()), Err(Error::Config(_))));
    }
}

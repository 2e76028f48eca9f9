//! Trial records and their CSV form.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Absent values are empty fields.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::bisection::CutRule;
use crate::error::{Error, Result};
use crate::graph::MatrixKind;
use crate::harness::config::Experiment;
use crate::theory::{pbar_max, pbar_thr};

pub const RECORD_COLUMNS: [&str; 18] = [
    "experiment",
    "n",
    "p",
    "pbar",
    "q",
    "K",
    "param",
    "matrix",
    "cut",
    "trial",
    "seed",
    "agreement",
    "misclassification",
    "lambda2",
    "lambda3",
    "embedding_variance",
    "degeneracy_flag",
    "runtime_ms",
];

/// One bisection of one sampled graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: Experiment,
    pub n: usize,
    pub p: f64,
    pub pbar: Option<f64>,
    pub q: f64,
    pub k: Option<f64>,
    /// Swept parameter other than `p`, `pbar`, `q` (the clique size).
    pub param: Option<f64>,
    pub matrix: MatrixKind,
    pub cut: CutRule,
    pub trial: usize,
    pub base_seed: u64,
    pub stream: u64,
    pub agreement: f64,
    pub misclassification: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub embedding_variance: f64,
    pub degeneracy_flag: bool,
    pub runtime_ms: u64,
}

/// Shortest exact decimal form is not stable across formatters; this is.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn parse_float(s: &str) -> Result<f64> {
    match s {
        "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| Error::Schema(format!("bad float '{s}'"))),
    }
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_float(s).map(Some)
    }
}

impl ExperimentRecord {
    /// The `seed` column: `base:stream`.
    pub fn seed_field(&self) -> String {
        format!("{}:{}", self.base_seed, self.stream)
    }

    fn fields(&self) -> [String; 18] {
        [
            self.experiment.name().to_string(),
            self.n.to_string(),
            fmt_float(self.p),
            fmt_opt(self.pbar),
            fmt_float(self.q),
            fmt_opt(self.k),
            fmt_opt(self.param),
            self.matrix.short_name().to_string(),
            self.cut.name().to_string(),
            self.trial.to_string(),
            self.seed_field(),
            fmt_float(self.agreement),
            fmt_float(self.misclassification),
            fmt_float(self.lambda2),
            fmt_float(self.lambda3),
            fmt_float(self.embedding_variance),
            u8::from(self.degeneracy_flag).to_string(),
            self.runtime_ms.to_string(),
        ]
    }

    fn from_fields(f: &csv::StringRecord) -> Result<Self> {
        if f.len() != RECORD_COLUMNS.len() {
            return Err(Error::Schema(format!(
                "expected {} fields, got {}",
                RECORD_COLUMNS.len(),
                f.len()
            )));
        }
        let int = |i: usize| -> Result<u64> {
            f[i].parse()
                .map_err(|_| Error::Schema(format!("bad integer '{}' in column {}", &f[i], RECORD_COLUMNS[i])))
        };
        let (base, stream) = f[10]
            .split_once(':')
            .ok_or_else(|| Error::Schema(format!("bad seed '{}'", &f[10])))?;
        let seed_part = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::Schema(format!("bad seed '{}'", &f[10])))
        };
        Ok(ExperimentRecord {
            experiment: f[0].parse().map_err(|e: Error| Error::Schema(e.to_string()))?,
            n: int(1)? as usize,
            p: parse_float(&f[2])?,
            pbar: parse_opt(&f[3])?,
            q: parse_float(&f[4])?,
            k: parse_opt(&f[5])?,
            param: parse_opt(&f[6])?,
            matrix: f[7].parse().map_err(|e: Error| Error::Schema(e.to_string()))?,
            cut: f[8].parse().map_err(|e: Error| Error::Schema(e.to_string()))?,
            trial: int(9)? as usize,
            base_seed: seed_part(base)?,
            stream: seed_part(stream)?,
            agreement: parse_float(&f[11])?,
            misclassification: parse_float(&f[12])?,
            lambda2: parse_float(&f[13])?,
            lambda3: parse_float(&f[14])?,
            embedding_variance: parse_float(&f[15])?,
            degeneracy_flag: match &f[16] {
                "0" => false,
                "1" => true,
                other => return Err(Error::Schema(format!("bad flag '{other}'"))),
            },
            runtime_ms: int(17)?,
        })
    }
}

pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[ExperimentRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Reads records, checking the header matches the fixed schema.
pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(RECORD_COLUMNS.iter().copied()) {
        return Err(Error::Schema(format!(
            "unexpected header '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .map(|row| ExperimentRecord::from_fields(&row?))
        .collect()
}

pub fn read_records_file(path: &Path) -> Result<Vec<ExperimentRecord>> {
    read_records(File::open(path)?)
}

/// Mean scores of one (parameter point, matrix, cut) series.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub experiment: Experiment,
    pub n: usize,
    pub p: f64,
    pub pbar: Option<f64>,
    pub q: f64,
    pub k: Option<f64>,
    pub param: Option<f64>,
    pub matrix: MatrixKind,
    pub cut: CutRule,
    pub trials: usize,
    pub mean_agreement: f64,
    pub min_agreement: f64,
    pub mean_embedding_variance: f64,
    pub degenerate_trials: usize,
    /// Threshold values at this row's `(n, p, q)`, for reading the agreement
    /// columns against them without recomputation.
    pub pbar_thr: f64,
    pub pbar_max: f64,
}

pub const SUMMARY_COLUMNS: [&str; 16] = [
    "experiment",
    "n",
    "p",
    "pbar",
    "q",
    "K",
    "param",
    "matrix",
    "cut",
    "trials",
    "mean_agreement",
    "min_agreement",
    "mean_embedding_variance",
    "degenerate_trials",
    "pbar_thr",
    "pbar_max",
];

type GroupKey = (Experiment, usize, [u64; 5], MatrixKind, CutRule);

fn opt_bits(x: Option<f64>) -> u64 {
    x.map(f64::to_bits).unwrap_or(u64::MAX)
}

/// Groups records by parameter point, matrix and cut. Groups come out in the
/// order their first record appears, so sorted input gives sorted output.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<GroupKey> = Vec::new();
    let mut groups: BTreeMap<GroupKey, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        let key = (
            r.experiment,
            r.n,
            [r.p.to_bits(), opt_bits(r.pbar), r.q.to_bits(), opt_bits(r.k), opt_bits(r.param)],
            r.matrix,
            r.cut,
        );
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .iter()
        .map(|key| {
            let rs = &groups[key];
            let first = rs[0];
            let t = rs.len() as f64;
            SummaryRow {
                experiment: first.experiment,
                n: first.n,
                p: first.p,
                pbar: first.pbar,
                q: first.q,
                k: first.k,
                param: first.param,
                matrix: first.matrix,
                cut: first.cut,
                trials: rs.len(),
                mean_agreement: rs.iter().map(|r| r.agreement).sum::<f64>() / t,
                min_agreement: rs.iter().map(|r| r.agreement).fold(f64::INFINITY, f64::min),
                mean_embedding_variance: rs.iter().map(|r| r.embedding_variance).sum::<f64>() / t,
                degenerate_trials: rs.iter().filter(|r| r.degeneracy_flag).count(),
                pbar_thr: pbar_thr(first.p, first.q),
                pbar_max: pbar_max(first.n, first.p, first.q),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.experiment.name().to_string(),
            r.n.to_string(),
            fmt_float(r.p),
            fmt_opt(r.pbar),
            fmt_float(r.q),
            fmt_opt(r.k),
            fmt_opt(r.param),
            r.matrix.short_name().to_string(),
            r.cut.name().to_string(),
            r.trials.to_string(),
            fmt_float(r.mean_agreement),
            fmt_float(r.min_agreement),
            fmt_float(r.mean_embedding_variance),
            r.degenerate_trials.to_string(),
            fmt_float(r.pbar_thr),
            fmt_float(r.pbar_max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentRecord {
        ExperimentRecord {
            experiment: Experiment::CliqueSweep,
            n: 8,
            p: 0.1,
            pbar: None,
            q: 1.0 / 3.0,
            k: None,
            param: Some(3.0),
            matrix: MatrixKind::SymNormalizedLaplacian,
            cut: CutRule::Sweep,
            trial: 2,
            base_seed: 7,
            stream: u64::MAX,
            agreement: 0.875,
            misclassification: 0.125,
            lambda2: 0.1 + 0.2,
            lambda3: f64::NAN,
            embedding_variance: 1e-300,
            degeneracy_flag: true,
            runtime_ms: 0,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let r = sample();
        let text = records_to_string(std::slice::from_ref(&r)).unwrap();
        assert!(text.starts_with(&RECORD_COLUMNS.join(",")));
        let back = read_records(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 1);
        let b = &back[0];
        assert_eq!(b.lambda2.to_bits(), r.lambda2.to_bits());
        assert_eq!(b.q.to_bits(), r.q.to_bits());
        assert!(b.lambda3.is_nan());
        assert_eq!(records_to_string(&back).unwrap(), text);
    }

    #[test]
    fn wrong_header_is_a_schema_error() {
        assert!(matches!(read_records("a,b\n1,2\n".as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn summary_groups_trials() {
        let a = sample();
        let mut b = sample();
        b.trial = 3;
        b.agreement = 1.0;
        let mut c = sample();
        c.param = Some(4.0);
        let rows = summarize(&[a, b, c]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].trials, 2);
        assert!((rows[0].mean_agreement - 0.9375).abs() < 1e-15);
        assert_eq!(rows[0].min_agreement, 0.875);
    }
}

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::entropy::{EntropyError, EntropyScoreSet, PredictiveDistribution};
use crate::filter::{FilterMask, Truth};
use crate::robustness::{round_half_away, AccuracySeries, RobustnessReport};
use crate::Error;

use super::{read_to_string, write_atomic};

pub const LOG_BASE: &str = "nats";

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn reader(body: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes())
}

/// Splits an optional leading `# key=value ...` line off `text`.
fn split_metadata(text: &str) -> (Vec<(&str, &str)>, &str, u64) {
    match text.strip_prefix('#') {
        Some(rest) => {
            let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
            let pairs = line
                .split_whitespace()
                .filter_map(|tok| tok.split_once('='))
                .collect();
            (pairs, body, 1)
        }
        None => (Vec::new(), text, 0),
    }
}

fn parse_f64(field: &str) -> Result<f64, Error> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Invalid(format!("cannot parse {field:?} as a number")))
}

/// Reads a `sample_id,p_1,...,p_k` probabilities file.
pub fn read_probabilities(
    path: &Path,
    renormalize: bool,
) -> Result<Vec<(String, PredictiveDistribution)>, Error> {
    let text = read_to_string(path)?;
    let mut rdr = reader(&text);
    let header = rdr
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    if header.len() < 3 || &header[0] != "sample_id" {
        return Err(format_err(
            path,
            "header must be `sample_id,p_1,...,p_k` with k >= 2",
        ));
    }
    for (i, name) in header.iter().enumerate().skip(1) {
        if name != format!("p_{i}") {
            return Err(format_err(
                path,
                format!("header column {} is {name:?}, expected \"p_{i}\"", i + 1),
            ));
        }
    }
    let k = header.len() - 1;
    let mut seen = HashSet::new();
    let mut pool = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let index = pool.len();
        let mut row = || -> Result<(String, PredictiveDistribution), Error> {
            if record.len() != k + 1 {
                return Err(EntropyError::MixedClassCounts {
                    index,
                    expected: k,
                    found: record.len().saturating_sub(1),
                }
                .into());
            }
            let id = record[0].to_owned();
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateSampleId(id));
            }
            let raw = record
                .iter()
                .skip(1)
                .map(parse_f64)
                .collect::<Result<Vec<_>, _>>()?;
            Ok((id, PredictiveDistribution::new(&raw, renormalize)?))
        };
        pool.push(row().map_err(|e| e.at_row(path, line))?);
    }
    if pool.is_empty() {
        return Err(Error::Row {
            path: path.to_owned(),
            line: 2,
            source: Box::new(EntropyError::EmptyPool.into()),
        });
    }
    Ok(pool)
}

fn metadata_line(kind: &str, k: usize, extra: &str) -> String {
    format!("# use-curate {kind} k={k} log={LOG_BASE}{extra}\n")
}

/// Scores file, optionally with a `truth` column for synthetic pools.
pub fn scores_csv(scores: &EntropyScoreSet, truth: Option<&[Truth]>) -> String {
    let mut out = metadata_line("scores", scores.k(), "");
    out.push_str(if truth.is_some() {
        "sample_id,entropy,truth\n"
    } else {
        "sample_id,entropy\n"
    });
    for (i, (id, u)) in scores.iter().enumerate() {
        match truth {
            Some(t) => writeln!(out, "{id},{u:?},{}", t[i].as_str()),
            None => writeln!(out, "{id},{u:?}"),
        }
        .expect("writing to a String");
    }
    out
}

pub fn write_scores(
    path: &Path,
    scores: &EntropyScoreSet,
    truth: Option<&[Truth]>,
) -> Result<(), Error> {
    write_atomic(path, scores_csv(scores, truth).as_bytes())
}

/// Reads a scores file; the `truth` column is returned when present.
pub fn read_scores(path: &Path) -> Result<(EntropyScoreSet, Option<Vec<Truth>>), Error> {
    let text = read_to_string(path)?;
    let (meta, body, offset) = split_metadata(&text);
    let k = meta
        .iter()
        .find(|(key, _)| *key == "k")
        .and_then(|(_, v)| v.parse::<usize>().ok())
        .ok_or_else(|| format_err(path, "missing `# ... k=<classes>` metadata line"))?;
    if let Some((_, base)) = meta.iter().find(|(key, _)| *key == "log") {
        if *base != LOG_BASE {
            return Err(format_err(
                path,
                format!("scores use log base {base:?}, expected {LOG_BASE:?}"),
            ));
        }
    }
    let mut rdr = reader(body);
    let header = rdr
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    let has_truth = match header.iter().collect::<Vec<_>>().as_slice() {
        ["sample_id", "entropy"] => false,
        ["sample_id", "entropy", "truth"] => true,
        _ => {
            return Err(format_err(
                path,
                "header must be `sample_id,entropy[,truth]`",
            ))
        }
    };
    let width = header.len();
    let mut seen = HashSet::new();
    let (mut ids, mut scores, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line()) + offset;
        let mut row = || -> Result<(), Error> {
            if record.len() != width {
                return Err(Error::Invalid(format!(
                    "expected {width} fields, found {}",
                    record.len()
                )));
            }
            let id = record[0].to_owned();
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateSampleId(id));
            }
            ids.push(id);
            scores.push(parse_f64(&record[1])?);
            if has_truth {
                truth.push(record[2].parse::<Truth>().map_err(Error::Invalid)?);
            }
            Ok(())
        };
        row().map_err(|e| e.at_row(path, line))?;
    }
    let set = EntropyScoreSet::new(ids, scores, k).map_err(|e| match e {
        EntropyError::ScoreOutOfRange { index, .. } => {
            Error::from(e).at_row(path, index as u64 + 2 + offset)
        }
        other => other.into(),
    })?;
    Ok((set, has_truth.then_some(truth)))
}

pub fn mask_csv(mask: &FilterMask, k: usize) -> String {
    let mut out = metadata_line("mask", k, &format!(" u_star={:?}", mask.u_star()));
    out.push_str("sample_id,entropy,decision\n");
    for ((id, u), d) in mask
        .sample_ids()
        .iter()
        .zip(mask.scores())
        .zip(mask.decisions())
    {
        writeln!(out, "{id},{u:?},{}", d.as_str()).expect("writing to a String");
    }
    out
}

pub fn write_mask(path: &Path, mask: &FilterMask, k: usize) -> Result<(), Error> {
    write_atomic(path, mask_csv(mask, k).as_bytes())
}

type Group = (String, Vec<(f64, f64)>, u64);

/// Reads `series,r,accuracy` rows, grouping by series name in order of first
/// appearance.
pub fn read_series(path: &Path) -> Result<Vec<(String, AccuracySeries)>, Error> {
    let text = read_to_string(path)?;
    let mut rdr = reader(&text);
    let header = rdr
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["series", "r", "accuracy"] {
        return Err(format_err(path, "header must be `series,r,accuracy`"));
    }
    // name, points, line of first appearance
    let mut groups: Vec<Group> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let parsed = (|| -> Result<(f64, f64), Error> {
            if record.len() != 3 {
                return Err(Error::Invalid(format!(
                    "expected 3 fields, found {}",
                    record.len()
                )));
            }
            Ok((parse_f64(&record[1])?, parse_f64(&record[2])?))
        })()
        .map_err(|e| e.at_row(path, line))?;
        match groups.iter_mut().find(|(name, _, _)| name == &record[0]) {
            Some((_, points, _)) => points.push(parsed),
            None => groups.push((record[0].to_owned(), vec![parsed], line)),
        }
    }
    if groups.is_empty() {
        return Err(format_err(path, "no series rows"));
    }
    groups
        .into_iter()
        .map(|(name, points, line)| {
            AccuracySeries::new(points)
                .map(|s| (name.clone(), s))
                .map_err(|e| Error::from(e).at_row(path, line))
        })
        .collect()
}

fn csv_field(name: &str) -> String {
    if name.contains([',', '"', '\n']) {
        format!("\"{}\"", name.replace('"', "\"\""))
    } else {
        name.to_owned()
    }
}

/// One row per series with the six indicators at `decimals` places.
pub fn metrics_csv(rows: &[(String, RobustnessReport)], decimals: usize) -> String {
    let mut out = format!("series,{}\n", RobustnessReport::COLUMN_NAMES.join(","));
    for (name, rep) in rows {
        out.push_str(&csv_field(name));
        for v in rep.columns() {
            let v = round_half_away(v, decimals as i32);
            write!(out, ",{v:.decimals$}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

//! CSV tables with `#` comment preambles.
//!
//! Floats are written in shortest round-trip form, so reading a table back
//! recovers every value bit for bit.

use std::io::{Read, Write};

use crate::boxdim::{CountSeries, DimEstimate};
use crate::error::{Error, Result};

/// Formats a float so that parsing it returns the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes `# line` for each comment, then a header row and the records.
pub fn write_table<W: Write>(
    out: W,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = out;
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table, skipping `#` lines, and checks the header.
pub fn read_table<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let got = r.headers()?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header `{}`, found `{}`",
            header.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records().map(|rec| rec.map_err(Error::from)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec
        .get(i)
        .ok_or_else(|| Error::Parse(format!("missing column {i}")))?;
    s.parse()
        .map_err(|_| Error::Parse(format!("bad value `{s}`")))
}

const SERIES_HEADER: [&str; 2] = ["n", "count"];
const ESTIMATE_HEADER: [&str; 4] = ["slope", "stderr", "n_lo", "n_hi"];

pub fn write_count_series<W: Write>(
    out: W,
    comments: &[String],
    series: &CountSeries,
) -> Result<()> {
    let rows = series
        .entries
        .iter()
        .map(|(n, c)| vec![n.to_string(), c.to_string()]);
    write_table(out, comments, &SERIES_HEADER, rows)
}

pub fn read_count_series<R: Read>(input: R) -> Result<CountSeries> {
    let entries = read_table(input, &SERIES_HEADER)?
        .iter()
        .map(|rec| Ok((field(rec, 0)?, field(rec, 1)?)))
        .collect::<Result<_>>()?;
    Ok(CountSeries::new(entries))
}

/// Writes the slope, its standard error and the window; the series is not stored.
pub fn write_dim_estimate<W: Write>(out: W, comments: &[String], est: &DimEstimate) -> Result<()> {
    let row = vec![
        fmt_f64(est.slope),
        fmt_f64(est.stderr),
        est.window.0.to_string(),
        est.window.1.to_string(),
    ];
    write_table(out, comments, &ESTIMATE_HEADER, [row])
}

/// Reads one estimate row; the returned series is empty.
pub fn read_dim_estimate<R: Read>(input: R) -> Result<DimEstimate> {
    let recs = read_table(input, &ESTIMATE_HEADER)?;
    let rec = match recs.as_slice() {
        [rec] => rec,
        _ => {
            return Err(Error::Parse(format!(
                "expected one estimate row, found {}",
                recs.len()
            )))
        }
    };
    Ok(DimEstimate {
        slope: field(rec, 0)?,
        stderr: field(rec, 1)?,
        window: (field(rec, 2)?, field(rec, 3)?),
        series: CountSeries::default(),
    })
}

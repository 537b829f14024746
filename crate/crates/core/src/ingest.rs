//! Bernoulli instances from tabular data.
//!
//! The interchange format is a UTF-8 CSV with header `arm_id,mean`. Means are
//! written with Rust's shortest round-trip float formatting, so a table
//! read from a file it wrote serializes back to identical bytes.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const ARM_MEANS_HEADER: [&str; 2] = ["arm_id", "mean"];

#[derive(Debug, Clone, PartialEq)]
pub struct ArmMean {
    pub arm_id: String,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArmMeansTable {
    rows: Vec<ArmMean>,
}

impl ArmMeansTable {
    pub fn new(rows: Vec<ArmMean>) -> Result<Self> {
        let mut seen = HashSet::new();
        for row in &rows {
            if !(0.0..=1.0).contains(&row.mean) {
                return Err(Error::domain(format!(
                    "arm {}: mean {} outside [0, 1]",
                    row.arm_id, row.mean
                )));
            }
            if !seen.insert(row.arm_id.as_str()) {
                return Err(Error::domain(format!("duplicate arm_id {}", row.arm_id)));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ArmMean] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io {
            path: PathBuf::from("<csv>"),
            source: std::io::Error::other(e),
        };
        w.write_record(ARM_MEANS_HEADER).map_err(io)?;
        for row in &self.rows {
            w.write_record([row.arm_id.as_str(), &row.mean.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: PathBuf::from("<csv>"),
            source: e,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Reads every record of a headered CSV, checking the header exactly.
/// Returns `(line, fields)` pairs with 1-based line numbers.
fn read_records<R: Read>(
    reader: R,
    path: &Path,
    header: &[&str],
) -> Result<Vec<(u64, Vec<String>)>> {
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let got = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(parse_err(
            1,
            format!("expected header {:?}, found {:?}", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        out.push((line, rec.iter().map(|f| f.trim().to_string()).collect()));
    }
    Ok(out)
}

fn parse_number(path: &Path, line: u64, field: &str, name: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{name} {field:?} is not a finite number"),
        })
}

pub fn read_arm_means<R: Read>(reader: R, path: &Path) -> Result<ArmMeansTable> {
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (line, fields) in read_records(reader, path, &ARM_MEANS_HEADER)? {
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let arm_id = fields[0].clone();
        if arm_id.is_empty() {
            return Err(err("empty arm_id".into()));
        }
        let mean = parse_number(path, line, &fields[1], "mean")?;
        if !(0.0..=1.0).contains(&mean) {
            return Err(err(format!("mean {mean} for arm {arm_id} outside [0, 1]")));
        }
        if !seen.insert(arm_id.clone()) {
            return Err(err(format!("duplicate arm_id {arm_id}")));
        }
        rows.push(ArmMean { arm_id, mean });
    }
    Ok(ArmMeansTable { rows })
}

pub fn load_arm_means_csv(path: &Path) -> Result<ArmMeansTable> {
    read_arm_means(open(path)?, path)
}

/// `purchase_rate * price / 200` for a coupon with purchase rate in
/// `[0, 0.3]` and price in `(0, 200]`.
pub fn coupon_transform(purchase_rate: f64, price: f64) -> Result<f64> {
    if !(0.0..=0.3).contains(&purchase_rate) {
        return Err(Error::domain(format!(
            "purchase rate {purchase_rate} outside [0, 0.3]"
        )));
    }
    if !(price > 0.0 && price <= 200.0) {
        return Err(Error::domain(format!("price {price} outside (0, 200]")));
    }
    Ok(purchase_rate * (price / 200.0))
}

/// `certification_rate * participation` with both factors in `[0, 1]`.
pub fn edx_transform(cert_rate: f64, participation: f64) -> Result<f64> {
    for (name, x) in [("certification rate", cert_rate), ("participation", participation)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("{name} {x} outside [0, 1]")));
        }
    }
    Ok(cert_rate * participation)
}

/// Min-max normalization onto `[0, 1]`; a constant input maps to all ones.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; values.len()]
    }
}

/// Coupon data with header `arm_id,purchase_rate,price`.
pub fn load_coupon_csv(path: &Path) -> Result<ArmMeansTable> {
    let mut rows = Vec::new();
    for (line, f) in read_records(open(path)?, path, &["arm_id", "purchase_rate", "price"])? {
        let rate = parse_number(path, line, &f[1], "purchase_rate")?;
        let price = parse_number(path, line, &f[2], "price")?;
        let mean = coupon_transform(rate, price).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: e.to_string(),
        })?;
        rows.push(ArmMean {
            arm_id: f[0].clone(),
            mean,
        });
    }
    ArmMeansTable::new(rows)
}

/// Course data with header `arm_id,certified,participants`. The
/// certification rate is `certified / participants`; participation is the
/// min-max normalized participant count.
pub fn load_edx_csv(path: &Path) -> Result<ArmMeansTable> {
    let records = read_records(open(path)?, path, &["arm_id", "certified", "participants"])?;
    let mut ids = Vec::new();
    let mut rates = Vec::new();
    let mut counts = Vec::new();
    for (line, f) in records {
        let certified = parse_number(path, line, &f[1], "certified")?;
        let participants = parse_number(path, line, &f[2], "participants")?;
        if !(participants > 0.0) || certified < 0.0 || certified > participants {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("need 0 <= certified <= participants and participants > 0, got {certified}/{participants}"),
            });
        }
        ids.push(f[0].clone());
        rates.push(certified / participants);
        counts.push(participants);
    }
    let participation = min_max_normalize(&counts);
    let rows = ids
        .into_iter()
        .zip(rates.iter().zip(&participation))
        .map(|(arm_id, (&r, &p))| edx_transform(r, p).map(|mean| ArmMean { arm_id, mean }))
        .collect::<Result<Vec<_>>>()?;
    ArmMeansTable::new(rows)
}

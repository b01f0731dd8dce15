//! CSV datasets: a header row, an optional integer `class` column with
//! labels `1..=K`, and numeric feature columns in file order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::population::LabeledSample;

pub const CLASS_COLUMN: &str = "class";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetCsv {
    pub features: Vec<String>,
    pub x: Mat,
    /// Present when the file has a `class` column.
    pub labels: Option<Vec<usize>>,
}

impl DatasetCsv {
    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(f)
    }

    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let class_col = header.iter().position(|h| h == CLASS_COLUMN);
        if header.iter().filter(|h| *h == CLASS_COLUMN).count() > 1 {
            return Err(Error::Parse("duplicate class column".into()));
        }
        let features: Vec<String> = header.iter().enumerate().filter(|&(c, _)| Some(c) != class_col).map(|(_, h)| h.clone()).collect();
        if features.is_empty() {
            return Err(Error::Parse("no feature columns".into()));
        }
        let mut data = vec![];
        let mut labels = vec![];
        let mut rows = 0;
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            for (c, field) in rec.iter().enumerate() {
                let field = field.trim();
                if field.is_empty() {
                    return Err(Error::Parse(format!("row {}: missing value in column {:?}", line + 1, header[c])));
                }
                if Some(c) == class_col {
                    let l: usize =
                        field.parse().map_err(|_| Error::Parse(format!("row {}: class label {field:?} is not a positive integer", line + 1)))?;
                    labels.push(l);
                } else {
                    let v: f64 = field
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| Error::Parse(format!("row {}: {field:?} is not a finite number", line + 1)))?;
                    data.push(v);
                }
            }
            rows += 1;
        }
        let x = Mat::from_vec(rows, features.len(), data)?;
        Ok(DatasetCsv { features, x, labels: class_col.map(|_| labels) })
    }

    /// Labelled sample; labels must be exactly `{1, …, K}` with `K ≥ 2`.
    pub fn to_sample(&self) -> Result<LabeledSample> {
        let labels = self.labels.clone().ok_or_else(|| Error::Parse("missing class column".into()))?;
        let k = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; k + 1];
        for &l in &labels {
            seen[l] = true;
        }
        if seen[0] {
            return Err(Error::Parse("class labels must start at 1".into()));
        }
        if let Some(missing) = (1..=k).find(|&c| !seen[c]) {
            return Err(Error::Parse(format!("class labels are not contiguous: {missing} is absent")));
        }
        if k < 2 {
            return Err(Error::InvalidParameter(format!("need K ≥ 2, got K = {k}")));
        }
        LabeledSample::new(self.x.clone(), labels, k)
    }

    pub fn from_sample(sample: &LabeledSample) -> Self {
        DatasetCsv { features: (1..=sample.p()).map(|c| format!("x{c}")).collect(), x: sample.x.clone(), labels: Some(sample.labels.clone()) }
    }

    /// Writes the `class` column first, then the features.
    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = vec![];
        if self.labels.is_some() {
            header.push(CLASS_COLUMN);
        }
        header.extend(self.features.iter().map(String::as_str));
        w.write_record(&header)?;
        for r in 0..self.x.rows() {
            let mut rec: Vec<String> = vec![];
            if let Some(l) = &self.labels {
                rec.push(l[r].to_string());
            }
            rec.extend(self.x.row(r).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }
}

/// One `predicted` column.
pub fn write_predictions<W: Write>(out: W, predicted: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["predicted"])?;
    for p in predicted {
        w.write_record([p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_column_anywhere() {
        let d = DatasetCsv::parse("a,class,b\n1.5,2,-3\n0,1,1e-3\n".as_bytes()).unwrap();
        assert_eq!(d.features, vec!["a", "b"]);
        assert_eq!(d.labels, Some(vec![2, 1]));
        assert_eq!(d.x.row(1), &[0.0, 1e-3]);
        assert_eq!(d.to_sample().unwrap().k, 2);
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["class,a\n1,\n", "class,a\n1,2\n2\n", "class,a\n1.5,2\n", "class,a\n1,abc\n", "class,a\n1,NaN\n"] {
            assert!(DatasetCsv::parse(text.as_bytes()).is_err(), "{text:?}");
        }
        let gap = DatasetCsv::parse("class,a\n1,0\n3,1\n".as_bytes()).unwrap();
        assert!(gap.to_sample().unwrap_err().to_string().contains("contiguous"));
        let zero = DatasetCsv::parse("class,a\n0,0\n1,1\n".as_bytes()).unwrap();
        assert!(zero.to_sample().is_err());
    }

    #[test]
    fn exact_round_trip() {
        let x = Mat::from_rows(&[vec![0.1 + 0.2, -1e-300], vec![std::f64::consts::PI, 12345.678901234567]]).unwrap();
        let d = DatasetCsv { features: vec!["u".into(), "v".into()], x, labels: Some(vec![1, 2]) };
        let mut buf = vec![];
        d.write_to(&mut buf).unwrap();
        assert_eq!(DatasetCsv::parse(buf.as_slice()).unwrap(), d);
    }
}

//! Matrix CSV persistence.
//!
//! Schema: the header row lists every feature name, then the literal
//! columns `label` and `row_id`; each data row carries the feature values,
//! the 0/1 label, and the row id. Binary matrices serialize cells as `0`
//! and `1`; real-valued matrices use scientific notation with 17
//! significant digits, which round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::FeatureMatrix;

pub fn save_csv(m: &FeatureMatrix, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = m.feature_names().iter().map(String::as_str).collect();
    header.push("label");
    header.push("row_id");
    w.write_record(&header)?;

    let binary = m.is_binary();
    let mut record: Vec<String> = Vec::with_capacity(m.n_cols() + 2);
    for i in 0..m.n_rows() {
        record.clear();
        for &v in m.row(i) {
            if binary {
                record.push(if v == 1.0 { "1".into() } else { "0".into() });
            } else {
                record.push(format!("{v:.17e}"));
            }
        }
        record.push(m.labels()[i].to_string());
        record.push(m.row_ids()[i].clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_csv(source: impl Read) -> Result<FeatureMatrix> {
    let mut r = csv::Reader::from_reader(source);
    let header = r
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable CSV header: {e}")))?
        .clone();
    if header.len() < 3 {
        return Err(Error::Schema(
            "matrix CSV needs at least one feature column plus label,row_id".into(),
        ));
    }
    let d = header.len() - 2;
    if &header[d] != "label" || &header[d + 1] != "row_id" {
        return Err(Error::Schema(format!(
            "last two header columns must be label,row_id; found {},{}",
            &header[d],
            &header[d + 1]
        )));
    }
    let feature_names: Vec<String> = header.iter().take(d).map(str::to_string).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut row_ids = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::Schema(format!("row {}: {e}", line + 2)))?;
        if record.len() != d + 2 {
            return Err(Error::Schema(format!(
                "row {}: {} fields, expected {}",
                line + 2,
                record.len(),
                d + 2
            )));
        }
        for j in 0..d {
            let v: f64 = record[j].parse().map_err(|_| {
                Error::Schema(format!("row {}: bad value {:?}", line + 2, &record[j]))
            })?;
            values.push(v);
        }
        let label: u8 = record[d]
            .parse()
            .map_err(|_| Error::Schema(format!("row {}: bad label {:?}", line + 2, &record[d])))?;
        labels.push(label);
        row_ids.push(record[d + 1].to_string());
    }
    FeatureMatrix::new(values, labels, feature_names, row_ids)
        .map_err(|e| Error::Schema(e.to_string()))
}

pub fn save_csv_path(m: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    save_csv(m, BufWriter::new(File::create(path)?))
}

pub fn load_csv_path(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    load_csv(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_2x3() -> FeatureMatrix {
        FeatureMatrix::new(
            vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            vec![1, 0],
            vec!["a".into(), "b".into(), "c".into()],
            vec!["m1".into(), "b1".into()],
        )
        .unwrap()
    }

    #[test]
    fn binary_matrix_round_trips_exactly() {
        let m = binary_2x3();
        let mut buf = Vec::new();
        save_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,b,c,label,row_id\n"));
        assert!(text.contains("1,0,1,1,m1"));
        let back = load_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn real_valued_matrix_round_trips_exactly() {
        let m = FeatureMatrix::new(
            vec![0.1 + 0.2, -1.5e-13, std::f64::consts::PI, 4.0],
            vec![0, 1],
            vec!["pc_00".into(), "pc_01".into()],
            vec!["r0".into(), "r1".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        save_csv(&m, &mut buf).unwrap();
        let back = load_csv(buf.as_slice()).unwrap();
        // 17 significant digits makes the round trip bit-exact, which is
        // stronger than the 1e-12 the format promises.
        assert_eq!(back.values(), m.values());
    }

    #[test]
    fn missing_label_column_is_a_schema_error() {
        let text = "a,b,c,row_id\n1,0,1,m1\n";
        match load_csv(text.as_bytes()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("label")),
            other => panic!("expected Schema error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_cells_are_schema_errors() {
        let bad_value = "a,label,row_id\nnope,0,r0\n";
        assert!(matches!(
            load_csv(bad_value.as_bytes()),
            Err(Error::Schema(_))
        ));
        let bad_label = "a,label,row_id\n1,7,r0\n";
        assert!(matches!(
            load_csv(bad_label.as_bytes()),
            Err(Error::Schema(_))
        ));
        let empty = "a,label,row_id\n";
        assert!(matches!(load_csv(empty.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn file_helpers_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = binary_2x3();
        save_csv_path(&m, &path).unwrap();
        assert_eq!(load_csv_path(&path).unwrap(), m);
    }
}

//! JSON-lines storage for experiment records.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::bench::ExperimentRecord;
use crate::Error;

pub fn to_line(r: &ExperimentRecord) -> String {
    serde_json::to_string(r).expect("records serialize")
}

pub fn write_records<W: Write>(mut w: W, records: &[ExperimentRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}", to_line(r))?;
    }
    w.flush()
}

/// Blank lines are skipped; anything else must be a complete record.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<ExperimentRecord>, Error> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| Error::Record(format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn save(path: &Path, records: &[ExperimentRecord]) -> Result<(), Error> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_records(std::io::BufWriter::new(file), records)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<Vec<ExperimentRecord>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_records(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::ExperimentKind;

    fn sample() -> Vec<ExperimentRecord> {
        vec![
            ExperimentRecord {
                backend: "ionq".into(),
                experiment: ExperimentKind::SwapChain,
                parameter: 3,
                shots: 8192,
                successes: 6001,
                seed: u64::MAX,
                ci95: 0.009581234567890123,
            },
            ExperimentRecord {
                backend: "rigetti-aspen8".into(),
                experiment: ExperimentKind::Bv,
                parameter: 0,
                shots: 0,
                successes: 0,
                seed: 0,
                ci95: 0.0,
            },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        let mut buf = Vec::new();
        write_records(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with("{\"backend\":\"ionq\",\"experiment\":\"swap-chain\""));
        assert_eq!(read_records(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_records(&b"{\"backend\":1}\n"[..]).is_err());
        assert!(read_records(&b"not json\n"[..]).is_err());
        assert!(read_records(&b"\n\n"[..]).unwrap().is_empty());
    }
}

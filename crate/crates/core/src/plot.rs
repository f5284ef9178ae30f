//! Columnar CSV for reliability diagrams and regret curves.

use std::io::Write;

use crate::error::{Error, Result};
use crate::joint::EmpiricalJoint;
use crate::online::Transcript;
use crate::report::format_float;

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `prediction,empirical_mean,mass`, one row per distinct prediction.
pub fn write_reliability<W: Write>(joint: &EmpiricalJoint, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["prediction", "empirical_mean", "mass"]).map_err(csv_error)?;
    for ls in joint.level_sets() {
        w.write_record([format_float(ls.v), format_float(ls.label_mean()), format_float(ls.mass)])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,p,y`, one row per round.
pub fn write_transcript<W: Write>(transcript: &Transcript, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "p", "y"]).map_err(csv_error)?;
    for (t, r) in transcript.rounds().iter().enumerate() {
        w.write_record([(t + 1).to_string(), format_float(r.p), r.y.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,<series...>`; every series must be sampled at the same rounds.
pub fn write_curves<W: Write>(series: &[(String, Vec<(usize, f64)>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(series.iter().map(|s| s.0.clone()));
    w.write_record(&header).map_err(csv_error)?;
    let rows = series.first().map_or(0, |s| s.1.len());
    if series.iter().any(|s| s.1.len() != rows) {
        return Err(Error::InvalidParameter("curves sampled at different rounds".into()));
    }
    for i in 0..rows {
        let t = series[0].1[i].0;
        let mut record = vec![t.to_string()];
        for s in series {
            if s.1[i].0 != t {
                return Err(Error::InvalidParameter("curves sampled at different rounds".into()));
            }
            record.push(format_float(s.1[i].1));
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::Atom;
    use crate::online::Round;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn two_point_reliability() {
        let j = EmpiricalJoint::from_atoms(vec![Atom::new(0.4, 0, 0.5), Atom::new(0.6, 1, 0.5)]).unwrap();
        let out = text(|b| write_reliability(&j, b));
        assert_eq!(out, "prediction,empirical_mean,mass\n0.40000000000000002,0,0.5\n0.59999999999999998,1,0.5\n");
    }

    #[test]
    fn transcript_rows() {
        let t = Transcript::new((0..10).map(|i| Round { p: 0.5, y: (i % 2) as u8 }).collect()).unwrap();
        let out = text(|b| write_transcript(&t, b));
        assert_eq!(out.lines().count(), 11);
        assert!(out.starts_with("t,p,y\n1,0.5,0\n"));
    }

    #[test]
    fn curves_columns() {
        let series = vec![
            ("ece".to_string(), vec![(5, 0.5), (10, 1.0)]),
            ("cdl".to_string(), vec![(5, 0.25), (10, 0.75)]),
        ];
        let out = text(|b| write_curves(&series, b));
        assert_eq!(out, "t,ece,cdl\n5,0.5,0.25\n10,1,0.75\n");
        let ragged = vec![("a".to_string(), vec![(1, 0.0)]), ("b".to_string(), vec![])];
        assert!(write_curves(&ragged, Vec::new()).is_err());
    }
}

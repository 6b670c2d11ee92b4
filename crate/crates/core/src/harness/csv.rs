//! CSV output, one row per (SNR point, iteration).

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use super::BerRecord;
use crate::error::Result;

pub const CSV_HEADER: &str = "snr_db,mode,beta_true,beta_assumed,p0,iter,bits,errors,ber,seconds";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes the rows of `records`, preceded by the header if `header` is set.
/// With `timing` off the `seconds` column is zero, so output depends only on
/// the scenario.
pub fn write_csv<W: Write>(records: &[BerRecord], header: bool, timing: bool, mut out: W) -> Result<()> {
    if header {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for r in records {
        let seconds = if timing { r.wall_time.as_secs_f64() } else { 0.0 };
        for (i, (errors, ber)) in r.per_iteration_errors.iter().zip(&r.per_iteration_ber).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:e},{:.3}",
                r.snr_db,
                r.mode,
                opt(r.beta_true),
                r.beta_assumed,
                opt(r.p0),
                i + 1,
                r.bits_simulated,
                errors,
                ber,
                seconds
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Appends rows to `path`, writing the header only when the file is new or empty.
pub fn append_csv(path: impl AsRef<Path>, records: &[BerRecord], timing: bool) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    let mut buf = Vec::new();
    write_csv(records, empty, timing, &mut buf)?;
    file.write_all(&buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Mode;
    use std::time::Duration;

    fn record() -> BerRecord {
        BerRecord {
            snr_db: 4.5,
            mode: Mode::Concatenated,
            beta_true: Some(-3.0),
            beta_assumed: -4.5,
            p0: Some(0.5),
            trials: 2,
            bits_simulated: 8192,
            bit_errors: 4,
            ber: 4.0 / 8192.0,
            per_iteration_errors: vec![10, 4],
            per_iteration_ber: vec![10.0 / 8192.0, 4.0 / 8192.0],
            wall_time: Duration::from_millis(1500),
        }
    }

    #[test]
    fn rows_and_header() {
        let mut buf = Vec::new();
        write_csv(&[record()], true, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "snr_db,mode,beta_true,beta_assumed,p0,iter,bits,errors,ber,seconds\n\
             4.5,concatenated,-3,-4.5,0.5,1,8192,10,1.220703125e-3,0.000\n\
             4.5,concatenated,-3,-4.5,0.5,2,8192,4,4.8828125e-4,0.000\n"
        );
        let mut buf = Vec::new();
        write_csv(&[record()], false, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().ends_with(",1.500"));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn append_writes_header_once() {
        let dir = std::env::temp_dir().join(format!("mrfisi-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        append_csv(&path, &[record()], false).unwrap();
        append_csv(&path, &[record()], false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.matches("snr_db").count(), 1);
        assert!(!text.contains('\r'));
        std::fs::remove_dir_all(dir).unwrap();
    }
}

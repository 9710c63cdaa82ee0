//! Plot-ready CSV writers. All numbers are written in shortest round-trip
//! form, so output is byte-stable for identical inputs.

use std::f64::consts::PI;
use std::io::Write;

use crate::numerics::CMatrix;
use crate::screening::MoleculeRecord;

pub type ExportResult = Result<(), csv::Error>;

/// Shortest round-trip decimal, switching to exponent form outside
/// [1e-4, 1e6).
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes a table with a header row and one row of numbers per entry.
pub fn write_table<W: Write, I>(out: W, header: &[&str], rows: I) -> ExportResult
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_num(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column spectrum. The frequency axis is converted from rad/s to Hz and
/// the density rescaled so the exported curve integrates to the same total
/// over Hz as the input did over rad/s.
pub fn write_spectrum<W: Write>(out: W, angular: &[f64], density: &[f64]) -> ExportResult {
    write_table(
        out,
        &["frequency_Hz", "normalized_intensity"],
        angular
            .iter()
            .zip(density)
            .map(|(&w, &d)| vec![w / (2.0 * PI), d * 2.0 * PI]),
    )
}

/// Row-major complex matrix, each entry as a `re,im` column pair.
pub fn write_complex_matrix<W: Write>(out: W, m: &CMatrix) -> ExportResult {
    let header: Vec<String> = (0..m.ncols())
        .flat_map(|j| [format!("c{j}_re"), format!("c{j}_im")])
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        out,
        &header,
        (0..m.nrows()).map(|i| (0..m.ncols()).flat_map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()),
    )
}

/// Trajectory table: `time_s` followed by one column per observable.
pub fn write_trajectory<W: Write>(out: W, times: &[f64], names: &[&str], values: &[Vec<f64>]) -> ExportResult {
    let mut header = vec!["time_s"];
    header.extend_from_slice(names);
    write_table(
        out,
        &header,
        times.iter().zip(values).map(|(&t, v)| {
            let mut row = vec![t];
            row.extend_from_slice(v);
            row
        }),
    )
}

pub fn write_molecules<W: Write>(out: W, records: &[MoleculeRecord]) -> ExportResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(crate::screening::HEADER)?;
    for r in records {
        w.write_record([
            r.name.clone(),
            r.carbon_count.to_string(),
            fmt_num(r.e_s1),
            fmt_num(r.e_t1),
            r.centrosymmetric.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Complex64;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> ExportResult) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, -2.5, 1e-12, 6.02214076e23, 0.1 + 0.2, 123456.789] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(2.0e14), "2e14");
    }

    #[test]
    fn spectrum_header_and_units() {
        let s = text(|b| write_spectrum(b, &[2.0 * PI * 1e12], &[1.0 / (2.0 * PI)]));
        assert_eq!(s, "frequency_Hz,normalized_intensity\n1e12,1\n");
    }

    #[test]
    fn matrix_layout() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.5, -2.0);
        m[(1, 0)] = Complex64::new(3.0, 0.0);
        let s = text(|b| write_complex_matrix(b, &m));
        assert_eq!(s, "c0_re,c0_im,c1_re,c1_im\n0,0,1.5,-2\n3,0,0,0\n");
    }

    #[test]
    fn trajectory_layout() {
        let s = text(|b| write_trajectory(b, &[0.0, 1e-9], &["p_e"], &[vec![1.0], vec![0.5]]));
        assert_eq!(s, "time_s,p_e\n0,1\n1e-9,0.5\n");
    }
}

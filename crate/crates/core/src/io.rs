//! CSV and JSON artifacts.
//!
//! Floats are written with nine significant digits in exponent form so that
//! reruns produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{AngularMap, Spectrum, SpectrumMeta};

pub const MAP_CORNER_LABEL: &str = "wavelength_um\\theta_deg";

/// Nine significant digits, exponent notation; `-0` is written as `0`.
pub fn format_float(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Buffered file writer; parent directories are created as needed.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `wavelength_um` followed by one column per `(name, values)` pair.
pub fn write_columns<W: Write>(writer: W, axis: &[f64], columns: &[(&str, &[f64])]) -> Result<()> {
    write_table(writer, "wavelength_um", axis, columns)
}

/// Like [`write_columns`] with a caller-chosen axis header.
pub fn write_table<W: Write>(writer: W, axis_name: &str, axis: &[f64], columns: &[(&str, &[f64])]) -> Result<()> {
    if columns.iter().any(|(_, c)| c.len() != axis.len()) {
        return Err(Error::invalid("column lengths differ from the axis"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![axis_name];
    header.extend(columns.iter().map(|(n, _)| *n));
    w.write_record(&header)?;
    for (i, x) in axis.iter().enumerate() {
        let mut record = vec![format_float(*x)];
        record.extend(columns.iter().map(|(_, c)| format_float(c[i])));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// `wavelength_um,intensity` CSV of one spectrum.
pub fn write_spectrum_csv(path: &Path, s: &Spectrum) -> Result<()> {
    write_columns(create(path)?, s.axis(), &[("intensity", s.intensity())])
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("line {line}: '{field}' is not a number")))
}

/// Reads a spectrum from CSV: first column wavelength (μm), intensity from the
/// named column or the second one. An optional header row is detected by a
/// non-numeric first field. Any monotone order is accepted and sorted ascending.
pub fn read_spectrum_csv<R: Read>(reader: R, column: Option<&str>) -> Result<Spectrum> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = r.records().enumerate().peekable();
    let mut value_index = 1;
    if let Some((_, Ok(first))) = records.peek() {
        if first.get(0).map(|f| f.trim().parse::<f64>().is_err()).unwrap_or(false) {
            if let Some(name) = column {
                value_index = first
                    .iter()
                    .position(|h| h.trim() == name)
                    .ok_or_else(|| Error::invalid(format!("column '{name}' not found")))?;
            }
            records.next();
        } else if column.is_some() {
            return Err(Error::invalid("column selection needs a header row"));
        }
    }
    let mut pairs = Vec::new();
    for (line, rec) in records {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let x = parse_float(rec.get(0).unwrap_or(""), line + 1)?;
        let y = parse_float(
            rec.get(value_index)
                .ok_or_else(|| Error::invalid(format!("line {}: missing intensity column", line + 1)))?,
            line + 1,
        )?;
        pairs.push((x, y));
    }
    if pairs.len() >= 2 && pairs[0].0 > pairs[1].0 {
        pairs.reverse();
    }
    let (axis, intensity): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Spectrum::new(axis, intensity, SpectrumMeta::signal(0.0, f64::NAN, f64::NAN))
}

pub fn read_spectrum_file(path: &Path, column: Option<&str>) -> Result<Spectrum> {
    read_spectrum_csv(File::open(path)?, column)
}

/// Map CSV: first row holds the angles, first column the wavelengths.
pub fn write_map_csv<W: Write>(writer: W, map: &AngularMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![MAP_CORNER_LABEL.to_string()];
    header.extend(map.theta_axis().iter().map(|t| format_float(*t)));
    w.write_record(&header)?;
    for (i, l) in map.lambda_axis().iter().enumerate() {
        let mut record = Vec::with_capacity(map.theta_axis().len() + 1);
        record.push(format_float(*l));
        record.extend(map.row(i).iter().map(|v| format_float(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_map_file(path: &Path, map: &AngularMap) -> Result<()> {
    write_map_csv(create(path)?, map)
}

/// Parsed map body: (wavelengths, angles, row-major intensities).
pub fn read_map_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = r.records();
    let header = records.next().ok_or_else(|| Error::invalid("empty map file"))??;
    let thetas = header
        .iter()
        .skip(1)
        .map(|f| parse_float(f, 1))
        .collect::<Result<Vec<f64>>>()?;
    let mut lambdas = Vec::new();
    let mut body = Vec::new();
    for (line, rec) in records.enumerate() {
        let rec = rec?;
        lambdas.push(parse_float(&rec[0], line + 2)?);
        for f in rec.iter().skip(1) {
            body.push(parse_float(f, line + 2)?);
        }
    }
    if body.len() != lambdas.len() * thetas.len() {
        return Err(Error::invalid("map rows do not match the header"));
    }
    Ok((lambdas, thetas, body))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_mantissa() {
        assert_eq!(format_float(0.647), "6.47000000e-1");
        assert_eq!(format_float(-0.0), "0.00000000e0");
        assert_eq!(format_float(63240.96), "6.32409600e4");
        assert_eq!(format_float(1.0 / 3.0), "3.33333333e-1");
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let s = Spectrum::new(vec![0.6, 0.61, 0.62], vec![0.1, 0.5, 0.25], SpectrumMeta::signal(0.0, 0.532, 22.0)).unwrap();
        let mut buf = Vec::new();
        write_columns(&mut buf, s.axis(), &[("intensity", s.intensity()), ("intensity_convolved", s.intensity())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("wavelength_um,intensity,intensity_convolved\n6.00000000e-1,1.00000000e-1,"));
        let back = read_spectrum_csv(buf.as_slice(), Some("intensity_convolved")).unwrap();
        assert_eq!(back.axis(), s.axis());
        assert_eq!(back.intensity(), s.intensity());
    }

    #[test]
    fn reads_headerless_descending_csv() {
        let data = "0.62,3\n0.61,2\n0.60,1\n";
        let s = read_spectrum_csv(data.as_bytes(), None).unwrap();
        assert_eq!(s.axis(), &[0.60, 0.61, 0.62]);
        assert_eq!(s.intensity(), &[1.0, 2.0, 3.0]);
        assert!(read_spectrum_csv("0.6,x\n".as_bytes(), None).is_err());
    }

    #[test]
    fn map_csv_round_trip() {
        let map = AngularMap::new(
            vec![0.64, 0.65],
            vec![-1.0, 0.0, 1.0],
            vec![0.1, 0.2, 0.1, 0.3, 0.4, 0.3],
            SpectrumMeta::signal(0.0, 0.532, 22.0),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_map_csv(&mut buf, &map).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("wavelength_um\\theta_deg,-1.00000000e0,0.00000000e0,1.00000000e0\n"));
        let (l, t, body) = read_map_csv(buf.as_slice()).unwrap();
        assert_eq!(l, map.lambda_axis());
        assert_eq!(t, map.theta_axis());
        assert_eq!(body, map.data());
    }
}

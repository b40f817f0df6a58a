//! Portable text output: energy CSV, field dumps and graymap rasters.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! formatting, so re-parsing a file reproduces the doubles bit for bit and
//! the decimal point is locale independent.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::energies::EnergyReport;
use crate::grid::{BoundaryMode, Field, Grid2};
use crate::{Error, Result};

pub const ENERGY_CSV_HEADER: &str = "time,area1,area2,willmore1,willmore2,penalty,adhesion,confinement,volume,fidelity,total,perimeter1,perimeter2,contour_components,contour_length";

/// Writes one row per report under the fixed header.
pub fn write_energy_csv(path: &Path, reports: &[EnergyReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{ENERGY_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.time,
            r.area1,
            r.area2,
            r.willmore1,
            r.willmore2,
            r.penalty,
            r.adhesion,
            r.confinement,
            r.volume,
            r.fidelity,
            r.total,
            r.perimeter1,
            r.perimeter2,
            r.contour_components,
            r.contour_length
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a CSV produced by [`write_energy_csv`].
pub fn read_energy_csv(path: &Path) -> Result<Vec<EnergyReport>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Format("empty CSV file".into()))?;
    if header != ENERGY_CSV_HEADER {
        return Err(Error::Format("missing or unexpected CSV header".into()));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 15 {
            return Err(Error::Format(format!("row {}: expected 15 columns", k + 2)));
        }
        let f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("row {}: bad number '{s}'", k + 2)))
        };
        out.push(EnergyReport {
            time: f(cols[0])?,
            area1: f(cols[1])?,
            area2: f(cols[2])?,
            willmore1: f(cols[3])?,
            willmore2: f(cols[4])?,
            penalty: f(cols[5])?,
            adhesion: f(cols[6])?,
            confinement: f(cols[7])?,
            volume: f(cols[8])?,
            fidelity: f(cols[9])?,
            total: f(cols[10])?,
            perimeter1: f(cols[11])?,
            perimeter2: f(cols[12])?,
            contour_components: cols[13]
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad count", k + 2)))?,
            contour_length: f(cols[14])?,
        });
    }
    Ok(out)
}

/// Text field dump: header `nx ny x0 y0 lx ly bc`, then one line of nx
/// values per grid row. Round-trips bitwise through [`read_field`].
pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    let g = f.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "{} {} {} {} {} {} {}",
        g.nx(),
        g.ny(),
        g.x0(),
        g.y0(),
        g.lx(),
        g.ly(),
        g.bc().name()
    )?;
    for j in 0..g.ny() {
        let row = &f.values()[j * g.nx()..(j + 1) * g.nx()];
        let mut line = String::with_capacity(row.len() * 20);
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field dump written by [`write_field`].
pub fn read_field(path: &Path) -> Result<Field> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty field file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 7 {
        return Err(Error::Format("field header needs 7 entries".into()));
    }
    let nx: usize = parts[0]
        .parse()
        .map_err(|_| Error::Format("bad nx".into()))?;
    let ny: usize = parts[1]
        .parse()
        .map_err(|_| Error::Format("bad ny".into()))?;
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad header number '{s}'")))
    };
    let bc = BoundaryMode::parse(parts[6])
        .ok_or_else(|| Error::Format(format!("unknown boundary mode '{}'", parts[6])))?;
    let grid = Grid2::new(nx, ny, num(parts[2])?, num(parts[3])?, num(parts[4])?, num(parts[5])?, bc)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        for tok in line.split_whitespace() {
            values.push(
                tok.parse()
                    .map_err(|_| Error::Format(format!("bad value '{tok}'")))?,
            );
        }
    }
    if values.len() != grid.len() {
        return Err(Error::Format(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        )));
    }
    let f = Field::from_values(grid, values)?;
    f.validate()?;
    Ok(f)
}

/// 8-bit binary graymap (P5): values clamped to [0, 1], scaled to 0..=255
/// and rounded half-up.
pub fn write_field_pgm(path: &Path, f: &Field) -> Result<()> {
    let g = f.grid();
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", g.nx(), g.ny())?;
    let mut bytes = Vec::with_capacity(g.len());
    // graymap rows run top to bottom
    for j in (0..g.ny()).rev() {
        for i in 0..g.nx() {
            let v = f.at(i, j).clamp(0.0, 1.0);
            bytes.push((v * 255.0 + 0.5).floor().min(255.0) as u8);
        }
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn tmp(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("willmore2d-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn field_roundtrip_is_bitwise() {
        let g = Grid2::new(17, 9, -1.1, -2.2, 2.2, 4.4, BoundaryMode::Periodic).unwrap();
        let mut f = Field::zeros(g);
        let mut s = 0x9e3779b97f4a7c15u64;
        for v in f.values_mut() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = f64::from_bits((s >> 12) | 0x3ff0000000000000) - 1.5;
        }
        let p = tmp("field.txt");
        write_field(&p, &f).unwrap();
        let f2 = read_field(&p).unwrap();
        assert_eq!(f.grid(), f2.grid());
        assert_eq!(f.values(), f2.values());
        std::fs::remove_file(&p).ok();
    }

    #[test]
    fn field_read_rejects_bad_header() {
        let p = tmp("bad.txt");
        std::fs::write(&p, "4 4 0 0 1 1\n0 0 0 0\n").unwrap();
        assert!(read_field(&p).is_err());
        std::fs::write(&p, "4 4 0 0 1 1 neumann\n0 0 0 0\n").unwrap();
        assert!(read_field(&p).is_err()); // shape mismatch
        std::fs::remove_file(&p).ok();
    }

    #[test]
    fn csv_roundtrip_and_bookkeeping() {
        let mut r = EnergyReport::default();
        r.time = 1e-5;
        r.willmore1 = 0.1 + 1e-16;
        r.willmore2 = 0.25;
        r.penalty = 1.0 / 3.0;
        r.adhesion = 0.125;
        r.confinement = 0.5;
        r.volume = 0.0625;
        r.fidelity = 0.03125;
        r.total = r.willmore1 + r.willmore2 + r.penalty - r.adhesion
            + r.confinement
            + r.volume
            + r.fidelity;
        let p = tmp("energy.csv");
        write_energy_csv(&p, &[r]).unwrap();
        let back = read_energy_csv(&p).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0], r);
        let sum = back[0].willmore1 + back[0].willmore2 + back[0].penalty - back[0].adhesion
            + back[0].confinement
            + back[0].volume
            + back[0].fidelity;
        assert_eq!(sum, back[0].total);
        // empty trajectory: header only
        write_energy_csv(&p, &[]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        std::fs::remove_file(&p).ok();
    }

    #[test]
    fn pgm_midgray_rounding() {
        let g = Grid2::unit_square(4, BoundaryMode::Neumann);
        let f = Field::constant(g, 0.5);
        let p = tmp("gray.pgm");
        write_field_pgm(&p, &f).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let header_end = bytes.windows(4).position(|w| w == b"255\n").unwrap() + 4;
        // 0.5 -> 127.5 -> round half-up -> 128
        assert!(bytes[header_end..].iter().all(|&b| b == 128));
        std::fs::remove_file(&p).ok();
    }
}

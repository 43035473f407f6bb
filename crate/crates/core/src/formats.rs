//! Plain-text output tables and the density-matrix exchange format.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every value bit for bit and identical inputs give
//! byte-identical files on every platform.
//!
//! Density-matrix files look like
//!
//! ```text
//! # optional comment lines
//! dims: 3 80
//! 0.5,0
//! 0,-0.25
//! ...
//! ```
//!
//! with one `re,im` pair per line in row-major order.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::analysis::WignerGrid;
use crate::circuit::CouplingRow;
use crate::constants::angular_to_hz;
use crate::protocols::cat::CatRunResult;
use crate::protocols::CoolingPoint;
use crate::quantum::{CMat, DensityMatrix, HilbertSpace, QuantumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state file ended after {found} of {expected} entries")]
    Truncated { expected: usize, found: usize },
    #[error("state file has data after the last entry (line {line})")]
    TrailingData { line: usize },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub const COUPLING_HEADER: &str = "flux_mech,g0_hz,g0p_hz,g0pp_hz,omega_t_hz,ej_transmon_hz";
pub const COOLING_MAP_HEADER: &str = "delta_hz,flux_mech,g0_over_wm,n_phonon,n_qubit,residual,status";
pub const COOLING_DRIVE_HEADER: &str = "drive_hz,delta_hz,flux_mech,g0_over_wm,n_phonon,n_qubit,residual,status";
pub const CAT_TIMESERIES_HEADER: &str = "t_s,n_qubit,n_phonon,beta_abs_oracle";

pub fn coupling_csv(rows: &[CouplingRow]) -> String {
    let mut s = String::from(COUPLING_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.flux_mech,
            angular_to_hz(r.g0),
            angular_to_hz(r.g0_prime),
            angular_to_hz(r.g0_dprime),
            angular_to_hz(r.omega_t),
            angular_to_hz(r.ej_transmon)
        );
    }
    s
}

pub fn cooling_map_csv(points: &[CoolingPoint]) -> String {
    let mut s = String::from(COOLING_MAP_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            angular_to_hz(p.delta),
            p.flux_mech,
            p.g0_over_omega_m,
            p.n_phonon_ss,
            p.n_qubit_ss,
            p.residual,
            p.status.label()
        );
    }
    s
}

pub fn cooling_drive_csv(points: &[CoolingPoint]) -> String {
    let mut s = String::from(COOLING_DRIVE_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            angular_to_hz(p.drive_amp),
            angular_to_hz(p.delta),
            p.flux_mech,
            p.g0_over_omega_m,
            p.n_phonon_ss,
            p.n_qubit_ss,
            p.residual,
            p.status.label()
        );
    }
    s
}

pub fn cat_timeseries_csv(run: &CatRunResult) -> String {
    let mut s = String::from(CAT_TIMESERIES_HEADER);
    s.push('\n');
    for (k, t) in run.times.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            t,
            run.n_qubit[k],
            run.n_phonon[k],
            run.beta_t[k].norm()
        );
    }
    s
}

/// First row holds the `x` axis after a `p\x` corner cell; each later row
/// starts with its `p` value.
pub fn wigner_csv(grid: &WignerGrid) -> String {
    let mut s = String::from("p\\x");
    for x in &grid.x {
        let _ = write!(s, ",{x}");
    }
    s.push('\n');
    for (p, row) in grid.p.iter().zip(&grid.values) {
        let _ = write!(s, "{p}");
        for w in row {
            let _ = write!(s, ",{w}");
        }
        s.push('\n');
    }
    s
}

/// Parses a grid written by [`wigner_csv`].
pub fn parse_wigner_csv(text: &str) -> Result<WignerGrid, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(FormatError::Parse {
        line: 1,
        msg: "empty Wigner file".into(),
    })?;
    let x = head
        .split(',')
        .skip(1)
        .map(|v| parse_f64(v, 1))
        .collect::<Result<Vec<_>, _>>()?;
    let mut p = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let mut cells = line.split(',').map(|v| parse_f64(v, i + 1));
        p.push(cells.next().unwrap()?);
        let row = cells.collect::<Result<Vec<_>, _>>()?;
        if row.len() != x.len() {
            return Err(FormatError::Parse {
                line: i + 1,
                msg: format!("expected {} values, found {}", x.len(), row.len()),
            });
        }
        values.push(row);
    }
    Ok(WignerGrid {
        x,
        p,
        values,
        truncation_warning: false,
    })
}

fn parse_f64(v: &str, line: usize) -> Result<f64, FormatError> {
    v.trim().parse().map_err(|_| FormatError::Parse {
        line,
        msg: format!("not a number: {v:?}"),
    })
}

pub fn write_density_matrix(rho: &DensityMatrix) -> String {
    let dims = rho.space().dims();
    let mut s = String::from("dims:");
    for d in dims {
        let _ = write!(s, " {d}");
    }
    s.push('\n');
    for z in rho.matrix().data() {
        let _ = writeln!(s, "{},{}", z.re, z.im);
    }
    s
}

/// Reads the format written by [`write_density_matrix`] and validates the
/// state.
pub fn read_density_matrix(text: &str) -> Result<DensityMatrix, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(FormatError::Parse {
        line: 1,
        msg: "missing `dims:` header".into(),
    })?;
    let rest = header.strip_prefix("dims:").ok_or(FormatError::Parse {
        line: hline,
        msg: format!("expected `dims: N_T N_M`, found {header:?}"),
    })?;
    let dims = rest
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| FormatError::Parse {
                line: hline,
                msg: format!("bad dimension {t:?}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if dims.is_empty() {
        return Err(FormatError::Parse {
            line: hline,
            msg: "no dimensions given".into(),
        });
    }
    let space = HilbertSpace::new(dims)?;
    let n = space.dim();
    let expected = n * n;
    let mut data = Vec::with_capacity(expected);
    for (line, l) in lines {
        if data.len() == expected {
            return Err(FormatError::TrailingData { line });
        }
        let (re, im) = l.split_once(',').ok_or(FormatError::Parse {
            line,
            msg: format!("expected `re,im`, found {l:?}"),
        })?;
        data.push(Complex64::new(parse_f64(re, line)?, parse_f64(im, line)?));
    }
    if data.len() != expected {
        return Err(FormatError::Truncated {
            expected,
            found: data.len(),
        });
    }
    Ok(DensityMatrix::new(space, CMat::from_row_major(n, n, data)?)?)
}

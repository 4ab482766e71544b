//! Plain CSV formats for snapshots, traces, densities and histograms.

use std::io::{BufRead, Write};

use crate::equilibrium::RadialDensity;
use crate::error::{Error, Result};
use crate::kernel::Configuration;
use crate::measures::HistogramBin;
use crate::sampler::TraceRow;
use crate::scalar::Scalar;

/// Header `x1,...,xd`, then one particle per row with 17 significant digits.
pub fn write_snapshot<T: Scalar, W: Write>(mut w: W, config: &Configuration<T>) -> Result<()> {
    let header: Vec<String> = (1..=config.dim()).map(|k| format!("x{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in config.points() {
        let row: Vec<String> = p.iter().map(|v| format!("{:.16e}", v.to_f64_lossy())).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Configuration<f64>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))??;
    let d = header.split(',').count();
    if header.split(',').enumerate().any(|(k, h)| h.trim() != format!("x{}", k + 1)) {
        return Err(Error::Parse(format!("snapshot header must be x1,...,xd, got {header:?}")));
    }
    let mut coords = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != d {
            return Err(Error::Parse(format!("row {} has {} fields, expected {d}", row + 2, values.len())));
        }
        for v in values {
            coords.push(v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", row + 2)))?);
        }
    }
    Configuration::new(d, coords)
}

pub fn write_trace<T: Scalar, W: Write>(mut w: W, trace: &[TraceRow<T>]) -> Result<()> {
    writeln!(w, "sweep,beta_N,energy,accept_rate_rw,accept_rate_mala,max_radius")?;
    for r in trace {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{},{},{:.16e}",
            r.sweep,
            r.beta_n.to_f64_lossy(),
            r.energy.to_f64_lossy(),
            r.accept_rw.to_f64_lossy(),
            r.accept_mala.to_f64_lossy(),
            r.max_radius.to_f64_lossy()
        )?;
    }
    Ok(())
}

/// `(r, M(r), mass within r)` on `points` equally spaced radii in `[0, R0]`.
pub fn write_density<T: Scalar, W: Write>(mut w: W, density: &RadialDensity<T>, points: usize) -> Result<()> {
    writeln!(w, "r,M,cumulative_mass")?;
    let points = points.max(2);
    let step = density.outer() / T::of_usize(points - 1);
    for k in 0..points {
        let r = if k + 1 == points { density.outer() } else { step * T::of_usize(k) };
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e}",
            r.to_f64_lossy(),
            density.density(r).to_f64_lossy(),
            density.mass_within(r).to_f64_lossy()
        )?;
    }
    Ok(())
}

pub fn write_histogram<T: Scalar, W: Write>(mut w: W, bins: &[HistogramBin<T>]) -> Result<()> {
    writeln!(w, "bin_left,bin_right,count")?;
    for b in bins {
        writeln!(w, "{:.16e},{:.16e},{}", b.left.to_f64_lossy(), b.right.to_f64_lossy(), b.count)?;
    }
    Ok(())
}

use std::io::Write;

use super::{CurvatureOperator, SampledSurface};
use crate::error::{Error, Result};

/// Write one row per sample: direction, chart point, chart normal, metric
/// normal, principal curvatures and `H_S`, with 12 significant digits.
pub fn write_samples_csv<W: Write>(out: W, sampled: &SampledSurface, op: &CurvatureOperator) -> Result<()> {
    let first = sampled.samples.first().ok_or(Error::EmptyGrid)?;
    let n = first.point.coords.len();
    let mut header: Vec<String> = Vec::new();
    for prefix in ["u", "x", "nu", "N"] {
        header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    header.extend((1..n).map(|i| format!("kappa_{i}")));
    header.push("H".into());

    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(io)?;
    for s in &sampled.samples {
        let h = op.value(&s.curvatures)?;
        let row: Vec<String> = s
            .direction
            .as_slice()
            .iter()
            .chain(s.point.coords.as_slice())
            .chain(s.chart_normal.as_slice())
            .chain(s.normal.as_slice())
            .chain(&s.curvatures)
            .chain(std::iter::once(&h))
            .map(|v| format!("{v:.11e}"))
            .collect();
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{DirectionGrid, GridSpec, RadialSurface, SurfaceFamily};
    use crate::SpaceForm;

    #[test]
    fn csv_has_header_and_rows() {
        let s = RadialSurface::centered(SpaceForm::euclidean(2), SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
        let g = DirectionGrid::new(GridSpec::new(2, 0)).unwrap();
        let sampled = s.sample(&g).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &sampled, &CurvatureOperator::Mean).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "u_1,u_2,x_1,x_2,nu_1,nu_2,N_1,N_2,kappa_1,H");
        assert_eq!(lines.count(), g.len());
    }
}

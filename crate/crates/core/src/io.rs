//! CSV interchange for point clouds and series, and atomic file output.
//!
//! Point files hold one point per line with comma-separated coordinates.
//! Lines starting with `#` are header/comment lines and blank lines are skipped.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::boxcount::CountSeries;
use crate::error::{DimError, Result};
use crate::geometry::PointCloud;
use crate::infodim::EntropySeries;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct PointsFile<T> {
    pub cloud: PointCloud<T>,
    /// `#` lines with the marker and surrounding whitespace stripped.
    pub header: Vec<String>,
}

pub fn read_points<T: Scalar, R: BufRead>(reader: R) -> Result<PointsFile<T>> {
    let mut header = Vec::new();
    let mut coords: Vec<T> = Vec::new();
    let mut dim = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            header.push(rest.trim().to_string());
            continue;
        }
        let mut n = 0;
        for field in trimmed.split(',') {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| DimError::Parse {
                line: lineno,
                message: format!("invalid number {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(DimError::Parse { line: lineno, message: format!("non-finite value {field:?}") });
            }
            coords.push(T::of(v));
            n += 1;
        }
        match dim {
            None => dim = Some(n),
            Some(d) if d != n => {
                return Err(DimError::Parse {
                    line: lineno,
                    message: format!("expected {d} coordinates, found {n}"),
                })
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| DimError::Parse { line: 0, message: "no points in input".into() })?;
    Ok(PointsFile { cloud: PointCloud::new(dim, coords)?, header })
}

pub fn read_points_file<T: Scalar>(path: &Path) -> Result<PointsFile<T>> {
    let file = std::fs::File::open(path)?;
    read_points(std::io::BufReader::new(file))
}

/// Serializes a cloud; each header line is written as `# line`.
/// Coordinates use the shortest representation that round-trips.
pub fn format_points<T: Scalar>(cloud: &PointCloud<T>, header: &[String]) -> String {
    let mut out = String::with_capacity(cloud.len() * 24 * cloud.dim());
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for p in cloud.points() {
        for (i, x) in p.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

pub fn format_counts<T: Scalar>(series: &CountSeries<T>) -> String {
    let mut out = String::from("k,epsilon,count\n");
    for e in &series.entries {
        let _ = writeln!(out, "{},{},{}", e.k, e.epsilon, e.count);
    }
    out
}

pub fn format_entropy<T: Scalar>(series: &EntropySeries<T>) -> String {
    let mut out = String::from("k,epsilon,occupied,entropy_bits\n");
    for e in &series.entries {
        let _ = writeln!(out, "{},{},{},{}", e.k, e.epsilon, e.occupied, e.entropy_bits);
    }
    out
}

/// Writes `contents` to a temporary file beside `path` and renames it into place.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| DimError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_header_and_points() {
        let text = "# dimest generate henon\n# x,y\n1,0\n-0.4, 0.3\n\n0.5e-1,2\n";
        let f = read_points::<f64, _>(text.as_bytes()).unwrap();
        assert_eq!(f.header, vec!["dimest generate henon", "x,y"]);
        assert_eq!(f.cloud.dim(), 2);
        assert_eq!(f.cloud.coords(), &[1.0, 0.0, -0.4, 0.3, 0.05, 2.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_points::<f64, _>("# h\n1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DimError::Parse { line: 3, .. }), "{err}");
        let err = read_points::<f64, _>("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DimError::Parse { line: 2, .. }), "{err}");
        let err = read_points::<f64, _>("1,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DimError::Parse { line: 1, .. }));
        assert!(read_points::<f64, _>("# only a header\n".as_bytes()).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        atomic_write(&path, b"first\n").unwrap();
        atomic_write(&path, b"second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn points_round_trip(pts in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>()), 1..40)) {
            let coords: Vec<f64> = pts
                .iter()
                .flat_map(|&(a, b, c)| [a, b, c])
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect();
            let cloud = PointCloud::new(3, coords).unwrap();
            let text = format_points(&cloud, &["header".to_string()]);
            let back = read_points::<f64, _>(text.as_bytes()).unwrap();
            prop_assert_eq!(back.cloud, cloud);
            prop_assert_eq!(back.header, vec!["header".to_string()]);
        }
    }
}

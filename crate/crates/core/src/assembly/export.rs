//! Operator export: binary row-major complex arrays with a JSON sidecar.

use super::kernel::{KernelOperator, OperatorData};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Sidecar metadata written next to the raw matrix dump.
#[derive(Debug, Serialize, Deserialize)]
pub struct OperatorSidecar {
    pub label: String,
    pub spin_dim: usize,
    pub rows: usize,
    pub cols: usize,
    pub grid_dim: usize,
    pub grid_points_per_axis: usize,
    pub grid_halfwidth: f64,
    pub grid_scheme: String,
    /// storage: little-endian f64 pairs (re, im), row-major
    pub format: String,
}

impl KernelOperator {
    /// Write `<stem>.bin` (row-major little-endian (re,im) f64 pairs) and
    /// `<stem>.json` with the grid metadata. Files are written atomically.
    pub fn export(&self, stem: &Path) -> Result<()> {
        let dense;
        let matrix = match &self.data {
            OperatorData::Dense(m) => m,
            OperatorData::Diagonal(_) => {
                dense = self.dense();
                &dense
            }
        };
        let bin_path = stem.with_extension("bin");
        let json_path = stem.with_extension("json");

        let mut bytes = Vec::with_capacity(matrix.len() * 16);
        for z in matrix.iter() {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
        write_atomic(&bin_path, &bytes)?;

        let sidecar = OperatorSidecar {
            label: self.label.clone(),
            spin_dim: self.spin_dim,
            rows: matrix.nrows(),
            cols: matrix.ncols(),
            grid_dim: self.grid.dim,
            grid_points_per_axis: self.grid.points_per_axis,
            grid_halfwidth: self.grid.box_halfwidth,
            grid_scheme: self.grid.scheme.name().to_string(),
            format: "complex128-le-row-major".into(),
        };
        write_atomic(&json_path, serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
        Ok(())
    }
}

/// Temp-file-plus-rename write in the destination directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_multiplier, FullSymbol};
    use crate::numerics::{make_grid, GridScheme};
    use std::sync::Arc;

    #[test]
    fn export_round_trip() {
        let grid = Arc::new(make_grid(2, 3.0, 4, GridScheme::MidpointOffset).unwrap());
        let op = assemble_multiplier(&FullSymbol::bessel_weight(1.0), &grid).unwrap();
        let dir = std::env::temp_dir().join("moyal_lab_export_test");
        std::fs::create_dir_all(&dir).unwrap();
        let stem = dir.join("op");
        op.export(&stem).unwrap();

        let side: OperatorSidecar =
            serde_json::from_slice(&std::fs::read(stem.with_extension("json")).unwrap()).unwrap();
        assert_eq!(side.rows, 16);
        assert_eq!(side.spin_dim, 1);
        let bytes = std::fs::read(stem.with_extension("bin")).unwrap();
        assert_eq!(bytes.len(), 16 * 16 * 16);
        // first diagonal entry re-read
        let re = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let want = op.dense()[(0, 0)].re;
        assert!((re - want).abs() < 1e-15);
        std::fs::remove_dir_all(&dir).ok();
    }
}

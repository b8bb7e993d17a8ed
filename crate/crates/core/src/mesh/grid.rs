//! Regular grids as Freudenthal (Kuhn) tetrahedral meshes.

use super::{MeshError, Point3, TetMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl GridDims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        GridDims { nx, ny, nz }
    }

    pub fn vertex_count(&self) -> Option<usize> {
        self.nx.checked_mul(self.ny)?.checked_mul(self.nz)
    }

    /// x-fastest linear index.
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.nx * (y + self.ny * z)
    }

    fn validate(&self) -> Result<usize, MeshError> {
        if self.nx < 2 || self.ny < 2 || self.nz < 2 {
            return Err(MeshError::Grid(format!(
                "every dimension must be at least 2, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        self.vertex_count()
            .filter(|&n| n < u32::MAX as usize)
            .ok_or_else(|| MeshError::Grid("grid too large".into()))
    }
}

/// Splits every grid cube into the 6 tets around its (0,0,0)-(1,1,1) diagonal.
///
/// Each tet follows a monotone lattice path from the low corner to the high
/// corner, so neighbouring cubes agree on their shared faces. Tets are
/// reoriented to positive signed volume.
pub fn grid_to_tets(dims: GridDims, values: &[f64], spacing: Point3) -> Result<TetMesh, MeshError> {
    let n = dims.validate()?;
    if values.len() != n {
        return Err(MeshError::Grid(format!(
            "expected {n} values for the grid, got {}",
            values.len()
        )));
    }
    let GridDims { nx, ny, nz } = dims;
    let mut positions = Vec::with_capacity(n);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                positions.push([
                    x as f64 * spacing[0],
                    y as f64 * spacing[1],
                    z as f64 * spacing[2],
                ]);
            }
        }
    }
    const AXIS_ORDERS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * (nx - 1) * (ny - 1) * (nz - 1));
    for z in 0..nz - 1 {
        for y in 0..ny - 1 {
            for x in 0..nx - 1 {
                for axes in AXIS_ORDERS {
                    let mut c = [x, y, z];
                    let mut tet = [0u32; 4];
                    tet[0] = dims.index(c[0], c[1], c[2]) as u32;
                    for (k, &a) in axes.iter().enumerate() {
                        c[a] += 1;
                        tet[k + 1] = dims.index(c[0], c[1], c[2]) as u32;
                    }
                    tets.push(tet);
                }
            }
        }
    }
    let mut mesh = TetMesh {
        positions,
        values: values.to_vec(),
        tets,
    };
    mesh.orient_positive();
    // Rerun full validation (finite values, spacing > 0).
    TetMesh::new(mesh.positions, mesh.values, mesh.tets)
}

/// Decodes a raw grid of little-endian `f64`, x fastest.
pub fn parse_raw_grid(bytes: &[u8], dims: GridDims) -> Result<Vec<f64>, MeshError> {
    let n = dims.validate()?;
    let expected = n
        .checked_mul(8)
        .ok_or_else(|| MeshError::Grid("grid too large".into()))?;
    if bytes.len() != expected {
        return Err(MeshError::Grid(format!(
            "raw grid has {} bytes, expected {expected} for {}x{}x{} doubles",
            bytes.len(),
            dims.nx,
            dims.ny,
            dims.nz
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if let Some(vertex) = values.iter().position(|v| !v.is_finite()) {
        return Err(MeshError::NonFiniteValue {
            vertex,
            value: values[vertex],
        });
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cube() {
        let m = grid_to_tets(GridDims::new(2, 2, 2), &[0.0; 8], [1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.vertex_count(), 8);
        assert_eq!(m.tet_count(), 6);
        assert!((m.total_volume() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn two_cubes() {
        let m = grid_to_tets(GridDims::new(3, 2, 2), &[0.0; 12], [1.0; 3]).unwrap();
        assert_eq!(m.tet_count(), 12);
    }

    #[test]
    fn every_tet_positive_and_volumes_sum_to_box() {
        let dims = GridDims::new(4, 3, 5);
        let spacing = [0.5, 1.25, 0.75];
        let m = grid_to_tets(dims, &vec![1.0; 60], spacing).unwrap();
        // Independent sum of scalar triple products.
        let mut total = 0.0;
        for t in 0..m.tet_count() {
            let v6 = m.signed_volume6(t);
            assert!(v6 > 0.0);
            total += v6 / 6.0;
        }
        let expect = 3.0 * 2.0 * 4.0 * spacing.iter().product::<f64>();
        assert!(((total - expect) / expect).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(grid_to_tets(GridDims::new(2, 2, 2), &[0.0; 7], [1.0; 3]).is_err());
        assert!(grid_to_tets(GridDims::new(1, 2, 2), &[0.0; 4], [1.0; 3]).is_err());
        assert!(parse_raw_grid(&[0u8; 63], GridDims::new(2, 2, 2)).is_err());
    }

    #[test]
    fn raw_grid_little_endian() {
        let vals: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let bytes: Vec<u8> = vals.iter().flat_map(|v| v.to_le_bytes()).collect();
        assert_eq!(
            parse_raw_grid(&bytes, GridDims::new(2, 2, 2)).unwrap(),
            vals
        );
    }
}

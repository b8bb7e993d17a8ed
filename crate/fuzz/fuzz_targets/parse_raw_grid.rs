#![no_main]

use contour_volume::mesh::{grid_to_tets, parse_raw_grid, GridDims};
use libfuzzer_sys::fuzz_target;

// The first three bytes pick the grid dimensions; the rest is the payload.
fuzz_target!(|data: &[u8]| {
    if data.len() < 3 {
        return;
    }
    let dims = GridDims::new(
        data[0] as usize % 8,
        data[1] as usize % 8,
        data[2] as usize % 8,
    );
    if let Ok(values) = parse_raw_grid(&data[3..], dims) {
        let mesh = grid_to_tets(dims, &values, [1.0; 3]).expect("decoded grids are valid");
        assert_eq!(mesh.vertex_count(), values.len());
    }
});

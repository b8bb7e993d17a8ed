#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(obj) = contour_volume::isosurface::parse_obj(text) {
            let n = obj.positions.len() as u32;
            assert!(obj.triangles.iter().flatten().all(|&i| i < n));
            assert_eq!(obj.triangles.len(), obj.triangle_group.len());
        }
    }
});

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(node) = contour_volume::mesh::parse_node(text) {
            assert_eq!(
                node.attributes.len(),
                node.positions.len() * node.attribute_count
            );
            for k in 0..node.attribute_count {
                assert_eq!(node.attribute(k).unwrap().len(), node.positions.len());
            }
        }
    }
});

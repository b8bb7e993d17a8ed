#![no_main]

use contour_volume::contour_tree::ContourTree;
use contour_volume::mesh::{
    parse_ele, parse_node, tetgen_mesh, FieldValues, TopologyGraph, VertexOrder,
};
use libfuzzer_sys::fuzz_target;

// Input is a `.node` file and an `.ele` file separated by a NUL byte. Small
// meshes that load are pushed through tree construction.
fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else {
        return;
    };
    let (Ok(node), Ok(ele)) = (
        std::str::from_utf8(&data[..split]),
        std::str::from_utf8(&data[split + 1..]),
    ) else {
        return;
    };
    let (Ok(node), Ok(ele)) = (parse_node(node), parse_ele(ele)) else {
        return;
    };
    let field = if node.attribute_count > 0 {
        FieldValues::Attribute(0)
    } else {
        FieldValues::Values((0..node.positions.len()).map(|i| i as f64).collect())
    };
    let Ok(mesh) = tetgen_mesh(&node, &ele, &field) else {
        return;
    };
    if mesh.vertex_count() <= 256 {
        let order = VertexOrder::new(&mesh);
        let _ = ContourTree::build(&TopologyGraph::from_mesh(&mesh), &order, mesh.values());
    }
});

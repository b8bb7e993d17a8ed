use proptest::prelude::*;

use contour_volume::decomposition::decompose;
use contour_volume::hypersweep::{
    build_tet_splines, compute_deltas, count_regular_nodes, count_weights, root_function,
    sweep_volumes, volume_weights,
};
use contour_volume::mesh::{grid_to_tets, GridDims, TetMesh, VertexOrder};
use contour_volume::oracle::reference_contour_count;
use contour_volume::pipeline::build_tree;

fn grid(n: usize, values: Vec<f64>, spacing: [f64; 3]) -> TetMesh {
    grid_to_tets(GridDims::new(n, n, n), &values, spacing).unwrap()
}

fn small_integer_grid() -> impl Strategy<Value = TetMesh> {
    (3usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(0i32..6, n * n * n),
            prop::array::uniform3(0.5f64..2.0),
        )
            .prop_map(move |(v, s)| grid(n, v.into_iter().map(f64::from).collect(), s))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Tied values stress the simulated order; half-integer thresholds are
    /// never vertex values.
    #[test]
    fn straddling_arcs_count_contours(mesh in small_integer_grid()) {
        let tree = build_tree(&mesh).unwrap();
        for k in 0..6 {
            let t = k as f64 + 0.5;
            prop_assert_eq!(tree.arcs_straddling(t), reference_contour_count(&mesh, t));
        }
    }

    #[test]
    fn root_function_is_total_volume(mesh in small_integer_grid()) {
        let tree = build_tree(&mesh).unwrap();
        let order = VertexOrder::new(&mesh);
        let deltas = compute_deltas(mesh.vertex_count(), &build_tet_splines(&mesh, &order));
        let volumes = sweep_volumes(&tree, &deltas).unwrap();
        let total = mesh.total_volume();
        let root = root_function(&tree, &volumes, &deltas);
        for h in [0.0, 2.5, 5.0] {
            prop_assert!((root.eval(h) - total).abs() <= 1e-9 * total);
        }
    }

    #[test]
    fn decomposition_partitions_arcs(mesh in small_integer_grid(), by_volume in any::<bool>()) {
        let tree = build_tree(&mesh).unwrap();
        let (weights, total) = if by_volume {
            let order = VertexOrder::new(&mesh);
            let deltas = compute_deltas(mesh.vertex_count(), &build_tet_splines(&mesh, &order));
            let volumes = sweep_volumes(&tree, &deltas).unwrap();
            let total = mesh.total_volume();
            (volume_weights(&tree, &volumes, total), total)
        } else {
            (count_weights(&tree, &count_regular_nodes(&tree)), mesh.vertex_count() as f64)
        };
        let dec = decompose(&tree, &weights, total).unwrap();
        let mut seen = vec![0u32; tree.superarc_count()];
        for b in dec.branches() {
            for &e in &b.superarcs {
                seen[e as usize] += 1;
                prop_assert_eq!(dec.branch_of(e), b.rank);
            }
            prop_assert!(b.weight <= total * (1.0 + 1e-12));
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert!(dec.branches().windows(2).all(|w| w[0].weight >= w[1].weight));
    }
}

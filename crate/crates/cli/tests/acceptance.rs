//! Acceptance criteria: one PASS/FAIL line each, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use contour_volume::contour_tree::ContourTree;
use contour_volume::decomposition::BranchDecomposition;
use contour_volume::hypersweep::{
    build_tet_splines, compute_deltas, root_function, sweep_volumes, SuperarcVolume,
};
use contour_volume::isosurface::{extract_superarc_contour, march_tets, weld};
use contour_volume::mesh::{
    write_ele, write_field_values, write_node, FieldSource, Point3, TetMesh, VertexOrder,
};
use contour_volume::oracle::{clip_area, clip_volume, reference_contour_count, region_volume};
use contour_volume::pipeline::{
    analyze, build_tree, run, MeshInput, PipelineConfig, StageTimings, WeightMethod,
};
use contour_volume::synth;
use contour_volume::verify::tet_spline;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `|grad f|` of the linear interpolant, from the 3x3 system of edge differences.
fn gradient_norm(p: &[Point3; 4], f: &[f64; 4]) -> f64 {
    let m = [sub(p[1], p[0]), sub(p[2], p[0]), sub(p[3], p[0])];
    let r = [f[1] - f[0], f[2] - f[0], f[3] - f[0]];
    let det = |a: Point3, b: Point3, c: Point3| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    let col = |k: usize| [m[0][k], m[1][k], m[2][k]];
    let d = det(col(0), col(1), col(2));
    let g: [f64; 3] = std::array::from_fn(|k| {
        let mut cols = [col(0), col(1), col(2)];
        cols[k] = r;
        det(cols[0], cols[1], cols[2]) / d
    });
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}

fn spline_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = synth::rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (p, f) = synth::random_tet(&mut rng);
        let s = tet_spline(p, f);
        let vol = s.total_volume();
        let (lo, hi) = (
            f.iter().cloned().fold(f64::MAX, f64::min),
            f.iter().cloned().fold(f64::MIN, f64::max),
        );
        for k in 0..64 {
            let h = lo - 0.05 + (hi - lo + 0.1) * (k as f64 + 0.5) / 64.0;
            worst = worst.max((s.eval(h) - clip_volume(&p, &f, h)).abs() / vol);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 10.0,
        format!("worst |V - clip| / vol = {worst:.2e} (<= 1e-9), {secs:.2} s (< 10 s)"),
    )
}

fn unit_tet_values() -> Outcome {
    let p = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let f = [0.0, 1.0, 2.0, 3.0];
    let s = tet_spline(p, f);
    // At h = 1 the sublevel set is the tet A, B, (0,0,1/3), (0,1/2,0): |det| / 6 = (1 * 1/2 * 1/3) / 6.
    let hand = 1.0 / 36.0;
    let v1 = s.eval(1.0);
    let v3 = s.eval(3.0);
    let o15 = clip_volume(&p, &f, 1.5);
    let rel15 = (s.eval(1.5) - o15).abs() / o15;
    let ok = (v1 - hand).abs() <= 1e-15
        && (clip_volume(&p, &f, 1.0) - hand).abs() <= 1e-15
        && (v3 - 1.0 / 6.0).abs() <= 1e-15
        && rel15 <= 1e-10;
    outcome(
        ok,
        format!("V(1) = {v1:.17}, V(3) = {v3:.17}, V(1.5) rel err {rel15:.2e} (<= 1e-10)"),
    )
}

fn continuity_and_coarea() -> Outcome {
    let mut rng = synth::rng(3);
    let (mut jump, mut slope): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let (p, f) = synth::random_tet(&mut rng);
        let s = tet_spline(p, f);
        let [p1, p2, p3] = s.pieces();
        let bp = s.breakpoints();
        let vol = s.total_volume();
        jump = jump.max((p1.eval(bp[1]) - p2.eval(bp[1])).abs() / vol);
        jump = jump.max((p2.eval(bp[2]) - p3.eval(bp[2])).abs() / vol);
        let kappa = 1.0 / gradient_norm(&p, &f);
        for w in bp.windows(2) {
            let width = w[1] - w[0];
            for k in 0..16 {
                let h = w[0] + width * (k as f64 + 0.5) / 16.0;
                let (hp, hm) = (h + 1e-7 * width, h - 1e-7 * width);
                let fd = (s.eval_dd(hp) - s.eval_dd(hm)).to_f64() / (hp - hm);
                let exact = clip_area(&p, &f, h) * kappa;
                slope = slope.max((fd - exact).abs() / exact);
            }
        }
    }
    outcome(
        jump <= 1e-10 && slope <= 1e-6,
        format!(
            "worst jump {jump:.2e} (<= 1e-10), worst dV/dh vs area/|grad f| {slope:.2e} (<= 1e-6)"
        ),
    )
}

struct Sweep {
    tree: ContourTree,
    volumes: Vec<SuperarcVolume>,
    total: f64,
}

fn sweep(mesh: &TetMesh) -> Sweep {
    let tree = build_tree(mesh).expect("connected mesh");
    let order = VertexOrder::new(mesh);
    let deltas = compute_deltas(mesh.vertex_count(), &build_tet_splines(mesh, &order));
    let volumes = sweep_volumes(&tree, &deltas).expect("sizes agree");
    let hmax = mesh.values().iter().cloned().fold(f64::MIN, f64::max);
    let total = root_function(&tree, &volumes, &deltas).eval(hmax);
    Sweep {
        tree,
        volumes,
        total,
    }
}

fn conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let mesh = synth::random_grid(8, 100 + seed);
        let s = sweep(&mesh);
        worst = worst.max((s.total - 343.0).abs() / 343.0);
    }
    outcome(
        worst <= 1e-9,
        format!("worst |root(h_max) - volume| / volume over 10 grids = {worst:.2e} (<= 1e-9)"),
    )
}

fn tree_vs_contours() -> Outcome {
    let mut rng = synth::rng(5);
    let (mut trials, mut bad) = (0, 0);
    for seed in 0..20 {
        let mesh = synth::random_grid(8, 200 + seed);
        let tree = build_tree(&mesh).expect("connected grid");
        let mut done = 0;
        while done < 16 {
            let t: f64 = rng.gen();
            if mesh.values().contains(&t) {
                continue;
            }
            done += 1;
            trials += 1;
            if tree.arcs_straddling(t) != reference_contour_count(&mesh, t) {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!("{bad} mismatches in {trials} thresholds on 20 grids"),
    )
}

fn sweep_vs_region() -> Outcome {
    let meshes = [
        synth::jittered_mesh(8, 1),
        synth::random_grid(12, 7),
        synth::jittered_mesh(15, 2),
    ];
    let (mut worst, mut samples): (f64, usize) = (0.0, 0);
    for mesh in &meshes {
        assert!(mesh.vertex_count() <= 4000);
        let s = sweep(mesh);
        for v in &s.volumes {
            for k in 0..8 {
                let h = v.h_lo + (v.h_hi - v.h_lo) * (k as f64 + 0.5) / 8.0;
                if !s.tree.arc_contains(v.arc, h) {
                    continue;
                }
                let oracle = region_volume(mesh, &s.tree, v.arc, h);
                samples += 1;
                worst = worst.max((v.eval(h) - oracle).abs() / oracle);
            }
        }
    }
    outcome(
        worst <= 1e-8,
        format!("worst relative error {worst:.2e} (<= 1e-8) over {samples} samples"),
    )
}

/// Rank of the branch whose upper end is the leaf holding the highest
/// vertex of `x` in `range`.
fn peak_rank(
    mesh: &TetMesh,
    tree: &ContourTree,
    dec: &BranchDecomposition,
    range: (f64, f64),
) -> u32 {
    let v = (0..mesh.vertex_count() as u32)
        .filter(|&v| (range.0..range.1).contains(&mesh.position(v)[0]))
        .max_by(|&a, &b| mesh.value(a).total_cmp(&mesh.value(b)))
        .expect("peak region has vertices");
    let node = tree.supernode_of(v).expect("a peak is a supernode");
    dec.branches()
        .iter()
        .find(|b| b.hi_node == node)
        .expect("peak ends a branch")
        .rank
}

fn volume_vs_count_ranking() -> Outcome {
    let mesh = synth::contrast_mesh();
    let coarse = (0.0, 6.0);
    let fine = (6.0 + 1e-9, 8.0 + 1e-9);
    let mut ranks = Vec::new();
    for method in [WeightMethod::Volume, WeightMethod::Count] {
        let a = analyze(&mesh, method, &mut StageTimings::default()).expect("analysis");
        ranks.push((
            peak_rank(&mesh, &a.tree, &a.decomposition, coarse),
            peak_rank(&mesh, &a.tree, &a.decomposition, fine),
        ));
    }
    let big = (0..mesh.tet_count())
        .filter(|&t| mesh.tet_volume(t) > 0.1)
        .count();
    let ((vc, vf), (cc, cf)) = (ranks[0], ranks[1]);
    outcome(
        vc < vf && cf < cc,
        format!(
            "{big} large / {} small tets; volume ranks coarse peak {vc}, fine peak {vf}; count ranks coarse {cc}, fine {cf}",
            mesh.tet_count() - big
        ),
    )
}

fn isosurfaces() -> Outcome {
    let sphere = weld(&march_tets(&synth::sphere_grid(17), 5.3));
    let chi = sphere.euler_characteristic();
    let closed = sphere.is_closed_manifold();

    let mesh = synth::two_peak_grid(17);
    let tree = build_tree(&mesh).expect("connected");
    // Halfway between the saddle joining the peaks and the lower peak.
    let saddle = (0..tree.supernode_count() as u32)
        .filter(|&s| tree.up_arcs(s).count() == 2)
        .map(|s| tree.supernode_value(s))
        .fold(f64::MIN, f64::max);
    let lower_peak = tree
        .leaves()
        .filter(|&s| tree.down_arcs(s).count() == 1)
        .map(|s| tree.supernode_value(s))
        .fold(f64::MAX, f64::min);
    let h = 0.5 * (saddle + lower_peak);
    let arcs: Vec<u32> = (0..tree.superarc_count() as u32)
        .filter(|&e| tree.arc_contains(e, h))
        .collect();
    let whole = weld(&march_tets(&mesh, h)).component_count();
    let mut singles = arcs.len() == 2;
    let mut tris = 0;
    for &e in &arcs {
        let soup = extract_superarc_contour(&mesh, &tree, e, h).expect("h inside the arc");
        singles &= weld(&soup).component_count() == 1;
        tris += soup.triangle_count();
    }
    let partition = tris == march_tets(&mesh, h).triangle_count();
    outcome(
        chi == 2 && closed && whole == 2 && singles && partition,
        format!(
            "sphere chi {chi}, closed {closed}; two peaks at {h}: {whole} components, {} superarcs each giving one component: {singles}",
            arcs.len()
        ),
    )
}

fn write_tetgen(mesh: &TetMesh, dir: &Path) {
    write_node(
        mesh,
        false,
        &mut std::fs::File::create(dir.join("mesh.node")).unwrap(),
    )
    .unwrap();
    write_ele(
        mesh,
        &mut std::fs::File::create(dir.join("mesh.ele")).unwrap(),
    )
    .unwrap();
    write_field_values(
        mesh.values(),
        &mut std::fs::File::create(dir.join("mesh.field")).unwrap(),
    )
    .unwrap();
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_tetgen(&synth::jittered_mesh(20, 9), dir.path());
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("out{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_ct"))
            .args([
                "run",
                "--node",
                "mesh.node",
                "--ele",
                "mesh.ele",
                "--field",
                "mesh.field",
                "--top",
                "4",
            ])
            .args(["--threads", threads, "--out"])
            .arg(&out)
            .current_dir(dir.path())
            .output()
            .expect("ct runs");
        if !status.status.success() {
            return outcome(
                false,
                format!("ct run failed: {}", String::from_utf8_lossy(&status.stderr)),
            );
        }
        let files: Vec<Vec<u8>> = ["tree.json", "weights.csv", "branches.json"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    let same = outputs[0] == outputs[1];
    let bytes: usize = outputs[0].iter().map(Vec::len).sum();
    outcome(same, format!("tree.json, weights.csv, branches.json identical for 1 and 8 threads: {same} ({bytes} bytes)"))
}

fn performance() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mesh = synth::jittered_mesh(46, 11);
    write_tetgen(&mesh, dir.path());
    let config = PipelineConfig {
        input: MeshInput::Tetgen {
            node: dir.path().join("mesh.node"),
            ele: dir.path().join("mesh.ele"),
            field: FieldSource::ValuesFile(dir.path().join("mesh.field")),
        },
        weights: WeightMethod::Volume,
        top_k: 6,
        isovalues: vec![],
        out_dir: dir.path().join("out"),
        threads: None,
    };
    let start = Instant::now();
    let result = run(&config);
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(s) => outcome(
            secs < 60.0,
            format!(
                "{} vertices, {} tets, {} superarcs in {secs:.2} s (< 60 s)",
                s.vertices, s.tets, s.superarcs
            ),
        ),
        Err(e) => outcome(false, format!("pipeline failed: {e}")),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("per-tet spline vs clipping oracle", spline_vs_oracle),
        ("unit tet reference values", unit_tet_values),
        ("continuity and co-area", continuity_and_coarea),
        ("conservation of total volume", conservation),
        ("tree vs contour components", tree_vs_contours),
        ("superarc volumes vs region oracle", sweep_vs_region),
        ("volume vs node-count ranking", volume_vs_count_ranking),
        ("isosurface topology and filtering", isosurfaces),
        ("determinism across thread counts", determinism),
        ("100K-vertex pipeline budget", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.passed);
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}

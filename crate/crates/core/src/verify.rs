//! Seeded self-checks of the analytic volume path against brute-force
//! references; each check reports its worst observed error.

use std::fmt;

use rand::Rng;

use crate::geometry::{sort_tet_vertices, TetFrame, TetSpline};
use crate::hypersweep::{build_tet_splines, compute_deltas, root_function, sweep_volumes};
use crate::isosurface::{march_tets, weld};
use crate::mesh::{Point3, TetMesh, VertexOrder};
use crate::oracle::{clip_area, clip_volume, reference_contour_count, region_volume};
use crate::pipeline::build_tree;
use crate::synth;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random tets for the spline checks.
    pub tets: usize,
    /// Random grids for the tree and sweep checks.
    pub grids: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            tets: 1000,
            grids: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e}, tolerance {tol:.0e}"),
    }
}

pub fn tet_spline(p: [Point3; 4], f: [f64; 4]) -> TetSpline {
    let order = VertexOrder::from_values(&f);
    let s = sort_tet_vertices([0, 1, 2, 3], &order);
    TetSpline::from_frame(&TetFrame::new(
        s,
        s.map(|v| p[v as usize]),
        s.map(|v| f[v as usize]),
    ))
}

/// Relative error of the spline against the clipping oracle, scaled by tet volume.
fn spline_vs_oracle(cfg: &VerifyConfig) -> Check {
    let mut rng = synth::rng(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.tets {
        let (p, f) = synth::random_tet(&mut rng);
        let s = tet_spline(p, f);
        let [ha, .., hd] = s.breakpoints();
        for _ in 0..64 {
            let h = rng.gen_range(ha - 0.05..hd + 0.05);
            worst = worst.max((s.eval(h) - clip_volume(&p, &f, h)).abs() / s.total_volume());
        }
    }
    check("spline matches clipped volume", worst, 1e-9)
}

fn unit_tet() -> Check {
    let p = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let f = [0.0, 1.0, 2.0, 3.0];
    let s = tet_spline(p, f);
    let o = clip_volume(&p, &f, 1.5);
    let worst = [
        (s.eval(1.0) - 1.0 / 36.0).abs() * 36.0,
        (s.eval(3.0) - 1.0 / 6.0).abs() * 6.0,
        (s.eval(1.5) - o).abs() / o,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    check("unit tet reference values", worst, 1e-10)
}

fn continuity_and_coarea(cfg: &VerifyConfig) -> Check {
    let mut rng = synth::rng(cfg.seed ^ 0x5eed);
    let (mut jump, mut slope): (f64, f64) = (0.0, 0.0);
    for _ in 0..cfg.tets {
        let (p, f) = synth::random_tet(&mut rng);
        let s = tet_spline(p, f);
        let [p1, p2, p3] = s.pieces();
        let bp = s.breakpoints();
        let tv = s.total_volume();
        jump = jump.max((p1.eval(bp[1]) - p2.eval(bp[1])).abs() / tv);
        jump = jump.max((p2.eval(bp[2]) - p3.eval(bp[2])).abs() / tv);
        let kappa = s.inverse_gradient();
        for w in bp.windows(2) {
            let width = w[1] - w[0];
            if width <= 0.0 {
                continue;
            }
            for k in 0..16 {
                let h = w[0] + width * (k as f64 + 0.5) / 16.0;
                let (hp, hm) = (h + 1e-7 * width, h - 1e-7 * width);
                let fd = (s.eval_dd(hp) - s.eval_dd(hm)).to_f64() / (hp - hm);
                let exact = clip_area(&p, &f, h) * kappa;
                slope = slope.max((fd - exact).abs() / exact);
            }
        }
    }
    Check {
        name: "continuity and co-area slope",
        passed: jump <= 1e-10 && slope <= 1e-6,
        detail: format!(
            "worst jump {jump:.3e} (tolerance 1e-10), worst slope {slope:.3e} (tolerance 1e-6)"
        ),
    }
}

fn sweep_setup(
    mesh: &TetMesh,
) -> (
    crate::contour_tree::ContourTree,
    Vec<crate::hypersweep::SuperarcVolume>,
    f64,
) {
    let tree = build_tree(mesh).expect("synthetic grids are connected");
    let order = VertexOrder::new(mesh);
    let deltas = compute_deltas(mesh.vertex_count(), &build_tet_splines(mesh, &order));
    let volumes = sweep_volumes(&tree, &deltas).expect("sizes agree");
    let total = root_function(&tree, &volumes, &deltas).eval(0.0);
    (tree, volumes, total)
}

fn conservation(cfg: &VerifyConfig) -> Check {
    let mut worst: f64 = 0.0;
    for g in 0..cfg.grids {
        let mesh = synth::jittered_mesh(8, cfg.seed.wrapping_add(g as u64));
        let (_, _, total) = sweep_setup(&mesh);
        worst = worst.max((total - mesh.total_volume()).abs() / mesh.total_volume());
    }
    check("accumulated deltas give total volume", worst, 1e-9)
}

fn tree_vs_contours(cfg: &VerifyConfig) -> Check {
    let mut rng = synth::rng(cfg.seed ^ 0x7ee);
    let mut mismatches = 0;
    let mut trials = 0;
    for g in 0..cfg.grids {
        let mesh = synth::random_grid(8, cfg.seed.wrapping_add(1000 + g as u64));
        let tree = build_tree(&mesh).expect("grid is connected");
        for _ in 0..16 {
            let t: f64 = rng.gen();
            trials += 1;
            if tree.arcs_straddling(t) != reference_contour_count(&mesh, t) {
                mismatches += 1;
            }
        }
    }
    Check {
        name: "straddling superarcs equal contour count",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in {trials} thresholds"),
    }
}

fn sweep_vs_region(cfg: &VerifyConfig) -> Check {
    let mut worst: f64 = 0.0;
    for g in 0..cfg.grids.min(3) {
        let mesh = synth::jittered_mesh(8, cfg.seed.wrapping_add(2000 + g as u64));
        let (tree, volumes, total) = sweep_setup(&mesh);
        for v in &volumes {
            if v.h_hi <= v.h_lo {
                continue;
            }
            for k in 0..8 {
                let h = v.h_lo + (v.h_hi - v.h_lo) * (k as f64 + 0.5) / 8.0;
                let oracle = region_volume(&mesh, &tree, v.arc, h);
                worst = worst.max((v.eval(h) - oracle).abs() / oracle.max(1e-12 * total));
            }
        }
    }
    check("superarc volumes match region oracle", worst, 1e-8)
}

fn sphere_surface() -> Check {
    let mesh = synth::sphere_grid(17);
    let w = weld(&march_tets(&mesh, 5.3));
    let chi = w.euler_characteristic();
    Check {
        name: "sphere isosurface is closed with Euler characteristic 2",
        passed: chi == 2 && w.is_closed_manifold(),
        detail: format!("chi {chi}, closed {}", w.is_closed_manifold()),
    }
}

pub fn verify(cfg: &VerifyConfig) -> Vec<Check> {
    vec![
        spline_vs_oracle(cfg),
        unit_tet(),
        continuity_and_coarea(cfg),
        conservation(cfg),
        tree_vs_contours(cfg),
        sweep_vs_region(cfg),
        sphere_surface(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let checks = verify(&VerifyConfig {
            seed: 3,
            tets: 50,
            grids: 2,
        });
        assert_eq!(checks.len(), 7);
        for c in &checks {
            assert!(c.passed, "{c}");
        }
    }
}

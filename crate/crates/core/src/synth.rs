//! Seeded synthetic meshes and fields for tests, benchmarks and `gen`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{cross, dot, grid_to_tets, sub, GridDims, Point3, TetMesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A tet with corners and values uniform in the unit cube / interval,
/// redrawn until its volume is at least `1e-3`.
pub fn random_tet(rng: &mut ChaCha8Rng) -> ([Point3; 4], [f64; 4]) {
    loop {
        let p: [Point3; 4] = std::array::from_fn(|_| [rng.gen(), rng.gen(), rng.gen()]);
        let vol = dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0]))).abs() / 6.0;
        if vol >= 1e-3 {
            return (p, std::array::from_fn(|_| rng.gen()));
        }
    }
}

fn grid_values(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let mut vals = Vec::with_capacity(n * n * n);
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                vals.push(f(x as f64, y as f64, z as f64));
            }
        }
    }
    vals
}

fn cube_grid(n: usize, values: &[f64]) -> TetMesh {
    grid_to_tets(GridDims::new(n, n, n), values, [1.0; 3]).expect("synthetic grids are valid")
}

/// `n^3` unit-spaced grid with i.i.d. uniform values in `[0, 1)`.
pub fn random_grid(n: usize, seed: u64) -> TetMesh {
    let mut r = rng(seed);
    let vals: Vec<f64> = (0..n * n * n).map(|_| r.gen()).collect();
    cube_grid(n, &vals)
}

/// Distance from the grid centre.
pub fn sphere_grid(n: usize) -> TetMesh {
    let c = (n - 1) as f64 / 2.0;
    cube_grid(
        n,
        &grid_values(n, |x, y, z| {
            ((x - c).powi(2) + (y - c).powi(2) + (z - c).powi(2)).sqrt()
        }),
    )
}

/// Two Gaussian bumps along x, the left one taller, on an `n^3` grid.
pub fn two_peak_grid(n: usize) -> TetMesh {
    let s = (n - 1) as f64;
    let (c, w) = (s / 2.0, (s / 6.0).powi(2) * 2.0);
    cube_grid(
        n,
        &grid_values(n, |x, y, z| {
            let r2 = |x0: f64| ((x - x0).powi(2) + (y - c).powi(2) + (z - c).powi(2)) / w;
            (-r2(s / 4.0)).exp() + 0.8 * (-r2(3.0 * s / 4.0)).exp()
        }),
    )
}

/// Smooth random field (a sum of Gaussian bumps plus small noise) on an
/// `n^3` grid whose interior vertices are displaced by up to `0.2` spacing
/// per axis, so tet volumes vary.
pub fn jittered_mesh(n: usize, seed: u64) -> TetMesh {
    let mut r = rng(seed);
    let s = (n - 1) as f64;
    let bumps: Vec<(Point3, f64, f64)> = (0..12)
        .map(|_| {
            let centre = [r.gen::<f64>() * s, r.gen::<f64>() * s, r.gen::<f64>() * s];
            let height = r.gen_range(-1.0..1.0);
            let width = r.gen_range(0.05..0.2) * s;
            (centre, height, width)
        })
        .collect();
    let mut vals = grid_values(n, |x, y, z| {
        bumps
            .iter()
            .map(|(c, a, w)| {
                a * (-((x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2)) / (w * w))
                    .exp()
            })
            .sum()
    });
    for v in &mut vals {
        *v += 1e-3 * r.gen::<f64>();
    }
    let mesh = cube_grid(n, &vals);
    let positions = mesh
        .positions()
        .iter()
        .map(|p| {
            p.map(|x| {
                if x > 0.0 && x < s {
                    x + r.gen_range(-0.2..0.2)
                } else {
                    x
                }
            })
        })
        .collect();
    mesh.with_positions(positions)
        .expect("jitter below a quarter spacing keeps tets positive")
}

/// Value of the first (taller, coarsely meshed) peak in [`contrast_mesh`].
pub const CONTRAST_COARSE_PEAK: f64 = 10.0;
/// Value of the second (lower, finely meshed) peak in [`contrast_mesh`].
pub const CONTRAST_FINE_PEAK: f64 = 8.0;

/// Two peaks on a `1 x 1` slab along x. The taller one at `x = 3` spans
/// `0 <= x <= 6` in two coarse cells (12 tets); the lower one at `x = 7`
/// spans `6 <= x <= 8` in sixteen fine cells (96 tets). The first occupies
/// three times the volume while the second owns many more vertices.
pub fn contrast_mesh() -> TetMesh {
    let mut xs = vec![0.0, 3.0, 6.0];
    xs.extend((1..=16).map(|i| 6.0 + 0.125 * i as f64));
    let g = |x: f64| {
        if x <= 6.0 {
            CONTRAST_COARSE_PEAK * (1.0 - (x - 3.0).abs() / 3.0)
        } else {
            CONTRAST_FINE_PEAK * (1.0 - (x - 7.0).abs())
        }
    };
    let dims = GridDims::new(xs.len(), 2, 2);
    let mut positions = Vec::new();
    let mut values = Vec::new();
    for z in 0..2 {
        for y in 0..2 {
            for &x in &xs {
                let (y, z) = (y as f64, z as f64);
                positions.push([x, y, z]);
                values.push(g(x) + 0.01 * (y + z) + 0.001 * x);
            }
        }
    }
    let mesh = grid_to_tets(dims, &values, [1.0; 3]).expect("valid grid");
    mesh.with_positions(positions)
        .expect("monotone per-axis stretch keeps tets positive")
}

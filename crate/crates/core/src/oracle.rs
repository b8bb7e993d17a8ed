//! Reference computations by direct geometric clipping.
//!
//! Nothing here shares code with the spline or sweep machinery; these
//! routines exist to check it. They are slow and meant for tests and the
//! `verify` command.

use crate::contour_tree::{ContourTree, UnionFind};
use crate::mesh::{cross, dot, norm, sub, Point3, TetMesh};

const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn lerp(a: Point3, b: Point3, t: f64) -> Point3 {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

/// Point where the linear interpolant along `a -> b` equals `h`; requires
/// `fa != fb`.
fn crossing(a: Point3, fa: f64, b: Point3, fb: f64, h: f64) -> Point3 {
    lerp(a, b, (h - fa) / (fb - fa))
}

/// Clips a polygon with per-vertex values to `{f <= h}`.
fn clip_polygon(poly: &[(Point3, f64)], h: f64) -> Vec<(Point3, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, fp) = poly[i];
        let (q, fq) = poly[(i + 1) % poly.len()];
        let p_in = fp <= h;
        let q_in = fq <= h;
        if p_in {
            out.push((p, fp));
        }
        if p_in != q_in && fp != fq {
            let x = crossing(p, fp, q, fq, h);
            if !(p_in && fp == h) && !(q_in && fq == h) {
                out.push((x, h));
            }
        }
    }
    out
}

fn centroid(points: &[Point3]) -> Point3 {
    let mut c = [0.0; 3];
    for p in points {
        for k in 0..3 {
            c[k] += p[k];
        }
    }
    let n = points.len().max(1) as f64;
    [c[0] / n, c[1] / n, c[2] / n]
}

/// Points of the level set `f = h` on the tet's edges and vertices, ordered
/// by angle around their centroid.
fn cap_polygon(p: &[Point3; 4], f: &[f64; 4], h: f64) -> Vec<Point3> {
    let mut pts: Vec<Point3> = (0..4).filter(|&i| f[i] == h).map(|i| p[i]).collect();
    for &(i, j) in &TET_EDGES {
        let (lo, hi) = if f[i] < f[j] { (i, j) } else { (j, i) };
        if f[lo] < h && h < f[hi] {
            pts.push(crossing(p[lo], f[lo], p[hi], f[hi], h));
        }
    }
    if pts.len() < 3 {
        return pts;
    }
    let c = centroid(&pts);
    // The level plane's normal is the field gradient direction; any normal
    // to the point set works for angular sorting.
    let mut normal = [0.0; 3];
    for i in 0..pts.len() {
        let n = cross(sub(pts[i], c), sub(pts[(i + 1) % pts.len()], c));
        let n = if dot(n, normal) < 0.0 {
            [-n[0], -n[1], -n[2]]
        } else {
            n
        };
        for k in 0..3 {
            normal[k] += n[k];
        }
    }
    let u = {
        let mut best = sub(pts[0], c);
        for q in &pts {
            let d = sub(*q, c);
            if norm(d) > norm(best) {
                best = d;
            }
        }
        best
    };
    let v = cross(normal, u);
    let mut keyed: Vec<(f64, Point3)> = pts
        .iter()
        .map(|q| (dot(sub(*q, c), v).atan2(dot(sub(*q, c), u)), *q))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, q)| q).collect()
}

fn polygon_area(poly: &[Point3]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = [0.0; 3];
    for i in 1..poly.len() - 1 {
        let n = cross(sub(poly[i], poly[0]), sub(poly[i + 1], poly[0]));
        for k in 0..3 {
            s[k] += n[k];
        }
    }
    0.5 * norm(s)
}

/// Volume of `{x in tet : f(x) <= h}` for the linear interpolant of the
/// vertex values `f`.
pub fn clip_volume(p: &[Point3; 4], f: &[f64; 4], h: f64) -> f64 {
    let below = f.iter().filter(|&&x| x <= h).count();
    if below == 0 {
        return 0.0;
    }
    let full = dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0]))).abs() / 6.0;
    if below == 4 {
        return full;
    }
    let mut faces: Vec<Vec<Point3>> = TET_FACES
        .iter()
        .map(|face| {
            let poly: Vec<(Point3, f64)> = face.iter().map(|&i| (p[i], f[i])).collect();
            clip_polygon(&poly, h)
                .into_iter()
                .map(|(q, _)| q)
                .collect::<Vec<_>>()
        })
        .filter(|poly: &Vec<Point3>| poly.len() >= 3)
        .collect();
    faces.push(cap_polygon(p, f, h));
    let all: Vec<Point3> = faces.iter().flatten().copied().collect();
    let c = centroid(&all);
    let mut vol = 0.0;
    for face in &faces {
        if face.len() < 3 {
            continue;
        }
        for i in 1..face.len() - 1 {
            let a = sub(face[0], c);
            let b = sub(face[i], c);
            let d = sub(face[i + 1], c);
            vol += dot(a, cross(b, d)).abs() / 6.0;
        }
    }
    vol
}

/// Area of the level-set polygon `{f = h}` inside the tet.
pub fn clip_area(p: &[Point3; 4], f: &[f64; 4], h: f64) -> f64 {
    polygon_area(&cap_polygon(p, f, h))
}

fn tet_points(mesh: &TetMesh, t: usize) -> ([Point3; 4], [f64; 4]) {
    let tet = mesh.tets()[t];
    (tet.map(|v| mesh.position(v)), tet.map(|v| mesh.value(v)))
}

/// Volume of the region cut off by `arc`'s contour at `h` on the side away
/// from the root. Tets entirely on one side count fully or not at all;
/// tets with vertices on both sides are clipped at `h` on the region's side.
pub fn region_volume(mesh: &TetMesh, tree: &ContourTree, arc: u32, h: f64) -> f64 {
    let mask = tree.child_side_mask(arc, h);
    let lower = tree.child_is_lower(arc);
    let mut total = 0.0;
    for (t, tet) in mesh.tets().iter().enumerate() {
        let inside = tet.iter().filter(|&&v| mask[v as usize]).count();
        if inside == 0 {
            continue;
        }
        let (p, f) = tet_points(mesh, t);
        let full = mesh.tet_volume(t);
        total += if inside == 4 {
            full
        } else if lower {
            clip_volume(&p, &f, h)
        } else {
            clip_volume(&p, &f.map(|x| -x), -h)
        };
    }
    total
}

/// Volume of the whole sublevel set `{f <= h}`.
pub fn sublevel_volume(mesh: &TetMesh, h: f64) -> f64 {
    (0..mesh.tet_count())
        .map(|t| {
            let (p, f) = tet_points(mesh, t);
            clip_volume(&p, &f, h)
        })
        .sum()
}

/// Total area of the level set `{f = h}`.
pub fn level_set_area(mesh: &TetMesh, h: f64) -> f64 {
    (0..mesh.tet_count())
        .map(|t| {
            let (p, f) = tet_points(mesh, t);
            clip_area(&p, &f, h)
        })
        .sum()
}

/// Connected components of the level set `{f = h}` for an `h` that is not a
/// vertex value. Two tets crossed by the level set share a component when
/// they share a face that the level set also crosses. Returns the component
/// label of every tet (`None` if uncrossed) and the component count.
pub fn reference_contour_labels(mesh: &TetMesh, h: f64) -> (Vec<Option<u32>>, usize) {
    let tets = mesh.tets();
    let crossed = |t: &[u32; 4]| {
        let below = t.iter().filter(|&&v| mesh.value(v) < h).count();
        below > 0 && below < 4
    };
    let mut faces: Vec<([u32; 3], u32)> = Vec::new();
    for (ti, t) in tets.iter().enumerate() {
        if !crossed(t) {
            continue;
        }
        for face in TET_FACES {
            let mut key = face.map(|i| t[i]);
            let below = key.iter().filter(|&&v| mesh.value(v) < h).count();
            if below == 0 || below == 3 {
                continue;
            }
            key.sort_unstable();
            faces.push((key, ti as u32));
        }
    }
    faces.sort_unstable();
    let mut uf = UnionFind::new(tets.len());
    for w in faces.windows(2) {
        if w[0].0 == w[1].0 {
            let (a, b) = (uf.find(w[0].1), uf.find(w[1].1));
            if a != b {
                uf.union_roots(a, b);
            }
        }
    }
    let mut label_of_root = vec![u32::MAX; tets.len()];
    let mut count = 0u32;
    let labels = tets
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            if !crossed(t) {
                return None;
            }
            let r = uf.find(ti as u32) as usize;
            if label_of_root[r] == u32::MAX {
                label_of_root[r] = count;
                count += 1;
            }
            Some(label_of_root[r])
        })
        .collect();
    (labels, count as usize)
}

pub fn reference_contour_count(mesh: &TetMesh, h: f64) -> usize {
    reference_contour_labels(mesh, h).1
}

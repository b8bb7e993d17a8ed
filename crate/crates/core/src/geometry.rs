//! Per-tetrahedron sublevel volume `V(h) = |{x in tet : f(x) <= h}|` as a
//! three-piece cubic spline, and the cross-section area as a three-piece
//! quadratic.
//!
//! With vertices relabelled `A, B, C, D` by ascending rank:
//! * on `[h_A, h_B)` the sublevel set is a corner tet similar to `ABEF`
//!   (`E` on `AD`, `F` on `AC` at `h_B`) scaled by `(h - h_A)/(h_B - h_A)`;
//! * on `[h_C, h_D)` the superlevel set is a corner tet similar to `DCGH`
//!   (`G` on `AD`, `H` on `BD` at `h_C`);
//! * on `[h_B, h_C)` the cross-section is a quad `PQRS` whose sides vary
//!   linearly in `h`, so its area is quadratic and the volume is its
//!   integral times `1/|grad f|`.

use crate::mesh::{cross, dot, norm, sub, Point3, TetMesh, VertexOrder};
use crate::numeric::Dd;
use crate::poly::CubicPoly;

fn lerp(a: Point3, b: Point3, t: f64) -> Point3 {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

fn dist(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

/// Point on segment `a -> b` where the interpolated value is `h`.
fn on_edge(a: Point3, ha: f64, b: Point3, hb: f64, h: f64) -> Point3 {
    lerp(a, b, (h - ha) / (hb - ha))
}

fn sine_between(u: Point3, v: Point3) -> f64 {
    let s = norm(cross(u, v)) / (norm(u) * norm(v));
    s.min(1.0)
}

fn volume_of(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    dot(sub(b, a), cross(sub(c, a), sub(d, a))).abs() / 6.0
}

fn triangle_area(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

/// Tet vertex ids sorted by ascending rank.
pub fn sort_tet_vertices(tet: [u32; 4], order: &VertexOrder) -> [u32; 4] {
    let mut t = tet;
    t.sort_unstable_by_key(|&v| order.rank_of(v));
    t
}

/// A tet with vertices in rank order and the contour points at `h_B` and `h_C`.
#[derive(Clone, Debug)]
pub struct TetFrame {
    pub vertices: [u32; 4],
    pub p: [Point3; 4],
    pub h: [f64; 4],
    /// On `AD` at `h_B`.
    pub e: Point3,
    /// On `AC` at `h_B`.
    pub f: Point3,
    /// On `AD` at `h_C`.
    pub g: Point3,
    /// On `BD` at `h_C`.
    pub hh: Point3,
}

impl TetFrame {
    pub fn new(vertices: [u32; 4], p: [Point3; 4], h: [f64; 4]) -> Self {
        let [a, b, c, d] = p;
        let [ha, hb, hc, hd] = h;
        let (e, f) = if ha == hb {
            (a, a)
        } else {
            (on_edge(a, ha, d, hd, hb), on_edge(a, ha, c, hc, hb))
        };
        let (g, hh) = if hc == hd {
            (d, d)
        } else {
            (on_edge(a, ha, d, hd, hc), on_edge(b, hb, d, hd, hc))
        };
        TetFrame {
            vertices,
            p,
            h,
            e,
            f,
            g,
            hh,
        }
    }

    pub fn from_mesh(mesh: &TetMesh, order: &VertexOrder, tet: usize) -> Self {
        let vertices = sort_tet_vertices(mesh.tets()[tet], order);
        Self::new(
            vertices,
            vertices.map(|v| mesh.position(v)),
            vertices.map(|v| mesh.value(v)),
        )
    }

    pub fn total_volume(&self) -> f64 {
        let [a, b, c, d] = self.p;
        volume_of(a, b, c, d)
    }

    /// Sublevel volume at `h_B`.
    pub fn volume_abef(&self) -> f64 {
        volume_of(self.p[0], self.p[1], self.e, self.f)
    }

    /// Superlevel volume at `h_C`.
    pub fn volume_dcgh(&self) -> f64 {
        volume_of(self.p[3], self.p[2], self.g, self.hh)
    }

    pub fn area_bef(&self) -> f64 {
        triangle_area(self.p[1], self.e, self.f)
    }

    pub fn area_cgh(&self) -> f64 {
        triangle_area(self.p[2], self.g, self.hh)
    }

    /// `1/|grad f|` of the linear interpolant; infinite for a constant field.
    pub fn inverse_gradient(&self) -> f64 {
        let [a, b, c, d] = self.p;
        let (ab, ac, ad) = (sub(b, a), sub(c, a), sub(d, a));
        let det = dot(ab, cross(ac, ad));
        // grad = sum_i (h_i - h_A) * (dual basis vector i).
        let duals = [cross(ac, ad), cross(ad, ab), cross(ab, ac)];
        let dh = [
            self.h[1] - self.h[0],
            self.h[2] - self.h[0],
            self.h[3] - self.h[0],
        ];
        let mut grad = [0.0; 3];
        for (k, dual) in duals.iter().enumerate() {
            for i in 0..3 {
                grad[i] += dh[k] * dual[i] / det;
            }
        }
        1.0 / norm(grad)
    }
}

/// Quadratic area `alpha h^2 + beta h + gamma` of the mid-range quad and the
/// co-area factor `kappa = 1/|grad f|`. Requires `h_B < h_C`.
struct MidQuad {
    area: [Dd; 3],
    kappa: Dd,
}

fn mid_quad(fr: &TetFrame) -> MidQuad {
    let [a, b, c, d] = fr.p;
    let [ha, hb, hc, hd] = fr.h;
    let (e, f, g, hh) = (fr.e, fr.f, fr.g, fr.hh);
    let be = dist(b, e);
    let ef = dist(e, f);
    let bf = dist(b, f);
    let hg = dist(hh, g);
    let hcl = dist(hh, c);
    let gc = dist(g, c);

    // The quad halfway between h_B and h_C fixes the angles and the level
    // plane without relying on the (possibly collapsed) bounding contours.
    let hm = 0.5 * (hb + hc);
    let pp = on_edge(b, hb, d, hd, hm);
    let qq = on_edge(a, ha, d, hd, hm);
    let rr = on_edge(a, ha, c, hc, hm);
    let ss = on_edge(b, hb, c, hc, hm);
    let sin_theta = sine_between(sub(qq, pp), sub(ss, pp));
    let sin_phi = sine_between(sub(qq, rr), sub(ss, rr));
    let n = cross(sub(rr, pp), sub(qq, ss));
    let n = {
        let l = norm(n);
        [n[0] / l, n[1] / l, n[2] / l]
    };
    let delta = dot(n, sub(b, hh)).abs();

    let w = Dd::diff(hc, hb);
    let hb_dd = Dd::new(hb);
    // Side lengths as linear forms m h + c in the isovalue.
    let line = |at_b: f64, at_c: f64| -> (Dd, Dd) {
        let m = Dd::diff(at_c, at_b) / w;
        (m, Dd::new(at_b) - m * hb_dd)
    };
    let (m1, c1) = line(be, hg); // PQ
    let (m2, c2) = line(0.0, hcl); // PS
    let (m3, c3) = line(ef, gc); // RQ
    let (m4, c4) = line(bf, 0.0); // RS
    let st = Dd::new(0.5 * sin_theta);
    let sp = Dd::new(0.5 * sin_phi);
    let alpha = st * (m1 * m2) + sp * (m3 * m4);
    let beta = st * (m1 * c2 + c1 * m2) + sp * (m3 * c4 + c3 * m4);
    let gamma = st * (c1 * c2) + sp * (c3 * c4);
    MidQuad {
        area: [alpha, beta, gamma],
        kappa: Dd::new(delta) / w,
    }
}

/// Three-piece cubic sublevel-volume spline of one tet.
#[derive(Clone, Debug)]
pub struct TetSpline {
    vertices: [u32; 4],
    breakpoints: [f64; 4],
    pieces: [CubicPoly; 3],
    area: [CubicPoly; 3],
    total: f64,
    inv_grad: f64,
}

pub fn low_range_piece(fr: &TetFrame) -> CubicPoly {
    let [ha, hb, ..] = fr.h;
    if ha == hb {
        return CubicPoly::ZERO;
    }
    let w = Dd::diff(hb, ha);
    CubicPoly::scaled_cube(Dd::new(fr.volume_abef()) / w.powi(3), ha)
}

pub fn high_range_piece(fr: &TetFrame) -> CubicPoly {
    let [.., hc, hd] = fr.h;
    let total = CubicPoly::constant(fr.total_volume());
    if hc == hd {
        return total;
    }
    let w = Dd::diff(hd, hc);
    // (h_D - h)^3 = -(h - h_D)^3.
    total + CubicPoly::scaled_cube(Dd::new(fr.volume_dcgh()) / w.powi(3), hd)
}

pub fn mid_range_piece(fr: &TetFrame) -> CubicPoly {
    let [_, hb, hc, _] = fr.h;
    let start = Dd::new(fr.volume_abef());
    if hb == hc {
        return CubicPoly::constant_dd(start);
    }
    let q = mid_quad(fr);
    let [alpha, beta, gamma] = q.area;
    let shape = CubicPoly::from_dd([Dd::ZERO, alpha, beta, gamma])
        .integrate_quadratic()
        .scale(q.kappa);
    shape.with_constant(start - shape.eval_dd(hb))
}

impl TetSpline {
    pub fn from_frame(fr: &TetFrame) -> Self {
        let [ha, hb, hc, hd] = fr.h;
        let low_area = if ha == hb {
            CubicPoly::ZERO
        } else {
            CubicPoly::scaled_square(Dd::new(fr.area_bef()) / Dd::diff(hb, ha).powi(2), ha)
        };
        let mid_area = if hb == hc {
            CubicPoly::ZERO
        } else {
            let [alpha, beta, gamma] = mid_quad(fr).area;
            CubicPoly::from_dd([Dd::ZERO, alpha, beta, gamma])
        };
        let high_area = if hc == hd {
            CubicPoly::ZERO
        } else {
            CubicPoly::scaled_square(Dd::new(fr.area_cgh()) / Dd::diff(hd, hc).powi(2), hd)
        };
        TetSpline {
            vertices: fr.vertices,
            breakpoints: fr.h,
            pieces: [
                low_range_piece(fr),
                mid_range_piece(fr),
                high_range_piece(fr),
            ],
            area: [low_area, mid_area, high_area],
            total: fr.total_volume(),
            inv_grad: fr.inverse_gradient(),
        }
    }

    /// Tet vertex ids in ascending rank.
    pub fn vertices(&self) -> [u32; 4] {
        self.vertices
    }

    /// `[h_A, h_B, h_C, h_D]`.
    pub fn breakpoints(&self) -> [f64; 4] {
        self.breakpoints
    }

    /// Low, mid and high pieces.
    pub fn pieces(&self) -> &[CubicPoly; 3] {
        &self.pieces
    }

    pub fn area_pieces(&self) -> &[CubicPoly; 3] {
        &self.area
    }

    pub fn total_volume(&self) -> f64 {
        self.total
    }

    pub fn inverse_gradient(&self) -> f64 {
        self.inv_grad
    }

    /// Index of the piece in force at `h` (right-continuous), or `None`
    /// outside `[h_A, h_D)`.
    fn piece_index(&self, h: f64) -> Option<usize> {
        let [ha, hb, hc, hd] = self.breakpoints;
        if h < ha || h >= hd {
            None
        } else if h < hb {
            Some(0)
        } else if h < hc {
            Some(1)
        } else {
            Some(2)
        }
    }

    pub fn eval_dd(&self, h: f64) -> Dd {
        match self.piece_index(h) {
            Some(i) => self.pieces[i].eval_dd(h),
            None if h < self.breakpoints[0] => Dd::ZERO,
            None => Dd::new(self.total),
        }
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.eval_dd(h).to_f64()
    }

    /// Cross-section area at `h`; zero outside `[h_A, h_D)`.
    pub fn area_at(&self, h: f64) -> f64 {
        match self.piece_index(h) {
            Some(i) => self.area[i].eval(h),
            None => 0.0,
        }
    }

    /// Coefficient change as the sweep passes each vertex `A, B, C, D`; the
    /// four deltas telescope to the constant total volume.
    pub fn deltas(&self) -> [CubicPoly; 4] {
        let [p1, p2, p3] = self.pieces;
        [p1, p2 - p1, p3 - p2, CubicPoly::constant(self.total) - p3]
    }
}

pub fn build_tet_spline(mesh: &TetMesh, order: &VertexOrder, tet: usize) -> TetSpline {
    TetSpline::from_frame(&TetFrame::from_mesh(mesh, order, tet))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::oracle::{clip_area, clip_volume};

    const UNIT: [Point3; 4] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    fn spline(p: [Point3; 4], h: [f64; 4]) -> TetSpline {
        let vals = h.to_vec();
        let order = VertexOrder::from_values(&vals);
        let sorted = sort_tet_vertices([0, 1, 2, 3], &order);
        TetSpline::from_frame(&TetFrame::new(
            sorted,
            sorted.map(|v| p[v as usize]),
            sorted.map(|v| h[v as usize]),
        ))
    }

    fn random_tet(rng: &mut ChaCha8Rng) -> ([Point3; 4], [f64; 4]) {
        loop {
            let p: [Point3; 4] = std::array::from_fn(|_| [rng.gen(), rng.gen(), rng.gen()]);
            if volume_of(p[0], p[1], p[2], p[3]) > 1e-3 {
                return (p, std::array::from_fn(|_| rng.gen()));
            }
        }
    }

    #[test]
    fn sort_by_rank_with_ties() {
        let o = VertexOrder::from_values(&[3.0, 1.0, 2.0, 0.0]);
        assert_eq!(sort_tet_vertices([0, 1, 2, 3], &o), [3, 1, 2, 0]);
        let o = VertexOrder::from_values(&[5.0; 4]);
        assert_eq!(sort_tet_vertices([2, 0, 3, 1], &o), [0, 1, 2, 3]);
    }

    #[test]
    fn unit_tet_values() {
        let s = spline(UNIT, [0.0, 1.0, 2.0, 3.0]);
        let fr = TetFrame::new([0, 1, 2, 3], UNIT, [0.0, 1.0, 2.0, 3.0]);
        assert!((fr.e[2] - 1.0 / 3.0).abs() < 1e-15 && fr.e[0] == 0.0 && fr.e[1] == 0.0);
        assert!((fr.f[1] - 0.5).abs() < 1e-15);
        assert!((fr.volume_abef() - 1.0 / 36.0).abs() < 1e-16);
        assert!((s.eval(0.5) - 1.0 / 288.0).abs() < 1e-16);
        assert!((s.eval(1.0) - 1.0 / 36.0).abs() < 1e-16);
        assert!((s.eval(3.0) - 1.0 / 6.0).abs() < 1e-16);
        let oracle = clip_volume(&UNIT, &[0.0, 1.0, 2.0, 3.0], 1.5);
        assert!((s.eval(1.5) - oracle).abs() <= 1e-10 * oracle);
        let oracle = clip_volume(&UNIT, &[0.0, 1.0, 2.0, 3.0], 2.5);
        assert!((s.eval(2.5) - oracle).abs() <= 1e-12);
        assert_eq!(s.eval(-1.0), 0.0);
        assert_eq!(s.eval(7.0), 1.0 / 6.0);
        assert!((s.area_at(1.0) - fr.area_bef()).abs() < 1e-15);
        assert_eq!(s.area_at(0.0), 0.0);
    }

    #[test]
    fn matches_clipping_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (p, f) = random_tet(&mut rng);
            let s = spline(p, f);
            let [ha, .., hd] = s.breakpoints();
            for k in 0..64 {
                let h = ha - 0.05 + (hd - ha + 0.1) * (k as f64 + 0.5) / 64.0;
                let v = s.eval(h);
                let o = clip_volume(&p, &f, h);
                assert!(
                    (v - o).abs() <= 1e-9 * s.total_volume(),
                    "h={h}: {v} vs {o}"
                );
                let a = s.area_at(h);
                let oa = clip_area(&p, &f, h);
                assert!(
                    (a - oa).abs() <= 1e-9 * oa.max(1e-6),
                    "area h={h}: {a} vs {oa}"
                );
            }
        }
    }

    #[test]
    fn continuity_and_coarea() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let (p, f) = random_tet(&mut rng);
            let s = spline(p, f);
            let [p1, p2, p3] = s.pieces();
            let [ha, hb, hc, hd] = s.breakpoints();
            let tv = s.total_volume();
            assert!((p1.eval(hb) - p2.eval(hb)).abs() <= 1e-10 * tv);
            assert!((p2.eval(hc) - p3.eval(hc)).abs() <= 1e-10 * tv);
            assert!(p1.eval(ha).abs() <= 1e-12 * tv);
            assert!((p3.eval(hd) - tv).abs() <= 1e-12 * tv);
            let kappa = s.inverse_gradient();
            for (lo, hi) in [(ha, hb), (hb, hc), (hc, hd)] {
                let width = hi - lo;
                if width < 1e-3 {
                    continue;
                }
                for k in 0..16 {
                    let h = lo + width * (k as f64 + 0.5) / 16.0;
                    let eps = 1e-6 * width;
                    let fd = (s.eval(h + eps) - s.eval(h - eps)) / (2.0 * eps);
                    let exact = s.area_at(h) * kappa;
                    assert!(
                        (fd - exact).abs() <= 1e-6 * exact.max(1e-3 * tv / width),
                        "{fd} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadratic_fit_reproduces_mid_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (p, f) = random_tet(&mut rng);
            let s = spline(p, f);
            let [_, hb, hc, _] = s.breakpoints();
            if hc - hb < 0.05 {
                continue;
            }
            let hs = [
                hb + 0.2 * (hc - hb),
                hb + 0.5 * (hc - hb),
                hb + 0.8 * (hc - hb),
            ];
            let ys = hs.map(|h| clip_area(&p, &f, h));
            // Lagrange form expanded to monomials.
            let mut fit = [0.0; 3];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                let den = (hs[i] - hs[j]) * (hs[i] - hs[k]);
                fit[0] += ys[i] / den;
                fit[1] -= ys[i] * (hs[j] + hs[k]) / den;
                fit[2] += ys[i] * hs[j] * hs[k] / den;
            }
            let [_, alpha, beta, gamma] = s.area_pieces()[1].coeffs();
            let scale = alpha.abs().max(beta.abs()).max(gamma.abs());
            for (x, y) in [alpha, beta, gamma].iter().zip(fit) {
                assert!((x - y).abs() <= 1e-8 * scale, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn ties_collapse_pieces() {
        let s = spline(UNIT, [1.0; 4]);
        assert_eq!(s.eval(0.999), 0.0);
        assert_eq!(s.eval(1.0), 1.0 / 6.0);
        let d: CubicPoly = s.deltas().iter().copied().sum();
        assert_eq!(d.coeffs(), [0.0, 0.0, 0.0, 1.0 / 6.0]);

        for f in [
            [0.0, 0.0, 1.0, 2.0],
            [0.0, 1.0, 1.0, 2.0],
            [0.0, 1.0, 2.0, 2.0],
            [0.0, 0.0, 2.0, 2.0],
        ] {
            let s = spline(UNIT, f);
            for k in 0..50 {
                let h = -0.1 + 2.2 * k as f64 / 49.0;
                assert!(
                    (s.eval(h) - clip_volume(&UNIT, &f, h)).abs() < 1e-14,
                    "{f:?} h={h}"
                );
            }
        }
    }

    #[test]
    fn deltas_telescope() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let (p, f) = random_tet(&mut rng);
            let s = spline(p, f);
            let sum: CubicPoly = s.deltas().iter().copied().sum();
            let [a, b, c, d] = sum.coeffs();
            let scale = s
                .pieces()
                .iter()
                .flat_map(|q| q.coeffs())
                .fold(0.0f64, |m, x| m.max(x.abs()));
            for x in [a, b, c] {
                assert!(x.abs() <= 1e-28 * scale, "{x} vs scale {scale}");
            }
            assert!((d - s.total_volume()).abs() <= 1e-15 * s.total_volume());
        }
    }

    proptest! {
        #[test]
        fn affine_maps_scale_volume(
            m in proptest::array::uniform9(-2.0f64..2.0),
            t in proptest::array::uniform3(-5.0f64..5.0),
            seed in 0u64..1000,
        ) {
            let det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6]);
            prop_assume!(det.abs() > 0.1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (p, f) = random_tet(&mut rng);
            let q = p.map(|x| {
                [
                    m[0] * x[0] + m[1] * x[1] + m[2] * x[2] + t[0],
                    m[3] * x[0] + m[4] * x[1] + m[5] * x[2] + t[1],
                    m[6] * x[0] + m[7] * x[1] + m[8] * x[2] + t[2],
                ]
            });
            let s = spline(p, f);
            let u = spline(q, f);
            for k in 0..16 {
                let h = k as f64 / 15.0;
                let expect = s.eval(h) * det.abs();
                prop_assert!((u.eval(h) - expect).abs() <= 1e-9 * u.total_volume());
            }
        }

        #[test]
        fn monotone_in_h(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (p, f) = random_tet(&mut rng);
            let s = spline(p, f);
            let mut prev = 0.0;
            for k in 0..=200 {
                let v = s.eval(-0.01 + 1.02 * k as f64 / 200.0);
                prop_assert!(v >= prev - 1e-12 * s.total_volume());
                prev = v;
            }
        }
    }
}

//! Standard-form cubics `a h^3 + b h^2 + c h + d` and piecewise assemblies.

use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::Serialize;

use crate::numeric::Dd;

/// A cubic in the isovalue `h`, coefficients stored highest degree first.
///
/// Coefficients are kept in double-double precision so that sums of many
/// per-tetrahedron deltas (which cancel heavily) stay exact to well below
/// `f64` resolution; the public accessors round to `f64`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CubicPoly {
    coeffs: [Dd; 4],
}

impl CubicPoly {
    pub const ZERO: CubicPoly = CubicPoly {
        coeffs: [Dd::ZERO; 4],
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::from_dd([a.into(), b.into(), c.into(), d.into()])
    }

    pub fn from_dd(coeffs: [Dd; 4]) -> Self {
        Self { coeffs }
    }

    pub fn constant(d: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, d)
    }

    pub fn constant_dd(d: Dd) -> Self {
        Self::from_dd([Dd::ZERO, Dd::ZERO, Dd::ZERO, d])
    }

    /// `scale * (h - root)^3`, expanded without rounding the binomial terms.
    pub fn scaled_cube(scale: Dd, root: f64) -> Self {
        let r = Dd::new(root);
        let r2 = r * r;
        let r3 = r2 * r;
        Self::from_dd([scale, -(scale * 3.0 * r), scale * 3.0 * r2, -(scale * r3)])
    }

    /// `scale * (h - root)^2` as a cubic with zero leading coefficient.
    pub fn scaled_square(scale: Dd, root: f64) -> Self {
        let r = Dd::new(root);
        Self::from_dd([Dd::ZERO, scale, -(scale * 2.0 * r), scale * (r * r)])
    }

    pub fn coeffs_dd(&self) -> [Dd; 4] {
        self.coeffs
    }

    /// `[a, b, c, d]` rounded to `f64`.
    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs.map(Dd::to_f64)
    }

    pub fn a(&self) -> f64 {
        self.coeffs[0].to_f64()
    }

    pub fn b(&self) -> f64 {
        self.coeffs[1].to_f64()
    }

    pub fn c(&self) -> f64 {
        self.coeffs[2].to_f64()
    }

    pub fn d(&self) -> f64 {
        self.coeffs[3].to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn eval_dd(&self, h: f64) -> Dd {
        let [a, b, c, d] = self.coeffs;
        ((a * h + b) * h + c) * h + d
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.eval_dd(h).to_f64()
    }

    pub fn derivative(&self) -> CubicPoly {
        let [a, b, c, _] = self.coeffs;
        Self::from_dd([Dd::ZERO, a * 3.0, b * 2.0, c])
    }

    /// Antiderivative of a quadratic (the cubic coefficient must be zero),
    /// with integration constant zero.
    pub fn integrate_quadratic(&self) -> CubicPoly {
        debug_assert!(self.coeffs[0] == Dd::ZERO);
        let [_, a, b, c] = self.coeffs;
        Self::from_dd([a / 3.0, b / 2.0, c, Dd::ZERO])
    }

    pub fn scale(&self, k: Dd) -> CubicPoly {
        Self::from_dd(self.coeffs.map(|c| c * k))
    }

    pub fn with_constant(mut self, d: Dd) -> CubicPoly {
        self.coeffs[3] = d;
        self
    }
}

impl Add for CubicPoly {
    type Output = CubicPoly;
    fn add(self, rhs: CubicPoly) -> CubicPoly {
        let mut out = self;
        out += rhs;
        out
    }
}

impl AddAssign for CubicPoly {
    fn add_assign(&mut self, rhs: CubicPoly) {
        for (x, y) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *x += y;
        }
    }
}

impl Sub for CubicPoly {
    type Output = CubicPoly;
    fn sub(self, rhs: CubicPoly) -> CubicPoly {
        let mut out = self;
        out -= rhs;
        out
    }
}

impl SubAssign for CubicPoly {
    fn sub_assign(&mut self, rhs: CubicPoly) {
        for (x, y) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *x -= y;
        }
    }
}

impl Neg for CubicPoly {
    type Output = CubicPoly;
    fn neg(self) -> CubicPoly {
        Self::from_dd(self.coeffs.map(|c| -c))
    }
}

impl std::iter::Sum for CubicPoly {
    fn sum<I: Iterator<Item = CubicPoly>>(iter: I) -> CubicPoly {
        iter.fold(CubicPoly::ZERO, |acc, p| acc + p)
    }
}

impl Serialize for CubicPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs().serialize(s)
    }
}

/// Cubic pieces over consecutive breakpoint intervals.
///
/// Evaluation is right-continuous: at a breakpoint the piece to its right
/// is used, and values outside the breakpoint range extend the first or
/// last piece.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PiecewiseCubic {
    breakpoints: Vec<f64>,
    pieces: Vec<CubicPoly>,
}

impl PiecewiseCubic {
    /// `breakpoints.len()` must be `pieces.len() + 1` and non-decreasing.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<CubicPoly>) -> Self {
        assert_eq!(
            breakpoints.len(),
            pieces.len() + 1,
            "breakpoint/piece count mismatch"
        );
        assert!(
            !pieces.is_empty(),
            "piecewise cubic needs at least one piece"
        );
        debug_assert!(breakpoints.windows(2).all(|w| w[0] <= w[1]));
        Self {
            breakpoints,
            pieces,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[CubicPoly] {
        &self.pieces
    }

    /// Index of the piece used at `h`.
    pub fn piece_index(&self, h: f64) -> usize {
        // Number of interior breakpoints at or below h.
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        interior.partition_point(|&b| b <= h)
    }

    pub fn piece_at(&self, h: f64) -> &CubicPoly {
        &self.pieces[self.piece_index(h)]
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.piece_at(h).eval(h)
    }

    pub fn first(&self) -> &CubicPoly {
        &self.pieces[0]
    }

    pub fn last(&self) -> &CubicPoly {
        &self.pieces[self.pieces.len() - 1]
    }
}

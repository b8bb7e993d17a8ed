//! Contour trees of scalar fields on tetrahedral meshes, with exact
//! per-superarc volume functions.
//!
//! Every tetrahedron contributes a three-piece cubic spline `V(h)` giving
//! the volume of its sublevel set `{f <= h}`. Differences between
//! consecutive pieces are attached to the vertices where the pieces change,
//! and summing those deltas over a subtree of the contour tree yields the
//! exact volume of the region hanging off a superarc as a cubic in `h`.

pub mod contour_tree;
pub mod decomposition;
pub mod geometry;
pub mod hypersweep;
pub mod isosurface;
pub mod mesh;
pub mod numeric;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod synth;
pub mod verify;

//! P1 finite elements on a uniform triangulation of the unit square.
//!
//! The square (0,1)^2 is cut into `n_side^2` cells of width `h = 1/n_side`;
//! each cell splits along its southwest-to-northeast diagonal into two right
//! triangles. Unknowns live on the `(n_side - 1)^2` interior nodes, numbered
//! row-major (x fastest); homogeneous Dirichlet conditions are imposed by
//! eliminating boundary nodes from assembly. Load vectors use a three-point
//! edge-midpoint quadrature rule, exact for quadratics, so mass entries
//! (products of two linear hats) would come out exactly under the same rule.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{spd_solve, LinalgError, SparseSpdMatrix, SpdBuilder};

/// Errors from grid construction, assembly, or projection.
#[derive(Debug, Error)]
pub enum FemError {
    /// Grid resolution too small to have interior nodes.
    #[error("n_side must be at least 2, got {0}")]
    InvalidGrid(usize),
    /// A coefficient/forcing field evaluated to NaN or infinity.
    #[error("field sample is not finite at x = {x}, y = {y}, t = {t}")]
    NonFiniteSample { x: f64, y: f64, t: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Scalar field `(x, y, t) -> f64` shared by configs and assembly routines.
#[derive(Clone)]
pub struct ScalarField(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>);

impl ScalarField {
    pub fn new<F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    /// Field with the same value everywhere and at all times.
    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.0)(x, y, t)
    }
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

/// Uniform right-triangle grid over the unit square.
#[derive(Debug, Clone)]
pub struct Grid2D {
    n_side: usize,
    h: f64,
}

/// One triangle of the grid: vertex coordinates plus, for each vertex, its
/// interior unknown index (`None` on the boundary).
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub coords: [(f64, f64); 3],
    pub interior: [Option<usize>; 3],
}

impl Triangle {
    /// Signed area via the shoelace formula (positive for our orientation).
    pub fn area(&self) -> f64 {
        let [(x0, y0), (x1, y1), (x2, y2)] = self.coords;
        0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
    }
}

/// Build the grid; `n_side >= 2` so at least one interior node exists.
pub fn build_grid(n_side: usize) -> Result<Grid2D, FemError> {
    if n_side < 2 {
        return Err(FemError::InvalidGrid(n_side));
    }
    Ok(Grid2D {
        n_side,
        h: 1.0 / n_side as f64,
    })
}

impl Grid2D {
    pub fn n_side(&self) -> usize {
        self.n_side
    }

    /// Mesh width `1 / n_side`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior nodes, `(n_side - 1)^2`.
    pub fn n_interior(&self) -> usize {
        (self.n_side - 1) * (self.n_side - 1)
    }

    /// Row-major unknown index of grid node `(i, j)` (x index `i`, y index
    /// `j`, both in `0..=n_side`); `None` for boundary nodes.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        if i == 0 || j == 0 || i >= self.n_side || j >= self.n_side {
            None
        } else {
            Some((j - 1) * (self.n_side - 1) + (i - 1))
        }
    }

    /// Coordinates of grid node `(i, j)`.
    pub fn node_coords(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h, j as f64 * self.h)
    }

    pub fn triangle_count(&self) -> usize {
        2 * self.n_side * self.n_side
    }

    /// All triangles, cell by cell; each cell yields the triangle below its
    /// southwest-to-northeast diagonal, then the one above it.
    pub fn triangles(&self) -> impl Iterator<Item = Triangle> + '_ {
        let n = self.n_side;
        (0..n * n).flat_map(move |cell| {
            let ci = cell % n;
            let cj = cell / n;
            let sw = (ci, cj);
            let se = (ci + 1, cj);
            let ne = (ci + 1, cj + 1);
            let nw = (ci, cj + 1);
            [[sw, se, ne], [sw, ne, nw]]
                .into_iter()
                .map(move |vs| Triangle {
                    coords: vs.map(|(i, j)| self.node_coords(i, j)),
                    interior: vs.map(|(i, j)| self.interior_index(i, j)),
                })
        })
    }
}

/// Assemble the interior mass matrix (entries `integral of phi_i phi_j`).
///
/// The local mass matrix of every triangle is `area/12 * [[2,1,1],[1,2,1],
/// [1,1,2]]`, exact for linear hats.
pub fn assemble_mass(grid: &Grid2D) -> SparseSpdMatrix {
    let mut b = SpdBuilder::new(grid.n_interior());
    for tri in grid.triangles() {
        let w = tri.area() / 12.0;
        for (r, ri) in tri.interior.iter().enumerate() {
            let Some(ri) = *ri else { continue };
            for (c, ci) in tri.interior.iter().enumerate() {
                let Some(ci) = *ci else { continue };
                b.add(ri, ci, w * if r == c { 2.0 } else { 1.0 });
            }
        }
    }
    b.build()
        .expect("mass assembly is symmetric by construction")
}

/// Assemble the interior stiffness matrix (entries
/// `integral of grad phi_i . grad phi_j`).
pub fn assemble_stiffness(grid: &Grid2D) -> SparseSpdMatrix {
    let mut b = SpdBuilder::new(grid.n_interior());
    for tri in grid.triangles() {
        let [(x0, y0), (x1, y1), (x2, y2)] = tri.coords;
        // Gradient of the r-th barycentric hat is (br, cr) / (2 area).
        let bs = [y1 - y2, y2 - y0, y0 - y1];
        let cs = [x2 - x1, x0 - x2, x1 - x0];
        let w = 1.0 / (4.0 * tri.area());
        for (r, ri) in tri.interior.iter().enumerate() {
            let Some(ri) = *ri else { continue };
            for (c, ci) in tri.interior.iter().enumerate() {
                let Some(ci) = *ci else { continue };
                b.add(ri, ci, w * (bs[r] * bs[c] + cs[r] * cs[c]));
            }
        }
    }
    b.build()
        .expect("stiffness assembly is symmetric by construction")
}

/// Assemble the load vector `b_i = integral of f(., t) phi_i` with the
/// three-point edge-midpoint rule (exact for quadratic integrands).
///
/// # Errors
///
/// [`FemError::NonFiniteSample`] if `f` returns NaN or infinity at any
/// quadrature point.
pub fn assemble_load(grid: &Grid2D, f: &ScalarField, t: f64) -> Result<Vec<f64>, FemError> {
    let mut b = vec![0.0; grid.n_interior()];
    for tri in grid.triangles() {
        let w = tri.area() / 3.0;
        // Midpoints of edges (0,1), (1,2), (2,0); hat r is 1/2 on the two
        // edges meeting vertex r and 0 on the opposite edge.
        for e in 0..3 {
            let (xa, ya) = tri.coords[e];
            let (xb, yb) = tri.coords[(e + 1) % 3];
            let (mx, my) = (0.5 * (xa + xb), 0.5 * (ya + yb));
            let fv = f.eval(mx, my, t);
            if !fv.is_finite() {
                return Err(FemError::NonFiniteSample { x: mx, y: my, t });
            }
            for r in [e, (e + 1) % 3] {
                if let Some(ri) = tri.interior[r] {
                    b[ri] += w * 0.5 * fv;
                }
            }
        }
    }
    Ok(b)
}

/// L2 projection of the (time-independent) field `g` onto the interior P1
/// space: solves `M c = b(g)` and returns the nodal coefficients `c`.
pub fn l2_project(grid: &Grid2D, g: &ScalarField) -> Result<Vec<f64>, FemError> {
    let mass = assemble_mass(grid);
    let b = assemble_load(grid, g, 0.0)?;
    Ok(spd_solve(&mass, &b)?)
}

/// Nodal interpolation of `g` at `t = 0`: coefficient `c_z = g(z)` at every
/// interior node `z`.
pub fn interpolate(grid: &Grid2D, g: &ScalarField) -> Result<Vec<f64>, FemError> {
    let mut v = vec![0.0; grid.n_interior()];
    for j in 1..grid.n_side() {
        for i in 1..grid.n_side() {
            let (x, y) = grid.node_coords(i, j);
            let val = g.eval(x, y, 0.0);
            if !val.is_finite() {
                return Err(FemError::NonFiniteSample { x, y, t: 0.0 });
            }
            v[grid.interior_index(i, j).expect("interior by construction")] = val;
        }
    }
    Ok(v)
}

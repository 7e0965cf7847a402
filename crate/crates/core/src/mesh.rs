//! Structured interval (1D) and quadrilateral (2D) meshes.
//!
//! Elements are axis-aligned boxes indexed row-major (`e = j * nx + i` in
//! 2D). Faces are axis-aligned; a face's `minus` side is the element with the
//! lower coordinate along the face axis, so the stored unit normal always
//! points along the positive axis. Periodic boundaries are closed during
//! construction and produce interior wrap-around faces.

use crate::error::{Result, SolverError};
use crate::real::Real;

/// Physical boundary treatment attached to a boundary face.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryTag<R> {
    Periodic,
    Transmissive,
    /// Reserved; no shipped problem uses it.
    SlipWall,
    /// Fixed exterior state in conserved variables.
    Dirichlet(Vec<R>),
}

/// What lies on one side of a face.
#[derive(Debug, Clone, PartialEq)]
pub enum FaceSide<R> {
    Interior(usize),
    Boundary(BoundaryTag<R>),
}

/// An axis-aligned face between two elements or at the domain boundary.
#[derive(Debug, Clone)]
pub struct Face<R> {
    /// 0 for x-normal faces, 1 for y-normal faces.
    pub axis: usize,
    /// Side with the lower coordinate along `axis`.
    pub minus: FaceSide<R>,
    /// Side with the higher coordinate along `axis`.
    pub plus: FaceSide<R>,
}

impl<R: Real> Face<R> {
    pub fn is_interior(&self) -> bool {
        matches!(self.minus, FaceSide::Interior(_)) && matches!(self.plus, FaceSide::Interior(_))
    }

    /// Unit normal pointing from the minus side to the plus side.
    pub fn normal(&self) -> [R; 2] {
        let mut n = [R::zero(); 2];
        n[self.axis] = R::one();
        n
    }

    /// Unit normal pointing out of `elem`.
    pub fn outward_normal(&self, elem: usize) -> [R; 2] {
        let mut n = [R::zero(); 2];
        n[self.axis] = if self.minus == FaceSide::Interior(elem) {
            R::one()
        } else {
            -R::one()
        };
        n
    }
}

/// Per-element local sides, in storage order of `elem_faces`.
pub const SIDE_XMIN: usize = 0;
pub const SIDE_XMAX: usize = 1;
pub const SIDE_YMIN: usize = 2;
pub const SIDE_YMAX: usize = 3;

/// A structured mesh with face connectivity and per-element sizes.
#[derive(Debug, Clone)]
pub struct MeshTopology<R> {
    pub dim: usize,
    /// Elements per axis; `counts[1] == 1` in 1D.
    pub counts: [usize; 2],
    /// Vertex coordinates, row-major over the (nx+1) x (ny+1) lattice.
    pub vertices: Vec<[R; 2]>,
    /// Vertex indices per element (2 in 1D, 4 counter-clockwise in 2D).
    pub elements: Vec<[usize; 4]>,
    pub faces: Vec<Face<R>>,
    /// Face ids per element: `[xmin, xmax, ymin, ymax]` (first two in 1D).
    pub elem_faces: Vec<[usize; 4]>,
    /// Element box widths per axis.
    pub widths: Vec<[R; 2]>,
    /// Element centers.
    pub centers: Vec<[R; 2]>,
    /// Characteristic size, `h^d = element measure`.
    pub h: Vec<R>,
}

impl<R: Real> MeshTopology<R> {
    /// Uniform 1D mesh of `n` elements on [a, b].
    pub fn uniform_interval(
        a: R,
        b: R,
        n: usize,
        left: BoundaryTag<R>,
        right: BoundaryTag<R>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(SolverError::InvalidInput("counts must be >= 1".into()));
        }
        if !(b > a) {
            return Err(SolverError::InvalidInput("degenerate bounds".into()));
        }
        let width = (b - a) / R::from_usize_exact(n);
        let breakpoints: Vec<R> = (0..=n)
            .map(|i| {
                if i == n {
                    b
                } else {
                    a + width * R::from_usize_exact(i)
                }
            })
            .collect();
        let mut mesh = Self::interval_from_breakpoints(&breakpoints, left, right)?;
        // Uniform meshes carry the exact uniform size, free of breakpoint
        // rounding.
        for e in 0..n {
            mesh.widths[e][0] = width;
            mesh.h[e] = width;
        }
        Ok(mesh)
    }

    /// 1D mesh from ascending breakpoints, possibly non-uniform.
    pub fn interval_from_breakpoints(
        breakpoints: &[R],
        left: BoundaryTag<R>,
        right: BoundaryTag<R>,
    ) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(SolverError::InvalidInput("need at least 2 breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SolverError::InvalidInput("breakpoints must ascend".into()));
        }
        let periodic = left == BoundaryTag::Periodic || right == BoundaryTag::Periodic;
        if periodic && left != right {
            return Err(SolverError::InvalidInput(
                "periodic boundaries must pair up".into(),
            ));
        }
        let n = breakpoints.len() - 1;
        let vertices: Vec<[R; 2]> = breakpoints.iter().map(|&x| [x, R::zero()]).collect();
        let mut elements = Vec::with_capacity(n);
        let mut widths = Vec::with_capacity(n);
        let mut centers = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        for i in 0..n {
            elements.push([i, i + 1, 0, 0]);
            let w = breakpoints[i + 1] - breakpoints[i];
            widths.push([w, R::one()]);
            centers.push([breakpoints[i] + w * R::of(0.5), R::zero()]);
            h.push(w);
        }

        let mut faces = Vec::new();
        let mut elem_faces = vec![[usize::MAX; 4]; n];
        if periodic {
            for i in 0..n {
                // Face at the left end of element i.
                let prev = (i + n - 1) % n;
                faces.push(Face {
                    axis: 0,
                    minus: FaceSide::Interior(prev),
                    plus: FaceSide::Interior(i),
                });
                elem_faces[i][SIDE_XMIN] = faces.len() - 1;
                elem_faces[prev][SIDE_XMAX] = faces.len() - 1;
            }
        } else {
            faces.push(Face {
                axis: 0,
                minus: FaceSide::Boundary(left),
                plus: FaceSide::Interior(0),
            });
            elem_faces[0][SIDE_XMIN] = 0;
            for i in 1..n {
                faces.push(Face {
                    axis: 0,
                    minus: FaceSide::Interior(i - 1),
                    plus: FaceSide::Interior(i),
                });
                elem_faces[i - 1][SIDE_XMAX] = faces.len() - 1;
                elem_faces[i][SIDE_XMIN] = faces.len() - 1;
            }
            faces.push(Face {
                axis: 0,
                minus: FaceSide::Interior(n - 1),
                plus: FaceSide::Boundary(right),
            });
            elem_faces[n - 1][SIDE_XMAX] = faces.len() - 1;
        }

        Ok(MeshTopology {
            dim: 1,
            counts: [n, 1],
            vertices,
            elements,
            faces,
            elem_faces,
            widths,
            centers,
            h,
        })
    }

    /// Uniform 2D quadrilateral mesh on an axis-aligned box.
    ///
    /// `tags` are `[xmin, xmax, ymin, ymax]`; periodic tags must pair up per
    /// axis.
    pub fn uniform_quad(
        bounds: [[R; 2]; 2],
        counts: [usize; 2],
        tags: [BoundaryTag<R>; 4],
    ) -> Result<Self> {
        let [nx, ny] = counts;
        if nx == 0 || ny == 0 {
            return Err(SolverError::InvalidInput("counts must be >= 1".into()));
        }
        for axis in 0..2 {
            if !(bounds[axis][1] > bounds[axis][0]) {
                return Err(SolverError::InvalidInput("degenerate bounds".into()));
            }
            let lo = &tags[2 * axis];
            let hi = &tags[2 * axis + 1];
            if (*lo == BoundaryTag::Periodic) != (*hi == BoundaryTag::Periodic) {
                return Err(SolverError::InvalidInput(
                    "periodic boundaries must pair up".into(),
                ));
            }
        }
        let dx = (bounds[0][1] - bounds[0][0]) / R::from_usize_exact(nx);
        let dy = (bounds[1][1] - bounds[1][0]) / R::from_usize_exact(ny);

        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = if i == nx {
                    bounds[0][1]
                } else {
                    bounds[0][0] + dx * R::from_usize_exact(i)
                };
                let y = if j == ny {
                    bounds[1][1]
                } else {
                    bounds[1][0] + dy * R::from_usize_exact(j)
                };
                vertices.push([x, y]);
            }
        }

        let n_elems = nx * ny;
        let mut elements = Vec::with_capacity(n_elems);
        let mut widths = Vec::with_capacity(n_elems);
        let mut centers = Vec::with_capacity(n_elems);
        let mut h = Vec::with_capacity(n_elems);
        let half = R::of(0.5);
        for j in 0..ny {
            for i in 0..nx {
                let v0 = j * (nx + 1) + i;
                elements.push([v0, v0 + 1, v0 + nx + 2, v0 + nx + 1]);
                widths.push([dx, dy]);
                centers.push([
                    bounds[0][0] + dx * (R::from_usize_exact(i) + half),
                    bounds[1][0] + dy * (R::from_usize_exact(j) + half),
                ]);
                h.push((dx * dy).sqrt());
            }
        }

        let eid = |i: usize, j: usize| j * nx + i;
        let mut faces = Vec::new();
        let mut elem_faces = vec![[usize::MAX; 4]; n_elems];

        let x_periodic = tags[0] == BoundaryTag::Periodic;
        for j in 0..ny {
            if x_periodic {
                for i in 0..nx {
                    let prev = eid((i + nx - 1) % nx, j);
                    faces.push(Face {
                        axis: 0,
                        minus: FaceSide::Interior(prev),
                        plus: FaceSide::Interior(eid(i, j)),
                    });
                    elem_faces[eid(i, j)][SIDE_XMIN] = faces.len() - 1;
                    elem_faces[prev][SIDE_XMAX] = faces.len() - 1;
                }
            } else {
                faces.push(Face {
                    axis: 0,
                    minus: FaceSide::Boundary(tags[0].clone()),
                    plus: FaceSide::Interior(eid(0, j)),
                });
                elem_faces[eid(0, j)][SIDE_XMIN] = faces.len() - 1;
                for i in 1..nx {
                    faces.push(Face {
                        axis: 0,
                        minus: FaceSide::Interior(eid(i - 1, j)),
                        plus: FaceSide::Interior(eid(i, j)),
                    });
                    elem_faces[eid(i - 1, j)][SIDE_XMAX] = faces.len() - 1;
                    elem_faces[eid(i, j)][SIDE_XMIN] = faces.len() - 1;
                }
                faces.push(Face {
                    axis: 0,
                    minus: FaceSide::Interior(eid(nx - 1, j)),
                    plus: FaceSide::Boundary(tags[1].clone()),
                });
                elem_faces[eid(nx - 1, j)][SIDE_XMAX] = faces.len() - 1;
            }
        }

        let y_periodic = tags[2] == BoundaryTag::Periodic;
        for i in 0..nx {
            if y_periodic {
                for j in 0..ny {
                    let prev = eid(i, (j + ny - 1) % ny);
                    faces.push(Face {
                        axis: 1,
                        minus: FaceSide::Interior(prev),
                        plus: FaceSide::Interior(eid(i, j)),
                    });
                    elem_faces[eid(i, j)][SIDE_YMIN] = faces.len() - 1;
                    elem_faces[prev][SIDE_YMAX] = faces.len() - 1;
                }
            } else {
                faces.push(Face {
                    axis: 1,
                    minus: FaceSide::Boundary(tags[2].clone()),
                    plus: FaceSide::Interior(eid(i, 0)),
                });
                elem_faces[eid(i, 0)][SIDE_YMIN] = faces.len() - 1;
                for j in 1..ny {
                    faces.push(Face {
                        axis: 1,
                        minus: FaceSide::Interior(eid(i, j - 1)),
                        plus: FaceSide::Interior(eid(i, j)),
                    });
                    elem_faces[eid(i, j - 1)][SIDE_YMAX] = faces.len() - 1;
                    elem_faces[eid(i, j)][SIDE_YMIN] = faces.len() - 1;
                }
                faces.push(Face {
                    axis: 1,
                    minus: FaceSide::Interior(eid(i, ny - 1)),
                    plus: FaceSide::Boundary(tags[3].clone()),
                });
                elem_faces[eid(i, ny - 1)][SIDE_YMAX] = faces.len() - 1;
            }
        }

        Ok(MeshTopology {
            dim: 2,
            counts,
            vertices,
            elements,
            faces,
            elem_faces,
            widths,
            centers,
            h,
        })
    }

    pub fn n_elems(&self) -> usize {
        self.h.len()
    }

    /// Largest characteristic element size in the mesh.
    pub fn max_mesh_scale(&self) -> R {
        self.h
            .iter()
            .copied()
            .fold(R::zero(), |a, b| if b > a { b } else { a })
    }

    /// Sum of element measures.
    pub fn domain_measure(&self) -> R {
        let mut total = R::zero();
        for w in &self.widths {
            total += if self.dim == 1 { w[0] } else { w[0] * w[1] };
        }
        total
    }

    /// Physical coordinates of a reference point inside element `e`.
    pub fn point_in_elem(&self, e: usize, xi: R, eta: R) -> [R; 2] {
        let half = R::of(0.5);
        [
            self.centers[e][0] + xi * self.widths[e][0] * half,
            self.centers[e][1] + eta * self.widths[e][1] * half,
        ]
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_interior()).count()
    }

    /// Number of face slots per element (2 in 1D, 4 in 2D).
    pub fn sides_per_elem(&self) -> usize {
        2 * self.dim
    }
}

//! Fixed parametric lattices on primitive surfaces.
//!
//! The surface coordinate of point `i` depends only on the solid kind and
//! the point count, never on the solid's parameters. That is what gives
//! point clouds of one family their dense correspondence.

use std::f64::consts::{PI, TAU};

use super::spec::Solid;
use crate::error::{Error, Result};

/// Golden angle in radians.
const GOLDEN_ANGLE: f64 = PI * (3.0 - 2.236_067_977_499_79);

/// Where on a primitive's surface a sample sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceParam {
    /// Surface patch (box face, cylinder side/cap); 0 for single-patch kinds.
    pub patch: u8,
    pub u: f64,
    pub v: f64,
}

/// Surface lattice and the points it produces for `solid`.
pub fn sample_surface(solid: &Solid, point_count: usize) -> Result<(Vec<SurfaceParam>, Vec<[f64; 3]>)> {
    let params = lattice(solid, point_count)?;
    let points = params.iter().map(|p| surface_point(solid, p)).collect();
    Ok((params, points))
}

fn lattice(solid: &Solid, n: usize) -> Result<Vec<SurfaceParam>> {
    Ok(match solid {
        Solid::Ellipsoid { .. } => fibonacci_sphere(n),
        Solid::Box { .. } => {
            let mut out = Vec::with_capacity(n);
            for (face, count) in split_counts(n, 6).into_iter().enumerate() {
                out.extend(grid(count).map(|(s, t)| SurfaceParam {
                    patch: face as u8,
                    u: 2.0 * s - 1.0,
                    v: 2.0 * t - 1.0,
                }));
            }
            out
        }
        Solid::Cylinder { .. } => {
            let cap = n / 4;
            let side = n - 2 * cap;
            let mut out: Vec<SurfaceParam> = grid(side)
                .map(|(s, t)| SurfaceParam {
                    patch: 0,
                    u: s,
                    v: 2.0 * t - 1.0,
                })
                .collect();
            for patch in [1u8, 2] {
                out.extend(sunflower(cap).map(|(u, v)| SurfaceParam { patch, u, v }));
            }
            out
        }
        Solid::Torus { .. } => grid(n)
            .map(|(s, t)| SurfaceParam { patch: 0, u: s, v: t })
            .collect(),
        Solid::Composite { .. } => {
            return Err(Error::InvalidSpec(
                "composite solids have no single parametric surface to sample".into(),
            ))
        }
    })
}

fn surface_point(solid: &Solid, p: &SurfaceParam) -> [f64; 3] {
    match solid {
        Solid::Ellipsoid { center, radii } => {
            // u = z on the unit sphere, v = longitude.
            let rho = (1.0 - p.u * p.u).max(0.0).sqrt();
            let unit = [rho * p.v.cos(), rho * p.v.sin(), p.u];
            [
                center[0] + radii[0] * unit[0],
                center[1] + radii[1] * unit[1],
                center[2] + radii[2] * unit[2],
            ]
        }
        Solid::Box { center, half_extents } => {
            // Faces: -x, +x, -y, +y, -z, +z.
            let axis = (p.patch / 2) as usize;
            let sign = if p.patch % 2 == 0 { -1.0 } else { 1.0 };
            let (a, b) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let mut q = [0.0; 3];
            q[axis] = sign;
            q[a] = p.u;
            q[b] = p.v;
            [
                center[0] + half_extents[0] * q[0],
                center[1] + half_extents[1] * q[1],
                center[2] + half_extents[2] * q[2],
            ]
        }
        Solid::Cylinder {
            center,
            radius,
            half_height,
        } => match p.patch {
            0 => {
                let theta = TAU * p.u;
                [
                    center[0] + radius * theta.cos(),
                    center[1] + radius * theta.sin(),
                    center[2] + half_height * p.v,
                ]
            }
            cap => {
                let sign = if cap == 1 { -1.0 } else { 1.0 };
                [
                    center[0] + radius * p.u * p.v.cos(),
                    center[1] + radius * p.u * p.v.sin(),
                    center[2] + sign * half_height,
                ]
            }
        },
        Solid::Torus {
            center,
            major_radius,
            minor_radius,
        } => {
            let theta = TAU * p.u;
            let psi = TAU * p.v;
            let ring = major_radius + minor_radius * psi.cos();
            [
                center[0] + ring * theta.cos(),
                center[1] + ring * theta.sin(),
                center[2] + minor_radius * psi.sin(),
            ]
        }
        Solid::Composite { .. } => unreachable!("rejected by lattice()"),
    }
}

/// Splits `n` into `parts` counts, remainder going to the first parts.
fn split_counts(n: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| n / parts + usize::from(i < n % parts)).collect()
}

/// First `m` cells of a near-square grid, as cell-center fractions in (0, 1).
fn grid(m: usize) -> impl Iterator<Item = (f64, f64)> {
    let cols = (m as f64).sqrt().ceil().max(1.0) as usize;
    let rows = m.div_ceil(cols).max(1);
    (0..m).map(move |a| {
        let (r, c) = (a / cols, a % cols);
        ((c as f64 + 0.5) / cols as f64, (r as f64 + 0.5) / rows as f64)
    })
}

fn fibonacci_sphere(n: usize) -> Vec<SurfaceParam> {
    (0..n)
        .map(|i| SurfaceParam {
            patch: 0,
            u: 1.0 - (2.0 * i as f64 + 1.0) / n as f64,
            v: (i as f64 * GOLDEN_ANGLE) % TAU,
        })
        .collect()
}

/// Sunflower spiral on the unit disk: (radius fraction, angle).
fn sunflower(m: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..m).map(move |a| {
        (
            ((a as f64 + 0.5) / m as f64).sqrt(),
            (a as f64 * GOLDEN_ANGLE) % TAU,
        )
    })
}

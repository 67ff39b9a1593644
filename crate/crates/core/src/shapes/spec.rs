use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizontal reach allowed from the vertical axis through (0.5, 0.5). Any
/// yaw about that axis then keeps the solid 0.05 inside the unit cube.
pub const MAX_HORIZONTAL_REACH: f64 = 0.45;
/// Margin kept from the top and bottom faces of the unit cube.
pub const VERTICAL_MARGIN: f64 = 0.05;

/// Valid range for every center coordinate.
pub const CENTER_RANGE: (f64, f64) = (0.2, 0.8);
/// Valid range for box half-extents, ellipsoid radii, cylinder radius and
/// half-height.
pub const SIZE_RANGE: (f64, f64) = (0.02, 0.45);
/// Valid range for the torus ring radius.
pub const MAJOR_RADIUS_RANGE: (f64, f64) = (0.05, 0.4);
/// Valid range for the torus tube radius (also must be below the ring radius).
pub const MINOR_RADIUS_RANGE: (f64, f64) = (0.01, 0.2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Box,
    Ellipsoid,
    Cylinder,
    Torus,
    Composite,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Box,
        ShapeKind::Ellipsoid,
        ShapeKind::Cylinder,
        ShapeKind::Torus,
        ShapeKind::Composite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Box => "box",
            ShapeKind::Ellipsoid => "ellipsoid",
            ShapeKind::Cylinder => "cylinder",
            ShapeKind::Torus => "torus",
            ShapeKind::Composite => "composite",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown shape kind `{s}`")))
    }
}

/// Analytic solid inside the unit cube. Axes of cylinders and tori are
/// vertical (z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Solid {
    Box {
        center: [f64; 3],
        half_extents: [f64; 3],
    },
    Ellipsoid {
        center: [f64; 3],
        radii: [f64; 3],
    },
    Cylinder {
        center: [f64; 3],
        radius: f64,
        half_height: f64,
    },
    Torus {
        center: [f64; 3],
        major_radius: f64,
        minor_radius: f64,
    },
    /// Union of two primitive (non-composite) solids.
    Composite { parts: Box<[Solid; 2]> },
}

impl Solid {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Solid::Box { .. } => ShapeKind::Box,
            Solid::Ellipsoid { .. } => ShapeKind::Ellipsoid,
            Solid::Cylinder { .. } => ShapeKind::Cylinder,
            Solid::Torus { .. } => ShapeKind::Torus,
            Solid::Composite { .. } => ShapeKind::Composite,
        }
    }

    /// Closed point-membership test.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Solid::Box { center, half_extents } => {
                (0..3).all(|a| (p[a] - center[a]).abs() <= half_extents[a])
            }
            Solid::Ellipsoid { center, radii } => {
                let s: f64 = (0..3)
                    .map(|a| {
                        let d = (p[a] - center[a]) / radii[a];
                        d * d
                    })
                    .sum();
                s <= 1.0
            }
            Solid::Cylinder {
                center,
                radius,
                half_height,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius && (p[2] - center[2]).abs() <= *half_height
            }
            Solid::Torus {
                center,
                major_radius,
                minor_radius,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let dz = p[2] - center[2];
                let ring = (dx * dx + dy * dy).sqrt() - major_radius;
                ring * ring + dz * dz <= minor_radius * minor_radius
            }
            Solid::Composite { parts } => parts[0].contains(p) || parts[1].contains(p),
        }
    }

    fn center(&self) -> Option<[f64; 3]> {
        match self {
            Solid::Box { center, .. }
            | Solid::Ellipsoid { center, .. }
            | Solid::Cylinder { center, .. }
            | Solid::Torus { center, .. } => Some(*center),
            Solid::Composite { .. } => None,
        }
    }

    /// Largest horizontal distance from (0.5, 0.5) reached by the solid
    /// (conservative for ellipsoids).
    fn horizontal_reach(&self) -> f64 {
        let axis_dist = |c: [f64; 3]| ((c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2)).sqrt();
        match self {
            Solid::Box { center, half_extents } => {
                let dx = (center[0] - 0.5).abs() + half_extents[0];
                let dy = (center[1] - 0.5).abs() + half_extents[1];
                (dx * dx + dy * dy).sqrt()
            }
            Solid::Ellipsoid { center, radii } => axis_dist(*center) + radii[0].max(radii[1]),
            Solid::Cylinder { center, radius, .. } => axis_dist(*center) + radius,
            Solid::Torus {
                center,
                major_radius,
                minor_radius,
            } => axis_dist(*center) + major_radius + minor_radius,
            Solid::Composite { parts } => parts[0].horizontal_reach().max(parts[1].horizontal_reach()),
        }
    }

    /// (min z, max z).
    fn vertical_extent(&self) -> (f64, f64) {
        let (c, h) = match self {
            Solid::Box { center, half_extents } => (center[2], half_extents[2]),
            Solid::Ellipsoid { center, radii } => (center[2], radii[2]),
            Solid::Cylinder {
                center, half_height, ..
            } => (center[2], *half_height),
            Solid::Torus {
                center, minor_radius, ..
            } => (center[2], *minor_radius),
            Solid::Composite { parts } => {
                let a = parts[0].vertical_extent();
                let b = parts[1].vertical_extent();
                return (a.0.min(b.0), a.1.max(b.1));
            }
        };
        (c - h, c + h)
    }

    fn validate(&self, nested: bool) -> Result<()> {
        let in_range = |name: &str, v: f64, (lo, hi): (f64, f64)| {
            if v.is_finite() && (lo..=hi).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{} {name} = {v} outside [{lo}, {hi}]",
                    self.kind()
                )))
            }
        };
        if let Some(c) = self.center() {
            for v in c {
                in_range("center", v, CENTER_RANGE)?;
            }
        }
        match self {
            Solid::Box { half_extents, .. } => {
                for v in half_extents {
                    in_range("half extent", *v, SIZE_RANGE)?;
                }
            }
            Solid::Ellipsoid { radii, .. } => {
                for v in radii {
                    in_range("radius", *v, SIZE_RANGE)?;
                }
            }
            Solid::Cylinder {
                radius, half_height, ..
            } => {
                in_range("radius", *radius, SIZE_RANGE)?;
                in_range("half height", *half_height, SIZE_RANGE)?;
            }
            Solid::Torus {
                major_radius,
                minor_radius,
                ..
            } => {
                in_range("major radius", *major_radius, MAJOR_RADIUS_RANGE)?;
                in_range("minor radius", *minor_radius, MINOR_RADIUS_RANGE)?;
                if minor_radius >= major_radius {
                    return Err(Error::InvalidSpec(
                        "torus minor radius must be below its major radius".into(),
                    ));
                }
            }
            Solid::Composite { parts } => {
                if nested {
                    return Err(Error::InvalidSpec("composites cannot be nested".into()));
                }
                parts[0].validate(true)?;
                parts[1].validate(true)?;
            }
        }
        let reach = self.horizontal_reach();
        if reach > MAX_HORIZONTAL_REACH {
            return Err(Error::InvalidSpec(format!(
                "{} reaches {reach:.4} from the vertical axis (max {MAX_HORIZONTAL_REACH})",
                self.kind()
            )));
        }
        let (lo, hi) = self.vertical_extent();
        if lo < VERTICAL_MARGIN || hi > 1.0 - VERTICAL_MARGIN {
            return Err(Error::InvalidSpec(format!(
                "{} spans z in [{lo:.4}, {hi:.4}], outside [{VERTICAL_MARGIN}, {}]",
                self.kind(),
                1.0 - VERTICAL_MARGIN
            )));
        }
        Ok(())
    }
}

/// A solid plus the seed it was drawn from. Generation from a spec is fully
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub solid: Solid,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(solid: Solid, seed: u64) -> Result<Self> {
        let spec = Self { solid, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> ShapeKind {
        self.solid.kind()
    }

    pub fn validate(&self) -> Result<()> {
        self.solid.validate(false)
    }

    /// Draws a member of the synthetic family for `kind` from `seed`.
    ///
    /// Family parameters sit well inside the valid ranges: centers within
    /// 0.06 of the cube center, sizes large enough to cover a good part of a
    /// 32×32 render.
    pub fn random(kind: ShapeKind, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Rejection keeps composites valid; primitives always pass first time.
        loop {
            let solid = match kind {
                ShapeKind::Composite => {
                    let a = random_primitive(&mut rng, 0.6, 0.1);
                    let b = random_primitive(&mut rng, 0.6, 0.1);
                    Solid::Composite {
                        parts: Box::new([a, b]),
                    }
                }
                ShapeKind::Ellipsoid => random_ellipsoid(&mut rng),
                other => random_primitive_of(&mut rng, other, 1.0, 0.06),
            };
            if solid.validate(false).is_ok() {
                return Self { solid, seed };
            }
        }
    }
}

fn random_center(rng: &mut ChaCha8Rng, jitter: f64) -> [f64; 3] {
    [
        0.5 + rng.gen_range(-jitter..=jitter),
        0.5 + rng.gen_range(-jitter..=jitter),
        0.5 + rng.gen_range(-jitter..=jitter),
    ]
}

/// Ellipsoids roam the whole valid volume so their renders cover most of
/// the image instead of a fixed central patch.
fn random_ellipsoid(rng: &mut ChaCha8Rng) -> Solid {
    let center = [
        0.5 + rng.gen_range(-0.18..=0.18),
        0.5 + rng.gen_range(-0.18..=0.18),
        0.5 + rng.gen_range(-0.2..=0.2),
    ];
    Solid::Ellipsoid {
        center,
        radii: [rng.gen_range(0.08..=0.19), rng.gen_range(0.08..=0.19), rng.gen_range(0.08..=0.24)],
    }
}

fn random_primitive(rng: &mut ChaCha8Rng, scale: f64, jitter: f64) -> Solid {
    let kind = [
        ShapeKind::Box,
        ShapeKind::Ellipsoid,
        ShapeKind::Cylinder,
        ShapeKind::Torus,
    ][rng.gen_range(0..4)];
    random_primitive_of(rng, kind, scale, jitter)
}

fn random_primitive_of(rng: &mut ChaCha8Rng, kind: ShapeKind, scale: f64, jitter: f64) -> Solid {
    let center = random_center(rng, jitter);
    let mut size = |lo: f64, hi: f64| scale * rng.gen_range(lo..=hi);
    match kind {
        ShapeKind::Box => Solid::Box {
            center,
            half_extents: [size(0.1, 0.25), size(0.1, 0.25), size(0.1, 0.3)],
        },
        ShapeKind::Ellipsoid => Solid::Ellipsoid {
            center,
            radii: [size(0.12, 0.3), size(0.12, 0.3), size(0.12, 0.35)],
        },
        ShapeKind::Cylinder => Solid::Cylinder {
            center,
            radius: size(0.12, 0.3),
            half_height: size(0.12, 0.35),
        },
        ShapeKind::Torus => Solid::Torus {
            center,
            major_radius: size(0.15, 0.24),
            minor_radius: size(0.05, 0.1),
        },
        ShapeKind::Composite => unreachable!("composite parts are primitives"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_specs_are_valid_and_deterministic() {
        for kind in ShapeKind::ALL {
            for seed in 0..200 {
                let a = ShapeSpec::random(kind, seed);
                assert!(a.validate().is_ok(), "{kind} seed {seed}");
                assert_eq!(a, ShapeSpec::random(kind, seed));
                assert_eq!(a.kind(), kind);
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let bad = Solid::Ellipsoid {
            center: [0.5, 0.5, 0.5],
            radii: [0.5, 0.2, 0.2],
        };
        assert!(matches!(ShapeSpec::new(bad, 0), Err(Error::InvalidSpec(_))));
        let near_edge = Solid::Box {
            center: [0.75, 0.5, 0.5],
            half_extents: [0.2, 0.1, 0.1],
        };
        assert!(ShapeSpec::new(near_edge, 0).is_err());
        let tall = Solid::Cylinder {
            center: [0.5, 0.5, 0.5],
            radius: 0.2,
            half_height: 0.44,
        };
        assert!(ShapeSpec::new(tall, 0).is_ok());
        let fat_torus = Solid::Torus {
            center: [0.5, 0.5, 0.5],
            major_radius: 0.1,
            minor_radius: 0.15,
        };
        assert!(ShapeSpec::new(fat_torus, 0).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ShapeKind::ALL {
            assert_eq!(kind.name().parse::<ShapeKind>().unwrap(), kind);
        }
        assert!("sphere".parse::<ShapeKind>().is_err());
    }
}

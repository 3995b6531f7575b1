//! Points and displacements on the unit flat torus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }
}

impl TryFrom<u8> for Dim {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, Self::Error> {
        match value {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(format!("dimension must be 2 or 3, got {other}")),
        }
    }
}

impl From<Dim> for u8 {
    fn from(d: Dim) -> u8 {
        d.n() as u8
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        match value {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::InvalidInput(format!(
                "dimension must be 2 or 3, got {other}"
            ))),
        }
    }
}

/// Three-component vector; the third component is zero in two dimensions.
pub type Vec3 = [f64; 3];

/// A point on the unit torus with coordinates stored reduced to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    dim: Dim,
    coords: Vec3,
}

impl TorusPoint {
    pub fn new(dim: Dim, coords: &[f64]) -> Result<Self> {
        if coords.len() != dim.n() {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                dim.n(),
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        let mut c = [0.0; 3];
        for (dst, &src) in c.iter_mut().zip(coords) {
            *dst = reduce_unit(src);
        }
        Ok(Self { dim, coords: c })
    }

    pub(crate) fn from_vec3(dim: Dim, v: Vec3) -> Self {
        let mut c = [0.0; 3];
        for k in 0..dim.n() {
            c[k] = reduce_unit(v[k]);
        }
        Self { dim, coords: c }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim.n()]
    }

    pub(crate) fn vec3(&self) -> Vec3 {
        self.coords
    }

    /// Translate by `shift` (wrapped).
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut v = self.coords;
        for (k, s) in shift.iter().take(self.dim.n()).enumerate() {
            v[k] += s;
        }
        Self::from_vec3(self.dim, v)
    }

    /// Min-image displacement `self - other`, each component in `[-1/2, 1/2)`.
    pub fn displacement(&self, other: &TorusPoint) -> Vec3 {
        let mut d = [0.0; 3];
        for k in 0..self.dim.n() {
            d[k] = self.coords[k] - other.coords[k];
        }
        min_image(self.dim, d)
    }

    pub fn distance(&self, other: &TorusPoint) -> f64 {
        norm(self.displacement(other))
    }
}

fn reduce_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduce a displacement to its min-image representative in `[-1/2, 1/2)^d`.
pub fn min_image(dim: Dim, mut x: Vec3) -> Vec3 {
    for c in x.iter_mut().take(dim.n()) {
        *c -= c.round();
        if *c >= 0.5 {
            *c -= 1.0;
        }
    }
    for c in x.iter_mut().skip(dim.n()) {
        *c = 0.0;
    }
    x
}

pub fn norm(x: Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub(crate) fn vec3_from(dim: Dim, x: &[f64]) -> Result<Vec3> {
    if x.len() != dim.n() {
        return Err(Error::InvalidInput(format!(
            "expected a {}-vector, got {} components",
            dim.n(),
            x.len()
        )));
    }
    let mut v = [0.0; 3];
    v[..x.len()].copy_from_slice(x);
    Ok(v)
}

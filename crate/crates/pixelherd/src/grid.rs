//! Grid containers for images and per-pixel fields.
//!
//! All containers are dense, row-major, and use the Cartesian convention:
//! row 0 is the *bottom* row of the image, so pixel `(i, j)` sits at the
//! normalized coordinates `(i * hx, j * hy)` of [`GridGeometry`].

use crate::error::{Error, Result};

/// A grey-scale image: `width x height` intensities in `[0, 1]`,
/// row-major with row 0 at the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    /// Builds an image, validating that every value lies in `[0, 1]`.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::BadDimensions {
                width: width as i64,
                height: height as i64,
            });
        }
        if values.len() != width * height {
            return Err(Error::LengthMismatch(format!(
                "expected {} values for a {}x{} image, got {}",
                width * height,
                width,
                height,
                values.len()
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::IntensityOutOfRange { index, value });
            }
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Constant image of the given intensity.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.width && j < self.height);
        self.values[j * self.width + i]
    }

    /// The intensities as an unconstrained field (e.g. the ODE initial state).
    pub fn to_field(&self) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            values: self.values.clone(),
        }
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry::new(self.width, self.height)
    }
}

/// A per-pixel real field with the same layout as [`ImageGrid`] but no
/// range constraint (colour states, adjoint states, intermediates).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "field size mismatch");
        Self {
            width,
            height,
            values,
        }
    }

    /// Builds a field from a function of the pixel indices `(i, j)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                values.push(f(i, j));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.width && j < self.height);
        self.values[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.width && j < self.height);
        self.values[j * self.width + i] = value;
    }

    pub fn same_shape(&self, other: &ScalarField) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Mean over all pixels.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `self + scale * other`, pointwise.
    pub fn axpy(&self, scale: f64, other: &ScalarField) -> ScalarField {
        assert!(self.same_shape(other), "field shape mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        ScalarField {
            width: self.width,
            height: self.height,
            values,
        }
    }

    /// Unweighted dot product over all pixels.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        assert!(self.same_shape(other), "field shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Clamps every value into `[0, 1]` and reinterprets as an image.
    pub fn to_image_clamped(&self) -> ImageGrid {
        ImageGrid {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        }
    }
}

/// A per-pixel 2-vector field stored as two scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            x: ScalarField::zeros(width, height),
            y: ScalarField::zeros(width, height),
        }
    }

    pub fn new(x: ScalarField, y: ScalarField) -> Self {
        assert!(x.same_shape(&y), "vector field components differ in shape");
        Self { x, y }
    }

    pub fn width(&self) -> usize {
        self.x.width()
    }

    pub fn height(&self) -> usize {
        self.x.height()
    }

    pub fn same_shape(&self, other: &VectorField) -> bool {
        self.x.same_shape(&other.x)
    }

    /// `self + scale * other`, componentwise.
    pub fn axpy(&self, scale: f64, other: &VectorField) -> VectorField {
        VectorField {
            x: self.x.axpy(scale, &other.x),
            y: self.y.axpy(scale, &other.y),
        }
    }

    /// Unweighted Euclidean norm over all pixels and both components.
    pub fn norm(&self) -> f64 {
        (self.x.dot(&self.x) + self.y.dot(&self.y)).sqrt()
    }
}

/// Spacing of the pixel lattice after rescaling each axis to `[0, 1]`.
///
/// Degenerate axes (a single pixel wide or tall) get unit spacing so the
/// stencils stay well defined; derivatives along such an axis are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub hx: f64,
    pub hy: f64,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize) -> Self {
        let hx = if width > 1 {
            1.0 / (width as f64 - 1.0)
        } else {
            1.0
        };
        let hy = if height > 1 {
            1.0 / (height as f64 - 1.0)
        } else {
            1.0
        };
        Self { hx, hy }
    }

    /// Area of one quadrature cell.
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }
}

use crate::spectral::{
    curl, dealias, derivative_spectrum, divergence, inverse_laplacian_spectrum, laplacian,
    MultiIndex, ScalarField, VectorField,
};

/// A solution of incompressible Euler at one instant: velocity, pressure and vorticity.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseFlow {
    pub v: VectorField,
    pub p: ScalarField,
    pub omega: ScalarField,
}

impl BaseFlow {
    /// Builds the pressure and vorticity belonging to a divergence-free `v`.
    pub fn from_velocity(v: VectorField) -> Self {
        let p = pressure_from_velocity(&v);
        let omega = curl(&v);
        Self { v, p, omega }
    }

    /// `Δp`, equal to the truncated `∇v:∇v`.
    pub fn pressure_laplacian(&self) -> ScalarField {
        laplacian(&self.p)
    }

    pub fn divergence(&self) -> ScalarField {
        divergence(&self.v)
    }
}

/// `Σ_ij ∂_i v^j ∂_j v^i`, truncated after the grid product.
pub(crate) fn velocity_gradient_contraction(v: &VectorField) -> ScalarField {
    let sx = v.x.spectrum();
    let sy = v.y.spectrum();
    let a = derivative_spectrum(&sx, MultiIndex(1, 0)).to_field();
    let b = derivative_spectrum(&sx, MultiIndex(0, 1)).to_field();
    let c = derivative_spectrum(&sy, MultiIndex(1, 0)).to_field();
    let d = derivative_spectrum(&sy, MultiIndex(0, 1)).to_field();
    let mut q = Vec::with_capacity(a.values().len());
    for k in 0..a.values().len() {
        let (a, b, c, d) = (a.values()[k], b.values()[k], c.values()[k], d.values()[k]);
        q.push(a * a + 2.0 * b * c + d * d);
    }
    dealias(&ScalarField::new(v.grid(), q))
}

/// Zero-mean `p` with `Δp = ∇v:∇v`, the pressure of `∂_t v + v·∇v = ∇p`.
pub fn pressure_from_velocity(v: &VectorField) -> ScalarField {
    let q = velocity_gradient_contraction(v);
    debug_assert!(
        q.mean().abs() <= 1e-8 * (1.0 + q.l2_norm()),
        "velocity is not divergence-free"
    );
    inverse_laplacian_spectrum(&q.spectrum()).to_field()
}

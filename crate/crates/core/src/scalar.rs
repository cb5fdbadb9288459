use nalgebra::RealField;

/// Real scalar the entanglement kernels are generic over.
pub trait Scalar: RealField + Copy {
    /// Normalization and range tolerance appropriate for the precision.
    fn tolerance() -> Self;

    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-8
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

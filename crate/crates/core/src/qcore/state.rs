use nalgebra::DVector;

use super::{dims_product, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Complex amplitude vector over a tensor-product space. Not assumed to be
/// normalized; only norm ratios carry meaning.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(amps), dims)
    }

    pub fn from_dvector(amps: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        let expected = dims_product(&dims);
        if dims.is_empty() || expected != amps.len() {
            return Err(Error::DimensionMismatch { expected, got: amps.len() });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("state amplitudes must be finite"));
        }
        Ok(Self { amps, dims })
    }

    /// A single-factor vector.
    pub fn flat(amps: Vec<C64>) -> Self {
        let n = amps.len();
        Self { amps: DVector::from_vec(amps), dims: vec![n] }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::flat(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self { amps: DVector::from_element(dims_product(dims), ZERO), dims: dims.to_vec() }
    }

    /// Basis vector `|index>` of the space with the given factor dimensions.
    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let mut v = Self::zeros(dims);
        if index >= v.dim() {
            return Err(Error::invalid(format!("basis index {index} out of range {}", v.dim())));
        }
        v.amps[index] = ONE;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_space(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scaled(&self, factor: C64) -> StateVector {
        Self { amps: &self.amps * factor, dims: self.dims.clone() }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.check_same_space(other)?;
        Ok(Self { amps: &self.amps + &other.amps, dims: self.dims.clone() })
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        self.check_same_space(other)?;
        Ok(Self { amps: &self.amps - &other.amps, dims: self.dims.clone() })
    }

    pub(crate) fn add_assign(&mut self, other: &StateVector) -> Result<()> {
        self.check_same_space(other)?;
        self.amps += &other.amps;
        Ok(())
    }

    /// `‖self - other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub(crate) fn check_same_space(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }

    pub(crate) fn with_amplitudes(&self, amps: DVector<C64>) -> StateVector {
        debug_assert_eq!(amps.len(), self.amps.len());
        Self { amps, dims: self.dims.clone() }
    }
}

/// Kronecker product `u ⊗ v`; factor dimensions are concatenated.
pub fn tensor(u: &StateVector, v: &StateVector) -> StateVector {
    let mut amps = Vec::with_capacity(u.dim() * v.dim());
    for &x in u.amps.iter() {
        for &y in v.amps.iter() {
            amps.push(x * y);
        }
    }
    let dims = u.dims.iter().chain(v.dims.iter()).copied().collect();
    StateVector { amps: DVector::from_vec(amps), dims }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kronecker_of_basis_vectors() {
        let u = StateVector::from_real(&[1.0, 0.0]);
        let v = StateVector::from_real(&[0.0, 1.0]);
        let w = tensor(&u, &v);
        assert_eq!(w.dims(), &[2, 2]);
        assert_eq!(w, StateVector::new(vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)], vec![2, 2]).unwrap());
    }

    #[test]
    fn unit_factor_is_identity() {
        let u = StateVector::flat(vec![c(0.3, -1.0), c(2.0, 0.5)]);
        let w = tensor(&u, &StateVector::from_real(&[1.0]));
        assert_eq!(w.amplitudes(), u.amplitudes());
        assert_eq!(w.dims(), &[2, 1]);
    }

    #[test]
    fn norm_is_multiplicative() {
        let u = StateVector::flat(vec![c(0.3, -1.2), c(0.7, 0.25)]);
        let v = StateVector::flat(vec![c(-0.4, 0.1), c(1.5, 2.0)]);
        // direct sum over all four product amplitudes
        let mut direct = 0.0;
        for x in u.amplitudes().iter() {
            for y in v.amplitudes().iter() {
                direct += (x * y).norm_sqr();
            }
        }
        let w = tensor(&u, &v);
        assert!((w.norm() - direct.sqrt()).abs() < 1e-14);
        assert!((w.norm() - u.norm() * v.norm()).abs() < 1e-14);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(matches!(
            StateVector::new(vec![c(1., 0.); 3], vec![2, 2]),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn inner_is_antilinear_in_bra() {
        let u = StateVector::flat(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        let v = StateVector::flat(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(u.inner(&v).unwrap(), c(0.0, -1.0));
    }
}

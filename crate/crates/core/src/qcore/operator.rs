use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{dims_product, StateVector, Tolerances, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Dense square operator on a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let d = dims_product(&dims);
        if dims.is_empty() || d != matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows() });
        }
        Ok(Self { matrix, dims })
    }

    pub fn from_real(rows: usize, data: &[f64]) -> Result<Self> {
        if rows * rows != data.len() {
            return Err(Error::DimensionMismatch { expected: rows * rows, got: data.len() });
        }
        let m = DMatrix::from_row_iterator(rows, rows, data.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(m, vec![rows])
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d = dims_product(dims);
        Self { matrix: DMatrix::identity(d, d), dims: dims.to_vec() }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let d = dims_product(dims);
        Self { matrix: DMatrix::from_element(d, d, ZERO), dims: dims.to_vec() }
    }

    pub fn diagonal(dims: &[usize], diag: &[C64]) -> Result<Self> {
        let d = dims_product(dims);
        if diag.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: diag.len() });
        }
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(diag));
        Ok(Self { matrix: m, dims: dims.to_vec() })
    }

    /// Permutation operator with `U|i> = |perm[i]>`.
    pub fn permutation(dims: &[usize], perm: &[usize]) -> Result<Self> {
        check_permutation(dims_product(dims), perm)?;
        let d = perm.len();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (i, &j) in perm.iter().enumerate() {
            m[(j, i)] = ONE;
        }
        Ok(Self { matrix: m, dims: dims.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: state.dim() });
        }
        Ok(state.with_amplitudes(&self.matrix * state.amplitudes()))
    }

    /// `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Self { matrix: &self.matrix * &other.matrix, dims: self.dims.clone() })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, dims: self.dims.clone() })
    }

    pub fn adjoint(&self) -> Operator {
        Self { matrix: self.matrix.adjoint(), dims: self.dims.clone() }
    }

    pub fn scaled(&self, factor: C64) -> Operator {
        Self { matrix: &self.matrix * factor, dims: self.dims.clone() }
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        let dims = self.dims.iter().chain(other.dims.iter()).copied().collect();
        Self { matrix: self.matrix.kronecker(&other.matrix), dims }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn unitary_deviation(&self) -> f64 {
        let d = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(d, d)))
    }

    pub(crate) fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_permutation(d: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: perm.len() });
    }
    let mut seen = vec![false; d];
    for &j in perm {
        if j >= d || std::mem::replace(&mut seen[j], true) {
            return Err(Error::invalid("index map is not a permutation"));
        }
    }
    Ok(())
}

/// Spectral form of a Hermitian generator; evaluates `exp(-iHt/ħ)` for any `t`
/// from a single eigendecomposition.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigenvectors: DMatrix<C64>,
    eigenvalues: DVector<f64>,
    hbar: f64,
    dims: Vec<usize>,
}

impl Propagator {
    pub fn new(h: &Operator, hbar: f64, tol: &Tolerances) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid(format!("hbar must be positive, got {hbar}")));
        }
        let deviation = h.hermitian_deviation();
        if deviation > tol.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let sym = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        Ok(Self {
            eigenvectors: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
            hbar,
            dims: h.dims().to_vec(),
        })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    fn phases(&self, t: f64) -> DVector<C64> {
        self.eigenvalues.map(|e| C64::from_polar(1.0, -e * t / self.hbar))
    }

    /// `exp(-iHt/ħ)` as a dense operator.
    pub fn unitary(&self, t: f64) -> Operator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, phase) in self.phases(t).iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
        Operator { matrix: scaled * v.adjoint(), dims: self.dims.clone() }
    }

    pub fn apply(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.dim() != self.eigenvectors.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.eigenvectors.nrows(),
                got: state.dim(),
            });
        }
        let coeffs = self.eigenvectors.adjoint() * state.amplitudes();
        let rotated = coeffs.component_mul(&self.phases(t));
        Ok(state.with_amplitudes(&self.eigenvectors * rotated))
    }
}

/// `exp(-iHt/ħ)|state>` with the default tolerances.
pub fn evolve(state: &StateVector, h: &Operator, t: f64, hbar: f64) -> Result<StateVector> {
    evolve_with(state, h, t, hbar, &Tolerances::default())
}

pub fn evolve_with(
    state: &StateVector,
    h: &Operator,
    t: f64,
    hbar: f64,
    tol: &Tolerances,
) -> Result<StateVector> {
    Propagator::new(h, hbar, tol)?.apply(state, t)
}

/// Hermitian generator `H` with `exp(-iH) = U` for the permutation unitary
/// `U|i> = |perm[i]>`. Built cycle by cycle from the discrete Fourier
/// eigenvectors, so evolving one time unit reproduces the permutation to
/// round-off.
pub fn permutation_generator(dims: &[usize], perm: &[usize]) -> Result<Operator> {
    let d = dims_product(dims);
    check_permutation(d, perm)?;
    let mut h = DMatrix::from_element(d, d, ZERO);
    let mut visited = vec![false; d];
    for start in 0..d {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut next = perm[start];
        while next != start {
            visited[next] = true;
            cycle.push(next);
            next = perm[next];
        }
        let m = cycle.len();
        if m == 1 {
            continue;
        }
        let norm = 1.0 / (m as f64).sqrt();
        for k in 0..m {
            // U v_k = exp(2πik/m) v_k, so the generator eigenvalue is -2πk/m mod 2π.
            let mut theta = -2.0 * PI * k as f64 / m as f64;
            if theta <= -PI {
                theta += 2.0 * PI;
            }
            if theta == 0.0 {
                continue;
            }
            let v: Vec<C64> = (0..m)
                .map(|j| C64::from_polar(norm, -2.0 * PI * (j * k) as f64 / m as f64))
                .collect();
            for (a, &ia) in cycle.iter().enumerate() {
                for (b, &ib) in cycle.iter().enumerate() {
                    h[(ia, ib)] += v[a] * v[b].conj() * theta;
                }
            }
        }
    }
    Operator::new(h, dims.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_leaves_state_unchanged() {
        let phi = StateVector::flat(vec![C64::new(0.6, 0.1), C64::new(-0.2, 0.7)]);
        let out = evolve(&phi, &Operator::zeros(&[2]), 3.7, 1.0).unwrap();
        assert!(out.distance(&phi).unwrap() < 1e-15);
    }

    #[test]
    fn diagonal_generator_applies_half_period_phase() {
        let e = 2.5;
        let hbar = 0.8;
        let h = Operator::from_real(2, &[0.0, 0.0, 0.0, e]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let phi = StateVector::from_real(&[s, s]);
        let out = evolve(&phi, &h, PI * hbar / e, hbar).unwrap();
        let expected = StateVector::from_real(&[s, -s]);
        assert!(out.distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_generator() {
        let h = Operator::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let phi = StateVector::from_real(&[1.0, 0.0]);
        assert!(matches!(evolve(&phi, &h, 1.0, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn permutation_generator_reproduces_permutation() {
        let perm = [2, 0, 1, 4, 3, 5, 6];
        let h = permutation_generator(&[7], &perm).unwrap();
        assert!(h.hermitian_deviation() < 1e-14);
        let u = Propagator::new(&h, 1.0, &Tolerances::default()).unwrap().unitary(1.0);
        let expected = Operator::permutation(&[7], &perm).unwrap();
        assert!(u.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_non_permutation() {
        assert!(permutation_generator(&[3], &[0, 0, 1]).is_err());
        assert!(Operator::permutation(&[2], &[0, 2]).is_err());
    }

    #[test]
    fn kron_concatenates_dims() {
        let a = Operator::identity(&[2]);
        let b = Operator::identity(&[3]);
        let k = a.kron(&b);
        assert_eq!(k.dims(), &[2, 3]);
        assert_eq!(k.trace(), C64::new(6.0, 0.0));
    }
}

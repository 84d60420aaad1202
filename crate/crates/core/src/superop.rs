//! Qubit operators and linear maps on 2×2 matrices.
//!
//! A [`Superoperator`] is stored as the 4×4 matrix acting on the row-major
//! vectorization `vec(ρ) = (ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁)`.

use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use num_complex::Complex64;

pub type Op2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn identity() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> Op2 {
    Op2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Op2 {
    Op2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, -ONE)
}

/// Lowering operator `|g⟩⟨e|` with `|e⟩` the σ_z = +1 state.
pub fn sigma_minus() -> Op2 {
    Op2::new(ZERO, ZERO, ONE, ZERO)
}

pub fn sigma_plus() -> Op2 {
    Op2::new(ZERO, ONE, ZERO, ZERO)
}

pub fn paulis() -> [Op2; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// Matrix unit `|row⟩⟨col|`.
pub fn matrix_unit(row: usize, col: usize) -> Op2 {
    let mut e = Op2::zeros();
    e[(row, col)] = ONE;
    e
}

/// `ρ = (I + v·σ)/2`.
pub fn density_from_bloch(v: &Vector3<f64>) -> Op2 {
    let [sx, sy, sz] = paulis();
    (identity() + sx * Complex64::from(v[0]) + sy * Complex64::from(v[1]) + sz * Complex64::from(v[2]))
        * Complex64::from(0.5)
}

/// `v_i = Tr(σ_i ρ)` (real parts).
pub fn bloch_from_density(rho: &Op2) -> Vector3<f64> {
    let p = paulis();
    Vector3::new((p[0] * rho).trace().re, (p[1] * rho).trace().re, (p[2] * rho).trace().re)
}

pub fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<Complex64, R, C>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn vectorize(rho: &Op2) -> Vector4<Complex64> {
    Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)])
}

fn unvectorize(v: &Vector4<Complex64>) -> Op2 {
    Op2::new(v[0], v[1], v[2], v[3])
}

/// Linear map on qubit operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superoperator(pub Matrix4<Complex64>);

impl Superoperator {
    pub fn zero() -> Self {
        Superoperator(Matrix4::zeros())
    }

    /// Tabulates a linear map from its action on the matrix units.
    pub fn from_map<F: Fn(&Op2) -> Op2>(map: F) -> Self {
        let mut m = Matrix4::zeros();
        for col in 0..4 {
            let image = vectorize(&map(&matrix_unit(col / 2, col % 2)));
            m.set_column(col, &image);
        }
        Superoperator(m)
    }

    pub fn apply(&self, rho: &Op2) -> Op2 {
        unvectorize(&(self.0 * vectorize(rho)))
    }

    /// Largest entry modulus.
    pub fn scale(&self) -> f64 {
        max_abs(&self.0)
    }

    /// Largest entry-wise difference of the two matrices.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        max_abs(&(self.0 - other.0))
    }

    /// Affine Bloch-vector flow `v̇ = M v + b` induced by this map.
    pub fn to_bloch(&self) -> (nalgebra::Matrix3<f64>, Vector3<f64>) {
        let p = paulis();
        let b = bloch_from_density(&self.apply(&identity())) * 0.5;
        let mut m = nalgebra::Matrix3::zeros();
        for (j, pj) in p.iter().enumerate() {
            let col = bloch_from_density(&self.apply(pj)) * 0.5;
            m.set_column(j, &col);
        }
        // L(I) = b·σ and L(σ_j) = Σ_i M_ij σ_i; Tr(σ_i σ_k) = 2δ_ik
        (m, b)
    }
}

impl std::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Self) -> Self {
        Superoperator(self.0 + rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let [x, y, z] = paulis();
        assert_eq!(x * y, z * I);
        assert_eq!(sigma_plus() + sigma_minus(), x);
        assert_eq!((sigma_plus() - sigma_minus()) * I, -y);
    }

    #[test]
    fn bloch_round_trip() {
        let v = Vector3::new(0.1, -0.4, 0.3);
        let back = bloch_from_density(&density_from_bloch(&v));
        assert!((back - v).norm() < 1e-15);
    }

    #[test]
    fn tabulated_map_reproduces_action() {
        let x = sigma_x();
        let sup = Superoperator::from_map(|r| x * r * x - r);
        let rho = density_from_bloch(&Vector3::new(0.2, 0.3, -0.5));
        assert!(max_abs(&(sup.apply(&rho) - (x * rho * x - rho))) < 1e-15);
        let (m, b) = sup.to_bloch();
        // σx ρ σx − ρ damps v_y and v_z at rate 2
        assert!((m - nalgebra::Matrix3::new(0.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, -2.0)).norm() < 1e-15);
        assert!(b.norm() < 1e-15);
    }
}

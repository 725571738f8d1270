//! Hopping matrices, Gaussian disorder and Hamiltonian assembly.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::rng::{substream_seed, GaussianStream};
use crate::{Error, Result};

/// Largest lattice the dense code paths accept.
pub const MAX_SITES: usize = 4096;

/// Physical knobs of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Number of lattice sites `N`.
    pub n: usize,
    /// Disorder standard deviation, `<v_i^2> = w^2`.
    pub w: f64,
    /// Target energy `E`.
    pub energy: f64,
    /// Master seed for the disorder streams.
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, w: f64, energy: f64, seed: u64) -> Result<Self> {
        let p = Self { n, w, energy, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > MAX_SITES {
            return Err(Error::InvalidDimension(format!(
                "lattice size must be in [2, {MAX_SITES}], got {}",
                self.n
            )));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "disorder strength must be positive and finite, got {}",
                self.w
            )));
        }
        if !self.energy.is_finite() {
            return Err(Error::InvalidInput(format!(
                "target energy must be finite, got {}",
                self.energy
            )));
        }
        Ok(())
    }
}

/// Deterministic hopping amplitudes `T_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMatrix {
    entries: Matrix,
    zero_diagonal: bool,
}

impl HoppingMatrix {
    /// Symmetric matrix from row-major entries.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        let m = Matrix::from_row_major(n, n, entries).ok_or_else(|| {
            Error::InvalidDimension(format!("expected {} hopping entries", n * n))
        })?;
        Self::from_matrix(m)
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidDimension("hopping matrix must be square".into()));
        }
        if m.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("hopping matrix has non-finite entries".into()));
        }
        if !m.is_symmetric() {
            return Err(Error::InvalidInput("hopping matrix must be exactly symmetric".into()));
        }
        let zero_diagonal = (0..m.rows()).all(|i| m[(i, i)] == 0.0);
        Ok(Self {
            entries: m,
            zero_diagonal,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    /// Same matrix with the diagonal set to zero.
    pub fn without_diagonal(&self) -> Self {
        let mut m = self.entries.clone();
        for i in 0..m.rows() {
            m[(i, i)] = 0.0;
        }
        Self {
            entries: m,
            zero_diagonal: true,
        }
    }
}

/// The simplex hopping matrix: every entry, diagonal included, is `1/n`.
pub fn build_simplex_hopping(n: usize) -> Result<HoppingMatrix> {
    if !(2..=MAX_SITES).contains(&n) {
        return Err(Error::InvalidDimension(format!(
            "simplex needs 2 <= n <= {MAX_SITES}, got {n}"
        )));
    }
    let t = 1.0 / n as f64;
    Ok(HoppingMatrix {
        entries: Matrix::from_fn(n, n, |_, _| t),
        zero_diagonal: false,
    })
}

/// One draw of the on-site energies.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub values: Vec<f64>,
    pub realization_index: u64,
    pub substream_seed: u64,
}

/// `n` independent `N(0, w²)` energies for realization `realization_index`.
///
/// The stream depends only on `(params.seed, realization_index)`.
pub fn sample_disorder(params: &ModelParams, realization_index: u64) -> Result<DisorderRealization> {
    params.validate()?;
    let seed = substream_seed(params.seed, realization_index);
    let mut stream = GaussianStream::new(seed);
    let values = (0..params.n).map(|_| stream.normal(params.w)).collect();
    Ok(DisorderRealization {
        values,
        realization_index,
        substream_seed: seed,
    })
}

/// Dense real symmetric Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    entries: Matrix,
}

impl Hamiltonian {
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidDimension("Hamiltonian must be square".into()));
        }
        if !m.is_symmetric() {
            return Err(Error::InvalidInput("Hamiltonian must be exactly symmetric".into()));
        }
        Ok(Self { entries: m })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }
}

/// `H = T + diag(v)`.
pub fn assemble_hamiltonian(t: &HoppingMatrix, v: &DisorderRealization) -> Result<Hamiltonian> {
    assemble_with_potential(t, &v.values)
}

pub fn assemble_with_potential(t: &HoppingMatrix, v: &[f64]) -> Result<Hamiltonian> {
    let n = t.n();
    if v.len() != n {
        return Err(Error::InvalidDimension(format!(
            "hopping matrix is {n}x{n} but the potential has {} sites",
            v.len()
        )));
    }
    let mut m = t.entries.clone();
    for (i, vi) in v.iter().enumerate() {
        m[(i, i)] += vi;
    }
    Ok(Hamiltonian { entries: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn simplex_entries() {
        let t = build_simplex_hopping(4).unwrap();
        assert!(t.entries().as_slice().iter().all(|&x| x == 0.25));
        assert!(!t.zero_diagonal());

        let t2 = build_simplex_hopping(2).unwrap();
        assert_eq!(t2.entries().as_slice(), &[0.5, 0.5, 0.5, 0.5]);

        assert!(matches!(build_simplex_hopping(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn assemble_small() {
        let t = build_simplex_hopping(2).unwrap();
        let zero = assemble_with_potential(&t, &[0.0, 0.0]).unwrap();
        assert_eq!(zero.entries().as_slice(), &[0.5, 0.5, 0.5, 0.5]);

        let h = assemble_with_potential(&t, &[1.0, -1.0]).unwrap();
        assert_eq!(h.entries().as_slice(), &[1.5, 0.5, 0.5, -0.5]);

        let t3 = build_simplex_hopping(3).unwrap();
        let h3 = assemble_with_potential(&t3, &[0.3, -2.0, 7.5]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(h3.entries()[(i, j)], 1.0 / 3.0);
                }
            }
        }
        assert!(h3.entries().is_symmetric());

        assert!(matches!(
            assemble_with_potential(&t3, &[0.0, 1.0]),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn disorder_is_reproducible() {
        let p = ModelParams::new(16, 1.5, 0.0, 42).unwrap();
        let a = sample_disorder(&p, 5).unwrap();
        let b = sample_disorder(&p, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 16);
        let c = sample_disorder(&p, 6).unwrap();
        assert_ne!(a.values, c.values);
        let p0 = ModelParams::new(16, 1.5, 0.0, 42).unwrap();
        let d0 = sample_disorder(&p0, 0).unwrap();
        let d1 = sample_disorder(&p0, 1).unwrap();
        assert!(d0.values.iter().zip(&d1.values).any(|(x, y)| x != y));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 1.0, 0.0, 0).is_err());
        assert!(ModelParams::new(4, 0.0, 0.0, 0).is_err());
        assert!(ModelParams::new(4, -1.0, 0.0, 0).is_err());
        assert!(ModelParams::new(4, 1.0, f64::NAN, 0).is_err());
    }

    #[test]
    fn hopping_from_entries_checks_symmetry() {
        assert!(HoppingMatrix::from_entries(2, vec![0.0, 1.0, 0.5, 0.0]).is_err());
        let h = HoppingMatrix::from_entries(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(h.zero_diagonal());
        assert!(build_simplex_hopping(3).unwrap().without_diagonal().zero_diagonal());
    }
}

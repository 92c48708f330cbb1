//! Matrices of rational functions with annihilation/creation port tags.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rational::RationalFunction;
use crate::scalar::{Scalar, C};
use num_traits::{One, Zero};

/// Whether a port carries an annihilation operator `b` or a creation operator `b†`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Port {
    Annihilation,
    Creation,
}

impl Port {
    /// Commutator sign: `+1` for `b`, `−1` for `b†`.
    pub fn sign(self) -> f64 {
        match self {
            Port::Annihilation => 1.0,
            Port::Creation => -1.0,
        }
    }
}

/// `m × n` matrix of rational functions mapping `n` input ports to `m` output ports.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<RationalFunction<T>>,
    sig_in: Vec<Port>,
    sig_out: Vec<Port>,
}

impl<T: Scalar> TransferMatrix<T> {
    /// Row-major entries; `sig_in` has length `cols`, `sig_out` length `rows`.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<RationalFunction<T>>,
        sig_in: Vec<Port>,
        sig_out: Vec<Port>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if sig_in.len() != cols || sig_out.len() != rows {
            return Err(Error::Signature(format!(
                "signature lengths ({}, {}) for a {rows}x{cols} matrix",
                sig_in.len(),
                sig_out.len()
            )));
        }
        Ok(Self { rows, cols, entries, sig_in, sig_out })
    }

    /// 2×2 matrix from `[[a, b], [c, d]]`.
    pub fn from_2x2(
        e: [[RationalFunction<T>; 2]; 2],
        sig_in: [Port; 2],
        sig_out: [Port; 2],
    ) -> Self {
        let [[a, b], [c, d]] = e;
        Self { rows: 2, cols: 2, entries: vec![a, b, c, d], sig_in: sig_in.to_vec(), sig_out: sig_out.to_vec() }
    }

    /// Constant matrix with the given port tags.
    pub fn constant(m: &CMatrix<T>, sig_in: Vec<Port>, sig_out: Vec<Port>) -> Result<Self> {
        let entries = m.as_slice().iter().map(|&z| RationalFunction::constant(z)).collect();
        Self::new(m.rows(), m.cols(), entries, sig_in, sig_out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sig_in(&self) -> &[Port] {
        &self.sig_in
    }

    pub fn sig_out(&self) -> &[Port] {
        &self.sig_out
    }

    /// Zero-based entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> &RationalFunction<T> {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) out of range");
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[RationalFunction<T>] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&RationalFunction<T>) -> RationalFunction<T>) -> Self {
        Self { entries: self.entries.iter().map(f).collect(), ..self.clone() }
    }

    /// Same entries under new port tags.
    pub fn with_signature(&self, sig_in: Vec<Port>, sig_out: Vec<Port>) -> Result<Self> {
        Self::new(self.rows, self.cols, self.entries.clone(), sig_in, sig_out)
    }

    /// Determinant of a 2×2 matrix, `a d − b c`.
    pub fn det2(&self) -> Result<RationalFunction<T>> {
        if self.rows != 2 || self.cols != 2 {
            return Err(Error::Dimension("det2 needs a 2x2 matrix".into()));
        }
        Ok(&(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0)))
    }

    pub fn eval(&self, s: C<T>) -> Result<CMatrix<T>> {
        let vals = self.entries.iter().map(|r| r.eval(s)).collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_rows(self.rows, self.cols, vals))
    }

    /// Entrywise para-conjugate, without transposition.
    pub fn para_conjugate(&self) -> Self {
        self.map(|r| r.para_conjugate())
    }

    /// Commutator metric `diag(±1)` of the input ports.
    pub fn metric_in(&self) -> CMatrix<T> {
        metric(&self.sig_in)
    }

    /// Commutator metric `diag(±1)` of the output ports.
    pub fn metric_out(&self) -> CMatrix<T> {
        metric(&self.sig_out)
    }

    pub fn cast<U: Scalar>(&self) -> TransferMatrix<U> {
        TransferMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|r| r.cast()).collect(),
            sig_in: self.sig_in.clone(),
            sig_out: self.sig_out.clone(),
        }
    }
}

fn metric<T: Scalar>(sig: &[Port]) -> CMatrix<T> {
    let d: Vec<C<T>> = sig
        .iter()
        .map(|p| if p.sign() > 0.0 { C::<T>::one() } else { -C::<T>::one() })
        .collect();
    CMatrix::diag(&d)
}

/// Ensures a closed-loop formula sees the port layout it was derived for.
pub(crate) fn expect_signature<T: Scalar>(
    m: &TransferMatrix<T>,
    name: &str,
    sig_in: &[Port],
    sig_out: &[Port],
) -> Result<()> {
    if m.sig_in() != sig_in || m.sig_out() != sig_out {
        return Err(Error::Signature(format!(
            "{name}: expected {sig_in:?} -> {sig_out:?}, got {:?} -> {:?}",
            m.sig_in(),
            m.sig_out()
        )));
    }
    Ok(())
}

/// True when no entry has a nonzero numerator.
pub fn is_zero_matrix<T: Scalar>(m: &TransferMatrix<T>) -> bool {
    m.entries().iter().all(|e| e.num().coeffs().iter().all(|c| c.is_zero()))
}

//! Dense state vectors, density operators, and symmetric (Dicke) bases for
//! small multi-qubit registers.
//!
//! Registers are capped at [`MAX_QUBITS`] qubits, so everything is stored as
//! dense `nalgebra` vectors and matrices. Flat index convention: qubit 1 is
//! the most significant tensor factor, and each qubit contributes basis index
//! 0 for `|1>` and 1 for `|0>` (see [`crate::qubit`]).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::qubit::PureQubit;
use crate::{Error, Result};

/// Largest register size the dense representation supports (dimension 4096).
pub const MAX_QUBITS: usize = 12;

/// Exact binomial coefficient as `f64`; zero for `k` out of range.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

fn check_register_size(qubits: usize) -> Result<()> {
    if qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "register of {qubits} qubits exceeds the supported maximum {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Pure state of an `m`-qubit register as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Single-qubit state vector of `q` in the computational basis.
    pub fn from_qubit(q: &PureQubit) -> Self {
        let a = q.amplitudes();
        Self {
            qubits: 1,
            amps: DVector::from_vec(vec![a[0], a[1]]),
        }
    }

    /// Single-qubit state orthogonal to `q`.
    pub fn orthogonal_to(q: &PureQubit) -> Self {
        let a = q.orthogonal_amplitudes();
        Self {
            qubits: 1,
            amps: DVector::from_vec(vec![a[0], a[1]]),
        }
    }

    /// Wraps raw amplitudes; the length must be a power of two between `2`
    /// and `2^MAX_QUBITS`. Amplitudes are taken as given (no normalization).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        check_register_size(qubits)?;
        Ok(Self {
            qubits,
            amps: DVector::from_vec(amps),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// Tensor product with `self` as the more significant factor.
    pub fn tensor(&self, rhs: &Self) -> Result<Self> {
        check_register_size(self.qubits + rhs.qubits)?;
        Ok(Self {
            qubits: self.qubits + rhs.qubits,
            amps: self.amps.kronecker(&rhs.amps),
        })
    }

    /// Inner product `<self|rhs>` (left argument conjugated).
    pub fn inner(&self, rhs: &Self) -> Result<Complex64> {
        if self.dim() != rhs.dim() {
            return Err(Error::invalid(format!(
                "inner product between dimensions {} and {}",
                self.dim(),
                rhs.dim()
            )));
        }
        Ok(self.amps.dotc(&rhs.amps))
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Projector `|v><v|` as a density operator; trace equals `norm()^2`.
    pub fn outer(&self) -> DensityOperator {
        DensityOperator {
            qubits: self.qubits,
            mat: &self.amps * self.amps.adjoint(),
        }
    }
}

/// Mixed state of an `m`-qubit register as a dense matrix.
///
/// A zero-qubit operator (the `1 x 1` matrix left after measuring the last
/// qubit of a register) is allowed so that measurement chains need no special
/// final case.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    qubits: usize,
    mat: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Wraps a square matrix of power-of-two dimension. Hermiticity and
    /// positivity are the caller's responsibility; tests use
    /// [`DensityOperator::hermiticity_error`] and
    /// [`DensityOperator::min_eigenvalue`] to verify them.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || mat.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "density matrix shape {}x{} is not square power-of-two",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        check_register_size(qubits)?;
        Ok(Self { qubits, mat })
    }

    /// Projector onto a pure state (normalized iff `v` is).
    pub fn from_pure(v: &StateVector) -> Self {
        v.outer()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Real part of the trace (the imaginary part of a physical state's
    /// trace is zero up to rounding).
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Tensor product with `self` as the more significant factor.
    pub fn tensor(&self, rhs: &Self) -> Result<Self> {
        check_register_size(self.qubits + rhs.qubits)?;
        Ok(Self {
            qubits: self.qubits + rhs.qubits,
            mat: self.mat.kronecker(&rhs.mat),
        })
    }

    /// Scales the matrix in place (used to mix weighted projectors).
    pub fn scale(&mut self, factor: f64) {
        self.mat.scale_mut(factor);
    }

    /// Adds `weight * |v><v|` in place; `v` must match this register.
    pub fn add_scaled_projector(&mut self, v: &StateVector, weight: f64) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "projector dimension {} does not match operator dimension {}",
                v.dim(),
                self.dim()
            )));
        }
        let w = Complex64::new(weight, 0.0);
        self.mat.gerc(w, v.amplitudes(), v.amplitudes(), Complex64::new(1.0, 0.0));
        Ok(())
    }

    /// Zero matrix on `qubits` qubits, ready for projector accumulation.
    pub fn zeros(qubits: usize) -> Result<Self> {
        check_register_size(qubits)?;
        let dim = 1usize << qubits;
        Ok(Self {
            qubits,
            mat: DMatrix::zeros(dim, dim),
        })
    }

    /// Reduced single-qubit state of qubit 1 (the most significant factor),
    /// obtained by tracing out all other qubits.
    pub fn partial_trace_to_first(&self) -> Result<DensityOperator> {
        if self.qubits == 0 {
            return Err(Error::invalid(
                "cannot take a single-qubit marginal of a zero-qubit operator",
            ));
        }
        let half = self.dim() / 2;
        let mut out = DMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..half {
                    acc += self.mat[(a * half + t, b * half + t)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityOperator { qubits: 1, mat: out })
    }

    /// Contracts qubit `target` (0-based from the most significant factor)
    /// with the rank-1 projector onto the single-qubit state `v`.
    ///
    /// Returns the branch probability `p = Tr[(|v><v| (x) 1) rho]` and, when
    /// `p` is at or above [`crate::measure::PROB_FLOOR`], the unnormalized
    /// conditional operator on the remaining qubits (its trace equals `p`).
    /// Branches below the floor return `None`: they are unreachable and have
    /// no well-defined conditional state.
    pub fn apply_single_qubit_projector(
        &self,
        target: usize,
        v: &StateVector,
    ) -> Result<(f64, Option<DensityOperator>)> {
        if self.qubits == 0 {
            return Err(Error::invalid("cannot project a zero-qubit operator"));
        }
        if target >= self.qubits {
            return Err(Error::invalid(format!(
                "projector target {target} out of range for {} qubits",
                self.qubits
            )));
        }
        if v.qubits() != 1 {
            return Err(Error::invalid(format!(
                "projector state has {} qubits, expected 1",
                v.qubits()
            )));
        }
        let amps = [v.amplitude(0), v.amplitude(1)];
        let low = 1usize << (self.qubits - 1 - target);
        let high = 1usize << target;
        let out_dim = self.dim() / 2;
        let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
        // Column-major fill: the output column index is (h2, l2).
        for h2 in 0..high {
            for l2 in 0..low {
                let col = h2 * low + l2;
                for h1 in 0..high {
                    for l1 in 0..low {
                        let row = h1 * low + l1;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for b1 in 0..2 {
                            for b2 in 0..2 {
                                let i = (h1 * 2 + b1) * low + l1;
                                let j = (h2 * 2 + b2) * low + l2;
                                acc += amps[b1].conj() * self.mat[(i, j)] * amps[b2];
                            }
                        }
                        out[(row, col)] = acc;
                    }
                }
            }
        }
        let conditional = DensityOperator {
            qubits: self.qubits - 1,
            mat: out,
        };
        let p = conditional.trace();
        if p < crate::measure::PROB_FLOOR {
            Ok((p.max(0.0), None))
        } else {
            Ok((p, Some(conditional)))
        }
    }

    /// Largest absolute difference between the matrix and its adjoint.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.mat - self.mat.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part, for positivity checks.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.mat + self.mat.adjoint()).scale(0.5);
        let eigs = herm.symmetric_eigenvalues();
        eigs.iter().fold(f64::INFINITY, |m, &e| m.min(e))
    }
}

/// Orthonormal basis of the permutation-symmetric subspace of `m` qubits,
/// aligned with a reference axis.
///
/// `vector(k)` is the normalized symmetric superposition with `k` qubits in
/// the state orthogonal to the axis and `m - k` qubits along it; `k` runs
/// from `0` to `m`, so the basis has `m + 1` elements.
#[derive(Debug, Clone)]
pub struct DickeBasis {
    qubits: usize,
    axis: PureQubit,
    vectors: Vec<StateVector>,
}

impl DickeBasis {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn axis(&self) -> &PureQubit {
        &self.axis
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vector(&self, k: usize) -> &StateVector {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }
}

/// Builds the symmetric basis about `axis` for `1 <= m <= MAX_QUBITS` qubits.
///
/// Uses the recursion that prepends one qubit to the `(m-1)`-qubit basis:
/// `D_k^m = sqrt((m-k)/m) |axis> D_k^{m-1} + sqrt(k/m) |axis_perp> D_{k-1}^{m-1}`.
pub fn dicke_basis(m: usize, axis: &PureQubit) -> Result<DickeBasis> {
    if m == 0 {
        return Err(Error::invalid("Dicke basis needs at least one qubit"));
    }
    check_register_size(m)?;
    let base = StateVector::from_qubit(axis);
    let orth = StateVector::orthogonal_to(axis);
    let mut level: Vec<StateVector> = vec![base.clone(), orth.clone()];
    for m_cur in 2..=m {
        let mut next = Vec::with_capacity(m_cur + 1);
        for k in 0..=m_cur {
            let dim = 1usize << m_cur;
            let mut amps = DVector::<Complex64>::zeros(dim);
            if k < m_cur {
                let stay = ((m_cur - k) as f64 / m_cur as f64).sqrt();
                amps += base.tensor(&level[k])?.amplitudes().scale(stay);
            }
            if k > 0 {
                let flip = (k as f64 / m_cur as f64).sqrt();
                amps += orth.tensor(&level[k - 1])?.amplitudes().scale(flip);
            }
            next.push(StateVector {
                qubits: m_cur,
                amps,
            });
        }
        level = next;
    }
    Ok(DickeBasis {
        qubits: m,
        axis: *axis,
        vectors: level,
    })
}

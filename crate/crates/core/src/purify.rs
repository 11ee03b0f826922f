//! Purification protocol math: the depolarized input qubit, the distribution
//! over distilled register sizes, and the distilled states themselves.
//!
//! A noisy channel keeps a transmitted qubit with probability `c1` and flips
//! it to the orthogonal state with probability `c0 = 1 - c1`. Distilling an
//! `N`-copy ensemble succeeds with register size `M` (same parity as `N`)
//! with probability `p_M`, and the resulting `M`-qubit state is diagonal in
//! the symmetric (Dicke) basis about the original direction with geometric
//! weights `w_k ~ c1^(M-k) c0^k`. Everything here is closed-form; the
//! integral-based [`purified_state_oracle`] exists so tests can validate the
//! closed forms against an independent quadrature route.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::qubit::PureQubit;
use crate::state::{binomial, dicke_basis, DensityOperator, DickeBasis, StateVector, MAX_QUBITS};
use crate::{Error, Result};

/// Depolarizing channel parameterized by the retention probability `c1`.
///
/// The domain is `0.5 <= c1 <= 1`: below one half the "kept" state is the
/// less likely one and the protocol's premise breaks down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    c1: f64,
}

impl ChannelSpec {
    pub fn new(c1: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&c1) {
            return Err(Error::invalid(format!(
                "channel retention probability {c1} outside [0.5, 1]"
            )));
        }
        Ok(Self { c1 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c0(&self) -> f64 {
        1.0 - self.c1
    }

    /// Bloch-vector contraction factor `c1 - c0` of the channel.
    pub fn contrast(&self) -> f64 {
        self.c1 - self.c0()
    }
}

/// Single qubit after the channel: `c1 |a><a| + c0 |a_perp><a_perp|`.
pub fn depolarized_qubit(axis: &PureQubit, channel: &ChannelSpec) -> DensityOperator {
    let mut rho = StateVector::from_qubit(axis).outer();
    rho.scale(channel.c1());
    rho.add_scaled_projector(&StateVector::orthogonal_to(axis), channel.c0())
        .expect("dimensions match by construction");
    rho
}

/// `S_M = sum_{j=0}^{M} c1^(M-j) c0^j`, the normalization shared by `p_M`,
/// the Dicke weights, and `f_M`. This power-sum form stays finite at
/// `c1 = c0 = 1/2`, where the quotient form `(c1^(M+1)-c0^(M+1))/(c1-c0)`
/// degenerates to 0/0.
fn symmetric_weight_sum(m: usize, channel: &ChannelSpec) -> f64 {
    let (c1, c0) = (channel.c1(), channel.c0());
    (0..=m).map(|j| c1.powi((m - j) as i32) * c0.powi(j as i32)).sum()
}

/// Distribution of the distilled register size `M` for an `N`-copy input.
#[derive(Debug, Clone)]
pub struct PurificationDistribution {
    n: usize,
    channel: ChannelSpec,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl PurificationDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn channel(&self) -> &ChannelSpec {
        &self.channel
    }

    /// Register sizes in ascending order; they share the parity of `N`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of distilling exactly `m` qubits (zero off the support).
    pub fn prob(&self, m: usize) -> f64 {
        if m > self.n || m % 2 != self.n % 2 {
            return 0.0;
        }
        self.probs[(m - self.sizes[0]) / 2]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sizes.iter().copied().zip(self.probs.iter().copied())
    }

    /// Draws a register size by inverse CDF; consumes one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (m, p) in self.iter() {
            acc += p;
            if u < acc {
                return m;
            }
        }
        // Rounding can leave the cumulative sum a few ulp short of 1.
        *self.sizes.last().expect("distribution is never empty")
    }
}

/// Success probabilities `p_M` of the distillation measurement:
/// `p_M = [C(N,(N-M)/2) - C(N,(N-M)/2-1)] (c0 c1)^((N-M)/2) S_M`.
pub fn purification_distribution(
    n: usize,
    channel: &ChannelSpec,
) -> Result<PurificationDistribution> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "ensemble size {n} outside 1..={MAX_QUBITS}"
        )));
    }
    let (c1, c0) = (channel.c1(), channel.c0());
    let mut sizes = Vec::new();
    let mut probs = Vec::new();
    let mut m = n % 2;
    while m <= n {
        let k = (n - m) / 2;
        let bracket = binomial(n, k) - if k == 0 { 0.0 } else { binomial(n, k - 1) };
        let p = bracket * (c0 * c1).powi(k as i32) * symmetric_weight_sum(m, channel);
        sizes.push(m);
        probs.push(p.max(0.0));
        m += 2;
    }
    Ok(PurificationDistribution {
        n,
        channel: *channel,
        sizes,
        probs,
    })
}

/// Distilled `M`-qubit state, stored by its Dicke-basis weights about the
/// original direction: `rho_M = sum_k w_k |D_k><D_k|` with
/// `w_k = c1^(M-k) c0^k / S_M`.
#[derive(Debug, Clone)]
pub struct PurifiedState {
    m: usize,
    axis: PureQubit,
    channel: ChannelSpec,
    weights: Vec<f64>,
}

impl PurifiedState {
    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn axis(&self) -> &PureQubit {
        &self.axis
    }

    pub fn channel(&self) -> &ChannelSpec {
        &self.channel
    }

    /// Dicke weights `w_0..=w_M`; they sum to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The symmetric basis this state is diagonal in.
    pub fn basis(&self) -> DickeBasis {
        dicke_basis(self.m, &self.axis).expect("size validated at construction")
    }

    /// Dense matrix `sum_k w_k |D_k><D_k|`.
    pub fn density(&self) -> DensityOperator {
        let basis = self.basis();
        let mut rho = DensityOperator::zeros(self.m).expect("size validated at construction");
        for (k, &w) in self.weights.iter().enumerate() {
            rho.add_scaled_projector(basis.vector(k), w)
                .expect("basis dimension matches by construction");
        }
        rho
    }
}

/// Closed-form distilled state for `1 <= m <= MAX_QUBITS`.
pub fn purified_state(m: usize, axis: &PureQubit, channel: &ChannelSpec) -> Result<PurifiedState> {
    if m == 0 || m > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "distilled register size {m} outside 1..={MAX_QUBITS}"
        )));
    }
    let (c1, c0) = (channel.c1(), channel.c0());
    let s = symmetric_weight_sum(m, channel);
    let weights = (0..=m)
        .map(|k| c1.powi((m - k) as i32) * c0.powi(k as i32) / s)
        .collect();
    Ok(PurifiedState {
        m,
        axis: *axis,
        channel: *channel,
        weights,
    })
}

/// Single-qubit fidelity of the distilled state: the overlap of the
/// one-qubit marginal with the original direction,
/// `f_M = sum_k w_k (M - k) / M`, and `f_0 = 1/2` by convention (a failed
/// distillation carries no information).
pub fn single_qubit_fidelity(m: usize, channel: &ChannelSpec) -> f64 {
    if m == 0 {
        return 0.5;
    }
    let (c1, c0) = (channel.c1(), channel.c0());
    let s = symmetric_weight_sum(m, channel);
    let num: f64 = (0..=m)
        .map(|k| c1.powi((m - k) as i32) * c0.powi(k as i32) * (m - k) as f64)
        .sum();
    num / (s * m as f64)
}

/// Protocol figure of merit `sum_M p_M f_M`; never below `c1`.
pub fn mean_purified_fidelity(dist: &PurificationDistribution) -> f64 {
    dist.iter()
        .map(|(m, p)| p * single_qubit_fidelity(m, dist.channel()))
        .sum()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence. Exact (to rounding) for polynomials of degree
/// `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("quadrature needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * d * d);
    }
    nodes.reverse();
    weights.reverse();
    Ok((nodes, weights))
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Quadrature route to the distilled state, independent of the Dicke closed
/// form: integrates
/// `(M+1)/(4 pi S_M) n(theta)^M |Psi(theta,phi)><Psi(theta,phi)|^(x M)`
/// over the sphere with `cos_nodes` Gauss-Legendre nodes in `cos(theta)` and
/// `phi_nodes` equally spaced azimuthal nodes, where
/// `n(theta) = c1 cos^2(theta/2) + c0 sin^2(theta/2)` and `|Psi>` is the
/// normalized kept-plus-flipped superposition about `axis`.
///
/// The integrand is a polynomial of degree `M` in `cos(theta)` times
/// azimuthal harmonics up to order `M`, so `cos_nodes > M/2` and
/// `phi_nodes > 2M` already make the quadrature exact to rounding.
pub fn purified_state_oracle(
    m: usize,
    axis: &PureQubit,
    channel: &ChannelSpec,
    cos_nodes: usize,
    phi_nodes: usize,
) -> Result<DensityOperator> {
    if m == 0 || m > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "distilled register size {m} outside 1..={MAX_QUBITS}"
        )));
    }
    if phi_nodes == 0 {
        return Err(Error::invalid("quadrature needs at least one azimuthal node"));
    }
    let (c1, c0) = (channel.c1(), channel.c0());
    let s = symmetric_weight_sum(m, channel);
    let base = StateVector::from_qubit(axis);
    let orth = StateVector::orthogonal_to(axis);
    let (nodes, gl_weights) = gauss_legendre(cos_nodes)?;
    let mut rho = DensityOperator::zeros(m)?;
    let phi_weight = 1.0 / phi_nodes as f64;
    for (&u, &gw) in nodes.iter().zip(gl_weights.iter()) {
        let cos_half = ((1.0 + u) / 2.0).sqrt();
        let sin_half = ((1.0 - u) / 2.0).sqrt();
        let density_n = c1 * cos_half * cos_half + c0 * sin_half * sin_half;
        let alpha = (c1.sqrt() * cos_half / density_n.sqrt()).min(1.0);
        let beta_mag = c0.sqrt() * sin_half / density_n.sqrt();
        // Full node weight: GL x uniform azimuth x (M+1)/(4 pi S_M) n^M,
        // with the 2 pi from the azimuth measure folded into phi_weight.
        let node_weight =
            gw * phi_weight * 0.5 * (m as f64 + 1.0) / s * density_n.powi(m as i32);
        for j in 0..phi_nodes {
            let phi = std::f64::consts::TAU * j as f64 / phi_nodes as f64;
            let beta = Complex64::from_polar(beta_mag, phi);
            let single = DVector::from_vec(vec![
                base.amplitudes()[0] * alpha + orth.amplitudes()[0] * beta,
                base.amplitudes()[1] * alpha + orth.amplitudes()[1] * beta,
            ]);
            let mut product = single.clone();
            for _ in 1..m {
                product = product.kronecker(&single);
            }
            let sv = StateVector::from_amplitudes(product.iter().copied().collect())?;
            rho.add_scaled_projector(&sv, node_weight)?;
        }
    }
    Ok(rho)
}

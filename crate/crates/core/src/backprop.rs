//! Batch backpropagation as matrix products.
//!
//! For each layer the error signal is `δ = ∂E/∂ψ ⊙ ψ(1 − ψ)` and the weight
//! gradient is `φᵀ · δ`, where `φ` is the bias-augmented layer input kept in
//! the [`ForwardTrace`]. At the output `∂E/∂ψ = (ψ − t)/b`; below it,
//! `∂E/∂ψ = δ_next · W_nextᵀ` with the bias row of `W_next` left out, since
//! the constant bias input does not depend on the previous layer.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::network::{ForwardTrace, Network};
use crate::tensor::Matrix;

/// Per-layer `∂E/∂W`, one matrix per weight matrix of the owning network.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub grads: Vec<Matrix>,
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            grads: net
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.grads
    }

    pub fn is_zero(&self) -> bool {
        self.grads
            .iter()
            .all(|g| g.as_slice().iter().all(|&v| v == 0.0))
    }

    /// Largest absolute entrywise difference; `None` if shapes differ.
    pub fn max_abs_diff(&self, other: &GradientSet) -> Option<f64> {
        if self.grads.len() != other.grads.len() {
            return None;
        }
        self.grads
            .iter()
            .zip(&other.grads)
            .map(|(a, b)| a.max_abs_diff(b))
            .try_fold(0.0, |acc, d| d.map(|d| f64::max(acc, d)))
    }

    pub(crate) fn check_congruent(&self, net: &Network) -> Result<()> {
        if self.grads.len() != net.depth() {
            return Err(Error::InvalidArgument(format!(
                "gradient set has {} layers, network has {}",
                self.grads.len(),
                net.depth()
            )));
        }
        for (g, w) in self.grads.iter().zip(net.weights()) {
            if g.shape() != w.shape() {
                return Err(Error::shape("gradient/weights", g.shape(), w.shape()));
            }
        }
        Ok(())
    }
}

/// Error signal of one layer, shape `(batch, fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix(pub Matrix);

impl Deref for DeltaMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// `ψ(1 − ψ)`, the sigmoid derivative written in terms of its output.
pub fn activation_derivative(psi: &Matrix) -> Matrix {
    psi.map(|p| p * (1.0 - p))
}

pub fn output_delta(psi: &Matrix, targets: &Matrix) -> Result<DeltaMatrix> {
    let residual = psi.sub(targets)?;
    let b = psi.rows() as f64;
    let delta = residual
        .scale(1.0 / b)
        .hadamard(&activation_derivative(psi))?;
    Ok(DeltaMatrix(delta))
}

pub fn hidden_delta(
    delta_next: &DeltaMatrix,
    weights_next: &Matrix,
    psi: &Matrix,
) -> Result<DeltaMatrix> {
    let upstream = delta_next.matmul(&weights_next.without_first_row().transpose())?;
    Ok(DeltaMatrix(upstream.hadamard(&activation_derivative(psi))?))
}

/// `φᵀ · δ` for a layer whose bias-augmented input is `phi` (`(b, k + 1)`).
/// Row 0 of the result is the column sum of `δ`.
pub fn layer_gradient(phi: &Matrix, delta: &DeltaMatrix) -> Result<Matrix> {
    if phi.rows() != delta.rows() {
        return Err(Error::shape("layer_gradient", phi.shape(), delta.shape()));
    }
    phi.transpose().matmul(delta)
}

pub fn backward(net: &Network, trace: &ForwardTrace, targets: &Matrix) -> Result<GradientSet> {
    let depth = net.depth();
    if trace.phis.len() != depth || trace.psis.len() != depth {
        return Err(Error::InvalidArgument(format!(
            "trace has {} layers, network has {depth}",
            trace.psis.len()
        )));
    }
    for (l, (phi, w)) in trace.phis.iter().zip(net.weights()).enumerate() {
        if phi.cols() != w.rows() || trace.psis[l].cols() != w.cols() {
            return Err(Error::shape("trace/weights", phi.shape(), w.shape()));
        }
    }

    let mut grads = Vec::with_capacity(depth);
    let mut delta = output_delta(trace.output(), targets)?;
    for l in (0..depth).rev() {
        grads.push(layer_gradient(&trace.phis[l], &delta)?);
        if l > 0 {
            delta = hidden_delta(&delta, &net.weights()[l], &trace.psis[l - 1])?;
        }
    }
    grads.reverse();
    Ok(GradientSet { grads })
}

/// Forward then backward on one batch.
pub fn gradient(net: &Network, input: &Matrix, targets: &Matrix) -> Result<GradientSet> {
    let trace = net.forward(input)?;
    backward(net, &trace, targets)
}

/// `W ← W − η·∂E/∂W` for every layer; returns the updated network.
pub fn apply_update(net: &Network, grads: &GradientSet, eta: f64) -> Result<Network> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive and finite, got {eta}"
        )));
    }
    grads.check_congruent(net)?;
    let mut next = net.clone();
    for (w, g) in next.weights_mut().iter_mut().zip(&grads.grads) {
        for (wv, gv) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
            *wv -= gv * eta;
        }
    }
    Ok(next)
}

//! Topology, bias-folded weights and batched forward propagation.
//!
//! Layer `l` owns a weight matrix of shape `(n_l + 1, n_{l+1})`. Row 0 holds
//! the bias weights: the layer input is augmented with a leading column of
//! ones, so `[1 x₁ … xₙ] · W` applies weights and bias in one product. A
//! batch is simply more rows in the input.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::Matrix;

/// Layer widths `[n₀, n₁, …, n_L]`, input first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topology(Vec<usize>);

impl Topology {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Topology(format!(
                "need at least an input and an output layer, got {} size(s)",
                layer_sizes.len()
            )));
        }
        if let Some(i) = layer_sizes.iter().position(|&n| n == 0) {
            return Err(Error::Topology(format!("layer {i} has zero width")));
        }
        Ok(Self(layer_sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn inputs(&self) -> usize {
        self.0[0]
    }

    pub fn outputs(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// Number of weight matrices.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    /// Weight shape of each layer.
    pub fn weight_shapes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0] + 1, w[1]))
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Topology(format!("`{p}` is not a layer width in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes)
    }
}

/// Logistic function `1 / (1 + e^-x)`.
#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn sigmoid(x: &Matrix) -> Matrix {
    x.map(sigmoid_scalar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    weights: Vec<Matrix>,
}

impl Network {
    /// Assembles a network from weight matrices, checking that each has a
    /// bias row and that consecutive layers chain.
    pub fn from_weights(weights: Vec<Matrix>) -> Result<Self> {
        let first = weights
            .first()
            .ok_or_else(|| Error::Topology("network has no layers".into()))?;
        if first.rows() < 2 {
            return Err(Error::Topology(format!(
                "layer 0 weights are {}x{}; need a bias row plus at least one input row",
                first.rows(),
                first.cols()
            )));
        }
        let mut sizes = vec![first.rows() - 1];
        for (l, w) in weights.iter().enumerate() {
            if w.rows() != sizes[l] + 1 {
                return Err(Error::shape(
                    "layer chain",
                    weights[l - 1].shape(),
                    w.shape(),
                ));
            }
            sizes.push(w.cols());
        }
        let topology = Topology::new(sizes)?;
        Ok(Self { topology, weights })
    }

    pub fn zeros(topology: &Topology) -> Self {
        let weights = topology
            .weight_shapes()
            .map(|(r, c)| Matrix::zeros(r, c))
            .collect();
        Self {
            topology: topology.clone(),
            weights,
        }
    }

    /// Deterministic initialization. Every weight of layer `l` (bias row
    /// included) is drawn uniformly from `±1/√(n_l + 1)`, layer by layer in
    /// row-major order from a single [`SeededRng`] stream.
    pub fn init(topology: &Topology, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let weights = topology
            .weight_shapes()
            .map(|(rows, cols)| {
                let limit = 1.0 / (rows as f64).sqrt();
                Matrix::from_fn(rows, cols, |_, _| rng.symmetric(limit))
            })
            .collect();
        Self {
            topology: topology.clone(),
            weights,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    /// Propagates a `(batch, n₀)` input through every layer, keeping the
    /// bias-augmented inputs and activated outputs of each layer.
    pub fn forward(&self, input: &Matrix) -> Result<ForwardTrace> {
        if input.cols() != self.topology.inputs() {
            return Err(Error::shape(
                "forward input",
                input.shape(),
                (input.rows(), self.topology.inputs()),
            ));
        }
        if input.rows() == 0 {
            return Err(Error::InvalidArgument("forward on an empty batch".into()));
        }
        let mut phis = Vec::with_capacity(self.depth());
        let mut psis: Vec<Matrix> = Vec::with_capacity(self.depth());
        for w in &self.weights {
            let phi = psis.last().unwrap_or(input).augment_bias();
            let psi = sigmoid(&phi.matmul(w)?);
            phis.push(phi);
            psis.push(psi);
        }
        Ok(ForwardTrace { phis, psis })
    }

    /// Network output only.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        let mut trace = self.forward(input)?;
        Ok(trace.psis.pop().expect("network has at least one layer"))
    }
}

/// Per-layer values retained by [`Network::forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `phis[l]` is the bias-augmented input to layer `l`, `(b, n_l + 1)`.
    pub phis: Vec<Matrix>,
    /// `psis[l]` is the activated output of layer `l`, `(b, n_{l+1})`.
    pub psis: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Matrix {
        self.psis.last().expect("trace has at least one layer")
    }

    pub fn batch_size(&self) -> usize {
        self.output().rows()
    }
}

//! Finite-difference gradient oracle.
//!
//! [`numeric_gradient`] perturbs one weight at a time on a private copy of
//! the network and takes central differences of the batch error total. It
//! shares nothing with the backprop path except the forward pass and loss.

use std::fmt;

use rayon::prelude::*;

use crate::backprop::GradientSet;
use crate::error::{Error, Result};
use crate::loss::sse;
use crate::network::{Network, Topology};
use crate::rng::SeededRng;
use crate::tensor::Matrix;

pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_RTOL: f64 = 1e-5;

/// Denominator floor in the relative error.
const RELATIVE_FLOOR: f64 = 1e-8;

/// Position of a single weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WeightLocation {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for WeightLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "layer {} [{}, {}]", self.layer, self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_location: WeightLocation,
    pub per_layer_max: Vec<f64>,
    pub rtol: f64,
    pub passed: bool,
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_relative_error={:e}", self.max_relative_error)?;
        writeln!(f, "worst_location={}", self.worst_location)?;
        let layers: Vec<String> = self
            .per_layer_max
            .iter()
            .map(|v| format!("{v:e}"))
            .collect();
        writeln!(f, "per_layer_max={}", layers.join(","))?;
        writeln!(f, "rtol={:e}", self.rtol)?;
        write!(f, "passed={}", self.passed)
    }
}

/// `|a − n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / RELATIVE_FLOOR.max(analytic.abs() + numeric.abs())
}

fn objective(net: &Network, input: &Matrix, targets: &Matrix) -> Result<f64> {
    Ok(sse(&net.predict(input)?, targets)?.total)
}

/// Central-difference estimate of `∂E/∂W` for every weight.
pub fn numeric_gradient(
    net: &Network,
    input: &Matrix,
    targets: &Matrix,
    epsilon: f64,
) -> Result<GradientSet> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    // Validates shapes once before fanning out.
    objective(net, input, targets)?;

    let grads = (0..net.depth())
        .map(|l| {
            let (rows, cols) = net.weights()[l].shape();
            let values = (0..rows * cols)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx / cols, idx % cols);
                    let mut probe = net.clone();
                    let original = probe.weights()[l][(i, j)];
                    probe.weights_mut()[l][(i, j)] = original + epsilon;
                    let up = objective(&probe, input, targets)?;
                    probe.weights_mut()[l][(i, j)] = original - epsilon;
                    let down = objective(&probe, input, targets)?;
                    Ok((up - down) / (2.0 * epsilon))
                })
                .collect::<Result<Vec<f64>>>()?;
            Matrix::new(rows, cols, values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientSet { grads })
}

pub fn compare(
    analytic: &GradientSet,
    numeric: &GradientSet,
    rtol: f64,
) -> Result<GradCheckReport> {
    if rtol.is_nan() || rtol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rtol must be non-negative, got {rtol}"
        )));
    }
    if analytic.grads.len() != numeric.grads.len() {
        return Err(Error::InvalidArgument(format!(
            "gradient sets have {} and {} layers",
            analytic.grads.len(),
            numeric.grads.len()
        )));
    }
    let mut max = 0.0;
    let mut worst = WeightLocation::default();
    let mut per_layer_max = Vec::with_capacity(analytic.grads.len());
    for (layer, (a, n)) in analytic.grads.iter().zip(&numeric.grads).enumerate() {
        if a.shape() != n.shape() {
            return Err(Error::shape("compare", a.shape(), n.shape()));
        }
        let mut layer_max = 0.0;
        for row in 0..a.rows() {
            for col in 0..a.cols() {
                let e = relative_error(a[(row, col)], n[(row, col)]);
                if e > layer_max {
                    layer_max = e;
                }
                if e > max {
                    max = e;
                    worst = WeightLocation { layer, row, col };
                }
            }
        }
        per_layer_max.push(layer_max);
    }
    Ok(GradCheckReport {
        max_relative_error: max,
        worst_location: worst,
        per_layer_max,
        rtol,
        passed: max <= rtol,
    })
}

/// A seeded network plus random batch for gradient checking.
#[derive(Debug, Clone)]
pub struct GradCheckCase {
    pub network: Network,
    pub input: Matrix,
    pub targets: Matrix,
}

impl GradCheckCase {
    /// Weights from [`Network::init`] with `seed`; inputs uniform in
    /// `[-1, 1)` and targets uniform in `[0, 1)` from a separate stream.
    pub fn random(topology: &Topology, batch: usize, seed: u64) -> Result<Self> {
        if batch == 0 {
            return Err(Error::InvalidArgument("batch must be at least 1".into()));
        }
        let network = Network::init(topology, seed);
        let mut rng = SeededRng::with_stream(seed, 1);
        let input = Matrix::from_fn(batch, topology.inputs(), |_, _| rng.uniform(-1.0, 1.0));
        let targets = Matrix::from_fn(batch, topology.outputs(), |_, _| rng.next_unit());
        Ok(Self {
            network,
            input,
            targets,
        })
    }

    pub fn check(&self, epsilon: f64, rtol: f64) -> Result<GradCheckReport> {
        let analytic = crate::backprop::gradient(&self.network, &self.input, &self.targets)?;
        let numeric = numeric_gradient(&self.network, &self.input, &self.targets, epsilon)?;
        compare(&analytic, &numeric, rtol)
    }
}

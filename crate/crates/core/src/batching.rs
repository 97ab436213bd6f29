//! Micro-batch gradients and the epoch training driver.
//!
//! A batch of `B` rows is cut into `k` contiguous shards. Each shard's
//! gradient is computed on its own against the shared, read-only network,
//! and the results are folded in shard order with weights `bᵢ/B`. Because a
//! shard's loss is scaled by `1/bᵢ`, that weighted mean is the whole-batch
//! gradient up to rounding. Weights are updated once per batch.

use rayon::prelude::*;

use crate::backprop::{apply_update, gradient, GradientSet};
use crate::error::{Error, Result};
use crate::loss::{sse, ErrorReport};
use crate::network::{Network, Topology};
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub shards: usize,
    pub seed: u64,
    pub topology: Topology,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eta must be positive and finite, got {}",
                self.eta
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "batch_size must be at least 1".into(),
            ));
        }
        if self.shards == 0 || self.shards > self.batch_size {
            return Err(Error::InvalidArgument(format!(
                "shards must be between 1 and batch_size ({}), got {}",
                self.batch_size, self.shards
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroBatch {
    pub inputs: Matrix,
    pub targets: Matrix,
    /// Fraction of the parent batch's rows, `bᵢ/B`.
    pub weight: f64,
}

/// Contiguous partition into `k` shards whose sizes differ by at most one;
/// the first `B mod k` shards take the extra row.
pub fn split(inputs: &Matrix, targets: &Matrix, k: usize) -> Result<Vec<MicroBatch>> {
    let total = inputs.rows();
    if targets.rows() != total {
        return Err(Error::shape("split", inputs.shape(), targets.shape()));
    }
    if k == 0 || k > total {
        return Err(Error::InvalidArgument(format!(
            "cannot split {total} rows into {k} shards"
        )));
    }
    let (base, extra) = (total / k, total % k);
    let mut start = 0;
    (0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let range = start..start + len;
            start += len;
            Ok(MicroBatch {
                inputs: inputs.slice_rows(range.clone())?,
                targets: targets.slice_rows(range)?,
                weight: len as f64 / total as f64,
            })
        })
        .collect()
}

/// `Σᵢ weightᵢ · gradsᵢ`, accumulated in list order.
pub fn combine(grad_sets: &[GradientSet], weights: &[f64]) -> Result<GradientSet> {
    if grad_sets.is_empty() || grad_sets.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} gradient sets with {} weights",
            grad_sets.len(),
            weights.len()
        )));
    }
    let weight_sum: f64 = weights.iter().sum();
    if (weight_sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "combination weights sum to {weight_sum}, expected 1"
        )));
    }
    let first = &grad_sets[0];
    let mut acc: Vec<Matrix> = first
        .grads
        .iter()
        .map(|g| Matrix::zeros(g.rows(), g.cols()))
        .collect();
    for (set, &w) in grad_sets.iter().zip(weights) {
        if set.grads.len() != acc.len() {
            return Err(Error::InvalidArgument(format!(
                "gradient sets have {} and {} layers",
                acc.len(),
                set.grads.len()
            )));
        }
        for (a, g) in acc.iter_mut().zip(&set.grads) {
            if a.shape() != g.shape() {
                return Err(Error::shape("combine", a.shape(), g.shape()));
            }
            for (av, gv) in a.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *av += w * gv;
            }
        }
    }
    Ok(GradientSet { grads: acc })
}

/// Gradient of one batch computed as `shards` isolated micro-batches.
/// Shards run in parallel; the fold is always in shard order.
pub fn sharded_gradient(
    net: &Network,
    inputs: &Matrix,
    targets: &Matrix,
    shards: usize,
) -> Result<GradientSet> {
    let parts = split(inputs, targets, shards)?;
    if parts.len() == 1 {
        return gradient(net, inputs, targets);
    }
    let grads = parts
        .par_iter()
        .map(|mb| gradient(net, &mb.inputs, &mb.targets))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = parts.iter().map(|mb| mb.weight).collect();
    combine(&grads, &weights)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    /// Full-dataset error after each epoch.
    pub history: Vec<ErrorReport>,
}

/// Trains from `Network::init(topology, seed)`.
pub fn train(config: &TrainConfig, inputs: &Matrix, targets: &Matrix) -> Result<TrainOutcome> {
    train_with(config, inputs, targets, |_, _| {})
}

/// Like [`train`], calling `on_epoch(epoch, report)` after each epoch
/// (epochs counted from 1).
pub fn train_with(
    config: &TrainConfig,
    inputs: &Matrix,
    targets: &Matrix,
    mut on_epoch: impl FnMut(usize, &ErrorReport),
) -> Result<TrainOutcome> {
    config.validate()?;
    let topo = &config.topology;
    if inputs.rows() == 0 {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if inputs.rows() != targets.rows() {
        return Err(Error::shape(
            "dataset rows",
            inputs.shape(),
            targets.shape(),
        ));
    }
    if inputs.cols() != topo.inputs() || targets.cols() != topo.outputs() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} inputs and {} targets, topology {} expects {} and {}",
            inputs.cols(),
            targets.cols(),
            topo,
            topo.inputs(),
            topo.outputs()
        )));
    }

    let rows = inputs.rows();
    let mut net = Network::init(topo, config.seed);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut start = 0;
        while start < rows {
            let end = (start + config.batch_size).min(rows);
            let x = inputs.slice_rows(start..end)?;
            let t = targets.slice_rows(start..end)?;
            // A short final batch may have fewer rows than shards.
            let shards = config.shards.min(end - start);
            let grads = sharded_gradient(&net, &x, &t, shards)?;
            net = apply_update(&net, &grads, config.eta)?;
            start = end;
        }
        let report = sse(&net.predict(inputs)?, targets)?;
        on_epoch(epoch, &report);
        history.push(report);
    }
    Ok(TrainOutcome {
        network: net,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn data(rows: usize, n_in: usize, n_out: usize, seed: u64) -> (Matrix, Matrix) {
        let mut rng = SeededRng::new(seed);
        let x = Matrix::from_fn(rows, n_in, |_, _| rng.uniform(-1.0, 1.0));
        let t = Matrix::from_fn(rows, n_out, |_, _| rng.next_unit());
        (x, t)
    }

    fn config(topology: &[usize], batch_size: usize, shards: usize, epochs: usize) -> TrainConfig {
        TrainConfig {
            eta: 0.5,
            epochs,
            batch_size,
            shards,
            seed: 3,
            topology: Topology::new(topology.to_vec()).unwrap(),
        }
    }

    #[test]
    fn split_partitions() {
        let (x, t) = data(5, 2, 1, 1);
        let one = split(&x, &t, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].inputs, x);
        assert_eq!(one[0].weight, 1.0);

        let (x4, t4) = data(4, 2, 1, 1);
        let halves = split(&x4, &t4, 2).unwrap();
        assert_eq!(
            halves.iter().map(|m| m.weight).collect::<Vec<_>>(),
            vec![0.5, 0.5]
        );
        assert!(halves.iter().all(|m| m.inputs.rows() == 2));

        let parts = split(&x, &t, 2).unwrap();
        assert_eq!(
            parts.iter().map(|m| m.inputs.rows()).collect::<Vec<_>>(),
            vec![3, 2]
        );
        assert_eq!(
            parts.iter().map(|m| m.weight).collect::<Vec<_>>(),
            vec![0.6, 0.4]
        );
        let rejoined =
            Matrix::vstack(&parts.iter().map(|m| m.inputs.clone()).collect::<Vec<_>>()).unwrap();
        assert_eq!(rejoined, x);
        let rejoined =
            Matrix::vstack(&parts.iter().map(|m| m.targets.clone()).collect::<Vec<_>>()).unwrap();
        assert_eq!(rejoined, t);

        assert!(split(&x, &t, 0).is_err());
        assert!(split(&x, &t, 6).is_err());
        assert!(split(&x, &Matrix::zeros(4, 1), 2).is_err());
    }

    #[test]
    fn split_sizes_are_balanced() {
        for rows in 1..12 {
            let (x, t) = data(rows, 1, 1, 2);
            for k in 1..=rows {
                let parts = split(&x, &t, k).unwrap();
                let sizes: Vec<usize> = parts.iter().map(|m| m.inputs.rows()).collect();
                assert_eq!(sizes.iter().sum::<usize>(), rows);
                assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                let w: f64 = parts.iter().map(|m| m.weight).sum();
                assert!((w - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn combine_trivial_cases() {
        let net = Network::init(&Topology::new(vec![2, 3, 1]).unwrap(), 1);
        let (x, t) = data(3, 2, 1, 4);
        let g = gradient(&net, &x, &t).unwrap();
        assert_eq!(combine(std::slice::from_ref(&g), &[1.0]).unwrap(), g);
        assert_eq!(combine(&[g.clone(), g.clone()], &[0.5, 0.5]).unwrap(), g);
        assert!(combine(&[g.clone(), g.clone()], &[0.5, 0.6]).is_err());
        assert!(combine(std::slice::from_ref(&g), &[0.5, 0.5]).is_err());
        assert!(combine(&[], &[]).is_err());
        let other =
            GradientSet::zeros_like(&Network::init(&Topology::new(vec![2, 2, 1]).unwrap(), 1));
        assert!(combine(&[g, other], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn shard_combine_equals_whole_batch() {
        let net = Network::init(&Topology::new(vec![3, 4, 2]).unwrap(), 17);
        for rows in [1, 2, 3, 4, 5, 7, 8, 11] {
            let (x, t) = data(rows, 3, 2, rows as u64);
            let whole = gradient(&net, &x, &t).unwrap();
            for k in 1..=rows {
                let combined = sharded_gradient(&net, &x, &t, k).unwrap();
                assert!(
                    whole.max_abs_diff(&combined).unwrap() <= 1e-12,
                    "rows {rows} k {k}"
                );
            }
        }
    }

    #[test]
    fn sharding_leaves_weights_untouched() {
        let net = Network::init(&Topology::new(vec![3, 5, 2]).unwrap(), 2);
        let checksum = |n: &Network| -> u64 {
            n.weights()
                .iter()
                .flat_map(|w| w.as_slice())
                .fold(0u64, |h, v| h.rotate_left(7) ^ v.to_bits())
        };
        let before = checksum(&net);
        let (x, t) = data(16, 3, 2, 6);
        sharded_gradient(&net, &x, &t, 4).unwrap();
        assert_eq!(checksum(&net), before);
    }

    #[test]
    fn config_validation() {
        let (x, t) = data(4, 2, 1, 1);
        assert!(train(&config(&[2, 2, 1], 4, 5, 1), &x, &t).is_err());
        assert!(train(&config(&[2, 2, 1], 0, 1, 1), &x, &t).is_err());
        let mut c = config(&[2, 2, 1], 4, 1, 1);
        c.eta = 0.0;
        assert!(train(&c, &x, &t).is_err());
        assert!(train(&config(&[3, 2, 1], 4, 1, 1), &x, &t).is_err());
        assert!(train(&config(&[2, 2, 2], 4, 1, 1), &x, &t).is_err());
        assert!(train(
            &config(&[2, 2, 1], 4, 1, 1),
            &Matrix::zeros(0, 2),
            &Matrix::zeros(0, 1)
        )
        .is_err());
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let (x, t) = data(4, 2, 1, 1);
        let c = config(&[2, 2, 1], 4, 1, 0);
        let out = train(&c, &x, &t).unwrap();
        assert_eq!(out.network, Network::init(&c.topology, c.seed));
        assert!(out.history.is_empty());
    }

    #[test]
    fn shard_count_only_reassociates() {
        let (x, t) = data(8, 3, 2, 9);
        let a = train(&config(&[3, 4, 2], 8, 1, 50), &x, &t).unwrap();
        let b = train(&config(&[3, 4, 2], 8, 4, 50), &x, &t).unwrap();
        for (wa, wb) in a.network.weights().iter().zip(b.network.weights()) {
            assert!(wa.max_abs_diff(wb).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn deterministic_history() {
        let (x, t) = data(10, 2, 2, 5);
        let c = config(&[2, 3, 2], 4, 3, 20);
        let a = train(&c, &x, &t).unwrap();
        let b = train(&c, &x, &t).unwrap();
        assert_eq!(a.network, b.network);
        assert_eq!(a.history, b.history);
        assert_eq!(a.history.len(), 20);
        // The short final batch (2 rows) is sharded 2 ways, not 3.
        assert!(a.history.last().unwrap().total < a.history[0].total);
    }

    #[test]
    fn epoch_callback_sees_every_epoch() {
        let (x, t) = data(4, 2, 1, 1);
        let mut seen = Vec::new();
        let out = train_with(&config(&[2, 2, 1], 2, 1, 5), &x, &t, |e, r| {
            seen.push((e, r.total))
        })
        .unwrap();
        assert_eq!(
            seen.iter().map(|s| s.0).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
        assert_eq!(seen.last().unwrap().1, out.history.last().unwrap().total);
    }
}

//! Dense multilayer perceptron trained by tensor-based batch backpropagation.
//!
//! Every quantity is a [`Matrix`] with one row per batch item:
//!
//! - [`network`]: bias-folded weights and the batched forward pass.
//! - [`loss`]: sum-of-squares error with per-item and per-output reductions.
//! - [`backprop`]: delta-rule gradients as matrix products, and the update.
//! - [`gradcheck`]: central finite differences, the reference for backprop.
//! - [`batching`]: micro-batch sharding, gradient combination, training.
//! - [`persistence`]: checkpoint and CSV dataset files.
//!
//! ```
//! use batchprop::{backprop, Matrix, Network, Topology};
//!
//! let topology: Topology = "2,2,2".parse().unwrap();
//! let net = Network::init(&topology, 42);
//! let input = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
//! let targets = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
//! let grads = backprop::gradient(&net, &input, &targets).unwrap();
//! let net = backprop::apply_update(&net, &grads, 0.5).unwrap();
//! assert_eq!(net.predict(&input).unwrap().shape(), (2, 2));
//! ```

pub mod backprop;
pub mod batching;
pub mod error;
pub mod gradcheck;
pub mod loss;
pub mod network;
pub mod persistence;
pub mod rng;
pub mod tensor;

pub use backprop::{DeltaMatrix, GradientSet};
pub use batching::{MicroBatch, TrainConfig, TrainOutcome};
pub use error::{Error, Result};
pub use gradcheck::{GradCheckCase, GradCheckReport, WeightLocation};
pub use loss::ErrorReport;
pub use network::{ForwardTrace, Network, Topology};
pub use persistence::{Dataset, RunFingerprint};
pub use tensor::Matrix;

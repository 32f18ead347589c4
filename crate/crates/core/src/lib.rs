//! Hybrid quantum K-means and quantum-kernel SVM on a small statevector
//! simulator.
//!
//! Squared Euclidean distances are recovered from the ancilla statistics of a
//! swap test between two amplitude-encoded states; K-means assigns points and
//! updates centroids classically around that distance. The feature-map
//! kernel SVM it is benchmarked against lives in [`qkernel`] and [`svm`].

pub mod cli;
pub mod data;
pub mod distance;
pub mod encoding;
pub mod error;
pub mod kmeans;
pub mod qkernel;
pub mod seed;
pub mod statevec;
pub mod svm;

pub use error::{QkmError, Result};

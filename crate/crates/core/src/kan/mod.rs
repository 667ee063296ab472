//! Kolmogorov-Arnold network layers and assembly.
//!
//! Two edge families are provided: B-spline edges with a base activation
//! (efficient-KAN style) and wavelet edges with learnable translation and
//! scale (WAV-KAN style). Nodes only sum; a network uses one family
//! throughout. Inputs are mapped affinely from the problem domain onto the
//! spline grid [−1, 1]; the map's slope is folded into the seeded jets so
//! returned derivatives are with respect to the raw coordinates.

pub mod activation;
pub mod bspline;
pub mod checkpoint;
pub mod layer;
pub mod network;

pub use activation::{BaseActivation, Mother};
pub use bspline::{bspline_basis, local_basis, uniform_knots, LocalBasis};
pub use checkpoint::Checkpoint;
pub use layer::{LayerTape, SplineEdgeLayer, WaveletEdgeLayer, MIN_SCALE};
pub use network::{init_network, AffineMap, KanGraph, KanKind, KanNetwork, KanTape, Layer, NetworkConfig};

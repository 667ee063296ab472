use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::diffengine::{
    loss_gradient, Dim, Jet2, JetAdjoint, JetModel, JetObjective, LossValue, ParameterBlock,
    MAX_SEEDS,
};
use crate::error::{Error, Result};

use super::activation::{BaseActivation, Mother};
use super::layer::{LayerTape, SplineEdgeLayer, WaveletEdgeLayer, MIN_SCALE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KanKind {
    /// B-spline edges with a base activation.
    EfficientKan,
    /// Wavelet edges with learnable translation and scale.
    WavKan,
}

impl KanKind {
    pub fn name(self) -> &'static str {
        match self {
            KanKind::EfficientKan => "efficient_kan",
            KanKind::WavKan => "wav_kan",
        }
    }
}

impl fmt::Display for KanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KanKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "efficient_kan" | "spline" => Ok(KanKind::EfficientKan),
            "wav_kan" | "wavelet" => Ok(KanKind::WavKan),
            other => Err(Error::Parse(format!("unknown KAN kind '{other}'"))),
        }
    }
}

/// Affine map from one problem-domain axis onto [−1, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub lo: f64,
    pub hi: f64,
}

impl AffineMap {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("bad domain [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn slope(&self) -> f64 {
        2.0 / (self.hi - self.lo)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.lo) * self.slope() - 1.0
    }

    fn contains(&self, x: f64) -> bool {
        let tol = 1e-9 * (self.hi - self.lo);
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// Everything needed to rebuild a network apart from its parameter values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub architecture: Vec<usize>,
    pub kind: KanKind,
    pub spline_order: usize,
    pub grid_size: usize,
    pub base: BaseActivation,
    pub mother: Mother,
    /// One `[lo, hi]` per input axis.
    pub domain: Vec<(f64, f64)>,
}

impl NetworkConfig {
    /// Defaults used throughout: cubic splines on 5 cells, `sin` base and
    /// `sin` wavelet, inputs on [−1, 1].
    pub fn new(architecture: Vec<usize>, kind: KanKind) -> Self {
        let inputs = architecture.first().copied().unwrap_or(1);
        Self {
            architecture,
            kind,
            spline_order: 3,
            grid_size: 5,
            base: BaseActivation::Sin,
            mother: Mother::Sin,
            domain: vec![(-1.0, 1.0); inputs],
        }
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Self {
        self.domain = domain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let arch = &self.architecture;
        if arch.len() < 2 {
            return Err(Error::InvalidArchitecture(format!(
                "need at least input and output widths, got {arch:?}"
            )));
        }
        if arch.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArchitecture(format!("zero-width layer in {arch:?}")));
        }
        let dim = Dim::new(arch[0])
            .map_err(|_| Error::InvalidArchitecture(format!("input width must be 1 or 2, got {}", arch[0])))?;
        let outputs = *arch.last().unwrap();
        if outputs * dim.jet_len() > MAX_SEEDS {
            return Err(Error::InvalidArchitecture(format!(
                "{outputs} outputs exceed the supported jet budget"
            )));
        }
        if self.domain.len() != arch[0] {
            return Err(Error::InvalidArchitecture(format!(
                "{} domain axes for {} inputs",
                self.domain.len(),
                arch[0]
            )));
        }
        for &(lo, hi) in &self.domain {
            AffineMap::new(lo, hi)?;
        }
        if self.kind == KanKind::EfficientKan
            && (self.spline_order > super::bspline::MAX_ORDER || self.grid_size == 0)
        {
            return Err(Error::InvalidArchitecture(format!(
                "spline order {} / grid size {} unsupported",
                self.spline_order, self.grid_size
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Spline(SplineEdgeLayer),
    Wavelet(WaveletEdgeLayer),
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        match self {
            Layer::Spline(l) => l.in_dim,
            Layer::Wavelet(l) => l.in_dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Layer::Spline(l) => l.out_dim,
            Layer::Wavelet(l) => l.out_dim,
        }
    }

    pub fn forward(&self, params: &[f64], inputs: &[Jet2], tape: &mut LayerTape, out: &mut Vec<Jet2>) {
        match self {
            Layer::Spline(l) => l.forward(params, inputs, tape, out),
            Layer::Wavelet(l) => l.forward(params, inputs, tape, out),
        }
    }

    pub fn backward(
        &self,
        params: &[f64],
        tape: &LayerTape,
        out_adj: &[JetAdjoint],
        grads: &mut [f64],
        in_adj: Option<&mut Vec<JetAdjoint>>,
    ) {
        match self {
            Layer::Spline(l) => l.backward(params, tape, out_adj, grads, in_adj),
            Layer::Wavelet(l) => l.backward(params, tape, out_adj, grads, in_adj),
        }
    }
}

/// Network structure: layers, input maps and metadata. Parameter values
/// live in a separate [`ParameterBlock`].
#[derive(Clone, Debug, PartialEq)]
pub struct KanGraph {
    pub config: NetworkConfig,
    pub layers: Vec<Layer>,
    pub input_map: Vec<AffineMap>,
    dim: Dim,
}

#[derive(Debug, Default)]
pub struct KanTape {
    layers: Vec<LayerTape>,
    buf: Vec<Jet2>,
    adj_out: Vec<JetAdjoint>,
    adj_in: Vec<JetAdjoint>,
}

impl KanGraph {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    fn map_inputs(&self, x: &[f64], out: &mut Vec<Jet2>) -> Result<()> {
        if x.len() != self.input_map.len() {
            return Err(Error::ShapeMismatch {
                expected: self.input_map.len(),
                actual: x.len(),
            });
        }
        out.clear();
        for (a, (&xa, map)) in x.iter().zip(&self.input_map).enumerate() {
            if !map.contains(xa) {
                return Err(Error::OutOfDomain {
                    value: xa,
                    lo: map.lo,
                    hi: map.hi,
                });
            }
            let mut j = Jet2::constant(map.apply(xa), self.dim);
            j.grad[a] = map.slope();
            out.push(j);
        }
        Ok(())
    }
}

impl JetModel for KanGraph {
    type Tape = KanTape;

    fn input_dim(&self) -> Dim {
        self.dim
    }

    fn output_dim(&self) -> usize {
        *self.config.architecture.last().unwrap()
    }

    fn forward(
        &self,
        params: &[f64],
        x: &[f64],
        tape: &mut KanTape,
        out: &mut Vec<Jet2>,
    ) -> Result<()> {
        if tape.layers.len() != self.layers.len() {
            tape.layers.resize_with(self.layers.len(), LayerTape::default);
        }
        self.map_inputs(x, &mut tape.buf)?;
        for (layer, lt) in self.layers.iter().zip(tape.layers.iter_mut()) {
            layer.forward(params, &tape.buf, lt, out);
            std::mem::swap(&mut tape.buf, out);
        }
        std::mem::swap(&mut tape.buf, out);
        Ok(())
    }

    fn backward(
        &self,
        params: &[f64],
        tape: &mut KanTape,
        out_adjoint: &[JetAdjoint],
        grads: &mut [f64],
    ) {
        tape.adj_out.clear();
        tape.adj_out.extend_from_slice(out_adjoint);
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let in_adj = (l > 0).then_some(&mut tape.adj_in);
            layer.backward(params, &tape.layers[l], &tape.adj_out, grads, in_adj);
            std::mem::swap(&mut tape.adj_in, &mut tape.adj_out);
        }
    }
}

/// A KAN: structure plus its flat parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct KanNetwork {
    pub graph: KanGraph,
    pub params: ParameterBlock,
    pub seed: u64,
}

impl KanNetwork {
    /// Build and initialise deterministically from `seed`.
    ///
    /// Spline coefficients ~ N(0, 0.1²)/√(G+k); base and spline weights and
    /// wavelet weights ~ U(−1/√in, 1/√in); translations 0, scales 1.
    pub fn init(config: NetworkConfig, seed: u64) -> Result<Self> {
        let mut net = Self::allocate(config, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 0.1).expect("valid normal");
        for layer in &net.graph.layers {
            let bound = 1.0 / (layer.in_dim() as f64).sqrt();
            match layer {
                Layer::Spline(l) => {
                    let norm = 1.0 / ((l.grid_size + l.order) as f64).sqrt();
                    for c in &mut net.params.values[l.coeff_slot.range()] {
                        *c = normal.sample(&mut rng) * norm;
                    }
                    for w in &mut net.params.values[l.base_weight_slot.range()] {
                        *w = rng.random_range(-bound..bound);
                    }
                    for w in &mut net.params.values[l.spline_weight_slot.range()] {
                        *w = rng.random_range(-bound..bound);
                    }
                }
                Layer::Wavelet(l) => {
                    for w in &mut net.params.values[l.weight_slot.range()] {
                        *w = rng.random_range(-bound..bound);
                    }
                }
            }
        }
        Ok(net)
    }

    /// Structure with zeroed parameters (wavelet scales 1).
    pub fn allocate(config: NetworkConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let dim = Dim::new(config.architecture[0])?;
        let mut params = ParameterBlock::new();
        let layers = config
            .architecture
            .windows(2)
            .enumerate()
            .map(|(l, w)| match config.kind {
                KanKind::EfficientKan => Layer::Spline(SplineEdgeLayer::allocate(
                    &mut params,
                    l,
                    w[0],
                    w[1],
                    config.spline_order,
                    config.grid_size,
                    config.base,
                )),
                KanKind::WavKan => Layer::Wavelet(WaveletEdgeLayer::allocate(
                    &mut params,
                    l,
                    w[0],
                    w[1],
                    config.mother,
                )),
            })
            .collect();
        let input_map = config
            .domain
            .iter()
            .map(|&(lo, hi)| AffineMap::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            graph: KanGraph {
                config,
                layers,
                input_map,
                dim,
            },
            params,
            seed,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.graph.config
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.graph.dim.get()
    }

    pub fn output_dim(&self) -> usize {
        self.graph.output_dim()
    }

    /// Output jets with derivatives w.r.t. the raw domain coordinates.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        let mut tape = KanTape::default();
        let mut out = Vec::new();
        self.graph.forward(&self.params.values, x, &mut tape, &mut out)?;
        Ok(out)
    }

    /// Output values only.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.iter().map(|j| j.value).collect())
    }

    pub fn loss_gradient<O: JetObjective>(&mut self, objective: &O) -> Result<LossValue> {
        loss_gradient(&self.graph, &mut self.params, objective)
    }

    /// Re-establish parameter constraints after any mutation.
    pub fn enforce_constraints(&mut self) {
        self.params.clamp_scales(MIN_SCALE);
    }
}

/// `init_network(arch, kind, seed)` with default layer settings on [−1, 1].
pub fn init_network(arch: &[usize], kind: KanKind, seed: u64) -> Result<KanNetwork> {
    KanNetwork::init(NetworkConfig::new(arch.to_vec(), kind), seed)
}

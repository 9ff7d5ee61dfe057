//! Synthetic instances: squares of 30 px in a 1080 x 720 px frame, either
//! uniform or drawn from a mixture of three Gaussian clusters, then
//! normalized so that the square side is 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bench::format::{Instance, Mode};
use crate::geometry::{Rect, Scale};

pub const FRAME_WIDTH_PX: f64 = 1080.0;
pub const FRAME_HEIGHT_PX: f64 = 720.0;
pub const SQUARE_PX: f64 = 30.0;
pub const CLUSTER_STD_PX: f64 = 100.0;
pub const CLUSTER_WEIGHTS: [f64; 3] = [0.7, 0.2, 0.1];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Uniform,
    Gaussian,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ModelKind::Uniform),
            "gaussian" => Ok(ModelKind::Gaussian),
            _ => Err(format!("unknown model {s:?} (expected uniform or gaussian)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub model: ModelKind,
    pub n: usize,
    pub seed: u64,
    pub scale: Scale,
    /// When set, labels are rectangles with widths uniform in
    /// `[1, max_width]` label units.
    pub max_width: Option<f64>,
}

impl GenSpec {
    pub fn new(model: ModelKind, n: usize, seed: u64) -> Self {
        GenSpec {
            model,
            n,
            seed,
            scale: Scale::default(),
            max_width: None,
        }
    }
}

/// The generative model behind an instance. The cluster means are drawn
/// first from the seed, so traces can keep sampling from the same clusters.
#[derive(Clone, Debug)]
pub struct Sampler {
    model: ModelKind,
    means: [(f64, f64); 3],
    scale: Scale,
    max_width: Option<f64>,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(spec: &GenSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut means = [(0.0, 0.0); 3];
        if spec.model == ModelKind::Gaussian {
            for m in &mut means {
                *m = (
                    rng.random_range(0.0..FRAME_WIDTH_PX),
                    rng.random_range(0.0..FRAME_HEIGHT_PX),
                );
            }
        }
        Sampler {
            model: spec.model,
            means,
            scale: spec.scale,
            max_width: spec.max_width,
            rng,
        }
    }

    /// Reseeds the random stream, keeping the model parameters.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn center_px(&mut self, cluster: usize) -> (f64, f64) {
        let half = SQUARE_PX / 2.0;
        let (x, y) = match self.model {
            ModelKind::Uniform => (
                self.rng.random_range(0.0..FRAME_WIDTH_PX),
                self.rng.random_range(0.0..FRAME_HEIGHT_PX),
            ),
            ModelKind::Gaussian => {
                let (mx, my) = self.means[cluster];
                let nx = Normal::new(mx, CLUSTER_STD_PX).expect("valid deviation");
                let ny = Normal::new(my, CLUSTER_STD_PX).expect("valid deviation");
                (nx.sample(&mut self.rng), ny.sample(&mut self.rng))
            }
        };
        // Keep the whole square inside the frame.
        (
            x.clamp(half, FRAME_WIDTH_PX - half),
            y.clamp(half, FRAME_HEIGHT_PX - half),
        )
    }

    /// One label with the given id, from `cluster` (ignored for the uniform
    /// model).
    pub fn label(&mut self, id: u64, cluster: usize) -> Rect {
        let (x, y) = self.center_px(cluster);
        let s = self.scale;
        let width = match self.max_width {
            Some(max) if max > 1.0 => s.scale_f64(self.rng.random_range(1.0..=max)),
            _ => s.unit(),
        };
        Rect::new(id, s.scale_f64(x / SQUARE_PX), s.scale_f64(y / SQUARE_PX), width)
    }

    /// A label from a cluster picked with the mixture weights.
    pub fn random_label(&mut self, id: u64) -> Rect {
        let u: f64 = self.rng.random();
        let cluster = if u < CLUSTER_WEIGHTS[0] {
            0
        } else if u < CLUSTER_WEIGHTS[0] + CLUSTER_WEIGHTS[1] {
            1
        } else {
            2
        };
        self.label(id, cluster)
    }
}

/// Cluster sizes for `n` Gaussian labels: `floor(0.7n)`, `floor(0.2n)`, and
/// the rest.
pub fn cluster_counts(n: usize) -> [usize; 3] {
    let a = n * 7 / 10;
    let b = n * 2 / 10;
    [a, b, n - a - b]
}

/// Generates an instance with ids `0..n`.
pub fn generate(spec: &GenSpec) -> Instance {
    let mut sampler = Sampler::new(spec);
    let mode = if spec.max_width.is_some_and(|w| w > 1.0) {
        Mode::Rects
    } else {
        Mode::Squares
    };
    let mut inst = Instance::new(spec.scale, mode);
    let clusters: Vec<usize> = match spec.model {
        ModelKind::Uniform => vec![0; spec.n],
        ModelKind::Gaussian => cluster_counts(spec.n)
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| std::iter::repeat_n(c, k))
            .collect(),
    };
    for (id, c) in clusters.into_iter().enumerate() {
        inst.labels.push(sampler.label(id as u64, c));
    }
    inst
}

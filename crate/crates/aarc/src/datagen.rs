//! Deterministic synthetic stand-ins for common binary-classification
//! benchmark datasets.
//!
//! Each entry reproduces the shape (sample count and feature dimension) and
//! the rough feature style of a well-known dataset, but the contents are
//! generated from a seeded RNG: features are drawn per style, labels come
//! from a random linear rule thresholded at its median margin, and 10% of
//! the labels are flipped so the problem is not separable. Generation is
//! pure: the same `(name, seed)` pair always yields the same bytes.

use crate::objective::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// How features are drawn for a stand-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureStyle {
    /// Uniform on `[0, 1]`.
    Unit,
    /// Standard normal.
    Gaussian,
    /// Uniform on `[0, hi]`.
    PositiveUniform(f64),
    /// Uniform on `[-hi, hi]`.
    SymmetricUniform(f64),
    /// Bernoulli `{0, 1}` with the given density.
    Binary(f64),
}

/// A named stand-in: shape plus feature style.
#[derive(Debug, Clone, Copy)]
pub struct StandInSpec {
    pub name: &'static str,
    pub n: usize,
    pub d: usize,
    pub style: FeatureStyle,
}

/// Fraction of labels flipped after the linear rule is applied.
pub const LABEL_FLIP_RATE: f64 = 0.10;

/// The built-in registry. Shapes follow the datasets they imitate.
pub const REGISTRY: &[StandInSpec] = &[
    StandInSpec { name: "sonar", n: 208, d: 60, style: FeatureStyle::Unit },
    StandInSpec { name: "splice", n: 1000, d: 60, style: FeatureStyle::Gaussian },
    StandInSpec { name: "svmguide1", n: 3089, d: 4, style: FeatureStyle::PositiveUniform(10.0) },
    StandInSpec { name: "svmguide3", n: 1243, d: 22, style: FeatureStyle::SymmetricUniform(1.0) },
    StandInSpec { name: "w8a", n: 49749, d: 300, style: FeatureStyle::Binary(0.05) },
];

/// Names of all registered stand-ins.
pub fn dataset_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|s| s.name).collect()
}

/// Looks up a stand-in by name.
pub fn lookup(name: &str) -> Option<&'static StandInSpec> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Generates the stand-in with the given name, if registered.
pub fn generate_by_name(name: &str, seed: u64) -> Option<Dataset> {
    lookup(name).map(|s| generate(s, seed))
}

/// Far-initialization sampler for benchmark runs: each coordinate is an
/// independent normal draw with mean zero and the given *variance* (the
/// standard deviation is its square root). Deterministic in `(d, variance,
/// seed)`; the stream is separated from dataset generation so the same seed
/// can drive both without correlation.
pub fn far_normal_init(d: usize, variance: f64, seed: u64) -> nalgebra::DVector<f64> {
    assert!(variance >= 0.0, "variance must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(b"far_normal_init"));
    let sd = variance.sqrt();
    nalgebra::DVector::from_iterator(
        d,
        (0..d).map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        }),
    )
}

/// FNV-1a, used to give each dataset name its own RNG stream.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Generates a stand-in dataset deterministically.
pub fn generate(spec: &StandInSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(spec.name.as_bytes()));
    let n = spec.n;
    let d = spec.d;

    let mut features = vec![0.0f64; n * d];
    for v in features.iter_mut() {
        *v = match spec.style {
            FeatureStyle::Unit => rng.gen_range(0.0..1.0),
            FeatureStyle::Gaussian => StandardNormal.sample(&mut rng),
            FeatureStyle::PositiveUniform(hi) => rng.gen_range(0.0..hi),
            FeatureStyle::SymmetricUniform(hi) => rng.gen_range(-hi..hi),
            FeatureStyle::Binary(p) => {
                if rng.gen_bool(p) {
                    1.0
                } else {
                    0.0
                }
            }
        };
    }

    // Linear labeling rule, thresholded at the median margin so the classes
    // are nearly balanced regardless of feature style.
    let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut margins: Vec<f64> = (0..n)
        .map(|i| {
            features[i * d..(i + 1) * d]
                .iter()
                .zip(&w)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    let mut sorted = margins.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[n / 2];

    let mut labels: Vec<f64> = margins
        .drain(..)
        .map(|m| if m >= median { 1.0 } else { -1.0 })
        .collect();

    // Flip a fixed fraction so the stand-in is not linearly separable.
    for l in labels.iter_mut() {
        if rng.gen_bool(LABEL_FLIP_RATE) {
            *l = -*l;
        }
    }

    // Guarantee both classes are present.
    if labels.iter().all(|&l| l == labels[0]) {
        labels[0] = -labels[0];
    }

    Dataset::new(features, labels, n, d)
}

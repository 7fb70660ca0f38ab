//! Deterministic, path-addressed random substreams.
//!
//! A stream is identified by a master seed and a path of labels such as
//! `["trial", 3, "error"]`. The ChaCha seed is the SHA-256 digest of a
//! length-prefixed encoding of the seed and every label, so distinct paths
//! give unrelated streams and no two workers ever share generator state.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathLabel {
    Str(String),
    Int(u64),
}

impl From<&str> for PathLabel {
    fn from(s: &str) -> Self {
        PathLabel::Str(s.to_owned())
    }
}

impl From<String> for PathLabel {
    fn from(s: String) -> Self {
        PathLabel::Str(s)
    }
}

impl From<u64> for PathLabel {
    fn from(v: u64) -> Self {
        PathLabel::Int(v)
    }
}

impl From<usize> for PathLabel {
    fn from(v: usize) -> Self {
        PathLabel::Int(v as u64)
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathLabel::Str(s) => f.write_str(s),
            PathLabel::Int(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone)]
pub struct RandomStream {
    master_seed: u64,
    path: Vec<PathLabel>,
    rng: ChaCha12Rng,
}

impl fmt::Debug for RandomStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomStream")
            .field("master_seed", &self.master_seed)
            .field("path", &self.path_string())
            .finish()
    }
}

fn mix(master_seed: u64, path: &[PathLabel]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"rsmc-stream-v1");
    h.update(master_seed.to_le_bytes());
    for label in path {
        match label {
            PathLabel::Str(s) => {
                h.update([0u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            PathLabel::Int(v) => {
                h.update([1u8]);
                h.update(v.to_le_bytes());
            }
        }
    }
    h.finalize().into()
}

/// Derive the substream addressed by `(master_seed, path)`.
pub fn derive_stream(master_seed: u64, path: &[PathLabel]) -> RandomStream {
    RandomStream::new(master_seed, path)
}

impl RandomStream {
    pub fn new(master_seed: u64, path: &[PathLabel]) -> Self {
        RandomStream {
            master_seed,
            path: path.to_vec(),
            rng: ChaCha12Rng::from_seed(mix(master_seed, path)),
        }
    }

    /// Fresh stream at `self.path + [label]`. Independent of how many draws
    /// have already been taken from `self`.
    pub fn child(&self, label: impl Into<PathLabel>) -> Self {
        let mut path = self.path.clone();
        path.push(label.into());
        RandomStream::new(self.master_seed, &path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[PathLabel] {
        &self.path
    }

    /// `/`-joined path, e.g. `trial/3/error`.
    pub fn path_string(&self) -> String {
        self.path.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("/")
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circularly-symmetric `CN(0, 1)`: real and imaginary parts each `N(0, 1/2)`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.standard_normal() * s, self.standard_normal() * s)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

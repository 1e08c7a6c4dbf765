//! Reproducible test sequences with known limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::scalar::Scalar;
use crate::sequence::{is_square, SequencePrefix};

/// Names accepted by [`generate`].
pub const NAMES: [&str; 8] =
    ["squares", "periodic2", "alternating", "harmonic_drift", "tauberian_ok", "tauberian_violator", "density_half", "random_bounded"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub name: String,
    pub description: String,
    /// Ordinary limit, when the sequence converges.
    pub limit: Option<f64>,
    /// Statistical (Cesàro density) limit, when it exists.
    pub statistical_limit: Option<f64>,
}

fn info(name: &str, description: &str, limit: Option<f64>, statistical_limit: Option<f64>) -> CorpusInfo {
    CorpusInfo { name: name.into(), description: description.into(), limit, statistical_limit }
}

/// Thue-Morse bit of n − 1.
fn thue_morse(n: usize) -> bool {
    (n - 1).count_ones() % 2 == 1
}

/// Splits `name(seed)` into name and seed.
pub fn parse_name(spec: &str) -> Result<(String, Option<u64>)> {
    let spec = spec.trim();
    match spec.split_once('(') {
        Some((name, rest)) => {
            let seed = rest
                .strip_suffix(')')
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| crate::Error::Input(format!("bad seed in corpus name {spec:?}")))?;
            Ok((name.trim().to_string(), Some(seed)))
        }
        None => Ok((spec.to_string(), None)),
    }
}

/// Description and limits of a named generator.
pub fn describe(name: &str, seed: u64) -> Result<CorpusInfo> {
    Ok(match name {
        "squares" => info(name, "indicator of the perfect squares", None, Some(0.0)),
        "periodic2" => info(name, "1, 0, 1, 0, ...; almost convergent to 1/2", None, None),
        "alternating" => info(name, "(-1)^n", None, None),
        "harmonic_drift" => info(name, "0.3 + 1/n", Some(0.3), Some(0.3)),
        "tauberian_ok" => {
            let p = TauberianParams::new(seed);
            info(name, "a + r n^(-alpha) + q cos(theta n)/n; variation O(1/n)", Some(p.a), Some(p.a))
        }
        "tauberian_violator" => info(name, "indicator of the squares; variation not O(1/n)", None, Some(0.0)),
        "density_half" => info(name, "Thue-Morse bits t_(n-1); ones have density 1/2", None, None),
        "random_bounded" => info(name, "i.i.d. uniform on [-1, 1]", None, None),
        _ => return input(format!("unknown corpus {name:?}; known: {}", NAMES.join(", "))),
    })
}

struct TauberianParams {
    a: f64,
    r: f64,
    alpha: f64,
    q: f64,
    theta: f64,
}

impl TauberianParams {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TauberianParams {
            a: rng.gen_range(-1.0..1.0),
            r: rng.gen_range(-1.0..1.0),
            alpha: rng.gen_range(1.0..1.5),
            q: rng.gen_range(-1.0..1.0),
            theta: rng.gen_range(0.1..3.0),
        }
    }
}

/// First `n` terms of a named generator; `seed` matters for the seeded ones.
pub fn generate<T: Scalar>(name: &str, n: usize, seed: u64) -> Result<SequencePrefix<T>> {
    let desc = describe(name, seed)?;
    let bit = |b: bool| if b { T::one() } else { T::zero() };
    let s = match name {
        "squares" | "tauberian_violator" => SequencePrefix::from_fn(n, |k| bit(is_square(k))),
        "periodic2" => SequencePrefix::from_fn(n, |k| bit(k % 2 == 1)),
        "alternating" => SequencePrefix::from_fn(n, |k| if k % 2 == 0 { T::one() } else { -T::one() }),
        "harmonic_drift" => SequencePrefix::from_fn(n, |k| T::of(0.3) + T::of_usize(k).recip()),
        "tauberian_ok" => {
            let p = TauberianParams::new(seed);
            SequencePrefix::from_fn(n, |k| {
                let x = k as f64;
                T::of(p.a + p.r * x.powf(-p.alpha) + p.q * (p.theta * x).cos() / x)
            })
        }
        "density_half" => SequencePrefix::from_fn(n, |k| bit(thue_morse(k))),
        "random_bounded" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SequencePrefix::new((0..n).map(|_| T::of(rng.gen_range(-1.0..=1.0))).collect())
        }
        _ => unreachable!("checked by describe"),
    };
    let s = s.with_label(desc.name.clone());
    Ok(match desc.limit {
        Some(a) => s.with_limit(T::of(a)),
        None => s,
    })
}

/// Constant a plus uniform noise on the squares: statistically convergent to a, not convergent.
pub fn sparse_spikes<T: Scalar>(n: usize, seed: u64) -> SequencePrefix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: f64 = rng.gen_range(-1.0..1.0);
    let vals = (1..=n).map(|k| T::of(if is_square(k) { a + rng.gen_range(-1.0..1.0) } else { a })).collect();
    SequencePrefix::new(vals).with_label(format!("sparse_spikes({seed})"))
}

/// `size` labelled sequences: the fixed generators, then seeded Tauberian, sparse-spike and
/// random bounded sequences in rotation.
pub fn standard_corpus<T: Scalar>(n: usize, size: usize, seed: u64) -> Vec<SequencePrefix<T>> {
    let mut out: Vec<SequencePrefix<T>> = ["squares", "periodic2", "alternating", "harmonic_drift", "density_half"]
        .iter()
        .map(|name| generate(name, n, 0).expect("known generator"))
        .collect();
    let mut j = 0u64;
    while out.len() < size {
        let s = seed.wrapping_add(j);
        let next = match j % 3 {
            0 => generate("tauberian_ok", n, s).expect("known generator").with_label(format!("tauberian_ok({s})")),
            1 => sparse_spikes(n, s),
            _ => generate("random_bounded", n, s).expect("known generator").with_label(format!("random_bounded({s})")),
        };
        out.push(next);
        j += 1;
    }
    out.truncate(size);
    out
}

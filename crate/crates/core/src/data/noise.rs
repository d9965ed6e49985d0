use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Observed labels after corruption, plus the set of flipped nodes.
///
/// `flipped` is bookkeeping for analysis; training never reads it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoisyLabels {
    pub observed: Vec<usize>,
    pub flipped: Vec<usize>,
}

impl NoisyLabels {
    pub fn clean(labels: &[usize]) -> Self {
        Self {
            observed: labels.to_vec(),
            flipped: Vec::new(),
        }
    }
}

/// Fixed-point-free map from each class to its confusing partner class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PairMap(Vec<usize>);

impl PairMap {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let k = map.len();
        for (c, &target) in map.iter().enumerate() {
            if target >= k {
                return Err(Error::invalid(format!(
                    "pair map sends class {c} to {target}, outside 0..{k}"
                )));
            }
            if target == c {
                return Err(Error::invalid(format!("pair map fixes class {c}")));
            }
        }
        Ok(Self(map))
    }

    /// `c -> (c + 1) mod k`.
    pub fn cyclic(num_classes: usize) -> Result<Self> {
        Self::new((0..num_classes).map(|c| (c + 1) % num_classes).collect())
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    pub fn partner(&self, class: usize) -> usize {
        self.0[class]
    }
}

impl TryFrom<Vec<usize>> for PairMap {
    type Error = Error;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Self::new(map)
    }
}

impl From<PairMap> for Vec<usize> {
    fn from(map: PairMap) -> Self {
        map.0
    }
}

fn check_common(labels: &[usize], targets: &[usize], p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "noise rate {p} is not a probability"
        )));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= labels.len()) {
        return Err(Error::invalid(format!("noise target {t} out of range")));
    }
    Ok(())
}

/// Flip each target with probability `p` to a class drawn uniformly from the
/// other `num_classes - 1` classes.
pub fn inject_uniform_noise(
    labels: &[usize],
    targets: &[usize],
    p: f64,
    num_classes: usize,
    seed: u64,
) -> Result<NoisyLabels> {
    check_common(labels, targets, p)?;
    if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::invalid(format!(
            "label {l} out of range for {num_classes} classes"
        )));
    }
    if p > 0.0 && num_classes < 2 {
        return Err(Error::invalid("uniform noise needs at least two classes"));
    }
    let mut rng = rng::stream(seed, Stream::Noise);
    let mut noisy = NoisyLabels::clean(labels);
    for &t in targets {
        if rng.random_bool(p) {
            let clean = labels[t];
            let draw = rng.random_range(0..num_classes - 1);
            noisy.observed[t] = if draw >= clean { draw + 1 } else { draw };
            noisy.flipped.push(t);
        }
    }
    noisy.flipped.sort_unstable();
    Ok(noisy)
}

/// Flip each target with probability `p` to its partner class.
pub fn inject_pair_noise(
    labels: &[usize],
    targets: &[usize],
    p: f64,
    pair_map: &PairMap,
    seed: u64,
) -> Result<NoisyLabels> {
    check_common(labels, targets, p)?;
    if let Some(&l) = labels.iter().find(|&&l| l >= pair_map.num_classes()) {
        return Err(Error::invalid(format!(
            "label {l} not covered by the pair map"
        )));
    }
    let mut rng = rng::stream(seed, Stream::Noise);
    let mut noisy = NoisyLabels::clean(labels);
    for &t in targets {
        if rng.random_bool(p) {
            noisy.observed[t] = pair_map.partner(labels[t]);
            noisy.flipped.push(t);
        }
    }
    noisy.flipped.sort_unstable();
    Ok(noisy)
}

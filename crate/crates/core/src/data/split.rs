use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Attempts at drawing a random labeled set that covers every class.
const COVERAGE_RETRIES: usize = 1000;

/// Disjoint train/val/test node sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitMasks {
    pub fn new(mut train: Vec<usize>, mut val: Vec<usize>, mut test: Vec<usize>) -> Self {
        train.sort_unstable();
        val.sort_unstable();
        test.sort_unstable();
        Self { train, val, test }
    }

    /// Check disjointness, id range and a non-empty training set.
    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        let mut owner = vec![None; num_nodes];
        for (name, set) in [
            ("train", &self.train),
            ("val", &self.val),
            ("test", &self.test),
        ] {
            for &i in set {
                let slot = owner.get_mut(i).ok_or_else(|| {
                    Error::invalid(format!(
                        "{name} node {i} out of range for {num_nodes} nodes"
                    ))
                })?;
                if let Some(prev) = slot.replace(name) {
                    return Err(Error::invalid(format!(
                        "node {i} is in both {prev} and {name}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `train ∪ val`, sorted.
    pub fn train_and_val(&self) -> Vec<usize> {
        let mut out: Vec<_> = self.train.iter().chain(&self.val).copied().collect();
        out.sort_unstable();
        out
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let masks: Self = serde_json::from_str(&text)?;
        Ok(Self::new(masks.train, masks.val, masks.test))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `per_class` training nodes from every class, then `val_size` and
/// `test_size` nodes drawn uniformly from the remainder.
pub fn standard_split(
    d: &Dataset,
    per_class: usize,
    val_size: usize,
    test_size: usize,
    seed: u64,
) -> Result<SplitMasks> {
    if per_class == 0 {
        return Err(Error::invalid("per_class must be positive"));
    }
    let mut rng = rng::stream(seed, Stream::Split);
    let mut train = Vec::with_capacity(per_class * d.num_classes);
    let mut rest = Vec::new();
    for (class, mut members) in d.class_members().into_iter().enumerate() {
        if members.len() < per_class {
            return Err(Error::invalid(format!(
                "class {class} has {} nodes, fewer than {per_class} per-class training nodes",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..per_class]);
        rest.extend_from_slice(&members[per_class..]);
    }
    rest.sort_unstable();
    let (val, test) = draw_val_test(rest, val_size, test_size, &mut rng)?;
    Ok(SplitMasks::new(train, val, test))
}

/// `round(label_rate · N)` training nodes drawn uniformly, redrawn until every
/// class is represented.
pub fn random_split(
    d: &Dataset,
    label_rate: f64,
    val_size: usize,
    test_size: usize,
    seed: u64,
) -> Result<SplitMasks> {
    if !(label_rate > 0.0 && label_rate <= 1.0) {
        return Err(Error::invalid(format!(
            "label rate {label_rate} must lie in (0, 1]"
        )));
    }
    let n = d.num_nodes();
    let count = (label_rate * n as f64).round() as usize;
    if count == 0 {
        return Err(Error::invalid(format!(
            "label rate {label_rate} selects no training nodes out of {n}"
        )));
    }
    if count < d.num_classes {
        return Err(Error::invalid(format!(
            "{count} training nodes cannot cover {} classes",
            d.num_classes
        )));
    }
    let mut rng = rng::stream(seed, Stream::Split);
    let mut nodes: Vec<usize> = (0..n).collect();
    for _ in 0..COVERAGE_RETRIES {
        nodes.shuffle(&mut rng);
        let mut covered = vec![false; d.num_classes];
        for &i in &nodes[..count] {
            covered[d.labels[i]] = true;
        }
        if covered.iter().all(|&c| c) {
            let train = nodes[..count].to_vec();
            let mut rest = nodes[count..].to_vec();
            rest.sort_unstable();
            let (val, test) = draw_val_test(rest, val_size, test_size, &mut rng)?;
            return Ok(SplitMasks::new(train, val, test));
        }
    }
    Err(Error::invalid(format!(
        "no draw of {count} training nodes covered all {} classes in {COVERAGE_RETRIES} attempts",
        d.num_classes
    )))
}

fn draw_val_test(
    mut rest: Vec<usize>,
    val_size: usize,
    test_size: usize,
    rng: &mut rng::Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if rest.len() < val_size + test_size {
        return Err(Error::invalid(format!(
            "{} nodes remain after training selection, need {val_size} val + {test_size} test",
            rest.len()
        )));
    }
    rest.shuffle(rng);
    let val = rest[..val_size].to_vec();
    let test = rest[val_size..val_size + test_size].to_vec();
    Ok((val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sbm_generate, SbmParams};

    fn sbm(n: usize, k: usize) -> Dataset {
        let p = SbmParams {
            num_nodes: n,
            num_classes: k,
            p_in: 0.05,
            p_out: 0.005,
            feature_dim: k,
            feature_noise: 0.1,
        };
        Dataset::from_synthetic(sbm_generate(&p, 3).unwrap()).unwrap()
    }

    #[test]
    fn standard_split_is_class_balanced() {
        let d = sbm(2100, 7);
        let m = standard_split(&d, 20, 500, 1000, 0).unwrap();
        assert_eq!(m.train.len(), 140);
        assert_eq!(m.val.len(), 500);
        assert_eq!(m.test.len(), 1000);
        for class in 0..7 {
            assert_eq!(
                m.train.iter().filter(|&&i| d.labels[i] == class).count(),
                20
            );
        }
        m.validate(d.num_nodes()).unwrap();
        assert_eq!(m, standard_split(&d, 20, 500, 1000, 0).unwrap());
        assert_ne!(m, standard_split(&d, 20, 500, 1000, 1).unwrap());
    }

    #[test]
    fn standard_split_on_700_nodes() {
        let d = sbm(700, 7);
        let m = standard_split(&d, 20, 200, 300, 5).unwrap();
        assert_eq!(m.train.len(), 140);
    }

    #[test]
    fn standard_split_rejects_small_classes() {
        let d = sbm(70, 7);
        assert!(standard_split(&d, 11, 0, 0, 0).is_err());
        assert!(standard_split(&d, 5, 30, 10, 0).is_err());
    }

    #[test]
    fn random_split_sizes() {
        let d = sbm(1000, 4);
        let m = random_split(&d, 0.01, 100, 200, 9).unwrap();
        assert_eq!(m.train.len(), 10);
        m.validate(1000).unwrap();
        for rate in [0.01, 0.03, 0.05] {
            let m = random_split(&d, rate, 500, 400, 1).unwrap();
            assert_eq!(m.train.len(), (rate * 1000.0).round() as usize);
        }
    }

    #[test]
    fn random_split_errors() {
        let d = sbm(1000, 4);
        assert!(random_split(&d, 0.0, 10, 10, 0).is_err());
        assert!(random_split(&d, 0.002, 10, 10, 0).is_err());
    }

    #[test]
    fn validate_catches_overlap() {
        let m = SplitMasks::new(vec![0, 1], vec![1], vec![]);
        assert!(m.validate(3).is_err());
        assert!(SplitMasks::new(vec![], vec![1], vec![])
            .validate(3)
            .is_err());
        assert!(SplitMasks::new(vec![5], vec![], vec![])
            .validate(3)
            .is_err());
    }

    #[test]
    fn json_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.json");
        let m = SplitMasks::new(vec![2, 0], vec![1], vec![3]);
        m.write_json(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, r#"{"train":[0,2],"val":[1],"test":[3]}"#);
        assert_eq!(SplitMasks::read_json(&path).unwrap(), m);
    }
}

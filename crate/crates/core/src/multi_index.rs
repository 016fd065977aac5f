use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vector of per-weight orthogonality orders `(n_1, …, n_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        MultiIndex(components)
    }

    pub fn zeros(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// Unit vector with a one in (zero-based) position `k`.
    pub fn unit(m: usize, k: usize) -> Self {
        let mut v = vec![0; m];
        v[k] = 1;
        MultiIndex(v)
    }

    /// `e_1 + … + e_j`.
    pub fn partial_ones(m: usize, j: usize) -> Self {
        MultiIndex((0..m).map(|k| usize::from(k < j)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, k: usize) -> usize {
        self.0[k]
    }

    /// `|n|`
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn plus_e(&self, k: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[k] += 1;
        MultiIndex(v)
    }

    /// `n - e_k`, `None` when `n_k = 0`.
    pub fn minus_e(&self, k: usize) -> Option<MultiIndex> {
        let mut v = self.0.clone();
        v[k] = v[k].checked_sub(1)?;
        Some(MultiIndex(v))
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&c| c >= 1)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: std::result::Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
        match parts {
            Ok(v) if !v.is_empty() => Ok(MultiIndex(v)),
            _ => Err(Error::InvalidInput(format!("bad multi-index {s:?}"))),
        }
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// Order in which [`canonical_path`] raises the components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PathOrder {
    /// Component 1 up to `n_1`, then component 2, …
    #[default]
    Block,
    /// Cycle through the components that still need raising.
    RoundRobin,
    /// Block order starting from the last component.
    ReverseBlock,
}

/// Chain `0 = n_0, n_1, …, n_n` of multi-indices, each step adding one unit
/// vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Path {
    steps: Vec<MultiIndex>,
}

impl Path {
    /// Validates that the chain starts at zero and moves by unit steps.
    pub fn new(steps: Vec<MultiIndex>) -> Result<Self> {
        let first = steps.first().ok_or_else(|| Error::InvalidInput("empty path".into()))?;
        if first.total() != 0 {
            return Err(Error::InvalidInput("path must start at the zero index".into()));
        }
        let m = first.len();
        for (j, w) in steps.windows(2).enumerate() {
            if w[1].len() != m || !w[0].le(&w[1]) || w[1].total() != w[0].total() + 1 {
                return Err(Error::InvalidInput(format!(
                    "step {} -> {} of the path is not a unit increment",
                    j,
                    j + 1
                )));
            }
        }
        Ok(Path { steps })
    }

    pub fn steps(&self) -> &[MultiIndex] {
        &self.steps
    }

    /// Number of steps `n` (the path has `n + 1` nodes).
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn end(&self) -> &MultiIndex {
        self.steps.last().expect("paths are non-empty")
    }

    pub fn m(&self) -> usize {
        self.steps[0].len()
    }

    /// Zero-based component raised in step `j -> j+1`.
    pub fn direction(&self, j: usize) -> usize {
        let (a, b) = (&self.steps[j], &self.steps[j + 1]);
        (0..a.len()).find(|&k| b.get(k) > a.get(k)).expect("unit step")
    }
}

pub fn canonical_path(n: &MultiIndex, order: PathOrder) -> Path {
    let m = n.len();
    let mut cur = MultiIndex::zeros(m);
    let mut steps = vec![cur.clone()];
    let mut push = |k: usize, cur: &mut MultiIndex| {
        *cur = cur.plus_e(k);
        steps.push(cur.clone());
    };
    match order {
        PathOrder::Block => {
            for k in 0..m {
                for _ in 0..n.get(k) {
                    push(k, &mut cur);
                }
            }
        }
        PathOrder::ReverseBlock => {
            for k in (0..m).rev() {
                for _ in 0..n.get(k) {
                    push(k, &mut cur);
                }
            }
        }
        PathOrder::RoundRobin => {
            while cur.total() < n.total() {
                for k in 0..m {
                    if cur.get(k) < n.get(k) {
                        push(k, &mut cur);
                    }
                }
            }
        }
    }
    Path { steps }
}

/// Append `n + s_1, …, n + s_m`, i.e. steps in directions `e_1, …, e_m`.
pub fn extend_path(p: &Path) -> Path {
    let mut steps = p.steps.clone();
    let mut cur = p.end().clone();
    for k in 0..p.m() {
        cur = cur.plus_e(k);
        steps.push(cur.clone());
    }
    Path { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn block_and_round_robin_orders() {
        let p = canonical_path(&mi(&[2, 1]), PathOrder::Block);
        assert_eq!(p.steps(), &[mi(&[0, 0]), mi(&[1, 0]), mi(&[2, 0]), mi(&[2, 1])]);
        let r = canonical_path(&mi(&[1, 1]), PathOrder::RoundRobin);
        assert_eq!(r.steps(), &[mi(&[0, 0]), mi(&[1, 0]), mi(&[1, 1])]);
        let z = canonical_path(&mi(&[0, 0]), PathOrder::Block);
        assert_eq!(z.steps(), &[mi(&[0, 0])]);
        assert!(z.is_empty());
    }

    #[test]
    fn extension_appends_partial_sums() {
        let p = canonical_path(&mi(&[1, 1]), PathOrder::Block);
        let e = extend_path(&p);
        assert_eq!(&e.steps()[3..], &[mi(&[2, 1]), mi(&[2, 2])]);
        let z = extend_path(&canonical_path(&mi(&[0, 0, 0]), PathOrder::Block));
        assert_eq!(&z.steps()[1..], &[mi(&[1, 0, 0]), mi(&[1, 1, 0]), mi(&[1, 1, 1])]);
    }

    #[test]
    fn rejects_invalid_paths() {
        assert!(Path::new(vec![mi(&[0, 0]), mi(&[1, 1])]).is_err());
        assert!(Path::new(vec![mi(&[1, 0])]).is_err());
        assert!(Path::new(vec![mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 1])]).is_ok());
    }

    #[test]
    fn parse_and_display() {
        let n: MultiIndex = "2, 1,0".parse().unwrap();
        assert_eq!(n, mi(&[2, 1, 0]));
        assert_eq!(n.to_string(), "2,1,0");
        assert!("a,b".parse::<MultiIndex>().is_err());
        assert_eq!(mi(&[1, 0]).minus_e(1), None);
    }

    proptest! {
        #[test]
        fn canonical_paths_are_valid(n in prop::collection::vec(0usize..4, 1..4), rr in any::<bool>()) {
            let n = MultiIndex::new(n);
            let order = if rr { PathOrder::RoundRobin } else { PathOrder::Block };
            let p = canonical_path(&n, order);
            prop_assert!(Path::new(p.steps().to_vec()).is_ok());
            prop_assert_eq!(p.end(), &n);
            let e = extend_path(&p);
            for (j, s) in e.steps().iter().enumerate() {
                prop_assert_eq!(s.total(), j);
            }
        }
    }
}

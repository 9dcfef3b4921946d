//! Private-sum building blocks.
//!
//! [`ArraySum`] is a fixed-capacity array compressed to `(count, sum,
//! capacity)`; it releases one noisy sum, once, when it fills.
//! [`BinaryTreeCounter`] is the streaming binary (tree-aggregation)
//! mechanism: it keeps only the p-sums on the current insertion frontier and
//! answers prefix-sum queries from at most `popcount(n)` noisy p-sums.
//! [`hybrid_noisy_total`] composes the two.

use crate::noise::LaplaceNoise;
use crate::{Error, Result};

/// A lazily released Laplace sum over a fixed number of slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySum {
    capacity: u64,
    len: u64,
    sum: f64,
    noisy_sum: Option<f64>,
    scale: f64,
}

impl ArraySum {
    /// `scale` is the Laplace scale added to the sum when the array fills.
    pub fn new(capacity: u64, scale: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter(
                "array capacity must be positive".into(),
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "array noise scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            capacity,
            len: 0,
            sum: 0.0,
            noisy_sum: None,
            scale,
        })
    }

    /// Inserts one observation. Returns the released noisy sum when this
    /// insert fills the array.
    pub fn insert(&mut self, x: f64, noise: &mut LaplaceNoise) -> Result<Option<f64>> {
        if self.is_full() {
            return Err(Error::Logic(format!(
                "insert into a full array of capacity {}",
                self.capacity
            )));
        }
        self.len += 1;
        self.sum += x;
        if self.len == self.capacity {
            let released = self.sum + noise.sample(self.scale)?;
            self.noisy_sum = Some(released);
            return Ok(Some(released));
        }
        Ok(None)
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.capacity
    }

    /// True (noise-free) sum of the inserted values.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The released noisy sum; `None` until the array fills.
    pub fn noisy_sum(&self) -> Option<f64> {
        self.noisy_sum
    }

    #[cfg(test)]
    pub(crate) fn finalized_with(capacity: u64, sum: f64, noise: f64) -> Self {
        Self {
            capacity,
            len: capacity,
            sum,
            noisy_sum: Some(sum + noise),
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PSum {
    sum: f64,
    noise: f64,
}

/// A dyadic interval `[start, end]` of 1-based insert positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dyadic {
    pub start: u64,
    pub end: u64,
}

impl Dyadic {
    pub fn len(&self) -> u64 {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Streaming binary mechanism over a tree with `capacity` leaves.
///
/// Level `i` of the frontier holds the p-sum of the most recent complete
/// block of `2^i` inserts, and is live exactly when bit `i` of the insert
/// count is set. Each p-sum draws its noise once, when it is formed.
#[derive(Debug, Clone)]
pub struct BinaryTreeCounter {
    capacity: u64,
    count: u64,
    frontier: Vec<Option<PSum>>,
    node_scale: f64,
}

impl BinaryTreeCounter {
    /// Tree for a mechanism holding privacy budget `epsilon` split evenly
    /// with a sibling mechanism, so the per-node scale is
    /// `log2(capacity) / (epsilon / 2)`.
    pub fn new(capacity: u64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Self::check_capacity(capacity)?;
        let depth = capacity.trailing_zeros() as f64;
        Self::with_node_scale(capacity, depth / (epsilon / 2.0))
    }

    pub fn with_node_scale(capacity: u64, node_scale: f64) -> Result<Self> {
        Self::check_capacity(capacity)?;
        if !(node_scale > 0.0 && node_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "node noise scale must be positive, got {node_scale}"
            )));
        }
        let levels = capacity.trailing_zeros() as usize + 1;
        Ok(Self {
            capacity,
            count: 0,
            frontier: vec![None; levels],
            node_scale,
        })
    }

    fn check_capacity(capacity: u64) -> Result<()> {
        if capacity < 2 || !capacity.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "tree capacity must be a power of two >= 2, got {capacity}"
            )));
        }
        Ok(())
    }

    pub fn insert(&mut self, x: f64, noise: &mut LaplaceNoise) -> Result<()> {
        if self.is_full() {
            return Err(Error::Logic(format!(
                "insert into a full tree of capacity {}",
                self.capacity
            )));
        }
        self.count += 1;
        let level = self.count.trailing_zeros() as usize;
        let mut sum = x;
        for slot in &mut self.frontier[..level] {
            if let Some(p) = slot.take() {
                sum += p.sum;
            }
        }
        self.frontier[level] = Some(PSum {
            sum,
            noise: noise.sample(self.node_scale)?,
        });
        Ok(())
    }

    /// Noisy prefix sum of everything inserted so far.
    pub fn noisy_sum(&self) -> f64 {
        self.frontier
            .iter()
            .flatten()
            .map(|p| p.sum + p.noise)
            .sum()
    }

    pub fn true_sum(&self) -> f64 {
        self.frontier.iter().flatten().map(|p| p.sum).sum()
    }

    /// Dyadic blocks whose p-sums make up [`noisy_sum`](Self::noisy_sum),
    /// oldest first.
    pub fn covering_set(&self) -> Vec<Dyadic> {
        let mut out = Vec::new();
        let mut start = 1;
        for level in (0..self.frontier.len()).rev() {
            if self.count >> level & 1 == 1 {
                let end = start + (1u64 << level) - 1;
                out.push(Dyadic { start, end });
                start = end + 1;
            }
        }
        out
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.capacity
    }

    pub fn node_scale(&self) -> f64 {
        self.node_scale
    }

    #[cfg(test)]
    fn node_noises(&self) -> Vec<f64> {
        self.frontier.iter().flatten().map(|p| p.noise).collect()
    }
}

/// Noisy total of the settled arrays plus the live tree.
pub fn hybrid_noisy_total(completed: &[ArraySum], live: &BinaryTreeCounter) -> Result<f64> {
    let mut total = live.noisy_sum();
    for (r, array) in completed.iter().enumerate() {
        total += array.noisy_sum().ok_or_else(|| {
            Error::Logic(format!(
                "array {r} is not full ({} of {})",
                array.len(),
                array.capacity()
            ))
        })?;
    }
    Ok(total)
}

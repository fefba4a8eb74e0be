//! Four-detector click patterns and distributions over them.
//!
//! Detectors 1 and 2 sit on the left mode, 3 and 4 on the right. Detector `i`
//! (1-based) is bit `i - 1` of the pattern.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClickPattern(u8);

impl ClickPattern {
    pub const NONE: ClickPattern = ClickPattern(0);

    /// The four patterns with exactly one click in each mode.
    pub const SIGNATURES: [ClickPattern; 4] = [
        ClickPattern(0b0101), // (1,0,1,0)
        ClickPattern(0b1001), // (1,0,0,1)
        ClickPattern(0b0110), // (0,1,1,0)
        ClickPattern(0b1010), // (0,1,0,1)
    ];

    pub fn new(d1: bool, d2: bool, d3: bool, d4: bool) -> Self {
        ClickPattern(d1 as u8 | (d2 as u8) << 1 | (d3 as u8) << 2 | (d4 as u8) << 3)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 16, "click pattern index out of range");
        ClickPattern(index as u8)
    }

    /// Single click on detector `detector` (0-based).
    pub fn single(detector: usize) -> Self {
        Self::from_index(1 << detector)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = ClickPattern> {
        (0..16).map(ClickPattern)
    }

    pub fn clicked(self, detector: usize) -> bool {
        self.0 >> detector & 1 == 1
    }

    /// Detectors that fire when either source fires.
    pub fn union(self, other: ClickPattern) -> Self {
        ClickPattern(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: ClickPattern) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_signature(self) -> bool {
        Self::SIGNATURES.contains(&self)
    }

    pub fn bits(self) -> [u8; 4] {
        [0, 1, 2, 3].map(|i| self.clicked(i) as u8)
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.bits();
        write!(f, "({a},{b},{c},{d})")
    }
}

/// Probability mass over the 16 click patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPatternDistribution {
    probs: [f64; 16],
}

impl DetectorPatternDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(probs: [f64; 16]) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvariantViolation(format!(
                "negative pattern probability {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvariantViolation(format!(
                "pattern probabilities sum to {sum}"
            )));
        }
        Ok(DetectorPatternDistribution { probs })
    }

    /// Everything on the no-click pattern.
    pub fn silent() -> Self {
        let mut probs = [0.0; 16];
        probs[0] = 1.0;
        DetectorPatternDistribution { probs }
    }

    pub fn prob(&self, d: ClickPattern) -> f64 {
        self.probs[d.index()]
    }

    pub fn probs(&self) -> &[f64; 16] {
        &self.probs
    }
}

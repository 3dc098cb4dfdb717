//! The three parameter regions of the divergence domain `0 < α ≤ z < 1`:
//!
//! * A = {z ≥ max(1−α, α)}
//! * B = {1/2 ≤ z ≤ 1−α}
//! * C = {α ≤ z ≤ 1/2}
//!
//! Boundary points belong to every region whose closed inequalities they meet.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::divergences::AlphaZ;
use crate::error::{Error, Result};
use crate::linalg::PdRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::A, Region::B, Region::C];

    pub fn contains(&self, p: &AlphaZ) -> bool {
        let (alpha, z) = (p.alpha(), p.z());
        match self {
            Region::A => z >= (1.0 - alpha).max(alpha),
            Region::B => 0.5 <= z && z <= 1.0 - alpha,
            Region::C => alpha <= z && z <= 0.5,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C",
        })
    }
}

/// Regions containing `p`, in A, B, C order. Never empty on the domain.
pub fn region_classify(p: &AlphaZ) -> Result<Vec<Region>> {
    if !p.in_divergence_domain() {
        return Err(Error::Domain(format!(
            "(alpha, z) = ({}, {}) lies outside 0 < alpha <= z < 1",
            p.alpha(),
            p.z()
        )));
    }
    Ok(Region::ALL.into_iter().filter(|r| r.contains(p)).collect())
}

/// Sampling window for `z`. The lower end keeps exponents `(1−α)/z` at most 4,
/// the upper end keeps `1/(1−z)`-type stiffness bounded.
pub const Z_MIN: f64 = 0.25;
pub const Z_MAX: f64 = 0.95;
/// Smallest sampled `α`.
pub const ALPHA_MIN: f64 = 0.02;

/// Where a check may draw its `(α, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionConstraint {
    /// The whole domain A ∪ B ∪ C.
    Any,
    /// A ∪ B, i.e. `z ≥ 1/2`.
    AUnionB,
    /// B ∩ C, i.e. `z = 1/2` and `α ≤ 1/2`.
    BIntersectC,
    /// The check does not depend on `(α, z)`.
    None,
}

impl RegionConstraint {
    pub fn regions(&self) -> Vec<Region> {
        match self {
            RegionConstraint::Any => Region::ALL.to_vec(),
            RegionConstraint::AUnionB => vec![Region::A, Region::B],
            RegionConstraint::BIntersectC => vec![Region::B, Region::C],
            RegionConstraint::None => Vec::new(),
        }
    }

    pub fn admits(&self, p: &AlphaZ) -> bool {
        if !p.in_divergence_domain() {
            return false;
        }
        match self {
            RegionConstraint::Any | RegionConstraint::None => true,
            RegionConstraint::AUnionB => Region::A.contains(p) || Region::B.contains(p),
            RegionConstraint::BIntersectC => Region::B.contains(p) && Region::C.contains(p),
        }
    }

    /// Draws a parameter pair inside the constraint: a region is picked
    /// uniformly among those allowed, then `(α, z)` uniformly inside its
    /// sampling window.
    pub fn sample(&self, rng: &mut PdRng) -> AlphaZ {
        match self {
            RegionConstraint::Any | RegionConstraint::None => {
                sample_region(Region::ALL[rng.index(3)], rng)
            }
            RegionConstraint::AUnionB => sample_region([Region::A, Region::B][rng.index(2)], rng),
            RegionConstraint::BIntersectC => {
                let alpha = rng.uniform(ALPHA_MIN, 0.5);
                AlphaZ::new(alpha, 0.5).expect("sampled inside the domain")
            }
        }
    }
}

/// Uniform draw from the sampling window of one region.
pub fn sample_region(region: Region, rng: &mut PdRng) -> AlphaZ {
    let (alpha, z) = match region {
        Region::A => {
            let z = rng.uniform(0.5, Z_MAX);
            (rng.uniform(1.0 - z, z), z)
        }
        Region::B => {
            let z = rng.uniform(0.5, Z_MAX);
            (rng.uniform(ALPHA_MIN, 1.0 - z), z)
        }
        Region::C => {
            let z = rng.uniform(Z_MIN, 0.5);
            (rng.uniform(ALPHA_MIN, z), z)
        }
    };
    AlphaZ::new(alpha, z).expect("sampled inside the domain")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(alpha: f64, z: f64) -> Vec<Region> {
        region_classify(&AlphaZ::new(alpha, z).unwrap()).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(0.5, 0.5), vec![Region::A, Region::B, Region::C]);
        assert_eq!(classify(0.2, 0.9), vec![Region::A]);
        assert_eq!(classify(0.3, 0.4), vec![Region::C]);
        assert_eq!(classify(0.2, 0.6), vec![Region::B]);
        assert!(region_classify(&AlphaZ::relaxed(0.6, 0.5).unwrap()).is_err());
    }

    #[test]
    fn samples_fall_in_their_region() {
        let mut rng = PdRng::new(61);
        for _ in 0..500 {
            for region in Region::ALL {
                let p = sample_region(region, &mut rng);
                assert!(region.contains(&p), "{region} {p:?}");
                assert!(p.z() >= Z_MIN && p.z() <= Z_MAX);
            }
            for c in [
                RegionConstraint::Any,
                RegionConstraint::AUnionB,
                RegionConstraint::BIntersectC,
            ] {
                assert!(c.admits(&c.sample(&mut rng)));
            }
        }
    }

    #[test]
    fn regions_cover_the_domain() {
        let mut rng = PdRng::new(62);
        for _ in 0..2000 {
            let z = rng.uniform(1e-3, 1.0 - 1e-3);
            let alpha = rng.uniform(1e-4, z);
            assert!(!classify(alpha, z).is_empty());
        }
    }
}

//! Overlapping sampling frames built from disjoint domains.
//!
//! A domain is a non-empty subset of the `q` frames, encoded as a bit mask
//! (bit `f` set when the domain belongs to frame `f`). Units are allocated to
//! domains according to fixed domain sizes; frame membership and multiplicity
//! follow from the mask.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::rng;
use crate::sampling::strata::sorted_order;
use crate::{Error, Result};

/// Largest supported frame count.
pub const MAX_FRAMES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainSpec {
    pub mask: u32,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainAssignment {
    /// Units are shuffled, then filled into domains in list order.
    Random,
    /// Units are sorted by the design variable, then filled into domains in
    /// list order.
    SortedByDesign,
}

impl DomainAssignment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::SortedByDesign => "sorted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random" => Some(Self::Random),
            "sorted" => Some(Self::SortedByDesign),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub frames: usize,
    pub domains: Vec<DomainSpec>,
    pub assignment: DomainAssignment,
}

impl FrameLayout {
    /// Frames `0..q` laid out along `x` as a chain: domains in order
    /// `{0}, {0,1}, {1}, {1,2}, ..., {q-1}` with the given `2q - 1` sizes.
    /// Neighbouring frames share the units of the pair domain between them.
    pub fn chain(sizes: &[usize]) -> Result<Self> {
        if sizes.len() % 2 == 0 || sizes.len() > 2 * MAX_FRAMES - 1 {
            return Err(Error::InfeasibleDomains(format!("a chain needs an odd number of domain sizes, got {}", sizes.len())));
        }
        let domains = sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| {
                let f = i / 2;
                let mask = if i % 2 == 0 { 1 << f } else { 0b11 << f };
                DomainSpec { mask, size }
            })
            .collect();
        Ok(Self {
            frames: sizes.len() / 2 + 1,
            domains,
            assignment: DomainAssignment::SortedByDesign,
        })
    }

    /// Frame sizes implied by the domain sizes.
    pub fn frame_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.frames];
        for d in &self.domains {
            for (f, s) in sizes.iter_mut().enumerate() {
                if d.mask >> f & 1 == 1 {
                    *s += d.size;
                }
            }
        }
        sizes
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.frames == 0 || self.frames > MAX_FRAMES {
            return Err(Error::InfeasibleDomains(format!("frame count {} outside 1..={MAX_FRAMES}", self.frames)));
        }
        let full = (1u32 << self.frames) - 1;
        let mut seen = Vec::with_capacity(self.domains.len());
        for d in &self.domains {
            if d.mask == 0 || d.mask & !full != 0 {
                return Err(Error::InfeasibleDomains(format!(
                    "domain mask {:#b} is not a non-empty subset of {} frames",
                    d.mask, self.frames
                )));
            }
            if seen.contains(&d.mask) {
                return Err(Error::InfeasibleDomains(format!("domain mask {:#b} listed twice", d.mask)));
            }
            seen.push(d.mask);
        }
        let total: usize = self.domains.iter().map(|d| d.size).sum();
        if total != n {
            return Err(Error::InfeasibleDomains(format!("domain sizes sum to {total}, population has {n} units")));
        }
        if let Some(f) = self.frame_sizes().iter().position(|s| *s == 0) {
            return Err(Error::InfeasibleDomains(format!("frame {f} is empty")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frames {
    pub frames: usize,
    /// Frame-membership mask of every unit.
    pub masks: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Frames {
    pub fn multiplicity(&self, unit: usize) -> u32 {
        self.masks[unit].count_ones()
    }

    pub fn contains(&self, frame: usize, unit: usize) -> bool {
        self.masks[unit] >> frame & 1 == 1
    }

    /// Unit indices in frame `f`, ascending.
    pub fn members(&self, frame: usize) -> Vec<usize> {
        (0..self.masks.len()).filter(|&u| self.contains(frame, u)).collect()
    }

    /// Distinct domain masks present in the population, ascending.
    pub fn domain_masks(&self) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for &m in &self.masks {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Allocates units to domains and derives frame membership.
pub fn build_frames(x: &[f64], layout: &FrameLayout, seed: u64) -> Result<Frames> {
    layout.validate(x.len())?;
    let order = match layout.assignment {
        DomainAssignment::SortedByDesign => sorted_order(x),
        DomainAssignment::Random => {
            let mut order: Vec<usize> = (0..x.len()).collect();
            order.shuffle(&mut rng::seeded(seed));
            order
        }
    };
    let mut masks = vec![0u32; x.len()];
    let mut units = order.into_iter();
    for d in &layout.domains {
        for unit in units.by_ref().take(d.size) {
            masks[unit] = d.mask;
        }
    }
    Ok(Frames {
        frames: layout.frames,
        masks,
        sizes: layout.frame_sizes(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 37) % n) as f64).collect()
    }

    #[test]
    fn single_frame_has_unit_multiplicity() {
        let layout = FrameLayout {
            frames: 1,
            domains: vec![DomainSpec { mask: 1, size: 10 }],
            assignment: DomainAssignment::Random,
        };
        let f = build_frames(&line(10), &layout, 1).unwrap();
        assert!((0..10).all(|u| f.multiplicity(u) == 1));
        assert_eq!(f.sizes, vec![10]);
    }

    #[test]
    fn chained_layout_covers_population() {
        let layout = FrameLayout::chain(&[985, 10, 975, 10, 1020]).unwrap();
        let f = build_frames(&line(3000), &layout, 0).unwrap();
        assert_eq!(f.sizes, vec![995, 995, 1030]);
        assert!(f.masks.iter().all(|m| *m != 0));
        let total: usize = f.sizes.iter().sum();
        let mult: u32 = (0..3000).map(|u| f.multiplicity(u)).sum();
        assert_eq!(total, mult as usize);
    }

    #[test]
    fn sorted_assignment_follows_x() {
        let layout = FrameLayout::chain(&[985, 10, 975, 10, 1020]).unwrap();
        let x = line(3000);
        let f = build_frames(&x, &layout, 0).unwrap();
        let lowest = (0..3000).min_by(|a, b| x[*a].total_cmp(&x[*b])).unwrap();
        let highest = (0..3000).max_by(|a, b| x[*a].total_cmp(&x[*b])).unwrap();
        assert_eq!(f.masks[lowest], 0b001);
        assert_eq!(f.masks[highest], 0b100);
    }

    #[test]
    fn infeasible_layouts_rejected() {
        let bad_sum = FrameLayout {
            frames: 2,
            domains: vec![DomainSpec { mask: 1, size: 3 }, DomainSpec { mask: 2, size: 3 }],
            assignment: DomainAssignment::Random,
        };
        assert!(matches!(build_frames(&line(7), &bad_sum, 0), Err(Error::InfeasibleDomains(_))));
        let empty_frame = FrameLayout {
            frames: 2,
            domains: vec![DomainSpec { mask: 1, size: 7 }],
            assignment: DomainAssignment::Random,
        };
        assert!(build_frames(&line(7), &empty_frame, 0).is_err());
        let bad_mask = FrameLayout {
            frames: 2,
            domains: vec![DomainSpec { mask: 4, size: 7 }],
            assignment: DomainAssignment::Random,
        };
        assert!(build_frames(&line(7), &bad_mask, 0).is_err());
    }
}

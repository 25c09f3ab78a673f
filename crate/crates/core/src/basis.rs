//! Bosonic Fock space of N particles on L sites: enumeration, ranking, and
//! the staggered initial states used as sensing probes.
//!
//! States are ordered lexicographically on the occupation vector read from
//! site 0 upward, so `[0,0,2] < [0,1,1] < ... < [2,0,0]` for (L=3, N=2).
//! Ranking uses the combinatorial number system rather than a hash table:
//! O(L) per query with a precomputed binomial table.

use crate::error::{Error, Result};
use serde::{Serialize, Serializer};
use std::fmt;

/// Occupation-number state: bosons per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockState(pub Vec<u32>);

impl FockState {
    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn particles(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    /// Compact string form: digits when every site holds <= 9 bosons,
    /// comma-separated integers otherwise.
    pub fn to_compact_string(&self) -> String {
        if self.0.iter().all(|&n| n <= 9) {
            self.0.iter().map(|n| n.to_string()).collect()
        } else {
            self.0
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact_string())
    }
}

impl Serialize for FockState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_compact_string())
    }
}

/// Number of ways to distribute `n` bosons over `l` sites,
/// i.e. C(n+l-1, l-1), computed with overflow checks.
pub fn dimension(sites: usize, particles: usize) -> Result<u64> {
    if sites < 1 {
        return Err(Error::Domain(format!(
            "need at least one site, got L={sites}"
        )));
    }
    // C(n+k, k) with k = min(particles, sites-1); iterative multiply/divide
    // stays exact because every prefix is itself a binomial.
    let k = particles.min(sites - 1) as u64;
    let n = (particles + sites - 1) as u64;
    let mut acc: u64 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul(n - k + i)
            .ok_or(Error::DimensionOverflow { sites, particles })?
            / i;
    }
    Ok(acc)
}

/// Bijective map between occupation vectors and dense indices 0..dimension-1.
#[derive(Debug, Clone)]
pub struct BasisIndex {
    sites: usize,
    particles: usize,
    dim: usize,
    /// counts[l * (N+1) + n] = number of states of n bosons on l sites.
    counts: Vec<u64>,
}

impl BasisIndex {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        let dim = dimension(sites, particles)?;
        let dim = usize::try_from(dim).map_err(|_| Error::DimensionOverflow { sites, particles })?;

        let cols = particles + 1;
        let mut counts = vec![0u64; (sites + 1) * cols];
        counts[0] = 1; // zero sites, zero bosons
        for l in 1..=sites {
            for n in 0..=particles {
                // C(n+l-1, l-1) = C(n+l-2, l-2) + C(n+l-2, l-1)
                let mut c = counts[(l - 1) * cols + n];
                if n > 0 {
                    c = c
                        .checked_add(counts[l * cols + n - 1])
                        .ok_or(Error::DimensionOverflow { sites, particles })?;
                }
                counts[l * cols + n] = c;
            }
        }

        Ok(Self {
            sites,
            particles,
            dim,
            counts,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    fn count(&self, sites: usize, particles: usize) -> u64 {
        self.counts[sites * (self.particles + 1) + particles]
    }

    fn check_membership(&self, state: &FockState) -> Result<()> {
        if state.sites() != self.sites {
            return Err(Error::Membership {
                sites: self.sites,
                particles: self.particles,
                reason: format!("state has {} sites", state.sites()),
            });
        }
        let total = state.particles() as usize;
        if total != self.particles {
            return Err(Error::Membership {
                sites: self.sites,
                particles: self.particles,
                reason: format!("state holds {total} particles"),
            });
        }
        Ok(())
    }

    /// Lexicographic rank of `state` in 0..dimension-1.
    pub fn rank(&self, state: &FockState) -> Result<usize> {
        self.check_membership(state)?;
        let mut rank = 0u64;
        let mut remaining = self.particles;
        for (site, &n) in state.0.iter().enumerate() {
            let free = self.sites - site; // sites from here on
            // states with a smaller occupation at this site, same prefix
            rank += self.count(free, remaining) - self.count(free, remaining - n as usize);
            remaining -= n as usize;
        }
        Ok(rank as usize)
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn unrank(&self, index: usize) -> Result<FockState> {
        if index >= self.dim {
            return Err(Error::IndexRange {
                index,
                dim: self.dim,
            });
        }
        let mut occ = vec![0u32; self.sites];
        let mut rem_index = index as u64;
        let mut remaining = self.particles;
        for site in 0..self.sites {
            let free_after = self.sites - site - 1;
            if free_after == 0 {
                occ[site] = remaining as u32;
                break;
            }
            let mut n = 0usize;
            loop {
                let below = self.count(free_after, remaining - n);
                if rem_index < below {
                    break;
                }
                rem_index -= below;
                n += 1;
            }
            occ[site] = n as u32;
            remaining -= n;
        }
        Ok(FockState(occ))
    }

    /// Iterate all basis states in lexicographic (rank) order.
    pub fn states(&self) -> StateIter<'_> {
        StateIter {
            basis: self,
            next: if self.dim > 0 {
                // first state: all particles on the last site
                let mut occ = vec![0u32; self.sites];
                occ[self.sites - 1] = self.particles as u32;
                Some(occ)
            } else {
                None
            },
        }
    }
}

pub struct StateIter<'a> {
    basis: &'a BasisIndex,
    next: Option<Vec<u32>>,
}

impl Iterator for StateIter<'_> {
    type Item = FockState;

    fn next(&mut self) -> Option<FockState> {
        let current = self.next.take()?;
        let l = self.basis.sites;
        // successor: increment the rightmost site (excluding the last) that has
        // particles anywhere to its right, dumping the rest onto the last site.
        let mut succ = None;
        let mut suffix: u32 = *current.last().unwrap();
        for j in (0..l.saturating_sub(1)).rev() {
            if suffix > 0 {
                let mut next = current[..=j].to_vec();
                next[j] += 1;
                next.resize(l, 0);
                next[l - 1] = suffix - 1;
                succ = Some(next);
                break;
            }
            suffix += current[j];
        }
        self.next = succ;
        Some(FockState(current))
    }
}

/// The probe initial state: N singly occupied sites at spacing 2, centered in
/// the lattice. When the leftover space is odd the pattern shifts toward the
/// lower site index.
pub fn staggered_initial_state(sites: usize, particles: usize) -> Result<FockState> {
    if particles == 0 {
        return Ok(FockState(vec![0; sites.max(1)]));
    }
    let width = 2 * particles - 1;
    if sites < width {
        return Err(Error::Capacity { sites, particles });
    }
    let offset = (sites - width) / 2;
    let mut occ = vec![0u32; sites];
    for k in 0..particles {
        occ[offset + 2 * k] = 1;
    }
    Ok(FockState(occ))
}

//! Periodic spin-1/2 chain geometry and computational-basis encoding.
//!
//! Sites are 1-based, `1..=N`, and every site index is reduced modulo `N`
//! through [`ChainGeometry::wrap`]. A basis index `a` stores the bit `a_i` of
//! site `i` at bit position `i - 1`, so site 1 is the least significant bit.
//! The spin value of site `i` is `s_i = 2 a_i - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default largest chain handled by paths that enumerate all `2^N` basis states.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 14;

/// Largest chain length representable in a `u64` basis index.
pub const MAX_SPINS: usize = 63;

/// A periodic chain of `N` spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainGeometry {
    spins: usize,
    cap: usize,
}

impl ChainGeometry {
    pub fn new(spins: usize) -> Result<Self> {
        Self::with_cap(spins, DEFAULT_BRUTE_FORCE_CAP)
    }

    /// Like [`ChainGeometry::new`] with an explicit brute-force cap.
    pub fn with_cap(spins: usize, cap: usize) -> Result<Self> {
        if spins < 2 {
            return Err(Error::input(format!(
                "chain needs N >= 2 spins, got {spins}"
            )));
        }
        if spins > MAX_SPINS {
            return Err(Error::input(format!(
                "chain length {spins} exceeds the {MAX_SPINS}-spin basis encoding"
            )));
        }
        Ok(Self { spins, cap })
    }

    #[inline]
    pub fn spins(&self) -> usize {
        self.spins
    }

    #[inline]
    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Hilbert-space dimension `2^N`.
    #[inline]
    pub fn dim(&self) -> usize {
        1usize << self.spins
    }

    /// Fails with a resource error when `2^N` enumeration is not allowed.
    pub fn check_brute_force(&self, what: &'static str) -> Result<()> {
        if self.spins > self.cap {
            Err(Error::Resource {
                what,
                spins: self.spins,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    /// Maps any (possibly negative or > N) site label onto `1..=N`.
    #[inline]
    pub fn wrap(&self, site: i64) -> usize {
        (site - 1).rem_euclid(self.spins as i64) as usize + 1
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.spins {
            Err(Error::input(format!(
                "site {site} outside 1..={}",
                self.spins
            )))
        } else {
            Ok(())
        }
    }

    /// Bit mask of the `len` consecutive sites starting at `start`, wrapping.
    pub fn window_mask(&self, start: i64, len: usize) -> u64 {
        (0..len as i64).fold(0u64, |mask, k| mask | site_bit(self.wrap(start + k)))
    }

    /// Starting sites `j` (in `1..=N`) whose order-`m` window contains `site`.
    pub fn windows_containing(&self, site: usize, m: usize) -> Vec<usize> {
        (0..m as i64)
            .map(|k| self.wrap(site as i64 - k))
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect()
    }
}

/// Bit of the basis index that stores site `site` (1-based).
#[inline]
pub fn site_bit(site: usize) -> u64 {
    1u64 << (site - 1)
}

/// Spin value `2 a_i - 1` of site `site` in basis state `a`.
#[inline]
pub fn spin_value(a: u64, site: usize) -> i8 {
    if a & site_bit(site) != 0 {
        1
    } else {
        -1
    }
}

/// Product of spin values over the sites selected by `mask`.
///
/// Every down spin contributes a factor `-1`, so the product is the parity of
/// the zero bits under the mask.
#[inline]
pub fn mask_parity(a: u64, mask: u64) -> i8 {
    if (!a & mask).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Product `prod_{k=j}^{j+m-1} (2 a_k - 1)` with periodic wrap.
pub fn spin_product(a: u64, j: usize, m: usize, geometry: &ChainGeometry) -> Result<i8> {
    geometry.check_site(j)?;
    if m < 2 || m > geometry.spins() {
        return Err(Error::input(format!(
            "interaction order {m} outside 2..={}",
            geometry.spins()
        )));
    }
    if geometry.spins() < MAX_SPINS && a >> geometry.spins() != 0 {
        return Err(Error::input(format!(
            "basis index {a} outside 0..2^{}",
            geometry.spins()
        )));
    }
    Ok(mask_parity(a, geometry.window_mask(j as i64, m)))
}

/// Rank over GF(2) of a set of bit vectors.
pub fn gf2_rank(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::with_capacity(vectors.len());
    for &v in vectors {
        let mut x = v;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(sites: &[u8]) -> u64 {
        sites
            .iter()
            .enumerate()
            .fold(0, |a, (i, &b)| a | ((b as u64) << i))
    }

    #[test]
    fn all_down_products() {
        let g = ChainGeometry::new(5).unwrap();
        for j in 1..=5 {
            assert_eq!(spin_product(0, j, 2, &g).unwrap(), 1);
            assert_eq!(spin_product(0, j, 3, &g).unwrap(), -1);
        }
    }

    #[test]
    fn product_wraps_around() {
        let g = ChainGeometry::new(4).unwrap();
        let a = bits(&[1, 0, 0, 0]);
        assert_eq!(spin_product(a, 4, 2, &g).unwrap(), -1);
        assert_eq!(spin_product(a, 1, 2, &g).unwrap(), -1);
        assert_eq!(spin_product(a, 2, 2, &g).unwrap(), 1);
    }

    #[test]
    fn out_of_range_arguments() {
        let g = ChainGeometry::new(4).unwrap();
        assert!(spin_product(0, 0, 2, &g).is_err());
        assert!(spin_product(0, 5, 2, &g).is_err());
        assert!(spin_product(0, 1, 1, &g).is_err());
        assert!(spin_product(0, 1, 5, &g).is_err());
        assert!(spin_product(16, 1, 2, &g).is_err());
        assert!(ChainGeometry::new(1).is_err());
    }

    #[test]
    fn wrap_is_one_based() {
        let g = ChainGeometry::new(6).unwrap();
        assert_eq!(g.wrap(0), 6);
        assert_eq!(g.wrap(7), 1);
        assert_eq!(g.wrap(-5), 1);
        assert_eq!(g.windows_containing(1, 3), vec![5, 6, 1]);
    }

    #[test]
    fn cap_enforced() {
        let g = ChainGeometry::with_cap(10, 8).unwrap();
        assert!(matches!(
            g.check_brute_force("test"),
            Err(Error::Resource {
                spins: 10,
                cap: 8,
                ..
            })
        ));
    }

    #[test]
    fn rank_over_gf2() {
        assert_eq!(gf2_rank(&[0b011, 0b110, 0b101]), 2);
        assert_eq!(gf2_rank(&[0b001, 0b010, 0b100]), 3);
        assert_eq!(gf2_rank(&[0, 0]), 0);
    }
}

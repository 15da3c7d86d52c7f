//! Finite subsets of the positive integers in Greatest Element Order (GEO).
//!
//! GEO groups subsets by their greatest element, in increasing order of that
//! element. Within the group of `m` the order is fixed so runs are
//! reproducible: the singleton `{m}` first, then the remaining subsets as a
//! binary counter running down over the smaller ground elements, with the
//! most significant bit on the smallest element. For the ground set `{1,2,3}`
//! the group of 3 is `{3}, {1,2,3}, {1,3}, {2,3}`.

use std::fmt;

use crate::error::{Error, Result};

/// Ground sets larger than this are rejected; the family has `2^K - 1` members.
pub const DEFAULT_MAX_GROUND: usize = 20;

/// Nonempty, strictly increasing set of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerSubset {
    elements: Vec<u32>,
}

impl IntegerSubset {
    pub fn new(elements: Vec<u32>) -> Result<Self> {
        validate_ground(&elements)?;
        if elements.is_empty() {
            return Err(Error::InvalidSubset("subset must be nonempty".into()));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn greatest(&self) -> u32 {
        // nonempty by construction
        self.elements[self.elements.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `+1` for odd cardinality (numerator), `-1` for even (denominator).
    pub fn sign(&self) -> i64 {
        if self.elements.len() % 2 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn contains(&self, k: u32) -> bool {
        self.elements.binary_search(&k).is_ok()
    }
}

impl fmt::Display for IntegerSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Checks that a list is strictly increasing and positive.
pub(crate) fn validate_ground(elements: &[u32]) -> Result<()> {
    if elements.first() == Some(&0) {
        return Err(Error::InvalidSubset("elements must be positive".into()));
    }
    if elements.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSubset(format!(
            "{elements:?} is not strictly increasing"
        )));
    }
    Ok(())
}

/// Lazy GEO stream over the nonempty subsets of a ground set.
#[derive(Debug, Clone)]
pub struct GeoEnumeration {
    ground: Vec<u32>,
    // index of the current greatest element in `ground`
    group: usize,
    // 0 = singleton, then counts down from 2^group - 1 to 1
    mask: u64,
    started_group: bool,
}

impl GeoEnumeration {
    pub fn ground_set(&self) -> &[u32] {
        &self.ground
    }
}

impl Iterator for GeoEnumeration {
    type Item = IntegerSubset;

    fn next(&mut self) -> Option<IntegerSubset> {
        if self.group >= self.ground.len() {
            return None;
        }
        let m = self.ground[self.group];
        let smaller = self.group;
        if !self.started_group {
            self.started_group = true;
            self.mask = (1u64 << smaller) - 1;
            return Some(IntegerSubset { elements: vec![m] });
        }
        if self.mask == 0 {
            self.group += 1;
            self.started_group = false;
            return self.next();
        }
        let mut elements: Vec<u32> = (0..smaller)
            .filter(|&i| self.mask & (1u64 << (smaller - 1 - i)) != 0)
            .map(|i| self.ground[i])
            .collect();
        elements.push(m);
        self.mask -= 1;
        Some(IntegerSubset { elements })
    }
}

/// All nonempty subsets of `ground_set` in GEO.
pub fn enumerate_geo(ground_set: &[u32]) -> Result<GeoEnumeration> {
    validate_ground(ground_set)?;
    if ground_set.len() > DEFAULT_MAX_GROUND {
        return Err(Error::InvalidSubset(format!(
            "ground set of {} elements exceeds the limit of {DEFAULT_MAX_GROUND}",
            ground_set.len()
        )));
    }
    Ok(GeoEnumeration {
        ground: ground_set.to_vec(),
        group: 0,
        mask: 0,
        started_group: false,
    })
}

/// The GEO family grouped by greatest element: `[(m, F*_{max=m}), ...]`.
pub fn geo_groups(ground_set: &[u32]) -> Result<Vec<(u32, Vec<IntegerSubset>)>> {
    let mut groups: Vec<(u32, Vec<IntegerSubset>)> = Vec::new();
    for subset in enumerate_geo(ground_set)? {
        match groups.last_mut() {
            Some((m, members)) if *m == subset.greatest() => members.push(subset),
            _ => groups.push((subset.greatest(), vec![subset])),
        }
    }
    Ok(groups)
}

/// Number of compositions of `n` into `parts` positive parts, `C(n-1, parts-1)`.
///
/// Saturates at `u128::MAX`.
pub fn composition_count(n: u64, parts: u64) -> u128 {
    if parts == 0 || n < parts {
        return 0;
    }
    let top = (n - 1) as u128;
    let k = (parts - 1).min(n - parts) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (top - i) / (i + 1) stays integral at every step
        match c.checked_mul(top - i) {
            Some(v) => c = v / (i + 1),
            None => return u128::MAX,
        }
    }
    c
}

/// `C(n-1, parts-1)` as a float, stepped from `n - 1`; used as a product exponent.
pub(crate) fn composition_weight_next(previous: f64, n: u64, parts: u64) -> f64 {
    // C(n, p-1) = C(n-1, p-1) * n / (n - p + 1)
    previous * n as f64 / (n + 1 - parts) as f64
}

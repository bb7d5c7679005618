//! Hyperelliptic theta characteristics: the base characteristics `η_k`,
//! subset sums `η_S`, and the fundamental systems `η^σ_k`.
//!
//! Everything here is exact integer arithmetic on doubled entries.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::characteristic::{Characteristic, Parity};
use crate::error::{Error, Result};

/// A subset of `{1, …, 2g+2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    genus: usize,
    members: BTreeSet<usize>,
}

impl IndexSet {
    pub fn new(genus: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        if genus == 0 {
            return Err(Error::InvalidIndexSet("genus must be positive".into()));
        }
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&m| m == 0 || m > 2 * genus + 2) {
            return Err(Error::InvalidIndexSet(format!(
                "index {bad} outside 1..={}",
                2 * genus + 2
            )));
        }
        Ok(Self { genus, members })
    }

    pub fn empty(genus: usize) -> Self {
        Self {
            genus,
            members: BTreeSet::new(),
        }
    }

    /// `U = {1, 3, …, 2g+1}`.
    pub fn odd_indices(genus: usize) -> Self {
        Self {
            genus,
            members: (1..=2 * genus + 1).step_by(2).collect(),
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Symmetric difference `S ∘ T`.
    pub fn sym_diff(&self, other: &IndexSet) -> Result<IndexSet> {
        if self.genus != other.genus {
            return Err(Error::InvalidIndexSet(format!(
                "genus mismatch: {} vs {}",
                self.genus, other.genus
            )));
        }
        Ok(IndexSet {
            genus: self.genus,
            members: self
                .members
                .symmetric_difference(&other.members)
                .copied()
                .collect(),
        })
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A permutation of `{1, …, 2g+2}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidPermutation(format!(
                "need 2g+2 >= 4 symbols, got {n}"
            )));
        }
        let mut seen = vec![false; n + 1];
        for &i in &images {
            if i == 0 || i > n || seen[i] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 1..={n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(genus: usize) -> Self {
        Self((1..=2 * genus + 2).collect())
    }

    pub fn genus(&self) -> usize {
        self.0.len() / 2 - 1
    }

    /// `σ(k)` for `1 ≤ k ≤ 2g+2`.
    pub fn apply(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// Swaps the images of positions `i` and `j` (1-based).
    pub fn swap_positions(&self, i: usize, j: usize) -> Self {
        let mut v = self.0.clone();
        v.swap(i - 1, j - 1);
        Self(v)
    }

    /// Every permutation of `2g+2` symbols in lexicographic order.
    pub fn all(genus: usize) -> Vec<Permutation> {
        let n = 2 * genus + 2;
        let mut out = Vec::new();
        let mut current: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation(current.clone()));
            // next lexicographic permutation
            let Some(i) = (0..n - 1).rev().find(|&i| current[i] < current[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", items.join(","))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("cannot parse {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(images)
    }
}

impl serde::Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `η_k` for `1 ≤ k ≤ 2g+2`.
///
/// `η_{2k−1}` has top row `½e_k` (zero for `k = g+1`) and bottom row with
/// `k−1` leading halves; `η_{2k}` has top row `½e_k` and `k` leading halves;
/// `η_{2g+2} = 0`.
pub fn base_characteristic(genus: usize, k: usize) -> Result<Characteristic> {
    if genus == 0 || k == 0 || k > 2 * genus + 2 {
        return Err(Error::InvalidIndexSet(format!(
            "base characteristic index {k} outside 1..={}",
            2 * genus + 2
        )));
    }
    let mut top = vec![0i64; genus];
    let mut bottom = vec![0i64; genus];
    if k == 2 * genus + 2 {
        return Characteristic::from_doubled(top, bottom);
    }
    let half_index = k.div_ceil(2);
    let leading = if k % 2 == 1 { half_index - 1 } else { half_index };
    if half_index <= genus {
        top[half_index - 1] = 1;
    }
    for b in bottom.iter_mut().take(leading) {
        *b = 1;
    }
    Characteristic::from_doubled(top, bottom)
}

/// `η_S = Σ_{k ∈ S∖{2g+2}} η_k (mod 1)`, canonical.
pub fn characteristic_of_set(set: &IndexSet) -> Characteristic {
    let g = set.genus();
    let mut acc = Characteristic::zero(g);
    for &k in set.members() {
        if k == 2 * g + 2 {
            continue;
        }
        let eta = base_characteristic(g, k).expect("index validated by IndexSet");
        acc = acc.add_mod1(&eta).expect("same genus");
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalSystem {
    pub sigma: Permutation,
    /// `η^σ_1, …, η^σ_{2g+2}`.
    pub chars: Vec<Characteristic>,
}

impl FundamentalSystem {
    pub fn genus(&self) -> usize {
        self.chars.len() / 2 - 1
    }

    pub fn odd(&self) -> &[Characteristic] {
        &self.chars[..self.genus()]
    }

    pub fn even(&self) -> &[Characteristic] {
        &self.chars[self.genus()..]
    }
}

/// `T_σ = {σ(1), …, σ(g)}`.
pub fn t_sigma(sigma: &Permutation) -> IndexSet {
    let g = sigma.genus();
    IndexSet::new(g, (1..=g).map(|k| sigma.apply(k))).expect("permutation images are in range")
}

/// `η^σ_k = η_{T_σ ∘ {σ(k)} ∘ U}` for `k = 1, …, 2g+2`.
pub fn fundamental_system(sigma: &Permutation) -> FundamentalSystem {
    let g = sigma.genus();
    let t = t_sigma(sigma);
    let u = IndexSet::odd_indices(g);
    let chars = (1..=2 * g + 2)
        .map(|k| {
            let single = IndexSet::new(g, [sigma.apply(k)]).expect("in range");
            let set = t.sym_diff(&single).and_then(|s| s.sym_diff(&u)).expect("same genus");
            characteristic_of_set(&set)
        })
        .collect();
    FundamentalSystem {
        sigma: sigma.clone(),
        chars,
    }
}

/// First `g` odd, last `g+2` even, canonical forms pairwise distinct.
pub fn is_fundamental(fs: &FundamentalSystem) -> bool {
    let n = fs.chars.len();
    if n < 4 || !n.is_multiple_of(2) {
        return false;
    }
    let g = n / 2 - 1;
    let parity_ok = fs.chars.iter().enumerate().all(|(i, ch)| {
        ch.genus() == g
            && ch.parity() == if i < g { Parity::Odd } else { Parity::Even }
    });
    let canon: BTreeSet<Characteristic> = fs.chars.iter().map(|c| c.reduce().0).collect();
    parity_ok && canon.len() == n
}

//! Golomb rulers (sets with pairwise distinct differences) and their modular
//! variant, together with the level schedule used by the encoder.
//!
//! The set type is generic over the integer type; [`crate::Ruler`] fixes it
//! to `u64`, which is wide enough for every schedule the reduction builds.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use num_traits::{checked_pow, PrimInt};

use crate::error::{Error, Result};

/// Integer types a [`DifferenceSet`] can be built over.
pub trait RulerInt: PrimInt + Hash + fmt::Debug + fmt::Display {}

impl<T: PrimInt + Hash + fmt::Debug + fmt::Display> RulerInt for T {}

/// A finite set of nonnegative integers, optionally paired with a modulus.
///
/// Elements are kept sorted and distinct. When a modulus is present it is
/// strictly larger than every element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DifferenceSet<T> {
    elements: Vec<T>,
    modulus: Option<T>,
}

impl<T: RulerInt> DifferenceSet<T> {
    pub fn new(mut elements: Vec<T>, modulus: Option<T>) -> Result<Self> {
        elements.sort_unstable();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("difference set elements must be distinct"));
        }
        if elements.first().is_some_and(|&e| e < T::zero()) {
            return Err(Error::invalid(
                "difference set elements must be nonnegative",
            ));
        }
        if let Some(m) = modulus {
            if m <= T::zero() {
                return Err(Error::invalid("modulus must be positive"));
            }
            if elements.last().is_some_and(|&e| m <= e) {
                return Err(Error::invalid(format!(
                    "modulus {m} must exceed the largest element"
                )));
            }
        }
        Ok(Self { elements, modulus })
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn modulus(&self) -> Option<T> {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Distance between the extreme marks (zero for fewer than two marks).
    pub fn length(&self) -> T {
        match (self.elements.first(), self.elements.last()) {
            (Some(&lo), Some(&hi)) => hi - lo,
            _ => T::zero(),
        }
    }

    /// Translate so that the smallest element is zero. The modulus is dropped,
    /// since a shifted set is no longer tied to it.
    pub fn normalized(&self) -> Self {
        let lo = self.elements.first().copied().unwrap_or_else(T::zero);
        Self {
            elements: self.elements.iter().map(|&e| e - lo).collect(),
            modulus: None,
        }
    }

    pub fn with_modulus(&self, modulus: T) -> Result<Self> {
        Self::new(self.elements.clone(), Some(modulus))
    }
}

impl<T: RulerInt> fmt::Display for DifferenceSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        if let Some(m) = self.modulus {
            write!(f, " mod={m}")?;
        }
        Ok(())
    }
}

impl<T: RulerInt> std::str::FromStr for DifferenceSet<T> {
    type Err = Error;

    /// Parses `a,b,c` with an optional ` mod=<m>` suffix.
    fn from_str(s: &str) -> Result<Self> {
        let mut modulus = None;
        let mut elements = Vec::new();
        for token in s.split(|c: char| c == ',' || c.is_whitespace()) {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            if let Some(m) = token.strip_prefix("mod=") {
                modulus = Some(parse_int::<T>(m)?);
            } else {
                elements.push(parse_int::<T>(token)?);
            }
        }
        Self::new(elements, modulus)
    }
}

fn parse_int<T: RulerInt>(token: &str) -> Result<T> {
    T::from_str_radix(token, 10)
        .map_err(|_| Error::parse(1, format!("`{token}` is not an integer")))
}

fn pow2<T: RulerInt>(exp: u32) -> Result<T> {
    let two = T::one() + T::one();
    checked_pow(two, exp as usize)
        .ok_or_else(|| Error::invalid(format!("2^{exp} overflows the integer type")))
}

/// `{2^0, 2^1, ..., 2^(n-1)}`, a Golomb ruler for every `n`.
pub fn powers_ruler<T: RulerInt>(n: u32) -> Result<DifferenceSet<T>> {
    if n == 0 {
        return Err(Error::invalid("powers_ruler needs n >= 1"));
    }
    let elements = (0..n).map(pow2).collect::<Result<Vec<T>>>()?;
    DifferenceSet::new(elements, None)
}

/// `{2^2, ..., 2^n}` with modulus `2^n + 2`, a modular Golomb ruler.
pub fn modular_powers_ruler<T: RulerInt>(n: u32) -> Result<DifferenceSet<T>> {
    if n < 2 {
        return Err(Error::invalid("modular_powers_ruler needs n >= 2"));
    }
    let elements = (2..=n).map(pow2).collect::<Result<Vec<T>>>()?;
    let two = T::one() + T::one();
    let modulus = pow2::<T>(n)?
        .checked_add(&two)
        .ok_or_else(|| Error::invalid("modulus overflows the integer type"))?;
    DifferenceSet::new(elements, Some(modulus))
}

/// True iff the absolute differences of all unordered pairs are distinct.
pub fn is_golomb<T: RulerInt>(s: &DifferenceSet<T>) -> bool {
    let e = s.elements();
    let mut seen = HashSet::with_capacity(e.len() * e.len() / 2);
    for (i, &a) in e.iter().enumerate() {
        for &b in &e[i + 1..] {
            if !seen.insert(b - a) {
                return false;
            }
        }
    }
    true
}

/// True iff signed differences of distinct unordered pairs never agree modulo
/// the set's modulus.
pub fn is_modular_golomb<T: RulerInt>(s: &DifferenceSet<T>) -> Result<bool> {
    let m = s
        .modulus()
        .ok_or_else(|| Error::invalid("modular Golomb check needs a modulus"))?;
    let e = s.elements();
    // residue -> index of the unordered pair that produced it
    let mut owner: HashMap<T, usize> = HashMap::new();
    let mut pair = 0usize;
    for (i, &a) in e.iter().enumerate() {
        for &b in &e[i + 1..] {
            let d = b - a;
            for r in [d, m - d] {
                match owner.insert(r, pair) {
                    Some(prev) if prev != pair => return Ok(false),
                    _ => {}
                }
            }
            pair += 1;
        }
    }
    Ok(true)
}

/// Levels `{2^k : 2 <= k <= 3n+1}` paired with the total level count
/// `2^(3n+1) + 2` as modulus. Tile `i` (1-based) owns `2^(3i-1)`, `2^(3i)`
/// and `2^(3i+1)`.
pub fn encoder_levels<T: RulerInt>(n_tiles: u32) -> Result<(DifferenceSet<T>, T)> {
    if n_tiles == 0 {
        return Err(Error::invalid("encoder_levels needs at least one tile"));
    }
    let top = n_tiles
        .checked_mul(3)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| Error::invalid("tile count too large"))?;
    let set = modular_powers_ruler::<T>(top)?;
    let total = set.modulus().expect("modular ruler carries a modulus");
    Ok((set, total))
}

/// Shortest Golomb ruler with `order` marks and length at most
/// `length_budget`, normalized to start at zero. Among rulers of minimal
/// length the lexicographically least mark sequence is returned.
pub fn search_min_ruler<T: RulerInt>(
    order: usize,
    length_budget: usize,
) -> Option<DifferenceSet<T>> {
    if order == 0 {
        return None;
    }
    if order == 1 {
        return DifferenceSet::new(vec![T::zero()], None).ok();
    }
    for length in order - 1..=length_budget {
        let mut marks = vec![0usize];
        let mut used = vec![false; length + 1];
        if extend_ruler(&mut marks, &mut used, order, length) {
            let elements = marks
                .iter()
                .map(|&m| T::from(m))
                .collect::<Option<Vec<T>>>()?;
            return DifferenceSet::new(elements, None).ok();
        }
    }
    None
}

// Depth-first extension in increasing mark order; the last mark is forced to
// `length`, so the first completion found is lexicographically least.
fn extend_ruler(marks: &mut Vec<usize>, used: &mut [bool], order: usize, length: usize) -> bool {
    let placed = marks.len();
    if placed == order {
        return true;
    }
    let last = *marks.last().expect("ruler starts with 0");
    let remaining = order - placed;
    let candidates: Box<dyn Iterator<Item = usize>> = if remaining == 1 {
        Box::new(std::iter::once(length))
    } else {
        // leave room for the remaining marks, the final one sitting at `length`
        Box::new(last + 1..=length.saturating_sub(remaining - 1))
    };
    for next in candidates {
        if next <= last {
            continue;
        }
        let diffs: Vec<usize> = marks.iter().map(|&m| next - m).collect();
        let mut fresh = true;
        for (k, &d) in diffs.iter().enumerate() {
            if used[d] || diffs[..k].contains(&d) {
                fresh = false;
                break;
            }
        }
        if !fresh {
            continue;
        }
        for &d in &diffs {
            used[d] = true;
        }
        marks.push(next);
        if extend_ruler(marks, used, order, length) {
            return true;
        }
        marks.pop();
        for &d in &diffs {
            used[d] = false;
        }
    }
    false
}

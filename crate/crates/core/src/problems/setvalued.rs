use serde::{Deserialize, Serialize};

use crate::numerics::Scalar;

/// One coordinate of a product set-valued map.
///
/// * `F1(x)`: `[0, ∞)` at `x = 0`, `{0}` for `x > 0`, empty for `x < 0`.
/// * `F2(x)`: `{-1}` for `x < 0`, `[-1, 1]` at `x = 0`, `{1}` for `x > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BranchKind {
    ZeroMap,
    F1,
    F2,
}

impl BranchKind {
    /// `dist(-fi, F_i(xi))`, or `None` when `F_i(xi)` is empty.
    ///
    /// Zero tests on `xi` are exact.
    pub fn distance(self, fi: &Scalar, xi: &Scalar) -> Option<Scalar> {
        let zero = || Scalar::from_float(rug::Float::new(fi.prec()));
        let one = || Scalar::from_float(rug::Float::with_val(fi.prec(), 1));
        match self {
            BranchKind::ZeroMap => Some(fi.abs()),
            BranchKind::F1 => match xi.cmp0() {
                Some(std::cmp::Ordering::Greater) => Some(fi.abs()),
                Some(std::cmp::Ordering::Equal) => Some(fi.max(&zero())),
                _ => None,
            },
            BranchKind::F2 => match xi.cmp0() {
                Some(std::cmp::Ordering::Less) => Some((fi - one()).abs()),
                Some(std::cmp::Ordering::Greater) => Some((fi + one()).abs()),
                Some(std::cmp::Ordering::Equal) => Some((fi.abs() - one()).max(&zero())),
                None => None,
            },
        }
    }
}

/// Coordinate-wise product of [`BranchKind`]s.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetValuedMap {
    coords: Vec<BranchKind>,
}

impl SetValuedMap {
    pub fn new(coords: Vec<BranchKind>) -> Self {
        SetValuedMap { coords }
    }

    pub fn zero(dim: usize) -> Self {
        SetValuedMap::new(vec![BranchKind::ZeroMap; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BranchKind] {
        &self.coords
    }
}

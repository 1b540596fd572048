//! The disjoint covering of the sup-norm space by the unit ball and
//! lidless boxes, with exact point location.
//!
//! For an axis `ν` and level `n ≥ 0` the positive cell is
//!
//! ```text
//! |t(μ)| ≤ 2^n      for μ < ν
//! 2^n < t(ν) ≤ 2^(n+1)
//! |t(μ)| ≤ 2^(n+1)  for μ > ν
//! ```
//!
//! and the negative cell is its reflection through the origin. Together with
//! the closed unit ball these sets are pairwise disjoint and cover the space.
//! Members are identified symbolically by [`SigmaId`] and never materialized.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{sup_norm, BoxSpec, IntervalSpec, OpenSide, Point};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: &Scalar) -> Sign {
        if x.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// `x` or `-x`.
    pub fn apply(self, x: &Scalar) -> Scalar {
        match self {
            Sign::Plus => x.clone(),
            Sign::Minus => -x,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "sign must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// Identity of a member of the covering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SigmaId {
    Ball,
    Cell { sign: Sign, axis: usize, level: u32 },
}

impl SigmaId {
    pub fn cell(sign: Sign, axis: usize, level: u32) -> Self {
        SigmaId::Cell { sign, axis, level }
    }

    pub fn with_sign_flipped(self) -> Self {
        match self {
            SigmaId::Ball => SigmaId::Ball,
            SigmaId::Cell { sign, axis, level } => SigmaId::Cell {
                sign: sign.flipped(),
                axis,
                level,
            },
        }
    }

    pub(crate) fn check(&self, dim: usize) -> Result<()> {
        if let SigmaId::Cell { axis, .. } = *self {
            if axis == 0 || axis > dim {
                return Err(Error::InvalidAxis { axis, dim });
            }
        }
        Ok(())
    }
}

impl fmt::Display for SigmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaId::Ball => write!(f, "ball"),
            SigmaId::Cell { sign, axis, level } => {
                write!(f, "cell({},{axis},{level})", sign.symbol())
            }
        }
    }
}

/// Positive cell at `(axis, level)` with the lid on the upper side.
pub(crate) fn positive_cell(axis: usize, level: u32, dim: usize) -> BoxSpec {
    let inner = Scalar::pow2(level as i64);
    let outer = Scalar::pow2(level as i64 + 1);
    let axes = (1..=dim)
        .map(|mu| match mu.cmp(&axis) {
            std::cmp::Ordering::Less => IntervalSpec::symmetric(inner.clone()),
            std::cmp::Ordering::Equal => {
                IntervalSpec::new_unchecked(inner.clone(), outer.clone(), OpenSide::Lower)
            }
            std::cmp::Ordering::Greater => IntervalSpec::symmetric(outer.clone()),
        })
        .collect();
    BoxSpec::from_axes_unchecked(axes)
}

/// The set a [`SigmaId`] stands for, in dimension `dim`.
pub fn sigma_spec(id: SigmaId, dim: usize) -> Result<BoxSpec> {
    id.check(dim)?;
    Ok(match id {
        SigmaId::Ball => BoxSpec::cube(dim, Scalar::one()),
        SigmaId::Cell { sign, axis, level } => {
            let cell = positive_cell(axis, level, dim);
            match sign {
                Sign::Plus => cell,
                Sign::Minus => cell.reflected(),
            }
        }
    })
}

/// The unique member of the covering containing `p`.
pub fn locate_sigma(p: &Point) -> SigmaId {
    let norm = sup_norm(p);
    if norm <= Scalar::one() {
        return SigmaId::Ball;
    }
    let (k, exact) = norm
        .floor_log2()
        .expect("norm above 1 is positive");
    // On an exact power of two the point sits on the lid of the level below.
    let level = if exact { k - 1 } else { k };
    let threshold = Scalar::pow2(level);
    let (index, value) = p
        .coords()
        .iter()
        .enumerate()
        .find(|(_, c)| c.abs() > threshold)
        .expect("some coordinate attains the norm");
    SigmaId::Cell {
        sign: Sign::of(value),
        axis: index + 1,
        level: level as u32,
    }
}

/// Members of the covering that meet `window`, ball first, then by level,
/// axis and sign.
pub fn sigma_in_window(window: &BoxSpec) -> Vec<SigmaId> {
    let dim = window.dim();
    let radius = window.norm_radius();
    let mut out = Vec::new();
    if window.intersects_unchecked(&BoxSpec::cube(dim, Scalar::one())) {
        out.push(SigmaId::Ball);
    }
    // A level-n cell only holds points of norm above 2^n. Each cell is a
    // product, so it meets the window iff every axis does.
    let mut level = 0u32;
    while Scalar::pow2(level as i64) < radius {
        let inner = Scalar::pow2(level as i64);
        let outer = Scalar::pow2(level as i64 + 1);
        let inner_band = IntervalSpec::symmetric(inner.clone());
        let outer_band = IntervalSpec::symmetric(outer.clone());
        let lid = IntervalSpec::new_unchecked(inner, outer, OpenSide::Lower);
        let meets = |band: &IntervalSpec| -> Vec<bool> {
            window.axes().iter().map(|a| a.intersects(band)).collect()
        };
        let in_inner = meets(&inner_band);
        let in_outer = meets(&outer_band);
        let in_plus = meets(&lid);
        let in_minus = meets(&lid.reflected());
        for axis in 1..=dim {
            let before = in_inner[..axis - 1].iter().all(|&b| b);
            let after = in_outer[axis..].iter().all(|&b| b);
            if before && after {
                if in_plus[axis - 1] {
                    out.push(SigmaId::cell(Sign::Plus, axis, level));
                }
                if in_minus[axis - 1] {
                    out.push(SigmaId::cell(Sign::Minus, axis, level));
                }
            }
        }
        level += 1;
    }
    out
}

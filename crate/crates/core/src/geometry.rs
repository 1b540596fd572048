//! Points and axis-aligned boxes with exact, side-aware membership.
//!
//! Axes are numbered from 1, matching the well-ordered index set of the
//! construction. A [`BoxSpec`] may have at most one half-open axis; with one
//! it is a *lidless box*, otherwise a closed box.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of the finite-dimensional sup-norm space.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<Scalar>);

impl Point {
    pub fn new(coords: Vec<Scalar>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![Scalar::zero(); dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinate at 1-based `axis`.
    pub fn coord(&self, axis: usize) -> &Scalar {
        &self.0[axis - 1]
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Scalar> {
        self.0
    }

    pub fn scaled(&self, factor: &Scalar) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    /// Comma-separated rationals, as typed on the command line.
    pub fn parse_list(text: &str) -> Result<Self> {
        let coords = text
            .split(',')
            .map(|s| s.parse())
            .collect::<Result<Vec<Scalar>>>()?;
        Point::new(coords)
    }
}

impl std::ops::Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The sup norm `max |p(ν)|`.
pub fn sup_norm(p: &Point) -> Scalar {
    p.coords()
        .iter()
        .map(Scalar::abs)
        .max()
        .unwrap_or_else(Scalar::zero)
}

/// Which endpoint of an interval, if any, is excluded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpenSide {
    None,
    Lower,
    Upper,
}

impl OpenSide {
    fn reflected(self) -> Self {
        match self {
            OpenSide::None => OpenSide::None,
            OpenSide::Lower => OpenSide::Upper,
            OpenSide::Upper => OpenSide::Lower,
        }
    }
}

/// A non-trivial interval, closed unless `open_side` says otherwise.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalSpec {
    lower: Scalar,
    upper: Scalar,
    open_side: OpenSide,
}

impl IntervalSpec {
    pub fn new(lower: Scalar, upper: Scalar, open_side: OpenSide) -> Result<Self> {
        if lower >= upper {
            return Err(Error::DegenerateInterval {
                lower: lower.to_string(),
                upper: upper.to_string(),
            });
        }
        Ok(IntervalSpec {
            lower,
            upper,
            open_side,
        })
    }

    pub fn closed(lower: Scalar, upper: Scalar) -> Result<Self> {
        Self::new(lower, upper, OpenSide::None)
    }

    /// `[-r, r]` for `r > 0`.
    pub(crate) fn symmetric(radius: Scalar) -> Self {
        debug_assert!(radius.is_positive());
        IntervalSpec {
            lower: -&radius,
            upper: radius,
            open_side: OpenSide::None,
        }
    }

    pub(crate) fn new_unchecked(lower: Scalar, upper: Scalar, open_side: OpenSide) -> Self {
        debug_assert!(lower < upper);
        IntervalSpec {
            lower,
            upper,
            open_side,
        }
    }

    pub fn lower(&self) -> &Scalar {
        &self.lower
    }

    pub fn upper(&self) -> &Scalar {
        &self.upper
    }

    pub fn open_side(&self) -> OpenSide {
        self.open_side
    }

    pub fn includes_lower(&self) -> bool {
        self.open_side != OpenSide::Lower
    }

    pub fn includes_upper(&self) -> bool {
        self.open_side != OpenSide::Upper
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let above = if self.includes_lower() {
            *x >= self.lower
        } else {
            *x > self.lower
        };
        above
            && if self.includes_upper() {
                *x <= self.upper
            } else {
                *x < self.upper
            }
    }

    pub fn interior_contains(&self, x: &Scalar) -> bool {
        *x > self.lower && *x < self.upper
    }

    /// Whether the two intervals share a point, honoring open sides.
    pub fn intersects(&self, other: &IntervalSpec) -> bool {
        let (lo, lo_included) = match self.lower.cmp(&other.lower) {
            std::cmp::Ordering::Greater => (&self.lower, self.includes_lower()),
            std::cmp::Ordering::Less => (&other.lower, other.includes_lower()),
            std::cmp::Ordering::Equal => {
                (&self.lower, self.includes_lower() && other.includes_lower())
            }
        };
        let (hi, hi_included) = match self.upper.cmp(&other.upper) {
            std::cmp::Ordering::Less => (&self.upper, self.includes_upper()),
            std::cmp::Ordering::Greater => (&other.upper, other.includes_upper()),
            std::cmp::Ordering::Equal => {
                (&self.upper, self.includes_upper() && other.includes_upper())
            }
        };
        match lo.cmp(hi) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => lo_included && hi_included,
            std::cmp::Ordering::Greater => false,
        }
    }

    /// Whether the open intervals `(lower, upper)` overlap.
    pub fn interiors_overlap(&self, other: &IntervalSpec) -> bool {
        self.lower < other.upper && other.lower < self.upper
    }

    /// Image under `x ↦ -x`.
    pub fn reflected(&self) -> Self {
        IntervalSpec {
            lower: -&self.upper,
            upper: -&self.lower,
            open_side: self.open_side.reflected(),
        }
    }

    pub fn closure(&self) -> Self {
        IntervalSpec {
            open_side: OpenSide::None,
            ..self.clone()
        }
    }

    pub fn length(&self) -> Scalar {
        &self.upper - &self.lower
    }
}

impl fmt::Debug for IntervalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = match self.open_side {
            OpenSide::None => ('[', ']'),
            OpenSide::Lower => ('(', ']'),
            OpenSide::Upper => ('[', ')'),
        };
        write!(f, "{l}{}, {}{r}", self.lower, self.upper)
    }
}

impl fmt::Display for IntervalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Product of one [`IntervalSpec`] per axis.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BoxSpec {
    axes: Vec<IntervalSpec>,
}

impl BoxSpec {
    pub fn new(axes: Vec<IntervalSpec>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let open = axes
            .iter()
            .filter(|a| a.open_side != OpenSide::None)
            .count();
        if open > 1 {
            return Err(Error::TooManyOpenSides(open));
        }
        Ok(BoxSpec { axes })
    }

    /// Closed box from `(lower, upper)` pairs.
    pub fn closed(bounds: Vec<(Scalar, Scalar)>) -> Result<Self> {
        let axes = bounds
            .into_iter()
            .map(|(l, u)| IntervalSpec::closed(l, u))
            .collect::<Result<Vec<_>>>()?;
        BoxSpec::new(axes)
    }

    /// `[-r, r]^dim`.
    pub fn cube(dim: usize, radius: Scalar) -> Self {
        BoxSpec {
            axes: vec![IntervalSpec::symmetric(radius); dim],
        }
    }

    /// Parses `l1,u1,l2,u2,...` into a closed box.
    pub fn parse_window(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| s.parse())
            .collect::<Result<Vec<Scalar>>>()?;
        if values.is_empty() || values.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "window needs an even number of bounds, got {}",
                values.len()
            )));
        }
        let bounds = values
            .chunks(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        BoxSpec::closed(bounds)
    }

    pub(crate) fn from_axes_unchecked(axes: Vec<IntervalSpec>) -> Self {
        BoxSpec { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Interval at 1-based `axis`.
    pub fn axis(&self, axis: usize) -> &IntervalSpec {
        &self.axes[axis - 1]
    }

    pub fn axes(&self) -> &[IntervalSpec] {
        &self.axes
    }

    pub fn is_closed(&self) -> bool {
        self.axes.iter().all(|a| a.open_side == OpenSide::None)
    }

    /// The half-open axis of a lidless box.
    pub fn open_axis(&self) -> Option<usize> {
        self.axes
            .iter()
            .position(|a| a.open_side != OpenSide::None)
            .map(|i| i + 1)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        self.check_dim(p.dim())?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Point) -> bool {
        self.axes
            .iter()
            .zip(p.coords())
            .all(|(a, x)| a.contains(x))
    }

    pub fn interior_contains(&self, p: &Point) -> Result<bool> {
        self.check_dim(p.dim())?;
        Ok(self
            .axes
            .iter()
            .zip(p.coords())
            .all(|(a, x)| a.interior_contains(x)))
    }

    /// True iff the open boxes do not meet, i.e. some axis has
    /// non-overlapping open intervals.
    pub fn interiors_disjoint(&self, other: &BoxSpec) -> Result<bool> {
        self.check_dim(other.dim())?;
        Ok(self
            .axes
            .iter()
            .zip(&other.axes)
            .any(|(a, b)| !a.interiors_overlap(b)))
    }

    /// Whether the two sets (with their actual open sides) share a point.
    pub fn intersects(&self, other: &BoxSpec) -> Result<bool> {
        self.check_dim(other.dim())?;
        Ok(self.intersects_unchecked(other))
    }

    pub(crate) fn intersects_unchecked(&self, other: &BoxSpec) -> bool {
        self.axes
            .iter()
            .zip(&other.axes)
            .all(|(a, b)| a.intersects(b))
    }

    /// Image under `t ↦ -t`.
    pub fn reflected(&self) -> Self {
        BoxSpec {
            axes: self.axes.iter().map(IntervalSpec::reflected).collect(),
        }
    }

    pub fn closure(&self) -> Self {
        BoxSpec {
            axes: self.axes.iter().map(IntervalSpec::closure).collect(),
        }
    }

    /// Largest `|t(ν)|` over the closure.
    pub fn norm_radius(&self) -> Scalar {
        self.axes
            .iter()
            .map(|a| a.lower.abs().max(a.upper.abs()))
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    /// Sup-norm diameter of the closure (longest side).
    pub fn diameter(&self) -> Scalar {
        self.axes
            .iter()
            .map(IntervalSpec::length)
            .max()
            .unwrap_or_else(Scalar::zero)
    }
}

impl fmt::Debug for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.axes.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn pt(coords: &[&str]) -> Point {
        Point::new(coords.iter().map(|c| q(c)).collect()).unwrap()
    }

    fn closed(bounds: &[(&str, &str)]) -> BoxSpec {
        BoxSpec::closed(bounds.iter().map(|(l, u)| (q(l), q(u))).collect()).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&pt(&["0", "0"])), q("0"));
        assert_eq!(sup_norm(&pt(&["1/2", "-3/10"])), q("1/2"));
        assert_eq!(sup_norm(&pt(&["1", "-2"])), q("2"));
    }

    #[test]
    fn contains_boundary_and_center() {
        let unit = closed(&[("0", "1"), ("0", "1")]);
        assert!(unit.contains(&pt(&["1", "1"])).unwrap());
        assert!(!unit.interior_contains(&pt(&["1", "1"])).unwrap());
        assert!(unit.contains(&pt(&["1/2", "1/2"])).unwrap());
        assert!(unit.interior_contains(&pt(&["1/2", "1/2"])).unwrap());
    }

    #[test]
    fn left_open_boundary_is_excluded() {
        let lidless = BoxSpec::new(vec![
            IntervalSpec::new(q("1"), q("2"), OpenSide::Lower).unwrap(),
            IntervalSpec::closed(q("-2"), q("2")).unwrap(),
        ])
        .unwrap();
        assert!(!lidless.contains(&pt(&["1", "0"])).unwrap());
        assert!(lidless.contains(&pt(&["2", "0"])).unwrap());
        assert_eq!(lidless.open_axis(), Some(1));
    }

    #[test]
    fn reflection_swaps_open_side() {
        let a = IntervalSpec::new(q("1"), q("2"), OpenSide::Lower).unwrap();
        let r = a.reflected();
        assert_eq!(r.lower(), &q("-2"));
        assert_eq!(r.upper(), &q("-1"));
        assert_eq!(r.open_side(), OpenSide::Upper);
        assert!(!r.contains(&q("-1")));
        assert!(r.contains(&q("-2")));
    }

    #[test]
    fn interiors_disjoint_examples() {
        let a = closed(&[("0", "1"), ("0", "1")]);
        assert!(a
            .interiors_disjoint(&closed(&[("1", "2"), ("0", "1")]))
            .unwrap());
        assert!(!closed(&[("0", "2"), ("0", "2")])
            .interiors_disjoint(&closed(&[("1", "3"), ("1", "3")]))
            .unwrap());
        assert!(a
            .interiors_disjoint(&closed(&[("2", "3"), ("0", "1")]))
            .unwrap());
    }

    #[test]
    fn intersects_respects_open_sides() {
        let closed_a = closed(&[("0", "1")]);
        let open_b = BoxSpec::new(vec![
            IntervalSpec::new(q("1"), q("2"), OpenSide::Lower).unwrap()
        ])
        .unwrap();
        assert!(!closed_a.intersects(&open_b).unwrap());
        assert!(closed_a.intersects(&closed(&[("1", "2")])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = closed(&[("0", "1"), ("0", "1")]);
        assert!(matches!(
            a.contains(&pt(&["0"])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(a.interiors_disjoint(&closed(&[("0", "1")])).is_err());
    }

    #[test]
    fn rejects_invalid_boxes() {
        assert!(IntervalSpec::closed(q("1"), q("1")).is_err());
        let two_open = BoxSpec::new(vec![
            IntervalSpec::new(q("0"), q("1"), OpenSide::Lower).unwrap(),
            IntervalSpec::new(q("0"), q("1"), OpenSide::Upper).unwrap(),
        ]);
        assert!(matches!(two_open, Err(Error::TooManyOpenSides(2))));
    }

    #[test]
    fn parse_window_pairs() {
        let w = BoxSpec::parse_window("1,1.5,0,0.5").unwrap();
        assert_eq!(w, closed(&[("1", "3/2"), ("0", "1/2")]));
        assert!(BoxSpec::parse_window("1,2,3").is_err());
    }
}

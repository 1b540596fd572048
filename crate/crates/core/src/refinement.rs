//! Order-2 refinement of the covering into closed slabs.
//!
//! Each lidless cell at `(ν, n)` is cut along axis `ν` at the breakpoints
//! `2^n + a(ν,n,j)`, where `a(ν,n,·)` is a strictly decreasing null sequence
//! starting at `a(ν,n,0) = 2^n`. Slab `j` is the closed box
//!
//! ```text
//! 2^n + a(ν,n,j+1) ≤ t(ν) ≤ 2^n + a(ν,n,j)
//! ```
//!
//! with the other axes inherited from the cell. Consecutive slabs share a
//! facet, so no point lies in more than two tiles, and the slabs accumulate
//! at the open face `t(ν) = 2^n`: the tiling is point-finite but not locally
//! finite.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::covering::{locate_sigma, positive_cell, sigma_in_window, SigmaId, Sign};
use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, IntervalSpec, Point};
use crate::scalar::Scalar;

/// Per-cell overrides: the radius `ε(ν,n)` and an explicit prefix
/// `a(ν,n,1), a(ν,n,2), ...` of the breakpoint sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellTable {
    pub eps: Option<Scalar>,
    pub breakpoints: Vec<Scalar>,
}

/// Breakpoint and radius sequences for the refinement.
///
/// Outside explicit tables, `a(ν,n,j) = L + (2^n - L)·ratio^j` with
/// `L = floor·2^n`; after an explicit prefix of length `m` the tail continues
/// geometrically from `a(ν,n,m)`. The default (`ratio = 1/10`, `floor = 0`,
/// `ε = 9/100`) is a null sequence. A positive `floor` exists only to model
/// a broken, non-null schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementSchedule {
    ratio: Scalar,
    eps: Scalar,
    floor: Scalar,
    cells: BTreeMap<(usize, u32), CellTable>,
}

impl Default for RefinementSchedule {
    fn default() -> Self {
        RefinementSchedule {
            ratio: Scalar::ratio(1, 10),
            eps: Scalar::ratio(9, 100),
            floor: Scalar::zero(),
            cells: BTreeMap::new(),
        }
    }
}

impl RefinementSchedule {
    pub fn geometric(ratio: Scalar, eps: Scalar) -> Result<Self> {
        let sched = RefinementSchedule {
            ratio,
            eps,
            ..Default::default()
        };
        sched.validate()?;
        Ok(sched)
    }

    fn validate(&self) -> Result<()> {
        if !(self.ratio.is_positive() && self.ratio < Scalar::one()) {
            return Err(Error::InvalidSchedule(format!(
                "ratio {} must lie in (0, 1)",
                self.ratio
            )));
        }
        if self.floor.is_negative() || self.floor >= Scalar::one() {
            return Err(Error::InvalidSchedule(format!(
                "floor {} must lie in [0, 1)",
                self.floor
            )));
        }
        let eps_ok = |e: &Scalar| e.is_positive();
        if !eps_ok(&self.eps) {
            return Err(Error::InvalidSchedule(format!("eps {} must be positive", self.eps)));
        }
        for (&(axis, level), table) in &self.cells {
            if axis == 0 {
                return Err(Error::InvalidSchedule("axes are numbered from 1".into()));
            }
            if let Some(e) = &table.eps {
                if !eps_ok(e) {
                    return Err(Error::InvalidSchedule(format!(
                        "eps {e} at ({axis}, {level}) must be positive"
                    )));
                }
            }
            let limit = Scalar::pow2(level as i64) * &self.floor;
            if let Some(b) = table.breakpoints.iter().find(|b| **b <= limit) {
                return Err(Error::InvalidSchedule(format!(
                    "breakpoint {b} at ({axis}, {level}) must exceed the limit {limit}"
                )));
            }
        }
        Ok(())
    }

    /// Replaces `ε(axis, level)`.
    pub fn with_eps(mut self, axis: usize, level: u32, eps: Scalar) -> Result<Self> {
        self.cells.entry((axis, level)).or_default().eps = Some(eps);
        self.validate()?;
        Ok(self)
    }

    /// Replaces the leading breakpoints `a(axis, level, 1..)`.
    pub fn with_breakpoints(
        mut self,
        axis: usize,
        level: u32,
        breakpoints: Vec<Scalar>,
    ) -> Result<Self> {
        self.cells.entry((axis, level)).or_default().breakpoints = breakpoints;
        self.validate()?;
        Ok(self)
    }

    /// Uniform `ε` for every cell without its own override.
    pub fn with_uniform_eps(mut self, eps: Scalar) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    /// Makes the breakpoints converge to `floor·2^n` instead of 0.
    pub fn with_floor(mut self, floor: Scalar) -> Result<Self> {
        self.floor = floor;
        self.validate()?;
        Ok(self)
    }

    pub fn ratio(&self) -> &Scalar {
        &self.ratio
    }

    pub fn floor(&self) -> &Scalar {
        &self.floor
    }

    pub fn eps(&self, axis: usize, level: u32) -> Scalar {
        self.cells
            .get(&(axis, level))
            .and_then(|t| t.eps.clone())
            .unwrap_or_else(|| self.eps.clone())
    }

    fn table(&self, axis: usize, level: u32) -> &[Scalar] {
        self.cells
            .get(&(axis, level))
            .map(|t| t.breakpoints.as_slice())
            .unwrap_or(&[])
    }

    /// Infimum of `a(axis, level, ·)`; zero for a null sequence.
    pub fn limit(&self, level: u32) -> Scalar {
        Scalar::pow2(level as i64) * &self.floor
    }

    /// `a(axis, level, j)`.
    pub fn a(&self, axis: usize, level: u32, j: u32) -> Scalar {
        let top = Scalar::pow2(level as i64);
        if j == 0 {
            return top;
        }
        let table = self.table(axis, level);
        let m = table.len() as u32;
        if j <= m {
            return table[j as usize - 1].clone();
        }
        let limit = &top * &self.floor;
        let start = if m == 0 { top } else { table[m as usize - 1].clone() };
        &limit + (start - &limit) * self.ratio.powi(j - m)
    }

    /// Successive `a(axis, level, j)` for `j = 0, 1, 2, ...`.
    pub fn breakpoints(&self, axis: usize, level: u32) -> Breakpoints<'_> {
        Breakpoints {
            sched: self,
            table: self.table(axis, level),
            j: 0,
            limit: self.limit(level),
            current: Scalar::pow2(level as i64),
        }
    }

    /// Number of explicit entries; the sequence is strictly decreasing from
    /// this index on.
    pub(crate) fn prefix_len(&self, axis: usize, level: u32) -> u32 {
        self.table(axis, level).len() as u32
    }

    fn is_plain_geometric(&self, axis: usize, level: u32) -> bool {
        self.floor.is_zero() && self.prefix_len(axis, level) == 0
    }

    /// Slab indices `j` with `a(j+1) ≤ s ≤ a(j)`, by scanning `j` upward.
    pub fn slabs_containing(&self, axis: usize, level: u32, s: &Scalar) -> Vec<u32> {
        let mut out = Vec::new();
        if *s <= self.limit(level) {
            return out;
        }
        let m = self.prefix_len(axis, level);
        let mut seq = self.breakpoints(axis, level);
        let (_, mut upper) = seq.next_pair();
        loop {
            let (j, lower) = seq.next_pair();
            let j = j - 1;
            // Past the explicit prefix the sequence only decreases.
            if j >= m && upper < *s {
                break;
            }
            if lower <= *s && *s <= upper {
                out.push(j);
            }
            upper = lower;
        }
        out
    }

    /// Closed-form slab search for plain geometric cells: the largest `j`
    /// with `a(j) ≥ s`, estimated by logarithms and settled exactly.
    pub fn geometric_slab_index(&self, axis: usize, level: u32, s: &Scalar) -> Option<u32> {
        if !self.is_plain_geometric(axis, level) || !s.is_positive() {
            return None;
        }
        let top = Scalar::pow2(level as i64);
        if *s > top {
            return None;
        }
        let estimate = ((top.to_f64() / s.to_f64()).ln() / (1.0 / self.ratio.to_f64()).ln())
            .floor();
        if !estimate.is_finite() || estimate < 0.0 || estimate > 1e6 {
            return None;
        }
        let mut j = estimate as u32;
        let a = |j: u32| &top * self.ratio.powi(j);
        while j > 0 && a(j) < *s {
            j -= 1;
        }
        while a(j + 1) >= *s {
            j += 1;
        }
        Some(j)
    }
}

/// Iterator state over one breakpoint sequence.
pub struct Breakpoints<'a> {
    sched: &'a RefinementSchedule,
    table: &'a [Scalar],
    j: u32,
    limit: Scalar,
    current: Scalar,
}

impl Breakpoints<'_> {
    /// Returns `(j, a(j))` and advances.
    fn next_pair(&mut self) -> (u32, Scalar) {
        let out = (self.j, self.current.clone());
        self.j += 1;
        let m = self.table.len() as u32;
        self.current = if self.j <= m {
            self.table[self.j as usize - 1].clone()
        } else {
            &self.limit + (&self.current - &self.limit) * &self.sched.ratio
        };
        out
    }
}

impl Iterator for Breakpoints<'_> {
    type Item = Scalar;

    fn next(&mut self) -> Option<Scalar> {
        Some(self.next_pair().1)
    }
}

/// Identity of a tile of the refined tiling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TauId {
    Ball,
    Slab {
        sign: Sign,
        axis: usize,
        level: u32,
        slab: u32,
    },
}

impl TauId {
    pub fn slab(sign: Sign, axis: usize, level: u32, slab: u32) -> Self {
        TauId::Slab {
            sign,
            axis,
            level,
            slab,
        }
    }

    /// The covering member this tile refines.
    pub fn parent(&self) -> SigmaId {
        match *self {
            TauId::Ball => SigmaId::Ball,
            TauId::Slab {
                sign, axis, level, ..
            } => SigmaId::cell(sign, axis, level),
        }
    }
}

impl fmt::Display for TauId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauId::Ball => write!(f, "ball"),
            TauId::Slab {
                sign,
                axis,
                level,
                slab,
            } => write!(f, "slab({},{axis},{level},{slab})", sign.symbol()),
        }
    }
}

/// The closed box a [`TauId`] stands for.
pub fn tau_spec(id: TauId, dim: usize, sched: &RefinementSchedule) -> Result<BoxSpec> {
    id.parent().check(dim)?;
    match id {
        TauId::Ball => Ok(BoxSpec::cube(dim, Scalar::one())),
        TauId::Slab {
            sign,
            axis,
            level,
            slab,
        } => {
            let top = Scalar::pow2(level as i64);
            let lower = &top + sched.a(axis, level, slab + 1);
            let upper = &top + sched.a(axis, level, slab);
            let along = IntervalSpec::closed(lower, upper)?;
            let mut axes = positive_cell(axis, level, dim).axes().to_vec();
            axes[axis - 1] = along;
            let b = BoxSpec::from_axes_unchecked(axes);
            Ok(match sign {
                Sign::Plus => b,
                Sign::Minus => b.reflected(),
            })
        }
    }
}

/// The one or two tiles containing `p`, in increasing slab order.
pub fn locate_tau(p: &Point, sched: &RefinementSchedule) -> Vec<TauId> {
    let SigmaId::Cell { sign, axis, level } = locate_sigma(p) else {
        return vec![TauId::Ball];
    };
    let s = p.coord(axis).abs() - Scalar::pow2(level as i64);
    let slabs = match sched.geometric_slab_index(axis, level, &s) {
        Some(j) if j > 0 && s == sched.a(axis, level, j) => vec![j - 1, j],
        Some(j) => vec![j],
        None => sched.slabs_containing(axis, level, &s),
    };
    slabs
        .into_iter()
        .map(|j| TauId::slab(sign, axis, level, j))
        .collect()
}

/// Result of enumerating the tiles that meet a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "ids", rename_all = "lowercase")]
pub enum TileWindow {
    Complete(Vec<TauId>),
    /// More than `cap` tiles meet the window; holds the first `cap` found.
    Overflow(Vec<TauId>),
}

impl TileWindow {
    pub fn ids(&self) -> &[TauId] {
        match self {
            TileWindow::Complete(ids) | TileWindow::Overflow(ids) => ids,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, TileWindow::Overflow(_))
    }
}

/// All tiles meeting the closed box `window`, or an overflow signal once
/// more than `cap` have been found.
///
/// Overflow happens exactly when the window reaches an accumulation face
/// `|t(ν)| = 2^n` of some cell it meets.
pub fn tau_in_window(window: &BoxSpec, sched: &RefinementSchedule, cap: usize) -> TileWindow {
    let mut out: Vec<TauId> = Vec::new();
    for id in sigma_in_window(window) {
        let SigmaId::Cell { sign, axis, level } = id else {
            out.push(TauId::Ball);
            if out.len() > cap {
                out.truncate(cap);
                return TileWindow::Overflow(out);
            }
            continue;
        };
        let along = match sign {
            Sign::Plus => window.axis(axis).clone(),
            Sign::Minus => window.axis(axis).reflected(),
        };
        let top = Scalar::pow2(level as i64);
        let s_lo = along.lower() - &top;
        let s_hi = along.upper() - &top;
        let limit = sched.limit(level);
        if s_hi <= limit {
            continue;
        }
        let m = sched.prefix_len(axis, level);
        let mut seq = sched.breakpoints(axis, level);
        let (_, mut upper) = seq.next_pair();
        loop {
            let (next, lower) = seq.next_pair();
            let j = next - 1;
            if j >= m && upper < s_lo {
                break;
            }
            if lower <= s_hi && upper >= s_lo {
                out.push(TauId::slab(sign, axis, level, j));
                if out.len() > cap {
                    out.truncate(cap);
                    return TileWindow::Overflow(out);
                }
                if j >= m && s_lo <= limit {
                    // Every later slab meets the window too.
                    let room = cap + 1 - out.len();
                    out.extend((1..=room as u32).map(|k| TauId::slab(sign, axis, level, j + k)));
                    out.truncate(cap);
                    return TileWindow::Overflow(out);
                }
            }
            upper = lower;
        }
    }
    TileWindow::Complete(out)
}

/// Coordinates `f_μ(x_ν)` of the pair system, possibly known only up to an
/// interval. Axis numbers are 1-based.
pub trait PairCoordinates {
    fn gamma(&self) -> usize;

    /// Bounds `(min, max)` on `f_μ(x_ν)`.
    fn coordinate_range(&self, nu: usize, mu: usize) -> (Scalar, Scalar);
}

/// Coordinate pairs `(e_ν, e_ν*)`: `f_μ(x_ν) = δ_μν`.
#[derive(Clone, Copy, Debug)]
pub struct IdentityPairs(pub usize);

impl PairCoordinates for IdentityPairs {
    fn gamma(&self) -> usize {
        self.0
    }

    fn coordinate_range(&self, nu: usize, mu: usize) -> (Scalar, Scalar) {
        let c = if nu == mu { Scalar::one() } else { Scalar::zero() };
        (c.clone(), c)
    }
}

/// Every pair system allowed by the pair conditions: `|f_μ(x_ν)| ≤ 1/2`
/// before `ν`, `3/4 ≤ f_ν(x_ν) ≤ 1`, and `|f_μ(x_ν)| ≤ 1` after.
#[derive(Clone, Copy, Debug)]
pub struct WorstCasePairs(pub usize);

impl PairCoordinates for WorstCasePairs {
    fn gamma(&self) -> usize {
        self.0
    }

    fn coordinate_range(&self, nu: usize, mu: usize) -> (Scalar, Scalar) {
        match mu.cmp(&nu) {
            std::cmp::Ordering::Less => (Scalar::ratio(-1, 2), Scalar::ratio(1, 2)),
            std::cmp::Ordering::Equal => (Scalar::ratio(3, 4), Scalar::one()),
            std::cmp::Ordering::Greater => (-Scalar::one(), Scalar::one()),
        }
    }
}

/// Which containment a violation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    /// `z + 2ε·B ⊂ A(ν,n)`.
    DoubleBall,
    /// `z + ε·B ⊂ {2^n + a(ν,n,1) < t(ν) ≤ 2^(n+1)}`.
    FirstSlab,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleViolation {
    EpsOutOfRange { eps: Scalar },
    NotDecreasing { j: u32 },
    NotNull { limit: Scalar },
    Escapes { containment: Containment, axis: usize, excess: Scalar },
}

/// Outcome of the schedule checks for one cell `(axis, level)`.
#[derive(Clone, Debug, Serialize)]
pub struct CellCheck {
    pub axis: usize,
    pub level: u32,
    /// Largest admissible `ε` minus the actual `ε`.
    pub eps_headroom: Scalar,
    /// Largest admissible `a(ν,n,1)` minus the actual one.
    pub a1_headroom: Scalar,
    pub violations: Vec<ScheduleViolation>,
}

impl CellCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleReport {
    pub cells: Vec<CellCheck>,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(CellCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| !c.passed())
    }

    pub fn cell(&self, axis: usize, level: u32) -> Option<&CellCheck> {
        self.cells
            .iter()
            .find(|c| c.axis == axis && c.level == level)
    }
}

/// Checks the schedule against the interior witnesses
/// `z(ν,n) = (2^(n+1) - 2/5)·T(x_ν)` for every axis and every level up to
/// `max_level`.
///
/// Balls of the image are bounded coordinatewise by their radius, so each
/// containment reduces to per-axis inequalities, strict wherever the cell
/// boundary is open.
pub fn verify_schedule(
    sched: &RefinementSchedule,
    pairs: &dyn PairCoordinates,
    max_level: u32,
) -> ScheduleReport {
    let gamma = pairs.gamma();
    let mut cells = Vec::new();
    for axis in 1..=gamma {
        for level in 0..=max_level {
            cells.push(check_cell(sched, pairs, axis, level));
        }
    }
    ScheduleReport { cells }
}

pub(crate) fn check_cell(
    sched: &RefinementSchedule,
    pairs: &dyn PairCoordinates,
    axis: usize,
    level: u32,
) -> CellCheck {
    let gamma = pairs.gamma();
    let mut violations = Vec::new();
    let eps = sched.eps(axis, level);
    let two_eps = &eps + &eps;
    let inner = Scalar::pow2(level as i64);
    let outer = Scalar::pow2(level as i64 + 1);
    let stretch = &outer - Scalar::ratio(2, 5);

    if !(eps.is_positive() && eps < Scalar::one()) {
        violations.push(ScheduleViolation::EpsOutOfRange { eps: eps.clone() });
    }
    if !sched.floor.is_zero() {
        violations.push(ScheduleViolation::NotNull {
            limit: sched.limit(level),
        });
    }
    let checked = sched.prefix_len(axis, level) + 2;
    let seq: Vec<Scalar> = sched.breakpoints(axis, level).take(checked as usize + 1).collect();
    if let Some(j) = seq
        .windows(2)
        .position(|w| !(w[1] < w[0] && w[1].is_positive()))
    {
        violations.push(ScheduleViolation::NotDecreasing { j: j as u32 + 1 });
    }

    // Each entry: (bound on ε implied by the constraint, strict?).
    let mut eps_bounds: Vec<Scalar> = vec![Scalar::one()];
    let mut escapes = |containment, mu, excess: Scalar, strict: bool| {
        if excess.is_positive() || (strict && excess.is_zero()) {
            violations.push(ScheduleViolation::Escapes {
                containment,
                axis: mu,
                excess,
            });
        }
    };

    let (c_min, c_max) = pairs.coordinate_range(axis, axis);
    let z_min = &stretch * &c_min;
    let z_max = &stretch * &c_max;
    let a1 = sched.a(axis, level, 1);

    for mu in 1..=gamma {
        if mu == axis {
            // 2^n < z(ν) - 2ε and z(ν) + 2ε ≤ 2^(n+1)
            escapes(Containment::DoubleBall, mu, &inner - (&z_min - &two_eps), true);
            escapes(Containment::DoubleBall, mu, (&z_max + &two_eps) - &outer, false);
            eps_bounds.push((&z_min - &inner) / Scalar::from_int(2));
            eps_bounds.push((&outer - &z_max) / Scalar::from_int(2));
            // 2^n + a(1) < z(ν) - ε
            escapes(Containment::FirstSlab, mu, (&inner + &a1) - (&z_min - &eps), true);
            eps_bounds.push(&z_min - &inner - &a1);
            continue;
        }
        let (lo, hi) = pairs.coordinate_range(axis, mu);
        let reach = &stretch * lo.abs().max(hi.abs());
        let bound = if mu < axis { &inner } else { &outer };
        escapes(Containment::DoubleBall, mu, (&reach + &two_eps) - bound, false);
        eps_bounds.push((bound - &reach) / Scalar::from_int(2));
    }

    let eps_max = eps_bounds.into_iter().min().expect("nonempty");
    CellCheck {
        axis,
        level,
        eps_headroom: eps_max - &eps,
        a1_headroom: (&z_min - &eps - &inner) - &a1,
        violations,
    }
}

/// Serialized schedule: `{ratio, eps}` plus optional per-cell tables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub ratio: Scalar,
    pub eps: Scalar,
    #[serde(default, skip_serializing_if = "Scalar::is_zero")]
    pub floor: Scalar,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellEntry {
    pub axis: usize,
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakpoints: Vec<Scalar>,
}

impl TryFrom<ScheduleFile> for RefinementSchedule {
    type Error = Error;

    fn try_from(file: ScheduleFile) -> Result<Self> {
        let mut cells = BTreeMap::new();
        for entry in file.cells {
            cells.insert(
                (entry.axis, entry.level),
                CellTable {
                    eps: entry.eps,
                    breakpoints: entry.breakpoints,
                },
            );
        }
        let sched = RefinementSchedule {
            ratio: file.ratio,
            eps: file.eps,
            floor: file.floor,
            cells,
        };
        sched.validate()?;
        Ok(sched)
    }
}

impl From<&RefinementSchedule> for ScheduleFile {
    fn from(sched: &RefinementSchedule) -> Self {
        ScheduleFile {
            ratio: sched.ratio.clone(),
            eps: sched.eps.clone(),
            floor: sched.floor.clone(),
            cells: sched
                .cells
                .iter()
                .map(|(&(axis, level), t)| CellEntry {
                    axis,
                    level,
                    eps: t.eps.clone(),
                    breakpoints: t.breakpoints.clone(),
                })
                .collect(),
        }
    }
}

impl RefinementSchedule {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScheduleFile::from(self)).expect("schedule serializes")
    }
}

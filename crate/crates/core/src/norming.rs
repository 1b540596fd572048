//! Norming pairs, the embedding into the sup-norm space, and the pullback
//! tiling.
//!
//! Spaces are polyhedral: `‖x‖ = max_{g ∈ G} g(x)` for a finite symmetric
//! generator set `G`, so norms, dual norms and norming constants are exact
//! rational computations. Given a 1-norming set `M`, [`build_pairs`] picks
//! an ordered system `(x_ν, f_ν)` with
//!
//! 1. `‖x_ν‖ = 1` and `f_ν ∈ M`,
//! 2. `|f_μ(x_ν)| ≤ 1/2` for `μ < ν`,
//! 3. `f_ν(x_ν) ≥ 3/4`,
//! 4. `{f_ν}` is 1/2-norming,
//!
//! and `T(x) = (f_ν(x))_ν` then satisfies `‖x‖/2 ≤ ‖T(x)‖∞ ≤ ‖x‖`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sup_norm, BoxSpec, Point};
use crate::lp::{maximize, rank_and_kernel, solve_square, Constraint, LpOutcome};
use crate::refinement::{
    check_cell, locate_tau, tau_spec, PairCoordinates, RefinementSchedule, TauId,
};
use crate::scalar::Scalar;

/// A linear functional `x ↦ Σ coeffs(i)·x(i)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Functional(Vec<Scalar>);

impl Functional {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        Functional(coeffs)
    }

    /// The coordinate functional `e_axis*` (1-based), scaled by `sign`.
    pub fn coordinate(dim: usize, axis: usize, sign: i64) -> Self {
        let mut c = vec![Scalar::zero(); dim];
        c[axis - 1] = Scalar::from_int(sign);
        Functional(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.0
    }

    pub fn apply(&self, x: &Point) -> Scalar {
        self.0.iter().zip(x.coords()).map(|(a, b)| a * b).sum()
    }

    pub fn negated(&self) -> Self {
        Functional(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ">")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Sup,
    Ell1,
    Polytope,
}

/// A finite-dimensional space with a polyhedral norm.
#[derive(Clone, Debug)]
pub struct NormedSpaceModel {
    dim: usize,
    kind: NormKind,
    generators: Vec<Functional>,
    extreme_points: Vec<Point>,
}

/// Vertex enumeration is brute force over generator subsets; beyond this
/// many subsets callers must supply the extreme points.
const MAX_VERTEX_SUBSETS: u128 = 2_000_000;

fn sign_vectors(dim: usize) -> Vec<Vec<Scalar>> {
    (0..1u32 << dim)
        .map(|mask| {
            (0..dim)
                .map(|i| {
                    if mask >> (dim - 1 - i) & 1 == 0 {
                        Scalar::one()
                    } else {
                        -Scalar::one()
                    }
                })
                .collect()
        })
        .collect()
}

fn unit_vectors(dim: usize) -> Vec<Vec<Scalar>> {
    let mut out = Vec::with_capacity(2 * dim);
    for axis in 1..=dim {
        for sign in [1, -1] {
            out.push(Functional::coordinate(dim, axis, sign).0);
        }
    }
    out
}

impl NormedSpaceModel {
    /// `ℓ∞` on `dim` coordinates.
    pub fn sup(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(NormedSpaceModel {
            dim,
            kind: NormKind::Sup,
            generators: unit_vectors(dim).into_iter().map(Functional).collect(),
            extreme_points: sign_vectors(dim)
                .into_iter()
                .map(|c| Point::new(c).expect("nonempty"))
                .collect(),
        })
    }

    /// `ℓ1` on `dim` coordinates.
    pub fn ell1(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(NormedSpaceModel {
            dim,
            kind: NormKind::Ell1,
            generators: sign_vectors(dim).into_iter().map(Functional).collect(),
            extreme_points: unit_vectors(dim)
                .into_iter()
                .map(|c| Point::new(c).expect("nonempty"))
                .collect(),
        })
    }

    /// The norm `max_{g ∈ generators} g(x)`; extreme points of the unit ball
    /// are computed when not supplied.
    pub fn polytope(generators: Vec<Functional>, extreme_points: Option<Vec<Point>>) -> Result<Self> {
        let dim = generators
            .first()
            .map(Functional::dim)
            .ok_or_else(|| Error::InvalidSpace("no generators".into()))?;
        check_dim(dim)?;
        if generators.iter().any(|g| g.dim() != dim) {
            return Err(Error::InvalidSpace("generators of mixed dimension".into()));
        }
        if let Some(g) = generators
            .iter()
            .find(|g| !generators.contains(&g.negated()))
        {
            return Err(Error::InvalidSpace(format!(
                "generator set is not symmetric: missing -{g:?}"
            )));
        }
        let rows: Vec<Vec<Scalar>> = generators.iter().map(|g| g.0.clone()).collect();
        if rank_and_kernel(&rows, dim).0 < dim {
            return Err(Error::InvalidSpace(
                "generators do not span the dual; this is only a seminorm".into(),
            ));
        }
        let mut space = NormedSpaceModel {
            dim,
            kind: NormKind::Polytope,
            generators,
            extreme_points: Vec::new(),
        };
        space.extreme_points = match extreme_points {
            Some(points) => {
                for p in &points {
                    if p.dim() != dim || space.norm(p) != Scalar::one() {
                        return Err(Error::InvalidSpace(format!(
                            "extreme point {p} is not on the unit sphere"
                        )));
                    }
                }
                points
            }
            None => space.enumerate_vertices()?,
        };
        Ok(space)
    }

    fn enumerate_vertices(&self) -> Result<Vec<Point>> {
        let g = self.generators.len();
        let subsets = binomial(g as u128, self.dim as u128);
        if subsets > MAX_VERTEX_SUBSETS {
            return Err(Error::InvalidSpace(format!(
                "{subsets} generator subsets; supply extreme_points explicitly"
            )));
        }
        let mut out: Vec<Point> = Vec::new();
        let mut idx: Vec<usize> = (0..self.dim).collect();
        loop {
            let a: Vec<Vec<Scalar>> = idx.iter().map(|&i| self.generators[i].0.clone()).collect();
            let b = vec![Scalar::one(); self.dim];
            if let Some(x) = solve_square(&a, &b) {
                let p = Point::new(x).expect("nonempty");
                if self.norm(&p) == Scalar::one() && !out.contains(&p) {
                    out.push(p);
                }
            }
            // next combination
            let mut k = self.dim;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                if idx[k] < g - self.dim + k {
                    idx[k] += 1;
                    for t in k + 1..self.dim {
                        idx[t] = idx[t - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn generators(&self) -> &[Functional] {
        &self.generators
    }

    pub fn extreme_points(&self) -> &[Point] {
        &self.extreme_points
    }

    pub fn norm(&self, x: &Point) -> Scalar {
        match self.kind {
            NormKind::Sup => return sup_norm(x),
            NormKind::Ell1 => return x.coords().iter().map(Scalar::abs).sum(),
            NormKind::Polytope => {}
        }
        self.generators
            .iter()
            .map(|g| g.apply(x))
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    /// `sup_{‖x‖ ≤ 1} |f(x)|`, attained at an extreme point.
    pub fn dual_norm(&self, f: &Functional) -> Scalar {
        self.extreme_points
            .iter()
            .map(|e| f.apply(e).abs())
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    /// Constraints `g(x) ≤ 1` describing the closed unit ball.
    fn ball_constraints(&self) -> Vec<Constraint> {
        self.generators
            .iter()
            .map(|g| Constraint::le(g.0.clone(), Scalar::one()))
            .collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > 64 {
        return Err(Error::InvalidSpace(format!("dimension {dim} outside 1..=64")));
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// A finite subset of the dual unit sphere with its claimed norming
/// constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormingSet {
    pub functionals: Vec<Functional>,
    #[serde(default = "Scalar::one")]
    pub alpha: Scalar,
}

impl NormingSet {
    pub fn new(functionals: Vec<Functional>, alpha: Scalar) -> Self {
        NormingSet { functionals, alpha }
    }

    /// `{±e_ν*}`, which is 1-norming for the sup norm.
    pub fn coordinates(dim: usize) -> Self {
        NormingSet::new(unit_vectors(dim).into_iter().map(Functional).collect(), Scalar::one())
    }

    /// All `2^dim` sign vectors, which are 1-norming for `ℓ1`.
    pub fn sign_vectors(dim: usize) -> Self {
        NormingSet::new(sign_vectors(dim).into_iter().map(Functional).collect(), Scalar::one())
    }
}

/// A point `x` with `max_f |f(x)| < alpha·‖x‖`, or `None` if the
/// functionals are `alpha`-norming.
///
/// The set is `alpha`-norming iff the polytope `{x : |f(x)| ≤ alpha}` is
/// bounded and inside the unit ball, which is decided by maximizing every
/// norm generator over it.
pub fn norming_counterexample(
    functionals: &[Functional],
    alpha: &Scalar,
    space: &NormedSpaceModel,
) -> Result<Option<Point>> {
    let dim = space.dim();
    if let Some(f) = functionals.iter().find(|f| f.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: f.dim(),
        });
    }
    // |f(x)| ≤ α is the same pair of half-spaces for f and -f.
    let mut distinct: Vec<&Functional> = Vec::new();
    for f in functionals {
        if !distinct.iter().any(|g| **g == *f || **g == f.negated()) {
            distinct.push(f);
        }
    }
    let rows: Vec<Vec<Scalar>> = distinct.iter().map(|f| f.0.clone()).collect();
    if let (_, Some(kernel)) = rank_and_kernel(&rows, dim) {
        let x = Point::new(kernel).expect("nonempty");
        let n = space.norm(&x);
        return Ok(Some(x.scaled(&(Scalar::one() / n))));
    }
    let mut constraints = Vec::with_capacity(2 * distinct.len());
    for f in &distinct {
        constraints.push(Constraint::le(f.0.clone(), alpha.clone()));
        constraints.push(Constraint::ge(f.0.clone(), -alpha));
    }
    // The polytope is symmetric, so g and -g give the same maximum.
    let mut seen: Vec<&Functional> = Vec::new();
    for g in space.generators() {
        if seen.iter().any(|h| **h == g.negated()) {
            continue;
        }
        seen.push(g);
        match maximize(&g.0, &constraints) {
            LpOutcome::Optimal { point, value } if value > Scalar::one() => {
                let x = Point::new(point).expect("nonempty");
                let n = space.norm(&x);
                return Ok(Some(x.scaled(&(Scalar::one() / n))));
            }
            LpOutcome::Optimal { .. } => {}
            LpOutcome::Infeasible | LpOutcome::Unbounded => {
                unreachable!("bounded polytope containing the origin")
            }
        }
    }
    Ok(None)
}

/// Whether `M` is `M.alpha`-norming for `space`.
pub fn check_norming(m: &NormingSet, space: &NormedSpaceModel) -> Result<bool> {
    Ok(norming_counterexample(&m.functionals, &m.alpha, space)?.is_none())
}

/// Bounds used by the greedy pair search: `|f_μ(x_ν)| ≤ cross` and
/// `f_ν(x_ν) ≥ diagonal`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBounds {
    pub cross: Scalar,
    pub diagonal: Scalar,
}

impl Default for PairBounds {
    fn default() -> Self {
        PairBounds {
            cross: Scalar::ratio(1, 2),
            diagonal: Scalar::ratio(3, 4),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub x: Point,
    pub f: Functional,
}

/// An ordered pair system together with the space and the set it was drawn
/// from.
#[derive(Clone, Debug)]
pub struct EmbeddingModel {
    space: NormedSpaceModel,
    source: Vec<Functional>,
    pairs: Vec<Pair>,
}

impl EmbeddingModel {
    /// Wraps an existing pair system. `source` defaults to the pair
    /// functionals themselves.
    pub fn new(space: NormedSpaceModel, pairs: Vec<Pair>, source: Option<Vec<Functional>>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::PairCondition {
                condition: 4,
                detail: "empty pair system".into(),
            });
        }
        for p in &pairs {
            if p.x.dim() != space.dim() || p.f.dim() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: p.x.dim().max(p.f.dim()),
                });
            }
        }
        let source = source.unwrap_or_else(|| pairs.iter().map(|p| p.f.clone()).collect());
        Ok(EmbeddingModel {
            space,
            source,
            pairs,
        })
    }

    /// Sup norm with the coordinate pairs `(e_ν, e_ν*)`: `T` is the identity.
    pub fn coordinate(dim: usize) -> Result<Self> {
        let space = NormedSpaceModel::sup(dim)?;
        let pairs = (1..=dim)
            .map(|axis| Pair {
                x: Point::new(Functional::coordinate(dim, axis, 1).0).expect("nonempty"),
                f: Functional::coordinate(dim, axis, 1),
            })
            .collect();
        EmbeddingModel::new(space, pairs, Some(NormingSet::coordinates(dim).functionals))
    }

    pub fn space(&self) -> &NormedSpaceModel {
        &self.space
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn gamma(&self) -> usize {
        self.pairs.len()
    }

    pub fn functionals(&self) -> Vec<Functional> {
        self.pairs.iter().map(|p| p.f.clone()).collect()
    }

    /// The same model with one pair replaced; used to build broken systems.
    pub fn with_pair(mut self, index: usize, pair: Pair) -> Self {
        self.pairs[index] = pair;
        self
    }
}

impl PairCoordinates for EmbeddingModel {
    fn gamma(&self) -> usize {
        self.pairs.len()
    }

    fn coordinate_range(&self, nu: usize, mu: usize) -> (Scalar, Scalar) {
        let c = self.pairs[mu - 1].f.apply(&self.pairs[nu - 1].x);
        (c.clone(), c)
    }
}

/// Checks conditions (1)–(4) exactly.
pub fn verify_pairs(model: &EmbeddingModel) -> Result<()> {
    let bounds = PairBounds::default();
    let space = &model.space;
    for (i, p) in model.pairs.iter().enumerate() {
        let nu = i + 1;
        let norm = space.norm(&p.x);
        if norm != Scalar::one() {
            return Err(Error::PairCondition {
                condition: 1,
                detail: format!("‖x_{nu}‖ = {norm}"),
            });
        }
        if !model.source.contains(&p.f) {
            return Err(Error::PairCondition {
                condition: 1,
                detail: format!("f_{nu} = {:?} is not in the source set", p.f),
            });
        }
        let dual = space.dual_norm(&p.f);
        if dual != Scalar::one() {
            return Err(Error::PairCondition {
                condition: 1,
                detail: format!("‖f_{nu}‖ = {dual}"),
            });
        }
        for (j, q) in model.pairs[..i].iter().enumerate() {
            let v = q.f.apply(&p.x);
            if v.abs() > bounds.cross {
                return Err(Error::PairCondition {
                    condition: 2,
                    detail: format!("f_{}(x_{nu}) = {v}", j + 1),
                });
            }
        }
        let diag = p.f.apply(&p.x);
        if diag < bounds.diagonal {
            return Err(Error::PairCondition {
                condition: 3,
                detail: format!("f_{nu}(x_{nu}) = {diag}"),
            });
        }
    }
    if let Some(x) = norming_counterexample(&model.functionals(), &Scalar::ratio(1, 2), space)? {
        return Err(Error::PairCondition {
            condition: 4,
            detail: format!("max |f_ν(x)| < ‖x‖/2 at x = {x}"),
        });
    }
    Ok(())
}

/// Greedy construction of a pair system from a 1-norming set.
pub fn build_pairs(space: &NormedSpaceModel, m: &NormingSet) -> Result<EmbeddingModel> {
    build_pairs_with(space, m, &PairBounds::default())
}

/// [`build_pairs`] with explicit search bounds.
///
/// Candidates `f ∈ M` are tried in order; for each, the search looks for a
/// unit vector `x` with `|f_μ(x)| ≤ cross` for the chosen `f_μ` and
/// `f(x) ≥ diagonal`. The first success is appended. The loop stops once
/// the chosen functionals are 1/2-norming.
pub fn build_pairs_with(
    space: &NormedSpaceModel,
    m: &NormingSet,
    bounds: &PairBounds,
) -> Result<EmbeddingModel> {
    let dim = space.dim();
    for (index, f) in m.functionals.iter().enumerate() {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.dim(),
            });
        }
        let norm = space.dual_norm(f);
        if norm != Scalar::one() {
            return Err(Error::NotUnitFunctional {
                index,
                norm: norm.to_string(),
            });
        }
    }
    if let Some(witness) = norming_counterexample(&m.functionals, &Scalar::one(), space)? {
        return Err(Error::NotNorming {
            alpha: "1".into(),
            witness,
        });
    }

    let half = Scalar::ratio(1, 2);
    let mut pairs: Vec<Pair> = Vec::new();
    loop {
        let chosen: Vec<Functional> = pairs.iter().map(|p| p.f.clone()).collect();
        let gap = norming_counterexample(&chosen, &half, space)?;
        let Some(certificate) = gap else {
            break;
        };
        let found = m
            .functionals
            .iter()
            .filter(|f| !chosen.contains(f))
            .find_map(|f| find_unit_vector(space, &chosen, f, bounds).map(|x| (x, f.clone())));
        match found {
            Some((x, f)) => pairs.push(Pair { x, f }),
            None => {
                return Err(Error::SearchExhausted {
                    pairs: pairs.len(),
                    certificate,
                })
            }
        }
    }
    EmbeddingModel::new(space.clone(), pairs, Some(m.functionals.clone()))
}

/// A unit vector `x` with `|g(x)| ≤ cross` for every `g` in `chosen` and
/// `f(x) ≥ diagonal`, if one exists.
fn find_unit_vector(
    space: &NormedSpaceModel,
    chosen: &[Functional],
    f: &Functional,
    bounds: &PairBounds,
) -> Option<Point> {
    let mut constraints = space.ball_constraints();
    for g in chosen {
        constraints.push(Constraint::le(g.0.clone(), bounds.cross.clone()));
        constraints.push(Constraint::ge(g.0.clone(), -&bounds.cross));
    }
    let LpOutcome::Optimal { point, value } = maximize(&f.0, &constraints) else {
        return None;
    };
    if value < bounds.diagonal {
        return None;
    }
    if value == Scalar::one() {
        // f(x) ≤ ‖x‖ ≤ 1, so x lies on the sphere.
        return Some(Point::new(point).expect("nonempty"));
    }
    // The norm is convex, so its maximum over the feasible polytope is the
    // largest generator maximum; the sphere is reached iff that equals 1.
    constraints.push(Constraint::ge(f.0.clone(), bounds.diagonal.clone()));
    space.generators().iter().find_map(|g| match maximize(&g.0, &constraints) {
        LpOutcome::Optimal { point, value } if value == Scalar::one() => {
            Some(Point::new(point).expect("nonempty"))
        }
        _ => None,
    })
}

/// `T(x) = (f_ν(x))_ν`.
pub fn embed(model: &EmbeddingModel, x: &Point) -> Result<Point> {
    if x.dim() != model.space.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.space.dim(),
            got: x.dim(),
        });
    }
    Point::new(model.pairs.iter().map(|p| p.f.apply(x)).collect())
}

/// Tiles of the pullback tiling containing `x`.
pub fn pullback_locate(
    model: &EmbeddingModel,
    sched: &RefinementSchedule,
    x: &Point,
) -> Result<Vec<TauId>> {
    Ok(locate_tau(&embed(model, x)?, sched))
}

/// An interior point of a tile with a ball of the image around it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// The point in the original space.
    pub point: Point,
    /// Its image `T(point)`.
    pub image: Point,
    /// Radius of the ball of `T(X)` around `image` that stays in the tile.
    pub radius: Scalar,
}

impl Witness {
    /// Whether `image ± radius` fits in every axis of `tile`.
    ///
    /// Coordinates of a unit vector of the image are at most 1 in modulus,
    /// so this is a sufficient test for containment of the ball.
    pub fn fits(&self, tile: &BoxSpec) -> bool {
        tile.dim() == self.image.dim()
            && tile.axes().iter().zip(self.image.coords()).all(|(axis, z)| {
                *axis.lower() <= z - &self.radius && z + &self.radius <= *axis.upper()
            })
    }
}

/// Interior witness for a tile of the pullback tiling.
///
/// For slab `j` of cell `(σ, ν, n)` the centre is the point of the segment
/// from 0 to `z(ν,n) = (2^(n+1) - 2/5)·T(x_ν)` whose `ν`-coordinate is
/// `2^n + a(j+1) + r` with `r = (a(j) - a(j+1))/2`, capped at the segment's
/// endpoint; the radius is `min{1, r}·ε(ν,n)`. The ball tile gets the
/// origin with radius 1/2.
pub fn witness(model: &EmbeddingModel, sched: &RefinementSchedule, id: TauId) -> Result<Witness> {
    let gamma = model.gamma();
    let TauId::Slab {
        sign,
        axis,
        level,
        slab,
    } = id
    else {
        return Ok(Witness {
            point: Point::origin(model.space.dim()),
            image: Point::origin(gamma),
            radius: Scalar::ratio(1, 2),
        });
    };
    if axis == 0 || axis > gamma {
        return Err(Error::InvalidAxis { axis, dim: gamma });
    }
    if !check_cell(sched, model, axis, level).passed() {
        return Err(Error::ScheduleRejected { axis, level });
    }
    let pair = &model.pairs[axis - 1];
    let diag = pair.f.apply(&pair.x);
    let upper = sched.a(axis, level, slab);
    let lower = sched.a(axis, level, slab + 1);
    let half_gap = (&upper - &lower) / Scalar::from_int(2);
    let target = Scalar::pow2(level as i64) + &lower + &half_gap;
    let endpoint = (Scalar::pow2(level as i64 + 1) - Scalar::ratio(2, 5)) * &diag;
    let along = target.min(endpoint);
    let scale = sign.apply(&(along / &diag));
    let point = pair.x.scaled(&scale);
    let image = embed(model, &point)?;
    let radius = half_gap.min(Scalar::one()) * sched.eps(axis, level);
    Ok(Witness {
        point,
        image,
        radius,
    })
}

/// Exact check that the witness ball of `id` lies in its tile.
pub fn verify_witness(model: &EmbeddingModel, sched: &RefinementSchedule, id: TauId) -> bool {
    let Ok(w) = witness(model, sched, id) else {
        return false;
    };
    match tau_spec(id, model.gamma(), sched) {
        Ok(tile) => w.radius.is_positive() && w.fits(&tile),
        Err(_) => false,
    }
}

/// Exact check of `‖x‖/2 ≤ ‖T(x)‖∞ ≤ ‖x‖`.
pub fn sandwich_holds(model: &EmbeddingModel, x: &Point) -> Result<bool> {
    Ok(sandwich_at(model, x, &embed(model, x)?))
}

/// The sandwich for `x` with its image `z = T(x)` already computed.
pub(crate) fn sandwich_at(model: &EmbeddingModel, x: &Point, z: &Point) -> bool {
    let norm = model.space.norm(x);
    let image = sup_norm(z);
    &norm / Scalar::from_int(2) <= image && image <= norm
}

/// Serialized space: `{dim, kind, generators?, extreme_points?}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub dim: usize,
    pub kind: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<Scalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extreme_points: Option<Vec<Vec<Scalar>>>,
}

impl TryFrom<SpaceFile> for NormedSpaceModel {
    type Error = Error;

    fn try_from(file: SpaceFile) -> Result<Self> {
        let space = match file.kind {
            NormKind::Sup => NormedSpaceModel::sup(file.dim)?,
            NormKind::Ell1 => NormedSpaceModel::ell1(file.dim)?,
            NormKind::Polytope => {
                let generators = file
                    .generators
                    .ok_or_else(|| Error::InvalidSpace("polytope space needs generators".into()))?
                    .into_iter()
                    .map(Functional)
                    .collect();
                let points = file
                    .extreme_points
                    .map(|ps| ps.into_iter().map(Point::new).collect::<Result<Vec<_>>>())
                    .transpose()?;
                let space = NormedSpaceModel::polytope(generators, points)?;
                if space.dim() != file.dim {
                    return Err(Error::DimensionMismatch {
                        expected: file.dim,
                        got: space.dim(),
                    });
                }
                return Ok(space);
            }
        };
        // Standard balls: supplied data, if any, must match the built-in sets.
        if let Some(gens) = file.generators {
            let matches = gens.len() == space.generators.len()
                && gens.iter().all(|g| space.generators.iter().any(|h| h.0 == *g));
            if !matches {
                return Err(Error::InvalidSpace(format!(
                    "generators do not match the standard {:?} ball",
                    space.kind
                )));
            }
        }
        if let Some(points) = file.extreme_points {
            let matches = points.len() == space.extreme_points.len()
                && points
                    .iter()
                    .all(|p| space.extreme_points.iter().any(|e| e.coords() == p.as_slice()));
            if !matches {
                return Err(Error::InvalidSpace(format!(
                    "extreme points do not match the standard {:?} ball",
                    space.kind
                )));
            }
        }
        Ok(space)
    }
}

impl From<&NormedSpaceModel> for SpaceFile {
    fn from(space: &NormedSpaceModel) -> Self {
        SpaceFile {
            dim: space.dim,
            kind: space.kind,
            generators: Some(space.generators.iter().map(|g| g.0.clone()).collect()),
            extreme_points: Some(
                space
                    .extreme_points
                    .iter()
                    .map(|p| p.coords().to_vec())
                    .collect(),
            ),
        }
    }
}

impl NormedSpaceModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

impl NormingSet {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Pairs export: an ordered list of `{x, f}` records.
pub fn pairs_to_json(model: &EmbeddingModel) -> String {
    serde_json::to_string_pretty(&model.pairs).expect("pairs serialize")
}

pub fn pairs_from_json(text: &str) -> Result<Vec<Pair>> {
    Ok(serde_json::from_str(text)?)
}

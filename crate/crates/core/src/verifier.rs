//! Sampling suites that check the covering, the refinement and the pullback
//! against exact predicates and a brute-force oracle.
//!
//! Every suite returns a [`Report`]; a report passes iff it records no
//! failures. Samples are drawn from a seeded ChaCha stream before any work
//! is done, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::covering::{locate_sigma, sigma_in_window, sigma_spec, SigmaId, Sign};
use crate::error::Result;
use crate::geometry::{sup_norm, BoxSpec, IntervalSpec, Point};
use crate::norming::{
    embed, pullback_locate, sandwich_at, verify_pairs, verify_witness, EmbeddingModel,
    PairBounds,
};
use crate::refinement::{
    locate_tau, tau_in_window, tau_spec, verify_schedule, PairCoordinates, RefinementSchedule,
    TauId,
};
use crate::scalar::Scalar;

/// Failures kept verbatim in a report; the rest are only counted.
const MAX_RECORDED_FAILURES: usize = 50;

/// Coordinates of the fixed adversarial grid.
pub const GRID_VALUES: [i64; 9] = [0, 1, -1, 2, -2, 4, -4, 8, -8];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    UniformRational,
    /// Every grid point with coordinates in [`GRID_VALUES`] inside the
    /// window, followed by `count` random points with a coordinate on a
    /// breakpoint `±2^n` or `±(2^n + a(ν,n,j))`.
    BoundaryAdversarial,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub window: BoxSpec,
    pub mode: SampleMode,
    pub max_denominator: u64,
}

impl SampleSpec {
    pub fn uniform(seed: u64, count: usize, window: BoxSpec) -> Self {
        SampleSpec {
            seed,
            count,
            window,
            mode: SampleMode::UniformRational,
            max_denominator: 1 << 16,
        }
    }

    pub fn adversarial(seed: u64, count: usize, window: BoxSpec) -> Self {
        SampleSpec {
            mode: SampleMode::BoundaryAdversarial,
            ..SampleSpec::uniform(seed, count, window)
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// The sample points described by `spec`. Breakpoints come from `sched`.
pub fn draw_samples(spec: &SampleSpec, sched: &RefinementSchedule) -> Vec<Point> {
    let mut rng = spec.rng();
    match spec.mode {
        SampleMode::UniformRational => (0..spec.count)
            .map(|_| uniform_point(&mut rng, &spec.window, spec.max_denominator))
            .collect(),
        SampleMode::BoundaryAdversarial => {
            let mut out = grid_points(&spec.window);
            out.extend(
                (0..spec.count)
                    .map(|_| boundary_point(&mut rng, &spec.window, sched, spec.max_denominator)),
            );
            out
        }
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: &Scalar, hi: &Scalar, max_den: u64) -> Scalar {
    let q = rng.gen_range(1..=max_den.max(1)) as i64;
    let qs = Scalar::from_int(q);
    let lo_n = (lo * &qs).ceil().to_i64().expect("window fits in i64");
    let hi_n = (hi * &qs).floor().to_i64().expect("window fits in i64");
    if lo_n > hi_n {
        return lo.clone();
    }
    Scalar::ratio(rng.gen_range(lo_n..=hi_n), q)
}

fn uniform_point(rng: &mut ChaCha8Rng, window: &BoxSpec, max_den: u64) -> Point {
    Point::new(
        window
            .axes()
            .iter()
            .map(|a| uniform_in(rng, a.lower(), a.upper(), max_den))
            .collect(),
    )
    .expect("window has a dimension")
}

/// All points of the adversarial grid inside `window`.
pub fn grid_points(window: &BoxSpec) -> Vec<Point> {
    let per_axis: Vec<Vec<Scalar>> = window
        .axes()
        .iter()
        .map(|a| {
            GRID_VALUES
                .iter()
                .map(|&v| Scalar::from_int(v))
                .filter(|v| a.contains(v))
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for values in &per_axis {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Scalar>| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|c| Point::new(c).expect("window has a dimension"))
        .collect()
}

fn clip(range: (Scalar, Scalar), axis: &IntervalSpec) -> (Scalar, Scalar) {
    let lo = range.0.max(axis.lower().clone());
    let hi = range.1.min(axis.upper().clone());
    if lo > hi {
        (axis.lower().clone(), axis.upper().clone())
    } else {
        (lo, hi)
    }
}

fn boundary_point(
    rng: &mut ChaCha8Rng,
    window: &BoxSpec,
    sched: &RefinementSchedule,
    max_den: u64,
) -> Point {
    let dim = window.dim();
    let radius = window.norm_radius();
    let mut top_level = 0u32;
    while Scalar::pow2(top_level as i64 + 1) < radius {
        top_level += 1;
    }
    for _ in 0..64 {
        let axis = rng.gen_range(1..=dim);
        let level = rng.gen_range(0..=top_level);
        let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let inner = Scalar::pow2(level as i64);
        let j = rng.gen_range(0..=9u32);
        let offset = if j == 9 {
            Scalar::zero()
        } else {
            sched.a(axis, level, j)
        };
        let value = sign.apply(&(&inner + offset));
        if !window.axis(axis).contains(&value) {
            continue;
        }
        let outer = Scalar::pow2(level as i64 + 1);
        let coords = (1..=dim)
            .map(|mu| {
                if mu == axis {
                    return value.clone();
                }
                let range = window.axis(mu);
                if rng.gen_range(0..4) == 3 {
                    let v = Scalar::from_int(GRID_VALUES[rng.gen_range(0..GRID_VALUES.len())]);
                    if range.contains(&v) {
                        return v;
                    }
                }
                let bound = if mu < axis { &inner } else { &outer };
                let (lo, hi) = clip((-bound, bound.clone()), range);
                uniform_in(rng, &lo, &hi, max_den)
            })
            .collect();
        return Point::new(coords).expect("window has a dimension");
    }
    uniform_point(rng, window, max_den)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Point>,
    pub ids: Vec<String>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
    pub stats: BTreeMap<String, u64>,
    pub elapsed_secs: f64,
}

impl Report {
    fn new(suite: &str) -> Self {
        Report {
            suite: suite.into(),
            checks: 0,
            failure_count: 0,
            failures: Vec::new(),
            stats: BTreeMap::new(),
            elapsed_secs: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn stat(&self, key: &str) -> u64 {
        self.stats.get(key).copied().unwrap_or(0)
    }

    /// Equality ignoring the elapsed time.
    pub fn same_outcome(&self, other: &Report) -> bool {
        self.suite == other.suite
            && self.checks == other.checks
            && self.failure_count == other.failure_count
            && self.failures == other.failures
            && self.stats == other.stats
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn check(&mut self) {
        self.checks += 1;
    }

    fn bump(&mut self, key: &str, by: u64) {
        *self.stats.entry(key.into()).or_insert(0) += by;
    }

    fn fail(&mut self, failure: Failure) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(failure);
        }
    }

    fn merge(&mut self, outcome: Outcome) {
        self.checks += outcome.checks;
        for (k, v) in outcome.stats {
            self.bump(k, v);
        }
        for f in outcome.failures {
            self.fail(f);
        }
    }

    fn finish(mut self, started: Instant) -> Self {
        self.elapsed_secs = started.elapsed().as_secs_f64();
        self
    }
}

/// Per-sample result, merged into the report in sample order.
#[derive(Default)]
struct Outcome {
    checks: u64,
    failures: Vec<Failure>,
    stats: Vec<(&'static str, u64)>,
}

impl Outcome {
    fn expect(&mut self, ok: bool, failure: impl FnOnce() -> Failure) {
        self.checks += 1;
        if !ok {
            self.failures.push(failure());
        }
    }
}

fn failure(check: &str, point: Option<&Point>, ids: &[String], message: impl Into<String>) -> Failure {
    Failure {
        check: check.into(),
        point: point.cloned(),
        ids: ids.to_vec(),
        message: message.into(),
    }
}

fn names<T: std::fmt::Display>(ids: &[T]) -> Vec<String> {
    ids.iter().map(|i| i.to_string()).collect()
}

/// Deliberate defects used to show that the suites are sensitive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Cells are treated as closed boxes.
    ClosedLid,
    /// `ε = 1/2` everywhere.
    InflatedEps,
    /// Breakpoints converge to `2^n/2` instead of 0.
    NonNullSchedule,
    /// The pair search accepts `|f_μ(x_ν)| ≤ 9/10`.
    LooseCrossBound,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::ClosedLid,
        Mutation::InflatedEps,
        Mutation::NonNullSchedule,
        Mutation::LooseCrossBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::ClosedLid => "closed-lid",
            Mutation::InflatedEps => "inflated-eps",
            Mutation::NonNullSchedule => "non-null-schedule",
            Mutation::LooseCrossBound => "loose-cross-bound",
        }
    }

    pub fn parse(text: &str) -> Option<Mutation> {
        Mutation::ALL.into_iter().find(|m| m.name() == text)
    }

    /// The schedule as seen under this mutation.
    pub fn schedule(self, base: &RefinementSchedule) -> RefinementSchedule {
        match self {
            Mutation::InflatedEps => base
                .clone()
                .with_uniform_eps(Scalar::ratio(1, 2))
                .expect("1/2 is a valid radius"),
            Mutation::NonNullSchedule => base
                .clone()
                .with_floor(Scalar::ratio(1, 2))
                .expect("1/2 is a valid floor"),
            _ => base.clone(),
        }
    }

    /// Bounds for the pair search under this mutation.
    pub fn pair_bounds(self) -> PairBounds {
        match self {
            Mutation::LooseCrossBound => PairBounds {
                cross: Scalar::ratio(9, 10),
                ..PairBounds::default()
            },
            _ => PairBounds::default(),
        }
    }
}

/// Members of the covering up to a level, for brute-force lookups.
struct SigmaOracle {
    dim: usize,
    closed_lid: bool,
    ball: BoxSpec,
    /// `levels[n]` holds the cells of level `n` with their closures.
    levels: Vec<Vec<(SigmaId, BoxSpec, BoxSpec)>>,
}

impl SigmaOracle {
    fn new(dim: usize, closed_lid: bool) -> Self {
        SigmaOracle {
            dim,
            closed_lid,
            ball: BoxSpec::cube(dim, Scalar::one()),
            levels: Vec::new(),
        }
    }

    fn member(&self, id: SigmaId) -> BoxSpec {
        let spec = sigma_spec(id, self.dim).expect("axis in range");
        if self.closed_lid {
            spec.closure()
        } else {
            spec
        }
    }

    fn ensure(&mut self, level: usize) {
        while self.levels.len() <= level {
            let n = self.levels.len() as u32;
            let cells = (1..=self.dim)
                .flat_map(|axis| [Sign::Plus, Sign::Minus].map(|s| SigmaId::cell(s, axis, n)))
                .map(|id| {
                    let member = self.member(id);
                    let closure = member.closure();
                    (id, member, closure)
                })
                .collect();
            self.levels.push(cells);
        }
    }

    /// Level bound: members of level `n` hold points of norm above `2^n`.
    fn top_level(p: &Point) -> usize {
        let norm = sup_norm(p);
        if norm <= Scalar::one() {
            return 0;
        }
        norm.floor_log2().expect("positive").0 as usize + 1
    }

    /// Every member (ball, then cells by level) whose set contains `p`,
    /// also scanning one level above the norm bound.
    fn containing(&self, p: &Point) -> Vec<SigmaId> {
        let top = Self::top_level(p).min(self.levels.len() - 1);
        let mut out = Vec::new();
        if self.ball.contains_unchecked(p) {
            out.push(SigmaId::Ball);
        }
        for level in &self.levels[..=top] {
            for (id, spec, _) in level {
                if spec.contains_unchecked(p) {
                    out.push(*id);
                }
            }
        }
        out
    }

    /// Cells whose closure holds `p`, as candidates for tile lookup.
    fn closure_candidates(&self, p: &Point) -> Vec<SigmaId> {
        let top = Self::top_level(p).min(self.levels.len() - 1);
        let mut out = Vec::new();
        for level in &self.levels[..=top] {
            for (id, _, closure) in level {
                if closure.contains_unchecked(p) {
                    out.push(*id);
                }
            }
        }
        out
    }

    fn prepare(&mut self, points: &[Point]) {
        let top = points.iter().map(Self::top_level).max().unwrap_or(0);
        self.ensure(top);
    }
}

/// Brute-force tile lookup: scan the slabs of every cell whose closure holds
/// `p` and keep the ones whose box contains it.
fn oracle_tau(
    p: &Point,
    sched: &RefinementSchedule,
    oracle: &SigmaOracle,
) -> std::result::Result<Vec<TauId>, String> {
    let dim = p.dim();
    let mut out = Vec::new();
    if oracle.ball.contains_unchecked(p) {
        out.push(TauId::Ball);
    }
    for id in oracle.closure_candidates(p) {
        let SigmaId::Cell { sign, axis, level } = id else {
            continue;
        };
        let s = sign.apply(p.coord(axis)) - Scalar::pow2(level as i64);
        let prefix = sched.prefix_len(axis, level);
        let limit = sched.limit(level);
        let mut j = 0u32;
        loop {
            let upper = sched.a(axis, level, j);
            if j >= prefix && (upper < s || s <= limit) {
                break;
            }
            let lower = sched.a(axis, level, j + 1);
            if lower <= s && s <= upper {
                let tile = TauId::slab(sign, axis, level, j);
                let spec = tau_spec(tile, dim, sched).map_err(|e| format!("{tile}: {e}"))?;
                if spec.contains_unchecked(p) {
                    out.push(tile);
                }
            }
            j += 1;
        }
    }
    out.sort();
    Ok(out)
}

fn half_width() -> Scalar {
    Scalar::pow2(-20)
}

/// Checks that every sample lies in exactly one member of the covering.
pub fn verify_sigma(dim: usize, spec: &SampleSpec) -> Result<Report> {
    verify_sigma_with(dim, spec, None)
}

pub fn verify_sigma_with(dim: usize, spec: &SampleSpec, mutation: Option<Mutation>) -> Result<Report> {
    let started = Instant::now();
    check_window(dim, &spec.window)?;
    let samples = draw_samples(spec, &RefinementSchedule::default());
    let mut oracle = SigmaOracle::new(dim, mutation == Some(Mutation::ClosedLid));
    oracle.prepare(&samples);
    let outcomes: Vec<Outcome> = samples
        .par_iter()
        .map(|p| sigma_sample(p, &oracle))
        .collect();
    let mut report = Report::new("sigma");
    report.bump("samples", samples.len() as u64);
    for o in outcomes {
        report.merge(o);
    }
    Ok(report.finish(started))
}

fn sigma_sample(p: &Point, oracle: &SigmaOracle) -> Outcome {
    let mut o = Outcome::default();
    let id = locate_sigma(p);
    let ids = [id.to_string()];
    o.expect(oracle.member(id).contains_unchecked(p), || {
        failure("covering", Some(p), &ids, "located member does not contain the point")
    });
    let holders = oracle.containing(p);
    o.expect(holders == [id], || {
        failure(
            "oracle",
            Some(p),
            &names(&holders),
            format!("brute force finds {} members, locate gives {id}", holders.len()),
        )
    });
    let around = BoxSpec::cube(p.dim(), half_width());
    let around = translate(&around, p);
    let nearby: Vec<SigmaId> = sigma_in_window(&around)
        .into_iter()
        .filter(|m| oracle.member(*m).contains_unchecked(p))
        .collect();
    o.expect(nearby == [id], || {
        failure(
            "disjointness",
            Some(p),
            &names(&nearby),
            "members meeting a neighbourhood that contain the point",
        )
    });
    o
}

fn translate(b: &BoxSpec, p: &Point) -> BoxSpec {
    BoxSpec::closed(
        b.axes()
            .iter()
            .zip(p.coords())
            .map(|(a, c)| (a.lower() + c, a.upper() + c))
            .collect(),
    )
    .expect("nondegenerate")
}

fn check_window(dim: usize, window: &BoxSpec) -> Result<()> {
    if window.dim() != dim {
        return Err(crate::error::Error::DimensionMismatch {
            expected: dim,
            got: window.dim(),
        });
    }
    Ok(())
}

/// Options for [`verify_tau`] beyond the samples.
#[derive(Clone, Debug)]
pub struct TauOptions {
    /// Random windows checked for pairwise disjointness.
    pub windows: usize,
    /// Tile cap for window enumeration.
    pub cap: usize,
    /// Points sampled inside each window for the completeness check.
    pub points_per_window: usize,
}

impl Default for TauOptions {
    fn default() -> Self {
        TauOptions {
            windows: 50,
            cap: 10_000,
            points_per_window: 20,
        }
    }
}

/// Checks covering, order 2, oracle agreement, disjointness in random
/// windows and tile bounds.
pub fn verify_tau(dim: usize, sched: &RefinementSchedule, spec: &SampleSpec) -> Result<Report> {
    verify_tau_with(dim, sched, spec, &TauOptions::default())
}

pub fn verify_tau_with(
    dim: usize,
    sched: &RefinementSchedule,
    spec: &SampleSpec,
    options: &TauOptions,
) -> Result<Report> {
    let started = Instant::now();
    check_window(dim, &spec.window)?;
    let samples = draw_samples(spec, sched);
    let mut oracle = SigmaOracle::new(dim, false);
    oracle.prepare(&samples);
    let outcomes: Vec<Outcome> = samples
        .par_iter()
        .map(|p| tau_sample(p, sched, &oracle, "covering"))
        .collect();
    let mut report = Report::new("tau");
    report.bump("samples", samples.len() as u64);
    for o in outcomes {
        report.merge(o);
    }
    window_checks(&mut report, dim, sched, spec, options);
    Ok(report.finish(started))
}

fn tau_sample(p: &Point, sched: &RefinementSchedule, oracle: &SigmaOracle, label: &str) -> Outcome {
    let mut o = Outcome::default();
    let ids = locate_tau(p, sched);
    let shown = names(&ids);
    o.expect((1..=2).contains(&ids.len()), || {
        failure(label, Some(p), &shown, format!("{} tiles hold the point", ids.len()))
    });
    if ids.len() == 2 {
        o.stats.push(("multiplicity_two", 1));
        let pair: Vec<_> = ids.iter().filter_map(|id| tau_spec(*id, p.dim(), sched).ok()).collect();
        o.expect(
            pair.len() == 2 && pair[0].interiors_disjoint(&pair[1]).unwrap_or(false),
            || failure("disjointness", Some(p), &shown, "the two tiles holding the point overlap"),
        );
    }
    for id in &ids {
        let holds = tau_spec(*id, p.dim(), sched)
            .map(|b| b.contains_unchecked(p))
            .unwrap_or(false);
        o.expect(holds, || {
            failure("containment", Some(p), &shown, format!("{id} does not contain the point"))
        });
    }
    match oracle_tau(p, sched, oracle) {
        Ok(expected) => o.expect(expected == ids, || {
            failure(
                "oracle",
                Some(p),
                &shown,
                format!("brute force gives [{}]", names(&expected).join(", ")),
            )
        }),
        Err(message) => o.expect(false, || failure("oracle", Some(p), &shown, message)),
    }
    o
}

fn window_checks(
    report: &mut Report,
    dim: usize,
    sched: &RefinementSchedule,
    spec: &SampleSpec,
    options: &TauOptions,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_0f_b0c5);
    // Adversarial draws open with the whole grid, which sits almost entirely
    // on faces; only the random tail is useful for centres.
    let count = options.windows.max(1) * 4;
    let mut centres = draw_samples(
        &SampleSpec {
            seed: spec.seed.wrapping_add(1),
            count,
            ..spec.clone()
        },
        sched,
    );
    let centres = centres.split_off(centres.len().saturating_sub(count));
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < options.windows && attempts < options.windows * 40 {
        attempts += 1;
        let centre = &centres[rng.gen_range(0..centres.len())];
        let gaps: Vec<Scalar> = centre.coords().iter().map(face_distance).collect();
        if gaps.iter().any(Scalar::is_zero) {
            report.bump("window_centres_on_faces", 1);
            continue;
        }
        let coords = centre
            .coords()
            .iter()
            .zip(&gaps)
            .map(|(c, gap)| {
                let h = Scalar::ratio(rng.gen_range(1..=64), 128).min(gap / Scalar::from_int(2));
                (c - &h, c + &h)
            })
            .collect();
        let window = BoxSpec::closed(coords).expect("positive widths");
        let tiles = match tau_in_window(&window, sched, options.cap) {
            crate::refinement::TileWindow::Complete(ids) => ids,
            crate::refinement::TileWindow::Overflow(_) => {
                report.check();
                report.fail(failure(
                    "window",
                    None,
                    &[],
                    format!("{window} avoids every face |t| = 2^k yet meets more than {} tiles", options.cap),
                ));
                continue;
            }
        };
        done += 1;
        report.bump("windows", 1);
        report.bump("window_tiles", tiles.len() as u64);
        let mut boxes = Vec::with_capacity(tiles.len());
        for id in &tiles {
            report.check();
            match tau_spec(*id, dim, sched) {
                Ok(b) => {
                    if let Err(message) = tile_bounds(*id, &b) {
                        report.fail(failure("bounds", None, &[id.to_string()], message));
                    }
                    boxes.push((*id, b));
                }
                Err(e) => report.fail(failure("bounds", None, &[id.to_string()], e.to_string())),
            }
        }
        for (i, (a, ab)) in boxes.iter().enumerate() {
            for (b, bb) in &boxes[i + 1..] {
                report.check();
                if !ab.interiors_disjoint(bb).unwrap_or(false) {
                    report.fail(failure(
                        "disjointness",
                        None,
                        &[a.to_string(), b.to_string()],
                        format!("interiors meet inside window {window}"),
                    ));
                }
            }
        }
        // Every tile holding a point of the window is listed.
        let mut inside = vec![];
        for _ in 0..options.points_per_window {
            inside.push(uniform_point(&mut rng, &window, spec.max_denominator));
        }
        for p in &inside {
            let ids = locate_tau(p, sched);
            report.check();
            if let Some(missing) = ids.iter().find(|id| !tiles.contains(id)) {
                report.fail(failure(
                    "window",
                    Some(p),
                    &names(&ids),
                    format!("{missing} holds the point but is not listed for {window}"),
                ));
            }
        }
    }
    if done < options.windows {
        report.check();
        report.fail(failure(
            "window",
            None,
            &[],
            format!("only {done} of {} windows could be placed", options.windows),
        ));
    }
}

/// Distance from `c` to the nearest accumulation value `±2^k`, `k ≥ 0`.
fn face_distance(c: &Scalar) -> Scalar {
    let s = c.abs();
    let mut best = (&s - Scalar::one()).abs();
    let mut face = Scalar::from_int(2);
    while face <= &s + &s {
        best = best.min((&s - &face).abs());
        face = &face + &face;
    }
    best
}

/// A tile is a nondegenerate box inside the closure of its parent, with
/// sup-radius at most `2^(n+1)`.
fn tile_bounds(id: TauId, tile: &BoxSpec) -> std::result::Result<(), String> {
    let dim = tile.dim();
    let parent = sigma_spec(id.parent(), dim).map_err(|e| e.to_string())?.closure();
    let within = tile
        .axes()
        .iter()
        .zip(parent.axes())
        .all(|(t, c)| c.lower() <= t.lower() && t.upper() <= c.upper());
    if !within {
        return Err(format!("{tile} leaves {parent}"));
    }
    let radius_bound = match id {
        TauId::Ball => Scalar::one(),
        TauId::Slab { level, .. } => Scalar::pow2(level as i64 + 1),
    };
    if tile.norm_radius() > radius_bound {
        return Err(format!("{tile} has radius above {radius_bound}"));
    }
    if tile.axes().iter().any(|a| !a.length().is_positive()) {
        return Err(format!("{tile} is degenerate"));
    }
    Ok(())
}

/// Bounds on the witness ids checked by [`verify_pullback`].
#[derive(Clone, Copy, Debug)]
pub struct WitnessBounds {
    pub max_level: u32,
    pub max_slab: u32,
}

impl Default for WitnessBounds {
    fn default() -> Self {
        WitnessBounds {
            max_level: 6,
            max_slab: 6,
        }
    }
}

/// Checks the pullback tiling: pair conditions and schedule first, then
/// covering, order and the sandwich on samples of `X`, then the witnesses.
pub fn verify_pullback(
    model: &EmbeddingModel,
    sched: &RefinementSchedule,
    spec: &SampleSpec,
    bounds: WitnessBounds,
) -> Result<Report> {
    let started = Instant::now();
    let mut report = Report::new("pullback");
    report.check();
    if let Err(e) = verify_pairs(model) {
        report.fail(failure("pairs", None, &[], e.to_string()));
        return Ok(report.finish(started));
    }
    let schedule = verify_schedule(sched, model, bounds.max_level);
    for cell in &schedule.cells {
        report.check();
        if !cell.passed() {
            report.fail(failure(
                "schedule",
                None,
                &[format!("cell({},{})", cell.axis, cell.level)],
                format!("{:?}", cell.violations),
            ));
        }
    }
    if !report.passed() {
        return Ok(report.finish(started));
    }
    check_window(model.space().dim(), &spec.window)?;
    let samples = match spec.mode {
        SampleMode::UniformRational => draw_samples(spec, sched),
        SampleMode::BoundaryAdversarial => pullback_boundary_samples(model, sched, spec),
    };
    let images: Vec<Point> = samples
        .iter()
        .map(|x| embed(model, x))
        .collect::<Result<_>>()?;
    let mut oracle = SigmaOracle::new(model.gamma(), false);
    oracle.prepare(&images);
    let outcomes: Vec<Outcome> = samples
        .par_iter()
        .zip(images.par_iter())
        .map(|(x, z)| {
            let mut o = tau_sample(z, sched, &oracle, "covering");
            let located = pullback_locate(model, sched, x).unwrap_or_default();
            let direct = locate_tau(z, sched);
            o.expect(located == direct, || {
                failure("pullback", Some(x), &names(&located), "pullback disagrees with the image")
            });
            o.expect(sandwich_at(model, x, z), || {
                failure("sandwich", Some(x), &[], format!("T(x) = {z}"))
            });
            o
        })
        .collect();
    report.bump("samples", samples.len() as u64);
    for o in outcomes {
        report.merge(o);
    }
    let mut ids = vec![TauId::Ball];
    for axis in 1..=model.gamma() {
        for level in 0..=bounds.max_level {
            for slab in 0..=bounds.max_slab {
                for sign in [Sign::Plus, Sign::Minus] {
                    ids.push(TauId::slab(sign, axis, level, slab));
                }
            }
        }
    }
    let verdicts: Vec<bool> = ids
        .par_iter()
        .map(|id| verify_witness(model, sched, *id))
        .collect();
    for (id, ok) in ids.iter().zip(verdicts) {
        report.check();
        if !ok {
            report.fail(failure("witness", None, &[id.to_string()], "witness ball leaves its tile"));
        }
    }
    report.bump("witnesses", ids.len() as u64);
    Ok(report.finish(started))
}

/// Points `±(2^n + a(ν,n,j))/f_ν(x_ν)·x_ν` whose image sits on a breakpoint
/// of axis `ν`, plus the grid.
fn pullback_boundary_samples(
    model: &EmbeddingModel,
    sched: &RefinementSchedule,
    spec: &SampleSpec,
) -> Vec<Point> {
    let mut rng = spec.rng();
    let mut out = grid_or_subset(&mut rng, &spec.window, spec.count);
    let wanted = out.len() + spec.count;
    let radius = spec.window.norm_radius();
    let mut attempts = 0;
    while out.len() < wanted && attempts < spec.count * 20 {
        attempts += 1;
        let axis = rng.gen_range(1..=model.gamma());
        let level = rng.gen_range(0..=3u32);
        let j = rng.gen_range(0..=9u32);
        let offset = if j == 9 { Scalar::zero() } else { sched.a(axis, level, j) };
        let target = Scalar::pow2(level as i64) + offset;
        let pair = &model.pairs()[axis - 1];
        let scale = target / pair.f.apply(&pair.x);
        let sign = if rng.gen_bool(0.5) { Scalar::one() } else { -Scalar::one() };
        let x = pair.x.scaled(&(scale * sign));
        if sup_norm(&x) <= radius && spec.window.contains_unchecked(&x) {
            out.push(x);
        }
    }
    out
}

/// The whole grid when it has at most `count` points, otherwise `count`
/// grid points drawn at random. The source space can have more axes than
/// the grid can afford to enumerate.
fn grid_or_subset(rng: &mut ChaCha8Rng, window: &BoxSpec, count: usize) -> Vec<Point> {
    let per_axis: Vec<Vec<Scalar>> = window
        .axes()
        .iter()
        .map(|a| {
            GRID_VALUES
                .iter()
                .map(|&v| Scalar::from_int(v))
                .filter(|v| a.contains(v))
                .collect()
        })
        .collect();
    let size = per_axis.iter().try_fold(1usize, |n, v| n.checked_mul(v.len()));
    if size.is_some_and(|n| n <= count) {
        return grid_points(window);
    }
    (0..count)
        .map(|_| {
            let coords = per_axis
                .iter()
                .map(|v| v[rng.gen_range(0..v.len())].clone())
                .collect();
            Point::new(coords).expect("window has a dimension")
        })
        .collect()
}

/// The schedule checks as a report.
pub fn verify_schedule_suite(
    sched: &RefinementSchedule,
    pairs: &dyn PairCoordinates,
    max_level: u32,
) -> Report {
    let started = Instant::now();
    let mut report = Report::new("schedule");
    let result = verify_schedule(sched, pairs, max_level);
    let min_eps = result.cells.iter().map(|c| c.eps_headroom.clone()).min();
    let min_a1 = result.cells.iter().map(|c| c.a1_headroom.clone()).min();
    for cell in &result.cells {
        report.check();
        if !cell.passed() {
            report.fail(failure(
                "schedule",
                None,
                &[format!("cell({},{})", cell.axis, cell.level)],
                serde_json::to_string(&cell.violations).expect("serializes"),
            ));
        }
    }
    report.bump("cells", result.cells.len() as u64);
    if let (Some(e), Some(a)) = (min_eps, min_a1) {
        // Margins are rational; recorded in units of 1/10000 rounded down.
        let scaled = |x: Scalar| (x * Scalar::from_int(10_000)).floor().to_i64().unwrap_or(0).max(0) as u64;
        report.bump("min_eps_headroom_e4", scaled(e));
        report.bump("min_a1_headroom_e4", scaled(a));
    }
    report.finish(started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norming::{build_pairs, NormedSpaceModel, NormingSet};
    use crate::refinement::{IdentityPairs, WorstCasePairs};

    fn cube(dim: usize, r: i64) -> BoxSpec {
        BoxSpec::cube(dim, Scalar::from_int(r))
    }

    #[test]
    fn samples_are_deterministic_and_inside() {
        let spec = SampleSpec::uniform(3, 200, cube(2, 16));
        let sched = RefinementSchedule::default();
        let a = draw_samples(&spec, &sched);
        assert_eq!(a, draw_samples(&spec, &sched));
        assert!(a.iter().all(|p| spec.window.contains_unchecked(p)));
        assert!(a.iter().all(|p| p.coords().iter().all(|c| c.denom() <= &(1u32 << 16).into())));
        let other = draw_samples(&SampleSpec::uniform(4, 200, cube(2, 16)), &sched);
        assert_ne!(a, other);
    }

    #[test]
    fn adversarial_samples_include_grid_and_breakpoints() {
        let spec = SampleSpec::adversarial(1, 100, cube(2, 16));
        let sched = RefinementSchedule::default();
        let pts = draw_samples(&spec, &sched);
        assert_eq!(pts.len(), 81 + 100);
        assert_eq!(grid_points(&cube(1, 4)).len(), 7);
        assert!(pts[81..].iter().all(|p| p.coords().iter().any(|c| {
            let s = c.abs();
            (0..5).any(|n| {
                let top = Scalar::pow2(n);
                s == top || (0..9).any(|j| s == &top + sched.a(1, n as u32, j))
            })
        })));
    }

    #[test]
    fn sigma_suite_passes() {
        let r = verify_sigma(2, &SampleSpec::uniform(9, 500, cube(2, 16))).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        let r = verify_sigma(1, &SampleSpec::adversarial(9, 50, cube(1, 8))).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn sigma_suite_catches_closed_lid() {
        let r = verify_sigma_with(1, &SampleSpec::adversarial(9, 0, cube(1, 4)), Some(Mutation::ClosedLid))
            .unwrap();
        assert!(!r.passed());
        assert!(r.failures.iter().any(|f| f.check == "oracle" && f.ids.len() == 2));
    }

    #[test]
    fn tau_suite_passes_and_finds_double_points() {
        let sched = RefinementSchedule::default();
        let options = TauOptions {
            windows: 5,
            ..TauOptions::default()
        };
        let r = verify_tau_with(2, &sched, &SampleSpec::adversarial(5, 300, cube(2, 8)), &options)
            .unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert!(r.stat("multiplicity_two") > 0);
        assert_eq!(r.stat("windows"), 5);
    }

    #[test]
    fn tau_suite_catches_broken_schedules() {
        let options = TauOptions {
            windows: 3,
            ..TauOptions::default()
        };
        let spec = SampleSpec::uniform(2, 300, cube(2, 8));
        let floor = Mutation::NonNullSchedule.schedule(&RefinementSchedule::default());
        let r = verify_tau_with(2, &floor, &spec, &options).unwrap();
        assert!(!r.passed());
        assert!(r.failures.iter().any(|f| f.check == "covering"));

        let bumpy = RefinementSchedule::default()
            .with_breakpoints(1, 0, vec![Scalar::ratio(1, 10), Scalar::ratio(1, 2)])
            .unwrap();
        let r = verify_tau_with(2, &bumpy, &SampleSpec::adversarial(2, 300, cube(2, 2)), &options)
            .unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn reports_are_reproducible() {
        let sched = RefinementSchedule::default();
        let options = TauOptions {
            windows: 2,
            ..TauOptions::default()
        };
        let spec = SampleSpec::adversarial(11, 50, cube(2, 4));
        let a = verify_tau_with(2, &sched, &spec, &options).unwrap();
        let b = verify_tau_with(2, &sched, &spec, &options).unwrap();
        assert!(a.same_outcome(&b));
    }

    #[test]
    fn pullback_identity_matches_tau() {
        let sched = RefinementSchedule::default();
        let model = crate::norming::EmbeddingModel::coordinate(2).unwrap();
        let spec = SampleSpec::uniform(4, 300, cube(2, 8));
        let bounds = WitnessBounds {
            max_level: 2,
            max_slab: 2,
        };
        let p = verify_pullback(&model, &sched, &spec, bounds).unwrap();
        let t = verify_tau_with(
            2,
            &sched,
            &spec,
            &TauOptions {
                windows: 0,
                ..TauOptions::default()
            },
        )
        .unwrap();
        assert!(p.passed() && t.passed(), "{}", p.to_json());
        assert_eq!(p.stat("multiplicity_two"), t.stat("multiplicity_two"));
        assert_eq!(p.stat("samples"), t.stat("samples"));
    }

    #[test]
    fn pullback_ell1_passes() {
        let l1 = NormedSpaceModel::ell1(2).unwrap();
        let model = build_pairs(&l1, &NormingSet::sign_vectors(2)).unwrap();
        let sched = RefinementSchedule::default();
        let bounds = WitnessBounds {
            max_level: 2,
            max_slab: 2,
        };
        let r = verify_pullback(&model, &sched, &SampleSpec::uniform(1, 200, cube(2, 8)), bounds)
            .unwrap();
        assert!(r.passed(), "{}", r.to_json());
        let r = verify_pullback(&model, &sched, &SampleSpec::adversarial(1, 200, cube(2, 8)), bounds)
            .unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn pullback_stops_on_bad_pairs_or_schedule() {
        let sched = RefinementSchedule::default();
        let l1 = NormedSpaceModel::ell1(2).unwrap();
        let loose = crate::norming::build_pairs_with(
            &l1,
            &NormingSet::sign_vectors(2),
            &Mutation::LooseCrossBound.pair_bounds(),
        )
        .unwrap();
        let spec = SampleSpec::uniform(1, 10, cube(2, 4));
        let r = verify_pullback(&loose, &sched, &spec, WitnessBounds::default()).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures[0].check, "pairs");
        assert_eq!(r.stat("samples"), 0);

        let model = crate::norming::EmbeddingModel::coordinate(2).unwrap();
        let wide = Mutation::InflatedEps.schedule(&sched);
        let r = verify_pullback(&model, &wide, &spec, WitnessBounds::default()).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures[0].check, "schedule");
    }

    #[test]
    fn schedule_suite() {
        let sched = RefinementSchedule::default();
        let r = verify_schedule_suite(&sched, &WorstCasePairs(3), 4);
        assert!(r.passed());
        assert_eq!(r.stat("cells"), 15);
        assert_eq!(r.stat("min_eps_headroom_e4"), 100);
        assert!(verify_schedule_suite(&sched, &IdentityPairs(2), 2).passed());
        let wide = Mutation::InflatedEps.schedule(&sched);
        assert!(!verify_schedule_suite(&wide, &IdentityPairs(2), 2).passed());
    }

    #[test]
    fn mutation_names_round_trip() {
        for m in Mutation::ALL {
            assert_eq!(Mutation::parse(m.name()), Some(m));
        }
        assert_eq!(Mutation::parse("nope"), None);
    }
}

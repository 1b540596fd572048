//! Reference predicates written straight from the definitions, sharing no
//! code with the library beyond the number type and the id enums.

#![allow(dead_code)]

use lidless::{Point, Scalar, SigmaId, Sign, TauId};

pub fn q(s: &str) -> Scalar {
    s.parse().expect("rational literal")
}

pub fn pt(coords: &[&str]) -> Point {
    Point::new(coords.iter().map(|c| q(c)).collect()).unwrap()
}

pub fn two_to(n: u32) -> Scalar {
    Scalar::from_int(1i64 << n)
}

/// Default breakpoints `2^n / 10^j`.
pub fn default_a(level: u32, j: u32) -> Scalar {
    two_to(level) / Scalar::from_int(10).powi(j)
}

fn signed(p: &Point, sign: Sign) -> Vec<Scalar> {
    p.coords()
        .iter()
        .map(|c| if sign == Sign::Plus { c.clone() } else { -c })
        .collect()
}

fn in_ball(p: &Point) -> bool {
    p.coords().iter().all(|c| c.abs() <= Scalar::one())
}

/// Membership of `t` (coordinates already multiplied by the sign) in the
/// positive cell, or in its slab `[2^n + a(j+1), 2^n + a(j)]` along `axis`.
fn in_positive(t: &[Scalar], axis: usize, level: u32, along: Option<(Scalar, Scalar)>) -> bool {
    let inner = two_to(level);
    let outer = two_to(level + 1);
    t.iter().enumerate().all(|(i, c)| {
        let mu = i + 1;
        if mu < axis {
            c.abs() <= inner
        } else if mu == axis {
            match &along {
                None => *c > inner && *c <= outer,
                Some((lo, hi)) => c >= lo && c <= hi,
            }
        } else {
            c.abs() <= outer
        }
    })
}

/// Membership in the closed unit ball or in a lidless cell.
pub fn in_member(p: &Point, id: SigmaId) -> bool {
    match id {
        SigmaId::Ball => in_ball(p),
        SigmaId::Cell { sign, axis, level } => in_positive(&signed(p, sign), axis, level, None),
    }
}

/// Every member with level at most `max_level` containing `p`.
pub fn members_containing(p: &Point, max_level: u32) -> Vec<SigmaId> {
    let mut out = Vec::new();
    if in_ball(p) {
        out.push(SigmaId::Ball);
    }
    let plus = signed(p, Sign::Plus);
    let minus = signed(p, Sign::Minus);
    for level in 0..=max_level {
        for axis in 1..=p.dim() {
            for (sign, t) in [(Sign::Plus, &plus), (Sign::Minus, &minus)] {
                if in_positive(t, axis, level, None) {
                    out.push(SigmaId::Cell { sign, axis, level });
                }
            }
        }
    }
    out
}

fn slab_bounds(level: u32, slab: u32) -> (Scalar, Scalar) {
    let inner = two_to(level);
    (&inner + default_a(level, slab + 1), &inner + default_a(level, slab))
}

/// Membership in a closed slab of the default refinement.
pub fn in_default_tile(p: &Point, id: TauId) -> bool {
    match id {
        TauId::Ball => in_ball(p),
        TauId::Slab { sign, axis, level, slab } => {
            in_positive(&signed(p, sign), axis, level, Some(slab_bounds(level, slab)))
        }
    }
}

/// Every tile of the default refinement with level at most `max_level`
/// containing `p`, sorted.
pub fn default_tiles_containing(p: &Point, max_level: u32) -> Vec<TauId> {
    let mut out = Vec::new();
    if in_ball(p) {
        out.push(TauId::Ball);
    }
    let plus = signed(p, Sign::Plus);
    let minus = signed(p, Sign::Minus);
    for level in 0..=max_level {
        let inner = two_to(level);
        for axis in 1..=p.dim() {
            for (sign, t) in [(Sign::Plus, &plus), (Sign::Minus, &minus)] {
                let s = &t[axis - 1] - &inner;
                if !s.is_positive() || s > inner {
                    continue;
                }
                let mut j = 0;
                while default_a(level, j) >= s {
                    if in_positive(t, axis, level, Some(slab_bounds(level, j))) {
                        out.push(TauId::Slab { sign, axis, level, slab: j });
                    }
                    j += 1;
                }
            }
        }
    }
    out.sort();
    out
}

pub fn sup(x: &[Scalar]) -> Scalar {
    x.iter().map(Scalar::abs).max().unwrap_or_else(Scalar::zero)
}

pub fn ell1(x: &[Scalar]) -> Scalar {
    x.iter().map(Scalar::abs).sum()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `rows · x = rhs` for a square system, `None` if singular.
pub fn solve(rows: &[Vec<Scalar>], rhs: &[Scalar]) -> Option<Vec<Scalar>> {
    let n = rows.len();
    let mut m: Vec<Vec<Scalar>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = Scalar::one() / &m[col][col];
        for k in col..=n {
            m[col][k] = &m[col][k] * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for k in col..=n {
                    let d = &factor * &m[col][k];
                    m[r][k] = &m[r][k] - d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Whether `max |f(x)| ≥ alpha·norm(x)` for all `x`, decided by listing
/// the vertices of `{x : |f(x)| ≤ alpha}` and checking they have norm at
/// most 1. Returns false when that set is unbounded.
pub fn is_norming(
    functionals: &[Vec<Scalar>],
    alpha: &Scalar,
    norm: impl Fn(&[Scalar]) -> Scalar,
) -> bool {
    let dim = functionals[0].len();
    let mut any_basis = false;
    for subset in combinations(functionals.len(), dim) {
        let rows: Vec<Vec<Scalar>> = subset.iter().map(|&i| functionals[i].clone()).collect();
        for mask in 0..(1u32 << dim) {
            let rhs: Vec<Scalar> = (0..dim)
                .map(|i| if mask >> i & 1 == 0 { alpha.clone() } else { -alpha })
                .collect();
            let Some(v) = solve(&rows, &rhs) else {
                break;
            };
            any_basis = true;
            let feasible = functionals.iter().all(|f| dot(f, &v).abs() <= *alpha);
            if feasible && norm(&v) > Scalar::one() {
                return false;
            }
        }
    }
    any_basis
}

/// Dual form of the same test: `alpha` times every extreme point of the
/// dual ball must lie in the hull of `±functionals`. A point in that hull
/// has a representation supported on a basis, so bases are searched until
/// one gives coefficients of total weight at most 1.
pub fn is_norming_dual(
    functionals: &[Vec<Scalar>],
    alpha: &Scalar,
    dual_extremes: &[Vec<Scalar>],
) -> bool {
    let dim = functionals[0].len();
    let bases = combinations(functionals.len(), dim);
    dual_extremes.iter().all(|e| {
        let target: Vec<Scalar> = e.iter().map(|c| c * alpha).collect();
        // Most aligned functionals first; bases come out in colex order, so
        // the early ones are built from those.
        let mut order: Vec<usize> = (0..functionals.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(dot(&functionals[i], &target).abs()));
        bases.iter().any(|s| {
            let rows: Vec<Vec<Scalar>> = (0..dim)
                .map(|k| s.iter().map(|&i| functionals[order[i]][k].clone()).collect())
                .collect();
            solve(&rows, &target)
                .is_some_and(|l| l.iter().map(Scalar::abs).sum::<Scalar>() <= Scalar::one())
        })
    })
}

/// Extreme points of the dual ball of the sup norm, `±e_k`.
pub fn sup_dual_extremes(dim: usize) -> Vec<Vec<Scalar>> {
    let mut out = Vec::new();
    for k in 0..dim {
        for s in [1, -1] {
            let mut e = vec![Scalar::zero(); dim];
            e[k] = Scalar::from_int(s);
            out.push(e);
        }
    }
    out
}

/// Extreme points of the dual ball of the l1 norm, the sign vectors.
pub fn ell1_dual_extremes(dim: usize) -> Vec<Vec<Scalar>> {
    (0..1u32 << dim)
        .map(|m| (0..dim).map(|k| Scalar::from_int(if m >> k & 1 == 0 { 1 } else { -1 })).collect())
        .collect()
}

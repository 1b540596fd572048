//! SVG drawings of the refined tiling of the plane.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::covering::{sigma_in_window, SigmaId};
use crate::error::{Error, Result};
use crate::geometry::BoxSpec;
use crate::refinement::{tau_spec, RefinementSchedule, TauId};
use crate::scalar::Scalar;

/// What to draw and how.
#[derive(Clone, Debug)]
pub struct RenderSpec {
    pub window: BoxSpec,
    pub max_slab: u32,
    /// Longest side of the picture in pixels.
    pub size: u32,
    pub stroke_width: f64,
    pub labels: bool,
}

impl RenderSpec {
    pub fn new(window: BoxSpec, max_slab: u32) -> Result<Self> {
        if window.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: window.dim(),
            });
        }
        Ok(RenderSpec {
            window,
            max_slab,
            size: 800,
            stroke_width: 1.0,
            labels: false,
        })
    }
}

/// One drawn tile with its exact corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileRecord {
    pub id: TauId,
    pub lower: Vec<Scalar>,
    pub upper: Vec<Scalar>,
}

/// The ball tile and every slab with index at most `max_slab` meeting the
/// window, in covering order.
pub fn inventory(spec: &RenderSpec, sched: &RefinementSchedule) -> Result<Vec<TileRecord>> {
    let mut out = Vec::new();
    for member in sigma_in_window(&spec.window) {
        let ids: Vec<TauId> = match member {
            SigmaId::Ball => vec![TauId::Ball],
            SigmaId::Cell { sign, axis, level } => (0..=spec.max_slab)
                .map(|j| TauId::slab(sign, axis, level, j))
                .collect(),
        };
        for id in ids {
            let tile = tau_spec(id, 2, sched)?;
            if tile.intersects(&spec.window)? {
                out.push(TileRecord {
                    id,
                    lower: tile.axes().iter().map(|a| a.lower().clone()).collect(),
                    upper: tile.axes().iter().map(|a| a.upper().clone()).collect(),
                });
            }
        }
    }
    Ok(out)
}

fn fill(id: &TauId) -> &'static str {
    match id {
        TauId::Ball => "#d9d9d9",
        TauId::Slab { axis, slab, .. } => match (axis % 2, slab % 2) {
            (1, 0) => "#9ecae1",
            (1, _) => "#deebf7",
            (_, 0) => "#fdae6b",
            _ => "#fee6ce",
        },
    }
}

/// Renders the tiles as SVG 1.1. Output depends only on the arguments.
pub fn render_svg(spec: &RenderSpec, sched: &RefinementSchedule) -> Result<String> {
    let tiles = inventory(spec, sched)?;
    let wx = spec.window.axis(1);
    let wy = spec.window.axis(2);
    let (x0, x1) = (wx.lower().to_f64(), wx.upper().to_f64());
    let (y0, y1) = (wy.lower().to_f64(), wy.upper().to_f64());
    let scale = spec.size as f64 / (x1 - x0).max(y1 - y0);
    let width = (x1 - x0) * scale;
    let height = (y1 - y0) * scale;
    let px = |x: f64| (x - x0) * scale;
    let py = |y: f64| (y1 - y) * scale;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(svg, "<title>tiles in {}</title>", spec.window);
    let _ = writeln!(svg, r#"<metadata id="tile-inventory">"#);
    let _ = writeln!(svg, "{}", serde_json::to_string(&tiles)?);
    let _ = writeln!(svg, "</metadata>");
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="{:.3}" stroke-linejoin="miter">"#,
        spec.stroke_width
    );
    for t in &tiles {
        // Clip to the window.
        let lx = t.lower[0].clone().max(wx.lower().clone()).to_f64();
        let ux = t.upper[0].clone().min(wx.upper().clone()).to_f64();
        let ly = t.lower[1].clone().max(wy.lower().clone()).to_f64();
        let uy = t.upper[1].clone().min(wy.upper().clone()).to_f64();
        let _ = writeln!(
            svg,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"><title>{} [{}, {}] x [{}, {}]</title></rect>"#,
            px(lx),
            py(uy),
            (ux - lx) * scale,
            (uy - ly) * scale,
            fill(&t.id),
            t.id,
            t.lower[0],
            t.upper[0],
            t.lower[1],
            t.upper[1],
        );
    }
    let _ = writeln!(svg, "</g>");
    if spec.labels {
        let _ = writeln!(svg, r#"<g font-family="monospace" font-size="10" text-anchor="middle">"#);
        for t in &tiles {
            let cx = (t.lower[0].clone().max(wx.lower().clone()).to_f64()
                + t.upper[0].clone().min(wx.upper().clone()).to_f64())
                / 2.0;
            let cy = (t.lower[1].clone().max(wy.lower().clone()).to_f64()
                + t.upper[1].clone().min(wy.upper().clone()).to_f64())
                / 2.0;
            let _ = writeln!(svg, r#"<text x="{:.3}" y="{:.3}">{}</text>"#, px(cx), py(cy), t.id);
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

/// Reads the tile inventory back out of a rendered SVG.
pub fn read_inventory(svg: &str) -> Result<Vec<TileRecord>> {
    let start = svg
        .find(r#"<metadata id="tile-inventory">"#)
        .ok_or_else(|| Error::Parse("no tile inventory".into()))?;
    let body = &svg[start..];
    let open = body.find('\n').ok_or_else(|| Error::Parse("truncated inventory".into()))? + 1;
    let close = body
        .find("</metadata>")
        .ok_or_else(|| Error::Parse("unterminated inventory".into()))?;
    Ok(serde_json::from_str(body[open..close].trim())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(window: &str, j: u32) -> RenderSpec {
        RenderSpec::new(BoxSpec::parse_window(window).unwrap(), j).unwrap()
    }

    #[test]
    fn unit_window_shows_only_the_ball() {
        let sched = RefinementSchedule::default();
        let tiles = inventory(&spec("-1,1,-1,1", 3), &sched).unwrap();
        // The square meets the lids of level-0 cells only along their
        // open sides, so nothing else is drawn.
        assert_eq!(tiles.iter().map(|t| t.id).collect::<Vec<_>>(), vec![TauId::Ball]);
    }

    #[test]
    fn four_by_four_inventory() {
        let sched = RefinementSchedule::default();
        let tiles = inventory(&spec("-4,4,-4,4", 3), &sched).unwrap();
        assert_eq!(tiles.len(), 1 + 8 * 4);
        assert!(tiles.iter().all(|t| match t.id {
            TauId::Ball => true,
            TauId::Slab { level, slab, .. } => level <= 1 && slab <= 3,
        }));
    }

    #[test]
    fn accumulating_window_lists_every_requested_slab() {
        let sched = RefinementSchedule::default();
        let tiles = inventory(&spec("1,3/2,0,1/2", 12), &sched).unwrap();
        let slabs = tiles.iter().filter(|t| matches!(t.id, TauId::Slab { .. })).count();
        assert_eq!(slabs, 13);
    }

    #[test]
    fn output_is_stable_and_round_trips() {
        let sched = RefinementSchedule::default();
        let s = spec("-4,4,-4,4", 3);
        let a = render_svg(&s, &sched).unwrap();
        assert_eq!(a, render_svg(&s, &sched).unwrap());
        assert_eq!(read_inventory(&a).unwrap(), inventory(&s, &sched).unwrap());
        assert_eq!(a.matches("<rect").count(), 33);
    }

    #[test]
    fn rejects_non_planar_windows() {
        assert!(RenderSpec::new(BoxSpec::cube(3, Scalar::one()), 1).is_err());
    }
}

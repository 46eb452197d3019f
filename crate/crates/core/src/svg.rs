//! Hand-emitted SVG figures: the two foliations with a pair of marked orbits, and
//! the Reeb component with its boundary, centre ray, strip and collar.

use std::fmt::Write;

use crate::error::Result;
use crate::geometry::{sigma, PlanePoint};
use crate::global_dynamics::{Bundle, Dynamics};
use crate::local_map::LocalMap;
use crate::verifier::SampleBox;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Affine map from a plane window to pixel coordinates, `y` pointing up.
#[derive(Debug, Clone, Copy)]
struct Canvas {
    view: SampleBox,
    sx: f64,
    sy: f64,
    height: f64,
}

impl Canvas {
    fn new(view: SampleBox, aspect: f64) -> Self {
        let sx = (WIDTH - 2.0 * MARGIN) / (view.x_max - view.x_min);
        let sy = sx * aspect;
        let height = (view.y_max - view.y_min) * sy + 2.0 * MARGIN;
        Canvas { view, sx, sy, height }
    }

    fn px(&self, p: PlanePoint) -> (f64, f64) {
        (
            MARGIN + (p.x - self.view.x_min) * self.sx,
            self.height - MARGIN - (p.y - self.view.y_min) * self.sy,
        )
    }

    fn header(&self, out: &mut String, title: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
            w = WIDTH,
            h = self.height
        );
        let _ = writeln!(out, "<title>{title}</title>");
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    }

    /// Frame, the coordinate axes where visible and tick labels.
    fn axes(&self, out: &mut String, x_tick: f64, y_tick: f64) {
        let v = self.view;
        let (x0, y0) = self.px(PlanePoint::new(v.x_min, v.y_max));
        let (x1, y1) = self.px(PlanePoint::new(v.x_max, v.y_min));
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#888" stroke-width="0.5"/>"##,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(out, r##"<g stroke="#888" stroke-width="0.75" id="axes">"##);
        if v.y_min <= 0.0 && 0.0 <= v.y_max {
            self.line(out, PlanePoint::new(v.x_min, 0.0), PlanePoint::new(v.x_max, 0.0), "");
        }
        if v.x_min <= 0.0 && 0.0 <= v.x_max {
            self.line(out, PlanePoint::new(0.0, v.y_min), PlanePoint::new(0.0, v.y_max), "");
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r##"<g font-family="sans-serif" font-size="10" fill="#444" id="ticks">"##);
        let mut k = (v.x_min / x_tick).ceil() as i64;
        while k as f64 * x_tick <= v.x_max {
            let (x, _) = self.px(PlanePoint::new(k as f64 * x_tick, v.y_min));
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 14.0, fmt_tick(k as f64 * x_tick));
            k += 1;
        }
        let mut k = (v.y_min / y_tick).ceil() as i64;
        while k as f64 * y_tick <= v.y_max {
            let (_, y) = self.px(PlanePoint::new(v.x_min, k as f64 * y_tick));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 4.0, y + 3.5, fmt_tick(k as f64 * y_tick));
            k += 1;
        }
        let _ = writeln!(out, "</g>");
    }

    fn line(&self, out: &mut String, a: PlanePoint, b: PlanePoint, attrs: &str) {
        let (x0, y0) = self.px(a);
        let (x1, y1) = self.px(b);
        let _ = writeln!(out, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}"{attrs}/>"#);
    }

    /// Polyline pieces of `pts` inside the view.
    fn polyline(&self, out: &mut String, pts: &[PlanePoint], attrs: &str) {
        let mut run: Vec<(f64, f64)> = Vec::new();
        let mut flush = |run: &mut Vec<(f64, f64)>| {
            if run.len() >= 2 {
                let coords: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(out, r#"<polyline points="{}"{attrs}/>"#, coords.join(" "));
            }
            run.clear();
        };
        for p in pts {
            if p.is_finite() && self.view.contains(*p) {
                run.push(self.px(*p));
            } else {
                flush(&mut run);
            }
        }
        flush(&mut run);
    }

    fn label(&self, out: &mut String, p: PlanePoint, dx: f64, dy: f64, text: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{text}</text>"#, x + dx, y + dy);
    }
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

/// Contents of the foliation figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationPlot {
    pub view: SampleBox,
    /// A solid unstable and a dotted stable leaf are drawn through each seed.
    pub leaf_seeds: Vec<PlanePoint>,
    /// Arclength traced on each side of a seed.
    pub leaf_length: f64,
    /// Start of the forward orbit `p_i`.
    pub p_start: Option<PlanePoint>,
    /// Start of the backward orbit `q_i`.
    pub q_start: Option<PlanePoint>,
    pub orbit_steps: usize,
}

impl FoliationPlot {
    /// Axes only.
    pub fn empty(view: SampleBox) -> Self {
        FoliationPlot {
            view,
            leaf_seeds: Vec::new(),
            leaf_length: 1.0,
            p_start: None,
            q_start: None,
            orbit_steps: 0,
        }
    }

    /// Leaves through a staggered lattice of seeds covering `view`, with `p_i`
    /// starting at the lower left and `q_i` at its mirror image.
    pub fn over(view: SampleBox) -> Self {
        let w = view.x_max - view.x_min;
        let h = view.y_max - view.y_min;
        let spacing = w.max(h) / 16.0;
        let mut seeds = Vec::new();
        let (nx, ny) = ((w / spacing) as i64, (h / spacing) as i64);
        for j in 0..ny {
            for i in 0..nx {
                if (i + j) % 2 == 0 {
                    seeds.push(PlanePoint::new(
                        view.x_min + (i as f64 + 0.5) * spacing,
                        view.y_min + (j as f64 + 0.4) * spacing,
                    ));
                }
            }
        }
        let p = PlanePoint::new(view.x_min + 0.15 * w, view.y_min + 0.6 * h);
        FoliationPlot {
            view,
            leaf_seeds: seeds,
            leaf_length: 2.0 * spacing,
            p_start: Some(p),
            q_start: Some(sigma(p)),
            orbit_steps: 6,
        }
    }
}

impl Default for FoliationPlot {
    fn default() -> Self {
        FoliationPlot::over(SampleBox::new(-4.0, 6.0, -4.0, 4.0).expect("valid view"))
    }
}

pub fn foliation_svg(d: &Dynamics, plot: &FoliationPlot) -> Result<String> {
    plot.view.validate()?;
    let c = Canvas::new(plot.view, 1.0);
    let mut out = String::new();
    c.header(&mut out, "Unstable (solid) and stable (dotted) foliations");
    c.axes(&mut out, 1.0, 1.0);
    let step = (plot.leaf_length / 60.0).max(1e-3);
    let _ = writeln!(out, r##"<g id="unstable" fill="none" stroke="#1f4e9c" stroke-width="1">"##);
    for s in &plot.leaf_seeds {
        let leaf = d.leaf_trace(*s, Bundle::Unstable, plot.leaf_length, step)?;
        c.polyline(&mut out, &leaf, "");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r##"<g id="stable" fill="none" stroke="#b03a2e" stroke-width="1" stroke-dasharray="1.5,3" stroke-linecap="round">"##
    );
    for s in &plot.leaf_seeds {
        let leaf = d.leaf_trace(*s, Bundle::Stable, plot.leaf_length, step)?;
        c.polyline(&mut out, &leaf, "");
    }
    let _ = writeln!(out, "</g>");
    let orbits = [("p", plot.p_start, 1i64), ("q", plot.q_start, -1i64)];
    for (name, start, dir) in orbits {
        let Some(start) = start else { continue };
        let n = plot.orbit_steps as i64;
        let seg = if dir > 0 { d.orbit(start, 0, n)? } else { d.orbit(start, -n, 0)? };
        let mut pts = seg.points;
        if dir < 0 {
            pts.reverse();
        }
        let _ = writeln!(out, r##"<g id="orbit-{name}" fill="black" font-family="serif" font-size="12">"##);
        for (i, p) in pts.iter().enumerate() {
            if !plot.view.contains(*p) {
                continue;
            }
            let (x, y) = c.px(*p);
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
            c.label(&mut out, *p, 5.0, -5.0, &format!("{name}<tspan baseline-shift=\"sub\" font-size=\"9\">{i}</tspan>"));
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Window of the Reeb figure.
pub fn reeb_view() -> SampleBox {
    SampleBox::new(1.5, 12.0, -0.05, 0.55).expect("valid view")
}

/// Number of heights at which the boundary curve is sampled.
const REEB_SAMPLES: usize = 400;

/// Boundary curve `x = θ(y)` for `0 < y < ½` on a uniform height grid.
pub fn reeb_boundary(lm: &LocalMap, samples: usize) -> Result<Vec<PlanePoint>> {
    let geo = lm.geometry();
    (1..samples)
        .map(|i| {
            let y = 0.5 * i as f64 / samples as f64;
            Ok(PlanePoint::new(geo.theta(y)?, y))
        })
        .collect()
}

pub fn reeb_svg(lm: &LocalMap) -> Result<String> {
    let view = reeb_view();
    let c = Canvas::new(view, 10.0);
    let geo = lm.geometry();
    let delta = geo.flow().delta();
    let mut out = String::new();
    c.header(&mut out, "Reeb component");
    c.axes(&mut out, 1.0, 0.25);

    let boundary = reeb_boundary(lm, REEB_SAMPLES)?;
    // collar between its left edge and the boundary
    let mut collar: Vec<PlanePoint> = boundary
        .iter()
        .map(|p| PlanePoint::new(lm.collar_edge(p.y).clamp(view.x_min, view.x_max), p.y))
        .collect();
    collar.extend(boundary.iter().rev().map(|p| PlanePoint::new(p.x.min(view.x_max), p.y)));
    let coords: Vec<String> = collar
        .iter()
        .map(|p| {
            let (x, y) = c.px(*p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(out, r##"<polygon id="collar" points="{}" fill="#f3d9a4" stroke="none"/>"##, coords.join(" "));

    let (ex0, ey0) = c.px(PlanePoint::new(2.0, 0.25 + delta));
    let (ex1, ey1) = c.px(PlanePoint::new(4.0, 0.25 - delta));
    let _ = writeln!(
        out,
        r##"<rect id="strip" x="{ex0:.2}" y="{ey0:.2}" width="{:.2}" height="{:.2}" fill="#cfe3c8" stroke="#5a8f4e" stroke-width="0.5"/>"##,
        ex1 - ex0,
        ey1 - ey0
    );

    let _ = writeln!(out, r##"<g id="interior-leaves" fill="none" stroke="#1f4e9c" stroke-width="0.6">"##);
    for shift in 1..8 {
        let leaf: Vec<PlanePoint> = boundary
            .iter()
            .map(|p| PlanePoint::new(p.x + shift as f64, p.y))
            .collect();
        c.polyline(&mut out, &leaf, "");
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="boundary" fill="none" stroke="#1f4e9c" stroke-width="2">"##);
    c.polyline(&mut out, &boundary, "");
    let _ = writeln!(out, "</g>");
    c.line(
        &mut out,
        PlanePoint::new(4.0, 0.25),
        PlanePoint::new(view.x_max, 0.25),
        r##" id="centre-ray" stroke="#b03a2e" stroke-width="1.5""##,
    );

    let _ = writeln!(out, r#"<g font-family="serif" font-size="14" font-style="italic">"#);
    c.label(&mut out, PlanePoint::new(2.6, 0.25 + delta), 0.0, -4.0, "E");
    c.label(&mut out, PlanePoint::new(3.55, 0.33), 0.0, 0.0, "N");
    c.label(&mut out, PlanePoint::new(10.5, 0.25), 0.0, -5.0, "L");
    c.label(&mut out, PlanePoint::new(geo.theta(0.4)?, 0.4), 8.0, 14.0, "∂R");
    c.label(&mut out, PlanePoint::new(9.0, 0.42), 0.0, 0.0, "R");
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

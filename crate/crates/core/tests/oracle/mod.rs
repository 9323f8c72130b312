//! Brute-force reference implementations used only by tests. They share no
//! code with the library beyond the plain data types.
#![allow(dead_code)]

use thz_envsense_core::channel::ChannelParams;
use thz_envsense_core::raytrace::PathKind;
use thz_envsense_core::{Point, Scene};

const ENDPOINT_TOL_M: f64 = 1e-9;

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn sub(a: Point, b: Point) -> Point {
    Point::new(a.x - b.x, a.y - b.y)
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    cross(sub(b, a), sub(p, a)) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Even-odd ray casting toward +x, with points on an edge counted inside.
pub fn point_in_polygon(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Parameters `t` along `p→q` where the closed segments `p→q` and `a→b`
/// meet; collinear overlaps report both ends of the overlap.
fn segment_hits(p: Point, q: Point, a: Point, b: Point) -> Vec<f64> {
    let d = sub(q, p);
    let e = sub(b, a);
    let den = cross(d, e);
    let ap = sub(a, p);
    if den == 0.0 {
        if cross(ap, d) != 0.0 {
            return vec![];
        }
        let dd = d.x * d.x + d.y * d.y;
        let ta = (ap.x * d.x + ap.y * d.y) / dd;
        let bp = sub(b, p);
        let tb = (bp.x * d.x + bp.y * d.y) / dd;
        let (lo, hi) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
        return if lo <= hi {
            vec![lo, hi, 0.5 * (lo + hi)]
        } else {
            vec![]
        };
    }
    let t = cross(ap, e) / den;
    let u = cross(ap, d) / den;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        vec![t]
    } else {
        vec![]
    }
}

/// Open-segment blocking by edge intersection plus midpoint containment.
/// `skip_edge` is `(obstacle, edge)` excluded from the edge test.
pub fn segment_blocked(
    p: Point,
    q: Point,
    scene: &Scene,
    skip_edge: Option<(usize, usize)>,
) -> bool {
    let len = dist(p, q);
    let eps = ENDPOINT_TOL_M / len;
    let mid = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    for (oi, o) in scene.obstacles.iter().enumerate() {
        let v = o.vertices();
        for ei in 0..4 {
            if skip_edge == Some((oi, ei)) {
                continue;
            }
            let hits = segment_hits(p, q, v[ei], v[(ei + 1) % 4]);
            if hits.iter().any(|&t| t > eps && t < 1.0 - eps) {
                return true;
            }
        }
        if point_in_polygon(v, mid) {
            return true;
        }
    }
    false
}

fn mirror(p: Point, a: Point, b: Point) -> Point {
    // Rotate into the edge frame, flip the normal coordinate.
    let e = sub(b, a);
    let len = (e.x * e.x + e.y * e.y).sqrt();
    let (ux, uy) = (e.x / len, e.y / len);
    let r = sub(p, a);
    let along = r.x * ux + r.y * uy;
    let normal = -r.x * uy + r.y * ux;
    Point::new(
        a.x + along * ux + normal * uy,
        a.y + along * uy - normal * ux,
    )
}

#[derive(Clone, Copy, Debug)]
pub struct OraclePath {
    pub kind: PathKind,
    pub point: Option<Point>,
    pub length: f64,
    pub loss_db: f64,
}

/// Every candidate path: LOS, one reflection per edge (the receiver is
/// mirrored, unlike the library which mirrors the transmitter), one
/// diffraction per vertex.
pub fn trace_paths(scene: &Scene, rx: Point, params: &ChannelParams) -> Vec<OraclePath> {
    let tx = scene.bs_location;
    let mut out = Vec::new();
    if !segment_blocked(tx, rx, scene, None) {
        out.push(OraclePath {
            kind: PathKind::Los,
            point: None,
            length: dist(tx, rx),
            loss_db: 0.0,
        });
    }
    for (oi, o) in scene.obstacles.iter().enumerate() {
        let v = o.vertices();
        for ei in 0..4 {
            let (a, b) = (v[ei], v[(ei + 1) % 4]);
            let outward = |p: Point| cross(sub(b, a), sub(p, a)) < 0.0;
            if !outward(tx) || !outward(rx) {
                continue;
            }
            let rx_img = mirror(rx, a, b);
            let hits = segment_hits(tx, rx_img, a, b);
            let Some(&t) = hits.first() else { continue };
            let hit = Point::new(tx.x + t * (rx_img.x - tx.x), tx.y + t * (rx_img.y - tx.y));
            if segment_blocked(tx, hit, scene, Some((oi, ei)))
                || segment_blocked(hit, rx, scene, Some((oi, ei)))
            {
                continue;
            }
            out.push(OraclePath {
                kind: PathKind::Reflection,
                point: Some(hit),
                length: dist(tx, rx_img),
                loss_db: params.reflection_loss_db,
            });
        }
        for &vertex in v {
            if segment_blocked(tx, vertex, scene, None) || segment_blocked(vertex, rx, scene, None)
            {
                continue;
            }
            let length = dist(tx, vertex) + dist(vertex, rx);
            let detour = (length - dist(tx, rx)).max(0.0);
            out.push(OraclePath {
                kind: PathKind::Diffraction,
                point: Some(vertex),
                length,
                loss_db: params.diffraction_loss_db + 20.0 * (1.0 + detour).log10(),
            });
        }
    }
    out
}

/// Received power in watts from the closed-form link budget, evaluated
/// directly from the oracle's path list.
pub fn received_power_w(scene: &Scene, rx: Point, params: &ChannelParams) -> f64 {
    let tx = scene.bs_location;
    let lambda = 299_792_458.0 / params.carrier_hz;
    let g_side = 10f64.powf(params.sidelobe_gain_db / 10.0);
    let theta = params.beamwidth_rad;
    let g_main =
        (2.0 * std::f64::consts::PI - (2.0 * std::f64::consts::PI - theta) * g_side) / theta;
    let p_t = 10f64.powf(params.tx_power_dbm / 10.0) * 1e-3;
    let mut total = 10f64.powf(params.noise_dbm / 10.0) * 1e-3;
    for path in trace_paths(scene, rx, params) {
        let toward = path.point.unwrap_or(rx);
        let dep = (toward.y - tx.y).atan2(toward.x - tx.x);
        let mut off = (dep - params.beam_boresight_rad).rem_euclid(2.0 * std::f64::consts::PI);
        if off > std::f64::consts::PI {
            off = 2.0 * std::f64::consts::PI - off;
        }
        let g = if off <= 0.5 * theta { g_main } else { g_side };
        let fs = (lambda / (4.0 * std::f64::consts::PI * path.length)).powi(2)
            * (-params.absorption_per_m * path.length).exp();
        total += p_t * g * fs * 10f64.powf(-path.loss_db / 10.0);
    }
    total
}

/// Sutherland–Hodgman clip of `subject` by convex counter-clockwise `clip`.
pub fn clip_polygon(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let inside = |p: Point| cross(sub(b, a), sub(p, a)) >= 0.0;
        let input = std::mem::take(&mut output);
        if input.is_empty() {
            break;
        }
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let intersect = || {
                let d = sub(cur, prev);
                let t = cross(sub(b, a), sub(a, prev)) / cross(sub(b, a), d);
                Point::new(prev.x + t * d.x, prev.y + t * d.y)
            };
            match (inside(prev), inside(cur)) {
                (true, true) => output.push(cur),
                (true, false) => output.push(intersect()),
                (false, true) => {
                    output.push(intersect());
                    output.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    output
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| cross(poly[i], poly[(i + 1) % n]))
        .sum::<f64>()
        .abs()
        * 0.5
}

//! Single-interaction 2D ray tracing and RSS map composition.
//!
//! Every receiver gets at most one path per propagation feature: the direct
//! path, one specular reflection per obstacle edge (image-source method) and
//! one diffraction per obstacle vertex. Paths are treated as independent
//! single-ray clusters, so the received power is the plain sum of path powers
//! plus the noise floor.

use alloc::vec::Vec;

use thiserror::Error;

use crate::channel::{self, ChannelError, ChannelParams};
use crate::geometry::{self, Point};
use crate::scenario::{rasterize_obstacles, GridSpec, Scene};

/// Stored in place of obstacle cells when a map is written to disk.
pub const BLOCKED_FILE_DBM: f64 = -174.0;

/// Parametric slack at segment endpoints, in meters.
const ENDPOINT_TOL_M: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("receiver ({x}, {y}) lies inside an obstacle")]
    ReceiverInObstacle { x: f64, y: f64 },
    #[error("receiver ({x}, {y}) lies outside the scene area")]
    ReceiverOutsideArea { x: f64, y: f64 },
    #[error("transmitter lies inside an obstacle")]
    TransmitterInObstacle,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathKind {
    Los,
    Reflection,
    Diffraction,
}

/// Obstacle feature a path interacts with: an edge index for reflections,
/// a vertex index for diffractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Feature {
    pub obstacle: usize,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayPath {
    pub kind: PathKind,
    pub total_length: f64,
    pub interaction_point: Option<Point>,
    pub feature: Option<Feature>,
    pub extra_loss_db: f64,
}

impl RayPath {
    /// Direction the path leaves the transmitter, radians.
    pub fn departure_angle(&self, tx: Point, rx: Point) -> f64 {
        let first_hop = self.interaction_point.unwrap_or(rx);
        (first_hop - tx).angle()
    }

    /// Received power of this path alone, watts.
    pub fn power_w(
        &self,
        tx: Point,
        rx: Point,
        params: &ChannelParams,
    ) -> Result<f64, ChannelError> {
        let gain = channel::beam_gain(self.departure_angle(tx, rx), params)
            * channel::free_space_gain(self.total_length, params)?
            * channel::db_to_linear(-self.extra_loss_db);
        Ok(params.tx_power_w() * gain)
    }
}

/// Whether the open segment `(p, q)` meets any obstacle, interior or boundary.
/// Contact only at an endpoint does not block.
pub fn segment_blocked(p: Point, q: Point, scene: &Scene) -> bool {
    segment_blocked_except(p, q, scene, None)
}

/// As [`segment_blocked`], ignoring obstacle `skip`.
pub fn segment_blocked_except(p: Point, q: Point, scene: &Scene, skip: Option<usize>) -> bool {
    let len = p.distance(q);
    if len == 0.0 {
        return false;
    }
    let eps = ENDPOINT_TOL_M / len;
    scene
        .obstacles
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .any(|(_, o)| match geometry::clip_segment(o.vertices(), p, q) {
            Some((t0, t1)) => t1 > eps && t0 < 1.0 - eps,
            None => false,
        })
}

struct EdgeImage {
    feature: Feature,
    a: Point,
    b: Point,
    image: Point,
}

struct TxVisibleVertex {
    feature: Feature,
    vertex: Point,
}

/// Per-scene tracer; transmitter-side work (image sources, vertex
/// visibility) is done once and reused for every receiver.
pub struct Tracer<'a> {
    scene: &'a Scene,
    params: &'a ChannelParams,
    images: Vec<EdgeImage>,
    visible_vertices: Vec<TxVisibleVertex>,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene, params: &'a ChannelParams) -> Result<Self, TraceError> {
        params.validate()?;
        let tx = scene.bs_location;
        if scene.is_inside_obstacle(tx) {
            return Err(TraceError::TransmitterInObstacle);
        }
        let mut images = Vec::new();
        let mut visible_vertices = Vec::new();
        for (oi, o) in scene.obstacles.iter().enumerate() {
            for (ei, (a, b)) in o.edges().enumerate() {
                // Only edges that face the transmitter can reflect it.
                if (b - a).cross(tx - a) < 0.0 {
                    images.push(EdgeImage {
                        feature: Feature {
                            obstacle: oi,
                            index: ei,
                        },
                        a,
                        b,
                        image: tx.reflect_across(a, b),
                    });
                }
            }
            for (vi, &v) in o.vertices().iter().enumerate() {
                if !segment_blocked(tx, v, scene) {
                    visible_vertices.push(TxVisibleVertex {
                        feature: Feature {
                            obstacle: oi,
                            index: vi,
                        },
                        vertex: v,
                    });
                }
            }
        }
        Ok(Self {
            scene,
            params,
            images,
            visible_vertices,
        })
    }

    pub fn transmitter(&self) -> Point {
        self.scene.bs_location
    }

    /// All propagation paths from the transmitter to `rx`.
    pub fn paths(&self, rx: Point) -> Result<Vec<RayPath>, TraceError> {
        let scene = self.scene;
        let tx = scene.bs_location;
        if !scene.grid.contains(rx) {
            return Err(TraceError::ReceiverOutsideArea { x: rx.x, y: rx.y });
        }
        if scene.is_inside_obstacle(rx) {
            return Err(TraceError::ReceiverInObstacle { x: rx.x, y: rx.y });
        }
        if rx == tx {
            return Err(ChannelError::NonPositiveDistance(0.0).into());
        }
        let direct = tx.distance(rx);
        let mut paths = Vec::new();

        if !segment_blocked(tx, rx, scene) {
            paths.push(RayPath {
                kind: PathKind::Los,
                total_length: direct,
                interaction_point: None,
                feature: None,
                extra_loss_db: 0.0,
            });
        }

        for img in &self.images {
            let e = img.b - img.a;
            if e.cross(rx - img.a) >= 0.0 {
                continue;
            }
            let d = rx - img.image;
            let s = (img.image - img.a).cross(d) / e.cross(d);
            if !(0.0..=1.0).contains(&s) {
                continue;
            }
            let hit = img.a + e * s;
            let skip = Some(img.feature.obstacle);
            if segment_blocked_except(tx, hit, scene, skip)
                || segment_blocked_except(hit, rx, scene, skip)
            {
                continue;
            }
            paths.push(RayPath {
                kind: PathKind::Reflection,
                total_length: tx.distance(hit) + hit.distance(rx),
                interaction_point: Some(hit),
                feature: Some(img.feature),
                extra_loss_db: self.params.reflection_loss_db,
            });
        }

        for vv in &self.visible_vertices {
            if segment_blocked(vv.vertex, rx, scene) {
                continue;
            }
            let length = tx.distance(vv.vertex) + vv.vertex.distance(rx);
            let detour = (length - direct).max(0.0);
            paths.push(RayPath {
                kind: PathKind::Diffraction,
                total_length: length,
                interaction_point: Some(vv.vertex),
                feature: Some(vv.feature),
                extra_loss_db: diffraction_loss_db(detour, self.params),
            });
        }
        Ok(paths)
    }

    /// Noise floor plus the power of every path, watts.
    pub fn received_power_w(&self, rx: Point) -> Result<f64, TraceError> {
        let tx = self.transmitter();
        let mut total = self.params.noise_w();
        for p in self.paths(rx)? {
            total += p.power_w(tx, rx, self.params)?;
        }
        Ok(total)
    }
}

/// Knife-edge style vertex loss: base loss plus `20 log10(1 + detour)`.
pub fn diffraction_loss_db(detour_m: f64, params: &ChannelParams) -> f64 {
    params.diffraction_loss_db + 20.0 * libm::log10(1.0 + detour_m)
}

/// Enumerates the paths reaching `rx`.
pub fn trace_paths(
    scene: &Scene,
    rx: Point,
    params: &ChannelParams,
) -> Result<Vec<RayPath>, TraceError> {
    Tracer::new(scene, params)?.paths(rx)
}

/// Per-cell RSS in dBm; obstacle cells are blocked.
#[derive(Clone, Debug, PartialEq)]
pub struct RadioMap {
    grid: GridSpec,
    values_dbm: Vec<f64>,
}

impl RadioMap {
    /// Builds a map from row-major dBm values; NaN marks blocked cells.
    pub fn from_values(grid: GridSpec, values_dbm: Vec<f64>) -> Option<Self> {
        (values_dbm.len() == grid.len()).then_some(Self { grid, values_dbm })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Raw values; blocked cells are NaN.
    pub fn values(&self) -> &[f64] {
        &self.values_dbm
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        let v = self.values_dbm[index];
        (!v.is_nan()).then_some(v)
    }

    pub fn is_blocked(&self, index: usize) -> bool {
        self.values_dbm[index].is_nan()
    }

    pub fn set(&mut self, index: usize, dbm: f64) {
        self.values_dbm[index] = dbm;
    }

    pub fn set_blocked(&mut self, index: usize) {
        self.values_dbm[index] = f64::NAN;
    }

    /// Values with blocked cells replaced by [`BLOCKED_FILE_DBM`].
    pub fn file_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values_dbm
            .iter()
            .map(|&v| if v.is_nan() { BLOCKED_FILE_DBM } else { v })
    }
}

/// Traces every non-obstacle cell center and composes the RSS map.
pub fn compute_rss(scene: &Scene, params: &ChannelParams) -> Result<RadioMap, TraceError> {
    let tracer = Tracer::new(scene, params)?;
    let mask = rasterize_obstacles(scene);
    let grid = scene.grid;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        if mask.is_set(i) {
            values.push(f64::NAN);
            continue;
        }
        let watts = tracer.received_power_w(grid.cell_center_of(i))?;
        values.push(channel::to_dbm(watts)?);
    }
    Ok(RadioMap {
        grid,
        values_dbm: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Obstacle;

    fn scene_with(obstacles: Vec<Obstacle>) -> Scene {
        let mut s = Scene::empty(GridSpec::standard(), 0);
        s.obstacles = obstacles;
        s
    }

    #[test]
    fn empty_scene_has_only_los() {
        let s = scene_with(vec![]);
        let rx = Point::new(15.0, 8.0);
        let paths = trace_paths(&s, rx, &ChannelParams::default()).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].kind, PathKind::Los);
        assert_eq!(paths[0].total_length, 5.0);
        assert!(!segment_blocked(
            Point::new(1.0, 1.0),
            Point::new(19.0, 15.0),
            &s
        ));
    }

    #[test]
    fn square_between_tx_and_rx() {
        let s = scene_with(vec![Obstacle::rect(12.0, 7.0, 13.0, 9.0).unwrap()]);
        let params = ChannelParams::default();
        let rx = Point::new(16.0, 8.0);
        assert!(segment_blocked(s.bs_location, rx, &s));
        let paths = trace_paths(&s, rx, &params).unwrap();
        assert!(paths.iter().all(|p| p.kind != PathKind::Los));

        // Off-axis receiver: the top-left corner is seen from both ends.
        let rx = Point::new(16.0, 10.5);
        let paths = trace_paths(&s, rx, &params).unwrap();
        assert!(paths.iter().all(|p| p.kind != PathKind::Los));
        let corners: Vec<Point> = paths
            .iter()
            .filter(|p| p.kind == PathKind::Diffraction)
            .map(|p| p.interaction_point.unwrap())
            .collect();
        assert_eq!(corners, vec![Point::new(12.0, 9.0)]);
    }

    #[test]
    fn reflection_off_a_wall() {
        // Horizontal wall below the transmitter; receiver to the right.
        let s = scene_with(vec![Obstacle::rect(8.0, 4.0, 14.0, 5.0).unwrap()]);
        let rx = Point::new(12.0, 8.0);
        let paths = trace_paths(&s, rx, &ChannelParams::default()).unwrap();
        let refl: Vec<_> = paths
            .iter()
            .filter(|p| p.kind == PathKind::Reflection)
            .collect();
        assert_eq!(refl.len(), 1);
        let hit = refl[0].interaction_point.unwrap();
        // tx (10, 8) and rx (12, 8) mirror about y = 5 → specular point (11, 5).
        assert!((hit.x - 11.0).abs() < 1e-12 && (hit.y - 5.0).abs() < 1e-12);
        assert!((refl[0].total_length - 2.0 * 10.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn receiver_inside_obstacle_is_rejected() {
        let s = scene_with(vec![Obstacle::rect(12.0, 7.0, 13.0, 9.0).unwrap()]);
        let err = trace_paths(&s, Point::new(12.5, 8.0), &ChannelParams::default());
        assert!(matches!(err, Err(TraceError::ReceiverInObstacle { .. })));
        let edge = trace_paths(&s, Point::new(12.0, 8.0), &ChannelParams::default());
        assert!(matches!(edge, Err(TraceError::ReceiverInObstacle { .. })));
    }

    #[test]
    fn single_cell_closed_form() {
        let params = ChannelParams::default();
        let s = scene_with(vec![]);
        let map = compute_rss(&s, &params).unwrap();
        let grid = s.grid;
        // A cell on the boresight row nearest to y = 8: row 23 has center
        // y = 23.5/3 = 7.8333; pick the column farthest east.
        let i = grid.index(23, 47);
        let rx = grid.cell_center_of(i);
        let tx = s.bs_location;
        let d = tx.distance(rx);
        let angle = (rx - tx).angle();
        assert!(angle.abs() < params.beamwidth_rad / 2.0);
        let expected = channel::to_dbm(
            params.tx_power_w()
                * channel::main_lobe_gain(&params)
                * channel::free_space_gain(d, &params).unwrap()
                + params.noise_w(),
        )
        .unwrap();
        assert!((map.get(i).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn obstacle_cells_are_blocked() {
        let s = scene_with(vec![Obstacle::rect(12.0, 7.0, 13.0, 9.0).unwrap()]);
        let map = compute_rss(&s, &ChannelParams::default()).unwrap();
        let mask = rasterize_obstacles(&s);
        for i in 0..s.grid.len() {
            assert_eq!(map.is_blocked(i), mask.is_set(i));
        }
        assert!(map
            .file_values()
            .all(|v| v == BLOCKED_FILE_DBM || v >= -90.0));
    }

    #[test]
    fn fully_shadowed_cell_is_noise() {
        // Receiver boxed in by four walls; no LOS, no visible vertex,
        // no reflection reaches it.
        let mut s = scene_with(vec![
            Obstacle::rect(15.0, 3.0, 19.0, 3.5).unwrap(),
            Obstacle::rect(15.0, 6.5, 19.0, 7.0).unwrap(),
            Obstacle::rect(14.4, 3.0, 14.9, 7.0).unwrap(),
            Obstacle::rect(19.1, 3.0, 19.6, 7.0).unwrap(),
        ]);
        s.bs_location = Point::new(5.0, 12.0);
        let params = ChannelParams::default();
        let rx = Point::new(17.0, 5.0);
        let tracer = Tracer::new(&s, &params).unwrap();
        let paths = tracer.paths(rx).unwrap();
        assert!(paths.is_empty(), "{paths:?}");
        let dbm = channel::to_dbm(tracer.received_power_w(rx).unwrap()).unwrap();
        assert!((dbm - params.noise_dbm).abs() < 1e-12);
    }
}

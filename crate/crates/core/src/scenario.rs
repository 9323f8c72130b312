//! Random obstacle scenes and their rasterization onto the analysis grid.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{self, Point};

/// Vertex coordinates are snapped to this lattice (1 µm) so that scenes
/// serialize losslessly with six decimal places.
pub const COORD_STEP_M: f64 = 1e-6;

/// Attempts allowed per scene before sampling gives up.
pub const DEFAULT_RETRY_BUDGET: u32 = 10_000;

const CONVEXITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid scenario config: {0}")]
    InvalidConfig(&'static str),
    #[error("obstacle is not a strictly convex counter-clockwise quadrilateral")]
    NotConvex,
    #[error(
        "could not place {requested} obstacles (placed {placed}) within {attempts} attempts; \
         config too dense for the area"
    )]
    PlacementFailed {
        requested: usize,
        placed: usize,
        attempts: u32,
    },
}

/// Uniform analysis grid over the `[0, area_width] x [0, area_length]`
/// rectangle. Rows run along the length (y), columns along the width (x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub area_length: f64,
    pub area_width: f64,
}

impl GridSpec {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        area_length: f64,
        area_width: f64,
    ) -> Result<Self, ScenarioError> {
        if n_rows == 0 || n_cols == 0 {
            return Err(ScenarioError::InvalidGrid("grid counts must be positive"));
        }
        if !(area_length > 0.0 && area_width > 0.0)
            || !area_length.is_finite()
            || !area_width.is_finite()
        {
            return Err(ScenarioError::InvalidGrid(
                "area dimensions must be positive and finite",
            ));
        }
        Ok(Self {
            n_rows,
            n_cols,
            area_length,
            area_width,
        })
    }

    /// 48 x 48 cells over a 16 m x 20 m area.
    pub fn standard() -> Self {
        Self {
            n_rows: 48,
            n_cols: 48,
            area_length: 16.0,
            area_width: 20.0,
        }
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell extent as `(dx, dy)` in meters.
    pub fn cell_size(&self) -> (f64, f64) {
        (
            self.area_width / self.n_cols as f64,
            self.area_length / self.n_rows as f64,
        )
    }

    /// World coordinate of the center of cell (0, 0).
    pub fn origin(&self) -> Point {
        let (dx, dy) = self.cell_size();
        Point::new(0.5 * dx, 0.5 * dy)
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.area_width, 0.5 * self.area_length)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        row * self.n_cols + col
    }

    pub fn row_col(&self, index: usize) -> (usize, usize) {
        (index / self.n_cols, index % self.n_cols)
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        let (dx, dy) = self.cell_size();
        Point::new((col as f64 + 0.5) * dx, (row as f64 + 0.5) * dy)
    }

    pub fn cell_center_of(&self, index: usize) -> Point {
        let (r, c) = self.row_col(index);
        self.cell_center(r, c)
    }

    /// Cell whose (half-open) footprint contains `p`; points on the far
    /// boundary of the area map to the last row/column.
    pub fn cell_containing(&self, p: Point) -> Option<(usize, usize)> {
        if !self.contains(p) {
            return None;
        }
        let (dx, dy) = self.cell_size();
        let col = ((p.x / dx) as usize).min(self.n_cols - 1);
        let row = ((p.y / dy) as usize).min(self.n_rows - 1);
        Some((row, col))
    }

    /// Closed containment in the scene rectangle.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.area_width && p.y >= 0.0 && p.y <= self.area_length
    }

    /// Diagonal of one cell in meters.
    pub fn cell_diagonal(&self) -> f64 {
        let (dx, dy) = self.cell_size();
        libm::hypot(dx, dy)
    }
}

/// Convex quadrilateral obstacle with counter-clockwise vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obstacle {
    vertices: [Point; 4],
}

impl Obstacle {
    pub fn new(vertices: [Point; 4]) -> Result<Self, ScenarioError> {
        if !geometry::is_strictly_convex_ccw(&vertices, CONVEXITY_TOL) {
            return Err(ScenarioError::NotConvex);
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, ScenarioError> {
        Self::new([
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point; 4] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        geometry::edges(&self.vertices)
    }

    pub fn contains(&self, p: Point) -> bool {
        geometry::contains_closed(&self.vertices, p)
    }

    pub fn area(&self) -> f64 {
        geometry::signed_area(&self.vertices)
    }

    pub fn overlaps(&self, other: &Obstacle) -> bool {
        geometry::convex_polygons_overlap(&self.vertices, &other.vertices)
    }

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Indices of the grid cells whose centers lie inside this obstacle,
    /// in row-major order.
    pub fn covered_cells(&self, grid: &GridSpec) -> Vec<usize> {
        let (lo, hi) = self.bounding_box();
        let (dx, dy) = grid.cell_size();
        let col_range = cell_span(lo.x, hi.x, dx, grid.n_cols);
        let row_range = cell_span(lo.y, hi.y, dy, grid.n_rows);
        let mut cells = Vec::new();
        for r in row_range.clone() {
            for c in col_range.clone() {
                if self.contains(grid.cell_center(r, c)) {
                    cells.push(grid.index(r, c));
                }
            }
        }
        cells
    }
}

/// Conservative range of cell indices whose centers may fall in `[lo, hi]`.
fn cell_span(lo: f64, hi: f64, step: f64, n: usize) -> core::ops::Range<usize> {
    let first = libm::floor(lo / step - 0.5).max(0.0) as usize;
    let last = (libm::ceil(hi / step - 0.5).max(0.0) as usize + 1).min(n);
    first.min(n)..last
}

/// A sampled deployment: obstacles, transmitter location and grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub obstacles: Vec<Obstacle>,
    pub bs_location: Point,
    pub grid: GridSpec,
    pub seed: u64,
}

impl Scene {
    /// Scene with the transmitter at the area center and no obstacles.
    pub fn empty(grid: GridSpec, seed: u64) -> Self {
        Self {
            obstacles: Vec::new(),
            bs_location: grid.center(),
            grid,
            seed,
        }
    }

    pub fn is_inside_obstacle(&self, p: Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Copy of this scene with obstacle `index` removed.
    pub fn without_obstacle(&self, index: usize) -> Self {
        let mut s = self.clone();
        s.obstacles.remove(index);
        s
    }

    /// Ground-truth cell sets, one per obstacle, in obstacle order.
    pub fn obstacle_cells(&self) -> Vec<Vec<usize>> {
        self.obstacles
            .iter()
            .map(|o| o.covered_cells(&self.grid))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Candidate obstacle counts, chosen uniformly.
    pub obstacle_count_choices: Vec<usize>,
    /// Circumradius range `(min, max)` in meters.
    pub size_range: (f64, f64),
    /// Minimum distance from every vertex to the area boundary, meters.
    pub margin: f64,
    pub retry_budget: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            obstacle_count_choices: vec![1, 2, 3, 4, 5],
            size_range: (0.75, 2.0),
            margin: 0.5,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }
}

impl ScenarioConfig {
    pub fn with_counts(counts: Vec<usize>) -> Self {
        Self {
            obstacle_count_choices: counts,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let (lo, hi) = self.size_range;
        if self.obstacle_count_choices.is_empty() {
            return Err(ScenarioError::InvalidConfig(
                "obstacle_count_choices is empty",
            ));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(ScenarioError::InvalidConfig(
                "size_range must satisfy 0 < min <= max",
            ));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(ScenarioError::InvalidConfig("margin must be non-negative"));
        }
        if self.retry_budget == 0 {
            return Err(ScenarioError::InvalidConfig(
                "retry_budget must be positive",
            ));
        }
        Ok(())
    }
}

/// Samples a scene with a ChaCha8 generator seeded from `seed`.
pub fn sample_scene(
    cfg: &ScenarioConfig,
    grid: &GridSpec,
    seed: u64,
) -> Result<Scene, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_scene_with(cfg, grid, seed, &mut rng)
}

/// Samples a scene from a caller-supplied generator; `seed` is recorded on
/// the returned scene only.
///
/// Each obstacle is a quadrilateral around a uniform center with four sorted
/// uniform angles and four uniform radii. Candidates are rejected when they
/// are not strictly convex, leave the margin, cover the transmitter, touch an
/// earlier obstacle, cover no cell center, rasterize to more than one
/// 4-connected component, or share or abut cells of an earlier obstacle. The
/// last three rules keep every obstacle a separate, detectable component of
/// the obstacle mask.
pub fn sample_scene_with<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    grid: &GridSpec,
    seed: u64,
    rng: &mut R,
) -> Result<Scene, ScenarioError> {
    cfg.validate()?;
    let count = cfg.obstacle_count_choices[rng.gen_range(0..cfg.obstacle_count_choices.len())];
    let mut scene = Scene::empty(*grid, seed);
    let mut occupied = vec![false; grid.len()];
    let (r_min, r_max) = cfg.size_range;
    let (x_lo, x_hi) = (cfg.margin, grid.area_width - cfg.margin);
    let (y_lo, y_hi) = (cfg.margin, grid.area_length - cfg.margin);
    if !(x_lo < x_hi && y_lo < y_hi) {
        return Err(ScenarioError::InvalidConfig(
            "margin leaves no room in the area",
        ));
    }

    let mut attempts = 0_u32;
    while scene.obstacles.len() < count {
        if attempts >= cfg.retry_budget {
            return Err(ScenarioError::PlacementFailed {
                requested: count,
                placed: scene.obstacles.len(),
                attempts,
            });
        }
        attempts += 1;

        let center = Point::new(rng.gen_range(x_lo..=x_hi), rng.gen_range(y_lo..=y_hi));
        let mut angles = [0.0_f64; 4];
        for a in angles.iter_mut() {
            *a = rng.gen_range(0.0..TAU);
        }
        angles.sort_by(f64::total_cmp);
        let mut vertices = [Point::default(); 4];
        for (v, &a) in vertices.iter_mut().zip(angles.iter()) {
            let r = if r_min == r_max {
                r_min
            } else {
                rng.gen_range(r_min..=r_max)
            };
            *v = (center + Point::new(libm::cos(a), libm::sin(a)) * r).snapped(COORD_STEP_M);
        }

        let Ok(candidate) = Obstacle::new(vertices) else {
            continue;
        };
        let in_bounds = vertices
            .iter()
            .all(|v| v.x >= x_lo && v.x <= x_hi && v.y >= y_lo && v.y <= y_hi);
        if !in_bounds || candidate.contains(scene.bs_location) {
            continue;
        }
        if scene.obstacles.iter().any(|o| o.overlaps(&candidate)) {
            continue;
        }
        let cells = candidate.covered_cells(grid);
        if cells.is_empty() || !is_four_connected(grid, &cells) {
            continue;
        }
        if cells
            .iter()
            .any(|&i| occupied[i] || touches(grid, &occupied, i))
        {
            continue;
        }
        for &i in &cells {
            occupied[i] = true;
        }
        scene.obstacles.push(candidate);
    }
    Ok(scene)
}

fn neighbors4(grid: &GridSpec, index: usize) -> impl Iterator<Item = usize> {
    let (r, c) = grid.row_col(index);
    let (rows, cols) = (grid.n_rows, grid.n_cols);
    let up = (r > 0).then(|| index - cols);
    let down = (r + 1 < rows).then(|| index + cols);
    let left = (c > 0).then(|| index - 1);
    let right = (c + 1 < cols).then(|| index + 1);
    [up, down, left, right].into_iter().flatten()
}

fn touches(grid: &GridSpec, occupied: &[bool], index: usize) -> bool {
    neighbors4(grid, index).any(|n| occupied[n])
}

fn is_four_connected(grid: &GridSpec, cells: &[usize]) -> bool {
    let mut member = vec![false; grid.len()];
    for &i in cells {
        member[i] = true;
    }
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::from([cells[0]]);
    seen[cells[0]] = true;
    let mut reached = 1;
    while let Some(i) = queue.pop_front() {
        for n in neighbors4(grid, i) {
            if member[n] && !seen[n] {
                seen[n] = true;
                reached += 1;
                queue.push_back(n);
            }
        }
    }
    reached == cells.len()
}

/// Boolean grid, row-major; `true` marks obstacle cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleMask {
    grid: GridSpec,
    cells: Vec<bool>,
}

impl ObstacleMask {
    pub fn empty(grid: GridSpec) -> Self {
        Self {
            grid,
            cells: vec![false; grid.len()],
        }
    }

    pub fn from_cells(grid: GridSpec, cells: Vec<bool>) -> Option<Self> {
        (cells.len() == grid.len()).then_some(Self { grid, cells })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[self.grid.index(row, col)]
    }

    pub fn is_set(&self, index: usize) -> bool {
        self.cells[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.cells[index] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Row-major indices of set cells.
    pub fn set_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}

/// Marks every cell whose center lies in some obstacle (edges inclusive).
pub fn rasterize_obstacles(scene: &Scene) -> ObstacleMask {
    let mut mask = ObstacleMask::empty(scene.grid);
    for o in &scene.obstacles {
        for i in o.covered_cells(&scene.grid) {
            mask.cells[i] = true;
        }
    }
    mask
}

/// 4-connected components of `mask`, each as sorted row-major indices.
/// Components are ordered by their smallest index.
pub fn connected_components(mask: &ObstacleMask) -> Vec<Vec<usize>> {
    let grid = mask.grid;
    let mut seen = vec![false; grid.len()];
    let mut components = Vec::new();
    for start in 0..grid.len() {
        if !mask.cells[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            for n in neighbors4(&grid, i) {
                if mask.cells[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

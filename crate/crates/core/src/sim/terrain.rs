//! Heightfield terrains: five kinds with a difficulty knob in [0, 1].
//!
//! Difficulty maps (all config defaults):
//!   rough noise amplitude  0.02 + 0.08 d   (flat at d = 0 for rough_flat)
//!   slope inclination      25 deg * d
//!   stair riser            0.05 + 0.13 d, tread 0.30 m
//!   obstacle height        0.03 + 0.12 d

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    RoughFlat,
    SmoothSlope,
    RoughSlope,
    Stairs,
    DiscreteObstacles,
}

impl TerrainKind {
    pub const ALL: [TerrainKind; 5] = [
        TerrainKind::RoughFlat,
        TerrainKind::SmoothSlope,
        TerrainKind::RoughSlope,
        TerrainKind::Stairs,
        TerrainKind::DiscreteObstacles,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TerrainKind::RoughFlat => "rough_flat",
            TerrainKind::SmoothSlope => "smooth_slope",
            TerrainKind::RoughSlope => "rough_slope",
            TerrainKind::Stairs => "stairs",
            TerrainKind::DiscreteObstacles => "discrete_obstacles",
        }
    }

    fn index(self) -> u64 {
        Self::ALL.iter().position(|&k| k == self).unwrap() as u64
    }
}

/// Regular-grid heightfield; queries outside the grid clamp to the border.
#[derive(Debug, Clone)]
pub struct HeightField {
    grid: Array2<f64>,
    cell_size: f64,
    origin: [f64; 2],
    pub kind: TerrainKind,
    pub difficulty: f64,
}

const EXTENT: f64 = 12.0; // side length in metres, spawn at the centre
const CELL: f64 = 0.1;
const MAX_SLOPE_DEG: f64 = 25.0;

impl HeightField {
    pub fn flat() -> Self {
        let n = (EXTENT / CELL) as usize + 1;
        HeightField {
            grid: Array2::zeros((n, n)),
            cell_size: CELL,
            origin: [-EXTENT / 2.0, -EXTENT / 2.0],
            kind: TerrainKind::RoughFlat,
            difficulty: 0.0,
        }
    }

    /// Builds a field from an explicit grid.
    pub fn from_grid(
        grid: Array2<f64>,
        cell_size: f64,
        origin: [f64; 2],
        kind: TerrainKind,
        difficulty: f64,
    ) -> Self {
        HeightField {
            grid,
            cell_size,
            origin,
            kind,
            difficulty,
        }
    }

    /// Deterministic terrain from (kind, difficulty, seed).
    pub fn generate(kind: TerrainKind, difficulty: f64, seed: u64) -> Self {
        let difficulty = difficulty.clamp(0.0, 1.0);
        let mut field = Self::flat();
        field.kind = kind;
        field.difficulty = difficulty;
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ kind.index().wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ difficulty.to_bits(),
        );
        match kind {
            TerrainKind::RoughFlat => {
                if difficulty > 0.0 {
                    field.add_roughness(rough_amplitude(difficulty), &mut rng);
                }
            }
            TerrainKind::SmoothSlope => {
                field.add_slope(slope_angle(difficulty), &mut rng);
            }
            TerrainKind::RoughSlope => {
                field.add_slope(slope_angle(difficulty), &mut rng);
                if difficulty > 0.0 {
                    field.add_roughness(rough_amplitude(difficulty), &mut rng);
                }
            }
            TerrainKind::Stairs => {
                field.add_stairs(stair_riser(difficulty), 0.30, &mut rng);
            }
            TerrainKind::DiscreteObstacles => {
                field.add_obstacles(obstacle_height(difficulty), &mut rng);
            }
        }
        field
    }

    pub fn grid(&self) -> &Array2<f64> {
        &self.grid
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn node_height(&self, ix: usize, iy: usize) -> f64 {
        self.grid[[ix, iy]]
    }

    /// Bilinear interpolation of the four surrounding nodes; exact at
    /// grid nodes, clamped to the border cell outside the grid.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = self.grid.dim();
        let fx = ((x - self.origin[0]) / self.cell_size).clamp(0.0, (nx - 1) as f64);
        let fy = ((y - self.origin[1]) / self.cell_size).clamp(0.0, (ny - 1) as f64);
        let ix = (fx.floor() as usize).min(nx - 2);
        let iy = (fy.floor() as usize).min(ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let h00 = self.grid[[ix, iy]];
        let h10 = self.grid[[ix + 1, iy]];
        let h01 = self.grid[[ix, iy + 1]];
        let h11 = self.grid[[ix + 1, iy + 1]];
        h00 * (1.0 - tx) * (1.0 - ty)
            + h10 * tx * (1.0 - ty)
            + h01 * (1.0 - tx) * ty
            + h11 * tx * ty
    }

    /// Uniform noise in [-amp, amp] generated on a 0.4 m lattice and
    /// bilinearly upsampled, so adjacent-cell gradients stay bounded.
    fn add_roughness(&mut self, amp: f64, rng: &mut ChaCha8Rng) {
        let (nx, ny) = self.grid.dim();
        let stride = 4usize;
        let cx = nx.div_ceil(stride) + 1;
        let cy = ny.div_ceil(stride) + 1;
        let coarse =
            Array2::from_shape_fn((cx, cy), |_| rng.random_range(-amp..=amp));
        for ix in 0..nx {
            for iy in 0..ny {
                let fx = ix as f64 / stride as f64;
                let fy = iy as f64 / stride as f64;
                let i = (fx.floor() as usize).min(cx - 2);
                let j = (fy.floor() as usize).min(cy - 2);
                let tx = fx - i as f64;
                let ty = fy - j as f64;
                self.grid[[ix, iy]] += coarse[[i, j]] * (1.0 - tx) * (1.0 - ty)
                    + coarse[[i + 1, j]] * tx * (1.0 - ty)
                    + coarse[[i, j + 1]] * (1.0 - tx) * ty
                    + coarse[[i + 1, j + 1]] * tx * ty;
            }
        }
    }

    /// Plane through the origin with the given inclination, in a random
    /// horizontal direction.
    fn add_slope(&mut self, angle_rad: f64, rng: &mut ChaCha8Rng) {
        let dir = rng.random_range(0.0..std::f64::consts::TAU);
        let (dx, dy) = (dir.cos(), dir.sin());
        let t = angle_rad.tan();
        let (nx, ny) = self.grid.dim();
        for ix in 0..nx {
            for iy in 0..ny {
                let x = self.origin[0] + ix as f64 * self.cell_size;
                let y = self.origin[1] + iy as f64 * self.cell_size;
                self.grid[[ix, iy]] += t * (dx * x + dy * y);
            }
        }
    }

    /// Uniform risers along a random cardinal axis; the spawn tread is at
    /// height zero.
    fn add_stairs(&mut self, riser: f64, tread: f64, rng: &mut ChaCha8Rng) {
        let axis = rng.random_range(0..4u32); // +x, -x, +y, -y ascending
        let (nx, ny) = self.grid.dim();
        let half = EXTENT / 2.0;
        let centre_step = (half / tread).floor();
        for ix in 0..nx {
            for iy in 0..ny {
                let x = self.origin[0] + ix as f64 * self.cell_size;
                let y = self.origin[1] + iy as f64 * self.cell_size;
                let along = match axis {
                    0 => x,
                    1 => -x,
                    2 => y,
                    _ => -y,
                };
                let step = ((along + half) / tread).floor() - centre_step;
                self.grid[[ix, iy]] += step * riser;
            }
        }
    }

    /// Rectangular blocks of height up to +/- h_max scattered outside a
    /// clear spawn patch.
    fn add_obstacles(&mut self, h_max: f64, rng: &mut ChaCha8Rng) {
        let (nx, ny) = self.grid.dim();
        let spawn_clear = 1.2f64;
        for _ in 0..60 {
            let cx = rng.random_range(-EXTENT / 2.0..EXTENT / 2.0);
            let cy = rng.random_range(-EXTENT / 2.0..EXTENT / 2.0);
            let hx = rng.random_range(0.25..0.60);
            let hy = rng.random_range(0.25..0.60);
            let h = rng.random_range(-h_max..=h_max);
            if cx.abs() < spawn_clear + hx && cy.abs() < spawn_clear + hy {
                continue;
            }
            for ix in 0..nx {
                let x = self.origin[0] + ix as f64 * self.cell_size;
                if (x - cx).abs() > hx {
                    continue;
                }
                for iy in 0..ny {
                    let y = self.origin[1] + iy as f64 * self.cell_size;
                    if (y - cy).abs() <= hy {
                        self.grid[[ix, iy]] = h;
                    }
                }
            }
        }
    }
}

pub fn rough_amplitude(d: f64) -> f64 {
    0.02 + 0.08 * d
}

pub fn slope_angle(d: f64) -> f64 {
    MAX_SLOPE_DEG.to_radians() * d
}

pub fn stair_riser(d: f64) -> f64 {
    0.05 + 0.13 * d
}

pub fn obstacle_height(d: f64) -> f64 {
    0.03 + 0.12 * d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_difficulty_rough_flat_is_flat() {
        let f = HeightField::generate(TerrainKind::RoughFlat, 0.0, 99);
        assert!(f.grid().iter().all(|&h| h == 0.0));
        assert_eq!(f.height_at(1.234, -3.456), 0.0);
    }

    #[test]
    fn height_at_is_exact_at_nodes() {
        let f = HeightField::generate(TerrainKind::RoughFlat, 0.7, 3);
        let o = f.origin();
        for &(ix, iy) in &[(0usize, 0usize), (5, 9), (60, 60), (120, 120)] {
            let x = o[0] + ix as f64 * f.cell_size();
            let y = o[1] + iy as f64 * f.cell_size();
            assert!((f.height_at(x, y) - f.node_height(ix, iy)).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_midpoint_of_split_cell() {
        let mut f = HeightField::flat();
        // Corner heights (0, 0, 1, 1) across one cell -> centre is 0.5.
        f.grid[[0, 0]] = 0.0;
        f.grid[[1, 0]] = 0.0;
        f.grid[[0, 1]] = 1.0;
        f.grid[[1, 1]] = 1.0;
        let o = f.origin();
        let mid = f.height_at(o[0] + 0.05, o[1] + 0.05);
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_clamps_to_border() {
        let f = HeightField::generate(TerrainKind::SmoothSlope, 1.0, 7);
        let o = f.origin();
        let inside = f.height_at(o[0], 0.0);
        let outside = f.height_at(o[0] - 50.0, 0.0);
        assert!((inside - outside).abs() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = HeightField::generate(TerrainKind::DiscreteObstacles, 0.6, 42);
        let b = HeightField::generate(TerrainKind::DiscreteObstacles, 0.6, 42);
        assert_eq!(a.grid(), b.grid());
        let c = HeightField::generate(TerrainKind::DiscreteObstacles, 0.6, 43);
        assert_ne!(a.grid(), c.grid());
    }

    #[test]
    fn stairs_have_exact_uniform_risers() {
        for d in [0.0, 0.4, 1.0] {
            let f = HeightField::generate(TerrainKind::Stairs, d, 11);
            let expect = stair_riser(d);
            // Collect distinct heights along both axes and check consecutive gaps.
            let mut heights: Vec<f64> = f.grid().iter().copied().collect();
            heights.sort_by(f64::total_cmp);
            heights.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            assert!(heights.len() > 3);
            for w in heights.windows(2) {
                assert!(
                    (w[1] - w[0] - expect).abs() < 1e-9,
                    "riser {} vs {expect}",
                    w[1] - w[0]
                );
            }
            // Spawn tread sits at height zero.
            assert_eq!(f.height_at(0.0, 0.0), 0.0);
        }
    }

    #[test]
    fn slope_matches_least_squares_plane_fit() {
        let d = 0.8;
        let f = HeightField::generate(TerrainKind::SmoothSlope, d, 21);
        // Fit h = a x + b y + c by normal equations.
        let (nx, ny) = f.grid().dim();
        let (mut sxx, mut sxy, mut syy, mut sxh, mut syh) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let (mut sx, mut sy, mut sh, mut n) = (0.0, 0.0, 0.0, 0.0);
        for ix in 0..nx {
            for iy in 0..ny {
                let x = f.origin()[0] + ix as f64 * f.cell_size();
                let y = f.origin()[1] + iy as f64 * f.cell_size();
                let h = f.node_height(ix, iy);
                sxx += x * x;
                sxy += x * y;
                syy += y * y;
                sxh += x * h;
                syh += y * h;
                sx += x;
                sy += y;
                sh += h;
                n += 1.0;
            }
        }
        // Solve the 3x3 system via Cramer's rule.
        let m = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, n]];
        let rhs = [sxh, syh, sh];
        let det = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d0 = det(&m);
        let mut ma = m;
        ma[0][0] = rhs[0];
        ma[1][0] = rhs[1];
        ma[2][0] = rhs[2];
        let mut mb = m;
        mb[0][1] = rhs[0];
        mb[1][1] = rhs[1];
        mb[2][1] = rhs[2];
        let a = det(&ma) / d0;
        let b = det(&mb) / d0;
        let grad = (a * a + b * b).sqrt();
        let expect = slope_angle(d).tan();
        assert!((grad - expect).abs() < 1e-6, "gradient {grad} vs {expect}");
        // Residuals are zero for a true plane.
        for ix in (0..nx).step_by(17) {
            for iy in (0..ny).step_by(13) {
                let x = f.origin()[0] + ix as f64 * f.cell_size();
                let y = f.origin()[1] + iy as f64 * f.cell_size();
                let pred = a * x + b * y + det(&{
                    let mut mc = m;
                    mc[0][2] = rhs[0];
                    mc[1][2] = rhs[1];
                    mc[2][2] = rhs[2];
                    mc
                }) / d0;
                assert!((pred - f.node_height(ix, iy)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn difficulty_scales_feature_size_monotonically() {
        let amp = |d: f64| {
            let f = HeightField::generate(TerrainKind::RoughFlat, d, 5);
            f.grid().iter().map(|h| h.abs()).fold(0.0, f64::max)
        };
        let (a2, a6, a10) = (amp(0.2), amp(0.6), amp(1.0));
        assert!(a2 < a6 && a6 < a10);
        assert!(a10 <= rough_amplitude(1.0) + 1e-12);
    }

    #[test]
    fn obstacles_leave_spawn_area_clear() {
        let f = HeightField::generate(TerrainKind::DiscreteObstacles, 1.0, 17);
        for x in [-0.5, 0.0, 0.5] {
            for y in [-0.5, 0.0, 0.5] {
                assert_eq!(f.height_at(x, y), 0.0);
            }
        }
        let max = f.grid().iter().map(|h| h.abs()).fold(0.0, f64::max);
        assert!(max > 0.0 && max <= obstacle_height(1.0) + 1e-12);
    }
}

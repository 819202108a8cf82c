//! Area-preserving map of the disc `D_R` into `D_r` fixing the origin.
//!
//! In polar coordinates `z ↦ z^{N+1} / (c |z|^N)` sends `(ρ, θ)` to
//! `(ρ / c, (N + 1) θ)`. The area form `ρ dρ ∧ dθ` pulls back to
//! `(N + 1) / c² · ρ dρ ∧ dθ`, so the map is symplectic exactly when
//! `c = √(N + 1)`. With `c = N` the Jacobian determinant is `(N + 1) / N²`.
//!
//! The power map is singular at `0`, so the disc is first moved to
//! `D_R(a)` with `a = 2R`, and the image of `a` is moved back to the origin.
//! Images then have radius at most `(|z + a| + a) / c ≤ 5R / c`.

use rayon::prelude::*;
use serde::Serialize;

/// Translation, radial power map, translation.
#[derive(Clone, Debug, Serialize)]
pub struct TwistMap {
    pub n: u32,
    pub big_r: f64,
    /// Translation applied before the power map.
    pub shift: f64,
    /// `√(N + 1)`.
    pub c: f64,
}

impl TwistMap {
    pub fn new(n: u32, big_r: f64) -> TwistMap {
        assert!(n >= 1 && big_r > 0.0, "need N >= 1 and R > 0");
        TwistMap { n, big_r, shift: 2.0 * big_r, c: ((n + 1) as f64).sqrt() }
    }

    fn power(&self, x: f64, y: f64) -> (f64, f64) {
        let rho = x.hypot(y);
        let m = (self.n + 1) as f64 * y.atan2(x);
        let (s, co) = m.sin_cos();
        (rho / self.c * co, rho / self.c * s)
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v) = self.power(x + self.shift, y);
        let (u0, v0) = self.power(self.shift, 0.0);
        (u - u0, v - v0)
    }

    /// Guaranteed image radius `5R / c`.
    pub fn radius_bound(&self) -> f64 {
        5.0 * self.big_r / self.c
    }

    /// Jacobian determinant by fourth-order central differences.
    pub fn jacobian_det(&self, x: f64, y: f64) -> f64 {
        let h = 2e-3 * self.big_r / (self.n + 1) as f64;
        let diff = |dx: f64, dy: f64| {
            let p = |k: f64| self.apply(x + k * dx, y + k * dy);
            let (a, b, c, d) = (p(2.0), p(1.0), p(-1.0), p(-2.0));
            ((-a.0 + 8.0 * b.0 - 8.0 * c.0 + d.0) / (12.0 * h), (-a.1 + 8.0 * b.1 - 8.0 * c.1 + d.1) / (12.0 * h))
        };
        let (ux, vx) = diff(h, 0.0);
        let (uy, vy) = diff(0.0, h);
        ux * vy - uy * vx
    }
}

/// Smallest `N >= 1` with `5R / √(N + 1) <= r`.
pub fn minimal_power(big_r: f64, r: f64) -> u32 {
    assert!(big_r > 0.0 && r > 0.0, "radii must be positive");
    let fits = |n: u32| 5.0 * big_r / ((n + 1) as f64).sqrt() <= r;
    let ratio = 5.0 * big_r / r;
    let mut n = ((ratio * ratio - 1.0).ceil().max(1.0)).min(u32::MAX as f64 / 2.0) as u32;
    while !fits(n) {
        n += 1;
    }
    while n > 1 && fits(n - 1) {
        n -= 1;
    }
    n
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistReport {
    pub map: TwistMap,
    pub target_r: f64,
    pub grid: usize,
    /// `c` solving the area condition.
    pub derived_constant: f64,
    /// The constant `N` displayed with the map in the literature.
    pub displayed_constant: f64,
    /// `(N + 1) / N²`, the determinant the displayed constant would give.
    pub displayed_constant_det: f64,
    pub max_det_deviation: f64,
    pub max_image_radius: f64,
    pub radius_bound: f64,
    pub origin_fixed: bool,
    pub tolerance: f64,
    pub ok: bool,
}

/// Builds the map (with minimal `N` unless given) and samples a polar
/// `grid × grid` mesh of `D_R`.
pub fn twist_map(n: Option<u32>, big_r: f64, r: f64, grid: usize) -> TwistReport {
    let n = n.unwrap_or_else(|| minimal_power(big_r, r));
    let map = TwistMap::new(n, big_r);
    let tolerance = 1e-9;
    let grid = grid.max(2);
    let (det_dev, radius) = (0..grid)
        .into_par_iter()
        .map(|i| {
            let rho = big_r * i as f64 / (grid - 1) as f64;
            let mut dev: f64 = 0.0;
            let mut rad: f64 = 0.0;
            for j in 0..grid {
                let th = std::f64::consts::TAU * j as f64 / grid as f64;
                let (x, y) = (rho * th.cos(), rho * th.sin());
                dev = dev.max((map.jacobian_det(x, y) - 1.0).abs());
                let (u, v) = map.apply(x, y);
                rad = rad.max(u.hypot(v));
            }
            (dev, rad)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let origin_fixed = map.apply(0.0, 0.0) == (0.0, 0.0);
    let nf = n as f64;
    TwistReport {
        target_r: r,
        grid,
        derived_constant: map.c,
        displayed_constant: nf,
        displayed_constant_det: (nf + 1.0) / (nf * nf),
        max_det_deviation: det_dev,
        max_image_radius: radius,
        radius_bound: map.radius_bound(),
        origin_fixed,
        tolerance,
        ok: origin_fixed && radius <= r && det_dev <= tolerance,
        map,
    }
}

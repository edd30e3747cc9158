//! Uniform radial grids, complex fields on them, and ball norms.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes `r_j = j * dr`, `j = 0..=n`, on `[0, r_max]` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
    pub d: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize, d: usize) -> Result<Self> {
        if !(r_max > 0.0) || n == 0 {
            return Err(Error::Config(format!("grid needs r_max > 0 and n >= 1 (got {r_max}, {n})")));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3 (got {d})")));
        }
        Ok(RadialGrid { r_max, n, d })
    }

    /// Grid with spacing as close to `dr` as divides `r_max` evenly.
    pub fn with_spacing(r_max: f64, dr: f64, d: usize) -> Result<Self> {
        if !(dr > 0.0) {
            return Err(Error::Config(format!("grid spacing must be positive (got {dr})")));
        }
        Self::new(r_max, (r_max / dr).round().max(1.0) as usize, d)
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.dr()
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |j| self.r(j))
    }

    /// Surface measure of the unit sphere in R^d, counting both half-lines for d = 1.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.d)
    }

    pub fn zeros(&self) -> Field {
        Field {
            grid: *self,
            values: vec![Complex64::new(0.0, 0.0); self.len()],
        }
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Field {
        Field {
            grid: *self,
            values: self.nodes().map(f).collect(),
        }
    }
}

pub fn sphere_measure(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Writes `r,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,re,im")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:e},{:e},{:e}", self.grid.r(j), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Trapezoid integral of `sigma_d * g(r) r^{d-1}` over `[0, r0]` where `g` is
/// given at the grid nodes; the cell containing `r0` is truncated with `g r^{d-1}`
/// linearly interpolated.
pub(crate) fn ball_integral(grid: &RadialGrid, g: impl Fn(usize) -> f64, r0: f64) -> Result<f64> {
    if !(r0 > 0.0) || r0 > grid.r_max * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("ball radius {r0} outside (0, {}]", grid.r_max)));
    }
    let r0 = r0.min(grid.r_max);
    let dr = grid.dr();
    let p = grid.d as i32 - 1;
    let h = |j: usize| g(j) * grid.r(j).powi(p);
    let full = ((r0 / dr) * (1.0 + 1e-14)).floor() as usize;
    let full = full.min(grid.n);
    let mut acc = 0.0;
    for j in 0..full {
        acc += 0.5 * dr * (h(j) + h(j + 1));
    }
    let rest = r0 - grid.r(full);
    if rest > 1e-14 * dr && full < grid.n {
        let (h0, h1) = (h(full), h(full + 1));
        let h_end = h0 + (h1 - h0) * rest / dr;
        acc += 0.5 * rest * (h0 + h_end);
    }
    Ok(grid.sphere_measure() * acc)
}

/// `(sigma_d * int_0^{r0} |f|^2 r^{d-1} dr)^{1/2}`.
pub fn l2_norm_ball(f: &Field, r0: f64) -> Result<f64> {
    Ok(ball_integral(&f.grid, |j| f.values[j].norm_sqr(), r0)?.sqrt())
}

/// Second-order radial derivative: centered inside, one-sided at both ends.
pub fn radial_gradient(f: &Field) -> Result<Field> {
    let n = f.grid.n;
    if n < 2 {
        return Err(Error::Domain("radial gradient needs at least 3 nodes".into()));
    }
    let dr = f.grid.dr();
    let u = &f.values;
    let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
    g[0] = (u[0] * -3.0 + u[1] * 4.0 - u[2]) / (2.0 * dr);
    for j in 1..n {
        g[j] = (u[j + 1] - u[j - 1]) / (2.0 * dr);
    }
    g[n] = (u[n] * 3.0 - u[n - 1] * 4.0 + u[n - 2]) / (2.0 * dr);
    Ok(Field { grid: f.grid, values: g })
}

/// `(||f||^2 + ||f'||^2)^{1/2}` over the ball; radial fields have no angular gradient.
pub fn h1_norm_ball(f: &Field, r0: f64) -> Result<f64> {
    let l2 = l2_norm_ball(f, r0)?;
    let grad = l2_norm_ball(&radial_gradient(f)?, r0)?;
    Ok((l2 * l2 + grad * grad).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(_: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn norm_of_constant_field() {
        // d=1: both half-lines, measure 2 * 5
        let g1 = RadialGrid::new(10.0, 1000, 1).unwrap();
        let n1 = l2_norm_ball(&g1.sample(one), 5.0).unwrap();
        assert!((n1 - 10f64.sqrt()).abs() < 1e-12);
        // d=3: 4 pi 5^3 / 3, trapezoid error on r^2 is sigma * dr^2 * 10 / 12
        let g3 = RadialGrid::new(10.0, 1000, 3).unwrap();
        let n3 = l2_norm_ball(&g3.sample(one), 5.0).unwrap();
        let exact = (4.0 * PI * 125.0 / 3.0f64).sqrt();
        assert!((n3 - exact).abs() < 1e-4, "{n3} vs {exact}");
        assert_eq!(l2_norm_ball(&g3.zeros(), 5.0).unwrap(), 0.0);
    }

    #[test]
    fn ball_radius_beyond_grid_is_domain_error() {
        let g = RadialGrid::new(4.0, 40, 2).unwrap();
        assert!(matches!(l2_norm_ball(&g.zeros(), 5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn partial_last_cell() {
        // linear integrand g r^{d-1} = r on d=2 is exact under the truncated trapezoid
        let g = RadialGrid::new(1.0, 7, 2).unwrap();
        let n = l2_norm_ball(&g.sample(one), 0.55).unwrap();
        assert!((n * n - PI * 0.55 * 0.55).abs() < 1e-13);
    }

    #[test]
    fn gradient_exactness() {
        let g = RadialGrid::new(5.0, 50, 3).unwrap();
        let lin = radial_gradient(&g.sample(|r| Complex64::new(r, 0.0))).unwrap();
        assert!(lin.values.iter().all(|v| (v.re - 1.0).abs() < 1e-12 && v.im == 0.0));
        let cst = radial_gradient(&g.sample(|_| Complex64::new(2.5, -1.0))).unwrap();
        assert!(cst.values.iter().all(|v| v.norm() < 1e-12));
        let quad = radial_gradient(&g.sample(|r| Complex64::new(r * r, 0.0))).unwrap();
        for j in 1..g.n {
            assert!((quad.values[j].re - 2.0 * g.r(j)).abs() < 1e-11);
        }
        assert!(radial_gradient(&RadialGrid::new(1.0, 1, 1).unwrap().zeros()).is_err());
    }

    #[test]
    fn h1_norm_values() {
        let g = RadialGrid::new(10.0, 1000, 1).unwrap();
        assert!((h1_norm_ball(&g.sample(one), 5.0).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(h1_norm_ball(&g.zeros(), 5.0).unwrap(), 0.0);
        // (2*5^3/3 + 2*5)^{1/2}; trapezoid error 2 * dr^2 * 10/12 in the square
        let h = h1_norm_ball(&g.sample(|r| Complex64::new(r, 0.0)), 5.0).unwrap();
        assert!((h - 9.660_917_830_792_959).abs() < 1e-4, "{h}");
    }

    #[test]
    fn trapezoid_converges_second_order() {
        let exact = {
            // int_0^2 exp(-2 r^2) r^2 dr * 4 pi, via fine Simpson
            let f = |r: f64| (-2.0 * r * r).exp() * r * r;
            let n = 200_000;
            let h = 2.0 / n as f64;
            let mut s = f(0.0) + f(2.0);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            4.0 * PI * s * h / 3.0
        };
        let err = |n: usize| {
            let g = RadialGrid::new(3.0, n, 3).unwrap();
            let v = l2_norm_ball(&g.sample(|r| Complex64::new((-r * r).exp(), 0.0)), 2.0).unwrap();
            (v * v - exact).abs()
        };
        let ratio = err(60) / err(120);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn field_length_checked() {
        let g = RadialGrid::new(1.0, 4, 1).unwrap();
        assert!(Field::new(g, vec![Complex64::new(0.0, 0.0); 4]).is_err());
        assert!(RadialGrid::new(1.0, 4, 4).is_err());
    }

    proptest! {
        #[test]
        fn l2_norm_absolutely_homogeneous(re in -5.0f64..5.0, im in -5.0f64..5.0, d in 1usize..=3) {
            let g = RadialGrid::new(6.0, 120, d).unwrap();
            let f = g.sample(|r| Complex64::new((-r).exp(), r.sin()));
            let c = Complex64::new(re, im);
            let a = l2_norm_ball(&f.scale(c), 5.0).unwrap();
            let b = c.norm() * l2_norm_ball(&f, 5.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }
    }
}

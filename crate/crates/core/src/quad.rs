//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-9,
            rel_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).norm())
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }

    /// Integrates `f` over `[a, b]`; `a > b` flips the sign as usual.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over consecutive intervals `[p0,p1], [p1,p2], ...`, seeding the
    /// adaptive refinement with these panels so kinks at the break points are
    /// resolved immediately.
    pub fn integrate_with_breaks<F: Fn(f64) -> Complex64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        if points.len() < 2 {
            return Ok(Estimate {
                value: Complex64::new(0.0, 0.0),
                error: 0.0,
                panels: 0,
            });
        }
        let (lo, hi) = (points[0], points[points.len() - 1]);
        if lo > hi {
            let rev: Vec<f64> = points.iter().rev().copied().collect();
            let est = self.integrate_with_breaks(f, &rev)?;
            return Ok(Estimate {
                value: -est.value,
                ..est
            });
        }

        let mut heap = BinaryHeap::new();
        let mut total = Complex64::new(0.0, 0.0);
        let mut total_err = 0.0;
        let mut frozen_err = 0.0;
        for w in points.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let (v, e) = gk15(&f, w[0], w[1]);
            total += v;
            total_err += e;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
            });
        }
        let mut panels = heap.len();

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.norm());
            // Panels exhausted to f64 resolution cannot improve; stop chasing them.
            if total_err - frozen_err <= tol {
                break;
            }
            if panels >= self.max_panels {
                return Err(Error::Quadrature {
                    estimate: total_err,
                    tolerance: tol,
                });
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel cannot be refined any further in f64; keep its contribution.
                frozen_err += worst.error;
                if heap.is_empty() {
                    break;
                }
                continue;
            }
            let (v1, e1) = gk15(&f, worst.a, mid);
            let (v2, e2) = gk15(&f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
            panels += 1;
        }

        // Re-sum from the panels to shed accumulated update rounding.
        let value = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
        let error: f64 = heap.iter().map(|p| p.error).sum::<f64>() + frozen_err;
        let value = if heap.is_empty() { total } else { value };
        Ok(Estimate { value, error, panels })
    }

    pub fn integrate_real<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        Ok(self.integrate(|x| Complex64::new(f(x), 0.0), a, b)?.value.re)
    }
}

/// Composite Simpson rule on `n` (rounded up to even) equal sub-intervals.
pub fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

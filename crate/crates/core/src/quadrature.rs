//! Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let value = k * h;
    Ok(Segment {
        a,
        b,
        value,
        error: ((k - g) * h).abs(),
    })
}

/// `∫_a^b f` to absolute tolerance `abs_tol`, bisecting the segment with the
/// largest error estimate until the summed estimate drops below it.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Config(format!("invalid interval [{a}, {b}]")));
    }
    let mut segs = vec![kronrod(&f, a, b)?];
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if error <= abs_tol {
            return Ok(Integral {
                value,
                error,
                intervals: segs.len(),
            });
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                estimate: error,
                tolerance: abs_tol,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(s.a < mid && mid < s.b) {
            return Err(Error::Quadrature {
                estimate: error,
                tolerance: abs_tol,
            });
        }
        segs.push(kronrod(&f, s.a, mid)?);
        segs.push(kronrod(&f, mid, s.b)?);
    }
}

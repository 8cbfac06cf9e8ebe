//! Sine and cosine integrals, used for the tail of Lorentzian transforms.

#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 200;

/// `(Si(x), Ci(x))` for `x > 0`.
///
/// Power series below x = 2, continued fraction for E1(ix) above.
pub fn sici(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x < SERIES_LIMIT {
        series(x)
    } else {
        continued_fraction(x)
    }
}

pub fn si(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 0.0 {
        -sici(-x).0
    } else {
        sici(x).0
    }
}

pub fn ci(x: f64) -> f64 {
    sici(x.abs()).1
}

fn series(x: f64) -> (f64, f64) {
    let mut si = 0.0;
    let mut ci = 0.0;
    let mut power = 1.0;
    for n in 1..MAX_ITER {
        power *= x / n as f64;
        let term = power / n as f64;
        match n % 4 {
            1 => si += term,
            2 => ci -= term,
            3 => si -= term,
            _ => ci += term,
        }
        if term < EPS * 1e-1 {
            break;
        }
    }
    (si, EULER_GAMMA + x.ln() + ci)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let tiny = f64::MIN_POSITIVE / EPS;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..MAX_ITER {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    let h = Complex64::new(x.cos(), -x.sin()) * h;
    (FRAC_PI_2 + h.im, -h.re)
}

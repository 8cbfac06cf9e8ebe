//! Small signal-analysis helpers for scans: extrema, peak prominence and
//! sinusoid fits.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

/// Indices of local minima.
///
/// A run of equal samples counts once, at its middle, when the samples on
/// both sides of the run are higher. An end point counts when it is below its
/// single neighbour, so a dip sitting at the start of a scan is reported.
pub fn local_minima(y: &[f64]) -> Vec<usize> {
    extrema(y, |a, b| a < b)
}

/// Indices of local maxima, with plateaus and end points handled as in
/// [`local_minima`].
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    extrema(y, |a, b| a > b)
}

fn extrema(y: &[f64], beats: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        let left = i == 0 || beats(y[i], y[i - 1]);
        let right = j + 1 == n || beats(y[i], y[j + 1]);
        if left && right && !(i == 0 && j + 1 == n) {
            out.push((i + j) / 2);
        }
        i = j + 1;
    }
    out
}

/// Topographic prominence of the maximum at `i`: its height above the higher
/// of the two lowest points separating it from taller terrain (or the array
/// end) on each side. A side with no samples at all, as for an end point,
/// does not constrain the base.
pub fn prominence(y: &[f64], i: usize) -> f64 {
    let peak = y[i];
    let side_min = |side: &[f64], forward: bool| {
        if side.is_empty() {
            return None;
        }
        let mut lowest = peak;
        let mut walk = |v: f64| {
            lowest = lowest.min(v);
            v <= peak
        };
        if forward {
            side.iter().all(|&v| walk(v));
        } else {
            side.iter().rev().all(|&v| walk(v));
        }
        Some(lowest)
    };
    let left = side_min(&y[..i], false);
    let right = side_min(&y[i + 1..], true);
    match (left, right) {
        (Some(l), Some(r)) => peak - l.max(r),
        (Some(m), None) | (None, Some(m)) => peak - m,
        (None, None) => 0.0,
    }
}

/// Local maxima whose prominence is at least `threshold`.
pub fn prominent_maxima(y: &[f64], threshold: f64) -> Vec<usize> {
    local_maxima(y)
        .into_iter()
        .filter(|&i| prominence(y, i) >= threshold)
        .collect()
}

/// `offset + amplitude·cos(k·x + phase)`, fitted by linear least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Sinusoid {
    /// `amplitude / offset`, the fringe visibility `(max − min)/(max + min)`.
    pub fn visibility(&self) -> f64 {
        if self.offset == 0.0 {
            0.0
        } else {
            (self.amplitude / self.offset).abs()
        }
    }

    pub fn eval(&self, k: f64, x: f64) -> f64 {
        self.offset + self.amplitude * (k * x + self.phase).cos()
    }
}

/// Least-squares fit of `a + b cos(kx) + c sin(kx)`.
///
/// Returns `None` when the design matrix is singular (fewer than three
/// distinct phases).
pub fn fit_sinusoid(x: &[f64], y: &[f64], k: f64) -> Option<Sinusoid> {
    assert_eq!(x.len(), y.len());
    let mut m = [[0.0f64; 3]; 3];
    let mut v = [0.0f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let (s, c) = (k * xi).sin_cos();
        let row = [1.0, c, s];
        for r in 0..3 {
            for col in 0..3 {
                m[r][col] += row[r] * row[col];
            }
            v[r] += row[r] * yi;
        }
    }
    let [a, b, c] = solve3(m, v)?;
    Some(Sinusoid {
        offset: a,
        amplitude: b.hypot(c),
        phase: (-c).atan2(b),
    })
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, e| acc.max(e.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            let pivot_row = m[col];
            for (x, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            v[r] -= f * v[col];
        }
    }
    let mut out = [0.0; 3];
    for r in (0..3).rev() {
        let mut acc = v[r];
        for c in r + 1..3 {
            acc -= m[r][c] * out[c];
        }
        out[r] = acc / m[r][r];
    }
    Some(out)
}

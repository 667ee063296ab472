//! B-spline basis evaluation.
//!
//! [`local_basis`] evaluates the `k + 1` basis functions that are nonzero on
//! the knot span containing `x`, together with their first three
//! derivatives, using the triangular scheme of de Boor with the standard
//! derivative recurrence. Near the ends of the knot vector some of those
//! functions would need knots that do not exist; the vector is extended
//! virtually with its end spacing and indices outside the real basis are
//! dropped, which leaves every real `B_i` untouched because `B_i` depends
//! only on `t_i..=t_{i+k+1}`.

use crate::error::{Error, Result};

/// Highest supported spline order.
pub const MAX_ORDER: usize = 7;
/// Derivative orders carried per basis function: value, 1st, 2nd, 3rd.
pub const DERIVS: usize = 4;

/// Uniform knots on `[lo, hi]` with `grid_size` cells, extended by `order`
/// cells on both sides. Length `grid_size + 2 * order + 1`.
pub fn uniform_knots(grid_size: usize, order: usize, lo: f64, hi: f64) -> Vec<f64> {
    let h = (hi - lo) / grid_size as f64;
    (0..=grid_size + 2 * order)
        .map(|j| lo + (j as f64 - order as f64) * h)
        .collect()
}

/// Number of basis functions of order `k` over `knots`.
pub fn basis_count(knots: &[f64], k: usize) -> usize {
    knots.len().saturating_sub(k + 1)
}

/// Index `i` with `t_i <= x < t_{i+1}`, or `None` outside `[t_0, t_m)`.
pub fn find_span(knots: &[f64], x: f64) -> Option<usize> {
    let m = knots.len().checked_sub(1)?;
    if !(x >= knots[0] && x < knots[m]) {
        return None;
    }
    // Largest i with knots[i] <= x.
    let i = knots.partition_point(|&t| t <= x) - 1;
    Some(i.min(m - 1))
}

/// Nonzero basis functions on one span and their derivatives.
#[derive(Clone, Copy, Debug)]
pub struct LocalBasis {
    /// Global index of the basis function stored at position 0 (may be
    /// negative or past the end near the knot-vector ends).
    pub first: isize,
    pub order: usize,
    /// `ders[r][j]` = r-th derivative of basis `first + j`.
    pub ders: [[f64; MAX_ORDER + 1]; DERIVS],
}

impl LocalBasis {
    /// Iterate `(global index, local position)` pairs that exist in a basis
    /// of `count` functions.
    pub fn valid(&self, count: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.order).filter_map(move |j| {
            let g = self.first + j as isize;
            (g >= 0 && (g as usize) < count).then_some((g as usize, j))
        })
    }
}

#[inline]
fn knot_at(knots: &[f64], i: isize) -> f64 {
    let m = knots.len() as isize - 1;
    if i < 0 {
        knots[0] + i as f64 * (knots[1] - knots[0])
    } else if i > m {
        knots[m as usize] + (i - m) as f64 * (knots[m as usize] - knots[m as usize - 1])
    } else {
        knots[i as usize]
    }
}

/// Basis values and derivatives (orders 0..=3) on the span containing `x`.
/// Returns `None` when `x` is outside `[t_0, t_m)`.
pub fn local_basis(knots: &[f64], k: usize, x: f64) -> Option<LocalBasis> {
    assert!(k <= MAX_ORDER, "spline order {k} exceeds {MAX_ORDER}");
    let span = find_span(knots, x)? as isize;
    let u = |i: isize| knot_at(knots, i);

    const N: usize = MAX_ORDER + 1;
    let mut ndu = [[0.0f64; N]; N];
    let mut left = [0.0f64; N];
    let mut right = [0.0f64; N];
    ndu[0][0] = 1.0;
    for j in 1..=k {
        left[j] = x - u(span + 1 - j as isize);
        right[j] = u(span + j as isize) - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = [[0.0f64; N]; DERIVS];
    for j in 0..=k {
        ders[0][j] = ndu[j][k];
    }
    let n = k.min(DERIVS - 1);
    let mut a = [[0.0f64; N]; 2];
    for r in 0..=k {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for kk in 1..=n {
            let mut d = 0.0;
            let rk = r as isize - kk as isize;
            let pk = k - kk;
            if rk >= 0 {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { kk - 1 } else { k - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                d += a[s2][kk] * ndu[r][pk];
            }
            ders[kk][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = k as f64;
    for (kk, row) in ders.iter_mut().enumerate().take(n + 1).skip(1) {
        for v in row.iter_mut().take(k + 1) {
            *v *= factor;
        }
        factor *= (k - kk) as f64;
    }

    Some(LocalBasis {
        first: span - k as isize,
        order: k,
        ders,
    })
}

/// All `#knots − k − 1` basis values `B_{i,k}(x)`.
pub fn bspline_basis(x: f64, knots: &[f64], k: usize) -> Result<Vec<f64>> {
    if k > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "spline order {k} exceeds {MAX_ORDER}"
        )));
    }
    if knots.len() < k + 2 || knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "knots must be strictly increasing with at least k + 2 entries".into(),
        ));
    }
    let count = basis_count(knots, k);
    let local = local_basis(knots, k, x).ok_or(Error::OutOfDomain {
        value: x,
        lo: knots[0],
        hi: knots[knots.len() - 1],
    })?;
    let mut out = vec![0.0; count];
    for (g, j) in local.valid(count) {
        out[g] = local.ders[0][j];
    }
    Ok(out)
}

//! Mother wavelets and base activations with derivatives up to third order.
//!
//! Third derivatives are needed by the reverse sweep: the input adjoint of a
//! second-order jet involves d/dx of f''.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mother {
    /// ψ(u) = sin(u)
    Sin,
    /// ψ(u) = (1 − u²) e^{−u²/2}
    MexicanHat,
    /// ψ(u) = cos(5u) e^{−u²/2}
    Morlet,
    /// ψ(u) = −u e^{−u²/2}
    Dog,
}

/// Derivatives 0..=3 of g(u)·e^{−u²/2} by Leibniz' rule, given g's.
#[inline]
fn times_gaussian(u: f64, g: [f64; 4]) -> [f64; 4] {
    let e = (-0.5 * u * u).exp();
    let ed = [e, -u * e, (u * u - 1.0) * e, (3.0 * u - u * u * u) * e];
    [
        g[0] * ed[0],
        g[1] * ed[0] + g[0] * ed[1],
        g[2] * ed[0] + 2.0 * g[1] * ed[1] + g[0] * ed[2],
        g[3] * ed[0] + 3.0 * g[2] * ed[1] + 3.0 * g[1] * ed[2] + g[0] * ed[3],
    ]
}

impl Mother {
    pub const ALL: [Mother; 4] = [Mother::Sin, Mother::MexicanHat, Mother::Morlet, Mother::Dog];

    /// ψ, ψ', ψ'', ψ''' at `u`.
    #[inline]
    pub fn derivs(self, u: f64) -> [f64; 4] {
        match self {
            Mother::Sin => {
                let (s, c) = u.sin_cos();
                [s, c, -s, -c]
            }
            Mother::MexicanHat => times_gaussian(u, [1.0 - u * u, -2.0 * u, -2.0, 0.0]),
            Mother::Morlet => {
                let (s, c) = (5.0 * u).sin_cos();
                times_gaussian(u, [c, -5.0 * s, -25.0 * c, 125.0 * s])
            }
            Mother::Dog => times_gaussian(u, [-u, -1.0, 0.0, 0.0]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mother::Sin => "sin",
            Mother::MexicanHat => "mexican_hat",
            Mother::Morlet => "morlet",
            Mother::Dog => "dog",
        }
    }
}

impl fmt::Display for Mother {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mother {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Mother::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown wavelet '{s}'")))
    }
}

/// Base activation σ in φ(x) = w_b σ(x) + w_s Σ c_i B_i(x).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseActivation {
    #[default]
    Sin,
    Silu,
}

impl BaseActivation {
    #[inline]
    pub fn derivs(self, x: f64) -> [f64; 4] {
        match self {
            BaseActivation::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            BaseActivation::Silu => {
                let s = 1.0 / (1.0 + (-x).exp());
                let s1 = s * (1.0 - s);
                let s2 = s1 * (1.0 - 2.0 * s);
                let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
                [x * s, s + x * s1, 2.0 * s1 + x * s2, 3.0 * s2 + x * s3]
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseActivation::Sin => "sin",
            BaseActivation::Silu => "silu",
        }
    }
}

impl FromStr for BaseActivation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sin" => Ok(BaseActivation::Sin),
            "silu" => Ok(BaseActivation::Silu),
            other => Err(Error::Parse(format!("unknown base activation '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_fd(f: impl Fn(f64) -> [f64; 4], x: f64) {
        let h = 1e-5;
        let p = f(x + h);
        let m = f(x - h);
        let c = f(x);
        for r in 0..3 {
            let fd = (p[r] - m[r]) / (2.0 * h);
            assert!(
                (c[r + 1] - fd).abs() < 1e-6 * c[r + 1].abs().max(1.0) * 10.0,
                "x={x} r={r}: {} vs {fd}",
                c[r + 1]
            );
        }
    }

    #[test]
    fn wavelet_derivatives_are_consistent() {
        for m in Mother::ALL {
            for &u in &[-2.1, -0.7, 0.0, 0.3, 1.0, 1.9] {
                check_fd(|v| m.derivs(v), u);
            }
        }
    }

    #[test]
    fn base_derivatives_are_consistent() {
        for b in [BaseActivation::Sin, BaseActivation::Silu] {
            for &x in &[-3.0, -0.5, 0.0, 0.8, 2.5] {
                check_fd(|v| b.derivs(v), x);
            }
        }
    }

    #[test]
    fn mexican_hat_landmarks() {
        let d0 = Mother::MexicanHat.derivs(0.0);
        assert_eq!(d0[0], 1.0);
        assert_eq!(d0[1], 0.0);
        assert_eq!(Mother::MexicanHat.derivs(1.0)[0], 0.0);
        assert_eq!(Mother::Dog.derivs(0.0)[0], 0.0);
        assert_eq!(Mother::Morlet.derivs(0.0)[0], 1.0);
    }

    #[test]
    fn names_round_trip() {
        for m in Mother::ALL {
            assert_eq!(m.name().parse::<Mother>().unwrap(), m);
        }
        assert!("haar".parse::<Mother>().is_err());
    }
}

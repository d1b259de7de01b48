//! Link distributions `G` for the binomial model `P(Y = 1 | x) = G(a + b'x)`.
//!
//! Every family provides `log G` and `log(1 - G)` directly, never as the log
//! of a rounded probability, so that deep tails keep full relative accuracy.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal};
use libm::erfc;

use super::tlogistic;
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A one-dimensional link distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkFamily {
    /// `G(z) = e^z / (1 + e^z)` (logit link).
    Logistic,
    /// Gumbel distribution of minima, `G(z) = 1 - exp(-e^z)` (complementary log-log link).
    GumbelMin,
    /// Standard normal (probit link).
    Normal,
    /// Standard Cauchy (cauchit link).
    Cauchy,
    /// Uniform on `[-1, 1]`.
    Uniform,
    /// t-logistic with parameter `t`.
    TLogistic(f64),
}

impl LinkFamily {
    /// Tail index `q` of the extreme-value limit `m G(c_m + d_m z) -> exp_q(z)`.
    pub fn tail_index(&self) -> f64 {
        match *self {
            LinkFamily::Logistic | LinkFamily::GumbelMin | LinkFamily::Normal => 1.0,
            LinkFamily::Cauchy => 2.0,
            LinkFamily::Uniform => 0.0,
            LinkFamily::TLogistic(t) => t.max(0.0),
        }
    }

    /// Whether `log G` and `log(1 - G)` are both concave, which makes the
    /// binomial log-likelihood concave in `(a, b)`.
    pub fn is_log_concave(&self) -> bool {
        match *self {
            LinkFamily::Cauchy => false,
            LinkFamily::TLogistic(t) => t <= 1.0,
            _ => true,
        }
    }

    /// Canonical string tag, as accepted by [`FromStr`].
    pub fn tag(&self) -> String {
        self.to_string()
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            LinkFamily::Logistic => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            LinkFamily::GumbelMin => -(-z.exp()).exp_m1(),
            LinkFamily::Normal => 0.5 * erfc(-z * FRAC_1_SQRT_2),
            LinkFamily::Cauchy => cauchy_cdf(z),
            LinkFamily::Uniform => ((1.0 + z) / 2.0).clamp(0.0, 1.0),
            LinkFamily::TLogistic(t) => tlogistic_point(t, z).cdf,
        }
    }

    /// `log G(z)`.
    pub fn log_cdf(&self, z: f64) -> f64 {
        match *self {
            LinkFamily::Logistic => -softplus(-z),
            LinkFamily::GumbelMin => gumbel_log_cdf(z),
            LinkFamily::Normal => normal_log_cdf(z),
            LinkFamily::Cauchy => {
                if z < 0.0 {
                    cauchy_cdf(z).ln()
                } else {
                    (-cauchy_cdf(-z)).ln_1p()
                }
            }
            LinkFamily::Uniform => {
                if z <= -1.0 {
                    f64::NEG_INFINITY
                } else if z >= 1.0 {
                    0.0
                } else {
                    (0.5 * (1.0 + z)).ln()
                }
            }
            LinkFamily::TLogistic(t) => tlogistic_point(t, z).log_cdf,
        }
    }

    /// `log(1 - G(z))`.
    pub fn log_sf(&self, z: f64) -> f64 {
        match *self {
            LinkFamily::GumbelMin => -z.exp(),
            LinkFamily::TLogistic(t) => tlogistic_point(t, z).log_sf,
            // the remaining families are symmetric about 0
            _ => self.log_cdf(-z),
        }
    }

    pub fn density(&self, z: f64) -> f64 {
        match *self {
            LinkFamily::Logistic => {
                let g = self.cdf(z);
                g * self.cdf(-z)
            }
            LinkFamily::GumbelMin => (z - z.exp()).exp(),
            LinkFamily::Normal => (-0.5 * z * z - LN_SQRT_2PI).exp(),
            LinkFamily::Cauchy => 1.0 / (PI * (1.0 + z * z)),
            LinkFamily::Uniform => {
                if (-1.0..=1.0).contains(&z) {
                    0.5
                } else {
                    0.0
                }
            }
            LinkFamily::TLogistic(t) => tlogistic::t_logistic_density(t, z).unwrap_or(f64::NAN),
        }
    }

    /// Generalized inverse `G^{-1}(u)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return f64::NAN;
        }
        match *self {
            LinkFamily::Logistic => (u / (1.0 - u)).ln(),
            LinkFamily::GumbelMin => (-(-u).ln_1p()).ln(),
            LinkFamily::Normal => {
                let mut z = Normal::standard().inverse_cdf(u);
                // the library inverse is only accurate to ~1e-9; polish with Newton
                if z.is_finite() {
                    for _ in 0..3 {
                        let step = if u < 0.5 {
                            (self.cdf(z) - u) / self.density(z)
                        } else {
                            ((1.0 - u) - self.cdf(-z)) / self.density(z)
                        };
                        z -= step;
                    }
                }
                z
            }
            LinkFamily::Cauchy => {
                if u == 0.0 {
                    f64::NEG_INFINITY
                } else if u == 1.0 {
                    f64::INFINITY
                } else if u < 0.5 {
                    -1.0 / (PI * u).tan()
                } else {
                    1.0 / (PI * (1.0 - u)).tan()
                }
            }
            LinkFamily::Uniform => 2.0 * u - 1.0,
            LinkFamily::TLogistic(t) => tlogistic::t_logistic_quantile(t, u),
        }
    }

    /// `[log G(z), d/dz log G(z), d^2/dz^2 log G(z)]`.
    pub fn log_cdf_derivs(&self, z: f64) -> [f64; 3] {
        match *self {
            LinkFamily::Logistic => {
                let s_neg = self.cdf(-z);
                [-softplus(-z), s_neg, -s_neg * self.cdf(z)]
            }
            LinkFamily::GumbelMin => gumbel_log_cdf_derivs(z),
            LinkFamily::Normal => normal_log_cdf_derivs(z),
            LinkFamily::Cauchy => {
                let lg = self.log_cdf(z);
                let g = cauchy_cdf(z);
                let zz = 1.0 + z * z;
                let dens = 1.0 / (PI * zz);
                let ddens = -2.0 * z / (PI * zz * zz);
                let d1 = dens / g;
                [lg, d1, ddens / g - d1 * d1]
            }
            LinkFamily::Uniform => {
                if z <= -1.0 {
                    [f64::NEG_INFINITY, 0.0, 0.0]
                } else if z >= 1.0 {
                    [0.0, 0.0, 0.0]
                } else {
                    let r = 1.0 / (1.0 + z);
                    [(0.5 * (1.0 + z)).ln(), r, -r * r]
                }
            }
            LinkFamily::TLogistic(t) => tlogistic::t_logistic_log_cdf_derivs(t, z)
                .unwrap_or([f64::NAN; 3]),
        }
    }

    /// `[log(1-G(z)), d/dz, d^2/dz^2]`.
    pub fn log_sf_derivs(&self, z: f64) -> [f64; 3] {
        match *self {
            LinkFamily::GumbelMin => {
                let w = z.exp();
                [-w, -w, -w]
            }
            _ => {
                let [v, d1, d2] = self.log_cdf_derivs(-z);
                [v, -d1, d2]
            }
        }
    }
}

fn tlogistic_point(t: f64, z: f64) -> tlogistic::TLogisticPoint {
    // Finite inputs always bracket; a failure here is an internal defect and
    // surfaces as NaN rather than a panic.
    tlogistic::t_logistic_point(t, z).unwrap_or_else(|e| {
        debug_assert!(z.is_nan(), "{e}");
        tlogistic::TLogisticPoint {
            gamma: f64::NAN,
            cdf: f64::NAN,
            sf: f64::NAN,
            log_cdf: f64::NAN,
            log_sf: f64::NAN,
        }
    })
}

/// `log(1 + e^x)`.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn cauchy_cdf(z: f64) -> f64 {
    if z == 0.0 {
        0.5
    } else if z < 0.0 {
        // 1/2 + atan(z)/pi without cancellation in the lower tail
        (-1.0 / z).atan() / PI
    } else {
        1.0 - (1.0 / z).atan() / PI
    }
}

fn gumbel_log_cdf(z: f64) -> f64 {
    let w = z.exp();
    if w < 1e-10 {
        // log(1 - e^{-w}) = log w - w/2 + w^2/24 + ...
        z - 0.5 * w + w * w / 24.0
    } else {
        (-(-w).exp_m1()).ln()
    }
}

fn gumbel_log_cdf_derivs(z: f64) -> [f64; 3] {
    let w = z.exp();
    let v = gumbel_log_cdf(z);
    if w < 1e-2 {
        // h(w) = w/(e^w - 1) = 1 - w/2 + w^2/12 - w^4/720 + ...
        let w2 = w * w;
        let h = 1.0 - 0.5 * w + w2 / 12.0 - w2 * w2 / 720.0;
        // 1 - w - h, expanded to avoid cancellation
        let rest = -0.5 * w - w2 / 12.0 + w2 * w2 / 720.0;
        [v, h, h * rest]
    } else if w > 700.0 {
        [v, 0.0, 0.0]
    } else {
        let h = w / w.exp_m1();
        [v, h, h * (1.0 - w - h)]
    }
}

/// `log Phi(z)`.
fn normal_log_cdf(z: f64) -> f64 {
    if z < -37.0 {
        // asymptotic Mills-ratio series; erfc underflows below about -37.5
        let z2inv = 1.0 / (z * z);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=12 {
            term *= -((2 * k - 1) as f64) * z2inv;
            sum += term;
        }
        -0.5 * z * z - (-z).ln() - LN_SQRT_2PI + sum.ln()
    } else if z < 0.0 {
        (0.5 * erfc(-z * FRAC_1_SQRT_2)).ln()
    } else {
        (-0.5 * erfc(z * FRAC_1_SQRT_2)).ln_1p()
    }
}

fn normal_log_cdf_derivs(z: f64) -> [f64; 3] {
    let v = normal_log_cdf(z);
    let log_pdf = -0.5 * z * z - LN_SQRT_2PI;
    let r = (log_pdf - v).exp();
    [v, r, -r * (z + r)]
}

impl fmt::Display for LinkFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkFamily::Logistic => f.write_str("logistic"),
            LinkFamily::GumbelMin => f.write_str("gumbel-min"),
            LinkFamily::Normal => f.write_str("probit"),
            LinkFamily::Cauchy => f.write_str("cauchit"),
            LinkFamily::Uniform => f.write_str("uniform"),
            LinkFamily::TLogistic(t) => write!(f, "t-logistic:{t}"),
        }
    }
}

impl FromStr for LinkFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tag = s.trim().to_ascii_lowercase();
        let family = match tag.as_str() {
            "logistic" | "logit" => LinkFamily::Logistic,
            "gumbel-min" | "gumbel" | "cloglog" => LinkFamily::GumbelMin,
            "probit" | "normal" => LinkFamily::Normal,
            "cauchit" | "cauchy" => LinkFamily::Cauchy,
            "uniform" => LinkFamily::Uniform,
            other => {
                let t = other
                    .strip_prefix("t-logistic:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|t| t.is_finite())
                    .ok_or_else(|| Error::UnknownLink(s.to_string()))?;
                LinkFamily::TLogistic(t)
            }
        };
        Ok(family)
    }
}

impl Serialize for LinkFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LinkFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [LinkFamily; 8] = [
        LinkFamily::Logistic,
        LinkFamily::GumbelMin,
        LinkFamily::Normal,
        LinkFamily::Cauchy,
        LinkFamily::Uniform,
        LinkFamily::TLogistic(0.5),
        LinkFamily::TLogistic(1.5),
        LinkFamily::TLogistic(-1.0),
    ];

    #[test]
    fn trivial_values() {
        assert_eq!(LinkFamily::Logistic.cdf(0.0), 0.5);
        assert!((LinkFamily::Uniform.cdf(0.2) - 0.6).abs() < 1e-15);
        assert_eq!(LinkFamily::Cauchy.cdf(0.0), 0.5);
    }

    #[test]
    fn normal_log_cdf_against_high_precision() {
        // arbitrary-precision values of log Phi(z)
        let cases = [
            (-8.0, -35.013_437_159_914_55),
            (-30.0, -454.321_243_956_343_2),
            (-37.0, -689.030_585_576_890_6),
            (-40.0, -804.608_442_013_753_8),
            (-60.0, -1_805.013_560_680_567),
            (-3.0, -6.607_726_221_510_349_5),
            (2.0, -0.023_012_909_328_963_488),
            (9.0, -1.128_588_405_953_840_6e-19),
        ];
        for (z, want) in cases {
            let got = LinkFamily::Normal.log_cdf(z);
            assert!(((got - want) / want).abs() < 1e-12, "z = {z}: {got} vs {want}");
        }
    }

    #[test]
    fn other_tails_against_high_precision() {
        let l = LinkFamily::Logistic;
        assert!((l.log_cdf(-30.0) - -30.000_000_000_000_093_576).abs() < 1e-13);
        assert!(((l.log_sf(-30.0) - -9.357_622_968_839_737e-14) / 9.357e-14).abs() < 1e-12);
        assert!(((l.log_cdf(40.0) - -4.248_354_255_291_589e-18) / 4.248e-18).abs() < 1e-12);
        let g = LinkFamily::GumbelMin;
        assert!((g.log_cdf(-40.0) - -40.0).abs() < 1e-14);
        assert!((g.log_cdf(-1.0) - -1.178_307_096_420_717_8).abs() < 1e-14);
        assert!(((g.log_cdf(2.0) - -6.181_700_170_515_202e-4) / 6.18e-4).abs() < 1e-12);
        let c = LinkFamily::Cauchy;
        assert!(((c.log_cdf(-1e8) - -19.565_410_629_801_766) / 19.565).abs() < 1e-12);
        assert!(((c.log_cdf(-3.0) - -2.278_708_595_290_298_7) / 2.2787).abs() < 1e-12);
    }

    #[test]
    fn log_cdf_and_log_sf_are_complementary() {
        for fam in ALL {
            for i in 0..=200 {
                let z = -0.99 + 1.98 * i as f64 / 200.0;
                let s = fam.log_cdf(z).exp() + fam.log_sf(z).exp();
                assert!((s - 1.0).abs() < 1e-12, "{fam} at {z}: {s}");
            }
        }
    }

    #[test]
    fn cdf_is_monotone_with_correct_limits() {
        for fam in ALL {
            let mut prev = 0.0;
            for i in 0..=400 {
                let z = -50.0 + 0.25 * i as f64;
                let g = fam.cdf(z);
                assert!(g >= prev && (0.0..=1.0).contains(&g), "{fam} at {z}");
                prev = g;
            }
            assert!(fam.cdf(-1e7) < 1e-6);
            assert!(fam.cdf(1e7) > 1.0 - 1e-6);
        }
    }

    fn interior(fam: LinkFamily, z: f64) -> bool {
        [-2e-5, 2e-5].iter().all(|h| fam.log_cdf(z + h).is_finite() && fam.log_sf(z + h).is_finite())
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for fam in ALL {
            for &z in &[-0.7, -0.2, 0.0, 0.35, 0.8] {
                if !interior(fam, z) {
                    continue;
                }
                for (f, d) in [
                    (
                        Box::new(move |z| fam.log_cdf(z)) as Box<dyn Fn(f64) -> f64>,
                        fam.log_cdf_derivs(z),
                    ),
                    (Box::new(move |z| fam.log_sf(z)), fam.log_sf_derivs(z)),
                ] {
                    let fd1 = (f(z + h) - f(z - h)) / (2.0 * h);
                    let fd2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
                    assert!((d[0] - f(z)).abs() < 1e-14 * f(z).abs().max(1.0), "{fam} value at {z}");
                    assert!((d[1] - fd1).abs() < 1e-7 * d[1].abs().max(1.0), "{fam} d1 at {z}");
                    assert!((d[2] - fd2).abs() < 1e-4 * d[2].abs().max(1.0), "{fam} d2 at {z}");
                }
            }
        }
    }

    #[test]
    fn density_integrates_cdf() {
        let h = 1e-6;
        for fam in ALL {
            for &z in &[-0.45, 0.1, 0.6] {
                if !interior(fam, z) {
                    continue;
                }
                let fd = (fam.cdf(z + h) - fam.cdf(z - h)) / (2.0 * h);
                assert!((fd - fam.density(z)).abs() < 1e-7, "{fam} at {z}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for fam in ALL {
            for &u in &[1e-4, 0.2, 0.5, 0.9] {
                let z = fam.quantile(u);
                assert!((fam.cdf(z) - u).abs() < 1e-12, "{fam} at {u}");
            }
        }
    }

    #[test]
    fn tags_round_trip() {
        for fam in ALL {
            let back: LinkFamily = fam.tag().parse().unwrap();
            assert_eq!(back, fam);
        }
        assert_eq!("logit".parse::<LinkFamily>().unwrap(), LinkFamily::Logistic);
        assert_eq!("cloglog".parse::<LinkFamily>().unwrap(), LinkFamily::GumbelMin);
        assert!("t-logistic:abc".parse::<LinkFamily>().is_err());
        assert!("weibull".parse::<LinkFamily>().is_err());
        let json = serde_json::to_string(&LinkFamily::TLogistic(2.0)).unwrap();
        assert_eq!(json, "\"t-logistic:2\"");
    }

    #[test]
    fn tail_indices() {
        assert_eq!(LinkFamily::Cauchy.tail_index(), 2.0);
        assert_eq!(LinkFamily::TLogistic(-3.0).tail_index(), 0.0);
        assert_eq!(LinkFamily::TLogistic(2.5).tail_index(), 2.5);
    }
}

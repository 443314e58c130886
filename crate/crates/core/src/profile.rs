//! Analytic scalar profiles along the arc length and the smooth cutoff
//! functions used by trial functions and quasimodes.

use alloc::boxed::Box;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Standard C-infinity bump `exp(1 - 1/(1 - x^2))` on `(-1, 1)`, peak value 1.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - x * x)).exp()
}

pub fn bump_d1(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - x * x;
    bump(x) * (-2.0 * x / (q * q))
}

pub fn bump_d2(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - x * x;
    let g1 = -2.0 * x / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
    bump(x) * (g1 * g1 + g2)
}

/// `int_{-1}^{1} bump(x)^2 dx`.
pub fn bump_l2_norm_sq() -> f64 {
    simpson(-1.0, 1.0, 4096, |x| bump(x) * bump(x))
}

fn smooth_step_kernel(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn smooth_step_kernel_d1(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        smooth_step_kernel(x) / (x * x)
    }
}

/// Smooth plateau: 1 on `[-1, 1]`, 0 outside `(-2, 2)`, values in `[0, 1]`.
pub fn plateau(s: f64) -> f64 {
    let u = s.abs();
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else {
        let a = smooth_step_kernel(2.0 - u);
        let b = smooth_step_kernel(u - 1.0);
        a / (a + b)
    }
}

pub fn plateau_d1(s: f64) -> f64 {
    let u = s.abs();
    if u <= 1.0 || u >= 2.0 {
        return 0.0;
    }
    let a = smooth_step_kernel(2.0 - u);
    let b = smooth_step_kernel(u - 1.0);
    let da = -smooth_step_kernel_d1(2.0 - u);
    let db = smooth_step_kernel_d1(u - 1.0);
    let du = (da * b - a * db) / ((a + b) * (a + b));
    if s < 0.0 {
        -du
    } else {
        du
    }
}

/// Composite Simpson rule with `intervals` (rounded up to even) sub-intervals.
pub fn simpson<F: Fn(f64) -> f64>(lo: f64, hi: f64, intervals: usize, f: F) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson weights for `points` (odd) equally spaced nodes on `[lo, hi]`.
pub fn simpson_weights(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 3 && points % 2 == 1);
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let w = if i == 0 || i == points - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Analytic profile `p(s)` with first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `height * bump((s - center) / half_width)`
    Bump {
        height: f64,
        center: f64,
        half_width: f64,
    },
    /// `amplitude / (1 + (s - center)^2)`
    Lorentzian {
        amplitude: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        center: f64,
    },
    Sum {
        terms: Vec<Profile>,
    },
    Scaled {
        factor: f64,
        profile: Box<Profile>,
    },
}

impl Profile {
    pub fn bump(height: f64, center: f64, half_width: f64) -> Self {
        Profile::Bump { height, center, half_width }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Bump { height, center, half_width } => height * bump((s - center) / half_width),
            Profile::Lorentzian { amplitude, center } => {
                let x = s - center;
                amplitude / (1.0 + x * x)
            }
            Profile::Sum { terms } => terms.iter().map(|p| p.value(s)).sum(),
            Profile::Scaled { factor, profile } => factor * profile.value(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Zero | Profile::Constant { .. } => 0.0,
            Profile::Bump { height, center, half_width } => height / half_width * bump_d1((s - center) / half_width),
            Profile::Lorentzian { amplitude, center } => {
                let x = s - center;
                let q = 1.0 + x * x;
                -2.0 * amplitude * x / (q * q)
            }
            Profile::Sum { terms } => terms.iter().map(|p| p.derivative(s)).sum(),
            Profile::Scaled { factor, profile } => factor * profile.derivative(s),
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Zero | Profile::Constant { .. } => 0.0,
            Profile::Bump { height, center, half_width } => {
                height / (half_width * half_width) * bump_d2((s - center) / half_width)
            }
            Profile::Lorentzian { amplitude, center } => {
                let x = s - center;
                let q = 1.0 + x * x;
                amplitude * (6.0 * x * x - 2.0) / (q * q * q)
            }
            Profile::Sum { terms } => terms.iter().map(|p| p.second_derivative(s)).sum(),
            Profile::Scaled { factor, profile } => factor * profile.second_derivative(s),
        }
    }

    /// Closed interval outside which the profile vanishes identically, if any.
    pub fn support(&self) -> Option<Option<(f64, f64)>> {
        match self {
            Profile::Zero => Some(None),
            Profile::Constant { value } if *value == 0.0 => Some(None),
            Profile::Constant { .. } | Profile::Lorentzian { .. } => None,
            Profile::Bump { height, center, half_width } => {
                if *height == 0.0 {
                    Some(None)
                } else {
                    Some(Some((center - half_width.abs(), center + half_width.abs())))
                }
            }
            Profile::Scaled { factor, profile } => {
                if *factor == 0.0 {
                    Some(None)
                } else {
                    profile.support()
                }
            }
            Profile::Sum { terms } => {
                let mut acc: Option<(f64, f64)> = None;
                for t in terms {
                    match t.support()? {
                        None => {}
                        Some((lo, hi)) => {
                            acc = Some(match acc {
                                None => (lo, hi),
                                Some((a, b)) => (a.min(lo), b.max(hi)),
                            })
                        }
                    }
                }
                Some(acc)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.support(), Some(None))
    }

    pub fn sample(&self, nodes: impl Iterator<Item = f64>) -> Vec<f64> {
        nodes.map(|s| self.value(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for x in [-0.9, -0.5, 0.0, 0.3, 0.77] {
            let fd1 = (bump(x + h) - bump(x - h)) / (2.0 * h);
            let fd2 = (bump_d1(x + h) - bump_d1(x - h)) / (2.0 * h);
            assert!((fd1 - bump_d1(x)).abs() < 1e-8);
            assert!((fd2 - bump_d2(x)).abs() < 1e-6 * (1.0 + bump_d2(x).abs()));
        }
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.5), 1.0);
        assert_eq!(plateau(-1.0), 1.0);
        assert_eq!(plateau(2.5), 0.0);
        assert!((plateau(1.5) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        for s in [-1.7, -1.2, 1.1, 1.5, 1.93] {
            let fd = (plateau(s + h) - plateau(s - h)) / (2.0 * h);
            assert!((fd - plateau_d1(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn profile_derivatives() {
        let profiles = [
            Profile::bump(0.5, 0.3, 2.0),
            Profile::Lorentzian { amplitude: 0.7, center: -0.4 },
            Profile::Sum { terms: alloc::vec![Profile::Constant { value: 1.0 }, Profile::bump(1.0, 0.0, 1.0)] },
        ];
        let h = 1e-5;
        for p in &profiles {
            for s in [-1.3, -0.2, 0.0, 0.6, 1.9] {
                let fd1 = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
                let fd2 = (p.derivative(s + h) - p.derivative(s - h)) / (2.0 * h);
                assert!((fd1 - p.derivative(s)).abs() < 1e-8);
                assert!((fd2 - p.second_derivative(s)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let v = simpson(0.0, 2.0, 4, |x| x * x * x - x);
        assert!((v - 2.0).abs() < 1e-14);
        let w = simpson_weights(0.0, 2.0, 5);
        let v2: f64 = w.iter().enumerate().map(|(i, wi)| wi * (0.5 * i as f64).powi(3)).sum();
        assert!((v2 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn support_of_sums() {
        let p = Profile::Sum { terms: alloc::vec![Profile::bump(1.0, -3.0, 1.0), Profile::bump(1.0, 2.0, 0.5)] };
        assert_eq!(p.support(), Some(Some((-4.0, 2.5))));
        assert!(Profile::Zero.is_zero());
        assert_eq!(Profile::Lorentzian { amplitude: 1.0, center: 0.0 }.support(), None);
    }
}

//! Truncated lag-window kernels.
//!
//! Every kernel is even, equals 1 at the origin and vanishes for `|x| >= 1`.
//! Evaluation goes through `|x|`, so symmetry holds bit-for-bit.
//!
//! Smoothness classes:
//!
//! - `A3`: the restriction of `w` to `[0, 1]` is twice continuously
//!   differentiable.
//! - `A4(r)`: the restriction is `(r + 1)`-times continuously differentiable
//!   for some `r >= 2`. Results that need `A4` are not available for the
//!   Parzen window.
//! - `Unverified`: user-supplied kernels; nothing is known analytically.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::{Error, Result};

/// Smoothness class of a kernel restricted to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    A3,
    A4 { r: u32 },
    Unverified,
}

impl Smoothness {
    /// True for `A4` with order at least `min_r`.
    pub fn satisfies_a4(&self, min_r: u32) -> bool {
        matches!(self, Smoothness::A4 { r } if *r >= min_r)
    }
}

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelKind {
    /// `1 - |x|^q` on `[-1, 1]`; `q = 1` is the Bartlett window.
    Power { q: f64 },
    /// Piecewise cubic Parzen window.
    Parzen,
    /// User-supplied profile on `[0, 1)`.
    Custom { name: String, profile: KernelFn },
}

impl fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Power { q } => f.debug_struct("Power").field("q", q).finish(),
            KernelKind::Parzen => f.write_str("Parzen"),
            KernelKind::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LagKernel {
    kind: KernelKind,
}

impl LagKernel {
    pub fn bartlett() -> Self {
        Self { kind: KernelKind::Power { q: 1.0 } }
    }

    pub fn parzen() -> Self {
        Self { kind: KernelKind::Parzen }
    }

    pub fn power(q: f64) -> Result<Self> {
        if !q.is_finite() || q < 1.0 {
            return Err(Error::InvalidKernel(format!("power exponent must be >= 1, got {q}")));
        }
        Ok(Self { kind: KernelKind::Power { q } })
    }

    /// Kernel defined by `profile(|x|)` on `[0, 1)`.
    ///
    /// `profile(0)` must be exactly 1. The profile is never called outside
    /// `[0, 1)`. Custom kernels are always classified [`Smoothness::Unverified`].
    pub fn custom<F>(name: impl Into<String>, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let at_zero = profile(0.0);
        if at_zero != 1.0 {
            return Err(Error::InvalidKernel(format!("custom kernel must equal 1 at 0, got {at_zero}")));
        }
        Ok(Self { kind: KernelKind::Custom { name: name.into(), profile: Arc::new(profile) } })
    }

    /// Piecewise-linear kernel through `table[i] = w(i / (len - 1))`.
    ///
    /// The table must start at 1; its last entry is the value just before the
    /// cut-off at `|x| = 1`.
    pub fn tabulated(name: impl Into<String>, table: Vec<f64>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::InvalidKernel("table needs at least two points".into()));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("table contains non-finite values".into()));
        }
        let last = (table.len() - 1) as f64;
        Self::custom(name, move |x| {
            let pos = x * last;
            let i = (pos.floor() as usize).min(table.len() - 2);
            let t = pos - i as f64;
            table[i] + t * (table[i + 1] - table[i])
        })
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            KernelKind::Power { q } if *q == 1.0 => "bartlett".to_string(),
            KernelKind::Power { q } => format!("power:{q}"),
            KernelKind::Parzen => "parzen".to_string(),
            KernelKind::Custom { name, .. } => name.clone(),
        }
    }

    /// Kernel weight `w(x)`. Zero outside `(-1, 1)`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a >= 1.0 || a.is_nan() {
            return 0.0;
        }
        match &self.kind {
            KernelKind::Power { q } => {
                if *q == 1.0 {
                    1.0 - a
                } else {
                    1.0 - a.powf(*q)
                }
            }
            KernelKind::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else {
                    let t = 1.0 - a;
                    2.0 * t * t * t
                }
            }
            KernelKind::Custom { profile, .. } => profile(a),
        }
    }

    /// Smoothness class of the kernel.
    ///
    /// For the power family, `1 - x^q` is `floor(q)` times continuously
    /// differentiable at the origin, so `q >= 3` gives `A4` with
    /// `r = floor(q) - 1 >= 2`. Smaller exponents fall back to `A3`.
    pub fn classify(&self) -> Smoothness {
        match &self.kind {
            KernelKind::Power { q } if *q >= 3.0 => Smoothness::A4 { r: q.floor() as u32 - 1 },
            KernelKind::Power { .. } => Smoothness::A3,
            KernelKind::Parzen => Smoothness::A3,
            KernelKind::Custom { .. } => Smoothness::Unverified,
        }
    }

    /// Fails unless the kernel is known to satisfy `A4` with order `min_r`.
    ///
    /// Set `allow_unverified` to accept custom kernels anyway.
    pub fn require_a4(&self, min_r: u32, allow_unverified: bool) -> Result<()> {
        match self.classify() {
            s if s.satisfies_a4(min_r) => Ok(()),
            Smoothness::Unverified if allow_unverified => Ok(()),
            s => Err(Error::InvalidKernel(format!(
                "kernel {} is classified {s:?}, A4 with r >= {min_r} is required",
                self.name()
            ))),
        }
    }
}

impl FromStr for LagKernel {
    type Err = Error;

    /// Parses `bartlett`, `parzen` or `power:q`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "bartlett" => Ok(Self::bartlett()),
            "parzen" => Ok(Self::parzen()),
            other => {
                let q = other
                    .strip_prefix("power:")
                    .and_then(|q| q.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownKernel(s.to_string()))?;
                Self::power(q).map_err(|_| Error::UnknownKernel(s.to_string()))
            }
        }
    }
}

impl fmt::Display for LagKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn builtins() -> Vec<LagKernel> {
        vec![
            LagKernel::bartlett(),
            LagKernel::parzen(),
            LagKernel::power(1.5).unwrap(),
            LagKernel::power(2.0).unwrap(),
            LagKernel::power(3.0).unwrap(),
            LagKernel::power(4.7).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(LagKernel::power(1.0).unwrap().eval(0.0), 1.0);
        assert_eq!(LagKernel::power(1.0).unwrap().eval(0.5), 0.5);
        assert!((LagKernel::parzen().eval(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(LagKernel::power(2.0).unwrap().eval(1.3), 0.0);
    }

    #[test]
    fn parzen_branches_meet_at_half() {
        let lo = 1.0 - 6.0 * 0.25 + 6.0 * 0.125;
        let hi = 2.0 * 0.5f64.powi(3);
        assert_eq!(lo, hi);
        assert_eq!(LagKernel::parzen().eval(0.5), hi);
        assert_eq!(LagKernel::parzen().eval(0.5 + 1e-12), LagKernel::parzen().eval(-(0.5 + 1e-12)));
    }

    #[test]
    fn support_is_truncated() {
        for k in builtins() {
            assert_eq!(k.eval(0.0), 1.0);
            for x in [1.0, -1.0, 1.0 + 1e-12, 2.0, -7.5, f64::INFINITY] {
                assert_eq!(k.eval(x), 0.0, "{} at {x}", k.name());
            }
        }
    }

    #[test]
    fn matches_closed_forms_on_grid() {
        let bartlett = LagKernel::bartlett();
        let parzen = LagKernel::parzen();
        let quad = LagKernel::power(2.0).unwrap();
        for i in 0..10_000 {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / 10_000.0;
            let a = x.abs();
            assert!((bartlett.eval(x) - (1.0 - a)).abs() <= 1e-15);
            assert!((quad.eval(x) - (1.0 - a * a)).abs() <= 1e-15);
            let pz = if a <= 0.5 { 1.0 - 6.0 * x * x + 6.0 * a.powi(3) } else { 2.0 * (1.0 - a).powi(3) };
            assert!((parzen.eval(x) - pz).abs() <= 1e-15);
        }
    }

    #[test]
    fn monotone_on_unit_interval() {
        for k in builtins() {
            let mut prev = k.eval(0.0);
            for i in 1..=2000 {
                let w = k.eval(i as f64 / 2000.0);
                assert!(w <= prev, "{} increases at step {i}", k.name());
                prev = w;
            }
        }
    }

    #[test]
    fn classification() {
        assert_eq!(LagKernel::bartlett().classify(), Smoothness::A3);
        assert_eq!(LagKernel::parzen().classify(), Smoothness::A3);
        assert!(!LagKernel::parzen().classify().satisfies_a4(2));
        assert_eq!(LagKernel::power(2.5).unwrap().classify(), Smoothness::A3);
        assert_eq!(LagKernel::power(3.0).unwrap().classify(), Smoothness::A4 { r: 2 });
        assert_eq!(LagKernel::power(4.7).unwrap().classify(), Smoothness::A4 { r: 3 });
        let table = LagKernel::tabulated("tri", vec![1.0, 0.5, 0.0]).unwrap();
        assert_eq!(table.classify(), Smoothness::Unverified);
    }

    #[test]
    fn a4_gate() {
        assert!(LagKernel::power(4.0).unwrap().require_a4(2, false).is_ok());
        assert!(LagKernel::parzen().require_a4(2, false).is_err());
        let custom = LagKernel::custom("flat", |_| 1.0).unwrap();
        assert!(custom.require_a4(2, false).is_err());
        assert!(custom.require_a4(2, true).is_ok());
    }

    #[test]
    fn custom_kernels() {
        assert!(LagKernel::custom("bad", |x| 0.9 - x).is_err());
        let table = LagKernel::tabulated("tri", vec![1.0, 0.5, 0.0]).unwrap();
        assert!((table.eval(0.25) - 0.75).abs() < 1e-15);
        assert!((table.eval(-0.75) - 0.25).abs() < 1e-15);
        assert_eq!(table.eval(1.0), 0.0);
        assert!(LagKernel::tabulated("short", vec![1.0]).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("bartlett".parse::<LagKernel>().unwrap().name(), "bartlett");
        assert_eq!("Parzen".parse::<LagKernel>().unwrap().name(), "parzen");
        assert_eq!("power:1".parse::<LagKernel>().unwrap().name(), "bartlett");
        assert_eq!("power:2.5".parse::<LagKernel>().unwrap().name(), "power:2.5");
        assert!("power:0.5".parse::<LagKernel>().is_err());
        assert!("quadratic-spectral".parse::<LagKernel>().is_err());
        assert!("power:".parse::<LagKernel>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn exact_symmetry(x in -1.0f64..=1.0, q in 1.0f64..6.0) {
            for k in builtins().into_iter().chain([LagKernel::power(q).unwrap()]) {
                prop_assert_eq!(k.eval(x), k.eval(-x));
            }
        }
    }
}

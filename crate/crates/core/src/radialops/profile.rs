//! Per-root metric profiles `F` with `F(0) = 0` and `F'(z)/z` positive.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::expr::{Expr, Var, VarSet};
use crate::jet::Jet;

use super::RadialError;

/// Distance from a wall below which wall terms switch to their limits.
pub const WALL_EPS: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum MetricProfile {
    /// `F(z) = z^2`, the flat metric on `p`.
    Flat,
    /// `F(z) = sinh^2 z`, the Killing metric of the noncompact dual.
    Hyperbolic,
    Custom(CustomProfile),
}

#[derive(Debug, Clone)]
pub struct CustomProfile {
    f: Expr,
    df: Expr,
    warned: Arc<AtomicBool>,
}

impl MetricProfile {
    /// A profile from expressions in `z` for `F` and `F'`. The pair is
    /// checked against the profile hypotheses and against each other.
    pub fn custom(f: &str, df: &str) -> Result<Self, RadialError> {
        let f = Expr::parse(f, VarSet::Profile)?;
        let df = Expr::parse(df, VarSet::Profile)?;
        let p = MetricProfile::Custom(CustomProfile {
            f,
            df,
            warned: Arc::new(AtomicBool::new(false)),
        });
        p.validate()?;
        Ok(p)
    }

    pub fn name(&self) -> String {
        match self {
            MetricProfile::Flat => "flat".into(),
            MetricProfile::Hyperbolic => "hyperbolic".into(),
            MetricProfile::Custom(c) => format!("custom({})", c.f),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, MetricProfile::Flat)
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            MetricProfile::Flat => z * z,
            MetricProfile::Hyperbolic => z.sinh().powi(2),
            MetricProfile::Custom(c) => c.f.eval_f64(&|_| z),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            MetricProfile::Flat => 2.0 * z,
            MetricProfile::Hyperbolic => 2.0 * z.sinh() * z.cosh(),
            MetricProfile::Custom(c) => c.df.eval_f64(&|_| z),
        }
    }

    /// `z F'(z) / (2 F(z))`, which tends to 1 at the wall for every
    /// admissible profile.
    pub fn wall_term(&self, z: f64) -> f64 {
        match self {
            MetricProfile::Flat => 1.0,
            MetricProfile::Hyperbolic => {
                if z.abs() < 1e-3 {
                    let z2 = z * z;
                    1.0 + z2 / 3.0 - z2 * z2 / 45.0
                } else {
                    z / z.tanh()
                }
            }
            MetricProfile::Custom(c) => {
                if z.abs() < WALL_EPS {
                    if !c.warned.swap(true, Ordering::Relaxed) {
                        log::warn!(
                            "custom profile {} evaluated within {WALL_EPS:e} of a wall; using the limit 1",
                            c.f
                        );
                    }
                    1.0
                } else {
                    0.5 * z * self.derivative(z) / self.value(z)
                }
            }
        }
    }

    /// Checks `F(0) = 0`, that `F'(z)/z` is finite, positive and continuous
    /// through 0 on `[-1e-3, 1]`, and for custom profiles that the supplied
    /// derivative matches the derivative of `F`.
    pub fn validate(&self) -> Result<(), RadialError> {
        let f0 = self.value(0.0);
        if f0.abs() > 1e-12 {
            return Err(RadialError::InvalidProfile(format!("F(0) = {f0:e}, expected 0")));
        }
        let n = 50;
        let (lo, hi) = (-1e-3, 1.0);
        let mut q_max: f64 = 0.0;
        for i in 0..n {
            let z = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            if z.abs() < 1e-12 {
                continue;
            }
            let q = self.derivative(z) / z;
            if !q.is_finite() || q <= 0.0 {
                return Err(RadialError::InvalidProfile(format!(
                    "F'(z)/z = {q:e} at z = {z:e} is not positive"
                )));
            }
            q_max = q_max.max(q);
            if let MetricProfile::Custom(c) = self {
                let jet = c.f.eval(Jet::constant(1, 0.0), &|_: Var| Jet::variable(1, 0, z));
                let d = self.derivative(z);
                if (jet.g[0] - d).abs() > 1e-8 * (1.0 + d.abs()) {
                    return Err(RadialError::InvalidProfile(format!(
                        "supplied derivative {d:e} disagrees with dF/dz = {:e} at z = {z:e}",
                        jet.g[0]
                    )));
                }
            }
        }
        let left = self.derivative(-1e-6) / -1e-6;
        let right = self.derivative(1e-6) / 1e-6;
        if (left - right).abs() > 1e-4 * (left.abs() + right.abs()) {
            return Err(RadialError::InvalidProfile(
                "F'(z)/z jumps at the wall (non-removable singularity)".into(),
            ));
        }
        if 0.5 * (left + right) <= 1e-6 * q_max {
            return Err(RadialError::InvalidProfile(
                "F'(z)/z vanishes at the wall".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        MetricProfile::Flat.validate().unwrap();
        MetricProfile::Hyperbolic.validate().unwrap();
    }

    #[test]
    fn hyperbolic_wall_term_is_z_coth_z() {
        let p = MetricProfile::Hyperbolic;
        for z in [1e-8, 1e-4, 9.9e-4, 1.1e-3, 0.3, 2.0, -0.7] {
            let direct = 0.5 * z * p.derivative(z) / p.value(z);
            let want = if z.abs() < 1e-6 { 1.0 } else { z / z.tanh() };
            assert!((p.wall_term(z) - want).abs() < 1e-13, "{z}");
            if z.abs() > 1e-3 {
                assert!((direct - want).abs() < 1e-13);
            }
        }
        assert_eq!(p.wall_term(0.0), 1.0);
    }

    #[test]
    fn custom_profiles() {
        let p = MetricProfile::custom("sin(z)^2", "2*sin(z)*cos(z)").unwrap();
        assert!((p.wall_term(0.5) - 0.5 / 0.5f64.tan()).abs() < 1e-14);
        assert_eq!(p.wall_term(1e-9), 1.0);
        assert!(MetricProfile::custom("z^2 + 1", "2*z").is_err());
        assert!(MetricProfile::custom("z^2", "3*z").is_err());
        assert!(MetricProfile::custom("z^4", "4*z^3").is_err());
        assert!(MetricProfile::custom("-z^2", "-2*z").is_err());
    }
}

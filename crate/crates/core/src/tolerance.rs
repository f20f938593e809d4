use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the pipeline, in one place.
///
/// The moving-planes tolerances are relative: they are multiplied by the
/// surface scale (the largest sampled radius) before use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Algebraic identities (involutions, norm preservation).
    pub algebraic: f64,
    /// Comparisons against ODE-integrated oracles.
    pub ode: f64,
    /// Distance kept from the equator when hemisphere mode is on.
    pub hemisphere_guard: f64,
    /// Relative containment margin accepted by the moving-planes predicate.
    pub containment_rel: f64,
    /// Relative bisection width for critical positions.
    pub position_rel: f64,
    /// Relative width of the `boundary` band in surface containment.
    pub contains_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-10,
            ode: 1e-6,
            hemisphere_guard: 1e-9,
            containment_rel: 1e-8,
            position_rel: 1e-9,
            contains_rel: 1e-9,
        }
    }
}

impl Tolerances {
    /// Multiply every comparison threshold by `factor`; the hemisphere guard
    /// is a domain restriction and stays fixed.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            algebraic: self.algebraic * factor,
            ode: self.ode * factor,
            hemisphere_guard: self.hemisphere_guard,
            containment_rel: self.containment_rel * factor,
            position_rel: self.position_rel * factor,
            contains_rel: self.contains_rel * factor,
        }
    }

    pub fn containment(&self, scale: f64) -> f64 {
        self.containment_rel * scale
    }

    pub fn position(&self, scale: f64) -> f64 {
        self.position_rel * scale
    }

    pub fn contains_band(&self, scale: f64) -> f64 {
        self.contains_rel * (1.0 + scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_multiplies_thresholds() {
        let t = Tolerances::default().scaled(10.0);
        assert_eq!(t.hemisphere_guard, Tolerances::default().hemisphere_guard);
        assert!((t.containment(2.0) - 2e-7).abs() < 1e-20);
        assert!((t.contains_band(1.0) - 2e-8).abs() < 1e-20);
    }
}

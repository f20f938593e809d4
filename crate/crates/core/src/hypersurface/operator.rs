//! Curvature operators `H_S = f(k_1, ..., k_{n-1})`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Elementary symmetric polynomial `e_r` by the usual recurrence.
pub fn elementary_symmetric(kappa: &[f64], r: usize) -> f64 {
    if r > kappa.len() {
        return 0.0;
    }
    let mut e = vec![0.0; r + 1];
    e[0] = 1.0;
    for &k in kappa {
        for j in (1..=r).rev() {
            e[j] += k * e[j - 1];
        }
    }
    e[r]
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

type CurvatureFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A user-supplied symmetric function of the principal curvatures.
#[derive(Clone)]
pub struct CustomOperator {
    pub name: String,
    /// Free-text description of the admissible cone.
    pub domain: String,
    f: CurvatureFn,
}

impl fmt::Debug for CustomOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomOperator")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Sampled admissibility evidence for a custom operator: positivity on the
/// positive cone and midpoint concavity along random segments. A necessary
/// condition only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub positivity_samples: usize,
    pub positivity_violations: usize,
    pub min_value: f64,
    pub concavity_segments: usize,
    pub min_concavity_margin: f64,
    pub passed: bool,
}

impl CustomOperator {
    pub fn new(name: impl Into<String>, domain: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            domain: domain.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, kappa: &[f64]) -> f64 {
        (self.f)(kappa)
    }

    /// Positivity on `count` random positive tuples in `(0, 10]^m` and
    /// midpoint concavity `f((x+y)/2) - (f(x)+f(y))/2 >= -1e-9` on `count`
    /// random segments between such tuples.
    pub fn spot_check(&self, m: usize, count: usize, seed: u64) -> AdmissibilityReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            let mut k: Vec<f64> = (0..m).map(|_| rng.gen_range(1e-3..10.0)).collect();
            k.sort_by(f64::total_cmp);
            k
        };
        let mut violations = 0;
        let mut min_value = f64::INFINITY;
        for _ in 0..count {
            let k = draw(&mut rng);
            let v = self.eval(&k);
            min_value = min_value.min(v);
            if !(v > 0.0) {
                violations += 1;
            }
        }
        let mut min_margin = f64::INFINITY;
        for _ in 0..count {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let margin = self.eval(&mid) - 0.5 * (self.eval(&x) + self.eval(&y));
            min_margin = min_margin.min(margin);
        }
        AdmissibilityReport {
            positivity_samples: count,
            positivity_violations: violations,
            min_value,
            concavity_segments: count,
            min_concavity_margin: min_margin,
            passed: violations == 0 && min_margin >= -1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CurvatureOperator {
    /// `(1/(n-1)) sum k_i`.
    Mean,
    /// `H_r^{1/r}` with `H_r = e_r / C(n-1, r)`, so that `H_r(c,...,c) = c^r`.
    SymmetricRoot(usize),
    Custom(CustomOperator),
}

impl PartialEq for CurvatureOperator {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl CurvatureOperator {
    pub fn value(&self, kappa: &[f64]) -> Result<f64> {
        match self {
            CurvatureOperator::Mean => Self::normalized_root(kappa, 1),
            CurvatureOperator::SymmetricRoot(r) => Self::normalized_root(kappa, *r),
            CurvatureOperator::Custom(op) => {
                let v = op.eval(kappa);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::OperatorDomain(format!("{} is not finite at {kappa:?}", op.name)))
                }
            }
        }
    }

    fn normalized_root(kappa: &[f64], r: usize) -> Result<f64> {
        let m = kappa.len();
        if r == 0 || r > m {
            return Err(Error::OperatorDomain(format!("H_{r} needs 1 <= r <= {m}")));
        }
        let hr = elementary_symmetric(kappa, r) / binomial(m, r);
        match r {
            1 => Ok(hr),
            _ if hr > 0.0 => Ok(hr.powf(1.0 / r as f64)),
            _ => Err(Error::OperatorDomain(format!("H_{r} = {hr} is not positive at {kappa:?}"))),
        }
    }
}

impl fmt::Display for CurvatureOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureOperator::Mean => write!(f, "mean"),
            CurvatureOperator::SymmetricRoot(r) => write!(f, "hr:{r}"),
            CurvatureOperator::Custom(op) => write!(f, "custom:{}", op.name),
        }
    }
}

impl FromStr for CurvatureOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "mean" || s == "h" {
            return Ok(CurvatureOperator::Mean);
        }
        if let Some(r) = s.strip_prefix("hr:") {
            return match r.parse::<usize>() {
                Ok(r) if r >= 1 => Ok(CurvatureOperator::SymmetricRoot(r)),
                _ => Err(Error::InvalidArgument(format!("bad symmetric-root degree `{r}`"))),
            };
        }
        Err(Error::InvalidArgument(format!(
            "unknown curvature operator `{s}` (expected `mean` or `hr:R`)"
        )))
    }
}

impl Serialize for CurvatureOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CurvatureOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_examples() {
        assert_eq!(CurvatureOperator::Mean.value(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(CurvatureOperator::Mean.value(&[0.25, 1.0]).unwrap(), 0.625);
    }

    #[test]
    fn symmetric_root_of_equal_entries() {
        assert!((CurvatureOperator::SymmetricRoot(2).value(&[3.0, 3.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!((CurvatureOperator::SymmetricRoot(2).value(&[1.7, 1.7]).unwrap() - 1.7).abs() < 1e-15);
        assert!(CurvatureOperator::SymmetricRoot(2).value(&[-1.0, 1.0]).is_err());
        assert!(CurvatureOperator::SymmetricRoot(3).value(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn mean_is_first_symmetric_root_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let k: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let a = CurvatureOperator::Mean.value(&k).unwrap();
            let b = CurvatureOperator::SymmetricRoot(1).value(&k).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["mean", "hr:2", "hr:1"] {
            let op: CurvatureOperator = s.parse().unwrap();
            assert_eq!(op.to_string(), s);
        }
        assert!("hr:0".parse::<CurvatureOperator>().is_err());
        assert!("gauss".parse::<CurvatureOperator>().is_err());
        let json = serde_json::to_string(&CurvatureOperator::SymmetricRoot(2)).unwrap();
        assert_eq!(json, "\"hr:2\"");
        let back: CurvatureOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, CurvatureOperator::SymmetricRoot(2));
    }

    #[test]
    fn spot_check_accepts_concave_and_rejects_convex() {
        let geo = CustomOperator::new("geometric", "positive cone", |k: &[f64]| {
            k.iter().product::<f64>().powf(1.0 / k.len() as f64)
        });
        let report = geo.spot_check(2, 1000, 1);
        assert!(report.passed, "{report:?}");
        let sq = CustomOperator::new("sumsq", "positive cone", |k: &[f64]| k.iter().map(|x| x * x).sum());
        assert!(!sq.spot_check(2, 1000, 1).passed);
        let op = CurvatureOperator::Custom(geo);
        assert!((op.value(&[4.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
    }
}

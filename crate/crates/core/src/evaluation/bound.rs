use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::MembershipSeries;

/// Plug-in parameters of the uniform misclustering bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: f64,
    pub t: f64,
    pub k: f64,
    /// Bandwidth; zero is allowed.
    pub r: f64,
    /// Churn bound; zero is allowed.
    pub s: f64,
    pub p_max: f64,
    /// Smallest regularized population degree.
    pub delta_min: f64,
    /// Largest K-th absolute eigenvalue of the population similarity.
    pub lambda_k_max: f64,
    pub m_z: f64,
    pub w_max: f64,
    pub c_w: f64,
    /// k-means approximation factor.
    pub eps: f64,
    /// Hölder constant of the block-probability path.
    pub smooth_l: f64,
    pub beta: f64,
    pub kernel_order: u32,
    /// Failure probability.
    pub confidence: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("N", self.n),
            ("T", self.t),
            ("K", self.k),
            ("r", self.r),
            ("s", self.s),
            ("P_max", self.p_max),
            ("delta_min", self.delta_min),
            ("lambda_K_max", self.lambda_k_max),
            ("m_z", self.m_z),
            ("W_max", self.w_max),
            ("c_w", self.c_w),
            ("eps", self.eps),
            ("L", self.smooth_l),
            ("beta", self.beta),
            ("confidence", self.confidence),
        ];
        if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("bound parameter {name} is not finite ({v})")));
        }
        let nonneg = ["r", "s", "c_w", "eps", "L"];
        for (name, v) in named {
            let ok = if nonneg.contains(&name) { v >= 0.0 } else { v > 0.0 };
            if !ok {
                return Err(Error::InvalidInput(format!("bound parameter {name} must be {} (got {v})", if nonneg.contains(&name) { "non-negative" } else { "positive" })));
            }
        }
        if self.confidence >= 1.0 {
            return Err(Error::InvalidInput(format!("confidence must lie in (0,1) (got {})", self.confidence)));
        }
        if 8.0 * self.n * self.t / self.confidence <= 1.0 {
            return Err(Error::InvalidInput("8NT/confidence must exceed 1".into()));
        }
        Ok(())
    }

    /// `b = √(3 ln(8NT/ϵ))`.
    pub fn b(&self) -> f64 {
        (3.0 * (8.0 * self.n * self.t / self.confidence).ln()).sqrt()
    }

    /// `c(ε) = 2⁹(2+ε)²`.
    pub fn c(&self) -> f64 {
        512.0 * (2.0 + self.eps).powi(2)
    }

    /// Degree condition `δ̲ > 3 ln(8NT/ϵ)` under which the bound is stated.
    pub fn degree_condition_holds(&self) -> bool {
        self.delta_min > self.b().powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    /// The bound is at least one and says nothing.
    pub vacuous: bool,
    pub degree_condition: bool,
    pub b: f64,
    pub c: f64,
}

fn factorial(l: u32) -> f64 {
    (1..=l).map(f64::from).product()
}

pub fn theorem1_bound(p: &BoundParams) -> Result<BoundValue> {
    p.validate()?;
    let b = p.b();
    let c = p.c();
    let noise = (4.0 + 2.0 * p.c_w) * b / p.delta_min.sqrt();
    let churn = 2.0 * p.k / b * ((2.0 * p.p_max * p.r * p.s).sqrt() + 2.0 * p.p_max);
    let bias = p.n * p.smooth_l / (b * b * factorial(p.kernel_order)) * (p.r / p.t).powf(p.beta);
    let brace = noise + churn + bias;
    let value = c * p.k * p.w_max * p.w_max / (p.m_z * p.m_z * p.n * p.lambda_k_max * p.lambda_k_max) * brace * brace;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("bound overflowed ({value})")));
    }
    if !p.degree_condition_holds() {
        log::warn!("degree condition fails: delta_min {} <= {}", p.delta_min, b * b);
    }
    Ok(BoundValue { value, vacuous: value >= 1.0, degree_condition: p.degree_condition_holds(), b, c })
}

/// Smallest group share `min_{t,k} N_{t,k}/N`; the default `m_z`.
pub fn min_block_proportion(z: &MembershipSeries) -> f64 {
    let n = z.nodes() as f64;
    (0..z.periods())
        .flat_map(|t| z.group_sizes(t))
        .map(|s| s as f64 / n)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pinned() -> BoundParams {
        BoundParams {
            n: 100.0,
            t: 10.0,
            k: 3.0,
            r: 2.0,
            s: 10.0,
            p_max: 40.0,
            delta_min: 50.0,
            lambda_k_max: 0.3,
            m_z: 0.2,
            w_max: 2.0,
            c_w: 1.0,
            eps: 0.01,
            smooth_l: 1.0,
            beta: 1.0,
            kernel_order: 4,
            confidence: 0.05,
        }
    }

    #[test]
    fn pinned_is_positive_and_vacuous() {
        let v = theorem1_bound(&pinned()).unwrap();
        assert!(v.value > 0.0 && v.vacuous);
        assert!(v.degree_condition);
    }

    #[test]
    fn zero_bandwidth_ignores_churn() {
        let mut p = pinned();
        p.r = 0.0;
        let a = theorem1_bound(&p).unwrap().value;
        p.s = 1e6;
        assert_eq!(a, theorem1_bound(&p).unwrap().value);
    }

    #[test]
    fn rejects_bad_confidence_and_nan() {
        let mut p = pinned();
        p.confidence = 1.0;
        assert!(theorem1_bound(&p).is_err());
        let mut p = pinned();
        p.n = f64::NAN;
        assert!(theorem1_bound(&p).is_err());
        let mut p = pinned();
        p.lambda_k_max = 0.0;
        assert!(theorem1_bound(&p).is_err());
    }

    #[test]
    fn min_proportion() {
        let z = MembershipSeries::new(2, vec![vec![0, 0, 1, 1], vec![0, 0, 0, 1]]).unwrap();
        assert_eq!(min_block_proportion(&z), 0.25);
    }
}

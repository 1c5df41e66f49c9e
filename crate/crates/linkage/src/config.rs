use crate::LinkageError;
use serde::{Deserialize, Serialize};

/// Fixed-point scale for field weights.
pub const WEIGHT_SCALE: u64 = 64;
/// Fixed-point scale for the threshold tau.
pub const TAU_SCALE: u64 = 1 << 16;
/// Budget on `sum_f 9 * w_f`, chosen so every score numerator/denominator
/// stays below 2^30 and every tournament cross product below 2^61.
pub const WEIGHT_BUDGET: u64 = 1 << 16;
/// Completeness indicators live on the thirds scale, 0..=3 per record side.
pub const DELTA_MAX: u64 = 3;

/// Maximum Dice denominator: two fields at the bigram cap.
const MAX_DICE_DENOM: u64 = 2 * crate::MAX_BIGRAMS as u64;

/// What the query client is allowed to learn from a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disclosure {
    /// Only the matched bit.
    Bit,
    /// Matched bit and the matching record's index.
    Index,
    /// Matched bit, index and the score fraction.
    Full,
}

impl Disclosure {
    pub fn code(self) -> u8 {
        match self {
            Disclosure::Bit => 0,
            Disclosure::Index => 1,
            Disclosure::Full => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Disclosure::Bit),
            1 => Some(Disclosure::Index),
            2 => Some(Disclosure::Full),
            _ => None,
        }
    }
}

/// Per-field weights at scale 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldWeights {
    pub combined_name: u64,
    pub city: u64,
    /// Weights for postcode, birth year, month, day, in that order.
    pub exact: [u64; 4],
}

impl FieldWeights {
    pub fn all(&self) -> [u64; 6] {
        [
            self.combined_name,
            self.city,
            self.exact[0],
            self.exact[1],
            self.exact[2],
            self.exact[3],
        ]
    }

    pub fn sum(&self) -> u64 {
        self.all().iter().sum()
    }
}

/// Linkage parameters agreed by all parties for a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageConfig {
    pub weights: FieldWeights,
    /// Threshold tau scaled by 2^16 and rounded.
    pub tau_fixed: u64,
    pub disclosure: Disclosure,
}

impl LinkageConfig {
    pub fn new(weights: FieldWeights, tau: f64, disclosure: Disclosure) -> Self {
        LinkageConfig {
            weights,
            tau_fixed: (tau * TAU_SCALE as f64).round() as u64,
            disclosure,
        }
    }
}

/// EpiLink-style weight from a field's value frequency and error rate:
/// `round(64 * log2((1 - e) / f))`, floored at 1.
pub fn compute_field_weight(frequency: f64, error_rate: f64) -> Result<u64, LinkageError> {
    if !(frequency > 0.0 && frequency < 1.0) {
        return Err(LinkageError::InvalidConfig(format!(
            "frequency must be in (0, 1), got {frequency}"
        )));
    }
    if !(0.0..1.0).contains(&error_rate) {
        return Err(LinkageError::InvalidConfig(format!(
            "error rate must be in [0, 1), got {error_rate}"
        )));
    }
    let w = (WEIGHT_SCALE as f64 * ((1.0 - error_rate) / frequency).log2()).round();
    Ok((w as i64).max(1) as u64)
}

/// Validates the weight budget, the threshold range and schema completeness.
pub fn validate_config(config: &LinkageConfig) -> Result<(), LinkageError> {
    for (w, name) in config.weights.all().iter().zip([
        "combined_name",
        "city",
        "postcode",
        "birth_year",
        "birth_month",
        "birth_day",
    ]) {
        if *w == 0 {
            return Err(LinkageError::InvalidConfig(format!(
                "field '{name}' has weight 0; every schema field needs a positive weight"
            )));
        }
    }
    let budget_use = 9 * config.weights.sum();
    if budget_use > WEIGHT_BUDGET {
        return Err(LinkageError::InvalidConfig(format!(
            "weight budget exceeded: sum 9*w_f = {budget_use} > {WEIGHT_BUDGET}"
        )));
    }
    if config.tau_fixed == 0 || config.tau_fixed >= TAU_SCALE {
        return Err(LinkageError::InvalidConfig(format!(
            "tau_fixed must be in (0, {TAU_SCALE}), got {}",
            config.tau_fixed
        )));
    }
    Ok(())
}

/// Worst-case magnitudes of every intermediate under a config, computed with
/// checked arithmetic. Comparisons via the sign bit are only sound below
/// 2^61, so the certificate is checked at config load and again by the
/// acceptance suite with adversarial inputs.
#[derive(Debug, Clone, Copy)]
pub struct BoundCertificate {
    /// Largest possible score numerator or denominator.
    pub max_score_term: u64,
    /// Largest possible tournament cross product `n_i * d_j`.
    pub max_cross_product: u64,
    /// Largest possible threshold comparison operand.
    pub max_threshold_operand: u64,
}

pub const COMPARISON_BOUND: u64 = 1 << 61;

impl BoundCertificate {
    pub fn for_config(config: &LinkageConfig) -> Result<Self, LinkageError> {
        let overflow =
            |what: &str| LinkageError::InvalidConfig(format!("bound overflow computing {what}"));
        let weight_sum = 9u64
            .checked_mul(config.weights.sum())
            .ok_or_else(|| overflow("weight sum"))?;
        let max_score_term = weight_sum
            .checked_mul(MAX_DICE_DENOM)
            .and_then(|v| v.checked_mul(MAX_DICE_DENOM))
            .ok_or_else(|| overflow("score term"))?;
        if max_score_term >= 1 << 30 {
            return Err(LinkageError::InvalidConfig(format!(
                "worst-case score term {max_score_term} breaches the 2^30 budget"
            )));
        }
        let max_cross_product = max_score_term
            .checked_mul(max_score_term)
            .ok_or_else(|| overflow("cross product"))?;
        let max_threshold_operand = max_score_term
            .checked_mul(TAU_SCALE)
            .and_then(|v| v.checked_add(1))
            .ok_or_else(|| overflow("threshold operand"))?;
        if max_cross_product >= COMPARISON_BOUND || max_threshold_operand >= COMPARISON_BOUND {
            return Err(LinkageError::InvalidConfig(
                "comparison operands can breach the 2^61 bound".into(),
            ));
        }
        Ok(BoundCertificate {
            max_score_term,
            max_cross_product,
            max_threshold_operand,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid() -> LinkageConfig {
        LinkageConfig::new(
            FieldWeights {
                combined_name: 573,
                city: 360,
                exact: [425, 378, 229, 314],
            },
            0.75,
            Disclosure::Full,
        )
    }

    #[test]
    fn weight_from_frequency_and_error_rate() {
        assert_eq!(compute_field_weight(0.5, 0.0).unwrap(), 64);
        // log2(1) = 0, floored to 1.
        assert_eq!(compute_field_weight(0.5, 0.5).unwrap(), 1);
        assert_eq!(compute_field_weight(1.0 / 1024.0, 0.01).unwrap(), 639);
    }

    #[test]
    fn weight_domain_violations() {
        assert!(compute_field_weight(0.0, 0.0).is_err());
        assert!(compute_field_weight(1.0, 0.0).is_err());
        assert!(compute_field_weight(0.5, 1.0).is_err());
    }

    #[test]
    fn valid_config_accepted() {
        let cfg = valid();
        validate_config(&cfg).unwrap();
        BoundCertificate::for_config(&cfg).unwrap();
    }

    #[test]
    fn budget_violation_rejected() {
        let mut cfg = valid();
        cfg.weights.combined_name = 8000;
        assert!(validate_config(&cfg).is_err());
    }

    #[test]
    fn tau_bounds_enforced() {
        let mut cfg = valid();
        cfg.tau_fixed = 0;
        assert!(validate_config(&cfg).is_err());
        cfg.tau_fixed = TAU_SCALE;
        assert!(validate_config(&cfg).is_err());
    }

    #[test]
    fn zero_weight_rejected() {
        let mut cfg = valid();
        cfg.weights.exact[2] = 0;
        assert!(validate_config(&cfg).is_err());
    }

    #[test]
    fn certificate_at_exact_budget_stays_under_bounds() {
        // Weights summing to exactly the budget: 9 * sum(w) = 65536 has no
        // integer solution (65536 not divisible by 9), so use the maximum
        // admissible sum floor(65536/9) = 7281.
        let cfg = LinkageConfig::new(
            FieldWeights {
                combined_name: 7276,
                city: 1,
                exact: [1, 1, 1, 1],
            },
            0.5,
            Disclosure::Full,
        );
        validate_config(&cfg).unwrap();
        let cert = BoundCertificate::for_config(&cfg).unwrap();
        assert!(cert.max_score_term < 1 << 30);
        assert!(cert.max_cross_product < COMPARISON_BOUND);
        assert!(cert.max_threshold_operand < COMPARISON_BOUND);
    }
}

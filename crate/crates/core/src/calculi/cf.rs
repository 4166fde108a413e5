//! MYCIN certainty factors.
//!
//! Each color keeps its own stream of belief-change values; streams are
//! folded with the parallel-combination function and never normalized
//! against each other.

use serde::{Deserialize, Serialize};

use super::CalculusError;
use crate::blockworld::{Color, Shape};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CfValue(f64);

impl CfValue {
    pub const ZERO: CfValue = CfValue(0.0);
    pub const ONE: CfValue = CfValue(1.0);
    pub const MINUS_ONE: CfValue = CfValue(-1.0);

    pub fn new(value: f64) -> Result<Self, CalculusError> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(CalculusError::CfOutOfRange(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CfValue {
    type Error = CalculusError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        CfValue::new(v)
    }
}

impl From<CfValue> for f64 {
    fn from(v: CfValue) -> f64 {
        v.0
    }
}

/// Parallel combination of two certainty factors for the same hypothesis.
///
/// Mathematically this is `x + y - xy` for two confirmations, `x + y + xy`
/// for two disconfirmations and `(x + y) / (1 - min(|x|, |y|))` for mixed
/// signs. The branches are evaluated in product form (`1 - (1-x)(1-y)` and
/// friends) which keeps `+1` absorbing and avoids cancellation near the
/// ends of the scale.
pub fn cf_combine(x: CfValue, y: CfValue) -> Result<CfValue, CalculusError> {
    let (a, b) = (x.0, y.0);
    if a == 0.0 {
        return Ok(y);
    }
    if b == 0.0 {
        return Ok(x);
    }
    let z = if a > 0.0 && b > 0.0 {
        1.0 - (1.0 - a) * (1.0 - b)
    } else if a < 0.0 && b < 0.0 {
        (1.0 + a) * (1.0 + b) - 1.0
    } else {
        let (pos, neg) = if a > 0.0 { (a, b) } else { (b, a) };
        if pos == 1.0 && neg == -1.0 {
            return Err(CalculusError::Contradiction);
        }
        if pos >= -neg {
            1.0 - (1.0 - pos) / (1.0 + neg)
        } else {
            (1.0 + neg) / (1.0 - pos) - 1.0
        }
    };
    Ok(CfValue(z.clamp(-1.0, 1.0)))
}

/// `cf[color][shape]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfParams {
    cf: [[CfValue; 3]; 3],
}

impl CfParams {
    pub fn new(cf: [[CfValue; 3]; 3]) -> Self {
        Self { cf }
    }

    pub fn from_values(values: [[f64; 3]; 3]) -> Result<Self, CalculusError> {
        let mut cf = [[CfValue::ZERO; 3]; 3];
        for (row, vals) in cf.iter_mut().zip(values) {
            for (slot, v) in row.iter_mut().zip(vals) {
                *slot = CfValue::new(v)?;
            }
        }
        Ok(Self { cf })
    }

    pub fn get(&self, color: Color, shape: Shape) -> CfValue {
        self.cf[color.index()][shape.index()]
    }
}

/// Fold every color's CF stream over the evidence, in evidence order.
pub fn cf_aggregate(params: &CfParams, evidence: &[Shape]) -> Result<[CfValue; 3], CalculusError> {
    let mut out = [CfValue::ZERO; 3];
    for color in Color::ALL {
        let mut acc = CfValue::ZERO;
        for &shape in evidence {
            acc = cf_combine(acc, params.get(color, shape))?;
        }
        out[color.index()] = acc;
    }
    Ok(out)
}

/// Belief change from `prior` to `posterior`, scaled by the room left to move.
pub fn cf_from_probabilities(prior: f64, posterior: f64) -> Result<CfValue, CalculusError> {
    let undefined = CalculusError::UndefinedCf { prior, posterior };
    if !(0.0..=1.0).contains(&prior) || !(0.0..=1.0).contains(&posterior) {
        return Err(undefined);
    }
    if posterior == prior {
        return Ok(CfValue::ZERO);
    }
    let cf = if posterior > prior {
        if prior >= 1.0 {
            return Err(undefined);
        }
        (posterior - prior) / (1.0 - prior)
    } else {
        if prior <= 0.0 {
            return Err(undefined);
        }
        (posterior - prior) / prior
    };
    Ok(CfValue(cf.clamp(-1.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cf(v: f64) -> CfValue {
        CfValue::new(v).unwrap()
    }

    #[test]
    fn worked_combinations() {
        assert!((cf_combine(cf(0.6), cf(0.4)).unwrap().value() - 0.76).abs() < 1e-12);
        assert!((cf_combine(cf(0.8), cf(-0.5)).unwrap().value() - 0.6).abs() < 1e-12);
        assert!((cf_combine(cf(-0.6), cf(-0.4)).unwrap().value() + 0.76).abs() < 1e-12);
        assert!((cf_combine(cf(-0.8), cf(0.5)).unwrap().value() + 0.6).abs() < 1e-12);
        assert_eq!(cf_combine(cf(0.7), cf(-0.7)).unwrap().value(), 0.0);
    }

    #[test]
    fn contradiction_is_an_error() {
        assert_eq!(
            cf_combine(CfValue::ONE, CfValue::MINUS_ONE),
            Err(CalculusError::Contradiction)
        );
        assert_eq!(
            cf_combine(CfValue::MINUS_ONE, CfValue::ONE),
            Err(CalculusError::Contradiction)
        );
        assert_eq!(cf_combine(CfValue::ONE, cf(-0.99)).unwrap(), CfValue::ONE);
        assert_eq!(cf_combine(cf(0.99), CfValue::MINUS_ONE).unwrap(), CfValue::MINUS_ONE);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(CfValue::new(1.0000001).is_err());
        assert!(CfValue::new(f64::NAN).is_err());
    }

    #[test]
    fn from_probabilities_examples() {
        let green_prior = 132.0 / 324.0;
        assert_eq!(cf_from_probabilities(green_prior, 0.0).unwrap().value(), -1.0);
        assert_eq!(cf_from_probabilities(0.3, 0.3).unwrap(), CfValue::ZERO);
        let red = cf_from_probabilities(100.0 / 324.0, 2.0 / 3.0).unwrap().value();
        assert!((red - 29.0 / 56.0).abs() < 1e-12, "{red}");
        assert!((red - 0.5179).abs() < 5e-5);
        assert_eq!(cf_from_probabilities(1.0, 1.0).unwrap(), CfValue::ZERO);
        assert!(matches!(
            cf_from_probabilities(0.0, 0.0),
            Ok(CfValue(v)) if v == 0.0
        ));
    }

    #[test]
    fn aggregate_two_squares_for_red() {
        let red = cf_from_probabilities(100.0 / 324.0, 2.0 / 3.0).unwrap();
        let mut values = [[0.0; 3]; 3];
        values[Color::Red.index()][Shape::Square.index()] = red.value();
        let params = CfParams::from_values(values).unwrap();
        let agg = cf_aggregate(&params, &[Shape::Square, Shape::Square]).unwrap();
        // CF(red | square) = 29/56 exactly, so two squares give 1 - (27/56)^2.
        let red_two = agg[Color::Red.index()].value();
        assert!((red_two - 2407.0 / 3136.0).abs() < 1e-12, "{red_two}");
        assert!((red_two - 0.7676).abs() < 1e-4);
        assert_eq!(cf_aggregate(&params, &[]).unwrap(), [CfValue::ZERO; 3]);
    }

    fn any_cf() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1.0f64..=1.0,
            Just(0.0),
            Just(1.0),
            Just(-1.0),
        ]
    }

    proptest! {
        #[test]
        fn combine_is_commutative_and_closed(a in any_cf(), b in any_cf()) {
            let (x, y) = (cf(a), cf(b));
            match (cf_combine(x, y), cf_combine(y, x)) {
                (Ok(l), Ok(r)) => {
                    prop_assert_eq!(l.value().to_bits(), r.value().to_bits());
                    prop_assert!((-1.0..=1.0).contains(&l.value()));
                }
                (Err(_), Err(_)) => prop_assert!(a.abs() == 1.0 && b == -a),
                _ => prop_assert!(false, "asymmetric error"),
            }
        }

        #[test]
        fn one_absorbs_non_negative(a in 0.0f64..=1.0) {
            prop_assert_eq!(cf_combine(CfValue::ONE, cf(a)).unwrap(), CfValue::ONE);
        }

        #[test]
        fn zero_is_identity(a in any_cf()) {
            prop_assert_eq!(cf_combine(cf(a), CfValue::ZERO).unwrap(), cf(a));
            prop_assert_eq!(cf_combine(CfValue::ZERO, cf(a)).unwrap(), cf(a));
        }
    }
}

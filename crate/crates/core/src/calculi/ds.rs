//! Dempster-Shafer mass functions over the three-color frame.
//!
//! Subsets of the frame are 3-bit masks (bit 0 green, bit 1 red, bit 2 gold).
//! Combination goes through commonality functions: the commonality of the
//! conjunctive combination is the product of the operands' commonalities,
//! and the combined masses come back out through the inverse transform.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CalculusError, PARAM_TOLERANCE, TOLERANCE};
use crate::blockworld::{Color, Distribution3, Shape};

/// A subset of {green, red, gold}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColorSet(u8);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);
    pub const THETA: ColorSet = ColorSet(0b111);

    pub fn from_bits(bits: u8) -> Option<ColorSet> {
        (bits <= 0b111).then_some(ColorSet(bits))
    }

    pub fn singleton(c: Color) -> ColorSet {
        ColorSet(1 << c.index())
    }

    pub fn from_colors(colors: &[Color]) -> ColorSet {
        ColorSet(colors.iter().fold(0, |acc, c| acc | (1 << c.index())))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, c: Color) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn complement(self) -> ColorSet {
        ColorSet(!self.0 & 0b111)
    }

    pub fn is_subset_of(self, other: ColorSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// All eight subsets in mask order.
    pub fn all() -> impl Iterator<Item = ColorSet> {
        (0u8..8).map(ColorSet)
    }
}

impl fmt::Display for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = Color::ALL
            .into_iter()
            .filter(|c| self.contains(*c))
            .map(Color::name)
            .collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Basic probability assignment over the eight subsets of the frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassFunction {
    m: [f64; 8],
}

impl MassFunction {
    /// Masses indexed by subset mask; validates m(∅) = 0, non-negativity
    /// and unit sum within 1e-12.
    pub fn new(m: [f64; 8]) -> Result<Self, CalculusError> {
        if m[0] != 0.0 {
            return Err(CalculusError::InvalidMass(format!(
                "empty set carries mass {}",
                m[0]
            )));
        }
        if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(CalculusError::InvalidMass(format!("negative mass in {m:?}")));
        }
        let sum: f64 = m.iter().sum();
        if (sum - 1.0).abs() > TOLERANCE {
            return Err(CalculusError::InvalidMass(format!("masses sum to {sum}")));
        }
        Ok(Self { m })
    }

    /// All mass on the whole frame.
    pub fn vacuous() -> Self {
        let mut m = [0.0; 8];
        m[ColorSet::THETA.0 as usize] = 1.0;
        Self { m }
    }

    /// Mass only on singletons.
    pub fn bayesian(p: &Distribution3) -> Self {
        let mut m = [0.0; 8];
        for c in Color::ALL {
            m[ColorSet::singleton(c).0 as usize] = p[c];
        }
        Self { m }
    }

    pub fn mass(&self, a: ColorSet) -> f64 {
        self.m[a.0 as usize]
    }

    pub fn masses(&self) -> [f64; 8] {
        self.m
    }

    /// Σ m(B) over non-empty B ⊆ A.
    pub fn belief(&self, a: ColorSet) -> f64 {
        ColorSet::all()
            .filter(|b| !b.is_empty() && b.is_subset_of(a))
            .map(|b| self.mass(b))
            .sum()
    }

    /// 1 − Bel(¬A).
    pub fn plausibility(&self, a: ColorSet) -> f64 {
        1.0 - self.belief(a.complement())
    }

    /// Σ m(B) over B ⊇ A.
    pub fn commonality(&self, a: ColorSet) -> f64 {
        commonality(&self.m)[a.0 as usize]
    }

    pub fn is_vacuous(&self) -> bool {
        *self == Self::vacuous()
    }
}

// Superset zeta transform.
fn commonality(m: &[f64; 8]) -> [f64; 8] {
    let mut q = *m;
    for bit in [1u8, 2, 4] {
        for mask in 0u8..8 {
            if mask & bit == 0 {
                q[mask as usize] += q[(mask | bit) as usize];
            }
        }
    }
    q
}

// Superset Möbius transform, inverse of `commonality`.
fn mass_from_commonality(q: &[f64; 8]) -> [f64; 8] {
    let mut m = *q;
    for bit in [1u8, 2, 4] {
        for mask in 0u8..8 {
            if mask & bit == 0 {
                m[mask as usize] -= m[(mask | bit) as usize];
            }
        }
    }
    m
}

/// Dempster's rule of combination.
pub fn dempster_combine(
    m1: &MassFunction,
    m2: &MassFunction,
) -> Result<MassFunction, CalculusError> {
    let (q1, q2) = (commonality(&m1.m), commonality(&m2.m));
    let mut q = [0.0; 8];
    for i in 0..8 {
        q[i] = q1[i] * q2[i];
    }
    let unnormalized = mass_from_commonality(&q);
    let conflict = unnormalized[0];
    if 1.0 - conflict <= TOLERANCE {
        return Err(CalculusError::TotalConflict { conflict });
    }
    let mut m = [0.0; 8];
    for i in 1..8 {
        // The inverse transform can leave round-off of either sign on sets
        // that receive no mass.
        m[i] = unnormalized[i].max(0.0);
    }
    let total: f64 = m.iter().sum();
    if !(total > TOLERANCE) {
        return Err(CalculusError::TotalConflict { conflict });
    }
    for x in &mut m[1..] {
        *x /= total;
    }
    Ok(MassFunction { m })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefInterval {
    lower: f64,
    upper: f64,
}

impl BeliefInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self, CalculusError> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(CalculusError::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// `[p, p]`.
    pub fn point(p: f64) -> Result<Self, CalculusError> {
        Self::new(p, p)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMode {
    /// Reject lower bounds summing past one.
    #[default]
    Strict,
    /// Rescale lower bounds proportionally when they sum past one.
    Repair,
}

/// Lower bounds become singleton masses and the remainder goes to the frame.
pub fn mass_from_intervals(
    intervals: &[BeliefInterval; 3],
    mode: IntervalMode,
) -> Result<MassFunction, CalculusError> {
    for c in Color::ALL {
        let iv = intervals[c.index()];
        if !(0.0 <= iv.lower && iv.lower <= iv.upper && iv.upper <= 1.0) {
            return Err(CalculusError::InvalidElicitation {
                color: c,
                reason: format!("interval [{}, {}] is not ordered in [0, 1]", iv.lower, iv.upper),
            });
        }
    }
    let mut lowers = intervals.map(|iv| iv.lower);
    let sum: f64 = lowers.iter().sum();
    if sum > 1.0 {
        if mode == IntervalMode::Strict && sum > 1.0 + PARAM_TOLERANCE {
            let mut running = 0.0;
            let offender = Color::ALL
                .into_iter()
                .find(|c| {
                    running += lowers[c.index()];
                    running > 1.0 + PARAM_TOLERANCE
                })
                .unwrap_or(Color::Gold);
            return Err(CalculusError::InvalidElicitation {
                color: offender,
                reason: format!("lower bounds sum to {sum} > 1"),
            });
        }
        for l in &mut lowers {
            *l /= sum;
        }
    }
    let mut m = [0.0; 8];
    for c in Color::ALL {
        m[ColorSet::singleton(c).0 as usize] = lowers[c.index()];
    }
    let singletons: f64 = lowers.iter().sum();
    m[ColorSet::THETA.0 as usize] = (1.0 - singletons).max(0.0);
    MassFunction::new(m)
}

/// `interval[color][shape]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsParams {
    interval: [[BeliefInterval; 3]; 3],
}

impl DsParams {
    /// Requires, for every shape, lower bounds over colors summing to at most 1 + 1e-9.
    pub fn new(interval: [[BeliefInterval; 3]; 3]) -> Result<Self, CalculusError> {
        for s in Shape::ALL {
            let sum: f64 = Color::ALL
                .iter()
                .map(|c| interval[c.index()][s.index()].lower)
                .sum();
            if sum > 1.0 + PARAM_TOLERANCE {
                return Err(CalculusError::InvalidParams(format!(
                    "lower bounds for {s} sum to {sum}"
                )));
            }
        }
        Ok(Self { interval })
    }

    /// Degenerate intervals `[p, p]` from a point estimate `p[color][shape]`.
    pub fn from_points(p: [[f64; 3]; 3]) -> Result<Self, CalculusError> {
        let mut interval = [[BeliefInterval {
            lower: 0.0,
            upper: 1.0,
        }; 3]; 3];
        for (row, vals) in interval.iter_mut().zip(p) {
            for (slot, v) in row.iter_mut().zip(vals) {
                *slot = BeliefInterval::point(v)?;
            }
        }
        Self::new(interval)
    }

    pub fn get(&self, color: Color, shape: Shape) -> BeliefInterval {
        self.interval[color.index()][shape.index()]
    }

    /// The three intervals elicited for one piece of evidence.
    pub fn for_shape(&self, shape: Shape) -> [BeliefInterval; 3] {
        Color::ALL.map(|c| self.get(c, shape))
    }
}

pub fn ds_aggregate(params: &DsParams, evidence: &[Shape]) -> Result<MassFunction, CalculusError> {
    let mut acc = MassFunction::vacuous();
    for &shape in evidence {
        let m = mass_from_intervals(&params.for_shape(shape), IntervalMode::Strict)?;
        acc = dempster_combine(&acc, &m)?;
    }
    Ok(acc)
}

//! Total guess orders over the three colors.
//!
//! Scores closer than [`TOLERANCE`] count as tied. Ties on the primary score
//! fall through to an optional secondary score and then to the fixed color
//! order green, red, gold.

use serde::{Deserialize, Serialize};

use super::{CfValue, ColorSet, MassFunction, TOLERANCE};
use crate::blockworld::{Color, Distribution3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    order: [Color; 3],
    score: [f64; 3],
    secondary: Option<[f64; 3]>,
}

/// Tie class of each entry when sorted by descending value; neighbours
/// within `TOLERANCE` share a class.
fn tie_classes(values: [f64; 3]) -> [usize; 3] {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut classes = [0usize; 3];
    let mut class = 0;
    for k in 1..3 {
        if values[idx[k - 1]] - values[idx[k]] > TOLERANCE {
            class += 1;
        }
        classes[idx[k]] = class;
    }
    classes
}

impl Ranking {
    pub fn from_scores(score: [f64; 3]) -> Self {
        Self::build(score, None)
    }

    pub fn with_tiebreak(score: [f64; 3], secondary: [f64; 3]) -> Self {
        Self::build(score, Some(secondary))
    }

    fn build(score: [f64; 3], secondary: Option<[f64; 3]>) -> Self {
        let primary = tie_classes(score);
        let second = secondary.map(tie_classes).unwrap_or([0; 3]);
        let mut order = Color::ALL;
        order.sort_by_key(|c| (primary[c.index()], second[c.index()], c.index()));
        Self {
            order,
            score,
            secondary,
        }
    }

    pub fn order(&self) -> [Color; 3] {
        self.order
    }

    pub fn first(&self) -> Color {
        self.order[0]
    }

    pub fn score(&self, c: Color) -> f64 {
        self.score[c.index()]
    }

    pub fn scores(&self) -> [f64; 3] {
        self.score
    }

    pub fn secondary(&self) -> Option<[f64; 3]> {
        self.secondary
    }

    /// 1-based guess number at which `c` would be named.
    pub fn position(&self, c: Color) -> usize {
        self.order.iter().position(|&x| x == c).expect("order is a permutation") + 1
    }

    /// Whether the ranking answers "`a` is more likely than `b`".
    pub fn prefers(&self, a: Color, b: Color) -> bool {
        self.position(a) < self.position(b)
    }
}

pub fn rank_bayes(posterior: &Distribution3) -> Ranking {
    Ranking::from_scores(posterior.probs())
}

pub fn rank_cf(cf: &[CfValue; 3]) -> Ranking {
    Ranking::from_scores(cf.map(CfValue::value))
}

/// Singleton belief first, then singleton plausibility.
pub fn rank_ds(m: &MassFunction) -> Ranking {
    let bel = Color::ALL.map(|c| m.belief(ColorSet::singleton(c)));
    let pl = Color::ALL.map(|c| m.plausibility(ColorSet::singleton(c)));
    Ranking::with_tiebreak(bel, pl)
}

//! Exact rational lower-bound arithmetic and the table of known and new
//! approximation lower bounds.

use crate::reduce::Regime;
use num_rational::Ratio as R;
use thiserror::Error;

pub type Ratio = R<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("delta must lie in [0, 1/2), got {0}")]
    Delta(Ratio),
    #[error("occurrence bound k must be at least 1")]
    K,
    #[error("ratio {0} is outside [1, 2)")]
    Degenerate(Ratio),
}

/// Length formula `a2·m2 + a3·m3 + cn·n + splice + slack·u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetCostProfile {
    pub per_two_eq: i64,
    pub per_three_eq: i64,
    pub per_circle: i64,
    pub splice: i64,
    pub slack: i64,
}

impl GadgetCostProfile {
    pub fn of(regime: Regime) -> Self {
        let (a2, a3, cn, s, c) = match regime {
            Regime::Atsp12 => (3, 13, 1, 1, 1),
            Regime::Atsp14 => (4, 20, 2, 2, 2),
            Regime::Tsp12 => (8, 27, 3, 1, 1),
            Regime::Tsp14 => (10, 36, 6, 2, 2),
        };
        GadgetCostProfile {
            per_two_eq: a2,
            per_three_eq: a3,
            per_circle: cn,
            splice: s,
            slack: c,
        }
    }

    pub fn base(&self, m2: usize, m3: usize, n: usize) -> i64 {
        self.per_two_eq * m2 as i64 + self.per_three_eq * m3 as i64 + self.per_circle * n as i64 + self.splice
    }

    /// Tour length per unit of scale at 60 two- and 2 three-variable
    /// equations per unit.
    pub fn scale_term(&self) -> i64 {
        60 * self.per_two_eq + 2 * self.per_three_eq
    }

    /// Numerator of the per-unit overhead bound `(cn·n + splice)/ν`. With at
    /// most `6ν/k` circles and `ν ≥ k` the overhead is at most
    /// `(6·cn + splice)/k`.
    pub fn overhead(&self) -> i64 {
        6 * self.per_circle + self.splice
    }
}

/// Lower bound `(A + c(1-δ)) / (A + cδ + (6·cn + s)/k)` where `A` is the
/// per-unit scale term.
pub fn bound_ratio(p: &GadgetCostProfile, delta: Ratio, k: i64) -> Result<Ratio, BoundsError> {
    if delta < Ratio::from_integer(0) || delta >= Ratio::new(1, 2) {
        return Err(BoundsError::Delta(delta));
    }
    if k < 1 {
        return Err(BoundsError::K);
    }
    let a = Ratio::from_integer(p.scale_term());
    let c = Ratio::from_integer(p.slack);
    let num = a + c * (Ratio::from_integer(1) - delta);
    let den = a + c * delta + Ratio::new(p.overhead(), k);
    Ok(num / den)
}

/// Value of `bound_ratio` as δ → 0 and k → ∞.
pub fn bound_limit(p: &GadgetCostProfile) -> Ratio {
    Ratio::new(p.scale_term() + p.slack, p.scale_term())
}

/// A (2-α) lower bound for (1,2)-ATSP gives 1/α for MAX-(0,1)-ATSP, so
/// `p/q ↦ q/(2q-p)`.
pub fn max01_from_atsp12_bound(r: Ratio) -> Result<Ratio, BoundsError> {
    if r < Ratio::from_integer(1) || r >= Ratio::from_integer(2) {
        return Err(BoundsError::Degenerate(r));
    }
    let (p, q) = (*r.numer(), *r.denom());
    Ok(Ratio::new(q, 2 * q - p))
}

/// Decimal expansion truncated to `digits` places.
pub fn decimal_trunc(r: Ratio, digits: u32) -> String {
    let scale = 10i64.pow(digits);
    let v = (r * Ratio::from_integer(scale)).floor().to_integer();
    format!("{}.{:0width$}", v / scale, v % scale, width = digits as usize)
}

/// True when the printed decimal is within one unit of the last printed
/// place of the exact value (floor or ceiling of the truncation).
pub fn printed_matches(r: Ratio, printed: &str) -> bool {
    let Some((int, frac)) = printed.trim().split_once('.') else {
        return false;
    };
    let (Ok(i), Ok(f)) = (int.parse::<i64>(), frac.parse::<i64>()) else {
        return false;
    };
    let scale = 10i64.pow(frac.len() as u32);
    let shown = Ratio::new(i * scale + f, scale);
    let s = Ratio::from_integer(scale);
    let floor = (r * s).floor() / s;
    shown == floor || shown == floor + Ratio::new(1, scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    B2,
    B4,
    B8,
    Unbounded,
}

impl Bound {
    pub fn label(&self) -> &'static str {
        match self {
            Bound::B2 => "B=2",
            Bound::B4 => "B=4",
            Bound::B8 => "B=8",
            Bound::Unbounded => "unbounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Prior,
    New,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableCell {
    pub problem: &'static str,
    pub bound: Option<Bound>,
    pub origin: Origin,
    pub ratio: Ratio,
    /// Decimal as printed in the published table.
    pub printed: &'static str,
}

impl TableCell {
    pub fn decimal(&self) -> String {
        decimal_trunc(self.ratio, 5)
    }
}

fn cell(
    problem: &'static str,
    bound: Option<Bound>,
    origin: Origin,
    (p, q): (i64, i64),
    printed: &'static str,
) -> TableCell {
    TableCell {
        problem,
        bound,
        origin,
        ratio: Ratio::new(p, q),
        printed,
    }
}

/// Every cell of the two published tables, row by row.
pub fn ratio_table() -> Vec<TableCell> {
    use Bound::*;
    use Origin::*;
    let atsp = "(1,B)-ATSP";
    let tsp = "(1,B)-TSP";
    let max01 = "MAX-(0,1)-ATSP";
    let max = "MAX-ATSP";
    let new_atsp12 = bound_limit(&GadgetCostProfile::of(Regime::Atsp12));
    let new_atsp14 = bound_limit(&GadgetCostProfile::of(Regime::Atsp14));
    let new_tsp12 = bound_limit(&GadgetCostProfile::of(Regime::Tsp12));
    let new_tsp14 = bound_limit(&GadgetCostProfile::of(Regime::Tsp14));
    let new_max01 = max01_from_atsp12_bound(new_atsp12).expect("limit lies in (1,2)");
    let parts = |r: Ratio| (*r.numer(), *r.denom());
    vec![
        cell(atsp, Some(B2), Prior, (321, 320), "1.00312"),
        cell(atsp, Some(B4), Prior, (321, 320), "1.00312"),
        cell(atsp, Some(B8), Prior, (135, 134), "1.00746"),
        cell(atsp, Some(Unbounded), Prior, (117, 116), "1.00862"),
        cell(atsp, Some(B2), New, parts(new_atsp12), "1.00485"),
        cell(atsp, Some(B4), New, parts(new_atsp14), "1.00714"),
        cell(tsp, Some(B2), Prior, (741, 740), "1.00135"),
        cell(tsp, Some(B4), Prior, (741, 740), "1.00135"),
        cell(tsp, Some(B8), Prior, (389, 388), "1.00257"),
        cell(tsp, Some(Unbounded), Prior, (220, 219), "1.00456"),
        cell(tsp, Some(B2), New, parts(new_tsp12), "1.00187"),
        cell(tsp, Some(B4), New, parts(new_tsp14), "1.00297"),
        // A (1,4) metric is also a (1,8) metric.
        cell(tsp, Some(B8), New, parts(new_tsp14), "1.00297"),
        cell(max01, None, Prior, (320, 319), "1.00314"),
        cell(max, None, Prior, (208, 207), "1.00483"),
        cell(max01, None, New, parts(new_max01), "1.00487"),
        // MAX-(0,1)-ATSP is a special case of MAX-ATSP.
        cell(max, None, New, parts(new_max01), "1.00487"),
    ]
}

/// Footnotes printed under the table.
pub const TABLE_NOTES: &[&str] = &[
    "new bounds are limits of (A + c(1-d)) / (A + c*d + (6*cn + s)/k) as d -> 0, k -> inf",
    "A = 60*a2 + 2*a3 per unit scale; overhead uses n <= 6*nu/k circles and nu >= k",
    "decimals are truncated to 5 places",
];

pub fn render_table(csv: bool) -> String {
    let mut out = String::new();
    if csv {
        out.push_str("problem,bound,origin,ratio,decimal,printed\n");
    } else {
        out.push_str(&format!(
            "{:<16} {:<10} {:<6} {:<9} {:<8} {}\n",
            "problem", "bound", "origin", "ratio", "decimal", "printed"
        ));
    }
    for c in ratio_table() {
        let bound = c.bound.map_or("-", |b| b.label());
        let origin = match c.origin {
            Origin::Prior => "prior",
            Origin::New => "new",
        };
        let ratio = format!("{}/{}", c.ratio.numer(), c.ratio.denom());
        if csv {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.problem,
                bound,
                origin,
                ratio,
                c.decimal(),
                c.printed
            ));
        } else {
            out.push_str(&format!(
                "{:<16} {:<10} {:<6} {:<9} {:<8} {}\n",
                c.problem,
                bound,
                origin,
                ratio,
                c.decimal(),
                c.printed
            ));
        }
    }
    if !csv {
        for n in TABLE_NOTES {
            out.push_str(&format!("  * {n}\n"));
        }
    }
    out
}

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Exact edge cost.
pub type Rational = Ratio<i64>;

/// Cost paid by one player for a play.
///
/// Reach players pay a nonnegative finite amount or `PlusInfinity`; safety
/// players pay `-l` for a first bad-set visit at index `l`, or
/// `MinusInfinity` if the bad set is avoided forever. Every player
/// minimizes, so a single total order serves both conventions:
/// `MinusInfinity < Finite(_) < PlusInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cost {
    MinusInfinity,
    Finite(Rational),
    PlusInfinity,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(Ratio::new_raw(0, 1));

    pub fn int(n: i64) -> Cost {
        Cost::Finite(Rational::from_integer(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            Cost::Finite(r) => Some(*r),
            _ => None,
        }
    }

    /// The value as an integer, when it is a finite integer.
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Cost::Finite(r) if r.is_integer() => r.to_integer().into(),
            _ => None,
        }
    }

    /// Adds a finite amount; infinities absorb.
    pub fn shift(self, by: Rational) -> Cost {
        match self {
            Cost::Finite(r) => Cost::Finite(r + by),
            other => other,
        }
    }
}

impl Add<Rational> for Cost {
    type Output = Cost;

    fn add(self, rhs: Rational) -> Cost {
        self.shift(rhs)
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        use Cost::*;
        match (self, other) {
            (MinusInfinity, MinusInfinity) | (PlusInfinity, PlusInfinity) => Ordering::Equal,
            (MinusInfinity, _) | (_, PlusInfinity) => Ordering::Less,
            (_, MinusInfinity) | (PlusInfinity, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::MinusInfinity => f.write_str("-inf"),
            Cost::PlusInfinity => f.write_str("+inf"),
            Cost::Finite(r) if r.is_integer() => write!(f, "{}", r.to_integer()),
            Cost::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Default for Cost {
    fn default() -> Self {
        Cost::Finite(Rational::zero())
    }
}

/// One cost per player, indexed by player.
pub type CostProfile = Vec<Cost>;

/// Parses `"3"`, `"-2"`, `"3/2"`, `"+inf"`, `"-inf"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<i64>().ok().map(Rational::from_integer),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer `>= r`.
pub(crate) fn ceil_to_usize(r: Rational) -> usize {
    r.ceil().to_integer().to_usize().unwrap_or(0)
}

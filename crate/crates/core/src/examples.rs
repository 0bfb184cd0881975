//! Built-in fixtures: the two-good best-response example and the 4 x 4
//! instance with irrational equilibrium prices.

use crate::error::{Error, Result};
use crate::model::{Allocation, EquilibriumPoint, MarketInstance, PriceVector, Rat};
use crate::verify::verify_equilibrium;

pub const IRRATIONAL_DEFAULT_M: i64 = 100;

/// Smallest `M` for which the `-M` entries keep their role.
pub const IRRATIONAL_MIN_M: i64 = 20;

/// Utilities `(u, p)` of the two-good best-response example, with the cheap
/// good at price 1/10.
pub fn example_one() -> (Vec<Rat>, Vec<Rat>) {
    (
        vec![Rat::from_int(10), Rat::from_int(2)],
        vec![Rat::from_int(2), Rat::new(1, 10)],
    )
}

pub fn table1_instance() -> MarketInstance {
    table1_instance_with_m(IRRATIONAL_DEFAULT_M).expect("default M is valid")
}

pub fn table1_instance_with_m(m: i64) -> Result<MarketInstance> {
    if m < IRRATIONAL_MIN_M {
        return Err(Error::InvalidArgument(format!(
            "M must be at least {IRRATIONAL_MIN_M}, got {m}"
        )));
    }
    let rows = [
        vec![10, 20, -m, 40],
        vec![10, 15, -m, 40],
        vec![10, -m, 30, -m],
        vec![-m, 20, 30, -m],
    ];
    let utilities = rows
        .iter()
        .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
        .collect();
    MarketInstance::with_neg_infinity(utilities, Rat::from_int(-m))
}

/// One of the two candidate equilibria of [`table1_instance`], in binary64.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormEquilibrium {
    pub which: u8,
    /// Positive root of `4y^2 - y - 1` (case 1) or `7y^2 - y - 4` (case 2).
    pub y: f64,
    /// `r_j = |1 - p_j|`.
    pub r: [f64; 4],
    pub point: EquilibriumPoint<f64>,
}

impl ClosedFormEquilibrium {
    pub fn prices(&self) -> &[f64] {
        self.point.prices.as_slice()
    }
}

/// Positive root of `a y^2 + b y + c` with `a > 0 > c`, without
/// cancellation.
fn positive_root(a: f64, b: f64, c: f64) -> f64 {
    let q = -0.5 * (b + b.signum() * (b * b - 4.0 * a * c).sqrt());
    let (y1, y2) = (q / a, c / q);
    y1.max(y2)
}

/// The closed-form prices and the allocation implied by each agent's
/// budget-exhausting mix plus market clearing.
///
/// Case 1: agent 0 buys goods 0, 1, 3 and agent 1 buys 0, 3. Case 2:
/// agent 1 buys 0, 1, 3 and agent 0 buys 1, 3. Agents 2 and 3 buy
/// `{0, 2}` and `{1, 2}` in both.
pub fn closed_form_equilibrium(which: u8) -> Result<ClosedFormEquilibrium> {
    let (y, r4) = match which {
        1 => {
            let y = positive_root(4.0, -1.0, -1.0);
            (y, 2.0 - 3.0 * y * y)
        }
        2 => {
            let y = positive_root(7.0, -1.0, -4.0);
            (y, 5.0 - 6.0 * y * y)
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "closed-form case must be 1 or 2, got {which}"
            )))
        }
    };
    let (r1, r2, r3) = (1.0, y * y, y);
    let prices = vec![0.0, 1.0 - r2, 1.0 + r3, 1.0 + r4];

    let mut x = vec![vec![0.0; 4]; 4];
    x[2][0] = r3 / (1.0 + r3);
    x[2][2] = 1.0 / (1.0 + r3);
    x[3][1] = r3 / (r2 + r3);
    x[3][2] = r2 / (r2 + r3);
    if which == 1 {
        x[1][0] = r4 / (1.0 + r4);
        x[1][3] = 1.0 / (1.0 + r4);
        x[0][3] = 1.0 - x[1][3];
        x[0][1] = 1.0 - x[3][1];
        x[0][0] = 1.0 - x[1][0] - x[2][0];
    } else {
        x[0][1] = r4 / (r2 + r4);
        x[0][3] = r2 / (r2 + r4);
        x[1][3] = 1.0 - x[0][3];
        x[1][1] = 1.0 - x[0][1] - x[3][1];
        x[1][0] = 1.0 - x[2][0];
    }

    Ok(ClosedFormEquilibrium {
        which,
        y,
        r: [r1, r2, r3, r4],
        point: EquilibriumPoint::new(PriceVector::new(prices)?, Allocation::new(x)?)?,
    })
}

/// Reference prices evaluated directly from the surd expressions.
pub fn closed_form_prices(which: u8) -> Result<[f64; 4]> {
    match which {
        1 => {
            let s = 17f64.sqrt();
            Ok([
                0.0,
                (23.0 - s) / 32.0,
                (9.0 + s) / 8.0,
                (69.0 - 3.0 * s) / 32.0,
            ])
        }
        2 => {
            let s = 113f64.sqrt();
            Ok([
                0.0,
                (41.0 - s) / 98.0,
                (15.0 + s) / 14.0,
                (246.0 - 6.0 * s) / 98.0,
            ])
        }
        _ => Err(Error::InvalidArgument(format!(
            "closed-form case must be 1 or 2, got {which}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisconnectednessWitness {
    /// Infinity-norm distance between the two price vectors.
    pub distance: f64,
    pub midpoint: EquilibriumPoint<f64>,
    pub midpoint_passes: bool,
    pub endpoints_pass: [bool; 2],
}

/// Distance between the two candidate equilibria and whether their midpoint
/// verifies at `tol`.
pub fn disconnectedness_witness(tol: f64) -> Result<DisconnectednessWitness> {
    let inst = table1_instance();
    let a = closed_form_equilibrium(1)?.point;
    let b = closed_form_equilibrium(2)?.point;
    let distance = a
        .prices
        .as_slice()
        .iter()
        .zip(b.prices.as_slice())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    let mid = |u: &f64, v: &f64| 0.5 * (u + v);
    let prices = a
        .prices
        .as_slice()
        .iter()
        .zip(b.prices.as_slice())
        .map(|(p, q)| mid(p, q))
        .collect();
    let rows = a
        .allocation
        .rows()
        .iter()
        .zip(b.allocation.rows())
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(u, v)| mid(u, v)).collect())
        .collect();
    let midpoint = EquilibriumPoint::new(PriceVector::new(prices)?, Allocation::new(rows)?)?;
    let midpoint_passes = verify_equilibrium(&inst, &midpoint, &tol)?.verdict;
    let endpoints_pass = [
        verify_equilibrium(&inst, &a, &tol)?.verdict,
        verify_equilibrium(&inst, &b, &tol)?.verdict,
    ];
    Ok(DisconnectednessWitness {
        distance,
        midpoint,
        midpoint_passes,
        endpoints_pass,
    })
}

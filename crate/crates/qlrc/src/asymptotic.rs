//! Leading-order rate bounds for quantum codes with locality r as the
//! length grows, with the lower-order terms set to zero. Three lines in
//! the (relative distance, rate) plane: a dimension-form bound, a
//! distance-form bound, and the dimension-oracle bound, the last two
//! sharing an intercept. Everything is affine in the relative distance
//! and clamped to [0, 1].
//!
//! The arithmetic is generic over the scalar so the same formulas drive
//! f64 plotting grids and exact rational checks (see the `Rate` and
//! `ExactRate` aliases at the crate root).

use num_traits::FromPrimitive;
use std::fmt::Write as _;
use std::ops::{Add, Div, Mul, Sub};

use crate::error::{Error, Result};
use crate::Rate;

/// Scalar the rate formulas run over: ordered field operations plus exact
/// conversion from small integers.
pub trait RateScalar:
    Clone
    + PartialOrd
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
}

impl<T> RateScalar for T where
    T: Clone
        + PartialOrd
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
{
}

/// One grid point: the three rate bounds at relative distance `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticPoint<T> {
    pub r: usize,
    pub q: u64,
    pub delta: T,
    pub r_dim: T,
    pub r_dist: T,
    pub r_cm: T,
}

fn scalar<T: RateScalar>(x: u64) -> Result<T> {
    T::from_u64(x).ok_or_else(|| Error::Param(format!("{x} does not convert to the rate scalar")))
}

fn clamp_unit<T: RateScalar>(x: T) -> Result<T> {
    let zero = scalar::<T>(0)?;
    let one = scalar::<T>(1)?;
    Ok(if x < zero {
        zero
    } else if x > one {
        one
    } else {
        x
    })
}

/// Evaluates the three rate bounds at relative distance `delta`:
/// dimension form (r/(r+1))^2 - r(2r+1)/(r+1)^2 delta, distance form
/// r/(r+2) (1 - 2 delta), and the dimension-oracle form
/// r/(r+2) - (2r/(r+2)) (q/(q-1)) delta, each clamped to [0, 1].
pub fn asym_bounds<T: RateScalar>(r: usize, q: u64, delta: T) -> Result<AsymptoticPoint<T>> {
    if r < 1 {
        return Err(Error::Param("locality must be at least 1".into()));
    }
    if q < 2 {
        return Err(Error::Param("field order must be at least 2".into()));
    }
    let zero = scalar::<T>(0)?;
    let one = scalar::<T>(1)?;
    if delta < zero || delta > one {
        return Err(Error::Param("relative distance must lie in [0, 1]".into()));
    }
    let two = scalar::<T>(2)?;
    let rt = scalar::<T>(r as u64)?;
    let qt = scalar::<T>(q)?;
    let rp1 = rt.clone() + one.clone();
    let rp2 = rt.clone() + two.clone();

    let dim_num = rt.clone() * rt.clone()
        - rt.clone() * (two.clone() * rt.clone() + one.clone()) * delta.clone();
    let r_dim = clamp_unit(dim_num / (rp1.clone() * rp1))?;

    let dist_num = rt.clone() * (one.clone() - two.clone() * delta.clone());
    let r_dist = clamp_unit(dist_num / rp2.clone())?;

    let ratio = qt.clone() / (qt - one.clone());
    let cm_num = rt.clone() * (one - two * delta.clone() * ratio);
    let r_cm = clamp_unit(cm_num / rp2)?;

    Ok(AsymptoticPoint {
        r,
        q,
        delta,
        r_dim,
        r_dist,
        r_cm,
    })
}

/// The relative distance where the dimension-oracle line crosses the
/// dimension-form line: (q-1) / (2q(r+1)^2 - (q-1)(r+2)(2r+1)). Beyond it
/// the oracle line is the tighter of the two. A non-positive denominator
/// means the lines never cross at positive rate, which is flagged.
pub fn crossover_delta<T: RateScalar>(r: usize, q: u64) -> Result<T> {
    if r < 1 {
        return Err(Error::Param("locality must be at least 1".into()));
    }
    if q < 2 {
        return Err(Error::Param("field order must be at least 2".into()));
    }
    let zero = scalar::<T>(0)?;
    let one = scalar::<T>(1)?;
    let two = scalar::<T>(2)?;
    let rt = scalar::<T>(r as u64)?;
    let qt = scalar::<T>(q)?;
    let rp1 = rt.clone() + one.clone();
    let rp2 = rt.clone() + two.clone();
    let num = qt.clone() - one.clone();
    let den = two.clone() * qt * rp1.clone() * rp1 - num.clone() * rp2 * (two * rt + one);
    if den <= zero {
        return Err(Error::Param(
            "the crossover denominator is not positive for these parameters".into(),
        ));
    }
    Ok(num / den)
}

/// 51 relative distances from 0 to 0.5 in steps of 0.01.
pub fn default_grid() -> Vec<Rate> {
    (0..=50).map(|i| i as Rate / 100.0).collect()
}

/// Evaluates the bounds over a grid of relative distances.
pub fn curve_points(r: usize, q: u64, grid: &[Rate]) -> Result<Vec<AsymptoticPoint<Rate>>> {
    grid.iter().map(|&d| asym_bounds(r, q, d)).collect()
}

/// Renders grid points as CSV with a fixed 12-decimal format.
pub fn curves_csv(points: &[AsymptoticPoint<Rate>]) -> String {
    let mut out = String::from("delta,r_dim,r_dist,r_cm\n");
    for p in points {
        writeln!(
            out,
            "{:.12},{:.12},{:.12},{:.12}",
            p.delta, p.r_dim, p.r_dist, p.r_cm
        )
        .expect("string write");
    }
    out
}

/// Grid evaluation straight to CSV.
pub fn emit_curves(r: usize, q: u64, grid: &[Rate]) -> Result<String> {
    Ok(curves_csv(&curve_points(r, q, grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactRate;

    fn ratio(n: i64, d: i64) -> ExactRate {
        ExactRate::new(n, d)
    }

    #[test]
    fn intercepts_are_exact() {
        let p = asym_bounds::<ExactRate>(2, 2, ratio(0, 1)).unwrap();
        assert_eq!(p.r_dim, ratio(4, 9));
        assert_eq!(p.r_dist, ratio(1, 2));
        assert_eq!(p.r_cm, ratio(1, 2));
    }

    #[test]
    fn crossover_matches_the_lines() {
        let star = crossover_delta::<ExactRate>(2, 2).unwrap();
        assert_eq!(star, ratio(1, 16));
        let p = asym_bounds::<ExactRate>(2, 2, star).unwrap();
        assert_eq!(p.r_dim, p.r_cm);
        assert_eq!(p.r_dim, ratio(3, 8));
    }

    #[test]
    fn crossover_denominator_guard() {
        assert!(crossover_delta::<ExactRate>(1, 9).is_err());
        assert!(crossover_delta::<ExactRate>(1, 11).is_err());
        assert!(crossover_delta::<ExactRate>(2, 2).is_ok());
    }

    #[test]
    fn rates_clamp_to_zero() {
        for num in [8, 12, 16] {
            let p = asym_bounds::<ExactRate>(2, 2, ratio(num, 16)).unwrap();
            assert_eq!(p.r_dim, ratio(0, 1));
            assert_eq!(p.r_dist, ratio(0, 1));
            assert_eq!(p.r_cm, ratio(0, 1));
        }
    }

    #[test]
    fn oracle_line_never_exceeds_distance_line() {
        for r in 1..=6usize {
            for q in [2u64, 3, 4, 13] {
                for num in 0..=16 {
                    let p = asym_bounds::<ExactRate>(r, q, ratio(num, 16)).unwrap();
                    assert!(p.r_cm <= p.r_dist, "r={r} q={q} delta={num}/16");
                }
            }
        }
    }

    #[test]
    fn csv_grid_shape_and_slopes() {
        let grid = default_grid();
        assert_eq!(grid.len(), 51);
        let csv = emit_curves(2, 2, &grid).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 52);
        assert_eq!(lines[0], "delta,r_dim,r_dist,r_cm");
        assert_eq!(
            lines[1],
            "0.000000000000,0.444444444444,0.500000000000,0.500000000000"
        );

        let rows: Vec<Vec<f64>> = lines[1..]
            .iter()
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        for row in &rows {
            assert!(row[3] <= row[2] + 1e-15);
        }
        // affine slopes per 0.01 step, away from the clamped tails
        let dim_slope = -10.0 / 9.0 * 0.01;
        let dist_slope = -0.01;
        let cm_slope = -0.02;
        for i in 0..rows.len() - 1 {
            let (d0, d1) = (rows[i][0], rows[i + 1][0]);
            assert!((d1 - d0 - 0.01).abs() < 1e-12);
            if rows[i + 1][1] > 0.0 {
                assert!((rows[i + 1][1] - rows[i][1] - dim_slope).abs() < 1e-12);
            }
            if rows[i + 1][2] > 0.0 {
                assert!((rows[i + 1][2] - rows[i][2] - dist_slope).abs() < 1e-12);
            }
            if rows[i + 1][3] > 0.0 {
                assert!((rows[i + 1][3] - rows[i][3] - cm_slope).abs() < 1e-12);
            }
        }
    }
}

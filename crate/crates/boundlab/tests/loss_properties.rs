//! Property tests of the margin loss family: the surrogate ordering,
//! monotonicity in the signed margin, and the Lipschitz bound that
//! makes the ramp a continuous relaxation.

use boundlab::losses::{ramp_loss, strict_loss, zero_one_loss};
use proptest::prelude::*;

fn label(flag: bool) -> i8 {
    if flag {
        1
    } else {
        -1
    }
}

proptest! {
    #[test]
    fn zero_one_is_dominated_by_ramp_which_is_dominated_by_strict(
        y_out in -10.0f64..10.0,
        positive in any::<bool>(),
        gamma in 1e-6f64..5.0,
    ) {
        let y = label(positive);
        let lo = zero_one_loss(y_out, y);
        let mid = ramp_loss(y_out, y, gamma);
        let hi = strict_loss(y_out, y, gamma);
        prop_assert!(lo <= mid + 1e-15, "0-1 {} above ramp {}", lo, mid);
        prop_assert!(mid <= hi + 1e-15, "ramp {} above strict {}", mid, hi);
    }

    #[test]
    fn ramp_is_monotone_nonincreasing_in_the_signed_margin(
        a in -10.0f64..10.0,
        b in -10.0f64..10.0,
        positive in any::<bool>(),
        gamma in 1e-6f64..5.0,
    ) {
        let y = label(positive);
        let (lo_out, hi_out) = if a * f64::from(y) <= b * f64::from(y) { (a, b) } else { (b, a) };
        prop_assert!(
            ramp_loss(lo_out, y, gamma) >= ramp_loss(hi_out, y, gamma) - 1e-15
        );
    }

    #[test]
    fn ramp_is_lipschitz_in_the_output(
        a in -10.0f64..10.0,
        b in -10.0f64..10.0,
        positive in any::<bool>(),
        gamma in 1e-3f64..5.0,
    ) {
        let y = label(positive);
        let jump = (ramp_loss(a, y, gamma) - ramp_loss(b, y, gamma)).abs();
        prop_assert!(jump <= (a - b).abs() / gamma + 1e-12);
    }
}

#![allow(dead_code)]

use regfrac::{PowerLaw, ScalarField};

/// `amp · exp(1 − 1/(1 − r²))`, `r = (y − center)/width`, supported on `|r| < 1`.
pub fn bump(center: f64, width: f64, amp: f64) -> ScalarField {
    ScalarField::compact(
        move |y| {
            let r = (y - center) / width;
            let q = 1.0 - r * r;
            if q <= 0.0 {
                0.0
            } else {
                amp * (1.0 - 1.0 / q).exp()
            }
        },
        center - width,
        center + width,
    )
}

pub fn gaussian() -> ScalarField {
    ScalarField::new(|y| (-y * y).exp())
        .with_second_derivative(|y| (4.0 * y * y - 2.0) * (-y * y).exp())
        .with_left_tail(PowerLaw::new(0.0, 0.0))
        .with_right_tail(PowerLaw::new(0.0, 0.0))
}

pub fn order(s: f64) -> regfrac::FracOrder {
    regfrac::FracOrder::new(s).unwrap()
}

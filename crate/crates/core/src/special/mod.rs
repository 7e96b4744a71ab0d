//! Weierstrass and theta functions, and the genus-1 closed-form solutions.

pub mod elliptic;
pub mod solutions;
pub mod theta;

pub use elliptic::{carlson_rf, elliptic_from_cubic, elliptic_from_invariants, laurent_coefficients, EllipticData};
pub use solutions::{mumford_g1_exact, q1_exact, DisplayedReport, MumfordG1, NyG1};
pub use theta::{
    lambda_functions, theta, theta_bounded, theta_char_bounded, truncation_radius, u_from_theta, Characteristic,
    ThetaData, ThetaPoly, ThetaValue,
};

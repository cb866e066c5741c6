//! Special functions: spherical Bessel/Hankel functions, complex spherical
//! harmonics and Wigner 3-j symbols.

mod bessel;
mod harmonics;
mod wigner;

pub use bessel::{
    spherical_bessel_j, spherical_bessel_j_seq, spherical_bessel_y, spherical_bessel_y_seq,
    spherical_hankel_h1, spherical_hankel_h1_seq,
};
pub use harmonics::{mode_count, spherical_harmonic, spherical_harmonics_upto, HarmonicIndex};
pub use wigner::{wigner_3j, wigner_3j_allowed};

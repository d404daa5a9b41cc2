//! Special functions and seeded sampling shared by every other module.

mod dist;
mod rng;
mod special;

pub use dist::Dist;
pub use rng::{RngStream, StreamRng};
pub use special::{
    ln_beta, ln_gamma, normal_cdf, normal_logpdf, reg_incomplete_beta, student_t_cdf,
    student_t_logpdf,
};

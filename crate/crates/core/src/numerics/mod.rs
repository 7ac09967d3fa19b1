//! Shared numeric substrate: complex vectors, random streams, special
//! functions, quadrature and a brute-force Fourier oracle.

mod complex;
pub mod fourier;
pub mod quadrature;
mod rng;
pub mod special;

pub use complex::{norm_sq, phase_kernel, phase_kernel_slices, ComplexVec};
pub use fourier::{fourier_oracle_1mode, Grid2, OracleResult};
pub use rng::{fill_gaussian, gaussian_complex, RandomStream, StreamRng};
pub use special::{ln_gamma, log_reg_upper_gamma, reg_upper_gamma};

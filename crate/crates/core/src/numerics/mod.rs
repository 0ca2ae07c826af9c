//! Shared numerical substrate: momentum-space quadrature grids, sphere grids,
//! Pauli (gamma) matrices and the special functions every other module leans on.

mod grid;
mod special;
mod spin;

pub(crate) use grid::gauss_legendre_rule;
pub use grid::{make_grid, GridScheme, MomentumGrid, SphereGrid};
pub use special::{beta_fn, gamma_fn, ln_gamma, sphere_area};
pub use spin::{make_pauli, sigma_direction, SpinStructure};

use rand_chacha::rand_core::SeedableRng;

/// All randomness in the crate derives from a `u64` seed through this constructor.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

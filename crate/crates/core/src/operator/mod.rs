//! Discretized spatio-spectral limiting operators and their spectra.

mod bessel;
mod discretize;
mod eigen;
mod kernel;
mod quadrature;
mod spectrum;

pub use bessel::{j1, j1_over_x};
pub use discretize::{
    assemble, default_nodes_per_dim, discretize, discretize_shared, read_binary, DiscreteOperator, OperatorMeta,
    Resolution, Scheme, MIN_NODES,
};
pub use eigen::symmetric_eigenvalues;
pub use kernel::{band_kernel, BandKernel};
pub use quadrature::{gauss_legendre, Quadrature};
pub use spectrum::{
    count_above, count_above_sensitive, count_plunge, count_plunge_sensitive, cube_pair_spectrum, plunge_norm,
    schatten, schatten_values, spectrum, trace_mass, trace_residual, SensitiveCount, Spectrum, PRODUCT_FLOOR,
    SENSITIVITY, TOL_PSD,
};

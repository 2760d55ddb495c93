//! Finite-dimensional C*-algebra arithmetic on `n × n` complex matrices.

mod eigen;
mod matrix;
mod order;

pub use eigen::{hermitian_eigen, hermitian_spectrum, HermitianEigen};
pub use matrix::MatrixElement;
pub use order::{
    commutes_with_all, in_commutant, is_positive, loewner_leq, matrix_units, min_eigenvalue,
    neumann_inverse_one_minus, operator_norm, order_deficit, positive_sqrt,
};

//! Dense complex tensors, site embeddings and wiring-diagram contraction.

mod dense;
mod ops;
pub mod wiring;

pub use dense::{checked_pow, site_count, DenseJson, DenseTensor};
pub use ops::{
    apply_on_sites, apply_on_sites_right, compose_perm, embed_on_sites, frobenius_distance,
    operator_sites, permutation_operator, relative_distance, RELATIVE_FLOOR, SWAP_PAIRS,
};
pub use wiring::{brute_force_contract, contract, Node, WiringDiagram};

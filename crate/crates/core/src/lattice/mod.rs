//! Integer lattices: Hermite forms, LLL, relation lattices of units and
//! point counting in cubes.

mod cubes;
mod enumerate;
mod hnf;
mod lll;
mod matrix;
mod relation;

pub use cubes::{cube_bound, hyperplane_cube_count, integer_normal, HyperplaneCubeCount};
pub use enumerate::{
    basis_with_norm_bound, count_cube_points, cube_points, extract_li_vectors, CubeCountEstimate, NormBoundedBasis,
    GRID_SCAN_LIMIT, POINT_BUDGET,
};
pub use hnf::{hnf, hnf_basis, in_lattice, HermiteDecomposition};
pub use lll::{default_delta, is_lll_reduced, lll_reduce};
pub use matrix::IntMatrix;
pub use relation::{
    brute_force_subgroup_size, check_lattice_invariants, count_relations_in_box, evaluate_relation, relation_lattice,
    subgroup_size, LatticeInvariantReport, RelationLattice,
};

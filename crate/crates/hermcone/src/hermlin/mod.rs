//! Bounded cochain complexes of finite-dimensional hermitian spaces.
//!
//! Conventions: `shift(C, k)^i = C^{i+k}` with differential times `(-1)^k`;
//! `cone(f)^i = S^{i+1} ⊕ T^i` with `d(x, y) = (-dx, f x + dy)`; tensor and
//! Hom carry Koszul signs `d(x⊗y) = dx⊗y + (-1)^{|x|} x⊗dy` and
//! `d(φ) = d∘φ − (-1)^{|φ|} φ∘d`.

mod complex;
mod double;
mod hodge;
pub mod json;
mod maps;
mod ops;
mod split;
mod squares;

pub use complex::{DegreeReport, HermComplex, HermSpace, ValidationReport};
pub use double::DoubleComplex;
pub use hodge::{
    canonical_basis, cohomology, cohomology_from, hodge_decompose, hodge_with, induced_blocks, CohomologyDegree,
    CohomologyReport, DegreeHodge, Hodge,
};
pub use maps::{ChainMap, Homotopy};
pub use ops::{
    cone, cone_inclusion, cone_projection, cone_sign_isometry, direct_sum, direct_sum_maps, dual, hom_complex,
    hom_map, sign_map, shift, shift_map, tensor, tensor_maps, unit,
};
pub use split::{acyclic_blocks, in_m0, is_orthogonally_split};
pub use squares::{cone_of_squares, null_homotopy, section_to_map, ConeSquares, SectionResult, SplitSes};

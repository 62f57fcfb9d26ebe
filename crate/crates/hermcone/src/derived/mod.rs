//! The derived category of a point with hermitian structures.
//!
//! Over a field every complex splits, so a morphism in the derived category
//! is determined by the graded map it induces on cohomology. Roofs are kept
//! as chain-level representatives; equality and the triangle comparisons
//! are decided on cohomology.

mod coho;
mod cone;
mod objects;
mod roof;
mod structure;
pub mod verify;

pub use coho::{cohomology_dims, harmonic_dims, realize, realize_with, CohoMap, Dims};
pub use roof::{
    class_of_iso, compose_roofs, morphisms_equal, morphisms_equal_with, same_complex, sum_inclusion, sum_projection,
    Roof,
};
pub use structure::{
    class_of_coho, class_of_morphism, dual_structure, hom_structures, metric_morphism, parallel_transport,
    structure_distance, structure_map, tensor_structures, torsor_add, HermStructure,
};
pub use cone::{
    class_of_triangle, cone_of_inclusion_to_shift, cone_rotation_classes, herm_cone, herm_cone_via, solve_comparison,
    target_to_cone_of_projection, triangle_class, Comparison, HermCone, HermTriangle, TriangleClass,
};
pub use objects::{
    canonical_coho_matrix, class_of_object_complex, cohomology_complex_class, cohomology_induced_structure,
    cone_comparison, cone_compatibility, cone_of_complexes, pushed_metrics, total_map, ObjectComplex,
};

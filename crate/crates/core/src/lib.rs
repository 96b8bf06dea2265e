//! Cube categories as concrete Boolean vertex maps.
//!
//! Every cubical site is a wide monoidal subcategory of finite powersets
//! `{0,1}ⁿ` and set maps. This crate represents its morphisms as explicit
//! vertex tables and checks the generalized Reedy, strong skeletality and
//! Eilenberg-Zilber structure of the sites by exhaustive computation at
//! bounded dimension, together with the order-theoretic description of the
//! sites with diagonals.

pub mod cube;
pub mod cubeset;
pub mod diagonal;
pub mod error;
pub mod ez;
pub mod order;
pub mod reedy;
pub mod report;
pub mod sites;
pub mod skeletal;
pub mod words;

pub use cube::{classify_map, compose, dependency, tensor, Cube, CubeMap, DependencySets, MapShape};
pub use cubeset::{ez_lemma_suite, ez_uniqueness_check, quotient_fixtures, CubicalSetFile, EzDecomposition, TruncatedCubicalSet};
pub use diagonal::{characterized_homs, dedekind_agreement, dedekind_count, enumerate_maps, find_nonsplit_idempotent, identify_diagonal_site, karoubi_converse, karoubi_images, verify_counterexamples, ImageClass, MapClass};
pub use error::{Error, Result};
pub use ez::{ez_category_check, find_absolute_pushout, levelwise_pushout, split_epi_equivalences_check, PushoutCertificate};
pub use order::{downset_lattice, FinLattice, FinPoset};
pub use reedy::{classify, plus_monomorphism_check, verify_idempotents_split, verify_reedy_axioms, factorize, find_section, Factorization, MorphismClass};
pub use report::{Check, Report, Status, Witness};
pub use sites::{enumerate_generated, GeneratorClass, enumerate_homs, is_member, iso_group, Connections, HomSet, HomSource, Homs, Site, SiteConfig};
pub use skeletal::{dependency_partition, is_pseudo_equal, pseudo_sections, strong_skeletality_check, DependencyPartition};
pub use words::{evaluate, generators_between, parse, ConnKind, GeneratorAtom, GeneratorWord};

//! Exact computation in self-similar groups acting on rooted trees: words,
//! sections and the word problem, finite level quotients, stabilizers and
//! rigid stabilizers, and finite-stage approximations of weakly maximal
//! subgroups with machine-checkable certificates.

pub mod budget;
mod decimal;
pub mod certificate;
pub mod construction;
pub mod element;
pub mod error;
pub mod perm;
pub mod preset;
pub mod quotient;
pub mod rist;
pub mod schreier;
pub mod search;
pub mod subgroup;
pub mod tree;
pub mod word;

pub use budget::Budgets;
pub use certificate::{build_certificate, validate_certificate, AvoidSpec, CertificateReport, WmCertificate};
pub use element::{ElementOrder, Portrait};
pub use error::{Error, Result};
pub use perm::Perm;
pub use preset::{
    builtin_preset, ggs_preset, grigorchuk_preset, gupta_sidki_preset, regular_branch_vector_check,
    second_grigorchuk_preset, validate_preset, Preset, PresetDef,
};
pub use tree::Vertex;
pub use word::Word;

//! Word problem, confluence checks and free-subgroup certificates for
//! multiple HNN-extensions of free groups by basis-conjugating embeddings,
//! with the pure-braid semidirect layer `G_n ⋊ ⟨t⟩`.

pub mod braid;
pub mod pingpong;
pub mod presentation;
pub mod rewrite;
pub mod syntax;
pub mod words;

pub use braid::{SemidirectElement, SemidirectExtension};
pub use pingpong::{Certificate, HnnGroup, OracleBounds, OracleReport, SubgroupSpec, SupportMode, Verdict};
pub use presentation::{gn, p2, Association, HnnPresentation, RewriteRule, RuleKind};
pub use rewrite::{NuVector, RuleSet};
pub use syntax::{parse_presentation, preset, Alphabet, LoadedPresentation};
pub use words::{GeneratorClass, GeneratorId, GeneratorMap, Letter, Sign, Word};

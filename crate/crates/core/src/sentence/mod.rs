//! The first-order fragment: local formulas over ball offsets, basic local
//! sentences and their boolean combinations.

mod analysis;
mod ast;
mod parser;

pub use analysis::{
    decompose, distance_constraint_holds, embed_pattern, embedding_centers, embedding_radius,
    index, index_report, satisfying_keys, CompiledFormula, CompleteDescription, Index,
    IndexReport, DEFAULT_ENUMERATION_CAP,
};
pub use ast::{BasicLocalSentence, Formula, LocalFormula, Sentence};
pub use parser::{parse_formula, parse_sentence};

//! Context assembly, trend inference and narrative generation.

pub mod context;
pub mod external;
pub mod rule;
pub mod trends;

pub use context::{assemble_context, check_history, ContextMeta, ContextSequence, INSTRUCTION, INSTRUCTION_VERSION, MAX_CONTEXT};
pub use external::{build_prompt, refine_batch, refine_external, PROMPT_VERSION};
pub use rule::{narrate_rule, region_of, region_phrase, Lobe, Narrative, NarrativeSource, Side};
pub use trends::{classify, infer_trends, infer_trends_with, Trend, TrendConfig, TrendLabel};

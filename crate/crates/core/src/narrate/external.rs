//! Refinement through an external chat endpoint, falling back to the rule
//! narrator when the endpoint cannot be reached.

use crate::error::{Error, Result};
use crate::features::{Band, FeatureTemplate};
use crate::http::{post_chat, run_bounded, EndpointConfig};
use crate::narrate::context::ContextMeta;
use crate::narrate::rule::{narrate_rule, Narrative, NarrativeSource};
use crate::narrate::trends::TrendLabel;

pub const PROMPT_VERSION: &str = "refine-prompt-v1";

const SYSTEM_PROMPT: &str = "You are a clinical neurophysiologist. Rewrite structured EEG feature templates into fluent, factual narratives. Keep every number-backed claim consistent with the template, name the dominant frequency band and the highest-energy channel, describe each band's trend relative to the preceding segments, and localize energy to scalp regions. Do not invent findings.";

/// The user message: instruction, rendered template, trend labels and a
/// summary of the preceding segments' band powers.
pub fn build_prompt(tpl: &FeatureTemplate, trends: &TrendLabel, ctx: &ContextMeta) -> String {
    let mut s = format!("{}\n\nStructured template:\n{}\n\nTrends relative to the preceding {} segment(s):\n", ctx.instruction, tpl.rendered, ctx.context_n);
    for b in Band::ALL {
        s.push_str(&format!("- {}: {}\n", b.name(), trends.get(b).name()));
    }
    s.push_str("\nPreceding segments (oldest first):\n");
    for (t, bp) in ctx.history_t_indices.iter().zip(&ctx.history_band_powers) {
        let parts: Vec<String> = Band::ALL.iter().map(|&b| format!("{} {:.4}", b.name(), bp.get(b))).collect();
        s.push_str(&format!("- segment {t}: {} μV²\n", parts.join(", ")));
    }
    s
}

pub fn refine_external(
    tpl: &FeatureTemplate,
    trends: &TrendLabel,
    ctx: &ContextMeta,
    endpoint: &EndpointConfig,
) -> Result<Narrative> {
    match post_chat(endpoint, SYSTEM_PROMPT, &build_prompt(tpl, trends, ctx)) {
        Ok(text) if !text.trim().is_empty() => Ok(Narrative {
            text,
            source: NarrativeSource::External,
            context_n: ctx.context_n,
            fallback: false,
        }),
        Ok(_) => Err(Error::Protocol("endpoint returned an empty narrative".into())),
        Err(Error::Transport(msg)) => {
            log::warn!("external narrator unavailable ({msg}); using rule narrator");
            let mut n = narrate_rule(tpl, trends, ctx.context_n);
            n.fallback = true;
            Ok(n)
        }
        Err(e) => Err(e),
    }
}

/// Refines many items with the endpoint's in-flight bound; output order
/// matches input order.
pub fn refine_batch(
    items: &[(FeatureTemplate, TrendLabel, ContextMeta)],
    endpoint: &EndpointConfig,
) -> Vec<Result<Narrative>> {
    run_bounded(items, endpoint.max_in_flight, |(tpl, trends, ctx)| refine_external(tpl, trends, ctx, endpoint))
}

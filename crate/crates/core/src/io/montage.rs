//! Channel-name harmonization.
//!
//! Names are upper-cased, stripped of `EEG ` prefixes and reference
//! suffixes (`-REF`, `-LE`, ...), and the 10-10 temporal names are folded
//! onto the legacy 10-20 ones (T7→T3, T8→T4, P7→T5, P8→T6). Channels that
//! are not in the electrode layout are flagged, never dropped.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::io::Recording;
use crate::topomap::ElectrodeLayout;

const REFERENCE_SUFFIXES: &[&str] = &["REF", "LE", "RE", "AR", "AVG", "A1", "A2", "M1", "M2", "A1A2"];

const ALIASES: &[(&str, &str)] = &[("T7", "T3"), ("T8", "T4"), ("P7", "T5"), ("P8", "T6")];

pub fn normalize_channel_name(raw: &str) -> String {
    let mut name = raw.trim().to_uppercase();

    if let Some(rest) = name.strip_prefix("EEG") {
        if rest.starts_with(|c: char| !c.is_ascii_alphanumeric()) {
            name = rest
                .trim_start_matches(|c: char| !c.is_ascii_alphanumeric())
                .to_string();
        }
    }

    if let Some((head, tail)) = name.split_once('-') {
        if REFERENCE_SUFFIXES.contains(&tail.trim()) {
            name = head.to_string();
        }
    }

    let mut name: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    while name.ends_with('.') {
        name.pop();
    }

    match ALIASES.iter().find(|(from, _)| *from == name) {
        Some((_, to)) => to.to_string(),
        None => name,
    }
}

/// Harmonizes every channel name of `rec`. Fails if two channels collapse
/// onto the same name.
pub fn normalize_channel_names(rec: Recording) -> Result<Recording> {
    let layout = ElectrodeLayout::standard();
    let (channels, fs, data, meta, _) = rec.into_parts();

    let names: Vec<String> = channels.iter().map(|c| normalize_channel_name(c)).collect();
    let mut seen = HashSet::new();
    for (orig, name) in channels.iter().zip(&names) {
        if !seen.insert(name.clone()) {
            return Err(Error::Montage(format!(
                "channel {orig:?} collides with another channel after normalization to {name}"
            )));
        }
    }

    let flagged = names
        .iter()
        .filter(|n| !layout.contains(n))
        .cloned()
        .collect();
    let mut out = Recording::new(names, fs, data, meta)?;
    out.flagged = flagged;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::SubjectMeta;

    fn rec(names: &[&str]) -> Recording {
        Recording::new(
            names.iter().map(|s| s.to_string()).collect(),
            200.0,
            vec![vec![0.0; 4]; names.len()],
            SubjectMeta::default(),
        )
        .unwrap()
    }

    #[test]
    fn strips_prefix_and_reference() {
        assert_eq!(normalize_channel_name("EEG FP1-REF"), "FP1");
        assert_eq!(normalize_channel_name("EEG C4-LE"), "C4");
        assert_eq!(normalize_channel_name("Fc5."), "FC5");
        assert_eq!(normalize_channel_name(" fz "), "FZ");
    }

    #[test]
    fn temporal_aliases() {
        assert_eq!(normalize_channel_name("T7"), "T3");
        assert_eq!(normalize_channel_name("T8"), "T4");
        assert_eq!(normalize_channel_name("P7"), "T5");
        assert_eq!(normalize_channel_name("EEG P8-REF"), "T6");
    }

    #[test]
    fn bipolar_derivations_are_kept() {
        assert_eq!(normalize_channel_name("FP1-F7"), "FP1-F7");
    }

    #[test]
    fn collision_is_montage_error() {
        let r = rec(&["Fp1", "EEG FP1-LE"]);
        assert!(matches!(normalize_channel_names(r), Err(Error::Montage(_))));
    }

    #[test]
    fn unknown_channels_flagged_not_dropped() {
        let r = normalize_channel_names(rec(&["EEG C3-REF", "EKG", "T7"])).unwrap();
        assert_eq!(r.channels(), &["C3", "EKG", "T3"]);
        assert_eq!(r.flagged, vec!["EKG".to_string()]);
    }

    #[test]
    fn idempotent() {
        let once = normalize_channel_names(rec(&["EEG FP1-REF", "t8", "Cz.", "ECG"])).unwrap();
        let twice = normalize_channel_names(once.clone()).unwrap();
        assert_eq!(once, twice);
    }
}

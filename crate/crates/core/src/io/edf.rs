//! EDF reader (continuous recordings) and a matching writer.
//!
//! Layout: a 256-byte fixed header, `ns × 256` bytes of per-signal header
//! fields stored column-wise, then data records holding each signal's
//! samples as 2-byte little-endian integers.

use crate::error::{Error, Result};
use crate::io::{EventLabel, Recording, SubjectMeta};

const FIXED_HEADER: usize = 256;
const SIGNAL_HEADER: usize = 256;
const ANNOTATION_LABEL: &str = "EDF Annotations";

// (width) of each per-signal field, in file order.
const SIGNAL_FIELDS: [usize; 10] = [16, 80, 8, 8, 8, 8, 8, 80, 8, 32];

#[derive(Debug, Clone)]
struct SignalHeader {
    label: String,
    phys_dim: String,
    phys_min: f64,
    phys_max: f64,
    dig_min: i32,
    dig_max: i32,
    samples_per_record: usize,
}

impl SignalHeader {
    fn is_annotation(&self) -> bool {
        self.label.trim() == ANNOTATION_LABEL
    }

    /// Multiplier from the declared physical unit to microvolts.
    fn unit_scale(&self) -> f64 {
        let unit = self.phys_dim.trim().to_lowercase();
        match unit.as_str() {
            "mv" => 1e3,
            "v" => 1e6,
            "nv" => 1e-3,
            _ => 1.0,
        }
    }
}

fn ascii_field(bytes: &[u8], offset: usize, len: usize) -> Result<&str> {
    let end = offset
        .checked_add(len)
        .ok_or_else(|| Error::parse(offset as u64, "field offset overflow"))?;
    let slice = bytes
        .get(offset..end)
        .ok_or_else(|| Error::parse(offset as u64, "header truncated"))?;
    if !slice.iter().all(|b| (0x20..0x7f).contains(b) || *b == 0) {
        // Latin-1 'µ' (0xB5) shows up in physical-dimension fields.
        if !slice.iter().all(|b| *b >= 0x20 || *b == 0) {
            return Err(Error::parse(offset as u64, "non-printable byte in header"));
        }
        return Ok("");
    }
    std::str::from_utf8(slice)
        .map(|s| s.trim_end_matches('\0'))
        .map_err(|_| Error::parse(offset as u64, "header field is not ASCII"))
}

fn parse_f64(bytes: &[u8], offset: usize, len: usize) -> Result<f64> {
    let s = ascii_field(bytes, offset, len)?.trim();
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(offset as u64, format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(offset as u64, format!("non-finite number {s:?}")));
    }
    Ok(v)
}

fn parse_int(bytes: &[u8], offset: usize, len: usize) -> Result<i64> {
    let s = ascii_field(bytes, offset, len)?.trim();
    s.parse()
        .map_err(|_| Error::parse(offset as u64, format!("invalid integer {s:?}")))
}

/// Parses an EDF byte stream into a [`Recording`] in microvolts.
///
/// Annotation signals are removed from the data; their time-stamped
/// annotation lists become `meta.event_labels`.
pub fn parse_edf(bytes: &[u8]) -> Result<Recording> {
    if bytes.len() < FIXED_HEADER {
        return Err(Error::parse(bytes.len() as u64, "file shorter than the fixed header"));
    }
    let version = ascii_field(bytes, 0, 8)?;
    if version.trim() != "0" {
        return Err(Error::parse(0, format!("unexpected version field {version:?}")));
    }
    let patient = ascii_field(bytes, 8, 80)?.trim().to_string();
    let reserved = ascii_field(bytes, 192, 44)?.trim().to_string();
    if reserved.starts_with("EDF+D") {
        return Err(Error::Unsupported("discontinuous EDF+ recordings".into()));
    }
    let header_bytes = parse_int(bytes, 184, 8)?;
    let n_records_field = parse_int(bytes, 236, 8)?;
    let record_duration = parse_f64(bytes, 244, 8)?;
    let ns = parse_int(bytes, 252, 4)?;

    if ns <= 0 {
        return Err(Error::parse(252, format!("signal count {ns} must be positive")));
    }
    let ns = ns as usize;
    let expected_header = FIXED_HEADER + ns * SIGNAL_HEADER;
    if header_bytes != expected_header as i64 {
        return Err(Error::parse(
            184,
            format!("header size {header_bytes} does not match {ns} signals ({expected_header})"),
        ));
    }
    if bytes.len() < expected_header {
        return Err(Error::parse(bytes.len() as u64, "signal headers truncated"));
    }
    if record_duration <= 0.0 {
        return Err(Error::parse(244, format!("record duration {record_duration} must be positive")));
    }

    let mut field_offsets = [0usize; 10];
    let mut acc = FIXED_HEADER;
    for (i, w) in SIGNAL_FIELDS.iter().enumerate() {
        field_offsets[i] = acc;
        acc += w * ns;
    }
    let field = |f: usize, s: usize| field_offsets[f] + s * SIGNAL_FIELDS[f];

    let mut signals = Vec::with_capacity(ns);
    for s in 0..ns {
        let label = ascii_field(bytes, field(0, s), 16)?.trim().to_string();
        let phys_dim = ascii_field(bytes, field(2, s), 8)?.trim().to_string();
        let phys_min = parse_f64(bytes, field(3, s), 8)?;
        let phys_max = parse_f64(bytes, field(4, s), 8)?;
        let dig_min = parse_int(bytes, field(5, s), 8)?;
        let dig_max = parse_int(bytes, field(6, s), 8)?;
        let spr = parse_int(bytes, field(8, s), 8)?;
        if !(i16::MIN as i64..=i16::MAX as i64).contains(&dig_min)
            || !(i16::MIN as i64..=i16::MAX as i64).contains(&dig_max)
            || dig_min >= dig_max
        {
            return Err(Error::parse(
                field(5, s) as u64,
                format!("invalid digital range [{dig_min}, {dig_max}] for signal {label:?}"),
            ));
        }
        if phys_min == phys_max {
            return Err(Error::parse(
                field(3, s) as u64,
                format!("empty physical range for signal {label:?}"),
            ));
        }
        if spr <= 0 || spr > 1 << 24 {
            return Err(Error::parse(
                field(8, s) as u64,
                format!("invalid samples per record {spr} for signal {label:?}"),
            ));
        }
        signals.push(SignalHeader {
            label,
            phys_dim,
            phys_min,
            phys_max,
            dig_min: dig_min as i32,
            dig_max: dig_max as i32,
            samples_per_record: spr as usize,
        });
    }

    let record_samples: usize = signals.iter().map(|s| s.samples_per_record).sum();
    let record_bytes = record_samples
        .checked_mul(2)
        .ok_or_else(|| Error::parse(0, "record size overflow"))?;
    let available = bytes.len() - expected_header;
    let n_records = if n_records_field == -1 {
        available / record_bytes
    } else if n_records_field < 0 {
        return Err(Error::parse(236, format!("invalid record count {n_records_field}")));
    } else {
        n_records_field as usize
    };
    let needed = n_records
        .checked_mul(record_bytes)
        .ok_or_else(|| Error::parse(236, "data size overflow"))?;
    if available < needed {
        return Err(Error::parse(
            bytes.len() as u64,
            format!("data truncated: {n_records} records need {needed} bytes, {available} present"),
        ));
    }

    let eeg: Vec<usize> = (0..ns).filter(|&s| !signals[s].is_annotation()).collect();
    if eeg.is_empty() {
        return Err(Error::Unsupported("no data signals in file".into()));
    }
    let spr = signals[eeg[0]].samples_per_record;
    if let Some(&bad) = eeg.iter().find(|&&s| signals[s].samples_per_record != spr) {
        return Err(Error::Unsupported(format!(
            "mixed sampling rates: {} has {} samples/record, {} has {}",
            signals[eeg[0]].label, spr, signals[bad].label, signals[bad].samples_per_record
        )));
    }
    let fs = spr as f64 / record_duration;

    let mut data: Vec<Vec<f64>> = eeg
        .iter()
        .map(|_| Vec::with_capacity(n_records * spr))
        .collect();
    let mut events = Vec::new();
    let gains: Vec<(f64, f64)> = signals
        .iter()
        .map(|h| {
            let gain = (h.phys_max - h.phys_min) / (h.dig_max - h.dig_min) as f64;
            (gain, h.unit_scale())
        })
        .collect();

    let mut pos = expected_header;
    for _ in 0..n_records {
        let mut out_row = 0;
        for (s, h) in signals.iter().enumerate() {
            let n = h.samples_per_record;
            let chunk = &bytes[pos..pos + 2 * n];
            if h.is_annotation() {
                parse_tals(chunk, pos, &mut events)?;
            } else {
                let (gain, scale) = gains[s];
                let row = &mut data[out_row];
                for pair in chunk.chunks_exact(2) {
                    let d = i16::from_le_bytes([pair[0], pair[1]]) as i32;
                    let phys = if d == h.dig_min {
                        h.phys_min
                    } else {
                        h.phys_min + (d - h.dig_min) as f64 * gain
                    };
                    row.push(phys * scale);
                }
                out_row += 1;
            }
            pos += 2 * n;
        }
    }

    let channels = eeg.iter().map(|&s| signals[s].label.clone()).collect();
    let meta = SubjectMeta {
        subject_id: patient.split_whitespace().next().unwrap_or("").to_string(),
        event_labels: events,
        ..Default::default()
    };
    Recording::new(channels, fs, data, meta).map_err(|e| match e {
        Error::Invalid(msg) => Error::parse(expected_header as u64, msg),
        other => other,
    })
}

/// Time-stamped annotation lists: `+onset[\x15duration]\x14label\x14...\x00`.
fn parse_tals(chunk: &[u8], base: usize, events: &mut Vec<EventLabel>) -> Result<()> {
    let mut start = 0;
    for tal in chunk.split(|b| *b == 0) {
        let offset = base + start;
        start += tal.len() + 1;
        if tal.is_empty() {
            continue;
        }
        let mut parts = tal.split(|b| *b == 0x14);
        let stamp = parts.next().unwrap_or_default();
        let mut stamp_parts = stamp.split(|b| *b == 0x15);
        let onset_bytes = stamp_parts.next().unwrap_or_default();
        let parse_num = |b: &[u8]| -> Result<f64> {
            std::str::from_utf8(b)
                .ok()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(offset as u64, "malformed annotation timestamp"))
        };
        let onset = parse_num(onset_bytes)?;
        let duration = match stamp_parts.next() {
            Some(b) if !b.is_empty() => parse_num(b)?,
            _ => 0.0,
        };
        for label in parts {
            let text = String::from_utf8_lossy(label).trim().to_string();
            if text.is_empty() {
                continue;
            }
            if onset < 0.0 || duration < 0.0 {
                return Err(Error::parse(offset as u64, "negative annotation onset or duration"));
            }
            events.push(EventLabel { onset, duration, label: text });
        }
    }
    Ok(())
}

/// One signal for [`write_edf`]; `data` holds physical values.
#[derive(Debug, Clone)]
pub struct EdfSignalSpec {
    pub label: String,
    pub phys_dim: String,
    pub phys_min: f64,
    pub phys_max: f64,
    pub dig_min: i16,
    pub dig_max: i16,
    pub samples_per_record: usize,
    pub data: Vec<f64>,
}

fn put_field(buf: &mut Vec<u8>, text: &str, width: usize) -> Result<()> {
    if text.len() > width || !text.is_ascii() {
        return Err(Error::Invalid(format!("{text:?} does not fit an EDF field of {width}")));
    }
    buf.extend_from_slice(text.as_bytes());
    buf.extend(std::iter::repeat(b' ').take(width - text.len()));
    Ok(())
}

/// Shortest decimal rendering of `v` that fits in `width` characters.
fn fit_number(v: f64, width: usize) -> Result<String> {
    let plain = format!("{v}");
    if plain.len() <= width {
        return Ok(plain);
    }
    for decimals in (0..width).rev() {
        let s = format!("{v:.decimals$}");
        if s.len() <= width {
            return Ok(s);
        }
    }
    Err(Error::Invalid(format!("{v} does not fit an EDF field of {width}")))
}

/// Writes a continuous EDF file. The number of records is taken from the
/// first signal; every signal must hold exactly `n_records × samples_per_record`
/// values.
pub fn write_edf(
    patient: &str,
    record_duration: f64,
    signals: &[EdfSignalSpec],
) -> Result<Vec<u8>> {
    let first = signals
        .first()
        .ok_or_else(|| Error::Invalid("no signals to write".into()))?;
    let n_records = first.data.len() / first.samples_per_record;
    for s in signals {
        if s.data.len() != n_records * s.samples_per_record {
            return Err(Error::Invalid(format!(
                "signal {} holds {} samples, expected {}",
                s.label,
                s.data.len(),
                n_records * s.samples_per_record
            )));
        }
    }
    let ns = signals.len();
    let header_bytes = FIXED_HEADER + ns * SIGNAL_HEADER;

    let mut buf = Vec::with_capacity(header_bytes + n_records * 2 * signals.iter().map(|s| s.samples_per_record).sum::<usize>());
    put_field(&mut buf, "0", 8)?;
    put_field(&mut buf, patient, 80)?;
    put_field(&mut buf, "Startdate X X X X", 80)?;
    put_field(&mut buf, "01.01.00", 8)?;
    put_field(&mut buf, "00.00.00", 8)?;
    put_field(&mut buf, &header_bytes.to_string(), 8)?;
    put_field(&mut buf, "", 44)?;
    put_field(&mut buf, &n_records.to_string(), 8)?;
    put_field(&mut buf, &fit_number(record_duration, 8)?, 8)?;
    put_field(&mut buf, &ns.to_string(), 4)?;

    for s in signals {
        put_field(&mut buf, &s.label, 16)?;
    }
    for _ in signals {
        put_field(&mut buf, "AgAgCl electrode", 80)?;
    }
    for s in signals {
        put_field(&mut buf, &s.phys_dim, 8)?;
    }
    for s in signals {
        put_field(&mut buf, &fit_number(s.phys_min, 8)?, 8)?;
    }
    for s in signals {
        put_field(&mut buf, &fit_number(s.phys_max, 8)?, 8)?;
    }
    for s in signals {
        put_field(&mut buf, &s.dig_min.to_string(), 8)?;
    }
    for s in signals {
        put_field(&mut buf, &s.dig_max.to_string(), 8)?;
    }
    for _ in signals {
        put_field(&mut buf, "", 80)?;
    }
    for s in signals {
        put_field(&mut buf, &s.samples_per_record.to_string(), 8)?;
    }
    for _ in signals {
        put_field(&mut buf, "", 32)?;
    }

    // Quantize against the ranges as they were written to the header, so the
    // reader's linear map is the exact inverse.
    let ranges: Vec<(f64, f64)> = signals
        .iter()
        .map(|s| {
            let lo: f64 = fit_number(s.phys_min, 8)?.parse().unwrap_or(s.phys_min);
            let hi: f64 = fit_number(s.phys_max, 8)?.parse().unwrap_or(s.phys_max);
            Ok((lo, hi))
        })
        .collect::<Result<_>>()?;

    for r in 0..n_records {
        for (s, &(pmin, pmax)) in signals.iter().zip(&ranges) {
            let n = s.samples_per_record;
            let scale = (s.dig_max as f64 - s.dig_min as f64) / (pmax - pmin);
            for &v in &s.data[r * n..(r + 1) * n] {
                let d = ((v - pmin) * scale + s.dig_min as f64)
                    .round()
                    .clamp(s.dig_min as f64, s.dig_max as f64) as i16;
                buf.extend_from_slice(&d.to_le_bytes());
            }
        }
    }
    Ok(buf)
}

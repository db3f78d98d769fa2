//! Text specs for two-mode input states.
//!
//! * `coherent:a1_re,a1_im,a2_re,a2_im`: product coherent state
//! * `noon:N`: `(|N,0⟩ + i|0,N⟩)/√2`
//! * `fock-list: n1,n2=re,im; n1,n2=re,im; ...`: explicit amplitudes, which
//!   must already be normalized to within 1e-6

use num_complex::Complex64 as C64;
use qcoupler_core::state::{coherent_cutoff, noon, FockState, StateError, NOON_CUTOFF};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("fock-list amplitudes have norm² {norm}, expected 1 within 1e-6")]
    Normalization { norm: f64 },
    #[error(transparent)]
    State(#[from] StateError),
}

fn perr(position: usize, message: impl Into<String>) -> SpecError {
    SpecError::Parse { position, message: message.into() }
}

// split on `sep`, yielding (offset of the trimmed piece, trimmed piece)
fn pieces(text: &str, offset: usize, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in text.split(sep) {
        let lead = part.len() - part.trim_start().len();
        out.push((offset + start + lead, part.trim()));
        start += part.len() + sep.len_utf8();
    }
    out
}

fn number<T: std::str::FromStr>(pos: usize, s: &str) -> Result<T, SpecError> {
    s.parse().map_err(|_| perr(pos, format!("expected a number, found {s:?}")))
}

fn floats(pos: usize, text: &str, n: usize) -> Result<Vec<f64>, SpecError> {
    let parts = pieces(text, pos, ',');
    if parts.len() != n {
        return Err(perr(pos, format!("expected {n} comma-separated values, found {}", parts.len())));
    }
    parts.into_iter().map(|(p, s)| number::<f64>(p, s)).collect()
}

pub fn parse_state_spec(text: &str) -> Result<FockState, SpecError> {
    let Some(colon) = text.find(':') else {
        return Err(perr(0, "expected `family:` prefix (coherent, noon or fock-list)"));
    };
    let family = text[..colon].trim();
    let body = &text[colon + 1..];
    let at = colon + 1;
    match family {
        "coherent" => {
            let v = floats(at, body, 4)?;
            let (a1, a2) = (C64::new(v[0], v[1]), C64::new(v[2], v[3]));
            let cutoff = coherent_cutoff(a1.norm().max(a2.norm()));
            Ok(FockState::coherent_product(&[a1, a2], cutoff)?)
        }
        "noon" => {
            let lead = body.len() - body.trim_start().len();
            let n: usize = number(at + lead, body.trim())?;
            if n == 0 {
                return Err(perr(at + lead, "noon order must be positive"));
            }
            Ok(noon(n, NOON_CUTOFF.max(n))?)
        }
        "fock-list" => {
            let mut entries = Vec::new();
            for (pos, item) in pieces(body, at, ';') {
                if item.is_empty() {
                    continue;
                }
                let Some(eq) = item.find('=') else {
                    return Err(perr(pos, "expected `n1,n2=re,im`"));
                };
                let occ = pieces(&item[..eq], pos, ',');
                if occ.len() != 2 {
                    return Err(perr(pos, "expected two occupation numbers"));
                }
                let occ: Vec<usize> = occ.into_iter().map(|(p, s)| number(p, s)).collect::<Result<_, _>>()?;
                let amp = floats(pos + eq + 1, &item[eq + 1..], 2)?;
                entries.push((occ, C64::new(amp[0], amp[1])));
            }
            if entries.is_empty() {
                return Err(perr(at, "fock-list needs at least one entry"));
            }
            let norm: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(SpecError::Normalization { norm });
            }
            let cutoff = entries.iter().map(|(o, _)| o[0] + o[1]).max().unwrap_or(0).max(1);
            Ok(FockState::from_fock_list(2, cutoff, &entries)?.normalized()?)
        }
        other => Err(perr(0, format!("unknown state family {other:?}"))),
    }
}

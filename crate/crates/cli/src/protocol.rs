//! The transmission/comparison protocol: experiment outcomes are physical
//! symbol strings tied to a site; comparing two outcomes means transmitting
//! both to a common site, interpreting each as a number there, and comparing
//! within that one structure. Transmission preserves the symbols exactly and
//! ignores the theta field entirely.

use scalegauge_core::{Error as CoreError, Lattice, LocalNumber, Result as CoreResult, SiteId};

/// A physical outcome: a numeral string on a screen or page, located at a
/// site. The symbols are a decimal digit string with optional sign and
/// point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeState {
    pub site: SiteId,
    pub symbols: String,
}

impl OutcomeState {
    pub fn new(site: SiteId, symbols: impl Into<String>) -> Self {
        Self { site, symbols: symbols.into() }
    }
}

fn valid_numeral(s: &str) -> bool {
    let rest = s.strip_prefix(['+', '-']).unwrap_or(s);
    if rest.is_empty() {
        return false;
    }
    let mut digits = 0usize;
    let mut points = 0usize;
    for ch in rest.chars() {
        match ch {
            '0'..='9' => digits += 1,
            '.' => points += 1,
            _ => return false,
        }
    }
    digits >= 1 && points <= 1
}

/// The interpretation map: read the numeral as the number it denotes in the
/// structure at the outcome's site.
pub fn interpret(o: &OutcomeState) -> CoreResult<LocalNumber> {
    if !valid_numeral(&o.symbols) {
        return Err(CoreError::Format { symbols: o.symbols.clone() });
    }
    let value: f64 = o
        .symbols
        .parse()
        .map_err(|_| CoreError::Format { symbols: o.symbols.clone() })?;
    if !value.is_finite() {
        return Err(CoreError::Format { symbols: o.symbols.clone() });
    }
    // normalize -0 to 0
    Ok(LocalNumber::real(o.site.clone(), value + 0.0))
}

/// Physical transmission: the identical symbol string, retagged at the
/// destination. Theta plays no role.
pub fn transmit(lattice: &Lattice, o: &OutcomeState, to: &SiteId) -> CoreResult<OutcomeState> {
    lattice.check_site(&o.site)?;
    lattice.check_site(to)?;
    Ok(OutcomeState::new(to.clone(), o.symbols.clone()))
}

/// Transmit both outcomes to `at`, interpret them there, and compare the
/// numeric values exactly.
pub fn compare_outcomes(
    lattice: &Lattice,
    a: &OutcomeState,
    b: &OutcomeState,
    at: &SiteId,
) -> CoreResult<bool> {
    let a_here = interpret(&transmit(lattice, a, at)?)?;
    let b_here = interpret(&transmit(lattice, b, at)?)?;
    Ok(a_here.value == b_here.value)
}

//! Multi-symbol range coder with byte-wise renormalization.
//!
//! State is a 64-bit `range` kept at or above 2^56 and a `low` register
//! with a carry bit above it; carries ripple into already produced bytes
//! through the usual cache/pending-`0xFF` scheme. Frequency totals stay at
//! or below 2^32, so `range / total` keeps at least 24 bits of precision
//! and truncation costs well under 1e-6 bits per symbol.
//!
//! The encoder finishes by picking the code value in `[low, low + range)`
//! with the most trailing zero bytes and drops those bytes; the decoder
//! reads zeros past the end of its input, at most [`MAX_PAD`] of them.

use super::CodingError;

const TOP: u64 = 1 << 56;
const LOW_MASK: u128 = (1u128 << 64) - 1;

/// Largest number of implicit trailing zero bytes a decoder may consume.
pub const MAX_PAD: usize = 8;

/// Adaptive models start every count at this value.
pub const ADAPTIVE_INITIAL: u64 = 1;
/// Added to a symbol's count after it is coded.
pub const ADAPTIVE_INCREMENT: u64 = 32;
/// Counts are halved (floor 1) once their total exceeds this.
pub const ADAPTIVE_LIMIT: u64 = 1 << 16;
/// Static probabilities are quantized to integer frequencies with this total.
pub const STATIC_TOTAL: u64 = 1 << 32;

/// Description of a symbol model; encoder and decoder each build their own
/// state from it.
#[derive(Clone, Debug, PartialEq)]
pub enum FrequencyModel {
    Adaptive { alphabet: usize },
    Static { probs: Vec<f64> },
}

impl FrequencyModel {
    pub fn adaptive(alphabet: usize) -> Self {
        FrequencyModel::Adaptive { alphabet }
    }

    pub fn fixed(probs: Vec<f64>) -> Self {
        FrequencyModel::Static { probs }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            FrequencyModel::Adaptive { alphabet } => *alphabet,
            FrequencyModel::Static { probs } => probs.len(),
        }
    }

    fn state(&self) -> Result<ModelState, CodingError> {
        let invalid = |why: &str| Err(CodingError::InvalidModel(why.to_string()));
        match self {
            FrequencyModel::Adaptive { alphabet } => {
                if *alphabet < 2 {
                    return invalid("alphabet must hold at least two symbols");
                }
                Ok(ModelState::new(vec![ADAPTIVE_INITIAL; *alphabet], true))
            }
            FrequencyModel::Static { probs } => {
                if probs.len() < 2 {
                    return invalid("alphabet must hold at least two symbols");
                }
                if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                    return invalid("probabilities must lie in (0, 1]");
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return invalid("probabilities must sum to 1");
                }
                Ok(ModelState::new(quantize(probs), false))
            }
        }
    }
}

/// Integer frequencies summing to [`STATIC_TOTAL`], every one at least 1.
fn quantize(probs: &[f64]) -> Vec<u64> {
    let mut freq: Vec<u64> = probs
        .iter()
        .map(|&p| ((p * STATIC_TOTAL as f64).round() as u64).max(1))
        .collect();
    let sum: u64 = freq.iter().sum();
    let (big, _) = freq
        .iter()
        .enumerate()
        .max_by_key(|&(i, &f)| (f, std::cmp::Reverse(i)))
        .expect("non-empty");
    // The largest entry holds at least total / len, far more than any
    // rounding drift, so it stays positive.
    freq[big] = (freq[big] + STATIC_TOTAL) - sum;
    freq
}

#[derive(Clone, Debug)]
struct ModelState {
    freq: Vec<u64>,
    total: u64,
    adaptive: bool,
}

impl ModelState {
    fn new(freq: Vec<u64>, adaptive: bool) -> Self {
        let total = freq.iter().sum();
        ModelState {
            freq,
            total,
            adaptive,
        }
    }

    fn interval(&self, sym: usize) -> (u64, u64) {
        let cum = self.freq[..sym].iter().sum();
        (cum, self.freq[sym])
    }

    /// Symbol whose interval holds `target`, with its interval.
    fn lookup(&self, target: u64) -> (usize, u64, u64) {
        let mut cum = 0;
        for (s, &f) in self.freq.iter().enumerate() {
            if target < cum + f {
                return (s, cum, f);
            }
            cum += f;
        }
        unreachable!("target below total")
    }

    fn update(&mut self, sym: usize) {
        if !self.adaptive {
            return;
        }
        self.freq[sym] += ADAPTIVE_INCREMENT;
        self.total += ADAPTIVE_INCREMENT;
        if self.total > ADAPTIVE_LIMIT {
            for f in &mut self.freq {
                *f = (*f / 2).max(1);
            }
            self.total = self.freq.iter().sum();
        }
    }
}

struct Encoder {
    low: u128,
    range: u64,
    cache: u8,
    pending: usize,
    /// The first byte to leave the cache is a placeholder and is dropped.
    primed: bool,
    out: Vec<u8>,
}

impl Encoder {
    fn new() -> Self {
        Encoder {
            low: 0,
            range: u64::MAX,
            cache: 0,
            pending: 0,
            primed: false,
            out: Vec::new(),
        }
    }

    fn encode(&mut self, cum: u64, freq: u64, total: u64) {
        let r = self.range / total;
        self.low += u128::from(r * cum);
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        let lo = (self.low & LOW_MASK) as u64;
        let carry = (self.low >> 64) as u8;
        if lo < 0xFF00_0000_0000_0000 || carry != 0 {
            if self.primed {
                self.out.push(self.cache.wrapping_add(carry));
            } else {
                debug_assert_eq!(carry, 0);
                self.primed = true;
            }
            for _ in 0..self.pending {
                self.out.push(0xFFu8.wrapping_add(carry));
            }
            self.pending = 0;
            self.cache = (lo >> 56) as u8;
        } else {
            self.pending += 1;
        }
        self.low = u128::from(lo << 8);
    }

    fn finish(mut self) -> Vec<u8> {
        // Round up to a multiple of TOP; still below low + range.
        self.low = (self.low + u128::from(TOP - 1)) & !u128::from(TOP - 1);
        for _ in 0..9 {
            self.shift_low();
        }
        let floor = self.out.len().saturating_sub(MAX_PAD);
        while self.out.len() > floor && self.out.last() == Some(&0) {
            self.out.pop();
        }
        self.out
    }
}

struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u64,
    range: u64,
}

impl<'a> Decoder<'a> {
    fn new(data: &'a [u8]) -> Result<Self, CodingError> {
        let mut d = Decoder {
            data,
            pos: 0,
            code: 0,
            range: u64::MAX,
        };
        for _ in 0..8 {
            d.code = (d.code << 8) | u64::from(d.next_byte()?);
        }
        Ok(d)
    }

    fn next_byte(&mut self) -> Result<u8, CodingError> {
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        if self.pos > self.data.len() + MAX_PAD {
            return Err(CodingError::TruncatedStream);
        }
        Ok(b)
    }

    fn decode(&mut self, model: &ModelState) -> Result<usize, CodingError> {
        if self.code >= self.range {
            return Err(CodingError::CorruptStream);
        }
        let r = self.range / model.total;
        let target = self.code / r;
        if target >= model.total {
            return Err(CodingError::CorruptStream);
        }
        let (sym, cum, freq) = model.lookup(target);
        self.code -= r * cum;
        self.range = r * freq;
        while self.range < TOP {
            self.code = (self.code << 8) | u64::from(self.next_byte()?);
            self.range <<= 8;
        }
        Ok(sym)
    }
}

/// Range-codes `symbols` under a fresh instance of `model`.
pub fn rc_encode(symbols: &[u32], model: &FrequencyModel) -> Result<Vec<u8>, CodingError> {
    let mut state = model.state()?;
    let mut enc = Encoder::new();
    for (position, &s) in symbols.iter().enumerate() {
        let sym = s as usize;
        if sym >= state.freq.len() {
            return Err(CodingError::SymbolOutOfRange {
                position,
                symbol: s,
                alphabet: state.freq.len(),
            });
        }
        let (cum, freq) = state.interval(sym);
        enc.encode(cum, freq, state.total);
        state.update(sym);
    }
    Ok(enc.finish())
}

/// Decodes `count` symbols produced by [`rc_encode`] with the same model.
pub fn rc_decode(
    bytes: &[u8],
    model: &FrequencyModel,
    count: usize,
) -> Result<Vec<u32>, CodingError> {
    let mut state = model.state()?;
    let mut dec = Decoder::new(bytes)?;
    let mut out = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let sym = dec.decode(&state)?;
        state.update(sym);
        out.push(sym as u32);
    }
    Ok(out)
}

/// `-Σ log2 p(s_i)` under a static model; the information content the
/// coder output is measured against.
pub fn static_information_bits(symbols: &[u32], probs: &[f64]) -> f64 {
    symbols.iter().map(|&s| -probs[s as usize].log2()).sum()
}

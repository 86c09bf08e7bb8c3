//! Prefix-free codes for the positive integers and the bit containers they
//! write into.
//!
//! Bits are packed most-significant-bit first. On the wire a description is
//! one header byte naming the code kind, the bit length as a 4-byte
//! big-endian integer, then the payload bytes with the last byte zero-padded.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A finite bit sequence, packed MSB-first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }

    /// Packed payload; the trailing partial byte is zero-padded.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Decode(format!("{} payload bytes cannot hold exactly {len} bits", bytes.len())));
        }
        if !len.is_multiple_of(8) && bytes[len / 8] & (0xFF >> (len % 8)) != 0 {
            return Err(Error::Decode("nonzero padding bits".into()));
        }
        Ok(Self { bytes: bytes.to_vec(), len })
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(Error::Decode(format!("invalid bit character {c:?}"))),
            }
        }
        Ok(out)
    }
}

pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl BitReader<'_> {
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let b = self.bits.get(self.pos).ok_or_else(|| Error::Decode("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        if width > 64 {
            return Err(Error::Decode(format!("field of {width} bits")));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    /// Counts zeros up to and including the terminating one.
    fn read_zero_run(&mut self, limit: u64) -> Result<u64> {
        let mut zeros = 0u64;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > limit {
                return Err(Error::Decode("run of zeros exceeds any codeword".into()));
            }
        }
        Ok(zeros)
    }
}

/// Shannon code fitted to observed values, with an escape codeword for
/// everything else. Codewords are assigned canonically from the lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalCode {
    /// (value, length, codeword) for every observed value.
    entries: Vec<(u64, u32, u64)>,
    escape: (u32, u64),
    max_len: u32,
    by_value: HashMap<u64, (u32, u64)>,
    by_codeword: HashMap<(u32, u64), Option<u64>>,
}

impl EmpiricalCode {
    fn from_lengths(mut lengths: Vec<(u64, u32)>, escape_len: u32) -> Self {
        // Escape sorts first among equal lengths; value 0 is never a symbol.
        lengths.push((0, escape_len));
        lengths.sort_by_key(|&(v, l)| (l, v));
        let mut code = 0u64;
        let mut prev = lengths[0].1;
        let mut entries = Vec::new();
        let mut escape = (0, 0);
        for &(v, l) in &lengths {
            code <<= l - prev;
            prev = l;
            if v == 0 {
                escape = (l, code);
            } else {
                entries.push((v, l, code));
            }
            code += 1;
        }
        let by_value = entries.iter().map(|&(v, l, c)| (v, (l, c))).collect();
        let mut by_codeword: HashMap<_, _> = entries.iter().map(|&(v, l, c)| ((l, c), Some(v))).collect();
        by_codeword.insert(escape, None);
        Self { entries, escape, max_len: prev, by_value, by_codeword }
    }

    pub fn entries(&self) -> &[(u64, u32, u64)] {
        &self.entries
    }

    pub fn escape_len(&self) -> u32 {
        self.escape.0
    }

    /// Codeword length of `t`, escape plus delta included for unseen values.
    pub fn length_of(&self, t: u64) -> usize {
        match self.by_value.get(&t) {
            Some(&(l, _)) => l as usize,
            None => self.escape.0 as usize + elias_delta_len(t),
        }
    }
}

/// A prefix-free code over the positive integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerCode {
    EliasGamma,
    EliasDelta,
    Golomb { m: u64 },
    Empirical(Box<EmpiricalCode>),
}

impl IntegerCode {
    /// Header byte used by the wire format.
    pub fn tag(&self) -> u8 {
        match self {
            IntegerCode::EliasGamma => 0,
            IntegerCode::EliasDelta => 1,
            IntegerCode::Golomb { .. } => 2,
            IntegerCode::Empirical(_) => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IntegerCode::EliasGamma => "gamma",
            IntegerCode::EliasDelta => "delta",
            IntegerCode::Golomb { .. } => "golomb",
            IntegerCode::Empirical(_) => "empirical",
        }
    }

    /// Codeword length without materializing the codeword.
    pub fn length_of(&self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(Error::Unsupported(0));
        }
        Ok(match self {
            IntegerCode::EliasGamma => 2 * floor_log2(t) as usize + 1,
            IntegerCode::EliasDelta => elias_delta_len(t),
            IntegerCode::Golomb { m } => golomb_len(t - 1, *m),
            IntegerCode::Empirical(c) => c.length_of(t),
        })
    }
}

#[inline]
fn floor_log2(t: u64) -> u32 {
    63 - t.leading_zeros()
}

fn elias_delta_len(t: u64) -> usize {
    let n = floor_log2(t);
    (n + 2 * floor_log2(n as u64 + 1) + 1) as usize
}

/// Bits of the truncated-binary remainder field: `(b, cutoff)` where values
/// below `cutoff` take `b - 1` bits and the rest take `b`.
fn truncated_binary_shape(m: u64) -> (u32, u64) {
    if m <= 1 {
        return (0, 0);
    }
    let b = 64 - (m - 1).leading_zeros();
    let cutoff = if b == 64 { 0u64.wrapping_sub(m) } else { (1u64 << b) - m };
    (b, cutoff)
}

fn golomb_len(n: u64, m: u64) -> usize {
    let (b, cutoff) = truncated_binary_shape(m);
    let r = n % m;
    let rem_bits = if m <= 1 {
        0
    } else if r < cutoff {
        b - 1
    } else {
        b
    };
    (n / m) as usize + 1 + rem_bits as usize
}

fn write_gamma(out: &mut BitString, t: u64) {
    let n = floor_log2(t);
    out.push_bits(0, n);
    out.push_bits(t, n + 1);
}

fn write_delta(out: &mut BitString, t: u64) {
    let n = floor_log2(t);
    write_gamma(out, n as u64 + 1);
    out.push_bits(t, n);
}

fn read_gamma(r: &mut BitReader<'_>) -> Result<u64> {
    let n = r.read_zero_run(63)?;
    Ok((1u64 << n) | r.read_bits(n as u32)?)
}

fn read_delta(r: &mut BitReader<'_>) -> Result<u64> {
    let n = read_gamma(r)? - 1;
    if n > 63 {
        return Err(Error::Decode("delta length field exceeds 64 bits".into()));
    }
    Ok((1u64 << n) | r.read_bits(n as u32)?)
}

/// Appends the codeword for `t` to `out`.
pub fn write_int(code: &IntegerCode, t: u64, out: &mut BitString) -> Result<()> {
    if t == 0 {
        return Err(Error::Unsupported(0));
    }
    match code {
        IntegerCode::EliasGamma => write_gamma(out, t),
        IntegerCode::EliasDelta => write_delta(out, t),
        IntegerCode::Golomb { m } => {
            let m = (*m).max(1);
            let n = t - 1;
            let q = n / m;
            for _ in 0..q {
                out.push(false);
            }
            out.push(true);
            if m > 1 {
                let (b, cutoff) = truncated_binary_shape(m);
                let r = n % m;
                if r < cutoff {
                    out.push_bits(r, b - 1);
                } else {
                    out.push_bits(r.wrapping_add(cutoff), b);
                }
            }
        }
        IntegerCode::Empirical(c) => match c.by_value.get(&t) {
            Some(&(l, cw)) => out.push_bits(cw, l),
            None => {
                out.push_bits(c.escape.1, c.escape.0);
                write_delta(out, t);
            }
        },
    }
    Ok(())
}

pub fn encode_int(code: &IntegerCode, t: u64) -> Result<BitString> {
    let mut out = BitString::new();
    write_int(code, t, &mut out)?;
    Ok(out)
}

/// Reads one codeword from the reader's current position.
pub fn read_int(code: &IntegerCode, r: &mut BitReader<'_>) -> Result<u64> {
    match code {
        IntegerCode::EliasGamma => read_gamma(r),
        IntegerCode::EliasDelta => read_delta(r),
        IntegerCode::Golomb { m } => {
            let m = (*m).max(1);
            let q = r.read_zero_run(u64::MAX / m)?;
            let rem = if m > 1 {
                let (b, cutoff) = truncated_binary_shape(m);
                let hi = r.read_bits(b - 1)?;
                if hi < cutoff {
                    hi
                } else {
                    ((hi << 1) | r.read_bit()? as u64).wrapping_sub(cutoff)
                }
            } else {
                0
            };
            q.checked_mul(m)
                .and_then(|v| v.checked_add(rem))
                .and_then(|v| v.checked_add(1))
                .ok_or_else(|| Error::Decode("golomb value overflows u64".into()))
        }
        IntegerCode::Empirical(c) => {
            let mut cw = 0u64;
            for len in 1..=c.max_len {
                cw = (cw << 1) | r.read_bit()? as u64;
                match c.by_codeword.get(&(len, cw)) {
                    Some(Some(v)) => return Ok(*v),
                    Some(None) => return read_delta(r),
                    None => {}
                }
            }
            Err(Error::Decode("no codeword matches".into()))
        }
    }
}

/// Decodes the codeword at the start of `b`; returns the value and the
/// number of bits consumed.
pub fn decode_int(code: &IntegerCode, b: &BitString) -> Result<(u64, usize)> {
    let mut r = b.reader();
    let t = read_int(code, &mut r)?;
    Ok((t, r.position()))
}

/// Golomb parameter for a geometric law on `{1, 2, …}` with the given
/// success probability: `ceil(ln(2 - p) / -ln(1 - p))`, which minimizes the
/// expected codeword length among all Golomb codes. At `p = 1/2` this is
/// `m = 1` (unary), which is strictly better than `m = 2`.
pub fn golomb_parameter_for_geometric(success_prob: f64) -> u64 {
    if success_prob.is_nan() || success_prob <= 0.0 {
        return u64::MAX;
    }
    if success_prob >= 1.0 {
        return 1;
    }
    let m = ((2.0 - success_prob).ln() / -(-success_prob).ln_1p()).ceil();
    if m >= u64::MAX as f64 {
        u64::MAX
    } else {
        (m as u64).max(1)
    }
}

/// Exact expected Golomb codeword length under `Pr(t) = (1-p)^(t-1) p`.
pub fn golomb_expected_length(m: u64, success_prob: f64) -> f64 {
    let m = m.max(1);
    let theta = 1.0 - success_prob;
    let theta_m = theta.powf(m as f64);
    let unary = theta_m / (1.0 - theta_m) + 1.0;
    if m == 1 {
        return unary;
    }
    let (b, cutoff) = truncated_binary_shape(m);
    // Pr(r < cutoff) for r = n mod m, with Pr(r) proportional to theta^r.
    let short = (1.0 - theta.powf(cutoff as f64)) / (1.0 - theta_m);
    unary + short * (b - 1) as f64 + (1.0 - short) * b as f64
}

/// Entropy in bits of the geometric law on `{1, 2, …}`.
pub fn geometric_entropy(success_prob: f64) -> f64 {
    let p = success_prob;
    if p >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    (-p * p.log2() - q * q.log2()) / p
}

/// Fits a Shannon code to the empirical frequencies of `samples`.
pub fn build_empirical_code(samples: &[u64]) -> Result<IntegerCode> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empirical code needs at least one sample".into()));
    }
    if samples.contains(&0) {
        return Err(Error::Unsupported(0));
    }
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for &s in samples {
        *counts.entry(s).or_default() += 1;
    }
    let total = samples.len() as u128;
    // Shannon length: smallest l with count * 2^l >= total.
    let mut lengths: Vec<(u64, u32)> = counts
        .iter()
        .map(|(&v, &c)| {
            let mut l = 0u32;
            while (c as u128) << l < total {
                l += 1;
            }
            (v, l)
        })
        .collect();
    let max_len = lengths.iter().map(|&(_, l)| l).max().unwrap_or(0);
    let scale = 1u128 << max_len;
    let used: u128 = lengths.iter().map(|&(_, l)| scale >> l).sum();
    let escape_len = if used < scale {
        // Smallest l with 2^-l <= 1 - used/scale.
        let free = scale - used;
        let mut l = 0u32;
        while scale >> l > free {
            l += 1;
        }
        l.max(1)
    } else {
        // Kraft sum is exactly one: lengthen everything by one bit to make
        // room for the escape.
        for e in &mut lengths {
            e.1 += 1;
        }
        1
    };
    if lengths.iter().any(|&(_, l)| l > 63) || escape_len > 63 {
        return Err(Error::InvalidParameter("empirical code too deep".into()));
    }
    Ok(IntegerCode::Empirical(Box::new(EmpiricalCode::from_lengths(lengths, escape_len))))
}

/// Serializes a description: header byte, 4-byte big-endian bit length,
/// payload.
pub fn to_wire(code_tag: u8, bits: &BitString) -> Result<Vec<u8>> {
    let len =
        u32::try_from(bits.len()).map_err(|_| Error::InvalidParameter("description longer than 2^32 bits".into()))?;
    let mut out = Vec::with_capacity(5 + bits.as_bytes().len());
    out.push(code_tag);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(bits.as_bytes());
    Ok(out)
}

/// Parses the wire form back into the header byte and the bits.
pub fn from_wire(bytes: &[u8]) -> Result<(u8, BitString)> {
    if bytes.len() < 5 {
        return Err(Error::Decode("truncated header".into()));
    }
    let len = u32::from_be_bytes(bytes[1..5].try_into().unwrap()) as usize;
    Ok((bytes[0], BitString::from_bytes(&bytes[5..], len)?))
}

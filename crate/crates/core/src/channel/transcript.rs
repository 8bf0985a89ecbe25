//! Public classical channel.
//!
//! Wire format, one record per line:
//!
//! ```text
//! seq,sender,kind,hex(payload)
//! ```
//!
//! `seq` counts from 0, `sender` is `alice` or `bob`, `kind` is one of the
//! [`MessageKind`] names and the payload is lowercase hex (empty for an empty
//! payload). Payload encodings:
//!
//! * bit string: 4-byte big-endian bit count, then bits packed MSB-first;
//! * position list: 4-byte big-endian count, then 4-byte big-endian indices;
//! * single byte: one byte.

use std::fmt;
use std::str::FromStr;

use super::ChannelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        }
    }
}

impl FromStr for Party {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alice" => Ok(Party::Alice),
            "bob" => Ok(Party::Bob),
            other => Err(format!("unknown sender `{other}`")),
        }
    }
}

macro_rules! message_kinds {
    ($($(#[$doc:meta])* $variant:ident => $name:literal,)*) => {
        /// Every message type that can appear on the public channel.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum MessageKind {
            $($(#[$doc])* $variant,)*
        }

        impl MessageKind {
            pub const ALL: &'static [MessageKind] = &[$(MessageKind::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(MessageKind::$variant => $name,)*
                }
            }
        }

        impl FromStr for MessageKind {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(MessageKind::$variant),)*
                    other => Err(format!("unknown message kind `{other}`")),
                }
            }
        }
    };
}

message_kinds! {
    /// Unmasked basis list (bit string, 0 = Z, 1 = X).
    Bases => "bases",
    /// Basis list XORed with the reconciled key (bit string).
    MaskedBases => "masked-bases",
    /// Raw indices sampled for error estimation (position list).
    SamplePositions => "sample-positions",
    /// Key values at the sampled positions (bit string).
    SampleBits => "sample-bits",
    /// Membership mask of one parity subset over the current key (bit string).
    ParitySubset => "parity-subset",
    /// Parity of Alice's bits in the preceding subset (byte).
    ParityBit => "parity-bit",
    /// Bob's verdict after all parities: 1 = all matched (byte).
    ParityVerdict => "parity-verdict",
    /// Analyzer indices, 2 bits per pair, XORed with the reconciled key (bit string).
    MaskedAngles => "masked-angles",
    /// Raw indices of pairs used for the CHSH test (position list).
    ChshPositions => "chsh-positions",
    /// Outcomes at the CHSH positions, 1 = +1 (bit string).
    ChshOutcomes => "chsh-outcomes",
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub seq: u64,
    pub sender: Party,
    pub kind: MessageKind,
    pub payload: Vec<u8>,
}

/// Append-only log of public messages.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn publish(&mut self, sender: Party, kind: MessageKind, payload: Vec<u8>) -> &Record {
        let seq = self.records.len() as u64;
        self.records.push(Record {
            seq,
            sender,
            kind,
            payload,
        });
        self.records.last().expect("just pushed")
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of one kind from one sender, in publication order.
    pub fn find<'a>(&'a self, sender: Party, kind: MessageKind) -> impl Iterator<Item = &'a Record> + 'a {
        self.records
            .iter()
            .filter(move |r| r.sender == sender && r.kind == kind)
    }

    pub fn first(&self, sender: Party, kind: MessageKind) -> Option<&Record> {
        self.find(sender, kind).next()
    }

    pub fn to_wire(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.seq,
                r.sender.as_str(),
                r.kind.as_str(),
                hex::encode(&r.payload)
            ));
        }
        out
    }

    pub fn from_wire(text: &str) -> Result<Self, ChannelError> {
        let mut transcript = Transcript::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| ChannelError::MalformedRecord {
                line: idx + 1,
                reason,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", fields.len())));
            }
            let seq: u64 = fields[0].parse().map_err(|e| bad(format!("seq: {e}")))?;
            if seq != transcript.len() as u64 {
                return Err(bad(format!("sequence gap: expected {}, found {seq}", transcript.len())));
            }
            let sender = fields[1].parse().map_err(bad)?;
            let kind = fields[2].parse().map_err(bad)?;
            let payload = hex::decode(fields[3]).map_err(|e| bad(format!("payload: {e}")))?;
            transcript.publish(sender, kind, payload);
        }
        Ok(transcript)
    }
}

pub fn encode_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + bits.len().div_ceil(8));
    out.extend_from_slice(&(bits.len() as u32).to_be_bytes());
    for chunk in bits.chunks(8) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)));
        out.push(byte);
    }
    out
}

pub fn decode_bits(payload: &[u8]) -> Result<Vec<bool>, ChannelError> {
    let (len, body) = split_len(payload)?;
    if body.len() != len.div_ceil(8) {
        return Err(ChannelError::MalformedPayload(format!(
            "bit string of {len} bits needs {} bytes, found {}",
            len.div_ceil(8),
            body.len()
        )));
    }
    Ok((0..len).map(|i| body[i / 8] >> (7 - i % 8) & 1 == 1).collect())
}

pub fn encode_positions(positions: &[usize]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * positions.len());
    out.extend_from_slice(&(positions.len() as u32).to_be_bytes());
    for &p in positions {
        out.extend_from_slice(&(p as u32).to_be_bytes());
    }
    out
}

pub fn decode_positions(payload: &[u8]) -> Result<Vec<usize>, ChannelError> {
    let (len, body) = split_len(payload)?;
    if body.len() != 4 * len {
        return Err(ChannelError::MalformedPayload(format!(
            "position list of {len} entries needs {} bytes, found {}",
            4 * len,
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect())
}

pub fn encode_byte(value: u8) -> Vec<u8> {
    vec![value]
}

pub fn decode_byte(payload: &[u8]) -> Result<u8, ChannelError> {
    match payload {
        [b] => Ok(*b),
        _ => Err(ChannelError::MalformedPayload(format!(
            "expected 1 byte, found {}",
            payload.len()
        ))),
    }
}

fn split_len(payload: &[u8]) -> Result<(usize, &[u8]), ChannelError> {
    if payload.len() < 4 {
        return Err(ChannelError::MalformedPayload("missing length prefix".into()));
    }
    let (head, body) = payload.split_at(4);
    Ok((u32::from_be_bytes([head[0], head[1], head[2], head[3]]) as usize, body))
}

//! Length-prefixed field encoding.
//!
//! Every field is written as a 4-byte big-endian length followed by its
//! bytes, so a sequence of fields decodes unambiguously.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("input truncated at byte {0}")]
    Truncated(usize),
    #[error("field at byte {offset} has length {len}, expected {expected}")]
    BadLength {
        offset: usize,
        len: usize,
        expected: usize,
    },
    #[error("unknown tag {0}")]
    UnknownTag(u8),
    #[error("field is not valid UTF-8")]
    Utf8,
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.field(&[v])
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.field(s.as_bytes())
    }

    pub fn finish(&mut self) -> Vec<u8> {
        core::mem::take(&mut self.buf)
    }
}

pub struct Decoder<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        Self { input, pos: 0 }
    }

    pub fn field(&mut self) -> Result<&'a [u8], DecodeError> {
        let start = self.pos;
        let header = self
            .input
            .get(start..start + 4)
            .ok_or(DecodeError::Truncated(start))?;
        let len = u32::from_be_bytes(header.try_into().unwrap()) as usize;
        let body = self
            .input
            .get(start + 4..start + 4 + len)
            .ok_or(DecodeError::Truncated(start + 4))?;
        self.pos = start + 4 + len;
        Ok(body)
    }

    pub fn fixed<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let offset = self.pos;
        let f = self.field()?;
        f.try_into().map_err(|_| DecodeError::BadLength {
            offset,
            len: f.len(),
            expected: N,
        })
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        self.fixed::<4>().map(u32::from_be_bytes)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        self.fixed::<1>().map(|b| b[0])
    }

    pub fn str(&mut self) -> Result<&'a str, DecodeError> {
        core::str::from_utf8(self.field()?).map_err(|_| DecodeError::Utf8)
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.input.len()
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        match self.input.len() - self.pos {
            0 => Ok(()),
            n => Err(DecodeError::Trailing(n)),
        }
    }
}

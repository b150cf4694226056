//! Text symbol streams.
//!
//! Input is whitespace-separated decimal symbols in `[0, q)`; `?` marks an
//! erased symbol where erasures are allowed. Symbols are grouped into blocks
//! of `k` (encode) or `n` (decode, repair) regardless of line breaks, and
//! each output block is written on its own line.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::code::{CodeError, ErasurePattern, MrCode};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("line {line}, column {column}: {reason} ({token:?})")]
    Parse {
        line: usize,
        column: usize,
        token: String,
        reason: &'static str,
    },
    #[error("input ends with an incomplete block of {got} symbols (block length {block_len})")]
    Incomplete { got: usize, block_len: usize },
    #[error("block {index}")]
    Block {
        index: usize,
        #[source]
        source: CodeError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl StreamError {
    /// True for malformed input, as opposed to a block that failed to decode.
    pub fn is_parse(&self) -> bool {
        matches!(self, StreamError::Parse { .. } | StreamError::Incomplete { .. })
    }
}

fn tokenize(
    input: impl BufRead,
    q: u64,
    allow_erasures: bool,
) -> Result<Vec<Option<u64>>, StreamError> {
    let mut out = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        let mut rest = line.as_str();
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let token_len = rest[start..]
                .find(char::is_whitespace)
                .unwrap_or(rest.len() - start);
            let token = &rest[start..start + token_len];
            let parse_error = |reason| StreamError::Parse {
                line: line_no + 1,
                column: offset + start + 1,
                token: token.to_string(),
                reason,
            };
            if token == "?" {
                if !allow_erasures {
                    return Err(parse_error("erasure marks are not allowed here"));
                }
                out.push(None);
            } else {
                let v: u64 = token.parse().map_err(|_| parse_error("not a decimal symbol"))?;
                if v >= q {
                    return Err(parse_error("symbol is not below q"));
                }
                out.push(Some(v));
            }
            offset += start + token_len;
            rest = &rest[start + token_len..];
        }
    }
    Ok(out)
}

fn blocks(
    symbols: Vec<Option<u64>>,
    block_len: usize,
) -> Result<Vec<Vec<Option<u64>>>, StreamError> {
    if symbols.len() % block_len != 0 {
        return Err(StreamError::Incomplete {
            got: symbols.len() % block_len,
            block_len,
        });
    }
    Ok(symbols.chunks(block_len).map(<[_]>::to_vec).collect())
}

fn write_block(out: &mut impl Write, symbols: &[Option<u64>]) -> io::Result<()> {
    let line: Vec<String> = symbols
        .iter()
        .map(|s| s.map_or_else(|| "?".to_string(), |v| v.to_string()))
        .collect();
    writeln!(out, "{}", line.join(" "))
}

/// Encodes message blocks of `k` symbols. Positions in `erasures` are
/// written as `?`, which is handy for feeding [`decode_stream`].
pub fn encode_stream(
    code: &MrCode,
    input: impl BufRead,
    mut output: impl Write,
    erasures: &ErasurePattern,
) -> Result<usize, StreamError> {
    let symbols = tokenize(input, code.field().modulus(), false)?;
    let blocks = blocks(symbols, code.dimension())?;
    for (index, block) in blocks.iter().enumerate() {
        let message: Vec<u64> = block.iter().map(|s| s.expect("no erasures")).collect();
        let codeword = code
            .encode(&message)
            .map_err(|source| StreamError::Block { index, source })?;
        write_block(&mut output, &erasures.apply(&codeword))?;
    }
    Ok(blocks.len())
}

fn mark(block: &mut [Option<u64>], erasures: &ErasurePattern) {
    for i in erasures.erased() {
        block[i] = None;
    }
}

/// Decodes codeword blocks of `n` symbols to messages. Positions in
/// `erasures` are treated as erased in every block.
pub fn decode_stream(
    code: &MrCode,
    input: impl BufRead,
    mut output: impl Write,
    erasures: &ErasurePattern,
) -> Result<usize, StreamError> {
    let symbols = tokenize(input, code.field().modulus(), true)?;
    let blocks = blocks(symbols, code.len())?;
    let count = blocks.len();
    for (index, mut block) in blocks.into_iter().enumerate() {
        mark(&mut block, erasures);
        let message = code
            .decode(&block)
            .map_err(|source| StreamError::Block { index, source })?;
        let message: Vec<Option<u64>> = message.into_iter().map(Some).collect();
        write_block(&mut output, &message)?;
    }
    Ok(count)
}

fn local_only(code: &MrCode, block: &[Option<u64>]) -> Option<Vec<u64>> {
    let mut out = block.to_vec();
    for g in 0..code.group_count() {
        let missing: Vec<usize> = code.group_columns(g).filter(|&i| block[i].is_none()).collect();
        if let [position] = missing[..] {
            out[position] = code.local_repair_with(g, position, |i| block[i]).ok();
        }
    }
    out.into_iter().collect()
}

/// Restores full codewords: groups with one erasure are repaired locally,
/// anything else goes through the global decoder.
pub fn repair_stream(
    code: &MrCode,
    input: impl BufRead,
    mut output: impl Write,
    erasures: &ErasurePattern,
) -> Result<usize, StreamError> {
    let symbols = tokenize(input, code.field().modulus(), true)?;
    let blocks = blocks(symbols, code.len())?;
    let count = blocks.len();
    for (index, mut block) in blocks.into_iter().enumerate() {
        mark(&mut block, erasures);
        let full = match code.decode_detailed(&block) {
            Ok(decoded) => decoded.codeword,
            // A single-group code has rank r, so the message is never
            // determined, but one erasure is still locally repairable.
            Err(CodeError::NotCorrectable) => local_only(code, &block)
                .ok_or(StreamError::Block {
                    index,
                    source: CodeError::NotCorrectable,
                })?,
            Err(source) => return Err(StreamError::Block { index, source }),
        };
        let full: Vec<Option<u64>> = full.into_iter().map(Some).collect();
        write_block(&mut output, &full)?;
    }
    Ok(count)
}

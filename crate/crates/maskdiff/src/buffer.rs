//! Sequence state: the token buffer and block ranges.
//!
//! A [`TokenBuffer`] holds one sequence being generated. Every position is
//! either a committed token id or the reserved mask id. Prompt positions are
//! fixed input and are never rewritten; generated positions move from mask
//! to committed exactly once.

use crate::error::{EngineError, Result};

/// Half-open span of generation positions decoded together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRange {
    pub start: usize,
    pub end: usize,
}

impl BlockRange {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end);
        Self { start, end }
    }

    pub fn width(&self) -> usize {
        self.end - self.start
    }

    pub fn contains(&self, pos: usize) -> bool {
        pos >= self.start && pos < self.end
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenBuffer {
    ids: Vec<u32>,
    mask_id: u32,
    eos_id: u32,
    prompt_len: usize,
}

impl TokenBuffer {
    /// Builds the initial state: prompt followed by `gen_len` mask tokens.
    pub fn new_generation_state(
        prompt: &[u32],
        gen_len: usize,
        mask_id: u32,
        eos_id: u32,
    ) -> Result<Self> {
        if prompt.is_empty() {
            return Err(EngineError::InvalidPrompt("prompt is empty".into()));
        }
        if gen_len == 0 {
            return Err(EngineError::InvalidConfig("gen_len must be positive".into()));
        }
        if mask_id == eos_id {
            return Err(EngineError::InvalidConfig(
                "mask_id and eos_id must be distinct".into(),
            ));
        }
        if let Some(pos) = prompt.iter().position(|&t| t == mask_id) {
            return Err(EngineError::InvalidPrompt(format!(
                "prompt contains mask_id {mask_id} at position {pos}"
            )));
        }
        let mut ids = prompt.to_vec();
        ids.resize(prompt.len() + gen_len, mask_id);
        Ok(Self {
            ids,
            mask_id,
            eos_id,
            prompt_len: prompt.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn prompt_len(&self) -> usize {
        self.prompt_len
    }

    pub fn gen_len(&self) -> usize {
        self.ids.len() - self.prompt_len
    }

    pub fn mask_id(&self) -> u32 {
        self.mask_id
    }

    pub fn eos_id(&self) -> u32 {
        self.eos_id
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn id_at(&self, pos: usize) -> Result<u32> {
        self.ids
            .get(pos)
            .copied()
            .ok_or(EngineError::OutOfRange { pos, len: self.ids.len() })
    }

    pub fn is_masked(&self, pos: usize) -> bool {
        self.ids.get(pos).is_some_and(|&t| t == self.mask_id)
    }

    fn check_range(&self, range: BlockRange) -> Result<()> {
        if range.start >= range.end || range.end > self.ids.len() {
            return Err(EngineError::OutOfRange {
                pos: range.end,
                len: self.ids.len(),
            });
        }
        Ok(())
    }

    /// Boolean mask over `range`: true where the position is still masked.
    pub fn undecided_mask(&self, range: BlockRange) -> Result<Vec<bool>> {
        self.check_range(range)?;
        Ok(self.ids[range.start..range.end]
            .iter()
            .map(|&t| t == self.mask_id)
            .collect())
    }

    /// Absolute positions in `range` that are still masked, ascending.
    pub fn undecided_positions(&self, range: BlockRange) -> Vec<usize> {
        range
            .positions()
            .filter(|&p| self.ids.get(p).is_some_and(|&t| t == self.mask_id))
            .collect()
    }

    pub fn has_undecided_in(&self, range: BlockRange) -> bool {
        self.ids[range.start..range.end.min(self.ids.len())].contains(&self.mask_id)
    }

    pub fn any_masked(&self) -> bool {
        self.ids.contains(&self.mask_id)
    }

    /// Writes a decoded token. Rejects prompt positions, already-decided
    /// positions, and the mask token itself.
    pub fn commit(&mut self, pos: usize, token: u32) -> Result<()> {
        if pos >= self.ids.len() {
            return Err(EngineError::OutOfRange { pos, len: self.ids.len() });
        }
        if pos < self.prompt_len {
            return Err(EngineError::PromptImmutable { pos });
        }
        if self.ids[pos] != self.mask_id {
            return Err(EngineError::AlreadyDecided { pos });
        }
        if token == self.mask_id {
            return Err(EngineError::CommitMask { pos });
        }
        self.ids[pos] = token;
        Ok(())
    }

    /// Overwrites every remaining mask position with EOS. Used by early
    /// termination. Returns the filled positions.
    pub fn fill_remaining_with_eos(&mut self) -> Vec<usize> {
        let mask = self.mask_id;
        let eos = self.eos_id;
        let mut filled = Vec::new();
        for (pos, id) in self.ids.iter_mut().enumerate().skip(self.prompt_len) {
            if *id == mask {
                *id = eos;
                filled.push(pos);
            }
        }
        filled
    }

    /// Generated tokens strictly before the first EOS in the generated
    /// region; the whole generation length if no EOS was produced.
    pub fn tokens_before_eos(&self) -> usize {
        self.ids[self.prompt_len..]
            .iter()
            .position(|&t| t == self.eos_id)
            .unwrap_or(self.gen_len())
    }
}

//! The cyclic ladder encoding.
//!
//! A cyclic ladder of width `w` over a ring `x_1..x_n` requires every window of
//! `w` cyclically consecutive variables to hold at most one true variable.
//! Positions `1..=n+w-1` are cut into `m = ceil((n+w-1)/w)` windows of length
//! `w` (the last one possibly shorter); positions past `n` wrap to `p - n`.
//! Each window gets a prefix block (ascending order) and a suffix block
//! (descending order), except that the first window only has a suffix block
//! and the last only a prefix block, giving `2m - 2` blocks. Block registers
//! `R_j` mean "one of the first `j` block variables is true". A window that
//! straddles two blocks is the union of a suffix part and a prefix part and is
//! reconstructed with one binary connecting clause.

use std::fmt::Write as _;

use crate::cnf::{amo_seq, CnfFormula, Lit, VarAllocator, VarKey};
use crate::error::{Error, Result};

/// Ring of input literals and the window width.
#[derive(Clone, Debug)]
pub struct LadderSpec {
    pub ring: Vec<Lit>,
    pub w: usize,
}

impl LadderSpec {
    pub fn new(ring: Vec<Lit>, w: usize) -> Result<Self> {
        let n = ring.len();
        if n < 2 {
            return Err(Error::input(format!("ladder ring needs at least 2 variables, got {n}")));
        }
        if w == 0 || w > n {
            return Err(Error::input(format!("ladder width {w} outside 1..={n}")));
        }
        Ok(LadderSpec { ring, w })
    }
}

/// Segment `start..start+len` of the unrolled positions `1..=n+w-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub len: usize,
}

impl Window {
    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Prefix,
    Suffix,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub kind: BlockKind,
    /// Index into [`LadderEncoding::windows`].
    pub window: usize,
    /// Unrolled positions in block order.
    pub positions: Vec<usize>,
    pub inputs: Vec<Lit>,
    /// `registers[j - 1]` is `R_j`; `R_1` is the first input. Filled by
    /// [`LadderEncoding::encode_blocks`].
    pub registers: Vec<Lit>,
    /// Whether the block carries the `x_j -> !R_{j-1}` clauses.
    pub amo: bool,
}

/// Literals whose joint falsity means a window holds no true variable: one
/// register when the window coincides with a block, two when it straddles a
/// block boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroLits {
    lits: [Lit; 2],
    len: usize,
}

impl ZeroLits {
    fn aligned(a: Lit) -> Self {
        ZeroLits { lits: [a, a], len: 1 }
    }

    fn split(a: Lit, b: Lit) -> Self {
        ZeroLits { lits: [a, b], len: 2 }
    }

    pub fn as_slice(&self) -> &[Lit] {
        &self.lits[..self.len]
    }

    pub fn is_aligned(&self) -> bool {
        self.len == 1
    }
}

/// Window/block decomposition plus, once encoded, the register literals.
#[derive(Clone, Debug)]
pub struct LadderEncoding {
    n: usize,
    w: usize,
    owner: usize,
    pub windows: Vec<Window>,
    pub blocks: Vec<Block>,
    prefix_of: Vec<Option<usize>>,
    suffix_of: Vec<Option<usize>>,
    encoded: bool,
    aux_vars: usize,
    clauses: usize,
}

impl LadderEncoding {
    /// Cuts the ring into windows and blocks. `owner` namespaces the register
    /// keys in the allocator.
    pub fn decompose(spec: &LadderSpec, owner: usize) -> Self {
        let (n, w) = (spec.ring.len(), spec.w);
        let total = n + w - 1;
        let m = total.div_ceil(w);
        let windows: Vec<Window> = (0..m)
            .map(|t| {
                let start = t * w + 1;
                Window {
                    start,
                    len: w.min(total + 1 - start),
                }
            })
            .collect();
        let at = |p: usize| spec.ring[(p - 1) % n];
        let mut blocks = Vec::with_capacity(2 * m - 2);
        let mut prefix_of = vec![None; m];
        let mut suffix_of = vec![None; m];
        let mut push = |blocks: &mut Vec<Block>, t: usize, kind: BlockKind, amo: bool| {
            let win = windows[t];
            let positions: Vec<usize> = match kind {
                BlockKind::Prefix => (win.start..=win.end()).collect(),
                BlockKind::Suffix => (win.start..=win.end()).rev().collect(),
            };
            let inputs = positions.iter().map(|&p| at(p)).collect();
            match kind {
                BlockKind::Prefix => prefix_of[t] = Some(blocks.len()),
                BlockKind::Suffix => suffix_of[t] = Some(blocks.len()),
            }
            blocks.push(Block {
                kind,
                window: t,
                positions,
                inputs,
                registers: Vec::new(),
                amo,
            });
        };
        push(&mut blocks, 0, BlockKind::Suffix, true);
        for t in 1..m - 1 {
            push(&mut blocks, t, BlockKind::Prefix, true);
            push(&mut blocks, t, BlockKind::Suffix, false);
        }
        if m > 1 {
            push(&mut blocks, m - 1, BlockKind::Prefix, true);
        }
        LadderEncoding {
            n,
            w,
            owner,
            windows,
            blocks,
            prefix_of,
            suffix_of,
            encoded: false,
            aux_vars: 0,
            clauses: 0,
        }
    }

    /// Decomposes and emits block and connecting clauses.
    pub fn encode(spec: &LadderSpec, owner: usize, f: &mut CnfFormula, alloc: &mut VarAllocator) -> Result<Self> {
        let mut enc = Self::decompose(spec, owner);
        enc.encode_blocks(f, alloc)?;
        enc.connect_blocks(f)?;
        Ok(enc)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn m(&self) -> usize {
        self.windows.len()
    }

    /// Length of the last window, `n + w - 1 - (m - 1) w`.
    pub fn last_len(&self) -> usize {
        self.windows.last().map_or(0, |w| w.len)
    }

    /// Register variables allocated by this ladder.
    pub fn aux_vars(&self) -> usize {
        self.aux_vars
    }

    /// Clauses emitted by this ladder.
    pub fn clauses(&self) -> usize {
        self.clauses
    }

    /// Emits, for each block and `j = 2..=len`: `x_j -> R_j`, `R_{j-1} -> R_j`,
    /// `x_j | R_{j-1} | !R_j`, and on blocks that own their window's AMO also
    /// `x_j -> !R_{j-1}`. An interior suffix block reuses the full-window
    /// register of the prefix block over the same window.
    pub fn encode_blocks(&mut self, f: &mut CnfFormula, alloc: &mut VarAllocator) -> Result<()> {
        if self.encoded {
            return Err(Error::integrity("ladder blocks encoded twice"));
        }
        let before = f.num_clauses();
        for b in 0..self.blocks.len() {
            let len = self.blocks[b].inputs.len();
            let shared = match self.blocks[b].kind {
                BlockKind::Suffix if b > 0 => {
                    let p = self.prefix_of[self.blocks[b].window]
                        .ok_or_else(|| Error::integrity("interior suffix block without prefix"))?;
                    Some(self.blocks[p].registers[len - 1])
                }
                _ => None,
            };
            let mut regs = Vec::with_capacity(len);
            regs.push(self.blocks[b].inputs[0]);
            for j in 2..=len {
                let key = VarKey::Register {
                    owner: self.owner,
                    block: b,
                    pos: j,
                };
                let r = match shared {
                    Some(s) if j == len => {
                        alloc.bind(key, s.var())?;
                        s
                    }
                    _ => {
                        self.aux_vars += 1;
                        Lit::pos(alloc.named(key))
                    }
                };
                regs.push(r);
            }
            let block = &mut self.blocks[b];
            for j in 1..len {
                let (x, prev, r) = (block.inputs[j], regs[j - 1], regs[j]);
                f.add_clause(&[!x, r]);
                f.add_clause(&[!prev, r]);
                f.add_clause(&[x, prev, !r]);
                if block.amo {
                    f.add_clause(&[!x, !prev]);
                }
            }
            block.registers = regs;
        }
        self.clauses += f.num_clauses() - before;
        self.encoded = true;
        Ok(())
    }

    /// Emits `!r_A | !r_B` for every window starting at `l <= n` that straddles
    /// the boundary between windows `t` and `t + 1`, where `r_A` is the suffix
    /// register over the part in `W_t` and `r_B` the prefix register over the
    /// part in `W_{t+1}`.
    pub fn connect_blocks(&mut self, f: &mut CnfFormula) -> Result<()> {
        self.require_encoded()?;
        let before = f.num_clauses();
        for t in 0..self.m() - 1 {
            let end = self.windows[t].end();
            for a in 1..self.w {
                let b = self.w - a;
                let l = end - a + 1;
                if l > self.n || b > self.windows[t + 1].len {
                    continue;
                }
                let (ra, rb) = (self.suffix_reg(t, a)?, self.prefix_reg(t + 1, b)?);
                f.add_clause(&[!ra, !rb]);
            }
        }
        self.clauses += f.num_clauses() - before;
        Ok(())
    }

    fn require_encoded(&self) -> Result<()> {
        if self.encoded {
            Ok(())
        } else {
            Err(Error::integrity("ladder registers queried before encoding"))
        }
    }

    fn suffix_reg(&self, t: usize, len: usize) -> Result<Lit> {
        let b = self.suffix_of[t].ok_or_else(|| Error::integrity(format!("window {t} has no suffix block")))?;
        Ok(self.blocks[b].registers[len - 1])
    }

    fn prefix_reg(&self, t: usize, len: usize) -> Result<Lit> {
        let b = self.prefix_of[t].ok_or_else(|| Error::integrity(format!("window {t} has no prefix block")))?;
        Ok(self.blocks[b].registers[len - 1])
    }

    /// Literals whose joint falsity is equivalent to "the window of length `w`
    /// starting at ring position `l` holds no true variable".
    pub fn window_zero_literals(&self, l: usize) -> Result<ZeroLits> {
        self.require_encoded()?;
        if l == 0 || l > self.n {
            return Err(Error::input(format!("ring position {l} outside 1..={}", self.n)));
        }
        let (t, o) = ((l - 1) / self.w, (l - 1) % self.w);
        if o == 0 {
            if self.windows[t].len != self.w {
                return Err(Error::integrity(format!("window at {l} is not full")));
            }
            let r = if t == 0 {
                self.suffix_reg(0, self.w)?
            } else {
                self.prefix_reg(t, self.w)?
            };
            Ok(ZeroLits::aligned(r))
        } else {
            let a = self.w - o;
            Ok(ZeroLits::split(self.suffix_reg(t, a)?, self.prefix_reg(t + 1, o)?))
        }
    }

    /// Registers over disjoint ring segments that together cover positions
    /// `1..=n` exactly once: for each window starting at or before `n`, the
    /// register over its first `min(len, n - start + 1)` positions.
    pub fn partition_registers(&self) -> Result<Vec<Lit>> {
        self.require_encoded()?;
        let mut out = Vec::new();
        for (t, win) in self.windows.iter().enumerate() {
            if win.start > self.n {
                break;
            }
            let c = win.len.min(self.n - win.start + 1);
            out.push(if t == 0 {
                self.suffix_reg(0, c)?
            } else {
                self.prefix_reg(t, c)?
            });
        }
        Ok(out)
    }

    /// Stable text dump of windows, blocks and registers.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ladder n={} w={} m={} last={}", self.n, self.w, self.m(), self.last_len());
        if self.last_len() == 1 {
            let _ = writeln!(s, "note: last window has length 1, its block has no registers");
        }
        for (t, win) in self.windows.iter().enumerate() {
            let _ = writeln!(s, "W{} {}..{}", t + 1, win.start, win.end());
        }
        for (i, b) in self.blocks.iter().enumerate() {
            let kind = match b.kind {
                BlockKind::Prefix => "prefix",
                BlockKind::Suffix => "suffix",
            };
            let _ = write!(s, "B{} {kind} W{}{} pos", i + 1, b.window + 1, if b.amo { " amo" } else { "" });
            for p in &b.positions {
                let _ = write!(s, " {p}");
            }
            let _ = write!(s, " in");
            for x in &b.inputs {
                let _ = write!(s, " {x}");
            }
            if b.registers.len() > 1 {
                let _ = write!(s, " reg");
                for r in &b.registers[1..] {
                    let _ = write!(s, " {r}");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Closed forms `(aux, clauses)` for one ladder, assuming every
/// block has full width: `2mw - 3m - 2w + 4` and `8mw - 8m - 7w + 7`.
pub fn size_formulas(n: usize, w: usize) -> Result<(i64, i64)> {
    if w < 2 || w > n {
        return Err(Error::input(format!("closed forms need 1 < w <= n, got n={n} w={w}")));
    }
    let (m, w) = ((n + w - 1).div_ceil(w) as i64, w as i64);
    Ok((2 * m * w - 3 * m - 2 * w + 4, 8 * m * w - 8 * m - 7 * w + 7))
}

/// Exact `(aux, clauses)` emitted by [`LadderEncoding::encode`], accounting for
/// the short last window.
pub fn exact_size(n: usize, w: usize) -> Result<(usize, usize)> {
    if w == 0 || w > n || n < 2 {
        return Err(Error::input(format!("need 1 <= w <= n and n >= 2, got n={n} w={w}")));
    }
    let m = (n + w - 1).div_ceil(w);
    let last = n + w - 1 - (m - 1) * w;
    let interior = m - 2;
    let aux = (w - 1) + interior * (w - 1) + interior * w.saturating_sub(2) + (last - 1);
    let blocks = 4 * (w - 1) + interior * (4 * (w - 1) + 3 * (w - 1)) + 4 * (last - 1);
    let connect = interior * (w - 1) + (w - 1).min(last);
    Ok((aux, blocks + connect))
}

/// Baseline: one binary clause per pair of ring variables at cyclic distance
/// below `w`.
pub fn encode_pairwise_baseline(f: &mut CnfFormula, ring: &[Lit], w: usize) {
    let n = ring.len();
    for i in 0..n {
        for d in 1..w.min(n) {
            let j = (i + d) % n;
            // skip pairs already reached from the other side
            if n - d < d || (n - d == d && j < i) {
                continue;
            }
            f.add_clause(&[!ring[i], !ring[j]]);
        }
    }
}

/// Baseline: an independent sequential counter over every window.
pub fn encode_seq_baseline(f: &mut CnfFormula, alloc: &mut VarAllocator, ring: &[Lit], w: usize) {
    let n = ring.len();
    for l in 0..n {
        let window: Vec<Lit> = (0..w).map(|d| ring[(l + d) % n]).collect();
        amo_seq(f, alloc, &window);
    }
}

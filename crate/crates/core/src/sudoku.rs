//! Sudoku as a QUBO.
//!
//! A board with block size `n` has side `s = n²` and one binary variable
//! `z[r][c][k]` per (row, column, digit), flattened as `(r·s + c)·s + k`
//! with everything 0-based (`k = digit − 1`). Four families of "exactly one"
//! constraints (per cell, per row and digit, per column and digit, per block
//! and digit) become penalties `(Σ z − 1)²`.
//!
//! Clues are clamped: the clue variable is fixed to 1 and every variable it
//! excludes is fixed to 0. The remaining free variables form a smaller QUBO
//! whose objective matches the full one on every completion.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{IsingError, QuboModel};
use crate::mps::{Spin, SpinConfiguration};

#[derive(Debug, Error)]
pub enum SudokuError {
    #[error("block size must be at least 2, got {0}")]
    BlockSize(usize),
    #[error("board text has {got} cells, which is not n⁴ for a supported n")]
    BadLength { got: usize },
    #[error("invalid symbol `{symbol}` at cell {index}")]
    BadSymbol { symbol: String, index: usize },
    #[error("entry {value} at cell {index} exceeds {max}")]
    OutOfRange { value: usize, index: usize, max: usize },
    #[error("clues ({}, {}) and ({}, {}) both hold {digit}", .first.0 + 1, .first.1 + 1, .second.0 + 1, .second.1 + 1)]
    Conflict { first: (usize, usize), second: (usize, usize), digit: u16 },
    #[error("QUBO has {got} variables, expected {expected}")]
    QuboSize { expected: usize, got: usize },
    #[error("expected {expected} spins, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("board is incomplete ({empty} empty cells)")]
    Incomplete { empty: usize },
    #[error("board block size {board} differs from map block size {map}")]
    BlockMismatch { board: usize, map: usize },
    #[error("cannot keep {clues} clues on a board of {cells} cells")]
    ClueCount { clues: usize, cells: usize },
    #[error(transparent)]
    Ising(#[from] IsingError),
}

pub type SudokuResult<T> = Result<T, SudokuError>;

/// Square grid; `0` marks an empty cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Board {
    block: usize,
    cells: Vec<u16>,
}

impl Board {
    pub fn empty(block: usize) -> SudokuResult<Self> {
        if block < 2 {
            return Err(SudokuError::BlockSize(block));
        }
        Ok(Self { block, cells: vec![0; block.pow(4)] })
    }

    /// Row-major cells, 0 for empty.
    pub fn from_cells(block: usize, cells: Vec<u16>) -> SudokuResult<Self> {
        let mut b = Self::empty(block)?;
        if cells.len() != b.cells.len() {
            return Err(SudokuError::BadLength { got: cells.len() });
        }
        let side = b.side();
        if let Some((index, &v)) = cells.iter().enumerate().find(|(_, &v)| usize::from(v) > side) {
            return Err(SudokuError::OutOfRange { value: v.into(), index, max: side });
        }
        b.cells = cells;
        Ok(b)
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn side(&self) -> usize {
        self.block * self.block
    }

    pub fn cells(&self) -> &[u16] {
        &self.cells
    }

    /// Entry at 0-based (row, col).
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.cells[row * self.side() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, digit: u16) {
        assert!(usize::from(digit) <= self.side(), "digit out of range");
        let s = self.side();
        self.cells[row * s + col] = digit;
    }

    /// Number of filled cells.
    pub fn clue_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|&v| v != 0)
    }

    pub fn block_of(&self, row: usize, col: usize) -> usize {
        (row / self.block) * self.block + col / self.block
    }

    /// Grid with clue cells in brackets.
    pub fn render_marked(&self, clues: &Board) -> String {
        let s = self.side();
        let width = s.to_string().len();
        let mut out = String::new();
        for r in 0..s {
            if r > 0 && r % self.block == 0 {
                out.push('\n');
            }
            for c in 0..s {
                if c > 0 && c % self.block == 0 {
                    out.push_str(" |");
                }
                let v = self.get(r, c);
                let text = if v == 0 { ".".to_string() } else { v.to_string() };
                if clues.get(r, c) != 0 {
                    out.push_str(&format!("[{text:>width$}]"));
                } else {
                    out.push_str(&format!(" {text:>width$} "));
                }
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Board {
    /// The same text format [`parse_board`] reads.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.side() <= 9 {
            for v in &self.cells {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.cells.iter().map(|v| v.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

/// Parse a row-major board.
///
/// The compact form has one character per cell (`1`–`9`, with `0` or `.` for
/// empty) and must have 16 or 81 cells. Boards with larger digits use the
/// comma form: cells separated by commas, empty as `0` or `.`, with `n⁴`
/// cells for some block size `n`. Whitespace is ignored in both forms.
pub fn parse_board(text: &str) -> SudokuResult<Board> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let tokens: Vec<String> = if compact.contains(',') {
        compact.split(',').map(str::to_string).collect()
    } else {
        compact.chars().map(String::from).collect()
    };
    let len = tokens.len();
    let block = (2..=15usize).find(|b| b.pow(4) == len).ok_or(SudokuError::BadLength { got: len })?;
    if !compact.contains(',') && block > 3 {
        return Err(SudokuError::BadLength { got: len });
    }
    let side = block * block;
    let mut cells = Vec::with_capacity(len);
    for (index, t) in tokens.iter().enumerate() {
        let v: usize = if t == "." {
            0
        } else {
            t.parse().map_err(|_| SudokuError::BadSymbol { symbol: t.clone(), index })?
        };
        if v > side {
            return Err(SudokuError::OutOfRange { value: v, index, max: side });
        }
        cells.push(v as u16);
    }
    Board::from_cells(block, cells)
}

/// How pairs that share two constraints are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyOverlap {
    /// Q_ab = 1 for every pair sharing at least one constraint.
    #[default]
    Union,
    /// Q_ab = number of shared constraints, so the objective is exactly the
    /// sum of the four penalty families.
    Sum,
}

/// Flat variable index of (row, col, digit) with `digit` in `1..=side`.
pub fn var_index(side: usize, row: usize, col: usize, digit: u16) -> usize {
    (row * side + col) * side + usize::from(digit) - 1
}

/// (row, col, digit) of a flat variable index.
pub fn var_triple(side: usize, index: usize) -> (usize, usize, u16) {
    let k = index % side;
    let cell = index / side;
    (cell / side, cell % side, (k + 1) as u16)
}

/// Every "exactly one" constraint as a list of variable indices.
pub fn constraint_groups(block: usize) -> Vec<Vec<usize>> {
    let s = block * block;
    let mut groups = Vec::with_capacity(4 * s * s);
    for r in 0..s {
        for c in 0..s {
            groups.push((1..=s as u16).map(|d| var_index(s, r, c, d)).collect());
        }
    }
    for d in 1..=s as u16 {
        for r in 0..s {
            groups.push((0..s).map(|c| var_index(s, r, c, d)).collect());
        }
        for c in 0..s {
            groups.push((0..s).map(|r| var_index(s, r, c, d)).collect());
        }
        for b in 0..s {
            let (r0, c0) = ((b / block) * block, (b % block) * block);
            groups.push((0..s).map(|t| var_index(s, r0 + t / block, c0 + t % block, d)).collect());
        }
    }
    groups
}

pub fn full_qubo(block: usize) -> SudokuResult<QuboModel> {
    full_qubo_with(block, PenaltyOverlap::Union)
}

pub fn full_qubo_with(block: usize, overlap: PenaltyOverlap) -> SudokuResult<QuboModel> {
    if block < 2 {
        return Err(SudokuError::BlockSize(block));
    }
    let s = block * block;
    let groups = constraint_groups(block);
    let mut shared: HashMap<(usize, usize), u32> = HashMap::new();
    for g in &groups {
        for (x, &a) in g.iter().enumerate() {
            for &b in &g[x + 1..] {
                *shared.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    let mut q = QuboModel::new(s * s * s);
    for v in 0..q.n() {
        q.set(v, v, -4.0)?;
    }
    for ((a, b), count) in shared {
        let w = match overlap {
            PenaltyOverlap::Union => 1.0,
            PenaltyOverlap::Sum => f64::from(count),
        };
        q.set(a, b, w)?;
    }
    q.offset = groups.len() as f64;
    Ok(q)
}

/// Where each reduced variable came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampMap {
    pub block: usize,
    /// Full-model index of each free variable, ascending.
    pub free: Vec<usize>,
    /// Full-model indices fixed to 1.
    pub fixed_one: Vec<usize>,
    /// Quadratic residue of the fixed variables.
    pub c2: f64,
}

impl ClampMap {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// (row, col, digit) of every free variable.
    pub fn free_triples(&self) -> Vec<(usize, usize, u16)> {
        let s = self.block * self.block;
        self.free.iter().map(|&v| var_triple(s, v)).collect()
    }

    /// Full assignment from a reduced one.
    pub fn expand(&self, x: &[u8]) -> SudokuResult<Vec<u8>> {
        if x.len() != self.free.len() {
            return Err(SudokuError::LengthMismatch { expected: self.free.len(), got: x.len() });
        }
        let mut z = vec![0u8; self.block.pow(6)];
        for &v in &self.fixed_one {
            z[v] = 1;
        }
        for (&v, &b) in self.free.iter().zip(x) {
            z[v] = b;
        }
        Ok(z)
    }
}

fn find_conflict(board: &Board) -> Option<SudokuError> {
    let s = board.side();
    let mut seen: HashMap<(u8, usize, u16), (usize, usize)> = HashMap::new();
    for r in 0..s {
        for c in 0..s {
            let d = board.get(r, c);
            if d == 0 {
                continue;
            }
            for key in [(0u8, r, d), (1, c, d), (2, board.block_of(r, c), d)] {
                if let Some(&first) = seen.get(&key) {
                    return Some(SudokuError::Conflict { first, second: (r, c), digit: d });
                }
                seen.insert(key, (r, c));
            }
        }
    }
    None
}

/// Clamp the clues of `board` into `q` (a full Sudoku QUBO of matching size).
pub fn clamp(board: &Board, q: &QuboModel) -> SudokuResult<(QuboModel, ClampMap)> {
    let s = board.side();
    let n_full = s * s * s;
    if q.n() != n_full {
        return Err(SudokuError::QuboSize { expected: n_full, got: q.n() });
    }
    if let Some(e) = find_conflict(board) {
        return Err(e);
    }
    let b = board.block();
    let mut fixed: Vec<Option<u8>> = vec![None; n_full];
    for r in 0..s {
        for c in 0..s {
            let d = board.get(r, c);
            if d == 0 {
                continue;
            }
            for k in 1..=s as u16 {
                fixed[var_index(s, r, c, k)] = Some(0);
            }
            for t in 0..s {
                fixed[var_index(s, r, t, d)] = Some(0);
                fixed[var_index(s, t, c, d)] = Some(0);
                let (r0, c0) = ((r / b) * b, (c / b) * b);
                fixed[var_index(s, r0 + t / b, c0 + t % b, d)] = Some(0);
            }
        }
    }
    for r in 0..s {
        for c in 0..s {
            let d = board.get(r, c);
            if d != 0 {
                fixed[var_index(s, r, c, d)] = Some(1);
            }
        }
    }

    let mut slot = vec![usize::MAX; n_full];
    let mut free = Vec::new();
    let mut fixed_one = Vec::new();
    for (v, f) in fixed.iter().enumerate() {
        match f {
            None => {
                slot[v] = free.len();
                free.push(v);
            }
            Some(1) => fixed_one.push(v),
            Some(_) => {}
        }
    }

    let mut reduced = QuboModel::new(free.len());
    let mut c2 = 0.0;
    for (i, j, v) in q.entries() {
        match (fixed[i], fixed[j]) {
            (None, None) => reduced.add(slot[i], slot[j], v)?,
            (None, Some(1)) => reduced.add(slot[i], slot[i], 2.0 * v)?,
            (Some(1), None) => reduced.add(slot[j], slot[j], 2.0 * v)?,
            (Some(1), Some(1)) => c2 += if i == j { v } else { 2.0 * v },
            _ => {}
        }
    }
    reduced.offset = q.offset + c2;
    Ok((reduced, ClampMap { block: b, free, fixed_one, c2 }))
}

/// A decoded board plus any cells the assignment left ambiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    /// Cells with exactly one asserted digit; all others are 0.
    pub board: Board,
    pub empty_cells: Vec<(usize, usize)>,
    pub multi_cells: Vec<((usize, usize), Vec<u16>)>,
}

impl Decoded {
    pub fn is_well_formed(&self) -> bool {
        self.empty_cells.is_empty() && self.multi_cells.is_empty()
    }
}

/// Up spins become 1s in the free variables; the fixed ones are added back.
pub fn decode(config: &SpinConfiguration, map: &ClampMap, board: &Board) -> SudokuResult<Decoded> {
    if board.block() != map.block {
        return Err(SudokuError::BlockMismatch { board: board.block(), map: map.block });
    }
    let x: Vec<u8> = config.bits();
    let z = map.expand(&x)?;
    let s = board.side();
    let mut out = Board::empty(map.block)?;
    let mut empty_cells = Vec::new();
    let mut multi_cells = Vec::new();
    for r in 0..s {
        for c in 0..s {
            let digits: Vec<u16> = (1..=s as u16).filter(|&d| z[var_index(s, r, c, d)] == 1).collect();
            match digits.as_slice() {
                [] => empty_cells.push((r, c)),
                [d] => out.set(r, c, *d),
                _ => multi_cells.push(((r, c), digits)),
            }
        }
    }
    Ok(Decoded { board: out, empty_cells, multi_cells })
}

/// Reduced spin configuration of a completed board.
pub fn encode(solution: &Board, map: &ClampMap) -> SudokuResult<SpinConfiguration> {
    if solution.block() != map.block {
        return Err(SudokuError::BlockMismatch { board: solution.block(), map: map.block });
    }
    let s = solution.side();
    Ok(SpinConfiguration::new(
        map.free
            .iter()
            .map(|&v| {
                let (r, c, d) = var_triple(s, v);
                Spin::from_bit(solution.get(r, c) == d)
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    Row(usize),
    Column(usize),
    Block(usize),
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Row(i) => write!(f, "row {}", i + 1),
            Unit::Column(i) => write!(f, "column {}", i + 1),
            Unit::Block(i) => write!(f, "block {}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub unit: Unit,
    pub digit: u16,
    pub count: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} holds {} {} times", self.unit, self.digit, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that every row, column and block holds each digit exactly once.
pub fn verify(board: &Board) -> SudokuResult<Verdict> {
    let empty = board.cells().iter().filter(|&&v| v == 0).count();
    if empty > 0 {
        return Err(SudokuError::Incomplete { empty });
    }
    let s = board.side();
    let mut counts = vec![[vec![0usize; s + 1], vec![0usize; s + 1], vec![0usize; s + 1]]; s];
    for r in 0..s {
        for c in 0..s {
            let d = usize::from(board.get(r, c));
            counts[r][0][d] += 1;
            counts[c][1][d] += 1;
            counts[board.block_of(r, c)][2][d] += 1;
        }
    }
    let mut violations = Vec::new();
    for (kind, make) in [Unit::Row as fn(usize) -> Unit, Unit::Column, Unit::Block].into_iter().enumerate() {
        for (i, unit_counts) in counts.iter().enumerate() {
            for d in 1..=s {
                let count = unit_counts[kind][d];
                if count != 1 {
                    violations.push(Violation { unit: make(i), digit: d as u16, count });
                }
            }
        }
    }
    Ok(Verdict { violations })
}

/// A random valid grid: a shuffled copy of the shifted-row pattern.
pub fn random_solution<R: Rng + ?Sized>(block: usize, rng: &mut R) -> SudokuResult<Board> {
    let mut b = Board::empty(block)?;
    let s = block * block;
    let mut digits: Vec<u16> = (1..=s as u16).collect();
    digits.shuffle(rng);
    let shuffled_axis = |rng: &mut R| -> Vec<usize> {
        let mut groups: Vec<usize> = (0..block).collect();
        groups.shuffle(rng);
        let mut out = Vec::with_capacity(s);
        for g in groups {
            let mut inner: Vec<usize> = (0..block).collect();
            inner.shuffle(rng);
            out.extend(inner.into_iter().map(|t| g * block + t));
        }
        out
    };
    let rows = shuffled_axis(rng);
    let cols = shuffled_axis(rng);
    let transpose = rng.gen_bool(0.5);
    for r in 0..s {
        for c in 0..s {
            let (pr, pc) = (rows[r], cols[c]);
            let pattern = (pr * block + pr / block + pc) % s;
            let (tr, tc) = if transpose { (c, r) } else { (r, c) };
            b.set(tr, tc, digits[pattern]);
        }
    }
    Ok(b)
}

/// A random puzzle with exactly `clues` givens and the grid it came from.
/// Uniqueness of the solution is not checked.
pub fn generate_puzzle(block: usize, clues: usize, seed: u64) -> SudokuResult<(Board, Board)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solution = random_solution(block, &mut rng)?;
    let cells = solution.cells().len();
    if clues > cells {
        return Err(SudokuError::ClueCount { clues, cells });
    }
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(&mut rng);
    let mut puzzle = solution.clone();
    for &i in &order[clues..] {
        puzzle.cells[i] = 0;
    }
    Ok((puzzle, solution))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVED: &str = "281354679973816524564792813139468257825973146647521938492635781356187492718249365";

    #[test]
    fn parse_forms() {
        let b = parse_board(&"0".repeat(81)).unwrap();
        assert_eq!((b.block(), b.clue_count()), (3, 0));
        let b = parse_board(&format!("5{}", ".".repeat(80))).unwrap();
        assert_eq!(b.get(0, 0), 5);
        assert_eq!(parse_board(SOLVED).unwrap().clue_count(), 81);
        assert_eq!(parse_board("1234\n3412\n2143\n4321").unwrap().block(), 2);
        assert!(matches!(parse_board("123"), Err(SudokuError::BadLength { got: 3 })));
        assert!(matches!(parse_board("5123412321434321"), Err(SudokuError::OutOfRange { .. })));
        assert!(matches!(parse_board(&format!("x{}", "0".repeat(80))), Err(SudokuError::BadSymbol { .. })));
        let wide: Vec<String> = (0..256).map(|i| if i == 3 { "16".into() } else { ".".into() }).collect();
        assert_eq!(parse_board(&wide.join(",")).unwrap().get(0, 3), 16);
    }

    #[test]
    fn display_round_trip() {
        let b = parse_board(SOLVED).unwrap();
        assert_eq!(b.to_string(), SOLVED);
        let (p, _) = generate_puzzle(4, 100, 3).unwrap();
        assert_eq!(parse_board(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn indices_round_trip() {
        for v in 0..729 {
            let (r, c, d) = var_triple(9, v);
            assert_eq!(var_index(9, r, c, d), v);
        }
        assert_eq!(var_index(9, 1, 2, 3), 81 + 18 + 2);
    }

    #[test]
    fn full_qubo_shape() {
        let q = full_qubo(3).unwrap();
        assert_eq!(q.n(), 729);
        assert_eq!(q.offset, 324.0);
        assert_eq!(q.get(0, 0), -4.0);
        let q2 = full_qubo(2).unwrap();
        assert_eq!(q2.objective(&[0; 64]).unwrap(), 64.0);
    }

    #[test]
    fn solved_grid_has_zero_objective() {
        let b = parse_board(SOLVED).unwrap();
        for overlap in [PenaltyOverlap::Union, PenaltyOverlap::Sum] {
            let q = full_qubo_with(3, overlap).unwrap();
            let mut z = vec![0u8; 729];
            for r in 0..9 {
                for c in 0..9 {
                    z[var_index(9, r, c, b.get(r, c))] = 1;
                }
            }
            assert_eq!(q.objective(&z).unwrap(), 0.0);
        }
    }

    #[test]
    fn verify_names_the_row() {
        let mut b = parse_board(SOLVED).unwrap();
        assert!(verify(&b).unwrap().is_valid());
        let (x, y) = (b.get(0, 0), b.get(0, 1));
        b.set(0, 0, y);
        b.set(0, 1, x);
        let v = verify(&b).unwrap();
        assert!(!v.is_valid());
        assert!(v.violations.iter().all(|v| !matches!(v.unit, Unit::Row(_))));
        let mut b = parse_board(SOLVED).unwrap();
        let (x, y) = (b.get(0, 0), b.get(1, 0));
        b.set(0, 0, y);
        b.set(1, 0, x);
        let v = verify(&b).unwrap();
        assert!(v.violations.iter().any(|v| v.unit == Unit::Row(0)));
        assert!(matches!(verify(&Board::empty(3).unwrap()), Err(SudokuError::Incomplete { empty: 81 })));
    }

    #[test]
    fn conflicting_clues_are_named() {
        let mut b = Board::empty(3).unwrap();
        b.set(0, 0, 7);
        b.set(4, 0, 7);
        let err = clamp(&b, &full_qubo(3).unwrap()).unwrap_err();
        assert!(matches!(err, SudokuError::Conflict { first: (0, 0), second: (4, 0), digit: 7 }));
    }

    #[test]
    fn clamp_trivial_boards() {
        let q = full_qubo(2).unwrap();
        let (r, m) = clamp(&Board::empty(2).unwrap(), &q).unwrap();
        assert_eq!(r, q);
        assert_eq!((m.c2, m.n_free()), (0.0, 64));
        let full = parse_board("1234341221434321").unwrap();
        let (r, m) = clamp(&full, &q).unwrap();
        assert_eq!(m.n_free(), 0);
        assert_eq!(r.offset, 0.0);
    }

    #[test]
    fn generated_puzzles_are_consistent() {
        for seed in 0..5 {
            let (p, s) = generate_puzzle(3, 24, seed).unwrap();
            assert_eq!(p.clue_count(), 24);
            assert!(verify(&s).unwrap().is_valid());
            for (a, b) in p.cells().iter().zip(s.cells()) {
                assert!(*a == 0 || a == b);
            }
        }
        assert_eq!(generate_puzzle(3, 24, 9).unwrap(), generate_puzzle(3, 24, 9).unwrap());
    }

    #[test]
    fn decode_single_free_cell() {
        let mut b = parse_board(SOLVED).unwrap();
        b.set(8, 8, 0);
        let (_, m) = clamp(&b, &full_qubo(3).unwrap()).unwrap();
        assert_eq!(m.n_free(), 1);
        let down = decode(&SpinConfiguration::new(vec![Spin::Down]), &m, &b).unwrap();
        assert_eq!(down.empty_cells, vec![(8, 8)]);
        let up = decode(&SpinConfiguration::new(vec![Spin::Up]), &m, &b).unwrap();
        assert!(up.is_well_formed());
        assert_eq!(up.board.get(8, 8), 5);
    }
}

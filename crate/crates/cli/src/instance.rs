//! Loading instances of any supported kind as an Ising model.

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use hopsweep::ising::{to_ising, IsingModel, QuboModel};
use hopsweep::maxcut::{self, Graph};
use hopsweep::sudoku;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// `.json` is a QUBO file; a two-number header line is a Biq Mac graph;
    /// anything else is a Sudoku board.
    Auto,
    Sudoku,
    Maxcut,
    Qubo,
}

pub struct Loaded {
    pub model: IsingModel,
    pub graph: Option<Graph>,
}

fn looks_like_biqmac(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| {
            let tokens: Vec<&str> = l.split_whitespace().collect();
            tokens.len() == 2 && tokens.iter().all(|t| t.parse::<usize>().is_ok())
        })
}

pub fn detect(path: &Path, text: &str) -> Kind {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Kind::Qubo
    } else if looks_like_biqmac(text) {
        Kind::Maxcut
    } else {
        Kind::Sudoku
    }
}

pub fn load(path: &Path, kind: Kind) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let kind = if kind == Kind::Auto { detect(path, &text) } else { kind };
    let loaded = match kind {
        Kind::Qubo => {
            let file = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            Loaded { model: to_ising(&QuboModel::from_json(&file)?), graph: None }
        }
        Kind::Maxcut => {
            let g = maxcut::parse_biqmac(&text)?;
            Loaded { model: to_ising(&maxcut::to_qubo(&g)?), graph: Some(g) }
        }
        Kind::Sudoku | Kind::Auto => {
            let board = sudoku::parse_board(&text)?;
            let (reduced, _) = sudoku::clamp(&board, &sudoku::full_qubo(board.block())?)?;
            Loaded { model: to_ising(&reduced), graph: None }
        }
    };
    Ok(loaded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection() {
        let p = Path::new("x.txt");
        assert_eq!(detect(p, "# comment\n4 5\n1 2 1\n"), Kind::Maxcut);
        assert_eq!(detect(p, "53..7....\n6..195...\n"), Kind::Sudoku);
        assert_eq!(detect(Path::new("m.JSON"), "{}"), Kind::Qubo);
    }
}

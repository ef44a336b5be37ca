//! Plain-text grid format.
//!
//! ```text
//! 3 4
//! .*..
//! ....
//! ...*
//! ```
//!
//! Line one is `rows cols`, followed by one line per row. Assignments use
//! `.` and `*`; states use `#` (hidden), `0`-`8`, `F` (flag) and `!` (shown
//! mine). Every line ends with `\n` and no other whitespace is allowed.
//! Pattern files prepend the line `; pattern`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{CellValue, GridDims, GridState, MineAssignment};
use crate::patterns::Pattern;

pub const PATTERN_HEADER: &str = "; pattern";

fn write_header(f: &mut fmt::Formatter<'_>, dims: GridDims) -> fmt::Result {
    writeln!(f, "{} {}", dims.rows, dims.cols)
}

impl fmt::Display for MineAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims = self.dims();
        write_header(f, dims)?;
        let mut line = String::with_capacity(dims.cols + 1);
        for r in 0..dims.rows {
            line.clear();
            for c in 0..dims.cols {
                line.push(if self.is_mine_idx(r * dims.cols + c) { '*' } else { '.' });
            }
            line.push('\n');
            f.write_str(&line)?;
        }
        Ok(())
    }
}

impl fmt::Display for GridState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims = self.dims();
        write_header(f, dims)?;
        let mut line = String::with_capacity(dims.cols + 1);
        for r in 0..dims.rows {
            line.clear();
            for c in 0..dims.cols {
                line.push(match self.get_idx(r * dims.cols + c) {
                    CellValue::Hidden => '#',
                    CellValue::Clue(k) => char::from(b'0' + k),
                    CellValue::Flag => 'F',
                    CellValue::ShownMine => '!',
                });
            }
            line.push('\n');
            f.write_str(&line)?;
        }
        Ok(())
    }
}

/// Splits into `(dims, row lines)` and enforces the framing rules.
fn split_grid(text: &str, first_line: usize) -> Result<(GridDims, Vec<&str>)> {
    if !text.ends_with('\n') {
        return Err(Error::parse(first_line, "missing trailing newline"));
    }
    let body = &text[..text.len() - 1];
    let mut lines = body.split('\n');
    let header = lines.next().ok_or_else(|| Error::parse(first_line, "empty input"))?;
    let mut parts = header.split(' ');
    let (Some(r), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::parse(first_line, "expected \"rows cols\""));
    };
    let parse_dim = |s: &str| -> Result<usize> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(first_line, format!("bad dimension {s:?}")));
        }
        s.parse().map_err(|_| Error::parse(first_line, format!("bad dimension {s:?}")))
    };
    let dims = GridDims::new(parse_dim(r)?, parse_dim(c)?)
        .map_err(|e| Error::parse(first_line, e.to_string()))?;
    let rows: Vec<&str> = lines.collect();
    if rows.len() != dims.rows {
        return Err(Error::parse(
            first_line,
            format!("expected {} rows, found {}", dims.rows, rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dims.cols {
            return Err(Error::parse(
                first_line + 1 + i,
                format!("expected {} columns, found {}", dims.cols, row.len()),
            ));
        }
    }
    Ok((dims, rows))
}

fn parse_assignment(text: &str, first_line: usize) -> Result<MineAssignment> {
    let (dims, rows) = split_grid(text, first_line)?;
    let mut m = MineAssignment::empty(dims);
    for (r, row) in rows.iter().enumerate() {
        for (c, b) in row.bytes().enumerate() {
            match b {
                b'.' => {}
                b'*' => {
                    m.set_idx(r * dims.cols + c);
                }
                other => {
                    return Err(Error::parse(
                        first_line + 1 + r,
                        format!("unexpected character {:?}", other as char),
                    ))
                }
            }
        }
    }
    Ok(m)
}

impl FromStr for MineAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_assignment(s, 1)
    }
}

impl FromStr for GridState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (dims, rows) = split_grid(s, 1)?;
        let mut values = Vec::with_capacity(dims.n());
        for (r, row) in rows.iter().enumerate() {
            for b in row.bytes() {
                values.push(match b {
                    b'#' => CellValue::Hidden,
                    b'0'..=b'8' => CellValue::Clue(b - b'0'),
                    b'F' => CellValue::Flag,
                    b'!' => CellValue::ShownMine,
                    other => {
                        return Err(Error::parse(
                            2 + r,
                            format!("unexpected character {:?}", other as char),
                        ))
                    }
                });
            }
        }
        GridState::from_values(dims, values)
    }
}

/// Pattern file text: the header comment followed by the frame as an assignment.
pub fn format_pattern(p: &Pattern) -> String {
    format!("{PATTERN_HEADER}\n{}", p.to_assignment())
}

pub fn parse_pattern(text: &str) -> Result<Pattern> {
    let rest = text
        .strip_prefix(PATTERN_HEADER)
        .and_then(|r| r.strip_prefix('\n'))
        .ok_or_else(|| Error::parse(1, "missing \"; pattern\" header"))?;
    let m = parse_assignment(rest, 2)?;
    Pattern::from_assignment(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Cell;
    use crate::patterns::canonical_p1_p2;

    #[test]
    fn assignment_text_is_exact() {
        let d = GridDims::new(2, 3).unwrap();
        let m = MineAssignment::from_cells(d, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(m.to_string(), "2 3\n.*.\n..*\n");
        assert_eq!(m.to_string().parse::<MineAssignment>().unwrap(), m);
    }

    #[test]
    fn state_text_round_trips() {
        let text = "2 4\n#012\n8F!#\n";
        let s: GridState = text.parse().unwrap();
        assert_eq!(s.get(Cell::new(1, 0)), CellValue::Clue(8));
        assert_eq!(s.get(Cell::new(1, 2)), CellValue::ShownMine);
        assert_eq!(s.to_string(), text);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "2 3\n...\n...",
            "2 3\n...\n...\n\n",
            "2 3\n... \n...\n",
            "2  3\n...\n...\n",
            "2 3\n...\n..\n",
            "2 3\n...\n.x.\n",
            "0 3\n",
            "2 3 \n...\n...\n",
        ] {
            assert!(bad.parse::<MineAssignment>().is_err(), "{bad:?}");
        }
        assert!("1 2\n9#\n".parse::<GridState>().is_err());
    }

    #[test]
    fn pattern_files() {
        let canon = canonical_p1_p2();
        let text = format_pattern(&canon.p1);
        assert!(text.starts_with("; pattern\n8 8\n........\n........\n..*..*..\n"));
        assert_eq!(parse_pattern(&text).unwrap(), canon.p1);
        assert!(parse_pattern("8 8\n").is_err());
        // a frame violating the empty-ring rule
        let bad = "; pattern\n5 5\n*....\n.....\n..*..\n.....\n.....\n";
        assert!(parse_pattern(bad).is_err());
    }
}

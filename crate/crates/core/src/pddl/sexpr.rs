//! S-expression reader with source positions.

use crate::error::{PlanError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Symbol { text: String, line: usize, col: usize },
    List { items: Vec<SExpr>, line: usize, col: usize },
}

impl SExpr {
    pub fn position(&self) -> (usize, usize) {
        match self {
            SExpr::Symbol { line, col, .. } | SExpr::List { line, col, .. } => (*line, *col),
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Symbol { .. } => None,
        }
    }

    /// Lowercased head symbol of a list.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }

    pub fn error(&self, msg: impl Into<String>) -> PlanError {
        let (line, col) = self.position();
        PlanError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<SExpr> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        match self.chars.peek().copied() {
            None => Err(PlanError::Syntax {
                line,
                col,
                msg: "unexpected end of input".into(),
            }),
            Some(')') => Err(PlanError::Syntax {
                line,
                col,
                msg: "unexpected `)`".into(),
            }),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(PlanError::Syntax {
                                line,
                                col,
                                msg: "unclosed `(`".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
                Ok(SExpr::List { items, line, col })
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c.to_ascii_lowercase());
                    self.bump();
                }
                Ok(SExpr::Symbol { text, line, col })
            }
        }
    }
}

/// Reads exactly one top-level expression. Symbols are lowercased.
pub fn read(text: &str) -> Result<SExpr> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let e = r.expr()?;
    r.skip_trivia();
    if r.chars.peek().is_some() {
        return Err(PlanError::Syntax {
            line: r.line,
            col: r.col,
            msg: "trailing input after top-level expression".into(),
        });
    }
    Ok(e)
}

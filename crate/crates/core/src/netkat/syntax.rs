//! Concrete syntax:
//!
//! ```text
//! choice := seq ( "+[" prob "]" seq )*
//! seq    := atom ( ";" atom )*
//! atom   := "p0!" | "p1!" | "dup" | "(" choice ")" [ "*" ]
//! ```
//!
//! Both operators associate to the left and `;` binds tighter than `+[λ]`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Program {
    Assign0,
    Assign1,
    Dup,
    Seq(Box<Program>, Box<Program>),
    /// `left` with probability `lambda`, `right` otherwise.
    Choice {
        lambda: f64,
        left: Box<Program>,
        right: Box<Program>,
    },
    Star(Box<Program>),
}

impl Program {
    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(lambda: f64, left: Program, right: Program) -> Program {
        Program::Choice {
            lambda,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn star(body: Program) -> Program {
        Program::Star(Box::new(body))
    }

    pub fn contains_star(&self) -> bool {
        match self {
            Program::Assign0 | Program::Assign1 | Program::Dup => false,
            Program::Seq(a, b) => a.contains_star() || b.contains_star(),
            Program::Choice { left, right, .. } => left.contains_star() || right.contains_star(),
            Program::Star(_) => true,
        }
    }

    /// The factors of a (possibly nested) sequential composition, in order.
    pub fn seq_factors(&self) -> Vec<&Program> {
        match self {
            Program::Seq(a, b) => {
                let mut out = a.seq_factors();
                out.extend(b.seq_factors());
                out
            }
            other => vec![other],
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Assign0 => write!(f, "p0!"),
            Program::Assign1 => write!(f, "p1!"),
            Program::Dup => write!(f, "dup"),
            Program::Seq(a, b) => {
                match **a {
                    Program::Choice { .. } => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                // `;` is left-associative, so a right-nested operand needs parentheses
                match **b {
                    Program::Seq(..) | Program::Choice { .. } => write!(f, " ; ({b})"),
                    _ => write!(f, " ; {b}"),
                }
            }
            Program::Choice { lambda, left, right } => match **right {
                Program::Choice { .. } => write!(f, "{left} +[{lambda}] ({right})"),
                _ => write!(f, "{left} +[{lambda}] {right}"),
            },
            Program::Star(body) => write!(f, "({body})*"),
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program> {
    let mut parser = Parser { text, pos: 0 };
    let program = parser.choice()?;
    parser.skip_ws();
    if parser.pos < text.len() {
        return Err(parser.error(&["`;`", "`+[`", "end of input"]));
    }
    Ok(program)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> Error {
        Error::Parse {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn choice(&mut self) -> Result<Program> {
        let mut left = self.seq()?;
        while self.eat("+") {
            if !self.eat("[") {
                return Err(self.error(&["`[`"]));
            }
            let lambda = self.probability()?;
            if !self.eat("]") {
                return Err(self.error(&["`]`"]));
            }
            let right = self.seq()?;
            left = Program::choice(lambda, left, right);
        }
        Ok(left)
    }

    fn seq(&mut self) -> Result<Program> {
        let mut left = self.atom()?;
        while self.eat(";") {
            let right = self.atom()?;
            left = Program::seq(left, right);
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<Program> {
        if self.eat("p0!") {
            return Ok(Program::Assign0);
        }
        if self.eat("p1!") {
            return Ok(Program::Assign1);
        }
        if self.eat("dup") {
            return Ok(Program::Dup);
        }
        if self.eat("(") {
            let body_start = self.pos;
            let inner = self.choice()?;
            if !self.eat(")") {
                return Err(self.error(&["`)`", "`;`", "`+[`"]));
            }
            if self.eat("*") {
                if inner.contains_star() {
                    return Err(Error::Parse {
                        position: body_start,
                        expected: vec!["a star-free program inside `(...)*`".into()],
                    });
                }
                return Ok(Program::star(inner));
            }
            return Ok(inner);
        }
        Err(self.error(&["`p0!`", "`p1!`", "`dup`", "`(`"]))
    }

    fn probability(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+')))
            .unwrap_or(rest.len());
        match rest[..len].parse::<f64>() {
            Ok(v) if (0.0..=1.0).contains(&v) => {
                self.pos += len;
                Ok(v)
            }
            _ => Err(self.error(&["a probability in [0, 1]"])),
        }
    }
}

//! Text form of the logical language.
//!
//! ```text
//! literal := ["~"] rel "(" arg {"," arg} ")"
//! group   := literal {" & " literal} | literal {" | " literal}
//! rule    := group " -> " conj-group
//! theory  := { (literal | rule) "\n" }
//! ```
//!
//! Symbols are `[A-Za-z0-9_]+`. Separators are exactly one space on each
//! side; anything else is a parse error. Serialization is `Display`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::logic::{Atom, Connective, Literal, LogicError, PredicateGroup, Rule, Theory};

/// Parse failure, 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct LfError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor { text, pos: 0, line }
    }

    fn error(&self, message: impl Into<String>) -> LfError {
        LfError { line: self.line, column: self.pos + 1, message: message.into() }
    }

    fn logic_error(&self, err: LogicError) -> LfError {
        self.error(err.to_string())
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), LfError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected {token:?}")))
        }
    }

    fn symbol(&mut self) -> Result<&'a str, LfError> {
        let rest = self.rest();
        let len = rest
            .bytes()
            .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
            .count();
        if len == 0 {
            return Err(self.error("expected a symbol"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn literal(&mut self) -> Result<Literal, LfError> {
        let start = self.pos;
        let negated = self.eat("~");
        let relation = self.symbol()?;
        self.expect("(")?;
        let mut args = vec![self.symbol()?];
        while self.eat(",") {
            args.push(self.symbol()?);
        }
        self.expect(")")?;
        let atom = Atom::new(relation, args).map_err(|e| {
            let mut err = self.logic_error(e);
            err.column = start + 1;
            err
        })?;
        Ok(Literal { atom, negated })
    }

    fn group(&mut self) -> Result<PredicateGroup, LfError> {
        let start = self.pos;
        let mut literals = vec![self.literal()?];
        let mut connective = Connective::Atomic;
        loop {
            let next = if self.rest().starts_with(" & ") {
                Connective::And
            } else if self.rest().starts_with(" | ") {
                Connective::Or
            } else {
                break;
            };
            if connective != Connective::Atomic && connective != next {
                return Err(self.error("mixed '&' and '|' in one group"));
            }
            connective = next;
            self.pos += 3;
            literals.push(self.literal()?);
        }
        PredicateGroup::new(connective, literals).map_err(|e| {
            let mut err = self.logic_error(e);
            err.column = start + 1;
            err
        })
    }

    fn finish(&self) -> Result<(), LfError> {
        if self.pos == self.text.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}

/// Either item of a theory line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Fact(Literal),
    Rule(Rule),
}

fn parse_item(text: &str, line: usize) -> Result<Item, LfError> {
    let mut cur = Cursor::new(text, line);
    let lhs = cur.group()?;
    if cur.eat(" -> ") {
        let rhs_start = cur.pos;
        let rhs = cur.group()?;
        cur.finish()?;
        if rhs.connective() == Connective::Or {
            return Err(LfError {
                line,
                column: rhs_start + 1,
                message: LogicError::DisjunctiveHead.to_string(),
            });
        }
        Ok(Item::Rule(Rule { lhs, rhs }))
    } else {
        cur.finish()?;
        if !lhs.is_atomic() {
            return Err(cur.error("a fact must be a single literal"));
        }
        Ok(Item::Fact(lhs.literals()[0].clone()))
    }
}

impl FromStr for Literal {
    type Err = LfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cur = Cursor::new(s, 1);
        let lit = cur.literal()?;
        cur.finish()?;
        Ok(lit)
    }
}

impl FromStr for PredicateGroup {
    type Err = LfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cur = Cursor::new(s, 1);
        let group = cur.group()?;
        cur.finish()?;
        Ok(group)
    }
}

impl FromStr for Rule {
    type Err = LfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_item(s, 1)? {
            Item::Rule(r) => Ok(r),
            Item::Fact(_) => Err(LfError { line: 1, column: s.len() + 1, message: "expected \" -> \"".into() }),
        }
    }
}

impl FromStr for Theory {
    type Err = LfError;

    /// Facts and rules may interleave in the input; each keeps its relative order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut facts = Vec::new();
        let mut rules = Vec::new();
        if !s.is_empty() && !s.ends_with('\n') {
            let line = s.lines().count();
            return Err(LfError { line, column: s.lines().last().map_or(0, str::len) + 1, message: "missing final newline".into() });
        }
        for (i, text) in s.lines().enumerate() {
            match parse_item(text, i + 1)? {
                Item::Fact(f) => facts.push(f),
                Item::Rule(r) => rules.push(r),
            }
        }
        Theory::new(facts, rules).map_err(|e| LfError { line: 0, column: 0, message: e.to_string() })
    }
}

/// Canonical text of any printable logical object.
pub fn serialize_lf<T: fmt::Display + ?Sized>(x: &T) -> String {
    x.to_string()
}

pub fn parse_lf<T: FromStr<Err = LfError>>(text: &str) -> Result<T, LfError> {
    text.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negated_binary_literal() {
        let lit = Literal::binary("father", "Bob", "John").unwrap().complement();
        assert_eq!(serialize_lf(&lit), "~father(Bob,John)");
        assert_eq!(parse_lf::<Literal>("~father(Bob,John)").unwrap(), lit);
    }

    #[test]
    fn compound_rule_text() {
        let lhs = PredicateGroup::any(vec![
            Literal::unary("green", "Alex").unwrap(),
            Literal::unary("smart", "Bob").unwrap(),
        ])
        .unwrap();
        let rhs = PredicateGroup::all(vec![
            Literal::binary("daughter", "Bob", "Gary").unwrap(),
            Literal::unary("kind", "John").unwrap().complement(),
        ])
        .unwrap();
        let rule = Rule::new(lhs, rhs).unwrap();
        let text = "green(Alex) | smart(Bob) -> daughter(Bob,Gary) & ~kind(John)";
        assert_eq!(serialize_lf(&rule), text);
        assert_eq!(parse_lf::<Rule>(text).unwrap(), rule);
    }

    #[test]
    fn theory_round_trip() {
        let text = "green(Alex)\n~kind(Bob)\ngreen(Alex) & ~kind(Bob) -> father(Bob,Alex)\n";
        let t: Theory = text.parse().unwrap();
        assert_eq!(t.facts.len(), 2);
        assert_eq!(t.rules.len(), 1);
        assert_eq!(t.to_string(), text);
        assert_eq!("".parse::<Theory>().unwrap(), Theory::default());
    }

    #[test]
    fn errors_carry_position() {
        let err = "green(Alex) -> kind(Bob) | red(Bob)".parse::<Rule>().unwrap_err();
        assert_eq!((err.line, err.column), (1, 16));

        let err = "green(Alex)  -> kind(Bob)".parse::<Rule>().unwrap_err();
        assert_eq!(err.column, 12);

        let err = "green(Alex)\nkind(Bob) ->\n".parse::<Theory>().unwrap_err();
        assert_eq!(err.line, 2);

        let err = "green(Alex,Bob,Carl)".parse::<Literal>().unwrap_err();
        assert!(err.message.contains("1 or 2"));

        let err = "a(x) & b(x) | c(x) -> d(x)".parse::<Rule>().unwrap_err();
        assert!(err.message.contains("mixed"));

        assert!("green(Alex)".parse::<Theory>().is_err());
        assert!("green(Alex) & kind(Bob)\n".parse::<Theory>().is_err());
    }
}

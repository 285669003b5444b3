use crate::error::{Error, Result};
use crate::predicates::{ConcretePredicate, DatePart, PredicateArgs, PredicateKind, Provenance};

use super::{Branch, Clause, Dnf, Literal, Rule};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        match c {
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '"' => {
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    let Some(&ch) = chars.get(i) else {
                        return Err(syntax(start_line, start_col, "unterminated string"));
                    };
                    i += 1;
                    col += 1;
                    match ch {
                        '"' => break,
                        '\\' => {
                            let esc = chars
                                .get(i)
                                .ok_or_else(|| syntax(line, col, "dangling escape"))?;
                            s.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                other => *other,
                            });
                            i += 1;
                            col += 1;
                        }
                        '\n' => return Err(syntax(start_line, start_col, "newline in string")),
                        other => s.push(other),
                    }
                }
                push(&mut out, Tok::Str(s));
                continue;
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v: f64 = s
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| syntax(start_line, start_col, format!("bad number `{s}`")))?;
                push(&mut out, Tok::Number(v));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                push(&mut out, Tok::Ident(chars[i..j].iter().collect()));
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        syntax(t.line, t.column, message)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_keyword(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        let mut branches = Vec::new();
        while self.peek().tok != Tok::Eof {
            self.expect_keyword("IF")?;
            let dnf = self.dnf()?;
            self.expect_keyword("THEN")?;
            let t = self.next();
            let format = match t.tok {
                Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => v as u32,
                _ => return Err(syntax(t.line, t.column, "expected a format id")),
            };
            branches.push(Branch { dnf, format });
        }
        if branches.is_empty() {
            return Err(self.err("expected `IF`"));
        }
        Rule::new(branches)
    }

    fn dnf(&mut self) -> Result<Dnf> {
        let mut clauses = vec![self.clause()?];
        while self.is_keyword("OR") {
            self.next();
            clauses.push(self.clause()?);
        }
        Dnf::new(clauses)
    }

    fn clause(&mut self) -> Result<Clause> {
        if self.peek().tok == Tok::LParen {
            self.next();
            let c = self.conjunction()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(c)
        } else {
            self.conjunction()
        }
    }

    fn conjunction(&mut self) -> Result<Clause> {
        let mut lits = vec![self.literal()?];
        while self.is_keyword("AND") {
            self.next();
            lits.push(self.literal()?);
        }
        Ok(lits)
    }

    fn literal(&mut self) -> Result<Literal> {
        let negated = if self.is_keyword("NOT") {
            self.next();
            true
        } else {
            false
        };
        Ok(Literal {
            predicate: self.predicate()?,
            negated,
        })
    }

    fn predicate(&mut self) -> Result<ConcretePredicate> {
        let t = self.next();
        let Tok::Ident(name) = t.tok else {
            return Err(syntax(t.line, t.column, "expected a predicate"));
        };
        let kind = PredicateKind::from_name(&name).ok_or(Error::UnknownPredicate(name.clone()))?;
        self.expect(Tok::LParen, "`(`")?;
        if !matches!(&self.peek().tok, Tok::Ident(s) if s == "c") {
            return Err(self.err("first argument must be `c`"));
        }
        self.next();
        let mut args = Vec::new();
        while self.peek().tok == Tok::Comma {
            self.next();
            let a = self.next();
            match a.tok {
                Tok::Number(_) | Tok::Str(_) | Tok::Ident(_) => args.push(a),
                _ => return Err(syntax(a.line, a.column, "expected an argument")),
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        build_predicate(kind, &name, &args)
    }
}

fn build_predicate(kind: PredicateKind, name: &str, args: &[Token]) -> Result<ConcretePredicate> {
    let arity = |expected: &str| Error::Arity {
        name: name.to_string(),
        expected: expected.to_string(),
        found: args.len(),
    };
    let num = |t: &Token| match t.tok {
        Tok::Number(v) => Ok(v),
        _ => Err(syntax(t.line, t.column, "expected a number")),
    };
    let part = |t: &Token| match &t.tok {
        Tok::Ident(s) => DatePart::from_name(s)
            .ok_or_else(|| syntax(t.line, t.column, format!("unknown date part `{s}`"))),
        _ => Err(syntax(t.line, t.column, "expected a date part")),
    };
    let (parsed_args, date_part, ci) = if kind.is_text() {
        if args.is_empty() || args.len() > 2 {
            return Err(arity("1 or 2"));
        }
        let Tok::Str(s) = &args[0].tok else {
            return Err(syntax(args[0].line, args[0].column, "expected a string"));
        };
        let ci = match args.get(1) {
            None => false,
            Some(Token {
                tok: Tok::Ident(f), ..
            }) if f == "ci" => true,
            Some(t) => return Err(syntax(t.line, t.column, "expected `ci`")),
        };
        (PredicateArgs::Text(s.clone()), None, ci)
    } else if kind == PredicateKind::Between {
        if args.len() < 2 || args.len() > 3 {
            return Err(arity("2 or 3"));
        }
        let p = args.get(2).map(part).transpose()?;
        (PredicateArgs::Range(num(&args[0])?, num(&args[1])?), p, false)
    } else {
        if args.is_empty() || args.len() > 2 {
            return Err(arity("1 or 2"));
        }
        let p = args.get(1).map(part).transpose()?;
        (PredicateArgs::Number(num(&args[0])?), p, false)
    };
    ConcretePredicate::new(kind, date_part, parsed_args, ci, Provenance::External)
}

pub(super) fn parse_rule(text: &str) -> Result<Rule> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    p.rule()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(text: &str) {
        let rule = parse_rule(text).unwrap();
        assert_eq!(rule.to_string(), text);
    }

    #[test]
    fn round_trips() {
        round_trip("IF less(c, 5) THEN 1");
        round_trip(r#"IF contains(c, "in") AND NOT endsWith(c, "w") THEN 2"#);
        round_trip("IF (greater(c, 2, month)) OR (between(c, -1.5, 0.0000001)) THEN 3\nIF equals(c, \"a\\\"b\", ci) THEN 4");
    }

    #[test]
    fn between_order_error() {
        let err = parse_rule("IF between(c, 5, 2) THEN 1").unwrap_err();
        assert!(err.to_string().contains("between requires n1 < n2"), "{err}");
    }

    #[test]
    fn unknown_predicate() {
        assert_eq!(
            parse_rule("IF bigger(c, 5) THEN 1").unwrap_err(),
            Error::UnknownPredicate("bigger".into())
        );
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            parse_rule("IF less(c) THEN 1").unwrap_err(),
            Error::Arity { found: 0, .. }
        ));
        assert!(matches!(
            parse_rule("IF between(c, 1) THEN 1").unwrap_err(),
            Error::Arity { found: 1, .. }
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_rule("IF less(c, 5)\nTHEN x").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 2,
                column: 6,
                message: "expected a format id".into()
            }
        );
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_rule("IF   less( c ,5 )   THEN 1").unwrap();
        assert_eq!(a.to_string(), "IF less(c, 5) THEN 1");
    }
}

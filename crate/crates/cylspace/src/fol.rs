//! First-order formulas over relational signatures with variables `v0, v1, …`.
//!
//! Parsing desugars `|`, `->` and `forall` into the core connectives
//! `!`, `&`, `exists`:
//! `φ | ψ ≡ !(!φ & !ψ)`, `φ -> ψ ≡ !(φ & !ψ)`, `forall v φ ≡ !exists v !φ`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{CylError, Result};

/// Relation symbols with their arities. Equality is built in.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    relations: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(relations: Vec<(String, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, arity) in &relations {
            if !seen.insert(name.clone()) {
                return Err(CylError::Signature(format!("duplicate relation `{name}`")));
            }
            if *arity == 0 {
                return Err(CylError::Signature(format!("relation `{name}` has arity 0")));
            }
        }
        Ok(Signature { relations })
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }
}

/// Formula AST over the core connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atomic(String, Vec<usize>),
    Equal(usize, usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Exists(usize, Box<Formula>),
}

impl Formula {
    pub fn atomic(name: &str, args: &[usize]) -> Formula {
        Formula::Atomic(name.to_string(), args.to_vec())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn exists(i: usize, f: Formula) -> Formula {
        Formula::Exists(i, Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn forall(i: usize, f: Formula) -> Formula {
        Formula::not(Formula::exists(i, Formula::not(f)))
    }

    /// Largest variable index occurring anywhere (free or bound).
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Formula::Atomic(_, args) => args.iter().copied().max(),
            Formula::Equal(i, j) => Some(*i.max(j)),
            Formula::Not(f) => f.max_var(),
            Formula::And(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
            Formula::Exists(i, f) => Some(f.max_var().map_or(*i, |m| m.max(*i))),
        }
    }

    fn all_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Formula::Atomic(_, args) => out.extend(args.iter().copied()),
            Formula::Equal(i, j) => {
                out.insert(*i);
                out.insert(*j);
            }
            Formula::Not(f) => f.all_vars(out),
            Formula::And(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            Formula::Exists(i, f) => {
                out.insert(*i);
                f.all_vars(out);
            }
        }
    }

    /// Checks relation names and arities against a signature.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Formula::Atomic(name, args) => match sig.arity(name) {
                None => Err(CylError::UnknownRelation(name.clone())),
                Some(a) if a != args.len() => Err(CylError::Arity {
                    name: name.clone(),
                    expected: a,
                    found: args.len(),
                }),
                Some(_) => Ok(()),
            },
            Formula::Equal(..) => Ok(()),
            Formula::Not(f) | Formula::Exists(_, f) => f.check(sig),
            Formula::And(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
        }
    }

    /// Number of connective and quantifier nodes along the deepest branch.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atomic(..) | Formula::Equal(..) => 0,
            Formula::Not(f) | Formula::Exists(_, f) => 1 + f.depth(),
            Formula::And(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atomic(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "v{a}")?;
                }
                write!(f, ")")
            }
            Formula::Equal(i, j) => write!(f, "v{i} = v{j}"),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atomic(..) | Formula::Not(_) => write!(f, "!{inner}"),
                _ => write!(f, "!({inner})"),
            },
            Formula::And(a, b) => {
                write_operand(f, a)?;
                write!(f, " & ")?;
                write_operand(f, b)
            }
            Formula::Exists(i, inner) => write!(f, "exists v{i} {inner}"),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    match g {
        Formula::Atomic(..) | Formula::Not(_) => write!(f, "{g}"),
        _ => write!(f, "({g})"),
    }
}

/// Renders a formula in the concrete grammar; `parse_formula` inverts it.
pub fn render(f: &Formula) -> String {
    f.to_string()
}

/// Free variables of a formula.
pub fn free_vars(f: &Formula) -> BTreeSet<usize> {
    match f {
        Formula::Atomic(_, args) => args.iter().copied().collect(),
        Formula::Equal(i, j) => [*i, *j].into_iter().collect(),
        Formula::Not(g) => free_vars(g),
        Formula::And(a, b) => {
            let mut s = free_vars(a);
            s.extend(free_vars(b));
            s
        }
        Formula::Exists(i, g) => {
            let mut s = free_vars(g);
            s.remove(i);
            s
        }
    }
}

/// Capture-avoiding replacement of free `v_from` by `v_to`.
///
/// A bound variable that would capture `v_to` is renamed to the smallest
/// index below `budget` not occurring in its scope.
pub fn substitute_var(f: &Formula, from: usize, to: usize, budget: usize) -> Result<Formula> {
    if from == to {
        return Ok(f.clone());
    }
    match f {
        Formula::Atomic(name, args) => Ok(Formula::Atomic(
            name.clone(),
            args.iter().map(|&a| if a == from { to } else { a }).collect(),
        )),
        Formula::Equal(i, j) => Ok(Formula::Equal(
            if *i == from { to } else { *i },
            if *j == from { to } else { *j },
        )),
        Formula::Not(g) => Ok(Formula::not(substitute_var(g, from, to, budget)?)),
        Formula::And(a, b) => Ok(Formula::and(
            substitute_var(a, from, to, budget)?,
            substitute_var(b, from, to, budget)?,
        )),
        Formula::Exists(i, g) => {
            if *i == from || !free_vars(g).contains(&from) {
                return Ok(f.clone());
            }
            if *i != to {
                return Ok(Formula::exists(*i, substitute_var(g, from, to, budget)?));
            }
            let mut used = BTreeSet::new();
            g.all_vars(&mut used);
            used.insert(from);
            used.insert(to);
            let fresh = (0..budget).find(|k| !used.contains(k)).ok_or(
                CylError::FreshIndexExhaustion { required: used.len() + 1, available: budget },
            )?;
            let renamed = substitute_var(g, *i, fresh, budget)?;
            Ok(Formula::exists(fresh, substitute_var(&renamed, from, to, budget)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(usize),
    LParen,
    RParen,
    Comma,
    Eq,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Exists,
    Forall,
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut col) = (1usize, 1usize);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let (l0, c0) = (line, col);
        let err = |msg: String| CylError::Syntax { line: l0, col: c0, msg };
        if !c.is_ascii() {
            return Err(err(format!("non-ASCII character `{c}`")));
        }
        if c == '\n' {
            line += 1;
            col = 1;
            k += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            col += 1;
            k += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '!' => Some(Tok::Bang),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Lexed { tok, line: l0, col: c0 });
            col += 1;
            k += 1;
            continue;
        }
        if c == '-' {
            if chars.get(k + 1) == Some(&'>') {
                out.push(Lexed { tok: Tok::Arrow, line: l0, col: c0 });
                col += 2;
                k += 2;
                continue;
            }
            return Err(err("expected `->`".into()));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            let word: String = chars[start..k].iter().collect();
            col += k - start;
            let tok = if word == "exists" {
                Tok::Exists
            } else if word == "forall" {
                Tok::Forall
            } else if word.len() > 1
                && word.starts_with('v')
                && word[1..].chars().all(|d| d.is_ascii_digit())
            {
                let idx = word[1..]
                    .parse::<usize>()
                    .map_err(|_| err(format!("variable index too large in `{word}`")))?;
                Tok::Var(idx)
            } else {
                Tok::Ident(word)
            };
            out.push(Lexed { tok, line: l0, col: c0 });
            continue;
        }
        return Err(err(format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    sig: &'a Signature,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |l| (l.line, l.col))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(CylError::Syntax { line, col, msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn var(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Var(i)) => {
                let i = *i;
                self.pos += 1;
                Ok(i)
            }
            _ => self.fail("expected a variable `vN`"),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Exists) | Some(Tok::Forall) => {
                let universal = self.peek() == Some(&Tok::Forall);
                self.pos += 1;
                let v = self.var()?;
                let body = self.formula()?;
                Ok(if universal { Formula::forall(v, body) } else { Formula::exists(v, body) })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Var(_)) => {
                let i = self.var()?;
                self.expect(Tok::Eq, "`=`")?;
                let j = self.var()?;
                Ok(Formula::Equal(i, j))
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                let Some(arity) = self.sig.arity(&name) else {
                    return Err(CylError::UnknownRelation(name));
                };
                self.pos += 1;
                self.expect(Tok::LParen, "`(`")?;
                let mut args = vec![self.var()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.var()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != arity {
                    return Err(CylError::Arity { name, expected: arity, found: args.len() });
                }
                Ok(Formula::Atomic(name, args))
            }
            Some(_) => self.fail("unexpected token"),
            None => self.fail("unexpected end of input"),
        }
    }
}

/// Parses the concrete grammar and desugars derived connectives.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    let toks = lex(text)?;
    let lines: Vec<&str> = text.split('\n').collect();
    let end = (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1);
    let mut p = Parser { toks, pos: 0, sig, end };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new(vec![("E".into(), 2), ("P".into(), 1)]).unwrap()
    }

    #[test]
    fn parses_atoms() {
        assert_eq!(parse_formula("E(v0,v1)", &sig()).unwrap(), Formula::atomic("E", &[0, 1]));
        assert_eq!(parse_formula("v0 = v0", &sig()).unwrap(), Formula::Equal(0, 0));
    }

    #[test]
    fn desugars_forall_and_implication() {
        let f = parse_formula("forall v2 (E(v0,v2) -> v2 = v1)", &sig()).unwrap();
        let hand = Formula::Not(Box::new(Formula::Exists(
            2,
            Box::new(Formula::Not(Box::new(Formula::Not(Box::new(Formula::And(
                Box::new(Formula::atomic("E", &[0, 2])),
                Box::new(Formula::Not(Box::new(Formula::Equal(2, 1)))),
            )))))),
        )));
        assert_eq!(f, hand);
    }

    #[test]
    fn precedence_and_associativity() {
        let s = sig();
        let f = parse_formula("P(v0) | P(v1) & P(v2)", &s).unwrap();
        let g = Formula::or(
            Formula::atomic("P", &[0]),
            Formula::and(Formula::atomic("P", &[1]), Formula::atomic("P", &[2])),
        );
        assert_eq!(f, g);
        let f = parse_formula("P(v0) -> P(v1) -> P(v2)", &s).unwrap();
        let g = Formula::implies(
            Formula::atomic("P", &[0]),
            Formula::implies(Formula::atomic("P", &[1]), Formula::atomic("P", &[2])),
        );
        assert_eq!(f, g);
        let f = parse_formula("P(v0) & P(v1) & P(v2)", &s).unwrap();
        let g = Formula::and(
            Formula::and(Formula::atomic("P", &[0]), Formula::atomic("P", &[1])),
            Formula::atomic("P", &[2]),
        );
        assert_eq!(f, g);
        let f = parse_formula("exists v0 P(v0) & P(v1)", &s).unwrap();
        let g = Formula::exists(
            0,
            Formula::and(Formula::atomic("P", &[0]), Formula::atomic("P", &[1])),
        );
        assert_eq!(f, g);
    }

    #[test]
    fn errors_carry_positions() {
        let s = sig();
        match parse_formula("E(v0,\n  v1", &s) {
            Err(CylError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_formula("Q(v0)", &s), Err(CylError::UnknownRelation("Q".into())));
        assert!(matches!(parse_formula("E(v0)", &s), Err(CylError::Arity { .. })));
        assert!(matches!(parse_formula("E(v0,v1) &", &s), Err(CylError::Syntax { .. })));
    }

    #[test]
    fn free_variable_examples() {
        assert_eq!(free_vars(&Formula::Equal(0, 1)), [0, 1].into());
        assert_eq!(free_vars(&Formula::exists(1, Formula::atomic("E", &[0, 1]))), [0].into());
        assert!(free_vars(&Formula::exists(0, Formula::Equal(0, 0))).is_empty());
    }

    #[test]
    fn substitution_examples() {
        let e = Formula::atomic("E", &[0, 1]);
        assert_eq!(substitute_var(&e, 0, 2, 3).unwrap(), Formula::atomic("E", &[2, 1]));
        let f = Formula::exists(1, Formula::Equal(0, 1));
        assert_eq!(substitute_var(&f, 0, 0, 3).unwrap(), f);
        assert_eq!(
            substitute_var(&f, 0, 1, 3).unwrap(),
            Formula::exists(2, Formula::Equal(1, 2))
        );
        assert!(matches!(
            substitute_var(&f, 0, 1, 2),
            Err(CylError::FreshIndexExhaustion { .. })
        ));
    }

    #[test]
    fn render_round_trips() {
        let s = sig();
        for text in [
            "E(v0,v1)",
            "!(E(v0,v1) & v1 = v2)",
            "exists v1 (E(v0,v1) | !P(v1))",
            "forall v0 exists v1 E(v0,v1)",
            "!!P(v0)",
        ] {
            let f = parse_formula(text, &s).unwrap();
            assert_eq!(parse_formula(&render(&f), &s).unwrap(), f, "{text}");
        }
    }
}

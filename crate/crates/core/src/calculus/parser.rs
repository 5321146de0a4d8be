use super::ast::{Arg, Atom, CalculusQuery, Formula, ObjectSet, Quantifier, Target, TreePred, VarPath};
use super::CalculusError;
use crate::model::{CmpOp, DeweyCode, Value};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Dewey(DeweyCode),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const KEYWORDS: [&str; 10] = ["and", "or", "not", "in", "forall", "exists", "union", "intersect", "true", "false"];

const SYMBOLS: [&str; 16] = ["->", "!=", "<>", "<=", ">=", "{", "}", "(", ")", "[", "]", ",", "|", ":", ".", "="];

fn unicode_alias(c: char) -> Option<Tok> {
    Some(match c {
        '∈' => Tok::Ident("in".into()),
        '∧' => Tok::Ident("and".into()),
        '∨' => Tok::Ident("or".into()),
        '¬' => Tok::Ident("not".into()),
        '∀' => Tok::Ident("forall".into()),
        '∃' => Tok::Ident("exists".into()),
        '∪' => Tok::Ident("union".into()),
        '∩' => Tok::Ident("intersect".into()),
        '→' => Tok::Sym("->"),
        '≠' => Tok::Sym("!="),
        '≤' => Tok::Sym("<="),
        '≥' => Tok::Sym(">="),
        _ => return None,
    })
}

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> CalculusError {
    CalculusError::Syntax { line, col, expected: expected.into() }
}

fn lex(src: &str) -> Result<Vec<Token>, CalculusError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
        } else if let Some(tok) = unicode_alias(c) {
            push(&mut out, tok);
            advance(&mut i, &mut line, &mut col, 1);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            if word == "dewey" && chars.get(j) == Some(&'"') {
                let (text, end) = string_body(&chars, j + 1).ok_or_else(|| syntax(tl, tc, "a closing `\"`"))?;
                let code = text.parse::<DeweyCode>().map_err(|_| syntax(tl, tc, "a Dewey code such as \"1.2\""))?;
                push(&mut out, Tok::Dewey(code));
                { let n = end - i; advance(&mut i, &mut line, &mut col, n); }
            } else {
                push(&mut out, Tok::Ident(word));
                { let n = j - i; advance(&mut i, &mut line, &mut col, n); }
            }
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let is_float = chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(char::is_ascii_digit);
            if is_float {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| syntax(tl, tc, "a number"))?)
            } else {
                Tok::Int(text.parse().map_err(|_| syntax(tl, tc, "an integer in range"))?)
            };
            push(&mut out, tok);
            { let n = j - i; advance(&mut i, &mut line, &mut col, n); }
        } else if c == '"' {
            let (text, end) = string_body(&chars, i + 1).ok_or_else(|| syntax(tl, tc, "a closing `\"`"))?;
            push(&mut out, Tok::Str(text));
            { let n = end - i; advance(&mut i, &mut line, &mut col, n); }
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMBOLS
                .iter()
                .chain(&["<", ">"])
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| syntax(tl, tc, format!("a token, found `{c}`")))?;
            push(&mut out, Tok::Sym(if *sym == "<>" { "!=" } else { sym }));
            advance(&mut i, &mut line, &mut col, sym.len());
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Contents of a string literal starting after its opening quote, and the
/// index just past the closing quote.
fn string_body(chars: &[char], mut i: usize) -> Option<(String, usize)> {
    let mut s = String::new();
    while i < chars.len() {
        match chars[i] {
            '"' => return Some((s, i + 1)),
            '\\' if i + 1 < chars.len() => {
                s.push(chars[i + 1]);
                i += 2;
            }
            c => {
                s.push(c);
                i += 1;
            }
        }
    }
    None
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn error(&self, expected: impl Into<String>) -> CalculusError {
        let t = &self.toks[self.pos];
        syntax(t.line, t.col, expected)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.at_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), CalculusError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("`{s}`")))
        }
    }

    fn name(&mut self, what: &str) -> Result<String, CalculusError> {
        match self.peek() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => Err(self.error(what.to_string())),
        }
    }

    fn var(&mut self) -> Result<String, CalculusError> {
        if matches!(self.peek(), Tok::Ident(w) if w.starts_with('_')) {
            return Err(self.error("a variable name not starting with `_`"));
        }
        self.name("a variable")
    }

    fn query(&mut self) -> Result<CalculusQuery, CalculusError> {
        self.expect_sym("{")?;
        let mut targets = vec![self.target()?];
        while self.eat_sym(",") {
            targets.push(self.target()?);
        }
        self.expect_sym("|")?;
        let body = self.formula()?;
        self.expect_sym("}")?;
        self.end()?;
        Ok(CalculusQuery { targets, body })
    }

    fn target(&mut self) -> Result<Target, CalculusError> {
        if self.eat_sym("(") {
            let mut vars = vec![self.var()?];
            while self.eat_sym(",") {
                vars.push(self.var()?);
            }
            self.expect_sym(")")?;
            Ok(Target::Tuple(vars))
        } else {
            Ok(Target::Var(self.var()?))
        }
    }

    fn end(&self) -> Result<(), CalculusError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.error("end of input")),
        }
    }

    fn formula(&mut self) -> Result<Formula, CalculusError> {
        let lhs = self.disj()?;
        if self.eat_sym("->") {
            Ok(Formula::implies(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self) -> Result<Formula, CalculusError> {
        let mut f = self.conj()?;
        while self.eat_kw("or") {
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, CalculusError> {
        let mut f = self.unary()?;
        while self.eat_kw("and") || self.eat_sym(",") {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, CalculusError> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.unary()?));
        }
        for q in [Quantifier::ForAll, Quantifier::Exists] {
            if self.eat_kw(q.keyword()) {
                let var = self.var()?;
                let range = if self.eat_kw("in") { Some(self.object_set()?) } else { None };
                self.expect_sym(":")?;
                let body = self.unary()?;
                return Ok(Formula::quant(q, var, range, body));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, CalculusError> {
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if self.eat_kw("true") {
            return Ok(Formula::Const(true));
        }
        if self.eat_kw("false") {
            return Ok(Formula::Const(false));
        }
        if let Tok::Ident(w) = self.peek().clone() {
            let call = matches!(self.peek_at(1), Tok::Sym("("));
            let bracket = matches!(self.peek_at(1), Tok::Sym("["));
            if let (Some(pred), true) = (TreePred::from_keyword(&w), call) {
                self.bump();
                let (left, right) = self.pair()?;
                return Ok(Formula::Atom(Atom::Tree { pred, left, right }));
            }
            if (w == "reach" || w == "nhop") && bracket {
                self.bump();
                self.bump();
                let edges = self.name("an edge object")?;
                let hops = if w == "nhop" {
                    self.expect_sym(",")?;
                    match self.peek() {
                        Tok::Int(n) if *n >= 1 => {
                            let n = *n;
                            self.bump();
                            Some(n)
                        }
                        _ => return Err(self.error("a hop count of at least 1")),
                    }
                } else {
                    None
                };
                self.expect_sym("]")?;
                let (left, right) = self.pair()?;
                return Ok(Formula::Atom(Atom::Reach { edges, hops, left, right }));
            }
            if !KEYWORDS.contains(&w.as_str()) {
                let left = self.var_path()?;
                if self.at_kw("in") {
                    if !left.is_bare() {
                        return Err(self.error("a comparison operator"));
                    }
                    self.bump();
                    let set = self.object_set()?;
                    return Ok(Formula::Atom(Atom::Range { var: left.var, set }));
                }
                let op = self.cmp_op()?;
                let right = self.arg()?;
                return Ok(Formula::Atom(Atom::Compare { left: Arg::Path(left), op, right }));
            }
        }
        if let Some(c) = self.literal() {
            let op = self.cmp_op()?;
            let right = self.arg()?;
            return Ok(Formula::Atom(Atom::Compare { left: Arg::Const(c), op, right }));
        }
        Err(self.error("a term, quantifier, `not` or `(`"))
    }

    fn pair(&mut self) -> Result<(VarPath, VarPath), CalculusError> {
        self.expect_sym("(")?;
        let a = self.var_path()?;
        self.expect_sym(",")?;
        let b = self.var_path()?;
        self.expect_sym(")")?;
        Ok((a, b))
    }

    fn var_path(&mut self) -> Result<VarPath, CalculusError> {
        let var = self.var()?;
        let mut path = Vec::new();
        while self.eat_sym(".") {
            path.push(self.name("an object name after `.`")?);
        }
        Ok(VarPath { var, path })
    }

    fn literal(&mut self) -> Option<Value> {
        let v = match self.peek() {
            Tok::Int(n) => Value::Int(*n),
            Tok::Float(x) => Value::Float(*x),
            Tok::Str(s) => Value::Text(s.clone()),
            Tok::Dewey(d) => Value::Dewey(d.clone()),
            _ => return None,
        };
        self.bump();
        Some(v)
    }

    fn arg(&mut self) -> Result<Arg, CalculusError> {
        if let Some(v) = self.literal() {
            return Ok(Arg::Const(v));
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            return Ok(Arg::Path(self.var_path()?));
        }
        Err(self.error("a variable path or a literal"))
    }

    fn cmp_op(&mut self) -> Result<CmpOp, CalculusError> {
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Err(self.error("a comparison operator or `in`")),
        };
        self.bump();
        Ok(op)
    }

    fn object_set(&mut self) -> Result<ObjectSet, CalculusError> {
        let mut s = self.object_atom()?;
        loop {
            if self.eat_kw("union") {
                s = ObjectSet::Union(Box::new(s), Box::new(self.object_atom()?));
            } else if self.eat_kw("intersect") {
                s = ObjectSet::Intersect(Box::new(s), Box::new(self.object_atom()?));
            } else {
                return Ok(s);
            }
        }
    }

    fn object_atom(&mut self) -> Result<ObjectSet, CalculusError> {
        if self.eat_sym("(") {
            let s = self.object_set()?;
            self.expect_sym(")")?;
            Ok(s)
        } else {
            Ok(ObjectSet::Name(self.name("an object name")?))
        }
    }
}

/// Parse query text without consulting a schema.
pub fn parse_query_syntax(src: &str) -> Result<CalculusQuery, CalculusError> {
    Parser { toks: lex(src)?, pos: 0 }.query()
}

/// Parse a bare formula, as used for safety classification.
pub fn parse_formula(src: &str) -> Result<Formula, CalculusError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let f = p.formula()?;
    p.end()?;
    Ok(f)
}

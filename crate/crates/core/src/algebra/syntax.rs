//! Text form of algebra plans.
//!
//! Operators are written prefix with parenthesised arguments:
//!
//! ```text
//! map(base(OrderLine), path(Product, PName))
//! select(base(SC), eq(path(student, Gender), "Male"))
//! divide(base(SC), [course], map(base(Course), path()), [Course])
//! lim(cat([base(Student) as s, base(Gender) as g], [morph(path(Gender), 0, 1)]))
//! ```
//!
//! Functions: `path(O1, ..., On)`, `compose(m1, ..., mn)`, `product_of(F, G)`,
//! `comp(c)` / `comp(c, F)` and `table(name, [Sort, ...], [(args) -> (values), ...])`.
//! Comparisons: `eq`, `ne`, `lt`, `gt`, `le`, `ge`. Literals: integers, floats,
//! double-quoted strings and Dewey codes written `dewey"1.2"`.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::sync::Arc;

use super::{AlgebraError, AlgebraExpr, CatExpr, CatObject, Column, Condition, FunctionExpr, MorphismDecl, Operand, TableFn, TreeAxis};
use crate::model::{CmpOp, DeweyCode, Value};

use AlgebraExpr as E;

fn literal_text(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(x) => format!("{x:?}"),
        Value::Text(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        Value::Dewey(d) => format!("dewey\"{}\"", if d.is_root() { String::new() } else { d.to_string() }),
        Value::Tuple(fields) => {
            format!("({})", fields.iter().map(|(_, v)| literal_text(v)).collect::<Vec<_>>().join(", "))
        }
    }
}

fn tuple_text(vs: &[Value]) -> String {
    format!("({})", vs.iter().map(literal_text).collect::<Vec<_>>().join(", "))
}

pub fn function_text(f: &FunctionExpr) -> String {
    match f {
        FunctionExpr::Path(hops) => format!("path({})", hops.join(", ")),
        FunctionExpr::Compose(names) => format!("compose({})", names.join(", ")),
        FunctionExpr::ProductOf(a, b) => format!("product_of({}, {})", function_text(a), function_text(b)),
        FunctionExpr::ComponentThen(c, rest) if rest.is_identity() => format!("comp({c})"),
        FunctionExpr::ComponentThen(c, rest) => format!("comp({c}, {})", function_text(rest)),
        FunctionExpr::Table(t) => {
            let sorts: Vec<&str> = t.output.iter().map(|c| c.sort.as_deref().unwrap_or("_")).collect();
            let entries: Vec<String> =
                t.mapping.iter().map(|(k, v)| format!("{} -> {}", tuple_text(k), tuple_text(v))).collect();
            format!("table({}, [{}], [{}])", t.name, sorts.join(", "), entries.join(", "))
        }
    }
}

fn operand_text(o: &Operand) -> String {
    match o {
        Operand::Fn(f) => function_text(f),
        Operand::Const(v) => literal_text(v),
    }
}

pub fn condition_text(c: &Condition) -> String {
    format!("{}({}, {})", c.op.keyword(), operand_text(&c.left), operand_text(&c.right))
}

fn decls_text(ms: &[MorphismDecl]) -> String {
    let parts: Vec<String> = ms.iter().map(|m| format!("morph({}, {}, {})", function_text(&m.func), m.src, m.dst)).collect();
    format!("[{}]", parts.join(", "))
}

fn cat_text(c: &CatExpr) -> String {
    let objs: Vec<String> = c
        .objects
        .iter()
        .map(|o| match &o.alias {
            Some(a) => format!("{} as {a}", o.expr),
            None => o.expr.to_string(),
        })
        .collect();
    format!("cat([{}], {})", objs.join(", "), decls_text(&c.morphisms))
}

impl fmt::Display for AlgebraExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = self.keyword();
        match self {
            E::Base(n) => write!(f, "base({n})"),
            E::Map(c, func) => write!(f, "map({c}, {})", function_text(func)),
            E::Project(c, cols) => write!(f, "project({c}, [{}])", cols.join(", ")),
            E::Select(c, cond) => write!(f, "select({c}, {})", condition_text(cond)),
            E::Union(l, r) | E::Intersect(l, r) | E::Difference(l, r) | E::Product(l, r) | E::Tree(_, l, r) => {
                write!(f, "{kw}({l}, {r})")
            }
            E::Divide { left, a, right, b } => write!(f, "divide({left}, [{}], {right}, [{}])", a.join(", "), b.join(", ")),
            E::GetReach(s, t, e) => write!(f, "get_reach({s}, {t}, {e})"),
            E::GetNHop(s, t, e, n) => write!(f, "get_nhop({s}, {t}, {e}, {n})"),
            E::Cat(c) => f.write_str(&cat_text(c)),
            E::Lim(c) => write!(f, "lim({})", cat_text(c)),
            E::Rename(c, names) => write!(f, "rename({c}, [{}])", names.join(", ")),
        }
    }
}

/// One operator per line, children indented under their parent.
pub fn explain(expr: &AlgebraExpr) -> String {
    let mut out = String::new();
    explain_into(expr, 0, None, &mut out);
    out
}

fn explain_into(expr: &AlgebraExpr, depth: usize, alias: Option<&str>, out: &mut String) {
    let header = match expr {
        E::Base(n) => format!("base({n})"),
        E::Map(_, func) => format!("map {}", function_text(func)),
        E::Project(_, cols) => format!("project [{}]", cols.join(", ")),
        E::Select(_, c) => format!("select {}", condition_text(c)),
        E::Divide { a, b, .. } => format!("divide [{}] by [{}]", a.join(", "), b.join(", ")),
        E::GetNHop(.., n) => format!("get_nhop {n}"),
        E::Cat(c) | E::Lim(c) if !c.morphisms.is_empty() => format!("{} {}", expr.keyword(), decls_text(&c.morphisms)),
        E::Rename(_, names) => format!("rename [{}]", names.join(", ")),
        _ => expr.keyword().to_string(),
    };
    let _ = write!(out, "{}{header}", "  ".repeat(depth));
    if let Some(a) = alias {
        let _ = write!(out, " as {a}");
    }
    out.push('\n');
    match expr {
        E::Cat(c) | E::Lim(c) => {
            for o in &c.objects {
                explain_into(&o.expr, depth + 1, o.alias.as_deref(), out);
            }
        }
        _ => {
            for child in expr.children() {
                explain_into(child, depth + 1, None, out);
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

type PResult<T> = Result<T, AlgebraError>;

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(AlgebraError::Syntax { position: self.pos, message: message.into() })
    }

    fn ws(&mut self) {
        let t = self.src[self.pos..].trim_start();
        self.pos = self.src.len() - t.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        self.ws();
        let rest = &self.src[self.pos..];
        if !rest.starts_with(|c: char| c.is_alphabetic() || c == '_') {
            return self.err("expected a name");
        }
        let len = rest.find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '.' | '#'))).unwrap_or(rest.len());
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn names(&mut self) -> PResult<Vec<String>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn int(&mut self) -> PResult<i64> {
        self.ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-')))
            .map_or(rest.len(), |(i, _)| i);
        match rest[..len].parse() {
            Ok(n) => {
                self.pos += len;
                Ok(n)
            }
            Err(_) => self.err("expected an integer"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        self.expect('"')?;
        let mut out = String::new();
        let mut chars = self.src[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c => out.push(c),
            }
        }
        self.err("unterminated string")
    }

    fn starts_literal(&mut self) -> bool {
        self.ws();
        let rest = &self.src[self.pos..];
        rest.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '"') || rest.starts_with("dewey\"")
    }

    fn literal(&mut self) -> PResult<Value> {
        self.ws();
        if self.eat_str("dewey") {
            let s = self.string()?;
            return s.parse::<DeweyCode>().map(Value::Dewey).or_else(|_| self.err("invalid Dewey code"));
        }
        if self.peek() == Some('"') {
            return Ok(Value::Text(self.string()?));
        }
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || (c == '-' && (i == 0 || rest[..i].ends_with(['e', 'E'])))))
            .map_or(rest.len(), |(i, _)| i);
        let text = &rest[..len];
        let v = if text.contains(['.', 'e', 'E']) {
            text.parse().map(Value::Float).ok()
        } else {
            text.parse().map(Value::Int).ok()
        };
        match v {
            Some(v) => {
                self.pos += len;
                Ok(v)
            }
            None => self.err("expected a literal"),
        }
    }

    fn tuple(&mut self) -> PResult<Vec<Value>> {
        self.expect('(')?;
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.literal()?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn function(&mut self) -> PResult<FunctionExpr> {
        let kw = self.ident()?;
        self.expect('(')?;
        let f = match kw.as_str() {
            "path" | "compose" => {
                let mut names = Vec::new();
                if !self.eat(')') {
                    loop {
                        names.push(self.ident()?);
                        if self.eat(')') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                return Ok(if kw == "path" { FunctionExpr::Path(names) } else { FunctionExpr::Compose(names) });
            }
            "product_of" => {
                let a = self.function()?;
                self.expect(',')?;
                let b = self.function()?;
                FunctionExpr::ProductOf(Box::new(a), Box::new(b))
            }
            "comp" => {
                let c = self.ident()?;
                let rest = if self.eat(',') { self.function()? } else { FunctionExpr::identity() };
                FunctionExpr::ComponentThen(c, Box::new(rest))
            }
            "table" => {
                let name = self.ident()?;
                self.expect(',')?;
                let output = self
                    .names()?
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| if s == "_" { Column::new(format!("{name}#{i}"), None) } else { Column::of_object(&s) })
                    .collect();
                self.expect(',')?;
                self.expect('[')?;
                let mut mapping = BTreeMap::new();
                if !self.eat(']') {
                    loop {
                        let k = self.tuple()?;
                        if !self.eat_str("->") {
                            return self.err("expected `->`");
                        }
                        let v = self.tuple()?;
                        mapping.insert(k, v);
                        if self.eat(']') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                FunctionExpr::Table(Arc::new(TableFn { name, output, mapping }))
            }
            other => return self.err(format!("unknown function {other:?}")),
        };
        self.expect(')')?;
        Ok(f)
    }

    fn operand(&mut self) -> PResult<Operand> {
        if self.starts_literal() {
            Ok(Operand::Const(self.literal()?))
        } else {
            Ok(Operand::Fn(self.function()?))
        }
    }

    fn condition(&mut self) -> PResult<Condition> {
        let kw = self.ident()?;
        let op = match CmpOp::from_keyword(&kw) {
            Some(op) => op,
            None => return self.err(format!("unknown comparison {kw:?}")),
        };
        self.expect('(')?;
        let left = self.operand()?;
        self.expect(',')?;
        let right = self.operand()?;
        self.expect(')')?;
        Ok(Condition { left, op, right })
    }

    fn cat(&mut self) -> PResult<CatExpr> {
        let kw = self.ident()?;
        if kw != "cat" {
            return self.err("expected cat(...)");
        }
        self.expect('(')?;
        self.expect('[')?;
        let mut objects = Vec::new();
        loop {
            let expr = self.expr()?;
            let alias = if self.eat_str("as ") { Some(self.ident()?) } else { None };
            objects.push(CatObject { expr, alias });
            if self.eat(']') {
                break;
            }
            self.expect(',')?;
        }
        let mut morphisms = Vec::new();
        if self.eat(',') {
            self.expect('[')?;
            if !self.eat(']') {
                loop {
                    let kw = self.ident()?;
                    if kw != "morph" {
                        return self.err("expected morph(F, i, j)");
                    }
                    self.expect('(')?;
                    let func = self.function()?;
                    self.expect(',')?;
                    let src = self.int()? as usize;
                    self.expect(',')?;
                    let dst = self.int()? as usize;
                    self.expect(')')?;
                    morphisms.push(MorphismDecl { func, src, dst });
                    if self.eat(']') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
        }
        self.expect(')')?;
        Ok(CatExpr { objects, morphisms })
    }

    fn expr(&mut self) -> PResult<AlgebraExpr> {
        let start = self.pos;
        let kw = self.ident()?;
        if kw == "cat" {
            self.pos = start;
            return Ok(E::Cat(self.cat()?));
        }
        self.expect('(')?;
        let two = |p: &mut Self| -> PResult<(AlgebraExpr, AlgebraExpr)> {
            let l = p.expr()?;
            p.expect(',')?;
            Ok((l, p.expr()?))
        };
        let e = match kw.as_str() {
            "base" => E::Base(self.ident()?),
            "map" => {
                let c = self.expr()?;
                self.expect(',')?;
                c.map(self.function()?)
            }
            "project" | "rename" => {
                let c = self.expr()?;
                self.expect(',')?;
                let names = self.names()?;
                if kw == "project" {
                    E::Project(Box::new(c), names)
                } else {
                    E::Rename(Box::new(c), names)
                }
            }
            "select" => {
                let c = self.expr()?;
                self.expect(',')?;
                c.select(self.condition()?)
            }
            "union" => {
                let (l, r) = two(self)?;
                l.union(r)
            }
            "intersect" => {
                let (l, r) = two(self)?;
                l.intersect(r)
            }
            "difference" => {
                let (l, r) = two(self)?;
                l.difference(r)
            }
            "product" => {
                let (l, r) = two(self)?;
                l.product(r)
            }
            "divide" => {
                let left = self.expr()?;
                self.expect(',')?;
                let a = self.names()?;
                self.expect(',')?;
                let right = self.expr()?;
                self.expect(',')?;
                let b = self.names()?;
                left.divide(a, right, b)
            }
            "get_reach" | "get_nhop" => {
                let s = self.expr()?;
                self.expect(',')?;
                let t = self.expr()?;
                self.expect(',')?;
                let e = self.expr()?;
                if kw == "get_nhop" {
                    self.expect(',')?;
                    let n = self.int()?;
                    E::nhop(s, t, e, n)
                } else {
                    E::reach(s, t, e)
                }
            }
            "lim" => E::Lim(self.cat()?),
            other => match TreeAxis::ALL.into_iter().find(|a| a.keyword() == other) {
                Some(axis) => {
                    let (l, r) = two(self)?;
                    E::tree(axis, l, r)
                }
                None => return self.err(format!("unknown operator {other:?}")),
            },
        };
        self.expect(')')?;
        Ok(e)
    }
}

/// Parse the text form of a plan.
pub fn parse_algebra(src: &str) -> Result<AlgebraExpr, AlgebraError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.ws();
    if p.pos != src.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for src in [
            "map(base(OrderLine), path(Product, PName))",
            "select(base(SC), eq(path(student, Gender), \"Male\"))",
            "divide(base(SC), [course], map(base(Course), path()), [Course])",
            "lim(cat([base(Student) as s, base(Gender) as g], [morph(path(Gender), 0, 1)]))",
            "cat([base(A)], [])",
            "get_nhop(base(S), base(T), base(E), 3)",
            "union(get_ancestor(base(D), base(D)), get_following(base(D), base(D)))",
            "select(base(X), lt(comp(a, product_of(path(), compose(f.g, g.h))), -2.5))",
            "select(base(X), ne(comp(a), dewey\"1.2\"))",
            "map(base(X), table(t, [Y, _], [(1) -> (\"a\", 2), (2) -> (\"b\", 3)]))",
            "rename(product(base(A), base(A)), [x, y])",
        ] {
            let e = parse_algebra(src).unwrap_or_else(|err| panic!("{src}: {err}"));
            let printed = e.to_string();
            assert_eq!(parse_algebra(&printed).unwrap(), e, "{printed}");
        }
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_algebra("map(base(X) path())").unwrap_err();
        assert!(matches!(err, AlgebraError::Syntax { position: 12, .. }), "{err}");
        assert!(parse_algebra("frobnicate(base(X))").is_err());
        assert!(parse_algebra("base(X) extra").is_err());
    }

    #[test]
    fn explain_indents_children() {
        let e = parse_algebra("project(lim(cat([base(A) as a, base(B)], [morph(path(B), 0, 1)])), [a])").unwrap();
        assert_eq!(
            explain(&e),
            "project [a]\n  lim [morph(path(B), 0, 1)]\n    base(A) as a\n    base(B)\n"
        );
    }
}

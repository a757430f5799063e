//! Surface syntax: expressions, guarded patterns, programs; the parser and
//! the pretty-printer.
//!
//! Grammar (ASCII keywords, `#` starts a line comment; the comment
//! `# no_exhaustiveness` is a pragma applying to the next definition):
//!
//! ```text
//! program := def* "in" expr
//! def     := IDENT [":" scheme] "=" "fun" IDENT "->" expr
//! scheme  := ["forall" TYVAR+ "."] type
//! type    := ty_u ;  ty_u := ty_i ("|" ty_i)* ; ty_i := ty_n (("&"|"\") ty_n)*
//! ty_n    := ["!"] ty_a ;  ty_a := "Int" | "Float" | "Any" | "Empty"
//!          | INTEGER | TYVAR | "(" type "," type ")" | "(" type ")"
//!          | ty_a "->" type | "rec" RECNAME "." type | RECNAME
//! expr    := "fun" IDENT "->" expr
//!          | "case" expr "of" clause (";" clause)* "end" | app
//! app     := atom+
//! atom    := IDENT | INTEGER | FLOAT | "(" expr "," expr ")" | "(" expr ")"
//! clause  := pat ["when" guard] "->" expr
//! pat     := "_" | IDENT | "^" IDENT | INTEGER | FLOAT | "(" pat "," pat ")"
//! guard   := gatom ("," gatom)* ;
//! gatom   := ("is_int"|"is_float"|"is_pair"|"is_fun") IDENT | "oracle" | "true"
//! ```
//!
//! `t1 \ t2` is sugar for `t1 & !t2`. An arrow or `rec` body extends to the
//! end of the enclosing type, so `Int | Float -> Int` is `Int | (Float -> Int)`.
//!
//! Equality on syntax ignores spans. Value patterns written in source are
//! constants or pairs of constants; lambda and pair values appear in
//! patterns only through capture substitution at run time.

use num_bigint::BigInt;
use std::collections::BTreeSet;

use crate::types::{Ty, TyError, TyScheme, TyStore, TyVar};

pub type Name = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Byte-offset to 1-based line/column translation for diagnostics.
pub struct LineMap {
    line_starts: Vec<usize>,
}

impl LineMap {
    pub fn new(src: &str) -> LineMap {
        let mut line_starts = vec![0];
        for (i, b) in src.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        LineMap { line_starts }
    }

    pub fn line_col(&self, byte: usize) -> (usize, usize) {
        let line = match self.line_starts.binary_search(&byte) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        (line + 1, byte - self.line_starts[line] + 1)
    }
}

// ---------------------------------------------------------------------------
// Syntax trees
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Const {
    Int(BigInt),
    Float(f64),
}

impl PartialEq for Const {
    fn eq(&self, other: &Const) -> bool {
        match (self, other) {
            (Const::Int(a), Const::Int(b)) => a == b,
            (Const::Float(a), Const::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Const {}

impl std::hash::Hash for Const {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Const::Int(n) => {
                0u8.hash(state);
                n.hash(state);
            }
            Const::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(Name),
    Const(Const),
    Abs(Name, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Case(Box<Expr>, Vec<Clause>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }
}

/// Evaluated results: constants, lambdas, pairs of values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Const(Const),
    Abs(Name, Box<Expr>),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    /// Does the dynamic type test accept this value?
    pub fn models(&self, g: GuardType) -> bool {
        match (g, self) {
            (GuardType::IsInt, Value::Const(Const::Int(_))) => true,
            (GuardType::IsFloat, Value::Const(Const::Float(_))) => true,
            (GuardType::IsPair, Value::Pair(..)) => true,
            (GuardType::IsFun, Value::Abs(..)) => true,
            _ => false,
        }
    }
}

pub fn value_to_expr(v: &Value, span: Span) -> Expr {
    match v {
        Value::Const(c) => Expr::new(ExprKind::Const(c.clone()), span),
        Value::Abs(x, body) => Expr::new(ExprKind::Abs(x.clone(), body.clone()), span),
        Value::Pair(a, b) => Expr::new(
            ExprKind::Pair(
                Box::new(value_to_expr(a, span)),
                Box::new(value_to_expr(b, span)),
            ),
            span,
        ),
    }
}

pub fn expr_to_value(e: &Expr) -> Option<Value> {
    match &e.kind {
        ExprKind::Const(c) => Some(Value::Const(c.clone())),
        ExprKind::Abs(x, body) => Some(Value::Abs(x.clone(), body.clone())),
        ExprKind::Pair(a, b) => Some(Value::Pair(
            Box::new(expr_to_value(a)?),
            Box::new(expr_to_value(b)?),
        )),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuardType {
    IsInt,
    IsFloat,
    IsPair,
    IsFun,
}

impl GuardType {
    pub fn keyword(self) -> &'static str {
        match self {
            GuardType::IsInt => "is_int",
            GuardType::IsFloat => "is_float",
            GuardType::IsPair => "is_pair",
            GuardType::IsFun => "is_fun",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    /// Constant or (at run time) structured value to compare against.
    Val(Value),
    Wildcard,
    /// Binding occurrence.
    Bind(Name),
    /// `^x`: compare against the value of an outer binding.
    Capture(Name),
    Pair(Box<Pattern>, Box<Pattern>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    Oracle,
    /// Dynamic type test on a variable.
    TestVar(GuardType, Name),
    /// Dynamic type test on a value (arises by substitution at run time).
    TestVal(GuardType, Value),
    And(Box<Guard>, Box<Guard>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedPattern {
    pub pattern: Pattern,
    pub guard: Guard,
}

#[derive(Debug, Clone)]
pub struct Clause {
    pub gpat: GuardedPattern,
    pub body: Expr,
    pub span: Span,
}

impl PartialEq for Clause {
    fn eq(&self, other: &Clause) -> bool {
        self.gpat == other.gpat && self.body == other.body
    }
}

impl Eq for Clause {}

#[derive(Debug, Clone)]
pub struct Def {
    pub name: Name,
    pub scheme: Option<TyScheme>,
    /// Definitions are always lambdas; binder and body of the `fun`.
    pub binder: Name,
    pub body: Expr,
    pub no_exhaustiveness: bool,
    pub span: Span,
}

impl PartialEq for Def {
    fn eq(&self, other: &Def) -> bool {
        self.name == other.name
            && self.scheme == other.scheme
            && self.binder == other.binder
            && self.body == other.body
            && self.no_exhaustiveness == other.no_exhaustiveness
    }
}

impl Eq for Def {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<Def>,
    pub main: Expr,
}

impl Def {
    /// The definition's right-hand side as an expression (`fun binder -> body`).
    pub fn lambda(&self) -> Expr {
        Expr::new(
            ExprKind::Abs(self.binder.clone(), Box::new(self.body.clone())),
            self.span,
        )
    }
}

// ---------------------------------------------------------------------------
// Binding structure
// ---------------------------------------------------------------------------

/// Variables bound by a pattern (binding occurrences only; captures are
/// uses, not binders).
pub fn vars_of(p: &Pattern) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_vars(p, &mut out);
    out
}

fn collect_vars(p: &Pattern, out: &mut BTreeSet<Name>) {
    match p {
        Pattern::Bind(x) => {
            out.insert(x.clone());
        }
        Pattern::Pair(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        _ => {}
    }
}

/// A pattern is linear when no variable is bound twice.
pub fn is_linear(p: &Pattern) -> bool {
    fn go(p: &Pattern, seen: &mut BTreeSet<Name>) -> bool {
        match p {
            Pattern::Bind(x) => seen.insert(x.clone()),
            Pattern::Pair(a, b) => go(a, seen) && go(b, seen),
            _ => true,
        }
    }
    go(p, &mut BTreeSet::new())
}

fn free_vars_value(v: &Value, out: &mut BTreeSet<Name>) {
    match v {
        Value::Const(_) => {}
        Value::Abs(x, body) => {
            let mut inner = free_vars_expr(body);
            inner.remove(x);
            out.extend(inner);
        }
        Value::Pair(a, b) => {
            free_vars_value(a, out);
            free_vars_value(b, out);
        }
    }
}

fn free_vars_pattern(p: &Pattern, out: &mut BTreeSet<Name>) {
    match p {
        Pattern::Val(v) => free_vars_value(v, out),
        Pattern::Capture(x) => {
            out.insert(x.clone());
        }
        Pattern::Pair(a, b) => {
            free_vars_pattern(a, out);
            free_vars_pattern(b, out);
        }
        Pattern::Wildcard | Pattern::Bind(_) => {}
    }
}

fn free_vars_guard(g: &Guard, out: &mut BTreeSet<Name>) {
    match g {
        Guard::True | Guard::Oracle => {}
        Guard::TestVar(_, x) => {
            out.insert(x.clone());
        }
        Guard::TestVal(_, v) => free_vars_value(v, out),
        Guard::And(a, b) => {
            free_vars_guard(a, out);
            free_vars_guard(b, out);
        }
    }
}

/// Free variables of a guarded pattern: captures, free variables of value
/// patterns, and guard subjects not bound by the pattern itself.
pub fn free_vars_gpat(pg: &GuardedPattern) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    free_vars_pattern(&pg.pattern, &mut out);
    let mut guard_vars = BTreeSet::new();
    free_vars_guard(&pg.guard, &mut guard_vars);
    let bound = vars_of(&pg.pattern);
    for x in guard_vars {
        if !bound.contains(&x) {
            out.insert(x);
        }
    }
    out
}

pub fn free_vars_expr(e: &Expr) -> BTreeSet<Name> {
    match &e.kind {
        ExprKind::Var(x) => std::iter::once(x.clone()).collect(),
        ExprKind::Const(_) => BTreeSet::new(),
        ExprKind::Abs(x, body) => {
            let mut fv = free_vars_expr(body);
            fv.remove(x);
            fv
        }
        ExprKind::App(a, b) | ExprKind::Pair(a, b) => {
            let mut fv = free_vars_expr(a);
            fv.extend(free_vars_expr(b));
            fv
        }
        ExprKind::Case(scrut, clauses) => {
            let mut fv = free_vars_expr(scrut);
            for cl in clauses {
                fv.extend(free_vars_gpat(&cl.gpat));
                let bound = vars_of(&cl.gpat.pattern);
                for x in free_vars_expr(&cl.body) {
                    if !bound.contains(&x) {
                        fv.insert(x);
                    }
                }
            }
            fv
        }
    }
}

// ---------------------------------------------------------------------------
// Alpha-equivalence
// ---------------------------------------------------------------------------

/// Structural equality up to renaming of bound variables (lambda binders
/// and pattern binders).
pub fn alpha_equal(e1: &Expr, e2: &Expr) -> bool {
    alpha_expr(e1, e2, &mut Vec::new(), &mut Vec::new(), &mut 0)
}

pub fn alpha_equal_value(v1: &Value, v2: &Value) -> bool {
    match (v1, v2) {
        (Value::Const(a), Value::Const(b)) => a == b,
        (Value::Pair(a1, b1), Value::Pair(a2, b2)) => {
            alpha_equal_value(a1, a2) && alpha_equal_value(b1, b2)
        }
        (Value::Abs(x, b1), Value::Abs(y, b2)) => {
            let mut env1 = vec![(x.clone(), 0)];
            let mut env2 = vec![(y.clone(), 0)];
            alpha_expr(b1, b2, &mut env1, &mut env2, &mut 1)
        }
        _ => false,
    }
}

type AlphaEnv = Vec<(Name, u32)>;

fn lookup_level(env: &AlphaEnv, x: &str) -> Option<u32> {
    env.iter().rev().find(|(n, _)| n == x).map(|(_, l)| *l)
}

fn alpha_var(x: &str, y: &str, env1: &AlphaEnv, env2: &AlphaEnv) -> bool {
    match (lookup_level(env1, x), lookup_level(env2, y)) {
        (Some(a), Some(b)) => a == b,
        (None, None) => x == y,
        _ => false,
    }
}

fn alpha_expr(
    e1: &Expr,
    e2: &Expr,
    env1: &mut AlphaEnv,
    env2: &mut AlphaEnv,
    level: &mut u32,
) -> bool {
    match (&e1.kind, &e2.kind) {
        (ExprKind::Var(x), ExprKind::Var(y)) => alpha_var(x, y, env1, env2),
        (ExprKind::Const(a), ExprKind::Const(b)) => a == b,
        (ExprKind::Abs(x, b1), ExprKind::Abs(y, b2)) => {
            env1.push((x.clone(), *level));
            env2.push((y.clone(), *level));
            *level += 1;
            let r = alpha_expr(b1, b2, env1, env2, level);
            *level -= 1;
            env1.pop();
            env2.pop();
            r
        }
        (ExprKind::App(f1, a1), ExprKind::App(f2, a2))
        | (ExprKind::Pair(f1, a1), ExprKind::Pair(f2, a2)) => {
            alpha_expr(f1, f2, env1, env2, level) && alpha_expr(a1, a2, env1, env2, level)
        }
        (ExprKind::Case(s1, cl1), ExprKind::Case(s2, cl2)) => {
            if cl1.len() != cl2.len() || !alpha_expr(s1, s2, env1, env2, level) {
                return false;
            }
            cl1.iter()
                .zip(cl2)
                .all(|(c1, c2)| alpha_clause(c1, c2, env1, env2, level))
        }
        _ => false,
    }
}

fn alpha_clause(
    c1: &Clause,
    c2: &Clause,
    env1: &mut AlphaEnv,
    env2: &mut AlphaEnv,
    level: &mut u32,
) -> bool {
    let depth1 = env1.len();
    let depth2 = env2.len();
    let saved_level = *level;
    let ok = alpha_pattern(&c1.gpat.pattern, &c2.gpat.pattern, env1, env2, level)
        && alpha_guard(&c1.gpat.guard, &c2.gpat.guard, env1, env2)
        && alpha_expr(&c1.body, &c2.body, env1, env2, level);
    env1.truncate(depth1);
    env2.truncate(depth2);
    *level = saved_level;
    ok
}

fn alpha_pattern(
    p1: &Pattern,
    p2: &Pattern,
    env1: &mut AlphaEnv,
    env2: &mut AlphaEnv,
    level: &mut u32,
) -> bool {
    match (p1, p2) {
        (Pattern::Wildcard, Pattern::Wildcard) => true,
        (Pattern::Bind(x), Pattern::Bind(y)) => {
            env1.push((x.clone(), *level));
            env2.push((y.clone(), *level));
            *level += 1;
            true
        }
        (Pattern::Capture(x), Pattern::Capture(y)) => alpha_var(x, y, env1, env2),
        (Pattern::Val(v1), Pattern::Val(v2)) => {
            let s = Span::default();
            let e1 = value_to_expr(v1, s);
            let e2 = value_to_expr(v2, s);
            alpha_expr(&e1, &e2, env1, env2, level)
        }
        (Pattern::Pair(a1, b1), Pattern::Pair(a2, b2)) => {
            alpha_pattern(a1, a2, env1, env2, level) && alpha_pattern(b1, b2, env1, env2, level)
        }
        _ => false,
    }
}

fn alpha_guard(g1: &Guard, g2: &Guard, env1: &AlphaEnv, env2: &AlphaEnv) -> bool {
    match (g1, g2) {
        (Guard::True, Guard::True) | (Guard::Oracle, Guard::Oracle) => true,
        (Guard::TestVar(t1, x), Guard::TestVar(t2, y)) => t1 == t2 && alpha_var(x, y, env1, env2),
        (Guard::TestVal(t1, v1), Guard::TestVal(t2, v2)) => {
            t1 == t2 && alpha_equal_value(v1, v2)
        }
        (Guard::And(a1, b1), Guard::And(a2, b2)) => {
            alpha_guard(a1, a2, env1, env2) && alpha_guard(b1, b2, env1, env2)
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Fun,
    Case,
    Of,
    End,
    When,
    In,
    Rec,
    Forall,
    Oracle,
    True,
    IsInt,
    IsFloat,
    IsPair,
    IsFun,
    Ident(String),
    Upper(String),
    TyVar(String),
    Int(BigInt),
    Float(f64),
    LParen,
    RParen,
    Comma,
    Semi,
    Arrow,
    Eq,
    Colon,
    Dot,
    Caret,
    Underscore,
    Pipe,
    Amp,
    Bang,
    Backslash,
    PragmaNoExhaust,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Upper(s) => format!("`{s}`"),
            Tok::TyVar(s) => format!("type variable `'{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Float(f) => format!("float `{f:?}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!(
                "`{}`",
                match other {
                    Tok::Fun => "fun",
                    Tok::Case => "case",
                    Tok::Of => "of",
                    Tok::End => "end",
                    Tok::When => "when",
                    Tok::In => "in",
                    Tok::Rec => "rec",
                    Tok::Forall => "forall",
                    Tok::Oracle => "oracle",
                    Tok::True => "true",
                    Tok::IsInt => "is_int",
                    Tok::IsFloat => "is_float",
                    Tok::IsPair => "is_pair",
                    Tok::IsFun => "is_fun",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Arrow => "->",
                    Tok::Eq => "=",
                    Tok::Colon => ":",
                    Tok::Dot => ".",
                    Tok::Caret => "^",
                    Tok::Underscore => "_",
                    Tok::Pipe => "|",
                    Tok::Amp => "&",
                    Tok::Bang => "!",
                    Tok::Backslash => "\\",
                    Tok::PragmaNoExhaust => "# no_exhaustiveness",
                    _ => unreachable!(),
                }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<TyError> for ParseError {
    fn from(e: TyError) -> ParseError {
        ParseError {
            message: e.to_string(),
            span: Span::default(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'#' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != b'\n' {
                    j += 1;
                }
                let body = src[i + 1..j].trim();
                if body == "no_exhaustiveness" {
                    toks.push((Tok::PragmaNoExhaust, Span::new(i, j)));
                }
                i = j;
            }
            b'(' => {
                toks.push((Tok::LParen, Span::new(i, i + 1)));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, Span::new(i, i + 1)));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, Span::new(i, i + 1)));
                i += 1;
            }
            b';' => {
                toks.push((Tok::Semi, Span::new(i, i + 1)));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::Eq, Span::new(i, i + 1)));
                i += 1;
            }
            b':' => {
                toks.push((Tok::Colon, Span::new(i, i + 1)));
                i += 1;
            }
            b'.' => {
                toks.push((Tok::Dot, Span::new(i, i + 1)));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, Span::new(i, i + 1)));
                i += 1;
            }
            b'|' => {
                toks.push((Tok::Pipe, Span::new(i, i + 1)));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::Amp, Span::new(i, i + 1)));
                i += 1;
            }
            b'!' => {
                toks.push((Tok::Bang, Span::new(i, i + 1)));
                i += 1;
            }
            b'\\' => {
                toks.push((Tok::Backslash, Span::new(i, i + 1)));
                i += 1;
            }
            b'-' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    toks.push((Tok::Arrow, Span::new(i, i + 2)));
                    i += 2;
                } else if i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    let (tok, j) = lex_number(src, i + 1, true)?;
                    toks.push((tok, Span::new(i, j)));
                    i = j;
                } else {
                    return Err(ParseError {
                        message: "unexpected `-` (use `->` or a negative literal)".to_string(),
                        span: Span::new(i, i + 1),
                    });
                }
            }
            b'\'' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                if j == i + 1 || !bytes[i + 1].is_ascii_lowercase() {
                    return Err(ParseError {
                        message: "expected a lowercase name after `'`".to_string(),
                        span: Span::new(i, j),
                    });
                }
                toks.push((Tok::TyVar(src[i + 1..j].to_string()), Span::new(i, j)));
                i = j;
            }
            b'0'..=b'9' => {
                let (tok, j) = lex_number(src, i, false)?;
                toks.push((tok, Span::new(i, j)));
                i = j;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &src[i..j];
                let tok = match word {
                    "_" => Tok::Underscore,
                    "fun" => Tok::Fun,
                    "case" => Tok::Case,
                    "of" => Tok::Of,
                    "end" => Tok::End,
                    "when" => Tok::When,
                    "in" => Tok::In,
                    "rec" => Tok::Rec,
                    "forall" => Tok::Forall,
                    "oracle" => Tok::Oracle,
                    "true" => Tok::True,
                    "is_int" => Tok::IsInt,
                    "is_float" => Tok::IsFloat,
                    "is_pair" => Tok::IsPair,
                    "is_fun" => Tok::IsFun,
                    _ => {
                        if word.as_bytes()[0].is_ascii_uppercase() {
                            Tok::Upper(word.to_string())
                        } else {
                            Tok::Ident(word.to_string())
                        }
                    }
                };
                toks.push((tok, Span::new(i, j)));
                i = j;
            }
            _ => {
                return Err(ParseError {
                    message: format!("unexpected character `{}`", &src[i..i + 1]),
                    span: Span::new(i, i + 1),
                });
            }
        }
    }
    toks.push((Tok::Eof, Span::new(src.len(), src.len())));
    Ok(toks)
}

/// Lex the digits starting at `digits_at`; `neg` records a consumed leading
/// minus. A float requires digits on both sides of the dot.
fn lex_number(src: &str, digits_at: usize, neg: bool) -> Result<(Tok, usize), ParseError> {
    let bytes = src.as_bytes();
    let mut j = digits_at;
    while j < bytes.len() && bytes[j].is_ascii_digit() {
        j += 1;
    }
    if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
        let mut k = j + 1;
        while k < bytes.len() && bytes[k].is_ascii_digit() {
            k += 1;
        }
        let text = &src[digits_at..k];
        let val: f64 = text.parse().map_err(|_| ParseError {
            message: format!("malformed float literal `{text}`"),
            span: Span::new(digits_at, k),
        })?;
        Ok((Tok::Float(if neg { -val } else { val }), k))
    } else {
        let text = &src[digits_at..j];
        let val: BigInt = text.parse().map_err(|_| ParseError {
            message: format!("malformed integer literal `{text}`"),
            span: Span::new(digits_at, j),
        })?;
        Ok((Tok::Int(if neg { -val } else { val }), j))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    store: &'a mut TyStore,
    /// In-scope `rec` binders, innermost last.
    recnames: Vec<(String, Ty)>,
}

/// Parse a complete program; types inside annotations are interned into
/// `store`. Rejects duplicate definition names.
pub fn parse_program(src: &str, store: &mut TyStore) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        store,
        recnames: Vec::new(),
    };
    let prog = p.program()?;
    Ok(prog)
}

/// Parse a type in the surface grammar (used by `--expect` and tests).
pub fn parse_type(src: &str, store: &mut TyStore) -> Result<Ty, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        store,
        recnames: Vec::new(),
    };
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        let ix = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[ix].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Span, ParseError> {
        if self.peek() == &t {
            let sp = self.span();
            self.bump();
            Ok(sp)
        } else {
            Err(self.unexpected(&format!("expected {}", t.describe())))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("expected end of input"))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        ParseError {
            message: format!("{what}, found {}", self.peek().describe()),
            span: self.span(),
        }
    }

    fn ident(&mut self) -> Result<(Name, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.span();
                self.bump();
                Ok((s, sp))
            }
            _ => Err(self.unexpected("expected an identifier")),
        }
    }

    // -- programs -------------------------------------------------------------

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut defs: Vec<Def> = Vec::new();
        loop {
            let mut pragma = false;
            while self.eat(&Tok::PragmaNoExhaust) {
                pragma = true;
            }
            let starts_def = matches!(self.peek(), Tok::Ident(_))
                && matches!(self.peek2(), Tok::Colon | Tok::Eq);
            if !starts_def {
                if pragma {
                    return Err(self.unexpected("expected a definition after the pragma"));
                }
                break;
            }
            let def = self.def(pragma)?;
            if defs.iter().any(|d| d.name == def.name) {
                return Err(ParseError {
                    message: format!("duplicate definition of `{}`", def.name),
                    span: def.span,
                });
            }
            defs.push(def);
        }
        self.expect(Tok::In)?;
        let main = self.expr()?;
        self.expect_eof()?;
        Ok(Program { defs, main })
    }

    fn def(&mut self, no_exhaustiveness: bool) -> Result<Def, ParseError> {
        let (name, start) = self.ident()?;
        let scheme = if self.eat(&Tok::Colon) {
            Some(self.scheme()?)
        } else {
            None
        };
        self.expect(Tok::Eq)?;
        self.expect(Tok::Fun)?;
        let (binder, _) = self.ident()?;
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        let span = start.join(body.span);
        Ok(Def {
            name,
            scheme,
            binder,
            body,
            no_exhaustiveness,
            span,
        })
    }

    fn scheme(&mut self) -> Result<TyScheme, ParseError> {
        if self.eat(&Tok::Forall) {
            let mut bound: Vec<(String, TyVar)> = Vec::new();
            loop {
                match self.peek().clone() {
                    Tok::TyVar(name) => {
                        self.bump();
                        if bound.iter().any(|(n, _)| n == &name) {
                            return Err(ParseError {
                                message: format!("duplicate bound variable `'{name}`"),
                                span: self.prev_span(),
                            });
                        }
                        let v = self.store.named_var(&name);
                        bound.push((name, v));
                    }
                    _ => break,
                }
            }
            if bound.is_empty() {
                return Err(self.unexpected("expected type variables after `forall`"));
            }
            self.expect(Tok::Dot)?;
            let body = self.ty()?;
            Ok(TyScheme {
                vars: bound.into_iter().map(|(_, v)| v).collect(),
                body,
            })
        } else {
            let body = self.ty()?;
            Ok(TyScheme::mono(body))
        }
    }

    // -- types ------------------------------------------------------------------

    fn ty(&mut self) -> Result<Ty, ParseError> {
        let mut acc = self.ty_inter()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.ty_inter()?;
            acc = self.store.mk_union(acc, rhs);
        }
        Ok(acc)
    }

    fn ty_inter(&mut self) -> Result<Ty, ParseError> {
        let mut acc = self.ty_neg()?;
        loop {
            if self.eat(&Tok::Amp) {
                let rhs = self.ty_neg()?;
                acc = self.store.mk_inter(acc, rhs);
            } else if self.eat(&Tok::Backslash) {
                let rhs = self.ty_neg()?;
                acc = self.store.mk_diff(acc, rhs);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn ty_neg(&mut self) -> Result<Ty, ParseError> {
        if self.eat(&Tok::Bang) {
            let t = self.ty_arrow()?;
            Ok(self.store.mk_neg(t))
        } else {
            self.ty_arrow()
        }
    }

    /// An atom optionally followed by `->`; the codomain is a full type, so
    /// arrows are greedy to the right.
    fn ty_arrow(&mut self) -> Result<Ty, ParseError> {
        let head = self.ty_atom()?;
        if self.eat(&Tok::Arrow) {
            let cod = self.ty()?;
            Ok(self.store.mk_arrow(head, cod))
        } else {
            Ok(head)
        }
    }

    fn ty_atom(&mut self) -> Result<Ty, ParseError> {
        match self.peek().clone() {
            Tok::Upper(name) => {
                let sp = self.span();
                self.bump();
                match name.as_str() {
                    "Int" => Ok(self.store.mk_int()),
                    "Float" => Ok(self.store.mk_float()),
                    "Any" => Ok(self.store.top()),
                    "Empty" => Ok(self.store.bottom()),
                    _ => {
                        for (n, t) in self.recnames.iter().rev() {
                            if n == &name {
                                return Ok(*t);
                            }
                        }
                        Err(ParseError {
                            message: format!("unbound recursive type name `{name}`"),
                            span: sp,
                        })
                    }
                }
            }
            Tok::Int(n) => {
                self.bump();
                Ok(self.store.mk_int_lit(n))
            }
            Tok::TyVar(name) => {
                self.bump();
                let v = self.store.named_var(&name);
                Ok(self.store.mk_var(v))
            }
            Tok::LParen => {
                self.bump();
                let first = self.ty()?;
                if self.eat(&Tok::Comma) {
                    let second = self.ty()?;
                    self.expect(Tok::RParen)?;
                    Ok(self.store.mk_pair(first, second))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            Tok::Rec => {
                let rec_span = self.span();
                self.bump();
                let name = match self.peek().clone() {
                    Tok::Upper(n) => {
                        self.bump();
                        n
                    }
                    _ => return Err(self.unexpected("expected a recursion name")),
                };
                self.expect(Tok::Dot)?;
                // Two-phase: parse the body against a placeholder, then tie
                // the knot with the body's node.
                let ph = self.store.rec_placeholder();
                self.recnames.push((name, ph));
                let body = self.ty();
                self.recnames.pop();
                let body = body?;
                if body == ph {
                    return Err(ParseError {
                        message: "recursive type is not contractive".to_string(),
                        span: rec_span,
                    });
                }
                let node = self.store.node(body).clone();
                self.store.rec_complete(ph, node).map_err(|e| ParseError {
                    message: e.to_string(),
                    span: rec_span,
                })
            }
            _ => Err(self.unexpected("expected a type")),
        }
    }

    // -- expressions ---------------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Fun => {
                let start = self.span();
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                let span = start.join(body.span);
                Ok(Expr::new(ExprKind::Abs(x, Box::new(body)), span))
            }
            Tok::Case => {
                let start = self.span();
                self.bump();
                let scrut = self.expr()?;
                self.expect(Tok::Of)?;
                let mut clauses = vec![self.clause()?];
                while self.eat(&Tok::Semi) {
                    clauses.push(self.clause()?);
                }
                let end = self.expect(Tok::End)?;
                Ok(Expr::new(
                    ExprKind::Case(Box::new(scrut), clauses),
                    start.join(end),
                ))
            }
            _ => self.app(),
        }
    }

    fn app(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            let span = acc.span.join(arg.span);
            acc = Expr::new(ExprKind::App(Box::new(acc), Box::new(arg)), span);
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            // An identifier followed by `=` or `:` is the head of the next
            // definition, not an application argument.
            Tok::Ident(_) => !matches!(self.peek2(), Tok::Eq | Tok::Colon),
            Tok::Int(_) | Tok::Float(_) | Tok::LParen => true,
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(Expr::new(ExprKind::Var(x), sp))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Const(Const::Int(n)), sp))
            }
            Tok::Float(f) => {
                self.bump();
                Ok(Expr::new(ExprKind::Const(Const::Float(f)), sp))
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if self.eat(&Tok::Comma) {
                    let second = self.expr()?;
                    let end = self.expect(Tok::RParen)?;
                    Ok(Expr::new(
                        ExprKind::Pair(Box::new(first), Box::new(second)),
                        sp.join(end),
                    ))
                } else {
                    let end = self.expect(Tok::RParen)?;
                    let mut e = first;
                    e.span = sp.join(end);
                    Ok(e)
                }
            }
            _ => Err(self.unexpected("expected an expression")),
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let start = self.span();
        let pattern = self.pattern()?;
        let guard = if self.eat(&Tok::When) {
            self.guard()?
        } else {
            Guard::True
        };
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        let span = start.join(body.span);
        Ok(Clause {
            gpat: GuardedPattern { pattern, guard },
            body,
            span,
        })
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        match self.peek().clone() {
            Tok::Underscore => {
                self.bump();
                Ok(Pattern::Wildcard)
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Pattern::Bind(x))
            }
            Tok::Caret => {
                self.bump();
                let (x, _) = self.ident()?;
                Ok(Pattern::Capture(x))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Pattern::Val(Value::Const(Const::Int(n))))
            }
            Tok::Float(f) => {
                self.bump();
                Ok(Pattern::Val(Value::Const(Const::Float(f))))
            }
            Tok::LParen => {
                self.bump();
                let a = self.pattern()?;
                self.expect(Tok::Comma)?;
                let b = self.pattern()?;
                self.expect(Tok::RParen)?;
                Ok(Pattern::Pair(Box::new(a), Box::new(b)))
            }
            _ => Err(self.unexpected("expected a pattern")),
        }
    }

    fn guard(&mut self) -> Result<Guard, ParseError> {
        let mut acc = self.gatom()?;
        while self.eat(&Tok::Comma) {
            let rhs = self.gatom()?;
            acc = Guard::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn gatom(&mut self) -> Result<Guard, ParseError> {
        let test = match self.peek() {
            Tok::True => {
                self.bump();
                return Ok(Guard::True);
            }
            Tok::Oracle => {
                self.bump();
                return Ok(Guard::Oracle);
            }
            Tok::IsInt => GuardType::IsInt,
            Tok::IsFloat => GuardType::IsFloat,
            Tok::IsPair => GuardType::IsPair,
            Tok::IsFun => GuardType::IsFun,
            _ => return Err(self.unexpected("expected a guard")),
        };
        self.bump();
        let (x, _) = self.ident()?;
        Ok(Guard::TestVar(test, x))
    }
}

// ---------------------------------------------------------------------------
// Pretty-printing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    Tail,
    AppHead,
    AppArg,
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, Pos::Tail);
    out
}

fn write_expr(out: &mut String, e: &Expr, pos: Pos) {
    match &e.kind {
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Const(c) => write_const(out, c),
        ExprKind::Abs(x, body) => {
            let wrap = pos != Pos::Tail;
            if wrap {
                out.push('(');
            }
            out.push_str("fun ");
            out.push_str(x);
            out.push_str(" -> ");
            write_expr(out, body, Pos::Tail);
            if wrap {
                out.push(')');
            }
        }
        ExprKind::App(f, a) => {
            let wrap = pos == Pos::AppArg;
            if wrap {
                out.push('(');
            }
            write_expr(out, f, Pos::AppHead);
            out.push(' ');
            write_expr(out, a, Pos::AppArg);
            if wrap {
                out.push(')');
            }
        }
        ExprKind::Pair(a, b) => {
            out.push('(');
            write_expr(out, a, Pos::Tail);
            out.push_str(", ");
            write_expr(out, b, Pos::Tail);
            out.push(')');
        }
        ExprKind::Case(scrut, clauses) => {
            let wrap = pos != Pos::Tail;
            if wrap {
                out.push('(');
            }
            out.push_str("case ");
            write_expr(out, scrut, Pos::Tail);
            out.push_str(" of ");
            for (i, cl) in clauses.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                write_clause(out, cl);
            }
            out.push_str(" end");
            if wrap {
                out.push(')');
            }
        }
    }
}

fn write_const(out: &mut String, c: &Const) {
    match c {
        Const::Int(n) => out.push_str(&n.to_string()),
        Const::Float(f) => out.push_str(&format!("{f:?}")),
    }
}

fn write_clause(out: &mut String, cl: &Clause) {
    write_pattern(out, &cl.gpat.pattern);
    if cl.gpat.guard != Guard::True {
        out.push_str(" when ");
        write_guard(out, &cl.gpat.guard);
    }
    out.push_str(" -> ");
    write_expr(out, &cl.body, Pos::Tail);
}

pub fn pattern_to_string(p: &Pattern) -> String {
    let mut out = String::new();
    write_pattern(&mut out, p);
    out
}

fn write_pattern(out: &mut String, p: &Pattern) {
    match p {
        Pattern::Wildcard => out.push('_'),
        Pattern::Bind(x) => out.push_str(x),
        Pattern::Capture(x) => {
            out.push('^');
            out.push_str(x);
        }
        Pattern::Val(Value::Const(c)) => write_const(out, c),
        Pattern::Val(v) => {
            // Not surface syntax; appears only in runtime debug output.
            let e = value_to_expr(v, Span::default());
            write_expr(out, &e, Pos::AppArg);
        }
        Pattern::Pair(a, b) => {
            out.push('(');
            write_pattern(out, a);
            out.push_str(", ");
            write_pattern(out, b);
            out.push(')');
        }
    }
}

pub fn guard_to_string(g: &Guard) -> String {
    let mut out = String::new();
    write_guard(&mut out, g);
    out
}

fn write_guard(out: &mut String, g: &Guard) {
    match g {
        Guard::And(a, b) => {
            write_guard(out, a);
            out.push_str(", ");
            write_guard(out, b);
        }
        Guard::True => out.push_str("true"),
        Guard::Oracle => out.push_str("oracle"),
        Guard::TestVar(t, x) => {
            out.push_str(t.keyword());
            out.push(' ');
            out.push_str(x);
        }
        Guard::TestVal(t, v) => {
            out.push_str(t.keyword());
            out.push(' ');
            let e = value_to_expr(v, Span::default());
            write_expr(out, &e, Pos::AppArg);
        }
    }
}

pub fn value_to_string(v: &Value) -> String {
    let e = value_to_expr(v, Span::default());
    expr_to_string(&e)
}

/// Render a whole program; parses back to an equal `Program`.
pub fn program_to_string(store: &TyStore, prog: &Program) -> String {
    let mut out = String::new();
    for def in &prog.defs {
        if def.no_exhaustiveness {
            out.push_str("# no_exhaustiveness\n");
        }
        out.push_str(&def.name);
        if let Some(sc) = &def.scheme {
            out.push_str(" : ");
            out.push_str(&store.scheme_to_string(sc));
        }
        out.push_str(" = fun ");
        out.push_str(&def.binder);
        out.push_str(" -> ");
        write_expr(&mut out, &def.body, Pos::Tail);
        out.push('\n');
    }
    out.push_str("in ");
    write_expr(&mut out, &prog.main, Pos::Tail);
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Program {
        let mut st = TyStore::new();
        parse_program(src, &mut st).expect("parse failure")
    }

    #[test]
    fn parses_minimal_program() {
        let p = parse("f = fun x -> x in f 1");
        assert_eq!(p.defs.len(), 1);
        assert_eq!(p.defs[0].name, "f");
        assert_eq!(p.defs[0].binder, "x");
        match &p.main.kind {
            ExprKind::App(f, a) => {
                assert_eq!(f.kind, ExprKind::Var("f".into()));
                assert_eq!(a.kind, ExprKind::Const(Const::Int(1.into())));
            }
            other => panic!("expected application, got {other:?}"),
        }
    }

    #[test]
    fn application_is_left_associative() {
        let p = parse("in (fun x -> x) 1 2");
        match &p.main.kind {
            ExprKind::App(inner, two) => {
                assert_eq!(two.kind, ExprKind::Const(Const::Int(2.into())));
                assert!(matches!(inner.kind, ExprKind::App(..)));
            }
            other => panic!("expected application, got {other:?}"),
        }
    }

    #[test]
    fn parses_case_with_guards_and_captures() {
        let p = parse(
            "in case (1, 2) of (x, ^y) when is_int x, oracle -> x; _ -> 0 end",
        );
        let ExprKind::Case(scrut, clauses) = &p.main.kind else {
            panic!("expected case");
        };
        assert!(matches!(scrut.kind, ExprKind::Pair(..)));
        assert_eq!(clauses.len(), 2);
        let pg = &clauses[0].gpat;
        assert_eq!(
            pg.pattern,
            Pattern::Pair(
                Box::new(Pattern::Bind("x".into())),
                Box::new(Pattern::Capture("y".into()))
            )
        );
        assert_eq!(
            pg.guard,
            Guard::And(
                Box::new(Guard::TestVar(GuardType::IsInt, "x".into())),
                Box::new(Guard::Oracle)
            )
        );
        assert_eq!(clauses[1].gpat.pattern, Pattern::Wildcard);
        assert_eq!(clauses[1].gpat.guard, Guard::True);
    }

    #[test]
    fn negative_literals_lex_in_patterns_and_exprs() {
        let p = parse("in case -3 of -3 -> -1.5; _ -> 0 end");
        let ExprKind::Case(scrut, clauses) = &p.main.kind else {
            panic!("expected case");
        };
        assert_eq!(scrut.kind, ExprKind::Const(Const::Int((-3).into())));
        assert_eq!(
            clauses[0].gpat.pattern,
            Pattern::Val(Value::Const(Const::Int((-3).into())))
        );
        assert_eq!(
            clauses[0].body.kind,
            ExprKind::Const(Const::Float(-1.5))
        );
    }

    #[test]
    fn duplicate_defs_rejected() {
        let mut st = TyStore::new();
        let r = parse_program("f = fun x -> x f = fun y -> y in f", &mut st);
        assert!(r.is_err());
        assert!(r.unwrap_err().message.contains("duplicate"));
    }

    #[test]
    fn pragma_attaches_to_next_def() {
        let src = "# no_exhaustiveness\nf = fun x -> case x of 1 -> 1 end\ng = fun y -> y\nin g";
        let p = parse(src);
        assert!(p.defs[0].no_exhaustiveness);
        assert!(!p.defs[1].no_exhaustiveness);
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse("# a comment\nf = fun x -> x # trailing\nin f 2");
        assert_eq!(p.defs.len(), 1);
    }

    #[test]
    fn annotations_parse_with_schemes() {
        let mut st = TyStore::new();
        let p = parse_program(
            "id : forall 'a. 'a -> 'a = fun x -> x in id 1",
            &mut st,
        )
        .unwrap();
        let sc = p.defs[0].scheme.as_ref().unwrap();
        assert_eq!(sc.vars.len(), 1);
        assert_eq!(st.scheme_to_string(sc), "forall 'a. 'a -> 'a");
    }

    #[test]
    fn shared_free_annotation_vars_use_one_table() {
        let mut st = TyStore::new();
        let p = parse_program(
            "f : 'a -> 'a = fun x -> x\ng : 'a -> 'a = fun y -> y\nin f",
            &mut st,
        )
        .unwrap();
        let s1 = p.defs[0].scheme.as_ref().unwrap();
        let s2 = p.defs[1].scheme.as_ref().unwrap();
        assert_eq!(s1.body, s2.body);
    }

    #[test]
    fn type_syntax_precedence() {
        let mut st = TyStore::new();
        let t = parse_type("Int -> Int | Float", &mut st).unwrap();
        // arrow swallows the union
        let int = st.mk_int();
        let float = st.mk_float();
        let u = st.mk_union(int, float);
        assert_eq!(t, st.mk_arrow(int, u));

        let t2 = parse_type("!Int | Float", &mut st).unwrap();
        let ni = st.mk_neg(int);
        assert_eq!(t2, st.mk_union(ni, float));

        let t3 = parse_type("Int & Float | Float", &mut st).unwrap();
        let i = st.mk_inter(int, float);
        assert_eq!(t3, st.mk_union(i, float));

        let t4 = parse_type("'a \\ 0", &mut st).unwrap();
        let a = st
            .free_ty_vars(t4)
            .iter()
            .copied()
            .next()
            .expect("has a var");
        let av = st.mk_var(a);
        let zero = st.mk_int_lit(0);
        assert_eq!(t4, st.mk_diff(av, zero));
    }

    #[test]
    fn recursive_type_parses_and_round_trips() {
        let mut st = TyStore::new();
        let t = parse_type("rec X. 0 | ('a, X)", &mut st).unwrap();
        let shown = st.ty_to_string(t);
        assert_eq!(shown, "rec X. 0 | ('a, X)");
        let again = parse_type(&shown, &mut st).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn non_contractive_rec_type_rejected() {
        let mut st = TyStore::new();
        assert!(parse_type("rec X. X", &mut st).is_err());
        assert!(parse_type("rec X. X | Int", &mut st).is_err());
        assert!(parse_type("rec X. !X", &mut st).is_err());
        // guarded through a pair is fine
        assert!(parse_type("rec X. (Int, X)", &mut st).is_ok());
    }

    #[test]
    fn unbound_recname_rejected() {
        let mut st = TyStore::new();
        let r = parse_type("rec X. (Int, Y)", &mut st);
        assert!(r.unwrap_err().message.contains("unbound recursive type name"));
    }

    #[test]
    fn free_vars_respect_case_scope() {
        let p = parse("in case z of (x, ^w) when is_int x, is_float q -> f x; _ -> y end");
        let fv = free_vars_expr(&p.main);
        let names: Vec<&str> = fv.iter().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["f", "q", "w", "y", "z"]);
    }

    #[test]
    fn gpat_free_vars_exclude_bound_guard_subjects() {
        let p = parse("in case z of x when is_int x -> x end");
        let ExprKind::Case(_, clauses) = &p.main.kind else {
            panic!()
        };
        assert!(free_vars_gpat(&clauses[0].gpat).is_empty());
    }

    #[test]
    fn vars_and_linearity() {
        let p = Pattern::Pair(
            Box::new(Pattern::Bind("x".into())),
            Box::new(Pattern::Pair(
                Box::new(Pattern::Bind("y".into())),
                Box::new(Pattern::Capture("x".into())),
            )),
        );
        let vs = vars_of(&p);
        assert_eq!(vs.iter().map(|s| s.as_str()).collect::<Vec<_>>(), vec!["x", "y"]);
        assert!(is_linear(&p));
        let nl = Pattern::Pair(
            Box::new(Pattern::Bind("x".into())),
            Box::new(Pattern::Bind("x".into())),
        );
        assert!(!is_linear(&nl));
    }

    #[test]
    fn alpha_equivalence() {
        let a = parse("in fun x -> x").main;
        let b = parse("in fun y -> y").main;
        assert!(alpha_equal(&a, &b));
        let c = parse("in fun x -> z").main;
        let d = parse("in fun y -> z").main;
        assert!(alpha_equal(&c, &d));
        let e = parse("in fun x -> x").main;
        let f = parse("in fun y -> z").main;
        assert!(!alpha_equal(&e, &f));
        // pattern binders rename too
        let g = parse("in case w of (a, b) when is_int a -> a end").main;
        let h = parse("in case w of (c, d) when is_int c -> c end").main;
        assert!(alpha_equal(&g, &h));
        let i = parse("in case w of (a, b) when is_int a -> a end").main;
        let j = parse("in case w of (c, d) when is_int d -> c end").main;
        assert!(!alpha_equal(&i, &j));
    }

    #[test]
    fn round_trip_representative_programs() {
        let sources = [
            "f = fun x -> x in f 1",
            "in (fun x -> (x, x)) 2",
            "in case (1, 2.5) of (x, y) when is_int x -> x; _ -> 0 end",
            "f = fun x -> case x of ^g -> 1; -7 -> 2; _ -> 3 end\ng = fun y -> y\nin f g",
            "# no_exhaustiveness\nh = fun x -> case x of 1 -> 1 end\nin h 1",
            "id : forall 'a. 'a -> 'a = fun x -> x in id id",
            "n : rec X. 0 | (Int, X) -> 0 = fun l -> 0 in n",
        ];
        for src in sources {
            let mut st = TyStore::new();
            let p1 = parse_program(src, &mut st).unwrap();
            let printed = program_to_string(&st, &p1);
            let p2 = parse_program(&printed, &mut st).unwrap();
            assert_eq!(p1, p2, "round trip failed for {src:?} -> {printed:?}");
        }
    }

    #[test]
    fn line_map_positions() {
        let src = "ab\ncd\ne";
        let lm = LineMap::new(src);
        assert_eq!(lm.line_col(0), (1, 1));
        assert_eq!(lm.line_col(1), (1, 2));
        assert_eq!(lm.line_col(3), (2, 1));
        assert_eq!(lm.line_col(6), (3, 1));
    }
}

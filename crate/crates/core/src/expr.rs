//! Symbolic scalar fields on chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted expression DAG over chart
//! coordinates and free parameters. Construction goes through smart
//! constructors that fold constants and absorb `0` and `1`; there is no
//! general simplifier. Every identity check in this crate is done pointwise
//! in floating point, so the only requirement on the algebra is exactness of
//! differentiation.
//!
//! Hot loops never walk the tree: [`Compiled`] flattens a batch of
//! expressions into a common-subexpression-eliminated tape.

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

/// A variable slot: either a chart coordinate or a bound parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Coord(u16),
    Param(u16),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Sqrt(Expr),
}

#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("singular evaluation: {0}")]
    Singular(&'static str),
    #[error("parameter p{0} is not bound")]
    Unbound(u16),
    #[error("coordinate x{0} is out of range for this point")]
    MissingCoord(u16),
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Expr {
    fn new(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(Node::Const(c))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    pub fn coord(i: usize) -> Self {
        Expr::new(Node::Var(Var::Coord(i as u16)))
    }

    pub fn param(i: usize) -> Self {
        Expr::new(Node::Var(Var::Param(i as u16)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c) * self
    }

    pub fn powi(&self, n: i32) -> Expr {
        match n {
            0 => return Expr::one(),
            1 => return self.clone(),
            _ => {}
        }
        if let Some(c) = self.as_const() {
            return Expr::constant(c.powi(n));
        }
        Expr::new(Node::Pow(self.clone(), n))
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::new(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::new(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::new(Node::Exp(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Expr {
        match self.as_const() {
            Some(c) if c >= 0.0 => Expr::constant(c.sqrt()),
            _ => Expr::new(Node::Sqrt(self.clone())),
        }
    }

    /// Balanced sum; keeps tree depth logarithmic in the number of terms.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut v: Vec<Expr> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        if v.is_empty() {
            return Expr::zero();
        }
        while v.len() > 1 {
            let mut next = Vec::with_capacity(v.len() / 2 + 1);
            let mut it = v.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a + b),
                    None => next.push(a),
                }
            }
            v = next;
        }
        v.pop().unwrap()
    }

    /// Exact partial derivative with respect to coordinate `k`.
    pub fn partial(&self, k: usize) -> Expr {
        let mut memo = HashMap::new();
        self.partial_memo(k as u16, &mut memo)
    }

    fn partial_memo(&self, k: u16, memo: &mut HashMap<*const Node, Expr>) -> Expr {
        let key = Arc::as_ptr(&self.0);
        if let Some(d) = memo.get(&key) {
            return d.clone();
        }
        let d = match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(Var::Coord(i)) => {
                if *i == k {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Var(Var::Param(_)) => Expr::zero(),
            Node::Add(a, b) => a.partial_memo(k, memo) + b.partial_memo(k, memo),
            Node::Sub(a, b) => a.partial_memo(k, memo) - b.partial_memo(k, memo),
            Node::Mul(a, b) => {
                let da = a.partial_memo(k, memo);
                let db = b.partial_memo(k, memo);
                da * b + a * db
            }
            Node::Div(a, b) => {
                let da = a.partial_memo(k, memo);
                let db = b.partial_memo(k, memo);
                if db.is_zero() {
                    da / b
                } else {
                    da / b - a * db / b.powi(2)
                }
            }
            Node::Neg(a) => -a.partial_memo(k, memo),
            Node::Pow(a, n) => {
                let da = a.partial_memo(k, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    Expr::constant(*n as f64) * a.powi(n - 1) * da
                }
            }
            Node::Sin(a) => a.cos() * a.partial_memo(k, memo),
            Node::Cos(a) => -(a.sin() * a.partial_memo(k, memo)),
            Node::Exp(a) => self * &a.partial_memo(k, memo),
            Node::Sqrt(a) => {
                let da = a.partial_memo(k, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    da / (Expr::constant(2.0) * self)
                }
            }
        };
        memo.insert(key, d.clone());
        d
    }

    /// One-off evaluation. Builds a tape each call; use [`Compiled`] in loops.
    pub fn eval(&self, coords: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        let c = Compiled::new(std::slice::from_ref(self));
        let mut out = [0.0];
        c.eval_into(coords, params, &mut Vec::new(), &mut out)?;
        Ok(out[0])
    }

    /// Number of distinct nodes reachable from this expression.
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<*const Node>) {
            if !seen.insert(Arc::as_ptr(&e.0)) {
                return;
            }
            match &*e.0 {
                Node::Const(_) | Node::Var(_) => {}
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                Node::Neg(a)
                | Node::Pow(a, _)
                | Node::Sin(a)
                | Node::Cos(a)
                | Node::Exp(a)
                | Node::Sqrt(a) => walk(a, seen),
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Renders with the given symbol names; the output parses back to the
    /// same tree under [`parse_expr`].
    pub fn to_source(&self, symbols: &SymbolTable) -> String {
        let mut s = String::new();
        write_expr(self, symbols, &mut s);
        s
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

// Folding on float constants reads better as guards than as literal patterns.
#[allow(clippy::redundant_guards)]
fn add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == 0.0 => b.clone(),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => match b.node() {
            Node::Neg(inner) => Expr::new(Node::Sub(a.clone(), inner.clone())),
            _ => Expr::new(Node::Add(a.clone(), b.clone())),
        },
    }
}

#[allow(clippy::redundant_guards)]
fn sub(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::new(Node::Sub(a.clone(), b.clone())),
    }
}

#[allow(clippy::redundant_guards)]
fn mul(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b.clone(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::new(Node::Mul(a.clone(), b.clone())),
    }
}

#[allow(clippy::redundant_guards)]
fn div(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::new(Node::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::new(Node::Neg(a.clone())),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

// ---------------------------------------------------------------------------
// Compiled tapes

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Const(f64),
    Coord(u16),
    Param(u16),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Pow(u32, i32),
    Sin(u32),
    Cos(u32),
    Exp(u32),
    Sqrt(u32),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Var(Var),
    Bin(u8, u32, u32),
    Un(u8, u32),
    Pow(u32, i32),
}

/// A flattened evaluation tape for a batch of expressions with shared
/// subexpressions merged structurally.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
    outputs: Vec<u32>,
    /// One more than the highest coordinate index each op depends on.
    levels: Vec<u16>,
}

impl Compiled {
    pub fn new(exprs: &[Expr]) -> Self {
        let mut ops = Vec::new();
        let mut by_ptr: HashMap<*const Node, u32> = HashMap::new();
        let mut by_key: HashMap<Key, u32> = HashMap::new();
        let mut outputs = Vec::with_capacity(exprs.len());
        for e in exprs {
            let slot = Self::emit(e, &mut ops, &mut by_ptr, &mut by_key);
            outputs.push(slot);
        }
        let mut levels: Vec<u16> = Vec::with_capacity(ops.len());
        for op in &ops {
            let l = match *op {
                Op::Const(_) | Op::Param(_) => 0,
                Op::Coord(i) => i + 1,
                Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) => {
                    levels[a as usize].max(levels[b as usize])
                }
                Op::Neg(a) | Op::Pow(a, _) | Op::Sin(a) | Op::Cos(a) | Op::Exp(a) | Op::Sqrt(a) => {
                    levels[a as usize]
                }
            };
            levels.push(l);
        }
        Compiled {
            ops,
            outputs,
            levels,
        }
    }

    fn emit(
        root: &Expr,
        ops: &mut Vec<Op>,
        by_ptr: &mut HashMap<*const Node, u32>,
        by_key: &mut HashMap<Key, u32>,
    ) -> u32 {
        // Iterative post-order walk.
        let mut stack: Vec<(&Expr, bool)> = vec![(root, false)];
        while let Some((e, expanded)) = stack.pop() {
            let ptr = Arc::as_ptr(&e.0);
            if by_ptr.contains_key(&ptr) {
                continue;
            }
            let children: Vec<&Expr> = match e.node() {
                Node::Const(_) | Node::Var(_) => vec![],
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    vec![a, b]
                }
                Node::Neg(a)
                | Node::Pow(a, _)
                | Node::Sin(a)
                | Node::Cos(a)
                | Node::Exp(a)
                | Node::Sqrt(a) => vec![a],
            };
            if !expanded && !children.is_empty() {
                stack.push((e, true));
                for c in children {
                    if !by_ptr.contains_key(&Arc::as_ptr(&c.0)) {
                        stack.push((c, false));
                    }
                }
                continue;
            }
            let s = |x: &Expr| by_ptr[&Arc::as_ptr(&x.0)];
            let (key, op) = match e.node() {
                Node::Const(c) => (Key::Const(c.to_bits()), Op::Const(*c)),
                Node::Var(v) => (
                    Key::Var(*v),
                    match v {
                        Var::Coord(i) => Op::Coord(*i),
                        Var::Param(i) => Op::Param(*i),
                    },
                ),
                Node::Add(a, b) => (Key::Bin(0, s(a), s(b)), Op::Add(s(a), s(b))),
                Node::Sub(a, b) => (Key::Bin(1, s(a), s(b)), Op::Sub(s(a), s(b))),
                Node::Mul(a, b) => (Key::Bin(2, s(a), s(b)), Op::Mul(s(a), s(b))),
                Node::Div(a, b) => (Key::Bin(3, s(a), s(b)), Op::Div(s(a), s(b))),
                Node::Neg(a) => (Key::Un(0, s(a)), Op::Neg(s(a))),
                Node::Sin(a) => (Key::Un(1, s(a)), Op::Sin(s(a))),
                Node::Cos(a) => (Key::Un(2, s(a)), Op::Cos(s(a))),
                Node::Exp(a) => (Key::Un(3, s(a)), Op::Exp(s(a))),
                Node::Sqrt(a) => (Key::Un(4, s(a)), Op::Sqrt(s(a))),
                Node::Pow(a, n) => (Key::Pow(s(a), *n), Op::Pow(s(a), *n)),
            };
            let slot = *by_key.entry(key).or_insert_with(|| {
                ops.push(op);
                (ops.len() - 1) as u32
            });
            by_ptr.insert(ptr, slot);
        }
        by_ptr[&Arc::as_ptr(&root.0)]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every output. `scratch` is reused between calls.
    pub fn eval_into(
        &self,
        coords: &[f64],
        params: &[f64],
        scratch: &mut Vec<f64>,
        out: &mut [f64],
    ) -> Result<(), EvalError> {
        self.eval_staged(coords, params, scratch, out, 0)
    }

    /// Like [`Compiled::eval_into`], but only recomputes ops that depend on
    /// coordinates with index `>= first_changed`. The caller guarantees that
    /// `scratch` holds the values of a previous call whose coordinates agree
    /// below that index; with `first_changed == 0` everything is evaluated.
    pub fn eval_staged(
        &self,
        coords: &[f64],
        params: &[f64],
        scratch: &mut Vec<f64>,
        out: &mut [f64],
        first_changed: usize,
    ) -> Result<(), EvalError> {
        let first_changed = if scratch.len() == self.ops.len() {
            first_changed
        } else {
            0
        };
        scratch.resize(self.ops.len(), 0.0);
        for (k, op) in self.ops.iter().enumerate() {
            if first_changed > 0 && (self.levels[k] as usize) <= first_changed {
                continue;
            }
            let v = match *op {
                Op::Const(c) => c,
                Op::Coord(i) => *coords.get(i as usize).ok_or(EvalError::MissingCoord(i))?,
                Op::Param(i) => *params.get(i as usize).ok_or(EvalError::Unbound(i))?,
                Op::Add(a, b) => scratch[a as usize] + scratch[b as usize],
                Op::Sub(a, b) => scratch[a as usize] - scratch[b as usize],
                Op::Mul(a, b) => scratch[a as usize] * scratch[b as usize],
                Op::Div(a, b) => {
                    let d = scratch[b as usize];
                    if d == 0.0 {
                        return Err(EvalError::Singular("division by zero"));
                    }
                    scratch[a as usize] / d
                }
                Op::Neg(a) => -scratch[a as usize],
                Op::Pow(a, n) => {
                    let x = scratch[a as usize];
                    if n < 0 && x == 0.0 {
                        return Err(EvalError::Singular("negative power of zero"));
                    }
                    x.powi(n)
                }
                Op::Sin(a) => scratch[a as usize].sin(),
                Op::Cos(a) => scratch[a as usize].cos(),
                Op::Exp(a) => scratch[a as usize].exp(),
                Op::Sqrt(a) => {
                    let x = scratch[a as usize];
                    if x < 0.0 {
                        return Err(EvalError::Singular("square root of a negative number"));
                    }
                    x.sqrt()
                }
            };
            scratch[k] = v;
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[slot as usize];
        }
        Ok(())
    }

    pub fn eval(&self, coords: &[f64], params: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(coords, params, &mut Vec::new(), &mut out)?;
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Parsing and printing

/// Names for coordinate and parameter slots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    pub coords: Vec<String>,
    pub params: Vec<String>,
}

impl SymbolTable {
    pub fn new<S: AsRef<str>>(coords: &[S], params: &[S]) -> Self {
        SymbolTable {
            coords: coords.iter().map(|s| s.as_ref().to_string()).collect(),
            params: params.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        if let Some(i) = self.coords.iter().position(|c| c == name) {
            return Some(Var::Coord(i as u16));
        }
        self.params
            .iter()
            .position(|c| c == name)
            .map(|i| Var::Param(i as u16))
    }

    fn name(&self, v: Var) -> String {
        match v {
            Var::Coord(i) => self
                .coords
                .get(i as usize)
                .cloned()
                .unwrap_or_else(|| format!("x{i}")),
            Var::Param(i) => self
                .params
                .get(i as usize)
                .cloned()
                .unwrap_or_else(|| format!("p{i}")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("unknown symbol `{name}` at column {col}")]
    UnknownSymbol { col: usize, name: String },
}

impl ParseError {
    /// 1-based column of the offending token.
    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { col, .. } | ParseError::UnknownSymbol { col, .. } => *col,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                col,
                msg: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), col));
        } else if "+-*/^".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else if c == '(' {
            out.push((Tok::LParen, col));
            i += 1;
        } else if c == ')' {
            out.push((Tok::RParen, col));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                col,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    symbols: &'a SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let mut sign = 1;
            if let Some(Tok::Op('-')) = self.peek() {
                sign = -1;
                self.pos += 1;
            }
            match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < i32::MAX as f64 => {
                    let n = *v as i32 * sign;
                    self.pos += 1;
                    Ok(base.powi(n))
                }
                _ => self.err("`^` requires an integer literal exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::constant(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func: Option<fn(&Expr) -> Expr> = match name.as_str() {
                    "sin" => Some(Expr::sin),
                    "cos" => Some(Expr::cos),
                    "exp" => Some(Expr::exp),
                    "sqrt" => Some(Expr::sqrt),
                    _ => None,
                };
                if let Some(f) = func {
                    if self.peek() != Some(&Tok::LParen) {
                        return self.err(format!("expected `(` after `{name}`"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(&Tok::RParen) {
                        return self.err("expected `)`");
                    }
                    self.pos += 1;
                    return Ok(f(&arg));
                }
                match self.symbols.lookup(&name) {
                    Some(v) => Ok(Expr::new(Node::Var(v))),
                    None if name == "pi" => Ok(Expr::constant(std::f64::consts::PI)),
                    None => Err(ParseError::UnknownSymbol { col, name }),
                }
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression over the given coordinate and parameter names.
pub fn parse_expr(source: &str, symbols: &SymbolTable) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: source.len() + 1,
        symbols,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Const(c) if *c < 0.0 || c.is_sign_negative() => 0,
        _ => 5,
    }
}

fn write_child(e: &Expr, min: u8, symbols: &SymbolTable, out: &mut String) {
    if prec(e) < min {
        out.push('(');
        write_expr(e, symbols, out);
        out.push(')');
    } else {
        write_expr(e, symbols, out);
    }
}

fn write_expr(e: &Expr, symbols: &SymbolTable, out: &mut String) {
    use std::fmt::Write;
    match e.node() {
        Node::Const(c) => {
            if c.is_sign_negative() {
                let _ = write!(out, "-{}", -c);
            } else {
                let _ = write!(out, "{c}");
            }
        }
        Node::Var(v) => out.push_str(&symbols.name(*v)),
        Node::Add(a, b) => {
            write_child(a, 1, symbols, out);
            out.push_str(" + ");
            write_child(b, 2, symbols, out);
        }
        Node::Sub(a, b) => {
            write_child(a, 1, symbols, out);
            out.push_str(" - ");
            write_child(b, 2, symbols, out);
        }
        Node::Mul(a, b) => {
            write_child(a, 2, symbols, out);
            out.push_str(" * ");
            write_child(b, 3, symbols, out);
        }
        Node::Div(a, b) => {
            write_child(a, 2, symbols, out);
            out.push_str(" / ");
            write_child(b, 3, symbols, out);
        }
        Node::Neg(a) => {
            out.push('-');
            write_child(a, 3, symbols, out);
        }
        Node::Pow(a, n) => {
            write_child(a, 5, symbols, out);
            let _ = write!(out, "^{n}");
        }
        Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Sqrt(a) => {
            let name = match e.node() {
                Node::Sin(_) => "sin",
                Node::Cos(_) => "cos",
                Node::Exp(_) => "exp",
                _ => "sqrt",
            };
            out.push_str(name);
            out.push('(');
            write_expr(a, symbols, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source(&SymbolTable::default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sym(c: &[&str], p: &[&str]) -> SymbolTable {
        SymbolTable::new(c, p)
    }

    #[test]
    fn grammar_cases() {
        let s = sym(&["th", "ph"], &[]);
        let e = parse_expr("sin(th)*cos(ph)", &s).unwrap();
        assert!((e.eval(&[0.3, 0.2], &[]).unwrap() - 0.3f64.sin() * 0.2f64.cos()).abs() < 1e-15);
        let e = parse_expr("th^2 + 3", &s).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0], &[]).unwrap(), 7.0);
        let err = parse_expr("sin(q)", &sym(&["th"], &[])).unwrap_err();
        assert!(matches!(err, ParseError::UnknownSymbol { ref name, col: 5 } if name == "q"));
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let s = sym(&["x"], &[]);
        assert_eq!(parse_expr("x + * 2", &s).unwrap_err().column(), 5);
        assert_eq!(parse_expr("x^1.5", &s).unwrap_err().column(), 3);
        assert_eq!(parse_expr("(x + 1", &s).unwrap_err().column(), 7);
        assert!(parse_expr("x $ 1", &s).is_err());
    }

    #[test]
    fn precedence() {
        let s = sym(&["x"], &[]);
        let v = |src: &str| parse_expr(src, &s).unwrap().eval(&[2.0], &[]).unwrap();
        assert_eq!(v("-x^2"), -4.0);
        assert_eq!(v("1 - x - 1"), -2.0);
        assert_eq!(v("8 / x / 2"), 2.0);
        assert_eq!(v("x^-1"), 0.5);
        assert_eq!(v("2 * -x"), -4.0);
    }

    #[test]
    fn derivatives() {
        let s = sym(&["th", "ph"], &[]);
        let e = parse_expr("sin(th)", &s).unwrap();
        assert_eq!(e.partial(0), parse_expr("cos(th)", &s).unwrap());
        assert!(parse_expr("th^2", &s).unwrap().partial(1).is_zero());
        assert!(Expr::constant(3.0).partial(0).is_zero());

        // finite-difference oracle at th = 0
        let f = parse_expr("th*cos(th)", &s).unwrap();
        let h = 1e-6;
        let fd = (f.eval(&[h, 0.0], &[]).unwrap() - f.eval(&[-h, 0.0], &[]).unwrap()) / (2.0 * h);
        let d = f.partial(0).eval(&[0.0, 0.0], &[]).unwrap();
        assert!((fd - 1.0).abs() < 1e-9);
        assert!((d - fd).abs() < 1e-9);
    }

    #[test]
    fn evaluation() {
        let s = sym(&["th"], &["lam"]);
        let e = parse_expr("sin(th)", &s).unwrap();
        assert!((e.eval(&[PI / 2.0], &[]).unwrap() - 1.0).abs() < 1e-15);
        let e = parse_expr("lam*cos(th)", &s).unwrap();
        assert_eq!(e.eval(&[0.0], &[2.0]).unwrap(), 2.0);
        assert_eq!(e.eval(&[0.0], &[]).unwrap_err(), EvalError::Unbound(0));
        let e = parse_expr("1/th", &s).unwrap();
        assert!(matches!(e.eval(&[0.0], &[]), Err(EvalError::Singular(_))));
        let e = parse_expr("sqrt(th)", &s).unwrap();
        assert!(matches!(e.eval(&[-1.0], &[]), Err(EvalError::Singular(_))));
    }

    #[test]
    fn folding() {
        let x = Expr::coord(0);
        assert!((Expr::zero() * &x).is_zero());
        assert_eq!(Expr::one() * &x, x);
        assert_eq!(&x + Expr::zero(), x);
        assert_eq!(-(-x.clone()), x);
        assert_eq!(
            (Expr::constant(2.0) + Expr::constant(3.0)).as_const(),
            Some(5.0)
        );
    }

    #[test]
    fn tape_merges_common_subexpressions() {
        let x = Expr::coord(0);
        let a = x.sin() * x.sin();
        let b = x.sin() + Expr::one();
        let c = Compiled::new(&[a, b]);
        // x, sin(x), mul, 1, add
        assert_eq!(c.len(), 5);
        let v = c.eval(&[0.5], &[]).unwrap();
        assert!((v[0] - 0.5f64.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn print_round_trip() {
        let s = sym(&["a", "b"], &["k"]);
        for src in [
            "-a^2 + (b - 1) / (a - -b)",
            "sin(a)*cos(b)^3 - exp(-k*a)",
            "sqrt(a*a + 1) / -2.5",
            "(a + b)^-2 * (a - (b - a))",
            "-(a*b)",
            "1e-7 * a",
        ] {
            let e1 = parse_expr(src, &s).unwrap();
            let printed = e1.to_source(&s);
            let e2 = parse_expr(&printed, &s).unwrap();
            assert_eq!(e1, e2, "{src} -> {printed}");
        }
    }
}

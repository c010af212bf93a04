//! The xTCL signature, intrinsically typed closed terms, the textual term
//! syntax, bounded enumeration, and finite term universes.
//!
//! Terms are hash-consed trees behind `Arc`; construction goes through
//! [`Term::new`], which checks the arity table, so every `Term` value is
//! well-typed by construction.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::lex::Cursor;
use crate::semantics::{Behaviour, EvalError};
use crate::types::{enumerate_types, parse_ty, Ty};

/// A user-declared first-order operator with a fixed (monomorphic) sort.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExtOp {
    pub name: String,
    pub params: Vec<Ty>,
    pub result: Ty,
}

/// Operator symbol without its type parameters.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum OpSym {
    E,
    S,
    Sp,
    Spp,
    K,
    Kp,
    I,
    App,
    Ext(Arc<ExtOp>),
}

impl OpSym {
    pub const BUILTIN: [OpSym; 8] =
        [OpSym::E, OpSym::S, OpSym::Sp, OpSym::Spp, OpSym::K, OpSym::Kp, OpSym::I, OpSym::App];

    pub fn name(&self) -> &str {
        match self {
            OpSym::E => "e",
            OpSym::S => "S",
            OpSym::Sp => "S'",
            OpSym::Spp => "S''",
            OpSym::K => "K",
            OpSym::Kp => "K'",
            OpSym::I => "I",
            OpSym::App => "app",
            OpSym::Ext(x) => &x.name,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            OpSym::E | OpSym::S | OpSym::K | OpSym::I => 0,
            OpSym::Sp | OpSym::Kp => 1,
            OpSym::Spp | OpSym::App => 2,
            OpSym::Ext(x) => x.params.len(),
        }
    }

    /// Number of type parameters the symbol is indexed by.
    pub fn n_type_params(&self) -> usize {
        match self {
            OpSym::E | OpSym::Ext(_) => 0,
            OpSym::I => 1,
            OpSym::K | OpSym::Kp | OpSym::App => 2,
            OpSym::S | OpSym::Sp | OpSym::Spp => 3,
        }
    }

    pub fn builtin_by_name(name: &str) -> Option<OpSym> {
        OpSym::BUILTIN.into_iter().find(|s| s.name() == name)
    }

    /// Panics if `params` has the wrong length.
    pub fn instantiate(&self, params: &[Ty]) -> Op {
        assert_eq!(params.len(), self.n_type_params(), "wrong number of type parameters for {}", self.name());
        let p = |i: usize| params[i].clone();
        match self {
            OpSym::E => Op::E,
            OpSym::S => Op::S(p(0), p(1), p(2)),
            OpSym::Sp => Op::Sp(p(0), p(1), p(2)),
            OpSym::Spp => Op::Spp(p(0), p(1), p(2)),
            OpSym::K => Op::K(p(0), p(1)),
            OpSym::Kp => Op::Kp(p(0), p(1)),
            OpSym::I => Op::I(p(0)),
            OpSym::App => Op::App(p(0), p(1)),
            OpSym::Ext(x) => Op::Ext(x.clone()),
        }
    }
}

impl fmt::Display for OpSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An operator instance: symbol plus its type parameters.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Op {
    E,
    S(Ty, Ty, Ty),
    Sp(Ty, Ty, Ty),
    Spp(Ty, Ty, Ty),
    K(Ty, Ty),
    Kp(Ty, Ty),
    I(Ty),
    App(Ty, Ty),
    Ext(Arc<ExtOp>),
}

impl Op {
    pub fn sym(&self) -> OpSym {
        match self {
            Op::E => OpSym::E,
            Op::S(..) => OpSym::S,
            Op::Sp(..) => OpSym::Sp,
            Op::Spp(..) => OpSym::Spp,
            Op::K(..) => OpSym::K,
            Op::Kp(..) => OpSym::Kp,
            Op::I(_) => OpSym::I,
            Op::App(..) => OpSym::App,
            Op::Ext(x) => OpSym::Ext(x.clone()),
        }
    }

    pub fn type_params(&self) -> Vec<Ty> {
        match self {
            Op::E | Op::Ext(_) => vec![],
            Op::I(a) => vec![a.clone()],
            Op::K(a, b) | Op::Kp(a, b) | Op::App(a, b) => vec![a.clone(), b.clone()],
            Op::S(a, b, c) | Op::Sp(a, b, c) | Op::Spp(a, b, c) => vec![a.clone(), b.clone(), c.clone()],
        }
    }

    /// The arity table: argument types and result type.
    pub fn signature(&self) -> (Vec<Ty>, Ty) {
        let arr = Ty::arrow;
        match self {
            Op::E => (vec![], Ty::Unit),
            Op::S(a, b, c) => {
                let abc = arr(a.clone(), arr(b.clone(), c.clone()));
                let ab = arr(a.clone(), b.clone());
                (vec![], arr(abc, arr(ab, arr(a.clone(), c.clone()))))
            }
            Op::Sp(a, b, c) => {
                let abc = arr(a.clone(), arr(b.clone(), c.clone()));
                let ab = arr(a.clone(), b.clone());
                (vec![abc], arr(ab, arr(a.clone(), c.clone())))
            }
            Op::Spp(a, b, c) => {
                let abc = arr(a.clone(), arr(b.clone(), c.clone()));
                let ab = arr(a.clone(), b.clone());
                (vec![abc, ab], arr(a.clone(), c.clone()))
            }
            Op::K(a, b) => (vec![], arr(a.clone(), arr(b.clone(), a.clone()))),
            Op::Kp(a, b) => (vec![a.clone()], arr(b.clone(), a.clone())),
            Op::I(a) => (vec![], arr(a.clone(), a.clone())),
            Op::App(a, b) => (vec![arr(a.clone(), b.clone()), a.clone()], b.clone()),
            Op::Ext(x) => (x.params.clone(), x.result.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("operator {op} expects {expected} argument(s), got {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("argument {index} of {op} has type {found}, expected {expected}")]
    Mismatch { op: String, index: usize, expected: Ty, found: Ty },
    #[error("cannot apply a term of non-function type {0}")]
    NotAFunction(Ty),
}

/// Checks an operator against the types of its arguments and returns the
/// result type.
pub fn check_op(op: &Op, arg_tys: &[Ty]) -> Result<Ty, TypeError> {
    let (expected, result) = op.signature();
    if expected.len() != arg_tys.len() {
        return Err(TypeError::Arity { op: op.sym().name().to_string(), expected: expected.len(), found: arg_tys.len() });
    }
    for (index, (want, got)) in expected.iter().zip(arg_tys).enumerate() {
        if want != got {
            return Err(TypeError::Mismatch {
                op: op.sym().name().to_string(),
                index,
                expected: want.clone(),
                found: got.clone(),
            });
        }
    }
    Ok(result)
}

struct Node {
    op: Op,
    args: Vec<Term>,
    ty: Ty,
    size: usize,
    hash: u64,
}

/// A closed, well-typed term.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl Term {
    pub fn new(op: Op, args: Vec<Term>) -> Result<Term, TypeError> {
        let arg_tys: Vec<Ty> = args.iter().map(|a| a.ty().clone()).collect();
        let ty = check_op(&op, &arg_tys)?;
        let size = 1 + args.iter().map(Term::size).sum::<usize>();
        let mut h = DefaultHasher::new();
        op.hash(&mut h);
        for a in &args {
            h.write_u64(a.0.hash);
        }
        let hash = h.finish();
        Ok(Term(Arc::new(Node { op, args, ty, size, hash })))
    }

    pub fn e() -> Term {
        Term::new(Op::E, vec![]).unwrap()
    }

    pub fn i(a: Ty) -> Term {
        Term::new(Op::I(a), vec![]).unwrap()
    }

    pub fn k(a: Ty, b: Ty) -> Term {
        Term::new(Op::K(a, b), vec![]).unwrap()
    }

    pub fn s(a: Ty, b: Ty, c: Ty) -> Term {
        Term::new(Op::S(a, b, c), vec![]).unwrap()
    }

    /// `K'_{τ1,τ2}(p)`; `τ1` is read off `p`.
    pub fn kp(b: Ty, p: Term) -> Term {
        let a = p.ty().clone();
        Term::new(Op::Kp(a, b), vec![p]).unwrap()
    }

    pub fn sp(p: Term) -> Result<Term, TypeError> {
        let (a, b, c) = split3(p.ty())?;
        Term::new(Op::Sp(a, b, c), vec![p])
    }

    pub fn spp(p: Term, q: Term) -> Result<Term, TypeError> {
        let (a, b, c) = split3(p.ty())?;
        Term::new(Op::Spp(a, b, c), vec![p, q])
    }

    /// Application with type parameters read off the function.
    pub fn app(f: Term, x: Term) -> Result<Term, TypeError> {
        let (a, b) = match f.ty().as_arrow() {
            Some((a, b)) => (a.clone(), b.clone()),
            None => return Err(TypeError::NotAFunction(f.ty().clone())),
        };
        Term::new(Op::App(a, b), vec![f, x])
    }

    pub fn op(&self) -> &Op {
        &self.0.op
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    pub fn ty(&self) -> &Ty {
        &self.0.ty
    }

    /// Number of operator nodes.
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// Every subterm, root first.
    pub fn subterms(&self) -> Vec<Term> {
        let mut out = vec![self.clone()];
        let mut i = 0;
        while i < out.len() {
            let args = out[i].args().to_vec();
            out.extend(args);
            i += 1;
        }
        out
    }

    /// Largest type size over all nodes.
    pub fn max_node_type_size(&self) -> usize {
        self.args().iter().map(Term::max_node_type_size).fold(self.ty().size(), usize::max)
    }
}

fn split3(t: &Ty) -> Result<(Ty, Ty, Ty), TypeError> {
    let (a, bc) = t.as_arrow().ok_or_else(|| TypeError::NotAFunction(t.clone()))?;
    let (b, c) = bc.as_arrow().ok_or_else(|| TypeError::NotAFunction(bc.clone()))?;
    Ok((a.clone(), b.clone(), c.clone()))
}

/// `type_of`: total on constructed terms.
pub fn type_of(t: &Term) -> Ty {
    t.ty().clone()
}

pub fn term_size(t: &Term) -> usize {
    t.size()
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.op == other.0.op && self.0.args == other.0.args)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

fn write_params(f: &mut fmt::Formatter<'_>, ps: &[Ty]) -> fmt::Result {
    write!(f, "[")?;
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, "]")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op() {
            Op::E => write!(f, "e"),
            Op::App(..) => write!(f, "(app {} {})", self.args()[0], self.args()[1]),
            op => {
                write!(f, "{}", op.sym().name())?;
                let ps = op.type_params();
                if !ps.is_empty() {
                    write_params(f, &ps)?;
                }
                if !self.args().is_empty() {
                    write!(f, "(")?;
                    for (i, a) in self.args().iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The operator symbols available for building terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    ops: Vec<OpSym>,
}

impl Signature {
    pub fn xtcl() -> Signature {
        Signature { ops: OpSym::BUILTIN.to_vec() }
    }

    pub fn new(ops: Vec<OpSym>) -> Signature {
        Signature { ops }
    }

    pub fn ops(&self) -> &[OpSym] {
        &self.ops
    }

    pub fn lookup(&self, name: &str) -> Option<&OpSym> {
        self.ops.iter().find(|s| s.name() == name)
    }

    pub fn ext_ops(&self) -> impl Iterator<Item = &Arc<ExtOp>> {
        self.ops.iter().filter_map(|s| match s {
            OpSym::Ext(x) => Some(x),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parses the textual term syntax against the xTCL signature.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    parse_term_in(src, &Signature::xtcl())
}

/// Parses the textual term syntax, resolving extension operators in `sig`.
pub fn parse_term_in(src: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Cursor::new(src);
    let t = term_at(&mut p, sig)?;
    p.skip_ws();
    if !p.at_end() {
        return Err(ParseError { pos: p.pos(), msg: "trailing input after term".into() });
    }
    Ok(t)
}

fn term_at(p: &mut Cursor<'_>, sig: &Signature) -> Result<Term, ParseError> {
    p.skip_ws();
    let start = p.pos();
    let typed = |r: Result<Term, TypeError>| r.map_err(|e| ParseError { pos: start, msg: e.to_string() });
    if p.eat('(') {
        p.skip_ws();
        if !p.eat_keyword("app") {
            return Err(ParseError { pos: p.pos(), msg: "expected `app` after `(`".into() });
        }
        let f = term_at(p, sig)?;
        let x = term_at(p, sig)?;
        p.skip_ws();
        if !p.eat(')') {
            return Err(ParseError { pos: p.pos(), msg: "expected `)` closing application".into() });
        }
        return typed(Term::app(f, x));
    }
    let name = p.ident().ok_or_else(|| ParseError { pos: start, msg: "expected a term".into() })?;
    let sym = match OpSym::builtin_by_name(name) {
        Some(OpSym::App) | None => sig.lookup(name).cloned(),
        some => some,
    }
    .ok_or_else(|| ParseError { pos: start, msg: format!("unknown operator `{name}`") })?;
    let mut params = Vec::new();
    if sym.n_type_params() > 0 {
        p.skip_ws();
        if !p.eat('[') {
            return Err(ParseError { pos: p.pos(), msg: format!("`{name}` needs type parameters `[…]`") });
        }
        loop {
            params.push(parse_ty(p).map_err(|e| ParseError { pos: e.pos, msg: e.msg })?);
            p.skip_ws();
            if p.eat(']') {
                break;
            }
            if !p.eat(',') {
                return Err(ParseError { pos: p.pos(), msg: "expected `,` or `]`".into() });
            }
        }
        if params.len() != sym.n_type_params() {
            return Err(ParseError {
                pos: start,
                msg: format!("`{name}` takes {} type parameter(s), got {}", sym.n_type_params(), params.len()),
            });
        }
    }
    let mut args = Vec::new();
    if sym.arity() > 0 {
        p.skip_ws();
        if !p.eat('(') {
            return Err(ParseError { pos: p.pos(), msg: format!("`{name}` expects {} argument(s)", sym.arity()) });
        }
        loop {
            args.push(term_at(p, sig)?);
            p.skip_ws();
            if p.eat(')') {
                break;
            }
            if !p.eat(',') {
                return Err(ParseError { pos: p.pos(), msg: "expected `,` or `)`".into() });
            }
        }
    }
    typed(Term::new(sym.instantiate(&params), args))
}

/// Bounded enumeration of well-typed closed terms in which every node's
/// type has size at most `type_bound`.
pub struct Enumerator {
    types: Vec<Ty>,
    type_bound: usize,
    // by_size[n][ty] = terms of size exactly n
    by_size: Vec<HashMap<Ty, Vec<Term>>>,
}

impl Enumerator {
    pub fn new(sig: &Signature, size_bound: usize, type_bound: usize) -> Enumerator {
        let types = enumerate_types(type_bound);
        let mut en = Enumerator { types, type_bound, by_size: vec![HashMap::new()] };
        for n in 1..=size_bound {
            let level = en.level(sig, n);
            en.by_size.push(level);
        }
        en
    }

    fn level(&self, sig: &Signature, n: usize) -> HashMap<Ty, Vec<Term>> {
        let mut out: HashMap<Ty, Vec<Term>> = HashMap::new();
        for sym in sig.ops() {
            let arity = sym.arity();
            if (arity == 0) != (n == 1) || n <= arity {
                continue;
            }
            for params in tuples(&self.types, sym.n_type_params()) {
                let op = sym.instantiate(&params);
                let (arg_tys, res) = op.signature();
                if res.size() > self.type_bound || arg_tys.iter().any(|t| t.size() > self.type_bound) {
                    continue;
                }
                for split in compositions(n - 1, arity) {
                    let pools: Vec<&[Term]> = split
                        .iter()
                        .zip(&arg_tys)
                        .map(|(&k, t)| self.by_size[k].get(t).map(Vec::as_slice).unwrap_or(&[]))
                        .collect();
                    for args in product(&pools) {
                        let t = Term::new(op.clone(), args).expect("enumeration builds well-typed terms");
                        out.entry(res.clone()).or_default().push(t);
                    }
                }
            }
        }
        out
    }

    /// Terms of type `ty`, ascending by size.
    pub fn terms_of(&self, ty: &Ty) -> Vec<Term> {
        self.by_size.iter().filter_map(|lvl| lvl.get(ty)).flatten().cloned().collect()
    }

    pub fn types(&self) -> &[Ty] {
        &self.types
    }
}

/// All well-typed closed terms of type `ty` with `term_size ≤ size_bound`
/// whose every node type has size `≤ type_bound`.
pub fn enumerate_terms(sig: &Signature, ty: &Ty, size_bound: usize, type_bound: usize) -> Vec<Term> {
    Enumerator::new(sig, size_bound, type_bound).terms_of(ty)
}

fn tuples(types: &[Ty], n: usize) -> Vec<Vec<Ty>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                types.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Ordered splits of `total` into `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn product(pools: &[&[Term]]) -> Vec<Vec<Term>> {
    let mut out = vec![vec![]];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for t in pool.iter() {
                let mut v: Vec<Term> = prefix.clone();
                v.push(t.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureStatus {
    Closed,
    Truncated,
}

/// Finite stand-in for the carrier of closed terms: per-type slices of
/// terms with membership index. Element ids are dense and stable.
#[derive(Clone)]
pub struct Universe {
    sig: Signature,
    size_bound: usize,
    type_bound: usize,
    label_bound: usize,
    types: Vec<Ty>,
    type_ids: HashMap<Ty, usize>,
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
    elem_ty: Vec<usize>,
    slices: Vec<Vec<usize>>,
    // members not added by closure with size ≤ label_bound
    labels: Vec<Vec<usize>>,
    from_closure: Vec<bool>,
    status: Vec<ClosureStatus>,
}

impl Universe {
    /// An empty universe over all types of size `≤ type_bound`.
    pub fn empty(sig: Signature, size_bound: usize, type_bound: usize) -> Universe {
        let types = enumerate_types(type_bound);
        let type_ids = types.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let n = types.len();
        Universe {
            sig,
            size_bound,
            type_bound,
            label_bound: size_bound,
            types,
            type_ids,
            terms: Vec::new(),
            index: HashMap::new(),
            elem_ty: Vec::new(),
            slices: vec![Vec::new(); n],
            labels: vec![Vec::new(); n],
            from_closure: Vec::new(),
            status: vec![ClosureStatus::Truncated; n],
        }
    }

    /// All enumerated terms at every type in range.
    pub fn enumerate(sig: Signature, size_bound: usize, type_bound: usize) -> Universe {
        let en = Enumerator::new(&sig, size_bound, type_bound);
        let mut u = Universe::empty(sig, size_bound, type_bound);
        for ty in en.types().to_vec() {
            for t in en.terms_of(&ty) {
                u.insert(t, false);
            }
        }
        u
    }

    /// A universe holding exactly `terms` (no subterms are added); the label
    /// bound is `size_bound`.
    pub fn from_terms(sig: Signature, size_bound: usize, type_bound: usize, terms: impl IntoIterator<Item = Term>) -> Universe {
        let mut u = Universe::empty(sig, size_bound, type_bound);
        for t in terms {
            u.insert(t, false);
        }
        u
    }

    /// Inserts `t`; `None` if its type is out of range.
    fn insert(&mut self, t: Term, by_closure: bool) -> Option<usize> {
        if let Some(&id) = self.index.get(&t) {
            return Some(id);
        }
        let ty_id = *self.type_ids.get(t.ty())?;
        let id = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t, id);
        self.elem_ty.push(ty_id);
        self.slices[ty_id].push(id);
        if !by_closure && self.terms[id].size() <= self.label_bound {
            self.labels[ty_id].push(id);
        }
        self.from_closure.push(by_closure);
        Some(id)
    }

    /// Restricts labels to non-closure members of term size `≤ lb`.
    /// Call before closing.
    pub fn with_label_bound(mut self, lb: usize) -> Universe {
        self.label_bound = lb;
        for l in &mut self.labels {
            l.clear();
        }
        for id in 0..self.terms.len() {
            if !self.from_closure[id] && self.terms[id].size() <= lb {
                self.labels[self.elem_ty[id]].push(id);
            }
        }
        self
    }

    pub fn label_bound(&self) -> usize {
        self.label_bound
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size_bound(&self) -> usize {
        self.size_bound
    }

    pub fn type_bound(&self) -> usize {
        self.type_bound
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> &Term {
        &self.terms[id]
    }

    pub fn id_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    pub fn types(&self) -> &[Ty] {
        &self.types
    }

    pub fn type_id(&self, ty: &Ty) -> Option<usize> {
        self.type_ids.get(ty).copied()
    }

    pub fn elem_type(&self, id: usize) -> usize {
        self.elem_ty[id]
    }

    /// Element ids of the `ty`-slice (empty if out of range).
    pub fn slice(&self, ty: &Ty) -> &[usize] {
        match self.type_ids.get(ty) {
            Some(&i) => &self.slices[i],
            None => &[],
        }
    }

    /// Members of the `ty`-slice that serve as labels: those not added by
    /// closure and of size at most the label bound. Labelled transitions
    /// are only ever taken with these.
    pub fn labels(&self, ty: &Ty) -> &[usize] {
        match self.type_ids.get(ty) {
            Some(&i) => &self.labels[i],
            None => &[],
        }
    }

    pub fn slice_by_id(&self, ty_id: usize) -> &[usize] {
        &self.slices[ty_id]
    }

    pub fn added_by_closure(&self, id: usize) -> bool {
        self.from_closure[id]
    }

    pub fn status(&self, ty: &Ty) -> Option<ClosureStatus> {
        self.type_ids.get(ty).map(|&i| self.status[i])
    }

    pub fn is_closed(&self) -> bool {
        self.status.iter().all(|s| *s == ClosureStatus::Closed)
    }

    pub fn stats(&self) -> UniverseStats {
        UniverseStats {
            size_bound: self.size_bound,
            type_bound: self.type_bound,
            label_bound: self.label_bound,
            members: self.len(),
            labels: self.labels.iter().map(Vec::len).sum(),
            added_by_closure: self.from_closure.iter().filter(|b| **b).count(),
            closed: self.is_closed(),
            per_type: self
                .types
                .iter()
                .enumerate()
                .map(|(i, t)| SliceStats { ty: t.to_string(), count: self.slices[i].len(), status: self.status[i] })
                .collect(),
        }
    }

    /// Recomputes per-type closure status: a type is closed when every
    /// member's subterms, reducts and labelled results (labels drawn from
    /// [`Universe::labels`]) are members.
    pub fn verify_closure(&mut self, step: &dyn Fn(&Term) -> Result<Vec<Behaviour>, EvalError>) -> Result<(), EvalError> {
        let mut status = vec![ClosureStatus::Closed; self.types.len()];
        for id in 0..self.terms.len() {
            let t = self.terms[id].clone();
            let ty_id = self.elem_ty[id];
            let mut ok = t.args().iter().all(|a| self.contains(a));
            if ok {
                'obs: for b in step(&t)? {
                    match b {
                        Behaviour::Step(t2) => {
                            if !self.contains(&t2) {
                                ok = false;
                                break 'obs;
                            }
                        }
                        Behaviour::UnitDone => {}
                        Behaviour::Fun(f) => {
                            for &s in self.labels(f.domain()) {
                                if !self.contains(&f.apply(&self.terms[s])?) {
                                    ok = false;
                                    break 'obs;
                                }
                            }
                        }
                    }
                }
            }
            if !ok {
                status[ty_id] = ClosureStatus::Truncated;
            }
        }
        self.status = status;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceStats {
    #[serde(rename = "type")]
    pub ty: String,
    pub count: usize,
    pub status: ClosureStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniverseStats {
    pub size_bound: usize,
    pub type_bound: usize,
    pub label_bound: usize,
    pub members: usize,
    pub labels: usize,
    pub added_by_closure: usize,
    pub closed: bool,
    pub per_type: Vec<SliceStats>,
}

/// Adds subterms, unlabelled reducts and labelled results of members until
/// nothing new appears or `fuel` insertions have been spent. The resulting
/// per-type status records whether each slice is actually closed.
///
/// Labels are drawn from [`Universe::labels`] only: `S''` rebuilds larger
/// terms from its label, so closing under labels taken from the growing
/// universe would never stop, and even the full enumerated slices make the
/// closure grow into the millions at the default bounds.
pub fn close_universe(
    mut u: Universe,
    step: &dyn Fn(&Term) -> Result<Vec<Behaviour>, EvalError>,
    fuel: usize,
) -> Result<Universe, EvalError> {
    let mut fuel_left = fuel;
    let mut pending: VecDeque<Term> = VecDeque::new();
    let mut worklist: VecDeque<usize> = (0..u.len()).collect();
    for t in u.terms.clone() {
        pending.extend(t.args().iter().cloned());
    }
    'outer: loop {
        if let Some(t) = pending.pop_front() {
            if u.contains(&t) {
                continue;
            }
            if fuel_left == 0 {
                break 'outer;
            }
            let Some(id) = u.insert(t.clone(), true) else { continue };
            fuel_left -= 1;
            pending.extend(t.args().iter().cloned());
            worklist.push_back(id);
            continue;
        }
        if let Some(id) = worklist.pop_front() {
            let t = u.terms[id].clone();
            for b in step(&t)? {
                match b {
                    Behaviour::Step(t2) => pending.push_back(t2),
                    Behaviour::UnitDone => {}
                    Behaviour::Fun(f) => {
                        for &s in u.labels(f.domain()) {
                            pending.push_back(f.apply(&u.terms[s])?);
                        }
                    }
                }
            }
            continue;
        }
        break;
    }
    u.verify_closure(step)?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Ty {
        Ty::Unit
    }
    fn uu() -> Ty {
        Ty::arrow(u(), u())
    }

    #[test]
    fn typing_examples() {
        assert_eq!(type_of(&Term::e()), u());
        assert_eq!(type_of(&Term::i(u())), uu());
        let t = Term::app(Term::i(u()), Term::e()).unwrap();
        assert_eq!(type_of(&t), u());
        assert_eq!(term_size(&t), 3);
        assert_eq!(term_size(&Term::e()), 1);
        let k = Term::k(u(), u());
        let k2 = Term::k(u(), uu());
        let spp = Term::spp(k2, k).unwrap();
        assert_eq!(term_size(&spp), 3);
        assert_eq!(spp.ty(), &uu());
    }

    #[test]
    fn ill_typed_construction_is_rejected() {
        let err = Term::app(Term::e(), Term::e()).unwrap_err();
        assert_eq!(err, TypeError::NotAFunction(u()));
        let err = Term::app(Term::i(uu()), Term::e()).unwrap_err();
        assert!(matches!(err, TypeError::Mismatch { index: 1, .. }));
        let err = Term::new(Op::Kp(u(), u()), vec![]).unwrap_err();
        assert!(matches!(err, TypeError::Arity { expected: 1, found: 0, .. }));
    }

    #[test]
    fn print_parse_roundtrip() {
        let src = "(app S''[unit,unit,unit](K[unit,unit],I[unit]) e)";
        assert_eq!(parse_term(src).unwrap().to_string(), src);
        let src = "(app S''[unit,(-> unit unit),unit](K[unit,(-> unit unit)],K[unit,unit]) e)";
        let t = parse_term(src).unwrap();
        assert_eq!(t.to_string(), src);
        assert_eq!(t.ty(), &u());
        let t = parse_term("K'[unit,unit](e)").unwrap();
        assert_eq!(t.ty(), &uu());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_term("(app e e)").unwrap_err();
        assert_eq!(err.pos, 0);
        assert!(err.msg.contains("non-function"));
        let err = parse_term("(app I[unit] I[unit])").unwrap_err();
        assert_eq!(err.pos, 0);
        let err = parse_term("K'[unit,unit](I[unit])").unwrap_err();
        assert_eq!(err.pos, 0);
        let err = parse_term("  Q").unwrap_err();
        assert_eq!(err.pos, 2);
        let err = parse_term("I[unit,unit]").unwrap_err();
        assert!(err.msg.contains("type parameter"));
    }

    #[test]
    fn enumeration_examples() {
        let sig = Signature::xtcl();
        assert_eq!(enumerate_terms(&sig, &u(), 1, 4), vec![Term::e()]);
        assert_eq!(enumerate_terms(&sig, &uu(), 1, 4), vec![Term::i(u())]);
        let small = enumerate_terms(&sig, &u(), 3, 2);
        assert!(small.contains(&Term::app(Term::i(u()), Term::e()).unwrap()));
    }

    #[test]
    fn enumeration_matches_bounds() {
        let sig = Signature::xtcl();
        let en = Enumerator::new(&sig, 5, 3);
        for ty in en.types() {
            for t in en.terms_of(ty) {
                assert_eq!(t.ty(), ty);
                assert!(t.size() <= 5);
                assert!(t.max_node_type_size() <= 3);
            }
        }
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(0, 0), vec![Vec::<usize>::new()]);
        assert!(compositions(1, 2).is_empty());
    }
}

//! Simply typed λ-calculus with de Bruijn indices: typing, substitution,
//! call-by-name steps, bounded universes of closed and open terms, `□P`
//! on closed slices, the open extension `■P`, and the four proof
//! obligations of induction up to `■`.
//!
//! Contexts list the type of `Var(0)` first (innermost binder first).

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::henceforth::{henceforth_tab, Direct, HenceforthError, HenceforthResult};
use crate::lex::Cursor;
use crate::predicates::{Obs, Predicate, Tabulation};
use crate::types::{enumerate_types, parse_ty, Ty};

pub type Ctx = Vec<Ty>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LTerm {
    Var(usize),
    UnitVal,
    Lam(Ty, Arc<LTerm>),
    LApp(Arc<LTerm>, Arc<LTerm>),
}

impl LTerm {
    pub fn lam(ty: Ty, body: LTerm) -> LTerm {
        LTerm::Lam(ty, Arc::new(body))
    }

    pub fn app(f: LTerm, a: LTerm) -> LTerm {
        LTerm::LApp(Arc::new(f), Arc::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            LTerm::Var(_) | LTerm::UnitVal => 1,
            LTerm::Lam(_, b) => 1 + b.size(),
            LTerm::LApp(f, a) => 1 + f.size() + a.size(),
        }
    }

    pub fn is_app(&self) -> bool {
        matches!(self, LTerm::LApp(..))
    }

    /// Whether `Var(i)` occurs free for some `i ≥ depth`.
    pub fn has_free_from(&self, depth: usize) -> bool {
        match self {
            LTerm::Var(i) => *i >= depth,
            LTerm::UnitVal => false,
            LTerm::Lam(_, b) => b.has_free_from(depth + 1),
            LTerm::LApp(f, a) => f.has_free_from(depth) || a.has_free_from(depth),
        }
    }

    pub fn is_closed(&self) -> bool {
        !self.has_free_from(0)
    }
}

impl fmt::Display for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &LTerm, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                LTerm::Var(i) if *i < depth => write!(f, "x{}", depth - 1 - i),
                LTerm::Var(i) => write!(f, "g{}", i - depth),
                LTerm::UnitVal => write!(f, "()"),
                LTerm::Lam(ty, b) => {
                    write!(f, "\\x{depth}:{ty}. ")?;
                    go(b, depth + 1, f)
                }
                LTerm::LApp(a, b) => {
                    write!(f, "(")?;
                    go(a, depth, f)?;
                    write!(f, " ")?;
                    go(b, depth, f)?;
                    write!(f, ")")
                }
            }
        }
        go(self, 0, f)
    }
}

impl fmt::Debug for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for LTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LTypeError {
    #[error("variable {index} is not bound in a context of length {len}")]
    Unbound { index: usize, len: usize },
    #[error("applying a term of non-function type {0}")]
    NotAFunction(Ty),
    #[error("argument has type {found}, function expects {expected}")]
    Mismatch { expected: Ty, found: Ty },
}

pub fn typecheck(ctx: &[Ty], t: &LTerm) -> Result<Ty, LTypeError> {
    match t {
        LTerm::Var(i) => ctx.get(*i).cloned().ok_or(LTypeError::Unbound { index: *i, len: ctx.len() }),
        LTerm::UnitVal => Ok(Ty::Unit),
        LTerm::Lam(ty, b) => {
            let mut inner = Vec::with_capacity(ctx.len() + 1);
            inner.push(ty.clone());
            inner.extend_from_slice(ctx);
            Ok(Ty::arrow(ty.clone(), typecheck(&inner, b)?))
        }
        LTerm::LApp(f, a) => {
            let ft = typecheck(ctx, f)?;
            let at = typecheck(ctx, a)?;
            match ft.as_arrow() {
                Some((d, c)) if *d == at => Ok(c.clone()),
                Some((d, _)) => Err(LTypeError::Mismatch { expected: d.clone(), found: at }),
                None => Err(LTypeError::NotAFunction(ft)),
            }
        }
    }
}

/// Adds `d` to every free index `≥ cutoff`.
pub fn shift(t: &LTerm, d: isize, cutoff: usize) -> LTerm {
    match t {
        LTerm::Var(i) if *i >= cutoff => LTerm::Var((*i as isize + d) as usize),
        LTerm::Var(_) | LTerm::UnitVal => t.clone(),
        LTerm::Lam(ty, b) => LTerm::lam(ty.clone(), shift(b, d, cutoff + 1)),
        LTerm::LApp(f, a) => LTerm::app(shift(f, d, cutoff), shift(a, d, cutoff)),
    }
}

/// Replaces `Var(j)` by `s`, leaving other indices alone.
fn subst(t: &LTerm, j: usize, s: &LTerm) -> LTerm {
    match t {
        LTerm::Var(i) if *i == j => s.clone(),
        LTerm::Var(_) | LTerm::UnitVal => t.clone(),
        LTerm::Lam(ty, b) => LTerm::lam(ty.clone(), subst(b, j + 1, &shift(s, 1, 0))),
        LTerm::LApp(f, a) => LTerm::app(subst(f, j, s), subst(a, j, s)),
    }
}

/// `t[s/0]` for `t` under `Γ,τ` and `s` under `Γ`, without type checks.
pub fn subst_top(t: &LTerm, s: &LTerm) -> LTerm {
    shift(&subst(t, 0, &shift(s, 1, 0)), -1, 0)
}

/// Type-checked single-variable substitution: `t` lives under `τ :: Γ`,
/// `s` under `Γ`.
pub fn substitute(ctx: &[Ty], tau: &Ty, t: &LTerm, s: &LTerm) -> Result<LTerm, LTypeError> {
    let st = typecheck(ctx, s)?;
    if &st != tau {
        return Err(LTypeError::Mismatch { expected: tau.clone(), found: st });
    }
    let mut inner = vec![tau.clone()];
    inner.extend_from_slice(ctx);
    typecheck(&inner, t)?;
    Ok(subst_top(t, s))
}

/// Simultaneous substitution of closed terms: `sigma[i]` replaces `Var(i)`.
pub fn instantiate(t: &LTerm, sigma: &[LTerm]) -> LTerm {
    fn go(t: &LTerm, sigma: &[LTerm], depth: usize) -> LTerm {
        match t {
            LTerm::Var(i) if *i >= depth => sigma[i - depth].clone(),
            LTerm::Var(_) | LTerm::UnitVal => t.clone(),
            LTerm::Lam(ty, b) => LTerm::lam(ty.clone(), go(b, sigma, depth + 1)),
            LTerm::LApp(f, a) => LTerm::app(go(f, sigma, depth), go(a, sigma, depth)),
        }
    }
    go(t, sigma, 0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LBehaviour {
    Stuck,
    LStep(LTerm),
    LUnitDone,
    LFun { dom: Ty, body: LTerm },
}

impl LBehaviour {
    /// The labelled result of a function value.
    pub fn apply(&self, s: &LTerm) -> Option<LTerm> {
        match self {
            LBehaviour::LFun { body, .. } => Some(subst_top(body, s)),
            _ => None,
        }
    }
}

/// One call-by-name step: left rule, then β.
pub fn lstep(t: &LTerm) -> LBehaviour {
    match t {
        LTerm::Var(_) => LBehaviour::Stuck,
        LTerm::UnitVal => LBehaviour::LUnitDone,
        LTerm::Lam(ty, b) => LBehaviour::LFun { dom: ty.clone(), body: (**b).clone() },
        LTerm::LApp(f, a) => match lstep(f) {
            LBehaviour::LStep(f2) => LBehaviour::LStep(LTerm::app(f2, (**a).clone())),
            LBehaviour::LFun { body, .. } => LBehaviour::LStep(subst_top(&body, a)),
            LBehaviour::Stuck | LBehaviour::LUnitDone => LBehaviour::Stuck,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LTraceEnd {
    Done,
    Fun,
    Stuck,
    Fuel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LTrace {
    pub terms: Vec<LTerm>,
    pub end: LTraceEnd,
}

impl fmt::Display for LTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let marker = match self.end {
            LTraceEnd::Done => "✓",
            LTraceEnd::Fun => "fun",
            LTraceEnd::Stuck => "STUCK",
            LTraceEnd::Fuel => "FUEL",
        };
        for (i, t) in self.terms.iter().enumerate() {
            if i + 1 == self.terms.len() {
                writeln!(f, "{t} {marker}")?;
            } else {
                writeln!(f, "{t}")?;
            }
        }
        Ok(())
    }
}

pub fn ltrace(t: &LTerm, fuel: usize) -> LTrace {
    let mut terms = vec![t.clone()];
    loop {
        let end = match lstep(terms.last().unwrap()) {
            LBehaviour::LStep(next) => {
                if terms.len() > fuel {
                    LTraceEnd::Fuel
                } else {
                    terms.push(next);
                    continue;
                }
            }
            LBehaviour::LUnitDone => LTraceEnd::Done,
            LBehaviour::LFun { .. } => LTraceEnd::Fun,
            LBehaviour::Stuck => LTraceEnd::Stuck,
        };
        return LTrace { terms, end };
    }
}

/// Type safety on one term: no reduct is an application that cannot
/// reduce. Open terms are safe by definition.
pub fn safe_pred(t: &LTerm, fuel: usize) -> Direct {
    if !t.is_closed() {
        return Direct::Holds;
    }
    let tr = ltrace(t, fuel);
    if tr.end == LTraceEnd::Fuel {
        return Direct::Fuel;
    }
    // every term but the last steps; the last must not be a stuck application
    match (tr.end, tr.terms.last().unwrap().is_app()) {
        (LTraceEnd::Stuck, true) => Direct::Fails,
        _ => Direct::Holds,
    }
}

/// Termination, counting a stuck term as terminal.
pub fn lterm_down(t: &LTerm, fuel: usize) -> Direct {
    match ltrace(t, fuel).end {
        LTraceEnd::Fuel => Direct::Fuel,
        _ => Direct::Holds,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("λ-term syntax error at byte {pos}: {msg}")]
pub struct LParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parses `()`, `\x:T. t`, `(t u …)` and names; `free` lists the names of
/// the context, innermost first.
pub fn parse_lterm(src: &str, free: &[&str]) -> Result<LTerm, LParseError> {
    let mut p = Cursor::new(src);
    let mut scope: Vec<String> = free.iter().rev().map(|s| s.to_string()).collect();
    let t = lterm_at(&mut p, &mut scope)?;
    p.skip_ws();
    if !p.at_end() {
        return Err(LParseError { pos: p.pos(), msg: "trailing input after term".into() });
    }
    Ok(t)
}

fn lterm_at(p: &mut Cursor<'_>, scope: &mut Vec<String>) -> Result<LTerm, LParseError> {
    p.skip_ws();
    let start = p.pos();
    let err = |pos: usize, msg: &str| LParseError { pos, msg: msg.to_string() };
    if p.eat_str("()") {
        return Ok(LTerm::UnitVal);
    }
    if p.eat('\\') || p.eat('λ') {
        p.skip_ws();
        let name = p.ident().ok_or_else(|| err(p.pos(), "expected binder name"))?.to_string();
        p.skip_ws();
        if !p.eat(':') {
            return Err(err(p.pos(), "expected `:` after binder"));
        }
        let ty = parse_ty(p).map_err(|e| LParseError { pos: e.pos, msg: e.msg })?;
        p.skip_ws();
        if !p.eat('.') {
            return Err(err(p.pos(), "expected `.` after binder type"));
        }
        scope.push(name);
        let body = lterm_at(p, scope);
        scope.pop();
        return Ok(LTerm::lam(ty, body?));
    }
    if p.eat('(') {
        let mut t = lterm_at(p, scope)?;
        loop {
            p.skip_ws();
            if p.eat(')') {
                break;
            }
            if p.at_end() {
                return Err(err(start, "unclosed application"));
            }
            t = LTerm::app(t, lterm_at(p, scope)?);
        }
        return Ok(t);
    }
    let name = p.ident().ok_or_else(|| err(start, "expected a λ-term"))?;
    match scope.iter().rev().position(|s| s == name) {
        Some(i) => Ok(LTerm::Var(i)),
        None => Err(err(start, &format!("unbound variable `{name}`"))),
    }
}

/// Terms of type `ty` under `ctx` with size `≤ size_bound`, every node type
/// and binder type of size `≤ type_bound`.
pub fn enumerate_lterms(ctx: &[Ty], ty: &Ty, size_bound: usize, type_bound: usize) -> Vec<LTerm> {
    let mut en = LEnum { types: enumerate_types(type_bound), type_bound, memo: HashMap::new() };
    (1..=size_bound).flat_map(|n| en.exact(ctx, ty, n)).collect()
}

struct LEnum {
    types: Vec<Ty>,
    type_bound: usize,
    memo: HashMap<(Ctx, Ty, usize), Vec<LTerm>>,
}

impl LEnum {
    fn exact(&mut self, ctx: &[Ty], ty: &Ty, n: usize) -> Vec<LTerm> {
        let key = (ctx.to_vec(), ty.clone(), n);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            for (i, c) in ctx.iter().enumerate() {
                if c == ty {
                    out.push(LTerm::Var(i));
                }
            }
            if ty.is_unit() {
                out.push(LTerm::UnitVal);
            }
        } else {
            if let Some((a, b)) = ty.as_arrow() {
                let mut inner = vec![a.clone()];
                inner.extend_from_slice(ctx);
                for body in self.exact(&inner, b, n - 1) {
                    out.push(LTerm::lam(a.clone(), body));
                }
            }
            for sigma in self.types.clone() {
                if sigma.size() + ty.size() > self.type_bound {
                    continue;
                }
                let fty = Ty::arrow(sigma.clone(), ty.clone());
                for k in 1..n - 1 {
                    let fs = self.exact(ctx, &fty, k);
                    if fs.is_empty() {
                        continue;
                    }
                    let args = self.exact(ctx, &sigma, n - 1 - k);
                    for f in &fs {
                        for a in &args {
                            out.push(LTerm::app(f.clone(), a.clone()));
                        }
                    }
                }
            }
        }
        self.memo.insert(key, out.clone());
        out
    }
}

/// Contexts of length `≤ max_len` over types of size `≤ type_bound`,
/// shortest first.
pub fn enumerate_ctxs(max_len: usize, type_bound: usize) -> Vec<Ctx> {
    let types = enumerate_types(type_bound);
    let mut out = vec![vec![]];
    let mut frontier: Vec<Ctx> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for c in &frontier {
            for t in &types {
                let mut c2 = c.clone();
                c2.push(t.clone());
                next.push(c2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct LUniverseStats {
    pub size_bound: usize,
    pub type_bound: usize,
    pub label_bound: usize,
    pub max_ctx_len: usize,
    pub contexts: usize,
    pub members: usize,
    pub closed_members: usize,
    pub open_members: usize,
    pub added_by_closure: usize,
    pub closed: bool,
}

/// Enumerated closed and open terms; the closed part is closed under
/// steps, labelled results (labels: enumerated closed terms of size
/// `≤ label_bound`) and instantiations of open members by labels.
#[derive(Clone)]
pub struct LUniverse {
    size_bound: usize,
    type_bound: usize,
    label_bound: usize,
    max_ctx_len: usize,
    ctxs: Vec<Ctx>,
    ctx_ids: HashMap<Ctx, usize>,
    terms: Vec<LTerm>,
    ctx_of: Vec<usize>,
    ty_of: Vec<Ty>,
    index: HashMap<(usize, LTerm), usize>,
    from_closure: Vec<bool>,
    labels: HashMap<Ty, Vec<usize>>,
    closed: bool,
}

impl LUniverse {
    pub fn enumerate(size_bound: usize, type_bound: usize, max_ctx_len: usize, label_bound: usize) -> LUniverse {
        let ctxs = enumerate_ctxs(max_ctx_len, type_bound);
        let ctx_ids = ctxs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let mut u = LUniverse {
            size_bound,
            type_bound,
            label_bound,
            max_ctx_len,
            ctxs: ctxs.clone(),
            ctx_ids,
            terms: vec![],
            ctx_of: vec![],
            ty_of: vec![],
            index: HashMap::new(),
            from_closure: vec![],
            labels: HashMap::new(),
            closed: false,
        };
        let mut en = LEnum { types: enumerate_types(type_bound), type_bound, memo: HashMap::new() };
        let types = enumerate_types(type_bound);
        for (ci, ctx) in ctxs.iter().enumerate() {
            for ty in &types {
                for n in 1..=size_bound {
                    for t in en.exact(ctx, ty, n) {
                        u.insert(ci, t, ty.clone(), false);
                    }
                }
            }
        }
        u
    }

    fn insert(&mut self, ctx: usize, t: LTerm, ty: Ty, by_closure: bool) -> usize {
        if let Some(&id) = self.index.get(&(ctx, t.clone())) {
            return id;
        }
        let id = self.terms.len();
        if ctx == 0 && !by_closure && t.size() <= self.label_bound {
            self.labels.entry(ty.clone()).or_default().push(id);
        }
        self.index.insert((ctx, t.clone()), id);
        self.terms.push(t);
        self.ctx_of.push(ctx);
        self.ty_of.push(ty);
        self.from_closure.push(by_closure);
        id
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: usize) -> &LTerm {
        &self.terms[id]
    }

    pub fn ctx(&self, id: usize) -> &Ctx {
        &self.ctxs[self.ctx_of[id]]
    }

    pub fn ty(&self, id: usize) -> &Ty {
        &self.ty_of[id]
    }

    pub fn is_closed_member(&self, id: usize) -> bool {
        self.ctx_of[id] == 0
    }

    pub fn id_of(&self, ctx: &[Ty], t: &LTerm) -> Option<usize> {
        let c = *self.ctx_ids.get(ctx)?;
        self.index.get(&(c, t.clone())).copied()
    }

    pub fn labels(&self, ty: &Ty) -> &[usize] {
        self.labels.get(ty).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_ctx_len(&self) -> usize {
        self.max_ctx_len
    }

    /// Every closing substitution of `ctx` by labels.
    fn substitutions(&self, ctx: &[Ty]) -> Vec<Vec<LTerm>> {
        let mut out = vec![vec![]];
        for ty in ctx {
            let pool: Vec<LTerm> = self.labels(ty).iter().map(|&i| self.terms[i].clone()).collect();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    pool.iter().map(move |s| {
                        let mut v = prefix.clone();
                        v.push(s.clone());
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Adds reducts, labelled results and label instantiations of open
    /// members to the closed part until stable or `fuel` insertions.
    pub fn close(&mut self, fuel: usize) {
        let mut pending: VecDeque<(LTerm, Ty)> = VecDeque::new();
        for id in 0..self.len() {
            if self.ctx_of[id] != 0 {
                let ctx = self.ctx(id).clone();
                for sigma in self.substitutions(&ctx) {
                    pending.push_back((instantiate(&self.terms[id], &sigma), self.ty_of[id].clone()));
                }
            }
        }
        let mut work: VecDeque<usize> = (0..self.len()).filter(|&i| self.ctx_of[i] == 0).collect();
        let mut left = fuel;
        self.closed = false;
        loop {
            if let Some((t, ty)) = pending.pop_front() {
                if self.index.contains_key(&(0, t.clone())) {
                    continue;
                }
                if left == 0 {
                    return;
                }
                left -= 1;
                let id = self.insert(0, t, ty, true);
                work.push_back(id);
                continue;
            }
            let Some(id) = work.pop_front() else { break };
            let ty = self.ty_of[id].clone();
            match lstep(&self.terms[id]) {
                LBehaviour::LStep(t2) => pending.push_back((t2, ty)),
                b @ LBehaviour::LFun { .. } => {
                    let LBehaviour::LFun { dom, .. } = &b else { unreachable!() };
                    let cod = ty.codomain().expect("λ at arrow type").clone();
                    for &s in self.labels(dom) {
                        pending.push_back((b.apply(&self.terms[s]).unwrap(), cod.clone()));
                    }
                }
                LBehaviour::LUnitDone | LBehaviour::Stuck => {}
            }
        }
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn stats(&self) -> LUniverseStats {
        let closed_members = self.ctx_of.iter().filter(|c| **c == 0).count();
        LUniverseStats {
            size_bound: self.size_bound,
            type_bound: self.type_bound,
            label_bound: self.label_bound,
            max_ctx_len: self.max_ctx_len,
            contexts: self.ctxs.len(),
            members: self.len(),
            closed_members,
            open_members: self.len() - closed_members,
            added_by_closure: self.from_closure.iter().filter(|b| **b).count(),
            closed: self.closed,
        }
    }

    /// Observations of closed members; open members observe as stuck, which
    /// the lifting accepts, so `□P` equals `P` on open slices.
    pub fn tabulate(&self) -> Tabulation {
        let mut obs = Vec::with_capacity(self.len());
        for id in 0..self.len() {
            if self.ctx_of[id] != 0 {
                obs.push(vec![Obs::Stuck]);
                continue;
            }
            let o = match lstep(&self.terms[id]) {
                LBehaviour::LStep(t2) => Obs::Step(self.index.get(&(0, t2)).copied()),
                LBehaviour::LUnitDone => Obs::Done,
                LBehaviour::Stuck => Obs::Stuck,
                b @ LBehaviour::LFun { .. } => {
                    let LBehaviour::LFun { dom, .. } = &b else { unreachable!() };
                    Obs::Fun(
                        self.labels(dom)
                            .iter()
                            .map(|&s| (s, self.index.get(&(0, b.apply(&self.terms[s]).unwrap())).copied()))
                            .collect(),
                    )
                }
            };
            obs.push(vec![o]);
        }
        Tabulation { type_sizes: self.ty_of.iter().map(Ty::size).collect(), obs }
    }

    pub fn predicate(&self, mut f: impl FnMut(&Ctx, &LTerm) -> bool) -> Predicate {
        Predicate::from_fn(self.len(), |i| f(self.ctx(i), &self.terms[i]))
    }
}

/// `□P` on closed slices, `P` on open ones.
pub fn lbox(u: &LUniverse, p: &Predicate) -> Result<HenceforthResult, HenceforthError> {
    henceforth_tab(&u.tabulate(), p)
}

/// `■P`: `t ∈ ■P` iff every closing substitution by labels in `□P` lands
/// in `□P`. Instantiations missing from the universe count as failures.
pub fn open_extension(u: &LUniverse, boxp: &Predicate) -> Predicate {
    Predicate::from_fn(u.len(), |id| {
        if u.ctx_of[id] == 0 {
            return boxp.get(id);
        }
        let ctx = u.ctx(id);
        u.substitutions(ctx).into_iter().all(|sigma| {
            let in_box = sigma.iter().all(|s| u.id_of(&[], s).is_some_and(|j| boxp.get(j)));
            if !in_box {
                return true;
            }
            match u.id_of(&[], &instantiate(&u.terms[id], &sigma)) {
                Some(j) => boxp.get(j),
                None => false,
            }
        })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseResult {
    pub clause: u8,
    pub description: &'static str,
    pub checked: usize,
    pub counterexamples: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlackReport {
    pub predicate: String,
    pub clauses: Vec<ClauseResult>,
    pub certified: bool,
    /// `P` holds on every member, checked directly.
    pub conclusion_confirmed: bool,
    pub box_count: usize,
    pub henceforth: HenceforthResult,
    pub universe: LUniverseStats,
    pub interpretations: Vec<&'static str>,
}

fn show(ctx: &[Ty], t: &LTerm) -> String {
    if ctx.is_empty() {
        t.to_string()
    } else {
        let c: Vec<String> = ctx.iter().map(Ty::to_string).collect();
        format!("[{}] ⊢ {t}", c.join(", "))
    }
}

/// The four obligations of induction up to `■`, over the universe:
/// (1) variables satisfy `P`; (2) `()` satisfies `P`; (3) applications
/// whose parts are in `□P` satisfy `P`; (4) abstractions whose body is in
/// `□P` under the extended context satisfy `P`. Clause (4) is checked for
/// contexts shorter than the maximum, where the body's context is
/// enumerated.
pub fn up_to_black_check(u: &LUniverse, name: &str, p: &Predicate) -> Result<BlackReport, HenceforthError> {
    let hf = lbox(u, p)?;
    let boxp = &hf.result;
    let mut clauses = vec![
        ClauseResult { clause: 1, description: "variables satisfy P", checked: 0, counterexamples: vec![] },
        ClauseResult { clause: 2, description: "the unit value satisfies P", checked: 0, counterexamples: vec![] },
        ClauseResult { clause: 3, description: "applications of □P terms satisfy P", checked: 0, counterexamples: vec![] },
        ClauseResult { clause: 4, description: "abstractions with a □P body satisfy P", checked: 0, counterexamples: vec![] },
    ];
    for id in 0..u.len() {
        let ctx = u.ctx(id);
        let t = &u.terms[id];
        let k = match t {
            LTerm::Var(_) => 0,
            LTerm::UnitVal => 1,
            LTerm::LApp(f, a) => {
                let inside = |x: &LTerm| u.id_of(ctx, x).is_some_and(|j| boxp.get(j));
                if !(inside(f) && inside(a)) {
                    continue;
                }
                2
            }
            LTerm::Lam(ty, b) => {
                if ctx.len() >= u.max_ctx_len {
                    continue;
                }
                let mut inner = vec![ty.clone()];
                inner.extend_from_slice(ctx);
                if !u.id_of(&inner, b).is_some_and(|j| boxp.get(j)) {
                    continue;
                }
                3
            }
        };
        clauses[k].checked += 1;
        if !p.get(id) {
            clauses[k].counterexamples.push(show(ctx, t));
        }
    }
    let certified = clauses.iter().all(|c| c.counterexamples.is_empty());
    Ok(BlackReport {
        predicate: name.to_string(),
        certified,
        conclusion_confirmed: p.is_full(),
        box_count: boxp.count(),
        clauses,
        henceforth: hf.clone(),
        universe: u.stats(),
        interpretations: vec![
            "□P on open slices is taken to be P (open terms observe as stuck)",
            "clause (4) is checked for contexts shorter than the maximum context length",
            "substitutions range over closed labels of the universe",
        ],
    })
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
    fn id_u() -> LTerm {
        LTerm::lam(u(), LTerm::Var(0))
    }

    #[test]
    fn typing_examples() {
        assert_eq!(typecheck(&[u()], &LTerm::Var(0)).unwrap(), u());
        assert_eq!(typecheck(&[], &id_u()).unwrap(), uu());
        assert_eq!(typecheck(&[], &LTerm::app(id_u(), LTerm::UnitVal)).unwrap(), u());
        assert!(typecheck(&[], &LTerm::Var(0)).is_err());
        assert!(typecheck(&[], &LTerm::app(LTerm::UnitVal, LTerm::UnitVal)).is_err());
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(substitute(&[], &u(), &LTerm::Var(0), &LTerm::UnitVal).unwrap(), LTerm::UnitVal);
        let t = LTerm::lam(u(), LTerm::Var(1));
        assert_eq!(substitute(&[], &u(), &t, &LTerm::UnitVal).unwrap(), LTerm::lam(u(), LTerm::UnitVal));
        assert_eq!(substitute(&[u()], &u(), &LTerm::Var(1), &LTerm::Var(0)).unwrap(), LTerm::Var(0));
        assert!(substitute(&[], &uu(), &LTerm::Var(0), &LTerm::UnitVal).is_err());
    }

    #[test]
    fn step_examples() {
        assert_eq!(lstep(&LTerm::app(id_u(), LTerm::UnitVal)), LBehaviour::LStep(LTerm::UnitVal));
        assert_eq!(lstep(&LTerm::Var(0)), LBehaviour::Stuck);
        assert!(matches!(lstep(&id_u()), LBehaviour::LFun { .. }));
        assert_eq!(lstep(&LTerm::app(LTerm::Var(0), LTerm::UnitVal)), LBehaviour::Stuck);
    }

    #[test]
    fn safety_examples() {
        assert_eq!(safe_pred(&LTerm::UnitVal, 10), Direct::Holds);
        assert_eq!(safe_pred(&LTerm::app(id_u(), LTerm::UnitVal), 10), Direct::Holds);
        assert_eq!(safe_pred(&LTerm::Var(0), 10), Direct::Holds);
    }

    #[test]
    fn parse_print() {
        let t = parse_lterm(r"(\x:unit. x ())", &[]).unwrap();
        assert_eq!(t, LTerm::app(id_u(), LTerm::UnitVal));
        assert_eq!(t.to_string(), r"(\x0:unit. x0 ())");
        assert_eq!(parse_lterm(&t.to_string(), &[]).unwrap(), t);
        let k = parse_lterm(r"\x:unit. \y:unit. x", &[]).unwrap();
        assert_eq!(k, LTerm::lam(u(), LTerm::lam(u(), LTerm::Var(1))));
        assert_eq!(parse_lterm("(f y)", &["y", "f"]).unwrap(), LTerm::app(LTerm::Var(1), LTerm::Var(0)));
        assert_eq!(parse_lterm("z", &[]).unwrap_err().pos, 0);
        assert_eq!(parse_lterm("(x)", &["x"]).unwrap(), LTerm::Var(0));
        assert!(parse_lterm("(x", &["x"]).is_err());
    }

    #[test]
    fn enumeration_is_well_typed() {
        for ctx in enumerate_ctxs(1, 2) {
            for ty in enumerate_types(2) {
                for t in enumerate_lterms(&ctx, &ty, 4, 2) {
                    assert_eq!(typecheck(&ctx, &t).unwrap(), ty);
                }
            }
        }
        assert_eq!(enumerate_lterms(&[], &u(), 1, 3), vec![LTerm::UnitVal]);
        assert_eq!(enumerate_ctxs(2, 2).len(), 1 + 2 + 4);
    }

    #[test]
    fn small_universe_certifies_safety() {
        let mut un = LUniverse::enumerate(4, 2, 2, 3);
        un.close(100_000);
        assert!(un.is_closed());
        let safe = un.predicate(|_, t| safe_pred(t, 1000).holds());
        assert!(safe.is_full());
        let r = up_to_black_check(&un, "Safe", &safe).unwrap();
        assert!(r.certified);
        let black = open_extension(&un, &r.henceforth.result);
        assert!(black.is_full());
        let not_app = un.predicate(|_, t| !t.is_app());
        let r = up_to_black_check(&un, "not-app", &not_app).unwrap();
        assert!(!r.certified);
        assert!(!r.clauses[2].counterexamples.is_empty());
        assert!(r.clauses[0].counterexamples.is_empty());
    }

    #[test]
    fn open_extension_excludes_bad_instances() {
        let mut un = LUniverse::enumerate(3, 2, 1, 3);
        un.close(100_000);
        // □P excludes the closed unit value; then `x` under [unit] fails
        let unit_id = un.id_of(&[], &LTerm::UnitVal).unwrap();
        let boxp = Predicate::from_fn(un.len(), |i| i != unit_id);
        let black = open_extension(&un, &boxp);
        let x = un.id_of(&[u()], &LTerm::Var(0)).unwrap();
        // the only unit label is () itself, which is outside □P: vacuous
        assert!(black.get(x));
        let boxp = Predicate::from_fn(un.len(), |i| un.is_closed_member(i));
        let lam = un.id_of(&[u()], &LTerm::lam(u(), LTerm::Var(1))).unwrap();
        let inst = un.id_of(&[], &LTerm::lam(u(), LTerm::UnitVal)).unwrap();
        let mut b2 = boxp.clone();
        b2.set(inst, false);
        assert!(!open_extension(&un, &b2).get(lam));
        assert!(open_extension(&un, &boxp).get(lam));
    }
}

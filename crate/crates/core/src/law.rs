//! Rule-format laws: AST, the line-oriented rule-file syntax, the three
//! built-in xTCL laws, format validation, flatness and simplicity checks,
//! and rule firing.
//!
//! Rule-file syntax, one item per line (`#` starts a comment):
//!
//! ```text
//! law NAME
//! extends xtcl-cbn
//! nondeterministic
//! op f(unit) : unit
//! rule app: arg0 -> P => step (app P arg1)
//! rule app: arg0 -[arg1]-> P => step P
//! rule K: => label t K'(t)
//! rule f: arg0 val => done
//! ```
//!
//! `argN` names the N-th operator argument. Premises are `argN -> X`,
//! `argN -[L]-> X` and `argN val`. A premise label that is not yet bound
//! introduces a fresh label; its result may only be used under a
//! conclusion `label L …` with the same label.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lex::Cursor;
use crate::semantics::{Behaviour, EvalError, FunBehaviour};
use crate::syntax::{ExtOp, OpSym, Signature, Term};
use crate::types::{parse_ty, Ty};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Fresh(String),
    Ref(String),
}

impl Label {
    pub fn name(&self) -> &str {
        match self {
            Label::Fresh(n) | Label::Ref(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Premise {
    Steps { arg: usize, result: String },
    LabelledTo { arg: usize, label: Label, result: String },
    IsValue { arg: usize },
}

impl Premise {
    pub fn arg(&self) -> usize {
        match self {
            Premise::Steps { arg, .. } | Premise::LabelledTo { arg, .. } | Premise::IsValue { arg } => *arg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Template {
    Var(String),
    Node(OpSym, Vec<Template>),
}

impl Template {
    fn vars(&self, out: &mut Vec<String>) {
        match self {
            Template::Var(v) => out.push(v.clone()),
            Template::Node(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn ops(&self, out: &mut Vec<OpSym>) {
        if let Template::Node(op, args) = self {
            out.push(op.clone());
            args.iter().for_each(|a| a.ops(out));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conclusion {
    StepsTo(Template),
    LabelledBy { label: String, body: Template },
    Terminates,
}

impl Conclusion {
    pub fn template(&self) -> Option<&Template> {
        match self {
            Conclusion::StepsTo(t) | Conclusion::LabelledBy { body: t, .. } => Some(t),
            Conclusion::Terminates => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub op: OpSym,
    pub premises: Vec<Premise>,
    pub conclusion: Conclusion,
    /// Source line (1-based) in the text the rule was read from.
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct LawSpec {
    pub name: String,
    /// Extension operators declared on top of the xTCL signature.
    pub operators: Vec<Arc<ExtOp>>,
    pub rules: Vec<Rule>,
    pub deterministic: bool,
    pub powerset: bool,
}

impl LawSpec {
    pub fn signature(&self) -> Signature {
        let mut ops = OpSym::BUILTIN.to_vec();
        ops.extend(self.operators.iter().cloned().map(OpSym::Ext));
        Signature::new(ops)
    }

    pub fn rules_for<'a>(&'a self, op: &'a OpSym) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| &r.op == op)
    }

    /// Human-readable rule id: operator, index among its rules, line.
    pub fn rule_id(&self, rule: &Rule) -> String {
        let k = self.rules.iter().filter(|r| r.op == rule.op).position(|r| std::ptr::eq(r, rule)).unwrap_or(0);
        format!("{}#{} (line {})", rule.op, k + 1, rule.line)
    }

    pub fn builtin(name: &str) -> Option<LawSpec> {
        let src = match name {
            "xtcl-cbn" => CBN_SRC,
            "xtcl-cbv" => CBV_SRC,
            "xtcl-nd" => ND_SRC,
            _ => return None,
        };
        Some(parse_law(src).expect("built-in law parses"))
    }

    pub fn xtcl_cbn() -> LawSpec {
        LawSpec::builtin("xtcl-cbn").unwrap()
    }

    pub fn xtcl_cbv() -> LawSpec {
        LawSpec::builtin("xtcl-cbv").unwrap()
    }

    pub fn xtcl_nd() -> LawSpec {
        LawSpec::builtin("xtcl-nd").unwrap()
    }
}

pub const BUILTIN_LAWS: [&str; 3] = ["xtcl-cbn", "xtcl-cbv", "xtcl-nd"];

const CBN_SRC: &str = "\
law xtcl-cbn
rule e: => done
rule S: => label t S'(t)
rule S': => label t S''(arg0, t)
rule S'': => label t (app (app arg0 t) (app arg1 t))
rule K: => label t K'(t)
rule K': => label t arg0
rule I: => label t t
rule app: arg0 -> P => step (app P arg1)
rule app: arg0 -[arg1]-> P => step P
";

const CBV_SRC: &str = "\
law xtcl-cbv
rule e: => done
rule S: => label t S'(t)
rule S': => label t S''(arg0, t)
rule S'': => label t (app (app arg0 t) (app arg1 t))
rule K: => label t K'(t)
rule K': => label t arg0
rule I: => label t t
rule app: arg0 -> P => step (app P arg1)
rule app: arg0 -[L]-> P, arg1 -> Q => step (app arg0 Q)
rule app: arg0 -[arg1]-> P, arg1 val => step P
";

const ND_SRC: &str = "\
law xtcl-nd
extends xtcl-cbn
nondeterministic
rule app: arg1 -> Q => step (app arg0 Q)
";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown base law `{0}`")]
    UnknownBase(String),
    #[error("law `{name}` is ill-formed: {}", .report.summary())]
    Invalid { name: String, report: ValidationReport },
    #[error("no rank assigned to operator `{0}`")]
    MissingRank(String),
    #[error("rank file: {0}")]
    RankFile(String),
}

/// Parses the rule-file syntax. Only syntax is checked here; see
/// [`validate_format`] for scoping, typing and determinism.
pub fn parse_law(src: &str) -> Result<LawSpec, LawError> {
    let mut law = LawSpec { name: "anonymous".into(), operators: vec![], rules: vec![], deterministic: true, powerset: false };
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let syn = |msg: String| LawError::Syntax { line, msg };
        let mut p = Cursor::new(text);
        let kw = p.ident().ok_or_else(|| syn(format!("unexpected `{text}`")))?;
        match kw {
            "law" => {
                p.skip_ws();
                let name = p.rest().trim();
                if name.is_empty() {
                    return Err(syn("`law` needs a name".into()));
                }
                law.name = name.to_string();
            }
            "extends" => {
                p.skip_ws();
                let base_name = p.rest().trim();
                if !law.rules.is_empty() || !law.operators.is_empty() {
                    return Err(syn("`extends` must come before rules and operators".into()));
                }
                let base = LawSpec::builtin(base_name).ok_or_else(|| LawError::UnknownBase(base_name.to_string()))?;
                law.operators = base.operators;
                law.rules = base.rules;
                law.deterministic = base.deterministic;
                law.powerset = base.powerset;
            }
            "nondeterministic" => {
                law.deterministic = false;
                law.powerset = true;
            }
            "op" => {
                let op = parse_op_decl(&mut p).map_err(syn)?;
                if OpSym::builtin_by_name(&op.name).is_some() || law.operators.iter().any(|o| o.name == op.name) {
                    return Err(syn(format!("operator `{}` already declared", op.name)));
                }
                law.operators.push(Arc::new(op));
            }
            "rule" => {
                let sig = law.signature();
                let rule = parse_rule(&mut p, &sig, line).map_err(syn)?;
                law.rules.push(rule);
            }
            other => return Err(syn(format!("unknown directive `{other}`"))),
        }
    }
    Ok(law)
}

fn parse_op_decl(p: &mut Cursor<'_>) -> Result<ExtOp, String> {
    p.skip_ws();
    let name = p.ident().ok_or("expected operator name")?.to_string();
    let mut params = Vec::new();
    p.skip_ws();
    if p.eat('(') {
        p.skip_ws();
        if !p.eat(')') {
            loop {
                params.push(parse_ty(p).map_err(|e| e.msg)?);
                p.skip_ws();
                if p.eat(')') {
                    break;
                }
                if !p.eat(',') {
                    return Err("expected `,` or `)` in operator arity".into());
                }
            }
        }
    }
    p.skip_ws();
    if !p.eat(':') {
        return Err("expected `:` before result type".into());
    }
    let result = parse_ty(p).map_err(|e| e.msg)?;
    p.skip_ws();
    if !p.at_end() {
        return Err("trailing input after operator declaration".into());
    }
    Ok(ExtOp { name, params, result })
}

fn parse_rule(p: &mut Cursor<'_>, sig: &Signature, line: usize) -> Result<Rule, String> {
    p.skip_ws();
    let name = p.ident().ok_or("expected operator name after `rule`")?;
    let op = sig.lookup(name).cloned().ok_or_else(|| format!("unknown operator `{name}`"))?;
    p.skip_ws();
    if !p.eat(':') {
        return Err("expected `:` after rule operator".into());
    }
    let rest = p.rest();
    let (prem_src, concl_src) = rest.split_once("=>").ok_or("expected `=>`")?;
    let mut bound: HashSet<String> = (0..op.arity()).map(|i| format!("arg{i}")).collect();
    let mut premises = Vec::new();
    for part in prem_src.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let prem = parse_premise(part, &bound)?;
        match &prem {
            Premise::Steps { result, .. } => {
                bound.insert(result.clone());
            }
            Premise::LabelledTo { label, result, .. } => {
                bound.insert(label.name().to_string());
                bound.insert(result.clone());
            }
            Premise::IsValue { .. } => {}
        }
        premises.push(prem);
    }
    if premises.is_empty() && !prem_src.trim().is_empty() {
        return Err("malformed premise list".into());
    }
    let mut c = Cursor::new(concl_src);
    c.skip_ws();
    let conclusion = if c.eat_keyword("done") {
        Conclusion::Terminates
    } else if c.eat_keyword("step") {
        Conclusion::StepsTo(parse_template(&mut c, sig)?)
    } else if c.eat_keyword("label") {
        c.skip_ws();
        let label = c.ident().ok_or("expected label name after `label`")?.to_string();
        Conclusion::LabelledBy { label, body: parse_template(&mut c, sig)? }
    } else {
        return Err("conclusion must be `step …`, `label L …` or `done`".into());
    };
    c.skip_ws();
    if !c.at_end() {
        return Err(format!("trailing input in conclusion: `{}`", c.rest()));
    }
    Ok(Rule { op, premises, conclusion, line })
}

fn parse_arg_ref(s: &str) -> Result<usize, String> {
    s.strip_prefix("arg")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| format!("premise must scrutinize an operator argument `argN`, found `{s}`"))
}

fn parse_premise(src: &str, bound: &HashSet<String>) -> Result<Premise, String> {
    let mut p = Cursor::new(src);
    let subject = p.ident().ok_or_else(|| format!("malformed premise `{src}`"))?;
    let arg = parse_arg_ref(subject)?;
    p.skip_ws();
    let prem = if p.eat_keyword("val") {
        Premise::IsValue { arg }
    } else if p.eat_str("->") {
        p.skip_ws();
        let result = p.ident().ok_or("expected result metavariable after `->`")?.to_string();
        Premise::Steps { arg, result }
    } else if p.eat_str("-[") {
        p.skip_ws();
        let l = p.ident().ok_or("expected label inside `-[…]->`")?.to_string();
        p.skip_ws();
        if !p.eat_str("]->") {
            return Err("expected `]->`".into());
        }
        p.skip_ws();
        let result = p.ident().ok_or("expected result metavariable after `]->`")?.to_string();
        let label = if bound.contains(&l) { Label::Ref(l) } else { Label::Fresh(l) };
        Premise::LabelledTo { arg, label, result }
    } else {
        return Err(format!("malformed premise `{src}`"));
    };
    p.skip_ws();
    if !p.at_end() {
        return Err(format!("trailing input in premise `{src}`"));
    }
    Ok(prem)
}

fn parse_template(p: &mut Cursor<'_>, sig: &Signature) -> Result<Template, String> {
    p.skip_ws();
    if p.eat('(') {
        p.skip_ws();
        if !p.eat_keyword("app") {
            return Err("expected `app` after `(` in template".into());
        }
        let f = parse_template(p, sig)?;
        let x = parse_template(p, sig)?;
        p.skip_ws();
        if !p.eat(')') {
            return Err("expected `)` closing application template".into());
        }
        return Ok(Template::Node(OpSym::App, vec![f, x]));
    }
    let name = p.ident().ok_or_else(|| format!("expected template at `{}`", p.rest()))?;
    p.skip_ws();
    let has_args = p.eat('(');
    match sig.lookup(name) {
        Some(op) => {
            let mut args = Vec::new();
            if has_args {
                loop {
                    args.push(parse_template(p, sig)?);
                    p.skip_ws();
                    if p.eat(')') {
                        break;
                    }
                    if !p.eat(',') {
                        return Err("expected `,` or `)` in template".into());
                    }
                }
            }
            if args.len() != op.arity() {
                return Err(format!("`{name}` takes {} argument(s), template gives {}", op.arity(), args.len()));
            }
            Ok(Template::Node(op.clone(), args))
        }
        None if has_args => Err(format!("unknown operator `{name}` in template")),
        None => Ok(Template::Var(name.to_string())),
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Template::Var(v) => f.write_str(v),
            Template::Node(OpSym::App, a) => write!(f, "(app {} {})", a[0], a[1]),
            Template::Node(op, a) if a.is_empty() => write!(f, "{op}"),
            Template::Node(op, a) => {
                write!(f, "{op}(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::Steps { arg, result } => write!(f, "arg{arg} -> {result}"),
            Premise::LabelledTo { arg, label, result } => write!(f, "arg{arg} -[{}]-> {result}", label.name()),
            Premise::IsValue { arg } => write!(f, "arg{arg} val"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}:", self.op)?;
        for (i, p) in self.premises.iter().enumerate() {
            write!(f, "{}{p}", if i == 0 { " " } else { ", " })?;
        }
        match &self.conclusion {
            Conclusion::StepsTo(t) => write!(f, " => step {t}"),
            Conclusion::LabelledBy { label, body } => write!(f, " => label {label} {body}"),
            Conclusion::Terminates => write!(f, " => done"),
        }
    }
}

// ---------------------------------------------------------------------------
// type schemas

#[derive(Clone, Debug, PartialEq, Eq)]
enum TyPat {
    Unit,
    Arrow(Box<TyPat>, Box<TyPat>),
    /// Flexible unification variable.
    Var(usize),
    /// Operator type parameter, fixed but unknown.
    Rigid(usize),
}

impl TyPat {
    fn arrow(a: TyPat, b: TyPat) -> TyPat {
        TyPat::Arrow(Box::new(a), Box::new(b))
    }

    fn from_ty(t: &Ty) -> TyPat {
        match t {
            Ty::Unit => TyPat::Unit,
            Ty::Arrow(a, b) => TyPat::arrow(TyPat::from_ty(a), TyPat::from_ty(b)),
        }
    }
}

#[derive(Default)]
struct Subst {
    vars: Vec<Option<TyPat>>,
}

impl Subst {
    fn fresh(&mut self) -> TyPat {
        self.vars.push(None);
        TyPat::Var(self.vars.len() - 1)
    }

    fn walk(&self, t: &TyPat) -> TyPat {
        match t {
            TyPat::Var(v) => match &self.vars[*v] {
                Some(b) => self.walk(b),
                None => t.clone(),
            },
            _ => t.clone(),
        }
    }

    fn resolve(&self, t: &TyPat) -> TyPat {
        match self.walk(t) {
            TyPat::Arrow(a, b) => TyPat::arrow(self.resolve(&a), self.resolve(&b)),
            other => other,
        }
    }

    fn occurs(&self, v: usize, t: &TyPat) -> bool {
        match self.walk(t) {
            TyPat::Var(w) => v == w,
            TyPat::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            _ => false,
        }
    }

    fn unify(&mut self, a: &TyPat, b: &TyPat) -> bool {
        let (a, b) = (self.walk(a), self.walk(b));
        match (&a, &b) {
            (TyPat::Var(x), TyPat::Var(y)) if x == y => true,
            (TyPat::Var(x), _) => {
                if self.occurs(*x, &b) {
                    return false;
                }
                self.vars[*x] = Some(b.clone());
                true
            }
            (_, TyPat::Var(_)) => self.unify(&b, &a),
            (TyPat::Unit, TyPat::Unit) => true,
            (TyPat::Rigid(x), TyPat::Rigid(y)) => x == y,
            (TyPat::Arrow(a1, b1), TyPat::Arrow(a2, b2)) => self.unify(a1, a2) && self.unify(b1, b2),
            _ => false,
        }
    }

    fn to_ty(&self, t: &TyPat) -> Option<Ty> {
        match self.walk(t) {
            TyPat::Unit => Some(Ty::Unit),
            TyPat::Arrow(a, b) => Some(Ty::arrow(self.to_ty(&a)?, self.to_ty(&b)?)),
            _ => None,
        }
    }
}

/// Argument and result type patterns of `sym` at the given parameters.
fn schema(sym: &OpSym, ps: &[TyPat]) -> (Vec<TyPat>, TyPat) {
    let arr = TyPat::arrow;
    let p = |i: usize| ps[i].clone();
    match sym {
        OpSym::E => (vec![], TyPat::Unit),
        OpSym::S => (vec![], arr(arr(p(0), arr(p(1), p(2))), arr(arr(p(0), p(1)), arr(p(0), p(2))))),
        OpSym::Sp => (vec![arr(p(0), arr(p(1), p(2)))], arr(arr(p(0), p(1)), arr(p(0), p(2)))),
        OpSym::Spp => (vec![arr(p(0), arr(p(1), p(2))), arr(p(0), p(1))], arr(p(0), p(2))),
        OpSym::K => (vec![], arr(p(0), arr(p(1), p(0)))),
        OpSym::Kp => (vec![p(0)], arr(p(1), p(0))),
        OpSym::I => (vec![], arr(p(0), p(0))),
        OpSym::App => (vec![arr(p(0), p(1)), p(0)], p(1)),
        OpSym::Ext(x) => (x.params.iter().map(TyPat::from_ty).collect(), TyPat::from_ty(&x.result)),
    }
}

/// Types `tpl` against `expected`; returns the parameter variables of each
/// operator node in preorder.
fn infer(
    tpl: &Template,
    env: &HashMap<String, TyPat>,
    expected: &TyPat,
    s: &mut Subst,
    nodes: &mut Vec<Vec<TyPat>>,
) -> Result<(), String> {
    match tpl {
        Template::Var(v) => {
            let t = env.get(v).ok_or_else(|| format!("unbound metavariable `{v}`"))?;
            if !s.unify(t, expected) {
                return Err(format!("metavariable `{v}` has the wrong type here"));
            }
            Ok(())
        }
        Template::Node(sym, args) => {
            let ps: Vec<TyPat> = (0..sym.n_type_params()).map(|_| s.fresh()).collect();
            nodes.push(ps.clone());
            let (arg_pats, res) = schema(sym, &ps);
            if !s.unify(&res, expected) {
                return Err(format!("`{tpl}` does not have the expected type"));
            }
            // variables first, they fix parameters for nested nodes
            for (a, pat) in args.iter().zip(&arg_pats) {
                if let Template::Var(_) = a {
                    infer(a, env, pat, s, &mut Vec::new())?;
                }
            }
            for (a, pat) in args.iter().zip(&arg_pats) {
                if let Template::Node(..) = a {
                    infer(a, env, pat, s, nodes)?;
                }
            }
            Ok(())
        }
    }
}

fn preorder_nodes<'a>(tpl: &'a Template, out: &mut Vec<&'a Template>) {
    if let Template::Node(_, args) = tpl {
        out.push(tpl);
        for a in args.iter().filter(|a| matches!(a, Template::Var(_))) {
            preorder_nodes(a, out);
        }
        for a in args.iter().filter(|a| matches!(a, Template::Node(..))) {
            preorder_nodes(a, out);
        }
    }
}

/// Instantiates a template with concrete terms, inferring every operator's
/// type parameters from `expected` and the metavariable types.
pub(crate) fn build(tpl: &Template, env: &HashMap<String, Term>, expected: &Ty) -> Result<Term, EvalError> {
    let tenv: HashMap<String, TyPat> = env.iter().map(|(k, t)| (k.clone(), TyPat::from_ty(t.ty()))).collect();
    let mut s = Subst::default();
    let mut params = Vec::new();
    infer(tpl, &tenv, &TyPat::from_ty(expected), &mut s, &mut params).map_err(EvalError::Template)?;
    let mut nodes = Vec::new();
    preorder_nodes(tpl, &mut nodes);
    let mut resolved: HashMap<*const Template, Vec<Ty>> = HashMap::new();
    for (node, ps) in nodes.iter().zip(&params) {
        let tys = ps
            .iter()
            .map(|p| s.to_ty(p))
            .collect::<Option<Vec<Ty>>>()
            .ok_or_else(|| EvalError::Template(format!("cannot infer type parameters of `{node}`")))?;
        resolved.insert(*node as *const Template, tys);
    }
    fn go(t: &Template, env: &HashMap<String, Term>, r: &HashMap<*const Template, Vec<Ty>>) -> Result<Term, EvalError> {
        match t {
            Template::Var(v) => Ok(env[v].clone()),
            Template::Node(sym, args) => {
                let op = sym.instantiate(&r[&(t as *const Template)]);
                let args = args.iter().map(|a| go(a, env, r)).collect::<Result<Vec<_>, _>>()?;
                Term::new(op, args).map_err(EvalError::Type)
            }
        }
    }
    go(tpl, env, &resolved)
}

// ---------------------------------------------------------------------------
// validation

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub law: String,
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        self.violations.iter().map(|v| format!("{}: {}", v.rule, v.message)).collect::<Vec<_>>().join("; ")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Kind {
    Step,
    Done,
    Fun,
}

const ALL_KINDS: [Kind; 3] = [Kind::Step, Kind::Done, Kind::Fun];

fn possible_kinds(t: &TyPat) -> Vec<Kind> {
    match t {
        TyPat::Unit => vec![Kind::Step, Kind::Done],
        TyPat::Arrow(..) => vec![Kind::Step, Kind::Fun],
        _ => ALL_KINDS.to_vec(),
    }
}

fn premise_kinds(p: &Premise) -> &'static [Kind] {
    match p {
        Premise::Steps { .. } => &[Kind::Step],
        Premise::LabelledTo { .. } => &[Kind::Fun],
        Premise::IsValue { .. } => &[Kind::Done, Kind::Fun],
    }
}

/// Allowed behaviour kinds for each argument, intersected over premises.
fn arg_constraints(rule: &Rule, arg_tys: &[TyPat]) -> Vec<HashSet<Kind>> {
    let mut out: Vec<HashSet<Kind>> = arg_tys.iter().map(|t| possible_kinds(t).into_iter().collect()).collect();
    for p in &rule.premises {
        if let Some(slot) = out.get_mut(p.arg()) {
            let allowed: HashSet<Kind> = premise_kinds(p).iter().copied().collect();
            slot.retain(|k| allowed.contains(k));
        }
    }
    out
}

fn rigid_schema(sym: &OpSym) -> (Vec<TyPat>, TyPat) {
    let ps: Vec<TyPat> = (0..sym.n_type_params()).map(TyPat::Rigid).collect();
    schema(sym, &ps)
}

fn check_rule(law: &LawSpec, rule: &Rule) -> Vec<String> {
    let mut errs = Vec::new();
    let sig = law.signature();
    let is_op_name = |n: &str| sig.lookup(n).is_some();
    let (arg_tys, src_ty) = rigid_schema(&rule.op);
    let mut s = Subst::default();
    let mut env: HashMap<String, TyPat> = HashMap::new();
    for (i, t) in arg_tys.iter().enumerate() {
        env.insert(format!("arg{i}"), t.clone());
    }
    // result metavariables of premises with a fresh label, keyed by label
    let mut deferred: HashMap<String, String> = HashMap::new();
    let mut fresh_labels: HashSet<String> = HashSet::new();
    let bind = |name: &str, t: TyPat, env: &mut HashMap<String, TyPat>, errs: &mut Vec<String>| {
        if is_op_name(name) {
            errs.push(format!("metavariable `{name}` shadows an operator"));
        }
        if env.insert(name.to_string(), t).is_some() {
            errs.push(format!("metavariable `{name}` bound more than once"));
        }
    };
    for p in &rule.premises {
        let arg = p.arg();
        let Some(arg_ty) = arg_tys.get(arg).cloned() else {
            errs.push(format!("premise `{p}` refers to arg{arg}, but {} has arity {}", rule.op, rule.op.arity()));
            continue;
        };
        match p {
            Premise::Steps { result, .. } => bind(result, arg_ty, &mut env, &mut errs),
            Premise::LabelledTo { label, result, .. } => {
                let (a, b) = (s.fresh(), s.fresh());
                if !s.unify(&arg_ty, &TyPat::arrow(a.clone(), b.clone())) {
                    errs.push(format!("labelled premise `{p}` on an argument of non-function type"));
                    continue;
                }
                match label {
                    Label::Ref(l) => match env.get(l).cloned() {
                        Some(lt) => {
                            if deferred.contains_key(l) || fresh_labels.contains(l) {
                                errs.push(format!("label `{l}` in `{p}` depends on a fresh label"));
                            } else if !s.unify(&lt, &a) {
                                errs.push(format!("label `{l}` in `{p}` has the wrong type"));
                            }
                        }
                        None => errs.push(format!("unbound metavariable `{l}`")),
                    },
                    Label::Fresh(l) => {
                        if fresh_labels.insert(l.clone()) {
                            bind(l, a, &mut env, &mut errs);
                        } else if !s.unify(&env[l], &a) {
                            errs.push(format!("fresh label `{l}` used at two types"));
                        }
                        deferred.insert(result.clone(), l.clone());
                    }
                }
                bind(result, b, &mut env, &mut errs);
            }
            Premise::IsValue { .. } => {}
        }
    }
    let mut used = Vec::new();
    if let Some(t) = rule.conclusion.template() {
        t.vars(&mut used);
    }
    match &rule.conclusion {
        Conclusion::Terminates => {
            if !s.unify(&src_ty, &TyPat::Unit) {
                errs.push("`done` conclusion for an operator whose result type is not unit".into());
            }
        }
        Conclusion::StepsTo(t) => {
            for v in &used {
                if let Some(l) = deferred.get(v) {
                    errs.push(format!("metavariable `{v}` depends on fresh label `{l}`, which is not the conclusion label"));
                }
                if fresh_labels.contains(v) {
                    errs.push(format!("fresh label `{v}` used outside a labelled conclusion"));
                }
            }
            if let Err(e) = infer(t, &env, &src_ty, &mut s, &mut Vec::new()) {
                errs.push(e);
            }
        }
        Conclusion::LabelledBy { label, body } => {
            let (a, b) = (s.fresh(), s.fresh());
            if !s.unify(&src_ty, &TyPat::arrow(a.clone(), b.clone())) {
                errs.push("labelled conclusion for an operator whose result type is not a function type".into());
                return errs;
            }
            if fresh_labels.contains(label) {
                if !s.unify(&env[label], &a) {
                    errs.push(format!("label `{label}` has the wrong type"));
                }
            } else {
                bind(label, a, &mut env, &mut errs);
            }
            for v in &used {
                if let Some(l) = deferred.get(v) {
                    if l != label {
                        errs.push(format!("metavariable `{v}` depends on fresh label `{l}`, which is not the conclusion label"));
                    }
                }
                if fresh_labels.contains(v) && v != label {
                    errs.push(format!("fresh label `{v}` used outside its labelled conclusion"));
                }
            }
            if let Err(e) = infer(body, &env, &b, &mut s, &mut Vec::new()) {
                errs.push(e);
            }
        }
    }
    if errs.is_empty() {
        if let Some(t) = rule.conclusion.template() {
            // every operator's type parameters must be determined
            let mut s2 = Subst::default();
            let mut env2 = env.clone();
            for v in env2.values_mut() {
                *v = s.resolve(v);
            }
            let exp = match &rule.conclusion {
                Conclusion::LabelledBy { .. } => match s.resolve(&src_ty) {
                    TyPat::Arrow(_, b) => *b,
                    other => other,
                },
                _ => src_ty.clone(),
            };
            let mut params = Vec::new();
            if infer(t, &env2, &exp, &mut s2, &mut params).is_ok() {
                let ambiguous = params.iter().flatten().any(|p| has_flex(&s2.resolve(p)));
                if ambiguous {
                    errs.push(format!("ambiguous typing: type parameters of `{t}` are not determined"));
                }
            }
        }
    }
    errs
}

fn has_flex(t: &TyPat) -> bool {
    match t {
        TyPat::Var(_) => true,
        TyPat::Arrow(a, b) => has_flex(a) || has_flex(b),
        _ => false,
    }
}

/// Checks metavariable scoping, template typing and, for deterministic
/// laws, that no two rules of an operator can fire together.
pub fn validate_format(law: &LawSpec) -> ValidationReport {
    let mut violations = Vec::new();
    for rule in &law.rules {
        for message in check_rule(law, rule) {
            violations.push(Violation { rule: law.rule_id(rule), message });
        }
    }
    if law.deterministic {
        for (i, r1) in law.rules.iter().enumerate() {
            for r2 in &law.rules[i + 1..] {
                if r1.op != r2.op {
                    continue;
                }
                let (arg_tys, _) = rigid_schema(&r1.op);
                let c1 = arg_constraints(r1, &arg_tys);
                let c2 = arg_constraints(r2, &arg_tys);
                let overlap = c1.iter().zip(&c2).all(|(a, b)| a.intersection(b).next().is_some());
                if overlap {
                    violations.push(Violation {
                        rule: law.rule_id(r2),
                        message: format!("determinism: can fire together with {}", law.rule_id(r1)),
                    });
                }
            }
        }
    }
    ValidationReport { law: law.name.clone(), accepted: violations.is_empty(), violations }
}

/// Parses and validates, failing on any violation.
pub fn load_law(src: &str) -> Result<LawSpec, LawError> {
    let law = parse_law(src)?;
    let report = validate_format(&law);
    if !report.accepted {
        return Err(LawError::Invalid { name: law.name, report });
    }
    Ok(law)
}

/// A built-in law name, or rule-file text.
pub fn resolve_law(selector_or_src: &str) -> Result<LawSpec, LawError> {
    match LawSpec::builtin(selector_or_src) {
        Some(l) => Ok(l),
        None => load_law(selector_or_src),
    }
}

// ---------------------------------------------------------------------------
// flatness and simplicity

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankAssignment(pub BTreeMap<String, u32>);

impl RankAssignment {
    /// `app ↦ 0`, every other operator of `law` `↦ 1`.
    pub fn standard(law: &LawSpec) -> RankAssignment {
        let mut m = BTreeMap::new();
        for op in law.signature().ops() {
            m.insert(op.name().to_string(), u32::from(*op != OpSym::App));
        }
        RankAssignment(m)
    }

    pub fn from_json(src: &str) -> Result<RankAssignment, LawError> {
        serde_json::from_str(src).map_err(|e| LawError::RankFile(e.to_string()))
    }

    pub fn get(&self, op: &OpSym) -> Result<u32, LawError> {
        self.0.get(op.name()).copied().ok_or_else(|| LawError::MissingRank(op.name().to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatnessViolation {
    pub rule: String,
    pub op: String,
    pub rank: u32,
    pub subterm: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatnessReport {
    pub law: String,
    pub accepted: bool,
    pub violations: Vec<FlatnessViolation>,
}

/// First subterm containing an operator of rank `≥ j`.
fn first_at_or_above(t: &Template, j: u32, rank: &RankAssignment) -> Result<Option<Template>, LawError> {
    if let Template::Node(op, args) = t {
        if rank.get(op)? >= j {
            return Ok(Some(t.clone()));
        }
        for a in args {
            if let Some(bad) = first_at_or_above(a, j, rank)? {
                return Ok(Some(bad));
            }
        }
    }
    Ok(None)
}

/// Each rule of a rank-`j` operator must conclude with a template over
/// strictly lower-ranked operators, or a single rank-`j` head over such
/// templates.
pub fn flatness_check(law: &LawSpec, rank: &RankAssignment) -> Result<FlatnessReport, LawError> {
    let mut violations = Vec::new();
    for rule in &law.rules {
        let j = rank.get(&rule.op)?;
        let mut ops = Vec::new();
        if let Some(t) = rule.conclusion.template() {
            t.ops(&mut ops);
        }
        for op in &ops {
            rank.get(op)?;
        }
        let Some(t) = rule.conclusion.template() else { continue };
        let offending = match t {
            Template::Node(head, args) if rank.get(head)? == j => {
                let mut found = None;
                for a in args {
                    if let Some(bad) = first_at_or_above(a, j, rank)? {
                        found = Some(bad);
                        break;
                    }
                }
                found
            }
            _ => first_at_or_above(t, j, rank)?,
        };
        if let Some(bad) = offending {
            let r = match &bad {
                Template::Node(op, _) => rank.get(op)?,
                Template::Var(_) => 0,
            };
            violations.push(FlatnessViolation {
                rule: law.rule_id(rule),
                op: rule.op.name().to_string(),
                rank: j,
                subterm: bad.to_string(),
                message: format!("`{bad}` has rank {r}, not below the rule's rank {j}, and is not the conclusion head"),
            });
        }
    }
    Ok(FlatnessReport { law: law.name.clone(), accepted: violations.is_empty(), violations })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicityReport {
    pub law: String,
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

/// Rules without a `->` premise must conclude with a value behaviour or a
/// step to a bare metavariable.
pub fn simplicity_check(law: &LawSpec) -> SimplicityReport {
    let mut violations = Vec::new();
    for rule in &law.rules {
        if rule.premises.iter().any(|p| matches!(p, Premise::Steps { .. })) {
            continue;
        }
        if let Conclusion::StepsTo(t @ Template::Node(..)) = &rule.conclusion {
            violations.push(Violation {
                rule: law.rule_id(rule),
                message: format!("steps to `{t}` under value premises; must be a value or a bare metavariable"),
            });
        }
    }
    SimplicityReport { law: law.name.clone(), accepted: violations.is_empty(), violations }
}

// ---------------------------------------------------------------------------
// firing rules

#[derive(Clone)]
enum Binding {
    Term(Term),
    /// Result of a fresh-label premise, known once the label is supplied.
    Deferred(FunBehaviour, String),
}

/// Rules of `law` whose premises are satisfied by the given argument
/// behaviours (each argument may have several, for nondeterministic laws).
pub fn matching_rules<'a>(law: &'a LawSpec, op: &'a OpSym, arg_behs: &[Vec<Behaviour>]) -> Vec<&'a Rule> {
    law.rules_for(op)
        .filter(|r| {
            r.premises.iter().all(|p| {
                let bs = &arg_behs[p.arg()];
                match p {
                    Premise::Steps { .. } => bs.iter().any(|b| matches!(b, Behaviour::Step(_))),
                    Premise::LabelledTo { .. } => bs.iter().any(|b| matches!(b, Behaviour::Fun(_))),
                    Premise::IsValue { .. } => bs.iter().any(|b| !matches!(b, Behaviour::Step(_))),
                }
            })
        })
        .collect()
}

/// Fires the rules of `law` at `t` and returns the resulting behaviours
/// (first match only unless the law is a powerset law). Argument
/// behaviours are requested lazily through `arg_beh`. An empty result
/// means no rule applies.
pub fn instantiate(
    law: &LawSpec,
    t: &Term,
    arg_beh: &mut dyn FnMut(usize) -> Result<Vec<Behaviour>, EvalError>,
) -> Result<Vec<Behaviour>, EvalError> {
    let sym = t.op().sym();
    let mut cache: Vec<Option<Vec<Behaviour>>> = vec![None; t.args().len()];
    let mut out = Vec::new();
    for rule in law.rules_for(&sym) {
        let mut env: Vec<(String, Binding)> =
            t.args().iter().enumerate().map(|(i, a)| (format!("arg{i}"), Binding::Term(a.clone()))).collect();
        fire(rule, 0, t, &mut env, &mut cache, arg_beh, &mut out, !law.powerset)?;
        if law.powerset {
            continue;
        }
        if !out.is_empty() {
            break;
        }
    }
    if law.powerset {
        let mut seen = HashSet::new();
        out.retain(|b| match b {
            Behaviour::Step(x) => seen.insert(x.clone()),
            _ => true,
        });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fire(
    rule: &Rule,
    k: usize,
    t: &Term,
    env: &mut Vec<(String, Binding)>,
    cache: &mut Vec<Option<Vec<Behaviour>>>,
    arg_beh: &mut dyn FnMut(usize) -> Result<Vec<Behaviour>, EvalError>,
    out: &mut Vec<Behaviour>,
    first_only: bool,
) -> Result<(), EvalError> {
    if first_only && !out.is_empty() {
        return Ok(());
    }
    let Some(p) = rule.premises.get(k) else {
        out.push(conclude(rule, t, env)?);
        return Ok(());
    };
    let arg = p.arg();
    if cache[arg].is_none() {
        cache[arg] = Some(arg_beh(arg)?);
    }
    let behs = cache[arg].clone().unwrap();
    match p {
        Premise::Steps { result, .. } => {
            for b in behs {
                if let Behaviour::Step(x) = b {
                    env.push((result.clone(), Binding::Term(x)));
                    fire(rule, k + 1, t, env, cache, arg_beh, out, first_only)?;
                    env.pop();
                }
            }
        }
        Premise::LabelledTo { label, result, .. } => {
            for b in behs {
                if let Behaviour::Fun(f) = b {
                    let binding = match label {
                        Label::Ref(l) => match lookup(env, l) {
                            Some(Binding::Term(s)) => Binding::Term(f.apply(&s)?),
                            _ => return Err(EvalError::Template(format!("label `{l}` is not a bound term"))),
                        },
                        Label::Fresh(l) => Binding::Deferred(f, l.clone()),
                    };
                    env.push((result.clone(), binding));
                    fire(rule, k + 1, t, env, cache, arg_beh, out, first_only)?;
                    env.pop();
                }
            }
        }
        Premise::IsValue { .. } => {
            if behs.iter().any(|b| !matches!(b, Behaviour::Step(_))) {
                fire(rule, k + 1, t, env, cache, arg_beh, out, first_only)?;
            }
        }
    }
    Ok(())
}

fn lookup(env: &[(String, Binding)], name: &str) -> Option<Binding> {
    env.iter().rev().find(|(n, _)| n == name).map(|(_, b)| b.clone())
}

fn term_env(env: &[(String, Binding)]) -> HashMap<String, Term> {
    env.iter()
        .filter_map(|(n, b)| match b {
            Binding::Term(t) => Some((n.clone(), t.clone())),
            Binding::Deferred(..) => None,
        })
        .collect()
}

fn conclude(rule: &Rule, t: &Term, env: &[(String, Binding)]) -> Result<Behaviour, EvalError> {
    match &rule.conclusion {
        Conclusion::Terminates => Ok(Behaviour::UnitDone),
        Conclusion::StepsTo(tpl) => Ok(Behaviour::Step(build(tpl, &term_env(env), t.ty())?)),
        Conclusion::LabelledBy { label, body } => {
            let (dom, cod) = t
                .ty()
                .as_arrow()
                .map(|(a, b)| (a.clone(), b.clone()))
                .ok_or_else(|| EvalError::Template(format!("labelled conclusion at non-function type {}", t.ty())))?;
            let env: Vec<(String, Binding)> = env.to_vec();
            let label = label.clone();
            let body = body.clone();
            let cod2 = cod.clone();
            Ok(Behaviour::Fun(FunBehaviour::new(dom, cod, move |s: &Term| {
                let mut m = term_env(&env);
                for (n, b) in &env {
                    if let Binding::Deferred(f, l) = b {
                        if *l == label {
                            m.insert(n.clone(), f.apply(s)?);
                        }
                    }
                }
                m.insert(label.clone(), s.clone());
                build(&body, &m, &cod2)
            })))
        }
    }
}

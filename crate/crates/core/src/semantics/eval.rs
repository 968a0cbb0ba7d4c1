use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::semantics::structure::{tuples, FiniteStructure, Table};
use crate::syntax::{Formula, NativeFn, Term, Variable};

/// Rounding slack charged when an exact value enters float arithmetic, and
/// again for every native application.
const FLOAT_SLACK: f64 = 1.0 / (1u64 << 48) as f64;

/// A truth value: exact whenever only basis connectives were involved.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx { value: f64, err: f64 },
}

impl Value {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Approx { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => rational::to_f64(q),
            Value::Approx { value, .. } => *value,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            Value::Exact(_) => 0.0,
            Value::Approx { err, .. } => *err,
        }
    }

    /// The exact rational, or `InexactValue` naming the culprit.
    pub fn into_exact(self, what: &str) -> Result<Rational> {
        match self {
            Value::Exact(q) => Ok(q),
            Value::Approx { .. } => Err(Error::InexactValue(what.to_string())),
        }
    }

    fn approx(&self) -> (f64, f64) {
        match self {
            Value::Exact(q) => (rational::to_f64(q), FLOAT_SLACK),
            Value::Approx { value, err } => (*value, *err),
        }
    }

    fn unary(
        self,
        exact: impl Fn(&Rational) -> Rational,
        float: impl Fn(f64) -> f64,
        scale: f64,
    ) -> Value {
        match self {
            Value::Exact(q) => Value::Exact(exact(&q)),
            Value::Approx { value, err } => Value::Approx {
                value: float(value),
                err: err * scale,
            },
        }
    }

    fn binary(
        self,
        other: Value,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        float: impl Fn(f64, f64) -> f64,
        additive: bool,
    ) -> Value {
        match (&self, &other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(exact(a, b)),
            _ => {
                let (a, ea) = self.approx();
                let (b, eb) = other.approx();
                Value::Approx {
                    value: float(a, b),
                    err: if additive { ea + eb } else { ea.max(eb) },
                }
            }
        }
    }

    /// Renders the value as a rational string, or a decimal with its error
    /// bound for approximate values.
    pub fn render(&self) -> String {
        match self {
            Value::Exact(q) => format_ratio(q),
            Value::Approx { value, err } => format!("{value:.12}±{err:.3e}"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A sort-respecting partial map from variables to elements (carrier
/// indices).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<Variable, usize>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn with(mut self, v: Variable, element: usize) -> Assignment {
        self.0.insert(v, element);
        self
    }

    pub fn insert(&mut self, v: Variable, element: usize) {
        self.0.insert(v, element);
    }

    pub fn get(&self, v: &Variable) -> Option<usize> {
        self.0.get(v).copied()
    }

    /// Builds an assignment from element names, checking each against the
    /// variable's sort.
    pub fn from_names(m: &FiniteStructure, pairs: &[(Variable, &str)]) -> Result<Assignment> {
        let mut a = Assignment::new();
        for (v, name) in pairs {
            a.insert(v.clone(), m.element(&v.sort, name)?);
        }
        Ok(a)
    }

    /// Assignment of a context tuple.
    pub fn of_tuple(ctx: &[Variable], tuple: &[usize]) -> Assignment {
        Assignment(ctx.iter().cloned().zip(tuple.iter().copied()).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &usize)> {
        self.0.iter()
    }
}

enum CTerm<'m> {
    Slot(usize),
    App(&'m Table<usize>, Vec<CTerm<'m>>),
}

enum Node<'m> {
    Const(Rational),
    Atom(&'m Table<Rational>, Vec<CTerm<'m>>),
    Neg(Box<Node<'m>>),
    Half(Box<Node<'m>>),
    Monus(Box<Node<'m>>, Box<Node<'m>>),
    Add(Box<Node<'m>>, Box<Node<'m>>),
    Min(Box<Node<'m>>, Box<Node<'m>>),
    Max(Box<Node<'m>>, Box<Node<'m>>),
    Native {
        func: NativeFn,
        lipschitz: f64,
        args: Vec<Node<'m>>,
    },
    Quant {
        sup: bool,
        slots: Vec<(usize, usize)>,
        body: Box<Node<'m>>,
    },
}

/// A formula resolved against a structure: variables become slots and symbols
/// become table references. Holds no mutable state, so one compiled formula
/// can be evaluated from many threads at once.
pub struct Compiled<'m> {
    root: Node<'m>,
    context: Vec<Variable>,
    slots: usize,
    structure: &'m FiniteStructure,
}

struct Compiler<'m> {
    m: &'m FiniteStructure,
    scope: Vec<(Variable, usize)>,
    next: usize,
}

impl<'m> Compiler<'m> {
    fn term(&self, t: &Term) -> Result<CTerm<'m>> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|&(_, s)| CTerm::Slot(s))
                .ok_or_else(|| Error::UnboundVariable(v.name.clone())),
            Term::App { func, args } => {
                let table = self.m.function_table(func)?;
                let args = args.iter().map(|a| self.term(a)).collect::<Result<_>>()?;
                Ok(CTerm::App(table, args))
            }
        }
    }

    fn node(&mut self, f: &Formula) -> Result<Node<'m>> {
        let b = |n| Box::new(n);
        Ok(match f {
            Formula::Const(q) => Node::Const(q.clone()),
            Formula::Atom { rel, args } => {
                let table = self.m.relation_table(rel)?;
                let args = args.iter().map(|a| self.term(a)).collect::<Result<_>>()?;
                Node::Atom(table, args)
            }
            Formula::Neg(a) => Node::Neg(b(self.node(a)?)),
            Formula::Half(a) => Node::Half(b(self.node(a)?)),
            Formula::Monus(x, y) => Node::Monus(b(self.node(x)?), b(self.node(y)?)),
            Formula::Add(x, y) => Node::Add(b(self.node(x)?), b(self.node(y)?)),
            Formula::Min(x, y) => Node::Min(b(self.node(x)?), b(self.node(y)?)),
            Formula::Max(x, y) => Node::Max(b(self.node(x)?), b(self.node(y)?)),
            Formula::Native { name, args } => {
                let sym = self
                    .m
                    .signature()
                    .native(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                let func = sym
                    .func
                    .clone()
                    .ok_or_else(|| Error::NativeUnbound(name.clone()))?;
                let lipschitz = rational::to_f64(&sym.lipschitz);
                let args = args.iter().map(|a| self.node(a)).collect::<Result<_>>()?;
                Node::Native {
                    func,
                    lipschitz,
                    args,
                }
            }
            Formula::Sup { vars, body } | Formula::Inf { vars, body } => {
                let depth = self.scope.len();
                let mut slots = Vec::new();
                for v in vars {
                    let n = self.m.size(&v.sort)?;
                    slots.push((self.next, n));
                    self.scope.push((v.clone(), self.next));
                    self.next += 1;
                }
                let body = self.node(body);
                self.scope.truncate(depth);
                Node::Quant {
                    sup: matches!(f, Formula::Sup { .. }),
                    slots,
                    body: b(body?),
                }
            }
        })
    }
}

fn term_value(t: &CTerm, env: &[usize]) -> usize {
    match t {
        CTerm::Slot(s) => env[*s],
        CTerm::App(table, args) => {
            let mut i = 0;
            for (a, n) in args.iter().zip(&table.dims) {
                i = i * n + term_value(a, env);
            }
            table.data[i]
        }
    }
}

fn eval_node(n: &Node, env: &mut [usize]) -> Value {
    match n {
        Node::Const(q) => Value::Exact(q.clone()),
        Node::Atom(table, args) => {
            let mut i = 0;
            for (a, d) in args.iter().zip(&table.dims) {
                i = i * d + term_value(a, env);
            }
            Value::Exact(table.data[i].clone())
        }
        Node::Neg(a) => eval_node(a, env).unary(rational::negate, |x| 1.0 - x, 1.0),
        Node::Half(a) => eval_node(a, env).unary(rational::halve, |x| x / 2.0, 0.5),
        Node::Monus(x, y) => {
            let a = eval_node(x, env);
            let b = eval_node(y, env);
            a.binary(b, rational::monus, |a, b| (a - b).max(0.0), true)
        }
        Node::Add(x, y) => {
            let a = eval_node(x, env);
            let b = eval_node(y, env);
            a.binary(b, rational::trunc_add, |a, b| (a + b).min(1.0), true)
        }
        Node::Min(x, y) => {
            let a = eval_node(x, env);
            if matches!(&a, Value::Exact(q) if q == &rational::zero()) {
                return a;
            }
            let b = eval_node(y, env);
            a.binary(b, |a, b| a.min(b).clone(), f64::min, false)
        }
        Node::Max(x, y) => {
            let a = eval_node(x, env);
            if matches!(&a, Value::Exact(q) if q == &rational::one()) {
                return a;
            }
            let b = eval_node(y, env);
            a.binary(b, |a, b| a.max(b).clone(), f64::max, false)
        }
        Node::Native {
            func,
            lipschitz,
            args,
        } => {
            let mut xs = Vec::with_capacity(args.len());
            let mut err: f64 = 0.0;
            for a in args {
                let (x, e) = eval_node(a, env).approx();
                xs.push(x);
                err = err.max(e);
            }
            let y = func(&xs).clamp(0.0, 1.0);
            Value::Approx {
                value: y,
                err: lipschitz * err + FLOAT_SLACK,
            }
        }
        Node::Quant { sup, slots, body } => {
            let stop = if *sup { rational::one() } else { rational::zero() };
            for &(s, _) in slots {
                env[s] = 0;
            }
            let mut best: Option<Value> = None;
            loop {
                let v = eval_node(body, env);
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        if *sup {
                            b.binary(v, |a, b| a.max(b).clone(), f64::max, false)
                        } else {
                            b.binary(v, |a, b| a.min(b).clone(), f64::min, false)
                        }
                    }
                });
                if matches!(&best, Some(Value::Exact(q)) if *q == stop) {
                    break;
                }
                // odometer step over the bound slots
                let mut k = slots.len();
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    let (s, size) = slots[k];
                    env[s] += 1;
                    if env[s] < size {
                        done = false;
                        break;
                    }
                    env[s] = 0;
                }
                if done {
                    break;
                }
            }
            best.expect("carriers are nonempty")
        }
    }
}

impl<'m> Compiled<'m> {
    /// Compiles `f` for evaluation with free variables drawn from `context`.
    pub fn new(m: &'m FiniteStructure, f: &Formula, context: &[Variable]) -> Result<Compiled<'m>> {
        for v in context {
            m.size(&v.sort)?;
        }
        let mut c = Compiler {
            m,
            scope: context.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            next: context.len(),
        };
        let root = c.node(f)?;
        Ok(Compiled {
            root,
            context: context.to_vec(),
            slots: c.next,
            structure: m,
        })
    }

    pub fn context(&self) -> &[Variable] {
        &self.context
    }

    /// Value at a tuple of elements for the context variables.
    pub fn eval(&self, tuple: &[usize]) -> Value {
        let mut env = vec![0; self.slots];
        env[..tuple.len()].copy_from_slice(tuple);
        eval_node(&self.root, &mut env)
    }

    /// Values at every context tuple, in lexicographic order.
    pub fn table(&self) -> Result<Table<Value>> {
        let dims = self
            .context
            .iter()
            .map(|v| self.structure.size(&v.sort))
            .collect::<Result<Vec<_>>>()?;
        let mut env = vec![0; self.slots];
        let data = tuples(&dims)
            .map(|t| {
                env[..t.len()].copy_from_slice(&t);
                eval_node(&self.root, &mut env)
            })
            .collect();
        Ok(Table { dims, data })
    }
}

pub fn eval_term_at(m: &FiniteStructure, t: &Term, a: &Assignment) -> Result<usize> {
    let vars = t.free_variables();
    let mut tuple = Vec::new();
    for v in &vars {
        tuple.push(a.get(v).ok_or_else(|| Error::UnboundVariable(v.name.clone()))?);
    }
    let c = Compiler {
        m,
        scope: vars.into_iter().enumerate().map(|(i, v)| (v, i)).collect(),
        next: 0,
    };
    Ok(term_value(&c.term(t)?, &tuple))
}

/// Evaluates a term to an element index of its sort.
pub fn eval_term(m: &FiniteStructure, t: &Term, a: &Assignment) -> Result<usize> {
    m.signature().sort_of_term(t)?;
    eval_term_at(m, t, a)
}

/// Evaluates a formula under an assignment covering its free variables.
pub fn eval_formula(m: &FiniteStructure, f: &Formula, a: &Assignment) -> Result<Value> {
    let ctx = f.free_variables();
    let mut tuple = Vec::with_capacity(ctx.len());
    for v in &ctx {
        let e = a.get(v).ok_or_else(|| Error::UnboundVariable(v.name.clone()))?;
        if e >= m.size(&v.sort)? {
            return Err(Error::Structure(format!(
                "assignment of `{}` is outside its carrier",
                v.name
            )));
        }
        tuple.push(e);
    }
    Ok(Compiled::new(m, f, &ctx)?.eval(&tuple))
}

/// Exact value of a formula, failing if a native connective was involved.
pub fn eval_exact(m: &FiniteStructure, f: &Formula, a: &Assignment) -> Result<Rational> {
    eval_formula(m, f, a)?.into_exact("formula uses a native connective")
}

/// Outcome of a satisfaction check.
#[derive(Debug, Clone, PartialEq)]
pub struct Satisfaction {
    pub holds: bool,
    pub value: Value,
    /// True when the verdict rests on an approximate value.
    pub approximate: bool,
}

/// `M ⊨ σ` up to `tol`: the value is at most `tol` (plus the accumulated error
/// bound when the value is approximate).
pub fn satisfies(m: &FiniteStructure, sentence: &Formula, tol: &Rational) -> Result<Satisfaction> {
    if let Some(v) = sentence.free_variables().first() {
        return Err(Error::Context(format!(
            "satisfaction needs a sentence; `{}` is free",
            v.name
        )));
    }
    let value = eval_formula(m, sentence, &Assignment::new())?;
    Ok(match &value {
        Value::Exact(q) => Satisfaction {
            holds: q <= tol,
            value,
            approximate: false,
        },
        Value::Approx { value: x, err } => Satisfaction {
            holds: *x <= rational::to_f64(tol) + err,
            value: value.clone(),
            approximate: true,
        },
    })
}

/// Exact table of a formula over a context, lexicographic in the context.
pub fn formula_table(m: &FiniteStructure, f: &Formula, ctx: &[Variable]) -> Result<Table<Rational>> {
    let t = Compiled::new(m, f, ctx)?.table()?;
    let data = t
        .data
        .into_iter()
        .map(|v| v.into_exact("formula uses a native connective"))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { dims: t.dims, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::fixtures::m0;
    use crate::syntax::parse_formula;

    fn x() -> Variable {
        Variable::new("x", "S")
    }

    #[test]
    fn term_examples() {
        let m = m0();
        assert_eq!(eval_term(&m, &Term::constant("e"), &Assignment::new()).unwrap(), 0);
        let fe = Term::app("f", vec![Term::constant("e")]);
        assert_eq!(eval_term(&m, &fe, &Assignment::new()).unwrap(), 1);
        let ffx = Term::app("f", vec![Term::app("f", vec![Term::Var(x())])]);
        let a = Assignment::from_names(&m, &[(x(), "a")]).unwrap();
        assert_eq!(m.element_name("S", eval_term(&m, &ffx, &a).unwrap()), "c");
        assert!(matches!(
            eval_term(&m, &ffx, &Assignment::new()),
            Err(Error::UnboundVariable(_))
        ));
    }

    #[test]
    fn formula_examples() {
        let m = m0();
        let sig = m.signature().clone();
        let e = |s: &str, a: &Assignment| eval_exact(&m, &parse_formula(&sig, s).unwrap(), a).unwrap();
        let none = Assignment::new();
        let b = Assignment::from_names(&m, &[(x(), "b")]).unwrap();
        assert_eq!(e("inf x:S. R(x)", &none), ratio(0, 1));
        assert_eq!(e("d(x,x)", &b), ratio(0, 1));
        assert_eq!(e("sup x:S. R(x)", &none), ratio(1, 1));
        assert_eq!(e("R(x) -. 1/8", &b), ratio(1, 8));
    }

    #[test]
    fn satisfaction_examples() {
        let m = m0();
        let sig = m.signature().clone();
        let zero = rational::zero();
        let s = satisfies(&m, &parse_formula(&sig, "inf x:S. R(x)").unwrap(), &zero).unwrap();
        assert!(s.holds && s.value == Value::Exact(zero.clone()));
        let s = satisfies(&m, &parse_formula(&sig, "sup x:S. R(x)").unwrap(), &zero).unwrap();
        assert!(!s.holds && s.value == Value::Exact(rational::one()));
        assert!(satisfies(&m, &Formula::zero(), &zero).unwrap().holds);
    }

    #[test]
    fn natives_are_approximate() {
        let mut sig = (**m0().signature()).clone();
        sig.add_native("sq", 1, rational::int(2)).unwrap();
        let f = parse_formula(&sig, "sup x:S. sq(R(x))").unwrap();
        let unbound = m0().with_signature(std::sync::Arc::new(sig.clone())).unwrap();
        assert!(matches!(
            eval_formula(&unbound, &f, &Assignment::new()),
            Err(Error::NativeUnbound(_))
        ));
        sig.bind_native("sq", std::sync::Arc::new(|xs: &[f64]| xs[0] * xs[0]))
            .unwrap();
        let m = m0().with_signature(std::sync::Arc::new(sig)).unwrap();
        let v = eval_formula(&m, &f, &Assignment::new()).unwrap();
        assert!(!v.is_exact());
        assert!((v.to_f64() - 1.0).abs() <= v.error_bound());
        let s = satisfies(&m, &f, &rational::zero()).unwrap();
        assert!(s.approximate && !s.holds);
    }

    #[test]
    fn concurrent_evaluation() {
        let m = m0();
        let sig = m.signature().clone();
        let f = parse_formula(&sig, "sup y:S. inf z:S. d(x,y) + R(z)").unwrap();
        let c = Compiled::new(&m, &f, &[x()]).unwrap();
        let expect: Vec<Value> = (0..3).map(|i| c.eval(&[i])).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..8)
                .map(|k| {
                    let c = &c;
                    s.spawn(move || c.eval(&[k % 3]))
                })
                .collect();
            for (k, h) in handles.into_iter().enumerate() {
                assert_eq!(h.join().unwrap(), expect[k % 3]);
            }
        });
    }
}

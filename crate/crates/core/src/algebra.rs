//! Finitely generated algebras of interpreted formulas over a finite
//! structure, projection embeddings, and the fiberwise quantifiers.

use std::collections::{BTreeSet, HashSet};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::report::Witness;
use crate::semantics::{formula_table, tuples, FiniteStructure};
use crate::syntax::{Formula, Variable};

/// A truth-value table over all tuples of a context, lexicographic order.
pub type Element = Vec<Rational>;

/// The basis operations used to close an algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Neg,
    Half,
    Monus,
    Add,
    Min,
    Max,
}

impl Op {
    pub const ALL: [Op; 6] = [Op::Neg, Op::Half, Op::Monus, Op::Add, Op::Min, Op::Max];

    pub fn arity(self) -> usize {
        match self {
            Op::Neg | Op::Half => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Neg => "~",
            Op::Half => "/2",
            Op::Monus => "-.",
            Op::Add => "+",
            Op::Min => "min",
            Op::Max => "max",
        }
    }

    pub fn scalar(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            Op::Neg => rational::negate(a),
            Op::Half => rational::halve(a),
            Op::Monus => rational::monus(a, b),
            Op::Add => rational::trunc_add(a, b),
            Op::Min => a.min(b).clone(),
            Op::Max => a.max(b).clone(),
        }
    }

    /// Pointwise application; unary operations ignore `b`.
    pub fn apply(self, a: &[Rational], b: &[Rational]) -> Element {
        match self.arity() {
            1 => a.iter().map(|x| self.scalar(x, x)).collect(),
            _ => a.iter().zip(b).map(|(x, y)| self.scalar(x, y)).collect(),
        }
    }
}

/// Pointwise order: `a ≤ b` iff `a = min(a, b)`.
pub fn leq(a: &[Rational], b: &[Rational]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn negate(a: &[Rational]) -> Element {
    Op::Neg.apply(a, a)
}

#[derive(Debug, Clone)]
pub struct FormulaAlgebra {
    pub base: FiniteStructure,
    pub context: Vec<Variable>,
    pub dims: Vec<usize>,
    pub elements: Vec<Element>,
    /// How each element arose (formula text or an operation on indices).
    pub labels: Vec<String>,
}

impl FormulaAlgebra {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn constant(&self, c: &Rational) -> Element {
        vec![c.clone(); self.size()]
    }

    pub fn position(&self, e: &[Rational]) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }

    fn push(&mut self, e: Element, label: String) -> bool {
        if self.position(&e).is_some() {
            return false;
        }
        self.elements.push(e);
        self.labels.push(label);
        true
    }

    /// Adds the table of a formula whose free variables lie in the context.
    pub fn add_formula(&mut self, f: &Formula) -> Result<usize> {
        let t = formula_table(&self.base, f, &self.context)?;
        self.push(t.data.clone(), f.to_string());
        Ok(self.position(&t.data).expect("just added"))
    }

    /// Closes under the given operations, breadth first, stopping once the
    /// algebra holds `limit` elements. Returns whether the closure finished.
    pub fn close(&mut self, ops: &[Op], limit: usize) -> bool {
        let mut seen: HashSet<Element> = self.elements.iter().cloned().collect();
        let mut frontier = 0;
        loop {
            let n = self.elements.len();
            if frontier == n {
                return true;
            }
            for i in 0..n {
                for op in ops {
                    let partners: Vec<usize> = if op.arity() == 1 {
                        if i < frontier {
                            continue;
                        }
                        vec![i]
                    } else {
                        (0..n).filter(|&j| i >= frontier || j >= frontier).collect()
                    };
                    for j in partners {
                        if self.elements.len() >= limit {
                            return false;
                        }
                        let e = op.apply(&self.elements[i], &self.elements[j]);
                        if seen.insert(e.clone()) {
                            let label = if op.arity() == 1 {
                                format!("{}[{i}]", op.name())
                            } else {
                                format!("{}([{i}], [{j}])", op.name())
                            };
                            self.elements.push(e);
                            self.labels.push(label);
                        }
                    }
                }
            }
            frontier = n;
        }
    }

    /// Checks that the element set is closed under `ops`; returns the
    /// offending combinations.
    pub fn closure_defects(&self, ops: &[Op]) -> Vec<Witness> {
        let mut out = Vec::new();
        let set: HashSet<&Element> = self.elements.iter().collect();
        for (i, a) in self.elements.iter().enumerate() {
            for op in ops {
                let range: Vec<usize> = if op.arity() == 1 {
                    vec![i]
                } else {
                    (0..self.len()).collect()
                };
                for j in range {
                    let e = op.apply(a, &self.elements[j]);
                    if !set.contains(&e) {
                        out.push(Witness::new(
                            "closure",
                            vec![i.to_string(), j.to_string()],
                            format!("{} leaves the algebra", op.name()),
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Builds the algebra of the seeds' tables over `context`, together with the
/// constants 0 and 1.
pub fn build_algebra(
    m: &FiniteStructure,
    context: &[Variable],
    seeds: &[Formula],
) -> Result<FormulaAlgebra> {
    for f in seeds {
        for v in f.free_variables() {
            if !context.contains(&v) {
                return Err(Error::Context(format!(
                    "seed `{f}` has free variable `{}` outside the context",
                    v.name
                )));
            }
        }
    }
    let dims = context
        .iter()
        .map(|v| m.size(&v.sort))
        .collect::<Result<Vec<_>>>()?;
    let n: usize = dims.iter().product();
    let mut alg = FormulaAlgebra {
        base: m.clone(),
        context: context.to_vec(),
        dims,
        elements: Vec::new(),
        labels: Vec::new(),
    };
    alg.push(vec![rational::zero(); n], "0".into());
    alg.push(vec![rational::one(); n], "1".into());
    for f in seeds {
        alg.add_formula(f)?;
    }
    Ok(alg)
}

/// An element of a symbolic algebra: `standard + infinitesimal·ι` for a
/// formal positive infinitesimal `ι`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub struct Hyper {
    #[serde(deserialize_with = "de_rational")]
    pub standard: Rational,
    #[serde(deserialize_with = "de_rational", default = "rational::zero")]
    pub infinitesimal: Rational,
}

fn de_rational<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    rational::parse_rational(&s).map_err(serde::de::Error::custom)
}

impl Hyper {
    pub fn real(q: Rational) -> Hyper {
        Hyper {
            standard: q,
            infinitesimal: rational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.standard == rational::zero() && self.infinitesimal == rational::zero()
    }

    /// Lies below every positive rational constant.
    pub fn below_all_positive(&self) -> bool {
        self.standard <= rational::zero()
    }
}

/// A structure-free algebra, used only to exercise `is_standard` on imports.
#[derive(Debug, Clone, Deserialize)]
pub struct SymbolicAlgebra {
    pub elements: Vec<Hyper>,
}

/// Standardness: the only element below every positive constant is 0.
pub trait Standardness {
    /// Elements that are nonzero yet below every positive constant.
    fn infinitesimal_witnesses(&self) -> Vec<String>;

    fn is_standard(&self) -> bool {
        self.infinitesimal_witnesses().is_empty()
    }
}

impl Standardness for SymbolicAlgebra {
    fn infinitesimal_witnesses(&self) -> Vec<String> {
        self.elements
            .iter()
            .filter(|h| h.below_all_positive() && !h.is_zero())
            .map(|h| {
                format!(
                    "{} + {}ι",
                    format_ratio(&h.standard),
                    format_ratio(&h.infinitesimal)
                )
            })
            .collect()
    }
}

impl Standardness for FormulaAlgebra {
    /// For a rational table, `e ≤ ε` for every `ε > 0` forces every entry to
    /// be 0, so the scan reports nothing; it is kept as a direct order check.
    fn infinitesimal_witnesses(&self) -> Vec<String> {
        self.elements
            .iter()
            .zip(&self.labels)
            .filter(|(e, _)| {
                let top = e.iter().max().cloned().unwrap_or_else(rational::zero);
                top <= rational::zero() && e.iter().any(|x| *x != rational::zero())
            })
            .map(|(_, l)| l.clone())
            .collect()
    }
}

/// `is_standard` for an algebra over the empty context.
pub fn is_standard(alg: &FormulaAlgebra) -> Result<bool> {
    if !alg.context.is_empty() {
        return Err(Error::Context(
            "standardness is a property of the empty-context algebra".into(),
        ));
    }
    Ok(Standardness::is_standard(alg))
}

/// Projection from the tuples of `source` onto the tuples of `target`, where
/// `target` lists some of the source variables.
#[derive(Debug, Clone)]
pub struct Projection {
    pub source: Vec<Variable>,
    pub target: Vec<Variable>,
    source_dims: Vec<usize>,
    target_dims: Vec<usize>,
    /// target index of every source tuple
    image: Vec<usize>,
}

impl Projection {
    pub fn new(m: &FiniteStructure, source: &[Variable], target: &[Variable]) -> Result<Projection> {
        let mut pos = Vec::new();
        for v in target {
            pos.push(source.iter().position(|w| w == v).ok_or_else(|| {
                Error::Context(format!("`{}` is not in the source context", v.name))
            })?);
        }
        let mut uniq = BTreeSet::new();
        if !pos.iter().all(|p| uniq.insert(*p)) {
            return Err(Error::Context("projection target repeats a variable".into()));
        }
        let source_dims = source
            .iter()
            .map(|v| m.size(&v.sort))
            .collect::<Result<Vec<_>>>()?;
        let target_dims: Vec<usize> = pos.iter().map(|&p| source_dims[p]).collect();
        let image = tuples(&source_dims)
            .map(|t| {
                let mut i = 0;
                for (&p, n) in pos.iter().zip(&target_dims) {
                    i = i * n + t[p];
                }
                i
            })
            .collect();
        Ok(Projection {
            source: source.to_vec(),
            target: target.to_vec(),
            source_dims,
            target_dims,
            image,
        })
    }

    pub fn source_size(&self) -> usize {
        self.source_dims.iter().product()
    }

    pub fn target_size(&self) -> usize {
        self.target_dims.iter().product()
    }

    /// `L(π)`: precomposition with the projection.
    pub fn embed(&self, h: &[Rational]) -> Element {
        self.image.iter().map(|&i| h[i].clone()).collect()
    }

    /// `∀_π(g)(y) = sup { g(a) : π(a) = y }`.
    pub fn forall(&self, g: &[Rational]) -> Element {
        let mut out: Vec<Option<Rational>> = vec![None; self.target_size()];
        for (v, &i) in g.iter().zip(&self.image) {
            match &out[i] {
                Some(b) if b >= v => {}
                _ => out[i] = Some(v.clone()),
            }
        }
        out.into_iter().map(|v| v.expect("fibers are nonempty")).collect()
    }

    /// Fiberwise infimum.
    pub fn exists(&self, g: &[Rational]) -> Element {
        let mut out: Vec<Option<Rational>> = vec![None; self.target_size()];
        for (v, &i) in g.iter().zip(&self.image) {
            match &out[i] {
                Some(b) if b <= v => {}
                _ => out[i] = Some(v.clone()),
            }
        }
        out.into_iter().map(|v| v.expect("fibers are nonempty")).collect()
    }

    /// `1 ∸ ∀_π(1 ∸ g)`.
    pub fn exists_dual(&self, g: &[Rational]) -> Element {
        negate(&self.forall(&negate(g)))
    }
}

/// Both sides of both adjunction biconditionals for one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjunctionCheck {
    /// `∀_π(g) ≤ h`
    pub forall_left: bool,
    /// `g ≤ L(π)(h)`
    pub forall_right: bool,
    /// `h ≤ ∃_π(g)`
    pub exists_left: bool,
    /// `L(π)(h) ≤ g`
    pub exists_right: bool,
    /// `∃_π(g) = 1 ∸ ∀_π(1 ∸ g)`
    pub duality: bool,
}

impl AdjunctionCheck {
    pub fn holds(&self) -> bool {
        self.forall_left == self.forall_right
            && self.exists_left == self.exists_right
            && self.duality
    }
}

/// For `g` over the source and `h` over the target: `∀_π(g) ≤ h iff
/// g ≤ L(π)(h)`, and dually `h ≤ ∃_π(g) iff L(π)(h) ≤ g`.
pub fn check_adjunction(pi: &Projection, g: &[Rational], h: &[Rational]) -> AdjunctionCheck {
    let lh = pi.embed(h);
    let ex = pi.exists(g);
    AdjunctionCheck {
        forall_left: leq(&pi.forall(g), h),
        forall_right: leq(g, &lh),
        exists_left: leq(h, &ex),
        exists_right: leq(&lh, g),
        duality: ex == pi.exists_dual(g),
    }
}

/// Runs the adjunction check over every pair drawn from the two algebras.
pub fn check_adjunction_all(
    pi: &Projection,
    source: &FormulaAlgebra,
    target: &FormulaAlgebra,
) -> Vec<Witness> {
    let mut out = Vec::new();
    for (i, g) in source.elements.iter().enumerate() {
        for (j, h) in target.elements.iter().enumerate() {
            let c = check_adjunction(pi, g, h);
            if !c.holds() {
                out.push(Witness::new(
                    "adjunction",
                    vec![source.labels[i].clone(), target.labels[j].clone()],
                    format!("{c:?}"),
                ));
            }
        }
    }
    out
}

/// Order preservation of `∀_π` and the homomorphism/injectivity properties
/// of `L(π)` on a target algebra.
pub fn check_embedding(pi: &Projection, target: &FormulaAlgebra) -> Vec<Witness> {
    let mut out = Vec::new();
    let embedded: Vec<Element> = target.elements.iter().map(|h| pi.embed(h)).collect();
    for (i, a) in target.elements.iter().enumerate() {
        for (j, b) in target.elements.iter().enumerate() {
            if i < j && embedded[i] == embedded[j] {
                out.push(Witness::new(
                    "injective",
                    vec![target.labels[i].clone(), target.labels[j].clone()],
                    "distinct elements embed to the same table",
                ));
            }
            for op in Op::ALL {
                if op.arity() == 1 && i != j {
                    continue;
                }
                let lhs = pi.embed(&op.apply(a, b));
                let rhs = op.apply(&embedded[i], &embedded[j]);
                if lhs != rhs {
                    out.push(Witness::new(
                        "homomorphism",
                        vec![target.labels[i].clone(), target.labels[j].clone()],
                        format!("embedding does not commute with {}", op.name()),
                    ));
                }
            }
        }
    }
    out
}

/// `∀_π` is monotone: `g ≤ g'` implies `∀_π(g) ≤ ∀_π(g')`.
pub fn check_forall_monotone(pi: &Projection, source: &FormulaAlgebra) -> Vec<Witness> {
    let mut out = Vec::new();
    let images: Vec<Element> = source.elements.iter().map(|g| pi.forall(g)).collect();
    for (i, g) in source.elements.iter().enumerate() {
        for (j, h) in source.elements.iter().enumerate() {
            if leq(g, h) && !leq(&images[i], &images[j]) {
                out.push(Witness::new(
                    "monotone",
                    vec![source.labels[i].clone(), source.labels[j].clone()],
                    "forall reverses the order",
                ));
            }
        }
    }
    out
}

/// The A7 instance `(sup_x ψ ∸ sup_x φ) ∸ sup_x (ψ ∸ φ)`.
pub fn a7_instance(psi: &Formula, phi: &Formula, x: &Variable) -> Formula {
    let v = vec![x.clone()];
    Formula::monus(
        Formula::monus(Formula::sup(v.clone(), psi.clone()), Formula::sup(v.clone(), phi.clone())),
        Formula::sup(v, Formula::monus(psi.clone(), phi.clone())),
    )
}

/// Maximum of the A7 instance over all assignments of its free variables.
pub fn check_a7(m: &FiniteStructure, psi: &Formula, phi: &Formula, x: &Variable) -> Result<Rational> {
    let f = a7_instance(psi, phi, x);
    let ctx = f.free_variables();
    let t = formula_table(m, &f, &ctx)?;
    Ok(t.data.into_iter().max().unwrap_or_else(rational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::m0;
    use crate::rational::ratio;
    use crate::syntax::parse_formula;

    fn x() -> Variable {
        Variable::new("x", "S")
    }
    fn y() -> Variable {
        Variable::new("y", "S")
    }

    #[test]
    fn build_examples() {
        let m = m0();
        let r = parse_formula(m.signature(), "R(x)").unwrap();
        let a = build_algebra(&m, &[x()], &[r]).unwrap();
        assert!(a.position(&[ratio(0, 1), ratio(1, 4), ratio(1, 1)]).is_some());

        let s = parse_formula(m.signature(), "sup x:S. R(x)").unwrap();
        let a = build_algebra(&m, &[], &[s]).unwrap();
        assert!(a.elements.iter().all(|e| e.len() == 1));
        assert!(is_standard(&a).unwrap());

        let mut a = build_algebra(&m, &[], &[]).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.close(&Op::ALL, 40) || a.len() == 40);
        assert!(a.elements.iter().all(|e| e.len() == 1));

        let bad = parse_formula(m.signature(), "R(y)").unwrap();
        assert!(matches!(build_algebra(&m, &[x()], &[bad]), Err(Error::Context(_))));
    }

    #[test]
    fn closure_is_closed() {
        let m = m0();
        let r = parse_formula(m.signature(), "R(x)").unwrap();
        let mut a = build_algebra(&m, &[x()], &[r]).unwrap();
        a.close(&[Op::Neg, Op::Min, Op::Max], 1000);
        assert!(a.closure_defects(&[Op::Neg, Op::Min, Op::Max]).is_empty());
    }

    #[test]
    fn symbolic_standardness() {
        let ok = SymbolicAlgebra {
            elements: vec![Hyper::real(ratio(0, 1)), Hyper::real(ratio(1, 2))],
        };
        assert!(ok.is_standard());
        let bad = SymbolicAlgebra {
            elements: vec![Hyper {
                standard: ratio(0, 1),
                infinitesimal: ratio(1, 1),
            }],
        };
        assert!(!bad.is_standard());
        let parsed: SymbolicAlgebra =
            serde_json::from_str(r#"{"elements":[{"standard":"0","infinitesimal":"1/3"}]}"#)
                .unwrap();
        assert!(!parsed.is_standard());
    }

    #[test]
    fn projection_examples() {
        let m = m0();
        let ctx = [x(), y()];
        let pi = Projection::new(&m, &ctx, &[y()]).unwrap();
        let d = formula_table(&m, &parse_formula(m.signature(), "d(x,y)").unwrap(), &ctx)
            .unwrap()
            .data;
        // value at y = a is max{0, 1/2, 1}
        assert_eq!(pi.forall(&d)[0], ratio(1, 1));
        let c = vec![ratio(1, 3); 9];
        assert_eq!(pi.forall(&c), vec![ratio(1, 3); 3]);
        assert_eq!(pi.exists(&d), pi.exists_dual(&d));

        let ry = formula_table(&m, &parse_formula(m.signature(), "R(y)").unwrap(), &[y()])
            .unwrap()
            .data;
        let e = pi.embed(&ry);
        assert_eq!(e[0], e[3]);
        assert_eq!(e[3], e[6]);

        let to_empty = Projection::new(&m, &[x()], &[]).unwrap();
        let rx = vec![ratio(0, 1), ratio(1, 4), ratio(1, 1)];
        assert_eq!(to_empty.exists(&rx), vec![ratio(0, 1)]);
    }

    #[test]
    fn adjunction_examples() {
        let m = m0();
        let ctx = [x(), y()];
        let pi = Projection::new(&m, &ctx, &[y()]).unwrap();
        let d = formula_table(&m, &parse_formula(m.signature(), "d(x,y)").unwrap(), &ctx)
            .unwrap()
            .data;
        let one = vec![ratio(1, 1); 3];
        let c = check_adjunction(&pi, &d, &one);
        assert!(c.holds() && c.forall_left && c.forall_right);
        let half = vec![ratio(1, 2); 3];
        let c = check_adjunction(&pi, &d, &half);
        assert!(c.holds() && !c.forall_left && !c.forall_right);
        let c = check_adjunction(&pi, &pi.embed(&half), &half);
        assert!(c.holds() && c.forall_left);
    }

    #[test]
    fn a7_examples() {
        let m = m0();
        let sig = m.signature().clone();
        let r = parse_formula(&sig, "R(x)").unwrap();
        assert_eq!(check_a7(&m, &r, &r, &x()).unwrap(), rational::zero());
        assert_eq!(check_a7(&m, &r, &Formula::zero(), &x()).unwrap(), rational::zero());
        let psi = parse_formula(&sig, "d(x,y) + R(f(x))").unwrap();
        let phi = parse_formula(&sig, "R(y) -. d(f(y), x)").unwrap();
        assert_eq!(check_a7(&m, &psi, &phi, &x()).unwrap(), rational::zero());
    }

    #[test]
    fn generated_algebra_laws() {
        let m = m0();
        let sig = m.signature().clone();
        let ctx = [x(), y()];
        let mut src = build_algebra(
            &m,
            &ctx,
            &[
                parse_formula(&sig, "d(x,y)").unwrap(),
                parse_formula(&sig, "R(x)").unwrap(),
            ],
        )
        .unwrap();
        src.close(&Op::ALL, 50);
        let mut tgt = build_algebra(&m, &[y()], &[parse_formula(&sig, "R(y)").unwrap()]).unwrap();
        tgt.close(&Op::ALL, 30);
        let pi = Projection::new(&m, &ctx, &[y()]).unwrap();
        assert!(check_adjunction_all(&pi, &src, &tgt).is_empty());
        assert!(check_embedding(&pi, &tgt).is_empty());
        assert!(check_forall_monotone(&pi, &src).is_empty());
    }
}

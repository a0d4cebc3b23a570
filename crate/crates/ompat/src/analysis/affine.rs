//! Normalized linear forms over variable names, and the affine/opaque
//! classification of array subscripts.

use std::collections::BTreeMap;
use std::fmt;

use crate::frontend::ast::{BinOp, Expr, ExprKind, UnaryOp};
use crate::frontend::Span;

/// Sum of integer-coefficient terms over variable names plus a constant,
/// kept sorted so structural comparison is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearExpr {
    pub terms: BTreeMap<String, i64>,
    pub constant: i64,
}

impl LinearExpr {
    pub fn constant(c: i64) -> Self {
        LinearExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn variable(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), 1);
        LinearExpr { terms, constant: 0 }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<i64> {
        self.is_constant().then_some(self.constant)
    }

    pub fn add(&self, other: &LinearExpr) -> LinearExpr {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            let e = out.terms.entry(k.clone()).or_insert(0);
            *e += v;
            if *e == 0 {
                out.terms.remove(k);
            }
        }
        out.constant += other.constant;
        out
    }

    pub fn sub(&self, other: &LinearExpr) -> LinearExpr {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> LinearExpr {
        if k == 0 {
            return LinearExpr::constant(0);
        }
        LinearExpr {
            terms: self.terms.iter().map(|(n, c)| (n.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    /// Evaluate with every variable bound; None if a variable is missing.
    pub fn eval(&self, env: &BTreeMap<String, i64>) -> Option<i64> {
        let mut acc = self.constant;
        for (n, c) in &self.terms {
            acc += c * env.get(n)?;
        }
        Some(acc)
    }

    /// Converts from an expression; None when the expression is not an
    /// integer-linear form (products of variables, division, calls, array
    /// reads, float literals).
    pub fn from_expr(e: &Expr) -> Option<LinearExpr> {
        match &e.kind {
            ExprKind::IntLit(v) => Some(LinearExpr::constant(*v)),
            ExprKind::Var(n) => Some(LinearExpr::variable(n)),
            ExprKind::Unary { op: UnaryOp::Neg, operand } => {
                Some(LinearExpr::from_expr(operand)?.scale(-1))
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = LinearExpr::from_expr(lhs);
                let r = LinearExpr::from_expr(rhs);
                match op {
                    BinOp::Add => Some(l?.add(&r?)),
                    BinOp::Sub => Some(l?.sub(&r?)),
                    BinOp::Mul => {
                        let l = l?;
                        let r = r?;
                        if let Some(c) = l.as_constant() {
                            Some(r.scale(c))
                        } else {
                            r.as_constant().map(|c| l.scale(c))
                        }
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.terms {
            if first {
                if *c == 1 {
                    write!(f, "{n}")?;
                } else if *c == -1 {
                    write!(f, "-{n}")?;
                } else {
                    write!(f, "{c}*{n}")?;
                }
                first = false;
            } else if *c >= 0 {
                if *c == 1 {
                    write!(f, " + {n}")?;
                } else {
                    write!(f, " + {c}*{n}")?;
                }
            } else if *c == -1 {
                write!(f, " - {n}")?;
            } else {
                write!(f, " - {}*{n}", -c)?;
            }
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)?;
        } else if self.constant < 0 {
            write!(f, " - {}", -self.constant)?;
        }
        Ok(())
    }
}

/// Affine subscript: integer coefficients over enclosing loop indices plus a
/// loop-invariant symbolic part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    pub index_coeffs: BTreeMap<String, i64>,
    pub invariant: LinearExpr,
}

impl AffineForm {
    pub fn coeff(&self, index: &str) -> i64 {
        self.index_coeffs.get(index).copied().unwrap_or(0)
    }

    /// Indices this form actually depends on.
    pub fn indices(&self) -> impl Iterator<Item = (&str, i64)> {
        self.index_coeffs.iter().map(|(n, c)| (n.as_str(), *c))
    }

    pub fn eval(&self, index_env: &BTreeMap<String, i64>, sym_env: &BTreeMap<String, i64>) -> Option<i64> {
        let mut acc = self.invariant.eval(sym_env)?;
        for (n, c) in &self.index_coeffs {
            acc += c * index_env.get(n)?;
        }
        Some(acc)
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.index_coeffs {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{n}")?;
            first = false;
        }
        if first {
            write!(f, "{}", self.invariant)
        } else {
            let inv = format!("{}", self.invariant);
            if inv != "0" {
                write!(f, " + {inv}")?;
            }
            Ok(())
        }
    }
}

/// One array-subscript dimension after classification. Opaque marks any
/// subscript containing an array read (indirect access) or non-affine
/// arithmetic, including references to names written inside the loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Subscript {
    Affine(AffineForm),
    Opaque { indirect: bool, span: Span },
}

impl Subscript {
    pub fn is_opaque(&self) -> bool {
        matches!(self, Subscript::Opaque { .. })
    }

    pub fn is_indirect(&self) -> bool {
        matches!(self, Subscript::Opaque { indirect: true, .. })
    }

    pub fn as_affine(&self) -> Option<&AffineForm> {
        match self {
            Subscript::Affine(a) => Some(a),
            Subscript::Opaque { .. } => None,
        }
    }
}

/// Classify one subscript expression given the enclosing loop indices at the
/// access site and the set of names written anywhere in the analyzed loop.
pub fn classify_subscript(
    expr: &Expr,
    enclosing_indices: &[String],
    written_in_loop: &std::collections::BTreeSet<String>,
) -> Subscript {
    let mut indirect = false;
    expr.walk(&mut |e| {
        if matches!(e.kind, ExprKind::ArrayRef { .. }) {
            indirect = true;
        }
    });
    let Some(linear) = LinearExpr::from_expr(expr) else {
        return Subscript::Opaque { indirect, span: expr.span };
    };
    let mut index_coeffs = BTreeMap::new();
    let mut invariant = LinearExpr::constant(linear.constant);
    for (name, coeff) in linear.terms {
        if enclosing_indices.contains(&name) {
            index_coeffs.insert(name, coeff);
        } else if written_in_loop.contains(&name) {
            // Loop-variant symbol: not affine for dependence purposes.
            return Subscript::Opaque { indirect, span: expr.span };
        } else {
            invariant.terms.insert(name, coeff);
        }
    }
    Subscript::Affine(AffineForm { index_coeffs, invariant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_str;
    use crate::frontend::ast::StmtKind;

    fn expr_of(src: &str) -> Expr {
        // Wrap in a statement to reuse the parser.
        let ast = parse_str(&format!("void f(void) {{ t = {src}; }}")).unwrap();
        let f = ast.function("f").unwrap();
        let StmtKind::Compound(items) = &f.body.kind else { panic!() };
        let StmtKind::Expr(e) = &items[0].kind else { panic!() };
        let ExprKind::Assign { value, .. } = &e.kind else { panic!() };
        (**value).clone()
    }

    #[test]
    fn linearizes_sums_and_scales() {
        let l = LinearExpr::from_expr(&expr_of("2 * i + n - 3")).unwrap();
        assert_eq!(l.terms.get("i"), Some(&2));
        assert_eq!(l.terms.get("n"), Some(&1));
        assert_eq!(l.constant, -3);
    }

    #[test]
    fn cancels_terms() {
        let l = LinearExpr::from_expr(&expr_of("i - i + 5")).unwrap();
        assert!(l.is_constant());
        assert_eq!(l.constant, 5);
    }

    #[test]
    fn rejects_nonlinear() {
        assert!(LinearExpr::from_expr(&expr_of("i * j")).is_none());
        assert!(LinearExpr::from_expr(&expr_of("n / 2")).is_none());
        assert!(LinearExpr::from_expr(&expr_of("b[i]")).is_none());
    }

    #[test]
    fn classify_splits_indices_from_invariants() {
        let written = std::collections::BTreeSet::new();
        let s = classify_subscript(&expr_of("2 * i + off + 1"), &["i".to_string()], &written);
        let a = s.as_affine().unwrap();
        assert_eq!(a.coeff("i"), 2);
        assert_eq!(a.invariant.terms.get("off"), Some(&1));
        assert_eq!(a.invariant.constant, 1);
    }

    #[test]
    fn classify_marks_indirect() {
        let written = std::collections::BTreeSet::new();
        let s = classify_subscript(&expr_of("b[i]"), &["i".to_string()], &written);
        assert!(s.is_indirect());
    }

    #[test]
    fn classify_marks_loop_variant_symbols_opaque() {
        let mut written = std::collections::BTreeSet::new();
        written.insert("t".to_string());
        let s = classify_subscript(&expr_of("t + 1"), &["i".to_string()], &written);
        assert!(s.is_opaque());
        assert!(!s.is_indirect());
    }
}

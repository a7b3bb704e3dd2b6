//! Abstract syntax for time warp terms, the residual-free basic fragment,
//! and query forms.

use std::fmt;

mod parse;
pub use parse::{parse_query, parse_term, ParseError};

/// A term of the full algebra language.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(String),
    Meet(Box<Term>, Box<Term>),
    Join(Box<Term>, Box<Term>),
    Comp(Box<Term>, Box<Term>),
    /// `l \ r`
    LRes(Box<Term>, Box<Term>),
    /// `l / r`
    RRes(Box<Term>, Box<Term>),
    Id,
    Bot,
    Top,
}

/// A basic term: variables, composition, `id`, `⊥`, and the three unary
/// operations `^o`, `^ℓ`, `^r`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum BasicTerm {
    Var(String),
    Comp(Box<BasicTerm>, Box<BasicTerm>),
    Uo(Box<BasicTerm>),
    Ul(Box<BasicTerm>),
    Ur(Box<BasicTerm>),
    Id,
    Bot,
}

/// A decidable query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Query {
    /// `s == t`
    Equation(Term, Term),
    /// `s <= t`
    Inequation(Term, Term),
    /// `id ≤ t₁ ∨ ⋯ ∨ tₙ` for basic `tᵢ` (non-empty).
    UnitGoal(Vec<BasicTerm>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_owned())
    }

    pub fn meet(l: Term, r: Term) -> Term {
        Term::Meet(Box::new(l), Box::new(r))
    }

    pub fn join(l: Term, r: Term) -> Term {
        Term::Join(Box::new(l), Box::new(r))
    }

    pub fn comp(l: Term, r: Term) -> Term {
        Term::Comp(Box::new(l), Box::new(r))
    }

    pub fn lres(l: Term, r: Term) -> Term {
        Term::LRes(Box::new(l), Box::new(r))
    }

    pub fn rres(l: Term, r: Term) -> Term {
        Term::RRes(Box::new(l), Box::new(r))
    }

    /// `t^o = ⊤ \ t`
    pub fn uo(t: Term) -> Term {
        Term::lres(Term::Top, t)
    }

    /// `t^ℓ = id / t`
    pub fn ul(t: Term) -> Term {
        Term::rres(Term::Id, t)
    }

    /// `t^r = t \ id`
    pub fn ur(t: Term) -> Term {
        Term::lres(t, Term::Id)
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(x) => {
                if !out.iter().any(|v| v == x) {
                    out.push(x.clone());
                }
            }
            Term::Meet(l, r)
            | Term::Join(l, r)
            | Term::Comp(l, r)
            | Term::LRes(l, r)
            | Term::RRes(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Id | Term::Bot | Term::Top => {}
        }
    }

    /// Node count, with composition chains counted as one n-ary node.
    pub fn complexity(&self) -> u64 {
        match self {
            Term::Var(_) | Term::Id | Term::Bot | Term::Top => 1,
            Term::Meet(l, r) | Term::Join(l, r) | Term::LRes(l, r) | Term::RRes(l, r) => {
                1 + l.complexity() + r.complexity()
            }
            Term::Comp(_, _) => {
                let mut total = 1;
                self.comp_factors(&mut total);
                total
            }
        }
    }

    fn comp_factors(&self, total: &mut u64) {
        match self {
            Term::Comp(l, r) => {
                l.comp_factors(total);
                r.comp_factors(total);
            }
            other => *total += other.complexity(),
        }
    }
}

impl BasicTerm {
    pub fn var(name: &str) -> BasicTerm {
        BasicTerm::Var(name.to_owned())
    }

    pub fn comp(l: BasicTerm, r: BasicTerm) -> BasicTerm {
        BasicTerm::Comp(Box::new(l), Box::new(r))
    }

    pub fn uo(t: BasicTerm) -> BasicTerm {
        BasicTerm::Uo(Box::new(t))
    }

    pub fn ul(t: BasicTerm) -> BasicTerm {
        BasicTerm::Ul(Box::new(t))
    }

    pub fn ur(t: BasicTerm) -> BasicTerm {
        BasicTerm::Ur(Box::new(t))
    }

    pub fn free_vars(&self) -> Vec<String> {
        self.to_term().free_vars()
    }

    /// Node count, with composition chains counted as one n-ary node.
    pub fn complexity(&self) -> u64 {
        match self {
            BasicTerm::Var(_) | BasicTerm::Id | BasicTerm::Bot => 1,
            BasicTerm::Uo(t) | BasicTerm::Ul(t) | BasicTerm::Ur(t) => 1 + t.complexity(),
            BasicTerm::Comp(_, _) => {
                let mut total = 1;
                self.comp_factors(&mut total);
                total
            }
        }
    }

    fn comp_factors(&self, total: &mut u64) {
        match self {
            BasicTerm::Comp(l, r) => {
                l.comp_factors(total);
                r.comp_factors(total);
            }
            other => *total += other.complexity(),
        }
    }

    /// Reads a term as basic, recognizing the unary residual patterns.
    /// Returns `None` if the term uses meet, join, `⊤`, or a residual
    /// outside those patterns.
    pub fn from_term(t: &Term) -> Option<BasicTerm> {
        match t {
            Term::Var(x) => Some(BasicTerm::Var(x.clone())),
            Term::Id => Some(BasicTerm::Id),
            Term::Bot => Some(BasicTerm::Bot),
            Term::Comp(l, r) => {
                Some(BasicTerm::comp(BasicTerm::from_term(l)?, BasicTerm::from_term(r)?))
            }
            Term::RRes(l, r) if **l == Term::Id => Some(BasicTerm::ul(BasicTerm::from_term(r)?)),
            Term::LRes(l, r) if **r == Term::Id => Some(BasicTerm::ur(BasicTerm::from_term(l)?)),
            Term::LRes(l, r) if **l == Term::Top => Some(BasicTerm::uo(BasicTerm::from_term(r)?)),
            _ => None,
        }
    }

    /// Re-expresses the unary operations through residuals.
    pub fn to_term(&self) -> Term {
        match self {
            BasicTerm::Var(x) => Term::Var(x.clone()),
            BasicTerm::Comp(l, r) => Term::comp(l.to_term(), r.to_term()),
            BasicTerm::Uo(t) => Term::uo(t.to_term()),
            BasicTerm::Ul(t) => Term::ul(t.to_term()),
            BasicTerm::Ur(t) => Term::ur(t.to_term()),
            BasicTerm::Id => Term::Id,
            BasicTerm::Bot => Term::Bot,
        }
    }
}

impl Query {
    /// Turns `s ≤ t` into the goal-shaped `id ≤ t/s`; queries already of the
    /// form `id ≤ t` are left alone.
    pub fn residuate(self) -> Query {
        match self {
            Query::Inequation(s, t) => {
                if s == Term::Id {
                    Query::Inequation(Term::Id, t)
                } else {
                    Query::Inequation(Term::Id, Term::rres(t, s))
                }
            }
            other => other,
        }
    }

    /// Splits `s == t` into the two inequations `s ≤ t` and `t ≤ s`.
    pub fn split_equation(self) -> Vec<Query> {
        match self {
            Query::Equation(s, t) => {
                vec![Query::Inequation(s.clone(), t.clone()), Query::Inequation(t, s)]
            }
            other => vec![other],
        }
    }

    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Query::Equation(s, t) | Query::Inequation(s, t) => {
                s.collect_vars(&mut out);
                t.collect_vars(&mut out);
            }
            Query::UnitGoal(ts) => {
                for t in ts {
                    t.to_term().collect_vars(&mut out);
                }
            }
        }
        out
    }
}

// --- Printing ----------------------------------------------------------
//
// Precedence, loosest first: `|`, `&`, residuals, composition, postfix.
// Residuals are non-associative; composition associates to the left.
// `parse(print(t)) == t` structurally, with the unary residual patterns
// printed in their postfix sugar form.

const PREC_JOIN: u8 = 0;
const PREC_MEET: u8 = 1;
const PREC_RES: u8 = 2;
const PREC_COMP: u8 = 3;
const PREC_POSTFIX: u8 = 4;

fn write_term(t: &Term, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Postfix sugar first so `id/x` prints as `x^l`.
    let (prec, print): (u8, Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + '_>) = match t {
        Term::RRes(l, r) if **l == Term::Id => {
            (PREC_POSTFIX, Box::new(move |f| {
                write_term(r, PREC_POSTFIX, f)?;
                write!(f, "^l")
            }))
        }
        Term::LRes(l, r) if **r == Term::Id => {
            (PREC_POSTFIX, Box::new(move |f| {
                write_term(l, PREC_POSTFIX, f)?;
                write!(f, "^r")
            }))
        }
        Term::LRes(l, r) if **l == Term::Top => {
            (PREC_POSTFIX, Box::new(move |f| {
                write_term(r, PREC_POSTFIX, f)?;
                write!(f, "^o")
            }))
        }
        Term::Var(x) => (PREC_POSTFIX, Box::new(move |f| write!(f, "{x}"))),
        Term::Id => (PREC_POSTFIX, Box::new(|f| write!(f, "id"))),
        Term::Bot => (PREC_POSTFIX, Box::new(|f| write!(f, "bot"))),
        Term::Top => (PREC_POSTFIX, Box::new(|f| write!(f, "top"))),
        Term::Join(l, r) => (PREC_JOIN, Box::new(move |f| {
            write_term(l, PREC_JOIN, f)?;
            write!(f, " | ")?;
            write_term(r, PREC_JOIN + 1, f)
        })),
        Term::Meet(l, r) => (PREC_MEET, Box::new(move |f| {
            write_term(l, PREC_MEET, f)?;
            write!(f, " & ")?;
            write_term(r, PREC_MEET + 1, f)
        })),
        Term::LRes(l, r) => (PREC_RES, Box::new(move |f| {
            write_term(l, PREC_RES + 1, f)?;
            write!(f, " \\ ")?;
            write_term(r, PREC_RES + 1, f)
        })),
        Term::RRes(l, r) => (PREC_RES, Box::new(move |f| {
            write_term(l, PREC_RES + 1, f)?;
            write!(f, " / ")?;
            write_term(r, PREC_RES + 1, f)
        })),
        Term::Comp(l, r) => (PREC_COMP, Box::new(move |f| {
            write_term(l, PREC_COMP, f)?;
            write!(f, " ")?;
            write_term(r, PREC_COMP + 1, f)
        })),
    };
    if prec < min {
        write!(f, "(")?;
        print(f)?;
        write!(f, ")")
    } else {
        print(f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, 0, f)
    }
}

impl fmt::Display for BasicTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &BasicTerm, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                BasicTerm::Var(x) => write!(f, "{x}"),
                BasicTerm::Id => write!(f, "id"),
                BasicTerm::Bot => write!(f, "bot"),
                BasicTerm::Uo(s) | BasicTerm::Ul(s) | BasicTerm::Ur(s) => {
                    go(s, PREC_POSTFIX, f)?;
                    match t {
                        BasicTerm::Uo(_) => write!(f, "^o"),
                        BasicTerm::Ul(_) => write!(f, "^l"),
                        _ => write!(f, "^r"),
                    }
                }
                BasicTerm::Comp(l, r) => {
                    let parens = min > PREC_COMP;
                    if parens {
                        write!(f, "(")?;
                    }
                    go(l, PREC_COMP, f)?;
                    write!(f, " ")?;
                    go(r, PREC_COMP + 1, f)?;
                    if parens {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Equation(s, t) => write!(f, "{s} == {t}"),
            Query::Inequation(s, t) => write!(f, "{s} <= {t}"),
            Query::UnitGoal(ts) => {
                write!(f, "id <= ")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexity_counts_composition_chains_as_one_node() {
        // x y x^l
        let t = BasicTerm::comp(
            BasicTerm::comp(BasicTerm::var("x"), BasicTerm::var("y")),
            BasicTerm::ul(BasicTerm::var("x")),
        );
        assert_eq!(t.complexity(), 5);
        assert_eq!(BasicTerm::var("x").complexity(), 1);
        assert_eq!(BasicTerm::ur(BasicTerm::Id).complexity(), 2);
    }

    #[test]
    fn free_vars_in_first_occurrence_order() {
        let t = parse_term("x \\ y | x").unwrap();
        assert_eq!(t.free_vars(), vec!["x".to_owned(), "y".to_owned()]);
    }

    #[test]
    fn residuation_of_queries() {
        let q = parse_query("x <= y").unwrap();
        let r = q.residuate();
        assert_eq!(r, Query::Inequation(Term::Id, Term::rres(Term::var("y"), Term::var("x"))));
        let q = parse_query("id <= x").unwrap();
        assert_eq!(q.clone().residuate(), q);
    }

    #[test]
    fn equation_splits_into_two_inequations() {
        let q = parse_query("x == y").unwrap();
        let split = q.split_equation();
        assert_eq!(
            split,
            vec![
                Query::Inequation(Term::var("x"), Term::var("y")),
                Query::Inequation(Term::var("y"), Term::var("x")),
            ]
        );
    }
}

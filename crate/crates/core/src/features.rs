//! Structural features: 0/1 functions of a DAG.
//!
//! Grammar accepted by [`parse_feature`] (names resolve against variable labels):
//!
//! ```text
//! expr    := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '!' unary | '(' expr ')' | atom
//! atom    := edge(a,b) | path(a,b) | pathlen(a,b,L) | parents(a,{b,c,...}) | true | false
//! ```
//!
//! `path` requires at least one edge (a node does not reach itself), and
//! `pathlen` counts edges.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::fmt;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::varset::VarSet;

/// Per-node indicator `f_i(Pa) = [required ⊆ Pa] · [Pa ∩ forbidden = ∅]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParentCondition {
    pub required: VarSet,
    pub forbidden: VarSet,
}

impl ParentCondition {
    pub const ANY: ParentCondition = ParentCondition { required: VarSet::EMPTY, forbidden: VarSet::EMPTY };

    #[inline]
    pub fn holds(&self, parents: VarSet) -> bool {
        self.required.is_subset_of(parents) && parents.intersection(self.forbidden).is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureExpr {
    Const(bool),
    Edge { from: usize, to: usize },
    ParentSetIs { node: usize, parents: VarSet },
    Path { from: usize, to: usize },
    /// Directed path of at most `max_len` edges.
    PathLen { from: usize, to: usize, max_len: usize },
    /// Product of per-node indicators, one per node.
    Modular(Vec<ParentCondition>),
    And(Box<FeatureExpr>, Box<FeatureExpr>),
    Or(Box<FeatureExpr>, Box<FeatureExpr>),
    Not(Box<FeatureExpr>),
}

impl FeatureExpr {
    pub fn edge(from: usize, to: usize) -> Self {
        FeatureExpr::Edge { from, to }
    }

    pub fn path(from: usize, to: usize) -> Self {
        FeatureExpr::Path { from, to }
    }

    pub fn path_len(from: usize, to: usize, max_len: usize) -> Self {
        FeatureExpr::PathLen { from, to, max_len }
    }

    pub fn and(self, other: FeatureExpr) -> Self {
        FeatureExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: FeatureExpr) -> Self {
        FeatureExpr::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        FeatureExpr::Not(Box::new(self))
    }

    /// The modular form of `from → to` over `n` nodes.
    pub fn modular_edge(n: usize, from: usize, to: usize) -> Self {
        let mut conds = alloc::vec![ParentCondition::ANY; n];
        conds[to].required = VarSet::singleton(from);
        FeatureExpr::Modular(conds)
    }

    /// `x ⇝ y`.
    pub fn f1(x: usize, y: usize) -> Self {
        Self::path(x, y)
    }

    /// `x ⇝ y` with at most two edges.
    pub fn f2(x: usize, y: usize) -> Self {
        Self::path_len(x, y, 2)
    }

    /// `x ⇝ y ⇝ z`.
    pub fn f3(x: usize, y: usize, z: usize) -> Self {
        Self::path(x, y).and(Self::path(y, z))
    }

    /// `y ⇜ x ⇝ z`.
    pub fn f4(x: usize, y: usize, z: usize) -> Self {
        Self::path(x, y).and(Self::path(x, z))
    }

    /// `x ⇝ y` but not `x ⇝ z`.
    pub fn f5(x: usize, y: usize, z: usize) -> Self {
        Self::path(x, y).and(Self::path(x, z).not())
    }

    /// Checks node ranges and the `u ≠ v` rule for `n` variables.
    pub fn validate(&self, n: usize) -> Result<()> {
        let range = |v: usize| {
            if v < n {
                Ok(())
            } else {
                Err(Error::InvalidFeature(format!("node {v} out of range for {n} variables")))
            }
        };
        let distinct = |a: usize, b: usize, what: &str| {
            if a == b {
                Err(Error::InvalidFeature(format!("{what} from a node to itself")))
            } else {
                Ok(())
            }
        };
        match self {
            FeatureExpr::Const(_) => Ok(()),
            FeatureExpr::Edge { from, to } => {
                range(*from)?;
                range(*to)?;
                distinct(*from, *to, "edge")
            }
            FeatureExpr::Path { from, to } => {
                range(*from)?;
                range(*to)?;
                distinct(*from, *to, "path")
            }
            FeatureExpr::PathLen { from, to, max_len } => {
                range(*from)?;
                range(*to)?;
                distinct(*from, *to, "path")?;
                if *max_len == 0 {
                    return Err(Error::InvalidFeature("path length bound must be at least 1".into()));
                }
                Ok(())
            }
            FeatureExpr::ParentSetIs { node, parents } => {
                range(*node)?;
                if parents.contains(*node) || !parents.is_subset_of(VarSet::full(n)) {
                    return Err(Error::InvalidFeature(format!("invalid parent set for node {node}")));
                }
                Ok(())
            }
            FeatureExpr::Modular(conds) => {
                if conds.len() != n {
                    return Err(Error::InvalidFeature(format!("modular feature has {} factors for {n} nodes", conds.len())));
                }
                Ok(())
            }
            FeatureExpr::And(a, b) | FeatureExpr::Or(a, b) => {
                a.validate(n)?;
                b.validate(n)
            }
            FeatureExpr::Not(a) => a.validate(n),
        }
    }

    /// Evaluates on a bare DAG (builds a throwaway view).
    pub fn eval(&self, dag: &Dag) -> bool {
        self.eval_view(&DagView::new(dag))
    }

    /// Evaluates against a view whose reachability closure is shared across features.
    pub fn eval_view(&self, g: &DagView<'_>) -> bool {
        match self {
            FeatureExpr::Const(b) => *b,
            FeatureExpr::Edge { from, to } => g.dag.has_edge(*from, *to),
            FeatureExpr::ParentSetIs { node, parents } => g.dag.parents_of(*node) == *parents,
            FeatureExpr::Path { from, to } => g.reachable(*from).contains(*to),
            FeatureExpr::PathLen { from, to, max_len } => g.reachable_within(*from, *max_len).contains(*to),
            FeatureExpr::Modular(conds) => {
                conds.iter().zip(g.dag.parents()).all(|(c, &p)| c.holds(p))
            }
            FeatureExpr::And(a, b) => a.eval_view(g) && b.eval_view(g),
            FeatureExpr::Or(a, b) => a.eval_view(g) || b.eval_view(g),
            FeatureExpr::Not(a) => !a.eval_view(g),
        }
    }

    /// Renders with variable names (inverse of [`parse_feature`]).
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Named { expr: self, names }
    }
}

struct Named<'a> {
    expr: &'a FeatureExpr,
    names: &'a [String],
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nm = |i: usize| self.names.get(i).cloned().unwrap_or_else(|| i.to_string());
        match self.expr {
            FeatureExpr::Const(b) => write!(f, "{b}"),
            FeatureExpr::Edge { from, to } => write!(f, "edge({},{})", nm(*from), nm(*to)),
            FeatureExpr::Path { from, to } => write!(f, "path({},{})", nm(*from), nm(*to)),
            FeatureExpr::PathLen { from, to, max_len } => {
                write!(f, "pathlen({},{},{})", nm(*from), nm(*to), max_len)
            }
            FeatureExpr::ParentSetIs { node, parents } => {
                let ps: Vec<String> = parents.iter().map(nm).collect();
                write!(f, "parents({},{{{}}})", nm(*node), ps.join(","))
            }
            FeatureExpr::Modular(_) => write!(f, "modular(..)"),
            FeatureExpr::And(a, b) => write!(f, "({} & {})", Named { expr: a, names: self.names }, Named { expr: b, names: self.names }),
            FeatureExpr::Or(a, b) => write!(f, "({} | {})", Named { expr: a, names: self.names }, Named { expr: b, names: self.names }),
            FeatureExpr::Not(a) => write!(f, "!{}", Named { expr: a, names: self.names }),
        }
    }
}

/// A DAG plus its lazily computed reachability closure.
pub struct DagView<'a> {
    dag: &'a Dag,
    closure: OnceCell<Vec<VarSet>>,
    children: OnceCell<Vec<VarSet>>,
}

impl<'a> DagView<'a> {
    pub fn new(dag: &'a Dag) -> Self {
        DagView { dag, closure: OnceCell::new(), children: OnceCell::new() }
    }

    pub fn dag(&self) -> &Dag {
        self.dag
    }

    fn children(&self) -> &[VarSet] {
        self.children.get_or_init(|| self.dag.children())
    }

    /// Nodes reachable from `v` by a path of one or more edges.
    pub fn reachable(&self, v: usize) -> VarSet {
        self.closure.get_or_init(|| {
            let children = self.children();
            let order = self.dag.topological_order().expect("acyclic");
            let mut reach = alloc::vec![VarSet::EMPTY; self.dag.n()];
            for &u in order.iter().rev() {
                let mut r = children[u];
                for c in children[u].iter() {
                    r = r.union(reach[c]);
                }
                reach[u] = r;
            }
            reach
        })[v]
    }

    /// Nodes reachable from `v` with at most `max_len` edges (bounded BFS).
    pub fn reachable_within(&self, v: usize, max_len: usize) -> VarSet {
        let children = self.children();
        let mut seen = VarSet::EMPTY;
        let mut frontier = VarSet::singleton(v);
        for _ in 0..max_len {
            let mut next = VarSet::EMPTY;
            for u in frontier.iter() {
                next = next.union(children[u]);
            }
            next = next.difference(seen);
            if next.is_empty() {
                break;
            }
            seen = seen.union(next);
            frontier = next;
        }
        seen
    }
}

/// Parses a feature expression, resolving names against `names`.
pub fn parse_feature(text: &str, names: &[String]) -> Result<FeatureExpr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, names };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    e.validate(names.len()).map_err(|e| match e {
        Error::InvalidFeature(m) => Error::InvalidFeature(m),
        other => other,
    })?;
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn err(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<FeatureExpr> {
        let mut lhs = self.and()?;
        while self.eat(b'|') {
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<FeatureExpr> {
        let mut lhs = self.unary()?;
        while self.eat(b'&') {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<FeatureExpr> {
        if self.eat(b'!') {
            return Ok(self.unary()?.not());
        }
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        self.atom()
    }

    fn word(&mut self) -> Result<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && !b"(){},&|!".contains(&self.src[self.pos]) && !self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        let w = core::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.err("invalid UTF-8"))?;
        Ok((start, w.to_string()))
    }

    fn var(&mut self) -> Result<usize> {
        let (start, w) = self.word()?;
        self.names
            .iter()
            .position(|n| *n == w)
            .ok_or_else(|| Error::Syntax { offset: start, message: format!("unknown variable '{w}'") })
    }

    fn atom(&mut self) -> Result<FeatureExpr> {
        let (start, w) = self.word()?;
        let kind = w.to_ascii_lowercase();
        match kind.as_str() {
            "true" => return Ok(FeatureExpr::Const(true)),
            "false" => return Ok(FeatureExpr::Const(false)),
            _ => {}
        }
        let arity_err = |p: &Self| Error::Syntax { offset: p.pos, message: format!("wrong number of arguments to {kind}") };
        self.expect(b'(')?;
        let e = match kind.as_str() {
            "edge" | "path" => {
                let a = self.var()?;
                if !self.eat(b',') {
                    return Err(arity_err(self));
                }
                let b = self.var()?;
                if a == b {
                    return Err(Error::Syntax { offset: start, message: format!("{kind} from a variable to itself") });
                }
                if kind == "edge" {
                    FeatureExpr::edge(a, b)
                } else {
                    FeatureExpr::path(a, b)
                }
            }
            "pathlen" => {
                let a = self.var()?;
                if !self.eat(b',') {
                    return Err(arity_err(self));
                }
                let b = self.var()?;
                if !self.eat(b',') {
                    return Err(arity_err(self));
                }
                let (at, lw) = self.word()?;
                let len: usize = lw
                    .parse()
                    .map_err(|_| Error::Syntax { offset: at, message: format!("'{lw}' is not a path length") })?;
                if a == b {
                    return Err(Error::Syntax { offset: start, message: "path from a variable to itself".into() });
                }
                if len == 0 {
                    return Err(Error::Syntax { offset: at, message: "path length bound must be at least 1".into() });
                }
                FeatureExpr::path_len(a, b, len)
            }
            "parents" => {
                let node = self.var()?;
                if !self.eat(b',') {
                    return Err(arity_err(self));
                }
                self.expect(b'{')?;
                let mut set = VarSet::EMPTY;
                if !self.eat(b'}') {
                    loop {
                        let at = self.pos;
                        let v = self.var()?;
                        if v == node {
                            return Err(Error::Syntax { offset: at, message: "a variable cannot be its own parent".into() });
                        }
                        set = set.with(v);
                        if self.eat(b'}') {
                            break;
                        }
                        self.expect(b',')?;
                    }
                }
                FeatureExpr::ParentSetIs { node, parents: set }
            }
            _ => return Err(Error::Syntax { offset: start, message: format!("unknown feature '{w}'") }),
        };
        if !self.eat(b')') {
            return Err(arity_err(self));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(n: usize) -> Vec<String> {
        ["X", "Y", "Z", "W", "V"].iter().take(n).map(|s| s.to_string()).collect()
    }

    #[test]
    fn paths_on_empty_and_chain() {
        let empty = Dag::empty(3);
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    assert!(!FeatureExpr::path(x, y).eval(&empty));
                }
            }
        }
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(FeatureExpr::path(0, 2).eval(&chain));
        assert!(!FeatureExpr::path_len(0, 2, 1).eval(&chain));
        assert!(FeatureExpr::path_len(0, 2, 2).eval(&chain));
        assert!(!FeatureExpr::path(2, 0).eval(&chain));
    }

    #[test]
    fn f5_on_partial_chain() {
        let g = Dag::from_edges(3, &[(0, 1)]).unwrap();
        assert!(FeatureExpr::f5(0, 1, 2).eval(&g));
        assert!(!FeatureExpr::f3(0, 1, 2).eval(&g));
    }

    #[test]
    fn parses_named_features() {
        let nm = names(3);
        assert_eq!(parse_feature("path(X,Y) & path(Y,Z)", &nm).unwrap(), FeatureExpr::f3(0, 1, 2));
        assert_eq!(parse_feature("path(X,Y) & !path(X,Z)", &nm).unwrap(), FeatureExpr::f5(0, 1, 2));
        assert_eq!(parse_feature(" pathlen( X , Y , 2 ) ", &nm).unwrap(), FeatureExpr::f2(0, 1));
        assert_eq!(
            parse_feature("parents(Z,{X,Y}) | edge(Y,X)", &nm).unwrap(),
            FeatureExpr::ParentSetIs { node: 2, parents: VarSet::from_iter([0, 1]) }.or(FeatureExpr::edge(1, 0))
        );
        assert_eq!(parse_feature("parents(Z,{})", &nm).unwrap(), FeatureExpr::ParentSetIs { node: 2, parents: VarSet::EMPTY });
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let nm = names(3);
        assert!(matches!(parse_feature("edge(X,X)", &nm), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_feature("edge(X,Q)", &nm), Err(Error::Syntax { offset: 7, .. })));
        assert!(matches!(parse_feature("edge(X)", &nm), Err(Error::Syntax { .. })));
        assert!(matches!(parse_feature("edge(X,Y,Z)", &nm), Err(Error::Syntax { .. })));
        assert!(matches!(parse_feature("edge(X,Y) &", &nm), Err(Error::Syntax { offset: 11, .. })));
        assert!(matches!(parse_feature("pathlen(X,Y,0)", &nm), Err(Error::Syntax { .. })));
        assert!(matches!(parse_feature("foo(X,Y)", &nm), Err(Error::Syntax { offset: 0, .. })));
    }

    #[test]
    fn display_round_trips() {
        let nm = names(3);
        for text in ["path(X,Y) & !path(X,Z)", "edge(X,Y) | pathlen(Y,Z,3)", "parents(Z,{X,Y})"] {
            let e = parse_feature(text, &nm).unwrap();
            let shown = alloc::format!("{}", e.display(&nm));
            assert_eq!(parse_feature(&shown, &nm).unwrap(), e);
        }
    }

    #[test]
    fn modular_edge_matches_edge() {
        let g = Dag::from_edges(3, &[(0, 1), (2, 1)]).unwrap();
        assert!(FeatureExpr::modular_edge(3, 0, 1).eval(&g));
        assert!(!FeatureExpr::modular_edge(3, 1, 0).eval(&g));
        assert!(FeatureExpr::Modular(vec![ParentCondition::ANY; 2]).validate(3).is_err());
    }
}

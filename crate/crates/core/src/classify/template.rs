//! Search for graph templates whose template graph is a forest.
//!
//! A template expresses every row of some basis of the row space as
//! `L'(x^(u)) - L'(x^(v))` for tuples `x^(u)`, `x^(v)` of a partition of
//! the variables. Each row of such a basis has nonzero coefficients that
//! pair up into `(c, -c)`, so candidate rows are the induced equations with
//! that property. For each basis of candidates, a backtracking search
//! assigns each variable a (tuple, position) slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::linalg::{rank, LinearSystem};

use super::single_equation_is_sidorenko;

pub const MAX_TEMPLATE_BASES: u64 = 100_000;
pub const MAX_TEMPLATE_NODES: u64 = 20_000_000;
pub const MAX_TEMPLATE_COLUMNS: usize = 12;
pub const MAX_TEMPLATE_ROWS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TemplateBudget {
    pub max_bases: u64,
    pub max_nodes: u64,
}

impl Default for TemplateBudget {
    fn default() -> Self {
        TemplateBudget {
            max_bases: MAX_TEMPLATE_BASES,
            max_nodes: MAX_TEMPLATE_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateEdge {
    pub u: usize,
    pub v: usize,
    /// `L'`, indexed by tuple position.
    pub form: Vec<FieldElem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateGraph {
    /// A partition of the variables; `tuples[u][p]` is the variable at
    /// position `p` of tuple `u`.
    pub tuples: Vec<Vec<usize>>,
    /// One edge per basis row, in the same order as `rows`.
    pub edges: Vec<TemplateEdge>,
    /// A basis of the row space.
    pub rows: Vec<Vec<FieldElem>>,
}

impl TemplateGraph {
    /// Whether the template graph has no cycles once parallel edges are
    /// merged.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.tuples.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert(key) {
                continue;
            }
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Symbolic check against `sys`: the tuples partition the variables,
    /// the rows form a basis of the row space, and each row equals
    /// `L'(x^(u)) - L'(x^(v))` for its edge.
    pub fn verify(&self, sys: &LinearSystem) -> std::result::Result<(), String> {
        let f = sys.field();
        let k = sys.k();
        let mut seen = vec![false; k];
        for &x in self.tuples.iter().flatten() {
            if x >= k || seen[x] {
                return Err(format!("variable {x} is missing or repeated"));
            }
            seen[x] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err("tuples do not cover every variable".into());
        }
        if self.rows.len() != sys.m() || self.edges.len() != self.rows.len() {
            return Err("need one edge per row of a basis".into());
        }
        if self.rows.iter().any(|r| r.len() != k || !sys.contains(r)) || rank(f, &self.rows) != sys.m() {
            return Err("rows are not a basis of the row space".into());
        }
        for (row, e) in self.rows.iter().zip(&self.edges) {
            if e.u == e.v || e.u >= self.tuples.len() || e.v >= self.tuples.len() {
                return Err("bad edge endpoints".into());
            }
            let (tu, tv) = (&self.tuples[e.u], &self.tuples[e.v]);
            if tu.len() != e.form.len() || tv.len() != e.form.len() {
                return Err("edge form length differs from tuple size".into());
            }
            let mut expect = vec![FieldElem::ZERO; k];
            for (p, &c) in e.form.iter().enumerate() {
                expect[tu[p]] = c;
                expect[tv[p]] = f.neg(c);
            }
            if &expect != row {
                return Err("row is not L'(x^(u)) - L'(x^(v))".into());
            }
        }
        Ok(())
    }
}

/// Looks for a forest template. `Ok(None)` means the search space was
/// exhausted within budget.
pub fn detect_tree_template(sys: &LinearSystem) -> Result<Option<TemplateGraph>> {
    detect_tree_template_with(sys, TemplateBudget::default())
}

pub fn detect_tree_template_with(sys: &LinearSystem, budget: TemplateBudget) -> Result<Option<TemplateGraph>> {
    let (m, k) = (sys.m(), sys.k());
    if k > MAX_TEMPLATE_COLUMNS || m > MAX_TEMPLATE_ROWS {
        return Err(Error::SystemTooLarge { m, k });
    }
    let f = sys.field();
    let candidates: Vec<Vec<FieldElem>> = sys
        .induced_equations()?
        .into_iter()
        .filter(|e| e.length() >= 2 && single_equation_is_sidorenko(f, &e.nonzero_coeffs()))
        .map(|e| e.coeffs)
        .collect();
    let mut state = BasisSearch {
        field: f,
        k,
        m,
        candidates: &candidates,
        chosen: Vec::new(),
        bases: 0,
        nodes: 0,
        budget,
    };
    let found = state.extend(0)?;
    if let Some(t) = &found {
        t.verify(sys).map_err(Error::Invariant)?;
        if !t.is_forest() {
            return Err(Error::Invariant("template graph has a cycle".into()));
        }
    }
    Ok(found)
}

struct BasisSearch<'a> {
    field: &'a FieldSpec,
    k: usize,
    m: usize,
    candidates: &'a [Vec<FieldElem>],
    chosen: Vec<usize>,
    bases: u64,
    nodes: u64,
    budget: TemplateBudget,
}

impl BasisSearch<'_> {
    fn extend(&mut self, from: usize) -> Result<Option<TemplateGraph>> {
        if self.chosen.len() == self.m {
            self.bases += 1;
            if self.bases > self.budget.max_bases {
                return Err(Error::SearchBudgetExceeded(self.budget.max_bases));
            }
            let rows: Vec<Vec<FieldElem>> = self.chosen.iter().map(|&i| self.candidates[i].clone()).collect();
            let mut a = Assignment::new(self.field, &rows, self.k);
            let found = a.search(&mut self.nodes, self.budget.max_nodes)?;
            return Ok(found.then(|| a.build(rows.clone())));
        }
        for i in from..self.candidates.len() {
            self.chosen.push(i);
            let rows: Vec<Vec<FieldElem>> = self.chosen.iter().map(|&j| self.candidates[j].clone()).collect();
            if rank(self.field, &rows) == rows.len() {
                if let Some(t) = self.extend(i + 1)? {
                    return Ok(Some(t));
                }
            }
            self.chosen.pop();
        }
        Ok(None)
    }
}

const EMPTY: usize = usize::MAX;

struct Assignment<'a> {
    field: &'a FieldSpec,
    rows: &'a [Vec<FieldElem>],
    k: usize,
    /// Variables with a nonzero column, in assignment order.
    order: Vec<usize>,
    zero_columns: Vec<usize>,
    tuple_of: Vec<usize>,
    pos_of: Vec<usize>,
    /// `slots[t][p]` is the variable at position `p` of tuple `t`.
    slots: Vec<Vec<usize>>,
    n_tuples: usize,
    n_pos: usize,
}

impl<'a> Assignment<'a> {
    fn new(field: &'a FieldSpec, rows: &'a [Vec<FieldElem>], k: usize) -> Self {
        let mut order = Vec::new();
        for row in rows {
            for (x, c) in row.iter().enumerate() {
                if !c.is_zero() && !order.contains(&x) {
                    order.push(x);
                }
            }
        }
        let zero_columns = (0..k).filter(|x| !order.contains(x)).collect();
        Assignment {
            field,
            rows,
            k,
            order,
            zero_columns,
            tuple_of: vec![EMPTY; k],
            pos_of: vec![EMPTY; k],
            slots: vec![vec![EMPTY; k]; k],
            n_tuples: 0,
            n_pos: 0,
        }
    }

    fn search(&mut self, nodes: &mut u64, max_nodes: u64) -> Result<bool> {
        self.descend(0, nodes, max_nodes)
    }

    fn descend(&mut self, depth: usize, nodes: &mut u64, max_nodes: u64) -> Result<bool> {
        *nodes += 1;
        if *nodes > max_nodes {
            return Err(Error::SearchBudgetExceeded(max_nodes));
        }
        if depth == self.order.len() {
            return Ok(self.complete_ok());
        }
        let x = self.order[depth];
        let max_t = (self.n_tuples + 1).min(self.k);
        for t in 0..max_t {
            let max_p = (self.n_pos + 1).min(self.k);
            for p in 0..max_p {
                if self.slots[t][p] != EMPTY {
                    continue;
                }
                let (saved_t, saved_p) = (self.n_tuples, self.n_pos);
                self.place(x, t, p);
                if self.partial_ok() && self.descend(depth + 1, nodes, max_nodes)? {
                    return Ok(true);
                }
                self.unplace(x, t, p);
                self.n_tuples = saved_t;
                self.n_pos = saved_p;
            }
        }
        Ok(false)
    }

    fn place(&mut self, x: usize, t: usize, p: usize) {
        self.tuple_of[x] = t;
        self.pos_of[x] = p;
        self.slots[t][p] = x;
        self.n_tuples = self.n_tuples.max(t + 1);
        self.n_pos = self.n_pos.max(p + 1);
    }

    fn unplace(&mut self, x: usize, t: usize, p: usize) {
        self.tuple_of[x] = EMPTY;
        self.pos_of[x] = EMPTY;
        self.slots[t][p] = EMPTY;
    }

    /// Tuples touched by the assigned support of `row`, and whether the
    /// whole support is assigned. `None` if more than two are touched.
    fn touched(&self, row: &[FieldElem]) -> Option<(Vec<usize>, bool)> {
        let mut ts = Vec::with_capacity(2);
        let mut complete = true;
        for (x, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = self.tuple_of[x];
            if t == EMPTY {
                complete = false;
            } else if !ts.contains(&t) {
                if ts.len() == 2 {
                    return None;
                }
                ts.push(t);
            }
        }
        Some((ts, complete))
    }

    fn coeff_at(&self, row: &[FieldElem], t: usize, p: usize) -> Option<FieldElem> {
        let x = self.slots[t][p];
        (x != EMPTY).then(|| row[x])
    }

    fn partial_ok(&self) -> bool {
        let f = self.field;
        let mut endpoints = Vec::new();
        for row in self.rows {
            let Some((ts, complete)) = self.touched(row) else { return false };
            if complete && ts.len() < 2 {
                return false;
            }
            if ts.len() < 2 {
                continue;
            }
            let (u, v) = (ts[0], ts[1]);
            for p in 0..self.n_pos {
                match (self.coeff_at(row, u, p), self.coeff_at(row, v, p)) {
                    (Some(a), Some(b)) => {
                        if !f.add(a, b).is_zero() {
                            return false;
                        }
                    }
                    (Some(a), None) | (None, Some(a)) => {
                        if !a.is_zero() && !self.can_fill(row, f.neg(a)) {
                            return false;
                        }
                    }
                    (None, None) => {}
                }
            }
            endpoints.push((u.min(v), u.max(v)));
        }
        acyclic(self.n_tuples, &endpoints)
    }

    /// Whether some unassigned variable has coefficient `c` in `row`.
    fn can_fill(&self, row: &[FieldElem], c: FieldElem) -> bool {
        (0..self.k).any(|x| self.tuple_of[x] == EMPTY && row[x] == c)
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .map(|row| {
                let (ts, _) = self.touched(row).expect("checked");
                (ts[0].min(ts[1]), ts[0].max(ts[1]))
            })
            .collect()
    }

    /// Component label of every tuple.
    fn components(&self) -> Vec<usize> {
        let mut comp: Vec<usize> = (0..self.n_tuples).collect();
        let edges = self.edges();
        loop {
            let mut changed = false;
            for &(u, v) in &edges {
                let c = comp[u].min(comp[v]);
                if comp[u] != c || comp[v] != c {
                    comp[u] = c;
                    comp[v] = c;
                    changed = true;
                }
            }
            if !changed {
                return comp;
            }
        }
    }

    /// Positions used in each component, sorted.
    fn component_positions(&self, comp: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_tuples];
        for t in 0..self.n_tuples {
            for p in 0..self.n_pos {
                if self.slots[t][p] != EMPTY && !out[comp[t]].contains(&p) {
                    out[comp[t]].push(p);
                }
            }
        }
        for ps in &mut out {
            ps.sort_unstable();
        }
        out
    }

    fn complete_ok(&self) -> bool {
        let f = self.field;
        for row in self.rows {
            let Some((ts, _)) = self.touched(row) else { return false };
            if ts.len() != 2 {
                return false;
            }
            for p in 0..self.n_pos {
                let a = self.coeff_at(row, ts[0], p).unwrap_or(FieldElem::ZERO);
                let b = self.coeff_at(row, ts[1], p).unwrap_or(FieldElem::ZERO);
                if !f.add(a, b).is_zero() {
                    return false;
                }
            }
        }
        let comp = self.components();
        let positions = self.component_positions(&comp);
        let holes: usize = (0..self.n_tuples)
            .map(|t| {
                let filled = (0..self.n_pos).filter(|&p| self.slots[t][p] != EMPTY).count();
                positions[comp[t]].len() - filled
            })
            .sum();
        holes <= self.zero_columns.len()
    }

    fn build(&self, rows: Vec<Vec<FieldElem>>) -> TemplateGraph {
        let comp = self.components();
        let positions = self.component_positions(&comp);
        let mut spare = self.zero_columns.iter().copied();
        let mut tuples: Vec<Vec<usize>> = (0..self.n_tuples)
            .map(|t| {
                positions[comp[t]]
                    .iter()
                    .map(|&p| match self.slots[t][p] {
                        EMPTY => spare.next().expect("hole count checked"),
                        x => x,
                    })
                    .collect()
            })
            .collect();
        tuples.extend(spare.map(|x| vec![x]));
        let edges = rows
            .iter()
            .zip(self.edges())
            .map(|(row, (u, v))| TemplateEdge {
                u,
                v,
                form: tuples[u].iter().map(|&x| row[x]).collect(),
            })
            .collect();
        TemplateGraph { tuples, edges, rows }
    }
}

fn acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut seen = Vec::new();
    for &(u, v) in edges {
        if seen.contains(&(u, v)) {
            continue;
        }
        seen.push((u, v));
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

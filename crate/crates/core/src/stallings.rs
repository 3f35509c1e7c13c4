//! Stallings subgroup graphs.
//!
//! [`StallingsGraph::build`] folds the bouquet of generator loops into a
//! deterministic labelled graph and trims hanging trees (the base vertex is
//! always kept). Each edge carries a word over the defining generators, kept
//! consistent through every fold, so reading an element along the graph also
//! spells it as a product of the generators. When two parallel edges are
//! identified the quotient of their words is a relation among the generators;
//! the nontrivial ones are kept as kernel elements.
//!
//! Vertices are numbered breadth-first from the base (vertex 0), exploring
//! letters in the order a, A, b, B, ….

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::{Letter, Rank, Word, WordError};

pub type VertexId = usize;

/// `table[v][g]`: the vertex reached from `v` along generator `g`, if any.
pub type Transitions = Vec<Vec<Option<VertexId>>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("the subgroup has infinite index")]
    InfiniteIndex,
    #[error("enumeration exceeded {limit} paths")]
    BudgetExhausted { limit: usize },
}

/// A directed edge `src --label--> dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub generator: usize,
}

/// A vertex with fewer than 2n incident half-edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClass {
    pub vertex: VertexId,
    pub valence: usize,
    pub bad: bool,
    /// Letters that cannot be read from this vertex.
    pub missing: Vec<Letter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Index {
    Finite(usize),
    Infinite,
}

/// Permutation action of F_n on the cosets of a finite-index subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetData {
    pub cosets: usize,
    /// `permutations[g][v]` is the coset reached from `v` by generator `g`.
    pub permutations: Vec<Vec<usize>>,
    /// Least k ≥ 1 with gᵏ acting trivially, i.e. gᵏ in the normal core.
    pub exponents: Vec<u64>,
}

impl CosetData {
    /// Whether `g` lies in the kernel of the action (the normal core).
    pub fn acts_trivially(&self, g: &Word) -> bool {
        (0..self.cosets).all(|v| self.act(v, g) == v)
    }

    pub fn act(&self, mut v: usize, g: &Word) -> usize {
        for l in g.letters() {
            let perm = &self.permutations[l.generator()];
            v = if l.is_inverse() {
                perm.iter().position(|&x| x == v).expect("permutation")
            } else {
                perm[v]
            };
        }
        v
    }
}

/// JSON schema `{vertices, base, edges: [{src, dst, label}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub rank: usize,
    pub vertices: usize,
    pub base: VertexId,
    pub edges: Vec<EdgeSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSchema {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct StallingsGraph {
    rank: Rank,
    generators: Vec<Word>,
    generator_rank: Rank,
    out: Vec<Vec<Option<VertexId>>>,
    inc: Vec<Vec<Option<VertexId>>>,
    /// Word over the defining generators carried by the edge `v --g--> out[v][g]`.
    label: Vec<Vec<Option<Word>>>,
    relations: Vec<Word>,
}

struct RawEdge {
    src: usize,
    dst: usize,
    generator: usize,
    label: Word,
    alive: bool,
}

struct Folder {
    edges: Vec<RawEdge>,
    incident: Vec<Vec<usize>>,
    alive: Vec<bool>,
    relations: Vec<Word>,
}

impl Folder {
    fn add_vertex(&mut self) -> usize {
        self.incident.push(Vec::new());
        self.alive.push(true);
        self.alive.len() - 1
    }

    fn add_edge(&mut self, src: usize, dst: usize, generator: usize, label: Word) {
        let id = self.edges.len();
        self.edges.push(RawEdge { src, dst, generator, label, alive: true });
        self.incident[src].push(id);
        if dst != src {
            self.incident[dst].push(id);
        }
    }

    /// Two distinct live edges at `v` with the same label and direction.
    fn find_conflict(&self) -> Option<(usize, usize, usize, bool)> {
        let mut slot = std::collections::HashMap::new();
        for v in (0..self.alive.len()).filter(|&v| self.alive[v]) {
            slot.clear();
            for &e in &self.incident[v] {
                let edge = &self.edges[e];
                if !edge.alive {
                    continue;
                }
                for (outgoing, at) in [(true, edge.src), (false, edge.dst)] {
                    if at != v {
                        continue;
                    }
                    if let Some(&other) = slot.get(&(edge.generator, outgoing)) {
                        if other != e {
                            return Some((v, other, e, outgoing));
                        }
                    } else {
                        slot.insert((edge.generator, outgoing), e);
                    }
                }
            }
        }
        None
    }

    fn fold(&mut self, e1: usize, e2: usize, outgoing: bool) {
        let (d1, d2) = (self.edges[e1].label.clone(), self.edges[e2].label.clone());
        // With P(v) the word read along any path from the base, every edge
        // satisfies label(src --x--> dst) ≡ P(src) · x · P(dst)⁻¹.
        let (v1, v2, shift) = if outgoing {
            (self.edges[e1].dst, self.edges[e2].dst, d2.inverse().multiply(&d1).unwrap())
        } else {
            (self.edges[e1].src, self.edges[e2].src, d2.multiply(&d1.inverse()).unwrap())
        };
        self.edges[e2].alive = false;
        if v1 == v2 {
            let relation = d1.multiply(&d2.inverse()).unwrap();
            if !relation.is_identity() {
                self.relations.push(relation);
            }
            return;
        }
        // P(v2) = shift · P(v1); keep the base as the surviving vertex
        let (into, from, shift) = if v2 == 0 { (v2, v1, shift.inverse()) } else { (v1, v2, shift) };
        let shift_inv = shift.inverse();
        let moved = std::mem::take(&mut self.incident[from]);
        for &f in &moved {
            let edge = &mut self.edges[f];
            if edge.src == from {
                edge.label = shift_inv.multiply(&edge.label).unwrap();
                edge.src = into;
            }
            if edge.dst == from {
                edge.label = edge.label.multiply(&shift).unwrap();
                edge.dst = into;
            }
        }
        for f in moved {
            if !self.incident[into].contains(&f) {
                self.incident[into].push(f);
            }
        }
        self.alive[from] = false;
    }

    fn valence(&self, v: usize) -> usize {
        self.incident[v]
            .iter()
            .filter(|&&e| self.edges[e].alive)
            .map(|&e| (self.edges[e].src == v) as usize + (self.edges[e].dst == v) as usize)
            .sum()
    }

    fn trim(&mut self) {
        let mut queue: Vec<usize> = (1..self.alive.len()).filter(|&v| self.alive[v]).collect();
        while let Some(v) = queue.pop() {
            if !self.alive[v] || self.valence(v) > 1 {
                continue;
            }
            self.alive[v] = false;
            for &e in &self.incident[v] {
                if self.edges[e].alive {
                    self.edges[e].alive = false;
                    let other = if self.edges[e].src == v { self.edges[e].dst } else { self.edges[e].src };
                    if other != 0 {
                        queue.push(other);
                    }
                }
            }
        }
    }
}

impl StallingsGraph {
    /// Folded core graph of ⟨generators⟩ ≤ F_rank.
    pub fn build(rank: Rank, generators: &[Word]) -> Result<Self, GraphError> {
        for g in generators {
            if g.rank() != rank {
                return Err(WordError::RankMismatch { left: rank.get(), right: g.rank().get() }.into());
            }
        }
        // labels live in the free group on the defining generators; a
        // zero-generator subgroup never reads a label, rank 1 is a placeholder
        let generator_rank = Rank::new(generators.len().max(1))?;
        let mut folder = Folder { edges: Vec::new(), incident: Vec::new(), alive: Vec::new(), relations: Vec::new() };
        folder.add_vertex();
        for (j, w) in generators.iter().enumerate() {
            let t = Word::generator(generator_rank, j)?;
            if w.is_identity() {
                folder.relations.push(t);
                continue;
            }
            let mut prev = 0;
            let n = w.len();
            for (i, &l) in w.letters().iter().enumerate() {
                let last = i + 1 == n;
                let next = if last { 0 } else { folder.add_vertex() };
                let step = if last { t.clone() } else { Word::identity(generator_rank) };
                if l.is_inverse() {
                    folder.add_edge(next, prev, l.generator(), step.inverse());
                } else {
                    folder.add_edge(prev, next, l.generator(), step);
                }
                prev = next;
            }
        }
        while let Some((_, e1, e2, outgoing)) = folder.find_conflict() {
            folder.fold(e1, e2, outgoing);
        }
        folder.trim();
        Ok(Self::relabel(rank, generators.to_vec(), generator_rank, folder))
    }

    fn relabel(rank: Rank, generators: Vec<Word>, generator_rank: Rank, folder: Folder) -> Self {
        let n = rank.get();
        let total = folder.alive.len();
        let mut out_edge = vec![vec![None; n]; total];
        let mut in_edge = vec![vec![None; n]; total];
        for (id, e) in folder.edges.iter().enumerate().filter(|(_, e)| e.alive) {
            out_edge[e.src][e.generator] = Some(id);
            in_edge[e.dst][e.generator] = Some(id);
        }
        let mut order = vec![usize::MAX; total];
        let mut queue = VecDeque::from([0usize]);
        let mut visited = vec![0usize];
        order[0] = 0;
        while let Some(v) = queue.pop_front() {
            for l in rank.letters() {
                let g = l.generator();
                let next = if l.is_inverse() {
                    in_edge[v][g].map(|e| folder.edges[e].src)
                } else {
                    out_edge[v][g].map(|e| folder.edges[e].dst)
                };
                if let Some(u) = next {
                    if order[u] == usize::MAX {
                        order[u] = visited.len();
                        visited.push(u);
                        queue.push_back(u);
                    }
                }
            }
        }
        let count = visited.len();
        let mut out = vec![vec![None; n]; count];
        let mut inc = vec![vec![None; n]; count];
        let mut label = vec![vec![None; n]; count];
        for e in folder.edges.iter().filter(|e| e.alive) {
            let (s, d) = (order[e.src], order[e.dst]);
            out[s][e.generator] = Some(d);
            inc[d][e.generator] = Some(s);
            label[s][e.generator] = Some(e.label.clone());
        }
        StallingsGraph { rank, generators, generator_rank, out, inc, label, relations: folder.relations }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    /// Rank of the free group in which membership witnesses are written.
    pub fn generator_rank(&self) -> Rank {
        self.generator_rank
    }

    pub fn base(&self) -> VertexId {
        0
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|row| row.iter().flatten().count()).sum()
    }

    /// Rank of the subgroup, E − V + 1.
    pub fn subgroup_rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    /// Nontrivial words in the defining generators that evaluate to 1.
    pub fn relations(&self) -> &[Word] {
        &self.relations
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut edges = Vec::with_capacity(self.edge_count());
        for (src, row) in self.out.iter().enumerate() {
            for (generator, dst) in row.iter().enumerate() {
                if let Some(dst) = *dst {
                    edges.push(Edge { src, dst, generator });
                }
            }
        }
        edges
    }

    /// Vertex reached from `v` by reading `l`, if that edge exists.
    pub fn step(&self, v: VertexId, l: Letter) -> Option<VertexId> {
        if l.is_inverse() {
            self.inc[v][l.generator()]
        } else {
            self.out[v][l.generator()]
        }
    }

    /// Follows `w` from `v`: the endpoint, or the number of letters read
    /// before leaving the graph.
    pub fn read(&self, v: VertexId, w: &Word) -> Result<VertexId, usize> {
        w.letters().iter().enumerate().try_fold(v, |at, (i, &l)| self.step(at, l).ok_or(i))
    }

    /// Number of incident half-edges; a loop counts twice.
    pub fn valence(&self, v: VertexId) -> usize {
        self.out[v].iter().flatten().count() + self.inc[v].iter().flatten().count()
    }

    pub fn is_bad(&self, v: VertexId) -> bool {
        self.valence(v) < 2 * self.rank.get()
    }

    pub fn missing_letters(&self, v: VertexId) -> Vec<Letter> {
        self.rank.letters().filter(|&l| self.step(v, l).is_none()).collect()
    }

    pub fn bad_vertices(&self) -> Vec<VertexClass> {
        (0..self.vertex_count())
            .filter(|&v| self.is_bad(v))
            .map(|v| VertexClass { vertex: v, valence: self.valence(v), bad: true, missing: self.missing_letters(v) })
            .collect()
    }

    /// Finite index iff every vertex has valence 2n, in which case the index
    /// is the number of vertices.
    pub fn index(&self) -> Index {
        if (0..self.vertex_count()).any(|v| self.is_bad(v)) {
            Index::Infinite
        } else {
            Index::Finite(self.vertex_count())
        }
    }

    /// Expresses `g` as a product of the defining generators (a word in
    /// F_{generator_rank}), or `None` when `g` is not in the subgroup.
    pub fn membership(&self, g: &Word) -> Result<Option<Word>, GraphError> {
        if g.rank() != self.rank {
            return Err(WordError::RankMismatch { left: self.rank.get(), right: g.rank().get() }.into());
        }
        let mut v = 0;
        let mut witness = Word::identity(self.generator_rank);
        for &l in g.letters() {
            let gen = l.generator();
            let (next, piece) = if l.is_inverse() {
                match self.inc[v][gen] {
                    Some(u) => (u, self.label[u][gen].as_ref().expect("edge label").inverse()),
                    None => return Ok(None),
                }
            } else {
                match self.out[v][gen] {
                    Some(u) => (u, self.label[v][gen].clone().expect("edge label")),
                    None => return Ok(None),
                }
            };
            witness = witness.multiply(&piece)?;
            v = next;
        }
        Ok((v == 0).then_some(witness))
    }

    pub fn contains(&self, g: &Word) -> Result<bool, GraphError> {
        Ok(self.membership(g)?.is_some())
    }

    pub fn coset_data(&self) -> Result<CosetData, GraphError> {
        let Index::Finite(cosets) = self.index() else {
            return Err(GraphError::InfiniteIndex);
        };
        let permutations: Vec<Vec<usize>> = (0..self.rank.get())
            .map(|g| (0..cosets).map(|v| self.out[v][g].expect("covering")).collect())
            .collect();
        let exponents = permutations.iter().map(|p| permutation_order(p)).collect();
        Ok(CosetData { cosets, permutations, exponents })
    }

    /// All elements of length ≤ `max_len`, in shortlex order.
    pub fn enumerate_elements(&self, max_len: usize) -> Vec<Word> {
        self.enumerate_elements_limited(max_len, usize::MAX).expect("unbounded")
    }

    /// Like [`enumerate_elements`](Self::enumerate_elements), failing once
    /// more than `max_paths` reduced paths have been explored.
    pub fn enumerate_elements_limited(&self, max_len: usize, max_paths: usize) -> Result<Vec<Word>, GraphError> {
        let mut found = BTreeSet::new();
        let mut letters = Vec::with_capacity(max_len);
        let mut explored = 0usize;
        self.walk(0, &mut letters, max_len, &mut explored, max_paths, &mut found)?;
        Ok(found.into_iter().collect())
    }

    fn walk(
        &self,
        v: VertexId,
        letters: &mut Vec<Letter>,
        max_len: usize,
        explored: &mut usize,
        max_paths: usize,
        found: &mut BTreeSet<Word>,
    ) -> Result<(), GraphError> {
        *explored += 1;
        if *explored > max_paths {
            return Err(GraphError::BudgetExhausted { limit: max_paths });
        }
        if v == 0 {
            found.insert(Word::from_reduced_unchecked(self.rank, letters.clone()));
        }
        if letters.len() == max_len {
            return Ok(());
        }
        for l in self.rank.letters() {
            if letters.last().is_some_and(|&p| p.cancels(l)) {
                continue;
            }
            if let Some(u) = self.step(v, l) {
                letters.push(l);
                self.walk(u, letters, max_len, explored, max_paths, found)?;
                letters.pop();
            }
        }
        Ok(())
    }

    /// Transition tables, which identify the based labelled graph up to
    /// isomorphism because vertices are numbered canonically.
    pub fn canonical_form(&self) -> (Transitions, Transitions) {
        (self.out.clone(), self.inc.clone())
    }

    pub fn schema(&self) -> GraphSchema {
        GraphSchema {
            rank: self.rank.get(),
            vertices: self.vertex_count(),
            base: 0,
            edges: self
                .edges()
                .into_iter()
                .map(|e| EdgeSchema { src: e.src, dst: e.dst, label: Letter::new(e.generator, false).to_text() })
                .collect(),
        }
    }

    /// Graphviz rendering; bad vertices are drawn in red.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph stallings {\n    rankdir=LR;\n");
        for v in 0..self.vertex_count() {
            let shape = if v == 0 { "doublecircle" } else { "circle" };
            let color = if self.is_bad(v) { "red" } else { "black" };
            let _ = writeln!(s, "    v{v} [label=\"v{v}\", shape={shape}, color={color}, fontcolor={color}];");
        }
        for e in self.edges() {
            let _ = writeln!(s, "    v{} -> v{} [label=\"{}\"];", e.src, e.dst, Letter::new(e.generator, false));
        }
        s.push_str("}\n");
        s
    }
}

fn permutation_order(p: &[usize]) -> u64 {
    let mut seen = vec![false; p.len()];
    let mut order = 1u64;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            v = p[v];
            len += 1;
        }
        order = num_integer::lcm(order, len);
    }
    order
}

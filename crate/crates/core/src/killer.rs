//! Killer words: reduced words that are not subwords of any element of a
//! subgroup of infinite index.
//!
//! The construction visits the vertices of the core graph in turn. Whenever
//! the current word can still be read from the visited vertex, the path is
//! continued without backtracking to a bad vertex and then pushed out of the
//! graph along a missing edge. Earlier vertices stay killed because each
//! stage extends the previous word.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stallings::{Index, StallingsGraph, VertexId};
use crate::word::{Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KillerError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("the subgroup has finite index, so no killer word exists")]
    FiniteIndex,
    #[error("vertex v{vertex} has valence {valence}")]
    LowValence { vertex: VertexId, valence: usize },
    #[error("v{target} cannot be reached from the end of the path without backtracking")]
    Unreachable { target: VertexId },
    #[error("a cyclically reduced killer word needs rank at least 2")]
    RankOne,
    #[error("{0} is not a killer word for this subgroup")]
    NotKiller(Word),
    #[error("vertex v{0} is not in the graph")]
    NoSuchVertex(VertexId),
}

/// A reduced edge path in a subgroup graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPath {
    start: VertexId,
    letters: Vec<Letter>,
    vertices: Vec<VertexId>,
}

impl GraphPath {
    pub fn empty(start: VertexId) -> Self {
        GraphPath { start, letters: Vec::new(), vertices: vec![start] }
    }

    /// `path(v, w)`, provided the whole word can be read inside the graph.
    pub fn read(graph: &StallingsGraph, start: VertexId, w: &Word) -> Option<Self> {
        let mut path = Self::empty(start);
        for &l in w.letters() {
            let next = graph.step(path.end(), l)?;
            path.letters.push(l);
            path.vertices.push(next);
        }
        Some(path)
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().expect("nonempty")
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn word(&self, graph: &StallingsGraph) -> Word {
        Word::from_reduced_unchecked(graph.rank(), self.letters.clone())
    }
}

/// One stage of the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillerStep {
    pub vertex: VertexId,
    pub before: Word,
    /// Where reading `before` from `vertex` ends, if it stays in the graph.
    pub terminus: Option<VertexId>,
    pub extension: Word,
    pub bad_vertex: Option<VertexId>,
    pub exit: Option<Letter>,
    pub after: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillerWord {
    pub word: Word,
    pub verified: bool,
    pub steps: Vec<KillerStep>,
}

/// Overrides for the default choices: the order in which vertices are
/// visited, and optionally a forced bad vertex to steer towards at each stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KillerPlan {
    pub order: Vec<VertexId>,
    pub targets: Vec<Option<VertexId>>,
}

/// True iff reading `w` from every vertex leaves the graph.
pub fn verify_killer(graph: &StallingsGraph, w: &Word) -> bool {
    w.rank() == graph.rank() && (0..graph.vertex_count()).all(|v| graph.read(v, w).is_err())
}

/// Breadth-first search over (vertex, last letter) states that never undoes
/// the previous letter. Returns the letters of a shortest continuation
/// ending at a vertex accepted by `goal`.
fn search(
    graph: &StallingsGraph,
    start: VertexId,
    last: Option<Letter>,
    goal: impl Fn(VertexId) -> bool,
) -> Option<(Vec<Letter>, VertexId)> {
    if goal(start) {
        return Some((Vec::new(), start));
    }
    let width = 2 * graph.rank().get() + 1;
    let slot = |v: VertexId, l: Option<Letter>| v * width + l.map_or(0, |l| l.code() + 1);
    let mut parent: Vec<Option<(usize, Letter)>> = vec![None; graph.vertex_count() * width];
    let mut seen = vec![false; graph.vertex_count() * width];
    let origin = slot(start, last);
    seen[origin] = true;
    let mut queue = VecDeque::from([(start, last)]);
    while let Some((v, prev)) = queue.pop_front() {
        for l in graph.rank().letters() {
            if prev.is_some_and(|p| p.cancels(l)) {
                continue;
            }
            let Some(u) = graph.step(v, l) else { continue };
            let s = slot(u, Some(l));
            if seen[s] {
                continue;
            }
            seen[s] = true;
            parent[s] = Some((slot(v, prev), l));
            if goal(u) {
                let mut letters = Vec::new();
                let mut at = s;
                while at != origin {
                    let (p, l) = parent[at].expect("parent");
                    letters.push(l);
                    at = p;
                }
                letters.reverse();
                return Some((letters, u));
            }
            queue.push_back((u, Some(l)));
        }
    }
    None
}

/// Continues `prefix` without backtracking to a path ending at `target`.
/// Requires every vertex to have valence at least 2.
pub fn extend_reduced_path(
    graph: &StallingsGraph,
    prefix: &GraphPath,
    target: VertexId,
) -> Result<GraphPath, KillerError> {
    if target >= graph.vertex_count() {
        return Err(KillerError::NoSuchVertex(target));
    }
    if let Some(v) = (0..graph.vertex_count()).find(|&v| graph.valence(v) < 2) {
        return Err(KillerError::LowValence { vertex: v, valence: graph.valence(v) });
    }
    let (letters, _) = search(graph, prefix.end(), prefix.letters.last().copied(), |v| v == target)
        .ok_or(KillerError::Unreachable { target })?;
    let mut path = prefix.clone();
    for l in letters {
        let next = graph.step(path.end(), l).expect("search follows edges");
        path.letters.push(l);
        path.vertices.push(next);
    }
    Ok(path)
}

/// Killer word built with the default choices: vertices in breadth-first
/// order, nearest bad vertex, lowest missing letter.
pub fn killer_word(graph: &StallingsGraph) -> Result<KillerWord, KillerError> {
    killer_word_with_plan(graph, &KillerPlan::default())
}

pub fn killer_word_with_plan(graph: &StallingsGraph, plan: &KillerPlan) -> Result<KillerWord, KillerError> {
    if let Index::Finite(_) = graph.index() {
        return Err(KillerError::FiniteIndex);
    }
    // a hair at the base, or the trivial subgroup's lone vertex, is harmless:
    // the base is itself bad, so no walk gets stuck
    if let Some(v) = (1..graph.vertex_count()).find(|&v| graph.valence(v) < 2) {
        return Err(KillerError::LowValence { vertex: v, valence: graph.valence(v) });
    }
    let order: Vec<VertexId> =
        if plan.order.is_empty() { (0..graph.vertex_count()).collect() } else { plan.order.clone() };
    if let Some(&v) = order.iter().chain(plan.targets.iter().flatten()).find(|&&v| v >= graph.vertex_count()) {
        return Err(KillerError::NoSuchVertex(v));
    }
    let mut letters: Vec<Letter> = Vec::new();
    let mut steps = Vec::with_capacity(order.len());
    for (k, &v) in order.iter().enumerate() {
        let before = Word::from_reduced_unchecked(graph.rank(), letters.clone());
        let Some(path) = GraphPath::read(graph, v, &before) else {
            steps.push(KillerStep {
                vertex: v,
                before: before.clone(),
                terminus: None,
                extension: Word::identity(graph.rank()),
                bad_vertex: None,
                exit: None,
                after: before,
            });
            continue;
        };
        let forced = plan.targets.get(k).copied().flatten();
        let found = match forced {
            Some(t) => search(graph, path.end(), letters.last().copied(), |u| u == t),
            None => search(graph, path.end(), letters.last().copied(), |u| graph.is_bad(u)),
        };
        let (extension, bad) = found.ok_or(KillerError::Unreachable { target: forced.unwrap_or(path.end()) })?;
        // an incoming edge labelled x makes x⁻¹ readable, so a missing
        // letter never cancels the previous one
        let exit = *graph.missing_letters(bad).first().ok_or(KillerError::Unreachable { target: bad })?;
        letters.extend_from_slice(&extension);
        letters.push(exit);
        steps.push(KillerStep {
            vertex: v,
            before,
            terminus: Some(path.end()),
            extension: Word::from_reduced_unchecked(graph.rank(), extension),
            bad_vertex: Some(bad),
            exit: Some(exit),
            after: Word::from_reduced_unchecked(graph.rank(), letters.clone()),
        });
    }
    let word = Word::from_letters(graph.rank(), letters)?;
    if !verify_killer(graph, &word) {
        return Err(KillerError::NotKiller(word));
    }
    Ok(KillerWord { word, verified: true, steps })
}

/// A cyclically reduced killer word containing `w`. When the ends of `w`
/// cancel, one letter is appended on the right: the lowest letter of a
/// generator different from that of the first letter.
pub fn cyclically_reduced_killer(graph: &StallingsGraph, w: &KillerWord) -> Result<KillerWord, KillerError> {
    if graph.rank().get() < 2 {
        return Err(KillerError::RankOne);
    }
    if !verify_killer(graph, &w.word) {
        return Err(KillerError::NotKiller(w.word.clone()));
    }
    if w.word.is_cyclically_reduced() {
        return Ok(KillerWord { word: w.word.clone(), verified: true, steps: w.steps.clone() });
    }
    let first = w.word.first().expect("killer words are nonempty");
    let generator = if first.generator() == 0 { 1 } else { 0 };
    let word = w.word.multiply(&Word::letter(graph.rank(), Letter::new(generator, false))?)?;
    debug_assert!(word.is_cyclically_reduced());
    if !verify_killer(graph, &word) {
        return Err(KillerError::NotKiller(word));
    }
    Ok(KillerWord { word, verified: true, steps: w.steps.clone() })
}

//! Small deterministic experiments producing tables and pass/fail checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binorm::{certificate_product, norm_bounds, norm_upper, normal_subgroup_growth, NormError, DEFAULT_NORM_BUDGET};
use crate::dihedral::{dihedral_lift, dihedral_norm, kernel_approximation, DihedralElement};
use crate::homomorphism::{
    distortion_growth, distortion_witness, qsur_failure_witness, qsur_growth, Budgets, HomError, Homomorphism,
};
use crate::killer::{
    cyclically_reduced_killer, killer_word, killer_word_with_plan, verify_killer, KillerError, KillerPlan,
};
use crate::stallings::{GraphError, StallingsGraph};
use crate::word::{Rank, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error("unknown experiment {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Killer(#[from] KillerError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

impl ExperimentError {
    /// Whether the failure is a search running out of budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            ExperimentError::Graph(GraphError::BudgetExhausted { .. })
                | ExperimentError::Hom(HomError::Graph(GraphError::BudgetExhausted { .. }))
                | ExperimentError::Norm(NormError::Qm(crate::quasimorphism::QmError::BudgetExhausted { .. }))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub parameters: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ExperimentReport {
    fn new(id: &str, parameters: &[(&str, String)]) -> Self {
        ExperimentReport {
            id: id.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            tables: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

pub const EXPERIMENT_IDS: [&str; 5] =
    ["dihedral-diameter", "example-A2", "normal-growth", "distortion-growth", "qsur-growth"];

/// Optional parameters; each experiment reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExperimentParams {
    pub max_len: Option<usize>,
    pub lift_len: Option<usize>,
    pub word: Option<Word>,
    pub kmax: Option<u64>,
    pub homomorphism: Option<Homomorphism>,
    pub trace: bool,
    pub budgets: Budgets,
}

pub fn run_experiment(id: &str, params: &ExperimentParams) -> Result<ExperimentReport, ExperimentError> {
    match id {
        "dihedral-diameter" => dihedral_diameter(params.max_len.unwrap_or(12), params.lift_len.unwrap_or(8)),
        "example-A2" => example_a2(params.max_len.unwrap_or(14), params.trace),
        "normal-growth" => {
            let rank = Rank::new(2)?;
            let w = params.word.clone().unwrap_or(Word::parse(rank, "ab")?);
            normal_growth(&w, params.kmax.unwrap_or(20))
        }
        "distortion-growth" => {
            let hom = match &params.homomorphism {
                Some(h) => h.clone(),
                None => Homomorphism::parse(3, 2, &["aa", "b", "abA"])?,
            };
            distortion(&hom, params.kmax.unwrap_or(50), &params.budgets)
        }
        "qsur-growth" => {
            let hom = match &params.homomorphism {
                Some(h) => h.clone(),
                None => Homomorphism::parse(3, 2, &["abAB", "bbbb", "aaa"])?,
            };
            qsur(&hom, params.kmax.unwrap_or(50), &params.budgets)
        }
        other => Err(ExperimentError::Unknown(other.to_string())),
    }
}

fn dihedral_diameter(max_len: usize, lift_len: usize) -> Result<ExperimentReport, ExperimentError> {
    let mut report =
        ExperimentReport::new("dihedral-diameter", &[("max_len", max_len.to_string()), ("lift_len", lift_len.to_string())]);
    let mut norms = Table::new("norms", &["element", "length", "norm", "lift", "lift_lower", "lift_upper"]);
    let mut diameter = 0;
    let mut lifts_pinch = true;
    for x in DihedralElement::all_up_to(max_len) {
        let n = dihedral_norm(&x);
        diameter = diameter.max(n);
        let lift = dihedral_lift(&x);
        let bounds = norm_bounds(&lift, &[], DEFAULT_NORM_BUDGET)?;
        lifts_pinch &= bounds.lower == n && bounds.upper == n && DihedralElement::project(&lift) == x;
        norms.push(vec![
            x.to_string(),
            x.len().to_string(),
            n.to_string(),
            lift.to_string(),
            bounds.lower.to_string(),
            bounds.upper.to_string(),
        ]);
    }
    report.tables.push(norms);
    report.check("diameter_is_2", diameter == 2, format!("max norm {diameter}"));
    report.check("lift_norms_pinch", lifts_pinch, "certified F2 bounds of every lift equal the dihedral norm");

    let rank = Rank::new(2)?;
    let mut worst = 0;
    let mut count = 0usize;
    let mut by_length = Table::new("kernel_distance", &["length", "elements", "max_distance_upper"]);
    let mut layer = vec![Word::identity(rank)];
    for len in 0..=lift_len {
        let mut layer_worst = 0;
        for y in &layer {
            let k = kernel_approximation(y, DEFAULT_NORM_BUDGET);
            let sound = DihedralElement::project(&k.kernel_element).is_identity()
                && k.kernel_element.multiply(&k.lift)? == *y
                && certificate_product(rank, &k.certificate) == k.lift;
            if !sound {
                report.check("kernel_certificates", false, format!("bad certificate for {y}"));
            }
            layer_worst = layer_worst.max(k.distance_upper);
        }
        count += layer.len();
        worst = worst.max(layer_worst);
        by_length.push(vec![len.to_string(), layer.len().to_string(), layer_worst.to_string()]);
        layer = next_layer(rank, &layer);
    }
    report.tables.push(by_length);
    report.check("kernel_distance_at_most_2", worst <= 2, format!("{count} elements, max certified distance {worst}"));
    Ok(report)
}

/// Reduced words of length one more than those in `layer`.
fn next_layer(rank: Rank, layer: &[Word]) -> Vec<Word> {
    let mut out = Vec::new();
    for w in layer {
        for l in rank.letters() {
            if w.last().is_some_and(|p| p.cancels(l)) {
                continue;
            }
            out.push(w.multiply(&Word::letter(rank, l).expect("within rank")).expect("same rank"));
        }
    }
    out
}

fn example_a2(ball: usize, trace: bool) -> Result<ExperimentReport, ExperimentError> {
    let rank = Rank::new(2)?;
    let w = |s: &str| Word::parse(rank, s);
    let gens = vec![w("abAB")?, w("bbbb")?, w("aaa")?];
    let graph = StallingsGraph::build(rank, &gens)?;
    let mut report = ExperimentReport::new("example-A2", &[("ball", ball.to_string()), ("trace", trace.to_string())]);

    let mut vertices = Table::new("vertices", &["vertex", "valence", "bad", "missing"]);
    for v in 0..graph.vertex_count() {
        let missing: String = graph.missing_letters(v).iter().map(|l| l.to_text()).collect();
        vertices.push(vec![format!("v{v}"), graph.valence(v).to_string(), graph.is_bad(v).to_string(), missing]);
    }
    report.tables.push(vertices);
    let bad = graph.bad_vertices();
    report.check(
        "graph_shape",
        graph.vertex_count() == 7 && graph.edge_count() == 9 && bad.len() == 6 && !graph.is_bad(0),
        format!("{} vertices, {} edges, {} bad", graph.vertex_count(), graph.edge_count(), bad.len()),
    );

    let killer = killer_word(&graph)?;
    let cyclic = cyclically_reduced_killer(&graph, &killer)?;
    let elements = graph.enumerate_elements(ball);
    let clean = elements.iter().all(|g| !g.contains_subword(&killer.word) && !g.contains_subword(&cyclic.word));
    report.check(
        "killer_sound",
        killer.verified && verify_killer(&graph, &cyclic.word) && clean,
        format!("{} and {} avoid all {} elements of length <= {ball}", killer.word, cyclic.word, elements.len()),
    );

    let mut words = Table::new("reference_words", &["word", "killer"]);
    for s in ["Aba", "Abaa", "Abaab"] {
        words.push(vec![s.into(), verify_killer(&graph, &w(s)?).to_string()]);
    }
    report.check(
        "reference_words",
        !verify_killer(&graph, &w("Aba")?) && verify_killer(&graph, &w("Abaa")?) && verify_killer(&graph, &w("Abaab")?),
        format!("Abaa and Abaab are killer words, Aba is readable from {}", readable_from(&graph, &w("Aba")?)),
    );
    report.tables.push(words);

    let id = |s: &str| graph.read(0, &w(s).expect("valid")).expect("readable");
    let plan = KillerPlan {
        order: vec![0, id("A"), id("a"), id("ab"), id("b"), id("bb"), id("B")],
        targets: vec![Some(id("A"))],
    };
    let traced = killer_word_with_plan(&graph, &plan)?;
    let stages: Vec<String> = traced.steps.iter().map(|s| s.after.to_string()).collect();
    let traced_cyclic = cyclically_reduced_killer(&graph, &traced)?;
    report.check(
        "reference_trace",
        stages[..3] == ["Ab", "Aba", "Abaa"] && traced.word == w("Abaa")? && traced_cyclic.word == w("Abaab")?,
        format!("stages {}, cyclic {}", stages.join(" "), traced_cyclic.word),
    );
    if trace {
        for (name, k) in [("default_trace", &killer), ("reference_trace", &traced)] {
            let mut t = Table::new(name, &["vertex", "before", "terminus", "extension", "bad_vertex", "exit", "after"]);
            for s in &k.steps {
                t.push(vec![
                    format!("v{}", s.vertex),
                    s.before.to_string(),
                    s.terminus.map_or("exits".into(), |v| format!("v{v}")),
                    s.extension.to_string(),
                    s.bad_vertex.map_or("-".into(), |v| format!("v{v}")),
                    s.exit.map_or("-".into(), |l| l.to_text()),
                    s.after.to_string(),
                ]);
            }
            report.tables.push(t);
        }
    }
    Ok(report)
}

fn readable_from(graph: &StallingsGraph, w: &Word) -> String {
    let vs: Vec<String> = (0..graph.vertex_count()).filter(|&v| graph.read(v, w).is_ok()).map(|v| format!("v{v}")).collect();
    vs.join(" ")
}

fn normal_growth(w: &Word, kmax: u64) -> Result<ExperimentReport, ExperimentError> {
    let mut report = ExperimentReport::new("normal-growth", &[("word", w.to_string()), ("kmax", kmax.to_string())]);
    let rows = normal_subgroup_growth(w, kmax)?;
    let mut t = Table::new("growth", &["k", "qm_bound", "lower"]);
    for r in &rows {
        t.push(vec![r.k.to_string(), r.qm_bound.to_string(), r.lower.to_string()]);
    }
    report.tables.push(t);
    let increasing = rows.windows(2).all(|p| p[0].qm_bound < p[1].qm_bound && p[0].lower <= p[1].lower);
    report.check("strictly_increasing", increasing, "qm bound strictly increasing, integer bound monotone");
    Ok(report)
}

fn hom_parameters(hom: &Homomorphism, kmax: u64) -> Vec<(&'static str, String)> {
    let images: Vec<String> = hom.images().iter().map(Word::to_string).collect();
    vec![
        ("source_rank", hom.source_rank().to_string()),
        ("target_rank", hom.target_rank().to_string()),
        ("images", images.join(" ")),
        ("kmax", kmax.to_string()),
    ]
}

fn distortion(hom: &Homomorphism, kmax: u64, budgets: &Budgets) -> Result<ExperimentReport, ExperimentError> {
    let mut report = ExperimentReport::new("distortion-growth", &hom_parameters(hom, kmax));
    let witness = distortion_witness(hom)?;
    let rows = distortion_growth(&witness, hom, kmax, budgets)?;
    let mut t = Table::new("growth", &["k", "source_value", "source_qm_bound", "source_lower", "image_upper"]);
    for r in &rows {
        t.push(vec![
            r.k.to_string(),
            r.source_value.to_string(),
            r.source_qm_bound.to_string(),
            r.source_lower.to_string(),
            r.image_upper.to_string(),
        ]);
    }
    report.tables.push(t);
    let (u_norm, _) = norm_upper(&witness.u, budgets.norm_budget);
    report.check(
        "image_bounded",
        rows.iter().all(|r| r.image_upper <= 2 * u_norm),
        format!("image norms <= 2*|{}| = {}", witness.u, 2 * u_norm),
    );
    report.check(
        "source_unbounded",
        rows.windows(2).all(|p| p[0].source_lower < p[1].source_lower),
        format!("h1 = {}, h2 = {}, separating {}", witness.h1, witness.h2, witness.separating),
    );
    Ok(report)
}

fn qsur(hom: &Homomorphism, kmax: u64, budgets: &Budgets) -> Result<ExperimentReport, ExperimentError> {
    let mut report = ExperimentReport::new("qsur-growth", &hom_parameters(hom, kmax));
    let witness = qsur_failure_witness(hom, budgets)?;
    let rows = qsur_growth(&witness, kmax)?;
    let mut t = Table::new("growth", &["k", "value", "lower"]);
    for r in &rows {
        t.push(vec![r.k.to_string(), r.value.to_string(), r.lower.to_string()]);
    }
    report.tables.push(t);
    report.check(
        "vanishes_on_image",
        witness.checked_elements > 0,
        format!("psi-bar of {} is 0 on {} image elements of length <= {}", witness.w, witness.checked_elements, witness.checked_radius),
    );
    report.check(
        "distance_unbounded",
        rows.windows(2).all(|p| p[0].lower < p[1].lower),
        format!("d(w^k, image) >= k/{}", witness.constants.lipschitz_bound),
    );
    Ok(report)
}

//! Morphology manipulation: per-attribute operators and a seeded (mu + lambda)
//! evolution strategy that drives a scene and path toward a target class.

mod constraints;
mod edit;
mod operators;

pub use constraints::{violations, ConstraintSet};
pub use edit::{replay, ChangeStep, Edit, Morphology, Operator};
pub use operators::{operator_for, propose, Direction, OpContext, Snapshot, INSERT_CLEARANCE, UNIT_OBJECT};

use std::sync::atomic::{AtomicBool, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NavPath, Polyline, Scene};
use crate::metrics::OrderCache;
use crate::scale::{identify_cached, Attribute, ComplexityReport, ScaleConfig};

pub const MU: usize = 8;
pub const LAMBDA: usize = 32;
/// Penalty per hard-constraint violation in the objective.
pub const PENALTY: f64 = 10.0;
/// Half a class: the search stops once the objective is within this.
pub const CONVERGENCE: f64 = 0.25;

fn default_target() -> f64 {
    3.0
}

fn default_attributes() -> Vec<Attribute> {
    Attribute::ALL.to_vec()
}

fn default_budget() -> usize {
    5000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulationRequest {
    /// Target for the overall aggregate.
    #[serde(default = "default_target")]
    pub target_class: f64,
    #[serde(default = "default_attributes")]
    pub attributes: Vec<Attribute>,
    /// Segments whose geometry may change; absent means the whole path.
    #[serde(default)]
    pub segments: Option<Vec<usize>>,
    /// Per-segment goal for `attributes` on the selected segments. When set,
    /// `target_class` still holds the overall aggregate in place.
    #[serde(default)]
    pub segment_target: Option<f64>,
    #[serde(default)]
    pub constraints: ConstraintSet,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

impl Default for ManipulationRequest {
    fn default() -> Self {
        Self {
            target_class: default_target(),
            attributes: default_attributes(),
            segments: None,
            segment_target: None,
            constraints: ConstraintSet::default(),
            seed: 0,
            budget: default_budget(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManipulationResult {
    pub scene: Scene,
    pub path: Polyline,
    pub before: ComplexityReport,
    pub after: ComplexityReport,
    pub change_log: Vec<ChangeStep>,
    pub objective: f64,
    pub violations: usize,
    pub converged: bool,
    pub cancelled: bool,
    pub evaluations: usize,
    pub generations: usize,
    /// Best objective after each generation (generation 0 first).
    pub history: Vec<f64>,
}

/// What the search minimises.
#[derive(Clone, Debug, PartialEq)]
enum Goal {
    Overall { target: f64 },
    Segment { segments: Vec<usize>, attributes: Vec<Attribute>, segment_target: f64, overall_target: f64 },
    Attribute { attribute: Attribute, target: f64 },
}

impl Goal {
    fn score(&self, r: &ComplexityReport) -> f64 {
        match self {
            Goal::Overall { target } => (r.aggregate_mean - target).abs(),
            Goal::Segment { segments, attributes, segment_target, overall_target } => {
                let mut sum = 0.0;
                for &k in segments {
                    for &a in attributes {
                        sum += (f64::from(r.segments[k].class_of(a).value()) - segment_target).abs();
                    }
                }
                sum / (segments.len() * attributes.len()) as f64 + (r.aggregate_mean - overall_target).abs()
            }
            Goal::Attribute { attribute, target } => (f64::from(r.class_of(*attribute).value()) - target).abs(),
        }
    }

    /// Continuous tie-break in score space. Class-level objectives are flat
    /// between bin edges; this lets the search drift toward the next edge.
    fn surrogate(&self, r: &ComplexityReport) -> f64 {
        let overall = |target: f64| {
            let n = r.attributes.len().max(1) as f64;
            (r.attributes.iter().map(|a| 0.5 + 5.0 * a.score).sum::<f64>() / n - target).abs()
        };
        match self {
            Goal::Overall { target } => overall(*target),
            Goal::Segment { segments, attributes, segment_target, overall_target } => {
                let mut sum = 0.0;
                for &k in segments {
                    for a in r.segments[k].attributes.iter().filter(|a| attributes.contains(&a.attribute)) {
                        sum += band_gap(a.score, *segment_target);
                    }
                }
                sum + overall(*overall_target)
            }
            Goal::Attribute { attribute, target } => band_gap(r.assessment(*attribute).score, *target),
        }
    }
}

/// Distance from `score` to the score interval of class `target`.
fn band_gap(score: f64, target: f64) -> f64 {
    let lo = 0.2 * (target - 1.0);
    let hi = 0.2 * target;
    (lo - score).max(score - hi).max(0.0)
}

struct Individual {
    morph: Morphology,
    nav: NavPath,
    report: ComplexityReport,
    log: Vec<ChangeStep>,
    objective: f64,
    surrogate: f64,
    violations: usize,
}

impl Individual {
    fn fitness(&self) -> f64 {
        self.objective + PENALTY * self.violations as f64
    }
}

struct Search<'a> {
    original: Morphology,
    corridor_candidates: Option<Vec<usize>>,
    config: &'a ScaleConfig,
    constraints: &'a ConstraintSet,
    attributes: Vec<Attribute>,
    segments: Option<Vec<usize>>,
    goal: Goal,
    cache: OrderCache,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn child_rng(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(seed ^ generation as u64) ^ (index as u64).rotate_left(32)))
}

fn weighted_pick<T: Copy>(items: &[(T, f64)], rng: &mut ChaCha8Rng) -> Option<T> {
    let total: f64 = items.iter().map(|x| x.1).sum();
    if items.is_empty() {
        return None;
    }
    if total <= 0.0 {
        return Some(items[rng.gen_range(0..items.len())].0);
    }
    let mut u = rng.gen::<f64>() * total;
    for &(x, w) in items {
        if u < w {
            return Some(x);
        }
        u -= w;
    }
    items.last().map(|x| x.0)
}

impl Search<'_> {
    fn evaluate(&self, morph: Morphology, log: Vec<ChangeStep>) -> Result<Individual> {
        let nav = NavPath::new(
            morph.line.clone(),
            &morph.scene,
            self.config.turn_threshold,
            self.corridor_candidates.as_deref(),
        )?;
        if let Goal::Segment { segments, .. } = &self.goal {
            if segments.iter().any(|&k| k >= nav.segments.len()) {
                return Err(Error::InvalidGeometry("segmentation changed".into()));
            }
        }
        let report = identify_cached(&morph.scene, &nav, self.config, Some(&self.cache))?;
        let objective = self.goal.score(&report);
        let surrogate = self.goal.surrogate(&report);
        let violations = violations(&self.original, &morph, self.constraints);
        Ok(Individual { morph, nav, report, log, objective, surrogate, violations })
    }

    /// Attribute and direction for the next mutation of `parent`.
    fn choose(&self, parent: &Individual, rng: &mut ChaCha8Rng) -> Option<(Attribute, Direction)> {
        let r = &parent.report;
        let toward_overall = |target: f64, rng: &mut ChaCha8Rng| {
            let dir = if r.aggregate_mean > target { Direction::Lower } else { Direction::Raise };
            let weights: Vec<(Attribute, f64)> = self
                .attributes
                .iter()
                .map(|&a| {
                    let c = f64::from(r.class_of(a).value());
                    (a, if dir == Direction::Lower { c - 1.0 } else { 5.0 - c })
                })
                .collect();
            weighted_pick(&weights, rng).map(|a| (a, dir))
        };
        match &self.goal {
            Goal::Overall { target } => toward_overall(*target, rng),
            Goal::Attribute { attribute, target } => {
                let c = f64::from(r.class_of(*attribute).value());
                let dir = if c > *target { Direction::Lower } else { Direction::Raise };
                Some((*attribute, dir))
            }
            Goal::Segment { segments, attributes, segment_target, overall_target } => {
                let off: Vec<(Attribute, f64)> = attributes
                    .iter()
                    .map(|&a| {
                        let gap: f64 = segments
                            .iter()
                            .map(|&k| f64::from(r.segments[k].class_of(a).value()) - segment_target)
                            .sum();
                        (a, gap)
                    })
                    .filter(|x| x.1.abs() > 1e-9)
                    .collect();
                let overall_off = (r.aggregate_mean - overall_target).abs() > CONVERGENCE;
                if !off.is_empty() && (!overall_off || rng.gen_bool(0.5)) {
                    let (a, gap) = off[rng.gen_range(0..off.len())];
                    Some((a, if gap > 0.0 { Direction::Lower } else { Direction::Raise }))
                } else {
                    toward_overall(*overall_target, rng)
                }
            }
        }
    }

    fn mutate(&self, parent: &Individual, generation: usize, index: usize, seed: u64) -> Option<(Morphology, Vec<ChangeStep>)> {
        let mut rng = child_rng(seed, generation, index);
        let ctx = OpContext { constraints: self.constraints, config: self.config, segments: self.segments.as_deref() };
        // Occasionally undo one earlier step to let the search back out.
        let undoable: Vec<usize> =
            (0..parent.log.len()).filter(|&i| parent.log[i].operator != Operator::Repair).collect();
        if !undoable.is_empty() && rng.gen_bool(0.1) {
            let drop = undoable[rng.gen_range(0..undoable.len())];
            let mut log = parent.log.clone();
            log.remove(drop);
            let (scene, line) = replay(&self.original.scene, &self.original.line, &log).ok()?;
            return Some((Morphology::new(scene, line), log));
        }
        for _ in 0..4 {
            let (attribute, dir) = self.choose(parent, &mut rng)?;
            let magnitude: f64 = rng.gen_range(0.2..1.0);
            let snap = Snapshot { morph: &parent.morph, nav: &parent.nav, report: &parent.report };
            let edits = propose(attribute, dir, &ctx, &snap, magnitude, &mut rng);
            if edits.is_empty() {
                continue;
            }
            let mut morph = parent.morph.clone();
            let mut log = parent.log.clone();
            let op = operator_for(attribute);
            for edit in edits {
                morph.apply(&edit).ok()?;
                log.push(ChangeStep { operator: op, edit });
            }
            return Some((morph, log));
        }
        None
    }
}

fn validate_request(request: &ManipulationRequest, path: &NavPath, scene: &Scene) -> Result<()> {
    let bad = |m: String| Err(Error::InfeasibleRequest(m));
    request.constraints.validate()?;
    if !(1.0..=5.0).contains(&request.target_class) {
        return bad(format!("target class {} outside [1, 5]", request.target_class));
    }
    if request.attributes.is_empty() {
        return bad("no attributes selected".into());
    }
    if request.budget == 0 {
        return bad("evaluation budget must be positive".into());
    }
    let fixed = scene.obstacles.iter().filter(|o| !request.constraints.is_movable(o)).count();
    if fixed > request.constraints.max_objects {
        return bad(format!("{fixed} immovable objects exceed max_objects {}", request.constraints.max_objects));
    }
    if let Some(segs) = &request.segments {
        if segs.is_empty() {
            return bad("empty segment selection".into());
        }
        if let Some(&k) = segs.iter().find(|&&k| k >= path.segments.len()) {
            return bad(format!("segment {k} does not exist (path has {})", path.segments.len()));
        }
    }
    if let Some(t) = request.segment_target {
        if !(1.0..=5.0).contains(&t) {
            return bad(format!("segment target {t} outside [1, 5]"));
        }
        if request.segments.is_none() {
            return bad("a segment target needs a segment selection".into());
        }
        if path.segments.len() == 1 && (t - request.target_class).abs() > 1e-9 {
            return bad("a single-segment path cannot hold different segment and overall targets".into());
        }
    }
    Ok(())
}

/// Drives the morphology toward `request.target_class` (or the segment goal).
pub fn manipulate(scene: &Scene, path: &NavPath, request: &ManipulationRequest, config: &ScaleConfig) -> Result<ManipulationResult> {
    manipulate_with_cancel(scene, path, request, config, None)
}

/// As [`manipulate`]; the search stops early (keeping the best so far) once
/// `cancel` is set.
pub fn manipulate_with_cancel(
    scene: &Scene,
    path: &NavPath,
    request: &ManipulationRequest,
    config: &ScaleConfig,
    cancel: Option<&AtomicBool>,
) -> Result<ManipulationResult> {
    config.validate()?;
    let path = &path.resegment(scene, config.turn_threshold)?;
    validate_request(request, path, scene)?;
    let goal = match (request.segment_target, &request.segments) {
        (Some(t), Some(segs)) => Goal::Segment {
            segments: segs.clone(),
            attributes: request.attributes.clone(),
            segment_target: t,
            overall_target: request.target_class,
        },
        _ => Goal::Overall { target: request.target_class },
    };
    let mut attributes = if matches!(goal, Goal::Segment { .. }) {
        // The path stays put in segment mode so segment indices keep meaning.
        Attribute::ALL.iter().copied().filter(|&a| a != Attribute::Rotation).collect()
    } else {
        request.attributes.clone()
    };
    attributes.sort();
    attributes.dedup();
    run_search(scene, path, request, config, goal, attributes, cancel)
}

fn run_search(
    scene: &Scene,
    path: &NavPath,
    request: &ManipulationRequest,
    config: &ScaleConfig,
    goal: Goal,
    attributes: Vec<Attribute>,
    cancel: Option<&AtomicBool>,
) -> Result<ManipulationResult> {
    let original = Morphology::new(scene.clone(), path.line.clone());
    let search = Search {
        original: original.clone(),
        corridor_candidates: path.corridor_candidates.clone(),
        config,
        constraints: &request.constraints,
        attributes,
        segments: request.segments.clone(),
        goal,
        cache: OrderCache::new(),
    };
    let before = identify_cached(scene, path, config, Some(&search.cache))?;

    // Repair: clamp corridor widths into the allowed range.
    let cs = &request.constraints;
    let mut repaired = original;
    let mut log = Vec::new();
    for c in &scene.corridors {
        let w = c.width.clamp(cs.min_width, cs.max_width);
        if w != c.width {
            let edit = Edit::ResizeCorridor { corridor: c.id.clone(), width: w, height: c.height };
            repaired.apply(&edit)?;
            log.push(ChangeStep { operator: Operator::Repair, edit });
        }
    }
    let first = search.evaluate(repaired, log)?;
    let mut evaluations = 1;
    let mut history = vec![first.fitness()];
    let mut population = vec![first];
    let mut generation = 0;
    let stopped = |pop: &[Individual]| pop[0].violations == 0 && pop[0].fitness() <= CONVERGENCE;
    let mut cancelled = false;

    while !stopped(&population) && evaluations < request.budget {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            cancelled = true;
            break;
        }
        generation += 1;
        let slots = LAMBDA.min(request.budget - evaluations);
        let pop = &population;
        let offspring: Vec<Option<Individual>> = (0..slots)
            .into_par_iter()
            .map(|i| {
                let parent = &pop[i % pop.len()];
                let (morph, log) = search.mutate(parent, generation, i, request.seed)?;
                search.evaluate(morph, log).ok()
            })
            .collect();
        evaluations += slots;
        population.extend(offspring.into_iter().flatten());
        // Stable sort: ties go to the smaller surrogate, the shorter log, then
        // to the older entry.
        population.sort_by(|a, b| {
            a.fitness()
                .total_cmp(&b.fitness())
                .then(a.surrogate.total_cmp(&b.surrogate))
                .then(a.log.len().cmp(&b.log.len()))
        });
        population.truncate(MU);
        history.push(population[0].fitness());
    }

    let best = population.swap_remove(0);
    Ok(ManipulationResult {
        converged: best.violations == 0 && best.fitness() <= CONVERGENCE,
        scene: best.morph.scene,
        path: best.morph.line,
        before,
        after: best.report,
        change_log: best.log,
        objective: best.objective,
        violations: best.violations,
        cancelled,
        evaluations,
        generations: generation,
        history,
    })
}

/// Raises or lowers one attribute of one segment toward `segment_target`
/// while holding the overall aggregate at `overall_target`.
#[allow(clippy::too_many_arguments)]
pub fn manipulate_segment(
    scene: &Scene,
    path: &NavPath,
    segment: usize,
    attribute: Attribute,
    segment_target: f64,
    overall_target: f64,
    seed: u64,
    budget: usize,
    constraints: ConstraintSet,
    config: &ScaleConfig,
) -> Result<ManipulationResult> {
    let request = ManipulationRequest {
        target_class: overall_target,
        attributes: vec![attribute],
        segments: Some(vec![segment]),
        segment_target: Some(segment_target),
        constraints,
        seed,
        budget,
    };
    manipulate(scene, path, &request, config)
}

/// Outcome of one deterministic per-attribute operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorOutcome {
    pub scene: Scene,
    pub path: Polyline,
    pub steps: Vec<ChangeStep>,
    pub report: ComplexityReport,
    /// False when the operator ran out of moves before reaching the target.
    pub reached: bool,
}

const OPERATOR_ITERATIONS: usize = 200;

/// Repeats single operator steps on `attribute` until its class matches
/// `target_class` or no further move exists (best effort).
pub fn apply_operator(
    scene: &Scene,
    path: &NavPath,
    attribute: Attribute,
    target_class: u8,
    seed: u64,
    constraints: &ConstraintSet,
    config: &ScaleConfig,
) -> Result<OperatorOutcome> {
    config.validate()?;
    constraints.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = OpContext { constraints, config, segments: None };
    let original = Morphology::new(scene.clone(), path.line.clone());
    let mut morph = original.clone();
    let mut steps = Vec::new();
    let build = |m: &Morphology| NavPath::new(m.line.clone(), &m.scene, config.turn_threshold, path.corridor_candidates.as_deref());
    let mut nav = build(&morph)?;
    let mut report = crate::scale::identify(&morph.scene, &nav, config)?;
    for _ in 0..OPERATOR_ITERATIONS {
        let class = report.class_of(attribute).value();
        if class == target_class {
            return Ok(OperatorOutcome { scene: morph.scene, path: morph.line, steps, report, reached: true });
        }
        let dir = if class > target_class { Direction::Lower } else { Direction::Raise };
        let mut advanced = false;
        for _attempt in 0..8 {
            let snap = Snapshot { morph: &morph, nav: &nav, report: &report };
            let edits = propose(attribute, dir, &ctx, &snap, 0.5, &mut rng);
            if edits.is_empty() {
                continue;
            }
            let mut next = morph.clone();
            if edits.iter().try_for_each(|e| next.apply(e)).is_err() {
                continue;
            }
            let Ok(next_nav) = build(&next) else { continue };
            let Ok(next_report) = crate::scale::identify(&next.scene, &next_nav, config) else { continue };
            if violations(&original, &next, constraints) > 0 {
                continue;
            }
            let op = operator_for(attribute);
            steps.extend(edits.into_iter().map(|edit| ChangeStep { operator: op, edit }));
            morph = next;
            nav = next_nav;
            report = next_report;
            advanced = true;
            break;
        }
        if !advanced {
            break;
        }
    }
    let reached = report.class_of(attribute).value() == target_class;
    Ok(OperatorOutcome { scene: morph.scene, path: morph.line, steps, report, reached })
}

pub fn op_rotation_simplify(scene: &Scene, path: &NavPath, target_class: u8, constraints: &ConstraintSet, config: &ScaleConfig) -> Result<OperatorOutcome> {
    apply_operator(scene, path, Attribute::Rotation, target_class, 0, constraints, config)
}

pub fn op_size_fit(scene: &Scene, path: &NavPath, target_class: u8, constraints: &ConstraintSet, config: &ScaleConfig) -> Result<OperatorOutcome> {
    apply_operator(scene, path, Attribute::Size, target_class, 0, constraints, config)
}

pub fn op_symmetrize(scene: &Scene, path: &NavPath, target_class: u8, constraints: &ConstraintSet, config: &ScaleConfig) -> Result<OperatorOutcome> {
    apply_operator(scene, path, Attribute::Symmetry, target_class, 0, constraints, config)
}

pub fn op_clutter_adjust(
    scene: &Scene,
    path: &NavPath,
    target_class: u8,
    seed: u64,
    constraints: &ConstraintSet,
    config: &ScaleConfig,
) -> Result<OperatorOutcome> {
    apply_operator(scene, path, Attribute::Clutter, target_class, seed, constraints, config)
}

pub fn op_order_impose(scene: &Scene, path: &NavPath, target_class: u8, constraints: &ConstraintSet, config: &ScaleConfig) -> Result<OperatorOutcome> {
    apply_operator(scene, path, Attribute::Order, target_class, 0, constraints, config)
}

/// Evolutionary search over wall trims, extensions and baffles only, with
/// objective |visibility class - target|.
pub fn op_visibility_search(scene: &Scene, path: &NavPath, target_class: u8, request: &ManipulationRequest, config: &ScaleConfig) -> Result<ManipulationResult> {
    config.validate()?;
    let path = &path.resegment(scene, config.turn_threshold)?;
    validate_request(request, path, scene)?;
    let goal = Goal::Attribute { attribute: Attribute::Visibility, target: f64::from(target_class) };
    run_search(scene, path, request, config, goal, vec![Attribute::Visibility], None)
}

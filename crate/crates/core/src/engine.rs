//! Online hypothetico-deductive inference.
//!
//! Each observed action is appended to the timeline and processed:
//! schemas predicting its type as their first effect evoke new hypotheses
//! (bottom-up), and hypotheses parked at its start timepoint that predicted
//! its type are verified against it (top-down). A hypothesis whose effects
//! are all verified yields an inferred intention, which is processed the same
//! way, recursively. Parsimony pointers track the shortest cover so far.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::kb::{
    render_atom, Anchor, ConstraintAtom, EffectTemplate, KnowledgeBase, Schema, SchemaId, Term,
};
use crate::metrics::{NodeId, NodeKind, Recorder};
use crate::symbol::Symbol;
use crate::timeline::{
    inst_kind, ActionInstance, Explanation, HypId, InstId, InstanceKind, Timeline, TimelineError,
    TpId,
};
use crate::transcript::{check_action, Action, Step, TranscriptError};
use crate::worldstate::{Change, EnvObject, WorldError, WorldState};

pub const DEFAULT_RECURSION_LIMIT: usize = 64;

pub type Bindings = BTreeMap<Symbol, Symbol>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Action(#[from] TranscriptError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("recursion depth limit {0} exceeded while processing inferred intentions")]
    RecursionLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypStatus {
    Active,
    Completed,
    Abandoned,
}

#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub schema: SchemaId,
    pub bindings: Bindings,
    binding_nodes: BTreeMap<Symbol, NodeId>,
    /// Index of the next effect to verify.
    pub next_effect: usize,
    pub start: TpId,
    pub current: TpId,
    /// Indices into the schema's constraints not yet evaluated.
    pub pending: Vec<usize>,
    pub status: HypStatus,
    /// Instances that verified effects `0..next_effect`.
    pub matched: Vec<InstId>,
    /// Parked hypotheses stay in their timepoint's store; verifying one
    /// forks a successor instead of mutating it.
    pub parked: bool,
    pub node: NodeId,
}

/// Position-wise unification of an effect template against observed
/// arguments. Returns the new bindings, or `None` on conflict; `bindings` is
/// never modified.
pub fn unify_effect(
    bindings: &Bindings,
    template: &EffectTemplate,
    args: &[Symbol],
) -> Option<Vec<(Symbol, Symbol)>> {
    if template.args.len() != args.len() {
        return None;
    }
    let mut delta: Vec<(Symbol, Symbol)> = Vec::new();
    for (term, observed) in template.args.iter().zip(args) {
        match term {
            Term::Lit(lit) => {
                if lit != observed {
                    return None;
                }
            }
            Term::Var(v) => {
                let bound = bindings
                    .get(v)
                    .or_else(|| delta.iter().find(|(k, _)| k == v).map(|(_, val)| val));
                match bound {
                    Some(val) if val != observed => return None,
                    Some(_) => {}
                    None => delta.push((v.clone(), observed.clone())),
                }
            }
        }
    }
    Some(delta)
}

/// Why a hypothesis failed its constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintFailure {
    Violated(String),
    /// Still not evaluable at completion (an operand never got bound).
    Unresolved(String),
    /// The property lookup itself failed.
    Lookup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// After each verified effect; only start-anchored timepoints are known.
    Incremental,
    /// At completion; end-anchored atoms become evaluable and nothing may remain.
    Completion,
}

fn resolve<'a>(term: &'a Term, bindings: &'a Bindings) -> Option<&'a Symbol> {
    match term {
        Term::Lit(s) => Some(s),
        Term::Var(v) => bindings.get(v),
    }
}

/// Evaluates every evaluable pending atom until no more progress is made.
/// Newly bound variables are returned on success. On `Completion`, an atom
/// that is still not evaluable counts as a failure.
#[allow(clippy::too_many_arguments)]
pub fn eval_constraints(
    world: &WorldState,
    rec: &mut Recorder,
    schema: &Schema,
    bindings: &mut Bindings,
    pending: &mut Vec<usize>,
    start: usize,
    end: Option<usize>,
    phase: Phase,
) -> Result<Vec<Symbol>, ConstraintFailure> {
    let mut bound = Vec::new();
    loop {
        let mut progressed = false;
        let mut i = 0;
        while i < pending.len() {
            let atom = &schema.constraints[pending[i]];
            let verdict = match atom {
                ConstraintAtom::Eq(a, b) | ConstraintAtom::Neq(a, b) => {
                    match (resolve(a, bindings), resolve(b, bindings)) {
                        (Some(x), Some(y)) => Some(if matches!(atom, ConstraintAtom::Eq(..)) {
                            x == y
                        } else {
                            x != y
                        }),
                        _ => None,
                    }
                }
                ConstraintAtom::PropAt {
                    anchor,
                    object,
                    prop,
                    value,
                } => {
                    let at = match anchor {
                        Anchor::Start => Some(start),
                        Anchor::End => end,
                    };
                    match (at, resolve(object, bindings)) {
                        (Some(at), Some(obj)) => match world.query_recorded(obj, prop, at, rec) {
                            Ok(actual) => match resolve(value, bindings) {
                                Some(expected) => Some(*expected == actual),
                                None => {
                                    // unbound value variable: bind to the observed state
                                    let var = value.symbol().clone();
                                    bindings.insert(var.clone(), actual);
                                    bound.push(var);
                                    Some(true)
                                }
                            },
                            Err(e) => {
                                return Err(ConstraintFailure::Lookup(format!(
                                    "{}: {e}",
                                    render_atom(atom)
                                )))
                            }
                        },
                        _ => None,
                    }
                }
            };
            match verdict {
                Some(true) => {
                    pending.remove(i);
                    progressed = true;
                }
                Some(false) => return Err(ConstraintFailure::Violated(render_atom(atom))),
                None => i += 1,
            }
        }
        if !progressed {
            break;
        }
    }
    if phase == Phase::Completion && !pending.is_empty() {
        let atom = &schema.constraints[pending[0]];
        return Err(ConstraintFailure::Unresolved(render_atom(atom)));
    }
    Ok(bound)
}

#[derive(Debug, Clone, Copy)]
pub struct SessionOptions {
    pub record_metrics: bool,
    pub recursion_limit: usize,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions {
            record_metrics: false,
            recursion_limit: DEFAULT_RECURSION_LIMIT,
        }
    }
}

/// One inference run over one demonstration, fed step by step.
#[derive(Debug, Clone)]
pub struct Session {
    kb: Arc<KnowledgeBase>,
    world: WorldState,
    timeline: Timeline,
    hyps: Vec<Hypothesis>,
    rec: Recorder,
    recursion_limit: usize,
    diagnostics: Vec<String>,
}

impl Session {
    pub fn new(
        kb: Arc<KnowledgeBase>,
        init: Vec<EnvObject>,
        opts: SessionOptions,
    ) -> Result<Self, EngineError> {
        let mut rec = Recorder::new(opts.record_metrics);
        let world = WorldState::init_env(init)?;
        let timeline = Timeline::new(&mut rec);
        Ok(Session {
            kb,
            world,
            timeline,
            hyps: Vec::new(),
            rec,
            recursion_limit: opts.recursion_limit,
            diagnostics: Vec::new(),
        })
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hyps
    }

    pub fn recorder(&self) -> &Recorder {
        &self.rec
    }

    /// Non-fatal problems seen during inference (failed property lookups,
    /// unbound cause parameters).
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// Number of primitive actions ingested so far.
    pub fn steps(&self) -> usize {
        self.timeline.len() - 1
    }

    /// Ingests one observed action and the environment changes it caused.
    pub fn push_step(&mut self, action: &Action, changes: &[Change]) -> Result<(), EngineError> {
        let step = self.steps() + 1;
        check_action(&self.kb, action, step)?;
        let record = self
            .world
            .apply_changes_recorded(step, changes, &mut self.rec)?;
        let prev = self.timeline.current();
        let end = self.timeline.append_timepoint(prev, record, &mut self.rec);
        let node = self.rec.create(NodeKind::Action);
        let inst = self.timeline.add_instance(ActionInstance {
            action_type: action.name.clone(),
            args: action.args.clone(),
            start: prev,
            end,
            kind: InstanceKind::Primitive,
            provenance: None,
            node,
        });
        self.process_action(inst, 0)
    }

    /// The most parsimonious explanation of everything ingested so far.
    pub fn finish(&mut self) -> Result<Explanation, EngineError> {
        let current = self.timeline.current();
        Ok(self.timeline.trace(current, &mut self.rec)?)
    }

    /// Top-level instances of the current explanation, in order.
    pub fn top_level(&self) -> Result<Vec<InstId>, EngineError> {
        let mut out = Vec::new();
        let mut at = self.timeline.current();
        while at.0 != 0 {
            let p = self
                .timeline
                .tp(at)
                .parsimony
                .ok_or(TimelineError::BrokenChain(at.0))?;
            out.push(p.pointer);
            at = self.timeline.instance(p.pointer).start;
        }
        out.reverse();
        Ok(out)
    }

    /// Primitive instances an instance derives, following provenance.
    pub fn expand(&self, inst: InstId) -> Vec<InstId> {
        let i = self.timeline.instance(inst);
        match i.provenance {
            None => vec![inst],
            Some(h) => self.hyps[h.0]
                .matched
                .iter()
                .flat_map(|&c| self.expand(c))
                .collect(),
        }
    }

    pub fn process_action(&mut self, a: InstId, depth: usize) -> Result<(), EngineError> {
        if depth > self.recursion_limit {
            return Err(EngineError::RecursionLimit(self.recursion_limit));
        }
        let inst = self.timeline.instance(a).clone();
        self.rec.access(inst.node, inst_kind(inst.kind));

        self.timeline.update_parsimony(inst.end, a, &mut self.rec)?;

        if inst.kind == InstanceKind::Inferred {
            let key = (
                inst.action_type.clone(),
                inst.args.clone(),
                self.timeline.tp(inst.start).index,
            );
            if !self.timeline.register_intention(inst.end, key) {
                return Ok(());
            }
        }

        let kb = Arc::clone(&self.kb);
        for &sid in kb.schemas_for_first_effect(&inst.action_type) {
            let h = self.evoke(sid, inst.start);
            self.verify_hypothesis(h, a, depth)?;
        }

        let waiting = self
            .timeline
            .hypotheses_for(inst.start, &inst.action_type, &mut self.rec);
        for h in waiting {
            self.verify_hypothesis(h, a, depth)?;
        }
        Ok(())
    }

    fn evoke(&mut self, schema: SchemaId, start: TpId) -> HypId {
        let node = self.rec.create(NodeKind::Hypothesis);
        let constraints = self.kb.schema(schema).constraints.len();
        self.hyps.push(Hypothesis {
            schema,
            bindings: Bindings::new(),
            binding_nodes: BTreeMap::new(),
            next_effect: 0,
            start,
            current: start,
            pending: (0..constraints).collect(),
            status: HypStatus::Active,
            matched: Vec::new(),
            parked: false,
            node,
        });
        HypId(self.hyps.len() - 1)
    }

    fn abandon(&mut self, h: HypId) {
        let hyp = &mut self.hyps[h.0];
        if !hyp.parked {
            hyp.status = HypStatus::Abandoned;
        }
    }

    pub fn verify_hypothesis(
        &mut self,
        h: HypId,
        a: InstId,
        depth: usize,
    ) -> Result<(), EngineError> {
        let kb = Arc::clone(&self.kb);
        let hyp = &self.hyps[h.0];
        debug_assert_eq!(hyp.status, HypStatus::Active);
        self.rec.access(hyp.node, NodeKind::Hypothesis);
        let schema = kb.schema(hyp.schema);
        let template = &schema.effects[hyp.next_effect];
        let inst = self.timeline.instance(a).clone();
        debug_assert_eq!(template.effect_type, inst.action_type);

        let Some(delta) = unify_effect(&hyp.bindings, template, &inst.args) else {
            self.abandon(h);
            return Ok(());
        };
        for term in &template.args {
            if let Some(node) = term.as_var().and_then(|v| hyp.binding_nodes.get(v)) {
                self.rec.access(*node, NodeKind::Binding);
            }
        }

        let mut bindings = hyp.bindings.clone();
        let mut pending = hyp.pending.clone();
        let mut new_vars: Vec<Symbol> = delta.iter().map(|(k, _)| k.clone()).collect();
        bindings.extend(delta);

        let start_index = self.timeline.tp(hyp.start).index;
        let end_index = self.timeline.tp(inst.end).index;
        let completing = hyp.next_effect + 1 == schema.effects.len();

        let mut checked = eval_constraints(
            &self.world,
            &mut self.rec,
            schema,
            &mut bindings,
            &mut pending,
            start_index,
            None,
            Phase::Incremental,
        );
        if completing {
            checked = checked.and_then(|mut vars| {
                let more = eval_constraints(
                    &self.world,
                    &mut self.rec,
                    schema,
                    &mut bindings,
                    &mut pending,
                    start_index,
                    Some(end_index),
                    Phase::Completion,
                )?;
                vars.extend(more);
                Ok(vars)
            });
        }
        match checked {
            Ok(vars) => new_vars.extend(vars),
            Err(failure) => {
                if let ConstraintFailure::Lookup(msg) = failure {
                    self.diagnostics
                        .push(format!("schema {}: {msg}", schema.id));
                }
                self.abandon(h);
                return Ok(());
            }
        }

        let cause_args: Option<Vec<Symbol>> = if completing {
            let args: Option<Vec<Symbol>> = schema
                .cause_params
                .iter()
                .map(|p| bindings.get(p).cloned())
                .collect();
            if args.is_none() {
                self.diagnostics.push(format!(
                    "schema {} for `{}` completed with an unbound cause parameter",
                    schema.id, schema.cause_type
                ));
                self.abandon(h);
                return Ok(());
            }
            args
        } else {
            None
        };

        // Successor: the hypothesis itself when fresh, a fork when parked.
        let succ = if self.hyps[h.0].parked {
            let parent = &self.hyps[h.0];
            let mut fork = parent.clone();
            fork.parked = false;
            fork.node = self.rec.create(NodeKind::Hypothesis);
            self.hyps.push(fork);
            HypId(self.hyps.len() - 1)
        } else {
            h
        };
        for v in new_vars {
            let node = self.rec.create(NodeKind::Binding);
            self.hyps[succ.0].binding_nodes.insert(v, node);
        }
        let s = &mut self.hyps[succ.0];
        debug_assert!(self.timeline.tp(inst.end).index > self.timeline.tp(s.current).index);
        s.bindings = bindings;
        s.pending = pending;
        s.next_effect += 1;
        s.current = inst.end;
        s.matched.push(a);

        match cause_args {
            Some(args) => {
                s.status = HypStatus::Completed;
                let node = self.rec.create(NodeKind::Intention);
                let intent = self.timeline.add_instance(ActionInstance {
                    action_type: schema.cause_type.clone(),
                    args,
                    start: s.start,
                    end: inst.end,
                    kind: InstanceKind::Inferred,
                    provenance: Some(succ),
                    node,
                });
                self.process_action(intent, depth + 1)
            }
            None => {
                s.parked = true;
                let predicted = &schema.effects[s.next_effect].effect_type;
                self.timeline
                    .add_hypothesis(inst.end, predicted, succ, &mut self.rec);
                Ok(())
            }
        }
    }
}

/// Runs a whole demonstration through a fresh session.
pub fn explain(
    kb: Arc<KnowledgeBase>,
    init: Vec<EnvObject>,
    steps: &[Step],
) -> Result<Explanation, EngineError> {
    let mut session = Session::new(kb, init, SessionOptions::default())?;
    for step in steps {
        session.push_step(&step.action, &step.changes)?;
    }
    session.finish()
}

//! The backward-chained timeline: timepoints, observed/inferred action
//! instances, per-timepoint hypothesis stores and parsimony pointers.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::metrics::{NodeId, NodeKind, Recorder};
use crate::symbol::Symbol;
use crate::worldstate::ChangeRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TpId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HypId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Primitive,
    Inferred,
}

#[derive(Debug, Clone)]
pub struct ActionInstance {
    pub action_type: Symbol,
    pub args: Vec<Symbol>,
    pub start: TpId,
    pub end: TpId,
    pub kind: InstanceKind,
    /// The completed hypothesis an inferred instance came from.
    pub provenance: Option<HypId>,
    pub node: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parsimony {
    pub pointer: InstId,
    pub distance: u32,
}

#[derive(Debug, Clone)]
struct StoreEntry {
    hyp: HypId,
    node: NodeId,
}

/// Dedup key for inferred intentions ending at a timepoint.
pub type IntentKey = (Symbol, Vec<Symbol>, usize);

#[derive(Debug, Clone)]
pub struct Timepoint {
    pub index: usize,
    pub prev: Option<TpId>,
    pub change_record: Option<ChangeRecord>,
    store: HashMap<Symbol, Vec<StoreEntry>>,
    pub parsimony: Option<Parsimony>,
    processed: HashSet<IntentKey>,
    pub node: NodeId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimelineError {
    #[error("instance starting at t{0} has no path back to the initial timepoint")]
    MissingDistance(usize),
    #[error("timepoint t{0} has no parsimony pointer; the demonstration was not fully processed")]
    BrokenChain(usize),
}

/// One top-level element of an explanation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Intent {
    pub action_type: Symbol,
    pub args: Vec<Symbol>,
    pub start: usize,
    pub end: usize,
}

impl Intent {
    pub fn new(action_type: &str, args: &[&str], start: usize, end: usize) -> Self {
        Intent {
            action_type: Symbol::new(action_type),
            args: args.iter().map(|a| Symbol::new(a)).collect(),
            start,
            end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Explanation {
    pub intents: Vec<Intent>,
    /// Number of primitive actions the explanation covers.
    pub covered_actions: usize,
}

impl Explanation {
    /// `(explanation (intent NAME arg* (span START END))*)`, no trailing newline.
    pub fn to_sexp(&self) -> String {
        let mut out = String::from("(explanation");
        for i in &self.intents {
            let _ = write!(out, " (intent {}", i.action_type);
            for a in &i.args {
                let _ = write!(out, " {a}");
            }
            let _ = write!(out, " (span {} {}))", i.start, i.end);
        }
        out.push(')');
        out
    }

    /// True when intents tile `[0, covered_actions]` without gaps or overlaps.
    pub fn is_gapless(&self) -> bool {
        let mut at = 0;
        for i in &self.intents {
            if i.start != at || i.end <= i.start {
                return false;
            }
            at = i.end;
        }
        at == self.covered_actions
    }
}

#[derive(Debug, Clone)]
pub struct Timeline {
    tps: Vec<Timepoint>,
    instances: Vec<ActionInstance>,
}

impl Timeline {
    pub fn new(rec: &mut Recorder) -> Self {
        let node = rec.create(NodeKind::Timepoint);
        Timeline {
            tps: vec![Timepoint {
                index: 0,
                prev: None,
                change_record: None,
                store: HashMap::new(),
                parsimony: None,
                processed: HashSet::new(),
                node,
            }],
            instances: Vec::new(),
        }
    }

    pub fn initial(&self) -> TpId {
        TpId(0)
    }

    pub fn current(&self) -> TpId {
        TpId(self.tps.len() - 1)
    }

    pub fn tp(&self, id: TpId) -> &Timepoint {
        &self.tps[id.0]
    }

    pub fn len(&self) -> usize {
        self.tps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn instance(&self, id: InstId) -> &ActionInstance {
        &self.instances[id.0]
    }

    pub fn instances(&self) -> &[ActionInstance] {
        &self.instances
    }

    /// Appends a fresh timepoint after `prev` (which must be the current one).
    pub fn append_timepoint(
        &mut self,
        prev: TpId,
        change_record: ChangeRecord,
        rec: &mut Recorder,
    ) -> TpId {
        debug_assert_eq!(prev, self.current());
        rec.access(self.tps[prev.0].node, NodeKind::Timepoint);
        let node = rec.create(NodeKind::Timepoint);
        let index = self.tps[prev.0].index + 1;
        self.tps.push(Timepoint {
            index,
            prev: Some(prev),
            change_record: Some(change_record),
            store: HashMap::new(),
            parsimony: None,
            processed: HashSet::new(),
            node,
        });
        TpId(self.tps.len() - 1)
    }

    pub fn add_instance(&mut self, inst: ActionInstance) -> InstId {
        debug_assert!(inst.start < inst.end);
        self.instances.push(inst);
        InstId(self.instances.len() - 1)
    }

    /// Parks `h` at `tp` under the type it predicts next.
    pub fn add_hypothesis(&mut self, tp: TpId, predicted: &Symbol, h: HypId, rec: &mut Recorder) {
        let node = rec.create(NodeKind::StoreEntry);
        self.tps[tp.0]
            .store
            .entry(predicted.clone())
            .or_default()
            .push(StoreEntry { hyp: h, node });
    }

    /// Snapshot of the hypotheses parked at `tp` predicting `action_type`.
    pub fn hypotheses_for(&self, tp: TpId, action_type: &str, rec: &mut Recorder) -> Vec<HypId> {
        let point = &self.tps[tp.0];
        rec.access(point.node, NodeKind::Timepoint);
        match point.store.get(action_type) {
            Some(entries) => entries
                .iter()
                .map(|e| {
                    rec.access(e.node, NodeKind::StoreEntry);
                    e.hyp
                })
                .collect(),
            None => Vec::new(),
        }
    }

    /// Shortest known path length from `tp` back to the initial timepoint.
    pub fn distance(&self, tp: TpId) -> Option<u32> {
        if tp.0 == 0 {
            Some(0)
        } else {
            self.tps[tp.0].parsimony.map(|p| p.distance)
        }
    }

    /// Installs `candidate` as `tp`'s parsimony pointer when it gives a
    /// strictly shorter path; ties keep the incumbent.
    pub fn update_parsimony(
        &mut self,
        tp: TpId,
        candidate: InstId,
        rec: &mut Recorder,
    ) -> Result<bool, TimelineError> {
        let inst = &self.instances[candidate.0];
        debug_assert_eq!(inst.end, tp);
        let start = inst.start;
        rec.access(self.tps[start.0].node, NodeKind::Timepoint);
        let Some(d) = self.distance(start) else {
            return Err(TimelineError::MissingDistance(self.tps[start.0].index));
        };
        let proposed = d + 1;
        let point = &mut self.tps[tp.0];
        let replace = match point.parsimony {
            None => true,
            Some(p) => proposed < p.distance,
        };
        if replace {
            point.parsimony = Some(Parsimony {
                pointer: candidate,
                distance: proposed,
            });
            #[cfg(debug_assertions)]
            debug_assert_eq!(self.walk_length(tp), Some(proposed));
        }
        Ok(replace)
    }

    /// Path length found by following pointers back to the initial
    /// timepoint; cross-checks the stored distances in debug builds.
    pub fn walk_length(&self, tp: TpId) -> Option<u32> {
        let mut at = tp;
        let mut steps = 0;
        while at.0 != 0 {
            let p = self.tps[at.0].parsimony?;
            at = self.instances[p.pointer.0].start;
            steps += 1;
        }
        Some(steps)
    }

    /// Records an inferred intention ending at `end`; false if an identical
    /// (type, args, start) was already processed there.
    pub fn register_intention(&mut self, end: TpId, key: IntentKey) -> bool {
        self.tps[end.0].processed.insert(key)
    }

    /// Follows parsimony pointers from `final_tp` back to the initial timepoint.
    pub fn trace(&self, final_tp: TpId, rec: &mut Recorder) -> Result<Explanation, TimelineError> {
        let mut intents = Vec::new();
        let mut at = final_tp;
        while at.0 != 0 {
            let point = &self.tps[at.0];
            rec.access(point.node, NodeKind::Timepoint);
            let p = point
                .parsimony
                .ok_or(TimelineError::BrokenChain(point.index))?;
            let inst = &self.instances[p.pointer.0];
            rec.access(inst.node, inst_kind(inst.kind));
            intents.push(Intent {
                action_type: inst.action_type.clone(),
                args: inst.args.clone(),
                start: self.tps[inst.start.0].index,
                end: point.index,
            });
            at = inst.start;
        }
        rec.access(self.tps[0].node, NodeKind::Timepoint);
        intents.reverse();
        Ok(Explanation {
            intents,
            covered_actions: self.tps[final_tp.0].index,
        })
    }
}

pub fn inst_kind(kind: InstanceKind) -> NodeKind {
    match kind {
        InstanceKind::Primitive => NodeKind::Action,
        InstanceKind::Inferred => NodeKind::Intention,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec() -> Recorder {
        Recorder::disabled()
    }

    fn push(
        tl: &mut Timeline,
        r: &mut Recorder,
        ty: &str,
        start: usize,
        end: usize,
        kind: InstanceKind,
    ) -> InstId {
        let node = r.create(inst_kind(kind));
        tl.add_instance(ActionInstance {
            action_type: Symbol::new(ty),
            args: vec![],
            start: TpId(start),
            end: TpId(end),
            kind,
            provenance: None,
            node,
        })
    }

    #[test]
    fn append_chains_timepoints() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        let t1 = tl.append_timepoint(tl.initial(), ChangeRecord::default(), &mut r);
        assert_eq!(tl.tp(t1).prev, Some(TpId(0)));
        assert_eq!(tl.tp(t1).index, 1);
        for _ in 0..13 {
            tl.append_timepoint(tl.current(), ChangeRecord::default(), &mut r);
        }
        assert_eq!(tl.tp(tl.current()).index, 14);
    }

    #[test]
    fn store_preserves_insertion_order() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        let t1 = tl.append_timepoint(tl.initial(), ChangeRecord::default(), &mut r);
        tl.add_hypothesis(t1, &Symbol::new("B1"), HypId(0), &mut r);
        tl.add_hypothesis(t1, &Symbol::new("B2"), HypId(1), &mut r);
        tl.add_hypothesis(t1, &Symbol::new("B1"), HypId(2), &mut r);
        assert_eq!(
            tl.hypotheses_for(t1, "B1", &mut r),
            vec![HypId(0), HypId(2)]
        );
        assert_eq!(tl.hypotheses_for(t1, "B2", &mut r), vec![HypId(1)]);
        assert!(tl.hypotheses_for(t1, "C", &mut r).is_empty());
    }

    #[test]
    fn xyz_parsimony_prefers_z() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        for _ in 0..3 {
            tl.append_timepoint(tl.current(), ChangeRecord::default(), &mut r);
        }
        let a = push(&mut tl, &mut r, "A", 0, 1, InstanceKind::Primitive);
        assert!(tl.update_parsimony(TpId(1), a, &mut r).unwrap());
        assert_eq!(tl.distance(TpId(1)), Some(1));
        let b = push(&mut tl, &mut r, "B", 1, 2, InstanceKind::Primitive);
        tl.update_parsimony(TpId(2), b, &mut r).unwrap();
        assert_eq!(tl.distance(TpId(2)), Some(2));
        let x = push(&mut tl, &mut r, "X", 0, 2, InstanceKind::Inferred);
        assert!(tl.update_parsimony(TpId(2), x, &mut r).unwrap());
        assert_eq!(tl.distance(TpId(2)), Some(1));
        let c = push(&mut tl, &mut r, "C", 2, 3, InstanceKind::Primitive);
        tl.update_parsimony(TpId(3), c, &mut r).unwrap();
        let y = push(&mut tl, &mut r, "Y", 2, 3, InstanceKind::Inferred);
        assert!(!tl.update_parsimony(TpId(3), y, &mut r).unwrap());
        assert_eq!(tl.distance(TpId(3)), Some(2));
        let z = push(&mut tl, &mut r, "Z", 0, 3, InstanceKind::Inferred);
        assert!(tl.update_parsimony(TpId(3), z, &mut r).unwrap());
        assert_eq!(tl.distance(TpId(3)), Some(1));

        let ex = tl.trace(TpId(3), &mut r).unwrap();
        assert_eq!(ex.intents, vec![Intent::new("Z", &[], 0, 3)]);
        assert!(ex.is_gapless());
        assert_eq!(ex.to_sexp(), "(explanation (intent Z (span 0 3)))");
    }

    #[test]
    fn equal_distance_keeps_incumbent() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        tl.append_timepoint(tl.current(), ChangeRecord::default(), &mut r);
        let first = push(&mut tl, &mut r, "P", 0, 1, InstanceKind::Inferred);
        let second = push(&mut tl, &mut r, "Q", 0, 1, InstanceKind::Inferred);
        assert!(tl.update_parsimony(TpId(1), first, &mut r).unwrap());
        assert!(!tl.update_parsimony(TpId(1), second, &mut r).unwrap());
        assert_eq!(tl.tp(TpId(1)).parsimony.unwrap().pointer, first);
    }

    #[test]
    fn missing_start_distance_is_error() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        tl.append_timepoint(tl.current(), ChangeRecord::default(), &mut r);
        tl.append_timepoint(tl.current(), ChangeRecord::default(), &mut r);
        let orphan = push(&mut tl, &mut r, "B", 1, 2, InstanceKind::Primitive);
        assert_eq!(
            tl.update_parsimony(TpId(2), orphan, &mut r),
            Err(TimelineError::MissingDistance(1))
        );
    }

    #[test]
    fn trace_of_initial_is_empty() {
        let mut r = rec();
        let tl = Timeline::new(&mut r);
        let ex = tl.trace(tl.initial(), &mut r).unwrap();
        assert!(ex.intents.is_empty());
        assert_eq!(ex.to_sexp(), "(explanation)");
    }

    #[test]
    fn trace_detects_broken_chain() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        tl.append_timepoint(tl.current(), ChangeRecord::default(), &mut r);
        assert_eq!(
            tl.trace(TpId(1), &mut r),
            Err(TimelineError::BrokenChain(1))
        );
    }

    #[test]
    fn dedup_registration() {
        let mut r = rec();
        let mut tl = Timeline::new(&mut r);
        let t1 = tl.append_timepoint(tl.initial(), ChangeRecord::default(), &mut r);
        let key = (Symbol::new("X"), vec![Symbol::new("a")], 0);
        assert!(tl.register_intention(t1, key.clone()));
        assert!(!tl.register_intention(t1, key));
    }
}

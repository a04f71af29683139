//! Environment state as an initial snapshot plus per-timepoint change records.
//!
//! Each change record holds one delta per touched object. Deltas of the same
//! object are linked newest-to-oldest, so a point-in-time lookup walks only
//! that object's history instead of the whole timeline.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::metrics::{NodeId, NodeKind, Recorder};
use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvObject {
    pub id: Symbol,
    pub properties: BTreeMap<Symbol, Symbol>,
}

impl EnvObject {
    pub fn new(id: &str, props: &[(&str, &str)]) -> Self {
        EnvObject {
            id: Symbol::new(id),
            properties: props
                .iter()
                .map(|(k, v)| (Symbol::new(k), Symbol::new(v)))
                .collect(),
        }
    }
}

/// One `(object property new-value)` triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Change {
    pub object: Symbol,
    pub prop: Symbol,
    pub value: Symbol,
}

impl Change {
    pub fn new(object: &str, prop: &str, value: &str) -> Self {
        Change {
            object: Symbol::new(object),
            prop: Symbol::new(prop),
            value: Symbol::new(value),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("duplicate object id `{0}`")]
    DuplicateObject(Symbol),
    #[error("unknown object `{0}`")]
    UnknownObject(Symbol),
    #[error("object `{object}` has no property `{prop}` at time {time}")]
    UnknownProperty {
        object: Symbol,
        prop: Symbol,
        time: usize,
    },
    #[error("time index {got} is not after the last applied index {last}")]
    NonMonotonicTime { last: usize, got: usize },
    #[error("property `{prop}` of `{object}` changed twice in one step")]
    DuplicateChange { object: Symbol, prop: Symbol },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaId(pub usize);

#[derive(Debug, Clone)]
pub struct ChangedValue {
    pub value: Symbol,
    pub node: NodeId,
}

#[derive(Debug, Clone)]
pub struct ObjectDelta {
    pub object: Symbol,
    pub time: usize,
    pub changed: BTreeMap<Symbol, ChangedValue>,
    /// This object's previous delta, strictly earlier in time.
    pub prev_same_object: Option<DeltaId>,
    /// Node for the link to `prev_same_object`, when there is one.
    pub link_node: Option<NodeId>,
}

#[derive(Debug, Clone, Default)]
pub struct ChangeRecord {
    pub time: usize,
    pub entries: BTreeMap<Symbol, DeltaId>,
}

impl ChangeRecord {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct WorldState {
    initial: BTreeMap<Symbol, EnvObject>,
    deltas: Vec<ObjectDelta>,
    heads: HashMap<Symbol, DeltaId>,
    last_time: usize,
}

impl WorldState {
    pub fn init_env(objects: impl IntoIterator<Item = EnvObject>) -> Result<Self, WorldError> {
        let mut initial = BTreeMap::new();
        for obj in objects {
            if initial.contains_key(&obj.id) {
                return Err(WorldError::DuplicateObject(obj.id));
            }
            initial.insert(obj.id.clone(), obj);
        }
        Ok(WorldState {
            initial,
            ..Default::default()
        })
    }

    pub fn initial(&self) -> &BTreeMap<Symbol, EnvObject> {
        &self.initial
    }

    pub fn contains(&self, object: &str) -> bool {
        self.initial.contains_key(object)
    }

    pub fn delta(&self, id: DeltaId) -> &ObjectDelta {
        &self.deltas[id.0]
    }

    pub fn delta_count(&self) -> usize {
        self.deltas.len()
    }

    /// Newest delta for `object`, if it has changed at all.
    pub fn head(&self, object: &str) -> Option<DeltaId> {
        self.heads.get(object).copied()
    }

    /// Checks a change list without applying it.
    pub fn check_changes(&self, changes: &[Change]) -> Result<(), WorldError> {
        let mut seen = HashSet::new();
        for c in changes {
            if !self.initial.contains_key(&c.object) {
                return Err(WorldError::UnknownObject(c.object.clone()));
            }
            if !seen.insert((&c.object, &c.prop)) {
                return Err(WorldError::DuplicateChange {
                    object: c.object.clone(),
                    prop: c.prop.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn apply_changes(
        &mut self,
        time: usize,
        changes: &[Change],
    ) -> Result<ChangeRecord, WorldError> {
        self.apply_changes_recorded(time, changes, &mut Recorder::disabled())
    }

    /// Attaches `changes` at `time`, linking each touched object's delta to
    /// its previous one. Nothing is modified on error.
    pub fn apply_changes_recorded(
        &mut self,
        time: usize,
        changes: &[Change],
        rec: &mut Recorder,
    ) -> Result<ChangeRecord, WorldError> {
        if time <= self.last_time {
            return Err(WorldError::NonMonotonicTime {
                last: self.last_time,
                got: time,
            });
        }
        self.check_changes(changes)?;
        self.last_time = time;

        let mut grouped: BTreeMap<&Symbol, Vec<&Change>> = BTreeMap::new();
        for c in changes {
            grouped.entry(&c.object).or_default().push(c);
        }
        let mut record = ChangeRecord {
            time,
            entries: BTreeMap::new(),
        };
        for (object, cs) in grouped {
            let changed = cs
                .into_iter()
                .map(|c| {
                    let node = rec.create(NodeKind::ChangeEntry);
                    (
                        c.prop.clone(),
                        ChangedValue {
                            value: c.value.clone(),
                            node,
                        },
                    )
                })
                .collect();
            let prev = self.heads.get(object).copied();
            let link_node = prev.map(|_| rec.create(NodeKind::ChainLink));
            let id = DeltaId(self.deltas.len());
            self.deltas.push(ObjectDelta {
                object: object.clone(),
                time,
                changed,
                prev_same_object: prev,
                link_node,
            });
            self.heads.insert(object.clone(), id);
            record.entries.insert(object.clone(), id);
        }
        Ok(record)
    }

    pub fn query(&self, object: &str, prop: &str, at: usize) -> Result<Symbol, WorldError> {
        self.query_recorded(object, prop, at, &mut Recorder::disabled())
    }

    /// Value of `prop` on `object` after the action ending at `at`: the newest
    /// change with time <= `at`, otherwise the initial value.
    pub fn query_recorded(
        &self,
        object: &str,
        prop: &str,
        at: usize,
        rec: &mut Recorder,
    ) -> Result<Symbol, WorldError> {
        let Some(init) = self.initial.get(object) else {
            return Err(WorldError::UnknownObject(Symbol::new(object)));
        };
        let mut cursor = self.heads.get(object).copied();
        while let Some(id) = cursor {
            let delta = &self.deltas[id.0];
            if delta.time <= at {
                if let Some(cv) = delta.changed.get(prop) {
                    rec.access(cv.node, NodeKind::ChangeEntry);
                    return Ok(cv.value.clone());
                }
            }
            if let Some(link) = delta.link_node {
                rec.access(link, NodeKind::ChainLink);
            }
            cursor = delta.prev_same_object;
        }
        init.properties
            .get(prop)
            .cloned()
            .ok_or_else(|| WorldError::UnknownProperty {
                object: init.id.clone(),
                prop: Symbol::new(prop),
                time: at,
            })
    }
}

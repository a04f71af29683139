//! Exhaustive reference for minimum-cardinality covers.
//!
//! Builds a chart of every intention derivable over every span of the
//! demonstration, shortest spans first (CKY order), then reads covers off the
//! chart. Shares no inference code with the online engine: unification,
//! constraint checking and environment replay are all done here, against full
//! per-timepoint snapshots.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::kb::{Anchor, ConstraintAtom, KnowledgeBase, Schema, Term};
use crate::symbol::Symbol;
use crate::timeline::{Explanation, Intent};
use crate::transcript::{Step, Transcript, TranscriptError};
use crate::worldstate::EnvObject;

pub const DEFAULT_MAX_LEN: usize = 20;
pub const DEFAULT_COVER_LIMIT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("demonstration has {len} actions; the oracle bound is {max}")]
    TooLong { len: usize, max: usize },
    #[error(transparent)]
    Input(#[from] TranscriptError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cover {
    pub intents: Vec<Intent>,
}

impl Cover {
    pub fn cardinality(&self) -> usize {
        self.intents.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSet {
    pub covers: Vec<Cover>,
    /// True when enumeration stopped at the limit.
    pub truncated: bool,
}

type Snapshot = HashMap<(Symbol, Symbol), Symbol>;
type Env = HashMap<Symbol, Symbol>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Item {
    ty: Symbol,
    args: Vec<Symbol>,
    end: usize,
}

/// Every derivable (type, args) over every span `[start, end)`.
#[derive(Debug, Clone)]
pub struct Chart {
    n: usize,
    by_start: Vec<BTreeSet<Item>>,
}

impl Chart {
    pub fn build(
        kb: &KnowledgeBase,
        init: &[EnvObject],
        steps: &[Step],
        max_len: usize,
    ) -> Result<Chart, OracleError> {
        let n = steps.len();
        if n > max_len {
            return Err(OracleError::TooLong {
                len: n,
                max: max_len,
            });
        }
        Transcript {
            init: init.to_vec(),
            steps: steps.to_vec(),
        }
        .check(kb)?;

        let snaps = replay(init, steps);
        let mut chart = Chart {
            n,
            by_start: vec![BTreeSet::new(); n + 1],
        };
        for (s, step) in steps.iter().enumerate() {
            chart.by_start[s].insert(Item {
                ty: step.action.name.clone(),
                args: step.action.args.clone(),
                end: s + 1,
            });
        }
        for len in 1..=n {
            for s in 0..=n - len {
                let e = s + len;
                // Unit schemas can build on items of this same span; repeat
                // until nothing new appears.
                loop {
                    let mut fresh = Vec::new();
                    for schema in kb.schemas() {
                        for args in chart.derive(schema, s, e, &snaps) {
                            let item = Item {
                                ty: schema.cause_type.clone(),
                                args,
                                end: e,
                            };
                            if !chart.by_start[s].contains(&item) {
                                fresh.push(item);
                            }
                        }
                    }
                    if fresh.is_empty() {
                        break;
                    }
                    chart.by_start[s].extend(fresh);
                }
            }
        }
        Ok(chart)
    }

    pub fn contains(&self, intent: &Intent) -> bool {
        intent.start <= self.n
            && self.by_start[intent.start].contains(&Item {
                ty: intent.action_type.clone(),
                args: intent.args.clone(),
                end: intent.end,
            })
    }

    /// All derivable intents, ordered by start then item order.
    pub fn intents(&self) -> Vec<Intent> {
        self.by_start
            .iter()
            .enumerate()
            .flat_map(|(s, items)| {
                items.iter().map(move |i| Intent {
                    action_type: i.ty.clone(),
                    args: i.args.clone(),
                    start: s,
                    end: i.end,
                })
            })
            .collect()
    }

    /// Cause arguments for every way `schema` derives exactly `[s, e)`.
    fn derive(
        &self,
        schema: &Schema,
        s: usize,
        e: usize,
        snaps: &[Snapshot],
    ) -> BTreeSet<Vec<Symbol>> {
        let mut out = BTreeSet::new();
        self.extend_match(schema, 0, s, s, e, &mut Env::new(), snaps, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_match(
        &self,
        schema: &Schema,
        j: usize,
        pos: usize,
        s: usize,
        e: usize,
        env: &mut Env,
        snaps: &[Snapshot],
        out: &mut BTreeSet<Vec<Symbol>>,
    ) {
        let last = j + 1 == schema.effects.len();
        let template = &schema.effects[j];
        for item in &self.by_start[pos] {
            if item.ty != template.effect_type || item.end > e || (last != (item.end == e)) {
                continue;
            }
            let mut local = env.clone();
            if !match_args(&template.args, &item.args, &mut local) {
                continue;
            }
            if last {
                if constraints_hold(schema, &mut local, s, e, snaps) {
                    if let Some(args) = schema
                        .cause_params
                        .iter()
                        .map(|p| local.get(p).cloned())
                        .collect()
                    {
                        out.insert(args);
                    }
                }
            } else {
                self.extend_match(schema, j + 1, item.end, s, e, &mut local, snaps, out);
            }
        }
    }

    /// Every cover, up to `limit`.
    pub fn covers(&self, limit: usize) -> CoverSet {
        let mut set = CoverSet {
            covers: Vec::new(),
            truncated: false,
        };
        let mut path = Vec::new();
        self.walk(0, &mut path, limit, &mut set);
        set
    }

    fn walk(&self, pos: usize, path: &mut Vec<Intent>, limit: usize, set: &mut CoverSet) {
        if set.truncated {
            return;
        }
        if pos == self.n {
            if set.covers.len() >= limit {
                set.truncated = true;
            } else {
                set.covers.push(Cover {
                    intents: path.clone(),
                });
            }
            return;
        }
        for item in &self.by_start[pos] {
            path.push(Intent {
                action_type: item.ty.clone(),
                args: item.args.clone(),
                start: pos,
                end: item.end,
            });
            self.walk(item.end, path, limit, set);
            path.pop();
        }
    }

    /// Fewest chart items tiling `[0, n)`, by shortest path over positions.
    pub fn min_cardinality(&self) -> Option<usize> {
        let mut best: Vec<Option<usize>> = vec![None; self.n + 1];
        best[0] = Some(0);
        for pos in 0..self.n {
            let Some(d) = best[pos] else { continue };
            for item in &self.by_start[pos] {
                let slot = &mut best[item.end];
                if slot.is_none_or(|cur| d + 1 < cur) {
                    *slot = Some(d + 1);
                }
            }
        }
        best[self.n]
    }
}

fn replay(init: &[EnvObject], steps: &[Step]) -> Vec<Snapshot> {
    let mut state = Snapshot::new();
    for o in init {
        for (k, v) in &o.properties {
            state.insert((o.id.clone(), k.clone()), v.clone());
        }
    }
    let mut snaps = vec![state.clone()];
    for step in steps {
        for c in &step.changes {
            state.insert((c.object.clone(), c.prop.clone()), c.value.clone());
        }
        snaps.push(state.clone());
    }
    snaps
}

fn match_args(terms: &[Term], values: &[Symbol], env: &mut Env) -> bool {
    terms.len() == values.len()
        && terms.iter().zip(values).all(|(t, v)| match t {
            Term::Lit(l) => l == v,
            Term::Var(x) => match env.get(x) {
                Some(b) => b == v,
                None => {
                    env.insert(x.clone(), v.clone());
                    true
                }
            },
        })
}

fn value_of(t: &Term, env: &Env) -> Option<Symbol> {
    match t {
        Term::Lit(l) => Some(l.clone()),
        Term::Var(x) => env.get(x).cloned(),
    }
}

/// All constraints must hold once every derivable binding is in place.
fn constraints_hold(
    schema: &Schema,
    env: &mut Env,
    s: usize,
    e: usize,
    snaps: &[Snapshot],
) -> bool {
    let mut todo: Vec<&ConstraintAtom> = schema.constraints.iter().collect();
    while !todo.is_empty() {
        let before = todo.len();
        let mut failed = false;
        todo.retain(|atom| {
            if failed {
                return true;
            }
            let decided = match atom {
                ConstraintAtom::Eq(a, b) => {
                    value_of(a, env).zip(value_of(b, env)).map(|(x, y)| x == y)
                }
                ConstraintAtom::Neq(a, b) => {
                    value_of(a, env).zip(value_of(b, env)).map(|(x, y)| x != y)
                }
                ConstraintAtom::PropAt {
                    anchor,
                    object,
                    prop,
                    value,
                } => value_of(object, env).map(|obj| {
                    let t = if *anchor == Anchor::Start { s } else { e };
                    match snaps[t].get(&(obj, prop.clone())) {
                        None => false,
                        Some(actual) => match value_of(value, env) {
                            Some(v) => v == *actual,
                            None => {
                                env.insert(value.symbol().clone(), actual.clone());
                                true
                            }
                        },
                    }
                }),
            };
            match decided {
                Some(true) => false,
                Some(false) => {
                    failed = true;
                    true
                }
                None => true,
            }
        });
        if failed || todo.len() == before {
            return false;
        }
    }
    true
}

pub fn enumerate_covers(
    kb: &KnowledgeBase,
    steps: &[Step],
    init: &[EnvObject],
    limit: usize,
) -> Result<CoverSet, OracleError> {
    Ok(Chart::build(kb, init, steps, DEFAULT_MAX_LEN)?.covers(limit))
}

pub fn min_cover_cardinality(
    kb: &KnowledgeBase,
    steps: &[Step],
    init: &[EnvObject],
) -> Result<Option<usize>, OracleError> {
    Ok(Chart::build(kb, init, steps, DEFAULT_MAX_LEN)?.min_cardinality())
}

/// Whether `explanation` tiles the demonstration and every intent is
/// derivable over its span.
pub fn validate_cover(
    kb: &KnowledgeBase,
    steps: &[Step],
    init: &[EnvObject],
    explanation: &Explanation,
) -> bool {
    validate_cover_bounded(kb, steps, init, explanation, DEFAULT_MAX_LEN)
}

pub fn validate_cover_bounded(
    kb: &KnowledgeBase,
    steps: &[Step],
    init: &[EnvObject],
    explanation: &Explanation,
    max_len: usize,
) -> bool {
    if explanation.covered_actions != steps.len() || !explanation.is_gapless() {
        return false;
    }
    match Chart::build(kb, init, steps, max_len) {
        Ok(chart) => explanation.intents.iter().all(|i| chart.contains(i)),
        Err(_) => false,
    }
}

//! Memory-event instrumentation: creation/access events, lifespans and
//! living-memory curves.
//!
//! Only per-demonstration structures are recorded (timepoints, instances,
//! hypotheses, bindings, change entries, store entries, chain links). The
//! knowledge base and program state never produce events.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Timepoint,
    Action,
    Intention,
    Hypothesis,
    Binding,
    ChangeEntry,
    StoreEntry,
    ChainLink,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Timepoint => "timepoint",
            NodeKind::Action => "action",
            NodeKind::Intention => "intention",
            NodeKind::Hypothesis => "hypothesis",
            NodeKind::Binding => "binding",
            NodeKind::ChangeEntry => "change-entry",
            NodeKind::StoreEntry => "store-entry",
            NodeKind::ChainLink => "chain-link",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Create,
    Access,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryEvent {
    pub tick: u64,
    pub kind: EventKind,
    pub node: NodeId,
    pub node_kind: NodeKind,
}

/// Per-session event sink. Node ids are handed out whether or not recording
/// is enabled; when disabled, `create`/`access` store nothing.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    enabled: bool,
    next_node: u64,
    events: Vec<MemoryEvent>,
}

impl Recorder {
    pub fn new(enabled: bool) -> Self {
        Recorder {
            enabled,
            ..Default::default()
        }
    }

    pub fn disabled() -> Self {
        Recorder::new(false)
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    #[inline]
    pub fn create(&mut self, node_kind: NodeKind) -> NodeId {
        let node = NodeId(self.next_node);
        self.next_node += 1;
        self.push(EventKind::Create, node, node_kind);
        node
    }

    #[inline]
    pub fn access(&mut self, node: NodeId, node_kind: NodeKind) {
        self.push(EventKind::Access, node, node_kind);
    }

    #[inline]
    fn push(&mut self, kind: EventKind, node: NodeId, node_kind: NodeKind) {
        if self.enabled {
            let tick = self.events.len() as u64;
            self.events.push(MemoryEvent {
                tick,
                kind,
                node,
                node_kind,
            });
        }
    }

    /// Appends an externally constructed event. Ticks must keep increasing.
    pub fn record(&mut self, event: MemoryEvent) {
        debug_assert!(self.events.last().is_none_or(|e| e.tick < event.tick));
        self.events.push(event);
    }

    pub fn events(&self) -> &[MemoryEvent] {
        &self.events
    }

    pub fn count_created(&self, kind: NodeKind) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Create && e.node_kind == kind)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifespanRecord {
    pub node: NodeId,
    pub kind: NodeKind,
    pub birth: u64,
    /// Tick of the last access, or `birth` if never accessed.
    pub death: u64,
}

/// One lifespan per node, ordered by node id.
pub fn lifespans(events: &[MemoryEvent]) -> Vec<LifespanRecord> {
    let mut by_node: std::collections::BTreeMap<NodeId, LifespanRecord> = Default::default();
    for e in events {
        match e.kind {
            EventKind::Create => {
                by_node.insert(
                    e.node,
                    LifespanRecord {
                        node: e.node,
                        kind: e.node_kind,
                        birth: e.tick,
                        death: e.tick,
                    },
                );
            }
            EventKind::Access => {
                if let Some(r) = by_node.get_mut(&e.node) {
                    r.death = r.death.max(e.tick);
                }
            }
        }
    }
    by_node.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurvePoint {
    pub tick: u64,
    pub living: u64,
    pub total: u64,
}

/// Living/total counts for every tick from 0 through one past the last event,
/// so the final point always has zero living nodes.
pub fn living_curve(events: &[MemoryEvent]) -> Vec<CurvePoint> {
    let horizon = events.last().map_or(0, |e| e.tick + 1);
    living_curve_to(events, horizon)
}

/// Like [`living_curve`] with an explicit last tick. A node is living on
/// `[birth, death]`.
pub fn living_curve_to(events: &[MemoryEvent], horizon: u64) -> Vec<CurvePoint> {
    if events.is_empty() {
        return Vec::new();
    }
    let len = horizon as usize + 2;
    let mut births = vec![0i64; len];
    let mut deaths = vec![0i64; len];
    for r in lifespans(events) {
        births[r.birth as usize] += 1;
        deaths[r.death as usize + 1] += 1;
    }
    let mut living = 0i64;
    let mut total = 0i64;
    (0..=horizon as usize)
        .map(|t| {
            living += births[t] - deaths[t];
            total += births[t];
            CurvePoint {
                tick: t as u64,
                living: living as u64,
                total: total as u64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub total_created: u64,
    pub peak_living: u64,
}

impl RunSummary {
    pub fn peak_ratio(&self) -> f64 {
        if self.total_created == 0 {
            0.0
        } else {
            self.peak_living as f64 / self.total_created as f64
        }
    }
}

pub fn summarize(curve: &[CurvePoint]) -> RunSummary {
    RunSummary {
        total_created: curve.last().map_or(0, |p| p.total),
        peak_living: curve.iter().map(|p| p.living).max().unwrap_or(0),
    }
}

pub fn write_curve_csv<W: Write>(mut w: W, curve: &[CurvePoint]) -> io::Result<()> {
    writeln!(w, "tick,living,total")?;
    for p in curve {
        writeln!(w, "{},{},{}", p.tick, p.living, p.total)?;
    }
    Ok(())
}

pub fn write_lifespans_csv<W: Write>(mut w: W, spans: &[LifespanRecord]) -> io::Result<()> {
    writeln!(w, "nodeId,kind,birth,death")?;
    for r in spans {
        writeln!(w, "{},{},{},{}", r.node.0, r.kind, r.birth, r.death)?;
    }
    Ok(())
}

pub fn export_curve_csv(curve: &[CurvePoint], path: &Path) -> io::Result<()> {
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, curve)?;
    fs::write(path, buf)
}

pub fn export_lifespans_csv(spans: &[LifespanRecord], path: &Path) -> io::Result<()> {
    let mut buf = Vec::new();
    write_lifespans_csv(&mut buf, spans)?;
    fs::write(path, buf)
}

/// Ordinary least squares of `y` on `x`; returns (slope, intercept, r²).
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r2)
}

//! Demonstration transcripts, ground-truth sidecars and explanation files.
//!
//! ```text
//! (init (object ID (PROP VALUE)*)*)
//! (step (action NAME ARG*) (changes (OBJ (PROP VALUE)*)*))*
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::kb::{Kind, KnowledgeBase};
use crate::sexpr::{self, Pos, Sexp, SyntaxError};
use crate::symbol::Symbol;
use crate::timeline::{Explanation, Intent};
use crate::worldstate::{Change, EnvObject};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub name: Symbol,
    pub args: Vec<Symbol>,
}

impl Action {
    pub fn new(name: &str, args: &[&str]) -> Self {
        Action {
            name: Symbol::new(name),
            args: args.iter().map(|a| Symbol::new(a)).collect(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub action: Action,
    pub changes: Vec<Change>,
}

impl Step {
    pub fn bare(name: &str, args: &[&str]) -> Self {
        Step {
            action: Action::new(name, args),
            changes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub init: Vec<EnvObject>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("step {step}: action type `{name}` is not declared")]
    UndeclaredAction { step: usize, name: Symbol },
    #[error("step {step}: `{name}` is not a primitive action")]
    NotPrimitive { step: usize, name: Symbol },
    #[error("step {step}: `{name}` takes {expected} arguments, got {found}")]
    ArityMismatch {
        step: usize,
        name: Symbol,
        expected: usize,
        found: usize,
    },
    #[error("step {step}: change to unknown object `{object}`")]
    UnknownObject { step: usize, object: Symbol },
    #[error("step {step}: property `{prop}` of `{object}` changed twice")]
    DuplicateChange {
        step: usize,
        object: Symbol,
        prop: Symbol,
    },
    #[error("duplicate object id `{0}` in init")]
    DuplicateObject(Symbol),
}

fn prop_pairs(items: &[Sexp]) -> Result<Vec<(Symbol, Symbol)>, SyntaxError> {
    items
        .iter()
        .map(|p| {
            let pair = p.expect_list("(PROP VALUE)")?;
            if pair.len() != 2 {
                return Err(SyntaxError::new(p.pos(), "expected (PROP VALUE)"));
            }
            Ok((
                pair[0].expect_atom("property")?.clone(),
                pair[1].expect_atom("value")?.clone(),
            ))
        })
        .collect()
}

pub(crate) fn parse_init(body: &[Sexp]) -> Result<Vec<EnvObject>, SyntaxError> {
    body.iter()
        .map(|o| {
            let items = o.expect_form("object")?;
            let Some(id) = items.first() else {
                return Err(SyntaxError::new(
                    o.pos(),
                    "expected (object ID (PROP VALUE)*)",
                ));
            };
            Ok(EnvObject {
                id: id.expect_atom("object id")?.clone(),
                properties: prop_pairs(&items[1..])?.into_iter().collect(),
            })
        })
        .collect()
}

pub(crate) fn render_init(out: &mut String, init: &[EnvObject]) {
    out.push_str("(init");
    for o in init {
        let _ = write!(out, "\n  (object {}", o.id);
        for (k, v) in &o.properties {
            let _ = write!(out, " ({k} {v})");
        }
        out.push(')');
    }
    out.push_str(")\n");
}

fn parse_step(form: &Sexp) -> Result<Step, SyntaxError> {
    let body = form.expect_form("step")?;
    if body.len() != 2 {
        return Err(SyntaxError::new(
            form.pos(),
            "expected (step (action ...) (changes ...))",
        ));
    }
    let action = body[0].expect_form("action")?;
    let Some(name) = action.first() else {
        return Err(SyntaxError::new(
            body[0].pos(),
            "expected (action NAME ARG*)",
        ));
    };
    let action = Action {
        name: name.expect_atom("action name")?.clone(),
        args: action[1..]
            .iter()
            .map(|a| a.expect_atom("argument").cloned())
            .collect::<Result<_, _>>()?,
    };
    let mut changes = Vec::new();
    for entry in body[1].expect_form("changes")? {
        let items = entry.expect_list("(OBJ (PROP VALUE)*)")?;
        let Some(obj) = items.first() else {
            return Err(SyntaxError::new(
                entry.pos(),
                "expected (OBJ (PROP VALUE)*)",
            ));
        };
        let object = obj.expect_atom("object id")?.clone();
        for (prop, value) in prop_pairs(&items[1..])? {
            changes.push(Change {
                object: object.clone(),
                prop,
                value,
            });
        }
    }
    Ok(Step { action, changes })
}

impl Transcript {
    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let forms = sexpr::parse_all(text)?;
        let mut transcript = Transcript::default();
        let mut seen_init = false;
        for form in &forms {
            match form.head() {
                Some("init") if !seen_init && transcript.steps.is_empty() => {
                    seen_init = true;
                    transcript.init = parse_init(form.expect_form("init")?)?;
                }
                Some("step") => transcript.steps.push(parse_step(form)?),
                _ => {
                    return Err(SyntaxError::new(
                        form.pos(),
                        "expected one leading (init ...) followed by (step ...) forms",
                    )
                    .into())
                }
            }
        }
        let mut ids = HashSet::new();
        for o in &transcript.init {
            if !ids.insert(&o.id) {
                return Err(TranscriptError::DuplicateObject(o.id.clone()));
            }
        }
        Ok(transcript)
    }

    /// Checks action types, arities and change targets against `kb`.
    pub fn check(&self, kb: &KnowledgeBase) -> Result<(), TranscriptError> {
        let objects: HashSet<&Symbol> = self.init.iter().map(|o| &o.id).collect();
        for (i, step) in self.steps.iter().enumerate() {
            let n = i + 1;
            check_action(kb, &step.action, n)?;
            let mut seen = HashSet::new();
            for c in &step.changes {
                if !objects.contains(&c.object) {
                    return Err(TranscriptError::UnknownObject {
                        step: n,
                        object: c.object.clone(),
                    });
                }
                if !seen.insert((&c.object, &c.prop)) {
                    return Err(TranscriptError::DuplicateChange {
                        step: n,
                        object: c.object.clone(),
                        prop: c.prop.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_sexp(&self) -> String {
        let mut out = String::new();
        render_init(&mut out, &self.init);
        for step in &self.steps {
            let _ = write!(out, "(step (action {}", step.action.name);
            for a in &step.action.args {
                let _ = write!(out, " {a}");
            }
            out.push_str(") (changes");
            let mut grouped: BTreeMap<&Symbol, Vec<&Change>> = BTreeMap::new();
            for c in &step.changes {
                grouped.entry(&c.object).or_default().push(c);
            }
            for (obj, cs) in grouped {
                let _ = write!(out, " ({obj}");
                for c in cs {
                    let _ = write!(out, " ({} {})", c.prop, c.value);
                }
                out.push(')');
            }
            out.push_str("))\n");
        }
        out
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }
}

pub(crate) fn check_action(
    kb: &KnowledgeBase,
    action: &Action,
    step: usize,
) -> Result<(), TranscriptError> {
    let Some(sig) = kb.signature(&action.name) else {
        return Err(TranscriptError::UndeclaredAction {
            step,
            name: action.name.clone(),
        });
    };
    if sig.kind != Kind::Primitive {
        return Err(TranscriptError::NotPrimitive {
            step,
            name: action.name.clone(),
        });
    }
    if sig.arity != action.args.len() {
        return Err(TranscriptError::ArityMismatch {
            step,
            name: action.name.clone(),
            expected: sig.arity,
            found: action.args.len(),
        });
    }
    Ok(())
}

/// Top-level intentions a generated demonstration was built from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth(pub Vec<Action>);

impl GroundTruth {
    /// `(ground-truth (intent NAME arg*)*)`
    pub fn to_sexp(&self) -> String {
        let mut out = String::from("(ground-truth");
        for a in &self.0 {
            let _ = write!(out, " (intent {}", a.name);
            for arg in &a.args {
                let _ = write!(out, " {arg}");
            }
            out.push(')');
        }
        out.push_str(")\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let forms = sexpr::parse_all(text)?;
        let [form] = forms.as_slice() else {
            return Err(SyntaxError::new(
                Pos::default(),
                "expected a single (ground-truth ...) form",
            ));
        };
        form.expect_form("ground-truth")?
            .iter()
            .map(|i| {
                let items = i.expect_form("intent")?;
                let Some(name) = items.first() else {
                    return Err(SyntaxError::new(i.pos(), "expected (intent NAME arg*)"));
                };
                Ok(Action {
                    name: name.expect_atom("intent name")?.clone(),
                    args: items[1..]
                        .iter()
                        .map(|a| a.expect_atom("argument").cloned())
                        .collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, _>>()
            .map(GroundTruth)
    }
}

/// Reads `(explanation (intent NAME arg* (span START END))*)`.
pub fn parse_explanation(text: &str) -> Result<Explanation, SyntaxError> {
    let forms = sexpr::parse_all(text)?;
    let [form] = forms.as_slice() else {
        return Err(SyntaxError::new(
            Pos::default(),
            "expected a single (explanation ...) form",
        ));
    };
    let mut intents = Vec::new();
    for i in form.expect_form("explanation")? {
        let items = i.expect_form("intent")?;
        let (Some(name), Some(span)) = (items.first(), items.last()) else {
            return Err(SyntaxError::new(
                i.pos(),
                "expected (intent NAME arg* (span START END))",
            ));
        };
        let span_items = span.expect_form("span")?;
        if items.len() < 2 || span_items.len() != 2 {
            return Err(SyntaxError::new(span.pos(), "expected (span START END)"));
        }
        intents.push(Intent {
            action_type: name.expect_atom("intent name")?.clone(),
            args: items[1..items.len() - 1]
                .iter()
                .map(|a| a.expect_atom("argument").cloned())
                .collect::<Result<_, _>>()?,
            start: sexpr::parse_count(&span_items[0], "span start")?,
            end: sexpr::parse_count(&span_items[1], "span end")?,
        });
    }
    let covered_actions = intents.last().map_or(0, |i| i.end);
    Ok(Explanation {
        intents,
        covered_actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_kb;

    const DEMO: &str = "
        (init (object red-block (type block) (location loc-a))
              (object left-gripper (type gripper)))
        (step (action grasp red-block left-gripper) (changes (red-block (location left-gripper))))
        (step (action move left-gripper loc-b) (changes))
        (step (action release left-gripper) (changes (red-block (location loc-b))))";

    #[test]
    fn parses_and_renders() {
        let t = Transcript::parse(DEMO).unwrap();
        assert_eq!(t.init.len(), 2);
        assert_eq!(t.steps.len(), 3);
        assert_eq!(
            t.steps[0].changes,
            vec![Change::new("red-block", "location", "left-gripper")]
        );
        assert!(t.steps[1].changes.is_empty());
        assert_eq!(Transcript::parse(&t.to_sexp()).unwrap(), t);
    }

    #[test]
    fn checks_against_kb() {
        let kb = parse_kb(
            "(primitive grasp 2) (primitive move 2) (primitive release 1) (abstract relocate 2)",
        )
        .unwrap();
        Transcript::parse(DEMO).unwrap().check(&kb).unwrap();

        let bad = Transcript::parse("(init) (step (action fly x) (changes))").unwrap();
        assert!(matches!(
            bad.check(&kb),
            Err(TranscriptError::UndeclaredAction { step: 1, .. })
        ));
        let bad = Transcript::parse("(init) (step (action relocate a b) (changes))").unwrap();
        assert!(matches!(
            bad.check(&kb),
            Err(TranscriptError::NotPrimitive { .. })
        ));
        let bad = Transcript::parse("(init) (step (action release) (changes))").unwrap();
        assert!(matches!(
            bad.check(&kb),
            Err(TranscriptError::ArityMismatch {
                expected: 1,
                found: 0,
                ..
            })
        ));
        let bad =
            Transcript::parse("(init) (step (action release g) (changes (ghost (p v))))").unwrap();
        assert!(matches!(
            bad.check(&kb),
            Err(TranscriptError::UnknownObject { .. })
        ));
        let bad = Transcript::parse(
            "(init (object o)) (step (action release g) (changes (o (p v) (p w))))",
        )
        .unwrap();
        assert!(matches!(
            bad.check(&kb),
            Err(TranscriptError::DuplicateChange { .. })
        ));
    }

    #[test]
    fn init_only_transcript() {
        let t = Transcript::parse("(init)").unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.to_sexp(), "(init)\n");
    }

    #[test]
    fn rejects_misplaced_init() {
        assert!(Transcript::parse("(step (action a) (changes)) (init)").is_err());
    }

    #[test]
    fn ground_truth_round_trip() {
        let gt = GroundTruth(vec![
            Action::new("relocate", &["o", "l"]),
            Action::new("noop", &[]),
        ]);
        let text = gt.to_sexp();
        assert_eq!(text, "(ground-truth (intent relocate o l) (intent noop))\n");
        assert_eq!(GroundTruth::parse(&text).unwrap(), gt);
    }

    #[test]
    fn explanation_round_trip() {
        let ex = Explanation {
            intents: vec![Intent::new("X", &["a"], 0, 2), Intent::new("C", &[], 2, 3)],
            covered_actions: 3,
        };
        assert_eq!(parse_explanation(&ex.to_sexp()).unwrap(), ex);
    }
}

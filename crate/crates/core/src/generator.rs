//! Random demonstrations with known top-level intentions.
//!
//! The generator owns a small world model, read from a world file:
//!
//! ```text
//! (init (object ID (PROP VALUE)*)*)
//! (arg-types (TYPE (OBJTYPE*) ...) ...)      ; domain per argument position, `*` = any
//! (rules (rule PRIM (PARAM*) STMT*) ...)
//! (top-level TYPE*)                          ; optional
//! ```
//!
//! Statements are `(set OBJ PROP VAL)`, `(flip OBJ PROP A B)` and
//! `(when (eq|neq X Y) STMT*)`. Expressions are a name (parameter or literal)
//! or `(get EXPR PROP)`, which yields `none` when the object or property is
//! missing. All reads see the state before the action.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kb::{Anchor, ConstraintAtom, Kind, KnowledgeBase, Schema, SchemaId, Term};
use crate::sexpr::{self, Sexp, SyntaxError};
use crate::symbol::Symbol;
use crate::transcript::{parse_init, Action, GroundTruth, Step, Transcript};
use crate::worldstate::{Change, EnvObject};

pub const DEFAULT_MAX_REJECTIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Name(Symbol),
    Get(Box<Expr>, Symbol),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Set(Expr, Symbol, Expr),
    Flip(Expr, Symbol, Symbol, Symbol),
    When {
        negate: bool,
        lhs: Expr,
        rhs: Expr,
        body: Vec<Stmt>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub params: Vec<Symbol>,
    pub body: Vec<Stmt>,
}

/// Object pool, argument domains and primitive effect rules.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldModel {
    pub init: Vec<EnvObject>,
    /// Allowed object `type` values per argument position; `None` means any object.
    pub arg_types: BTreeMap<Symbol, Vec<Option<BTreeSet<Symbol>>>>,
    pub rules: BTreeMap<Symbol, Rule>,
    /// Abstract types sampled at top level; empty means every abstract type with a schema.
    pub top_level: Vec<Symbol>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("world file: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("world file: {0}")]
    World(String),
    #[error("no abstract type with a schema to sample at top level")]
    NoTopLevel,
    #[error("gave up after {rejections} rejections expanding schema {schema} for `{cause}`")]
    Exhausted {
        schema: SchemaId,
        cause: Symbol,
        rejections: usize,
    },
    #[error("primitive `{action}`: {message}")]
    Rule { action: Symbol, message: String },
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub n_top_level: usize,
    pub max_rejections: usize,
    pub world: Arc<WorldModel>,
}

impl GenConfig {
    pub fn new(seed: u64, n_top_level: usize, world: Arc<WorldModel>) -> Self {
        GenConfig {
            seed,
            n_top_level,
            max_rejections: DEFAULT_MAX_REJECTIONS,
            world,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedDemo {
    pub init: Vec<EnvObject>,
    pub steps: Vec<Step>,
    pub ground_truth: Vec<Action>,
}

impl GeneratedDemo {
    pub fn transcript(&self) -> Transcript {
        Transcript {
            init: self.init.clone(),
            steps: self.steps.clone(),
        }
    }

    pub fn truth(&self) -> GroundTruth {
        GroundTruth(self.ground_truth.clone())
    }
}

fn parse_expr(s: &Sexp) -> Result<Expr, SyntaxError> {
    match s {
        Sexp::Atom(a, _) => Ok(Expr::Name(a.clone())),
        Sexp::List(..) => {
            let items = s.expect_form("get")?;
            if items.len() != 2 {
                return Err(SyntaxError::new(s.pos(), "expected (get EXPR PROP)"));
            }
            Ok(Expr::Get(
                Box::new(parse_expr(&items[0])?),
                items[1].expect_atom("property")?.clone(),
            ))
        }
    }
}

fn parse_stmt(s: &Sexp) -> Result<Stmt, SyntaxError> {
    let items = s.expect_list("statement")?;
    match s.head() {
        Some("set") if items.len() == 4 => Ok(Stmt::Set(
            parse_expr(&items[1])?,
            items[2].expect_atom("property")?.clone(),
            parse_expr(&items[3])?,
        )),
        Some("flip") if items.len() == 5 => Ok(Stmt::Flip(
            parse_expr(&items[1])?,
            items[2].expect_atom("property")?.clone(),
            items[3].expect_atom("value")?.clone(),
            items[4].expect_atom("value")?.clone(),
        )),
        Some("when") if items.len() >= 2 => {
            let cond = items[1].expect_list("condition")?;
            let negate = match items[1].head() {
                Some("eq") if cond.len() == 3 => false,
                Some("neq") if cond.len() == 3 => true,
                _ => {
                    return Err(SyntaxError::new(
                        items[1].pos(),
                        "expected (eq X Y) or (neq X Y)",
                    ))
                }
            };
            Ok(Stmt::When {
                negate,
                lhs: parse_expr(&cond[1])?,
                rhs: parse_expr(&cond[2])?,
                body: items[2..]
                    .iter()
                    .map(parse_stmt)
                    .collect::<Result<_, _>>()?,
            })
        }
        _ => Err(SyntaxError::new(
            s.pos(),
            "expected (set ...), (flip ...) or (when ...)",
        )),
    }
}

impl WorldModel {
    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut world = WorldModel::default();
        for form in sexpr::parse_all(text)? {
            match form.head() {
                Some("init") => world.init = parse_init(form.expect_form("init")?)?,
                Some("arg-types") => {
                    for entry in form.expect_form("arg-types")? {
                        let items = entry.expect_list("(TYPE (OBJTYPE*)*)")?;
                        let Some(name) = items.first() else {
                            return Err(SyntaxError::new(
                                entry.pos(),
                                "expected (TYPE (OBJTYPE*)*)",
                            )
                            .into());
                        };
                        let mut positions = Vec::new();
                        for p in &items[1..] {
                            positions.push(match p {
                                Sexp::Atom(a, _) if a.as_str() == "*" => None,
                                _ => Some(
                                    p.expect_list("object type list")?
                                        .iter()
                                        .map(|t| t.expect_atom("object type").cloned())
                                        .collect::<Result<_, _>>()?,
                                ),
                            });
                        }
                        world
                            .arg_types
                            .insert(name.expect_atom("type name")?.clone(), positions);
                    }
                }
                Some("rules") => {
                    for r in form.expect_form("rules")? {
                        let items = r.expect_form("rule")?;
                        if items.len() < 2 {
                            return Err(SyntaxError::new(
                                r.pos(),
                                "expected (rule PRIM (PARAM*) STMT*)",
                            )
                            .into());
                        }
                        let name = items[0].expect_atom("primitive name")?.clone();
                        let params = items[1]
                            .expect_list("parameter list")?
                            .iter()
                            .map(|p| p.expect_atom("parameter").cloned())
                            .collect::<Result<_, _>>()?;
                        let body = items[2..]
                            .iter()
                            .map(parse_stmt)
                            .collect::<Result<_, _>>()?;
                        if world
                            .rules
                            .insert(name.clone(), Rule { params, body })
                            .is_some()
                        {
                            return Err(GenError::World(format!("duplicate rule for `{name}`")));
                        }
                    }
                }
                Some("top-level") => {
                    world.top_level = form
                        .expect_form("top-level")?
                        .iter()
                        .map(|t| t.expect_atom("type name").cloned())
                        .collect::<Result<_, _>>()?;
                }
                _ => {
                    return Err(SyntaxError::new(
                        form.pos(),
                        "expected (init ...), (arg-types ...), (rules ...) or (top-level ...)",
                    )
                    .into())
                }
            }
        }
        Ok(world)
    }

    /// Checks the model against a knowledge base.
    pub fn check(&self, kb: &KnowledgeBase) -> Result<(), GenError> {
        for (name, rule) in &self.rules {
            match kb.signature(name) {
                Some(sig) if sig.kind == Kind::Primitive && sig.arity == rule.params.len() => {}
                _ => {
                    return Err(GenError::World(format!(
                        "rule `{name}` does not match a primitive of arity {}",
                        rule.params.len()
                    )))
                }
            }
        }
        for (name, positions) in &self.arg_types {
            match kb.signature(name) {
                Some(sig) if sig.arity == positions.len() => {}
                _ => {
                    return Err(GenError::World(format!(
                        "arg-types for `{name}` do not match its signature"
                    )))
                }
            }
        }
        for t in &self.top_level {
            if kb.schemas_for_cause(t).next().is_none() {
                return Err(GenError::World(format!(
                    "top-level type `{t}` has no schema"
                )));
            }
        }
        Ok(())
    }
}

type Env = BTreeMap<Symbol, BTreeMap<Symbol, Symbol>>;

/// Bound cause arguments, emitted steps and the environment afterwards.
type Expansion = (Vec<Symbol>, Vec<Step>, Env);

fn env_from(init: &[EnvObject]) -> Env {
    init.iter()
        .map(|o| (o.id.clone(), o.properties.clone()))
        .collect()
}

fn none() -> Symbol {
    Symbol::new("none")
}

fn eval_expr(e: &Expr, params: &BTreeMap<&Symbol, &Symbol>, env: &Env) -> Symbol {
    match e {
        Expr::Name(n) => params
            .get(n)
            .map(|v| (*v).clone())
            .unwrap_or_else(|| n.clone()),
        Expr::Get(inner, prop) => {
            let obj = eval_expr(inner, params, env);
            env.get(&obj)
                .and_then(|p| p.get(prop))
                .cloned()
                .unwrap_or_else(none)
        }
    }
}

fn exec(
    stmts: &[Stmt],
    params: &BTreeMap<&Symbol, &Symbol>,
    env: &Env,
    out: &mut BTreeMap<(Symbol, Symbol), Symbol>,
) -> Result<(), String> {
    for s in stmts {
        match s {
            Stmt::Set(obj, prop, val) => {
                let obj = eval_expr(obj, params, env);
                if !env.contains_key(&obj) {
                    return Err(format!("set on unknown object `{obj}`"));
                }
                out.insert((obj, prop.clone()), eval_expr(val, params, env));
            }
            Stmt::Flip(obj, prop, a, b) => {
                let obj = eval_expr(obj, params, env);
                let Some(current) = env.get(&obj).and_then(|p| p.get(prop)) else {
                    return Err(format!("flip of missing property `{prop}` on `{obj}`"));
                };
                let next = if current == a { b } else { a };
                out.insert((obj, prop.clone()), next.clone());
            }
            Stmt::When {
                negate,
                lhs,
                rhs,
                body,
            } => {
                let same = eval_expr(lhs, params, env) == eval_expr(rhs, params, env);
                if same != *negate {
                    exec(body, params, env, out)?;
                }
            }
        }
    }
    Ok(())
}

/// Applies `action`'s rule to `env` and returns the resulting changes.
fn simulate(world: &WorldModel, env: &mut Env, action: &Action) -> Result<Vec<Change>, GenError> {
    let Some(rule) = world.rules.get(&action.name) else {
        return Ok(Vec::new());
    };
    let params: BTreeMap<&Symbol, &Symbol> = rule.params.iter().zip(&action.args).collect();
    let mut out = BTreeMap::new();
    exec(&rule.body, &params, env, &mut out).map_err(|message| GenError::Rule {
        action: action.name.clone(),
        message,
    })?;
    let mut changes = Vec::new();
    for ((object, prop), value) in out {
        let props = env.get_mut(&object).expect("checked by exec");
        if props.get(&prop) != Some(&value) {
            props.insert(prop.clone(), value.clone());
            changes.push(Change {
                object,
                prop,
                value,
            });
        }
    }
    Ok(changes)
}

/// Forward-simulates a fixed action sequence from `init`.
pub fn simulate_actions(
    world: &WorldModel,
    init: &[EnvObject],
    actions: &[Action],
) -> Result<Vec<Step>, GenError> {
    let mut env = env_from(init);
    actions
        .iter()
        .map(|a| {
            Ok(Step {
                action: a.clone(),
                changes: simulate(world, &mut env, a)?,
            })
        })
        .collect()
}

struct Gen<'a> {
    kb: &'a KnowledgeBase,
    world: &'a WorldModel,
    rng: ChaCha8Rng,
    max_rejections: usize,
}

enum Attempt<T> {
    Done(T),
    Rejected,
}

impl Gen<'_> {
    fn domain(&self, schema: &Schema, var: &Symbol, env: &Env) -> Vec<Symbol> {
        let mut allowed: Option<BTreeSet<Symbol>> = None;
        let mut restrict = |ty: &Symbol, pos: usize| {
            if let Some(Some(set)) = self.world.arg_types.get(ty).and_then(|p| p.get(pos)) {
                allowed = Some(match allowed.take() {
                    None => set.clone(),
                    Some(prev) => prev.intersection(set).cloned().collect(),
                });
            }
        };
        for (i, p) in schema.cause_params.iter().enumerate() {
            if p == var {
                restrict(&schema.cause_type, i);
            }
        }
        for e in &schema.effects {
            for (i, t) in e.args.iter().enumerate() {
                if t.as_var() == Some(var) {
                    restrict(&e.effect_type, i);
                }
            }
        }
        env.iter()
            .filter(|(_, props)| match &allowed {
                None => true,
                Some(set) => props.get("type").is_some_and(|t| set.contains(t)),
            })
            .map(|(id, _)| id.clone())
            .collect()
    }

    fn value(term: &Term, b: &BTreeMap<Symbol, Symbol>) -> Option<Symbol> {
        match term {
            Term::Lit(s) => Some(s.clone()),
            Term::Var(v) => b.get(v).cloned(),
        }
    }

    fn holds(
        atom: &ConstraintAtom,
        b: &BTreeMap<Symbol, Symbol>,
        start: &Env,
        end: Option<&Env>,
    ) -> Option<bool> {
        match atom {
            ConstraintAtom::Eq(x, y) => Some(Self::value(x, b)? == Self::value(y, b)?),
            ConstraintAtom::Neq(x, y) => Some(Self::value(x, b)? != Self::value(y, b)?),
            ConstraintAtom::PropAt {
                anchor,
                object,
                prop,
                value,
            } => {
                let env = match anchor {
                    Anchor::Start => start,
                    Anchor::End => end?,
                };
                let obj = Self::value(object, b)?;
                let actual = env.get(&obj).and_then(|p| p.get(prop));
                Some(actual.is_some() && actual == Self::value(value, b).as_ref())
            }
        }
    }

    /// Binds unbound value variables of `anchor` prop-at atoms by lookup.
    /// Returns false when a lookup target is missing.
    fn propagate(
        schema: &Schema,
        anchor: Anchor,
        b: &mut BTreeMap<Symbol, Symbol>,
        env: &Env,
    ) -> bool {
        loop {
            let mut progress = false;
            for atom in &schema.constraints {
                let ConstraintAtom::PropAt {
                    anchor: a,
                    object,
                    prop,
                    value: Term::Var(v),
                } = atom
                else {
                    continue;
                };
                if *a != anchor || b.contains_key(v) {
                    continue;
                }
                let Some(obj) = Self::value(object, b) else {
                    continue;
                };
                let Some(found) = env.get(&obj).and_then(|p| p.get(prop)) else {
                    return false;
                };
                b.insert(v.clone(), found.clone());
                progress = true;
            }
            if !progress {
                return true;
            }
        }
    }

    fn try_schema(
        &mut self,
        schema: &Schema,
        args: Option<&[Symbol]>,
        env: &Env,
    ) -> Result<Attempt<Expansion>, GenError> {
        let mut b = BTreeMap::new();
        if let Some(args) = args {
            for (p, a) in schema.cause_params.iter().zip(args) {
                if b.insert(p.clone(), a.clone()).is_some_and(|old| &old != a) {
                    return Ok(Attempt::Rejected);
                }
            }
        }

        let value_var = |anchor: Anchor| -> BTreeSet<Symbol> {
            schema
                .constraints
                .iter()
                .filter_map(|c| match c {
                    ConstraintAtom::PropAt {
                        anchor: a,
                        value: Term::Var(v),
                        ..
                    } if *a == anchor => Some(v.clone()),
                    _ => None,
                })
                .collect()
        };
        let looked_up = value_var(Anchor::Start);
        // Only used as an end value: bound after simulation instead of sampled.
        let mentioned: BTreeSet<&Symbol> = schema
            .effects
            .iter()
            .flat_map(|e| e.args.iter().filter_map(Term::as_var))
            .chain(&schema.cause_params)
            .chain(
                schema
                    .constraints
                    .iter()
                    .flat_map(|c| match c {
                        ConstraintAtom::Eq(x, y) | ConstraintAtom::Neq(x, y) => vec![x, y],
                        ConstraintAtom::PropAt {
                            anchor: Anchor::Start,
                            object,
                            value,
                            ..
                        } => vec![object, value],
                        ConstraintAtom::PropAt { object, .. } => vec![object],
                    })
                    .filter_map(Term::as_var),
            )
            .collect();
        let deferred: BTreeSet<Symbol> = value_var(Anchor::End)
            .into_iter()
            .filter(|v| !mentioned.contains(v))
            .collect();

        loop {
            if !Self::propagate(schema, Anchor::Start, &mut b, env) {
                return Ok(Attempt::Rejected);
            }
            let unbound = |v: &&Symbol| !b.contains_key(*v) && !deferred.contains(*v);
            let next = schema
                .vars
                .iter()
                .filter(unbound)
                .find(|v| !looked_up.contains(*v))
                .or_else(|| schema.vars.iter().find(|v| unbound(v)));
            let Some(var) = next else { break };
            let domain = self.domain(schema, var, env);
            let Some(pick) = domain.choose(&mut self.rng) else {
                return Ok(Attempt::Rejected);
            };
            b.insert(var.clone(), pick.clone());
        }
        for atom in &schema.constraints {
            if Self::holds(atom, &b, env, None) == Some(false) {
                return Ok(Attempt::Rejected);
            }
        }

        let mut cur = env.clone();
        let mut steps = Vec::new();
        for effect in &schema.effects {
            let args: Vec<Symbol> = effect
                .args
                .iter()
                .map(|t| Self::value(t, &b).expect("all effect variables are bound"))
                .collect();
            if self.kb.is_primitive(&effect.effect_type) {
                let action = Action {
                    name: effect.effect_type.clone(),
                    args,
                };
                match simulate(self.world, &mut cur, &action) {
                    Ok(changes) => steps.push(Step { action, changes }),
                    Err(GenError::Rule { .. }) => return Ok(Attempt::Rejected),
                    Err(e) => return Err(e),
                }
            } else {
                match self.expand(&effect.effect_type, Some(&args), &cur) {
                    Ok((_, sub, after)) => {
                        steps.extend(sub);
                        cur = after;
                    }
                    Err(GenError::Exhausted { .. }) => return Ok(Attempt::Rejected),
                    Err(e) => return Err(e),
                }
            }
        }

        if !Self::propagate(schema, Anchor::End, &mut b, &cur) {
            return Ok(Attempt::Rejected);
        }
        for atom in &schema.constraints {
            if Self::holds(atom, &b, env, Some(&cur)) != Some(true) {
                return Ok(Attempt::Rejected);
            }
        }
        let cause_args = schema.cause_params.iter().map(|p| b[p].clone()).collect();
        Ok(Attempt::Done((cause_args, steps, cur)))
    }

    /// Expands one intention of `cause`, choosing a schema afresh on each try.
    fn expand(
        &mut self,
        cause: &Symbol,
        args: Option<&[Symbol]>,
        env: &Env,
    ) -> Result<Expansion, GenError> {
        let kb = self.kb;
        let schemas: Vec<&Schema> = kb.schemas_for_cause(cause).collect();
        let mut last = None;
        for _ in 0..self.max_rejections.max(1) {
            let Some(schema) = schemas.choose(&mut self.rng).copied() else {
                return Err(GenError::World(format!("`{cause}` has no schema")));
            };
            last = Some(schema.id);
            if let Attempt::Done(r) = self.try_schema(schema, args, env)? {
                return Ok(r);
            }
        }
        Err(GenError::Exhausted {
            schema: last.expect("at least one attempt"),
            cause: cause.clone(),
            rejections: self.max_rejections,
        })
    }

    fn top_level_types(&self) -> Vec<Symbol> {
        if !self.world.top_level.is_empty() {
            return self.world.top_level.clone();
        }
        self.kb
            .signatures()
            .iter()
            .filter(|s| {
                s.kind == Kind::Abstract && self.kb.schemas_for_cause(&s.name).next().is_some()
            })
            .map(|s| s.name.clone())
            .collect()
    }

    fn run(
        &mut self,
        mut done: impl FnMut(usize, usize) -> bool,
    ) -> Result<GeneratedDemo, GenError> {
        let mut env = env_from(&self.world.init);
        let mut steps = Vec::new();
        let mut truth = Vec::new();
        if done(0, 0) {
            return Ok(GeneratedDemo {
                init: self.world.init.clone(),
                steps,
                ground_truth: truth,
            });
        }
        let types = self.top_level_types();
        if types.is_empty() {
            return Err(GenError::NoTopLevel);
        }
        while !done(truth.len(), steps.len()) {
            // A top-level attempt that runs dry re-draws the type as well.
            let mut outcome = None;
            for _ in 0..self.max_rejections.max(1) {
                let ty = types.choose(&mut self.rng).expect("non-empty").clone();
                match self.expand(&ty, None, &env) {
                    Ok(r) => {
                        outcome = Some(Ok((ty, r)));
                        break;
                    }
                    Err(e @ GenError::Exhausted { .. }) => outcome = Some(Err(e)),
                    Err(e) => return Err(e),
                }
            }
            let (ty, (args, sub, after)) = outcome.expect("at least one attempt")?;
            truth.push(Action { name: ty, args });
            steps.extend(sub);
            env = after;
        }
        Ok(GeneratedDemo {
            init: self.world.init.clone(),
            steps,
            ground_truth: truth,
        })
    }
}

fn generator<'a>(kb: &'a KnowledgeBase, cfg: &'a GenConfig) -> Result<Gen<'a>, GenError> {
    cfg.world.check(kb)?;
    Ok(Gen {
        kb,
        world: &cfg.world,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        max_rejections: cfg.max_rejections,
    })
}

/// Samples `cfg.n_top_level` top-level intentions and expands them into primitive steps.
pub fn gen_demo(kb: &KnowledgeBase, cfg: &GenConfig) -> Result<GeneratedDemo, GenError> {
    let n = cfg.n_top_level;
    generator(kb, cfg)?.run(|intents, _| intents >= n)
}

/// Generates until at least `len` steps exist, then cuts the demo to exactly
/// `len`. Ground truth keeps only the intentions that fit whole.
pub fn gen_demo_of_length(
    kb: &KnowledgeBase,
    cfg: &GenConfig,
    len: usize,
) -> Result<GeneratedDemo, GenError> {
    let mut sizes = Vec::new();
    let mut last = 0;
    let mut demo = generator(kb, cfg)?.run(|intents, steps| {
        if intents > sizes.len() {
            sizes.push(steps - last);
            last = steps;
        }
        steps >= len
    })?;
    demo.steps.truncate(len);
    let mut used = 0;
    let keep = sizes
        .iter()
        .take_while(|&&s| {
            used += s;
            used <= len
        })
        .count();
    demo.ground_truth.truncate(keep);
    Ok(demo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_kb;

    const RELOCATE_KB: &str = "
        (primitive grasp 2) (primitive move 2) (primitive release 1) (abstract relocate 2)
        (schema (cause relocate (obj loc)) (vars obj loc gripper)
          (effects (grasp obj gripper) (move gripper loc) (release gripper))
          (constraints (prop-at start obj portable yes) (prop-at start gripper holding none)
                       (prop-at end obj location loc)))";

    const RELOCATE_WORLD: &str = "
        (init (object block (type block) (portable yes) (location table))
              (object hand (type gripper) (holding none) (location home))
              (object table (type location))
              (object shelf (type location)))
        (arg-types (grasp (block) (gripper)) (move (gripper) (location)) (release (gripper)))
        (rules
          (rule grasp (obj g) (set obj location g) (set g holding obj))
          (rule move (g loc) (set g location loc))
          (rule release (g) (set (get g holding) location (get g location)) (set g holding none)))";

    fn setup() -> (KnowledgeBase, Arc<WorldModel>) {
        (
            parse_kb(RELOCATE_KB).unwrap(),
            Arc::new(WorldModel::parse(RELOCATE_WORLD).unwrap()),
        )
    }

    #[test]
    fn one_relocate_is_three_steps() {
        let (kb, world) = setup();
        let demo = gen_demo(&kb, &GenConfig::new(1, 1, world)).unwrap();
        let names: Vec<&str> = demo.steps.iter().map(|s| s.action.name.as_str()).collect();
        assert_eq!(names, ["grasp", "move", "release"]);
        assert_eq!(demo.ground_truth.len(), 1);
        assert_eq!(demo.ground_truth[0].name.as_str(), "relocate");
        let target = &demo.ground_truth[0].args[1];
        let last = demo.steps[2]
            .changes
            .iter()
            .find(|c| c.prop.as_str() == "location")
            .unwrap();
        assert_eq!(&last.value, target);
    }

    #[test]
    fn zero_top_level_is_empty() {
        let (kb, world) = setup();
        let demo = gen_demo(&kb, &GenConfig::new(5, 0, world)).unwrap();
        assert!(demo.steps.is_empty());
        assert!(demo.ground_truth.is_empty());
        assert_eq!(demo.init.len(), 4);
    }

    #[test]
    fn same_seed_same_demo() {
        let (kb, world) = setup();
        let a = gen_demo(&kb, &GenConfig::new(42, 5, Arc::clone(&world))).unwrap();
        let b = gen_demo(&kb, &GenConfig::new(42, 5, world)).unwrap();
        assert_eq!(a.transcript().to_sexp(), b.transcript().to_sexp());
        assert_eq!(a.truth().to_sexp(), b.truth().to_sexp());
    }

    #[test]
    fn exhaustion_names_the_schema() {
        let kb = parse_kb(
            "(primitive grasp 2) (abstract stuck 1)
             (schema (cause stuck (o)) (vars o g) (effects (grasp o g)) (constraints (prop-at start o colour purple)))",
        )
        .unwrap();
        let world = Arc::new(WorldModel::parse("(init (object a (colour red)))").unwrap());
        let mut cfg = GenConfig::new(1, 1, world);
        cfg.max_rejections = 5;
        let err = gen_demo(&kb, &cfg).unwrap_err();
        assert!(
            matches!(
                err,
                GenError::Exhausted {
                    schema: SchemaId(0),
                    ..
                }
            ),
            "{err}"
        );
        assert!(err.to_string().contains("schema 0"));
    }

    #[test]
    fn exact_length_truncation() {
        let (kb, world) = setup();
        let demo = gen_demo_of_length(&kb, &GenConfig::new(3, 0, world), 7).unwrap();
        assert_eq!(demo.steps.len(), 7);
        assert_eq!(demo.ground_truth.len(), 2);
    }

    #[test]
    fn rules_read_the_pre_state() {
        let (_, world) = setup();
        let init = world.init.clone();
        let steps = simulate_actions(
            &world,
            &init,
            &[
                Action::new("grasp", &["block", "hand"]),
                Action::new("move", &["hand", "shelf"]),
                Action::new("release", &["hand"]),
            ],
        )
        .unwrap();
        assert_eq!(
            steps[2].changes,
            vec![
                Change::new("block", "location", "shelf"),
                Change::new("hand", "holding", "none")
            ]
        );
    }

    #[test]
    fn set_on_missing_object_is_a_rule_error() {
        let (_, world) = setup();
        let init = world.init.clone();
        let err =
            simulate_actions(&world, &init, &[Action::new("release", &["hand"])]).unwrap_err();
        assert!(matches!(err, GenError::Rule { .. }));
    }
}

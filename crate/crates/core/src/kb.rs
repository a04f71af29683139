//! Cause-effect knowledge base: DSL parsing, validation and the first-effect index.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::sexpr::{self, Pos, Sexp, SyntaxError};
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Primitive,
    Abstract,
}

impl Kind {
    fn keyword(self) -> &'static str {
        match self {
            Kind::Primitive => "primitive",
            Kind::Abstract => "abstract",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSignature {
    pub name: Symbol,
    pub arity: usize,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Symbol),
    Lit(Symbol),
}

impl Term {
    pub fn symbol(&self) -> &Symbol {
        match self {
            Term::Var(s) | Term::Lit(s) => s,
        }
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(s) => Some(s),
            Term::Lit(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectTemplate {
    pub effect_type: Symbol,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anchor {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintAtom {
    Eq(Term, Term),
    Neq(Term, Term),
    /// The value of `prop` on `object` at the hypothesis start or end timepoint.
    /// An unbound `value` variable is bound to the queried value.
    PropAt {
        anchor: Anchor,
        object: Term,
        prop: Symbol,
        value: Term,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemaId(pub usize);

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub id: SchemaId,
    pub cause_type: Symbol,
    pub cause_params: Vec<Symbol>,
    /// Declared variables, in declaration order.
    pub vars: Vec<Symbol>,
    pub effects: Vec<EffectTemplate>,
    pub constraints: Vec<ConstraintAtom>,
}

impl Schema {
    pub fn is_var(&self, s: &Symbol) -> bool {
        self.vars.contains(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: duplicate signature `{name}`")]
    DuplicateSignature { name: Symbol, pos: Pos },
    #[error("{pos}: arity mismatch for `{name}`: declared {expected}, used with {found}")]
    ArityMismatch {
        name: Symbol,
        expected: usize,
        found: usize,
        pos: Pos,
    },
    #[error("{pos}: undeclared variable `{name}`")]
    UndeclaredVariable { name: Symbol, pos: Pos },
    #[error("{pos}: schema for `{cause}` has no effects")]
    EmptyEffects { cause: Symbol, pos: Pos },
    #[error("{pos}: cause `{name}` is not declared abstract")]
    BadCause { name: Symbol, pos: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    signatures: Vec<TypeSignature>,
    sig_index: HashMap<Symbol, usize>,
    schemas: Vec<Schema>,
    first_effect_index: HashMap<Symbol, Vec<SchemaId>>,
}

impl KnowledgeBase {
    /// Builds a knowledge base from already-checked parts and indexes it.
    fn assemble(signatures: Vec<TypeSignature>, schemas: Vec<Schema>) -> Self {
        let sig_index = signatures
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), i))
            .collect();
        let mut first_effect_index: HashMap<Symbol, Vec<SchemaId>> = HashMap::new();
        for schema in &schemas {
            first_effect_index
                .entry(schema.effects[0].effect_type.clone())
                .or_default()
                .push(schema.id);
        }
        KnowledgeBase {
            signatures,
            sig_index,
            schemas,
            first_effect_index,
        }
    }

    pub fn signatures(&self) -> &[TypeSignature] {
        &self.signatures
    }

    pub fn signature(&self, name: &str) -> Option<&TypeSignature> {
        self.sig_index.get(name).map(|&i| &self.signatures[i])
    }

    pub fn schemas(&self) -> &[Schema] {
        &self.schemas
    }

    pub fn schema(&self, id: SchemaId) -> &Schema {
        &self.schemas[id.0]
    }

    /// Schemas whose first effect has type `action_type`, in file order.
    /// An unknown type yields an empty slice.
    pub fn schemas_for_first_effect(&self, action_type: &str) -> &[SchemaId] {
        self.first_effect_index
            .get(action_type)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Schemas implementing `cause_type`, in file order.
    pub fn schemas_for_cause<'a>(
        &'a self,
        cause_type: &'a str,
    ) -> impl Iterator<Item = &'a Schema> {
        self.schemas
            .iter()
            .filter(move |s| s.cause_type.as_str() == cause_type)
    }

    pub fn is_primitive(&self, name: &str) -> bool {
        matches!(self.signature(name), Some(sig) if sig.kind == Kind::Primitive)
    }

    /// Renders the knowledge base back to DSL source. `parse_kb` of the output
    /// yields an equal value.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for sig in &self.signatures {
            let _ = writeln!(out, "({} {} {})", sig.kind.keyword(), sig.name, sig.arity);
        }
        for s in &self.schemas {
            let _ = write!(
                out,
                "(schema (cause {} ({}))\n  (vars{})\n  (effects",
                s.cause_type,
                join(&s.cause_params),
                prefixed(&s.vars)
            );
            for e in &s.effects {
                let args: Vec<&Symbol> = e.args.iter().map(Term::symbol).collect();
                let _ = write!(out, " ({}{})", e.effect_type, prefixed(&args));
            }
            out.push(')');
            if !s.constraints.is_empty() {
                out.push_str("\n  (constraints");
                for c in &s.constraints {
                    let _ = write!(out, " {}", render_atom(c));
                }
                out.push(')');
            }
            out.push_str(")\n");
        }
        out
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn prefixed<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|s| format!(" {s}")).collect()
}

pub fn render_atom(c: &ConstraintAtom) -> String {
    match c {
        ConstraintAtom::Eq(a, b) => format!("(eq {} {})", a.symbol(), b.symbol()),
        ConstraintAtom::Neq(a, b) => format!("(neq {} {})", a.symbol(), b.symbol()),
        ConstraintAtom::PropAt {
            anchor,
            object,
            prop,
            value,
        } => format!(
            "(prop-at {} {} {} {})",
            match anchor {
                Anchor::Start => "start",
                Anchor::End => "end",
            },
            object.symbol(),
            prop,
            value.symbol()
        ),
    }
}

/// Parses knowledge-base DSL source.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, KbError> {
    let forms = sexpr::parse_all(text)?;
    let mut signatures: Vec<TypeSignature> = Vec::new();
    let mut seen: HashMap<Symbol, usize> = HashMap::new();
    let mut raw_schemas = Vec::new();

    for form in &forms {
        match form.head() {
            Some(kw @ ("primitive" | "abstract")) => {
                let items = form.as_list().unwrap_or_default();
                if items.len() != 3 {
                    return Err(SyntaxError::new(
                        form.pos(),
                        format!("expected ({kw} NAME ARITY)"),
                    )
                    .into());
                }
                let name = items[1].expect_atom("type name")?.clone();
                let arity = sexpr::parse_count(&items[2], "arity")?;
                if seen.contains_key(&name) {
                    return Err(KbError::DuplicateSignature {
                        name,
                        pos: form.pos(),
                    });
                }
                let kind = if kw == "primitive" {
                    Kind::Primitive
                } else {
                    Kind::Abstract
                };
                seen.insert(name.clone(), signatures.len());
                signatures.push(TypeSignature { name, arity, kind });
            }
            Some("schema") => raw_schemas.push(form),
            _ => {
                return Err(SyntaxError::new(
                    form.pos(),
                    "expected (primitive ...), (abstract ...) or (schema ...)",
                )
                .into())
            }
        }
    }

    // Schemas are resolved after all signatures so declarations may follow use.
    let mut schemas = Vec::with_capacity(raw_schemas.len());
    for (i, form) in raw_schemas.into_iter().enumerate() {
        schemas.push(parse_schema(form, SchemaId(i), &signatures, &seen)?);
    }
    Ok(KnowledgeBase::assemble(signatures, schemas))
}

fn parse_schema(
    form: &Sexp,
    id: SchemaId,
    signatures: &[TypeSignature],
    sig_index: &HashMap<Symbol, usize>,
) -> Result<Schema, KbError> {
    let body = form.expect_form("schema")?;
    if body.len() < 3 || body.len() > 4 {
        return Err(SyntaxError::new(
            form.pos(),
            "expected (schema (cause ...) (vars ...) (effects ...) [(constraints ...)])",
        )
        .into());
    }

    let cause = body[0].expect_form("cause")?;
    if cause.len() != 2 {
        return Err(SyntaxError::new(body[0].pos(), "expected (cause NAME (PARAM ...))").into());
    }
    let cause_type = cause[0].expect_atom("cause type")?.clone();
    let cause_params = cause[1]
        .expect_list("cause parameter list")?
        .iter()
        .map(|p| p.expect_atom("parameter").cloned())
        .collect::<Result<Vec<_>, _>>()?;

    let vars = body[1]
        .expect_form("vars")?
        .iter()
        .map(|v| v.expect_atom("variable").cloned())
        .collect::<Result<Vec<_>, _>>()?;
    let var_set: HashSet<&Symbol> = vars.iter().collect();
    if var_set.len() != vars.len() {
        return Err(SyntaxError::new(body[1].pos(), "duplicate variable in (vars ...)").into());
    }

    match sig_index.get(&cause_type).map(|&i| &signatures[i]) {
        Some(sig) if sig.kind == Kind::Abstract => {
            if sig.arity != cause_params.len() {
                return Err(KbError::ArityMismatch {
                    name: cause_type,
                    expected: sig.arity,
                    found: cause_params.len(),
                    pos: body[0].pos(),
                });
            }
        }
        _ => {
            return Err(KbError::BadCause {
                name: cause_type,
                pos: body[0].pos(),
            })
        }
    }
    for p in &cause_params {
        if !var_set.contains(p) {
            return Err(KbError::UndeclaredVariable {
                name: p.clone(),
                pos: body[0].pos(),
            });
        }
    }

    let term = |s: &Sexp| -> Result<Term, KbError> {
        let sym = s.expect_atom("term")?;
        Ok(if var_set.contains(sym) {
            Term::Var(sym.clone())
        } else {
            Term::Lit(sym.clone())
        })
    };

    let mut effects = Vec::new();
    for e in body[2].expect_form("effects")? {
        let items = e.expect_list("effect")?;
        let Some(first) = items.first() else {
            return Err(SyntaxError::new(e.pos(), "empty effect").into());
        };
        let effect_type = first.expect_atom("effect type")?.clone();
        let args = items[1..]
            .iter()
            .map(&term)
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(&i) = sig_index.get(&effect_type) {
            if signatures[i].arity != args.len() {
                return Err(KbError::ArityMismatch {
                    name: effect_type,
                    expected: signatures[i].arity,
                    found: args.len(),
                    pos: e.pos(),
                });
            }
        }
        effects.push(EffectTemplate { effect_type, args });
    }
    if effects.is_empty() {
        return Err(KbError::EmptyEffects {
            cause: cause_type,
            pos: body[2].pos(),
        });
    }

    let mut constraints = Vec::new();
    if let Some(c) = body.get(3) {
        for atom in c.expect_form("constraints")? {
            let items = atom.expect_list("constraint")?;
            let bad = || SyntaxError::new(atom.pos(), "malformed constraint");
            let constraint = match atom.head() {
                Some("eq") if items.len() == 3 => {
                    ConstraintAtom::Eq(term(&items[1])?, term(&items[2])?)
                }
                Some("neq") if items.len() == 3 => {
                    ConstraintAtom::Neq(term(&items[1])?, term(&items[2])?)
                }
                Some("prop-at") if items.len() == 5 => {
                    let anchor = match items[1].expect_atom("anchor")?.as_str() {
                        "start" => Anchor::Start,
                        "end" => Anchor::End,
                        _ => {
                            return Err(SyntaxError::new(
                                items[1].pos(),
                                "anchor must be `start` or `end`",
                            )
                            .into())
                        }
                    };
                    let prop = items[3].expect_atom("property name")?.clone();
                    if var_set.contains(&prop) {
                        return Err(SyntaxError::new(
                            items[3].pos(),
                            format!("property name `{prop}` must be a literal, not a variable"),
                        )
                        .into());
                    }
                    ConstraintAtom::PropAt {
                        anchor,
                        object: term(&items[2])?,
                        prop,
                        value: term(&items[4])?,
                    }
                }
                _ => return Err(bad().into()),
            };
            constraints.push(constraint);
        }
    }

    Ok(Schema {
        id,
        cause_type,
        cause_params,
        vars,
        effects,
        constraints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub schema: Option<SchemaId>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.schema {
            Some(id) => write!(f, "{sev}[schema {id}]: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// Static checks beyond what parsing enforces.
///
/// Errors: unit-production cycles and unbindable cause parameters.
/// Warnings: effect types that are neither primitive nor caused by any schema.
pub fn validate_kb(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    // Unit-production graph: cause -> sole effect type.
    let mut unit_edges: HashMap<&Symbol, Vec<&Symbol>> = HashMap::new();
    for s in kb.schemas() {
        if s.effects.len() == 1 {
            unit_edges
                .entry(&s.cause_type)
                .or_default()
                .push(&s.effects[0].effect_type);
        }
    }
    for s in kb.schemas() {
        if s.effects.len() != 1 {
            continue;
        }
        // The edge cause -> effect closes a cycle iff cause is reachable from effect.
        let target = &s.cause_type;
        let mut stack = vec![&s.effects[0].effect_type];
        let mut visited = HashSet::new();
        let mut cyclic = false;
        while let Some(t) = stack.pop() {
            if t == target {
                cyclic = true;
                break;
            }
            if visited.insert(t) {
                if let Some(next) = unit_edges.get(t) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        if cyclic {
            out.push(Diagnostic {
                severity: Severity::Error,
                message: format!(
                    "unit cycle: `{}` -> `{}` leads back to `{}`",
                    s.cause_type, s.effects[0].effect_type, s.cause_type
                ),
                schema: Some(s.id),
            });
        }
    }

    for s in kb.schemas() {
        let mut bindable: HashSet<&Symbol> = HashSet::new();
        for e in &s.effects {
            bindable.extend(e.args.iter().filter_map(Term::as_var));
        }
        for c in &s.constraints {
            if let ConstraintAtom::PropAt { object, value, .. } = c {
                bindable.extend(object.as_var());
                bindable.extend(value.as_var());
            }
        }
        for c in &s.constraints {
            if let ConstraintAtom::PropAt {
                object: Term::Var(o),
                prop,
                value: Term::Var(v),
                ..
            } = c
            {
                if o == v {
                    out.push(Diagnostic {
                        severity: Severity::Warning,
                        message: format!(
                            "`{}` requires `{o}`'s `{prop}` to be `{o}` itself; a variable shadows the intended literal?",
                            render_atom(c)
                        ),
                        schema: Some(s.id),
                    });
                }
            }
        }
        for p in &s.cause_params {
            if !bindable.contains(p) {
                out.push(Diagnostic {
                    severity: Severity::Error,
                    message: format!(
                        "cause parameter `{p}` of `{}` can never be bound",
                        s.cause_type
                    ),
                    schema: Some(s.id),
                });
            }
        }
    }

    let caused: HashSet<&Symbol> = kb.schemas().iter().map(|s| &s.cause_type).collect();
    let mut warned = BTreeSet::new();
    for s in kb.schemas() {
        for e in &s.effects {
            let t = &e.effect_type;
            if !kb.is_primitive(t) && !caused.contains(t) && warned.insert(t.clone()) {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    message: format!(
                        "effect type `{t}` is neither primitive nor the cause of any schema; predictions of it can never be verified"
                    ),
                    schema: Some(s.id),
                });
            }
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const RELOCATE: &str = "
        (primitive grasp 2) (primitive move 2) (primitive release 1) (abstract relocate 2)
        (schema (cause relocate (obj loc)) (vars obj loc gripper)
          (effects (grasp obj gripper) (move gripper loc) (release gripper)))";

    pub(crate) const XYZ: &str = "
        (primitive A 0) (primitive B 0) (primitive C 0)
        (abstract X 0) (abstract Y 0) (abstract Z 0)
        (schema (cause X ()) (vars) (effects (A) (B)))
        (schema (cause Y ()) (vars) (effects (C)))
        (schema (cause Z ()) (vars) (effects (A) (B) (C)))";

    #[test]
    fn relocate_schema_is_indexed_under_grasp() {
        let kb = parse_kb(RELOCATE).unwrap();
        assert_eq!(kb.schemas().len(), 1);
        assert_eq!(kb.schemas_for_first_effect("grasp"), &[SchemaId(0)]);
        let s = kb.schema(SchemaId(0));
        assert_eq!(s.effects[0].args[0], Term::Var(Symbol::new("obj")));
        assert!(validate_kb(&kb).is_empty());
    }

    #[test]
    fn empty_file_gives_empty_kb() {
        let kb = parse_kb("").unwrap();
        assert!(kb.schemas().is_empty());
        assert!(kb.schemas_for_first_effect("anything").is_empty());
    }

    #[test]
    fn xyz_index() {
        let kb = parse_kb(XYZ).unwrap();
        assert_eq!(
            kb.schemas_for_first_effect("A"),
            &[SchemaId(0), SchemaId(2)]
        );
        assert_eq!(kb.schemas_for_first_effect("C"), &[SchemaId(1)]);
        assert!(kb.schemas_for_first_effect("B").is_empty());
    }

    #[test]
    fn literals_are_terms_not_in_vars() {
        let kb = parse_kb(
            "(primitive grasp 2) (abstract pick-left 1)
             (schema (cause pick-left (o)) (vars o) (effects (grasp o left-gripper)))",
        )
        .unwrap();
        let e = &kb.schemas()[0].effects[0];
        assert_eq!(e.args[1], Term::Lit(Symbol::new("left-gripper")));
    }

    #[test]
    fn syntax_error_carries_line_and_column() {
        let err = parse_kb("(primitive a 1)\n(schema (cause").unwrap_err();
        match err {
            KbError::Syntax(e) => assert_eq!((e.pos.line, e.pos.col), (2, 9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_signature_rejected() {
        let err = parse_kb("(primitive a 1) (abstract a 1)").unwrap_err();
        assert!(matches!(err, KbError::DuplicateSignature { .. }));
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = parse_kb(
            "(primitive a 1) (abstract x 0)
             (schema (cause x ()) (vars) (effects (a p q)))",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            KbError::ArityMismatch {
                expected: 1,
                found: 2,
                ..
            }
        ));
        let err = parse_kb(
            "(primitive a 1) (abstract x 2)
             (schema (cause x (v)) (vars v) (effects (a v)))",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            KbError::ArityMismatch {
                expected: 2,
                found: 1,
                ..
            }
        ));
    }

    #[test]
    fn undeclared_cause_variable_rejected() {
        let err = parse_kb(
            "(primitive a 1) (abstract x 1)
             (schema (cause x (v)) (vars) (effects (a v)))",
        )
        .unwrap_err();
        assert!(matches!(err, KbError::UndeclaredVariable { .. }));
    }

    #[test]
    fn empty_effects_rejected() {
        let err = parse_kb("(abstract x 0) (schema (cause x ()) (vars) (effects))").unwrap_err();
        assert!(matches!(err, KbError::EmptyEffects { .. }));
    }

    #[test]
    fn primitive_cause_rejected() {
        let err =
            parse_kb("(primitive x 0) (schema (cause x ()) (vars) (effects (x)))").unwrap_err();
        assert!(matches!(err, KbError::BadCause { .. }));
    }

    #[test]
    fn self_unit_production_is_one_cycle_error() {
        let kb = parse_kb("(abstract X 0) (schema (cause X ()) (vars) (effects (X)))").unwrap();
        let diags = validate_kb(&kb);
        let errors: Vec<_> = diags
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .collect();
        assert_eq!(errors.len(), 1);
        assert!(errors[0].message.contains("unit cycle"));
    }

    #[test]
    fn unreachable_effect_type_warns() {
        let kb = parse_kb(
            "(primitive a 0) (abstract x 0)
             (schema (cause x ()) (vars) (effects (a) (frobnicate)))",
        )
        .unwrap();
        let diags = validate_kb(&kb);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("frobnicate"));
        assert!(!has_errors(&diags));
    }

    #[test]
    fn self_referential_prop_at_warns() {
        let kb = parse_kb(
            "(primitive press 1) (abstract toggle 1)
             (schema (cause toggle (switch)) (vars switch) (effects (press switch))
               (constraints (prop-at start switch type switch)))",
        )
        .unwrap();
        let diags = validate_kb(&kb);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("shadows"));
    }

    #[test]
    fn unbindable_cause_param_is_error() {
        let kb = parse_kb(
            "(primitive a 0) (abstract x 1)
             (schema (cause x (v)) (vars v) (effects (a)) (constraints (eq v v)))",
        )
        .unwrap();
        let diags = validate_kb(&kb);
        assert!(has_errors(&diags));
        assert!(diags[0].message.contains("never be bound"));
    }

    #[test]
    fn prop_at_value_binds_cause_param() {
        let kb = parse_kb(
            "(primitive grasp 2) (abstract hold-at 1)
             (schema (cause hold-at (l)) (vars o g l) (effects (grasp o g))
               (constraints (prop-at start o location l)))",
        )
        .unwrap();
        assert!(validate_kb(&kb).is_empty());
    }

    #[test]
    fn dsl_round_trip_preserves_value() {
        for src in [RELOCATE, XYZ] {
            let kb = parse_kb(src).unwrap();
            assert_eq!(parse_kb(&kb.to_dsl()).unwrap(), kb);
        }
    }
}

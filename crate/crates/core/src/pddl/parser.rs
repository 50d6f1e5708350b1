use super::ast::*;
use super::sexpr::{self, SExpr};
use crate::error::{PlanError, Result};

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

fn unsupported_requirement(req: &str) -> &'static str {
    match req {
        ":conditional-effects" => "conditional effects",
        ":derived-predicates" => "axioms",
        ":action-costs" => "action costs",
        ":negative-preconditions" => "negative preconditions",
        ":quantified-preconditions" | ":universal-preconditions" | ":existential-preconditions" => {
            "quantifiers"
        }
        ":disjunctive-preconditions" => "disjunctive preconditions",
        ":equality" => "equality",
        ":adl" => "adl",
        ":numeric-fluents" | ":fluents" | ":object-fluents" => "numeric fluents",
        ":durative-actions" | ":duration-inequalities" | ":continuous-effects" => {
            "temporal planning"
        }
        _ => "unknown requirement",
    }
}

fn symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol()
        .ok_or_else(|| e.error(format!("expected {what}, found a list")))
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| e.error(format!("expected {what}, found a symbol")))
}

/// `a b - t c - u d` with untyped names defaulting to the root type.
fn typed_list(items: &[SExpr]) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let s = symbol(item, "a name")?;
        if s == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| item.error("`-` without a type"))?;
            if ty_expr.head() == Some("either") {
                return Err(PlanError::Unsupported("either types".into()));
            }
            let ty = symbol(ty_expr, "a type name")?;
            if pending.is_empty() {
                return Err(item.error("`-` without preceding names"));
            }
            out.extend(pending.drain(..).map(|name| TypedName {
                name,
                ty: ty.to_string(),
            }));
            i += 2;
        } else {
            pending.push(s.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|name| TypedName {
        name,
        ty: ROOT_TYPE.to_string(),
    }));
    Ok(out)
}

fn atom(e: &SExpr) -> Result<Atom> {
    let items = list(e, "an atom")?;
    let head = items.first().ok_or_else(|| e.error("empty atom"))?;
    let predicate = symbol(head, "a predicate name")?.to_string();
    let args = items[1..]
        .iter()
        .map(|a| symbol(a, "a term").map(str::to_string))
        .collect::<Result<_>>()?;
    Ok(Atom { predicate, args })
}

fn reject_condition_construct(head: &str) -> Result<()> {
    let construct = match head {
        "not" => "negative preconditions",
        "forall" | "exists" => "quantifiers",
        "or" | "imply" => "disjunctive preconditions",
        "=" => "equality",
        "when" => "conditional effects",
        "<" | ">" | "<=" | ">=" => "numeric fluents",
        _ => return Ok(()),
    };
    Err(PlanError::Unsupported(construct.into()))
}

/// Conjunction of positive atoms.
fn condition(e: &SExpr) -> Result<Vec<Atom>> {
    let items = list(e, "a condition")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let head = symbol(&items[0], "a connective or predicate")?;
    if head == "and" {
        let mut out = Vec::new();
        for c in &items[1..] {
            out.extend(condition(c)?);
        }
        return Ok(out);
    }
    reject_condition_construct(head)?;
    Ok(vec![atom(e)?])
}

fn effect(e: &SExpr) -> Result<Vec<Literal>> {
    let items = list(e, "an effect")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let head = symbol(&items[0], "a connective or predicate")?;
    match head {
        "and" => {
            let mut out = Vec::new();
            for c in &items[1..] {
                out.extend(effect(c)?);
            }
            Ok(out)
        }
        "not" => {
            let inner = items
                .get(1)
                .filter(|_| items.len() == 2)
                .ok_or_else(|| e.error("`not` takes exactly one atom"))?;
            if let Some(h) = inner.head() {
                reject_condition_construct(h)?;
            }
            Ok(vec![Literal {
                negated: true,
                atom: atom(inner)?,
            }])
        }
        "when" => Err(PlanError::Unsupported("conditional effects".into())),
        "forall" => Err(PlanError::Unsupported("quantifiers".into())),
        "increase" | "decrease" | "assign" | "scale-up" | "scale-down" => {
            Err(PlanError::Unsupported("action costs".into()))
        }
        _ => Ok(vec![Literal {
            negated: false,
            atom: atom(e)?,
        }]),
    }
}

fn action_schema(items: &[SExpr], whole: &SExpr) -> Result<ActionSchema> {
    let name = symbol(
        items.get(1).ok_or_else(|| whole.error("action without a name"))?,
        "an action name",
    )?
    .to_string();
    let mut schema = ActionSchema {
        name,
        params: Vec::new(),
        precondition: Vec::new(),
        effect: Vec::new(),
    };
    let mut i = 2;
    while i < items.len() {
        let key = symbol(&items[i], "an action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| items[i].error(format!("missing value for {key}")))?;
        match key {
            ":parameters" => schema.params = typed_list(list(value, "a parameter list")?)?,
            ":precondition" => schema.precondition = condition(value)?,
            ":effect" => schema.effect = effect(value)?,
            other => return Err(items[i].error(format!("unknown action keyword {other}"))),
        }
        i += 2;
    }
    Ok(schema)
}

fn define_header(text: &str, kind: &str) -> Result<(SExpr, String)> {
    let root = sexpr::read(text)?;
    let items = list(&root, "a define block")?;
    if root.head() != Some("define") || items.len() < 2 {
        return Err(root.error("expected (define ...)"));
    }
    let header = list(&items[1], "a name header")?;
    if header.len() != 2 || header[0].as_symbol() != Some(kind) {
        return Err(items[1].error(format!("expected ({kind} <name>)")));
    }
    let name = symbol(&header[1], "a name")?.to_string();
    Ok((root, name))
}

pub fn parse_domain(text: &str) -> Result<DomainAst> {
    let (root, name) = define_header(text, "domain")?;
    let mut d = DomainAst {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    for section in &root.as_list().unwrap()[2..] {
        let items = list(section, "a domain section")?;
        let key = items
            .first()
            .and_then(SExpr::as_symbol)
            .ok_or_else(|| section.error("empty section"))?;
        match key {
            ":requirements" => {
                for r in &items[1..] {
                    let r = symbol(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PlanError::Unsupported(format!(
                            "{} ({r})",
                            unsupported_requirement(r)
                        )));
                    }
                    d.requirements.push(r.to_string());
                }
            }
            ":types" => {
                d.types = typed_list(&items[1..])?
                    .into_iter()
                    .map(|t| (t.name, t.ty))
                    .collect()
            }
            ":constants" => d.constants = typed_list(&items[1..])?,
            ":predicates" => {
                for p in &items[1..] {
                    let pi = list(p, "a predicate declaration")?;
                    let name = symbol(
                        pi.first().ok_or_else(|| p.error("empty predicate"))?,
                        "a predicate name",
                    )?;
                    d.predicates.push(PredicateDecl {
                        name: name.to_string(),
                        params: typed_list(&pi[1..])?,
                    });
                }
            }
            ":action" => d.actions.push(action_schema(items, section)?),
            ":derived" => return Err(PlanError::Unsupported("axioms".into())),
            ":functions" => return Err(PlanError::Unsupported("action costs".into())),
            ":durative-action" => return Err(PlanError::Unsupported("temporal planning".into())),
            other => return Err(section.error(format!("unknown domain section {other}"))),
        }
    }
    check_domain(&d)?;
    Ok(d)
}

fn check_atom_arity(d: &DomainAst, a: &Atom, context: &str) -> Result<()> {
    let decl = d.predicate(&a.predicate).ok_or_else(|| {
        PlanError::Semantic(format!("undeclared predicate `{}` in {context}", a.predicate))
    })?;
    if decl.params.len() != a.args.len() {
        return Err(PlanError::Semantic(format!(
            "predicate `{}` takes {} arguments, {} given in {context}",
            a.predicate,
            decl.params.len(),
            a.args.len()
        )));
    }
    Ok(())
}

fn check_domain(d: &DomainAst) -> Result<()> {
    let check_type = |ty: &str, context: &str| {
        if d.is_declared_type(ty) {
            Ok(())
        } else {
            Err(PlanError::Semantic(format!("undeclared type `{ty}` in {context}")))
        }
    };
    for (t, s) in &d.types {
        check_type(s, &format!("supertype of {t}"))?;
    }
    for c in &d.constants {
        check_type(&c.ty, "constants")?;
    }
    for p in &d.predicates {
        for param in &p.params {
            check_type(&param.ty, &format!("predicate {}", p.name))?;
        }
    }
    for a in &d.actions {
        let context = format!("action {}", a.name);
        for param in &a.params {
            if !param.name.starts_with('?') {
                return Err(PlanError::Semantic(format!(
                    "parameter `{}` of {context} is not a variable",
                    param.name
                )));
            }
            check_type(&param.ty, &context)?;
        }
        let atoms = a.precondition.iter().chain(a.effect.iter().map(|l| &l.atom));
        for atom in atoms {
            check_atom_arity(d, atom, &context)?;
            for arg in &atom.args {
                let known = if arg.starts_with('?') {
                    a.params.iter().any(|p| &p.name == arg)
                } else {
                    d.constants.iter().any(|c| &c.name == arg)
                };
                if !known {
                    return Err(PlanError::Semantic(format!(
                        "unknown term `{arg}` in {context}"
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn parse_problem(text: &str, domain: &DomainAst) -> Result<ProblemAst> {
    let (root, name) = define_header(text, "problem")?;
    let mut p = ProblemAst {
        name,
        domain: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    for section in &root.as_list().unwrap()[2..] {
        let items = list(section, "a problem section")?;
        let key = items
            .first()
            .and_then(SExpr::as_symbol)
            .ok_or_else(|| section.error("empty section"))?;
        match key {
            ":domain" => {
                p.domain = symbol(
                    items.get(1).ok_or_else(|| section.error("missing domain name"))?,
                    "a domain name",
                )?
                .to_string()
            }
            ":requirements" => {}
            ":objects" => p.objects = typed_list(&items[1..])?,
            ":init" => {
                for a in &items[1..] {
                    if a.head() == Some("=") {
                        return Err(PlanError::Unsupported("action costs".into()));
                    }
                    if let Some(h) = a.head() {
                        reject_condition_construct(h)?;
                    }
                    p.init.push(atom(a)?);
                }
            }
            ":goal" => {
                p.goal = condition(
                    items.get(1).ok_or_else(|| section.error("missing goal"))?,
                )?
            }
            ":metric" => return Err(PlanError::Unsupported("action costs".into())),
            other => return Err(section.error(format!("unknown problem section {other}"))),
        }
    }
    if p.domain != domain.name {
        return Err(PlanError::Semantic(format!(
            "problem targets domain `{}`, not `{}`",
            p.domain, domain.name
        )));
    }
    for o in &p.objects {
        if !domain.is_declared_type(&o.ty) {
            return Err(PlanError::Semantic(format!(
                "object `{}` has undeclared type `{}`",
                o.name, o.ty
            )));
        }
    }
    for a in &p.init {
        check_atom_arity(domain, a, "init")?;
    }
    for a in &p.goal {
        check_atom_arity(domain, a, "goal")?;
    }
    Ok(p)
}

pub fn parse_pddl(domain_text: &str, problem_text: &str) -> Result<(DomainAst, ProblemAst)> {
    let domain = parse_domain(domain_text)?;
    let problem = parse_problem(problem_text, &domain)?;
    Ok((domain, problem))
}

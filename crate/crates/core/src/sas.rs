//! Finite-domain tasks in the translator's version-3 output format.

use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;
use crate::task::{Action, Direction, FactGroups, StripsTask};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SasVariable {
    pub name: String,
    pub values: Vec<String>,
}

impl SasVariable {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }
}

/// One variable touched by an operator. `pre == Some(post)` is a prevail
/// condition; `pre == None` means the old value is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub var: usize,
    pub pre: Option<usize>,
    pub post: usize,
}

impl Transition {
    pub fn is_prevail(&self) -> bool {
        self.pre == Some(self.post)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SasOperator {
    pub name: String,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SasTask {
    pub variables: Vec<SasVariable>,
    pub mutex_groups: Vec<Vec<(usize, usize)>>,
    pub operators: Vec<SasOperator>,
    pub init: Vec<usize>,
    pub goal: Vec<(usize, usize)>,
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text
                .lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty())
                .collect(),
            pos: 0,
        }
    }

    fn line_no(&self) -> usize {
        self.lines
            .get(self.pos)
            .or(self.lines.last())
            .map_or(0, |(n, _)| *n)
    }

    fn err(&self, msg: impl Into<String>) -> PlanError {
        PlanError::SasFormat {
            line: self.line_no(),
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        let l = self
            .lines
            .get(self.pos)
            .map(|(_, l)| *l)
            .ok_or_else(|| self.err("unexpected end of file"))?;
        self.pos += 1;
        Ok(l)
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let l = self.next()?;
        if l != keyword {
            self.pos -= 1;
            return Err(self.err(format!("expected `{keyword}`, found `{l}`")));
        }
        Ok(())
    }

    fn ints(&mut self) -> Result<Vec<i64>> {
        let l = self.next()?;
        l.split_whitespace()
            .map(|t| {
                t.parse::<i64>().map_err(|_| PlanError::SasFormat {
                    line: self.lines[self.pos - 1].0,
                    msg: format!("expected integers, found `{l}`"),
                })
            })
            .collect()
    }

    fn int(&mut self) -> Result<i64> {
        let v = self.ints()?;
        if v.len() != 1 {
            self.pos -= 1;
            return Err(self.err("expected a single integer"));
        }
        Ok(v[0])
    }

    fn count(&mut self) -> Result<usize> {
        let v = self.int()?;
        usize::try_from(v).map_err(|_| self.err(format!("negative count {v}")))
    }
}

fn check_value(lines: &Lines, vars: &[SasVariable], var: i64, val: i64) -> Result<(usize, usize)> {
    let v = usize::try_from(var)
        .ok()
        .filter(|&v| v < vars.len())
        .ok_or_else(|| lines.err(format!("variable {var} out of range")))?;
    let k = usize::try_from(val)
        .ok()
        .filter(|&k| k < vars[v].domain_size())
        .ok_or_else(|| lines.err(format!("value {val} out of range for variable {var}")))?;
    Ok((v, k))
}

fn pair(lines: &mut Lines, vars: &[SasVariable]) -> Result<(usize, usize)> {
    let p = lines.ints()?;
    if p.len() != 2 {
        lines.pos -= 1;
        return Err(lines.err("expected `var value`"));
    }
    check_value(lines, vars, p[0], p[1])
}

pub fn read_sas(text: &str) -> Result<SasTask> {
    let mut lines = Lines::new(text);

    lines.expect("begin_version")?;
    let version = lines.next()?;
    if version != "3" {
        return Err(PlanError::SasVersion(version.to_string()));
    }
    lines.expect("end_version")?;

    lines.expect("begin_metric")?;
    let metric = lines.int()? != 0;
    lines.expect("end_metric")?;

    let nvars = lines.count()?;
    let mut variables = Vec::with_capacity(nvars);
    for _ in 0..nvars {
        lines.expect("begin_variable")?;
        let name = lines.next()?.to_string();
        if lines.int()? != -1 {
            return Err(PlanError::Unsupported("axioms (derived variable)".into()));
        }
        let size = lines.count()?;
        let values = (0..size)
            .map(|_| lines.next().map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        lines.expect("end_variable")?;
        variables.push(SasVariable { name, values });
    }

    let ngroups = lines.count()?;
    let mut mutex_groups = Vec::with_capacity(ngroups);
    for _ in 0..ngroups {
        lines.expect("begin_mutex_group")?;
        let k = lines.count()?;
        let group = (0..k)
            .map(|_| pair(&mut lines, &variables))
            .collect::<Result<Vec<_>>>()?;
        lines.expect("end_mutex_group")?;
        mutex_groups.push(group);
    }

    lines.expect("begin_state")?;
    let mut init = Vec::with_capacity(nvars);
    for v in 0..nvars {
        let val = lines.int()?;
        init.push(check_value(&lines, &variables, v as i64, val)?.1);
    }
    lines.expect("end_state")?;

    lines.expect("begin_goal")?;
    let ngoal = lines.count()?;
    let goal = (0..ngoal)
        .map(|_| pair(&mut lines, &variables))
        .collect::<Result<Vec<_>>>()?;
    lines.expect("end_goal")?;

    let nops = lines.count()?;
    let mut operators = Vec::with_capacity(nops);
    for _ in 0..nops {
        lines.expect("begin_operator")?;
        let name = lines.next()?.to_string();
        let mut transitions = Vec::new();
        let nprevail = lines.count()?;
        for _ in 0..nprevail {
            let (var, val) = pair(&mut lines, &variables)?;
            transitions.push(Transition {
                var,
                pre: Some(val),
                post: val,
            });
        }
        let neffects = lines.count()?;
        for _ in 0..neffects {
            let e = lines.ints()?;
            if e.first().copied().unwrap_or(-1) != 0 {
                if e.first().is_some_and(|&c| c > 0) {
                    return Err(PlanError::Unsupported("conditional effects".into()));
                }
                lines.pos -= 1;
                return Err(lines.err("malformed effect line"));
            }
            if e.len() != 4 {
                lines.pos -= 1;
                return Err(lines.err("expected `0 var pre post`"));
            }
            let var = check_value(&lines, &variables, e[1], e[3])?;
            let pre = if e[2] == -1 {
                None
            } else {
                Some(check_value(&lines, &variables, e[1], e[2])?.1)
            };
            transitions.push(Transition {
                var: var.0,
                pre,
                post: var.1,
            });
        }
        let cost = lines.int()?;
        if metric && cost != 1 {
            return Err(lines.err(format!("operator {name} has cost {cost}; only unit costs are supported")));
        }
        lines.expect("end_operator")?;
        operators.push(SasOperator { name, transitions });
    }

    let naxioms = lines.count()?;
    if naxioms != 0 {
        return Err(PlanError::Unsupported("axioms".into()));
    }
    if lines.pos != lines.lines.len() {
        return Err(lines.err("trailing content after axiom section"));
    }

    Ok(SasTask {
        variables,
        mutex_groups,
        operators,
        init,
        goal,
    })
}

impl SasTask {
    /// Index of the fact for `(var, value)` in [`sas_to_strips`] output.
    pub fn fact_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.variables.len());
        let mut next = 0;
        for v in &self.variables {
            offsets.push(next);
            next += v.domain_size();
        }
        offsets
    }
}

fn operator_name(name: &str) -> String {
    if name.starts_with('(') {
        name.to_string()
    } else {
        format!("({name})")
    }
}

/// One fact per (variable, value); variables become the fact groups.
pub fn sas_to_strips(task: &SasTask) -> StripsTask {
    let offsets = task.fact_offsets();
    let n: usize = task.variables.iter().map(SasVariable::domain_size).sum();
    let fact = |var: usize, val: usize| offsets[var] + val;

    let mut fact_names = Vec::with_capacity(n);
    let mut members = Vec::with_capacity(task.variables.len());
    for (v, var) in task.variables.iter().enumerate() {
        members.push((0..var.domain_size()).map(|k| fact(v, k)).collect());
        for value in &var.values {
            fact_names.push(format!("{}={}", var.name, value));
        }
    }

    let actions = task
        .operators
        .iter()
        .map(|op| {
            let mut pre = FactSet::new(n);
            let mut add = FactSet::new(n);
            let mut del = FactSet::new(n);
            for t in &op.transitions {
                if t.is_prevail() {
                    pre.insert(fact(t.var, t.post));
                    continue;
                }
                add.insert(fact(t.var, t.post));
                match t.pre {
                    Some(v) => {
                        pre.insert(fact(t.var, v));
                        del.insert(fact(t.var, v));
                    }
                    None => {
                        for k in 0..task.variables[t.var].domain_size() {
                            if k != t.post {
                                del.insert(fact(t.var, k));
                            }
                        }
                    }
                }
            }
            Action {
                name: operator_name(&op.name),
                pre,
                add,
                del,
                direction: Direction::Forward,
            }
        })
        .collect();

    let init = FactSet::from_indices(n, task.init.iter().enumerate().map(|(v, &k)| fact(v, k)));
    let goal = FactSet::from_indices(n, task.goal.iter().map(|&(v, k)| fact(v, k)));
    let names = task.variables.iter().map(|v| v.name.clone()).collect();
    StripsTask {
        groups: FactGroups::variables(names, members, n),
        fact_names,
        actions,
        init,
        goal,
    }
}

//! Global compilation context: every variable ever introduced, the map from
//! vector variables to their element variables, and instrumentation counters.

use std::collections::BTreeMap;
use std::fmt;

use crate::normalizer::{Level, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarKind {
    UserVector { size: u64 },
    UserReal,
    NetworkVector { role: Role, network: String, size: u64, application: usize },
    NetworkReal { role: Role, network: String, position: u64, application: usize },
}

impl VarKind {
    pub fn is_user(&self) -> bool {
        matches!(self, VarKind::UserVector { .. } | VarKind::UserReal)
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, VarKind::UserVector { .. } | VarKind::NetworkVector { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableRecord {
    pub level: Level,
    pub kind: VarKind,
    pub name: String,
    /// Owning vector variable and position, for element variables.
    pub parent: Option<(Level, usize)>,
}

/// One network application: its name and its input and output vector variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Application {
    pub network: String,
    pub input: Level,
    pub output: Level,
}

/// Work counters read by tests and the scaling benchmark.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Substitutions driven by a vector-level equality.
    pub vector_substitutions: usize,
    /// Substitutions driven by a scalar equality.
    pub scalar_substitutions: usize,
    /// Assertion and coefficient visits performed while substituting.
    pub substitution_visits: usize,
    pub fourier_motzkin_eliminations: usize,
    /// Leaves of a vector or index argument left blocked after unblocking.
    pub blocking_violations: usize,
    /// Calls that failed to unblock a non-compilable boolean.
    pub impossible_hits: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub vars: Vec<VariableRecord>,
    pub vector_vars: BTreeMap<Level, Vec<Level>>,
    pub applications: Vec<Application>,
    pub networks: BTreeMap<String, (u64, u64)>,
    pub stats: Stats,
}

impl Ctx {
    pub fn new(networks: BTreeMap<String, (u64, u64)>) -> Ctx {
        Ctx { networks, ..Ctx::default() }
    }

    pub fn depth(&self) -> usize {
        self.vars.len()
    }

    fn push(&mut self, kind: VarKind, name: String, parent: Option<(Level, usize)>) -> Level {
        let level = self.vars.len();
        self.vars.push(VariableRecord { level, kind, name, parent });
        level
    }

    /// Pushes a vector variable followed by its `size` element variables and
    /// returns the vector variable.
    pub fn add_vector_variable(&mut self, size: u64, kind: VarKind, name: impl Into<String>) -> Value {
        assert!(size >= 1, "vector variables have at least one element");
        assert!(kind.is_vector(), "{kind:?} is not a vector kind");
        let name = name.into();
        let element_kind = |position: u64| match &kind {
            VarKind::NetworkVector { role, network, application, .. } => {
                VarKind::NetworkReal { role: *role, network: network.clone(), position, application: *application }
            }
            _ => VarKind::UserReal,
        };
        let elements: Vec<VarKind> = (0..size).map(element_kind).collect();
        let v = self.push(kind, name.clone(), None);
        let levels =
            elements.into_iter().enumerate().map(|(i, k)| self.push(k, format!("{name}[{i}]"), Some((v, i)))).collect();
        self.vector_vars.insert(v, levels);
        Value::var(v)
    }

    pub fn add_real_variable(&mut self, name: impl Into<String>) -> Value {
        Value::var(self.push(VarKind::UserReal, name.into(), None))
    }

    /// Allocates the input and output vectors of a fresh application of
    /// `network` and returns them.
    pub fn add_application(&mut self, network: &str) -> (Value, Value) {
        let (m, n) = *self.networks.get(network).unwrap_or_else(|| panic!("undeclared network `{network}`"));
        let application = self.applications.len();
        let kind = |role, size| VarKind::NetworkVector { role, network: network.to_string(), size, application };
        let x = self.add_vector_variable(m, kind(Role::Input, m), format!("{network}#{application}.in"));
        let y = self.add_vector_variable(n, kind(Role::Output, n), format!("{network}#{application}.out"));
        let level = |v: &Value| match v {
            Value::Var(l, _) => *l,
            _ => unreachable!(),
        };
        self.applications.push(Application { network: network.to_string(), input: level(&x), output: level(&y) });
        (x, y)
    }

    pub fn record(&self, level: Level) -> &VariableRecord {
        &self.vars[level]
    }

    pub fn name(&self, level: Level) -> String {
        self.vars.get(level).map_or_else(|| format!("?{level}"), |r| r.name.clone())
    }

    pub fn elements(&self, level: Level) -> Option<&[Level]> {
        self.vector_vars.get(&level).map(Vec::as_slice)
    }

    pub fn is_user(&self, level: Level) -> bool {
        self.vars[level].kind.is_user()
    }

    /// Level density and coherence of the vector map with the stack.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, r) in self.vars.iter().enumerate() {
            if r.level != i {
                return Err(format!("record {i} has level {}", r.level));
            }
        }
        for (v, elems) in &self.vector_vars {
            let size = match &self.vars.get(*v).map(|r| &r.kind) {
                Some(VarKind::UserVector { size }) | Some(VarKind::NetworkVector { size, .. }) => *size,
                _ => return Err(format!("{v} is mapped but not a vector variable")),
            };
            if elems.len() as u64 != size {
                return Err(format!("vector {v} has {} elements, expected {size}", elems.len()));
            }
            for (i, e) in elems.iter().enumerate() {
                if *e != v + 1 + i || self.vars[*e].parent != Some((*v, i)) {
                    return Err(format!("element {i} of vector {v} is misplaced"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.vars {
            writeln!(f, "{:>4} {} {:?}", r.level, r.name, r.kind)?;
        }
        Ok(())
    }
}

/// Network input equalities recorded while unblocking one boolean value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EqualityLog(Vec<Value>);

impl EqualityLog {
    pub fn new() -> EqualityLog {
        EqualityLog(Vec::new())
    }

    pub fn log(&mut self, eq: Value) {
        debug_assert!(matches!(eq, Value::VectorEqual(..)), "only vector equalities are logged");
        self.0.push(eq);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Value] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Value> {
        self.0
    }
}

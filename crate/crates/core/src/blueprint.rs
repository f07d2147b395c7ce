//! Gadget blueprints: a small line-oriented text format describing nodes,
//! a gate schedule, bare C-Z edges, measurements and syndrome checks.
//!
//! ```text
//! NODE <id> <input|output|ancilla|internal> <l|l-1>
//! GATE <kind> <ids...>
//! BARECZ <id> <id>
//! MEASURE <X|Z> <ids...>
//! CHECK <name> <ids...> [logical]
//! ```
//!
//! Gate kinds: `PREP0 PREP+ RAW0 RAW+ TELE+ H S CZ CNOT VCZ1 VCZ2`. Blank
//! lines and `#` comments are ignored; anything else is an error.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::circuit::Basis;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Input,
    Output,
    Ancilla,
    Internal,
}

/// Node level relative to the gadget level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LevelRef {
    Same,
    Below,
}

impl LevelRef {
    pub fn resolve(self, level: u32) -> Option<u32> {
        match self {
            LevelRef::Same => Some(level),
            LevelRef::Below => level.checked_sub(1).filter(|&k| k >= 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub role: Role,
    pub level: LevelRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Prep0,
    PrepPlus,
    Raw0,
    RawPlus,
    TelePlus,
    H,
    S,
    Cz,
    Cnot,
    Vcz1,
    Vcz2,
}

impl GateKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "PREP0" => GateKind::Prep0,
            "PREP+" => GateKind::PrepPlus,
            "RAW0" => GateKind::Raw0,
            "RAW+" => GateKind::RawPlus,
            "TELE+" => GateKind::TelePlus,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "CZ" => GateKind::Cz,
            "CNOT" => GateKind::Cnot,
            "VCZ1" => GateKind::Vcz1,
            "VCZ2" => GateKind::Vcz2,
            _ => return None,
        })
    }

    pub fn is_preparation(self) -> bool {
        matches!(
            self,
            GateKind::Prep0 | GateKind::PrepPlus | GateKind::Raw0 | GateKind::RawPlus | GateKind::TelePlus
        )
    }

    pub fn is_two_node(self) -> bool {
        matches!(
            self,
            GateKind::Cz | GateKind::Cnot | GateKind::Vcz1 | GateKind::Vcz2
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Gate {
        kind: GateKind,
        nodes: Vec<usize>,
    },
    BareCz(usize, usize),
    Measure {
        basis: Basis,
        nodes: Vec<usize>,
    },
    Check {
        name: String,
        nodes: Vec<usize>,
        logical: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blueprint {
    pub name: String,
    pub nodes: Vec<Node>,
    pub steps: Vec<Step>,
}

impl Blueprint {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::BlueprintParse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| err(format!("unknown node `{id}`")))
            };
            match toks[0] {
                "NODE" => {
                    if toks.len() != 4 {
                        return Err(err("NODE takes <id> <role> <level>".into()));
                    }
                    let id = toks[1];
                    if id == "logical" || index.contains_key(id) {
                        return Err(err(format!("invalid or duplicate node id `{id}`")));
                    }
                    let role = match toks[2] {
                        "input" => Role::Input,
                        "output" => Role::Output,
                        "ancilla" => Role::Ancilla,
                        "internal" => Role::Internal,
                        r => return Err(err(format!("unknown role `{r}`"))),
                    };
                    let level = match toks[3] {
                        "l" => LevelRef::Same,
                        "l-1" => LevelRef::Below,
                        l => return Err(err(format!("unknown level `{l}`"))),
                    };
                    index.insert(id.to_string(), nodes.len());
                    nodes.push(Node {
                        id: id.to_string(),
                        role,
                        level,
                    });
                }
                "GATE" => {
                    if toks.len() < 3 {
                        return Err(err("GATE takes <kind> <ids...>".into()));
                    }
                    let kind = GateKind::parse(toks[1])
                        .ok_or_else(|| err(format!("unknown gate kind `{}`", toks[1])))?;
                    let ids = toks[2..].iter().map(|t| lookup(t)).collect::<Result<Vec<_>>>()?;
                    if kind.is_two_node() && ids.len() != 2 {
                        return Err(err(format!("{} takes exactly two nodes", toks[1])));
                    }
                    steps.push(Step::Gate { kind, nodes: ids });
                }
                "BARECZ" => {
                    if toks.len() != 3 {
                        return Err(err("BARECZ takes two nodes".into()));
                    }
                    steps.push(Step::BareCz(lookup(toks[1])?, lookup(toks[2])?));
                }
                "MEASURE" => {
                    if toks.len() < 3 {
                        return Err(err("MEASURE takes <X|Z> <ids...>".into()));
                    }
                    let basis = match toks[1] {
                        "X" => Basis::X,
                        "Z" => Basis::Z,
                        b => return Err(err(format!("unknown basis `{b}`"))),
                    };
                    let ids = toks[2..].iter().map(|t| lookup(t)).collect::<Result<Vec<_>>>()?;
                    steps.push(Step::Measure { basis, nodes: ids });
                }
                "CHECK" => {
                    let logical = toks.last() == Some(&"logical");
                    let end = if logical { toks.len() - 1 } else { toks.len() };
                    if end < 3 {
                        return Err(err("CHECK takes <name> <ids...> [logical]".into()));
                    }
                    let ids = toks[2..end]
                        .iter()
                        .map(|t| lookup(t))
                        .collect::<Result<Vec<_>>>()?;
                    steps.push(Step::Check {
                        name: toks[1].to_string(),
                        nodes: ids,
                        logical,
                    });
                }
                r => return Err(err(format!("unknown record `{r}`"))),
            }
        }
        let bp = Blueprint {
            name: name.to_string(),
            nodes,
            steps,
        };
        bp.structure()?;
        Ok(bp)
    }

    fn lint_err(&self, message: String) -> Error {
        Error::BlueprintLint {
            name: self.name.clone(),
            message,
        }
    }

    /// Schedule legality: preparation before use, nothing after a
    /// measurement, checks only on measured ancillas, matching levels.
    fn structure(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut live: Vec<bool> = self.nodes.iter().map(|nd| nd.role == Role::Input).collect();
        let mut measured = vec![false; n];
        let id = |i: usize| &self.nodes[i].id;
        for step in &self.steps {
            match step {
                Step::Gate { kind, nodes } => {
                    if kind.is_two_node() && (nodes[0] == nodes[1]) {
                        return Err(self.lint_err(format!("{kind:?} on `{}` twice", id(nodes[0]))));
                    }
                    for &i in nodes {
                        if measured[i] {
                            return Err(self.lint_err(format!("`{}` used after measurement", id(i))));
                        }
                        if kind.is_preparation() {
                            if live[i] {
                                return Err(self.lint_err(format!("`{}` prepared twice", id(i))));
                            }
                            live[i] = true;
                        } else if !live[i] {
                            return Err(self.lint_err(format!("`{}` used before preparation", id(i))));
                        }
                    }
                    if kind.is_two_node() && self.nodes[nodes[0]].level != self.nodes[nodes[1]].level {
                        return Err(self.lint_err(format!("{kind:?} joins nodes of different levels")));
                    }
                }
                Step::BareCz(a, b) => {
                    for &i in [a, b] {
                        if measured[i] || !live[i] {
                            return Err(self.lint_err(format!("bare C-Z on inactive `{}`", id(i))));
                        }
                    }
                    if a == b || self.nodes[*a].level != self.nodes[*b].level {
                        return Err(self.lint_err("bare C-Z needs two nodes of equal level".into()));
                    }
                }
                Step::Measure { nodes, .. } => {
                    for &i in nodes {
                        if measured[i] || !live[i] {
                            return Err(self.lint_err(format!("cannot measure `{}` here", id(i))));
                        }
                        measured[i] = true;
                    }
                }
                Step::Check { nodes, name, .. } => {
                    for &i in nodes {
                        if !measured[i] || self.nodes[i].role != Role::Ancilla {
                            return Err(self.lint_err(format!(
                                "check `{name}` reads `{}`, which is not a measured ancilla",
                                id(i)
                            )));
                        }
                    }
                    if nodes
                        .iter()
                        .any(|&i| self.nodes[i].level != self.nodes[nodes[0]].level)
                    {
                        return Err(self.lint_err(format!("check `{name}` mixes levels")));
                    }
                }
            }
        }
        for (i, nd) in self.nodes.iter().enumerate() {
            if !live[i] {
                return Err(self.lint_err(format!("`{}` is never prepared", nd.id)));
            }
            if nd.role == Role::Ancilla && !measured[i] {
                return Err(self.lint_err(format!("ancilla `{}` is never measured", nd.id)));
            }
        }
        Ok(())
    }

    /// The gadget invariants: at most one bare C-Z per node, and at least two
    /// checkpoints after the last entangling gate of every live output.
    pub fn lint(&self) -> Result<()> {
        self.structure()?;
        let n = self.nodes.len();
        let mut bare = vec![0usize; n];
        let mut credit = vec![0usize; n];
        let mut measured = vec![false; n];
        // data nodes each ancilla has been coupled to
        let mut coupled: Vec<Vec<usize>> = vec![Vec::new(); n];
        let is_anc = |i: usize| self.nodes[i].role == Role::Ancilla;
        for step in &self.steps {
            match step {
                Step::BareCz(a, b) => {
                    for &i in [a, b] {
                        bare[i] += 1;
                        if bare[i] > 1 {
                            return Err(
                                self.lint_err(format!("`{}` has more than one bare C-Z", self.nodes[i].id))
                            );
                        }
                        credit[i] = 0;
                    }
                }
                Step::Gate { kind, nodes } => match kind {
                    GateKind::Vcz1 | GateKind::Vcz2 => {
                        let c = if *kind == GateKind::Vcz1 { 1 } else { 2 };
                        credit[nodes[0]] = c;
                        credit[nodes[1]] = c;
                    }
                    GateKind::Cz | GateKind::Cnot => {
                        let (a, b) = (nodes[0], nodes[1]);
                        match (is_anc(a), is_anc(b)) {
                            (false, false) => {
                                credit[a] = 0;
                                credit[b] = 0;
                            }
                            (true, false) => coupled[a].push(b),
                            (false, true) => coupled[b].push(a),
                            (true, true) => {
                                let extra = coupled[b].clone();
                                coupled[a].extend(extra);
                            }
                        }
                    }
                    _ => {}
                },
                Step::Measure { nodes, .. } => {
                    for &i in nodes {
                        measured[i] = true;
                    }
                }
                Step::Check { nodes, .. } => {
                    let mut hit: Vec<usize> = nodes.iter().flat_map(|&i| coupled[i].clone()).collect();
                    hit.sort_unstable();
                    hit.dedup();
                    for d in hit {
                        credit[d] += 1;
                    }
                }
            }
        }
        for (i, nd) in self.nodes.iter().enumerate() {
            if nd.role == Role::Output && !measured[i] && credit[i] < 2 {
                return Err(self.lint_err(format!(
                    "output `{}` has {} checkpoint(s) after its last entangling gate",
                    nd.id, credit[i]
                )));
            }
        }
        Ok(())
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn outputs(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].role == Role::Output)
            .collect()
    }

    pub fn inputs(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].role == Role::Input)
            .collect()
    }
}

impl fmt::Display for Blueprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} nodes, {} steps)",
            self.name,
            self.nodes.len(),
            self.steps.len()
        )
    }
}

const SHIPPED: [(&str, &str); 8] = [
    ("hexa", include_str!("../blueprints/hexa.bp")),
    ("cz_single", include_str!("../blueprints/cz_single.bp")),
    ("cz_double", include_str!("../blueprints/cz_double.bp")),
    ("encode_zero", include_str!("../blueprints/encode_zero.bp")),
    ("encode_plus", include_str!("../blueprints/encode_plus.bp")),
    ("encode_zero_l1", include_str!("../blueprints/encode_zero_l1.bp")),
    ("encode_plus_l1", include_str!("../blueprints/encode_plus_l1.bp")),
    ("readout", include_str!("../blueprints/readout.bp")),
];

/// The blueprints compiled into the library, parsed and linted once.
pub fn shipped() -> &'static HashMap<&'static str, Blueprint> {
    static CELL: OnceLock<HashMap<&'static str, Blueprint>> = OnceLock::new();
    CELL.get_or_init(|| {
        SHIPPED
            .iter()
            .map(|(name, text)| {
                let bp = Blueprint::parse(name, text)
                    .and_then(|bp| bp.lint().map(|_| bp))
                    .unwrap_or_else(|e| panic!("shipped blueprint {name}: {e}"));
                (*name, bp)
            })
            .collect()
    })
}

pub fn shipped_names() -> impl Iterator<Item = &'static str> {
    SHIPPED.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Result<&'static Blueprint> {
    shipped()
        .get(name)
        .ok_or_else(|| Error::UnknownGadget(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_shipped_blueprints_lint() {
        for name in shipped_names() {
            get(name).unwrap().lint().unwrap();
        }
        assert_eq!(shipped().len(), 8);
    }

    #[test]
    fn hexa_uses_two_single_and_three_double() {
        let bp = get("hexa").unwrap();
        let count = |k| {
            bp.steps
                .iter()
                .filter(|s| matches!(s, Step::Gate { kind, .. } if *kind == k))
                .count()
        };
        assert_eq!(count(GateKind::Vcz1), 2);
        assert_eq!(count(GateKind::Vcz2), 3);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Blueprint::parse("x", "NODE a input l\nFOO a\n").unwrap_err();
        assert_eq!(
            e,
            Error::BlueprintParse {
                line: 2,
                message: "unknown record `FOO`".into()
            }
        );
        assert!(Blueprint::parse("x", "NODE a input q").is_err());
        assert!(Blueprint::parse("x", "NODE a input l\nGATE CZ a b").is_err());
        assert!(Blueprint::parse("x", "NODE a input l\nGATE FLY a").is_err());
    }

    #[test]
    fn lint_rejects_double_bare_edges() {
        let text = "NODE a input l\nNODE b input l\nNODE c input l\nBARECZ a b\nBARECZ a c\n";
        let bp = Blueprint::parse("x", text).unwrap();
        assert!(matches!(bp.lint(), Err(Error::BlueprintLint { .. })));
    }

    #[test]
    fn lint_rejects_underverified_output() {
        let text = "NODE a output l\nNODE b output l\nGATE PREP+ a b\nGATE VCZ2 a b\nGATE VCZ1 a b\n";
        let bp = Blueprint::parse("x", text).unwrap();
        assert!(bp.lint().is_err());
    }

    #[test]
    fn structure_rejects_use_after_measure() {
        let text = "NODE a ancilla l\nGATE PREP0 a\nMEASURE Z a\nGATE H a\n";
        assert!(Blueprint::parse("x", text).is_err());
        let unmeasured = "NODE a ancilla l\nGATE PREP0 a\n";
        assert!(Blueprint::parse("x", unmeasured).is_err());
    }
}

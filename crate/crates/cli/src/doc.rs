//! JSON documents for arenas and certificates.

use std::collections::{BTreeMap, HashMap};

use quantgame::arena::{format_rational, parse_rational, ArenaBuilder};
use quantgame::equilibrium::EquilibriumCertificate;
use quantgame::verifier::{Verdict, VerificationReport};
use quantgame::{Cost, GameArena, Lasso, Objective, ObjectiveKind, PlayerId, Rational, StrategyAutomaton, Vertex};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

fn schema() -> u32 {
    SCHEMA
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Reach,
    Safety,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDoc {
    pub objective: Kind,
    #[serde(default)]
    pub target: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: String,
    /// 1-based player number.
    pub owner: usize,
}

/// An integer or a fraction written as `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    fn from_rational(r: &Rational) -> Number {
        if r.is_integer() {
            Number::Int(r.to_integer())
        } else {
            Number::Text(format_rational(r))
        }
    }

    fn to_rational(&self) -> Option<Rational> {
        match self {
            Number::Int(n) => Some(Rational::from_integer(*n)),
            Number::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<Number>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaDocument {
    #[serde(default = "schema")]
    pub schema: u32,
    pub players: Vec<PlayerDoc>,
    pub vertices: Vec<VertexDoc>,
    pub initial: String,
    pub edges: Vec<EdgeDoc>,
}

/// Why a document could not be turned into library values.
#[derive(Debug)]
pub struct DocError(pub String);

impl std::fmt::Display for DocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, DocError> {
    Err(DocError(msg.into()))
}

fn lookup(ids: &HashMap<&str, Vertex>, name: &str) -> Result<Vertex, DocError> {
    ids.get(name).copied().ok_or_else(|| DocError(format!("unknown vertex {name:?}")))
}

impl ArenaDocument {
    pub fn from_arena(g: &GameArena) -> Self {
        let name = |v: Vertex| g.name(v).to_string();
        ArenaDocument {
            schema: SCHEMA,
            players: g
                .objectives()
                .iter()
                .map(|o| PlayerDoc {
                    objective: match o.kind {
                        ObjectiveKind::Reach => Kind::Reach,
                        ObjectiveKind::Safety => Kind::Safety,
                    },
                    target: o.target.iter().map(|&v| name(v)).collect(),
                })
                .collect(),
            vertices: g.vertices().map(|v| VertexDoc { id: name(v), owner: g.owner(v).0 + 1 }).collect(),
            initial: name(g.initial()),
            edges: g
                .edges()
                .map(|(u, v)| EdgeDoc {
                    from: name(u),
                    to: name(v),
                    costs: g.cost_tuple(u, v).map(|t| t.iter().map(Number::from_rational).collect()),
                })
                .collect(),
        }
    }

    /// Builds the arena; structural problems such as dead ends are left to
    /// [`GameArena::validate`].
    pub fn to_arena(&self) -> Result<GameArena, DocError> {
        if self.schema != SCHEMA {
            return err(format!("unsupported schema version {}", self.schema));
        }
        let mut b = ArenaBuilder::new();
        let mut ids: HashMap<&str, Vertex> = HashMap::new();
        let players: Vec<PlayerId> = self
            .players
            .iter()
            .map(|pd| {
                b.player(match pd.objective {
                    Kind::Reach => Objective::reach([]),
                    Kind::Safety => Objective::safety([]),
                })
            })
            .collect();
        for vd in &self.vertices {
            if vd.owner == 0 || vd.owner > players.len() {
                return err(format!("vertex {:?} has unknown owner {}", vd.id, vd.owner));
            }
            let v = b.vertex(vd.id.clone(), players[vd.owner - 1]);
            if ids.insert(&vd.id, v).is_some() {
                return err(format!("duplicate vertex {:?}", vd.id));
            }
        }
        for (p, pd) in players.iter().zip(&self.players) {
            let target = pd.target.iter().map(|t| lookup(&ids, t)).collect::<Result<Vec<_>, _>>()?;
            b.target_mut(*p).extend(target);
        }
        b.initial(lookup(&ids, &self.initial)?);
        for e in &self.edges {
            let (u, v) = (lookup(&ids, &e.from)?, lookup(&ids, &e.to)?);
            match &e.costs {
                None => {
                    b.edge(u, v);
                }
                Some(cs) => {
                    let costs = cs
                        .iter()
                        .map(|c| c.to_rational().ok_or_else(|| DocError(format!("bad cost {c:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    b.weighted_edge(u, v, costs);
                }
            }
        }
        Ok(b.build())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDoc {
    /// 1-based player number.
    pub player: usize,
    pub states: usize,
    #[serde(default)]
    pub initial: usize,
    /// Per state, the next state after reading each vertex; missing entries keep the state.
    #[serde(default)]
    pub update: Vec<BTreeMap<String, usize>>,
    /// Per state, the move at each owned vertex; missing entries take the lowest successor.
    pub output: Vec<BTreeMap<String, String>>,
}

impl AutomatonDoc {
    pub fn from_automaton(g: &GameArena, a: &StrategyAutomaton) -> Self {
        let states = a.num_states();
        AutomatonDoc {
            player: a.player().0 + 1,
            states,
            initial: a.initial(),
            update: (0..states)
                .map(|q| {
                    g.vertices()
                        .filter_map(|v| a.defined_update(q, v).map(|t| (g.name(v).to_string(), t)))
                        .collect()
                })
                .collect(),
            output: (0..states)
                .map(|q| {
                    g.vertices()
                        .filter_map(|v| a.defined_output(q, v).map(|w| (g.name(v).to_string(), g.name(w).to_string())))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_automaton(&self, g: &GameArena) -> Result<StrategyAutomaton, DocError> {
        if self.player == 0 || self.player > g.num_players() {
            return err(format!("automaton for unknown player {}", self.player));
        }
        if self.states == 0 || self.initial >= self.states {
            return err("automaton needs at least one state and a valid initial state");
        }
        if self.update.len() > self.states || self.output.len() > self.states {
            return err("automaton tables list more states than declared");
        }
        let ids: HashMap<&str, Vertex> = g.vertices().map(|v| (g.name(v), v)).collect();
        let mut a = StrategyAutomaton::new(PlayerId(self.player - 1), g.num_vertices(), self.states, self.initial);
        for (q, row) in self.update.iter().enumerate() {
            for (v, &t) in row {
                if t >= self.states {
                    return err(format!("update to unknown state {t}"));
                }
                a.set_update(q, lookup(&ids, v)?, t);
            }
        }
        for (q, row) in self.output.iter().enumerate() {
            for (v, w) in row {
                a.set_output(q, lookup(&ids, v)?, lookup(&ids, w)?);
            }
        }
        Ok(a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoDoc {
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

impl LassoDoc {
    pub fn from_lasso(g: &GameArena, l: &Lasso) -> Self {
        let names = |s: &[Vertex]| s.iter().map(|&v| g.name(v).to_string()).collect();
        LassoDoc { stem: names(l.stem()), cycle: names(l.cycle()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDoc {
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    pub gamma: Vec<String>,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictDoc {
    pub player: usize,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<LassoDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub kind: String,
    pub outcome: LassoDoc,
    pub costs: Vec<String>,
    pub verdicts: Vec<VerdictDoc>,
}

pub fn costs_doc(costs: &[Cost]) -> Vec<String> {
    costs.iter().map(ToString::to_string).collect()
}

impl ReportDoc {
    pub fn from_report(g: &GameArena, r: &VerificationReport) -> Self {
        ReportDoc {
            kind: r.kind.to_string(),
            outcome: LassoDoc::from_lasso(g, &r.outcome),
            costs: costs_doc(&r.costs),
            verdicts: r
                .verdicts
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Verdict::Ok => VerdictDoc { player: i + 1, ok: true, witness: None, costs: None },
                    Verdict::ProfitableDeviation { witness, costs } => VerdictDoc {
                        player: i + 1,
                        ok: false,
                        witness: Some(LassoDoc::from_lasso(g, witness)),
                        costs: Some(costs_doc(costs)),
                    },
                })
                .collect(),
        }
    }
}

/// A strategy profile, optionally with the facts established about it.
///
/// Only `automata` is needed to load a profile; the other fields are
/// informative and recomputed on verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    #[serde(default = "schema")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub automata: Vec<AutomatonDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<LassoDoc>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub eq_type: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportDoc>,
}

impl CertificateDocument {
    pub fn from_certificate(g: &GameArena, c: &EquilibriumCertificate) -> Self {
        let names = |s: &[Vertex]| s.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();
        CertificateDocument {
            schema: SCHEMA,
            kind: Some(c.kind.to_string()),
            automata: c.profile.iter().map(|a| AutomatonDoc::from_automaton(g, a)).collect(),
            outcome: Some(LassoDoc::from_lasso(g, &c.outcome)),
            eq_type: Some(c.eq_type.iter().map(|p| p.0 + 1).collect()),
            costs: Some(costs_doc(&c.costs)),
            depth: Some(c.depth),
            slice: c.slice.as_ref().map(|s| SliceDoc {
                alpha: names(&s.alpha),
                beta: names(&s.beta),
                gamma: names(&s.gamma),
                l: s.l,
            }),
            report: Some(ReportDoc::from_report(g, &c.report)),
        }
    }

    pub fn profile(&self, g: &GameArena) -> Result<Vec<StrategyAutomaton>, DocError> {
        if self.schema != SCHEMA {
            return err(format!("unsupported schema version {}", self.schema));
        }
        let mut profile: Vec<Option<StrategyAutomaton>> = vec![None; g.num_players()];
        for d in &self.automata {
            let a = d.to_automaton(g)?;
            let slot = &mut profile[d.player - 1];
            if slot.is_some() {
                return err(format!("two automata for player {}", d.player));
            }
            *slot = Some(a);
        }
        profile
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| DocError(format!("no automaton for player {}", i + 1))))
            .collect()
    }
}

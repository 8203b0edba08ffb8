//! Role-consistency vetoes.
//!
//! A ruleset is an ordered list of hard negative constraints; the first rule
//! that fires names the veto. Rulesets load from JSON:
//!
//! ```json
//! {
//!   "rules": [
//!     {"id": "R1", "description": "...", "kind": "same_event_veto"},
//!     {"id": "R2", "description": "...", "kind": "terminal_role_veto", "roles": ["deceased"]},
//!     {"id": "R3", "description": "...", "kind": "role_pair_window_veto",
//!      "roles": [["husband"], ["father@marriage"]], "window_years": 10}
//!   ],
//!   "hierarchy": ["husband", "wife", "father"]
//! }
//! ```
//!
//! A role pattern is a role label, optionally qualified with `@<event type>`.
//! Labels outside the built-in vocabulary are written `other:<label>`.
//!
//! For `role_pair_window_veto` the first list is the earlier side: the rule
//! fires when one mention matches the first list, the other matches the
//! second, and the second is dated between 0 and `window_years` years after
//! the first. Without `window_years` the dates are not consulted.
//! `terminal_role_veto` fires when one mention matches and the other is dated
//! strictly later.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, Event, EventType, PersonRecord, Role};

/// A role, optionally restricted to one event type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RolePattern {
    pub role: Role,
    pub event_type: Option<EventType>,
}

impl RolePattern {
    pub fn parse(raw: &str) -> Result<Self> {
        let (role, event_type) = match raw.split_once('@') {
            Some((r, e)) => (r, Some(EventType::parse_strict(e)?)),
            None => (raw, None),
        };
        Ok(Self { role: Role::parse_strict(role)?, event_type })
    }

    fn matches(&self, m: &Mention<'_>) -> bool {
        self.role == m.person.role && self.event_type.as_ref().is_none_or(|t| *t == m.event.event_type)
    }

    fn to_label(&self) -> String {
        let role = match &self.role {
            Role::Other(l) => format!("other:{l}"),
            r => r.label().to_owned(),
        };
        match &self.event_type {
            Some(t) => format!("{role}@{t}"),
            None => role,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// Two mentions from the same event never merge.
    SameEvent,
    /// A mention in a terminal role vetoes any strictly later mention.
    TerminalRole { roles: Vec<RolePattern> },
    /// An `earlier` mention vetoes a `later` one dated within the window after it.
    RolePairWindow { earlier: Vec<RolePattern>, later: Vec<RolePattern>, window_years: Option<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleRule {
    pub id: String,
    pub description: String,
    pub kind: RuleKind,
}

/// A person mention with its event, as seen by the rules.
#[derive(Clone, Copy, Debug)]
pub struct Mention<'a> {
    pub person: &'a PersonRecord,
    pub event: &'a Event,
}

impl Mention<'_> {
    fn year(&self) -> i32 {
        self.event.date.year()
    }
}

impl RoleRule {
    /// Whether the rule vetoes the pair; symmetric in `a` and `b`.
    pub fn fires(&self, a: &Mention<'_>, b: &Mention<'_>) -> bool {
        match &self.kind {
            RuleKind::SameEvent => a.event.event_id == b.event.event_id,
            RuleKind::TerminalRole { roles } => {
                let terminal =
                    |x: &Mention<'_>, y: &Mention<'_>| y.year() > x.year() && roles.iter().any(|r| r.matches(x));
                terminal(a, b) || terminal(b, a)
            }
            RuleKind::RolePairWindow { earlier, later, window_years } => {
                let directed = |x: &Mention<'_>, y: &Mention<'_>| {
                    earlier.iter().any(|r| r.matches(x))
                        && later.iter().any(|r| r.matches(y))
                        && window_years.is_none_or(|w| {
                            let gap = i64::from(y.year()) - i64::from(x.year());
                            (0..=i64::from(w)).contains(&gap)
                        })
                };
                directed(a, b) || directed(b, a)
            }
        }
    }
}

/// Ordered vetoes plus a role hierarchy (most likely to match first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleRuleSet {
    rules: Vec<RoleRule>,
    hierarchy: Vec<Role>,
}

pub const DEFAULT_HUSBAND_FATHER_WINDOW: u32 = 10;

impl RoleRuleSet {
    pub fn new(rules: Vec<RoleRule>, hierarchy: Vec<Role>) -> Result<Self> {
        let mut ids = HashSet::new();
        for r in &rules {
            if r.id.trim().is_empty() {
                return Err(Error::Config("rule with empty id".into()));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Config(format!("duplicate rule id {:?}", r.id)));
            }
            match &r.kind {
                RuleKind::SameEvent => {}
                RuleKind::TerminalRole { roles } if roles.is_empty() => {
                    return Err(Error::Config(format!("rule {}: terminal_role_veto needs at least one role", r.id)));
                }
                RuleKind::RolePairWindow { earlier, later, .. } if earlier.is_empty() || later.is_empty() => {
                    return Err(Error::Config(format!(
                        "rule {}: role_pair_window_veto needs two non-empty role lists",
                        r.id
                    )));
                }
                _ => {}
            }
        }
        let mut seen = HashSet::new();
        for role in &hierarchy {
            if !seen.insert(role) {
                return Err(Error::Config(format!("role {role} appears twice in the hierarchy")));
            }
        }
        Ok(Self { rules, hierarchy })
    }

    pub fn empty() -> Self {
        Self { rules: Vec::new(), hierarchy: Vec::new() }
    }

    /// Same-event, burial, husband/father and marrying-couple/parent vetoes.
    pub fn builtin() -> Self {
        let p = |s: &str| RolePattern::parse(s).expect("built-in pattern");
        let rules = vec![
            RoleRule {
                id: "R1".into(),
                description: "two mentions in the same event are different people".into(),
                kind: RuleKind::SameEvent,
            },
            RoleRule {
                id: "R2".into(),
                description: "nobody appears in a record dated after their burial".into(),
                kind: RuleKind::TerminalRole { roles: vec![p("deceased")] },
            },
            RoleRule {
                id: "R3".into(),
                description: "a husband is not the father of a bride or groom a few years later".into(),
                kind: RuleKind::RolePairWindow {
                    earlier: vec![p("husband")],
                    later: vec![p("father@marriage")],
                    window_years: Some(DEFAULT_HUSBAND_FATHER_WINDOW),
                },
            },
            RoleRule {
                id: "R4".into(),
                description: "a bride or groom is never a parent in a marriage record".into(),
                kind: RuleKind::RolePairWindow {
                    earlier: vec![p("bride"), p("groom")],
                    later: vec![p("father@marriage"), p("mother@marriage")],
                    window_years: None,
                },
            },
        ];
        let hierarchy = [
            Role::Husband,
            Role::Wife,
            Role::Groom,
            Role::Bride,
            Role::Baptized,
            Role::Deceased,
            Role::Father,
            Role::Mother,
            Role::Child,
            Role::Godparent,
            Role::Witness,
            Role::Clergy,
        ]
        .to_vec();
        Self::new(rules, hierarchy).expect("built-in ruleset is valid")
    }

    pub fn rules(&self) -> &[RoleRule] {
        &self.rules
    }

    pub fn hierarchy(&self) -> &[Role] {
        &self.hierarchy
    }

    /// Position in the hierarchy; unlisted roles rank last.
    pub fn hierarchy_rank(&self, role: &Role) -> usize {
        self.hierarchy.iter().position(|r| r == role).unwrap_or(self.hierarchy.len())
    }

    /// First rule, in declared order, that vetoes the pair.
    pub fn first_veto(&self, a: &Mention<'_>, b: &Mention<'_>) -> Option<&RoleRule> {
        self.rules.iter().find(|r| r.fires(a, b))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: RuleSetFile = serde_json::from_str(s)?;
        file.into_ruleset()
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let file: RuleSetFile = serde_json::from_reader(reader)?;
        file.into_ruleset()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_reader(std::io::BufReader::new(f)).map_err(|e| e.with_path(path))
    }

    pub fn to_json_string(&self) -> String {
        let file = RuleSetFile {
            rules: self.rules.iter().map(RuleEntry::from_rule).collect(),
            hierarchy: self
                .hierarchy
                .iter()
                .map(|r| RolePattern { role: r.clone(), event_type: None }.to_label())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("ruleset serializes")
    }
}

/// Returns the id of the first rule vetoing `a` and `b`, if any.
pub fn evaluate_rules<'r>(
    a: &PersonRecord,
    b: &PersonRecord,
    corpus: &Corpus,
    ruleset: &'r RoleRuleSet,
) -> Option<&'r str> {
    let ma = Mention { person: a, event: corpus.event_of(a) };
    let mb = Mention { person: b, event: corpus.event_of(b) };
    ruleset.first_veto(&ma, &mb).map(|r| r.id.as_str())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleSetFile {
    rules: Vec<RuleEntry>,
    #[serde(default)]
    hierarchy: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    id: String,
    #[serde(default)]
    description: String,
    kind: String,
    #[serde(default, skip_serializing_if = "RolesField::is_empty")]
    roles: RolesField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window_years: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RolesField {
    Flat(Vec<String>),
    Pair(Vec<Vec<String>>),
}

impl Default for RolesField {
    fn default() -> Self {
        RolesField::Flat(Vec::new())
    }
}

impl RolesField {
    fn is_empty(&self) -> bool {
        matches!(self, RolesField::Flat(v) if v.is_empty())
    }
}

fn parse_patterns(labels: &[String]) -> Result<Vec<RolePattern>> {
    labels.iter().map(|l| RolePattern::parse(l)).collect()
}

impl RuleEntry {
    fn into_rule(self) -> Result<RoleRule> {
        let err = |msg: &str| Error::Config(format!("rule {}: {msg}", self.id));
        let kind = match self.kind.as_str() {
            "same_event_veto" => {
                if !self.roles.is_empty() || self.window_years.is_some() {
                    return Err(err("same_event_veto takes no roles or window_years"));
                }
                RuleKind::SameEvent
            }
            "terminal_role_veto" => {
                if self.window_years.is_some() {
                    return Err(err("terminal_role_veto takes no window_years"));
                }
                match &self.roles {
                    RolesField::Flat(v) => {
                        RuleKind::TerminalRole { roles: parse_patterns(v).map_err(|e| err(&e.to_string()))? }
                    }
                    RolesField::Pair(_) => return Err(err("terminal_role_veto expects a flat list of roles")),
                }
            }
            "role_pair_window_veto" => match &self.roles {
                RolesField::Pair(sides) if sides.len() == 2 => RuleKind::RolePairWindow {
                    earlier: parse_patterns(&sides[0]).map_err(|e| err(&e.to_string()))?,
                    later: parse_patterns(&sides[1]).map_err(|e| err(&e.to_string()))?,
                    window_years: self.window_years,
                },
                _ => return Err(err("role_pair_window_veto expects roles as two lists")),
            },
            other => return Err(err(&format!("unknown kind {other:?}"))),
        };
        Ok(RoleRule { id: self.id, description: self.description, kind })
    }

    fn from_rule(rule: &RoleRule) -> Self {
        let labels = |v: &[RolePattern]| v.iter().map(RolePattern::to_label).collect::<Vec<_>>();
        let (kind, roles, window_years) = match &rule.kind {
            RuleKind::SameEvent => ("same_event_veto", RolesField::default(), None),
            RuleKind::TerminalRole { roles } => ("terminal_role_veto", RolesField::Flat(labels(roles)), None),
            RuleKind::RolePairWindow { earlier, later, window_years } => {
                ("role_pair_window_veto", RolesField::Pair(vec![labels(earlier), labels(later)]), *window_years)
            }
        };
        RuleEntry { id: rule.id.clone(), description: rule.description.clone(), kind: kind.into(), roles, window_years }
    }
}

impl RuleSetFile {
    fn into_ruleset(self) -> Result<RoleRuleSet> {
        let rules = self.rules.into_iter().map(RuleEntry::into_rule).collect::<Result<Vec<_>>>()?;
        let hierarchy = self.hierarchy.iter().map(|l| Role::parse_strict(l)).collect::<Result<Vec<_>>>()?;
        RoleRuleSet::new(rules, hierarchy)
    }
}

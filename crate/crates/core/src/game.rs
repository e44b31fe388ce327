//! Single-selection coverage games with compromised agents.
//!
//! Every agent picks exactly one resource from its action set. The system
//! welfare is the total value of the *distinct* resources covered. Normal
//! agents are scored by their marginal contribution to welfare; compromised
//! agents cannot observe anybody else and score a choice by the raw value of
//! the resource.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching;

/// Welfare and utility units.
pub type Value = f64;

/// Absolute tolerance used for every tie, argmax and equilibrium comparison.
pub const EPS: Value = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub id: String,
    pub value: Value,
}

impl Resource {
    pub fn new(id: impl Into<String>, value: Value) -> Self {
        Resource {
            id: id.into(),
            value,
        }
    }
}

/// An agent with its admissible actions, stored as indices into the game's
/// resource list.
#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub id: String,
    pub actions: Vec<usize>,
    pub compromised: bool,
}

impl Agent {
    pub fn new(id: impl Into<String>, actions: Vec<usize>, compromised: bool) -> Self {
        Agent {
            id: id.into(),
            actions,
            compromised,
        }
    }
}

/// A validated coverage game. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    resources: Vec<Resource>,
    agents: Vec<Agent>,
}

/// One resource index per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(pub Vec<usize>);

impl ActionProfile {
    pub fn new(choices: Vec<usize>) -> Self {
        ActionProfile(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// A copy of this profile with agent `agent` switched to `resource`.
    pub fn with_choice(&self, agent: usize, resource: usize) -> Self {
        let mut choices = self.0.clone();
        choices[agent] = resource;
        ActionProfile(choices)
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl Game {
    /// Builds a game, rejecting structural problems and negative values.
    /// Regularity (a reachable value-1 resource) is only a warning; see
    /// [`Game::validate`].
    pub fn new(resources: Vec<Resource>, agents: Vec<Agent>) -> Result<Self> {
        let report = validate(&resources, &agents);
        if let Some(msg) = report.errors().next() {
            return Err(Error::InvalidGame(msg.to_string()));
        }
        Ok(Game { resources, agents })
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn value(&self, resource: usize) -> Value {
        self.resources[resource].value
    }

    pub fn values(&self) -> Vec<Value> {
        self.resources.iter().map(|r| r.value).collect()
    }

    pub fn action_set(&self, agent: usize) -> &[usize] {
        &self.agents[agent].actions
    }

    pub fn is_compromised(&self, agent: usize) -> bool {
        self.agents[agent].compromised
    }

    /// Indices of compromised agents, in agent order.
    pub fn compromised(&self) -> Vec<usize> {
        (0..self.agents.len())
            .filter(|&i| self.agents[i].compromised)
            .collect()
    }

    pub fn num_compromised(&self) -> usize {
        self.agents.iter().filter(|a| a.compromised).count()
    }

    /// Same structure, different resource values.
    pub fn with_values(&self, values: &[Value]) -> Result<Game> {
        if values.len() != self.resources.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                self.resources.len(),
                values.len()
            )));
        }
        let resources = self
            .resources
            .iter()
            .zip(values)
            .map(|(r, &v)| Resource::new(r.id.clone(), v))
            .collect();
        Game::new(resources, self.agents.clone())
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.resources, &self.agents)
    }

    pub fn check_profile(&self, profile: &ActionProfile) -> Result<()> {
        if profile.len() != self.agents.len() {
            return Err(Error::ProfileLength {
                expected: self.agents.len(),
                got: profile.len(),
            });
        }
        for (agent, &resource) in profile.choices().iter().enumerate() {
            if !self.agents[agent].actions.contains(&resource) {
                return Err(Error::ChoiceOutsideActionSet { agent, resource });
            }
        }
        Ok(())
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.agents.len() {
            return Err(Error::NoSuchAgent(agent));
        }
        Ok(())
    }

    /// Total value of the resources selected in `profile`, each counted once.
    pub fn welfare(&self, profile: &ActionProfile) -> Result<Value> {
        self.check_profile(profile)?;
        Ok(self.covered_value(profile.choices().iter().copied()))
    }

    /// Welfare of the profile with `agent` removed, i.e. W(∅, a_{-i}).
    pub fn welfare_without(&self, agent: usize, profile: &ActionProfile) -> Result<Value> {
        self.check_agent(agent)?;
        self.check_profile(profile)?;
        Ok(self.covered_value(
            profile
                .choices()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != agent)
                .map(|(_, &r)| r),
        ))
    }

    pub(crate) fn covered_value(&self, choices: impl Iterator<Item = usize>) -> Value {
        let mut seen = HashSet::new();
        choices
            .filter(|r| seen.insert(*r))
            .map(|r| self.resources[r].value)
            .sum()
    }

    /// Marginal-contribution utility W(a) - W(∅, a_{-i}).
    pub fn marginal_utility(&self, agent: usize, profile: &ActionProfile) -> Result<Value> {
        self.check_agent(agent)?;
        self.check_profile(profile)?;
        Ok(self.marginal_unchecked(agent, profile.choices()))
    }

    /// Coverage specialization of the marginal contribution: the value of
    /// the chosen resource if nobody else covers it, zero otherwise.
    pub(crate) fn marginal_unchecked(&self, agent: usize, choices: &[usize]) -> Value {
        let r = choices[agent];
        let shared = choices
            .iter()
            .enumerate()
            .any(|(j, &other)| j != agent && other == r);
        if shared {
            0.0
        } else {
            self.resources[r].value
        }
    }

    /// Utility a compromised agent perceives: the raw value of its choice.
    pub fn compromised_utility(&self, agent: usize, profile: &ActionProfile) -> Result<Value> {
        self.check_agent(agent)?;
        self.check_profile(profile)?;
        if !self.agents[agent].compromised {
            return Err(Error::NotCompromised(agent));
        }
        Ok(self.resources[profile.choices()[agent]].value)
    }

    /// Dispatches to the compromised or marginal-contribution utility.
    pub fn utility(&self, agent: usize, profile: &ActionProfile) -> Result<Value> {
        self.check_agent(agent)?;
        if self.agents[agent].compromised {
            self.compromised_utility(agent, profile)
        } else {
            self.marginal_utility(agent, profile)
        }
    }

    /// Maximum welfare over all joint actions, computed as a maximum-weight
    /// agent/resource matching rather than by enumeration.
    pub fn max_welfare(&self) -> Value {
        let weights: Vec<Vec<Option<Value>>> = self
            .agents
            .iter()
            .map(|a| {
                let mut row = vec![None; self.resources.len()];
                for &r in &a.actions {
                    row[r] = Some(self.resources[r].value);
                }
                row
            })
            .collect();
        matching::max_weight_matching(&weights)
    }
}

/// Outcome of checking a game's invariants.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub structural: Vec<String>,
    pub nonnegativity: Vec<String>,
    /// Set when no value-1 resource is reachable by any agent.
    pub regularity_warning: Option<String>,
}

impl ValidationReport {
    /// No structural or nonnegativity failures. Warnings are allowed.
    pub fn is_ok(&self) -> bool {
        self.structural.is_empty() && self.nonnegativity.is_empty()
    }

    pub fn is_regular(&self) -> bool {
        self.regularity_warning.is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &str> {
        self.structural
            .iter()
            .chain(&self.nonnegativity)
            .map(String::as_str)
    }
}

/// Checks structure, nonnegativity and regularity on raw parts.
pub fn validate(resources: &[Resource], agents: &[Agent]) -> ValidationReport {
    let mut report = ValidationReport::default();

    if agents.is_empty() {
        report.structural.push("game has no agents".into());
    }
    let mut ids = HashSet::new();
    for r in resources {
        if !ids.insert(r.id.as_str()) {
            report
                .structural
                .push(format!("duplicate resource id {:?}", r.id));
        }
        if !r.value.is_finite() {
            report
                .nonnegativity
                .push(format!("resource {:?} has non-finite value", r.id));
        } else if r.value < 0.0 {
            report.nonnegativity.push(format!(
                "resource {:?} has negative value {}",
                r.id, r.value
            ));
        }
    }
    for (i, a) in agents.iter().enumerate() {
        if a.actions.is_empty() {
            report
                .structural
                .push(format!("agent {i} ({:?}) has an empty action set", a.id));
        }
        let mut seen = HashSet::new();
        for &r in &a.actions {
            if r >= resources.len() {
                report.structural.push(format!(
                    "agent {i} ({:?}) references nonexistent resource {r}",
                    a.id
                ));
            } else if !seen.insert(r) {
                report
                    .structural
                    .push(format!("agent {i} ({:?}) lists resource {r} twice", a.id));
            }
        }
    }

    let regular = agents.iter().any(|a| {
        a.actions
            .iter()
            .any(|&r| r < resources.len() && (resources[r].value - 1.0).abs() <= EPS)
    });
    if !regular {
        report.regularity_warning =
            Some("no resource of value 1 is in any agent's action set".into());
    }
    report
}

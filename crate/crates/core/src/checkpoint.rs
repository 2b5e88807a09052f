//! Versioned JSON checkpoints for networks and agents.
//!
//! Floats are written with shortest round-trip formatting, so reading a
//! checkpoint and writing it again reproduces the same bytes.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, Mlp};
use crate::sac::{Critic, SacAgent, SacConfig};

pub const FORMAT_VERSION: u32 = 1;

/// A single network with its optimiser state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetCheckpoint {
    pub format_version: u32,
    pub seed: u64,
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub network: Mlp,
    pub optimizer: Option<Adam>,
}

impl NetCheckpoint {
    pub fn new(network: Mlp, optimizer: Option<Adam>, seed: u64) -> Self {
        NetCheckpoint {
            format_version: FORMAT_VERSION,
            seed,
            layer_sizes: network.layer_sizes(),
            activation: network.activation(),
            network,
            optimizer,
        }
    }

    fn validate(&self) -> Result<()> {
        check_version(self.format_version)?;
        let net = revalidate(&self.network)?;
        if net.layer_sizes() != self.layer_sizes || net.activation() != self.activation {
            return Err(Error::Parse("network does not match its declared layout".into()));
        }
        Ok(())
    }
}

/// Everything needed to resume or evaluate one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentCheckpoint {
    pub format_version: u32,
    pub env_id: String,
    pub seed: u64,
    pub config: SacConfig,
    pub observation_dim: usize,
    pub action_dim: usize,
    pub actor: Mlp,
    pub actor_optimizer: Adam,
    pub critics: Vec<Critic>,
}

impl AgentCheckpoint {
    pub fn from_agent(agent: &SacAgent, env_id: &str, seed: u64) -> Self {
        AgentCheckpoint {
            format_version: FORMAT_VERSION,
            env_id: env_id.to_string(),
            seed,
            config: agent.config().clone(),
            observation_dim: agent.observation_dim(),
            action_dim: agent.action_dim(),
            actor: agent.actor().clone(),
            actor_optimizer: agent.actor_optimizer().clone(),
            critics: agent.critics().to_vec(),
        }
    }

    pub fn to_agent(&self) -> Result<SacAgent> {
        check_version(self.format_version)?;
        let actor = revalidate(&self.actor)?;
        let mut critics = Vec::with_capacity(self.critics.len());
        for c in &self.critics {
            critics.push(Critic {
                net: revalidate(&c.net)?,
                target: revalidate(&c.target)?,
                optimizer: c.optimizer.clone(),
            });
        }
        let agent = SacAgent::from_parts(self.config.clone(), actor, self.actor_optimizer.clone(), critics)
            .map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if agent.observation_dim() != self.observation_dim || agent.action_dim() != self.action_dim {
            return Err(Error::Parse("checkpoint dims disagree with its networks".into()));
        }
        Ok(agent)
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported checkpoint format {v} (expected {FORMAT_VERSION})")));
    }
    Ok(())
}

fn revalidate(net: &Mlp) -> Result<Mlp> {
    Mlp::from_layers(net.layers().to_vec(), net.activation()).map_err(|e| Error::Parse(format!("checkpoint: {e}")))
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, to_json_string(value)?).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn save_agent(path: &Path, agent: &SacAgent, env_id: &str, seed: u64) -> Result<()> {
    write_json(path, &AgentCheckpoint::from_agent(agent, env_id, seed))
}

pub fn load_agent(path: &Path) -> Result<(SacAgent, AgentCheckpoint)> {
    let ckpt: AgentCheckpoint = read_json(path)?;
    Ok((ckpt.to_agent()?, ckpt))
}

pub fn save_network(path: &Path, ckpt: &NetCheckpoint) -> Result<()> {
    write_json(path, ckpt)
}

pub fn load_network(path: &Path) -> Result<NetCheckpoint> {
    let ckpt: NetCheckpoint = read_json(path)?;
    ckpt.validate()?;
    Ok(ckpt)
}

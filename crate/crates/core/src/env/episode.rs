use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One environment step from the point of view of a single agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    /// The agent's own action, before composition with the opponent's.
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
    /// Latched success flag after this step.
    pub success: bool,
    pub goal: Option<Vec<f64>>,
    pub step_index: usize,
}

impl Transition {
    /// State (and goal) as fed to the networks.
    pub fn observation(&self) -> Vec<f64> {
        concat_goal(&self.state, self.goal.as_deref())
    }

    pub fn next_observation(&self) -> Vec<f64> {
        concat_goal(&self.next_state, self.goal.as_deref())
    }
}

fn concat_goal(state: &[f64], goal: Option<&[f64]>) -> Vec<f64> {
    let mut v = state.to_vec();
    if let Some(g) = goal {
        v.extend_from_slice(g);
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub transitions: Vec<Transition>,
    pub undiscounted_return: f64,
    pub discounted_return: f64,
    pub success: bool,
    pub seed: u64,
}

impl EpisodeRecord {
    pub fn new(transitions: Vec<Transition>, gamma: f64, seed: u64) -> Result<Self> {
        let rewards: Vec<f64> = transitions.iter().map(|t| t.reward).collect();
        let discounted = discounted_return(&rewards, gamma)?;
        Ok(EpisodeRecord {
            undiscounted_return: rewards.iter().sum(),
            discounted_return: discounted,
            success: transitions.iter().any(|t| t.success),
            transitions,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.transitions.iter().map(|t| t.reward)
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.transitions.last().map(|t| t.next_state.as_slice())
    }
}

/// `Σ_t γ^t r_t`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> Result<f64> {
    if rewards.is_empty() {
        return Err(Error::Domain("discounted return of an empty episode".into()));
    }
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    Ok(total)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::Parse(format!("not a boolean: {other:?}"))),
    }
}

/// Writes an episode as CSV, one row per step.
///
/// A `# seed=.. gamma=..` preamble precedes the header. Columns are
/// `step, s*, a*, reward, done, success` followed by `ns*` (next state)
/// and, for goal-conditioned episodes, `g*`.
pub fn write_episode_csv<W: Write>(episode: &EpisodeRecord, gamma: f64, mut out: W) -> Result<()> {
    let first = episode.transitions.first().ok_or_else(|| Error::Domain("cannot write an empty episode".into()))?;
    let (sd, ad) = (first.state.len(), first.action.len());
    let gd = first.goal.as_ref().map_or(0, Vec::len);
    let io = |e: std::io::Error| Error::io("<episode csv>", e);
    writeln!(out, "# seed={} gamma={}", episode.seed, fmt_f64(gamma)).map_err(io)?;

    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string()];
    header.extend((0..sd).map(|i| format!("s{i}")));
    header.extend((0..ad).map(|i| format!("a{i}")));
    header.extend(["reward", "done", "success"].map(String::from));
    header.extend((0..sd).map(|i| format!("ns{i}")));
    header.extend((0..gd).map(|i| format!("g{i}")));
    wtr.write_record(&header).map_err(csv_err)?;

    for t in &episode.transitions {
        if t.state.len() != sd
            || t.action.len() != ad
            || t.next_state.len() != sd
            || t.goal.as_ref().map_or(0, Vec::len) != gd
        {
            return Err(Error::Dimension(format!("transition {} has inconsistent widths", t.step_index)));
        }
        let mut row = vec![t.step_index.to_string()];
        row.extend(t.state.iter().map(|&x| fmt_f64(x)));
        row.extend(t.action.iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(t.reward));
        row.push(t.done.to_string());
        row.push(t.success.to_string());
        row.extend(t.next_state.iter().map(|&x| fmt_f64(x)));
        if let Some(g) = &t.goal {
            row.extend(g.iter().map(|&x| fmt_f64(x)));
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush().map_err(io)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Reads an episode written by [`write_episode_csv`]. Returns the record and
/// the discount factor from the preamble.
pub fn read_episode_csv<R: BufRead>(mut input: R) -> Result<(EpisodeRecord, f64)> {
    let mut preamble = String::new();
    input.read_line(&mut preamble).map_err(|e| Error::io("<episode csv>", e))?;
    let preamble = preamble
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '# seed=.. gamma=..' preamble".into()))?;
    let (mut seed, mut gamma) = (None, None);
    for kv in preamble.split_whitespace() {
        match kv.split_once('=') {
            Some(("seed", v)) => seed = Some(v.parse::<u64>().map_err(|_| Error::Parse(format!("bad seed {v:?}")))?),
            Some(("gamma", v)) => gamma = Some(parse_f64(v)?),
            _ => return Err(Error::Parse(format!("unexpected preamble entry {kv:?}"))),
        }
    }
    let seed = seed.ok_or_else(|| Error::Parse("preamble lacks seed".into()))?;
    let gamma = gamma.ok_or_else(|| Error::Parse("preamble lacks gamma".into()))?;

    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let count = |prefix: &str| {
        header
            .iter()
            .filter(|h| {
                h.strip_prefix(prefix).is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
            })
            .count()
    };
    let (sd, ad, gd) = (count("s"), count("a"), count("g"));
    let expected = 1 + sd + ad + 3 + sd + gd;
    if header.len() != expected || header.get(0) != Some("step") {
        return Err(Error::Parse(format!("unexpected episode header ({} columns)", header.len())));
    }

    let mut transitions = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let floats =
            |from: usize, n: usize| -> Result<Vec<f64>> { (from..from + n).map(|i| parse_f64(field(i))).collect() };
        let step_index = field(0).parse().map_err(|_| Error::Parse(format!("bad step {:?}", field(0))))?;
        let mut c = 1;
        let state = floats(c, sd)?;
        c += sd;
        let action = floats(c, ad)?;
        c += ad;
        let reward = parse_f64(field(c))?;
        let done = parse_bool(field(c + 1))?;
        let success = parse_bool(field(c + 2))?;
        c += 3;
        let next_state = floats(c, sd)?;
        c += sd;
        let goal = if gd > 0 { Some(floats(c, gd)?) } else { None };
        transitions.push(Transition { state, action, reward, next_state, done, success, goal, step_index });
    }
    Ok((EpisodeRecord::new(transitions, gamma, seed)?, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(i: usize, reward: f64, goal: Option<Vec<f64>>) -> Transition {
        Transition {
            state: vec![i as f64, 0.5],
            action: vec![0.1 * i as f64],
            reward,
            next_state: vec![i as f64 + 1.0, 0.25],
            done: false,
            success: false,
            goal,
            step_index: i,
        }
    }

    #[test]
    fn discounted_examples() {
        assert_eq!(discounted_return(&[1.0, 1.0, 1.0], 0.5).unwrap(), 1.75);
        assert_eq!(discounted_return(&[-3.25], 0.9).unwrap(), -3.25);
        assert!(discounted_return(&[], 0.9).is_err());
    }

    #[test]
    fn discounted_matches_geometric_series() {
        // −Σ_{t<50} 0.98^t = −(1 − 0.98^50) / 0.02
        let oracle = -(1.0 - 0.98f64.powi(50)) / 0.02;
        let got = discounted_return(&[-1.0; 50], 0.98).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-9);
        assert!((got + 31.79).abs() < 0.01);
    }

    #[test]
    fn record_accounting() {
        let ts: Vec<_> = (0..4).map(|i| transition(i, 1.0, None)).collect();
        let ep = EpisodeRecord::new(ts, 0.5, 3).unwrap();
        assert_eq!(ep.undiscounted_return, 4.0);
        assert_eq!(ep.discounted_return, 1.875);
        assert!(!ep.success);
    }

    #[test]
    fn csv_round_trip_is_byte_exact() {
        for goal in [None, Some(vec![0.3, 1e-17])] {
            let mut ts: Vec<_> = (0..5).map(|i| transition(i, -0.1 * i as f64 + 1e-13, goal.clone())).collect();
            ts[4].done = true;
            ts[3].success = true;
            ts[4].success = true;
            let ep = EpisodeRecord::new(ts, 0.98, 99).unwrap();
            let mut first = Vec::new();
            write_episode_csv(&ep, 0.98, &mut first).unwrap();
            let (back, gamma) = read_episode_csv(first.as_slice()).unwrap();
            assert_eq!(gamma, 0.98);
            assert_eq!(back, ep);
            let mut second = Vec::new();
            write_episode_csv(&back, gamma, &mut second).unwrap();
            assert_eq!(first, second);
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_episode_csv("step,s0\n0,1\n".as_bytes()).is_err());
        assert!(read_episode_csv("# seed=1 gamma=0.9\nstep,s0,a0\n".as_bytes()).is_err());
    }
}

//! INI-style configuration: `[section]` headers and `key = value` lines.
//!
//! Parsing is strict. Unknown sections and keys, duplicates, type errors and
//! out-of-range values are all rejected with the offending line and key.

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::net::SocketAddr;
use std::str::FromStr;

use freshlink_core::aoi::Duration;
use freshlink_core::leader::LeaderConfig;
use freshlink_core::sim::{Generation, QueueKind, SimConfig, System, TrackingConfig};
use freshlink_core::PolicyKind;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: key `{key}`: {msg}")]
    Key { line: usize, key: String, msg: String },
    #[error("override `{key}`: {msg}")]
    Override { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("sim", &["seed", "duration_s", "n", "system", "generation"]),
    (
        "network",
        &[
            "loss",
            "uplink_loss",
            "downlink_loss",
            "uplink_latency_ms",
            "downlink_latency_ms",
            "bitrate_bps",
            "turnaround_ms",
            "clock_offsets_ms",
        ],
    ),
    (
        "traffic",
        &["rate_fps", "payload_bytes", "queue", "capacity", "rate_control", "max_payload"],
    ),
    (
        "leader",
        &[
            "policy",
            "timeout_ms",
            "window",
            "p_floor",
            "sync_period_s",
            "sync_retries",
            "alpha",
            "waypoint_horizon_ms",
            "waypoint_count",
            "sticky_update",
        ],
    ),
    ("baseline", &["transmit_prob", "slot_ms"]),
    (
        "tracking",
        &[
            "arena_x",
            "arena_y",
            "fov_radius",
            "target_max_speed",
            "resample_period_ms",
            "pause_prob",
            "follower_max_speed",
            "altitude",
            "sample_step_ms",
            "frame_bytes",
            "closed_loop",
        ],
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Line(usize),
    Override,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// A parsed document before typing: which sections appeared and their keys.
#[derive(Debug, Clone, Default)]
pub struct IniDoc {
    sections: BTreeMap<String, usize>,
    entries: BTreeMap<(String, String), Entry>,
}

fn known_keys(section: &str) -> Option<&'static [&'static str]> {
    SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, keys)| *keys)
}

impl IniDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = IniDoc::default();
        let mut section: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(ConfigError::Syntax { line, msg: format!("unterminated section header `{trimmed}`") });
                };
                let name = name.trim();
                if known_keys(name).is_none() {
                    return Err(ConfigError::Syntax { line, msg: format!("unknown section `[{name}]`") });
                }
                if let Some(first) = doc.sections.insert(name.to_string(), line) {
                    return Err(ConfigError::Syntax {
                        line,
                        msg: format!("section `[{name}]` repeated (first on line {first})"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{trimmed}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = &section else {
                return Err(ConfigError::Key { line, key: key.into(), msg: "appears before any [section]".into() });
            };
            if !known_keys(sec).is_some_and(|keys| keys.contains(&key)) {
                return Err(ConfigError::Key { line, key: key.into(), msg: format!("unknown key in [{sec}]") });
            }
            let slot = (sec.clone(), key.to_string());
            if let Some(prev) = doc.entries.get(&slot) {
                let Origin::Line(first) = prev.origin else { unreachable!() };
                return Err(ConfigError::Key { line, key: key.into(), msg: format!("duplicate (first set on line {first})") });
            }
            doc.entries.insert(slot, Entry { value: value.to_string(), origin: Origin::Line(line) });
        }
        Ok(doc)
    }

    /// Applies `key=value`, where `key` is `section.key` or a key name that
    /// only one section uses.
    pub fn set_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |msg: String| ConfigError::Override { key: key.to_string(), msg };
        let (section, name) = match key.split_once('.') {
            Some((s, k)) => {
                if !known_keys(s).is_some_and(|keys| keys.contains(&k)) {
                    return Err(bad("unknown key".into()));
                }
                (s, k)
            }
            None => {
                let owners: Vec<&str> = SCHEMA.iter().filter(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s).collect();
                match owners[..] {
                    [s] => (s, key),
                    [] => return Err(bad("unknown key".into())),
                    _ => return Err(bad(format!("ambiguous; qualify with one of {}", owners.join(", ")))),
                }
            }
        };
        self.sections.entry(section.to_string()).or_insert(0);
        self.entries.insert(
            (section.to_string(), name.to_string()),
            Entry { value: value.trim().to_string(), origin: Origin::Override },
        );
        Ok(())
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn field<T>(
        &self,
        section: &str,
        key: &str,
        default: T,
        show: impl Fn(&T) -> String,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        let Some(entry) = self.raw(section, key) else {
            log::info!("{section}.{key} not set, using default {}", show(&default));
            return Ok(default);
        };
        parse(&entry.value).map_err(|msg| match entry.origin {
            Origin::Line(line) => ConfigError::Key { line, key: key.to_string(), msg },
            Origin::Override => ConfigError::Override { key: format!("{section}.{key}"), msg },
        })
    }
}

fn parsed<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: Display,
{
    s.parse::<T>().map_err(|e| format!("`{s}`: {e}"))
}

fn number<T>(lo: T, hi: T) -> impl Fn(&str) -> Result<T, String>
where
    T: FromStr + PartialOrd + Display + Copy,
    T::Err: Display,
{
    move |s| {
        let v: T = parsed(s)?;
        if v >= lo && v <= hi {
            Ok(v)
        } else {
            Err(format!("{v} outside [{lo}, {hi}]"))
        }
    }
}

fn real(lo: f64, hi: f64) -> impl Fn(&str) -> Result<f64, String> {
    move |s| {
        let v: f64 = parsed(s)?;
        if v.is_finite() && v >= lo && v <= hi {
            Ok(v)
        } else {
            Err(format!("{v} outside [{lo}, {hi}]"))
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = parsed(s)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn show<T: Display>(v: &T) -> String {
    v.to_string()
}

fn list<T>(item: impl Fn(&str) -> Result<T, String>, allow_empty: bool) -> impl Fn(&str) -> Result<Vec<T>, String> {
    move |s| {
        if s.is_empty() {
            return if allow_empty { Ok(Vec::new()) } else { Err("empty list".into()) };
        }
        s.split(',').map(|part| item(part.trim())).collect()
    }
}

fn show_list<T>(values: &[T], f: impl Fn(&T) -> String) -> String {
    values.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn ms(d: &Duration) -> String {
    (d.as_micros() as f64 / 1e3).to_string()
}

fn secs(d: &Duration) -> String {
    (d.as_micros() as f64 / 1e6).to_string()
}

fn millis(min_positive: bool) -> impl Fn(&str) -> Result<Duration, String> {
    move |s| {
        let v: f64 = parsed(s)?;
        if !v.is_finite() || (min_positive && v <= 0.0) || (!min_positive && v < 0.0) {
            return Err(format!("{v} ms is out of range"));
        }
        Ok(Duration::from_micros((v * 1e3).round() as i64))
    }
}

fn signed_millis(s: &str) -> Result<Duration, String> {
    let v: f64 = parsed(s)?;
    if !v.is_finite() {
        return Err(format!("{v} ms is out of range"));
    }
    Ok(Duration::from_micros((v * 1e3).round() as i64))
}

fn seconds(s: &str) -> Result<Duration, String> {
    let v = positive(s)?;
    Ok(Duration::from_micros((v * 1e6).round() as i64))
}

fn parse_sim(doc: &IniDoc) -> Result<SimConfig, ConfigError> {
    let d = SimConfig::default();
    let probability = real(0.0, 1.0);

    let uplink_set = doc.raw("network", "uplink_loss").is_some();
    let downlink_set = doc.raw("network", "downlink_loss").is_some();
    let (uplink_loss, downlink_loss) = match doc.raw("network", "loss") {
        Some(entry) if uplink_set || downlink_set => {
            let msg = "conflicts with uplink_loss/downlink_loss".to_string();
            return Err(match entry.origin {
                Origin::Line(line) => ConfigError::Key { line, key: "loss".into(), msg },
                Origin::Override => ConfigError::Override { key: "network.loss".into(), msg },
            });
        }
        Some(_) => {
            let both = doc.field("network", "loss", d.uplink_loss.clone(), |v| show_list(v, show), list(&probability, false))?;
            (both.clone(), both)
        }
        None => (
            doc.field("network", "uplink_loss", d.uplink_loss.clone(), |v| show_list(v, show), list(&probability, false))?,
            doc.field("network", "downlink_loss", d.downlink_loss.clone(), |v| show_list(v, show), list(&probability, false))?,
        ),
    };

    let leader = LeaderConfig {
        policy: doc.field("leader", "policy", d.leader.policy, show, parsed::<PolicyKind>)?,
        timeout: doc.field("leader", "timeout_ms", d.leader.timeout, ms, millis(true))?,
        window: doc.field("leader", "window", d.leader.window, show, number(1, 1_000_000))?,
        p_floor: doc.field("leader", "p_floor", d.leader.p_floor, show, |s| {
            let v = real(0.0, 1.0)(s)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err("p_floor must be positive".into())
            }
        })?,
        sync_period: doc.field("leader", "sync_period_s", d.leader.sync_period, secs, seconds)?,
        sync_retries: doc.field("leader", "sync_retries", d.leader.sync_retries, show, number(0, 100))?,
        alpha: doc.field("leader", "alpha", d.leader.alpha, show, real(0.0, 1.0))?,
        waypoint_horizon: doc.field("leader", "waypoint_horizon_ms", d.leader.waypoint_horizon, ms, millis(true))?,
        waypoint_count: doc.field("leader", "waypoint_count", d.leader.waypoint_count, show, number(1, 255))?,
        sticky_update: doc.field("leader", "sticky_update", d.leader.sticky_update, show, parsed::<bool>)?,
        ..d.leader.clone()
    };

    let tracking = if doc.has_section("tracking") {
        let t = TrackingConfig::default();
        Some(TrackingConfig {
            arena: [
                doc.field("tracking", "arena_x", t.arena[0], show, positive)?,
                doc.field("tracking", "arena_y", t.arena[1], show, positive)?,
            ],
            fov_radius: doc.field("tracking", "fov_radius", t.fov_radius, show, real(0.0, 1e6))?,
            target_max_speed: doc.field("tracking", "target_max_speed", t.target_max_speed, show, real(0.0, 1e6))?,
            resample_period: doc.field("tracking", "resample_period_ms", t.resample_period, ms, millis(true))?,
            pause_prob: doc.field("tracking", "pause_prob", t.pause_prob, show, real(0.0, 1.0))?,
            follower_max_speed: doc.field("tracking", "follower_max_speed", t.follower_max_speed, show, real(0.0, 1e6))?,
            altitude: doc.field("tracking", "altitude", t.altitude, show, real(-1e6, 1e6))?,
            sample_step: doc.field("tracking", "sample_step_ms", t.sample_step, ms, millis(true))?,
            frame_bytes: doc.field("tracking", "frame_bytes", t.frame_bytes, show, number(0, 16 << 20))?,
            closed_loop: doc.field("tracking", "closed_loop", t.closed_loop, show, parsed::<bool>)?,
        })
    } else {
        None
    };

    let config = SimConfig {
        seed: doc.field("sim", "seed", d.seed, show, parsed::<u64>)?,
        duration: doc.field("sim", "duration_s", d.duration, secs, seconds)?,
        n: doc.field("sim", "n", d.n, show, number(1, u16::MAX))?,
        system: doc.field("sim", "system", d.system, show, parsed::<System>)?,
        generation: doc.field("sim", "generation", d.generation, |g| g.as_str().into(), parsed::<Generation>)?,
        uplink_loss,
        downlink_loss,
        uplink_latency: doc.field("network", "uplink_latency_ms", d.uplink_latency, ms, millis(false))?,
        downlink_latency: doc.field("network", "downlink_latency_ms", d.downlink_latency, ms, millis(false))?,
        bitrate_bps: doc.field("network", "bitrate_bps", d.bitrate_bps, show, positive)?,
        turnaround: doc.field("network", "turnaround_ms", d.turnaround, ms, millis(false))?,
        clock_offsets: doc.field("network", "clock_offsets_ms", d.clock_offsets.clone(), |v| show_list(v, ms), list(signed_millis, true))?,
        rate_fps: doc.field("traffic", "rate_fps", d.rate_fps, show, positive)?,
        payload_bytes: doc.field("traffic", "payload_bytes", d.payload_bytes, show, number(0, 64 << 20))?,
        queue: doc.field("traffic", "queue", d.queue, |q| q.as_str().into(), parsed::<QueueKind>)?,
        capacity: doc.field("traffic", "capacity", d.capacity, show, number(1, 1 << 20))?,
        rate_control: doc.field("traffic", "rate_control", d.rate_control, show, parsed::<bool>)?,
        max_payload: doc.field("traffic", "max_payload", d.max_payload, show, number(1, u16::MAX as usize))?,
        leader,
        slot: doc.field("baseline", "slot_ms", d.slot, |s| s.as_ref().map_or("auto".into(), ms), |s| millis(true)(s).map(Some))?,
        transmit_prob: doc.field("baseline", "transmit_prob", d.transmit_prob, show, real(0.0, 1.0))?,
        tracking,
    };
    config.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(config)
}

/// Parses a simulation config, then applies `overrides` (`key=value`).
pub fn parse_sim_config(text: &str, overrides: &[(String, String)]) -> Result<SimConfig, ConfigError> {
    let mut doc = IniDoc::parse(text)?;
    for (k, v) in overrides {
        doc.set_override(k, v)?;
    }
    parse_sim(&doc)
}

/// Writes every key of `config`; `parse_sim_config` reads it back unchanged.
/// The leader seed is not part of the format (simulations derive it).
pub fn render_sim_config(config: &SimConfig) -> String {
    let c = config;
    let mut lines: Vec<(&str, Vec<(&str, String)>)> = vec![
        (
            "sim",
            vec![
                ("seed", c.seed.to_string()),
                ("duration_s", secs(&c.duration)),
                ("n", c.n.to_string()),
                ("system", c.system.to_string()),
                ("generation", c.generation.as_str().into()),
            ],
        ),
        (
            "network",
            vec![
                ("uplink_loss", show_list(&c.uplink_loss, show)),
                ("downlink_loss", show_list(&c.downlink_loss, show)),
                ("uplink_latency_ms", ms(&c.uplink_latency)),
                ("downlink_latency_ms", ms(&c.downlink_latency)),
                ("bitrate_bps", c.bitrate_bps.to_string()),
                ("turnaround_ms", ms(&c.turnaround)),
                ("clock_offsets_ms", show_list(&c.clock_offsets, ms)),
            ],
        ),
        (
            "traffic",
            vec![
                ("rate_fps", c.rate_fps.to_string()),
                ("payload_bytes", c.payload_bytes.to_string()),
                ("queue", c.queue.as_str().into()),
                ("capacity", c.capacity.to_string()),
                ("rate_control", c.rate_control.to_string()),
                ("max_payload", c.max_payload.to_string()),
            ],
        ),
        (
            "leader",
            vec![
                ("policy", c.leader.policy.to_string()),
                ("timeout_ms", ms(&c.leader.timeout)),
                ("window", c.leader.window.to_string()),
                ("p_floor", c.leader.p_floor.to_string()),
                ("sync_period_s", secs(&c.leader.sync_period)),
                ("sync_retries", c.leader.sync_retries.to_string()),
                ("alpha", c.leader.alpha.to_string()),
                ("waypoint_horizon_ms", ms(&c.leader.waypoint_horizon)),
                ("waypoint_count", c.leader.waypoint_count.to_string()),
                ("sticky_update", c.leader.sticky_update.to_string()),
            ],
        ),
    ];
    let mut baseline = vec![("transmit_prob", c.transmit_prob.to_string())];
    if let Some(slot) = &c.slot {
        baseline.push(("slot_ms", ms(slot)));
    }
    lines.push(("baseline", baseline));
    if let Some(t) = &c.tracking {
        lines.push((
            "tracking",
            vec![
                ("arena_x", t.arena[0].to_string()),
                ("arena_y", t.arena[1].to_string()),
                ("fov_radius", t.fov_radius.to_string()),
                ("target_max_speed", t.target_max_speed.to_string()),
                ("resample_period_ms", ms(&t.resample_period)),
                ("pause_prob", t.pause_prob.to_string()),
                ("follower_max_speed", t.follower_max_speed.to_string()),
                ("altitude", t.altitude.to_string()),
                ("sample_step_ms", ms(&t.sample_step)),
                ("frame_bytes", t.frame_bytes.to_string()),
                ("closed_loop", t.closed_loop.to_string()),
            ],
        ));
    }
    let mut out = String::new();
    for (k, (section, pairs)) in lines.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{section}]");
        for (key, value) in pairs {
            let _ = writeln!(out, "{key} = {value}");
        }
    }
    out
}

/// Parses `--sweep` arguments of the form `key=v1,v2,...`.
pub fn parse_sweep(arg: &str) -> Result<(String, Vec<String>), ConfigError> {
    let bad = |msg: &str| ConfigError::Override { key: arg.to_string(), msg: msg.to_string() };
    let (key, values) = arg.split_once('=').ok_or_else(|| bad("expected key=v1,v2,..."))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if key.trim().is_empty() || values.iter().any(String::is_empty) {
        return Err(bad("empty key or value"));
    }
    Ok((key.trim().to_string(), values))
}

/// Reads a followers file: one `id address` pair per line, `#` comments.
pub fn parse_followers(text: &str) -> Result<Vec<(u16, SocketAddr)>, ConfigError> {
    let mut out: Vec<(u16, SocketAddr)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (Some(id), Some(addr), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ConfigError::Syntax { line, msg: format!("expected `id address`, got `{trimmed}`") });
        };
        let id: u16 = parsed(id).map_err(|msg| ConfigError::Key { line, key: "id".into(), msg })?;
        if id == 0 {
            return Err(ConfigError::Key { line, key: "id".into(), msg: "0 is reserved for the leader".into() });
        }
        let addr: SocketAddr = parsed(addr).map_err(|msg| ConfigError::Key { line, key: "address".into(), msg })?;
        if out.iter().any(|(other, _)| *other == id) {
            return Err(ConfigError::Key { line, key: "id".into(), msg: format!("follower {id} listed twice") });
        }
        out.push((id, addr));
    }
    if out.is_empty() {
        return Err(ConfigError::Invalid("followers file lists no followers".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_key() {
        let c = parse_sim_config("[leader]\npolicy = whittle\n", &[]).unwrap();
        assert_eq!(c.leader.policy, PolicyKind::Whittle);
        let c = parse_sim_config("[leader]\npolicy = roundrobin\n", &[]).unwrap();
        assert_eq!(c.leader.policy, PolicyKind::RoundRobin);
    }

    #[test]
    fn rate_sets_fifo_interval() {
        let c = parse_sim_config("[traffic]\nqueue = fifo\nrate_fps = 50\n", &[]).unwrap();
        assert_eq!(c.frame_interval(), Duration::from_millis(20));
    }

    #[test]
    fn loss_out_of_range_names_line() {
        let err = parse_sim_config("[sim]\nn = 3\n\n[network]\nloss = 1.5\n", &[]).unwrap_err();
        assert!(matches!(&err, ConfigError::Key { line: 5, key, .. } if key == "loss"), "{err}");
        assert!(err.to_string().starts_with("line 5: key `loss`"));
    }

    #[test]
    fn loss_sets_both_directions() {
        let c = parse_sim_config("[network]\nloss = 0.25\n", &[]).unwrap();
        assert_eq!(c.uplink_loss, vec![0.25]);
        assert_eq!(c.downlink_loss, vec![0.25]);
        let err = parse_sim_config("[network]\nloss = 0.25\nuplink_loss = 0.1\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Key { line: 2, .. }));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let cases = [
            ("[sim]\nspeed = 3\n", 2),
            ("[simulation]\n", 1),
            ("n = 3\n", 1),
            ("[sim]\nn = three\n", 2),
            ("[sim]\nn = 0\n", 2),
            ("[sim]\nn = 2\nn = 3\n", 3),
            ("[sim]\njust words\n", 2),
            ("[sim\n", 1),
            ("[traffic]\nqueue = stack\n", 2),
        ];
        for (text, line) in cases {
            let err = parse_sim_config(text, &[]).unwrap_err();
            let got = match err {
                ConfigError::Syntax { line, .. } | ConfigError::Key { line, .. } => line,
                other => panic!("{text:?}: {other}"),
            };
            assert_eq!(got, line, "{text:?}");
        }
    }

    #[test]
    fn cross_field_errors_are_reported() {
        let err = parse_sim_config("[sim]\nn = 3\n[network]\nuplink_loss = 0.1, 0.2\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(parse_sim_config("# nothing\n", &[]).unwrap(), SimConfig::default());
    }

    #[test]
    fn tracking_section_enables_tracking() {
        let c = parse_sim_config("[tracking]\n", &[]).unwrap();
        assert_eq!(c.tracking, Some(TrackingConfig::default()));
        let c = parse_sim_config("", &[("tracking.closed_loop".into(), "false".into())]).unwrap();
        assert!(!c.tracking.unwrap().closed_loop);
    }

    #[test]
    fn overrides() {
        let c = parse_sim_config("[sim]\nn = 3\n", &[("n".into(), "8".into())]).unwrap();
        assert_eq!(c.n, 8);
        let c = parse_sim_config("", &[("leader.policy".into(), "maxage".into())]).unwrap();
        assert_eq!(c.leader.policy, PolicyKind::MaxAge);
        assert!(matches!(
            parse_sim_config("", &[("nope".into(), "1".into())]),
            Err(ConfigError::Override { .. })
        ));
        let err = parse_sim_config("", &[("n".into(), "x".into())]).unwrap_err();
        assert_eq!(err.to_string().lines().count(), 1);
    }

    #[test]
    fn sweep_argument() {
        assert_eq!(
            parse_sweep("n=2,4,8,14").unwrap(),
            ("n".to_string(), vec!["2".into(), "4".into(), "8".into(), "14".into()])
        );
        assert!(parse_sweep("n").is_err());
        assert!(parse_sweep("n=2,,4").is_err());
    }

    #[test]
    fn render_round_trips_defaults() {
        let c = parse_sim_config("", &[]).unwrap();
        assert_eq!(parse_sim_config(&render_sim_config(&c), &[]).unwrap(), c);
    }

    #[test]
    fn followers_file() {
        let f = parse_followers("# fleet\n1 127.0.0.1:7001\n2 127.0.0.1:7002\n").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[1].0, 2);
        assert!(matches!(parse_followers("1 127.0.0.1:1\n1 127.0.0.1:2\n"), Err(ConfigError::Key { line: 2, .. })));
        assert!(matches!(parse_followers("0 127.0.0.1:1\n"), Err(ConfigError::Key { line: 1, .. })));
        assert!(matches!(parse_followers("1 localhost\n"), Err(ConfigError::Key { line: 1, .. })));
        assert!(parse_followers("\n").is_err());
    }
}

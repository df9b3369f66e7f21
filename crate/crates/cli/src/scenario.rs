use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use cntqd_core::dotmodel::{self, DotError, DotParameters, StateLabel};
use cntqd_core::gates::{self, GateError, PulseSpec, RabiMode, TwoDotGeometry};
use cntqd_core::memory::{MemoryError, MemoryScenario, NuclearChain, Valley};
use cntqd_core::qstate::C64;
use cntqd_core::trap::{RelaxOptions, TrapConfig, TrapError};
use cntqd_core::units::HBAR;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Gate,
    TwoQubit,
    Memory,
    Trap,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Spectrum,
        Command::Gate,
        Command::TwoQubit,
        Command::Memory,
        Command::Trap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Gate => "gate",
            Command::TwoQubit => "two-qubit",
            Command::Memory => "memory",
            Command::Trap => "trap",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s || c.name().replace('-', "_") == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed or open interval for numeric keys.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Range {
    pub const ANY: Range = Range {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };
    pub const POSITIVE: Range = Range {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };
    pub const NON_NEGATIVE: Range = Range {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open: false,
        hi_open: true,
    };

    pub const fn closed(lo: f64, hi: f64) -> Range {
        Range {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo
        };
        let below = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi
        };
        x.is_finite() && above && below
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        let close = if self.hi_open { ')' } else { ']' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueType {
    Float,
    Int,
    Choice(&'static [&'static str]),
    Text,
    FloatList,
    /// Explicit list or `{start, stop, points}` (endpoints included).
    Grid,
}

/// Resolved scenario value.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Param {
    Int(u64),
    Float(f64),
    Text(String),
    List(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Presence {
    Required,
    Optional,
    Default(Param),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeySpec {
    pub path: &'static str,
    pub ty: ValueType,
    pub range: Range,
    pub presence: Presence,
    pub unit: &'static str,
    pub commands: &'static [Command],
}

impl KeySpec {
    pub fn expected(&self) -> String {
        let r = if self.range == Range::ANY {
            String::new()
        } else {
            format!(" in {}", self.range)
        };
        match self.ty {
            ValueType::Float => format!("float{r}"),
            ValueType::Int => format!("integer{r}"),
            ValueType::Choice(c) => format!(
                "one of {}",
                c.iter()
                    .map(|s| format!("\"{s}\""))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            ValueType::Text => "string".into(),
            ValueType::FloatList => format!("non-empty list of floats{r}"),
            ValueType::Grid => format!("non-empty list of floats{r} or {{start, stop, points}}"),
        }
    }

    fn coerce(&self, v: &Value) -> std::result::Result<Param, String> {
        let bad = || Err(format!("expected {}, got {v}", self.expected()));
        let num = |x: &Value| x.as_f64().filter(|f| self.range.contains(*f));
        match self.ty {
            ValueType::Float => num(v).map(Param::Float).map_or_else(bad, Ok),
            ValueType::Int => {
                let i = v.as_u64().or_else(|| {
                    v.as_f64()
                        .filter(|f| f.fract() == 0.0 && *f >= 0.0 && *f < 9.0e15)
                        .map(|f| f as u64)
                });
                match i {
                    Some(i) if self.range.contains(i as f64) => Ok(Param::Int(i)),
                    _ => bad(),
                }
            }
            ValueType::Choice(c) => match v.as_str() {
                Some(s) if c.contains(&s) => Ok(Param::Text(s.into())),
                _ => bad(),
            },
            ValueType::Text => v
                .as_str()
                .map(|s| Param::Text(s.into()))
                .map_or_else(bad, Ok),
            ValueType::FloatList | ValueType::Grid => {
                if let Some(items) = v.as_array() {
                    let xs: Option<Vec<f64>> = items.iter().map(num).collect();
                    return match xs {
                        Some(xs) if !xs.is_empty() => Ok(Param::List(xs)),
                        _ => bad(),
                    };
                }
                let Some(obj) = v.as_object().filter(|_| self.ty == ValueType::Grid) else {
                    return bad();
                };
                if obj
                    .keys()
                    .any(|k| !["start", "stop", "points"].contains(&k.as_str()))
                {
                    return bad();
                }
                let (start, stop) = match (
                    obj.get("start").and_then(num),
                    obj.get("stop").and_then(num),
                ) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return bad(),
                };
                match obj.get("points").and_then(Value::as_u64) {
                    Some(n) if (1..=10_000_000).contains(&n) => {
                        Ok(Param::List(linspace(start, stop, n as usize)))
                    }
                    _ => bad(),
                }
            }
        }
    }
}

/// `n` points from `start` to `stop` inclusive; the last point is `stop` exactly.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| {
                if k + 1 == n {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

const ALL: &[Command] = &Command::ALL;
const DOT_USERS: &[Command] = &[
    Command::Spectrum,
    Command::Gate,
    Command::TwoQubit,
    Command::Memory,
];
const SPECTRUM: &[Command] = &[Command::Spectrum];
const GATE: &[Command] = &[Command::Gate];
const TWO_QUBIT: &[Command] = &[Command::TwoQubit];
const MEMORY: &[Command] = &[Command::Memory];
const TRAP: &[Command] = &[Command::Trap];

const COMMAND_NAMES: &[&str] = &[
    "spectrum",
    "gate",
    "two-qubit",
    "two_qubit",
    "memory",
    "trap",
];
const PULSE_KINDS: &[&str] = &["field_kick", "microwave_drive"];
const RABI_MODES: &[&str] = &["rwa_two_level", "full_four_level"];
const INTERACTIONS: &[&str] = &["dipole", "exchange"];
const VALLEYS: &[&str] = &["up", "down"];

fn object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("config types serialize") {
        Value::Object(m) => m,
        _ => unreachable!("config types are structs"),
    }
}

/// Every key a scenario may set, with type, range, default and unit.
pub fn registry() -> &'static [KeySpec] {
    static REGISTRY: OnceLock<Vec<KeySpec>> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

fn build_registry() -> Vec<KeySpec> {
    use Presence::{Optional, Required};
    use ValueType::*;
    let key = |path, ty, range, presence, unit, commands| KeySpec {
        path,
        ty,
        range,
        presence,
        unit,
        commands,
    };
    let float = |x: f64| Presence::Default(Param::Float(x));
    let int = |x: u64| Presence::Default(Param::Int(x));
    let text = |s: &str| Presence::Default(Param::Text(s.into()));

    let dot = object(&DotParameters::default());
    let d = |f: &str| float(dot[f].as_f64().unwrap());
    let mem = MemoryScenario::default();
    let relax = RelaxOptions::default();

    vec![
        key(
            "command",
            Choice(COMMAND_NAMES),
            Range::ANY,
            Optional,
            "",
            ALL,
        ),
        key("output.path", Text, Range::ANY, Optional, "", ALL),
        key(
            "dot.delta_so",
            Float,
            Range::POSITIVE,
            d("delta_so"),
            "ueV",
            DOT_USERS,
        ),
        key(
            "dot.delta_kk",
            Float,
            Range::NON_NEGATIVE,
            d("delta_kk"),
            "ueV",
            DOT_USERS,
        ),
        key("dot.g_s", Float, Range::POSITIVE, d("g_s"), "1", DOT_USERS),
        key(
            "dot.mu_orb",
            Float,
            Range::POSITIVE,
            d("mu_orb"),
            "ueV/T",
            DOT_USERS,
        ),
        key(
            "dot.lever_arm",
            Float,
            Range::ANY,
            d("lever_arm"),
            "ueV/V",
            DOT_USERS,
        ),
        key(
            "dot.spin_orbit_sign",
            Float,
            Range::closed(-1.0, 1.0),
            d("spin_orbit_sign"),
            "1",
            DOT_USERS,
        ),
        key(
            "dot.zeeman_sign",
            Float,
            Range::closed(-1.0, 1.0),
            d("zeeman_sign"),
            "1",
            DOT_USERS,
        ),
        key("spectrum.b_grid", Grid, Range::ANY, Required, "T", SPECTRUM),
        key(
            "spectrum.gate_v",
            Float,
            Range::ANY,
            float(0.0),
            "V",
            SPECTRUM,
        ),
        key(
            "gate.kind",
            Choice(PULSE_KINDS),
            Range::ANY,
            text("field_kick"),
            "",
            GATE,
        ),
        key("gate.b_field", Float, Range::ANY, float(0.0), "T", GATE),
        key(
            "gate.duration",
            Float,
            Range::NON_NEGATIVE,
            Optional,
            "ns",
            GATE,
        ),
        key(
            "gate.target_phase",
            Float,
            Range::ANY,
            Optional,
            "rad",
            GATE,
        ),
        key("gate.drive_amp", Float, Range::ANY, float(0.0), "ueV", GATE),
        key(
            "gate.drive_freq",
            Float,
            Range::NON_NEGATIVE,
            Optional,
            "GHz",
            GATE,
        ),
        key("gate.phase", Float, Range::ANY, float(0.0), "rad", GATE),
        key(
            "gate.rabi_mode",
            Choice(RABI_MODES),
            Range::ANY,
            text("full_four_level"),
            "",
            GATE,
        ),
        key(
            "gate.samples",
            Int,
            Range::closed(0.0, 1.0e6),
            int(0),
            "1",
            GATE,
        ),
        key(
            "two_qubit.interaction",
            Choice(INTERACTIONS),
            Range::ANY,
            text("dipole"),
            "",
            TWO_QUBIT,
        ),
        key(
            "two_qubit.separation",
            Float,
            Range::POSITIVE,
            float(1000.0),
            "A",
            TWO_QUBIT,
        ),
        key(
            "two_qubit.coupling_strength",
            Float,
            Range::ANY,
            Optional,
            "ueV",
            TWO_QUBIT,
        ),
        key(
            "two_qubit.t_grid",
            Grid,
            Range::NON_NEGATIVE,
            Optional,
            "ns",
            TWO_QUBIT,
        ),
        key(
            "memory.positions",
            FloatList,
            Range::ANY,
            Presence::Default(Param::List(mem.chain.positions.clone())),
            "A",
            MEMORY,
        ),
        key(
            "memory.g_n",
            Float,
            Range::ANY,
            float(mem.chain.g_n),
            "1",
            MEMORY,
        ),
        key(
            "memory.electron_position",
            Float,
            Range::ANY,
            float(mem.electron_position),
            "A",
            MEMORY,
        ),
        key("memory.b_field", Float, Range::ANY, Optional, "T", MEMORY),
        key(
            "memory.coupling_scale",
            Float,
            Range::NON_NEGATIVE,
            float(mem.coupling_scale),
            "ueV*A^3",
            MEMORY,
        ),
        key(
            "memory.electron_valley",
            Choice(VALLEYS),
            Range::ANY,
            text("down"),
            "",
            MEMORY,
        ),
        key(
            "memory.qubit_theta",
            Float,
            Range::closed(0.0, std::f64::consts::PI),
            float(std::f64::consts::FRAC_PI_2),
            "rad",
            MEMORY,
        ),
        key(
            "memory.qubit_phi",
            Float,
            Range::ANY,
            float(0.0),
            "rad",
            MEMORY,
        ),
        key(
            "memory.t_grid",
            Grid,
            Range::NON_NEGATIVE,
            Optional,
            "ns",
            MEMORY,
        ),
        key("trap.preset", Text, Range::ANY, text("hydrogen"), "", TRAP),
        key("trap.params_file", Text, Range::ANY, Optional, "", TRAP),
        key("trap.element", Text, Range::ANY, Optional, "", TRAP),
        key(
            "trap.tube_radius",
            Float,
            Range::POSITIVE,
            Optional,
            "A",
            TRAP,
        ),
        key(
            "trap.tube_length",
            Float,
            Range::POSITIVE,
            Optional,
            "A",
            TRAP,
        ),
        key(
            "trap.wall_epsilon",
            Float,
            Range::POSITIVE,
            Optional,
            "meV",
            TRAP,
        ),
        key(
            "trap.wall_sigma",
            Float,
            Range::POSITIVE,
            Optional,
            "A",
            TRAP,
        ),
        key(
            "trap.surface_density",
            Float,
            Range::POSITIVE,
            Optional,
            "A^-2",
            TRAP,
        ),
        key(
            "trap.atom_epsilon",
            Float,
            Range::POSITIVE,
            Optional,
            "meV",
            TRAP,
        ),
        key(
            "trap.atom_sigma",
            Float,
            Range::POSITIVE,
            Optional,
            "A",
            TRAP,
        ),
        key(
            "trap.atom_mass",
            Float,
            Range::POSITIVE,
            Optional,
            "amu",
            TRAP,
        ),
        key(
            "trap.quadrature_order",
            Int,
            Range::closed(8.0, 65536.0),
            Optional,
            "1",
            TRAP,
        ),
        key(
            "trap.n_atoms",
            Int,
            Range::closed(1.0, 1000.0),
            int(8),
            "1",
            TRAP,
        ),
        key(
            "relax.seed_jitter",
            Float,
            Range::NON_NEGATIVE,
            float(relax.seed_jitter),
            "A",
            TRAP,
        ),
        key(
            "relax.seed",
            Int,
            Range::NON_NEGATIVE,
            int(relax.seed),
            "1",
            TRAP,
        ),
        key("relax.spacing", Float, Range::POSITIVE, Optional, "A", TRAP),
        key(
            "relax.gradient_tol",
            Float,
            Range::POSITIVE,
            float(relax.gradient_tol),
            "meV/A",
            TRAP,
        ),
        key(
            "relax.max_iterations",
            Int,
            Range::closed(1.0, 1.0e9),
            int(relax.max_iterations as u64),
            "1",
            TRAP,
        ),
    ]
}

pub fn lookup(path: &str) -> Option<&'static KeySpec> {
    registry().iter().find(|k| k.path == path)
}

/// Engine input resolved from a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Spectrum {
        dot: DotParameters,
        b_grid: Vec<f64>,
        gate_v: f64,
    },
    PhaseGate {
        dot: DotParameters,
        b_field: f64,
        times: Vec<f64>,
    },
    Rabi {
        dot: DotParameters,
        drive: PulseSpec,
        mode: RabiMode,
        times: Option<Vec<f64>>,
    },
    Dipole {
        geometry: TwoDotGeometry,
        times: Vec<f64>,
    },
    Exchange {
        coupling: f64,
        times: Vec<f64>,
    },
    Memory {
        scenario: MemoryScenario,
        qubit: [C64; 2],
        b_field: Option<f64>,
        times: Option<Vec<f64>>,
    },
    Trap {
        config: TrapConfig,
        n_atoms: usize,
        relax: RelaxOptions,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub command: Command,
    /// Every key used by the command, defaults included.
    pub values: BTreeMap<String, Param>,
    pub output_path: Option<PathBuf>,
    pub job: Job,
}

impl Scenario {
    /// SHA-256 of the command and resolved values; the output path is excluded.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            command: &'a str,
            parameters: &'a BTreeMap<String, Param>,
        }
        let text = serde_json::to_string(&Canonical {
            command: self.command.name(),
            parameters: &self.values,
        })
        .expect("parameters serialize");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Parses a scenario whose document names its `command`.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_scenario_with(text, None, None)
}

/// Reads and parses a scenario file; relative paths inside it resolve
/// against the file's directory.
pub fn load_scenario(path: &Path, command: Option<Command>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario_with(&text, command, path.parent())
}

pub fn parse_scenario_with(
    text: &str,
    command: Option<Command>,
    base_dir: Option<&Path>,
) -> Result<Scenario> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("malformed scenario: {e}")))?;
    let Value::Object(doc) = doc else {
        return Err(CliError::Parse("scenario must be a JSON object".into()));
    };
    let mut raw = BTreeMap::new();
    flatten("", doc, &mut raw)?;

    let named = match raw.get("command") {
        Some(v) => {
            let entry = lookup("command").unwrap();
            let Ok(Param::Text(s)) = entry.coerce(v) else {
                return Err(CliError::validation(
                    "command",
                    format!("expected {}, got {v}", entry.expected()),
                ));
            };
            Command::from_name(&s)
        }
        None => None,
    };
    let command = match (command, named) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::validation(
                "command",
                format!("scenario is for `{b}` but `{a}` was requested"),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(CliError::validation(
                "command",
                "required when no command is given on the command line",
            ))
        }
    };

    let mut values = BTreeMap::new();
    let mut output_path = None;
    for (path, v) in &raw {
        let entry = lookup(path).unwrap();
        if !entry.commands.contains(&command) {
            return Err(CliError::UnknownKey {
                key: path.clone(),
                reason: format!("not used by the `{command}` command"),
            });
        }
        let p = entry.coerce(v).map_err(|m| CliError::validation(path, m))?;
        match (entry.path, p) {
            ("command", _) => {}
            ("output.path", Param::Text(s)) => output_path = Some(PathBuf::from(s)),
            (_, p) => {
                values.insert(path.clone(), p);
            }
        }
    }
    for entry in registry().iter().filter(|k| k.commands.contains(&command)) {
        if values.contains_key(entry.path) {
            continue;
        }
        match &entry.presence {
            Presence::Required => {
                return Err(CliError::validation(
                    entry.path,
                    format!("required by the `{command}` command ({})", entry.expected()),
                ))
            }
            Presence::Default(p) => {
                values.insert(entry.path.to_string(), p.clone());
            }
            Presence::Optional => {}
        }
    }
    let job = build_job(command, &Values(&values), base_dir)?;
    Ok(Scenario {
        command,
        values,
        output_path,
        job,
    })
}

fn flatten(prefix: &str, obj: Map<String, Value>, out: &mut BTreeMap<String, Value>) -> Result<()> {
    for (k, v) in obj {
        let path = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        if lookup(&path).is_some() {
            if out.insert(path.clone(), v).is_some() {
                return Err(CliError::validation(path, "given more than once"));
            }
            continue;
        }
        let section = format!("{path}.");
        match v {
            Value::Object(m) if registry().iter().any(|s| s.path.starts_with(&section)) => {
                flatten(&path, m, out)?
            }
            _ => {
                return Err(CliError::UnknownKey {
                    key: path,
                    reason: "not a scenario key".into(),
                })
            }
        }
    }
    Ok(())
}

struct Values<'a>(&'a BTreeMap<String, Param>);

impl Values<'_> {
    fn opt_f(&self, k: &str) -> Option<f64> {
        match self.0.get(k)? {
            Param::Float(x) => Some(*x),
            Param::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn f(&self, k: &str) -> f64 {
        self.opt_f(k).unwrap_or_else(|| panic!("`{k}` resolved"))
    }

    fn int(&self, k: &str) -> u64 {
        match self.0.get(k) {
            Some(Param::Int(i)) => *i,
            _ => panic!("`{k}` resolved"),
        }
    }

    fn opt_text(&self, k: &str) -> Option<&str> {
        match self.0.get(k)? {
            Param::Text(s) => Some(s),
            _ => None,
        }
    }

    fn text(&self, k: &str) -> &str {
        self.opt_text(k).unwrap_or_else(|| panic!("`{k}` resolved"))
    }

    fn opt_list(&self, k: &str) -> Option<&[f64]> {
        match self.0.get(k)? {
            Param::List(v) => Some(v),
            _ => None,
        }
    }

    /// `base` with every `prefix.field` value laid over the matching field.
    fn overlay<T: Serialize + DeserializeOwned>(&self, prefix: &str, base: &T) -> Result<T> {
        let mut m = object(base);
        for (field, slot) in m.iter_mut() {
            if let Some(p) = self.0.get(&format!("{prefix}.{field}")) {
                *slot = serde_json::to_value(p).expect("parameters serialize");
            }
        }
        serde_json::from_value(Value::Object(m)).map_err(|e| CliError::validation(prefix, e))
    }
}

fn dot_error(e: DotError) -> CliError {
    match e {
        DotError::InvalidParameter { field, reason } => {
            CliError::validation(format!("dot.{field}"), reason)
        }
        other => CliError::validation("dot", other),
    }
}

fn gate_error(section: &str, e: GateError) -> CliError {
    match e {
        GateError::InvalidParameter { field, reason } => {
            CliError::validation(format!("{section}.{field}"), reason)
        }
        GateError::Dot(d) => dot_error(d),
        other => CliError::validation(section, other),
    }
}

fn memory_error(e: MemoryError) -> CliError {
    match e {
        MemoryError::InvalidParameter { field, reason } => {
            CliError::validation(format!("memory.{field}"), reason)
        }
        MemoryError::CoincidentPositions { .. } => CliError::validation("memory.positions", e),
        MemoryError::Dot(d) => dot_error(d),
        other => CliError::validation("memory", other),
    }
}

fn trap_error(e: TrapError) -> CliError {
    match e {
        TrapError::InvalidParameter { field, reason } => {
            CliError::validation(format!("trap.{field}"), reason)
        }
        TrapError::UnknownPreset(_) => CliError::validation("trap.preset", e),
        other => CliError::validation("trap.params_file", other),
    }
}

fn ascending(key: &str, xs: &[f64], strict: bool) -> Result<()> {
    let bad = xs
        .windows(2)
        .any(|w| if strict { w[1] <= w[0] } else { w[1] < w[0] });
    if bad {
        let order = if strict {
            "strictly increasing"
        } else {
            "non-decreasing"
        };
        return Err(CliError::validation(key, format!("values must be {order}")));
    }
    Ok(())
}

fn time_grid(v: &Values, key: &str) -> Result<Option<Vec<f64>>> {
    let Some(t) = v.opt_list(key) else {
        return Ok(None);
    };
    ascending(key, t, false)?;
    Ok(Some(t.to_vec()))
}

fn build_job(command: Command, v: &Values, base_dir: Option<&Path>) -> Result<Job> {
    match command {
        Command::Spectrum => {
            let dot = dot_params(v)?;
            let b_grid = v.opt_list("spectrum.b_grid").unwrap().to_vec();
            ascending("spectrum.b_grid", &b_grid, true)?;
            Ok(Job::Spectrum {
                dot,
                b_grid,
                gate_v: v.f("spectrum.gate_v"),
            })
        }
        Command::Gate => gate_job(v),
        Command::TwoQubit => two_qubit_job(v),
        Command::Memory => memory_job(v),
        Command::Trap => trap_job(v, base_dir),
    }
}

fn dot_params(v: &Values) -> Result<DotParameters> {
    let p: DotParameters = v.overlay("dot", &DotParameters::default())?;
    p.validate().map_err(dot_error)?;
    Ok(p)
}

fn gate_job(v: &Values) -> Result<Job> {
    let dot = dot_params(v)?;
    let b = v.f("gate.b_field");
    let samples = v.int("gate.samples") as usize;
    if samples == 1 {
        return Err(CliError::validation(
            "gate.samples",
            "must be 0 (native sampling) or >= 2",
        ));
    }
    let duration = v.opt_f("gate.duration");
    let target = v.opt_f("gate.target_phase");
    if v.text("gate.kind") == "microwave_drive" {
        if target.is_some() {
            return Err(CliError::validation(
                "gate.target_phase",
                "only used by field_kick pulses",
            ));
        }
        let duration = duration.ok_or_else(|| {
            CliError::validation("gate.duration", "required for microwave_drive pulses")
        })?;
        let freq = match v.opt_f("gate.drive_freq") {
            Some(f) => f,
            None => gates::valley_resonance_ghz(&dot, b).map_err(|e| gate_error("gate", e))?,
        };
        let drive =
            PulseSpec::microwave(b, duration, v.f("gate.drive_amp"), freq, v.f("gate.phase"));
        drive.validate().map_err(|e| gate_error("gate", e))?;
        let mode = match v.text("gate.rabi_mode") {
            "rwa_two_level" => RabiMode::RwaTwoLevel,
            _ => RabiMode::FullFourLevel,
        };
        let times = (samples > 0).then(|| linspace(0.0, duration, samples));
        return Ok(Job::Rabi {
            dot,
            drive,
            mode,
            times,
        });
    }

    if v.opt_f("gate.drive_freq").is_some()
        || v.f("gate.drive_amp") != 0.0
        || v.f("gate.phase") != 0.0
    {
        let key = if v.f("gate.drive_amp") != 0.0 {
            "gate.drive_amp"
        } else if v.f("gate.phase") != 0.0 {
            "gate.phase"
        } else {
            "gate.drive_freq"
        };
        return Err(CliError::validation(
            key,
            "only used by microwave_drive pulses",
        ));
    }
    let duration = match (duration, target) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation(
                "gate.target_phase",
                "conflicts with gate.duration",
            ))
        }
        (None, None) => {
            return Err(CliError::validation(
                "gate.duration",
                "required (or give gate.target_phase)",
            ))
        }
        (Some(t), None) => t,
        (None, Some(theta)) => {
            let ea =
                dotmodel::diagonal_energy(&dot, StateLabel::Alpha, b, 0.0).map_err(dot_error)?;
            let eg =
                dotmodel::diagonal_energy(&dot, StateLabel::Gamma, b, 0.0).map_err(dot_error)?;
            let rate = (ea - eg) / HBAR;
            if rate == 0.0 {
                return Err(CliError::validation(
                    "gate.target_phase",
                    "no phase accumulates at this gate.b_field",
                ));
            }
            let t = theta / rate;
            if t < 0.0 {
                return Err(CliError::validation(
                    "gate.target_phase",
                    "sign is opposite to the α−γ splitting at this gate.b_field",
                ));
            }
            t
        }
    };
    PulseSpec::field_kick(b, duration)
        .validate()
        .map_err(|e| gate_error("gate", e))?;
    let n = if samples == 0 { 101 } else { samples };
    Ok(Job::PhaseGate {
        dot,
        b_field: b,
        times: linspace(0.0, duration, n),
    })
}

fn two_qubit_job(v: &Values) -> Result<Job> {
    let dot = dot_params(v)?;
    let times = time_grid(v, "two_qubit.t_grid")?;
    let coupling = v.opt_f("two_qubit.coupling_strength");
    let default_grid = |period: f64| {
        if period.is_finite() {
            Ok(linspace(0.0, 2.0 * period, 101))
        } else {
            Err(CliError::validation(
                "two_qubit.t_grid",
                "required when the coupling vanishes",
            ))
        }
    };
    if v.text("two_qubit.interaction") == "exchange" {
        let j = coupling.ok_or_else(|| {
            CliError::validation("two_qubit.coupling_strength", "required for exchange")
        })?;
        let times = match times {
            Some(t) => t,
            None => default_grid(std::f64::consts::PI * HBAR / j.abs())?,
        };
        return Ok(Job::Exchange { coupling: j, times });
    }
    let sep = v.f("two_qubit.separation");
    let geometry = match coupling {
        Some(j) => TwoDotGeometry {
            separation: sep,
            coupling_strength: j,
        },
        None => TwoDotGeometry::from_dot(&dot, sep).map_err(|e| gate_error("two_qubit", e))?,
    };
    geometry
        .validate()
        .map_err(|e| gate_error("two_qubit", e))?;
    let times = match times {
        Some(t) => t,
        None => {
            default_grid(std::f64::consts::PI * HBAR / (4.0 * geometry.coupling_strength.abs()))?
        }
    };
    Ok(Job::Dipole { geometry, times })
}

fn memory_job(v: &Values) -> Result<Job> {
    let dot = dot_params(v)?;
    let b_field = v.opt_f("memory.b_field");
    let scenario = MemoryScenario {
        chain: NuclearChain {
            positions: v.opt_list("memory.positions").unwrap().to_vec(),
            g_n: v.f("memory.g_n"),
        },
        dot,
        electron_position: v.f("memory.electron_position"),
        b_field: b_field.unwrap_or(0.0),
        coupling_scale: v.f("memory.coupling_scale"),
        electron_valley: if v.text("memory.electron_valley") == "up" {
            Valley::Up
        } else {
            Valley::Down
        },
    };
    scenario.validate().map_err(memory_error)?;
    let (theta, phi) = (v.f("memory.qubit_theta"), v.f("memory.qubit_phi"));
    let qubit = [
        C64::new((0.5 * theta).cos(), 0.0),
        C64::from_polar((0.5 * theta).sin(), phi),
    ];
    Ok(Job::Memory {
        scenario,
        qubit,
        b_field,
        times: time_grid(v, "memory.t_grid")?,
    })
}

fn trap_job(v: &Values, base_dir: Option<&Path>) -> Result<Job> {
    let preset = v.text("trap.preset");
    let base = match v.opt_text("trap.params_file") {
        Some(file) => {
            let path = match base_dir {
                Some(dir) if Path::new(file).is_relative() => dir.join(file),
                _ => PathBuf::from(file),
            };
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            TrapConfig::from_params_str(&text, preset).map_err(trap_error)?
        }
        None => TrapConfig::preset(preset).map_err(trap_error)?,
    };
    let config: TrapConfig = v.overlay("trap", &base)?;
    config.validate().map_err(trap_error)?;
    let relax: RelaxOptions = v.overlay("relax", &RelaxOptions::default())?;
    Ok(Job::Trap {
        config,
        n_atoms: v.int("trap.n_atoms") as usize,
        relax,
    })
}

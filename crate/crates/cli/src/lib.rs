//! Command-line front end. [`run`] does all the work and returns the exit
//! code together with what should go to stdout and stderr, so the binary is
//! a thin wrapper and tests can call it directly.

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use condbelief::analysis::{
    check_hierarchy_morphism, check_type_morphism, completeness_report, hierarchies_included,
    is_non_redundant, refine, Depth, Inclusion, MorphismCheck, PlayerCompleteness, Redundancy,
};
use condbelief::{
    coherent_extend, fixtures, io, lift_cps, unfold, Error, Frame, HierarchyPrefix,
    Player, TypeStructure, ValidationReport,
};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "condbelief", version, about = "Exact analysis of finite conditional type structures")]
struct Cli {
    /// Output style.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a structure, CPS or prefix document.
    Validate { file: String },
    /// Print the hierarchy prefixes generated by a player's types.
    Unfold {
        file: String,
        #[arg(long)]
        player: String,
        #[arg(long)]
        depth: usize,
        /// Only this type.
        #[arg(long = "type")]
        type_label: Option<String>,
    },
    /// Whether every hierarchy generated by A is generated by B.
    Compare {
        a: String,
        b: String,
        #[command(flatten)]
        depth: DepthArgs,
        /// Also check the reverse inclusion.
        #[arg(long)]
        mutual: bool,
    },
    /// Print the partition refinement rounds.
    Refine { file: String },
    /// Whether distinct types generate distinct hierarchies.
    Redundancy { file: String },
    /// Check a type map from STAR into BASE.
    Morphism {
        star: String,
        base: String,
        #[arg(long)]
        map_file: String,
        #[arg(long, value_enum, default_value_t = MorphismKind::Type)]
        kind: MorphismKind,
        #[command(flatten)]
        depth: DepthArgs,
    },
    /// Whether every belief map is onto its CPS codomain.
    Completeness { file: String },
    /// Coherently extend a prefix up to the given order.
    Extend {
        /// A prefix document, or a structure together with --player and --type.
        file: String,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        player: Option<String>,
        #[arg(long = "type")]
        type_label: Option<String>,
        /// Order of the type's own prefix to start from (structure input).
        #[arg(long, default_value_t = 1)]
        from: usize,
    },
    /// Lift a CPS on X×Z to X×Y through a surjection Y → Z.
    Lift {
        nu: String,
        #[arg(long)]
        surjection_file: String,
    },
    /// Derive conditioning families from per-player signals.
    IngestSignals { file: String },
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct DepthArgs {
    /// Compare prefixes up to this order.
    #[arg(long)]
    depth: Option<usize>,
    /// Compare full hierarchies (default).
    #[arg(long)]
    fixpoint: bool,
}

impl DepthArgs {
    fn depth(&self) -> Depth {
        match self.depth {
            Some(n) => Depth::Order(n),
            None => Depth::Fixpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MorphismKind {
    Type,
    Hierarchy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    affirmative: bool,
    text: String,
    machine: Value,
}

impl Report {
    fn new(affirmative: bool, text: impl Into<String>, machine: Value) -> Self {
        Report {
            affirmative,
            text: text.into(),
            machine,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
///
/// Exit codes: 0 for a valid or affirmative result, 1 for a negative result
/// (the report carries a witness), 2 for usage and input errors.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let stdout = match cli.format {
                Format::Text => report.text,
                Format::Machine => {
                    let mut s = serde_json::to_string_pretty(&report.machine).expect("json");
                    s.push('\n');
                    s
                }
            };
            Outcome {
                code: if report.affirmative { 0 } else { 1 },
                stdout,
                stderr: String::new(),
            }
        }
        Err(msg) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

type CmdResult = Result<Report, String>;

fn fail(e: Error) -> String {
    match e {
        Error::InvalidStructure(r) | Error::InvalidCps(r) | Error::IncoherentPrefix(r) => {
            let lines: Vec<String> = r.violations.iter().map(|v| format!("  {v}")).collect();
            format!("input is not valid:\n{}", lines.join("\n"))
        }
        e => e.to_string(),
    }
}

/// Reads a file, or a built-in fixture when no file of that name exists.
fn load(name: &str) -> Result<String, String> {
    if Path::new(name).exists() {
        return std::fs::read_to_string(name).map_err(|e| format!("{name}: {e}"));
    }
    fixtures::named(name)
        .map(str::to_string)
        .ok_or_else(|| format!("{name}: no such file or built-in fixture"))
}

fn load_structure(name: &str) -> Result<TypeStructure, String> {
    io::parse_structure(&load(name)?).map_err(|e| format!("{name}: {}", fail(e)))
}

fn player(ts_names: &[String; 2], name: &str) -> Result<Player, String> {
    Player::BOTH
        .into_iter()
        .find(|p| ts_names[p.index()] == name)
        .ok_or_else(|| format!("unknown player `{name}`"))
}

fn execute(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Validate { file } => validate(file),
        Command::Unfold {
            file,
            player,
            depth,
            type_label,
        } => unfold_cmd(file, player, *depth, type_label.as_deref()),
        Command::Compare {
            a,
            b,
            depth,
            mutual,
        } => compare(a, b, depth.depth(), *mutual),
        Command::Refine { file } => refine_cmd(file),
        Command::Redundancy { file } => redundancy(file),
        Command::Morphism {
            star,
            base,
            map_file,
            kind,
            depth,
        } => morphism(star, base, map_file, *kind, depth.depth()),
        Command::Completeness { file } => completeness(file),
        Command::Extend {
            file,
            order,
            player,
            type_label,
            from,
        } => extend(file, *order, player.as_deref(), type_label.as_deref(), *from),
        Command::Lift {
            nu,
            surjection_file,
        } => lift(nu, surjection_file),
        Command::IngestSignals { file } => ingest(file),
    }
}

fn violations_report(what: &str, report: ValidationReport) -> Report {
    let machine = json!({ "valid": report.is_valid(), "violations": report.violations });
    let text = if report.is_valid() {
        format!("valid {what}\n")
    } else {
        let mut s = format!("invalid {what}: {} violation(s)\n", report.violations.len());
        for v in &report.violations {
            s.push_str(&format!("  {v}\n"));
        }
        s
    };
    Report::new(report.is_valid(), text, machine)
}

fn validate(file: &str) -> CmdResult {
    let text = load(file)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| format!("{file}: line {}, column {}: {e}", e.line(), e.column()))?;
    let err = |e: Error| format!("{file}: {}", fail(e));
    if value.get("players").is_some() {
        let ts = io::parse_structure(&text).map_err(err)?;
        Ok(violations_report("structure", ts.validate()))
    } else if value.get("prefix").is_some() {
        let (frame, _, p) = io::parse_prefix(&text).map_err(err)?;
        let report = condbelief::check_prefix_coherence(&p, &frame).map_err(err)?;
        Ok(violations_report("prefix", report))
    } else if value.get("conditionals").is_some() {
        let cps = io::parse_cps(&text).map_err(err)?;
        Ok(violations_report("CPS", cps.validate()))
    } else {
        Err(format!("{file}: not a structure, prefix or CPS document"))
    }
}

fn unfold_cmd(file: &str, player_name: &str, depth: usize, only: Option<&str>) -> CmdResult {
    let ts = load_structure(file)?;
    let p = player(ts.names(), player_name)?;
    let types: Vec<usize> = match only {
        Some(t) => vec![ts.types(p).index_of(t).map_err(fail)?],
        None => (0..ts.type_count(p)).collect(),
    };
    let all = unfold(&ts, depth).map_err(fail)?;
    let mut text = String::new();
    let mut machine = serde_json::Map::new();
    for t in types {
        let label = ts.types(p).label(t);
        let prefix = &all[p.index()][t];
        text.push_str(&format!("{label}: {}\n", prefix.summary(ts.frame())));
        machine.insert(label.to_string(), io::prefix_value(prefix, ts.frame(), ts.names()));
    }
    Ok(Report::new(
        true,
        text,
        json!({ "player": player_name, "depth": depth, "prefixes": machine }),
    ))
}

fn depth_label(depth: Depth) -> String {
    match depth {
        Depth::Order(n) => format!("order {n}"),
        Depth::Fixpoint => "fixpoint".into(),
    }
}

fn inclusion_value(star: &TypeStructure, inc: &Inclusion) -> Value {
    match inc {
        Inclusion::Included => json!({ "included": true }),
        Inclusion::NotIncluded { player, star_type } => json!({
            "included": false,
            "witness": {
                "player": star.name(*player),
                "type": star.types(*player).label(*star_type),
            }
        }),
    }
}

fn inclusion_text(a: &str, b: &str, star: &TypeStructure, inc: &Inclusion) -> String {
    match inc {
        Inclusion::Included => format!("{a} included-in {b}\n"),
        Inclusion::NotIncluded { player, star_type } => format!(
            "{a} not included-in {b}: type {} of player {} has no counterpart\n",
            star.types(*player).label(*star_type),
            star.name(*player)
        ),
    }
}

fn compare(a: &str, b: &str, depth: Depth, mutual: bool) -> CmdResult {
    let ta = load_structure(a)?;
    let tb = load_structure(b)?;
    let forward = hierarchies_included(&ta, &tb, depth).map_err(fail)?;
    let mut text = inclusion_text(a, b, &ta, &forward);
    let mut ok = forward == Inclusion::Included;
    let mut machine = json!({
        "depth": depth_label(depth),
        "forward": inclusion_value(&ta, &forward),
    });
    if mutual {
        let backward = hierarchies_included(&tb, &ta, depth).map_err(fail)?;
        text.push_str(&inclusion_text(b, a, &tb, &backward));
        ok &= backward == Inclusion::Included;
        machine["backward"] = inclusion_value(&tb, &backward);
    }
    if ta.frame().has_single_hierarchy() {
        text.push_str(
            "note: a single state admits exactly one hierarchy per player, so every structure over this frame is terminal\n",
        );
        machine["single_hierarchy_frame"] = json!(true);
    }
    Ok(Report::new(ok, text, machine))
}

fn blocks(ts: &TypeStructure, p: Player, part: &condbelief::Partition) -> Vec<Vec<String>> {
    part.members()
        .into_iter()
        .map(|m| m.into_iter().map(|t| ts.types(p).label(t).to_string()).collect())
        .collect()
}

fn refine_cmd(file: &str) -> CmdResult {
    let ts = load_structure(file)?;
    let r = refine(&ts).map_err(fail)?;
    let mut text = String::new();
    let mut rounds = Vec::new();
    for n in 0..=r.fixpoint() {
        let mut round = serde_json::Map::new();
        text.push_str(&format!("round {n}:"));
        for p in Player::BOTH {
            let b = blocks(&ts, p, r.partition(n, p));
            let shown: Vec<String> = b.iter().map(|blk| format!("{{{}}}", blk.join(","))).collect();
            text.push_str(&format!(" {}=[{}]", ts.name(p), shown.join(" ")));
            round.insert(ts.name(p).to_string(), json!(b));
        }
        text.push('\n');
        rounds.push(Value::Object(round));
    }
    text.push_str(&format!("fixpoint at round {}\n", r.fixpoint()));
    Ok(Report::new(
        true,
        text,
        json!({ "fixpoint": r.fixpoint(), "rounds": rounds }),
    ))
}

fn redundancy(file: &str) -> CmdResult {
    let ts = load_structure(file)?;
    Ok(match is_non_redundant(&ts).map_err(fail)? {
        Redundancy::NonRedundant => {
            Report::new(true, "non-redundant\n", json!({ "redundant": false }))
        }
        Redundancy::Redundant {
            player,
            first,
            second,
        } => {
            let (n, t, u) = (
                ts.name(player),
                ts.types(player).label(first),
                ts.types(player).label(second),
            );
            Report::new(
                false,
                format!("redundant: player {n} types {t} and {u} generate the same hierarchy\n"),
                json!({ "redundant": true, "witness": { "player": n, "types": [t, u] } }),
            )
        }
    })
}

fn morphism(star: &str, base: &str, map_file: &str, kind: MorphismKind, depth: Depth) -> CmdResult {
    let ts_star = load_structure(star)?;
    let ts_base = load_structure(base)?;
    let phi = io::parse_type_map(&load(map_file)?, &ts_star, &ts_base)
        .map_err(|e| format!("{map_file}: {}", fail(e)))?;
    match kind {
        MorphismKind::Type => {
            Ok(match check_type_morphism(&ts_star, &ts_base, &phi).map_err(fail)? {
                MorphismCheck::Holds => Report::new(
                    true,
                    "type morphism\n",
                    json!({ "kind": "type", "holds": true }),
                ),
                MorphismCheck::Fails(w) => Report::new(
                    false,
                    format!(
                        "not a type morphism: player {}, type {}, given {} at {}: image belief has {}, pushed belief has {}\n",
                        w.player, w.type_label, w.event, w.point, w.expected, w.found
                    ),
                    json!({ "kind": "type", "holds": false, "witness": w }),
                ),
            })
        }
        MorphismKind::Hierarchy => Ok(
            match check_hierarchy_morphism(&ts_star, &ts_base, &phi, depth).map_err(fail)? {
                None => Report::new(
                    true,
                    format!("hierarchy morphism ({})\n", depth_label(depth)),
                    json!({ "kind": "hierarchy", "depth": depth_label(depth), "holds": true }),
                ),
                Some((p, t)) => {
                    let (n, label) = (ts_star.name(p), ts_star.types(p).label(t));
                    let image = ts_base.types(p).label(phi.apply(p, t));
                    Report::new(
                        false,
                        format!(
                            "not a hierarchy morphism ({}): player {n} type {label} and its image {image} differ\n",
                            depth_label(depth)
                        ),
                        json!({
                            "kind": "hierarchy",
                            "depth": depth_label(depth),
                            "holds": false,
                            "witness": { "player": n, "type": label, "image": image }
                        }),
                    )
                }
            },
        ),
    }
}

fn completeness(file: &str) -> CmdResult {
    let ts = load_structure(file)?;
    let report = completeness_report(&ts).map_err(fail)?;
    let mut text = String::new();
    let mut players = serde_json::Map::new();
    for p in Player::BOTH {
        let name = ts.name(p);
        match &report.players[p.index()] {
            PlayerCompleteness::SingletonCodomain => {
                text.push_str(&format!("player {name}: complete (every conditioning cylinder is a single point)\n"));
                players.insert(name.into(), json!({ "complete": true }));
            }
            PlayerCompleteness::Incomplete { witness } => {
                text.push_str(&format!("player {name}: incomplete; this CPS is not the belief of any type:\n"));
                for (e, m) in witness.family().events().iter().zip(witness.conditionals()) {
                    let space = witness.space();
                    let masses: Vec<String> = m
                        .support()
                        .map(|x| format!("{}:{}", space.label(x), m.mass(x)))
                        .collect();
                    text.push_str(&format!("  given {}: {}\n", e.display(space), masses.join(" ")));
                }
                players.insert(
                    name.into(),
                    json!({ "complete": false, "witness": io::cps_value(witness) }),
                );
            }
        }
    }
    Ok(Report::new(
        report.is_complete(),
        text,
        json!({ "complete": report.is_complete(), "players": players }),
    ))
}

fn extend(
    file: &str,
    order: usize,
    player_name: Option<&str>,
    type_label: Option<&str>,
    from: usize,
) -> CmdResult {
    let text = load(file)?;
    let (frame, names, mut p): (Frame, [String; 2], HierarchyPrefix) = match (player_name, type_label) {
        (None, None) => io::parse_prefix(&text).map_err(|e| format!("{file}: {}", fail(e)))?,
        (Some(pn), Some(tl)) => {
            let ts = io::parse_structure(&text).map_err(|e| format!("{file}: {}", fail(e)))?;
            let pl = player(ts.names(), pn)?;
            let t = ts.types(pl).index_of(tl).map_err(fail)?;
            let all = unfold(&ts, from).map_err(fail)?;
            (ts.frame().clone(), ts.names().clone(), all[pl.index()][t].clone())
        }
        _ => return Err("--player and --type must be given together".into()),
    };
    if order < p.order() {
        return Err(format!(
            "requested order {order} is below the input order {}",
            p.order()
        ));
    }
    while p.order() < order {
        p = coherent_extend(&p, &frame).map_err(fail)?;
    }
    let doc = io::serialize_prefix(&p, &frame, &names);
    let machine: Value = serde_json::from_str(&doc).expect("prefix document is json");
    Ok(Report::new(true, doc, machine))
}

fn lift(nu_file: &str, map_file: &str) -> CmdResult {
    let nu = io::parse_cps(&load(nu_file)?).map_err(|e| format!("{nu_file}: {}", fail(e)))?;
    let (_, z) = nu
        .space()
        .factors()
        .ok_or_else(|| format!("{nu_file}: expected a CPS on a product space (`factors`)"))?;
    let f1 = io::parse_point_map(&load(map_file)?, z)
        .map_err(|e| format!("{map_file}: {}", fail(e)))?;
    let mu = lift_cps(&nu, &f1).map_err(fail)?;
    let doc = io::serialize_cps(&mu);
    Ok(Report::new(true, doc, io::cps_value(&mu)))
}

fn ingest(file: &str) -> CmdResult {
    let (frame, names) = io::parse_signals(&load(file)?).map_err(|e| format!("{file}: {}", fail(e)))?;
    let doc = io::serialize_frame(&frame, &names);
    let machine: Value = serde_json::from_str(&doc).expect("frame document is json");
    Ok(Report::new(true, doc, machine))
}

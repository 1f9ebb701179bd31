//! `onoma` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use onoma::evalsuite::evaluate;
use onoma::factmodel::{load_checkpoint, ModelConfig};
use onoma::fixtures::write_fixture;
use onoma::generator::{generate_with_model, SeedMotion};
use onoma::motion::{export_bvh, load_clip, render_frames, save_clip, RenderOptions};
use onoma::phonology::{normalize, parse_word_with};
use onoma::resources::DataDir;
use onoma::symbolism::{build_dictionary, lookup_or_quantify, QuantificationDictionary, RuleTable};
use onoma::timeline::{build_sequence, parse_captions, CaptionFormat, ConditioningSequence, SequenceOptions, TimedAnnotation};
use onoma::trainer::{load_dataset, train_to_dir, Manifest, TrainConfig};

const AFTER_HELP: &str = "Data tables are embedded; files named like them in $ONOMA_DATA_DIR take precedence.";

#[derive(Parser)]
#[command(name = "onoma", version, about = "Onomatopoeia-conditioned dance motion tools", after_help = AFTER_HELP)]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the mora decomposition of a romanized word.
    Parse {
        /// Word to parse, in romanized spelling.
        word: String,
    },
    /// Print the 43 adjective-scale values of a word.
    Embed {
        /// Word to quantify, in romanized spelling.
        word: String,
        /// Quantification dictionary consulted before the rule table.
        #[arg(long)]
        dict: Option<PathBuf>,
    },
    /// Build a quantification dictionary from a word list (one word per line).
    DictBuild {
        /// Word list; blank lines and lines starting with '#' are ignored.
        #[arg(long)]
        words: PathBuf,
        /// Dictionary JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Lay caption words out on a frame grid and write the conditioning binary.
    Condition {
        /// Caption file with one word per cue.
        #[arg(long)]
        captions: PathBuf,
        /// srt, sbv or csv; taken from the extension when omitted.
        #[arg(long)]
        format: Option<CaptionFormat>,
        /// Number of rows in the output.
        #[arg(long)]
        frames: usize,
        /// Frames per second of the grid.
        #[arg(long, default_value_t = 60.0)]
        fps: f64,
        #[command(flatten)]
        words: WordSource,
        /// Conditioning binary to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model from a manifest and a JSON training config.
    Train {
        /// Manifest JSON listing clip and caption pairs.
        #[arg(long)]
        manifest: PathBuf,
        /// Training config JSON; omitted fields take their defaults.
        #[arg(long)]
        config: PathBuf,
        /// Directory for checkpoints, metrics.csv and the resolved config.
        #[arg(long)]
        out: PathBuf,
        /// Only entries with this split.
        #[arg(long)]
        split: Option<String>,
        /// Override the configured number of steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Scale condition values into [-1, 1] before embedding.
        #[arg(long)]
        normalize_cond: bool,
        /// Quantification dictionary consulted before the rule table.
        #[arg(long)]
        dict: Option<PathBuf>,
    },
    /// Generate motion autoregressively from a checkpoint.
    ///
    /// Times are measured from the start of the seed, so generated frames begin
    /// at the seed length (2 s on the desk model).
    Generate {
        /// Model checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Caption file giving the words and their times.
        #[arg(long, conflicts_with_all = ["word", "from", "to"], required_unless_present = "word")]
        captions: Option<PathBuf>,
        /// srt, sbv or csv; taken from the extension when omitted.
        #[arg(long, requires = "captions")]
        format: Option<CaptionFormat>,
        /// A single word, used with --from and --to instead of captions.
        #[arg(long, requires_all = ["from", "to"])]
        word: Option<String>,
        /// Word start in seconds.
        #[arg(long, requires = "word")]
        from: Option<f64>,
        /// Word end in seconds.
        #[arg(long, requires = "word")]
        to: Option<f64>,
        /// Number of frames to generate.
        #[arg(long)]
        frames: usize,
        /// Clip JSON to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write SVG frames to this directory.
        #[arg(long)]
        render: Option<PathBuf>,
        /// Seed from the last frames of this clip instead of the rest pose.
        #[arg(long)]
        seed_clip: Option<PathBuf>,
        #[command(flatten)]
        words: WordSource,
    },
    /// Score generated clips against reference clips.
    Eval {
        /// Directory of generated clip JSON files.
        #[arg(long)]
        generated: PathBuf,
        /// Directory of reference clip JSON files.
        #[arg(long)]
        reference: PathBuf,
        /// Report JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one SVG per `stride` frames of a clip.
    Render {
        /// Clip JSON to draw.
        #[arg(long)]
        clip: PathBuf,
        /// Directory for the SVG files.
        #[arg(long)]
        out: PathBuf,
        /// Draw every n-th frame.
        #[arg(long, default_value_t = 10)]
        stride: usize,
    },
    /// Convert a clip to BVH.
    ExportBvh {
        /// Clip JSON to convert.
        #[arg(long)]
        clip: PathBuf,
        /// BVH file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Describe a checkpoint or a named preset.
    ModelInfo {
        /// Checkpoint to inspect.
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        checkpoint: Option<PathBuf>,
        /// desk or large.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Write the seeded synthetic dataset.
    Fixtures {
        /// Directory to write; created when missing.
        #[arg(long)]
        out: PathBuf,
        /// Seed for the per-joint motion pattern and the training config.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct WordSource {
    /// Quantification dictionary consulted before the rule table.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Fill the end frame of each annotation too.
    #[arg(long)]
    inclusive_end: bool,
}

struct Report {
    human: String,
    json: Value,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_dict(path: Option<&Path>, table: &RuleTable) -> Result<QuantificationDictionary> {
    match path {
        None => Ok(QuantificationDictionary::empty(table.version.clone())),
        Some(p) => QuantificationDictionary::from_json(&read_text(p)?).with_context(|| format!("{}", p.display())),
    }
}

fn load_annotations(path: &Path, format: Option<CaptionFormat>) -> Result<Vec<TimedAnnotation>> {
    let format = format
        .or_else(|| CaptionFormat::from_extension(path))
        .with_context(|| format!("{}: pass --format; the extension does not name one", path.display()))?;
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_captions(&bytes, format).with_context(|| format!("{}", path.display()))?.annotations)
}

fn sequence(annotations: &[TimedAnnotation], frames: usize, fps: f64, words: &WordSource, data: &DataDir) -> Result<ConditioningSequence> {
    let table = data.rules()?;
    let dict = load_dict(words.dict.as_deref(), &table)?;
    let options = SequenceOptions {
        fps,
        inclusive_end: words.inclusive_end,
    };
    let (seq, report) = build_sequence(annotations, frames, options, &dict, &table)?;
    for i in &report.clipped {
        eprintln!("warning: annotation {i} extends past frame {frames} and was clipped");
    }
    for (a, b) in &report.overlaps {
        eprintln!("warning: annotations {a} and {b} overlap; the later one wins");
    }
    Ok(seq)
}

fn clips_in(dir: &Path) -> Result<Vec<onoma::motion::MotionClip>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| load_clip(p).with_context(|| format!("{}", p.display())))
        .collect()
}

fn run(command: Command) -> Result<Report> {
    let data = DataDir::from_env();
    match command {
        Command::Parse { word } => {
            let tables = data.phonology()?;
            let normalized = normalize(&word)?;
            let parsed = parse_word_with(&normalized, &tables)?;
            let morae: Vec<String> = parsed.morae.iter().map(|m| m.to_string()).collect();
            Ok(Report {
                human: format!("{} -> {} ({})", word, parsed.surface, morae.join(" ")),
                json: json!({"input": word, "normalized": normalized, "word": parsed}),
            })
        }
        Command::Embed { word, dict } => {
            let table = data.rules()?;
            let registry = data.scales()?;
            let dict = load_dict(dict.as_deref(), &table)?;
            let v = lookup_or_quantify(&word, &dict, &table)?;
            let rows: Vec<(String, f64)> = registry.pairs().iter().map(|p| p.label()).zip(v.values().iter().copied()).collect();
            let human = rows.iter().map(|(l, x)| format!("{l:<24} {x:+.4}")).collect::<Vec<_>>().join("\n");
            let values: Vec<Value> = rows.iter().map(|(l, x)| json!({"scale": l, "value": x})).collect();
            Ok(Report {
                human,
                json: json!({"word": word, "table_version": table.version, "values": values}),
            })
        }
        Command::DictBuild { words, out } => {
            let table = data.rules()?;
            let text = read_text(&words)?;
            let list: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
            let dict = build_dictionary(&list, &table)?;
            write_text(&out, &dict.to_json())?;
            Ok(Report {
                human: format!("wrote {} entries to {}", dict.len(), out.display()),
                json: json!({"entries": dict.len(), "table_version": dict.table_version, "out": out}),
            })
        }
        Command::Condition {
            captions,
            format,
            frames,
            fps,
            words,
            out,
        } => {
            let annotations = load_annotations(&captions, format)?;
            let seq = sequence(&annotations, frames, fps, &words, &data)?;
            fs::write(&out, seq.to_bytes()).with_context(|| format!("cannot write {}", out.display()))?;
            let active = seq.frames.rows().into_iter().filter(|r| r.iter().any(|&v| v != 0.0)).count();
            Ok(Report {
                human: format!("wrote {frames} x 43 frames ({active} non-zero) to {}", out.display()),
                json: json!({"frames": frames, "dims": 43, "fps": fps, "active_frames": active, "annotations": annotations.len(), "out": out}),
            })
        }
        Command::Train {
            manifest,
            config,
            out,
            split,
            steps,
            normalize_cond,
            dict,
        } => {
            let mut cfg: TrainConfig = serde_json::from_str(&read_text(&config)?).with_context(|| format!("{}", config.display()))?;
            if let Some(s) = steps {
                cfg.steps = s;
            }
            if normalize_cond {
                cfg.model.normalize_condition = true;
            }
            let table = data.rules()?;
            let dict = load_dict(dict.as_deref(), &table)?;
            let m = Manifest::load(&manifest)?;
            let dataset = load_dataset(&m, split.as_deref(), &dict, &table)?;
            let outcome = train_to_dir(&dataset, &cfg, &out)?;
            for s in &outcome.skipped {
                eprintln!("warning: skipped {}: {}", s.id, s.reason);
            }
            let final_loss = outcome.final_loss();
            Ok(Report {
                human: format!(
                    "trained {} steps on {} windows; final loss {}; wrote {}",
                    outcome.metrics.len(),
                    outcome.n_windows,
                    final_loss.map_or("n/a".into(), |l| format!("{l:.6}")),
                    out.join("final.onof").display()
                ),
                json: json!({
                    "steps": outcome.metrics.len(),
                    "windows": outcome.n_windows,
                    "final_loss": final_loss,
                    "skipped": outcome.skipped,
                    "checkpoint": out.join("final.onof"),
                    "metrics": out.join("metrics.csv"),
                }),
            })
        }
        Command::Generate {
            checkpoint,
            captions,
            format,
            word,
            from,
            to,
            frames,
            out,
            render,
            seed_clip,
            words,
        } => {
            let model = load_checkpoint(&checkpoint).with_context(|| format!("{}", checkpoint.display()))?;
            let annotations = match (captions, word) {
                (Some(path), _) => load_annotations(&path, format)?,
                (None, Some(w)) => {
                    let (from, to) = (from.unwrap_or_default(), to.unwrap_or_default());
                    match TimedAnnotation::new(w, from, to) {
                        Some(a) => vec![a],
                        None => bail!("--from {from} --to {to} is not an interval with 0 <= from < to"),
                    }
                }
                (None, None) => bail!("pass --captions or --word"),
            };
            let cond_frames = frames + model.config().cond_len;
            let cond = sequence(&annotations, cond_frames, 60.0, &words, &data)?;
            let skeleton = data.skeleton()?;
            let seed = match &seed_clip {
                Some(p) => SeedMotion::Clip(load_clip(p).with_context(|| format!("{}", p.display()))?),
                None => SeedMotion::RestPose,
            };
            let clip = generate_with_model(&model, &skeleton, &seed, &cond, frames)?;
            save_clip(&clip, &out)?;
            let rendered = match &render {
                Some(dir) => render_frames(&clip, dir, 10, &RenderOptions::default())?.len(),
                None => 0,
            };
            Ok(Report {
                human: format!("wrote {frames} frames to {}", out.display()),
                json: json!({"frames": clip.n_frames(), "fps": clip.fps(), "out": out, "rendered": rendered}),
            })
        }
        Command::Eval { generated, reference, out } => {
            let table = data.predicates()?;
            let report = evaluate(&clips_in(&generated)?, &clips_in(&reference)?, &table)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            write_text(&out, &text)?;
            Ok(Report {
                human: format!(
                    "FID_k {:.4}  FID_g {:.4}  Dist_k {:.4}  Dist_g {:.4}",
                    report.fid_k, report.fid_g, report.dist_k, report.dist_g
                ),
                json: serde_json::to_value(&report)?,
            })
        }
        Command::Render { clip, out, stride } => {
            let c = load_clip(&clip).with_context(|| format!("{}", clip.display()))?;
            let files = render_frames(&c, &out, stride, &RenderOptions::default())?;
            Ok(Report {
                human: format!("wrote {} SVG files to {}", files.len(), out.display()),
                json: json!({"files": files.len(), "out": out}),
            })
        }
        Command::ExportBvh { clip, out } => {
            let c = load_clip(&clip).with_context(|| format!("{}", clip.display()))?;
            export_bvh(&c, &out)?;
            Ok(Report {
                human: format!("wrote {} joints x {} frames to {}", c.skeleton().len(), c.n_frames(), out.display()),
                json: json!({"joints": c.skeleton().len(), "frames": c.n_frames(), "out": out}),
            })
        }
        Command::ModelInfo { checkpoint, preset } => {
            let info = match (checkpoint, preset) {
                (Some(path), _) => load_checkpoint(&path).with_context(|| format!("{}", path.display()))?.info_json(),
                (None, Some(name)) => {
                    let config = ModelConfig::preset(&name).with_context(|| format!("unknown preset {name:?} (expected desk or large)"))?;
                    let model = onoma::factmodel::FactModel::<f32>::new(config)?;
                    model.info_json()
                }
                (None, None) => bail!("pass --checkpoint or --preset"),
            };
            let c = &info["config"];
            Ok(Report {
                human: format!(
                    "{} parameters; hidden {} heads {} layers {}/{}/{}",
                    info["n_parameters"], c["hidden_dim"], c["heads"], c["motion_layers"], c["cond_layers"], c["cross_layers"]
                ),
                json: info,
            })
        }
        Command::Fixtures { out, seed } => {
            let fixture = write_fixture(&out, seed, &data.skeleton()?, &data.rules()?)?;
            Ok(Report {
                human: format!(
                    "wrote {} clips to {}; expected order {}",
                    fixture.clips.len(),
                    out.display(),
                    fixture.description.expected_order.join(" > ")
                ),
                json: serde_json::to_value(&fixture.description)?,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    std::panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    match std::panic::catch_unwind(move || run(cli.command)) {
        Ok(Ok(report)) => {
            let text = if json { report.json.to_string() } else { report.human };
            // A reader that closes the pipe early is not an error.
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: writing output: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(3),
    }
}

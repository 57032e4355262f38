//! Serialization of pipeline outputs with lossless readers.
//!
//! Two shapes cover everything. Line records hold one tagged entry
//! per line as `tag key=value key=value ...`; values never contain
//! whitespace. Grids are comma-separated with a header row. Floats
//! are printed in Rust's shortest round-trip form, so reading a file
//! back reproduces the written values bit for bit.

use anyhow::{anyhow, bail, Context, Result};
use driveteach_core::env::class_census;
use driveteach_core::eval::{EvalMatrix, TestEnvironment, TestEnvironmentSet, TestOption};
use driveteach_core::{
    classify_environment, ControlInput, EnvClassKind, EnvironmentSpec, LearnerKind, PoolMode,
    RunConfig, StrategyLabel, TeachingSequence, Trajectory, VehicleState,
};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// One parsed `tag key=value ...` line.
pub struct KvLine {
    pub tag: String,
    fields: Vec<(String, String)>,
}

impl KvLine {
    pub fn parse(line: &str) -> Result<KvLine> {
        let mut tokens = line.split_whitespace();
        let tag = tokens.next().ok_or_else(|| anyhow!("empty record line"))?.to_string();
        let mut fields = Vec::new();
        for token in tokens {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value in {tag} record, got {token:?}"))?;
            fields.push((k.to_string(), v.to_string()));
        }
        Ok(KvLine { tag, fields })
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| anyhow!("{} record is missing field {key}", self.tag))
    }

    pub fn field<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key)?;
        raw.parse().map_err(|e| anyhow!("field {key}={raw}: {e}"))
    }
}

/// Parses every nonempty line of a record file with positions for
/// error messages.
fn parse_records(path: &Path) -> Result<Vec<KvLine>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| KvLine::parse(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

// ---------------------------------------------------------------- catalog

pub struct CatalogRecord {
    pub idx: usize,
    pub spec: EnvironmentSpec,
    pub class: EnvClassKind,
}

fn option_f64(value: Option<f64>) -> String {
    value.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn write_catalog(path: &Path, specs: &[EnvironmentSpec]) -> Result<()> {
    let mut out = String::new();
    for (idx, spec) in specs.iter().enumerate() {
        writeln!(
            out,
            "spec idx={idx} goal={} offset={} lane={} v0={} accel_time={} vf={} class={}",
            spec.goal,
            spec.offset,
            spec.lane,
            spec.v0,
            spec.accel_time,
            option_f64(spec.vf),
            classify_environment(spec),
        )?;
    }
    write_text(path, &out)
}

pub fn read_catalog(path: &Path) -> Result<Vec<CatalogRecord>> {
    let mut records = Vec::new();
    for kv in parse_records(path)? {
        if kv.tag != "spec" {
            bail!("unexpected {} record in catalog", kv.tag);
        }
        let vf_raw = kv.get("vf")?;
        let vf = if vf_raw == "none" { None } else { Some(vf_raw.parse()?) };
        records.push(CatalogRecord {
            idx: kv.field("idx")?,
            spec: EnvironmentSpec {
                goal: kv.field("goal")?,
                offset: kv.field("offset")?,
                lane: kv.field("lane")?,
                v0: kv.field("v0")?,
                accel_time: kv.field("accel_time")?,
                vf,
            },
            class: kv.field("class")?,
        });
    }
    Ok(records)
}

// ----------------------------------------------------------------- grids

fn class_header(prefix: &str) -> String {
    let classes: Vec<String> = EnvClassKind::ALL.iter().map(ToString::to_string).collect();
    format!("{prefix},{}", classes.join(","))
}

pub fn write_census(path: &Path, specs: &[EnvironmentSpec]) -> Result<()> {
    let census = class_census(specs);
    let mut out = String::from("class,count\n");
    for (class, count) in EnvClassKind::ALL.iter().zip(census) {
        writeln!(out, "{class},{count}")?;
    }
    writeln!(out, "total,{}", specs.len())?;
    write_text(path, &out)
}

/// Generic grid reader: header fields plus string-valued rows,
/// exactly as written.
pub fn read_grid(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = read_text(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| anyhow!("{} has no header row", path.display()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Ok((header, rows))
}

// -------------------------------------------------------------- sequences

pub struct SequenceRecord {
    pub step: usize,
    pub pool_idx: usize,
    pub catalog_index: usize,
    pub class: EnvClassKind,
    pub label: StrategyLabel,
    pub posterior: f64,
}

pub struct SequenceFile {
    pub generator: String,
    pub seed: u64,
    pub pool: String,
    pub uncoverable: Vec<StrategyLabel>,
    pub degenerate_skips: usize,
    pub entries: Vec<SequenceRecord>,
}

fn pool_name(mode: PoolMode) -> &'static str {
    match mode {
        PoolMode::Sample => "sample",
        PoolMode::Full => "full",
    }
}

fn label_list(labels: &[StrategyLabel]) -> String {
    if labels.is_empty() {
        "-".to_string()
    } else {
        labels.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

fn parse_label_list(raw: &str) -> Result<Vec<StrategyLabel>> {
    if raw == "-" {
        return Ok(Vec::new());
    }
    raw.split(',').map(|p| p.parse::<StrategyLabel>().map_err(|e| anyhow!(e))).collect()
}

pub fn write_sequence(path: &Path, seq: &TeachingSequence, config: &RunConfig) -> Result<()> {
    if seq.posterior_trace.len() != seq.entries.len() {
        bail!(
            "sequence {} has {} entries but {} trace points",
            seq.generator,
            seq.entries.len(),
            seq.posterior_trace.len()
        );
    }
    let mut out = String::new();
    writeln!(
        out,
        "sequence generator={} seed={} pool={} entries={} uncoverable={} degenerate_skips={}",
        seq.generator,
        config.seed,
        pool_name(config.pool_mode),
        seq.entries.len(),
        label_list(&seq.uncoverable),
        seq.degenerate_skips,
    )?;
    for (step, (entry, posterior)) in seq.entries.iter().zip(&seq.posterior_trace).enumerate() {
        writeln!(
            out,
            "entry step={step} pool_idx={} catalog={} class={} label={} posterior={posterior}",
            entry.pool_idx, entry.catalog_index, entry.class, entry.label,
        )?;
    }
    write_text(path, &out)
}

pub fn read_sequence(path: &Path) -> Result<SequenceFile> {
    let records = parse_records(path)?;
    let header = records.first().ok_or_else(|| anyhow!("{} is empty", path.display()))?;
    if header.tag != "sequence" {
        bail!("expected a sequence header, got {}", header.tag);
    }
    let mut file = SequenceFile {
        generator: header.get("generator")?.to_string(),
        seed: header.field("seed")?,
        pool: header.get("pool")?.to_string(),
        uncoverable: parse_label_list(header.get("uncoverable")?)?,
        degenerate_skips: header.field("degenerate_skips")?,
        entries: Vec::new(),
    };
    let declared: usize = header.field("entries")?;
    for kv in &records[1..] {
        if kv.tag != "entry" {
            bail!("unexpected {} record in sequence file", kv.tag);
        }
        file.entries.push(SequenceRecord {
            step: kv.field("step")?,
            pool_idx: kv.field("pool_idx")?,
            catalog_index: kv.field("catalog")?,
            class: kv.field("class")?,
            label: kv.field("label")?,
            posterior: kv.field("posterior")?,
        });
    }
    if file.entries.len() != declared {
        bail!("sequence declares {declared} entries but has {}", file.entries.len());
    }
    Ok(file)
}

// ------------------------------------------------------------ trajectories

pub struct TrajectoryRecord {
    pub step: usize,
    pub pool_idx: usize,
    pub catalog_index: usize,
    pub label: StrategyLabel,
    pub trajectory: Trajectory,
}

fn push_trajectory(out: &mut String, trajectory: &Trajectory) -> Result<()> {
    for (t, s) in trajectory.states.iter().enumerate() {
        writeln!(
            out,
            "state t={t} x={} y={} heading={} v={} alpha={}",
            s.x, s.y, s.heading, s.v, s.alpha
        )?;
    }
    for (t, c) in trajectory.controls.iter().enumerate() {
        writeln!(out, "control t={t} u1={} u2={}", c.u1, c.u2)?;
    }
    Ok(())
}

/// Reads `states` state lines and `controls` control lines from
/// `records` starting at `*cursor`, advancing the cursor.
fn take_trajectory(
    records: &[KvLine],
    cursor: &mut usize,
    dt: f64,
    states: usize,
    controls: usize,
) -> Result<Trajectory> {
    let mut trajectory = Trajectory { dt, states: Vec::with_capacity(states), controls: Vec::with_capacity(controls) };
    for expect in 0..states {
        let kv = records.get(*cursor).ok_or_else(|| anyhow!("truncated state block"))?;
        *cursor += 1;
        if kv.tag != "state" || kv.field::<usize>("t")? != expect {
            bail!("expected state t={expect}, got {} record", kv.tag);
        }
        trajectory.states.push(VehicleState::new(
            kv.field("x")?,
            kv.field("y")?,
            kv.field("heading")?,
            kv.field("v")?,
            kv.field("alpha")?,
        ));
    }
    for expect in 0..controls {
        let kv = records.get(*cursor).ok_or_else(|| anyhow!("truncated control block"))?;
        *cursor += 1;
        if kv.tag != "control" || kv.field::<usize>("t")? != expect {
            bail!("expected control t={expect}, got {} record", kv.tag);
        }
        trajectory.controls.push(ControlInput::new(kv.field("u1")?, kv.field("u2")?));
    }
    Ok(trajectory)
}

pub fn write_trajectories(path: &Path, seq: &TeachingSequence) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "trajectories generator={} entries={}", seq.generator, seq.entries.len())?;
    for (step, entry) in seq.entries.iter().enumerate() {
        writeln!(
            out,
            "demo step={step} pool_idx={} catalog={} label={} dt={} states={} controls={}",
            entry.pool_idx,
            entry.catalog_index,
            entry.label,
            entry.trajectory.dt,
            entry.trajectory.states.len(),
            entry.trajectory.controls.len(),
        )?;
        push_trajectory(&mut out, &entry.trajectory)?;
    }
    write_text(path, &out)
}

pub fn read_trajectories(path: &Path) -> Result<(String, Vec<TrajectoryRecord>)> {
    let records = parse_records(path)?;
    let header = records.first().ok_or_else(|| anyhow!("{} is empty", path.display()))?;
    if header.tag != "trajectories" {
        bail!("expected a trajectories header, got {}", header.tag);
    }
    let generator = header.get("generator")?.to_string();
    let declared: usize = header.field("entries")?;
    let mut demos = Vec::new();
    let mut cursor = 1;
    while cursor < records.len() {
        let kv = &records[cursor];
        cursor += 1;
        if kv.tag != "demo" {
            bail!("expected a demo record, got {}", kv.tag);
        }
        let states: usize = kv.field("states")?;
        let controls: usize = kv.field("controls")?;
        let trajectory = take_trajectory(&records, &mut cursor, kv.field("dt")?, states, controls)?;
        demos.push(TrajectoryRecord {
            step: kv.field("step")?,
            pool_idx: kv.field("pool_idx")?,
            catalog_index: kv.field("catalog")?,
            label: kv.field("label")?,
            trajectory,
        });
    }
    if demos.len() != declared {
        bail!("trajectory file declares {declared} demos but has {}", demos.len());
    }
    Ok((generator, demos))
}

// ----------------------------------------------------------------- matrix

pub struct MatrixFile {
    pub columns: Vec<LearnerKind>,
    pub rows: Vec<MatrixRow>,
}

pub struct MatrixRow {
    pub name: String,
    pub cells: Vec<f64>,
    pub degenerate: Vec<bool>,
}

pub fn write_matrix(path: &Path, matrix: &EvalMatrix) -> Result<()> {
    let columns: Vec<String> = matrix.columns.iter().map(ToString::to_string).collect();
    let mut out = format!("row,{}\n", columns.join(","));
    for ((name, cells), degenerate) in
        matrix.row_names.iter().zip(&matrix.cells).zip(&matrix.degenerate)
    {
        let rendered: Vec<String> = cells
            .iter()
            .zip(degenerate)
            .map(|(c, d)| if *d { "degenerate".to_string() } else { c.to_string() })
            .collect();
        writeln!(out, "{name},{}", rendered.join(","))?;
    }
    write_text(path, &out)
}

/// Reads the matrix grid back; `degenerate` cells carry posterior 0,
/// matching how they were recorded.
pub fn read_matrix(path: &Path) -> Result<MatrixFile> {
    let (header, grid) = read_grid(path)?;
    if header.first().map(String::as_str) != Some("row") {
        bail!("matrix header must start with `row`");
    }
    let columns: Vec<LearnerKind> = header[1..]
        .iter()
        .map(|name| name.parse::<LearnerKind>().map_err(|e| anyhow!(e)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for fields in grid {
        if fields.len() != columns.len() + 1 {
            bail!("matrix row {:?} has {} fields, expected {}", fields.first(), fields.len(), columns.len() + 1);
        }
        let mut row = MatrixRow { name: fields[0].clone(), cells: Vec::new(), degenerate: Vec::new() };
        for cell in &fields[1..] {
            if cell == "degenerate" {
                row.cells.push(0.0);
                row.degenerate.push(true);
            } else {
                row.cells.push(cell.parse()?);
                row.degenerate.push(false);
            }
        }
        rows.push(row);
    }
    Ok(MatrixFile { columns, rows })
}

// ---------------------------------------------------- tallies and helpfuls

pub fn write_tallies(path: &Path, rows: &[(String, [[usize; 4]; 2])]) -> Result<()> {
    let mut out = class_header("generator,variant");
    out.push('\n');
    for (name, grid) in rows {
        for (variant, counts) in grid.iter().enumerate() {
            let rendered: Vec<String> = counts.iter().map(ToString::to_string).collect();
            writeln!(out, "{name},{variant},{}", rendered.join(","))?;
        }
    }
    write_text(path, &out)
}

pub fn write_helpful(
    path: &Path,
    rows: &[(String, EnvClassKind, StrategyLabel, i64)],
) -> Result<()> {
    let mut out = String::from("generator,class,strategy,count\n");
    for (name, class, label, count) in rows {
        writeln!(out, "{name},{class},{label},{count}")?;
    }
    write_text(path, &out)
}

// ------------------------------------------------------- test environments

/// A written test set: the environments plus each option's trajectory
/// (outer per environment, inner per option rank).
pub struct TestBundle {
    pub threshold: f64,
    pub environments: Vec<TestEnvironment>,
    pub trajectories: Vec<Vec<Trajectory>>,
}

pub fn write_test_environments(
    path: &Path,
    set: &TestEnvironmentSet,
    trajectories: &[Vec<Trajectory>],
) -> Result<()> {
    if trajectories.len() != set.environments.len() {
        bail!(
            "{} trajectory bundles for {} test environments",
            trajectories.len(),
            set.environments.len()
        );
    }
    let mut out = String::new();
    writeln!(out, "tests threshold={} count={}", set.threshold, set.environments.len())?;
    for (idx, (env, bundle)) in set.environments.iter().zip(trajectories).enumerate() {
        writeln!(
            out,
            "testenv idx={idx} class={} target={} pool_idx={} catalog={}",
            env.class, env.target_label, env.pool_idx, env.catalog_index,
        )?;
        for (rank, (option, trajectory)) in env.options.iter().zip(bundle).enumerate() {
            writeln!(
                out,
                "option testenv={idx} rank={rank} candidate={} label={} gap={} dt={} states={} controls={}",
                option.candidate_idx,
                option.label,
                option.gap,
                trajectory.dt,
                trajectory.states.len(),
                trajectory.controls.len(),
            )?;
            push_trajectory(&mut out, trajectory)?;
        }
    }
    write_text(path, &out)
}

pub fn read_test_environments(path: &Path) -> Result<TestBundle> {
    let records = parse_records(path)?;
    let header = records.first().ok_or_else(|| anyhow!("{} is empty", path.display()))?;
    if header.tag != "tests" {
        bail!("expected a tests header, got {}", header.tag);
    }
    let mut bundle = TestBundle {
        threshold: header.field("threshold")?,
        environments: Vec::new(),
        trajectories: Vec::new(),
    };
    let declared: usize = header.field("count")?;
    let mut cursor = 1;
    while cursor < records.len() {
        let kv = &records[cursor];
        cursor += 1;
        if kv.tag != "testenv" {
            bail!("expected a testenv record, got {}", kv.tag);
        }
        let mut options = Vec::new();
        let mut option_trajectories = Vec::new();
        while options.len() < 4 {
            let opt = records.get(cursor).ok_or_else(|| anyhow!("truncated option block"))?;
            cursor += 1;
            if opt.tag != "option" {
                bail!("expected an option record, got {}", opt.tag);
            }
            options.push(TestOption {
                candidate_idx: opt.field("candidate")?,
                label: opt.field("label")?,
                gap: opt.field("gap")?,
            });
            let states: usize = opt.field("states")?;
            let controls: usize = opt.field("controls")?;
            option_trajectories.push(take_trajectory(
                &records,
                &mut cursor,
                opt.field("dt")?,
                states,
                controls,
            )?);
        }
        bundle.environments.push(TestEnvironment {
            class: kv.field("class")?,
            target_label: kv.field("target")?,
            pool_idx: kv.field("pool_idx")?,
            catalog_index: kv.field("catalog")?,
            options: options.try_into().expect("loop reads exactly four options"),
        });
        bundle.trajectories.push(option_trajectories);
    }
    if bundle.environments.len() != declared {
        bail!("test file declares {declared} environments but has {}", bundle.environments.len());
    }
    Ok(bundle)
}

// ---------------------------------------------------------------- answers

/// One simulated multiple-choice answer; `result` is None when the
/// folded belief was degenerate (every candidate mass zero).
pub struct AnswerRow {
    pub generator: String,
    pub model: LearnerKind,
    pub testenv: usize,
    pub result: Option<AnswerResult>,
}

pub struct AnswerResult {
    pub posterior: f64,
    pub answer: usize,
    pub correct: bool,
}

pub fn write_answers(path: &Path, rows: &[AnswerRow]) -> Result<()> {
    let mut out = String::from("generator,model,testenv,posterior,answer,correct\n");
    for row in rows {
        match &row.result {
            Some(r) => writeln!(
                out,
                "{},{},{},{},{},{}",
                row.generator, row.model, row.testenv, r.posterior, r.answer, r.correct
            )?,
            None => writeln!(out, "{},{},{},degenerate,-,-", row.generator, row.model, row.testenv)?,
        }
    }
    write_text(path, &out)
}

pub fn read_answers(path: &Path) -> Result<Vec<AnswerRow>> {
    let (header, grid) = read_grid(path)?;
    if header != ["generator", "model", "testenv", "posterior", "answer", "correct"] {
        bail!("unexpected answers header {header:?}");
    }
    let mut rows = Vec::new();
    for fields in grid {
        if fields.len() != 6 {
            bail!("answers row has {} fields", fields.len());
        }
        let result = if fields[3] == "degenerate" {
            None
        } else {
            Some(AnswerResult {
                posterior: fields[3].parse()?,
                answer: fields[4].parse()?,
                correct: fields[5].parse()?,
            })
        };
        rows.push(AnswerRow {
            generator: fields[0].clone(),
            model: fields[1].parse::<LearnerKind>().map_err(|e| anyhow!(e))?,
            testenv: fields[2].parse()?,
            result,
        });
    }
    Ok(rows)
}

// ------------------------------------------------------------- hyperparam

pub fn write_hyperparam(
    path: &Path,
    sweeps: &[(String, driveteach_core::HyperparamChoice)],
) -> Result<()> {
    let mut out = String::from(
        "model,value,sequence_len,distinct_labels,first,last,increase,qualified,chosen,fallback\n",
    );
    for (model, choice) in sweeps {
        for trial in &choice.trials {
            let chosen = trial.value == choice.value;
            writeln!(
                out,
                "{model},{},{},{},{},{},{},{},{},{}",
                trial.value,
                trial.sequence_len,
                trial.distinct_labels,
                trial.first,
                trial.last,
                trial.increase,
                trial.qualified,
                chosen,
                chosen && choice.fallback,
            )?;
        }
    }
    write_text(path, &out)
}

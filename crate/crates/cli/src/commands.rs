use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use chrono::Days;
use hems_agent::{
    run_retrieval, standard_tasks, write_traces_jsonl, AgentConfig, Toolkit, UserChannel, UserError,
};
use hems_core::{
    csvio, demo_parameters, optimize, synth_scenario, validate, Comparison, HemsParameters,
    ScenarioSeries,
};
use hems_eval::{precision_corpus, precision_table, run_grid, Providers, Report, UserProvider};
use hems_gateway::ToyEmbedder;
use hems_simuser::{randomize_truth, PersonaGroundTruth, ScriptedUser};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::providers;
use crate::{ChatArgs, EvaluateArgs, GenerateArgs, ServeArgs, SolveArgs};

/// Cost comparison printed by `solve` and `chat`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub city: String,
    pub date_start: String,
    pub date_end: String,
    pub steps: usize,
    pub dt_hours: f64,
    pub optimized_cost: f64,
    pub naive_cost: f64,
    pub percent_reduction: f64,
}

impl SolveSummary {
    fn new(params: &HemsParameters, c: &Comparison) -> Self {
        let mut reduction = c.percent_reduction();
        // equal bills can differ in the last few bits
        if reduction.abs() < 1e-9 {
            reduction = 0.0;
        }
        Self {
            city: params.city.clone(),
            date_start: params.date_start.to_string(),
            date_end: params.date_end.to_string(),
            steps: c.horizon.steps(),
            dt_hours: c.horizon.dt(),
            optimized_cost: c.optimized.total_cost,
            naive_cost: c.naive.total_cost,
            percent_reduction: reduction,
        }
    }

    fn print(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(
            out,
            "horizon: {} to {}, {} steps of {} h ({})",
            self.date_start, self.date_end, self.steps, self.dt_hours, self.city
        )?;
        writeln!(out, "naive cost:     £{:.4}", self.naive_cost)?;
        writeln!(out, "optimized cost: £{:.4}", self.optimized_cost)?;
        writeln!(out, "reduction:      {:.2}%", self.percent_reduction)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

/// Household parameters from TOML, or JSON when the extension says so.
pub fn load_parameters(path: &Path) -> Result<HemsParameters, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let parsed = if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    let params: HemsParameters =
        parsed.map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e.trim())))?;
    params.validate()?;
    Ok(params)
}

fn scenario_for(
    config: &RunConfig,
    params: &HemsParameters,
    csv: Option<&Path>,
    seed: Option<u64>,
) -> Result<ScenarioSeries, CliError> {
    Ok(match csv {
        Some(path) => csvio::load_scenario_csv(path)?,
        None => synth_scenario(
            &params.city,
            params.date_start,
            params.date_end,
            config.scenario.dt_hours,
            &config.tariff,
            seed.unwrap_or(config.scenario.seed),
        )?,
    })
}

/// Optimizes, checks the result and writes the requested schedule files.
fn optimize_and_report(
    config: &RunConfig,
    params: &HemsParameters,
    scenario: &ScenarioSeries,
    out_csv: Option<&Path>,
    naive_csv: Option<&Path>,
) -> Result<SolveSummary, CliError> {
    let comparison = optimize(params, &config.model, scenario, config.tolerance)?;
    let violations = validate(&comparison.optimized, &comparison.horizon, config.tolerance);
    if !violations.is_empty() {
        return Err(CliError::Other(format!(
            "solver output is not feasible: {violations}"
        )));
    }
    if let Some(path) = out_csv {
        csvio::write_schedule_csv(&comparison.horizon, &comparison.optimized, create(path)?)?;
    }
    if let Some(path) = naive_csv {
        csvio::write_schedule_csv(&comparison.horizon, &comparison.naive, create(path)?)?;
    }
    Ok(SolveSummary::new(params, &comparison))
}

pub fn solve(config: &RunConfig, args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = match &args.params {
        Some(path) => load_parameters(path)?,
        None => demo_parameters(),
    };
    let scenario = scenario_for(config, &params, args.scenario.as_deref(), args.seed)?;
    let summary = optimize_and_report(
        config,
        &params,
        &scenario,
        args.out.as_deref(),
        args.naive_out.as_deref(),
    )?;
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&summary).expect("plain data")
        )?;
    } else {
        summary.print(out)?;
    }
    Ok(())
}

/// Reads answers from a terminal, one line each.
struct StdinUser;

impl UserChannel for StdinUser {
    fn ask(&mut self, _question: &str) -> Result<String, UserError> {
        let mut line = String::new();
        match std::io::stdin().lock().read_line(&mut line) {
            Ok(0) => Err(UserError("standard input closed".into())),
            Ok(_) => Ok(line.trim_end().to_owned()),
            Err(e) => Err(UserError(e.to_string())),
        }
    }
}

/// Prints each exchange as it happens.
struct Echo<'a> {
    inner: Box<dyn UserChannel>,
    out: &'a mut dyn Write,
    show_answer: bool,
}

impl UserChannel for Echo<'_> {
    fn ask(&mut self, question: &str) -> Result<String, UserError> {
        let _ = writeln!(self.out, "agent: {question}");
        let _ = self.out.flush();
        let answer = self.inner.ask(question)?;
        if self.show_answer {
            let _ = writeln!(self.out, "user:  {answer}");
        }
        Ok(answer)
    }
}

pub fn chat(config: &RunConfig, args: &ChatArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let generator = providers::agent_generator(&config.provider)?;
    let agent = AgentConfig {
        agent_type: args.agent_type.unwrap_or(config.agent.agent_type),
        ..config.agent.clone()
    };
    let inner: Box<dyn UserChannel> = match args.scripted_user {
        Some(mode) => {
            let truth = match args.persona_seed {
                Some(seed) => randomize_truth(seed),
                None => PersonaGroundTruth::from_parameters(&demo_parameters()),
            };
            Box::new(ScriptedUser::new(mode, truth))
        }
        None => Box::new(StdinUser),
    };
    let retrieval = {
        let mut user = Echo {
            inner,
            out: &mut *out,
            show_answer: args.scripted_user.is_some(),
        };
        run_retrieval(
            standard_tasks(),
            generator.as_ref(),
            &mut user,
            &Toolkit::standard(),
            &agent,
        )
    };
    let traces = match &retrieval {
        Ok(r) => Some(&r.report.traces),
        Err(f) => f.report.as_ref().map(|r| &r.traces),
    };
    if let (Some(path), Some(traces)) = (&args.traces, traces) {
        write_traces_jsonl(traces, create(path)?)?;
    }
    let retrieval = retrieval?;
    let p = &retrieval.parameters;
    writeln!(
        out,
        "parameters: {} | {} to {} | {} EV(s) home {}-{} | comfort {}-{} °C",
        p.city,
        p.date_start,
        p.date_end,
        p.ev_count,
        p.ev_arrival_time.format("%H:%M"),
        p.ev_departure_time.format("%H:%M"),
        p.t_min,
        p.t_max
    )?;
    writeln!(
        out,
        "questions: {}, agent instantiations: {}",
        retrieval.report.questions(),
        retrieval.report.traces.len()
    )?;
    if args.no_solve {
        return Ok(());
    }
    let scenario = scenario_for(config, p, None, None)?;
    let summary = optimize_and_report(config, p, &scenario, args.out.as_deref(), None)?;
    summary.print(out)?;
    Ok(())
}

pub fn evaluate(
    config: &RunConfig,
    args: &EvaluateArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut config = config.clone();
    let e = &mut config.eval;
    if let Some(t) = args.trials {
        e.trials = t;
        e.precision_trials = t;
    }
    if let Some(t) = args.precision_trials {
        e.precision_trials = t;
    }
    if let Some(s) = args.seed {
        e.seed = s;
    }
    if let Some(a) = &args.agent_types {
        e.agent_types = a.clone();
    }
    if let Some(d) = &args.difficulties {
        e.difficulties = d.clone();
    }
    if let Some(w) = args.workers {
        e.workers = Some(w);
    }
    if let Some(o) = &args.out {
        e.output_dir = o.clone();
    }
    e.strict |= args.strict;
    config.validate()?;
    let grid = config.grid();

    let (providers, embedder) = if args.scripted {
        let providers = Providers {
            agent: providers::agent_generator(&Default::default())?,
            user: UserProvider::Scripted,
        };
        (
            providers,
            Box::new(ToyEmbedder::default()) as Box<dyn hems_gateway::Embedder>,
        )
    } else {
        let providers = Providers {
            agent: providers::agent_generator(&config.provider)?,
            user: providers::user_provider(&config.user_provider)?,
        };
        (providers, providers::embedder(&config.embedding)?)
    };

    let trials = run_grid(&providers, &grid)?;
    let precision = if config.eval.precision_trials > 0 {
        let samples = precision_corpus(
            &providers.user,
            &grid.difficulties,
            config.eval.precision_trials,
            grid.seed,
            embedder.as_ref(),
        )?;
        precision_table(&samples)
    } else {
        Vec::new()
    };
    let all_aborted = trials.iter().all(|t| t.aborted.is_some());
    let report = Report::new(providers.model_name(), grid, trials, precision)?;
    let dir = &config.eval.output_dir;
    report.write(dir)?;

    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| format!("{x:.1}"));
    writeln!(
        out,
        "{:<16} {:<14} {:>6} {:>6} {:>6}",
        "model", "agent", "easy", "medium", "hard"
    )?;
    for row in &report.accuracy {
        writeln!(
            out,
            "{:<16} {:<14} {:>6} {:>6} {:>6}",
            row.model,
            row.agent_type.to_string(),
            cell(row.easy),
            cell(row.medium),
            cell(row.hard)
        )?;
    }
    if !report.aborted.is_empty() {
        writeln!(out, "aborted trials: {}", report.aborted.len())?;
    }
    writeln!(out, "reports written to {}", dir.display())?;
    if all_aborted {
        return Err(CliError::Provider(
            "every trial was aborted by backend failures".into(),
        ));
    }
    Ok(())
}

pub fn serve(config: &RunConfig, args: &ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bind = args.bind.as_deref().unwrap_or(&config.service.bind);
    let addr = bind.parse().map_err(|e| CliError::Config {
        path: Some("service.bind".into()),
        message: format!("`{bind}`: {e}"),
    })?;
    let service_config = config.service_config();
    service_config.validate().map_err(CliError::config)?;
    // built outside the runtime: the HTTP client blocks
    let generator = providers::agent_generator(&config.provider)?;
    writeln!(out, "listening on http://{addr}")?;
    out.flush()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    let state = hems_service::AppState::new(generator, service_config);
    runtime.block_on(hems_service::serve(addr, state))?;
    Ok(())
}

pub fn generate(
    config: &RunConfig,
    args: &GenerateArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if args.days == 0 {
        return Err(CliError::config("--days must be at least 1"));
    }
    let dt = args.dt.unwrap_or(config.scenario.dt_hours);
    crate::config::check_dt(dt).map_err(|message| CliError::Config {
        path: Some("--dt".into()),
        message,
    })?;
    let end = args
        .start
        .checked_add_days(Days::new(u64::from(args.days) - 1))
        .ok_or_else(|| CliError::config("date range overflows the calendar"))?;
    let scenario = synth_scenario(
        &args.city,
        args.start,
        end,
        dt,
        &config.tariff,
        args.seed.unwrap_or(config.scenario.seed),
    )
    .map_err(|e| match e {
        hems_core::HemsError::InvalidScenario { .. }
        | hems_core::HemsError::InvalidParameters(_) => CliError::config(e.to_string()),
        other => other.into(),
    })?;
    match &args.out {
        Some(path) => {
            csvio::write_scenario_csv(&scenario, create(path)?)?;
            writeln!(out, "wrote {} rows to {}", scenario.len(), path.display())?;
        }
        None => csvio::write_scenario_csv(&scenario, out)?,
    }
    Ok(())
}

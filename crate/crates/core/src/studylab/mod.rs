//! Study sessions: telemetry records, quality gates, interaction averages,
//! hotel selection tallies, questionnaire handling and the statistics run
//! over the two conditions.

mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shapes::ShapeLabel;

pub use stats::{
    bootstrap_ci, mann_whitney, mann_whitney_with, percentile_bounds, Alternative, Interval, MannWhitney, Method,
    Statistic, DEFAULT_LEVEL, DEFAULT_RESAMPLES, EXACT_LIMIT,
};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("a group is empty")]
    EmptyGroup,
    #[error("values must be finite")]
    NonFinite,
    #[error("bootstrap needs 0 < level < 1 and at least one resample (got {level}, {resamples})")]
    BootstrapConfig { level: f64, resamples: usize },
    #[error("session {session_id}: {message}")]
    Selection { session_id: String, message: String },
    #[error("session {session_id}: {message}")]
    Response { session_id: String, message: String },
    #[error("{path} line {line}: {message}")]
    Record { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Log { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("questionnaire: {0}")]
    Questionnaire(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    Baseline,
    BiasAware,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Baseline, Condition::BiasAware];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Baseline => "BASELINE",
            Condition::BiasAware => "BIAS_AWARE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    #[serde(alias = "click")]
    Click,
    #[serde(alias = "hover")]
    Hover,
    #[serde(alias = "scroll")]
    Scroll,
}

impl EventKind {
    pub const ALL: [EventKind; 3] = [EventKind::Click, EventKind::Hover, EventKind::Scroll];
}

/// One interaction as sent by the client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t_ms: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hotel_id: Option<String>,
    /// Set for interactions with a rating bar or a pie sector under it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_id: Option<String>,
    pub widget: String,
}

pub const SELECTION_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Ranked, best first.
    pub hotels: Vec<String>,
    #[serde(default)]
    pub reasons: Vec<String>,
}

impl Selection {
    pub fn validate(&self, session_id: &str) -> Result<(), StudyError> {
        let distinct: BTreeSet<&String> = self.hotels.iter().collect();
        if self.hotels.len() != SELECTION_SIZE || distinct.len() != SELECTION_SIZE {
            return Err(StudyError::Selection {
                session_id: session_id.to_string(),
                message: format!("expected {SELECTION_SIZE} distinct hotels, got {:?}", self.hotels),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub condition: Condition,
    pub started_ms: u64,
    #[serde(default)]
    pub ended_ms: Option<u64>,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default)]
    pub selection: Option<Selection>,
    #[serde(default)]
    pub answers: Option<BTreeMap<String, u8>>,
}

impl SessionLog {
    /// Start to end, or to the last event while the session is still open.
    pub fn duration_ms(&self) -> u64 {
        let end = self
            .ended_ms
            .or_else(|| self.events.iter().map(|e| e.t_ms).max())
            .unwrap_or(self.started_ms);
        end.saturating_sub(self.started_ms)
    }
}

/// Line of a per-session append-only telemetry file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TelemetryRecord {
    Started {
        session_id: String,
        condition: Condition,
        t_ms: u64,
        hotel_order: Vec<String>,
    },
    Events {
        seq: u64,
        events: Vec<Event>,
    },
    Selection {
        t_ms: u64,
        selection: Selection,
    },
    Questionnaire {
        t_ms: u64,
        answers: BTreeMap<String, u8>,
    },
    Ended {
        t_ms: u64,
    },
}

impl SessionLog {
    /// Folds telemetry records into a log. The first record must be `Started`.
    pub fn from_records(records: &[TelemetryRecord]) -> Result<Self, String> {
        let Some(TelemetryRecord::Started { session_id, condition, t_ms, .. }) = records.first() else {
            return Err("log does not begin with a start record".into());
        };
        let mut log = SessionLog {
            session_id: session_id.clone(),
            condition: *condition,
            started_ms: *t_ms,
            ended_ms: None,
            events: Vec::new(),
            selection: None,
            answers: None,
        };
        for record in &records[1..] {
            match record {
                TelemetryRecord::Started { .. } => return Err("repeated start record".into()),
                TelemetryRecord::Events { events, .. } => log.events.extend(events.iter().cloned()),
                TelemetryRecord::Selection { selection, .. } => log.selection = Some(selection.clone()),
                TelemetryRecord::Questionnaire { answers, .. } => log.answers = Some(answers.clone()),
                TelemetryRecord::Ended { t_ms } => log.ended_ms = Some(*t_ms),
            }
        }
        Ok(log)
    }
}

pub fn parse_telemetry(content: &str, path: &str) -> Result<Vec<TelemetryRecord>, StudyError> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| StudyError::Record {
                path: path.to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads every `*.jsonl` telemetry file in `dir`, sorted by file name.
pub fn load_session_logs(dir: &Path) -> Result<Vec<SessionLog>, StudyError> {
    let io = |source| StudyError::Io { path: dir.display().to_string(), source };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|path| {
            let shown = path.display().to_string();
            let content = std::fs::read_to_string(path).map_err(|source| StudyError::Io {
                path: shown.clone(),
                source,
            })?;
            let records = parse_telemetry(&content, &shown)?;
            SessionLog::from_records(&records).map_err(|message| StudyError::Log { path: shown, message })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub min_ops: usize,
    pub min_minutes_per_hotel: f64,
    pub n_hotels: usize,
    /// Event kinds that count as operations.
    pub counted_kinds: BTreeSet<EventKind>,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            min_ops: 102,
            min_minutes_per_hotel: 1.0,
            n_hotels: 9,
            counted_kinds: EventKind::ALL.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityVerdict {
    pub session_id: String,
    pub questionnaire_valid: bool,
    pub operations_valid: bool,
    pub reasons: Vec<String>,
}

impl QualityVerdict {
    pub fn passed(&self) -> bool {
        self.questionnaire_valid && self.operations_valid
    }
}

pub fn quality_gate(log: &SessionLog, cfg: &GateConfig) -> QualityVerdict {
    let ops = log.events.iter().filter(|e| cfg.counted_kinds.contains(&e.kind)).count();
    let min_ms = cfg.min_minutes_per_hotel * cfg.n_hotels as f64 * 60_000.0;
    let duration = log.duration_ms();
    let mut reasons = Vec::new();
    let operations_valid = ops >= cfg.min_ops;
    if !operations_valid {
        reasons.push(format!("{ops} operations, fewer than {}", cfg.min_ops));
    }
    let questionnaire_valid = duration as f64 >= min_ms;
    if !questionnaire_valid {
        reasons.push(format!(
            "session lasted {:.1} min, under {:.1} min for {} hotels",
            duration as f64 / 60_000.0,
            min_ms / 60_000.0,
            cfg.n_hotels
        ));
    }
    QualityVerdict {
        session_id: log.session_id.clone(),
        questionnaire_valid,
        operations_valid,
        reasons,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BarAverages {
    pub clicks: f64,
    pub hovers: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KindAverages {
    pub clicks: f64,
    pub hovers: f64,
    pub scrolls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub participants: usize,
    /// Keyed by rating 1..=5.
    pub per_rating: BTreeMap<u8, BarAverages>,
    pub overall: KindAverages,
}

/// Per-participant averages for each condition present in `logs`.
pub fn interaction_summary(logs: &[SessionLog]) -> BTreeMap<Condition, ConditionSummary> {
    let mut out = BTreeMap::new();
    for condition in Condition::ALL {
        let group: Vec<&SessionLog> = logs.iter().filter(|l| l.condition == condition).collect();
        if group.is_empty() {
            continue;
        }
        let n = group.len() as f64;
        let count = |pred: &dyn Fn(&Event) -> bool| -> f64 {
            group.iter().map(|l| l.events.iter().filter(|e| pred(e)).count()).sum::<usize>() as f64 / n
        };
        let per_rating = (1..=5u8)
            .map(|r| {
                let at = |kind: EventKind| count(&|e: &Event| e.kind == kind && e.rating == Some(r));
                (r, BarAverages { clicks: at(EventKind::Click), hovers: at(EventKind::Hover) })
            })
            .collect();
        let overall = KindAverages {
            clicks: count(&|e: &Event| e.kind == EventKind::Click),
            hovers: count(&|e: &Event| e.kind == EventKind::Hover),
            scrolls: count(&|e: &Event| e.kind == EventKind::Scroll),
        };
        out.insert(condition, ConditionSummary { participants: group.len(), per_rating, overall });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotelShare {
    pub hotel_id: String,
    pub shape: Option<ShapeLabel>,
    pub selected: usize,
    /// Share of the condition's sessions that picked this hotel.
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTally {
    pub sessions: usize,
    pub hotels: Vec<HotelShare>,
    /// Picks landing on hotels of each shape, as a share of sessions.
    pub by_shape: BTreeMap<ShapeLabel, f64>,
}

/// Counts each selected hotel once per session. Sessions without a
/// selection are skipped; malformed selections are rejected.
pub fn selection_tally(
    logs: &[SessionLog],
    shapes: &BTreeMap<String, ShapeLabel>,
) -> Result<BTreeMap<Condition, ConditionTally>, StudyError> {
    let mut out = BTreeMap::new();
    for condition in Condition::ALL {
        let mut sessions = 0usize;
        let mut picks: BTreeMap<String, usize> = shapes.keys().map(|h| (h.clone(), 0)).collect();
        for log in logs.iter().filter(|l| l.condition == condition) {
            let Some(selection) = &log.selection else {
                continue;
            };
            selection.validate(&log.session_id)?;
            sessions += 1;
            for hotel in &selection.hotels {
                *picks.entry(hotel.clone()).or_default() += 1;
            }
        }
        if sessions == 0 {
            continue;
        }
        let pct = |n: usize| n as f64 * 100.0 / sessions as f64;
        let hotels: Vec<HotelShare> = picks
            .iter()
            .map(|(hotel_id, &selected)| HotelShare {
                hotel_id: hotel_id.clone(),
                shape: shapes.get(hotel_id).copied(),
                selected,
                pct: pct(selected),
            })
            .collect();
        let mut by_shape: BTreeMap<ShapeLabel, usize> = BTreeMap::new();
        for share in &hotels {
            if let Some(shape) = share.shape {
                *by_shape.entry(shape).or_default() += share.selected;
            }
        }
        out.insert(
            condition,
            ConditionTally {
                sessions,
                hotels,
                by_shape: by_shape.into_iter().map(|(s, n)| (s, pct(n))).collect(),
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: u8,
    pub max: u8,
    pub low_label: String,
    pub high_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionItem {
    pub id: String,
    pub text: String,
    /// Disagreement signals awareness of rating bias.
    pub reverse_scored: bool,
    pub bias_aware_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub scale: Scale,
    pub items: Vec<QuestionItem>,
}

const BUNDLED_QUESTIONNAIRE: &str = include_str!("../../data/questionnaire.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub session_id: String,
    pub condition: Condition,
    pub answers: BTreeMap<String, u8>,
}

impl Questionnaire {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_QUESTIONNAIRE).expect("bundled questionnaire is valid")
    }

    pub fn parse(content: &str) -> Result<Self, StudyError> {
        let q: Questionnaire =
            serde_json::from_str(content).map_err(|e| StudyError::Questionnaire(e.to_string()))?;
        let ids: BTreeSet<&str> = q.items.iter().map(|i| i.id.as_str()).collect();
        if ids.len() != q.items.len() || q.items.is_empty() {
            return Err(StudyError::Questionnaire("item ids must be unique and non-empty".into()));
        }
        if q.scale.min >= q.scale.max {
            return Err(StudyError::Questionnaire("scale min must be below max".into()));
        }
        Ok(q)
    }

    pub fn load(path: &Path) -> Result<Self, StudyError> {
        let content = std::fs::read_to_string(path).map_err(|source| StudyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content)
    }

    pub fn items_for(&self, condition: Condition) -> impl Iterator<Item = &QuestionItem> {
        self.items
            .iter()
            .filter(move |i| condition == Condition::BiasAware || !i.bias_aware_only)
    }

    /// Every item of the condition answered once, on the scale, and nothing else.
    pub fn validate_response(
        &self,
        session_id: &str,
        condition: Condition,
        answers: &BTreeMap<String, u8>,
    ) -> Result<(), StudyError> {
        let bad = |message: String| StudyError::Response { session_id: session_id.to_string(), message };
        let expected: BTreeSet<&str> = self.items_for(condition).map(|i| i.id.as_str()).collect();
        for (id, &value) in answers {
            if !expected.contains(id.as_str()) {
                return Err(bad(format!("unexpected item {id} for {condition}")));
            }
            if !(self.scale.min..=self.scale.max).contains(&value) {
                return Err(bad(format!("{id} = {value} is off the {}..{} scale", self.scale.min, self.scale.max)));
            }
        }
        if let Some(missing) = expected.iter().find(|id| !answers.contains_key(**id)) {
            return Err(bad(format!("missing answer for {missing}")));
        }
        Ok(())
    }
}

pub fn parse_responses(content: &str, path: &str) -> Result<Vec<QuestionnaireResponse>, StudyError> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| StudyError::Record {
                path: path.to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_responses(path: &Path) -> Result<Vec<QuestionnaireResponse>, StudyError> {
    let shown = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| StudyError::Io { path: shown.clone(), source })?;
    parse_responses(&content, &shown)
}

/// Responses recorded inside session logs.
pub fn responses_from_logs(logs: &[SessionLog]) -> Vec<QuestionnaireResponse> {
    logs.iter()
        .filter_map(|l| {
            l.answers.as_ref().map(|answers| QuestionnaireResponse {
                session_id: l.session_id.clone(),
                condition: l.condition,
                answers: answers.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub method: Method,
    pub alternative: Alternative,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            alternative: Alternative::TwoSided,
            level: DEFAULT_LEVEL,
            resamples: DEFAULT_RESAMPLES,
            seed: 20_231_001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    pub n: usize,
    pub mean: f64,
    pub ci: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionStats {
    pub id: String,
    pub reverse_scored: bool,
    pub conditions: BTreeMap<Condition, ConditionStats>,
    /// Baseline as group A, bias-aware as group B; absent when a condition
    /// has no answers (bias-aware-only items).
    pub test: Option<MannWhitney>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub config: ReportConfig,
    pub verdicts: Vec<QualityVerdict>,
    pub excluded_sessions: Vec<String>,
    pub questions: Vec<QuestionStats>,
    pub interactions: BTreeMap<Condition, ConditionSummary>,
}

/// Gates the sessions, then reports per-question tests and mean intervals
/// over the responses of sessions that passed. Responses without a matching
/// log are kept.
pub fn build_report(
    logs: &[SessionLog],
    responses: &[QuestionnaireResponse],
    questionnaire: &Questionnaire,
    gate: &GateConfig,
    cfg: &ReportConfig,
) -> Result<StatsReport, StudyError> {
    let verdicts: Vec<QualityVerdict> = logs.iter().map(|l| quality_gate(l, gate)).collect();
    let excluded: BTreeSet<String> = verdicts
        .iter()
        .filter(|v| !v.passed())
        .map(|v| v.session_id.clone())
        .collect();
    let mut kept = Vec::new();
    for r in responses {
        if excluded.contains(&r.session_id) {
            continue;
        }
        questionnaire.validate_response(&r.session_id, r.condition, &r.answers)?;
        kept.push(r);
    }
    let mut questions = Vec::new();
    for item in &questionnaire.items {
        let mut groups: BTreeMap<Condition, Vec<f64>> = BTreeMap::new();
        for r in &kept {
            if let Some(&v) = r.answers.get(&item.id) {
                groups.entry(r.condition).or_default().push(f64::from(v));
            }
        }
        let mut conditions = BTreeMap::new();
        for (&condition, values) in &groups {
            conditions.insert(
                condition,
                ConditionStats {
                    n: values.len(),
                    mean: Statistic::Mean.apply(values),
                    ci: bootstrap_ci(values, Statistic::Mean, cfg.level, cfg.resamples, cfg.seed)?,
                },
            );
        }
        let test = match (groups.get(&Condition::Baseline), groups.get(&Condition::BiasAware)) {
            (Some(a), Some(b)) => Some(mann_whitney_with(a, b, cfg.method, cfg.alternative)?),
            _ => None,
        };
        questions.push(QuestionStats {
            id: item.id.clone(),
            reverse_scored: item.reverse_scored,
            conditions,
            test,
        });
    }
    let passed: Vec<SessionLog> = logs.iter().filter(|l| !excluded.contains(&l.session_id)).cloned().collect();
    Ok(StatsReport {
        config: cfg.clone(),
        verdicts,
        excluded_sessions: excluded.into_iter().collect(),
        questions,
        interactions: interaction_summary(&passed),
    })
}

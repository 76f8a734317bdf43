//! Study sessions backed by append-only per-session telemetry files.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use biasview_core::studylab::{parse_telemetry, Condition, Event, Selection, SessionLog, TelemetryRecord};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ConditionMode;

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// Clock under test control.
#[derive(Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        Self(AtomicU64::new(start_ms))
    }

    pub fn advance(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

pub struct Session {
    pub log: SessionLog,
    pub hotel_order: Vec<String>,
    /// Sequence number the next event batch must carry.
    pub next_seq: u64,
    pub selected_at_ms: Option<u64>,
    path: PathBuf,
}

impl Session {
    pub fn completed(&self) -> bool {
        self.log.answers.is_some()
    }

    /// Appends and flushes one record, then applies it to the in-memory log.
    pub fn append(&mut self, record: TelemetryRecord) -> std::io::Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut line = serde_json::to_string(&record).map_err(std::io::Error::other)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        self.apply(&record);
        Ok(())
    }

    fn apply(&mut self, record: &TelemetryRecord) {
        match record {
            TelemetryRecord::Started { .. } => {}
            TelemetryRecord::Events { seq, events } => {
                self.log.events.extend(events.iter().cloned());
                self.next_seq = self.next_seq.max(seq + 1);
            }
            TelemetryRecord::Selection { t_ms, selection } => {
                self.log.selection = Some(selection.clone());
                self.selected_at_ms = Some(*t_ms);
            }
            TelemetryRecord::Questionnaire { answers, .. } => self.log.answers = Some(answers.clone()),
            TelemetryRecord::Ended { t_ms } => self.log.ended_ms = Some(*t_ms),
        }
    }
}

pub struct SessionStore {
    dir: PathBuf,
    seed: u64,
    mode: ConditionMode,
    fixed: Option<Condition>,
    created: Mutex<u64>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

fn load_session(path: &Path) -> anyhow::Result<Session> {
    let shown = path.display().to_string();
    let content = std::fs::read_to_string(path)?;
    let records = parse_telemetry(&content, &shown)?;
    let Some(TelemetryRecord::Started { hotel_order, .. }) = records.first() else {
        anyhow::bail!("{shown}: missing start record");
    };
    let log = SessionLog::from_records(&records[..1]).map_err(|m| anyhow::anyhow!("{shown}: {m}"))?;
    let mut session = Session {
        log,
        hotel_order: hotel_order.clone(),
        next_seq: 0,
        selected_at_ms: None,
        path: path.to_path_buf(),
    };
    for record in &records[1..] {
        session.apply(record);
    }
    Ok(session)
}

impl SessionStore {
    /// Opens the telemetry directory and reloads every session in it.
    pub fn open(dir: &Path, seed: u64, mode: ConditionMode, fixed: Option<Condition>) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut sessions = HashMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|x| x == "jsonl") {
                let session = load_session(&path)?;
                sessions.insert(session.log.session_id.clone(), Arc::new(Mutex::new(session)));
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            seed,
            mode,
            fixed,
            created: Mutex::new(sessions.len() as u64),
            sessions: Mutex::new(sessions),
        })
    }

    fn condition_for(&self, index: u64) -> Condition {
        match self.mode {
            ConditionMode::Fixed => self.fixed.unwrap_or(Condition::BiasAware),
            ConditionMode::Alternating => {
                if index.is_multiple_of(2) {
                    Condition::Baseline
                } else {
                    Condition::BiasAware
                }
            }
            ConditionMode::RandomSeeded => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(index + 1);
                if rng.random_bool(0.5) {
                    Condition::BiasAware
                } else {
                    Condition::Baseline
                }
            }
        }
    }

    /// Creates a session with a condition from the assignment mode and a
    /// hotel order shuffled with a per-session seed.
    pub fn create(&self, hotel_ids: &[String], now_ms: u64) -> anyhow::Result<Arc<Mutex<Session>>> {
        let mut created = self.created.lock().unwrap();
        let index = *created;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1_000_000 + index);
        let session_id = format!("s{index:04}-{:08x}", rng.next_u32());
        let mut hotel_order = hotel_ids.to_vec();
        hotel_order.shuffle(&mut rng);
        let condition = self.condition_for(index);
        let mut session = Session {
            log: SessionLog {
                session_id: session_id.clone(),
                condition,
                started_ms: now_ms,
                ended_ms: None,
                events: Vec::new(),
                selection: None,
                answers: None,
            },
            hotel_order: hotel_order.clone(),
            next_seq: 0,
            selected_at_ms: None,
            path: self.dir.join(format!("{session_id}.jsonl")),
        };
        let _ = File::create(&session.path)?;
        session.append(TelemetryRecord::Started { session_id: session_id.clone(), condition, t_ms: now_ms, hotel_order })?;
        let shared = Arc::new(Mutex::new(session));
        self.sessions.lock().unwrap().insert(session_id, shared.clone());
        *created += 1;
        Ok(shared)
    }

    pub fn get(&self, session_id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().unwrap().get(session_id).cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Outcome of offering an event batch to a session.
#[derive(Debug, PartialEq, Eq)]
pub enum BatchOutcome {
    Accepted(usize),
    Replayed,
    OutOfOrder { expected: u64 },
}

pub fn offer_batch(session: &mut Session, seq: u64, events: Vec<Event>) -> std::io::Result<BatchOutcome> {
    if seq < session.next_seq {
        return Ok(BatchOutcome::Replayed);
    }
    if seq > session.next_seq {
        return Ok(BatchOutcome::OutOfOrder { expected: session.next_seq });
    }
    let n = events.len();
    session.append(TelemetryRecord::Events { seq, events })?;
    Ok(BatchOutcome::Accepted(n))
}

pub fn store_selection(session: &mut Session, selection: Selection, now_ms: u64) -> std::io::Result<()> {
    session.append(TelemetryRecord::Selection { t_ms: now_ms, selection })
}

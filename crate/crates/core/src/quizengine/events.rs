use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::profile::ledger_key;
use super::{placement, update_proficiency, EstimatorConfig, LearnerProfile, PerSkill, Quiz, QuizError, QuizKind, ResponseRecord};
use crate::corpus::Level;

/// One entry of a learner's append-only log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created { learner_id: String },
    Delivered { quiz: Quiz },
    Answered { position: usize, chosen: usize, timestamp: u64 },
    Closed { timestamp: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("learner log does not start with a creation event")]
    NotCreated,
    #[error("learner already created")]
    AlreadyCreated,
    #[error("quiz {0} is still open")]
    QuizOpen(String),
    #[error("no quiz is open")]
    NoOpenQuiz,
    #[error("quiz is for activity {got}, expected {expected}")]
    WrongActivity { expected: u32, got: u32 },
    #[error(transparent)]
    Quiz(#[from] QuizError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenQuiz {
    pub quiz: Quiz,
    pub answers: Vec<Option<usize>>,
    /// Ledger keys that were unrectified when the quiz was delivered.
    pub pending: BTreeSet<String>,
}

/// What closing a quiz changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Closure {
    pub quiz_id: String,
    pub kind: QuizKind,
    pub activity: u32,
    pub responses: Vec<ResponseRecord>,
    /// Previously missed concepts answered correctly in this quiz.
    pub rectified: Vec<String>,
    pub proficiency_before: PerSkill<Level>,
    pub proficiency_after: PerSkill<Level>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applied {
    Created,
    Delivered,
    Answered(ResponseRecord),
    Closed(Closure),
}

/// Learner state folded from the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerState {
    pub profile: LearnerProfile,
    pub open: Option<OpenQuiz>,
    pub pretest_done: bool,
    pub posttest_done: bool,
}

impl LearnerState {
    pub fn new(learner_id: impl Into<String>) -> Self {
        LearnerState {
            profile: LearnerProfile::new(learner_id),
            open: None,
            pretest_done: false,
            posttest_done: false,
        }
    }

    /// Applies one event. Validation happens before any mutation, so a
    /// rejected event leaves the state unchanged.
    pub fn apply(&mut self, event: &Event, cfg: &EstimatorConfig) -> Result<Applied, StateError> {
        match event {
            Event::Created { .. } => Err(StateError::AlreadyCreated),
            Event::Delivered { quiz } => {
                if let Some(open) = &self.open {
                    return Err(StateError::QuizOpen(open.quiz.id.clone()));
                }
                let expected = match quiz.kind {
                    QuizKind::Pretest => 0,
                    QuizKind::Activity => self.profile.activity + 1,
                    QuizKind::Posttest => self.profile.activity,
                };
                if quiz.activity != expected {
                    return Err(StateError::WrongActivity {
                        expected,
                        got: quiz.activity,
                    });
                }
                self.profile.note_delivered(&quiz.deliveries);
                let pending = self
                    .profile
                    .mistake_ledger
                    .iter()
                    .filter(|(_, e)| !e.rectified)
                    .map(|(k, _)| k.clone())
                    .collect();
                self.open = Some(OpenQuiz {
                    quiz: quiz.clone(),
                    answers: vec![None; quiz.deliveries.len()],
                    pending,
                });
                Ok(Applied::Delivered)
            }
            Event::Answered {
                position,
                chosen,
                timestamp,
            } => {
                let open = self.open.as_mut().ok_or(StateError::NoOpenQuiz)?;
                let delivery = open
                    .quiz
                    .deliveries
                    .get(*position)
                    .ok_or(QuizError::UnknownDelivery(*position))?;
                if open.answers[*position].is_some() {
                    return Err(QuizError::AlreadyAnswered(*position).into());
                }
                let record = self
                    .profile
                    .record_response(delivery, *chosen, open.quiz.activity, *timestamp)?;
                open.answers[*position] = Some(*chosen);
                Ok(Applied::Answered(record))
            }
            Event::Closed { .. } => {
                let open = self.open.take().ok_or(StateError::NoOpenQuiz)?;
                let quiz = &open.quiz;
                let answered = open.answers.iter().filter(|a| a.is_some()).count();
                let responses: Vec<ResponseRecord> =
                    self.profile.history[self.profile.history.len() - answered..].to_vec();
                let before = self.profile.proficiency;
                match quiz.kind {
                    QuizKind::Pretest => {
                        self.profile.proficiency = placement(&responses);
                        self.pretest_done = true;
                    }
                    QuizKind::Activity => {
                        self.profile.activity = quiz.activity;
                        self.profile.proficiency = update_proficiency(&self.profile, cfg);
                    }
                    QuizKind::Posttest => self.posttest_done = true,
                }
                let mut rectified = Vec::new();
                for d in &quiz.deliveries {
                    let key = ledger_key(d.qtype, &d.concept);
                    let now = self.profile.mistake_ledger.get(&key).is_some_and(|e| e.rectified);
                    if now && open.pending.contains(&key) && !rectified.contains(&d.concept) {
                        rectified.push(d.concept.clone());
                    }
                }
                Ok(Applied::Closed(Closure {
                    quiz_id: quiz.id.clone(),
                    kind: quiz.kind,
                    activity: quiz.activity,
                    responses,
                    rectified,
                    proficiency_before: before,
                    proficiency_after: self.profile.proficiency,
                }))
            }
        }
    }
}

/// Rebuilds a learner's state from the start of its log.
pub fn replay<'a>(
    events: impl IntoIterator<Item = &'a Event>,
    cfg: &EstimatorConfig,
) -> Result<LearnerState, StateError> {
    let mut events = events.into_iter();
    let Some(Event::Created { learner_id }) = events.next() else {
        return Err(StateError::NotCreated);
    };
    let mut state = LearnerState::new(learner_id.clone());
    for event in events {
        state.apply(event, cfg)?;
    }
    Ok(state)
}

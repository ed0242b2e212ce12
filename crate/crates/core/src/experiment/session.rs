use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::responses::{ResponseRecord, MAX_CONFIDENCE, MIN_CONFIDENCE};
use super::schedule::{Phase, Schedule, Trial, OPTION_COUNT};

/// A rest screen follows every this-many completed test trials.
pub const REST_INTERVAL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Instructions,
    InTrial,
    Confirmation,
    Rest,
    Done,
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionState::Instructions => "instructions",
            SessionState::InTrial => "in_trial",
            SessionState::Confirmation => "confirmation",
            SessionState::Rest => "rest",
            SessionState::Done => "done",
        })
    }
}

/// A participant's answer before the server scores it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub trial_id: u32,
    pub chosen_option: usize,
    pub confidence: u8,
    pub reaction_time_ms: u64,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Begin,
    Submit(Submission),
    Continue,
    /// Confirmation screen auto-advance.
    Timeout,
}

impl SessionEvent {
    fn name(&self) -> &'static str {
        match self {
            SessionEvent::Begin => "begin",
            SessionEvent::Submit(_) => "submit",
            SessionEvent::Continue => "continue",
            SessionEvent::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("event {event} is not allowed in state {state}")]
    IllegalEvent { state: SessionState, event: &'static str },
    #[error("confidence {0} outside {MIN_CONFIDENCE}..={MAX_CONFIDENCE}")]
    Confidence(u8),
    #[error("choice {0} outside 0..{OPTION_COUNT}")]
    Choice(usize),
    #[error("trial {0} already has a response")]
    DuplicateResponse(u32),
    #[error("response is for trial {got} but trial {expected} is showing")]
    WrongTrial { expected: u32, got: u32 },
}

/// Result of a successful transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Advance {
    pub state: SessionState,
    /// Correctness, reported for practice submissions only.
    pub feedback: Option<bool>,
}

/// One participant working through a schedule.
///
/// `instructions → in_trial → confirmation → (in_trial | rest | done)`, with
/// `rest → in_trial`. Reaction times are measured by the client from
/// stimulus render, so rest screens never count toward them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub agent_id: String,
    pub schedule: Schedule,
    pub cursor: usize,
    pub state: SessionState,
    pub responses: Vec<ResponseRecord>,
}

impl Session {
    pub fn new(session_id: impl Into<String>, agent_id: impl Into<String>, schedule: Schedule) -> Self {
        Self {
            session_id: session_id.into(),
            agent_id: agent_id.into(),
            schedule,
            cursor: 0,
            state: SessionState::Instructions,
            responses: Vec::new(),
        }
    }

    /// Trial being shown, or shown next after a confirmation or rest screen.
    pub fn current_trial(&self) -> Option<&Trial> {
        self.schedule.trials.get(self.cursor)
    }

    pub fn completed(&self) -> usize {
        self.responses.len()
    }

    pub fn total(&self) -> usize {
        self.schedule.trials.len()
    }

    pub fn completed_test_trials(&self) -> usize {
        self.schedule.trials[..self.cursor]
            .iter()
            .filter(|t| t.phase == Phase::Test)
            .count()
    }

    /// Applies `event`; on error the session is left untouched.
    pub fn advance(&mut self, event: SessionEvent) -> Result<Advance, SessionError> {
        let illegal = |state, event: &SessionEvent| SessionError::IllegalEvent {
            state,
            event: event.name(),
        };
        let mut feedback = None;
        let next = match (self.state, &event) {
            (SessionState::Instructions, SessionEvent::Begin) => {
                if self.schedule.trials.is_empty() {
                    SessionState::Done
                } else {
                    SessionState::InTrial
                }
            }
            (SessionState::InTrial, SessionEvent::Submit(sub)) => {
                let trial = self.current_trial().expect("in_trial implies a pending trial");
                if sub.trial_id != trial.trial_id {
                    if self.responses.iter().any(|r| r.trial_id == sub.trial_id) {
                        return Err(SessionError::DuplicateResponse(sub.trial_id));
                    }
                    return Err(SessionError::WrongTrial {
                        expected: trial.trial_id,
                        got: sub.trial_id,
                    });
                }
                if !(MIN_CONFIDENCE..=MAX_CONFIDENCE).contains(&sub.confidence) {
                    return Err(SessionError::Confidence(sub.confidence));
                }
                if sub.chosen_option >= OPTION_COUNT {
                    return Err(SessionError::Choice(sub.chosen_option));
                }
                let correct = sub.chosen_option == trial.correct_option;
                if trial.phase == Phase::Practice {
                    feedback = Some(correct);
                }
                self.responses.push(ResponseRecord {
                    trial_id: sub.trial_id,
                    chosen_option: sub.chosen_option,
                    confidence: sub.confidence,
                    reaction_time_ms: sub.reaction_time_ms,
                    timestamp: sub.timestamp,
                    correct,
                });
                self.cursor += 1;
                SessionState::Confirmation
            }
            (SessionState::Confirmation, SessionEvent::Submit(sub)) => {
                return Err(SessionError::DuplicateResponse(sub.trial_id));
            }
            (SessionState::Confirmation, SessionEvent::Continue | SessionEvent::Timeout) => {
                let last_was_test = self.schedule.trials[self.cursor - 1].phase == Phase::Test;
                if self.cursor == self.schedule.trials.len() {
                    SessionState::Done
                } else if last_was_test && self.completed_test_trials() % REST_INTERVAL == 0 {
                    SessionState::Rest
                } else {
                    SessionState::InTrial
                }
            }
            (SessionState::Rest, SessionEvent::Continue) => SessionState::InTrial,
            (state, event) => return Err(illegal(state, event)),
        };
        self.state = next;
        Ok(Advance { state: next, feedback })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::schedule::{generate_schedule, ScheduleConfig};
    use crate::imagecore::{Dataset, Split};

    fn session() -> Session {
        let ds = Dataset::synthetic(Split::Test, 600, 3);
        Session::new("s1", "p1", generate_schedule(&ds, 5, &ScheduleConfig::default()).unwrap())
    }

    fn submit(s: &Session, confidence: u8) -> SessionEvent {
        let t = s.current_trial().unwrap();
        SessionEvent::Submit(Submission {
            trial_id: t.trial_id,
            chosen_option: t.correct_option,
            confidence,
            reaction_time_ms: 1000,
            timestamp: 0,
        })
    }

    #[test]
    fn confidence_out_of_range_rejected() {
        let mut s = session();
        s.advance(SessionEvent::Begin).unwrap();
        let before = s.clone();
        assert_eq!(s.advance(submit(&s, 6)), Err(SessionError::Confidence(6)));
        assert_eq!(s.advance(submit(&s, 0)), Err(SessionError::Confidence(0)));
        assert_eq!(s, before);
    }

    #[test]
    fn bad_choice_rejected() {
        let mut s = session();
        s.advance(SessionEvent::Begin).unwrap();
        let t = s.current_trial().unwrap().trial_id;
        let ev = SessionEvent::Submit(Submission {
            trial_id: t,
            chosen_option: 5,
            confidence: 3,
            reaction_time_ms: 1,
            timestamp: 0,
        });
        assert_eq!(s.advance(ev), Err(SessionError::Choice(5)));
    }

    #[test]
    fn illegal_events() {
        let mut s = session();
        assert!(matches!(s.advance(SessionEvent::Continue), Err(SessionError::IllegalEvent { .. })));
        assert!(matches!(s.advance(submit(&s, 3)), Err(SessionError::IllegalEvent { .. })));
        s.advance(SessionEvent::Begin).unwrap();
        assert!(matches!(s.advance(SessionEvent::Timeout), Err(SessionError::IllegalEvent { .. })));
        assert!(matches!(s.advance(SessionEvent::Begin), Err(SessionError::IllegalEvent { .. })));
    }

    #[test]
    fn duplicate_submit_rejected() {
        let mut s = session();
        s.advance(SessionEvent::Begin).unwrap();
        let ev = submit(&s, 3);
        s.advance(ev.clone()).unwrap();
        assert_eq!(s.state, SessionState::Confirmation);
        let id = match &ev {
            SessionEvent::Submit(sub) => sub.trial_id,
            _ => unreachable!(),
        };
        assert_eq!(s.advance(ev.clone()), Err(SessionError::DuplicateResponse(id)));
        s.advance(SessionEvent::Continue).unwrap();
        // resubmitting an answered trial while the next one shows
        assert_eq!(s.advance(ev), Err(SessionError::DuplicateResponse(id)));
        assert_eq!(s.responses.len(), 1);
    }

    #[test]
    fn practice_gets_feedback_test_does_not() {
        let mut s = session();
        s.advance(SessionEvent::Begin).unwrap();
        let adv = s.advance(submit(&s, 3)).unwrap();
        assert_eq!(adv.feedback, Some(true));
        while s.current_trial().unwrap().phase == Phase::Practice {
            s.advance(SessionEvent::Timeout).unwrap();
            s.advance(submit(&s, 3)).unwrap();
        }
        s.advance(SessionEvent::Continue).unwrap();
        let adv = s.advance(submit(&s, 3)).unwrap();
        assert_eq!(adv.feedback, None);
    }

    #[test]
    fn scripted_full_run() {
        let mut s = session();
        s.advance(SessionEvent::Begin).unwrap();
        let mut rests_after = Vec::new();
        let mut submits = 0;
        while s.state != SessionState::Done {
            match s.state {
                SessionState::InTrial => {
                    s.advance(submit(&s, 1 + (submits % 5) as u8)).unwrap();
                    submits += 1;
                }
                SessionState::Confirmation => {
                    let adv = s.advance(SessionEvent::Timeout).unwrap();
                    if adv.state == SessionState::Rest {
                        rests_after.push(s.completed_test_trials());
                    }
                }
                SessionState::Rest => {
                    s.advance(SessionEvent::Continue).unwrap();
                }
                other => panic!("unexpected state {other}"),
            }
        }
        assert_eq!(submits, 110);
        assert_eq!(s.responses.len(), 110);
        assert_eq!(rests_after, vec![10, 20, 30, 40, 50, 60, 70, 80, 90]);
        assert!(s.responses.iter().all(|r| r.correct));
        assert!(matches!(s.advance(SessionEvent::Continue), Err(SessionError::IllegalEvent { .. })));
    }

    #[test]
    fn event_json_shape() {
        let ev = SessionEvent::Submit(Submission {
            trial_id: 3,
            chosen_option: 1,
            confidence: 2,
            reaction_time_ms: 10,
            timestamp: 5,
        });
        let v = serde_json::to_value(&ev).unwrap();
        assert_eq!(v["event"], "submit");
        assert_eq!(v["trial_id"], 3);
        assert_eq!(serde_json::from_value::<SessionEvent>(v).unwrap(), ev);
        assert_eq!(serde_json::to_string(&SessionEvent::Timeout).unwrap(), r#"{"event":"timeout"}"#);
    }
}

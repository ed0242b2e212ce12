//! Transform manifest, trial schedules, the per-participant session state
//! machine and response records.

mod manifest;
mod responses;
mod schedule;
mod session;
mod stimulus;

pub use manifest::{build_manifest, conditions, TransformManifest, BLOCK_SIZES, SCHEMA_VERSION, SHUFFLE_PROBABILITIES};
pub use responses::{
    load_network_responses, read_response_log, write_network_csv, write_response_log, Agent, NetworkResponses,
    ResponseError, ResponseRecord, MAX_CONFIDENCE, MIN_CONFIDENCE,
};
pub use schedule::{
    generate_schedule, manifest_transform, ImageRef, Phase, PlanEntry, Schedule, ScheduleConfig, ScheduleError,
    TestPlan, Trial, CANONICAL_PRACTICE_TRIALS, CANONICAL_TEST_TRIALS, OPTION_COUNT,
};
pub use session::{Advance, Session, SessionError, SessionEvent, SessionState, Submission, REST_INTERVAL};
pub use stimulus::{render_stimulus, StimulusError, DISPLAY_SIDE};

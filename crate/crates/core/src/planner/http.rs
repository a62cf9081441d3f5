//! Blocking HTTP adapter to a language-model planning service.

use std::time::Duration;

use ureq::Agent;

use crate::plan::{parse_plan, Plan, ValidationErrors, SCHEMA_VERSION};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("request to {endpoint} failed: {message}")]
    Transport { endpoint: String, message: String },
    #[error("planner service answered with HTTP {0}")]
    Status(u16),
    #[error("plan still invalid after {attempts} attempts:\n{errors}")]
    Invalid { attempts: u32, errors: ValidationErrors },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResponse {
    pub plan: Plan,
    pub attempts: u32,
}

#[derive(Debug, Clone)]
pub struct HttpPlanClient {
    endpoint: String,
    agent: Agent,
}

impl HttpPlanClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post(&self, prompt: &str) -> Result<String, AdapterError> {
        let body = serde_json::json!({ "prompt": prompt, "schema_version": SCHEMA_VERSION }).to_string();
        let transport = |e: ureq::Error| AdapterError::Transport {
            endpoint: self.endpoint.clone(),
            message: e.to_string(),
        };
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .send(body.as_bytes())
            .map_err(transport)?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(AdapterError::Status(status));
        }
        resp.body_mut().read_to_string().map_err(transport)
    }

    /// Sends `prompt`; a schema-invalid answer is retried once with the
    /// violations appended, after which the adapter gives up.
    pub fn request_plan(&self, prompt: &str) -> Result<PlanResponse, AdapterError> {
        let first = self.post(prompt)?;
        let errors = match parse_plan(&first) {
            Ok(plan) => return Ok(PlanResponse { plan, attempts: 1 }),
            Err(e) => e,
        };
        let repair = format!(
            "{prompt}\n## VALIDATION ERRORS\nYour previous answer was rejected:\n{errors}\nRespond with a corrected JSON plan document.\n"
        );
        let second = self.post(&repair)?;
        match parse_plan(&second) {
            Ok(plan) => Ok(PlanResponse { plan, attempts: 2 }),
            Err(errors) => Err(AdapterError::Invalid { attempts: 2, errors }),
        }
    }
}

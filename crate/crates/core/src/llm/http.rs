//! OpenAI-compatible HTTP chat provider. Endpoint, model, and API key come
//! from the run configuration and environment; network use is entirely
//! opt-in (the mock provider is the default when no credentials are set).

use super::{ChatProvider, ChatRequest, LlmError};
use serde::Deserialize;

pub struct OpenAiCompatChatProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    api_key: String,
}

#[derive(Deserialize)]
struct ChatCompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

impl OpenAiCompatChatProvider {
    /// `endpoint` is the API base, e.g. `https://api.openai.com/v1`.
    pub fn new(endpoint: &str, model: &str, api_key: &str) -> Result<Self, LlmError> {
        if api_key.is_empty() {
            return Err(LlmError::NotConfigured(
                "chat provider requires an API key (set the configured env var)".to_string(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| LlmError::NotConfigured(e.to_string()))?;
        Ok(OpenAiCompatChatProvider {
            client,
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key: api_key.to_string(),
        })
    }
}

impl ChatProvider for OpenAiCompatChatProvider {
    fn provider_id(&self) -> String {
        format!("openai-compat:{}", self.model)
    }

    fn complete_raw(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": 0,
        });
        let response = self
            .client
            .post(format!("{}/chat/completions", self.endpoint))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| LlmError::Transport {
                message: e.to_string(),
                attempts: 1,
            })?;
        if !response.status().is_success() {
            return Err(LlmError::Transport {
                message: format!("HTTP {}", response.status()),
                attempts: 1,
            });
        }
        let parsed: ChatCompletionResponse =
            response.json().map_err(|e| LlmError::Transport {
                message: format!("malformed completion envelope: {}", e),
                attempts: 1,
            })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| LlmError::Transport {
                message: "completion response had no choices".to_string(),
                attempts: 1,
            })
    }
}

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Schema version stamped on every JSON document.
pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// What a command produced, renderable in each supported format.
pub struct Output {
    pub command: &'static str,
    pub body: Map<String, Value>,
    pub text: String,
    pub csv: Option<String>,
}

impl Output {
    pub fn new(command: &'static str, body: Value, text: String) -> Self {
        let body = match body {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        Output { command, body, text, csv: None }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Text => Ok(self.text.clone()),
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| CliError::Usage(format!("`{}` has no CSV output", self.command))),
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("schema".into(), json!(SCHEMA));
                doc.insert("command".into(), json!(self.command));
                doc.extend(self.body.clone());
                Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
            }
        }
    }
}

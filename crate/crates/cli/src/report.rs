use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Value,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Value => "value",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Yes | Verdict::Value => 0,
            Verdict::No => 1,
        }
    }
}

/// What a subcommand produced: a verdict, optional witness and table, extra
/// JSON fields, and the lines shown to a human.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
    pub table: Option<Value>,
    pub extra: Map<String, Value>,
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str, verdict: Verdict) -> Self {
        Report {
            command: command.to_string(),
            verdict,
            witness: None,
            table: None,
            extra: Map::new(),
            lines: Vec::new(),
        }
    }

    pub fn line(mut self, text: impl Into<String>) -> Self {
        self.lines.push(text.into());
        self
    }

    pub fn witness(mut self, text: String) -> Self {
        self.witness = Some(text);
        self
    }

    pub fn table(mut self, table: Value) -> Self {
        self.table = Some(table);
        self
    }

    pub fn field(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self, ms: f64) -> Value {
        let mut out = json!({
            "command": self.command,
            "result": self.verdict.as_str(),
            "witness": self.witness,
            "table": self.table,
            "ms": ms,
        });
        let obj = out.as_object_mut().expect("report is an object");
        obj.extend(self.extra.clone());
        out
    }
}

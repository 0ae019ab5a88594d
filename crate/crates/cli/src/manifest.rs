use std::fmt::Write as _;

/// Provenance written as `#` comment lines at the top of every output file.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command_line: String,
    pub model: Option<String>,
    pub seeds: Vec<u64>,
    pub depth: Option<u32>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(model: Option<String>, seeds: Vec<u64>, depth: Option<u32>) -> Self {
        RunManifest {
            command_line: std::env::args().collect::<Vec<_>>().join(" "),
            model,
            seeds,
            depth,
            version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// One string per comment line, without the `# ` prefix.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("command: {}", self.command_line)];
        if let Some(m) = &self.model {
            out.push(format!("model: {m}"));
        }
        if !self.seeds.is_empty() {
            let mut s = String::new();
            for (i, seed) in self.seeds.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{seed}");
            }
            out.push(format!("seeds: {s}"));
        }
        if let Some(k) = self.depth {
            out.push(format!("depth: {k}"));
        }
        out.push(format!("version: {}", self.version));
        out.push(format!("timestamp: {}", self.timestamp));
        out
    }
}

use std::io::Read;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{parse_wav, AudioBuffer, SpeechError, Synthesizer};

const TEXT_PLACEHOLDER: &str = "{text}";
const OUT_PLACEHOLDER: &str = "{out}";
const STDERR_LIMIT: usize = 2048;

/// A command line such as `espeak-ng -w {out} {text}`.
///
/// The template is split into words once, shell style, when the spec is
/// built. Placeholders are substituted inside each word afterwards, so the
/// spoken text always reaches the program as part of a single argument and is
/// never seen by a shell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSynthSpec {
    template: String,
    argv: Vec<String>,
    timeout: Duration,
}

impl ExternalSynthSpec {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(10_000);

    pub fn new(template: impl Into<String>) -> Result<Self, SpeechError> {
        let template = template.into();
        if !template.contains(TEXT_PLACEHOLDER) || !template.contains(OUT_PLACEHOLDER) {
            return Err(SpeechError::BadTemplate(template));
        }
        let argv = shlex::split(&template)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| SpeechError::BadTemplate(template.clone()))?;
        Ok(Self {
            template,
            argv,
            timeout: Self::DEFAULT_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// The argument vector for one invocation.
    pub fn render(&self, text: &str, out: &str) -> Vec<String> {
        self.argv
            .iter()
            .map(|a| a.replace(OUT_PLACEHOLDER, out).replace(TEXT_PLACEHOLDER, text))
            .collect()
    }
}

/// Runs the external engine and reads back the WAV it wrote.
pub fn synthesize_external(spec: &ExternalSynthSpec, text: &str) -> Result<AudioBuffer, SpeechError> {
    let dir = tempfile::tempdir()?;
    let out_path = dir.path().join("speech.wav");
    let argv = spec.render(text, &out_path.to_string_lossy());
    let (program, args) = argv.split_first().expect("template has at least one word");

    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SpeechError::Spawn {
            program: program.clone(),
            source,
        })?;

    let mut stderr_pipe = child.stderr.take().expect("stderr is piped");
    let stderr_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr_pipe.read_to_end(&mut buf);
        buf
    });

    let status = match wait_with_deadline(&mut child, spec.timeout)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SpeechError::Timeout(spec.timeout));
        }
    };
    let stderr = stderr_reader.join().unwrap_or_default();
    if !status.success() {
        let mut diag = String::from_utf8_lossy(&stderr).trim().to_string();
        if diag.len() > STDERR_LIMIT {
            let cut = diag.floor_char_boundary(STDERR_LIMIT);
            diag.truncate(cut);
        }
        return Err(SpeechError::NonZeroExit {
            status: status.to_string(),
            stderr: diag,
        });
    }

    let bytes = std::fs::read(&out_path)?;
    Ok(parse_wav(&bytes)?)
}

fn wait_with_deadline(
    child: &mut Child,
    timeout: Duration,
) -> std::io::Result<Option<std::process::ExitStatus>> {
    let deadline = Instant::now() + timeout;
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Some(status));
        }
        if Instant::now() >= deadline {
            return Ok(None);
        }
        thread::sleep(Duration::from_millis(5));
    }
}

#[derive(Debug, Clone)]
pub struct ExternalSynth {
    pub spec: ExternalSynthSpec,
}

impl ExternalSynth {
    pub fn new(spec: ExternalSynthSpec) -> Self {
        Self { spec }
    }
}

impl Synthesizer for ExternalSynth {
    fn synthesize(&self, text: &str) -> Result<AudioBuffer, SpeechError> {
        synthesize_external(&self.spec, text)
    }
}

//! The text-generation backend contract and the offline backends.

use std::collections::VecDeque;
use std::sync::Mutex;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::BackendError;
use crate::gateway::template::{query_block, TemplateName};
use crate::interview::strip_list_marker;
use crate::sightdb::{field_tokens, query_tokens, score, HitField};
use crate::text::{content_tokens, first_sentence, stable_hash, truncate_chars};

/// Sampling parameters sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub temperature: f32,
    pub max_length: usize,
    pub stop: Vec<String>,
    pub seed: u64,
    /// Name of the template that produced the prompt.
    pub task: String,
}

/// A completion service. Implementations must be safe to share between
/// sessions.
pub trait GenBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError>;
}

/// Output noise injected by [`MockBackend`] to exercise the filters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MockNoise {
    /// Chance of appending a question to any output.
    pub question_rate: f64,
    /// Chance of appending a number that is not in the prompt.
    pub fabricate_rate: f64,
    /// Chance of returning an empty string.
    pub empty_rate: f64,
    /// Chance of a transport error.
    pub error_rate: f64,
}

/// Deterministic offline backend. It reads the bound query block of the
/// prompt and produces a plausible completion for the task, so whole
/// sessions run without a model. The output depends only on the backend
/// seed, the request seed and the prompt.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    seed: u64,
    noise: MockNoise,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            noise: MockNoise::default(),
        }
    }

    pub fn with_noise(mut self, noise: MockNoise) -> Self {
        self.noise = noise;
        self
    }

    fn rng(&self, prompt: &str, params: &GenParams) -> StdRng {
        StdRng::seed_from_u64(stable_hash(&[
            &self.seed.to_le_bytes(),
            &params.seed.to_le_bytes(),
            params.task.as_bytes(),
            prompt.as_bytes(),
        ]))
    }
}

impl GenBackend for MockBackend {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        let mut rng = self.rng(prompt, params);
        if rng.gen_bool(self.noise.error_rate.clamp(0.0, 1.0)) {
            return Err(BackendError::Transport("injected failure".into()));
        }
        if rng.gen_bool(self.noise.empty_rate.clamp(0.0, 1.0)) {
            return Ok(String::new());
        }
        let block = query_block(prompt);
        let mut out = match TemplateName::parse(&params.task) {
            Some(task) => respond(task, block, params, &mut rng),
            None => first_sentence(block).to_string(),
        };
        if rng.gen_bool(self.noise.fabricate_rate.clamp(0.0, 1.0)) {
            out.push_str(&format!(" It costs {} yen.", rng.gen_range(10_000..99_999)));
        }
        if rng.gen_bool(self.noise.question_rate.clamp(0.0, 1.0)) {
            out.push_str(" Have you heard about that?");
        }
        Ok(out)
    }
}

/// Value after the last line starting with `tag`.
fn tagged<'a>(block: &'a str, tag: &str) -> &'a str {
    block
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix(tag))
        .map(str::trim)
        .unwrap_or("")
}

/// Lines after the `header` line up to the next blank or tagged line.
fn section<'a>(block: &'a str, header: &str) -> Vec<&'a str> {
    let mut lines = block.lines().skip_while(|l| l.trim() != header);
    if lines.next().is_none() {
        return Vec::new();
    }
    lines
        .take_while(|l| !l.trim().is_empty() && !l.ends_with(':') && !l.starts_with('['))
        .collect()
}

fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn lower_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn strip_end(text: &str) -> &str {
    text.trim().trim_end_matches(['.', '!', '?', '。', '！', '？'])
}

fn pick<'a>(rng: &mut StdRng, options: &[&'a str]) -> &'a str {
    options[rng.gen_range(0..options.len())]
}

fn respond(task: TemplateName, block: &str, params: &GenParams, rng: &mut StdRng) -> String {
    match task {
        TemplateName::IcebreakQuestion => icebreak_question(tagged(block, "Customer:"), rng),
        TemplateName::IcebreakComment => icebreak_comment(tagged(block, "Customer:"), rng),
        TemplateName::Summarize => {
            let body: Vec<&str> = section(block, "[Description]");
            let text = body.get(1..).map(|r| r.join(" ")).unwrap_or_default();
            truncate_chars(first_sentence(&text), params.max_length)
        }
        TemplateName::GenerateQuestions => generate_questions(block),
        TemplateName::PointTranslation => {
            point_translation(tagged(block, "Sight:"), tagged(block, "Question:"))
        }
        TemplateName::Comment => comment(tagged(block, "User:"), rng),
        TemplateName::ExtractInfo => extract_info(block),
        TemplateName::RecommendAppeal => appeal(tagged(block, "Summary:")),
        TemplateName::RecommendUtterance => recommend(block),
        TemplateName::CounterUtterance => format!(
            "{} is also a good place, but {}, so {} is probably a better choice.",
            tagged(block, "Other sight:"),
            tagged(block, "Weak points:"),
            tagged(block, "Recommended:")
        ),
        TemplateName::QaAnswer => qa_answer(block),
        TemplateName::ClosingNarration => closing(block),
        TemplateName::KanaNormalize => {
            kana(tagged(block, "Sentence:"), tagged(block, "Readings:"))
        }
    }
}

fn occupation(answer: &str) -> Option<String> {
    let lower = answer.to_lowercase();
    let stems = ["i work as ", "i work at ", "i work in ", "i work for ", "i'm ", "i am "];
    stems.iter().find_map(|stem| {
        lower.find(stem).map(|pos| {
            let start = pos + stem.len();
            strip_end(&answer[start..]).to_string()
        })
    })
}

fn icebreak_question(answer: &str, rng: &mut StdRng) -> String {
    match occupation(answer).filter(|r| !r.is_empty()) {
        Some(role) => {
            let frame = pick(
                rng,
                &[
                    "How nice! What matters most to you when working as {}?",
                    "How interesting! What do you enjoy most about working as {}?",
                ],
            );
            frame.replace("{}", &role)
        }
        None => "That sounds interesting! What do you enjoy most about your work?".to_string(),
    }
}

fn icebreak_comment(answer: &str, rng: &mut StdRng) -> String {
    let core = strip_end(answer);
    let core = core
        .strip_prefix("I think ")
        .or_else(|| core.strip_prefix("I think that "))
        .unwrap_or(core);
    if core.is_empty() {
        return "Thank you for telling me. It sounds like very meaningful work.".into();
    }
    let tail = pick(
        rng,
        &[
            "That is a wonderful way to think about it.",
            "You must be very good at what you do.",
            "I can tell you care a lot about your work.",
        ],
    );
    format!("{}, I see. {tail}", capitalize(core))
}

const QUESTION_TABLE: &[(&[&str], &str)] = &[
    (&["edo", "shogunate"], "Do you like Edo-era history?"),
    (&["samurai", "shogun"], "Do you like stories about samurai?"),
    (&["illusion", "trick"], "Do you like to have magical experiences?"),
    (&["photo", "picture"], "Do you like taking funny photos?"),
    (&["water", "sea", "beach", "bay"], "Do you like spending time by the water?"),
    (&["science", "technology", "robot"], "Do you like science and technology?"),
    (&["wax", "celebrit", "star"], "Do you like meeting celebrities?"),
    (&["lego", "block"], "Do you like building things with blocks?"),
    (&["game", "arcade", "ride", "amusement"], "Do you like thrilling rides and games?"),
    (&["view", "observation", "night"], "Do you like beautiful views?"),
    (&["history", "historic", "ruin"], "Do you like walking around historic sites?"),
    (&["nature", "park", "garden", "green"], "Do you like walking in nature?"),
    (&["shop", "mall"], "Do you like shopping?"),
    (&["child", "kid", "family"], "Do you like places where children can play?"),
    (&["tower", "tall", "height"], "Do you like high places?"),
    (&["learn", "museum", "exhibit"], "Do you like learning something new?"),
];

fn generate_questions(block: &str) -> String {
    let body = section(block, "[Summary]");
    let name = body.first().copied().unwrap_or("this place");
    let lower = body.join(" ").to_lowercase();
    let mut lines: Vec<String> = QUESTION_TABLE
        .iter()
        .filter(|(keys, _)| keys.iter().any(|k| lower.contains(k)))
        .map(|(_, q)| q.to_string())
        .collect();
    // Realistic model noise: a repeated question and a malformed line.
    if let Some(first) = lines.first().cloned() {
        lines.insert(1, first.to_uppercase());
    }
    lines.push(format!("Visit {name} today!"));
    lines.push("Do you like sightseeing in Tokyo?".into());
    let mut out = String::new();
    for (i, line) in lines.iter().take(10).enumerate() {
        if i == 0 {
            out.push(' ');
        } else {
            out.push_str("\n- ");
        }
        out.push_str(line);
    }
    out
}

fn point_translation(sight: &str, question: &str) -> String {
    let question = strip_list_marker(question);
    let likes = question
        .strip_prefix("Do you like ")
        .map(|rest| strip_end(rest).to_string());
    match likes {
        Some(x) => format!("{sight} is recommended to people who like {x}."),
        None => format!("{sight} is recommended for you."),
    }
}

fn comment(answer: &str, rng: &mut StdRng) -> String {
    let mut core = strip_end(answer);
    for prefix in ["They are ", "They're ", "We are ", "We're ", "It's ", "Yes, ", "No, "] {
        if let Some(rest) = core.strip_prefix(prefix) {
            core = rest;
            break;
        }
    }
    if core.is_empty() {
        return "I see, thank you.".into();
    }
    let tail = pick(
        rng,
        &[
            "I will keep that in mind.",
            "Thank you for telling me.",
            "That helps me a lot.",
        ],
    );
    format!("{}, Okay. {tail}", capitalize(core))
}

/// `Label: text` lines of an information block.
fn info_lines(lines: &[&str]) -> Vec<(HitField, String)> {
    lines
        .iter()
        .filter_map(|line| {
            HitField::ALL.iter().find_map(|f| {
                line.strip_prefix(f.label())
                    .and_then(|r| r.strip_prefix(':'))
                    .map(|text| (*f, text.trim().to_string()))
            })
        })
        .collect()
}

fn best_line(lines: &[(HitField, String)], question: &str) -> Option<(HitField, String)> {
    let q = query_tokens(question, true);
    let mut best: Option<(f64, &(HitField, String))> = None;
    for entry in lines {
        let s = score(&q, entry.0, &field_tokens(entry.0, &entry.1, true));
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, entry));
        }
    }
    best.map(|(_, e)| e.clone())
}

fn extract_info(block: &str) -> String {
    let info: Vec<&str> = block.lines().take_while(|l| !l.trim().is_empty()).collect();
    let question = tagged(block, "Question:");
    match best_line(&info_lines(&info), question) {
        Some((field, text)) => format!("{}: {text}", field.label()),
        None => String::new(),
    }
}

fn appeal(summary: &str) -> String {
    let sentence = strip_end(first_sentence(summary));
    match sentence.split_once(" is ") {
        Some((_, rest)) => format!(" it is {rest}."),
        None => format!(" of {}.", lower_first(sentence)),
    }
}

fn recommend(block: &str) -> String {
    let points: Vec<String> = section(block, "Recommendation points:")
        .iter()
        .map(|l| strip_list_marker(l).to_string())
        .collect();
    let hits = info_lines(
        &section(block, "Search information:")
            .iter()
            .map(|l| strip_list_marker(l))
            .collect::<Vec<_>>(),
    );
    let mut out = points.join(" ");
    if let Some((field, text)) = hits.first() {
        if !out.is_empty() {
            out.push(' ');
        }
        match field {
            HitField::Review => out.push_str(&format!("As one visitor said, {}", lower_first(strip_end(text)))),
            _ => out.push_str(&format!("{}: {}", field.label(), strip_end(text))),
        }
        out.push('.');
    }
    out
}

struct QaSight<'a> {
    name: &'a str,
    lines: Vec<(HitField, String)>,
}

fn qa_answer(block: &str) -> String {
    let mut sights = Vec::new();
    let mut current: Option<QaSight> = None;
    let mut recommended = "";
    for line in block.lines() {
        if let Some(name) = line
            .strip_prefix("[Search information for ")
            .and_then(|r| r.strip_suffix(']'))
        {
            sights.extend(current.take());
            current = Some(QaSight { name, lines: Vec::new() });
        } else if let Some(r) = line.strip_prefix("[Recommended]") {
            recommended = r.trim();
        } else if let Some(sight) = current.as_mut() {
            sight.lines.extend(info_lines(&[line]));
        }
    }
    sights.extend(current.take());
    let question = tagged(block, "Customer:");
    let q = content_tokens(question);
    let target = sights
        .iter()
        .max_by_key(|s| {
            let overlap = content_tokens(s.name).intersection(&q).count();
            (overlap, s.name == recommended)
        });
    match target.and_then(|s| best_line(&s.lines, question).map(|l| (s.name, l))) {
        Some((name, (_, text))) => {
            format!("For {name}, the information says: {}.", strip_end(&text))
        }
        None => "I could not find that in my materials.".into(),
    }
}

fn closing(block: &str) -> String {
    let name = tagged(block, "Sight:");
    let reviews: Vec<&str> = section(block, "Reviews:")
        .iter()
        .map(|l| strip_list_marker(l))
        .collect();
    match reviews.first() {
        Some(review) => format!(
            "When we visited {name} ourselves, it was just as one visitor put it: {}.",
            lower_first(strip_end(review))
        ),
        None => format!("We had a lovely time at {name}."),
    }
}

fn kana(sentence: &str, readings: &str) -> String {
    let readings: Vec<&str> = readings.split('/').map(str::trim).collect();
    let Some(open) = sentence.find('[') else {
        return readings.first().copied().unwrap_or("").to_string();
    };
    let before = sentence[..open].chars().last();
    let after = sentence[open..]
        .split_once(']')
        .and_then(|(_, rest)| rest.chars().next());
    let comparative = before == Some('の')
        && after.is_some_and(|c| "がはにへでを".contains(c));
    let index = usize::from(comparative && readings.len() > 1);
    readings.get(index).copied().unwrap_or("").to_string()
}

/// One scripted reply.
#[derive(Debug, Clone, PartialEq)]
pub enum Scripted {
    Text(String),
    Error(BackendError),
}

/// Backend that replays canned replies in order and records the prompts
/// it was sent. Once the script runs out it returns `fallback`.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    script: Mutex<VecDeque<Scripted>>,
    requests: Mutex<Vec<(String, GenParams)>>,
    fallback: String,
}

impl ScriptedBackend {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_script(replies.into_iter().map(|s| Scripted::Text(s.into())))
    }

    pub fn from_script(script: impl IntoIterator<Item = Scripted>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            requests: Mutex::new(Vec::new()),
            fallback: String::new(),
        }
    }

    pub fn with_fallback(mut self, text: impl Into<String>) -> Self {
        self.fallback = text.into();
        self
    }

    pub fn requests(&self) -> Vec<(String, GenParams)> {
        self.requests.lock().expect("requests lock").clone()
    }
}

impl GenBackend for ScriptedBackend {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        self.requests
            .lock()
            .expect("requests lock")
            .push((prompt.to_string(), params.clone()));
        match self.script.lock().expect("script lock").pop_front() {
            Some(Scripted::Text(t)) => Ok(t),
            Some(Scripted::Error(e)) => Err(e),
            None => Ok(self.fallback.clone()),
        }
    }
}

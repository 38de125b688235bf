//! Regenerates the synthetic fixture under `data/fixture` and the word lists
//! under `data/lexicon`.
//!
//! Labels follow a planted rule: a latent monthly "pressure" drives CPI,
//! unemployment and payrolls, and each meeting's decision is a noisy linear
//! function of the last observed pressure plus a per-meeting tone that only
//! the documents and FinBERT probabilities reveal.
//!
//!     cargo run -p fedsignal --example make_fixture [-- <data dir>]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, Months, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;
const N_MEETINGS: usize = 40;
const N_DOCS: usize = 60;
const MACRO_START: (i32, u32) = (2012, 1);
const FIRST_MEETING: (i32, u32, u32) = (2015, 1, 28);
const MEETING_GAP_DAYS: u64 = 45;
const RAISE_AT: f64 = 0.55;
const TONE_WEIGHT: f64 = 1.0;
const LABEL_NOISE: f64 = 0.2;

const HAWKISH: &[&str] = &["strong", "robust", "gains", "improved", "solid", "strengthened", "expansion", "favorable"];
const DOVISH: &[&str] = &["weak", "decline", "difficult", "losses", "slowdown", "adverse", "deteriorated", "weakness"];
const HEDGES: &[&str] = &["uncertain", "may", "could", "risk", "possibly", "uncertainty"];
const NEUTRAL: &[&str] = &[
    "committee", "federal", "funds", "rate", "policy", "labor", "market", "conditions", "basis", "points", "inflation",
    "outlook", "participants", "economic", "activity", "household", "spending", "business", "investment", "prices",
    "energy", "housing", "sector", "employment", "target", "range", "balance", "sheet", "securities", "data",
];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words[rng.gen_range(0..words.len())]
}

fn month_index(d: NaiveDate) -> usize {
    ((d.year() - MACRO_START.0) * 12 + d.month() as i32 - MACRO_START.1 as i32) as usize
}

fn sentence(rng: &mut ChaCha8Rng, tone: f64) -> String {
    let mut words: Vec<String> = Vec::new();
    words.push(pick(rng, &["the", "this", "recent", "overall"]).into());
    for _ in 0..rng.gen_range(3..6) {
        words.push(pick(rng, NEUTRAL).into());
    }
    let polar = if tone > 0.0 { HAWKISH } else { DOVISH };
    let opposite = if tone > 0.0 { DOVISH } else { HAWKISH };
    let strength = tone.abs();
    if strength > 0.25 || rng.gen_bool(0.3) {
        words.push(pick(rng, &["was", "remained", "looked", "is"]).into());
        words.push(pick(rng, polar).into());
    }
    if strength > 0.9 {
        words.push("and".into());
        words.push(pick(rng, polar).into());
    }
    if rng.gen_bool(0.25) {
        // a negated opposite-polarity word reads the same way as `polar`
        words.push(pick(rng, &["not", "no", "without"]).into());
        words.push(pick(rng, opposite).into());
    }
    if rng.gen_bool(0.4) {
        words.push(pick(rng, &["though", "while", "as"]).into());
        words.push(pick(rng, HEDGES).into());
        words.push(pick(rng, NEUTRAL).into());
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

fn softmax3(a: f64, b: f64, c: f64) -> [f64; 3] {
    let m = a.max(b).max(c);
    let e = [(a - m).exp(), (b - m).exp(), (c - m).exp()];
    let s: f64 = e.iter().sum();
    [e[0] / s, e[1] / s, e[2] / s]
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn main() {
    let root: PathBuf = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
    });
    let fixture = root.join("fixture");
    fs::create_dir_all(fixture.join("macro")).unwrap();
    fs::create_dir_all(fixture.join("docs")).unwrap();
    fs::create_dir_all(root.join("lexicon")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let first_meeting = NaiveDate::from_ymd_opt(FIRST_MEETING.0, FIRST_MEETING.1, FIRST_MEETING.2).unwrap();
    let meetings: Vec<NaiveDate> =
        (0..N_MEETINGS as u64).map(|i| first_meeting + Days::new(i * MEETING_GAP_DAYS)).collect();
    let macro_start = NaiveDate::from_ymd_opt(MACRO_START.0, MACRO_START.1, 1).unwrap();
    let n_months = month_index(*meetings.last().unwrap()) + 2;

    // latent pressure and the three observed series
    let mut pressure = vec![0.0; n_months];
    for m in 1..n_months {
        pressure[m] = 0.8 * pressure[m - 1] + 0.6 * normal(&mut rng);
    }
    let (mut cpi, mut unrate, mut nfp) = (vec![230.0], vec![6.0], vec![135_000.0]);
    for m in 1..n_months {
        let p = pressure[m];
        cpi.push(cpi[m - 1] * (1.0 + (2.0 + 1.5 * p) / 1200.0 + 0.0002 * normal(&mut rng)));
        unrate.push((unrate[m - 1] - 0.08 * p + 0.03 * normal(&mut rng)).clamp(3.0, 10.0));
        nfp.push(nfp[m - 1] + 150.0 + 120.0 * p + 30.0 * normal(&mut rng));
    }
    for (id, values, decimals) in [("CPI", &cpi, 3), ("UNRATE", &unrate, 1), ("NFP", &nfp, 0)] {
        let mut text = String::from("date,value\n");
        for (m, v) in values.iter().enumerate() {
            let d = macro_start + Months::new(m as u32);
            writeln!(text, "{},{:.*}", d.format("%Y-%m-%d"), decimals, v).unwrap();
        }
        fs::write(fixture.join("macro").join(format!("{id}.csv")), text).unwrap();
    }

    // decisions from the planted rule
    let tones: Vec<f64> = (0..N_MEETINGS).map(|_| normal(&mut rng)).collect();
    let mut rate: f64 = 5.0;
    let mut decisions = String::from("meeting_date,target_rate\n");
    let mut counts = [0usize; 3];
    for (i, m) in meetings.iter().enumerate() {
        let last_seen = pressure[month_index(*m) - 1];
        let z = last_seen + TONE_WEIGHT * tones[i] + LABEL_NOISE * normal(&mut rng);
        // the first meeting only anchors the rate chain
        if i > 0 {
            if z > RAISE_AT {
                rate += 0.25;
                counts[0] += 1;
            } else if z < -RAISE_AT {
                rate -= 0.25;
                counts[2] += 1;
            } else {
                counts[1] += 1;
            }
        }
        writeln!(decisions, "{},{:.2}", m.format("%Y-%m-%d"), rate).unwrap();
    }
    fs::write(fixture.join("decisions.csv"), decisions).unwrap();

    // documents spread over the meeting windows
    let types = ["statement", "minutes", "speech", "testimony", "presconf"];
    let mut manifest = Vec::new();
    let mut finbert = String::from("doc_id,p_positive,p_negative,p_neutral\n");
    for k in 0..N_DOCS {
        // every meeting gets one document, the rest land at random
        let i = if k < N_MEETINGS { k } else { rng.gen_range(0..N_MEETINGS) };
        let window_start = if i == 0 { meetings[0] - Days::new(40) } else { meetings[i - 1] + Days::new(1) };
        let span = (meetings[i] - window_start).num_days() as u64;
        let date = window_start + Days::new(rng.gen_range(0..=span));
        let tone = 0.5 * pressure[month_index(meetings[i]) - 1] + tones[i] + 0.2 * normal(&mut rng);
        let mut body = String::new();
        for _ in 0..rng.gen_range(3..7) {
            body.push_str(&sentence(&mut rng, tone));
            body.push(' ');
        }
        body.push_str(&format!("Rates moved {} basis points in {}.\n", rng.gen_range(0..50), date.year()));
        let doc_id = format!("doc{k:03}");
        let rel = format!("docs/{doc_id}.txt");
        fs::write(fixture.join(&rel), body).unwrap();
        manifest.push(serde_json::json!({
            "doc_id": doc_id,
            "date": date.format("%Y-%m-%d").to_string(),
            "doc_type": types[rng.gen_range(0..types.len())],
            "path": rel,
        }));
        let p = softmax3(1.2 * tone + 0.2 * normal(&mut rng), -1.2 * tone + 0.2 * normal(&mut rng), 0.4);
        let (pos, neg) = (round6(p[0]), round6(p[1]));
        writeln!(finbert, "{doc_id},{pos},{neg},{}", round6(1.0 - pos - neg)).unwrap();
    }
    fs::write(fixture.join("documents.json"), serde_json::to_string_pretty(&manifest).unwrap() + "\n").unwrap();
    fs::write(fixture.join("finbert.csv"), finbert).unwrap();

    write_lexicon(&root.join("lexicon"));
    eprintln!("labels raise/hold/lower (excluding anchor): {counts:?}");
}

fn write_lexicon(dir: &Path) {
    let entries: &[(&str, &[&str])] = &[
        ("positive", &[
            "strong", "robust", "gains", "improved", "solid", "strengthened", "expansion", "favorable", "achieve",
            "benefit", "confident", "effective", "efficient", "enhance", "good", "great", "improvement", "improving",
            "opportunity", "positive", "progress", "rebound", "stability", "stable", "stronger", "succeed", "success",
        ]),
        ("negative", &[
            "weak", "decline", "difficult", "losses", "slowdown", "adverse", "deteriorated", "weakness", "crisis",
            "declined", "declining", "deterioration", "downturn", "hardship", "impairment", "loss", "negative",
            "recession", "severe", "shock", "stress", "strained", "turmoil", "unemployed", "volatile", "weaker", "worse",
        ]),
        ("uncertainty", &[
            "uncertain", "uncertainty", "risk", "possibly", "approximately", "assume", "believe", "contingent",
            "depend", "fluctuate", "indefinite", "likelihood", "perhaps", "predict", "probable", "risks", "tentative",
            "unclear", "unknown", "unpredictable", "variable", "volatility",
        ]),
        ("litigious", &[
            "amend", "amended", "court", "contract", "legal", "legislation", "regulation", "regulatory", "statute",
            "testimony", "claim", "claims", "jurisdiction", "law", "lawful", "settlement",
        ]),
        ("strong_modal", &["always", "best", "clearly", "definitely", "highest", "must", "never", "strongly", "will"]),
        ("weak_modal", &["may", "could", "might", "possibly", "appears", "depending", "perhaps", "seldom", "sometimes"]),
    ];
    let mut lex = String::from("word,category\n");
    let mut all = std::collections::BTreeSet::new();
    for (cat, words) in entries {
        for w in *words {
            writeln!(lex, "{w},{cat}").unwrap();
            all.insert(*w);
        }
    }
    fs::write(dir.join("lm_lexicon.csv"), lex).unwrap();

    let negators = ["no", "not", "never", "none", "neither", "nor", "without"];
    fs::write(dir.join("negators.txt"), negators.join("\n") + "\n").unwrap();

    let english = [
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at", "be",
        "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "did", "do", "does",
        "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has", "have", "having", "he",
        "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
        "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
        "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so",
        "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
        "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what",
        "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
        "yourself", "yourselves", "though", "recent", "overall", "remained", "looked", "moved",
    ];
    let stop: Vec<&str> =
        english.iter().copied().filter(|w| !all.contains(w) && !negators.contains(w)).collect();
    fs::write(dir.join("stopwords.txt"), stop.join("\n") + "\n").unwrap();
}

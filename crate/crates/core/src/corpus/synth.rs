//! Seeded synthetic dish-name corpora.
//!
//! Names follow `<modifier> <cue> <dish-form>`, where the cue comes from the
//! keyword rules and modifiers and dish forms are class-neutral filler. A
//! configurable share of non-veg names also carry a veg cue, so the
//! non-veg-wins precedence is exercised.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, DishRecord, KeywordRules, Label};
use crate::error::{Error, Result};
use crate::seed;
use crate::vectorizer::tokenize;

const MODIFIERS: &[&str] = &[
    "spicy",
    "classic",
    "homestyle",
    "crispy",
    "tangy",
    "creamy",
    "smoky",
    "roasted",
    "steamed",
    "fried",
    "baked",
    "stuffed",
    "masala",
    "tandoori",
    "kadai",
    "hyderabadi",
    "chettinad",
    "goan",
    "kerala",
    "punjabi",
    "bengali",
    "mughlai",
    "street",
    "royal",
    "village",
    "garlic",
    "ginger",
    "lemon",
    "pepper",
    "chilli",
    "coconut",
    "mint",
    "herb",
    "honey",
    "sweet",
    "sour",
    "dry",
    "grilled",
    "achari",
    "malai",
    "makhani",
    "lahori",
    "amritsari",
    "rustic",
    "zesty",
];

const DISH_FORMS: &[&str] = &[
    "curry",
    "tikka",
    "biryani",
    "pulao",
    "korma",
    "stew",
    "soup",
    "fry",
    "roast",
    "kebab",
    "wrap",
    "roll",
    "sandwich",
    "bowl",
    "platter",
    "pakora",
    "cutlet",
    "bhaji",
    "vindaloo",
    "jalfrezi",
    "handi",
    "thali",
    "noodles",
    "rice",
    "pasta",
    "pie",
    "burger",
    "tacos",
    "skewers",
    "chowder",
    "bake",
    "casserole",
    "dumplings",
    "momos",
    "paratha",
    "kathi",
    "frankie",
    "sizzler",
    "risotto",
    "gravy",
    "pickle",
    "chaat",
];

const PANTRY: &[&str] = &[
    "salt", "oil", "cumin", "turmeric", "onion", "tomato", "ghee", "chilli",
];

const SYLLABLES: &[&str] = &[
    "ka", "ra", "mo", "ti", "lu", "po", "shi", "na", "ve", "do", "gu", "ba", "ze", "chu", "ri",
    "ma", "ko", "pa", "lo", "thu", "ja", "ne", "su", "vi",
];

/// Generator configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabProfile {
    /// Share of Veg records (the minority class by default).
    pub veg_fraction: f64,
    /// Share of non-veg names that also contain a veg cue.
    pub mixed_fraction: f64,
    pub modifiers: Vec<String>,
    pub dish_forms: Vec<String>,
    /// Number of pseudo-words available as an extra leading modifier; large
    /// values push the distinct-term count past the vectorizer cap.
    pub extra_filler_words: usize,
    /// Probability that a name carries one extra pseudo-word.
    pub extra_word_rate: f64,
}

impl Default for VocabProfile {
    fn default() -> Self {
        Self {
            veg_fraction: 0.45,
            mixed_fraction: 0.1,
            modifiers: MODIFIERS.iter().map(|s| s.to_string()).collect(),
            dish_forms: DISH_FORMS.iter().map(|s| s.to_string()).collect(),
            extra_filler_words: 0,
            extra_word_rate: 0.5,
        }
    }
}

impl VocabProfile {
    fn validate(&self, rules: &KeywordRules) -> Result<()> {
        for (what, v) in [
            ("veg_fraction", self.veg_fraction),
            ("mixed_fraction", self.mixed_fraction),
            ("extra_word_rate", self.extra_word_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{what} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.modifiers.is_empty() || self.dish_forms.is_empty() {
            return Err(Error::InvalidInput(
                "modifier and dish-form lists must be non-empty".into(),
            ));
        }
        for w in self.modifiers.iter().chain(&self.dish_forms) {
            for t in tokenize(w) {
                if rules.contains(&t) {
                    return Err(Error::InvalidInput(format!(
                        "filler word {w:?} contains rule term {t:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn generate_synthetic(
    n: usize,
    seed: u64,
    rules: &KeywordRules,
    profile: &VocabProfile,
) -> Result<Corpus> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "synthetic corpus needs n >= 2, got {n}"
        )));
    }
    profile.validate(rules)?;
    let mut rng = seed::rng(seed, seed::stream::SYNTH);

    let veg_terms: Vec<&String> = rules.veg_terms().iter().collect();
    let nonveg_terms: Vec<&String> = rules.nonveg_terms().iter().collect();
    let extras = pseudo_words(profile.extra_filler_words, rules, &mut rng);

    let n_veg = ((n as f64 * profile.veg_fraction).round() as usize).clamp(1, n - 1);
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Veg, n_veg)
        .chain(std::iter::repeat_n(Label::NonVeg, n - n_veg))
        .collect();
    labels.shuffle(&mut rng);

    let records = labels
        .into_iter()
        .map(|label| {
            let mut words: Vec<&str> = Vec::with_capacity(5);
            if !extras.is_empty() && rng.gen_bool(profile.extra_word_rate) {
                words.push(&extras[rng.gen_range(0..extras.len())]);
            }
            words.push(pick(&profile.modifiers, &mut rng));
            let mut cues: Vec<&str> = Vec::with_capacity(2);
            match label {
                Label::Veg => cues.push(pick(&veg_terms, &mut rng)),
                Label::NonVeg => {
                    cues.push(pick(&nonveg_terms, &mut rng));
                    if rng.gen_bool(profile.mixed_fraction) {
                        cues.push(pick(&veg_terms, &mut rng));
                        if rng.gen_bool(0.5) {
                            cues.swap(0, 1);
                        }
                    }
                }
            }
            words.extend(&cues);
            words.push(pick(&profile.dish_forms, &mut rng));
            let name = words
                .iter()
                .map(|w| title_case(w))
                .collect::<Vec<_>>()
                .join(" ");
            let mut ingredients: Vec<String> = cues.iter().map(|c| c.to_string()).collect();
            ingredients.push(PANTRY[rng.gen_range(0..PANTRY.len())].to_string());
            DishRecord {
                item_name: name,
                label: Some(label),
                ingredients,
            }
        })
        .collect();
    Ok(Corpus::new(
        records,
        format!("synthetic(n={n},seed={seed})"),
    ))
}

fn pick<'a, S: AsRef<str>>(pool: &'a [S], rng: &mut ChaCha8Rng) -> &'a str {
    pool[rng.gen_range(0..pool.len())].as_ref()
}

fn pseudo_words(count: usize, rules: &KeywordRules, rng: &mut ChaCha8Rng) -> Vec<String> {
    let reserved: BTreeSet<&str> = MODIFIERS.iter().chain(DISH_FORMS).copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let parts = rng.gen_range(2..=4);
        let word: String = (0..parts)
            .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
            .collect();
        let usable = tokenize(&word) == [word.clone()]
            && !rules.contains(&word)
            && !reserved.contains(word.as_str());
        if usable && seen.insert(word.clone()) {
            out.push(word);
        }
        // 24 syllables over 2..=4 parts give ~346k candidates; cap the search.
        if seen.len() >= 300_000 {
            break;
        }
    }
    out
}

fn title_case(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

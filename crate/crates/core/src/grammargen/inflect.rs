//! Rule-based English verb inflection with an irregular-verb table.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerbForm {
    Base,
    ThirdSingular,
    Past,
    PastParticiple,
    Gerund,
}

impl VerbForm {
    /// Form implied by a Penn verb tag; `None` for non-verb tags.
    pub fn from_penn(tag: &str) -> Option<VerbForm> {
        match tag {
            "VB" | "VBP" => Some(VerbForm::Base),
            "VBZ" => Some(VerbForm::ThirdSingular),
            "VBD" => Some(VerbForm::Past),
            "VBN" => Some(VerbForm::PastParticiple),
            "VBG" => Some(VerbForm::Gerund),
            _ => None,
        }
    }
}

impl FromStr for VerbForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(VerbForm::Base),
            "third-singular" => Ok(VerbForm::ThirdSingular),
            "past" => Ok(VerbForm::Past),
            "past-participle" => Ok(VerbForm::PastParticiple),
            "gerund" => Ok(VerbForm::Gerund),
            other => Err(format!("unknown verb form {other:?}")),
        }
    }
}

impl fmt::Display for VerbForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerbForm::Base => "base",
            VerbForm::ThirdSingular => "third-singular",
            VerbForm::Past => "past",
            VerbForm::PastParticiple => "past-participle",
            VerbForm::Gerund => "gerund",
        })
    }
}

// base, past, past participle
const IRREGULAR: &str = "\
arise arose arisen
awake awoke awoken
be was been
bear bore borne
beat beat beaten
become became become
befall befell befallen
begin began begun
bend bent bent
bet bet bet
bind bound bound
bite bit bitten
bleed bled bled
blow blew blown
break broke broken
breed bred bred
bring brought brought
broadcast broadcast broadcast
build built built
burn burnt burnt
burst burst burst
buy bought bought
cast cast cast
catch caught caught
choose chose chosen
cling clung clung
come came come
cost cost cost
creep crept crept
cut cut cut
deal dealt dealt
dig dug dug
dive dove dived
do did done
draw drew drawn
dream dreamt dreamt
drink drank drunk
drive drove driven
eat ate eaten
fall fell fallen
feed fed fed
feel felt felt
fight fought fought
find found found
flee fled fled
fling flung flung
fly flew flown
forbid forbade forbidden
forecast forecast forecast
foresee foresaw foreseen
forget forgot forgotten
forgive forgave forgiven
forgo forwent forgone
freeze froze frozen
get got gotten
give gave given
go went gone
grind ground ground
grow grew grown
hang hung hung
have had had
hear heard heard
hide hid hidden
hit hit hit
hold held held
hurt hurt hurt
keep kept kept
kneel knelt knelt
know knew known
lay laid laid
lead led led
lean leant leant
leap leapt leapt
learn learnt learnt
leave left left
lend lent lent
let let let
lie lay lain
light lit lit
lose lost lost
make made made
mean meant meant
meet met met
mislead misled misled
mistake mistook mistaken
misunderstand misunderstood misunderstood
outdo outdid outdone
overcome overcame overcome
overtake overtook overtaken
partake partook partaken
pay paid paid
prove proved proven
put put put
quit quit quit
read read read
rewrite rewrote rewritten
rid rid rid
ride rode ridden
ring rang rung
rise rose risen
run ran run
saw sawed sawn
say said said
see saw seen
seek sought sought
sell sold sold
send sent sent
set set set
sew sewed sewn
shake shook shaken
shed shed shed
shine shone shone
shoot shot shot
show showed shown
shrink shrank shrunk
shut shut shut
sing sang sung
sink sank sunk
sit sat sat
slay slew slain
sleep slept slept
slide slid slid
sling slung slung
slit slit slit
smell smelt smelt
sow sowed sown
speak spoke spoken
speed sped sped
spell spelt spelt
spend spent spent
spill spilt spilt
spin spun spun
spit spat spat
split split split
spoil spoilt spoilt
spread spread spread
spring sprang sprung
stand stood stood
steal stole stolen
stick stuck stuck
sting stung stung
stink stank stunk
stride strode stridden
strike struck struck
string strung strung
strive strove striven
swear swore sworn
sweep swept swept
swell swelled swollen
swim swam swum
swing swung swung
take took taken
teach taught taught
tear tore torn
tell told told
think thought thought
throw threw thrown
thrust thrust thrust
tread trod trodden
undergo underwent undergone
understand understood understood
undertake undertook undertaken
undo undid undone
uphold upheld upheld
upset upset upset
wake woke woken
wear wore worn
weave wove woven
weep wept wept
win won won
wind wound wound
withdraw withdrew withdrawn
withhold withheld withheld
withstand withstood withstood
wring wrung wrung
write wrote written
";

struct Irregular {
    past: &'static str,
    participle: &'static str,
}

fn irregulars() -> &'static HashMap<&'static str, Irregular> {
    static TABLE: OnceLock<HashMap<&'static str, Irregular>> = OnceLock::new();
    TABLE.get_or_init(|| {
        IRREGULAR
            .lines()
            .filter_map(|line| {
                let mut it = line.split_whitespace();
                Some((
                    it.next()?,
                    Irregular {
                        past: it.next()?,
                        participle: it.next()?,
                    },
                ))
            })
            .collect()
    })
}

/// True when the lemma has an irregular-table entry.
pub fn is_irregular(lemma: &str) -> bool {
    irregulars().contains_key(lemma)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn syllables(word: &str) -> usize {
    let mut count = 0;
    let mut prev_vowel = false;
    for c in word.chars() {
        let v = is_vowel(c) || c == 'y';
        if v && !prev_vowel {
            count += 1;
        }
        prev_vowel = v;
    }
    // silent final e
    if word.ends_with('e') && !word.ends_with("le") && count > 1 {
        count -= 1;
    }
    count.max(1)
}

// Stressed final syllables that double in two-syllable verbs.
const DOUBLING: &[&str] = &[
    "admit", "commit", "compel", "control", "occur", "omit", "patrol", "permit", "prefer",
    "propel", "refer", "regret", "submit", "transfer", "upset", "equip", "begin", "forget",
];

fn doubles_final(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n < 3 {
        return false;
    }
    let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    let cvc = !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'y');
    // "qu" acts as a consonant: quit -> quitting
    let qu = n >= 4 && chars[n - 4] == 'q' && a == 'u' && is_vowel(b) && !is_vowel(c);
    (cvc || qu) && (syllables(word) == 1 || DOUBLING.contains(&word))
}

fn regular_ed(lemma: &str) -> String {
    if lemma.ends_with('e') {
        format!("{lemma}d")
    } else if let Some(stem) = consonant_y(lemma) {
        format!("{stem}ied")
    } else if doubles_final(lemma) {
        let last = lemma.chars().last().expect("non-empty");
        format!("{lemma}{last}ed")
    } else if lemma.ends_with('c') {
        format!("{lemma}ked")
    } else {
        format!("{lemma}ed")
    }
}

fn consonant_y(lemma: &str) -> Option<&str> {
    let stem = lemma.strip_suffix('y')?;
    match stem.chars().last() {
        Some(c) if !is_vowel(c) => Some(stem),
        _ => None,
    }
}

fn gerund(lemma: &str) -> String {
    if lemma == "be" {
        return "being".into();
    }
    if let Some(stem) = lemma.strip_suffix("ie") {
        return format!("{stem}ying");
    }
    if lemma.ends_with('e') && !lemma.ends_with("ee") && !lemma.ends_with("ye") && !lemma.ends_with("oe") && lemma.len() > 2 {
        return format!("{}ing", &lemma[..lemma.len() - 1]);
    }
    if doubles_final(lemma) {
        let last = lemma.chars().last().expect("non-empty");
        return format!("{lemma}{last}ing");
    }
    if lemma.ends_with('c') {
        return format!("{lemma}king");
    }
    format!("{lemma}ing")
}

fn third_singular(lemma: &str) -> String {
    match lemma {
        "be" => return "is".into(),
        "have" => return "has".into(),
        _ => {}
    }
    if let Some(stem) = consonant_y(lemma) {
        return format!("{stem}ies");
    }
    if ["s", "x", "z", "ch", "sh", "o"].iter().any(|s| lemma.ends_with(s)) {
        return format!("{lemma}es");
    }
    format!("{lemma}s")
}

/// Inflects a lowercase verb lemma. Unknown irregulars fall back to the rules.
pub fn inflect(lemma: &str, form: VerbForm) -> String {
    let lemma = lemma.trim().to_lowercase();
    match form {
        VerbForm::Base => lemma,
        VerbForm::ThirdSingular => third_singular(&lemma),
        VerbForm::Gerund => gerund(&lemma),
        VerbForm::Past => match irregulars().get(lemma.as_str()) {
            Some(irr) => irr.past.to_string(),
            None => regular_ed(&lemma),
        },
        VerbForm::PastParticiple => match irregulars().get(lemma.as_str()) {
            Some(irr) => irr.participle.to_string(),
            None => regular_ed(&lemma),
        },
    }
}

const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("child", "children"),
    ("foot", "feet"),
    ("goose", "geese"),
    ("man", "men"),
    ("mouse", "mice"),
    ("person", "people"),
    ("tooth", "teeth"),
    ("woman", "women"),
    ("sheep", "sheep"),
    ("fish", "fish"),
    ("deer", "deer"),
];

/// Plural of a singular noun.
pub fn pluralize(noun: &str) -> String {
    let noun = noun.trim().to_lowercase();
    if let Some((_, plural)) = IRREGULAR_PLURALS.iter().find(|(s, _)| *s == noun) {
        return plural.to_string();
    }
    if let Some(stem) = consonant_y(&noun) {
        return format!("{stem}ies");
    }
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| noun.ends_with(s)) {
        return format!("{noun}es");
    }
    format!("{noun}s")
}

//! Seeded synthetic archive with ground truth.
//!
//! Families are placed in a parish with a base year. Parents marry at the
//! base year and baptize their children over the following years. Children
//! optionally marry each other across families two decades later, with
//! their parents present. Adults pick up extra witness and godparent
//! appearances at nearby events of their parish, and some individuals get a
//! burial record after their last appearance.
//!
//! Every individual has a unique name unless a son is given his father's
//! first name (`duplicate_name_rate`), which is the main source of false
//! merges. Noise is added per mention (name typos) and per event (date
//! jitter, location aliases).

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Corpus, Event, EventId, EventType, PersonRecord, RecordId, Role};
use crate::normalize::{normalize_name, AliasTable, EventDate, NormalizedText, MAX_YEAR, MIN_YEAR};

use super::Truth;

/// Number of witness/godparent appearances per adult, drawn uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AppearanceRange {
    pub min: u32,
    pub max: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n_individuals: usize,
    pub families: usize,
    /// Extra appearances per adult on top of their family events.
    pub events_per_individual: AppearanceRange,
    /// Per name field per mention.
    pub typo_rate: f64,
    /// Per event.
    pub location_alias_rate: f64,
    /// Recorded year is shifted by up to this many years either way.
    pub date_jitter_years: u32,
    /// Per family: the eldest son takes his father's first name.
    pub duplicate_name_rate: f64,
    /// Per individual: a burial record follows the last appearance.
    pub death_rate: f64,
    /// Children marry within their parish, with their parents present.
    pub second_generation: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_individuals: 1000,
            families: 250,
            events_per_individual: AppearanceRange { min: 0, max: 2 },
            typo_rate: 0.0,
            location_alias_rate: 0.0,
            date_jitter_years: 0,
            duplicate_name_rate: 0.0,
            death_rate: 0.5,
            second_generation: true,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Params(m));
        if self.n_individuals == 0 {
            return err("n_individuals must be positive".into());
        }
        if self.families == 0 {
            return err("families must be positive".into());
        }
        if self.families * 2 > self.n_individuals {
            return err(format!(
                "{} families need at least {} individuals for the parents, got {}",
                self.families,
                self.families * 2,
                self.n_individuals
            ));
        }
        for (name, p) in [
            ("typo_rate", self.typo_rate),
            ("location_alias_rate", self.location_alias_rate),
            ("duplicate_name_rate", self.duplicate_name_rate),
            ("death_rate", self.death_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("{name} = {p} is not a probability"));
            }
        }
        if self.events_per_individual.min > self.events_per_individual.max {
            return err("events_per_individual: min exceeds max".into());
        }
        if self.date_jitter_years > 50 {
            return err("date_jitter_years above 50 leaves the archive's date range".into());
        }
        Ok(())
    }
}

/// Generated corpus as it would be written to disk (locations unresolved),
/// the alias table that resolves them, and ground truth.
#[derive(Clone, Debug)]
pub struct GeneratedCorpus {
    pub corpus: Corpus,
    pub aliases: AliasTable,
    pub truth: Truth,
}

impl GeneratedCorpus {
    /// The corpus with locations passed through the alias table, as
    /// `load_corpus` with the alias file would produce it.
    pub fn resolved_corpus(&self) -> Corpus {
        let events = self
            .corpus
            .events()
            .iter()
            .map(|e| {
                Event::new(e.event_id.clone(), e.event_type.clone(), e.date, self.aliases.resolve(e.location.clone()))
            })
            .collect();
        Corpus::new(events, self.corpus.persons().to_vec()).expect("generated corpus is valid")
    }

    /// Writes `events.csv`, `persons.csv`, `truth.csv` and `aliases.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let (events, persons) = crate::io::write_corpus(&self.corpus, dir)?;
        let truth = dir.join("truth.csv");
        self.truth.write_csv(&truth)?;
        let aliases = dir.join("aliases.csv");
        write_aliases(&self.aliases, &aliases)?;
        Ok(vec![events, persons, truth, aliases])
    }
}

fn write_aliases(table: &AliasTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).with_path(path))?;
    let mut write = || -> std::result::Result<(), csv::Error> {
        w.write_record(["alias", "canonical"])?;
        for (a, c) in table.entries() {
            w.write_record([a.as_str(), c.as_str()])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| Error::from(e).with_path(path))
}

const PARISHES: &[(&str, &[&str])] = &[
    ("Grand Rapids Church", &["Rapids Church", "Grand Rapids Mission"]),
    ("Saint Boniface Cathedral", &["St. Boniface", "St Boniface Cathedral"]),
    ("Saint François Xavier", &["St. Francois Xavier", "SFX Mission"]),
    ("Saint Charles", &["St. Charles"]),
    ("Saint Norbert", &["St. Norbert Parish"]),
    ("Baie Saint Paul", &["Baie St. Paul"]),
    ("Pembina Mission", &["Pembina"]),
    ("Saint Laurent", &["St. Laurent de Grandin"]),
    ("Lac Sainte Anne", &["Lac Ste. Anne"]),
    ("Saint Albert Mission", &["St. Albert"]),
    ("Île-à-la-Crosse", &["Isle a la Crosse"]),
    ("Fort Edmonton", &["Edmonton House"]),
];

const MALE_NAMES: &[&str] = &[
    "Adolphe",
    "Alexandre",
    "Alexis",
    "Ambroise",
    "Amable",
    "André",
    "Antoine",
    "Augustin",
    "Baptiste",
    "Basile",
    "Benjamin",
    "Charles",
    "Cuthbert",
    "Damase",
    "David",
    "Donald",
    "Édouard",
    "Élie",
    "Étienne",
    "Eusèbe",
    "Félix",
    "François",
    "Gabriel",
    "George",
    "Guillaume",
    "Henri",
    "Hugh",
    "Ignace",
    "Isidore",
    "Jacques",
    "James",
    "Jean",
    "Jérôme",
    "John",
    "Joseph",
    "Julien",
    "Laurent",
    "Louis",
    "Magloire",
    "Marcel",
    "Martin",
    "Maxime",
    "Michel",
    "Moïse",
    "Narcisse",
    "Norbert",
    "Olivier",
    "Pascal",
    "Patrice",
    "Paul",
    "Philippe",
    "Pierre",
    "Rémi",
    "Robert",
    "Roger",
    "Samuel",
    "Simon",
    "Thomas",
    "Toussaint",
    "Urbain",
    "Vital",
    "William",
    "Xavier",
    "Zacharie",
];

const FEMALE_NAMES: &[&str] = &[
    "Adèle",
    "Agathe",
    "Angélique",
    "Anne",
    "Béatrice",
    "Catherine",
    "Cécile",
    "Charlotte",
    "Christine",
    "Claire",
    "Delphine",
    "Élisabeth",
    "Élise",
    "Elizabeth",
    "Émilie",
    "Euphrosine",
    "Flora",
    "Françoise",
    "Geneviève",
    "Hélène",
    "Henriette",
    "Isabelle",
    "Isabella",
    "Jane",
    "Jeanne",
    "Josephte",
    "Julie",
    "Justine",
    "Louise",
    "Lucie",
    "Madeleine",
    "Marguerite",
    "Margaret",
    "Marie",
    "Mary",
    "Mathilde",
    "Monique",
    "Nancy",
    "Nathalie",
    "Pélagie",
    "Philomène",
    "Rosalie",
    "Rose",
    "Sarah",
    "Sophie",
    "Suzanne",
    "Thérèse",
    "Ursule",
    "Véronique",
    "Victoire",
    "Virginie",
    "Zoé",
];

const SURNAMES: &[&str] = &[
    "Desroches",
    "Langdon",
    "Setter",
    "Allery",
    "Riel",
    "Nolin",
    "Flett",
    "McKay",
    "Bruce",
    "Lagimodière",
    "Dumont",
    "Parisien",
    "Larocque",
    "Sinclair",
    "Isbister",
    "Spence",
    "Bremner",
    "Tait",
    "Inkster",
    "Hallett",
    "Lépine",
    "Delorme",
    "Goulet",
    "Beauchemin",
    "Ducharme",
    "Fagnant",
    "Laframboise",
    "Gladu",
    "Grant",
    "Breland",
    "Falcon",
    "Pelletier",
    "Ouellette",
    "Poitras",
    "Vandal",
    "Dease",
    "Houle",
    "Lavallée",
    "Lussier",
    "Parenteau",
    "Racette",
    "Sayer",
    "Thibault",
    "Vivier",
    "Wilkie",
    "Swain",
    "Calder",
    "Hourie",
    "Kipling",
    "Linklater",
    "Omand",
    "Slater",
    "Whitford",
    "Monkman",
    "Cunningham",
    "Chartrand",
    "Dauphinais",
    "Fidler",
    "Gariépy",
    "Hamelin",
];

const ONSETS: &[&str] = &[
    "b", "br", "c", "ch", "d", "dr", "f", "fl", "g", "gr", "h", "j", "k", "l", "m", "mc", "n", "p", "pl", "r", "s",
    "st", "t", "tr", "v", "w", "bl", "cr", "gl", "sh",
];
const NUCLEI: &[&str] = &[
    "a", "e", "i", "o", "u", "ai", "au", "ea", "ou", "ie", "an", "en", "ar", "or", "al", "el", "il", "ol", "un", "er",
];
const CODAS: &[&str] = &[
    "ard", "ault", "eau", "ette", "ier", "ière", "in", "ison", "kin", "land", "ley", "mont", "neau", "on", "ot",
    "quet", "ry", "ston", "ter", "ton", "ville", "well", "by", "den", "ham",
];

/// Unique surnames: the historical list first, then syllable combinations.
fn surname_supply(rng: &mut ChaCha8Rng, needed: usize) -> Vec<NormalizedText> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(needed);
    let mut push = |s: String, out: &mut Vec<NormalizedText>| {
        let n = normalize_name(&s);
        if seen.insert(n.clone()) {
            out.push(n);
        }
    };
    let mut base: Vec<&str> = SURNAMES.to_vec();
    base.shuffle(rng);
    for s in base {
        push(s.to_owned(), &mut out);
    }
    let mut combos: Vec<String> = Vec::with_capacity(ONSETS.len() * NUCLEI.len() * CODAS.len());
    for o in ONSETS {
        for n in NUCLEI {
            for c in CODAS {
                combos.push(format!("{o}{n}{c}"));
            }
        }
    }
    combos.shuffle(rng);
    for s in &combos {
        if out.len() >= needed {
            break;
        }
        push(s.clone(), &mut out);
    }
    // double-barrelled names once single combinations run out
    let mut k = 0usize;
    while out.len() < needed {
        let a = &combos[k % combos.len()];
        let b = &combos[(k / combos.len() + 1 + k) % combos.len()];
        push(format!("{a}-{b}"), &mut out);
        k += 1;
    }
    out.truncate(needed);
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sex {
    Male,
    Female,
}

struct Individual {
    first: NormalizedText,
    last: NormalizedText,
    family: usize,
    /// Years during which the individual may witness or sponsor.
    active: Option<(i32, i32)>,
}

struct Family {
    parish: usize,
    base_year: i32,
    father: usize,
    mother: usize,
    children: Vec<(usize, Sex, i32)>,
}

struct DraftEvent {
    event_type: EventType,
    year: i32,
    parish: usize,
    participants: Vec<(usize, Role)>,
}

struct Builder {
    rng: ChaCha8Rng,
    people: Vec<Individual>,
    events: Vec<DraftEvent>,
}

impl Builder {
    fn add_event(
        &mut self,
        event_type: EventType,
        year: i32,
        parish: usize,
        participants: Vec<(usize, Role)>,
    ) -> usize {
        self.events.push(DraftEvent { event_type, year, parish, participants });
        self.events.len() - 1
    }
}

fn clamp_year(y: i32) -> i32 {
    y.clamp(MIN_YEAR, MAX_YEAR)
}

fn typo(rng: &mut ChaCha8Rng, name: &NormalizedText) -> NormalizedText {
    let mut chars: Vec<char> = name.as_str().chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
    if letters.is_empty() {
        return name.clone();
    }
    let transposable: Vec<usize> = (0..chars.len().saturating_sub(1))
        .filter(|&i| chars[i] != chars[i + 1] && chars[i].is_alphabetic() && chars[i + 1].is_alphabetic())
        .collect();
    if !transposable.is_empty() && rng.gen_bool(0.5) {
        let i = *transposable.choose(rng).expect("non-empty");
        chars.swap(i, i + 1);
    } else {
        let i = *letters.choose(rng).expect("non-empty");
        let replacement = loop {
            let c = char::from(b'a' + rng.gen_range(0..26u8));
            if c != chars[i] {
                break c;
            }
        };
        chars[i] = replacement;
    }
    normalize_name(&chars.into_iter().collect::<String>())
}

/// Generates a corpus; a pure function of `params`.
pub fn generate_corpus(params: &GenParams) -> Result<GeneratedCorpus> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let families_n = params.families;
    let surnames = surname_supply(&mut rng, families_n * 2);
    let males: Vec<NormalizedText> = MALE_NAMES.iter().map(|n| normalize_name(n)).collect();
    let females: Vec<NormalizedText> = FEMALE_NAMES.iter().map(|n| normalize_name(n)).collect();

    let mut b = Builder { rng, people: Vec::with_capacity(params.n_individuals), events: Vec::new() };

    // parents
    let mut families: Vec<Family> = Vec::with_capacity(families_n);
    for f in 0..families_n {
        let parish = b.rng.gen_range(0..PARISHES.len());
        let base_year = b.rng.gen_range(1800..=1880);
        let father = b.people.len();
        b.people.push(Individual {
            first: males.choose(&mut b.rng).expect("pool").clone(),
            last: surnames[f].clone(),
            family: f,
            active: Some((base_year - 2, base_year)),
        });
        let mother = b.people.len();
        b.people.push(Individual {
            first: females.choose(&mut b.rng).expect("pool").clone(),
            last: surnames[families_n + f].clone(),
            family: f,
            active: Some((base_year - 2, base_year)),
        });
        families.push(Family { parish, base_year, father, mother, children: Vec::new() });
    }

    // children, spread over families at random
    let mut child_counts = vec![0usize; families_n];
    for _ in 0..params.n_individuals - 2 * families_n {
        child_counts[b.rng.gen_range(0..families_n)] += 1;
    }
    for (f, &count) in child_counts.iter().enumerate() {
        let mut used: HashSet<NormalizedText> = HashSet::new();
        let father_first = b.people[families[f].father].first.clone();
        used.insert(father_first.clone());
        used.insert(b.people[families[f].mother].first.clone());
        let namesake = b.rng.gen_bool(params.duplicate_name_rate);
        let mut namesake_given = false;
        let mut year = families[f].base_year;
        for _ in 0..count {
            year += b.rng.gen_range(1..=2);
            let sex = if b.rng.gen_bool(0.5) { Sex::Male } else { Sex::Female };
            let first = if sex == Sex::Male && namesake && !namesake_given {
                namesake_given = true;
                father_first.clone()
            } else {
                let pool = if sex == Sex::Male { &males } else { &females };
                let free: Vec<&NormalizedText> = pool.iter().filter(|n| !used.contains(*n)).collect();
                match free.choose(&mut b.rng) {
                    Some(n) => (*n).clone(),
                    // pool exhausted: suffix keeps the name unique within the family
                    None => normalize_name(&format!("{} {}", pool.choose(&mut b.rng).expect("pool"), used.len())),
                }
            };
            used.insert(first.clone());
            let id = b.people.len();
            b.people.push(Individual { first, last: surnames[f].clone(), family: f, active: None });
            families[f].children.push((id, sex, year));
        }
        let last_birth = families[f].children.last().map_or(families[f].base_year, |c| c.2);
        for parent in [families[f].father, families[f].mother] {
            b.people[parent].active = Some((families[f].base_year - 2, last_birth));
        }
    }

    // first-generation weddings and baptisms
    for fam in &families {
        b.add_event(
            EventType::Marriage,
            fam.base_year,
            fam.parish,
            vec![(fam.father, Role::Husband), (fam.mother, Role::Wife)],
        );
        for &(child, _, year) in &fam.children {
            b.add_event(
                EventType::Baptism,
                year,
                fam.parish,
                vec![(child, Role::Baptized), (fam.father, Role::Father), (fam.mother, Role::Mother)],
            );
        }
    }

    // second generation: children marry within their parish
    if params.second_generation {
        // (sons, daughters) per parish, each as (individual, birth year, family)
        type Children = Vec<(usize, i32, usize)>;
        let mut by_parish: BTreeMap<usize, (Children, Children)> = BTreeMap::new();
        for (f, fam) in families.iter().enumerate() {
            let entry = by_parish.entry(fam.parish).or_default();
            for &(child, sex, year) in &fam.children {
                match sex {
                    Sex::Male => entry.0.push((child, year, f)),
                    Sex::Female => entry.1.push((child, year, f)),
                }
            }
        }
        for (parish, (mut sons, mut daughters)) in by_parish {
            sons.shuffle(&mut b.rng);
            daughters.sort_by_key(|d| (d.1, d.0));
            let mut taken = vec![false; daughters.len()];
            for (son, born, fam_s) in sons {
                if !b.rng.gen_bool(0.7) {
                    continue;
                }
                let pick = daughters
                    .iter()
                    .enumerate()
                    .position(|(k, d)| !taken[k] && d.2 != fam_s && (d.1 - born).abs() <= 5);
                let Some(k) = pick else { continue };
                taken[k] = true;
                let (daughter, d_born, fam_d) = daughters[k];
                let year = born.max(d_born) + b.rng.gen_range(18..=25);
                let mut participants = vec![(son, Role::Husband), (daughter, Role::Wife)];
                for (fam, p) in [(fam_s, 0.8), (fam_d, 0.8)] {
                    if b.rng.gen_bool(p) {
                        participants.push((families[fam].father, Role::Father));
                    }
                    if b.rng.gen_bool(p) {
                        participants.push((families[fam].mother, Role::Mother));
                    }
                }
                b.add_event(EventType::Marriage, clamp_year(year), parish, participants);
                b.people[son].active = Some((year - 2, year + 2));
                b.people[daughter].active = Some((year - 2, year + 2));
            }
        }
    }

    // extra witness and godparent appearances
    let mut by_slot: BTreeMap<(usize, i32), Vec<usize>> = BTreeMap::new();
    for (i, e) in b.events.iter().enumerate() {
        by_slot.entry((e.parish, e.year)).or_default().push(i);
    }
    let range = params.events_per_individual;
    for person in 0..b.people.len() {
        let Some((lo, hi)) = b.people[person].active else { continue };
        let parish = families[b.people[person].family].parish;
        let wanted = b.rng.gen_range(range.min..=range.max);
        for _ in 0..wanted {
            for _attempt in 0..8 {
                let year = b.rng.gen_range(lo..=hi);
                let Some(candidates) = by_slot.get(&(parish, year)) else { continue };
                let ev = *candidates.choose(&mut b.rng).expect("non-empty slot");
                if b.events[ev].participants.iter().any(|(p, _)| *p == person) {
                    continue;
                }
                let role = match b.events[ev].event_type {
                    EventType::Baptism => Role::Godparent,
                    _ => Role::Witness,
                };
                b.events[ev].participants.push((person, role));
                break;
            }
        }
    }

    // recorded dates
    for e in &mut b.events {
        let j = params.date_jitter_years as i32;
        if j > 0 {
            e.year = clamp_year(e.year + b.rng.gen_range(-j..=j));
        }
    }

    // burials after each individual's last recorded appearance
    let mut last_seen: Vec<Option<(i32, usize)>> = vec![None; b.people.len()];
    for e in &b.events {
        for &(p, _) in &e.participants {
            if last_seen[p].is_none_or(|(y, _)| e.year >= y) {
                last_seen[p] = Some((e.year, e.parish));
            }
        }
    }
    for (person, seen) in last_seen.iter().enumerate() {
        let Some((year, parish)) = *seen else { continue };
        if b.rng.gen_bool(params.death_rate) {
            let death = clamp_year(year + b.rng.gen_range(1..=4));
            b.add_event(EventType::Death, death, parish, vec![(person, Role::Deceased)]);
        }
    }

    // materialize with noise
    let mut events = Vec::with_capacity(b.events.len());
    let mut persons = Vec::new();
    let mut truth = Vec::new();
    let mut alias_pairs = Vec::new();
    for (canonical, aliases) in PARISHES {
        for a in *aliases {
            alias_pairs.push((*a, *canonical));
        }
    }
    let alias_table = AliasTable::from_pairs(alias_pairs)?;
    let mut record_no = 0usize;
    for (i, draft) in b.events.iter().enumerate() {
        let event_id = EventId::new(format!("e{:08}", i + 1));
        let (canonical, aliases) = PARISHES[draft.parish];
        let location = if b.rng.gen_bool(params.location_alias_rate) {
            aliases.choose(&mut b.rng).expect("alias list")
        } else {
            canonical
        };
        let (month, day) = if b.rng.gen_bool(0.5) {
            (Some(b.rng.gen_range(1..=12u8)), Some(b.rng.gen_range(1..=28u8)))
        } else {
            (None, None)
        };
        let date = EventDate::new(draft.year, month, day)?;
        events.push(Event::new(event_id.clone(), draft.event_type.clone(), date, normalize_name(location)));
        for (p, role) in &draft.participants {
            record_no += 1;
            let record_id = RecordId::new(format!("r{record_no:08}"));
            let ind = &b.people[*p];
            let first = if b.rng.gen_bool(params.typo_rate) { typo(&mut b.rng, &ind.first) } else { ind.first.clone() };
            let mut last =
                if b.rng.gen_bool(params.typo_rate) { typo(&mut b.rng, &ind.last) } else { ind.last.clone() };
            if last.is_empty() {
                last = ind.last.clone();
            }
            persons.push(PersonRecord {
                record_id: record_id.clone(),
                event_id: event_id.clone(),
                first_name: first,
                last_name: last,
                role: role.clone(),
            });
            truth.push((record_id, format!("i{:08}", p + 1)));
        }
    }
    let corpus = Corpus::new(events, persons)?;
    Ok(GeneratedCorpus { corpus, aliases: alias_table, truth: Truth::from_pairs(truth)? })
}

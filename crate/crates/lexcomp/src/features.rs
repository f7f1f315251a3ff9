//! Per-instance scalar features from lexical resources: corpus frequency
//! lists, pedagogical level lists, familiarity norms, and precomputed
//! external model outputs.
//!
//! Missing entries never fail a lookup. Corpus counts are Laplace-smoothed,
//! level lists substitute one level past the hardest, and familiarity norms
//! substitute the lowest stored value. Multi-token expressions aggregate by
//! the minimum (frequency, familiarity) or maximum (level) over their items.
//! All tables are immutable after ingest and all lookups are pure.

use std::collections::HashMap;
use std::path::Path;

use crate::dataset::Instance;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// What a frequency table's keys are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqUnit {
    WordSurface,
    Lemma,
    Character,
}

/// Word (or character) counts with the corpus totals needed for smoothing.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    token_total: u64,
    type_total: u64,
    unit: FreqUnit,
}

impl FrequencyTable {
    /// Builds a table from raw counts; zero counts are rejected at ingest.
    /// Totals default to the sum of counts and the number of distinct words.
    pub fn from_counts(
        counts: impl IntoIterator<Item = (String, u64)>,
        unit: FreqUnit,
    ) -> Result<Self> {
        let mut map = HashMap::new();
        let mut token_total = 0u64;
        for (word, count) in counts {
            if count == 0 {
                return Err(Error::Invalid(format!("zero count for {word:?}")));
            }
            if map.insert(word.clone(), count).is_some() {
                return Err(Error::Invalid(format!("duplicate count row for {word:?}")));
            }
            token_total += count;
        }
        if map.is_empty() {
            return Err(Error::Invalid("empty frequency table".into()));
        }
        let type_total = map.len() as u64;
        Ok(FrequencyTable {
            counts: map,
            token_total,
            type_total,
            unit,
        })
    }

    /// Overrides the derived totals, for published lists that truncate the
    /// long tail.
    pub fn with_totals(mut self, token_total: u64, type_total: u64) -> Result<Self> {
        if type_total < 1 || token_total < type_total {
            return Err(Error::Invalid(format!(
                "totals must satisfy tokens >= types >= 1, got {token_total}/{type_total}"
            )));
        }
        self.token_total = token_total;
        self.type_total = type_total;
        Ok(self)
    }

    /// Loads a `word<TAB>count` file. Directive lines `#tokens=N` and
    /// `#types=N` before the data override the derived totals.
    pub fn load(path: impl AsRef<Path>, unit: FreqUnit) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file = path.display().to_string();
        let mut token_override = None;
        let mut type_override = None;
        let mut rows = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::parse(&file, lineno, "malformed directive"))?;
                let value: u64 = value.trim().parse().map_err(|_| {
                    Error::parse(&file, lineno, format!("directive value {value:?} not an integer"))
                })?;
                match key.trim() {
                    "tokens" => token_override = Some(value),
                    "types" => type_override = Some(value),
                    other => {
                        return Err(Error::parse(
                            &file,
                            lineno,
                            format!("unknown directive {other:?}"),
                        ))
                    }
                }
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(&file, lineno, "expected word<TAB>count"))?;
            let count: u64 = count.trim().parse().map_err(|_| {
                Error::parse(&file, lineno, format!("count {count:?} is not an integer"))
            })?;
            if count == 0 {
                return Err(Error::parse(&file, lineno, format!("zero count for {word:?}")));
            }
            rows.push((word.to_string(), count));
        }
        let mut table = FrequencyTable::from_counts(rows, unit)
            .map_err(|e| Error::Invalid(format!("{file}: {e}")))?;
        let token_total = token_override.unwrap_or(table.token_total);
        let type_total = type_override.unwrap_or(table.type_total);
        table = table.with_totals(token_total, type_total)?;
        Ok(table)
    }

    pub fn unit(&self) -> FreqUnit {
        self.unit
    }

    pub fn token_total(&self) -> u64 {
        self.token_total
    }

    pub fn type_total(&self) -> u64 {
        self.type_total
    }

    pub fn count(&self, item: &str) -> u64 {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn contains(&self, item: &str) -> bool {
        self.counts.contains_key(item)
    }

    /// Laplace-smoothed relative frequency on a base-10 log scale:
    /// `log10((count + 1) / (tokens + types))`. Defined for unseen items.
    pub fn smoothed_log_freq(&self, item: &str) -> f64 {
        let num = (self.count(item) + 1) as f64;
        let den = (self.token_total + self.type_total) as f64;
        (num / den).log10()
    }

    /// Minimum smoothed log-frequency over a token sequence.
    pub fn sequence_log_freq<S: AsRef<str>>(&self, items: &[S]) -> Result<f64> {
        if items.is_empty() {
            return Err(Error::Invalid("empty sequence".into()));
        }
        Ok(items
            .iter()
            .map(|s| self.smoothed_log_freq(s.as_ref()))
            .fold(f64::INFINITY, f64::min))
    }

    /// Minimum smoothed log-frequency over the code points of `target`.
    pub fn char_log_freq(&self, target: &str) -> Result<f64> {
        if target.is_empty() {
            return Err(Error::Invalid("empty target".into()));
        }
        let mut buf = [0u8; 4];
        Ok(target
            .chars()
            .map(|c| self.smoothed_log_freq(c.encode_utf8(&mut buf)))
            .fold(f64::INFINITY, f64::min))
    }
}

/// Pedagogical difficulty levels in `1..=max_level`; out-of-list lemmas
/// take the dummy level `max_level + 1`.
#[derive(Debug, Clone)]
pub struct LevelTable {
    levels: HashMap<String, u32>,
    max_level: u32,
}

impl LevelTable {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, u32)>) -> Result<Self> {
        let mut levels = HashMap::new();
        let mut max_level = 0;
        for (lemma, level) in pairs {
            if level < 1 {
                return Err(Error::Invalid(format!("level 0 for {lemma:?}")));
            }
            if levels.insert(lemma.clone(), level).is_some() {
                return Err(Error::Invalid(format!("duplicate level row for {lemma:?}")));
            }
            max_level = max_level.max(level);
        }
        if levels.is_empty() {
            return Err(Error::Invalid("empty level table".into()));
        }
        Ok(LevelTable { levels, max_level })
    }

    /// Declares the full scheme depth when the ingested list does not use
    /// every level.
    pub fn with_max_level(mut self, max_level: u32) -> Result<Self> {
        if let Some((lemma, level)) = self.levels.iter().find(|(_, l)| **l > max_level) {
            return Err(Error::Invalid(format!(
                "stored level {level} for {lemma:?} exceeds max level {max_level}"
            )));
        }
        self.max_level = max_level;
        Ok(self)
    }

    /// Loads a `lemma<TAB>level` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let pairs = load_value_rows(path)?
            .into_iter()
            .map(|(lemma, v, lineno)| {
                if v.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&v) {
                    Err(Error::parse(
                        path.display().to_string(),
                        lineno,
                        format!("level {v} is not a positive integer"),
                    ))
                } else {
                    Ok((lemma, v as u32))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        LevelTable::from_pairs(pairs)
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn dummy(&self) -> u32 {
        self.max_level + 1
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.levels.contains_key(lemma)
    }

    pub fn level(&self, lemma: &str) -> u32 {
        self.levels.get(lemma).copied().unwrap_or_else(|| self.dummy())
    }

    /// Maximum level over a lemma sequence, with out-of-list lemmas at the
    /// dummy level.
    pub fn level_feature<S: AsRef<str>>(&self, lemmas: &[S]) -> Result<u32> {
        if lemmas.is_empty() {
            return Err(Error::Invalid("empty sequence".into()));
        }
        Ok(lemmas.iter().map(|s| self.level(s.as_ref())).max().unwrap())
    }
}

/// Real-valued familiarity norms; out-of-list lemmas take the stored
/// minimum.
#[derive(Debug, Clone)]
pub struct FamiliarityTable {
    familiarity: HashMap<String, f64>,
    floor: f64,
}

impl FamiliarityTable {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut familiarity = HashMap::new();
        let mut floor = f64::INFINITY;
        for (lemma, value) in pairs {
            if !value.is_finite() {
                return Err(Error::Invalid(format!("non-finite familiarity for {lemma:?}")));
            }
            if familiarity.insert(lemma.clone(), value).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate familiarity row for {lemma:?}"
                )));
            }
            floor = floor.min(value);
        }
        if familiarity.is_empty() {
            return Err(Error::Invalid("empty familiarity table".into()));
        }
        Ok(FamiliarityTable { familiarity, floor })
    }

    /// Loads a `lemma<TAB>value` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let pairs = load_value_rows(path.as_ref())?
            .into_iter()
            .map(|(lemma, v, _)| (lemma, v));
        FamiliarityTable::from_pairs(pairs)
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.familiarity.contains_key(lemma)
    }

    pub fn familiarity(&self, lemma: &str) -> f64 {
        self.familiarity.get(lemma).copied().unwrap_or(self.floor)
    }

    /// Minimum familiarity over a lemma sequence, with out-of-list lemmas
    /// at the floor.
    pub fn familiarity_feature<S: AsRef<str>>(&self, lemmas: &[S]) -> Result<f64> {
        if lemmas.is_empty() {
            return Err(Error::Invalid("empty sequence".into()));
        }
        Ok(lemmas
            .iter()
            .map(|s| self.familiarity(s.as_ref()))
            .fold(f64::INFINITY, f64::min))
    }
}

/// Precomputed per-instance values from an external model.
#[derive(Debug, Clone)]
pub struct ExternalFeature {
    name: String,
    values: HashMap<String, f64>,
}

impl ExternalFeature {
    pub fn from_pairs(
        name: impl Into<String>,
        pairs: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self> {
        let mut values = HashMap::new();
        for (id, value) in pairs {
            if values.insert(id.clone(), value).is_some() {
                return Err(Error::Invalid(format!("duplicate feature row for {id:?}")));
            }
        }
        Ok(ExternalFeature {
            name: name.into(),
            values,
        })
    }

    /// Loads an `instance_id<TAB>value` file.
    pub fn load(path: impl AsRef<Path>, name: impl Into<String>) -> Result<Self> {
        let pairs = load_value_rows(path.as_ref())?
            .into_iter()
            .map(|(id, v, _)| (id, v));
        ExternalFeature::from_pairs(name, pairs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, instance_id: &str) -> Option<f64> {
        self.values.get(instance_id).copied()
    }
}

/// Shared reader for two-column `key<TAB>float` files.
fn load_value_rows(path: &Path) -> Result<Vec<(String, f64, usize)>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = path.display().to_string();
    let mut rows = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&file, lineno, "expected key<TAB>value"))?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::parse(&file, lineno, format!("value {value:?} is not a number"))
        })?;
        rows.push((key.to_string(), value, lineno));
    }
    Ok(rows)
}

/// A named feature source bound to its lookup rule.
///
/// Word frequencies look up tokens or lemmas depending on the table's
/// declared unit; character frequencies look up the target's code points;
/// level and familiarity lists look up lemmas.
#[derive(Debug, Clone)]
pub enum Resource {
    WordFreq { name: String, table: FrequencyTable },
    CharFreq { name: String, table: FrequencyTable },
    Level { name: String, table: LevelTable },
    Familiarity { name: String, table: FamiliarityTable },
    External(ExternalFeature),
}

impl Resource {
    pub fn name(&self) -> &str {
        match self {
            Resource::WordFreq { name, .. } => name,
            Resource::CharFreq { name, .. } => name,
            Resource::Level { name, .. } => name,
            Resource::Familiarity { name, .. } => name,
            Resource::External(f) => f.name(),
        }
    }

    fn freq_items<'a>(table: &FrequencyTable, instance: &'a Instance) -> &'a [String] {
        match table.unit() {
            FreqUnit::Lemma => &instance.lemmas,
            _ => &instance.tokens,
        }
    }

    /// The feature value for one instance, with the resource's
    /// missing-value substitution applied.
    pub fn value(&self, instance: &Instance) -> Result<f64> {
        match self {
            Resource::WordFreq { table, .. } => {
                table.sequence_log_freq(Self::freq_items(table, instance))
            }
            Resource::CharFreq { table, .. } => table.char_log_freq(&instance.target),
            Resource::Level { table, .. } => {
                Ok(table.level_feature(&instance.lemmas)? as f64)
            }
            Resource::Familiarity { table, .. } => table.familiarity_feature(&instance.lemmas),
            Resource::External(f) => f.value(&instance.id).ok_or_else(|| {
                Error::Invalid(format!(
                    "external feature {:?} has no entry for instance {:?}",
                    f.name(),
                    instance.id
                ))
            }),
        }
    }

    /// True when every lookup the instance needs is present in the resource,
    /// i.e. the value involves no smoothing of an unseen item and no
    /// dummy/floor substitution.
    pub fn covers(&self, instance: &Instance) -> bool {
        match self {
            Resource::WordFreq { table, .. } => Self::freq_items(table, instance)
                .iter()
                .all(|t| table.contains(t)),
            Resource::CharFreq { table, .. } => {
                let mut buf = [0u8; 4];
                instance
                    .characters()
                    .all(|c| table.contains(c.encode_utf8(&mut buf)))
            }
            Resource::Level { table, .. } => {
                instance.lemmas.iter().all(|l| table.contains(l))
            }
            Resource::Familiarity { table, .. } => {
                instance.lemmas.iter().all(|l| table.contains(l))
            }
            Resource::External(f) => f.value(&instance.id).is_some(),
        }
    }
}

/// Per-instance coverage flags for a resource.
pub fn coverage_mask(resource: &Resource, instances: &[Instance]) -> Vec<bool> {
    instances.iter().map(|i| resource.covers(i)).collect()
}

/// Named resources addressable by feature specs.
#[derive(Debug, Clone, Default)]
pub struct ResourceSet {
    resources: Vec<Resource>,
}

impl ResourceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, resource: Resource) -> Result<()> {
        if self.get(resource.name()).is_some() {
            return Err(Error::Invalid(format!(
                "duplicate resource name {:?}",
                resource.name()
            )));
        }
        self.resources.push(resource);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Resource> {
        self.resources.iter().find(|r| r.name() == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Resource> {
        self.resources.iter()
    }

    /// Resolves an ordered feature spec into resource references.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<&Resource>> {
        names
            .iter()
            .map(|n| {
                self.get(n.as_ref())
                    .ok_or_else(|| Error::Invalid(format!("unknown resource {:?}", n.as_ref())))
            })
            .collect()
    }
}

/// A feature matrix with its column names, one row per instance.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub values: Matrix,
}

/// Evaluates an ordered list of feature specs over the instances.
/// Column order follows the spec order exactly.
pub fn build_feature_matrix(instances: &[Instance], specs: &[&Resource]) -> Result<FeatureMatrix> {
    if specs.is_empty() {
        return Err(Error::Invalid("empty feature spec list".into()));
    }
    let mut data = Vec::with_capacity(instances.len() * specs.len());
    for instance in instances {
        for spec in specs {
            data.push(spec.value(instance)?);
        }
    }
    Ok(FeatureMatrix {
        names: specs.iter().map(|s| s.name().to_string()).collect(),
        values: Matrix::from_vec(instances.len(), specs.len(), data)?,
    })
}

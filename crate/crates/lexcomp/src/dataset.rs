//! Annotated dataset handling: target-word instances, per-annotator rating
//! matrices, group aggregates, and the TSV formats they are exchanged in.
//!
//! All types are immutable after construction and safe to share across
//! threads; the operations are pure functions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Etymological origin of a target expression's content tokens.
///
/// `Mixed` marks expressions combining Sino-Japanese and native content
/// tokens; `Other` covers loanwords from other languages. Keeping them out
/// of the two main categories lets origin-contrast analyses exclude them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Japanese,
    Chinese,
    Mixed,
    Other,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Japanese => "japanese",
            Origin::Chinese => "chinese",
            Origin::Mixed => "mixed",
            Origin::Other => "other",
        }
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "japanese" => Ok(Origin::Japanese),
            "chinese" => Ok(Origin::Chinese),
            "mixed" => Ok(Origin::Mixed),
            "other" => Ok(Origin::Other),
            other => Err(Error::Invalid(format!("unknown origin {other:?}"))),
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dataset split membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Trial,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Trial => "trial",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trial" => Ok(Split::Trial),
            "test" => Ok(Split::Test),
            other => Err(Error::Invalid(format!("unknown split {other:?}"))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One target word, pre-tokenized into content tokens with aligned lemmas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub target: String,
    pub tokens: Vec<String>,
    pub lemmas: Vec<String>,
    pub origin: Origin,
    pub pos: String,
    pub split: Split,
}

impl Instance {
    pub fn new(
        id: impl Into<String>,
        target: impl Into<String>,
        tokens: Vec<String>,
        lemmas: Vec<String>,
        origin: Origin,
        pos: impl Into<String>,
        split: Split,
    ) -> Result<Self> {
        let inst = Instance {
            id: id.into(),
            target: target.into(),
            tokens,
            lemmas,
            origin,
            pos: pos.into(),
            split,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Invalid("empty instance id".into()));
        }
        if self.target.is_empty() {
            return Err(Error::Invalid(format!("instance {}: empty target", self.id)));
        }
        if self.tokens.is_empty() {
            return Err(Error::Invalid(format!("instance {}: no tokens", self.id)));
        }
        if self.tokens.len() != self.lemmas.len() {
            return Err(Error::Invalid(format!(
                "instance {}: {} tokens but {} lemmas",
                self.id,
                self.tokens.len(),
                self.lemmas.len()
            )));
        }
        Ok(())
    }

    /// Code points of the target surface, for character-level lookups.
    pub fn characters(&self) -> impl Iterator<Item = char> + '_ {
        self.target.chars()
    }
}

/// Self-reported background of one annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorProfile {
    pub annotator_id: String,
    pub native_languages: Vec<String>,
    pub jlpt_level: String,
    pub years_in_japan: f64,
    pub reading_hours_per_week: f64,
    pub age_years: f64,
    pub education_years: f64,
}

/// Annotators x instances grid of complexity ratings in [0, 1];
/// `None` marks a missing rating.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    annotator_ids: Vec<String>,
    instance_ids: Vec<String>,
    // Row-major, one row per annotator.
    values: Vec<Option<f64>>,
}

/// The five-point rating grid used by strict validation.
pub const RATING_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn on_grid(v: f64) -> bool {
    RATING_GRID.iter().any(|g| *g == v)
}

impl RatingMatrix {
    pub fn new(
        annotator_ids: Vec<String>,
        instance_ids: Vec<String>,
        values: Vec<Option<f64>>,
        strict_grid: bool,
    ) -> Result<Self> {
        if annotator_ids.is_empty() {
            return Err(Error::Invalid("no annotators".into()));
        }
        if values.len() != annotator_ids.len() * instance_ids.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} annotators x {} instances",
                values.len(),
                annotator_ids.len(),
                instance_ids.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &annotator_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Invalid(format!("duplicate annotator id {id:?}")));
            }
        }
        let mut seen = HashSet::new();
        for id in &instance_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Invalid(format!("duplicate instance id {id:?}")));
            }
        }
        let matrix = RatingMatrix {
            annotator_ids,
            instance_ids,
            values,
        };
        for (a, row) in matrix.values.chunks(matrix.instance_ids.len()).enumerate() {
            for (i, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    if !(0.0..=1.0).contains(v) {
                        return Err(Error::Invalid(format!(
                            "rating {} by annotator {:?} on instance {:?} outside [0, 1]",
                            v, matrix.annotator_ids[a], matrix.instance_ids[i]
                        )));
                    }
                    if strict_grid && !on_grid(*v) {
                        return Err(Error::Invalid(format!(
                            "rating {} by annotator {:?} on instance {:?} not on the 5-level grid",
                            v, matrix.annotator_ids[a], matrix.instance_ids[i]
                        )));
                    }
                }
            }
        }
        for i in 0..matrix.instance_ids.len() {
            if matrix.unit_values(i).next().is_none() {
                return Err(Error::Invalid(format!(
                    "instance {:?} has no ratings",
                    matrix.instance_ids[i]
                )));
            }
        }
        Ok(matrix)
    }

    pub fn n_annotators(&self) -> usize {
        self.annotator_ids.len()
    }

    pub fn n_instances(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn annotator_ids(&self) -> &[String] {
        &self.annotator_ids
    }

    pub fn instance_ids(&self) -> &[String] {
        &self.instance_ids
    }

    pub fn get(&self, annotator: usize, instance: usize) -> Option<f64> {
        self.values[annotator * self.instance_ids.len() + instance]
    }

    pub fn annotator_row(&self, annotator: usize) -> &[Option<f64>] {
        let n = self.instance_ids.len();
        &self.values[annotator * n..(annotator + 1) * n]
    }

    /// Present ratings for one instance column.
    pub fn unit_values(&self, instance: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.annotator_ids.len()).filter_map(move |a| self.get(a, instance))
    }

    /// Restricts the matrix to the given annotator ids, preserving their
    /// order in `ids`.
    pub fn select_annotators(&self, ids: &[&str]) -> Result<RatingMatrix> {
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let a = self
                .annotator_ids
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| Error::Invalid(format!("unknown annotator {id:?}")))?;
            rows.push(a);
        }
        let mut values = Vec::with_capacity(rows.len() * self.instance_ids.len());
        for &a in &rows {
            values.extend_from_slice(self.annotator_row(a));
        }
        RatingMatrix::new(
            ids.iter().map(|s| s.to_string()).collect(),
            self.instance_ids.clone(),
            values,
            false,
        )
    }

    /// Restricts the matrix to the given instance columns, in order.
    pub fn select_instances(&self, indices: &[usize]) -> Result<RatingMatrix> {
        let mut instance_ids = Vec::with_capacity(indices.len());
        for &i in indices {
            instance_ids.push(
                self.instance_ids
                    .get(i)
                    .ok_or_else(|| Error::Invalid(format!("instance index {i} out of range")))?
                    .clone(),
            );
        }
        let mut values = Vec::with_capacity(self.annotator_ids.len() * indices.len());
        for a in 0..self.annotator_ids.len() {
            for &i in indices {
                values.push(self.get(a, i));
            }
        }
        RatingMatrix::new(self.annotator_ids.clone(), instance_ids, values, false)
    }

    /// Reorders instance columns to match `ids` exactly.
    pub fn reorder_instances(&self, ids: &[String]) -> Result<RatingMatrix> {
        if ids.len() != self.instance_ids.len() {
            return Err(Error::Invalid(format!(
                "ratings cover {} instances, expected {}",
                self.instance_ids.len(),
                ids.len()
            )));
        }
        let index: HashMap<&str, usize> = self
            .instance_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut indices = Vec::with_capacity(ids.len());
        for id in ids {
            let i = *index
                .get(id.as_str())
                .ok_or_else(|| Error::Invalid(format!("ratings missing instance {id:?}")))?;
            indices.push(i);
        }
        self.select_instances(&indices)
    }
}

/// Who a view's targets come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    GroupMean,
    GroupMajority,
    Individual(String),
}

/// Real-valued complexity targets over an ordered instance list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityView {
    pub instance_ids: Vec<String>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ComplexityView {
    pub fn new(instance_ids: Vec<String>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if instance_ids.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} ids vs {} values",
                instance_ids.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("complexity {v} outside [0, 1]")));
        }
        Ok(ComplexityView {
            instance_ids,
            values,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Binary complex/simple labels over an ordered instance list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelView {
    pub instance_ids: Vec<String>,
    pub labels: Vec<bool>,
    pub provenance: Provenance,
}

/// Arithmetic mean of the present ratings per instance.
pub fn group_mean(matrix: &RatingMatrix) -> ComplexityView {
    let values = (0..matrix.n_instances())
        .map(|i| {
            let mut sum = 0.0;
            let mut n = 0usize;
            for v in matrix.unit_values(i) {
                sum += v;
                n += 1;
            }
            sum / n as f64
        })
        .collect();
    ComplexityView {
        instance_ids: matrix.instance_ids().to_vec(),
        values,
        provenance: Provenance::GroupMean,
    }
}

/// Binary complexity label: complex iff `value >= threshold`.
pub fn cwi_label(value: f64, threshold: f64) -> bool {
    value >= threshold
}

/// Majority vote over per-annotator binary labels; ties count as complex.
pub fn group_majority(matrix: &RatingMatrix, threshold: f64) -> LabelView {
    let labels = (0..matrix.n_instances())
        .map(|i| {
            let mut complex = 0usize;
            let mut total = 0usize;
            for v in matrix.unit_values(i) {
                if cwi_label(v, threshold) {
                    complex += 1;
                }
                total += 1;
            }
            2 * complex >= total
        })
        .collect();
    LabelView {
        instance_ids: matrix.instance_ids().to_vec(),
        labels,
        provenance: Provenance::GroupMajority,
    }
}

/// Per-annotator thresholded labels, skipping missing ratings.
/// Returns instance indices alongside labels so callers can subset features.
pub fn individual_labels(
    matrix: &RatingMatrix,
    annotator: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<bool>) {
    let mut indices = Vec::new();
    let mut labels = Vec::new();
    for (i, v) in matrix.annotator_row(annotator).iter().enumerate() {
        if let Some(v) = v {
            indices.push(i);
            labels.push(cwi_label(*v, threshold));
        }
    }
    (indices, labels)
}

/// Per-annotator raw ratings, skipping missing ones.
pub fn individual_ratings(matrix: &RatingMatrix, annotator: usize) -> (Vec<usize>, Vec<f64>) {
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (i, v) in matrix.annotator_row(annotator).iter().enumerate() {
        if let Some(v) = v {
            indices.push(i);
            values.push(*v);
        }
    }
    (indices, values)
}

/// Row-concatenation of named rating matrices over an identical instance
/// list. Annotator ids colliding across groups are prefixed with
/// `"<group>:"`.
pub fn union(groups: &[(&str, &RatingMatrix)]) -> Result<RatingMatrix> {
    let (_, first) = groups
        .first()
        .ok_or_else(|| Error::Invalid("union of zero groups".into()))?;
    let instance_ids = first.instance_ids().to_vec();
    for (name, m) in groups {
        if m.instance_ids() != instance_ids.as_slice() {
            return Err(Error::Invalid(format!(
                "group {name:?} does not share the instance-id list of the first group"
            )));
        }
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (_, m) in groups {
        for id in m.annotator_ids() {
            *counts.entry(id.as_str()).or_default() += 1;
        }
    }
    let mut annotator_ids = Vec::new();
    let mut values = Vec::new();
    for (name, m) in groups {
        for (a, id) in m.annotator_ids().iter().enumerate() {
            if counts[id.as_str()] > 1 {
                annotator_ids.push(format!("{name}:{id}"));
            } else {
                annotator_ids.push(id.clone());
            }
            values.extend_from_slice(m.annotator_row(a));
        }
    }
    RatingMatrix::new(annotator_ids, instance_ids, values, false)
}

/// One row of a composition summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionRow {
    pub split: Split,
    pub kind: String,
    pub category: String,
    pub count: usize,
    pub percent: f64,
}

/// Proportions of origin and POS categories per split.
///
/// Origin rows count containment: `chinese` covers every expression with
/// Sino-Japanese content (including mixed ones), `other` covers loanwords,
/// and `japanese` counts purely native expressions, so the three sum to
/// 100%.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionTable {
    pub rows: Vec<CompositionRow>,
}

impl CompositionTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("split\tkind\tcategory\tcount\tpercent\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.1}\n",
                r.split, r.kind, r.category, r.count, r.percent
            ));
        }
        out
    }
}

pub fn describe(instances: &[Instance]) -> Result<CompositionTable> {
    if instances.is_empty() {
        return Err(Error::Invalid("no instances to describe".into()));
    }
    let mut rows = Vec::new();
    for split in [Split::Trial, Split::Test] {
        let subset: Vec<&Instance> = instances.iter().filter(|i| i.split == split).collect();
        if subset.is_empty() {
            continue;
        }
        let total = subset.len() as f64;
        let chinese = subset
            .iter()
            .filter(|i| matches!(i.origin, Origin::Chinese | Origin::Mixed))
            .count();
        let other = subset
            .iter()
            .filter(|i| matches!(i.origin, Origin::Other))
            .count();
        let japanese = subset
            .iter()
            .filter(|i| matches!(i.origin, Origin::Japanese))
            .count();
        for (category, count) in [("chinese", chinese), ("other", other), ("japanese", japanese)]
        {
            rows.push(CompositionRow {
                split,
                kind: "origin".into(),
                category: category.into(),
                count,
                percent: 100.0 * count as f64 / total,
            });
        }
        let mut pos_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for i in &subset {
            *pos_counts.entry(i.pos.as_str()).or_default() += 1;
        }
        let mut pos: Vec<(&str, usize)> = pos_counts.into_iter().collect();
        pos.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        for (category, count) in pos {
            rows.push(CompositionRow {
                split,
                kind: "pos".into(),
                category: category.into(),
                count,
                percent: 100.0 * count as f64 / total,
            });
        }
    }
    Ok(CompositionTable { rows })
}

/// Instances plus the rating matrix covering them, column-aligned.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub ratings: RatingMatrix,
}

impl Dataset {
    pub fn new(instances: Vec<Instance>, ratings: RatingMatrix) -> Result<Self> {
        let ids: Vec<String> = instances.iter().map(|i| i.id.clone()).collect();
        if ratings.instance_ids() != ids.as_slice() {
            return Err(Error::Invalid(
                "ratings are not aligned with the instance list".into(),
            ));
        }
        Ok(Dataset { instances, ratings })
    }

    /// Loads and validates both files; the rating columns are reordered to
    /// the instance-file order.
    pub fn load(
        instances_path: impl AsRef<Path>,
        ratings_path: impl AsRef<Path>,
        strict_grid: bool,
    ) -> Result<Self> {
        let (instances, ratings) = load_dataset(instances_path, ratings_path, strict_grid)?;
        Ok(Dataset { instances, ratings })
    }

    /// The subset belonging to one split, with matching rating columns.
    pub fn filter_split(&self, split: Split) -> Result<Dataset> {
        let indices: Vec<usize> = self
            .instances
            .iter()
            .enumerate()
            .filter(|(_, i)| i.split == split)
            .map(|(n, _)| n)
            .collect();
        if indices.is_empty() {
            return Err(Error::Invalid(format!("no instances in split {split}")));
        }
        let instances = indices.iter().map(|&n| self.instances[n].clone()).collect();
        let ratings = self.ratings.select_instances(&indices)?;
        Dataset::new(instances, ratings)
    }
}

// ---------------------------------------------------------------------------
// TSV I/O
// ---------------------------------------------------------------------------

const INSTANCE_HEADER: &str = "id\ttarget\ttokens\tlemmas\torigin\tpos\tsplit";
const PROFILE_HEADER: &str = "annotator_id\tnative_languages\tjlpt_level\tyears_in_japan\treading_hours_per_week\tage_years\teducation_years";

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

/// Loads instances from the tab-separated format
/// `id  target  tokens  lemmas  origin  pos  split` (tokens and lemmas
/// space-separated within their field, header row required).
pub fn load_instances(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let content = read_file(path)?;
    let file = file_name(path);
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&file, 1, "empty file"))?;
    if header.trim_end() != INSTANCE_HEADER {
        return Err(Error::parse(
            &file,
            1,
            format!("expected header {INSTANCE_HEADER:?}"),
        ));
    }
    let mut instances = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                &file,
                lineno,
                format!("expected 7 columns, found {}", fields.len()),
            ));
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::parse(
                &file,
                lineno,
                format!("duplicate instance id {:?}", fields[0]),
            ));
        }
        let tokens: Vec<String> = fields[2].split_whitespace().map(String::from).collect();
        let lemmas: Vec<String> = fields[3].split_whitespace().map(String::from).collect();
        let origin: Origin = fields[4]
            .parse()
            .map_err(|e| Error::parse(&file, lineno, format!("{e}")))?;
        let split: Split = fields[6]
            .parse()
            .map_err(|e| Error::parse(&file, lineno, format!("{e}")))?;
        let instance = Instance::new(fields[0], fields[1], tokens, lemmas, origin, fields[5], split)
            .map_err(|e| Error::parse(&file, lineno, format!("{e}")))?;
        instances.push(instance);
    }
    Ok(instances)
}

/// Loads a rating matrix from the tab-separated format
/// `id  <annotator> ...` with one row per instance; empty cells are missing
/// ratings.
pub fn load_ratings(path: impl AsRef<Path>, strict_grid: bool) -> Result<RatingMatrix> {
    let path = path.as_ref();
    let content = read_file(path)?;
    let file = file_name(path);
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&file, 1, "empty file"))?;
    let columns: Vec<&str> = header.split('\t').collect();
    if columns.first() != Some(&"id") {
        return Err(Error::parse(&file, 1, "first header column must be \"id\""));
    }
    let annotator_ids: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();
    if annotator_ids.is_empty() {
        return Err(Error::parse(&file, 1, "no annotators"));
    }
    let mut instance_ids: Vec<String> = Vec::new();
    // Collected row-per-instance; transposed into annotator rows below.
    let mut grid: Vec<Vec<Option<f64>>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != annotator_ids.len() + 1 {
            return Err(Error::parse(
                &file,
                lineno,
                format!(
                    "expected {} columns, found {}",
                    annotator_ids.len() + 1,
                    fields.len()
                ),
            ));
        }
        let mut row = Vec::with_capacity(annotator_ids.len());
        for (a, cell) in fields[1..].iter().enumerate() {
            if cell.is_empty() {
                row.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::parse(
                        &file,
                        lineno,
                        format!("rating {:?} in column {:?} is not a number", cell, annotator_ids[a]),
                    )
                })?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::parse(
                        &file,
                        lineno,
                        format!(
                            "rating {} on instance {:?} in column {:?} outside [0, 1]",
                            v, fields[0], annotator_ids[a]
                        ),
                    ));
                }
                row.push(Some(v));
            }
        }
        instance_ids.push(fields[0].to_string());
        grid.push(row);
    }
    let n_inst = instance_ids.len();
    let mut values = vec![None; annotator_ids.len() * n_inst];
    for (i, row) in grid.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            values[a * n_inst + i] = *v;
        }
    }
    RatingMatrix::new(annotator_ids, instance_ids, values, strict_grid)
}

/// Loads instances and ratings together; both end up sharing the ordered
/// instance-id list of the instance file.
pub fn load_dataset(
    instances_path: impl AsRef<Path>,
    ratings_path: impl AsRef<Path>,
    strict_grid: bool,
) -> Result<(Vec<Instance>, RatingMatrix)> {
    let instances = load_instances(instances_path)?;
    let ratings = load_ratings(ratings_path, strict_grid)?;
    let ids: Vec<String> = instances.iter().map(|i| i.id.clone()).collect();
    let ratings = ratings.reorder_instances(&ids)?;
    Ok((instances, ratings))
}

/// Loads annotator profiles; native languages are space-separated within
/// their field.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<AnnotatorProfile>> {
    let path = path.as_ref();
    let content = read_file(path)?;
    let file = file_name(path);
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&file, 1, "empty file"))?;
    if header.trim_end() != PROFILE_HEADER {
        return Err(Error::parse(
            &file,
            1,
            format!("expected header {PROFILE_HEADER:?}"),
        ));
    }
    let mut profiles = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                &file,
                lineno,
                format!("expected 7 columns, found {}", fields.len()),
            ));
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::parse(
                &file,
                lineno,
                format!("duplicate annotator id {:?}", fields[0]),
            ));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::parse(&file, lineno, format!("{what} {s:?} is not a number")))?;
            if v < 0.0 {
                return Err(Error::parse(&file, lineno, format!("{what} {v} is negative")));
            }
            Ok(v)
        };
        profiles.push(AnnotatorProfile {
            annotator_id: fields[0].to_string(),
            native_languages: fields[1].split_whitespace().map(String::from).collect(),
            jlpt_level: fields[2].to_string(),
            years_in_japan: num(fields[3], "years_in_japan")?,
            reading_hours_per_week: num(fields[4], "reading_hours_per_week")?,
            age_years: num(fields[5], "age_years")?,
            education_years: num(fields[6], "education_years")?,
        });
    }
    Ok(profiles)
}

/// Serializes instances in the load format.
pub fn instances_to_tsv(instances: &[Instance]) -> String {
    let mut out = String::from(INSTANCE_HEADER);
    out.push('\n');
    for i in instances {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i.id,
            i.target,
            i.tokens.join(" "),
            i.lemmas.join(" "),
            i.origin,
            i.pos,
            i.split
        ));
    }
    out
}

/// Serializes a rating matrix in the load format. Floats use the shortest
/// representation that round-trips, so save -> load -> save is stable.
pub fn ratings_to_tsv(matrix: &RatingMatrix) -> String {
    let mut out = String::from("id");
    for a in matrix.annotator_ids() {
        out.push('\t');
        out.push_str(a);
    }
    out.push('\n');
    for i in 0..matrix.n_instances() {
        out.push_str(&matrix.instance_ids()[i]);
        for a in 0..matrix.n_annotators() {
            out.push('\t');
            if let Some(v) = matrix.get(a, i) {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    out
}

pub fn save_instances(instances: &[Instance], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, instances_to_tsv(instances)).map_err(|e| Error::io(path, e))
}

pub fn save_ratings(matrix: &RatingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ratings_to_tsv(matrix)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[Option<f64>]]) -> RatingMatrix {
        let annotators: Vec<String> = (0..rows.len()).map(|a| format!("a{a}")).collect();
        let instances: Vec<String> = (0..rows[0].len()).map(|i| format!("w{i}")).collect();
        let values: Vec<Option<f64>> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        RatingMatrix::new(annotators, instances, values, false).unwrap()
    }

    #[test]
    fn group_mean_symmetric() {
        let m = matrix(&[
            &[Some(0.25)],
            &[Some(0.5)],
            &[Some(0.75)],
        ]);
        let view = group_mean(&m);
        assert_eq!(view.values, vec![0.5]);
        assert_eq!(view.provenance, Provenance::GroupMean);
    }

    #[test]
    fn group_mean_single_annotator_is_identity() {
        let m = matrix(&[&[Some(0.75), Some(0.25)]]);
        assert_eq!(group_mean(&m).values, vec![0.75, 0.25]);
    }

    #[test]
    fn group_mean_skips_missing() {
        let m = matrix(&[&[Some(0.5)], &[None], &[Some(1.0)]]);
        assert_eq!(group_mean(&m).values, vec![0.75]);
    }

    /// Ten grid ratings averaging to 0.400: four at 0.25 and six at 0.5.
    #[test]
    fn group_mean_ten_ratings() {
        let mut rows: Vec<&[Option<f64>]> = Vec::new();
        let quarter = [Some(0.25)];
        let half = [Some(0.5)];
        for _ in 0..4 {
            rows.push(&quarter);
        }
        for _ in 0..6 {
            rows.push(&half);
        }
        let m = matrix(&rows);
        assert_eq!(group_mean(&m).values, vec![0.4]);
    }

    #[test]
    fn cwi_label_threshold_edge() {
        assert!(cwi_label(0.375, 0.375));
        assert!(!cwi_label(0.374, 0.375));
        assert!(cwi_label(1.0, 0.375));
    }

    #[test]
    fn group_majority_counts() {
        // 7 of 10 complex -> complex; 0 of 10 -> simple; 5 of 10 -> complex (tie rule).
        let col = |k: usize| -> Vec<Option<f64>> {
            (0..10)
                .map(|a| Some(if a < k { 0.5 } else { 0.0 }))
                .collect()
        };
        let cols = [col(7), col(0), col(5)];
        let values: Vec<Option<f64>> = (0..10)
            .flat_map(|a| cols.iter().map(move |c| c[a]))
            .collect();
        let m = RatingMatrix::new(
            (0..10).map(|a| format!("a{a}")).collect(),
            vec!["w0".into(), "w1".into(), "w2".into()],
            values,
            false,
        )
        .unwrap();
        let view = group_majority(&m, 0.375);
        assert_eq!(view.labels, vec![true, false, true]);
    }

    #[test]
    fn union_concatenates_rows() {
        let a = matrix(&[&[Some(0.5), Some(0.25)], &[Some(0.0), Some(1.0)]]);
        let merged = union(&[("x", &a), ("y", &a)]).unwrap();
        assert_eq!(merged.n_annotators(), 4);
        assert_eq!(
            merged.annotator_ids(),
            &["x:a0", "x:a1", "y:a0", "y:a1"]
        );
        assert_eq!(merged.annotator_row(0), a.annotator_row(0));
        assert_eq!(merged.annotator_row(2), a.annotator_row(0));
    }

    #[test]
    fn union_requires_matching_instances() {
        let a = matrix(&[&[Some(0.5)]]);
        let b = RatingMatrix::new(
            vec!["b0".into()],
            vec!["other".into()],
            vec![Some(0.5)],
            false,
        )
        .unwrap();
        assert!(union(&[("x", &a), ("y", &b)]).is_err());
    }

    #[test]
    fn union_row_selection_round_trip() {
        let a = matrix(&[&[Some(0.5), None], &[Some(0.0), Some(1.0)]]);
        let b = RatingMatrix::new(
            vec!["z0".into()],
            vec!["w0".into(), "w1".into()],
            vec![Some(0.25), Some(0.75)],
            false,
        )
        .unwrap();
        let merged = union(&[("x", &a), ("y", &b)]).unwrap();
        let back = merged.select_annotators(&["a0", "a1"]).unwrap();
        assert_eq!(back.annotator_row(0), a.annotator_row(0));
        assert_eq!(back.annotator_row(1), a.annotator_row(1));
    }

    #[test]
    fn matrix_rejects_out_of_range() {
        let r = RatingMatrix::new(
            vec!["a".into()],
            vec!["w".into()],
            vec![Some(1.25)],
            false,
        );
        assert!(r.is_err());
    }

    #[test]
    fn strict_grid_rejects_off_grid() {
        let r = RatingMatrix::new(vec!["a".into()], vec!["w".into()], vec![Some(0.3)], true);
        assert!(r.is_err());
        let r = RatingMatrix::new(vec!["a".into()], vec!["w".into()], vec![Some(0.75)], true);
        assert!(r.is_ok());
    }

    #[test]
    fn describe_singleton() {
        let inst = Instance::new(
            "w0",
            "x",
            vec!["x".into()],
            vec!["x".into()],
            Origin::Japanese,
            "noun",
            Split::Trial,
        )
        .unwrap();
        let table = describe(&[inst]).unwrap();
        let jp = table
            .rows
            .iter()
            .find(|r| r.kind == "origin" && r.category == "japanese")
            .unwrap();
        assert_eq!(jp.percent, 100.0);
        let noun = table
            .rows
            .iter()
            .find(|r| r.kind == "pos" && r.category == "noun")
            .unwrap();
        assert_eq!(noun.percent, 100.0);
    }
}

//! Foundational data model: points, labels, samples, concept classes, and
//! perturbation models.
//!
//! # Conventions
//!
//! Labels are stored as signs in {+1, −1} and serialized as {1, 0}. The sign of
//! zero is +1 everywhere: a point exactly on a decision boundary is labeled
//! positive. Linear hypotheses are kept at unit norm from construction on.
//!
//! All types are immutable values once built and can be shared freely across
//! threads.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Tolerance on `‖w‖₂ − 1` accepted for stored unit vectors.
pub const UNIT_TOLERANCE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

/// Euclidean inner product. Panics in debug builds on length mismatch.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The sign convention used for every prediction: zero maps to +1.
pub fn sign_label(value: f64) -> Label {
    if value >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

/// A point of the instance space with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate vectors.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("a point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(invalid(format!("coordinate {i} is not finite")));
        }
        Ok(Point(coords))
    }

    /// Builds a point from coordinates already known to be finite.
    ///
    /// Intended for internal arithmetic on validated points.
    pub(crate) fn from_finite(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinate slice.
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &Point) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(distance(&self.0, &other.0))
    }

    /// Bitwise equality of coordinates, used as the key for finite maps.
    pub fn bit_eq(&self, other: &Point) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

// ---------------------------------------------------------------------------
// Label
// ---------------------------------------------------------------------------

/// Binary label. Internally a sign; externally 1 (positive) or 0 (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// +1.0 or −1.0.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// External encoding: 1 for positive, 0 for negative.
    pub fn to_bit(self) -> u8 {
        match self {
            Label::Positive => 1,
            Label::Negative => 0,
        }
    }

    /// Decodes the external encoding.
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            1 => Ok(Label::Positive),
            0 => Ok(Label::Negative),
            other => Err(invalid(format!("label must be 0 or 1, got {other}"))),
        }
    }

    /// The other label.
    pub fn flip(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bit())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.to_bit())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bit = u8::deserialize(d)?;
        Label::from_bit(bit).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Samples and datasets
// ---------------------------------------------------------------------------

/// A labeled example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub point: Point,
    pub label: Label,
}

/// An ordered labeled sample whose points share one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr")]
pub struct Dataset {
    dimension: usize,
    samples: Vec<LabeledSample>,
}

#[derive(Deserialize)]
struct DatasetRepr {
    dimension: usize,
    samples: Vec<LabeledSample>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;
    fn try_from(r: DatasetRepr) -> Result<Self> {
        Dataset::new(r.dimension, r.samples)
    }
}

impl Dataset {
    /// An empty dataset of the given positive dimension.
    pub fn empty(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dataset dimension must be positive"));
        }
        Ok(Dataset { dimension, samples: Vec::new() })
    }

    /// Builds a dataset, checking that every point has `dimension` coordinates.
    pub fn new(dimension: usize, samples: Vec<LabeledSample>) -> Result<Self> {
        let mut ds = Dataset::empty(dimension)?;
        for s in samples {
            ds.push(s)?;
        }
        Ok(ds)
    }

    /// Labels `points` with `h` and collects them into a dataset.
    pub fn labeled_by(h: &Hypothesis, points: Vec<Point>) -> Result<Self> {
        let mut ds = Dataset::empty(h.dim())?;
        for p in points {
            let label = predict(h, &p)?;
            ds.push(LabeledSample { point: p, label })?;
        }
        Ok(ds)
    }

    /// Appends one sample.
    pub fn push(&mut self, sample: LabeledSample) -> Result<()> {
        check_dim(self.dimension, sample.point.dim())?;
        self.samples.push(sample);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The first `n` samples (all of them if `n` exceeds the size).
    pub fn prefix(&self, n: usize) -> Dataset {
        Dataset {
            dimension: self.dimension,
            samples: self.samples[..n.min(self.samples.len())].to_vec(),
        }
    }

    /// The same points with labels replaced by the predictions of `h`.
    pub fn relabeled(&self, h: &Hypothesis) -> Result<Dataset> {
        Dataset::labeled_by(h, self.samples.iter().map(|s| s.point.clone()).collect())
    }
}

// ---------------------------------------------------------------------------
// Boundary-function registry for the offset class
// ---------------------------------------------------------------------------

/// Evaluable boundary functions `f : ℝ^d → ℝ` for offset-boundary hypotheses.
///
/// Each form is globally Lipschitz with a known constant, which the distance
/// computations rely on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseFunction {
    /// `f(u) = c` on `ℝ^d`.
    Constant { d: usize, c: f64 },
    /// `f(u) = ⟨a, u⟩ + b`.
    Affine { a: Vec<f64>, b: f64 },
    /// `f(u) = offset + amplitude · sin(2π · frequency · u₁ + phase)`.
    Sinusoid {
        d: usize,
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
}

impl BaseFunction {
    /// Input dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            BaseFunction::Constant { d, .. } | BaseFunction::Sinusoid { d, .. } => *d,
            BaseFunction::Affine { a, .. } => a.len(),
        }
    }

    /// Checks that all parameters are finite and shapes are coherent.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("base function parameter {name} is not finite")))
            }
        };
        match self {
            BaseFunction::Constant { c, .. } => finite(*c, "c"),
            BaseFunction::Affine { a, b } => {
                finite(*b, "b")?;
                a.iter().try_for_each(|v| finite(*v, "a"))
            }
            BaseFunction::Sinusoid { d, amplitude, frequency, phase, offset } => {
                if *d == 0 {
                    return Err(invalid("sinusoid base needs d ≥ 1"));
                }
                finite(*amplitude, "amplitude")?;
                finite(*frequency, "frequency")?;
                finite(*phase, "phase")?;
                finite(*offset, "offset")
            }
        }
    }

    /// Evaluates `f(u)`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim());
        match self {
            BaseFunction::Constant { c, .. } => *c,
            BaseFunction::Affine { a, b } => dot(a, u) + b,
            BaseFunction::Sinusoid { amplitude, frequency, phase, offset, .. } => {
                offset + amplitude * (std::f64::consts::TAU * frequency * u[0] + phase).sin()
            }
        }
    }

    /// Global Lipschitz constant with respect to the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        match self {
            BaseFunction::Constant { .. } => 0.0,
            BaseFunction::Affine { a, .. } => norm(a),
            BaseFunction::Sinusoid { amplitude, frequency, .. } => {
                std::f64::consts::TAU * (amplitude * frequency).abs()
            }
        }
    }

    /// Whether `f` is affine, in which case its level sets are hyperplanes and
    /// distances to them have a closed form.
    pub fn is_affine(&self) -> bool {
        matches!(self, BaseFunction::Constant { .. } | BaseFunction::Affine { .. })
    }

    /// Residual `x_{d+1} − f(x_1..x_d)` of a point in `ℝ^{d+1}`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        x[d] - self.eval(&x[..d])
    }

    /// Gradient of the residual with respect to `x`, valid for affine bases.
    pub(crate) fn residual_gradient_affine(&self) -> Vec<f64> {
        let d = self.dim();
        let mut g = match self {
            BaseFunction::Affine { a, .. } => a.iter().map(|v| -v).collect(),
            _ => vec![0.0; d],
        };
        g.push(1.0);
        g
    }
}

// ---------------------------------------------------------------------------
// Hypotheses
// ---------------------------------------------------------------------------

/// A vector of Euclidean norm one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`; rejects empty, zero, or non-finite input.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|c| !c.is_finite()) {
            return Err(invalid("normal vector must be nonempty and finite"));
        }
        let n = norm(&v);
        if n == 0.0 || !n.is_finite() {
            return Err(invalid("normal vector must be nonzero"));
        }
        Ok(UnitVector(v.into_iter().map(|c| c / n).collect()))
    }

    /// Accepts `v` unchanged when it is already unit within tolerance, so that
    /// serialized unit vectors round-trip bit for bit.
    fn from_stored(v: Vec<f64>) -> Result<Self> {
        if !v.is_empty() && v.iter().all(|c| c.is_finite()) && (norm(&v) - 1.0).abs() <= UNIT_TOLERANCE {
            Ok(UnitVector(v))
        } else {
            UnitVector::new(v)
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        UnitVector::from_stored(v).map_err(serde::de::Error::custom)
    }
}

/// A concept from one of the three supported classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Hypothesis {
    /// One-dimensional threshold: +1 iff `x ≥ t`.
    Threshold { t: f64 },
    /// Homogeneous halfspace: +1 iff `⟨w, x⟩ ≥ 0`.
    Linear { w: UnitVector },
    /// Offset boundary on `ℝ^{d+1}`: +1 iff `x_{d+1} − f(x_1..x_d) − t ≥ 0`.
    Offset { base: BaseFunction, t: f64 },
}

impl Hypothesis {
    /// Threshold at `t`.
    pub fn threshold(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(invalid("threshold must be finite"));
        }
        Ok(Hypothesis::Threshold { t })
    }

    /// Homogeneous halfspace with normal `w`, renormalized to unit length.
    pub fn linear(w: Vec<f64>) -> Result<Self> {
        Ok(Hypothesis::Linear { w: UnitVector::new(w)? })
    }

    /// Offset boundary `f + t`.
    pub fn offset(base: BaseFunction, t: f64) -> Result<Self> {
        base.validate()?;
        if !t.is_finite() {
            return Err(invalid("offset must be finite"));
        }
        Ok(Hypothesis::Offset { base, t })
    }

    /// Dimension of the instance space the hypothesis acts on.
    pub fn dim(&self) -> usize {
        match self {
            Hypothesis::Threshold { .. } => 1,
            Hypothesis::Linear { w } => w.dim(),
            Hypothesis::Offset { base, .. } => base.dim() + 1,
        }
    }

    /// The concept class this hypothesis belongs to.
    pub fn class(&self) -> ConceptClass {
        match self {
            Hypothesis::Threshold { .. } => ConceptClass::Threshold,
            Hypothesis::Linear { .. } => ConceptClass::Linear,
            Hypothesis::Offset { base, .. } => ConceptClass::Offset { base: base.clone() },
        }
    }

    /// Signed score whose sign is the prediction: `x − t`, `⟨w,x⟩`, or the
    /// offset residual. Callers must have checked the dimension.
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        match self {
            Hypothesis::Threshold { t } => x[0] - t,
            Hypothesis::Linear { w } => dot(w.as_slice(), x),
            Hypothesis::Offset { base, t } => base.residual(x) - t,
        }
    }

    /// Unit normal for linear hypotheses.
    pub fn normal(&self) -> Option<&[f64]> {
        match self {
            Hypothesis::Linear { w } => Some(w.as_slice()),
            _ => None,
        }
    }
}

/// Identifier of a concept class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConceptClass {
    /// One-dimensional thresholds.
    Threshold,
    /// Homogeneous halfspaces in the data's dimension.
    Linear,
    /// Translates `f + t` of a fixed base function.
    Offset { base: BaseFunction },
}

impl ConceptClass {
    /// Short name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            ConceptClass::Threshold => "threshold",
            ConceptClass::Linear => "linear",
            ConceptClass::Offset { .. } => "offset",
        }
    }

    /// Whether `h` belongs to this class.
    pub fn contains(&self, h: &Hypothesis) -> bool {
        match (self, h) {
            (ConceptClass::Threshold, Hypothesis::Threshold { .. }) => true,
            (ConceptClass::Linear, Hypothesis::Linear { .. }) => true,
            (ConceptClass::Offset { base }, Hypothesis::Offset { base: b, .. }) => base == b,
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Prediction and empirical quantities
// ---------------------------------------------------------------------------

/// Label assigned by `h` to `x`. A score of exactly zero maps to +1.
pub fn predict(h: &Hypothesis, x: &Point) -> Result<Label> {
    check_dim(h.dim(), x.dim())?;
    Ok(sign_label(h.score(x.coords())))
}

/// Fraction of `s` misclassified by `h`.
pub fn empirical_error(h: &Hypothesis, s: &Dataset) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut wrong = 0usize;
    for sample in s.samples() {
        if predict(h, &sample.point)? != sample.label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / s.len() as f64)
}

/// Fraction of the points of `s` on which `h1` and `h2` disagree. Labels of
/// `s` are ignored.
pub fn empirical_disagreement(h1: &Hypothesis, h2: &Hypothesis, s: &Dataset) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut differ = 0usize;
    for sample in s.samples() {
        if predict(h1, &sample.point)? != predict(h2, &sample.point)? {
            differ += 1;
        }
    }
    Ok(differ as f64 / s.len() as f64)
}

// ---------------------------------------------------------------------------
// Perturbation models
// ---------------------------------------------------------------------------

/// A finite perturbation map `x ↦ U(x)` with `x ∈ U(x)` for every listed `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Point, Vec<Point>)>", into = "Vec<(Point, Vec<Point>)>")]
pub struct FiniteMap {
    entries: Vec<(Point, Vec<Point>)>,
}

impl FiniteMap {
    /// Builds the map, requiring each source point to appear in its own image.
    pub fn new(entries: Vec<(Point, Vec<Point>)>) -> Result<Self> {
        for (i, (x, image)) in entries.iter().enumerate() {
            if !image.iter().any(|z| z.bit_eq(x)) {
                return Err(invalid(format!("entry {i}: x must belong to U(x)")));
            }
            if let Some(z) = image.iter().find(|z| z.dim() != x.dim()) {
                return Err(Error::DimensionMismatch { expected: x.dim(), found: z.dim() });
            }
        }
        Ok(FiniteMap { entries })
    }

    /// `U(x)`, if `x` is a listed source point.
    pub fn image(&self, x: &Point) -> Option<&[Point]> {
        self.entries
            .iter()
            .find(|(src, _)| src.bit_eq(x))
            .map(|(_, img)| img.as_slice())
    }

    /// `U⁻¹(z)`: every listed `x` whose image contains `z`.
    pub fn inverse(&self, z: &Point) -> Vec<Point> {
        self.entries
            .iter()
            .filter(|(_, img)| img.iter().any(|p| p.bit_eq(z)))
            .map(|(x, _)| x.clone())
            .collect()
    }
}

impl TryFrom<Vec<(Point, Vec<Point>)>> for FiniteMap {
    type Error = Error;
    fn try_from(v: Vec<(Point, Vec<Point>)>) -> Result<Self> {
        FiniteMap::new(v)
    }
}

impl From<FiniteMap> for Vec<(Point, Vec<Point>)> {
    fn from(m: FiniteMap) -> Self {
        m.entries
    }
}

/// The attack model: a closed L2 ball or an explicit finite map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationModel {
    MetricBall { radius: f64 },
    FiniteMap { map: FiniteMap },
}

impl PerturbationModel {
    /// Closed L2 ball of radius `radius ≥ 0`.
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid("ball radius must be finite and nonnegative"));
        }
        Ok(PerturbationModel::MetricBall { radius })
    }
}

// ---------------------------------------------------------------------------
// CSV interchange
// ---------------------------------------------------------------------------

fn parse_header(headers: &csv::StringRecord, with_label: bool) -> Result<usize> {
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let features = if with_label {
        match names.last() {
            Some(&"label") => names.len() - 1,
            _ => {
                return Err(Error::Parse { line: 1, message: "last column must be `label`".into() })
            }
        }
    } else if names.last() == Some(&"label") {
        names.len() - 1
    } else {
        names.len()
    };
    if features == 0 {
        return Err(Error::Parse { line: 1, message: "no feature columns".into() });
    }
    for (j, name) in names[..features].iter().enumerate() {
        if *name != format!("x{}", j + 1) {
            return Err(Error::Parse {
                line: 1,
                message: format!("column {} must be named x{}, found `{name}`", j + 1, j + 1),
            });
        }
    }
    Ok(features)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}

fn parse_coords(record: &csv::StringRecord, features: usize, line: usize) -> Result<Vec<f64>> {
    let mut coords = Vec::with_capacity(features);
    for j in 0..features {
        let field = record.get(j).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            line,
            message: format!("column x{} is not a number: `{field}`", j + 1),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse { line, message: format!("column x{} is not finite", j + 1) });
        }
        coords.push(v);
    }
    Ok(coords)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Reads a labeled dataset with header `x1,...,xd,label` and labels in {0,1}.
///
/// The dimension comes from the header, so a header-only file yields an empty
/// dataset. Errors name the 1-based line of the offending row.
pub fn read_dataset_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = reader(input);
    let features = parse_header(rdr.headers().map_err(csv_error)?, true)?;
    let mut ds = Dataset::empty(features)?;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = i + 2;
        if rec.len() != features + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", features + 1, rec.len()),
            });
        }
        let coords = parse_coords(&rec, features, line)?;
        let raw = rec.get(features).unwrap_or("");
        let label = match raw {
            "0" => Label::Negative,
            "1" => Label::Positive,
            other => {
                return Err(Error::Parse { line, message: format!("label must be 0 or 1, found `{other}`") })
            }
        };
        ds.push(LabeledSample { point: Point::from_finite(coords), label })?;
    }
    Ok(ds)
}

/// Reads unlabeled query points with header `x1,...,xd`. A trailing `label`
/// column, if present, is ignored.
pub fn read_points_csv<R: Read>(input: R) -> Result<(usize, Vec<Point>)> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let features = parse_header(&headers, false)?;
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = i + 2;
        if rec.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        points.push(Point::from_finite(parse_coords(&rec, features, line)?));
    }
    Ok((features, points))
}

/// Writes a dataset in the interchange format. Floats use the shortest
/// representation that round-trips exactly.
pub fn write_dataset_csv<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    let header: Vec<String> = (1..=ds.dimension()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{},label", header.join(","))?;
    for s in ds.samples() {
        let coords: Vec<String> = s.point.coords().iter().map(|c| format!("{c:?}")).collect();
        writeln!(out, "{},{}", coords.join(","), s.label.to_bit())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn predict_examples() {
        let h = Hypothesis::linear(vec![1.0, 0.0]).unwrap();
        assert_eq!(predict(&h, &p(&[0.5, -2.0])).unwrap(), Label::Positive);
        let t = Hypothesis::threshold(0.3).unwrap();
        assert_eq!(predict(&t, &p(&[0.7])).unwrap(), Label::Positive);
        let o = Hypothesis::offset(BaseFunction::Constant { d: 1, c: 0.0 }, 0.2).unwrap();
        assert_eq!(predict(&o, &p(&[0.5, 0.1])).unwrap(), Label::Negative);
    }

    #[test]
    fn zero_score_is_positive() {
        let t = Hypothesis::threshold(0.3).unwrap();
        assert_eq!(predict(&t, &p(&[0.3])).unwrap(), Label::Positive);
        let h = Hypothesis::linear(vec![0.0, 1.0]).unwrap();
        assert_eq!(predict(&h, &p(&[5.0, 0.0])).unwrap(), Label::Positive);
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let h = Hypothesis::linear(vec![1.0, 0.0]).unwrap();
        assert!(matches!(predict(&h, &p(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn linear_rejects_zero_and_normalizes() {
        assert!(Hypothesis::linear(vec![0.0, 0.0]).is_err());
        let h = Hypothesis::linear(vec![3.0, 4.0]).unwrap();
        let w = h.normal().unwrap();
        assert!((norm(w) - 1.0).abs() <= UNIT_TOLERANCE);
        assert_eq!(w, &[0.6, 0.8]);
    }

    #[test]
    fn empirical_error_examples() {
        let h = Hypothesis::threshold(0.5).unwrap();
        let ds = Dataset::new(
            1,
            vec![
                LabeledSample { point: p(&[0.1]), label: Label::Negative },
                LabeledSample { point: p(&[0.4]), label: Label::Positive },
                LabeledSample { point: p(&[0.6]), label: Label::Positive },
                LabeledSample { point: p(&[0.9]), label: Label::Positive },
            ],
        )
        .unwrap();
        assert_eq!(empirical_error(&h, &ds).unwrap(), 0.25);
        let always_pos = Hypothesis::threshold(-10.0).unwrap();
        let negs = Dataset::new(
            1,
            vec![
                LabeledSample { point: p(&[0.1]), label: Label::Negative },
                LabeledSample { point: p(&[0.2]), label: Label::Negative },
            ],
        )
        .unwrap();
        assert_eq!(empirical_error(&always_pos, &negs).unwrap(), 1.0);
        assert!(matches!(
            empirical_error(&h, &Dataset::empty(1).unwrap()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn empirical_disagreement_enumeration() {
        let h1 = Hypothesis::threshold(0.3).unwrap();
        let h2 = Hypothesis::threshold(0.6).unwrap();
        let ds = Dataset::labeled_by(&h1, vec![p(&[0.1]), p(&[0.4]), p(&[0.9])]).unwrap();
        assert!((empirical_disagreement(&h1, &h2, &ds).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(empirical_disagreement(&h1, &h1, &ds).unwrap(), 0.0);
    }

    #[test]
    fn finite_map_requires_reflexivity() {
        let x = p(&[0.0]);
        let z = p(&[1.0]);
        assert!(FiniteMap::new(vec![(x.clone(), vec![z.clone()])]).is_err());
        let m = FiniteMap::new(vec![(x.clone(), vec![x.clone(), z.clone()])]).unwrap();
        assert_eq!(m.image(&x).unwrap().len(), 2);
        assert_eq!(m.inverse(&z), vec![x]);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = "x1,x2,label\n0.5,-1.25,1\n0.1,0.2,0\n3,4,1\n";
        let ds = read_dataset_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dimension(), 2);
        let mut buf = Vec::new();
        write_dataset_csv(&ds, &mut buf).unwrap();
        assert_eq!(read_dataset_csv(buf.as_slice()).unwrap(), ds);

        let bad = "x1,label\n0.5,1\n0.7,2\n";
        match read_dataset_csv(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        let empty = read_dataset_csv("x1,x2,x3,label\n".as_bytes()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.dimension(), 3);
    }
}

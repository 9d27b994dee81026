//! Total Economic Value of a heritage object.
//!
//! TEV is the direct value of the object, plus the additional monetary value
//! of the secondary activity its exhibition generates, plus five non-use
//! components: existence, option, educational (which may carry a scientific
//! sub-amount), prestige and donation. Aesthetic, spiritual, social and
//! symbolic values are folded into other components and cannot be entered
//! as non-use values on their own.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ceiling on the remuneration for handed-over finds, in EUR.
pub const DEFAULT_NORMATIVE_CAP: f64 = 2500.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValuationError {
    #[error("market approach needs at least one comparable price")]
    NoComparables,
    #[error("non-use component {0} appears more than once")]
    DuplicateComponent(NonUseKind),
    #[error(
        "{0} value is not a separate non-use component (it is counted within {within}); \
         legal kinds are {legal}",
        within = .0.absorbed_into(),
        legal = NonUseKind::legal_names()
    )]
    ExcludedComponent(ExcludedValue),
    #[error("unknown non-use component {0:?}; legal kinds are {legal}", legal = NonUseKind::legal_names())]
    UnknownComponent(String),
    #[error("{what} must be >= 0, got {value}")]
    Negative { what: String, value: f64 },
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("invalid currency code {0:?}")]
    InvalidCurrency(String),
    #[error("currency mismatch: run uses {expected}, got {found}")]
    CurrencyMismatch { expected: Currency, found: Currency },
    #[error("unknown {what} {value:?}")]
    UnknownLabel { what: &'static str, value: String },
}

fn non_negative(what: impl Into<String>, value: f64) -> Result<f64, ValuationError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ValuationError::Negative { what: what.into(), value })
    }
}

/// ISO-4217-style three-letter currency code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Currency([u8; 3]);

impl Currency {
    pub const EUR: Currency = Currency(*b"EUR");
    pub const BGN: Currency = Currency(*b"BGN");

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("currency codes are ASCII")
    }

    pub fn ensure_same(&self, other: Currency) -> Result<(), ValuationError> {
        if *self == other {
            Ok(())
        } else {
            Err(ValuationError::CurrencyMismatch { expected: *self, found: other })
        }
    }
}

impl FromStr for Currency {
    type Err = ValuationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.as_bytes() {
            [a, b, c] if t.bytes().all(|b| b.is_ascii_alphabetic()) => {
                Ok(Currency([a.to_ascii_uppercase(), b.to_ascii_uppercase(), c.to_ascii_uppercase()]))
            }
            _ => Err(ValuationError::InvalidCurrency(s.to_string())),
        }
    }
}

impl TryFrom<String> for Currency {
    type Error = ValuationError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Currency> for String {
    fn from(c: Currency) -> String {
        c.as_str().to_string()
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-fatal conditions attached to a computed value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Warning {
    /// No estimate was available; the normative ceiling is reported as an upper bound.
    NormativeCapAsUpperBound,
    /// No valid (non-protest) responses for a component; it is reported as 0.
    NoValidResponses { component: NonUseKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectApproach {
    Normative,
    Market,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceSource {
    Auction,
    Insurance,
    BlackMarket,
    TicketRevenue,
}

/// How several market comparables combine into one direct value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketCombine {
    /// The highest credible market realisation, i.e. replacement cost.
    #[default]
    Max,
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectValueInput {
    pub approach: DirectApproach,
    pub normative_cap: f64,
    /// Appraised value used by the normative approach. Falls back to the
    /// highest comparable when absent.
    pub estimate: Option<f64>,
    pub comparables: Vec<(PriceSource, f64)>,
    pub combine: MarketCombine,
}

impl DirectValueInput {
    pub fn market(comparables: Vec<(PriceSource, f64)>) -> Self {
        DirectValueInput {
            approach: DirectApproach::Market,
            normative_cap: DEFAULT_NORMATIVE_CAP,
            estimate: None,
            comparables,
            combine: MarketCombine::Max,
        }
    }

    pub fn normative(estimate: Option<f64>) -> Self {
        DirectValueInput {
            approach: DirectApproach::Normative,
            normative_cap: DEFAULT_NORMATIVE_CAP,
            estimate,
            comparables: Vec::new(),
            combine: MarketCombine::Max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valued {
    pub amount: f64,
    pub warnings: Vec<Warning>,
}

pub fn direct_value(input: &DirectValueInput) -> Result<Valued, ValuationError> {
    non_negative("normative cap", input.normative_cap)?;
    for (source, amount) in &input.comparables {
        non_negative(format!("{source:?} comparable"), *amount)?;
    }
    let highest =
        input.comparables.iter().map(|(_, a)| *a).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    match input.approach {
        DirectApproach::Normative => {
            let estimate = match input.estimate {
                Some(e) => Some(non_negative("normative estimate", e)?),
                None => highest,
            };
            Ok(match estimate {
                Some(e) => Valued { amount: e.min(input.normative_cap), warnings: Vec::new() },
                None => Valued { amount: input.normative_cap, warnings: vec![Warning::NormativeCapAsUpperBound] },
            })
        }
        DirectApproach::Market => {
            let mut amounts: Vec<f64> = input.comparables.iter().map(|(_, a)| *a).collect();
            if amounts.is_empty() {
                return Err(ValuationError::NoComparables);
            }
            let amount = match input.combine {
                MarketCombine::Max => highest.unwrap_or(0.0),
                MarketCombine::Mean => amounts.iter().sum::<f64>() / amounts.len() as f64,
                MarketCombine::Median => {
                    amounts.sort_by(f64::total_cmp);
                    let n = amounts.len();
                    if n % 2 == 1 {
                        amounts[n / 2]
                    } else {
                        0.5 * (amounts[n / 2 - 1] + amounts[n / 2])
                    }
                }
            };
            Ok(Valued { amount, warnings: Vec::new() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevenueStream {
    Restaurants,
    SouvenirShops,
    Hotels,
    Transport,
    Advertising,
}

impl FromStr for RevenueStream {
    type Err = ValuationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match normalise(s).as_str() {
            "restaurants" => RevenueStream::Restaurants,
            "souvenirshops" | "souvenirs" => RevenueStream::SouvenirShops,
            "hotels" => RevenueStream::Hotels,
            "transport" => RevenueStream::Transport,
            "advertising" => RevenueStream::Advertising,
            _ => return Err(ValuationError::UnknownLabel { what: "revenue stream", value: s.to_string() }),
        })
    }
}

/// Revenue of activity around the exhibited object over one period.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SecondaryActivityLedger {
    pub period_label: String,
    pub streams: BTreeMap<RevenueStream, f64>,
}

impl SecondaryActivityLedger {
    pub fn new(
        period_label: impl Into<String>,
        streams: impl IntoIterator<Item = (RevenueStream, f64)>,
    ) -> Result<Self, ValuationError> {
        let streams: BTreeMap<_, _> = streams.into_iter().collect();
        for (s, a) in &streams {
            non_negative(format!("{s:?} revenue"), *a)?;
        }
        Ok(SecondaryActivityLedger { period_label: period_label.into(), streams })
    }
}

/// Sum over streams of `during - before`, missing streams counting as 0.
/// May be negative.
pub fn additional_monetary_value(before: &SecondaryActivityLedger, during: &SecondaryActivityLedger) -> f64 {
    let mut keys: Vec<RevenueStream> = before.streams.keys().chain(during.streams.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|k| during.streams.get(k).copied().unwrap_or(0.0) - before.streams.get(k).copied().unwrap_or(0.0))
        .fold(0.0, |acc, d| acc + d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonUseKind {
    Existence,
    Option,
    Educational,
    Prestige,
    Donation,
}

impl NonUseKind {
    pub const ALL: [NonUseKind; 5] = [
        NonUseKind::Existence,
        NonUseKind::Option,
        NonUseKind::Educational,
        NonUseKind::Prestige,
        NonUseKind::Donation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NonUseKind::Existence => "existence",
            NonUseKind::Option => "option",
            NonUseKind::Educational => "educational",
            NonUseKind::Prestige => "prestige",
            NonUseKind::Donation => "donation",
        }
    }

    fn legal_names() -> String {
        NonUseKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for NonUseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Values that overlap with other components and are never counted as
/// separate non-use values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcludedValue {
    Aesthetic,
    Spiritual,
    Social,
    Symbolic,
}

impl ExcludedValue {
    pub fn absorbed_into(&self) -> &'static str {
        match self {
            ExcludedValue::Aesthetic => "direct value",
            ExcludedValue::Spiritual => "educational value",
            ExcludedValue::Social => "direct value via secondary activity",
            ExcludedValue::Symbolic => "existence value",
        }
    }
}

impl fmt::Display for ExcludedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn normalise(s: &str) -> String {
    s.trim().chars().filter(|c| !matches!(c, '_' | '-' | ' ')).flat_map(char::to_lowercase).collect()
}

impl FromStr for NonUseKind {
    type Err = ValuationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match normalise(s).as_str() {
            "existence" => NonUseKind::Existence,
            "option" | "optional" => NonUseKind::Option,
            "educational" => NonUseKind::Educational,
            "prestige" => NonUseKind::Prestige,
            "donation" | "bequest" => NonUseKind::Donation,
            "aesthetic" | "aesthetical" => return Err(ValuationError::ExcludedComponent(ExcludedValue::Aesthetic)),
            "spiritual" => return Err(ValuationError::ExcludedComponent(ExcludedValue::Spiritual)),
            "social" => return Err(ValuationError::ExcludedComponent(ExcludedValue::Social)),
            "symbolic" => return Err(ValuationError::ExcludedComponent(ExcludedValue::Symbolic)),
            _ => return Err(ValuationError::UnknownComponent(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonUseComponent {
    kind: NonUseKind,
    amount: f64,
    /// Scientific value, a tagged part of the educational amount. Never
    /// added to TEV separately.
    #[serde(skip_serializing_if = "Option::is_none")]
    scientific_subvalue: Option<f64>,
}

impl NonUseComponent {
    pub fn new(kind: NonUseKind, amount: f64) -> Result<Self, ValuationError> {
        non_negative(format!("{kind} value"), amount)?;
        Ok(NonUseComponent { kind, amount, scientific_subvalue: None })
    }

    pub fn educational_with_scientific(amount: f64, scientific: f64) -> Result<Self, ValuationError> {
        non_negative("educational value", amount)?;
        non_negative("scientific value", scientific)?;
        if scientific > amount {
            return Err(ValuationError::OutOfRange {
                name: "scientific_subvalue",
                value: scientific,
                lo: 0.0,
                hi: amount,
            });
        }
        Ok(NonUseComponent { kind: NonUseKind::Educational, amount, scientific_subvalue: Some(scientific) })
    }

    pub fn kind(&self) -> NonUseKind {
        self.kind
    }

    pub fn amount(&self) -> f64 {
        self.amount
    }

    pub fn scientific_subvalue(&self) -> Option<f64> {
        self.scientific_subvalue
    }
}

/// One contingent-valuation answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub respondent_id: String,
    pub component: NonUseKind,
    pub wtp: f64,
    /// Refusal-motivated answer, excluded from means.
    pub protest_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WtpAggregate {
    pub values: BTreeMap<NonUseKind, f64>,
    /// Responses used per component after protest exclusion and trimming.
    pub used: BTreeMap<NonUseKind, usize>,
    pub warnings: Vec<Warning>,
}

impl WtpAggregate {
    pub fn components(&self) -> Vec<NonUseComponent> {
        self.values.iter().map(|(k, v)| NonUseComponent { kind: *k, amount: *v, scientific_subvalue: None }).collect()
    }
}

/// Number of top values dropped from `n` by the outlier trim. At least one
/// value always survives.
pub fn trim_count(n: usize, trim_fraction: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let k = (n as f64 * trim_fraction).ceil() as usize;
    k.min(n - 1)
}

/// Per component: drop protest answers, drop the top `trim_fraction` of the
/// rest, and scale the mean willingness to pay by `population`.
pub fn aggregate_wtp(
    responses: &[SurveyResponse],
    population: u64,
    trim_fraction: f64,
) -> Result<WtpAggregate, ValuationError> {
    if population == 0 {
        return Err(ValuationError::OutOfRange { name: "population", value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    if !(0.0..=0.25).contains(&trim_fraction) {
        return Err(ValuationError::OutOfRange { name: "trim_fraction", value: trim_fraction, lo: 0.0, hi: 0.25 });
    }
    let mut by_kind: BTreeMap<NonUseKind, Vec<f64>> = BTreeMap::new();
    for r in responses {
        non_negative(format!("wtp of respondent {}", r.respondent_id), r.wtp)?;
        if !r.protest_flag {
            by_kind.entry(r.component).or_default().push(r.wtp);
        }
    }

    let mut out = WtpAggregate { values: BTreeMap::new(), used: BTreeMap::new(), warnings: Vec::new() };
    for kind in NonUseKind::ALL {
        let mut wtps = by_kind.remove(&kind).unwrap_or_default();
        if wtps.is_empty() {
            out.values.insert(kind, 0.0);
            out.used.insert(kind, 0);
            out.warnings.push(Warning::NoValidResponses { component: kind });
            continue;
        }
        wtps.sort_by(f64::total_cmp);
        let keep = wtps.len() - trim_count(wtps.len(), trim_fraction);
        let kept = &wtps[..keep];
        let mean = kept.iter().sum::<f64>() / keep as f64;
        out.values.insert(kind, mean * population as f64);
        out.used.insert(kind, keep);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TevBreakdown {
    pub direct: f64,
    pub additional: f64,
    pub indirect_components: Vec<NonUseComponent>,
    pub indirect: f64,
    pub tev: f64,
}

/// `direct + additional + sum of the non-use components`, with at most one
/// component per kind.
pub fn tev_total(direct: f64, additional: f64, components: &[NonUseComponent]) -> Result<TevBreakdown, ValuationError> {
    let mut seen = [false; 5];
    for c in components {
        let slot = &mut seen[c.kind as usize];
        if *slot {
            return Err(ValuationError::DuplicateComponent(c.kind));
        }
        *slot = true;
    }
    let indirect = components.iter().fold(0.0, |acc, c| acc + c.amount);
    Ok(TevBreakdown {
        direct,
        additional,
        indirect_components: components.to_vec(),
        indirect,
        tev: direct + additional + indirect,
    })
}

/// Annual revenue of cultural tourism: `gdp * tourism_share * cultural_share`.
pub fn tourism_baseline(gdp: f64, tourism_share: f64, cultural_share_of_tourism: f64) -> Result<f64, ValuationError> {
    for (name, v) in [("tourism_share", tourism_share), ("cultural_share_of_tourism", cultural_share_of_tourism)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ValuationError::OutOfRange { name, value: v, lo: 0.0, hi: 1.0 });
        }
    }
    non_negative("gdp", gdp)?;
    Ok(gdp * tourism_share * cultural_share_of_tourism)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn resp(id: usize, kind: NonUseKind, wtp: f64, protest: bool) -> SurveyResponse {
        SurveyResponse { respondent_id: format!("r{id}"), component: kind, wtp, protest_flag: protest }
    }

    #[test]
    fn normative_value_is_capped() {
        let v = direct_value(&DirectValueInput::normative(Some(10_000.0))).unwrap();
        assert_eq!(v.amount, 2500.0);
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn normative_without_estimate_warns() {
        let v = direct_value(&DirectValueInput::normative(None)).unwrap();
        assert_eq!(v.amount, 2500.0);
        assert_eq!(v.warnings, vec![Warning::NormativeCapAsUpperBound]);
    }

    #[test]
    fn market_value_examples() {
        let single = DirectValueInput::market(vec![(PriceSource::Auction, 1e6)]);
        assert_eq!(direct_value(&single).unwrap().amount, 1e6);

        let mut several = DirectValueInput::market(vec![
            (PriceSource::Auction, 5e6),
            (PriceSource::Insurance, 8e6),
            (PriceSource::TicketRevenue, 1e5),
        ]);
        assert_eq!(direct_value(&several).unwrap().amount, 8e6);
        several.combine = MarketCombine::Median;
        assert_eq!(direct_value(&several).unwrap().amount, 5e6);
        several.combine = MarketCombine::Mean;
        assert!((direct_value(&several).unwrap().amount - 13.1e6 / 3.0).abs() < 1e-6);

        assert_eq!(direct_value(&DirectValueInput::market(vec![])).unwrap_err(), ValuationError::NoComparables);
    }

    #[test]
    fn additional_value_examples() {
        let before = SecondaryActivityLedger::new(
            "before",
            [(RevenueStream::Restaurants, 100.0), (RevenueStream::Hotels, 200.0)],
        )
        .unwrap();
        let during = SecondaryActivityLedger::new(
            "during",
            [(RevenueStream::Restaurants, 180.0), (RevenueStream::Hotels, 260.0)],
        )
        .unwrap();
        assert_eq!(additional_monetary_value(&before, &before), 0.0);
        assert_eq!(additional_monetary_value(&before, &during), 140.0);

        let with_ads = SecondaryActivityLedger::new("before", [(RevenueStream::Advertising, 50.0)]).unwrap();
        let empty = SecondaryActivityLedger::default();
        assert_eq!(additional_monetary_value(&with_ads, &empty), -50.0);
        assert!(SecondaryActivityLedger::new("x", [(RevenueStream::Hotels, -1.0)]).is_err());
    }

    #[test]
    fn wtp_all_protest() {
        let rs = vec![resp(1, NonUseKind::Existence, 10.0, true), resp(2, NonUseKind::Option, 0.0, true)];
        let agg = aggregate_wtp(&rs, 1000, 0.0).unwrap();
        assert!(agg.values.values().all(|v| *v == 0.0));
        assert_eq!(agg.warnings.len(), 5);
    }

    #[test]
    fn wtp_examples() {
        let rs = vec![resp(1, NonUseKind::Existence, 10.0, false), resp(2, NonUseKind::Existence, 20.0, false)];
        let agg = aggregate_wtp(&rs, 1000, 0.0).unwrap();
        assert_eq!(agg.values[&NonUseKind::Existence], 15_000.0);

        let rs = vec![
            resp(1, NonUseKind::Existence, 10.0, false),
            resp(2, NonUseKind::Existence, 20.0, false),
            resp(3, NonUseKind::Existence, 10_000.0, false),
        ];
        let agg = aggregate_wtp(&rs, 1000, 0.25).unwrap();
        assert_eq!(agg.values[&NonUseKind::Existence], 15_000.0);
        assert_eq!(agg.used[&NonUseKind::Existence], 2);
    }

    #[test]
    fn wtp_rejects_bad_inputs() {
        assert!(aggregate_wtp(&[], 0, 0.0).is_err());
        assert!(aggregate_wtp(&[], 10, 0.3).is_err());
        assert!(aggregate_wtp(&[resp(1, NonUseKind::Prestige, -1.0, false)], 10, 0.0).is_err());
    }

    #[test]
    fn tev_examples() {
        assert_eq!(tev_total(0.0, 0.0, &[]).unwrap().tev, 0.0);
        let comps = [
            NonUseComponent::new(NonUseKind::Existence, 15_000.0).unwrap(),
            NonUseComponent::new(NonUseKind::Donation, 5_000.0).unwrap(),
        ];
        assert_eq!(tev_total(2500.0, 140.0, &comps).unwrap().tev, 22_640.0);
        let dup = [comps[0], comps[0]];
        assert_eq!(tev_total(0.0, 0.0, &dup).unwrap_err(), ValuationError::DuplicateComponent(NonUseKind::Existence));
    }

    #[test]
    fn scientific_value_is_part_of_educational() {
        let edu = NonUseComponent::educational_with_scientific(1000.0, 400.0).unwrap();
        let b = tev_total(0.0, 0.0, &[edu]).unwrap();
        assert_eq!(b.tev, 1000.0);
        assert!(NonUseComponent::educational_with_scientific(100.0, 400.0).is_err());
    }

    #[test]
    fn excluded_values_cannot_be_non_use_components() {
        for (label, excluded) in [
            ("Aesthetic", ExcludedValue::Aesthetic),
            ("spiritual", ExcludedValue::Spiritual),
            ("SOCIAL", ExcludedValue::Social),
            ("symbolic", ExcludedValue::Symbolic),
        ] {
            assert_eq!(label.parse::<NonUseKind>().unwrap_err(), ValuationError::ExcludedComponent(excluded));
        }
        let msg = "Aesthetic".parse::<NonUseKind>().unwrap_err().to_string();
        assert!(msg.contains("existence, option, educational, prestige, donation"), "{msg}");
        assert!(serde_json::from_str::<NonUseKind>("\"aesthetic\"").is_err());
        assert!(matches!("heritage".parse::<NonUseKind>(), Err(ValuationError::UnknownComponent(_))));
    }

    #[test]
    fn tourism_examples() {
        let v = tourism_baseline(82e9, 0.136, 0.12).unwrap();
        assert!((v - 1.33824e9).abs() < 1.0);
        assert_eq!(tourism_baseline(5e9, 0.0, 0.3).unwrap(), 0.0);
        assert_eq!(tourism_baseline(5e9, 1.0, 1.0).unwrap(), 5e9);
        assert!(tourism_baseline(5e9, 1.2, 0.1).is_err());
    }

    #[test]
    fn currency_codes() {
        assert_eq!("eur".parse::<Currency>().unwrap(), Currency::EUR);
        assert!("EURO".parse::<Currency>().is_err());
        assert!(Currency::EUR.ensure_same(Currency::BGN).is_err());
    }

    proptest! {
        #[test]
        fn additional_value_is_antisymmetric(
            a in proptest::collection::vec(0f64..1e6, 5), b in proptest::collection::vec(0f64..1e6, 5),
            mask in 0u8..32,
        ) {
            let streams = [
                RevenueStream::Restaurants, RevenueStream::SouvenirShops, RevenueStream::Hotels,
                RevenueStream::Transport, RevenueStream::Advertising,
            ];
            let la = SecondaryActivityLedger::new("a", streams.iter().copied().zip(a.iter().copied())
                .enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x)).unwrap();
            let lb = SecondaryActivityLedger::new("b", streams.iter().copied().zip(b.iter().copied())).unwrap();
            prop_assert_eq!(additional_monetary_value(&la, &lb), -additional_monetary_value(&lb, &la));
        }

        #[test]
        fn normative_never_exceeds_cap(est in proptest::option::of(0f64..1e9), cap in 0f64..1e5) {
            let mut input = DirectValueInput::normative(est);
            input.normative_cap = cap;
            prop_assert!(direct_value(&input).unwrap().amount <= cap);
        }
    }
}

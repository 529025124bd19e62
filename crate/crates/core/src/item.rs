//! Items and itemsets.
//!
//! An item is either a `<feature, operator, value>` predicate over a tabular
//! record or a single text token. Every item has one canonical rendering and
//! two items are the same item exactly when their renderings agree, so
//! ordering, equality and hashing all go through the rendered string.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::str::FromStr;

use crate::{Error, Result};

/// Comparison used by a tabular item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Eq,
    Le,
    Lt,
    Ge,
    InRange,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Eq => "=",
            Operator::Le => "<=",
            Operator::Lt => "<",
            Operator::Ge => ">=",
            Operator::InRange => "in",
        }
    }
}

/// One range of a discretized numeric feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericBin {
    /// `v <= hi`
    AtMost(f64),
    /// `v < hi`
    Below(f64),
    /// `v >= lo`
    AtLeast(f64),
    /// `lo <= v <= hi`
    Closed(f64, f64),
    /// `lo <= v < hi`
    HalfOpen(f64, f64),
}

impl NumericBin {
    pub fn operator(&self) -> Operator {
        match self {
            NumericBin::AtMost(_) => Operator::Le,
            NumericBin::Below(_) => Operator::Lt,
            NumericBin::AtLeast(_) => Operator::Ge,
            NumericBin::Closed(..) | NumericBin::HalfOpen(..) => Operator::InRange,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        match *self {
            NumericBin::AtMost(hi) => v <= hi,
            NumericBin::Below(hi) => v < hi,
            NumericBin::AtLeast(lo) => v >= lo,
            NumericBin::Closed(lo, hi) => lo <= v && v <= hi,
            NumericBin::HalfOpen(lo, hi) => lo <= v && v < hi,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            NumericBin::AtMost(x) | NumericBin::Below(x) | NumericBin::AtLeast(x) => x.is_finite(),
            NumericBin::Closed(lo, hi) => lo.is_finite() && hi.is_finite() && lo <= hi,
            NumericBin::HalfOpen(lo, hi) => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidItem(format!("bad numeric range {self:?}")))
        }
    }

    fn render_value(&self) -> String {
        match *self {
            NumericBin::AtMost(x) | NumericBin::Below(x) | NumericBin::AtLeast(x) => fmt_num(x),
            NumericBin::Closed(lo, hi) => format!("[{}, {}]", fmt_num(lo), fmt_num(hi)),
            NumericBin::HalfOpen(lo, hi) => format!("[{}, {})", fmt_num(lo), fmt_num(hi)),
        }
    }
}

/// Shortest round-trip decimal, with `-0` folded into `0`.
pub(crate) fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Structured content of an [`Item`].
#[derive(Debug, Clone, PartialEq)]
pub enum ItemKey {
    Token(String),
    Categorical { feature: String, value: String },
    Numeric { feature: String, bin: NumericBin },
}

#[derive(Debug, Clone)]
pub struct Item {
    key: ItemKey,
    rendered: String,
}

impl Item {
    pub fn token(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidItem(format!("token {token:?} is empty or contains whitespace")));
        }
        let rendered = format!("<{token}>");
        Ok(Item { key: ItemKey::Token(token), rendered })
    }

    pub fn categorical(feature: impl Into<String>, value: impl Into<String>) -> Result<Self> {
        let feature = feature.into();
        let value = value.into();
        check_feature_name(&feature)?;
        if value.is_empty() {
            return Err(Error::InvalidItem(format!("empty value for `{feature}`")));
        }
        let rendered = format!("<{feature}, =, {value}>");
        Ok(Item { key: ItemKey::Categorical { feature, value }, rendered })
    }

    pub fn numeric(feature: impl Into<String>, bin: NumericBin) -> Result<Self> {
        let feature = feature.into();
        check_feature_name(&feature)?;
        bin.validate()?;
        let rendered = format!("<{feature}, {}, {}>", bin.operator().symbol(), bin.render_value());
        Ok(Item { key: ItemKey::Numeric { feature, bin }, rendered })
    }

    pub fn key(&self) -> &ItemKey {
        &self.key
    }

    pub fn as_str(&self) -> &str {
        &self.rendered
    }

    /// Feature name of a tabular item, `None` for tokens.
    pub fn feature(&self) -> Option<&str> {
        match &self.key {
            ItemKey::Token(_) => None,
            ItemKey::Categorical { feature, .. } | ItemKey::Numeric { feature, .. } => Some(feature),
        }
    }

    pub fn operator(&self) -> Option<Operator> {
        match &self.key {
            ItemKey::Token(_) => None,
            ItemKey::Categorical { .. } => Some(Operator::Eq),
            ItemKey::Numeric { bin, .. } => Some(bin.operator()),
        }
    }

    pub fn is_token(&self) -> bool {
        matches!(self.key, ItemKey::Token(_))
    }
}

pub(crate) fn check_feature_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(", ") || name.starts_with('<') {
        return Err(Error::InvalidItem(format!(
            "feature name {name:?} must be non-empty, not start with '<' and not contain \", \""
        )));
    }
    Ok(())
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.rendered == other.rendered
    }
}

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rendered.cmp(&other.rendered)
    }
}

impl Hash for Item {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rendered.hash(state);
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered)
    }
}

impl FromStr for Item {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseItem(s.to_string());
        let inner = s.strip_prefix('<').and_then(|r| r.strip_suffix('>')).ok_or_else(bad)?;
        let mut parts = inner.splitn(3, ", ");
        let first = parts.next().ok_or_else(bad)?;
        let (op, value) = match (parts.next(), parts.next()) {
            (None, _) => return Item::token(first).map_err(|_| bad()),
            (Some(op), Some(value)) => (op, value),
            (Some(_), None) => return Err(bad()),
        };
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let bin = match op {
            "=" => return Item::categorical(first, value).map_err(|_| bad()),
            "<=" => NumericBin::AtMost(num(value)?),
            "<" => NumericBin::Below(num(value)?),
            ">=" => NumericBin::AtLeast(num(value)?),
            "in" => {
                let body = value.strip_prefix('[').ok_or_else(bad)?;
                let (body, closed) = match (body.strip_suffix(']'), body.strip_suffix(')')) {
                    (Some(b), _) => (b, true),
                    (None, Some(b)) => (b, false),
                    (None, None) => return Err(bad()),
                };
                let (lo, hi) = body.split_once(", ").ok_or_else(bad)?;
                let (lo, hi) = (num(lo)?, num(hi)?);
                if closed {
                    NumericBin::Closed(lo, hi)
                } else {
                    NumericBin::HalfOpen(lo, hi)
                }
            }
            _ => return Err(bad()),
        };
        let item = Item::numeric(first, bin).map_err(|_| bad())?;
        if item.rendered != s {
            // e.g. `<x, <=, 030>`: parseable but not canonical
            return Err(bad());
        }
        Ok(item)
    }
}

/// A non-empty set of distinct items in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Vec<Item>);

impl Itemset {
    /// Sorts and deduplicates `items`; fails on an empty input.
    pub fn new(items: impl IntoIterator<Item = Item>) -> Result<Self> {
        let mut items: Vec<Item> = items.into_iter().collect();
        items.sort();
        items.dedup();
        if items.is_empty() {
            return Err(Error::InvalidItem("an itemset needs at least one item".to_string()));
        }
        Ok(Itemset(items))
    }

    pub fn single(item: Item) -> Self {
        Itemset(alloc::vec![item])
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `true` when every item of `self` is in `sorted`, which must be in
    /// canonical order without duplicates.
    pub fn is_subset_of(&self, sorted: &[Item]) -> bool {
        let mut rest = sorted;
        for item in &self.0 {
            match rest.binary_search(item) {
                Ok(pos) => rest = &rest[pos + 1..],
                Err(_) => return false,
            }
        }
        true
    }

    pub fn shares_item_with(&self, other: &Itemset) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return true,
            }
        }
        false
    }

    /// Ordering used by stores: by size, then lexicographically.
    pub fn canonical_cmp(&self, other: &Itemset) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.cmp(other))
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(item.as_str())?;
        }
        Ok(())
    }
}

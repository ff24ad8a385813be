//! JSON documents and their conversion to library values.

use std::fmt;

use num_bigint::BigInt;
use serde::de::{self, DeserializeOwned, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tf_core::manifolds::{ManifoldDescriptor, SphereBundle};
use tf_core::{FinAbGroup, GroupHom, IntMatrix, LinkingForm, QuadraticFunction, QuadraticLinkingFunction, RationalModZ};

/// A malformed document: where it went wrong and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocError {
    pub source: String,
    pub location: String,
    pub message: String,
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}: {}", self.source, self.message)
        } else {
            write!(f, "{}: {}: {}", self.source, self.location, self.message)
        }
    }
}

impl std::error::Error for DocError {}

fn field_err(field: &str, message: impl fmt::Display) -> DocError {
    DocError {
        source: String::new(),
        location: format!("field `{field}`"),
        message: message.to_string(),
    }
}

/// Integer that serializes as a JSON number when it fits in i64 and as a decimal string otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int(pub BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(&self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Int;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a decimal integer string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Int, E> {
                Ok(Int(v.into()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Int, E> {
                Ok(Int(v.into()))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Int, E> {
                Err(E::custom(format!("{v} is not an integer (write large integers as strings)")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Int, E> {
                v.trim().parse().map(Int).map_err(|_| E::custom(format!("{v:?} is not an integer")))
            }
        }
        d.deserialize_any(V)
    }
}

/// Element of Q/Z written as `"p/q"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rat(pub RationalModZ);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(Rat).map_err(|_| de::Error::custom(format!("{s:?} is not a rational \"p/q\"")))
    }
}

/// Conversion between a document and the library value it describes.
pub trait Document: Serialize + DeserializeOwned {
    type Value;
    fn to_value(&self) -> Result<Self::Value, DocError>;
    fn from_value(v: &Self::Value) -> Self;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticFunctionDoc {
    pub gram: Vec<Vec<Int>>,
    pub alpha: Vec<Int>,
}

impl Document for QuadraticFunctionDoc {
    type Value = QuadraticFunction;

    fn to_value(&self) -> Result<QuadraticFunction, DocError> {
        let n = self.gram.len();
        for (i, row) in self.gram.iter().enumerate() {
            if row.len() != n {
                return Err(field_err("gram", format!("row {i} has {} entries, expected {n}", row.len())));
            }
        }
        if self.alpha.len() != n {
            return Err(field_err("alpha", format!("has {} entries, expected {n}", self.alpha.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if self.gram[i][j] != self.gram[j][i] {
                    return Err(field_err("gram", format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let data = self.gram.iter().flatten().map(|x| x.0.clone()).collect();
        let gram = IntMatrix::from_vec(n, n, data).map_err(|e| field_err("gram", e))?;
        QuadraticFunction::new(gram, self.alpha.iter().map(|x| x.0.clone()).collect())
            .map_err(|e| field_err("gram", e))
    }

    fn from_value(k: &QuadraticFunction) -> Self {
        QuadraticFunctionDoc {
            gram: k.gram().to_rows().into_iter().map(|r| r.into_iter().map(Int).collect()).collect(),
            alpha: k.linear().iter().cloned().map(Int).collect(),
        }
    }
}

fn rat_matrix(b: &[Vec<Rat>], n: usize) -> Result<Vec<Vec<RationalModZ>>, DocError> {
    if b.len() != n {
        return Err(field_err("b", format!("has {} rows, expected {n} (one per order)", b.len())));
    }
    for (i, row) in b.iter().enumerate() {
        if row.len() != n {
            return Err(field_err("b", format!("row {i} has {} entries, expected {n}", row.len())));
        }
    }
    Ok(b.iter().map(|r| r.iter().map(|x| x.0).collect()).collect())
}

fn check_orders(orders: &[u64]) -> Result<(), DocError> {
    match orders.iter().position(|&o| o == 0) {
        Some(i) => Err(field_err("orders", format!("entry {i} is 0; orders must be positive"))),
        None => Ok(()),
    }
}

fn gram_doc(b: &LinkingForm) -> Vec<Vec<Rat>> {
    b.gram().iter().map(|r| r.iter().copied().map(Rat).collect()).collect()
}

/// Linking form on `⊕ Z/orders[i]`; any positive orders are accepted and rewritten on
/// primary generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingFormDoc {
    pub orders: Vec<u64>,
    pub b: Vec<Vec<Rat>>,
}

impl Document for LinkingFormDoc {
    type Value = LinkingForm;

    fn to_value(&self) -> Result<LinkingForm, DocError> {
        check_orders(&self.orders)?;
        let b = rat_matrix(&self.b, self.orders.len())?;
        LinkingForm::from_presentation(&self.orders, &b).map_err(|e| field_err("b", e))
    }

    fn from_value(b: &LinkingForm) -> Self {
        LinkingFormDoc {
            orders: b.group().orders().to_vec(),
            b: gram_doc(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticLinkingDoc {
    pub orders: Vec<u64>,
    pub b: Vec<Vec<Rat>>,
    pub q: Vec<Rat>,
}

impl Document for QuadraticLinkingDoc {
    type Value = QuadraticLinkingFunction;

    fn to_value(&self) -> Result<QuadraticLinkingFunction, DocError> {
        check_orders(&self.orders)?;
        let b = rat_matrix(&self.b, self.orders.len())?;
        if self.q.len() != self.orders.len() {
            return Err(field_err("q", format!("has {} entries, expected {}", self.q.len(), self.orders.len())));
        }
        let q: Vec<_> = self.q.iter().map(|x| x.0).collect();
        LinkingForm::from_presentation(&self.orders, &b).map_err(|e| field_err("b", e))?;
        QuadraticLinkingFunction::from_presentation(&self.orders, &b, &q).map_err(|e| field_err("q", e))
    }

    fn from_value(q: &QuadraticLinkingFunction) -> Self {
        QuadraticLinkingDoc {
            orders: q.group().orders().to_vec(),
            b: gram_doc(q.base()),
            q: q.gen_values().iter().copied().map(Rat).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDoc {
    pub dim: u32,
    pub presentation: QuadraticFunctionDoc,
    #[serde(default)]
    pub sigma_p_exotic: bool,
}

impl Document for ManifoldDoc {
    type Value = ManifoldDescriptor;

    fn to_value(&self) -> Result<ManifoldDescriptor, DocError> {
        let k = self.presentation.to_value().map_err(|mut e| {
            e.location = format!("field `presentation`, {}", e.location);
            e
        })?;
        ManifoldDescriptor::new(self.dim, k, self.sigma_p_exotic).map_err(|e| match e {
            tf_core::Error::Flavor(_) => field_err("presentation", e),
            _ => field_err("dim", e),
        })
    }

    fn from_value(p: &ManifoldDescriptor) -> Self {
        ManifoldDoc {
            dim: p.dim,
            presentation: QuadraticFunctionDoc::from_value(&p.presentation),
            sigma_p_exotic: p.sigma_p_exotic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub m: i64,
    pub n: i64,
}

impl Document for BundleDoc {
    type Value = SphereBundle;

    fn to_value(&self) -> Result<SphereBundle, DocError> {
        Ok(SphereBundle { m: self.m, n: self.n })
    }

    fn from_value(b: &SphereBundle) -> Self {
        BundleDoc { m: b.m, n: b.n }
    }
}

/// A homomorphism given by the images of the source generators, in target coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomDoc {
    pub images: Vec<Vec<i64>>,
}

impl HomDoc {
    pub fn to_hom(&self, source: &FinAbGroup, target: &FinAbGroup) -> Result<GroupHom, DocError> {
        if self.images.len() != source.ngens() {
            return Err(field_err(
                "images",
                format!("has {} entries, the source has {} generators", self.images.len(), source.ngens()),
            ));
        }
        GroupHom::from_images(source.clone(), target.clone(), &self.images).map_err(|e| field_err("images", e))
    }

    pub fn from_hom(h: &GroupHom) -> Self {
        HomDoc { images: h.images() }
    }
}

/// Basis vectors of a sublattice; the matrix with these columns is the inclusion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    pub basis: Vec<Vec<Int>>,
}

impl BasisDoc {
    pub fn to_matrix(&self, ambient: usize) -> Result<IntMatrix, DocError> {
        for (i, v) in self.basis.iter().enumerate() {
            if v.len() != ambient {
                return Err(field_err("basis", format!("vector {i} has {} entries, expected {ambient}", v.len())));
            }
        }
        let cols = self.basis.len();
        let mut data = Vec::with_capacity(ambient * cols);
        for r in 0..ambient {
            for v in &self.basis {
                data.push(v[r].0.clone());
            }
        }
        IntMatrix::from_vec(ambient, cols, data).map_err(|e| field_err("basis", e))
    }

    pub fn from_matrix(m: &IntMatrix) -> Self {
        BasisDoc {
            basis: (0..m.cols()).map(|j| m.col(j).into_iter().map(Int).collect()).collect(),
        }
    }
}

/// Parses a document, reporting the failing field path and the line and column.
pub fn parse<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, DocError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: Result<T, _> = serde_path_to_error::deserialize(&mut de);
    let value = parsed.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let mut location = format!("line {}, column {}", inner.line(), inner.column());
        if path != "." && path != "?" {
            location = format!("field `{path}`, {location}");
        }
        DocError {
            source: source.to_string(),
            location,
            message: inner.to_string().split(" at line").next().unwrap_or_default().to_string(),
        }
    })?;
    de.end().map_err(|e| DocError {
        source: source.to_string(),
        location: format!("line {}, column {}", e.line(), e.column()),
        message: "trailing characters after the document".into(),
    })?;
    Ok(value)
}

/// Parses and converts a document into its library value.
pub fn load<D: Document>(text: &str, source: &str) -> Result<D::Value, DocError> {
    parse::<D>(text, source)?.to_value().map_err(|mut e| {
        e.source = source.to_string();
        e
    })
}

pub fn emit<D: Document>(v: &D::Value) -> String {
    serde_json::to_string_pretty(&D::from_value(v)).expect("documents serialize")
}

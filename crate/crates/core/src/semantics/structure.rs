use std::sync::Arc;

use indexmap::IndexMap;
use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::rational::{self, format_ratio, Rational};
use crate::syntax::Signature;

/// A total table over a product of finite carriers, indexed in mixed radix
/// with the last argument varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table<T> {
    pub dims: Vec<usize>,
    pub data: Vec<T>,
}

impl<T> Table<T> {
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Table<T> {
        let data = tuples(&dims).map(|t| f(&t)).collect();
        Table { dims, data }
    }

    pub fn index(&self, args: &[usize]) -> usize {
        encode(&self.dims, args)
    }

    pub fn get(&self, args: &[usize]) -> &T {
        &self.data[self.index(args)]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// All tuples over `dims` in lexicographic order; exactly one (empty) tuple
/// when `dims` is empty.
pub fn tuples(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let mut next = if dims.iter().any(|&n| n == 0) {
        None
    } else {
        Some(vec![0; dims.len()])
    };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        let mut i = dims.len();
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < dims[i] {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    })
}

pub fn encode(dims: &[usize], args: &[usize]) -> usize {
    let mut i = 0;
    for (a, n) in args.iter().zip(dims) {
        i = i * n + a;
    }
    i
}

/// Decodes a mixed-radix index back into a tuple.
pub fn decode(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = index % dims[i];
        index /= dims[i];
    }
    out
}

/// A finite structure: nonempty carriers per sort and total tables for every
/// relation (metrics included) and function symbol.
#[derive(Debug, Clone)]
pub struct FiniteStructure {
    sig: Arc<Signature>,
    carriers: IndexMap<String, Vec<String>>,
    relations: IndexMap<String, Table<Rational>>,
    functions: IndexMap<String, Table<usize>>,
}

impl PartialEq for FiniteStructure {
    fn eq(&self, other: &Self) -> bool {
        self.carriers == other.carriers
            && self.relations.len() == other.relations.len()
            && self.functions.len() == other.functions.len()
            && self
                .relations
                .iter()
                .all(|(k, t)| other.relations.get(k) == Some(t))
            && self
                .functions
                .iter()
                .all(|(k, t)| other.functions.get(k) == Some(t))
            && self.sig.sorts() == other.sig.sorts()
    }
}

impl FiniteStructure {
    /// Creates a structure with the given carriers and no tables yet.
    pub fn new(sig: Arc<Signature>, carriers: Vec<(String, Vec<String>)>) -> Result<Self> {
        let mut map = IndexMap::new();
        for (sort, elems) in carriers {
            if !sig.has_sort(&sort) {
                return Err(Error::UnknownSymbol(sort));
            }
            if elems.is_empty() {
                return Err(Error::Structure(format!("carrier of sort `{sort}` is empty")));
            }
            for (i, e) in elems.iter().enumerate() {
                if elems[..i].contains(e) {
                    return Err(Error::Structure(format!(
                        "element `{e}` listed twice in sort `{sort}`"
                    )));
                }
            }
            if map.insert(sort.clone(), elems).is_some() {
                return Err(Error::Structure(format!("sort `{sort}` given twice")));
            }
        }
        let mut ordered = IndexMap::new();
        for s in sig.sorts() {
            match map.swap_remove(s) {
                Some(e) => {
                    ordered.insert(s.clone(), e);
                }
                None => return Err(Error::Structure(format!("no carrier for sort `{s}`"))),
            }
        }
        Ok(FiniteStructure {
            sig,
            carriers: ordered,
            relations: IndexMap::new(),
            functions: IndexMap::new(),
        })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn carrier(&self, sort: &str) -> Result<&[String]> {
        self.carriers
            .get(sort)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownSymbol(sort.to_string()))
    }

    pub fn size(&self, sort: &str) -> Result<usize> {
        Ok(self.carrier(sort)?.len())
    }

    pub fn dims(&self, sorts: &[String]) -> Result<Vec<usize>> {
        sorts.iter().map(|s| self.size(s)).collect()
    }

    pub fn element(&self, sort: &str, name: &str) -> Result<usize> {
        self.carrier(sort)?
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| Error::Structure(format!("`{name}` is not an element of sort `{sort}`")))
    }

    pub fn element_name(&self, sort: &str, index: usize) -> &str {
        &self.carriers[sort][index]
    }

    /// Names of a tuple of elements of the given sorts.
    pub fn names(&self, sorts: &[String], tuple: &[usize]) -> Vec<String> {
        sorts
            .iter()
            .zip(tuple)
            .map(|(s, &i)| self.element_name(s, i).to_string())
            .collect()
    }

    pub fn relation_table(&self, name: &str) -> Result<&Table<Rational>> {
        self.relations
            .get(name)
            .ok_or_else(|| Error::Structure(format!("no table for relation `{name}`")))
    }

    pub fn function_table(&self, name: &str) -> Result<&Table<usize>> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::Structure(format!("no table for function `{name}`")))
    }

    pub fn relation_value(&self, name: &str, args: &[usize]) -> Result<&Rational> {
        Ok(self.relation_table(name)?.get(args))
    }

    pub fn function_value(&self, name: &str, args: &[usize]) -> Result<usize> {
        Ok(*self.function_table(name)?.get(args))
    }

    /// Distance between two elements of `sort` under its designated metric.
    pub fn distance(&self, sort: &str, a: usize, b: usize) -> Result<&Rational> {
        let d = self.sig.metric_name(sort)?;
        self.relation_value(d, &[a, b])
    }

    /// Max-metric on tuples of the given sorts; 0 on the empty tuple.
    pub fn tuple_distance(&self, sorts: &[String], a: &[usize], b: &[usize]) -> Result<Rational> {
        let mut m = rational::zero();
        for ((s, &x), &y) in sorts.iter().zip(a).zip(b) {
            let d = self.distance(s, x, y)?;
            if *d > m {
                m = d.clone();
            }
        }
        Ok(m)
    }

    pub fn set_relation(
        &mut self,
        name: &str,
        f: impl FnMut(&[usize]) -> Rational,
    ) -> Result<()> {
        let rel = self
            .sig
            .relation(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        let dims = self.dims(&rel.domain)?;
        let table = Table::from_fn(dims, f);
        if let Some(v) = table.data.iter().find(|v| !rational::in_unit_interval(v)) {
            return Err(Error::Structure(format!(
                "relation `{name}` takes value {} outside [0,1]",
                format_ratio(v)
            )));
        }
        self.relations.insert(name.to_string(), table);
        Ok(())
    }

    pub fn set_function(&mut self, name: &str, f: impl FnMut(&[usize]) -> usize) -> Result<()> {
        let sym = self
            .sig
            .function(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        let dims = self.dims(&sym.domain)?;
        let n = self.size(&sym.codomain)?;
        let table = Table::from_fn(dims, f);
        if table.data.iter().any(|&v| v >= n) {
            return Err(Error::Structure(format!(
                "function `{name}` leaves its codomain"
            )));
        }
        self.functions.insert(name.to_string(), table);
        Ok(())
    }

    pub fn set_relation_table(&mut self, name: &str, table: Table<Rational>) -> Result<()> {
        let data = table.data;
        let mut it = data.into_iter();
        self.set_relation(name, |_| it.next().unwrap_or_else(rational::one))
    }

    /// Checks that every symbol of the signature has a table.
    pub fn validate(&self) -> Result<()> {
        for r in self.sig.relations() {
            let t = self.relation_table(&r.name)?;
            if t.dims != self.dims(&r.domain)? {
                return Err(Error::Structure(format!("table for `{}` has wrong shape", r.name)));
            }
        }
        for f in self.sig.functions() {
            let t = self.function_table(&f.name)?;
            if t.dims != self.dims(&f.domain)? {
                return Err(Error::Structure(format!("table for `{}` has wrong shape", f.name)));
            }
        }
        Ok(())
    }

    /// Same carriers and tables over a larger signature; new symbols must be
    /// given tables afterwards.
    pub fn with_signature(&self, sig: Arc<Signature>) -> Result<FiniteStructure> {
        for s in self.sig.sorts() {
            if !sig.has_sort(s) {
                return Err(Error::Context(format!("sort `{s}` missing from new signature")));
            }
        }
        Ok(FiniteStructure {
            sig,
            carriers: self.carriers.clone(),
            relations: self.relations.clone(),
            functions: self.functions.clone(),
        })
    }

    /// Adds a carrier for a sort of the signature that has none yet.
    pub fn add_carrier(&mut self, sort: &str, elems: Vec<String>) -> Result<()> {
        if !self.sig.has_sort(sort) {
            return Err(Error::UnknownSymbol(sort.to_string()));
        }
        if elems.is_empty() {
            return Err(Error::Structure(format!("carrier of sort `{sort}` is empty")));
        }
        self.carriers.insert(sort.to_string(), elems);
        let order: Vec<String> = self.sig.sorts().to_vec();
        self.carriers
            .sort_by_key(|k, _| order.iter().position(|s| s == k).unwrap_or(usize::MAX));
        Ok(())
    }

    /// Restriction to a sub-signature (sorts and symbols not in `sig` are
    /// dropped).
    pub fn reduct(&self, sig: Arc<Signature>) -> Result<FiniteStructure> {
        let mut out = FiniteStructure {
            carriers: IndexMap::new(),
            relations: IndexMap::new(),
            functions: IndexMap::new(),
            sig: sig.clone(),
        };
        for s in sig.sorts() {
            out.carriers.insert(s.clone(), self.carrier(s)?.to_vec());
        }
        for r in sig.relations() {
            out.relations
                .insert(r.name.clone(), self.relation_table(&r.name)?.clone());
        }
        for f in sig.functions() {
            out.functions
                .insert(f.name.clone(), self.function_table(&f.name)?.clone());
        }
        out.validate()?;
        Ok(out)
    }

    /// Parses the JSON structure format against a signature.
    pub fn from_json(sig: Arc<Signature>, text: &str) -> Result<FiniteStructure> {
        let root: Json = serde_json::from_str(text)?;
        Self::from_json_value(sig, &root)
    }

    pub fn from_json_value(sig: Arc<Signature>, root: &Json) -> Result<FiniteStructure> {
        let obj = root
            .as_object()
            .ok_or_else(|| Error::Structure("top level must be an object".into()))?;
        for key in obj.keys() {
            if !["sorts", "metrics", "relations", "functions"].contains(&key.as_str()) {
                return Err(Error::Structure(format!("unknown key `{key}`")));
            }
        }
        let sorts = obj
            .get("sorts")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::Structure("missing `sorts` object".into()))?;
        let mut carriers = Vec::new();
        for (s, elems) in sorts {
            let elems = elems
                .as_array()
                .ok_or_else(|| Error::Structure(format!("carrier of `{s}` must be a list")))?
                .iter()
                .map(|e| element_string(e))
                .collect::<Result<Vec<_>>>()?;
            carriers.push((s.clone(), elems));
        }
        let mut m = FiniteStructure::new(sig.clone(), carriers)?;
        let empty = Map::new();
        let metrics = section(obj, "metrics", &empty)?;
        let relations = section(obj, "relations", &empty)?;
        let functions = section(obj, "functions", &empty)?;
        for (name, body) in metrics {
            let rel = sig
                .relation(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            let Some(sort) = rel.metric_for.clone() else {
                return Err(Error::Structure(format!("`{name}` is not a metric symbol")));
            };
            m.load_metric(name, &sort, body)?;
        }
        // an unlisted metric is read as an empty row list (diagonal only)
        for r in sig.relations() {
            if let Some(sort) = &r.metric_for {
                if !metrics.contains_key(&r.name) {
                    m.load_metric(&r.name, sort, &Json::Array(Vec::new()))?;
                }
            }
        }
        for (name, body) in relations {
            let rel = sig
                .relation(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            if rel.metric_for.is_some() {
                return Err(Error::Structure(format!(
                    "metric `{name}` belongs under `metrics`"
                )));
            }
            m.load_relation(name, &rel.domain.clone(), body)?;
        }
        for (name, body) in functions {
            let f = sig
                .function(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?
                .clone();
            m.load_function(name, &f.domain, &f.codomain, body)?;
        }
        m.validate()?;
        Ok(m)
    }

    fn load_metric(&mut self, name: &str, sort: &str, body: &Json) -> Result<()> {
        let rows = body
            .as_array()
            .ok_or_else(|| Error::Structure(format!("metric `{name}` must be a list of rows")))?;
        let n = self.size(sort)?;
        let mut table: Vec<Option<Rational>> = vec![None; n * n];
        for row in rows {
            let row = row_of(name, row, 3)?;
            let a = self.element(sort, &element_string(&row[0])?)?;
            let b = self.element(sort, &element_string(&row[1])?)?;
            let v = value_of(name, &row[2])?;
            if let Some(old) = &table[a * n + b] {
                if *old != v {
                    return Err(Error::Structure(format!(
                        "metric `{name}` given twice at ({}, {})",
                        self.element_name(sort, a),
                        self.element_name(sort, b)
                    )));
                }
            }
            table[a * n + b] = Some(v);
        }
        for a in 0..n {
            if table[a * n + a].is_none() {
                table[a * n + a] = Some(rational::zero());
            }
            for b in 0..n {
                if table[a * n + b].is_none() {
                    table[a * n + b] = table[b * n + a].clone();
                }
            }
        }
        if let Some(i) = table.iter().position(Option::is_none) {
            return Err(Error::Structure(format!(
                "metric `{name}` has no value at ({}, {})",
                self.element_name(sort, i / n),
                self.element_name(sort, i % n)
            )));
        }
        let mut it = table.into_iter().flatten();
        self.set_relation(name, |_| it.next().unwrap_or_else(rational::zero))
    }

    fn load_relation(&mut self, name: &str, domain: &[String], body: &Json) -> Result<()> {
        let dims = self.dims(domain)?;
        let mut table: Vec<Option<Rational>> = vec![None; dims.iter().product()];
        let mut put = |m: &Self, args: Vec<usize>, v: Rational| -> Result<()> {
            let i = encode(&dims, &args);
            if table[i].is_some() {
                return Err(Error::Structure(format!(
                    "relation `{name}` given twice at {:?}",
                    m.names(domain, &args)
                )));
            }
            table[i] = Some(v);
            Ok(())
        };
        match body {
            Json::Array(rows) => {
                for row in rows {
                    let row = row_of(name, row, domain.len() + 1)?;
                    let args = self.args_of(domain, &row[..domain.len()])?;
                    put(self, args, value_of(name, &row[domain.len()])?)?;
                }
            }
            Json::Object(map) if domain.len() == 1 => {
                for (k, v) in map {
                    let a = self.element(&domain[0], k)?;
                    put(self, vec![a], value_of(name, v)?)?;
                }
            }
            Json::String(_) | Json::Number(_) if domain.is_empty() => {
                put(self, vec![], value_of(name, body)?)?;
            }
            _ => return Err(Error::Structure(format!("bad table for relation `{name}`"))),
        }
        if let Some(i) = table.iter().position(Option::is_none) {
            return Err(Error::Structure(format!(
                "relation `{name}` has no value at {:?}",
                self.names(domain, &decode(&dims, i))
            )));
        }
        let mut it = table.into_iter().flatten();
        self.set_relation(name, |_| it.next().unwrap_or_else(rational::zero))
    }

    fn load_function(
        &mut self,
        name: &str,
        domain: &[String],
        codomain: &str,
        body: &Json,
    ) -> Result<()> {
        let dims = self.dims(domain)?;
        let mut table: Vec<Option<usize>> = vec![None; dims.iter().product()];
        let mut put = |m: &Self, args: Vec<usize>, v: usize| -> Result<()> {
            let i = encode(&dims, &args);
            if table[i].is_some() {
                return Err(Error::Structure(format!(
                    "function `{name}` given twice at {:?}",
                    m.names(domain, &args)
                )));
            }
            table[i] = Some(v);
            Ok(())
        };
        match body {
            Json::String(s) if domain.is_empty() => {
                let v = self.element(codomain, s)?;
                put(self, vec![], v)?;
            }
            Json::Object(map) if domain.len() == 1 => {
                for (k, v) in map {
                    let a = self.element(&domain[0], k)?;
                    let b = self.element(codomain, &element_string(v)?)?;
                    put(self, vec![a], b)?;
                }
            }
            Json::Array(rows) => {
                for row in rows {
                    let row = row_of(name, row, domain.len() + 1)?;
                    let args = self.args_of(domain, &row[..domain.len()])?;
                    let b = self.element(codomain, &element_string(&row[domain.len()])?)?;
                    put(self, args, b)?;
                }
            }
            _ => return Err(Error::Structure(format!("bad table for function `{name}`"))),
        }
        if let Some(i) = table.iter().position(Option::is_none) {
            return Err(Error::Structure(format!(
                "function `{name}` has no value at {:?}",
                self.names(domain, &decode(&dims, i))
            )));
        }
        let mut it = table.into_iter().flatten();
        self.set_function(name, |_| it.next().unwrap_or(0))
    }

    fn args_of(&self, domain: &[String], row: &[Json]) -> Result<Vec<usize>> {
        domain
            .iter()
            .zip(row)
            .map(|(s, e)| self.element(s, &element_string(e)?))
            .collect()
    }

    /// Canonical JSON: full metric tables, unary functions as objects,
    /// constants as strings, everything else as rows.
    pub fn to_json_value(&self) -> Json {
        let mut sorts = Map::new();
        for (s, e) in &self.carriers {
            sorts.insert(s.clone(), json!(e));
        }
        let mut metrics = Map::new();
        let mut relations = Map::new();
        for r in self.sig.relations() {
            let Ok(t) = self.relation_table(&r.name) else {
                continue;
            };
            let body = if r.domain.is_empty() {
                json!(format_ratio(&t.data[0]))
            } else {
                let rows: Vec<Json> = tuples(&t.dims)
                    .map(|args| {
                        let mut row: Vec<Json> =
                            self.names(&r.domain, &args).into_iter().map(Json::from).collect();
                        row.push(json!(format_ratio(t.get(&args))));
                        Json::Array(row)
                    })
                    .collect();
                Json::Array(rows)
            };
            if r.metric_for.is_some() {
                metrics.insert(r.name.clone(), body);
            } else {
                relations.insert(r.name.clone(), body);
            }
        }
        let mut functions = Map::new();
        for f in self.sig.functions() {
            let Ok(t) = self.function_table(&f.name) else {
                continue;
            };
            let body = match f.domain.len() {
                0 => json!(self.element_name(&f.codomain, t.data[0])),
                1 => {
                    let mut m = Map::new();
                    for (i, &v) in t.data.iter().enumerate() {
                        m.insert(
                            self.element_name(&f.domain[0], i).to_string(),
                            json!(self.element_name(&f.codomain, v)),
                        );
                    }
                    Json::Object(m)
                }
                _ => Json::Array(
                    tuples(&t.dims)
                        .map(|args| {
                            let mut row: Vec<Json> = self
                                .names(&f.domain, &args)
                                .into_iter()
                                .map(Json::from)
                                .collect();
                            row.push(json!(self.element_name(&f.codomain, *t.get(&args))));
                            Json::Array(row)
                        })
                        .collect(),
                ),
            };
            functions.insert(f.name.clone(), body);
        }
        json!({
            "sorts": sorts,
            "metrics": metrics,
            "relations": relations,
            "functions": functions,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("structure serializes")
    }
}


fn section<'a>(
    obj: &'a Map<String, Json>,
    key: &str,
    empty: &'a Map<String, Json>,
) -> Result<&'a Map<String, Json>> {
    match obj.get(key) {
        None => Ok(empty),
        Some(Json::Object(m)) => Ok(m),
        Some(_) => Err(Error::Structure(format!("`{key}` must be an object"))),
    }
}

fn element_string(v: &Json) -> Result<String> {
    match v {
        Json::String(s) => Ok(s.clone()),
        Json::Number(n) => Ok(n.to_string()),
        _ => Err(Error::Structure(format!("expected an element name, found {v}"))),
    }
}

fn row_of<'a>(name: &str, row: &'a Json, len: usize) -> Result<&'a [Json]> {
    match row.as_array() {
        Some(r) if r.len() == len => Ok(r),
        _ => Err(Error::Structure(format!(
            "rows of `{name}` must have {len} entries, found {row}"
        ))),
    }
}

fn value_of(name: &str, v: &Json) -> Result<Rational> {
    let text = match v {
        Json::String(s) => s.clone(),
        Json::Number(n) => n.to_string(),
        _ => return Err(Error::Structure(format!("bad value {v} in `{name}`"))),
    };
    let q = rational::parse_rational(&text).map_err(Error::Structure)?;
    if !rational::in_unit_interval(&q) {
        return Err(Error::Structure(format!(
            "value {text} of `{name}` outside [0,1]"
        )));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m0, m0_signature};
    use crate::rational::ratio;

    #[test]
    fn json_round_trip() {
        let m = m0();
        let again = FiniteStructure::from_json(m0_signature(), &m.to_json()).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.to_json(), m.to_json());
        assert_eq!(*m.distance("S", 2, 0).unwrap(), ratio(1, 1));
    }

    #[test]
    fn gaps_and_bad_values_rejected() {
        let sig = m0_signature();
        let missing = r#"{"sorts":{"S":["a","b"]},"metrics":{"d":[]},
            "relations":{"R":[["a","0"],["b","0"]]},"functions":{"f":{"a":"a","b":"b"},"e":"a"}}"#;
        assert!(matches!(
            FiniteStructure::from_json(sig.clone(), missing),
            Err(Error::Structure(_))
        ));
        let range = r#"{"sorts":{"S":["a"]},"relations":{"R":[["a","3/2"]]},
            "functions":{"f":{"a":"a"},"e":"a"}}"#;
        assert!(FiniteStructure::from_json(sig.clone(), range).is_err());
        let empty = r#"{"sorts":{"S":[]}}"#;
        assert!(FiniteStructure::from_json(sig, empty).is_err());
    }

    #[test]
    fn tuple_enumeration() {
        let all: Vec<Vec<usize>> = tuples(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[4], vec![1, 1]);
        assert_eq!(encode(&[2, 3], &[1, 1]), 4);
        assert_eq!(decode(&[2, 3], 4), vec![1, 1]);
        assert_eq!(tuples(&[]).count(), 1);
    }
}

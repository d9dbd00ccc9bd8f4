//! JSON and CSV formats.
//!
//! Matrices are `{"tag": "C", "rows": [[...], ...]}` or a bare array of
//! rows. An entry is a number, `[re, im]` or `[w, x, y, z]`; without a tag
//! the smallest scalar field holding every entry is used.
//!
//! Groups are `{"tag": "R", "kind": "symmetric", "p": 2, "q": 1}`,
//! `{"tag": "R", "kind": "symplectic", "m": 2}`, `{"tag": "R", "kind": "gl",
//! "n": 3}` or `{"tag": .., "kind": .., "gram": matrix}`.
//!
//! Representations are `{"form": group, "generators": [matrix, ...]}` and
//! subspaces `{"basis": matrix}` with the span of the columns.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::anosov::{BoundaryPoint, LimitSetSample, RepSpec, Word};
use crate::error::{Error, Result};
use crate::forms::{FormKind, FormSpec, Group};
use crate::scalars::{MatK, Quaternion, ScalarTag};
use crate::subspaces::Subspace;
use crate::tolerances::Tolerances;

fn entry_to_json(tag: ScalarTag, q: Quaternion) -> Value {
    match tag {
        ScalarTag::R => json!(q.w),
        ScalarTag::C => json!([q.w, q.x]),
        ScalarTag::H => json!([q.w, q.x, q.y, q.z]),
    }
}

fn entry_from_json(v: &Value) -> Result<(Quaternion, ScalarTag)> {
    let num = |v: &Value| v.as_f64().ok_or_else(|| Error::Parse(format!("expected a number, found {v}")));
    match v {
        Value::Number(_) => Ok((Quaternion::real(num(v)?), ScalarTag::R)),
        Value::Array(a) if a.len() == 2 => Ok((Quaternion::new(num(&a[0])?, num(&a[1])?, 0.0, 0.0), ScalarTag::C)),
        Value::Array(a) if a.len() == 4 => Ok((
            Quaternion::new(num(&a[0])?, num(&a[1])?, num(&a[2])?, num(&a[3])?),
            ScalarTag::H,
        )),
        _ => Err(Error::Parse(format!("bad matrix entry {v}"))),
    }
}

pub fn matrix_to_json(m: &MatK) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|r| Value::Array((0..m.cols()).map(|c| entry_to_json(m.tag(), m.get(r, c))).collect()))
        .collect();
    json!({ "tag": m.tag(), "rows": rows })
}

pub fn matrix_from_json(v: &Value) -> Result<MatK> {
    let (tag, rows) = match v {
        Value::Object(o) => {
            let tag = match o.get("tag") {
                Some(t) => Some(serde_json::from_value::<ScalarTag>(t.clone())?),
                None => None,
            };
            let rows = o.get("rows").ok_or_else(|| Error::Parse("matrix needs \"rows\"".into()))?;
            (tag, rows)
        }
        Value::Array(_) => (None, v),
        _ => return Err(Error::Parse("matrix must be an object or an array of rows".into())),
    };
    let rows = rows.as_array().ok_or_else(|| Error::Parse("\"rows\" must be an array".into()))?;
    let ncols = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows.len() * ncols);
    let mut seen = ScalarTag::R;
    for row in rows {
        let row = row.as_array().ok_or_else(|| Error::Parse("each row must be an array".into()))?;
        if row.len() != ncols {
            return Err(Error::Parse("rows have different lengths".into()));
        }
        for e in row {
            let (q, t) = entry_from_json(e)?;
            seen = seen.join(t);
            data.push(q);
        }
    }
    let tag = match tag {
        Some(t) if t.join(seen) != t => {
            return Err(Error::WrongScalar { expected: t, found: seen });
        }
        Some(t) => t,
        None => seen,
    };
    MatK::from_entries(tag, rows.len(), ncols, data)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupJson {
    tag: ScalarTag,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram: Option<Value>,
}

pub fn group_from_json(v: &Value) -> Result<Group> {
    let g: GroupJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("group: {e}")))?;
    let need = |x: Option<usize>, name: &str| x.ok_or_else(|| Error::Parse(format!("group of kind {} needs \"{name}\"", g.kind)));
    if g.kind == "gl" {
        return Ok(Group::gl(g.tag, need(g.n, "n")?));
    }
    let kind = match g.kind.as_str() {
        "symmetric" => FormKind::Symmetric,
        "hermitian" => FormKind::Hermitian,
        "symplectic" => FormKind::Symplectic,
        k => return Err(Error::Parse(format!("unknown group kind {k:?}"))),
    };
    let form = match (&g.gram, kind) {
        (Some(m), _) => FormSpec::from_gram(g.tag, kind, matrix_from_json(m)?)?,
        (None, FormKind::Symplectic) => FormSpec::symplectic(g.tag, need(g.m, "m")?)?,
        (None, _) => FormSpec::signature(g.tag, kind, need(g.p, "p")?, need(g.q, "q")?)?,
    };
    Ok(Group::Aut(form))
}

pub fn group_to_json(g: &Group) -> Value {
    let out = match g {
        Group::Gl { tag, n } => GroupJson {
            tag: *tag,
            kind: "gl".into(),
            p: None,
            q: None,
            m: None,
            n: Some(*n),
            gram: None,
        },
        Group::Aut(f) => {
            let (p, q) = f.signature_pair();
            let standard = match f.kind() {
                FormKind::Symplectic => FormSpec::symplectic(f.tag(), f.dim() / 2).ok(),
                k => FormSpec::signature(f.tag(), k, p, q).ok(),
            };
            let mut out = GroupJson {
                tag: f.tag(),
                kind: f.kind().name().into(),
                p: None,
                q: None,
                m: None,
                n: None,
                gram: None,
            };
            if standard.as_ref() == Some(f) {
                if f.kind() == FormKind::Symplectic {
                    out.m = Some(f.dim() / 2);
                } else {
                    out.p = Some(p);
                    out.q = Some(q);
                }
            } else {
                out.gram = Some(matrix_to_json(f.gram()));
            }
            out
        }
    };
    serde_json::to_value(out).expect("plain data")
}

pub fn rep_from_json(v: &Value, tol: &Tolerances) -> Result<RepSpec> {
    let form = v.get("form").ok_or_else(|| Error::Parse("representation needs \"form\"".into()))?;
    let gens = v
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("representation needs a \"generators\" array".into()))?;
    let group = group_from_json(form)?;
    let mats = gens.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    RepSpec::new(group, mats, tol)
}

pub fn rep_to_json(rep: &RepSpec) -> Value {
    json!({
        "form": group_to_json(rep.group()),
        "generators": rep.generators().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn subspace_from_json(v: &Value, tol: f64) -> Result<Subspace> {
    let basis = match v.get("basis") {
        Some(b) => b,
        None => return Err(Error::Parse("subspace needs \"basis\"".into())),
    };
    Subspace::from_span(&matrix_from_json(basis)?, tol)
}

pub fn subspace_to_json(w: &Subspace) -> Value {
    json!({ "dim": w.dim(), "basis": matrix_to_json(w.basis()) })
}

#[derive(Debug, Serialize, Deserialize)]
struct LimitRow {
    word: String,
    gap: f64,
    power: u64,
    isotropy_residual: f64,
    tag: ScalarTag,
    rows: usize,
    cols: usize,
    /// Row-major real components, space separated.
    basis: String,
}

/// One row per point: word, gap, power, isotropy residual, tag, basis shape
/// and the basis entries.
pub fn write_limit_set_csv<W: Write>(sample: &LimitSetSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in &sample.points {
        let b = p.subspace.basis();
        let comps: Vec<String> = b
            .entries()
            .iter()
            .flat_map(|q| q.to_array().into_iter().take(b.tag().dim_r()))
            .map(|x| format!("{x:e}"))
            .collect();
        w.serialize(LimitRow {
            word: p.word.to_string(),
            gap: p.gap,
            power: p.power,
            isotropy_residual: p.isotropy_residual,
            tag: b.tag(),
            rows: b.rows(),
            cols: b.cols(),
            basis: comps.join(" "),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_limit_set_csv<R: Read>(input: R) -> Result<LimitSetSample> {
    let mut r = csv::Reader::from_reader(input);
    let mut points = Vec::new();
    let mut d = 0;
    for row in r.deserialize() {
        let row: LimitRow = row?;
        let k = row.tag.dim_r();
        let comps: Vec<f64> = row
            .basis
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}"))))
            .collect::<Result<_>>()?;
        if comps.len() != row.rows * row.cols * k {
            return Err(Error::Parse(format!("basis of {} has the wrong length", row.word)));
        }
        let data = comps.chunks(k).map(Quaternion::from_slice).collect();
        let basis = MatK::from_entries(row.tag, row.rows, row.cols, data)?;
        d = row.cols;
        points.push(BoundaryPoint {
            word: row.word.parse::<Word>()?,
            subspace: Subspace::from_span(&basis, 1e-10)?,
            gap: row.gap,
            power: row.power,
            isotropy_residual: row.isotropy_residual,
            projected: false,
            flagged: false,
        });
    }
    Ok(LimitSetSample {
        radius: points.iter().map(|p| p.word.len()).max().unwrap_or(0),
        d,
        dedup: 0.0,
        points,
        warnings: Vec::new(),
        divergence_consistent: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anosov::{limit_set, samples, AnosovConfig};

    #[test]
    fn matrix_round_trip() {
        let v: Value = serde_json::from_str("[[1, [0, 1]], [0, 2]]").unwrap();
        let m = matrix_from_json(&v).unwrap();
        assert_eq!(m.tag(), ScalarTag::C);
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
        let h: Value = serde_json::from_str(r#"{"tag": "H", "rows": [[[0, 0, 1, 0]]]}"#).unwrap();
        assert_eq!(matrix_from_json(&h).unwrap().get(0, 0), Quaternion::J);
        let bad: Value = serde_json::from_str(r#"{"tag": "R", "rows": [[[0, 1]]]}"#).unwrap();
        assert!(matrix_from_json(&bad).is_err());
    }

    #[test]
    fn group_round_trip() {
        for s in [
            r#"{"tag": "R", "kind": "symmetric", "p": 2, "q": 1}"#,
            r#"{"tag": "C", "kind": "symplectic", "m": 2}"#,
            r#"{"tag": "R", "kind": "gl", "n": 3}"#,
        ] {
            let g = group_from_json(&serde_json::from_str(s).unwrap()).unwrap();
            assert_eq!(group_from_json(&group_to_json(&g)).unwrap(), g);
        }
        let g = Group::Aut(FormSpec::symplectic(ScalarTag::R, 1).unwrap().direct_sum_minus());
        assert_eq!(group_from_json(&group_to_json(&g)).unwrap(), g);
        assert!(group_from_json(&serde_json::from_str(r#"{"tag": "R", "kind": "nope"}"#).unwrap()).is_err());
    }

    #[test]
    fn rep_and_csv_round_trip() {
        let tol = Tolerances::default();
        let rep = samples::fuchsian();
        let back = rep_from_json(&rep_to_json(&rep), &tol).unwrap();
        assert_eq!(back.generators(), rep.generators());
        let sample = limit_set(&rep, 3, 1, &AnosovConfig::default(), &tol).unwrap();
        let mut buf = Vec::new();
        write_limit_set_csv(&sample, &mut buf).unwrap();
        let read = read_limit_set_csv(buf.as_slice()).unwrap();
        assert_eq!(read.points.len(), sample.points.len());
        for (a, b) in read.points.iter().zip(&sample.points) {
            assert!(a.subspace.distance(&b.subspace) < 1e-12);
            assert_eq!(a.word, b.word);
        }
    }
}

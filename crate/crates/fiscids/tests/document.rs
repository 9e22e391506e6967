use fiscids::document::{from_str, from_value, to_string, to_value, DocumentError};
use fiscids_core::catalog;
use fiscids_core::model::trivial_representation;
use fiscids_core::{Class, Entry};
use serde_json::{json, Value};
use std::sync::Arc;

fn schema_path(v: &Value) -> String {
    match from_value(v) {
        Err(DocumentError::Schema(e)) => e.path,
        Err(other) => panic!("not a schema error: {}", other),
        Ok(_) => panic!("accepted"),
    }
}

#[test]
fn quadratic_log_polynomial_keeps_exact_coefficients() {
    let q = catalog::logpoly(Class::Quadratic);
    let back = from_str(&to_string(&q).unwrap()).unwrap();
    assert_eq!(back.big_n(), 6);
    assert_eq!(back.f(), q.f());
    assert_eq!(back.h(), q.h());
    assert_eq!(back.z0(), q.z0());
    assert_eq!(back.state_names(), q.state_names());
    let z0: Vec<String> = back.z0().iter().map(|e| e.to_string()).collect();
    assert_eq!(z0, ["log(2)", "0", "1/4", "0", "1/16", "0"]);
}

#[test]
fn rational_entries_use_num_den() {
    let r = catalog::logpoly(Class::Rational);
    let v = to_value(&r).unwrap();
    assert!(v["F"][0][0].get("num").is_some());
    assert!(v["F"][0][0].get("den").is_some());
    let back = from_value(&v).unwrap();
    assert!(matches!(back.f()[0][0], Entry::Rational(_)));
    assert_eq!(to_value(&back).unwrap(), v);
}

#[test]
fn schema_errors_name_the_path() {
    let good = to_value(&catalog::tt()).unwrap();
    let edit = |f: &dyn Fn(&mut serde_json::Map<String, Value>)| {
        let mut v = good.clone();
        f(v.as_object_mut().unwrap());
        v
    };
    assert_eq!(schema_path(&edit(&|o| drop(o.remove("z0")))), "/z0");
    assert_eq!(
        schema_path(&edit(&|o| drop(o.insert("version".into(), json!(7))))),
        "/version"
    );
    assert_eq!(
        schema_path(&edit(&|o| drop(o.insert("class".into(), json!("general"))))),
        "/class"
    );
    assert_eq!(
        schema_path(&edit(&|o| drop(o.insert("z0".into(), json!(["0", "x"]))))),
        "/z0/1"
    );
    assert_eq!(
        schema_path(&edit(&|o| o["F"][1][1][0]["coeff"] = json!("0.5"))),
        "/F/1/1/0/coeff"
    );
    assert_eq!(
        schema_path(&edit(&|o| o["F"][0][0][0]["exponents"] = json!([1]))),
        "/F/0/0/0/exponents"
    );
    assert_eq!(schema_path(&edit(&|o| drop(o.insert("h".into(), json!([]))))), "/h");
    assert!(matches!(from_str("{"), Err(DocumentError::Json(_))));
}

#[test]
fn base_point_is_optional() {
    let mut v = to_value(&catalog::gaussian()).unwrap();
    v.as_object_mut().unwrap().remove("base_point");
    let s = from_value(&v).unwrap();
    assert_eq!(s.base_point().len(), 2);
    assert!(s.base_point().iter().all(|e| e.is_zero()));
}

#[test]
fn general_systems_are_refused() {
    let t = trivial_representation(Arc::new(|x: &[f64]| vec![x[0]]), 1, 1).to_system();
    assert!(matches!(to_value(&t), Err(DocumentError::NotSerializable(_))));
}

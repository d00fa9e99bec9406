//! Random JSON documents and a reading of the JSON gallery ASG as a
//! `serde_json::Value`.

use modelcc::binder::{Asg, FieldValue};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{Map, Value};

const PIECES: &[&str] = &["a", "Z", "0", " ", "\\n", "\\t", "\\\"", "\\\\", "\\/", "\\u00e9", "\\u20AC", "é", "€", "\\b", "\\r", "\\f"];
const NUMBERS: &[&str] = &["0", "-0", "7", "-12", "3.25", "1e3", "-2.5E-2", "6.02e+23", "100", "0.001"];

fn ws(rng: &mut StdRng) -> &'static str {
    ["", "", " ", "\n  ", "\t"][rng.gen_range(0..5)]
}

fn string(rng: &mut StdRng, salt: usize) -> String {
    let mut s = String::from("\"");
    for _ in 0..rng.gen_range(0..5) {
        s.push_str(PIECES[rng.gen_range(0..PIECES.len())]);
    }
    if salt != usize::MAX {
        s.push_str(&format!("k{salt}"));
    }
    s.push('"');
    s
}

fn value(rng: &mut StdRng, depth: u32, out: &mut String) {
    let pick = match depth {
        0 => rng.gen_range(0..5),
        1 => rng.gen_range(0..10),
        _ => rng.gen_range(5..10),
    };
    match pick {
        0 => out.push_str(&string(rng, usize::MAX)),
        1 => out.push_str(NUMBERS[rng.gen_range(0..NUMBERS.len())]),
        2 => out.push_str(if rng.gen() { "true" } else { "false" }),
        3 => out.push_str("null"),
        4 => out.push_str(&rng.gen_range(-1000i64..1000).to_string()),
        5..=7 => {
            out.push('[');
            for i in 0..rng.gen_range(0..5) {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(ws(rng));
                value(rng, depth - 1, out);
                out.push_str(ws(rng));
            }
            out.push(']');
        }
        _ => {
            out.push('{');
            for i in 0..rng.gen_range(0..4) {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(ws(rng));
                // unique keys: serde_json keeps only the last duplicate
                out.push_str(&string(rng, i));
                out.push_str(ws(rng));
                out.push(':');
                out.push_str(ws(rng));
                value(rng, depth - 1, out);
            }
            out.push('}');
        }
    }
}

/// `n` documents from a fixed seed.
pub fn documents(seed: u64, n: usize) -> Vec<String> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut s = String::from(ws(&mut rng));
            let depth = rng.gen_range(1..5);
            value(&mut rng, depth, &mut s);
            s.push_str(ws(&mut rng));
            s
        })
        .collect()
}

pub const INVALID: [&str; 20] = [
    "",
    "[1,]",
    "{\"a\":1,}",
    "{'a':1}",
    "01",
    "{a:1}",
    "[1 2]",
    "{\"a\" 1}",
    "{\"a\":}",
    "tru",
    "nul",
    "\"\\x\"",
    "\"\\u12\"",
    "[",
    "{}}",
    "1.",
    ".5",
    "+1",
    "\"a\nb\"",
    "NaN",
];

fn decode(asg: &Asg, id: usize) -> Value {
    let inst = asg.instance(id);
    let field = |name: &str| inst.field(name).unwrap();
    match asg.type_name(id) {
        "JSONDocument" => decode(asg, field("value").target().unwrap()),
        "JSONNull" => Value::Null,
        "JSONBoolean" => match field("value") {
            FieldValue::Boolean(b) => Value::Bool(*b),
            other => panic!("{other:?}"),
        },
        "JSONNumber" => match field("value") {
            FieldValue::Number(n) => serde_json::Number::from_f64(*n).map_or(Value::Null, Value::Number),
            other => panic!("{other:?}"),
        },
        "JSONString" => match field("value") {
            FieldValue::Text(t) => serde_json::from_str(t).unwrap(),
            other => panic!("{other:?}"),
        },
        "JSONArray" => match field("elements") {
            FieldValue::List(xs) => Value::Array(xs.iter().map(|x| decode(asg, x.target().unwrap())).collect()),
            other => panic!("{other:?}"),
        },
        "JSONObject" => match field("pairs") {
            FieldValue::List(xs) => {
                let mut m = Map::new();
                for p in xs {
                    let p = p.target().unwrap();
                    let key = match decode(asg, asg.instance(p).field("name").unwrap().target().unwrap()) {
                        Value::String(s) => s,
                        other => panic!("{other:?}"),
                    };
                    m.insert(key, decode(asg, asg.instance(p).field("value").unwrap().target().unwrap()));
                }
                Value::Object(m)
            }
            other => panic!("{other:?}"),
        },
        other => panic!("unexpected {other}"),
    }
}

/// The document an ASG of the JSON gallery model describes.
pub fn asg_value(asg: &Asg) -> Value {
    decode(asg, asg.root)
}

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) {
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(hopf_forge_py::hopf_forge_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("hf", module).unwrap();
        let src = CString::new(code).unwrap();
        if let Err(e) = py.run(&src, Some(&globals), None) {
            e.display(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn decompose_from_python() {
    run(r#"
cert = hf.Group.builtin("q8").decompose("R")
assert cert["block_dims"] == [1, 1, 1, 1, 4]
assert hf.Group.builtin("c2*c2").decompose("C")["block_count"] == 4
"#);
}

#[test]
fn input_errors_become_value_errors() {
    run(r#"
for bad in (lambda: hf.Group.builtin("z9"), lambda: hf.Envelope("sl3", 2), lambda: hf.AbelianDual(1).embed([2.0])):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("accepted bad input")
"#);
}

#[test]
fn envelope_exp_is_exact() {
    run(r#"
u = hf.Envelope("abelian1", 4)
assert u.exp([[[0], "1/2"]])[-1] == ([0, 0, 0, 0], "1/384")
g = hf.Envelope("sl2", 3).exp([[[1], 3]])
assert hf.Envelope("sl2", 3).grouplike_residual(g) == 0
"#);
}

#[test]
fn dual_elements_round_trip_through_json() {
    run(r#"
z = hf.AbelianDual(1, [4])
e = z.element('{"grouplike": {"free": [2.0], "torsion": [1]}}')
again = z.element(e.to_json())
for n in range(-3, 4):
    for t in range(4):
        assert e.evaluate([n], [t]) == again.evaluate([n], [t])
"#);
}

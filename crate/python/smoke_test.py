"""Smoke test for the hopf_forge_py extension module.

Build first:

    cargo build -p hopf-forge-py --features extension-module --release

then run `python3 python/smoke_test.py`. The script picks up the shared
library from target/release or target/debug (or from HOPF_FORGE_PY_LIB) and
imports it under its module name.
"""

import cmath
import importlib.util
import math
import os
import shutil
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = []
    if os.environ.get("HOPF_FORGE_PY_LIB"):
        candidates.append(Path(os.environ["HOPF_FORGE_PY_LIB"]))
    for profile in ("release", "debug"):
        for name in ("libhopf_forge_py.so", "libhopf_forge_py.dylib", "hopf_forge_py.dll"):
            candidates.append(ROOT / "target" / profile / name)
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("hopf_forge_py not built; see the module docstring")
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    target = Path(tempfile.mkdtemp()) / f"hopf_forge_py{suffix}"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("hopf_forge_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


hf = load_module()


def check_groups():
    q8 = hf.Group.builtin("q8")
    assert q8.order == 8 and not q8.is_abelian()
    cert = q8.decompose("R")
    assert cert["block_dims"] == [1, 1, 1, 1, 4], cert["block_dims"]
    assert cert["division_rings"] == ["R", "R", "R", "R", "H"]
    assert max(cert["residuals"].values()) < 1e-9

    c4 = hf.Group.builtin("c4")
    assert c4.decompose("R")["block_dims"] == [1, 1, 2]
    assert sorted(c4.grouplikes("R")) == [0, 1, 2, 3]

    table = hf.Group.builtin("d4").character_table()
    assert sorted(table["degrees"]) == [1, 1, 1, 1, 2]

    klein = hf.Group.from_table([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])
    assert klein.is_abelian() and klein.inv(3) == 3

    try:
        hf.Group.from_table([[0, 1], [1, 1]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-Latin table accepted")


def check_group_algebra():
    s3 = hf.Group.builtin("s3")
    g = hf.GroupAlgebraElement.basis(s3, 1)
    h = hf.GroupAlgebraElement.basis(s3, 3)
    gh = g * h
    assert gh.coeffs[s3.mul(1, 3)] == 1
    delta = g.comultiply()
    assert delta[1][1] == 1 and sum(abs(x) for row in delta for x in row) == 1
    a = hf.GroupAlgebraElement(s3, [0.5, 1j, 0, 0, -2, 0.25])
    residuals = a.hopf_residuals()
    assert max(residuals.values()) < 1e-12, residuals
    assert abs(a.counit() - (0.5 + 1j - 2 + 0.25)) < 1e-15


def check_abelian():
    z = hf.AbelianDual(1)
    phi = z.element({"primitive": {"free": [[0.0, 2 * math.pi]]}})
    assert phi.is_primitive()["verdict"] == "StructurallyYes"
    e = (phi * z.element({"constant": 0.25})).exp()
    assert abs(e.evaluate([1]) - 1j) < 1e-12
    point = z.embed([0.25])
    for n in range(-5, 6):
        assert abs(e.evaluate([n]) - point.evaluate([n])) < 1e-12

    d = hf.AbelianDual(2, [3])
    g = d.element({"grouplike": {"free": [[1.0, 1.0], 2.0], "torsion": [2]}})
    polar = g.polar()
    assert abs(polar["lie_part"][0] - math.log(math.sqrt(2))) < 1e-15
    assert abs(polar["lie_part"][1] - math.log(2)) < 1e-15
    assert g.is_grouplike()["verdict"] == "StructurallyYes"
    w = cmath.exp(2j * math.pi * 2 / 3)
    assert abs(g.evaluate([1, 1], [1]) - (1 + 1j) * 2 * w) < 1e-12

    support = z.element({"support": [[{"free": [0], "torsion": []}, 1.0], [{"free": [1], "torsion": []}, 2.0]]})
    assert support.is_grouplike(seed=3)["verdict"] == "No"


def check_envelope():
    u = hf.Envelope("sl2", 3)
    assert u.dim == 3 and len(u.basis()) == 20
    laws = u.hopf_laws()
    assert laws["coassociativity"] == 0 and laws["antipode"] == 0, laws
    assert len(u.primitive_basis()) == 3
    ef = u.multiply([[[0], 1]], [[[1], 1]])
    fe = u.multiply([[[1], 1]], [[[0], 1]])
    commutator = {tuple(m): Fraction(c) for m, c in ef}
    for m, c in fe:
        commutator[tuple(m)] = commutator.get(tuple(m), Fraction(0)) - Fraction(c)
    assert {m: c for m, c in commutator.items() if c} == {(2,): 1}
    g = u.exp([[[0], "1/2"], [[2], -1]])
    assert u.grouplike_residual(g) == 0
    assert u.associativity_residual(10, seed=1) == 0

    line = hf.Envelope({"dim": 1, "field": "R"}, 3)
    assert line.exp([[[0], 1]]) == [([], "1"), ([0], "1"), ([0, 0], "1/2"), ([0, 0, 0], "1/6")]

    heis = hf.Envelope('{"dim": 3, "field": "R", "brackets": [[0, 1, [0, 0, 1]]]}', 3)
    assert heis.hopf_laws()["counit"] == 0


def check_selftest():
    report = hf.selftest(seed=20240601)
    failed = [c["id"] for c in report["criteria"] if not c["passed"]]
    assert report["passed"], failed


def main():
    for check in (check_groups, check_group_algebra, check_abelian, check_envelope, check_selftest):
        check()
        print(f"ok  {check.__name__}")
    print(f"hopf_forge_py {hf.__version__}: all smoke checks passed")


if __name__ == "__main__":
    main()

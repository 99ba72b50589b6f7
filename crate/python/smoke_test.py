#!/usr/bin/env python3
"""Smoke test for the qbnf_py extension module.

Build the module first:

    cargo build -p qbnf-py --release

then run this script from the repository root:

    python3 python/smoke_test.py
"""

import json
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libqbnf_py.so",
        ROOT / "target" / "debug" / "libqbnf_py.so",
        ROOT / "target" / "release" / "libqbnf_py.dylib",
        ROOT / "target" / "debug" / "libqbnf_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p qbnf-py --release")
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="qbnf_py_"))
    shutil.copy(built, tmp / "qbnf_py.so")
    sys.path.insert(0, str(tmp))
    import qbnf_py

    return qbnf_py


def main():
    qbnf = load_module()
    checks = 0

    def check(name, ok):
        nonlocal checks
        checks += 1
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        if not ok:
            sys.exit(1)

    # degree-4 coefficients of the cubic well
    nf = json.loads(qbnf.forward('{"sign":"+","a":["1","0"]}', max_degree=4))
    b = {(e["j"], e["k"]): e["coeff"] for e in nf["b"]}
    check("forward: classical coefficient -15/4", b[(0, 2)] == "-15/4")
    check("forward: hbar^2 coefficient 1/2", b[(1, 0)] == "1/2")

    # roundtrip through the inverse map
    jet = '{"sign":"+","E0":"0","a":["3/2","-2/3","1/5"]}'
    nf_json = qbnf.forward(jet, max_degree=6)
    back = json.loads(qbnf.invert(nf_json, sign_choice="+"))
    check("invert recovers the jet", back["a"] == ["3/2", "-2/3", "1/5"])

    # numeric eigenvalues vs normal-form predictions
    quartic = '{"sign":"+","a":["0","1/10"]}'
    hbar = 0.02
    predicted = qbnf.predict(quartic, hbar, levels=2, max_degree=6)
    solved = qbnf.solve(quartic, hbar, levels=2)
    worst = max(abs(p - s) for p, s in zip(predicted, solved))
    check(f"prediction matches solver (worst residual {worst:.2e})", worst < 1e-6)

    # harmonic ladder and the perturbation oracle
    ladder = qbnf.predict('{"sign":"+","a":[]}', 0.1, levels=3, max_degree=4)
    check(
        "harmonic ladder",
        all(math.isclose(e, 0.1 * (n + 0.5)) for n, e in enumerate(ladder)),
    )
    check("oracle value at (1,0,0)", math.isclose(qbnf.hbar2_coefficient(1.0, 0.0, 0), -11 / 8))

    # degenerate inversion raises
    try:
        qbnf.invert('{"sign":"+","E0":"0","max_degree":4,"b":[]}')
        check("degenerate inversion raises", False)
    except ValueError:
        check("degenerate inversion raises", True)

    print(f"smoke test complete: {checks} checks passed (qbnf_py {qbnf.__version__})")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Smoke test for the relmod_py extension module.

Builds nothing itself: compile the extension first with

    cargo build -p relmod-py --release

then run this script from the repository root (or anywhere):

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = []
    for profile in ("release", "debug"):
        for stem in ("librelmod_py", "relmod_py"):
            for ext in (".so", ".dylib", ".pyd"):
                candidates.append(REPO / "target" / profile / f"{stem}{ext}")
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "relmod_py extension not found; run `cargo build -p relmod-py` first"
        )
    built.sort(key=lambda p: p.stat().st_mtime, reverse=True)
    tmp = Path(tempfile.mkdtemp(prefix="relmod-py-"))
    target = tmp / ("relmod_py" + built[0].suffix.replace(".dylib", ".so"))
    shutil.copy(built[0], target)
    sys.path.insert(0, str(tmp))
    import relmod_py

    return relmod_py


CHECKS = 0


def check(label, condition):
    global CHECKS
    if not condition:
        sys.exit(f"FAIL: {label}")
    CHECKS += 1
    print(f"PASS: {label}")


def main():
    relmod_py = load_module()

    # Structure of the three-attribute AS independence model.
    as3 = relmod_py.as_independence(3)
    check("as3 has 7 cells and 3 rows", as3.n_cells == 7 and as3.n_rows == 3)
    check("as3 lacks the overall effect", not as3.has_overall_effect())
    check("as3 has 4 degrees of freedom", as3.degrees_of_freedom() == 4)
    ratios = as3.odds_ratios()
    check(
        "exactly one non-homogeneous odds ratio",
        sum(1 for r in ratios if not r["homogeneous"]) == 1,
    )

    # Closed-form MLE: all observed mass on the all-features cell.
    result = as3.fit([0, 0, 0, 0, 0, 0, 1])
    c = 2 ** (1 / 3) - 1
    gamma_expected = 2 - 4 ** (1 / 3)
    check(
        "gamma matches 2 - cbrt(4)",
        math.isclose(result["gamma"], gamma_expected, abs_tol=1e-8),
    )
    expected = [c, c, c, c * c, c * c, c * c, c**3]
    check(
        "fitted probabilities match the closed form",
        max(abs(a - b) for a, b in zip(result["p_hat"], expected)) < 1e-8,
    )

    # Existence certification under the augmented model.
    as3_bar = as3.add_overall()
    report = as3_bar.exists([0, 0, 0, 0, 0, 0, 1])
    check("no positive MLE under the augmented model", not report["exists_positive"])
    check("facial set is {1,4,5,7}", report["facial_set"] == [1, 4, 5, 7])

    # The extended MLE is the observed point mass.
    extended = as3_bar.fit([0, 0, 0, 0, 0, 0, 1])
    check("extended fit flags the boundary", extended["extended"])
    check(
        "extended fit is the point mass",
        math.isclose(extended["p_hat"][6], 1.0, abs_tol=1e-10),
    )

    # Homogenization of the two-feature model is 2x2 independence.
    crabs = relmod_py.Model(
        [[1, 0, 1], [0, 1, 1]], ["10", "01", "11"], name="crabs"
    )
    hom = crabs.homogenize()
    check(
        "homogenized crabs is the 2x2 independence model",
        hom.matrix == [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1]]
        and hom.cells == ["00", "10", "01", "11"],
    )
    check(
        "homogenization matches mutual independence",
        hom.matrix == relmod_py.mutual_independence(2).matrix,
    )
    reduced, reduction = hom.remove_overall()
    check("dehomogenization removes the new cell", reduction["removed_cells"] == [1])
    check("dehomogenization recovers the model", reduced.matrix == crabs.matrix)

    # JSON round trip.
    again = relmod_py.Model.from_json(crabs.to_json())
    check("model JSON round-trips", again.matrix == crabs.matrix)

    # Membership diagnosis of the published loss-of-potential estimates.
    elp = relmod_py.Model(
        [[1, 0, 0, 1, 1, 0], [0, 1, 0, 1, 0, 1], [0, 0, 1, 0, 1, 1]],
        ["*DB", "M*B", "MD*", "**B", "*D*", "M**"],
        name="elp",
    )
    residuals = elp.membership_residuals([0.35, 0.08, 0.49, 0.01, 0.06, 0.01])
    check(
        "published ELP estimates violate the model",
        max(abs(r) for r in residuals) > 0.5,
    )

    # Oracle agreement on a small instance.
    ex21 = relmod_py.Model([[1, 1, 1, 0], [0, 0, 1, 1]], ["c1", "c2", "c3", "c4"])
    fit = ex21.fit([1, 1, 1, 1])
    oracle = ex21.oracle([1, 1, 1, 1])
    check(
        "oracle agrees with the solver",
        max(abs(a - b) for a, b in zip(fit["p_hat"], oracle["p_star"])) < 1e-4,
    )

    print(f"\nsmoke test OK ({CHECKS} checks)")
    print(json.dumps({"gamma": result["gamma"], "checks": CHECKS}))


if __name__ == "__main__":
    main()

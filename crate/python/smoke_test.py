"""Quick check that the extension module loads and agrees with itself."""

import json
import math
import pathlib

import mopcd_py

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "configs"


def main():
    ws = mopcd_py.WeightSystem.gaussian_drifts([1.0, -1.0])
    p = ws.type2([1, 1])
    assert abs(p[0] + 2.0) < 1e-12 and abs(p[1]) < 1e-12 and p[2] == 1.0, p

    k = ws.kernel([2, 2])
    for x, y in [(0.3, -1.1), (1.7, 0.2)]:
        assert math.isclose(k.cd(x, y), k.direct(x, y), rel_tol=1e-8, abs_tol=1e-12)
    assert k.n == 4

    report = ws.verify([1, 1])
    assert report["pass"], [r for r in report["identities"] if not r["pass"]]

    exact = mopcd_py.WeightSystem.from_json((CONFIGS / "three_atoms.json").read_text())
    assert exact.exact
    assert exact.type2([1, 1]) == ["4/9", "-19/9", "1"]
    try:
        exact.kernel([2, 1])
    except mopcd_py.MopcdError as e:
        assert e.args[0] == "ZeroNormalization", e.args
    else:
        raise AssertionError("expected ZeroNormalization")

    cmp = mopcd_py.density_compare([1.0, -1.0], [3, 3], samples=20_000, seed=1)
    summary = cmp["summary"]
    assert summary["samples"] == 20_000 and summary["p_value"] >= 0.0
    print(json.dumps({"type2": p, "verify": report["pass"], "rmt": summary}, indent=2))
    print("smoke test passed")


if __name__ == "__main__":
    main()

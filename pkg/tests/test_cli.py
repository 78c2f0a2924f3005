import json

import numpy as np

from gencusp.cli import main
from gencusp.cusp_groups import BlownUpWeylPoint
from gencusp.invariants import are_conjugate
from gencusp.sampling import random_cusp
from gencusp.cli import parse_cusp_params


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _params(lam, kap, B=None, orth=False):
    out = {"n": len(lam), "lambda": lam, "kappa": kap, "orthonormalized": orth}
    if B is not None:
        out["B"] = B
    return out


def test_build_standard(tmp_path, capsys):
    src = _write(tmp_path, "p.json", _params([0.0, 0, 0], [0.0, 0.0]))
    out = str(tmp_path / "cusp.json")
    assert main(["build", src, "--out", out]) == 0
    data = json.loads(open(out).read())
    assert data["lambda"] == [0.0, 0.0, 0.0]
    assert data["rescaled"] is False


def test_build_rescales_det_two(tmp_path):
    src = _write(tmp_path, "p.json",
                 _params([0.0, 1.0, 2.0], [0.0, 0.0], B=[[2.0, 0.0], [0.0, 2.0]]))
    out = str(tmp_path / "cusp.json")
    assert main(["build", src, "--out", out]) == 0
    data = json.loads(open(out).read())
    assert data["rescaled"] is True
    assert "note" in data
    assert abs(abs(np.linalg.det(np.array(data["B"]))) - 1) < 1e-12
    assert abs(data["lambda"][2] - 4.0) < 1e-12  # lambda scaled by det^(1/(n-1)) = 2


def test_build_malformed_kappa_names_field(tmp_path, capsys):
    src = _write(tmp_path, "p.json", _params([0.0, 0, 0], [0.0, 0.0, 0.0]))
    assert main(["build", src]) == 1
    assert "kappa" in capsys.readouterr().err


def test_build_bad_json_is_validation_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{nope")
    assert main(["build", str(path)]) == 1


def test_missing_file_is_io_error(tmp_path):
    assert main(["build", str(tmp_path / "absent.json")]) == 3


def test_invariants_blocks(tmp_path):
    src = _write(tmp_path, "p.json", _params([0.0, 1.0, 2.0], [0.0, 0.0]))
    out = str(tmp_path / "inv.json")
    assert main(["invariants", src, "--out", out]) == 0
    data = json.loads(open(out).read())
    assert set(data) == {"eta", "nu", "shape", "coords3d", "cross_check"}
    assert data["nu"]["type"] == 2
    assert data["nu"]["varpi"] == 0.0
    assert data["cross_check"]["cubic_routes_residual"] <= 1e-5
    w, h, r = data["coords3d"]["w"], data["coords3d"]["h"], data["coords3d"]["r"]
    assert abs(w[0]) < 1e-9 and abs(w[1] - 1) < 1e-9
    assert abs(12 * h[0] - 1) < 1e-8 and abs(12 * h[1] - 2) < 1e-8
    assert abs(12 * r[0] - 3) < 1e-8 and abs(12 * r[1] + 6) < 1e-8


def test_invariants_flags_higher_dimensions(tmp_path):
    src = _write(tmp_path, "p.json", _params([0.0, 0, 1, 2], [0.0, 0, 0]))
    out = str(tmp_path / "inv.json")
    assert main(["invariants", src, "--out", out]) == 0
    data = json.loads(open(out).read())
    assert data["coords3d"] == {"note": "n != 3"}


def test_conjugate_command(tmp_path):
    a = _write(tmp_path, "a.json", _params([0.0, 0, 1], [0.5, 0.0]))
    b = _write(tmp_path, "b.json", _params([0.0, 0, 1], [0.9, 0.0]))
    out = str(tmp_path / "res.json")
    assert main(["conjugate", a, a, "--out", out]) == 0
    assert json.loads(open(out).read())["conjugate"] is True
    assert main(["conjugate", a, b, "--out", out]) == 0
    assert json.loads(open(out).read())["conjugate"] is False


def test_recover_psi_from_invariants_file(tmp_path):
    src = _write(tmp_path, "p.json", _params([0.0, 1.0, 2.0], [0.0, 0.0]))
    inv = str(tmp_path / "inv.json")
    main(["invariants", src, "--out", inv])
    out = str(tmp_path / "psi.json")
    assert main(["recover", "psi", inv, "--out", out]) == 0
    data = json.loads(open(out).read())
    assert data["type"] == 2
    from gencusp.invariants import marked_psi_normal_form

    p = BlownUpWeylPoint(3, np.array([0.0, 1, 2]), np.zeros(2))
    assert np.max(np.abs(np.array(data["psi"]) - marked_psi_normal_form(p).psi)) < 1e-6


def test_recover_weights_and_shape_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    c = random_cusp(rng, 3)
    src = _write(tmp_path, "c.json", {
        "n": 3,
        "lambda": list(map(float, c.params.lam)),
        "kappa": list(map(float, c.params.kappa)),
        "B": [[float(v) for v in row] for row in np.asarray(c.marking)],
        "orthonormalized": bool(c.orthonormalized),
    })
    inv = str(tmp_path / "inv.json")
    main(["invariants", src, "--out", inv])
    for kind in ("weights", "shape"):
        out = str(tmp_path / ("rec_%s.json" % kind))
        assert main(["recover", kind, inv, "--out", out]) == 0
        rec = parse_cusp_params(json.loads(open(out).read()))
        assert are_conjugate(rec, c, tol=1e-4)


def test_verify_deterministic_and_green(tmp_path):
    out1 = str(tmp_path / "r1.json")
    out2 = str(tmp_path / "r2.json")
    assert main(["verify", "--samples", "6", "--dims", "3,4", "--out", out1]) == 0
    assert main(["verify", "--samples", "6", "--dims", "3,4", "--out", out2]) == 0
    b1 = open(out1, "rb").read()
    assert b1 == open(out2, "rb").read()
    report = json.loads(b1)
    assert report["passed"] is True
    names = [c["name"] for c in report["checks"]]
    assert names == sorted(names)
    assert all("anchor" in c for c in report["checks"])


def test_global_flags_parse_on_either_side_of_subcommand(tmp_path):
    out1 = str(tmp_path / "r1.json")
    out2 = str(tmp_path / "r2.json")
    assert main(["verify", "--seed", "9", "--samples", "3", "--dims", "3", "--out", out1]) == 0
    assert main(["--seed", "9", "verify", "--samples", "3", "--dims", "3", "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()
    assert json.loads(open(out1).read())["seed"] == 9


def test_verify_mutation_flags_varpi_check(monkeypatch):
    # a sign error planted in the varpi estimator must flip exactly the
    # varpi closed-form check
    import gencusp.invariants as inv_mod
    from gencusp.verify import CHECKS, _rng_for

    orig = inv_mod.WeightData.varpi
    monkeypatch.setattr(
        inv_mod.WeightData, "varpi",
        property(lambda self: -orig.fget(self)),
    )
    check = next(c for c in CHECKS if c["name"] == "varpi-closed-form")
    residual, _ = check["fn"](_rng_for(0, check["name"]), 10, (3, 4))
    assert residual > check["threshold"]


def test_verify_exit_code_on_failure(monkeypatch, tmp_path):
    import gencusp.verify as verify_mod

    def broken_battery(seed=0, samples=50, dims=(3, 4, 5)):
        return {
            "seed": seed, "samples": samples, "dims": list(dims),
            "passed": False,
            "checks": [{"name": "some-check", "anchor": "a", "samples": 1,
                        "max_residual": 1.0, "threshold": 0.0,
                        "detection": False, "passed": False}],
        }

    monkeypatch.setattr(verify_mod, "run_battery", broken_battery)
    out = str(tmp_path / "r.json")
    assert main(["verify", "--samples", "1", "--out", out]) == 2


def test_mesh_command(tmp_path):
    src = _write(tmp_path, "p.json", _params([0.0, 1.0, 2.0], [0.0, 0.0]))
    out = str(tmp_path / "mesh.csv")
    obj = str(tmp_path / "mesh.obj")
    assert main(["mesh", src, "--grid", "6x7", "--out", out, "--obj", obj]) == 0
    assert len(open(out).read().strip().split("\n")) == 43
    assert main(["mesh", src, "--grid", "bogus", "--out", out]) == 1


def test_limit_demo(tmp_path, capsys):
    out = str(tmp_path / "table.txt")
    assert main(["limit-demo", "--kappa", "1,1", "--m-max", "10000", "--out", out]) == 0
    lines = open(out).read().strip().split("\n")
    assert len(lines) == 5  # header + m in {10,100,1000,10000}
    dists = [float(l.split()[2]) for l in lines[1:]]
    ratios = [a / b for a, b in zip(dists, dists[1:])]
    assert all(abs(r - 10) <= 1 for r in ratios)
    assert main(["limit-demo", "--kappa", "1,0"]) == 1  # kappa must be in (0,1]


def test_build_output_roundtrips_bit_exactly(tmp_path):
    rng = np.random.default_rng(3)
    c = random_cusp(rng, 4)
    src = _write(tmp_path, "raw.json", {
        "n": 4,
        "lambda": list(map(float, c.params.lam)),
        "kappa": list(map(float, c.params.kappa)),
        "B": [[float(v) for v in row] for row in np.asarray(c.marking)],
        "orthonormalized": bool(c.orthonormalized),
    })
    out1, out2 = str(tmp_path / "c1.json"), str(tmp_path / "c2.json")
    assert main(["build", src, "--out", out1]) == 0
    assert main(["build", out1, "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()
    back = parse_cusp_params(json.loads(open(out1).read()))
    assert np.array_equal(back.params.lam, c.params.lam)
    assert np.array_equal(np.asarray(back.marking), np.asarray(c.marking))


def test_invariant_json_round12_is_diff_clean(tmp_path):
    src = _write(tmp_path, "p.json", _params([0.0, 1.0, 2.0], [0.0, 0.0]))
    out1, out2 = str(tmp_path / "i1.json"), str(tmp_path / "i2.json")
    main(["invariants", src, "--out", out1])
    main(["invariants", src, "--out", out2])
    assert open(out1, "rb").read() == open(out2, "rb").read()

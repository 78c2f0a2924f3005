"""Command-line surface: build cusps, emit invariants, test conjugacy,
recover parameters from invariants, run the verification battery, export
meshes, and demonstrate the diagonalizable-approximation limit.

Exit codes: 0 ok, 1 validation error, 2 numerical failure, 3 I/O error.
All randomness sits behind --seed; outputs are canonical JSON (sorted keys)
so runs with the same seed are byte-identical.
"""

import argparse
import json
import sys

import numpy as np

from .cusp_groups import (
    BlownUpWeylPoint,
    build_marked_cusp,
    lie_algebra_phi,
)
from .invariants import (
    CharacterData,
    CompleteInvariant,
    WeightData,
    complete_invariant,
    eta_distance,
    realize_weight_data,
    recover_psi_from_invariant,
    weight_data,
)
from .linalg import expm
from .shape import CubicPoly, ShapeInvariant, cubic_from_weights, recover_cusp_from_shape, shape_invariant
from . import dim3


class ValidationError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _round12(x):
    return round(float(x), 12) + 0.0  # normalize -0.0


def _matrix12(m):
    return [[_round12(v) for v in row] for row in np.asarray(m)]


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError("cannot write %r: %s" % (out, exc)) from exc


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError("cannot read %r: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise ValidationError("%s: invalid JSON: %s" % (path, exc)) from exc


def _require(data, key, kind, path):
    if key not in data:
        raise ValidationError("%s: missing field %r" % (path, key))
    value = data[key]
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValidationError("%s: field %r must be an integer" % (path, key))
    elif kind == "vector":
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ValidationError("%s: field %r must be a list of reals" % (path, key))
    elif kind == "matrix":
        if not isinstance(value, list) or not all(
            isinstance(row, list)
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row)
            for row in value
        ):
            raise ValidationError("%s: field %r must be a matrix of reals" % (path, key))
    return value


def parse_cusp_params(data, path="<input>"):
    n = _require(data, "n", "int", path)
    lam = _require(data, "lambda", "vector", path)
    kap = _require(data, "kappa", "vector", path)
    if len(lam) != n:
        raise ValidationError("%s: lambda: expected length n=%d, got %d" % (path, n, len(lam)))
    if len(kap) != n - 1:
        raise ValidationError(
            "%s: kappa: expected length n-1=%d, got %d" % (path, n - 1, len(kap))
        )
    marking = None
    if "B" in data and data["B"] is not None:
        b = _require(data, "B", "matrix", path)
        if len(b) != n - 1 or any(len(row) != n - 1 for row in b):
            raise ValidationError("%s: B: expected an (n-1)x(n-1) matrix" % path)
        marking = np.array(b, dtype=float)
    orth = bool(data.get("orthonormalized", False))
    try:
        p = BlownUpWeylPoint(n, np.array(lam, dtype=float), np.array(kap, dtype=float))
        return build_marked_cusp(p, marking, orthonormalized=orth)
    except ValueError as exc:
        raise ValidationError("%s: %s" % (path, exc)) from exc


def cusp_to_dict(cusp):
    return {
        "n": cusp.n,
        "lambda": [float(v) for v in cusp.params.lam],
        "kappa": [float(v) for v in cusp.params.kappa],
        "B": [[float(v) for v in row] for row in np.asarray(cusp.marking)],
        "orthonormalized": bool(cusp.orthonormalized),
        "rescaled": bool(cusp.rescaled),
    }


def cmd_build(args):
    data = _load_json(args.params)
    cusp = parse_cusp_params(data, args.params)
    out = cusp_to_dict(cusp)
    if cusp.rescaled:
        out["note"] = "marking determinant folded into lambda (rescaled)"
    _write(canonical_json(out), args.out)
    return 0


def _shape_to_dict(s):
    return {
        "q": _matrix12(s.q),
        "c": {
            ",".join(str(e) for e in exps): _round12(v)
            for exps, v in sorted(s.c.monomials().items())
            if abs(v) > 1e-15
        },
    }


def _shape_from_dict(data, dim, path):
    q = np.array(_require(data, "q", "matrix", path), dtype=float)
    mono = {}
    for key, val in data.get("c", {}).items():
        exps = tuple(int(t) for t in key.split(","))
        if len(exps) != q.shape[0] or sum(exps) != 3:
            raise ValidationError("%s: c: bad monomial key %r" % (path, key))
        mono[exps] = float(val)
    return ShapeInvariant(q, CubicPoly.from_monomials(q.shape[0], mono))


def invariants_payload(cusp, tol=1e-8):
    eta = complete_invariant(cusp)
    nu = weight_data(cusp)
    s = shape_invariant(cusp, "closed")
    from_weights = cubic_from_weights(nu)
    payload = {
        "eta": {
            "weights": _matrix12(eta.character.weights),
            "beta": _matrix12(eta.metric),
        },
        "nu": {
            "weights": _matrix12(nu.weights),
            "beta": _matrix12(nu.metric),
            "varpi": _round12(max(nu.varpi, 0.0)),
            "type": int(nu.type_t),
        },
        "shape": _shape_to_dict(s),
        "cross_check": {"cubic_routes_residual": _round12(s.distance(from_weights))},
    }
    if cusp.n == 3:
        coords = dim3.coords_from_shape(s)
        payload["coords3d"] = {
            "w": [_round12(coords.w.real), _round12(coords.w.imag)],
            "h": [_round12(coords.h.real), _round12(coords.h.imag)],
            "r": [_round12(coords.r.real), _round12(coords.r.imag)],
        }
    else:
        payload["coords3d"] = {"note": "n != 3"}
    return payload


def cmd_invariants(args):
    cusp = parse_cusp_params(_load_json(args.cusp), args.cusp)
    payload = invariants_payload(cusp, tol=args.tol)
    if payload["cross_check"]["cubic_routes_residual"] > 1e-5:
        raise RuntimeError(
            "invariant cross-check failed: cubic route residual %g"
            % payload["cross_check"]["cubic_routes_residual"]
        )
    _write(canonical_json(payload), args.out)
    return 0


def cmd_conjugate(args):
    c1 = parse_cusp_params(_load_json(args.cusp1), args.cusp1)
    c2 = parse_cusp_params(_load_json(args.cusp2), args.cusp2)
    if c1.n != c2.n:
        raise ValidationError("cusps have different dimensions %d and %d" % (c1.n, c2.n))
    dist = eta_distance(complete_invariant(c1), complete_invariant(c2))
    _write(
        canonical_json({"conjugate": bool(dist <= args.tol), "eta_distance": _round12(dist)}),
        args.out,
    )
    return 0


def _eta_from_dict(data, path):
    block = data.get("eta", data)
    w = np.array(_require(block, "weights", "matrix", path), dtype=float)
    beta = np.array(_require(block, "beta", "matrix", path), dtype=float)
    return CompleteInvariant(CharacterData(w), beta)


def _nu_from_dict(data, path):
    block = data.get("nu", data)
    w = np.array(_require(block, "weights", "matrix", path), dtype=float)
    beta = np.array(_require(block, "beta", "matrix", path), dtype=float)
    return WeightData(w, beta)


def cmd_recover(args):
    data = _load_json(args.source)
    if args.kind == "psi":
        eta = _eta_from_dict(data, args.source)
        psi = recover_psi_from_invariant(eta)
        _write(
            canonical_json(
                {"psi": [_round12(v) for v in psi.psi], "type": int(psi.type_t)}
            ),
            args.out,
        )
        return 0
    if args.kind == "weights":
        cusp = realize_weight_data(_nu_from_dict(data, args.source))
    else:
        block = data.get("shape", data)
        dim = len(_require(block, "q", "matrix", args.source))
        cusp = recover_cusp_from_shape(
            _shape_from_dict(block, dim, args.source), seed=args.seed
        )
    _write(canonical_json(cusp_to_dict(cusp)), args.out)
    return 0


def cmd_verify(args):
    from .verify import run_battery

    dims = tuple(int(d) for d in args.dims.split(","))
    report = run_battery(seed=args.seed, samples=args.samples, dims=dims)
    _write(canonical_json(report), args.out)
    if not report["passed"]:
        failing = [c["name"] for c in report["checks"] if not c["passed"]]
        sys.stderr.write("verification failed: %s\n" % ", ".join(failing))
        return 2
    return 0


def cmd_mesh(args):
    cusp = parse_cusp_params(_load_json(args.cusp), args.cusp)
    try:
        g1, g2 = (int(t) for t in args.grid.lower().split("x"))
    except ValueError as exc:
        raise ValidationError("grid: expected g1xg2, got %r" % args.grid) from exc
    rows = dim3.export_mesh_csv(cusp.params, (g1, g2), args.out)
    if args.obj:
        dim3.export_mesh_obj(cusp.params, (g1, g2), args.obj)
    sys.stdout.write("wrote %d rows to %s\n" % (rows, args.out))
    return 0


def limit_demo_rows(kappa, m_max, n):
    """Convergence table of the diagonalizable family (lam0 = 1/m) toward its
    lam0 = 0 limit with kappa fixed: generator and invariant distances."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0) or np.any(kappa > 1):
        raise ValidationError("kappa entries must lie in (0, 1]")
    order = np.argsort(-kappa)  # descending kappa gives ascending lambda
    kap = kappa[order]
    limit_point = BlownUpWeylPoint(n, np.zeros(n), kap)
    limit_gens = [
        expm(lie_algebra_phi(limit_point, col)) for col in np.eye(n - 1)
    ]
    limit_eta = complete_invariant(build_marked_cusp(limit_point))
    rows = []
    m = 10
    while m <= m_max:
        lam = np.concatenate([[1.0 / m], (1.0 / m) / kap])
        p = BlownUpWeylPoint(n, lam, kap)
        gens = [expm(lie_algebra_phi(p, col)) for col in np.eye(n - 1)]
        gen_dist = max(
            float(np.max(np.abs(a - b))) for a, b in zip(gens, limit_gens)
        )
        inv_dist = eta_distance(complete_invariant(build_marked_cusp(p)), limit_eta)
        rows.append(
            {
                "m": m,
                "lambda0": 1.0 / m,
                "generator_distance": gen_dist,
                "invariant_distance": inv_dist,
            }
        )
        m *= 10
    return rows


def cmd_limit_demo(args):
    try:
        kappa = [float(t) for t in args.kappa.split(",")]
    except ValueError as exc:
        raise ValidationError("kappa: expected comma-separated reals") from exc
    n = args.n if args.n else len(kappa) + 1
    if len(kappa) != n - 1:
        raise ValidationError("kappa: expected n-1=%d entries, got %d" % (n - 1, len(kappa)))
    rows = limit_demo_rows(kappa, args.m_max, n)
    lines = ["%12s %16s %20s %20s" % ("m", "lambda0", "generator_distance", "invariant_distance")]
    for row in rows:
        lines.append(
            "%12d %16.6e %20.6e %20.6e"
            % (row["m"], row["lambda0"], row["generator_distance"], row["invariant_distance"])
        )
    for prev, cur in zip(rows, rows[1:]):
        if not cur["generator_distance"] < prev["generator_distance"]:
            raise RuntimeError("generator distances are not decreasing")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def make_parser():
    # the global flags parse on either side of the subcommand; SUPPRESS plus
    # post-parse defaults keeps the subcommand pass from clobbering values
    # given before it (set_defaults would mutate the shared parent actions)
    def global_flags(p):
        p.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                       help="comparison tolerance (default 1e-8)")
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                       help="seed for all randomness (default 0)")
        return p

    parser = global_flags(_Parser(prog="gencusp", description=__doc__))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, **kw):
        return global_flags(sub.add_parser(name, **kw))

    p_build = add("build", help="normalize cusp parameters to a canonical file")
    p_build.add_argument("params")
    p_build.add_argument("--out")
    p_build.set_defaults(fn=cmd_build)

    p_inv = add("invariants", help="emit eta, nu, shape, and (w,h,r) blocks")
    p_inv.add_argument("cusp")
    p_inv.add_argument("--out")
    p_inv.set_defaults(fn=cmd_invariants)

    p_conj = add("conjugate", help="decide conjugacy of two cusp files")
    p_conj.add_argument("cusp1")
    p_conj.add_argument("cusp2")
    p_conj.add_argument("--out")
    p_conj.set_defaults(fn=cmd_conjugate)

    p_rec = add("recover", help="invert an invariant back to parameters")
    p_rec.add_argument("kind", choices=("psi", "weights", "shape"))
    p_rec.add_argument("source")
    p_rec.add_argument("--out")
    p_rec.set_defaults(fn=cmd_recover)

    p_ver = add("verify", help="run the verification battery")
    p_ver.add_argument("--samples", type=int, default=50)
    p_ver.add_argument("--dims", default="3,4,5")
    p_ver.add_argument("--out")
    p_ver.set_defaults(fn=cmd_verify)

    p_mesh = add("mesh", help="export the boundary surface as CSV/OBJ")
    p_mesh.add_argument("cusp")
    p_mesh.add_argument("--grid", default="20x20")
    p_mesh.add_argument("--out", required=True)
    p_mesh.add_argument("--obj")
    p_mesh.set_defaults(fn=cmd_mesh)

    p_lim = add("limit-demo", help="convergence of diagonalizable approximations")
    p_lim.add_argument("--kappa", required=True)
    p_lim.add_argument("--m-max", type=int, default=10000)
    p_lim.add_argument("--n", type=int, default=0)
    p_lim.add_argument("--out")
    p_lim.set_defaults(fn=cmd_limit_demo)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "tol"):
            args.tol = 1e-8
        if not hasattr(args, "seed"):
            args.seed = 0
        return args.fn(args)
    except ValidationError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except OSError as exc:
        sys.stderr.write("i/o error: %s\n" % exc)
        return 3
    except (ValueError, RuntimeError, OverflowError) as exc:
        sys.stderr.write("numerical error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())

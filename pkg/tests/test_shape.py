import numpy as np
import pytest

from gencusp.cusp_groups import (
    BlownUpWeylPoint,
    PsiParameter,
    build_marked_cusp,
    hypersurface_F,
    psi_to_lambda,
)
from gencusp.invariants import are_conjugate, weight_data
from gencusp.linalg import maxerr
from gencusp.sampling import random_cusp, random_marking
from gencusp.shape import (
    CubicPoly,
    J_psi_eval,
    ShapeInvariant,
    affine_normal_at_base,
    cubic_from_weights,
    fit_height_jet,
    height_at,
    is_affine_sphere,
    radial_projection,
    recover_cusp_from_shape,
    restricted_diag_calibration,
    shape_invariant,
    sphere_local_maxima,
)


def _cusp(lam, kap, marking=None, **kw):
    p = BlownUpWeylPoint(len(lam), np.asarray(lam, float), np.asarray(kap, float))
    return build_marked_cusp(p, marking, **kw)


def test_height_at_basics():
    c = _cusp([0, 0, 0], [0, 0])
    assert height_at(c, np.zeros(2)) == 0.0
    v = np.array([0.3, -0.5])
    assert abs(height_at(c, v) - 0.5 * v @ v) < 1e-14
    # h >= 0 on a ball sample for every valid cusp
    rng = np.random.default_rng(0)
    for _ in range(5):
        cc = random_cusp(rng, 4)
        for _ in range(20):
            assert height_at(cc, rng.uniform(-0.5, 0.5, 3)) >= 0.0


def test_shape_invariant_examples():
    s = shape_invariant(_cusp([0, 0, 0], [0, 0]), "closed")
    assert maxerr(s.q, np.eye(2)) < 1e-14
    assert s.c.coeff_norm() < 1e-14

    s = shape_invariant(_cusp([0, 1, 2], [0, 0]), "closed")
    assert maxerr(s.q, np.eye(2)) < 1e-14
    mono = s.c.monomials()
    assert abs(3 * mono[(3, 0)] - 1.0) < 1e-14
    assert abs(3 * mono[(0, 3)] - 2.0) < 1e-14

    # equal-parameter model: cubic proportional to -v1 v2 (v1+v2) pattern
    s = shape_invariant(_cusp([1, 1, 1], [1, 1]), "closed")
    mono = {k: v for k, v in s.c.monomials().items()}
    raw = CubicPoly.from_monomials(2, {
        (2, 1): -1.0, (1, 2): -1.0}).tensor  # v1 v2 (v1 + v2)
    ratio = mono[(2, 1)] / raw[0, 0, 1] / 3
    assert abs(mono[(2, 1)] - mono[(1, 2)]) < 1e-14
    assert abs(mono[(3, 0)] - mono[(0, 3)]) < 1e-12


def test_shape_fit_matches_closed():
    rng = np.random.default_rng(1)
    for _ in range(8):
        c = random_cusp(rng, int(rng.integers(3, 5)))
        assert shape_invariant(c, "fit").distance(shape_invariant(c, "closed")) < 1e-5


def test_triple_route_agreement():
    rng = np.random.default_rng(2)
    for _ in range(12):
        c = random_cusp(rng, int(rng.integers(3, 5)))
        s_closed = shape_invariant(c, "closed")
        s_weights = cubic_from_weights(weight_data(c))
        assert s_weights.distance(s_closed) < 1e-8


def test_jet_hessian_matches_finite_differences():
    rng = np.random.default_rng(3)
    c = random_cusp(rng, 3)
    q_fit, _ = fit_height_jet(c)
    step = 1e-3
    fd = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            pp = step * (np.eye(2)[i] + np.eye(2)[j])
            pm = step * (np.eye(2)[i] - np.eye(2)[j])
            fd[i, j] = (height_at(c, pp) - height_at(c, pm)
                        - height_at(c, -pm) + height_at(c, -pp)) / (4 * step * step)
    assert maxerr(2 * q_fit, fd) < 1e-4 * max(1.0, np.max(np.abs(fd)))


def test_J_psi_eval():
    assert J_psi_eval(np.ones(3), np.zeros(3)) == 0.0
    assert abs(J_psi_eval(np.ones(3), np.array([1.0, -1, 0])) - 1.0) < 1e-14
    assert abs(J_psi_eval(np.ones(3), np.array([2.0, -1, -1])) - 4.0) < 1e-14
    with pytest.raises(ValueError):
        J_psi_eval(np.ones(3), np.array([1.0, 1, 0]))


def test_cubic_from_weights_examples():
    wd = weight_data(_cusp([0, 0, 0], [0.5, 0.5]))
    s = cubic_from_weights(wd)
    assert s.c.coeff_norm() < 1e-14
    wd = weight_data(_cusp([0, 1, 2], [0, 0]))
    s = cubic_from_weights(wd)
    mono = s.c.monomials()
    assert abs(3 * mono[(3, 0)] - 1.0) < 1e-12
    assert abs(3 * mono[(0, 3)] - 2.0) < 1e-12


def test_radial_projection_and_normal():
    q = np.eye(2)
    radial = CubicPoly.from_monomials(2, {(3, 0): 1.0, (1, 2): 1.0})
    assert maxerr(radial_projection(q, radial), [1.0, 0.0]) < 1e-12
    harmonic = CubicPoly.from_monomials(2, {(3, 0): 1.0, (1, 2): -3.0})
    assert np.max(np.abs(radial_projection(q, harmonic))) < 1e-12
    assert maxerr(affine_normal_at_base(q, radial), [1.0, -0.25, 0.0]) < 1e-12
    assert maxerr(affine_normal_at_base(q, CubicPoly.zero(2)), [1.0, 0, 0]) < 1e-15


def test_equal_parameter_model_is_harmonic():
    s = shape_invariant(_cusp([1, 1, 1], [1, 1]), "closed")
    assert np.linalg.norm(radial_projection(s.q, s.c)) < 1e-12


def test_affine_sphere_predicate():
    assert is_affine_sphere(_cusp([0, 0, 0], [0, 0]))
    assert is_affine_sphere(_cusp([1, 1, 1], [1, 1]))
    assert not is_affine_sphere(_cusp([0, 1, 2], [0, 0]))
    # kappa < 1 with equal positive lambda tail is not an affine sphere
    assert not is_affine_sphere(_cusp([0.5, 1, 1], [0.5, 0.5]))


def _graph_jet(p, radius=1e-2):
    """2- and 3-jet of the boundary surface as an honest graph over its
    tangent plane (the fit runs on the surface function itself, in surface
    coordinates; these differ from the group-parametrized jet at degree 3)."""
    from gencusp.shape import _monomial_exponents

    exps = _monomial_exponents(2, (2, 3, 4, 5))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (5 * len(exps), 2))
    heights = np.array([hypersurface_F(p, radius * x) for x in pts])
    design = np.column_stack([
        np.prod(pts ** np.array(e), axis=1) for e in exps])
    coeffs, *_ = np.linalg.lstsq(design, heights, rcond=None)
    q = np.zeros((2, 2))
    mono3 = {}
    for e, val in zip(exps, coeffs):
        deg = sum(e)
        val /= radius ** deg
        if deg == 2:
            i, j = [k for k, c in enumerate(e) for _ in range(c)]
            if i == j:
                q[i, i] = val
            else:
                q[i, j] = q[j, i] = val / 2
        elif deg == 3:
            mono3[e] = val
    return q, CubicPoly.from_monomials(2, mono3)


def test_affine_normal_parallel_to_radial_flow_for_spheres():
    # for an affine-sphere cusp the tilt of the affine normal away from the
    # height axis (the radial part of the graph cubic) points along the
    # radial-flow line through the basepoint; the magnitude convention is
    # fixed by the x(x^2+y^2) example above, so only directions are compared
    p = BlownUpWeylPoint(3, np.ones(3), np.ones(2))
    c = build_marked_cusp(p)
    q, cub = _graph_jet(p)
    normal = affine_normal_at_base(q, cub)
    assert normal[0] == 1.0
    from gencusp.cusp_groups import flow_center

    direction = flow_center(c)  # the flow line at the origin points at C
    tilt = normal[1:]
    dir_v = direction[1:]
    cos = abs(tilt @ dir_v) / (np.linalg.norm(tilt) * np.linalg.norm(dir_v))
    assert abs(cos - 1.0) < 1e-6
    # whereas a non-sphere cusp has a genuinely non-harmonic graph cubic
    p2 = BlownUpWeylPoint(3, np.array([0.0, 1, 2]), np.zeros(2))
    q2, cub2 = _graph_jet(p2)
    assert np.linalg.norm(radial_projection(q2, cub2)) > 1e-3


def test_sphere_maxima_nondiag_anchor():
    s = shape_invariant(_cusp([0, 1, 2], [0, 0]), "closed")
    found = sphere_local_maxima(s.q, s.c)
    pos = found.values > 0
    order = np.argsort(found.values[pos])
    vals = found.values[pos][order]
    assert len(vals) == 2
    assert maxerr(vals, [1.0 / 3.0, 2.0 / 3.0]) < 1e-9
    pts = found.points[pos][order]
    assert maxerr(pts, np.eye(2)) < 1e-9
    # the predicted extra negative maximum on the boundary type
    neg = found.values[~pos]
    assert len(neg) == 1 and abs(neg[0] + 10 / (3 * 5 ** 1.5)) < 1e-9


def test_sphere_maxima_diag_anchor():
    q, c, _ = restricted_diag_calibration(np.array([1.0, 1, 1]))
    found = sphere_local_maxima(q, c)
    assert len(found.points) == 3
    assert maxerr(found.values, np.full(3, (1 / 3.0) / np.sqrt(2 / 3.0) / 6.0)) < 1e-9
    gram = found.points @ q @ found.points.T
    off = gram[~np.eye(3, dtype=bool)]
    assert maxerr(off, np.full(6, -0.5)) < 1e-9


def test_sphere_maxima_degenerate_flag():
    out = sphere_local_maxima(np.eye(2), CubicPoly.zero(2))
    assert out.degenerate and len(out.points) == 0


def test_recover_standard_cusp():
    rec = recover_cusp_from_shape(ShapeInvariant(np.eye(2), CubicPoly.zero(2)))
    assert rec.params.type_t == 0
    q = np.array([[2.0, 0.3], [0.3, 0.55]])
    q /= np.linalg.det(q) ** 0.5
    rec = recover_cusp_from_shape(ShapeInvariant(q, CubicPoly.zero(2)))
    assert maxerr(shape_invariant(rec, "closed").q, q) < 1e-10


def test_recover_nondiag_anchor():
    src = _cusp([0, 1, 2], [0, 0])
    rec = recover_cusp_from_shape(shape_invariant(src, "closed"))
    assert maxerr(rec.params.lam, [0, 1, 2]) < 1e-8
    assert are_conjugate(rec, src)


def test_recover_diag_roundtrip():
    psi = PsiParameter(3, np.array([3.0, 2.0, 1.0]), ordered=True)
    src = build_marked_cusp(psi_to_lambda(psi), random_marking(np.random.default_rng(1), 2))
    rec = recover_cusp_from_shape(shape_invariant(src, "closed"))
    assert are_conjugate(rec, src, tol=1e-6)


def test_recover_rejects_non_cusp_shape():
    # a cubic with two non-orthogonal positive maxima of unequal "angles"
    # that fit neither branch
    c = CubicPoly.from_monomials(2, {(3, 0): 1.0, (2, 1): 1.8, (1, 2): 1.8, (0, 3): 1.0})
    with pytest.raises(ValueError):
        recover_cusp_from_shape(ShapeInvariant(np.eye(2), c))
    with pytest.raises(ValueError, match="n >= 3"):
        recover_cusp_from_shape(ShapeInvariant(np.eye(1), CubicPoly.zero(1)))


def test_recover_roundtrip_sweep():
    rng = np.random.default_rng(4)
    for n in (3, 4):
        for t in range(n + 1):
            c = random_cusp(rng, n, t=t)
            rec = recover_cusp_from_shape(shape_invariant(c, "closed"),
                                          seed=int(rng.integers(1 << 30)))
            assert are_conjugate(rec, c, tol=1e-6)


def test_recover_from_fitted_shape():
    # recovery also works on the jet-fit route's slightly noisy shapes when
    # the branch tolerance is widened accordingly
    rng = np.random.default_rng(99)
    for n in (3, 4):
        for t in range(n + 1):
            c = random_cusp(rng, n, t=t)
            rec = recover_cusp_from_shape(shape_invariant(c, "fit"), tol=1e-4,
                                          seed=int(rng.integers(1 << 30)),
                                          ortho_tol=1e-4)
            assert are_conjugate(rec, c, tol=1e-4)

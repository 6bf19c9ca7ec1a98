"""Shared fixtures: interior-point samplers for every cone kind and the
acceptance-suite summary printer."""

import numpy as np

from natcone import cones as C
from natcone.interp import build_interp
from natcone.sym import svec


def sample_barrier_point(cone, rng):
    """Random point strictly interior to the cone's barrier domain.

    For cones flagged with ``uses_dual_barrier`` the barrier domain is the
    dual cone, so the sample lives there.
    """
    tag = cone.tag
    if tag == "nonneg":
        return rng.uniform(0.2, 3.0, cone.d)
    if tag == "epinorm2":
        w = rng.standard_normal(cone.d)
        return np.concatenate(([np.linalg.norm(w) + rng.uniform(0.1, 2.0)], w))
    if tag == "epipersquare":
        w = rng.standard_normal(cone.d)
        u = rng.uniform(0.5, 2.0)
        v = (w @ w) / (2 * u) * (1 + rng.uniform(0.1, 2.0)) + 0.1
        return np.concatenate(([u, v], w))
    if tag == "possemidef":
        A = rng.standard_normal((cone.d, cone.d))
        return svec(A @ A.T + 0.2 * np.eye(cone.d))
    if tag in ("epinorminf", "epinorminfdual"):
        w = rng.uniform(-1.0, 1.0, cone.d)
        return np.concatenate(([np.max(np.abs(w)) + rng.uniform(0.1, 1.0)], w))
    if tag in ("epinormspectral", "epinormspectraldual"):
        W = rng.standard_normal((cone.r, cone.s))
        top = np.linalg.svd(W, compute_uv=False)[0]
        return np.concatenate(([top + rng.uniform(0.1, 1.0)], W.ravel(order="F")))
    if tag == "hypogeomean":
        w = rng.uniform(0.2, 2.0, cone.d)
        geo = float(np.exp(np.mean(np.log(w))))
        return np.concatenate(([geo * rng.uniform(-0.5, 0.9)], w))
    if tag == "hyporootdet":
        A = rng.standard_normal((cone.d, cone.d))
        W = A @ A.T + 0.2 * np.eye(cone.d)
        rd = float(np.exp(np.mean(np.log(np.linalg.eigvalsh(W)))))
        return np.concatenate(([rd * rng.uniform(-0.5, 0.9)], svec(W)))
    if tag == "hypoperlog":
        v = rng.uniform(0.3, 2.0)
        w = rng.uniform(0.3, 3.0, cone.d)
        return np.concatenate(([v * np.sum(np.log(w / v)) - rng.uniform(0.1, 2.0), v], w))
    if tag == "hypoperlogdet":
        A = rng.standard_normal((cone.d, cone.d))
        W = A @ A.T + 0.2 * np.eye(cone.d)
        v = rng.uniform(0.3, 2.0)
        val = v * float(np.sum(np.log(np.linalg.eigvalsh(W) / v)))
        return np.concatenate(([val - rng.uniform(0.1, 2.0), v], svec(W)))
    if tag in ("wsosdual", "wsos"):
        membership = cone._dual if tag == "wsos" else cone
        for _ in range(200):
            w = np.ones(cone.d) + 0.4 * rng.standard_normal(cone.d)
            if membership.in_interior(w):
                return w
        raise RuntimeError("could not sample a weighted-SOS interior point")
    raise ValueError(tag)


def boundary_point(cone, rng):
    """Point on the boundary: the barrier-domain defining inequality is tight."""
    pt = sample_barrier_point(cone, rng)
    tag = cone.tag
    if tag == "nonneg":
        pt[0] = 0.0
    elif tag in ("epinorm2", "epinorminf", "epinorminfdual"):
        w = pt[1:]
        norm = {"epinorm2": np.linalg.norm(w),
                "epinorminf": np.max(np.abs(w)),
                "epinorminfdual": np.max(np.abs(w))}[tag]
        pt[0] = norm
    elif tag == "epipersquare":
        pt[0] = (pt[2:] @ pt[2:]) / (2 * pt[1])
    elif tag == "possemidef":
        from natcone.sym import smat
        W = smat(pt)
        W -= np.linalg.eigvalsh(W)[0] * np.eye(cone.d)
        pt = svec(W)
    elif tag in ("epinormspectral", "epinormspectraldual"):
        W = pt[1:].reshape((cone.r, cone.s), order="F")
        pt[0] = np.linalg.svd(W, compute_uv=False)[0]
    elif tag == "hypogeomean":
        pt[0] = float(np.exp(np.mean(np.log(pt[1:]))))
    elif tag == "hyporootdet":
        from natcone.sym import smat
        pt[0] = float(np.exp(np.mean(np.log(np.linalg.eigvalsh(smat(pt[1:]))))))
    elif tag == "hypoperlog":
        pt[0] = pt[1] * float(np.sum(np.log(pt[2:] / pt[1])))
    elif tag == "hypoperlogdet":
        from natcone.sym import smat
        eigs = np.linalg.eigvalsh(smat(pt[2:]))
        pt[0] = pt[1] * float(np.sum(np.log(eigs / pt[1])))
    elif tag in ("wsosdual", "wsos"):
        # scale towards a direction that exits the cone until the margin flips
        direction = rng.standard_normal(cone.d)
        membership = cone._dual if tag == "wsos" else cone
        lo, hi = 0.0, 1.0
        while membership.in_interior(pt + hi * direction):
            hi *= 2.0
            if hi > 1e6:
                raise RuntimeError("direction never leaves the cone")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if membership.in_interior(pt + mid * direction):
                lo = mid
            else:
                hi = mid
        pt = pt + hi * direction
    return pt


def small_catalog(include_wsos=True):
    """One modest instance of every cone kind."""
    cones = [
        C.Nonneg(4),
        C.EpiNorm2(3),
        C.EpiPerSquare(3),
        C.PosSemidef(3),
        C.EpiNormInf(4),
        C.EpiNormInfDual(4),
        C.EpiNormSpectral(2, 3),
        C.EpiNormSpectralDual(2, 3),
        C.HypoGeomean(4),
        C.HypoRootDet(3),
        C.HypoPerLog(3),
        C.HypoPerLogDet(3),
    ]
    if include_wsos:
        cones.append(C.WsosDual(build_interp(1, 2).P))
        cones.append(C.Wsos(build_interp(2, 1).P))
    return cones


_CRITERIA = {
    "test_criterion_1": "rewrite dimension accounting for every cone kind",
    "test_criterion_2": "benchmark dimension reproduction (printed statistics)",
    "test_criterion_3": "barrier oracle suite (homogeneity, FD, PD)",
    "test_criterion_4": "solver correctness on analytic instances",
    "test_criterion_5": "natural/extended objective agreement",
    "test_criterion_6": "polynomial-minimization bound soundness/tightness",
    "test_criterion_7": "experiment-design variant consistency",
    "test_criterion_8": "substitute property suite (determinism, interiority, scaling)",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = getattr(rep, "location", ("", "", ""))[2]
            for key in _CRITERIA:
                if key in name:
                    ok = outcome == "passed"
                    results[key] = results.get(key, True) and ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: int(k.split("_")[2])):
        num = key.split("_")[2]
        verdict = "PASS" if results[key] else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict} - {_CRITERIA[key]}")

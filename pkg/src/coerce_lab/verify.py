"""Empirical constants of coercive inequalities over a test bank.

Each check evaluates the defining ratio of an inequality on every member
of a :class:`~coerce_lab.discretize.TestBank`. The reported constant is
the sup (or inf) of those ratios. A bank sup is a lower bound for the
true best constant, and where a grid-exact value exists (the spectral gap
for the L_2 Poincare constant) it is attached next to the sampled one.

The inequalities, with ``|grad^k f|^p = sum_{|alpha|=k} |d^alpha f|^p``:

* higher-order Poincare: ``mu|f - M_{k,q} f|^q <= c_{k,q} mu|grad^k f|^q``;
* downhill bound: the same with the top-down polynomial ``B`` in place of
  ``M`` and constant ``C_{1,q}^k``;
* weighted (Adams-type) bound:
  ``mu((1 + |grad U|)^e |f|^p) <= K ||f||_{m,p}^p``, with ``e = m p`` or
  ``e = 2^{m-1} p``;
* revised Adams:
  ``mu(|grad^k U|^p |f|^p) <= eps ||grad^k f||_p^p + K(eps) ||f||_p^p``;
* shift-minimizer properties: with ``d(f) = ||f - M_Phi f||_Phi``,
  ``|mu f - M_Phi f| <= Phi^{-1}(1) d(f) <= Phi^{-1}(1) ||f - mu f||_Phi``,
  ``||f - mu f||_Phi <= (1 + Phi^{-1}(1) ||1||_Phi) d(f)``,
  ``|d(f) - d(g)| <= ||f - g||_Phi`` and
  ``d(s f + t g) <= |s| d(f) + |t| d(g)``;
* the Orlicz chain from the Adams inequality through the Orlicz-Sobolev
  inequality ``|| |f - M|^p ||_Phi <= C mu|grad^k f|^p``;
* bounded perturbations ``dnu = e^{-V} dmu`` of norms and constants;
* equivalence of ``||f||_p + ||L^{k/2} f||_p`` with ``||f||_p + ||grad^k f||_p``;
* the convexity condition
  ``m mu|grad^k f|^2 <= mu(d_j grad^{k-1} f . (d_j d_i U) d_i grad^{k-1} f)``;
* the decay envelope
  ``mu|grad^k f_t|^2 <= C' e^{-2 m_0 t} (mu|grad^k f|^2 + Var_mu f)``.

Passing ``refine=True`` repeats a check at ``N -> 2N + 1``. The relative
change of the constant is stored as ``refinement_delta``.
"""

from __future__ import annotations

import math

import numpy as np

from . import orlicz as orl
from .dirichlet import apply_fractional, assemble_operator, dirichlet_form, spectral_decomposition, spectral_gap
from .discretize import (
    GridFunction,
    _check,
    derivative,
    grad_norm_k,
    grad_power_k,
    integrate,
    sobolev_norm,
    tilde_norm,
)
from .errors import AssumptionViolation, NodeMismatch, PairingInvalid, PRangeViolation
from .evolve import decay_curve
from .minimize import _orthonormal_basis, downhill_polynomial, lq_min_polynomial, orlicz_shift_minimizer
from .potential import base_derivatives_at, check_assumption_am, derivative_tensor_norm, gradient_norm, multi_indices
from .reports import InequalityReport

__all__ = [
    "SLACK",
    "DEGENERATE",
    "estimate_poincare",
    "poincare_eigenspace_sup",
    "check_downhill",
    "check_weighted_bound",
    "check_revised_adams",
    "check_adams_orlicz_chain",
    "check_measure_perturbation",
    "check_shift_minimizer",
    "norm_equivalence_sweep",
    "check_condition_c",
    "check_decay_envelope",
    "dirichlet_identity",
]

SLACK = 0.05
DEGENERATE = 1e-14


def _rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _refined(gm, bank, need_sd):
    gm2 = gm.refined()
    sd2 = spectral_decomposition(assemble_operator(gm2)) if need_sd or bank.n_spectral else None
    return gm2, bank.rebuild(gm2, sd2), sd2


def _finish(report, refined_report):
    if refined_report is not None:
        report.refinement_delta = _rel(report.constant, refined_report.constant)
        report.details["refined_constant"] = refined_report.constant
    return report


def _lq_distance_power(gm, f, k, q):
    r = lq_min_polynomial(gm, f, k, q)
    return r.distance**q, r


# ---------------------------------------------------------------------------
# Poincare family


def _poincare(gm, bank, k, q, sd, slack):
    ratios, skipped, nonunique = {}, [], []
    for f in bank.nonconstant():
        den = grad_power_k(gm, f, k, q)
        if den < DEGENERATE:
            skipped.append(f.name)
            continue
        num, res = _lq_distance_power(gm, f, k, q)
        if res.unique is False:
            nonunique.append(f.name)
        ratios[f.name] = num / den
    rep = InequalityReport.from_ratios(
        "poincare", {"k": k, "q": q}, ratios, skipped=skipped, grid=gm.describe()
    )
    rep.checks["finite"] = bool(np.isfinite(rep.constant))
    rep.checks["minimizers_unique"] = not nonunique
    rep.details["kind_note"] = "bank supremum (lower bound on the best constant)"
    if k == 1 and q == 2:
        if sd is None:
            sd = spectral_decomposition(assemble_operator(gm), n_eigs=2 if gm.dim == 1 else 6)
        lam1 = spectral_gap(sd)
        rep.paper_bound = 1.0 / lam1
        rep.details["grid_exact_constant"] = 1.0 / lam1
        rep.checks["below_inverse_gap"] = bool(rep.constant <= 1.0 / lam1 + 1e-6)
    if q == 2 and sd is not None and sd.count >= 10:
        rep.details["eigenspace_sup"] = poincare_eigenspace_sup(gm, sd, k)
    return rep


def estimate_poincare(gm, bank, k, q, sd=None, refine=False, slack=SLACK):
    """Bank estimate of the order-k L_q Poincare constant.

    For ``k = 1, q = 2`` the grid-exact value ``1 / lambda_1`` is attached
    and the bank sup must not exceed it. With spectral data and ``q = 2``
    the sup over the span of the first 30 eigenfunctions is attached too.
    """
    rep = _poincare(gm, bank, k, q, sd, slack)
    ref = None
    if refine:
        gm2, bank2, sd2 = _refined(gm, bank, sd is not None)
        ref = _poincare(gm2, bank2, k, q, sd2, slack)
    return _finish(rep, ref)


def poincare_eigenspace_sup(gm, sd, k, n_modes=30):
    """``sup mu|f - M_{k,2} f|^2 / mu|grad^k f|^2`` over the first eigenfunctions.

    A generalized symmetric eigenproblem on the span of ``phi_0..phi_{n-1}``;
    directions with vanishing k-th gradient are projected out first.
    """
    n = min(n_modes, sd.count)
    Phi = sd.vectors[:, :n]
    w = gm.weights.ravel()
    _, Q, _ = _orthonormal_basis(gm, k)
    C = Q.T @ (w[:, None] * Phi)
    G = Phi.T @ (w[:, None] * Phi)
    A = G - C.T @ C
    B = np.zeros((n, n))
    for alpha in multi_indices(gm.dim, k):
        D = np.column_stack(
            [derivative(gm, GridFunction(Phi[:, i].reshape(gm.shape), gm.tag), alpha).values.ravel() for i in range(n)]
        )
        B += D.T @ (w[:, None] * D)
    ev, U = np.linalg.eigh(B)
    keep = ev > 1e-10 * ev.max()
    T = U[:, keep] / np.sqrt(ev[keep])
    return float(np.linalg.eigvalsh(T.T @ A @ T).max())


def _downhill(gm, bank, k, q, c1, slack):
    bound = c1**k
    ratios, skipped, violations = {}, [], []
    for f in bank.nonconstant():
        den = grad_power_k(gm, f, k, q)
        if den < DEGENERATE:
            skipped.append(f.name)
            continue
        B = downhill_polynomial(gm, f, k, q)
        num = float(np.dot(gm.weights.ravel(), np.abs(f.values - B(*gm.coords)).ravel() ** q))
        ratios[f.name] = num / den
        if ratios[f.name] > bound * (1 + slack):
            violations.append(f.name)
    rep = InequalityReport.from_ratios(
        "downhill", {"k": k, "q": q}, ratios, skipped=skipped, paper_bound=bound, grid=gm.describe()
    )
    rep.details["first_order_constant"] = c1
    rep.details["violations"] = violations
    rep.details["slack"] = slack
    rep.checks["below_first_order_power"] = not violations
    return rep


def check_downhill(gm, bank, k, q, refine=False, slack=SLACK):
    """Top-down polynomial bound against ``(C_{1,q})^k (1 + slack)``.

    ``C_{1,q}`` is this grid's bank estimate of the first-order constant.
    """
    if not 1 <= k <= 3:
        raise ValueError("the downhill check supports 1 <= k <= 3")
    c1 = _poincare(gm, bank, 1, q, None, slack).constant
    rep = _downhill(gm, bank, k, q, c1, slack)
    ref = None
    if refine:
        gm2, bank2, _ = _refined(gm, bank, False)
        ref = _downhill(gm2, bank2, k, q, _poincare(gm2, bank2, 1, q, None, slack).constant, slack)
    return _finish(rep, ref)


# ---------------------------------------------------------------------------
# Adams-type bounds


def weighted_exponent(m, p, mode):
    if mode == "adams":
        return m * p
    if mode == "lemma8":
        return 2 ** (m - 1) * p
    raise ValueError(f"unknown mode {mode!r}")


def lemma8_p_min(m):
    return 2.0 - 2.0 ** (2 - m)


def _weighted(gm, bank, m, p, mode):
    e = weighted_exponent(m, p, mode)
    weight = (1.0 + gradient_norm(gm.potential, gm.coords)) ** e
    ratios = {}
    for f in bank:
        num = float(np.dot(gm.weights.ravel(), (weight * np.abs(f.values) ** p).ravel()))
        ratios[f.name] = num / sobolev_norm(gm, f, m, p) ** p
    rep = InequalityReport.from_ratios(
        "weighted_bound", {"m": m, "p": p, "mode": mode, "exponent": e}, ratios, grid=gm.describe()
    )
    rep.checks["finite"] = bool(np.isfinite(rep.constant))
    return rep


def check_weighted_bound(gm, bank, m, p, mode="adams", refine=False, slack=SLACK):
    """``K = sup mu((1 + |grad U|)^e |f|^p) / ||f||_{m,p}^p``.

    ``mode="adams"`` uses ``e = m p``; ``mode="lemma8"`` uses
    ``e = 2^{m-1} p`` and requires ``p >= 2 - 2^{2-m}``.
    """
    if mode == "lemma8" and p < lemma8_p_min(m):
        raise PRangeViolation(f"p = {p} is below 2 - 2^(2-m) = {lemma8_p_min(m)} for m = {m}")
    rep = _weighted(gm, bank, m, p, mode)
    ref = None
    if refine:
        gm2, bank2, _ = _refined(gm, bank, False)
        ref = _weighted(gm2, bank2, m, p, mode)
    _finish(rep, ref)
    if ref is not None:
        rep.checks["refinement_stable"] = bool(rep.refinement_delta < slack)
    return rep


def _potential_tensor_norm(gm, k):
    if k == 1:
        return gradient_norm(gm.potential, gm.coords)
    return derivative_tensor_norm(gm.potential, gm.coords, k)


def _revised(gm, bank, k, p, eps_list):
    w = gm.weights.ravel()
    V = (_potential_tensor_norm(gm, k) ** p).ravel()
    K = {}
    tables = {}
    for eps in eps_list:
        ratios = {}
        for f in bank:
            fp = grad_power_k(gm, f, 0, p)
            num = float(np.dot(w, V * np.abs(f.values.ravel()) ** p)) - eps * grad_power_k(gm, f, k, p)
            ratios[f.name] = num / fp
        tables[eps] = ratios
        K[eps] = max(ratios.values())
    eps0 = min(eps_list)
    rep = InequalityReport.from_ratios(
        "revised_adams", {"k": k, "p": p, "epsilons": list(eps_list)}, tables[eps0], grid=gm.describe()
    )
    rep.details["K"] = {f"{e:g}": K[e] for e in eps_list}
    rep.details["witness"] = {f"{e:g}": max(tables[e], key=tables[e].get) for e in eps_list}
    srt = sorted(eps_list)
    rep.checks["finite"] = all(np.isfinite(K[e]) for e in eps_list)
    rep.checks["nonincreasing_in_eps"] = all(K[a] >= K[b] for a, b in zip(srt, srt[1:]))
    return rep


def check_revised_adams(gm, bank, k, p, epsilon_list, refine=False, slack=SLACK, am_epsilon=0.5):
    """``K(eps) = sup (mu(|grad^k U|^p |f|^p) - eps ||grad^k f||_p^p) / ||f||_p^p``.

    The potential must pass the A_m scan for ``m = max(3, k)``. ``p`` must
    be at least ``2 - 2^{2-m}``.
    """
    m = max(3, k)
    if p < lemma8_p_min(m):
        raise PRangeViolation(f"p = {p} is below 2 - 2^(2-m) = {lemma8_p_min(m)}")
    am = check_assumption_am(gm.potential, gm, m, am_epsilon)
    if not am.satisfied:
        raise AssumptionViolation(f"assumption A_{m} fails on this grid: {am.constants}")
    rep = _revised(gm, bank, k, p, list(epsilon_list))
    rep.details["assumption_am"] = {"m": m, "K2": am.k2_constant, "K": am.constants}
    ref = None
    if refine:
        gm2, bank2, _ = _refined(gm, bank, False)
        ref = _revised(gm2, bank2, k, p, list(epsilon_list))
    return _finish(rep, ref)


# ---------------------------------------------------------------------------
# Orlicz chain


def _chain(gm, bank, phi, p, k, slack):
    w = gm.weights.ravel()
    phi_a = orl.log_power_star(p, phi.exponents)
    inv1 = orl.phi_inverse(phi, 1.0)
    ai, aoi, osi, pk = {}, {}, {}, {}
    l4 = {}
    skipped = []
    for f in bank:
        v = f.values.ravel()
        fpp = float(np.dot(w, np.abs(v) ** p))
        gk = grad_power_k(gm, f, k, p)
        ai[f.name] = float(np.dot(w, phi_a.value(v))) / (gk + float(phi_a.value(fpp)))
        pnorm_phi = orl._luxemburg_values(w, np.abs(v) ** p, phi)
        aoi[f.name] = pnorm_phi / (gk + fpp)
        l4[f.name] = fpp / (inv1 * pnorm_phi) if pnorm_phi > 0 else 0.0
        if f.name == "const" or gk < DEGENERATE:
            skipped.append(f.name)
            continue
        res = lq_min_polynomial(gm, f, k, p)
        r = v - res.minimizer(*gm.coords).ravel()
        osi[f.name] = orl._luxemburg_values(w, np.abs(r) ** p, phi) / gk
        pk[f.name] = res.distance**p / gk
    rep = InequalityReport.from_ratios(
        "adams_orlicz_chain",
        {"p": p, "k": k, "phi": phi.label, "phi_ap": phi_a.label},
        osi,
        skipped=skipped,
        grid=gm.describe(),
    )
    c_osi = rep.constant
    c_pk = max(pk.values()) if pk else math.nan
    rep.paper_bound = c_osi * inv1
    rep.details.update(
        {
            "K_AI": max(ai.values()),
            "C_AOI": max(aoi.values()),
            "C_OSI": c_osi,
            "c_pk": c_pk,
            "phi_inverse_1": inv1,
            "lemma_l4_max_ratio": max(l4.values()),
            "ratios_AI": ai,
            "ratios_AOI": aoi,
        }
    )
    rep.checks["finite"] = all(np.isfinite(x) for x in (max(ai.values()), max(aoi.values()), c_osi))
    rep.checks["lemma_l4"] = all(r <= 1 + 1e-9 for r in l4.values())
    rep.checks["closing_implication"] = bool(c_pk <= c_osi * inv1 * (1 + slack))
    return rep


def check_adams_orlicz_chain(gm, bank, phi, p, k, refine=False, slack=SLACK):
    """Constants of the chain from the Adams inequality to the Orlicz-Sobolev one.

    ``phi`` must be a gamma_shifted function on the ladder for ``p``; it is
    paired with ``log_power_star(p, phi.exponents)``.
    """
    if not orl.on_ladder(phi) or phi.p != float(p):
        raise PairingInvalid(
            "the chain is only claimed for gamma_shifted Phi on the gamma ladder of the same p"
        )
    rep = _chain(gm, bank, phi, p, k, slack)
    ref = None
    if refine:
        gm2, bank2, _ = _refined(gm, bank, False)
        ref = _chain(gm2, bank2, phi, p, k, slack)
    _finish(rep, ref)
    if ref is not None:
        rep.details["refined"] = {key: ref.details[key] for key in ("K_AI", "C_AOI", "C_OSI")}
    return rep


# ---------------------------------------------------------------------------
# Shift minimizers


def _leq(a, b, tol):
    return a <= b + tol * max(1.0, abs(b))


def check_shift_minimizer(gm, bank, phi, pairs=None, s=1.5, t=-0.7, tol=1e-8):
    """Sandwich, continuity and sublinearity of the Orlicz shift minimizer.

    Every inequality is checked with slack ``tol`` (relative above 1).
    ``pairs`` defaults to consecutive nonconstant members. The reported
    constant is the largest ``|mu f - M_Phi f| / (Phi^{-1}(1) d(f))``.
    """
    w = gm.weights.ravel()
    inv1 = orl.phi_inverse(phi, 1.0)
    one = orl._luxemburg_values(w, np.ones_like(w), phi)
    members = bank.nonconstant()
    res = {f.name: orlicz_shift_minimizer(gm, f, phi) for f in members}
    ratios, bad = {}, {"sandwich": [], "remark": [], "mean_bound": [], "residual": []}
    for f in members:
        r = res[f.name]
        mf = integrate(gm, f)
        centered = orl._luxemburg_values(w, f.values.ravel() - mf, phi)
        lhs = abs(mf - r.minimizer)
        ratios[f.name] = lhs / (inv1 * r.distance)
        if not _leq(lhs, inv1 * r.distance, tol):
            bad["sandwich"].append(f.name)
        if not _leq(r.distance, centered, tol):
            bad["remark"].append(f.name)
        if not _leq(centered, (1 + inv1 * one) * r.distance, tol):
            bad["mean_bound"].append(f.name)
        if not r.converged:
            bad["residual"].append(f.name)
    if pairs is None:
        pairs = list(zip(members, members[1:]))
    cont, sub = [], []
    for f, g in pairs:
        df, dg = res[f.name].distance, res[g.name].distance
        diff = orl._luxemburg_values(w, (f - g).values.ravel(), phi)
        if not _leq(abs(df - dg), diff, tol):
            cont.append((f.name, g.name))
        comb = orlicz_shift_minimizer(gm, s * f + t * g, phi).distance
        if not _leq(comb, abs(s) * df + abs(t) * dg, tol):
            sub.append((f.name, g.name))
    rep = InequalityReport.from_ratios(
        "shift_minimizer", {"phi": phi.label, "s": s, "t": t, "tol": tol}, ratios, grid=gm.describe()
    )
    rep.paper_bound = 1.0
    rep.details.update(
        {
            "phi_inverse_1": inv1,
            "norm_of_one": one,
            "violations": {**bad, "continuity": cont, "sublinearity": sub},
            "max_residual": max(r.residual for r in res.values()),
            "minimizers": {n: r.minimizer for n, r in res.items()},
        }
    )
    for key, names in bad.items():
        rep.checks[key] = not names
    rep.checks["continuity"] = not cont
    rep.checks["sublinearity"] = not sub
    return rep


# ---------------------------------------------------------------------------
# Bounded perturbations


def _os_constant(gm, bank, phi, weights):
    # (Phi - Phi) Orlicz-Sobolev: ||f - M_Phi f||_Phi <= C || |grad f| ||_Phi
    ratios = {}
    for f in bank.nonconstant():
        g = np.sqrt(sum(derivative(gm, f, a).values ** 2 for a in multi_indices(gm.dim, 1)))
        den = orl._luxemburg_values(weights, g.ravel(), phi)
        if den < DEGENERATE:
            continue
        ratios[f.name] = orlicz_shift_minimizer(gm, f, phi, weights=weights).distance / den
    return ratios


def check_measure_perturbation(gm_mu, gm_nu, bank, phi, k, q, slack=SLACK):
    """Luxemburg-norm sandwich and constant transfer under ``dnu = e^{-V} dmu``.

    V is read off the grids as ``log(w_mu / w_nu)``, which is the bounded
    perturbation shifted so that nu is a probability measure.
    """
    if gm_mu.tag != gm_nu.tag:
        raise NodeMismatch("mu and nu must live on identical nodes")
    _check(gm_mu, bank.members[0])
    wm, wn = gm_mu.weights.ravel(), gm_nu.weights.ravel()
    V = np.log(wm) - np.log(wn)
    vinf, vsup = float(V.min()), float(V.max())
    osc = vsup - vinf
    lo, hi = math.exp(vinf), math.exp(vsup)
    ratios, bad = {}, []
    for f in bank:
        a = orl._luxemburg_values(wm, f.values.ravel(), phi)
        b = orl._luxemburg_values(wn, f.values.ravel(), phi)
        r = a / b
        ratios[f.name] = r
        if not (lo * (1 - 1e-8) <= r <= hi * (1 + 1e-8)):
            bad.append(f.name)
    rep = InequalityReport.from_ratios(
        "measure_perturbation",
        {"phi": phi.label, "k": k, "q": q, "perturbation": gm_nu.potential.label},
        ratios,
        grid=gm_mu.describe(),
    )
    rep.details["V_inf"], rep.details["V_sup"], rep.details["osc_V"] = vinf, vsup, osc
    rep.details["sandwich_violations"] = bad
    rep.checks["norm_sandwich"] = not bad
    pert = gm_nu.potential.perturbation
    if pert is not None:
        rep.details["osc_bound"] = pert.osc_bound
        rep.checks["osc_within_bound"] = bool(osc <= pert.osc_bound + 1e-12)
    c_mu = _poincare(gm_mu, bank, k, q, None, slack).constant
    c_nu = _poincare(gm_nu, bank, k, q, None, slack).constant
    factor = math.exp(osc)
    rep.paper_bound = factor * c_mu
    rep.details.update({"poincare_mu": c_mu, "poincare_nu": c_nu, "exp_osc": factor})
    rep.checks["poincare_transfer"] = bool(c_nu <= factor * c_mu * (1 + slack))
    os_mu = _os_constant(gm_mu, bank, phi, wm)
    os_nu = _os_constant(gm_nu, bank, phi, wn)
    if os_mu:
        cm, cn = max(os_mu.values()), max(os_nu.values())
        rep.details.update({"orlicz_sobolev_mu": cm, "orlicz_sobolev_nu": cn})
        rep.checks["orlicz_sobolev_transfer"] = bool(cn <= factor * cm * (1 + slack))
    rep.details["adams_mu"] = _weighted(gm_mu, bank, 1, q, "adams").constant
    rep.details["adams_nu"] = _weighted(gm_nu, bank, 1, q, "adams").constant
    return rep


# ---------------------------------------------------------------------------
# Norm equivalence


def _equivalence(gm, sd, bank, k, p):
    r1, r2, c14, c15, full = {}, {}, {}, {}, {}
    for f in bank:
        fp = grad_norm_k(gm, f, 0, p)
        gk = grad_norm_k(gm, f, k, p)
        lk = grad_norm_k(gm, apply_fractional(sd, f, k / 2.0), 0, p)
        ln = fp + lk
        tn = fp + gk
        r1[f.name] = ln / tn
        r2[f.name] = tn / ln
        c14[f.name] = gk / ln
        c15[f.name] = lk / tn
        full[f.name] = sobolev_norm(gm, f, k, p) / tn
    rep = InequalityReport.from_ratios(
        "norm_equivalence", {"k": k, "p": p}, r1, grid=gm.describe()
    )
    rep.details.update(
        {
            "max_r1": max(r1.values()),
            "max_r2": max(r2.values()),
            "witness_r2": max(r2, key=r2.get),
            "grad_by_L": max(c14.values()),
            "L_by_grad": max(c15.values()),
            "sobolev_by_tilde": max(full.values()),
            "ratios_r2": r2,
        }
    )
    if k == 1 and p == 2:
        vals = [
            math.sqrt(dirichlet_form(gm, f)) / grad_norm_k(gm, f, 1, 2)
            for f in bank.nonconstant()
        ]
        rep.details["dirichlet_ratio_range"] = [min(vals), max(vals)]
    return rep


def norm_equivalence_sweep(gm, sd, bank, k, p, refine=False, bound=10.0, drift=None, slack=SLACK):
    """Ratios between ``||f||_{L,k,p}`` and ``||f||~_{k,p}`` over the bank.

    ``r1 = ||f||_{L,k,p} / ||f||~_{k,p}`` and ``r2 = 1 / r1``. The one-sided
    constants ``||grad^k f||_p / ||f||_{L,k,p}`` and
    ``||L^{k/2} f||_p / ||f||~_{k,p}`` and ``||f||_{k,p} / ||f||~_{k,p}``
    are reported alongside. For ``p = 2`` both maxima must stay below
    ``bound``. The allowed refinement drift defaults to 2% for ``p = 2`` and
    to ``slack`` otherwise.
    """
    if k > 4:
        raise ValueError("k <= 4")
    rep = _equivalence(gm, sd, bank, k, p)
    drift = (0.02 if p == 2 else slack) if drift is None else drift
    keys = ("max_r1", "max_r2", "grad_by_L", "L_by_grad", "sobolev_by_tilde")
    rep.checks["finite"] = all(np.isfinite(rep.details[key]) for key in keys)
    if p == 2:
        rep.paper_bound = bound
        rep.checks["r1_bounded"] = bool(rep.details["max_r1"] < bound)
        rep.checks["r2_bounded"] = bool(rep.details["max_r2"] < bound)
    if refine:
        gm2, bank2, sd2 = _refined(gm, bank, True)
        ref = _equivalence(gm2, sd2, bank2, k, p)
        deltas = {key: _rel(rep.details[key], ref.details[key]) for key in keys}
        rep.details["refinement_deltas"] = deltas
        rep.details["refined"] = {key: ref.details[key] for key in keys}
        rep.refinement_delta = max(deltas["max_r1"], deltas["max_r2"])
        if p == 2:
            rep.checks["r_drift"] = bool(rep.refinement_delta < drift)
        else:
            rep.checks["one_sided_drift"] = bool(max(deltas["grad_by_L"], deltas["L_by_grad"]) < drift)
    return rep


def dirichlet_identity(gm, bank):
    """Relative gaps between ``<f, L f>_mu`` and ``mu|grad f|^2`` per member."""
    op = assemble_operator(gm)
    out = {}
    for f in bank.nonconstant():
        lhs = integrate(gm, f * op.apply(f))
        rhs = grad_power_k(gm, f, 1, 2)
        out[f.name] = abs(lhs - rhs) / rhs
    return out


# ---------------------------------------------------------------------------
# Condition (C) and decay


def _full_tensor(gm, f, order):
    # all ordered index sequences of length ``order`` -> d_seq f
    import itertools

    return {
        seq: derivative(gm, f, tuple(seq.count(i) for i in range(gm.dim))).values
        for seq in itertools.product(range(gm.dim), repeat=order)
    }


def check_condition_c(gm, bank, k):
    """``m = inf mu(d_j T . U_ji d_i T) / mu|grad^k f|^2`` with ``T = grad^{k-1} f``.

    Both sides use the full derivative tensor (ordered index sequences),
    so a Hessian ``c I`` gives exactly ``c``.
    """
    U = gm.potential
    if U.perturbation is not None:
        raise AssumptionViolation("condition (C) needs the Hessian of a smooth potential")
    d2 = base_derivatives_at(U, gm.coords, 2)
    dim = gm.dim
    H = [[d2[tuple((a == i) + (b == i) for i in range(dim))] for b in range(dim)] for a in range(dim)]
    w = gm.weights
    ratios, skipped = {}, []
    for f in bank.nonconstant():
        T = _full_tensor(gm, f, k)
        den = sum(float(np.sum(w * v**2)) for v in T.values())
        if den < DEGENERATE:
            skipped.append(f.name)
            continue
        num = 0.0
        for seq in _full_tensor(gm, f, k - 1):
            for i in range(dim):
                for j in range(dim):
                    num += float(np.sum(w * T[(j,) + seq] * H[j][i] * T[(i,) + seq]))
        ratios[f.name] = num / den
    rep = InequalityReport.from_ratios(
        "condition_c", {"k": k}, ratios, kind="inf", skipped=skipped, grid=gm.describe()
    )
    rep.details["sign"] = "positive" if rep.constant > 0 else "nonpositive"
    rep.checks["finite"] = bool(np.isfinite(rep.constant))
    return rep


def check_decay_envelope(gm, sd, bank, k, times, slack=SLACK, source=None):
    """Single ``C'`` per (potential, k) for the gradient decay envelope.

    ``C'`` is the sup of ``mu|grad^k f_t|^2 e^{2 m0 t} / B(f)`` over the
    bank and the first half of the time ladder, with ``m0 = lambda_1``
    and ``B(f) = mu|grad^k f|^2 + Var_mu f``. The check is that the second
    half stays below ``C' (1 + slack)``. ``source`` overrides the evolution
    backend (an assembled operator selects Crank-Nicolson).
    """
    times = np.asarray(times, dtype=float)
    m0 = spectral_gap(sd)
    half = times.size // 2
    fit, hold = {}, {}
    for f in bank.nonconstant():
        cur = decay_curve(gm, sd if source is None else source, f, k, times)
        var = grad_power_k(gm, f - integrate(gm, f), 0, 2)
        b0 = cur.values[0] + var
        if b0 < DEGENERATE:
            continue
        r = cur.values * np.exp(2 * m0 * times) / b0
        fit[f.name] = float(r[:half].max())
        hold[f.name] = float(r[half:].max())
    rep = InequalityReport.from_ratios(
        "decay_envelope", {"k": k, "times": [float(t) for t in times]}, fit, grid=gm.describe()
    )
    c = rep.constant
    rep.paper_bound = c
    rep.details.update({"m0": m0, "C_prime": c, "holdout_max": max(hold.values()), "holdout": hold})
    rep.checks["envelope_holds"] = bool(max(hold.values()) <= c * (1 + slack))
    return rep

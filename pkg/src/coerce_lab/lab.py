"""Batch experiments driven by JSON configs, and the ``coerce-lab`` CLI.

A config names one experiment, the potential, the grid, the test bank and
the experiment parameters::

    {
      "experiment": "poincare",
      "potential": {"family": "gaussian", "params": {"a": 0.5}},
      "grid": {"R": 8, "N": 1025},
      "params": {"k": 1, "q": 2}
    }

Unknown keys are rejected at every level. A run writes ``report.json``
(schema ``coerce-lab/report-v1``, with the resolved config embedded), CSV
tables and ``manifest.json``. Wall times and timestamps live only in the
manifest, so report bodies are reproducible byte for byte.

Exit codes: 0 when every check passes, 1 when some check fails, 2 for
config or environment errors.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import orlicz as orl
from . import potential as pot
from . import verify as ver
from .dirichlet import assemble_operator, spectral_decomposition, spectral_gap, write_eigenvalues_csv
from .discretize import build_grid, make_test_bank, write_function_csv
from .errors import CoerceLabError, ConfigInvalid
from .evolve import decay_curve, fit_decay_rate, write_curve_csv
from .minimize import downhill_polynomial, lq_min_polynomial, orlicz_shift_minimizer
from .reports import SCHEMA, InequalityReport, dumps, jsonable

__all__ = ["ExperimentConfig", "RunManifest", "run", "sweep", "main", "EXPERIMENTS"]

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

# experiment -> (allowed parameter keys, defaults)
EXPERIMENTS = {
    "regularity": {"epsilon": 0.5, "m": 3},
    "poincare": {"k": 1, "q": 2.0},
    "downhill": {"k": 2, "q": 2.0},
    "weighted": {"m": 1, "p": 2.0, "mode": "adams"},
    "revised-adams": {"k": 2, "p": 2.0, "epsilons": [0.1, 0.5, 1.0], "am_epsilon": 0.5},
    "orlicz-chain": {"k": 1, "p": 2.0, "phi": None},
    "perturbation": {"k": 1, "q": 2.0, "phi": {"variant": "n_function"}},
    "equivalence": {"k": 1, "p": 2.0, "bound": 10.0},
    "condition-c": {"k": 1, "expect_sign": None},
    "decay": {"k": 1, "times": {"start": 0.0, "stop": 4.0, "num": 41}, "f0": "x^1", "expect_rate": None, "rate_tol": 0.02},
    "lemmas": {"p": 2.0, "j_max": 3},
    "minimize": {"k": 2, "q": 2.0, "member": "x^3", "phi": None},
}

_TOP = {"experiment", "potential", "grid", "bank", "params", "output", "slack"}
_POTENTIAL = {"family", "params", "dim", "perturbation"}
_GRID = {"R", "N", "refine"}
_BANK = {"seed", "size", "spectral"}
_PERTURBATION = {"kind", "amplitude", "frequency", "axis"}
_PHI = {"variant", "p", "exponents", "gammas"}
_FAMILIES = {
    "gaussian": pot.gaussian,
    "even_monomial": pot.even_monomial,
    "smoothed_power": pot.smoothed_power,
    "double_well": pot.double_well,
    "polynomial": pot.polynomial,
}


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigInvalid(f"{where} must be an object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigInvalid(f"unknown field(s) in {where}: {', '.join(extra)}")


@dataclass
class ExperimentConfig:
    """One resolved experiment; ``to_dict``/``from_dict`` round-trip exactly."""

    experiment: str
    potential: dict
    grid: dict
    bank: dict = field(default_factory=lambda: {"seed": 0, "size": 8, "spectral": 0})
    params: dict = field(default_factory=dict)
    output: str = "coerce-lab-out"
    slack: float = ver.SLACK

    @classmethod
    def from_dict(cls, data):
        _reject_unknown(data, _TOP, "config")
        if "experiment" not in data:
            raise ConfigInvalid("config needs an 'experiment'")
        exp = data["experiment"]
        if exp not in EXPERIMENTS:
            raise ConfigInvalid(f"unknown experiment {exp!r}; choose from {sorted(EXPERIMENTS)}")
        potential = copy.deepcopy(data.get("potential", {"family": "gaussian", "params": {"a": 0.5}}))
        _reject_unknown(potential, _POTENTIAL, "potential")
        potential.setdefault("params", {})
        potential.setdefault("dim", 1)
        potential.setdefault("perturbation", None)
        if potential.get("family") not in _FAMILIES:
            raise ConfigInvalid(f"unknown potential family {potential.get('family')!r}")
        if potential["perturbation"] is not None:
            _reject_unknown(potential["perturbation"], _PERTURBATION, "potential.perturbation")
            pert = {"kind": "sine", "frequency": 1.0, "axis": 0}
            pert.update(potential["perturbation"])
            if pert["kind"] != "sine" or "amplitude" not in pert:
                raise ConfigInvalid("perturbation must be {'kind': 'sine', 'amplitude': ...}")
            potential["perturbation"] = pert
        grid = {"R": 8.0, "N": 1025, "refine": False}
        g = data.get("grid", {})
        _reject_unknown(g, _GRID, "grid")
        grid.update(g)
        bank = {"seed": 0, "size": 8, "spectral": 0}
        b = data.get("bank", {})
        _reject_unknown(b, _BANK, "bank")
        bank.update(b)
        defaults = EXPERIMENTS[exp]
        p = data.get("params", {})
        _reject_unknown(p, defaults, f"params of {exp}")
        params = copy.deepcopy(defaults)
        params.update(copy.deepcopy(p))
        slack = data.get("slack", ver.SLACK)
        if not (isinstance(slack, (int, float)) and 0 <= slack < 1):
            raise ConfigInvalid("slack must be a number in [0, 1)")
        cfg = cls(exp, potential, grid, bank, params, str(data.get("output", "coerce-lab-out")), float(slack))
        cfg.build_potential()  # validates family parameters
        if exp in ("orlicz-chain", "perturbation", "minimize") and params.get("phi") is not None:
            build_phi(params["phi"])
        return cfg

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "potential": copy.deepcopy(self.potential),
            "grid": dict(self.grid),
            "bank": dict(self.bank),
            "params": copy.deepcopy(self.params),
            "output": self.output,
            "slack": self.slack,
        }

    def content(self):
        """The config without its output location (what the results depend on)."""
        d = self.to_dict()
        d.pop("output")
        return d

    def hash(self):
        return hashlib.sha256(json.dumps(jsonable(self.content()), sort_keys=True).encode()).hexdigest()

    def build_potential(self):
        spec = self.potential
        kwargs = dict(spec["params"])
        if spec["family"] == "polynomial":
            coeffs = kwargs.pop("coefficients", None)
            if coeffs is None or kwargs:
                raise ConfigInvalid("polynomial takes exactly params.coefficients")
            kwargs = {"coefficients": {_parse_index(k): v for k, v in coeffs.items()}}
        try:
            U = _FAMILIES[spec["family"]](**kwargs, dim=int(spec["dim"]))
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad potential: {exc}") from exc
        pert = spec.get("perturbation")
        if pert is not None:
            U = U.with_perturbation(
                pot.sine_perturbation(float(pert["amplitude"]), float(pert["frequency"]), int(pert["axis"]))
            )
        return U


def _parse_index(key):
    parts = [int(s) for s in str(key).split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def build_phi(spec):
    """OrliczSpec from its config form ``{"variant": ..., ...}``."""
    _reject_unknown(spec, _PHI, "phi")
    v = spec.get("variant")
    try:
        if v == "power":
            return orl.power(spec.get("p", 2.0))
        if v == "n_function":
            return orl.n_function()
        if v == "log_power_star":
            return orl.log_power_star(spec.get("p", 2.0), spec.get("exponents", [1.0]))
        if v == "gamma_shifted":
            return orl.gamma_shifted(spec.get("exponents", [1.0]), spec.get("p", 2.0), spec.get("gammas"))
    except ValueError as exc:
        raise ConfigInvalid(f"bad phi: {exc}") from exc
    raise ConfigInvalid(f"unknown phi variant {v!r}")


@dataclass
class RunManifest:
    config_hash: str
    version: str
    experiment: str
    paths: dict
    wall_time_s: float
    passed: bool
    exit_code: int
    error: str | None = None
    started_at: str = ""

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# experiment bodies: each returns (list of report dicts, csv writers)


class _Context:
    def __init__(self, cfg):
        self.cfg = cfg
        self.U = cfg.build_potential()
        self.gm = build_grid(self.U, float(cfg.grid["R"]), int(cfg.grid["N"]))
        self.refine = bool(cfg.grid["refine"])
        self._sd = None
        self._bank = None
        self.tables = []  # (filename, writer(path))

    @property
    def sd(self):
        if self._sd is None:
            n = None if self.gm.dim == 1 else 40
            self._sd = spectral_decomposition(assemble_operator(self.gm), n)
        return self._sd

    @property
    def bank(self):
        if self._bank is None:
            b = self.cfg.bank
            spectral = self.sd if b["spectral"] else None
            self._bank = make_test_bank(self.gm, int(b["seed"]), int(b["size"]), spectral, int(b["spectral"]) or 4)
        return self._bank

    def add_report(self, rep, reports):
        reports.append(rep.to_dict())
        name = f"{len(reports):02d}_{rep.inequality}.csv"
        self.tables.append((name, rep.write_csv))


def _exp_regularity(ctx, p):
    arc = pot.check_arc(ctx.U, ctx.gm, p["epsilon"])
    am = pot.check_assumption_am(ctx.U, ctx.gm, int(p["m"]), p["epsilon"])
    growth = pot.check_gradient_growth(ctx.U, ctx.gm)
    checks = {"arc": arc.satisfied, "assumption_am": am.satisfied, "gradient_divergent": growth.divergent}

    def write(path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["radius", "eta"])
            for r, e in zip(growth.radii, growth.eta):
                w.writerow([repr(float(r)), repr(float(e))])
        return path

    ctx.tables.append(("gradient_growth.csv", write))
    return [{"schema": SCHEMA, "inequality": "regularity", "arc": asdict(arc), "assumption_am": asdict(am),
             "gradient_growth": asdict(growth), "checks": checks, "passed": all(checks.values()),
             "grid": ctx.gm.describe()}]


def _exp_poincare(ctx, p):
    k, q = int(p["k"]), float(p["q"])
    sd = ctx.sd if (k == 1 and q == 2) or ctx.cfg.bank["spectral"] else None
    rep = ver.estimate_poincare(ctx.gm, ctx.bank, k, q, sd=sd, refine=ctx.refine, slack=ctx.cfg.slack)
    if sd is not None:
        ctx.tables.append(("eigenvalues.csv", lambda path: write_eigenvalues_csv(sd, path)))
    return [rep]


def _exp_downhill(ctx, p):
    return [ver.check_downhill(ctx.gm, ctx.bank, int(p["k"]), float(p["q"]), refine=ctx.refine, slack=ctx.cfg.slack)]


def _exp_weighted(ctx, p):
    return [ver.check_weighted_bound(ctx.gm, ctx.bank, int(p["m"]), float(p["p"]), p["mode"],
                                     refine=ctx.refine, slack=ctx.cfg.slack)]


def _exp_revised_adams(ctx, p):
    return [ver.check_revised_adams(ctx.gm, ctx.bank, int(p["k"]), float(p["p"]), [float(e) for e in p["epsilons"]],
                                    refine=ctx.refine, slack=ctx.cfg.slack, am_epsilon=float(p["am_epsilon"]))]


def _exp_orlicz_chain(ctx, p):
    pp = float(p["p"])
    phi = build_phi(p["phi"]) if p["phi"] is not None else orl.gamma_shifted((1.0,), pp)
    return [ver.check_adams_orlicz_chain(ctx.gm, ctx.bank, phi, pp, int(p["k"]), refine=ctx.refine, slack=ctx.cfg.slack)]


def _exp_perturbation(ctx, p):
    if ctx.U.perturbation is None:
        raise ConfigInvalid("the perturbation experiment needs potential.perturbation")
    gm_mu = ctx.gm.with_potential(ctx.U.base())
    bank = make_test_bank(gm_mu, int(ctx.cfg.bank["seed"]), int(ctx.cfg.bank["size"]))
    return [ver.check_measure_perturbation(gm_mu, ctx.gm, bank, build_phi(p["phi"]), int(p["k"]), float(p["q"]),
                                           slack=ctx.cfg.slack)]


def _exp_equivalence(ctx, p):
    return [ver.norm_equivalence_sweep(ctx.gm, ctx.sd, ctx.bank, int(p["k"]), float(p["p"]), refine=ctx.refine,
                                       bound=float(p["bound"]), slack=ctx.cfg.slack)]


def _exp_condition_c(ctx, p):
    rep = ver.check_condition_c(ctx.gm, ctx.bank, int(p["k"]))
    if p["expect_sign"] is not None:
        rep.checks["expected_sign"] = rep.details["sign"] == p["expect_sign"]
    return [rep]


def _time_ladder(t):
    if isinstance(t, dict):
        _reject_unknown(t, {"start", "stop", "num"}, "params.times")
        return np.linspace(float(t["start"]), float(t["stop"]), int(t["num"]))
    return np.asarray(t, dtype=float)


def _exp_decay(ctx, p):
    k = int(p["k"])
    times = _time_ladder(p["times"])
    source = ctx.sd if ctx.gm.dim == 1 else assemble_operator(ctx.gm)
    rep = ver.check_decay_envelope(ctx.gm, ctx.sd, ctx.bank, k, times, slack=ctx.cfg.slack, source=source)
    if p["f0"] is not None:
        curve = decay_curve(ctx.gm, source, ctx.bank.get(p["f0"]), k, times)
        rate = fit_decay_rate(curve)
        rep.details["fitted"] = curve.to_dict()
        rep.details["two_m0"] = 2 * spectral_gap(ctx.sd)
        if p["expect_rate"] is not None:
            target = float(p["expect_rate"])
            rep.checks["rate_matches"] = bool(abs(rate - target) <= float(p["rate_tol"]) * abs(target))
        ctx.tables.append((f"curve_{curve.name}.csv".replace("^", ""), lambda path: write_curve_csv(curve, path)))
    return [rep]


def _exp_lemmas(ctx, p):
    return _lemma_reports(float(p["p"]), int(p["j_max"]), ctx.tables)


def _lemma_reports(pp, j_max, tables):
    reps = orl.verify_log_lemmas(pp, j_max)
    out = []
    for r in reps:
        d = r.to_dict()
        d["schema"] = SCHEMA
        d["inequality"] = f"lemma_{r.lemma}"
        d["checks"] = {"within_paper_constant": r.passed}
        out.append(d)

    def write(path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lemma", "j", "p", "empirical_constant", "paper_constant", "worst_point", "passed"])
            for r in reps:
                w.writerow([r.lemma, r.j, r.p, repr(r.empirical_constant), repr(r.paper_constant),
                            repr(r.worst_point), r.passed])
        return path

    tables.append(("lemmas.csv", write))
    return out


def _exp_minimize(ctx, p):
    gm, f = ctx.gm, ctx.bank.get(p["member"])
    k, q = int(p["k"]), float(p["q"])
    res = lq_min_polynomial(gm, f, k, q)
    out = {"schema": SCHEMA, "inequality": "minimize", "member": f.name, "k": k, "q": q,
           "lq_minimizer": res.to_dict(), "grid": gm.describe()}
    checks = {"converged": res.converged, "unique": bool(res.unique),
              "candidate_bound": bool(res.extra["candidate_bound_ok"]),
              "below_zero_candidate": bool(res.extra["zero_candidate_ok"])}
    if k <= 4:
        out["downhill"] = downhill_polynomial(gm, f, k, q).to_json()
    if p["phi"] is not None:
        sm = orlicz_shift_minimizer(gm, f, build_phi(p["phi"]))
        out["shift_minimizer"] = sm.to_dict()
        checks["shift_converged"] = sm.converged
    out["checks"] = checks
    out["passed"] = all(checks.values())
    residual = f - res.minimizer.on_grid(gm, "M")
    ctx.tables.append(("minimizer.csv", lambda path: write_function_csv(gm, [f, residual.renamed("residual")], path)))
    return [out]


_BODIES = {
    "regularity": _exp_regularity,
    "poincare": _exp_poincare,
    "downhill": _exp_downhill,
    "weighted": _exp_weighted,
    "revised-adams": _exp_revised_adams,
    "orlicz-chain": _exp_orlicz_chain,
    "perturbation": _exp_perturbation,
    "equivalence": _exp_equivalence,
    "condition-c": _exp_condition_c,
    "decay": _exp_decay,
    "lemmas": _exp_lemmas,
    "minimize": _exp_minimize,
}


def _passed(rep):
    if isinstance(rep, InequalityReport):
        return rep.passed
    if "passed" in rep:
        return bool(rep["passed"])
    return all(bool(v) for v in rep.get("checks", {}).values())


def execute(cfg):
    """Run one experiment in memory; returns (report body, tables)."""
    if cfg.experiment == "lemmas":
        tables = []
        reports = _lemma_reports(float(cfg.params["p"]), int(cfg.params["j_max"]), tables)
        return _body(cfg, reports), tables
    ctx = _Context(cfg)
    raw = _BODIES[cfg.experiment](ctx, cfg.params)
    reports = []
    for rep in raw:
        if isinstance(rep, InequalityReport):
            ctx.add_report(rep, reports)
        else:
            reports.append(rep)
    return _body(cfg, reports), ctx.tables


def _body(cfg, reports):
    return {
        "schema": SCHEMA,
        "version": __version__,
        "experiment": cfg.experiment,
        "config": cfg.content(),
        "config_hash": cfg.hash(),
        "passed": all(_passed(r) for r in reports),
        "reports": reports,
    }


def run(config, out_dir=None):
    """Execute one config and write its outputs; returns the RunManifest.

    ``config`` is an ExperimentConfig or its dict form. Module errors are
    recorded in the manifest (exit code 2) instead of propagating.
    """
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    out = Path(out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    try:
        body, tables = execute(cfg)
    except CoerceLabError as exc:
        err = f"{cfg.experiment}: {type(exc).__name__}: {exc}"
        return _finish(out, RunManifest(cfg.hash(), __version__, cfg.experiment, paths,
                                        time.perf_counter() - t0, False, EXIT_ERROR, err, started))
    report_path = out / "report.json"
    report_path.write_text(dumps(body) + "\n")
    paths["report"] = str(report_path)
    paths["csv"] = []
    for name, writer in tables:
        writer(out / name)
        paths["csv"].append(str(out / name))
    code = EXIT_PASS if body["passed"] else EXIT_FAIL
    return _finish(out, RunManifest(cfg.hash(), __version__, cfg.experiment, paths,
                                    time.perf_counter() - t0, body["passed"], code, None, started))


def _finish(out, manifest):
    (out / "manifest.json").write_text(dumps(manifest.to_dict()) + "\n")
    return manifest


def load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: not valid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(data)


def _sweep_one(args):
    name, data, out = args
    try:
        cfg = ExperimentConfig.from_dict(data)
    except ConfigInvalid as exc:
        return name, {"exit_code": EXIT_ERROR, "error": f"ConfigInvalid: {exc}", "passed": False}
    m = run(cfg, out)
    return name, m.to_dict()


def sweep(configs, out_dir, jobs=1):
    """Run named configs into ``out_dir/<name>/`` and aggregate a manifest.

    ``configs`` maps names to config dicts. Runs may execute concurrently;
    the aggregate is ordered by name so its content does not depend on
    scheduling. Per-config errors are recorded and the sweep continues.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(name, configs[name], str(out / name)) for name in sorted(configs)]
    t0 = time.perf_counter()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_sweep_one, tasks))
    else:
        results = dict(map(_sweep_one, tasks))
    codes = [results[n]["exit_code"] for n in sorted(results)]
    agg = {
        "version": __version__,
        "started_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": time.perf_counter() - t0,
        "runs": {n: results[n] for n in sorted(results)},
        "summary": {
            "total": len(codes),
            "passed": sum(c == EXIT_PASS for c in codes),
            "failed": sum(c == EXIT_FAIL for c in codes),
            "errors": sum(c == EXIT_ERROR for c in codes),
        },
        "exit_code": max(codes, default=EXIT_PASS),
    }
    (out / "manifest.json").write_text(dumps(agg) + "\n")
    return agg


# ---------------------------------------------------------------------------
# CLI


def _print_summary(body_path):
    body = json.loads(Path(body_path).read_text())
    for rep in body["reports"]:
        status = "PASS" if _passed(rep) else "FAIL"
        const = rep.get("constant", rep.get("empirical_constant", ""))
        label = rep["inequality"] + (f" j={rep['j']}" if "j" in rep and "lemma" in rep else "")
        print(f"{status}  {label}  {const}")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="coerce-lab", description="Empirical constants of coercive inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides the config)")
    p_run.add_argument("--refine", action="store_true", help="repeat at N -> 2N+1 and record refinement deltas")
    p_sweep = sub.add_parser("sweep", help="run every *.json config in a directory")
    p_sweep.add_argument("directory")
    p_sweep.add_argument("--out", default=None, help="output directory (default <directory>/out)")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_lem = sub.add_parser("lemmas", help="scan the iterated-logarithm lemmas")
    p_lem.add_argument("-p", type=float, default=2.0)
    p_lem.add_argument("--jmax", type=int, default=3)
    p_lem.add_argument("--out", default="coerce-lab-lemmas")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.refine:
                cfg.grid["refine"] = True
            m = run(cfg, args.out)
        elif args.command == "lemmas":
            cfg = ExperimentConfig.from_dict({"experiment": "lemmas", "params": {"p": args.p, "j_max": args.jmax}})
            m = run(cfg, args.out)
        else:
            d = Path(args.directory)
            if not d.is_dir():
                raise ConfigInvalid(f"{d} is not a directory")
            configs = {}
            for path in sorted(d.glob("*.json")):
                try:
                    configs[path.stem] = json.loads(path.read_text())
                except json.JSONDecodeError:
                    configs[path.stem] = {"__invalid_json__": str(path)}
            agg = sweep(configs, args.out or d / "out", args.jobs)
            for name, r in agg["runs"].items():
                print(f"{'PASS' if r['exit_code'] == 0 else 'FAIL' if r['exit_code'] == 1 else 'ERROR'}  {name}"
                      + (f"  ({r['error']})" if r.get("error") else ""))
            return agg["exit_code"]
    except ConfigInvalid as exc:
        print(f"coerce-lab: invalid config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if m.error:
        print(f"coerce-lab: {m.error}", file=sys.stderr)
    else:
        _print_summary(m.paths["report"])
    return m.exit_code


if __name__ == "__main__":
    sys.exit(main())

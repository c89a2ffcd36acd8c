"""Configuration, orchestration and reporting front end.

A single JSON config document describes the kernel, the model, the
induction parameters, the analyses to run and their budgets; the seed is
mandatory so every artifact is reproducible byte for byte.  Subcommands:

    check-d   kernel bound verification        -> check_d.json
    run       solve the recursion              -> f_table.csv / f_table.json
    critical  critical constants               -> critical.json
    verify    inequality checkers              -> verify.json / verify.txt
    norms     torus norms                      -> norms.csv
    gaussian  scaling-limit probes             -> gaussian.csv / gaussian_summary.json
    all       everything above in dependency order, plus manifest.json

Exit status: 0 on success, 2 if a verify bound fails its supplied
constant, 1 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import kernel as kernel_mod
from . import models as models_mod
from .bounds import (InductionParams, ParameterConstraintError,
                     check_assumption_e, check_assumption_g, check_f_bounds,
                     check_consequences, check_h1_h4, CheckGrid)
from .critical import build_sequence_state, solve_zc
from .gaussian import probe_clt, probe_variance, DEFAULT_LADDER
from .kernel import StepDistribution, make_uniform_box, check_assumption_d, \
    assumption_d_samples
from .quadrature import lp_norms
from .recursion import solve

__all__ = ["RunConfig", "ConfigError", "load_config", "run_all", "main"]

ANALYSES = ("check-d", "run", "critical", "verify", "norms", "gaussian")


class ConfigError(ValueError):
    """Invalid run configuration; the message carries the field path."""


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_to_jsonable(doc), fh, sort_keys=True, indent=1)
        fh.write("\n")


def parse_kernel_flag(text):
    """'d:L[:include-origin|:exclude-origin]' -> StepDistribution."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"--kernel expects d:L[:include-origin], got {text!r}")
    try:
        d, L = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"--kernel {text!r}: d and L must be integers") from exc
    include = False
    if len(parts) == 3:
        if parts[2] not in ("include-origin", "exclude-origin"):
            raise ConfigError(f"--kernel {text!r}: unknown origin flag {parts[2]!r}")
        include = parts[2] == "include-origin"
    return make_uniform_box(d, L, include_origin=include)


def _build_kernel(spec):
    if isinstance(spec, str):
        return parse_kernel_flag(spec)
    if not isinstance(spec, dict):
        raise ConfigError("kernel: must be an object or 'd:L' string")
    if "file" in spec:
        return StepDistribution.from_json(Path(spec["file"]).read_text())
    if "support" in spec:
        return StepDistribution.from_json(json.dumps(spec))
    for field in ("d", "L"):
        if field not in spec:
            raise ConfigError(f"kernel.{field}: required")
    return make_uniform_box(int(spec["d"]), int(spec["L"]),
                            include_origin=bool(spec.get("include_origin", False)))


def _build_model(spec, kern, budgets):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("model.kind: required")
    kind = spec["kind"]
    n_max = int(spec.get("n_max", models_mod.DEFAULT_ANALYTIC_N_MAX))
    if kind == "simple_random_walk":
        return models_mod.SimpleRandomWalk(kern, n_max=n_max)
    if kind == "synthetic_theta":
        if "theta" not in spec:
            raise ConfigError("model.theta: required for kind synthetic_theta")
        return models_mod.SyntheticTheta(
            kern, theta=float(spec["theta"]), beta0=float(spec.get("beta0", 0.0)),
            sign_pattern=spec.get("sign_pattern", "+"),
            beta0_e=float(spec.get("beta0_e", 0.0)),
            e_sign_pattern=spec.get("e_sign_pattern"),
            e_profile=int(spec.get("e_profile", 1)), n_max=n_max)
    if kind == "weakly_saw":
        if "u" not in spec:
            raise ConfigError("model.u: required for kind weakly_saw")
        return models_mod.WeaklySelfAvoidingWalk(
            kern, u=float(spec["u"]), n_max=int(spec.get("n_max", 10)),
            budget=int(budgets.get("max_enumeration_steps", 10 ** 8)))
    if kind == "extracted":
        if "f_table_file" not in spec:
            raise ConfigError("model.f_table_file: required for kind extracted")
        doc = json.loads(Path(spec["f_table_file"]).read_text())
        return models_mod.extract_coefficients(
            np.asarray(doc["f"], dtype=float), int(doc["horizon"]),
            k_points=np.asarray(doc["k_points"], dtype=float),
            z0=float(doc.get("z", 1.0)), kernel=kern)
    raise ConfigError(f"model.kind: unknown kind {kind!r}")


def _build_params(spec, kern):
    if spec is None:
        return None
    required = ("theta", "eps", "gamma", "delta", "lambda")
    for field in required:
        if field not in spec:
            raise ConfigError(f"params.{field}: required")
    kwargs = {}
    for key in ("K1", "K2", "K3", "K4", "K5", "gg_ratio"):
        if key in spec:
            kwargs[key] = float(spec[key])
    if "K4_prime" in spec:
        kwargs["K4p"] = float(spec["K4_prime"])
    if "c" in spec:
        kwargs["c_k4"] = float(spec["c"])
    if "B" in spec:
        kwargs["B"] = tuple(float(p) for p in spec["B"])
    try:
        return InductionParams.for_kernel(
            kern, theta=float(spec["theta"]), eps=float(spec["eps"]),
            gamma=float(spec["gamma"]), delta=float(spec["delta"]),
            lam=float(spec["lambda"]), p_star=float(spec.get("p_star", 1.0)),
            **kwargs)
    except ParameterConstraintError as exc:
        raise ConfigError(f"params: {exc}") from exc


def _parse_k_points(spec, d, path_base="."):
    if spec is None:
        spec = "axis:32"
    if isinstance(spec, str):
        if spec.startswith("file:"):
            doc = json.loads((Path(path_base) / spec[5:]).read_text())
            return np.atleast_2d(np.asarray(doc, dtype=float))
        try:
            name, count = spec.split(":")
            count = int(count)
        except ValueError as exc:
            raise ConfigError(f"k_points: bad spec {spec!r}") from exc
        if name == "axis":
            ks = kernel_mod.axis_ray(d, count)
        elif name == "diag":
            ks = kernel_mod.diagonal_ray(d, count)
        elif name == "axis+diag":
            ks = np.vstack([kernel_mod.axis_ray(d, count),
                            kernel_mod.diagonal_ray(d, count)])
        elif name == "tensor":
            ks = kernel_mod.tensor_grid(d, count)
        else:
            raise ConfigError(f"k_points: unknown generator {name!r}")
        return np.vstack([np.zeros((1, d)), ks])
    return np.atleast_2d(np.asarray(spec, dtype=float))


class RunConfig:
    """Validated run configuration with constructed domain objects."""

    def __init__(self, raw, base_dir="."):
        if "seed" not in raw:
            raise ConfigError("seed: required (runs must be reproducible)")
        self.seed = int(raw["seed"])
        self.base_dir = str(base_dir)
        self.out_dir = raw.get("out", "results")
        self.budgets = dict(raw.get("budgets", {}))
        if "kernel" not in raw:
            raise ConfigError("kernel: required")
        self.kernel = _build_kernel(raw["kernel"])
        if "model" not in raw:
            raise ConfigError("model: required")
        self.model = _build_model(raw["model"], self.kernel, self.budgets)
        self.params = _build_params(raw.get("params"), self.kernel)
        analyses = raw.get("analyses", list(ANALYSES))
        for name in analyses:
            if name not in ANALYSES:
                raise ConfigError(f"analyses: unknown analysis {name!r}")
        if ("verify" in analyses or "gaussian" in analyses) and self.params is None:
            raise ConfigError("params: required when verify or gaussian is requested")
        self.analyses = list(analyses)
        self.options = {name: dict(raw.get(name.replace("-", "_"), {}))
                        for name in ANALYSES}
        self.sweep = raw.get("sweep")
        self.raw = raw


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such config file") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig(raw, base_dir=Path(path).parent)


class _Session:
    """Executes analyses in dependency order with shared lazy artifacts."""

    def __init__(self, cfg, out_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []
        self._constants = None
        self._state = None
        self.failed_bounds = []

    def _emit(self, name):
        self.files.append(name)
        return self.out / name

    # cached intermediates ---------------------------------------------------

    def constants(self):
        if self._constants is None:
            opts = self.cfg.options["critical"]
            self._constants = solve_zc(
                self.cfg.model, M=int(opts.get("M", 4096)),
                tol=float(opts.get("tol", 1e-10)),
                alpha=float(opts.get("alpha", 0.1)))
        return self._constants

    def state(self):
        if self._state is None:
            opts = self.cfg.options["run"]
            z = opts.get("z")
            if z is None:
                z = self.constants().z_c if "critical" in self.cfg.analyses else 1.0
            horizon = int(opts.get("horizon", 64))
            ks = _parse_k_points(opts.get("k_points"), self.cfg.kernel.d,
                                 self.cfg.base_dir)
            cap = int(self.cfg.budgets.get("max_horizon", 2 ** 14))
            self._state = solve(self.cfg.model, float(z), ks, horizon,
                                with_laplacian=True, max_horizon=cap)
        return self._state

    # analyses ----------------------------------------------------------------

    def check_d(self):
        opts = self.cfg.options["check-d"]
        samples = assumption_d_samples(self.cfg.kernel,
                                       per_regime=int(opts.get("per_regime", 64)))
        rep = check_assumption_d(self.cfg.kernel, samples)
        doc = {
            "seed": self.cfg.seed,
            "kernel": json.loads(self.cfg.kernel.to_json()),
            "eta": rep.eta, "c1": rep.c1, "c2": rep.c2,
            "holds_bound1": rep.holds_bound1, "holds_bound2": rep.holds_bound2,
            "holds_bound3": rep.holds_bound3, "worst_k": rep.worst_k,
            "max_mass_ratio": self.cfg.kernel.max_mass_ratio,
            "sigma2_ratio": self.cfg.kernel.sigma2_ratio,
            "sample_count": len(samples),
        }
        _write_json(self._emit("check_d.json"), doc)

    def run(self):
        state = self.state()
        state.to_csv(self._emit("f_table.csv"))
        doc = state.to_json_dict()
        doc["seed"] = self.cfg.seed
        _write_json(self._emit("f_table.json"), doc)

    def critical(self):
        doc = self.constants().to_dict()
        doc["seed"] = self.cfg.seed
        _write_json(self._emit("critical.json"), doc)

    def _norm_estimates(self, state, m_values, opts):
        out = []
        for p in (self.cfg.params.B if self.cfg.params else (1.0,)):
            out.extend(lp_norms(
                state, m_values, p,
                method=opts.get("method", "grid" if self.cfg.kernel.d <= 3
                                else "monte_carlo"),
                resolution=int(opts.get("resolution", 64)),
                mc_samples=opts.get("mc_samples"),
                seed=self.cfg.seed,
                budget=int(self.cfg.budgets.get("max_mc_samples", 10 ** 8))))
        return out

    def verify(self):
        cfg = self.cfg
        opts = cfg.options["verify"]
        state = self.state()
        seq = build_sequence_state(cfg.model, state.z, state.horizon)
        reports = []
        reports += check_h1_h4(cfg.model, state, seq, cfg.params)
        m_hi = min(state.horizon, int(opts.get("m_max", 64)))
        grid = CheckGrid(m_values=tuple(range(2, m_hi + 1)),
                         k_points=state.k_points,
                         z_values=tuple(opts.get("z_values", (state.z,))))
        reports += check_assumption_e(cfg.model, cfg.params, grid)
        eps_primes = tuple(opts.get("eps_prime", (0.0, cfg.params.eps)))
        reports += check_assumption_g(cfg.model, cfg.params, grid, eps_primes)
        norm_ms = [m for m in range(1, state.horizon + 1)]
        norms = self._norm_estimates(state, norm_ms, cfg.options["norms"])
        reports += check_f_bounds(state, cfg.params, norms,
                                  supplied_K=opts.get("K"))
        reports += check_consequences(cfg.model, state, seq, cfg.params,
                                      norms=norms,
                                      supplied=opts.get("constants"))
        self.failed_bounds = [r.bound_id for r in reports if r.passes is False]
        _write_json(self._emit("verify.json"),
                    {"seed": cfg.seed, "z": state.z,
                     "reports": [r.to_dict() for r in reports],
                     "failed": self.failed_bounds})
        with open(self._emit("verify.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"{'bound':8s} {'empirical':>14s} {'supplied':>10s} "
                     f"{'passes':>7s} {'tested':>8s}\n")
            for r in reports:
                sup = "-" if r.supplied is None else f"{r.supplied:g}"
                ok = "-" if r.passes is None else ("yes" if r.passes else "NO")
                fh.write(f"{r.bound_id:8s} {r.empirical_constant:14.6e} "
                         f"{sup:>10s} {ok:>7s} {r.tested_count:8d}\n")

    def norms(self):
        opts = self.cfg.options["norms"]
        state = self.state()
        m_values = opts.get("m_values", list(range(1, state.horizon + 1)))
        ests = self._norm_estimates(state, m_values, opts)
        with open(self._emit("norms.csv"), "w", encoding="utf-8") as fh:
            fh.write("m,p,value,std_error,method,samples,seed\n")
            for est in ests:
                seed = "" if est.seed is None else est.seed
                fh.write(f"{est.m},{est.p!r},{est.value!r},{est.std_error!r},"
                         f"{est.method},{est.sample_count},{seed}\n")

    def gaussian(self):
        cfg = self.cfg
        opts = cfg.options["gaussian"]
        constants = self.constants()
        ladder = tuple(int(n) for n in opts.get("n_ladder", DEFAULT_LADDER))
        mags = tuple(float(x) for x in opts.get("k_magnitudes",
                                                (0.0, 0.5, 1.0, 2.0)))
        probe = probe_clt(cfg.model, constants, cfg.params, n_ladder=ladder,
                          magnitudes=mags)
        vprobe = probe_variance(cfg.model, constants, n_ladder=ladder)
        with open(self._emit("gaussian.csv"), "w", encoding="utf-8") as fh:
            fh.write(f"# seed={cfg.seed}\n")
            fh.write("n,k_magnitude,direction,ratio,regime_flag\n")
            for i, n in enumerate(probe.n_values):
                for j, lab in enumerate(probe.labels):
                    fh.write(f"{n},{probe.magnitudes[j]!r},{lab},"
                             f"{probe.ratios[i, j]!r},"
                             f"{int(probe.regime_mask[i, j])}\n")
        _write_json(self._emit("gaussian_summary.json"), {
            "seed": cfg.seed, "A_used": probe.A_used, "v_used": probe.v_used,
            "delta_hat": probe.delta_hat, "theta_hat": probe.theta_hat,
            "variance_ratios": dict(zip(map(str, vprobe.n_values),
                                        vprobe.ratios)),
            "variance_delta_hat": vprobe.delta_hat,
        })

    def manifest(self, complete=True, error=None):
        entries = {}
        for name in sorted(self.files):
            digest = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
            entries[name] = digest
        doc = {"seed": self.cfg.seed, "complete": complete, "files": entries}
        if error is not None:
            doc["error"] = error
        _write_json(self.out / "manifest.json", doc)


_STEPS = {
    "check-d": _Session.check_d,
    "run": _Session.run,
    "critical": _Session.critical,
    "verify": _Session.verify,
    "norms": _Session.norms,
    "gaussian": _Session.gaussian,
}


def run_all(cfg, out_dir=None, analyses=None):
    """Execute the requested analyses in dependency order; returns exit status.

    Partial outputs are retained on failure, with the manifest marking the
    run incomplete and naming the failed analysis.
    """
    requested = analyses if analyses is not None else cfg.analyses
    order = [name for name in ANALYSES if name in requested]
    if cfg.sweep:
        return _run_sweep(cfg, out_dir, order)
    session = _Session(cfg, out_dir or cfg.out_dir)
    for name in order:
        try:
            _STEPS[name](session)
        except Exception as exc:  # noqa: BLE001 - reported in the manifest
            session.manifest(complete=False,
                             error=f"{name}: {type(exc).__name__}: {exc}")
            print(f"error in analysis {name}: {exc}", file=sys.stderr)
            return 1
    session.manifest(complete=True)
    if session.failed_bounds:
        print(f"bounds failed: {', '.join(session.failed_bounds)}",
              file=sys.stderr)
        return 2
    return 0


def _set_dotted(doc, dotted, value):
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        node = node.setdefault(key, {})
    node[keys[-1]] = value


def _run_sweep(cfg, out_dir, order):
    base = Path(out_dir or cfg.out_dir)
    field = cfg.sweep.get("field")
    values = cfg.sweep.get("values")
    if not field or values is None:
        raise ConfigError("sweep: needs 'field' and 'values'")
    status = 0
    for i, value in enumerate(values):
        raw = json.loads(json.dumps(cfg.raw))
        raw.pop("sweep", None)
        _set_dotted(raw, field, value)
        sub = RunConfig(raw, base_dir=cfg.base_dir)
        rc = run_all(sub, out_dir=base / f"sweep_{i:02d}", analyses=order)
        status = max(status, rc)
    return status


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lacelab",
        description="Recursion laboratory: solve, locate the critical point, "
                    "and check every stated bound numerically.")
    parser.add_argument("--config", type=str, default=None,
                        help="JSON run configuration")
    parser.add_argument("--out", type=str, default=None,
                        help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed override (config seed is mandatory otherwise)")
    parser.add_argument("--kernel", type=str, default=None,
                        metavar="d:L[:include-origin]",
                        help="kernel override")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ANALYSES:
        p = sub.add_parser(name)
        if name == "run":
            p.add_argument("--model", type=str, default=None,
                           help="model kind override")
            p.add_argument("--z", type=float, default=None)
            p.add_argument("--horizon", type=int, default=None)
            p.add_argument("--k-file", type=str, default=None,
                           help="JSON file with a list of k vectors")
    sub.add_parser("all")
    return parser


def _config_from_args(args):
    if args.config is not None:
        cfg_raw = json.loads(Path(args.config).read_text())
        base = Path(args.config).parent
    else:
        cfg_raw = {}
        base = Path(".")
    if args.command != "all":
        cfg_raw["analyses"] = [args.command]
    if args.seed is not None:
        cfg_raw["seed"] = args.seed
    if args.kernel is not None:
        cfg_raw["kernel"] = args.kernel
    if args.out is not None:
        cfg_raw["out"] = args.out
    if "model" not in cfg_raw:
        cfg_raw["model"] = {"kind": "simple_random_walk"}
    if getattr(args, "model", None):
        cfg_raw.setdefault("model", {})
        cfg_raw["model"]["kind"] = args.model
    run_opts = cfg_raw.setdefault("run", {})
    if getattr(args, "z", None) is not None:
        run_opts["z"] = args.z
    if getattr(args, "horizon", None) is not None:
        run_opts["horizon"] = args.horizon
    if getattr(args, "k_file", None) is not None:
        run_opts["k_points"] = f"file:{args.k_file}"
    return RunConfig(cfg_raw, base_dir=base)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except (ConfigError, ParameterConstraintError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    analyses = cfg.analyses if args.command == "all" else [args.command]
    try:
        return run_all(cfg, out_dir=args.out, analyses=analyses)
    except (ConfigError, ParameterConstraintError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

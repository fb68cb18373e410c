"""Batch front door: configure couples/operators/parameters, run the
verification suites and net pipelines, emit machine-readable tables.

Determinism contract: a fixed config (after CLI overrides) produces
byte-identical output across runs and across --parallel settings.  All
randomness flows through seeds stored in the config, reports carry the
config digest and tool version, and parallel cells are merged in input
order, never completion order.

Exit status: 0 when every requested inequality/coverage check passes,
1 when a check fails (the first failure is named on stderr), 2 for
configuration errors.
"""

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .approx import (
    CompactEnvelope,
    TruncationFamily,
    TruncationProjection,
    defect_bound_report,
    select_projection,
)
from .compactness import (
    DefectAuditError,
    InterpNetReport,
    TaggedNorm,
    audit_net,
    build_interp_net,
    defect_interp_report,
    greedy_net,
    plateau_factor,
    sample_norm_sphere,
    sum_net_pipeline,
)
from .couples import CoupleSpec, SpaceSpec
from .interpolation import InterpParams, verify_interp_inequality, verify_k_inequality
from .kfunc import compute_k_curve
from .operators import make_operator

INF = math.inf

WHICH_CHOICES = (
    "k-inequality",      # pointwise K bound on the dyadic t grid
    "interp-inequality", # shifted-grid interpolation-norm bound
    "defect-b0",         # truncation defect bound in the 0-norm
    "defect-interp",     # truncation defect bound in the interpolation norm
    "sum-net",           # dyadic-splitting net pipeline in the sum norm
    "plateau",           # net sizes stable across dimensions
    "all",
)


class ConfigError(ValueError):
    pass


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# config loading


def _weights(spec, dim, where):
    if spec == "unit":
        return np.ones(dim)
    if isinstance(spec, list):
        w = np.asarray(spec, dtype=float)
        if w.shape != (dim,):
            raise ConfigError(f"{where}: weights length {w.shape[0]} != dim {dim}")
        return w
    raise ConfigError(f"{where}: weights must be 'unit' or a list")


def _exponent(spec, where):
    if spec == "inf":
        return INF
    try:
        return float(spec)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: exponent must be a number or 'inf'") from None


def _couple(obj, dim, where):
    try:
        s0 = SpaceSpec(_exponent(obj["space0"]["p"], where + ".space0"),
                       _weights(obj["space0"]["weights"], dim, where + ".space0"))
        s1 = SpaceSpec(_exponent(obj["space1"]["p"], where + ".space1"),
                       _weights(obj["space1"]["weights"], dim, where + ".space1"))
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc}") from None
    return CoupleSpec(space0=s0, space1=s1)


def _envelope(spec, dim, where):
    if spec is None:
        return None
    if spec == "dyadic":
        return np.exp2(-np.arange(1, dim + 1, dtype=float))
    if isinstance(spec, list):
        k = np.asarray(spec, dtype=float)
        if k.shape != (dim,):
            raise ConfigError(f"{where}: envelope length {k.shape[0]} != dim {dim}")
        return k
    raise ConfigError(f"{where}: envelope must be 'dyadic' or a list")


def _count(spec, dim, where):
    """Sample counts may scale with the dimension: '4n' or '128+2n'."""
    if isinstance(spec, str):
        expr = spec.replace(" ", "")
        if expr.endswith("n"):
            base, _, coef = expr[:-1].rpartition("+")
            try:
                return max(1, int(float(base or 0) + float(coef or 1) * dim))
            except ValueError:
                pass
        raise ConfigError(f"{where}: count must be an int, '<k>n' or '<c>+<k>n'")
    return int(spec)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for key in ("couple_a", "couple_b", "operator", "interp"):
        if key not in cfg:
            raise ConfigError(f"{path}: missing top-level field {key!r}")
    if "dims" in cfg:
        cfg["dims"] = [int(d) for d in cfg["dims"]]
    elif "dim" in cfg:
        cfg["dims"] = [int(cfg["dim"])]
    else:
        raise ConfigError(f"{path}: need 'dim' or 'dims'")
    eps = cfg.get("eps_list", [0.5])
    if not eps or any(e <= 0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps_list must be nonempty, positive, sorted descending")
    cfg["eps_list"] = [float(e) for e in eps]
    cfg.setdefault("sample", {"count": 32, "bound": 1.0, "seed": 0})
    cfg.setdefault("tol", 1e-9)
    return cfg


def config_digest(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:16]


class Context:
    """All objects for one dimension cell of a config."""

    def __init__(self, cfg, dim):
        self.dim = dim
        self.tol = float(cfg["tol"])
        self.couple_a = _couple(cfg["couple_a"], dim, "couple_a")
        self.couple_b = _couple(cfg["couple_b"], dim, "couple_b")
        o = cfg["operator"]
        self.op = make_operator(
            o.get("kind", "envelope_compact"),
            self.couple_a,
            self.couple_b,
            envelope=_envelope(o.get("envelope"), dim, "operator"),
            nonlinearity=o.get("nonlinearity", "abs"),
            nl_param=float(o.get("nl_param", 1.0)),
            scale=float(o.get("scale", 1.0)),
        )
        i = cfg["interp"]
        self.ip = InterpParams(
            theta=float(i["theta"]), p=_exponent(i["p"], "interp"), grid_M=int(i.get("grid_M", 12))
        )
        if self.op.envelope is not None:
            self.env = CompactEnvelope(kappa=self.op.envelope)
            self.fam = TruncationFamily(couple=self.couple_b)
        else:
            self.env = None
            self.fam = None
        s = cfg["sample"]
        self.sample_count = _count(s.get("count", 32), dim, "sample")
        self.sample_bound = float(s.get("bound", 1.0))
        self.sample_seed = int(s.get("seed", 0))
        self.sample_profile = s.get("profile")
        if self.sample_profile is not None:
            self.sample_profile = float(self.sample_profile)

    def gaussians(self, count, stream):
        rng = np.random.default_rng([self.sample_seed, stream, self.dim])
        return rng.standard_normal((count, self.dim))

    def sphere(self, p=None):
        ip = self.ip if p is None else InterpParams(self.ip.theta, p, self.ip.grid_M)
        tag = TaggedNorm(kind="interp", couple=self.couple_a, ip=ip, tol=self.tol)
        return sample_norm_sphere(
            tag, self.sample_count, self.sample_bound, self.sample_seed,
            profile=self.sample_profile,
        )


# ---------------------------------------------------------------------------
# output helpers


def _floats(row):
    return ",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row)


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _emit(path, fmt, digest, payload, csv_rows=None, csv_header=""):
    """payload is JSON-ready; csv_rows a list of tuples for csv format."""
    if fmt == "json":
        doc = {
            "tool": "interp-lab",
            "version": __version__,
            "backend": BACKEND,
            "config_digest": digest,
            **payload,
        }
        _write(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        lines = [
            f"# tool=interp-lab version={__version__} backend={BACKEND} config_digest={digest}",
            csv_header,
        ]
        lines += [_floats(r) for r in csv_rows]
        _write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_kfun(cfg, out, fmt, parallel):
    dim = cfg["dims"][0]
    ctx = Context(cfg, dim)
    kf = cfg.get("kfun", {})
    if "a" in kf:
        a = np.asarray(kf["a"], dtype=float)
        if a.shape != (dim,):
            raise ConfigError(f"kfun.a length {a.shape[0]} != dim {dim}")
    else:
        a = ctx.gaussians(1, stream=int(kf.get("seed", 1)))[0]
    M = int(kf.get("grid_M", ctx.ip.grid_M))
    curve = compute_k_curve(a, ctx.couple_a, M, tol=ctx.tol)
    digest = config_digest(cfg)
    rows = [
        (int(m), float(t), float(v), float(s))
        for m, t, v, s in zip(curve.ms, curve.ts, curve.values, curve.slacks)
    ]
    payload = {
        "command": "kfun",
        "curve": [{"m": r[0], "t": r[1], "K": r[2], "slack": r[3]} for r in rows],
    }
    _emit(out, fmt, digest, payload, csv_rows=rows, csv_header="m,t,K,slack")
    return True


def _check_k_inequality(ctx, parallel):
    A = ctx.gaussians(ctx.sample_count, stream=101)
    ms = np.arange(-10, 11)

    def per_sample(a):
        worst = INF
        ok = True
        for m in ms:
            rep = verify_k_inequality(ctx.op, a, ctx.couple_a, ctx.couple_b, float(2.0**m), tol=ctx.tol)
            ok = ok and rep.holds
            worst = min(worst, rep.margin)
        return ok, worst

    results = _pmap(per_sample, list(A), parallel)
    passed = all(ok for ok, _ in results)
    return {
        "name": "k-inequality",
        "passed": passed,
        "details": {
            "samples": int(len(A)),
            "t_grid_points": int(len(ms)),
            "min_margin": min(w for _, w in results),
        },
    }


def _check_interp_inequality(ctx, parallel):
    A = ctx.gaussians(ctx.sample_count, stream=102)

    def per_sample(a):
        rep = verify_interp_inequality(ctx.op, ctx.couple_a, ctx.couple_b, ctx.ip, a, tol=ctx.tol)
        return rep.holds and rep.per_term_holds, rep.margin

    results = _pmap(per_sample, list(A), parallel)
    return {
        "name": "interp-inequality",
        "passed": all(ok for ok, _ in results),
        "details": {"samples": int(len(A)), "min_margin": min(w for _, w in results)},
    }


def _identity_projection(ctx):
    return TruncationProjection(N=ctx.dim, family=TruncationFamily(couple=ctx.couple_b))


def _check_defect_b0(ctx, eps_list, parallel):
    A = list(ctx.gaussians(ctx.sample_count, stream=103))
    A.append(np.zeros(ctx.dim))
    worst = INF
    passed = True
    for eps in eps_list:
        if ctx.env is not None:
            proj = select_projection(ctx.env, ctx.fam, eps)
        else:
            proj = _identity_projection(ctx)  # no envelope: defect is identically 0

        def per_sample(a, _eps=eps, _proj=proj):
            rep = defect_bound_report(ctx.op, _proj, a, ctx.couple_a, _eps)
            return rep.holds_homogeneous, _eps * rep.a_norm0 - rep.defect_norm0

        results = _pmap(per_sample, A, parallel)
        passed = passed and all(ok for ok, _ in results)
        worst = min(worst, min(w for _, w in results))
    return {
        "name": "defect-b0",
        "passed": passed,
        "details": {"samples": len(A), "eps_list": list(eps_list), "min_margin": worst},
    }


def _check_defect_interp(ctx, eps_list, parallel):
    A = list(ctx.gaussians(ctx.sample_count, stream=104))
    if ctx.env is None:
        return {
            "name": "defect-interp",
            "passed": True,
            "details": {"note": "operator has no envelope; defect is identically zero"},
        }
    per_eps = []
    passed = True
    for eps in eps_list:
        try:
            rep = defect_interp_report(
                ctx.op, ctx.env, ctx.fam, ctx.couple_a, ctx.couple_b, ctx.ip, A, eps, tol=ctx.tol
            )
            per_eps.append({"eps": eps, "holds": rep.holds, "min_margin": min(rep.margins)})
            passed = passed and rep.holds
        except DefectAuditError as exc:
            per_eps.append({"eps": eps, "holds": False, "error": str(exc)})
            passed = False
    return {"name": "defect-interp", "passed": passed, "details": {"per_eps": per_eps}}


def _check_sum_net(ctx, cfg, parallel):
    samples = ctx.sphere(p=INF)
    grid_M = min(ctx.ip.grid_M, 8)
    report = sum_net_pipeline(
        samples, ctx.op, ctx.couple_a, ctx.couple_b,
        theta=ctx.ip.theta, grid_M=grid_M, eps_list=cfg["eps_list"], tol=ctx.tol,
    )
    return {
        "name": "sum-net",
        "passed": report.all_ok,
        "details": {
            "c2": report.c2,
            "c3": report.c3,
            "per_eps": [
                {"eps": r.eps, "m_star": r.m_star, "net_size": r.net.count,
                 "coverage_max_dist": r.coverage_max_dist, "rho_max": r.rho_max}
                for r in report.per_eps
            ],
        },
    }


def _net_cells(cfg, parallel):
    def run(cell):
        dim, eps = cell
        ctx = Context(cfg, dim)
        samples = ctx.sphere()
        if ctx.env is not None:
            rep = build_interp_net(
                samples, ctx.op, ctx.env, ctx.fam, ctx.couple_a, ctx.couple_b,
                ctx.ip, eps, tol=ctx.tol,
            )
        else:
            tag = TaggedNorm(kind="interp", couple=ctx.couple_b, ip=ctx.ip, tol=ctx.tol)
            TX = ctx.op.apply_batch(samples.elements)
            net = greedy_net(TX, eps, tag)
            rep = InterpNetReport(
                mode="direct", eps=eps, eps0=None, projection_N=None,
                defect_max=None, net=net, audit=audit_net(TX, net),
            )
        return dim, eps, rep

    cells = [(dim, eps) for dim in cfg["dims"] for eps in cfg["eps_list"]]
    return _pmap(run, cells, parallel)


def _check_plateau(cfg, parallel):
    results = _net_cells(cfg, parallel)
    per_eps = {}
    covered = True
    for dim, eps, rep in results:
        per_eps.setdefault(eps, []).append((dim, rep.net.count))
        covered = covered and rep.audit.covered
    details = []
    passed = covered
    for eps, rows in per_eps.items():
        sizes = [n for _, n in rows]
        factor = plateau_factor(sizes)
        ok = factor < 2.0
        passed = passed and ok
        details.append({"eps": eps, "sizes": rows, "factor": factor, "plateau": ok})
    return {"name": "plateau", "passed": passed, "details": {"per_eps": details, "covered": covered}}


def cmd_verify(cfg, which, out, fmt, parallel):
    dim = cfg["dims"][0]
    ctx = Context(cfg, dim)
    names = list(WHICH_CHOICES[:-1]) if which == "all" else [which]
    checks = []
    for name in names:
        if name == "k-inequality":
            checks.append(_check_k_inequality(ctx, parallel))
        elif name == "interp-inequality":
            checks.append(_check_interp_inequality(ctx, parallel))
        elif name == "defect-b0":
            checks.append(_check_defect_b0(ctx, cfg["eps_list"], parallel))
        elif name == "defect-interp":
            checks.append(_check_defect_interp(ctx, cfg["eps_list"], parallel))
        elif name == "sum-net":
            checks.append(_check_sum_net(ctx, cfg, parallel))
        elif name == "plateau":
            checks.append(_check_plateau(cfg, parallel))
    passed = all(c["passed"] for c in checks)
    digest = config_digest(cfg)
    payload = {"command": "verify", "which": names, "checks": checks, "passed": passed}
    rows = [(c["name"], c["passed"]) for c in checks]
    _emit(out, fmt, digest, payload, csv_rows=rows, csv_header="check,passed")
    if not passed:
        first = next(c["name"] for c in checks if not c["passed"])
        print(f"verify: FAILED first at check {first!r}", file=sys.stderr)
    return passed


def cmd_net(cfg, out, fmt, parallel):
    results = _net_cells(cfg, parallel)
    digest = config_digest(cfg)
    table = [(dim, eps, rep.net.count) for dim, eps, rep in results]
    payload = {
        "command": "net",
        "reports": [
            {"dim": dim, **rep.to_json()} for dim, eps, rep in results
        ],
        "table": [{"n": n, "eps": e, "N": N} for n, e, N in table],
    }
    _emit(out, fmt, digest, payload, csv_rows=table, csv_header="n,eps,N")
    return all(rep.audit.covered for _, _, rep in results)


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="interp-lab",
        description="K-functional / interpolation-norm laboratory with eps-net certificates",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("kfun", "verify", "net"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", required=True)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--parallel", type=int, default=1)
        if name == "verify":
            sp.add_argument("--which", choices=WHICH_CHOICES, default="all")
    args = ap.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.setdefault("sample", {})["seed"] = args.seed
            cfg.setdefault("kfun", {})["seed"] = args.seed
        if args.tol is not None:
            cfg["tol"] = args.tol
        if args.command == "kfun":
            ok = cmd_kfun(cfg, args.out, args.format, args.parallel)
        elif args.command == "verify":
            ok = cmd_verify(cfg, args.which, args.out, args.format, args.parallel)
        else:
            ok = cmd_net(cfg, args.out, args.format, args.parallel)
    except ConfigError as exc:
        print(f"interp-lab: config error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

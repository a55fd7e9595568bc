"""Command-line experiment driver.

``circlezeros run --config cfg.json`` runs one experiment and writes its data
files (each with a ``.meta.json`` sidecar) plus ``manifest.json`` into the
output directory.  ``circlezeros compare A B`` runs a two-sample test on two
gap or angle files, and ``circlezeros rerun manifest.json`` repeats a run and
checks that every data file is byte-identical.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io as cio
from .epstein import (
    QuadraticForm,
    epstein_completed,
    epstein_zero_spacings,
    epstein_zeta,
    random_forms,
)
from .errors import CircleZerosError, ConfigInvalid, FormatError
from .measures import CoefficientMap, check_jacobian, random_configuration
from .samplers import EnsembleSpec, Model, SampleBatch, gaussian_coefficients, sample
from .seeding import item_rng
from .stats import (
    dunnage_real_zero_count,
    fraction_on_circle,
    pair_correlation,
    repulsion_exponent,
    spacing_histogram,
    spacing_sample,
    two_sample_test,
)

DEFAULT_OUT = "circlezeros_out"

SCHEMAS = {
    "sample": ({"ensemble", "count"}, {"max_attempts", "burn_in", "thin", "chains"}),
    "jacobian-check": ({"N", "trials"}, {"map", "pairs", "step"}),
    "spacings": (set(), {"ensemble", "count", "input", "bins", "bin_width", "s_max", "r2",
                         "max_attempts", "burn_in", "thin", "chains"}),
    "fraction": ({"N", "epsilon", "count"}, {"tolerance"}),
    "dunnage": ({"N", "samples"}, set()),
    "epstein-eval": ({"form", "s"}, set()),
    "epstein-zeros": ({"t_max"}, {"forms", "random", "t_min", "step", "bin_width"}),
    "compare": ({"a", "b"}, {"test", "alpha", "bins"}),
}
COMMON = {"experiment", "seed", "tolerance", "alpha"}


# -- config ------------------------------------------------------------------


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    kind = cfg.get("experiment")
    if kind not in SCHEMAS:
        raise ConfigInvalid(f"unknown experiment {kind!r}; expected one of {sorted(SCHEMAS)}")
    required, optional = SCHEMAS[kind]
    missing = required - cfg.keys()
    if missing:
        raise ConfigInvalid(f"{kind}: missing keys {sorted(missing)}")
    unknown = cfg.keys() - required - optional - COMMON
    if unknown:
        raise ConfigInvalid(f"{kind}: unknown keys {sorted(unknown)}")
    if kind == "spacings" and "input" not in cfg and not {"ensemble", "count"} <= cfg.keys():
        raise ConfigInvalid("spacings needs either input or ensemble and count")
    if kind == "epstein-zeros" and ("forms" in cfg) == ("random" in cfg):
        raise ConfigInvalid("epstein-zeros needs exactly one of forms or random")
    return cfg


def _spec(cfg: dict) -> EnsembleSpec:
    ens = dict(cfg["ensemble"])
    ens["seed"] = cfg["seed"]
    if cfg.get("tolerance") is not None:
        ens["tolerance"] = cfg["tolerance"]
    try:
        return EnsembleSpec.from_dict(ens)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad ensemble: {exc}") from exc


def _sampler_kw(cfg: dict) -> dict:
    return {k: cfg[k] for k in ("max_attempts", "burn_in", "thin", "chains") if k in cfg}


# -- experiments -------------------------------------------------------------


class Context:
    def __init__(self, out: Path, cfg: dict, workers: int):
        self.out = out
        self.cfg = cfg
        self.workers = workers
        self.files: list[Path] = []

    def meta(self, **extra) -> dict:
        base = {"experiment": self.cfg["experiment"], "config": self.cfg, "version": __version__}
        base.update(extra)
        return base

    def csv(self, name, header, rows, **meta):
        self.files += cio.write_csv(self.out / name, header, rows, self.meta(**meta))

    def jsonl(self, name, records, **meta):
        self.files += cio.write_jsonl(self.out / name, records, self.meta(**meta))

    def json(self, name, obj, **meta):
        self.files += cio.write_json(self.out / name, obj, self.meta(**meta))


def _run_sample(ctx: Context) -> dict:
    cfg = ctx.cfg
    spec = _spec(cfg)
    count = int(cfg["count"])
    if spec.model is Model.GAUSSIAN_SR:
        coeffs = gaussian_coefficients(spec, count, ctx.workers)
        ctx.jsonl("sample.jsonl", ({"coeffs": [[c.real, c.imag] for c in row]} for row in coeffs),
                  ensemble=spec.to_dict())
        summary = {"count": count}
    else:
        batch = sample(spec, count, workers=ctx.workers, **_sampler_kw(cfg))
        ctx.jsonl("sample.jsonl", batch.angles, ensemble=spec.to_dict(), domain=batch.domain)
        ctx.csv("sample.csv", [f"angle_{j}" for j in range(batch.angles.shape[1])],
                batch.angles.tolist(), ensemble=spec.to_dict(), domain=batch.domain)
        summary = {"accepted": batch.accepted, "attempted": batch.attempted,
                   "acceptance_rate": batch.acceptance_rate, "domain": batch.domain,
                   "info": batch.info}
    ctx.json("sample.json", summary, ensemble=spec.to_dict())
    return summary


def _run_jacobian(ctx: Context) -> dict:
    cfg = ctx.cfg
    n = int(cfg["N"])
    trials = int(cfg["trials"])
    map_kind = cfg.get("map", "complex")
    step = float(cfg.get("step", 1e-5))
    if map_kind == "real":
        map_id = CoefficientMap.REAL
    elif map_kind == "complex":
        map_id = CoefficientMap.COMPLEX_ODD if n % 2 else CoefficientMap.COMPLEX_EVEN
    else:
        raise ConfigInvalid("map must be 'complex' or 'real'")
    pairs_cfg = cfg.get("pairs", "all")
    rows = []
    for i in range(trials):
        rng = item_rng(cfg["seed"], i)
        if map_id is CoefficientMap.REAL:
            m = 0
        elif pairs_cfg == "all":
            m = i % (n // 2 + 1)
        else:
            m = int(pairs_cfg)
        point = random_configuration(rng, map_id, n, m)
        res = check_jacobian(map_id, point, n, m, step)
        rows.append((i, m, res.closed_form, res.oracle, res.rel_error))
    ctx.csv("jacobian_check.csv", ["trial", "n_pairs", "closed_form", "oracle", "rel_error"], rows,
            map=map_id.value, degree=n)
    worst = max(r[4] for r in rows) if rows else float("nan")
    summary = {"trials": trials, "max_rel_error": worst, "map": map_id.value, "N": n}
    ctx.json("jacobian_check.json", summary)
    return summary


def _load_gap_source(path: str, domain: str | None = None) -> tuple[np.ndarray, str]:
    """Angle sets from JSONL (with domain from the sidecar) and the domain used."""
    p = Path(path)
    if not p.exists():
        raise FormatError(f"{p}: no such file")
    angles = cio.read_angle_sets(p)
    meta = cio.read_meta(p)
    return angles, domain or meta.get("domain", "circle")


def _run_spacings(ctx: Context) -> dict:
    cfg = ctx.cfg
    if "input" in cfg:
        angles, domain = _load_gap_source(cfg["input"])
        source = {"input": cfg["input"]}
        batch = SampleBatch(angles, len(angles), (), domain)
    else:
        spec = _spec(cfg)
        batch = sample(spec, int(cfg["count"]), workers=ctx.workers, **_sampler_kw(cfg))
        source = {"ensemble": spec.to_dict()}
    gaps, hist = spacing_histogram(batch, bins=int(cfg.get("bins", 40)),
                                   bin_width=cfg.get("bin_width"), s_max=float(cfg.get("s_max", 4.0)))
    ctx.csv("gaps.csv", ["unfolded_gap"], ((g,) for g in gaps.unfolded_gaps), **source,
            domain=batch.domain)
    ctx.csv("spacing_histogram.csv", ["bin_lo", "bin_hi", "count", "mass"],
            zip(hist.edges[:-1], hist.edges[1:], hist.counts.tolist(), hist.masses), **source)
    summary = {"gaps": int(gaps.unfolded_gaps.size), "mean_gap": gaps.mean,
               "first_bin_mass": float(hist.masses[0]), "edge": gaps.edge}
    if "r2" in cfg:
        r2cfg = cfg["r2"]
        edges = np.linspace(0.0, float(r2cfg.get("delta_max", math.pi)), int(r2cfg.get("bins", 100)) + 1)
        if "edges" in r2cfg:
            edges = np.asarray(r2cfg["edges"], dtype=float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r2 = pair_correlation(batch, edges)
        ctx.csv("pair_correlation.csv", ["delta_lo", "delta_hi", "r2", "count", "stderr"],
                zip(r2.edges[:-1], r2.edges[1:], r2.values, r2.counts, r2.stderr), **source,
                normalization=r2.normalization)
        if "fit_range" in r2cfg:
            slope = repulsion_exponent(r2, tuple(r2cfg["fit_range"]))
            summary["repulsion_exponent"] = {"slope": slope.estimate, "stderr": slope.stderr}
    ctx.json("spacings.json", summary, **source)
    return summary


def _run_fraction(ctx: Context) -> dict:
    cfg = ctx.cfg
    spec = EnsembleSpec(Model.GAUSSIAN_SR, int(cfg["N"]), float(cfg["epsilon"]), cfg["seed"],
                        cfg.get("tolerance"))
    coeffs = gaussian_coefficients(spec, int(cfg["count"]), ctx.workers)
    res = fraction_on_circle(coeffs, spec.tol)
    summary = {"fraction": res.estimate, "stderr": res.stderr, "skipped": res.skipped,
               "count": int(cfg["count"]), "reference_large_epsilon": 1 / math.sqrt(3)}
    ctx.json("fraction.json", summary, ensemble=spec.to_dict())
    return summary


def _run_dunnage(ctx: Context) -> dict:
    cfg = ctx.cfg
    n = int(cfg["N"])
    res = dunnage_real_zero_count(n, int(cfg["samples"]), cfg["seed"], ctx.workers)
    summary = {"mean": res.estimate, "stderr": res.stderr, "N": n,
               "samples": int(cfg["samples"]), "leading_term": 2 * n / math.sqrt(3)}
    ctx.json("dunnage.json", summary)
    return summary


def _parse_s(values) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)) and len(v) == 2:
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, (int, float)):
            out.append(complex(v))
        else:
            raise ConfigInvalid(f"cannot read s value {v!r}; use a number or [re, im]")
    return np.array(out)


def _form(d) -> QuadraticForm:
    try:
        return QuadraticForm.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ConfigInvalid(f"bad form {d!r}") from exc


def _run_epstein_eval(ctx: Context) -> dict:
    cfg = ctx.cfg
    q = _form(cfg["form"])
    s = _parse_s(cfg["s"])
    lam = np.atleast_1d(epstein_completed(q, s))
    lq = np.atleast_1d(epstein_zeta(q, s))
    rows = [tuple(float(x) for x in (v.real, v.imag, a.real, a.imag, b.real, b.imag))
            for v, a, b in zip(s, lam, lq)]
    ctx.csv("epstein_eval.csv", ["s_re", "s_im", "lambda_re", "lambda_im", "l_re", "l_im"], rows,
            form=q.to_dict())
    for r in rows:
        print(f"s=({r[0]!r}, {r[1]!r})  Lambda=({r[2]!r}, {r[3]!r})  L=({r[4]!r}, {r[5]!r})")
    return {"points": len(rows)}


def _run_epstein_zeros(ctx: Context) -> dict:
    cfg = ctx.cfg
    if "forms" in cfg:
        forms = [_form(d) for d in cfg["forms"]]
        ensemble = {"forms": "given"}
    else:
        rnd = cfg["random"]
        box = tuple(rnd.get("box", (-5.0, 5.0)))
        forms = random_forms(int(rnd["count"]), cfg["seed"], box)
        ensemble = {"forms": "uniform box, positive-definite filter", "box": list(box)}
    t_min = float(cfg.get("t_min", 0.0))
    t_max = float(cfg["t_max"])
    step = float(cfg.get("step", 0.01))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = epstein_zero_spacings(forms, (t_min, t_max), step)
    notes = sorted({str(w.message) for w in caught})
    rows = [(i, t, 1e-9) for i, ts in enumerate(res.zeros) for t in ts.tolist()]
    ctx.csv("zeros.csv", ["form", "t", "refinement_width"], rows, ensemble=ensemble,
            forms=[f.to_dict() for f in forms])
    ctx.csv("gaps.csv", ["unfolded_gap"], ((g,) for g in res.unfolded_gaps), ensemble=ensemble)
    bw = float(cfg.get("bin_width", 0.1))
    gaps = res.unfolded_gaps
    summary = {"forms": [f.to_dict() for f in forms], "zeros_per_form": [len(z) for z in res.zeros],
               "mean_unfolded_gap": float(gaps.mean()) if gaps.size else None,
               "first_bin_mass": float(np.mean(gaps < bw)) if gaps.size else None,
               "bin_width": bw, "warnings": notes, "ensemble": ensemble}
    ctx.json("epstein_zeros.json", summary)
    return summary


def load_compare_data(path: str) -> np.ndarray:
    """Unfolded gaps from a JSONL angle file or a numeric CSV column."""
    p = Path(path)
    if not p.exists():
        raise FormatError(f"{p}: no such file")
    if p.suffix == ".jsonl":
        angles, domain = _load_gap_source(path)
        return spacing_sample(SampleBatch(angles, len(angles), (), domain)).unfolded_gaps
    if p.suffix == ".csv":
        return cio.read_csv_column(p)
    raise FormatError(f"{p}: expected .jsonl angle sets or .csv values")


def compare_files(a: str, b: str, test: str = "ks", alpha: float = 0.01, bins: int = 20) -> dict:
    xs = load_compare_data(a)
    ys = load_compare_data(b)
    kw = {"bins": bins} if test != "ks" else {}
    res = two_sample_test(xs, ys, test, **kw)
    return {"test": test, "statistic": res.statistic, "p_value": res.p_value,
            "n_a": int(xs.size), "n_b": int(ys.size), "alpha": alpha,
            "rejected": bool(res.p_value < alpha)}


def _run_compare(ctx: Context) -> dict:
    cfg = ctx.cfg
    rep = compare_files(cfg["a"], cfg["b"], cfg.get("test", "ks"), float(cfg.get("alpha", 0.01)),
                        int(cfg.get("bins", 20)))
    ctx.json("compare.json", rep)
    return rep


RUNNERS = {
    "sample": _run_sample,
    "jacobian-check": _run_jacobian,
    "spacings": _run_spacings,
    "fraction": _run_fraction,
    "dunnage": _run_dunnage,
    "epstein-eval": _run_epstein_eval,
    "epstein-zeros": _run_epstein_zeros,
    "compare": _run_compare,
}


# -- driver --------------------------------------------------------------------


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def run_experiment(cfg: dict, out: Path, workers: int = 1) -> dict:
    """Run one validated config into ``out``; returns the manifest dict."""
    cfg = validate_config(dict(cfg))
    cfg.setdefault("seed", 0)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    ctx = Context(out, cfg, workers)
    summary = RUNNERS[cfg["experiment"]](ctx)
    manifest = {
        "experiment": cfg["experiment"],
        "config": cfg,
        "seed": cfg["seed"],
        "version": __version__,
        "started": started,
        "finished": _now(),
        "workers": workers,
        "outputs": {p.name: cio.sha256_file(p) for p in ctx.files},
        "summary": summary,
    }
    (out / "manifest.json").write_text(cio.dumps(manifest) + "\n", encoding="utf-8")
    return manifest


def _out_dir(arg: str | None) -> Path:
    return Path(os.environ.get("CIRCLEZEROS_OUT") or arg or DEFAULT_OUT)


def _error(exc: Exception, context: dict) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), **context}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circlezeros", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help=f"output directory (default {DEFAULT_OUT}; "
                                     "CIRCLEZEROS_OUT overrides)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                       help="worker processes (results do not depend on this)")

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the experiment config")
    p_run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p_run.add_argument("--tolerance", type=float, help="on-circle tolerance override")
    p_run.add_argument("--alpha", type=float, help="significance level for compare")
    common(p_run)

    p_cmp = sub.add_parser("compare", help="two-sample test on gap or angle files")
    p_cmp.add_argument("a")
    p_cmp.add_argument("b")
    p_cmp.add_argument("--test", choices=["ks", "chi-square"], default="ks")
    p_cmp.add_argument("--alpha", type=float, default=0.01)
    p_cmp.add_argument("--bins", type=int, default=20)

    p_re = sub.add_parser("rerun", help="repeat a run from its manifest and compare digests")
    p_re.add_argument("manifest")
    common(p_re)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "compare":
        try:
            rep = compare_files(args.a, args.b, args.test, args.alpha, args.bins)
        except (CircleZerosError, OSError, ValueError) as exc:
            return _error(exc, {"command": "compare"})
        print(json.dumps(rep, sort_keys=True))
        return 1 if rep["rejected"] else 0

    if args.command == "run":
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            return _error(ConfigInvalid(str(exc)), {"command": "run", "config": args.config})
        if isinstance(cfg, dict):
            if args.seed is not None:
                cfg["seed"] = args.seed
            if args.tolerance is not None:
                cfg["tolerance"] = args.tolerance
            if args.alpha is not None:
                cfg["alpha"] = args.alpha
        try:
            manifest = run_experiment(cfg, _out_dir(args.out), max(1, args.workers))
        except (CircleZerosError, OSError, ValueError) as exc:
            name = cfg.get("experiment") if isinstance(cfg, dict) else None
            return _error(exc, {"command": "run", "experiment": name})
        print(json.dumps({"manifest": str(_out_dir(args.out) / "manifest.json"),
                          "summary": manifest["summary"]}, sort_keys=True, default=str))
        return 0

    # rerun
    try:
        old = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        out = _out_dir(args.out) if (args.out or os.environ.get("CIRCLEZEROS_OUT")) else \
            Path(args.manifest).parent / "rerun"
        new = run_experiment(old["config"], out, max(1, args.workers))
    except (CircleZerosError, OSError, ValueError, KeyError) as exc:
        return _error(exc, {"command": "rerun", "manifest": args.manifest})
    diffs = sorted(k for k in old["outputs"] if old["outputs"][k] != new["outputs"].get(k))
    report = {"identical": not diffs, "differing": diffs, "out": str(out)}
    print(json.dumps(report, sort_keys=True))
    return 0 if not diffs else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``freeqid <command> ...``.

Exit codes: 0 success, 1 failed verification or other library error,
2 bad arguments or model spec, 3 invalid parameters, 4 no convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bpx, cumulants, deconvolve, families, measures, transforms, verify
from .errors import FreeQIDError, NoConvergence, NotCertified, ValidityError


class SpecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration and formatting
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    tol: float | None = None
    grid: tuple | None = None
    truncation: int | None = None
    fmt: str = "json"
    out: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise SpecError("--tol must be positive")
        if self.fmt not in ("csv", "json"):
            raise SpecError("--format must be csv or json")


def parse_grid(text):
    """``"lo:hi:step"`` to an array including both ends."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise SpecError(f"grid must be lo:hi:step, got {text!r}") from None
    if not step > 0 or hi < lo:
        raise SpecError("grid needs step > 0 and hi >= lo")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


_MARK = "\u0000F"


def _prep(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return f"{_MARK}{v:.17g}"
    if isinstance(obj, complex):
        return [_prep(obj.real), _prep(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): _prep(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_prep(v) for v in obj]
    return str(obj)


def dumps(obj):
    """JSON with floats at 17 significant digits and sorted keys."""
    text = json.dumps(_prep(obj), sort_keys=True, indent=2)
    return re.sub(r'"\\u0000F([^"]*)"', r"\1", text)


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# model specs
# ---------------------------------------------------------------------------

_POSITIONAL = {
    "cauchy": ["a"],
    "semicircle": ["m", "s2"],
    "mp": ["c", "lambda"],
    "fm": ["a", "b"],
    "point": ["x"],
    "gamma": ["a", "sigma2"],
    "rho-acl": ["a", "c", "lambda"],
    "fm-levy": ["b"],
    "mu-plus": ["t"],
    "mu-minus": ["t"],
    "smp": ["u", "x"],
    "two-mp": ["u", "v", "x"],
}


def _num(text):
    text = text.strip()
    try:
        if "/" in text:
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"not a number: {text!r}") from None


def parse_model_spec(text):
    """``"name:k=v,..."`` or ``"name:v1,v2"`` to ``(name, params)``."""
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name == "multi-mp":
        nodes = [_num(v) for v in rest.split(",") if v.strip()]
        return name, {"nodes": nodes}
    if name not in _POSITIONAL:
        raise SpecError(f"unknown model {name!r}; known: {', '.join(sorted(_POSITIONAL))}, multi-mp")
    keys = _POSITIONAL[name]
    params = {}
    parts = [p for p in rest.split(",") if p.strip()] if rest else []
    for i, part in enumerate(parts):
        if "=" in part:
            k, v = part.split("=", 1)
            k = k.strip().lower()
            if k == "lam":
                k = "lambda"
            if k not in keys:
                raise SpecError(f"unknown parameter {k!r} for {name}")
            params[k] = _num(v)
        else:
            if i >= len(keys):
                raise SpecError(f"too many values for {name}")
            params[keys[i]] = _num(part)
    missing = [k for k in keys if k not in params]
    if missing:
        raise SpecError(f"{name} needs {', '.join(missing)}")
    return name, params


def build_model(name, params):
    f = {k: float(v) for k, v in params.items() if k != "nodes"}
    if name == "cauchy":
        return families.Cauchy(f["a"])
    if name == "semicircle":
        return families.Semicircle(f["m"], f["s2"])
    if name == "mp":
        return families.MP(f["c"], f["lambda"])
    if name == "fm":
        return families.FreeMeixner(f["a"], f["b"])
    if name == "point":
        return families.PointMass(f["x"])
    if name == "gamma":
        return deconvolve.gamma_as(f["a"], f["sigma2"])
    if name == "rho-acl":
        return deconvolve.rho_acl(f["a"], f["c"], f["lambda"])
    if name in ("mu-plus", "mu-minus"):
        fam = deconvolve.r_t_family(params["t"], 1 if name == "mu-plus" else -1)
        if fam.model is None:
            raise ValidityError(fam.note)
        return fam.model
    raise SpecError(f"{name} is not a distribution model")


def build_triplet(name, params):
    if name == "smp":
        return deconvolve.smp_triplet(params["u"], params["x"])
    if name == "two-mp":
        return deconvolve.two_mp_triplet(params["u"], params["v"], params["x"])
    if name == "multi-mp":
        return deconvolve.multi_mp_triplet(params["nodes"])
    if name == "fm-levy":
        return measures.FreeTriplet(0.0, deconvolve.fm_quasi_levy_measure(float(params["b"])), 0.0)
    return build_model(name, params).triplet()


def _triplet_json(t):
    return {"type": "triplet", "a": t.a, "gamma": t.gamma,
            "nu": {"atoms": [[x, w] for x, w in t.nu.atoms],
                   "densities": [[c, k.to_json()] for c, k in t.nu.terms]}}


def _pair_json(p):
    return {"type": "pair", "b": p.b,
            "tau": {"atoms": [[x, w] for x, w in p.tau.atoms],
                    "densities": [[c, k.to_json()] for c, k in p.tau.terms]}}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _grid_output(grid, cfg, extra=None):
    if cfg.fmt == "csv":
        return grid.to_csv(12)
    obj = grid.to_json()
    obj["meta"] = dict(grid.meta)
    if extra:
        obj.update(extra)
    return dumps(obj)


def cmd_density(args, cfg):
    name, params = parse_model_spec(args.model)
    xs = cfg.grid if cfg.grid is not None else parse_grid("-5:5:0.01")
    if name == "fm-levy":
        b = float(params["b"])
        safe = np.where(xs == 0, np.nan, xs)
        fs = np.where(xs == 0, 0.0, deconvolve.fm_quasi_levy_density(b, np.where(xs == 0, 1.0, safe)))
        grid = transforms.DensityGrid(xs, fs, (), None, {"model": args.model, "signed": True,
                                                         "undefined_at_zero": bool(np.any(xs == 0))})
        _emit(_grid_output(grid, cfg), cfg)
        return 0
    model = build_model(name, params)
    method = args.method
    if method == "auto":
        method = "stieltjes" if isinstance(model, (families.ImplicitPhi, families.FreeConv)) else "closed"
    if method == "closed":
        fs = model.density(xs)
        grid = transforms.DensityGrid(xs, fs, (), None, {"model": args.model, "method": "closed"})
    else:
        levels = tuple(float(v) for v in args.y_levels.split(",")) if args.y_levels \
            else transforms.DEFAULT_Y_LEVELS
        g = transforms.stieltjes_density(model, xs, levels, basis=args.basis)
        grid = transforms.DensityGrid(g.xs, g.fs, g.y_levels, g.est_error,
                                      {"model": args.model, "method": "stieltjes", "basis": args.basis})
    atoms = model.atoms() if hasattr(model, "atoms") else []
    _emit(_grid_output(grid, cfg, {"atoms": [list(a) for a in atoms]}), cfg)
    return 0


def cmd_triplet(args, cfg):
    if args.model == "classify":
        t = measures.from_json(_read_json(args.input))
        if not isinstance(t, measures.FreeTriplet):
            raise SpecError("input file must hold a triplet")
    else:
        name, params = parse_model_spec(args.model)
        t = build_triplet(name, params)
    obj = _triplet_json(t)
    obj["class"] = deconvolve.classify_triplet(t).to_json()
    _emit(dumps(obj), cfg)
    return 0


def cmd_pair(args, cfg):
    name, params = parse_model_spec(args.model)
    if name in ("smp", "two-mp", "multi-mp", "fm-levy"):
        p = measures.triplet_to_pair(build_triplet(name, params))
    else:
        p = build_model(name, params).pair()
    _emit(dumps(_pair_json(p)), cfg)
    return 0


_KIND = {"moments": "moments", "free": "free_cumulants", "classical": "classical_cumulants"}


def _read_json(path):
    if path is None or path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _read_seq(path):
    raw = _read_json(path)
    if isinstance(raw, dict):
        raw = raw.get("values", raw.get("sequence"))
    if not isinstance(raw, list):
        raise SpecError("sequence file must hold a JSON list")
    return [_num(v) if isinstance(v, str) else (Fraction(v) if isinstance(v, int) else float(v))
            for v in raw]


def cmd_cumulants(args, cfg):
    if args.action == "convert":
        vals = _read_seq(args.input)
        src, dst = _KIND[args.src], _KIND[args.dst]
        if src == dst:
            out = vals
        else:
            mom = vals
            if src == "free_cumulants":
                mom = list(cumulants.free_cumulants_to_moments(vals).values)
            elif src == "classical_cumulants":
                mom = list(cumulants.classical_cumulants_to_moments(vals).values)
            if dst == "moments":
                out = mom
            elif dst == "free_cumulants":
                out = list(cumulants.moments_to_free_cumulants(mom).values)
            else:
                out = list(cumulants.moments_to_classical_cumulants(mom).values)
        _emit(dumps({"kind": dst, "values": out}), cfg)
        return 0
    if args.action == "hankel":
        vals = _read_seq(args.input)
        det = cumulants.hankel_det(vals, args.k)
        _emit(dumps({"k": args.k, "det": det}), cfg)
        return 0
    if args.action == "growth":
        rep = cumulants.exp_growth_check(cumulants.Sequence(_read_seq(args.input), "moments"))
        _emit(dumps({"rate": rep.rate, "bound": rep.bound, "unbounded": rep.unbounded}), cfg)
        return 0
    if args.action == "bernoulli":
        t = cumulants.bernoulli_qid_triplet(float(args.a), cfg.truncation)
        _emit(dumps({"gaussian": t.gaussian, "drift": t.drift,
                     "nu": [[x, w] for x, w in t.nu.atoms], "meta": t.nu.meta}), cfg)
        return 0
    name, params = parse_model_spec(args.model)
    p = build_model(name, params).pair()
    seq = cumulants.cumulants_from_pair(p, args.n, probability=True)
    _emit(dumps({"kind": "free_cumulants", "values": list(seq.values)}), cfg)
    return 0


_DECONV_KEYS = ("a", "c", "lambda", "lam", "sigma2", "b", "u", "v", "x", "t")


def _deconv_spec(args):
    """Model spec with parameters given as ``--key value`` appended."""
    extra = [f"{k}={getattr(args, 'p_' + k)}" for k in _DECONV_KEYS
             if getattr(args, "p_" + k, None) is not None]
    if not extra:
        return args.model
    sep = "," if ":" in args.model else ":"
    return args.model + sep + ",".join(extra)


def cmd_deconv(args, cfg):
    name, params = parse_model_spec(_deconv_spec(args))
    if name == "multi-mp":
        w = deconvolve.multi_mp_weights(params["nodes"])
        obj = {"nodes": params["nodes"], "weights": w, "sum": sum(w)}
        obj["triplet"] = _triplet_json(deconvolve.multi_mp_triplet(params["nodes"]))
        _emit(dumps(obj), cfg)
        return 0
    t = build_triplet(name, params)
    obj = {"triplet": _triplet_json(t), "class": deconvolve.classify_triplet(t).to_json()}
    if args.pick:
        model = build_model(name, params)
        exact = model.pick_exact
        obj["pick"] = transforms.pick_check(model.phi(), exact=exact).to_json()
    if cfg.grid is not None:
        xs = cfg.grid
        if name == "fm-levy":
            fs = np.where(xs == 0, 0.0, deconvolve.fm_quasi_levy_density(float(params["b"]),
                                                                       np.where(xs == 0, 1.0, xs)))
        else:
            fs = build_model(name, params).density(xs)
        grid = transforms.DensityGrid(xs, fs, (), None)
        if cfg.fmt == "csv":
            _emit(grid.to_csv(12), cfg)
            return 0
        obj["density"] = grid.to_json()
    _emit(dumps(obj), cfg)
    return 0


def _parse_atoms(text):
    """``"lam:p,lam2:p2"`` to a symmetric atomic measure."""
    atoms = []
    for part in (text or "").split(","):
        if not part.strip():
            continue
        try:
            lam, p = part.split(":")
            lam, p = _num(lam), _num(p)
        except ValueError:
            raise SpecError(f"atoms must be lam:p pairs, got {part!r}") from None
        if not (lam > 0 and p > 0):
            raise SpecError("atom locations and weights must be positive")
        atoms += [(-lam, p), (lam, p)]
    return measures.SignedMeasure(tuple(atoms))


def cmd_bpx(args, cfg):
    pair = bpx.PhiPair(float(args.c), _parse_atoms(args.atoms))
    if args.action == "classify":
        _emit(dumps(bpx.classify(pair).to_json()), cfg)
        return 0
    if args.action == "density":
        xs = cfg.grid if cfg.grid is not None else parse_grid("-10:10:0.01")
        if args.side == "star":
            grid = bpx.mu_star_density(pair, xs)
        else:
            grid = bpx.mu_box_density(pair, xs)
        _emit(_grid_output(grid, cfg), cfg)
        return 0
    name, params = parse_model_spec(args.mu)
    if name == "semicircle":
        tr = measures.FreeTriplet(float(params["s2"]), measures.SignedMeasure(), float(params["m"]))
    elif name == "point":
        tr = measures.FreeTriplet(0.0, measures.SignedMeasure(), float(params["x"]))
    else:
        tr = build_model(name, params).triplet()
    cl, fr = bpx.extended_bp(tr, pair)
    zs = np.linspace(-5, 5, 11)
    zr = zs - 1j
    obj = {"z_classical": zs, "log_cf": [complex(v) for v in cl.log_cf(zs)],
           "z_free": [complex(v) for v in zr], "R": [complex(v) for v in fr.r(zr)]}
    _emit(dumps(obj), cfg)
    return 0


def cmd_verify(args, cfg):
    checks = verify.run(args.suite, cfg.tol)
    ok = all(c.passed for c in checks)
    _emit(dumps({"suite": args.suite, "passed": ok, "checks": [c.to_json() for c in checks]}), cfg)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="json")
    p.add_argument("--out", default=None, help="output path (stdout if omitted)")
    p.add_argument("--tol", type=float, default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="freeqid", description="Signed free Levy-Khintchine toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="density of a model on a grid")
    p.add_argument("model")
    p.add_argument("--grid", default=None, help="lo:hi:step")
    p.add_argument("--method", choices=["auto", "closed", "stieltjes"], default="auto")
    p.add_argument("--basis", choices=["y", "sqrt"], default="y")
    p.add_argument("--y-levels", default=None, help="comma-separated imaginary offsets")
    _common(p)
    p.set_defaults(func=cmd_density)

    for nm, fn in (("triplet", cmd_triplet), ("pair", cmd_pair)):
        p = sub.add_parser(nm, help=f"free characteristic {nm} of a model")
        p.add_argument("model", help="model spec" + (", or 'classify' with --in" if nm == "triplet" else ""))
        if nm == "triplet":
            p.add_argument("--in", dest="input", default=None, help="triplet JSON file for 'classify'")
        _common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("cumulants", help="moment and cumulant utilities")
    cs = p.add_subparsers(dest="action", required=True)
    q = cs.add_parser("convert")
    q.add_argument("--from", dest="src", choices=list(_KIND), required=True)
    q.add_argument("--to", dest="dst", choices=list(_KIND), required=True)
    q.add_argument("--in", dest="input", required=True)
    _common(q)
    q = cs.add_parser("hankel")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--in", dest="input", default=None, help="moment file (stdin if omitted)")
    _common(q)
    q = cs.add_parser("growth")
    q.add_argument("--in", dest="input", required=True)
    _common(q)
    q = cs.add_parser("bernoulli")
    q.add_argument("--a", required=True)
    q.add_argument("--truncation", type=int, default=None)
    _common(q)
    q = cs.add_parser("pair")
    q.add_argument("model")
    q.add_argument("--n", type=int, default=8)
    _common(q)
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("deconv", help="triplet, class and Pick check of a deconvolution")
    p.add_argument("model", help="model spec; parameters may also be given as options")
    p.add_argument("--pick", action="store_true")
    for key in _DECONV_KEYS:
        p.add_argument(f"--{key}", dest=f"p_{key}", default=None)
    p.add_argument("--grid", default=None, help="lo:hi:step; adds the density on this grid")
    _common(p)
    p.set_defaults(func=cmd_deconv)

    p = sub.add_parser("bpx", help="pairs (c, nu) and the extended bijection")
    bs = p.add_subparsers(dest="action", required=True)
    for nm in ("classify", "density", "extend"):
        q = bs.add_parser(nm)
        q.add_argument("--c", type=float, required=True)
        q.add_argument("--atoms", default="", help="lam:p,... for p (delta_-lam + delta_lam)")
        if nm == "density":
            q.add_argument("--side", choices=["star", "box"], default="star")
            q.add_argument("--grid", default=None)
        if nm == "extend":
            q.add_argument("--mu", required=True)
        _common(q)
    p.set_defaults(func=cmd_bpx)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("suite", choices=["transforms", "deconv", "cumulants", "bpx", "all"])
    _common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def _glue_values(argv):
    # let values such as "-4:4:0.01" follow an option without "="
    out = []
    for tok in argv:
        if out and out[-1] in ("--grid", "--y-levels") and tok.startswith("-"):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        threads = int(os.environ.get("FREEDECONV_THREADS", "1"))
        cfg = RunConfig(tol=args.tol, fmt=args.fmt, out=args.out,
                        truncation=getattr(args, "truncation", None), threads=threads)
        grid = getattr(args, "grid", None)
        if grid:
            cfg.grid = parse_grid(grid)
        return args.func(args, cfg)
    except SpecError as exc:
        print(f"freeqid: error: {exc}", file=sys.stderr)
        return 2
    except (ValidityError, NotCertified) as exc:
        print(f"freeqid: invalid parameters: {exc}", file=sys.stderr)
        return 3
    except NoConvergence as exc:
        print(f"freeqid: no convergence: {exc}", file=sys.stderr)
        return 4
    except (FreeQIDError, ValueError, OSError) as exc:
        print(f"freeqid: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit status: 0 success (or verdict true), 1 verdict false, 2 usage or input
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import frames as fr
from . import nogo, quasiprob as qp, serialize as io, star_algebra as sa
from .exceptions import (
    DimensionError,
    DualityError,
    LabelMismatchError,
    NotAFrameError,
    QFrameError,
    UnsupportedDimensionError,
)

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

TOLERANCE_KEYS = {"dual", "classical", "pure", "prob"}
CONFIG_KEYS = {"convention", "tolerances", "seed", "output"}


class UsageError(QFrameError):
    pass


@dataclass
class Config:
    convention: str = "raw"
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None
    output_path: str | None = None
    output_format: str = "json"

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def load_config(path) -> Config:
    obj = io.load(path)
    if not isinstance(obj, dict):
        raise io.FormatError(f"{path}: config must be a JSON object")
    unknown = set(obj) - CONFIG_KEYS
    if unknown:
        raise io.FormatError(f"{path}: unknown config keys {sorted(unknown)}")
    cfg = Config()
    if "convention" in obj:
        if obj["convention"] not in fr.CONVENTIONS:
            raise io.FormatError(f"{path}: convention must be one of {fr.CONVENTIONS}")
        cfg.convention = obj["convention"]
    tols = obj.get("tolerances", {})
    if not isinstance(tols, dict):
        raise io.FormatError(f"{path}: 'tolerances' must be an object")
    for k, v in tols.items():
        if k not in TOLERANCE_KEYS:
            raise io.FormatError(f"{path}: unknown tolerance {k!r}")
        if not isinstance(v, (int, float)) or not v > 0:
            raise io.FormatError(f"{path}: tolerance {k!r} must be a positive number")
    cfg.tolerances = dict(tols)
    if "seed" in obj:
        if not isinstance(obj["seed"], int):
            raise io.FormatError(f"{path}: seed must be an integer")
        cfg.seed = obj["seed"]
    out = obj.get("output", {})
    if not isinstance(out, dict) or set(out) - {"path", "format"}:
        raise io.FormatError(f"{path}: 'output' accepts only 'path' and 'format'")
    cfg.output_path = out.get("path")
    cfg.output_format = out.get("format", "json")
    if cfg.output_format not in ("json", "csv"):
        raise io.FormatError(f"{path}: output format must be json or csv")
    return cfg


def _seed(args, cfg: Config) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    env = os.environ.get("QFRAME_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QFRAME_SEED must be an integer, got {env!r}") from None
    return 0


def _output(args, cfg: Config):
    path = getattr(args, "output", None) or cfg.output_path
    fmt = getattr(args, "format", None) or cfg.output_format
    return path, fmt


def _emit(obj, path) -> None:
    if path:
        io.dump(obj, path)
    else:
        print(io.dumps(obj))


def _load_frame(path) -> fr.Frame:
    return io.frame_from_json(io.load(path), str(path))


def _frame_of_rep(rep_path, frame_path=None):
    values, frame, via = io.rep_from_json(io.load(rep_path), str(rep_path))
    if isinstance(frame, str):
        if frame_path is None:
            raise UsageError(f"{rep_path} references frame {frame} by id; pass --frame")
        loaded = _load_frame(frame_path)
        if loaded.fingerprint != frame:
            raise UsageError(f"{frame_path} is not frame {frame}")
        frame = loaded
    if values.size != len(frame):
        raise DimensionError(f"{rep_path}: {values.size} values for a {len(frame)}-label frame")
    return values, frame, via


# -- subcommands ---------------------------------------------------------------


def cmd_frame_build(args, cfg):
    convention = args.convention or cfg.convention
    f = fr.build_frame(args.kind, args.dim, convention, n=args.n, seed=_seed(args, cfg),
                       positive=args.positive)
    path, _ = _output(args, cfg)
    _emit(io.frame_to_json(f), path)
    print(f"built {args.kind} frame: dim={f.dim} labels={len(f)} convention={f.convention} "
          f"id={f.fingerprint}", file=sys.stderr)
    return EXIT_OK


def cmd_frame_duals(args, cfg):
    f = _load_frame(args.frame)
    if args.paper:
        if f.kind not in ("wootters", "leonhardt"):
            raise UsageError("--paper needs a wootters or leonhardt frame")
        e, scale = fr.paper_dual(f.kind, f.dim, frame=f)
        print(f"fitted_scalar {scale:.17g}")
    else:
        e = fr.canonical_dual(f)
    check = fr.is_dual_pair(f, e, cfg.tol("dual", fr.DUAL_TOL))
    print(f"duality_residual {check.residual:.3e}")
    path, _ = _output(args, cfg)
    _emit(io.frame_to_json(e), path)
    return EXIT_OK if check else EXIT_FALSE


def cmd_frame_check(args, cfg):
    f = _load_frame(args.frame)
    a, b = fr.frame_bounds(f)
    e = _load_frame(args.dual) if args.dual else fr.canonical_dual(f)
    check = fr.is_dual_pair(f, e, cfg.tol("dual", fr.DUAL_TOL))
    print(f"frame_bounds {a:.17g} {b:.17g}")
    print(f"tight {abs(b - a) <= 1e-12 * b}")
    print(f"duality_residual {check.residual:.3e} ({'dual' if args.dual else 'canonical dual'})")
    print(f"is_dual {bool(check)}")
    print(f"positive_frame {fr.is_positive_frame(f)}")
    try:
        cov = fr.covariance_check(f)
        print(f"covariant {cov.covariant} (worst residual {cov.worst_residual:.3e})")
    except LabelMismatchError:
        print("covariant n/a (labels are not a Z_n x Z_n lattice)")
    return EXIT_OK if check else EXIT_FALSE


def cmd_rep_state(args, cfg):
    f = _load_frame(args.frame)
    rho = io.state_from_json(io.load(args.state), str(args.state))
    q = qp.rep_state(f, rho)
    path, fmt = _output(args, cfg)
    if fmt == "csv":
        if not path:
            raise UsageError("csv output needs -o")
        io.write_rep_csv(path, q.values, f.labels)
    else:
        _emit(io.rep_to_json(q.rep, f, "F"), path)
    print(f"weighted_sum {q.total():.17g}", file=sys.stderr)
    return EXIT_OK


def cmd_rep_povm(args, cfg):
    f = _load_frame(args.frame_or_dual)
    povm = io.povm_from_json(io.load(args.povm), str(args.povm))
    cond = qp.rep_effects(f, povm, args.via)
    path, fmt = _output(args, cfg)
    if fmt == "csv":
        raise UsageError("csv export is available for single representations (rep state)")
    _emit(io.effects_to_json(cond), path)
    return EXIT_OK


def cmd_prob(args, cfg):
    f = _load_frame(args.frame)
    e = _load_frame(args.dual)
    rho = io.state_from_json(io.load(args.state), str(args.state))
    povm = io.povm_from_json(io.load(args.povm), str(args.povm))
    table = qp.born_triangle(f, e, rho, povm)
    col = {"trace": 0, "deformed": 1, "total": 2}[args.mode]
    dev = max(float(np.max(np.abs(table[:, i] - table[:, j]))) for i, j in ((0, 1), (0, 2), (1, 2)))
    print(f"outcome {args.mode}")
    for k, row in enumerate(table):
        print(f"{k} {row[col]:.17g}")
    print(f"max_pairwise_deviation {dev:.3e}")
    return EXIT_OK if dev <= cfg.tol("prob", 1e-10) else EXIT_FALSE


def cmd_negativity(args, cfg):
    values, frame, via = _frame_of_rep(args.rep, args.frame)
    rpt = qp.negativity(values, frame.weights)
    _emit({"min_value": rpt.min_value, "negative_mass": rpt.negative_mass,
           "count_negative": rpt.count_negative, "via": via}, _output(args, cfg)[0])
    return EXIT_OK


def _json_files(directory):
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    return sorted(d.glob("*.json"))


def cmd_classical_check(args, cfg):
    f = _load_frame(args.frame)
    e = _load_frame(args.dual)
    states = [io.state_from_json(io.load(p), str(p)) for p in _json_files(args.states)] if args.states else []
    povms = [io.povm_from_json(io.load(p), str(p)) for p in _json_files(args.povms)] if args.povms else []
    rpt = qp.classicality_check(f, e, states, povms, cfg.tol("classical", qp.CLASSICAL_TOL))
    _emit({
        "classical_for_this_pair": rpt.classical_for_this_pair,
        "max_total_prob_deviation": rpt.max_total_prob_deviation,
        "violations": [
            {"condition": v.condition, "item": v.item, "outcome": v.outcome,
             "label": list(v.label) if v.label is not None else None, "value": v.value}
            for v in rpt.violations
        ],
    }, _output(args, cfg)[0])
    return EXIT_OK if rpt else EXIT_FALSE


def _rep_or_operator(path, frame):
    obj = io.load(path)
    if isinstance(obj, dict) and "values" in obj:
        values, _, _ = io.rep_from_json(obj, str(path))
        if values.size != len(frame):
            raise DimensionError(f"{path}: {values.size} values for a {len(frame)}-label frame")
        return values
    return fr.represent(frame, io.operator_from_json(obj, str(path))).values


def cmd_star(args, cfg):
    f = _load_frame(args.frame)
    e = _load_frame(args.dual)
    kernel = sa.star_kernel(f, e, lazy=len(f) > sa.MAX_MATERIALIZED)
    if args.action == "check-pure":
        if not args.rep:
            raise UsageError("star check-pure needs --rep")
        v = _rep_or_operator(args.rep, f)
        pure = sa.is_pure_state_rep(v, kernel, f.weights, cfg.tol("pure", sa.PURE_TOL))
        print(f"pure {pure}")
        return EXIT_OK if pure else EXIT_FALSE
    if not (args.a and args.b):
        raise UsageError("star product needs --a and --b")
    prod = sa.star_product(_rep_or_operator(args.a, f), _rep_or_operator(args.b, f), kernel, f.weights)
    _emit(io.kernel_to_json(prod, f.fingerprint), _output(args, cfg)[0])
    return EXIT_OK


def cmd_nogo_witness(args, cfg):
    seed0 = _seed(args, cfg)
    reports = nogo.witness_batch(args.dim, range(seed0, seed0 + args.seeds), n=args.n,
                                 n_perturbations=args.perturbations)
    _emit([r.to_dict() for r in reports], _output(args, cfg)[0])
    ok = all(r.verdict == "no_positive_dual_witnessed" for r in reports)
    return EXIT_OK if ok else EXIT_FALSE


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qframe", description="Frame representations of finite-dimensional quantum mechanics")
    p.add_argument("--config", help="JSON config file")
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp, fmt=False):
        sp.add_argument("-o", "--output", help="output path (stdout if omitted)")
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"))

    frame = sub.add_parser("frame", help="build and inspect frames").add_subparsers(dest="frame_cmd", required=True)
    b = frame.add_parser("build")
    b.add_argument("--kind", required=True, choices=("wootters", "leonhardt", "random"))
    b.add_argument("--dim", required=True, type=int)
    b.add_argument("--n", type=int, help="number of elements for random frames")
    b.add_argument("--seed", type=int)
    b.add_argument("--positive", action="store_true")
    b.add_argument("--convention", choices=fr.CONVENTIONS)
    out(b)
    b.set_defaults(func=cmd_frame_build)
    du = frame.add_parser("duals")
    du.add_argument("--frame", required=True)
    du.add_argument("--paper", action="store_true", help="closed-form phase-point dual with fitted scalar")
    out(du)
    du.set_defaults(func=cmd_frame_duals)
    ch = frame.add_parser("check")
    ch.add_argument("--frame", required=True)
    ch.add_argument("--dual")
    ch.set_defaults(func=cmd_frame_check)

    rep = sub.add_parser("rep", help="represent states and POVMs").add_subparsers(dest="rep_cmd", required=True)
    rs = rep.add_parser("state")
    rs.add_argument("--frame", required=True)
    rs.add_argument("--state", required=True)
    out(rs, fmt=True)
    rs.set_defaults(func=cmd_rep_state)
    rp = rep.add_parser("povm")
    rp.add_argument("--frame-or-dual", required=True, dest="frame_or_dual")
    rp.add_argument("--povm", required=True)
    rp.add_argument("--via", choices=("F", "E"), default="F")
    out(rp, fmt=True)
    rp.set_defaults(func=cmd_rep_povm)

    pr = sub.add_parser("prob", help="outcome probabilities by the three routes")
    pr.add_argument("--mode", choices=("trace", "deformed", "total"), default="trace")
    for name in ("state", "povm", "frame", "dual"):
        pr.add_argument(f"--{name}", required=True)
    pr.set_defaults(func=cmd_prob)

    ng = sub.add_parser("negativity", help="negativity of a state representation")
    ng.add_argument("--rep", required=True)
    ng.add_argument("--frame", help="frame file when the rep references its frame by id")
    out(ng)
    ng.set_defaults(func=cmd_negativity)

    cc = sub.add_parser("classical-check", help="test the classical-model conditions for a frame/dual pair")
    cc.add_argument("--frame", required=True)
    cc.add_argument("--dual", required=True)
    cc.add_argument("--states")
    cc.add_argument("--povms")
    out(cc)
    cc.set_defaults(func=cmd_classical_check)

    st = sub.add_parser("star", help="star product of representations, or purity test")
    st.add_argument("action", nargs="?", choices=("product", "check-pure"), default="product")
    st.add_argument("--frame", required=True)
    st.add_argument("--dual", required=True)
    st.add_argument("--a")
    st.add_argument("--b")
    st.add_argument("--rep")
    out(st)
    st.set_defaults(func=cmd_star)

    ngo = sub.add_parser("nogo", help="witness that positive frames have no positive dual").add_subparsers(dest="nogo_cmd", required=True)
    w = ngo.add_parser("witness", help="batch positive-dual witness on random positive frames")
    w.add_argument("--dim", required=True, type=int)
    w.add_argument("--seeds", required=True, type=int, help="number of seeds")
    w.add_argument("--seed", type=int, help="first seed")
    w.add_argument("--n", type=int)
    w.add_argument("--perturbations", type=int, default=20)
    out(w)
    w.set_defaults(func=cmd_nogo_witness)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = load_config(args.config) if args.config else Config()
        return args.func(args, cfg)
    except (NotAFrameError, DualityError, np.linalg.LinAlgError) as exc:
        print(f"qframe: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, io.FormatError, DimensionError, UnsupportedDimensionError,
            LabelMismatchError, QFrameError, ValueError, MemoryError) as exc:
        print(f"qframe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

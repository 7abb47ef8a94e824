"""Command-line front end.

Every subcommand writes its tables into ``--out`` (CSV, each starting with
``#`` comment lines holding the toolkit version and the invocation) plus a
``manifest.json``. Exit status: 0 on success, 1 when a verification fails
(the message names the bound or check), 2 on usage errors.

Grids are written ``start:stop:step`` (points ``start + k*step`` below
``stop + step/2``, so ``0:8:0.25`` ends at 8) or as comma lists.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._parallel import default_jobs
from ._version import __version__
from .compiler import CircuitStructureError, compile_diagonal, read_circuit, verify_circuit, write_circuit
from .complexity import GateSet, complexity_jump_curve, default_gate_set
from .concentration import (
    concentration_tail_probe,
    expected_torus_distance,
    gaussian_average_lemma_fit,
    haar_second_moment_check,
    lipschitz_probe,
)
from .ensembles import EnsembleSpec, Kind, sample_hamiltonian, stream
from .experiments import (
    diagonal_ball_diamond_probe,
    escape_curve,
    escape_scaling_fit,
    jump_figure,
    loglog_slope,
    state_escape_curve,
    torus_ball_measure,
)
from .linalg import MatrixFormatError, read_matrix, write_matrix
from .report import BoundViolation, csv_text
from .spectral import check_variance_bounds, estimate_form_factor, form_factor_csv

__all__ = ["RunConfig", "main", "parse_args", "parse_grid", "run"]

SEED_ENV = "RMTLAB_SEED"


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` or ``a,b,c``; a single number is a one-point grid."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if not step > 0:
                raise argparse.ArgumentTypeError(f"grid step must be positive in {text!r}")
            count = int(math.floor((stop + step / 2 - start) / step)) + 1
            pts = [start + k * step for k in range(max(count, 0)) if start + k * step < stop + step / 2]
        else:
            pts = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed grid {text!r}") from None
    if not pts:
        raise argparse.ArgumentTypeError(f"empty grid {text!r}")
    return pts


def _int_grid(text: str) -> list[int]:
    vals = parse_grid(text)
    if any(v != int(v) or v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return [int(v) for v in vals]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return v


def _ensemble(text: str) -> Kind:
    try:
        return Kind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, seed_default: int) -> None:
    p.add_argument("--seed", type=_nonneg_int, default=seed_default, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--jobs", type=_positive_int, default=default_jobs(), help="worker processes (results do not depend on it)")
    p.add_argument("--config", help="JSON file of option defaults; flags override it")


def _ensemble_opts(p: argparse.ArgumentParser, d_required: bool = True) -> None:
    p.add_argument("--ensemble", type=_ensemble, default=Kind.GUE, help="gue | diag-gaussian | random-basis-gaussian")
    p.add_argument("--d", type=_positive_int, required=d_required, help="dimension")
    p.add_argument("--sigma2", type=_positive_float, help="GUE entry variance (default 1/d)")


def _gate_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gate", help="CMPX file holding G (overrides --gate-kind)")
    p.add_argument(
        "--gate-kind", default="reflection", choices=["reflection", "traceless", "flip"],
        help="reflection: diag(-1,1,..,1); traceless: roots of unity; flip: half -1, half +1",
    )


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    parser = _Parser(prog="rmtlab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"rmtlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw Hamiltonians and write them as CMPX files")
    _ensemble_opts(p)
    p.add_argument("--count", type=_positive_int, default=1)

    for name, helptext in (("form-factor", "Monte Carlo (1/d) E tr U_t and Var tr U_t"),
                           ("variance-check", "form factor plus variance bounds (exit 1 on violation)")):
        p = sub.add_parser(name, help=helptext)
        _ensemble_opts(p)
        p.add_argument("--t", type=parse_grid, required=True, help="time grid")
        p.add_argument("--samples", type=_positive_int, default=100)

    p = sub.add_parser("escape", help="stay probability in the eps ball around the identity channel")
    _ensemble_opts(p)
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--t", type=parse_grid, required=True)
    p.add_argument("--samples", type=_positive_int, default=500)
    p.add_argument("--metric", choices=["diamond", "opnorm", "hs"], default="diamond")

    p = sub.add_parser("escape-scaling", help="t_escape over eps and d grids with log-log fits")
    p.add_argument("--ensemble", type=_ensemble, default=Kind.GUE)
    p.add_argument("--eps", type=parse_grid, required=True)
    p.add_argument("--d", type=_int_grid, required=True, help="dimension grid")
    p.add_argument("--samples", type=_positive_int, default=500)
    p.add_argument("--metric", choices=["diamond", "opnorm", "hs"], default="diamond")

    p = sub.add_parser("state-escape", help="stay probability of U_t|0> near |0>")
    _ensemble_opts(p)
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--t", type=parse_grid, required=True)
    p.add_argument("--samples", type=_positive_int, default=500)

    p = sub.add_parser("torus-distance", help="E dist(VGV^dag, T) and the Haar second moment")
    p.add_argument("--d", type=_positive_int, required=True)
    _gate_opts(p)
    p.add_argument("--samples", type=_positive_int, default=200)

    p = sub.add_parser("concentration", help="Lipschitz and tail probes for dist(VGV^dag, T)")
    p.add_argument("--d", type=_positive_int, required=True)
    _gate_opts(p)
    p.add_argument("--a", type=parse_grid, default=[0.25, 0.5, 1.0], help="tail offsets")
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--pairs", type=_positive_int, default=1000)

    p = sub.add_parser("gauss-average", help="A(beta) by quadrature and Monte Carlo, with the (c, beta0) fit")
    p.add_argument("--beta", type=parse_grid, default=parse_grid("0.1:1:0.1"))
    p.add_argument("--mc-samples", type=_nonneg_int, default=0)

    p = sub.add_parser("complexity", help="exact complexity curves at small d")
    _ensemble_opts(p)
    p.add_argument("--gates", help="gate-set file (label line + CMPX block per gate); default R16 + H")
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--t", type=parse_grid, required=True)
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--max-len", type=_nonneg_int, default=10)
    p.add_argument("--metric", choices=["diamond", "opnorm", "hs"], default="diamond")

    p = sub.add_parser("jump-figure", help="escape, complexity and ball-avoidance curves on one grid")
    _ensemble_opts(p)
    p.add_argument("--gates", help="gate-set file; default R16 + H when d = 2")
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--t", type=parse_grid, required=True)
    p.add_argument("--samples", type=_positive_int, default=200)
    p.add_argument("--max-len", type=_nonneg_int, default=8)

    p = sub.add_parser("compile", help="compile exp(-iHt) for diagonal H and certify the error")
    p.add_argument("--n", type=_positive_int, required=True, help="qubits")
    p.add_argument("--t", type=_float, required=True)
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--hamiltonian", required=True, help="CMPX file holding the diagonal H")

    p = sub.add_parser("verify-circuit", help="certify a circuit file against exp(-iHt)")
    p.add_argument("--circuit", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--t", type=_float, required=True)
    p.add_argument("--eps", type=_positive_float, help="fail if the error exceeds this")
    p.add_argument("--hamiltonian", required=True)

    p = sub.add_parser("equidist", help="torus ball measures of i.i.d. Gaussian phases")
    p.add_argument("--d", type=_positive_int, required=True)
    p.add_argument("--t", type=_float, required=True)
    p.add_argument("--eps", type=parse_grid, required=True)
    p.add_argument("--samples", type=_positive_int, default=10**6)
    p.add_argument("--metric", choices=["chordal", "diamond"], default="chordal")

    for sp in sub.choices.values():
        _common(sp, seed_default)
    return parser


# -- config -------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    seed: int
    outdir: Path
    jobs: int
    options: dict = field(default_factory=dict)
    invocation: str = ""

    @property
    def spec(self) -> EnsembleSpec | None:
        o = self.options
        if "ensemble" not in o or not isinstance(o.get("d"), int):
            return None
        sigma2 = o.get("sigma2") if o["ensemble"] is Kind.GUE else None
        return EnsembleSpec(o["ensemble"], o["d"], sigma2, self.seed)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None


def _apply_config(parser: argparse.ArgumentParser, command: str, path: str) -> None:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[command]
    known = {a.dest: a for a in subparser._actions}
    converted = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        action = known[dest]
        if action.type is not None and not isinstance(value, (list, dict)):
            try:
                value = action.type(str(value))
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        converted[dest] = value
    # defaults satisfy required flags, so drop the requirement for keys the file provides
    for dest in converted:
        known[dest].required = False
    subparser.set_defaults(**converted)


def _find_config(argv: list[str]) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file")
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def parse_args(argv: Sequence[str]) -> RunConfig:
    argv = list(argv)
    parser = build_parser(_default_seed())
    config = _find_config(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    if config is not None and command in parser._subparsers._group_actions[0].choices:
        _apply_config(parser, command, config)
    ns = parser.parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "seed", "out", "jobs", "config")}
    if opts.get("sigma2") is not None and opts.get("ensemble") is not Kind.GUE:
        raise UsageError("--sigma2 applies only to the GUE ensemble")
    if ns.command in ("complexity",) and opts["d"] > 4:
        raise UsageError("complexity needs --d <= 4")
    if ns.command == "equidist" and opts["d"] > 6:
        raise UsageError("equidist needs --d <= 6")
    return RunConfig(ns.command, ns.seed, Path(ns.out), ns.jobs, opts, "rmtlab " + shlex.join(argv))


# -- commands -----------------------------------------------------------------------


class _Writer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.files: list[str] = []
        self.summary: dict = {}
        try:
            cfg.outdir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"output directory {cfg.outdir} is not writable: {exc}") from None
        if not os.access(cfg.outdir, os.W_OK):
            raise UsageError(f"output directory {cfg.outdir} is not writable")

    @property
    def header(self) -> list[str]:
        return [f"rmtlab {__version__}", f"invocation: {self.cfg.invocation}", f"seed: {self.cfg.seed}"]

    def csv(self, name: str, columns, rows) -> Path:
        return self.text(name, csv_text(columns, rows, self.header))

    def text(self, name: str, content: str) -> Path:
        path = self.cfg.outdir / name
        path.write_text(content)
        self.files.append(name)
        return path

    def manifest(self, status: str) -> None:
        doc = {
            "toolkit": f"rmtlab {__version__}",
            "invocation": self.cfg.invocation,
            "command": self.cfg.command,
            "seed": self.cfg.seed,
            "status": status,
            "files": self.files,
            "summary": self.summary,
        }
        (self.cfg.outdir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def _load_gate(cfg: RunConfig) -> tuple[np.ndarray, str]:
    d = cfg.d
    if cfg.gate:
        g = read_matrix(cfg.gate)
        if g.shape != (d, d):
            raise UsageError(f"gate file holds a {g.shape[0]}x{g.shape[0]} matrix, expected d = {d}")
        return g, Path(cfg.gate).name
    if cfg.gate_kind == "reflection":
        return np.diag([-1.0] + [1.0] * (d - 1)).astype(complex), "reflection"
    if cfg.gate_kind == "traceless":
        return np.diag(np.exp(2j * np.pi * np.arange(d) / d)), "traceless"
    return np.diag([-1.0] * (d // 2) + [1.0] * (d - d // 2)).astype(complex), "flip"


def _load_gates(cfg: RunConfig) -> GateSet | None:
    if cfg.gates:
        return GateSet.load(cfg.gates)
    return default_gate_set() if cfg.d == 2 else None


def _read_diagonal(path: str, n: int) -> np.ndarray:
    h = read_matrix(path)
    if h.shape != (1 << n, 1 << n):
        raise UsageError(f"hamiltonian is {h.shape[0]}x{h.shape[0]}, expected 2^{n}")
    off = h - np.diag(np.diag(h))
    if np.any(off != 0) or np.any(np.diag(h).imag != 0):
        raise UsageError("hamiltonian must be a real diagonal matrix")
    return np.diag(h).real.copy()


def _cmd_sample(cfg: RunConfig, w: _Writer) -> None:
    spec = cfg.spec
    names = []
    for i in range(cfg.count):
        name = f"h_{i:04d}.cmpx"
        write_matrix(sample_hamiltonian(spec, stream(cfg.seed, i)), cfg.outdir / name)
        names.append(name)
        w.files.append(name)
    w.text("ensemble.txt", "".join(f"# {h}\n" for h in w.header) + spec.to_text())
    w.summary = {"count": cfg.count, "streams": f"0:{cfg.count}"}


def _cmd_form_factor(cfg: RunConfig, w: _Writer, check: bool) -> None:
    spec = cfg.spec
    if cfg.samples < 2:
        raise UsageError("--samples must be >= 2")
    est = estimate_form_factor(spec, cfg.t, cfg.samples, cfg.seed, cfg.jobs)
    w.text("form_factor.csv", form_factor_csv(est, spec, w.header))
    if check:
        rep = check_variance_bounds(est, spec.d, spec.kind)
        w.csv("variance_check.csv", rep.columns, rep.rows)
        w.summary = {"passed": rep.passed, "failures": [c.describe() for c in rep.failures]}
        rep.require()


def _cmd_escape(cfg: RunConfig, w: _Writer) -> None:
    c = escape_curve(cfg.spec, cfg.eps, cfg.metric, cfg.t, cfg.samples, cfg.seed, cfg.jobs)
    w.text("escape.csv", c.to_csv(w.header))
    w.summary = {"t_escape": c.t_escape}


def _cmd_state_escape(cfg: RunConfig, w: _Writer) -> None:
    c = state_escape_curve(cfg.spec, cfg.eps, cfg.t, cfg.samples, cfg.seed, cfg.jobs)
    w.text("state_escape.csv", c.to_csv(w.header))
    w.summary = {"t_escape": c.t_escape}


def _cmd_escape_scaling(cfg: RunConfig, w: _Writer) -> None:
    fit = escape_scaling_fit(cfg.ensemble, cfg.eps, cfg.d, cfg.samples, cfg.seed, cfg.metric, cfg.jobs)
    cols = ["d", "epsilon", "t_escape", "t_escape_sqrt_log_d", "slope", "slope_ci_low", "slope_ci_high"]
    w.csv("escape_scaling.csv", cols, fit.rows())
    w.summary = {"slopes": {str(k): v for k, v in fit.slopes.items()}, "collapse": {str(k): v for k, v in fit.collapse.items()}}


def _cmd_torus_distance(cfg: RunConfig, w: _Writer) -> None:
    g, label = _load_gate(cfg)
    stats = expected_torus_distance(g, cfg.samples, cfg.seed, label, cfg.jobs)
    rep = stats.as_report()
    w.csv("torus_distance.csv", rep.columns, rep.rows)
    mom = haar_second_moment_check(g, 1, cfg.samples, cfg.seed + 1, cfg.jobs)
    w.csv("haar_second_moment.csv", mom.columns, mom.rows)
    w.summary = {"mc_mean": stats.mc_mean, "dhs_G_I": stats.dhs_G_I}
    rep.require()
    mom.require()


def _cmd_concentration(cfg: RunConfig, w: _Writer) -> None:
    g, _ = _load_gate(cfg)
    lip = lipschitz_probe(g, cfg.pairs, cfg.seed, cfg.jobs)
    w.csv("lipschitz.csv", lip.columns, lip.rows)
    tail = concentration_tail_probe(g, cfg.a, cfg.samples, cfg.seed + 1, cfg.jobs)
    w.csv("concentration_tail.csv", tail.columns, tail.rows)
    w.summary = {"lipschitz_passed": lip.passed, "tail_passed": tail.passed}
    lip.require()
    tail.require()


def _cmd_gauss_average(cfg: RunConfig, w: _Writer) -> None:
    if any(not 0 < b <= 1 for b in cfg.beta):
        raise UsageError("--beta values must lie in (0, 1]")
    fit = gaussian_average_lemma_fit(cfg.beta, cfg.mc_samples, cfg.seed)
    rep = fit.as_report()
    w.csv("gaussian_average.csv", rep.columns, rep.rows)
    w.summary = {"c": fit.c, "beta0": fit.beta0, "c_by_beta0": fit.c_by_beta0}
    rep.require()


def _cmd_complexity(cfg: RunConfig, w: _Writer) -> None:
    gs = _load_gates(cfg)
    if gs is None:
        raise UsageError("--gates is required when d != 2")
    res = complexity_jump_curve(cfg.spec, gs, cfg.eps, cfg.t, cfg.samples, cfg.max_len, cfg.seed, cfg.metric)
    rows = []
    for c in res.curves:
        for t, v in zip(c.t_grid, c.values):
            rows.append({"sample": c.sample_index, "t": t, "complexity": "exceeds" if v is None else v})
    w.csv("complexity.csv", ["sample", "t", "complexity"], rows)
    w.summary = {"words": res.word_count, "jump_fraction": res.jump_fraction(), "median": res.median_curve().tolist()}


def _cmd_jump_figure(cfg: RunConfig, w: _Writer) -> None:
    gs = _load_gates(cfg)
    files = jump_figure(cfg.spec, gs, cfg.eps, cfg.t, cfg.samples, cfg.seed, cfg.outdir, cfg.max_len, header=w.header[1:])
    w.files.extend(p.name for p in files.values())


def _cmd_compile(cfg: RunConfig, w: _Writer) -> None:
    h = _read_diagonal(cfg.hamiltonian, cfg.n)
    c = compile_diagonal(h, cfg.n, cfg.t, cfg.eps)
    path = cfg.outdir / "circuit.txt"
    write_circuit(c, path, w.header)
    w.files.append(path.name)
    err = verify_circuit(c, h, cfg.n, cfg.t)
    w.summary = {"error": err, "eps": cfg.eps, "gates": len(c), "cnots": c.cnot_count, "rotations": c.rotation_count}
    print(f"verify_circuit: error {err:.6e} <= eps {cfg.eps:g}: {err <= cfg.eps}; gates {len(c)}")
    if err > cfg.eps:
        raise BoundViolation(f"verify_circuit: error {err:.6e} exceeds eps {cfg.eps:g}")


def _cmd_verify(cfg: RunConfig, w: _Writer) -> None:
    h = _read_diagonal(cfg.hamiltonian, cfg.n)
    try:
        c = read_circuit(cfg.circuit)
    except ValueError as exc:
        raise BoundViolation(f"verify_circuit: cannot parse {cfg.circuit}: {exc}") from None
    err = verify_circuit(c, h, cfg.n, cfg.t)
    w.summary = {"error": err, "gates": len(c)}
    print(f"verify_circuit: error {err:.6e}")
    if cfg.eps is not None and err > cfg.eps:
        raise BoundViolation(f"verify_circuit: error {err:.6e} exceeds eps {cfg.eps:g}")


def _cmd_equidist(cfg: RunConfig, w: _Writer) -> None:
    probe = torus_ball_measure if cfg.metric == "chordal" else diagonal_ball_diamond_probe
    ests = [probe(cfg.d, cfg.t, None, e, cfg.samples, cfg.seed) for e in cfg.eps]
    rows = [{"d": e.d, "t": e.t, "epsilon": e.eps, "estimate": e.estimate, "stderr": e.stderr,
             "exact": e.exact, "n_samples": e.n_samples, "metric": cfg.metric} for e in ests]
    w.csv("equidist.csv", ["d", "t", "epsilon", "estimate", "stderr", "exact", "n_samples", "metric"], rows)
    good = [(e.eps, e.estimate) for e in ests if e.estimate > 0]
    if len(good) >= 2:
        w.summary = {"loglog_slope": loglog_slope(*zip(*good))}


_COMMANDS = {
    "sample": _cmd_sample,
    "form-factor": lambda c, w: _cmd_form_factor(c, w, False),
    "variance-check": lambda c, w: _cmd_form_factor(c, w, True),
    "escape": _cmd_escape,
    "escape-scaling": _cmd_escape_scaling,
    "state-escape": _cmd_state_escape,
    "torus-distance": _cmd_torus_distance,
    "concentration": _cmd_concentration,
    "gauss-average": _cmd_gauss_average,
    "complexity": _cmd_complexity,
    "jump-figure": _cmd_jump_figure,
    "compile": _cmd_compile,
    "verify-circuit": _cmd_verify,
    "equidist": _cmd_equidist,
}


def run(cfg: RunConfig) -> int:
    try:
        w = _Writer(cfg)
        try:
            _COMMANDS[cfg.command](cfg, w)
        except (BoundViolation, CircuitStructureError) as exc:
            w.manifest("failed")
            print(f"rmtlab: verification failed: {exc}", file=sys.stderr)
            return 1
        w.manifest("ok")
        return 0
    except (UsageError, MatrixFormatError, OSError, ValueError) as exc:
        print(f"rmtlab: error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

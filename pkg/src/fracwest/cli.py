"""Command-line driver: ``fracwest {simulate,poles,invert-linear,reconstruct,svd}``.

Every subcommand reads an optional INI file (``--config``), validates the
resolved parameters before any solve, and writes CSV/JSON files into
``--out``. Each output file starts with a comment (CSV) or a field (JSON)
carrying the SHA-256 hash of the resolved configuration, so identical
configurations and seeds give byte-identical files.

Config layout
-------------
Keys live in the sections ``[model]``, ``[discretization]``,
``[excitation]``, ``[observation]``, ``[simulate]``, ``[inversion]``,
``[reconstruction]``, ``[poles]`` and ``[svd]``; a section named after the
subcommand (for example ``[invert-linear]``) overrides any key for that
subcommand only. Unknown keys are rejected. Lists are comma separated.

Exit codes: 0 success, 1 numerical failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AssumptionViolation, FracWestError, NumericalError, SpecificationError
from .forward import CWCH, FZ, DampingModel, observe, solve_westervelt
from .fracops import TimeGrid
from .inversion import (
    Excitation,
    LinearProfile,
    build_excitation_source,
    extract_residues,
    masked_relative_error,
    mode_poles,
    recover_coefficients,
    report_dict,
    synthesize_trace,
)
from .poles import Symbol, find_poles
from .recon import (
    ChapeauBasis,
    NewtonConfig,
    ReconstructionAborted,
    ReconstructionProblem,
    assemble_jacobian,
    frozen_newton,
    make_noisy_data,
    sample_times,
    sample_trace,
    smooth_trace,
    svd_analysis,
)
from .spectral import BoundaryConfig, build_basis

log = logging.getLogger("fracwest")

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_VALIDATION = 2

COMMANDS = ("simulate", "poles", "invert-linear", "reconstruct", "svd")

SECTIONS = (
    "model", "discretization", "excitation", "observation",
    "simulate", "inversion", "reconstruction", "poles", "svd",
)

#: Spatial profiles selectable by name; all are functions of ``x`` on [0, 1].
PROFILES = {
    "zero": lambda x: np.zeros_like(x),
    "one": lambda x: np.ones_like(x),
    "x": lambda x: np.asarray(x, dtype=float),
    "sin": lambda x: np.sin(np.pi * x),
    "sin_half": lambda x: np.sin(0.5 * np.pi * x),
    "bump": lambda x: x * (1.0 - x),
    "ramp": lambda x: np.maximum(x - 0.5, 0.0),
    "well": lambda x: (2.0 * x - 1.0) ** 2,
}

TIME_PROFILES = {"linear": LinearProfile}


# --------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """All parameters of one CLI run.

    Optional model fields (``alpha1``, ``alpha2``) default to ``alpha``;
    ``n_x = 0`` selects the basis default. List-valued fields hold
    comma-separated numbers; an empty list falls back to the scalar model
    value.
    """

    # model
    damping: str = "cwch"
    b: float = 0.1
    beta: float = 1.0
    alpha: float = 1.0
    b1: float = 0.1
    b2: float = 0.05
    alpha1: float = 0.0
    alpha2: float = 0.0
    c: float = 1.0
    # discretization
    boundary: str = "dn"
    n_modes: int = 32
    n_x: int = 0
    n_steps: int = 2048
    T: float = 1.0
    # excitation
    f: str = "sin_half"
    chi: str = "linear"
    # observation
    x0: float = 1.0
    n_samples: int = 50
    # simulate
    kappa: str = "ramp"
    kappa_amplitude: float = 0.4
    # inversion
    n_modes_fit: int = 4
    truth: str = "ramp"
    truth_amplitude: float = 0.4
    f_floor: float = 1e-3
    t_min: float = 0.0
    tail_powers: tuple = ()
    psi_convention: str = "laplace"
    # reconstruction
    n_basis: int = 40
    noise_levels: tuple = (0.0,)
    n_seeds: int = 1
    seed: int = 0
    smooth: bool = False
    gamma0: float = 1e-2
    gamma_decay: float = 0.7
    tau: float = 1.5
    max_iter: int = 30
    error_window: float = 0.3
    # poles / svd sweeps
    n_lambda: int = 20
    c_values: tuple = ()
    alpha_values: tuple = ()
    delta_values: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of the configuration."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def model(self, alpha: float | None = None, c: float | None = None,
              delta: float | None = None) -> DampingModel:
        """Damping model with optional sweep overrides."""
        a = self.alpha if alpha is None else alpha
        if self.damping == "cwch":
            return CWCH(self.b, self.beta, a)
        if alpha is None:
            a1 = self.alpha1 or a
            a2 = self.alpha2 or a1
        else:
            a1 = a2 = a
        if delta is not None:
            return FZ.from_delta(self.b2, delta, self.c if c is None else c, a1, a2)
        return FZ(self.b1, self.b2, a1, a2)


#: Per-command defaults that differ from the dataclass defaults.
COMMAND_DEFAULTS = {
    "simulate": {},
    "poles": {},
    "invert-linear": {
        "boundary": "dd", "n_modes": 8, "n_steps": 4096, "T": 5.0, "f": "sin",
        "x0": 0.3, "truth": "bump", "truth_amplitude": 0.1, "f_floor": 0.3,
    },
    "reconstruct": {},
    "svd": {"alpha_values": (0.25, 0.5, 0.9, 1.0), "c_values": (1.0, 5.0)},
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "tuple":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw.strip().lower()
    except ValueError:
        raise SpecificationError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None


def load_config(command: str, path: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Resolve defaults, the INI file and the ``--seed`` flag into a config."""
    values = dict(COMMAND_DEFAULTS[command])
    if path is not None:
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keep "T" upper case
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise SpecificationError(f"cannot read config file: {exc}") from None
        except configparser.Error as exc:
            raise SpecificationError(f"malformed config file: {exc}") from None
        for section in parser.sections():
            if section not in SECTIONS and section not in COMMANDS:
                raise SpecificationError(f"unknown config section [{section}]")
        ordered = [s for s in SECTIONS if parser.has_section(s)]
        if parser.has_section(command):
            ordered.append(command)
        for section in ordered:
            for key, raw in parser.items(section):
                if key not in _FIELD_TYPES:
                    raise SpecificationError(f"unknown config key {key!r} in [{section}]")
                values[key] = _coerce(key, raw)
    if seed is not None:
        values["seed"] = seed
    cfg = ExperimentConfig(**values)
    validate_config(cfg, command)
    return cfg


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SpecificationError(message)


def validate_config(cfg: ExperimentConfig, command: str) -> None:
    """Check every numeric range before any solve.

    Raises
    ------
    SpecificationError, ModelError
        Naming the violated invariant.
    """
    _require(cfg.damping in ("cwch", "fz"), f"damping must be 'cwch' or 'fz', got {cfg.damping!r}")
    alphas = [cfg.alpha, *cfg.alpha_values]
    if cfg.damping == "fz":
        alphas += [a for a in (cfg.alpha1, cfg.alpha2) if a]
    for a in alphas:
        _require(0.0 < a <= 1.0, f"fractional order must satisfy alpha in (0,1], got alpha = {a}")
    _require(0.0 <= cfg.beta <= 1.0, f"beta must lie in [0,1], got {cfg.beta}")
    _require(cfg.c > 0 and all(v > 0 for v in cfg.c_values),
             "wave speed must satisfy c > 0")
    BoundaryConfig.parse(cfg.boundary)
    _require(cfg.n_modes >= 1, "n_modes must be >= 1")
    _require(cfg.n_x == 0 or cfg.n_x >= 8 * cfg.n_modes, "n_x must be 0 or >= 8 * n_modes")
    _require(cfg.n_steps >= 2, "n_steps must be >= 2")
    _require(cfg.T > 0, "final time T must be positive")
    _require(cfg.f in PROFILES, f"unknown excitation profile {cfg.f!r}")
    _require(cfg.chi in TIME_PROFILES, f"unknown time profile {cfg.chi!r}")
    _require(0.0 <= cfg.x0 <= 1.0, f"observation point must satisfy x0 in [0,1], got {cfg.x0}")
    _require(cfg.n_samples >= 10, "n_samples must be >= 10")
    for name in ("kappa", "truth"):
        _require(getattr(cfg, name) in PROFILES, f"unknown {name} profile {getattr(cfg, name)!r}")
    _require(1 <= cfg.n_modes_fit <= cfg.n_modes, "n_modes_fit must lie in [1, n_modes]")
    _require(cfg.f_floor >= 0, "f_floor must be non-negative")
    _require(cfg.psi_convention in ("laplace", "constant"), "psi_convention must be 'laplace' or 'constant'")
    _require(cfg.n_basis >= 2, "n_basis must be >= 2")
    _require(all(v >= 0 for v in cfg.noise_levels) and cfg.noise_levels,
             "noise_levels must be a non-empty list of values >= 0")
    _require(cfg.n_seeds >= 1, "n_seeds must be >= 1")
    _require(cfg.seed >= 0, "seed must be >= 0")
    _require(cfg.gamma0 > 0 and 0 < cfg.gamma_decay <= 1, "need gamma0 > 0 and gamma_decay in (0,1]")
    _require(cfg.tau > 1, "discrepancy factor tau must exceed 1")
    _require(cfg.max_iter >= 1, "max_iter must be >= 1")
    _require(0.0 <= cfg.error_window < 1.0, "error_window must lie in [0,1)")
    _require(cfg.n_lambda >= 1, "n_lambda must be >= 1")
    _require(not cfg.delta_values or cfg.damping == "fz", "delta_values requires damping = fz")
    # the model constructors check the remaining invariants (b >= 0, delta >= 0, ...)
    for c in cfg.c_values or (cfg.c,):
        for d in cfg.delta_values or (None,):
            cfg.model(delta=d, c=c).validate(c)


# --------------------------------------------------------------------------
# output helpers


class Writer:
    """Writes the output files of one run into a directory."""

    def __init__(self, out: Path, cfg: ExperimentConfig, command: str):
        self.out = out
        self.cfg = cfg
        self.command = command
        self.header = f"fracwest {__version__} {command} config-hash sha256:{cfg.digest()} seed {cfg.seed}"
        out.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def csv(self, name: str, columns: list[str], rows) -> None:
        path = self.out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"# {self.header}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.written.append(name)

    def json(self, name: str, payload: dict) -> None:
        doc = {
            "command": self.command,
            "config_hash": "sha256:" + self.cfg.digest(),
            "config": self.cfg.to_dict(),
            **payload,
        }
        with open(self.out / name, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(doc), fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
        self.written.append(name)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _setup(cfg: ExperimentConfig):
    basis = build_basis(cfg.boundary, cfg.n_modes, cfg.n_x or None)
    grid = TimeGrid(cfg.T, cfg.n_steps)
    exc = Excitation(PROFILES[cfg.f](basis.x), TIME_PROFILES[cfg.chi]())
    return basis, grid, exc


def _rel_l2(weights, err, ref) -> float:
    den = float(np.sum(weights * ref**2))
    num = float(np.sum(weights * err**2))
    return math.sqrt(num / den) if den > 0 else math.sqrt(num)


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: ExperimentConfig, w: Writer, jobs: int = 1) -> dict:
    """Forward solve for ``kappa = kappa_amplitude * profile`` with source ``f chi``."""
    basis, grid, exc = _setup(cfg)
    model = cfg.model()
    src = build_excitation_source(exc, model, basis, grid, cfg.c)
    kappa = cfg.kappa_amplitude * PROFILES[cfg.kappa](basis.x)
    traj = solve_westervelt(kappa, src.r, model, basis, grid, cfg.c, init=src.init)
    trace = observe(traj, cfg.x0)
    energy = traj.energy(cfg.c)
    t = grid.t
    w.csv("trajectory.csv", ["t"] + [f"u_{j + 1}" for j in range(basis.n_modes)],
          ([t[i], *traj.u[i]] for i in range(t.size)))
    w.csv("trace.csv", ["t", "u_x0"], zip(t, trace.values))
    w.csv("energy.csv", ["t", "energy"], zip(t, energy))
    reference = exc.chi.value(t) * float(np.interp(cfg.x0, basis.x, exc.f))
    summary = {
        "fixed_point_iterations": traj.iterations,
        "increments": traj.increments,
        "max_abs_trace": float(np.max(np.abs(trace.values))),
        "max_deviation_from_source_profile": float(np.max(np.abs(trace.values - reference))),
    }
    w.json("summary.json", summary)
    return summary


def _pole_rows(cfg, c, alpha, delta):
    model = cfg.model(alpha=alpha, c=c, delta=delta)
    basis = build_basis(cfg.boundary, cfg.n_lambda)
    rows, max_re = [], -math.inf
    for n, lam in enumerate(basis.lambdas, start=1):
        ps = find_poles(Symbol(model, c, float(lam)))
        max_re = max(max_re, ps.max_real_part())
        for p in ps.poles:
            rows.append([
                c, alpha, "" if delta is None else delta, n, float(lam),
                p.s.real, p.s.imag, p.residue_w.real, p.residue_w.imag,
                p.newton_residual, ps.branch_count_certificate, ps.rhp_count,
            ])
    return rows, max_re


def cmd_poles(cfg: ExperimentConfig, w: Writer, jobs: int = 1) -> dict:
    """Certified poles of the relaxation symbol over a parameter sweep."""
    combos = [
        (c, a, d)
        for c in (cfg.c_values or (cfg.c,))
        for a in (cfg.alpha_values or (cfg.alpha,))
        for d in (cfg.delta_values or (None,))
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda k: _pole_rows(cfg, *k), combos))
    else:
        results = [_pole_rows(cfg, *k) for k in combos]
    rows = [r for res, _ in results for r in res]
    w.csv("poles.csv", ["c", "alpha", "delta", "mode", "lambda", "re_s", "im_s",
                        "re_residue", "im_residue", "newton_residual", "certificate",
                        "rhp_count"], rows)
    summary = {
        "sweeps": [
            {"c": c, "alpha": a, "delta": d, "max_real_part": m}
            for (c, a, d), (_, m) in zip(combos, results)
        ],
        "n_poles": len(rows),
    }
    w.json("summary.json", summary)
    return summary


def cmd_invert_linear(cfg: ExperimentConfig, w: Writer, jobs: int = 1) -> dict:
    """Synthetic linearised trace, residue fit and coefficient recovery."""
    basis, grid, exc = _setup(cfg)
    model = cfg.model()
    truth = cfg.truth_amplitude * PROFILES[cfg.truth](basis.x)
    trace = synthesize_trace(truth, exc, model, basis, grid, cfg.x0, cfg.c)
    poles = mode_poles(model, basis, cfg.n_modes_fit, cfg.c)
    res = extract_residues(trace, poles, cfg.n_modes_fit, t_min=cfg.t_min,
                           tail_powers=cfg.tail_powers)
    rec = recover_coefficients(res, exc, model, basis, cfg.x0, cfg.c,
                               f_floor=cfg.f_floor, psi_convention=cfg.psi_convention)
    err = masked_relative_error(rec, truth, basis.weights)
    w.csv("trace.csv", ["t", "h"], zip(grid.t, trace.values))
    w.csv("dkappa.csv", ["x", "truth", "recovered", "mask"],
          zip(basis.x, truth, rec.dkappa, rec.mask))
    report = report_dict(res, rec, basis)
    report["masked_relative_error"] = err
    report["truth"] = truth
    w.json("report.json", report)
    return report


def _run_name(noise: float, seed: int) -> str:
    return f"noise{noise:g}_seed{seed}"


def cmd_reconstruct(cfg: ExperimentConfig, w: Writer, jobs: int = 1) -> dict:
    """Frozen-Newton reconstruction for every (noise level, seed) pair."""
    basis, grid, exc = _setup(cfg)
    model = cfg.model()
    chap = ChapeauBasis(cfg.n_basis)
    times = sample_times(cfg.T, cfg.n_samples)
    problem = ReconstructionProblem(model, basis, grid, exc, cfg.x0, times, cfg.c, chap)
    truth_c = cfg.truth_amplitude * chap.interpolate(PROFILES[cfg.truth])
    kt = chap.evaluate(truth_c, basis.x)
    clean = observe(problem.state(truth_c, warm=False), cfg.x0)
    J = assemble_jacobian(problem, jobs=jobs)
    ncfg = NewtonConfig(gamma0=cfg.gamma0, gamma_decay=cfg.gamma_decay, tau=cfg.tau,
                        max_iter=cfg.max_iter)
    window = basis.x >= cfg.error_window
    rows, aborted = [], None
    for noise in cfg.noise_levels:
        for seed in range(cfg.seed, cfg.seed + cfg.n_seeds):
            data = make_noisy_data(clean, cfg.n_samples, noise, seed)
            if cfg.smooth and noise > 0:
                y = smooth_trace(data, grid, x0=cfg.x0).at_samples
            else:
                y = data.values
            delta = data.noise_std()
            name = _run_name(noise, seed)
            try:
                state = frozen_newton(problem, J, y, delta, ncfg)
            except ReconstructionAborted as exc:
                state, aborted = exc.state, f"{name}: {exc}"
            _write_iterates(w, name, state)
            kx = chap.evaluate(state.kappa_coeffs, basis.x)
            w.csv(f"kappa_{name}.csv", ["x", "truth", "recovered"], zip(basis.x, kt, kx))
            rows.append({
                "noise_level": noise,
                "seed": seed,
                "stop_reason": state.stop_reason.value if state.stop_reason else "Aborted",
                "iterations": state.iterations,
                "misfit": state.history[-1],
                "target": state.target,
                "l2_relative_error": _rel_l2(basis.weights, kx - kt, kt),
                "l2_relative_error_window": _rel_l2(basis.weights[window], (kx - kt)[window], kt[window]),
                "linf_error": float(np.max(np.abs(kx - kt))),
            })
            if aborted:
                break
        if aborted:
            break
    w.csv("summary.csv", list(rows[0].keys()), (list(r.values()) for r in rows))
    summary = {"runs": rows, "clean_samples": sample_trace(clean, times)}
    if aborted:
        summary["aborted"] = aborted
    w.json("summary.json", summary)
    if aborted:
        raise ReconstructionAborted(aborted, state)
    return summary


def _write_iterates(w: Writer, name: str, state) -> None:
    nb = state.kappa_coeffs.size
    gammas = [math.nan, *state.gammas]
    halvings = [0, *state.backtracks]
    w.csv(f"iterates_{name}.csv",
          ["iteration", "misfit", "gamma", "halvings"] + [f"k_{j + 1}" for j in range(nb)],
          ([k, state.history[k], gammas[k], halvings[k], *it]
           for k, it in enumerate(state.iterates)))


def cmd_svd(cfg: ExperimentConfig, w: Writer, jobs: int = 1) -> dict:
    """Singular values of the frozen Jacobian for each (alpha, c)."""
    basis, grid, exc = _setup(cfg)
    chap = ChapeauBasis(cfg.n_basis)
    times = sample_times(cfg.T, cfg.n_samples)
    rows, spectra = [], []
    for a in cfg.alpha_values or (cfg.alpha,):
        for c in cfg.c_values or (cfg.c,):
            problem = ReconstructionProblem(cfg.model(alpha=a, c=c), basis, grid, exc,
                                            cfg.x0, times, c, chap)
            res = svd_analysis(assemble_jacobian(problem, jobs=jobs))
            spectra.append({"alpha": a, "c": c, "sigma": res.sigma})
            rows.extend([a, c, n, s, rel] for n, s, rel in res.rows())
    w.csv("singular_values.csv", ["alpha", "c", "n", "sigma", "sigma_over_sigma1"], rows)
    summary = {"spectra": spectra}
    w.json("summary.json", summary)
    return summary


HANDLERS = {
    "simulate": cmd_simulate,
    "poles": cmd_poles,
    "invert-linear": cmd_invert_linear,
    "reconstruct": cmd_reconstruct,
    "svd": cmd_svd,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracwest",
        description="Fractionally damped Westervelt equation: simulation, poles and inversion.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__doc__.splitlines()[0])
        p.add_argument("--config", metavar="PATH", help="INI configuration file")
        p.add_argument("--out", metavar="DIR", default=f"out/{name}", help="output directory")
        p.add_argument("--jobs", metavar="N", type=int, default=1, help="worker threads")
        p.add_argument("--seed", metavar="N", type=int, default=None, help="base RNG seed")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise SpecificationError("--jobs must be >= 1")
        cfg = load_config(args.command, args.config, args.seed)
        writer = Writer(Path(args.out), cfg, args.command)
        HANDLERS[args.command](cfg, writer, jobs=args.jobs)
    except AssumptionViolation as exc:
        print(f"fracwest: assumption violated ({exc.hypothesis}): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"fracwest: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FracWestError, ValueError) as exc:
        print(f"fracwest: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    log.info("wrote %s", ", ".join(writer.written))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

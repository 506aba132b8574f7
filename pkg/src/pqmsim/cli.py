"""Command-line front end.

    pqmsim single  --t-int 0.5 --csv single.csv --svg single.svg
    pqmsim pair    --flavor phi+ --t-int 0.25 --quantity concurrence --svg phi.svg
    pqmsim digital --n-steps 14 --shots 4092 --seed 7 --csv run.csv
    pqmsim sweep   --model pair --quantity concurrence --dt 1e-3 --csv sweep.csv
    pqmsim selftest

Settings can also come from a JSON file (``--config run.json``) whose keys
are the long flag names with underscores (``t_int``, ``n_steps``, ...).
Flags override the file; the file overrides the defaults; ``PQMSIM_SEED``
overrides the default seed.

Exit codes: 0 success, 1 selftest failure, 2 usage or configuration error,
3 I/O error.
"""
import argparse
from dataclasses import asdict, dataclass, fields
import json
import math
import os
import sys

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("single", "pair", "digital", "sweep", "selftest")
SEED_ENV = "PQMSIM_SEED"
DEFAULT_GRID = tuple(round(0.05 * k, 10) for k in range(1, 21))


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "single"
    t_int: float = 0.5
    t_osc: float = 1.0
    dt: float = None
    n_steps: int = None
    n_periods: int = 1
    flavor: str = "psi+"
    model: str = None
    quantity: str = None
    shots: int = 4092
    seed: int = 0
    feedback_mode: str = "sampled"
    readout_flip: float = 0.0
    t_int_grid: list = None
    workers: int = 1
    csv: str = None
    svg: str = None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        return cls(**_check_keys(json.loads(text)))


_TYPES = {"t_int": float, "t_osc": float, "dt": float, "n_steps": int, "n_periods": int,
          "shots": int, "seed": int, "readout_flip": float, "workers": int,
          "command": str, "flavor": str, "model": str, "quantity": str,
          "feedback_mode": str, "csv": str, "svg": str}
_KEYS = tuple(f.name for f in fields(RunConfig))


def _check_keys(values):
    if not isinstance(values, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, value in values.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if value is None:
            continue
        if key == "t_int_grid":
            if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
                raise ConfigError("config key 't_int_grid' must be a list of numbers")
            continue
        want = _TYPES[key]
        ok = isinstance(value, str) if want is str else (
            isinstance(value, (int, float)) and not isinstance(value, bool)
            and (want is float or float(value).is_integer()))
        if not ok:
            raise ConfigError(f"config key {key!r} has invalid value {value!r}")
        values[key] = want(value)
    return values


def _grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected comma-separated numbers")


def build_parser():
    p = argparse.ArgumentParser(prog="pqmsim", description="Photonic quantum memristor simulator.")
    p.add_argument("command", choices=COMMANDS)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="JSON file with run settings")
    p.add_argument("--t-int", type=float, default=S, help="memory window T_int (default 0.5)")
    p.add_argument("--t-osc", type=float, default=S, help="drive period T_osc (default 1.0)")
    steps = p.add_mutually_exclusive_group()
    steps.add_argument("--dt", type=float, default=S, help="time step (default t_osc/1e4)")
    steps.add_argument("--n-steps", type=int, default=S, help="number of steps (digital default 14)")
    p.add_argument("--n-periods", type=int, default=S)
    p.add_argument("--flavor", default=S, help="Bell flavor: psi+, psi-, phi+, phi-")
    p.add_argument("--model", choices=("single", "pair"), default=S, help="sweep model")
    p.add_argument("--quantity", choices=("photon", "coherence", "concurrence"), default=S)
    p.add_argument("--shots", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--feedback-mode", choices=("sampled", "exact_probability"), default=S)
    p.add_argument("--readout-flip", type=float, default=S)
    p.add_argument("--t-int-grid", type=_grid, default=S, help="comma-separated T_int values")
    p.add_argument("--workers", type=int, default=S, help="processes for sweep grid points")
    p.add_argument("--csv", default=S, help="CSV output path (stdout if no output is given)")
    p.add_argument("--svg", default=S, help="SVG plot output path")
    p.add_argument("--full", action="store_true", help="selftest at full resolution")
    p.add_argument("--inject-fault", action="store_true", help=S)
    return p


def default_seed(environ=None):
    env = os.environ if environ is None else environ
    raw = env.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {SEED_ENV} is not an integer: {raw!r}")


def parse_config(argv, environ=None):
    """Merge defaults, the optional config file and flags into a RunConfig.

    Returns ``(config, extras)`` where extras holds flags that are not part
    of the run record (``full``, ``inject_fault``).
    """
    ns = vars(build_parser().parse_args(argv))
    extras = {"full": ns.pop("full"), "inject_fault": ns.pop("inject_fault")}
    path = ns.pop("config")
    values = {"seed": default_seed(environ)}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}")
        try:
            from_file = _check_keys(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path!r} is not valid JSON: {exc.msg}")
        from_file.pop("command", None)
        if "dt" in ns:
            from_file.pop("n_steps", None)
        if "n_steps" in ns:
            from_file.pop("dt", None)
        if from_file.get("dt") is not None and from_file.get("n_steps") is not None:
            raise ConfigError("config keys 'dt' and 'n_steps' are mutually exclusive")
        values.update(from_file)
    values.update(ns)
    return validate(RunConfig(**values)), extras


def validate(cfg):
    from .network import normalize_flavor
    for key in ("t_int", "t_osc"):
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"config key {key!r} must be a positive number")
    if cfg.dt is not None and not (math.isfinite(cfg.dt) and cfg.dt > 0):
        raise ConfigError("config key 'dt' must be a positive number")
    for key in ("n_steps", "n_periods", "shots", "workers"):
        v = getattr(cfg, key)
        if v is not None and v < 1:
            raise ConfigError(f"config key {key!r} must be at least 1")
    try:
        cfg.flavor = normalize_flavor(cfg.flavor)
    except ValueError:
        raise ConfigError(f"config key 'flavor' has invalid value {cfg.flavor!r}")
    if cfg.feedback_mode not in ("sampled", "exact_probability"):
        raise ConfigError(f"config key 'feedback_mode' has invalid value {cfg.feedback_mode!r}")
    if cfg.model not in (None, "single", "pair"):
        raise ConfigError(f"config key 'model' has invalid value {cfg.model!r}")
    if cfg.quantity not in (None, "photon", "coherence", "concurrence"):
        raise ConfigError(f"config key 'quantity' has invalid value {cfg.quantity!r}")
    if not 0.0 <= cfg.readout_flip <= 1.0:
        raise ConfigError("config key 'readout_flip' must lie in [0, 1]")
    if cfg.t_int_grid is not None and (not cfg.t_int_grid or min(cfg.t_int_grid) <= 0):
        raise ConfigError("config key 't_int_grid' needs positive values")
    return cfg


def resolve(cfg):
    """Fill derived settings: time step, step count, model and quantity."""
    r = RunConfig(**asdict(cfg))
    span = r.n_periods * r.t_osc
    if r.command == "digital":
        if r.n_steps is None:
            r.n_steps = 14 if r.dt is None else int(round(span / r.dt))
        r.dt = span / r.n_steps
    elif r.command in ("single", "pair", "sweep"):
        if r.n_steps is not None:
            r.dt = span / r.n_steps
        elif r.dt is None:
            r.dt = r.t_osc / 1e4
        r.n_steps = int(round(span / r.dt))
    if r.command == "sweep":
        r.model = r.model or ("pair" if r.quantity == "concurrence" else "single")
        r.t_int_grid = list(r.t_int_grid or DEFAULT_GRID)
    elif r.command in ("single", "pair"):
        r.model = r.command
    if r.quantity is None:
        r.quantity = "concurrence" if r.model == "pair" else "photon"
    if r.command == "digital" and r.quantity != "photon":
        raise ConfigError("config key 'quantity': digital runs record the photon number only")
    if r.command in ("single", "sweep") and r.model == "single" and r.quantity == "concurrence":
        raise ConfigError("config key 'quantity': concurrence needs the pair model")
    return r


# --- commands ----------------------------------------------------------------

def _simulate(r):
    from .digital import DigitalConfig, run_digital
    from .memristor import run_single_trace
    from .network import run_pair_trace
    if r.command == "single":
        return run_single_trace(r.t_int, T_osc=r.t_osc, dt=r.dt, n_periods=r.n_periods)
    if r.command == "pair":
        return run_pair_trace(r.flavor, r.t_int, T_osc=r.t_osc, dt=r.dt, n_periods=r.n_periods)
    return run_digital(DigitalConfig(
        n_steps=r.n_steps, shots=r.shots, seed=r.seed, feedback_mode=r.feedback_mode,
        T_int=r.t_int, T_osc=r.t_osc, n_periods=r.n_periods, readout_flip=r.readout_flip))


def _loop_report(r, trace):
    from . import hysteresis
    from .experiments import digital_loop, loop_columns
    if r.command == "digital":
        loop = digital_loop(trace, smooth=r.feedback_mode == "sampled")
    else:
        x, y = loop_columns(r.quantity, r.model)
        loop = hysteresis.loop_from_trace(trace, x, y, period=r.t_osc)
    try:
        return loop, hysteresis.form_factor(loop)
    except ValueError:
        return loop, None


_LABELS = {"photon": ("<n_in>", "<n_out>"), "coherence": ("C_l1 in", "C_l1 out"),
           "concurrence": ("concurrence in", "concurrence out")}


def _run_trace(r, stdout):
    from . import output
    trace = _simulate(r)
    record = asdict(r)
    if r.csv:
        output.emit_csv(trace, r.csv, config=record)
    if r.svg:
        from .hysteresis import LoopNotClosedError
        try:
            loop, rep = _loop_report(r, trace)
            xlabel, ylabel = _LABELS[r.quantity]
            title = f"{r.command} T_int={r.t_int:g} T_osc={r.t_osc:g}"
            if r.command == "pair":
                title += f" {r.flavor}"
            output.emit_loop_svg(loop, r.svg, report=rep, title=title,
                                 xlabel=xlabel, ylabel=ylabel, config=record)
        except LoopNotClosedError:
            # not one closed period (e.g. several periods with a transient): plot as is
            from .experiments import loop_columns
            x, y = ("n_in", "n_out") if r.command == "digital" else loop_columns(r.quantity, r.model)
            output.emit_svg(trace.column(x), trace.column(y), r.svg, title=r.command,
                            xlabel=_LABELS[r.quantity][0], ylabel=_LABELS[r.quantity][1], config=record)
    if not r.csv and not r.svg:
        stdout.write(output.csv_text(trace, config=record))
    return EXIT_OK


def _run_sweep(r, stdout):
    from . import output
    from .experiments import loop_generator
    from .hysteresis import sweep_reports
    gen = loop_generator(model=r.model, quantity=r.quantity, flavor=r.flavor, T_osc=r.t_osc, dt=r.dt)
    rows = sweep_reports(gen, r.t_int_grid, max_workers=r.workers)
    record = asdict(r)
    if r.csv:
        output.emit_sweep_csv(rows, r.csv, config=record)
    if r.svg:
        title = f"form factor sweep: {r.model} {r.quantity}"
        if r.model == "pair":
            title += f" {r.flavor}"
        output.emit_sweep_svg(rows, r.svg, title=title, xlabel="T_int / T_osc" if r.t_osc == 1 else "T_int",
                              ylabel="form factor F", config=record)
    if not r.csv and not r.svg:
        stdout.write(output.sweep_csv_text(rows, config=record))
    return EXIT_OK


def _run_selftest(extras, stdout):
    from . import acceptance, memristor
    saved = memristor._CLOSED_FORM_DENOMINATOR
    if extras.get("inject_fault"):
        memristor._CLOSED_FORM_DENOMINATOR = saved * (1 + 1e-3)
    try:
        results = acceptance.run_all(fast=not extras.get("full"), stream=stdout)
    finally:
        memristor._CLOSED_FORM_DENOMINATOR = saved
    return EXIT_OK if all(res.passed for res in results) else EXIT_FAIL


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg, extras = parse_config(sys.argv[1:] if argv is None else argv)
        if cfg.command == "selftest":
            return _run_selftest(extras, stdout)
        r = resolve(cfg)
        if r.command == "sweep":
            return _run_sweep(r, stdout)
        return _run_trace(r, stdout)
    except SystemExit as exc:   # argparse: usage errors and --help
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return code if code in (EXIT_OK, EXIT_USAGE) else EXIT_USAGE
    except OSError as exc:
        print(f"pqmsim: I/O error: {exc}", file=stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"pqmsim: {str(exc).splitlines()[0]}", file=stderr)
        return EXIT_USAGE
    except Exception as exc:   # keep the exit-code contract
        print(f"pqmsim: internal error: {exc!r}", file=stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

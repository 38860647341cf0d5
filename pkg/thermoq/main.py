"""
Command line front end:

    python -m thermoq.main <command> [options]

Commands: ep, spectrum, wavefunction, validity, iterate, verify, figure.
Exit codes: 0 success, 1 verification failure, 2 usage/domain error, 3 I/O error.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from thermoq.analysis import (
    FIGURE_IDS,
    CurveTable,
    OverlapConvention,
    ResultTable,
    figure_curves,
    residual_quadrature,
)
from thermoq.config import Settings
from thermoq.core import (
    Box,
    Free,
    Oscillator,
    SystemSpec,
    ThermalPoint,
    UnitsConfig,
    describe,
    level_energy,
    make_levels,
    x0,
)
from thermoq.curve_writer import CurveWriter
from thermoq.errors import (
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    ConfigError,
    OutputError,
    ThermoQError,
)
from thermoq.numerics import QuadratureSettings
from thermoq.perturbation import (
    corrected_energy,
    ep_for_spec,
    expectation_gap,
    free_zero_temperature,
    self_consistent_iterate,
    validity_range,
)
from thermoq.verify import VerificationSuite, all_passed
from thermoq.wavefunctions import (
    BoxDomain,
    box_psi,
    box_wave,
    free_energy,
    free_psi,
    free_wave,
    osc_psi,
    osc_wave,
)

logger = logging.getLogger(__name__)

SYSTEMS = ("box", "free", "oscillator")
FIGURE_KEYS = {
    "L": "L",
    "m": "m",
    "omega": "omega",
    "T": "T",
    "T_min": "T_min",
    "T_max": "T_max",
    "samples": "samples",
    "modes": "n",
    "k": "k",
    "x_min": "x_min",
    "x_max": "x_max",
}


@dataclass(frozen=True)
class RunConfig:
    """One invocation: exactly one system plus everything the commands read."""

    system: SystemSpec
    temperatures: Tuple[float, ...]
    modes: Tuple[int, ...]
    wavenumbers: Tuple[float, ...]
    direction: int
    output: str
    output_path: Optional[str]
    threshold: float
    quadrature: QuadratureSettings
    convention: OverlapConvention
    samples: int
    x_range: Optional[Tuple[float, float]]
    sweep: Tuple[float, ...]
    t_range: Optional[Tuple[float, float]]
    i_max: int
    tol: float


def _strictly_increasing(values, name):
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{name} must be strictly increasing, got {list(values)}")


def build_run_config(settings: Settings, uses_system: bool = True) -> RunConfig:
    """
    Turns resolved settings into a RunConfig; the temperature list comes from --T
    or, when absent, from a uniform T_min..T_max grid of `samples` points.
    Commands that never read the system (figure, verify) pass uses_system=False
    and get the default box.
    """
    units = UnitsConfig(hbar=settings["hbar"], kB=settings["kB"])
    name = settings["system"] if uses_system else "box"
    if name not in SYSTEMS:
        raise ConfigError(f"system must be one of {SYSTEMS}, got '{name}'")
    lengths = settings["L"]
    omegas = settings.get("omega", [])
    if name == "box":
        system = Box(L=lengths[0], m=settings["m"], n_states=settings["n_states"], units=units)
        sweep = tuple(lengths)
    elif name == "oscillator":
        if not omegas:
            raise ConfigError("the oscillator needs --omega")
        system = Oscillator(omega=omegas[0], m=settings["m"], n_states=settings["n_states"], units=units)
        sweep = tuple(omegas)
    else:
        system = Free(m=settings["m"], units=units)
        sweep = (settings["m"],)

    t_min, t_max = settings["T_min"], settings["T_max"]
    t_range = (t_min, t_max) if t_min is not None and t_max is not None else None
    if settings["T"] is not None:
        temperatures = tuple(settings["T"])
    elif t_range is not None:
        temperatures = tuple(np.linspace(t_min, t_max, settings["samples"]))
    else:
        temperatures = ()
    _strictly_increasing(temperatures, "temperature grid")

    modes = settings["modes"]
    if name == "oscillator" and settings.sources["modes"] == "default":
        modes = [0]

    x_min, x_max = settings["x_min"], settings["x_max"]
    x_range = (x_min, x_max) if x_min is not None and x_max is not None else None

    domain = settings["convention_domain"]
    if domain is None:
        domain = "full_line" if name == "oscillator" else "symmetric"
    try:
        convention = OverlapConvention(settings["convention_mode"], domain)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    output = settings["output"]
    if output not in ("csv", "json"):
        raise ConfigError(f"output must be csv or json, got '{output}'")

    return RunConfig(
        system=system,
        temperatures=temperatures,
        modes=tuple(modes),
        wavenumbers=tuple(settings["k"]),
        direction=settings["direction"],
        output=output,
        output_path=settings["output_path"],
        threshold=settings["threshold"],
        quadrature=QuadratureSettings(
            abs_tol=settings["abs_tol"],
            rel_tol=settings["rel_tol"],
            max_depth=settings["max_depth"],
            infinite_cutoff=settings["infinite_cutoff"],
        ),
        convention=convention,
        samples=settings["samples"],
        x_range=x_range,
        sweep=sweep,
        t_range=t_range,
        i_max=settings["i_max"],
        tol=settings["tol"],
    )


def _temperatures(config: RunConfig) -> Tuple[float, ...]:
    if not config.temperatures:
        raise ConfigError("give --T or both --T-min and --T-max")
    return config.temperatures


def _tp(config: RunConfig, T: float) -> ThermalPoint:
    return ThermalPoint(T=float(T), units=config.system.units)


# --- commands ---


def cmd_ep(config: RunConfig) -> Tuple[int, List[ResultTable]]:
    """E_p over the temperature grid with validity flags."""
    temps = _temperatures(config)
    results = [ep_for_spec(config.system, _tp(config, T), config.threshold) for T in temps]
    table = ResultTable.from_columns(
        "ep",
        {
            "T": temps,
            "ep": [r.ep for r in results],
            "within_validity": [float(r.within_validity) for r in results],
        },
        {**describe(config.system), "threshold": config.threshold},
    )
    return EXIT_OK, [table]


def cmd_spectrum(config: RunConfig) -> Tuple[int, List[ResultTable]]:
    """
    Per-mode rows of E_n(0), E_p(T) and E_n(T). Box rows add alpha_n and the residual
    probability, oscillator rows Omega_n(T) and x0(n, T), free-particle rows k(T).
    """
    system = config.system
    rows = []
    for T in _temperatures(config):
        tp = _tp(config, T)
        ep = ep_for_spec(system, tp, config.threshold)
        if isinstance(system, Free):
            m = system.units.mass(system.m)
            for k in config.wavenumbers:
                rows.append(
                    {
                        "k": k,
                        "T": T,
                        "E0": free_energy(k, ThermalPoint(0.0, system.units), m),
                        "ep": ep.ep,
                        "ET": free_energy(k, tp, m),
                        "k_T": free_wave(k, tp, m).k_T,
                    }
                )
            continue
        for n in config.modes:
            e0 = level_energy(system, n)
            row = {"n": n, "T": T, "E0": e0, "ep": ep.ep, "ET": corrected_energy(e0, ep)}
            if isinstance(system, Box):
                row["alpha"] = box_wave(system, n, tp).alpha
                row["residual"] = residual_quadrature(
                    system, n, tp, config.convention, config.quadrature
                )
            else:
                w = osc_wave(system, n, tp)
                row["Omega_n"] = w.Omega_n
                row["x0_nT"] = w.x0_nT
            rows.append(row)
    frame = pd.DataFrame(rows).astype(float)
    meta = {**describe(system), "threshold": config.threshold}
    return EXIT_OK, [ResultTable(label="spectrum", frame=frame, meta=meta)]


def cmd_wavefunction(config: RunConfig) -> Tuple[int, List[ResultTable]]:
    """Sampled wavefunctions: psi for box and oscillator, Re/Im for the free particle."""
    system = config.system
    tables = []
    for T in _temperatures(config):
        tp = _tp(config, T)
        if isinstance(system, Free):
            lo, hi = config.x_range or (0.0, 10.0)
            x = np.linspace(lo, hi, config.samples)
            for k in config.wavenumbers:
                psi = free_psi(free_wave(k, tp, system.units.mass(system.m), config.direction), x)
                tables.append(
                    CurveTable.from_columns(
                        f"psi_k{k:g}_T{T:g}",
                        {"x": x, "re": psi.real, "im": psi.imag},
                        {**describe(system), "k": k, "T": T, "direction": config.direction},
                    )
                )
            continue
        for n in config.modes:
            if isinstance(system, Box):
                lo, hi = config.x_range or (0.0, system.L)
                x = np.linspace(lo, hi, config.samples)
                w = box_wave(system, n, tp)
                psi = box_psi(w, x, BoxDomain.ANYWHERE if config.x_range else BoxDomain.PHYSICAL)
            else:
                lo, hi = config.x_range or (-5.0 * x0(system), 5.0 * x0(system))
                x = np.linspace(lo, hi, config.samples)
                psi = osc_psi(osc_wave(system, n, tp), x)
            tables.append(
                CurveTable.from_columns(
                    f"psi_n{n}_T{T:g}", {"x": x, "psi": psi}, {**describe(system), "n": n, "T": T}
                )
            )
    return EXIT_OK, tables


def _default_t_range(config: RunConfig) -> Tuple[float, float]:
    system = config.system
    if isinstance(system, Box):
        # E_p depends on T L^2 only; 0.05..16 covers the crossing at L = 3
        return 0.05 * 9.0 / max(config.sweep) ** 2, 16.0 * 9.0 / min(config.sweep) ** 2
    if isinstance(system, Oscillator):
        return 0.05 * min(config.sweep), 4.0 * max(config.sweep)
    t0 = free_zero_temperature(system.units.mass(system.m), system.units)
    return 0.05 * t0, 5.0 * t0


def _scaled_crossing(system: SystemSpec, T: float) -> float:
    """T* in the combination that the scaling laws keep constant."""
    if isinstance(system, Box):
        return T * system.L**2
    if isinstance(system, Oscillator):
        return T / system.omega
    return T * system.m


def cmd_validity(config: RunConfig) -> Tuple[int, List[ResultTable]]:
    """Validity intervals and zero crossings, for every L (box) or omega (oscillator) given."""
    t_lo, t_hi = config.t_range or _default_t_range(config)
    interval_rows = {"param": [], "t_lo": [], "t_hi": []}
    crossing_rows = {"param": [], "T_star": [], "T_star_scaled": []}
    for value in config.sweep:
        system = config.system
        if isinstance(system, Box):
            system = Box(L=value, m=system.m, n_states=system.n_states, units=system.units)
        elif isinstance(system, Oscillator):
            system = Oscillator(omega=value, m=system.m, n_states=system.n_states, units=system.units)
        report = validity_range(system, t_lo, t_hi, config.threshold, config.samples)
        for window in report.intervals:
            interval_rows["param"].append(value)
            interval_rows["t_lo"].append(window.t_lo)
            interval_rows["t_hi"].append(window.t_hi)
        for T in report.crossings:
            crossing_rows["param"].append(value)
            crossing_rows["T_star"].append(T)
            crossing_rows["T_star_scaled"].append(_scaled_crossing(system, T))
    meta = {**describe(config.system), "threshold": config.threshold, "t_lo": t_lo, "t_hi": t_hi}
    tables = []
    if interval_rows["param"]:
        tables.append(ResultTable.from_columns("validity_intervals", interval_rows, meta))
    if crossing_rows["param"]:
        tables.append(ResultTable.from_columns("zero_crossings", crossing_rows, meta))
    if not tables:
        print("no validity interval and no zero crossing in the scanned range")
    return EXIT_OK, tables


def cmd_iterate(config: RunConfig) -> Tuple[int, List[ResultTable]]:
    """Self-consistency trace E_p^(I), I = 1..i_max, for each temperature."""
    levels = make_levels(config.system)
    tables = []
    for T in _temperatures(config):
        trace = self_consistent_iterate(levels, _tp(config, T), config.i_max, config.tol)
        tables.append(
            ResultTable.from_columns(
                f"iteration_T{T:g}",
                {
                    "order": range(1, len(trace.corrections) + 1),
                    "correction": trace.corrections,
                    "gap": expectation_gap(trace),
                },
                {**describe(config.system), "T": T, "converged": trace.converged, "tol": trace.tolerance},
            )
        )
        print(f"T={T:g}: converged={trace.converged} (tol={trace.tolerance:g})")
    return EXIT_OK, tables


def cmd_verify(
    config: RunConfig,
    checks: Optional[List[str]] = None,
    alpha: float = 0.1,
    tolerance: Optional[float] = None,
) -> Tuple[int, List[ResultTable]]:
    """Runs the invariant suite and prints one PASS/FAIL line per check."""
    suite = VerificationSuite(comparison_tol=tolerance, quadrature=config.quadrature, alpha=alpha)
    results = suite.run(checks)
    for check in results:
        print(check.line())
    passed = sum(check.passed for check in results)
    print(f"{passed}/{len(results)} checks passed")
    return (EXIT_OK if all_passed(results) else EXIT_VERIFY_FAILED), []


def cmd_figure(config: RunConfig, fig: str, params: dict) -> Tuple[int, List[ResultTable]]:
    """CurveTables of one figure panel."""
    if str(fig).lower() not in FIGURE_IDS:
        raise ConfigError(f"unknown figure '{fig}', expected one of {', '.join(FIGURE_IDS)}")
    return EXIT_OK, figure_curves(fig, params)


# --- argument handling ---


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key=value config file (default: $THERMOQ_CONFIG)")
    parser.add_argument("--system", help="box | free | oscillator (default box)")
    parser.add_argument("--L", dest="L", help="box width, comma list for sweeps (default 3)")
    parser.add_argument("--m", dest="m", help="particle mass (default 1)")
    parser.add_argument("--omega", help="oscillator angular frequency, comma list for sweeps")
    parser.add_argument("--n-states", dest="n_states", help="levels in the trace (default 10)")
    parser.add_argument("--T", dest="T", help="temperature(s), comma separated, increasing")
    parser.add_argument("--T-min", dest="T_min", help="lower end of a temperature grid")
    parser.add_argument("--T-max", dest="T_max", help="upper end of a temperature grid")
    parser.add_argument("--samples", help="grid points (default 400)")
    parser.add_argument("--modes", help="mode indices, '1,2' or '0-5'")
    parser.add_argument("--k", dest="k", help="free-particle wavenumber(s) (default 1)")
    parser.add_argument("--direction", help="+1 right-moving, -1 left-moving")
    parser.add_argument("--x-min", dest="x_min", help="lower end of the position grid")
    parser.add_argument("--x-max", dest="x_max", help="upper end of the position grid")
    parser.add_argument("--threshold", help="validity threshold on |E_p| (default 0.1)")
    parser.add_argument("--output", help="csv | json (default csv)")
    parser.add_argument("--output-path", dest="output_path", help="file or directory to write")
    parser.add_argument("--abs-tol", dest="abs_tol", help="quadrature absolute tolerance")
    parser.add_argument("--rel-tol", dest="rel_tol", help="quadrature relative tolerance")
    parser.add_argument("--max-depth", dest="max_depth", help="quadrature subdivision depth")
    parser.add_argument("--infinite-cutoff", dest="infinite_cutoff", help="cutoff in length scales")
    parser.add_argument("--convention-mode", dest="convention_mode", help="shared_alpha | per_mode")
    parser.add_argument("--convention-domain", dest="convention_domain", help="symmetric | physical | full_line")
    parser.add_argument("--i-max", dest="i_max", help="self-consistency order (default 1)")
    parser.add_argument("--tol", help="self-consistency tolerance (default 1e-6)")
    parser.add_argument("--hbar", help="reduced Planck constant (default 1)")
    parser.add_argument("--kB", dest="kB", help="Boltzmann constant (default 1)")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoq",
        description="Temperature-dependent weak-coupling corrections for 1D model systems.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ep", "weak-coupling term E_p(T)"),
        ("spectrum", "E_n(0), E_p(T) and E_n(T) per mode"),
        ("wavefunction", "sampled temperature-dependent wavefunctions"),
        ("validity", "validity intervals and zero crossings of E_p"),
        ("iterate", "self-consistency trace of the Hamiltonian"),
    ):
        _add_common(commands.add_parser(name, help=text))
    verify = commands.add_parser("verify", help="run the invariant suite")
    _add_common(verify)
    verify.add_argument("--check", help="comma separated check groups (default all)")
    verify.add_argument("--alpha", type=float, default=0.1, help="alpha of the appendixD check")
    verify.add_argument("--tolerance", type=float, help="override quadrature comparison tolerances")
    figure = commands.add_parser("figure", help="curve data for one figure panel")
    figure.add_argument("fig", help=f"one of {', '.join(FIGURE_IDS)}")
    _add_common(figure)
    return parser


SETTING_DESTS = (
    "system", "L", "m", "omega", "n_states", "T", "T_min", "T_max", "samples", "modes", "k",
    "direction", "x_min", "x_max", "threshold", "output", "output_path", "abs_tol", "rel_tol",
    "max_depth", "infinite_cutoff", "convention_mode", "convention_domain", "i_max", "tol",
    "hbar", "kB", "log_level",
)


def _emit(tables: List[ResultTable], config: RunConfig):
    writer = CurveWriter(config.output)
    if config.output_path:
        for path in writer.write(tables, config.output_path):
            print(f"written: {path}")
        return
    for table in tables:
        if len(tables) > 1 and config.output == "csv":
            print(f"# {table.label}")
        sys.stdout.write(writer.render(table))


def run(args: argparse.Namespace, environ=None) -> int:
    settings = Settings(
        flags={key: getattr(args, key) for key in SETTING_DESTS},
        config_path=args.config,
        environ=environ,
    )
    logging.basicConfig(
        level=getattr(logging, str(settings["log_level"]).upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    config = build_run_config(settings, uses_system=args.command not in ("figure", "verify"))
    if args.command == "figure":
        params = {
            FIGURE_KEYS[key]: settings[key]
            for key in FIGURE_KEYS
            if settings.sources.get(key) != "default"
        }
        params["units"] = config.system.units
        status, tables = cmd_figure(config, args.fig, params)
    elif args.command == "verify":
        checks = args.check.split(",") if args.check else None
        status, tables = cmd_verify(config, checks, args.alpha, args.tolerance)
    else:
        command = {
            "ep": cmd_ep,
            "spectrum": cmd_spectrum,
            "wavefunction": cmd_wavefunction,
            "validity": cmd_validity,
            "iterate": cmd_iterate,
        }[args.command]
        status, tables = command(config)
    if tables:
        _emit(tables, config)
    return status


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except OutputError as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ThermoQError, ValueError) as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

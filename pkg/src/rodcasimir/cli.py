"""Command-line front end.

Three subcommands share one set of options::

    rodcasimir sweep      # free energies vs separation -> CSV
    rodcasimir crossings  # dielectric crossings of each material pair
    rodcasimir epsilon    # eps(i xi) of each material -> CSV

Options come from an optional INI config file (``--config``); command-line
flags override it.  Exit status: 0 success, 1 configuration or data error,
2 numerical non-convergence.
"""
import argparse
import configparser
import io
import math
import sys
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import sweep
from .dielectric import MaterialCardError, find_crossings, load_material_card
from .free_energy import IntegrationSettings
from .matsubara import ThermalEnvironment
from .plotting import PlottingUnavailable
from .rod_kernel import RodSystem

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2

SHIPPED_CARDS = {
    "silica": "silica.card", "sio2": "silica.card",
    "zno": "zno.card", "zinc_oxide": "zno.card",
    "bromobenzene": "bromobenzene.card", "bb": "bromobenzene.card",
    "vacuum": "vacuum.card",
}

SWEEP_HEADER = "R_m,F_ret_J_per_m,F_nonret_J_per_m,F_n0_J_per_m,ratio_abs,converged"
_FMT = "%.16e"


class ConfigError(ValueError):
    def __init__(self, field_name, message, source=None):
        self.field = field_name
        where = f"{source}: " if source else ""
        super().__init__(f"{where}field '{field_name}': {message}")


@dataclass
class RunConfig:
    mat1: str = "silica"
    mat2: str = "zno"
    mat3: str = "bromobenzene"
    radius1: float = 1e-9
    radius2: float = 1e-9
    temperature: float = 300.0
    rmin: float = 4e-9
    rmax: float = 1e-5
    points_per_decade: int = 16
    rel_tol: float = 1e-8
    mode: str = "retarded"
    workers: int = 1
    max_matsubara_n: int = 20000
    xi_min: float = 1e10
    xi_max: float = 1e19
    xi_points_per_decade: int = 20
    out: str = None
    figure: str = None


DEFAULTS = RunConfig()

# config file layout: section -> {key: RunConfig field}
_CONFIG_KEYS = {
    "rod1": {"material": "mat1", "radius": "radius1"},
    "rod2": {"material": "mat2", "radius": "radius2"},
    "medium": {"material": "mat3"},
    "environment": {"temperature": "temperature"},
    "sweep": {"rmin": "rmin", "rmax": "rmax", "points_per_decade": "points_per_decade", "mode": "mode"},
    "spectrum": {"xi_min": "xi_min", "xi_max": "xi_max", "points_per_decade": "xi_points_per_decade"},
    "integration": {"rel_tol": "rel_tol", "workers": "workers", "max_matsubara_n": "max_matsubara_n"},
    "output": {"out": "out", "figure": "figure"},
}
_PATH_FIELDS = {"mat1", "mat2", "mat3", "out", "figure"}
_MODES = {"retarded": "ret", "nonretarded": "nonret", "n0": "n0"}


def _convert(name, raw, source=None):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if kind in (float, int):
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(name, f"not a number: {raw!r}", source) from None
        if kind is int:
            if value != int(value):
                raise ConfigError(name, f"expected an integer, got {raw!r}", source)
            value = int(value)
        return value
    return str(raw)


def read_config(path):
    """Values set in an INI config file, keyed by RunConfig field name.

    Relative material and output paths are resolved against the file's
    directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path} ({exc.strerror})") from None
    except configparser.Error as exc:
        raise ConfigError("config", f"malformed file: {exc}", path) from None
    values = {}
    for section in parser.sections():
        if section not in _CONFIG_KEYS:
            raise ConfigError(section, "unknown section", path)
        for key, raw in parser[section].items():
            name = _CONFIG_KEYS[section].get(key)
            if name is None:
                raise ConfigError(f"{section}.{key}", "unknown key", path)
            value = _convert(name, raw.strip(), path)
            if name in _PATH_FIELDS and value and not Path(value).is_absolute():
                local = path.parent / value
                shipped_name = name.startswith("mat") and value.lower() in SHIPPED_CARDS
                if not shipped_name or local.exists():
                    value = str(local)
            values[name] = value
    return values


def validate(cfg):
    """Raise :class:`ConfigError` naming the first invalid field."""
    for name in ("radius1", "radius2", "temperature", "rmin", "rmax", "rel_tol", "xi_max"):
        v = getattr(cfg, name)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(name, f"must be positive and finite, got {v!r}")
    if not cfg.xi_min >= 0:
        raise ConfigError("xi_min", f"must be >= 0, got {cfg.xi_min!r}")
    if not cfg.rmin < cfg.rmax:
        raise ConfigError("rmax", f"must exceed rmin ({cfg.rmin!r}), got {cfg.rmax!r}")
    if not cfg.xi_min < cfg.xi_max:
        raise ConfigError("xi_max", f"must exceed xi_min ({cfg.xi_min!r}), got {cfg.xi_max!r}")
    if cfg.points_per_decade < 4:
        raise ConfigError("points_per_decade", f"must be >= 4, got {cfg.points_per_decade}")
    if cfg.xi_points_per_decade < 1:
        raise ConfigError("xi_points_per_decade", "must be >= 1")
    if not cfg.rel_tol <= 1e-2:
        raise ConfigError("rel_tol", f"must be <= 1e-2, got {cfg.rel_tol!r}")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    if cfg.max_matsubara_n < 1:
        raise ConfigError("max_matsubara_n", "must be >= 1")
    if cfg.mode not in _MODES:
        raise ConfigError("mode", f"expected one of {', '.join(_MODES)}, got {cfg.mode!r}")


def resolve_material(value, field_name):
    """Card path, or the name of a shipped card (silica, zno, bromobenzene, vacuum)."""
    path = Path(value)
    if path.exists():
        return path
    shipped = SHIPPED_CARDS.get(str(value).lower())
    if shipped is not None:
        return Path(str(resources.files("rodcasimir") / "data" / "materials" / shipped))
    raise ConfigError(field_name, f"no such material card: {value}")


def load_materials(cfg):
    return [load_material_card(resolve_material(getattr(cfg, f), f)) for f in ("mat1", "mat2", "mat3")]


def build_config(args):
    values = {}
    if args.config:
        values.update(read_config(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


# --------------------------------------------------------------------------
# commands


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _settings(cfg):
    return IntegrationSettings(rel_tol=cfg.rel_tol, max_matsubara_n=cfg.max_matsubara_n, workers=cfg.workers)


def cmd_sweep(cfg):
    m1, m2, m3 = load_materials(cfg)
    system = RodSystem(cfg.radius1, cfg.radius2, m1, m2, m3)
    env = ThermalEnvironment(cfg.temperature)
    report = sweep(system, env, cfg.rmin, cfg.rmax, cfg.points_per_decade, _settings(cfg),
                   column=_MODES[cfg.mode])
    buf = io.StringIO()
    buf.write(SWEEP_HEADER + "\n")
    for p in report.grid:
        row = [p.R, p.F_ret, p.F_nonret, p.F_n0, p.ratio]
        buf.write(",".join(_FMT % v for v in row) + f",{int(p.converged)}\n")
    buf.write(f"# system: rod1={m1.label} rod2={m2.label} medium={m3.label} "
              f"radius1_m={cfg.radius1!r} radius2_m={cfg.radius2!r} temperature_K={cfg.temperature!r}\n")
    buf.write(f"# analysed_column: {report.column}\n")
    buf.write(f"# sign_boundaries: {len(report.boundaries)}\n")
    for b in report.boundaries:
        buf.write(f"# boundary_R_m: {_FMT % b}\n")
    buf.write(f"# region_signs: {' '.join('%+d' % s for s in report.region_signs())}\n")
    buf.write(f"# extrema: {len(report.extrema)}\n")
    for e in report.extrema:
        buf.write(f"# extremum: {e.kind} R_m={_FMT % e.R} F_J_per_m={_FMT % e.F}\n")
    for w in report.warnings:
        buf.write(f"# warning: {w}\n")
    _emit(buf.getvalue(), cfg.out)
    if cfg.figure:
        from .plotting import plot_sweep
        plot_sweep(report, cfg.figure)
    if not report.converged:
        print("error: at least one grid point did not converge (see '# warning' lines)", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _pair_lines(a, b, xi_min, xi_max):
    if a.same_response(b):
        return [f"{a.label}/{b.label}: no crossings"], []
    rep = find_crossings(a, b, xi_min, xi_max)
    if not rep.crossings:
        return [f"{a.label}/{b.label}: no crossings"] + [f"  note: {d}" for d in rep.diagnostics], []
    lines = [f"{a.label}/{b.label}: {len(rep.crossings)} crossing(s)"]
    marks = []
    for xi, sign in rep.crossings:
        below, above = (">", "<") if sign > 0 else ("<", ">")
        lines.append(f"  xi* = {xi:.10e} rad/s  below: {a.label} {below} {b.label}  "
                     f"above: {a.label} {above} {b.label}")
        marks.append((xi, f"{a.label}/{b.label}"))
    lines += [f"  note: {d}" for d in rep.diagnostics]
    return lines, marks


def _epsilon_grid(cfg):
    lo = max(cfg.xi_min, cfg.xi_max * 1e-12)
    n = max(int(math.ceil(cfg.xi_points_per_decade * math.log10(cfg.xi_max / lo) - 1e-9)), 1)
    xi = lo * (cfg.xi_max / lo) ** (np.arange(n + 1) / n)
    xi[0], xi[-1] = lo, cfg.xi_max
    return xi


def cmd_crossings(cfg):
    mats = load_materials(cfg)
    lines, marks = [], []
    for i, j in ((0, 1), (1, 2), (0, 2)):
        pl, pm = _pair_lines(mats[i], mats[j], cfg.xi_min, cfg.xi_max)
        lines += pl
        marks += pm
    _emit("\n".join(lines) + "\n", cfg.out)
    if cfg.figure:
        from .plotting import plot_epsilon
        xi = _epsilon_grid(cfg)
        plot_epsilon(xi, [m(xi) for m in mats], [m.label for m in mats], cfg.figure, marks)
    return EXIT_OK


def _unique_labels(mats):
    labels = []
    for m in mats:
        label = m.label.replace(",", "_")
        k = 2
        base = label
        while label in labels:
            label = f"{base}_{k}"
            k += 1
        labels.append(label)
    return labels


def cmd_epsilon(cfg):
    mats = load_materials(cfg)
    xi = _epsilon_grid(cfg)
    cols = [np.asarray(m(xi), dtype=float) for m in mats]
    labels = _unique_labels(mats)
    buf = io.StringIO()
    buf.write(",".join(["xi_rad_s"] + labels) + "\n")
    for i, x in enumerate(xi):
        buf.write(",".join(_FMT % v for v in [x] + [c[i] for c in cols]) + "\n")
    _emit(buf.getvalue(), cfg.out)
    if cfg.figure:
        from .plotting import plot_epsilon
        plot_epsilon(xi, cols, labels, cfg.figure)
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "crossings": cmd_crossings, "epsilon": cmd_epsilon}


# --------------------------------------------------------------------------
# argument parsing


def _options():
    d = DEFAULTS
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", metavar="PATH", help="INI config file (default: none)")
    g.add_argument("--mat1", metavar="PATH", help=f"rod 1 material card or shipped name (default: {d.mat1})")
    g.add_argument("--mat2", metavar="PATH", help=f"rod 2 material card or shipped name (default: {d.mat2})")
    g.add_argument("--mat3", metavar="PATH", help=f"medium material card or shipped name (default: {d.mat3})")
    g.add_argument("--radius1", type=float, metavar="METERS", help=f"rod 1 radius (default: {d.radius1:g})")
    g.add_argument("--radius2", type=float, metavar="METERS", help=f"rod 2 radius (default: {d.radius2:g})")
    g.add_argument("--temperature", type=float, metavar="K", help=f"temperature (default: {d.temperature:g})")
    g.add_argument("--rmin", type=float, metavar="METERS", help=f"smallest separation (default: {d.rmin:g})")
    g.add_argument("--rmax", type=float, metavar="METERS", help=f"largest separation (default: {d.rmax:g})")
    g.add_argument("--points-per-decade", dest="points_per_decade", type=int, metavar="N",
                   help=f"separation grid density (default: {d.points_per_decade})")
    g.add_argument("--rel-tol", dest="rel_tol", type=float, metavar="X",
                   help=f"relative tolerance of k-integrals and Matsubara sum (default: {d.rel_tol:g})")
    g.add_argument("--mode", choices=sorted(_MODES),
                   help=f"energy column used for sign boundaries and extrema (default: {d.mode})")
    g.add_argument("--workers", type=int, metavar="N", help=f"worker threads (default: {d.workers})")
    g.add_argument("--max-matsubara-n", dest="max_matsubara_n", type=int, metavar="N",
                   help=f"Matsubara truncation cap (default: {d.max_matsubara_n})")
    g.add_argument("--xi-min", dest="xi_min", type=float, metavar="RAD_S",
                   help=f"lower frequency for crossings/epsilon (default: {d.xi_min:g})")
    g.add_argument("--xi-max", dest="xi_max", type=float, metavar="RAD_S",
                   help=f"upper frequency for crossings/epsilon (default: {d.xi_max:g})")
    g.add_argument("--xi-points-per-decade", dest="xi_points_per_decade", type=int, metavar="N",
                   help=f"epsilon grid density (default: {d.xi_points_per_decade})")
    g.add_argument("--out", metavar="PATH", help="output file (default: standard output)")
    g.add_argument("--figure", metavar="PATH",
                   help="also render a figure to PATH (needs matplotlib; default: none)")
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rodcasimir",
        description="Casimir-Lifshitz free energy between two thin dielectric rods in a medium.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _options()
    sub.add_parser("sweep", parents=[common], help="free energy vs separation (CSV)")
    sub.add_parser("crossings", parents=[common], help="dielectric crossings of each material pair")
    sub.add_parser("epsilon", parents=[common], help="eps(i xi) of each material (CSV)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, MaterialCardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, PlottingUnavailable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

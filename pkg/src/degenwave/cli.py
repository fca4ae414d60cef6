"""Command-line scenario runner.

    degenwave <subcommand> --config scenario.ini [--out DIR] [--override sec.key=value ...] [--seed N]

Subcommands: check-weight, eigen, simulate, lift, control, verify.  Exit code
0 on success, 1 on invalid input, 2 when a numerical check fails.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _accel
from .boundary_control import BoundarySignal, lift_trajectory, transposition_residual
from .controllability import hum_control, unique_continuation_probe
from .discretization import assemble, build_grid, conormal_trace, green_identity_residual, norms
from .domain import Domain
from .elliptic import dirichlet_map, dstar_identity_check, flux_projection_residual
from .errors import AssemblyDefectError, DegenwaveError, DomainError, ParameterError
from .evolution import (EnergyState, SourceFunction, cosine_apply, duhamel_trajectory, energy,
                        homogeneous_solve)
from .io import Table, config_hash, control_tables, emit_plot_data, read_signal_csv, write_csv, write_signal_csv
from .spectral import (DEFAULT_MODES, fractional_norm, group_bound_check, resolvent_solve,
                       solve_eigen, to_coeffs)
from .weights import (WeightKind, WeightSpec, check_boundary_nondegeneracy, estimate_ap_constant,
                      validate_for_domain)

log = logging.getLogger("degenwave")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
_REQUIRED = object()


class ConfigError(DegenwaveError, ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

class ScenarioConfig:
    """INI scenario with typed, line-anchored accessors."""

    def __init__(self, text: str, path: str = "<config>", overrides=(), seed: int | None = None):
        self.path = path
        self.base_dir = Path(path).resolve().parent if path != "<config>" else Path.cwd()
        self.parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            self.parser.read_string(text, source=path)
        except configparser.Error as exc:
            lineno = getattr(exc, "lineno", None)
            msg = str(exc).splitlines()[0]
            if getattr(exc, "errors", None):
                lineno, bad = exc.errors[0]
                msg = f"cannot parse {bad}"
            where = f"{path}:{lineno}" if lineno else path
            raise ConfigError(f"{where}: {msg}") from exc
        self.lines = self._index_lines(text)
        for ov in overrides:
            if "=" not in ov or "." not in ov.split("=", 1)[0]:
                raise ConfigError(f"--override {ov!r}: expected section.key=value")
            lhs, value = ov.split("=", 1)
            sec, key = lhs.split(".", 1)
            if not self.parser.has_section(sec):
                self.parser.add_section(sec)
            self.parser.set(sec, key.strip(), value.strip())
            self.lines[(sec, key.strip().lower())] = "override"
        if seed is not None:
            if not self.parser.has_section("run"):
                self.parser.add_section("run")
            self.parser.set("run", "seed", str(seed))
        self.hash = config_hash(self.canonical())

    @staticmethod
    def _index_lines(text: str) -> dict:
        out, section = {}, None
        for i, line in enumerate(text.splitlines(), start=1):
            s = line.strip()
            m = re.match(r"^\[([^\]]+)\]", s)
            if m:
                section = m.group(1).strip()
                out[(section, None)] = i
                continue
            m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", s)
            if m and section is not None:
                out[(section, m.group(1).strip().lower())] = i
        return out

    def canonical(self) -> str:
        parts = []
        for sec in sorted(self.parser.sections()):
            for key in sorted(self.parser[sec]):
                parts.append(f"{sec}.{key}={self.parser[sec][key].strip()}")
        return "\n".join(parts)

    def where(self, section: str, key: str | None = None) -> str:
        line = self.lines.get((section, key.lower() if key else None))
        if line == "override":
            return f"--override {section}.{key}"
        return f"{self.path}:{line}" if line else self.path

    def has(self, section: str, key: str | None = None) -> bool:
        if key is None:
            return self.parser.has_section(section)
        return self.parser.has_option(section, key)

    def require(self, section: str) -> None:
        if not self.parser.has_section(section):
            raise ConfigError(f"{self.path}: missing required section [{section}]")

    def raw(self, section: str, key: str, default=_REQUIRED) -> str:
        if not self.parser.has_section(section):
            if default is _REQUIRED:
                raise ConfigError(f"{self.path}: missing required section [{section}]")
            return default
        if not self.parser.has_option(section, key):
            if default is _REQUIRED:
                raise ConfigError(f"{self.where(section)}: [{section}] is missing key '{key}'")
            return default
        return self.parser.get(section, key).strip()

    def get(self, section: str, key: str, conv=str, default=_REQUIRED):
        value = self.raw(section, key, default)
        if value is default and default is not _REQUIRED:
            return default
        try:
            return conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.where(section, key)}: [{section}] {key} = {value!r}: {exc}") from exc

    def floats(self, section: str, key: str, default=_REQUIRED):
        return self.get(section, key, lambda s: [float(x) for x in s.replace(",", " ").split()], default)

    def ints(self, section: str, key: str, default=_REQUIRED):
        return self.get(section, key, lambda s: [int(x) for x in s.replace(",", " ").split()], default)

    @property
    def seed(self) -> int:
        return self.get("run", "seed", int, 0)


def _bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_domain(cfg: ScenarioConfig) -> tuple[Domain, tuple[int, ...]]:
    cfg.require("domain")
    b = cfg.floats("domain", "bounds")
    if len(b) not in (2, 4):
        raise ConfigError(f"{cfg.where('domain', 'bounds')}: bounds needs 2 (interval) or 4 (rectangle) numbers")
    try:
        domain = Domain.interval(*b) if len(b) == 2 else Domain.rectangle(*b)
    except ParameterError as exc:
        raise ConfigError(f"{cfg.where('domain', 'bounds')}: {exc}") from exc
    res = cfg.ints("domain", "resolution")
    return domain, tuple(res)


def build_weight(cfg: ScenarioConfig, dimension: int) -> WeightSpec:
    cfg.require("weight")
    kind = cfg.get("weight", "kind", str, "constant")
    try:
        kind = WeightKind(kind)
    except ValueError as exc:
        raise ConfigError(f"{cfg.where('weight', 'kind')}: unknown weight kind {kind!r}") from exc
    dim = cfg.get("weight", "dimension", int, dimension)
    if dim != dimension:
        raise ConfigError(f"{cfg.where('weight', 'dimension')}: weight is {dim}D but the domain is {dimension}D")
    scale = cfg.get("weight", "scale", float, 1.0)
    try:
        if kind is WeightKind.CONSTANT:
            return WeightSpec.constant(scale, dim)
        if kind is WeightKind.INTERIOR_POWER:
            center = cfg.floats("weight", "center", [0.0] * dim)
            return WeightSpec.power(cfg.get("weight", "alpha", float), tuple(center), dim, scale)
        table = Path(cfg.get("weight", "table"))
        if not table.is_absolute():
            table = cfg.base_dir / table
        return WeightSpec.from_table_file(table, scale)
    except (ParameterError, OSError) as exc:
        raise ConfigError(f"{cfg.where('weight')}: {exc}") from exc


def build_system(cfg: ScenarioConfig, *, strict: bool = True):
    domain, res = build_domain(cfg)
    spec = build_weight(cfg, domain.dimension)
    if strict:
        allow = cfg.get("weight", "allow_boundary_degeneracy", _bool, False)
        try:
            validate_for_domain(spec, domain, allow_boundary_degeneracy=allow)
        except (ParameterError, DomainError) as exc:
            raise ConfigError(f"{cfg.where('weight')}: {exc}") from exc
    try:
        grid = build_grid(domain, res)
    except ParameterError as exc:
        raise ConfigError(f"{cfg.where('domain', 'resolution')}: {exc}") from exc
    return spec, domain, assemble(spec, grid)


def build_basis(cfg: ScenarioConfig, system):
    m = cfg.get("spectral", "m", int, min(DEFAULT_MODES[system.grid.dimension], system.n_interior))
    try:
        return solve_eigen(system, m)
    except ParameterError as exc:
        raise ConfigError(f"{cfg.where('spectral', 'm')}: {exc}") from exc


def _mode_data(cfg, section, key, basis, rng, default="zero"):
    """Parse ``zero``, ``mode:k`` or ``random`` into a coefficient vector."""
    spec = cfg.get(section, key, str, default)
    m = basis.m
    if spec == "zero":
        return np.zeros(m)
    if spec == "random":
        return rng.standard_normal(m) / np.arange(1, m + 1) ** 2
    mt = re.fullmatch(r"mode:(\d+)", spec)
    if mt and 1 <= int(mt.group(1)) <= m:
        c = np.zeros(m)
        c[int(mt.group(1)) - 1] = 1.0
        return c
    raise ConfigError(f"{cfg.where(section, key)}: expected zero, random or mode:k (1 <= k <= {m}), got {spec!r}")


def _source(cfg, basis, T, samples):
    spec = cfg.get("evolution", "source", str, "none")
    if spec == "none":
        return None
    mt = re.fullmatch(r"(constant|resonant):(\d+)", spec)
    if not mt or not 1 <= int(mt.group(2)) <= basis.m:
        raise ConfigError(f"{cfg.where('evolution', 'source')}: expected none, constant:k or resonant:k")
    n = int(mt.group(2)) - 1
    times = np.linspace(0.0, T, samples)
    coeffs = np.zeros((samples, basis.m))
    coeffs[:, n] = 1.0 if mt.group(1) == "constant" else np.cos(basis.omega[n] * times)
    return SourceFunction.modal(basis, times, coeffs)


def _support(cfg, grid, section="control"):
    spec = cfg.get(section, "support", str, "all")
    nb = grid.boundary.size
    if spec == "all":
        return np.arange(nb)
    if grid.dimension == 1 and spec in ("left", "right"):
        return np.array([0 if spec == "left" else 1])
    try:
        idx = np.array([int(x) for x in spec.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError(f"{cfg.where(section, 'support')}: expected all, left, right or node positions") from exc
    if idx.size == 0 or idx.min() < 0 or idx.max() >= nb:
        raise ConfigError(f"{cfg.where(section, 'support')}: positions must lie in [0, {nb})")
    return idx


def _signal(cfg, grid, T, samples):
    kind = cfg.get("boundary", "signal", str, "ramp")
    amp = cfg.get("boundary", "amplitude", float, 1.0)
    mask = np.zeros(grid.boundary.size)
    mask[_support(cfg, grid, "boundary")] = 1.0
    times = np.linspace(0.0, T, samples)
    if kind.startswith("file:"):
        path = Path(kind[5:])
        if not path.is_absolute():
            path = cfg.base_dir / path
        try:
            return read_signal_csv(path, grid.boundary.size)
        except (OSError, ParameterError) as exc:
            raise ConfigError(f"{cfg.where('boundary', 'signal')}: {exc}") from exc
    if kind == "ramp":
        prof = times / T
    elif kind == "sine":
        prof = np.sin(np.pi * times / T) ** 2
    else:
        raise ConfigError(f"{cfg.where('boundary', 'signal')}: expected ramp, sine or file:<path>")
    return BoundarySignal(times, amp * np.outer(mask, prof))


def _out_dir(cfg: ScenarioConfig, override: str | None) -> Path:
    d = Path(override or cfg.get("output", "directory", str, "degenwave_out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _formats(cfg) -> set[str]:
    return set(cfg.get("output", "formats", lambda s: s.replace(",", " ").split(), ["csv", "dat"]))


def _emit(cfg, out, stem, table):
    paths = []
    fm = _formats(cfg)
    if "csv" in fm:
        paths.append(write_csv(out / f"{stem}.csv", table, cfg.hash))
    if "dat" in fm:
        paths += emit_plot_data(table, out, stem, cfg.hash)
    return paths


def _flux_labels(grid):
    if grid.dimension == 1:
        return ["flux_left", "flux_right"]
    return [f"flux_b{i}" for i in range(grid.boundary.size)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check_weight(cfg, out) -> int:
    domain, _ = build_domain(cfg)
    spec = build_weight(cfg, domain.dimension)
    p = cfg.get("check", "p", float, 2.0)
    levels = cfg.get("check", "max_level", int, 12)
    beta = cfg.get("check", "beta", float, 0.125 * float(np.min(domain.lengths)))
    try:
        rep = estimate_ap_constant(spec, domain, p, levels)
        nd = check_boundary_nondegeneracy(spec, domain, beta)
    except ParameterError as exc:
        raise ConfigError(f"{cfg.where('check')}: {exc}") from exc
    lv = Table(["level", "constant", "resolution"])
    for i, (c, r) in enumerate(zip(rep.per_level_constant, rep.resolution), start=1):
        lv.add(i, c, r)
    _emit(cfg, out, "a2_levels", lv)
    growth = rep.growth(6, 12) if levels >= 12 else float("nan")
    summ = Table(["p", "estimate", "stabilized", "growth_6_12", "beta", "lambda_floor", "ok", "admissible"])
    summ.add(p, rep.estimate, rep.stabilized, growth, beta, nd.lambda_floor, nd.ok, spec.admissible_alpha())
    _emit(cfg, out, "check_weight", summ)
    print(f"A_{p:g} estimate={rep.estimate:.6g} stabilized={str(rep.stabilized).lower()} "
          f"growth_6_12={growth:.4g}")
    print(f"boundary collar beta={beta:g}: lambda_floor={nd.lambda_floor:.6g} ok={str(nd.ok).lower()}")
    return EXIT_OK


def cmd_eigen(cfg, out) -> int:
    _, _, system = build_system(cfg)
    basis = build_basis(cfg, system)
    grid = system.grid
    tab = Table(["n", "lambda", "sqrt_lambda", *(_flux_labels(grid) if grid.dimension == 1 else ["flux_sigma"])])
    for n in range(basis.m):
        fl = basis.boundary_flux[n]
        extra = list(fl) if grid.dimension == 1 else [float(np.sqrt(np.sum(fl**2 / grid.boundary_measure)))]
        tab.add(n + 1, basis.eigenvalues[n], basis.omega[n], *extra)
    _emit(cfg, out, "eigen", tab)
    if cfg.get("output", "dump_matrices", _bool, False):
        system.dump_triplets(out / "matrices")
    print(f"{basis.m} eigenpairs, lambda_1={basis.eigenvalues[0]:.10g}, poincare={1 / basis.eigenvalues[0]:.10g}")
    return EXIT_OK


def cmd_simulate(cfg, out) -> int:
    _, _, system = build_system(cfg)
    basis = build_basis(cfg, system)
    rng = np.random.default_rng(cfg.seed)
    T = cfg.get("evolution", "T", float, 1.0)
    samples = cfg.get("evolution", "samples", int, 101)
    y0 = _mode_data(cfg, "evolution", "initial", basis, rng, "mode:1")
    y1 = _mode_data(cfg, "evolution", "velocity", basis, rng, "zero")
    src = _source(cfg, basis, T, cfg.get("evolution", "source_samples", int, max(samples, 1001)))
    times = np.linspace(0.0, T, samples)
    Y, V = duhamel_trajectory(basis, EnergyState(y0, y1), src, times)
    labels = _flux_labels(system.grid)
    tab = Table(["t", "energy", "l2", "h1w", *labels], comment=f"modes m={basis.m}")
    flux = Y @ basis.boundary_flux
    for k, t in enumerate(times):
        st = EnergyState(Y[k], V[k])
        tab.add(t, energy(basis, st), fractional_norm(basis, Y[k], 0.0),
                fractional_norm(basis, Y[k], 0.5), *flux[k])
    _emit(cfg, out, "trajectory", tab)
    e0, e1 = tab.rows[0][1], tab.rows[-1][1]
    print(f"simulated {samples} samples to T={T:g}: energy {e0:.10g} -> {e1:.10g}")
    return EXIT_OK


def cmd_lift(cfg, out) -> int:
    _, _, system = build_system(cfg)
    basis = build_basis(cfg, system)
    grid = system.grid
    T = cfg.get("evolution", "T", float, 1.0)
    samples = cfg.get("evolution", "samples", int, 101)
    u = _signal(cfg, grid, T, cfg.get("boundary", "samples", int, samples))
    k_peak = int(np.argmax(np.abs(u.values).max(axis=0)))
    psi = u.values[:, k_peak]
    y = dirichlet_map(system, psi)
    cols = ["x", "value"] if grid.dimension == 1 else ["x", "y", "value"]
    dm = Table(cols, comment=f"Dirichlet lift of the boundary value at t={u.times[k_peak]:.6g}")
    for p, v in zip(grid.nodes, y):
        dm.add(*p, v)
    _emit(cfg, out, "dirichlet_map", dm)
    times = np.linspace(0.0, u.T, samples)
    Y, V = lift_trajectory(basis, u, times)
    tab = Table(["t", "l2", "h1w", "velocity_l2"], comment=f"modes m={basis.m}")
    for k, t in enumerate(times):
        tab.add(t, fractional_norm(basis, Y[k], 0.0), fractional_norm(basis, Y[k], 0.5),
                fractional_norm(basis, V[k], 0.0))
    _emit(cfg, out, "lift", tab)
    if "csv" in _formats(cfg):
        write_signal_csv(out / "signal.csv", u, cfg.hash)
    nr = norms(system, y)
    print(f"Dirichlet lift: h1w={nr.h1w:.6g} l2={nr.l2:.6g} flux={np.array2string(conormal_trace(system, y), precision=6)}")
    return EXIT_OK


def cmd_control(cfg, out) -> int:
    _, _, system = build_system(cfg)
    basis = build_basis(cfg, system)
    rng = np.random.default_rng(cfg.seed)
    cfg.require("control")
    T = cfg.get("control", "T", float)
    eps = cfg.get("control", "eps", float, 1e-8)
    cg_tol = cfg.get("control", "cg_tol", float, 1e-10)
    cg_max = cfg.get("control", "cg_max", int, 200)
    steps = cfg.get("control", "steps", int, max(200, int(np.ceil(1000 * T))))
    yT = _mode_data(cfg, "control", "target", basis, rng, "mode:1")
    vT = _mode_data(cfg, "control", "target_velocity", basis, rng, "zero")
    support = _support(cfg, system.grid)
    try:
        res = hum_control(basis, EnergyState(yT, vT), T, eps, cg_tol, cg_max,
                          n_steps=steps, support=support)
    except ParameterError as exc:
        raise ConfigError(f"{cfg.where('control')}: {exc}") from exc
    m_obs = cfg.get("control", "probe_modes", int, 0)
    sigma = float("nan")
    if m_obs:
        sigma = unique_continuation_probe(basis, T, m_obs, T / steps, support).sigma_min
    tables = control_tables(res, sigma, T)
    fm = _formats(cfg)
    for name, tab in tables.items():
        if "csv" in fm:
            write_csv(out / f"{name}.csv", tab, cfg.hash)
    if "dat" in fm:
        emit_plot_data(res, out, "control", cfg.hash)
    tnorm = np.sqrt(np.sum(basis.eigenvalues * yT**2) + np.sum(vT**2))
    rel = res.residual_energy_norm / tnorm if tnorm > 0 else 0.0
    print(f"HUM: iterations={res.cg_iterations} residual={res.residual_energy_norm:.3e} "
          f"(relative {rel:.3e}) converged={str(res.converged).lower()}")
    return EXIT_OK if res.converged else EXIT_NUMERIC


def verify_battery(system, basis, seed: int) -> Table:
    """Structural and identity checks that must hold to rounding for any valid system."""
    rng = np.random.default_rng(seed)
    tab = Table(["check", "value", "threshold", "pass"])

    def add(name, value, thr, ok=None):
        tab.add(name, float(value), thr, bool(value <= thr) if ok is None else bool(ok))

    K = system.K_full
    add("stiffness_symmetry", abs(K - K.T).max(), 0.0)
    add("row_sums", np.abs(K @ np.ones(system.grid.n_nodes)).max() / abs(K).max(), 1e-12)
    add("lumped_mass_min", float(system.mass.min()), 0.0, system.mass.min() > 0)
    P = basis.vectors
    add("m_orthonormality", np.abs(P.T @ (system.M_I[:, None] * P) - np.eye(basis.m)).max(), 1e-12)
    KP = P.T @ (system.K_II @ P)
    add("k_orthogonality", np.abs(KP - np.diag(basis.eigenvalues)).max() / basis.eigenvalues.max(), 1e-10)
    m = basis.m
    drift = 0.0
    for _ in range(20):
        st = EnergyState(rng.standard_normal(m), rng.standard_normal(m))
        e0 = energy(basis, st)
        for t in (0.1, 1.0, 10.0):
            drift = max(drift, abs(energy(basis, homogeneous_solve(basis, st, t)) - e0) / e0)
    add("energy_drift", drift, 1e-12)
    c = rng.standard_normal(m)
    t, s = rng.uniform(0, 3, 2)
    fe = cosine_apply(basis, c, t + s) + cosine_apply(basis, c, t - s) - 2 * cosine_apply(basis, cosine_apply(basis, c, s), t)
    add("cosine_functional_eq", np.abs(fe).max() / (np.abs(c).max()), 1e-12)
    nb = system.n_boundary
    g = dq = lp = 0.0
    for _ in range(10):
        psi = rng.standard_normal(nb)
        z = rng.standard_normal(system.n_interior)
        g = max(g, green_identity_residual(system, system.extend(z, psi), rng.standard_normal(system.grid.n_nodes)))
        dq = max(dq, dstar_identity_check(system, psi, P[:, rng.integers(m)]))
        lp = max(lp, flux_projection_residual(basis, psi).max())
    add("green_identity", g, 1e-10)
    add("dstar_identity", dq, 1e-10)
    add("flux_projection_identity", lp, 1e-10)
    worst = 1.0
    for _ in range(50):
        lam = rng.uniform(-0.99, 0.99)
        if lam == 0:
            continue
        rep = group_bound_check(basis, (rng.standard_normal(m), rng.standard_normal(m)), lam)
        worst = min(worst, float(rep.ok))
    add("group_inequality_fail", 1.0 - worst, 0.0)
    f = rng.standard_normal(m)
    zsp = resolvent_solve(basis, f, 0.3)
    fz = resolvent_solve(basis, f + 0.09 * basis.eigenvalues * f, 0.3)
    add("resolvent_roundtrip", np.abs(fz - f).max() / np.abs(f).max(), 1e-10)
    add("resolvent_gain", max(0.0, 0.3**4 * fractional_norm(basis, zsp, 1.0) ** 2
                              - fractional_norm(basis, f, 0.0) ** 2), 1e-12 * fractional_norm(basis, f, 0.0) ** 2)
    T = 1.0
    res = []
    for K_ in (50, 100):
        times = np.linspace(0.0, T, K_ + 1)
        coef = rng.standard_normal((nb, 2)) if K_ == 50 else coef
        vals = coef[:, :1] * np.sin(np.pi * times) + coef[:, 1:] * times**2
        u = BoundarySignal(times, vals)
        z0 = np.zeros(m)
        z0[min(1, m - 1)] = 1.0
        res.append(transposition_residual(basis, u, z0, np.zeros(m), T))
    order = np.log2(res[0] / res[1]) if res[1] > 0 else np.inf
    # second order in the sample spacing, unless already at rounding level
    add("transposition_residual", res[1], 1e-12, res[1] <= 1e-12 or order >= 1.5)
    return tab


def cmd_verify(cfg, out) -> int:
    _, _, system = build_system(cfg)
    basis = build_basis(cfg, system)
    tab = verify_battery(system, basis, cfg.seed)
    _emit(cfg, out, "verify", tab)
    failed = [r[0] for r in tab.rows if not r[3]]
    for name, value, thr, ok in tab.rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<30s} {value:.3e} (threshold {thr:.1e})")
    print(f"{len(tab) - len(failed)}/{len(tab)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERIC


COMMANDS = {
    "check-weight": cmd_check_weight,
    "eigen": cmd_eigen,
    "simulate": cmd_simulate,
    "lift": cmd_lift,
    "control": cmd_control,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="degenwave", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI scenario file")
    ap.add_argument("--out", help="output directory (overrides [output] directory)")
    ap.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE")
    ap.add_argument("--seed", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(command: str, config_path, overrides=(), *, out: str | None = None, seed: int | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    try:
        text = Path(config_path).read_text()
    except OSError as exc:
        print(f"error: cannot read config {config_path}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = ScenarioConfig(text, str(config_path), overrides, seed)
        outdir = _out_dir(cfg, out)
        _accel.configure_threads()
        log.info("config hash %s, backend %s", cfg.hash, _accel.backend())
        return COMMANDS[command](cfg, outdir)
    except (ConfigError, ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AssemblyDefectError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args.command, args.config, args.override, out=args.out, seed=args.seed)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Scenario files (TOML), runners and deterministic CSV / JSON outputs.

A scenario file has top-level ``schema_version``, ``name``, ``kind``, ``anchor``
and ``description`` keys, kind-specific sections, and a ``[checks]`` table
mapping metric names to ``{max = ...}`` and/or ``{min = ...}`` bounds.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from . import estimates, multipole, perturbation, temperature
from .classical import (
    ClassicalState,
    ConstantE,
    GravityPair,
    ManyBodySystem,
    MagneticMoment,
    SpringPair,
    UniformB,
    canonical_many_body,
    integrate,
    lorentz_step_check,
)
from .constants import UnitSystem
from .ehrenfest import compare_to_newton, matched_classical, verify_ehrenfest1, verify_ehrenfest2
from .errors import ConfigurationError
from .grid import GaussianPacketSpec, Grid1D, make_gaussian, moments
from .potentials import Harmonic, Linear, SoftenedCoulomb, make_potential
from .propagator import EvolutionConfig, doubling_time, evolve, spread_width

SCHEMA_VERSION = 1
REQUIRED = object()


# ---------------------------------------------------------------- config access


def _section(cfg: dict, name: str) -> dict:
    if name not in cfg:
        raise ConfigurationError(f"missing section [{name}]")
    sec = cfg[name]
    if not isinstance(sec, dict):
        raise ConfigurationError(f"[{name}] must be a table")
    return sec


def _get(sec: dict, key: str, where: str, kind=float, default=REQUIRED):
    if key not in sec:
        if default is REQUIRED:
            raise ConfigurationError(f"[{where}] missing field {key!r}")
        return default
    value = sec[key]
    try:
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"[{where}] field {key!r} has invalid value {value!r}") from None


def _grid(cfg) -> Grid1D:
    g = _section(cfg, "grid")
    return Grid1D(_get(g, "x_min", "grid"), _get(g, "x_max", "grid"), _get(g, "n_points", "grid", int))


def _packet(cfg) -> GaussianPacketSpec:
    p = _section(cfg, "packet")
    return GaussianPacketSpec(_get(p, "x0", "packet"), _get(p, "p0", "packet", default=0.0),
                              _get(p, "a", "packet"), _get(p, "m", "packet", default=1.0))


def _evolution(cfg) -> EvolutionConfig:
    e = _section(cfg, "evolution")
    return EvolutionConfig(_get(e, "dt", "evolution"), _get(e, "n_steps", "evolution", int),
                           _get(e, "record_every", "evolution", int, 1),
                           _get(e, "method", "evolution", str, "split_step"))


def _potential(sec: dict, where: str = "potential"):
    params = {k: v for k, v in sec.items() if k != "kind"}
    return make_potential(_get(sec, "kind", where, str), **params)


def _units(cfg) -> UnitSystem | None:
    if "units" not in cfg:
        return None
    u = cfg["units"]
    return UnitSystem(_get(u, "length_scale", "units"), _get(u, "mass_scale", "units"))


# ---------------------------------------------------------------- outputs


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _columns(path, **cols) -> Path:
    names = list(cols)
    data = [np.asarray(cols[n]) for n in names]
    return write_csv(path, names, zip(*data))


# ---------------------------------------------------------------- runners
# each runner returns (metrics, info, files); metrics feed the [checks] table


def run_free_spread(cfg, out: Path):
    grid, spec, evo = _grid(cfg), _packet(cfg), _evolution(cfg)
    units = _units(cfg)
    psi0 = make_gaussian(spec, grid)
    t0 = time.perf_counter()
    _, traj = evolve(psi0, make_potential("free"), spec.m, evo)
    runtime = time.perf_counter() - t0
    analytic = spread_width(spec.m, spec.a, traj.times) / 2.0
    rel = np.abs(traj.sigma_x - analytic) / analytic
    cols = dict(t=traj.times, mean_x=traj.mean_x, mean_p=traj.mean_p, sigma_x=traj.sigma_x,
                sigma_p=traj.sigma_p, norm=traj.norm, energy=traj.energy, analytic_sigma_x=analytic)
    t_double = doubling_time(spec.m, spec.a)
    info = {"doubling_time": t_double, "t_final_over_doubling": float(traj.times[-1] / t_double)}
    if units is not None:
        cols["t_seconds"] = traj.times * units.time_scale
        info["doubling_time_seconds"] = t_double * units.time_scale
    files = [_columns(out / "timeseries.csv", **cols)]
    metrics = {"spread_rel_error": float(rel.max()), "runtime_seconds": runtime,
               "doubling_times_covered": info["t_final_over_doubling"]}
    return metrics, info, files


def run_correspondence(cfg, out: Path):
    grid, spec, evo = _grid(cfg), _packet(cfg), _evolution(cfg)
    V = _potential(_section(cfg, "potential"))
    psi0 = make_gaussian(spec, grid)
    x0 = moments(psi0, V, spec.m)
    _, q = evolve(psi0, V, spec.m, evo, keep_states=True)
    c = matched_classical(V, spec.m, x0.mean_x, x0.mean_p, evo.dt, evo.n_steps, evo.record_every)
    rep = compare_to_newton(q, c, V)
    r1 = verify_ehrenfest1(q)
    r2 = verify_ehrenfest2(q, V)
    files = [_columns(out / "correspondence.csv", t=q.times, mean_x=q.mean_x, x_classical=rep.x_classical,
                      deviation=q.mean_x - rep.x_classical, mean_p=q.mean_p, p_classical=rep.p_classical,
                      sigma_x=q.sigma_x, energy=q.energy)]
    metrics = {"deviation_over_span": rep.max_dx_over_span, "ehrenfest1_relative": r1.max_relative,
               "ehrenfest2_relative": r2.max_relative, "norm_drift": float(np.max(np.abs(q.norm - 1.0)))}
    info = {"classification": rep.classification, "growth_rate": rep.growth_rate, "max_dx": rep.max_dx}
    return metrics, info, files


def convergence_orders(V, grid, spec, t_final, dts):
    """Ehrenfest residuals for a dt-halving ladder (records every step)."""
    psi0 = make_gaussian(spec, grid)
    res = []
    for dt in dts:
        n = int(round(t_final / dt))
        _, q = evolve(psi0, V, spec.m, EvolutionConfig(dt, n, 1), keep_states=True)
        res.append((verify_ehrenfest1(q).max_abs, verify_ehrenfest2(q, V).max_abs,
                    verify_ehrenfest1(q).scale, verify_ehrenfest2(q, V).scale))
    return np.array(res)


def _order(r, ratio):
    return float(np.polyfit(np.log(ratio ** -np.arange(len(r))), np.log(r), 1)[0])


def run_ehrenfest_convergence(cfg, out: Path):
    par = _section(cfg, "parameters")
    dts = [float(d) for d in _get(par, "dts", "parameters", list)]
    t_final = _get(par, "t_final", "parameters")
    floor = _get(par, "roundoff_floor", "parameters")
    cases = cfg.get("cases")
    if not cases:
        raise ConfigurationError("missing [[cases]] entries")
    prepared = []
    for i, case in enumerate(cases):
        where = f"cases.{i}"
        sub = {"grid": _section(case, "grid"), "packet": _section(case, "packet")}
        prepared.append((_get(case, "label", where, str), _potential(_section(case, "potential"), where),
                         _grid(sub), _packet(sub)))
    ratio = dts[0] / dts[1]
    rows, worst_order, worst_floor = [], 0.0, 0.0
    for label, V, grid, spec in prepared:
        res = convergence_orders(V, grid, spec, t_final, dts)
        for which, col in (("ehrenfest1", 0), ("ehrenfest2", 1)):
            r = res[:, col]
            scale = float(res[0, col + 2]) or 1.0  # identically zero force: use absolute
            exact = bool(np.max(r) / scale < floor)
            order = math.nan if exact else _order(r, ratio)
            if exact:
                worst_floor = max(worst_floor, float(np.max(r) / scale))
            else:
                worst_order = max(worst_order, abs(order - 2.0))
            for dt, v in zip(dts, r):
                rows.append([label, which, dt, v, v / scale, order, int(exact)])
    files = [write_csv(out / "convergence.csv",
                       ["case", "identity", "dt", "residual", "relative", "order", "roundoff"], rows)]
    metrics = {"order_deviation": worst_order, "roundoff_residual": worst_floor}
    return metrics, {"cases": len(prepared)}, files


def run_lorentz(cfg, out: Path):
    p = _section(cfg, "parameters")
    Q, B, M, c = (_get(p, k, "parameters") for k in ("Q", "B", "M", "c"))
    v0 = _get(p, "v0", "parameters")
    periods = _get(p, "periods", "parameters")
    spp = _get(p, "steps_per_period", "parameters", int)
    g = lorentz_step_check(Q, B, v0, M, c, periods, spp)
    omega = abs(Q) * B / (M * c)
    dt = 2 * math.pi / omega / spp
    traj = integrate(ClassicalState.single([0, 0, 0], [M * v0, 0, 0], M), UniformB(Q, (0.0, 0.0, B), c), dt,
                     int(round(periods * spp)), max(1, spp // 100))
    v = traj.P[:, 0, :] / M
    files = [_columns(out / "trajectory.csv", t=traj.times, x=traj.R[:, 0, 0], y=traj.R[:, 0, 1],
                      vx=v[:, 0], vy=v[:, 1], speed=np.linalg.norm(v, axis=1))]
    metrics = {"frequency_rel_error": abs(g.cyclotron_freq - g.expected_freq) / g.expected_freq,
               "radius_rel_error": abs(g.radius - g.expected_radius) / g.expected_radius,
               "speed_change_per_step": g.max_speed_change}
    return metrics, asdict(g), files


def run_constant_e_field(cfg, out: Path):
    p = _section(cfg, "parameters")
    Q, M = _get(p, "Q", "parameters"), _get(p, "M", "parameters")
    E = [float(x) for x in _get(p, "E", "parameters", list)]
    v0 = [float(x) for x in _get(p, "v0", "parameters", list)]
    dt, n = _get(p, "dt", "parameters"), _get(p, "n_steps", "parameters", int)
    traj = integrate(ClassicalState.single([0, 0, 0], np.multiply(M, v0), M), ConstantE(Q, E), dt, n, 10)
    t = traj.times[:, None]
    exact = np.asarray(v0) * t + 0.5 * Q * np.asarray(E) / M * t * t
    err = np.max(np.linalg.norm(traj.R[:, 0, :] - exact, axis=1)) / max(np.max(np.linalg.norm(exact, axis=1)), 1e-300)
    files = [_columns(out / "trajectory.csv", t=traj.times, x=traj.R[:, 0, 0], y=traj.R[:, 0, 1],
                      z=traj.R[:, 0, 2], x_exact=exact[:, 0], y_exact=exact[:, 1], z_exact=exact[:, 2],
                      energy=traj.energy)]
    metrics = {"trajectory_rel_error": float(err),
               "energy_rel_drift": float(np.max(np.abs(traj.energy - traj.energy[0])) / max(abs(traj.energy).max(), 1e-300))}
    return metrics, {}, files


def run_magnetic_moment(cfg, out: Path):
    p = _section(cfg, "parameters")
    mu = np.array([float(x) for x in _get(p, "mu", "parameters", list)])
    B0 = np.array([float(x) for x in _get(p, "B0", "parameters", list)])
    Gm = np.array(_get(p, "gradient", "parameters", list), dtype=float)
    if Gm.shape != (3, 3):
        raise ConfigurationError("[parameters] gradient must be a 3x3 matrix")
    M = _get(p, "M", "parameters")
    dt, n = _get(p, "dt", "parameters"), _get(p, "n_steps", "parameters", int)

    def B_field(R):
        return B0 + Gm @ R

    fd = MagneticMoment(mu, B_field, None, 1e-6)
    analytic = -(mu @ Gm)  # -grad(mu . B) for a linear field
    F_fd = fd.force(np.zeros((1, 3)), np.array([M]))[0]
    traj = integrate(ClassicalState.single([0, 0, 0], [0, 0, 0], M),
                     MagneticMoment(mu, B_field, lambda R: Gm), dt, n, 10)
    t = traj.times[:, None]
    exact = 0.5 * analytic / M * t * t
    scale = max(float(np.max(np.linalg.norm(exact, axis=1))), 1e-300)
    err = float(np.max(np.linalg.norm(traj.R[:, 0, :] - exact, axis=1)) / scale)
    files = [_columns(out / "trajectory.csv", t=traj.times, x=traj.R[:, 0, 0], y=traj.R[:, 0, 1],
                      z=traj.R[:, 0, 2], z_exact=exact[:, 2])]
    metrics = {"fd_force_rel_error": float(np.linalg.norm(F_fd - analytic) / np.linalg.norm(analytic)),
               "trajectory_rel_error": err}
    return metrics, {"force": analytic.tolist()}, files


def kepler_system(G, m1, m2, a, e):
    M = m1 + m2
    rp = a * (1 - e)
    vp = math.sqrt(G * M * (1 + e) / (a * (1 - e)))
    R = np.array([[-m2 / M * rp, 0, 0], [m1 / M * rp, 0, 0]])
    P = np.array([[0, -m1 * m2 / M * vp, 0], [0, m1 * m2 / M * vp, 0]])
    system = ManyBodySystem(np.array([m1, m2]), [(0, 1, GravityPair(G * m1 * m2))])
    return system, ClassicalState(R, P, np.array([m1, m2])), 2 * math.pi * math.sqrt(a**3 / (G * M))


def run_kepler(cfg, out: Path):
    p = _section(cfg, "parameters")
    G, m1, m2, a, e = (_get(p, k, "parameters") for k in ("G", "m1", "m2", "a", "e"))
    periods = _get(p, "periods", "parameters", int)
    spp = _get(p, "steps_per_period", "parameters", int)
    system, s0, T = kepler_system(G, m1, m2, a, e)
    traj = canonical_many_body(system, s0, T / spp, periods * spp, spp // 50)
    E, L = traj.energy, traj.angular_momentum
    dE = np.abs(E - E[0]) / abs(E[0])
    dL = np.linalg.norm(L - L[0], axis=1) / np.linalg.norm(L[0])
    rel = traj.R[:, 1, :] - traj.R[:, 0, :]
    files = [_columns(out / "orbit.csv", t=traj.times, x_rel=rel[:, 0], y_rel=rel[:, 1], energy=E,
                      Lz=L[:, 2])]
    metrics = {"energy_rel_error": float(dE.max()), "angular_momentum_rel_error": float(dL.max()),
               "periods": float(traj.times[-1] / T)}
    return metrics, {"period": T}, files


def run_canonical(cfg, out: Path):
    p = _section(cfg, "parameters")
    masses = np.array([float(x) for x in _get(p, "masses", "parameters", list)])
    R = np.array(_get(p, "positions", "parameters", list), dtype=float)
    V = np.array(_get(p, "velocities", "parameters", list), dtype=float)
    G, kappa = _get(p, "G", "parameters"), _get(p, "kappa", "parameters")
    soft = _get(p, "softening", "parameters", default=0.1)
    dt, n = _get(p, "dt", "parameters"), _get(p, "n_steps", "parameters", int)
    S = masses.size
    if R.shape != (S, 3) or V.shape != (S, 3):
        raise ConfigurationError("[parameters] positions/velocities must be S x 3")
    pairs = []
    for i in range(S):
        for j in range(i + 1, S):
            pairs.append((i, j, GravityPair(G * masses[i] * masses[j], soft)))
            pairs.append((i, j, SpringPair(kappa, 1.0)))
    system = ManyBodySystem(masses, pairs)
    traj = canonical_many_body(system, ClassicalState(R, masses[:, None] * V, masses), dt, n, 10)
    Ptot = traj.P.sum(axis=1)
    scale = float(np.max(np.abs(traj.P)))
    dE = np.abs(traj.energy - traj.energy[0]) / abs(traj.energy[0])
    files = [_columns(out / "momentum.csv", t=traj.times, Px=Ptot[:, 0], Py=Ptot[:, 1], Pz=Ptot[:, 2],
                      energy=traj.energy)]
    metrics = {"momentum_drift": float(np.max(np.abs(Ptot - Ptot[0])) / scale),
               "energy_rel_error": float(dE.max())}
    return metrics, {"bodies": S}, files


def run_monopole_orbit(cfg, out: Path):
    p = _section(cfg, "parameters")
    G, M0, d = _get(p, "G", "parameters"), _get(p, "M0", "parameters"), _get(p, "d", "parameters")
    masses = [float(x) for x in _get(p, "masses", "parameters", list)]
    offsets = np.array(_get(p, "offsets", "parameters", list), dtype=float)
    spp = _get(p, "steps_per_period", "parameters", int)
    body = multipole.BodyModel(masses, offsets)
    src = multipole.PointSource(M0, (0, 0, 0), G)
    T = 2 * math.pi * math.sqrt(d**3 / (G * M0))
    v = math.sqrt(G * M0 / d)
    runs = []
    for scale in (1.0, 2.0):
        M = scale * body.total_mass
        s0 = ClassicalState.single([d, 0, 0], [0, M * v, 0], M)
        scaled = multipole.BodyModel(np.multiply(masses, scale), offsets)
        runs.append(multipole.monopole_newton(scaled, src, s0, T / spp, spp, 10))
    traj = runs[0]
    r = traj.R[:, 0, :]
    phase = np.unwrap(np.arctan2(r[:, 1], r[:, 0]))
    T_num = 2 * math.pi / np.polyfit(traj.times, phase, 1)[0]
    files = [_columns(out / "orbit.csv", t=traj.times, x=r[:, 0], y=r[:, 1],
                      x_doubled_mass=runs[1].R[:, 0, 0], y_doubled_mass=runs[1].R[:, 0, 1])]
    metrics = {"period_rel_error": abs(T_num - T) / T,
               "mass_invariance": float(np.max(np.abs(runs[1].R - runs[0].R)) / d),
               "size_over_distance": body.size / d}
    return metrics, {"period": T}, files


def _random_bodies(seed, n_cases, n_max):
    rng = np.random.default_rng(seed)
    for _ in range(n_cases):
        n = int(rng.integers(2, n_max + 1))
        yield multipole.BodyModel(rng.uniform(0.1, 10.0, n), rng.uniform(-1.0, 1.0, (n, 3)))


def run_multipole(cfg, out: Path):
    p = _section(cfg, "parameters")
    seed = _get(p, "seed", "parameters", int)
    n_cases = _get(p, "n_cases", "parameters", int)
    n_max = _get(p, "max_constituents", "parameters", int)
    ratio = _get(p, "distance_over_size", "parameters")
    d_list = [float(x) for x in _get(p, "d_sweep", "parameters", list)]
    src = multipole.PointSource(_get(p, "M0", "parameters"), (0, 0, 0), _get(p, "G", "parameters"))
    rng = np.random.default_rng(seed + 1)
    rows, worst_dip, ratios, worst_taylor = [], 0.0, [], 0.0
    for k, body in enumerate(_random_bodies(seed, n_cases, n_max)):
        u = rng.normal(size=3)
        D = u / np.linalg.norm(u) * ratio * body.size
        e = multipole.expand_potential(body, src, D)
        dip_scale = src.G * src.mass * body.total_mass * body.size / ratio**2 / body.size**2
        worst_dip = max(worst_dip, abs(e.dipole) / dip_scale)
        ratios.append(e.transcription_ratio)
        if k < 50:  # Taylor oracle is the slow part
            c = multipole.taylor_oracle(body, src, D)
            # natural size of the term; the term itself can nearly cancel for some shapes
            q_scale = src.gm0 * float(np.dot(body.masses, np.sum(body.positions**2, axis=1))) / np.linalg.norm(D) ** 3
            worst_taylor = max(worst_taylor, abs(c[2] - e.quadrupole) / q_scale)
        rows.append([k, body.masses.size, body.size / np.linalg.norm(D), e.monopole, e.dipole, e.quadrupole,
                     e.quadrupole_transcribed, e.transcription_ratio])
    body = next(_random_bodies(seed, 1, n_max))
    direction = np.array([1.0, 0.3, 0.1]) / np.linalg.norm([1.0, 0.3, 0.1])
    sweep = []
    for d in d_list:
        D = direction * d * body.size
        fq = np.linalg.norm(multipole.quadrupole_force(body, src, D))
        fm = np.linalg.norm(multipole.monopole_force(body, src, D))
        sweep.append([d, 1.0 / d, fq, fm, fq / fm])
    sweep = np.array(sweep)
    slope = float(np.polyfit(np.log(sweep[:, 1]), np.log(sweep[:, 4]), 1)[0])
    ratios = np.array(ratios)
    files = [
        write_csv(out / "cases.csv", ["case", "n", "size_over_d", "monopole", "dipole", "quadrupole",
                                      "quadrupole_transcribed", "transcribed_over_standard"], rows),
        write_csv(out / "force_ratio.csv", ["d_over_size", "size_over_d", "quadrupole_force",
                                            "monopole_force", "ratio"], sweep.tolist()),
    ]
    metrics = {"dipole_relative": worst_dip, "force_ratio_slope_deviation": abs(slope - 2.0),
               "taylor_scaled_error": worst_taylor,
               "transcription_ratio_spread": float(np.ptp(ratios))}
    info = {"force_ratio_slope": slope, "transcription_ratio": float(np.mean(ratios)),
            "transcription_note": "as-written quadrupole (M0 restored) / standard attractive quadrupole"}
    return metrics, info, files


def _tidal_toy(p) -> multipole.TidalToy:
    g = _section(p, "grid")
    grid = Grid1D(_get(g, "x_min", "grid"), _get(g, "x_max", "grid"), _get(g, "n_points", "grid", int))
    return multipole.TidalToy(_get(p, "m1", "parameters"), _get(p, "m2", "parameters"),
                              _get(p, "kappa", "parameters"), _get(p, "gm0", "parameters"),
                              _get(p, "d", "parameters"), grid, _get(p, "K", "parameters", int))


def run_tidal(cfg, out: Path):
    p = _section(cfg, "parameters")
    toy = _tidal_toy(p)
    lams = np.asarray(_get(p, "lambdas", "parameters", list), dtype=float)
    res = multipole.tidal_force_correction(toy, lams)
    spec = toy.spectrum()
    prof = [multipole.deformation_profile(toy, lam, spec=spec) for lam in lams]
    shift = np.array([d.r2_shift for d in prof])
    dslope = float(np.polyfit(np.log(lams), np.log(shift), 1)[0])
    files = [_columns(out / "tidal.csv", lam=lams, series_force=res.series_force, oracle_force=res.oracle_force,
                      fd_force=res.fd_force, remainder=res.oracle_force - res.series_force,
                      r2_shift=shift, r2_shift_exact=[d.r2_shift_exact for d in prof],
                      induced_quadrupole=[d.induced_quadrupole for d in prof])]
    parity = max(abs(v) for v in res.parity_terms.values())
    metrics = {"remainder_slope": res.remainder_slope, "parity_forbidden": parity,
               "deformation_slope_deviation": abs(dslope - 1.0),
               "hf_vs_fd": float(np.max(np.abs(res.oracle_force - res.fd_force)))}
    info = {"F1": res.F1, "F2": res.F2, "monopole_force": res.monopole_force, "deformation_slope": dslope,
            "internal_F1_terms": res.parity_terms}
    return metrics, info, files


def run_perturbation(cfg, out: Path):
    p = _section(cfg, "parameters")
    g = _section(p, "grid")
    grid = Grid1D(_get(g, "x_min", "grid"), _get(g, "x_max", "grid"), _get(g, "n_points", "grid", int))
    m, omega = _get(p, "m", "parameters"), _get(p, "omega", "parameters")
    K = _get(p, "K", "parameters", int)
    lams = np.asarray(_get(p, "lambdas", "parameters", list), dtype=float)
    w = _section(p, "well")
    well = SoftenedCoulomb(_get(w, "strength", "well"), _get(w, "softening", "well"), _get(w, "center", "well"))
    t0 = time.perf_counter()
    H0 = Harmonic(m, omega)
    spec = perturbation.solve_spectrum(H0, m, grid, K)
    lin = perturbation.perturbation_series(spec, 0, Linear(1.0), 2)
    eps2_exact = -1.0 / (2 * m * omega**2)
    centre = perturbation.perturbation_series(spec, 0, well, 2, dV0=0.0)
    rows, rem_lin, rem_c = [], [], []
    for lam in lams:
        o1 = perturbation.oracle_exact(H0, Linear(1.0), lam, 0, grid, m)
        o2 = perturbation.oracle_exact(H0, well, lam, 0, grid, m, dV0=0.0)
        rem_lin.append(o1.force - lin.force(lam))
        rem_c.append(o2.force - centre.force(lam))
        rows.append([lam, o1.energy - o1.energy0, lin.energy(lam) - lin.energy0, o1.force, lin.force(lam),
                     o2.force, centre.force(lam), rem_c[-1]])
    runtime = time.perf_counter() - t0
    files = [write_csv(out / "lambda_sweep.csv",
                       ["lam", "linear_dE_exact", "linear_dE_series", "linear_force_exact", "linear_force_series",
                        "well_force_exact", "well_force_series", "well_remainder"], rows)]
    metrics = {"eps1_abs": abs(float(lin.epsilons[0])), "eps2_rel_error": abs(lin.epsilons[1] - eps2_exact) / abs(eps2_exact),
               "linear_remainder": float(np.max(np.abs(rem_lin))),
               "well_remainder_slope": perturbation.remainder_slope(lams, rem_c), "runtime_seconds": runtime}
    info = {"eps": [float(e) for e in lin.epsilons], "F": lin.forces.tolist(), "F1_terms": lin.force_terms["F1"],
            "well_F": centre.forces.tolist()}
    return metrics, info, files


def run_boundary_temps(cfg, out: Path):
    p = cfg.get("parameters", {})
    band = _get(p, "band", "parameters", default=2.1)
    deck = p.get("deck")
    cards = temperature.read_cards(deck) if deck else temperature.builtin_cards()
    rows = temperature.table_report(cards)
    with open(out / "table.csv", "w", newline="", encoding="utf-8") as fh:
        temperature.write_report(rows, fh)
    within = sum(1 for r in rows if r.factor is not None and r.factor <= band)
    flagged = [r.name for r in rows if r.anomaly]
    metrics = {"rows_within_band": float(within), "rows_flagged": float(len(flagged)),
               "h_over_kB_vs_quoted": abs(temperature.boundary_temperature(1.0).T0 / 4.8e-11 - 1.0)}
    info = {"flagged": flagged, "T0_per_row": {r.name: r.T0 for r in rows},
            "reference_per_row": {r.name: r.reference_T0 for r in rows}}
    return metrics, info, [out / "table.csv"]


def run_uncertainty_audit(cfg, out: Path):
    p = _section(cfg, "parameters")
    grid = _grid(cfg)
    widths = [float(x) for x in _get(p, "widths", "parameters", list)]
    sat = []
    for a in widths:
        st = moments(make_gaussian(GaussianPacketSpec(0.0, 1.0, a, 1.0), grid))
        sat.append(st.uncertainty_product - 0.5)
    # squeezed packet in a harmonic trap: product oscillates but never dips below 1/2
    e = _section(cfg, "evolution")
    spec = GaussianPacketSpec(_get(e, "x0", "evolution"), 0.0, _get(e, "a", "evolution"), 1.0)
    _, q = evolve(make_gaussian(spec, grid), Harmonic(1.0, _get(e, "omega", "evolution")), 1.0,
                  EvolutionConfig(_get(e, "dt", "evolution"), _get(e, "n_steps", "evolution", int),
                                  _get(e, "record_every", "evolution", int, 1)))
    prod = q.sigma_x * q.sigma_p
    mirror = estimates.mirror_audit(_get(p, "mirror_mass_g", "parameters"), _get(p, "mirror_amplitude_cm", "parameters"),
                                    _get(p, "mirror_frequency_hz", "parameters"))
    quoted_product = _get(p, "quoted_product", "parameters")
    quoted_ratio = quoted_product / _get(p, "quoted_half_hbar", "parameters")
    rule = estimates.rule_of_thumb_audit()
    files = [
        _columns(out / "saturation.csv", a=widths, excess=sat),
        _columns(out / "evolved_product.csv", t=q.times, sigma_x=q.sigma_x, sigma_p=q.sigma_p, product=prod),
        write_csv(out / "budgets.csv", ["case", "dx", "dp", "product", "ratio_to_bound"],
                  [["mirror", mirror.dx, mirror.dp, mirror.record.product, mirror.record.ratio_to_bound],
                   ["rule_of_thumb", 1e-4, 1e-6, rule.product, rule.ratio_to_bound]]),
    ]
    metrics = {"saturation_error": float(np.max(np.abs(sat))), "min_excess": float(np.min(prod) - 0.5),
               "mirror_product_rel_error": abs(mirror.record.product / quoted_product - 1.0),
               "mirror_ratio_rel_error": abs(mirror.record.ratio_to_bound / quoted_ratio - 1.0),
               "mirror_ratio_log10": math.log10(mirror.record.ratio_to_bound)}
    info = {"mirror_ratio": mirror.record.ratio_to_bound, "quoted_ratio": quoted_ratio,
            "rule_of_thumb_ratio": rule.ratio_to_bound}
    return metrics, info, files


def run_doubling_times(cfg, out: Path):
    p = cfg.get("parameters", {})
    width = _get(p, "width_m", "parameters", default=estimates.MICRON)
    rows = estimates.doubling_table(width)
    spread_1s = estimates.spread_si(rows[0].mass, width, 1.0)
    files = [write_csv(out / "doubling.csv", ["name", "mass_kg", "a_m", "doubling_time_s", "reference_s", "ratio"],
                       [[r.name, r.mass, r.width, r.doubling_time, r.reference, r.ratio] for r in rows])]
    factor = max(max(r.ratio, 1.0 / r.ratio) for r in rows)
    return {"max_factor": factor}, {"electron_width_after_1s_m": spread_1s}, files


RUNNERS = {
    "free_spread": run_free_spread,
    "correspondence": run_correspondence,
    "ehrenfest_convergence": run_ehrenfest_convergence,
    "lorentz": run_lorentz,
    "constant_e_field": run_constant_e_field,
    "magnetic_moment": run_magnetic_moment,
    "kepler": run_kepler,
    "canonical": run_canonical,
    "monopole_orbit": run_monopole_orbit,
    "multipole": run_multipole,
    "tidal": run_tidal,
    "perturbation": run_perturbation,
    "boundary_temps": run_boundary_temps,
    "uncertainty_audit": run_uncertainty_audit,
    "doubling_times": run_doubling_times,
}


# ---------------------------------------------------------------- scenario objects


@dataclass
class Check:
    name: str
    value: float
    passed: bool
    max: float | None = None
    min: float | None = None


@dataclass
class RunSummary:
    scenario: str
    kind: str
    anchor: str
    wall_time: float
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


@dataclass
class Scenario:
    name: str
    kind: str
    anchor: str
    description: str
    config: dict
    checks: dict
    source: str = ""

    def run(self, out_dir: Path | str) -> RunSummary:
        out = Path(out_dir) / self.name
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        metrics, info, files = RUNNERS[self.kind](self.config, out)
        wall = time.perf_counter() - t0
        checks = []
        for name, bound in self.checks.items():
            if name not in metrics:
                raise ConfigurationError(f"[checks] {name!r} is not a metric of kind {self.kind!r}")
            v = float(metrics[name])
            ok = math.isfinite(v)
            if "max" in bound:
                ok = ok and v <= bound["max"]
            if "min" in bound:
                ok = ok and v >= bound["min"]
            checks.append(Check(name, v, bool(ok), bound.get("max"), bound.get("min")))
        info = dict(info, metrics=metrics)
        summary = RunSummary(self.name, self.kind, self.anchor, wall, checks,
                             [str(Path(f).name) for f in files], info)
        (out / "summary.json").write_text(summary.to_json() + "\n", encoding="utf-8")
        return summary


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        cfg = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"{source}: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    for key in ("name", "kind"):
        if key not in cfg:
            raise ConfigurationError(f"{source}: missing top-level field {key!r}")
    kind = cfg["kind"]
    if kind not in RUNNERS:
        raise ConfigurationError(f"{source}: unknown kind {kind!r}")
    checks = cfg.get("checks", {})
    for name, bound in checks.items():
        if not isinstance(bound, dict) or not set(bound) <= {"max", "min"} or not bound:
            raise ConfigurationError(f"{source}: [checks] {name!r} needs a max and/or min bound")
    sc = Scenario(cfg["name"], kind, cfg.get("anchor", ""), cfg.get("description", ""), cfg, checks, source)
    validate(sc)
    return sc


def validate(sc: Scenario) -> None:
    """Build the module objects a scenario needs so bad parameters fail before any run."""
    cfg = sc.config
    if sc.kind in ("free_spread", "correspondence"):
        grid, spec = _grid(cfg), _packet(cfg)
        _evolution(cfg)
        make_gaussian(spec, grid)
        if sc.kind == "correspondence":
            _potential(_section(cfg, "potential"))
    elif sc.kind == "uncertainty_audit":
        _grid(cfg)
        _section(cfg, "evolution")
        _section(cfg, "parameters")
    elif sc.kind in ("tidal", "perturbation"):
        p = _section(cfg, "parameters")
        _section(p, "grid")
    elif sc.kind == "ehrenfest_convergence":
        _section(cfg, "parameters")
        cases = cfg.get("cases")
        if not isinstance(cases, list) or not cases:
            raise ConfigurationError("missing [[cases]] entries")
        for i, case in enumerate(cases):
            sub = {"grid": _section(case, "grid"), "packet": _section(case, "packet")}
            make_gaussian(_packet(sub), _grid(sub))
            _potential(_section(case, "potential"), f"cases.{i}")
    elif sc.kind not in ("boundary_temps", "doubling_times"):
        _section(cfg, "parameters")


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario file {path}: {exc}") from None
    return parse_scenario(text, str(path))


def _bundled_dir():
    return resources.files("ehrenlab.data").joinpath("scenarios")


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in _bundled_dir().iterdir() if p.name.endswith(".toml"))


def bundled(name: str) -> Scenario:
    res = _bundled_dir().joinpath(f"{name}.toml")
    if not res.is_file():
        raise ConfigurationError(f"no bundled scenario named {name!r}")
    return parse_scenario(res.read_text(encoding="utf-8"), f"bundled:{name}")


def list_scenarios() -> list[dict]:
    out = []
    for n in bundled_names():
        sc = bundled(n)
        out.append({"name": sc.name, "kind": sc.kind, "anchor": sc.anchor, "description": sc.description})
    return out


def resolve(target: str) -> Scenario:
    """A path to a TOML file, or the name of a bundled scenario."""
    p = Path(target)
    if p.suffix == ".toml" or p.exists():
        return load_scenario(p)
    return bundled(target)

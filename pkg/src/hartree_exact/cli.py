"""Command-line front end: config parsing, subcommand dispatch, and
machine-readable output.

Subcommands
-----------
states       write closed-form family members plus a JSON sidecar
evolve       push a stored state through the exact kernel operator
oracle       same interface, but through the split-step integrator
symmetry     apply a ladder/displacement symmetry to a stored state
quasienergy  report the quasi-energy ladder for one level
verify       run the invariant battery and emit a JSON report

All numeric output is written with round-trip-exact floating-point formatting
(17 significant digits in CSV, shortest-repr in JSON), and every artifact
records the package version and a SHA-256 digest of the config file, so
identical config + seed reproduce identical bytes.

Exit codes: 0 ok, 1 failed check, 2 caustic, 3 grid, 4 config.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (
    CausticError,
    ConfigError,
    GridError,
    HartreeError,
    ParseError,
    RegimeError,
    ResonanceError,
    StepError,
    ValidationError,
)
from .exact_states import action, fock_state, quasi_energy, tcs_constants
from .hamilton_ehrenfest import closed_form
from .model import ModelParams
from .oracle import SolverConfig
from .oracle import run as oracle_run
from .propagator import compose, constants_of, evolve
from .symmetry import displacement_apply, initial_means, ladder_build, symmetry_apply
from .wavefunction import (
    Grid,
    WaveFunction,
    default_grid,
    load_wavefunction,
    moments,
    norm_sq,
    normalized,
    save_wavefunction,
)

__all__ = ["RunConfig", "parse_config", "main"]


_MODEL_KEYS = ("m", "k", "omega", "hbar", "e_charge", "E_field", "a", "b", "c", "kappa")
_GRID_KEYS = ("x_min", "x_max", "n_points")
_SOLVER_KEYS = ("dt", "renormalize")
_MISC_KEYS = ("output", "seed")
_ALL_KEYS = frozenset(_MODEL_KEYS + _GRID_KEYS + _SOLVER_KEYS + _MISC_KEYS)
_REQUIRED_KEYS = ("m", "k", "omega", "hbar")


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of model, grid, solver, and output settings."""

    model: ModelParams
    grid: Grid
    solver: SolverConfig
    output: str
    seed: int


def _scan_entries(path) -> dict:
    entries = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(
                    f"line {lineno}: expected 'key = value', got {line!r}", line=lineno
                )
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _ALL_KEYS:
                raise ParseError(f"line {lineno}: unknown key {key!r}", line=lineno, key=key)
            if key in entries:
                raise ParseError(
                    f"line {lineno}: duplicate key {key!r}", line=lineno, key=key
                )
            if not val:
                raise ParseError(f"line {lineno}: empty value for {key!r}", line=lineno, key=key)
            entries[key] = (val, lineno)
    return entries


def _take_float(entries, key, default):
    if key not in entries:
        return default
    val, lineno = entries[key]
    try:
        return float(val)
    except ValueError:
        raise ParseError(
            f"line {lineno}: value for {key!r} is not a number: {val!r}",
            line=lineno,
            key=key,
        ) from None


def _take_int(entries, key, default):
    if key not in entries:
        return default
    val, lineno = entries[key]
    try:
        return int(val)
    except ValueError:
        raise ParseError(
            f"line {lineno}: value for {key!r} is not an integer: {val!r}",
            line=lineno,
            key=key,
        ) from None


def _take_bool(entries, key, default):
    if key not in entries:
        return default
    val, lineno = entries[key]
    low = val.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ParseError(
        f"line {lineno}: value for {key!r} is not a boolean: {val!r}", line=lineno, key=key
    )


def parse_config(path) -> RunConfig:
    """Parse and validate a flat ``key = value`` config file."""
    entries = _scan_entries(path)
    for req in _REQUIRED_KEYS:
        if req not in entries:
            raise ParseError(f"missing required key {req!r}", key=req)

    model = ModelParams(
        m=_take_float(entries, "m", None),
        k=_take_float(entries, "k", None),
        omega=_take_float(entries, "omega", None),
        hbar=_take_float(entries, "hbar", None),
        e_charge=_take_float(entries, "e_charge", 1.0),
        E_field=_take_float(entries, "E_field", 0.0),
        a=_take_float(entries, "a", 0.0),
        b=_take_float(entries, "b", 0.0),
        c=_take_float(entries, "c", 0.0),
        kappa=_take_float(entries, "kappa", 0.0),
    )
    freqs = model.frequencies()

    n_points = _take_int(entries, "n_points", 1024)
    has_min, has_max = "x_min" in entries, "x_max" in entries
    if has_min != has_max:
        missing = "x_max" if has_min else "x_min"
        raise ParseError(f"missing required key {missing!r} (x_min/x_max go together)",
                         key=missing)
    if has_min:
        grid = Grid(
            x_min=_take_float(entries, "x_min", None),
            x_max=_take_float(entries, "x_max", None),
            n_points=n_points,
        )
    else:
        scale = 13.0 * model.hbar / (2.0 * model.m * freqs.Omega)
        grid = default_grid(0.0, scale, n_points=n_points)

    dt = _take_float(entries, "dt", model.drive_period / 4096.0)
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError(f"dt must be > 0, got {dt!r}")
    solver = SolverConfig(dt=dt, renormalize=_take_bool(entries, "renormalize", False))

    output = entries.get("output", ("csv", 0))[0]
    if output not in ("csv", "json"):
        raise ParseError(
            f"output must be 'csv' or 'json', got {output!r}",
            line=entries.get("output", (None, None))[1],
            key="output",
        )
    seed = _take_int(entries, "seed", 0)
    return RunConfig(model=model, grid=grid, solver=solver, output=output, seed=seed)


def _config_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# output helpers


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(_json_text(obj))


def _state_meta(digest: str, **extra) -> dict:
    meta = {"version": __version__, "config_sha256": digest}
    meta.update(extra)
    return meta


def _write_state(path, psi: WaveFunction, fmt: str, meta: dict):
    if fmt == "csv":
        save_wavefunction(path, psi, metadata=meta)
    else:
        obj = dict(meta)
        obj.update(
            x_min=psi.grid.x_min,
            x_max=psi.grid.x_max,
            n_points=psi.grid.n_points,
            x=[float(v) for v in psi.grid.x],
            re=[float(v) for v in psi.values.real],
            im=[float(v) for v in psi.values.imag],
        )
        _write_json(path, obj)


def _constants_dict(consts) -> dict:
    return {
        "c1": consts.c1,
        "c2": consts.c2,
        "c3": consts.c3,
        "c4": consts.c4,
        "c5": consts.c5,
    }


def _l2_distance(psi: WaveFunction, phi: WaveFunction) -> float:
    return math.sqrt(psi.grid.h * float(np.sum(np.abs(psi.values - phi.values) ** 2)))


def _squeezed_probe(cfg: RunConfig, freqs, x0=0.3, p0=0.2, width=0.8, chirp=0.1):
    model, grid = cfg.model, cfg.grid
    sigma = width * model.hbar / (2.0 * model.m * freqs.Omega)
    dx = grid.x - x0
    vals = np.exp(-(dx**2) / (4.0 * sigma) + 1j * (p0 * dx + 0.5 * chirp * dx**2) / model.hbar)
    return normalized(WaveFunction(grid=grid, values=vals.astype(complex)))


# ---------------------------------------------------------------------------
# subcommands


def cmd_states(cfg: RunConfig, digest: str, args) -> int:
    model = cfg.model
    freqs = model.frequencies()
    os.makedirs(args.out_dir, exist_ok=True)
    sidecar = []
    for n in range(args.n_max + 1):
        consts = tcs_constants(model, freqs, n)
        psi = fock_state(model, freqs, n, consts, args.t, cfg.grid)
        fname = os.path.join(args.out_dir, f"state_n{n}.{cfg.output}")
        _write_state(
            fname, psi, cfg.output, _state_meta(digest, n=n, t=f"{args.t:.17g}")
        )
        qe = quasi_energy(model, freqs, n)
        sidecar.append(
            {
                "n": n,
                "t": args.t,
                "S": action(model, freqs, consts, args.t),
                "E_n": qe.energy,
                "gamma": qe.aa_phase,
                "constants": _constants_dict(consts),
            }
        )
    _write_json(
        os.path.join(args.out_dir, "states.json"),
        {"version": __version__, "config_sha256": digest, "states": sidecar},
    )
    return 0


def cmd_evolve(cfg: RunConfig, digest: str, args) -> int:
    model = cfg.model
    freqs = model.frequencies()
    psi = load_wavefunction(args.state_in)
    if args.steps is not None and args.steps < 1:
        raise ValidationError(f"--steps must be >= 1, got {args.steps}")
    out = compose(model, freqs, psi, args.t0, args.t1, n_steps=args.steps)
    meta = _state_meta(
        digest,
        t0=f"{args.t0:.17g}",
        t1=f"{args.t1:.17g}",
        steps="auto" if args.steps is None else args.steps,
        operator="kernel",
    )
    _write_state(args.out, out, cfg.output, meta)
    return 0


def cmd_oracle(cfg: RunConfig, digest: str, args) -> int:
    model = cfg.model
    freqs = model.frequencies()
    psi = load_wavefunction(args.state_in)
    if args.dt is not None and args.steps is not None:
        raise ValidationError("give either --dt or --steps, not both")
    if args.steps is not None:
        if args.steps < 1:
            raise ValidationError(f"--steps must be >= 1, got {args.steps}")
        dt = (args.t1 - args.t0) / args.steps
    elif args.dt is not None:
        dt = args.dt
    else:
        dt = cfg.solver.dt
    config = SolverConfig(dt=dt, renormalize=cfg.solver.renormalize)
    out = oracle_run(model, freqs, psi, args.t0, args.t1, config).final()
    meta = _state_meta(
        digest,
        t0=f"{args.t0:.17g}",
        t1=f"{args.t1:.17g}",
        dt=f"{dt:.17g}",
        operator="split-step",
    )
    _write_state(args.out, out, cfg.output, meta)
    return 0


def _parse_alpha(text: str) -> complex:
    try:
        re_part, im_part = (float(p) for p in text.split(","))
    except ValueError:
        raise ParseError(
            f"--alpha expects 're,im', got {text!r}", key="alpha"
        ) from None
    return complex(re_part, im_part)


def cmd_symmetry(cfg: RunConfig, digest: str, args) -> int:
    model = cfg.model
    freqs = model.frequencies()
    psi = load_wavefunction(args.state)
    consts_in = constants_of(model, freqs, psi, args.t)
    p_ref, x_ref = initial_means(model, freqs, consts_in)

    alpha = None
    if args.op == "displace":
        if args.alpha is None:
            raise ValidationError("--op displace requires --alpha re,im")
        alpha = _parse_alpha(args.alpha)
        out = displacement_apply(
            model, freqs, alpha, psi, args.t, p_ref=p_ref, x_ref=x_ref
        )
    else:
        sign = +1 if args.op == "ladder+" else -1
        op = ladder_build(model, freqs, sign, p_ref=p_ref, x_ref=x_ref)
        out = symmetry_apply(model, freqs, op, psi, args.t)

    meta = _state_meta(digest, op=args.op, t=f"{args.t:.17g}")
    if alpha is not None:
        meta["alpha"] = f"{alpha.real:.17g},{alpha.imag:.17g}"
    _write_state(args.out, out, cfg.output, meta)

    consts_out = constants_of(model, freqs, out, args.t)
    report = {
        "version": __version__,
        "config_sha256": digest,
        "op": args.op,
        "t": args.t,
        "alpha": None if alpha is None else [alpha.real, alpha.imag],
        "norm_sq": norm_sq(out),
        "constants": _constants_dict(consts_out),
    }
    sys.stdout.write(_json_text(report))
    return 0


def cmd_quasienergy(cfg: RunConfig, digest: str, args) -> int:
    model = cfg.model
    freqs = model.frequencies()
    qe = quasi_energy(model, freqs, args.n)
    above = quasi_energy(model, freqs, args.n + 1)
    report = {
        "version": __version__,
        "config_sha256": digest,
        "n": qe.n,
        "energy": qe.energy,
        "aa_phase": qe.aa_phase,
        "period": qe.period,
        "spacing": above.energy - qe.energy,
    }
    sys.stdout.write(_json_text(report))
    return 0


# ---------------------------------------------------------------------------
# verify battery


def _verify_checks(cfg: RunConfig):
    """Build the named invariant checks; each returns a scalar error."""
    model, grid = cfg.model, cfg.grid
    freqs = model.frequencies()
    hbar, mO = model.hbar, model.m * freqs.Omega
    rng = np.random.default_rng(cfg.seed)
    pair_draws = rng.uniform(-0.6, 0.6, size=(3, 4))

    def norm_conservation():
        psi = _squeezed_probe(cfg, freqs)
        return abs(norm_sq(evolve(model, freqs, psi, 0.0, 1.1)) - norm_sq(psi))

    def uncertainty_saturation():
        psi = fock_state(model, freqs, 0, tcs_constants(model, freqs, 0), 0.9, grid)
        mom = moments(psi, hbar)
        return abs(mom.sigma_pp * mom.sigma_xx - mom.sigma_px**2 - hbar**2 / 4.0)

    def moment_transport():
        psi = _squeezed_probe(cfg, freqs)
        consts = constants_of(model, freqs, psi, 0.0)
        out = moments(evolve(model, freqs, psi, 0.0, 1.3), hbar)
        g = closed_form(model, freqs, consts, 1.3)
        return max(
            abs(out.x_mean - g.X),
            abs(out.p_mean - g.P),
            abs(out.sigma_xx - g.sigma_xx),
            abs(out.sigma_px - g.sigma_px),
            abs(out.sigma_pp - g.sigma_pp),
        )

    def ladder_algebra():
        consts0 = tcs_constants(model, freqs, 0)
        p_ref, x_ref = initial_means(model, freqs, consts0)
        up = ladder_build(model, freqs, +1, p_ref=p_ref, x_ref=x_ref)
        phi0 = fock_state(model, freqs, 0, consts0, 1.1, grid)
        phi1 = fock_state(model, freqs, 1, tcs_constants(model, freqs, 1), 1.1, grid)
        return _l2_distance(symmetry_apply(model, freqs, up, phi0, 1.1), phi1)

    def ladder_commutator():
        consts0 = tcs_constants(model, freqs, 0)
        p_ref, x_ref = initial_means(model, freqs, consts0)
        up = ladder_build(model, freqs, +1, p_ref=p_ref, x_ref=x_ref)
        down = ladder_build(model, freqs, -1, p_ref=p_ref, x_ref=x_ref)
        psi = _squeezed_probe(cfg, freqs)
        du = down.apply(model, freqs, up.apply(model, freqs, psi))
        ud = up.apply(model, freqs, down.apply(model, freqs, psi))
        return _l2_distance(psi.with_values(du.values - ud.values), psi)

    def displacement_group_law():
        consts0 = tcs_constants(model, freqs, 0)
        p_ref, x_ref = initial_means(model, freqs, consts0)
        psi = fock_state(model, freqs, 0, consts0, 0.0, grid)
        worst = 0.0
        for re_a, im_a, re_b, im_b in pair_draws:
            al, be = complex(re_a, im_a), complex(re_b, im_b)
            lhs = displacement_apply(
                model, freqs, al,
                displacement_apply(model, freqs, be, psi, 0.0, p_ref=p_ref, x_ref=x_ref),
                0.0, p_ref=p_ref, x_ref=x_ref,
            )
            rhs = displacement_apply(
                model, freqs, al + be, psi, 0.0, p_ref=p_ref, x_ref=x_ref
            )
            phase = np.exp(0.5 * (al * np.conj(be) - np.conj(al) * be))
            worst = max(worst, _l2_distance(lhs, rhs.with_values(phase * rhs.values)))
        return worst

    def oracle_consistency():
        consts0 = tcs_constants(model, freqs, 0)
        psi0 = fock_state(model, freqs, 0, consts0, 0.0, grid)
        dt = cfg.solver.dt
        steps = max(1, round(0.5 * model.drive_period / dt))
        t1 = steps * dt
        got = oracle_run(model, freqs, psi0, 0.0, t1, cfg.solver).final()
        return _l2_distance(got, fock_state(model, freqs, 0, consts0, t1, grid))

    def quasienergy_reduction():
        kt = freqs.kappa_tilde
        spacing = hbar * (freqs.Omega + kt * model.c / (2.0 * mO))
        worst = 0.0
        for n in range(3):
            worst = max(
                worst, abs(quasi_energy(model, freqs, n).energy - spacing * (n + 0.5))
            )
        return worst

    def aa_phase_index_independence():
        gammas = [quasi_energy(model, freqs, n).aa_phase for n in range(3)]
        return max(gammas) - min(gammas)

    checks = [
        ("norm_conservation", 1e-8, norm_conservation),
        ("uncertainty_saturation", 1e-8, uncertainty_saturation),
        ("moment_transport", 1e-6, moment_transport),
        ("ladder_algebra", 1e-5, ladder_algebra),
        ("ladder_commutator", 1e-8, ladder_commutator),
        ("displacement_group_law", 1e-6, displacement_group_law),
        ("oracle_consistency", 1e-4, oracle_consistency),
    ]
    if model.E_field == 0.0:
        checks.append(("quasienergy_reduction", 1e-12, quasienergy_reduction))
    else:
        checks.append(("aa_phase_index_independence", 1e-12, aa_phase_index_independence))
    return checks


def _worker_count(n_checks: int) -> int:
    env = os.environ.get("HARTREE_EXACT_THREADS", "")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValidationError(
                f"HARTREE_EXACT_THREADS must be an integer, got {env!r}"
            ) from None
        if cap < 1:
            raise ValidationError(f"HARTREE_EXACT_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_checks, cap))


def cmd_verify(cfg: RunConfig, digest: str, args) -> int:
    checks = _verify_checks(cfg)

    def run_one(entry):
        name, tol, fn = entry
        try:
            value = float(fn())
        except GridError as exc:
            return {
                "check": name,
                "value": None,
                "tolerance": tol,
                "pass": False,
                "error": str(exc),
            }
        return {"check": name, "value": value, "tolerance": tol, "pass": value < tol}

    with ThreadPoolExecutor(max_workers=_worker_count(len(checks))) as pool:
        results = list(pool.map(run_one, checks))

    all_pass = all(entry["pass"] for entry in results)
    report = {
        "version": __version__,
        "config_sha256": digest,
        "checks": results,
        "pass": all_pass,
    }
    sys.stdout.write(_json_text(report))
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# dispatcher


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hartree-exact",
        description="Exact evolution, symmetry operators, and coherent states "
        "of the quadratic Hartree model, with a split-step cross-check.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="flat key=value config file")
        return p

    p_states = with_config(sub.add_parser("states", help="write family members"))
    p_states.add_argument("--n-max", type=int, default=3)
    p_states.add_argument("--t", type=float, default=0.0)
    p_states.add_argument("--out-dir", default=".")

    p_evolve = with_config(sub.add_parser("evolve", help="apply the exact operator"))
    p_evolve.add_argument("--from", dest="state_in", required=True)
    p_evolve.add_argument("--t0", type=float, required=True)
    p_evolve.add_argument("--t1", type=float, required=True)
    p_evolve.add_argument("--steps", type=int, default=None)
    p_evolve.add_argument("--out", required=True)

    p_oracle = with_config(sub.add_parser("oracle", help="apply the split-step solver"))
    p_oracle.add_argument("--from", dest="state_in", required=True)
    p_oracle.add_argument("--t0", type=float, required=True)
    p_oracle.add_argument("--t1", type=float, required=True)
    p_oracle.add_argument("--steps", type=int, default=None)
    p_oracle.add_argument("--dt", type=float, default=None)
    p_oracle.add_argument("--out", required=True)

    p_sym = with_config(sub.add_parser("symmetry", help="apply a symmetry operator"))
    p_sym.add_argument("--op", choices=("ladder+", "ladder-", "displace"), required=True)
    p_sym.add_argument("--alpha", default=None, help="re,im (displace only)")
    p_sym.add_argument("--state", required=True)
    p_sym.add_argument("--t", type=float, required=True)
    p_sym.add_argument("--out", required=True)

    p_qe = with_config(sub.add_parser("quasienergy", help="report one ladder level"))
    p_qe.add_argument("--n", type=int, required=True)

    with_config(sub.add_parser("verify", help="run the invariant battery"))

    return ap


_DISPATCH = {
    "states": cmd_states,
    "evolve": cmd_evolve,
    "oracle": cmd_oracle,
    "symmetry": cmd_symmetry,
    "quasienergy": cmd_quasienergy,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        digest = _config_digest(args.config)
        return _DISPATCH[args.command](cfg, digest, args)
    except CausticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, RegimeError, ResonanceError, StepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except HartreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

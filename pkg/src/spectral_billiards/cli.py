"""Command-line front end: ``spectral-billiards <command> [options]``.

Every output carries a provenance header: a ``#`` comment line for CSV and
a ``header`` object for JSON, holding the tool version, the SHA-256 of the
canonical run configuration and the seed.  Exit codes: 0 success, 2
configuration or usage error, 3 numeric-range error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys

import numpy as np

from . import __version__
from ._rng import batch_rng
from .billiard import BranchPolicy, orbit, orbit_to_csv, orbit_to_json, state_from_uv
from .errors import ConfigError, NumericRangeError, WrongDomain
from .geometry import CircularAnnulus, Disk, PhasePoint, Polygon, RadialLayers, domain_from_dict
from .rotation import (
    Cylinder,
    SphericalCut,
    F_multi_annulus,
    constant_profile,
    f_closed,
    f_numeric,
    model_from_dict,
    near_periodic_phase_measure,
    periodic_levels,
    periodic_measure_1d,
    periodic_measure_bound,
    rotation_profile,
    sample_boundary_states,
)
from .seeley_remainder import ZoneSpec, remainder_integral
from .spectra_oracle import annulus_spectrum, disk_spectrum, rect_spectrum
from .weyl import field_from_json, residual_series, robin_kappa1

TOOL = "spectral-billiards"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


class _Run:
    """Collects the canonical configuration and renders outputs."""

    def __init__(self, args, config: dict):
        self.args = args
        self.config = {"command": args.command, **config}
        blob = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        self.digest = hashlib.sha256(blob.encode()).hexdigest()

    @property
    def seed(self):
        return self.config.get("seed")

    def header_line(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        return f"# tool={TOOL} version={__version__} config={self.digest} seed={seed}"

    def header_obj(self) -> dict:
        return {"tool": TOOL, "version": __version__, "config_sha256": self.digest, "seed": self.seed}

    def csv(self, columns, rows) -> str:
        buf = io.StringIO()
        buf.write(self.header_line() + "\r\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (int, float, np.number)) else v for v in r])
        return buf.getvalue()

    def json(self, payload: dict) -> str:
        doc = {"header": self.header_obj(), "config": self.config, **payload}
        return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"

    def emit(self, text: str, summary: str):
        if self.args.output:
            try:
                with open(self.args.output, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                raise ConfigError(f"cannot write {self.args.output}: {exc}") from exc
            print(summary)
        else:
            sys.stdout.write(text)
            print(summary, file=sys.stderr)


def _domain(args):
    obj = _load_json(args.domain)
    return domain_from_dict(obj), obj


def _require_seed(args):
    if args.seed is None:
        raise ConfigError(f"{args.command} is stochastic and needs --seed")
    return int(args.seed)


# ---------------------------------------------------------------------------
# commands


def cmd_trace(args):
    domain, dobj = _domain(args)
    policy = BranchPolicy(args.policy)
    if args.start is not None:
        if args.angle is None:
            raise ConfigError("--start needs --angle")
        if float(domain.signed_distance(np.asarray(args.start, dtype=float))) <= 0.0:
            raise ConfigError("--start must lie inside the domain")
        z0 = PhasePoint.from_angle(args.start, args.angle)
        seed = args.seed
    else:
        seed = _require_seed(args)
        rng = batch_rng(seed, 0, 0)
        u, phi = sample_boundary_states(domain, rng, 1)
        p = domain.boundary_point(float(u[0]))
        n = domain.boundary_normal(p)
        s0 = state_from_uv(domain, float(u[0]), math.atan2(n[1], n[0]) - float(phi[0]))
        z0 = PhasePoint(s0.p, s0.xi)
    run = _Run(args, {"domain": dobj, "bounces": args.bounces, "policy": policy.value, "seed": seed,
                      "start": list(z0.x), "direction": list(z0.xi), "format": args.format})
    rec = orbit(domain, z0, max_bounces=args.bounces, policy=policy)
    if args.format == "json":
        text = run.json(orbit_to_json(domain, rec))
    else:
        text = orbit_to_csv(domain, rec, header=run.header_line())
    run.emit(text, f"trace: {rec.bounces} bounces, termination={rec.termination.value}, time={rec.total_time:.12g}")


def _model_profile(model):
    if isinstance(model, SphericalCut):
        return model.profile()
    return constant_profile(model.mu, model.alpha, "cylinder" if isinstance(model, Cylinder) else "polar")


def cmd_rotation(args):
    if args.model:
        mobj = _load_json(args.model)
        model = model_from_dict(mobj)
        lo = args.eta_min
        hi = args.eta_max if args.eta_max is not None else model.eta0
        etas = np.linspace(lo, hi, args.points + 2)[1:-1]
        prof = _model_profile(model)
        run = _Run(args, {"model": mobj, "eta_min": lo, "eta_max": hi, "points": args.points, "format": args.format})
        rows = [(float(e), f_closed(model, float(e)), f_numeric(prof, float(e))) for e in etas]
        cols = ("eta", "f_closed", "f_numeric")
    elif args.domain:
        domain, dobj = _domain(args)
        if not isinstance(domain, RadialLayers):
            raise WrongDomain("rotation --domain needs a radial_layers table")
        if not args.n or len(args.n) != domain.n_layers:
            raise ConfigError(f"--n needs {domain.n_layers} segment counts")
        reach = min(c * r for c, r, k in zip(domain.speeds, domain.radii, args.n) if k > 0)
        hi = args.eta_max if args.eta_max is not None else reach
        etas = np.linspace(args.eta_min, hi, args.points + 2)[1:-1]
        run = _Run(args, {"domain": dobj, "n": list(args.n), "eta_min": args.eta_min, "eta_max": hi,
                          "points": args.points, "format": args.format})
        rows = [(float(e), F_multi_annulus(domain, float(e), args.n)) for e in etas]
        cols = ("eta", "F")
    else:
        raise ConfigError("rotation needs --model or --domain")
    if args.format == "json":
        text = run.json({"columns": list(cols), "rows": [list(r) for r in rows]})
    else:
        text = run.csv(cols, rows)
    run.emit(text, f"rotation: {len(rows)} points")


def cmd_periodic(args):
    if args.model:
        mobj = _load_json(args.model)
        model = model_from_dict(mobj)
        eta0 = model.eta0
        prof = rotation_profile(lambda e: f_closed(model, e), eta0 * 1e-9, eta0 * (1 - 1e-9), n=args.grid)
        meas = periodic_measure_1d(prof, args.n, args.eps)
        bound = periodic_measure_bound(prof, args.n, args.eps)
        levels = periodic_levels(args.n, prof.f.min(), prof.f.max())
        run = _Run(args, {"model": mobj, "n": args.n, "eps": args.eps, "grid": args.grid})
        payload = {"measure": meas, "bound": bound, "levels": len(levels)}
        summary = f"periodic: measure={meas:.12g} bound={bound:.12g}"
    elif args.domain:
        domain, dobj = _domain(args)
        seed = _require_seed(args)
        run = _Run(args, {"domain": dobj, "T": args.T, "eps": args.eps, "samples": args.samples, "seed": seed})
        pm = near_periodic_phase_measure(domain, args.T, args.eps, args.samples, seed, threads=args.threads)
        payload = pm._asdict()
        summary = f"periodic: estimate={pm.estimate:.12g} stderr={pm.stderr:.3g}"
    else:
        raise ConfigError("periodic needs --model or --domain")
    if args.format == "csv":
        text = run.csv(tuple(payload), [tuple(payload.values())])
    else:
        text = run.json(payload)
    run.emit(text, summary)


def _spectrum_for(domain, lam_max, bc):
    if isinstance(domain, Disk):
        return disk_spectrum(domain.R, lam_max, bc)
    if isinstance(domain, CircularAnnulus):
        return annulus_spectrum(domain.R, domain.r, lam_max, bc)
    if isinstance(domain, Polygon) and domain.as_rectangle() is not None:
        Lx, Ly = domain.as_rectangle()
        return rect_spectrum(Lx, Ly, lam_max, bc)
    raise WrongDomain("exact spectra exist for disks, circular annuli and rectangles only")


def cmd_weyl(args):
    domain, dobj = _domain(args)
    run = _Run(args, {"domain": dobj, "bc": args.bc, "lmin": args.lmin, "lmax": args.lmax,
                      "points": args.points, "format": args.format})
    spectrum = _spectrum_for(domain, 1.05 * args.lmax + 100.0, args.bc)
    grid = np.linspace(args.lmin, args.lmax, args.points)
    tab = residual_series(domain, spectrum, grid)
    cols = ("lambda", "N", "N_weyl", "R", "R_over_sqrt_lambda", "one_term_residual")
    rows = [(float(a), int(b), float(c), float(d), float(e), float(f)) for a, b, c, d, e, f in zip(*tab)]
    if args.format == "json":
        text = run.json({"columns": list(cols), "rows": [list(r) for r in rows]})
    else:
        text = run.csv(cols, rows)
    run.emit(text, f"weyl: {len(rows)} points, max |R|/sqrt(lambda)={np.abs(tab.Rnorm).max():.6g}")


def cmd_spectrum(args):
    domain, dobj = _domain(args)
    run = _Run(args, {"domain": dobj, "bc": args.bc, "lmax": args.lmax, "format": args.format})
    spectrum = _spectrum_for(domain, args.lmax, args.bc)
    sel = spectrum.values <= args.lmax
    cols = ("lambda", "multiplicity", "m", "k")
    rows = [(float(v), int(mu), int(m), int(k)) for v, mu, m, k in
            zip(spectrum.values[sel], spectrum.multiplicity[sel], spectrum.m[sel], spectrum.k[sel])]
    if args.format == "json":
        text = run.json({"columns": list(cols), "rows": [list(r) for r in rows],
                         "guaranteed_up_to": spectrum.guaranteed_up_to})
    else:
        text = run.csv(cols, rows)
    run.emit(text, f"spectrum: {sum(r[1] for r in rows)} eigenvalues up to {args.lmax:g}")


def cmd_robin(args):
    cfg = _load_json(args.config)
    try:
        a_prime = field_from_json(cfg["a_prime"])
        beta = field_from_json(cfg["beta"])
        tau1, tau2 = float(cfg["tau1"]), float(cfg["tau2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"robin config: {exc}") from exc
    window = tuple(float(v) for v in cfg.get("window", (-1.0, 1.0, -1.0, 1.0)))
    q = field_from_json(cfg["q"]) if "q" in cfg else None
    if q is not None and not callable(q):
        c = q
        q = lambda x, xi: np.full(np.broadcast(np.asarray(x), np.asarray(xi)).shape, c)  # noqa: E731
    run = _Run(args, {"robin": cfg})
    val = robin_kappa1(a_prime, beta, tau1, tau2, window=window, q=q)
    if args.format == "csv":
        text = run.csv(("kappa1",), [(val,)])
    else:
        text = run.json({"kappa1": val})
    run.emit(text, f"robin: kappa1={val:.15g}")


def cmd_remainder(args):
    domain, dobj = _domain(args)
    zobj = _load_json(args.zone)
    zone = ZoneSpec.from_dict(zobj)
    seed = _require_seed(args)
    run = _Run(args, {"domain": dobj, "zone": zone.to_dict(), "samples": args.samples, "seed": seed})
    rep = remainder_integral(domain, zone, args.samples, seed, threads=args.threads)
    if args.format == "csv":
        text = run.csv(("estimate", "stderr", "samples", "seed", "discarded"),
                       [(rep.estimate, rep.stderr, rep.samples, rep.seed, rep.discarded)])
    else:
        text = run.json({"report": rep.to_dict()})
    run.emit(text, f"remainder: estimate={rep.estimate:.12g} stderr={rep.stderr:.3g}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=TOOL, description="Billiards, rotation numbers, Weyl counting and boundary-layer numerics.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, fmt="csv"):
        sp.add_argument("-o", "--output", help="output file (default: standard output)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)
        sp.add_argument("--seed", type=int, help="seed for stochastic parts")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")

    sp = sub.add_parser("trace", help="trace a billiard orbit")
    sp.add_argument("--domain", required=True, help="domain JSON file")
    sp.add_argument("--bounces", type=int, default=100)
    sp.add_argument("--start", type=float, nargs=2, metavar=("X", "Y"), help="start point (else random from --seed)")
    sp.add_argument("--angle", type=float, help="initial direction angle in radians")
    sp.add_argument("--policy", choices=[b.value for b in BranchPolicy], default="refract")
    common(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("rotation", help="rotation functions on an eta grid")
    sp.add_argument("--model", help="closed-form model JSON file")
    sp.add_argument("--domain", help="radial_layers domain JSON file")
    sp.add_argument("--n", type=int, nargs="+", help="segment counts per layer (with --domain)")
    sp.add_argument("--eta-min", type=float, default=0.0)
    sp.add_argument("--eta-max", type=float)
    sp.add_argument("--points", type=int, default=20)
    common(sp)
    sp.set_defaults(func=cmd_rotation)

    sp = sub.add_parser("periodic", help="measure of near-periodic sets")
    sp.add_argument("--model", help="closed-form model JSON file (one-dimensional measure)")
    sp.add_argument("--domain", help="domain JSON file (phase-space Monte Carlo)")
    sp.add_argument("--n", type=int, default=10, help="period (with --model)")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--grid", type=int, default=100001)
    sp.add_argument("--T", type=float, default=10.0, help="time horizon (with --domain)")
    sp.add_argument("--samples", type=int, default=2000)
    common(sp, "json")
    sp.set_defaults(func=cmd_periodic)

    for name, func, help_ in (("weyl", cmd_weyl, "counting residual against the two-term law"),
                              ("spectrum", cmd_spectrum, "exact eigenvalues")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--domain", required=True)
        sp.add_argument("--bc", choices=("dirichlet", "neumann"), default="dirichlet")
        sp.add_argument("--lmax", type=float, required=True)
        if name == "weyl":
            sp.add_argument("--lmin", type=float, default=100.0)
            sp.add_argument("--points", type=int, default=2000)
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("robin", help="Robin boundary-layer coefficient")
    sp.add_argument("--config", required=True, help="JSON with a_prime, beta, tau1, tau2, optional window and q")
    common(sp, "json")
    sp.set_defaults(func=cmd_robin)

    sp = sub.add_parser("remainder", help="Monte-Carlo remainder integral")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--zone", required=True, help="zone JSON file")
    sp.add_argument("--samples", type=int, default=100000)
    common(sp, "json")
    sp.set_defaults(func=cmd_remainder)
    return p


def run(argv=None) -> int:
    """Execute one command and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (ConfigError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericRangeError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ArithmeticError) as exc:
        code = EXIT_NUMERIC if isinstance(exc, ArithmeticError) else EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


def main() -> None:
    sys.exit(run())

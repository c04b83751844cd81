"""``boxctl``: command-line front end writing CSV series and JSON run manifests.

Exit status: 0 on success, 2 for usage errors and invalid inputs, 3 for
numerical failures. Failures print ``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BoxctlError

SCHEMA_VERSION = 1


class UsageError(Exception):
    """Bad command-line input detected after argparse (exit status 2)."""


# -- formatting helpers ---------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits for floats so that CSV values round-trip exactly."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_mode(text: str):
    from .spectrum import Mode

    try:
        return Mode.parse(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse mode {text!r}; expected m,n") from exc


def parse_modes(text: str):
    return [parse_mode(part) for part in text.replace(" ", "").split(";") if part]


def load_schema() -> dict:
    return json.loads(resources.files("boxctl").joinpath("manifest.schema.json").read_text())


class Run:
    """Collects outputs, results and warnings of one subcommand invocation."""

    def __init__(self, command: str, args: argparse.Namespace, argv):
        self.command = command
        self.args = args
        self.argv = list(argv)
        self.config = {k: v for k, v in vars(args).items() if k not in ("func", "command") and not callable(v)}
        self.results: dict = {}
        self.files: list[dict] = []
        self.stdout_parts: list[str] = []

    def emit_csv(self, header, rows, out: str | None):
        text = render_csv(header, rows)
        if out:
            Path(out).write_text(text)
            self.files.append(
                {"path": str(out), "sha256": hashlib.sha256(text.encode()).hexdigest(), "rows": text.count("\n") - 1}
            )
        else:
            self.stdout_parts.append(text)

    def emit_json(self, obj):
        self.stdout_parts.append(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- path loading ---------------------------------------------------------------------


def load_path(source, base: Path | None = None):
    """A :class:`DeformationPath` from a JSON spec (dict or file) or a ``t,f1,f2`` CSV file.

    A JSON spec of ``type`` ``shape`` takes ``side1``/``side2`` as either a
    number (constant side) or a CSV written by ``boxctl synthesize``.
    """
    from .paths import DeformationPath, SideLaw

    if isinstance(source, (str, Path)):
        p = Path(source) if base is None else base / source
        if not p.exists():
            raise UsageError(f"path file {p} does not exist")
        if p.suffix.lower() == ".csv":
            cols = _read_csv_columns(p)
            if not {"t", "f1", "f2"} <= cols.keys():
                raise UsageError(f"{p} must have columns t,f1,f2")
            return DeformationPath.from_spec({"type": "samples", "t": cols["t"], "f1": cols["f1"], "f2": cols["f2"]})
        return load_path(json.loads(p.read_text()), p.parent)
    spec = dict(source)
    if spec.get("type") != "shape":
        try:
            return DeformationPath.from_spec(spec)
        except KeyError as exc:
            raise UsageError(f"path spec is missing field {exc}") from exc
    sides, ends = [], []
    for key in ("side1", "side2"):
        v = spec[key]
        if isinstance(v, (int, float)):
            sides.append(SideLaw.constant(float(v)))
            ends.append(0.0)
        else:
            p = Path(v) if base is None else base / v
            cols = _read_csv_columns(p)
            need = {"t", "f", "f_prime", "f_second"}
            if not need <= cols.keys():
                raise UsageError(f"{p} lacks the derivative columns written by `boxctl synthesize`")
            sides.append(SideLaw.from_derivative_samples(cols["t"], cols["f"], cols["f_prime"], cols["f_second"]))
            ends.append(float(cols["t"][-1]))
    t_end = float(spec.get("t_end", max(ends)))
    if t_end <= 0:
        raise UsageError("shape path needs a positive t_end")
    return DeformationPath(sides[0], sides[1], 0.0, t_end)


def _read_csv_columns(path: Path) -> dict[str, list[float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], float)
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric value ({exc})") from exc
    if data.size == 0:
        raise UsageError(f"{path} has no data rows")
    return {h: data[:, i].tolist() for i, h in enumerate(header)}


# -- subcommands ----------------------------------------------------------------------


def cmd_spectrum(run: Run):
    from .spectrum import Rect, build_index

    a = run.args
    idx = build_index(Rect(a.a, a.b), a.count, tie_tol=a.tie_tol, boundary=a.boundary)
    K = a.count
    run.emit_csv(
        ["rank", "m", "n", "energy"],
        ((r + 1, idx.m[r], idx.n[r], idx.energy[r]) for r in range(K)),
        a.out,
    )
    ties = [list(p) for p in idx.tie_report if p[1] <= K]
    if ties:
        warnings.warn(f"degenerate energies at rank pairs {ties[:10]}", RuntimeWarning)
    run.results = {"entries": K, "cutoff_energy": idx.cutoff_energy, "tie_report": ties}


def cmd_crossings(run: Run):
    from .spectrum import crossing_times

    a = run.args
    path = load_path(a.path)
    modes = parse_modes(a.modes)
    if len(modes) < 2:
        raise UsageError("--modes needs at least two modes, e.g. '2,1;1,2'")
    found = crossing_times(path, modes, a.t0, a.t1, samples=a.samples)
    run.emit_csv(
        ["t", "m1", "n1", "m2", "n2", "energy"],
        ((c.t, c.first.m, c.first.n, c.second.m, c.second.n, c.energy) for c in found),
        a.out,
    )
    run.results = {"crossings": len(found), "times": [c.t for c in found]}


def _sigma_table(args, K_labels: int):
    from .permutation import build_sigma

    return build_sigma(args.a, args.atilde, K_labels, b=args.b, boundary=args.boundary, rank_base=args.rank_base)


def cmd_sigma(run: Run):
    a = run.args
    t = _sigma_table(a, a.K)
    run.emit_csv(["k", "m", "n", "sigma_k"], zip(t.labels, t.m, t.n, t.sigma), a.out)
    run.results = {"K": t.K, "valid_to": t.valid_to, "rank_base": t.rank_base, "boundary": t.boundary}


def load_sigma_csv(path: str, rank_base: int):
    from .permutation import SigmaTable

    cols = _read_csv_columns(Path(path))
    if not {"k", "m", "n", "sigma_k"} <= cols.keys():
        raise UsageError(f"{path} must have columns k,m,n,sigma_k")
    k = np.asarray(cols["k"], np.int64)
    base = int(k[0])
    if np.any(k != np.arange(base, base + len(k))):
        raise UsageError(f"{path}: labels must be consecutive")
    return SigmaTable(
        a=float("nan"), a_tilde=float("nan"), b=float("nan"), K=len(k),
        sigma=np.asarray(cols["sigma_k"], np.int64), m=np.asarray(cols["m"], np.int64),
        n=np.asarray(cols["n"], np.int64), boundary="table", rank_base=base,
    )


def _table_from_args(a, need_label: int):
    if a.table:
        return load_sigma_csv(a.table, a.rank_base)
    if a.a is None or a.atilde is None:
        raise UsageError("give either --table or both --a and --atilde")
    from .permutation import table_size_for

    K = a.K if a.K is not None else table_size_for(need_label, a.rank_base)
    return _sigma_table(a, K)


def cmd_orbit(run: Run):
    from .permutation import iterate_orbit

    a = run.args
    table = _table_from_args(a, max(a.start, 370800))
    rec = iterate_orbit(table, a.start, a.steps)
    run.emit_csv(
        ["j", "rank", "log10rank"],
        ((j, r, math.log10(r) if r > 0 else float("-inf")) for j, r in enumerate(rec.trajectory)),
        a.out,
    )
    run.results = {
        "start": a.start,
        "status": rec.status,
        "period": rec.period,
        "cycle": rec.trajectory if rec.status == "periodic" else None,
        "growth_rate": None if math.isnan(rec.growth_rate()) else rec.growth_rate(),
        "valid_to": table.valid_to,
    }


def cmd_entropy(run: Run):
    from .permutation import entropy_closed_form, entropy_integral, mean_entropy_increase, table_size_for

    a = run.args
    if a.table:
        table = load_sigma_csv(a.table, a.rank_base)
        if a.a is None or a.atilde is None:
            raise UsageError("--a and --atilde are needed for the integral prediction")
    else:
        if a.a is None or a.atilde is None:
            raise UsageError("give --a and --atilde (optionally with --table)")
        table = _sigma_table(a, table_size_for(a.K, a.rank_base))
    value = mean_entropy_increase(table, a.K)
    out = {
        "K": a.K,
        "delta_E": value,
        "integral": entropy_integral(a.a, a.atilde),
        "closed_form": entropy_closed_form(a.a, a.atilde),
        "boundary": a.boundary,
        "rank_base": a.rank_base,
    }
    run.emit_json(out)
    run.results = out


def _mode_list(spec):
    from .spectrum import Mode

    return [Mode(int(m[0]), int(m[1])) for m in spec]


def cmd_evolve(run: Run):
    from .evolution import SymmetryBreaker, WaveState, propagate
    from .evolution.basis import _bump

    a = run.args
    cfg_path = Path(a.config)
    if not cfg_path.exists():
        raise UsageError(f"config file {cfg_path} does not exist")
    cfg = json.loads(cfg_path.read_text())
    run.config["run"] = cfg
    path = load_path(cfg["path"], cfg_path.parent) if "path" in cfg else None
    if path is None:
        raise UsageError("config needs a 'path' entry")
    n1, n2 = int(cfg.get("n1", 24)), int(cfg.get("n2", 24))
    init = cfg.get("initial", [2, 1])
    if isinstance(init, dict):
        c = np.zeros((n1, n2), complex)
        for (m, n), amp in zip(init["modes"], init["amplitudes"]):
            c[m - 1, n - 1] = complex(*amp) if isinstance(amp, list) else complex(amp)
        state = WaveState(c / np.linalg.norm(c))
    else:
        state = WaveState.from_mode(n1, n2, tuple(init))
    track = _mode_list(cfg.get("track", [init] if not isinstance(init, dict) else init["modes"]))

    breaker = None
    bcfg = cfg.get("breaker")
    seed = a.seed if a.seed is not None else int((bcfg or {}).get("seed", 0))
    if bcfg:
        env = _bump(path.t_start, path.t_end) if bcfg.get("envelope", "bump") == "bump" else None
        breaker = SymmetryBreaker(n1, n2, strength=float(bcfg["strength"]), seed=seed, envelope=env)
    dt = float(cfg.get("dt", 0.005))
    every = max(1, int(round(float(cfg.get("record_every", 0.1)) / dt)))
    rows = []

    def monitor(t, st):
        rows.append([t, st.norm(), *(st.population(m) for m in track)])

    final = propagate(state, path, dt, breaker, method=cfg.get("method", "split4"), monitor=monitor, monitor_every=every)
    header = ["t", "norm"] + [f"pop_{m.m}_{m.n}" for m in track]
    run.emit_csv(header, rows, a.out or cfg.get("out"))
    run.results = {
        "populations": {f"{m.m},{m.n}": final.population(m) for m in track},
        "phases": {f"{m.m},{m.n}": float(np.angle(final.amplitude(m))) for m in track},
        "norm_drift": abs(final.norm() - state.norm()),
        "seed": seed,
    }


def _pump_rows(res, threshold=1e-12):
    P = res.populations
    for (i, j) in zip(*np.nonzero(P > threshold)):
        yield (i + 1, j + 1, P[i, j])


def cmd_pump(run: Run):
    from .evolution import run_pumping

    a = run.args
    res = run_pumping(
        a.a, a.aprime, a.b, parse_mode(a.start), a.speed, a.strength,
        breaker_return=not a.breaker_off, n1=a.n, n2=a.n, dt=a.dt, seed=a.seed,
    )
    run.emit_csv(["m", "n", "population"], _pump_rows(res), a.out)
    run.results = {
        "start": list(res.start),
        "partner": list(res.partner),
        "population_start": res.population(res.start),
        "population_partner": res.population(res.partner),
        "breaker_strength": res.breaker_strength,
        "duration": res.duration,
        "crossings": [c.t for c in res.crossings],
        "norm_drift": res.norm_drift,
        "seed": a.seed,
    }


def cmd_split(run: Run):
    from .evolution import find_split_speed

    a = run.args
    res = find_split_speed(
        a.a, a.aprime, a.b, parse_mode(a.start), a.alpha, a.tol,
        speed=a.speed, breaker_strength=a.strength, n1=a.n, n2=a.n, dt=a.dt, seed=a.seed,
    )
    if res.result is not None:
        run.emit_csv(["m", "n", "population"], _pump_rows(res.result), a.out)
    run.results = {
        "s": res.s,
        "target_population": res.target,
        "population_partner": res.population_partner,
        "population_start": res.population_start,
        "iterations": res.iterations,
        "seed": a.seed,
    }


def cmd_synthesize(run: Run):
    from .control import ControlProfile, synthesize_shape

    a = run.args
    cols = _read_csv_columns(Path(a.V))
    if not {"tau", "V"} <= cols.keys():
        raise UsageError(f"{a.V} must have columns tau,V")
    profile = ControlProfile.from_samples(cols["tau"], cols["V"], a.U0, a.law)
    shape = synthesize_shape(profile, a.a, samples=a.samples)
    fp = [shape.velocity(t) for t in shape.t_grid]
    fpp = [shape.acceleration(t) for t in shape.t_grid]
    run.emit_csv(
        ["t", "tau", "tau_prime", "f", "f_prime", "f_second"],
        zip(shape.t_grid, shape.tau, shape.tau_prime, shape.f, fp, fpp),
        a.out,
    )
    run.results = {"T": shape.T, "U0": shape.U.U0, "U_sup": shape.U.sup, "U_min": shape.U.min, "law": a.law}


def cmd_sah2(run: Run):
    from .sah2 import verify_table

    a = run.args
    rep = verify_table(parse_mode(a.k), parse_mode(a.l), a.b)
    out = rep.to_dict()
    run.emit_json(out)
    run.results = {"a": rep.a, "rank": rep.rank, "rel1_holds": rep.rel1_holds, "mismatches": rep.mismatches}


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boxctl", description="Spectra, protocols and permutations of moving rectangles.")
    p.add_argument("--version", action="version", version=f"boxctl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        if out:
            sp.add_argument("--out", help="CSV output file (default: stdout)")
        sp.add_argument("--manifest", help="manifest file (default: <out>.manifest.json, else stderr)")

    sp = sub.add_parser("spectrum", help="energy-ordered modes of a rectangle")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--tie-tol", type=float, default=1e-12)
    sp.add_argument("--boundary", choices=["dirichlet", "neumann"], default="dirichlet")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("crossings", help="eigenvalue crossings along a deformation path")
    sp.add_argument("--path", required=True, help="JSON path spec or CSV with t,f1,f2")
    sp.add_argument("--modes", required=True, help="semicolon-separated modes, e.g. '2,1;1,2'")
    sp.add_argument("--t0", type=float)
    sp.add_argument("--t1", type=float)
    sp.add_argument("--samples", type=int, default=1024)
    common(sp)
    sp.set_defaults(func=cmd_crossings)

    def lattice(sp):
        sp.add_argument("--b", type=float, default=1.0)
        sp.add_argument("--boundary", choices=["dirichlet", "neumann"], default="neumann")
        sp.add_argument("--rank-base", type=int, choices=[0, 1], default=0)

    sp = sub.add_parser("sigma", help="tabulate the pumping permutation")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--atilde", type=float, required=True)
    sp.add_argument("--K", type=int, required=True)
    lattice(sp)
    common(sp)
    sp.set_defaults(func=cmd_sigma)

    sp = sub.add_parser("orbit", help="iterate the permutation from one label")
    sp.add_argument("--table")
    sp.add_argument("--a", type=float)
    sp.add_argument("--atilde", type=float)
    sp.add_argument("--K", type=int, help="table size when building from --a/--atilde (default 370801)")
    sp.add_argument("--start", type=int, required=True)
    sp.add_argument("--steps", type=int, default=100)
    lattice(sp)
    common(sp)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("entropy", help="mean entropy increase and its prediction")
    sp.add_argument("--table")
    sp.add_argument("--a", type=float)
    sp.add_argument("--atilde", type=float)
    sp.add_argument("--K", type=int, required=True)
    lattice(sp)
    common(sp, out=False)
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("evolve", help="propagate a state along a configured path")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_evolve)

    def protocol(sp):
        sp.add_argument("--a", type=float, default=1.2)
        sp.add_argument("--aprime", type=float, default=0.8)
        sp.add_argument("--b", type=float, default=1.0)
        sp.add_argument("--start", default="2,1")
        sp.add_argument("--strength", type=float, help="breaker strength (default: calibrated fraction of the gap)")
        sp.add_argument("--n", type=int, default=24, help="basis size per axis")
        sp.add_argument("--dt", type=float, default=0.005)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("pump", help="two-phase eigenstate pumping")
    protocol(sp)
    sp.add_argument("--speed", type=float, default=0.02)
    sp.add_argument("--breaker-off", action="store_true", help="disable the breaker on the way back")
    common(sp)
    sp.set_defaults(func=cmd_pump)

    sp = sub.add_parser("split", help="bisect the breaker scale for a population split")
    protocol(sp)
    sp.add_argument("--speed", type=float, default=0.04)
    sp.add_argument("--alpha", type=float, default=1 / math.sqrt(2))
    sp.add_argument("--tol", type=float, default=0.05)
    common(sp)
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("synthesize", help="side-length law realizing a control V(tau)")
    sp.add_argument("--V", required=True, help="CSV with columns tau,V")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--U0", type=float)
    sp.add_argument("--law", choices=["riccati", "linear"], default="riccati")
    sp.add_argument("--samples", type=int, default=2001)
    common(sp)
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("sah2", help="boundary functionals at a double eigenvalue")
    sp.add_argument("--k", required=True)
    sp.add_argument("--l", required=True)
    sp.add_argument("--b", type=float, default=1.0)
    common(sp, out=False)
    sp.set_defaults(func=cmd_sah2)
    return p


def _manifest(run: Run, status: str, wall: float, caught, error=None) -> dict:
    m = {
        "schema": "boxctl-manifest",
        "schema_version": SCHEMA_VERSION,
        "command": run.command,
        "argv": run.argv,
        "config": json.loads(json.dumps(run.config, default=str)),
        "version": __version__,
        "wall_time": wall,
        "status": status,
        "results": json.loads(json.dumps(run.results, default=_json_default)),
        "warnings": [str(w.message) for w in caught],
        "files": run.files,
    }
    if error is not None:
        m["error"] = error
    return m


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _write_manifest(run: Run, manifest: dict):
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    target = getattr(run.args, "manifest", None)
    out = getattr(run.args, "out", None)
    if target is None and out:
        target = f"{out}.manifest.json"
    if target:
        Path(target).write_text(text)
    else:
        sys.stderr.write(text)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = Run(args.command, args, argv)
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args.func(run)
        except (UsageError, ValueError, KeyError, FileNotFoundError) as exc:
            if isinstance(exc, BoxctlError):
                return _fail(run, t0, caught, exc, 3)
            payload = {"error": "UsageError" if isinstance(exc, UsageError) else type(exc).__name__, "message": str(exc)}
            return _fail(run, t0, caught, payload, 2)
        except BoxctlError as exc:
            return _fail(run, t0, caught, exc, 3)
    sys.stdout.write("".join(run.stdout_parts))
    _write_manifest(run, _manifest(run, "ok", time.perf_counter() - t0, caught))
    return 0


def _fail(run, t0, caught, exc, code):
    payload = exc.payload() if isinstance(exc, BoxctlError) else exc
    sys.stderr.write(json.dumps(payload) + "\n")
    _write_manifest(run, _manifest(run, "error", time.perf_counter() - t0, caught, payload))
    return code


if __name__ == "__main__":
    sys.exit(main())

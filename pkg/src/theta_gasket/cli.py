"""Command-line front end: ``theta-gasket COMMAND [key=value ...] [flags]``.

Commands are eval, nome, coeffs, verify, simulate and asymptotics. Parameters
come from ``--config`` (key=value lines, ``#`` comments) and then from the
command line, which wins. Output is CSV with ``#`` header lines echoing the
resolved configuration, or JSON with the same content. Columns are listed in
the shipped ``schema.json``.

Exit codes: 0 success, 1 usage error, 2 numerical non-convergence, 3 a
``verify`` check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

from .special import ConvergenceError, DomainError

EXIT_USAGE = 1
EXIT_CONVERGENCE = 2
EXIT_VERIFY = 3

SEED_ENV = "THETA_GASKET_SEED"


class UsageError(Exception):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("theta_gasket").joinpath("schema.json").read_text("utf-8"))


# --- parameter parsing ------------------------------------------------------------


def parse_pairs(items, source: str) -> dict:
    out = {}
    for item in items:
        item = item.strip()
        if not item or item.startswith("#"):
            continue
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{source}: expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_pairs(fh.read().splitlines(), path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None


def _num(key: str, text: str, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def _list(params: dict, key: str, kind=float, required: bool = False):
    if key not in params:
        if required:
            raise UsageError(f"missing required key {key!r}")
        return None
    return [_num(key, part.strip(), kind) for part in params[key].split(",") if part.strip()]


def _one(params: dict, key: str, kind=float, default=None, required: bool = False):
    vals = _list(params, key, kind, required)
    if vals is None:
        return default
    if len(vals) != 1:
        raise UsageError(f"{key} takes a single value")
    return vals[0]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


# --- commands ---------------------------------------------------------------------


def cmd_eval(params: dict, seed: int, threads: int) -> tuple[list, int]:
    from .correlators import Family, evaluate
    from .geometry import MarkedDomain

    try:
        family = Family(params["family"])
    except KeyError:
        raise UsageError("missing required key 'family'") from None
    except ValueError:
        raise UsageError(f"unknown family {params['family']!r}") from None
    domains = []
    given = [k for k in ("q", "green", "r", "z1") if k in params]
    if len(given) != 1:
        raise UsageError("give exactly one of q, green, r or z1/z2")
    if "q" in params:
        domains = [MarkedDomain.from_q(q) for q in _list(params, "q")]
    elif "green" in params:
        domains = [MarkedDomain.from_green(g) for g in _list(params, "green")]
    elif "r" in params:
        domains = [MarkedDomain.canonical(r) for r in _list(params, "r")]
    else:
        if "z2" not in params:
            raise UsageError("z1 needs z2")
        domains = [MarkedDomain(_one(params, "z1", complex), _one(params, "z2", complex))]
    extra = {}
    for key, kind in (("v", float), ("g", float), ("m", int)):
        if key in params:
            extra[key] = _one(params, key, kind)
    rows = []
    for md in domains:
        val = evaluate(family, md, **extra)
        rows.append([family.value, md.nome.q, md.green, val.cr_prefactor, val.theta_factor, val.value])
    return rows, 0


def cmd_nome(params: dict, seed: int, threads: int) -> tuple[list, int]:
    from .geometry import MarkedDomain
    from .special import nome_from_k

    given = [k for k in ("g", "q", "k") if k in params]
    if len(given) != 1:
        raise UsageError("give exactly one of g, q or k")
    rows = []
    if "g" in params:
        mds = [MarkedDomain.from_green(g) for g in _list(params, "g")]
    elif "q" in params:
        mds = [MarkedDomain.from_q(q) for q in _list(params, "q")]
    else:
        mds = []
        for k in _list(params, "k"):
            mds.append(MarkedDomain.from_q(nome_from_k(k).q))
    for md in mds:
        n = md.nome
        rows.append([md.green, n.q, n.q_hat, md.r_canonical, n.k, n.k_prime])
    return rows, 0


def cmd_coeffs(params: dict, seed: int, threads: int) -> tuple[list, int]:
    from .walks import coefficients

    n_max = _one(params, "n_max", int, default=10)
    rows = []
    for m in _list(params, "m", int, required=True):
        tab = coefficients(m, n_max)
        rows += [[m, n, tab[n]] for n in range(-n_max, n_max + 1)]
    return rows, 0


def cmd_verify(params: dict, seed: int, threads: int) -> tuple[list, int]:
    from .suites import run_suite

    suite = params.get("suite")
    if suite is None:
        raise UsageError("missing required key 'suite'")
    samples = _one(params, "samples", int, default=20_000)
    try:
        checks = run_suite(suite, samples=samples, seed=seed, threads=threads)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(str(exc)) from None
    rows = [[c.suite, c.check, c.param, c.error, c.tol, c.passed] for c in checks]
    return rows, 0 if all(c.passed for c in checks) else EXIT_VERIFY


def _points(params: dict, key: str) -> list:
    pts = _list(params, key, complex)
    if not pts:
        raise UsageError(f"missing required key {key!r}")
    return pts


def cmd_simulate(params: dict, seed: int, threads: int) -> tuple[list, int]:
    from . import soup

    event = params.get("event")
    events = ("identity", "disconnection", "holes_disconnection", "one_point_surround")
    if event not in events:
        raise UsageError(f"event must be one of {', '.join(events)}")
    mesh = _one(params, "mesh", int, required=True)
    samples = _one(params, "samples", int, required=True)
    if samples < 1:
        raise UsageError("samples must be positive")
    vs = _list(params, "v") or [0.0]
    rows = []
    if event == "one_point_surround":
        point = _one(params, "point", complex, default=0j)
        radii = _list(params, "r", required=True)
        model = soup.build_disk_lattice(mesh)
        for v in vs:
            reps = soup.estimate_ladder(model, event, {"point": (point.real, point.imag), "v": v}, radii,
                                        samples, seed, threads)
            rows += [[event, mesh, v, r, rep.n_samples, seed, rep.p_hat, rep.std_err, None, None]
                     for r, rep in zip(radii, reps)]
        return rows, 0
    pts = _points(params, "punctures")
    if event == "identity":
        model = soup.build_disk_lattice(mesh)
        defects = soup.defects_from_punctures(model, pts)
        for v in vs:
            rep = soup.verify_topological_identity(model, defects, v, samples, seed, threads)
            rows.append([event, mesh, v, None, rep.n_samples, seed, rep.p_hat, rep.std_err,
                         rep.exact_target, rep.z_score])
        return rows, 0
    eps = _list(params, "eps", required=True)
    if len(eps) != len(pts):
        raise UsageError("eps needs one radius per puncture")
    plist = [(z.real, z.imag) for z in pts]
    if event == "holes_disconnection":
        model = soup.build_disk_lattice(mesh, holes=list(zip(plist, eps)))
        defects = soup.defects_from_punctures(model, pts, snap=False)
    else:
        model = soup.build_disk_lattice(mesh)
    for v in vs:
        rep = soup.estimate_event(model, event, {"points": plist, "eps": eps, "v": v}, samples, seed, threads)
        target = z = None
        if event == "holes_disconnection":
            target = soup.exact_no_odd_probability(model, defects, v)
            z = (rep.p_hat - target) / rep.std_err if rep.std_err > 0 else 0.0
        rows.append([event, mesh, v, None, rep.n_samples, seed, rep.p_hat, rep.std_err, target, z])
    return rows, 0


def cmd_asymptotics(params: dict, seed: int, threads: int) -> tuple[list, int]:
    from . import kernels

    kind = params.get("kind")
    grid = _list(params, "grid")
    rows = []
    if kind == "strip":
        rep = kernels.strip_asymptotics(grid)
        rows = [[kind, d, v, r] for d, v, r in zip(rep.delta_grid, rep.values, rep.residuals)]
    elif kind == "annulus":
        for e in grid or [10.0 ** -k for k in (2, 4, 6, 8, 10, 12)]:
            val = kernels.annulus_mass(e)
            rows.append([kind, e, val, val - kernels.annulus_expansion(e)])
    elif kind == "wallis":
        for n in grid or [10.0 ** k for k in range(1, 7)]:
            if n != int(n) or n < 0:
                raise UsageError("wallis grid entries must be non-negative integers")
            val = kernels.wallis_partial_sum(int(n))
            rows.append([kind, int(n), val, val - math.log(math.pi / 2)])
    else:
        raise UsageError("kind must be strip, annulus or wallis")
    return rows, 0


COMMANDS = {
    "eval": cmd_eval,
    "nome": cmd_nome,
    "coeffs": cmd_coeffs,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "asymptotics": cmd_asymptotics,
}


# --- output -----------------------------------------------------------------------


def render(fmt: str, config: dict, columns: list, rows: list) -> str:
    if fmt == "json":
        doc = {
            "config": config,
            "columns": columns,
            "rows": [{c: _fmt(x) for c, x in zip(columns, row)} for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in config.items():
        buf.write(f"# {key}={value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="theta-gasket", description="Theta-function correlators, walk identities and loop-soup Monte Carlo.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("params", nargs="*", help="key=value parameters")
    p.add_argument("--config", help="file of key=value lines")
    p.add_argument("--seed", type=int, help=f"base seed (default: ${SEED_ENV}, then the config, then 0)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo")
    return p


def resolve(args) -> tuple[dict, int]:
    schema = load_schema()["commands"][args.command]
    params = read_config(args.config) if args.config else {}
    params.update(parse_pairs(args.params, "command line"))
    allowed = set(schema["keys"]) | {"seed"}
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise UsageError(f"unknown key(s) for {args.command}: {', '.join(unknown)}")
    if args.seed is not None:
        seed = args.seed
    elif "seed" in params:
        seed = _num("seed", params["seed"], int)
    elif os.environ.get(SEED_ENV):
        seed = _num(SEED_ENV, os.environ[SEED_ENV], int)
    else:
        seed = 0
    params.pop("seed", None)
    if seed < 0:
        raise UsageError("seed must be non-negative")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    return params, seed


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_intermixed_args(argv)
        params, seed = resolve(args)
        rows, status = COMMANDS[args.command](params, seed, args.threads)
        # thread count is left out so that output does not depend on it
        config = {"command": args.command, **dict(sorted(params.items())), "seed": str(seed)}
        columns = list(load_schema()["commands"][args.command]["columns"])
        text = render(args.format, config, columns, rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            if args.command == "simulate" and args.format == "csv":
                # the simulation report also goes out as JSON next to the table
                with open(args.out + ".json", "w", encoding="utf-8", newline="") as fh:
                    fh.write(render("json", config, columns, rows))
        else:
            stdout.write(text)
        return status
    except UsageError as exc:
        print(f"theta-gasket: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"theta-gasket: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DomainError, ValueError) as exc:
        print(f"theta-gasket: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

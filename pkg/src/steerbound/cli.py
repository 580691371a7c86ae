"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 input error, 3 capacity error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .bases import dump_basis_set, epsilon_of_overlap, generate_mub_prime, load_basis_set, overlap_summary, perturb_bases
from .errors import CapacityError, InvalidInputError
from .models import (
    DEFAULT_N_MAX,
    MultiSingletParams,
    multisinglet_threshold_eta,
    multisinglet_violation,
    photonic_scan,
)
from .parallel import WORKERS_ENV
from .steering import DEFAULT_ENUMERATION_LIMIT, DEFAULT_TOEPLITZ_TOL, compute_bounds

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3

MULTISINGLET_COLUMNS = ["k", "eta", "fidelity", "epsilon", "sigma", "v_q_eta"]
THRESHOLD_COLUMNS = ["k", "fidelity", "epsilon", "sigma", "eta_min"]
PHOTONIC_COLUMNS = ["d", "n_opt", "theta", "v_q", "eta", "v_q_eta"]
BAND_COLUMNS = ["d", "n", "theta", "v_q"]


@dataclass
class RunConfig:
    command: str
    output: Optional[Path] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    options: dict = field(default_factory=dict)


def _tidy(x: float) -> float:
    return float(f"{x:.12g}")


def parse_grid(text: str, name: str, lo: float, hi: float, lo_open: bool = False, hi_open: bool = False) -> List[float]:
    """Parse a scalar, a comma list, or an inclusive ``start:stop:step`` grid.

    The stop value is included when the last step lands within half a step
    of it. A grid endpoint sitting exactly on an excluded (open) end of the
    domain is dropped; any other out-of-range value is an input error.
    """
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if not step > 0 or stop < start:
                raise InvalidInputError(f"--{name}: grid needs start <= stop and step > 0, got {text!r}")
            count = math.floor((stop - start) / step + 0.5)
            values = [_tidy(start + i * step) for i in range(count + 1)]
            is_grid = True
        else:
            values = [float(t) for t in text.split(",")]
            is_grid = len(values) > 1
    except ValueError as exc:
        raise InvalidInputError(f"--{name}: cannot parse {text!r}") from exc

    def inside(v: float) -> bool:
        return (lo < v if lo_open else lo <= v) and (v < hi if hi_open else v <= hi)

    if is_grid:
        edges = {lo} if lo_open else set()
        edges |= {hi} if hi_open else set()
        values = [v for v in values if not (v in edges and v in (values[0], values[-1]))]
    bad = [v for v in values if not inside(v)]
    if bad or not values:
        lb, rb = "(" if lo_open else "[", ")" if hi_open else "]"
        raise InvalidInputError(f"--{name}: value {bad[0] if bad else text} outside {lb}{lo}, {hi}{rb}")
    return sorted(set(values))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def write_csv(rows: Sequence[Sequence], columns: Sequence[str], path: Optional[Path]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _emit(buf.getvalue(), path)


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_state(path: Path) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
        raw = np.asarray(data["entries"], dtype=float)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: malformed state document: {exc}") from exc
    if raw.ndim != 3 or raw.shape[-1] != 2:
        raise InvalidInputError(f"{path}: entries must be a square array of [re, im] pairs")
    return raw[..., 0] + 1j * raw[..., 1]


def cmd_bounds(cfg: RunConfig) -> int:
    opts = cfg.options
    bob = load_basis_set(opts["basis"])
    rho = _load_state(opts["rho"]) if opts.get("rho") else None
    alice = load_basis_set(opts["alice"]) if opts.get("alice") else None
    result = compute_bounds(
        bob,
        rho=rho,
        alice_bases=alice,
        exact_lhs=opts["exact_lhs"],
        limit=opts["limit"],
        toeplitz_tol=opts["toeplitz_tol"],
        workers=cfg.workers,
    )
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", cfg.output)
    return EXIT_OK


def cmd_mub(cfg: RunConfig) -> int:
    opts = cfg.options
    b = generate_mub_prime(opts["dim"])
    if opts["perturb"]:
        b = perturb_bases(b, opts["perturb"], cfg.seed if cfg.seed is not None else 0)
    dump_basis_set(b, cfg.output)
    c_max = overlap_summary(b).c_max
    eps = epsilon_of_overlap(c_max, b.dim)
    print(f"settings={b.settings} dim={b.dim} c_max={c_max:.12g} epsilon={eps:.12g}")
    return EXIT_OK


def cmd_multisinglet(cfg: RunConfig) -> int:
    opts = cfg.options
    k_max = opts["k_max"]
    if k_max < 1:
        raise InvalidInputError(f"--k-max must be at least 1, got {k_max}")
    etas = parse_grid(opts["eta"], "eta", 0.0, 1.0, lo_open=True)
    fids = parse_grid(opts["fidelity"], "fidelity", 0.0, 1.0, lo_open=True)
    epss = parse_grid(opts["epsilon"], "epsilon", 0.0, 1.0, hi_open=True)
    sigmas = parse_grid(opts["sigma"], "sigma", 0.0, 1.0, hi_open=True)
    ks = range(1, k_max + 1)
    if opts["thresholds"]:
        rows = [
            (k, f, e, s, multisinglet_threshold_eta(k, f, e, s))
            for k in ks for e in epss for f in fids for s in sigmas
        ]
        write_csv(rows, THRESHOLD_COLUMNS, cfg.output)
        return EXIT_OK
    rows = []
    for k in ks:
        for eta in etas:
            for eps in epss:
                for f in fids:
                    for s in sigmas:
                        v = multisinglet_violation(MultiSingletParams(k, eta, f, eps, s))
                        rows.append((k, eta, f, eps, s, v))
    write_csv(rows, MULTISINGLET_COLUMNS, cfg.output)
    return EXIT_OK


def cmd_photonic(cfg: RunConfig) -> int:
    opts = cfg.options
    d_min, d_max, n_max = opts["d_min"], opts["d_max"], opts["n_max"]
    if d_min < 1 or d_max < d_min:
        raise InvalidInputError(f"need 1 <= --d-min <= --d-max, got {d_min}, {d_max}")
    if n_max < 2:
        raise InvalidInputError(f"--n-max must be at least 2, got {n_max}")
    etas = parse_grid(opts["eta"], "eta", 0.0, 1.0, lo_open=True)
    rows, curves = photonic_scan(range(d_min, d_max + 1), etas, n_max, cfg.workers)
    write_csv([(r.d, r.n_opt, r.theta, r.v_q, r.eta, r.v_q_eta) for r in rows], PHOTONIC_COLUMNS, cfg.output)
    if opts.get("emit_all_n"):
        band = [
            (d, n, math.pi / (2 * n), v)
            for d, curve in curves.items()
            for n, v in zip(range(2, n_max + 1), curve)
        ]
        write_csv(band, BAND_COLUMNS, Path(opts["emit_all_n"]))
    return EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "mub": cmd_mub,
    "multisinglet": cmd_multisinglet,
    "photonic": cmd_photonic,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steerbound",
        description="Steering-inequality bounds tolerant to measurement-setting errors.",
        epilog=f"Worker count defaults to ${WORKERS_ENV} (or 1 when unset).",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=False):
        p.add_argument("-o", "--output", type=Path, required=output_required,
                       help="output file" + ("" if output_required else " (default: stdout)"))
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${WORKERS_ENV} or 1)")

    p = sub.add_parser("bounds", help="LHS bounds for a basis-set JSON file")
    p.add_argument("basis", type=Path, help="BasisSet JSON file (Bob's bases)")
    p.add_argument("--exact-lhs", action="store_true", help="also enumerate the exact LHS value")
    p.add_argument("--limit", type=int, default=DEFAULT_ENUMERATION_LIMIT,
                   help="cap on d^N strategies for --exact-lhs (default: %(default)s)")
    p.add_argument("--toeplitz-tol", type=float, default=DEFAULT_TOEPLITZ_TOL,
                   help="block-Toeplitz tolerance (default: %(default)s)")
    p.add_argument("--rho", type=Path, help='state JSON {"entries": [[[re, im], ...], ...]}; default: ideal value N')
    p.add_argument("--alice", type=Path, help="Alice's BasisSet JSON (default: conjugate of Bob's)")
    common(p)

    p = sub.add_parser("mub", help="write a prime-dimension MUB set, optionally perturbed")
    p.add_argument("--dim", type=int, required=True, help="prime dimension")
    p.add_argument("--perturb", type=float, default=0.0, help="rotation strength delta in [0, 1] (default: 0)")
    p.add_argument("--seed", type=int, default=0, help="perturbation seed (default: %(default)s)")
    common(p, output_required=True)

    p = sub.add_parser("multisinglet", help="k-copy singlet violation grid (CSV)")
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--eta", default="0.95", help="efficiency: scalar, list or start:stop:step (default: %(default)s)")
    p.add_argument("--fidelity", default="0.98", help="singlet fidelity (default: %(default)s)")
    p.add_argument("--epsilon", default="0", help="MUB relaxation, must be < 1 (default: %(default)s)")
    p.add_argument("--sigma", default="0", help="settings exponent, must be < 1 (default: %(default)s)")
    p.add_argument("--thresholds", action="store_true", help="emit the eta threshold per k instead")
    common(p)

    p = sub.add_parser("photonic", help="optimal-settings scan for the photonic singlet (CSV)")
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--d-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="largest settings count (default: %(default)s)")
    p.add_argument("--eta", default="1", help="efficiency: scalar, list or start:stop:step (default: %(default)s)")
    p.add_argument("--emit-all-n", metavar="PATH", help="also write V_Q for every scanned N to PATH")
    common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "output", "seed", "workers")}
    cfg = RunConfig(
        command=args.command,
        output=args.output,
        seed=getattr(args, "seed", None),
        workers=args.workers,
        options=opts,
    )
    try:
        return COMMANDS[cfg.command](cfg)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point and verification-workload estimation.

Subcommands: gen, amplitude, verify, path, estimate-workload, bench.  Every
subcommand is deterministic given its flags and seed; all output records are
UTF-8 JSON lines and failures exit nonzero with a machine-parsable error
line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import (
    Circuit,
    CircuitFormatError,
    CircuitGraph,
    generate_lattice,
    generate_rqc,
    parse_circuit,
    serialize_circuit,
)
from .network import CutPlanError, compute_amplitude
from .oracle import amplitude_oracle
from .pathfind import PathSearchError

__all__ = ["ErrorModel", "WorkloadEstimate", "estimate_workload", "main"]

# Sycamore-like lattice sizes from the bundled layouts
SYCAMORE_SIZES = {54: (9, 6), 60: (10, 6), 66: (11, 6), 72: (12, 6), 104: (13, 8)}

# error rates of the 53-qubit Sycamore processor
SYCAMORE_E1 = 0.0016
SYCAMORE_E2 = 0.0062
SYCAMORE_EQ = 0.038


class WorkloadError(ValueError):
    """Raised when the fidelity underflows double precision."""

    def __init__(self, message: str, log_fidelity: float):
        super().__init__(message)
        self.log_fidelity = log_fidelity


@dataclass(frozen=True)
class ErrorModel:
    """Per-gate and readout error probabilities."""

    e1: float = SYCAMORE_E1
    e2: float = SYCAMORE_E2
    eq: float = SYCAMORE_EQ

    def __post_init__(self) -> None:
        for name, r in (("e1", self.e1), ("e2", self.e2), ("eq", self.eq)):
            if not 0 <= r < 1:
                raise ValueError(f"{name}={r} outside [0, 1)")


@dataclass(frozen=True)
class WorkloadEstimate:
    fidelity: float
    required_samples: int
    statistical_error: float
    raw_samples: float  # unrounded (3/F)^2


def estimate_workload(circuit: Circuit, model: ErrorModel) -> WorkloadEstimate:
    """Circuit fidelity from per-gate error rates and the sample count needed
    for a 3-sigma-above-zero fidelity estimate: N_s >= (3/F)^2.

    The fidelity product runs over every gate (e1 for single-qubit, e2 for
    two-qubit layers) and every measured qubit (eq); accumulated in the log
    domain so thousands of factors do not underflow.
    """
    n1 = len(circuit.single_qubit) + len(circuit.trailing)
    n2 = sum(len(c) for c in circuit.cycles)
    log_f = (
        n1 * math.log1p(-model.e1)
        + n2 * math.log1p(-model.e2)
        + circuit.num_qubits * math.log1p(-model.eq)
    )
    fidelity = math.exp(log_f)
    if fidelity == 0.0:
        raise WorkloadError(
            f"fidelity underflows double precision (log F = {log_f})", log_f
        )
    raw = 9.0 * math.exp(-2.0 * log_f)
    samples = math.ceil(raw)
    return WorkloadEstimate(fidelity, samples, 1.0 / math.sqrt(samples), raw)


# ---------------------------------------------------------------------------
# CLI plumbing
# ---------------------------------------------------------------------------

def _emit(record: dict, out=None) -> None:
    print(json.dumps(record, sort_keys=True), file=out or sys.stdout)


def _fail(message: str) -> int:
    print(json.dumps({"error": message}, sort_keys=True), file=sys.stderr)
    return 1


def _load_circuit(path: str) -> Circuit:
    with open(path, "rb") as fh:
        return parse_circuit(fh.read())


def _parse_cuts(spec: str | None):
    if spec is None or spec == "auto":
        return spec
    if spec in ("none", ""):
        return None
    edges = []
    for part in spec.split(","):
        k, _, l = part.partition("-")
        edges.append((int(k), int(l)))
    return edges


def _lattice_graph(kind: str, size: int | None, rows: int | None, cols: int | None) -> CircuitGraph:
    if rows is not None and cols is not None:
        return generate_lattice(kind, rows, cols)
    if size is None:
        raise CircuitFormatError("give --size or both --rows and --cols")
    if kind == "sycamore-like":
        if size not in SYCAMORE_SIZES:
            raise CircuitFormatError(
                f"no bundled sycamore-like layout of size {size}; "
                f"known sizes: {sorted(SYCAMORE_SIZES)}"
            )
        return generate_lattice(kind, *SYCAMORE_SIZES[size])
    side = math.isqrt(size)
    if side * side != size:
        raise CircuitFormatError(f"square --size {size} is not a perfect square")
    return generate_lattice(kind, side, side)


def _cmd_gen(args) -> int:
    graph = _lattice_graph(args.lattice, args.size, args.rows, args.cols)
    circuit = generate_rqc(graph, args.depth, args.seed, args.gate_family)
    data = serialize_circuit(circuit)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data + b"\n")
    return 0


def _cmd_amplitude(args) -> int:
    circuit = _load_circuit(args.circuit)
    stats = compute_amplitude(
        circuit,
        args.in_bits,
        args.out_bits,
        split_cycle=args.split_cycle,
        cuts=_parse_cuts(args.cuts),
        max_rank=args.max_rank,
    )
    rec = stats.record(timing=args.timing)
    if args.format == "csv":
        print(",".join(str(rec[k]) for k in sorted(rec)))
    else:
        _emit(rec)
    return 0


def _verify_one(task) -> tuple[str, float]:
    data, in_bits, out_bits, use_oracle = task
    circuit = parse_circuit(data)
    amp = compute_amplitude(circuit, in_bits, out_bits).amplitude
    if use_oracle:
        ref = amplitude_oracle(circuit, in_bits, out_bits)
        return out_bits, abs(amp - ref)
    return out_bits, abs(amp)


def _cmd_verify(args) -> int:
    data = open(args.circuit, "rb").read()
    circuit = parse_circuit(data)
    n = circuit.num_qubits
    rng = np.random.default_rng(args.seed)
    in_bits = "0" * n
    tasks = [
        (data, in_bits, "".join(rng.choice(["0", "1"], n)), args.oracle)
        for _ in range(args.samples)
    ]
    workers = args.workers or int(os.environ.get("TNSIM_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_verify_one, tasks))
    else:
        results = [_verify_one(t) for t in tasks]
    max_delta = 0.0
    for out_bits, delta in results:
        rec = {"out": out_bits}
        rec["abs_delta" if args.oracle else "abs_amplitude"] = delta
        _emit(rec)
        max_delta = max(max_delta, delta)
    if args.oracle:
        _emit({"max_abs_delta": max_delta, "samples": args.samples})
    return 0


def _cmd_path(args) -> int:
    from .circuit import fuse_single_qubit_gates
    from .network import build_overlap_network
    from .pathfind import NetworkShape, find_optimal_path
    from .tns import two_sided_evolve

    circuit = _load_circuit(args.circuit)
    fused = fuse_single_qubit_gates(circuit)
    n = circuit.num_qubits
    phi, psi = two_sided_evolve(fused, "0" * n, "0" * n, args.split_cycle)
    net = build_overlap_network(phi, psi)
    path, score = find_optimal_path(NetworkShape.from_network(net), args.max_rank)
    _emit({"path": path, "score": str(score)})
    return 0


def _cmd_estimate_workload(args) -> int:
    circuit = _load_circuit(args.circuit)
    model = ErrorModel(args.e1, args.e2, args.eq)
    est = estimate_workload(circuit, model)
    _emit(
        {
            "fidelity": est.fidelity,
            "required_samples": est.required_samples,
            "raw_samples": est.raw_samples,
            "statistical_error": est.statistical_error,
        }
    )
    return 0


def _cmd_bench(args) -> int:
    circuit = _load_circuit(args.circuit)
    n = circuit.num_qubits
    start = time.perf_counter()
    stats = compute_amplitude(
        circuit, "0" * n, "0" * n, max_rank=args.max_rank
    )
    elapsed = time.perf_counter() - start
    rec = stats.record(timing=True)
    rec["total_seconds"] = elapsed
    _emit(rec)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnsim",
        description="Single-amplitude random-quantum-circuit simulator on "
        "arbitrary connectivity graphs",
    )
    parser.add_argument(
        "--config", help="JSON file with flag defaults for the subcommand"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random circuit file")
    p.add_argument("--lattice", choices=["sycamore-like", "square"], required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gate-family", choices=["fsim", "cz", "iswap"], default="fsim")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("amplitude", help="compute one amplitude")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("--in", dest="in_bits", required=True)
    p.add_argument("--out", dest="out_bits", required=True)
    p.add_argument("--cuts", default="auto", help="auto | none | k-l,k-l,...")
    p.add_argument("--max-rank", type=int)
    p.add_argument("--split-cycle", type=int)
    p.add_argument("--timing", action="store_true", help="include wall_time_ms")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_amplitude)

    p = sub.add_parser("verify", help="cross-check amplitudes against the oracle")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("path", help="contraction path for a circuit's overlap network")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("--max-rank", type=int)
    p.add_argument("--split-cycle", type=int)
    p.set_defaults(func=_cmd_path)

    p = sub.add_parser("estimate-workload", help="fidelity and sample count")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("--e1", type=float, default=SYCAMORE_E1)
    p.add_argument("--e2", type=float, default=SYCAMORE_E2)
    p.add_argument("--eq", type=float, default=SYCAMORE_EQ)
    p.set_defaults(func=_cmd_estimate_workload)

    p = sub.add_parser("bench", help="time one amplitude computation")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("--max-rank", type=int)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            for key, value in json.load(fh).items():
                attr = key.replace("-", "_")
                if getattr(args, attr, None) in (None, parser.get_default(attr)):
                    setattr(args, attr, value)
    try:
        return args.func(args)
    except (
        CircuitFormatError,
        CutPlanError,
        PathSearchError,
        WorkloadError,
        ValueError,
        OSError,
    ) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())

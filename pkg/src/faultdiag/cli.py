"""Command-line front end for the diagnosis pipeline.

Subcommands mirror the pipeline stages (gen, compile, embed, sample,
diagnose, gauge, stats, pipeline).  Exit codes: 0 ok, 1 usage, 2 format
error (including stage mixing), 3 embedding failure, 4 sampler/oracle
disagreement.

All randomness flows from --seed through named stage labels, so any stage
can be reproduced in isolation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats
from ._rng import derive_seed
from .chimera import SAMPLE_BROKEN_MASK, build_chimera
from .embedding import EmbeddingNotFound, decode_samples, embed_ising, find_embedding
from .energy import PenaltyParams
from .formats import FormatError
from .network import FaultSet, Observation, build_tree, simulate_readout
from .quadratize import compile_instance
from .solvers import (
    extract_candidates,
    simulated_anneal,
    tree_dp_diagnose,
    tree_dp_min_cost,
)
from .spin import qubo_to_ising, spins_to_bits
from .stats import (
    SolveStats,
    aggregate_gauge_stats,
    gauge_experiment,
    repetitions,
    time_to_solution,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_EMBEDDING = 3
EXIT_ORACLE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _load_instance(path: str):
    net, obs, params = formats.parse_instance(_read(path))
    return net, obs, params, formats.instance_hash(net, obs, params)


def _parse_fault_spec(spec: str) -> FaultSet:
    cbs, sensors = [], []
    for part in spec.replace(",", " ").split():
        kind, _, idx = part.partition(":")
        if kind == "cb":
            cbs.append(int(idx))
        elif kind == "sensor":
            sensors.append(int(idx))
        else:
            raise FormatError(f"bad fault spec {part!r}; use cb:<i> or sensor:<i>")
    return FaultSet.of(cbs, sensors)


def _anneal_times(arg: str) -> tuple[float, ...]:
    return tuple(float(t) for t in arg.replace(",", " ").split())


def cmd_gen(args) -> int:
    net = build_tree(args.arity, args.depth)
    params = PenaltyParams(args.lambda_path, args.lambda_fault_cb, args.lambda_fault_sensor)
    if args.readout is not None:
        obs = Observation.from_groups(args.readout)
        if len(obs) != net.sensor_count:
            raise FormatError(
                f"readout has {len(obs)} bits, network has {net.sensor_count} sensors"
            )
    else:
        if args.faults is not None:
            faults = _parse_fault_spec(args.faults)
        elif args.n_faults is not None:
            total = net.cb_count + net.sensor_count
            if args.n_faults > total:
                raise FormatError(
                    f"cannot inject {args.n_faults} faults into {total} components"
                )
            rng = np.random.default_rng(derive_seed(args.seed, "gen-faults"))
            chosen = rng.choice(total, size=args.n_faults, replace=False)
            faults = FaultSet.of(
                [int(c) + 1 for c in chosen if c < net.cb_count],
                [int(c) - net.cb_count + 1 for c in chosen if c >= net.cb_count],
            )
        else:
            faults = FaultSet.of()
        obs = simulate_readout(net, faults)
        print(f"injected faults: {faults}")
    text = formats.serialize_instance(net, obs, params)
    _write(args.output, text)
    print(f"n_cb {net.cb_count}")
    print(f"n_sensor {net.sensor_count}")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_compile(args) -> int:
    net, obs, params, ihash = _load_instance(args.instance)
    qubo, plan = compile_instance(net, obs, params)
    _write(args.output, formats.serialize_qubo(qubo, ihash))
    print(f"n_l {qubo.n}")
    print(f"n_A {plan.n_ancilla}")
    print(f"wrote {args.output}")
    return EXIT_OK


def _hardware_from_args(args):
    if args.broken is not None:
        broken = tuple(int(t) for t in args.broken.replace(",", " ").split())
    elif args.default_mask:
        broken = SAMPLE_BROKEN_MASK
    else:
        broken = ()
    return build_chimera(args.hw_rows, args.hw_cols, args.hw_shore, broken)


def cmd_embed(args) -> int:
    qubo, qhash = formats.parse_qubo(_read(args.qubo))
    hw = _hardware_from_args(args)
    edges = [(i, j) for (i, j) in qubo.terms if i != j]
    emb = find_embedding(
        qubo.n,
        edges,
        hw,
        seed=derive_seed(args.seed, "embed"),
        restarts=args.restarts,
    )
    _write(args.output, formats.serialize_embedding(emb, hw, qhash))
    print(f"n_l {qubo.n}")
    print(f"n_p {emb.n_physical}")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_sample(args) -> int:
    qubo, qhash = formats.parse_qubo(_read(args.qubo))
    ising = qubo_to_ising(qubo)
    seed = derive_seed(args.seed, "sample")
    if args.embedding is not None:
        emb, hw, ehash = formats.parse_embedding(_read(args.embedding))
        if ehash != qhash:
            raise FormatError(
                f"stage mixing: embedding hash {ehash} != problem hash {qhash}"
            )
        embedded = embed_ising(ising, emb, hw, args.chain_strength)
        samples = simulated_anneal(
            embedded.model, reads=args.reads, sweeps=args.sweeps,
            beta0=args.beta0, beta1=args.beta1, seed=seed,
        )
        text = formats.serialize_samples(
            samples.states, samples.energies, samples.counts, samples.n_reads,
            qhash, space="physical", qubits=embedded.qubits,
        )
        print(f"n_p {len(embedded.qubits)}")
    else:
        samples = simulated_anneal(
            ising, reads=args.reads, sweeps=args.sweeps,
            beta0=args.beta0, beta1=args.beta1, seed=seed,
        )
        text = formats.serialize_samples(
            samples.states, samples.energies, samples.counts, samples.n_reads, qhash
        )
        print(f"n_l {qubo.n}")
    _write(args.output, text)
    print(f"min_energy {formats.fmt_real(samples.min_energy())}")
    print(f"wrote {args.output}")
    return EXIT_OK


def _print_report(report, net) -> None:
    print(f"oracle_min_faults {report.oracle_min_faults}")
    print(f"oracle_multiplicity {report.oracle_multiplicity}")
    if report.min_faults is None:
        print("sampled_min_faults none")
    else:
        print(f"sampled_min_faults {report.min_faults}")
    print(f"distinct_minimal_found {report.n_minimal}")
    print(f"agreement {'yes' if report.agrees else 'NO'}")
    for cand in report.candidates[: min(len(report.candidates), 16)]:
        print(
            f"candidate faults={cand.n_faults} occurrences={cand.occurrences} {cand.faults}"
        )


def cmd_diagnose(args) -> int:
    from .solvers import diagnose

    net, obs, params, _ = _load_instance(args.instance)
    report = diagnose(
        net, obs, params,
        reads=args.reads, sweeps=args.sweeps,
        seed=derive_seed(args.seed, "diagnose"),
    )
    print(f"n_l {report.extras['n_logical']}")
    print(f"n_A {report.extras['n_ancilla']}")
    _print_report(report, net)
    return EXIT_OK if report.agrees else EXIT_ORACLE


def cmd_gauge(args) -> int:
    net, obs, params, _ = _load_instance(args.instance)
    qubo, _plan = compile_instance(net, obs, params)
    ising = qubo_to_ising(qubo)
    ground = tree_dp_min_cost(
        net, obs, params.lambda_fault_cb, params.lambda_fault_sensor
    )
    report = gauge_experiment(
        ising,
        ground_energy=ground,
        n_gauges=args.n_gauges,
        repeats=args.repeats,
        reads=args.reads,
        sweeps=args.sweeps,
        seed=derive_seed(args.seed, "gauge"),
        anneal_times=_anneal_times(args.anneal_times),
        certainty=args.certainty,
    )
    print(f"ground_energy {formats.fmt_real(ground)}")
    for run in report.per_gauge:
        print(
            f"gauge {run.index:>2} mean_ngs {run.mean_ngs:.1f} "
            f"min {run.min_ngs} max {run.max_ngs}"
        )
    print(formats.format_stats_table(report.rows, report.anneal_times), end="")
    return EXIT_OK


def cmd_stats(args) -> int:
    times = _anneal_times(args.anneal_times)
    if args.samples is not None:
        if args.ground_energy is None:
            raise FormatError("--samples needs --ground-energy")
        states, energies, counts, n_reads, _h, _s, _q = formats.parse_samples(
            _read(args.samples)
        )
        hits = int(counts[np.abs(energies - args.ground_energy) <= args.tol].sum())
        stats = SolveStats.from_counts(hits, n_reads, times[0], args.certainty)
        print(f"n_gs {hits}")
    elif args.ngs is not None and args.reads is not None:
        stats = SolveStats.from_counts(args.ngs, args.reads, times[0], args.certainty)
    else:
        raise FormatError("stats needs either --samples or --ngs/--reads")
    print(f"p_s {formats.fmt_real(stats.p_s)}")
    if stats.repetitions is None:
        print("repetitions not-found")
        print("t_total not-found")
    else:
        print(f"repetitions {stats.repetitions}")
        for t in times:
            print(f"t_total@{formats.fmt_real(t)}s {time_to_solution(stats.repetitions, t):.4f}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    net, obs, params, ihash = _load_instance(args.instance)

    qubo, plan = compile_instance(net, obs, params)
    _write(str(workdir / "problem.qubo"), formats.serialize_qubo(qubo, ihash))
    print(f"n_l {qubo.n}")
    print(f"n_A {plan.n_ancilla}")

    ising = qubo_to_ising(qubo)
    hw = _hardware_from_args(args)
    edges = [(i, j) for (i, j) in qubo.terms if i != j]
    emb = find_embedding(
        qubo.n, edges, hw,
        seed=derive_seed(args.seed, "embed"), restarts=args.restarts,
    )
    _write(str(workdir / "embedding.txt"), formats.serialize_embedding(emb, hw, ihash))
    print(f"n_p {emb.n_physical}")

    embedded = embed_ising(ising, emb, hw, args.chain_strength)
    samples = simulated_anneal(
        embedded.model, reads=args.reads, sweeps=args.sweeps,
        seed=derive_seed(args.seed, "sample"),
    )
    _write(
        str(workdir / "samples.txt"),
        formats.serialize_samples(
            samples.states, samples.energies, samples.counts, samples.n_reads,
            ihash, space="physical", qubits=embedded.qubits,
        ),
    )

    decoded, broken_frac = decode_samples(
        samples.states, embedded, qubo.n, seed=derive_seed(args.seed, "decode")
    )
    bits = spins_to_bits(decoded)
    candidates = extract_candidates(net, obs, params, bits, samples.counts)
    dp = tree_dp_diagnose(net, obs)
    weighted_broken = float((broken_frac * samples.counts).sum() / samples.n_reads)
    print(f"chain_break_fraction {weighted_broken:.4f}")

    from .solvers import DiagnosisReport

    best = candidates[0].n_faults if candidates else None
    report = DiagnosisReport(
        candidates=candidates,
        min_faults=best,
        n_minimal=sum(1 for c in candidates if c.n_faults == best) if candidates else 0,
        oracle_min_faults=dp.min_faults,
        oracle_multiplicity=dp.multiplicity,
        agrees=best == dp.min_faults,
        n_reads=samples.n_reads,
    )
    _print_report(report, net)

    ground = tree_dp_min_cost(net, obs, params.lambda_fault_cb, params.lambda_fault_sensor)
    logical_energies = ising.energies(decoded)
    hits = int(samples.counts[np.abs(logical_energies - ground) <= 1e-9].sum())
    stats = SolveStats.from_counts(hits, samples.n_reads, _anneal_times(args.anneal_times)[0], args.certainty)
    print(f"n_gs {hits}")
    if stats.repetitions is not None:
        print(f"repetitions {stats.repetitions}")
        print(f"t_total {stats.total_time:.4f}")
    else:
        print("repetitions not-found")
    return EXIT_OK if report.agrees else EXIT_ORACLE


def _add_sampler_flags(p, reads_default=2000):
    p.add_argument("--reads", type=int, default=reads_default)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--beta0", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)


def _add_hw_flags(p):
    p.add_argument("--hw-rows", type=int, default=8)
    p.add_argument("--hw-cols", type=int, default=8)
    p.add_argument("--hw-shore", type=int, default=4)
    p.add_argument("--broken", type=str, default=None, help="broken qubit ids")
    p.add_argument(
        "--default-mask", action="store_true",
        help="use the shipped 3-qubit broken mask (509 usable qubits)",
    )
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--chain-strength", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="faultdiag", description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an instance file")
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--readout", type=str, default=None, help="bit groups, e.g. '0101,0101,0101,1111'")
    p.add_argument("--faults", type=str, default=None, help="e.g. 'cb:6,sensor:3'")
    p.add_argument("--n-faults", type=int, default=None)
    p.add_argument("--lambda-path", type=float, default=3.0)
    p.add_argument("--lambda-fault-cb", type=float, default=1.0)
    p.add_argument("--lambda-fault-sensor", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compile", help="instance -> QUBO file")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("embed", help="QUBO file -> embedding file")
    p.add_argument("qubo")
    _add_hw_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sample", help="sample a QUBO (optionally embedded)")
    p.add_argument("qubo")
    p.add_argument("--embedding", default=None)
    p.add_argument("--chain-strength", type=float, default=None)
    _add_sampler_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("diagnose", help="end-to-end diagnosis of an instance")
    p.add_argument("instance")
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("gauge", help="multi-gauge sampling experiment")
    p.add_argument("instance")
    p.add_argument("--n-gauges", type=int, default=20)
    p.add_argument("--repeats", type=int, default=3)
    _add_sampler_flags(p, reads_default=1000)
    p.add_argument("--anneal-times", type=str, default="20e-6")
    p.add_argument("--certainty", type=float, default=0.99)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("stats", help="repetition/time table from counts or samples")
    p.add_argument("--samples", default=None)
    p.add_argument("--ground-energy", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--ngs", type=float, default=None)
    p.add_argument("--reads", type=int, default=None)
    p.add_argument("--anneal-times", type=str, default="20e-6")
    p.add_argument("--certainty", type=float, default=0.99)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pipeline", help="compile, embed, sample, decode, verify")
    p.add_argument("instance")
    p.add_argument("--workdir", default="pipeline-out")
    _add_sampler_flags(p, reads_default=4000)
    _add_hw_flags(p)
    p.add_argument("--anneal-times", type=str, default="20e-6")
    p.add_argument("--certainty", type=float, default=0.99)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except EmbeddingNotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMBEDDING
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line surface: sampling, classification, witness forging, vertex
extension, and data exports, all reproducible from a single --seed.

Exit codes: 0 success, 1 internal error, 2 usage error, 3 missing/invalid
resource files.  Reports and exports are written atomically and embed the
seed and a config fingerprint; repeated runs with identical flags produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

_SHARD_SIZE = 512


class ResourceError(RuntimeError):
    pass


def _positive_dimension(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("dimension must be >= 2")
    return value


def _atomic(path: Path, writer) -> None:
    """Run writer(tmp_path) then rename over the target."""
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name)
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magicsimplex",
        description="Bell-diagonal qudit states: sampling, detectors, classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_vol = sub.add_parser("volumes", help="relative volumes of the enclosure polytope and PPT set")
    p_vol.add_argument("--d", type=_positive_dimension, required=True)
    p_vol.add_argument("--n", type=int, default=100_000)
    p_vol.add_argument("--seed", type=int, default=0)
    p_vol.add_argument("--out", type=Path, required=True)
    p_vol.add_argument("--no-figure", action="store_true", help="skip the PNG next to the report")

    p_cls = sub.add_parser("classify", help="classify enclosure samples or a state file")
    p_cls.add_argument("--d", type=_positive_dimension)
    group = p_cls.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, help="number of enclosure-polytope samples")
    group.add_argument("--in", dest="infile", type=Path, help="JSON-lines state file")
    p_cls.add_argument("--witness-bank", type=Path)
    p_cls.add_argument("--vertices", type=Path)
    p_cls.add_argument("--group-cache", type=Path, help="JSON file caching the symmetry group")
    orbit = p_cls.add_mutually_exclusive_group()
    orbit.add_argument("--orbit", dest="orbit", action="store_true", default=True)
    orbit.add_argument("--no-orbit", dest="orbit", action="store_false")
    p_cls.add_argument("--orbit-s1-limit", type=int, default=48)
    p_cls.add_argument("--seed", type=int, default=0)
    p_cls.add_argument("--workers", type=int, default=None,
                       help="default from MAGICSIMPLEX_WORKERS, else 1")
    p_cls.add_argument("--out", type=Path, required=True,
                       help="output prefix: writes <out>.records.jsonl, <out>.summary.json, ...")
    p_cls.add_argument("--no-figure", action="store_true")

    p_forge = sub.add_parser("forge", help="generate certified entanglement witnesses")
    p_forge.add_argument("--d", type=_positive_dimension, required=True)
    p_forge.add_argument("--count", type=int, required=True)
    p_forge.add_argument("--seed", type=int, default=0)
    p_forge.add_argument("--restarts", type=int, default=None)
    p_forge.add_argument("--out", type=Path, required=True)

    p_ext = sub.add_parser("extend", help="extend the separable vertex set")
    p_ext.add_argument("--d", type=_positive_dimension, required=True)
    p_ext.add_argument("--vertices", type=Path, help="input vertex file (default: kernel cosets)")
    p_ext.add_argument("--budget", type=int, required=True)
    p_ext.add_argument("--max-vertices", type=int, default=10_000)
    p_ext.add_argument("--seed", type=int, default=0)
    p_ext.add_argument("--out", type=Path, required=True)

    p_exp = sub.add_parser("export", help="scatter / conjecture-probe CSV from records")
    what = p_exp.add_mutually_exclusive_group(required=True)
    what.add_argument("--coords", type=str,
                      help="four comma-separated flat coordinate indices for the scatter export")
    what.add_argument("--conjecture", action="store_true",
                      help="subgroup-concentration probe instead of a scatter")
    p_exp.add_argument("--in", dest="infile", type=Path, required=True)
    p_exp.add_argument("--out", type=Path, required=True)
    return parser


# --- command bodies -----------------------------------------------------------


def cmd_volumes(args) -> int:
    from .experiments import estimate_volumes
    from .iotools import write_json_report

    if args.n < 1000:
        print("error: --n must be at least 1000", file=sys.stderr)
        return EXIT_USAGE
    report = estimate_volumes(args.d, args.n, args.seed)
    _atomic(args.out, lambda tmp: write_json_report(tmp, report.to_payload()))
    print(
        f"d={report.d} n={report.n_samples}: enclosure {report.share_enclosure:.4f}"
        f" +- {report.stderr_enclosure:.4f}, PPT {report.share_ppt:.4f}"
        f" +- {report.stderr_ppt:.4f} ({report.wall_time_s:.1f}s)"
    )
    if not args.no_figure:
        from .plots import volume_figure

        fig_path = args.out.with_suffix(".png")
        _atomic(fig_path, lambda tmp: volume_figure(report, tmp))
        print(f"figure: {fig_path}")
    return EXIT_OK


def _load_resources(args, d):
    from .classify import Resources
    from .hull import kernel_vertex_set, load_vertex_set
    from .symmetries import generate_group, load_group, save_group
    from .witnesses import load_bank

    bank = []
    if args.witness_bank is not None:
        if not args.witness_bank.exists():
            raise ResourceError(f"witness bank not found: {args.witness_bank}")
        bank = load_bank(args.witness_bank)
        if any(w.d != d for w in bank):
            raise ResourceError(f"witness bank is not for d={d}")
    if args.vertices is not None:
        if not args.vertices.exists():
            raise ResourceError(f"vertex file not found: {args.vertices}")
        vertex_set = load_vertex_set(args.vertices)
        if vertex_set.d != d:
            raise ResourceError(f"vertex set is not for d={d}")
    else:
        vertex_set = kernel_vertex_set(d)
    group = None
    if args.orbit:
        if args.group_cache is not None and args.group_cache.exists():
            group = load_group(args.group_cache)
            if group and len(group[0].perm) != d * d:
                raise ResourceError(f"group cache is not for d={d}")
        else:
            group = generate_group(d)
            if args.group_cache is not None:
                save_group(args.group_cache, d, group)
    return Resources(d, bank=bank, vertex_set=vertex_set, group=group)


def _classify_shard(payload):
    from .classify import classify_batch

    states, resources, cfg = payload
    return classify_batch(states, resources, cfg)


def cmd_classify(args) -> int:
    from .classify import ClassifierConfig, summarize, write_records
    from .experiments import detector_overlap
    from .iotools import write_json_report
    from .states import BellDiagonalState, read_states, sample_enclosure_array

    if args.infile is not None:
        if not args.infile.exists():
            print(f"error: state file not found: {args.infile}", file=sys.stderr)
            return EXIT_RESOURCE
        states = read_states(args.infile)
        if not states:
            print("error: empty state file", file=sys.stderr)
            return EXIT_RESOURCE
        dims = {s.d for s in states}
        if len(dims) != 1:
            print(f"error: mixed dimensions in state file: {sorted(dims)}", file=sys.stderr)
            return EXIT_RESOURCE
        d = states[0].d
        if args.d is not None and args.d != d:
            print(f"error: --d {args.d} does not match state file d={d}", file=sys.stderr)
            return EXIT_RESOURCE
    else:
        if args.d is None:
            print("error: --d is required with --n", file=sys.stderr)
            return EXIT_USAGE
        d = args.d
        rows, _ = sample_enclosure_array(d, args.n, np.random.default_rng(args.seed))
        states = [BellDiagonalState(d, row, id=str(i)) for i, row in enumerate(rows)]

    try:
        resources = _load_resources(args, d)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE

    cfg = ClassifierConfig(use_orbit=args.orbit, orbit_s1_limit=args.orbit_s1_limit)
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("MAGICSIMPLEX_WORKERS", "1"))
    shards = [states[i : i + _SHARD_SIZE] for i in range(0, len(states), _SHARD_SIZE)]
    if workers > 1 and len(shards) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_classify_shard, [(s, resources, cfg) for s in shards]))
    else:
        parts = [_classify_shard((s, resources, cfg)) for s in shards]
    records = [rec for part in parts for rec in part]

    summary = summarize(records, extra={"d": d, "seed": args.seed, "n": len(records)})
    overlap = detector_overlap(records)
    summary["overlap"] = overlap.to_payload()

    records_path = Path(str(args.out) + ".records.jsonl")
    summary_path = Path(str(args.out) + ".summary.json")
    _atomic(records_path, lambda tmp: write_records(tmp, records))
    _atomic(summary_path, lambda tmp: write_json_report(tmp, summary))
    counts = summary["counts"]
    print(
        f"classified {len(records)} states (d={d}): "
        + ", ".join(f"{k}={counts[k]}" for k in counts)
    )
    print(f"records: {records_path}\nsummary: {summary_path}")
    if not args.no_figure:
        from .plots import classification_figure, overlap_figure

        labels_png = Path(str(args.out) + ".labels.png")
        overlap_png = Path(str(args.out) + ".overlap.png")
        _atomic(labels_png, lambda tmp: classification_figure(summary, tmp))
        _atomic(overlap_png, lambda tmp: overlap_figure(overlap, tmp))
        print(f"figures: {labels_png}, {overlap_png}")
    return EXIT_OK


def cmd_forge(args) -> int:
    from .witnesses import WitnessConfig, forge_bank, save_bank

    if args.count < 1:
        print("error: --count must be positive", file=sys.stderr)
        return EXIT_USAGE
    cfg = WitnessConfig(restarts=args.restarts)
    rng = np.random.default_rng(args.seed)
    bank = forge_bank(args.d, args.count, rng, cfg, seed_note=args.seed)
    _atomic(args.out, lambda tmp: save_bank(tmp, bank))
    print(f"forged {len(bank)} witnesses for d={args.d} -> {args.out}")
    return EXIT_OK


def cmd_extend(args) -> int:
    from .hull import ExtendConfig, extend_vertices, kernel_vertex_set, load_vertex_set, save_vertex_set

    if args.vertices is not None:
        if not args.vertices.exists():
            print(f"error: vertex file not found: {args.vertices}", file=sys.stderr)
            return EXIT_RESOURCE
        vs = load_vertex_set(args.vertices)
        if vs.d != args.d:
            print(f"error: vertex set is not for d={args.d}", file=sys.stderr)
            return EXIT_RESOURCE
    else:
        vs = kernel_vertex_set(args.d)
    rng = np.random.default_rng(args.seed)
    grown = extend_vertices(vs, rng, args.budget, ExtendConfig(max_vertices=args.max_vertices))
    _atomic(args.out, lambda tmp: save_vertex_set(tmp, grown))
    print(f"vertex set: {len(vs)} -> {len(grown)} vertices -> {args.out}")
    return EXIT_OK


def cmd_export(args) -> int:
    from .classify import read_records
    from .experiments import conjecture_probe, export_scatter

    if not args.infile.exists():
        print(f"error: records file not found: {args.infile}", file=sys.stderr)
        return EXIT_RESOURCE
    records = read_records(args.infile)
    if args.conjecture:
        _atomic(args.out, lambda tmp: conjecture_probe(records, tmp))
    else:
        try:
            coords = tuple(int(x) for x in args.coords.split(","))
        except ValueError:
            print("error: --coords must be four comma-separated integers", file=sys.stderr)
            return EXIT_USAGE
        try:
            _atomic(args.out, lambda tmp: export_scatter(records, coords, tmp))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "volumes": cmd_volumes,
        "classify": cmd_classify,
        "forge": cmd_forge,
        "extend": cmd_extend,
        "export": cmd_export,
    }
    try:
        return handlers[args.command](args)
    except BrokenPipeError:
        return EXIT_INTERNAL
    except Exception as exc:  # stable nonzero contract for scripting
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

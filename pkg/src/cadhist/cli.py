"""Command-line front end.

Subcommands cover the end-to-end workflow: parse single files, normalize
a raw corpus into canonical form (with rejects preserved for audit),
check raw/canonical equivalence, interpret programs into meshes, sample
point clouds, evaluate generated sets against references, summarize
corpus statistics, and drive the annotation pipeline.

Exit codes: 0 success, 1 input error, 2 validation or construction
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import annotate as annotate_mod
from . import figures, jsonio, meshio, metrics
from .emitter import emit_program
from .evaluate import EvalProtocol, evaluate_sets
from .geometry import (
    InterpretError,
    Mesh,
    bbox_prompt,
    bounding_box,
    interpret_combined,
    mesh_volume,
)
from .lexer import ParseError
from .model import OpKind, Program, sketch_entities, validate_structure
from .normalize import (
    DEFAULT_PASS_ORDER,
    NormalizeError,
    PassConfig,
    normalize,
    validate_equivalence,
)
from .parser import parse_program
from .sampling import sample_surface, save_xyz

PROGRAM_SUFFIX = ".fs"
CONFIG_ENV_VAR = "CADHIST_CONFIG"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; here 2 means validation failure,
    # so remap usage problems to the input-error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_text(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _load_config(path: str | None) -> PassConfig:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return PassConfig()
    with open(path) as fh:
        config = PassConfig.from_dict(json.load(fh))
    if sorted(config.enabled_passes) != sorted(DEFAULT_PASS_ORDER):
        raise ValueError("enabled_passes must be a permutation of the standard passes")
    return config


def _program_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.suffix == PROGRAM_SUFFIX)


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------


def cmd_parse(args) -> int:
    path = Path(args.path)
    try:
        text = _read_text(path)
    except OSError as exc:
        return _fail(str(exc), 1)
    try:
        program = parse_program(text, args.dialect, source_name=path.name)
    except ParseError as exc:
        return _fail(f"{path.name}: {exc}", 1)
    diagnostics = validate_structure(program)
    for diag in diagnostics:
        print(f"{path.name}: {diag.severity}: {diag.feature_id}: {diag.message}",
              file=sys.stderr)
    if args.json:
        sys.stdout.write(jsonio.dumps(program))
    else:
        sys.stdout.write(emit_program(program))
    return 2 if any(d.severity == "error" for d in diagnostics) else 0


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class _NormalizeOutcome:
    stem: str
    ok: bool
    reason: str = ""
    canonical_text: str = ""
    raw_text: str = ""
    report: dict | None = None


def _normalize_one(stem: str, text: str, config: PassConfig, tolerance: float) -> _NormalizeOutcome:
    try:
        raw = parse_program(text, "raw", source_name=stem)
    except ParseError as exc:
        return _NormalizeOutcome(stem, False, f"parse error: {exc}", raw_text=text)
    try:
        result = normalize(raw, config)
    except NormalizeError as exc:
        return _NormalizeOutcome(stem, False, str(exc), raw_text=text)
    check = validate_equivalence(raw, result.program, config=config, tolerance=tolerance)
    if not check.verified:
        return _NormalizeOutcome(stem, False, f"{check.status}: {check.detail}", raw_text=text)
    report = {
        "passes": [r.as_dict() for r in result.reports],
        "validation": {"status": check.status, "chamfer": check.chamfer},
    }
    return _NormalizeOutcome(
        stem, True, canonical_text=emit_program(result.program), raw_text=text, report=report
    )


def cmd_normalize(args) -> int:
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    if not in_dir.is_dir():
        return _fail(f"not a directory: {in_dir}", 1)
    try:
        config = _load_config(args.config)
    except (OSError, ValueError) as exc:
        return _fail(f"bad config: {exc}", 1)
    files = _program_files(in_dir)
    if not files:
        return _fail(f"no {PROGRAM_SUFFIX} files in {in_dir}", 1)
    texts = [_read_text(p) for p in files]

    workers = max(1, args.jobs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(
            pool.map(
                _normalize_one,
                [p.stem for p in files],
                texts,
                [config] * len(files),
                [args.tol] * len(files),
            )
        )

    out_dir.mkdir(parents=True, exist_ok=True)
    reject_dir = out_dir / "rejected"
    report_dir = Path(args.report) if args.report else None
    if report_dir:
        report_dir.mkdir(parents=True, exist_ok=True)
    rejected = 0
    for outcome in outcomes:
        if outcome.ok:
            (out_dir / f"{outcome.stem}{PROGRAM_SUFFIX}").write_text(outcome.canonical_text)
            if report_dir:
                with open(report_dir / f"{outcome.stem}.report.json", "w") as fh:
                    json.dump(outcome.report, fh, indent=2)
                    fh.write("\n")
            print(f"{outcome.stem}: ok")
        else:
            rejected += 1
            reject_dir.mkdir(parents=True, exist_ok=True)
            (reject_dir / f"{outcome.stem}{PROGRAM_SUFFIX}").write_text(outcome.raw_text)
            (reject_dir / f"{outcome.stem}.reason.txt").write_text(outcome.reason + "\n")
            print(f"{outcome.stem}: rejected ({outcome.reason})")
    kept = len(outcomes) - rejected
    print(f"normalized {kept}/{len(outcomes)}, rejected {rejected}")
    return 2 if rejected else 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        raw = parse_program(_read_text(Path(args.raw)), "raw", source_name=args.raw)
        canonical = parse_program(
            _read_text(Path(args.canonical)), "canonical", source_name=args.canonical
        )
    except OSError as exc:
        return _fail(str(exc), 1)
    except ParseError as exc:
        return _fail(str(exc), 1)
    result = validate_equivalence(raw, canonical, tolerance=args.tol)
    payload = {"status": result.status, "detail": result.detail, "chamfer": result.chamfer}
    print(json.dumps(payload, indent=2))
    return 0 if result.verified else 2


# ---------------------------------------------------------------------------
# interpret / sample
# ---------------------------------------------------------------------------


def _load_program(path: Path, dialect: str = "canonical") -> Program:
    return parse_program(_read_text(path), dialect, source_name=path.name)


def _mesh_from_path(path: Path) -> Mesh:
    if path.suffix == ".obj":
        return meshio.read_obj(path)
    return interpret_combined(_load_program(path))


def cmd_interpret(args) -> int:
    path = Path(args.path)
    try:
        program = _load_program(path)
    except OSError as exc:
        return _fail(str(exc), 1)
    except ParseError as exc:
        return _fail(f"{path.name}: {exc}", 1)
    try:
        mesh = interpret_combined(program)
    except InterpretError as exc:
        return _fail(f"invalid construction: {exc.reason}: {exc}", 2)
    if args.stl:
        meshio.write_stl(args.stl, mesh, name=path.stem)
    if args.obj:
        meshio.write_obj(args.obj, mesh)
    box = bounding_box(mesh)
    print(f"vertices: {len(mesh.vertices)}  triangles: {len(mesh.triangles)}")
    print(f"volume: {mesh_volume(mesh):.6f}")
    print(bbox_prompt(box))
    return 0


def cmd_sample(args) -> int:
    path = Path(args.path)
    try:
        mesh = _mesh_from_path(path)
    except OSError as exc:
        return _fail(str(exc), 1)
    except ParseError as exc:
        return _fail(f"{path.name}: {exc}", 1)
    except InterpretError as exc:
        return _fail(f"invalid construction: {exc.reason}: {exc}", 2)
    cloud = sample_surface(mesh, args.n, args.seed)
    save_xyz(cloud, args.out)
    print(f"wrote {len(cloud)} points to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    ref_dir = Path(args.ref_dir)
    gen_dir = Path(args.gen_dir)
    for d in (ref_dir, gen_dir):
        if not d.is_dir():
            return _fail(f"not a directory: {d}", 1)
    try:
        protocol = (
            EvalProtocol.from_dict(json.load(open(args.protocol)))
            if args.protocol
            else EvalProtocol()
        )
    except (OSError, ValueError) as exc:
        return _fail(f"bad protocol: {exc}", 1)

    ref_files = {p.stem: p for p in _program_files(ref_dir)}
    gen_files = {p.stem: p for p in _program_files(gen_dir)}
    if not ref_files:
        return _fail(f"no {PROGRAM_SUFFIX} files in {ref_dir}", 1)
    missing = sorted(set(ref_files) - set(gen_files))
    if missing:
        return _fail(f"no generated counterpart for: {', '.join(missing)}", 1)
    orphans = sorted(set(gen_files) - set(ref_files))

    reference: list[tuple[str, Mesh]] = []
    for stem, path in sorted(ref_files.items()):
        try:
            reference.append((stem, interpret_combined(_load_program(path))))
        except (ParseError, InterpretError) as exc:
            return _fail(f"reference {stem} is invalid: {exc}", 1)

    generated: list[tuple[str, Mesh | None]] = []
    for stem in sorted(ref_files):
        try:
            generated.append((stem, interpret_combined(_load_program(gen_files[stem]))))
        except (ParseError, InterpretError):
            generated.append((stem, None))

    report = evaluate_sets(reference, generated, protocol)
    if orphans:
        # Generated files with no reference counterpart still count against
        # the invalidity ratio.
        total = report.generated_count + len(orphans)
        invalid = report.invalid_count + len(orphans)
        report = dataclasses.replace(
            report,
            generated_count=total,
            invalid_count=invalid,
            ir_pct=metrics.invalidity_ratio(invalid, total),
        )

    print(report.summary_table())
    if args.out:
        Path(args.out).write_text(report.to_json())
        print(f"report: {args.out}")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
        print(f"csv: {args.csv}")
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        figures.pair_accuracy_chart(report, fig_dir / "pairs.png")
        figures.summary_chart(report, fig_dir / "summary.png")
        print(f"figures: {fig_dir}")
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def _load_manifest(path: Path) -> list[dict]:
    """Manifest schema is documented in docs/manifest.md."""
    if path.is_dir():
        return [
            {"id": p.stem, "canonical_path": str(p), "split": "train", "flags": []}
            for p in _program_files(path)
        ]
    with open(path) as fh:
        data = json.load(fh)
    entries = data["entries"] if isinstance(data, dict) else data
    seen = set()
    for entry in entries:
        if entry["id"] in seen:
            raise ValueError(f"duplicate manifest id: {entry['id']}")
        seen.add(entry["id"])
        entry.setdefault("flags", [])
        target = entry.get("canonical_path") or entry.get("raw_path")
        if target is None or not Path(target).exists():
            entry["flags"] = sorted(set(entry["flags"]) | {"missing"})
    return entries


def _manifest_program(entry: dict) -> tuple[str, Program]:
    if entry.get("canonical_path"):
        path = Path(entry["canonical_path"])
        dialect = "canonical"
    else:
        path = Path(entry["raw_path"])
        dialect = "raw"
    return entry["id"], _load_program(path, dialect)


def _op_distribution(programs: list[Program]) -> dict[str, int]:
    counts = {kind.value: 0 for kind in OpKind}
    for program in programs:
        for feat in program.features:
            counts[feat.kind.value] += 1
    return counts


def _greedy_match(
    ids: list[str],
    programs: list[Program],
    target: dict[str, float],
    select: int,
) -> list[str]:
    """Pick programs one at a time, each time minimizing the L1 distance
    between the running operation distribution and the target fractions."""
    goal = {kind.value: float(target.get(kind.value, 0.0)) for kind in OpKind}
    per_program = [_op_distribution([p]) for p in programs]
    chosen: list[int] = []
    totals = {kind.value: 0 for kind in OpKind}

    def l1_after(idx: int) -> float:
        merged = {k: totals[k] + per_program[idx][k] for k in totals}
        n = sum(merged.values())
        if n == 0:
            return sum(goal.values())
        return sum(abs(merged[k] / n - goal[k]) for k in merged)

    remaining = list(range(len(programs)))
    for _ in range(min(select, len(programs))):
        best = min(remaining, key=lambda idx: (l1_after(idx), ids[idx]))
        remaining.remove(best)
        chosen.append(best)
        for k, v in per_program[best].items():
            totals[k] += v
    return [ids[i] for i in sorted(chosen)]


def cmd_stats(args) -> int:
    path = Path(args.manifest)
    try:
        entries = _load_manifest(path)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"bad manifest: {exc}", 1)
    ids: list[str] = []
    programs: list[Program] = []
    skipped = 0
    for entry in entries:
        if "missing" in entry.get("flags", []):
            skipped += 1
            continue
        try:
            entry_id, program = _manifest_program(entry)
        except (OSError, ParseError) as exc:
            return _fail(f"{entry['id']}: {exc}", 1)
        ids.append(entry_id)
        programs.append(program)

    op_counts = _op_distribution(programs)
    total_ops = sum(op_counts.values())
    primitive_counts: dict[str, int] = {}
    for program in programs:
        for feat in program.features:
            for entity in sketch_entities(feat):
                name = type(entity).__name__
                primitive_counts[name] = primitive_counts.get(name, 0) + 1

    report = {
        "programs": len(programs),
        "skipped_missing": skipped,
        "operations": {
            kind.value: {
                "count": op_counts[kind.value],
                "fraction": (op_counts[kind.value] / total_ops) if total_ops else 0.0,
            }
            for kind in OpKind
        },
        "sketch_primitives": dict(sorted(primitive_counts.items())),
    }

    if args.match_distribution:
        if args.select is None:
            return _fail("--match-distribution requires --select", 1)
        try:
            with open(args.match_distribution) as fh:
                target = json.load(fh)
        except (OSError, ValueError) as exc:
            return _fail(f"bad target distribution: {exc}", 1)
        selected = _greedy_match(ids, programs, target, args.select)
        report["match"] = {
            "method": "greedy-l1-approximation",
            "target": target,
            "selected": selected,
        }

    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"stats: {args.out}")
    else:
        sys.stdout.write(text)
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        figures.operation_histogram(op_counts, fig_dir / "operations.png")
        print(f"figures: {fig_dir}")
    return 0


# ---------------------------------------------------------------------------
# annotate
# ---------------------------------------------------------------------------


def cmd_annotate(args) -> int:
    try:
        items = annotate_mod.read_batch_jsonl(args.input)
    except (OSError, ValueError, annotate_mod.AnnotateError) as exc:
        return _fail(f"bad input: {exc}", 1)
    try:
        if args.client == "mock":
            client = annotate_mod.MockClient()
        elif args.client == "replay":
            if not args.replay_file:
                return _fail("--client replay requires --replay-file", 1)
            client = annotate_mod.ReplayClient.load(args.replay_file)
        else:
            client = annotate_mod.HttpClient()
    except (OSError, annotate_mod.AnnotateError) as exc:
        return _fail(str(exc), 1)
    recorder = None
    if args.record:
        recorder = annotate_mod.RecordingClient(client)
        client = recorder
    config = annotate_mod.AnnotationConfig(retries=args.retries, parallelism=args.jobs)
    try:
        annotations = annotate_mod.run_batch(items, client, config)
    except annotate_mod.AnnotateError as exc:
        return _fail(str(exc), 2)
    annotate_mod.write_batch_jsonl(args.output, annotations)
    if recorder is not None:
        recorder.save(args.record)
    print(f"annotated {len(annotations)} programs to {args.output}")
    return 0


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="cadhist", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse one program and reprint it")
    p.add_argument("path")
    p.add_argument("--dialect", choices=["canonical", "raw"], default="canonical")
    p.add_argument("--json", action="store_true", help="print the JSON form instead")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("normalize", help="normalize a raw corpus directory")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--config", help=f"pass config JSON (default ${CONFIG_ENV_VAR})")
    p.add_argument("--report", help="directory for per-entry pass reports")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--jobs", type=int, default=4)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("validate", help="check raw/canonical equivalence")
    p.add_argument("raw")
    p.add_argument("canonical")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("interpret", help="build the mesh for a canonical program")
    p.add_argument("path")
    p.add_argument("--stl", help="write an ASCII STL file")
    p.add_argument("--obj", help="write an OBJ file")
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("sample", help="sample a surface point cloud")
    p.add_argument("path", help="program file or .obj mesh")
    p.add_argument("out", help="xyz output path")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate generated programs against references")
    p.add_argument("ref_dir")
    p.add_argument("gen_dir")
    p.add_argument("--protocol", help="protocol JSON file")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--csv", help="write per-pair CSV here")
    p.add_argument("--figures", help="write charts into this directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="operation statistics for a corpus")
    p.add_argument("manifest", help="manifest JSON or a program directory")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--match-distribution", help="target distribution JSON")
    p.add_argument("--select", type=int, help="ids to select when matching")
    p.add_argument("--figures", help="write charts into this directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("annotate", help="run the two-stage annotation pipeline")
    p.add_argument("input", help="JSONL with id and code fields")
    p.add_argument("output", help="JSONL with draft and reviewed text")
    p.add_argument("--client", choices=["mock", "replay", "http"], default="mock")
    p.add_argument("--replay-file", help="recorded responses for --client replay")
    p.add_argument("--record", help="record responses to this file")
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--jobs", type=int, default=4)
    p.set_defaults(func=cmd_annotate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end: generate/ingest, extract, compare, report.

Subcommands mirror the pipeline stages:

* ``synth``    write a synthetic corpus from a profile file,
* ``validate`` check every task file of a corpus and report gaps,
* ``extract``  compute the feature table for a corpus,
* ``compare``  build the set-pair p-value matrix plus the recovery summary,
* ``report``   re-render a saved matrix JSON at a chosen alpha.

Exit codes: 0 success, 1 data error, 2 usage error. ``--out`` defaults to the
``INKFATIGUE_OUT`` environment variable. A ``--config`` file can supply
defaults for flags; explicit flags win and the override is announced on
stderr, never applied silently.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import features as features_mod
from . import reporting
from .errors import InkError, TooShortError
from .model import SetId, load_corpus, parse_task_file, record_path, write_corpus
from .protocol import canonical_set_pairs, parse_pair_label, summarize_recovery
from .stats import build_matrix, default_rows
from .synth import generate_corpus, load_profile

ENV_OUT = "INKFATIGUE_OUT"

_FORMATS = ("tsv", "json", "markdown")
_TESTS = ("signed-rank", "rank-sum")
_SIDED = {"two": "two-sided", "one": "greater"}


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one analysis command."""

    corpus: Path | None
    out: Path | None
    alpha: float
    features: tuple[str, ...]
    pairs: tuple[tuple[SetId, SetId], ...]
    test: str
    alternative: str
    fmt: str


def _alpha_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number, got {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie strictly in (0, 1), got {value}")
    return value


def _features_arg(text: str) -> tuple[str, ...]:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    known = features_mod.full_catalog()
    unknown = [n for n in names if n not in known]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown feature(s): {', '.join(unknown)}")
    if not names:
        raise argparse.ArgumentTypeError("feature list is empty")
    # Keep catalog order regardless of how the user listed them.
    return tuple(n for n in known if n in names)


def _pairs_arg(text: str) -> tuple[tuple[SetId, SetId], ...]:
    try:
        wanted = {parse_pair_label(tok.strip()) for tok in text.split(",") if tok.strip()}
    except InkError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not wanted:
        raise argparse.ArgumentTypeError("pair list is empty")
    return tuple(p for p in canonical_set_pairs() if p in wanted)


_CONFIG_PARSERS = {
    "corpus": str,
    "out": str,
    "alpha": _alpha_arg,
    "features": _features_arg,
    "pairs": _pairs_arg,
    "format": str,
    "test": str,
    "sided": str,
}


def _read_config(path: Path) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise argparse.ArgumentTypeError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_PARSERS:
            raise argparse.ArgumentTypeError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _CONFIG_PARSERS[key](value)
    if values.get("format") not in (None, *_FORMATS):
        raise argparse.ArgumentTypeError(f"{path}: format must be one of {_FORMATS}")
    if values.get("test") not in (None, *_TESTS):
        raise argparse.ArgumentTypeError(f"{path}: test must be one of {_TESTS}")
    if values.get("sided") not in (None, *_SIDED):
        raise argparse.ArgumentTypeError(f"{path}: sided must be one of {tuple(_SIDED)}")
    return values


def _resolve(args: argparse.Namespace, key: str, fallback):
    """Flag wins over config file; overriding a config value is announced."""
    flag_value = getattr(args, key, None)
    config = getattr(args, "_config_values", {})
    if flag_value is not None:
        if key in config and config[key] != flag_value:
            print(
                f"note: --{key} on the command line overrides the config file value",
                file=sys.stderr,
            )
        return flag_value
    if key in config:
        return config[key]
    return fallback


def _out_dir(args: argparse.Namespace, parser: argparse.ArgumentParser) -> Path:
    out = _resolve(args, "out", os.environ.get(ENV_OUT))
    if not out:
        parser.error(f"--out is required (or set {ENV_OUT})")
    return Path(out)


def _run_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    corpus = _resolve(args, "corpus", None)
    if corpus is None:
        parser.error("--corpus is required")
    if not Path(corpus).is_dir():
        parser.error(f"corpus directory does not exist: {corpus}")
    sided = _resolve(args, "sided", "two")
    return RunConfig(
        corpus=Path(corpus),
        out=_out_dir(args, parser),
        alpha=_resolve(args, "alpha", 0.05),
        features=tuple(_resolve(args, "features", features_mod.DEFAULT_CATALOG)),
        pairs=tuple(_resolve(args, "pairs", canonical_set_pairs())),
        test=_resolve(args, "test", "signed-rank"),
        alternative=_SIDED[sided],
        fmt=_resolve(args, "format", "tsv"),
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args, parser) -> int:
    corpus_dir = _resolve(args, "corpus", None)
    if corpus_dir is None:
        parser.error("--corpus is required")
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        parser.error(f"corpus directory does not exist: {corpus_dir}")
    errors = 0
    files = sorted(corpus_dir.rglob("*.ink"))
    keys: dict[tuple, Path] = {}
    for path in files:
        try:
            record = parse_task_file(path.read_text(encoding="utf-8"))
        except InkError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            errors += 1
            continue
        if record.key in keys:
            print(
                f"error: {path}: duplicate of {keys[record.key]} "
                f"(subject={record.subject_id} set={record.set_id.value} task={record.task})",
                file=sys.stderr,
            )
            errors += 1
            continue
        keys[record.key] = path
        expected = record_path(record)
        if path.relative_to(corpus_dir) != expected:
            print(
                f"warning: {path}: headers say this file belongs at {expected}",
                file=sys.stderr,
            )
    if not files:
        print(f"warning: no task files found under {corpus_dir}", file=sys.stderr)
    if errors:
        print(f"{errors} invalid file(s) out of {len(files)}", file=sys.stderr)
        return 1
    if keys:
        corpus = load_corpus(corpus_dir)
        gaps = corpus.gaps()
        print(f"{len(files)} task file(s) valid, {len(corpus.subjects)} subject(s)")
        if gaps:
            print(f"{len(gaps)} missing (subject, set, task) cell(s):")
            for subject, set_id, task in gaps:
                print(f"  {subject} {set_id.value} task{task}")
        else:
            print("no gaps: every subject has all 5 sets x 9 tasks")
    return 0


def cmd_extract(args, parser) -> int:
    config = _run_config(args, parser)
    corpus = load_corpus(config.corpus)
    table = {}
    failures = []
    for record in corpus.records():
        try:
            table[record.key] = features_mod.extract_features(record, config.features)
        except TooShortError as exc:
            failures.append((record.key, str(exc)))
            table[record.key] = None
    out = config.out
    catalog = config.features
    if config.fmt == "tsv":
        content = _features_tsv_with_failures(table, catalog)
        path = reporting.write_text(out / "features.tsv", content)
    elif config.fmt == "json":
        path = reporting.write_text(
            out / "features.json", _features_json_with_failures(table, catalog)
        )
    else:
        ok_table = {k: v for k, v in table.items() if v is not None}
        path = reporting.write_text(
            out / "features.md", reporting.features_to_markdown(ok_table, catalog)
        )
    print(f"wrote {path} ({len(table)} record(s))")
    for key, message in failures:
        subject, set_id, task = key
        print(
            f"error: {subject}/{set_id.value}/task{task}: {message}", file=sys.stderr
        )
    return 1 if failures else 0


def _features_tsv_with_failures(table, catalog) -> str:
    ok = {k: v for k, v in table.items() if v is not None}
    lines = reporting.features_to_tsv(ok, catalog).splitlines()
    failed = sorted(k for k, v in table.items() if v is None)
    for subject, set_id, task in failed:
        row = [subject, set_id.value, str(task)]
        row += [reporting.NA] * len(catalog)
        row.append("extraction-failed")
        lines.append("\t".join(row))
    header, body = lines[0], lines[1:]
    body.sort(key=lambda ln: (ln.split("\t")[0], ln.split("\t")[1], int(ln.split("\t")[2])))
    return "\n".join([header, *body]) + "\n"


def _features_json_with_failures(table, catalog) -> str:
    import json

    rows = []
    for key in sorted(table, key=lambda k: (k[0], k[1].order, k[2])):
        subject, set_id, task = key
        vector = table[key]
        if vector is None:
            rows.append(
                {
                    "subject": subject,
                    "set": set_id.value,
                    "task": task,
                    "values": None,
                    "degenerate": ["extraction-failed"],
                }
            )
        else:
            rows.append(
                {
                    "subject": subject,
                    "set": set_id.value,
                    "task": task,
                    "values": {name: vector[name] for name in catalog},
                    "degenerate": sorted(vector.flags),
                }
            )
    return json.dumps(rows, indent=2, sort_keys=True) + "\n"


def cmd_compare(args, parser) -> int:
    config = _run_config(args, parser)
    corpus = load_corpus(config.corpus)
    rows = default_rows(catalog=config.features)
    matrix = build_matrix(
        corpus,
        rows,
        config.pairs,
        alpha=config.alpha,
        test=config.test,
        alternative=config.alternative,
    )
    out = config.out
    written = [reporting.write_text(out / "matrix.json", reporting.matrix_to_json(matrix))]
    if config.fmt == "tsv":
        written.append(reporting.write_text(out / "matrix.tsv", reporting.matrix_to_tsv(matrix)))
        written.append(
            reporting.write_text(out / "matrix_mask.tsv", reporting.mask_to_tsv(matrix))
        )
    elif config.fmt == "markdown":
        written.append(
            reporting.write_text(out / "matrix.md", reporting.matrix_to_markdown(matrix))
        )
    summary = summarize_recovery(matrix, config.alpha)
    written.append(
        reporting.write_text(out / "recovery.json", reporting.recovery_to_json(summary))
    )
    written.append(
        reporting.write_text(out / "recovery.txt", reporting.recovery_to_text(summary))
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_synth(args, parser) -> int:
    profile = load_profile(Path(args.profile))
    out = _out_dir(args, parser)
    corpus = generate_corpus(profile)
    written = write_corpus(corpus, out)
    print(f"wrote {len(written)} task file(s) under {out}")
    return 0


def cmd_report(args, parser) -> int:
    matrix = reporting.matrix_from_json(Path(args.matrix).read_text(encoding="utf-8"))
    alpha = _resolve(args, "alpha", matrix.alpha)
    fmt = _resolve(args, "format", "markdown")
    out = _out_dir(args, parser)
    written = []
    if fmt == "markdown":
        written.append(
            reporting.write_text(out / "matrix.md", reporting.matrix_to_markdown(matrix, alpha))
        )
    elif fmt == "tsv":
        written.append(reporting.write_text(out / "matrix.tsv", reporting.matrix_to_tsv(matrix)))
    written.append(
        reporting.write_text(out / "matrix_mask.tsv", reporting.mask_to_tsv(matrix, alpha))
    )
    summary = summarize_recovery(matrix, alpha)
    written.append(
        reporting.write_text(out / "recovery.json", reporting.recovery_to_json(summary))
    )
    written.append(
        reporting.write_text(out / "recovery.txt", reporting.recovery_to_text(summary))
    )
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inkfatigue",
        description="Online-handwriting fatigue analysis pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, out: bool = True):
        p.add_argument("--config", type=Path, help="key = value defaults for flags")
        if out:
            p.add_argument("--out", help=f"output directory (default ${ENV_OUT})")

    p_validate = sub.add_parser("validate", help="check every task file of a corpus")
    p_validate.add_argument("--corpus", help="corpus directory")
    common(p_validate, out=False)
    p_validate.set_defaults(func=cmd_validate)

    p_extract = sub.add_parser("extract", help="compute the feature table")
    p_extract.add_argument("--corpus", help="corpus directory")
    p_extract.add_argument("--features", type=_features_arg, help="comma-separated catalog subset")
    p_extract.add_argument("--format", choices=_FORMATS, dest="format")
    common(p_extract)
    p_extract.set_defaults(func=cmd_extract)

    p_compare = sub.add_parser("compare", help="build the set-pair comparison matrix")
    p_compare.add_argument("--corpus", help="corpus directory")
    p_compare.add_argument("--alpha", type=_alpha_arg, help="significance level (default 0.05)")
    p_compare.add_argument("--pairs", type=_pairs_arg, help="comma-separated set pairs")
    p_compare.add_argument("--features", type=_features_arg, help="comma-separated catalog subset")
    p_compare.add_argument("--format", choices=_FORMATS, dest="format")
    p_compare.add_argument("--test", choices=_TESTS, dest="test")
    p_compare.add_argument("--sided", choices=tuple(_SIDED), dest="sided")
    common(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    p_synth = sub.add_parser("synth", help="write a synthetic corpus from a profile")
    p_synth.add_argument("--profile", required=True, help="profile file (key = value)")
    common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_report = sub.add_parser("report", help="re-render a saved matrix JSON")
    p_report.add_argument("--matrix", required=True, help="matrix.json produced by compare")
    p_report.add_argument("--alpha", type=_alpha_arg, help="re-mask at this level")
    p_report.add_argument("--format", choices=_FORMATS, dest="format")
    common(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args._config_values = _read_config(args.config)
        else:
            args._config_values = {}
        return args.func(args, parser)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except InkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

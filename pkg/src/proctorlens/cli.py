"""Command-line interface: analyze, evaluate, simulate and plot.

Exit codes let pipelines branch without parsing output: 0 means the video
is Clean, 3 Suspicious, 4 candidate registration failed, 1 any I/O,
parse or validation error. Threshold precedence is command-line
``--override`` over config file over built-in defaults; the config file
path can also come from the PROCTORLENS_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from proctorlens.analyzer import CheatingAnalyzer
from proctorlens.events import AnalysisReport, read_report, write_report
from proctorlens.metrics import (
    MetricConfig,
    evaluate_samples,
    format_tables,
    metric_report_to_dict,
)
from proctorlens.records import (
    EngineConfig,
    EventKind,
    ParseError,
    ValidationError,
    parse_config_value,
    read_config,
    read_labels,
    read_record_stream,
    write_labels,
    write_record_stream,
)
from proctorlens.registration import RegistrationFailed
from proctorlens.simulate import generate, read_scenario

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_SUSPICIOUS = 3
EXIT_REGISTRATION_FAILED = 4

ENV_CONFIG = "PROCTORLENS_CONFIG"


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    path = args.config or os.environ.get(ENV_CONFIG)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = read_config(fh)
    else:
        cfg = EngineConfig()
    overrides = {}
    for item in args.override or []:
        if "=" not in item:
            raise ValidationError(f"--override expects key=value, got {item!r}")
        name, _, value = item.partition("=")
        overrides[name.strip()] = parse_config_value(name.strip(), value)
    return cfg.with_overrides(**overrides) if overrides else cfg


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    analyzer = CheatingAnalyzer.from_config(cfg)
    with open(args.records, "r", encoding="utf-8") as fh:
        try:
            report = analyzer.analyze(read_record_stream(fh), keep_per_frame=args.per_frame)
        except RegistrationFailed as exc:
            print(f"registration failed: {exc}", file=sys.stderr)
            return EXIT_REGISTRATION_FAILED
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_report(report, fh)
    else:
        write_report(report, sys.stdout)
    return EXIT_CLEAN if report.overall.value == "clean" else EXIT_SUSPICIOUS


def _read_manifest(path: str) -> list[tuple[Path, Path]]:
    base = Path(path).parent
    rows: list[tuple[Path, Path]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or not "".join(row).strip():
                continue
            cells = [c.strip() for c in row]
            if line_no == 1 and cells[0] == "records":
                continue
            if len(cells) != 2:
                raise ParseError("manifest rows must be 'records,labels'", line_no)
            rows.append((base / cells[0], base / cells[1]))
    if not rows:
        raise ValidationError("manifest lists no videos")
    return rows


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    mcfg = MetricConfig(
        iou_threshold=args.iou,
        segment_match_rate=args.match_rate,
        fps=cfg.fps,
        exclusive_instances=args.exclusive,
    )
    segment_lens = tuple(args.segment_len) if args.segment_len else (1.0, 3.0)
    rows = _read_manifest(args.manifest)
    samples = []
    statuses: list[dict] = []
    for records_path, labels_path in rows:
        entry = {"records": str(records_path), "labels": str(labels_path)}
        try:
            analyzer = CheatingAnalyzer.from_config(cfg)
            with open(records_path, "r", encoding="utf-8") as fh:
                report = analyzer.analyze(read_record_stream(fh))
            with open(labels_path, "r", encoding="utf-8") as fh:
                truth = read_labels(fh)
            samples.append((truth, report))
            entry["status"] = "ok"
            entry["overall"] = report.overall.value
        except (ParseError, ValidationError, RegistrationFailed, OSError) as exc:
            entry["status"] = "failed"
            entry["error"] = str(exc)
            print(f"{records_path}: {exc}", file=sys.stderr)
        statuses.append(entry)
    if not samples:
        print("evaluation failed for every manifest row", file=sys.stderr)
        return EXIT_ERROR
    metrics = evaluate_samples(samples, mcfg, segment_lens)
    sys.stdout.write(format_tables(metrics))
    failed = [s for s in statuses if s["status"] == "failed"]
    if failed:
        sys.stdout.write(f"\n{len(failed)} of {len(statuses)} videos failed; see stderr.\n")
    if args.out:
        payload = metric_report_to_dict(metrics)
        payload["videos"] = statuses
        _write_text(args.out, json.dumps(payload, indent=2, allow_nan=False) + "\n")
    return EXIT_CLEAN


def cmd_simulate(args: argparse.Namespace) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        scenario = read_scenario(fh)
    records, truth = generate(scenario)
    with open(args.out_records, "w", encoding="utf-8", newline="\n") as fh:
        write_record_stream(records, fh)
    with open(args.out_labels, "w", encoding="utf-8", newline="\n") as fh:
        write_labels(truth, fh)
    return EXIT_CLEAN


def _second_rows(report: AnalysisReport, truth) -> list[dict]:
    verdicts = report.per_frame
    truth_by_kind = {kind: [iv for iv in truth if iv.kind is kind] for kind in EventKind}
    pred_by_kind = {kind: report.decision(kind).intervals for kind in EventKind}
    max_t = verdicts[-1].timestamp_sec
    for intervals in list(truth_by_kind.values()) + list(pred_by_kind.values()):
        for iv in intervals:
            max_t = max(max_t, iv.end_sec)

    def covered(intervals, sec: float) -> int:
        return int(any(iv.start_sec < sec + 1.0 and iv.end_sec > sec for iv in intervals))

    rows = []
    vi = 0
    for sec in range(int(math.floor(max_t)) + 1):
        face_distance = None
        body_conf = 0.0
        device_conf = 0.0
        while vi < len(verdicts) and verdicts[vi].timestamp_sec < sec:
            vi += 1
        j = vi
        while j < len(verdicts) and verdicts[j].timestamp_sec < sec + 1.0:
            v = verdicts[j]
            if v.face_distance is not None:
                face_distance = v.face_distance if face_distance is None else max(face_distance, v.face_distance)
            body_conf = max(body_conf, v.multi_body_conf)
            device_conf = max(device_conf, v.max_device_conf)
            j += 1
        rows.append(
            {
                "t": sec,
                "truth_ap": covered(truth_by_kind[EventKind.ANOTHER_PERSON], sec),
                "pred_ap": covered(pred_by_kind[EventKind.ANOTHER_PERSON], sec),
                "truth_dev": covered(truth_by_kind[EventKind.DEVICE], sec),
                "pred_dev": covered(pred_by_kind[EventKind.DEVICE], sec),
                "truth_abs": covered(truth_by_kind[EventKind.ABSENCE], sec),
                "pred_abs": covered(pred_by_kind[EventKind.ABSENCE], sec),
                "face_distance": face_distance,
                "body_conf": body_conf,
                "device_conf": device_conf,
            }
        )
    return rows


def _plot_csv(rows: list[dict]) -> str:
    header = [
        "t", "truth_ap", "pred_ap", "truth_dev", "pred_dev", "truth_abs", "pred_abs",
        "face_distance", "body_conf", "device_conf",
    ]
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            value = row[key]
            cells.append("" if value is None else repr(value) if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _plot_svg(rows: list[dict], cfg: EngineConfig, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "proctorlens"
    ts = [r["t"] for r in rows]
    fig, axes = plt.subplots(3, 1, figsize=(12, 8), sharex=True)
    panels = [
        ("Another person", "truth_ap", "pred_ap"),
        ("Device", "truth_dev", "pred_dev"),
        ("Absence", "truth_abs", "pred_abs"),
    ]
    for ax, (title, truth_key, pred_key) in zip(axes, panels):
        for r in rows:
            if r[truth_key]:
                ax.axvspan(r["t"], r["t"] + 1, ymin=0.0, ymax=0.5, color="black", alpha=0.6, lw=0)
            if r[pred_key]:
                ax.axvspan(r["t"], r["t"] + 1, ymin=0.5, ymax=1.0, color="red", alpha=0.6, lw=0)
        ax.set_ylabel(title)
        ax.set_ylim(0, 1.05)
    dist = [r["face_distance"] for r in rows]
    axes[0].plot(ts, [d if d is not None else float("nan") for d in dist], color="green", lw=1.0, label="face distance")
    axes[0].plot(ts, [r["body_conf"] for r in rows], color="blue", lw=1.0, label="multi-body confidence")
    axes[0].axhline(cfg.face_distance_threshold, ls="--", color="gray", lw=0.8)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[1].plot(ts, [r["device_conf"] for r in rows], color="orange", lw=1.0, label="device confidence")
    axes[1].axhline(cfg.device_conf_threshold, ls="--", color="gray", lw=0.8)
    axes[1].legend(loc="upper right", fontsize=8)
    axes[2].set_xlabel("seconds")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_plot(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    with open(args.report, "r", encoding="utf-8") as fh:
        report = read_report(fh)
    if not report.per_frame:
        print("report has no per-frame table; rerun analyze with --per-frame", file=sys.stderr)
        return EXIT_ERROR
    with open(args.labels, "r", encoding="utf-8") as fh:
        truth = read_labels(fh)
    rows = _second_rows(report, truth)
    csv_text = _plot_csv(rows)
    if args.format == "svg":
        out = args.out or "timeline.svg"
        _plot_svg(rows, cfg, out)
        _write_text(str(Path(out).with_suffix(".csv")), csv_text)
    else:
        _write_text(args.out, csv_text)
    return EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proctorlens",
        description="Cheating-event analysis and evaluation for exam-video detection streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help=f"engine config file (default: ${ENV_CONFIG})")
        p.add_argument(
            "--override",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key; beats config file values",
        )
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("analyze", help="analyze a frame-record stream")
    p.add_argument("records", help="frame-record .jsonl stream")
    p.add_argument("--per-frame", action="store_true", help="include the per-frame table")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="score a manifest of (records, labels) pairs")
    p.add_argument("manifest", help="CSV manifest with header records,labels")
    p.add_argument("--iou", type=float, default=0.1, help="instance IOU threshold")
    p.add_argument(
        "--segment-len",
        type=float,
        action="append",
        help="segment length in seconds (repeatable; default 1 and 3)",
    )
    p.add_argument("--match-rate", type=float, default=0.5, help="segment positive-fraction rate")
    p.add_argument(
        "--exclusive", action="store_true", help="one-to-one instance matching instead of non-exclusive"
    )
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="generate a synthetic stream and labels from a scenario")
    p.add_argument("scenario", help="scenario .json file")
    p.add_argument("--out-records", required=True, help="output .jsonl stream path")
    p.add_argument("--out-labels", required=True, help="output labels .csv path")
    p.add_argument("--config", help="unused; accepted for symmetry")
    p.add_argument("--override", action="append", help="unused; accepted for symmetry")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="emit a per-second timeline from a report")
    p.add_argument("report", help="analysis report .json with per-frame table")
    p.add_argument("labels", help="ground-truth labels .csv")
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    common(p)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: report, mitigate, grid, partition, sample, realize, serve.
Exit codes: 0 success, 2 validation error, 1 IO error. All JSON output is
canonical and byte-identical to the HTTP service's payload for the same
logical request.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .errors import FairtabError, IOFailure, ValidationError
from .jsonio import canonical
from .measures import bias_report
from .mitigation import MitigationPlan
from .schema import Dataset, FairnessSchema, GroupKey, load_dataset
from .sampling import (
    PartitionSpec,
    export_dataset,
    partition_dataset,
    realize_plan,
    uniform_sample,
    append_rows,
)
from .service import ServiceConfig, grid_document, mitigate_document, report_document
from .summary import summarize


def _load(args) -> tuple:
    schema = FairnessSchema.from_file(args.schema)
    dataset = load_dataset(args.data, schema, lenient=getattr(args, "lenient", False))
    return schema, dataset


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOFailure(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _parse_group(schema: FairnessSchema, text: str) -> GroupKey:
    """Group syntax: 'attr=value,attr=value'; '*' as value is a wildcard.

    A bare value is accepted when the schema has a single sensitive
    attribute.
    """
    if "=" not in text:
        if len(schema.sensitive) == 1:
            value = None if text == "*" else text
            key = GroupKey((value,))
            key.validate(schema)
            return key
        raise ValidationError(
            f"group {text!r} must use attr=value pairs for multi-attribute schemas"
        )
    doc = {}
    for part in text.split(","):
        attr, _, value = part.partition("=")
        if not attr or not value:
            raise ValidationError(f"malformed group component {part!r}")
        if value != "*":
            doc[attr.strip()] = value.strip()
        elif attr.strip() not in schema.attribute_names:
            raise ValidationError(f"unknown attribute {attr!r}")
    return GroupKey.from_json(schema, doc)


def _parse_op(schema: FairnessSchema, text: str) -> dict:
    """Op syntax: kind:group:label:max, e.g. add:gender=Male:-:5100."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValidationError(f"op {text!r} must look like kind:group:label:max")
    kind, group_text, label, max_text = parts
    group = _parse_group(schema, group_text)
    try:
        max_value = int(max_text)
    except ValueError:
        raise ValidationError(f"op range {max_text!r} is not an integer") from None
    return {
        "kind": kind,
        "group": group.to_json(schema),
        "label": label,
        "max": max_value,
    }


def _cmd_report(args) -> int:
    schema, dataset = _load(args)
    summary = summarize(dataset)
    measures = tuple(m.strip() for m in args.measures.split(",") if m.strip())
    if args.format == "text":
        doc = report_document(summary, args.tau, measures)
        report = bias_report(summary, tolerance=args.tau)
        text = report.to_text()
        extra = [m for m in measures if m != "ub"]
        if extra:
            lines = text.splitlines()
            lines[0] += "  " + "  ".join(f"{m:>7}" for m in extra)
            for line, cell_doc in zip(range(1, len(lines)), doc["cells"]):
                lines[line] += "  " + "  ".join(
                    f"{cell_doc[m]:7.3f}" if cell_doc[m] is not None else f"{'-':>7}"
                    for m in extra
                )
            text = "\n".join(lines)
        _emit(args, text + "\n")
    else:
        _emit(args, canonical(report_document(summary, args.tau, measures)))
    return 0


def _cmd_mitigate(args) -> int:
    schema, dataset = _load(args)
    summary = summarize(dataset)
    body: dict = {"rounding": args.rounding}
    if args.targets:
        with open(args.targets, "r", encoding="utf-8") as fh:
            body["targets"] = json.load(fh)
    if args.profile_attrs:
        body["profile_attrs"] = [a.strip() for a in args.profile_attrs.split(",")]
    if args.costs:
        with open(args.costs, "r", encoding="utf-8") as fh:
            body["costs"] = json.load(fh)
    if args.budget is not None:
        body["budget"] = args.budget
    if args.order:
        with open(args.order, "r", encoding="utf-8") as fh:
            body["order"] = json.load(fh)
    body["tau"] = args.tau
    doc = mitigate_document(summary, body, args.tau)
    doc["digest"] = summary.digest
    _emit(args, canonical(doc))
    return 0


def _cmd_grid(args) -> int:
    schema, dataset = _load(args)
    summary = summarize(dataset)
    focus_group_text, _, focus_label = args.focus.rpartition(":")
    if not focus_group_text:
        raise ValidationError("focus must look like group:label")
    constraints = []
    if args.max_x is not None:
        constraints.append({"kind": "max_op", "axis": "x", "limit": args.max_x})
    if args.max_y is not None:
        constraints.append({"kind": "max_op", "axis": "y", "limit": args.max_y})
    if args.min_total is not None:
        constraints.append({"kind": "min_total", "limit": args.min_total})
    body = {
        "x_op": _parse_op(schema, args.x),
        "y_op": _parse_op(schema, args.y),
        "focus": {
            "group": _parse_group(schema, focus_group_text).to_json(schema),
            "label": focus_label,
        },
        "constraints": constraints,
        "contour": not args.no_contour,
    }
    if args.step:
        body["step"] = args.step
    if args.format == "csv":
        from . import grid as grid_mod

        x_op = grid_mod.PolicyOp(
            body["x_op"]["kind"],
            GroupKey.from_json(schema, body["x_op"]["group"]),
            body["x_op"]["label"],
            body["x_op"]["max"],
        )
        y_op = grid_mod.PolicyOp(
            body["y_op"]["kind"],
            GroupKey.from_json(schema, body["y_op"]["group"]),
            body["y_op"]["label"],
            body["y_op"]["max"],
        )
        focus = (_parse_group(schema, focus_group_text), focus_label)
        grid = grid_mod.bias_surface(summary, x_op, y_op, focus, step=args.step)
        parsed: list = []
        if args.max_x is not None:
            parsed.append(grid_mod.MaxOpValue(x_op, args.max_x))
        if args.max_y is not None:
            parsed.append(grid_mod.MaxOpValue(y_op, args.max_y))
        if args.min_total is not None:
            parsed.append(grid_mod.MinTotalRows(args.min_total))
        feasible = grid_mod.feasible_mask(grid, parsed) if parsed else None
        _emit(args, grid.to_csv(feasible))
    else:
        _emit(args, canonical(grid_document(summary, body)))
    return 0


def _cmd_partition(args) -> int:
    schema, dataset = _load(args)
    initial, pool = partition_dataset(dataset, PartitionSpec(args.size, args.seed))
    export_dataset(initial, args.out_initial)
    export_dataset(pool, args.out_pool)
    _emit(
        args,
        canonical(
            {
                "initial": {"path": args.out_initial, "n": initial.n},
                "pool": {"path": args.out_pool, "n": pool.n},
                "seed": args.seed,
            }
        ),
    )
    return 0


def _cmd_sample(args) -> int:
    schema, dataset = _load(args)
    sample = uniform_sample(dataset, args.size, args.seed)
    export_dataset(sample, args.out_sample)
    _emit(args, canonical({"sample": {"path": args.out_sample, "n": sample.n}, "seed": args.seed}))
    return 0


def _cmd_realize(args) -> int:
    schema = FairnessSchema.from_file(args.schema)
    pool = load_dataset(args.pool, schema)
    with open(args.plan, "r", encoding="utf-8") as fh:
        plan_doc = json.load(fh)
    plan = MitigationPlan.from_json(schema, plan_doc.get("plan", plan_doc))
    rows, report = realize_plan(plan, pool, args.seed)
    if args.base:
        base = load_dataset(args.base, schema)
        realized = append_rows(base, rows)
    else:
        realized = append_rows(Dataset(schema, ()), rows)
    export_dataset(realized, args.out_rows)
    _emit(
        args,
        canonical(
            {
                "rows": {"path": args.out_rows, "n": realized.n},
                "report": report.to_json(schema),
                "seed": args.seed,
            }
        ),
    )
    return 0


def _cmd_serve(args) -> int:  # pragma: no cover - spawns a server
    from . import service

    config = ServiceConfig.from_env()
    if args.bind:
        config = ServiceConfig(
            bind=args.bind,
            upload_cap=config.upload_cap,
            session_capacity=config.session_capacity,
            default_tau=config.default_tau,
        )
    service.run(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairtab",
        description="Group bias reports, mitigation plans, and what-if grids for tabular data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_args(p):
        p.add_argument("--data", required=True, help="CSV file with a header row")
        p.add_argument("--schema", required=True, help="JSON schema file")
        p.add_argument("--lenient", action="store_true", help="exclude bad rows instead of failing")
        p.add_argument("--out", help="write output to this file instead of stdout")

    p = sub.add_parser("report", help="bias report over all groups")
    add_data_args(p)
    p.add_argument("--tau", type=float, default=0.1, help="admissible |bias| (default 0.1)")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument(
        "--measures",
        default="ub",
        help="comma list of columns: ub,ir,or,md (classical ones computed "
        "per cell, group versus complement)",
    )
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("mitigate", help="compute a tuple-addition plan")
    add_data_args(p)
    p.add_argument("--targets", help="JSON file with per-cell target ratios")
    p.add_argument("--profile-attrs", help="comma list: preserve these attributes' profiles")
    p.add_argument("--rounding", choices=["floor", "nearest"], default="floor")
    p.add_argument("--costs", help="JSON cost model file")
    p.add_argument("--budget", type=float, help="budget for greedy funding")
    p.add_argument("--order", help="JSON priority order file")
    p.add_argument("--tau", type=float, default=0.1)
    p.set_defaults(func=_cmd_mitigate)

    p = sub.add_parser("grid", help="two-operation bias surface")
    add_data_args(p)
    p.add_argument("--x", required=True, help="x op, kind:group:label:max")
    p.add_argument("--y", required=True, help="y op, kind:group:label:max")
    p.add_argument("--focus", required=True, help="focus cell, group:label")
    p.add_argument("--step", type=int, help="lattice step (default max(1, range/512))")
    p.add_argument("--max-x", type=int, help="feasibility cap on x")
    p.add_argument("--max-y", type=int, help="feasibility cap on y")
    p.add_argument("--min-total", type=int, help="minimum resulting row count")
    p.add_argument("--no-contour", action="store_true")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("partition", help="split into initial sample and pool")
    add_data_args(p)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-initial", required=True)
    p.add_argument("--out-pool", required=True)
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("sample", help="uniform sample without replacement")
    add_data_args(p)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-sample", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("realize", help="draw a plan's rows from a pool")
    p.add_argument("--pool", required=True, help="candidate pool CSV")
    p.add_argument("--schema", required=True)
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", help="optional base CSV to append realized rows to")
    p.add_argument("--out-rows", required=True)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_realize)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--bind", help="host:port (default from FAIRTAB_BIND)")
    p.set_defaults(func=_cmd_serve)

    return parser


def cli_dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IOFailure as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except FairtabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


def main() -> None:  # pragma: no cover - console entry point
    sys.exit(cli_dispatch())

"""Serialization of check reports: canonical JSON and flat CSV.

Complex values are encoded as [real, imag] pairs. JSON output is canonical
(sorted keys, two-space indent, trailing newline) so byte comparison of
reports is meaningful. The published schema for every JSON report lives in
``schemas/report.schema.json``.
"""

from __future__ import annotations

import io
import json
from importlib import resources


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt_input(value) -> str:
    if isinstance(value, (list, tuple)):
        return ";".join(repr(float(v)) for v in value)
    return repr(float(value))


def rows_to_csv(rows: list[dict]) -> str:
    """Flat table for identity/mc rows: input, lhs, rhs, residual (+ z)."""
    if not rows:
        raise ValueError("no rows to serialize")
    with_z = "z" in rows[0]
    out = io.StringIO()
    header = "input,lhs_re,lhs_im,rhs_re,rhs_im,residual"
    if with_z:
        header += ",z_re,z_im"
    out.write(header + "\n")
    for row in rows:
        cells = [
            _fmt_input(row["input"]),
            repr(float(row["lhs"][0])),
            repr(float(row["lhs"][1])),
            repr(float(row["rhs"][0])),
            repr(float(row["rhs"][1])),
            repr(float(row["residual"])),
        ]
        if with_z:
            cells += [repr(float(row["z"][0])), repr(float(row["z"][1]))]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def eval_rows_to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    out.write("input,value_re,value_im\n")
    for row in rows:
        out.write(
            ",".join(
                [
                    _fmt_input(row["input"]),
                    repr(float(row["value"][0])),
                    repr(float(row["value"][1])),
                ]
            )
            + "\n"
        )
    return out.getvalue()


def suite_rows_to_csv(checks: list[dict]) -> str:
    out = io.StringIO()
    out.write("identity,label,passed,metric\n")
    for c in checks:
        metric = c.get("max_residual", c.get("worst_z", ""))
        out.write(
            f"{c['identity']},{c.get('label', '')},{int(c['passed'])},{metric}\n"
        )
    return out.getvalue()


def report_to_csv(doc: dict) -> str:
    kind = doc.get("kind")
    if kind in ("identity", "mc", "area"):
        return rows_to_csv(doc["rows"])
    if kind == "eval":
        return eval_rows_to_csv(doc["rows"])
    if kind == "suite":
        return suite_rows_to_csv(doc["checks"])
    raise ValueError(f"no CSV form for report kind {kind!r}")


def write_report(doc: dict, path: str, fmt: str = "json") -> None:
    if fmt == "json":
        text = canonical_json(doc)
    elif fmt == "csv":
        text = report_to_csv(doc)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected json or csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_report_schema() -> dict:
    with resources.files("idlaw").joinpath("schemas/report.schema.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)

"""
输出格式
所有数值统一保留 12 位有效数字, 保证 1e-12 级别的闭式比较可以往返
"""
import csv
import io
import json
import math
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

from app.models import SWEEP_COLUMNS, ProtocolConfig, SweepRow, TeleportReport

Document = Dict[str, Any]

FORMATS = ("text", "csv", "structured")


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        if not math.isfinite(value):
            return fmt(value)
        return float(f"{value:.12g}")
    return value


def teleport_document(
    scheme: str,
    config: Optional[ProtocolConfig],
    alpha: Iterable[float],
    report: TeleportReport,
    fidelity: float,
    regime: Any,
) -> Document:
    """单次传送的键值文档"""
    x_a, y_a = alpha
    doc: Document = {"scheme": scheme}
    if config is not None:
        doc.update(config.model_dump())
    doc.update(
        {
            "alpha_x": float(x_a),
            "alpha_y": float(y_a),
            "n_x_out": report.n_x_out,
            "n_y_out": report.n_y_out,
            "gain": report.gain,
            "mean_x_out": report.mean_x_out,
            "mean_y_out": report.mean_y_out,
            "var_x_out": report.var_x_out,
            "var_y_out": report.var_y_out,
            "fidelity_at_unity_gain": report.fidelity_at_unity_gain,
            "fidelity": fidelity,
            "regime": regime,
        }
    )
    return doc


def render_text(doc: Document) -> str:
    return "".join(f"{key}: {fmt(value)}\n" for key, value in doc.items())


def render_structured(doc: Document) -> str:
    return json.dumps({k: _json_value(v) for k, v in doc.items()}, indent=2, ensure_ascii=False) + "\n"


def render_document_csv(doc: Document) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(doc))
    writer.writerow([fmt(v) for v in doc.values()])
    return buf.getvalue()


def render_document(doc: Document, output_format: str) -> str:
    if output_format == "structured":
        return render_structured(doc)
    if output_format == "csv":
        return render_document_csv(doc)
    return render_text(doc)


# =========================
# 扫描表
# =========================
def render_sweep_csv(rows: List[SweepRow]) -> str:
    """固定表头, 列顺序与 SweepRow 字段一致"""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([fmt(getattr(row, col)) for col in SWEEP_COLUMNS])
    return buf.getvalue()


def render_sweep(rows: List[SweepRow], output_format: str) -> str:
    if output_format == "structured":
        payload = [{k: _json_value(v) for k, v in row.model_dump().items()} for row in rows]
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if output_format == "text":
        return "\n".join(render_text(row.model_dump()) for row in rows)
    return render_sweep_csv(rows)


def parse_sweep_csv(text: str) -> List[SweepRow]:
    """读回 render_sweep_csv 的输出"""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
        raise ValueError(f"CSV 表头不匹配: {reader.fieldnames}")
    rows = []
    for raw in reader:
        raw["eve_wins"] = raw["eve_wins"] == "true"
        rows.append(SweepRow.model_validate(raw))
    return rows

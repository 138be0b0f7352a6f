import csv
import io
import json
import logging
import re
from typing import Any, Dict, Iterable, List, Optional, Tuple

from src.config import Config
from src.core import InputError, KingReport, WeakSelection
from src.experiments import EscapeTrace, SineKingReport, VerificationReport
from src.sampled_spaces import ContinuityCertificate, SampledSpace

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("level", "sample_size", "king_ids", "king_metric")


class DocumentError(InputError):
    """A JSON document does not match its schema."""


def dumps(doc: Dict[str, Any]) -> str:
    # Canonical form: fixed key order and indentation, trailing newline
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except UnicodeDecodeError as e:
        raise DocumentError(f"{path}: not UTF-8 ({e})") from e
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path}: invalid JSON ({e})") from e


def tournament_document(sel: WeakSelection, spec: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    doc = {
        "format_version": Config.DOCUMENT_FORMAT_VERSION,
        "players": list(sel.players),
        "choices": [{"i": i, "j": j, "pick": pick} for i, j, pick in sel.picks()],
    }
    if spec is not None:
        doc["spec"] = spec
    return doc


def _int_field(record: Any, name: str, where: str) -> int:
    value = record.get(name) if isinstance(record, dict) else None
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"{where}.{name}: expected an integer")
    return value


def parse_tournament(doc: Any) -> WeakSelection:
    if not isinstance(doc, dict):
        raise DocumentError("tournament document must be a JSON object")
    version = doc.get("format_version")
    if version != Config.DOCUMENT_FORMAT_VERSION:
        raise DocumentError(f"format_version: unsupported value {version!r}")
    players = doc.get("players")
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise DocumentError("players: expected a list of strings")
    if not players:
        raise DocumentError("players: the player set must be non-empty")
    choices = doc.get("choices")
    if not isinstance(choices, list):
        raise DocumentError("choices: expected a list")

    records = []
    for k, record in enumerate(choices):
        where = f"choices[{k}]"
        i = _int_field(record, "i", where)
        j = _int_field(record, "j", where)
        pick = _int_field(record, "pick", where)
        if not i < j:
            raise DocumentError(f"{where}: pair ({i}, {j}) must satisfy i < j")
        if pick not in (i, j):
            raise DocumentError(f"{where}: pick {pick} is not a member of pair ({i}, {j})")
        records.append((i, j, pick))
    try:
        return WeakSelection.from_picks(len(players), records, players)
    except InputError as e:
        raise DocumentError(f"choices: {e}") from e


def report_document(sel: WeakSelection, report: KingReport, witnesses: bool = False,
                    metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    ids = sel.players
    doc: Dict[str, Any] = {
        "kings": [ids[z] for z in sorted(report.kings)],
        "metadata": metadata or {},
    }
    if witnesses:
        doc["k_sets"] = {ids[x]: [ids[z] for z in sorted(ks)] for x, ks in report.k_sets.items()}
        doc["witnesses"] = [[ids[z], ids[y], ids[x]] for z, y, x in report.witness_triples()]
    return doc


def space_document(space: SampledSpace) -> Dict[str, Any]:
    return {
        "format_version": Config.DOCUMENT_FORMAT_VERSION,
        "points": space.points.tolist(),
        "labels": list(space.labels) if space.labels is not None else None,
        "params": list(space.params) if space.params is not None else None,
    }


def parse_space(doc: Any) -> SampledSpace:
    if not isinstance(doc, dict):
        raise DocumentError("space document must be a JSON object")
    points = doc.get("points")
    if not isinstance(points, list):
        raise DocumentError("points: expected a list of [x, y] pairs")
    for k, p in enumerate(points):
        if (not isinstance(p, list) or len(p) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)):
            raise DocumentError(f"points[{k}]: expected [x, y]")
    labels = doc.get("labels")
    params = doc.get("params")
    try:
        return SampledSpace(
            [[float(c) for c in p] for p in points],
            tuple(str(s) for s in labels) if labels is not None else None,
            tuple(float(s) for s in params) if params is not None else None,
        )
    except InputError as e:
        raise DocumentError(str(e)) from e


def certificate_document(cert: ContinuityCertificate) -> Dict[str, Any]:
    return {
        "delta": cert.delta,
        "epsilon": cert.epsilon,
        "verdict": cert.verdict,
        "violation_count": cert.violation_count,
        "violations": [
            {"a": v.a, "b": v.b, "a_prime": v.a2, "b_prime": v.b2, "explanation": v.explanation}
            for v in cert.violations
        ],
    }


def trace_document(trace: EscapeTrace) -> Dict[str, Any]:
    return {
        "mode": trace.mode,
        "metric": trace.metric_name,
        "levels": [
            {
                "level": rec.level,
                "resolution": rec.resolution,
                "sample_size": rec.sample_size,
                "king_ids": list(rec.kings),
                "king_coordinates": list(rec.king_coordinates),
                "king_metric": rec.metric,
            }
            for rec in trace.levels
        ],
    }


def trace_csv(trace: EscapeTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in trace.levels:
        writer.writerow([rec.level, rec.sample_size, ";".join(str(z) for z in rec.kings), repr(rec.metric)])
    return buf.getvalue()


def verification_document(report: VerificationReport) -> Dict[str, Any]:
    return {
        "n_max": report.n_max,
        "counts": {str(n): c for n, c in sorted(report.counts.items())},
        "total": report.total,
        "failures": report.failures,
        "metadata": {"elapsed_seconds": report.elapsed},
    }


def sine_document(report: SineKingReport) -> Dict[str, Any]:
    return {
        "n_points": report.n_points,
        "delta": report.delta,
        "epsilon": report.epsilon,
        "sigma_min_kings": list(report.min_kings),
        "sigma_max_kings": list(report.max_kings),
        "sigma_min_continuity": certificate_document(report.min_certificate),
        "sigma_max_continuity": certificate_document(report.max_certificate),
        "control_points": report.control_points,
        "control_continuity": certificate_document(report.control_certificate),
        "control_straddles_threshold": report.control_straddles,
        "passed": report.passed,
    }


_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|-?(\.[0-9]+|[0-9]+(\.[0-9]*)?)")


def _dot_id(name: str) -> str:
    if _DOT_ID.fullmatch(name):
        return name
    return '"' + name.replace('\\', '\\\\').replace('"', '\\"') + '"'


def to_dot(sel: WeakSelection, kings: Iterable[int] = ()) -> str:
    """One edge a -> b per pair with a ->_phi b; kings drawn as double circles."""
    kings = set(kings)
    lines = ["digraph tournament {"]
    for a, name in enumerate(sel.players):
        attrs = " [shape=doublecircle, style=bold]" if a in kings else ""
        lines.append(f"  {_dot_id(name)}{attrs};")
    edges: List[Tuple[int, int]] = []
    for i, j, pick in sel.picks():
        # the unpicked member points at the picked one
        edges.append((i, j) if pick == j else (j, i))
    for a, b in sorted(edges):
        lines.append(f"  {_dot_id(sel.players[a])} -> {_dot_id(sel.players[b])};")
    lines.append("}")
    return "\n".join(lines) + "\n"

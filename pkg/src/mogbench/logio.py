"""JSON-lines run logs, external-log ingestion and metric reports.

A native log starts with a header line and continues with one data line per
trial, round, excess return, run summary, calibration or availability
check. Every line carries the schema version, the master seed and the
config digest. Fields are written in a fixed order, times with six
fractional digits, so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import IO, Any, Iterable

from .errors import IngestError
from .jsonfmt import encode, sec
from .metrics import MetricsReport
from .protocols import (
    AvailabilityRecord,
    ProtocolRunResult,
    RoundEntry,
    RunLog,
    SopCalibration,
    TrialRecord,
)
from .scene import SCHEMA
from .sim import PhaseTimes

# tolerance for derived values printed next to the fields they derive from
_PRINT_TOL = 2e-6


# -- writing -----------------------------------------------------------------


def _stamp(log: RunLog) -> dict[str, Any]:
    return {"master_seed": log.master_seed, "config_digest": log.config_digest}


def _record_fields(rec: TrialRecord) -> dict[str, Any]:
    ph = rec.phase
    return {
        "protocol": rec.protocol,
        "target_p": rec.target_p,
        "q": rec.q,
        "t0": sec(ph.t0) if ph else None,
        "t1": sec(ph.t1) if ph else None,
        "t2": sec(ph.t2) if ph else None,
        "t3": sec(ph.t3) if ph else None,
        "t_a": sec(ph.t_a) if ph else None,
        "t_g": sec(ph.t_g) if ph else None,
        "t_l": sec(ph.t_l) if ph else None,
        "t_OPO": sec(ph.t_OPO) if ph else None,
        "settle_wait": sec(rec.settle_wait),
        "grouping_moves_used": rec.grouping_moves_used,
        "scene_seed": rec.scene_seed,
        "trial_seed": rec.trial_seed,
        "retained": list(rec.retained),
        "failure": rec.failure,
    }


def log_lines(log: RunLog) -> list[str]:
    data: list[dict[str, Any]] = []
    for i, rec in enumerate(log.trials):
        data.append({"kind": "trial", "index": i, **_record_fields(rec)})
    for r, run in enumerate(log.runs):
        for kind, entries in (("round", run.rounds), ("excess", run.excess)):
            for j, e in enumerate(entries):
                data.append({"kind": kind, "run": r, "index": j, **_record_fields(e.record), "t_transfer": sec(e.t_transfer)})
        data.append(
            {
                "kind": "run",
                "run": r,
                "protocol": run.protocol,
                "N_target": run.N_target,
                "initial_count": run.initial_count,
                "m_OPO": run.m_OPO,
                "excess_returns": run.excess_returns,
                "delivered": run.delivered,
                "t_total": sec(run.t_total),
                "t_product": sec(run.t_product),
                "completed": run.completed,
                "flag": run.flag,
            }
        )
    if log.calibration is not None:
        cal = log.calibration
        data.append(
            {
                "kind": "calibration",
                "trials": cal.trials,
                "pick_sum": sec(cal.pick_sum),
                "full_sum": sec(cal.full_sum),
                "t_SOG": sec(cal.t_SOG),
                "t_sopt": sec(cal.t_sopt),
            }
        )
    for i, a in enumerate(log.availability):
        data.append(
            {
                "kind": "availability",
                "index": i,
                "scene_seed": a.scene_seed,
                "object_count": a.object_count,
                "feasible_clusters": a.feasible_clusters,
                "available": a.available,
            }
        )
    if not data:
        return []
    header = {
        "schema": SCHEMA,
        "kind": "header",
        "protocol": log.protocol,
        "source": log.source,
        "target": log.target,
        **_stamp(log),
        "config": log.config,
    }
    stamp = _stamp(log)
    return [encode(header)] + [encode({"schema": SCHEMA, **d, **stamp}) for d in data]


def emit_log(log: RunLog, sink: IO[str]) -> None:
    """Write the log as JSON lines; a log without records writes nothing."""
    for line in log_lines(log):
        sink.write(line + "\n")


def dumps_log(log: RunLog) -> str:
    buf = io.StringIO()
    emit_log(log, buf)
    return buf.getvalue()


# -- reading -----------------------------------------------------------------


def _get(rec: dict, key: str, row: int, kinds, required: bool = True):
    if key not in rec:
        raise IngestError("missing field", row=row, field=key)
    value = rec[key]
    if value is None:
        if required:
            raise IngestError("must not be null", row=row, field=key)
        return None
    if isinstance(value, bool) and bool not in kinds:
        raise IngestError(f"expected {'/'.join(k.__name__ for k in kinds)}", row=row, field=key)
    if not isinstance(value, kinds):
        raise IngestError(f"expected {'/'.join(k.__name__ for k in kinds)}, got {type(value).__name__}", row=row, field=key)
    return value


_NUM = (int, float)


def _phase_from(rec: dict, row: int) -> PhaseTimes | None:
    names = ("t0", "t1", "t2", "t3", "t_a", "t_g", "t_l", "t_OPO")
    vals = [_get(rec, n, row, _NUM, required=False) for n in names]
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        missing = names[[v is None for v in vals].index(True)]
        raise IngestError("phase times must be all present or all null", row=row, field=missing)
    t0, t1, t2, t3, t_a, t_g, t_l, t_opo = (float(v) for v in vals)
    if min(t_a, t_g, t_l) < 0:
        raise IngestError("phase durations must be non-negative", row=row, field="t_a")
    for name, got, want in (("t_a", t_a, t1 - t0), ("t_g", t_g, t2 - t1), ("t_l", t_l, t3 - t2)):
        if abs(got - want) > _PRINT_TOL:
            raise IngestError("duration disagrees with timestamps", row=row, field=name)
    total = t_a + t_g + t_l
    if abs(total - t_opo) > _PRINT_TOL:
        raise IngestError("t_OPO is not t_a + t_g + t_l", row=row, field="t_OPO")
    return PhaseTimes(t0, t1, t2, t3, t_a, t_g, t_l, total)


def _record_from(rec: dict, row: int) -> TrialRecord:
    protocol = _get(rec, "protocol", row, (str,))
    if protocol not in ("OPO", "APT_round", "PTA_round", "SOP"):
        raise IngestError(f"unknown record protocol {protocol!r}", row=row, field="protocol")
    target = _get(rec, "target_p", row, (int,))
    q = _get(rec, "q", row, (int,))
    if target < 1:
        raise IngestError("must be >= 1", row=row, field="target_p")
    if q < 0:
        raise IngestError("must be >= 0", row=row, field="q")
    retained = _get(rec, "retained", row, (list,))
    return TrialRecord(
        protocol,
        target,
        q,
        _phase_from(rec, row),
        float(_get(rec, "settle_wait", row, _NUM)),
        _get(rec, "grouping_moves_used", row, (int,)),
        _get(rec, "scene_seed", row, (int,), required=False),
        _get(rec, "trial_seed", row, (int,), required=False),
        tuple(int(i) for i in retained),
        _get(rec, "failure", row, (str,), required=False),
    )


def _check_close(logged, value, row: int, field: str) -> None:
    if logged is None and value is None:
        return
    if logged is None or value is None or abs(float(logged) - value) > _PRINT_TOL:
        raise IngestError(f"logged value {logged} disagrees with ledger value {value}", row=row, field=field)


def parse_log(text: str) -> RunLog:
    """Parse and validate a native JSON-lines log."""
    lines = text.splitlines()
    if not any(ln.strip() for ln in lines):
        raise IngestError("empty log", row=1)
    parsed: list[tuple[int, dict]] = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc.msg}", row=n) from None
        if not isinstance(rec, dict):
            raise IngestError("record must be a JSON object", row=n)
        if rec.get("schema") != SCHEMA:
            raise IngestError(f"expected schema {SCHEMA!r}", row=n, field="schema")
        parsed.append((n, rec))
    row, header = parsed[0]
    if header.get("kind") != "header":
        raise IngestError("first line must be the header", row=row, field="kind")
    protocol = _get(header, "protocol", row, (str,))
    digest = _get(header, "config_digest", row, (str,))
    master = _get(header, "master_seed", row, (int,), required=False)
    trials: list[TrialRecord] = []
    runs: list[ProtocolRunResult] = []
    pending: dict[str, list[RoundEntry]] = {"round": [], "excess": []}
    calibration = None
    availability: list[AvailabilityRecord] = []
    for row, rec in parsed[1:]:
        if rec.get("config_digest") != digest:
            raise IngestError("config digest differs from header", row=row, field="config_digest")
        if rec.get("master_seed") != master:
            raise IngestError("master seed differs from header", row=row, field="master_seed")
        kind = rec.get("kind")
        if kind == "trial":
            trials.append(_record_from(rec, row))
        elif kind in ("round", "excess"):
            if _get(rec, "run", row, (int,)) != len(runs):
                raise IngestError("round belongs to an unexpected run", row=row, field="run")
            t_tr = _get(rec, "t_transfer", row, _NUM, required=False)
            pending[kind].append(RoundEntry(_record_from(rec, row), None if t_tr is None else float(t_tr)))
        elif kind == "run":
            if _get(rec, "run", row, (int,)) != len(runs):
                raise IngestError("run summaries out of order", row=row, field="run")
            run = ProtocolRunResult(
                _get(rec, "protocol", row, (str,)),
                _get(rec, "N_target", row, (int,), required=False),
                _get(rec, "initial_count", row, (int,)),
                tuple(pending["round"]),
                tuple(pending["excess"]),
                _get(rec, "completed", row, (bool,)),
                _get(rec, "flag", row, (str,), required=False),
            )
            for field in ("m_OPO", "excess_returns", "delivered"):
                if _get(rec, field, row, (int,)) != getattr(run, field):
                    raise IngestError("disagrees with the round ledger", row=row, field=field)
            _check_close(rec.get("t_total"), run.t_total, row, "t_total")
            runs.append(run)
            pending = {"round": [], "excess": []}
        elif kind == "calibration":
            calibration = SopCalibration(
                float(_get(rec, "pick_sum", row, _NUM)),
                float(_get(rec, "full_sum", row, _NUM)),
                _get(rec, "trials", row, (int,)),
            )
            if calibration.trials < 1:
                raise IngestError("must be >= 1", row=row, field="trials")
            _check_close(rec.get("t_sopt"), calibration.t_sopt, row, "t_sopt")
        elif kind == "availability":
            availability.append(
                AvailabilityRecord(
                    _get(rec, "scene_seed", row, (int,)),
                    _get(rec, "object_count", row, (int,)),
                    _get(rec, "feasible_clusters", row, (int,)),
                )
            )
        else:
            raise IngestError(f"unknown record kind {kind!r}", row=row, field="kind")
    if pending["round"] or pending["excess"]:
        raise IngestError("rounds without a closing run summary", row=parsed[-1][0], field="kind")
    return RunLog(
        protocol,
        master,
        digest,
        header.get("config"),
        header.get("source", "native"),
        tuple(trials),
        tuple(runs),
        calibration,
        tuple(availability),
        header.get("target"),
    )


# -- external logs -----------------------------------------------------------

EXTERNAL_COLUMNS = ("protocol", "run", "target", "count", "k", "t_a", "t_g", "t_l", "t_transfer", "excess_returns")


def _cell(row: dict, name: str, mapping: dict[str, str]):
    value = row.get(mapping.get(name, name))
    if value is None:
        return None
    value = value.strip()
    return value or None


def _as_int(text, n: int, field: str, minimum: int) -> int:
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise IngestError(f"expected an integer, got {text!r}", row=n, field=field) from None
    if value < minimum:
        raise IngestError(f"must be >= {minimum}, got {value}", row=n, field=field)
    return value


def _as_time(text, n: int, field: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise IngestError(f"expected seconds, got {text!r}", row=n, field=field) from None
    if not math.isfinite(value) or value < 0:
        raise IngestError(f"must be a non-negative time, got {text!r}", row=n, field=field)
    return value


def ingest_external(text: str, mapping: dict[str, str] | None = None, protocol: str | None = None) -> RunLog:
    """Convert an external CSV trial log (robot or human runs) into a RunLog.

    Canonical columns (rename via ``mapping``, canonical -> external name):

    ``protocol``  opo | apt | pta (or pass ``protocol=``)
    ``run``       run id grouping rounds of one APT/PTA procedure
    ``target``    objects aimed for in this trial/round (>= 1)
    ``count``     objects actually grasped (>= 0)
    ``k``         APT: N_target, PTA: initial object count (per run)
    ``t_a``, ``t_g``, ``t_l``  optional phase durations, seconds
    ``t_transfer``             optional transfer time, seconds
    ``excess_returns``         optional per-run excess count (APT)

    Rows missing time columns produce count-only metrics.
    """
    mapping = dict(mapping or {})
    unknown = set(mapping) - set(EXTERNAL_COLUMNS)
    if unknown:
        raise IngestError(f"mapping names unknown columns {sorted(unknown)}")
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise IngestError("empty log", row=1)
    rows = list(enumerate(reader, start=2))
    if not rows:
        raise IngestError("log has a header but no rows", row=1)
    protos = set()
    records: list[tuple[int, str | None, TrialRecord, float | None, int | None, int]] = []
    for n, row in rows:
        if None in row:
            raise IngestError("more cells than header columns", row=n)
        proto = (_cell(row, "protocol", mapping) or protocol or "").lower()
        if proto not in ("opo", "apt", "pta"):
            raise IngestError(f"unknown protocol {proto!r}", row=n, field="protocol")
        protos.add(proto)
        target = _as_int(_cell(row, "target", mapping), n, "target", 1)
        count = _as_int(_cell(row, "count", mapping), n, "count", 0)
        times = [_cell(row, c, mapping) for c in ("t_a", "t_g", "t_l")]
        phase = None
        if any(t is not None for t in times):
            if any(t is None for t in times):
                raise IngestError("t_a, t_g and t_l must be given together", row=n, field="t_a")
            phase = PhaseTimes.from_durations(*(_as_time(t, n, c) for t, c in zip(times, ("t_a", "t_g", "t_l"))))
        t_tr = _cell(row, "t_transfer", mapping)
        t_tr = None if t_tr is None else _as_time(t_tr, n, "t_transfer")
        kind = {"opo": "OPO", "apt": "APT_round", "pta": "PTA_round"}[proto]
        if proto != "opo" and target == 1:
            kind = "SOP"
        rec = TrialRecord(kind, target, count, phase, settle_wait=0.0)
        run = _cell(row, "run", mapping)
        k = _cell(row, "k", mapping)
        excess = _cell(row, "excess_returns", mapping)
        records.append(
            (n, run, rec, t_tr, None if k is None else _as_int(k, n, "k", 1), 0 if excess is None else _as_int(excess, n, "excess_returns", 0))
        )
    if len(protos) != 1:
        raise IngestError(f"log mixes protocols {sorted(protos)}", field="protocol")
    proto = protos.pop()
    if proto == "opo":
        return RunLog("opo", source="external", trials=tuple(r[2] for r in records))
    grouped: dict[str, list] = {}
    for item in records:
        n, run = item[0], item[1]
        if run is None:
            raise IngestError("APT/PTA rows need a run id", row=n, field="run")
        grouped.setdefault(run, []).append(item)
    runs = []
    for run_id, items in grouped.items():
        ks = {it[4] for it in items}
        if None in ks or len(ks) != 1:
            raise IngestError(f"run {run_id!r} needs one k value on every row", row=items[0][0], field="k")
        excesses = {it[5] for it in items}
        if len(excesses) != 1:
            raise IngestError(f"run {run_id!r} has inconsistent excess_returns", row=items[0][0], field="excess_returns")
        k = ks.pop()
        n_excess = excesses.pop()
        rounds = tuple(RoundEntry(it[2], it[3]) for it in items)
        excess = tuple(RoundEntry(TrialRecord("SOP", 1, 1, None, settle_wait=0.0), None) for _ in range(n_excess))
        picked = sum(e.record.q for e in rounds)
        if proto == "apt":
            result = ProtocolRunResult("APT", k, k, rounds, excess, picked - n_excess == k, None)
        else:
            result = ProtocolRunResult("PTA", None, k, rounds, (), picked == k, None)
        if not result.completed:
            result = ProtocolRunResult(result.protocol, result.N_target, result.initial_count, rounds, result.excess, False, "incomplete")
        runs.append(result)
    return RunLog(proto, source="external", runs=tuple(runs))


# -- reports -----------------------------------------------------------------


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report.as_dict()) + "\n"


def report_from_json(text: str) -> MetricsReport:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid report JSON: {exc.msg}", row=1) from None
    names = MetricsReport.field_names()
    unknown = set(data) - set(names)
    if unknown:
        raise IngestError(f"unknown report fields {sorted(unknown)}", row=1)
    return MetricsReport(**data)


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report(metrics: MetricsReport, format: str = "text-table") -> str:
    """Render a report as an aligned text table or a one-row CSV."""
    values = metrics.as_dict()
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(values.keys())
        writer.writerow(_csv_value(v) for v in values.values())
        return buf.getvalue()
    if format != "text-table":
        raise ValueError(f"unknown report format {format!r}")
    width = max(len(k) for k in values)
    lines = [f"{'metric'.ljust(width)}  value", f"{'-' * width}  {'-' * 12}"]
    for k, v in values.items():
        if v is None:
            text = "-"
        elif isinstance(v, float):
            text = f"{v:.6f}"
        else:
            text = str(v)
        lines.append(f"{k.ljust(width)}  {text}")
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> dict[str, Any]:
    """Inverse of ``report(..., "csv")``: empty cells become None."""
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) != 2:
        raise IngestError("report CSV needs one header and one value row")
    out: dict[str, Any] = {}
    for name, cell in zip(rows[0], rows[1]):
        if cell == "":
            out[name] = None
        elif name == "protocol":
            out[name] = cell
        else:
            try:
                out[name] = int(cell)
            except ValueError:
                out[name] = float(cell)
    return out


def iter_logs(paths: Iterable[str]):
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            yield path, fh.read()

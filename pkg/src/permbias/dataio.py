"""Season tables, Elo files and analysis reports.

Season CSV (long format, UTF-8, dot decimals)::

    league,season,team,preference,final_rank

Elo CSV::

    team,elo,win_probability

Reports are written as JSON (``{"meta": {...}, "seasons": [...]}``) or as a
flat CSV with one season per row.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .calibration import EloObservation
from .errors import (
    DuplicateTeamInSeason,
    MalformedRow,
    NonPositiveWeight,
    RankGap,
    TooFewObjects,
)
from .model import PreferenceVector, validate

SEASON_HEADER = ("league", "season", "team", "preference", "final_rank")
ELO_HEADER = ("team", "elo", "win_probability")
MAX_SEASON_SIZE = 64

BUNDLED = {
    "premier_league": "premier_league.csv",
    "la_liga": "la_liga.csv",
}
_BUNDLED_LEAGUES = {"Premier League": (20, 22), "La Liga": (20, 22)}


@dataclass(frozen=True)
class SeasonRecord:
    """One league season: prior preference and final rank for every team."""

    league: str
    season: str
    teams: tuple[str, ...]
    weights: tuple[float, ...]
    ranks: tuple[int, ...]

    def __post_init__(self):
        n = len(self.teams)
        if not (len(self.weights) == len(self.ranks) == n):
            raise MalformedRow(f"{self.league} {self.season}: column lengths differ")
        if n < 2:
            raise TooFewObjects(f"{self.league} {self.season}: {n} team(s), need at least 2")
        if n > MAX_SEASON_SIZE:
            raise MalformedRow(f"{self.league} {self.season}: {n} teams exceeds the limit of {MAX_SEASON_SIZE}")
        seen = set()
        for t in self.teams:
            if t in seen:
                raise DuplicateTeamInSeason(f"{self.league} {self.season}: team {t!r} listed twice")
            seen.add(t)
        if sorted(self.ranks) != list(range(1, n + 1)):
            raise RankGap(f"{self.league} {self.season}: final ranks {sorted(self.ranks)} are not 1..{n}")
        try:
            validate(self.weights)
        except NonPositiveWeight as exc:
            raise NonPositiveWeight(f"{self.league} {self.season}: {exc}") from None

    @property
    def n(self) -> int:
        return len(self.teams)

    @property
    def preferences(self) -> PreferenceVector:
        return PreferenceVector(np.array(self.weights), self.teams)

    @property
    def observed(self) -> np.ndarray:
        """Team indices in final-rank order, champion first."""
        return np.argsort(np.array(self.ranks), kind="stable").astype(np.intp)


def _rows(path) -> tuple[list[str] | None, list[list[str]]]:
    with open(path, newline="", encoding="utf-8-sig") as f:
        rows = [r for r in csv.reader(f) if any(c.strip() for c in r)]
    if not rows:
        return None, []
    return [c.strip() for c in rows[0]], rows[1:]


def parse_seasons(path) -> list[SeasonRecord]:
    """Read a season CSV; seasons come back in order of first appearance."""
    header, rows = _rows(path)
    if header is None:
        return []
    if tuple(header) != SEASON_HEADER:
        raise MalformedRow(f"{path}: expected header {','.join(SEASON_HEADER)}, got {','.join(header)}")
    groups: dict[tuple[str, str], list[tuple[str, float, int]]] = {}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(SEASON_HEADER):
            raise MalformedRow(f"{path}:{lineno}: expected {len(SEASON_HEADER)} fields, got {len(row)}")
        league, season, team, pref, rank = (c.strip() for c in row)
        try:
            weight = float(pref)
        except ValueError:
            raise MalformedRow(f"{path}:{lineno}: preference {pref!r} is not a number") from None
        try:
            r = int(rank)
        except ValueError:
            raise MalformedRow(f"{path}:{lineno}: final_rank {rank!r} is not an integer") from None
        if not (math.isfinite(weight) and weight > 0):
            raise NonPositiveWeight(f"{path}:{lineno}: preference {pref!r} must be finite and > 0")
        if r < 1:
            raise RankGap(f"{path}:{lineno}: final_rank {r} must be a positive integer")
        groups.setdefault((league, season), []).append((team, weight, r))

    records = []
    for (league, season), entries in groups.items():
        rec = SeasonRecord(
            league=league,
            season=season,
            teams=tuple(e[0] for e in entries),
            weights=tuple(e[1] for e in entries),
            ranks=tuple(e[2] for e in entries),
        )
        sizes = _BUNDLED_LEAGUES.get(league)
        if sizes and rec.n not in sizes:
            warnings.warn(f"{league} {season} has {rec.n} teams; expected one of {sizes}", stacklevel=2)
        records.append(rec)
    return records


def write_seasons(records: Iterable[SeasonRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SEASON_HEADER)
        for rec in records:
            for team, weight, rank in zip(rec.teams, rec.weights, rec.ranks):
                w.writerow([rec.league, rec.season, team, repr(float(weight)), rank])


def parse_elo(path) -> list[EloObservation]:
    """Read an Elo CSV. An empty file yields an empty list.

    The probability column may also be headed ``p``.
    """
    header, rows = _rows(path)
    if header is None:
        return []
    if tuple(header) not in (ELO_HEADER, ("team", "elo", "p")):
        raise MalformedRow(f"{path}: expected header {','.join(ELO_HEADER)}, got {','.join(header)}")
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 3:
            raise MalformedRow(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
        team, elo, p = (c.strip() for c in row)
        try:
            elo_v, p_v = float(elo), float(p)
        except ValueError:
            raise MalformedRow(f"{path}:{lineno}: non-numeric elo or probability") from None
        out.append(EloObservation(team, elo_v, p_v))
    return out


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def bundled_path(name: str) -> Path:
    """Path of a bundled dataset by key (``premier_league``) or file name."""
    fname = BUNDLED.get(name, name)
    if fname not in BUNDLED.values():
        raise KeyError(f"no bundled dataset {name!r}; choose from {sorted(BUNDLED)}")
    return Path(str(resources.files("permbias").joinpath("data", fname)))


def load_bundled(name: str) -> list[SeasonRecord]:
    return parse_seasons(bundled_path(name))


# ---------------------------------------------------------------- reports

META_FIELDS = ("replications", "seed", "dataset_sha256", "generated_at")
SEASON_FIELDS = (
    "league",
    "season",
    "n",
    "observed_loglik",
    "p_value",
    "std_error",
    "tie_count",
    "surprisal",
    "reject_at_alpha",
)


@dataclass(frozen=True)
class SeasonResult:
    league: str
    season: str
    n: int
    observed_loglik: float
    p_value: float
    std_error: float
    tie_count: int
    surprisal: float  # inf when the Monte Carlo estimate is 0
    reject_at_alpha: bool


@dataclass(frozen=True)
class AnalysisReport:
    replications: int
    seed: int
    dataset_sha256: str
    generated_at: str
    seasons: tuple[SeasonResult, ...] = field(default=())

    def surprisal_series(self) -> list[tuple[str, str, float]]:
        return [(s.league, s.season, s.surprisal) for s in self.seasons]


def _json_float(x: float):
    # strict JSON has no infinity; a censored surprisal is written as null
    return None if math.isinf(x) else x


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "meta": {k: getattr(report, k) for k in META_FIELDS},
        "seasons": [
            {
                k: (_json_float(getattr(s, k)) if k == "surprisal" else getattr(s, k))
                for k in SEASON_FIELDS
            }
            for s in report.seasons
        ],
    }


def report_from_dict(d: dict) -> AnalysisReport:
    meta = d["meta"]
    seasons = []
    for s in d["seasons"]:
        s = dict(s)
        if s["surprisal"] is None:
            s["surprisal"] = math.inf
        seasons.append(SeasonResult(**{k: s[k] for k in SEASON_FIELDS}))
    return AnalysisReport(**{k: meta[k] for k in META_FIELDS}, seasons=tuple(seasons))


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv(report: AnalysisReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SEASON_FIELDS + META_FIELDS)
    meta = [getattr(report, k) for k in META_FIELDS]
    for s in report.seasons:
        w.writerow([_csv_cell(getattr(s, k)) for k in SEASON_FIELDS] + [_csv_cell(v) for v in meta])
    return buf.getvalue()


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"


def write_report(report: AnalysisReport, fmt: str, path) -> None:
    """Write ``report`` as ``json`` or ``csv``. I/O failures raise ``OSError``."""
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}; use json or csv")
    Path(path).write_text(text, encoding="utf-8")


_CSV_TYPES = {
    "n": int,
    "observed_loglik": float,
    "p_value": float,
    "std_error": float,
    "tie_count": int,
    "surprisal": float,
    "reject_at_alpha": lambda v: v == "true",
    "replications": int,
    "seed": int,
}


def read_report(path) -> AnalysisReport:
    """Inverse of :func:`write_report`; the format is taken from the content."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return report_from_dict(json.loads(text))
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise MalformedRow(f"{path}: report CSV has no season rows")
    typed = [{k: _CSV_TYPES.get(k, str)(v) for k, v in r.items()} for r in rows]
    seasons = tuple(SeasonResult(**{k: r[k] for k in SEASON_FIELDS}) for r in typed)
    return AnalysisReport(**{k: typed[0][k] for k in META_FIELDS}, seasons=seasons)


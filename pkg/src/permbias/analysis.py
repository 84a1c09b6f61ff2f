"""Per-season likelihood tests over a whole league dataset."""

from __future__ import annotations

import datetime as _dt
import os
from typing import Sequence

from .dataio import AnalysisReport, SeasonRecord, SeasonResult
from .lrtest import Decision, TestConfig, decide, mc_pvalue
from .sampler import DEFAULT_CHUNK, derive_seed


def timestamp() -> str:
    """UTC ISO-8601 time; honours ``SOURCE_DATE_EPOCH`` for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        now = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        now = _dt.datetime.now(tz=_dt.timezone.utc).replace(microsecond=0)
    return now.isoformat().replace("+00:00", "Z")


def analyze_season(
    rec: SeasonRecord,
    index: int,
    replications: int,
    seed: int,
    alpha: float,
    threads: int | None = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> SeasonResult:
    """Monte Carlo test of one season; its seed is derived from ``(seed, index)``."""
    cfg = TestConfig(replications=replications, master_seed=derive_seed(seed, index), alpha=alpha)
    res = mc_pvalue(rec.preferences, rec.observed, cfg, threads=threads, chunk_size=chunk_size)
    return SeasonResult(
        league=rec.league,
        season=rec.season,
        n=rec.n,
        observed_loglik=res.observed_ell,
        p_value=res.p_value,
        std_error=res.std_error,
        tie_count=res.tie_count,
        surprisal=res.surprisal,
        reject_at_alpha=decide(res, alpha) is Decision.REJECT,
    )


def analyze(
    records: Sequence[SeasonRecord],
    replications: int = 1_000_000,
    seed: int = 0,
    alpha: float = 0.05,
    threads: int | None = 1,
    dataset_sha256: str = "",
    generated_at: str | None = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> AnalysisReport:
    """Test every season of ``records`` and collect an :class:`AnalysisReport`.

    Season ``i`` (in input order) uses child seed ``i`` of ``seed``. Seasons run
    one after another; replications within a season are spread over
    ``threads`` workers.
    """
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    rows = tuple(
        analyze_season(rec, i, replications, seed, alpha, threads, chunk_size)
        for i, rec in enumerate(records)
    )
    return AnalysisReport(
        replications=replications,
        seed=seed,
        dataset_sha256=dataset_sha256,
        generated_at=generated_at if generated_at is not None else timestamp(),
        seasons=rows,
    )

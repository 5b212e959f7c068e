"""Risk-weighted posture scoring, remediation projection, drift detection,
coverage forecasting, and privacy-preserving peer benchmarking.

Scoring uses integer quarter-point penalties per open finding (Critical 23,
High 8, Medium 2), score = round-half-up(100 - penalty/4) floored at 0. The
weights are a calibrated reconstruction and every snapshot carries that
provenance marker. All operations are pure reads over ledger snapshots.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from datetime import date, timedelta
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .errors import InsufficientHistory, NoEvidence
from .ledger import EvidenceLedger
from .model import (
    AssertionStatus,
    Classification,
    CohortAggregate,
    DriftEvent,
    PostureSnapshot,
    Severity,
    new_id,
    utc_now,
)
from .store import Store

DEGRADED = (AssertionStatus.FAIL, AssertionStatus.WARN,
            AssertionStatus.PARTIAL_PASS)


@dataclass(frozen=True)
class PostureConfig:
    quarter_point_weights: dict
    bands: dict            # classification name -> minimum score
    cohort_minimum: int
    provenance: str

    @classmethod
    def load(cls, path: Optional[str] = None) -> "PostureConfig":
        if path is not None:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        else:
            doc = json.loads(resources.files("trustos.data")
                             .joinpath("posture_config.json")
                             .read_text(encoding="utf-8"))
        return cls(
            quarter_point_weights={Severity(k): v for k, v in
                                   doc["quarter_point_weights"].items()},
            bands={Classification(k): v for k, v in
                   doc["classification_bands"].items()},
            cohort_minimum=doc["cohort_minimum"],
            provenance=doc.get("weights_provenance", "calibrated-reconstruction"),
        )


def score_from_counts(counts: tuple[int, int, int],
                      config: PostureConfig) -> int:
    """Integer score from a (critical, high, medium) multiset."""
    w = config.quarter_point_weights
    qp = (counts[0] * w[Severity.CRITICAL] + counts[1] * w[Severity.HIGH]
          + counts[2] * w[Severity.MEDIUM])
    # round-half-up on quarter points, floored at 0
    return max(0, (400 - qp + 2) // 4)


def classify(score: int, config: PostureConfig) -> Classification:
    if score >= config.bands[Classification.COMPLIANT]:
        return Classification.COMPLIANT
    if score >= config.bands[Classification.SUBSTANTIALLY_COMPLIANT]:
        return Classification.SUBSTANTIALLY_COMPLIANT
    if score >= config.bands[Classification.PARTIALLY_COMPLIANT]:
        return Classification.PARTIALLY_COMPLIANT
    return Classification.NON_COMPLIANT


@dataclass(frozen=True)
class Refused:
    reason: str = "threshold_not_met"


@dataclass(frozen=True)
class BenchmarkResult:
    percentile: int
    aggregate: CohortAggregate


class IntelligenceService:
    def __init__(self, store: Store, ledger: EvidenceLedger,
                 config: Optional[PostureConfig] = None, clock=None):
        self._store = store
        self._ledger = ledger
        self.config = config or PostureConfig.load()
        self._clock = clock or utc_now
        self._cohorts: dict[str, list[str]] = {}

    # -- posture ------------------------------------------------------------

    def _finding_counts(self, workspace_id: str,
                        drop_severities=()) -> tuple[int, int, int]:
        latest = self._ledger.latest_assertions(workspace_id)
        if not latest:
            raise NoEvidence(workspace_id)
        c = h = m = 0
        for a in latest:
            for f in a.findings:
                if f.severity in drop_severities:
                    continue
                if f.severity is Severity.CRITICAL:
                    c += 1
                elif f.severity is Severity.HIGH:
                    h += 1
                else:
                    m += 1
        return c, h, m

    def compute_posture(self, workspace_id: str) -> PostureSnapshot:
        counts = self._finding_counts(workspace_id)
        latest = self._ledger.latest_assertions(workspace_id)
        score = score_from_counts(counts, self.config)
        return PostureSnapshot(
            workspace_id=workspace_id,
            at=self._clock(),
            score=score,
            classification=classify(score, self.config),
            counts={"critical": counts[0], "high": counts[1],
                    "medium": counts[2]},
            projected_score=self.project_posture(workspace_id,
                                                 "RemediateCriticals"),
            integrations_scanned=len({a.integration for a in latest}),
        )

    def project_posture(self, workspace_id: str, assumption: str) -> int:
        """Score with the assumed severities removed from the multiset."""
        if assumption == "RemediateCriticals":
            drop = (Severity.CRITICAL,)
        elif assumption == "RemediateAll":
            drop = (Severity.CRITICAL, Severity.HIGH, Severity.MEDIUM)
        else:
            raise ValueError(f"unknown assumption {assumption!r}")
        counts = self._finding_counts(workspace_id, drop_severities=drop)
        return score_from_counts(counts, self.config)

    # -- drift ---------------------------------------------------------------

    def detect_drift(self, workspace_id: str) -> list[DriftEvent]:
        """One DriftEvent per control whose status degraded from PASS between
        consecutive generations; persisted and deduplicated per generation
        pair."""
        existing = {
            (r["control_id"], r["from_assertion_id"], r["to_assertion_id"])
            for r in self._store.scoped_query(workspace_id, "drift_events")}
        new_events = []
        for (control_id, _integration), gens in \
                self._ledger.generations(workspace_id).items():
            for prev, cur in zip(gens, gens[1:]):
                if prev.status is not AssertionStatus.PASS:
                    continue
                if cur.status not in DEGRADED:
                    continue
                key = (control_id, prev.assertion_id, cur.assertion_id)
                if key in existing:
                    continue
                ev = DriftEvent(new_id("drift"), workspace_id, control_id,
                                prev.status, cur.status, self._clock(),
                                prev.assertion_id, cur.assertion_id)
                self._store.append("drift_events", ev.to_record())
                self._store.record_event(workspace_id, "intelligence",
                                         "drift_detected",
                                         f"control:{control_id}")
                existing.add(key)
                new_events.append(ev)
        return new_events

    def drift_events(self, workspace_id: str) -> list[DriftEvent]:
        return [DriftEvent.from_record(r) for r in
                self._store.scoped_query(workspace_id, "drift_events")]

    # -- coverage forecast ----------------------------------------------------

    def record_coverage_observation(self, workspace_id: str, framework: str,
                                    at: date, met_fraction: float):
        if not 0.0 <= met_fraction <= 1.0:
            raise ValueError("met_fraction must be within [0, 1]")
        self._store.append("coverage_observations", {
            "workspace_id": workspace_id,
            "framework": framework,
            "at": at.isoformat(),
            "met_fraction": met_fraction,
        })

    def forecast_coverage(self, workspace_id: str, framework: str,
                          target_pct: float) -> Optional[date]:
        """Least-squares fit of met-requirement fraction over time; returns
        the projected date the fit crosses target_pct, or None when the trend
        is flat or falling (unreachable)."""
        rows = self._store.scoped_query(
            workspace_id, "coverage_observations",
            lambda r: r["framework"] == framework)
        if len(rows) < 2:
            raise InsufficientHistory(framework)
        obs = sorted((date.fromisoformat(r["at"]), r["met_fraction"])
                     for r in rows)
        t0 = obs[0][0]
        xs = [(d - t0).days for d, _ in obs]
        ys = [frac * 100.0 for _, frac in obs]
        n = len(xs)
        mean_x = sum(xs) / n
        mean_y = sum(ys) / n
        sxx = sum((x - mean_x) ** 2 for x in xs)
        if sxx == 0:
            return None
        slope = sum((x - mean_x) * (y - mean_y)
                    for x, y in zip(xs, ys)) / sxx
        if slope <= 0:
            return None
        intercept = mean_y - slope * mean_x
        if ys[-1] >= target_pct:
            return obs[-1][0]
        t_star = (target_pct - intercept) / slope
        days = max(t_star, xs[-1])
        return t0 + timedelta(days=round(days))

    # -- peer benchmarking -----------------------------------------------------

    def register_cohort_member(self, cohort_key: str, workspace_id: str):
        members = self._cohorts.setdefault(cohort_key, [])
        if workspace_id not in members:
            members.append(workspace_id)

    def benchmark(self, workspace_id: str,
                  cohort_key: str) -> Union[BenchmarkResult, Refused]:
        """Requester's percentile within the cohort plus the anonymized
        aggregate, or Refused below the minimum cohort size. Percentile is
        100 * strictly-below / n, floor-rounded."""
        requester_score = self.compute_posture(workspace_id).score
        members = self._cohorts.get(cohort_key, [])
        scores = []
        for member in members:
            try:
                scores.append(self.compute_posture(member).score)
            except NoEvidence:
                continue
        n = len(scores)
        if n < self.config.cohort_minimum:
            return Refused()
        strictly_below = sum(1 for s in scores if s < requester_score)
        percentile = (100 * strictly_below) // n
        qs = statistics.quantiles(scores, n=4) if n > 1 else [scores[0]] * 3
        aggregate = CohortAggregate(cohort_key, n,
                                    float(statistics.median(scores)),
                                    (qs[0], qs[2]))
        return BenchmarkResult(percentile, aggregate)

"""Weighted scoring and ranking of alternatives.

The aggregation rule is a weighted sum: each criterion contributes its
weight times the verdict of the alternative under it, and a criterion with
no assessment contributes zero while being reported as missing rather than
silently imputed. Bare verdicts (assessments without a criterion) carry no
weight and are excluded from scoring. Ranking is descending by score with a
bytewise ascending id tie-break, so recommendations are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError, error
from .rationale import Assessment, Criterion, RecordStore


@dataclass(frozen=True)
class ScoredAlternative:
    alternative_id: str
    score: float
    covered_criteria: int
    missing_criteria: tuple[str, ...]


def score_alternative(
    alternative_id: str,
    criteria: list[Criterion],
    assessments: list[Assessment],
) -> ScoredAlternative:
    """Score one alternative over the given criteria set.

    Only assessments of this alternative against criteria in the set count;
    a duplicate assessment for one (alternative, criterion) pair is an
    error.
    """
    by_criterion: dict[str, float] = {}
    for a in assessments:
        if a.alternative_id != alternative_id or a.criterion_id is None:
            continue
        if a.criterion_id in by_criterion:
            raise ValidationError(
                f"duplicate assessment of {alternative_id} under {a.criterion_id}",
                [error("duplicate-assessment", f"duplicate assessment of {alternative_id} under {a.criterion_id}")],
            )
        by_criterion[a.criterion_id] = a.verdict

    terms: list[float] = []
    covered = 0
    missing: list[str] = []
    for criterion in criteria:
        verdict = by_criterion.get(criterion.id)
        if verdict is None:
            missing.append(criterion.id)
        else:
            covered += 1
            terms.append(criterion.weight * verdict)
    return ScoredAlternative(alternative_id, math.fsum(terms), covered, tuple(sorted(missing)))


def rank_alternatives(issue_id: str, store: RecordStore) -> list[ScoredAlternative]:
    """All alternatives of one issue, best score first.

    Ties are broken ascending bytewise by alternative id. Criteria are the
    store's full criteria list; assessments against criteria outside it do
    not exist by construction.
    """
    store.require("issue", issue_id)
    alternatives = store.alternatives_for(issue_id)
    if not alternatives:
        raise ValidationError(f"issue {issue_id} has no alternatives")
    criteria = list(store.criteria)
    scored = [
        score_alternative(alt.id, criteria, list(store.assessments_for(alt.id)))
        for alt in alternatives
    ]
    return sorted(scored, key=lambda s: (-s.score, s.alternative_id))

"""
Verdict model shared by every criterion and witness.
"""

import csv
import math
import os
import sys
from enum import Enum
from typing import Iterable, List, Optional

from loguru import logger
from pydantic import BaseModel

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config


class Verdict(str, Enum):
    ENTANGLED = "Entangled"
    INCONCLUSIVE = "Inconclusive"
    NOT_APPLICABLE = "NotApplicable"
    ERROR = "Error"


class CriterionVerdict(BaseModel):
    criterion: str
    statistic: Optional[float] = None
    threshold: Optional[float] = None
    verdict: Verdict = Verdict.INCONCLUSIVE
    notes: str = ""
    label: str = ""

    @property
    def entangled(self) -> bool:
        return self.verdict is Verdict.ENTANGLED


# =================== Margin Logic ===================
def margin() -> float:
    return Config.DECISION_MARGIN


def exceeds(statistic: float, threshold: float, eps: Optional[float] = None) -> bool:
    """statistic > threshold + margin; values within the margin never count as violations."""
    eps = margin() if eps is None else eps
    return statistic > threshold + eps


def falls_below(statistic: float, threshold: float, eps: Optional[float] = None) -> bool:
    eps = margin() if eps is None else eps
    return statistic < threshold - eps


def decide(criterion: str, statistic: float, threshold: float = 0.0, below: bool = False, notes: str = "") -> CriterionVerdict:
    """Verdict for `statistic > threshold` (or `< threshold` with `below`) beyond the margin."""
    if statistic is None or not math.isfinite(statistic):
        return error(criterion, f"non-finite statistic {statistic}")
    hit = falls_below(statistic, threshold) if below else exceeds(statistic, threshold)
    logger.debug(f"{criterion}: statistic {statistic:.10g} vs {threshold:.10g}, margin {margin()}")
    return CriterionVerdict(
        criterion=criterion,
        statistic=float(statistic),
        threshold=float(threshold),
        verdict=Verdict.ENTANGLED if hit else Verdict.INCONCLUSIVE,
        notes=notes,
    )


def not_applicable(criterion: str, notes: str, statistic: Optional[float] = None) -> CriterionVerdict:
    return CriterionVerdict(criterion=criterion, statistic=statistic, verdict=Verdict.NOT_APPLICABLE, notes=notes)


def error(criterion: str, notes: str) -> CriterionVerdict:
    logger.warning(f"{criterion}: {notes}")
    return CriterionVerdict(criterion=criterion, verdict=Verdict.ERROR, notes=notes)


# =================== Export ===================
VERDICT_COLUMNS = ["label", "criterion", "statistic", "threshold", "verdict", "notes"]


def write_verdicts_csv(verdicts: Iterable[CriterionVerdict], path: str) -> int:
    rows: List[CriterionVerdict] = list(verdicts)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=VERDICT_COLUMNS)
        writer.writeheader()
        for v in rows:
            data = v.model_dump(mode="json")
            writer.writerow({key: data.get(key) for key in VERDICT_COLUMNS})
    return len(rows)

"""Imperfect test feedback: defective modules may be observed as clean.

The simulated development process tests each module right after predicting
it, and testing effort follows the prediction: modules flagged positive are
tested hard, modules flagged negative only lightly.  A truly defective module
can therefore slip through testing and be *observed* non-defective.  Two
miss probabilities model this:

* ``type1_prob`` — a defective module predicted negative (lightly tested) is
  observed non-defective with this probability;
* ``type2_prob`` — a defective module predicted positive (thoroughly tested)
  is still observed non-defective with this probability.

Light testing can never miss less than thorough testing, hence the required
ordering ``type2_prob <= type1_prob``.  Non-defective modules are always
observed non-defective: testing cannot invent a defect.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["OverlookConfig", "observe"]


@dataclass(frozen=True)
class OverlookConfig:
    """Miss probabilities for the two prediction-dependent testing levels."""

    type1_prob: float
    type2_prob: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 <= self.type2_prob <= self.type1_prob <= 1.0:
            raise ValueError(
                "overlook probabilities must satisfy "
                f"0 <= type2_prob <= type1_prob <= 1, got type1_prob={self.type1_prob}, "
                f"type2_prob={self.type2_prob}"
            )


def observe(
    true_label: int,
    effective_prediction: int,
    config: OverlookConfig,
    rng: np.random.Generator,
) -> int:
    """Observed test outcome for one module.

    A non-defective module always tests non-defective and consumes no
    randomness.  A defective module consumes exactly one draw from ``rng``
    and is missed (observed 0) with the probability matching the effective
    prediction — ``type1_prob`` after a negative, ``type2_prob`` after a
    positive.  The fixed one-draw budget keeps runs that share a seed aligned
    draw-for-draw regardless of outcomes.
    """
    if true_label not in (0, 1):
        raise ValueError(f"true_label must be 0 or 1, got {true_label!r}")
    if effective_prediction not in (0, 1):
        raise ValueError(
            f"effective_prediction must be 0 or 1, got {effective_prediction!r}"
        )
    if true_label == 0:
        return 0
    miss_prob = config.type2_prob if effective_prediction == 1 else config.type1_prob
    draw = rng.random()
    return 0 if draw < miss_prob else 1

"""Prediction-handling strategies for the online simulation.

A strategy decides what prediction is *acted on* (and therefore how hard a
module is tested) given the model's raw prediction.  Three kinds exist:

* ``ordinary`` — act on the raw prediction unchanged.
* ``fixed`` — force the first ``m`` negative raw predictions to positive so
  those modules get tested thoroughly, where ``m`` is 10% of the modules
  (rounded half-up, at least 1).  Positive raw predictions pass through and
  never consume the budget.
* ``proposed`` — like ``fixed``, plus an adaptive quit rule: once at least
  ``ceil(m / 2)`` forced modules have been tested, estimate the defect rate
  among forced modules from their observed outcomes after every forced
  outcome, and permanently stop forcing the moment that rate drops below the
  quit threshold (default 25%).  Forcing exists to catch defects that light
  testing would miss; a low observed rate among forced modules says the
  remaining budget is not worth its cost.

The state machine is owned by a single run: feed it each raw prediction via
:meth:`PredictionStrategy.effective_prediction`, then report the observed
outcome via :meth:`PredictionStrategy.record_outcome` before moving to the
next module.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["STRATEGY_KINDS", "PredictionStrategy", "init_strategy", "forced_budget"]

STRATEGY_KINDS = ("ordinary", "fixed", "proposed")


def forced_budget(total_modules: int) -> int:
    """Forced-positive budget: 10% of the modules, half-up, at least 1."""
    if total_modules < 1:
        raise ValueError(f"total_modules must be positive, got {total_modules}")
    return max(1, (total_modules + 5) // 10)


@dataclass
class PredictionStrategy:
    """Mutable per-run strategy state; create via :func:`init_strategy`."""

    kind: str
    budget: int
    warmup: int
    quit_threshold: float = 0.25
    forced_so_far: int = 0
    forced_tested: int = 0
    forced_defective: int = 0
    quit: bool = False

    def effective_prediction(self, raw_prediction: int) -> tuple[int, bool]:
        """Prediction to act on, and whether it was forced to positive.

        Positive raw predictions always pass through.  Negative ones are
        flipped to positive while the strategy still forces: budget not
        exhausted and (for ``proposed``) the quit rule has not fired.
        """
        if raw_prediction not in (0, 1):
            raise ValueError(f"raw_prediction must be 0 or 1, got {raw_prediction!r}")
        if raw_prediction == 1:
            return 1, False
        if (
            self.kind in ("fixed", "proposed")
            and not self.quit
            and self.forced_so_far < self.budget
        ):
            self.forced_so_far += 1
            return 1, True
        return 0, False

    def record_outcome(self, forced: bool, observed_label: int) -> None:
        """Record one module's observed test outcome.

        Outcomes of non-forced modules never change the state.  Forced
        outcomes update the forced-module tallies, and for ``proposed`` the
        quit rule is evaluated after every recorded forced outcome once the
        warm-up count is reached.
        """
        if observed_label not in (0, 1):
            raise ValueError(f"observed_label must be 0 or 1, got {observed_label!r}")
        if not forced:
            return
        if self.kind == "ordinary":
            raise ValueError("ordinary strategy cannot have forced outcomes")
        self.forced_tested += 1
        self.forced_defective += observed_label
        if (
            self.kind == "proposed"
            and not self.quit
            and self.forced_tested >= self.warmup
            and self.forced_defective / self.forced_tested < self.quit_threshold
        ):
            self.quit = True

    def overlook_rate_estimate(self) -> float | None:
        """Observed defect rate among forced modules; None before any."""
        if self.forced_tested == 0:
            return None
        return self.forced_defective / self.forced_tested


def init_strategy(
    kind: str, total_modules: int, quit_threshold: float = 0.25
) -> PredictionStrategy:
    """Fresh strategy state for a run over ``total_modules`` modules."""
    if kind not in STRATEGY_KINDS:
        raise ValueError(f"unknown strategy kind {kind!r}; expected one of {STRATEGY_KINDS}")
    if total_modules < 1:
        raise ValueError(f"total_modules must be positive, got {total_modules}")
    if not 0.0 <= quit_threshold <= 1.0:
        raise ValueError(f"quit_threshold must be in [0, 1], got {quit_threshold}")
    if kind == "ordinary":
        return PredictionStrategy(kind=kind, budget=0, warmup=0, quit_threshold=quit_threshold)
    budget = forced_budget(total_modules)
    warmup = (budget + 1) // 2
    return PredictionStrategy(
        kind=kind, budget=budget, warmup=warmup, quit_threshold=quit_threshold
    )

"""Remaining-life prediction across multi-level block loading.

At every load jump a predictor returns the accumulated life ``eta_out`` that a
two-stage history would reach; ``1 - eta_out`` is the correction to the linear
(Palmgren-Miner) sum. The loop carries the corrected consumed life forward as
the input of the next jump.
"""

import logging
from dataclasses import dataclass, field

from .errors import InvalidScenario, PredictorOutOfRange
from .loading import ConsumedFraction, LoadBlock, LoadScenario, ToFailure
from .nn import predict as nn_predict
from .simulator import block_run

log = logging.getLogger(__name__)

TRAINED_JUMP = 0.25


def pm_sum(etas):
    """Linear damage sum of consumed fractions."""
    total = 0.0
    for e in etas:
        total += e
    return total


@dataclass(frozen=True)
class MultiLevelScenario:
    s_max: tuple
    eta: tuple
    s_min: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "s_max", tuple(float(s) for s in self.s_max))
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        if len(self.s_max) < 2:
            raise InvalidScenario("need at least two load levels")
        if len(self.eta) != len(self.s_max) - 1:
            raise InvalidScenario("need one consumed fraction per level except the last")
        if any(not 0.0 < e <= 1.0 for e in self.eta):
            raise InvalidScenario("consumed fractions must lie in (0, 1]")

    def to_load_scenario(self, fc=100.0):
        blocks = [LoadBlock(s, ConsumedFraction(e)) for s, e in zip(self.s_max, self.eta)]
        blocks.append(LoadBlock(self.s_max[-1], ToFailure()))
        return LoadScenario(tuple(blocks), self.s_min, fc)

    @classmethod
    def from_load_scenario(cls, scenario):
        blocks = scenario.blocks
        if not isinstance(blocks[-1].duration, ToFailure):
            raise InvalidScenario("the final level must be open (no eta or cycles)")
        etas = []
        for b in blocks[:-1]:
            if not isinstance(b.duration, ConsumedFraction):
                raise InvalidScenario("levels before the last need an eta value")
            etas.append(b.duration.eta)
        return cls(tuple(b.s_max for b in blocks), tuple(etas), scenario.s_min)


@dataclass(frozen=True)
class JumpRecord:
    i: int
    delta_s: float
    eta_new: float
    eta_out: float
    delta_eta: float
    sum_eta: float
    eta_rem_next: float


@dataclass
class LifetimeTrace:
    records: list = field(default_factory=list)
    failure_level: object = None      # 1-based level index, or None
    remaining_raw: float = 0.0
    remaining: float = 0.0
    accumulated: float = 0.0          # applied fractions plus remaining life

    @property
    def failed_early(self):
        return self.failure_level is not None

    def as_dict(self):
        return {
            "records": [r.__dict__ for r in self.records],
            "outcome": ({"failure_at_level": self.failure_level} if self.failure_level is not None
                        else {"remaining_life": self.remaining}),
            "remaining_raw": self.remaining_raw,
            "remaining": self.remaining,
            "accumulated": self.accumulated,
        }


def predict_remaining(predictor, scenario, out_range=(0.0, 2.0)):
    """Iterate over the load jumps of ``scenario`` and return the trace.

    ``predictor(s_i, delta_s_i, eta_new_i)`` returns ``eta_out_i``.
    """
    s, eta = scenario.s_max, scenario.eta
    n = len(s)
    etas = list(eta) + [0.0]
    trace = LifetimeTrace()
    total = 0.0
    rem = 1.0
    eta_new = etas[0]
    for i in range(n - 1):
        ds = round(s[i] - s[i + 1], 9)
        if abs(ds) > TRAINED_JUMP + 1e-12:
            log.warning("load jump %.3f outside the trained range", ds)
        out = float(predictor(s[i], ds, eta_new))
        if out_range is not None and not out_range[0] <= out <= out_range[1]:
            raise PredictorOutOfRange(f"predictor returned {out!r} at jump {i + 1}")
        d_eta = 1.0 - out
        if i == 0:
            total = etas[i] + d_eta
        else:
            total = total + etas[i] + d_eta
        rem = 1.0 - total
        trace.records.append(JumpRecord(i + 1, ds, eta_new, out, d_eta, total, rem))
        eta_new = total + etas[i + 1]
        if eta_new >= 1.0:
            trace.failure_level = i + 2
            break
    trace.remaining_raw = rem
    # failing before or within the last level leaves no remaining life there
    trace.remaining = 0.0 if trace.failed_early else min(max(rem, 0.0), 1.0)
    trace.accumulated = pm_sum(etas[:len(trace.records)]) + rem
    return trace


def pm_predictor(s, ds, eta_new):
    """Constant predictor reproducing the linear damage sum."""
    return 1.0


def surrogate_predictor(model):
    def predictor(s, ds, eta_new):
        return nn_predict(model, s, ds, eta_new)
    return predictor


@dataclass(frozen=True)
class OracleOutcome:
    remaining: float
    excluded: bool
    failure_level: object = None
    cycles: tuple = ()


def oracle_remaining(p, sn, scenario, disc=None):
    """Simulated remaining life fraction at the final level.

    A scenario that fails before reaching its last level is reported as
    excluded instead of returning a fraction.
    """
    counts, failed_block = block_run(p, scenario.to_load_scenario(p.fc), sn, disc)
    last = len(scenario.s_max) - 1
    if failed_block is None:
        raise InvalidScenario("final level reached the cycle cap without failing")
    if failed_block < last:
        return OracleOutcome(float("nan"), True, failed_block + 1, tuple(counts))
    return OracleOutcome(counts[last] / sn.lookup(scenario.s_max[last]), False, None, tuple(counts))

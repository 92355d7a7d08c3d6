"""Block loading scenarios and their discretization into stress reversals.

Load levels are ratios of the compressive strength ``fc``. A scenario is an
ordered list of blocks sharing one lower level ``s_min``; each block carries an
upper level and a duration.
"""

import json
import math
from dataclasses import dataclass

from .errors import InvalidScenario
from .kernels import SCHEMES


@dataclass(frozen=True)
class ExplicitCycles:
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise InvalidScenario("cycle count must be >= 0")


@dataclass(frozen=True)
class ConsumedFraction:
    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidScenario(f"consumed fraction {self.eta!r} outside [0, 1]")


@dataclass(frozen=True)
class ToFailure:
    pass


TO_FAILURE = ToFailure()


@dataclass(frozen=True)
class LoadBlock:
    s_max: float
    duration: object = TO_FAILURE

    def __post_init__(self):
        if not 0.0 < self.s_max <= 1.0:
            raise InvalidScenario(f"s_max {self.s_max!r} outside (0, 1]")
        if not isinstance(self.duration, (ExplicitCycles, ConsumedFraction, ToFailure)):
            raise InvalidScenario(f"unsupported duration {self.duration!r}")


@dataclass(frozen=True)
class LoadScenario:
    blocks: tuple
    s_min: float = 0.2
    fc: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise InvalidScenario("scenario has no blocks")
        if not self.fc > 0:
            raise InvalidScenario("fc must be positive")
        lowest = min(b.s_max for b in self.blocks)
        if not 0.0 <= self.s_min < lowest:
            raise InvalidScenario(f"need 0 <= s_min < min(s_max), got s_min={self.s_min!r}")
        for b in self.blocks[:-1]:
            if isinstance(b.duration, ToFailure):
                raise InvalidScenario("only the final block may run to failure")

    @property
    def is_explicit(self):
        return all(not isinstance(b.duration, ConsumedFraction) for b in self.blocks)


@dataclass(frozen=True)
class CycleDiscretization:
    """Substeps per loading branch and the integration scheme of the damage law."""

    substeps: int = 20
    scheme: str = "rk4"
    omega_crit: float = 10.0
    max_cycles: int = 10_000_000

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {sorted(SCHEMES)}")
        if not self.omega_crit > 0:
            raise ValueError("omega_crit must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")

    def as_dict(self):
        return {"substeps": self.substeps, "scheme": self.scheme,
                "omega_crit": self.omega_crit, "max_cycles": self.max_cycles}


def eta_to_cycles(eta, n_f):
    """Nearest-integer cycle count for a consumed fraction (halves round up)."""
    return max(0, int(math.floor(eta * n_f + 0.5)))


def resolve_durations(scenario, sn_table):
    """Replace consumed fractions by explicit cycle counts using ``sn_table``."""
    blocks = []
    for b in scenario.blocks:
        if isinstance(b.duration, ConsumedFraction):
            n_f = sn_table.lookup(b.s_max)
            blocks.append(LoadBlock(b.s_max, ExplicitCycles(eta_to_cycles(b.duration.eta, n_f))))
        else:
            blocks.append(b)
    return LoadScenario(tuple(blocks), scenario.s_min, scenario.fc)


def stress_targets(scenario, disc):
    """Yield ``(stress, "up"|"down")`` substep targets for every explicit cycle.

    The initial ramp from the unloaded state to ``s_min * fc`` is not included;
    ``ToFailure`` blocks are skipped since their length is unknown here.
    """
    if not scenario.is_explicit:
        raise InvalidScenario("resolve durations before discretizing")
    lo = scenario.s_min * scenario.fc
    m = disc.substeps
    for b in scenario.blocks:
        if isinstance(b.duration, ToFailure):
            continue
        hi = b.s_max * scenario.fc
        h = (hi - lo) / m
        for _ in range(b.duration.count):
            for i in range(m):
                yield (hi if i == m - 1 else lo + (i + 1) * h), "up"
            for i in range(m):
                yield (lo if i == m - 1 else hi - (i + 1) * h), "down"


def scenario_from_dict(data):
    try:
        levels = data["levels"]
        s_min = float(data.get("s_min", 0.2))
        fc = float(data.get("fc", 100.0))
        blocks = []
        for lv in levels:
            if "eta" in lv and "cycles" in lv:
                raise InvalidScenario("a level may give either eta or cycles, not both")
            if "eta" in lv:
                dur = ConsumedFraction(float(lv["eta"]))
            elif "cycles" in lv:
                c = lv["cycles"]
                if isinstance(c, bool) or int(c) != c:
                    raise InvalidScenario(f"cycles must be an integer, got {c!r}")
                dur = ExplicitCycles(int(c))
            else:
                dur = TO_FAILURE
            blocks.append(LoadBlock(float(lv["s_max"]), dur))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScenario(f"malformed scenario: {exc}") from exc
    return LoadScenario(tuple(blocks), s_min, fc)


def scenario_to_dict(scenario):
    levels = []
    for b in scenario.blocks:
        lv = {"s_max": b.s_max}
        if isinstance(b.duration, ConsumedFraction):
            lv["eta"] = b.duration.eta
        elif isinstance(b.duration, ExplicitCycles):
            lv["cycles"] = b.duration.count
        levels.append(lv)
    return {"s_min": scenario.s_min, "fc": scenario.fc, "levels": levels}


def read_scenario(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InvalidScenario(f"{path}: expected a JSON object")
    return scenario_from_dict(data)


def write_scenario(scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")

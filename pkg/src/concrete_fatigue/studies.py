"""Multi-level validation campaigns against the simulator and multi-jump statistics."""

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .config import rng
from .errors import InsufficientData, ZeroVariance
from .lifetime import (MultiLevelScenario, oracle_remaining, predict_remaining,
                       surrogate_predictor)
from .nn import r2_score
from .simulator import _pool_map, fmt

FAMILIES = {
    3: {
        "H-L-H": (0.85, 0.75, 0.85),
        "L-H-L": (0.75, 0.85, 0.75),
        "ascending": (0.70, 0.80, 0.90),
        "descending": (0.90, 0.80, 0.70),
    },
    5: {
        "H-L-H-L-H": (0.85, 0.75, 0.85, 0.75, 0.85),
        "L-H-L-H-L": (0.75, 0.85, 0.75, 0.85, 0.75),
        "ascending": (0.70, 0.75, 0.80, 0.85, 0.90),
        "descending": (0.90, 0.85, 0.80, 0.75, 0.70),
    },
}
SEQUENCE_ETAS = tuple(round(0.05 * k, 2) for k in range(1, 9))
JUMP_ETAS = tuple(round(0.025 * k, 3) for k in range(1, 9))
JUMP_SAMPLES = {3: 50, 5: 578, 10: 3000}


@dataclass(frozen=True)
class StudySpec:
    family: str
    levels: tuple
    etas: tuple = SEQUENCE_ETAS
    seed: int = 0
    cap: int = 0                   # 0: use every eta combination
    s_min: float = 0.2

    @property
    def n_levels(self):
        return len(self.levels)


@dataclass
class StudyResult:
    family: str
    scenarios: list = field(default_factory=list)
    true_rem: list = field(default_factory=list)
    pred_rem: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    corrections: list = field(default_factory=list)
    r2: float = float("nan")

    @property
    def n_excluded(self):
        return int(sum(self.excluded))

    @property
    def mean_correction(self):
        kept = [c for c, e in zip(self.corrections, self.excluded) if not e]
        return float(np.mean(kept)) if kept else float("nan")

    def summary(self):
        return {"family": self.family, "r2": self.r2, "n_scenarios": len(self.scenarios),
                "n_excluded": self.n_excluded, "mean_correction": self.mean_correction}


def sequence_spec(family, n_levels=3, seed=0, cap=0, etas=SEQUENCE_ETAS):
    try:
        levels = FAMILIES[n_levels][family]
    except KeyError:
        raise ValueError(f"unknown {n_levels}-level family {family!r}") from None
    return StudySpec(family, levels, tuple(etas), seed, cap)


def _eta_combos(spec):
    combos = list(itertools.product(spec.etas, repeat=spec.n_levels - 1))
    if spec.cap and len(combos) > spec.cap:
        pick = rng(spec.seed, f"study-{spec.family}-{spec.n_levels}").choice(
            len(combos), size=spec.cap, replace=False)
        combos = [combos[i] for i in sorted(pick)]
    return combos


def run_sequence_study(model, p, sn, spec, disc=None, threads=1, predictor=None):
    """Algorithm prediction versus simulated remaining life for one family."""
    scenarios = [MultiLevelScenario(spec.levels, c, spec.s_min) for c in _eta_combos(spec)]
    predictor = predictor or surrogate_predictor(model)
    oracle = _pool_map(lambda sc: oracle_remaining(p, sn, sc, disc), scenarios, threads)
    res = StudyResult(spec.family, scenarios)
    for sc, o in zip(scenarios, oracle):
        tr = predict_remaining(predictor, sc)
        res.true_rem.append(o.remaining)
        res.pred_rem.append(tr.remaining)
        res.excluded.append(o.excluded)
        res.corrections.append(sum(r.delta_eta for r in tr.records))
    kept = [i for i, e in enumerate(res.excluded) if not e]
    if len(kept) < 2:
        raise InsufficientData(f"{spec.family}: only {len(kept)} usable scenario(s)")
    try:
        res.r2 = r2_score([res.pred_rem[i] for i in kept], [res.true_rem[i] for i in kept])
    except ZeroVariance as exc:
        raise InsufficientData(f"{spec.family}: {exc}") from None
    return res


def alternating_scenarios(n_levels, n_samples, seed=0, delta=0.2, highs=(0.85, 0.90),
                          etas=JUMP_ETAS, s_min=0.2):
    """Seeded, duplicate-free alternating scenarios with a fixed jump magnitude.

    Per scenario the high level, the starting side (high or low) and every
    consumed fraction are drawn uniformly.
    """
    g = rng(seed, f"jumps-{n_levels}")
    total = len(highs) * 2 * len(etas) ** (n_levels - 1)
    if n_samples > total:
        raise ValueError(f"only {total} distinct {n_levels}-level scenarios exist")
    seen, out = set(), []
    while len(out) < n_samples:
        hi = highs[g.integers(len(highs))]
        lo = round(hi - delta, 9)
        start_high = bool(g.integers(2))
        idx = tuple(int(k) for k in g.integers(len(etas), size=n_levels - 1))
        key = (hi, start_high, idx)
        if key in seen:
            continue
        seen.add(key)
        levels = tuple((hi if (k % 2 == 0) == start_high else lo) for k in range(n_levels))
        out.append(MultiLevelScenario(levels, tuple(etas[k] for k in idx), s_min))
    return out


@dataclass
class JumpStudyResult:
    n_levels: int
    scenarios: list
    accumulated: list
    failed_early: list

    @property
    def mean_sum_eta(self):
        return float(np.mean(self.accumulated))

    def summary(self):
        return {"n_levels": self.n_levels, "n_scenarios": len(self.scenarios),
                "mean_sum_eta": self.mean_sum_eta,
                "n_failed_early": int(sum(self.failed_early))}


def run_multi_jump_study(model, seed=0, counts=None, predictor=None, out_range=None, **kw):
    """Mean accumulated life under alternating loading for each level count.

    Predictor outputs are not range-checked by default: the study reports the
    statistics of whatever the surrogate returns.
    """
    counts = counts or JUMP_SAMPLES
    predictor = predictor or surrogate_predictor(model)
    out = {}
    for n, m in sorted(counts.items()):
        scenarios = alternating_scenarios(n, m, seed, **kw)
        traces = [predict_remaining(predictor, sc, out_range) for sc in scenarios]
        out[n] = JumpStudyResult(n, scenarios, [t.accumulated for t in traces],
                                 [t.failed_early for t in traces])
    return out


def write_sequence_outputs(results, prefix):
    """Per-scenario CSV, plot CSV and summary JSON for sequence studies."""
    with open(f"{prefix}_scenarios.csv", "w", newline="") as fh:
        fh.write("scenario_id,true_rem,pred_rem,excluded\n")
        for res in results:
            for k, (t, pr, ex) in enumerate(zip(res.true_rem, res.pred_rem, res.excluded)):
                fh.write(f"{res.family}-{k:04d},{'' if ex else fmt(t)},{fmt(pr)},{int(ex)}\n")
    with open(f"{prefix}_plot.csv", "w", newline="") as fh:
        fh.write("family,levels,etas,true_rem,pred_rem\n")
        for res in results:
            for sc, t, pr, ex in zip(res.scenarios, res.true_rem, res.pred_rem, res.excluded):
                if ex:
                    continue
                lv = " ".join(fmt(s) for s in sc.s_max)
                et = " ".join(fmt(e) for e in sc.eta)
                fh.write(f"{res.family},{lv},{et},{fmt(t)},{fmt(pr)}\n")
    with open(f"{prefix}_summary.json", "w") as fh:
        json.dump({"studies": [r.summary() for r in results]}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_jump_outputs(results, prefix):
    with open(f"{prefix}_scenarios.csv", "w", newline="") as fh:
        fh.write("scenario_id,n_levels,levels,etas,sum_eta,failed_early\n")
        for n, res in sorted(results.items()):
            for k, (sc, a, f) in enumerate(zip(res.scenarios, res.accumulated, res.failed_early)):
                lv = " ".join(fmt(s) for s in sc.s_max)
                et = " ".join(fmt(e) for e in sc.eta)
                fh.write(f"L{n}-{k:04d},{n},{lv},{et},{fmt(a)},{int(f)}\n")
    with open(f"{prefix}_summary.json", "w") as fh:
        json.dump({"studies": [r.summary() for _, r in sorted(results.items())]}, fh,
                  indent=2, sort_keys=True)
        fh.write("\n")

"""Cycle-by-cycle fatigue driver built on the compiled (or pure-Python) kernels.

Every simulation starts from the unloaded, undamaged state, ramps once to the
lower level and then repeats ``s_min -> s_max -> s_min`` cycles. Damage only
grows on the up-ramps, so the state at the lower reversal is fully described
by the damage variable and block transitions need no extra bookkeeping.
"""

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidScenario, MissingSNEntry, SimulationFault
from .loading import (CycleDiscretization, ToFailure,
                      eta_to_cycles, resolve_durations)


@dataclass(frozen=True)
class Runout:
    """Constant-amplitude run that hit the cycle cap without failing."""

    cycles: int


@dataclass(frozen=True)
class LifeRun:
    cycles: int
    status: str
    omega2: float

    @property
    def runout(self):
        return self.status == "runout"


def fingerprint(p, disc, **extra):
    """Short stable hash of material parameters, discretization and extras."""
    blob = json.dumps({"params": p.as_dict(), "disc": disc.as_dict(), **extra},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _key(s):
    return round(float(s), 9)


@dataclass(frozen=True)
class SNTable:
    s_min: float
    entries: dict
    params_fingerprint: str = ""
    runouts: tuple = ()

    def __post_init__(self):
        entries = {_key(s): int(n) for s, n in self.entries.items()}
        object.__setattr__(self, "entries", dict(sorted(entries.items())))
        levels = list(self.entries)
        for a, b in zip(levels, levels[1:]):
            if not self.entries[a] > self.entries[b]:
                raise ValueError(f"N^f not strictly decreasing between s_max={a} and {b}")

    def lookup(self, s_max):
        try:
            return self.entries[_key(s_max)]
        except KeyError:
            raise MissingSNEntry(f"no fatigue life for s_max={s_max!r} at s_min={self.s_min!r}") from None

    def __contains__(self, s_max):
        return _key(s_max) in self.entries

    @property
    def levels(self):
        return tuple(self.entries)


@dataclass(frozen=True)
class TwoStageResult:
    eta_cons: float
    eta_rem: float
    sum_eta: float
    n1: int = 0
    n2: int = 0


@dataclass
class ScenarioResult:
    failed: bool
    failure_block: object
    cycles_per_block: list
    creep_curve: np.ndarray      # columns: cycle, eps_top, eps_bot
    damage_history: np.ndarray
    status: str = "ok"
    runout: bool = False
    block_ends: list = field(default_factory=list)

    @property
    def total_cycles(self):
        return int(sum(self.cycles_per_block))


def _kargs(p, disc):
    return (kernels.SCHEMES[disc.scheme], kernels.KAPPA_FORMS[p.kappa_form],
            bool(p.clamp_yield), float(disc.omega_crit))


def _status_name(code):
    return kernels.STATUS_NAMES[code]


def initial_damage(p, s_min, disc, backend=None):
    """Damage after the first ramp from zero stress to the lower level."""
    k = backend or kernels.backend
    return k.integrate_ramp(p.constants(), 0.0, 0.0, s_min * p.fc, disc.substeps,
                            *_kargs(p, disc))


def _cycles(p, omega, s_min, s_max, n, disc, backend=None):
    k = backend or kernels.backend
    return k.run_cycles(p.constants(), omega, s_min * p.fc, s_max * p.fc,
                        disc.substeps, int(n), *_kargs(p, disc))


def life_run(p, s_max, s_min=0.2, disc=None, max_cycles=None, backend=None):
    """Constant-amplitude run with the failure mode recorded."""
    disc = disc or CycleDiscretization()
    cap = disc.max_cycles if max_cycles is None else int(max_cycles)
    if not 0.0 <= s_min < s_max <= 1.0:
        if s_max == s_min:
            return LifeRun(cap, "runout", 0.0)
        raise InvalidScenario(f"need 0 <= s_min < s_max <= 1, got {s_min!r}, {s_max!r}")
    w, st = initial_damage(p, s_min, disc, backend)
    if st != kernels.STATUS_OK:
        return LifeRun(0, _status_name(st), w)
    done, w, st = _cycles(p, w, s_min, s_max, cap, disc, backend)
    return LifeRun(done, "runout" if st == kernels.STATUS_OK else _status_name(st), w)


def run_constant_amplitude(p, s_max, s_min=0.2, max_cycles=None, disc=None, backend=None):
    """Completed cycles to failure, or :class:`Runout` if the cap was reached."""
    r = life_run(p, s_max, s_min, disc, max_cycles, backend)
    return Runout(r.cycles) if r.runout else r.cycles


def _pool_map(fn, items, threads):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def sn_runs(p, levels, s_min=0.2, max_cycles=None, disc=None, threads=1):
    """One :class:`LifeRun` per level, keyed by level (ascending)."""
    disc = disc or CycleDiscretization()
    levels = sorted({_key(s) for s in levels})
    runs = _pool_map(lambda s: life_run(p, s, s_min, disc, max_cycles), levels, threads)
    return dict(zip(levels, runs))


def build_sn_table(p, levels, s_min=0.2, max_cycles=None, disc=None, threads=1,
                   allow_runout=False):
    if not levels:
        raise ValueError("at least one load level is required")
    disc = disc or CycleDiscretization()
    runs = sn_runs(p, levels, s_min, max_cycles, disc, threads)
    runouts = tuple(s for s, r in runs.items() if r.runout)
    if runouts and not allow_runout:
        raise MissingSNEntry(f"runout at s_max={runouts[0]!r} (s_min={s_min!r})")
    entries = {s: r.cycles for s, r in runs.items() if not r.runout}
    return SNTable(s_min, entries, fingerprint(p, disc, s_min=s_min), runouts)


def run_two_stage(p, s1max, s2max, s_min, eta_cons, sn, disc=None, backend=None):
    """Consume ``eta_cons`` of the life at ``s1max``, then load ``s2max`` to failure."""
    disc = disc or CycleDiscretization()
    if not 0.0 <= eta_cons <= 1.0:
        raise ValueError("eta_cons must lie in [0, 1]")
    nf1, nf2 = sn.lookup(s1max), sn.lookup(s2max)
    n1 = eta_to_cycles(eta_cons, nf1)
    if eta_cons == 1.0:
        return TwoStageResult(1.0, 0.0, 1.0, n1, 0)
    w, st = initial_damage(p, s_min, disc, backend)
    if st == kernels.STATUS_OK:
        done, w, st = _cycles(p, w, s_min, s1max, n1, disc, backend)
    if st != kernels.STATUS_OK:
        raise SimulationFault(f"failure during first stage at s_max={s1max!r}",
                              scenario=(s1max, s2max, eta_cons))
    return finish_two_stage(p, w, s2max, s_min, eta_cons, nf2, n1, disc, backend)


def finish_two_stage(p, omega, s2max, s_min, eta_cons, nf2, n1, disc, backend=None):
    """Second stage of :func:`run_two_stage` starting from damage ``omega``."""
    done, _, st = _cycles(p, omega, s_min, s2max, disc.max_cycles, disc, backend)
    if st == kernels.STATUS_OK:
        raise SimulationFault(f"runout in second stage at s_max={s2max!r}",
                              scenario=(s2max, eta_cons))
    eta_rem = done / nf2
    return TwoStageResult(eta_cons, eta_rem, eta_cons + eta_rem, n1, done)


def uniaxial_strains(p, sbar1, omega2):
    """Vectorized ``(eps1, eps2)`` magnitudes; inputs must be admissible states."""
    sbar1 = np.asarray(sbar1, dtype=float)
    w = np.asarray(omega2, dtype=float)
    e_mod = p.lam + 2 * p.mu
    lw = p.lam + p.alpha * w
    d = e_mod * (2 * (p.lam + p.mu) + 4 * (p.alpha + p.beta) * w) - 2 * lw * lw
    eps2 = (lw * sbar1 + abs(p.g) * w * e_mod) / d
    eps1 = (sbar1 + 2 * lw * eps2) / e_mod
    return eps1, eps2


def run_scenario(p, scenario, disc=None, sn=None, backend=None):
    """Simulate a block scenario, recording the creep curve and damage history.

    Consumed-fraction durations need ``sn``. A final ``ToFailure`` block runs
    until failure or ``disc.max_cycles``.
    """
    disc = disc or CycleDiscretization()
    if not scenario.blocks:
        raise InvalidScenario("scenario has no blocks")
    if not scenario.is_explicit:
        if sn is None:
            raise InvalidScenario("consumed fractions need an S-N table")
        scenario = resolve_durations(scenario, sn)
    if scenario.fc != p.fc:
        p = p.with_(fc=scenario.fc)
    k = backend or kernels.backend
    const = p.constants()
    ka = _kargs(p, disc)
    lo = scenario.s_min * p.fc
    w, st = k.integrate_ramp(const, 0.0, 0.0, lo, disc.substeps, *ka)
    hists, tops, counts = [], [], []
    failure_block = None
    runout = False
    for i, b in enumerate(scenario.blocks):
        if st != kernels.STATUS_OK:
            failure_block = i
            break
        cap = disc.max_cycles if isinstance(b.duration, ToFailure) else b.duration.count
        done, w, st, h = k.run_cycles_history(const, w, lo, b.s_max * p.fc,
                                              disc.substeps, cap, *ka)
        hists.append(h)
        tops.append(np.full(done, b.s_max * p.fc))
        counts.append(int(done))
        if st != kernels.STATUS_OK:
            failure_block = i
            break
        if isinstance(b.duration, ToFailure):
            runout = True
    counts += [0] * (len(scenario.blocks) - len(counts))
    omega = np.concatenate(hists) if hists else np.empty(0)
    top = np.concatenate(tops) if tops else np.empty(0)
    eps_top, _ = uniaxial_strains(p, top, omega)
    eps_bot, _ = uniaxial_strains(p, np.full(omega.shape, lo), omega)
    cycle = np.arange(1, omega.size + 1, dtype=float)
    return ScenarioResult(
        failed=failure_block is not None,
        failure_block=failure_block,
        cycles_per_block=counts,
        creep_curve=np.column_stack([cycle, eps_top, eps_bot]),
        damage_history=omega,
        status=_status_name(st) if failure_block is not None else ("runout" if runout else "ok"),
        runout=runout,
        block_ends=list(np.cumsum(counts)),
    )


def block_run(p, scenario, sn, disc=None, backend=None):
    """Cycle counts per block without history; returns ``(counts, failure_block)``."""
    disc = disc or CycleDiscretization()
    if not scenario.is_explicit:
        scenario = resolve_durations(scenario, sn)
    w, st = initial_damage(p, scenario.s_min, disc, backend)
    counts = []
    for i, b in enumerate(scenario.blocks):
        if st != kernels.STATUS_OK:
            return counts + [0] * (len(scenario.blocks) - i), i
        cap = disc.max_cycles if isinstance(b.duration, ToFailure) else b.duration.count
        done, w, st = _cycles(p, w, scenario.s_min, b.s_max, cap, disc, backend)
        counts.append(int(done))
        if st != kernels.STATUS_OK:
            return counts + [0] * (len(scenario.blocks) - i - 1), i
    return counts, None


def fmt(x):
    """Shortest round-trip decimal for a float, plain integer for ints."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_sn_csv(path, runs_or_table):
    """Write ``s_max,n_f``; runout levels get ``runout`` in the ``n_f`` column."""
    if isinstance(runs_or_table, SNTable):
        rows = [(s, n) for s, n in runs_or_table.entries.items()]
        rows += [(s, "runout") for s in runs_or_table.runouts]
        rows.sort()
    else:
        rows = [(s, "runout" if r.runout else r.cycles) for s, r in sorted(runs_or_table.items())]
    with open(path, "w", newline="") as fh:
        fh.write("s_max,n_f\n")
        for s, n in rows:
            fh.write(f"{fmt(s)},{n if isinstance(n, str) else fmt(n)}\n")


def read_sn_csv(path, s_min=0.2, params_fingerprint=""):
    entries, runouts = {}, []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "s_max,n_f":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            s, n = line.split(",")
            if n == "runout":
                runouts.append(float(s))
            else:
                entries[float(s)] = int(n)
    return SNTable(s_min, entries, params_fingerprint, tuple(runouts))


def write_creep_csv(path, result):
    with open(path, "w", newline="") as fh:
        fh.write("cycle,eps_top,eps_bot,omega2\n")
        for (c, top, bot), w in zip(result.creep_curve, result.damage_history):
            fh.write(f"{int(c)},{fmt(top)},{fmt(bot)},{fmt(w)}\n")

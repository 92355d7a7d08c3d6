"""Two-stage scenario grid, simulator labels and train/val/test splits."""

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import DEFAULT_LEVELS, rng
from .errors import MissingGridEntry, SimulationFault
from .loading import CycleDiscretization, eta_to_cycles
from .simulator import _kargs, _pool_map, finish_two_stage, fmt, initial_damage

ETA_GRID = tuple(round(0.05 * k, 2) for k in range(21))
SMALL_LEVELS = (0.70, 0.80)
SMALL_ETAS = (0.0, 0.35, 0.55, 0.75, 0.95, 1.0)
HEADER = "s1_max,delta_s_max,eta_cons,sum_eta,split"


@dataclass(frozen=True)
class Sample:
    s1max: float
    delta_smax: float
    eta_cons: float
    sum_eta: float = float("nan")
    split: str = ""

    @property
    def s2max(self):
        return round(self.s1max - self.delta_smax, 9)

    def features(self):
        return (self.s1max, self.delta_smax, self.eta_cons)


@dataclass
class Dataset:
    samples: list
    seed: int = 0
    sn_fingerprint: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    def arrays(self):
        """Features ``(N, 3)`` and labels ``(N,)`` as float arrays."""
        x = np.array([s.features() for s in self.samples], dtype=float).reshape(-1, 3)
        y = np.array([s.sum_eta for s in self.samples], dtype=float)
        return x, y

    def subset(self, tag):
        return Dataset([s for s in self.samples if s.split == tag], self.seed,
                       self.sn_fingerprint, dict(self.meta))

    def counts(self):
        out = {}
        for s in self.samples:
            out[s.split] = out.get(s.split, 0) + 1
        return out


def enumerate_grid(levels=DEFAULT_LEVELS, etas=ETA_GRID):
    """All ordered pairs of distinct levels times the eta grid, canonical order."""
    levels = sorted(round(float(s), 9) for s in levels)
    out = []
    for s1 in levels:
        deltas = sorted(round(s1 - s2, 9) for s2 in levels if s2 != s1)
        for d in deltas:
            for eta in etas:
                out.append((s1, d, eta))
    return out


def generate(p, sn, disc=None, seed=0, s_min=0.2, levels=DEFAULT_LEVELS, threads=1, backend=None):
    """Label every grid entry with the two-stage simulator.

    The first stage at a given ``s1max`` is shared between all second levels
    and eta values: one run records the damage at every required cycle count,
    which is bit-identical to separate runs from scratch.
    """
    disc = disc or CycleDiscretization()
    k = backend or kernels.backend
    grid = enumerate_grid(levels)
    w0, st = initial_damage(p, s_min, disc, k)
    if st != kernels.STATUS_OK:
        raise SimulationFault("failure on the initial ramp", scenario=("s_min", s_min))
    start = {}
    for s1 in sorted({g[0] for g in grid}):
        nf1 = sn.lookup(s1)
        etas = sorted({g[2] for g in grid if g[0] == s1 and 0.0 < g[2] < 1.0})
        marks = np.array([eta_to_cycles(e, nf1) for e in etas], dtype=np.int64)
        omegas, _, st = k.run_checkpoints(p.constants(), w0, s_min * p.fc, s1 * p.fc,
                                          disc.substeps, marks, *_kargs(p, disc))
        if st != kernels.STATUS_OK:
            raise SimulationFault(f"first stage failed at s_max={s1!r}", scenario=(s1,))
        start[s1] = {e: (int(m), float(w)) for e, m, w in zip(etas, marks, omegas)}
        start[s1][0.0] = (0, w0)

    def label(entry):
        s1, d, eta = entry
        s2 = round(s1 - d, 9)
        if eta == 1.0:
            return 1.0
        n1, w = start[s1][eta]
        try:
            r = finish_two_stage(p, w, s2, s_min, eta, sn.lookup(s2), n1, disc, k)
        except SimulationFault as exc:
            raise SimulationFault(str(exc), scenario=entry) from None
        return r.sum_eta

    labels = _pool_map(label, grid, threads)
    samples = [Sample(s1, d, eta, y) for (s1, d, eta), y in zip(grid, labels)]
    meta = {
        "seed": int(seed),
        "params": p.as_dict(),
        "discretization": disc.as_dict(),
        "s_min": s_min,
        "sn_table": {fmt(s): n for s, n in sn.entries.items()},
        "sn_fingerprint": sn.params_fingerprint,
        "version": __version__,
    }
    return Dataset(samples, int(seed), sn.params_fingerprint, meta)


def _largest_remainder(fractions, n):
    """Integer counts summing to ``n``; ties in the remainder go to later entries."""
    exact = [Fraction(str(f)) * n for f in fractions]
    counts = [int(q) for q in exact]
    order = sorted(range(len(exact)), key=lambda i: (exact[i] - counts[i], i), reverse=True)
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def split(dataset, fractions=(0.7, 0.15, 0.15), seed=0, tags=("train", "val", "test")):
    """Seeded shuffle, then consecutive partition by largest-remainder counts."""
    if len(fractions) != len(tags):
        raise ValueError("one fraction per tag required")
    if any(f < 0 for f in fractions) or sum(Fraction(str(f)) for f in fractions) != 1:
        raise ValueError("fractions must be non-negative and sum to 1")
    n = len(dataset.samples)
    counts = _largest_remainder(fractions, n)
    perm = rng(seed, "split").permutation(n)
    assign = [""] * n
    pos = 0
    for tag, c in zip(tags, counts):
        for i in perm[pos:pos + c]:
            assign[i] = tag
        pos += c
    samples = [replace(s, split=t) for s, t in zip(dataset.samples, assign)]
    meta = dict(dataset.meta, split={"mode": "random", "fractions": list(fractions), "seed": int(seed)})
    return Dataset(samples, dataset.seed, dataset.sn_fingerprint, meta)


def _is_small_train(s):
    return s.s1max in SMALL_LEVELS and s.eta_cons in SMALL_ETAS


def _check_canonical(dataset):
    have = [(s.s1max, s.delta_smax, s.eta_cons) for s in dataset.samples]
    if have != enumerate_grid():
        raise MissingGridEntry("dataset is not the canonical 630-sample grid")


def tag_small_subset(dataset):
    """Tag the 60 small-set samples ``train`` and the other 570 ``test``."""
    _check_canonical(dataset)
    samples = [replace(s, split="train" if _is_small_train(s) else "test") for s in dataset.samples]
    meta = dict(dataset.meta, split={"mode": "small-subset"})
    return Dataset(samples, dataset.seed, dataset.sn_fingerprint, meta)


def small_subset(dataset):
    """``(train, test)`` datasets of 60 and 570 samples."""
    tagged = tag_small_subset(dataset)
    return tagged.subset("train"), tagged.subset("test")


def meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_dataset(dataset, path):
    with open(path, "w", newline="") as fh:
        fh.write(HEADER + "\n")
        for s in dataset.samples:
            fh.write(f"{fmt(s.s1max)},{fmt(s.delta_smax)},{fmt(s.eta_cons)},{fmt(s.sum_eta)},{s.split}\n")
    meta = dict(dataset.meta, seed=dataset.seed, sn_fingerprint=dataset.sn_fingerprint,
                n_samples=len(dataset.samples))
    with open(meta_path(path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_dataset(path):
    samples = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for n, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"{path}:{n}: expected 5 fields")
            s1, d, eta, y = (float(v) for v in parts[:4])
            samples.append(Sample(s1, d, eta, y, parts[4]))
    meta = {}
    mp = meta_path(path)
    if mp.exists():
        with open(mp) as fh:
            meta = json.load(fh)
    return Dataset(samples, int(meta.get("seed", 0)), meta.get("sn_fingerprint", ""), meta)

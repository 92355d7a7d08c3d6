import pytest

from concrete_fatigue import dataset as ds
from concrete_fatigue.errors import MissingGridEntry
from concrete_fatigue.simulator import run_two_stage

LEVELS = (0.80, 0.85, 0.90)


def _fake_full():
    return ds.Dataset([ds.Sample(s1, d, e, 1.0) for s1, d, e in ds.enumerate_grid()], seed=3)


@pytest.fixture(scope="module")
def small_grid(params, disc, sn_high):
    return ds.generate(params, sn_high, disc, seed=1, levels=LEVELS)


def test_grid():
    grid = ds.enumerate_grid()
    assert len(grid) == 630
    assert all(d != 0 for _, d, _ in grid)
    assert sorted({d for s1, d, _ in grid if s1 == 0.65}) == [-0.25, -0.2, -0.15, -0.1, -0.05]
    assert len(set(grid)) == 630


def test_generate_matches_direct_runs(params, disc, sn_high, small_grid):
    assert len(small_grid) == 6 * 21
    by_key = {(s.s1max, s.delta_smax, s.eta_cons): s.sum_eta for s in small_grid.samples}
    for s1, s2, eta in [(0.9, 0.8, 0.35), (0.8, 0.85, 0.05), (0.85, 0.9, 0.95), (0.9, 0.85, 0.0)]:
        direct = run_two_stage(params, s1, s2, 0.2, eta, sn_high, disc).sum_eta
        assert by_key[(s1, round(s1 - s2, 9), eta)] == direct


def test_boundary_labels(small_grid):
    for s in small_grid.samples:
        if s.eta_cons in (0.0, 1.0):
            assert s.sum_eta == 1.0


def test_generate_threads(params, disc, sn_high, small_grid):
    again = ds.generate(params, sn_high, disc, seed=1, levels=LEVELS, threads=4)
    assert again.samples == small_grid.samples


def test_split_counts():
    out = ds.split(_fake_full(), (0.7, 0.15, 0.15), seed=0)
    assert out.counts() == {"train": 441, "val": 94, "test": 95}
    assert ds.split(_fake_full(), (0.7, 0.15, 0.15), seed=0).samples == out.samples
    assert ds.split(_fake_full(), (1, 0, 0), seed=0).counts() == {"train": 630}
    assert ds.split(_fake_full(), (0.7, 0.15, 0.15), seed=1).samples != out.samples


def test_split_validation():
    with pytest.raises(ValueError):
        ds.split(_fake_full(), (0.5, 0.2, 0.2))
    with pytest.raises(ValueError):
        ds.split(_fake_full(), (0.5, 0.5))


def test_largest_remainder():
    assert ds._largest_remainder((0.7, 0.15, 0.15), 630) == [441, 94, 95]
    assert sum(ds._largest_remainder((1 / 3, 1 / 3, 1 / 3), 10)) == 10


def test_small_subset():
    train, test = ds.small_subset(_fake_full())
    assert len(train) == 60 and len(test) == 570
    assert {s.s1max for s in train.samples} == {0.7, 0.8}
    keys = {s.features() for s in train.samples}
    assert not keys & {s.features() for s in test.samples}


def test_small_subset_needs_full_grid():
    full = _fake_full()
    with pytest.raises(MissingGridEntry):
        ds.small_subset(ds.Dataset(full.samples[:-1]))


def test_round_trip(tmp_path, small_grid):
    tagged = ds.split(small_grid, (0.7, 0.15, 0.15), seed=2)
    path = tmp_path / "d.csv"
    ds.write_dataset(tagged, path)
    back = ds.read_dataset(path)
    assert back.samples == tagged.samples
    assert back.seed == 1 and back.sn_fingerprint == small_grid.sn_fingerprint
    assert ds.meta_path(path).exists()
    first = path.read_bytes()
    ds.write_dataset(tagged, path)
    assert path.read_bytes() == first


def test_bad_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n")
    with pytest.raises(ValueError):
        ds.read_dataset(path)

import numpy as np
import pytest

from concrete_fatigue import simulator as sim
from concrete_fatigue.errors import InvalidScenario, MissingSNEntry
from concrete_fatigue.loading import (ConsumedFraction, CycleDiscretization, ExplicitCycles,
                                      LoadBlock, LoadScenario)

NF_090 = 7511          # frozen reference life at s_max=0.90, s_min=0.2


def test_reference_life(params):
    assert sim.run_constant_amplitude(params, 0.9) == NF_090


def test_equal_levels_run_out(params):
    r = sim.run_constant_amplitude(params, 0.2, 0.2, max_cycles=100)
    assert isinstance(r, sim.Runout) and r.cycles == 100


def test_cycle_cap_runout(params):
    r = sim.run_constant_amplitude(params, 0.9, max_cycles=100)
    assert r == sim.Runout(100)


def test_life_decreases_with_level(sn_high):
    lives = [sn_high.lookup(s) for s in (0.80, 0.85, 0.90)]
    assert lives[0] > lives[1] > lives[2]


def test_sn_table(params, disc, sn_high):
    assert sn_high.levels == (0.8, 0.85, 0.9)
    assert 0.85 in sn_high and 0.7 not in sn_high
    with pytest.raises(MissingSNEntry):
        sn_high.lookup(0.7)
    perm = sim.build_sn_table(params, (0.9, 0.8, 0.85), disc=disc)
    assert perm.entries == sn_high.entries
    single = sim.build_sn_table(params, (0.9,), disc=disc)
    assert single.entries == {0.9: NF_090}
    with pytest.raises(ValueError):
        sim.build_sn_table(params, ())


def test_runout_in_table(params):
    with pytest.raises(MissingSNEntry):
        sim.build_sn_table(params, (0.9,), max_cycles=10)
    t = sim.build_sn_table(params, (0.9,), max_cycles=10, allow_runout=True)
    assert t.runouts == (0.9,) and not t.entries


def test_two_stage_boundaries(params, sn_high):
    assert sim.run_two_stage(params, 0.9, 0.8, 0.2, 0.0, sn_high).sum_eta == 1.0
    assert sim.run_two_stage(params, 0.9, 0.8, 0.2, 1.0, sn_high).sum_eta == 1.0


def test_sequence_effect(params, sn_high):
    hl = sim.run_two_stage(params, 0.9, 0.8, 0.2, 0.2, sn_high)
    lh = sim.run_two_stage(params, 0.8, 0.9, 0.2, 0.2, sn_high)
    assert hl.sum_eta < 1 < lh.sum_eta
    assert hl.eta_cons + hl.eta_rem == hl.sum_eta


def test_scenario_matches_constant_amplitude(params):
    res = sim.run_scenario(params, LoadScenario((LoadBlock(0.9),)))
    assert res.failed and res.cycles_per_block == [NF_090]
    assert res.creep_curve.shape == (NF_090, 3)
    assert np.all(np.diff(res.creep_curve[:, 1]) > 0)


def test_scenario_consistent_with_two_stage(params, sn_high):
    sc = LoadScenario((LoadBlock(0.9, ConsumedFraction(0.3)), LoadBlock(0.8)))
    res = sim.run_scenario(params, sc, sn=sn_high)
    ts = sim.run_two_stage(params, 0.9, 0.8, 0.2, 0.3, sn_high)
    assert res.cycles_per_block == [ts.n1, ts.n2]
    assert sim.block_run(params, sc, sn_high) == ([ts.n1, ts.n2], 1)


def test_increasing_steps_raise_upper_strain(params):
    sc = LoadScenario(tuple(LoadBlock(s, ExplicitCycles(200)) for s in (0.6, 0.7, 0.8)))
    res = sim.run_scenario(params, sc)
    assert not res.failed and res.status == "ok"
    ends = [int(e) - 1 for e in res.block_ends]
    tops = res.creep_curve[ends, 1]
    assert tops[0] < tops[1] < tops[2]


def test_scenario_needs_sn_for_fractions(params):
    sc = LoadScenario((LoadBlock(0.9, ConsumedFraction(0.3)), LoadBlock(0.8)))
    with pytest.raises(InvalidScenario):
        sim.run_scenario(params, sc)


def test_failure_in_first_block(params):
    sc = LoadScenario((LoadBlock(0.9, ExplicitCycles(10**5)), LoadBlock(0.8)))
    res = sim.run_scenario(params, sc)
    assert res.failure_block == 0 and res.cycles_per_block == [NF_090, 0]


def test_determinism(params, sn_high):
    a = sim.run_two_stage(params, 0.85, 0.9, 0.2, 0.4, sn_high)
    b = sim.run_two_stage(params, 0.85, 0.9, 0.2, 0.4, sn_high)
    assert a == b


def test_sn_csv_round_trip(tmp_path, params, sn_high):
    path = tmp_path / "sn.csv"
    sim.write_sn_csv(path, sn_high)
    back = sim.read_sn_csv(path)
    assert back.entries == sn_high.entries
    runs = sim.sn_runs(params, (0.9,), max_cycles=5)
    sim.write_sn_csv(path, runs)
    assert "runout" in path.read_text()


def test_creep_csv(tmp_path, params):
    res = sim.run_scenario(params, LoadScenario((LoadBlock(0.9, ExplicitCycles(3)),)))
    path = tmp_path / "c.csv"
    sim.write_creep_csv(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "cycle,eps_top,eps_bot,omega2" and len(lines) == 4


def test_fmt():
    assert sim.fmt(0.1) == "0.1" and sim.fmt(np.int64(3)) == "3"
    assert float(sim.fmt(1 / 3)) == 1 / 3


def test_threads_do_not_change_results(params, disc):
    a = sim.sn_runs(params, (0.85, 0.9), disc=disc, threads=1)
    b = sim.sn_runs(params, (0.85, 0.9), disc=disc, threads=4)
    assert a == b

import json

import pytest

from concrete_fatigue import studies
from concrete_fatigue.errors import InsufficientData
from concrete_fatigue.lifetime import pm_predictor


def test_families():
    for n, fams in studies.FAMILIES.items():
        assert len(fams) == 4
        for levels in fams.values():
            assert len(levels) == n
            assert all(0.65 <= s <= 0.90 for s in levels)
    assert studies.FAMILIES[3]["ascending"] == tuple(sorted(studies.FAMILIES[3]["ascending"]))
    with pytest.raises(ValueError):
        studies.sequence_spec("sideways")


def test_eta_combos_cap():
    full = studies._eta_combos(studies.sequence_spec("H-L-H", 3))
    assert len(full) == 64
    capped = studies._eta_combos(studies.sequence_spec("ascending", 5, seed=2, cap=100))
    assert len(capped) == 100 == len(set(capped))
    assert capped == studies._eta_combos(studies.sequence_spec("ascending", 5, seed=2, cap=100))


def test_alternating_scenarios():
    scs = studies.alternating_scenarios(5, 200, seed=4)
    assert len({(sc.s_max, sc.eta) for sc in scs}) == 200
    for sc in scs:
        jumps = [round(abs(a - b), 9) for a, b in zip(sc.s_max, sc.s_max[1:])]
        assert jumps == [0.2] * 4
        assert all(e in studies.JUMP_ETAS for e in sc.eta)
    assert scs == studies.alternating_scenarios(5, 200, seed=4)
    with pytest.raises(ValueError):
        studies.alternating_scenarios(2, 100)


def test_multi_jump_with_pm_stub():
    res = studies.run_multi_jump_study(None, seed=0, counts={3: 20, 5: 20}, predictor=pm_predictor)
    for r in res.values():
        assert r.mean_sum_eta == pytest.approx(1.0)
        assert not any(r.failed_early)


def test_sequence_study(tmp_path, params, sn_high, disc):
    spec = studies.StudySpec("H-L-H", (0.85, 0.9, 0.85), etas=(0.1, 0.2, 0.3))
    res = studies.run_sequence_study(None, params, sn_high, spec, disc, predictor=pm_predictor)
    assert len(res.scenarios) == 9 and res.n_excluded == 0
    assert res.mean_correction == 0.0
    assert res.r2 <= 1.0
    again = studies.run_sequence_study(None, params, sn_high, spec, disc, threads=3,
                                       predictor=pm_predictor)
    assert again.true_rem == res.true_rem
    prefix = str(tmp_path / "s")
    studies.write_sequence_outputs([res], prefix)
    lines = (tmp_path / "s_scenarios.csv").read_text().splitlines()
    assert lines[0] == "scenario_id,true_rem,pred_rem,excluded" and len(lines) == 10
    summary = json.loads((tmp_path / "s_summary.json").read_text())
    assert summary["studies"][0]["n_scenarios"] == 9


def test_sequence_study_all_excluded(params, sn_high, disc):
    spec = studies.StudySpec("L-H-L", (0.8, 0.9, 0.8), etas=(0.95,))
    with pytest.raises(InsufficientData):
        studies.run_sequence_study(None, params, sn_high, spec, disc, predictor=pm_predictor)

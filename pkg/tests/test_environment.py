import numpy as np
import pytest

from linconts._rng import Xoshiro256
from linconts.environment import (
    MAX_RESAMPLE,
    BanditInstance,
    load_arms_csv,
    normalize_minmax,
    sample_reward_event,
    synth_coupon_like,
    synth_edx_like,
    write_arms_csv,
)
from linconts.exceptions import CsvFormatError, InfeasibleError, InvalidInputError


def _csv(tmp_path, text, name="arms.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_reward_event_extremes():
    inst = BanditInstance([(0.0, 1.0), (1.0, 1.0)], 0.5)
    rng = Xoshiro256(0)
    assert all(sample_reward_event(inst, 0, rng) == 0 for _ in range(1000))
    assert all(sample_reward_event(inst, 1, rng) == 1 for _ in range(1000))
    with pytest.raises(InvalidInputError):
        sample_reward_event(inst, 2, rng)


def test_reward_event_mean():
    inst = BanditInstance([(0.3, 1.0)], 0.0)
    rng = Xoshiro256(42)
    m = 100_000
    mean = sum(sample_reward_event(inst, 0, rng) for _ in range(m)) / m
    assert abs(mean - 0.3) < 0.01


def test_reward_event_band_across_seeds():
    inst = BanditInstance([(0.3, 1.0)], 0.0)
    m = 2000
    band = 3 * np.sqrt(0.3 * 0.7 / m)
    hits = 0
    for seed in range(100):
        rng = Xoshiro256(seed)
        mean = sum(sample_reward_event(inst, 0, rng) for _ in range(m)) / m
        hits += abs(mean - 0.3) <= band
    assert hits >= 99


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        BanditInstance([], 0.5)
    with pytest.raises(InvalidInputError):
        BanditInstance([(0.5, 0.5)], 1.5)
    with pytest.raises(InvalidInputError):
        BanditInstance([(1.5, 0.5)], 0.5)
    inst = BanditInstance([(0.1, 1.0), (0.9, 0.1)], 0.5, "a")
    assert inst.feasible and inst.n_arms == 2
    assert not inst.with_eta(0.95).feasible
    assert inst.to_dict()["mu"] == [0.1, 0.9]


def test_load_csv_sorted_with_comments(tmp_path):
    p = _csv(tmp_path, "# comment\narm_id,mu,r\n2,0.9,0.1\n\n1,0.1,1.0\n")
    inst = load_arms_csv(p, eta=0.5)
    assert inst.mu.tolist() == [0.1, 0.9]
    assert inst.r.tolist() == [1.0, 0.1]
    assert inst.eta == 0.5 and inst.name == "arms"


@pytest.mark.parametrize("body, row, fragment", [
    ("arm_id,mu,r\n1,0.1,1.0\n2,1.5,0.1\n", 3, "mu"),
    ("arm_id,mu,r\n1,0.1,1.0\n1,0.2,0.1\n", 3, "duplicate"),
    ("arm_id,mu,r\n1,abc,1.0\n", 2, "non-numeric"),
    ("arm_id,mu,r\n1,0.1\n", 2, "fields"),
    ("arm_id,mu,r,extra\n1,0.1,1.0,3\n", 1, "header"),
    ("arm_id,mu\n1,0.1\n", 1, "header"),
])
def test_load_csv_errors_name_row(tmp_path, body, row, fragment):
    with pytest.raises(CsvFormatError) as err:
        load_arms_csv(_csv(tmp_path, body))
    assert err.value.row == row
    assert f"row {row}" in str(err.value)
    assert fragment in str(err.value)


def test_load_csv_no_arms(tmp_path):
    with pytest.raises(CsvFormatError, match="no arms"):
        load_arms_csv(_csv(tmp_path, "# only a comment\narm_id,mu,r\n"))


def test_csv_round_trip(tmp_path):
    inst = synth_edx_like(7, Xoshiro256(3))
    p = tmp_path / "out.csv"
    write_arms_csv(inst, p, comment="edx-like\nseed 3")
    back = load_arms_csv(p, eta=inst.eta)
    assert back.mu.tolist() == inst.mu.tolist()
    assert back.r.tolist() == inst.r.tolist()


def test_synth_coupon_ranges():
    inst = synth_coupon_like(142, Xoshiro256(0))
    assert inst.n_arms == 142 and inst.eta == 0.25
    assert inst.mu.min() >= 0 and inst.mu.max() <= 0.30
    assert inst.r.min() > 0 and inst.r.max() <= 1.0
    assert inst.feasible
    assert synth_coupon_like(2, Xoshiro256(1)).n_arms == 2


def test_synth_edx_ranges():
    inst = synth_edx_like(290, Xoshiro256(0))
    assert inst.n_arms == 290 and inst.eta == 0.5
    assert inst.r.max() <= 0.40 and inst.r.min() > 0
    assert inst.feasible


def test_synth_deterministic_and_validated():
    a = synth_coupon_like(20, Xoshiro256(9))
    b = synth_coupon_like(20, Xoshiro256(9))
    assert a == b
    with pytest.raises(InvalidInputError):
        synth_coupon_like(1, Xoshiro256(0))


def test_synth_resample_cap():
    # mu never exceeds 0.30, so eta = 0.5 can never be met
    with pytest.raises(InfeasibleError, match=f"{MAX_RESAMPLE} draws"):
        synth_coupon_like(3, Xoshiro256(0), eta=0.5)


def test_synth_resamples_infeasible_draws():
    # with 2 arms and eta = 0.29 most draws are infeasible, yet one is found
    inst = synth_coupon_like(2, Xoshiro256(0), eta=0.29)
    assert inst.mu.max() >= 0.29


def test_normalize_minmax():
    assert normalize_minmax([10, 20, 30]).tolist() == [0.0, 0.5, 1.0]
    assert normalize_minmax([0, 100]).tolist() == [0.0, 1.0]
    v = normalize_minmax(np.random.default_rng(0).integers(1, 10_000, 50))
    assert v.min() == 0.0 and v.max() == 1.0
    with pytest.raises(InvalidInputError):
        normalize_minmax([4, 4, 4])

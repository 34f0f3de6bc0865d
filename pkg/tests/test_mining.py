import numpy as np
import pytest

from cropmine.errors import ConfigError, FormatError
from cropmine.mining import (
    MinedLabels,
    MiningThresholds,
    compose_extended_mask,
    intersection_fraction,
    mine_labels,
    mined_raster,
    mined_summary,
    overlay,
    region_fractions,
)
from cropmine.raster_io import CROPLAND, NON_CROPLAND, UNKNOWN, LabelMask
from cropmine.regions import extract_regions
from oracles import brute_force_fraction


def weak(a):
    return LabelMask(np.asarray(a, np.uint8), kind="weak")


def regions_of(codes):
    codes = np.asarray(codes, np.uint8)
    return extract_regions(LabelMask(codes, kind="cluster", classes=int(codes.max()) + 1))


def three_strips(fractions_hits):
    """One region per row of 10 pixels; row i has hits[i] weak-cropland pixels."""
    codes = np.array([[i % 2] * 10 for i in range(len(fractions_hits))])
    w = np.ones_like(codes)
    for i, k in enumerate(fractions_hits):
        w[i, :k] = CROPLAND
    return regions_of(codes), weak(w)


def test_full_and_empty_overlap():
    rs = regions_of(np.zeros((3, 3)))
    region = next(iter(rs))
    assert intersection_fraction(region, weak(np.full((3, 3), 2))) == 1.0
    assert intersection_fraction(region, weak(np.ones((3, 3)))) == 0.0


def test_eight_of_ten_is_not_positive():
    rs, w = three_strips([8])
    region = next(iter(rs))
    assert intersection_fraction(region, w) == 0.8
    mined = mine_labels(rs, w)
    assert mined.positives == () and mined.negatives == () and mined.discarded == 1


def test_hand_thresholds():
    rs, w = three_strips([9, 5, 1])
    mined = mine_labels(rs, w)
    assert mined.positives == ((0, 0.9),)
    assert mined.negatives == ((2, 0.1),)
    assert mined.discarded == 1


def test_two_of_ten_is_discarded():
    rs, w = three_strips([2])
    assert mine_labels(rs, w).negatives == ()


def test_polarity_selection():
    rs, w = three_strips([9, 5, 1])
    assert mine_labels(rs, w, polarity="negatives").positives == ()
    assert mine_labels(rs, w, polarity="positives").negatives == ()
    with pytest.raises(ConfigError):
        mine_labels(rs, w, polarity="neither")


def test_threshold_validation():
    with pytest.raises(ConfigError):
        MiningThresholds(positive_min=0.3, negative_max=0.5)


def test_shape_mismatch():
    rs = regions_of(np.zeros((3, 3)))
    with pytest.raises(FormatError):
        region_fractions(rs, weak(np.ones((2, 2))))


@pytest.mark.parametrize("seed", range(10))
def test_fractions_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    rs = regions_of(rng.integers(0, 3, size=(16, 16)))
    w = rng.choice([1, 2], size=(16, 16))
    fr = region_fractions(rs, weak(w))
    for rid, f in zip(rs.ids.tolist(), fr.tolist()):
        assert f == brute_force_fraction(rs.label_map, rid, w)
        assert intersection_fraction(rs.region(rid), weak(w)) == f


def test_empty_mined_is_identity():
    rs = regions_of(np.zeros((3, 3)))
    human = LabelMask(np.array([[0, 1, 2]] * 3, np.uint8), kind="sparse_human")
    out = compose_extended_mask(human, MinedLabels(), rs)
    assert np.array_equal(out.data, human.data) and out.kind == "extended"


def test_human_wins_and_negatives_fill():
    rs, w = three_strips([10, 0])
    mined = mine_labels(rs, w)
    human = np.zeros((2, 10), np.uint8)
    human[0, 0] = NON_CROPLAND
    out = compose_extended_mask(LabelMask(human, kind="sparse_human"), mined, rs).data
    assert out[0, 0] == NON_CROPLAND
    assert (out[0, 1:] == CROPLAND).all()
    assert (out[1] == NON_CROPLAND).all()


def test_unmined_pixels_stay_unknown():
    rs, w = three_strips([5])
    human = LabelMask(np.zeros((1, 10), np.uint8), kind="sparse_human")
    assert (compose_extended_mask(human, mine_labels(rs, w), rs).data == UNKNOWN).all()


def test_compose_dims_checked():
    rs = regions_of(np.zeros((3, 3)))
    human = LabelMask(np.zeros((3, 3), np.uint8), kind="sparse_human")
    with pytest.raises(FormatError):
        compose_extended_mask(human, MinedLabels(), rs, dims=(4, 4))


def test_overlay_never_touches_known():
    base = LabelMask(np.array([[0, 1, 2]], np.uint8), kind="extended")
    out = overlay(base, np.array([[2, 2, 1]]))
    assert out.data.tolist() == [[2, 1, 2]]


def test_summary_units():
    rs = regions_of(np.zeros((25, 40)))
    mined = MinedLabels(positives=((0, 1.0),))
    s = mined_summary(mined, rs, 4.7)
    assert s["positive"]["area_px"] == 1000
    assert s["positive"]["area_km2"] == pytest.approx(0.02209, abs=1e-12)
    assert s["negative"] == {"count": 0, "area_px": 0, "area_km2": 0.0}


def test_mined_dict_round_trip():
    rs, w = three_strips([9, 5, 1])
    mined = mine_labels(rs, w)
    assert MinedLabels.from_dict(mined.to_dict()) == mined


def test_mined_raster_codes():
    rs, w = three_strips([9, 5, 1])
    r = mined_raster(mine_labels(rs, w), rs)
    assert r[0].tolist() == [2] * 10 and r[1].tolist() == [0] * 10 and r[2].tolist() == [1] * 10

import math

import numpy as np
import pytest

import plpdp


def pulse_beats(bpm=120.0, start=1.0, duration=20.0):
    step = 60.0 / bpm
    return [start + k * step for k in range(int(duration / step) + 1)]


def test_formulas():
    assert plpdp.penalty(50, 50) == 0.0
    assert plpdp.penalty(100, 50) == pytest.approx(-1.0, abs=1e-12)
    assert plpdp.tempo_transition(100, 101, 100) == pytest.approx(math.exp(-1), abs=1e-12)


def test_synth_and_track_all_ppts():
    beats = pulse_beats()
    act = plpdp.synth_activation(beats)
    assert isinstance(act, np.ndarray)
    assert act.max() == pytest.approx(1 - 1e-6)
    for ppt in ["sppk", "plpdp", "plpdp-g3", "hmm"]:
        est = plpdp.track(act, ppt=ppt)
        assert plpdp.fmeasure(est, beats)["recall"] == 1.0, ppt
    est = plpdp.track(act, ppt="dp", delta0_frames=50.0)
    assert plpdp.fmeasure(est, beats)["recall"] == 1.0


def test_plp_shapes_and_range():
    act = plpdp.synth_activation(pulse_beats())
    for k in (1.0, 3.0, 5.0):
        curve = plpdp.plp(act, kernel_size=k)
        assert curve.shape == act.shape
        assert curve.min() >= 0.0 and curve.max() <= 1.0
    com = plpdp.combined_plp(act)
    assert np.all(com <= plpdp.plp(act, 3.0) + 1e-12)
    peaks = plpdp.pick_peaks(com)
    assert len(peaks) > 10


def test_conditioned_dp_and_conditions():
    act = plpdp.synth_activation(pulse_beats())
    conf, ibi = plpdp.tempo_condition(act)
    assert conf.shape == act.shape
    assert np.median(ibi) == pytest.approx(50.0, abs=1.0)
    est = plpdp.plpdp_conditioned(act, conf, ibi)
    assert plpdp.fmeasure(est, pulse_beats())["recall"] == 1.0


def test_corpus_and_stability():
    corpus = plpdp.synth_corpus(4, duration=10.0, seed=3)
    assert [t["kind"] for t in corpus] == ["constant", "ramp", "step", "rubato"]
    assert plpdp.tempo_stability(corpus[0]["reference"]) is True
    assert plpdp.tempo_stability([1.0]) is None
    again = plpdp.synth_corpus(4, duration=10.0, seed=3)
    assert again[2]["reference"] == corpus[2]["reference"]


def test_errors():
    with pytest.raises(plpdp.ParseError):
        plpdp.track(np.array([0.2, 1.5, 0.1]))
    with pytest.raises(plpdp.ConfigError):
        plpdp.track(np.array([0.2, 0.5, 0.1]), ppt="nope")
    with pytest.raises(ValueError):
        plpdp.plp(np.array([0.1] * 100), kernel_size=0.0)

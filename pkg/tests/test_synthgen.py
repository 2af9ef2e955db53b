import os

import pytest

from bgsub.frameio import FrameIOError, load_frame, load_mask
from bgsub.metrics import confusion
from bgsub.synthgen import SynthSpec, read_manifest, synth_frame, synth_sequence


def test_static_scene_never_changes():
    spec = SynthSpec(width=30, height=20, frames=10, velocity=0, start_y=0, noise_sigma=0)
    f0, m0 = synth_frame(spec, 0)
    for t in range(10):
        f, m = synth_frame(spec, t)
        assert f == f0 and m == m0


@pytest.mark.parametrize("t", [0, 7, 13, 29])
def test_area_conserved_under_wrap(t):
    spec = SynthSpec(width=32, height=16, frames=30, rect_width=10, rect_height=10, start_x=20,
                     start_y=3, velocity=3, noise_sigma=2.0, seed=1)
    frame, gt = synth_frame(spec, t)
    assert gt.foreground_count() == 100
    assert frame.pixels[gt.labels == 255].tolist() == [200] * 100


def test_seeded_determinism():
    spec = SynthSpec(width=40, height=30, frames=4, start_y=0, noise_sigma=5.0, seed=9)
    a, b = synth_frame(spec, 2), synth_frame(spec, 2)
    assert a[0] == b[0] and a[1] == b[1]
    other = SynthSpec(width=40, height=30, frames=4, start_y=0, noise_sigma=5.0, seed=10)
    assert synth_frame(other, 2)[0] != a[0]
    assert synth_frame(spec, 3)[0] != a[0]


def test_ground_truth_exact():
    spec = SynthSpec(width=40, height=30, frames=5, start_y=2, noise_sigma=3.0)
    _, gt = synth_frame(spec, 4)
    cm = confusion(gt, gt)
    assert cm.fp == cm.fn == 0


def test_bad_specs():
    with pytest.raises(ValueError):
        SynthSpec(bg_intensity=50, fg_intensity=50)
    with pytest.raises(ValueError):
        SynthSpec(width=10, height=10, rect_width=20, start_y=0)
    with pytest.raises(IndexError):
        synth_frame(SynthSpec(frames=3), 3)


def test_sequence_files_and_manifest(tmp_path):
    spec = SynthSpec(width=24, height=16, frames=5, rect_width=6, rect_height=6, start_y=2,
                     noise_sigma=2.0, seed=4)
    out = synth_sequence(spec, tmp_path / "a")
    assert len(out["frames"]) == len(out["masks"]) == 5
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names[:5] == [f"frame_{i:06d}.pgm" for i in range(5)]
    man = read_manifest(out["manifest"])
    assert SynthSpec.from_dict(man) == spec
    assert "noise_generator" in man
    for t in range(5):
        f, gt = synth_frame(spec, t)
        assert load_frame(out["frames"][t]) == f
        assert load_mask(out["masks"][t], ground_truth=True) == gt

    again = synth_sequence(spec, tmp_path / "b")
    for p, q in zip(out["frames"] + out["masks"] + [out["manifest"]],
                    again["frames"] + again["masks"] + [again["manifest"]]):
        assert p.read_bytes() == q.read_bytes()


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_dir_reports_path(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    try:
        with pytest.raises(FrameIOError, match="locked"):
            synth_sequence(SynthSpec(width=8, height=8, frames=1, rect_width=2, rect_height=2,
                                     start_y=0), locked)
    finally:
        locked.chmod(0o700)


def test_uncreatable_dir_reports_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(FrameIOError, match="file"):
        synth_sequence(SynthSpec(width=8, height=8, frames=1, rect_width=2, rect_height=2,
                                 start_y=0), blocker / "sub")

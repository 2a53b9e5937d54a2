import numpy as np
import pytest

from videocutout import AnnotationSet, Mask, VideoSequence


def square_mask(h, w, y0, x0, size):
    m = np.zeros((h, w), np.uint8)
    m[y0:y0 + size, x0:x0 + size] = 1
    return m


def static_scene(h=120, w=160, n=10, bg=(60, 60, 60), fg=(200, 40, 40),
                 y0=None, x0=None, size=None):
    size = size if size is not None else max(4, min(h, w) // 3)
    y0 = y0 if y0 is not None else h // 3
    x0 = x0 if x0 is not None else w // 3
    assert y0 + size <= h and x0 + size <= w
    frame = np.full((h, w, 3), bg, np.uint8)
    frame[y0:y0 + size, x0:x0 + size] = fg
    gt = square_mask(h, w, y0, x0, size)
    seq = VideoSequence(tuple(frame.copy() for _ in range(n)))
    return seq, gt


def translating_scene(h=120, w=160, n=12, step=2, bg=(70, 90, 110),
                      fg=(210, 60, 40), y0=40, x0=20, size=40):
    frames, gts = [], []
    for i in range(n):
        f = np.full((h, w, 3), bg, np.uint8)
        x = x0 + step * i
        f[y0:y0 + size, x:x + size] = fg
        frames.append(f)
        gts.append(square_mask(h, w, y0, x, size))
    return VideoSequence(tuple(frames)), gts


def two_era_scene(h=120, w=160, n=24, switch=13):
    """A part of the object (green block) appears at frame ``switch``."""
    frames, gts = [], []
    for i in range(1, n + 1):
        f = np.full((h, w, 3), (128, 128, 128), np.uint8)
        f[40:80, 30:70] = (200, 40, 40)
        g = square_mask(h, w, 40, 30, 40)
        if i >= switch:
            f[40:80, 70:110] = (40, 200, 40)
            g[40:80, 70:110] = 1
        frames.append(f)
        gts.append(g)
    return VideoSequence(tuple(frames)), gts


def annotation(gt, idx):
    return AnnotationSet(((idx, Mask(gt, idx)),))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def write_dataset(root, sequences):
    """sequences: dict name -> (VideoSequence, list of gt arrays)."""
    from videocutout.io import save_mask
    from PIL import Image

    for name, (seq, gts) in sequences.items():
        fdir = root / name / "frames"
        mdir = root / name / "masks"
        fdir.mkdir(parents=True)
        mdir.mkdir(parents=True)
        for i in range(seq.n_frames):
            Image.fromarray(seq.frames[i]).save(fdir / f"{i:05d}.png")
            save_mask(gts[i], mdir / f"{i:05d}.png")
    return root

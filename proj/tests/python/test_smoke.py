import numpy as np
import pytest

import boxlevelset as bls


def logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def test_energy_matches_numpy():
    rng = np.random.default_rng(0)
    u = rng.random((5, 6))
    phi = rng.uniform(-3, 3, (5, 6))
    s = logistic(phi)
    a1 = (u * s).sum() / s.sum()
    a2 = (u * (1 - s)).sum() / (1 - s).sum()
    e = bls.levelset_energy(u, phi, settings={"lambda": 0, "mu": 0})
    assert e["data_inside"] == pytest.approx(((u - a1) ** 2 * s).sum(), rel=1e-12)
    assert e["data_outside"] == pytest.approx(((u - a2) ** 2 * (1 - s)).sum(), rel=1e-12)
    assert e["area"] == pytest.approx(s.sum(), rel=1e-12)
    # numpy.gradient uses the same central / one-sided stencil.
    gy, gx = np.gradient(s)
    assert e["length"] == pytest.approx(np.hypot(gx, gy).sum(), rel=1e-12)


def test_gradient_shape_and_finite_difference():
    rng = np.random.default_rng(1)
    u = rng.random((4, 4))
    phi = rng.uniform(-2, 2, (4, 4))
    g = bls.levelset_gradient(u, phi)
    assert g.shape == (4, 4)
    h = 1e-6
    bumped = phi.copy()
    bumped[1, 2] += h
    lowered = phi.copy()
    lowered[1, 2] -= h
    fd = (bls.levelset_energy(u, bumped)["total"] - bls.levelset_energy(u, lowered)["total"]) / (2 * h)
    assert g[1, 2] == pytest.approx(fd, rel=1e-4)


def test_dice_and_constraints():
    assert bls.dice_loss([1, 1, 0, 0], [1, 0, 0, 0]) == pytest.approx(1 / 3, rel=1e-5)
    fg = np.zeros((6, 6), np.uint8)
    fg[1:5, 2:5] = 1
    assert bls.constraint_loss(fg.astype(float), fg) == pytest.approx(0.0, abs=1e-6)
    assert bls.constraint_gradient(np.full((6, 6), 0.5), fg).shape == (6, 6)


def test_rle_round_trip():
    mask = np.array([[1, 0], [0, 1]], np.uint8)
    assert list(bls.rle_encode(mask)) == [0, 1, 2, 1]
    assert np.array_equal(bls.rle_decode([0, 1, 2, 1], 2, 2), mask)
    with pytest.raises(bls.ValidationError):
        bls.rle_decode([1, 1], 2, 2)
    assert bls.mask_iou(mask, mask) == 1.0


def test_synth_then_segment():
    data = bls.synth(3, 1)
    again = bls.synth(3, 1)
    assert np.array_equal(data[0]["image"], again[0]["image"])
    assert data[0]["boxes"] == again[0]["boxes"]
    img = data[0]
    boxes = [b[:4] for b in img["boxes"]]
    classes = [b[4] for b in img["boxes"]]
    out = bls.segment(img["image"], boxes, classes)
    assert out["labels"].shape == img["image"].shape
    for pred, truth in zip(out["masks"], img["masks"]):
        assert bls.mask_iou(pred, truth) > 0.9


def test_evolve_demo_descends():
    img = np.zeros((40, 40))
    yy, xx = np.mgrid[:40, :40]
    img[(yy - 20) ** 2 + (xx - 20) ** 2 <= 64] = 1.0
    r = bls.evolve(img, (11, 11, 30, 30), settings={"max_iters": 100})
    trace = np.asarray(r["energy_trace"])
    assert np.all(np.diff(trace) <= 1e-9)
    assert r["iterations"] <= 100
    assert r["mask"].shape == (40, 40)


def test_config_errors():
    text = bls.format_config({"rho_cls.2": 0.5, "use_levelset": False})
    assert "rho_cls.2 = 0.5" in text
    assert "use_levelset = false" in text
    with pytest.raises(bls.ValidationError):
        bls.format_config({"alpha1": -1})
    with pytest.raises(bls.ValidationError):
        bls.format_config({"nonsense": 1})
    with pytest.raises(ValueError):
        bls.levelset_energy(np.zeros((3, 3)), np.zeros((3, 3)), class_id=4,
                            settings={"rho_cls": None})

"""Box-supervised level-set instance segmentation.

Settings are passed as ``{key: value}`` using the config-file keys, e.g.
``{"lambda": 1e-4, "rho_cls.2": 0.5, "use_constraints": False}``.
"""

from . import _core
from ._core import IoError, ValidationError

__all__ = [
    "IoError",
    "ValidationError",
    "classical_energy",
    "config_keys",
    "constraint_gradient",
    "constraint_loss",
    "dice_loss",
    "evolve",
    "format_config",
    "levelset_energy",
    "levelset_gradient",
    "mask_iou",
    "normalize",
    "rle_decode",
    "rle_encode",
    "segment",
    "synth",
]


def _settings(settings):
    out = {}
    for key, value in (settings or {}).items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif value is None:
            value = "none"
        out[str(key)] = str(value)
    return out


def config_keys():
    return list(_core.config_keys())


def format_config(settings=None):
    return _core.format_config(_settings(settings))


normalize = _core.normalize
dice_loss = _core.dice_loss
constraint_loss = _core.constraint_loss
constraint_gradient = _core.constraint_gradient
rle_encode = _core.rle_encode
rle_decode = _core.rle_decode
mask_iou = _core.mask_iou


def levelset_energy(image, phi, class_id=0, settings=None):
    """Energy terms of ``phi`` over an image already scaled to [0, 1]."""
    return _core.levelset_energy(image, phi, class_id, _settings(settings))


def levelset_gradient(image, phi, class_id=0, settings=None):
    return _core.levelset_gradient(image, phi, class_id, _settings(settings))


def classical_energy(image, phi, eps_h=1e-3, class_id=0, settings=None):
    return _core.classical_energy(image, phi, eps_h, class_id, _settings(settings))


def evolve(image, box, class_id=0, settings=None):
    """Evolves one box. ``image`` is raw; it is normalized first."""
    return _core.evolve(image, list(box), class_id, _settings(settings))


def segment(image, boxes, classes=None, settings=None, jobs=1):
    return _core.segment(image, [list(b) for b in boxes], list(classes or []),
                         _settings(settings), jobs)


def synth(seed, count, **overrides):
    return _core.synth(seed, count, {k: float(v) for k, v in overrides.items()})

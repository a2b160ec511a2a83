"""sRGB colours, WCAG relative luminance and contrast ratio."""
from dataclasses import dataclass

import numpy as np


def _linearize(x):
    s = x / 255
    return s / 12.92 if s <= 0.03928 else ((s + 0.055) / 1.055) ** 2.4


# per-channel linearized values, shared by luminance and the clustering seeds
LINEAR = np.array([_linearize(i) for i in range(256)], dtype=np.float64)


@dataclass(frozen=True, slots=True)
class Color:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for v in (self.r, self.g, self.b):
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= 255:
                raise ValueError(f"colour component out of range: {v!r}")

    @classmethod
    def from_hex(cls, text):
        h = text.strip().lstrip("#")
        if len(h) == 3:
            h = "".join(c * 2 for c in h)
        if len(h) != 6:
            raise ValueError(f"not a hex colour: {text!r}")
        return cls(int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16))

    @property
    def hex(self):
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}"

    def __str__(self):
        return self.hex


def relative_luminance(c):
    """WCAG 2.0 relative luminance in [0, 1]."""
    return float(0.2126 * LINEAR[c.r] + 0.7152 * LINEAR[c.g] + 0.0722 * LINEAR[c.b])


def contrast_ratio(a, b):
    la = relative_luminance(a)
    lb = relative_luminance(b)
    hi, lo = (la, lb) if la >= lb else (lb, la)
    return (hi + 0.05) / (lo + 0.05)

"""Shared test oracles."""

import numpy as np

from mmwave_esprit.channel import PathSet


def separated_paths(rng, n_paths, min_sep_deg=2.0, bound=np.pi / 3):
    """Rejection-sample angle pairs separated by ``min_sep_deg`` in both coordinates."""
    sep = np.radians(min_sep_deg)
    aoa, aod = [], []
    while len(aoa) < n_paths:
        th, ph = rng.uniform(-bound, bound, 2)
        if all(abs(th - a) >= sep and abs(ph - d) >= sep for a, d in zip(aoa, aod)):
            aoa.append(th)
            aod.append(ph)
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2)
    return PathSet(aoa, aod, gains)

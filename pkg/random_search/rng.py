"""Seeded random streams keyed by (namespace, trial, purpose).

Each purpose gets its own ``numpy.random.Generator`` spawned from the run seed,
so the direction draws of a trial never depend on how many minibatch indices
were consumed, and trials can run in any order or in parallel. Pilot runs use a
separate namespace so they never replay the streams of the measured trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

PURPOSES: Dict[str, int] = {
    "directions": 0,
    "estimator": 1,
    # ids feed every seeded stream; never renumber
    "diagnostics": 3,
}

MAIN_NAMESPACE = 0
PILOT_NAMESPACE = 1


def spawn_stream(
    seed: int, trial: int = 0, purpose: str = "directions", namespace: int = MAIN_NAMESPACE
) -> np.random.Generator:
    try:
        purpose_id = PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"Unknown stream purpose '{purpose}'") from None
    seq = np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(namespace), int(trial), purpose_id)
    )
    return np.random.default_rng(seq)


@dataclass
class TrialStreams:
    seed: int
    trial: int = 0
    namespace: int = MAIN_NAMESPACE
    _streams: Dict[str, np.random.Generator] = field(default_factory=dict, repr=False)

    def stream(self, purpose: str) -> np.random.Generator:
        if purpose not in self._streams:
            self._streams[purpose] = spawn_stream(self.seed, self.trial, purpose, self.namespace)
        return self._streams[purpose]

    @property
    def directions(self) -> np.random.Generator:
        return self.stream("directions")

    @property
    def estimator(self) -> np.random.Generator:
        return self.stream("estimator")

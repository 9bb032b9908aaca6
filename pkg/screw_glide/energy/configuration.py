from dataclasses import dataclass

import numpy as np

from screw_glide.errors import ValidationError


@dataclass(frozen=True, eq=False)
class Configuration:
    """
    Positions of n point defects in R^d together with their Burgers moduli.

    Positions are stored as an (n, d) float array; burgers as n integers in
    {-1, +1} (all +1 when omitted).
    """
    positions: np.ndarray
    burgers: np.ndarray = None

    def __post_init__(self):
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if positions.ndim != 2 or positions.size == 0:
            raise ValidationError("a configuration needs at least one position")
        if not np.all(np.isfinite(positions)):
            raise ValidationError("positions must be finite")
        if self.burgers is None:
            burgers = np.ones(positions.shape[0], dtype=int)
        else:
            burgers = np.asarray(self.burgers)
            if burgers.shape != (positions.shape[0],):
                raise ValidationError(
                    f"burgers has {burgers.size} entries for {positions.shape[0]} positions")
            if not np.all(np.isin(burgers, (-1, 1))):
                raise ValidationError("Burgers moduli must be exactly +1 or -1")
            burgers = burgers.astype(int)
        object.__setattr__(self, 'positions', positions)
        object.__setattr__(self, 'burgers', burgers)

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def dimension(self):
        return self.positions.shape[1]

    def with_positions(self, positions):
        return Configuration(positions, self.burgers)

    def translated(self, shift):
        return self.with_positions(self.positions + np.asarray(shift, dtype=float))

    def to_dict(self):
        return {'positions': self.positions.tolist(), 'burgers': self.burgers.tolist()}

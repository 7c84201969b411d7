"""Counter-based, splittable random streams.

Every stream is a Philox-4x64-10 generator whose 128-bit key is
``seed + (stream << 64)``; the counter starts at zero.  Two streams with
different ``(seed, stream)`` pairs never share state, so trajectories can be
generated in any order (or in parallel) and still reproduce bit-for-bit.

Raw 64-bit words are turned into floats with a fixed, documented transform
rather than numpy's distribution methods, whose algorithms are allowed to
change between releases:

* uniform:  ``u = ((w >> 11) + 0.5) * 2**-53``, which lies strictly in (0, 1);
* normal:   Box-Muller on consecutive uniform pairs ``(u1, u2)``,
  ``z0 = sqrt(-2 ln u1) cos(2 pi u2)``, ``z1 = sqrt(-2 ln u1) sin(2 pi u2)``.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


def _check_word(value, name):
    if not isinstance(value, (int, np.integer)) or value < 0 or value > _MASK64:
        raise ValueError(f"{name} must be an integer in [0, 2**64), got {value!r}")
    return int(value)


class Stream:
    """One reproducible random stream identified by ``(seed, stream)``."""

    def __init__(self, seed, stream=0):
        self.seed = _check_word(seed, "seed")
        self.stream = _check_word(stream, "stream")
        self._bitgen = np.random.Philox(key=self.seed + (self.stream << 64))

    def __repr__(self):
        return f"Stream(seed={self.seed}, stream={self.stream})"

    def split(self, n):
        """Return ``n`` child streams, independent of this one and of each other.

        Children are keyed on a seed derived from this stream's first output,
        so splitting is itself deterministic.
        """
        child_seed = int(Stream(self.seed, self.stream).raw(1)[0])
        return [Stream(child_seed, k) for k in range(n)]

    def raw(self, n):
        return self._bitgen.random_raw(int(n)).astype(np.uint64)

    def uniform(self, n):
        words = self.raw(n)
        return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53

    def normal(self, n):
        n = int(n)
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]


def normal_matrix(seed, n_streams, n_per_stream, first_stream=0, scale=1.0):
    """Stack ``n_streams`` normal sequences; row ``k`` comes from stream ``first_stream + k``."""
    out = np.empty((n_streams, n_per_stream))
    for k in range(n_streams):
        out[k] = Stream(seed, first_stream + k).normal(n_per_stream)
    if scale != 1.0:
        out *= scale
    return out

"""Named, serializable random streams.

Every piece of randomness in the engine flows through a `Stream` so that
(seed, action history) fully determines world evolution and corpora are
byte-reproducible. Streams are derived from a 64-bit root seed plus a
string path, so independent subsystems (scene generation, creature AI,
question sampling, per-scene corpus fan-out) never share or race a
generator.
"""

from __future__ import annotations

import hashlib
from typing import Any, Iterable, Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(root: int, *tags: object) -> int:
    """Stable 64-bit child seed from a root seed and a tag path."""
    h = hashlib.sha256()
    h.update(str(int(root) & _MASK64).encode())
    for tag in tags:
        h.update(b"/")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "little")


class Stream:
    """A named PCG64 stream with copy and exact state round-trip."""

    def __init__(self, seed: int, name: str = "root"):
        self.seed = int(seed) & _MASK64
        self.name = name
        self._gen = np.random.Generator(np.random.PCG64(derive_seed(self.seed, name)))

    # -- derivation ----------------------------------------------------

    def child(self, *tags: object) -> "Stream":
        """Independent stream derived from this one's identity, not its state."""
        sub = "/".join([self.name, *map(str, tags)])
        return Stream(self.seed, sub)

    # -- draws ----------------------------------------------------------

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._gen.integers(low, high))

    def random(self) -> float:
        return float(self._gen.random())

    def choice(self, seq: Sequence[Any]) -> Any:
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randint(0, len(seq))]

    def weighted_choice(self, seq: Sequence[Any], weights: Sequence[float]) -> Any:
        total = float(sum(weights))
        r = self.random() * total
        acc = 0.0
        for item, w in zip(seq, weights):
            acc += w
            if r < acc:
                return item
        return seq[-1]

    def sample(self, seq: Sequence[Any], k: int) -> list[Any]:
        """k distinct elements, order randomized."""
        if k > len(seq):
            raise ValueError(f"cannot sample {k} from {len(seq)}")
        pool = list(seq)
        out = []
        for _ in range(k):
            out.append(pool.pop(self.randint(0, len(pool))))
        return out

    def shuffle(self, seq: list[Any]) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randint(0, i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    # -- state ----------------------------------------------------------

    def copy(self) -> "Stream":
        dup = Stream.__new__(Stream)
        dup.seed = self.seed
        dup.name = self.name
        dup._gen = np.random.Generator(np.random.PCG64())
        dup._gen.bit_generator.state = self._gen.bit_generator.state
        return dup

    def state_dict(self) -> dict:
        st = self._gen.bit_generator.state
        return {
            "seed": self.seed,
            "name": self.name,
            "pcg_state": str(st["state"]["state"]),
            "pcg_inc": str(st["state"]["inc"]),
            "has_uint32": int(st["has_uint32"]),
            "uinteger": int(st["uinteger"]),
        }

    @classmethod
    def from_state_dict(cls, d: dict) -> "Stream":
        s = cls(int(d["seed"]), str(d["name"]))
        s._gen.bit_generator.state = {
            "bit_generator": "PCG64",
            "state": {"state": int(d["pcg_state"]), "inc": int(d["pcg_inc"])},
            "has_uint32": int(d["has_uint32"]),
            "uinteger": int(d["uinteger"]),
        }
        return s

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Stream) and self.state_dict() == other.state_dict()

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, name={self.name!r})"

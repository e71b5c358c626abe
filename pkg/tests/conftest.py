import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))


class ScriptedRng:
    """Hands out a fixed sequence of values through the randrange interface."""

    def __init__(self, values):
        self._values = list(values)

    def randrange(self, start, stop):
        if not self._values:
            raise AssertionError("scripted rng exhausted")
        v = self._values.pop(0)
        if not start <= v < stop:
            raise AssertionError(f"scripted value {v} outside [{start}, {stop})")
        return v

    def getrandbits(self, k):
        return self.randrange(0, 1 << k)

from dataclasses import dataclass


@dataclass(frozen=True)
class TapSchedule:
    """Frame offsets sampled by a TDNN input window (negative = past)."""

    offsets: tuple

    def __post_init__(self):
        offs = tuple(int(o) for o in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if 0 not in offs:
            raise ValueError("tap schedule must contain offset 0")
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError("tap offsets must be strictly increasing")

    def __len__(self):
        return len(self.offsets)

    @property
    def span(self):
        return self.offsets[-1] - self.offsets[0]

    def span_ms(self, frame_ms):
        return self.span * frame_ms


def default_tap_schedule(window_ms=300.0, frame_ms=10.0):
    """Symmetric taps at triangular-number offsets, dense near the centre.

    The outermost taps sit at half the window, so the schedule spans the
    whole window: 300 ms at 10 ms frames gives 0, +-1, 3, 6, 10, 15.
    """
    if window_ms < frame_ms:
        raise ValueError("window must be at least one frame")
    half = int(window_ms // frame_ms) // 2
    side = []
    k = 1
    while k * (k + 1) // 2 < half:
        side.append(k * (k + 1) // 2)
        k += 1
    if half > 0:
        side.append(half)
    return TapSchedule(tuple([-o for o in reversed(side)] + [0] + side))

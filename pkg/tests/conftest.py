import struct

import numpy as np
import pytest


def varlen(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def make_midi(events, division=480, fmt=0):
    """Hand-built SMF for parser tests: events are (delta, status bytes...)."""
    body = bytearray()
    for delta, *payload in events:
        body += varlen(delta) + bytes(payload)
    body += varlen(0) + bytes((0xFF, 0x2F, 0x00))
    out = bytearray(b"MThd") + struct.pack(">IHHH", 6, fmt, 1, division)
    out += b"MTrk" + struct.pack(">I", len(body)) + body
    return bytes(out)


def note_events(notes, division=480):
    """(pitch, on_tick, off_tick) triples to delta-timed on/off events."""
    timeline = []
    for pitch, on, off in notes:
        timeline.append((on, 0x90, pitch, 100))
        timeline.append((off, 0x80, pitch, 0))
    timeline.sort(key=lambda e: (e[0], e[1]))
    events = []
    tick = 0
    for abs_tick, *payload in timeline:
        events.append((abs_tick - tick, *payload))
        tick = abs_tick
    return events


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_roll(rng, steps=64, pitch_lo=24, pitch_hi=101, density=0.08):
    from improvae.pianoroll import PianoRoll

    grid = (rng.random((steps, pitch_hi - pitch_lo + 1)) < density).astype(np.uint8)
    return PianoRoll(grid, pitch_lo, pitch_hi)


class ClassicalFactorOracle:
    """Textbook online factor-oracle construction over exact symbols.

    Independent of the package's metric oracle; used as the reference for the
    exact-match reduction checks.
    """

    def __init__(self):
        self.transitions = [{}]  # per state: symbol -> target
        self.sfx = [-1]
        self.lrs = [0]

    def add(self, symbol):
        m = len(self.transitions)
        self.transitions.append({})
        self.transitions[m - 1][symbol] = m
        k = self.sfx[m - 1]
        pi_1 = m - 1
        while k > -1 and symbol not in self.transitions[k]:
            self.transitions[k][symbol] = m
            pi_1 = k
            k = self.sfx[k]
        if k == -1:
            self.sfx.append(0)
            self.lrs.append(0)
        else:
            w = self.transitions[k][symbol]
            self.sfx.append(w)
            self.lrs.append(self._len_common_suffix(pi_1, w - 1) + 1)

    def _len_common_suffix(self, p1, p2):
        if p2 == self.sfx[p1]:
            return self.lrs[p1]
        while self.sfx[p2] != self.sfx[p1] and p2 != 0:
            p2 = self.sfx[p2]
        if self.sfx[p2] == self.sfx[p1]:
            return min(self.lrs[p1], self.lrs[p2])
        return 0

    @classmethod
    def from_string(cls, symbols):
        oracle = cls()
        for s in symbols:
            oracle.add(s)
        return oracle

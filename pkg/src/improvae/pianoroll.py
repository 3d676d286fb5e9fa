"""Piano-roll musical surface: MIDI ingestion/emission, bar framing, and
harmonic features (chroma, tonal-centroid projection).

The surface is a binary time-step x pitch grid at 16th-note resolution; a bar
in 4/4 is 16 consecutive steps flattened time-major into one frame vector.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import smf

log = logging.getLogger(__name__)

DEFAULT_PITCH_LO = 24
DEFAULT_PITCH_HI = 101  # 78 pitches inclusive
STEPS_PER_BAR = 16

# Tonal-centroid circles: fifths, minor thirds, major thirds. Radii and
# per-semitone angular steps follow the standard construction.
R_FIFTH = 1.0
R_MINOR_THIRD = 1.0
R_MAJOR_THIRD = 0.5


def _tonnetz_matrix() -> np.ndarray:
    pc = np.arange(12)
    return np.vstack(
        [
            R_FIFTH * np.sin(pc * 7.0 * np.pi / 6.0),
            R_FIFTH * np.cos(pc * 7.0 * np.pi / 6.0),
            R_MINOR_THIRD * np.sin(pc * 3.0 * np.pi / 2.0),
            R_MINOR_THIRD * np.cos(pc * 3.0 * np.pi / 2.0),
            R_MAJOR_THIRD * np.sin(pc * 2.0 * np.pi / 3.0),
            R_MAJOR_THIRD * np.cos(pc * 2.0 * np.pi / 3.0),
        ]
    )


TONNETZ_MATRIX = _tonnetz_matrix()  # (6, 12)


@dataclass
class PianoRoll:
    """Binary grid of shape (steps, pitch_count); cell = note sounding."""

    grid: np.ndarray
    pitch_lo: int = DEFAULT_PITCH_LO
    pitch_hi: int = DEFAULT_PITCH_HI

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.uint8)
        if self.pitch_lo >= self.pitch_hi:
            raise ValueError("pitch_lo must be below pitch_hi")
        if self.grid.ndim != 2 or self.grid.shape[1] != self.pitch_count:
            raise ValueError(
                f"grid shape {self.grid.shape} inconsistent with pitch range "
                f"[{self.pitch_lo}, {self.pitch_hi}]"
            )
        if not np.all((self.grid == 0) | (self.grid == 1)):
            raise ValueError("grid cells must be 0 or 1")

    @property
    def steps(self) -> int:
        return self.grid.shape[0]

    @property
    def pitch_count(self) -> int:
        return self.pitch_hi - self.pitch_lo + 1


def _quantize(tick: float, ticks_per_step: float) -> int:
    # nearest grid step, exact halves round down
    return int(math.ceil(tick / ticks_per_step - 0.5))


def parse_midi(
    midi_bytes: bytes,
    pitch_lo: int = DEFAULT_PITCH_LO,
    pitch_hi: int = DEFAULT_PITCH_HI,
) -> PianoRoll:
    """Quantize a standard MIDI file to a 16th-note piano roll.

    Note onsets/offsets snap to the nearest grid step; a note spanning k steps
    sets k consecutive cells (at least one). Pitches outside the range are
    dropped and counted in a single warning.
    """
    content = smf.read_smf(midi_bytes)
    ticks_per_step = content.division / 4.0
    steps = _quantize(content.end_tick, ticks_per_step)
    for note in content.notes:
        steps = max(steps, _quantize(note.off_tick, ticks_per_step))

    grid = np.zeros((max(steps, 0), pitch_hi - pitch_lo + 1), dtype=np.uint8)
    dropped = 0
    for note in content.notes:
        if not pitch_lo <= note.pitch <= pitch_hi:
            dropped += 1
            continue
        on = _quantize(note.on_tick, ticks_per_step)
        off = max(_quantize(note.off_tick, ticks_per_step), on + 1)
        grid[on : min(off, steps), note.pitch - pitch_lo] = 1
    if dropped:
        log.warning("dropped %d notes outside pitch range [%d, %d]",
                    dropped, pitch_lo, pitch_hi)
    return PianoRoll(grid, pitch_lo, pitch_hi)


def pianoroll_to_midi(roll: PianoRoll, tempo_bpm: float = smf.DEFAULT_TEMPO_BPM) -> bytes:
    """Emit a roll as MIDI; each maximal run of 1-cells becomes one note."""
    ticks_per_step = smf.WRITE_DIVISION // 4
    notes = []
    for col in range(roll.pitch_count):
        column = roll.grid[:, col]
        on_step = None
        for step in range(roll.steps + 1):
            active = step < roll.steps and column[step]
            if active and on_step is None:
                on_step = step
            elif not active and on_step is not None:
                notes.append(
                    smf.NoteSpan(roll.pitch_lo + col,
                                 on_step * ticks_per_step,
                                 step * ticks_per_step)
                )
                on_step = None
    return smf.write_smf(notes, roll.steps * ticks_per_step, tempo_bpm)


def to_frames(roll: PianoRoll) -> np.ndarray:
    """Split a roll into bar frames: (n_bars, 16 * pitch_count) in {0, 1}.

    Frames are non-overlapping 16-step windows flattened time-major; a
    trailing partial bar is dropped.
    """
    n_bars = roll.steps // STEPS_PER_BAR
    used = roll.grid[: n_bars * STEPS_PER_BAR]
    return used.reshape(n_bars, STEPS_PER_BAR * roll.pitch_count).astype(np.float64)


def frames_to_pianoroll(
    frames,
    pitch_lo: int = DEFAULT_PITCH_LO,
    pitch_hi: int = DEFAULT_PITCH_HI,
) -> PianoRoll:
    """Inverse of to_frames on its image."""
    pitch_count = pitch_hi - pitch_lo + 1
    frames = np.asarray(frames, dtype=np.float64)
    if frames.size == 0:
        return PianoRoll(np.zeros((0, pitch_count), dtype=np.uint8), pitch_lo, pitch_hi)
    if frames.ndim != 2 or frames.shape[1] != STEPS_PER_BAR * pitch_count:
        raise ValueError(
            f"frame length must be {STEPS_PER_BAR * pitch_count} "
            f"for pitch range [{pitch_lo}, {pitch_hi}]"
        )
    grid = frames.reshape(frames.shape[0] * STEPS_PER_BAR, pitch_count)
    return PianoRoll((grid > 0.5).astype(np.uint8), pitch_lo, pitch_hi)


def chroma(frame, pitch_lo: int = DEFAULT_PITCH_LO) -> np.ndarray:
    """Pitch-class mass of a bar frame, L1-normalized (all-zero stays zero)."""
    frame = np.asarray(frame, dtype=np.float64)
    pitch_count = frame.size // STEPS_PER_BAR
    per_pitch = frame.reshape(STEPS_PER_BAR, pitch_count).sum(axis=0)
    mass = np.zeros(12)
    for col, weight in enumerate(per_pitch):
        mass[(pitch_lo + col) % 12] += weight
    total = mass.sum()
    return mass / total if total > 0 else mass


def tonnetz(chroma_vec) -> np.ndarray:
    """Project a 12-bin chroma vector onto the 6-dimensional tonal centroid."""
    return TONNETZ_MATRIX @ np.asarray(chroma_vec, dtype=np.float64)


def _l1_normalize(v: np.ndarray) -> np.ndarray:
    total = np.abs(v).sum()
    return v / total if total > 0 else v


def tonnetz_distance(c1, c2) -> float:
    """Euclidean distance between tonal centroids of L1-normalized chromas."""
    t1 = tonnetz(_l1_normalize(np.asarray(c1, dtype=np.float64)))
    t2 = tonnetz(_l1_normalize(np.asarray(c2, dtype=np.float64)))
    return float(np.linalg.norm(t1 - t2))

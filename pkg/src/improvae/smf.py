"""Minimal standard MIDI file (SMF) reader and writer.

Reads format 0 and 1 files with PPQ time division and extracts note spans in
ticks; everything else is skipped (the first tempo event is kept for
information). Writes single-track format 0 files on channel 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

DEFAULT_TEMPO_BPM = 120.0
WRITE_DIVISION = 480  # ticks per quarter note in emitted files
WRITE_VELOCITY = 100


class MidiParseError(ValueError):
    """Malformed SMF content; `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class NoteSpan:
    pitch: int
    on_tick: int
    off_tick: int


@dataclass
class SmfContent:
    division: int  # ticks per quarter note
    tempo_bpm: float
    notes: list = field(default_factory=list)
    end_tick: int = 0


class _Cursor:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MidiParseError("unexpected end of file", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def byte(self) -> int:
        return self.take(1)[0]

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MidiParseError("variable-length quantity too long", self.pos)


def read_smf(data: bytes) -> SmfContent:
    cur = _Cursor(data)
    if cur.take(4) != b"MThd":
        raise MidiParseError("missing MThd header", 0)
    header_len = struct.unpack(">I", cur.take(4))[0]
    if header_len < 6:
        raise MidiParseError("MThd chunk too short", cur.pos - 4)
    fmt, ntrks, division = struct.unpack(">HHH", cur.take(6))
    cur.take(header_len - 6)
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported SMF format {fmt}", 8)
    if division & 0x8000:
        raise MidiParseError("SMPTE time division not supported", 12)
    if division == 0:
        raise MidiParseError("zero time division", 12)

    content = SmfContent(division=division, tempo_bpm=DEFAULT_TEMPO_BPM)
    tempo_seen = False
    for _ in range(ntrks):
        chunk_start = cur.pos
        if cur.take(4) != b"MTrk":
            raise MidiParseError("missing MTrk header", chunk_start)
        track_len = struct.unpack(">I", cur.take(4))[0]
        if cur.pos + track_len > len(data):
            raise MidiParseError("track data truncated", cur.pos)
        track = _Cursor(data[: cur.pos + track_len], cur.pos)
        tempo_seen = _read_track(track, content, tempo_seen)
        cur.pos += track_len
    return content


def _read_track(cur: _Cursor, content: SmfContent, tempo_seen: bool) -> bool:
    tick = 0
    status = 0
    open_notes: dict[int, list[int]] = {}  # pitch -> FIFO of onset ticks

    def close(pitch: int, off_tick: int) -> None:
        onsets = open_notes.get(pitch)
        if onsets:
            content.notes.append(NoteSpan(pitch, onsets.pop(0), off_tick))

    while cur.pos < len(cur.data):
        tick += cur.varlen()
        first = cur.byte()
        if first & 0x80:
            status = first
        elif status & 0x80:
            cur.pos -= 1  # running status: data byte belongs to the event
        else:
            raise MidiParseError("data byte without running status", cur.pos - 1)

        kind = status & 0xF0
        if status == 0xFF:
            meta_type = cur.byte()
            length = cur.varlen()
            payload = cur.take(length)
            if meta_type == 0x51 and length == 3 and not tempo_seen:
                usec = (payload[0] << 16) | (payload[1] << 8) | payload[2]
                if usec > 0:
                    content.tempo_bpm = 60_000_000 / usec
                    tempo_seen = True
            elif meta_type == 0x2F:
                break
            status = 0
        elif status in (0xF0, 0xF7):
            cur.take(cur.varlen())
            status = 0
        elif kind == 0x90:
            pitch, vel = cur.byte(), cur.byte()
            if vel > 0:
                open_notes.setdefault(pitch, []).append(tick)
            else:
                close(pitch, tick)
        elif kind == 0x80:
            pitch, _vel = cur.byte(), cur.byte()
            close(pitch, tick)
        elif kind in (0xA0, 0xB0, 0xE0):
            cur.take(2)
        elif kind in (0xC0, 0xD0):
            cur.take(1)
        else:
            raise MidiParseError(f"unexpected status byte 0x{status:02x}", cur.pos - 1)

    content.end_tick = max(content.end_tick, tick)
    for pitch, onsets in open_notes.items():  # close any hanging notes
        for onset in onsets:
            content.notes.append(NoteSpan(pitch, onset, tick))
    return tempo_seen


def _encode_varlen(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def write_smf(notes, end_tick: int, tempo_bpm: float = DEFAULT_TEMPO_BPM) -> bytes:
    """Emit a single-track format 0 file from NoteSpans given in WRITE_DIVISION ticks."""
    usec = round(60_000_000 / tempo_bpm)
    events = [(0, 0, bytes((0xFF, 0x51, 0x03)) + usec.to_bytes(3, "big"))]
    for note in notes:
        # note-offs sort before note-ons at the same tick
        events.append((note.off_tick, 1, bytes((0x80, note.pitch, 0))))
        events.append((note.on_tick, 2, bytes((0x90, note.pitch, WRITE_VELOCITY))))
    events.sort(key=lambda e: (e[0], e[1]))

    body = bytearray()
    tick = 0
    for event_tick, _, payload in events:
        body += _encode_varlen(event_tick - tick)
        body += payload
        tick = event_tick
    body += _encode_varlen(max(0, end_tick - tick))
    body += bytes((0xFF, 0x2F, 0x00))

    out = bytearray(b"MThd")
    out += struct.pack(">IHHH", 6, 0, 1, WRITE_DIVISION)
    out += b"MTrk" + struct.pack(">I", len(body)) + body
    return bytes(out)

import csv
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

# breakpoints closer than this (relative to the profile length) are the same time
TIME_TOLERANCE = 1e-12


class ProfileError(Exception):
    pass


@dataclass(frozen=True)
class CurrentPiece:
    """Continuous current on [t_start, t_end]: constant, a linear ramp, or linear between sampled knots.

    ``knots`` are (t, I) samples strictly inside the piece.
    """

    t_start: float
    t_end: float
    I_start: float
    I_end: float
    knots: Tuple[Tuple[float, float], ...] = ()

    @property
    def kind(self) -> str:
        if self.knots:
            return "sampled"
        return "constant" if self.I_start == self.I_end else "ramp"

    @property
    def nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        points = ((self.t_start, self.I_start),) + self.knots + ((self.t_end, self.I_end),)
        t, I = zip(*points)
        return np.array(t), np.array(I)

    def current(self, t: float) -> float:
        if self.knots:
            return float(np.interp(t, *self.nodes))
        if self.I_start == self.I_end:
            return self.I_start
        weight = (t - self.t_start) / (self.t_end - self.t_start)
        return self.I_start + weight * (self.I_end - self.I_start)

    def charge(self) -> float:
        t, I = self.nodes
        return float(np.sum(0.5 * (I[1:] + I[:-1]) * np.diff(t)))

    def split(self, t: float) -> Tuple["CurrentPiece", "CurrentPiece"]:
        I_mid = self.current(t)
        return (
            CurrentPiece(self.t_start, t, self.I_start, I_mid, tuple(k for k in self.knots if k[0] < t)),
            CurrentPiece(t, self.t_end, I_mid, self.I_end, tuple(k for k in self.knots if k[0] > t)),
        )


@dataclass(frozen=True)
class CurrentProfile:
    pieces: Tuple[CurrentPiece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise ProfileError("Current profile has no pieces")
        if self.pieces[0].t_start != 0.0:
            raise ProfileError(
                f"Current profile must start at t=0, starts at {self.pieces[0].t_start}"
            )
        for k, piece in enumerate(self.pieces):
            if not piece.t_end > piece.t_start:
                raise ProfileError(
                    f"Piece {k} is empty or reversed: [{piece.t_start}, {piece.t_end}]"
                )
            if k > 0 and piece.t_start != self.pieces[k - 1].t_end:
                raise ProfileError(
                    f"Gap or overlap between piece {k - 1} (ends {self.pieces[k - 1].t_end})"
                    f" and piece {k} (starts {piece.t_start})"
                )

    @property
    def t_end(self) -> float:
        return self.pieces[-1].t_end

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Interior piece boundaries followed by the final time."""
        return tuple(piece.t_end for piece in self.pieces)

    def piece_index(self, t: float) -> int:
        """Index of the piece a step starting at ``t`` belongs to."""
        tol = TIME_TOLERANCE * self.t_end
        for k, piece in enumerate(self.pieces):
            if t < piece.t_end - tol:
                return k
        return len(self.pieces) - 1

    def current(self, t: float, index: Optional[int] = None) -> float:
        if index is None:
            index = self.piece_index(t)
        return self.pieces[index].current(t)

    def charge(self) -> float:
        """Integral of I over [0, t_end]."""
        return sum(p.charge() for p in self.pieces)

    def with_breakpoints(self, times: Iterable[float]) -> "CurrentProfile":
        pieces = list(self.pieces)
        for t in sorted(times):
            for k, piece in enumerate(pieces):
                if piece.t_start < t < piece.t_end:
                    pieces[k : k + 1] = piece.split(t)
                    break
        return CurrentProfile(tuple(pieces))

    @classmethod
    def constant(cls, current: float, t_end: float) -> "CurrentProfile":
        return cls((CurrentPiece(0.0, t_end, current, current),))


def profile_from_samples(
    samples: Sequence[Tuple[float, float]], breakpoints: Sequence[float] = ()
) -> CurrentProfile:
    """Piecewise-linear profile through (t, I) samples.

    Pieces end only where a time repeats (a jump) and at ``breakpoints``; the samples
    in between become knots of one piece.
    """
    if len(samples) < 2:
        raise ProfileError("Current profile needs at least two (t, I) samples")
    runs: List[List[Tuple[float, float]]] = [[samples[0]]]
    for (t0, _), (t1, I1) in zip(samples[:-1], samples[1:]):
        if t1 < t0:
            raise ProfileError(f"Profile times must not decrease: {t0} then {t1}")
        if t1 == t0:
            runs.append([(t1, I1)])
        else:
            runs[-1].append((t1, I1))
    pieces = [
        CurrentPiece(run[0][0], run[-1][0], run[0][1], run[-1][1], tuple(run[1:-1]))
        for run in runs
        if len(run) > 1
    ]
    return CurrentProfile(tuple(pieces)).with_breakpoints(breakpoints)


def read_profile_csv(file: str, breakpoints: Sequence[float] = ()) -> CurrentProfile:
    samples: List[Tuple[float, float]] = []
    with open(file, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                samples.append((float(row[0]), float(row[1])))
            except ValueError:
                if samples:
                    raise ProfileError(f"Bad row in {file}: {row}")
                # header row
            except IndexError:
                raise ProfileError(f"Expected two columns (t, I) in {file}: {row}")
    logging.info(f"read {len(samples)} current samples from {file}")
    return profile_from_samples(samples, breakpoints)


def profile_from_raw(raw: Dict[str, Any], base_dir: str = ".") -> CurrentProfile:
    breakpoints = [float(t) for t in raw.get("breakpoints", [])]
    if "csv" in raw:
        return read_profile_csv(os.path.join(base_dir, raw["csv"]), breakpoints)
    pieces_raw = raw.get("pieces")
    if not pieces_raw:
        raise ProfileError("Missing 'pieces' or 'csv' in 'current' section")
    pieces = []
    for k, item in enumerate(pieces_raw):
        kind = item.get("kind", "constant")
        try:
            if kind == "constant":
                I0 = I1 = float(item["I"])
            elif kind == "ramp":
                I0, I1 = float(item["I_start"]), float(item["I_end"])
            else:
                raise ProfileError(f"Unknown kind '{kind}' in current piece {k}")
            pieces.append(
                CurrentPiece(float(item["t_start"]), float(item["t_end"]), I0, I1)
            )
        except KeyError as e:
            raise ProfileError(f"Missing key {e} in current piece {k}")
    return CurrentProfile(tuple(pieces)).with_breakpoints(breakpoints)

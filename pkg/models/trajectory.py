from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class MomentumRecord:
    pre: np.ndarray   # p^-_{k,k+1}
    post: np.ndarray  # p^+_{k-1,k}
    avg: np.ndarray   # p~_k

    @classmethod
    def from_pair(cls, pre, post) -> "MomentumRecord":
        pre = np.asarray(pre, dtype=float)
        post = np.asarray(post, dtype=float)
        return cls(pre=pre, post=post, avg=(pre + post) / 2.0)


@dataclass
class TrajectoryRecord:
    """
    Une ligne par configuration q_k (k = 0..N).
    Les moments sont dans la normalisation du lagrangien discret (scale * M v) ;
    energy / energy_post / constraint_residual sont physiques (moments divisés par scale).
    `tolerance` : seuil d'acceptation de Newton utilisé pour le pas issu de la ligne k (nan sinon).
    """

    model: str
    method: str
    h: float
    n: int
    m: int
    t: np.ndarray
    q: np.ndarray
    p_pre: np.ndarray
    p_post: np.ndarray
    p_avg: np.ndarray
    lam: np.ndarray
    energy: np.ndarray
    energy_post: np.ndarray
    constraint_residual: np.ndarray
    tolerance: np.ndarray
    q_last: Optional[np.ndarray] = None
    scale: float = 1.0
    failure: Optional[str] = None

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def failed(self) -> bool:
        return self.failure is not None

    def momentum(self, k: int) -> MomentumRecord:
        return MomentumRecord(pre=self.p_pre[k], post=self.p_post[k], avg=self.p_avg[k])

    def positions(self, include_last: bool = False) -> np.ndarray:
        if include_last and self.q_last is not None:
            return np.vstack([self.q, self.q_last[None, :]])
        return self.q


@dataclass
class TrajectoryBuilder:
    model: str
    method: str
    h: float
    n: int
    m: int
    scale: float = 1.0
    _rows: List[tuple] = field(default_factory=list)

    def append(
        self,
        t: float,
        q,
        momenta: MomentumRecord,
        lam,
        energy: float,
        energy_post: float,
        residual: float,
        tolerance: float = float("nan"),
    ) -> None:
        self._rows.append(
            (
                float(t),
                np.array(q, dtype=float),
                momenta,
                np.array(lam, dtype=float).reshape(self.m),
                float(energy),
                float(energy_post),
                float(residual),
                float(tolerance),
            )
        )

    def __len__(self) -> int:
        return len(self._rows)

    def build(self, q_last=None, failure: Optional[str] = None) -> TrajectoryRecord:
        rows = self._rows
        count = len(rows)

        def stack(values, width):
            if not values:
                return np.zeros((0, width))
            return np.vstack(values).reshape(count, width)

        return TrajectoryRecord(
            model=self.model,
            method=self.method,
            h=self.h,
            n=self.n,
            m=self.m,
            t=np.array([r[0] for r in rows], dtype=float),
            q=stack([r[1] for r in rows], self.n),
            p_pre=stack([r[2].pre for r in rows], self.n),
            p_post=stack([r[2].post for r in rows], self.n),
            p_avg=stack([r[2].avg for r in rows], self.n),
            lam=stack([r[3] for r in rows], self.m) if self.m else np.zeros((count, 0)),
            energy=np.array([r[4] for r in rows], dtype=float),
            energy_post=np.array([r[5] for r in rows], dtype=float),
            constraint_residual=np.array([r[6] for r in rows], dtype=float),
            tolerance=np.array([r[7] for r in rows], dtype=float),
            q_last=None if q_last is None else np.array(q_last, dtype=float),
            scale=self.scale,
            failure=failure,
        )


@dataclass(frozen=True)
class EnergyReport:
    energies: np.ndarray
    max_drift: float

    @classmethod
    def from_energies(cls, energies) -> "EnergyReport":
        values = np.asarray(energies, dtype=float)
        if values.size == 0:
            return cls(energies=values, max_drift=0.0)
        return cls(energies=values, max_drift=float(np.max(np.abs(values - values[0]))))

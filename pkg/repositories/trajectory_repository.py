import csv
import logging
import os
from typing import List, Optional

import numpy as np

from app.config import settings
from app.validator import ValidationIssue
from models.trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)

FAILED_MARKER = "# FAILED"


def headers(n: int, m: int) -> List[str]:
    """t | q0..q(n-1) | p_pre* | p_post* | p_avg* | lambda0..lambda(m-1) | energy | constraint_residual"""
    cols = ["t"]
    for prefix in ("q", "p_pre", "p_post", "p_avg"):
        cols.extend(f"{prefix}{i}" for i in range(n))
    cols.extend(f"lambda{a}" for a in range(m))
    cols.extend(["energy", "constraint_residual"])
    return cols


def _fmt(x: float) -> str:
    # 17 chiffres significatifs : relecture exacte
    return format(float(x), ".17g")


def resolve_path(path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(settings.GNI_OUTPUT_DIR, path)


class TrajectoryRepository:
    """Fichier CSV, une ligne par configuration q_k ; ligne finale '# FAILED ...' si l'exécution a échoué."""

    @staticmethod
    def save(record: TrajectoryRecord, path: str) -> str:
        target = resolve_path(path)
        folder = os.path.dirname(target)
        if folder:
            os.makedirs(folder, exist_ok=True)

        with open(target, "w", newline="", encoding="utf-8") as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(headers(record.n, record.m))
            for k in range(len(record)):
                row = [record.t[k]]
                row.extend(record.q[k])
                row.extend(record.p_pre[k])
                row.extend(record.p_post[k])
                row.extend(record.p_avg[k])
                row.extend(record.lam[k])
                row.extend([record.energy[k], record.constraint_residual[k]])
                writer.writerow([_fmt(x) for x in row])
            if record.failed:
                stream.write(f"{FAILED_MARKER} {record.failure}\n")

        logger.info(
            "Trajectoire enregistrée",
            extra={"path": target, "rows": len(record), "failed": record.failed},
        )
        return target

    @staticmethod
    def load(path: str, *, model: str = "", method: str = "", h: Optional[float] = None) -> TrajectoryRecord:
        target = resolve_path(path)
        failure = None
        rows = []
        with open(target, newline="", encoding="utf-8") as stream:
            lines = stream.read().splitlines()
        if not lines:
            raise ValidationIssue("fichier de trajectoire vide", field="path", value=target)

        cols = next(csv.reader([lines[0]]))
        n = sum(1 for c in cols if c.startswith("q") and c[1:].isdigit())
        m = sum(1 for c in cols if c.startswith("lambda"))
        if cols != headers(n, m):
            raise ValidationIssue("en-tête de trajectoire invalide", field="path", value=target)

        for line in lines[1:]:
            if line.startswith(FAILED_MARKER):
                failure = line[len(FAILED_MARKER):].strip()
                continue
            if not line.strip():
                continue
            rows.append([float(x) for x in next(csv.reader([line]))])

        data = np.array(rows, dtype=float).reshape(len(rows), len(cols))
        t = data[:, 0]
        blocks = np.split(data[:, 1:1 + 4 * n], 4, axis=1) if n else [np.zeros((len(rows), 0))] * 4
        lam = data[:, 1 + 4 * n:1 + 4 * n + m]
        if h is None:
            h = float(t[1] - t[0]) if len(t) > 1 else float("nan")

        return TrajectoryRecord(
            model=model,
            method=method,
            h=h,
            n=n,
            m=m,
            t=t,
            q=blocks[0],
            p_pre=blocks[1],
            p_post=blocks[2],
            p_avg=blocks[3],
            lam=lam,
            energy=data[:, -2],
            energy_post=data[:, -2].copy(),
            constraint_residual=data[:, -1],
            tolerance=np.full(len(rows), np.nan),
            failure=failure,
        )

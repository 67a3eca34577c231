"""Scenario configuration shared by the channel generator, estimators, and benchmark driver."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_ESTIMATORS = ("oracle_ls", "triple_structured", "row_structured", "conventional_omp")


@dataclass(frozen=True)
class ArrayGeometry:
    """Reflector element layout: linear ("ula", n1 elements) or planar ("upa", n1 x n2)."""

    kind: str
    n1: int
    n2: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("ula", "upa"):
            raise ValueError(f"unknown array kind {self.kind!r}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("array dimensions must be positive")
        if self.kind == "ula" and self.n2 != 1:
            raise ValueError("a linear array must have n2 == 1")

    @classmethod
    def ula(cls, n: int) -> "ArrayGeometry":
        return cls("ula", n)

    @classmethod
    def upa(cls, n1: int, n2: int) -> "ArrayGeometry":
        return cls("upa", n1, n2)

    @property
    def n_elements(self) -> int:
        return self.n1 * self.n2

    @property
    def is_planar(self) -> bool:
        return self.kind == "upa"


@dataclass(frozen=True)
class SystemConfig:
    """One benchmark scenario.

    snr_db of None runs noiseless; bs_paths is the number of reflector-to-BS
    paths (the shared beamspace column count) and ue_paths bounds the per-user
    path count drawn uniformly at random, inclusive on both ends.
    """

    n_bs: int = 64
    geometry: ArrayGeometry = ArrayGeometry("ula", 128)
    n_users: int = 16
    bs_paths: int = 4
    ue_paths: tuple[int, int] = (4, 8)
    n_pilots: int = 32
    snr_db: float | None = 0.0
    trials: int = 100
    base_seed: int = 0
    estimators: tuple[str, ...] = DEFAULT_ESTIMATORS

    def validate(self) -> None:
        n_i = self.geometry.n_elements
        if self.n_bs < 1:
            raise ValueError("n_bs must be positive")
        if self.n_users < 1:
            raise ValueError("n_users must be positive")
        if self.n_pilots < 1:
            raise ValueError("n_pilots must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 1 <= self.bs_paths <= min(self.n_bs, n_i):
            raise ValueError(f"bs_paths must lie in [1, {min(self.n_bs, n_i)}]")
        lo, hi = self.ue_paths
        if not 1 <= lo <= hi <= n_i:
            raise ValueError(f"ue_paths range ({lo}, {hi}) invalid for {n_i} reflector elements")
        if self.snr_db is not None and not isinstance(self.snr_db, (int, float)):
            raise ValueError("snr_db must be a number or None")
        if not self.estimators:
            raise ValueError("at least one estimator must be selected")
        if len(set(self.estimators)) != len(self.estimators):
            raise ValueError("estimator list contains duplicates")

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None or self.snr_db == float("inf")

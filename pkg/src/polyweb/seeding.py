"""Deterministic splittable seeding.

Every run derives child generators as
``SeedSequence(master, spawn_key=(subcommand_code, replica_index))`` where the
subcommand code is the stable CRC of the subcommand name; replicas are
therefore reproducible independently of execution order.
"""

from __future__ import annotations

import zlib

import numpy as np


def subcommand_code(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def derive_rng(master_seed: int, subcommand: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed,
                                spawn_key=(subcommand_code(subcommand), index))
    return np.random.default_rng(ss)

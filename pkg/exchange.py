#!/usr/bin/env python3
"""
Two-leader-node session and the wire format for shared vectors.

Node 1 may send node 2 only the N vectors g_j = lambda_j u_j, never its rows
or its selection. Every session passes them through encode/decode and
checks that exactly N * n scalars crossed the channel.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from config import SolverParams
from exceptions import MessageFormatError, InformationBudgetError, ValidationError
from model import Partition
from strategies import (
    Strategy, SharedVectorSet, StrategyOutcome, combine_nodes, extract_shared_vectors,
    parse_strategy, solve_node, solve_fdm_node, solve_lpm_node
)
from utils import safe_file_writer
from validators import validate_decentralized_budget, validate_shared_count

logger = logging.getLogger(__name__)

SENDER_NODE = 1
MESSAGE_KEYS = ("sender", "n", "vectors")


@dataclass(frozen=True)
class SharedVectorMessage:
    """Payload node 1 sends to node 2."""
    sender: int
    n: int
    vectors: Tuple[Tuple[float, ...], ...]

    @property
    def payload_scalars(self) -> int:
        return len(self.vectors) * self.n

    @property
    def byte_budget(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_shared(cls, shared: SharedVectorSet) -> 'SharedVectorMessage':
        vectors = tuple(tuple(float(value) for value in row) for row in shared.vectors)
        return cls(sender=SENDER_NODE, n=shared.n, vectors=vectors)

    def to_bytes(self) -> bytes:
        payload = {
            "sender": self.sender,
            "n": self.n,
            "vectors": [list(row) for row in self.vectors],
        }
        # float repr is the shortest string that round-trips
        return json.dumps(payload, separators=(',', ':'), allow_nan=False).encode('utf-8')

    @classmethod
    def from_bytes(cls, data: bytes) -> 'SharedVectorMessage':
        def reject_constant(token: str):
            raise MessageFormatError(f"Non-finite value {token} in message")

        try:
            payload = json.loads(data.decode('utf-8'), parse_constant=reject_constant)
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise MessageFormatError(f"Message is not valid JSON: {e}")

        if not isinstance(payload, dict) or tuple(sorted(payload)) != tuple(sorted(MESSAGE_KEYS)):
            raise MessageFormatError(f"Message must have exactly the keys {list(MESSAGE_KEYS)}")
        sender, n, vectors = payload["sender"], payload["n"], payload["vectors"]
        if sender != SENDER_NODE or isinstance(sender, bool):
            raise MessageFormatError(f"Unexpected sender {sender!r}")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise MessageFormatError(f"Dimension n must be a positive integer, got {n!r}")
        if not isinstance(vectors, list):
            raise MessageFormatError("vectors must be a list")

        rows = []
        for row in vectors:
            if not isinstance(row, list) or len(row) != n:
                raise MessageFormatError(f"Every vector must have exactly n={n} entries")
            if any(isinstance(value, bool) or not isinstance(value, (int, float)) for value in row):
                raise MessageFormatError("Vector entries must be numbers")
            rows.append(tuple(float(value) for value in row))
        return cls(sender=sender, n=n, vectors=tuple(rows))

    def to_shared(self) -> SharedVectorSet:
        try:
            return SharedVectorSet(np.array(self.vectors, dtype=float).reshape(len(self.vectors), self.n))
        except ValidationError as e:
            raise MessageFormatError(f"Message does not describe a shared vector set: {e}")


def encode_message(shared: SharedVectorSet) -> bytes:
    """Canonical JSON bytes for a shared vector set."""
    return SharedVectorMessage.from_shared(shared).to_bytes()


def decode_message(data: bytes) -> SharedVectorSet:
    """Inverse of encode_message."""
    return SharedVectorMessage.from_bytes(data).to_shared()


def write_message(path: str, data: bytes) -> None:
    """Write an encoded message to disk for inspection."""
    with safe_file_writer(path) as f:
        f.write(data.decode('utf-8'))
        f.write('\n')


@dataclass
class Transcript:
    """Everything that crossed the node 1 -> node 2 channel."""
    strategy: Strategy
    messages: List[bytes] = field(default_factory=list)
    payload_scalars: int = 0

    def record(self, data: bytes, scalars: int) -> None:
        self.messages.append(data)
        self.payload_scalars += scalars

    @property
    def byte_count(self) -> int:
        return sum(len(message) for message in self.messages)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "strategy": self.strategy.value,
            "messages": len(self.messages),
            "payload_scalars": self.payload_scalars,
            "byte_count": self.byte_count,
        }


@dataclass(frozen=True, eq=False)
class SessionResult:
    outcome: StrategyOutcome
    transcript: Transcript

    def to_dict(self) -> Dict[str, Any]:
        return {"outcome": self.outcome.to_dict(), "transcript": self.transcript.to_dict()}


def run_session(partition: Partition, k: int, N: int, strategy: Union[Strategy, str],
                params: Optional[SolverParams] = None, upper: Optional[float] = None) -> SessionResult:
    """Node 1 solve -> encode -> decode -> node 2 solve -> collector."""
    strategy = parse_strategy(strategy)
    if strategy is Strategy.CENTRALIZED:
        raise ValidationError("Sessions run decentralized strategies only")
    validate_decentralized_budget(k, partition.m, partition.n)
    if strategy is not Strategy.NAIVE:
        validate_shared_count(N, partition.n)
    half = k // 2
    transcript = Transcript(strategy)

    node1 = solve_node(partition.a1, half, params)
    if strategy is Strategy.NAIVE:
        expected = 0
        node2 = solve_node(partition.a2, half, params)
        shared_count = 0
    else:
        expected = N * partition.n
        shared = extract_shared_vectors(partition.a1, node1.z_boolean, N)
        data = encode_message(shared)
        transcript.record(data, shared.count * shared.n)
        logger.debug(f"Node 1 sent {shared.count} vectors ({len(data)} bytes)")

        received = decode_message(data)
        if strategy is Strategy.FDM:
            node2 = solve_fdm_node(partition.a2, half, received, params)
        else:
            node2 = solve_lpm_node(partition.a2, half, received, params)
        shared_count = received.count

    if transcript.payload_scalars != expected:
        raise InformationBudgetError(
            f"Session sent {transcript.payload_scalars} scalars, budget is {expected}"
        )

    outcome = combine_nodes(strategy, partition, node1, node2, upper, params, shared_count)
    return SessionResult(outcome=outcome, transcript=transcript)

"""Bit-protection primitives for noisy links.

Three interchangeable mechanisms turn a noiseless line protocol into one that
runs over binary-symmetric links:

* ``repetition``  -- every meaningful link bit is repeated an odd number of
  times and majority-decoded (the robust, time-expensive fallback);
* ``treecode``    -- every sender emits one tree-code symbol per round and the
  receiver re-decodes the full history each round (the mechanism behind the
  time-optimal scheme, exponential to decode, so depth-capped);
* ``abstract``    -- the noiseless protocol runs directly and the array output
  is corrupted with probability exp(-gamma * rounds), with time charged as
  ceil(k_rs * rounds) slots (carries the simulation guarantee into scaling
  sweeps without paying the decoder's exponential cost).

Also here: majority decoding with erasures, and a seeded random linear block
code with nearest-codeword decoding used to distribute witness identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import Channel

__all__ = [
    "ERASED",
    "DecodeFailure",
    "CapacityError",
    "majority_decode",
    "RepetitionScheme",
    "BlockCode",
    "TreeCode",
    "SimGuarantee",
    "LineProtocol",
    "LineResult",
    "LinkSimConfig",
    "or_chain",
    "simulate_line",
    "smallest_odd_at_least",
    "DEFAULT_DECODE_CAP",
]

ERASED = None

DEFAULT_DECODE_CAP = 16


class DecodeFailure(Exception):
    """No usable observations to decode from."""


class CapacityError(Exception):
    """Requested tree-code depth exceeds the exhaustive-decoding cap."""


def smallest_odd_at_least(x: float) -> int:
    """Smallest odd integer >= x (and >= 1); repeat counts must be odd."""
    k = max(1, math.ceil(x))
    return k if k % 2 == 1 else k + 1


def majority_decode(observations: Sequence) -> int:
    """Majority vote over non-erased observations; exact ties decode to 0.

    Collision slots enter as ERASED and are excluded from the count.  Raises
    DecodeFailure if every observation is erased.
    """
    kept = [int(o) for o in observations if o is not ERASED]
    if not kept:
        raise DecodeFailure("all observations erased")
    ones = sum(kept)
    return 1 if ones > len(kept) - ones else 0


@dataclass(frozen=True)
class RepetitionScheme:
    """Repeat-k code with majority decoding; k must be odd so votes cannot tie."""

    k: int

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"repeat count must be odd and positive, got {self.k}")

    def encode(self, bit: int) -> np.ndarray:
        return np.full(self.k, int(bit), dtype=np.int8)

    def decode(self, observations: Sequence) -> int:
        return majority_decode(observations)

    def error_bound(self, p: float) -> float:
        """Binomial tail: probability that more than k/2 of k copies flip."""
        return sum(
            math.comb(self.k, i) * p**i * (1 - p) ** (self.k - i)
            for i in range(self.k // 2 + 1, self.k + 1)
        )


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., L) 0/1 array into (..., ceil(L/64)) uint64 words."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    n, length = bits.shape
    padded = 64 * math.ceil(length / 64)
    if padded != length:
        bits = np.concatenate([bits, np.zeros((n, padded - length), dtype=np.uint8)], axis=1)
    return np.packbits(bits, axis=1).reshape(n, -1).view(np.uint64)


def _popcount_rows(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1).astype(np.int64)


class BlockCode:
    """Seeded random linear block code with nearest-codeword (ML) decoding.

    The generator is systematic (identity over the message bits, random
    parity rows), so distinct messages always map to distinct codewords and
    the all-zero message maps to the all-zero codeword.  Decoding returns the
    message whose codeword minimizes Hamming distance to the received word,
    ties broken toward the smaller message value.
    """

    def __init__(self, msg_bits: int, block_len: int | None = None, seed: int = 0):
        if msg_bits < 1:
            raise ValueError("need at least one message bit")
        block_len = 4 * msg_bits if block_len is None else block_len
        if block_len < msg_bits:
            raise ValueError("block length may not be shorter than the message")
        self.msg_bits = msg_bits
        self.block_len = block_len
        self.seed = seed
        rng = np.random.default_rng(seed)
        gen = rng.integers(0, 2, size=(block_len, msg_bits), dtype=np.uint8)
        gen[:msg_bits] = np.eye(msg_bits, dtype=np.uint8)
        self.generator = gen
        # Full codebook: message m (bits LSB-first) -> codeword row m.
        msgs = ((np.arange(2**msg_bits)[:, None] >> np.arange(msg_bits)[None, :]) & 1).astype(
            np.uint8
        )
        self.codebook = (msgs @ gen.T) % 2
        self._packed = _pack_bits(self.codebook)
        self._weights = _popcount_rows(self._packed)

    @property
    def min_distance(self) -> int:
        """Minimum nonzero codeword weight (= minimum distance, by linearity)."""
        return int(self._weights[1:].min())

    def encode(self, msg: int) -> np.ndarray:
        if not (0 <= msg < 2**self.msg_bits):
            raise ValueError(f"message {msg} outside [0, 2^{self.msg_bits})")
        return self.codebook[msg].copy()

    def decode(self, word: np.ndarray) -> int:
        word = np.asarray(word, dtype=np.uint8)
        if word.shape != (self.block_len,):
            raise ValueError(f"expected a length-{self.block_len} word, got shape {word.shape}")
        dists = _popcount_rows(self._packed ^ _pack_bits(word))
        return int(np.argmin(dists))

    def decode_batch(self, words: np.ndarray) -> np.ndarray:
        """ML-decode many received words at once (rows of ``words``)."""
        words = np.atleast_2d(np.asarray(words, dtype=np.uint8))
        if words.shape[1] != self.block_len:
            raise ValueError("word length mismatch")
        packed = _pack_bits(words)
        out = np.empty(len(packed), dtype=np.int64)
        step = max(1, 2**22 // max(1, len(self._packed)))
        for lo in range(0, len(packed), step):
            chunk = packed[lo : lo + step]
            d = np.bitwise_count(chunk[:, None, :] ^ self._packed[None, :, :]).sum(axis=2)
            out[lo : lo + step] = np.argmin(d, axis=1)
        return out

    def decode_equals(self, true_msg: int, flip_masks: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        """Whether ML decoding of encode(true_msg) under each flip mask yields
        each receiver's candidate message.

        Exact shortcut: if the received word is strictly closer to the true
        codeword than to the candidate's, the argmin cannot be the candidate,
        so only the remaining receivers need the full codebook search.
        Equivalent to per-receiver ``decode`` (property-tested), but fast for
        the common case.
        """
        flip_masks = np.atleast_2d(np.asarray(flip_masks, dtype=np.uint8))
        candidates = np.asarray(candidates, dtype=np.int64)
        packed_err = _pack_bits(flip_masks)
        d_true = _popcount_rows(packed_err)
        diff = self._packed[candidates] ^ self._packed[true_msg]
        d_cand = _popcount_rows(packed_err ^ diff)

        believes = np.zeros(len(candidates), dtype=bool)
        # Clean reception of one's own codeword decodes to it (distance 0 is unique).
        exact = (d_true == 0) & (candidates == true_msg)
        believes[exact] = True
        unresolved = ~exact & ~(d_true < d_cand)
        if unresolved.any():
            idx = np.flatnonzero(unresolved)
            received = self.codebook[true_msg][None, :] ^ flip_masks[idx]
            believes[idx] = self.decode_batch(received) == candidates[idx]
        return believes


class TreeCode:
    """Binary tree code: each path prefix is labeled with one alphabet symbol.

    Labels are generated from the seed with sibling prefixes always receiving
    distinct symbols, so distinct paths encode at Hamming distance >= 1 and a
    clean reception decodes exactly.  Decoding is exhaustive over all 2^d
    paths (minimum symbol-wise Hamming distance, ties to the lexicographically
    smaller path) and is therefore depth-capped.
    """

    def __init__(self, depth: int, alphabet: int = 4, seed: int = 0):
        if depth < 1:
            raise ValueError("depth must be positive")
        if alphabet < 4 or alphabet & (alphabet - 1):
            raise ValueError(f"alphabet size must be a power of two >= 4, got {alphabet}")
        self.depth = depth
        self.alphabet = alphabet
        self.seed = seed
        rng = np.random.default_rng(seed)
        levels: list[np.ndarray] = []
        for t in range(1, depth + 1):
            parents = 1 << (t - 1)
            a = rng.integers(0, alphabet, size=parents, dtype=np.int64)
            b = rng.integers(0, alphabet - 1, size=parents, dtype=np.int64)
            b += b >= a
            level = np.empty(2 * parents, dtype=np.int64)
            level[0::2] = a
            level[1::2] = b
            levels.append(level)
        self.levels = tuple(levels)

    def label(self, t: int, prefix: int) -> int:
        """Symbol for the length-t prefix encoded as an integer (first bit = MSB)."""
        return int(self.levels[t - 1][prefix])

    def encode(self, path: Sequence[int]) -> np.ndarray:
        if len(path) > self.depth:
            raise ValueError(f"path longer than tree depth {self.depth}")
        prefix = 0
        symbols = np.empty(len(path), dtype=np.int64)
        for t, bit in enumerate(path, start=1):
            prefix = (prefix << 1) | int(bit)
            symbols[t - 1] = self.levels[t - 1][prefix]
        return symbols

    def decode(self, received: Sequence[int], depth_cap: int = DEFAULT_DECODE_CAP) -> tuple[int, ...]:
        d = len(received)
        if d > depth_cap:
            raise CapacityError(
                f"exhaustive decoding over 2^{d} paths exceeds the cap of 2^{depth_cap}; "
                f"no efficient tree-code decoder is available"
            )
        if d > self.depth:
            raise ValueError(f"received {d} symbols but tree depth is {self.depth}")
        paths = np.arange(1 << d, dtype=np.int64)
        dist = np.zeros(1 << d, dtype=np.int64)
        for t in range(1, d + 1):
            dist += self.levels[t - 1][paths >> (d - t)] != int(received[t - 1])
        best = int(np.argmin(dist))  # first minimum = lexicographically smallest path
        return tuple((best >> (d - 1 - i)) & 1 for i in range(d))


_TREECODE_CACHE: dict[tuple[int, int, int], TreeCode] = {}


def _tree_for(depth: int, alphabet: int, seed: int) -> TreeCode:
    key = (depth, alphabet, seed)
    if key not in _TREECODE_CACHE:
        _TREECODE_CACHE[key] = TreeCode(depth, alphabet, seed)
    return _TREECODE_CACHE[key]


@dataclass(frozen=True)
class SimGuarantee:
    """Abstract-mode contract: failure exp(-gamma * T), time ceil(k_rs * T)."""

    gamma: float = 0.5
    k_rs: float = 3.0

    def failure_prob(self, rounds: int) -> float:
        return math.exp(-self.gamma * rounds)

    def slots(self, rounds: int) -> int:
        return math.ceil(self.k_rs * rounds)


@dataclass(frozen=True)
class LineProtocol:
    """An oblivious noiseless protocol on a linear array, child end first.

    Nodes 0..q-1; node q-1 is the array root.  In every round t (1-based)
    each non-root node i sends one bit to node i+1: ``sent_bit(i, t, child)``
    where ``child`` holds the bits node i has decoded from node i-1 in rounds
    1..t-1 (empty for node 0).  Dummy zeros are sent in idle rounds, so the
    schedule never depends on the data.  ``node_value(i, child)`` is node i's
    local result once it has its child's full round sequence;
    ``payload_rounds(i)`` lists the rounds in which node i's bit is
    meaningful (everything else is a known dummy).
    """

    q: int
    rounds: int
    sent_bit: Callable[[int, int, Sequence[int]], int]
    node_value: Callable[[int, Sequence[int]], int]
    payload_rounds: Callable[[int], range]
    corrupt: Callable[[np.random.Generator], int]

    def noiseless_run(self) -> tuple[list[list[int]], list[int]]:
        """Per-sender round bits and per-node values over perfect links."""
        sent: list[list[int]] = []
        values: list[int] = []
        child: list[int] = []
        for i in range(self.q):
            if i < self.q - 1:
                bits = [self.sent_bit(i, t, child[: t - 1]) for t in range(1, self.rounds + 1)]
                sent.append(bits)
            values.append(self.node_value(i, child))
            if i < self.q - 1:
                child = sent[i]
        return sent, values


def or_chain(values: Sequence[int]) -> LineProtocol:
    """Running-OR aggregation: round t carries the prefix OR across hop t."""
    vals = [int(v) for v in values]
    q = len(vals)
    if q < 2:
        raise ValueError("a line protocol needs at least two nodes")

    def sent_bit(i: int, t: int, child: Sequence[int]) -> int:
        if t != i + 1:
            return 0
        incoming = child[i - 1] if i > 0 else 0
        return incoming | vals[i]

    def node_value(i: int, child: Sequence[int]) -> int:
        incoming = child[i - 1] if i > 0 else 0
        return incoming | vals[i]

    return LineProtocol(
        q=q,
        rounds=q - 1,
        sent_bit=sent_bit,
        node_value=node_value,
        payload_rounds=lambda i: range(i + 1, i + 2),
        corrupt=lambda rng: int(rng.integers(0, 2)),
    )


@dataclass(frozen=True)
class LinkSimConfig:
    """Knobs for simulating line protocols over noisy links."""

    mode: str = "abstract"  # "repetition" | "treecode" | "abstract"
    r3: int = 27
    gamma: float = 0.5
    k_rs: float = 3.0
    d_max: int = DEFAULT_DECODE_CAP
    alphabet: int = 4
    treecode_pad: int = 6
    treecode_seed: int = 2025

    def __post_init__(self):
        if self.mode not in ("repetition", "treecode", "abstract"):
            raise ValueError(f"unknown simulation mode {self.mode!r}")
        if self.r3 < 1 or self.r3 % 2 == 0:
            raise ValueError("r3 must be odd and positive")

    @property
    def guarantee(self) -> SimGuarantee:
        return SimGuarantee(gamma=self.gamma, k_rs=self.k_rs)


@dataclass(frozen=True)
class LineResult:
    """Outcome of one array simulation: per-node values plus cost accounting."""

    values: tuple[int, ...]
    slots: int
    tx: int
    payloads: tuple[tuple[int, ...], ...]  # decoded meaningful bits per link


def simulate_line(
    protocol: LineProtocol,
    config: LinkSimConfig,
    channel: Channel,
    link_endpoints: Sequence[tuple[int, int]] | None = None,
) -> LineResult:
    """Run a noiseless line protocol over noisy links in the configured mode.

    With eps0 = 0 every mode reproduces the noiseless outputs exactly.  Slots
    returned are logical (one link activation each); callers expand them to
    physical slots with the interference span.
    """
    if link_endpoints is None:
        link_endpoints = [(i, i + 1) for i in range(protocol.q - 1)]

    if config.mode == "abstract":
        return _simulate_abstract(protocol, config, channel)
    if config.mode == "repetition":
        return _simulate_repetition(protocol, config, channel, link_endpoints)
    return _simulate_treecode(protocol, config, channel, link_endpoints)


def _payload_of(bits: Sequence[int], protocol: LineProtocol, i: int) -> tuple[int, ...]:
    return tuple(int(bits[t - 1]) for t in protocol.payload_rounds(i))


def _simulate_abstract(
    protocol: LineProtocol, config: LinkSimConfig, channel: Channel
) -> LineResult:
    sent, values = protocol.noiseless_run()
    guarantee = config.guarantee
    # The guarantee models decoding failure under channel noise; a noiseless
    # channel cannot fail, preserving exactness at eps0 = 0.
    if channel.noise.eps0 > 0 and channel.rng.random() < guarantee.failure_prob(protocol.rounds):
        values[-1] = protocol.corrupt(channel.rng)
    slots = guarantee.slots(protocol.rounds)
    tx = (protocol.q - 1) * config.r3
    payloads = tuple(_payload_of(bits, protocol, i) for i, bits in enumerate(sent))
    return LineResult(tuple(values), slots, tx, payloads)


def _simulate_repetition(
    protocol: LineProtocol,
    config: LinkSimConfig,
    channel: Channel,
    link_endpoints,
) -> LineResult:
    values: list[int] = []
    payloads: list[tuple[int, ...]] = []
    child: list[int] = []
    slots = 0
    for i in range(protocol.q):
        values.append(protocol.node_value(i, child))
        if i == protocol.q - 1:
            break
        tx_node, rx_node = link_endpoints[i]
        decoded = [0] * protocol.rounds
        for t in range(1, protocol.rounds + 1):
            bit = protocol.sent_bit(i, t, child[: t - 1])
            if t not in protocol.payload_rounds(i):
                continue  # known dummy: the receiver fills it in for free
            copies = channel.noisy_copies(bit, config.r3, tx_node, rx_node, channel.slot_cursor)
            channel.slot_cursor += config.r3
            slots += config.r3
            decoded[t - 1] = majority_decode(copies)
        payloads.append(_payload_of(decoded, protocol, i))
        child = decoded
    tx = slots  # one transmission per repetition slot, hop-serially
    return LineResult(tuple(values), slots, tx, tuple(payloads))


def _simulate_treecode(
    protocol: LineProtocol,
    config: LinkSimConfig,
    channel: Channel,
    link_endpoints,
) -> LineResult:
    if protocol.rounds > config.d_max:
        raise CapacityError(
            f"tree-code simulation of a {protocol.rounds}-round protocol exceeds the "
            f"decoding cap {config.d_max}; shorten the arrays or use another mode"
        )
    depth = protocol.rounds + min(config.treecode_pad, config.d_max - protocol.rounds)
    tree = _tree_for(depth, config.alphabet, config.treecode_seed)
    sym_bits = config.alphabet.bit_length() - 1

    links = protocol.q - 1
    sent_paths: list[list[int]] = [[] for _ in range(links)]
    prefixes = [0] * links
    received: list[list[int]] = [[] for _ in range(links)]
    flips_on_link = [0] * links
    beliefs: list[list[int]] = [[] for _ in range(links)]  # receiver i+1's view of link i

    for t in range(1, depth + 1):
        round_bits = []
        for i in range(links):
            child = beliefs[i - 1] if i > 0 else []
            bit = protocol.sent_bit(i, t, child[: t - 1]) if t <= protocol.rounds else 0
            round_bits.append(bit)
        for i in range(links):
            prefixes[i] = (prefixes[i] << 1) | round_bits[i]
            sent_paths[i].append(round_bits[i])
            symbol = tree.label(t, prefixes[i])
            tx_node, rx_node = link_endpoints[i]
            mask = channel.flip_mask(
                (sym_bits,),
                slots=channel.slot_cursor + np.arange(sym_bits),
                txs=tx_node,
                rxs=rx_node,
            )
            noisy = symbol ^ int(
                sum(int(b) << (sym_bits - 1 - k) for k, b in enumerate(mask))
            )
            flips_on_link[i] += int(mask.sum())
            received[i].append(noisy)
            if flips_on_link[i] == 0:
                # Clean history: sibling-distinct labels make the true path the
                # unique distance-0 decode, so the search can be skipped.
                beliefs[i] = list(sent_paths[i])
            else:
                beliefs[i] = list(tree.decode(received[i], depth_cap=config.d_max))
        channel.slot_cursor += sym_bits

    values = []
    payloads = []
    for i in range(protocol.q):
        child = beliefs[i - 1][: protocol.rounds] if i > 0 else []
        values.append(protocol.node_value(i, child))
        if i < protocol.q - 1:
            payloads.append(_payload_of(beliefs[i], protocol, i))
    # Forward symbols plus the reserved reverse-direction dummies, in bit-slots.
    slots = 2 * depth * sym_bits
    tx = 2 * links * depth * sym_bits
    return LineResult(tuple(values), slots, tx, tuple(payloads))

"""Shared actor-critic MLP written directly in numpy.

``obs -> tanh(32) -> tanh(32) -> {action logits, state value}``.
Weight matrices are stored ``(fan_in, fan_out)`` so a batch ``x @ W + b``
works row-wise.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

HIDDEN = 32
PARAM_NAMES = ("W1", "b1", "W2", "b2", "Wa", "ba", "Wc", "bc")
CHECKPOINT_MAGIC = b"QPRLCKPT"


@dataclass
class PolicyParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    Wa: np.ndarray
    ba: np.ndarray
    Wc: np.ndarray
    bc: np.ndarray

    @property
    def obs_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def hidden(self) -> int:
        return self.W1.shape[1]

    @property
    def num_actions(self) -> int:
        return self.Wa.shape[1]

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, k) for k in PARAM_NAMES]

    def count(self) -> int:
        return sum(a.size for a in self.arrays())

    def copy(self) -> "PolicyParams":
        return PolicyParams(*(a.copy() for a in self.arrays()))

    def zeros_like(self) -> "PolicyParams":
        return PolicyParams(*(np.zeros_like(a) for a in self.arrays()))

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def with_flat(self, vec) -> "PolicyParams":
        out, i = [], 0
        for a in self.arrays():
            out.append(np.asarray(vec[i:i + a.size], dtype=np.float64).reshape(a.shape).copy())
            i += a.size
        return PolicyParams(*out)


def _orthogonal(rng, fan_in, fan_out, gain):
    a = rng.standard_normal((fan_in, fan_out))
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    q = u if u.shape == (fan_in, fan_out) else vt
    return gain * q


def init_params(obs_dim: int, num_actions: int, rng: np.random.Generator, hidden: int = HIDDEN) -> PolicyParams:
    """Orthogonal init: gain sqrt(2) on hidden layers, 0.01 on the actor, 1 on the critic."""
    g = np.sqrt(2.0)
    return PolicyParams(
        _orthogonal(rng, obs_dim, hidden, g), np.zeros(hidden),
        _orthogonal(rng, hidden, hidden, g), np.zeros(hidden),
        _orthogonal(rng, hidden, num_actions, 0.01), np.zeros(num_actions),
        _orthogonal(rng, hidden, 1, 1.0), np.zeros(1),
    )


def zero_params(obs_dim: int, num_actions: int, hidden: int = HIDDEN) -> PolicyParams:
    return PolicyParams(
        np.zeros((obs_dim, hidden)), np.zeros(hidden),
        np.zeros((hidden, hidden)), np.zeros(hidden),
        np.zeros((hidden, num_actions)), np.zeros(num_actions),
        np.zeros((hidden, 1)), np.zeros(1),
    )


def flatten_observation(obs, shots: int | None = None, n: int | None = None) -> np.ndarray:
    """Row-major ``B`` followed by ``wtilde``."""
    B = np.asarray(obs.B)
    if B.ndim != 2 or (shots is not None and B.shape[0] != shots) or (n is not None and B.shape[1] != n):
        raise ValueError(f"measurement matrix has shape {B.shape}, expected ({shots}, {n})")
    wt = np.asarray(obs.wtilde, dtype=np.float64)
    if n is not None and wt.size != n * (n + 1) // 2:
        raise ValueError(f"wtilde has {wt.size} entries, expected {n * (n + 1) // 2}")
    return np.concatenate([B.ravel().astype(np.float64), wt])


def forward(params: PolicyParams, x: np.ndarray, return_cache: bool = False):
    """Logits and value for one observation ``(d,)`` or a batch ``(k, d)``."""
    h1 = np.tanh(x @ params.W1 + params.b1)
    h2 = np.tanh(h1 @ params.W2 + params.b2)
    logits = h2 @ params.Wa + params.ba
    value = (h2 @ params.Wc + params.bc)[..., 0]
    if return_cache:
        return logits, value, (x, h1, h2)
    return logits, value


def backward(params: PolicyParams, cache, dlogits: np.ndarray, dvalue: np.ndarray) -> PolicyParams:
    """Gradients of a scalar loss given its gradients w.r.t. the batched outputs."""
    x, h1, h2 = cache
    dh2 = dlogits @ params.Wa.T + dvalue[:, None] @ params.Wc.T
    dz2 = dh2 * (1.0 - h2**2)
    dh1 = dz2 @ params.W2.T
    dz1 = dh1 * (1.0 - h1**2)
    return PolicyParams(
        x.T @ dz1, dz1.sum(axis=0),
        h1.T @ dz2, dz2.sum(axis=0),
        h2.T @ dlogits, dlogits.sum(axis=0),
        h2.T @ dvalue[:, None], np.atleast_1d(dvalue.sum()),
    )


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def entropy(logits: np.ndarray) -> np.ndarray:
    logp = log_softmax(logits)
    return -(np.exp(logp) * logp).sum(axis=-1)


def sample_action(logits: np.ndarray, rng: np.random.Generator):
    """Categorical draw from ``softmax(logits)``; returns ``(action, logprob, entropy)``."""
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    logp = log_softmax(logits)
    p = np.exp(logp)
    cdf = np.cumsum(p)
    a = int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), p.size - 1))
    return a, float(logp[a]), float(-(p * logp).sum())


@dataclass
class AdamState:
    m: PolicyParams
    v: PolicyParams
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-5

    @classmethod
    def for_params(cls, params: PolicyParams, eps: float = 1e-5) -> "AdamState":
        return cls(params.zeros_like(), params.zeros_like(), eps=eps)


def adam_step(params: PolicyParams, grads: PolicyParams, opt: AdamState, lr: float) -> PolicyParams:
    """Bias-corrected Adam descent step; updates ``opt`` and returns new params."""
    opt.t += 1
    c1 = 1.0 - opt.beta1**opt.t
    c2 = 1.0 - opt.beta2**opt.t
    new = []
    for name in PARAM_NAMES:
        p, g = getattr(params, name), getattr(grads, name)
        m = getattr(opt.m, name)
        v = getattr(opt.v, name)
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        new.append(p - lr * (m / c1) / (np.sqrt(v / c2) + opt.eps))
    return PolicyParams(*new)


# -- checkpoints --------------------------------------------------------------
#
# Layout: 8-byte magic, uint32 little-endian header length L, L bytes of UTF-8
# JSON header, then every array of PARAM_NAMES in order as little-endian
# float64, C order, with W* shaped (fan_in, fan_out).


def save_checkpoint(path, params: PolicyParams, extra: dict | None = None) -> None:
    header = {
        "version": 1,
        "arch": [params.obs_dim, params.hidden, params.W2.shape[1]],
        "actions": params.num_actions,
        "order": list(PARAM_NAMES),
    }
    if extra:
        header["extra"] = extra
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for a in params.arrays():
            f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[PolicyParams, dict]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    (hlen,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12:12 + hlen])
    if header.get("version") != 1:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
    obs_dim, h1, h2 = header["arch"]
    shapes = [(obs_dim, h1), (h1,), (h1, h2), (h2,), (h2, header["actions"]), (header["actions"],), (h2, 1), (1,)]
    arrays, off = [], 12 + hlen
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(np.frombuffer(data, dtype="<f8", count=size, offset=off).reshape(shape).astype(np.float64))
        off += 8 * size
    if off != len(data):
        raise ValueError(f"{path}: trailing or missing bytes")
    return PolicyParams(*arrays), header

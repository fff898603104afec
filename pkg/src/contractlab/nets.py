"""Actor/critic networks with hand-written gradients.

Everything is plain numpy so training is bit-reproducible under a seed and
analytic gradients can be validated against finite differences.  Parameters
live in dicts of float64 arrays; gradient functions return matching dicts.

Actors expose the same surface (``mean_and_cache``, ``backward_mean``,
``gate_balance``/``backward_balance``, ``sample``, ``log_std``) so the PPO
update is agnostic to whether the policy is the sparse mixture of linear
experts or a plain MLP.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

LOG_2PI = float(np.log(2.0 * np.pi))


# ---------------------------------------------------------------------------
# gating primitives


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def top_m_renormalize(p: np.ndarray, m: int) -> np.ndarray:
    """Keep the m largest probabilities (ties -> lowest index), renormalize.

    Works on a single vector or a batch (last axis = experts).
    """
    p = np.asarray(p, dtype=np.float64)
    n_experts = p.shape[-1]
    if not 1 <= m <= n_experts:
        raise ValueError(f"m must be in [1, {n_experts}], got {m}")
    if m == n_experts:
        return p.copy()
    # stable argsort on -p -> ties broken by lowest index
    order = np.argsort(-p, axis=-1, kind="stable")
    keep = order[..., :m]
    mask = np.zeros_like(p, dtype=bool)
    np.put_along_axis(mask, keep, True, axis=-1)
    sparse = np.where(mask, p, 0.0)
    total = sparse.sum(axis=-1, keepdims=True)
    return sparse / total


# ---------------------------------------------------------------------------
# running state standardization


class RunningNorm:
    """Per-component running mean/variance (Welford), frozen at evaluation."""

    def __init__(self, dim: int, eps: float = 1e-8):
        self.dim = dim
        self.eps = eps
        self.count = 0.0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def update(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=np.float64)
        self.count += 1.0
        d = x - self.mean
        self.mean = self.mean + d / self.count
        self.m2 = self.m2 + d * (x - self.mean)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        if self.count < 2:
            return np.asarray(x, dtype=np.float64).copy()
        var = self.m2 / self.count
        return (x - self.mean) / np.sqrt(var + self.eps)

    def state_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean.copy(),
                "m2": self.m2.copy()}

    def load_state_dict(self, state: dict) -> None:
        self.count = state["count"]
        self.mean = state["mean"].copy()
        self.m2 = state["m2"].copy()


# ---------------------------------------------------------------------------
# diagonal Gaussian head (shared by both actors)


def gaussian_log_prob(actions, mean, log_std):
    """Log density of a diagonal Gaussian, summed over action dims."""
    std = np.exp(log_std)
    z = (actions - mean) / std
    return (-0.5 * (z * z).sum(axis=-1)
            - log_std.sum()
            - 0.5 * actions.shape[-1] * LOG_2PI)


def gaussian_entropy(log_std: np.ndarray) -> float:
    """Entropy of the diagonal Gaussian policy (state independent)."""
    return float(np.sum(log_std + 0.5 * (LOG_2PI + 1.0)))


class MoEActor:
    """Sparse mixture of linear experts with a linear-softmax gate.

    The gate scores every expert, keeps the top m, renormalizes their
    probabilities, and the action mean is the renormalized-weighted sum of
    the selected experts' linear outputs.  The per-dimension log standard
    deviation is a free parameter.
    """

    is_mixture = True

    def __init__(self, state_dim: int, action_dim: int, n_experts: int = 3,
                 top_m: int = 1, rng: np.random.Generator | None = None,
                 init_scale: float = 0.01, action_bias: float = 0.0,
                 init_log_std: float = 0.0, action_scale: float = 1.0,
                 gate_init_scale: float = 0.5):
        if not 1 <= top_m <= n_experts:
            raise ValueError("top_m must be in [1, n_experts]")
        rng = rng or np.random.default_rng(0)
        self.d = state_dim
        self.A = action_dim
        self.M = n_experts
        self.m = top_m
        self.action_scale = action_scale
        w_e = rng.normal(0.0, init_scale,
                         size=(n_experts, action_dim, state_dim))
        b_e = (np.full((n_experts, action_dim), action_bias, dtype=float)
               + rng.normal(0.0, init_scale, size=(n_experts, action_dim)))
        # A random gate projection gives each expert a distinct region of
        # state space from the start; with zeros every gate logit is tied
        # and top-1 selection never differentiates the experts (the
        # renormalized top-1 weight is identically 1, so the gate receives
        # no policy gradient).  Drawn from a spawned child stream so the
        # other parameters (and anything else sharing ``rng``) are
        # unaffected by the gate initialisation.
        w_g = (rng.spawn(1)[0].normal(0.0, gate_init_scale,
                                      size=(n_experts, state_dim))
               if gate_init_scale > 0.0 else np.zeros((n_experts, state_dim)))
        self.params = {
            "W_g": w_g,
            "b_g": np.zeros(n_experts),
            "W_e": w_e,
            "b_e": b_e,
            "log_std": np.full(action_dim, init_log_std, dtype=float),
        }

    @property
    def log_std(self) -> np.ndarray:
        return self.params["log_std"]

    def gate_probs(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.d:
            raise DimensionMismatch(f"expected state dim {self.d}, got {x.shape[-1]}")
        return softmax(x @ self.params["W_g"].T + self.params["b_g"])

    def mean_and_cache(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.d:
            raise DimensionMismatch(f"expected state dim {self.d}, got {x.shape[1]}")
        p = self.gate_probs(x)                               # (N, M)
        p_sparse = top_m_renormalize(p, self.m)              # (N, M)
        # expert outputs: (N, M, A)
        expert_out = np.einsum("mad,nd->nma", self.params["W_e"], x) \
            + self.params["b_e"][None, :, :]
        mu = self.action_scale * np.einsum("nm,nma->na", p_sparse, expert_out)
        cache = {"x": x, "p": p, "p_sparse": p_sparse, "expert_out": expert_out}
        return mu, cache

    def mean(self, x: np.ndarray) -> np.ndarray:
        mu, _ = self.mean_and_cache(x)
        return mu[0] if np.asarray(x).ndim == 1 else mu

    def sample(self, x: np.ndarray, rng: np.random.Generator):
        mu = self.mean(np.atleast_2d(x))
        std = np.exp(self.params["log_std"])
        noise = rng.standard_normal(mu.shape)
        action = mu + std * noise
        logp = gaussian_log_prob(action, mu, self.params["log_std"])
        if np.asarray(x).ndim == 1:
            return action[0], float(logp[0])
        return action, logp

    def gate_balance(self, cache) -> float:
        """Mean sum(p log p) over the batch (negative gating entropy)."""
        p = np.clip(cache["p"], 1e-300, None)
        return float(np.mean(np.sum(p * np.log(p), axis=-1)))

    def backward_mean(self, cache, d_mu: np.ndarray,
                      balance_coeff: float = 0.0) -> dict:
        """Gradients of (sum over batch of d_mu . mu) + balance_coeff *
        gate_balance with respect to all non-log_std parameters."""
        x, p, p_sparse = cache["x"], cache["p"], cache["p_sparse"]
        expert_out = cache["expert_out"]
        n = x.shape[0]
        d_mu = d_mu * self.action_scale  # chain through the output scaling

        # experts: gradient weighted by sparse gate, so unselected experts
        # (weight exactly 0) receive exactly zero gradient
        weighted = p_sparse[:, :, None] * d_mu[:, None, :]   # (N, M, A)
        dW_e = np.einsum("nma,nd->mad", weighted, x)
        db_e = weighted.sum(axis=0)

        # gate path through the sparse weights
        dp_sparse = np.einsum("na,nma->nm", d_mu, expert_out)
        mask = p_sparse > 0.0
        z_norm = np.where(mask, p, 0.0).sum(axis=-1, keepdims=True)
        # d p'_i / d p_j = (delta_ij - p'_j) / Z on the selected set; keeping
        # the subtraction in renormalised terms makes the m=1 gradient an
        # exact floating-point zero, so tied gate logits stay tied
        inner = (dp_sparse * p_sparse).sum(axis=-1, keepdims=True)
        dp = np.where(mask, (dp_sparse - inner) / z_norm, 0.0)

        if balance_coeff != 0.0:
            p_safe = np.clip(p, 1e-300, None)
            dp = dp + balance_coeff * (np.log(p_safe) + 1.0) / n

        # softmax backprop
        dz = p * (dp - (dp * p).sum(axis=-1, keepdims=True))
        dW_g = dz.T @ x
        db_g = dz.sum(axis=0)
        return {"W_g": dW_g, "b_g": db_g, "W_e": dW_e, "b_e": db_e}

    def zero_grads(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def state_dict(self) -> dict:
        return {"kind": "moe", "M": self.M, "m": self.m, "d": self.d,
                "A": self.A, "action_scale": self.action_scale,
                "params": {k: v.copy() for k, v in self.params.items()}}

    def load_state_dict(self, state: dict) -> None:
        self.params = {k: v.copy() for k, v in state["params"].items()}


def _mlp_init(rng, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


class MLPActor:
    """Dense two-hidden-layer Tanh actor (the non-mixture ablation)."""

    is_mixture = False

    def __init__(self, state_dim: int, action_dim: int, hidden: int = 64,
                 rng: np.random.Generator | None = None,
                 action_bias: float = 0.0, init_log_std: float = 0.0,
                 action_scale: float = 1.0):
        rng = rng or np.random.default_rng(0)
        self.d = state_dim
        self.A = action_dim
        self.hidden = hidden
        self.action_scale = action_scale
        self.params = {
            "w1": _mlp_init(rng, state_dim, hidden), "b1": np.zeros(hidden),
            "w2": _mlp_init(rng, hidden, hidden), "b2": np.zeros(hidden),
            "w3": 0.01 * _mlp_init(rng, hidden, action_dim),
            "b3": np.full(action_dim, action_bias, dtype=float),
            "log_std": np.full(action_dim, init_log_std, dtype=float),
        }

    @property
    def log_std(self) -> np.ndarray:
        return self.params["log_std"]

    def mean_and_cache(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.d:
            raise DimensionMismatch(f"expected state dim {self.d}, got {x.shape[1]}")
        pr = self.params
        h1 = np.tanh(x @ pr["w1"].T + pr["b1"])
        h2 = np.tanh(h1 @ pr["w2"].T + pr["b2"])
        mu = self.action_scale * (h2 @ pr["w3"].T + pr["b3"])
        return mu, {"x": x, "h1": h1, "h2": h2}

    def mean(self, x: np.ndarray) -> np.ndarray:
        mu, _ = self.mean_and_cache(x)
        return mu[0] if np.asarray(x).ndim == 1 else mu

    def sample(self, x: np.ndarray, rng: np.random.Generator):
        mu = self.mean(np.atleast_2d(x))
        std = np.exp(self.params["log_std"])
        action = mu + std * rng.standard_normal(mu.shape)
        logp = gaussian_log_prob(action, mu, self.params["log_std"])
        if np.asarray(x).ndim == 1:
            return action[0], float(logp[0])
        return action, logp

    def gate_balance(self, cache) -> float:
        return 0.0

    def backward_mean(self, cache, d_mu: np.ndarray,
                      balance_coeff: float = 0.0) -> dict:
        x, h1, h2 = cache["x"], cache["h1"], cache["h2"]
        pr = self.params
        d_mu = d_mu * self.action_scale  # chain through the output scaling
        dW3 = d_mu.T @ h2
        db3 = d_mu.sum(axis=0)
        dh2 = (d_mu @ pr["w3"]) * (1.0 - h2 * h2)
        dW2 = dh2.T @ h1
        db2 = dh2.sum(axis=0)
        dh1 = (dh2 @ pr["w2"]) * (1.0 - h1 * h1)
        dW1 = dh1.T @ x
        db1 = dh1.sum(axis=0)
        return {"w1": dW1, "b1": db1, "w2": dW2, "b2": db2,
                "w3": dW3, "b3": db3}

    def zero_grads(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def state_dict(self) -> dict:
        return {"kind": "mlp", "hidden": self.hidden, "d": self.d, "A": self.A,
                "action_scale": self.action_scale,
                "params": {k: v.copy() for k, v in self.params.items()}}

    def load_state_dict(self, state: dict) -> None:
        self.params = {k: v.copy() for k, v in state["params"].items()}


class Critic:
    """Two-hidden-layer Tanh value network with a scalar head."""

    def __init__(self, state_dim: int, hidden: int = 256,
                 rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.d = state_dim
        self.hidden = hidden
        self.params = {
            "w1": _mlp_init(rng, state_dim, hidden), "b1": np.zeros(hidden),
            "w2": _mlp_init(rng, hidden, hidden), "b2": np.zeros(hidden),
            "w3": _mlp_init(rng, hidden, 1), "b3": np.zeros(1),
        }

    def value_and_cache(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        pr = self.params
        h1 = np.tanh(x @ pr["w1"].T + pr["b1"])
        h2 = np.tanh(h1 @ pr["w2"].T + pr["b2"])
        v = (h2 @ pr["w3"].T + pr["b3"]).ravel()
        return v, {"x": x, "h1": h1, "h2": h2}

    def value(self, x: np.ndarray):
        v, _ = self.value_and_cache(x)
        return float(v[0]) if np.asarray(x).ndim == 1 else v

    def backward(self, cache, dv: np.ndarray) -> dict:
        x, h1, h2 = cache["x"], cache["h1"], cache["h2"]
        pr = self.params
        dv = dv.reshape(-1, 1)
        dW3 = dv.T @ h2
        db3 = dv.sum(axis=0)
        dh2 = (dv @ pr["w3"]) * (1.0 - h2 * h2)
        dW2 = dh2.T @ h1
        db2 = dh2.sum(axis=0)
        dh1 = (dh2 @ pr["w2"]) * (1.0 - h1 * h1)
        dW1 = dh1.T @ x
        db1 = dh1.sum(axis=0)
        return {"w1": dW1, "b1": db1, "w2": dW2, "b2": db2,
                "w3": dW3, "b3": db3}

    def zero_grads(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def state_dict(self) -> dict:
        return {"hidden": self.hidden, "d": self.d,
                "params": {k: v.copy() for k, v in self.params.items()}}

    def load_state_dict(self, state: dict) -> None:
        self.params = {k: v.copy() for k, v in state["params"].items()}


class Adam:
    """Adam with L2 weight decay over a dict of parameter arrays."""

    def __init__(self, params: dict, lr: float, betas=(0.9, 0.999),
                 eps: float = 1e-8, weight_decay: float = 0.0):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        if self.lr == 0.0:
            return
        self.t += 1
        bc1 = 1.0 - self.b1 ** self.t
        bc2 = 1.0 - self.b2 ** self.t
        for k, p in params.items():
            g = grads[k]
            if self.weight_decay:
                g = g + self.weight_decay * p
            self.m[k] = self.b1 * self.m[k] + (1.0 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1.0 - self.b2) * (g * g)
            p -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2)
                                                + self.eps)

    def state_dict(self) -> dict:
        return {"t": self.t,
                "m": {k: v.copy() for k, v in self.m.items()},
                "v": {k: v.copy() for k, v in self.v.items()}}

    def load_state_dict(self, state: dict) -> None:
        self.t = state["t"]
        self.m = {k: v.copy() for k, v in state["m"].items()}
        self.v = {k: v.copy() for k, v in state["v"].items()}


def clip_grad_norm(grads: dict, max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm."""
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        for k in grads:
            grads[k] = grads[k] * scale
    return total

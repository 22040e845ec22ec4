"""Pure-numpy LSTM kernels: batched forward pass and backpropagation through time.

Shared kernel contract (both backends):

  forward_batch(X, lengths, in_mask, rec_mask, W, U, b, w_out, b_out)
      X        (B, T, d)  pre-padded inputs, real tokens at the end
      lengths  (B,)       true lengths; step t is active iff t >= T - length
      in_mask  (B, d)     inverted-dropout mask on inputs (ones at inference)
      rec_mask (B, H)     inverted-dropout mask on the recurrent hidden state
      W (4H, d), U (4H, H), b (4H,)   gate parameters stacked [input,
                                      forget, candidate, output]
      w_out (H,), b_out (float)       sigmoid head
      -> (probs (B,), logits (B,), cache)

  backward_batch(cache, W, U, w_out, dlogits)
      -> (dW, dU, db, dw_out, db_out) for the mean-loss gradient encoded in
         dlogits; inputs/embeddings receive no gradient (frozen).

Inactive (padding) steps pass state through unchanged, which with pre-padding
equals skipping them.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit as _sigmoid


def forward_batch(X, lengths, in_mask, rec_mask, W, U, b, w_out, b_out):
    B, T, d = X.shape
    H = w_out.shape[0]

    I = np.zeros((T, B, H))
    F = np.zeros((T, B, H))
    G = np.zeros((T, B, H))
    O = np.zeros((T, B, H))
    C = np.zeros((T, B, H))
    Hs = np.zeros((T, B, H))

    h = np.zeros((B, H))
    c = np.zeros((B, H))
    first_active = T - lengths  # per sequence

    t_start = int(first_active.min()) if B else T
    for t in range(max(t_start, 0), T):
        active = (t >= first_active)[:, None]
        x_til = X[:, t, :] * in_mask
        h_til = h * rec_mask
        Z = x_til @ W.T + h_til @ U.T + b
        i = _sigmoid(Z[:, :H])
        f = _sigmoid(Z[:, H : 2 * H])
        g = np.tanh(Z[:, 2 * H : 3 * H])
        o = _sigmoid(Z[:, 3 * H :])
        c_new = f * c + i * g
        h_new = o * np.tanh(c_new)
        c = np.where(active, c_new, c)
        h = np.where(active, h_new, h)
        I[t], F[t], G[t], O[t], C[t], Hs[t] = i, f, g, o, c, h

    logits = h @ w_out + b_out
    probs = _sigmoid(logits)
    cache = (X, lengths, in_mask, rec_mask, I, F, G, O, C, Hs)
    return probs, logits, cache


def backward_batch(cache, W, U, w_out, dlogits):
    X, lengths, in_mask, rec_mask, I, F, G, O, C, Hs = cache
    B, T, d = X.shape
    H = w_out.shape[0]
    first_active = T - lengths

    h_final = Hs[T - 1] if T > 0 else np.zeros((B, H))
    dw_out = dlogits @ h_final
    db_out = float(dlogits.sum())

    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dh = dlogits[:, None] * w_out[None, :]
    dc = np.zeros((B, H))

    t_start = int(first_active.min()) if B else T
    for t in range(T - 1, max(t_start, 0) - 1, -1):
        active = (t >= first_active)[:, None]
        i, f, g, o, c = I[t], F[t], G[t], O[t], C[t]
        c_prev = C[t - 1] if t > 0 else np.zeros((B, H))
        h_prev = Hs[t - 1] if t > 0 else np.zeros((B, H))
        tanh_c = np.tanh(c)

        do = dh * tanh_c
        dct = dc + dh * o * (1.0 - tanh_c * tanh_c)
        di = dct * g
        dg = dct * i
        df = dct * c_prev

        dZ = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dZ = np.where(active, dZ, 0.0)

        x_til = X[:, t, :] * in_mask
        h_til = h_prev * rec_mask
        dW += dZ.T @ x_til
        dU += dZ.T @ h_til
        db += dZ.sum(axis=0)

        dh = np.where(active, (dZ @ U) * rec_mask, dh)
        dc = np.where(active, dct * f, dc)

    return dW, dU, db, dw_out, db_out

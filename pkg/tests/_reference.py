"""Independent straight-line oracles used by the tests.

Everything here re-derives results with explicit loop nests and naive
indexing, deliberately avoiding the library's vectorized implementations and
helper functions.  Only the weight dictionaries and configuration values are
shared, since those define the problem instance itself.
"""

import math

import numpy as np


# -- metrics -----------------------------------------------------------------

def ref_ergas(reference, test, scale_ratio=1.0):
    bands, height, width = reference.shape
    total = 0.0
    for b in range(bands):
        sq = 0.0
        mean = 0.0
        for i in range(height):
            for j in range(width):
                r = float(reference[b, i, j])
                t = float(test[b, i, j])
                sq += (r - t) ** 2
                mean += r
        mean /= height * width
        rmse2 = sq / (height * width)
        total += rmse2 / (mean * mean)
    return 100.0 * scale_ratio * math.sqrt(total / bands)


def ref_energy(y, x, z, s, n, mu, tau, lam, gamma, quadratic_phi=False):
    bands, height, width = y.shape
    fid = 0.0
    l1 = 0.0
    fro_n = 0.0
    split = 0.0
    phi = 0.0
    for j in range(width):          # loop order differs from the library
        for i in range(height):
            for b in range(bands):
                yv = float(y[b, i, j])
                xv = float(x[b, i, j])
                zv = float(z[b, i, j])
                sv = float(s[b, i, j])
                nv = float(n[b, i, j])
                fid += (yv - xv - nv - sv) ** 2
                l1 += abs(sv)
                fro_n += nv * nv
                split += (zv - xv) ** 2
                phi += zv * zv
    value = 0.5 * fid + lam * l1 + gamma * fro_n + 0.5 * mu * split
    if quadratic_phi:
        value += tau * 0.5 * phi
    return value


# -- dense layers ------------------------------------------------------------

def ref_conv2d(x, w, bias=None, stride=1, pad=0, circular=False):
    kh, kw, cin, cout = w.shape
    mode = "wrap" if circular else "constant"
    xp = np.pad(x, ((pad, pad), (pad, pad), (0, 0)), mode=mode) if pad else x
    ho = (xp.shape[0] - kh) // stride + 1
    wo = (xp.shape[1] - kw) // stride + 1
    y = np.zeros((ho, wo, cout))
    for i in range(ho):
        for j in range(wo):
            for a in range(kh):
                for b in range(kw):
                    y[i, j] += xp[i * stride + a, j * stride + b] @ w[a, b]
    if bias is not None:
        y += bias
    return y


def ref_conv_transpose2(x, w, bias=None):
    h, wd, cin = x.shape
    cout = w.shape[3]
    y = np.zeros((2 * h, 2 * wd, cout))
    for i in range(h):
        for j in range(wd):
            for a in range(2):
                for b in range(2):
                    y[2 * i + a, 2 * j + b] += x[i, j] @ w[a, b]
    if bias is not None:
        y += bias
    return y


def ref_depthwise3x3(x, w, bias=None):
    h, wd, c = x.shape
    xp = np.pad(x, ((1, 1), (1, 1), (0, 0)))
    y = np.zeros_like(x)
    for i in range(h):
        for j in range(wd):
            for a in range(3):
                for b in range(3):
                    y[i, j] += xp[i + a, j + b] * w[a, b]
    if bias is not None:
        y += bias
    return y


def ref_layer_norm(x, gamma, beta, eps=1e-5):
    h, wd, c = x.shape
    y = np.zeros_like(x)
    for i in range(h):
        for j in range(wd):
            token = x[i, j]
            mu = token.mean()
            var = ((token - mu) ** 2).mean()
            y[i, j] = (token - mu) / math.sqrt(var + eps) * gamma + beta
    return y


def ref_gelu(x):
    flat = x.reshape(-1)
    out = np.array([v * 0.5 * (1.0 + math.erf(v / math.sqrt(2.0))) for v in flat])
    return out.reshape(x.shape)


def ref_softmax_rows(m):
    out = np.zeros_like(m)
    for i in range(m.shape[0]):
        row = m[i] - m[i].max()
        e = np.exp(row)
        out[i] = e / e.sum()
    return out


def ref_softmax_cols(m):
    out = np.zeros_like(m)
    for j in range(m.shape[1]):
        col = m[:, j] - m[:, j].max()
        e = np.exp(col)
        out[:, j] = e / e.sum()
    return out


# -- attention ---------------------------------------------------------------

def ref_windowed_attention(q, k, v, pos, d_h):
    groups, tokens, d = q.shape
    heads = d // d_h
    out = np.zeros_like(v)
    for g in range(groups):
        for h in range(heads):
            sl = slice(h * d_h, (h + 1) * d_h)
            qh, kh, vh = q[g, :, sl], k[g, :, sl], v[g, :, sl]
            logits = qh @ kh.T / math.sqrt(d_h) + pos[h]
            att = ref_softmax_rows(logits)
            out[g, :, sl] = att @ vh
    return out


def ref_spectral_attention(x, wq, wk, wv, wo, heads):
    h, wd, c = x.shape
    tokens = x.reshape(-1, c)
    q, k, v = tokens @ wq, tokens @ wk, tokens @ wv
    d = c // heads
    merged = np.zeros_like(tokens)
    for j in range(heads):
        sl = slice(j * d, (j + 1) * d)
        sim = k[:, sl].T @ q[:, sl] / math.sqrt(d)
        att = ref_softmax_cols(sim)
        merged[:, sl] = v[:, sl] @ att
    return (merged @ wo).reshape(h, wd, c)


def ref_window_tokens(t, p):
    """(H, W, C) -> (windows, p*p, C), windows and tokens in row-major order."""
    h, wd, c = t.shape
    groups = []
    for wi in range(h // p):
        for wj in range(wd // p):
            tokens = []
            for a in range(p):
                for b in range(p):
                    tokens.append(t[wi * p + a, wj * p + b])
            groups.append(tokens)
    return np.asarray(groups)


def ref_window_untokens(groups, p, h, wd):
    c = groups.shape[-1]
    out = np.zeros((h, wd, c))
    g = 0
    for wi in range(h // p):
        for wj in range(wd // p):
            t = 0
            for a in range(p):
                for b in range(p):
                    out[wi * p + a, wj * p + b] = groups[g, t]
                    t += 1
            g += 1
    return out


def ref_lnsa_block(x, pr, prefix, cfg):
    h, wd, c = x.shape
    p = cfg.window
    half = c // 2
    d_h = half // cfg.heads

    def w(name):
        return pr[f"{prefix}.{name}"]

    y1 = ref_layer_norm(x, w("ln1.gamma"), w("ln1.beta"))
    y2 = y1 @ w("pre.weight") + w("pre.bias")
    q = y2 @ w("attn.wq")
    k = y2 @ w("attn.wk")
    v = y2 @ w("attn.wv")

    qg = ref_window_tokens(q[..., :half], p)
    kg = ref_window_tokens(k[..., :half], p)
    vg = ref_window_tokens(v[..., :half], p)
    a1 = ref_windowed_attention(qg, kg, vg, w("attn.pos_local"), d_h)
    local = ref_window_untokens(a1 @ w("attn.merge_local"), p, h, wd)

    qs = ref_window_tokens(q[..., half:], p).transpose(1, 0, 2)
    ks = ref_window_tokens(k[..., half:], p).transpose(1, 0, 2)
    vs = ref_window_tokens(v[..., half:], p).transpose(1, 0, 2)
    a2 = ref_windowed_attention(qs, ks, vs, w("attn.pos_nonlocal"), d_h)
    non_local = ref_window_untokens(
        (a2 @ w("attn.merge_nonlocal")).transpose(1, 0, 2), p, h, wd)

    spatial = (np.concatenate([local, non_local], axis=-1)
               @ w("attn.fuse_spatial.weight") + w("attn.fuse_spatial.bias"))
    spectral = ref_spectral_attention(
        y2, w("spectral.wq"), w("spectral.wk"), w("spectral.wv"),
        w("spectral.wo"), cfg.heads)
    merged = (np.concatenate([spatial, spectral], axis=-1)
              @ w("fuse_all.weight") + w("fuse_all.bias"))
    x1 = x + merged

    z1 = ref_layer_norm(x1, w("ln2.gamma"), w("ln2.beta"))
    f1 = ref_gelu(z1 @ w("ffn.w1") + w("ffn.b1"))
    f2 = ref_gelu(ref_depthwise3x3(f1, w("ffn.dw"), w("ffn.db")))
    return x1 + f2 @ w("ffn.w2") + w("ffn.b2")


def ref_ulnsa(x, beta, pr, cfg, prefix="ulnsa"):
    h, wd, bands = x.shape
    stacked = np.concatenate([x, np.full((h, wd, 1), beta)], axis=-1)
    feat = ref_conv2d(stacked, pr[f"{prefix}.input.weight"],
                      pr[f"{prefix}.input.bias"], stride=1, pad=1)
    skips = []
    for level in range(cfg.levels - 1):
        feat = ref_lnsa_block(feat, pr, f"{prefix}.enc{level}", cfg)
        skips.append(feat)
        feat = ref_conv2d(feat, pr[f"{prefix}.down{level}.weight"],
                          pr[f"{prefix}.down{level}.bias"], stride=2, pad=1)
    feat = ref_lnsa_block(feat, pr, f"{prefix}.mid", cfg)
    for level in reversed(range(cfg.levels - 1)):
        feat = ref_conv_transpose2(feat, pr[f"{prefix}.up{level}.weight"],
                                   pr[f"{prefix}.up{level}.bias"])
        feat = (np.concatenate([feat, skips[level]], axis=-1)
                @ pr[f"{prefix}.skip{level}.weight"] + pr[f"{prefix}.skip{level}.bias"])
        feat = ref_lnsa_block(feat, pr, f"{prefix}.dec{level}", cfg)
    residual = ref_conv2d(feat, pr[f"{prefix}.output.weight"],
                          pr[f"{prefix}.output.bias"], stride=1, pad=1)
    return x + residual


# -- estimator ---------------------------------------------------------------

def ref_estimate(cube_data, pr, iterations, floor=1e-4):
    bands, height, width = cube_data.shape
    x = cube_data.astype(np.float64).transpose(1, 2, 0)
    h1 = np.maximum(x @ pr["est.conv1.weight"], 0.0)
    h2 = ref_conv2d(h1, pr["est.conv2.weight"], pr["est.conv2.bias"],
                    stride=2, pad=1, circular=True)
    h2 = np.maximum(h2, 0.0)
    pooled = np.zeros(h2.shape[-1])
    for i in range(h2.shape[0]):
        for j in range(h2.shape[1]):
            pooled += h2[i, j]
    pooled /= h2.shape[0] * h2.shape[1]
    f1 = np.maximum(pooled @ pr["est.fc1.weight"] + pr["est.fc1.bias"], 0.0)
    f2 = np.maximum(f1 @ pr["est.fc2.weight"] + pr["est.fc2.bias"], 0.0)
    raw = f2 @ pr["est.fc3.weight"] + pr["est.fc3.bias"]
    out = np.array([math.log1p(math.exp(v)) if v < 30 else v for v in raw]) + floor
    k = iterations
    return out[:k], out[k:2 * k], out[2 * k:3 * k], out[3 * k:]
